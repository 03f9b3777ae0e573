use serde::{Deserialize, Serialize};

use crate::traffic::{BaseStation, Request, StationLimits};

/// Feature scaling applied before anything reaches a network.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FeatureScale {
    pub rate: f64,
    pub payload: f64,
    pub min_rate: f64,
    pub lifetime: f64,
}

impl Default for FeatureScale {
    fn default() -> Self {
        FeatureScale { rate: 0.25, payload: 0.5, min_rate: 1.0, lifetime: 0.125 }
    }
}

impl FeatureScale {
    fn info(&self, r: &Request) -> [f64; 4] {
        let [p, m, l, p0] = r.info();
        [p * self.payload, m * self.min_rate, l * self.lifetime, p0 * self.payload]
    }
}

/// Sizes of every serialized piece of one station's observation.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ObservationDims {
    pub num_channels: usize,
    pub max_serving: usize,
    pub max_queue: usize,
}

impl ObservationDims {
    pub fn new(num_channels: usize, limits: StationLimits) -> Self {
        ObservationDims { num_channels, max_serving: limits.max_serving, max_queue: limits.max_queue }
    }

    /// Encoder step input: last action row, history row, request info.
    pub fn encoder_input(&self) -> usize {
        2 * self.num_channels + 4
    }

    /// Decoder step input: one history column over the serving slots, then their request info.
    pub fn decoder_input(&self) -> usize {
        5 * self.max_serving
    }

    pub fn init_input(&self) -> usize {
        4 * self.max_queue
    }

    pub fn critic_part(&self) -> usize {
        2 * self.max_serving * self.num_channels + 4 * (self.max_serving + self.max_queue)
    }
}

/// Everything one station's agent sees at the start of a slot.
#[derive(Clone, Debug, PartialEq)]
pub struct StationObservation {
    pub bs: usize,
    pub num_queued: usize,
    /// One row per serving request.
    pub encoder: Vec<Vec<f64>>,
    /// One row per channel.
    pub decoder: Vec<Vec<f64>>,
    pub init: Vec<f64>,
    /// Zero-padded fixed-size slice for the critic.
    pub critic: Vec<f64>,
    /// Raw latest history rates, serving request by channel.
    pub history: Vec<Vec<f64>>,
    pub min_rates: Vec<f64>,
}

impl StationObservation {
    pub fn num_serving(&self) -> usize {
        self.encoder.len()
    }

    pub fn num_channels(&self) -> usize {
        self.decoder.len()
    }
}

pub fn observe_station(bs: &BaseStation, dims: &ObservationDims, scale: &FeatureScale) -> StationObservation {
    let n = dims.num_channels;
    let nr = dims.max_serving;
    let serving = &bs.serving;
    let history: Vec<Vec<f64>> = serving.iter().map(|r| bs.history.latest_row(r.user)).collect();
    let last_rows: Vec<Vec<f64>> = serving
        .iter()
        .map(|r| match bs.last_action_row(r.id) {
            Some(row) => row.iter().map(|&on| if on { 1.0 } else { 0.0 }).collect(),
            None => vec![0.0; n],
        })
        .collect();
    let infos: Vec<[f64; 4]> = serving.iter().map(|r| scale.info(r)).collect();

    let encoder = (0..serving.len())
        .map(|k| {
            let mut x = Vec::with_capacity(dims.encoder_input());
            x.extend_from_slice(&last_rows[k]);
            x.extend(history[k].iter().map(|h| h * scale.rate));
            x.extend_from_slice(&infos[k]);
            x
        })
        .collect();

    let decoder = (0..n)
        .map(|c| {
            let mut x = vec![0.0; dims.decoder_input()];
            for k in 0..serving.len().min(nr) {
                x[k] = history[k][c] * scale.rate;
                x[nr + 4 * k..nr + 4 * k + 4].copy_from_slice(&infos[k]);
            }
            x
        })
        .collect();

    let mut init = vec![0.0; dims.init_input()];
    for (q, r) in bs.queue.iter().take(dims.max_queue).enumerate() {
        init[4 * q..4 * q + 4].copy_from_slice(&scale.info(r));
    }

    let mut critic = vec![0.0; dims.critic_part()];
    for k in 0..serving.len().min(nr) {
        critic[k * n..(k + 1) * n].copy_from_slice(&last_rows[k]);
        let off = nr * n + k * n;
        for c in 0..n {
            critic[off + c] = history[k][c] * scale.rate;
        }
        let off = 2 * nr * n + 4 * k;
        critic[off..off + 4].copy_from_slice(&infos[k]);
    }
    for q in 0..dims.max_queue.min(bs.queue.len()) {
        let off = 2 * nr * n + 4 * (nr + q);
        critic[off..off + 4].copy_from_slice(&init[4 * q..4 * q + 4]);
    }

    StationObservation {
        bs: bs.id,
        num_queued: bs.queue.len(),
        encoder,
        decoder,
        init,
        critic,
        history,
        min_rates: serving.iter().map(|r| r.min_rate).collect(),
    }
}

/// Observations of all stations in index order.
#[derive(Clone, Debug, PartialEq)]
pub struct ObservationBundle {
    pub stations: Vec<StationObservation>,
}

impl ObservationBundle {
    pub fn observe(stations: &[BaseStation], dims: &ObservationDims, scale: &FeatureScale) -> Self {
        ObservationBundle { stations: stations.iter().map(|b| observe_station(b, dims, scale)).collect() }
    }

    /// Centralized critic input: every station's slice in station order.
    pub fn global_critic_input(&self) -> Vec<f64> {
        self.stations.iter().flat_map(|s| s.critic.iter().copied()).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::traffic::Request;

    fn station() -> BaseStation {
        let limits = StationLimits { max_channels: 2, max_serving: 2, max_queue: 1 };
        BaseStation::new(0, limits, 3, 3, 4)
    }

    #[test]
    fn sizes_match_dims() {
        let mut bs = station();
        bs.admit(Request::new(0, 1, 2.0, 1.0, 4.0, 0)).unwrap();
        bs.history.push(1, 2, 4.0);
        let dims = ObservationDims::new(3, bs.limits);
        let o = observe_station(&bs, &dims, &FeatureScale::default());
        assert_eq!(o.num_serving(), 1);
        assert_eq!(o.encoder[0].len(), dims.encoder_input());
        assert_eq!(o.decoder.len(), 3);
        assert_eq!(o.decoder[2][0], 1.0);
        assert_eq!(o.critic.len(), dims.critic_part());
        assert_eq!(o.history[0], vec![0.0, 0.0, 4.0]);
    }

    #[test]
    fn absent_requests_are_zero() {
        let bs = station();
        let dims = ObservationDims::new(3, bs.limits);
        let o = observe_station(&bs, &dims, &FeatureScale::default());
        assert!(o.critic.iter().all(|&x| x == 0.0));
        assert!(o.init.iter().all(|&x| x == 0.0));
        assert_eq!(o.num_serving(), 0);
    }
}
