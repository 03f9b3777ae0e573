use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::radio::Geometry;

use super::request::{Request, RequestId};
use super::station::BaseStation;

/// Request generation parameters; ranges are half-open uniform draws.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ArrivalParams {
    pub payload_range: (f64, f64),
    pub min_rate_range: (f64, f64),
    /// Extra slots on top of `p / m`.
    pub lifetime_slack_range: (f64, f64),
    /// Slots a user waits after a request resolves.
    pub cooldown_slots: u64,
    /// Per-slot probability that an idle user issues a request.
    pub arrival_prob: f64,
}

impl Default for ArrivalParams {
    fn default() -> Self {
        ArrivalParams {
            payload_range: (1.0, 2.0),
            min_rate_range: (0.8, 1.0),
            lifetime_slack_range: (2.0, 4.0),
            cooldown_slots: 2,
            arrival_prob: 0.5,
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct UserState {
    pub active: Option<RequestId>,
    /// Last slot of the cooldown window, if any.
    pub blocked_until: Option<u64>,
}

impl UserState {
    pub fn can_request(&self, t: u64) -> bool {
        self.active.is_none() && self.blocked_until.is_none_or(|b| t > b)
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct ArrivalReport {
    pub admitted: Vec<(usize, RequestId)>,
    pub denied: usize,
}

/// Issues requests for idle users and routes them to covering stations.
#[derive(Clone, Debug)]
pub struct RequestSource {
    pub params: ArrivalParams,
    pub users: Vec<UserState>,
    next_id: RequestId,
}

fn draw<R: Rng + ?Sized>(rng: &mut R, (lo, hi): (f64, f64)) -> f64 {
    if hi > lo {
        rng.random_range(lo..hi)
    } else {
        lo
    }
}

impl RequestSource {
    pub fn new(params: ArrivalParams, num_users: usize) -> Self {
        RequestSource { params, users: vec![UserState::default(); num_users], next_id: 1 }
    }

    /// Draws `(p, m, l)` with `l = p / m + slack`.
    pub fn draw_request<R: Rng + ?Sized>(&self, rng: &mut R) -> (f64, f64, f64) {
        let p = draw(rng, self.params.payload_range);
        let m = draw(rng, self.params.min_rate_range);
        let slack = draw(rng, self.params.lifetime_slack_range);
        let l = if m > 0.0 { p / m + slack } else { f64::INFINITY };
        (p, m, l)
    }

    pub fn arrivals<R: Rng + ?Sized>(
        &mut self,
        t: u64,
        rng: &mut R,
        geometry: &Geometry,
        stations: &mut [BaseStation],
    ) -> ArrivalReport {
        let mut report = ArrivalReport::default();
        for u in 0..self.users.len() {
            if !self.users[u].can_request(t) {
                continue;
            }
            if rng.random::<f64>() >= self.params.arrival_prob {
                continue;
            }
            let (p, m, l) = self.draw_request(rng);
            let id = self.next_id;
            self.next_id += 1;
            let mut req = Request::new(id, u, p, m, l, t);
            let mut placed = None;
            for b in geometry.covering_by_distance(&geometry.user_positions[u]) {
                if !stations[b].has_room() {
                    continue;
                }
                match stations[b].admit(req) {
                    Ok(()) => {
                        placed = Some(b);
                        break;
                    }
                    Err(back) => req = back,
                }
            }
            match placed {
                Some(b) => {
                    self.users[u].active = Some(id);
                    report.admitted.push((b, id));
                }
                None => {
                    report.denied += 1;
                    self.users[u].blocked_until = Some(t + self.params.cooldown_slots);
                }
            }
        }
        report
    }

    /// Frees the user of a resolved request and starts its cooldown.
    pub fn resolve(&mut self, user: usize, id: RequestId, t: u64) {
        let st = &mut self.users[user];
        if st.active == Some(id) {
            st.active = None;
            st.blocked_until = Some(t + self.params.cooldown_slots);
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::radio::Position;
    use crate::traffic::station::StationLimits;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn setup(n_users: usize) -> (Geometry, Vec<BaseStation>) {
        let g = Geometry {
            bs_positions: vec![Position::new(0.0, 0.0)],
            user_positions: vec![Position::new(0.1, 0.0); n_users],
            jammer_position: None,
            coverage_radius_km: 2.5,
        };
        let limits = StationLimits { max_channels: 8, max_serving: 1, max_queue: 1 };
        (g, vec![BaseStation::new(0, limits, n_users, 4, 5)])
    }

    #[test]
    fn full_stations_deny() {
        let (g, mut st) = setup(3);
        let params = ArrivalParams { arrival_prob: 1.0, ..Default::default() };
        let mut src = RequestSource::new(params, 3);
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let rep = src.arrivals(0, &mut rng, &g, &mut st);
        assert_eq!(rep.admitted.len(), 2);
        assert_eq!(rep.denied, 1);
        assert!(src.users[2].active.is_none());
    }

    #[test]
    fn cooldown_gates_new_requests() {
        let (g, mut st) = setup(1);
        let params = ArrivalParams { arrival_prob: 1.0, ..Default::default() };
        let mut src = RequestSource::new(params, 1);
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let rep = src.arrivals(0, &mut rng, &g, &mut st);
        let (_, id) = rep.admitted[0];
        st[0].serving.clear();
        src.resolve(0, id, 5);
        for t in 5..=7 {
            assert!(src.arrivals(t, &mut rng, &g, &mut st).admitted.is_empty(), "t = {t}");
        }
        assert_eq!(src.arrivals(8, &mut rng, &g, &mut st).admitted.len(), 1);
    }

    #[test]
    fn lifetime_range_from_draws() {
        let params = ArrivalParams { payload_range: (2.0, 2.0), min_rate_range: (1.0, 1.0), ..Default::default() };
        let src = RequestSource::new(params, 1);
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        for _ in 0..1000 {
            let (p, m, l) = src.draw_request(&mut rng);
            assert_eq!((p, m), (2.0, 1.0));
            assert!((4.0..=6.0).contains(&l));
        }
    }
}
