use rand::seq::index;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::traffic::ActionMatrix;

use super::decode::max_rate_action;
use super::observation::StationObservation;

/// Rate assumed for a channel a user has no history on.
pub const UNKNOWN_RATE_PRIOR: f64 = 1.0;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum BaselineKind {
    Fifo,
    HardSlicing,
    MaxRate,
    Random,
}

fn estimate(h: f64) -> f64 {
    if h > 0.0 {
        h
    } else {
        UNKNOWN_RATE_PRIOR
    }
}

/// Channels sorted by estimated rate for one request, best first.
fn ranked(row: &[f64], free: &[bool]) -> Vec<usize> {
    let mut cs: Vec<usize> = (0..row.len()).filter(|&c| free[c]).collect();
    cs.sort_by(|&x, &y| estimate(row[y]).total_cmp(&estimate(row[x])));
    cs
}

pub fn random_action<R: Rng + ?Sized>(n_r: usize, num_channels: usize, n_c: usize, rng: &mut R) -> ActionMatrix {
    let mut a = ActionMatrix::new(n_r, num_channels);
    if n_r == 0 {
        return a;
    }
    for c in index::sample(rng, num_channels, n_c.min(num_channels)) {
        a.set(rng.random_range(0..n_r), c, true);
    }
    a
}

/// Serves requests in arrival order, giving each the best remaining channels
/// until its estimated rate covers the minimum; what is left goes to the
/// request with the best history on each channel.
pub fn fifo_action(obs: &StationObservation, n_c: usize) -> ActionMatrix {
    let n = obs.num_channels();
    let n_r = obs.num_serving();
    let mut a = ActionMatrix::new(n_r, n);
    let mut free = vec![true; n];
    let mut budget = n_c.min(n);
    for k in 0..n_r {
        let mut got = 0.0;
        for c in ranked(&obs.history[k], &free) {
            if budget == 0 || got >= obs.min_rates[k] {
                break;
            }
            a.set(k, c, true);
            free[c] = false;
            budget -= 1;
            got += estimate(obs.history[k][c]);
        }
    }
    fill_leftover(obs, &mut a, &mut free, budget);
    a
}

fn fill_leftover(obs: &StationObservation, a: &mut ActionMatrix, free: &mut [bool], mut budget: usize) {
    let n_r = obs.num_serving();
    if n_r == 0 {
        return;
    }
    let mut left: Vec<(usize, usize, f64)> = (0..free.len())
        .filter(|&c| free[c])
        .map(|c| {
            let mut best = 0;
            for k in 1..n_r {
                if estimate(obs.history[k][c]) > estimate(obs.history[best][c]) {
                    best = k;
                }
            }
            (c, best, estimate(obs.history[best][c]))
        })
        .collect();
    left.sort_by(|x, y| y.2.total_cmp(&x.2));
    for (c, k, _) in left {
        if budget == 0 {
            break;
        }
        a.set(k, c, true);
        free[c] = false;
        budget -= 1;
    }
}

/// Largest-remainder split of `total` proportional to `weights`; ties to the lowest index.
pub fn proportional_counts(weights: &[f64], total: usize) -> Vec<usize> {
    let sum: f64 = weights.iter().sum();
    if weights.is_empty() {
        return Vec::new();
    }
    if sum <= 0.0 {
        return proportional_counts(&vec![1.0; weights.len()], total);
    }
    let quotas: Vec<f64> = weights.iter().map(|w| w / sum * total as f64).collect();
    let mut counts: Vec<usize> = quotas.iter().map(|q| q.floor() as usize).collect();
    let assigned: usize = counts.iter().sum();
    let mut order: Vec<usize> = (0..weights.len()).collect();
    order.sort_by(|&x, &y| (quotas[y] - quotas[y].floor()).total_cmp(&(quotas[x] - quotas[x].floor())));
    for &k in order.iter().take(total - assigned) {
        counts[k] += 1;
    }
    counts
}

/// Fixed slices: channel counts proportional to the minimum rates.
pub fn hard_slicing_action(obs: &StationObservation, n_c: usize) -> ActionMatrix {
    let n = obs.num_channels();
    let n_r = obs.num_serving();
    let mut a = ActionMatrix::new(n_r, n);
    let counts = proportional_counts(&obs.min_rates, n_c.min(n));
    let mut free = vec![true; n];
    for k in 0..n_r {
        for c in ranked(&obs.history[k], &free).into_iter().take(counts[k]) {
            a.set(k, c, true);
            free[c] = false;
        }
    }
    a
}

pub fn baseline_action<R: Rng + ?Sized>(
    kind: BaselineKind,
    obs: &StationObservation,
    n_c: usize,
    rng: &mut R,
) -> ActionMatrix {
    match kind {
        BaselineKind::Fifo => fifo_action(obs, n_c),
        BaselineKind::HardSlicing => hard_slicing_action(obs, n_c),
        BaselineKind::MaxRate => max_rate_action(&obs.history, obs.num_channels(), n_c),
        BaselineKind::Random => random_action(obs.num_serving(), obs.num_channels(), n_c, rng),
    }
}
