use rand::Rng;
use rand_distr::{Distribution, Exp1};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::radio::{path_loss, Geometry, Position, RadioParams, Site};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct LocationSearch {
    pub pitch_km: f64,
    /// Grid extends this far beyond the station bounding box.
    pub margin_km: f64,
    pub samples: usize,
}

impl Default for LocationSearch {
    fn default() -> Self {
        LocationSearch { pitch_km: 0.25, margin_km: 0.0, samples: 10_000 }
    }
}

/// One Monte Carlo draw: a covered user position and the squared fading
/// magnitudes of every station link and of the jammer link.
#[derive(Clone, Debug)]
struct Sample {
    user: Position,
    bs_gain: Vec<f64>,
    jam_gain: f64,
}

fn draw_samples<R: Rng + ?Sized>(geometry: &Geometry, n: usize, rng: &mut R) -> Vec<Sample> {
    let r = geometry.coverage_radius_km;
    let xs = geometry.bs_positions.iter().map(|p| p.x);
    let ys = geometry.bs_positions.iter().map(|p| p.y);
    let (x0, x1) = (xs.clone().fold(f64::INFINITY, f64::min) - r, xs.fold(f64::NEG_INFINITY, f64::max) + r);
    let (y0, y1) = (ys.clone().fold(f64::INFINITY, f64::min) - r, ys.fold(f64::NEG_INFINITY, f64::max) + r);
    let mut out = Vec::with_capacity(n);
    while out.len() < n {
        let user = Position::new(rng.random_range(x0..x1), rng.random_range(y0..y1));
        if !geometry.is_covered(&user) {
            continue;
        }
        // |h|^2 of a unit complex Gaussian is Exp(1)
        let bs_gain = (0..geometry.bs_positions.len()).map(|_| Exp1.sample(rng)).collect();
        out.push(Sample { user, bs_gain, jam_gain: Exp1.sample(rng) });
    }
    out
}

/// Large-scale losses from every station to every sampled user.
fn station_losses(geometry: &Geometry, params: &RadioParams, samples: &[Sample]) -> Result<Vec<Vec<f64>>> {
    samples
        .iter()
        .map(|s| {
            geometry
                .bs_positions
                .iter()
                .map(|&b| path_loss(Site::new(b, params.bs_height_m), Site::ground(s.user), params.path_loss_exponent))
                .collect()
        })
        .collect()
}

fn objective(candidate: Position, params: &RadioParams, samples: &[Sample], losses: &[Vec<f64>]) -> Result<f64> {
    let g = params.link_gain;
    let mut total = 0.0;
    for (s, l) in samples.iter().zip(losses) {
        let lj =
            path_loss(Site::new(candidate, params.jammer_height_m), Site::ground(s.user), params.path_loss_exponent)?;
        let jam = g * params.jam_power_to_noise * lj * s.jam_gain;
        let best = l
            .iter()
            .zip(&s.bs_gain)
            .map(|(li, hi)| (1.0 + g * params.tx_power_to_noise * li * hi / (jam + 1.0)).log2())
            .fold(0.0, f64::max);
        total += best;
    }
    Ok(params.num_channels as f64 * total / samples.len() as f64)
}

/// Expected best-station jammed sum rate for each candidate position, using
/// the same Monte Carlo draws for every candidate.
pub fn location_objectives<R: Rng + ?Sized>(
    geometry: &Geometry,
    params: &RadioParams,
    candidates: &[Position],
    samples: usize,
    rng: &mut R,
) -> Result<Vec<f64>> {
    if candidates.is_empty() {
        return Err(Error::EmptyGrid);
    }
    if geometry.bs_positions.is_empty() || samples == 0 {
        return Err(Error::Config("location search needs stations and samples".into()));
    }
    let draws = draw_samples(geometry, samples, rng);
    let losses = station_losses(geometry, params, &draws)?;
    candidates.iter().map(|&c| objective(c, params, &draws, &losses)).collect()
}

pub fn grid_candidates(geometry: &Geometry, search: &LocationSearch) -> Vec<Position> {
    if geometry.bs_positions.is_empty() || search.pitch_km <= 0.0 {
        return Vec::new();
    }
    let xs = geometry.bs_positions.iter().map(|p| p.x);
    let ys = geometry.bs_positions.iter().map(|p| p.y);
    let (x0, x1) = (xs.clone().fold(f64::INFINITY, f64::min), xs.fold(f64::NEG_INFINITY, f64::max));
    let (y0, y1) = (ys.clone().fold(f64::INFINITY, f64::min), ys.fold(f64::NEG_INFINITY, f64::max));
    let steps = |lo: f64, hi: f64| -> Vec<f64> {
        let lo = lo - search.margin_km;
        let n = ((hi + search.margin_km - lo) / search.pitch_km + 1e-9).floor() as usize;
        (0..=n).map(|i| lo + i as f64 * search.pitch_km).collect()
    };
    let (gx, gy) = (steps(x0, x1), steps(y0, y1));
    gy.iter().flat_map(|&y| gx.iter().map(move |&x| Position::new(x, y))).collect()
}

/// Grid point with the lowest expected jammed rate; ties to the first point.
pub fn optimize_location<R: Rng + ?Sized>(
    geometry: &Geometry,
    params: &RadioParams,
    search: &LocationSearch,
    rng: &mut R,
) -> Result<(Position, f64)> {
    let grid = grid_candidates(geometry, search);
    let obj = location_objectives(geometry, params, &grid, search.samples, rng)?;
    let mut best = 0;
    for i in 1..obj.len() {
        if obj[i] < obj[best] {
            best = i;
        }
    }
    Ok((grid[best], obj[best]))
}
