use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Horizontal position in kilometres.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Position {
    pub x: f64,
    pub y: f64,
}

impl Position {
    pub const fn new(x: f64, y: f64) -> Self {
        Position { x, y }
    }

    pub fn distance_km(&self, other: &Position) -> f64 {
        ((self.x - other.x).powi(2) + (self.y - other.y).powi(2)).sqrt()
    }
}

/// A radio endpoint: horizontal position (km) plus antenna height (m).
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Site {
    pub pos: Position,
    pub height_m: f64,
}

impl Site {
    pub const fn new(pos: Position, height_m: f64) -> Self {
        Site { pos, height_m }
    }

    pub const fn ground(pos: Position) -> Self {
        Site { pos, height_m: 0.0 }
    }
}

/// `L = (dh^2 + dx^2 + dy^2)^(alpha/2)` with every distance in metres.
pub fn path_loss(src: Site, dst: Site, alpha: f64) -> Result<f64> {
    if src.height_m < 0.0 || dst.height_m < 0.0 {
        return Err(Error::Config("antenna heights must be non-negative".into()));
    }
    if alpha == 0.0 {
        return Ok(1.0);
    }
    let dh = src.height_m - dst.height_m;
    let dx = (src.pos.x - dst.pos.x) * 1000.0;
    let dy = (src.pos.y - dst.pos.y) * 1000.0;
    let d2 = dh * dh + dx * dx + dy * dy;
    if d2 == 0.0 {
        return Err(Error::ZeroDistance);
    }
    Ok(d2.powf(alpha / 2.0))
}

/// Base station, user and jammer positions.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Geometry {
    pub bs_positions: Vec<Position>,
    pub user_positions: Vec<Position>,
    pub jammer_position: Option<Position>,
    pub coverage_radius_km: f64,
}

impl Geometry {
    pub fn covering(&self, pos: &Position) -> impl Iterator<Item = usize> + '_ {
        let p = *pos;
        self.bs_positions
            .iter()
            .enumerate()
            .filter(move |(_, b)| b.distance_km(&p) <= self.coverage_radius_km)
            .map(|(i, _)| i)
    }

    pub fn is_covered(&self, pos: &Position) -> bool {
        self.covering(pos).next().is_some()
    }

    /// Covering base stations sorted by distance, nearest first (index breaks ties).
    pub fn covering_by_distance(&self, pos: &Position) -> Vec<usize> {
        let mut v: Vec<(f64, usize)> = self.covering(pos).map(|b| (self.bs_positions[b].distance_km(pos), b)).collect();
        v.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
        v.into_iter().map(|(_, b)| b).collect()
    }

    pub fn all_users_covered(&self) -> bool {
        self.user_positions.iter().all(|u| self.is_covered(u))
    }
}
