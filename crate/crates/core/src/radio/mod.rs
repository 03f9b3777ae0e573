//! Physical layer: Gauss-Markov fading, path loss, SINR rates with inter-cell
//! and jamming interference, and the jammer's listening measurement.
//!
//! Powers are normalized by the noise variance, so the noise floor is `1.0`.

pub mod bessel;
pub mod fading;
pub mod geometry;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use bessel::{bessel_j0, jakes_correlation};
pub use fading::{sample_cn, FadingField, LinkKind};
pub use geometry::{path_loss, Geometry, Position, Site};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RadioParams {
    pub num_channels: usize,
    /// `P_B / sigma^2`, linear.
    pub tx_power_to_noise: f64,
    /// `P_J / sigma^2`, linear.
    pub jam_power_to_noise: f64,
    pub path_loss_exponent: f64,
    pub bs_height_m: f64,
    pub jammer_height_m: f64,
    pub doppler_hz: f64,
    pub slot_duration_s: f64,
    pub cell_radius_km: f64,
    /// Link-budget scale multiplying every transmit power times path loss.
    pub link_gain: f64,
}

impl Default for RadioParams {
    fn default() -> Self {
        RadioParams {
            num_channels: 16,
            tx_power_to_noise: 6.3,
            jam_power_to_noise: 6.3,
            path_loss_exponent: -2.0,
            bs_height_m: 50.0,
            jammer_height_m: 10.0,
            doppler_hz: 1.0,
            slot_duration_s: 0.02,
            cell_radius_km: 2.5,
            link_gain: 1.0,
        }
    }
}

impl RadioParams {
    pub fn rho(&self) -> f64 {
        jakes_correlation(self.doppler_hz, self.slot_duration_s)
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::Config(format!("radio: {m}")));
        if self.num_channels == 0 {
            return bad("num_channels must be at least 1");
        }
        if self.path_loss_exponent >= 0.0 {
            return bad("path_loss_exponent must be negative");
        }
        if !(self.tx_power_to_noise > 0.0 && self.jam_power_to_noise > 0.0 && self.link_gain > 0.0) {
            return bad("powers and link gain must be positive");
        }
        if self.bs_height_m < 0.0 || self.jammer_height_m < 0.0 {
            return bad("heights must be non-negative");
        }
        let rho = self.rho();
        if !(0.0..=1.0).contains(&rho) {
            return bad("Doppler correlation must lie in [0, 1]");
        }
        Ok(())
    }
}

/// Which user (if any) each base station serves on each channel this slot.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TxMap {
    num_channels: usize,
    assign: Vec<Option<usize>>,
}

impl TxMap {
    pub fn new(num_bs: usize, num_channels: usize) -> Self {
        TxMap { num_channels, assign: vec![None; num_bs * num_channels] }
    }

    pub fn num_bs(&self) -> usize {
        self.assign.len() / self.num_channels
    }

    pub fn num_channels(&self) -> usize {
        self.num_channels
    }

    pub fn set(&mut self, b: usize, c: usize, user: Option<usize>) {
        self.assign[b * self.num_channels + c] = user;
    }

    #[inline]
    pub fn get(&self, b: usize, c: usize) -> Option<usize> {
        self.assign[b * self.num_channels + c]
    }

    #[inline]
    pub fn transmits(&self, b: usize, c: usize) -> bool {
        self.get(b, c).is_some()
    }

    pub fn clear_bs(&mut self, b: usize) {
        for c in 0..self.num_channels {
            self.set(b, c, None);
        }
    }
}

/// Radio state of the whole service area.
#[derive(Clone, Debug)]
pub struct RadioEnv {
    pub params: RadioParams,
    pub geometry: Geometry,
    pub fading: FadingField,
    loss_bs_user: Vec<f64>,
    loss_jam_user: Vec<f64>,
    loss_bs_jam: Vec<f64>,
}

impl RadioEnv {
    pub fn new<R: Rng + ?Sized>(
        params: RadioParams,
        geometry: Geometry,
        rng: &mut R,
        jammer_rng: &mut R,
    ) -> Result<Self> {
        params.validate()?;
        let fading = FadingField::stationary(
            params.rho(),
            geometry.bs_positions.len(),
            geometry.user_positions.len(),
            params.num_channels,
            rng,
            jammer_rng,
        );
        Self::with_fading(params, geometry, fading)
    }

    pub fn with_fading(params: RadioParams, geometry: Geometry, fading: FadingField) -> Result<Self> {
        let mut env = RadioEnv {
            params,
            geometry,
            fading,
            loss_bs_user: Vec::new(),
            loss_jam_user: Vec::new(),
            loss_bs_jam: Vec::new(),
        };
        env.refresh_path_loss()?;
        Ok(env)
    }

    pub fn num_bs(&self) -> usize {
        self.geometry.bs_positions.len()
    }

    pub fn num_users(&self) -> usize {
        self.geometry.user_positions.len()
    }

    pub fn num_channels(&self) -> usize {
        self.params.num_channels
    }

    pub fn has_jammer(&self) -> bool {
        self.geometry.jammer_position.is_some()
    }

    pub fn bs_site(&self, b: usize) -> Site {
        Site::new(self.geometry.bs_positions[b], self.params.bs_height_m)
    }

    pub fn jammer_site(&self) -> Option<Site> {
        self.geometry.jammer_position.map(|p| Site::new(p, self.params.jammer_height_m))
    }

    /// Recomputes cached path losses after any position change.
    pub fn refresh_path_loss(&mut self) -> Result<()> {
        let alpha = self.params.path_loss_exponent;
        let nb = self.num_bs();
        let nu = self.num_users();
        self.loss_bs_user = Vec::with_capacity(nb * nu);
        for b in 0..nb {
            for u in 0..nu {
                let ue = Site::ground(self.geometry.user_positions[u]);
                self.loss_bs_user.push(path_loss(self.bs_site(b), ue, alpha)?);
            }
        }
        self.loss_jam_user.clear();
        self.loss_bs_jam.clear();
        if let Some(j) = self.jammer_site() {
            for u in 0..nu {
                let ue = Site::ground(self.geometry.user_positions[u]);
                self.loss_jam_user.push(path_loss(j, ue, alpha)?);
            }
            for b in 0..nb {
                self.loss_bs_jam.push(path_loss(self.bs_site(b), j, alpha)?);
            }
        }
        Ok(())
    }

    pub fn loss_bs_user(&self, b: usize, u: usize) -> f64 {
        self.loss_bs_user[b * self.num_users() + u]
    }

    /// Received power of base station `b` at user `u` on channel `c`, over the noise.
    #[inline]
    pub fn bs_power_at_user(&self, b: usize, u: usize, c: usize) -> f64 {
        let p = &self.params;
        p.tx_power_to_noise
            * p.link_gain
            * self.loss_bs_user[b * self.num_users() + u]
            * self.fading.bs_user(b, u, c).norm_sqr()
    }

    #[inline]
    pub fn jam_power_at_user(&self, u: usize, c: usize) -> f64 {
        if self.loss_jam_user.is_empty() {
            return 0.0;
        }
        let p = &self.params;
        p.jam_power_to_noise * p.link_gain * self.loss_jam_user[u] * self.fading.jam_user(u, c).norm_sqr()
    }

    /// SINR rate (bits/symbol) of the `b -> u` link on channel `c`.
    pub fn channel_rate(&self, b: usize, u: usize, c: usize, tx: &TxMap, jammed: &[bool]) -> f64 {
        let signal = self.bs_power_at_user(b, u, c);
        if signal == 0.0 {
            return 0.0;
        }
        let mut interference = 0.0;
        for other in 0..self.num_bs() {
            if other != b && tx.transmits(other, c) {
                interference += self.bs_power_at_user(other, u, c);
            }
        }
        if jammed.get(c).copied().unwrap_or(false) {
            interference += self.jam_power_at_user(u, c);
        }
        (1.0 + signal / (interference + 1.0)).log2()
    }

    /// Per-channel power heard at the jammer, noise floor included.
    pub fn listen(&self, tx: &TxMap) -> Vec<f64> {
        let n = self.num_channels();
        let mut out = vec![1.0; n];
        if self.loss_bs_jam.is_empty() {
            return out;
        }
        let p = &self.params;
        for (c, o) in out.iter_mut().enumerate() {
            for b in 0..self.num_bs() {
                if tx.transmits(b, c) {
                    *o += p.tx_power_to_noise * p.link_gain * self.loss_bs_jam[b] * self.fading.bs_jam(b, c).norm_sqr();
                }
            }
        }
        out
    }

    /// Interference-free best rate on channel `c` over all links.
    pub fn max_potential_rate(&self, c: usize) -> f64 {
        let mut best: f64 = 0.0;
        for b in 0..self.num_bs() {
            for u in 0..self.num_users() {
                best = best.max((1.0 + self.bs_power_at_user(b, u, c)).log2());
            }
        }
        best
    }
}
