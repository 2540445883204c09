//! Simplified spike-time-dependent plasticity.
//!
//! The weight change for a pre/post spike time difference comes from an
//! exponential reinforcement curve that is materialized once into a small
//! lookup table (19 entries per side at the default window), and the weight
//! update itself uses soft bounds: potentiation scales with the headroom to
//! `w_max`, depression with the distance to `w_min`, so weights approach but
//! never escape their range.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Constants of the weight change rule and the reinforcement curve.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StdpParams {
    /// Potentiation amplitude (> 0).
    pub a_plus: f64,
    /// Depression amplitude (< 0).
    pub a_minus: f64,
    /// Steepness time constant on the potentiation side.
    pub tau_plus: f64,
    /// Steepness time constant on the depression side.
    pub tau_minus: f64,
    /// Learning-rate scale applied at update time.
    pub sigma: f64,
    /// Lower weight bound.
    pub w_min: f64,
    /// Upper weight bound.
    pub w_max: f64,
    /// Inclusive window edge closest to coincidence (|dt| below it is a dead
    /// zone).
    pub window_lo: u32,
    /// Inclusive far window edge (|dt| beyond it contributes nothing).
    pub window_hi: u32,
}

impl Default for StdpParams {
    fn default() -> Self {
        StdpParams {
            a_plus: 0.8,
            a_minus: -0.3,
            tau_plus: 5.0,
            tau_minus: 5.0,
            sigma: 0.5,
            w_min: 0.0,
            w_max: 1.0,
            window_lo: 2,
            window_hi: 20,
        }
    }
}

impl StdpParams {
    pub fn validate(&self, prefix: &str) -> Result<()> {
        let field = |name: &str| format!("{prefix}.{name}");
        if !self.tau_plus.is_finite() || self.tau_plus <= 0.0 {
            return Err(Error::config(&field("tau_plus"), "must be > 0"));
        }
        if !self.tau_minus.is_finite() || self.tau_minus <= 0.0 {
            return Err(Error::config(&field("tau_minus"), "must be > 0"));
        }
        if !self.sigma.is_finite() || self.sigma <= 0.0 {
            return Err(Error::config(&field("sigma"), "must be > 0"));
        }
        if !self.a_plus.is_finite() || self.a_plus < 0.0 {
            return Err(Error::config(&field("a_plus"), "must be >= 0"));
        }
        if !self.a_minus.is_finite() || self.a_minus > 0.0 {
            return Err(Error::config(&field("a_minus"), "must be <= 0"));
        }
        if !(self.w_min.is_finite() && self.w_max.is_finite()) || self.w_min >= self.w_max {
            return Err(Error::config(
                &field("w_min"),
                "bounds must be finite with w_min < w_max",
            ));
        }
        if self.window_lo < 1 || self.window_lo > self.window_hi {
            return Err(Error::config(
                &field("window_lo"),
                "window must satisfy 1 <= window_lo <= window_hi",
            ));
        }
        Ok(())
    }
}

/// Precomputed weight-change values for every integer offset in the window.
///
/// Index k on either side holds the value for |dt| = window_lo + k; both
/// sides therefore hold `window_hi - window_lo + 1` entries (19 at the
/// default [2, 20] window).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StdpTable {
    pot: Vec<f64>,
    dep: Vec<f64>,
    window_lo: u32,
    window_hi: u32,
}

impl StdpTable {
    /// Evaluate the reinforcement curve once per in-window offset.
    pub fn build(params: &StdpParams) -> Result<Self> {
        params.validate("stdp")?;
        let entries = (params.window_hi - params.window_lo + 1) as usize;
        let mut pot = Vec::with_capacity(entries);
        let mut dep = Vec::with_capacity(entries);
        for k in 0..entries {
            let dt = (params.window_lo + k as u32) as f64;
            // Magnitude decays as the spikes drift apart on both sides.
            pot.push(params.a_plus * (-dt / params.tau_plus).exp());
            dep.push(params.a_minus * (-dt / params.tau_minus).exp());
        }
        Ok(StdpTable {
            pot,
            dep,
            window_lo: params.window_lo,
            window_hi: params.window_hi,
        })
    }

    /// Potentiation-side entries, nearest offset first.
    pub fn potentiation(&self) -> &[f64] {
        &self.pot
    }

    /// Depression-side entries, nearest offset first.
    pub fn depression(&self) -> &[f64] {
        &self.dep
    }

    /// Weight change for the signed spike time difference
    /// `dt = t_post - t_pre`.
    ///
    /// Positive offsets (post after pre) potentiate, negative ones depress,
    /// and anything inside the dead zone or beyond the window returns 0.
    pub fn delta_w(&self, dt: i64) -> f64 {
        let magnitude = dt.unsigned_abs();
        if magnitude < u64::from(self.window_lo) || magnitude > u64::from(self.window_hi) {
            return 0.0;
        }
        let index = (magnitude - u64::from(self.window_lo)) as usize;
        if dt > 0 {
            self.pot[index]
        } else {
            self.dep[index]
        }
    }
}

/// Soft-bound weight update: `w + sigma * dw * headroom`, where the headroom
/// is `w_max - w` for potentiation and `w - w_min` for depression. The result
/// is clamped so weights are kept within `[w_min, w_max]` even for aggressive
/// `sigma * dw` products.
pub fn apply_weight_update(w_old: f64, dw: f64, params: &StdpParams) -> f64 {
    assert!(
        w_old >= params.w_min && w_old <= params.w_max,
        "weight {w_old} escaped bounds [{}, {}]",
        params.w_min,
        params.w_max
    );
    let headroom = if dw > 0.0 {
        params.w_max - w_old
    } else {
        w_old - params.w_min
    };
    (w_old + params.sigma * dw * headroom).clamp(params.w_min, params.w_max)
}
