//! Image-to-spike encoding.
//!
//! An image passes through three stages: a receptive-field convolution (a
//! low-pass blur by default), a firing-rate map that turns each filtered
//! value into spikes per Time Unit, and a deterministic periodic schedule
//! realizing those rates over one presentation. The per-image firing
//! threshold is derived from the hottest input rate so that bright and dim
//! images drive the output layer uniformly.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::TimeUnit;

/// Square convolution kernel with odd side length.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Kernel {
    side: usize,
    coeffs: Vec<f64>,
}

impl Kernel {
    /// Build a kernel from row-major coefficients; the length must be an odd
    /// perfect square.
    pub fn new(coeffs: Vec<f64>) -> Result<Self> {
        let side = (coeffs.len() as f64).sqrt().round() as usize;
        if side * side != coeffs.len() || side % 2 == 0 || coeffs.is_empty() {
            return Err(Error::config(
                "encoder.kernel",
                format!(
                    "expected an odd square number of coefficients, got {}",
                    coeffs.len()
                ),
            ));
        }
        if coeffs.iter().any(|c| !c.is_finite()) {
            return Err(Error::config("encoder.kernel", "coefficients must be finite"));
        }
        Ok(Kernel { side, coeffs })
    }

    /// Normalized box blur, the default receptive field.
    pub fn box_blur(side: usize) -> Self {
        assert!(side % 2 == 1, "kernel side must be odd");
        let n = side * side;
        Kernel {
            side,
            coeffs: vec![1.0 / n as f64; n],
        }
    }

    pub fn side(&self) -> usize {
        self.side
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }
}

impl Default for Kernel {
    fn default() -> Self {
        Kernel::box_blur(3)
    }
}

/// Encoding constants.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EncoderParams {
    /// Receptive-field filter applied before rate coding.
    pub kernel: Kernel,
    /// Minimum refractory period of an input neuron; caps rates at
    /// `1 / rp_min`.
    pub rp_min: u32,
    /// Filter output that maps to the maximum firing rate.
    pub r_max: f64,
    /// Time Units per image presentation.
    pub presentation_t: u32,
    /// Fraction of the maximum input spike frequency used for the firing
    /// threshold.
    pub threshold_fraction: f64,
    /// Threshold fallback for images that produce no spikes at all.
    pub theta_min: f64,
}

impl Default for EncoderParams {
    fn default() -> Self {
        EncoderParams {
            kernel: Kernel::default(),
            rp_min: 4,
            r_max: 255.0,
            presentation_t: 40,
            threshold_fraction: 1.0 / 3.0,
            theta_min: 1.0,
        }
    }
}

impl EncoderParams {
    pub fn validate(&self, prefix: &str) -> Result<()> {
        let field = |name: &str| format!("{prefix}.{name}");
        if self.rp_min < 1 {
            return Err(Error::config(&field("rp_min"), "must be >= 1"));
        }
        if !self.r_max.is_finite() || self.r_max <= 0.0 {
            return Err(Error::config(&field("r_max"), "must be > 0"));
        }
        if self.presentation_t < 1 {
            return Err(Error::config(&field("presentation_t"), "must be >= 1"));
        }
        if !self.threshold_fraction.is_finite()
            || self.threshold_fraction <= 0.0
            || self.threshold_fraction > 1.0
        {
            return Err(Error::config(
                &field("threshold_fraction"),
                "must be in (0, 1]",
            ));
        }
        if !self.theta_min.is_finite() || self.theta_min <= 0.0 {
            return Err(Error::config(&field("theta_min"), "must be > 0"));
        }
        Ok(())
    }
}

/// One image, encoded: per-input firing rates, the spike schedule realizing
/// them, and the per-image threshold.
#[derive(Debug, Clone, PartialEq)]
pub struct EncodedStimulus {
    /// Spikes per Time Unit for each input neuron.
    pub rates: Vec<f64>,
    /// Sorted spike times in `[1, presentation_t]` for each input neuron.
    pub schedule: Vec<Vec<TimeUnit>>,
    /// Firing threshold used for the whole presentation.
    pub threshold: f64,
    /// Presentation length in Time Units.
    pub presentation_t: u32,
}

impl EncodedStimulus {
    pub fn input_count(&self) -> usize {
        self.rates.len()
    }
}

/// Convolve the image with the receptive-field kernel, zero-padded at the
/// borders. Output has the same shape as the input.
pub fn receptive_field(
    pixels: &[u8],
    rows: usize,
    cols: usize,
    kernel: &Kernel,
) -> Result<Vec<f64>> {
    if rows == 0 || cols == 0 || pixels.len() != rows * cols {
        return Err(Error::Input(format!(
            "image must be non-empty and rectangular ({} pixels for {rows}x{cols})",
            pixels.len()
        )));
    }
    let half = kernel.side as isize / 2;
    let mut out = vec![0.0; rows * cols];
    for r in 0..rows as isize {
        for c in 0..cols as isize {
            let mut acc = 0.0;
            for kr in 0..kernel.side as isize {
                for kc in 0..kernel.side as isize {
                    let (ir, ic) = (r + kr - half, c + kc - half);
                    if ir >= 0 && ir < rows as isize && ic >= 0 && ic < cols as isize {
                        let coeff = kernel.coeffs[(kr * kernel.side as isize + kc) as usize];
                        acc += coeff * f64::from(pixels[(ir * cols as isize + ic) as usize]);
                    }
                }
            }
            out[(r * cols as isize + c) as usize] = acc;
        }
    }
    Ok(out)
}

/// Firing rate for one filtered value: zero at or below zero, linear up to
/// the `1 / rp_min` cap reached at `r_max`.
pub fn firing_rate(rf: f64, params: &EncoderParams) -> f64 {
    if rf <= 0.0 {
        0.0
    } else {
        (rf / params.r_max).min(1.0) / f64::from(params.rp_min)
    }
}

/// Deterministic periodic schedule: a neuron with rate `fr` spikes at
/// `ceil(k / fr)` for k = 1, 2, ... within the presentation.
pub fn make_schedule(rates: &[f64], presentation_t: u32) -> Vec<Vec<TimeUnit>> {
    rates
        .iter()
        .map(|&rate| {
            let mut times = Vec::new();
            if rate > 0.0 {
                for k in 1u64.. {
                    let t = (k as f64 / rate).ceil();
                    if t > f64::from(presentation_t) {
                        break;
                    }
                    times.push(t as TimeUnit);
                }
            }
            times
        })
        .collect()
}

/// Per-image threshold: a fraction of the hottest input's total spike count
/// over the presentation, scaled by the maximum synapse weight so frequency
/// compares against an attainable potential. Falls back to `theta_min` for
/// silent images.
pub fn variable_threshold(rates: &[f64], params: &EncoderParams, w_max: f64) -> f64 {
    let max_rate = rates.iter().copied().fold(0.0f64, f64::max);
    if max_rate > 0.0 {
        params.threshold_fraction * max_rate * f64::from(params.presentation_t) * w_max
    } else {
        params.theta_min
    }
}

/// Full encoding chain for one image.
pub fn encode(
    pixels: &[u8],
    rows: usize,
    cols: usize,
    params: &EncoderParams,
    w_max: f64,
) -> Result<EncodedStimulus> {
    let rf = receptive_field(pixels, rows, cols, &params.kernel)?;
    let rates: Vec<f64> = rf.iter().map(|&v| firing_rate(v, params)).collect();
    let schedule = make_schedule(&rates, params.presentation_t);
    let threshold = variable_threshold(&rates, params, w_max);
    Ok(EncodedStimulus {
        rates,
        schedule,
        threshold,
        presentation_t: params.presentation_t,
    })
}
