//! Flat key/value configuration.
//!
//! The file format is one `section.key = value` assignment per line, with
//! `#` comments and blank lines ignored. Unknown keys are errors so typos
//! cannot silently fall back to defaults. Every value is validated against
//! the module invariants on load and violations are reported with the dotted
//! field path.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::encoder::{EncoderParams, Kernel};
use crate::engine::TimeUnitCost;
use crate::error::{Error, Result};
use crate::neuron::NeuronParams;
use crate::stdp::StdpParams;

/// Dataset file locations.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DataPaths {
    pub train_images: PathBuf,
    pub train_labels: PathBuf,
    pub test_images: PathBuf,
    pub test_labels: PathBuf,
}

impl Default for DataPaths {
    fn default() -> Self {
        DataPaths {
            train_images: "data/train-images-idx3-ubyte".into(),
            train_labels: "data/train-labels-idx1-ubyte".into(),
            test_images: "data/t10k-images-idx3-ubyte".into(),
            test_labels: "data/t10k-labels-idx1-ubyte".into(),
        }
    }
}

/// Run sizes, topology and weight initialization.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PipelineParams {
    /// Output layer size.
    pub output_count: usize,
    /// Training images per run.
    pub train_limit: usize,
    /// Classification images per run.
    pub classify_limit: usize,
    /// Training-set prefix presented again post-training to label neurons.
    pub labeling_limit: usize,
    /// Worker threads for classification (training is inherently serial).
    pub parallelism: usize,
    /// Initial weight range as fractions of w_max.
    pub init_lo: f64,
    pub init_hi: f64,
}

impl Default for PipelineParams {
    fn default() -> Self {
        PipelineParams {
            output_count: 16,
            train_limit: 1000,
            classify_limit: 500,
            labeling_limit: 1000,
            parallelism: 1,
            init_lo: 0.4,
            init_hi: 0.6,
        }
    }
}

impl PipelineParams {
    pub fn validate(&self, prefix: &str) -> Result<()> {
        let field = |name: &str| format!("{prefix}.{name}");
        if self.output_count == 0 {
            return Err(Error::config(&field("output_count"), "must be >= 1"));
        }
        if self.parallelism == 0 {
            return Err(Error::config(&field("parallelism"), "must be >= 1"));
        }
        if !(self.init_lo.is_finite() && self.init_hi.is_finite())
            || self.init_lo < 0.0
            || self.init_hi > 1.0
            || self.init_lo > self.init_hi
        {
            return Err(Error::config(
                &field("init_lo"),
                "initial weight fractions must satisfy 0 <= init_lo <= init_hi <= 1",
            ));
        }
        Ok(())
    }
}

/// Every tunable of a run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Config {
    pub neuron: NeuronParams,
    pub stdp: StdpParams,
    pub encoder: EncoderParams,
    pub cost: TimeUnitCost,
    pub pipeline: PipelineParams,
    pub data: DataPaths,
    pub seed: u64,
}

impl Default for Config {
    fn default() -> Self {
        Config {
            neuron: NeuronParams::default(),
            stdp: StdpParams::default(),
            encoder: EncoderParams::default(),
            cost: TimeUnitCost::default(),
            pipeline: PipelineParams::default(),
            data: DataPaths::default(),
            seed: 1,
        }
    }
}

impl Config {
    pub fn from_file(path: &Path) -> Result<Config> {
        let text = std::fs::read_to_string(path)?;
        Config::parse(&text)
    }

    /// Parse assignments on top of the defaults, then validate.
    pub fn parse(text: &str) -> Result<Config> {
        let mut config = Config::default();
        for (line_no, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let Some((key, value)) = line.split_once('=') else {
                return Err(Error::config(
                    &format!("line {}", line_no + 1),
                    format!("expected `key = value`, got `{line}`"),
                ));
            };
            config.assign(key.trim(), value.trim())?;
        }
        config.validate()?;
        Ok(config)
    }

    fn assign(&mut self, key: &str, value: &str) -> Result<()> {
        match key {
            "neuron.decay" => self.neuron.decay = parse_f64(key, value)?,
            "neuron.p_min" => self.neuron.p_min = parse_f64(key, value)?,
            "neuron.p_rest" => self.neuron.p_rest = parse_f64(key, value)?,
            "neuron.p_refract" => self.neuron.p_refract = parse_f64(key, value)?,
            "neuron.t_refract" => self.neuron.t_refract = parse_int(key, value)?,
            "stdp.a_plus" => self.stdp.a_plus = parse_f64(key, value)?,
            "stdp.a_minus" => self.stdp.a_minus = parse_f64(key, value)?,
            "stdp.tau_plus" => self.stdp.tau_plus = parse_f64(key, value)?,
            "stdp.tau_minus" => self.stdp.tau_minus = parse_f64(key, value)?,
            "stdp.sigma" => self.stdp.sigma = parse_f64(key, value)?,
            "stdp.w_min" => self.stdp.w_min = parse_f64(key, value)?,
            "stdp.w_max" => self.stdp.w_max = parse_f64(key, value)?,
            "stdp.window_lo" => self.stdp.window_lo = parse_int(key, value)?,
            "stdp.window_hi" => self.stdp.window_hi = parse_int(key, value)?,
            "encoder.kernel" => self.encoder.kernel = parse_kernel(key, value)?,
            "encoder.rp_min" => self.encoder.rp_min = parse_int(key, value)?,
            "encoder.r_max" => self.encoder.r_max = parse_f64(key, value)?,
            "encoder.presentation_t" => self.encoder.presentation_t = parse_int(key, value)?,
            "encoder.threshold_fraction" => {
                self.encoder.threshold_fraction = parse_f64(key, value)?
            }
            "encoder.theta_min" => self.encoder.theta_min = parse_f64(key, value)?,
            "cost.tsc" => self.cost.tsc = parse_int(key, value)?,
            "cost.tpa" => self.cost.tpa = parse_int(key, value)?,
            "cost.tpd" => self.cost.tpd = parse_int(key, value)?,
            "cost.twc" => self.cost.twc = parse_int(key, value)?,
            "pipeline.output_count" => self.pipeline.output_count = parse_int(key, value)?,
            "pipeline.train_limit" => self.pipeline.train_limit = parse_int(key, value)?,
            "pipeline.classify_limit" => self.pipeline.classify_limit = parse_int(key, value)?,
            "pipeline.labeling_limit" => self.pipeline.labeling_limit = parse_int(key, value)?,
            "pipeline.parallelism" => self.pipeline.parallelism = parse_int(key, value)?,
            "pipeline.init_lo" => self.pipeline.init_lo = parse_f64(key, value)?,
            "pipeline.init_hi" => self.pipeline.init_hi = parse_f64(key, value)?,
            "data.train_images" => self.data.train_images = value.into(),
            "data.train_labels" => self.data.train_labels = value.into(),
            "data.test_images" => self.data.test_images = value.into(),
            "data.test_labels" => self.data.test_labels = value.into(),
            "seed" => self.seed = parse_int(key, value)?,
            _ => {
                return Err(Error::config(key, "unknown configuration key"));
            }
        }
        Ok(())
    }

    pub fn validate(&self) -> Result<()> {
        self.neuron.validate("neuron")?;
        self.stdp.validate("stdp")?;
        self.encoder.validate("encoder")?;
        self.cost.validate("cost")?;
        self.pipeline.validate("pipeline")?;
        if self.encoder.theta_min <= self.neuron.p_rest {
            return Err(Error::config(
                "encoder.theta_min",
                "must exceed neuron.p_rest so a threshold is always reachable",
            ));
        }
        Ok(())
    }
}

fn parse_f64(key: &str, value: &str) -> Result<f64> {
    value
        .parse()
        .map_err(|_| Error::config(key, format!("`{value}` is not a number")))
}

fn parse_int<T: std::str::FromStr>(key: &str, value: &str) -> Result<T> {
    value
        .parse()
        .map_err(|_| Error::config(key, format!("`{value}` is not a valid integer")))
}

fn parse_kernel(key: &str, value: &str) -> Result<Kernel> {
    let coeffs = value
        .split(',')
        .map(|part| parse_f64(key, part.trim()))
        .collect::<Result<Vec<f64>>>()?;
    Kernel::new(coeffs)
}
