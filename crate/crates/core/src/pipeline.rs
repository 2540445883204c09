//! Dataset-level operations: unsupervised training, neuron labeling,
//! classification with metrics, model persistence, and the sparsity
//! benchmark.
//!
//! Training is strictly sequential (STDP is order dependent). Classification
//! never mutates weights, so it may fan out over worker threads, each owning
//! a clone of the frozen network; per-image records stay index-ordered and
//! stats merge associatively, keeping every output deterministic.

use std::path::Path;

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::config::Config;
use crate::encoder::{self, EncoderParams};
use crate::engine::{
    dense_oracle, run_presentation, Mode, Network, RunStats, SimParams, TimeUnitCost,
};
use crate::error::{Error, Result};
use crate::mnist::Dataset;
use crate::neuron::NeuronParams;
use crate::stdp::StdpParams;

pub const SNAPSHOT_FORMAT: &str = "snnsim-model";
pub const SNAPSHOT_VERSION: u32 = 1;

/// Class assignment for each output neuron.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NeuronLabeling {
    /// Assigned class per output neuron.
    pub classes: Vec<u8>,
    /// Spikes the neuron produced for its assigned class during labeling;
    /// 0 for neurons that never spiked.
    pub scores: Vec<f64>,
}

impl NeuronLabeling {
    pub fn unassigned(output_count: usize) -> Self {
        NeuronLabeling {
            classes: vec![0; output_count],
            scores: vec![0.0; output_count],
        }
    }
}

/// Persisted model: weights, every parameter block, and the labeling.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelSnapshot {
    pub format: String,
    pub version: u32,
    pub input_rows: usize,
    pub input_cols: usize,
    pub output_count: usize,
    pub seed: u64,
    pub neuron: NeuronParams,
    pub stdp: StdpParams,
    pub encoder: EncoderParams,
    pub cost: TimeUnitCost,
    pub labeling: NeuronLabeling,
    /// Row-major per output neuron.
    pub weights: Vec<Vec<f64>>,
}

impl ModelSnapshot {
    pub fn input_count(&self) -> usize {
        self.input_rows * self.input_cols
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        let file = std::fs::File::create(path)?;
        let mut writer = std::io::BufWriter::new(file);
        serde_json::to_writer_pretty(&mut writer, self)
            .map_err(|err| Error::Snapshot(err.to_string()))?;
        use std::io::Write;
        writer.write_all(b"\n")?;
        writer.flush()?;
        Ok(())
    }

    pub fn load(path: &Path) -> Result<Self> {
        let file = std::fs::File::open(path)?;
        let snapshot: ModelSnapshot = serde_json::from_reader(std::io::BufReader::new(file))
            .map_err(|err| Error::Snapshot(err.to_string()))?;
        if snapshot.format != SNAPSHOT_FORMAT {
            return Err(Error::Snapshot(format!(
                "unexpected format `{}`",
                snapshot.format
            )));
        }
        if snapshot.version != SNAPSHOT_VERSION {
            return Err(Error::Snapshot(format!(
                "unsupported version {} (this build reads {SNAPSHOT_VERSION})",
                snapshot.version
            )));
        }
        if snapshot.weights.len() != snapshot.output_count
            || snapshot
                .weights
                .iter()
                .any(|row| row.len() != snapshot.input_count())
        {
            return Err(Error::Snapshot("weight matrix shape mismatch".into()));
        }
        snapshot.neuron.validate("neuron")?;
        snapshot.stdp.validate("stdp")?;
        snapshot.encoder.validate("encoder")?;
        snapshot.cost.validate("cost")?;
        Ok(snapshot)
    }

    fn network(&self) -> Result<Network> {
        let flat: Vec<f64> = self.weights.iter().flatten().copied().collect();
        Network::new(self.input_count(), self.output_count, flat)
    }

    fn sim(&self) -> Result<SimParams> {
        SimParams::new(self.neuron, self.stdp, self.cost)
    }
}

/// Per-image metrics row; `prediction` stays empty for training runs.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ImageRecord {
    pub index: usize,
    pub label: u8,
    pub prediction: Option<u8>,
    pub first_spiker: Option<usize>,
    pub time_units: u64,
    pub cycles: u64,
}

/// Outcome of a training run.
#[derive(Debug, Clone)]
pub struct TrainReport {
    pub snapshot: ModelSnapshot,
    pub stats: RunStats,
    pub records: Vec<ImageRecord>,
}

/// Outcome of a classification run.
#[derive(Debug, Clone)]
pub struct ClassifyReport {
    pub records: Vec<ImageRecord>,
    pub correct: usize,
    pub total: usize,
    pub accuracy: f64,
    /// `confusion[label][prediction]`.
    pub confusion: [[u64; 10]; 10],
    pub stats: RunStats,
}

/// Seeded uniform weights in `[init_lo, init_hi] * w_max`, row-major.
pub fn init_weights(config: &Config, input_count: usize) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let lo = config.pipeline.init_lo * config.stdp.w_max;
    let hi = config.pipeline.init_hi * config.stdp.w_max;
    (0..input_count * config.pipeline.output_count)
        .map(|_| {
            if lo == hi {
                lo
            } else {
                rng.random_range(lo..hi)
            }
        })
        .collect()
}

fn check_limit(requested: usize, available: usize, what: &str) -> Result<()> {
    if available == 0 {
        return Err(Error::Input(format!("{what} dataset is empty")));
    }
    if requested > available {
        return Err(Error::Input(format!(
            "requested {requested} {what} images but the dataset holds {available}"
        )));
    }
    Ok(())
}

/// Train on the first `limit` images, then label the output neurons on the
/// training-set prefix.
pub fn train(dataset: &Dataset, config: &Config, limit: usize) -> Result<TrainReport> {
    check_limit(limit, dataset.len(), "training")?;
    let input_count = dataset.pixel_count();
    let sim = SimParams::new(config.neuron, config.stdp, config.cost)?;
    let mut net = Network::new(
        input_count,
        config.pipeline.output_count,
        init_weights(config, input_count),
    )?;

    let mut stats = RunStats::default();
    let mut records = Vec::with_capacity(limit);
    for index in 0..limit {
        let stimulus = encoder::encode(
            &dataset.images[index],
            dataset.rows,
            dataset.cols,
            &config.encoder,
            config.stdp.w_max,
        )?;
        let result = run_presentation(&mut net, &stimulus, Mode::Train, &sim)?;
        stats.merge(&result.stats);
        records.push(ImageRecord {
            index,
            label: dataset.labels[index],
            prediction: None,
            first_spiker: result.first_spiker,
            time_units: result.stats.time_units_total,
            cycles: result.stats.cycles_total,
        });
    }

    let labeling_count = config.pipeline.labeling_limit.min(dataset.len());
    let labeling = label_neurons_on_network(&mut net, dataset, labeling_count, config, &sim)?;

    let weights = (0..config.pipeline.output_count)
        .map(|o| net.weights_of(o).to_vec())
        .collect();
    let snapshot = ModelSnapshot {
        format: SNAPSHOT_FORMAT.to_string(),
        version: SNAPSHOT_VERSION,
        input_rows: dataset.rows,
        input_cols: dataset.cols,
        output_count: config.pipeline.output_count,
        seed: config.seed,
        neuron: config.neuron,
        stdp: config.stdp,
        encoder: config.encoder.clone(),
        cost: config.cost,
        labeling,
        weights,
    };
    Ok(TrainReport {
        snapshot,
        stats,
        records,
    })
}

/// Present the first `count` dataset images in classify mode and assign each
/// neuron the class it spiked for most. Ties break to the lowest class id;
/// neurons that never spiked fall back to the class with the highest total
/// response (score 0).
pub fn label_neurons(
    snapshot: &ModelSnapshot,
    dataset: &Dataset,
    count: usize,
) -> Result<NeuronLabeling> {
    let sim = snapshot.sim()?;
    let mut net = snapshot.network()?;
    let config_like = Config {
        neuron: snapshot.neuron,
        stdp: snapshot.stdp,
        encoder: snapshot.encoder.clone(),
        cost: snapshot.cost,
        ..Config::default()
    };
    label_neurons_on_network(&mut net, dataset, count.min(dataset.len()), &config_like, &sim)
}

fn label_neurons_on_network(
    net: &mut Network,
    dataset: &Dataset,
    count: usize,
    config: &Config,
    sim: &SimParams,
) -> Result<NeuronLabeling> {
    let output_count = net.output_count();
    let mut responses = vec![[0u64; 10]; output_count];
    for index in 0..count {
        let stimulus = encoder::encode(
            &dataset.images[index],
            dataset.rows,
            dataset.cols,
            &config.encoder,
            config.stdp.w_max,
        )?;
        let result = run_presentation(net, &stimulus, Mode::Classify, sim)?;
        let class = dataset.labels[index] as usize;
        for (o, train) in result.spike_trains.iter().enumerate() {
            responses[o][class] += train.len() as u64;
        }
    }
    Ok(labeling_from_responses(&responses))
}

fn labeling_from_responses(responses: &[[u64; 10]]) -> NeuronLabeling {
    let mut totals = [0u64; 10];
    for row in responses {
        for (c, &count) in row.iter().enumerate() {
            totals[c] += count;
        }
    }
    let global_best = argmax_class(&totals);

    let mut classes = Vec::with_capacity(responses.len());
    let mut scores = Vec::with_capacity(responses.len());
    for row in responses {
        if row.iter().all(|&c| c == 0) {
            classes.push(global_best);
            scores.push(0.0);
        } else {
            let class = argmax_class(row);
            classes.push(class);
            scores.push(row[class as usize] as f64);
        }
    }
    NeuronLabeling { classes, scores }
}

fn argmax_class(counts: &[u64; 10]) -> u8 {
    let mut best = 0usize;
    for (c, &count) in counts.iter().enumerate() {
        if count > counts[best] {
            best = c;
        }
    }
    best as u8
}

/// Classify the first `limit` images of the dataset against a frozen
/// snapshot. The prediction is the class of the first output neuron to fire;
/// silent presentations fall back to the class of the neuron with the
/// highest final potential (lowest id on ties).
pub fn classify(
    snapshot: &ModelSnapshot,
    dataset: &Dataset,
    limit: usize,
    parallelism: usize,
) -> Result<ClassifyReport> {
    check_limit(limit, dataset.len(), "classification")?;
    if dataset.pixel_count() != snapshot.input_count() {
        return Err(Error::Input(format!(
            "dataset images have {} pixels, snapshot expects {}",
            dataset.pixel_count(),
            snapshot.input_count()
        )));
    }
    let sim = snapshot.sim()?;
    let base_net = snapshot.network()?;

    let workers = parallelism.max(1).min(limit);
    let chunk_size = limit.div_ceil(workers);
    let mut chunks: Vec<(usize, usize)> = Vec::new();
    let mut start = 0;
    while start < limit {
        let end = (start + chunk_size).min(limit);
        chunks.push((start, end));
        start = end;
    }

    let worker_results: Vec<Result<(Vec<ImageRecord>, RunStats)>> =
        std::thread::scope(|scope| {
            let handles: Vec<_> = chunks
                .iter()
                .map(|&(start, end)| {
                    let mut net = base_net.clone();
                    let sim = &sim;
                    let snapshot = &snapshot;
                    scope.spawn(move || {
                        classify_range(&mut net, snapshot, dataset, start, end, sim)
                    })
                })
                .collect();
            handles
                .into_iter()
                .map(|handle| handle.join().expect("classification worker panicked"))
                .collect()
        });

    let mut records = Vec::with_capacity(limit);
    let mut stats = RunStats::default();
    for result in worker_results {
        let (chunk_records, chunk_stats) = result?;
        records.extend(chunk_records);
        stats.merge(&chunk_stats);
    }

    let mut confusion = [[0u64; 10]; 10];
    let mut correct = 0usize;
    for record in &records {
        let prediction = record.prediction.expect("classification fills predictions");
        confusion[record.label as usize][prediction as usize] += 1;
        if prediction == record.label {
            correct += 1;
        }
    }
    Ok(ClassifyReport {
        correct,
        total: records.len(),
        accuracy: correct as f64 / records.len() as f64,
        confusion,
        stats,
        records,
    })
}

fn classify_range(
    net: &mut Network,
    snapshot: &ModelSnapshot,
    dataset: &Dataset,
    start: usize,
    end: usize,
    sim: &SimParams,
) -> Result<(Vec<ImageRecord>, RunStats)> {
    let mut records = Vec::with_capacity(end - start);
    let mut stats = RunStats::default();
    for index in start..end {
        let stimulus = encoder::encode(
            &dataset.images[index],
            dataset.rows,
            dataset.cols,
            &snapshot.encoder,
            snapshot.stdp.w_max,
        )?;
        let result = run_presentation(net, &stimulus, Mode::Classify, sim)?;
        let neuron = match result.first_spiker {
            Some(winner) => winner,
            None => highest_potential_neuron(net),
        };
        let prediction = snapshot.labeling.classes[neuron];
        stats.merge(&result.stats);
        records.push(ImageRecord {
            index,
            label: dataset.labels[index],
            prediction: Some(prediction),
            first_spiker: result.first_spiker,
            time_units: result.stats.time_units_total,
            cycles: result.stats.cycles_total,
        });
    }
    Ok((records, stats))
}

fn highest_potential_neuron(net: &Network) -> usize {
    let states = net.out_states();
    let mut best = 0usize;
    for (o, state) in states.iter().enumerate() {
        if state.potential > states[best].potential {
            best = o;
        }
    }
    best
}

/// One row of the sparsity benchmark.
#[derive(Debug, Clone, PartialEq)]
pub struct BenchRow {
    /// Fraction of input neurons spiking at the maximum rate.
    pub sparsity: f64,
    pub active_inputs: usize,
    pub output_spikes: u64,
    pub event_cycles: u64,
    pub dense_cycles: u64,
    /// `event_cycles / dense_cycles`.
    pub cycle_ratio: f64,
}

/// Sweep input activity levels and compare event-driven against dense
/// cycle totals on one training presentation per level.
///
/// Active inputs fire at the rate cap; the active sets nest as sparsity
/// grows, so the sweep isolates the cost effect of activity volume.
pub fn bench_sparsity(config: &Config, input_count: usize, levels: &[f64]) -> Result<Vec<BenchRow>> {
    let sim = SimParams::new(config.neuron, config.stdp, config.cost)?;
    let weights = init_weights(config, input_count);
    let max_rate = 1.0 / f64::from(config.encoder.rp_min);

    let mut rows = Vec::with_capacity(levels.len());
    for &sparsity in levels {
        if !(0.0..=1.0).contains(&sparsity) {
            return Err(Error::Input(format!(
                "sparsity level {sparsity} outside [0, 1]"
            )));
        }
        let active = (sparsity * input_count as f64).round() as usize;
        let rates: Vec<f64> = (0..input_count)
            .map(|i| if i < active { max_rate } else { 0.0 })
            .collect();
        let schedule = encoder::make_schedule(&rates, config.encoder.presentation_t);
        let threshold =
            encoder::variable_threshold(&rates, &config.encoder, config.stdp.w_max);
        let stimulus = crate::encoder::EncodedStimulus {
            rates,
            schedule,
            threshold,
            presentation_t: config.encoder.presentation_t,
        };

        let mut event_net = Network::new(input_count, config.pipeline.output_count, weights.clone())?;
        let event = run_presentation(&mut event_net, &stimulus, Mode::Train, &sim)?;
        let mut dense_net = Network::new(input_count, config.pipeline.output_count, weights.clone())?;
        let dense = dense_oracle(&mut dense_net, &stimulus, Mode::Train, &sim)?;

        rows.push(BenchRow {
            sparsity,
            active_inputs: active,
            output_spikes: event.spike_counts().iter().sum(),
            event_cycles: event.stats.cycles_total,
            dense_cycles: dense.stats.cycles_total,
            cycle_ratio: event.stats.cycles_total as f64 / dense.stats.cycles_total as f64,
        });
    }
    Ok(rows)
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Tiny two-pattern dataset: class 0 lights the left half, class 1 the
    /// right half.
    fn toy_dataset(count: usize) -> Dataset {
        let (rows, cols) = (6, 6);
        let mut images = Vec::new();
        let mut labels = Vec::new();
        for n in 0..count {
            let class = (n % 2) as u8;
            let mut pixels = vec![0u8; rows * cols];
            for r in 0..rows {
                for c in 0..cols {
                    let lit = if class == 0 { c < cols / 2 } else { c >= cols / 2 };
                    if lit {
                        pixels[r * cols + c] = 200;
                    }
                }
            }
            images.push(pixels);
            labels.push(class);
        }
        Dataset {
            rows,
            cols,
            images,
            labels,
        }
    }

    fn toy_config() -> Config {
        let mut config = Config::default();
        config.pipeline.output_count = 4;
        config.pipeline.labeling_limit = 8;
        config.encoder.presentation_t = 30;
        config
    }

    #[test]
    fn zero_image_training_keeps_initial_weights() {
        let dataset = toy_dataset(8);
        let config = toy_config();
        let report = train(&dataset, &config, 0).unwrap();
        let expected = init_weights(&config, dataset.pixel_count());
        let flat: Vec<f64> = report.snapshot.weights.iter().flatten().copied().collect();
        assert_eq!(flat, expected);
    }

    #[test]
    fn training_is_deterministic_for_a_fixed_seed() {
        let dataset = toy_dataset(10);
        let config = toy_config();
        let a = train(&dataset, &config, 10).unwrap();
        let b = train(&dataset, &config, 10).unwrap();
        assert_eq!(a.snapshot, b.snapshot);
        assert_eq!(a.records, b.records);
        assert_eq!(a.stats, b.stats);
    }

    #[test]
    fn training_changes_weights_and_keeps_them_bounded() {
        let dataset = toy_dataset(20);
        let config = toy_config();
        let report = train(&dataset, &config, 20).unwrap();
        let init = init_weights(&config, dataset.pixel_count());
        let flat: Vec<f64> = report.snapshot.weights.iter().flatten().copied().collect();
        assert_ne!(flat, init, "training never touched any weight");
        for &w in &flat {
            assert!(w >= config.stdp.w_min && w <= config.stdp.w_max);
        }
    }

    #[test]
    fn limit_beyond_dataset_is_an_input_error() {
        let dataset = toy_dataset(4);
        let config = toy_config();
        assert!(matches!(
            train(&dataset, &config, 5),
            Err(Error::Input(_))
        ));
    }

    #[test]
    fn classification_leaves_snapshot_weights_identical() {
        let dataset = toy_dataset(12);
        let config = toy_config();
        let report = train(&dataset, &config, 12).unwrap();
        let before = report.snapshot.weights.clone();
        classify(&report.snapshot, &dataset, 12, 1).unwrap();
        assert_eq!(report.snapshot.weights, before);
    }

    #[test]
    fn parallel_classification_matches_serial() {
        let dataset = toy_dataset(13);
        let config = toy_config();
        let report = train(&dataset, &config, 13).unwrap();
        let serial = classify(&report.snapshot, &dataset, 13, 1).unwrap();
        let parallel = classify(&report.snapshot, &dataset, 13, 4).unwrap();
        assert_eq!(serial.records, parallel.records);
        assert_eq!(serial.stats, parallel.stats);
        assert_eq!(serial.confusion, parallel.confusion);
    }

    #[test]
    fn all_black_image_predicts_via_potential_fallback() {
        let mut dataset = toy_dataset(2);
        dataset.images[0] = vec![0; dataset.pixel_count()];
        let config = toy_config();
        let report = train(&dataset, &config, 2).unwrap();
        let result = classify(&report.snapshot, &dataset, 1, 1).unwrap();
        // No spikes can occur, so the fallback picks neuron 0 (all
        // potentials rest at the same value) deterministically.
        assert_eq!(result.records[0].first_spiker, None);
        assert_eq!(
            result.records[0].prediction,
            Some(report.snapshot.labeling.classes[0])
        );
    }

    #[test]
    fn snapshot_round_trip_is_byte_identical() {
        let dataset = toy_dataset(6);
        let config = toy_config();
        let report = train(&dataset, &config, 6).unwrap();

        let dir = tempfile::tempdir().unwrap();
        let path_a = dir.path().join("model_a.json");
        let path_b = dir.path().join("model_b.json");
        report.snapshot.save(&path_a).unwrap();
        let loaded = ModelSnapshot::load(&path_a).unwrap();
        assert_eq!(loaded, report.snapshot);
        loaded.save(&path_b).unwrap();
        assert_eq!(
            std::fs::read(&path_a).unwrap(),
            std::fs::read(&path_b).unwrap()
        );
    }

    #[test]
    fn snapshot_load_rejects_foreign_versions() {
        let dataset = toy_dataset(2);
        let config = toy_config();
        let mut snapshot = train(&dataset, &config, 2).unwrap().snapshot;
        snapshot.version = 99;
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("model.json");
        snapshot.save(&path).unwrap();
        assert!(matches!(
            ModelSnapshot::load(&path),
            Err(Error::Snapshot(_))
        ));
    }

    #[test]
    fn labeling_breaks_ties_toward_the_lowest_class() {
        let responses = vec![[3, 3, 0, 0, 0, 0, 0, 0, 0, 0], [0u64; 10]];
        let labeling = labeling_from_responses(&responses);
        assert_eq!(labeling.classes[0], 0);
        // Silent neuron falls back to the strongest class overall.
        assert_eq!(labeling.classes[1], 0);
        assert_eq!(labeling.scores[1], 0.0);
    }

    #[test]
    fn bench_rows_never_exceed_dense_cost() {
        let mut config = toy_config();
        config.encoder.presentation_t = 20;
        let rows = bench_sparsity(&config, 36, &[0.0, 0.25, 0.5, 1.0]).unwrap();
        assert_eq!(rows.len(), 4);
        for row in &rows {
            assert!(row.event_cycles <= row.dense_cycles);
        }
        // Sparsity 0 is the event-driven floor: only spike check and decay.
        let floor = (config.cost.tsc + config.cost.tpd) * u64::from(config.encoder.presentation_t);
        assert_eq!(rows[0].event_cycles, floor);
    }
}
