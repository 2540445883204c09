//! Event-driven simulation core.
//!
//! A presentation advances Time Unit by Time Unit. Each unit gathers the
//! scheduled input spikes, integrates them into every output neuron, applies
//! lateral inhibition on the presentation's first output fire, runs STDP in
//! training mode, and bills the unit against the cycle cost model: the spike
//! check and potential decay run every unit, the potential add only when
//! input spikes arrived, and the weight change only when an output fired
//! during training. [`dense_oracle`] computes the same semantics the naive
//! way, touching every neuron and synapse every unit, and is the reference
//! the event-driven path is tested against.

use serde::{Deserialize, Serialize};

use crate::encoder::EncodedStimulus;
use crate::error::{Error, Result};
use crate::neuron::{NeuronParams, NeuronState};
use crate::stdp::{apply_weight_update, StdpParams, StdpTable};
use crate::TimeUnit;

/// Whether weights may change during a presentation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Mode {
    Train,
    Classify,
}

/// Cycle costs of the four per-Time-Unit processes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct TimeUnitCost {
    /// Spike check, paid every Time Unit.
    pub tsc: u64,
    /// Potential add, paid when input spikes arrive.
    pub tpa: u64,
    /// Potential decay, paid every Time Unit.
    pub tpd: u64,
    /// Weight change, paid when an output fires during training.
    pub twc: u64,
}

impl Default for TimeUnitCost {
    fn default() -> Self {
        TimeUnitCost {
            tsc: 1,
            tpa: 2,
            tpd: 1,
            twc: 4,
        }
    }
}

impl TimeUnitCost {
    /// The configured costs must keep the documented scale relation
    /// `tsc = tpd < tpa < twc`.
    pub fn validate(&self, prefix: &str) -> Result<()> {
        if self.tsc != self.tpd {
            return Err(Error::config(
                &format!("{prefix}.tsc"),
                "spike check and potential decay must cost the same",
            ));
        }
        if !(self.tpd < self.tpa && self.tpa < self.twc) {
            return Err(Error::config(
                &format!("{prefix}.tpa"),
                "costs must satisfy tsc = tpd < tpa < twc",
            ));
        }
        Ok(())
    }

    /// Cycles consumed by one Time Unit under the given activity scenario.
    pub fn scenario_cycles(&self, has_input: bool, has_output: bool, mode: Mode) -> u64 {
        let mut cycles = self.tsc + self.tpd;
        if has_input {
            cycles += self.tpa;
        }
        if has_output && mode == Mode::Train {
            cycles += self.twc;
        }
        cycles
    }
}

/// Index of a scenario in [`RunStats::tu_histogram`].
fn scenario_index(has_input: bool, has_output: bool) -> usize {
    match (has_input, has_output) {
        (false, false) => 0,
        (true, false) => 1,
        (false, true) => 2,
        (true, true) => 3,
    }
}

/// Accumulated counters for one or more presentations.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct RunStats {
    pub time_units_total: u64,
    pub cycles_total: u64,
    /// Time Units per scenario: no spike, input only, output only, both.
    pub tu_histogram: [u64; 4],
    /// Cycles of the costliest single Time Unit.
    pub cycles_max_tu: u64,
    /// Weight reads plus weight updates performed.
    pub synaptic_ops: u64,
}

impl RunStats {
    fn record_tu(&mut self, has_input: bool, has_output: bool, cycles: u64, ops: u64) {
        self.time_units_total += 1;
        self.cycles_total += cycles;
        self.tu_histogram[scenario_index(has_input, has_output)] += 1;
        self.cycles_max_tu = self.cycles_max_tu.max(cycles);
        self.synaptic_ops += ops;
    }

    /// Mean cycles per Time Unit.
    pub fn cycles_avg_tu(&self) -> f64 {
        if self.time_units_total == 0 {
            0.0
        } else {
            self.cycles_total as f64 / self.time_units_total as f64
        }
    }

    /// Fold another stats block into this one. Merging is associative, so
    /// per-worker stats can be combined in any grouping.
    pub fn merge(&mut self, other: &RunStats) {
        self.time_units_total += other.time_units_total;
        self.cycles_total += other.cycles_total;
        for (a, b) in self.tu_histogram.iter_mut().zip(&other.tu_histogram) {
            *a += b;
        }
        self.cycles_max_tu = self.cycles_max_tu.max(other.cycles_max_tu);
        self.synaptic_ops += other.synaptic_ops;
    }
}

/// Everything the simulation loop needs besides the network itself.
#[derive(Debug, Clone)]
pub struct SimParams {
    pub neuron: NeuronParams,
    pub stdp: StdpParams,
    pub table: StdpTable,
    pub cost: TimeUnitCost,
    /// Winner-take-all inhibition switch; disabled only for paired ablation
    /// runs.
    pub lateral_inhibition: bool,
}

impl SimParams {
    pub fn new(neuron: NeuronParams, stdp: StdpParams, cost: TimeUnitCost) -> Result<Self> {
        neuron.validate("neuron")?;
        cost.validate("cost")?;
        let table = StdpTable::build(&stdp)?;
        Ok(SimParams {
            neuron,
            stdp,
            table,
            cost,
            lateral_inhibition: true,
        })
    }
}

/// Fully connected single-layer network state.
#[derive(Debug, Clone)]
pub struct Network {
    input_count: usize,
    output_count: usize,
    /// Row-major per output neuron: `weights[o * input_count + i]`.
    weights: Vec<f64>,
    out_states: Vec<NeuronState>,
    last_pre_spike: Vec<Option<TimeUnit>>,
    /// Pre-spike time already paired for potentiation, per synapse; keeps
    /// each (pre, post) spike pair from updating a weight twice.
    last_paired_pre: Vec<Option<TimeUnit>>,
    threshold: f64,
    inhibition_fired: bool,
}

impl Network {
    /// Build a network over an explicit row-major weight matrix
    /// (`output_count` rows of `input_count` weights).
    pub fn new(input_count: usize, output_count: usize, weights: Vec<f64>) -> Result<Self> {
        if input_count == 0 || output_count == 0 {
            return Err(Error::Input("network must have inputs and outputs".into()));
        }
        if weights.len() != input_count * output_count {
            return Err(Error::Input(format!(
                "weight matrix has {} entries, expected {}",
                weights.len(),
                input_count * output_count
            )));
        }
        Ok(Network {
            input_count,
            output_count,
            weights,
            out_states: vec![
                NeuronState {
                    potential: 0.0,
                    refract_remaining: 0,
                    last_spike_time: None,
                };
                output_count
            ],
            last_pre_spike: vec![None; input_count],
            last_paired_pre: vec![None; input_count * output_count],
            threshold: 1.0,
            inhibition_fired: false,
        })
    }

    pub fn input_count(&self) -> usize {
        self.input_count
    }

    pub fn output_count(&self) -> usize {
        self.output_count
    }

    pub fn synapse_count(&self) -> usize {
        self.input_count * self.output_count
    }

    pub fn weight(&self, input: usize, output: usize) -> f64 {
        self.weights[output * self.input_count + input]
    }

    /// All weights, row-major per output neuron.
    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// Weights of one output neuron's synapses, indexed by input neuron.
    pub fn weights_of(&self, output: usize) -> &[f64] {
        &self.weights[output * self.input_count..(output + 1) * self.input_count]
    }

    pub fn out_states(&self) -> &[NeuronState] {
        &self.out_states
    }

    pub fn threshold(&self) -> f64 {
        self.threshold
    }

    /// Reset per-presentation state: neuron potentials to rest, spike
    /// memories cleared, inhibition re-armed, threshold from the stimulus.
    fn begin_presentation(&mut self, threshold: f64, neuron: &NeuronParams) {
        for state in &mut self.out_states {
            *state = NeuronState::at_rest(neuron);
        }
        self.last_pre_spike.fill(None);
        self.last_paired_pre.fill(None);
        self.threshold = threshold;
        self.inhibition_fired = false;
    }
}

/// Result of a single Time Unit.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TimeUnitOutcome {
    /// Output neurons that fired, ascending.
    pub fired: Vec<usize>,
    /// Cycles billed to this Time Unit.
    pub cycles: u64,
    /// Weight updates performed (0 outside training).
    pub weight_updates: u64,
}

/// Result of one full presentation.
#[derive(Debug, Clone, PartialEq)]
pub struct PresentationResult {
    /// Per output neuron, the Time Units at which it fired.
    pub spike_trains: Vec<Vec<TimeUnit>>,
    /// First output neuron to fire (lowest id on a same-unit tie).
    pub first_spiker: Option<usize>,
    pub stats: RunStats,
}

impl PresentationResult {
    pub fn spike_counts(&self) -> Vec<u64> {
        self.spike_trains.iter().map(|t| t.len() as u64).collect()
    }
}

/// Advance the network by one Time Unit.
///
/// `incoming` lists the input neurons spiking now, ascending. Weight reads
/// use the pre-update weights; STDP runs last, mirroring the spike check /
/// potential add / decay / weight change process order.
pub fn run_time_unit(
    net: &mut Network,
    incoming: &[usize],
    mode: Mode,
    sim: &SimParams,
    t: TimeUnit,
) -> Result<TimeUnitOutcome> {
    for &i in incoming {
        if i >= net.input_count {
            return Err(Error::Input(format!(
                "input spike id {i} out of range (inputs: {})",
                net.input_count
            )));
        }
    }

    for &i in incoming {
        net.last_pre_spike[i] = Some(t);
    }

    // Integrate and step every output neuron.
    let mut fired = Vec::new();
    for o in 0..net.output_count {
        let row = o * net.input_count;
        let mut weighted = 0.0;
        for &i in incoming {
            weighted += net.weights[row + i];
        }
        if net.out_states[o].step(weighted, net.threshold, &sim.neuron, t) {
            fired.push(o);
        }
    }

    // One-shot lateral inhibition on the presentation's first fire; neurons
    // firing in the same unit count as co-winners and are spared.
    if sim.lateral_inhibition && !net.inhibition_fired && !fired.is_empty() {
        let mut is_winner = vec![false; net.output_count];
        for &o in &fired {
            is_winner[o] = true;
        }
        for o in 0..net.output_count {
            if !is_winner[o] {
                net.out_states[o].potential -= net.threshold / 2.0;
            }
        }
        net.inhibition_fired = true;
    }

    let mut weight_updates = 0u64;
    if mode == Mode::Train {
        weight_updates = apply_stdp(net, incoming, &fired, sim, t);
    }

    let cycles = sim
        .cost
        .scenario_cycles(!incoming.is_empty(), !fired.is_empty(), mode);
    Ok(TimeUnitOutcome {
        fired,
        cycles,
        weight_updates,
    })
}

/// Nearest-neighbor STDP for one Time Unit: every neuron that fired
/// potentiates against each input's most recent unconsumed pre-spike, and
/// every arriving pre-spike depresses against its neuron's most recent
/// post-spike. Same-unit pairs fall in the dead zone, so each synapse sees
/// at most one update per Time Unit.
fn apply_stdp(
    net: &mut Network,
    incoming: &[usize],
    fired: &[usize],
    sim: &SimParams,
    t: TimeUnit,
) -> u64 {
    let window = i64::from(sim.stdp.window_lo)..=i64::from(sim.stdp.window_hi);
    let mut updates = 0u64;

    for &o in fired {
        let row = o * net.input_count;
        for i in 0..net.input_count {
            let Some(t_pre) = net.last_pre_spike[i] else {
                continue;
            };
            let dt = i64::from(t) - i64::from(t_pre);
            if !window.contains(&dt) || net.last_paired_pre[row + i] == Some(t_pre) {
                continue;
            }
            let dw = sim.table.delta_w(dt);
            net.weights[row + i] = apply_weight_update(net.weights[row + i], dw, &sim.stdp);
            net.last_paired_pre[row + i] = Some(t_pre);
            updates += 1;
        }
    }

    for &i in incoming {
        for o in 0..net.output_count {
            let Some(t_post) = net.out_states[o].last_spike_time else {
                continue;
            };
            let dt = i64::from(t_post) - i64::from(t);
            if !window.contains(&-dt) || dt >= 0 {
                continue;
            }
            let index = o * net.input_count + i;
            let dw = sim.table.delta_w(dt);
            net.weights[index] = apply_weight_update(net.weights[index], dw, &sim.stdp);
            updates += 1;
        }
    }

    updates
}

/// Run one full presentation of an encoded stimulus.
pub fn run_presentation(
    net: &mut Network,
    stimulus: &EncodedStimulus,
    mode: Mode,
    sim: &SimParams,
) -> Result<PresentationResult> {
    check_stimulus(net, stimulus, sim)?;
    net.begin_presentation(stimulus.threshold, &sim.neuron);

    let spikes_at = invert_schedule(stimulus);
    let mut spike_trains = vec![Vec::new(); net.output_count];
    let mut first_spiker = None;
    let mut stats = RunStats::default();

    for t in 1..=stimulus.presentation_t {
        let incoming = &spikes_at[(t - 1) as usize];
        let outcome = run_time_unit(net, incoming, mode, sim, t)?;
        for &o in &outcome.fired {
            spike_trains[o].push(t);
        }
        if first_spiker.is_none() {
            first_spiker = outcome.fired.first().copied();
        }
        let reads = incoming.len() as u64 * net.output_count as u64;
        stats.record_tu(
            !incoming.is_empty(),
            !outcome.fired.is_empty(),
            outcome.cycles,
            reads + outcome.weight_updates,
        );
    }

    Ok(PresentationResult {
        spike_trains,
        first_spiker,
        stats,
    })
}

/// Reference simulator: identical semantics computed without any
/// event-driven shortcut. Every synapse is read every Time Unit, every
/// process is billed every Time Unit, and STDP scans the full weight matrix.
/// Used to cross-check [`run_presentation`] and to quantify the event-driven
/// cycle saving.
pub fn dense_oracle(
    net: &mut Network,
    stimulus: &EncodedStimulus,
    mode: Mode,
    sim: &SimParams,
) -> Result<PresentationResult> {
    check_stimulus(net, stimulus, sim)?;
    net.begin_presentation(stimulus.threshold, &sim.neuron);

    // Dense raster: spiked[t-1][i].
    let t_total = stimulus.presentation_t as usize;
    let mut raster = vec![vec![false; net.input_count]; t_total];
    for (i, times) in stimulus.schedule.iter().enumerate() {
        for &time in times {
            raster[(time - 1) as usize][i] = true;
        }
    }

    let window = i64::from(sim.stdp.window_lo)..=i64::from(sim.stdp.window_hi);
    let mut spike_trains = vec![Vec::new(); net.output_count];
    let mut first_spiker = None;
    let mut stats = RunStats::default();

    for t in 1..=stimulus.presentation_t {
        let spiked = &raster[(t - 1) as usize];
        let mut has_input = false;
        for i in 0..net.input_count {
            if spiked[i] {
                net.last_pre_spike[i] = Some(t);
                has_input = true;
            }
        }

        let mut fired_flags = vec![false; net.output_count];
        let mut any_fired = false;
        for o in 0..net.output_count {
            let row = o * net.input_count;
            let mut weighted = 0.0;
            for (i, &s) in spiked.iter().enumerate() {
                weighted += if s { 1.0 } else { 0.0 } * net.weights[row + i];
            }
            if net.out_states[o].step(weighted, net.threshold, &sim.neuron, t) {
                fired_flags[o] = true;
                any_fired = true;
                spike_trains[o].push(t);
            }
        }

        if first_spiker.is_none() {
            first_spiker = fired_flags.iter().position(|&f| f);
        }

        if sim.lateral_inhibition && !net.inhibition_fired && any_fired {
            for o in 0..net.output_count {
                if !fired_flags[o] {
                    net.out_states[o].potential -= net.threshold / 2.0;
                }
            }
            net.inhibition_fired = true;
        }

        let mut updates = 0u64;
        if mode == Mode::Train {
            // Potentiation pass over the full matrix.
            for o in 0..net.output_count {
                let row = o * net.input_count;
                for i in 0..net.input_count {
                    if !fired_flags[o] {
                        continue;
                    }
                    let Some(t_pre) = net.last_pre_spike[i] else {
                        continue;
                    };
                    let dt = i64::from(t) - i64::from(t_pre);
                    if !window.contains(&dt) || net.last_paired_pre[row + i] == Some(t_pre) {
                        continue;
                    }
                    let dw = sim.table.delta_w(dt);
                    net.weights[row + i] =
                        apply_weight_update(net.weights[row + i], dw, &sim.stdp);
                    net.last_paired_pre[row + i] = Some(t_pre);
                    updates += 1;
                }
            }
            // Depression pass over the full matrix.
            for o in 0..net.output_count {
                let row = o * net.input_count;
                for i in 0..net.input_count {
                    if !spiked[i] {
                        continue;
                    }
                    let Some(t_post) = net.out_states[o].last_spike_time else {
                        continue;
                    };
                    let dt = i64::from(t_post) - i64::from(t);
                    if !window.contains(&-dt) || dt >= 0 {
                        continue;
                    }
                    let dw = sim.table.delta_w(dt);
                    net.weights[row + i] =
                        apply_weight_update(net.weights[row + i], dw, &sim.stdp);
                    updates += 1;
                }
            }
        }

        // Every process billed every Time Unit, no event gating.
        let cycles = sim.cost.scenario_cycles(true, true, mode);
        let reads = net.synapse_count() as u64;
        stats.record_tu(has_input, any_fired, cycles, reads + updates);
    }

    Ok(PresentationResult {
        spike_trains,
        first_spiker,
        stats,
    })
}

fn check_stimulus(net: &Network, stimulus: &EncodedStimulus, sim: &SimParams) -> Result<()> {
    if stimulus.input_count() != net.input_count {
        return Err(Error::Input(format!(
            "stimulus encodes {} inputs, network has {}",
            stimulus.input_count(),
            net.input_count
        )));
    }
    if stimulus.presentation_t < 1 {
        return Err(Error::Input("presentation must span at least 1 Time Unit".into()));
    }
    if stimulus.threshold <= sim.neuron.p_rest {
        return Err(Error::Input(format!(
            "threshold {} must exceed the resting potential {}",
            stimulus.threshold, sim.neuron.p_rest
        )));
    }
    Ok(())
}

fn invert_schedule(stimulus: &EncodedStimulus) -> Vec<Vec<usize>> {
    let mut spikes_at = vec![Vec::new(); stimulus.presentation_t as usize];
    for (i, times) in stimulus.schedule.iter().enumerate() {
        for &t in times {
            debug_assert!(t >= 1 && t <= stimulus.presentation_t);
            spikes_at[(t - 1) as usize].push(i);
        }
    }
    spikes_at
}
