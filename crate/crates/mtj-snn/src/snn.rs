//! Stochastic spiking inference over a layered crossbar network.
//!
//! Two operating modes:
//!
//! - **Synchronous**: every neuron runs a clocked write / rest / read /
//!   reset cycle. A dc source biases each device at switching probability
//!   0.5; latches hold each layer's read result for one cycle, so spikes
//!   propagate one layer per cycle.
//! - **Asynchronous**: superparamagnetic neurons are read continuously at
//!   zero bias; inverter outputs drive the next layer directly and the
//!   effective timestep is the mean output pulse width of the device.
//!
//! Two fidelities:
//!
//! - **Behavioral**: each neuron spikes as a Bernoulli draw of its fitted
//!   logistic switching characteristic. This is the scalable path.
//! - **Device**: every neuron integrates the full stochastic
//!   magnetization dynamics; used to validate the behavioral contract on
//!   small networks.

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::characterize::SwitchingCharacteristic;
use crate::crossbar::CrossbarInstance;
use crate::device::DeviceParams;
use crate::error::{Error, Result};
use crate::fit::sigmoid;
use crate::llgs::{SimConfig, Stepper};
use crate::network::{pool_2x2, NetworkTopology, Stage};
use crate::readout::{read_sync, InverterChain, ReadCircuitParams};
use crate::rng::{compose_stream, stream_rng};
use crate::vec3::Vec3;

/// Lag-one persistence of the continuously read output sampled at its own
/// mean pulse width: consecutive samples of the filtered telegraph are
/// strongly correlated. Measured from the device path (see readout tests).
pub const ASYNC_SPIKE_PERSISTENCE: f64 = 0.09;

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    #[serde(alias = "synchronous")]
    Sync,
    #[serde(alias = "asynchronous")]
    Async,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Fidelity {
    Behavioral,
    Device,
}

/// Clocked-cycle timing. Default 4 ns total.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct ScheduleSync {
    pub write: f64,
    pub rest: f64,
    pub read: f64,
    pub reset: f64,
}

impl Default for ScheduleSync {
    fn default() -> Self {
        Self { write: 0.5e-9, rest: 2e-9, read: 1e-9, reset: 0.5e-9 }
    }
}

impl ScheduleSync {
    pub fn total(&self) -> f64 {
        self.write + self.rest + self.read + self.reset
    }
}

/// Neuron binding shared by every layer: the physical device, its fitted
/// switching characteristic for the selected mode, and the read circuit.
#[derive(Debug, Clone, PartialEq)]
pub struct NeuronBinding {
    pub device: DeviceParams,
    pub characteristic: SwitchingCharacteristic,
    pub circuit: ReadCircuitParams,
}

/// Fully specified network: topology plus device binding and scheduling.
#[derive(Debug, Clone, PartialEq)]
pub struct NetworkSpec {
    pub topology: NetworkTopology,
    pub neuron: NeuronBinding,
    pub mode: Mode,
    pub fidelity: Fidelity,
    /// Unit-weight conductance for the crossbars, S.
    pub g_o: f64,
    pub schedule: ScheduleSync,
    /// Inference timestep: the clocked cycle for sync mode, the mean
    /// output pulse width for async mode, s.
    pub step_duration: f64,
    /// Programming variation of the resistive synapses (fraction).
    pub synapse_sigma: f64,
}

impl NetworkSpec {
    pub fn new(
        topology: NetworkTopology,
        neuron: NeuronBinding,
        mode: Mode,
        fidelity: Fidelity,
        step_duration: f64,
    ) -> Self {
        Self {
            topology,
            neuron,
            mode,
            fidelity,
            g_o: crate::crossbar::DEFAULT_G_O,
            schedule: ScheduleSync::default(),
            step_duration,
            synapse_sigma: 0.0,
        }
    }

    /// Dc bias current applied to each neuron: the fitted bias point in
    /// sync mode ("bias at switching probability 0.5"), zero in async.
    pub fn neuron_bias(&self) -> f64 {
        match self.mode {
            Mode::Sync => self.neuron.characteristic.i_bias,
            Mode::Async => 0.0,
        }
    }

    /// Reset drive of the clocked cycle: a deterministic over-drive pulse
    /// back to AP.
    pub fn reset_current(&self) -> f64 {
        -(self.neuron.characteristic.i_bias.abs() + 3.0 * self.neuron.characteristic.i_o)
    }
}

/// One crossbar stage compiled for fast sparse evaluation.
#[derive(Debug, Clone)]
struct CompiledCrossbar {
    instance: CrossbarInstance,
    /// Per input row: (column, delta_v*(g+ - g-), g+, g-) for programmed
    /// columns. The rail conductances stay separate so the two supplies
    /// can carry independent offsets.
    row_entries: Vec<Vec<(u32, f64, f64, f64)>>,
    /// Per input row: total conductance g+ + g- (for dissipation), S.
    row_conductance: Vec<f64>,
}

impl CompiledCrossbar {
    fn new(instance: CrossbarInstance) -> Self {
        let mut row_entries = Vec::with_capacity(instance.inputs);
        let mut row_conductance = Vec::with_capacity(instance.inputs);
        for m in 0..instance.inputs {
            let base = m * instance.neurons;
            let mut entries = Vec::new();
            let mut gsum = 0.0;
            for n in 0..instance.neurons {
                let gp = instance.g_plus[base + n];
                let gm = instance.g_minus[base + n];
                if gp != 0.0 || gm != 0.0 {
                    entries.push((n as u32, instance.delta_v * (gp - gm), gp, gm));
                    gsum += gp + gm;
                }
            }
            row_entries.push(entries);
            row_conductance.push(gsum);
        }
        Self { instance, row_entries, row_conductance }
    }

    /// Column currents for activations plus an implicit always-on bias row
    /// (the last row). The positive and negative supply rails carry
    /// independent additive offsets (volts).
    fn currents(&self, activations: &[f64], noise_plus: f64, noise_minus: f64) -> Vec<f64> {
        debug_assert_eq!(activations.len() + 1, self.instance.inputs);
        let mut out = vec![0.0f64; self.instance.neurons];
        let clean = noise_plus == 0.0 && noise_minus == 0.0;
        let add_row = |m: usize, a: f64, out: &mut [f64]| {
            if clean {
                for &(n, di, _, _) in &self.row_entries[m] {
                    out[n as usize] += a * di;
                }
            } else {
                for &(n, di, gp, gm) in &self.row_entries[m] {
                    out[n as usize] += a * (di + noise_plus * gp - noise_minus * gm);
                }
            }
        };
        for (m, &a) in activations.iter().enumerate() {
            if a != 0.0 {
                add_row(m, a, &mut out);
            }
        }
        // bias row, always active
        add_row(self.instance.inputs - 1, 1.0, &mut out);
        out
    }

    /// Crosspoint dissipation over `window` seconds, J.
    fn synapse_energy(&self, activations: &[f64], window: f64) -> f64 {
        let v2 = self.instance.delta_v * self.instance.delta_v;
        let mut g = self.row_conductance[self.instance.inputs - 1]; // bias row
        for (m, &a) in activations.iter().enumerate() {
            if a != 0.0 {
                g += a * self.row_conductance[m];
            }
        }
        v2 * g * window
    }
}

/// Cumulative energy components, J.
#[derive(Debug, Clone, Copy, Default, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct EnergySample {
    pub neuron_j: f64,
    pub synapse_j: f64,
    pub read_j: f64,
}

impl EnergySample {
    pub fn total(&self) -> f64 {
        self.neuron_j + self.synapse_j + self.read_j
    }
}

/// Per-image inference record: cumulative output spike counts and energy
/// after each timestep.
#[derive(Debug, Clone, PartialEq)]
pub struct InferenceTrace {
    pub timestep_duration: f64,
    pub cumulative_counts: Vec<[u32; 10]>,
    pub cumulative_energy: Vec<EnergySample>,
}

impl InferenceTrace {
    pub fn steps(&self) -> usize {
        self.cumulative_counts.len()
    }

    /// Predicted class after `step` timesteps (1-based; ties break low).
    pub fn predicted_at(&self, step: usize) -> usize {
        let counts = &self.cumulative_counts[step - 1];
        let mut best = 0usize;
        for (i, &c) in counts.iter().enumerate() {
            if c > counts[best] {
                best = i;
            }
        }
        best
    }

    pub fn predicted_final(&self) -> usize {
        self.predicted_at(self.steps())
    }
}

/// Per-neuron magnetization and inverter state for device fidelity.
struct DeviceLayerState {
    m: Vec<Vec3>,
    chains: Vec<InverterChain>,
    levels: Vec<f64>,
}

/// A programmed network instance: crossbars with their variation draws
/// frozen, ready to run images.
pub struct ProgrammedNetwork<'a> {
    pub spec: &'a NetworkSpec,
    crossbars: Vec<Option<CompiledCrossbar>>,
    /// Additive offset of the positive supply rail, V (shared by rows).
    pub supply_offset_plus: f64,
    /// Additive offset of the negative supply rail, V (shared by rows).
    pub supply_offset_minus: f64,
    /// Static per-inverter output-probability offsets (process variation,
    /// continuous readout only). Empty when the nominal corner is used.
    cmos_offsets: Vec<f64>,
    /// Number of spiking neurons (crossbar columns).
    pub n_neurons: usize,
}

/// Program every crossbar stage of `spec` with fresh variation draws.
pub fn program_network(spec: &NetworkSpec, variation_seed: u64) -> Result<ProgrammedNetwork<'_>> {
    let i_o = spec.neuron.characteristic.i_o;
    let mut crossbars = Vec::with_capacity(spec.topology.stages.len());
    let mut n_neurons = 0usize;
    for (k, stage) in spec.topology.stages.iter().enumerate() {
        match stage {
            Stage::Crossbar(layer) => {
                let instance = CrossbarInstance::program(
                    &layer.weights,
                    layer.rows,
                    layer.neurons,
                    spec.g_o,
                    spec.synapse_sigma,
                    compose_stream(variation_seed, k as u64),
                )?
                .with_supply_for(i_o);
                n_neurons += layer.neurons;
                crossbars.push(Some(CompiledCrossbar::new(instance)));
            }
            Stage::Pool { .. } => crossbars.push(None),
        }
    }
    // Process variation of the read inverters: one static offset per
    // neuron, drawn at the configured corner level. Only the continuous
    // readout is sensitive to it; clocked reads settle rail to rail.
    let sigma = spec.neuron.circuit.sigma_level;
    let cmos_offsets = if matches!(spec.mode, Mode::Async) && sigma != 0 {
        let scale = sigma.unsigned_abs() as f64
            * spec.neuron.circuit.threshold_offset_per_sigma;
        let mut rng = stream_rng(compose_stream(variation_seed, 0xc0), 0);
        (0..n_neurons)
            .map(|_| scale * rng.sample::<f64, _>(rand_distr::StandardNormal))
            .collect()
    } else {
        Vec::new()
    };
    Ok(ProgrammedNetwork {
        spec,
        crossbars,
        supply_offset_plus: 0.0,
        supply_offset_minus: 0.0,
        cmos_offsets,
        n_neurons,
    })
}

/// Behavioral neuron: one Bernoulli spike from the fitted characteristic.
///
/// `bias` is the dc bias current (the fitted `i_bias` in sync mode, zero
/// async). Sync-mode retention flips during the read window fold into the
/// spike probability analytically.
pub fn neuron_step_behavioral<R: Rng + ?Sized>(
    drive_current: f64,
    char_: &SwitchingCharacteristic,
    bias: f64,
    rng: &mut R,
) -> u8 {
    let p = sigmoid((drive_current + bias - char_.i_bias) / char_.i_o);
    (rng.gen::<f64>() < p) as u8
}

impl ProgrammedNetwork<'_> {
    /// Behavioral spike probability for one neuron at `drive`, including
    /// mode-dependent read effects (retention flips in sync mode, the
    /// per-inverter process offset in async mode).
    fn spike_probability(&self, drive: f64, neuron_index: usize) -> f64 {
        let spec = self.spec;
        let c = &spec.neuron.characteristic;
        let p = sigmoid((drive + spec.neuron_bias() - c.i_bias) / c.i_o);
        match spec.mode {
            Mode::Sync => {
                let f = crate::characterize::retention_failure_probability(
                    c.delta_kbt,
                    spec.neuron.circuit.read_time_sync * 1e9,
                );
                p * (1.0 - f) + (1.0 - p) * f
            }
            Mode::Async => {
                if self.cmos_offsets.is_empty() {
                    p
                } else {
                    (p + self.cmos_offsets[neuron_index]).clamp(0.0, 1.0)
                }
            }
        }
    }

    /// Run one image for `total_time` seconds of simulated operation.
    ///
    /// The RNG stream is `(seed, image_index)`; within an image the draw
    /// order is fixed (input layer, then stages, per timestep), so traces
    /// are independent of scheduling.
    pub fn run_inference(
        &self,
        image: &[f64],
        total_time: f64,
        seed: u64,
        image_index: u64,
    ) -> Result<InferenceTrace> {
        let spec = self.spec;
        if image.len() != spec.topology.input_shape.len() {
            return Err(Error::DimensionMismatch {
                expected: spec.topology.input_shape.len(),
                got: image.len(),
            });
        }
        if let Some(bad) = image.iter().find(|p| !(0.0..=1.0).contains(*p)) {
            return Err(Error::invalid_argument(format!("pixel {bad} outside [0, 1]")));
        }
        // Tolerant floor: 100 ns / 4 ns must count as 25 steps despite
        // binary rounding.
        let n_steps = (total_time / spec.step_duration * (1.0 + 1e-12)).floor() as usize;
        if n_steps == 0 {
            return Err(Error::invalid_argument(format!(
                "total_time {total_time:.3e} s shorter than one timestep {:.3e} s",
                spec.step_duration
            )));
        }
        let mut rng = stream_rng(seed, image_index);
        match spec.fidelity {
            Fidelity::Behavioral => self.run_behavioral(image, n_steps, &mut rng),
            Fidelity::Device => self.run_device(image, n_steps, &mut rng),
        }
    }

    fn run_behavioral(
        &self,
        image: &[f64],
        n_steps: usize,
        rng: &mut ChaCha8Rng,
    ) -> Result<InferenceTrace> {
        let spec = self.spec;
        let latched = matches!(spec.mode, Mode::Sync);
        // Latched output per stage (starts silent); index 0 is the input.
        let mut stage_out: Vec<Vec<f64>> = Vec::with_capacity(spec.topology.stages.len() + 1);
        stage_out.push(vec![0.0; image.len()]);
        for stage in &spec.topology.stages {
            let n = match stage {
                Stage::Crossbar(l) => l.neurons,
                Stage::Pool { output_shape, .. } => output_shape.len(),
            };
            stage_out.push(vec![0.0; n]);
        }

        let mut counts = [0u32; 10];
        let mut trace = InferenceTrace {
            timestep_duration: spec.step_duration,
            cumulative_counts: Vec::with_capacity(n_steps),
            cumulative_energy: Vec::with_capacity(n_steps),
        };
        let mut energy = EnergySample::default();
        let r_hm = spec.neuron.device.hm_resistance();
        let bias = spec.neuron_bias();
        let reset_i = spec.reset_current();
        let (drive_window, neuron_window) = match spec.mode {
            Mode::Sync => (spec.schedule.write, spec.schedule.write),
            Mode::Async => (spec.step_duration, spec.step_duration),
        };

        let persistence = match spec.mode {
            Mode::Sync => 0.0,
            Mode::Async => ASYNC_SPIKE_PERSISTENCE,
        };
        for _step in 0..n_steps {
            // Input spikes for this cycle.
            let input: Vec<f64> =
                image.iter().map(|&p| (rng.gen::<f64>() < p) as u8 as f64).collect();
            let mut new_out = stage_out.clone();
            new_out[0] = input;
            let mut neuron_base = 0usize;
            for (k, stage) in spec.topology.stages.iter().enumerate() {
                // Latched (sync) stages see the previous cycle's output of
                // the upstream stage; async sees the current tick's.
                let upstream: &[f64] =
                    if latched { &stage_out[k] } else { &new_out[k] };
                match stage {
                    Stage::Crossbar(_) => {
                        let cb = self.crossbars[k].as_ref().expect("compiled crossbar");
                        let currents = cb.currents(
                            upstream,
                            self.supply_offset_plus,
                            self.supply_offset_minus,
                        );
                        energy.synapse_j += cb.synapse_energy(upstream, drive_window);
                        for (n, &i_n) in currents.iter().enumerate() {
                            let p = self.spike_probability(i_n, neuron_base + n);
                            // The filtered telegraph keeps its previous
                            // sample with the measured persistence; clocked
                            // reads are fresh draws.
                            let spike = if persistence > 0.0
                                && rng.gen::<f64>() < persistence
                            {
                                stage_out[k + 1][n]
                            } else {
                                (rng.gen::<f64>() < p) as u8 as f64
                            };
                            new_out[k + 1][n] = spike;
                            // HM dissipation: write drive plus bias, and the
                            // reset pulse in clocked mode.
                            let i_total = i_n + bias;
                            energy.neuron_j += i_total * i_total * r_hm * neuron_window;
                            if matches!(spec.mode, Mode::Sync) {
                                energy.neuron_j +=
                                    reset_i * reset_i * r_hm * spec.schedule.reset;
                            }
                        }
                        neuron_base += currents.len();
                    }
                    Stage::Pool { input_shape, .. } => {
                        new_out[k + 1] = pool_2x2(upstream, *input_shape);
                    }
                }
            }
            energy.read_j += crate::energy::read_energy_per_step(
                spec.mode,
                spec.step_duration,
                &spec.neuron.circuit,
                &spec.neuron.device,
                self.n_neurons,
            );
            stage_out = new_out;
            let out = stage_out.last().expect("output stage");
            for (j, &s) in out.iter().enumerate() {
                counts[j] += s as u32;
            }
            trace.cumulative_counts.push(counts);
            trace.cumulative_energy.push(energy);
        }
        Ok(trace)
    }

    fn run_device(
        &self,
        image: &[f64],
        n_steps: usize,
        rng: &mut ChaCha8Rng,
    ) -> Result<InferenceTrace> {
        match self.spec.mode {
            Mode::Sync => self.run_device_sync(image, n_steps, rng),
            Mode::Async => self.run_device_async(image, n_steps, rng),
        }
    }

    fn neuron_stage_sizes(&self) -> Vec<Option<usize>> {
        self.spec
            .topology
            .stages
            .iter()
            .map(|s| match s {
                Stage::Crossbar(l) => Some(l.neurons),
                Stage::Pool { .. } => None,
            })
            .collect()
    }

    fn run_device_sync(
        &self,
        image: &[f64],
        n_steps: usize,
        rng: &mut ChaCha8Rng,
    ) -> Result<InferenceTrace> {
        let spec = self.spec;
        let device = &spec.neuron.device;
        let delta = spec.neuron.characteristic.delta_kbt;
        let bias = spec.neuron_bias();
        let reset_i = spec.reset_current();
        let r_hm = device.hm_resistance();
        let dt = crate::characterize::DEFAULT_DT;
        let mk_config = |duration: f64| SimConfig {
            dt,
            duration,
            seed: 0,
            renormalize_each_step: true,
            external_field: Vec3::zero(),
        };
        let write_stepper = Stepper::new(device, &mk_config(spec.schedule.write))?;
        let steps_write = (spec.schedule.write / dt).round() as usize;
        let steps_rest = (spec.schedule.rest / dt).round() as usize;
        let steps_reset = (spec.schedule.reset / dt).round() as usize;

        // All neurons start in AP.
        let mut states: Vec<Option<DeviceLayerState>> = self
            .neuron_stage_sizes()
            .iter()
            .map(|s| {
                s.map(|n| DeviceLayerState {
                    m: vec![Vec3::new(-1.0, 1e-3, 1e-3).normalized(); n],
                    chains: Vec::new(),
                    levels: vec![0.0; n],
                })
            })
            .collect();

        let mut stage_out: Vec<Vec<f64>> = Vec::with_capacity(spec.topology.stages.len() + 1);
        stage_out.push(vec![0.0; image.len()]);
        for stage in &spec.topology.stages {
            let n = match stage {
                Stage::Crossbar(l) => l.neurons,
                Stage::Pool { output_shape, .. } => output_shape.len(),
            };
            stage_out.push(vec![0.0; n]);
        }

        let mut counts = [0u32; 10];
        let mut energy = EnergySample::default();
        let mut trace = InferenceTrace {
            timestep_duration: spec.step_duration,
            cumulative_counts: Vec::with_capacity(n_steps),
            cumulative_energy: Vec::with_capacity(n_steps),
        };

        for _step in 0..n_steps {
            let input: Vec<f64> =
                image.iter().map(|&p| (rng.gen::<f64>() < p) as u8 as f64).collect();
            let mut new_out = stage_out.clone();
            new_out[0] = input;
            for (k, stage) in spec.topology.stages.iter().enumerate() {
                let upstream: &[f64] = &stage_out[k];
                match stage {
                    Stage::Crossbar(_) => {
                        let cb = self.crossbars[k].as_ref().expect("compiled crossbar");
                        let currents = cb.currents(
                            upstream,
                            self.supply_offset_plus,
                            self.supply_offset_minus,
                        );
                        energy.synapse_j += cb.synapse_energy(upstream, spec.schedule.write);
                        let state = states[k].as_mut().expect("device state");
                        let out = &mut new_out[k + 1];
                        for (n, &i_col) in currents.iter().enumerate() {
                            let drive = i_col + bias;
                            let mut m = state.m[n];
                            for _ in 0..steps_write {
                                m = write_stepper.step(m, drive, drive, rng);
                            }
                            for _ in 0..steps_rest {
                                m = write_stepper.step(m, 0.0, 0.0, rng);
                            }
                            let spike = read_sync(m, &spec.neuron.circuit, delta, rng);
                            for _ in 0..steps_reset {
                                m = write_stepper.step(m, reset_i, reset_i, rng);
                            }
                            state.m[n] = m;
                            out[n] = spike as f64;
                            let i_total = i_col + bias;
                            energy.neuron_j += i_total * i_total * r_hm * spec.schedule.write
                                + reset_i * reset_i * r_hm * spec.schedule.reset;
                        }
                    }
                    Stage::Pool { input_shape, .. } => {
                        new_out[k + 1] = pool_2x2(upstream, *input_shape);
                    }
                }
            }
            energy.read_j += crate::energy::read_energy_per_step(
                spec.mode,
                spec.step_duration,
                &spec.neuron.circuit,
                device,
                self.n_neurons,
            );
            stage_out = new_out;
            let out = stage_out.last().expect("output stage");
            for (j, &s) in out.iter().enumerate() {
                counts[j] += s as u32;
            }
            trace.cumulative_counts.push(counts);
            trace.cumulative_energy.push(energy);
        }
        Ok(trace)
    }

    fn run_device_async(
        &self,
        image: &[f64],
        n_steps: usize,
        rng: &mut ChaCha8Rng,
    ) -> Result<InferenceTrace> {
        let spec = self.spec;
        let device = &spec.neuron.device;
        let circuit = &spec.neuron.circuit;
        let r_hm = device.hm_resistance();
        let dt = crate::characterize::DEFAULT_DT;
        // Fine global tick on which inter-layer levels update.
        let tick = 1e-9;
        let llgs_per_tick = (tick / dt).round() as usize;
        let ticks_per_step = (spec.step_duration / tick).round().max(1.0) as usize;
        let stepper = Stepper::new(
            device,
            &SimConfig { dt, duration: tick, seed: 0, renormalize_each_step: true, external_field: Vec3::zero() },
        )?;

        let mut states: Vec<Option<DeviceLayerState>> = self
            .neuron_stage_sizes()
            .iter()
            .map(|s| {
                s.map(|n| DeviceLayerState {
                    m: vec![Vec3::new(1.0, 1e-3, 1e-3).normalized(); n],
                    chains: vec![InverterChain::new(circuit.tau_rc, 1.0); n],
                    levels: vec![1.0; n],
                })
            })
            .collect();

        // Input pixel spikes refresh every async timestep.
        let mut counts = [0u32; 10];
        let mut energy = EnergySample::default();
        let mut trace = InferenceTrace {
            timestep_duration: spec.step_duration,
            cumulative_counts: Vec::with_capacity(n_steps),
            cumulative_energy: Vec::with_capacity(n_steps),
        };

        for _step in 0..n_steps {
            let input: Vec<f64> =
                image.iter().map(|&p| (rng.gen::<f64>() < p) as u8 as f64).collect();
            for _tick in 0..ticks_per_step {
                // Stage outputs visible to downstream layers this tick.
                let mut upstream: Vec<f64> = input.clone();
                for (k, stage) in spec.topology.stages.iter().enumerate() {
                    match stage {
                        Stage::Crossbar(_) => {
                            let cb = self.crossbars[k].as_ref().expect("compiled crossbar");
                            let currents = cb.currents(
                                &upstream,
                                self.supply_offset_plus,
                                self.supply_offset_minus,
                            );
                            energy.synapse_j += cb.synapse_energy(&upstream, tick);
                            let state = states[k].as_mut().expect("device state");
                            for (n, &i_col) in currents.iter().enumerate() {
                                let drive = crate::readout::apply_read_backaction(
                                    i_col, circuit, true,
                                );
                                let mut m = state.m[n];
                                for _ in 0..llgs_per_tick {
                                    m = stepper.step(m, drive, drive, rng);
                                    state.levels[n] =
                                        state.chains[n].step(m.x, dt) as f64;
                                }
                                state.m[n] = m;
                                energy.neuron_j += drive * drive * r_hm * tick;
                            }
                            upstream = state.levels.clone();
                        }
                        Stage::Pool { input_shape, .. } => {
                            upstream = pool_2x2(&upstream, *input_shape);
                        }
                    }
                }
            }
            energy.read_j += crate::energy::read_energy_per_step(
                spec.mode,
                spec.step_duration,
                circuit,
                device,
                self.n_neurons,
            );
            // Sample output levels once per async timestep.
            let last_state = states
                .iter()
                .rev()
                .find_map(|s| s.as_ref())
                .expect("at least one crossbar stage");
            for (j, &lvl) in last_state.levels.iter().enumerate() {
                counts[j] += lvl as u32;
            }
            trace.cumulative_counts.push(counts);
            trace.cumulative_energy.push(energy);
        }
        Ok(trace)
    }
}

/// Accuracy (and mean energy) at one evaluation checkpoint.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct Checkpoint {
    pub step: usize,
    pub time_s: f64,
    pub accuracy: f64,
    pub mean_energy: EnergySample,
}

/// Accuracy-versus-time curve over a labeled image set.
#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct AccuracyCurve {
    pub checkpoints: Vec<Checkpoint>,
    pub n_images: usize,
}

impl AccuracyCurve {
    pub fn final_accuracy(&self) -> f64 {
        self.checkpoints.last().map(|c| c.accuracy).unwrap_or(0.0)
    }

    /// First checkpoint reaching `target` accuracy.
    pub fn first_reaching(&self, target: f64) -> Option<&Checkpoint> {
        self.checkpoints.iter().find(|c| c.accuracy >= target)
    }

    /// Best accuracy anywhere on the curve.
    pub fn best_accuracy(&self) -> f64 {
        self.checkpoints.iter().map(|c| c.accuracy).fold(0.0, f64::max)
    }

    /// CSV export: `time_ns,accuracy`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("time_ns,accuracy\n");
        for c in &self.checkpoints {
            out.push_str(&format!("{:.6},{:.6}\n", c.time_s * 1e9, c.accuracy));
        }
        out
    }
}

/// Geometric checkpoint steps (ratio ~sqrt(2)) up to `n_steps`, inclusive.
pub fn geometric_checkpoints(n_steps: usize) -> Vec<usize> {
    let mut steps = Vec::new();
    let mut s = 1usize;
    while s < n_steps {
        steps.push(s);
        s = (s + 1).max((s as f64 * std::f64::consts::SQRT_2).round() as usize);
    }
    steps.push(n_steps);
    steps
}

/// Evaluate classification accuracy versus time on a dataset subset.
///
/// Images run in parallel with per-image RNG streams; the curve is a pure
/// function of `(seed, spec, dataset)`. Checkpoints follow the geometric
/// grid of [`geometric_checkpoints`].
pub fn evaluate(
    programmed: &ProgrammedNetwork<'_>,
    dataset: &crate::dataset::Dataset,
    total_time: f64,
    seed: u64,
    n_images: usize,
) -> Result<AccuracyCurve> {
    evaluate_spaced(programmed, dataset, total_time, seed, n_images, false)
}

/// [`evaluate`] with a checkpoint after every timestep; time-to-target
/// readings (energy reports) want the fine grid.
pub fn evaluate_dense(
    programmed: &ProgrammedNetwork<'_>,
    dataset: &crate::dataset::Dataset,
    total_time: f64,
    seed: u64,
    n_images: usize,
) -> Result<AccuracyCurve> {
    evaluate_spaced(programmed, dataset, total_time, seed, n_images, true)
}

fn evaluate_spaced(
    programmed: &ProgrammedNetwork<'_>,
    dataset: &crate::dataset::Dataset,
    total_time: f64,
    seed: u64,
    n_images: usize,
    dense: bool,
) -> Result<AccuracyCurve> {
    if dataset.is_empty() || n_images == 0 {
        return Err(Error::invalid_argument("empty dataset"));
    }
    let n = n_images.min(dataset.len());
    let traces: Result<Vec<(u8, InferenceTrace)>> = (0..n)
        .into_par_iter()
        .map(|i| {
            let image = dataset.image(i);
            let trace = programmed.run_inference(&image, total_time, seed, i as u64)?;
            Ok((dataset.label(i), trace))
        })
        .collect();
    let traces = traces?;
    let n_steps = traces[0].1.steps();
    let checkpoints = if dense {
        (1..=n_steps).collect::<Vec<_>>()
    } else {
        geometric_checkpoints(n_steps)
    }
        .into_iter()
        .map(|step| {
            let mut correct = 0usize;
            let mut energy = EnergySample::default();
            for (label, trace) in &traces {
                if trace.predicted_at(step) == *label as usize {
                    correct += 1;
                }
                let e = trace.cumulative_energy[step - 1];
                energy.neuron_j += e.neuron_j;
                energy.synapse_j += e.synapse_j;
                energy.read_j += e.read_j;
            }
            let inv = 1.0 / n as f64;
            Checkpoint {
                step,
                time_s: step as f64 * traces[0].1.timestep_duration,
                accuracy: correct as f64 * inv,
                mean_energy: EnergySample {
                    neuron_j: energy.neuron_j * inv,
                    synapse_j: energy.synapse_j * inv,
                    read_j: energy.read_j * inv,
                },
            }
        })
        .collect();
    Ok(AccuracyCurve { checkpoints, n_images: n })
}

/// Deterministic rate propagation: replaces every Bernoulli draw by its
/// probability. Returns the activation vector after each stage.
///
/// `logit_shift` is a constant addition to every neuron's logistic
/// argument ((bias - i_bias)/i_o); zero for sync networks.
pub fn rate_forward(
    topology: &NetworkTopology,
    logit_shift: f64,
    image: &[f64],
) -> Vec<Vec<f64>> {
    let mut out = Vec::with_capacity(topology.stages.len());
    let mut acts: Vec<f64> = image.to_vec();
    for stage in &topology.stages {
        match stage {
            Stage::Crossbar(layer) => {
                let mut next = vec![0.0f64; layer.neurons];
                for (row, &a) in acts.iter().enumerate() {
                    if a != 0.0 {
                        for n in 0..layer.neurons {
                            next[n] += a * layer.weights[row * layer.neurons + n];
                        }
                    }
                }
                for n in 0..layer.neurons {
                    next[n] += layer.weights[(layer.rows - 1) * layer.neurons + n];
                    next[n] = sigmoid(next[n] + logit_shift);
                }
                acts = next;
                out.push(acts.clone());
            }
            Stage::Pool { input_shape, .. } => {
                acts = pool_2x2(&acts, *input_shape);
                out.push(acts.clone());
            }
        }
    }
    out
}

/// Predicted class of the rate-propagation reference.
pub fn rate_predict(topology: &NetworkTopology, logit_shift: f64, image: &[f64]) -> usize {
    let acts = rate_forward(topology, logit_shift, image);
    let last = acts.last().expect("stages");
    let mut best = 0;
    for (i, &a) in last.iter().enumerate() {
        if a > last[best] {
            best = i;
        }
    }
    best
}

/// Accuracy of the rate-propagation reference over a dataset subset.
pub fn rate_accuracy(
    topology: &NetworkTopology,
    logit_shift: f64,
    dataset: &crate::dataset::Dataset,
    n_images: usize,
) -> f64 {
    let n = n_images.min(dataset.len());
    let correct = (0..n)
        .into_par_iter()
        .filter(|&i| {
            rate_predict(topology, logit_shift, &dataset.image(i)) == dataset.label(i) as usize
        })
        .count();
    correct as f64 / n as f64
}

#[cfg(test)]
pub(crate) mod tests {
    use super::*;
    use crate::characterize::SwitchingCharacteristic;

    pub(crate) fn fake_characteristic(i_bias: f64, i_o: f64, delta: f64) -> SwitchingCharacteristic {
        SwitchingCharacteristic {
            currents: vec![],
            p_switch: vec![],
            n_trials: 0,
            pulse_width: 0.5e-9,
            i_bias,
            i_o,
            fit_residual: 0.0,
            delta_kbt: delta,
        }
    }

    pub(crate) fn tiny_spec(mode: Mode, fidelity: Fidelity) -> NetworkSpec {
        let topo = crate::network::tests_support::tiny_topology();
        let neuron = NeuronBinding {
            device: DeviceParams::reference_10kbt(),
            characteristic: fake_characteristic(100e-6, 20e-6, 20.0),
            circuit: ReadCircuitParams::default(),
        };
        let step = match mode {
            Mode::Sync => 4e-9,
            Mode::Async => 8.2e-9,
        };
        NetworkSpec::new(topo, neuron, mode, fidelity, step)
    }

    #[test]
    fn behavioral_neuron_probabilities() {
        let c = fake_characteristic(5e-6, 1e-6, 20.0);
        let mut rng = stream_rng(3, 0);
        // Sync: bias = i_bias, so zero drive spikes at p = 0.5.
        let n = 20_000;
        let mut hits = 0;
        for _ in 0..n {
            hits += neuron_step_behavioral(0.0, &c, c.i_bias, &mut rng) as usize;
        }
        let rate = hits as f64 / n as f64;
        assert!((rate - 0.5).abs() < 0.01, "rate {rate}");
        // One i_o above bias: sigmoid(1) = 0.731.
        let mut hits = 0;
        for _ in 0..n {
            hits += neuron_step_behavioral(1e-6, &c, c.i_bias, &mut rng) as usize;
        }
        let rate = hits as f64 / n as f64;
        assert!((rate - 0.7311).abs() < 0.01, "rate {rate}");
        // Strongly negative drive never spikes.
        let mut hits = 0;
        for _ in 0..1000 {
            hits += neuron_step_behavioral(-60e-6, &c, c.i_bias, &mut rng) as usize;
        }
        assert_eq!(hits, 0);
    }

    #[test]
    fn inference_trace_counts_monotone_and_deterministic() {
        let spec = tiny_spec(Mode::Sync, Fidelity::Behavioral);
        let programmed = program_network(&spec, 1).unwrap();
        let ds = crate::dataset::synthetic_digits(4, 9);
        let image = ds.image(0);
        let a = programmed.run_inference(&image, 200e-9, 5, 0).unwrap();
        let b = programmed.run_inference(&image, 200e-9, 5, 0).unwrap();
        assert_eq!(a, b);
        let c = programmed.run_inference(&image, 200e-9, 5, 1).unwrap();
        assert_ne!(a, c);
        // Cumulative counts never decrease.
        for j in 0..10 {
            for w in a.cumulative_counts.windows(2) {
                assert!(w[1][j] >= w[0][j]);
            }
        }
        // Energy accumulates.
        for w in a.cumulative_energy.windows(2) {
            assert!(w[1].total() >= w[0].total());
        }
    }

    #[test]
    fn all_zero_image_is_well_formed() {
        let spec = tiny_spec(Mode::Sync, Fidelity::Behavioral);
        let programmed = program_network(&spec, 1).unwrap();
        let image = vec![0.0; 784];
        let t = programmed.run_inference(&image, 100e-9, 2, 0).unwrap();
        let total: u32 = t.cumulative_counts.last().unwrap().iter().sum();
        // Finite, well-formed response; the biased neurons still fire.
        assert!(t.steps() == 25);
        assert!(total <= 10 * 25);
    }

    #[test]
    fn rejects_too_short_time_and_bad_pixels() {
        let spec = tiny_spec(Mode::Sync, Fidelity::Behavioral);
        let programmed = program_network(&spec, 1).unwrap();
        let image = vec![0.0; 784];
        assert!(matches!(
            programmed.run_inference(&image, 1e-9, 1, 0),
            Err(Error::InvalidArgument(_))
        ));
        let bad = vec![1.5; 784];
        assert!(programmed.run_inference(&bad, 100e-9, 1, 0).is_err());
    }

    #[test]
    fn rate_propagation_matches_empirical_rates() {
        let spec = tiny_spec(Mode::Sync, Fidelity::Behavioral);
        let programmed = program_network(&spec, 1).unwrap();
        let ds = crate::dataset::synthetic_digits(2, 31);
        let image = ds.image(1);
        let n_steps = 1200usize;
        let total = n_steps as f64 * spec.step_duration;
        // Collect empirical output rates over many steps.
        let trace = programmed.run_inference(&image, total, 4, 0).unwrap();
        let final_counts = trace.cumulative_counts.last().unwrap();
        // Steady-state window: subtract the pipeline fill (2 crossbars + pool).
        let rates: Vec<f64> =
            final_counts.iter().map(|&c| c as f64 / n_steps as f64).collect();
        let oracle = rate_forward(&spec.topology, 0.0, &image);
        let oracle_out = oracle.last().unwrap();
        let tol = 3.0 / (n_steps as f64).sqrt();
        for (r, o) in rates.iter().zip(oracle_out) {
            assert!(
                (r - o).abs() < tol + 3.0 / n_steps as f64,
                "rate {r} vs oracle {o} (tol {tol})"
            );
        }
    }

    #[test]
    fn geometric_checkpoints_cover_range() {
        assert_eq!(geometric_checkpoints(1), vec![1]);
        assert_eq!(geometric_checkpoints(10), vec![1, 2, 3, 4, 6, 8, 10]);
        let cps = geometric_checkpoints(256);
        assert_eq!(*cps.last().unwrap(), 256);
        assert!(cps.windows(2).all(|w| w[1] > w[0]));
        // ratios stay close to sqrt(2) once past the small counts
        for w in cps.windows(2).skip(4) {
            let r = w[1] as f64 / w[0] as f64;
            assert!(r < 1.6, "ratio {r}");
        }
    }

    #[test]
    fn evaluate_single_image_curve() {
        let spec = tiny_spec(Mode::Sync, Fidelity::Behavioral);
        let programmed = program_network(&spec, 1).unwrap();
        let ds = crate::dataset::synthetic_digits(1, 3);
        let curve = evaluate(&programmed, &ds, 100e-9, 7, 1).unwrap();
        assert!(!curve.checkpoints.is_empty());
        for c in &curve.checkpoints {
            assert!(c.accuracy == 0.0 || c.accuracy == 1.0);
        }
    }

    #[test]
    fn evaluate_rejects_empty() {
        let spec = tiny_spec(Mode::Sync, Fidelity::Behavioral);
        let programmed = program_network(&spec, 1).unwrap();
        let ds = crate::dataset::synthetic_digits(1, 3).take(0);
        assert!(evaluate(&programmed, &ds, 100e-9, 7, 1).is_err());
    }
}
