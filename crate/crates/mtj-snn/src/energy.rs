//! Energy accounting per image classification.
//!
//! Three components:
//!
//! - **neuron**: Joule dissipation of write/reset currents in the
//!   heavy-metal strip of every neuron (`I^2 R t`);
//! - **synapse**: dissipation in the active crossbar conductances
//!   (`V^2 G t`), accumulated by the crossbar stages;
//! - **read**: sense-path dissipation plus the CMOS interface. Clocked
//!   designs gate the inverters and pay a fixed energy per read; the
//!   continuously read design pays static power for the whole run plus
//!   the MTJ sense dissipation.
//!
//! The CMOS interface constants are behavioral calibration parameters;
//! component orderings across designs, not absolute joules, are the
//! meaningful output.

use serde::{Deserialize, Serialize};

use crate::device::DeviceParams;
use crate::error::{Error, Result};
use crate::readout::ReadCircuitParams;
use crate::snn::{AccuracyCurve, EnergySample, Mode, NetworkSpec};

/// Energy drawn by one gated read cycle of one neuron's inverter stack, J.
pub const SYNC_READ_ENERGY_PER_CYCLE: f64 = 150e-15;

/// Static power of one always-on inverter stack, W.
pub const ASYNC_STATIC_POWER: f64 = 22e-6;

/// Per-component energy report for one classification run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnergyReport {
    pub neuron_j: f64,
    pub synapse_j: f64,
    pub read_j: f64,
    pub total_j: f64,
    pub mode: Mode,
    /// Barrier of the neuron device, kB*T.
    pub device_delta: f64,
    /// Elapsed simulated time at which the accuracy target was met, s.
    pub time_to_target: f64,
    pub target_accuracy: f64,
}

impl EnergyReport {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    /// CSV row: `delta_kbt,mode,neuron_j,synapse_j,read_j,total_j,time_ns`.
    pub fn csv_row(&self) -> String {
        let mode = match self.mode {
            Mode::Sync => "sync",
            Mode::Async => "async",
        };
        format!(
            "{:.4},{},{:.16e},{:.16e},{:.16e},{:.16e},{:.6}\n",
            self.device_delta,
            mode,
            self.neuron_j,
            self.synapse_j,
            self.read_j,
            self.total_j,
            self.time_to_target * 1e9
        )
    }

    pub const CSV_HEADER: &'static str =
        "delta_kbt,mode,neuron_j,synapse_j,read_j,total_j,time_ns\n";
}

/// Joule heating of drive currents in the heavy-metal strip:
/// `sum I^2 R_HM t` over the given (current, duration) segments.
pub fn neuron_energy(segments: &[(f64, f64)], hm_resistance: f64) -> Result<f64> {
    if !(hm_resistance > 0.0) {
        return Err(Error::invalid_argument("hm_resistance must be > 0"));
    }
    Ok(segments.iter().map(|&(i, t)| i * i * hm_resistance * t).sum())
}

/// Read-path energy for a whole network over one timestep, J.
///
/// Clocked mode: one gated read per neuron per cycle plus the MTJ sense
/// dissipation during the read window. Continuous mode: static inverter
/// power for the whole step plus continuous sense dissipation.
pub fn read_energy_per_step(
    mode: Mode,
    step_duration: f64,
    circuit: &ReadCircuitParams,
    device: &DeviceParams,
    n_neurons: usize,
) -> f64 {
    let r_mtj = 0.5 * (device.mgo_resistance_p + device.mgo_resistance_ap);
    let i2r = circuit.read_current * circuit.read_current * r_mtj;
    match mode {
        Mode::Sync => {
            n_neurons as f64 * (SYNC_READ_ENERGY_PER_CYCLE + i2r * circuit.read_time_sync)
        }
        Mode::Async => n_neurons as f64 * (ASYNC_STATIC_POWER + i2r) * step_duration,
    }
}

/// Total read energy over a run (`n_cycles` clocked cycles, or `elapsed`
/// seconds of continuous operation).
pub fn read_energy(
    mode: Mode,
    n_cycles: usize,
    elapsed: f64,
    circuit: &ReadCircuitParams,
    device: &DeviceParams,
    n_neurons: usize,
) -> f64 {
    match mode {
        Mode::Sync => {
            read_energy_per_step(mode, 0.0, circuit, device, n_neurons) * n_cycles as f64
        }
        Mode::Async => {
            let r_mtj = 0.5 * (device.mgo_resistance_p + device.mgo_resistance_ap);
            let i2r = circuit.read_current * circuit.read_current * r_mtj;
            n_neurons as f64 * (ASYNC_STATIC_POWER + i2r) * elapsed
        }
    }
}

/// Build the energy report for an evaluated accuracy curve: integrate all
/// components up to the first checkpoint that reaches `target_accuracy`.
pub fn report(
    spec: &NetworkSpec,
    curve: &AccuracyCurve,
    target_accuracy: f64,
) -> Result<EnergyReport> {
    let hit = curve.first_reaching(target_accuracy).ok_or(Error::TargetUnreached {
        target: target_accuracy,
        best: curve.best_accuracy(),
    })?;
    let e: EnergySample = hit.mean_energy;
    Ok(EnergyReport {
        neuron_j: e.neuron_j,
        synapse_j: e.synapse_j,
        read_j: e.read_j,
        total_j: e.total(),
        mode: spec.mode,
        device_delta: spec.neuron.characteristic.delta_kbt,
        time_to_target: hit.time_s,
        target_accuracy,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn neuron_energy_examples() {
        assert_eq!(neuron_energy(&[], 1000.0).unwrap(), 0.0);
        assert_eq!(neuron_energy(&[(0.0, 1e-9)], 1000.0).unwrap(), 0.0);
        // 10 uA through 1 kOhm for 0.5 ns: I^2 R t = 5e-17 J.
        let e = neuron_energy(&[(10e-6, 0.5e-9)], 1000.0).unwrap();
        assert!((e - 5e-17).abs() / 5e-17 < 1e-12);
        assert!(neuron_energy(&[(1e-6, 1e-9)], 0.0).is_err());
    }

    #[test]
    fn read_energy_zero_and_linearity() {
        let circuit = ReadCircuitParams::default();
        let device = DeviceParams::reference_1kbt();
        assert_eq!(read_energy(Mode::Sync, 0, 0.0, &circuit, &device, 100), 0.0);
        assert_eq!(read_energy(Mode::Async, 0, 0.0, &circuit, &device, 100), 0.0);
        let e1 = read_energy(Mode::Async, 0, 80e-9, &circuit, &device, 100);
        let e2 = read_energy(Mode::Async, 0, 160e-9, &circuit, &device, 100);
        assert!((e2 / e1 - 2.0).abs() < 1e-12);
    }

    #[test]
    fn report_requires_target() {
        use crate::snn::{Checkpoint, EnergySample};
        let curve = AccuracyCurve {
            checkpoints: vec![
                Checkpoint {
                    step: 1,
                    time_s: 4e-9,
                    accuracy: 0.4,
                    mean_energy: EnergySample { neuron_j: 1e-13, synapse_j: 2e-12, read_j: 3e-12 },
                },
                Checkpoint {
                    step: 4,
                    time_s: 16e-9,
                    accuracy: 0.97,
                    mean_energy: EnergySample { neuron_j: 4e-13, synapse_j: 8e-12, read_j: 1.2e-11 },
                },
            ],
            n_images: 10,
        };
        let spec_holder = crate::snn::tests::tiny_spec(Mode::Sync, crate::snn::Fidelity::Behavioral);
        let rep = report(&spec_holder, &curve, 0.96).unwrap();
        assert!((rep.total_j - (rep.neuron_j + rep.synapse_j + rep.read_j)).abs() < 1e-30);
        assert_eq!(rep.time_to_target, 16e-9);
        // Energy at a higher target is at least the energy at a lower one.
        let low = report(&spec_holder, &curve, 0.3).unwrap();
        assert!(rep.total_j >= low.total_j);
        // Unreachable target errors with the best accuracy.
        match report(&spec_holder, &curve, 0.999) {
            Err(Error::TargetUnreached { best, .. }) => assert!((best - 0.97).abs() < 1e-12),
            other => panic!("expected TargetUnreached, got {other:?}"),
        }
    }
}
