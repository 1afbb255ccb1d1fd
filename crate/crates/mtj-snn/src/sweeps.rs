//! Monte Carlo robustness sweeps: synapse programming variation, supply
//! voltage variation, CMOS process corners, and operating temperature.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::characterize::{characterize_auto, SwitchingCharacteristic};
use crate::dataset::Dataset;
use crate::error::{Error, Result};
use crate::readout::characterize_async;
use crate::rng::{compose_stream, stream_rng};
use crate::snn::{evaluate, program_network, Mode, NetworkSpec};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SweepKind {
    /// Programming variation of the resistive synapses; values in percent.
    SynapseSigma,
    /// Supply-voltage variation; values in millivolts (sigma of a shared
    /// additive offset drawn once per repetition).
    SupplyMv,
    /// CMOS read-circuit process corner; values in sigma (sign alternates
    /// across repetitions).
    CmosSigma,
    /// Operating temperature, K; devices are re-characterized per point.
    Temperature,
}

impl SweepKind {
    pub fn parse(name: &str) -> Result<Self> {
        match name {
            "synapse_sigma" => Ok(Self::SynapseSigma),
            "supply_mv" => Ok(Self::SupplyMv),
            "cmos_sigma" => Ok(Self::CmosSigma),
            "temperature" => Ok(Self::Temperature),
            other => Err(Error::config(format!(
                "unknown sweep kind '{other}' (expected synapse_sigma, supply_mv, cmos_sigma or temperature)"
            ))),
        }
    }
}

/// Mean/stddev accuracy per sweep value.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepResult {
    pub kind: SweepKind,
    pub values: Vec<f64>,
    pub mean_accuracy: Vec<f64>,
    pub std_accuracy: Vec<f64>,
    pub n_mc: usize,
}

impl SweepResult {
    /// CSV export: `sweep_value,mean_accuracy,std_accuracy`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("sweep_value,mean_accuracy,std_accuracy\n");
        for i in 0..self.values.len() {
            out.push_str(&format!(
                "{:.6},{:.6},{:.6}\n",
                self.values[i], self.mean_accuracy[i], self.std_accuracy[i]
            ));
        }
        out
    }
}

/// Re-characterize the bound neuron device at a new temperature,
/// preserving the characterization route of the current binding (clocked
/// pulse curve for sync networks, averaged continuous readout for async).
pub fn recharacterize_at_temperature(
    spec: &NetworkSpec,
    temperature: f64,
    seed: u64,
) -> Result<SwitchingCharacteristic> {
    let device = spec.neuron.device.clone().with_temperature(temperature)?;
    match spec.mode {
        Mode::Sync => characterize_auto(
            &device,
            spec.neuron.characteristic.pulse_width,
            13,
            600,
            seed,
        ),
        Mode::Async => {
            // Span a few logistic widths of the current fit.
            let io = spec.neuron.characteristic.i_o;
            let ib = spec.neuron.characteristic.i_bias;
            let currents: Vec<f64> =
                (0..13).map(|k| ib - 3.0 * io + 6.0 * io * k as f64 / 12.0).collect();
            characterize_async(
                &device,
                &spec.neuron.circuit,
                &currents,
                spec.neuron.characteristic.pulse_width,
                seed,
            )
        }
    }
}

/// Run one sweep: for every value, `n_mc` repetitions with fresh
/// variation draws, each evaluated over `n_images` images.
#[allow(clippy::too_many_arguments)]
pub fn sweep_variations(
    spec: &NetworkSpec,
    dataset: &Dataset,
    kind: SweepKind,
    values: &[f64],
    n_mc: usize,
    total_time: f64,
    n_images: usize,
    seed: u64,
) -> Result<SweepResult> {
    if n_mc == 0 {
        return Err(Error::invalid_argument("n_mc must be >= 1"));
    }
    let mut mean_accuracy = Vec::with_capacity(values.len());
    let mut std_accuracy = Vec::with_capacity(values.len());

    for (vi, &value) in values.iter().enumerate() {
        // Per-point spec adjustments that are shared across repetitions.
        let mut point_spec = spec.clone();
        match kind {
            SweepKind::SynapseSigma => point_spec.synapse_sigma = value / 100.0,
            SweepKind::Temperature => {
                point_spec.neuron.characteristic =
                    recharacterize_at_temperature(spec, value, compose_stream(seed, vi as u64))?;
                point_spec.neuron.device =
                    spec.neuron.device.clone().with_temperature(value)?;
            }
            SweepKind::SupplyMv | SweepKind::CmosSigma => {}
        }

        let mut accs = Vec::with_capacity(n_mc);
        for rep in 0..n_mc {
            let rep_stream = compose_stream(seed ^ 0x51ee_9000 + vi as u64, rep as u64);
            let mut rep_spec = point_spec.clone();
            if let SweepKind::CmosSigma = kind {
                // Per-inverter offsets are drawn at programming time at
                // the configured corner level.
                rep_spec.neuron.circuit.sigma_level = value.round() as i8;
            }
            let mut programmed = program_network(&rep_spec, rep_stream)?;
            if let SweepKind::SupplyMv = kind {
                // The two supply rails drift independently; each gets its
                // own shared offset for this repetition.
                let mut rng = stream_rng(rep_stream, 0xff);
                programmed.supply_offset_plus =
                    value * 1e-3 * rng.sample::<f64, _>(rand_distr::StandardNormal);
                programmed.supply_offset_minus =
                    value * 1e-3 * rng.sample::<f64, _>(rand_distr::StandardNormal);
            }
            let curve = evaluate(&programmed, dataset, total_time, rep_stream ^ 0xe7a1, n_images)?;
            accs.push(curve.final_accuracy());
        }
        let mean = accs.iter().sum::<f64>() / n_mc as f64;
        let var = if n_mc > 1 {
            accs.iter().map(|a| (a - mean) * (a - mean)).sum::<f64>() / (n_mc - 1) as f64
        } else {
            0.0
        };
        mean_accuracy.push(mean);
        std_accuracy.push(var.sqrt());
    }
    Ok(SweepResult {
        kind,
        values: values.to_vec(),
        mean_accuracy,
        std_accuracy,
        n_mc,
    })
}
