//! Behavioral model of the MTJ read path.
//!
//! The analog chain (MTJ-Rref divider plus inverter stages) collapses to
//! three elements: a hysteretic comparator on `m_x`, a first-order
//! low-pass with time constant `tau_rc` standing in for the gate
//! capacitance of the inverter chain, and a final comparator. The model
//! is calibrated by a single number: `tau_rc` is chosen so the mean
//! output pulse width of the reference telegraphic device at zero input
//! matches the read circuit's measured response.

use rand::Rng;

use crate::characterize::{retention_failure_probability, SwitchingCharacteristic};
use crate::device::DeviceParams;
use crate::error::{Error, Result};
use crate::fit::fit_sigmoid;
use crate::llgs::{integrate_with, SimConfig, Trajectory};
use crate::vec3::Vec3;

/// Inverter-chain time constant calibrated on the 1 kBT reference device
/// (zero-input mean output pulse width of 8.2 ns), s.
pub const DEFAULT_TAU_RC: f64 = 3.94e-9;

/// Read-path parameters.
#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct ReadCircuitParams {
    /// Sense current through the MTJ stack, A.
    pub read_current: f64,
    /// Divider reference resistance, ohm.
    pub r_ref: f64,
    /// Read window of the clocked protocol, s.
    pub read_time_sync: f64,
    /// Inverter-chain low-pass time constant, s.
    pub tau_rc: f64,
    /// Output-probability offset equivalent of a transistor threshold
    /// shift, per sigma of process variation.
    pub threshold_offset_per_sigma: f64,
    /// Process corner in units of sigma: 0, ±1, ±2.
    pub sigma_level: i8,
}

impl Default for ReadCircuitParams {
    fn default() -> Self {
        Self {
            read_current: 100e-9,
            r_ref: 15.8e3,
            read_time_sync: 1e-9,
            tau_rc: DEFAULT_TAU_RC,
            threshold_offset_per_sigma: 0.025,
            sigma_level: 0,
        }
    }
}

impl ReadCircuitParams {
    pub fn validate(&self) -> Result<()> {
        if self.read_current < 0.0 {
            return Err(Error::invalid_argument("read_current must be >= 0"));
        }
        if !(self.read_time_sync > 0.0) {
            return Err(Error::invalid_argument("read_time_sync must be > 0"));
        }
        if !(self.tau_rc > 0.0) {
            return Err(Error::invalid_argument("tau_rc must be > 0"));
        }
        let offset = self.threshold_offset();
        if !(-0.1..=0.1).contains(&offset) {
            return Err(Error::invalid_argument(format!(
                "threshold offset {offset} outside [-0.1, 0.1]"
            )));
        }
        Ok(())
    }

    /// Probability offset of the configured process corner.
    pub fn threshold_offset(&self) -> f64 {
        self.sigma_level as f64 * self.threshold_offset_per_sigma
    }
}

/// One sample of the inverter output.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct ReadSample {
    pub time: f64,
    /// 1 when the read circuit reports the P state, 0 for AP.
    pub level: u8,
}

/// Clocked readout of a settled state between write pulses.
///
/// Reports 1 for the P state (`m_x > 0`); the result flips with the
/// retention-failure probability of the read window, modeling a state
/// lost while it is being sensed.
pub fn read_sync<R: Rng + ?Sized>(
    m_final: Vec3,
    circuit: &ReadCircuitParams,
    delta_kbt: f64,
    rng: &mut R,
) -> u8 {
    let ideal = (m_final.x > 0.0) as u8;
    let p_flip = retention_failure_probability(delta_kbt, circuit.read_time_sync * 1e9);
    if p_flip > 0.0 && rng.gen::<f64>() < p_flip {
        1 - ideal
    } else {
        ideal
    }
}

/// Hysteretic comparator + RC low-pass + comparator, applied to a stream
/// of `m_x` samples. Shared by the trajectory-based and streaming paths.
#[derive(Debug, Clone)]
pub struct InverterChain {
    tau_rc: f64,
    comparator: i8,
    filtered: f64,
    output: u8,
}

impl InverterChain {
    pub fn new(tau_rc: f64, initial_mx: f64) -> Self {
        let state = if initial_mx >= 0.0 { 1 } else { -1 };
        Self {
            tau_rc,
            comparator: state,
            filtered: if state > 0 { 1.0 } else { 0.0 },
            output: (state > 0) as u8,
        }
    }

    /// Advance by `dt` with magnetization component `mx`; returns the
    /// binary output level.
    #[inline]
    pub fn step(&mut self, mx: f64, dt: f64) -> u8 {
        if mx > 0.5 {
            self.comparator = 1;
        } else if mx < -0.5 {
            self.comparator = -1;
        }
        let target = if self.comparator > 0 { 1.0 } else { 0.0 };
        // Exact relaxation step keeps the filter stable for any dt.
        let decay = (-dt / self.tau_rc).exp();
        self.filtered = target + (self.filtered - target) * decay;
        // Small output hysteresis suppresses chatter at the midpoint.
        if self.output == 1 {
            if self.filtered < 0.45 {
                self.output = 0;
            }
        } else if self.filtered > 0.55 {
            self.output = 1;
        }
        self.output
    }
}

/// Continuous readout of a telegraphic trajectory.
///
/// Thresholds `m_x` with hysteresis, applies the first-order inverter
/// response and re-thresholds to a binary stream. Pulses shorter than
/// roughly `tau_rc` are absorbed by the filter.
pub fn read_async_stream(trajectory: &Trajectory, circuit: &ReadCircuitParams) -> Vec<ReadSample> {
    let mut chain = InverterChain::new(
        circuit.tau_rc,
        trajectory.m.first().map(|m| m.x).unwrap_or(1.0),
    );
    let mut out = Vec::with_capacity(trajectory.len());
    let mut last_t = trajectory.times.first().copied().unwrap_or(0.0);
    for (i, (&t, m)) in trajectory.times.iter().zip(&trajectory.m).enumerate() {
        let dt = if i == 0 { 0.0 } else { t - last_t };
        let level = if i == 0 { chain.output } else { chain.step(m.x, dt) };
        out.push(ReadSample { time: t, level });
        last_t = t;
    }
    out
}

/// Mean level of a read stream.
pub fn stream_mean(samples: &[ReadSample]) -> f64 {
    if samples.is_empty() {
        return 0.0;
    }
    samples.iter().map(|s| s.level as f64).sum::<f64>() / samples.len() as f64
}

/// Mean duration of the high and low pulses of a read stream, s.
pub fn mean_pulse_width(samples: &[ReadSample]) -> f64 {
    let mut widths = Vec::new();
    let mut run_start = samples.first().map(|s| s.time).unwrap_or(0.0);
    let mut level = samples.first().map(|s| s.level).unwrap_or(0);
    for s in samples.iter().skip(1) {
        if s.level != level {
            widths.push(s.time - run_start);
            run_start = s.time;
            level = s.level;
        }
    }
    if widths.is_empty() {
        f64::NAN
    } else {
        widths.iter().sum::<f64>() / widths.len() as f64
    }
}

/// Effective drive current seen by a continuously read device: the sense
/// current adds its own spin-orbit torque. Clocked reads are decoupled in
/// time and leave the write current untouched.
pub fn apply_read_backaction(write_current: f64, circuit: &ReadCircuitParams, continuous: bool) -> f64 {
    if continuous {
        write_current + circuit.read_current
    } else {
        write_current
    }
}

/// Shift a mean output level by the configured process-corner offset.
pub fn apply_cmos_variation(mean_output: f64, circuit: &ReadCircuitParams) -> f64 {
    (mean_output + circuit.threshold_offset()).clamp(0.0, 1.0)
}

/// Simulate the continuously read device at `write_current` and return
/// the mean inverter output over `duration`.
///
/// Includes the read-current back-action. Streams the trajectory, so long
/// averaging windows stay cheap on memory.
pub fn mean_output_at(
    params: &DeviceParams,
    circuit: &ReadCircuitParams,
    write_current: f64,
    duration: f64,
    seed: u64,
    trajectory_index: u64,
) -> Result<f64> {
    let dt = crate::characterize::DEFAULT_DT;
    let config = SimConfig {
        dt,
        duration,
        seed,
        renormalize_each_step: true,
        external_field: Vec3::zero(),
    };
    let drive = apply_read_backaction(write_current, circuit, true);
    let mut chain = InverterChain::new(circuit.tau_rc, 1.0);
    let mut acc = 0.0f64;
    let mut n = 0usize;
    let m0 = Vec3::new(1.0, 1e-3, 1e-3).normalized();
    integrate_with(m0, &config, params, trajectory_index, |_| drive, |i, _, m| {
        if i > 0 {
            acc += chain.step(m.x, dt) as f64;
            n += 1;
        }
    })?;
    Ok(acc / n as f64)
}

/// Mean output pulse width at zero write current, s.
pub fn zero_input_pulse_width(
    params: &DeviceParams,
    circuit: &ReadCircuitParams,
    duration: f64,
    seed: u64,
) -> Result<f64> {
    let dt = crate::characterize::DEFAULT_DT;
    let config = SimConfig {
        dt,
        duration,
        seed,
        renormalize_each_step: true,
        external_field: Vec3::zero(),
    };
    let drive = apply_read_backaction(0.0, circuit, true);
    let mut chain = InverterChain::new(circuit.tau_rc, 1.0);
    let mut level = 1u8;
    let mut run_start = 0.0f64;
    let mut total = 0.0f64;
    let mut count = 0usize;
    let m0 = Vec3::new(1.0, 1e-3, 1e-3).normalized();
    integrate_with(m0, &config, params, 7, |_| drive, |i, t, m| {
        if i == 0 {
            return;
        }
        let new_level = chain.step(m.x, dt);
        if new_level != level {
            total += t - run_start;
            count += 1;
            run_start = t;
            level = new_level;
        }
    })?;
    if count == 0 {
        return Err(Error::InsufficientStatistics { observed: 0, needed: 1 });
    }
    Ok(total / count as f64)
}

/// Calibrate `tau_rc` so the zero-input mean pulse width of `params`
/// equals `target_pulse_width`. Monotone in `tau_rc`, solved by bisection.
pub fn calibrate_tau_rc(
    params: &DeviceParams,
    target_pulse_width: f64,
    duration: f64,
    seed: u64,
) -> Result<f64> {
    let mut lo = 0.05e-9;
    let mut hi = 20e-9;
    let width_at = |tau: f64| -> Result<f64> {
        let circuit = ReadCircuitParams { tau_rc: tau, ..Default::default() };
        zero_input_pulse_width(params, &circuit, duration, seed)
    };
    let w_lo = width_at(lo)?;
    let w_hi = width_at(hi)?;
    if !(w_lo <= target_pulse_width && target_pulse_width <= w_hi) {
        return Err(Error::InsufficientRange(format!(
            "target width {target_pulse_width:.3e} outside achievable [{w_lo:.3e}, {w_hi:.3e}]"
        )));
    }
    for _ in 0..18 {
        let mid = (lo * hi).sqrt();
        let w = width_at(mid)?;
        if w < target_pulse_width {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok((lo * hi).sqrt())
}

/// Mean inverter output versus write current, fitted to the logistic.
///
/// This is the characterization route for telegraphic devices: the bias
/// point is the current at which the time-averaged output crosses 0.5
/// (zero for a symmetric telegraph) and `i_o` is the logistic scale of
/// the averaged response.
pub fn characterize_async(
    params: &DeviceParams,
    circuit: &ReadCircuitParams,
    currents: &[f64],
    averaging_time: f64,
    seed: u64,
) -> Result<SwitchingCharacteristic> {
    use rayon::prelude::*;
    let mut sorted = currents.to_vec();
    sorted.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let means: Result<Vec<f64>> = sorted
        .par_iter()
        .enumerate()
        .map(|(k, &i)| mean_output_at(params, circuit, i, averaging_time, seed, 40_000 + k as u64))
        .collect();
    let means = means?;
    let fit = fit_sigmoid(&sorted, &means)?;
    Ok(SwitchingCharacteristic {
        currents: sorted,
        p_switch: means,
        n_trials: 1,
        pulse_width: averaging_time,
        i_bias: fit.i_bias,
        i_o: fit.i_o,
        fit_residual: fit.residual,
        delta_kbt: crate::characterize::calibrate_barrier(params)?,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::stream_rng;

    #[test]
    fn sync_read_is_faithful_for_stable_devices() {
        let circuit = ReadCircuitParams::default();
        let mut rng = stream_rng(1, 0);
        // delta = 20: flip probability ~ exp(-20) ~ 2e-9.
        let mut flips = 0;
        for _ in 0..100_000 {
            if read_sync(Vec3::new(0.9, 0.1, 0.0), &circuit, 20.0, &mut rng) != 1 {
                flips += 1;
            }
        }
        assert_eq!(flips, 0);
        assert_eq!(read_sync(Vec3::new(-0.9, 0.1, 0.0), &circuit, 20.0, &mut rng), 0);
    }

    #[test]
    fn sync_read_flip_rate_matches_retention() {
        let circuit = ReadCircuitParams::default();
        let mut rng = stream_rng(2, 0);
        let n = 200_000;
        let mut flips = 0;
        for _ in 0..n {
            if read_sync(Vec3::unit_x(), &circuit, 4.6, &mut rng) == 0 {
                flips += 1;
            }
        }
        let rate = flips as f64 / n as f64;
        assert!((rate - 0.01).abs() < 0.002, "flip rate {rate}");
    }

    #[test]
    fn constant_trajectory_reads_constant() {
        let n = 2000;
        let dt = 1e-12;
        let traj = Trajectory {
            times: (0..n).map(|i| i as f64 * dt).collect(),
            m: vec![Vec3::unit_x(); n],
        };
        let stream = read_async_stream(&traj, &ReadCircuitParams::default());
        assert!(stream.iter().all(|s| s.level == 1));
        assert_eq!(stream_mean(&stream), 1.0);
    }

    #[test]
    fn filter_absorbs_short_pulses() {
        // A 0.5 ns dip in m_x does not reach the output when tau_rc = 2.8 ns.
        let dt = 1e-12;
        let n = 6000;
        let m: Vec<Vec3> = (0..n)
            .map(|i| {
                let t = i as f64 * dt;
                if (2.0e-9..2.5e-9).contains(&t) {
                    Vec3::new(-1.0, 0.0, 0.0)
                } else {
                    Vec3::unit_x()
                }
            })
            .collect();
        let traj = Trajectory { times: (0..n).map(|i| i as f64 * dt).collect(), m };
        let stream = read_async_stream(&traj, &ReadCircuitParams::default());
        assert!(stream.iter().all(|s| s.level == 1), "short pulse leaked through");
        // A 12 ns dip does flip the output.
        let m: Vec<Vec3> = (0..20_000)
            .map(|i| {
                let t = i as f64 * dt;
                if (2.0e-9..14.0e-9).contains(&t) {
                    Vec3::new(-1.0, 0.0, 0.0)
                } else {
                    Vec3::unit_x()
                }
            })
            .collect();
        let traj = Trajectory { times: (0..20_000).map(|i| i as f64 * dt).collect(), m };
        let stream = read_async_stream(&traj, &ReadCircuitParams::default());
        assert!(stream.iter().any(|s| s.level == 0), "long pulse missed");
    }

    #[test]
    fn backaction_only_in_continuous_mode() {
        let circuit = ReadCircuitParams::default();
        assert_eq!(apply_read_backaction(0.0, &circuit, true), 100e-9);
        assert_eq!(apply_read_backaction(3e-6, &circuit, false), 3e-6);
    }

    #[test]
    fn cmos_variation_offsets_and_clamps() {
        let mut circuit = ReadCircuitParams::default();
        assert_eq!(apply_cmos_variation(0.5, &circuit), 0.5);
        circuit.sigma_level = 2;
        let shifted = apply_cmos_variation(0.5, &circuit);
        assert!((shifted - 0.55).abs() < 1e-12);
        assert_eq!(apply_cmos_variation(0.99, &circuit), 1.0);
        circuit.sigma_level = -2;
        assert_eq!(apply_cmos_variation(0.01, &circuit), 0.0);
    }

    #[test]
    fn circuit_validation() {
        let mut c = ReadCircuitParams::default();
        c.validate().unwrap();
        c.sigma_level = 2;
        c.threshold_offset_per_sigma = 0.06; // offset 0.12 out of range
        assert!(c.validate().is_err());
    }
}
