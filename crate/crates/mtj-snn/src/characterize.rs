//! Monte Carlo characterization of a device: switching-probability
//! curves, logistic fits, barrier calibration, retention statistics and
//! telegraphic dwell-time analysis.

use rayon::prelude::*;

use crate::constants::CONSTANTS;
use crate::device::DeviceParams;
use crate::error::{Error, Result};
use crate::fit::{fit_sigmoid, SigmoidFit};
use crate::llgs::{integrate_with, thermalize_into_basin, SimConfig};
use crate::rng::compose_stream;
use crate::vec3::Vec3;

/// Default integration step for characterization runs, s.
pub const DEFAULT_DT: f64 = 1e-12;

/// Zero-current thermalization ahead of each write trial, s.
pub const TRIAL_WARMUP: f64 = 5e-9;

/// Characteristic attempt-time constant for retention estimates, s.
/// Middle of the commonly quoted 1 ps - 100 ps range.
pub const DEFAULT_TAU0: f64 = 10e-12;

/// Sampled switching-probability curve with its logistic fit.
#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct SwitchingCharacteristic {
    /// Write currents, A, ascending.
    pub currents: Vec<f64>,
    /// Switching probability per current.
    pub p_switch: Vec<f64>,
    /// Trials per point.
    pub n_trials: usize,
    /// Write pulse width, s (for continuous-mode curves: averaging window).
    pub pulse_width: f64,
    /// Fitted bias current (p = 0.5), A.
    pub i_bias: f64,
    /// Fitted logistic scale current, A.
    pub i_o: f64,
    /// Maximum absolute fit residual.
    pub fit_residual: f64,
    /// Shape-anisotropy barrier of the device, multiples of kB*T.
    pub delta_kbt: f64,
}

impl SwitchingCharacteristic {
    /// Fitted switching probability at drive current `i`, A.
    pub fn probability(&self, i: f64) -> f64 {
        crate::fit::sigmoid((i - self.i_bias) / self.i_o)
    }

    pub fn fit(&self) -> SigmoidFit {
        SigmoidFit { i_bias: self.i_bias, i_o: self.i_o, residual: self.fit_residual }
    }

    /// CSV export: `current_A,p_switch,n_trials`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("current_A,p_switch,n_trials\n");
        for (i, p) in self.currents.iter().zip(&self.p_switch) {
            out.push_str(&format!("{:.16e},{:.16e},{}\n", i, p, self.n_trials));
        }
        out
    }

    /// JSON sidecar with the fitted parameters.
    pub fn sidecar_json(&self) -> serde_json::Value {
        serde_json::json!({
            "i_bias_A": self.i_bias,
            "i_o_A": self.i_o,
            "pulse_width_s": self.pulse_width,
            "residual": self.fit_residual,
            "delta_kbt": self.delta_kbt,
        })
    }
}

/// Retention statistics of a device state.
#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct RetentionStats {
    /// Barrier height in multiples of kB*T.
    pub barrier_height: f64,
    /// Attempt-time constant tau0, s.
    pub tau0: f64,
    /// Mean state lifetime `tau0 * exp(delta)`, s.
    pub retention_time: f64,
    /// Observed dwell intervals (both states), s.
    pub dwell_samples: Vec<f64>,
}

/// Telegraphic dwell-time analysis of one long trajectory.
#[derive(Debug, Clone, PartialEq)]
pub struct DwellAnalysis {
    pub retention: RetentionStats,
    /// Dwell intervals spent in the P basin, s.
    pub p_dwells: Vec<f64>,
    /// Dwell intervals spent in the AP basin, s.
    pub ap_dwells: Vec<f64>,
    /// Fraction of the trajectory with m_x > 0.
    pub p_occupancy: f64,
    /// Number of state transitions observed.
    pub transitions: usize,
}

impl DwellAnalysis {
    pub fn mean_p_dwell(&self) -> f64 {
        mean(&self.p_dwells)
    }

    pub fn mean_ap_dwell(&self) -> f64 {
        mean(&self.ap_dwells)
    }

    pub fn mean_dwell(&self) -> f64 {
        mean(&self.retention.dwell_samples)
    }
}

fn mean(v: &[f64]) -> f64 {
    if v.is_empty() {
        f64::NAN
    } else {
        v.iter().sum::<f64>() / v.len() as f64
    }
}

/// Shape-anisotropy barrier of an in-plane device in multiples of kB*T:
/// `0.5 mu0 Ms^2 V (Nyy - Nxx) / (kB T)`.
///
/// Errors with invalid-geometry when the easy axis is not x (Nyy <= Nxx).
pub fn calibrate_barrier(params: &DeviceParams) -> Result<f64> {
    let (nxx, nyy, _) = params.demag_factors;
    if nyy <= nxx {
        return Err(Error::InvalidGeometry(format!(
            "no in-plane barrier: Nyy = {nyy} <= Nxx = {nxx}"
        )));
    }
    let c = CONSTANTS;
    let ms = params.saturation_magnetization;
    let eb = 0.5 * c.mu0 * ms * ms * params.volume() * (nyy - nxx);
    Ok(eb / (c.kb * params.temperature))
}

/// Probability that a state flips during a read window of `t_read_ns`
/// nanoseconds: `1 - exp(-t_read / exp(delta))` with the implied attempt
/// normalization of 1 ns.
pub fn retention_failure_probability(delta_kbt: f64, t_read_ns: f64) -> f64 {
    if t_read_ns <= 0.0 {
        return 0.0;
    }
    1.0 - (-t_read_ns / delta_kbt.exp()).exp()
}

/// One write trial: thermalize into the AP basin, drive for `pulse_width`,
/// report whether the final state lies in the P basin (m_x > 0).
fn write_trial(
    params: &DeviceParams,
    pulse_width: f64,
    dt: f64,
    current: f64,
    seed: u64,
    stream: u64,
) -> Result<bool> {
    let m0 = Vec3::new(-1.0, 1e-3, 1e-3).normalized();
    let m_start =
        thermalize_into_basin(m0, params, dt, TRIAL_WARMUP, seed, stream, -1.0)?;
    let config = SimConfig {
        dt,
        duration: pulse_width,
        seed: seed ^ 0x5eed_0001,
        renormalize_each_step: true,
        external_field: Vec3::zero(),
    };
    let m_end = integrate_with(m_start, &config, params, stream, |_| current, |_, _, _| {})?;
    Ok(m_end.x > 0.0)
}

/// Monte Carlo switching probability for one current point.
fn p_switch_at(
    params: &DeviceParams,
    pulse_width: f64,
    dt: f64,
    current: f64,
    n_trials: usize,
    seed: u64,
    point_index: u64,
) -> Result<f64> {
    let successes = (0..n_trials)
        .into_par_iter()
        .map(|trial| {
            write_trial(
                params,
                pulse_width,
                dt,
                current,
                seed,
                compose_stream(point_index, trial as u64),
            )
            .map(|b| b as usize)
        })
        .try_reduce(|| 0usize, |a, b| Ok(a + b))?;
    Ok(successes as f64 / n_trials as f64)
}

/// Sample the switching probability over an explicit current grid.
///
/// Each trial starts from a thermalized AP state; the trajectory counts as
/// switched when the final magnetization lies past the easy-axis midpoint
/// (`m_x > 0`). Trials parallelize over (point, trial) with per-trial RNG
/// streams, so the result is independent of worker count.
pub fn characterize_switching(
    params: &DeviceParams,
    pulse_width: f64,
    currents: &[f64],
    n_trials: usize,
    seed: u64,
) -> Result<SwitchingCharacteristic> {
    if n_trials < 100 {
        return Err(Error::invalid_argument(format!(
            "n_trials must be at least 100, got {n_trials}"
        )));
    }
    if !(pulse_width > 0.0) {
        return Err(Error::invalid_argument("pulse_width must be positive".to_string()));
    }
    let mut sorted: Vec<f64> = currents.to_vec();
    sorted.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let mut p = Vec::with_capacity(sorted.len());
    for (k, &i) in sorted.iter().enumerate() {
        let pk = p_switch_at(params, pulse_width, DEFAULT_DT, i, n_trials, seed, k as u64)?;
        if pk.is_nan() {
            return Err(Error::NumericalFailure {
                step: k,
                detail: format!("NaN switching probability at {i} A"),
            });
        }
        p.push(pk);
    }
    let fit = fit_sigmoid(&sorted, &p)?;
    Ok(SwitchingCharacteristic {
        currents: sorted,
        p_switch: p,
        n_trials,
        pulse_width,
        i_bias: fit.i_bias,
        i_o: fit.i_o,
        fit_residual: fit.residual,
        delta_kbt: calibrate_barrier(params)?,
    })
}

/// Pick a current grid that brackets the switching transition.
///
/// Bisections on small Monte Carlo batches locate the levels
/// p = 0.2, 0.5, 0.8; the grid then spans the fitted transition
/// symmetrically. Deterministic for a fixed seed.
pub fn auto_current_grid(
    params: &DeviceParams,
    pulse_width: f64,
    n_points: usize,
    seed: u64,
) -> Result<Vec<f64>> {
    const PROBE_TRIALS: usize = 160;
    let dt = DEFAULT_DT;
    let probe = |current: f64, tag: u64| -> Result<f64> {
        p_switch_at(params, pulse_width, dt, current, PROBE_TRIALS, seed ^ 0xa0a0, 1000 + tag)
    };

    // Zero-temperature instability scale sets the search unit.
    let alpha = params.gilbert_damping;
    let (nxx, nyy, nzz) = params.demag_factors;
    let ms = params.saturation_magnetization;
    let h_k = ms * (nyy - nxx);
    let m_eff = ms * (nzz - nyy);
    let i_unit = alpha * (h_k + 0.5 * m_eff) / params.torque_field_per_amp();

    // Expand upward until the transition is bracketed from above.
    let mut hi = i_unit;
    let mut tag = 0u64;
    let mut p_hi = probe(hi, tag)?;
    while p_hi < 0.9 {
        hi *= 2.0;
        tag += 1;
        p_hi = probe(hi, tag)?;
        if tag > 24 {
            return Err(Error::InsufficientRange(
                "switching transition not found while expanding upward".to_string(),
            ));
        }
    }
    // Expand downward until below p = 0.1 (may cross into negative drive
    // for telegraphic devices).
    let mut lo = 0.0;
    let mut p_lo = probe(lo, 100 + tag)?;
    let mut step = i_unit;
    while p_lo > 0.1 {
        lo -= step;
        step *= 2.0;
        tag += 1;
        p_lo = probe(lo, 100 + tag)?;
        if tag > 48 {
            return Err(Error::InsufficientRange(
                "switching transition not found while expanding downward".to_string(),
            ));
        }
    }

    let bisect = |level: f64, mut a: f64, mut b: f64, base: u64| -> Result<f64> {
        // p(a) < level < p(b)
        for it in 0..11 {
            let mid = 0.5 * (a + b);
            let pm = probe(mid, base + it)?;
            if pm < level {
                a = mid;
            } else {
                b = mid;
            }
        }
        Ok(0.5 * (a + b))
    };
    let i50 = bisect(0.5, lo, hi, 200)?;
    let i20 = bisect(0.2, lo, i50, 300)?;
    let i80 = bisect(0.8, i50, hi, 400)?;
    // log(0.8/0.2) - log(0.2/0.8) = 2 ln 4 = 2.77 logistic units.
    let io_est = ((i80 - i20) / 2.772).max(1e-12 * i_unit.abs().max(1e-9));

    let span = 2.8 * io_est;
    let n = n_points.max(7);
    let grid: Vec<f64> = (0..n)
        .map(|k| i50 - span + 2.0 * span * k as f64 / (n - 1) as f64)
        .collect();
    Ok(grid)
}

/// Characterize with an automatically chosen current grid.
pub fn characterize_auto(
    params: &DeviceParams,
    pulse_width: f64,
    n_points: usize,
    n_trials: usize,
    seed: u64,
) -> Result<SwitchingCharacteristic> {
    let grid = auto_current_grid(params, pulse_width, n_points, seed)?;
    characterize_switching(params, pulse_width, &grid, n_trials, seed)
}

/// Segment a long zero- or constant-bias trajectory into P/AP dwell
/// intervals and derive retention statistics.
///
/// State changes are detected with hysteresis bands at `m_x = ±0.5`, so
/// thermal grazing of the barrier does not count as a transition.
pub fn dwell_time_analysis(
    params: &DeviceParams,
    bias_current: f64,
    duration: f64,
    seed: u64,
) -> Result<DwellAnalysis> {
    dwell_time_analysis_tau0(params, bias_current, duration, seed, DEFAULT_TAU0)
}

/// [`dwell_time_analysis`] with an explicit attempt-time constant.
pub fn dwell_time_analysis_tau0(
    params: &DeviceParams,
    bias_current: f64,
    duration: f64,
    seed: u64,
    tau0: f64,
) -> Result<DwellAnalysis> {
    let delta = calibrate_barrier(params)?;
    if delta >= 5.0 {
        return Err(Error::invalid_argument(format!(
            "dwell analysis needs a superparamagnetic device (delta < 5), got {delta:.2}"
        )));
    }
    let expected_dwell = tau0 * delta.exp();
    if duration < 100.0 * expected_dwell {
        return Err(Error::invalid_argument(format!(
            "duration {duration:.3e} s too short; need >= 100 x expected dwell {expected_dwell:.3e} s"
        )));
    }

    let dt = DEFAULT_DT;
    let config = SimConfig {
        dt,
        duration,
        seed,
        renormalize_each_step: true,
        external_field: Vec3::zero(),
    };

    let mut state = 0i8; // +1 in P band, -1 in AP band, 0 undecided
    let mut entered_at = 0.0f64;
    let mut p_dwells = Vec::new();
    let mut ap_dwells = Vec::new();
    let mut p_time = 0.0f64;

    let m0 = Vec3::new(1.0, 1e-3, 1e-3).normalized();
    integrate_with(m0, &config, params, 0, |_| bias_current, |_, t, m| {
        if m.x > 0.0 {
            p_time += dt;
        }
        let new_state = if m.x > 0.5 {
            1
        } else if m.x < -0.5 {
            -1
        } else {
            state
        };
        if new_state != state {
            if state != 0 {
                let dwell = t - entered_at;
                if state == 1 {
                    p_dwells.push(dwell);
                } else {
                    ap_dwells.push(dwell);
                }
            }
            state = new_state;
            entered_at = t;
        }
    })?;

    let transitions = p_dwells.len() + ap_dwells.len();
    if transitions < 20 {
        return Err(Error::InsufficientStatistics { observed: transitions, needed: 20 });
    }
    let mut dwell_samples = Vec::with_capacity(transitions);
    dwell_samples.extend_from_slice(&p_dwells);
    dwell_samples.extend_from_slice(&ap_dwells);

    Ok(DwellAnalysis {
        retention: RetentionStats {
            barrier_height: delta,
            tau0,
            retention_time: tau0 * delta.exp(),
            dwell_samples,
        },
        p_dwells,
        ap_dwells,
        p_occupancy: p_time / duration,
        transitions,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn barrier_calibration_reference_devices() {
        // Shape-anisotropy barriers of the reference geometries at 300 K.
        let cases = [
            (DeviceParams::reference_1kbt(), 1.0, 0.3),
            (DeviceParams::reference_2kbt(), 2.0, 0.3),
            (DeviceParams::reference_20kbt(), 20.0, 0.3),
        ];
        for (d, nominal, slack) in cases {
            let delta = calibrate_barrier(&d).unwrap();
            assert!(
                (delta - nominal).abs() / nominal < slack,
                "delta {delta} vs nominal {nominal}"
            );
        }
        // The whole ladder is strictly ordered.
        let ladder: Vec<f64> = [
            DeviceParams::reference_1kbt(),
            DeviceParams::reference_2kbt(),
            DeviceParams::reference_10kbt(),
            DeviceParams::reference_20kbt(),
        ]
        .iter()
        .map(|d| calibrate_barrier(d).unwrap())
        .collect();
        assert!(ladder.windows(2).all(|w| w[0] < w[1]), "{ladder:?}");
    }

    #[test]
    fn barrier_scales_linearly_with_volume() {
        let d = DeviceParams::reference_10kbt();
        let delta = calibrate_barrier(&d).unwrap();
        let mut doubled = d.clone();
        doubled.free_layer_thickness *= 2.0;
        // Keep the same factors to isolate the volume scaling.
        let doubled = doubled.with_demag_factors(d.demag_factors).unwrap();
        let delta2 = calibrate_barrier(&doubled).unwrap();
        assert!((delta2 / delta - 2.0).abs() < 1e-9);
    }

    #[test]
    fn barrier_rejects_swapped_axes() {
        // Width longer than length flips the in-plane easy axis.
        let d = DeviceParams::new(10e-9, 25e-9, 0.8e-9, 7.5e5).unwrap();
        assert!(matches!(calibrate_barrier(&d), Err(Error::InvalidGeometry(_))));
    }

    #[test]
    fn retention_failure_closed_form() {
        assert_eq!(retention_failure_probability(4.6, 0.0), 0.0);
        // delta = 4.6, 1 ns read: 1 - exp(-1/e^4.6) = 0.0100
        let p = retention_failure_probability(4.6, 1.0);
        assert!((p - 0.01).abs() < 0.001, "{p}");
        assert!(retention_failure_probability(1e6, 1.0) < 1e-12);
        // Monotone increasing as the barrier shrinks.
        let mut last = 0.0;
        for delta in [20.0, 10.0, 4.6, 2.0, 1.0] {
            let p = retention_failure_probability(delta, 1.0);
            assert!(p > last);
            last = p;
        }
    }

    #[test]
    fn dwell_analysis_rejects_stable_devices() {
        let d = DeviceParams::reference_20kbt();
        let err = dwell_time_analysis(&d, 0.0, 1e-6, 1);
        assert!(matches!(err, Err(Error::InvalidArgument(_))));
    }

    #[test]
    fn dwell_analysis_zero_bias_symmetry() {
        let d = DeviceParams::reference_1kbt();
        let a = dwell_time_analysis(&d, 0.0, 2e-6, 11).unwrap();
        assert!(a.transitions >= 20);
        assert!((a.p_occupancy - 0.5).abs() < 0.08, "occupancy {}", a.p_occupancy);
        let (mp, map_) = (a.mean_p_dwell(), a.mean_ap_dwell());
        assert!((mp - map_).abs() / map_.max(mp) < 0.35, "P {mp} vs AP {map_}");
    }

    #[test]
    fn characterize_rejects_small_trial_counts() {
        let d = DeviceParams::reference_1kbt();
        let err = characterize_switching(&d, 0.5e-9, &[0.0, 1e-6], 10, 1);
        assert!(matches!(err, Err(Error::InvalidArgument(_))));
    }
}
