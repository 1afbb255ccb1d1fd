//! Run configuration: one TOML document fully determines a run.
//!
//! Unit conventions at the config boundary follow the presentation units
//! of the domain: times in nanoseconds, currents in microamperes,
//! conductances in microsiemens, geometry in nanometers. Everything is
//! converted to SI on load. Unknown keys are rejected.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::device::DeviceParams;
use crate::error::{Error, Result};
use crate::readout::ReadCircuitParams;
use crate::snn::{Fidelity, Mode};

/// Environment variable providing the default output directory.
pub const OUT_DIR_ENV: &str = "MTJ_SNN_OUT";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(default)]
    pub run: RunSection,
    #[serde(default, rename = "device")]
    pub devices: Vec<DeviceEntry>,
    #[serde(default)]
    pub characterize: CharacterizeSection,
    #[serde(default)]
    pub readout: ReadoutSection,
    #[serde(default)]
    pub retention: RetentionSection,
    #[serde(default)]
    pub dwell: DwellSection,
    #[serde(default)]
    pub network: Option<NetworkSection>,
    #[serde(default)]
    pub dataset: Option<DatasetSection>,
    #[serde(default)]
    pub simulate: SimulateSection,
    #[serde(default, rename = "sweep")]
    pub sweeps: Vec<SweepSection>,
    #[serde(default)]
    pub energy: Option<EnergySection>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunSection {
    #[serde(default)]
    pub out_dir: Option<String>,
    #[serde(default = "default_seed")]
    pub seed: u64,
    /// Worker threads; 0 picks the machine parallelism.
    #[serde(default)]
    pub workers: usize,
}

fn default_seed() -> u64 {
    1
}

impl Default for RunSection {
    fn default() -> Self {
        Self { out_dir: None, seed: default_seed(), workers: 0 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DeviceEntry {
    pub name: String,
    #[serde(default)]
    pub preset: Option<String>,
    #[serde(default)]
    pub length_nm: Option<f64>,
    #[serde(default)]
    pub width_nm: Option<f64>,
    #[serde(default)]
    pub thickness_nm: Option<f64>,
    #[serde(default)]
    pub ms_ka_per_m: Option<f64>,
    #[serde(default)]
    pub temperature_k: Option<f64>,
    #[serde(default)]
    pub alpha: Option<f64>,
    #[serde(default)]
    pub theta_she: Option<f64>,
    #[serde(default)]
    pub lambda_sf_nm: Option<f64>,
    #[serde(default)]
    pub hm_thickness_nm: Option<f64>,
    #[serde(default)]
    pub hm_resistivity_uohm_cm: Option<f64>,
}

impl DeviceEntry {
    pub fn build(&self) -> Result<DeviceParams> {
        let mut params = match &self.preset {
            Some(p) => DeviceParams::preset(p)?,
            None => {
                let (Some(l), Some(w), Some(t), Some(ms)) = (
                    self.length_nm,
                    self.width_nm,
                    self.thickness_nm,
                    self.ms_ka_per_m,
                ) else {
                    return Err(Error::config(format!(
                        "device '{}': needs a preset or explicit length_nm/width_nm/thickness_nm/ms_ka_per_m",
                        self.name
                    )));
                };
                DeviceParams::new(l * 1e-9, w * 1e-9, t * 1e-9, ms * 1e3)?
            }
        };
        if let Some(t) = self.temperature_k {
            params.temperature = t;
        }
        if let Some(a) = self.alpha {
            params.gilbert_damping = a;
        }
        if let Some(th) = self.theta_she {
            params.spin_hall_angle = th;
        }
        if let Some(l) = self.lambda_sf_nm {
            params.spin_flip_length = l * 1e-9;
        }
        if let Some(t) = self.hm_thickness_nm {
            params.hm_thickness = t * 1e-9;
        }
        if let Some(r) = self.hm_resistivity_uohm_cm {
            params.hm_resistivity = r * 1e-8; // uOhm cm -> Ohm m
        }
        params.validate()?;
        Ok(params)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CharacterizeSection {
    #[serde(default = "default_pulse_ns")]
    pub pulse_ns: f64,
    #[serde(default = "default_n_trials")]
    pub n_trials: usize,
    #[serde(default = "default_n_points")]
    pub n_points: usize,
    /// Explicit current grid; empty means auto-ranging.
    #[serde(default)]
    pub currents_ua: Vec<f64>,
    /// Averaging window for continuous characterization, ns.
    #[serde(default = "default_averaging_ns")]
    pub averaging_ns: f64,
}

fn default_pulse_ns() -> f64 {
    0.5
}
fn default_n_trials() -> usize {
    1000
}
fn default_n_points() -> usize {
    15
}
fn default_averaging_ns() -> f64 {
    4000.0
}

impl Default for CharacterizeSection {
    fn default() -> Self {
        Self {
            pulse_ns: default_pulse_ns(),
            n_trials: default_n_trials(),
            n_points: default_n_points(),
            currents_ua: Vec::new(),
            averaging_ns: default_averaging_ns(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ReadoutSection {
    #[serde(default = "default_read_current_na")]
    pub read_current_na: f64,
    #[serde(default = "default_read_time_ns")]
    pub read_time_ns: f64,
    #[serde(default = "default_tau_rc_ns")]
    pub tau_rc_ns: f64,
    #[serde(default = "default_offset_per_sigma")]
    pub threshold_offset_per_sigma: f64,
    #[serde(default)]
    pub sigma_level: i8,
}

fn default_read_current_na() -> f64 {
    100.0
}
fn default_read_time_ns() -> f64 {
    1.0
}
fn default_tau_rc_ns() -> f64 {
    crate::readout::DEFAULT_TAU_RC * 1e9
}
fn default_offset_per_sigma() -> f64 {
    0.025
}

impl Default for ReadoutSection {
    fn default() -> Self {
        Self {
            read_current_na: default_read_current_na(),
            read_time_ns: default_read_time_ns(),
            tau_rc_ns: default_tau_rc_ns(),
            threshold_offset_per_sigma: default_offset_per_sigma(),
            sigma_level: 0,
        }
    }
}

impl ReadoutSection {
    pub fn build(&self) -> Result<ReadCircuitParams> {
        let params = ReadCircuitParams {
            read_current: self.read_current_na * 1e-9,
            read_time_sync: self.read_time_ns * 1e-9,
            tau_rc: self.tau_rc_ns * 1e-9,
            threshold_offset_per_sigma: self.threshold_offset_per_sigma,
            sigma_level: self.sigma_level,
            ..Default::default()
        };
        params.validate()?;
        Ok(params)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RetentionSection {
    #[serde(default = "default_delta_grid")]
    pub delta_grid: Vec<f64>,
    #[serde(default = "default_read_time_ns")]
    pub t_read_ns: f64,
}

fn default_delta_grid() -> Vec<f64> {
    vec![1.0, 2.0, 4.6, 10.0, 20.0]
}

impl Default for RetentionSection {
    fn default() -> Self {
        Self { delta_grid: default_delta_grid(), t_read_ns: default_read_time_ns() }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DwellSection {
    #[serde(default = "default_dwell_device")]
    pub device: String,
    #[serde(default)]
    pub bias_ua: f64,
    #[serde(default = "default_dwell_duration_ns")]
    pub duration_ns: f64,
    /// Attempt-time constant, ps.
    #[serde(default = "default_tau0_ps")]
    pub tau0_ps: f64,
}

fn default_dwell_device() -> String {
    "1kbt".to_string()
}
fn default_dwell_duration_ns() -> f64 {
    10_000.0
}
fn default_tau0_ps() -> f64 {
    10.0
}

impl Default for DwellSection {
    fn default() -> Self {
        Self {
            device: default_dwell_device(),
            bias_ua: 0.0,
            duration_ns: default_dwell_duration_ns(),
            tau0_ps: default_tau0_ps(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NetworkSection {
    pub weights: String,
    pub device: String,
    #[serde(default = "default_mode")]
    pub mode: Mode,
    #[serde(default = "default_fidelity")]
    pub fidelity: Fidelity,
    #[serde(default = "default_g_o_us")]
    pub g_o_us: f64,
    /// Timestep override, ns; 0 = automatic (clock period in sync mode,
    /// measured mean pulse width in async mode).
    #[serde(default)]
    pub step_ns: f64,
    #[serde(default)]
    pub synapse_sigma_percent: f64,
}

fn default_mode() -> Mode {
    Mode::Sync
}
fn default_fidelity() -> Fidelity {
    Fidelity::Behavioral
}
fn default_g_o_us() -> f64 {
    5.0
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DatasetSection {
    /// "synthetic", "idx" or "raw".
    pub kind: String,
    #[serde(default = "default_synth_images")]
    pub n_images: usize,
    #[serde(default)]
    pub images: Option<String>,
    #[serde(default)]
    pub labels: Option<String>,
    #[serde(default)]
    pub path: Option<String>,
    #[serde(default = "default_dataset_seed")]
    pub seed: u64,
}

fn default_synth_images() -> usize {
    500
}
fn default_dataset_seed() -> u64 {
    2024
}

impl DatasetSection {
    pub fn load(&self, base: &Path) -> Result<crate::dataset::Dataset> {
        match self.kind.as_str() {
            "synthetic" => Ok(crate::dataset::synthetic_digits(self.n_images, self.seed)),
            "idx" => {
                let (Some(images), Some(labels)) = (&self.images, &self.labels) else {
                    return Err(Error::config(
                        "dataset kind 'idx' needs images and labels paths",
                    ));
                };
                crate::dataset::Dataset::from_idx_files(&base.join(images), &base.join(labels))
            }
            "raw" => {
                let Some(path) = &self.path else {
                    return Err(Error::config("dataset kind 'raw' needs a path"));
                };
                crate::dataset::Dataset::from_raw_file(&base.join(path))
            }
            other => Err(Error::config(format!(
                "unknown dataset kind '{other}' (expected synthetic, idx or raw)"
            ))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimulateSection {
    #[serde(default = "default_sim_time_ns")]
    pub time_ns: f64,
    #[serde(default = "default_sim_images")]
    pub n_images: usize,
    #[serde(default = "default_target")]
    pub target_accuracy: f64,
}

fn default_sim_time_ns() -> f64 {
    400.0
}
fn default_sim_images() -> usize {
    500
}
fn default_target() -> f64 {
    0.96
}

impl Default for SimulateSection {
    fn default() -> Self {
        Self {
            time_ns: default_sim_time_ns(),
            n_images: default_sim_images(),
            target_accuracy: default_target(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSection {
    pub kind: String,
    pub values: Vec<f64>,
    #[serde(default = "default_n_mc")]
    pub n_mc: usize,
    #[serde(default = "default_sweep_images")]
    pub n_images: usize,
    #[serde(default = "default_sweep_time_ns")]
    pub time_ns: f64,
}

fn default_n_mc() -> usize {
    50
}
fn default_sweep_images() -> usize {
    100
}
fn default_sweep_time_ns() -> f64 {
    200.0
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EnergySection {
    #[serde(default = "default_target")]
    pub target_accuracy: f64,
    #[serde(default = "default_sweep_images")]
    pub n_images: usize,
    #[serde(default = "default_energy_time_ns")]
    pub time_ns: f64,
    pub entries: Vec<EnergyEntry>,
}

fn default_energy_time_ns() -> f64 {
    800.0
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EnergyEntry {
    pub device: String,
    pub mode: Mode,
}

impl RunConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::config(e.to_string()))
    }

    pub fn from_file(path: &Path) -> Result<(Self, u64)> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::config(format!("cannot read {}: {e}", path.display())))?;
        let config = Self::from_toml(&text)?;
        Ok((config, crate::export::config_hash(text.as_bytes())))
    }

    /// Resolve the output directory: CLI flag > config > environment > ".".
    pub fn out_dir(&self, cli_override: Option<&str>) -> PathBuf {
        if let Some(dir) = cli_override {
            return PathBuf::from(dir);
        }
        if let Some(dir) = &self.run.out_dir {
            return PathBuf::from(dir);
        }
        if let Ok(dir) = std::env::var(OUT_DIR_ENV) {
            if !dir.is_empty() {
                return PathBuf::from(dir);
            }
        }
        PathBuf::from(".")
    }

    pub fn device(&self, name: &str) -> Result<DeviceParams> {
        for entry in &self.devices {
            if entry.name == name {
                return entry.build();
            }
        }
        // Fall back to presets so minimal configs work out of the box.
        DeviceParams::preset(name)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn minimal_config_parses() {
        let cfg = RunConfig::from_toml("").unwrap();
        assert_eq!(cfg.run.seed, 1);
        assert!(cfg.devices.is_empty());
    }

    #[test]
    fn unknown_keys_rejected() {
        let err = RunConfig::from_toml("[run]\nseed = 1\nbogus = 2\n");
        assert!(matches!(err, Err(Error::Config(_))));
        let err = RunConfig::from_toml("[nonsense]\nx = 1\n");
        assert!(matches!(err, Err(Error::Config(_))));
    }

    #[test]
    fn device_entries_build() {
        let cfg = RunConfig::from_toml(
            r#"
            [[device]]
            name = "a"
            preset = "10kbt"
            temperature_k = 350

            [[device]]
            name = "b"
            length_nm = 60
            width_nm = 24
            thickness_nm = 1.0
            ms_ka_per_m = 900
            "#,
        )
        .unwrap();
        let a = cfg.device("a").unwrap();
        assert_eq!(a.temperature, 350.0);
        let b = cfg.device("b").unwrap();
        assert!((b.free_layer_length - 60e-9).abs() < 1e-18);
        // Unknown names still resolve as presets.
        assert!(cfg.device("1kbt").is_ok());
        assert!(cfg.device("zzz").is_err());
    }

    #[test]
    fn incomplete_custom_device_errors() {
        let cfg = RunConfig::from_toml(
            r#"
            [[device]]
            name = "bad"
            length_nm = 60
            "#,
        )
        .unwrap();
        assert!(matches!(cfg.device("bad"), Err(Error::Config(_))));
    }

    #[test]
    fn units_convert_at_boundary() {
        let cfg = RunConfig::from_toml(
            r#"
            [readout]
            read_current_na = 200
            tau_rc_ns = 3.5
            "#,
        )
        .unwrap();
        let circuit = cfg.readout.build().unwrap();
        assert!((circuit.read_current - 200e-9).abs() < 1e-18);
        assert!((circuit.tau_rc - 3.5e-9).abs() < 1e-18);
    }

    #[test]
    fn out_dir_priority() {
        let cfg = RunConfig::from_toml("[run]\nout_dir = \"cfg_dir\"\n").unwrap();
        assert_eq!(cfg.out_dir(Some("cli_dir")), PathBuf::from("cli_dir"));
        assert_eq!(cfg.out_dir(None), PathBuf::from("cfg_dir"));
    }
}
