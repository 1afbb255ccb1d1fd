//! Command implementations behind the `mtj-snn` binary.
//!
//! Every command is a plain function over a parsed [`RunConfig`]; the
//! binary only maps flags onto these calls and converts errors into exit
//! codes (0 success, 2 usage/config, 3 numerical failure).

use std::path::{Path, PathBuf};

use crate::characterize::{
    characterize_auto, characterize_switching, dwell_time_analysis_tau0, retention_failure_probability,
    SwitchingCharacteristic,
};
use crate::config::{RunConfig, SweepSection};
use crate::device::DeviceParams;
use crate::error::{Error, Result};
use crate::export::{write_csv_with_hash, write_json_with_hash};
use crate::fit::fit_sigmoid;
use crate::network::WeightFile;
use crate::readout::{characterize_async, zero_input_pulse_width, ReadCircuitParams};
use crate::rng::compose_stream;
use crate::snn::{evaluate, program_network, Fidelity, Mode, NetworkSpec, NeuronBinding};
use crate::sweeps::{sweep_variations, SweepKind};

/// Flag-level overrides applied on top of the config file.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub seed: Option<u64>,
    pub out: Option<String>,
    pub workers: Option<usize>,
    pub mode: Option<Mode>,
    pub fidelity: Option<Fidelity>,
}

pub struct Context {
    pub config: RunConfig,
    pub hash: u64,
    pub out_dir: PathBuf,
    pub seed: u64,
    /// Directory of the config file; relative paths resolve against it.
    pub base_dir: PathBuf,
    pub overrides: Overrides,
}

impl Context {
    pub fn load(config_path: &Path, overrides: Overrides) -> Result<Self> {
        let (config, hash) = RunConfig::from_file(config_path)?;
        let out_dir = config.out_dir(overrides.out.as_deref());
        let seed = overrides.seed.unwrap_or(config.run.seed);
        let workers = overrides.workers.unwrap_or(config.run.workers);
        if workers > 0 {
            // One global pool; ignore failure if a pool already exists
            // (results do not depend on worker count).
            let _ = rayon::ThreadPoolBuilder::new().num_threads(workers).build_global();
        }
        let base_dir = config_path.parent().unwrap_or(Path::new(".")).to_path_buf();
        Ok(Self { config, hash, out_dir, seed, base_dir, overrides })
    }

    fn ensure_out(&self, sub: &str) -> Result<PathBuf> {
        let dir = self.out_dir.join(sub);
        std::fs::create_dir_all(&dir)?;
        Ok(dir)
    }

    fn mode_for(&self, section_mode: Mode) -> Mode {
        self.overrides.mode.unwrap_or(section_mode)
    }

    fn fidelity_for(&self, section: Fidelity) -> Fidelity {
        self.overrides.fidelity.unwrap_or(section)
    }
}

fn mode_name(mode: Mode) -> &'static str {
    match mode {
        Mode::Sync => "sync",
        Mode::Async => "async",
    }
}

/// Characterize every configured device with the clocked write protocol.
pub fn cmd_characterize(ctx: &Context) -> Result<()> {
    if ctx.config.devices.is_empty() {
        eprintln!("warning: no devices configured; nothing to characterize");
        return Ok(());
    }
    let dir = ctx.ensure_out("characterization")?;
    let section = &ctx.config.characterize;
    for entry in &ctx.config.devices {
        let device = entry.build()?;
        let pulse = section.pulse_ns * 1e-9;
        let characteristic = if section.currents_ua.is_empty() {
            characterize_auto(&device, pulse, section.n_points, section.n_trials, ctx.seed)?
        } else {
            let currents: Vec<f64> = section.currents_ua.iter().map(|u| u * 1e-6).collect();
            characterize_switching(&device, pulse, &currents, section.n_trials, ctx.seed)?
        };
        let csv_path = dir.join(format!("{}.csv", entry.name));
        write_csv_with_hash(&csv_path, ctx.hash, &characteristic.to_csv())?;
        write_json_with_hash(
            &dir.join(format!("{}.json", entry.name)),
            ctx.hash,
            characteristic.sidecar_json(),
        )?;
        // Full record for downstream commands.
        std::fs::write(
            dir.join(format!("{}_sync_characteristic.json", entry.name)),
            serde_json::to_string_pretty(&characteristic)?,
        )?;
        println!(
            "{}: i_bias = {:.3} uA, i_o = {:.3} uA, residual = {:.4} -> {}",
            entry.name,
            characteristic.i_bias * 1e6,
            characteristic.i_o * 1e6,
            characteristic.fit_residual,
            csv_path.display()
        );
    }
    Ok(())
}

/// Fit the logistic to an existing characterization CSV.
pub fn cmd_fit(ctx: &Context, input: &Path) -> Result<()> {
    let text = std::fs::read_to_string(input)
        .map_err(|e| Error::config(format!("cannot read {}: {e}", input.display())))?;
    let mut currents = Vec::new();
    let mut p = Vec::new();
    for line in text.lines() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') || line.starts_with("current_A") {
            continue;
        }
        let mut fields = line.split(',');
        let (Some(c), Some(pv)) = (fields.next(), fields.next()) else {
            return Err(Error::config(format!("malformed CSV line: {line}")));
        };
        currents.push(
            c.trim().parse::<f64>().map_err(|e| Error::config(format!("bad current: {e}")))?,
        );
        p.push(pv.trim().parse::<f64>().map_err(|e| Error::config(format!("bad p: {e}")))?);
    }
    let fit = fit_sigmoid(&currents, &p)?;
    let out = input.with_extension("fit.json");
    write_json_with_hash(
        &out,
        ctx.hash,
        serde_json::json!({
            "i_bias_A": fit.i_bias,
            "i_o_A": fit.i_o,
            "residual": fit.residual,
        }),
    )?;
    println!(
        "fit: i_bias = {:.4} uA, i_o = {:.4} uA, residual = {:.4} -> {}",
        fit.i_bias * 1e6,
        fit.i_o * 1e6,
        fit.residual,
        out.display()
    );
    Ok(())
}

/// Closed-form retention failure probabilities over the configured grid.
pub fn cmd_retention(ctx: &Context) -> Result<()> {
    let dir = ctx.ensure_out("retention")?;
    let section = &ctx.config.retention;
    let mut csv = String::from("delta_kbt,t_read_ns,failure_probability\n");
    for &delta in &section.delta_grid {
        let p = retention_failure_probability(delta, section.t_read_ns);
        csv.push_str(&format!("{:.4},{:.4},{:.16e}\n", delta, section.t_read_ns, p));
    }
    let path = dir.join("retention.csv");
    write_csv_with_hash(&path, ctx.hash, &csv)?;
    println!("retention table -> {}", path.display());
    Ok(())
}

/// Telegraphic dwell-time analysis of the configured device.
pub fn cmd_dwell(ctx: &Context) -> Result<()> {
    let dir = ctx.ensure_out("dwell")?;
    let section = &ctx.config.dwell;
    let device = ctx.config.device(&section.device)?;
    let analysis = dwell_time_analysis_tau0(
        &device,
        section.bias_ua * 1e-6,
        section.duration_ns * 1e-9,
        ctx.seed,
        section.tau0_ps * 1e-12,
    )?;
    let mut csv = String::from("state,dwell_s\n");
    for d in &analysis.p_dwells {
        csv.push_str(&format!("P,{:.16e}\n", d));
    }
    for d in &analysis.ap_dwells {
        csv.push_str(&format!("AP,{:.16e}\n", d));
    }
    write_csv_with_hash(&dir.join("dwell_samples.csv"), ctx.hash, &csv)?;
    write_json_with_hash(
        &dir.join("dwell_summary.json"),
        ctx.hash,
        serde_json::json!({
            "device": section.device,
            "bias_ua": section.bias_ua,
            "barrier_kbt": analysis.retention.barrier_height,
            "tau0_s": analysis.retention.tau0,
            "retention_time_s": analysis.retention.retention_time,
            "transitions": analysis.transitions,
            "p_occupancy": analysis.p_occupancy,
            "mean_p_dwell_s": analysis.mean_p_dwell(),
            "mean_ap_dwell_s": analysis.mean_ap_dwell(),
        }),
    )?;
    println!(
        "dwell: {} transitions, P occupancy {:.3}, mean dwell {:.2} ns",
        analysis.transitions,
        analysis.p_occupancy,
        analysis.mean_dwell() * 1e9
    );
    Ok(())
}

/// Load or produce the switching characteristic for a (device, mode) pair.
pub fn resolve_characteristic(
    ctx: &Context,
    name: &str,
    device: &DeviceParams,
    mode: Mode,
    circuit: &ReadCircuitParams,
) -> Result<SwitchingCharacteristic> {
    let dir = ctx.ensure_out("characterization")?;
    let cache = dir.join(format!("{}_{}_characteristic.json", name, mode_name(mode)));
    if let Ok(text) = std::fs::read_to_string(&cache) {
        if let Ok(c) = serde_json::from_str::<SwitchingCharacteristic>(&text) {
            return Ok(c);
        }
    }
    let section = &ctx.config.characterize;
    let characteristic = match mode {
        Mode::Sync => characterize_auto(
            device,
            section.pulse_ns * 1e-9,
            section.n_points,
            section.n_trials,
            ctx.seed,
        )?,
        Mode::Async => {
            let grid = async_current_grid(device, circuit, section.averaging_ns * 1e-9, ctx.seed)?;
            characterize_async(device, circuit, &grid, section.averaging_ns * 1e-9, ctx.seed)?
        }
    };
    std::fs::write(&cache, serde_json::to_string_pretty(&characteristic)?)?;
    Ok(characteristic)
}

/// Bracket the continuous-readout transfer curve: expand the current until
/// the mean output saturates, then span it symmetrically.
pub fn async_current_grid(
    device: &DeviceParams,
    circuit: &ReadCircuitParams,
    averaging: f64,
    seed: u64,
) -> Result<Vec<f64>> {
    let alpha = device.gilbert_damping;
    let (nxx, nyy, nzz) = device.demag_factors;
    let ms = device.saturation_magnetization;
    let i_unit =
        alpha * (ms * (nyy - nxx) + 0.5 * ms * (nzz - nyy)) / device.torque_field_per_amp();
    let probe_window = (averaging / 4.0).max(0.5e-6);
    let mut hi = i_unit / 4.0;
    for k in 0..12 {
        let mean =
            crate::readout::mean_output_at(device, circuit, hi, probe_window, seed, 90_000 + k)?;
        if mean > 0.88 {
            break;
        }
        hi *= 2.0;
    }
    let n = 13;
    Ok((0..n).map(|k| -hi + 2.0 * hi * k as f64 / (n - 1) as f64).collect())
}

/// Assemble the network spec from config sections.
pub fn build_network_spec(ctx: &Context) -> Result<(NetworkSpec, crate::dataset::Dataset)> {
    let Some(net) = &ctx.config.network else {
        return Err(Error::config("missing [network] section"));
    };
    let Some(ds_section) = &ctx.config.dataset else {
        return Err(Error::config("missing [dataset] section"));
    };
    let weights_path = ctx.base_dir.join(&net.weights);
    let weight_file = WeightFile::from_file(&weights_path).map_err(|e| {
        Error::config(format!("cannot load weights {}: {e}", weights_path.display()))
    })?;
    let topology = weight_file.build_topology()?;
    let device = ctx.config.device(&net.device)?;
    let circuit = ctx.config.readout.build()?;
    let mode = ctx.mode_for(net.mode);
    let fidelity = ctx.fidelity_for(net.fidelity);
    let characteristic = resolve_characteristic(ctx, &net.device, &device, mode, &circuit)?;
    let step_duration = if net.step_ns > 0.0 {
        net.step_ns * 1e-9
    } else {
        match mode {
            Mode::Sync => crate::snn::ScheduleSync::default().total(),
            Mode::Async => {
                zero_input_pulse_width(&device, &circuit, 2e-6, compose_stream(ctx.seed, 77))?
            }
        }
    };
    let mut spec = NetworkSpec::new(
        topology,
        NeuronBinding { device, characteristic, circuit },
        mode,
        fidelity,
        step_duration,
    );
    spec.g_o = net.g_o_us * 1e-6;
    spec.synapse_sigma = net.synapse_sigma_percent / 100.0;
    let dataset = ds_section.load(&ctx.base_dir)?;
    Ok((spec, dataset))
}

/// Run inference over the dataset and write the accuracy curve and energy
/// report.
pub fn cmd_simulate(ctx: &Context) -> Result<()> {
    let (spec, dataset) = build_network_spec(ctx)?;
    let sim = &ctx.config.simulate;
    if sim.time_ns <= 0.0 {
        return Err(Error::invalid_argument("simulate.time_ns must be > 0"));
    }
    let dir = ctx.ensure_out("simulate")?;
    let programmed = program_network(&spec, compose_stream(ctx.seed, 1))?;
    let curve = evaluate(
        &programmed,
        &dataset,
        sim.time_ns * 1e-9,
        compose_stream(ctx.seed, 2),
        sim.n_images,
    )?;
    let label = format!("{}_{}", mode_name(spec.mode), spec.neuron.characteristic.delta_kbt.round());
    let csv_path = dir.join(format!("accuracy_{label}.csv"));
    write_csv_with_hash(&csv_path, ctx.hash, &curve.to_csv())?;
    println!(
        "accuracy: final {:.4} over {} images -> {}",
        curve.final_accuracy(),
        curve.n_images,
        csv_path.display()
    );
    match crate::energy::report(&spec, &curve, sim.target_accuracy) {
        Ok(rep) => {
            let json_path = dir.join(format!("energy_{label}.json"));
            write_json_with_hash(&json_path, ctx.hash, serde_json::to_value(&rep)?)?;
            println!(
                "energy @ {:.0}%: total {:.3e} J in {:.1} ns -> {}",
                rep.target_accuracy * 100.0,
                rep.total_j,
                rep.time_to_target * 1e9,
                json_path.display()
            );
        }
        Err(Error::TargetUnreached { target, best }) => {
            let json_path = dir.join(format!("energy_{label}.json"));
            write_json_with_hash(
                &json_path,
                ctx.hash,
                serde_json::json!({ "target_unreached": target, "best_accuracy": best }),
            )?;
            eprintln!("warning: accuracy target {target} not reached (best {best:.4})");
        }
        Err(e) => return Err(e),
    }
    Ok(())
}

/// Run every configured variation sweep.
pub fn cmd_sweep(ctx: &Context) -> Result<()> {
    if ctx.config.sweeps.is_empty() {
        return Err(Error::config("no [[sweep]] sections configured"));
    }
    let (spec, dataset) = build_network_spec(ctx)?;
    let dir = ctx.ensure_out("sweeps")?;
    for (i, section) in ctx.config.sweeps.iter().enumerate() {
        let SweepSection { kind, values, n_mc, n_images, time_ns } = section;
        let kind = SweepKind::parse(kind)?;
        let result = sweep_variations(
            &spec,
            &dataset,
            kind,
            values,
            *n_mc,
            time_ns * 1e-9,
            *n_images,
            compose_stream(ctx.seed, 900 + i as u64),
        )?;
        let path = dir.join(format!("{:?}_{}.csv", kind, mode_name(spec.mode)).to_lowercase());
        write_csv_with_hash(&path, ctx.hash, &result.to_csv())?;
        println!("sweep {:?} -> {}", kind, path.display());
    }
    Ok(())
}

/// Energy comparison across (device, mode) entries at a fixed accuracy
/// target.
pub fn cmd_energy_report(ctx: &Context) -> Result<()> {
    let Some(section) = &ctx.config.energy else {
        return Err(Error::config("missing [energy] section"));
    };
    let Some(net) = &ctx.config.network else {
        return Err(Error::config("missing [network] section"));
    };
    let Some(ds_section) = &ctx.config.dataset else {
        return Err(Error::config("missing [dataset] section"));
    };
    let dataset = ds_section.load(&ctx.base_dir)?;
    let weight_file = WeightFile::from_file(&ctx.base_dir.join(&net.weights))?;
    let topology = weight_file.build_topology()?;
    let circuit = ctx.config.readout.build()?;
    let dir = ctx.ensure_out("energy")?;
    let mut table = String::from(crate::energy::EnergyReport::CSV_HEADER);
    for entry in &section.entries {
        let device = ctx.config.device(&entry.device)?;
        let characteristic =
            resolve_characteristic(ctx, &entry.device, &device, entry.mode, &circuit)?;
        let step_duration = match entry.mode {
            Mode::Sync => crate::snn::ScheduleSync::default().total(),
            Mode::Async => {
                zero_input_pulse_width(&device, &circuit, 2e-6, compose_stream(ctx.seed, 78))?
            }
        };
        let spec = NetworkSpec::new(
            topology.clone(),
            NeuronBinding { device, characteristic, circuit: circuit.clone() },
            entry.mode,
            Fidelity::Behavioral,
            step_duration,
        );
        let programmed = program_network(&spec, compose_stream(ctx.seed, 3))?;
        let curve = evaluate(
            &programmed,
            &dataset,
            section.time_ns * 1e-9,
            compose_stream(ctx.seed, 4),
            section.n_images,
        )?;
        let rep = crate::energy::report(&spec, &curve, section.target_accuracy)?;
        write_json_with_hash(
            &dir.join(format!("{}_{}.json", entry.device, mode_name(entry.mode))),
            ctx.hash,
            serde_json::to_value(&rep)?,
        )?;
        table.push_str(&rep.csv_row());
        println!(
            "{} {}: total {:.3e} J at {:.1} ns",
            entry.device,
            mode_name(entry.mode),
            rep.total_j,
            rep.time_to_target * 1e9
        );
    }
    let path = dir.join("comparison.csv");
    write_csv_with_hash(&path, ctx.hash, &table)?;
    println!("energy comparison -> {}", path.display());
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn overrides_pick_mode() {
        let ctx_overrides = Overrides { mode: Some(Mode::Async), ..Default::default() };
        let (config, hash) = (RunConfig::default(), 0);
        let ctx = Context {
            config,
            hash,
            out_dir: PathBuf::from("."),
            seed: 1,
            base_dir: PathBuf::from("."),
            overrides: ctx_overrides,
        };
        assert_eq!(ctx.mode_for(Mode::Sync), Mode::Async);
        assert_eq!(ctx.fidelity_for(Fidelity::Behavioral), Fidelity::Behavioral);
    }
}
