// Dev scratch: end-to-end behavioral system measurements.
use mtj_snn::characterize::characterize_auto;
use mtj_snn::dataset::synthetic_digits;
use mtj_snn::device::DeviceParams;
use mtj_snn::network::WeightFile;
use mtj_snn::readout::{characterize_async, zero_input_pulse_width, ReadCircuitParams};
use mtj_snn::snn::*;
use mtj_snn::sweeps::{sweep_variations, SweepKind};
use std::time::Instant;

fn main() {
    let t0 = Instant::now();
    let file = WeightFile::from_file(std::path::Path::new("data/weights-4c5-8c5.json")).unwrap();
    let topo = file.build_topology().unwrap();
    let test = synthetic_digits(500, 2024);
    let circuit = ReadCircuitParams::default();

    let oracle_acc = rate_accuracy(&topo, 0.0, &test, 500);
    println!("oracle accuracy: {oracle_acc:.4}  [{:.0}s]", t0.elapsed().as_secs_f64());

    // --- characterize all four, build specs ---
    let mut specs: Vec<(String, NetworkSpec)> = Vec::new();
    for (name, mode) in [
        ("10kbt", Mode::Sync),
        ("20kbt", Mode::Sync),
        ("1kbt", Mode::Async),
        ("2kbt", Mode::Async),
    ] {
        let device = DeviceParams::preset(name).unwrap();
        let (characteristic, step) = match mode {
            Mode::Sync => {
                let c = characterize_auto(&device, 0.5e-9, 13, 800, 42).unwrap();
                (c, ScheduleSync::default().total())
            }
            Mode::Async => {
                let grid = mtj_snn::cli::async_current_grid(&device, &circuit, 4e-6, 5).unwrap();
                let c = characterize_async(&device, &circuit, &grid, 4e-6, 5).unwrap();
                let w = zero_input_pulse_width(&device, &circuit, 20e-6, 11).unwrap();
                (c, w)
            }
        };
        println!(
            "{name} {:?}: ib={:.3}uA io={:.3}uA res={:.4} step={:.2}ns [{:.0}s]",
            mode,
            characteristic.i_bias * 1e6,
            characteristic.i_o * 1e6,
            characteristic.fit_residual,
            step * 1e9,
            t0.elapsed().as_secs_f64()
        );
        let spec = NetworkSpec::new(
            topo.clone(),
            NeuronBinding { device, characteristic, circuit: circuit.clone() },
            mode,
            Fidelity::Behavioral,
            step,
        );
        specs.push((name.to_string(), spec));
    }

    // --- accuracy curves + energy at 96% ---
    for (name, spec) in &specs {
        let programmed = program_network(spec, 1).unwrap();
        let total_time = match spec.mode { Mode::Sync => 320.0 * spec.step_duration, Mode::Async => 200.0 * spec.step_duration };
        let curve = evaluate(&programmed, &test, total_time, 7, 500).unwrap();
        let final_acc = curve.final_accuracy();
        let hit = curve.first_reaching(0.96);
        let (t96, e96) = hit
            .map(|c| (c.time_s * 1e9, c.mean_energy))
            .unwrap_or((f64::NAN, Default::default()));
        println!(
            "{name} {:?}: final {:.4}, t96 {:.1} ns, E(neuron/synapse/read) = {:.2e}/{:.2e}/{:.2e} J total {:.2e} [{:.0}s]",
            spec.mode,
            final_acc,
            t96,
            e96.neuron_j,
            e96.synapse_j,
            e96.read_j,
            e96.total(),
            t0.elapsed().as_secs_f64()
        );
    }

    // --- quick sweeps (reduced reps) ---
    for (name, spec) in [&specs[0], &specs[2]] {
        let t = Instant::now();
        let horizon = 400e-9;
        let syn = sweep_variations(spec, &test, SweepKind::SynapseSigma, &[0.0, 20.0], 16, horizon, 150, 99).unwrap();
        let sup = sweep_variations(spec, &test, SweepKind::SupplyMv, &[0.0, 25.0], 16, horizon, 150, 98).unwrap();
        let cmos = sweep_variations(spec, &test, SweepKind::CmosSigma, &[0.0, 2.0], 16, horizon, 150, 97).unwrap();
        println!(
            "{name}: synapse 0->20%: {:.4}->{:.4}; supply 0->25mV: {:.4}->{:.4}; cmos 0->2s: {:.4}->{:.4} [{:.0}s]",
            syn.mean_accuracy[0], syn.mean_accuracy[1],
            sup.mean_accuracy[0], sup.mean_accuracy[1],
            cmos.mean_accuracy[0], cmos.mean_accuracy[1],
            t.elapsed().as_secs_f64()
        );
    }
    println!("total {:.0}s", t0.elapsed().as_secs_f64());
}
