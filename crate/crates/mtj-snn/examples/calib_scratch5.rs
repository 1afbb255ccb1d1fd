// Dev scratch: sweep orderings at n_mc=40 with the reworked variation
// mechanisms, matched wall-clock horizon.
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

    let sync_dev = DeviceParams::preset("10kbt").unwrap();
    let sync_char = characterize_auto(&sync_dev, 0.5e-9, 13, 800, 42).unwrap();
    let sync_spec = NetworkSpec::new(
        topo.clone(),
        NeuronBinding { device: sync_dev, characteristic: sync_char, circuit: circuit.clone() },
        Mode::Sync,
        Fidelity::Behavioral,
        ScheduleSync::default().total(),
    );
    let async_dev = DeviceParams::preset("1kbt").unwrap();
    let grid = mtj_snn::cli::async_current_grid(&async_dev, &circuit, 4e-6, 5).unwrap();
    let async_char = characterize_async(&async_dev, &circuit, &grid, 4e-6, 5).unwrap();
    let step = zero_input_pulse_width(&async_dev, &circuit, 20e-6, 11).unwrap();
    let async_spec = NetworkSpec::new(
        topo.clone(),
        NeuronBinding { device: async_dev, characteristic: async_char, circuit: circuit.clone() },
        Mode::Async,
        Fidelity::Behavioral,
        step,
    );
    eprintln!("setup done [{:.0}s]", t0.elapsed().as_secs_f64());

    let horizon = 280e-9;
    let n_mc = 24;
    let n_img = 100;
    for (label, spec) in [("sync10k", &sync_spec), ("async1k", &async_spec)] {
        let syn = sweep_variations(spec, &test, SweepKind::SynapseSigma, &[0.0, 20.0], n_mc, horizon, n_img, 1234).unwrap();
        eprintln!(
            "{label} synapse: {:.4}(±{:.4}) -> {:.4}(±{:.4})  drop {:.4} [{:.0}s]",
            syn.mean_accuracy[0], syn.std_accuracy[0], syn.mean_accuracy[1], syn.std_accuracy[1],
            syn.mean_accuracy[0] - syn.mean_accuracy[1],
            t0.elapsed().as_secs_f64()
        );
        let sup = sweep_variations(spec, &test, SweepKind::SupplyMv, &[0.0, 25.0], n_mc, horizon, n_img, 1234).unwrap();
        eprintln!(
            "{label} supply: {:.4} -> {:.4}  drop {:.4} [{:.0}s]",
            sup.mean_accuracy[0], sup.mean_accuracy[1],
            sup.mean_accuracy[0] - sup.mean_accuracy[1],
            t0.elapsed().as_secs_f64()
        );
        let cmos = sweep_variations(spec, &test, SweepKind::CmosSigma, &[0.0, 2.0], n_mc, horizon, n_img, 1234).unwrap();
        eprintln!(
            "{label} cmos: {:.4} -> {:.4}  drop {:.4} [{:.0}s]",
            cmos.mean_accuracy[0], cmos.mean_accuracy[1],
            cmos.mean_accuracy[0] - cmos.mean_accuracy[1],
            t0.elapsed().as_secs_f64()
        );
    }
}
