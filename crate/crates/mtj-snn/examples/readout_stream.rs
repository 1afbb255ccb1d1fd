//! Continuous readout of a telegraphic device through the behavioral
//! inverter chain: binary stream export and pulse statistics.
//!
//! ```bash
//! cargo run --release --example readout_stream -- 0.5 stream.csv
//! ```
//! Arguments: write current in uA and output CSV path (optional).

use mtj_snn::llgs::integrate;
use mtj_snn::readout::{
    apply_read_backaction, mean_pulse_width, read_async_stream, stream_mean, ReadCircuitParams,
};
use mtj_snn::{DeviceParams, SimConfig, Vec3};

fn main() {
    let args: Vec<String> = std::env::args().skip(1).collect();
    let drive_ua: f64 = args.first().and_then(|a| a.parse().ok()).unwrap_or(0.0);
    let out = args.get(1).map(String::as_str).unwrap_or("read_stream.csv");

    let device = DeviceParams::reference_1kbt();
    let circuit = ReadCircuitParams::default();
    let config = SimConfig { duration: 4e-6, seed: 3, ..Default::default() };
    let drive = apply_read_backaction(drive_ua * 1e-6, &circuit, true);
    let traj = integrate(Vec3::new(1.0, 1e-3, 1e-3).normalized(), &config, &device, 0, |_| drive)
        .expect("integration");
    let stream = read_async_stream(&traj, &circuit);

    println!(
        "write current {drive_ua} uA (+{:.0} nA read back-action):",
        circuit.read_current * 1e9
    );
    println!("  mean output level   {:.4}", stream_mean(&stream));
    println!("  mean pulse width    {:.2} ns", mean_pulse_width(&stream) * 1e9);

    let mut csv = String::from("time_s,level\n");
    // Decimate to 0.1 ns for a readable file.
    for s in stream.iter().step_by(100) {
        csv.push_str(&format!("{:.16e},{}\n", s.time, s.level));
    }
    std::fs::write(out, csv).expect("write CSV");
    println!("wrote {out}");
}
