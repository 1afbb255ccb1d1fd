//! Integrate one stochastic magnetization trajectory and export it as CSV.
//!
//! ```bash
//! cargo run --release --example llgs_trajectory -- 1kbt 100 0.0 traj.csv
//! ```
//! Arguments: device preset, duration in ns, drive current in uA, output
//! path (all optional).

use mtj_snn::llgs::integrate;
use mtj_snn::{DeviceParams, SimConfig, Vec3};

fn main() {
    let args: Vec<String> = std::env::args().skip(1).collect();
    let preset = args.first().map(String::as_str).unwrap_or("1kbt");
    let duration_ns: f64 = args.get(1).and_then(|a| a.parse().ok()).unwrap_or(100.0);
    let drive_ua: f64 = args.get(2).and_then(|a| a.parse().ok()).unwrap_or(0.0);
    let out = args.get(3).map(String::as_str).unwrap_or("trajectory.csv");

    let device = DeviceParams::preset(preset).expect("known preset");
    let config = SimConfig {
        duration: duration_ns * 1e-9,
        seed: 7,
        ..Default::default()
    };
    let m0 = Vec3::new(1.0, 1e-3, 1e-3).normalized();
    let traj = integrate(m0, &config, &device, 0, |_| drive_ua * 1e-6).expect("integration");

    let p_frac =
        traj.m.iter().filter(|m| m.x > 0.0).count() as f64 / traj.len() as f64;
    println!(
        "{preset}: {} samples over {duration_ns} ns at {drive_ua} uA, P fraction {:.3}",
        traj.len(),
        p_frac
    );
    std::fs::write(out, traj.to_csv()).expect("write CSV");
    println!("wrote {out}");
}
