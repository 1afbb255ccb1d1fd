//! Monte Carlo switching-probability curve with its logistic fit.
//!
//! ```bash
//! cargo run --release --example switching_curve -- 10kbt 400
//! ```
//! Arguments: device preset and trials per point (default 400; the full
//! characterization quality uses 1000).

use mtj_snn::characterize::characterize_auto;
use mtj_snn::DeviceParams;

fn main() {
    let args: Vec<String> = std::env::args().skip(1).collect();
    let preset = args.first().map(String::as_str).unwrap_or("10kbt");
    let n_trials: usize = args.get(1).and_then(|a| a.parse().ok()).unwrap_or(400);

    let device = DeviceParams::preset(preset).expect("known preset");
    let c = characterize_auto(&device, 0.5e-9, 13, n_trials.max(100), 42)
        .expect("characterization");

    println!("{preset}: barrier {:.2} kBT, {} trials/point", c.delta_kbt, c.n_trials);
    println!("  i_bias = {:.3} uA, i_o = {:.3} uA, max residual = {:.4}", c.i_bias * 1e6, c.i_o * 1e6, c.fit_residual);
    println!("  current(uA)  p_switch  fit");
    for (i, p) in c.currents.iter().zip(&c.p_switch) {
        println!("  {:>10.3}  {:>8.3}  {:.3}", i * 1e6, p, c.probability(*i));
    }
    let csv = format!("{preset}_switching.csv");
    std::fs::write(&csv, c.to_csv()).expect("write CSV");
    println!("wrote {csv}");
}
