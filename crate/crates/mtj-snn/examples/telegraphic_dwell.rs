//! Telegraphic switching of a superparamagnetic device: dwell times and
//! state occupancy, with and without a bias current through the heavy
//! metal.
//!
//! ```bash
//! cargo run --release --example telegraphic_dwell -- 1kbt
//! ```

use mtj_snn::characterize::dwell_time_analysis;
use mtj_snn::DeviceParams;

fn main() {
    let preset = std::env::args().nth(1).unwrap_or_else(|| "1kbt".to_string());
    let device = DeviceParams::preset(&preset).expect("known preset");
    println!("{preset}: shape barrier from geometry, zero vs biased telegraph over 10 us");
    for bias_ua in [0.0, 1.5, -1.5] {
        let a = dwell_time_analysis(&device, bias_ua * 1e-6, 10e-6, 11)
            .expect("superparamagnetic device");
        println!(
            "  bias {bias_ua:+.1} uA: P occupancy {:.3}, mean dwell {:.3} ns (P {:.3} / AP {:.3}), {} transitions",
            a.p_occupancy,
            a.mean_dwell() * 1e9,
            a.mean_p_dwell() * 1e9,
            a.mean_ap_dwell() * 1e9,
            a.transitions
        );
    }
    let a = dwell_time_analysis(&device, 0.0, 10e-6, 11).unwrap();
    println!(
        "  Arrhenius estimate: tau0 {:.0} ps x exp({:.2}) = {:.3} ns retention",
        a.retention.tau0 * 1e12,
        a.retention.barrier_height,
        a.retention.retention_time * 1e9
    );
}
