//! Demagnetization factors of rectangular free layers.
//!
//! ```bash
//! cargo run --release --example demag_factors
//! cargo run --release --example demag_factors -- 60 24 1.0
//! ```
//! Arguments: length, width, thickness in nanometers.

use mtj_snn::demag::demag_factors_rect_prism;
use mtj_snn::DeviceParams;

fn main() {
    let args: Vec<f64> =
        std::env::args().skip(1).filter_map(|a| a.parse().ok()).collect();
    if args.len() == 3 {
        let (l, w, t) = (args[0] * 1e-9, args[1] * 1e-9, args[2] * 1e-9);
        let (nx, ny, nz) = demag_factors_rect_prism(l, w, t).expect("valid dimensions");
        println!("{:.1} x {:.1} x {:.2} nm:", args[0], args[1], args[2]);
        println!("  Nxx = {nx:.6}  Nyy = {ny:.6}  Nzz = {nz:.6}  (sum {:.6})", nx + ny + nz);
        return;
    }
    println!("reference devices (length x width x thickness):");
    for name in ["1kbt", "2kbt", "10kbt", "20kbt"] {
        let d = DeviceParams::preset(name).unwrap();
        let (nx, ny, nz) = d.demag_factors;
        println!(
            "  {name:>6}: {:5.1} x {:4.1} x {:.1} nm  Nxx={nx:.6} Nyy={ny:.6} Nzz={nz:.6}  Hk={:.2e} A/m",
            d.free_layer_length * 1e9,
            d.free_layer_width * 1e9,
            d.free_layer_thickness * 1e9,
            d.anisotropy_field(),
        );
    }
}
