// Dev scratch: occupancy definitions vs lambda_sf; async residuals at
// longer averaging.
use mtj_snn::characterize::*;
use mtj_snn::device::DeviceParams;
use mtj_snn::readout::*;

fn main() {
    for lambda in [1.4e-9, 1.0e-9, 0.8e-9] {
        let mut d = DeviceParams::reference_1kbt();
        d.spin_flip_length = lambda;
        let a = dwell_time_analysis(&d, 1.5e-6, 10e-6, 13).unwrap();
        let p_state: f64 = a.p_dwells.iter().sum::<f64>()
            / (a.p_dwells.iter().sum::<f64>() + a.ap_dwells.iter().sum::<f64>());
        println!(
            "lambda={:.1}nm: raw occ={:.3} state occ={:.3} (n={})",
            lambda * 1e9,
            a.p_occupancy,
            p_state,
            a.transitions
        );
        // zero-bias check unchanged
        let z = dwell_time_analysis(&d, 0.0, 10e-6, 29).unwrap();
        println!("   zero-bias raw occ={:.3}  mean dwell={:.3}ns", z.p_occupancy, z.mean_dwell()*1e9);
        // backaction shift at this lambda
        let circuit = ReadCircuitParams::default();
        let with = mean_output_at(&d, &circuit, 0.0, 20e-6, 21, 1).unwrap();
        let wo = ReadCircuitParams { read_current: 0.0, ..Default::default() };
        let without = mean_output_at(&d, &wo, 0.0, 20e-6, 21, 1).unwrap();
        println!("   backaction shift = {:.4}", (with - without).abs());
    }

    // async char with longer averaging for both telegraphic devices
    let circuit = ReadCircuitParams::default();
    for (name, d) in [
        ("1kbt", DeviceParams::reference_1kbt()),
        ("2kbt", DeviceParams::reference_2kbt()),
    ] {
        let grid = mtj_snn::cli::async_current_grid(&d, &circuit, 4e-6, 5).unwrap();
        let c = characterize_async(&d, &circuit, &grid, 4e-6, 5).unwrap();
        println!(
            "async {name} @4us: ibias={:.4}uA io={:.4}uA res={:.4}",
            c.i_bias * 1e6,
            c.i_o * 1e6,
            c.fit_residual
        );
    }
}
