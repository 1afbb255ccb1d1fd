// Dev scratch: measure production-scale numbers for calibration.
use mtj_snn::characterize::*;
use mtj_snn::device::DeviceParams;
use mtj_snn::readout::*;
use std::time::Instant;

fn main() {
    let t0 = Instant::now();
    let devices = [
        ("1kbt", DeviceParams::reference_1kbt()),
        ("2kbt", DeviceParams::reference_2kbt()),
        ("10kbt", DeviceParams::reference_10kbt()),
        ("20kbt", DeviceParams::reference_20kbt()),
    ];
    for (name, d) in &devices {
        let t = Instant::now();
        let c = characterize_auto(d, 0.5e-9, 15, 1000, 42).unwrap();
        println!(
            "{name}: delta={:.3} ibias={:.3}uA io={:.3}uA res={:.4} p@[0]={:.3} p@[-1]={:.3}  [{:.1}s, total {:.0}s]",
            c.delta_kbt,
            c.i_bias * 1e6,
            c.i_o * 1e6,
            c.fit_residual,
            c.p_switch[0],
            c.p_switch[c.p_switch.len() - 1],
            t.elapsed().as_secs_f64(),
            t0.elapsed().as_secs_f64()
        );
    }

    for (name, d) in &devices[..2] {
        let t = Instant::now();
        let a = dwell_time_analysis(d, 0.0, 4e-6, 7).unwrap();
        println!(
            "dwell {name}: mean={:.3}ns meanP={:.3}ns meanAP={:.3}ns occ={:.3} n={} [{:.1}s]",
            a.mean_dwell() * 1e9,
            a.mean_p_dwell() * 1e9,
            a.mean_ap_dwell() * 1e9,
            a.p_occupancy,
            a.transitions,
            t.elapsed().as_secs_f64()
        );
    }

    let d1 = &devices[0].1;
    let t = Instant::now();
    let tau = calibrate_tau_rc(d1, 8.2e-9, 20e-6, 3).unwrap();
    println!("tau_rc calibrated = {:.4} ns [{:.0}s]", tau * 1e9, t.elapsed().as_secs_f64());
    let circuit = ReadCircuitParams { tau_rc: tau, ..Default::default() };
    let w1 = zero_input_pulse_width(d1, &circuit, 20e-6, 11).unwrap();
    let w2 = zero_input_pulse_width(&devices[1].1, &circuit, 40e-6, 11).unwrap();
    println!("pulse width: 1kbt {:.2} ns (target 8.2), 2kbt {:.2} ns (validation ~27.5)", w1 * 1e9, w2 * 1e9);

    // async characterization of the telegraphic devices
    for (name, d) in &devices[..2] {
        let t = Instant::now();
        let grid = mtj_snn::cli::async_current_grid(d, &circuit, 2e-6, 5).unwrap();
        let c = characterize_async(d, &circuit, &grid, 2e-6, 5).unwrap();
        println!(
            "async {name}: ibias={:.4}uA io={:.4}uA res={:.4} grid +-{:.2}uA [{:.0}s]",
            c.i_bias * 1e6,
            c.i_o * 1e6,
            c.fit_residual,
            grid.last().unwrap() * 1e6,
            t.elapsed().as_secs_f64()
        );
    }

    // read back-action shift at zero input (1 kbt)
    let m_with = mean_output_at(d1, &circuit, 0.0, 20e-6, 21, 1).unwrap();
    let no_read = ReadCircuitParams { read_current: 0.0, tau_rc: tau, ..Default::default() };
    let m_without = mean_output_at(d1, &no_read, 0.0, 20e-6, 21, 1).unwrap();
    println!("backaction: with={:.4} without={:.4} shift={:.4}", m_with, m_without, (m_with - m_without).abs());

    // occupancy under +1.5uA (criterion 4 direction)
    let a = dwell_time_analysis(d1, 1.5e-6, 4e-6, 13).unwrap();
    println!("occupancy at +1.5uA: {:.3}", a.p_occupancy);

    println!("total {:.0}s", t0.elapsed().as_secs_f64());
}
