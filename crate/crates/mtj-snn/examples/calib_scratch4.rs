// Dev scratch: measure the lag-1 persistence of the filtered async output
// sampled at its own mean pulse width.
use mtj_snn::device::DeviceParams;
use mtj_snn::llgs::{integrate_with, SimConfig};
use mtj_snn::readout::{zero_input_pulse_width, InverterChain, ReadCircuitParams};
use mtj_snn::vec3::Vec3;

fn main() {
    let circuit = ReadCircuitParams::default();
    for (name, d, drive) in [
        ("1kbt @0",  DeviceParams::reference_1kbt(), 0.0),
        ("1kbt @0.5uA", DeviceParams::reference_1kbt(), 0.5e-6),
        ("2kbt @0",  DeviceParams::reference_2kbt(), 0.0),
    ] {
        let step = zero_input_pulse_width(&d, &circuit, 20e-6, 11).unwrap();
        let dt = 1e-12;
        let config = SimConfig { dt, duration: 60e-6, seed: 31, ..Default::default() };
        let mut chain = InverterChain::new(circuit.tau_rc, 1.0);
        let sample_every = (step / dt).round() as usize;
        let mut samples: Vec<f64> = Vec::new();
        let total_drive = drive + circuit.read_current;
        integrate_with(Vec3::new(1.0, 1e-3, 1e-3).normalized(), &config, &d, 0, |_| total_drive, |i, _, m| {
            if i == 0 { return; }
            let level = chain.step(m.x, dt);
            if i % sample_every == 0 {
                samples.push(level as f64);
            }
        }).unwrap();
        let n = samples.len();
        let mean = samples.iter().sum::<f64>() / n as f64;
        let var = samples.iter().map(|s| (s - mean) * (s - mean)).sum::<f64>() / n as f64;
        let mut cov = 0.0;
        for w in samples.windows(2) {
            cov += (w[0] - mean) * (w[1] - mean);
        }
        cov /= (n - 1) as f64;
        println!("{name}: step={:.2}ns mean={:.3} lag1 corr={:.3} (n={})", step * 1e9, mean, cov / var, n);
    }
}
