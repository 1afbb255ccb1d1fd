//! Weight-to-conductance mapping and column currents of a small crossbar.
//!
//! ```bash
//! cargo run --release --example crossbar_currents
//! ```

use mtj_snn::crossbar::{CrossbarInstance, DEFAULT_G_O};

fn main() {
    // 4 inputs x 3 neurons, signed weights.
    let weights = [
        0.8, -0.5, 0.0, //
        -1.0, 0.3, 0.7, //
        0.2, 0.9, -0.4, //
        0.0, -0.6, 1.0,
    ];
    let i_o = 15.7e-6; // logistic scale current of the bound neuron
    let cb = CrossbarInstance::program(&weights, 4, 3, DEFAULT_G_O, 0.0, 1)
        .expect("programming")
        .with_supply_for(i_o);
    println!(
        "supply = i_o / G_o = {:.2} uA / {:.0} uS = {:.3} V",
        i_o * 1e6,
        DEFAULT_G_O * 1e6,
        cb.delta_v
    );
    println!("{}", cb.to_csv());

    for spikes in [[1.0, 0.0, 0.0, 0.0], [1.0, 1.0, 0.0, 1.0], [1.0, 1.0, 1.0, 1.0]] {
        let currents = cb.column_currents(&spikes, 0.0).expect("dimensions");
        let energy = cb.synapse_energy(&spikes, 0.5e-9).expect("dimensions");
        let ua: Vec<String> = currents.iter().map(|i| format!("{:+.2}", i * 1e6)).collect();
        println!(
            "spikes {spikes:?} -> column currents [{}] uA, 0.5 ns dissipation {:.2e} J",
            ua.join(", "),
            energy
        );
    }
    println!("one active unit weight delivers exactly i_o of drive current.");
}
