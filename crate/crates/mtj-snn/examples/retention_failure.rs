//! Read-disturb failure probability versus barrier height.
//!
//! ```bash
//! cargo run --release --example retention_failure
//! ```

use mtj_snn::characterize::retention_failure_probability;

fn main() {
    println!("retention failure during a 1 ns read window:");
    println!("  delta(kBT)  P_fail");
    for delta in [1.0, 2.0, 3.0, 4.0, 4.6, 5.0, 7.0, 10.0, 15.0, 20.0] {
        println!("  {:>9.1}  {:.3e}", delta, retention_failure_probability(delta, 1.0));
    }
    println!();
    println!("a 4.6 kBT barrier keeps the failure probability at the 1% level:");
    println!("  P_fail(4.6, 1 ns) = {:.5}", retention_failure_probability(4.6, 1.0));
}
