//! Resistive crossbar mapping of signed synaptic weights.
//!
//! Each signed weight programs exactly one of a positive/negative
//! conductance pair: `G+ = w * G_o` for positive weights, `G- = |w| * G_o`
//! for negative ones, with the other element left in the (ideal) off
//! state. Supply rails at `±delta_v` convert input spikes into column
//! currents `I_n = sum_m s_m * delta_v * (G+ - G-)`, which drive the
//! neuron devices directly. With `delta_v = i_o / G_o`, a unit weight
//! delivers exactly one `i_o` of drive per active input.

use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::rng::stream_rng;

/// Default unit-weight conductance, S.
pub const DEFAULT_G_O: f64 = 5e-6;

/// A programmed conductance-pair matrix with its supply setting.
#[derive(Debug, Clone, PartialEq)]
pub struct CrossbarInstance {
    /// Positive-rail conductances, row-major `inputs x neurons`, S.
    pub g_plus: Vec<f64>,
    /// Negative-rail conductances, row-major `inputs x neurons`, S.
    pub g_minus: Vec<f64>,
    pub inputs: usize,
    pub neurons: usize,
    /// Unit-weight conductance, S.
    pub g_o: f64,
    /// Supply magnitude, V; configure with [`CrossbarInstance::with_supply_for`].
    pub delta_v: f64,
    /// Programming-variation sigma used, as a fraction.
    pub variation_sigma: f64,
}

impl CrossbarInstance {
    /// Program a crossbar from a row-major `inputs x neurons` weight
    /// matrix. Each programmed conductance is multiplied by
    /// `1 + N(0, variation_sigma)` and clamped at zero; off-state elements
    /// stay exactly zero.
    pub fn program(
        weights: &[f64],
        inputs: usize,
        neurons: usize,
        g_o: f64,
        variation_sigma: f64,
        seed: u64,
    ) -> Result<Self> {
        if weights.len() != inputs * neurons {
            return Err(Error::DimensionMismatch {
                expected: inputs * neurons,
                got: weights.len(),
            });
        }
        if !(g_o > 0.0) {
            return Err(Error::invalid_argument("g_o must be positive"));
        }
        if variation_sigma < 0.0 {
            return Err(Error::invalid_argument("variation_sigma must be >= 0"));
        }
        let mut rng = stream_rng(seed, 0);
        let mut g_plus = vec![0.0; weights.len()];
        let mut g_minus = vec![0.0; weights.len()];
        for (i, &w) in weights.iter().enumerate() {
            let nominal = w.abs() * g_o;
            let programmed = if variation_sigma > 0.0 {
                let draw: f64 = rng.sample(StandardNormal);
                (nominal * (1.0 + variation_sigma * draw)).max(0.0)
            } else {
                nominal
            };
            if w > 0.0 {
                g_plus[i] = programmed;
            } else if w < 0.0 {
                g_minus[i] = programmed;
            }
        }
        Ok(Self {
            g_plus,
            g_minus,
            inputs,
            neurons,
            g_o,
            delta_v: 0.0,
            variation_sigma,
        })
    }

    /// Set the supply so a unit weight delivers one `i_o` of column
    /// current per fully active input: `delta_v = i_o / g_o`.
    pub fn with_supply_for(mut self, i_o: f64) -> Self {
        self.delta_v = i_o / self.g_o;
        self
    }

    #[inline]
    fn row(&self, m: usize) -> (&[f64], &[f64]) {
        let start = m * self.neurons;
        (
            &self.g_plus[start..start + self.neurons],
            &self.g_minus[start..start + self.neurons],
        )
    }

    /// Column currents for an activation vector, A.
    ///
    /// Activations are 1/0 for direct spikes; pooled rows carry fractional
    /// duty levels in [0, 1]. `supply_noise` is an additive shift on the
    /// supply magnitude shared by every row (volts).
    pub fn column_currents(&self, activations: &[f64], supply_noise: f64) -> Result<Vec<f64>> {
        if activations.len() != self.inputs {
            return Err(Error::DimensionMismatch {
                expected: self.inputs,
                got: activations.len(),
            });
        }
        let v = self.delta_v + supply_noise;
        let mut currents = vec![0.0f64; self.neurons];
        for (m, &a) in activations.iter().enumerate() {
            if a == 0.0 {
                continue;
            }
            let (gp, gm) = self.row(m);
            let av = a * v;
            for n in 0..self.neurons {
                currents[n] += av * (gp[n] - gm[n]);
            }
        }
        Ok(currents)
    }

    /// Energy dissipated in the crosspoints over `duration` with the given
    /// activations, J. Both rails dissipate: `E = sum a * V^2 * (G+ + G-) * t`.
    pub fn synapse_energy(&self, activations: &[f64], duration: f64) -> Result<f64> {
        if activations.len() != self.inputs {
            return Err(Error::DimensionMismatch {
                expected: self.inputs,
                got: activations.len(),
            });
        }
        if duration < 0.0 {
            return Err(Error::invalid_argument("duration must be >= 0"));
        }
        let v2 = self.delta_v * self.delta_v;
        let mut e = 0.0;
        for (m, &a) in activations.iter().enumerate() {
            if a == 0.0 {
                continue;
            }
            let (gp, gm) = self.row(m);
            let g_total: f64 =
                gp.iter().sum::<f64>() + gm.iter().sum::<f64>();
            e += a * v2 * g_total * duration;
        }
        Ok(e)
    }

    /// Sum of all programmed conductances, S. Handy for energy estimates.
    pub fn total_conductance(&self) -> f64 {
        self.g_plus.iter().sum::<f64>() + self.g_minus.iter().sum::<f64>()
    }

    /// CSV dump of the programmed conductance pairs:
    /// `input,neuron,g_plus_S,g_minus_S` (programmed crosspoints only).
    pub fn to_csv(&self) -> String {
        let mut out = String::from("input,neuron,g_plus_S,g_minus_S\n");
        for m in 0..self.inputs {
            let (gp, gm) = self.row(m);
            for n in 0..self.neurons {
                if gp[n] != 0.0 || gm[n] != 0.0 {
                    out.push_str(&format!("{m},{n},{:.16e},{:.16e}\n", gp[n], gm[n]));
                }
            }
        }
        out
    }
}
