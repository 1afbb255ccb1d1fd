// Dev scratch: train the reduced sigmoid CNN (28x28-4c5-2s-8c5-2s-10o) on
// the procedural digit set and emit the weight JSON. Deleted before ship.
use mtj_snn::dataset::synthetic_digits;
use mtj_snn::network::{LayerSpec, WeightFile};
use rand::{Rng, SeedableRng};

const C1: usize = 4;
const C2: usize = 8;
const FC_IN: usize = C2 * 4 * 4;

struct Net {
    w1: Vec<f64>, // [C1][5][5]
    b1: Vec<f64>,
    w2: Vec<f64>, // [C2][C1][5][5]
    b2: Vec<f64>,
    w3: Vec<f64>, // [FC_IN][10]
    b3: Vec<f64>,
}

fn sig(x: f64) -> f64 {
    1.0 / (1.0 + (-x).exp())
}

impl Net {
    fn new(seed: u64) -> Self {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        let mut init = |n: usize, fan_in: f64| -> Vec<f64> {
            let s = (2.4 / fan_in).sqrt();
            (0..n).map(|_| rng.gen_range(-s..s)).collect()
        };
        Net {
            w1: init(C1 * 25, 25.0),
            b1: vec![0.0; C1],
            w2: init(C2 * C1 * 25, (C1 * 25) as f64),
            b2: vec![0.0; C2],
            w3: init(FC_IN * 10, FC_IN as f64),
            b3: vec![0.0; 10],
        }
    }

    fn decay(&mut self, amount: f64) {
        for w in self
            .w1
            .iter_mut()
            .chain(self.w2.iter_mut())
            .chain(self.w3.iter_mut())
        {
            *w -= amount * *w;
        }
    }

    fn forward_noisy(
        &self,
        x: &[f64],
        sigma: f64,
        rng: &mut rand_chacha::ChaCha8Rng,
    ) -> (Vec<f64>, Vec<f64>, Vec<f64>, Vec<f64>, Vec<f64>) {
        use rand_distr::Distribution;
        let normal = rand_distr::Normal::new(0.0, sigma).unwrap();
        let mut a1 = vec![0.0; C1 * 576];
        for k in 0..C1 {
            for oy in 0..24 {
                for ox in 0..24 {
                    let mut z = self.b1[k] + normal.sample(rng);
                    for dy in 0..5 {
                        let xrow = (oy + dy) * 28 + ox;
                        let wrow = k * 25 + dy * 5;
                        for dx in 0..5 {
                            z += self.w1[wrow + dx] * x[xrow + dx];
                        }
                    }
                    a1[k * 576 + oy * 24 + ox] = sig(z);
                }
            }
        }
        let mut p1 = vec![0.0; C1 * 144];
        for k in 0..C1 {
            for y in 0..12 {
                for xx in 0..12 {
                    let b = k * 576;
                    let s = a1[b + 2 * y * 24 + 2 * xx]
                        + a1[b + 2 * y * 24 + 2 * xx + 1]
                        + a1[b + (2 * y + 1) * 24 + 2 * xx]
                        + a1[b + (2 * y + 1) * 24 + 2 * xx + 1];
                    p1[k * 144 + y * 12 + xx] = 0.25 * s;
                }
            }
        }
        let mut a2 = vec![0.0; C2 * 64];
        for j in 0..C2 {
            for oy in 0..8 {
                for ox in 0..8 {
                    let mut z = self.b2[j] + normal.sample(rng);
                    for c in 0..C1 {
                        for dy in 0..5 {
                            let prow = c * 144 + (oy + dy) * 12 + ox;
                            let wrow = j * C1 * 25 + c * 25 + dy * 5;
                            for dx in 0..5 {
                                z += self.w2[wrow + dx] * p1[prow + dx];
                            }
                        }
                    }
                    a2[j * 64 + oy * 8 + ox] = sig(z);
                }
            }
        }
        let mut p2 = vec![0.0; FC_IN];
        for c in 0..C2 {
            for y in 0..4 {
                for xx in 0..4 {
                    let b = c * 64;
                    let s = a2[b + 2 * y * 8 + 2 * xx]
                        + a2[b + 2 * y * 8 + 2 * xx + 1]
                        + a2[b + (2 * y + 1) * 8 + 2 * xx]
                        + a2[b + (2 * y + 1) * 8 + 2 * xx + 1];
                    p2[c * 16 + y * 4 + xx] = 0.25 * s;
                }
            }
        }
        let mut out = vec![0.0; 10];
        for o in 0..10 {
            let mut z = self.b3[o] + normal.sample(rng);
            for i in 0..FC_IN {
                z += self.w3[i * 10 + o] * p2[i];
            }
            out[o] = sig(z);
        }
        (a1, p1, a2, p2, out)
    }

    fn forward(
        &self,
        x: &[f64],
    ) -> (Vec<f64>, Vec<f64>, Vec<f64>, Vec<f64>, Vec<f64>) {
        // a1 [C1][24][24]
        let mut a1 = vec![0.0; C1 * 576];
        for k in 0..C1 {
            for oy in 0..24 {
                for ox in 0..24 {
                    let mut z = self.b1[k];
                    for dy in 0..5 {
                        let xrow = (oy + dy) * 28 + ox;
                        let wrow = k * 25 + dy * 5;
                        for dx in 0..5 {
                            z += self.w1[wrow + dx] * x[xrow + dx];
                        }
                    }
                    a1[k * 576 + oy * 24 + ox] = sig(z);
                }
            }
        }
        // p1 [C1][12][12]
        let mut p1 = vec![0.0; C1 * 144];
        for k in 0..C1 {
            for y in 0..12 {
                for xx in 0..12 {
                    let b = k * 576;
                    let s = a1[b + 2 * y * 24 + 2 * xx]
                        + a1[b + 2 * y * 24 + 2 * xx + 1]
                        + a1[b + (2 * y + 1) * 24 + 2 * xx]
                        + a1[b + (2 * y + 1) * 24 + 2 * xx + 1];
                    p1[k * 144 + y * 12 + xx] = 0.25 * s;
                }
            }
        }
        // a2 [C2][8][8]
        let mut a2 = vec![0.0; C2 * 64];
        for j in 0..C2 {
            for oy in 0..8 {
                for ox in 0..8 {
                    let mut z = self.b2[j];
                    for c in 0..C1 {
                        for dy in 0..5 {
                            let prow = c * 144 + (oy + dy) * 12 + ox;
                            let wrow = j * C1 * 25 + c * 25 + dy * 5;
                            for dx in 0..5 {
                                z += self.w2[wrow + dx] * p1[prow + dx];
                            }
                        }
                    }
                    a2[j * 64 + oy * 8 + ox] = sig(z);
                }
            }
        }
        // p2 [C2][4][4]
        let mut p2 = vec![0.0; FC_IN];
        for c in 0..C2 {
            for y in 0..4 {
                for xx in 0..4 {
                    let b = c * 64;
                    let s = a2[b + 2 * y * 8 + 2 * xx]
                        + a2[b + 2 * y * 8 + 2 * xx + 1]
                        + a2[b + (2 * y + 1) * 8 + 2 * xx]
                        + a2[b + (2 * y + 1) * 8 + 2 * xx + 1];
                    p2[c * 16 + y * 4 + xx] = 0.25 * s;
                }
            }
        }
        let mut out = vec![0.0; 10];
        for o in 0..10 {
            let mut z = self.b3[o];
            for i in 0..FC_IN {
                z += self.w3[i * 10 + o] * p2[i];
            }
            out[o] = sig(z);
        }
        (a1, p1, a2, p2, out)
    }

    #[allow(clippy::too_many_arguments)]
    fn backward(
        &mut self,
        x: &[f64],
        a1: &[f64],
        p1: &[f64],
        a2: &[f64],
        p2: &[f64],
        out: &[f64],
        target: &[f64],
        lr: f64,
    ) {
        let mut d3 = vec![0.0; 10];
        for o in 0..10 {
            d3[o] = (out[o] - target[o]) * out[o] * (1.0 - out[o]);
        }
        let mut dp2 = vec![0.0; FC_IN];
        for i in 0..FC_IN {
            let mut acc = 0.0;
            for o in 0..10 {
                acc += self.w3[i * 10 + o] * d3[o];
                self.w3[i * 10 + o] -= lr * p2[i] * d3[o];
            }
            dp2[i] = acc;
        }
        for o in 0..10 {
            self.b3[o] -= lr * d3[o];
        }
        // unpool2 + sigmoid'
        let mut dz2 = vec![0.0; C2 * 64];
        for c in 0..C2 {
            for y in 0..8 {
                for xx in 0..8 {
                    let g = dp2[c * 16 + (y / 2) * 4 + xx / 2] * 0.25;
                    let a = a2[c * 64 + y * 8 + xx];
                    dz2[c * 64 + y * 8 + xx] = g * a * (1.0 - a);
                }
            }
        }
        let mut dp1 = vec![0.0; C1 * 144];
        for j in 0..C2 {
            for oy in 0..8 {
                for ox in 0..8 {
                    let d = dz2[j * 64 + oy * 8 + ox];
                    if d == 0.0 {
                        continue;
                    }
                    for c in 0..C1 {
                        for dy in 0..5 {
                            let prow = c * 144 + (oy + dy) * 12 + ox;
                            let wrow = j * C1 * 25 + c * 25 + dy * 5;
                            for dx in 0..5 {
                                dp1[prow + dx] += self.w2[wrow + dx] * d;
                                self.w2[wrow + dx] -= lr * p1[prow + dx] * d;
                            }
                        }
                    }
                    self.b2[j] -= lr * d;
                }
            }
        }
        let mut dz1 = vec![0.0; C1 * 576];
        for c in 0..C1 {
            for y in 0..24 {
                for xx in 0..24 {
                    let g = dp1[c * 144 + (y / 2) * 12 + xx / 2] * 0.25;
                    let a = a1[c * 576 + y * 24 + xx];
                    dz1[c * 576 + y * 24 + xx] = g * a * (1.0 - a);
                }
            }
        }
        for k in 0..C1 {
            for oy in 0..24 {
                for ox in 0..24 {
                    let d = dz1[k * 576 + oy * 24 + ox];
                    if d == 0.0 {
                        continue;
                    }
                    for dy in 0..5 {
                        let xrow = (oy + dy) * 28 + ox;
                        let wrow = k * 25 + dy * 5;
                        for dx in 0..5 {
                            self.w1[wrow + dx] -= lr * x[xrow + dx] * d;
                        }
                    }
                    self.b1[k] -= lr * d;
                }
            }
        }
    }
}

fn main() {
    let train = synthetic_digits(8000, 7777);
    let test = synthetic_digits(500, 2024);
    let mut net = Net::new(99);
    let mut order: Vec<usize> = (0..train.len()).collect();
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(5);

    let noise_sigma = 0.5;
    let decay = 3e-5;
    for epoch in 0..55 {
        let lr = 0.4 * (0.955f64).powi(epoch);
        // shuffle
        for i in (1..order.len()).rev() {
            let j = rng.gen_range(0..=i);
            order.swap(i, j);
        }
        for &i in &order {
            // Rate-coded presentation: binary input sample per step.
            let x: Vec<f64> = train
                .image(i)
                .iter()
                .map(|&p| if rng.gen::<f64>() < p { 1.0 } else { 0.0 })
                .collect();
            let mut target = vec![0.0; 10];
            target[train.label(i) as usize] = 1.0;
            let (a1, p1, a2, p2, out) =
                net.forward_noisy(&x, noise_sigma, &mut rng);
            net.backward(&x, &a1, &p1, &a2, &p2, &out, &target, lr);
            net.decay(lr * decay);
        }
        // eval
        let mut correct = 0;
        for i in 0..test.len() {
            let x = test.image(i);
            let (_, _, _, _, out) = net.forward(&x);
            let pred = out
                .iter()
                .enumerate()
                .max_by(|a, b| a.1.partial_cmp(b.1).unwrap())
                .unwrap()
                .0;
            if pred == test.label(i) as usize {
                correct += 1;
            }
        }
        println!("epoch {epoch}: test acc {:.4} (lr {lr:.3})", correct as f64 / test.len() as f64);
    }

    // emit weight file in the documented layout
    let file = WeightFile {
        layers: vec![
            LayerSpec::Conv {
                kernel: vec![C1, 1, 5, 5],
                weights: net.w1.clone(),
                bias: net.b1.clone(),
            },
            LayerSpec::Subsample { kernel: vec![2, 2], weights: vec![], bias: vec![] },
            LayerSpec::Conv {
                kernel: vec![C2, C1, 5, 5],
                weights: net.w2.clone(),
                bias: net.b2.clone(),
            },
            LayerSpec::Subsample { kernel: vec![2, 2], weights: vec![], bias: vec![] },
            LayerSpec::Full {
                kernel: vec![FC_IN, 10],
                weights: net.w3.clone(),
                bias: net.b3.clone(),
            },
        ],
        scale: 1.0,
    };
    std::fs::create_dir_all("data").unwrap();
    file.write_file(std::path::Path::new("data/weights-4c5-8c5.json")).unwrap();
    println!("wrote data/weights-4c5-8c5.json");

    // sanity: rate-propagation accuracy through the production topology
    let topo = file.build_topology().unwrap();
    let acc = mtj_snn::snn::rate_accuracy(&topo, 0.0, &test, test.len());
    println!("rate-propagation accuracy via topology: {:.4}", acc);

    // stochastic behavioral plateau via the engine (sync, unit logistic)
    use mtj_snn::snn::*;
    let characteristic = mtj_snn::characterize::SwitchingCharacteristic {
        currents: vec![],
        p_switch: vec![],
        n_trials: 0,
        pulse_width: 0.5e-9,
        i_bias: 1e-6,
        i_o: 1e-6,
        fit_residual: 0.0,
        delta_kbt: 14.0,
    };
    let spec = NetworkSpec::new(
        topo,
        NeuronBinding {
            device: mtj_snn::DeviceParams::reference_10kbt(),
            characteristic,
            circuit: mtj_snn::readout::ReadCircuitParams::default(),
        },
        Mode::Sync,
        Fidelity::Behavioral,
        4e-9,
    );
    let programmed = program_network(&spec, 1).unwrap();
    for steps in [64usize, 128, 256] {
        let curve = evaluate(&programmed, &test, steps as f64 * 4e-9, 7, 300).unwrap();
        println!("stochastic sync {} steps: {:.4}", steps, curve.final_accuracy());
    }
}
