//! Layered network description and weight-file ingestion.
//!
//! Weight files are JSON documents:
//!
//! ```json
//! {
//!   "layers": [
//!     {"type": "conv", "kernel": [4, 1, 5, 5], "weights": [...], "bias": [...]},
//!     {"type": "subsample", "kernel": [2, 2], "weights": [], "bias": []},
//!     {"type": "full", "kernel": [128, 10], "weights": [...], "bias": [...]}
//!   ],
//!   "scale": 1.0
//! }
//! ```
//!
//! Conv kernels are row-major `[out_channels, in_channels, kh, kw]`; full
//! layers row-major `[fan_in, fan_out]`. Feature maps flatten
//! channel-major: index `c * H * W + y * W + x`. The recorded `scale`
//! multiplies every weight and bias on its way into conductances and into
//! the rate-propagation reference, so a file can squeeze large trained
//! weights into the useful drive range of the devices.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// One layer of the weight file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "lowercase")]
pub enum LayerSpec {
    Conv {
        /// `[out_channels, in_channels, kh, kw]`
        kernel: Vec<usize>,
        weights: Vec<f64>,
        bias: Vec<f64>,
    },
    Subsample {
        /// `[kh, kw]`; only 2x2 average pooling is supported.
        kernel: Vec<usize>,
        #[serde(default)]
        weights: Vec<f64>,
        #[serde(default)]
        bias: Vec<f64>,
    },
    Full {
        /// `[fan_in, fan_out]`
        kernel: Vec<usize>,
        weights: Vec<f64>,
        bias: Vec<f64>,
    },
}

/// Weight file root.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WeightFile {
    pub layers: Vec<LayerSpec>,
    pub scale: f64,
}

/// Shape of a feature volume flowing between layers.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Shape {
    pub channels: usize,
    pub height: usize,
    pub width: usize,
}

impl Shape {
    pub fn len(&self) -> usize {
        self.channels * self.height * self.width
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

/// A layer unrolled for crossbar evaluation: a dense
/// `(fan_in + 1) x neurons` effective-weight matrix, bias on the last row.
#[derive(Debug, Clone, PartialEq)]
pub struct UnrolledLayer {
    pub rows: usize,
    pub neurons: usize,
    /// Row-major effective weights (already multiplied by the file scale).
    pub weights: Vec<f64>,
    pub input_shape: Shape,
    pub output_shape: Shape,
}

/// Network stages after validation: crossbar stages interleaved with
/// fixed pooling wirings.
#[derive(Debug, Clone, PartialEq)]
pub enum Stage {
    Crossbar(UnrolledLayer),
    /// 2x2 average pooling over each channel plane.
    Pool { input_shape: Shape, output_shape: Shape },
}

/// Validated layered topology with unrolled weights.
#[derive(Debug, Clone, PartialEq)]
pub struct NetworkTopology {
    pub stages: Vec<Stage>,
    pub input_shape: Shape,
    pub output_neurons: usize,
    pub scale: f64,
}

impl WeightFile {
    pub fn from_json(json: &str) -> Result<Self> {
        let file: WeightFile = serde_json::from_str(json)?;
        Ok(file)
    }

    pub fn from_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Self::from_json(&text)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("weight file serializes")
    }

    pub fn write_file(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_json())?;
        Ok(())
    }

    /// Validate the layer chain from a 28x28 input and unroll every
    /// weighted layer into its crossbar matrix.
    pub fn build_topology(&self) -> Result<NetworkTopology> {
        let input = Shape { channels: 1, height: crate::dataset::IMAGE_SIDE, width: crate::dataset::IMAGE_SIDE };
        let mut shape = input;
        let mut stages = Vec::with_capacity(self.layers.len());
        if !(self.scale.is_finite() && self.scale > 0.0) {
            return Err(Error::invalid_argument(format!("scale must be > 0, got {}", self.scale)));
        }
        for (idx, layer) in self.layers.iter().enumerate() {
            match layer {
                LayerSpec::Conv { kernel, weights, bias } => {
                    let [out_c, in_c, kh, kw] = kernel.as_slice() else {
                        return Err(Error::invalid_argument(format!(
                            "layer {idx}: conv kernel must be [out, in, kh, kw]"
                        )));
                    };
                    let (out_c, in_c, kh, kw) = (*out_c, *in_c, *kh, *kw);
                    if in_c != shape.channels {
                        return Err(Error::invalid_argument(format!(
                            "layer {idx}: expects {in_c} input channels, chain provides {}",
                            shape.channels
                        )));
                    }
                    if weights.len() != out_c * in_c * kh * kw || bias.len() != out_c {
                        return Err(Error::DimensionMismatch {
                            expected: out_c * in_c * kh * kw,
                            got: weights.len(),
                        });
                    }
                    if shape.height < kh || shape.width < kw {
                        return Err(Error::invalid_argument(format!(
                            "layer {idx}: kernel {kh}x{kw} larger than input {}x{}",
                            shape.height, shape.width
                        )));
                    }
                    let out_shape = Shape {
                        channels: out_c,
                        height: shape.height - kh + 1,
                        width: shape.width - kw + 1,
                    };
                    stages.push(Stage::Crossbar(unroll_conv(
                        shape, out_shape, kh, kw, weights, bias, self.scale,
                    )));
                    shape = out_shape;
                }
                LayerSpec::Subsample { kernel, .. } => {
                    if kernel.as_slice() != [2, 2] {
                        return Err(Error::invalid_argument(format!(
                            "layer {idx}: only 2x2 subsampling is supported"
                        )));
                    }
                    if shape.height % 2 != 0 || shape.width % 2 != 0 {
                        return Err(Error::invalid_argument(format!(
                            "layer {idx}: odd feature map {}x{} cannot pool 2x2",
                            shape.height, shape.width
                        )));
                    }
                    let out_shape = Shape {
                        channels: shape.channels,
                        height: shape.height / 2,
                        width: shape.width / 2,
                    };
                    stages.push(Stage::Pool { input_shape: shape, output_shape: out_shape });
                    shape = out_shape;
                }
                LayerSpec::Full { kernel, weights, bias } => {
                    let [fan_in, fan_out] = kernel.as_slice() else {
                        return Err(Error::invalid_argument(format!(
                            "layer {idx}: full kernel must be [fan_in, fan_out]"
                        )));
                    };
                    let (fan_in, fan_out) = (*fan_in, *fan_out);
                    if fan_in != shape.len() {
                        return Err(Error::invalid_argument(format!(
                            "layer {idx}: fan_in {fan_in} does not match chain {}",
                            shape.len()
                        )));
                    }
                    if weights.len() != fan_in * fan_out || bias.len() != fan_out {
                        return Err(Error::DimensionMismatch {
                            expected: fan_in * fan_out,
                            got: weights.len(),
                        });
                    }
                    let out_shape = Shape { channels: fan_out, height: 1, width: 1 };
                    let mut w = vec![0.0; (fan_in + 1) * fan_out];
                    for i in 0..fan_in {
                        for j in 0..fan_out {
                            w[i * fan_out + j] = weights[i * fan_out + j] * self.scale;
                        }
                    }
                    for j in 0..fan_out {
                        w[fan_in * fan_out + j] = bias[j] * self.scale;
                    }
                    stages.push(Stage::Crossbar(UnrolledLayer {
                        rows: fan_in + 1,
                        neurons: fan_out,
                        weights: w,
                        input_shape: shape,
                        output_shape: out_shape,
                    }));
                    shape = out_shape;
                }
            }
        }
        if shape.len() != 10 {
            return Err(Error::invalid_argument(format!(
                "network must end in 10 output neurons, got {}",
                shape.len()
            )));
        }
        Ok(NetworkTopology {
            stages,
            input_shape: input,
            output_neurons: 10,
            scale: self.scale,
        })
    }
}

fn unroll_conv(
    input: Shape,
    output: Shape,
    kh: usize,
    kw: usize,
    weights: &[f64],
    bias: &[f64],
    scale: f64,
) -> UnrolledLayer {
    let fan_in = input.len();
    let neurons = output.len();
    let mut w = vec![0.0; (fan_in + 1) * neurons];
    let plane_out = output.height * output.width;
    let k_per_out = input.channels * kh * kw;
    for k in 0..output.channels {
        for oy in 0..output.height {
            for ox in 0..output.width {
                let col = k * plane_out + oy * output.width + ox;
                for c in 0..input.channels {
                    for dy in 0..kh {
                        for dx in 0..kw {
                            let row = c * input.height * input.width
                                + (oy + dy) * input.width
                                + (ox + dx);
                            let kidx = k * k_per_out + c * kh * kw + dy * kw + dx;
                            w[row * neurons + col] = weights[kidx] * scale;
                        }
                    }
                }
                w[fan_in * neurons + col] = bias[k] * scale;
            }
        }
    }
    UnrolledLayer {
        rows: fan_in + 1,
        neurons,
        weights: w,
        input_shape: input,
        output_shape: output,
    }
}

/// 2x2 average pooling of a channel-major flattened volume.
pub fn pool_2x2(input: &[f64], shape: Shape) -> Vec<f64> {
    let oh = shape.height / 2;
    let ow = shape.width / 2;
    let mut out = vec![0.0; shape.channels * oh * ow];
    for c in 0..shape.channels {
        for y in 0..oh {
            for x in 0..ow {
                let base = c * shape.height * shape.width;
                let sum = input[base + (2 * y) * shape.width + 2 * x]
                    + input[base + (2 * y) * shape.width + 2 * x + 1]
                    + input[base + (2 * y + 1) * shape.width + 2 * x]
                    + input[base + (2 * y + 1) * shape.width + 2 * x + 1];
                out[c * oh * ow + y * ow + x] = 0.25 * sum;
            }
        }
    }
    out
}

#[cfg(test)]
pub(crate) mod tests_support {
    use super::*;

    /// Small valid file: 28x28 -> conv 2c5 -> pool -> full -> 10.
    pub(crate) fn tiny_weight_file() -> WeightFile {
        let conv_w: Vec<f64> =
            (0..2 * 5 * 5).map(|i| (i as f64 * 0.37).sin() * 0.4).collect();
        let full_in = 2 * 12 * 12;
        let full_w: Vec<f64> =
            (0..full_in * 10).map(|i| (i as f64 * 0.11).cos() * 0.2).collect();
        WeightFile {
            layers: vec![
                LayerSpec::Conv {
                    kernel: vec![2, 1, 5, 5],
                    weights: conv_w,
                    bias: vec![0.1, -0.1],
                },
                LayerSpec::Subsample { kernel: vec![2, 2], weights: vec![], bias: vec![] },
                LayerSpec::Full {
                    kernel: vec![full_in, 10],
                    weights: full_w,
                    bias: vec![0.0; 10],
                },
            ],
            scale: 1.0,
        }
    }

    pub(crate) fn tiny_topology() -> NetworkTopology {
        tiny_weight_file().build_topology().expect("tiny topology is valid")
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use tests_support::tiny_weight_file;

    #[test]
    fn json_round_trip() {
        let f = tiny_weight_file();
        let json = f.to_json();
        let back = WeightFile::from_json(&json).unwrap();
        assert_eq!(f, back);
    }

    #[test]
    fn topology_shapes_chain() {
        let topo = tiny_weight_file().build_topology().unwrap();
        assert_eq!(topo.stages.len(), 3);
        match &topo.stages[0] {
            Stage::Crossbar(l) => {
                assert_eq!(l.rows, 785);
                assert_eq!(l.neurons, 2 * 24 * 24);
                assert_eq!(l.output_shape, Shape { channels: 2, height: 24, width: 24 });
            }
            other => panic!("expected crossbar, got {other:?}"),
        }
        match &topo.stages[1] {
            Stage::Pool { output_shape, .. } => {
                assert_eq!(*output_shape, Shape { channels: 2, height: 12, width: 12 });
            }
            other => panic!("expected pool, got {other:?}"),
        }
    }

    #[test]
    fn conv_unroll_matches_direct_convolution() {
        // Apply the unrolled matrix to a test vector and compare against a
        // straightforward convolution loop.
        let f = tiny_weight_file();
        let topo = f.build_topology().unwrap();
        let Stage::Crossbar(layer) = &topo.stages[0] else { panic!() };
        let image: Vec<f64> = (0..784).map(|i| ((i * 37) % 11) as f64 / 10.0).collect();

        // matrix route (with bias row active)
        let mut via_matrix = vec![0.0; layer.neurons];
        for (row, &a) in image.iter().enumerate() {
            if a != 0.0 {
                for n in 0..layer.neurons {
                    via_matrix[n] += a * layer.weights[row * layer.neurons + n];
                }
            }
        }
        for n in 0..layer.neurons {
            via_matrix[n] += layer.weights[784 * layer.neurons + n];
        }

        // direct convolution route
        let LayerSpec::Conv { weights, bias, .. } = &f.layers[0] else { panic!() };
        for k in 0..2 {
            for oy in 0..24 {
                for ox in 0..24 {
                    let mut acc = bias[k];
                    for dy in 0..5 {
                        for dx in 0..5 {
                            acc += weights[k * 25 + dy * 5 + dx]
                                * image[(oy + dy) * 28 + (ox + dx)];
                        }
                    }
                    let col = k * 576 + oy * 24 + ox;
                    assert!(
                        (acc - via_matrix[col]).abs() < 1e-12,
                        "col {col}: {acc} vs {}",
                        via_matrix[col]
                    );
                }
            }
        }
    }

    #[test]
    fn pool_averages_quads() {
        let shape = Shape { channels: 1, height: 4, width: 4 };
        let v: Vec<f64> = (0..16).map(|i| i as f64).collect();
        let p = pool_2x2(&v, shape);
        assert_eq!(p.len(), 4);
        assert!((p[0] - (0.0 + 1.0 + 4.0 + 5.0) / 4.0).abs() < 1e-12);
        assert!((p[3] - (10.0 + 11.0 + 14.0 + 15.0) / 4.0).abs() < 1e-12);
    }

    #[test]
    fn rejects_mismatched_chain() {
        let mut f = tiny_weight_file();
        if let LayerSpec::Full { kernel, .. } = &mut f.layers[2] {
            kernel[0] = 100; // wrong fan-in
        }
        assert!(f.build_topology().is_err());
    }

    #[test]
    fn rejects_wrong_output_count() {
        let mut f = tiny_weight_file();
        if let LayerSpec::Full { kernel, weights, bias } = &mut f.layers[2] {
            kernel[1] = 9;
            weights.truncate(kernel[0] * 9);
            bias.truncate(9);
        }
        assert!(f.build_topology().is_err());
    }

    #[test]
    fn scale_multiplies_effective_weights() {
        let mut f = tiny_weight_file();
        f.scale = 0.5;
        let t1 = f.build_topology().unwrap();
        f.scale = 1.0;
        let t2 = f.build_topology().unwrap();
        let (Stage::Crossbar(a), Stage::Crossbar(b)) = (&t1.stages[0], &t2.stages[0]) else {
            panic!()
        };
        for (x, y) in a.weights.iter().zip(&b.weights) {
            assert!((x * 2.0 - y).abs() < 1e-12);
        }
    }
}
