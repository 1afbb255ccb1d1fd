//! Two-parameter logistic fit of switching-probability data.
//!
//! Fits `p(I) = sigmoid((I - i_bias) / i_o)` by damped least squares
//! (Levenberg style) with the analytic Jacobian. `i_bias` is the current
//! that biases the switching probability to 0.5; `i_o` is the scale
//! current mapping the swing around the bias point onto the sigmoid.

use crate::error::{Error, Result};

pub fn sigmoid(x: f64) -> f64 {
    1.0 / (1.0 + (-x).exp())
}

/// Result of a logistic fit.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct SigmoidFit {
    /// Current at which the fitted probability crosses 0.5, A.
    pub i_bias: f64,
    /// Logistic scale current, A (positive).
    pub i_o: f64,
    /// Maximum absolute residual between fit and data.
    pub residual: f64,
}

impl SigmoidFit {
    /// Fitted probability at current `i`.
    pub fn probability(&self, i: f64) -> f64 {
        sigmoid((i - self.i_bias) / self.i_o)
    }
}

fn eval_residuals(currents: &[f64], p: &[f64], b: f64, s: f64, r: &mut [f64]) {
    for i in 0..currents.len() {
        r[i] = sigmoid((currents[i] - b) / s) - p[i];
    }
}

fn sum_sq(r: &[f64]) -> f64 {
    r.iter().map(|v| v * v).sum()
}

/// Fit `sigmoid((I - i_bias)/i_o)` to sampled `(current, probability)`
/// points.
///
/// Requires at least 5 points and data spanning below 0.2 and above 0.8;
/// returns [`Error::InsufficientRange`] otherwise.
pub fn fit_sigmoid(currents: &[f64], p_switch: &[f64]) -> Result<SigmoidFit> {
    if currents.len() != p_switch.len() {
        return Err(Error::DimensionMismatch {
            expected: currents.len(),
            got: p_switch.len(),
        });
    }
    if currents.len() < 5 {
        return Err(Error::InsufficientRange(format!(
            "need at least 5 points, got {}",
            currents.len()
        )));
    }
    let pmin = p_switch.iter().cloned().fold(f64::INFINITY, f64::min);
    let pmax = p_switch.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    if !(pmin < 0.2 && pmax > 0.8) {
        return Err(Error::InsufficientRange(format!(
            "data must span p < 0.2 to p > 0.8, got [{pmin:.3}, {pmax:.3}]"
        )));
    }

    // Initial guess: interpolated 0.5-crossing for the bias, quartile
    // spread over 2.2 for the scale.
    let mut pts: Vec<(f64, f64)> =
        currents.iter().cloned().zip(p_switch.iter().cloned()).collect();
    pts.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
    let crossing = |level: f64| -> f64 {
        for w in pts.windows(2) {
            let ((x0, y0), (x1, y1)) = (w[0], w[1]);
            if (y0 - level) * (y1 - level) <= 0.0 && y1 != y0 {
                return x0 + (x1 - x0) * (level - y0) / (y1 - y0);
            }
        }
        pts[pts.len() / 2].0
    };
    let mut b = crossing(0.5);
    let spread = (crossing(0.75) - crossing(0.25)).abs();
    let span = pts[pts.len() - 1].0 - pts[0].0;
    let mut s = if spread > 0.0 { spread / 2.2 } else { span / 6.0 };
    if !(s > 0.0) {
        s = span.abs() / 6.0;
    }

    let n = pts.len();
    let xs: Vec<f64> = pts.iter().map(|v| v.0).collect();
    let ys: Vec<f64> = pts.iter().map(|v| v.1).collect();
    let mut r = vec![0.0; n];
    eval_residuals(&xs, &ys, b, s, &mut r);
    let mut cost = sum_sq(&r);
    let mut lambda = 1e-3;

    for _ in 0..200 {
        let mut jtj = [[0.0f64; 2]; 2];
        let mut jtr = [0.0f64; 2];
        for i in 0..n {
            let u = (xs[i] - b) / s;
            let f = sigmoid(u);
            let fp = f * (1.0 - f);
            let db = -fp / s;
            let ds = -fp * u / s;
            jtj[0][0] += db * db;
            jtj[0][1] += db * ds;
            jtj[1][1] += ds * ds;
            jtr[0] += db * r[i];
            jtr[1] += ds * r[i];
        }
        jtj[1][0] = jtj[0][1];

        let a00 = jtj[0][0] * (1.0 + lambda);
        let a11 = jtj[1][1] * (1.0 + lambda);
        let det = a00 * a11 - jtj[0][1] * jtj[1][0];
        if det.abs() < 1e-300 {
            break;
        }
        let step_b = (a11 * jtr[0] - jtj[0][1] * jtr[1]) / det;
        let step_s = (a00 * jtr[1] - jtj[1][0] * jtr[0]) / det;
        let nb = b - step_b;
        let mut ns = s - step_s;
        if ns <= 0.0 {
            ns = s * 0.5;
        }
        eval_residuals(&xs, &ys, nb, ns, &mut r);
        let new_cost = sum_sq(&r);
        if new_cost < cost {
            let improvement = (cost - new_cost) / cost.max(1e-300);
            b = nb;
            s = ns;
            cost = new_cost;
            lambda = (lambda * 0.3).max(1e-12);
            if improvement < 1e-12 {
                break;
            }
        } else {
            lambda *= 10.0;
            if lambda > 1e8 {
                break;
            }
            eval_residuals(&xs, &ys, b, s, &mut r);
        }
    }

    eval_residuals(&xs, &ys, b, s, &mut r);
    let residual = r.iter().map(|v| v.abs()).fold(0.0, f64::max);
    Ok(SigmoidFit { i_bias: b, i_o: s, residual })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn synthetic(b: f64, s: f64, n: usize, lo: f64, hi: f64) -> (Vec<f64>, Vec<f64>) {
        let xs: Vec<f64> =
            (0..n).map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64).collect();
        let ys: Vec<f64> = xs.iter().map(|x| sigmoid((x - b) / s)).collect();
        (xs, ys)
    }

    #[test]
    fn recovers_exact_logistic() {
        let (xs, ys) = synthetic(5e-6, 1e-6, 15, 0.0, 10e-6);
        let fit = fit_sigmoid(&xs, &ys).unwrap();
        assert!((fit.i_bias - 5e-6).abs() / 5e-6 < 1e-6, "i_bias {}", fit.i_bias);
        assert!((fit.i_o - 1e-6).abs() / 1e-6 < 1e-6, "i_o {}", fit.i_o);
        assert!(fit.residual < 1e-9);
    }

    #[test]
    fn translation_shifts_bias_only() {
        let (xs, ys) = synthetic(5e-6, 1e-6, 15, 0.0, 10e-6);
        let shifted: Vec<f64> = xs.iter().map(|x| x + 3e-6).collect();
        let a = fit_sigmoid(&xs, &ys).unwrap();
        let b = fit_sigmoid(&shifted, &ys).unwrap();
        assert!((b.i_bias - a.i_bias - 3e-6).abs() < 1e-12);
        assert!((b.i_o - a.i_o).abs() / a.i_o < 1e-9);
    }

    #[test]
    fn rejects_non_spanning_data() {
        let xs: Vec<f64> = (0..10).map(|i| i as f64).collect();
        let ys: Vec<f64> = xs.iter().map(|x| sigmoid(x + 1.0)).collect();
        match fit_sigmoid(&xs, &ys) {
            Err(Error::InsufficientRange(_)) => {}
            other => panic!("expected InsufficientRange, got {other:?}"),
        }
    }

    #[test]
    fn tolerates_sampling_noise() {
        let (xs, ys) = synthetic(2e-6, 0.5e-6, 17, -1e-6, 5e-6);
        let noisy: Vec<f64> = ys
            .iter()
            .enumerate()
            .map(|(i, y)| {
                let wobble = ((i * 2654435761) % 7) as f64 / 6.0 - 0.5;
                (y + 0.03 * wobble).clamp(0.0, 1.0)
            })
            .collect();
        let fit = fit_sigmoid(&xs, &noisy).unwrap();
        assert!((fit.i_bias - 2e-6).abs() < 0.2e-6);
        assert!((fit.i_o - 0.5e-6).abs() < 0.15e-6);
        assert!(fit.residual < 0.05);
    }

    #[test]
    fn unsorted_input_is_handled() {
        let (mut xs, mut ys) = synthetic(1.0, 0.3, 11, -1.0, 3.0);
        xs.reverse();
        ys.reverse();
        let fit = fit_sigmoid(&xs, &ys).unwrap();
        assert!((fit.i_bias - 1.0).abs() < 1e-6);
    }
}
