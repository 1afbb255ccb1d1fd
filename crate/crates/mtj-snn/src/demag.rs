//! Demagnetization factors of a uniformly magnetized rectangular prism.
//!
//! Closed-form expressions follow the analytical treatment of
//! magnetometric demagnetizing factors for rectangular ferromagnetic
//! prisms. Factors satisfy `Nxx + Nyy + Nzz = 1` and the largest factor
//! lies along the shortest edge.

use crate::error::{Error, Result};

/// Demagnetization factor along z for a prism with full edge lengths
/// `(ax, ay, az)` along x, y, z.
///
/// `Nxx`/`Nyy` follow by cyclic permutation of the arguments.
pub fn factor_along_z(ax: f64, ay: f64, az: f64) -> f64 {
    // Half-lengths; the closed form is written for a 2a x 2b x 2c prism.
    let a = 0.5 * ax;
    let b = 0.5 * ay;
    let c = 0.5 * az;

    let r = (a * a + b * b + c * c).sqrt();
    let rab = (a * a + b * b).sqrt();
    let rbc = (b * b + c * c).sqrt();
    let rac = (a * a + c * c).sqrt();

    let mut t = 0.0;
    t += (b * b - c * c) / (2.0 * b * c) * ((r - a) / (r + a)).ln();
    t += (a * a - c * c) / (2.0 * a * c) * ((r - b) / (r + b)).ln();
    t += b / (2.0 * c) * ((rab + a) / (rab - a)).ln();
    t += a / (2.0 * c) * ((rab + b) / (rab - b)).ln();
    t += c / (2.0 * a) * ((rbc - b) / (rbc + b)).ln();
    t += c / (2.0 * b) * ((rac - a) / (rac + a)).ln();
    t += 2.0 * (a * b).atan2(c * r);
    t += (a.powi(3) + b.powi(3) - 2.0 * c.powi(3)) / (3.0 * a * b * c);
    t += (a * a + b * b - 2.0 * c * c) / (3.0 * a * b * c) * r;
    t += c / (a * b) * (rac + rbc);
    t -= (rab.powi(3) + rbc.powi(3) + rac.powi(3)) / (3.0 * a * b * c);
    t / std::f64::consts::PI
}

/// Demagnetization factors `(Nxx, Nyy, Nzz)` of a rectangular prism with
/// the given full edge lengths (meters, or any common unit).
///
/// Conventions used throughout the crate: `length` lies along x (the
/// in-plane easy axis), `width` along y, `thickness` along z.
pub fn demag_factors_rect_prism(length: f64, width: f64, thickness: f64) -> Result<(f64, f64, f64)> {
    if length <= 0.0 || width <= 0.0 || thickness <= 0.0 {
        return Err(Error::invalid_argument(format!(
            "prism dimensions must be positive, got ({length}, {width}, {thickness})"
        )));
    }
    // Cycle the arguments so the requested axis sits in the "z slot".
    let nxx = factor_along_z(width, thickness, length);
    let nyy = factor_along_z(thickness, length, width);
    let nzz = factor_along_z(length, width, thickness);
    Ok((nxx, nyy, nzz))
}
