//! Physical constants (CODATA 2018 values).

/// Fixed set of physical constants used by the magnetization dynamics.
///
/// Immutable by construction; use [`PhysicalConstants::default`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhysicalConstants {
    /// Electron gyromagnetic ratio, rad/(s·T).
    pub gamma: f64,
    /// Reduced Planck constant, J·s.
    pub hbar: f64,
    /// Elementary charge, C.
    pub e_charge: f64,
    /// Vacuum permeability, T·m/A.
    pub mu0: f64,
    /// Boltzmann constant, J/K.
    pub kb: f64,
}

impl PhysicalConstants {
    pub const fn new() -> Self {
        Self {
            gamma: 1.760_859_630_23e11,
            hbar: 1.054_571_817e-34,
            e_charge: 1.602_176_634e-19,
            mu0: 1.256_637_062_12e-6,
            kb: 1.380_649e-23,
        }
    }

    /// Gyromagnetic ratio in Landau-Lifshitz form, m/(A·s).
    ///
    /// Fields are carried in A/m throughout the crate, so precession
    /// rates are `gamma_ll() * H` rather than `gamma * B`.
    pub fn gamma_ll(&self) -> f64 {
        self.gamma * self.mu0
    }
}

impl Default for PhysicalConstants {
    fn default() -> Self {
        Self::new()
    }
}

/// Crate-wide constants instance.
pub const CONSTANTS: PhysicalConstants = PhysicalConstants::new();

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gamma_ll_value() {
        // 1.7609e11 * 1.2566e-6 ~ 2.2128e5 m/(A s)
        let g = CONSTANTS.gamma_ll();
        assert!((g - 2.2128e5).abs() / 2.2128e5 < 1e-3);
    }
}
