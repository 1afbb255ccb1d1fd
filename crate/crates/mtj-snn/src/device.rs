//! SHE-MTJ device geometry and material parameters.

use serde::{Deserialize, Serialize};

use crate::constants::CONSTANTS;
use crate::demag::demag_factors_rect_prism;
use crate::error::{Error, Result};

/// Geometry, magnetic and spin-Hall parameters of one SHE-MTJ.
///
/// Axis conventions: the free-layer easy axis (length) lies along x, the
/// in-plane hard axis (width) along y, the film normal along z. The pinned
/// layer points along +x, so the parallel (P) state has `m_x > 0` and the
/// anti-parallel (AP) state `m_x < 0`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DeviceParams {
    /// Free layer width, m (in-plane hard axis, y).
    pub free_layer_width: f64,
    /// Free layer length, m (easy axis, x).
    pub free_layer_length: f64,
    /// Free layer thickness, m (z).
    pub free_layer_thickness: f64,
    /// Heavy-metal underlayer thickness, m.
    pub hm_thickness: f64,
    /// Heavy-metal strip width, m. Defaults to the free layer width.
    pub hm_width: f64,
    /// Heavy-metal resistivity, ohm·m.
    pub hm_resistivity: f64,
    /// Saturation magnetization, A/m.
    pub saturation_magnetization: f64,
    /// Gilbert damping constant.
    pub gilbert_damping: f64,
    /// Spin-Hall angle of the heavy metal.
    pub spin_hall_angle: f64,
    /// Spin-flip length of the heavy metal, m.
    pub spin_flip_length: f64,
    /// Operating temperature, K.
    pub temperature: f64,
    /// MTJ resistance in the parallel state, ohm.
    pub mgo_resistance_p: f64,
    /// MTJ resistance in the anti-parallel state, ohm.
    pub mgo_resistance_ap: f64,
    /// Demagnetization factors (Nxx, Nyy, Nzz). Computed from the geometry
    /// at construction; may be overridden afterwards.
    pub demag_factors: (f64, f64, f64),
}

/// Default heavy-metal resistivity, ohm·m (tungsten thin-film range).
pub const DEFAULT_HM_RESISTIVITY: f64 = 0.6e-6;

/// Default spin-flip length of the heavy metal, m (beta-tungsten range).
pub const DEFAULT_SPIN_FLIP_LENGTH: f64 = 1.0e-9;

impl DeviceParams {
    /// Build a device from its free-layer geometry, filling in shared
    /// material defaults and computing demagnetization factors.
    pub fn new(
        length: f64,
        width: f64,
        thickness: f64,
        saturation_magnetization: f64,
    ) -> Result<Self> {
        let demag = demag_factors_rect_prism(length, width, thickness)?;
        let params = Self {
            free_layer_width: width,
            free_layer_length: length,
            free_layer_thickness: thickness,
            hm_thickness: 2e-9,
            hm_width: width,
            hm_resistivity: DEFAULT_HM_RESISTIVITY,
            saturation_magnetization,
            gilbert_damping: 0.0122,
            spin_hall_angle: 0.3,
            spin_flip_length: DEFAULT_SPIN_FLIP_LENGTH,
            temperature: 300.0,
            mgo_resistance_p: 10e3,
            mgo_resistance_ap: 25e3,
            demag_factors: demag,
        };
        params.validate()?;
        Ok(params)
    }

    /// Reference telegraphic device, nominal 1 kBT barrier
    /// (25 nm x 10 nm x 0.8 nm, Ms = 750 kA/m).
    pub fn reference_1kbt() -> Self {
        Self::new(25e-9, 10e-9, 0.8e-9, 7.5e5).expect("reference geometry")
    }

    /// Reference telegraphic device, nominal 2 kBT barrier
    /// (42.5 nm x 17 nm x 0.8 nm, Ms = 750 kA/m).
    pub fn reference_2kbt() -> Self {
        Self::new(42.5e-9, 17e-9, 0.8e-9, 7.5e5).expect("reference geometry")
    }

    /// Reference clocked device, nominal 10 kBT barrier
    /// (75 nm x 30 nm x 1.2 nm, Ms = 1000 kA/m).
    pub fn reference_10kbt() -> Self {
        Self::new(75e-9, 30e-9, 1.2e-9, 1.0e6).expect("reference geometry")
    }

    /// Reference clocked device, nominal 20 kBT barrier
    /// (100 nm x 40 nm x 1.2 nm, Ms = 1000 kA/m).
    pub fn reference_20kbt() -> Self {
        Self::new(100e-9, 40e-9, 1.2e-9, 1.0e6).expect("reference geometry")
    }

    /// Look up a reference device by name: "1kbt", "2kbt", "10kbt", "20kbt".
    pub fn preset(name: &str) -> Result<Self> {
        match name {
            "1kbt" => Ok(Self::reference_1kbt()),
            "2kbt" => Ok(Self::reference_2kbt()),
            "10kbt" => Ok(Self::reference_10kbt()),
            "20kbt" => Ok(Self::reference_20kbt()),
            other => Err(Error::invalid_argument(format!(
                "unknown device preset '{other}' (expected 1kbt, 2kbt, 10kbt or 20kbt)"
            ))),
        }
    }

    /// Replace the computed demagnetization factors with explicit values.
    pub fn with_demag_factors(mut self, factors: (f64, f64, f64)) -> Result<Self> {
        self.demag_factors = factors;
        self.validate()?;
        Ok(self)
    }

    pub fn with_temperature(mut self, temperature: f64) -> Result<Self> {
        self.temperature = temperature;
        self.validate()?;
        Ok(self)
    }

    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("free_layer_width", self.free_layer_width),
            ("free_layer_length", self.free_layer_length),
            ("free_layer_thickness", self.free_layer_thickness),
            ("hm_thickness", self.hm_thickness),
            ("hm_width", self.hm_width),
            ("hm_resistivity", self.hm_resistivity),
            ("saturation_magnetization", self.saturation_magnetization),
            ("spin_flip_length", self.spin_flip_length),
            ("temperature", self.temperature),
        ];
        for (name, v) in positive {
            if !(v > 0.0) || !v.is_finite() {
                return Err(Error::invalid_argument(format!("{name} must be > 0, got {v}")));
            }
        }
        if !(self.gilbert_damping > 0.0 && self.gilbert_damping < 1.0) {
            return Err(Error::invalid_argument(format!(
                "gilbert_damping must lie in (0, 1), got {}",
                self.gilbert_damping
            )));
        }
        if !(0.0..=1.0).contains(&self.spin_hall_angle) {
            return Err(Error::invalid_argument(format!(
                "spin_hall_angle must lie in [0, 1], got {}",
                self.spin_hall_angle
            )));
        }
        if !(self.mgo_resistance_ap > self.mgo_resistance_p && self.mgo_resistance_p > 0.0) {
            return Err(Error::invalid_argument(
                "MTJ resistances must satisfy R_AP > R_P > 0".to_string(),
            ));
        }
        let (nx, ny, nz) = self.demag_factors;
        if (nx + ny + nz - 1.0).abs() > 1e-6 {
            return Err(Error::InvalidGeometry(format!(
                "demag factors must sum to 1, got {}",
                nx + ny + nz
            )));
        }
        Ok(())
    }

    /// Free-layer volume, m^3.
    pub fn volume(&self) -> f64 {
        self.free_layer_length * self.free_layer_width * self.free_layer_thickness
    }

    /// Spin-polarization efficiency of the heavy metal / free layer stack:
    /// the ratio of generated spin current to charge current,
    /// `(pi w / 4 t) * theta_she * (1 - sech(t / lambda_sf))`.
    pub fn she_efficiency(&self) -> f64 {
        let t = self.hm_thickness;
        let sech = 1.0 / (t / self.spin_flip_length).cosh();
        (std::f64::consts::PI * self.free_layer_width / (4.0 * t))
            * self.spin_hall_angle
            * (1.0 - sech)
    }

    /// Torque field amplitude per ampere of charge current, (A/m)/A.
    ///
    /// The charge current generates a transverse spin current
    /// `I_s = she_efficiency() * I`; absorbed over the free-layer area it
    /// exerts a damping-like torque with field amplitude
    /// `hbar * I_s / (2 e mu0 Ms V)`.
    pub fn torque_field_per_amp(&self) -> f64 {
        let c = CONSTANTS;
        c.hbar * self.she_efficiency()
            / (2.0 * c.e_charge * c.mu0 * self.saturation_magnetization * self.volume())
    }

    /// Resistance of the heavy-metal strip under the free layer, ohm.
    pub fn hm_resistance(&self) -> f64 {
        self.hm_resistivity * self.free_layer_length / (self.hm_width * self.hm_thickness)
    }

    /// In-plane shape-anisotropy field `Ms (Nyy - Nxx)`, A/m.
    pub fn anisotropy_field(&self) -> f64 {
        let (nx, ny, _) = self.demag_factors;
        self.saturation_magnetization * (ny - nx)
    }

    /// Thermal-field standard deviation per component for time step `dt`, A/m.
    pub fn thermal_field_sigma(&self, dt: f64) -> f64 {
        if self.temperature == 0.0 {
            return 0.0;
        }
        let c = CONSTANTS;
        (2.0 * self.gilbert_damping * c.kb * self.temperature
            / (c.mu0 * c.gamma_ll() * self.saturation_magnetization * self.volume() * dt))
            .sqrt()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn presets_validate() {
        for name in ["1kbt", "2kbt", "10kbt", "20kbt"] {
            let d = DeviceParams::preset(name).unwrap();
            d.validate().unwrap();
            let (nx, ny, nz) = d.demag_factors;
            assert!(nx < ny && ny < nz);
        }
        assert!(DeviceParams::preset("5kbt").is_err());
    }

    #[test]
    fn she_efficiency_saturates_for_thick_hm() {
        // t >> lambda_sf: sech -> 0, efficiency -> pi w theta / (4 t)
        let mut d = DeviceParams::reference_20kbt();
        d.spin_flip_length = 1e-12;
        let expected = std::f64::consts::PI * d.free_layer_width * d.spin_hall_angle
            / (4.0 * d.hm_thickness);
        assert!((d.she_efficiency() - expected).abs() / expected < 1e-9);
    }

    #[test]
    fn she_efficiency_vanishes_for_thin_hm() {
        // Series expansion: eps -> pi w theta t / (8 lambda_sf^2) as t -> 0.
        let mut d = DeviceParams::reference_20kbt();
        for t in [1e-11, 1e-12, 1e-13] {
            d.hm_thickness = t;
            let leading = std::f64::consts::PI * d.free_layer_width * d.spin_hall_angle * t
                / (8.0 * d.spin_flip_length * d.spin_flip_length);
            let got = d.she_efficiency();
            assert!(
                (got - leading).abs() / leading < 1e-2,
                "t={t}: got {got}, leading {leading}"
            );
        }
    }

    #[test]
    fn she_efficiency_reference_value() {
        // Independent one-line evaluation for the 40 nm wide device with
        // t = 2 nm, theta = 0.3, lambda_sf = 1.0 nm:
        // pi*40/(4*2)*0.3*(1 - sech(2/1.0)) = 3.459828...
        let d = DeviceParams::reference_20kbt();
        assert!((d.she_efficiency() - 3.459828).abs() < 1e-4);
    }

    #[test]
    fn thermal_sigma_scaling() {
        let d = DeviceParams::reference_1kbt();
        let s1 = d.thermal_field_sigma(1e-12);
        // Halving the volume scales sigma by sqrt(2).
        let mut half = d.clone();
        half.free_layer_length /= 2.0;
        let s2 = half.thermal_field_sigma(1e-12);
        assert!((s2 / s1 - std::f64::consts::SQRT_2).abs() < 1e-12);
        // Frozen plug-in value for the 1 kBT device at 300 K, dt = 1 ps:
        // sqrt(2*0.0122*kB*300 / (mu0 * gamma_ll * 7.5e5 * 2e-25 * 1e-12))
        assert!((s1 - 4.9224e4).abs() / 4.9224e4 < 1e-3);
        // Zero temperature switches the noise off entirely.
        let cold = d.with_temperature(1e-300).unwrap();
        assert!(cold.thermal_field_sigma(1e-12) < 1.0);
    }

    #[test]
    fn hm_resistance_reference() {
        // rho L / (w t) = 0.6e-6 * 75e-9 / (30e-9 * 2e-9) = 750 ohm
        let d = DeviceParams::reference_10kbt();
        assert!((d.hm_resistance() - 750.0).abs() < 1e-9);
    }

    #[test]
    fn rejects_bad_resistances() {
        let mut d = DeviceParams::reference_10kbt();
        d.mgo_resistance_ap = d.mgo_resistance_p;
        assert!(d.validate().is_err());
    }
}
