//! Physical parameters and the unit convention.
//!
//! Lengths are in μm and times in μs throughout. Energies appear only as
//! rates `E/ħ`, so ħ and the mass enter through `alpha = ħ/m` alone.

use crate::error::{Error, Result};

/// Reduced Planck constant in J s.
pub const HBAR_SI: f64 = 1.0546e-34;
/// Mass of a Cesium atom in kg.
pub const CESIUM_MASS_SI: f64 = 2.2069e-25;
/// m²/s expressed in μm²/μs.
const M2_PER_S_IN_UM2_PER_US: f64 = 1e6;

/// ħ/m in μm²/μs for a particle of the given mass in kg.
pub fn alpha_for_mass(mass_kg: f64) -> f64 {
    HBAR_SI / mass_kg * M2_PER_S_IN_UM2_PER_US
}

/// ħ/m for Cesium, about 4.7786e-4 μm²/μs.
pub fn cesium_alpha() -> f64 {
    alpha_for_mass(CESIUM_MASS_SI)
}

/// Convert a velocity in cm/s to μm/μs.
pub fn cm_per_s_to_um_per_us(v: f64) -> f64 {
    v * 1e-2
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhysicalConfig {
    /// Decay rate of the excited level, μs⁻¹ (angular).
    pub gamma: f64,
    /// Rabi frequency, μs⁻¹.
    pub omega: f64,
    /// ħ/m, μm²/μs.
    pub alpha: f64,
    /// Energy per unit rate; 1 in internal units, kept for reporting only.
    pub hbar_scale: f64,
}

impl PhysicalConfig {
    /// `gamma = 0` is accepted only together with `omega = 0` (free motion).
    pub fn new(gamma: f64, omega: f64, alpha: f64) -> Result<Self> {
        let cfg = Self { gamma, omega, alpha, hbar_scale: 1.0 };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn cesium(gamma: f64, omega: f64) -> Result<Self> {
        Self::new(gamma, omega, cesium_alpha())
    }

    pub fn validate(&self) -> Result<()> {
        let finite = self.gamma.is_finite() && self.omega.is_finite() && self.alpha.is_finite();
        if !finite {
            return Err(Error::InvalidConfig("parameters must be finite".into()));
        }
        if self.alpha <= 0.0 {
            return Err(Error::InvalidConfig(format!("alpha must be positive, got {}", self.alpha)));
        }
        if self.omega < 0.0 {
            return Err(Error::InvalidConfig(format!("omega must be non-negative, got {}", self.omega)));
        }
        if self.gamma < 0.0 || (self.gamma == 0.0 && self.omega != 0.0) {
            return Err(Error::InvalidConfig(format!(
                "gamma must be positive (or zero together with omega), got {}",
                self.gamma
            )));
        }
        Ok(())
    }

    /// True when the laser does not couple the levels.
    pub fn is_free(&self) -> bool {
        self.omega == 0.0
    }

    /// `E/ħ` for wavenumber `k`, μs⁻¹.
    pub fn energy_rate(&self, k: f64) -> f64 {
        0.5 * self.alpha * k * k
    }

    /// Wavenumber of a particle moving with velocity `v`.
    pub fn wavenumber(&self, v: f64) -> f64 {
        v / self.alpha
    }

    pub fn with_gamma(mut self, gamma: f64) -> Self {
        self.gamma = gamma;
        self
    }

    pub fn with_omega(mut self, omega: f64) -> Self {
        self.omega = omega;
        self
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cesium_alpha_value() {
        let a = cesium_alpha();
        assert!((a - 4.7786e-4).abs() < 1e-7, "{a}");
    }

    #[test]
    fn rejects_bad_parameters() {
        assert!(PhysicalConfig::new(1.0, -1.0, 1.0).is_err());
        assert!(PhysicalConfig::new(1.0, 1.0, 0.0).is_err());
        assert!(PhysicalConfig::new(0.0, 1.0, 1.0).is_err());
        assert!(PhysicalConfig::new(f64::NAN, 1.0, 1.0).is_err());
        assert!(PhysicalConfig::new(0.0, 0.0, 1.0).is_ok());
    }

    #[test]
    fn velocity_conversion() {
        assert!((cm_per_s_to_um_per_us(9.0297) - 0.090297).abs() < 1e-15);
        let cfg = PhysicalConfig::cesium(33.3, 0.0).unwrap();
        assert!((cfg.wavenumber(0.090297) - 189.0).abs() < 0.1);
    }
}
