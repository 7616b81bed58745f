use serde::{Deserialize, Serialize};

use crate::error::{ensure, Result};

/// Material constants of the NV⁻ ground state.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PhysicalConstants {
    /// Zero-field splitting D (GHz).
    pub zfs_ghz: f64,
    /// Electron gyromagnetic ratio (MHz/G).
    pub gamma_e_mhz_per_gauss: f64,
    /// Transverse electric susceptibility d⊥ (Hz·cm/V).
    pub d_perp_hz_cm_per_v: f64,
    /// Longitudinal electric susceptibility d∥ (Hz·cm/V).
    pub d_par_hz_cm_per_v: f64,
    /// Dipolar strength J0 (MHz·nm³).
    pub j0_mhz_nm3: f64,
}

impl Default for PhysicalConstants {
    fn default() -> Self {
        Self {
            zfs_ghz: 2.87,
            gamma_e_mhz_per_gauss: 2.8,
            d_perp_hz_cm_per_v: 17.0,
            d_par_hz_cm_per_v: 0.35,
            j0_mhz_nm3: 52.0,
        }
    }
}

impl PhysicalConstants {
    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("zfs_ghz", self.zfs_ghz),
            ("gamma_e_mhz_per_gauss", self.gamma_e_mhz_per_gauss),
            ("d_perp_hz_cm_per_v", self.d_perp_hz_cm_per_v),
            ("d_par_hz_cm_per_v", self.d_par_hz_cm_per_v),
            ("j0_mhz_nm3", self.j0_mhz_nm3),
        ] {
            ensure(v.is_finite() && v > 0.0, || {
                format!("{name} must be finite and > 0, got {v}")
            })?;
        }
        Ok(())
    }

    /// Gyromagnetic ratio in GHz/G.
    pub fn gamma_e_ghz_per_gauss(&self) -> f64 {
        self.gamma_e_mhz_per_gauss * 1e-3
    }

    /// Transverse electric energy d⊥E⊥ in MHz for a field in V/cm.
    pub fn transverse_electric_mhz(&self, e_field_v_per_cm: f64) -> f64 {
        self.d_perp_hz_cm_per_v * e_field_v_per_cm * 1e-6
    }

    /// Longitudinal electric energy d∥E∥ in MHz for a field in V/cm.
    pub fn longitudinal_electric_mhz(&self, e_field_v_per_cm: f64) -> f64 {
        self.d_par_hz_cm_per_v * e_field_v_per_cm * 1e-6
    }

    /// J0 as an angular frequency scale, rad/s·nm³.
    pub fn j0_rad_per_s_nm3(&self) -> f64 {
        2.0 * std::f64::consts::PI * self.j0_mhz_nm3 * 1e6
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_are_positive() {
        let c = PhysicalConstants::default();
        c.validate().unwrap();
        assert_eq!(c.zfs_ghz, 2.87);
        assert!((c.transverse_electric_mhz(1.0e5) - 1.7).abs() < 1e-12);
    }

    #[test]
    fn rejects_non_positive() {
        let c = PhysicalConstants {
            j0_mhz_nm3: 0.0,
            ..Default::default()
        };
        assert!(c.validate().is_err());
    }
}
