use nalgebra::Vector3;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::frame::NvClassFrame;
use super::operators::{spin_vector, Operator3};
use crate::constants::PhysicalConstants;
use crate::error::{ensure, Result};

/// Static fields seen by one spin.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FieldConfiguration {
    /// Magnetic field in the crystal frame (G).
    pub b_gauss: Vector3<f64>,
    /// Transverse electric energy d⊥E⊥ (MHz).
    pub e_perp_mhz: f64,
    /// Azimuth of the electric mixing in the NV transverse plane (rad, [0, 2π)).
    pub phi_e: f64,
    /// Longitudinal electric energy d∥E∥ (MHz). Zero unless set explicitly.
    pub e_par_mhz: f64,
}

impl Default for FieldConfiguration {
    fn default() -> Self {
        Self {
            b_gauss: Vector3::zeros(),
            e_perp_mhz: 0.0,
            phi_e: 0.0,
            e_par_mhz: 0.0,
        }
    }
}

impl FieldConfiguration {
    pub fn new(b_gauss: Vector3<f64>, e_perp_mhz: f64, phi_e: f64) -> Result<Self> {
        let f = Self {
            b_gauss,
            e_perp_mhz,
            phi_e: phi_e.rem_euclid(std::f64::consts::TAU),
            e_par_mhz: 0.0,
        };
        f.validate()?;
        Ok(f)
    }

    pub fn magnetic(b_gauss: Vector3<f64>) -> Self {
        Self {
            b_gauss,
            ..Default::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        ensure(self.b_gauss.iter().all(|v| v.is_finite()), || {
            "magnetic field must be finite".into()
        })?;
        ensure(
            self.e_perp_mhz.is_finite() && self.e_perp_mhz >= 0.0,
            || format!("E_perp must be >= 0, got {}", self.e_perp_mhz),
        )?;
        ensure(
            self.phi_e.is_finite() && (0.0..std::f64::consts::TAU).contains(&self.phi_e),
            || format!("phi_E must lie in [0, 2π), got {}", self.phi_e),
        )?;
        ensure(self.e_par_mhz.is_finite(), || "E_par must be finite".into())
    }
}

/// Ground-state Hamiltonian `H/h` in GHz, expressed in the `{|−1⟩,|0⟩,|+1⟩}` basis of
/// `frame`.
///
/// The transverse electric term is `d⊥[Eₓ(Sy²−Sx²) + E_y(SxSy+SySx)]` with
/// `(Eₓ, E_y) = −E⊥(cos φ_E, sin φ_E)`, so that at zero magnetic field the upper state
/// is `|+⟩ = (|+1⟩ + e^{−iφ_E}|−1⟩)/√2`. The longitudinal term `d∥E∥(Sz² − 2/3)` is
/// traceless, hence `tr H = 2D` always.
pub fn build_hamiltonian(
    frame: &NvClassFrame,
    field: &FieldConfiguration,
    constants: &PhysicalConstants,
) -> Result<Operator3> {
    frame.validate()?;
    field.validate()?;
    constants.validate()?;

    let [sx, sy, sz] = spin_vector();
    let sz2 = sz * sz;
    let b = frame.project(&field.b_gauss) * constants.gamma_e_ghz_per_gauss();
    let c = |v: f64| Complex64::new(v, 0.0);

    let mut h = sz2 * c(constants.zfs_ghz);
    h += sx * c(b.x) + sy * c(b.y) + sz * c(b.z);

    let e = field.e_perp_mhz * 1e-3;
    if e != 0.0 {
        let (s, co) = field.phi_e.sin_cos();
        let ex = -e * co;
        let ey = -e * s;
        h += (sy * sy - sx * sx) * c(ex) + (sx * sy + sy * sx) * c(ey);
    }
    if field.e_par_mhz != 0.0 {
        let shift = sz2 - Operator3::identity() * c(2.0 / 3.0);
        h += shift * c(field.e_par_mhz * 1e-3);
    }
    Ok(h)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spin::frame::NvClass;
    use crate::spin::operators::hermiticity_defect;

    fn frame() -> NvClassFrame {
        NvClassFrame::canonical(NvClass::C1)
    }

    #[test]
    fn zero_field_is_d_sz2() {
        let h = build_hamiltonian(&frame(), &Default::default(), &Default::default()).unwrap();
        let expect = [2.87, 0.0, 2.87];
        for i in 0..3 {
            for j in 0..3 {
                let e = if i == j { expect[i] } else { 0.0 };
                assert!((h[(i, j)] - Complex64::new(e, 0.0)).norm() < 1e-15);
            }
        }
    }

    #[test]
    fn electric_block_coupling() {
        // ⟨+1|H|−1⟩ = E⊥ e^{iφ}
        let phi = 0.7;
        let f = FieldConfiguration::new(Vector3::zeros(), 4.0, phi).unwrap();
        let h = build_hamiltonian(&frame(), &f, &Default::default()).unwrap();
        let expect = Complex64::from_polar(0.004, phi);
        assert!((h[(2, 0)] - expect).norm() < 1e-15);
        assert!(hermiticity_defect(&h) < 1e-15);
    }

    #[test]
    fn longitudinal_electric_is_traceless() {
        let f = FieldConfiguration {
            e_par_mhz: 3.0,
            ..Default::default()
        };
        let h = build_hamiltonian(&frame(), &f, &Default::default()).unwrap();
        assert!((h.trace().re - 2.0 * 2.87).abs() < 1e-14);
        assert!((h[(1, 1)].re + 0.002).abs() < 1e-15);
    }

    #[test]
    fn invalid_frame_rejected() {
        let mut f = frame();
        f.x *= 1.1;
        let err = build_hamiltonian(&f, &Default::default(), &Default::default());
        assert!(matches!(err, Err(crate::Error::InvalidFrame(_))));
    }

    #[test]
    fn negative_e_perp_rejected() {
        assert!(FieldConfiguration::new(Vector3::zeros(), -1.0, 0.0).is_err());
    }
}
