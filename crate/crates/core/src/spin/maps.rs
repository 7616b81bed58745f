use nalgebra::Vector3;
use serde::Serialize;

use super::eigen::diagonalize_with_reference;
use super::frame::{NvClass, NvClassFrame};
use super::hamiltonian::{build_hamiltonian, FieldConfiguration};
use crate::constants::PhysicalConstants;
use crate::error::{ensure, Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EigenMapCell {
    pub b_gauss: f64,
    pub theta_rad: f64,
    pub overlap_e_p1: f64,
    pub overlap_e_plus: f64,
    pub overlap_g_zero: f64,
    pub overlap_d_minus: f64,
}

/// Closeness of `|e⟩` to `|+1⟩` and `|+⟩` over a grid of field amplitude and polar angle θ
/// (relative to the NV axis). The transverse field component and the electric mixing both
/// lie along the frame's x̂ (φ_E = 0).
pub fn eigenstate_map(
    class: NvClass,
    b_grid_gauss: &[f64],
    theta_grid_rad: &[f64],
    e_perp_mhz: f64,
    constants: &PhysicalConstants,
) -> Result<Vec<EigenMapCell>> {
    ensure(
        !b_grid_gauss.is_empty() && !theta_grid_rad.is_empty(),
        || "eigenstate map grids must be non-empty".into(),
    )?;
    ensure(
        b_grid_gauss.iter().all(|b| b.is_finite() && *b >= 0.0),
        || "field amplitudes must be finite and >= 0".into(),
    )?;
    ensure(theta_grid_rad.iter().all(|t| t.is_finite()), || {
        "angles must be finite".into()
    })?;

    let frame = NvClassFrame::canonical(class);
    let mut out = Vec::with_capacity(b_grid_gauss.len() * theta_grid_rad.len());
    for &b in b_grid_gauss {
        for &theta in theta_grid_rad {
            let (s, c) = theta.sin_cos();
            let field = FieldConfiguration::new((frame.x * s + frame.z * c) * b, e_perp_mhz, 0.0)?;
            let h = build_hamiltonian(&frame, &field, constants)?;
            let sys = diagonalize_with_reference(&h, 0.0)?;
            out.push(EigenMapCell {
                b_gauss: b,
                theta_rad: theta,
                overlap_e_p1: sys.overlaps.e_p1,
                overlap_e_plus: sys.overlaps.e_plus,
                overlap_g_zero: sys.overlaps.g_zero,
                overlap_d_minus: sys.overlaps.d_minus,
            });
        }
    }
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TransverseScanPoint {
    pub b_perp_gauss: f64,
    /// Energies of g, d, e (GHz).
    pub energies_ghz: [f64; 3],
    /// `ν₊ − ν₋` (MHz).
    pub splitting_mhz: f64,
    /// `|⟨e|+⟩|²`
    pub matching: f64,
}

/// Spectrum of one class under a purely transverse magnetic field. `direction` is given in
/// the crystal frame and must be orthogonal to the class axis. The electric mixing is taken
/// parallel to the transverse field: a field at azimuth α couples `|+1⟩` and `|−1⟩` at second
/// order through `e^{−2iα}`, so `φ_E = −2α`.
pub fn transverse_field_scan(
    frame: &NvClassFrame,
    direction: &Vector3<f64>,
    b_perp_grid_gauss: &[f64],
    e_perp_mhz: f64,
    constants: &PhysicalConstants,
) -> Result<Vec<TransverseScanPoint>> {
    frame.validate()?;
    ensure(!b_perp_grid_gauss.is_empty(), || {
        "field grid must be non-empty".into()
    })?;
    let n = direction.norm();
    ensure(n.is_finite() && n > 0.0, || {
        "direction must be non-zero".into()
    })?;
    let dir = direction / n;
    let along_axis = dir.dot(&frame.z);
    if along_axis.abs() > 1e-9 {
        return Err(Error::InvalidInput(format!(
            "field direction is not transverse to the NV axis (cos = {along_axis:e})"
        )));
    }
    let azimuth = dir.dot(&frame.y).atan2(dir.dot(&frame.x));
    let phi = (-2.0 * azimuth).rem_euclid(std::f64::consts::TAU);

    b_perp_grid_gauss
        .iter()
        .map(|&b| {
            ensure(b.is_finite() && b >= 0.0, || {
                format!("field amplitude must be >= 0, got {b}")
            })?;
            let field = FieldConfiguration::new(dir * b, e_perp_mhz, phi)?;
            let h = build_hamiltonian(frame, &field, constants)?;
            let sys = diagonalize_with_reference(&h, phi)?;
            Ok(TransverseScanPoint {
                b_perp_gauss: b,
                energies_ghz: sys.energies,
                splitting_mhz: sys.splitting_mhz(),
                matching: sys.overlaps.e_plus,
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn map_zero_field_is_plus_basis() {
        let cells = eigenstate_map(
            NvClass::C2,
            &[0.0],
            &[0.0, 0.4, 1.2],
            4.0,
            &Default::default(),
        )
        .unwrap();
        for c in cells {
            assert!((c.overlap_e_plus - 1.0).abs() < 1e-12);
            assert!((c.overlap_e_p1 - 0.5).abs() < 1e-12);
        }
    }

    #[test]
    fn empty_grid_rejected() {
        assert!(eigenstate_map(NvClass::C1, &[], &[0.0], 4.0, &Default::default()).is_err());
        assert!(eigenstate_map(NvClass::C1, &[-1.0], &[0.0], 4.0, &Default::default()).is_err());
    }

    #[test]
    fn non_transverse_direction_rejected() {
        let f = NvClassFrame::canonical(NvClass::C1);
        let d = f.x + f.z * 0.01;
        let r = transverse_field_scan(&f, &d, &[10.0], 4.0, &Default::default());
        assert!(matches!(r, Err(Error::InvalidInput(_))));
    }

    #[test]
    fn scan_along_y_matches_scan_along_x() {
        let f = NvClassFrame::canonical(NvClass::C3);
        let c = PhysicalConstants::default();
        let a = transverse_field_scan(&f, &f.x, &[0.0, 50.0, 150.0], 4.0, &c).unwrap();
        let b = transverse_field_scan(&f, &f.y, &[0.0, 50.0, 150.0], 4.0, &c).unwrap();
        for (p, q) in a.iter().zip(&b) {
            assert!((p.splitting_mhz - q.splitting_mhz).abs() < 1e-9);
            assert!((p.matching - q.matching).abs() < 1e-12);
        }
    }
}
