use nalgebra::SymmetricEigen;
use num_complex::Complex64;
use serde::Serialize;

use super::operators::{
    hermiticity_defect, ket_0, ket_m1, ket_minus, ket_p1, ket_plus, overlap_sq, Ket3, Operator3,
};
use crate::error::{Error, Result};

const HERMITIAN_TOL: f64 = 1e-10;
const DEGENERACY_TOL: f64 = 1e-9;

/// Overlaps of the eigenstates with the reference kets.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct StateOverlaps {
    /// `|⟨e|+1⟩|²`
    pub e_p1: f64,
    /// `|⟨e|+⟩|²`
    pub e_plus: f64,
    /// `|⟨g|0⟩|²`
    pub g_zero: f64,
    /// `|⟨d|−⟩|²`
    pub d_minus: f64,
}

/// Eigen-decomposition of a single-spin Hamiltonian; index 0/1/2 ↔ g/d/e.
#[derive(Debug, Clone, PartialEq)]
pub struct SpinEigensystem {
    /// Energies in GHz, ascending.
    pub energies: [f64; 3],
    /// Orthonormal eigenvectors in the `{|−1⟩,|0⟩,|+1⟩}` basis.
    pub states: [Ket3; 3],
    pub overlaps: StateOverlaps,
    /// Largest `‖Hv − Ev‖` over the three pairs.
    pub residual: f64,
}

impl SpinEigensystem {
    pub fn ground(&self) -> &Ket3 {
        &self.states[0]
    }

    pub fn middle(&self) -> &Ket3 {
        &self.states[1]
    }

    pub fn upper(&self) -> &Ket3 {
        &self.states[2]
    }

    /// Transition frequencies `(g→d, g→e)` in GHz.
    pub fn transitions_ghz(&self) -> (f64, f64) {
        (
            self.energies[1] - self.energies[0],
            self.energies[2] - self.energies[0],
        )
    }

    /// `ν(g→e) − ν(g→d)` in MHz.
    pub fn splitting_mhz(&self) -> f64 {
        (self.energies[2] - self.energies[1]) * 1e3
    }

    /// Recompute overlaps against `|±⟩` built with azimuth `phi`.
    pub fn overlaps_for(&self, phi: f64) -> StateOverlaps {
        StateOverlaps {
            e_p1: overlap_sq(&self.states[2], &ket_p1()),
            e_plus: overlap_sq(&self.states[2], &ket_plus(phi)),
            g_zero: overlap_sq(&self.states[0], &ket_0()),
            d_minus: overlap_sq(&self.states[1], &ket_minus(phi)),
        }
    }
}

fn operator_norm_bound(h: &Operator3) -> f64 {
    h.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

/// Diagonalize a 3×3 Hermitian operator. Reference kets `|±⟩` use azimuth 0.
pub fn diagonalize(h: &Operator3) -> Result<SpinEigensystem> {
    diagonalize_with_reference(h, 0.0)
}

/// Diagonalize with `|±⟩ = (|+1⟩ ± e^{−iφ}|−1⟩)/√2` as reference kets, used both for the
/// reported overlaps and for resolving exact degeneracies (priority `|0⟩, |−⟩, |+⟩`).
pub fn diagonalize_with_reference(h: &Operator3, phi: f64) -> Result<SpinEigensystem> {
    let scale = operator_norm_bound(h).max(1.0);
    if !h.iter().all(|z| z.re.is_finite() && z.im.is_finite()) {
        return Err(Error::InvalidInput(
            "Hamiltonian has non-finite entries".into(),
        ));
    }
    let deviation = hermiticity_defect(h);
    if deviation > HERMITIAN_TOL * scale {
        return Err(Error::NotHermitian { deviation });
    }
    let sym = (h + h.adjoint()) * Complex64::new(0.5, 0.0);
    let eig = SymmetricEigen::new(sym);

    let mut order = [0usize, 1, 2];
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let mut energies = [0.0; 3];
    let mut states = [Ket3::zeros(); 3];
    for (slot, &k) in order.iter().enumerate() {
        energies[slot] = eig.eigenvalues[k];
        states[slot] = eig.eigenvectors.column(k).into_owned();
    }

    resolve_degeneracies(&energies, &mut states, phi, DEGENERACY_TOL * scale);
    for s in states.iter_mut() {
        fix_phase(s);
    }

    let residual = (0..3)
        .map(|i| (h * states[i] - states[i] * Complex64::new(energies[i], 0.0)).norm())
        .fold(0.0, f64::max);

    let mut sys = SpinEigensystem {
        energies,
        states,
        overlaps: StateOverlaps {
            e_p1: 0.0,
            e_plus: 0.0,
            g_zero: 0.0,
            d_minus: 0.0,
        },
        residual,
    };
    sys.overlaps = sys.overlaps_for(phi);
    Ok(sys)
}

/// Replace eigenvectors inside each degenerate block by the projections of the reference
/// kets, in priority order, Gram–Schmidt orthonormalized.
fn resolve_degeneracies(energies: &[f64; 3], states: &mut [Ket3; 3], phi: f64, tol: f64) {
    let refs = [ket_0(), ket_minus(phi), ket_plus(phi), ket_m1(), ket_p1()];
    let mut start = 0;
    while start < 3 {
        let mut end = start + 1;
        while end < 3 && energies[end] - energies[end - 1] <= tol {
            end += 1;
        }
        if end - start > 1 {
            let block: Vec<Ket3> = states[start..end].to_vec();
            let mut chosen: Vec<Ket3> = Vec::with_capacity(block.len());
            for r in &refs {
                if chosen.len() == block.len() {
                    break;
                }
                let mut p = block
                    .iter()
                    .fold(Ket3::zeros(), |acc, b| acc + b * b.dotc(r));
                for c in &chosen {
                    p -= c * c.dotc(&p);
                }
                let n = p.norm();
                if n > 1e-6 {
                    chosen.push(p / Complex64::new(n, 0.0));
                }
            }
            if chosen.len() == block.len() {
                states[start..end].copy_from_slice(&chosen);
            }
        }
        start = end;
    }
}

/// Make the largest component real and positive; ties go to the `|+1⟩` end.
fn fix_phase(v: &mut Ket3) {
    let max = v.iter().map(|z| z.norm()).fold(0.0, f64::max);
    if max == 0.0 {
        return;
    }
    let pivot = (0..3)
        .rev()
        .find(|&i| v[i].norm() >= max * (1.0 - 1e-9))
        .unwrap_or(2);
    let phase = v[pivot] / v[pivot].norm();
    *v /= phase;
    v[pivot] = Complex64::new(v[pivot].re, 0.0);
}
