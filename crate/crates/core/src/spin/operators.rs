//! Spin-1 operators and reference kets.
//!
//! Component order of every 3-vector and 3×3 matrix is `{|−1⟩, |0⟩, |+1⟩}`.

use nalgebra::{Matrix3, Vector3};
use num_complex::Complex64;

pub type Operator3 = Matrix3<Complex64>;
pub type Ket3 = Vector3<Complex64>;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

fn re(x: f64) -> Complex64 {
    Complex64::new(x, 0.0)
}

fn im(x: f64) -> Complex64 {
    Complex64::new(0.0, x)
}

pub fn sx() -> Operator3 {
    let a = re(std::f64::consts::FRAC_1_SQRT_2);
    Operator3::new(ZERO, a, ZERO, a, ZERO, a, ZERO, a, ZERO)
}

pub fn sy() -> Operator3 {
    let a = std::f64::consts::FRAC_1_SQRT_2;
    Operator3::new(ZERO, im(a), ZERO, im(-a), ZERO, im(a), ZERO, im(-a), ZERO)
}

pub fn sz() -> Operator3 {
    Operator3::from_diagonal(&Vector3::new(re(-1.0), ZERO, re(1.0)))
}

/// `[Sx, Sy, Sz]`.
pub fn spin_vector() -> [Operator3; 3] {
    [sx(), sy(), sz()]
}

pub fn ket_m1() -> Ket3 {
    Ket3::new(re(1.0), ZERO, ZERO)
}

pub fn ket_0() -> Ket3 {
    Ket3::new(ZERO, re(1.0), ZERO)
}

pub fn ket_p1() -> Ket3 {
    Ket3::new(ZERO, ZERO, re(1.0))
}

/// `|+⟩ = (|+1⟩ + e^{−iφ}|−1⟩)/√2`.
pub fn ket_plus(phi: f64) -> Ket3 {
    let s = std::f64::consts::FRAC_1_SQRT_2;
    Ket3::new(Complex64::from_polar(s, -phi), ZERO, re(s))
}

/// `|−⟩ = (|+1⟩ − e^{−iφ}|−1⟩)/√2`.
pub fn ket_minus(phi: f64) -> Ket3 {
    let s = std::f64::consts::FRAC_1_SQRT_2;
    Ket3::new(-Complex64::from_polar(s, -phi), ZERO, re(s))
}

/// `|⟨a|b⟩|²`.
pub fn overlap_sq(a: &Ket3, b: &Ket3) -> f64 {
    a.dotc(b).norm_sqr()
}

pub fn hermiticity_defect(m: &Operator3) -> f64 {
    (m - m.adjoint())
        .iter()
        .map(|z| z.norm())
        .fold(0.0, f64::max)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn commutator(a: &Operator3, b: &Operator3) -> Operator3 {
        a * b - b * a
    }

    #[test]
    fn angular_momentum_algebra() {
        let [x, y, z] = spin_vector();
        let i = Complex64::i();
        assert!((commutator(&x, &y) - z * i).norm() < 1e-14);
        assert!((commutator(&y, &z) - x * i).norm() < 1e-14);
        assert!((commutator(&z, &x) - y * i).norm() < 1e-14);
        let casimir = x * x + y * y + z * z;
        assert!((casimir - Operator3::identity() * re(2.0)).norm() < 1e-14);
    }

    #[test]
    fn sx_maps_zero_to_plus() {
        let v = sx() * ket_0();
        assert!((v - ket_plus(0.0)).norm() < 1e-15);
        // Sy|0⟩ = −i|−⟩
        let w = sy() * ket_0();
        assert!((w - ket_minus(0.0) * im(-1.0)).norm() < 1e-15);
    }
}
