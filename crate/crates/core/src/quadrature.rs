//! Numerical integration: Gauss–Legendre rules, unit-sphere averages of `|ûᵀQû|`, and
//! semi-infinite integrals.

use nalgebra::{Matrix3, SymmetricEigen, Vector3};
use num_complex::Complex64;

/// Gauss–Legendre nodes and weights on `[−1, 1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct GaussLegendre {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl GaussLegendre {
    pub fn new(n: usize) -> Self {
        assert!(n >= 1, "Gauss-Legendre rule needs at least one node");
        let mut nodes = vec![0.0; n];
        let mut weights = vec![0.0; n];
        let nf = n as f64;
        for i in 0..n.div_ceil(2) {
            let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (nf + 0.5)).cos();
            let mut dp = 1.0;
            for _ in 0..100 {
                let (p, d) = legendre(n, x);
                dp = d;
                let dx = p / d;
                x -= dx;
                if dx.abs() < 1e-16 {
                    break;
                }
            }
            let (_, d) = legendre(n, x);
            if d != 0.0 {
                dp = d;
            }
            let w = 2.0 / ((1.0 - x * x) * dp * dp);
            nodes[i] = -x;
            nodes[n - 1 - i] = x;
            weights[i] = w;
            weights[n - 1 - i] = w;
        }
        if n % 2 == 1 {
            nodes[n / 2] = 0.0;
        }
        Self { nodes, weights }
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// Nodes/weights mapped to `[a, b]`.
    pub fn on_interval(&self, a: f64, b: f64) -> impl Iterator<Item = (f64, f64)> + '_ {
        let half = 0.5 * (b - a);
        let mid = 0.5 * (a + b);
        self.nodes
            .iter()
            .zip(&self.weights)
            .map(move |(&x, &w)| (mid + half * x, half * w))
    }

    pub fn integrate(&self, a: f64, b: f64, f: impl Fn(f64) -> f64) -> f64 {
        self.on_interval(a, b).map(|(x, w)| w * f(x)).sum()
    }
}

/// `(P_n(x), P_n'(x))` by the three-term recurrence.
fn legendre(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    if n == 0 {
        return (1.0, 0.0);
    }
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let d = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

/// Product rule on the unit sphere: Gauss–Legendre in cos θ × trapezoid in φ.
///
/// Integrands are quadratic forms `h(û) = ûᵀQû` (complex symmetric `Q`). The rule is laid
/// out in a frame built from `Q` itself, which makes the result independent of the frame `Q`
/// is expressed in:
///
/// * If `Q` is a real matrix up to a global phase, the polar axis is the eigenvector whose
///   eigenvalue has the odd sign. Along each meridian `h` is then `μ(φ) + κ(φ)cos²θ` with at
///   most one sign change on `cos θ ∈ [0, 1]`, located in closed form; each kink-free panel
///   is a quadratic in `cos θ`, which Gauss–Legendre integrates exactly.
/// * Otherwise `|h|` only vanishes at isolated points and the plain product rule is used in
///   the eigenframe of a fixed real combination of `Re Q` and `Im Q`.
#[derive(Debug, Clone)]
pub struct SphereQuadrature {
    n_phi: usize,
    theta_rule: GaussLegendre,
    cos_sin_phi: Vec<(f64, f64)>,
}

impl SphereQuadrature {
    pub fn new(n_theta: usize, n_phi: usize) -> Self {
        assert!(n_theta >= 2 && n_phi >= 2);
        let cos_sin_phi = (0..n_phi)
            .map(|k| {
                let phi = std::f64::consts::TAU * k as f64 / n_phi as f64;
                (phi.cos(), phi.sin())
            })
            .collect();
        Self {
            n_phi,
            theta_rule: GaussLegendre::new(n_theta),
            cos_sin_phi,
        }
    }

    pub fn n_theta(&self) -> usize {
        self.theta_rule.len()
    }

    pub fn n_phi(&self) -> usize {
        self.n_phi
    }

    /// Mean of `|ûᵀQû|` over the unit sphere (`∫ … dΩ / 4π`).
    pub fn mean_abs_quadratic(&self, q: &Matrix3<Complex64>) -> f64 {
        let q = symmetrize(q);
        let scale = q.iter().map(|z| z.norm()).fold(0.0, f64::max);
        if scale == 0.0 {
            return 0.0;
        }
        match real_up_to_phase(&q, scale) {
            Some(r) => self.mean_abs_real(&r),
            None => self.mean_abs_complex(&q),
        }
    }

    fn mean_abs_real(&self, r: &Matrix3<f64>) -> f64 {
        let eig = SymmetricEigen::new(*r);
        let lam = eig.eigenvalues;
        let tiny = 1e-14 * lam.amax();
        let pos: Vec<usize> = (0..3).filter(|&i| lam[i] > tiny).collect();
        let neg: Vec<usize> = (0..3).filter(|&i| lam[i] < -tiny).collect();
        if pos.is_empty() || neg.is_empty() {
            // semi-definite: no sign change, ⟨ûᵀRû⟩ = tr R / 3
            return (lam.sum() / 3.0).abs();
        }
        let p = if pos.len() == 1 { pos[0] } else { neg[0] };
        let (a, b) = match p {
            0 => (1, 2),
            1 => (0, 2),
            _ => (0, 1),
        };
        let (lp, la, lb) = (lam[p], lam[a], lam[b]);
        let total: f64 = self
            .cos_sin_phi
            .iter()
            .map(|&(c, s)| {
                let mu = la * c * c + lb * s * s;
                let kappa = lp - mu;
                // h(t) = μ + κ t², t = cos θ ∈ [0, 1]
                let antiderivative = |t: f64| mu * t + kappa * t * t * t / 3.0;
                let root2 = if kappa != 0.0 { -mu / kappa } else { -1.0 };
                if root2 > 0.0 && root2 < 1.0 {
                    let t0 = root2.sqrt();
                    antiderivative(t0).abs() + (antiderivative(1.0) - antiderivative(t0)).abs()
                } else {
                    antiderivative(1.0).abs()
                }
            })
            .sum();
        total / self.n_phi as f64
    }

    fn mean_abs_complex(&self, q: &Matrix3<Complex64>) -> f64 {
        let frame = canonical_frame(q);
        let qf = frame.transpose().map(|v| Complex64::new(v, 0.0))
            * q
            * frame.map(|v| Complex64::new(v, 0.0));
        let mut total = 0.0;
        for (t, w) in self.theta_rule.on_interval(0.0, 1.0) {
            let st = (1.0 - t * t).sqrt();
            let mut ring = 0.0;
            for &(c, s) in &self.cos_sin_phi {
                let u = Vector3::new(st * c, st * s, t);
                ring += quad_form(&qf, &u).norm();
            }
            total += w * ring;
        }
        // upper hemisphere only (h(−û) = h(û)); ∫dΩ/4π = Σ w·ring·(2π/nφ)·2/(4π)
        total / self.n_phi as f64
    }
}

fn quad_form(q: &Matrix3<Complex64>, u: &Vector3<f64>) -> Complex64 {
    let mut acc = Complex64::new(0.0, 0.0);
    for i in 0..3 {
        for j in 0..3 {
            acc += q[(i, j)] * (u[i] * u[j]);
        }
    }
    acc
}

fn symmetrize(q: &Matrix3<Complex64>) -> Matrix3<Complex64> {
    (q + q.transpose()) * Complex64::new(0.5, 0.0)
}

/// `Some(R)` when `Q = e^{iα} R` for a real symmetric `R`.
fn real_up_to_phase(q: &Matrix3<Complex64>, scale: f64) -> Option<Matrix3<f64>> {
    let pivot = q
        .iter()
        .copied()
        .max_by(|a, b| a.norm().total_cmp(&b.norm()))
        .unwrap_or_default();
    let phase = pivot / pivot.norm();
    let rotated = q.map(|z| z * phase.conj());
    if rotated.iter().all(|z| z.im.abs() <= 1e-13 * scale) {
        Some(rotated.map(|z| z.re))
    } else {
        None
    }
}

/// Orthonormal frame (columns) determined by `Q` alone, so that rotating `Q` rotates the
/// frame with it.
fn canonical_frame(q: &Matrix3<Complex64>) -> Matrix3<f64> {
    let t2 = (q * q).trace();
    let t1 = q.trace();
    let alpha = if t2.norm() > 1e-12 {
        0.5 * t2.arg()
    } else if t1.norm() > 1e-12 {
        t1.arg()
    } else {
        0.0
    };
    let qa = q.map(|z| z * Complex64::from_polar(1.0, -alpha));
    let m = qa.map(|z| z.re + 0.618_033_988_749_894_8 * z.im);
    let eig = SymmetricEigen::new(m);
    let mut order = [0usize, 1, 2];
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    Matrix3::from_columns(&[
        eig.eigenvectors.column(order[0]).into_owned(),
        eig.eigenvectors.column(order[1]).into_owned(),
        eig.eigenvectors.column(order[2]).into_owned(),
    ])
}

/// `∫ₐᵇ f` by the double-exponential rule.
pub fn integrate_finite(f: impl Fn(f64) -> f64, a: f64, b: f64, tol: f64) -> f64 {
    quadrature::double_exponential::integrate(f, a, b, tol).integral
}

/// `∫ₐ^∞ f` through the map `x = a + s·t/(1−t)`, `t ∈ [0, 1)`; `s` sets the scale at
/// which the map spreads the nodes.
pub fn integrate_to_infinity(f: impl Fn(f64) -> f64, a: f64, scale: f64, tol: f64) -> f64 {
    let g = |t: f64| {
        if t >= 1.0 {
            return 0.0;
        }
        let one_minus = 1.0 - t;
        let x = a + scale * t / one_minus;
        let v = f(x) * scale / (one_minus * one_minus);
        if v.is_finite() {
            v
        } else {
            0.0
        }
    };
    quadrature::double_exponential::integrate(g, 0.0, 1.0, tol).integral
}

/// `∫_{−∞}^{∞} f`, split at `center`.
pub fn integrate_real_line(f: impl Fn(f64) -> f64, center: f64, scale: f64, tol: f64) -> f64 {
    let right = integrate_to_infinity(&f, center, scale, 0.5 * tol);
    let left = integrate_to_infinity(|x| f(2.0 * center - x), center, scale, 0.5 * tol);
    left + right
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::Rotation3;

    #[test]
    fn gauss_legendre_exactness() {
        for n in [2usize, 5, 8, 33, 128] {
            let gl = GaussLegendre::new(n);
            let sum: f64 = gl.weights.iter().sum();
            assert!((sum - 2.0).abs() < 1e-13, "n={n}");
            // exact for x^(2n-2)
            let k = 2 * n as i32 - 2;
            let v = gl.integrate(-1.0, 1.0, |x| x.powi(k));
            assert!((v - 2.0 / (k as f64 + 1.0)).abs() < 1e-12, "n={n}");
        }
    }

    fn real(m: Matrix3<f64>) -> Matrix3<Complex64> {
        m.map(|v| Complex64::new(v, 0.0))
    }

    #[test]
    fn axial_form_closed_value() {
        // |1 − 3cos²θ| averages to 4/(3√3)
        let q = real(Matrix3::from_diagonal(&Vector3::new(1.0, 1.0, -2.0)));
        let rule = SphereQuadrature::new(8, 8);
        let expect = 4.0 / (3.0 * 3f64.sqrt());
        assert!((rule.mean_abs_quadratic(&q) - expect).abs() < 1e-14);
    }

    #[test]
    fn definite_form_is_trace() {
        let q = real(Matrix3::new(2.0, 0.3, 0.0, 0.3, 1.0, 0.1, 0.0, 0.1, 1.5));
        let rule = SphereQuadrature::new(8, 8);
        assert!((rule.mean_abs_quadratic(&q) - 4.5 / 3.0).abs() < 1e-14);
    }

    fn brute_force(q: &Matrix3<Complex64>, n: usize) -> f64 {
        // midpoint rule in (cos θ, φ), independent of the adaptive path
        let mut acc = 0.0;
        for i in 0..n {
            let c = -1.0 + (i as f64 + 0.5) * 2.0 / n as f64;
            let s = (1.0 - c * c).sqrt();
            for j in 0..n {
                let p = std::f64::consts::TAU * (j as f64 + 0.5) / n as f64;
                let u = Vector3::new(s * p.cos(), s * p.sin(), c);
                acc += quad_form(q, &u).norm();
            }
        }
        acc / (n * n) as f64
    }

    #[test]
    fn indefinite_real_form_matches_brute_force() {
        let q = real(Matrix3::new(0.4, 1.1, -0.3, 1.1, -0.7, 0.5, -0.3, 0.5, 0.2));
        let rule = SphereQuadrature::new(16, 256);
        let v = rule.mean_abs_quadratic(&q);
        assert!((v - brute_force(&q, 1200)).abs() < 2e-5);
    }

    #[test]
    fn complex_form_matches_brute_force() {
        let mut q = real(Matrix3::new(0.4, 1.1, -0.3, 1.1, -0.7, 0.5, -0.3, 0.5, 0.2));
        q[(0, 2)] += Complex64::new(0.0, 0.6);
        q[(2, 0)] += Complex64::new(0.0, 0.6);
        q[(1, 1)] += Complex64::new(0.0, -0.4);
        let rule = SphereQuadrature::new(256, 256);
        let v = rule.mean_abs_quadratic(&q);
        assert!((v - brute_force(&q, 1200)).abs() < 2e-5);
    }

    #[test]
    fn rotation_invariance() {
        let mut q = real(Matrix3::new(0.4, 1.1, -0.3, 1.1, -0.7, 0.5, -0.3, 0.5, 0.2));
        let rule = SphereQuadrature::new(64, 64);
        for _ in 0..2 {
            let base = rule.mean_abs_quadratic(&q);
            let r = Rotation3::from_euler_angles(0.3, -1.2, 2.1).into_inner();
            let rc = r.map(|v| Complex64::new(v, 0.0));
            let rotated = rc * q * rc.transpose();
            assert!((rule.mean_abs_quadratic(&rotated) - base).abs() < 1e-12);
            q[(0, 1)] += Complex64::new(0.0, 0.5);
            q[(1, 0)] += Complex64::new(0.0, 0.5);
        }
    }

    #[test]
    fn phase_does_not_matter() {
        let q = real(Matrix3::new(0.4, 1.1, -0.3, 1.1, -0.7, 0.5, -0.3, 0.5, 0.2));
        let rule = SphereQuadrature::new(16, 64);
        let a = rule.mean_abs_quadratic(&q);
        let b = rule.mean_abs_quadratic(&(q * Complex64::from_polar(1.0, 1.1)));
        assert!((a - b).abs() < 1e-13);
    }

    #[test]
    fn half_line_gaussian() {
        let v = integrate_to_infinity(|x| (-x * x).exp(), 0.0, 1.0, 1e-12);
        assert!((v - std::f64::consts::PI.sqrt() / 2.0).abs() < 1e-11);
        let w = integrate_real_line(|x| 1.0 / (1.0 + x * x), 0.3, 1.0, 1e-12);
        assert!((w - std::f64::consts::PI).abs() < 1e-9);
    }
}
