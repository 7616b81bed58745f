//! Two-spin dipolar coupling: coefficient tensor, 9×9 operator, flip-flop and double-flip
//! matrix elements.
//!
//! Everything is expressed in units of `J0/r³` with `H/(J0/r³) = −[3(S₁·û)(S₂·û) − S₁·S₂]`.
//! Two-spin kets are ordered `|a, b⟩ ↦ 3a + b` with single-spin index 0/1/2 ↔
//! `|−1⟩,|0⟩,|+1⟩` (magnetic) or `|−⟩,|0⟩,|+⟩` (non-magnetic).

use nalgebra::{Matrix3, SMatrix, Vector3};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::constants::PhysicalConstants;
use crate::error::{ensure, Error, Result};
use crate::spin::operators::{ket_0, ket_minus, ket_p1, ket_plus, spin_vector, Operator3};
use crate::spin::NvClassFrame;

pub type TwoSpinOperator = SMatrix<Complex64, 9, 9>;

const MINUS: usize = 0;
const ZERO: usize = 1;
const PLUS: usize = 2;

/// Single-spin eigenbasis in which matrix elements are taken.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum BasisChoice {
    /// `{|0⟩, |+1⟩, |−1⟩}`
    Magnetic,
    /// `{|0⟩, |+⟩, |−⟩}` with `|±⟩ = (|+1⟩ ± |−1⟩)/√2` relative to each spin's x̂.
    NonMagnetic,
}

impl BasisChoice {
    /// Spin operators `[Sx, Sy, Sz]` represented in this basis.
    pub fn spin_operators(self) -> [Operator3; 3] {
        let s = spin_vector();
        match self {
            BasisChoice::Magnetic => s,
            BasisChoice::NonMagnetic => {
                let u = Operator3::from_columns(&[ket_minus(0.0), ket_0(), ket_plus(0.0)]);
                let ud = u.adjoint();
                s.map(|op| ud * op * u)
            }
        }
    }
}

/// Which pair of two-spin states a matrix element connects.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Process {
    /// `⟨+,0|H|0,+⟩` (or `⟨+1,0|H|0,+1⟩`)
    FlipFlop,
    /// `⟨+,0|H|0,−⟩` (or `⟨+1,0|H|0,−1⟩`)
    DoubleFlip,
}

impl Process {
    fn indices(self) -> (usize, usize) {
        let bra = 3 * PLUS + ZERO;
        let ket = match self {
            Process::FlipFlop => 3 * ZERO + PLUS,
            Process::DoubleFlip => 3 * ZERO + MINUS,
        };
        (bra, ket)
    }
}

/// Relative placement of two spins.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PairGeometry {
    /// Unit vector from spin 1 to spin 2 (crystal frame).
    pub u_hat: Vector3<f64>,
    pub frame1: NvClassFrame,
    pub frame2: NvClassFrame,
    /// Separation in nm, when an absolute coupling is wanted.
    pub r_nm: Option<f64>,
}

impl PairGeometry {
    pub fn new(u_hat: Vector3<f64>, frame1: NvClassFrame, frame2: NvClassFrame) -> Result<Self> {
        let g = Self {
            u_hat,
            frame1,
            frame2,
            r_nm: None,
        };
        g.validate()?;
        Ok(g)
    }

    pub fn with_separation(mut self, r_nm: f64) -> Result<Self> {
        self.r_nm = Some(r_nm);
        self.validate()?;
        Ok(self)
    }

    pub fn validate(&self) -> Result<()> {
        let n = self.u_hat.norm();
        ensure((n - 1.0).abs() <= 1e-12, || {
            format!("û must be a unit vector (|û| = {n})")
        })?;
        if let Some(r) = self.r_nm {
            ensure(r.is_finite() && r > 0.0, || {
                format!("separation must be > 0, got {r}")
            })?;
        }
        self.frame1.validate()?;
        self.frame2.validate()
    }

    /// Spins exchanged and û reversed.
    pub fn swapped(&self) -> Self {
        Self {
            u_hat: -self.u_hat,
            frame1: self.frame2,
            frame2: self.frame1,
            r_nm: self.r_nm,
        }
    }

    /// `J0/r³` in MHz, if a separation is set.
    pub fn coupling_mhz(&self, constants: &PhysicalConstants) -> Option<f64> {
        self.r_nm.map(|r| constants.j0_mhz_nm3 / (r * r * r))
    }
}

/// Full coefficient tensor `a_ij = 3(û·eᵢ¹)(û·eⱼ²) − eᵢ¹·eⱼ²`.
pub fn dipolar_tensor(g: &PairGeometry) -> Matrix3<f64> {
    tensor_for(&g.u_hat, &g.frame1, &g.frame2)
}

fn tensor_for(u: &Vector3<f64>, f1: &NvClassFrame, f2: &NvClassFrame) -> Matrix3<f64> {
    let e1 = f1.axes();
    let e2 = f2.axes();
    Matrix3::from_fn(|i, j| 3.0 * u.dot(&e1[i]) * u.dot(&e2[j]) - e1[i].dot(&e2[j]))
}

/// The five coefficients kept in the secular decomposition.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DipolarCoefficients {
    pub a_xx: f64,
    pub a_yy: f64,
    pub a_xy: f64,
    pub a_yx: f64,
    pub a_zz: f64,
}

pub fn dipolar_coefficients(g: &PairGeometry) -> Result<DipolarCoefficients> {
    g.validate()?;
    let a = dipolar_tensor(g);
    Ok(DipolarCoefficients {
        a_xx: a[(0, 0)],
        a_yy: a[(1, 1)],
        a_xy: a[(0, 1)],
        a_yx: a[(1, 0)],
        a_zz: a[(2, 2)],
    })
}

/// `(i, j)` index pairs kept when the `Sx·Sz`-type terms are dropped.
const SECULAR_TERMS: [(usize, usize); 5] = [(0, 0), (1, 1), (0, 1), (1, 0), (2, 2)];

fn included_terms(include_other: bool) -> Vec<(usize, usize)> {
    if include_other {
        (0..3).flat_map(|i| (0..3).map(move |j| (i, j))).collect()
    } else {
        SECULAR_TERMS.to_vec()
    }
}

fn kron(a: &Operator3, b: &Operator3) -> TwoSpinOperator {
    TwoSpinOperator::from_fn(|r, c| a[(r / 3, c / 3)] * b[(r % 3, c % 3)])
}

/// `Sᵢ¹ ⊗ Sⱼ²` for all nine `(i, j)` in the given basis.
fn product_operators(basis: BasisChoice) -> [[TwoSpinOperator; 3]; 3] {
    let s = basis.spin_operators();
    std::array::from_fn(|i| std::array::from_fn(|j| kron(&s[i], &s[j])))
}

/// Assemble `H/(J0/r³)` on the 9-dimensional two-spin space.
pub fn build_two_spin_hamiltonian(
    g: &PairGeometry,
    basis: BasisChoice,
    include_other: bool,
) -> Result<TwoSpinOperator> {
    g.validate()?;
    let a = dipolar_tensor(g);
    let ops = product_operators(basis);
    let mut h = TwoSpinOperator::zeros();
    for (i, j) in included_terms(include_other) {
        h -= ops[i][j] * Complex64::new(a[(i, j)], 0.0);
    }
    Ok(h)
}

fn element(h: &TwoSpinOperator, process: Process) -> Complex64 {
    let (r, c) = process.indices();
    h[(r, c)]
}

/// `|⟨+,0|H/(J0/r³)|0,+⟩|`.
pub fn flip_flop_amplitude(g: &PairGeometry, basis: BasisChoice) -> Result<f64> {
    let h = build_two_spin_hamiltonian(g, basis, false)?;
    Ok(element(&h, Process::FlipFlop).norm())
}

/// `|⟨+,0|H/(J0/r³)|0,−⟩|`.
pub fn double_flip_amplitude(g: &PairGeometry, basis: BasisChoice) -> Result<f64> {
    let h = build_two_spin_hamiltonian(g, basis, false)?;
    Ok(element(&h, Process::DoubleFlip).norm())
}

/// Matrix element for one process and arbitrary flag set, complex-valued.
pub fn matrix_element(
    g: &PairGeometry,
    basis: BasisChoice,
    process: Process,
    include_other: bool,
) -> Result<Complex64> {
    let h = build_two_spin_hamiltonian(g, basis, include_other)?;
    Ok(element(&h, process))
}

/// Lorentzian resonance weight `4γ²/((ω_f − ω_NV)² + 4γ²)`.
pub fn resonance_factor(omega_f: f64, omega_nv: f64, gamma_f: f64) -> Result<f64> {
    if !(gamma_f.is_finite() && gamma_f > 0.0) {
        return Err(Error::InvalidInput(format!(
            "gamma_f must be > 0, got {gamma_f}"
        )));
    }
    ensure(omega_f.is_finite() && omega_nv.is_finite(), || {
        "frequencies must be finite".into()
    })?;
    let g2 = 4.0 * gamma_f * gamma_f;
    let d = omega_f - omega_nv;
    Ok(g2 / (d * d + g2))
}

/// A fixed pair of frames and a process, reduced to the quadratic form
/// `⟨f|H/(J0/r³)|i⟩ = ûᵀ Q û` over the unit sphere.
///
/// The weights `mᵢⱼ = ⟨f|Sᵢ¹⊗Sⱼ²|i⟩` are read off the assembled two-spin operators, so the
/// form and [`build_two_spin_hamiltonian`] share one representation of the spin algebra.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CouplingForm {
    pub q: Matrix3<Complex64>,
}

impl CouplingForm {
    pub fn new(
        frame1: &NvClassFrame,
        frame2: &NvClassFrame,
        basis: BasisChoice,
        process: Process,
        include_other: bool,
    ) -> Self {
        let ops = product_operators(basis);
        Self::from_products(&ops, frame1, frame2, process, include_other)
    }

    fn from_products(
        ops: &[[TwoSpinOperator; 3]; 3],
        frame1: &NvClassFrame,
        frame2: &NvClassFrame,
        process: Process,
        include_other: bool,
    ) -> Self {
        let weights = Matrix3::from_fn(|i, j| element(&ops[i][j], process));
        Self::from_weights(&weights, frame1, frame2, include_other)
    }

    fn from_weights(
        weights: &Matrix3<Complex64>,
        frame1: &NvClassFrame,
        frame2: &NvClassFrame,
        include_other: bool,
    ) -> Self {
        let e1 = frame1.axes();
        let e2 = frame2.axes();
        let mut q = Matrix3::<Complex64>::zeros();
        let mut trace_part = Complex64::new(0.0, 0.0);
        for (i, j) in included_terms(include_other) {
            let m = weights[(i, j)];
            if m == Complex64::new(0.0, 0.0) {
                continue;
            }
            let outer = (e1[i] * e2[j].transpose()).map(|v| Complex64::new(3.0 * v, 0.0));
            q += outer * m;
            trace_part += m * e1[i].dot(&e2[j]);
        }
        q -= Matrix3::identity() * trace_part;
        // symmetric part only contributes to ûᵀQû
        let q = (q + q.transpose()) * Complex64::new(-0.5, 0.0);
        Self { q }
    }

    pub fn evaluate(&self, u: &Vector3<f64>) -> Complex64 {
        let uc = u.map(|v| Complex64::new(v, 0.0));
        (uc.transpose() * self.q * uc)[(0, 0)]
    }
}

/// Reusable builder of [`CouplingForm`]s for a fixed basis/process; caches the product
/// operators so that quadrature loops do not reassemble them.
#[derive(Debug, Clone)]
pub struct CouplingFormFactory {
    weights: Matrix3<Complex64>,
    include_other: bool,
}

impl CouplingFormFactory {
    pub fn new(basis: BasisChoice, process: Process, include_other: bool) -> Self {
        let ops = product_operators(basis);
        Self {
            weights: Matrix3::from_fn(|i, j| element(&ops[i][j], process)),
            include_other,
        }
    }

    pub fn form(&self, frame1: &NvClassFrame, frame2: &NvClassFrame) -> CouplingForm {
        CouplingForm::from_weights(&self.weights, frame1, frame2, self.include_other)
    }
}

/// One row of an amplitude dump over a û grid.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct AmplitudeSample {
    pub theta_rad: f64,
    pub phi_rad: f64,
    pub flip_flop: f64,
    pub double_flip: f64,
}

/// Flip-flop and double-flip magnitudes on a regular (θ, φ) grid of û, for inspection.
pub fn amplitude_map(
    frame1: &NvClassFrame,
    frame2: &NvClassFrame,
    basis: BasisChoice,
    n_theta: usize,
    n_phi: usize,
) -> Result<Vec<AmplitudeSample>> {
    ensure(n_theta >= 2 && n_phi >= 1, || "grid too small".into())?;
    frame1.validate()?;
    frame2.validate()?;
    let ff = CouplingForm::new(frame1, frame2, basis, Process::FlipFlop, false);
    let df = CouplingForm::new(frame1, frame2, basis, Process::DoubleFlip, false);
    let mut out = Vec::with_capacity(n_theta * n_phi);
    for it in 0..n_theta {
        let theta = std::f64::consts::PI * it as f64 / (n_theta - 1) as f64;
        for ip in 0..n_phi {
            let phi = std::f64::consts::TAU * ip as f64 / n_phi as f64;
            let u = Vector3::new(
                theta.sin() * phi.cos(),
                theta.sin() * phi.sin(),
                theta.cos(),
            );
            out.push(AmplitudeSample {
                theta_rad: theta,
                phi_rad: phi,
                flip_flop: ff.evaluate(&u).norm(),
                double_flip: df.evaluate(&u).norm(),
            });
        }
    }
    Ok(out)
}

/// Reference ket for the upper state in each basis (used by tests and docs).
pub fn plus_state(basis: BasisChoice) -> crate::spin::operators::Ket3 {
    match basis {
        BasisChoice::Magnetic => ket_p1(),
        BasisChoice::NonMagnetic => ket_plus(0.0),
    }
}
