//! Solid-angle averages of dipolar amplitudes and the rate multipliers they imply.

use nalgebra::{Rotation3, Unit, Vector3};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::constants::PhysicalConstants;
use crate::dipolar::{resonance_factor, BasisChoice, CouplingFormFactory, Process};
use crate::error::{ensure, Error, Result};
use crate::quadrature::{GaussLegendre, SphereQuadrature};
use crate::spin::{build_hamiltonian, diagonalize, FieldConfiguration, NvClass, NvClassFrame};

/// Class-population weight times the `√(1/3)` projection factor.
pub const ETA_PREFACTOR: f64 = 0.25 * 0.577_350_269_189_625_8;

/// Angle between the two NV axes of a pair.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum ZAngle {
    Same,
    Close,
    Far,
}

impl ZAngle {
    pub const ALL: [ZAngle; 3] = [ZAngle::Same, ZAngle::Close, ZAngle::Far];

    pub fn cosine(self) -> f64 {
        match self {
            ZAngle::Same => 1.0,
            ZAngle::Close => 1.0 / 3.0,
            ZAngle::Far => -1.0 / 3.0,
        }
    }

    pub fn angle(self) -> f64 {
        self.cosine().acos()
    }

    /// Classify an oriented axis product `ẑ₁·ẑ₂`.
    pub fn classify(cos: f64) -> Option<Self> {
        Self::ALL
            .into_iter()
            .find(|z| (z.cosine() - cos).abs() < 1e-9)
    }

    pub fn label(self) -> &'static str {
        match self {
            ZAngle::Same => "SAME",
            ZAngle::Close => "CLOSE",
            ZAngle::Far => "FAR",
        }
    }
}

/// How the transverse axes of the two spins relate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum XMode {
    /// x̂ of each spin follows the transverse projection of one common direction.
    Aligned,
    /// Uniformly distributed relative angle ψ between the x̂ axes.
    Random,
}

impl XMode {
    pub fn label(self) -> &'static str {
        match self {
            XMode::Aligned => "ALIGNED",
            XMode::Random => "RANDOM",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct EtaScenario {
    pub basis: BasisChoice,
    pub z_angle: ZAngle,
    pub x_mode: XMode,
    pub process: Process,
    pub include_other: bool,
}

impl EtaScenario {
    pub fn flip_flop(basis: BasisChoice, z_angle: ZAngle, x_mode: XMode) -> Self {
        Self {
            basis,
            z_angle,
            x_mode,
            process: Process::FlipFlop,
            include_other: false,
        }
    }

    /// The x̂ axes only matter in the NONMAGNETIC basis; in the MAGNETIC basis they change
    /// the element by a phase.
    fn needs_x_average(&self) -> bool {
        self.basis == BasisChoice::NonMagnetic
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QuadratureSpec {
    pub n_theta: usize,
    pub n_phi: usize,
    pub n_psi: usize,
    pub tolerance: f64,
    /// How many times every resolution may be doubled while chasing `tolerance`.
    pub max_doublings: u32,
}

impl Default for QuadratureSpec {
    fn default() -> Self {
        Self {
            n_theta: 128,
            n_phi: 128,
            n_psi: 64,
            tolerance: 1e-4,
            max_doublings: 3,
        }
    }
}

impl QuadratureSpec {
    pub fn validate(&self) -> Result<()> {
        ensure(
            self.n_theta >= 8 && self.n_phi >= 8 && self.n_psi >= 8,
            || {
                format!(
                    "quadrature resolutions must be >= 8 (got {}x{}x{})",
                    self.n_theta, self.n_phi, self.n_psi
                )
            },
        )?;
        ensure(self.tolerance > 0.0 && self.tolerance.is_finite(), || {
            format!("tolerance must be positive, got {}", self.tolerance)
        })
    }

    fn doubled(&self) -> Self {
        Self {
            n_theta: self.n_theta * 2,
            n_phi: self.n_phi * 2,
            n_psi: self.n_psi * 2,
            ..*self
        }
    }
}

/// Reference frame for spin 1 when none is given.
pub fn reference_frame() -> NvClassFrame {
    NvClassFrame::canonical(NvClass::C1)
}

/// Normalized average `A = η̄ / (¼·√(1/3))` of a scenario, refined until doubling every
/// resolution moves it by less than `q.tolerance`.
pub fn angular_average(s: &EtaScenario, q: &QuadratureSpec) -> Result<f64> {
    angular_average_from(s, q, &reference_frame())
}

/// Same average with every geometric input rotated by `r`.
pub fn angular_average_rotated(
    s: &EtaScenario,
    q: &QuadratureSpec,
    r: &Rotation3<f64>,
) -> Result<f64> {
    angular_average_from(s, q, &reference_frame().rotated(r))
}

fn angular_average_from(s: &EtaScenario, q: &QuadratureSpec, frame1: &NvClassFrame) -> Result<f64> {
    q.validate()?;
    frame1.validate()?;
    let mut spec = *q;
    let mut previous = average_at(s, &spec, frame1);
    let mut change = f64::INFINITY;
    for _ in 0..q.max_doublings.max(1) {
        spec = spec.doubled();
        let next = average_at(s, &spec, frame1);
        change = (next - previous).abs();
        previous = next;
        if change < q.tolerance {
            return Ok(next);
        }
    }
    Err(Error::QuadratureNotConverged {
        last_change: change,
        tolerance: q.tolerance,
        n_theta: spec.n_theta,
        n_phi: spec.n_phi,
        n_psi: spec.n_psi,
        estimate: previous,
    })
}

/// Frames for spin 2 (and possibly re-oriented spin 1) over the auxiliary angles at a
/// fixed resolution, each with its quadrature weight.
fn pair_frames(
    s: &EtaScenario,
    n_psi: usize,
    f1: &NvClassFrame,
) -> Vec<(NvClassFrame, NvClassFrame, f64)> {
    let tau = std::f64::consts::TAU;
    let uniform = |k: usize| tau * k as f64 / n_psi as f64;
    let angle = s.z_angle.angle();
    // spin 2 from spin 1 by a tilt about an in-plane axis at azimuth χ
    let tilted = |chi: f64| -> NvClassFrame {
        let axis = Unit::new_normalize(f1.x * chi.cos() + f1.y * chi.sin());
        f1.rotated(&Rotation3::from_axis_angle(&axis, angle))
    };

    if !s.needs_x_average() {
        return vec![(*f1, tilted(0.0), 1.0)];
    }
    let w1 = 1.0 / n_psi as f64;
    match (s.z_angle, s.x_mode) {
        (ZAngle::Same, XMode::Aligned) => vec![(*f1, *f1, 1.0)],
        (ZAngle::Same, XMode::Random) => (0..n_psi)
            .map(|k| (*f1, f1.rotated_about_z(uniform(k)), w1))
            .collect(),
        (_, XMode::Random) => {
            let mut out = Vec::with_capacity(n_psi * n_psi);
            for j in 0..n_psi {
                let f2 = tilted(uniform(j));
                for k in 0..n_psi {
                    out.push((*f1, f2.rotated_about_z(uniform(k)), w1 * w1));
                }
            }
            out
        }
        (_, XMode::Aligned) => {
            // common direction b uniform on the sphere, in spin-1 coordinates
            let z2 = tilted(0.0).z;
            let gl = GaussLegendre::new(n_psi);
            let mut out = Vec::with_capacity(n_psi * n_psi);
            for (c, w) in gl.on_interval(-1.0, 1.0) {
                let st = (1.0 - c * c).sqrt();
                for k in 0..n_psi {
                    let a = uniform(k);
                    let b = f1.x * (st * a.cos()) + f1.y * (st * a.sin()) + f1.z * c;
                    let (Some(x1), Some(x2)) = (transverse(&f1.z, &b), transverse(&z2, &b)) else {
                        continue;
                    };
                    let g1 = frame_from(f1.z, x1);
                    let g2 = frame_from(z2, x2);
                    out.push((g1, g2, 0.5 * w * w1));
                }
            }
            out
        }
    }
}

fn transverse(z: &Vector3<f64>, b: &Vector3<f64>) -> Option<Vector3<f64>> {
    let p = b - z * z.dot(b);
    let n = p.norm();
    (n > 1e-12).then(|| p / n)
}

fn frame_from(z: Vector3<f64>, x: Vector3<f64>) -> NvClassFrame {
    NvClassFrame {
        class: None,
        x,
        y: z.cross(&x),
        z,
    }
}

fn average_at(s: &EtaScenario, q: &QuadratureSpec, f1: &NvClassFrame) -> f64 {
    let sphere = SphereQuadrature::new(q.n_theta, q.n_phi);
    let factory = CouplingFormFactory::new(s.basis, s.process, s.include_other);
    let frames = pair_frames(s, q.n_psi, f1);
    let parts: Vec<f64> = frames
        .par_iter()
        .map(|(a, b, w)| w * sphere.mean_abs_quadratic(&factory.form(a, b).q))
        .collect();
    // fixed-order reduction keeps the result independent of thread scheduling
    parts.iter().sum()
}

/// `η̄` including the `¼·√(1/3)` prefactor.
pub fn eta_bar(s: &EtaScenario, q: &QuadratureSpec) -> Result<f64> {
    Ok(ETA_PREFACTOR * angular_average(s, q)?)
}

/// Field orientations with a known resonance structure among the four classes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum FieldOrientationScenario {
    RandomDirection,
    Plane110,
    Plane100,
    Axis111,
    Axis100,
    ZeroFieldElectric,
}

/// Which averaged pair types add up coherently for the probe class.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct ResonanceComposition {
    pub basis: BasisChoice,
    pub x_mode: XMode,
    pub same: u32,
    pub close: u32,
    pub far: u32,
}

impl FieldOrientationScenario {
    pub const ALL: [FieldOrientationScenario; 6] = [
        FieldOrientationScenario::RandomDirection,
        FieldOrientationScenario::Plane100,
        FieldOrientationScenario::Plane110,
        FieldOrientationScenario::Axis111,
        FieldOrientationScenario::Axis100,
        FieldOrientationScenario::ZeroFieldElectric,
    ];

    pub fn tag(self) -> &'static str {
        match self {
            FieldOrientationScenario::RandomDirection => "RANDOM",
            FieldOrientationScenario::Plane110 => "PLANE_110",
            FieldOrientationScenario::Plane100 => "PLANE_100",
            FieldOrientationScenario::Axis111 => "AXIS_111",
            FieldOrientationScenario::Axis100 => "AXIS_100",
            FieldOrientationScenario::ZeroFieldElectric => "ZERO_FIELD",
        }
    }

    pub fn from_tag(tag: &str) -> Option<Self> {
        let t = tag.trim().to_ascii_uppercase().replace('-', "_");
        Self::ALL.into_iter().find(|s| {
            s.tag() == t
                || (t == "RANDOM_DIRECTION" && *s == Self::RandomDirection)
                || (t == "ZERO_FIELD_ELECTRIC" && *s == Self::ZeroFieldElectric)
        })
    }

    /// A generic field direction belonging to the scenario (`None` at zero field).
    pub fn representative_field(self) -> Option<Vector3<f64>> {
        let v = match self {
            FieldOrientationScenario::RandomDirection => Vector3::new(1.0, 2.0, 4.0),
            FieldOrientationScenario::Plane110 => Vector3::new(1.0, 1.0, 3.0),
            FieldOrientationScenario::Plane100 => Vector3::new(0.0, 1.0, 3.0),
            FieldOrientationScenario::Axis111 => Vector3::new(1.0, 1.0, 1.0),
            FieldOrientationScenario::Axis100 => Vector3::new(1.0, 0.0, 0.0),
            FieldOrientationScenario::ZeroFieldElectric => return None,
        };
        Some(v.normalize())
    }

    /// Resonant pair structure for the class that has the most resonant partners.
    ///
    /// Classes are resonant when the field makes the same angle with their axes. Pairs are
    /// sorted by the product of their field-oriented axes.
    pub fn composition(self) -> ResonanceComposition {
        let Some(b) = self.representative_field() else {
            let frames = NvClass::ALL.map(NvClassFrame::canonical);
            let mut c = tally(&frames[0], &frames);
            c.basis = BasisChoice::NonMagnetic;
            c.x_mode = XMode::Random;
            return c;
        };
        let frames = NvClass::ALL.map(|k| NvClassFrame::in_field(k, &b));
        let proj: Vec<f64> = frames.iter().map(|f| f.z.dot(&b)).collect();
        let mut best: Option<(usize, Vec<NvClassFrame>)> = None;
        for i in 0..4 {
            let group: Vec<NvClassFrame> = (0..4)
                .filter(|&j| (proj[j] - proj[i]).abs() < 1e-9)
                .map(|j| frames[j])
                .collect();
            if best.as_ref().is_none_or(|(_, g)| group.len() > g.len()) {
                best = Some((i, group));
            }
        }
        let (probe, group) = best.expect("four classes");
        tally(&frames[probe], &group)
    }
}

fn tally(probe: &NvClassFrame, group: &[NvClassFrame]) -> ResonanceComposition {
    let mut c = ResonanceComposition {
        basis: BasisChoice::Magnetic,
        x_mode: XMode::Random,
        same: 0,
        close: 0,
        far: 0,
    };
    for f in group {
        match ZAngle::classify(probe.z.dot(&f.z)) {
            Some(ZAngle::Same) => c.same += 1,
            Some(ZAngle::Close) => c.close += 1,
            Some(ZAngle::Far) => c.far += 1,
            None => {}
        }
    }
    c
}

/// All normalized averages a multiplier computation needs, computed once.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EtaTable {
    pub magnetic: [f64; 3],
    pub nonmagnetic_random: [f64; 3],
    pub nonmagnetic_aligned: [f64; 3],
}

impl EtaTable {
    pub fn row(&self, basis: BasisChoice, x_mode: XMode) -> [f64; 3] {
        match (basis, x_mode) {
            (BasisChoice::Magnetic, _) => self.magnetic,
            (BasisChoice::NonMagnetic, XMode::Random) => self.nonmagnetic_random,
            (BasisChoice::NonMagnetic, XMode::Aligned) => self.nonmagnetic_aligned,
        }
    }

    pub fn get(&self, basis: BasisChoice, z: ZAngle, x_mode: XMode) -> f64 {
        self.row(basis, x_mode)[z as usize]
    }

    /// `η̄²/η̄₀²` with `η̄₀` the same-class MAGNETIC value.
    pub fn multiplier(&self, fs: FieldOrientationScenario) -> f64 {
        let c = fs.composition();
        let row = self.row(c.basis, c.x_mode);
        let sum = c.same as f64 * row[0] + c.close as f64 * row[1] + c.far as f64 * row[2];
        (sum / self.magnetic[0]).powi(2)
    }
}

/// Flip-flop averages for every (basis, x-mode, z-angle) combination.
pub fn eta_table(q: &QuadratureSpec) -> Result<EtaTable> {
    let row = |basis, x_mode| -> Result<[f64; 3]> {
        let mut out = [0.0; 3];
        for (slot, z) in out.iter_mut().zip(ZAngle::ALL) {
            *slot = angular_average(&EtaScenario::flip_flop(basis, z, x_mode), q)?;
        }
        Ok(out)
    };
    Ok(EtaTable {
        magnetic: row(BasisChoice::Magnetic, XMode::Random)?,
        nonmagnetic_random: row(BasisChoice::NonMagnetic, XMode::Random)?,
        nonmagnetic_aligned: row(BasisChoice::NonMagnetic, XMode::Aligned)?,
    })
}

pub fn scenario_multiplier(fs: FieldOrientationScenario, q: &QuadratureSpec) -> Result<f64> {
    let c = fs.composition();
    let same_mag = angular_average(
        &EtaScenario::flip_flop(BasisChoice::Magnetic, ZAngle::Same, XMode::Random),
        q,
    )?;
    let mut sum = 0.0;
    for (count, z) in [
        (c.same, ZAngle::Same),
        (c.close, ZAngle::Close),
        (c.far, ZAngle::Far),
    ] {
        if count > 0 {
            sum +=
                count as f64 * angular_average(&EtaScenario::flip_flop(c.basis, z, c.x_mode), q)?;
        }
    }
    Ok((sum / same_mag).powi(2))
}

/// Multiplier with each class weighted by the Lorentzian resonance factor between its
/// transitions and the probe's, instead of the 0/1 rule. Model extension: the probe is
/// class 1 and each transition branch contributes half.
pub fn weighted_multiplier(
    b_gauss: &Vector3<f64>,
    e_perp_mhz: f64,
    gamma_f_mhz: f64,
    constants: &PhysicalConstants,
    table: &EtaTable,
) -> Result<f64> {
    ensure(gamma_f_mhz > 0.0, || {
        format!("gamma_f must be positive, got {gamma_f_mhz}")
    })?;
    let lines = |class| -> Result<(NvClassFrame, (f64, f64))> {
        let frame = NvClassFrame::in_field(class, b_gauss);
        let field = FieldConfiguration::new(*b_gauss, e_perp_mhz, 0.0)?;
        let eig = diagonalize(&build_hamiltonian(&frame, &field, constants)?)?;
        Ok((frame, eig.transitions_ghz()))
    };
    let (probe, (p_lo, p_hi)) = lines(NvClass::C1)?;
    let basis = if b_gauss.norm() == 0.0 {
        BasisChoice::NonMagnetic
    } else {
        BasisChoice::Magnetic
    };
    let mut sum = 0.0;
    for class in NvClass::ALL {
        let (frame, (lo, hi)) = lines(class)?;
        let w = 0.5
            * (resonance_factor(lo * 1e3, p_lo * 1e3, gamma_f_mhz)?
                + resonance_factor(hi * 1e3, p_hi * 1e3, gamma_f_mhz)?);
        let z = ZAngle::classify(probe.z.dot(&frame.z))
            .ok_or_else(|| Error::InvalidInput("unexpected inter-axis angle".into()))?;
        sum += w * table.get(basis, z, XMode::Random);
    }
    Ok((sum / table.magnetic[0]).powi(2))
}
