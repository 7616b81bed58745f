//! Transition frequencies of the four classes, inter-class degeneracies and synthetic ODMR
//! spectra.

use nalgebra::Vector3;
use serde::Serialize;

use crate::analysis::LineProfile;
use crate::constants::PhysicalConstants;
use crate::error::{ensure, Result};
use crate::spin::operators::Ket3;
use crate::spin::{build_hamiltonian, diagonalize, FieldConfiguration, NvClass, NvClassFrame};

/// Interaction range used to decide whether two lines still exchange polarization (MHz).
pub const DEFAULT_CR_RANGE_MHZ: f64 = 8.04;

/// Default misaligned direction: 24° from [100], tilted toward the midpoint azimuth between
/// [010] and a 45° {110} plane.
pub fn default_misaligned_direction() -> Vector3<f64> {
    let tilt = 24f64.to_radians();
    let azimuth = 22.5f64.to_radians();
    Vector3::new(
        tilt.cos(),
        tilt.sin() * azimuth.cos(),
        tilt.sin() * azimuth.sin(),
    )
}

/// Transition frequencies of every class at one field value.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TransitionSet {
    pub b_gauss: [f64; 3],
    pub e_perp_mhz: f64,
    /// Per class: `[ν(g→d), ν(g→e)]` in GHz, branches followed continuously along a scan.
    pub lines_ghz: [[f64; 2]; 4],
}

impl TransitionSet {
    pub fn amplitude_gauss(&self) -> f64 {
        Vector3::from(self.b_gauss).norm()
    }

    /// All eight lines, class-major.
    pub fn flat(&self) -> [f64; 8] {
        let mut out = [0.0; 8];
        for (c, pair) in self.lines_ghz.iter().enumerate() {
            out[2 * c] = pair[0];
            out[2 * c + 1] = pair[1];
        }
        out
    }
}

fn unit_direction(direction: &Vector3<f64>) -> Result<Vector3<f64>> {
    let n = direction.norm();
    ensure(n > 0.0 && n.is_finite(), || {
        "field direction must be non-zero".into()
    })?;
    Ok(direction / n)
}

/// Orderings of three branches.
const PERMUTATIONS: [[usize; 3]; 6] = [
    [0, 1, 2],
    [0, 2, 1],
    [1, 0, 2],
    [1, 2, 0],
    [2, 0, 1],
    [2, 1, 0],
];

/// Transitions of every class along `direction` at each amplitude in `amplitudes_gauss`.
///
/// Eigenstates at each grid point are matched to those of the previous point by maximal
/// total overlap, so branches keep their identity through crossings.
pub fn all_transitions(
    direction: &Vector3<f64>,
    amplitudes_gauss: &[f64],
    e_perp_mhz: f64,
    constants: &PhysicalConstants,
) -> Result<Vec<TransitionSet>> {
    let d = unit_direction(direction)?;
    ensure(!amplitudes_gauss.is_empty(), || {
        "amplitude grid is empty".into()
    })?;
    ensure(
        amplitudes_gauss.iter().all(|b| *b >= 0.0 && b.is_finite()),
        || "amplitudes must be finite and >= 0".into(),
    )?;
    constants.validate()?;
    let frames = NvClass::ALL.map(|c| NvClassFrame::in_field(c, &d));
    let mut previous: [Option<[Ket3; 3]>; 4] = [None; 4];
    let mut out = Vec::with_capacity(amplitudes_gauss.len());
    for &b in amplitudes_gauss {
        let field = FieldConfiguration::new(d * b, e_perp_mhz, 0.0)?;
        let mut lines = [[0.0; 2]; 4];
        for (c, frame) in frames.iter().enumerate() {
            let eig = diagonalize(&build_hamiltonian(frame, &field, constants)?)?;
            let perm = match &previous[c] {
                None => PERMUTATIONS[0],
                Some(prev) => best_permutation(prev, &eig.states),
            };
            let e = perm.map(|i| eig.energies[i]);
            lines[c] = [e[1] - e[0], e[2] - e[0]];
            previous[c] = Some(perm.map(|i| eig.states[i]));
        }
        out.push(TransitionSet {
            b_gauss: (d * b).into(),
            e_perp_mhz,
            lines_ghz: lines,
        });
    }
    Ok(out)
}

fn best_permutation(prev: &[Ket3; 3], cur: &[Ket3; 3]) -> [usize; 3] {
    let score =
        |p: &[usize; 3]| -> f64 { (0..3).map(|k| prev[k].dotc(&cur[p[k]]).norm_sqr()).sum() };
    let mut best = PERMUTATIONS[0];
    let mut best_score = score(&best);
    for p in &PERMUTATIONS[1..] {
        let s = score(p);
        if s > best_score + 1e-12 {
            best = *p;
            best_score = s;
        }
    }
    best
}

/// Distance from one class's line to the nearest line of another class in the same family.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PairCurve {
    pub class: NvClass,
    /// 0 for `g→d`, 1 for `g→e`.
    pub family: usize,
    pub dnu_mhz: Vec<f64>,
    /// Field above which the curve stays beyond the interaction range.
    pub crossing_gauss: Option<f64>,
}

impl PairCurve {
    pub fn label(&self) -> String {
        let fam = if self.family == 0 { "gd" } else { "ge" };
        format!("class{}_{fam}", self.class)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DegeneracyReport {
    pub cr_range_mhz: f64,
    pub amplitudes_gauss: Vec<f64>,
    pub curves: Vec<PairCurve>,
    /// Smallest inter-class distance at each amplitude.
    pub min_dnu_mhz: Vec<f64>,
    /// Field above which every line is separated from all other classes by more than
    /// `cr_range_mhz`.
    pub lift_gauss: Option<f64>,
}

fn nearest_distances(lines: &[[f64; 2]; 4]) -> [[f64; 2]; 4] {
    let mut out = [[f64::INFINITY; 2]; 4];
    for c in 0..4 {
        for f in 0..2 {
            for o in (0..4).filter(|&o| o != c) {
                out[c][f] = out[c][f].min((lines[c][f] - lines[o][f]).abs() * 1e3);
            }
        }
    }
    out
}

fn min_distance(lines: &[[f64; 2]; 4]) -> f64 {
    nearest_distances(lines)
        .iter()
        .flatten()
        .copied()
        .fold(f64::INFINITY, f64::min)
}

/// Last upward crossing of `level` on the sampled curve, refined by bisection on
/// `evaluate` inside the bracketing interval.
fn crossing(
    grid: &[f64],
    values: &[f64],
    level: f64,
    evaluate: &dyn Fn(f64) -> Result<f64>,
) -> Result<Option<f64>> {
    let Some(last_below) = values.iter().rposition(|&v| v <= level) else {
        return Ok(grid.first().copied().filter(|_| false));
    };
    if last_below + 1 >= grid.len() {
        return Ok(None);
    }
    let (mut lo, mut hi) = (grid[last_below], grid[last_below + 1]);
    for _ in 0..80 {
        let mid = 0.5 * (lo + hi);
        if evaluate(mid)? <= level {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo <= 1e-12 * hi.max(1.0) {
            break;
        }
    }
    Ok(Some(0.5 * (lo + hi)))
}

/// Inter-class splittings along `direction` and the fields at which they exceed
/// `cr_range_mhz`.
pub fn degeneracy_lift(
    direction: &Vector3<f64>,
    amplitudes_gauss: &[f64],
    cr_range_mhz: f64,
    e_perp_mhz: f64,
    constants: &PhysicalConstants,
) -> Result<DegeneracyReport> {
    ensure(cr_range_mhz > 0.0, || {
        format!("CR range must be positive, got {cr_range_mhz}")
    })?;
    ensure(amplitudes_gauss.windows(2).all(|w| w[1] > w[0]), || {
        "amplitude grid must be strictly increasing".into()
    })?;
    let d = unit_direction(direction)?;
    let sets = all_transitions(&d, amplitudes_gauss, e_perp_mhz, constants)?;
    let distances: Vec<[[f64; 2]; 4]> = sets
        .iter()
        .map(|s| nearest_distances(&s.lines_ghz))
        .collect();
    let at = |b: f64| -> Result<[[f64; 2]; 4]> {
        let set = all_transitions(&d, &[b], e_perp_mhz, constants)?;
        Ok(set[0].lines_ghz)
    };

    let mut curves = Vec::with_capacity(8);
    for class in NvClass::ALL {
        for family in 0..2 {
            let c = class.index();
            let dnu: Vec<f64> = distances.iter().map(|x| x[c][family]).collect();
            let eval = |b: f64| Ok(nearest_distances(&at(b)?)[c][family]);
            let crossing_gauss = crossing(amplitudes_gauss, &dnu, cr_range_mhz, &eval)?;
            curves.push(PairCurve {
                class,
                family,
                dnu_mhz: dnu,
                crossing_gauss,
            });
        }
    }
    let min_dnu: Vec<f64> = sets.iter().map(|s| min_distance(&s.lines_ghz)).collect();
    let eval_min = |b: f64| Ok(min_distance(&at(b)?));
    let lift_gauss = crossing(amplitudes_gauss, &min_dnu, cr_range_mhz, &eval_min)?;
    Ok(DegeneracyReport {
        cr_range_mhz,
        amplitudes_gauss: amplitudes_gauss.to_vec(),
        curves,
        min_dnu_mhz: min_dnu,
        lift_gauss,
    })
}

/// Normalized photoluminescence `1 − Σ contrast·shape(ν − νᵢ)` with peak-normalized line
/// shapes; `contrast_per_line` holds one value per class.
pub fn synth_spectrum(
    set: &TransitionSet,
    profile: &LineProfile,
    contrast_per_line: &[f64; 4],
    freq_ghz: &[f64],
) -> Result<Vec<f64>> {
    profile.validate()?;
    ensure(
        contrast_per_line.iter().all(|c| *c >= 0.0 && c.is_finite()),
        || "contrast must be >= 0".into(),
    )?;
    Ok(freq_ghz
        .iter()
        .map(|&f| {
            let mut dip = 0.0;
            for (pair, c) in set.lines_ghz.iter().zip(contrast_per_line) {
                for nu in pair {
                    dip += c * profile.peak_normalized((f - nu) * 1e3);
                }
            }
            1.0 - dip
        })
        .collect())
}

/// Frequency grid covering all lines of `set` with `margin_mhz` on both sides.
pub fn spectrum_grid(set: &TransitionSet, margin_mhz: f64, n: usize) -> Result<Vec<f64>> {
    ensure(n >= 2 && margin_mhz > 0.0, || {
        "need n >= 2 and a positive margin".into()
    })?;
    let flat = set.flat();
    let lo = flat.iter().copied().fold(f64::INFINITY, f64::min) - margin_mhz * 1e-3;
    let hi = flat.iter().copied().fold(f64::NEG_INFINITY, f64::max) + margin_mhz * 1e-3;
    Ok((0..n)
        .map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64)
        .collect())
}

/// Number of local minima deeper than `min_depth` below the off-resonance level.
pub fn count_dips(pl: &[f64], min_depth: f64) -> usize {
    let mut count = 0;
    let mut i = 1;
    while i + 1 < pl.len() {
        if pl[i] < pl[i - 1] && 1.0 - pl[i] > min_depth {
            // walk over a flat bottom
            let mut j = i;
            while j + 1 < pl.len() && pl[j + 1] == pl[i] {
                j += 1;
            }
            if j + 1 < pl.len() && pl[j + 1] > pl[i] {
                count += 1;
            }
            i = j + 1;
        } else {
            i += 1;
        }
    }
    count
}
