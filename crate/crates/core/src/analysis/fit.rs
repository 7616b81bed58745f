use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::simplex::{minimize, SimplexOptions};
use super::DecayCurve;
use crate::error::{ensure, Error, Result};
use crate::relaxation::{DecayModel, BETA_MAX};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FitOptions {
    /// Number of starting points, log-spaced in the timescale (at least 5).
    pub starts: usize,
    pub seed: u64,
    /// Half-width of the uniform jitter applied to each start, in natural-log units.
    pub jitter: f64,
    /// Timescales are confined to `[τ_min/span, τ_max·span]`.
    pub bound_span: f64,
    /// Largest accepted norm of the relative-RSS gradient at the optimum.
    pub gradient_tol: f64,
    pub simplex: SimplexOptions,
}

impl Default for FitOptions {
    fn default() -> Self {
        Self {
            starts: 7,
            seed: 0,
            jitter: 0.1,
            bound_span: 1e3,
            gradient_tol: 1e-6,
            simplex: SimplexOptions::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitResult {
    pub model: DecayModel,
    pub residual_rss: f64,
    pub converged: bool,
    /// Simplex iterations of the winning start.
    pub iterations: usize,
    /// `‖∇(RSS/Σw·S²)‖` over the log-parameters at the optimum.
    pub gradient_norm: f64,
    /// Objective at each starting point.
    pub initial_rss: Vec<f64>,
}

/// Signal shape for given log-parameters at one τ.
type Shape<'a> = dyn Fn(&[f64], f64) -> f64 + 'a;

/// One fitting problem: the signal shape for given log-timescales, amplitude profiled out.
struct Problem<'a> {
    curve: &'a DecayCurve,
    weights: Vec<f64>,
    norm: f64,
    lower: Vec<f64>,
    upper: Vec<f64>,
    shape: Box<Shape<'a>>,
}

impl Problem<'_> {
    fn clamp(&self, p: &[f64]) -> (Vec<f64>, f64) {
        let mut dist = 0.0;
        let q = p
            .iter()
            .zip(self.lower.iter().zip(&self.upper))
            .map(|(&v, (&lo, &hi))| {
                let c = v.clamp(lo, hi);
                dist += (v - c) * (v - c);
                c
            })
            .collect();
        (q, dist)
    }

    /// Optimal amplitude and weighted RSS for parameters `p`.
    fn profile(&self, p: &[f64]) -> (f64, f64) {
        let m: Vec<f64> = self
            .curve
            .tau_s
            .iter()
            .map(|&t| (self.shape)(p, t))
            .collect();
        let (mut num, mut den) = (0.0, 0.0);
        for ((w, s), mi) in self.weights.iter().zip(&self.curve.signal).zip(&m) {
            num += w * s * mi;
            den += w * mi * mi;
        }
        let a = if den > 0.0 {
            (num / den).max(f64::MIN_POSITIVE)
        } else {
            1.0
        };
        (a, self.rss(a, &m))
    }

    fn rss(&self, a: f64, m: &[f64]) -> f64 {
        self.weights
            .iter()
            .zip(&self.curve.signal)
            .zip(m)
            .map(|((w, s), mi)| w * (s - a * mi).powi(2))
            .sum()
    }

    fn objective(&self, p: &[f64]) -> f64 {
        let (q, dist) = self.clamp(p);
        let (_, rss) = self.profile(&q);
        rss + 1e3 * self.norm * dist
    }

    /// Gradient of `RSS/norm` with respect to `(ln A, p…)` by central differences.
    fn gradient_norm(&self, a: f64, p: &[f64]) -> f64 {
        let h = 1e-6;
        let eval = |ln_a: f64, q: &[f64]| {
            let m: Vec<f64> = self
                .curve
                .tau_s
                .iter()
                .map(|&t| (self.shape)(q, t))
                .collect();
            self.rss(ln_a.exp(), &m) / self.norm
        };
        let mut g2 = 0.0;
        let d = (eval(a.ln() + h, p) - eval(a.ln() - h, p)) / (2.0 * h);
        g2 += d * d;
        for k in 0..p.len() {
            let mut hi = p.to_vec();
            let mut lo = p.to_vec();
            hi[k] += h;
            lo[k] -= h;
            let d = (eval(a.ln(), &hi) - eval(a.ln(), &lo)) / (2.0 * h);
            g2 += d * d;
        }
        g2.sqrt()
    }

    fn at_bound(&self, p: &[f64]) -> bool {
        let margin = std::f64::consts::LN_2;
        p.iter()
            .zip(self.lower.iter().zip(&self.upper))
            .any(|(&v, (&lo, &hi))| v < lo + margin || v > hi - margin)
    }
}

fn time_range(curve: &DecayCurve) -> Result<(f64, f64)> {
    let t_min = curve.tau_s.iter().copied().find(|&t| t > 0.0);
    let t_max = *curve.tau_s.last().expect("validated curve");
    match t_min {
        Some(t) if t_max > t => Ok((t, t_max)),
        _ => Err(Error::InvalidInput(
            "need at least two positive sample times".into(),
        )),
    }
}

fn run(
    problem: &Problem,
    starts: &[Vec<f64>],
    steps: &[f64],
    opts: &FitOptions,
    model_of: impl Fn(f64, &[f64]) -> DecayModel,
) -> Result<FitResult> {
    let initial_rss: Vec<f64> = starts.iter().map(|s| problem.objective(s)).collect();
    let mut best: Option<(f64, Vec<f64>, usize, bool)> = None;
    for s in starts {
        let r = minimize(|p| problem.objective(p), s, steps, &opts.simplex);
        if best.as_ref().is_none_or(|b| r.fx < b.0) {
            best = Some((r.fx, r.x, r.iterations, r.converged));
        }
    }
    let (_, x, iterations, simplex_ok) = best.expect("at least one start");
    let (p, _) = problem.clamp(&x);
    let (a, rss) = problem.profile(&p);
    let gradient_norm = problem.gradient_norm(a, &p);
    let converged = simplex_ok && !problem.at_bound(&p) && gradient_norm <= opts.gradient_tol;
    let result = FitResult {
        model: model_of(a, &p),
        residual_rss: rss,
        converged,
        iterations,
        gradient_norm,
        initial_rss,
    };
    if converged {
        Ok(result)
    } else {
        Err(Error::FitNotConverged {
            starts: starts.len(),
            best: Box::new(result),
        })
    }
}

fn start_grid(opts: &FitOptions, t_min: f64, t_max: f64) -> Result<(Vec<f64>, ChaCha8Rng)> {
    ensure(opts.starts >= 5, || {
        format!("need at least 5 starts, got {}", opts.starts)
    })?;
    let rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let (a, b) = (t_min.ln(), t_max.ln());
    let n = opts.starts;
    Ok((
        (0..n)
            .map(|i| a + (b - a) * i as f64 / (n - 1) as f64)
            .collect(),
        rng,
    ))
}

/// Least-squares fit of `A·exp(−√(τ/T1_dd) − τ/T1_ph)`; `T1_ph` is held at `fixed_t1_ph`
/// when given.
pub fn fit_decay(
    curve: &DecayCurve,
    fixed_t1_ph: Option<f64>,
    opts: &FitOptions,
) -> Result<FitResult> {
    curve.validate()?;
    if let Some(t) = fixed_t1_ph {
        ensure(t > 0.0, || format!("fixed T1_ph must be positive, got {t}"))?;
    }
    let (t_min, t_max) = time_range(curve)?;
    let (lo, hi) = (
        (t_min / opts.bound_span).ln(),
        (t_max * opts.bound_span).ln(),
    );
    let free_ph = fixed_t1_ph.is_none();
    let inv_ph = fixed_t1_ph.map_or(0.0, |t| 1.0 / t);
    let dims = if free_ph { 2 } else { 1 };
    let weights = curve.weights();
    let norm = weights
        .iter()
        .zip(&curve.signal)
        .map(|(w, s)| w * s * s)
        .sum::<f64>()
        .max(f64::MIN_POSITIVE);
    let problem = Problem {
        curve,
        weights,
        norm,
        lower: vec![lo; dims],
        upper: vec![hi; dims],
        shape: Box::new(move |p: &[f64], t: f64| {
            let ph = if p.len() > 1 { (-p[1]).exp() } else { inv_ph };
            (-(t * (-p[0]).exp()).sqrt() - t * ph).exp()
        }),
    };
    let (grid, mut rng) = start_grid(opts, t_min, t_max)?;
    let starts: Vec<Vec<f64>> = grid
        .iter()
        .map(|&g| {
            let mut s = vec![g + rng.gen_range(-opts.jitter..=opts.jitter)];
            if free_ph {
                s.push(t_max.ln() + rng.gen_range(-opts.jitter..=opts.jitter));
            }
            s
        })
        .collect();
    run(&problem, &starts, &vec![0.5; dims], opts, |a, p| {
        DecayModel::two_channel(a, p[0].exp(), fixed_t1_ph.unwrap_or_else(|| p[1].exp()))
    })
}

fn beta_of(z: f64) -> f64 {
    BETA_MAX / (1.0 + (-z).exp())
}

/// Least-squares fit of `A·exp(−(τ/T1)^β)` with `β ∈ (0, 1.5)`.
pub fn fit_beta(curve: &DecayCurve, opts: &FitOptions) -> Result<FitResult> {
    curve.validate()?;
    let (t_min, t_max) = time_range(curve)?;
    let (lo, hi) = (
        (t_min / opts.bound_span).ln(),
        (t_max * opts.bound_span).ln(),
    );
    let weights = curve.weights();
    let norm = weights
        .iter()
        .zip(&curve.signal)
        .map(|(w, s)| w * s * s)
        .sum::<f64>()
        .max(f64::MIN_POSITIVE);
    let problem = Problem {
        curve,
        weights,
        norm,
        lower: vec![lo, -12.0],
        upper: vec![hi, 12.0],
        shape: Box::new(|p: &[f64], t: f64| (-(t * (-p[0]).exp()).powf(beta_of(p[1]))).exp()),
    };
    let (grid, mut rng) = start_grid(opts, t_min, t_max)?;
    let starts: Vec<Vec<f64>> = grid
        .iter()
        .map(|&g| {
            vec![
                g + rng.gen_range(-opts.jitter..=opts.jitter),
                rng.gen_range(-opts.jitter..=opts.jitter),
            ]
        })
        .collect();
    run(&problem, &starts, &[0.5, 0.5], opts, |a, p| {
        DecayModel::stretched(a, p[0].exp(), beta_of(p[1]))
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::relaxation::log_spaced;

    fn curve(m: &DecayModel, t_max: f64) -> DecayCurve {
        let tau = log_spaced(t_max * 1e-3, t_max, 40).unwrap();
        DecayCurve::synthetic(m, &tau, 0.0, 0).unwrap()
    }

    #[test]
    fn two_channel_round_trip_fixed_phonon() {
        let truth = DecayModel::two_channel(1.0, 0.6e-3, 3.62e-3);
        let fit = fit_decay(&curve(&truth, 10e-3), Some(3.62e-3), &FitOptions::default()).unwrap();
        assert!((fit.model.t1_dd_s / 0.6e-3 - 1.0).abs() < 1e-4);
        assert!((fit.model.amplitude - 1.0).abs() < 1e-5);
        assert_eq!(fit.model.t1_ph_s, 3.62e-3);
        assert!(fit.initial_rss.iter().all(|&r| fit.residual_rss <= r));
    }

    #[test]
    fn two_channel_round_trip_free_phonon() {
        let truth = DecayModel::two_channel(0.8, 1.0e-3, 4.0e-3);
        let fit = fit_decay(&curve(&truth, 10e-3), None, &FitOptions::default()).unwrap();
        assert!((fit.model.t1_dd_s / 1.0e-3 - 1.0).abs() < 1e-3);
        assert!((fit.model.t1_ph_s / 4.0e-3 - 1.0).abs() < 1e-3);
    }

    #[test]
    fn stretched_round_trip() {
        for beta in [0.5, 1.0, 0.8] {
            let truth = DecayModel::stretched(1.0, 2e-3, beta);
            let fit = fit_beta(&curve(&truth, 20e-3), &FitOptions::default()).unwrap();
            assert!(
                (fit.model.beta - beta).abs() < 1e-4,
                "beta {beta}: {:?}",
                fit.model
            );
        }
    }

    #[test]
    fn constant_curve_is_flagged() {
        let tau = log_spaced(1e-5, 1e-2, 20).unwrap();
        let c = DecayCurve::new(tau, vec![1.0; 20], None).unwrap();
        match fit_decay(&c, Some(3.62e-3), &FitOptions::default()) {
            Err(Error::FitNotConverged { best, .. }) => assert!(!best.converged),
            Ok(r) => panic!("constant curve reported as converged: {r:?}"),
            Err(e) => panic!("unexpected error {e}"),
        }
    }

    #[test]
    fn deterministic_for_fixed_seed() {
        let truth = DecayModel::two_channel(1.0, 0.6e-3, 3.62e-3);
        let tau = log_spaced(1e-5, 1e-2, 30).unwrap();
        let c = DecayCurve::synthetic(&truth, &tau, 0.01, 11).unwrap();
        let opts = FitOptions {
            seed: 5,
            ..FitOptions::default()
        };
        let a = fit_decay(&c, None, &opts);
        let b = fit_decay(&c, None, &opts);
        assert_eq!(format!("{a:?}"), format!("{b:?}"));
    }

    #[test]
    fn too_few_starts_rejected() {
        let truth = DecayModel::two_channel(1.0, 0.6e-3, 3.62e-3);
        let opts = FitOptions {
            starts: 4,
            ..FitOptions::default()
        };
        assert!(fit_decay(&curve(&truth, 1e-2), None, &opts).is_err());
    }
}
