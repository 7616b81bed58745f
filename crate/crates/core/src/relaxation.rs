//! Fluctuator-limited relaxation: rate distribution, characteristic time and decay laws.

use serde::{Deserialize, Serialize};

use crate::constants::PhysicalConstants;
use crate::dipolar::resonance_factor;
use crate::error::{ensure, Result};
use crate::quadrature::{integrate_finite, integrate_to_infinity};

/// Absolute tolerance handed to the double-exponential rule for rate integrals.
pub const RATE_INTEGRAL_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FluctuatorParams {
    /// Fluctuator density (nm⁻³).
    pub n_f_per_nm3: f64,
    /// Fluctuator decay rate (s⁻¹).
    pub gamma_f_per_s: f64,
    /// Averaged dimensionless coupling η̄.
    pub eta_bar: f64,
    /// Dipolar strength (MHz·nm³).
    pub j0_mhz_nm3: f64,
}

impl FluctuatorParams {
    pub fn new(n_f_per_nm3: f64, gamma_f_per_s: f64, eta_bar: f64, c: &PhysicalConstants) -> Self {
        Self {
            n_f_per_nm3,
            gamma_f_per_s,
            eta_bar,
            j0_mhz_nm3: c.j0_mhz_nm3,
        }
    }

    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("n_f", self.n_f_per_nm3),
            ("gamma_f", self.gamma_f_per_s),
            ("eta_bar", self.eta_bar),
            ("J0", self.j0_mhz_nm3),
        ] {
            ensure(v > 0.0 && v.is_finite(), || {
                format!("{name} must be positive, got {v}")
            })?;
        }
        Ok(())
    }
}

/// `1/T = (4π n_f J0 η̄ / 3)² · π / γ_f` in s⁻¹, with J0 taken as an angular frequency.
pub fn characteristic_rate(p: &FluctuatorParams) -> Result<f64> {
    p.validate()?;
    let j0 = std::f64::consts::TAU * p.j0_mhz_nm3 * 1e6;
    let coupling = 4.0 * std::f64::consts::PI * p.n_f_per_nm3 * j0 * p.eta_bar / 3.0;
    Ok(coupling * coupling * std::f64::consts::PI / p.gamma_f_per_s)
}

pub fn characteristic_time(p: &FluctuatorParams) -> Result<f64> {
    Ok(1.0 / characteristic_rate(p)?)
}

/// Distribution of single-spin relaxation rates `ρ(γ) = e^{−1/(4γT)} / √(4πγ³T)` (units of s).
pub fn rate_density(gamma: f64, t_char: f64) -> Result<f64> {
    ensure(gamma > 0.0 && gamma.is_finite(), || {
        format!("gamma must be positive, got {gamma}")
    })?;
    ensure(t_char > 0.0 && t_char.is_finite(), || {
        format!("T must be positive, got {t_char}")
    })?;
    let g = gamma * t_char;
    Ok((-0.25 / g).exp() / (4.0 * std::f64::consts::PI * g * g * g).sqrt() * t_char)
}

/// Most probable rate, `1/(6T)`.
pub fn rate_mode(t_char: f64) -> f64 {
    1.0 / (6.0 * t_char)
}

/// `∫₀^∞ ρ(γ) f(γ) dγ`.
///
/// With `γT = 1/w²` the measure becomes `e^{−w²/4} dw / √π` on `w ∈ [0, ∞)`, which removes
/// both the essential singularity at γ → 0 and the heavy tail.
pub fn rate_average(f: impl Fn(f64) -> f64, t_char: f64, split_w: f64) -> f64 {
    let inv_sqrt_pi = 1.0 / std::f64::consts::PI.sqrt();
    let g = |w: f64| {
        if w <= 0.0 {
            return 0.0;
        }
        let gamma = 1.0 / (w * w * t_char);
        (-0.25 * w * w).exp() * inv_sqrt_pi * f(gamma)
    };
    let split = split_w.max(1e-3);
    integrate_finite(g, 0.0, split, RATE_INTEGRAL_TOL)
        + integrate_to_infinity(g, split, 2.0, RATE_INTEGRAL_TOL)
}

/// Total probability of the rate distribution (should be 1).
pub fn rate_normalization(t_char: f64) -> f64 {
    rate_average(|_| 1.0, t_char, 2.0)
}

/// Ensemble polarization by direct integration, `∫ρ(γ)e^{−γt}dγ`.
pub fn laplace_polarization(t: f64, t_char: f64) -> f64 {
    // integrand peaks at w⁴ = 4t/T
    let split = (4.0 * t / t_char).powf(0.25);
    rate_average(|gamma| (-gamma * t).exp(), t_char, split)
}

/// Closed form `e^{−√(t/T)}`.
pub fn polarization(t: f64, t_char: f64) -> f64 {
    (-(t.max(0.0) / t_char).sqrt()).exp()
}

/// `S(τ) = A·exp(−(τ/T1_dd)^β − τ/T1_ph)`.
///
/// `β = 1/2` with finite `T1_ph` is the two-channel law; `T1_ph = ∞` gives the pure
/// stretched exponential.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DecayModel {
    pub amplitude: f64,
    pub t1_dd_s: f64,
    pub t1_ph_s: f64,
    pub beta: f64,
}

/// Upper end of the stretch-exponent window.
pub const BETA_MAX: f64 = 1.5;

impl DecayModel {
    pub fn two_channel(amplitude: f64, t1_dd_s: f64, t1_ph_s: f64) -> Self {
        Self {
            amplitude,
            t1_dd_s,
            t1_ph_s,
            beta: 0.5,
        }
    }

    pub fn stretched(amplitude: f64, t1_s: f64, beta: f64) -> Self {
        Self {
            amplitude,
            t1_dd_s: t1_s,
            t1_ph_s: f64::INFINITY,
            beta,
        }
    }

    pub fn validate(&self) -> Result<()> {
        ensure(self.amplitude > 0.0 && self.amplitude.is_finite(), || {
            format!("amplitude must be positive, got {}", self.amplitude)
        })?;
        ensure(self.t1_dd_s > 0.0 && self.t1_dd_s.is_finite(), || {
            format!("T1_dd must be positive, got {}", self.t1_dd_s)
        })?;
        ensure(self.t1_ph_s > 0.0 && !self.t1_ph_s.is_nan(), || {
            format!("T1_ph must be positive, got {}", self.t1_ph_s)
        })?;
        ensure(self.beta > 0.0 && self.beta <= BETA_MAX, || {
            format!("beta must lie in (0, {BETA_MAX}], got {}", self.beta)
        })
    }

    pub fn log_signal(&self, tau: f64) -> f64 {
        self.amplitude.ln() - (tau / self.t1_dd_s).powf(self.beta) - tau / self.t1_ph_s
    }
}

pub fn decay_signal(tau: f64, m: &DecayModel) -> f64 {
    m.log_signal(tau).exp()
}

/// Geometric grid of `n` points from `t_min` to `t_max`.
pub fn log_spaced(t_min: f64, t_max: f64, n: usize) -> Result<Vec<f64>> {
    ensure(t_min > 0.0 && t_max > t_min && n >= 2, || {
        format!("need 0 < t_min < t_max and n >= 2 (got {t_min}, {t_max}, {n})")
    })?;
    let (a, b) = (t_min.ln(), t_max.ln());
    Ok((0..n)
        .map(|i| (a + (b - a) * i as f64 / (n - 1) as f64).exp())
        .collect())
}

/// Extra rate from double-flip processes: the flip-flop-type rate of `p` (with its own
/// η̄) scaled by the Lorentzian resonance factor at the `|+⟩/|−⟩` splitting. This channel
/// is a model extension with no reference values.
pub fn double_flip_rate(
    p: &FluctuatorParams,
    splitting_mhz: f64,
    linewidth_mhz: f64,
) -> Result<f64> {
    Ok(characteristic_rate(p)? * resonance_factor(splitting_mhz, 0.0, linewidth_mhz)?)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn params() -> FluctuatorParams {
        FluctuatorParams::new(1e-4, 1e7, 0.0555, &PhysicalConstants::default())
    }

    #[test]
    fn rate_scaling() {
        let p = params();
        let r = characteristic_rate(&p).unwrap();
        let r2 = characteristic_rate(&FluctuatorParams {
            eta_bar: 2.0 * p.eta_bar,
            ..p
        })
        .unwrap();
        assert!((r2 / r - 4.0).abs() < 1e-12);
        let r3 = characteristic_rate(&FluctuatorParams {
            gamma_f_per_s: 2.0 * p.gamma_f_per_s,
            ..p
        })
        .unwrap();
        assert!((r / r3 - 2.0).abs() < 1e-12);
        assert!(characteristic_rate(&FluctuatorParams {
            n_f_per_nm3: 0.0,
            ..p
        })
        .is_err());
    }

    #[test]
    fn rate_value_by_hand() {
        let p = params();
        let j = 2.0 * std::f64::consts::PI * 52e6;
        let c = 4.0 * std::f64::consts::PI * 1e-4 * j * 0.0555 / 3.0;
        let expect = c * c * std::f64::consts::PI / 1e7;
        assert!((characteristic_rate(&p).unwrap() / expect - 1.0).abs() < 1e-14);
    }

    #[test]
    fn density_properties() {
        assert!(rate_density(0.0, 1.0).is_err());
        assert!(rate_density(1.0, -1.0).is_err());
        let t = 2e-3;
        let mode = rate_mode(t);
        let at = |g: f64| rate_density(g, t).unwrap();
        assert!(at(mode) > at(mode * 1.01) && at(mode) > at(mode * 0.99));
        assert!((rate_normalization(t) - 1.0).abs() < 1e-9);
    }

    #[test]
    fn density_matches_substituted_measure() {
        // ∫ρ over [γ1, γ2] directly vs via rate_average of an indicator-free integrand
        let t = 1.0;
        let direct = integrate_finite(|g| rate_density(g, t).unwrap(), 0.05, 3.0, 1e-12);
        let w_lo = (1.0 / (3.0 * t)).sqrt();
        let w_hi = (1.0 / (0.05 * t)).sqrt();
        let sub = integrate_finite(
            |w| (-0.25 * w * w).exp() / std::f64::consts::PI.sqrt(),
            w_lo,
            w_hi,
            1e-12,
        );
        assert!((direct - sub).abs() < 1e-10);
    }

    #[test]
    fn laplace_identity() {
        for s in [0.01, 0.25, 1.0, 4.0, 100.0] {
            let t = 3e-3;
            let v = laplace_polarization(s * t, t);
            assert!((v - polarization(s * t, t)).abs() < 1e-9, "t/T = {s}");
        }
    }

    #[test]
    fn polarization_points() {
        assert_eq!(polarization(0.0, 1.0), 1.0);
        assert!((polarization(1.0, 1.0) - (-1f64).exp()).abs() < 1e-15);
        assert!((polarization(4.0, 1.0) - (-2f64).exp()).abs() < 1e-15);
    }

    #[test]
    fn decay_forms() {
        let m = DecayModel::two_channel(1.0, 0.6e-3, 3.6e-3);
        let v = decay_signal(0.6e-3, &m);
        assert!((v - (-1.0 - 1.0 / 6.0f64).exp()).abs() < 1e-14);
        let pure = DecayModel::two_channel(1.0, 0.6e-3, f64::INFINITY);
        assert!((decay_signal(2e-3, &pure) - polarization(2e-3, 0.6e-3)).abs() < 1e-15);
        let exp = DecayModel::stretched(2.0, 1e-3, 1.0);
        assert!((decay_signal(1e-3, &exp) - 2.0 * (-1f64).exp()).abs() < 1e-15);
        assert_eq!(decay_signal(0.0, &m), 1.0);
        assert!(DecayModel::stretched(1.0, 1.0, 1.6).validate().is_err());
        assert!(DecayModel::stretched(1.0, 1.0, 1.5).validate().is_ok());
    }

    #[test]
    fn double_flip_channel() {
        let p = params();
        let full = characteristic_rate(&p).unwrap();
        assert!((double_flip_rate(&p, 0.0, 1.0).unwrap() - full).abs() < 1e-9 * full);
        assert!((double_flip_rate(&p, 2.0, 1.0).unwrap() - 0.5 * full).abs() < 1e-9 * full);
    }
}
