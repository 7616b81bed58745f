//! Decay-curve fitting, line-shape overlaps and magnetometry sensitivity.

mod curve;
mod fit;
mod overlap;
pub mod simplex;

pub use curve::DecayCurve;
pub use fit::{fit_beta, fit_decay, FitOptions, FitResult};
pub use overlap::{fit_line_width, spectral_overlap, LineProfile, LineShape, WidthFit};

use crate::error::{ensure, Result};

/// DC sensitivity `η = σ_B·√τ` (T/√Hz for σ in T and τ in s).
pub fn sensitivity(sigma_b_t: f64, tau_lp_s: f64) -> Result<f64> {
    ensure(sigma_b_t > 0.0 && sigma_b_t.is_finite(), || {
        format!("sigma_B must be positive, got {sigma_b_t}")
    })?;
    ensure(tau_lp_s > 0.0 && tau_lp_s.is_finite(), || {
        format!("time constant must be positive, got {tau_lp_s}")
    })?;
    Ok(sigma_b_t * tau_lp_s.sqrt())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sensitivity_values() {
        let eta = sensitivity(1.5e-6, 3e-3).unwrap();
        assert!((eta * 1e9 - 82.158).abs() < 1e-3);
        assert!((sensitivity(3e-6, 3e-3).unwrap() - 2.0 * eta).abs() < 1e-18);
        assert_eq!(sensitivity(1.5e-6, 1.0).unwrap(), 1.5e-6);
        assert!(sensitivity(0.0, 1.0).is_err());
        assert!(sensitivity(1.0, -1.0).is_err());
    }
}
