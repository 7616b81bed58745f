use serde::{Deserialize, Serialize};

use super::simplex::{minimize, SimplexOptions};
use crate::error::{ensure, Error, Result};
use crate::quadrature::{integrate_finite, integrate_to_infinity, GaussLegendre};

const OVERLAP_TOL: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum LineShape {
    Gaussian,
    Lorentzian,
    /// Sampled profile; `offsets_mhz` are relative to the line center and increasing.
    Tabulated {
        offsets_mhz: Vec<f64>,
        values: Vec<f64>,
    },
}

/// A single line. `width_mhz` is the standard deviation (Gaussian) or the half width at half
/// maximum (Lorentzian); it is ignored for tabulated shapes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LineProfile {
    pub shape: LineShape,
    pub width_mhz: f64,
    pub center_mhz: f64,
}

impl LineProfile {
    pub fn gaussian(sigma_mhz: f64, center_mhz: f64) -> Self {
        Self {
            shape: LineShape::Gaussian,
            width_mhz: sigma_mhz,
            center_mhz,
        }
    }

    pub fn lorentzian(hwhm_mhz: f64, center_mhz: f64) -> Self {
        Self {
            shape: LineShape::Lorentzian,
            width_mhz: hwhm_mhz,
            center_mhz,
        }
    }

    pub fn tabulated(offsets_mhz: Vec<f64>, values: Vec<f64>, center_mhz: f64) -> Result<Self> {
        let p = Self {
            shape: LineShape::Tabulated {
                offsets_mhz,
                values,
            },
            width_mhz: 1.0,
            center_mhz,
        };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        match &self.shape {
            LineShape::Tabulated {
                offsets_mhz,
                values,
            } => {
                ensure(offsets_mhz.len() == values.len(), || {
                    "tabulated grid and values differ in length".into()
                })?;
                if offsets_mhz.len() < 2 || !offsets_mhz.windows(2).all(|w| w[1] > w[0]) {
                    return Err(Error::NonNormalizable(
                        "tabulated grid needs >= 2 strictly increasing points".into(),
                    ));
                }
                if values.iter().any(|v| !v.is_finite() || *v < 0.0) {
                    return Err(Error::NonNormalizable(
                        "negative or non-finite values".into(),
                    ));
                }
                let area = trapezoid(offsets_mhz, values);
                if !(area > 0.0 && area.is_finite()) {
                    return Err(Error::NonNormalizable(format!("area {area}")));
                }
                Ok(())
            }
            _ => ensure(self.width_mhz > 0.0 && self.width_mhz.is_finite(), || {
                format!("width must be positive, got {}", self.width_mhz)
            }),
        }
    }

    /// Unit-area density at offset `x` (MHz) from the center.
    pub fn density(&self, x: f64) -> f64 {
        let w = self.width_mhz;
        match &self.shape {
            LineShape::Gaussian => {
                (-0.5 * (x / w).powi(2)).exp() / (w * (2.0 * std::f64::consts::PI).sqrt())
            }
            LineShape::Lorentzian => w / (std::f64::consts::PI * (x * x + w * w)),
            LineShape::Tabulated {
                offsets_mhz,
                values,
            } => interpolate(offsets_mhz, values, x) / trapezoid(offsets_mhz, values),
        }
    }

    /// Density relative to its value at the center.
    pub fn peak_normalized(&self, x: f64) -> f64 {
        let peak = match &self.shape {
            LineShape::Tabulated { .. } => self.max_density(),
            _ => self.density(0.0),
        };
        self.density(x) / peak
    }

    fn max_density(&self) -> f64 {
        match &self.shape {
            LineShape::Tabulated {
                offsets_mhz,
                values,
            } => values.iter().copied().fold(0.0, f64::max) / trapezoid(offsets_mhz, values),
            _ => self.density(0.0),
        }
    }

    fn knots(&self) -> Option<&[f64]> {
        match &self.shape {
            LineShape::Tabulated { offsets_mhz, .. } => Some(offsets_mhz),
            _ => None,
        }
    }
}

fn trapezoid(x: &[f64], y: &[f64]) -> f64 {
    x.windows(2)
        .zip(y.windows(2))
        .map(|(xw, yw)| 0.5 * (xw[1] - xw[0]) * (yw[0] + yw[1]))
        .sum()
}

fn interpolate(x: &[f64], y: &[f64], at: f64) -> f64 {
    if at < x[0] || at > x[x.len() - 1] {
        return 0.0;
    }
    let i = x.partition_point(|&v| v <= at).clamp(1, x.len() - 1);
    let t = (at - x[i - 1]) / (x[i] - x[i - 1]);
    y[i - 1] + t * (y[i] - y[i - 1])
}

/// `S(Δν) = ∫ S₁(ν − ν₁) S₂(ν − ν₂) dν` with `Δν = ν₁ − ν₂`, line centers ignored (each
/// profile is taken at its own center), so the curve depends on the shapes only.
pub fn spectral_overlap(
    p1: &LineProfile,
    p2: &LineProfile,
    delta_nu_mhz: &[f64],
) -> Result<Vec<f64>> {
    p1.validate()?;
    p2.validate()?;
    Ok(delta_nu_mhz
        .iter()
        .map(|&d| overlap_at(p1, p2, d))
        .collect())
}

fn overlap_at(p1: &LineProfile, p2: &LineProfile, delta: f64) -> f64 {
    // ∫ p1(x) p2(x + Δν) dx
    let f = |x: f64| p1.density(x) * p2.density(x + delta);
    let mut knots: Vec<f64> = Vec::new();
    if let Some(k) = p1.knots() {
        knots.extend_from_slice(k);
    }
    if let Some(k) = p2.knots() {
        knots.extend(k.iter().map(|v| v - delta));
    }
    if !knots.is_empty() {
        // support bounded by the tabulated profile(s); piecewise polynomial between knots
        let lo = p1
            .knots()
            .map_or(f64::NEG_INFINITY, |k| k[0])
            .max(p2.knots().map_or(f64::NEG_INFINITY, |k| k[0] - delta));
        let hi = p1
            .knots()
            .map_or(f64::INFINITY, |k| k[k.len() - 1])
            .min(p2.knots().map_or(f64::INFINITY, |k| k[k.len() - 1] - delta));
        if hi <= lo {
            return 0.0;
        }
        knots.retain(|&v| v > lo && v < hi);
        knots.push(lo);
        knots.push(hi);
        knots.sort_by(f64::total_cmp);
        let gl = GaussLegendre::new(16);
        return knots.windows(2).map(|w| gl.integrate(w[0], w[1], f)).sum();
    }
    let (a, b) = if delta > 0.0 {
        (-delta, 0.0)
    } else {
        (0.0, -delta)
    };
    let scale = p1.width_mhz.min(p2.width_mhz);
    let mut total = integrate_to_infinity(f, b, scale, OVERLAP_TOL)
        + integrate_to_infinity(|x| f(2.0 * a - x), a, scale, OVERLAP_TOL);
    if b > a {
        total += integrate_finite(f, a, b, OVERLAP_TOL);
    }
    total
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct WidthFit {
    pub width_mhz: f64,
    pub amplitude: f64,
    pub rss: f64,
}

/// Fit `a·profile(Δν)` of the given analytic shape, centered at zero, to a sampled curve.
pub fn fit_line_width(delta_nu_mhz: &[f64], values: &[f64], shape: &LineShape) -> Result<WidthFit> {
    ensure(
        delta_nu_mhz.len() == values.len() && values.len() >= 3,
        || "need at least 3 matching samples".into(),
    )?;
    ensure(!matches!(shape, LineShape::Tabulated { .. }), || {
        "width fits need an analytic shape".into()
    })?;
    let model = |ln_w: f64| LineProfile {
        shape: shape.clone(),
        width_mhz: ln_w.exp(),
        center_mhz: 0.0,
    };
    let solve = |ln_w: f64| {
        let p = model(ln_w);
        let m: Vec<f64> = delta_nu_mhz.iter().map(|&d| p.density(d)).collect();
        let num: f64 = m.iter().zip(values).map(|(a, b)| a * b).sum();
        let den: f64 = m.iter().map(|a| a * a).sum();
        let amp = if den > 0.0 { num / den } else { 0.0 };
        let rss: f64 = m
            .iter()
            .zip(values)
            .map(|(a, b)| (b - amp * a).powi(2))
            .sum();
        (amp, rss)
    };
    let span = delta_nu_mhz
        .iter()
        .fold(0.0_f64, |m, v| m.max(v.abs()))
        .max(1e-12);
    let r = minimize(
        |x| solve(x[0]).1,
        &[(0.25 * span).ln()],
        &[0.5],
        &SimplexOptions::default(),
    );
    let (amplitude, rss) = solve(r.x[0]);
    Ok(WidthFit {
        width_mhz: r.x[0].exp(),
        amplitude,
        rss,
    })
}
