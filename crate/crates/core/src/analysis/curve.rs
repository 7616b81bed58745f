use std::io::{Read, Write};
use std::path::Path;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::error::{ensure, Error, Result};
use crate::relaxation::{decay_signal, DecayModel};

/// Sampled decay `(τ, S(τ))` with optional per-point uncertainty.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecayCurve {
    pub tau_s: Vec<f64>,
    pub signal: Vec<f64>,
    pub sigma: Option<Vec<f64>>,
}

#[derive(Debug, Serialize, Deserialize)]
struct Row {
    tau_s: f64,
    signal: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    sigma: Option<f64>,
}

impl DecayCurve {
    pub const MIN_POINTS: usize = 8;

    pub fn new(tau_s: Vec<f64>, signal: Vec<f64>, sigma: Option<Vec<f64>>) -> Result<Self> {
        let c = Self {
            tau_s,
            signal,
            sigma,
        };
        c.validate()?;
        Ok(c)
    }

    pub fn validate(&self) -> Result<()> {
        let n = self.tau_s.len();
        ensure(n == self.signal.len(), || {
            format!("{n} times but {} signal values", self.signal.len())
        })?;
        ensure(n >= Self::MIN_POINTS, || {
            format!("need at least {} points, got {n}", Self::MIN_POINTS)
        })?;
        ensure(self.tau_s.iter().all(|t| t.is_finite()), || {
            "non-finite time".into()
        })?;
        ensure(self.tau_s.windows(2).all(|w| w[1] > w[0]), || {
            "times must be strictly increasing".into()
        })?;
        ensure(self.signal.iter().all(|s| s.is_finite()), || {
            "non-finite signal".into()
        })?;
        if let Some(sigma) = &self.sigma {
            ensure(sigma.len() == n, || "sigma length mismatch".into())?;
            ensure(sigma.iter().all(|s| *s > 0.0 && s.is_finite()), || {
                "sigma values must be positive".into()
            })?;
        }
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.tau_s.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tau_s.is_empty()
    }

    /// Least-squares weights: `1/σ²` when uncertainties are present, 1 otherwise.
    pub fn weights(&self) -> Vec<f64> {
        match &self.sigma {
            Some(s) => s.iter().map(|v| 1.0 / (v * v)).collect(),
            None => vec![1.0; self.len()],
        }
    }

    /// Samples of `m` at `tau_s`, optionally with Gaussian noise of standard deviation
    /// `noise` drawn from a seeded generator.
    pub fn synthetic(m: &DecayModel, tau_s: &[f64], noise: f64, seed: u64) -> Result<Self> {
        m.validate()?;
        ensure(noise >= 0.0 && noise.is_finite(), || {
            format!("noise must be >= 0, got {noise}")
        })?;
        let mut signal: Vec<f64> = tau_s.iter().map(|&t| decay_signal(t, m)).collect();
        let mut sigma = None;
        if noise > 0.0 {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let normal = Normal::new(0.0, noise).map_err(|e| Error::InvalidInput(e.to_string()))?;
            for s in &mut signal {
                *s += normal.sample(&mut rng);
            }
            sigma = Some(vec![noise; tau_s.len()]);
        }
        Self::new(tau_s.to_vec(), signal, sigma)
    }

    /// Read `tau_s,signal[,sigma]` CSV with a header row; `#` lines are comments.
    pub fn from_reader(r: impl Read) -> Result<Self> {
        let mut rdr = csv::ReaderBuilder::new()
            .comment(Some(b'#'))
            .trim(csv::Trim::All)
            .from_reader(r);
        let headers = rdr.headers()?.clone();
        let names: Vec<&str> = headers.iter().collect();
        ensure(
            names.len() >= 2 && names[0] == "tau_s" && names[1] == "signal",
            || {
                format!(
                    "expected header tau_s,signal[,sigma], got {}",
                    names.join(",")
                )
            },
        )?;
        let mut tau = Vec::new();
        let mut signal = Vec::new();
        let mut sigma = Vec::new();
        for row in rdr.deserialize() {
            let row: Row = row?;
            tau.push(row.tau_s);
            signal.push(row.signal);
            if let Some(s) = row.sigma {
                sigma.push(s);
            }
        }
        let sigma = if sigma.is_empty() {
            None
        } else {
            ensure(sigma.len() == tau.len(), || "sigma column has gaps".into())?;
            Some(sigma)
        };
        Self::new(tau, signal, sigma)
    }

    pub fn from_path(path: impl AsRef<Path>) -> Result<Self> {
        let f = std::fs::File::open(path.as_ref()).map_err(|e| {
            Error::InvalidInput(format!("cannot open {}: {e}", path.as_ref().display()))
        })?;
        Self::from_reader(f)
    }

    pub fn write_csv(&self, w: impl Write) -> Result<()> {
        let mut wtr = csv::Writer::from_writer(w);
        for i in 0..self.len() {
            wtr.serialize(Row {
                tau_s: self.tau_s[i],
                signal: self.signal[i],
                sigma: self.sigma.as_ref().map(|s| s[i]),
            })?;
        }
        wtr.flush().map_err(csv::Error::from)?;
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::relaxation::log_spaced;

    #[test]
    fn validation() {
        let t: Vec<f64> = (1..=8).map(f64::from).collect();
        assert!(DecayCurve::new(t.clone(), vec![1.0; 8], None).is_ok());
        assert!(DecayCurve::new(t[..7].to_vec(), vec![1.0; 7], None).is_err());
        let mut bad = t.clone();
        bad.swap(2, 3);
        assert!(DecayCurve::new(bad, vec![1.0; 8], None).is_err());
        assert!(DecayCurve::new(t.clone(), vec![f64::NAN; 8], None).is_err());
        assert!(DecayCurve::new(t, vec![1.0; 8], Some(vec![0.0; 8])).is_err());
    }

    #[test]
    fn csv_round_trip() {
        let tau = log_spaced(1e-5, 1e-2, 12).unwrap();
        let c = DecayCurve::synthetic(&DecayModel::two_channel(1.0, 6e-4, 3.6e-3), &tau, 1e-3, 7)
            .unwrap();
        let mut buf = Vec::new();
        c.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert!(text.starts_with("tau_s,signal,sigma\n"));
        let back = DecayCurve::from_reader(&buf[..]).unwrap();
        assert_eq!(back, c);
    }

    #[test]
    fn csv_without_sigma_and_comments() {
        let text =
            "# comment\ntau_s,signal\n1,1\n2,0.9\n3,0.8\n4,0.7\n5,0.6\n6,0.5\n7,0.4\n8,0.3\n";
        let c = DecayCurve::from_reader(text.as_bytes()).unwrap();
        assert_eq!(c.len(), 8);
        assert!(c.sigma.is_none());
        assert!(DecayCurve::from_reader("t,s\n1,2\n".as_bytes()).is_err());
    }

    #[test]
    fn seeded_noise_is_reproducible() {
        let tau = log_spaced(1e-5, 1e-2, 10).unwrap();
        let m = DecayModel::two_channel(1.0, 6e-4, 3.6e-3);
        let a = DecayCurve::synthetic(&m, &tau, 0.01, 3).unwrap();
        let b = DecayCurve::synthetic(&m, &tau, 0.01, 3).unwrap();
        let c = DecayCurve::synthetic(&m, &tau, 0.01, 4).unwrap();
        assert_eq!(a, b);
        assert_ne!(a, c);
    }
}
