use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use nvrelax_core::{PhysicalConstants, QuadratureSpec};

use crate::args::{Format, GlobalArgs};
use crate::CliError;

/// Keys accepted in a config file. Dashes and underscores are interchangeable.
pub const KEYS: [&str; 13] = [
    "zfs_ghz",
    "gamma_e_mhz_per_gauss",
    "d_perp_hz_cm_per_v",
    "d_par_hz_cm_per_v",
    "j0_mhz_nm3",
    "n_theta",
    "n_phi",
    "n_psi",
    "quad_tolerance",
    "max_doublings",
    "output",
    "format",
    "seed",
];

#[derive(Debug, Clone, Default, PartialEq)]
pub struct RunConfig {
    pub constants: PhysicalConstants,
    pub quadrature: QuadratureSpec,
    pub output: Option<PathBuf>,
    pub format: Option<Format>,
    pub seed: u64,
}

/// Parse `key = value` lines. Blank lines and `#` comments are skipped.
pub fn parse_file(text: &str, origin: &Path) -> Result<BTreeMap<String, String>, CliError> {
    let mut out = BTreeMap::new();
    for (n, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (k, v) = line.split_once('=').ok_or_else(|| {
            CliError::Usage(format!(
                "{}:{}: expected `key = value`",
                origin.display(),
                n + 1
            ))
        })?;
        let key = k.trim().replace('-', "_");
        if !KEYS.contains(&key.as_str()) {
            return Err(CliError::Usage(format!(
                "{}:{}: unknown key `{}`",
                origin.display(),
                n + 1,
                k.trim()
            )));
        }
        let value = v.trim().trim_matches('"').to_string();
        if out.insert(key.clone(), value).is_some() {
            return Err(CliError::Usage(format!(
                "{}:{}: duplicate key `{key}`",
                origin.display(),
                n + 1
            )));
        }
    }
    Ok(out)
}

fn parse<T: std::str::FromStr>(key: &str, v: &str) -> Result<T, CliError> {
    v.parse()
        .map_err(|_| CliError::Usage(format!("config key `{key}`: cannot parse `{v}`")))
}

impl RunConfig {
    fn apply_file(&mut self, entries: &BTreeMap<String, String>) -> Result<(), CliError> {
        for (k, v) in entries {
            match k.as_str() {
                "zfs_ghz" => self.constants.zfs_ghz = parse(k, v)?,
                "gamma_e_mhz_per_gauss" => self.constants.gamma_e_mhz_per_gauss = parse(k, v)?,
                "d_perp_hz_cm_per_v" => self.constants.d_perp_hz_cm_per_v = parse(k, v)?,
                "d_par_hz_cm_per_v" => self.constants.d_par_hz_cm_per_v = parse(k, v)?,
                "j0_mhz_nm3" => self.constants.j0_mhz_nm3 = parse(k, v)?,
                "n_theta" => self.quadrature.n_theta = parse(k, v)?,
                "n_phi" => self.quadrature.n_phi = parse(k, v)?,
                "n_psi" => self.quadrature.n_psi = parse(k, v)?,
                "quad_tolerance" => self.quadrature.tolerance = parse(k, v)?,
                "max_doublings" => self.quadrature.max_doublings = parse(k, v)?,
                "output" => self.output = Some(PathBuf::from(v)),
                "format" => {
                    self.format = Some(match v.to_ascii_lowercase().as_str() {
                        "csv" => Format::Csv,
                        "json" => Format::Json,
                        _ => return Err(CliError::Usage(format!("config key `format`: `{v}`"))),
                    })
                }
                "seed" => self.seed = parse(k, v)?,
                _ => unreachable!("keys are checked while parsing"),
            }
        }
        Ok(())
    }

    fn apply_flags(&mut self, g: &GlobalArgs) {
        let c = &mut self.constants;
        let set = |slot: &mut f64, v: Option<f64>| {
            if let Some(v) = v {
                *slot = v;
            }
        };
        set(&mut c.zfs_ghz, g.zfs_ghz);
        set(&mut c.gamma_e_mhz_per_gauss, g.gamma_e_mhz_per_gauss);
        set(&mut c.d_perp_hz_cm_per_v, g.d_perp_hz_cm_per_v);
        set(&mut c.d_par_hz_cm_per_v, g.d_par_hz_cm_per_v);
        set(&mut c.j0_mhz_nm3, g.j0_mhz_nm3);
        set(&mut self.quadrature.tolerance, g.quad_tolerance);
        let q = &mut self.quadrature;
        q.n_theta = g.n_theta.unwrap_or(q.n_theta);
        q.n_phi = g.n_phi.unwrap_or(q.n_phi);
        q.n_psi = g.n_psi.unwrap_or(q.n_psi);
        q.max_doublings = g.max_doublings.unwrap_or(q.max_doublings);
        if g.output.is_some() {
            self.output.clone_from(&g.output);
        }
        if g.format.is_some() {
            self.format = g.format;
        }
        if let Some(s) = g.seed {
            self.seed = s;
        }
    }

    /// Defaults, then the config file, then flags.
    pub fn resolve(g: &GlobalArgs) -> Result<Self, CliError> {
        let mut cfg = Self::default();
        if let Some(path) = &g.config {
            let text = std::fs::read_to_string(path).map_err(|e| {
                CliError::Usage(format!("cannot read config {}: {e}", path.display()))
            })?;
            cfg.apply_file(&parse_file(&text, path)?)?;
        }
        cfg.apply_flags(g);
        cfg.constants
            .validate()
            .map_err(|e| CliError::Usage(e.to_string()))?;
        cfg.quadrature
            .validate()
            .map_err(|e| CliError::Usage(e.to_string()))?;
        Ok(cfg)
    }

    /// Every global parameter, for output headers.
    pub fn params(&self) -> BTreeMap<String, String> {
        let c = &self.constants;
        let q = &self.quadrature;
        let mut m = BTreeMap::new();
        for (k, v) in [
            ("zfs_ghz", c.zfs_ghz),
            ("gamma_e_mhz_per_gauss", c.gamma_e_mhz_per_gauss),
            ("d_perp_hz_cm_per_v", c.d_perp_hz_cm_per_v),
            ("d_par_hz_cm_per_v", c.d_par_hz_cm_per_v),
            ("j0_mhz_nm3", c.j0_mhz_nm3),
            ("quad_tolerance", q.tolerance),
        ] {
            m.insert(k.to_string(), crate::output::fmt_num(v));
        }
        for (k, v) in [
            ("n_theta", q.n_theta),
            ("n_phi", q.n_phi),
            ("n_psi", q.n_psi),
        ] {
            m.insert(k.to_string(), v.to_string());
        }
        m.insert("max_doublings".into(), q.max_doublings.to_string());
        m.insert("seed".into(), self.seed.to_string());
        m
    }
}
