use std::path::Path;

use nvrelax_core::analysis::WidthFit;
use nvrelax_core::relaxation::log_spaced;
use nvrelax_core::{
    all_transitions, degeneracy_lift, eigenstate_map, eta_table, fit_beta, fit_decay,
    fit_line_width, odmr, sensitivity, spectral_overlap, synth_spectrum, transverse_field_scan,
    BasisChoice, DecayCurve, DecayModel, EtaScenario, FieldOrientationScenario, FitOptions,
    FitResult, LineProfile, LineShape, NvClass, NvClassFrame, Process, Vector3, XMode, ZAngle,
};
use serde_json::{json, Value};

use crate::args::*;
use crate::config::RunConfig;
use crate::output::{fmt_num, num_value, Cell, Report, Table};
use crate::CliError;

fn usage(msg: impl Into<String>) -> CliError {
    CliError::Usage(msg.into())
}

fn linspace(max: f64, n: usize, what: &str) -> Result<Vec<f64>, CliError> {
    if n < 2 {
        return Err(usage(format!("{what} needs at least 2 points, got {n}")));
    }
    if !(max.is_finite() && max > 0.0) {
        return Err(usage(format!(
            "{what} upper limit must be positive, got {max}"
        )));
    }
    Ok((0..n).map(|i| max * i as f64 / (n - 1) as f64).collect())
}

fn class_of(n: u8) -> NvClass {
    NvClass::from_index(n as usize - 1).expect("range checked by clap")
}

fn direction(d: &DirectionArgs) -> Result<Vector3<f64>, CliError> {
    match &d.direction {
        None => Ok(odmr::default_misaligned_direction()),
        Some(v) => {
            let v = Vector3::new(v[0], v[1], v[2]);
            if !(v.norm().is_finite() && v.norm() > 0.0) {
                return Err(usage("--direction must be a non-zero vector"));
            }
            Ok(v.normalize())
        }
    }
}

fn fmt_vec(v: &Vector3<f64>) -> String {
    format!("{}/{}/{}", fmt_num(v.x), fmt_num(v.y), fmt_num(v.z))
}

fn report(cfg: &RunConfig, cmd: &'static str, format: Format) -> Report {
    Report::new(cmd, cfg.params(), format)
}

pub fn run(cmd: &Command, cfg: &RunConfig) -> Result<Report, CliError> {
    let name = cmd.name();
    match cmd {
        Command::EigenMap(a) => eigen_map(a, cfg, name),
        Command::TransverseScan(a) => transverse_scan(a, cfg, name),
        Command::EtaTable(a) => eta_table_cmd(a, cfg, name),
        Command::Multipliers => multipliers(cfg, name),
        Command::Transitions(a) => transitions(a, cfg, name),
        Command::Degeneracy(a) => degeneracy(a, cfg, name),
        Command::Spectrum(a) => spectrum(a, cfg, name),
        Command::DecaySim(a) => decay_sim(a, cfg, name),
        Command::FitT1(a) => fit_t1(a, cfg, name),
        Command::FitBeta(a) => fit_beta_cmd(a, cfg, name),
        Command::Overlap(a) => overlap(a, cfg, name),
        Command::Sensitivity(a) => sensitivity_cmd(a, cfg, name),
    }
}

fn eigen_map(a: &EigenMapArgs, cfg: &RunConfig, name: &'static str) -> Result<Report, CliError> {
    let b = linspace(a.b_max_gauss, a.b_steps, "--b-steps")?;
    let theta = linspace(std::f64::consts::FRAC_PI_2, a.theta_steps, "--theta-steps")?;
    let cells = eigenstate_map(class_of(a.class), &b, &theta, a.e_perp_mhz, &cfg.constants)?;
    let mut r = report(cfg, name, Format::Csv);
    r.param("class", a.class);
    r.param("b_max_gauss", fmt_num(a.b_max_gauss));
    r.param("b_steps", a.b_steps);
    r.param("theta_steps", a.theta_steps);
    r.param("e_perp_mhz", fmt_num(a.e_perp_mhz));
    let mut t = Table::new([
        "B_gauss",
        "theta_rad",
        "overlap_e_p1",
        "overlap_e_plus",
        "overlap_g_0",
        "overlap_d_minus",
    ]);
    for c in cells {
        t.push(vec![
            c.b_gauss.into(),
            c.theta_rad.into(),
            c.overlap_e_p1.into(),
            c.overlap_e_plus.into(),
            c.overlap_g_zero.into(),
            c.overlap_d_minus.into(),
        ]);
    }
    r.table = Some(t);
    Ok(r)
}

fn transverse_scan(
    a: &TransverseScanArgs,
    cfg: &RunConfig,
    name: &'static str,
) -> Result<Report, CliError> {
    let b = linspace(a.b_max_gauss, a.b_steps, "--b-steps")?;
    let frame = NvClassFrame::canonical(class_of(a.class));
    let (s, c) = a.azimuth_deg.to_radians().sin_cos();
    let dir = frame.x * c + frame.y * s;
    let points = transverse_field_scan(&frame, &dir, &b, a.e_perp_mhz, &cfg.constants)?;
    let mut r = report(cfg, name, Format::Csv);
    r.param("class", a.class);
    r.param("azimuth_deg", fmt_num(a.azimuth_deg));
    r.param("b_max_gauss", fmt_num(a.b_max_gauss));
    r.param("b_steps", a.b_steps);
    r.param("e_perp_mhz", fmt_num(a.e_perp_mhz));
    let mut t = Table::new([
        "B_perp_gauss",
        "E_g_GHz",
        "E_d_GHz",
        "E_e_GHz",
        "dnu_MHz",
        "overlap_e_plus",
    ]);
    for p in &points {
        t.push(vec![
            p.b_perp_gauss.into(),
            p.energies_ghz[0].into(),
            p.energies_ghz[1].into(),
            p.energies_ghz[2].into(),
            p.splitting_mhz.into(),
            p.matching.into(),
        ]);
    }
    if let Some(last) = points.last() {
        r.set("dnu_at_max_mhz", num_value(last.splitting_mhz));
        r.set("overlap_e_plus_at_max", num_value(last.matching));
    }
    r.table = Some(t);
    Ok(r)
}

const ROWS: [(&str, BasisChoice, XMode); 3] = [
    ("MAGNETIC", BasisChoice::Magnetic, XMode::Random),
    (
        "NONMAGNETIC_RANDOM",
        BasisChoice::NonMagnetic,
        XMode::Random,
    ),
    (
        "NONMAGNETIC_ALIGNED",
        BasisChoice::NonMagnetic,
        XMode::Aligned,
    ),
];

fn eta_table_cmd(
    a: &EtaTableArgs,
    cfg: &RunConfig,
    name: &'static str,
) -> Result<Report, CliError> {
    let process = match a.process {
        ProcessArg::FlipFlop => Process::FlipFlop,
        ProcessArg::DoubleFlip => Process::DoubleFlip,
    };
    let mut r = report(cfg, name, Format::Csv);
    r.param(
        "process",
        match a.process {
            ProcessArg::FlipFlop => "flip-flop",
            ProcessArg::DoubleFlip => "double-flip",
        },
    );
    r.param("include_other", a.include_other);
    let mut t = Table::new(["row", "SAME", "CLOSE", "FAR"]);
    if process == Process::FlipFlop && !a.include_other {
        let table = eta_table(&cfg.quadrature)?;
        for (label, basis, mode) in ROWS {
            let v = table.row(basis, mode);
            t.push(vec![label.into(), v[0].into(), v[1].into(), v[2].into()]);
        }
    } else {
        for (label, basis, x_mode) in ROWS {
            let mut row = vec![Cell::from(label)];
            for z_angle in ZAngle::ALL {
                let s = EtaScenario {
                    basis,
                    z_angle,
                    x_mode,
                    process,
                    include_other: a.include_other,
                };
                row.push(nvrelax_core::angular_average(&s, &cfg.quadrature)?.into());
            }
            t.push(row);
        }
    }
    r.table = Some(t);
    Ok(r)
}

fn multipliers(cfg: &RunConfig, name: &'static str) -> Result<Report, CliError> {
    let table = eta_table(&cfg.quadrature)?;
    let mut r = report(cfg, name, Format::Csv);
    let mut t = Table::new([
        "scenario",
        "same",
        "close",
        "far",
        "basis",
        "x_mode",
        "multiplier",
    ]);
    for fs in FieldOrientationScenario::ALL {
        let c = fs.composition();
        let basis = match c.basis {
            BasisChoice::Magnetic => "MAGNETIC",
            BasisChoice::NonMagnetic => "NONMAGNETIC",
        };
        t.push(vec![
            fs.tag().into(),
            (c.same as f64).into(),
            (c.close as f64).into(),
            (c.far as f64).into(),
            basis.into(),
            c.x_mode.label().into(),
            table.multiplier(fs).into(),
        ]);
    }
    r.table = Some(t);
    Ok(r)
}

fn transitions(
    a: &TransitionsArgs,
    cfg: &RunConfig,
    name: &'static str,
) -> Result<Report, CliError> {
    let dir = direction(&a.direction)?;
    let b = linspace(a.b_max_gauss, a.b_steps, "--b-steps")?;
    let sets = all_transitions(&dir, &b, a.e_perp_mhz, &cfg.constants)?;
    let mut r = report(cfg, name, Format::Csv);
    r.param("direction", fmt_vec(&dir));
    r.param("b_max_gauss", fmt_num(a.b_max_gauss));
    r.param("b_steps", a.b_steps);
    r.param("e_perp_mhz", fmt_num(a.e_perp_mhz));
    let mut cols = vec!["B_gauss".to_string()];
    cols.extend((1..=8).map(|i| format!("nu{i}_GHz")));
    let mut t = Table::new(cols);
    for (bi, s) in b.iter().zip(&sets) {
        let mut row = vec![Cell::Num(*bi)];
        row.extend(s.flat().iter().map(|&x| Cell::Num(x)));
        t.push(row);
    }
    r.table = Some(t);
    Ok(r)
}

fn degeneracy(a: &DegeneracyArgs, cfg: &RunConfig, name: &'static str) -> Result<Report, CliError> {
    let dir = direction(&a.direction)?;
    let b = linspace(a.b_max_gauss, a.b_steps, "--b-steps")?;
    let rep = degeneracy_lift(&dir, &b, a.cr_range_mhz, a.e_perp_mhz, &cfg.constants)?;
    let mut r = report(cfg, name, Format::Csv);
    r.param("direction", fmt_vec(&dir));
    r.param("b_max_gauss", fmt_num(a.b_max_gauss));
    r.param("b_steps", a.b_steps);
    r.param("cr_range_mhz", fmt_num(a.cr_range_mhz));
    r.param("e_perp_mhz", fmt_num(a.e_perp_mhz));
    r.set("lift_gauss", rep.lift_gauss.map_or(Value::Null, num_value));
    let mut pairs = serde_json::Map::new();
    for (i, c) in rep.curves.iter().enumerate() {
        pairs.insert(
            format!("pair{}", i + 1),
            json!({
                "label": c.label(),
                "crossing_gauss": c.crossing_gauss.map_or(Value::Null, num_value),
            }),
        );
    }
    r.set("pairs", Value::Object(pairs));
    let mut cols = vec!["B_gauss".to_string()];
    cols.extend((1..=rep.curves.len()).map(|i| format!("dnu_pair{i}_MHz")));
    cols.push("dnu_min_MHz".into());
    let mut t = Table::new(cols);
    for (i, bi) in rep.amplitudes_gauss.iter().enumerate() {
        let mut row = vec![Cell::Num(*bi)];
        row.extend(rep.curves.iter().map(|c| Cell::Num(c.dnu_mhz[i])));
        row.push(rep.min_dnu_mhz[i].into());
        t.push(row);
    }
    r.table = Some(t);
    Ok(r)
}

fn profile(shape: ShapeArg, width: f64) -> LineProfile {
    match shape {
        ShapeArg::Gaussian => LineProfile::gaussian(width, 0.0),
        ShapeArg::Lorentzian => LineProfile::lorentzian(width, 0.0),
    }
}

fn shape_name(s: ShapeArg) -> &'static str {
    match s {
        ShapeArg::Gaussian => "gaussian",
        ShapeArg::Lorentzian => "lorentzian",
    }
}

fn spectrum(a: &SpectrumArgs, cfg: &RunConfig, name: &'static str) -> Result<Report, CliError> {
    let dir = direction(&a.direction)?;
    if !(a.b_gauss.is_finite() && a.b_gauss >= 0.0) {
        return Err(usage("--b-gauss must be >= 0"));
    }
    if a.points < 2 {
        return Err(usage("--points must be at least 2"));
    }
    let sets = all_transitions(&dir, &[a.b_gauss], a.e_perp_mhz, &cfg.constants)?;
    let set = &sets[0];
    let freq = odmr::spectrum_grid(set, a.margin_mhz, a.points)?;
    let p = profile(a.shape, a.width_mhz);
    let pl = synth_spectrum(set, &p, &[a.contrast; 4], &freq)?;
    let mut r = report(cfg, name, Format::Csv);
    r.param("direction", fmt_vec(&dir));
    r.param("b_gauss", fmt_num(a.b_gauss));
    r.param("e_perp_mhz", fmt_num(a.e_perp_mhz));
    r.param("shape", shape_name(a.shape));
    r.param("width_mhz", fmt_num(a.width_mhz));
    r.param("contrast", fmt_num(a.contrast));
    r.param("margin_mhz", fmt_num(a.margin_mhz));
    r.param("points", a.points);
    r.set("dips", json!(odmr::count_dips(&pl, 0.1 * a.contrast)));
    let mut t = Table::new(["freq_GHz", "pl_norm"]);
    for (f, v) in freq.iter().zip(&pl) {
        t.push(vec![(*f).into(), (*v).into()]);
    }
    r.table = Some(t);
    Ok(r)
}

fn decay_sim(a: &DecaySimArgs, cfg: &RunConfig, name: &'static str) -> Result<Report, CliError> {
    if a.points < 2 {
        return Err(usage("--points must be at least 2"));
    }
    if !(a.noise.is_finite() && a.noise >= 0.0) {
        return Err(usage("--noise must be >= 0"));
    }
    let model = DecayModel {
        amplitude: a.amplitude,
        t1_dd_s: a.t1_dd_s,
        t1_ph_s: a.t1_ph_s.unwrap_or(f64::INFINITY),
        beta: a.beta,
    };
    model.validate()?;
    let tau = log_spaced(a.tau_min_s, a.tau_max_s, a.points)?;
    let curve = DecayCurve::synthetic(&model, &tau, a.noise, cfg.seed)?;
    let mut r = report(cfg, name, Format::Csv);
    r.param("amplitude", fmt_num(a.amplitude));
    r.param("t1_dd_s", fmt_num(a.t1_dd_s));
    r.param("t1_ph_s", fmt_num(model.t1_ph_s));
    r.param("beta", fmt_num(a.beta));
    r.param("tau_min_s", fmt_num(a.tau_min_s));
    r.param("tau_max_s", fmt_num(a.tau_max_s));
    r.param("points", a.points);
    r.param("noise", fmt_num(a.noise));
    let mut t = match &curve.sigma {
        Some(_) => Table::new(["tau_s", "signal", "sigma"]),
        None => Table::new(["tau_s", "signal"]),
    };
    for i in 0..curve.len() {
        let mut row = vec![Cell::Num(curve.tau_s[i]), Cell::Num(curve.signal[i])];
        if let Some(s) = &curve.sigma {
            row.push(s[i].into());
        }
        t.push(row);
    }
    r.table = Some(t);
    Ok(r)
}

fn load_curve(path: &Path) -> Result<DecayCurve, CliError> {
    if !path.exists() {
        return Err(usage(format!(
            "input file {} does not exist",
            path.display()
        )));
    }
    Ok(DecayCurve::from_path(path)?)
}

fn fit_options(starts: usize, cfg: &RunConfig) -> Result<FitOptions, CliError> {
    if starts < 5 {
        return Err(usage(format!("--starts must be at least 5, got {starts}")));
    }
    Ok(FitOptions {
        starts,
        seed: cfg.seed,
        ..FitOptions::default()
    })
}

fn set_fit(r: &mut Report, f: &FitResult) {
    r.set("A", num_value(f.model.amplitude));
    r.set("T1_dd_s", num_value(f.model.t1_dd_s));
    r.set("T1_ph_s", num_value(f.model.t1_ph_s));
    r.set("beta", num_value(f.model.beta));
    r.set("rss", num_value(f.residual_rss));
    r.set("converged", json!(f.converged));
    r.set("iterations", json!(f.iterations));
    r.set("gradient_norm", num_value(f.gradient_norm));
}

fn fit_t1(a: &FitT1Args, cfg: &RunConfig, name: &'static str) -> Result<Report, CliError> {
    let curve = load_curve(&a.input)?;
    let opts = fit_options(a.starts, cfg)?;
    let f = fit_decay(&curve, a.fix_t1ph_s, &opts)?;
    let mut r = report(cfg, name, Format::Json);
    r.param("input", a.input.display());
    r.param("fix_t1ph_s", a.fix_t1ph_s.map_or("none".into(), fmt_num));
    r.param("starts", a.starts);
    set_fit(&mut r, &f);
    Ok(r)
}

fn fit_beta_cmd(a: &FitBetaArgs, cfg: &RunConfig, name: &'static str) -> Result<Report, CliError> {
    let curve = load_curve(&a.input)?;
    let opts = fit_options(a.starts, cfg)?;
    let f = fit_beta(&curve, &opts)?;
    let mut r = report(cfg, name, Format::Json);
    r.param("input", a.input.display());
    r.param("starts", a.starts);
    set_fit(&mut r, &f);
    Ok(r)
}

#[derive(serde::Deserialize)]
struct TableRow {
    #[serde(rename = "offset_MHz")]
    offset_mhz: f64,
    value: f64,
}

fn load_profile(path: &Path) -> Result<LineProfile, CliError> {
    let mut rdr = csv::ReaderBuilder::new()
        .comment(Some(b'#'))
        .trim(csv::Trim::All)
        .from_path(path)
        .map_err(|e| usage(format!("cannot read {}: {e}", path.display())))?;
    let mut x = Vec::new();
    let mut y = Vec::new();
    for row in rdr.deserialize() {
        let row: TableRow = row.map_err(|e| usage(format!("{}: {e}", path.display())))?;
        x.push(row.offset_mhz);
        y.push(row.value);
    }
    Ok(LineProfile::tabulated(x, y, 0.0)?)
}

fn overlap(a: &OverlapArgs, cfg: &RunConfig, name: &'static str) -> Result<Report, CliError> {
    if a.points < 3 {
        return Err(usage("--points must be at least 3"));
    }
    let p1 = match &a.table1 {
        Some(p) => load_profile(p)?,
        None => profile(a.shape1, a.width1_mhz),
    };
    let p2 = match &a.table2 {
        Some(p) => load_profile(p)?,
        None => profile(a.shape2, a.width2_mhz),
    };
    let half = a.points / 2;
    let grid: Vec<f64> = (0..a.points)
        .map(|i| a.dnu_max_mhz * (i as f64 - half as f64) / half.max(1) as f64)
        .collect();
    let s = spectral_overlap(&p1, &p2, &grid)?;
    let fit_shape = a.fit_shape.unwrap_or(a.shape1);
    let shape = match fit_shape {
        ShapeArg::Gaussian => LineShape::Gaussian,
        ShapeArg::Lorentzian => LineShape::Lorentzian,
    };
    let WidthFit {
        width_mhz,
        amplitude,
        rss,
    } = fit_line_width(&grid, &s, &shape)?;

    let mut r = report(cfg, name, Format::Csv);
    let describe = |t: &Option<std::path::PathBuf>, sh: ShapeArg, w: f64| match t {
        Some(p) => format!("table:{}", p.display()),
        None => format!("{}:{}", shape_name(sh), fmt_num(w)),
    };
    r.param("line1", describe(&a.table1, a.shape1, a.width1_mhz));
    r.param("line2", describe(&a.table2, a.shape2, a.width2_mhz));
    r.param("dnu_max_mhz", fmt_num(a.dnu_max_mhz));
    r.param("points", a.points);
    r.param("fit_shape", shape_name(fit_shape));
    r.set("fit_width_mhz", num_value(width_mhz));
    r.set("fit_amplitude", num_value(amplitude));
    r.set("fit_rss", num_value(rss));
    let mut t = Table::new(["dnu_MHz", "overlap_per_MHz"]);
    for (x, v) in grid.iter().zip(&s) {
        t.push(vec![(*x).into(), (*v).into()]);
    }
    r.table = Some(t);
    Ok(r)
}

fn sensitivity_cmd(
    a: &SensitivityArgs,
    cfg: &RunConfig,
    name: &'static str,
) -> Result<Report, CliError> {
    let s = sensitivity(a.sigma_b_t, a.tau_s)?;
    let mut r = report(cfg, name, Format::Json);
    r.param("sigma_b_t", fmt_num(a.sigma_b_t));
    r.param("tau_s", fmt_num(a.tau_s));
    r.set("sensitivity_t_per_sqrt_hz", num_value(s));
    r.set("sensitivity_nt_per_sqrt_hz", num_value(s * 1e9));
    Ok(r)
}
