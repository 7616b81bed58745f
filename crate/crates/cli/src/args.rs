use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Debug, Parser)]
#[command(
    name = "nvrelax",
    version,
    about = "Dipolar cross-relaxation model for NV center ensembles at low field"
)]
pub struct Cli {
    #[command(flatten)]
    pub global: GlobalArgs,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Args)]
pub struct GlobalArgs {
    /// Config file with `key = value` lines; flags take precedence
    #[arg(long, global = true, value_name = "PATH")]
    pub config: Option<PathBuf>,

    /// Output file (default: stdout, or $NVRELAX_OUT_DIR/<subcommand>.<ext>)
    #[arg(long, short, global = true, value_name = "PATH")]
    pub output: Option<PathBuf>,

    /// Output format
    #[arg(long, global = true, value_enum)]
    pub format: Option<Format>,

    /// Seed for multi-start fits and synthetic noise
    #[arg(long, global = true)]
    pub seed: Option<u64>,

    /// Zero-field splitting D (GHz)
    #[arg(long, global = true, value_name = "GHZ")]
    pub zfs_ghz: Option<f64>,

    /// Electron gyromagnetic ratio (MHz/G)
    #[arg(long, global = true, value_name = "MHZ_PER_G")]
    pub gamma_e_mhz_per_gauss: Option<f64>,

    /// Transverse electric susceptibility d_perp (Hz·cm/V)
    #[arg(long, global = true, value_name = "HZ_CM_PER_V")]
    pub d_perp_hz_cm_per_v: Option<f64>,

    /// Longitudinal electric susceptibility d_par (Hz·cm/V)
    #[arg(long, global = true, value_name = "HZ_CM_PER_V")]
    pub d_par_hz_cm_per_v: Option<f64>,

    /// Dipolar strength J0 (MHz·nm³)
    #[arg(long, global = true, value_name = "MHZ_NM3")]
    pub j0_mhz_nm3: Option<f64>,

    /// Gauss–Legendre nodes in cos θ for solid-angle averages
    #[arg(long, global = true)]
    pub n_theta: Option<usize>,

    /// Trapezoid nodes in φ for solid-angle averages
    #[arg(long, global = true)]
    pub n_phi: Option<usize>,

    /// Nodes per auxiliary frame angle (ψ, tilt azimuth, common x direction)
    #[arg(long, global = true)]
    pub n_psi: Option<usize>,

    /// Convergence target for solid-angle averages (dimensionless)
    #[arg(long, global = true)]
    pub quad_tolerance: Option<f64>,

    /// Times each resolution may be doubled while converging
    #[arg(long, global = true)]
    pub max_doublings: Option<u32>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Overlaps of |e⟩ with |+1⟩ and |+⟩ over field amplitude and polar angle
    EigenMap(EigenMapArgs),
    /// Energies and |d⟩–|e⟩ splitting under a purely transverse magnetic field
    TransverseScan(TransverseScanArgs),
    /// Normalized solid-angle averages for every basis, x̂ mode and axis angle
    EtaTable(EtaTableArgs),
    /// Rate multipliers η̄²/η̄₀² of the field-orientation scenarios
    Multipliers,
    /// The eight transition frequencies versus field amplitude
    Transitions(TransitionsArgs),
    /// Inter-class splittings and the field where they exceed the CR range
    Degeneracy(DegeneracyArgs),
    /// Synthetic normalized ODMR spectrum
    Spectrum(SpectrumArgs),
    /// Synthetic relaxation curve (tau_s,signal[,sigma])
    DecaySim(DecaySimArgs),
    /// Fit A·exp(−√(τ/T1_dd) − τ/T1_ph) to a curve
    FitT1(FitT1Args),
    /// Fit A·exp(−(τ/T1)^β) to a curve
    FitBeta(FitBetaArgs),
    /// Overlap of two line shapes versus detuning, with a width fit
    Overlap(OverlapArgs),
    /// DC magnetometry sensitivity σ_B·√τ
    Sensitivity(SensitivityArgs),
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::EigenMap(_) => "eigen-map",
            Command::TransverseScan(_) => "transverse-scan",
            Command::EtaTable(_) => "eta-table",
            Command::Multipliers => "multipliers",
            Command::Transitions(_) => "transitions",
            Command::Degeneracy(_) => "degeneracy",
            Command::Spectrum(_) => "spectrum",
            Command::DecaySim(_) => "decay-sim",
            Command::FitT1(_) => "fit-t1",
            Command::FitBeta(_) => "fit-beta",
            Command::Overlap(_) => "overlap",
            Command::Sensitivity(_) => "sensitivity",
        }
    }
}

#[derive(Debug, Args)]
pub struct EigenMapArgs {
    /// NV class (1–4)
    #[arg(long, default_value_t = 1, value_parser = clap::value_parser!(u8).range(1..=4))]
    pub class: u8,
    /// Largest field amplitude (G)
    #[arg(long, default_value_t = 200.0)]
    pub b_max_gauss: f64,
    /// Number of amplitudes from 0 to the maximum
    #[arg(long, default_value_t = 41)]
    pub b_steps: usize,
    /// Number of polar angles from 0 to π/2 (rad grid)
    #[arg(long, default_value_t = 31)]
    pub theta_steps: usize,
    /// Transverse electric energy d⊥E⊥ (MHz)
    #[arg(long, default_value_t = 4.0)]
    pub e_perp_mhz: f64,
}

#[derive(Debug, Args)]
pub struct TransverseScanArgs {
    /// NV class (1–4)
    #[arg(long, default_value_t = 1, value_parser = clap::value_parser!(u8).range(1..=4))]
    pub class: u8,
    /// Azimuth of the transverse field from the class x̂ axis (deg)
    #[arg(long, default_value_t = 0.0)]
    pub azimuth_deg: f64,
    /// Largest transverse field (G)
    #[arg(long, default_value_t = 150.0)]
    pub b_max_gauss: f64,
    /// Number of field values from 0 to the maximum
    #[arg(long, default_value_t = 151)]
    pub b_steps: usize,
    /// Transverse electric energy d⊥E⊥ (MHz)
    #[arg(long, default_value_t = 4.0)]
    pub e_perp_mhz: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ProcessArg {
    FlipFlop,
    DoubleFlip,
}

#[derive(Debug, Args)]
pub struct EtaTableArgs {
    /// Matrix element to average
    #[arg(long, value_enum, default_value_t = ProcessArg::FlipFlop)]
    pub process: ProcessArg,
    /// Keep the Sx·Sz-type terms of the dipolar Hamiltonian
    #[arg(long)]
    pub include_other: bool,
}

/// Field direction in the crystal frame as `x,y,z`.
#[derive(Debug, Args)]
pub struct DirectionArgs {
    /// Field direction `x,y,z` in the crystal frame (default: 24° from [100])
    #[arg(
        long,
        value_delimiter = ',',
        num_args = 3,
        allow_hyphen_values = true,
        value_name = "X,Y,Z"
    )]
    pub direction: Option<Vec<f64>>,
}

#[derive(Debug, Args)]
pub struct TransitionsArgs {
    #[command(flatten)]
    pub direction: DirectionArgs,
    /// Largest field amplitude (G)
    #[arg(long, default_value_t = 40.0)]
    pub b_max_gauss: f64,
    /// Number of amplitudes from 0 to the maximum
    #[arg(long, default_value_t = 81)]
    pub b_steps: usize,
    /// Transverse electric energy d⊥E⊥ (MHz)
    #[arg(long, default_value_t = 0.0)]
    pub e_perp_mhz: f64,
}

#[derive(Debug, Args)]
pub struct DegeneracyArgs {
    #[command(flatten)]
    pub direction: DirectionArgs,
    /// Largest field amplitude (G)
    #[arg(long, default_value_t = 40.0)]
    pub b_max_gauss: f64,
    /// Number of amplitudes from 0 to the maximum
    #[arg(long, default_value_t = 401)]
    pub b_steps: usize,
    /// Cross-relaxation interaction range (MHz)
    #[arg(long, default_value_t = 8.04)]
    pub cr_range_mhz: f64,
    /// Transverse electric energy d⊥E⊥ (MHz)
    #[arg(long, default_value_t = 0.0)]
    pub e_perp_mhz: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ShapeArg {
    Gaussian,
    Lorentzian,
}

#[derive(Debug, Args)]
pub struct SpectrumArgs {
    #[command(flatten)]
    pub direction: DirectionArgs,
    /// Field amplitude (G)
    #[arg(long, default_value_t = 0.0)]
    pub b_gauss: f64,
    /// Transverse electric energy d⊥E⊥ (MHz)
    #[arg(long, default_value_t = 4.0)]
    pub e_perp_mhz: f64,
    /// Line shape
    #[arg(long, value_enum, default_value_t = ShapeArg::Gaussian)]
    pub shape: ShapeArg,
    /// Line width: standard deviation (Gaussian) or half width (Lorentzian) (MHz)
    #[arg(long, default_value_t = 1.0)]
    pub width_mhz: f64,
    /// Peak contrast of each line (fraction)
    #[arg(long, default_value_t = 0.01)]
    pub contrast: f64,
    /// Frequency margin beyond the outermost lines (MHz)
    #[arg(long, default_value_t = 20.0)]
    pub margin_mhz: f64,
    /// Number of frequency points
    #[arg(long, default_value_t = 2001)]
    pub points: usize,
}

#[derive(Debug, Args)]
pub struct DecaySimArgs {
    /// Amplitude A (dimensionless)
    #[arg(long, default_value_t = 1.0)]
    pub amplitude: f64,
    /// Stretched timescale T1_dd (s)
    #[arg(long, default_value_t = 0.6e-3)]
    pub t1_dd_s: f64,
    /// Phonon timescale T1_ph (s); omitted means no phonon channel
    #[arg(long)]
    pub t1_ph_s: Option<f64>,
    /// Stretch exponent β (dimensionless)
    #[arg(long, default_value_t = 0.5)]
    pub beta: f64,
    /// First sample time (s)
    #[arg(long, default_value_t = 1e-6)]
    pub tau_min_s: f64,
    /// Last sample time (s)
    #[arg(long, default_value_t = 20e-3)]
    pub tau_max_s: f64,
    /// Number of log-spaced samples
    #[arg(long, default_value_t = 60)]
    pub points: usize,
    /// Gaussian noise standard deviation added to the signal (dimensionless)
    #[arg(long, default_value_t = 0.0)]
    pub noise: f64,
}

#[derive(Debug, Args)]
pub struct FitT1Args {
    /// Input CSV with header tau_s,signal[,sigma]
    #[arg(long, value_name = "PATH")]
    pub input: PathBuf,
    /// Hold T1_ph fixed at this value (s)
    #[arg(long, alias = "fix-t1ph", value_name = "SECONDS")]
    pub fix_t1ph_s: Option<f64>,
    /// Number of multi-start initializations (>= 5)
    #[arg(long, default_value_t = 7)]
    pub starts: usize,
}

#[derive(Debug, Args)]
pub struct FitBetaArgs {
    /// Input CSV with header tau_s,signal[,sigma]
    #[arg(long, value_name = "PATH")]
    pub input: PathBuf,
    /// Number of multi-start initializations (>= 5)
    #[arg(long, default_value_t = 7)]
    pub starts: usize,
}

#[derive(Debug, Args)]
pub struct OverlapArgs {
    /// Shape of the first line
    #[arg(long, value_enum, default_value_t = ShapeArg::Lorentzian)]
    pub shape1: ShapeArg,
    /// Width of the first line (MHz)
    #[arg(long, default_value_t = 4.02)]
    pub width1_mhz: f64,
    /// Tabulated first line (CSV offset_MHz,value); overrides shape1/width1
    #[arg(long, value_name = "PATH")]
    pub table1: Option<PathBuf>,
    /// Shape of the second line
    #[arg(long, value_enum, default_value_t = ShapeArg::Lorentzian)]
    pub shape2: ShapeArg,
    /// Width of the second line (MHz)
    #[arg(long, default_value_t = 4.02)]
    pub width2_mhz: f64,
    /// Tabulated second line (CSV offset_MHz,value); overrides shape2/width2
    #[arg(long, value_name = "PATH")]
    pub table2: Option<PathBuf>,
    /// Largest detuning (MHz)
    #[arg(long, default_value_t = 60.0)]
    pub dnu_max_mhz: f64,
    /// Number of detuning points
    #[arg(long, default_value_t = 241)]
    pub points: usize,
    /// Shape fitted to the overlap (default: shape of the first line)
    #[arg(long, value_enum)]
    pub fit_shape: Option<ShapeArg>,
}

#[derive(Debug, Args)]
pub struct SensitivityArgs {
    /// Standard deviation of the field readout (T)
    #[arg(long, default_value_t = 1.5e-6)]
    pub sigma_b_t: f64,
    /// Lock-in time constant (s)
    #[arg(long, default_value_t = 3e-3)]
    pub tau_s: f64,
}
