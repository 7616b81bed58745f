//! Dipolar cross-relaxation model for ensembles of NV⁻ centers at low magnetic field.
//!
//! Single-spin Hamiltonians and eigenbases live in [`spin`], two-spin couplings in
//! [`dipolar`], their orientation averages in [`eta`], the fluctuator rate model in
//! [`relaxation`], fits and line shapes in [`analysis`], and multi-class transition
//! spectra in [`odmr`].

pub mod analysis;
pub mod constants;
pub mod dipolar;
pub mod error;
pub mod eta;
pub mod odmr;
pub mod quadrature;
pub mod relaxation;
pub mod spin;

pub use analysis::{
    fit_beta, fit_decay, fit_line_width, sensitivity, spectral_overlap, DecayCurve, FitOptions,
    FitResult, LineProfile, LineShape,
};
pub use constants::PhysicalConstants;
pub use dipolar::{
    build_two_spin_hamiltonian, dipolar_coefficients, double_flip_amplitude, flip_flop_amplitude,
    resonance_factor, BasisChoice, DipolarCoefficients, PairGeometry, Process,
};
pub use error::{Error, Result};
pub use eta::{
    angular_average, eta_bar, eta_table, scenario_multiplier, EtaScenario, EtaTable,
    FieldOrientationScenario, QuadratureSpec, XMode, ZAngle,
};
pub use nalgebra::Vector3;
pub use odmr::{all_transitions, degeneracy_lift, synth_spectrum, DegeneracyReport, TransitionSet};
pub use relaxation::{
    characteristic_rate, decay_signal, polarization, rate_density, DecayModel, FluctuatorParams,
};
pub use spin::{
    build_hamiltonian, diagonalize, eigenstate_map, transverse_field_scan, FieldConfiguration,
    NvClass, NvClassFrame, SpinEigensystem,
};
