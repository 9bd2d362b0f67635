//! Numerical laboratory for nonlinear Schrödinger equations
//! `i ∂_t u + Δu = F(u)` in one and two dimensions whose nonlinearity is
//! homogeneous of the critical degree `1 + 2/d`.
//!
//! The crate classifies nonlinearities by the Fourier modes of their angular
//! part, builds the log-phase-corrected asymptotic profile, solves the
//! final-state problem by backward split-step integration and by Picard
//! iteration, and measures how fast solutions approach the profile.

// Negated comparisons are used on purpose so that NaN fails validation.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod analysis;
pub mod config;
pub mod error;
pub mod experiment;
pub mod finalstate;
pub mod grid;
pub mod nonlinearity;
pub mod profile;
pub mod report;
pub mod spectral;

pub use config::{Experiment, ExperimentConfig, RawConfig};
pub use error::{Error, Result};
pub use experiment::{execute, run, RunOutput};
pub use finalstate::{construct_backward, integrate_backward, operator_r, weighted_norm_x, PicardMap, Scenario, TheoremParameters};
pub use grid::{Field, Grid, Side};
pub use nonlinearity::{
    check_assumption, eval_f, eval_split, fourier_coefficients, lipschitz_check, parse_samples_csv, AngularFunction,
    ClassificationReport, FourierSpectrum, Preset, RangeType, Split,
};
pub use report::ScatteringReport;
pub use profile::{build_profile, hat_w, FinalData, FinalProfile};
pub use spectral::{free_propagate, solve_interval, step_strang, Integrator, Trajectory};
