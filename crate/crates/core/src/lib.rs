//! Changepoint-robust estimation of autoregressive structure.
//!
//! A series observed as `X_t = κ_{s(t)} + ε_t` carries an unknown number of
//! mean shifts on top of a causal AR(p) error process. Differencing the series
//! removes the piecewise-constant mean except at the shift times, and the
//! autocorrelations of the differences determine the AR coefficients through
//! a small linear system. This crate provides that estimator, the usual
//! comparison estimators, prediction-residual decorrelation, minimal PELT and
//! WBS detectors, simulation experiments and a command-line front end.

// `!(x > 0.0)` is used on purpose so that NaN is rejected too
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod acf;
pub mod changepoint;
pub mod cli;
pub mod decorrelate;
pub mod error;
pub mod estimators;
pub mod experiments;
pub mod inference;
pub mod io;
pub mod linalg;
pub mod model;
pub mod rng;
pub mod stats;

pub use acf::{sample_diff_acf, AcfEstimate};
pub use changepoint::{pelt_meanshift, wbs_meanshift, Segmentation};
pub use decorrelate::{one_step_residuals, ResidualSeries};
pub use error::{Error, Result};
pub use estimators::{
    ar1seg_estimate, bootstrap_se, build_diff_yw_system, classical_yule_walker, diff_yule_walker,
    rolling_window_yw, segmented_yule_walker, EstimationReport, Method,
};
pub use experiments::{AggregateResult, Design, ScenarioSpec};
pub use model::{
    apply_mean_shifts, check_causal, difference, simulate_ar, theoretical_acvf,
    theoretical_diff_acvf, ARModel, ChangepointConfig, DiffSeries, Series, TheoreticalMoments,
};
