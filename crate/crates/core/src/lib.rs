//! Analytics, exact simulation and diffusion limits for the Markov-modulated
//! infinite-server queue.
//!
//! The background chain `J` with generator `Q` is sped up by `N^α`, arrivals
//! occur at rate `N λ_{J(t)}` and every molecule leaves at rate `μ`. The crate
//! computes the exact limit objects of this scaling (fluid path, deviation
//! matrix, occupation-time covariance, Gaussian limit of the centered queue
//! length) and checks them against simulation and a transient MGF solver.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod config;
pub mod ctmc;
pub mod error;
pub mod experiments;
pub mod grid;
pub mod limits;
pub mod mgf;
pub mod model;
pub mod rng;
pub mod simulator;
pub mod stats;

pub use config::{RunConfig, Thresholds};
pub use ctmc::{
    covariance_c, deviation_matrix, stationary_distribution, thorn, transient_matrix,
    ChainAnalysis, CovarianceC, DeviationMatrix, Generator, StationaryLaw,
};
pub use error::{Error, Result};
pub use grid::{CurveTable, TimeGrid};
pub use limits::{
    classify, fluid_limit, limit_mgf, ou_moments, sigma_profile, u_limit_covariance,
    u_limit_variance, OuMoments, OuParams, Regime, RegimeKind,
};
pub use mgf::{
    mgf_curve, sup_error, transient_mgf_m, transient_mgf_u, MgfComparison, MgfCurve, OdeOptions,
};
pub use model::{ModelSpec, ScalingSpec};
pub use simulator::{
    martingale_drift_check, replicate, simulate_path, u_process, EnsembleStats, PathSample,
};
