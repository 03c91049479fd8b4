//! Variable selection for logistic, Poisson and Cox regression by penalized
//! regression with second-generation p-values (ProSGPV).
//!
//! The crate covers the whole stack: likelihoods ([`model`]), unpenalized
//! and Jeffreys-prior fits ([`fitting`]), lasso paths with GIC and
//! cross-validated tuning ([`lasso`]), SGPV screening ([`sgpv`]), the
//! Monte Carlo simulation engine ([`simulation`]) and file I/O ([`io`]).

pub mod cli;
pub mod error;
pub mod fitting;
pub mod lasso;
mod linalg;
pub mod model;
pub mod sgpv;
pub mod simulation;
pub mod io;
pub mod spine;

pub use error::{Error, Result};
pub use fitting::{fit_firth_logistic, fit_mle, gvif, Estimate, FitOptions, FitResult};
pub use lasso::{gic, select_lambda_cv, select_lambda_gic, solve_path, LassoPath};
pub use model::{Coefficients, Dataset, Family, Response};
pub use sgpv::{prosgpv, sgpv, IntervalNull, NullBound, SelectionConfig, SelectionResult};
