//! Unpenalized maximum-likelihood fits with Wald inference.
//!
//! GLM families are fitted by IRLS, which for canonical links is exactly
//! Newton's method on the loss; Cox models by Newton–Raphson. Both use step
//! halving whenever a full step fails to decrease the loss. Standard errors
//! come from the observed information at the optimum.

use nalgebra::{DMatrix, DVector};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::linalg::{amax, dependent_columns, spd_inverse};
use crate::model::{sigmoid, Coefficients, Dataset, Family, Problem, Response};

/// Normal quantile used for every 95% Wald interval.
pub const Z95: f64 = 1.96;

/// Convergence threshold on the sup-norm of the (normalized) score.
pub const SCORE_TOL: f64 = 1e-8;

const MAX_HALVINGS: usize = 30;

/// Standardized-scale coefficient magnitude above which a plain logistic
/// fit is flagged as possibly separated.
const SEPARATION_FLAG: f64 = 15.0;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FitOptions {
    pub max_iter: usize,
    /// Relative change in loss that counts as convergence.
    pub tol: f64,
    /// Jeffreys-prior (Firth) penalty; logistic models only.
    pub jeffreys: bool,
}

impl Default for FitOptions {
    fn default() -> Self {
        Self {
            max_iter: 100,
            tol: 1e-8,
            jeffreys: false,
        }
    }
}

impl FitOptions {
    fn validate(&self) -> Result<()> {
        if self.max_iter == 0 || !(self.tol > 0.0) {
            return Err(Error::Parameterization(format!(
                "fit options need max_iter >= 1 and tol > 0 (got {} and {})",
                self.max_iter, self.tol
            )));
        }
        Ok(())
    }
}

/// A coefficient with its standard error and 95% Wald interval.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Estimate {
    pub estimate: f64,
    pub se: f64,
    pub ci_lower: f64,
    pub ci_upper: f64,
}

impl Estimate {
    pub fn new(estimate: f64, se: f64) -> Self {
        Self {
            estimate,
            se,
            ci_lower: estimate - Z95 * se,
            ci_upper: estimate + Z95 * se,
        }
    }
}

#[derive(Debug, Clone)]
pub struct FitResult {
    pub family: Family,
    /// Predictor columns in the model, in the order they were given.
    pub subset: Vec<usize>,
    /// Full-length coefficients; entries outside `subset` are exactly zero.
    pub coef: Coefficients,
    pub intercept: Option<Estimate>,
    /// One entry per element of `subset`.
    pub terms: Vec<Estimate>,
    /// Inverse observed information over (intercept, subset).
    pub covariance: DMatrix<f64>,
    pub converged: bool,
    pub iterations: usize,
    pub final_loss: f64,
    pub jeffreys: bool,
    pub warnings: Vec<String>,
}

impl FitResult {
    /// Estimate for predictor `j`, `None` when `j` is not in the model.
    pub fn estimate(&self, j: usize) -> Option<&Estimate> {
        self.subset
            .iter()
            .position(|&k| k == j)
            .map(|pos| &self.terms[pos])
    }

    pub fn se(&self, j: usize) -> Option<f64> {
        self.estimate(j).map(|e| e.se)
    }

    pub fn standard_errors(&self) -> Vec<f64> {
        self.terms.iter().map(|t| t.se).collect()
    }
}

fn validate_subset(family: Family, data: &Dataset, subset: &[usize]) -> Result<()> {
    let p = data.p();
    let mut seen = vec![false; p];
    for &j in subset {
        if j >= p {
            return Err(Error::InvalidSubset(format!("column {j} out of range (p = {p})")));
        }
        if std::mem::replace(&mut seen[j], true) {
            return Err(Error::InvalidSubset(format!("column {j} repeated")));
        }
    }
    let limit = if family.has_intercept() {
        data.n().saturating_sub(2)
    } else {
        data.n().saturating_sub(1)
    };
    if subset.len() > limit {
        return Err(Error::InvalidSubset(format!(
            "{} columns exceed the limit of {limit} for n = {}",
            subset.len(),
            data.n()
        )));
    }
    Ok(())
}

fn check_rank(problem: &Problem, subset: &[usize]) -> Result<()> {
    let with_constant = !problem.family.has_intercept();
    let dependent = dependent_columns(&problem.z, with_constant);
    if dependent.is_empty() {
        return Ok(());
    }
    let offset = usize::from(problem.family.has_intercept());
    let columns = dependent
        .into_iter()
        .filter(|&k| k >= offset)
        .map(|k| subset[k - offset])
        .collect();
    Err(Error::RankDeficient { columns })
}

fn initial_parameters(family: Family, y: &Response, dim: usize) -> DVector<f64> {
    let mut theta = DVector::zeros(dim);
    if let Some(values) = y.values() {
        let n = values.len() as f64;
        let mean = values.iter().sum::<f64>() / n;
        theta[0] = match family {
            Family::Logistic => {
                let m = mean.clamp(0.5 / n, 1.0 - 0.5 / n);
                family.link(m)
            }
            _ => family.link(mean.max(0.5 / n)),
        };
    }
    theta
}

fn converged_by_loss(old: f64, new: f64, tol: f64) -> bool {
    (old - new).abs() <= tol * (new.abs() + tol)
}

/// Unpenalized fit of `family` on the columns in `subset`.
///
/// With `options.jeffreys` set this delegates to [`fit_firth_logistic`].
pub fn fit_mle(
    family: Family,
    data: &Dataset,
    subset: &[usize],
    options: &FitOptions,
) -> Result<FitResult> {
    if options.jeffreys {
        if family != Family::Logistic {
            return Err(Error::Parameterization(
                "the Jeffreys-prior penalty is only available for logistic models".into(),
            ));
        }
        return fit_firth_logistic(data, subset, options);
    }
    data.ensure_family(family)?;
    options.validate()?;
    validate_subset(family, data, subset)?;
    let problem = Problem::new(family, data.x(), subset, data.y());
    check_rank(&problem, subset)?;

    let mut theta = initial_parameters(family, data.y(), problem.dim());
    let mut ev = problem.evaluate(&theta, true)?;
    let mut converged = false;
    let mut iterations = 0;
    while iterations < options.max_iter {
        if amax(&ev.gradient) < SCORE_TOL {
            converged = true;
            break;
        }
        let h = ev.hessian.as_ref().expect("hessian requested");
        let Some(chol) = h.clone().cholesky() else {
            break;
        };
        let step = chol.solve(&(-&ev.gradient));
        let mut t = 1.0;
        let mut accepted = None;
        for _ in 0..=MAX_HALVINGS {
            let candidate = &theta + &step * t;
            if let Ok(l) = problem.loss(&candidate) {
                if l <= ev.loss {
                    accepted = Some(candidate);
                    break;
                }
            }
            t *= 0.5;
        }
        let Some(candidate) = accepted else {
            // no decrease possible at working precision
            converged = true;
            break;
        };
        iterations += 1;
        let next = problem.evaluate(&candidate, true)?;
        let done = converged_by_loss(ev.loss, next.loss, options.tol);
        theta = candidate;
        ev = next;
        if done {
            converged = true;
            break;
        }
    }

    let h = ev.hessian.as_ref().expect("hessian requested");
    let n = data.n() as f64;
    let covariance = spd_inverse(h)
        .map(|inv| inv / n)
        .unwrap_or_else(|| DMatrix::from_element(h.nrows(), h.ncols(), f64::NAN));
    let mut result = assemble(
        family,
        data.p(),
        subset,
        &theta,
        covariance,
        converged,
        iterations,
        ev.loss,
        false,
    );
    if family == Family::Logistic {
        let sds = data.column_sds();
        for (k, &j) in subset.iter().enumerate() {
            if (theta[k + 1] * sds[j]).abs() > SEPARATION_FLAG {
                result.warnings.push(format!(
                    "possible separation: column {} has standardized coefficient {:.1}",
                    data.names()[j],
                    theta[k + 1] * sds[j]
                ));
            }
        }
    }
    Ok(result)
}

#[allow(clippy::too_many_arguments)]
fn assemble(
    family: Family,
    p: usize,
    subset: &[usize],
    theta: &DVector<f64>,
    covariance: DMatrix<f64>,
    converged: bool,
    iterations: usize,
    final_loss: f64,
    jeffreys: bool,
) -> FitResult {
    let offset = usize::from(family.has_intercept());
    let se = |k: usize| covariance[(k, k)].sqrt();
    let mut coef = Coefficients::zeros(family, p);
    let intercept = family.has_intercept().then(|| {
        coef.intercept = Some(theta[0]);
        Estimate::new(theta[0], se(0))
    });
    let terms = subset
        .iter()
        .enumerate()
        .map(|(k, &j)| {
            coef.beta[j] = theta[k + offset];
            Estimate::new(theta[k + offset], se(k + offset))
        })
        .collect();
    FitResult {
        family,
        subset: subset.to_vec(),
        coef,
        intercept,
        terms,
        covariance,
        converged,
        iterations,
        final_loss,
        jeffreys,
        warnings: Vec::new(),
    }
}

struct FirthState {
    objective: f64,
    loss: f64,
    /// Modified score `Zᵀ(y − μ + h(½ − μ))`, unnormalized.
    score: DVector<f64>,
    info_inverse: DMatrix<f64>,
}

fn firth_state(problem: &Problem, y: &[f64], theta: &DVector<f64>) -> Option<FirthState> {
    let eta = problem.eta(theta);
    let loss = problem.eta_loss(&eta).ok()?;
    let n = problem.n();
    let q = problem.dim();
    let mu: Vec<f64> = eta.iter().map(|&e| sigmoid(e)).collect();
    let w: Vec<f64> = mu.iter().map(|m| m * (1.0 - m)).collect();
    let mut sqrt_wz = problem.z.clone();
    for (i, mut row) in sqrt_wz.row_iter_mut().enumerate() {
        row *= w[i].sqrt();
    }
    let info = sqrt_wz.tr_mul(&sqrt_wz);
    let chol = info.cholesky()?;
    let log_det = 2.0 * chol.l_dirty().diagonal().iter().map(|d| d.ln()).sum::<f64>();
    // hat values h_i = ‖L⁻¹ √w_i z_i‖²
    let b = chol.l().solve_lower_triangular(&sqrt_wz.transpose())?;
    let mut adjusted = DVector::zeros(n);
    for i in 0..n {
        let h = b.column(i).norm_squared();
        adjusted[i] = y[i] - mu[i] + h * (0.5 - mu[i]);
    }
    let score = problem.z.tr_mul(&adjusted);
    let info_inverse = chol.inverse();
    debug_assert_eq!(info_inverse.nrows(), q);
    Some(FirthState {
        objective: loss - 0.5 * log_det / n as f64,
        loss,
        score,
        info_inverse,
    })
}

/// Logistic fit penalized by half the log-determinant of the Fisher
/// information (Firth / Jeffreys prior). Estimates stay finite under
/// complete or quasi-complete separation.
pub fn fit_firth_logistic(
    data: &Dataset,
    subset: &[usize],
    options: &FitOptions,
) -> Result<FitResult> {
    let family = Family::Logistic;
    data.ensure_family(family)?;
    options.validate()?;
    validate_subset(family, data, subset)?;
    let problem = Problem::new(family, data.x(), subset, data.y());
    check_rank(&problem, subset)?;
    let y = data.y().values().expect("binary response");
    let n = data.n() as f64;

    let mut theta = initial_parameters(family, data.y(), problem.dim());
    let mut state = firth_state(&problem, y, &theta)
        .ok_or_else(|| Error::RankDeficient { columns: subset.to_vec() })?;
    let mut converged = false;
    let mut iterations = 0;
    while iterations < options.max_iter {
        if amax(&state.score) / n < SCORE_TOL {
            converged = true;
            break;
        }
        let step = &state.info_inverse * &state.score;
        let mut t = 1.0;
        let mut accepted = None;
        for _ in 0..=MAX_HALVINGS {
            let candidate = &theta + &step * t;
            if let Some(s) = firth_state(&problem, y, &candidate) {
                if s.objective <= state.objective {
                    accepted = Some((candidate, s));
                    break;
                }
            }
            t *= 0.5;
        }
        let Some((candidate, next)) = accepted else {
            converged = true;
            break;
        };
        iterations += 1;
        let done = converged_by_loss(state.objective, next.objective, options.tol);
        theta = candidate;
        state = next;
        if done {
            converged = true;
            break;
        }
    }
    Ok(assemble(
        family,
        data.p(),
        subset,
        &theta,
        state.info_inverse,
        converged,
        iterations,
        state.loss,
        true,
    ))
}

/// Generalized variance inflation factors for the columns in `subset`.
///
/// Every predictor is a single-column term, so each GVIF is the matching
/// diagonal entry of the inverse correlation matrix (the classical VIF).
pub fn gvif(data: &Dataset, subset: &[usize]) -> Result<Vec<f64>> {
    if subset.len() <= 1 {
        return Ok(vec![1.0; subset.len()]);
    }
    let x = data.x();
    let n = x.nrows();
    let mut centered = DMatrix::zeros(n, subset.len());
    for (k, &j) in subset.iter().enumerate() {
        if j >= data.p() {
            return Err(Error::InvalidSubset(format!("column {j} out of range")));
        }
        let col = x.column(j);
        let mean = col.mean();
        let scaled = col.map(|v| v - mean);
        let norm = scaled.norm();
        centered.column_mut(k).copy_from(&(scaled / norm));
    }
    let dependent = dependent_columns(&centered, false);
    if !dependent.is_empty() {
        return Err(Error::Collinear {
            columns: dependent.into_iter().map(|k| subset[k]).collect(),
        });
    }
    let corr = centered.tr_mul(&centered);
    let inv = spd_inverse(&corr).ok_or_else(|| Error::Collinear {
        columns: subset.to_vec(),
    })?;
    Ok(inv.diagonal().iter().copied().collect())
}
