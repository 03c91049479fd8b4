//! Second-generation p-values and the two-stage ProSGPV selector.
//!
//! Stage one fits a lasso path and takes the active set at λ_gic as the
//! candidate set. Stage two refits the candidates without penalty on
//! standardized predictors, builds the interval null `[-δ, δ]` from the
//! mean standard error, and keeps the candidates whose 95% interval does
//! not touch the null. The final model is an unpenalized refit on the raw
//! predictors of the kept set.

use std::fmt;
use std::str::FromStr;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::fitting::{fit_mle, gvif, FitOptions, FitResult, Z95};
use crate::lasso::{
    default_lambda_ratio, select_lambda_gic, solve_path, GicSelection, LassoPath,
    DEFAULT_GRID_SIZE,
};
use crate::model::{Coefficients, Dataset, Family};

/// Interval null hypothesis `[-delta, delta]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct IntervalNull {
    delta: f64,
}

impl IntervalNull {
    pub fn new(delta: f64) -> Result<Self> {
        if !(delta > 0.0 && delta.is_finite()) {
            return Err(Error::Parameterization(format!(
                "null half-width must be positive and finite, got {delta}"
            )));
        }
        Ok(Self { delta })
    }

    pub fn delta(&self) -> f64 {
        self.delta
    }

    /// `|H₀| = 2δ`.
    pub fn length(&self) -> f64 {
        2.0 * self.delta
    }
}

/// Second-generation p-value of the interval `[lower, upper]` against
/// `null`: the fraction of the interval inside the null, with wide
/// intervals (`|I| > 2|H₀|`) capped at one half.
pub fn sgpv(lower: f64, upper: f64, null: &IntervalNull) -> Result<f64> {
    if !(lower.is_finite() && upper.is_finite()) || lower > upper {
        return Err(Error::MalformedInterval { lower, upper });
    }
    let d = null.delta;
    let width = upper - lower;
    if width == 0.0 {
        return Ok(if (-d..=d).contains(&lower) { 1.0 } else { 0.0 });
    }
    let overlap = (upper.min(d) - lower.max(-d)).max(0.0);
    Ok(overlap / width * (width / (2.0 * null.length())).max(1.0))
}

/// How the stage-two null half-width is built from the candidate fit.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum NullBound {
    /// Mean standard error of the candidate coefficients.
    #[default]
    Constant,
    /// Mean of standard errors each divided by its GVIF.
    Gvif,
}

impl fmt::Display for NullBound {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            NullBound::Constant => "constant",
            NullBound::Gvif => "gvif",
        })
    }
}

impl FromStr for NullBound {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "constant" => Ok(NullBound::Constant),
            "gvif" => Ok(NullBound::Gvif),
            other => Err(Error::Config(format!(
                "unknown bound `{other}` (expected constant or gvif)"
            ))),
        }
    }
}

fn candidate_ses(stage2: &FitResult, candidates: &[usize]) -> Result<Vec<f64>> {
    if candidates.is_empty() {
        return Err(Error::Parameterization(
            "the null bound needs a nonempty candidate set".into(),
        ));
    }
    candidates
        .iter()
        .map(|&k| {
            stage2
                .se(k)
                .filter(|se| se.is_finite() && *se > 0.0)
                .ok_or_else(|| {
                    Error::Parameterization(format!(
                        "candidate {k} has no finite positive standard error"
                    ))
                })
        })
        .collect()
}

/// `δ = mean(SE_k)` over the candidate set.
pub fn null_bound_se(stage2: &FitResult, candidates: &[usize]) -> Result<IntervalNull> {
    let se = candidate_ses(stage2, candidates)?;
    IntervalNull::new(se.iter().sum::<f64>() / se.len() as f64)
}

/// `δ = (1/|C|) Σ SE_k / GVIF_k`; equal to [`null_bound_se`] when the
/// candidate columns are uncorrelated.
pub fn null_bound_gvif(
    stage2: &FitResult,
    data: &Dataset,
    candidates: &[usize],
) -> Result<IntervalNull> {
    let se = candidate_ses(stage2, candidates)?;
    let g = gvif(data, candidates)?;
    let total: f64 = se.iter().zip(&g).map(|(s, v)| s / v).sum();
    IntervalNull::new(total / se.len() as f64)
}

/// Per-candidate SGPV screening of a stage-two fit.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Screen {
    pub null_bound: IntervalNull,
    /// Aligned with the candidate set.
    pub sgpvs: Vec<f64>,
    /// `1.96·SE_k + δ`, aligned with the candidate set.
    pub cutoffs: Vec<f64>,
    pub selected: Vec<usize>,
}

/// Keeps the candidates whose SGPV against `null` is zero.
pub fn screen(stage2: &FitResult, candidates: &[usize], null: IntervalNull) -> Result<Screen> {
    let mut sgpvs = Vec::with_capacity(candidates.len());
    let mut cutoffs = Vec::with_capacity(candidates.len());
    let mut selected = Vec::new();
    for &k in candidates {
        let est = stage2.estimate(k).ok_or_else(|| {
            Error::InvalidSubset(format!("candidate {k} is not in the stage-two fit"))
        })?;
        let value = sgpv(est.ci_lower, est.ci_upper, &null)?;
        if value == 0.0 {
            selected.push(k);
        }
        sgpvs.push(value);
        cutoffs.push(Z95 * est.se + null.delta());
    }
    Ok(Screen {
        null_bound: null,
        sgpvs,
        cutoffs,
        selected,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SelectionConfig {
    pub bound: NullBound,
    /// Use the Jeffreys-prior fit for logistic stage-two and final refits.
    pub jeffreys: bool,
    pub grid_size: usize,
    /// `None` picks [`default_lambda_ratio`].
    pub lambda_ratio: Option<f64>,
}

impl Default for SelectionConfig {
    fn default() -> Self {
        Self {
            bound: NullBound::Constant,
            jeffreys: false,
            grid_size: DEFAULT_GRID_SIZE,
            lambda_ratio: None,
        }
    }
}

impl SelectionConfig {
    fn fit_options(&self, family: Family) -> FitOptions {
        FitOptions {
            jeffreys: self.jeffreys && family == Family::Logistic,
            ..FitOptions::default()
        }
    }
}

#[derive(Debug, Clone)]
pub struct SelectionResult {
    pub family: Family,
    pub config: SelectionConfig,
    pub candidate_set: Vec<usize>,
    pub final_set: Vec<usize>,
    /// Unpenalized refit on the final set (original scale), zero elsewhere.
    pub coef: Coefficients,
    /// Aligned with `candidate_set`.
    pub sgpvs: Vec<f64>,
    /// Absent when the candidate set is empty.
    pub null_bound: Option<IntervalNull>,
    /// `1.96·SE_k + δ` on the standardized scale, aligned with `candidate_set`.
    pub per_variable_cutoffs: Vec<f64>,
    pub lambda_gic: f64,
    pub stage1: LassoPath,
    /// Candidate refit on standardized predictors.
    pub stage2_fit: Option<FitResult>,
    /// Final refit on the original predictors.
    pub final_fit: FitResult,
}

impl SelectionResult {
    /// Whether every fit in the pipeline converged.
    pub fn converged(&self) -> bool {
        self.final_fit.converged && self.stage2_fit.as_ref().is_none_or(|f| f.converged)
    }
}

fn stage_error(stage: u8, candidates: &[usize], source: Error) -> Error {
    Error::Stage {
        stage,
        candidates: candidates.to_vec(),
        source: Box::new(source),
    }
}

/// Stage one: lasso path and λ_gic candidate set.
pub(crate) fn stage_one(
    family: Family,
    data: &Dataset,
    config: &SelectionConfig,
) -> Result<(LassoPath, GicSelection)> {
    let ratio = config
        .lambda_ratio
        .unwrap_or_else(|| default_lambda_ratio(data.n(), data.p()));
    let path =
        solve_path(family, data, config.grid_size, ratio).map_err(|e| stage_error(1, &[], e))?;
    let selection = select_lambda_gic(&path).map_err(|e| stage_error(1, &[], e))?;
    Ok((path, selection))
}

/// Unpenalized candidate refit on standardized predictors.
pub(crate) fn stage_two_fit(
    family: Family,
    standardized: &Dataset,
    candidates: &[usize],
    config: &SelectionConfig,
) -> Result<FitResult> {
    fit_mle(family, standardized, candidates, &config.fit_options(family))
        .map_err(|e| stage_error(2, candidates, e))
}

/// Two-stage ProSGPV selection.
pub fn prosgpv(family: Family, data: &Dataset, config: &SelectionConfig) -> Result<SelectionResult> {
    data.ensure_family(family)?;
    let (stage1, selection) = stage_one(family, data, config)?;
    let candidates = selection.candidates;
    let options = config.fit_options(family);

    let (stage2_fit, screened) = if candidates.is_empty() {
        (None, None)
    } else {
        let standardized = data.standardize();
        let fit = stage_two_fit(family, &standardized, &candidates, config)?;
        let null = match config.bound {
            NullBound::Constant => null_bound_se(&fit, &candidates),
            NullBound::Gvif => null_bound_gvif(&fit, &standardized, &candidates),
        }
        .map_err(|e| stage_error(2, &candidates, e))?;
        let screened = screen(&fit, &candidates, null).map_err(|e| stage_error(2, &candidates, e))?;
        (Some(fit), Some(screened))
    };

    let final_set = screened
        .as_ref()
        .map(|s| s.selected.clone())
        .unwrap_or_default();
    let final_fit =
        fit_mle(family, data, &final_set, &options).map_err(|e| stage_error(2, &candidates, e))?;
    let (sgpvs, per_variable_cutoffs, null_bound) = match screened {
        Some(s) => (s.sgpvs, s.cutoffs, Some(s.null_bound)),
        None => (Vec::new(), Vec::new(), None),
    };
    Ok(SelectionResult {
        family,
        config: *config,
        candidate_set: candidates,
        final_set,
        coef: final_fit.coef.clone(),
        sgpvs,
        null_bound,
        per_variable_cutoffs,
        lambda_gic: selection.lambda,
        stage1,
        stage2_fit,
        final_fit,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn null(d: f64) -> IntervalNull {
        IntervalNull::new(d).unwrap()
    }

    #[test]
    fn sgpv_worked_values() {
        assert_eq!(sgpv(0.5, 1.5, &null(0.2)).unwrap(), 0.0);
        assert_relative_eq!(sgpv(-0.1, 0.1, &null(0.2)).unwrap(), 1.0);
        // |I| = 2 > 2|H0| = 0.8: overlap 0.4 over 2|H0|
        assert_relative_eq!(sgpv(-1.0, 1.0, &null(0.2)).unwrap(), 0.5, epsilon = 1e-15);
        // |I| = 0.8 = 2|H0|: correction is 1
        assert_relative_eq!(sgpv(0.1, 0.9, &null(0.2)).unwrap(), 0.125, epsilon = 1e-15);
    }

    #[test]
    fn sgpv_degenerate_and_malformed() {
        assert_eq!(sgpv(0.1, 0.1, &null(0.2)).unwrap(), 1.0);
        assert_eq!(sgpv(0.3, 0.3, &null(0.2)).unwrap(), 0.0);
        assert!(matches!(
            sgpv(1.0, 0.0, &null(0.2)),
            Err(Error::MalformedInterval { .. })
        ));
        assert!(sgpv(0.0, f64::INFINITY, &null(0.2)).is_err());
        assert!(IntervalNull::new(0.0).is_err());
        assert_eq!(null(0.3).length(), 0.6);
    }

    #[test]
    fn bound_parsing() {
        assert_eq!("gvif".parse::<NullBound>().unwrap(), NullBound::Gvif);
        assert_eq!("constant".parse::<NullBound>().unwrap(), NullBound::Constant);
        assert!("zero".parse::<NullBound>().is_err());
    }
}
