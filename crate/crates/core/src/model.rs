//! Likelihood families, datasets and coefficient vectors.
//!
//! Every loss here is normalized by `1/n`. GLM losses are the negative
//! log-likelihood of a canonical-link exponential family,
//! `-(1/n) Σ [y_i θ_i - b(θ_i)]`; the Cox loss is the negative log partial
//! likelihood with Breslow handling of tied event times, also divided by `n`.
//! Efron's tie correction would slot into [`Problem`] without touching the
//! callers.

use std::fmt;
use std::str::FromStr;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Linear predictors are clamped to this magnitude before the logistic
/// mean is evaluated.
pub const LOGISTIC_ETA_CLAMP: f64 = 30.0;

/// Largest Poisson linear predictor accepted before `e^θ` is treated as
/// an overflow.
const POISSON_ETA_MAX: f64 = 700.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Family {
    Logistic,
    Poisson,
    Cox,
}

impl Family {
    pub const ALL: [Family; 3] = [Family::Logistic, Family::Poisson, Family::Cox];

    pub fn name(self) -> &'static str {
        match self {
            Family::Logistic => "logistic",
            Family::Poisson => "poisson",
            Family::Cox => "cox",
        }
    }

    /// Cox models absorb the intercept into the baseline hazard.
    pub fn has_intercept(self) -> bool {
        !matches!(self, Family::Cox)
    }

    /// Cumulant function `b(θ)`. Not defined for Cox.
    pub fn cumulant(self, theta: f64) -> f64 {
        match self {
            Family::Logistic => softplus(theta),
            Family::Poisson => theta.exp(),
            Family::Cox => f64::NAN,
        }
    }

    /// Inverse link `b'(θ)`.
    pub fn mean(self, theta: f64) -> f64 {
        match self {
            Family::Logistic => sigmoid(theta),
            Family::Poisson => theta.exp(),
            Family::Cox => f64::NAN,
        }
    }

    /// Variance function `b''(θ)`.
    pub fn variance(self, theta: f64) -> f64 {
        match self {
            Family::Logistic => {
                let mu = sigmoid(theta);
                mu * (1.0 - mu)
            }
            Family::Poisson => theta.exp(),
            Family::Cox => f64::NAN,
        }
    }

    /// Canonical link `g(μ)`.
    pub fn link(self, mu: f64) -> f64 {
        match self {
            Family::Logistic => (mu / (1.0 - mu)).ln(),
            Family::Poisson => mu.ln(),
            Family::Cox => f64::NAN,
        }
    }
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Family {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "logistic" | "binomial" => Ok(Family::Logistic),
            "poisson" => Ok(Family::Poisson),
            "cox" => Ok(Family::Cox),
            other => Err(Error::Config(format!(
                "unknown family `{other}` (expected logistic, poisson or cox)"
            ))),
        }
    }
}

pub(crate) fn sigmoid(theta: f64) -> f64 {
    let t = theta.clamp(-LOGISTIC_ETA_CLAMP, LOGISTIC_ETA_CLAMP);
    1.0 / (1.0 + (-t).exp())
}

fn softplus(theta: f64) -> f64 {
    if theta > 0.0 {
        theta + (-theta).exp().ln_1p()
    } else {
        theta.exp().ln_1p()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Response {
    /// 0/1 outcomes.
    Binary(Vec<f64>),
    /// Nonnegative integer counts.
    Count(Vec<f64>),
    /// Follow-up time and event indicator.
    Survival { time: Vec<f64>, status: Vec<bool> },
}

impl Response {
    pub fn len(&self) -> usize {
        match self {
            Response::Binary(y) | Response::Count(y) => y.len(),
            Response::Survival { time, .. } => time.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn family(&self) -> Family {
        match self {
            Response::Binary(_) => Family::Logistic,
            Response::Count(_) => Family::Poisson,
            Response::Survival { .. } => Family::Cox,
        }
    }

    /// Response values for GLM families, `None` for survival data.
    pub fn values(&self) -> Option<&[f64]> {
        match self {
            Response::Binary(y) | Response::Count(y) => Some(y),
            Response::Survival { .. } => None,
        }
    }

    pub fn select(&self, rows: &[usize]) -> Response {
        match self {
            Response::Binary(y) => Response::Binary(rows.iter().map(|&i| y[i]).collect()),
            Response::Count(y) => Response::Count(rows.iter().map(|&i| y[i]).collect()),
            Response::Survival { time, status } => Response::Survival {
                time: rows.iter().map(|&i| time[i]).collect(),
                status: rows.iter().map(|&i| status[i]).collect(),
            },
        }
    }

    fn validate(&self) -> Result<()> {
        match self {
            Response::Binary(y) => {
                if let Some(i) = y.iter().position(|&v| v != 0.0 && v != 1.0) {
                    return Err(Error::InvalidData(format!(
                        "binary response at row {} is {}, expected 0 or 1",
                        i + 1,
                        y[i]
                    )));
                }
            }
            Response::Count(y) => {
                if let Some(i) = y
                    .iter()
                    .position(|&v| !v.is_finite() || v < 0.0 || v.fract() != 0.0)
                {
                    return Err(Error::InvalidData(format!(
                        "count response at row {} is {}, expected a nonnegative integer",
                        i + 1,
                        y[i]
                    )));
                }
            }
            Response::Survival { time, status } => {
                if time.len() != status.len() {
                    return Err(Error::DimensionMismatch {
                        expected: time.len(),
                        found: status.len(),
                    });
                }
                if let Some(i) = time.iter().position(|&t| !(t.is_finite() && t > 0.0)) {
                    return Err(Error::InvalidData(format!(
                        "survival time at row {} is {}, expected a positive number",
                        i + 1,
                        time[i]
                    )));
                }
                if !status.iter().any(|&s| s) {
                    return Err(Error::DegenerateResponse(
                        "survival data contain no events".into(),
                    ));
                }
            }
        }
        Ok(())
    }
}

/// Column centering and scaling applied to a design matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct Standardization {
    pub means: Vec<f64>,
    pub sds: Vec<f64>,
}

/// Design matrix plus response. Predictor columns are validated to be
/// finite and non-constant.
#[derive(Debug, Clone)]
pub struct Dataset {
    x: DMatrix<f64>,
    y: Response,
    names: Vec<String>,
    standardization: Option<Standardization>,
}

impl Dataset {
    pub fn new(x: DMatrix<f64>, y: Response, names: Vec<String>) -> Result<Self> {
        let (n, p) = x.shape();
        if n < 2 {
            return Err(Error::InvalidData(format!("need at least 2 rows, got {n}")));
        }
        if y.len() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                found: y.len(),
            });
        }
        if names.len() != p {
            return Err(Error::DimensionMismatch {
                expected: p,
                found: names.len(),
            });
        }
        if let Some(k) = x.iter().position(|v| !v.is_finite()) {
            return Err(Error::InvalidData(format!(
                "non-finite predictor at row {}, column `{}`",
                k % n + 1,
                names[k / n]
            )));
        }
        y.validate()?;
        for (j, name) in names.iter().enumerate() {
            if column_sd(&x, j) <= 0.0 {
                return Err(Error::ConstantColumn(name.clone()));
            }
        }
        Ok(Self {
            x,
            y,
            names,
            standardization: None,
        })
    }

    /// Builds a dataset with predictors named `V1..Vp`.
    pub fn unnamed(x: DMatrix<f64>, y: Response) -> Result<Self> {
        let names = (1..=x.ncols()).map(|j| format!("V{j}")).collect();
        Self::new(x, y, names)
    }

    pub fn n(&self) -> usize {
        self.x.nrows()
    }

    pub fn p(&self) -> usize {
        self.x.ncols()
    }

    pub fn x(&self) -> &DMatrix<f64> {
        &self.x
    }

    pub fn y(&self) -> &Response {
        &self.y
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn family(&self) -> Family {
        self.y.family()
    }

    pub fn is_standardized(&self) -> bool {
        self.standardization.is_some()
    }

    pub fn standardization(&self) -> Option<&Standardization> {
        self.standardization.as_ref()
    }

    pub fn column_means(&self) -> Vec<f64> {
        (0..self.p()).map(|j| self.x.column(j).mean()).collect()
    }

    /// Sample standard deviations (denominator `n - 1`).
    pub fn column_sds(&self) -> Vec<f64> {
        (0..self.p()).map(|j| column_sd(&self.x, j)).collect()
    }

    /// Centers every column and scales it to unit sample standard deviation,
    /// recording the transform.
    pub fn standardize(&self) -> Dataset {
        let means = self.column_means();
        let sds = self.column_sds();
        let mut x = self.x.clone();
        for (j, mut col) in x.column_iter_mut().enumerate() {
            col.apply(|v| *v = (*v - means[j]) / sds[j]);
        }
        Dataset {
            x,
            y: self.y.clone(),
            names: self.names.clone(),
            standardization: Some(Standardization { means, sds }),
        }
    }

    /// Row subset, revalidated (a subset may leave a column constant).
    pub fn select_rows(&self, rows: &[usize]) -> Result<Dataset> {
        let x = self.x.select_rows(rows.iter());
        Dataset::new(x, self.y.select(rows), self.names.clone())
    }

    pub(crate) fn ensure_family(&self, family: Family) -> Result<()> {
        if self.family() != family {
            return Err(Error::FamilyMismatch(family.name()));
        }
        Ok(())
    }
}

fn column_sd(x: &DMatrix<f64>, j: usize) -> f64 {
    let n = x.nrows();
    let col = x.column(j);
    let mean = col.mean();
    let ss: f64 = col.iter().map(|v| (v - mean) * (v - mean)).sum();
    (ss / (n as f64 - 1.0)).sqrt()
}

/// Intercept (absent for Cox) and per-predictor coefficients.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Coefficients {
    pub intercept: Option<f64>,
    pub beta: Vec<f64>,
}

impl Coefficients {
    pub fn zeros(family: Family, p: usize) -> Self {
        Self {
            intercept: family.has_intercept().then_some(0.0),
            beta: vec![0.0; p],
        }
    }

    /// Stacked parameter vector `(β_0, β_1, …, β_p)`, or just `β` for Cox.
    pub fn to_vector(&self) -> DVector<f64> {
        DVector::from_iterator(
            self.beta.len() + usize::from(self.intercept.is_some()),
            self.intercept.iter().chain(self.beta.iter()).copied(),
        )
    }

    pub fn from_vector(family: Family, theta: &DVector<f64>) -> Self {
        if family.has_intercept() {
            Self {
                intercept: Some(theta[0]),
                beta: theta.iter().skip(1).copied().collect(),
            }
        } else {
            Self {
                intercept: None,
                beta: theta.iter().copied().collect(),
            }
        }
    }

    pub fn support(&self) -> Vec<usize> {
        self.beta
            .iter()
            .enumerate()
            .filter(|(_, b)| **b != 0.0)
            .map(|(j, _)| j)
            .collect()
    }

    pub fn linear_predictor(&self, x: &DMatrix<f64>) -> DVector<f64> {
        let mut eta = DVector::from_element(x.nrows(), self.intercept.unwrap_or(0.0));
        for (j, &b) in self.beta.iter().enumerate() {
            if b != 0.0 {
                eta.axpy(b, &x.column(j), 1.0);
            }
        }
        eta
    }

    pub fn is_finite(&self) -> bool {
        self.intercept.is_none_or(f64::is_finite) && self.beta.iter().all(|b| b.is_finite())
    }
}

fn check_coef(family: Family, data: &Dataset, coef: &Coefficients) -> Result<()> {
    data.ensure_family(family)?;
    if coef.beta.len() != data.p() {
        return Err(Error::DimensionMismatch {
            expected: data.p(),
            found: coef.beta.len(),
        });
    }
    if coef.intercept.is_some() != family.has_intercept() {
        return Err(Error::InvalidData(format!(
            "{family} coefficients {} an intercept",
            if family.has_intercept() {
                "require"
            } else {
                "must not carry"
            }
        )));
    }
    Ok(())
}

fn full_problem<'a>(family: Family, data: &'a Dataset) -> Problem<'a> {
    let cols: Vec<usize> = (0..data.p()).collect();
    Problem::new(family, data.x(), &cols, data.y())
}

/// Normalized negative log-likelihood (GLM) or negative log partial
/// likelihood (Cox).
pub fn loss(family: Family, data: &Dataset, coef: &Coefficients) -> Result<f64> {
    check_coef(family, data, coef)?;
    full_problem(family, data).loss(&coef.to_vector())
}

/// Analytic gradient of [`loss`], intercept first for GLM families.
pub fn gradient(family: Family, data: &Dataset, coef: &Coefficients) -> Result<DVector<f64>> {
    check_coef(family, data, coef)?;
    Ok(full_problem(family, data)
        .evaluate(&coef.to_vector(), false)?
        .gradient)
}

/// Analytic Hessian of [`loss`].
pub fn hessian(family: Family, data: &Dataset, coef: &Coefficients) -> Result<DMatrix<f64>> {
    check_coef(family, data, coef)?;
    let ev = full_problem(family, data).evaluate(&coef.to_vector(), true)?;
    Ok(ev.hessian.expect("hessian requested"))
}

/// Observations sorted by decreasing time, grouped by tied times.
#[derive(Debug, Clone)]
pub(crate) struct RiskSets {
    order: Vec<usize>,
    /// `(start, end)` ranges into `order`, one per distinct time, decreasing.
    groups: Vec<(usize, usize)>,
    /// Number of events in each group.
    events: Vec<usize>,
}

impl RiskSets {
    pub(crate) fn new(time: &[f64], status: &[bool]) -> Self {
        let mut order: Vec<usize> = (0..time.len()).collect();
        order.sort_by(|&a, &b| time[b].total_cmp(&time[a]).then(a.cmp(&b)));
        let mut groups = Vec::new();
        let mut events = Vec::new();
        let mut start = 0;
        while start < order.len() {
            let t = time[order[start]];
            let mut end = start + 1;
            while end < order.len() && time[order[end]] == t {
                end += 1;
            }
            groups.push((start, end));
            events.push(order[start..end].iter().filter(|&&i| status[i]).count());
            start = end;
        }
        Self {
            order,
            groups,
            events,
        }
    }
}

#[derive(Debug, Clone)]
pub(crate) struct Evaluation {
    pub loss: f64,
    pub gradient: DVector<f64>,
    pub hessian: Option<DMatrix<f64>>,
}

/// First and second derivatives of the loss with respect to the linear
/// predictor. `weights` is the exact diagonal Hessian for GLM families and
/// the diagonal of the (non-diagonal) Cox Hessian.
pub(crate) struct EtaDerivatives {
    pub loss: f64,
    pub score: DVector<f64>,
    pub weights: DVector<f64>,
    /// Cox only: per-observation `e^{η-m} Σ d_g/S_g` and the event-group
    /// data needed to assemble the full Hessian.
    cox: Option<CoxTerms>,
}

struct CoxTerms {
    scaled_risk: DVector<f64>,
    cumulative: DVector<f64>,
    group_sums: Vec<f64>,
}

/// A likelihood restricted to a fixed design `z` (intercept column
/// included for GLM families).
#[derive(Debug, Clone)]
pub(crate) struct Problem<'a> {
    pub family: Family,
    pub z: DMatrix<f64>,
    pub y: &'a Response,
    risk: Option<RiskSets>,
}

impl<'a> Problem<'a> {
    /// Design built from the given columns of `x`, with an intercept column
    /// prepended for GLM families.
    pub(crate) fn new(family: Family, x: &DMatrix<f64>, cols: &[usize], y: &'a Response) -> Self {
        let n = x.nrows();
        let offset = usize::from(family.has_intercept());
        let mut z = DMatrix::zeros(n, cols.len() + offset);
        if offset == 1 {
            z.column_mut(0).fill(1.0);
        }
        for (k, &j) in cols.iter().enumerate() {
            z.column_mut(k + offset).copy_from(&x.column(j));
        }
        Self::from_design(family, z, y)
    }

    pub(crate) fn from_design(family: Family, z: DMatrix<f64>, y: &'a Response) -> Self {
        let risk = match y {
            Response::Survival { time, status } => Some(RiskSets::new(time, status)),
            _ => None,
        };
        Self { family, z, y, risk }
    }

    /// Same response and risk sets, different design.
    pub(crate) fn with_design(&self, z: DMatrix<f64>) -> Problem<'a> {
        Problem {
            family: self.family,
            z,
            y: self.y,
            risk: self.risk.clone(),
        }
    }

    pub(crate) fn n(&self) -> usize {
        self.z.nrows()
    }

    pub(crate) fn dim(&self) -> usize {
        self.z.ncols()
    }

    pub(crate) fn eta(&self, theta: &DVector<f64>) -> DVector<f64> {
        &self.z * theta
    }

    pub(crate) fn loss(&self, theta: &DVector<f64>) -> Result<f64> {
        self.eta_loss(&self.eta(theta))
    }

    pub(crate) fn eta_loss(&self, eta: &DVector<f64>) -> Result<f64> {
        let n = self.n() as f64;
        match (self.family, self.y) {
            (Family::Logistic, Response::Binary(y)) => Ok(eta
                .iter()
                .zip(y)
                .map(|(&e, &yi)| softplus(e) - yi * e)
                .sum::<f64>()
                / n),
            (Family::Poisson, Response::Count(y)) => {
                check_poisson(eta)?;
                Ok(eta
                    .iter()
                    .zip(y)
                    .map(|(&e, &yi)| e.exp() - yi * e)
                    .sum::<f64>()
                    / n)
            }
            (Family::Cox, Response::Survival { status, .. }) => {
                let risk = self.risk.as_ref().expect("risk sets for survival data");
                let m = eta.max();
                let mut s = 0.0;
                let mut ll = 0.0;
                for (g, &(a, b)) in risk.groups.iter().enumerate() {
                    for &i in &risk.order[a..b] {
                        s += (eta[i] - m).exp();
                    }
                    if risk.events[g] > 0 {
                        let log_s = m + s.ln();
                        for &i in &risk.order[a..b] {
                            if status[i] {
                                ll += eta[i] - log_s;
                            }
                        }
                    }
                }
                Ok(-ll / n)
            }
            _ => Err(Error::FamilyMismatch(self.family.name())),
        }
    }

    pub(crate) fn eta_derivatives(&self, eta: &DVector<f64>) -> Result<EtaDerivatives> {
        let n = self.n();
        let nf = n as f64;
        match (self.family, self.y) {
            (Family::Logistic | Family::Poisson, Response::Binary(y) | Response::Count(y)) => {
                if self.family == Family::Poisson {
                    check_poisson(eta)?;
                }
                let mut score = DVector::zeros(n);
                let mut weights = DVector::zeros(n);
                let mut loss = 0.0;
                for i in 0..n {
                    let e = eta[i];
                    let (b, mu, v) = match self.family {
                        Family::Logistic => {
                            let mu = sigmoid(e);
                            (softplus(e), mu, mu * (1.0 - mu))
                        }
                        _ => {
                            let mu = e.exp();
                            (mu, mu, mu)
                        }
                    };
                    loss += b - y[i] * e;
                    score[i] = (mu - y[i]) / nf;
                    weights[i] = v / nf;
                }
                Ok(EtaDerivatives {
                    loss: loss / nf,
                    score,
                    weights,
                    cox: None,
                })
            }
            (Family::Cox, Response::Survival { status, .. }) => {
                let risk = self.risk.as_ref().expect("risk sets for survival data");
                let m = eta.max();
                let r = eta.map(|e| (e - m).exp());
                let ngroups = risk.groups.len();
                let mut group_sums = vec![0.0; ngroups];
                let mut s = 0.0;
                let mut ll = 0.0;
                for (g, &(a, b)) in risk.groups.iter().enumerate() {
                    for &i in &risk.order[a..b] {
                        s += r[i];
                    }
                    group_sums[g] = s;
                    if risk.events[g] > 0 {
                        let log_s = m + s.ln();
                        for &i in &risk.order[a..b] {
                            if status[i] {
                                ll += eta[i] - log_s;
                            }
                        }
                    }
                }
                // cumulative Σ d_g/S_g over groups with time <= t_i,
                // walking from the earliest time upwards
                let mut cumulative = DVector::zeros(n);
                let mut cum = 0.0;
                let mut cum_sq = 0.0;
                let mut score = DVector::zeros(n);
                let mut weights = DVector::zeros(n);
                for (g, &(a, b)) in risk.groups.iter().enumerate().rev() {
                    let d = risk.events[g] as f64;
                    if d > 0.0 {
                        cum += d / group_sums[g];
                        cum_sq += d / (group_sums[g] * group_sums[g]);
                    }
                    for &i in &risk.order[a..b] {
                        cumulative[i] = cum;
                        let delta = if status[i] { 1.0 } else { 0.0 };
                        score[i] = (r[i] * cum - delta) / nf;
                        weights[i] = (r[i] * cum - r[i] * r[i] * cum_sq) / nf;
                    }
                }
                Ok(EtaDerivatives {
                    loss: -ll / nf,
                    score,
                    weights,
                    cox: Some(CoxTerms {
                        scaled_risk: r,
                        cumulative,
                        group_sums,
                    }),
                })
            }
            _ => Err(Error::FamilyMismatch(self.family.name())),
        }
    }

    pub(crate) fn evaluate(&self, theta: &DVector<f64>, with_hessian: bool) -> Result<Evaluation> {
        let eta = self.eta(theta);
        let d = self.eta_derivatives(&eta)?;
        let gradient = self.z.tr_mul(&d.score);
        let hessian = with_hessian.then(|| self.hessian_from(&d));
        Ok(Evaluation {
            loss: d.loss,
            gradient,
            hessian,
        })
    }

    pub(crate) fn hessian_from(&self, d: &EtaDerivatives) -> DMatrix<f64> {
        match &d.cox {
            None => weighted_gram(&self.z, &d.weights),
            Some(terms) => self.cox_hessian(terms),
        }
    }

    /// `(1/n) [Zᵀ diag(r∘C) Z − Σ_g d_g a_g a_gᵀ]` with `a_g` the
    /// risk-weighted mean covariate over the risk set of event group `g`.
    fn cox_hessian(&self, terms: &CoxTerms) -> DMatrix<f64> {
        let risk = self.risk.as_ref().expect("risk sets for survival data");
        let n = self.n();
        let q = self.dim();
        let nf = n as f64;
        let w = terms.scaled_risk.component_mul(&terms.cumulative);
        let mut h = weighted_gram(&self.z, &w);

        let event_groups = risk.events.iter().filter(|&&d| d > 0).count();
        let mut a = DMatrix::zeros(event_groups, q);
        let mut m1 = DVector::<f64>::zeros(q);
        let mut row = 0;
        for (g, &(lo, hi)) in risk.groups.iter().enumerate() {
            for &i in &risk.order[lo..hi] {
                let r = terms.scaled_risk[i];
                for k in 0..q {
                    m1[k] += r * self.z[(i, k)];
                }
            }
            let d = risk.events[g];
            if d > 0 {
                let scale = (d as f64).sqrt() / terms.group_sums[g];
                for k in 0..q {
                    a[(row, k)] = m1[k] * scale;
                }
                row += 1;
            }
        }
        h -= a.tr_mul(&a);
        h /= nf;
        symmetrize(&mut h);
        h
    }
}

fn check_poisson(eta: &DVector<f64>) -> Result<()> {
    if eta.iter().any(|&e| !(e <= POISSON_ETA_MAX)) {
        return Err(Error::EvaluationOverflow("poisson"));
    }
    Ok(())
}

/// `Zᵀ diag(w) Z`, symmetrized.
pub(crate) fn weighted_gram(z: &DMatrix<f64>, w: &DVector<f64>) -> DMatrix<f64> {
    let (n, q) = z.shape();
    let zs = z.as_slice();
    let mut wz = z.clone();
    for mut col in wz.column_iter_mut() {
        col.component_mul_assign(w);
    }
    let ws = wz.as_slice();
    let mut h = DMatrix::zeros(q, q);
    // upper triangle only; columns are contiguous
    for a in 0..q {
        let wa = &ws[a * n..(a + 1) * n];
        for b in a..q {
            let v = dot(wa, &zs[b * n..(b + 1) * n]);
            h[(a, b)] = v;
            h[(b, a)] = v;
        }
    }
    h
}

/// Dot product with four independent accumulators.
fn dot(a: &[f64], b: &[f64]) -> f64 {
    let mut acc = [0.0; 4];
    let (ca, cb) = (a.chunks_exact(4), b.chunks_exact(4));
    let (ra, rb) = (ca.remainder(), cb.remainder());
    for (x, y) in ca.zip(cb) {
        for k in 0..4 {
            acc[k] += x[k] * y[k];
        }
    }
    let tail: f64 = ra.iter().zip(rb).map(|(x, y)| x * y).sum();
    (acc[0] + acc[1]) + (acc[2] + acc[3]) + tail
}

fn symmetrize(h: &mut DMatrix<f64>) {
    let q = h.nrows();
    for i in 0..q {
        for j in (i + 1)..q {
            let v = 0.5 * (h[(i, j)] + h[(j, i)]);
            h[(i, j)] = v;
            h[(j, i)] = v;
        }
    }
}
