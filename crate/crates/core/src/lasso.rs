//! ℓ1-penalized paths for logistic, Poisson and Cox models.
//!
//! Predictors are centered and scaled to unit sample standard deviation
//! before fitting; the penalty applies on that scale and the intercept is
//! never penalized. Each λ is solved by an active-set proximal Newton
//! method: a quadratic model of the loss restricted to the working set is
//! minimized by cyclic coordinate descent, followed by a backtracking line
//! search on the penalized objective. Coordinates outside the working set
//! that violate the KKT conditions are added until none remain.

use std::collections::HashMap;

use nalgebra::{DMatrix, DVector};
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::fitting::{fit_mle, FitOptions};
use crate::linalg::amax;
use crate::model::{self, Coefficients, Dataset, Family, Problem, Response, Standardization};

pub const DEFAULT_GRID_SIZE: usize = 100;
pub const DEFAULT_FOLDS: usize = 10;
/// Largest coefficient change (standardized scale) that ends a λ solve.
pub const CD_TOL: f64 = 1e-7;
/// Coordinate-descent sweeps allowed per λ.
pub const MAX_SWEEPS: usize = 1000;

const INNER_TOL: f64 = 1e-11;
const MAX_NEWTON: usize = 200;
const MAX_LINE_SEARCH: usize = 60;
/// Paths stop once this fraction of the null deviance is explained.
const SATURATION: f64 = 0.999;

/// λ_min/λ_max ratio: `1e-4` when `n > p`, `1e-2` otherwise.
pub fn default_lambda_ratio(n: usize, p: usize) -> f64 {
    if n > p {
        1e-4
    } else {
        1e-2
    }
}

#[derive(Debug, Clone)]
pub struct LassoPath {
    pub family: Family,
    /// Strictly decreasing penalties, on the standardized scale.
    pub lambdas: Vec<f64>,
    /// Coefficients on the original predictor scale.
    pub coefs: Vec<Coefficients>,
    /// The same solutions on the standardized (fitting) scale.
    pub standardized: Vec<Coefficients>,
    pub active_sets: Vec<Vec<usize>>,
    pub df: Vec<usize>,
    /// Generalized information criterion per λ; empty when not computed.
    pub gic: Vec<f64>,
    pub lambda_gic: Option<f64>,
    pub lambda_min: Option<f64>,
    pub scaling: Standardization,
    pub n: usize,
    pub p: usize,
}

impl LassoPath {
    pub fn len(&self) -> usize {
        self.lambdas.len()
    }

    pub fn is_empty(&self) -> bool {
        self.lambdas.is_empty()
    }

    pub fn index_of(&self, lambda: f64) -> Option<usize> {
        self.lambdas.iter().position(|&l| l == lambda)
    }
}

/// Candidate set chosen at λ_gic.
#[derive(Debug, Clone, PartialEq)]
pub struct GicSelection {
    pub lambda: f64,
    pub index: usize,
    pub candidates: Vec<usize>,
    /// Set when the active set had to be cut down to `n - 2` columns.
    pub truncated: bool,
}

/// Cross-validated deviance curve.
#[derive(Debug, Clone)]
pub struct CvCurve {
    pub lambdas: Vec<f64>,
    pub deviance: Vec<f64>,
    pub index_min: usize,
    pub lambda_min: f64,
}

enum Lambdas<'l> {
    Grid { size: usize, ratio: f64 },
    Given(&'l [f64]),
}

/// Lasso path over a log-spaced grid from λ_max down to
/// `λ_max · lambda_ratio`, with GIC evaluated at every λ.
pub fn solve_path(
    family: Family,
    data: &Dataset,
    grid_size: usize,
    lambda_ratio: f64,
) -> Result<LassoPath> {
    let mut path = fit_path(
        family,
        data,
        Lambdas::Grid {
            size: grid_size,
            ratio: lambda_ratio,
        },
    )?;
    fill_gic(family, data, &mut path)?;
    Ok(path)
}

/// Path without the information criterion (cheaper; used for the
/// cross-validated comparator).
pub fn solve_path_without_gic(
    family: Family,
    data: &Dataset,
    grid_size: usize,
    lambda_ratio: f64,
) -> Result<LassoPath> {
    fit_path(
        family,
        data,
        Lambdas::Grid {
            size: grid_size,
            ratio: lambda_ratio,
        },
    )
}

/// Path over caller-supplied penalties (standardized scale, decreasing).
pub fn solve_path_at(family: Family, data: &Dataset, lambdas: &[f64]) -> Result<LassoPath> {
    fit_path(family, data, Lambdas::Given(lambdas))
}

fn check_response(family: Family, data: &Dataset) -> Result<()> {
    data.ensure_family(family)?;
    match data.y() {
        Response::Binary(y) | Response::Count(y) => {
            if y.iter().all(|&v| v == y[0]) {
                return Err(Error::DegenerateResponse(format!(
                    "{family} response is constant"
                )));
            }
        }
        Response::Survival { status, .. } => {
            if !status.iter().any(|&s| s) {
                return Err(Error::DegenerateResponse("no events".into()));
            }
        }
    }
    Ok(())
}

fn fit_path(family: Family, data: &Dataset, spec: Lambdas) -> Result<LassoPath> {
    check_response(family, data)?;
    let n = data.n();
    let p = data.p();
    let std = data.standardize();
    let scaling = std.standardization().cloned().expect("standardized");
    let solver = Solver::new(family, std.x(), data.y());

    let mut state = solver.null_state();
    let lambda_max = amax(&solver.full_gradient(&state)?);
    let lambdas: Vec<f64> = match spec {
        Lambdas::Grid { size, ratio } => {
            if size == 0 || !(ratio > 0.0 && ratio < 1.0) {
                return Err(Error::Parameterization(format!(
                    "grid size {size} and ratio {ratio} do not define a path"
                )));
            }
            if !(lambda_max > 0.0) {
                return Err(Error::DegenerateResponse(
                    "every predictor has zero score at the null model".into(),
                ));
            }
            if size == 1 {
                vec![lambda_max]
            } else {
                (0..size)
                    .map(|k| lambda_max * ratio.powf(k as f64 / (size - 1) as f64))
                    .collect()
            }
        }
        Lambdas::Given(l) => {
            if l.windows(2).any(|w| !(w[0] > w[1])) || l.iter().any(|&v| !(v > 0.0)) {
                return Err(Error::Parameterization(
                    "lambdas must be positive and strictly decreasing".into(),
                ));
            }
            l.to_vec()
        }
    };

    let null_deviance = solver.deviance(&state)?;
    let mut working: Vec<usize> = Vec::new();
    let mut path = LassoPath {
        family,
        lambdas: Vec::with_capacity(lambdas.len()),
        coefs: Vec::new(),
        standardized: Vec::new(),
        active_sets: Vec::new(),
        df: Vec::new(),
        gic: Vec::new(),
        lambda_gic: None,
        lambda_min: None,
        scaling,
        n,
        p,
    };
    for &lambda in &lambdas {
        // Near-separated data can make the tail of the grid unreachable;
        // keep the solved prefix as long as there is one.
        match solver.solve(lambda, &mut state, &mut working) {
            Err(Error::PathNonConvergence { .. }) if !path.lambdas.is_empty() => break,
            other => other?,
        }
        let active: Vec<usize> = (0..p).filter(|&j| state.beta[j] != 0.0).collect();
        let standardized = Coefficients {
            intercept: family.has_intercept().then_some(state.intercept),
            beta: state.beta.clone(),
        };
        path.coefs.push(to_original_scale(&standardized, &path.scaling));
        path.standardized.push(standardized);
        path.lambdas.push(lambda);
        path.df.push(active.len());
        let saturated = active.len() + 1 >= n
            || (null_deviance > 0.0 && 1.0 - solver.deviance(&state)? / null_deviance > SATURATION);
        path.active_sets.push(active);
        if saturated {
            break;
        }
    }
    Ok(path)
}

/// Maps standardized-scale coefficients back to the raw predictor scale.
pub(crate) fn to_original_scale(c: &Coefficients, s: &Standardization) -> Coefficients {
    let beta: Vec<f64> = c
        .beta
        .iter()
        .zip(&s.sds)
        .map(|(b, sd)| if *b == 0.0 { 0.0 } else { b / sd })
        .collect();
    let intercept = c.intercept.map(|b0| {
        b0 - beta
            .iter()
            .zip(&s.means)
            .map(|(b, m)| b * m)
            .sum::<f64>()
    });
    Coefficients { intercept, beta }
}

fn fill_gic(family: Family, data: &Dataset, path: &mut LassoPath) -> Result<()> {
    let mut cache: HashMap<Vec<usize>, f64> = HashMap::new();
    let mut gic_values = Vec::with_capacity(path.len());
    for active in &path.active_sets {
        let value = match cache.get(active) {
            Some(&v) => v,
            None => {
                let v = gic(family, data, active)?;
                cache.insert(active.clone(), v);
                v
            }
        };
        gic_values.push(value);
    }
    path.gic = gic_values;
    path.lambda_gic = Some(select_lambda_gic(path)?.lambda);
    Ok(())
}

/// GIC penalty constant `log(log n) · log p`.
pub fn gic_constant(n: usize, p: usize) -> Result<f64> {
    let nf = n as f64;
    if nf <= std::f64::consts::E {
        return Err(Error::Parameterization(format!(
            "GIC needs n > e so that log(log n) > 0 (n = {n})"
        )));
    }
    Ok(nf.ln().ln() * (p.max(1) as f64).ln())
}

/// Generalized information criterion of an active set: twice `n` times the
/// loss of the unpenalized refit on `active`, plus `log(log n)·log p` per
/// active variable. Active sets whose refit is not well posed (too many
/// columns, rank deficiency, divergence) score `+∞`.
pub fn gic(family: Family, data: &Dataset, active: &[usize]) -> Result<f64> {
    let a_n = gic_constant(data.n(), data.p())?;
    data.ensure_family(family)?;
    let loss = match fit_mle(family, data, active, &FitOptions::default()) {
        Ok(fit) if fit.converged && fit.coef.is_finite() => fit.final_loss,
        Ok(_) => return Ok(f64::INFINITY),
        Err(Error::RankDeficient { .. } | Error::InvalidSubset(_)) => return Ok(f64::INFINITY),
        Err(e) => return Err(e),
    };
    Ok(2.0 * data.n() as f64 * loss + a_n * active.len() as f64)
}

/// λ minimizing GIC (the smallest λ wins ties) and its active set.
/// Active sets larger than `n - 2` keep the `n - 2` largest standardized
/// coefficients.
pub fn select_lambda_gic(path: &LassoPath) -> Result<GicSelection> {
    if path.is_empty() || path.gic.len() != path.len() {
        return Err(Error::Parameterization(
            "path has no GIC values to select from".into(),
        ));
    }
    let mut best = 0;
    for (i, &g) in path.gic.iter().enumerate() {
        if g <= path.gic[best] {
            best = i;
        }
    }
    let mut candidates = path.active_sets[best].clone();
    let cap = path.n.saturating_sub(2);
    let truncated = candidates.len() > cap;
    if truncated {
        let beta = &path.standardized[best].beta;
        candidates.sort_by(|&a, &b| beta[b].abs().total_cmp(&beta[a].abs()).then(a.cmp(&b)));
        candidates.truncate(cap);
        candidates.sort_unstable();
    }
    Ok(GicSelection {
        lambda: path.lambdas[best],
        index: best,
        candidates,
        truncated,
    })
}

fn fold_assignment(n: usize, folds: usize, rng: &mut ChaCha8Rng) -> Vec<usize> {
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(rng);
    let mut fold = vec![0; n];
    for (pos, &i) in order.iter().enumerate() {
        fold[i] = pos % folds;
    }
    fold
}

fn fold_datasets(data: &Dataset, assignment: &[usize], folds: usize) -> Option<Vec<(Dataset, Vec<usize>)>> {
    let n = data.n();
    let mut out = Vec::with_capacity(folds);
    for k in 0..folds {
        let train: Vec<usize> = (0..n).filter(|&i| assignment[i] != k).collect();
        let test: Vec<usize> = (0..n).filter(|&i| assignment[i] == k).collect();
        let train_data = data.select_rows(&train).ok()?;
        check_response(data.family(), &train_data).ok()?;
        out.push((train_data, test));
    }
    Some(out)
}

/// λ minimizing K-fold cross-validated deviance over the penalties of
/// `path`; stores it in `path.lambda_min`. Cox models use the
/// Verweij–van Houwelingen partial-likelihood difference. A split leaving a
/// training fold degenerate is redrawn once.
pub fn select_lambda_cv(
    family: Family,
    data: &Dataset,
    path: &mut LassoPath,
    folds: usize,
    seed: u64,
) -> Result<CvCurve> {
    let n = data.n();
    if folds < 2 || folds > n {
        return Err(Error::Parameterization(format!(
            "need 2 <= folds <= n, got {folds} folds for n = {n}"
        )));
    }
    if path.is_empty() {
        return Err(Error::Parameterization("empty path".into()));
    }
    data.ensure_family(family)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let splits = fold_datasets(data, &fold_assignment(n, folds, &mut rng), folds)
        .or_else(|| fold_datasets(data, &fold_assignment(n, folds, &mut rng), folds))
        .ok_or_else(|| {
            Error::DegenerateResponse("cross-validation fold has a degenerate response".into())
        })?;

    let m = path.len();
    let mut deviance = vec![0.0; m];
    for (train, test) in &splits {
        let fold_path = solve_path_at(family, train, &path.lambdas)?;
        for (i, dev) in deviance.iter_mut().enumerate() {
            let coef = &fold_path.coefs[i.min(fold_path.len() - 1)];
            *dev += held_out_deviance(family, data, train, test, coef)?;
        }
    }
    for d in &mut deviance {
        *d /= n as f64;
    }
    let mut index_min = 0;
    for (i, &d) in deviance.iter().enumerate() {
        if d < deviance[index_min] {
            index_min = i;
        }
    }
    let lambda_min = path.lambdas[index_min];
    path.lambda_min = Some(lambda_min);
    Ok(CvCurve {
        lambdas: path.lambdas.clone(),
        deviance,
        index_min,
        lambda_min,
    })
}

fn held_out_deviance(
    family: Family,
    full: &Dataset,
    train: &Dataset,
    test: &[usize],
    coef: &Coefficients,
) -> Result<f64> {
    match full.y() {
        Response::Binary(y) | Response::Count(y) => {
            let b0 = coef.intercept.unwrap_or(0.0);
            let x = full.x();
            let mut total = 0.0;
            for &i in test {
                let mut eta = b0;
                for (j, &b) in coef.beta.iter().enumerate() {
                    if b != 0.0 {
                        eta += b * x[(i, j)];
                    }
                }
                total += 2.0 * (family.cumulant(eta) - y[i] * eta);
            }
            if !total.is_finite() {
                return Err(Error::EvaluationOverflow(family.name()));
            }
            Ok(total)
        }
        Response::Survival { .. } => {
            let full_ll = -(full.n() as f64) * model::loss(family, full, coef)?;
            let train_ll = -(train.n() as f64) * model::loss(family, train, coef)?;
            Ok(-2.0 * (full_ll - train_ll))
        }
    }
}

/// Current iterate on the standardized scale.
#[derive(Debug, Clone)]
struct State {
    intercept: f64,
    beta: Vec<f64>,
}

struct Solver<'a> {
    family: Family,
    x: &'a DMatrix<f64>,
    full: Problem<'a>,
    saturated_loss: f64,
}

impl<'a> Solver<'a> {
    fn new(family: Family, x: &'a DMatrix<f64>, y: &'a Response) -> Self {
        // the η-derivatives only depend on the response; an empty design
        // keeps the risk sets without copying x
        let full = Problem::from_design(family, DMatrix::zeros(x.nrows(), 0), y);
        let saturated_loss = match y {
            Response::Count(v) => {
                v.iter()
                    .map(|&c| if c > 0.0 { c - c * c.ln() } else { 0.0 })
                    .sum::<f64>()
                    / v.len() as f64
            }
            _ => 0.0,
        };
        Self {
            family,
            x,
            full,
            saturated_loss,
        }
    }

    fn null_state(&self) -> State {
        let intercept = match self.full.y.values() {
            Some(v) if self.family.has_intercept() => {
                self.family.link(v.iter().sum::<f64>() / v.len() as f64)
            }
            _ => 0.0,
        };
        State {
            intercept,
            beta: vec![0.0; self.x.ncols()],
        }
    }

    fn eta(&self, s: &State) -> DVector<f64> {
        let mut eta = DVector::from_element(self.x.nrows(), s.intercept);
        for (j, &b) in s.beta.iter().enumerate() {
            if b != 0.0 {
                eta.axpy(b, &self.x.column(j), 1.0);
            }
        }
        eta
    }

    /// Gradient of the loss with respect to every (standardized) predictor.
    fn full_gradient(&self, s: &State) -> Result<DVector<f64>> {
        let d = self.full.eta_derivatives(&self.eta(s))?;
        Ok(self.x.tr_mul(&d.score))
    }

    fn deviance(&self, s: &State) -> Result<f64> {
        let loss = self.full.eta_loss(&self.eta(s))?;
        Ok(2.0 * self.x.nrows() as f64 * (loss - self.saturated_loss))
    }

    fn solve(&self, lambda: f64, state: &mut State, working: &mut Vec<usize>) -> Result<()> {
        for _ in 0..=self.x.ncols() {
            self.solve_working_set(lambda, state, working)?;
            let g = self.full_gradient(state)?;
            let mut added = false;
            for j in 0..self.x.ncols() {
                if g[j].abs() > lambda && !working.contains(&j) {
                    working.push(j);
                    added = true;
                }
            }
            if !added {
                return Ok(());
            }
            working.sort_unstable();
        }
        Err(Error::PathNonConvergence { lambda })
    }

    fn solve_working_set(&self, lambda: f64, state: &mut State, working: &[usize]) -> Result<()> {
        let offset = usize::from(self.family.has_intercept());
        let problem = self
            .full
            .with_design(design(self.x, working, self.family.has_intercept()));
        let q = problem.dim();
        if q == 0 {
            return Ok(());
        }
        let mut theta = DVector::zeros(q);
        if offset == 1 {
            theta[0] = state.intercept;
        }
        for (k, &j) in working.iter().enumerate() {
            theta[k + offset] = state.beta[j];
        }
        let l1 = |t: &DVector<f64>| t.iter().skip(offset).map(|v| v.abs()).sum::<f64>();

        let mut sweeps = 0;
        let mut converged = false;
        for _ in 0..MAX_NEWTON {
            let ev = problem.evaluate(&theta, true)?;
            let h = ev.hessian.expect("hessian requested");
            let (d, used) = quadratic_cd(&ev.gradient, &h, &theta, lambda, offset);
            sweeps += used;
            let objective = ev.loss + lambda * l1(&theta);
            let moved = &theta + &d;
            let decrease = ev.gradient.dot(&d) + lambda * (l1(&moved) - l1(&theta));
            if amax(&d) < CD_TOL || decrease >= 0.0 {
                converged = true;
                break;
            }
            let mut t = 1.0;
            let mut accepted = false;
            for _ in 0..MAX_LINE_SEARCH {
                let candidate = &theta + &d * t;
                if let Ok(l) = problem.loss(&candidate) {
                    if l + lambda * l1(&candidate) <= objective + 1e-4 * t * decrease {
                        theta = candidate;
                        accepted = true;
                        break;
                    }
                }
                t *= 0.5;
            }
            if !accepted {
                // no further decrease representable: at the optimum
                converged = true;
                break;
            }
            if amax(&d) * t < CD_TOL {
                converged = true;
                break;
            }
            if sweeps > MAX_SWEEPS * 10 {
                break;
            }
        }
        if !converged {
            return Err(Error::PathNonConvergence { lambda });
        }
        if offset == 1 {
            state.intercept = theta[0];
        }
        for (k, &j) in working.iter().enumerate() {
            state.beta[j] = theta[k + offset];
        }
        Ok(())
    }
}

fn design(x: &DMatrix<f64>, cols: &[usize], intercept: bool) -> DMatrix<f64> {
    let offset = usize::from(intercept);
    let mut z = DMatrix::zeros(x.nrows(), cols.len() + offset);
    if intercept {
        z.column_mut(0).fill(1.0);
    }
    for (k, &j) in cols.iter().enumerate() {
        z.column_mut(k + offset).copy_from(&x.column(j));
    }
    z
}

fn soft_threshold(v: f64, t: f64) -> f64 {
    if v > t {
        v - t
    } else if v < -t {
        v + t
    } else {
        0.0
    }
}

/// Minimizes `gᵀd + ½ dᵀHd + λ Σ_{k ≥ offset} |θ_k + d_k|` by cyclic
/// coordinate descent. Returns the step and the number of sweeps used.
fn quadratic_cd(
    g: &DVector<f64>,
    h: &DMatrix<f64>,
    theta: &DVector<f64>,
    lambda: f64,
    offset: usize,
) -> (DVector<f64>, usize) {
    let q = g.len();
    let mut d = DVector::<f64>::zeros(q);
    let mut hd = DVector::<f64>::zeros(q);
    let mut sweeps = 0;
    while sweeps < MAX_SWEEPS {
        sweeps += 1;
        let mut max_change: f64 = 0.0;
        for k in 0..q {
            let hkk = h[(k, k)];
            if !(hkk > 0.0) {
                continue;
            }
            let c = g[k] + hd[k] - hkk * d[k];
            let new = if k < offset {
                -c / hkk
            } else {
                soft_threshold(hkk * theta[k] - c, lambda) / hkk - theta[k]
            };
            let delta = new - d[k];
            if delta != 0.0 {
                d[k] = new;
                hd.axpy(delta, &h.column(k), 1.0);
                max_change = max_change.max(delta.abs());
            }
        }
        if max_change < INNER_TOL {
            break;
        }
    }
    (d, sweeps)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn toy_logistic() -> Dataset {
        let n = 40;
        let mut x = DMatrix::zeros(n, 3);
        let mut y = Vec::new();
        for i in 0..n {
            let a = ((i * 7 % 13) as f64 - 6.0) / 3.0;
            let b = ((i * 5 % 11) as f64 - 5.0) / 2.0;
            let c = ((i * 3 % 7) as f64 - 3.0) / 1.5;
            x[(i, 0)] = a;
            x[(i, 1)] = b;
            x[(i, 2)] = c;
            y.push(if a + 0.3 * c + ((i % 3) as f64 - 1.0) > 0.0 { 1.0 } else { 0.0 });
        }
        Dataset::unnamed(x, Response::Binary(y)).unwrap()
    }

    #[test]
    fn lambda_max_gives_empty_active_set() {
        let data = toy_logistic();
        let path = solve_path(Family::Logistic, &data, 20, 1e-3).unwrap();
        assert!(path.active_sets[0].is_empty());
        assert!(path.coefs[0].beta.iter().all(|&b| b == 0.0));
        assert!(path.lambdas.windows(2).all(|w| w[0] > w[1]));
        for (c, a) in path.coefs.iter().zip(&path.active_sets) {
            assert_eq!(&c.support(), a);
        }
    }

    #[test]
    fn gic_at_df_zero_is_null_deviance() {
        let data = toy_logistic();
        let y = data.y().values().unwrap();
        let k = y.iter().sum::<f64>();
        let n = y.len() as f64;
        let null_loss = -(k * (k / n).ln() + (n - k) * (1.0 - k / n).ln()) / n;
        let g = gic(Family::Logistic, &data, &[]).unwrap();
        assert!((g - 2.0 * n * null_loss).abs() < 1e-9);
    }

    #[test]
    fn gic_needs_n_above_e() {
        assert!(gic_constant(2, 5).is_err());
        assert!(gic_constant(3, 5).unwrap() > 0.0);
    }

    #[test]
    fn single_lambda_grid() {
        let data = toy_logistic();
        let path = solve_path(Family::Logistic, &data, 1, 1e-3).unwrap();
        assert_eq!(path.len(), 1);
        let sel = select_lambda_gic(&path).unwrap();
        assert_eq!(sel.lambda, path.lambdas[0]);
        assert!(sel.candidates.is_empty());
    }

    #[test]
    fn increasing_gic_selects_lambda_max() {
        let data = toy_logistic();
        let mut path = solve_path(Family::Logistic, &data, 10, 1e-2).unwrap();
        path.gic = (0..path.len()).map(|i| i as f64).collect();
        let sel = select_lambda_gic(&path).unwrap();
        assert_eq!(sel.index, 0);
        assert!(sel.candidates.is_empty());
    }

    #[test]
    fn ties_pick_smallest_lambda_and_cap_truncates() {
        let data = toy_logistic();
        let mut path = solve_path(Family::Logistic, &data, 10, 1e-2).unwrap();
        let last = path.len() - 1;
        path.gic = vec![1.0; path.len()];
        assert_eq!(select_lambda_gic(&path).unwrap().index, last);
        path.n = 4;
        let sel = select_lambda_gic(&path).unwrap();
        assert!(sel.candidates.len() <= 2);
        assert_eq!(sel.truncated, path.active_sets[last].len() > 2);
    }

    #[test]
    fn constant_response_is_degenerate() {
        let x = DMatrix::from_column_slice(4, 1, &[1.0, 2.0, 3.0, 4.0]);
        let data = Dataset::unnamed(x, Response::Binary(vec![1.0; 4])).unwrap();
        assert!(matches!(
            solve_path(Family::Logistic, &data, 10, 1e-2),
            Err(Error::DegenerateResponse(_))
        ));
    }

    #[test]
    fn soft_threshold_cases() {
        assert_eq!(soft_threshold(3.0, 1.0), 2.0);
        assert_eq!(soft_threshold(-3.0, 1.0), -2.0);
        assert_eq!(soft_threshold(0.5, 1.0), 0.0);
    }
}
