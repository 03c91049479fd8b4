//! Replication engine and aggregation.

use std::time::Instant;

use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use super::dgp::{draw_dataset, make_true_beta};
use super::metrics::{compute_metrics, MetricsRecord, Truth};
use super::{Method, Scenario};
use crate::error::{Error, Result};
use crate::fitting::Z95;
use crate::lasso::{
    default_lambda_ratio, select_lambda_cv, solve_path_without_gic, DEFAULT_FOLDS,
    DEFAULT_GRID_SIZE,
};
use crate::model::{Coefficients, Dataset, Family};
use crate::sgpv::{prosgpv, stage_one, stage_two_fit, NullBound, SelectionConfig};

/// One method on one replication.
#[derive(Debug, Clone, PartialEq)]
pub struct ReplicationRecord {
    pub scenario: String,
    pub method: Method,
    pub replication: usize,
    pub seed: u64,
    /// Error message when the method (or data generation) failed.
    pub outcome: std::result::Result<MetricsRecord, String>,
}

/// Summary of one (scenario, method) cell.
#[derive(Debug, Clone, PartialEq)]
pub struct AggregateRow {
    pub scenario: String,
    pub method: Method,
    pub completed: usize,
    pub failures: usize,
    pub capture_rate: f64,
    /// 95% Wald interval, truncated to [0, 1].
    pub capture_ci: (f64, f64),
    pub power: f64,
    pub type1: f64,
    pub pfdr: f64,
    pub pfndr: f64,
    /// Quartiles (q1, median, q3).
    pub mae: [f64; 3],
    /// Quartiles of the prediction score; RMSE values are capped at their
    /// 99th percentile first. `None` without scores.
    pub score: Option<[f64; 3]>,
    pub score_mean: Option<f64>,
    pub runtime_median: f64,
}

#[derive(Debug, Clone)]
pub struct GridResults {
    pub records: Vec<ReplicationRecord>,
    pub aggregates: Vec<AggregateRow>,
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Seed of replication `rep` under base seed `seed`; independent of
/// scheduling.
pub fn replication_seed(seed: u64, rep: usize) -> u64 {
    splitmix64(splitmix64(seed) ^ rep as u64)
}

fn true_beta(scenario: &Scenario, rng: &mut ChaCha8Rng) -> Result<Vec<f64>> {
    match &scenario.fixed_beta {
        Some(beta) => Ok(beta.clone()),
        None => make_true_beta(scenario.p, scenario.s, scenario.beta_l, scenario.beta_u, rng),
    }
}

struct Replicate {
    truth: Truth,
    train: Dataset,
    test: Option<Dataset>,
    cv_seed: u64,
}

fn draw_replicate(scenario: &Scenario, seed: u64) -> Result<Replicate> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let beta = true_beta(scenario, &mut rng)?;
    let draw = |rng: &mut ChaCha8Rng| {
        draw_dataset(
            scenario.family,
            scenario.n,
            &beta,
            scenario.rho,
            scenario.sigma,
            &scenario.survival,
            rng,
        )
    };
    let train = draw(&mut rng)?;
    let test = match scenario.family {
        Family::Cox => None,
        _ => Some(draw(&mut rng)?),
    };
    let cv_seed = rng.next_u64();
    Ok(Replicate {
        truth: Truth::new(beta),
        train,
        test,
        cv_seed,
    })
}

/// Selected set and coefficients from one method.
fn apply_method(method: Method, family: Family, rep: &Replicate) -> Result<(Vec<usize>, Coefficients)> {
    let data = &rep.train;
    let config = |bound, jeffreys| SelectionConfig {
        bound,
        jeffreys,
        ..SelectionConfig::default()
    };
    let run = |c: SelectionConfig| prosgpv(family, data, &c).map(|r| (r.final_set, r.coef));
    match method {
        Method::ProSgpv => run(config(NullBound::Constant, false)),
        Method::ProSgpvGvif => run(config(NullBound::Gvif, false)),
        Method::ProSgpvJeffreys => run(config(NullBound::Constant, true)),
        Method::LassoMin => {
            let ratio = default_lambda_ratio(data.n(), data.p());
            let mut path = solve_path_without_gic(family, data, DEFAULT_GRID_SIZE, ratio)?;
            let folds = DEFAULT_FOLDS.min(data.n());
            let cv = select_lambda_cv(family, data, &mut path, folds, rep.cv_seed)?;
            Ok((
                path.active_sets[cv.index_min].clone(),
                path.coefs[cv.index_min].clone(),
            ))
        }
        Method::Oracle => Ok((rep.truth.support.clone(), rep.truth.coefficients(family))),
    }
}

/// All methods on replication `rep` of `scenario`.
pub fn run_replication(scenario: &Scenario, rep: usize, methods: &[Method]) -> Vec<ReplicationRecord> {
    let seed = replication_seed(scenario.seed, rep);
    let record = |method, outcome| ReplicationRecord {
        scenario: scenario.id.clone(),
        method,
        replication: rep,
        seed,
        outcome,
    };
    let replicate = match draw_replicate(scenario, seed) {
        Ok(r) => r,
        Err(e) => {
            let msg = format!("data generation: {e}");
            return methods.iter().map(|&m| record(m, Err(msg.clone()))).collect();
        }
    };
    methods
        .iter()
        .map(|&method| {
            let start = Instant::now();
            let outcome = apply_method(method, scenario.family, &replicate)
                .map(|(selected, coef)| {
                    let mut m = compute_metrics(
                        &replicate.truth,
                        &selected,
                        &coef,
                        replicate.test.as_ref(),
                    );
                    m.runtime = start.elapsed().as_secs_f64();
                    m
                })
                .map_err(|e| e.to_string());
            record(method, outcome)
        })
        .collect()
}

fn thread_pool(threads: usize) -> Result<rayon::ThreadPool> {
    rayon::ThreadPoolBuilder::new()
        .num_threads(threads.max(1))
        .build()
        .map_err(|e| Error::Config(format!("thread pool: {e}")))
}

/// Runs every replication of every scenario with `threads` workers.
/// Records come back in (scenario, replication, method) order, so the
/// output does not depend on the worker count.
pub fn run_grid(scenarios: &[Scenario], methods: &[Method], threads: usize) -> Result<GridResults> {
    for sc in scenarios {
        sc.validate()?;
    }
    let jobs: Vec<(usize, usize)> = scenarios
        .iter()
        .enumerate()
        .flat_map(|(i, sc)| (0..sc.replications).map(move |r| (i, r)))
        .collect();
    let pool = thread_pool(threads)?;
    let chunks: Vec<Vec<ReplicationRecord>> = pool.install(|| {
        jobs.par_iter()
            .map(|&(i, r)| run_replication(&scenarios[i], r, methods))
            .collect()
    });
    let records: Vec<ReplicationRecord> = chunks.into_iter().flatten().collect();
    let aggregates = aggregate(scenarios, methods, &records);
    Ok(GridResults { records, aggregates })
}

/// Linear-interpolation quantile of sorted data.
fn quantile(sorted: &[f64], q: f64) -> f64 {
    if sorted.is_empty() {
        return f64::NAN;
    }
    let h = (sorted.len() - 1) as f64 * q;
    let lo = h.floor() as usize;
    let hi = h.ceil() as usize;
    sorted[lo] + (h - lo as f64) * (sorted[hi] - sorted[lo])
}

fn quartiles(values: &[f64]) -> [f64; 3] {
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    [quantile(&v, 0.25), quantile(&v, 0.5), quantile(&v, 0.75)]
}

fn mean(values: impl Iterator<Item = f64>) -> f64 {
    let (sum, count) = values.fold((0.0, 0usize), |(s, c), v| (s + v, c + 1));
    if count == 0 {
        f64::NAN
    } else {
        sum / count as f64
    }
}

/// Capture proportion with its truncated Wald interval.
pub(crate) fn wald(successes: usize, total: usize) -> (f64, (f64, f64)) {
    if total == 0 {
        return (f64::NAN, (f64::NAN, f64::NAN));
    }
    let rate = successes as f64 / total as f64;
    let half = Z95 * (rate * (1.0 - rate) / total as f64).sqrt();
    (rate, ((rate - half).max(0.0), (rate + half).min(1.0)))
}

/// Per-(scenario, method) summaries, in scenario-then-method order.
pub fn aggregate(
    scenarios: &[Scenario],
    methods: &[Method],
    records: &[ReplicationRecord],
) -> Vec<AggregateRow> {
    let mut rows = Vec::with_capacity(scenarios.len() * methods.len());
    for sc in scenarios {
        for &method in methods {
            let cell: Vec<&ReplicationRecord> = records
                .iter()
                .filter(|r| r.scenario == sc.id && r.method == method)
                .collect();
            let ok: Vec<&MetricsRecord> = cell.iter().filter_map(|r| r.outcome.as_ref().ok()).collect();
            let captured = ok.iter().filter(|m| m.exact_capture).count();
            let (capture_rate, capture_ci) = wald(captured, ok.len());
            let mae: Vec<f64> = ok.iter().map(|m| m.mae).collect();
            let mut scores: Vec<f64> = ok.iter().filter_map(|m| m.score).collect();
            let score_mean = (!scores.is_empty()).then(|| mean(scores.iter().copied()));
            if sc.family == Family::Poisson && !scores.is_empty() {
                let mut sorted = scores.clone();
                sorted.sort_by(f64::total_cmp);
                let cap = quantile(&sorted, 0.99);
                scores.iter_mut().for_each(|v| *v = v.min(cap));
            }
            let runtimes: Vec<f64> = ok.iter().map(|m| m.runtime).collect();
            rows.push(AggregateRow {
                scenario: sc.id.clone(),
                method,
                completed: ok.len(),
                failures: cell.len() - ok.len(),
                capture_rate,
                capture_ci,
                power: mean(ok.iter().map(|m| m.power)),
                type1: mean(ok.iter().map(|m| m.type1)),
                pfdr: mean(ok.iter().map(|m| m.pfdr)),
                pfndr: mean(ok.iter().map(|m| m.pfndr)),
                mae: quartiles(&mae),
                score: (!scores.is_empty()).then(|| quartiles(&scores)),
                score_mean,
                runtime_median: quartiles(&runtimes)[1],
            });
        }
    }
    rows
}

/// Alternative null half-widths, written in terms of the mean SE.
#[derive(Debug, Clone, Copy)]
enum AltBound {
    MeanSe,
    InflatedLog,
    DeflatedLog,
    SqrtRatio,
    Zero,
}

impl AltBound {
    const ALL: [AltBound; 5] = [
        AltBound::MeanSe,
        AltBound::InflatedLog,
        AltBound::DeflatedLog,
        AltBound::SqrtRatio,
        AltBound::Zero,
    ];

    fn name(self) -> &'static str {
        match self {
            AltBound::MeanSe => "se",
            AltBound::InflatedLog => "se*sqrt(log(n/p))",
            AltBound::DeflatedLog => "se/sqrt(log(n/p))",
            AltBound::SqrtRatio => "se*sqrt(n/p)/2",
            AltBound::Zero => "zero",
        }
    }

    fn delta(self, mean_se: f64, n: usize, p: usize) -> f64 {
        let ratio = n as f64 / p as f64;
        match self {
            AltBound::MeanSe => mean_se,
            AltBound::InflatedLog => mean_se * ratio.ln().sqrt(),
            AltBound::DeflatedLog => mean_se / ratio.ln().sqrt(),
            AltBound::SqrtRatio => mean_se * ratio.sqrt() / 2.0,
            AltBound::Zero => 0.0,
        }
    }
}

/// One row of the null-bound comparison.
#[derive(Debug, Clone, PartialEq)]
pub struct BoundComparisonRow {
    pub scenario: String,
    pub bound: &'static str,
    pub completed: usize,
    pub failures: usize,
    pub capture_rate: f64,
    pub capture_ci: (f64, f64),
    pub power: f64,
    pub type1: f64,
}

/// Stage-two screening under five alternative null bounds, using the
/// equivalent cutoff rule `|β̂_k| > 1.96·SE_k + δ`. Meaningful for
/// `n > p`; the log-ratio bounds are undefined otherwise.
fn bound_selections(family: Family, data: &Dataset) -> Result<Vec<Vec<usize>>> {
    let config = SelectionConfig::default();
    let (_, selection) = stage_one(family, data, &config)?;
    let candidates = selection.candidates;
    if candidates.is_empty() {
        return Ok(vec![Vec::new(); AltBound::ALL.len()]);
    }
    let fit = stage_two_fit(family, &data.standardize(), &candidates, &config)?;
    let ses: Vec<f64> = candidates.iter().map(|&k| fit.se(k).unwrap_or(f64::NAN)).collect();
    let mean_se = ses.iter().sum::<f64>() / ses.len() as f64;
    Ok(AltBound::ALL
        .iter()
        .map(|b| {
            let delta = b.delta(mean_se, data.n(), data.p());
            candidates
                .iter()
                .zip(&ses)
                .filter(|&(&k, se)| {
                    let est = fit.estimate(k).map_or(0.0, |e| e.estimate);
                    est.abs() > Z95 * se + delta
                })
                .map(|(&k, _)| k)
                .collect()
        })
        .collect())
}

/// Support recovery of ProSGPV under alternative null bounds.
pub fn bound_comparison(scenarios: &[Scenario], threads: usize) -> Result<Vec<BoundComparisonRow>> {
    for sc in scenarios {
        sc.validate()?;
    }
    let jobs: Vec<(usize, usize)> = scenarios
        .iter()
        .enumerate()
        .flat_map(|(i, sc)| (0..sc.replications).map(move |r| (i, r)))
        .collect();
    let pool = thread_pool(threads)?;
    type Outcome = (usize, Option<(Truth, Vec<Vec<usize>>)>);
    let outcomes: Vec<Outcome> = pool.install(|| {
        jobs.par_iter()
            .map(|&(i, r)| {
                let sc = &scenarios[i];
                let seed = replication_seed(sc.seed, r);
                let result = draw_replicate(sc, seed)
                    .and_then(|rep| Ok((bound_selections(sc.family, &rep.train)?, rep.truth)));
                (i, result.ok().map(|(sel, truth)| (truth, sel)))
            })
            .collect()
    });
    let mut rows = Vec::new();
    for (i, sc) in scenarios.iter().enumerate() {
        let cell: Vec<&Outcome> = outcomes.iter().filter(|o| o.0 == i).collect();
        let ok: Vec<&(Truth, Vec<Vec<usize>>)> = cell.iter().filter_map(|o| o.1.as_ref()).collect();
        for (b, bound) in AltBound::ALL.iter().enumerate() {
            let metrics: Vec<MetricsRecord> = ok
                .iter()
                .map(|(truth, sel)| {
                    compute_metrics(truth, &sel[b], &Coefficients::zeros(sc.family, sc.p), None)
                })
                .collect();
            let captured = metrics.iter().filter(|m| m.exact_capture).count();
            let (capture_rate, capture_ci) = wald(captured, metrics.len());
            rows.push(BoundComparisonRow {
                scenario: sc.id.clone(),
                bound: bound.name(),
                completed: ok.len(),
                failures: cell.len() - ok.len(),
                capture_rate,
                capture_ci,
                power: mean(metrics.iter().map(|m| m.power)),
                type1: mean(metrics.iter().map(|m| m.type1)),
            });
        }
    }
    Ok(rows)
}
