//! Repeated train/test splits of the vertebral-column data.

use std::collections::BTreeMap;
use std::path::Path;

use rand::seq::SliceRandom;
use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::io::{fmt_full, load_csv, CsvSchema, ResponseSpec};
use crate::lasso::{default_lambda_ratio, select_lambda_cv, solve_path_without_gic, DEFAULT_FOLDS, DEFAULT_GRID_SIZE};
use crate::model::{Dataset, Family, Response};
use crate::sgpv::{prosgpv, SelectionConfig};
use crate::simulation::{auc, replication_seed, Method};

/// Default location of the vendored data file.
pub const DEFAULT_PATH: &str = concat!(env!("CARGO_MANIFEST_DIR"), "/data/spine.csv");
pub const DEFAULT_SPLITS: usize = 1000;
pub const TRAIN_FRACTION: f64 = 0.7;
/// Name of the class column in the vendored file.
pub const CLASS_COLUMN: &str = "class";

const EXPECTED_ROWS: usize = 310;
const EXPECTED_PREDICTORS: usize = 12;
const EXPECTED_LEVEL_COUNTS: [usize; 2] = [100, 210];

/// Loads the vendored file and checks its shape: 310 patients, 12
/// attributes, 100/210 class split.
pub fn load_spine(path: impl AsRef<Path>) -> Result<Dataset> {
    let path = path.as_ref();
    if !path.exists() {
        return Err(Error::Config(format!(
            "spine data not found at `{}`; place the 310-row vertebral-column CSV \
             (12 attributes plus a `{CLASS_COLUMN}` column) there or pass --input",
            path.display()
        )));
    }
    let data = load_csv(
        path,
        &CsvSchema {
            family: Family::Logistic,
            response: ResponseSpec::Column(CLASS_COLUMN.into()),
            predictors: None,
        },
    )?;
    let y = data.y().values().expect("binary response");
    let ones = y.iter().filter(|&&v| v == 1.0).count();
    let mut counts = [ones, y.len() - ones];
    counts.sort_unstable();
    if data.n() != EXPECTED_ROWS || data.p() != EXPECTED_PREDICTORS || counts != EXPECTED_LEVEL_COUNTS {
        return Err(Error::InvalidData(format!(
            "`{}` has n = {}, p = {}, class counts {:?}; expected n = {EXPECTED_ROWS}, \
             p = {EXPECTED_PREDICTORS}, counts {EXPECTED_LEVEL_COUNTS:?}",
            path.display(),
            data.n(),
            data.p(),
            counts
        )));
    }
    Ok(data)
}

/// One method on one split.
#[derive(Debug, Clone, PartialEq)]
pub struct SplitRecord {
    pub split: usize,
    pub method: Method,
    pub seed: u64,
    pub outcome: std::result::Result<SplitOutcome, String>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SplitOutcome {
    /// Selected predictor indices, ascending.
    pub selected: Vec<usize>,
    /// Test AUC; `None` when the test set holds one class only.
    pub auc: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MethodSummary {
    pub method: Method,
    pub completed: usize,
    pub failures: usize,
    pub median_size: f64,
    pub mean_auc: f64,
    pub median_auc: f64,
    /// Most frequent selected set (ties go to the first seen) and its count.
    pub top_model: Vec<usize>,
    pub top_count: usize,
}

#[derive(Debug, Clone)]
pub struct SpineStudyResult {
    pub names: Vec<String>,
    pub records: Vec<SplitRecord>,
    pub summaries: Vec<MethodSummary>,
}

pub const METHODS: [Method; 2] = [Method::ProSgpv, Method::LassoMin];

fn run_method(method: Method, train: &Dataset, cv_seed: u64) -> Result<(Vec<usize>, crate::model::Coefficients)> {
    match method {
        Method::LassoMin => {
            let ratio = default_lambda_ratio(train.n(), train.p());
            let mut path = solve_path_without_gic(Family::Logistic, train, DEFAULT_GRID_SIZE, ratio)?;
            let cv = select_lambda_cv(Family::Logistic, train, &mut path, DEFAULT_FOLDS, cv_seed)?;
            Ok((path.active_sets[cv.index_min].clone(), path.coefs[cv.index_min].clone()))
        }
        _ => {
            let r = prosgpv(Family::Logistic, train, &SelectionConfig::default())?;
            Ok((r.final_set, r.coef))
        }
    }
}

fn run_split(data: &Dataset, split: usize, seed: u64) -> Vec<SplitRecord> {
    let seed = replication_seed(seed, split);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut rows: Vec<usize> = (0..data.n()).collect();
    rows.shuffle(&mut rng);
    let n_train = (TRAIN_FRACTION * data.n() as f64).round() as usize;
    let (train_rows, test_rows) = rows.split_at(n_train);
    let cv_seed = rng.next_u64();
    let split_data = data
        .select_rows(train_rows)
        .and_then(|tr| Ok((tr, data.select_rows(test_rows)?)));
    METHODS
        .iter()
        .map(|&method| {
            let outcome = split_data
                .as_ref()
                .map_err(|e| e.to_string())
                .and_then(|(train, test)| {
                    let (selected, coef) = run_method(method, train, cv_seed).map_err(|e| e.to_string())?;
                    let eta = coef.linear_predictor(test.x());
                    let auc = match test.y() {
                        Response::Binary(y) => auc(eta.as_slice(), y),
                        _ => None,
                    };
                    Ok(SplitOutcome { selected, auc })
                });
            SplitRecord {
                split,
                method,
                seed,
                outcome,
            }
        })
        .collect()
}

fn median(values: &mut [f64]) -> f64 {
    if values.is_empty() {
        return f64::NAN;
    }
    values.sort_by(f64::total_cmp);
    let m = values.len() / 2;
    if values.len() % 2 == 1 {
        values[m]
    } else {
        (values[m - 1] + values[m]) / 2.0
    }
}

fn summarize(method: Method, records: &[SplitRecord]) -> MethodSummary {
    let mine: Vec<&SplitRecord> = records.iter().filter(|r| r.method == method).collect();
    let ok: Vec<&SplitOutcome> = mine.iter().filter_map(|r| r.outcome.as_ref().ok()).collect();
    let mut sizes: Vec<f64> = ok.iter().map(|o| o.selected.len() as f64).collect();
    let mut aucs: Vec<f64> = ok.iter().filter_map(|o| o.auc).collect();
    let mean_auc = if aucs.is_empty() {
        f64::NAN
    } else {
        aucs.iter().sum::<f64>() / aucs.len() as f64
    };
    let mut counts: BTreeMap<&[usize], (usize, usize)> = BTreeMap::new();
    for (order, o) in ok.iter().enumerate() {
        counts.entry(o.selected.as_slice()).or_insert((0, order)).0 += 1;
    }
    let top = counts
        .iter()
        .max_by(|a, b| a.1 .0.cmp(&b.1 .0).then(b.1 .1.cmp(&a.1 .1)))
        .map(|(set, (count, _))| (set.to_vec(), *count))
        .unwrap_or_default();
    MethodSummary {
        method,
        completed: ok.len(),
        failures: mine.len() - ok.len(),
        median_size: median(&mut sizes),
        mean_auc,
        median_auc: median(&mut aucs),
        top_model: top.0,
        top_count: top.1,
    }
}

/// Repeats a seeded 70/30 split `splits` times, running ProSGPV and the
/// cross-validated lasso on each training part and scoring test AUC.
pub fn run_spine_study(data: &Dataset, splits: usize, seed: u64, threads: usize) -> Result<SpineStudyResult> {
    if splits == 0 {
        return Err(Error::Config("need at least one split".into()));
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads.max(1))
        .build()
        .map_err(|e| Error::Config(format!("thread pool: {e}")))?;
    let records: Vec<SplitRecord> = pool.install(|| {
        (0..splits)
            .into_par_iter()
            .map(|s| run_split(data, s, seed))
            .collect::<Vec<_>>()
    })
    .into_iter()
    .flatten()
    .collect();
    let summaries = METHODS.iter().map(|&m| summarize(m, &records)).collect();
    Ok(SpineStudyResult {
        names: data.names().to_vec(),
        records,
        summaries,
    })
}

impl SpineStudyResult {
    fn model_names(&self, set: &[usize]) -> String {
        set.iter()
            .map(|&j| self.names[j].as_str())
            .collect::<Vec<_>>()
            .join(";")
    }

    pub fn summary(&self, method: Method) -> Option<&MethodSummary> {
        self.summaries.iter().find(|s| s.method == method)
    }

    /// Per-split table: split, method, seed, model size, selected names,
    /// test AUC, error.
    pub fn splits_csv(&self) -> Result<Vec<u8>> {
        crate::io::csv_bytes(
            &["split", "method", "seed", "model_size", "selected", "auc", "error"],
            self.records.iter().map(|r| {
                let mut row = vec![r.split.to_string(), r.method.to_string(), r.seed.to_string()];
                match &r.outcome {
                    Ok(o) => {
                        row.push(o.selected.len().to_string());
                        row.push(self.model_names(&o.selected));
                        row.push(o.auc.map_or_else(|| "NA".into(), fmt_full));
                        row.push(String::new());
                    }
                    Err(e) => {
                        row.extend(["NA".into(), String::new(), "NA".into()]);
                        row.push(e.clone());
                    }
                }
                row
            }),
        )
    }

    /// Per-method summary: size and AUC distributions, most frequent model.
    pub fn summary_csv(&self) -> Result<Vec<u8>> {
        crate::io::csv_bytes(
            &[
                "method", "completed", "failures", "median_model_size", "mean_auc", "median_auc",
                "most_frequent_model", "most_frequent_count",
            ],
            self.summaries.iter().map(|s| {
                vec![
                    s.method.to_string(),
                    s.completed.to_string(),
                    s.failures.to_string(),
                    fmt_full(s.median_size),
                    fmt_full(s.mean_auc),
                    fmt_full(s.median_auc),
                    self.model_names(&s.top_model),
                    s.top_count.to_string(),
                ]
            }),
        )
    }
}
