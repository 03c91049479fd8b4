//! CSV ingestion and output formatting.

use std::collections::BTreeSet;
use std::fs;
use std::path::Path;

use nalgebra::DMatrix;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::fitting::FitResult;
use crate::model::{Dataset, Family, Response};
use crate::sgpv::SelectionResult;
use crate::simulation::{AggregateRow, BoundComparisonRow, ReplicationRecord};

/// Version of the JSON report layout.
pub const SCHEMA_VERSION: u32 = 1;

/// Which columns of a CSV file make up the response.
#[derive(Debug, Clone, PartialEq)]
pub enum ResponseSpec {
    /// Binary or count outcome column.
    Column(String),
    /// Survival time and event-status columns.
    Survival { time: String, status: String },
}

#[derive(Debug, Clone, PartialEq)]
pub struct CsvSchema {
    pub family: Family,
    pub response: ResponseSpec,
    /// Predictor columns; `None` takes every non-response column in file
    /// order.
    pub predictors: Option<Vec<String>>,
}

impl CsvSchema {
    /// Checks that the response specification matches the family.
    pub fn validate(&self) -> Result<()> {
        match (&self.response, self.family) {
            (ResponseSpec::Survival { .. }, Family::Cox) => Ok(()),
            (ResponseSpec::Column(_), Family::Logistic | Family::Poisson) => Ok(()),
            (ResponseSpec::Column(_), Family::Cox) => Err(Error::Config(
                "the cox family needs --time and --status instead of --response".into(),
            )),
            (ResponseSpec::Survival { .. }, f) => Err(Error::Config(format!(
                "the {f} family needs --response, not --time/--status"
            ))),
        }
    }
}

fn is_missing(field: &str) -> bool {
    matches!(field.trim(), "" | "NA" | "NaN" | "nan" | "null" | "NULL" | ".")
}

struct Table {
    header: Vec<String>,
    rows: Vec<Vec<String>>,
    /// 1-based file line of each data row.
    lines: Vec<usize>,
}

fn read_table(path: &Path) -> Result<Table> {
    let bytes = fs::read(path).map_err(|e| {
        Error::Config(format!("cannot read `{}`: {e}", path.display()))
    })?;
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .from_reader(bytes.as_slice());
    let csv_error = |e: csv::Error| {
        let line = e.position().map_or(0, |p| p.line() as usize);
        Error::Parse {
            line,
            column: 1,
            message: e.to_string(),
        }
    };
    let header: Vec<String> = reader
        .headers()
        .map_err(csv_error)?
        .iter()
        .map(|h| h.trim().to_string())
        .collect();
    if header.is_empty() || header.iter().all(String::is_empty) {
        return Err(Error::Parse {
            line: 1,
            column: 1,
            message: "missing header row".into(),
        });
    }
    let mut seen = BTreeSet::new();
    for (j, h) in header.iter().enumerate() {
        if !seen.insert(h.as_str()) {
            return Err(Error::Parse {
                line: 1,
                column: j + 1,
                message: format!("duplicate column name `{h}`"),
            });
        }
    }
    let mut rows = Vec::new();
    let mut lines = Vec::new();
    for record in reader.records() {
        let record = record.map_err(csv_error)?;
        let line = record.position().map_or(0, |p| p.line() as usize);
        if record.len() != header.len() {
            return Err(Error::Parse {
                line,
                column: record.len().min(header.len()) + 1,
                message: format!("expected {} fields, found {}", header.len(), record.len()),
            });
        }
        rows.push(record.iter().map(|f| f.trim().to_string()).collect());
        lines.push(line);
    }
    if rows.is_empty() {
        return Err(Error::Parse {
            line: 2,
            column: 1,
            message: "no data rows".into(),
        });
    }
    Ok(Table { header, rows, lines })
}

impl Table {
    fn column(&self, name: &str) -> Result<usize> {
        self.header.iter().position(|h| h == name).ok_or_else(|| {
            Error::Config(format!(
                "column `{name}` not found; available: {}",
                self.header.join(", ")
            ))
        })
    }

    fn numeric(&self, row: usize, col: usize) -> Result<f64> {
        let field = &self.rows[row][col];
        field.parse::<f64>().map_err(|_| Error::Parse {
            line: self.lines[row],
            column: col + 1,
            message: format!("`{field}` in column `{}` is not a number", self.header[col]),
        })
    }
}

/// Two-level coding: numeric 0/1 as is, otherwise the lexicographically
/// smaller level is 0.
fn binary_column(table: &Table, col: usize) -> Result<Vec<f64>> {
    let levels: BTreeSet<&str> = table.rows.iter().map(|r| r[col].as_str()).collect();
    let numeric01 = levels
        .iter()
        .all(|l| matches!(l.parse::<f64>(), Ok(v) if v == 0.0 || v == 1.0));
    if numeric01 {
        return (0..table.rows.len()).map(|i| table.numeric(i, col)).collect();
    }
    if levels.len() != 2 {
        return Err(Error::InvalidData(format!(
            "binary response `{}` has {} levels, expected 2",
            table.header[col],
            levels.len()
        )));
    }
    let zero = *levels.iter().next().expect("two levels");
    Ok(table
        .rows
        .iter()
        .map(|r| if r[col] == zero { 0.0 } else { 1.0 })
        .collect())
}

/// Reads a header-plus-rows CSV into a validated dataset.
pub fn load_csv(path: impl AsRef<Path>, schema: &CsvSchema) -> Result<Dataset> {
    schema.validate()?;
    let table = read_table(path.as_ref())?;
    let response_cols: Vec<usize> = match &schema.response {
        ResponseSpec::Column(c) => vec![table.column(c)?],
        ResponseSpec::Survival { time, status } => vec![table.column(time)?, table.column(status)?],
    };
    let predictor_cols: Vec<usize> = match &schema.predictors {
        Some(names) => names.iter().map(|n| table.column(n)).collect::<Result<_>>()?,
        None => (0..table.header.len())
            .filter(|j| !response_cols.contains(j))
            .collect(),
    };
    if predictor_cols.is_empty() {
        return Err(Error::Config("no predictor columns".into()));
    }
    if let Some(j) = predictor_cols.iter().find(|j| response_cols.contains(j)) {
        return Err(Error::Config(format!(
            "column `{}` is both a predictor and the response",
            table.header[*j]
        )));
    }

    let used: Vec<usize> = response_cols.iter().chain(&predictor_cols).copied().collect();
    let missing: Vec<usize> = (0..table.rows.len())
        .filter(|&i| used.iter().any(|&j| is_missing(&table.rows[i][j])))
        .map(|i| table.lines[i])
        .collect();
    if !missing.is_empty() {
        let shown: Vec<String> = missing.iter().take(20).map(usize::to_string).collect();
        return Err(Error::InvalidData(format!(
            "missing values on {} row(s), file lines {}{}",
            missing.len(),
            shown.join(", "),
            if missing.len() > 20 { ", ..." } else { "" }
        )));
    }

    let n = table.rows.len();
    let mut x = DMatrix::zeros(n, predictor_cols.len());
    for (k, &j) in predictor_cols.iter().enumerate() {
        for i in 0..n {
            x[(i, k)] = table.numeric(i, j)?;
        }
    }
    let y = match schema.family {
        Family::Logistic => Response::Binary(binary_column(&table, response_cols[0])?),
        Family::Poisson => Response::Count(
            (0..n)
                .map(|i| table.numeric(i, response_cols[0]))
                .collect::<Result<_>>()?,
        ),
        Family::Cox => {
            let time = (0..n)
                .map(|i| table.numeric(i, response_cols[0]))
                .collect::<Result<_>>()?;
            let status = (0..n)
                .map(|i| match table.numeric(i, response_cols[1])? {
                    v if v == 0.0 => Ok(false),
                    v if v == 1.0 => Ok(true),
                    v => Err(Error::InvalidData(format!(
                        "status at file line {} is {v}, expected 0 or 1",
                        table.lines[i]
                    ))),
                })
                .collect::<Result<_>>()?;
            Response::Survival { time, status }
        }
    };
    let names = predictor_cols.iter().map(|&j| table.header[j].clone()).collect();
    Dataset::new(x, y, names)
}

/// Machine-output number: shortest decimal that parses back to the same
/// `f64`.
pub fn fmt_full(v: f64) -> String {
    if v.is_nan() {
        "NA".into()
    } else if v.is_infinite() {
        if v > 0.0 { "Inf" } else { "-Inf" }.into()
    } else {
        format!("{v:?}")
    }
}

/// Human-table number with four significant digits.
pub fn fmt_sig4(v: f64) -> String {
    if !v.is_finite() {
        return fmt_full(v);
    }
    if v == 0.0 {
        return "0".into();
    }
    let magnitude = v.abs().log10().floor() as i32;
    if (-4..6).contains(&magnitude) {
        format!("{:.*}", (3 - magnitude).max(0) as usize, v)
    } else {
        format!("{v:.3e}")
    }
}

/// Writes `data` as CSV: predictors in column order, then the response
/// (`y`, or `time`,`status`).
pub fn write_csv(path: impl AsRef<Path>, data: &Dataset) -> Result<()> {
    let mut w = csv::Writer::from_writer(Vec::new());
    let mut header: Vec<String> = data.names().to_vec();
    match data.y() {
        Response::Survival { .. } => {
            header.push("time".into());
            header.push("status".into());
        }
        _ => header.push("y".into()),
    }
    w.write_record(&header).map_err(csv_write_error)?;
    for i in 0..data.n() {
        let mut row: Vec<String> = (0..data.p()).map(|j| fmt_full(data.x()[(i, j)])).collect();
        match data.y() {
            Response::Binary(y) | Response::Count(y) => row.push(fmt_full(y[i])),
            Response::Survival { time, status } => {
                row.push(fmt_full(time[i]));
                row.push(if status[i] { "1" } else { "0" }.into());
            }
        }
        w.write_record(&row).map_err(csv_write_error)?;
    }
    let bytes = w.into_inner().map_err(|e| Error::Io(e.into_error()))?;
    write_atomic(path, &bytes)
}

pub(crate) fn csv_write_error(e: csv::Error) -> Error {
    Error::Io(std::io::Error::other(e))
}

/// Serializes rows into CSV bytes.
pub fn csv_bytes<I, R>(header: &[&str], rows: I) -> Result<Vec<u8>>
where
    I: IntoIterator<Item = R>,
    R: IntoIterator<Item = String>,
{
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(header).map_err(csv_write_error)?;
    for row in rows {
        w.write_record(row.into_iter().collect::<Vec<_>>())
            .map_err(csv_write_error)?;
    }
    w.into_inner().map_err(|e| Error::Io(e.into_error()))
}

/// Writes through a sibling temporary file and renames, so a failed run
/// never leaves a partial file behind.
pub fn write_atomic(path: impl AsRef<Path>, bytes: &[u8]) -> Result<()> {
    let path = path.as_ref();
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir)?;
    }
    let mut tmp_name = path.file_name().unwrap_or_default().to_os_string();
    tmp_name.push(".partial");
    let tmp = path.with_file_name(tmp_name);
    fs::write(&tmp, bytes)?;
    fs::rename(&tmp, path).inspect_err(|_| {
        let _ = fs::remove_file(&tmp);
    })?;
    Ok(())
}

#[derive(Debug, Clone, Serialize)]
pub struct CoefficientRow {
    pub name: String,
    pub estimate: f64,
    pub se: f64,
    pub ci_lower: f64,
    pub ci_upper: f64,
    /// SGPV from stage-two screening; absent for the intercept.
    pub sgpv: Option<f64>,
}

#[derive(Debug, Clone, Serialize)]
pub struct CandidateRow {
    pub name: String,
    pub sgpv: f64,
    /// `1.96·SE + δ` on the standardized scale.
    pub cutoff: f64,
    pub selected: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct PathSummary {
    pub lambdas: Vec<f64>,
    pub df: Vec<usize>,
    pub gic: Vec<f64>,
}

/// Machine-readable selection report.
#[derive(Debug, Clone, Serialize)]
pub struct SelectionReport {
    pub schema_version: u32,
    pub family: String,
    pub bound: String,
    pub jeffreys: bool,
    pub n: usize,
    pub p: usize,
    pub candidate_set: Vec<String>,
    pub final_set: Vec<String>,
    pub coefficients: Vec<CoefficientRow>,
    pub candidates: Vec<CandidateRow>,
    pub null_bound: Option<f64>,
    pub lambda_gic: f64,
    pub converged: bool,
    pub warnings: Vec<String>,
    pub path: PathSummary,
}

fn coefficient_rows(fit: &FitResult, names: &[String], sgpv_of: impl Fn(usize) -> Option<f64>) -> Vec<CoefficientRow> {
    let mut rows = Vec::new();
    if let Some(b0) = &fit.intercept {
        rows.push(CoefficientRow {
            name: "(Intercept)".into(),
            estimate: b0.estimate,
            se: b0.se,
            ci_lower: b0.ci_lower,
            ci_upper: b0.ci_upper,
            sgpv: None,
        });
    }
    for (&j, t) in fit.subset.iter().zip(&fit.terms) {
        rows.push(CoefficientRow {
            name: names[j].clone(),
            estimate: t.estimate,
            se: t.se,
            ci_lower: t.ci_lower,
            ci_upper: t.ci_upper,
            sgpv: sgpv_of(j),
        });
    }
    rows
}

impl SelectionReport {
    pub fn new(result: &SelectionResult, data: &Dataset) -> Self {
        let names = data.names();
        let name_all = |set: &[usize]| set.iter().map(|&j| names[j].clone()).collect();
        let sgpv_of = |j: usize| {
            result
                .candidate_set
                .iter()
                .position(|&k| k == j)
                .map(|pos| result.sgpvs[pos])
        };
        let candidates = result
            .candidate_set
            .iter()
            .enumerate()
            .map(|(pos, &k)| CandidateRow {
                name: names[k].clone(),
                sgpv: result.sgpvs[pos],
                cutoff: result.per_variable_cutoffs[pos],
                selected: result.final_set.contains(&k),
            })
            .collect();
        let mut warnings = result.final_fit.warnings.clone();
        if let Some(f) = &result.stage2_fit {
            warnings.extend(f.warnings.iter().map(|w| format!("stage two: {w}")));
        }
        Self {
            schema_version: SCHEMA_VERSION,
            family: result.family.to_string(),
            bound: result.config.bound.to_string(),
            jeffreys: result.config.jeffreys,
            n: data.n(),
            p: data.p(),
            candidate_set: name_all(&result.candidate_set),
            final_set: name_all(&result.final_set),
            coefficients: coefficient_rows(&result.final_fit, names, sgpv_of),
            candidates,
            null_bound: result.null_bound.map(|b| b.delta()),
            lambda_gic: result.lambda_gic,
            converged: result.converged(),
            warnings,
            path: PathSummary {
                lambdas: result.stage1.lambdas.clone(),
                df: result.stage1.df.clone(),
                gic: result.stage1.gic.clone(),
            },
        }
    }

    pub fn to_json(&self) -> Result<String> {
        serde_json::to_string_pretty(self).map_err(|e| Error::Io(std::io::Error::other(e)))
    }
}

/// Machine-readable unpenalized fit.
#[derive(Debug, Clone, Serialize)]
pub struct FitReport {
    pub schema_version: u32,
    pub family: String,
    pub jeffreys: bool,
    pub n: usize,
    pub coefficients: Vec<CoefficientRow>,
    pub converged: bool,
    pub iterations: usize,
    pub loss: f64,
    pub warnings: Vec<String>,
}

impl FitReport {
    pub fn new(fit: &FitResult, data: &Dataset) -> Self {
        Self {
            schema_version: SCHEMA_VERSION,
            family: fit.family.to_string(),
            jeffreys: fit.jeffreys,
            n: data.n(),
            coefficients: coefficient_rows(fit, data.names(), |_| None),
            converged: fit.converged,
            iterations: fit.iterations,
            loss: fit.final_loss,
            warnings: fit.warnings.clone(),
        }
    }

    pub fn to_json(&self) -> Result<String> {
        serde_json::to_string_pretty(self).map_err(|e| Error::Io(std::io::Error::other(e)))
    }
}

const COEF_HEADER: [&str; 6] = ["name", "estimate", "se", "ci_lower", "ci_upper", "sgpv"];

/// Coefficient table as CSV with full-precision numbers.
pub fn coefficients_csv(rows: &[CoefficientRow]) -> Result<Vec<u8>> {
    csv_bytes(
        &COEF_HEADER,
        rows.iter().map(|r| {
            vec![
                r.name.clone(),
                fmt_full(r.estimate),
                fmt_full(r.se),
                fmt_full(r.ci_lower),
                fmt_full(r.ci_upper),
                r.sgpv.map_or_else(|| "NA".into(), fmt_full),
            ]
        }),
    )
}

/// Fixed-width human table with four significant digits.
pub fn coefficients_table(rows: &[CoefficientRow]) -> String {
    let cells: Vec<[String; 6]> = rows
        .iter()
        .map(|r| {
            [
                r.name.clone(),
                fmt_sig4(r.estimate),
                fmt_sig4(r.se),
                fmt_sig4(r.ci_lower),
                fmt_sig4(r.ci_upper),
                r.sgpv.map_or_else(|| "-".into(), fmt_sig4),
            ]
        })
        .collect();
    render_table(&COEF_HEADER, &cells)
}

pub(crate) fn render_table<const K: usize>(header: &[&str; K], cells: &[[String; K]]) -> String {
    let mut width = header.map(str::len);
    for row in cells {
        for (w, c) in width.iter_mut().zip(row) {
            *w = (*w).max(c.len());
        }
    }
    let line = |row: &[String]| {
        row.iter()
            .zip(&width)
            .enumerate()
            .map(|(k, (c, w))| if k == 0 { format!("{c:<w$}") } else { format!("{c:>w$}") })
            .collect::<Vec<_>>()
            .join("  ")
    };
    let mut out = line(&header.map(String::from));
    out.push('\n');
    for row in cells {
        out.push_str(&line(row));
        out.push('\n');
    }
    out
}

/// Replication-level simulation table. Runtimes are written only when
/// `timing` is set, keeping default output reproducible byte for byte.
pub fn replications_csv(records: &[ReplicationRecord], timing: bool) -> Result<Vec<u8>> {
    let header = [
        "scenario", "method", "replication", "seed", "exact_capture", "power", "type1", "pfdr",
        "pfndr", "mae", "score", "runtime_s", "error",
    ];
    csv_bytes(
        &header,
        records.iter().map(|r| {
            let mut row = vec![
                r.scenario.clone(),
                r.method.to_string(),
                r.replication.to_string(),
                r.seed.to_string(),
            ];
            match &r.outcome {
                Ok(m) => {
                    row.push(u8::from(m.exact_capture).to_string());
                    row.extend([m.power, m.type1, m.pfdr, m.pfndr, m.mae].map(fmt_full));
                    row.push(m.score.map_or_else(|| "NA".into(), fmt_full));
                    row.push(if timing { fmt_full(m.runtime) } else { "NA".into() });
                    row.push(String::new());
                }
                Err(e) => {
                    row.extend(std::iter::repeat_n("NA".to_string(), 8));
                    row.push(e.clone());
                }
            }
            row
        }),
    )
}

/// Aggregate simulation table, one row per (scenario, method).
pub fn aggregates_csv(rows: &[AggregateRow], timing: bool) -> Result<Vec<u8>> {
    let header = [
        "scenario", "method", "completed", "failures", "capture_rate", "capture_ci_lower",
        "capture_ci_upper", "power", "type1", "pfdr", "pfndr", "mae_q1", "mae_median", "mae_q3",
        "score_q1", "score_median", "score_q3", "score_mean", "runtime_median_s",
    ];
    csv_bytes(
        &header,
        rows.iter().map(|a| {
            let mut row = vec![
                a.scenario.clone(),
                a.method.to_string(),
                a.completed.to_string(),
                a.failures.to_string(),
            ];
            row.extend(
                [a.capture_rate, a.capture_ci.0, a.capture_ci.1, a.power, a.type1, a.pfdr, a.pfndr]
                    .map(fmt_full),
            );
            row.extend(a.mae.map(fmt_full));
            match a.score {
                Some(q) => row.extend(q.map(fmt_full)),
                None => row.extend(std::iter::repeat_n("NA".to_string(), 3)),
            }
            row.push(a.score_mean.map_or_else(|| "NA".into(), fmt_full));
            row.push(if timing { fmt_full(a.runtime_median) } else { "NA".into() });
            row
        }),
    )
}

/// Null-bound comparison table.
pub fn bounds_csv(rows: &[BoundComparisonRow]) -> Result<Vec<u8>> {
    let header = [
        "scenario", "bound", "completed", "failures", "capture_rate", "capture_ci_lower",
        "capture_ci_upper", "power", "type1",
    ];
    csv_bytes(
        &header,
        rows.iter().map(|b| {
            let mut row = vec![
                b.scenario.clone(),
                b.bound.to_string(),
                b.completed.to_string(),
                b.failures.to_string(),
            ];
            row.extend([b.capture_rate, b.capture_ci.0, b.capture_ci.1, b.power, b.type1].map(fmt_full));
            row
        }),
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sig4_formatting() {
        assert_eq!(fmt_sig4(1.23456), "1.235");
        assert_eq!(fmt_sig4(-0.0123456), "-0.01235");
        assert_eq!(fmt_sig4(12345.6), "12346");
        assert_eq!(fmt_sig4(1.5e-9), "1.500e-9");
        assert_eq!(fmt_sig4(0.0), "0");
    }

    #[test]
    fn full_precision_round_trips() {
        for v in [0.1, 1.0 / 3.0, -2.5e-300, 6.02214076e23, f64::MIN_POSITIVE] {
            assert_eq!(fmt_full(v).parse::<f64>().unwrap(), v);
        }
        assert_eq!(fmt_full(f64::NAN), "NA");
    }

    #[test]
    fn schema_family_mismatch() {
        let s = CsvSchema {
            family: Family::Cox,
            response: ResponseSpec::Column("y".into()),
            predictors: None,
        };
        assert!(matches!(s.validate(), Err(Error::Config(_))));
    }
}
