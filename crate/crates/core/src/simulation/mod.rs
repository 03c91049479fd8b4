//! Monte Carlo studies: scenarios, data generation, metrics and the
//! replication engine.

mod dgp;
mod engine;
mod metrics;

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::model::Family;

pub use dgp::{draw_dataset, draw_design, draw_response, make_true_beta, SurvivalSettings};
pub use engine::{
    aggregate, bound_comparison, replication_seed, run_grid, run_replication, AggregateRow,
    BoundComparisonRow, GridResults, ReplicationRecord,
};
pub use metrics::{auc, compute_metrics, rmse, MetricsRecord, Truth};

/// Desk-scale default replication count.
pub const DEFAULT_REPLICATIONS: usize = 100;

/// One simulation setting.
#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    pub id: String,
    pub family: Family,
    pub n: usize,
    pub p: usize,
    pub s: usize,
    pub beta_l: f64,
    pub beta_u: f64,
    pub rho: f64,
    pub sigma: f64,
    pub survival: SurvivalSettings,
    pub replications: usize,
    pub seed: u64,
    /// Fixed coefficient vector; overrides the random `s`-sparse draw.
    pub fixed_beta: Option<Vec<f64>>,
}

impl Scenario {
    /// Scenario with the standard design settings (ρ = 0.35, σ = 2,
    /// λ_w = 2, k = 1, τ = 0.2).
    pub fn new(family: Family, n: usize, p: usize, s: usize, beta_l: f64, beta_u: f64) -> Self {
        Self {
            id: format!("{family}-n{n}-p{p}-s{s}"),
            family,
            n,
            p,
            s,
            beta_l,
            beta_u,
            rho: 0.35,
            sigma: 2.0,
            survival: SurvivalSettings::default(),
            replications: DEFAULT_REPLICATIONS,
            seed: 0,
            fixed_beta: None,
        }
    }

    pub fn with_replications(mut self, reps: usize) -> Self {
        self.replications = reps;
        self
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn with_id(mut self, id: impl Into<String>) -> Self {
        self.id = id.into();
        self
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::Parameterization(m));
        if self.s > self.p {
            return bad(format!("s = {} exceeds p = {}", self.s, self.p));
        }
        if !(self.beta_l <= self.beta_u) {
            return bad(format!("beta_l = {} > beta_u = {}", self.beta_l, self.beta_u));
        }
        if !(0.0..1.0).contains(&self.rho) {
            return bad(format!("rho = {} outside [0, 1)", self.rho));
        }
        if !(self.sigma > 0.0) {
            return bad(format!("sigma = {} must be positive", self.sigma));
        }
        if self.n < 2 || self.p == 0 {
            return bad(format!("need n >= 2 and p >= 1 (n = {}, p = {})", self.n, self.p));
        }
        if let Some(beta) = &self.fixed_beta {
            if beta.len() != self.p {
                return Err(Error::DimensionMismatch {
                    expected: self.p,
                    found: beta.len(),
                });
            }
        }
        Ok(())
    }
}

/// Dimensional regime of a preset.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Regime {
    LowSparse,
    LowDense,
    HighSparse,
}

impl Regime {
    pub fn tag(self) -> &'static str {
        match self {
            Regime::LowSparse => "low-s",
            Regime::LowDense => "low-d",
            Regime::HighSparse => "high-s",
        }
    }
}

/// A column of the standard scenario table: fixed family, regime,
/// sparsity and signal range, with a grid over `n` (low-dimensional) or
/// `p` (high-dimensional).
#[derive(Debug, Clone, PartialEq)]
pub struct Preset {
    pub family: Family,
    pub regime: Regime,
    pub n_grid: Vec<usize>,
    pub p_grid: Vec<usize>,
    pub s: usize,
    pub beta_l: f64,
    pub beta_u: f64,
}

impl Preset {
    pub fn name(&self) -> String {
        format!("{}-{}", self.family, self.regime.tag())
    }

    /// One scenario per grid point; `n`/`p` pin a single value (which need
    /// not lie on the grid).
    pub fn scenarios(
        &self,
        n: Option<usize>,
        p: Option<usize>,
        s: Option<usize>,
        replications: usize,
        seed: u64,
    ) -> Vec<Scenario> {
        let ns = n.map(|v| vec![v]).unwrap_or_else(|| self.n_grid.clone());
        let ps = p.map(|v| vec![v]).unwrap_or_else(|| self.p_grid.clone());
        let s = s.unwrap_or(self.s);
        let mut out = Vec::new();
        for &n in &ns {
            for &p in &ps {
                out.push(
                    Scenario::new(self.family, n, p, s, self.beta_l, self.beta_u)
                        .with_id(format!("{}-n{n}-p{p}", self.name()))
                        .with_replications(replications)
                        .with_seed(seed),
                );
            }
        }
        out
    }
}

impl fmt::Display for Preset {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let range = |v: &[usize]| match v {
            [one] => one.to_string(),
            [first, .., last] => format!("{first}..{last} ({} values)", v.len()),
            [] => String::new(),
        };
        write!(
            f,
            "{:<18} n={:<22} p={:<22} s={:<3} beta=[{}, {}]",
            self.name(),
            range(&self.n_grid),
            range(&self.p_grid),
            self.s,
            self.beta_l,
            self.beta_u
        )
    }
}

fn signal_range(family: Family) -> (f64, f64) {
    match family {
        Family::Logistic => (0.5, 1.5),
        Family::Poisson => (0.1, 0.4),
        Family::Cox => (0.2, 0.8),
    }
}

fn high_dim_grid(family: Family) -> (usize, Vec<usize>) {
    let (n, step) = match family {
        Family::Logistic => (200, 200),
        Family::Poisson => (120, 120),
        Family::Cox => (80, 80),
    };
    (n, (1..=4).map(|k| k * step).collect())
}

/// The nine standard presets, in table order.
pub fn presets() -> Vec<Preset> {
    let low_n: Vec<usize> = (1..=20).map(|k| 40 * k).collect();
    let mut out = Vec::with_capacity(9);
    for family in Family::ALL {
        let (beta_l, beta_u) = signal_range(family);
        for (regime, s) in [(Regime::LowSparse, 4), (Regime::LowDense, 14)] {
            out.push(Preset {
                family,
                regime,
                n_grid: low_n.clone(),
                p_grid: vec![20],
                s,
                beta_l,
                beta_u,
            });
        }
        let (n, p_grid) = high_dim_grid(family);
        out.push(Preset {
            family,
            regime: Regime::HighSparse,
            n_grid: vec![n],
            p_grid,
            s: 4,
            beta_l,
            beta_u,
        });
    }
    out
}

/// Preset by name (`logistic-low-s`, `cox-high-s`, ...).
pub fn preset(name: &str) -> Result<Preset> {
    let all = presets();
    all.iter().find(|p| p.name() == name).cloned().ok_or_else(|| {
        let names: Vec<String> = all.iter().map(Preset::name).collect();
        Error::Config(format!(
            "unknown preset `{name}`; valid presets: {}",
            names.join(", ")
        ))
    })
}

/// Competing selection procedures.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Method {
    ProSgpv,
    ProSgpvGvif,
    ProSgpvJeffreys,
    /// Lasso at the cross-validated λ_min.
    LassoMin,
    /// Returns the true support and coefficients (harness self-check).
    Oracle,
}

impl Method {
    pub const ALL: [Method; 5] = [
        Method::ProSgpv,
        Method::ProSgpvGvif,
        Method::ProSgpvJeffreys,
        Method::LassoMin,
        Method::Oracle,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Method::ProSgpv => "prosgpv",
            Method::ProSgpvGvif => "prosgpv-gvif",
            Method::ProSgpvJeffreys => "prosgpv-jeffreys",
            Method::LassoMin => "lasso-min",
            Method::Oracle => "oracle",
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Method::ALL
            .into_iter()
            .find(|m| m.name() == s)
            .ok_or_else(|| Error::Config(format!("unknown method `{s}`")))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn nine_presets() {
        let all = presets();
        assert_eq!(all.len(), 9);
        let lr = preset("logistic-low-s").unwrap();
        assert_eq!((lr.s, lr.p_grid.as_slice()), (4, &[20][..]));
        assert_eq!(lr.n_grid.first(), Some(&40));
        assert_eq!(lr.n_grid.last(), Some(&800));
        let cox = preset("cox-high-s").unwrap();
        assert_eq!(cox.n_grid, vec![80]);
        assert_eq!(cox.p_grid, vec![80, 160, 240, 320]);
        assert_eq!(preset("poisson-low-d").unwrap().s, 14);
        assert!(matches!(preset("nope"), Err(Error::Config(_))));
    }

    #[test]
    fn pinned_scenario() {
        let sc = preset("poisson-low-s").unwrap().scenarios(Some(400), None, None, 5, 9);
        assert_eq!(sc.len(), 1);
        assert_eq!((sc[0].n, sc[0].p, sc[0].s), (400, 20, 4));
        assert_eq!((sc[0].beta_l, sc[0].beta_u), (0.1, 0.4));
        assert_eq!(sc[0].id, "poisson-low-s-n400-p20");
        sc[0].validate().unwrap();
    }
}
