//! Support-recovery, estimation and prediction metrics.

use crate::model::{Coefficients, Dataset, Family, Response};

/// True coefficients and their support.
#[derive(Debug, Clone, PartialEq)]
pub struct Truth {
    pub beta: Vec<f64>,
    pub support: Vec<usize>,
}

impl Truth {
    pub fn new(beta: Vec<f64>) -> Self {
        let support = beta
            .iter()
            .enumerate()
            .filter(|(_, b)| **b != 0.0)
            .map(|(j, _)| j)
            .collect();
        Self { beta, support }
    }

    pub fn p(&self) -> usize {
        self.beta.len()
    }

    /// Coefficients with a zero intercept where the family has one.
    pub fn coefficients(&self, family: Family) -> Coefficients {
        Coefficients {
            intercept: family.has_intercept().then_some(0.0),
            beta: self.beta.clone(),
        }
    }
}

/// Per-replication outcome for one method.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MetricsRecord {
    pub exact_capture: bool,
    pub power: f64,
    pub type1: f64,
    pub pfdr: f64,
    pub pfndr: f64,
    pub mae: f64,
    /// Test AUC (logistic) or RMSE (Poisson); absent for Cox.
    pub score: Option<f64>,
    /// Wall-clock seconds; not part of any deterministic output.
    pub runtime: f64,
}

/// Metrics of selected set `selected` with estimates `coef` against the
/// truth; the prediction score is computed on `test` when given.
pub fn compute_metrics(
    truth: &Truth,
    selected: &[usize],
    coef: &Coefficients,
    test: Option<&Dataset>,
) -> MetricsRecord {
    let p = truth.p();
    let s0 = truth.support.len();
    let in_truth = |j: &usize| truth.beta[*j] != 0.0;
    let true_pos = selected.iter().filter(|j| in_truth(j)).count();
    let false_pos = selected.len() - true_pos;
    let false_neg = s0 - true_pos;
    let ratio = |a: usize, b: usize| if b == 0 { 0.0 } else { a as f64 / b as f64 };
    let power = if s0 == 0 { 1.0 } else { ratio(true_pos, s0) };
    let type1 = ratio(false_pos, p - s0);
    let mae = coef
        .beta
        .iter()
        .zip(&truth.beta)
        .map(|(b, t)| (b - t).abs())
        .sum::<f64>()
        / p as f64;
    let score = test.and_then(|d| match d.y() {
        Response::Binary(y) => {
            let eta = coef.linear_predictor(d.x());
            auc(eta.as_slice(), y)
        }
        Response::Count(y) => {
            let eta = coef.linear_predictor(d.x());
            let yhat: Vec<f64> = eta.iter().map(|e| e.exp()).collect();
            Some(rmse(&yhat, y))
        }
        Response::Survival { .. } => None,
    });
    MetricsRecord {
        exact_capture: true_pos == s0 && false_pos == 0,
        power,
        type1,
        pfdr: ratio(false_pos, selected.len().max(1)),
        pfndr: ratio(false_neg, (p - selected.len()).max(1)),
        mae,
        score,
        runtime: 0.0,
    }
}

/// Area under the ROC curve by the Mann–Whitney statistic, ties counted
/// one half. `None` when only one class is present.
pub fn auc(scores: &[f64], labels: &[f64]) -> Option<f64> {
    let n = scores.len();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| scores[a].total_cmp(&scores[b]));
    let mut ranks = vec![0.0; n];
    let mut i = 0;
    while i < n {
        let mut j = i;
        while j + 1 < n && scores[order[j + 1]] == scores[order[i]] {
            j += 1;
        }
        let mid = (i + j) as f64 / 2.0 + 1.0;
        for &k in &order[i..=j] {
            ranks[k] = mid;
        }
        i = j + 1;
    }
    let n1 = labels.iter().filter(|&&y| y == 1.0).count();
    let n0 = n - n1;
    if n1 == 0 || n0 == 0 {
        return None;
    }
    let rank_sum: f64 = (0..n).filter(|&k| labels[k] == 1.0).map(|k| ranks[k]).sum();
    let u = rank_sum - (n1 * (n1 + 1)) as f64 / 2.0;
    Some(u / (n1 as f64 * n0 as f64))
}

pub fn rmse(pred: &[f64], y: &[f64]) -> f64 {
    let ss: f64 = pred.iter().zip(y).map(|(a, b)| (a - b) * (a - b)).sum();
    (ss / y.len() as f64).sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn truth() -> Truth {
        let mut beta = vec![0.0; 20];
        beta[1] = 1.0;
        beta[4] = -0.5;
        beta[7] = 0.7;
        beta[11] = -1.5;
        Truth::new(beta)
    }

    #[test]
    fn exact_support() {
        let t = truth();
        let m = compute_metrics(&t, &t.support, &t.coefficients(Family::Logistic), None);
        assert!(m.exact_capture);
        assert_eq!((m.power, m.type1, m.pfdr, m.mae), (1.0, 0.0, 0.0, 0.0));
    }

    #[test]
    fn empty_selection() {
        let t = truth();
        let m = compute_metrics(&t, &[], &Coefficients::zeros(Family::Logistic, 20), None);
        assert!(!m.exact_capture);
        assert_eq!((m.power, m.type1, m.pfdr), (0.0, 0.0, 0.0));
        assert!((m.pfndr - 0.2).abs() < 1e-15);
        assert!((m.mae - 3.7 / 20.0).abs() < 1e-15);
    }

    #[test]
    fn auc_values() {
        assert_eq!(auc(&[0.1, 0.2, 0.8, 0.9], &[0.0, 0.0, 1.0, 1.0]), Some(1.0));
        assert_eq!(auc(&[0.9, 0.8, 0.2, 0.1], &[0.0, 0.0, 1.0, 1.0]), Some(0.0));
        assert_eq!(auc(&[0.5; 4], &[0.0, 1.0, 0.0, 1.0]), Some(0.5));
        assert_eq!(auc(&[0.1, 0.2], &[1.0, 1.0]), None);
        // one discordant pair of four
        assert_eq!(auc(&[0.1, 0.6, 0.5, 0.9], &[0.0, 0.0, 1.0, 1.0]), Some(0.75));
    }
}
