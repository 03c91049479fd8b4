//! Data-generating processes for the simulation studies.

use nalgebra::DMatrix;
use rand::seq::SliceRandom;
use rand::Rng;
use rand_distr::{Distribution, Exp, Poisson, StandardNormal};

use crate::error::{Error, Result};
use crate::model::{Dataset, Family, Response};

/// Poisson means above this are rejected as a mis-specified scenario.
const POISSON_MEAN_LIMIT: f64 = 1e12;

/// `s` nonzero coefficients equally spaced on `[beta_l, beta_u]` at random
/// positions, `⌈s/2⌉` positive and `⌊s/2⌋` negative. A single signal gets
/// magnitude `beta_u`.
pub fn make_true_beta<R: Rng + ?Sized>(
    p: usize,
    s: usize,
    beta_l: f64,
    beta_u: f64,
    rng: &mut R,
) -> Result<Vec<f64>> {
    if s > p || beta_l > beta_u {
        return Err(Error::Parameterization(format!(
            "need s <= p and beta_l <= beta_u (s = {s}, p = {p}, range [{beta_l}, {beta_u}])"
        )));
    }
    let magnitudes: Vec<f64> = match s {
        0 => Vec::new(),
        1 => vec![beta_u],
        _ => (0..s)
            .map(|k| beta_l + (beta_u - beta_l) * k as f64 / (s - 1) as f64)
            .collect(),
    };
    let positions = rand::seq::index::sample(rng, p, s).into_vec();
    let mut signs: Vec<f64> = (0..s).map(|k| if k < s.div_ceil(2) { 1.0 } else { -1.0 }).collect();
    signs.shuffle(rng);
    let mut beta = vec![0.0; p];
    for ((&pos, &m), &sign) in positions.iter().zip(&magnitudes).zip(&signs) {
        beta[pos] = sign * m;
    }
    Ok(beta)
}

/// `n` i.i.d. rows from `N_p(0, Σ)` with `Σ_ij = σ² ρ^|i-j|`, via the AR(1)
/// recursion `x_1 = σ z_1`, `x_j = ρ x_{j-1} + σ √(1-ρ²) z_j`.
pub fn draw_design<R: Rng + ?Sized>(
    n: usize,
    p: usize,
    rho: f64,
    sigma: f64,
    rng: &mut R,
) -> Result<DMatrix<f64>> {
    if !(0.0..1.0).contains(&rho) || !(sigma > 0.0) {
        return Err(Error::Parameterization(format!(
            "need 0 <= rho < 1 and sigma > 0 (rho = {rho}, sigma = {sigma})"
        )));
    }
    let innovation = sigma * (1.0 - rho * rho).sqrt();
    let mut x = DMatrix::zeros(n, p);
    for i in 0..n {
        let mut prev = 0.0;
        for j in 0..p {
            let z: f64 = rng.sample(StandardNormal);
            let v = if j == 0 { sigma * z } else { rho * prev + innovation * z };
            x[(i, j)] = v;
            prev = v;
        }
    }
    Ok(x)
}

/// Survival-time generator settings.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SurvivalSettings {
    /// Baseline hazard scale `λ_w`.
    pub weibull_scale: f64,
    /// Weibull shape `k`.
    pub weibull_shape: f64,
    /// Rate `τ` of the exponential censoring time.
    pub censor_rate: f64,
}

impl Default for SurvivalSettings {
    fn default() -> Self {
        Self {
            weibull_scale: 2.0,
            weibull_shape: 1.0,
            censor_rate: 0.2,
        }
    }
}

/// Draws a response for linear predictor `z = Xβ` (intercept zero).
///
/// Logistic: Bernoulli(1/(1+e^{-z})). Poisson: Poisson(e^z). Cox: event
/// time `T = (-log U / (λ_w e^z))^{1/k}` (hazard `λ_w k t^{k-1} e^z`),
/// censored by `C ~ Exp(τ)`.
pub fn draw_response<R: Rng + ?Sized>(
    family: Family,
    x: &DMatrix<f64>,
    beta: &[f64],
    survival: &SurvivalSettings,
    rng: &mut R,
) -> Result<Response> {
    if beta.len() != x.ncols() {
        return Err(Error::DimensionMismatch {
            expected: x.ncols(),
            found: beta.len(),
        });
    }
    let z: Vec<f64> = (0..x.nrows())
        .map(|i| beta.iter().enumerate().map(|(j, b)| b * x[(i, j)]).sum())
        .collect();
    match family {
        Family::Logistic => Ok(Response::Binary(
            z.iter()
                .map(|&zi| {
                    let pr = 1.0 / (1.0 + (-zi).exp());
                    if rng.random::<f64>() < pr {
                        1.0
                    } else {
                        0.0
                    }
                })
                .collect(),
        )),
        Family::Poisson => {
            let mut y = Vec::with_capacity(z.len());
            for &zi in &z {
                let mean = zi.exp();
                if !(mean <= POISSON_MEAN_LIMIT) {
                    return Err(Error::Parameterization(format!(
                        "Poisson mean e^{zi:.1} is too large for a count model"
                    )));
                }
                let dist = Poisson::new(mean)
                    .map_err(|e| Error::Parameterization(format!("Poisson mean {mean}: {e}")))?;
                y.push(dist.sample(rng));
            }
            Ok(Response::Count(y))
        }
        Family::Cox => {
            let SurvivalSettings {
                weibull_scale,
                weibull_shape,
                censor_rate,
            } = *survival;
            if !(weibull_scale > 0.0 && weibull_shape > 0.0 && censor_rate > 0.0) {
                return Err(Error::Parameterization(
                    "Weibull scale, shape and censoring rate must be positive".into(),
                ));
            }
            let censor = Exp::new(censor_rate)
                .map_err(|e| Error::Parameterization(format!("censoring rate: {e}")))?;
            let mut time = Vec::with_capacity(z.len());
            let mut status = Vec::with_capacity(z.len());
            for &zi in &z {
                let u: f64 = 1.0 - rng.random::<f64>();
                let t = (-u.ln() / (weibull_scale * zi.exp())).powf(1.0 / weibull_shape);
                let c: f64 = censor.sample(rng);
                time.push(t.min(c).max(f64::MIN_POSITIVE));
                status.push(t <= c);
            }
            Ok(Response::Survival { time, status })
        }
    }
}

/// Design plus response in one dataset.
pub fn draw_dataset<R: Rng + ?Sized>(
    family: Family,
    n: usize,
    beta: &[f64],
    rho: f64,
    sigma: f64,
    survival: &SurvivalSettings,
    rng: &mut R,
) -> Result<Dataset> {
    let x = draw_design(n, beta.len(), rho, sigma, rng)?;
    let y = draw_response(family, &x, beta, survival, rng)?;
    Dataset::unnamed(x, y)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn equally_spaced_magnitudes() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let beta = make_true_beta(20, 4, 0.5, 1.5, &mut rng).unwrap();
        let mut mags: Vec<f64> = beta.iter().filter(|b| **b != 0.0).map(|b| b.abs()).collect();
        mags.sort_by(f64::total_cmp);
        let expected = [0.5, 0.5 + 1.0 / 3.0, 0.5 + 2.0 / 3.0, 1.5];
        for (m, e) in mags.iter().zip(expected) {
            assert!((m - e).abs() < 1e-12);
        }
        assert_eq!(beta.iter().filter(|b| **b > 0.0).count(), 2);
        assert_eq!(beta.iter().filter(|b| **b < 0.0).count(), 2);
    }

    #[test]
    fn single_signal_is_beta_u() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let beta = make_true_beta(5, 1, 0.5, 1.5, &mut rng).unwrap();
        assert_eq!(beta.iter().filter(|b| **b != 0.0).count(), 1);
        assert_eq!(beta.iter().find(|b| **b != 0.0).unwrap().abs(), 1.5);
    }

    #[test]
    fn dense_sign_split() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let beta = make_true_beta(14, 14, 0.5, 1.5, &mut rng).unwrap();
        assert!(beta.iter().all(|b| *b != 0.0));
        assert_eq!(beta.iter().filter(|b| **b > 0.0).count(), 7);
        assert_eq!(beta.iter().filter(|b| **b < 0.0).count(), 7);
        assert!(make_true_beta(3, 4, 0.5, 1.5, &mut rng).is_err());
    }

    #[test]
    fn logistic_balance_at_zero() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let x = draw_design(1000, 3, 0.35, 2.0, &mut rng).unwrap();
        let y = draw_response(Family::Logistic, &x, &[0.0; 3], &SurvivalSettings::default(), &mut rng).unwrap();
        let mean = y.values().unwrap().iter().sum::<f64>() / 1000.0;
        assert!((0.45..=0.55).contains(&mean), "{mean}");
    }

    #[test]
    fn poisson_overflow_is_rejected() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let x = DMatrix::from_element(3, 1, 10.0);
        let r = draw_response(Family::Poisson, &x, &[5.0], &SurvivalSettings::default(), &mut rng);
        assert!(matches!(r, Err(Error::Parameterization(_))));
    }
}
