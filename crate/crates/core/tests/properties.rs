mod common;

use approx::assert_abs_diff_eq;
use common::*;
use nalgebra::DMatrix;
use proptest::prelude::*;
use prosgpv::simulation::{
    draw_dataset, draw_design, draw_response, make_true_beta, run_grid, Method, Scenario,
    SurvivalSettings,
};
use prosgpv::{fit_mle, prosgpv, sgpv, Dataset, Family, FitOptions, IntervalNull, SelectionConfig};
use rand::Rng;

proptest! {
    #[test]
    fn sgpv_in_unit_interval_and_symmetric(l in -5.0f64..5.0, w in 0.0f64..6.0, d in 0.01f64..3.0) {
        let null = IntervalNull::new(d).unwrap();
        let v = sgpv(l, l + w, &null).unwrap();
        prop_assert!((0.0..=1.0).contains(&v));
        let mirrored = sgpv(-(l + w), -l, &null).unwrap();
        prop_assert!((v - mirrored).abs() < 1e-12);
    }

    #[test]
    fn sgpv_scale_equivariant(l in -5.0f64..5.0, w in 0.001f64..6.0, d in 0.01f64..3.0, c in 0.1f64..10.0) {
        let a = sgpv(l, l + w, &IntervalNull::new(d).unwrap()).unwrap();
        let b = sgpv(c * l, c * (l + w), &IntervalNull::new(c * d).unwrap()).unwrap();
        prop_assert!((a - b).abs() < 1e-9);
    }

    #[test]
    fn sgpv_zero_iff_disjoint_one_iff_inside(l in -3.0f64..3.0, w in 0.001f64..2.0, d in 0.05f64..2.0) {
        let u = l + w;
        let v = sgpv(l, u, &IntervalNull::new(d).unwrap()).unwrap();
        prop_assert_eq!(v == 0.0, u <= -d || l >= d);
        if l >= -d && u <= d {
            prop_assert!((v - 1.0).abs() < 1e-12);
        }
    }
}

#[test]
fn malformed_interval_is_rejected() {
    assert!(sgpv(1.0, 0.0, &IntervalNull::new(0.2).unwrap()).is_err());
    assert!(IntervalNull::new(0.0).is_err());
}

fn permuted(d: &Dataset, perm: &[usize], flip: Option<usize>) -> Dataset {
    let x = DMatrix::from_fn(d.n(), d.p(), |i, j| {
        let v = d.x()[(i, perm[j])];
        if flip == Some(j) { -v } else { v }
    });
    let names = perm.iter().map(|&j| d.names()[j].clone()).collect();
    Dataset::new(x, d.y().clone(), names).unwrap()
}

#[test]
fn selection_invariant_to_permutation_and_sign() {
    for family in Family::ALL {
        let mut r = rng(11);
        let beta = make_true_beta(8, 3, 0.4, 0.9, &mut r).unwrap();
        let d = draw_dataset(family, 150, &beta, 0.35, 1.0, &SurvivalSettings::default(), &mut r).unwrap();
        let base = prosgpv(family, &d, &SelectionConfig::default()).unwrap();
        let perm = [3, 7, 0, 5, 1, 6, 2, 4];
        let flip = 2; // column 0 of the original
        let pd = permuted(&d, &perm, Some(flip));
        let other = prosgpv(family, &pd, &SelectionConfig::default()).unwrap();
        let mut mapped: Vec<usize> = other.final_set.iter().map(|&j| perm[j]).collect();
        mapped.sort_unstable();
        assert_eq!(mapped, base.final_set, "{family}");
        let mut cand: Vec<usize> = other.candidate_set.iter().map(|&j| perm[j]).collect();
        cand.sort_unstable();
        assert_eq!(cand, base.candidate_set, "{family}");
        for (j, &orig) in perm.iter().enumerate() {
            let sign = if j == flip { -1.0 } else { 1.0 };
            assert_abs_diff_eq!(other.coef.beta[j], sign * base.coef.beta[orig], epsilon = 1e-6);
        }
    }
}

#[test]
fn final_coefficients_are_unshrunken_refits() {
    for family in Family::ALL {
        let mut r = rng(12);
        let beta = make_true_beta(10, 3, 0.5, 1.0, &mut r).unwrap();
        let d = draw_dataset(family, 200, &beta, 0.35, 1.0, &SurvivalSettings::default(), &mut r).unwrap();
        let res = prosgpv(family, &d, &SelectionConfig::default()).unwrap();
        assert!(res.final_set.iter().all(|k| res.candidate_set.contains(k)));
        let refit = fit_mle(family, &d, &res.final_set, &FitOptions::default()).unwrap();
        for (a, b) in res.coef.beta.iter().zip(&refit.coef.beta) {
            assert_abs_diff_eq!(*a, *b, epsilon = 1e-10);
        }
        for j in 0..10 {
            if !res.final_set.contains(&j) {
                assert_eq!(res.coef.beta[j], 0.0);
            }
        }
        // S is exactly the SGPV-zero candidates
        let zero: Vec<usize> = res
            .candidate_set
            .iter()
            .zip(&res.sgpvs)
            .filter(|(_, v)| **v == 0.0)
            .map(|(k, _)| *k)
            .collect();
        assert_eq!(zero, res.final_set);
    }
}

#[test]
fn pure_noise_usually_selects_nothing() {
    let mut empty = 0;
    for rep in 0..40 {
        let mut r = rng(1000 + rep);
        let d = draw_dataset(Family::Logistic, 400, &[0.0; 10], 0.35, 1.0, &SurvivalSettings::default(), &mut r).unwrap();
        let res = prosgpv(Family::Logistic, &d, &SelectionConfig::default()).unwrap();
        empty += usize::from(res.final_set.is_empty());
    }
    assert!(empty >= 32, "empty selection in {empty}/40");
}

#[test]
fn design_covariance_matches_ar1() {
    let mut r = rng(13);
    let x = draw_design(50_000, 5, 0.35, 2.0, &mut r).unwrap();
    let n = x.nrows() as f64;
    for a in 0..5 {
        for b in 0..5 {
            let cov = x.column(a).dot(&x.column(b)) / n;
            let expected = 4.0 * 0.35f64.powi((a as i32 - b as i32).abs());
            assert!((cov - expected).abs() < 0.05, "({a},{b}) {cov} vs {expected}");
        }
    }
}

#[test]
fn exponential_event_times_and_censoring() {
    let mut r = rng(14);
    let x = DMatrix::zeros(10_000, 1);
    let settings = SurvivalSettings::default();
    // censoring off: every time is an event time
    let no_censor = SurvivalSettings { censor_rate: 1e-12, ..settings };
    let y = draw_response(Family::Cox, &x, &[0.0], &no_censor, &mut r).unwrap();
    let prosgpv::Response::Survival { time, .. } = y else { unreachable!() };
    let mean = time.iter().sum::<f64>() / time.len() as f64;
    assert!((mean - 0.5).abs() < 0.02, "{mean}");

    let y = draw_response(Family::Cox, &x, &[0.0], &settings, &mut r).unwrap();
    let prosgpv::Response::Survival { status, .. } = y else { unreachable!() };
    let censored = status.iter().filter(|s| !**s).count() as f64 / 10_000.0;
    assert!((censored - 0.2 / 2.2).abs() < 0.02, "{censored}");
}

#[test]
fn grid_bookkeeping_and_oracle_self_check() {
    let scenarios = vec![
        Scenario::new(Family::Logistic, 80, 6, 2, 0.5, 1.5).with_id("a").with_replications(10).with_seed(3),
        Scenario::new(Family::Poisson, 80, 6, 2, 0.1, 0.4).with_id("b").with_replications(10).with_seed(3),
    ];
    let res = run_grid(&scenarios, &[Method::ProSgpv, Method::Oracle], 1).unwrap();
    assert_eq!(res.records.len(), 40);
    assert_eq!(res.aggregates.len(), 4);
    for a in res.aggregates.iter().filter(|a| a.method == Method::Oracle) {
        assert_eq!((a.capture_rate, a.power, a.type1, a.pfdr, a.pfndr), (1.0, 1.0, 0.0, 0.0, 0.0));
        assert_eq!(a.mae, [0.0; 3]);
    }
    for rec in &res.records {
        if let Ok(m) = &rec.outcome {
            assert_eq!(m.exact_capture, m.power == 1.0 && m.type1 == 0.0);
            for v in [m.power, m.type1, m.pfdr, m.pfndr] {
                assert!((0.0..=1.0).contains(&v));
            }
        }
    }
    for a in &res.aggregates {
        assert!(0.0 <= a.capture_ci.0 && a.capture_ci.1 <= 1.0);
    }
}

#[test]
fn firth_estimates_finite_under_separation() {
    let mut r = rng(15);
    let x = DMatrix::from_fn(20, 2, |_, _| r.random_range(-2.0..2.0));
    let y: Vec<f64> = (0..20).map(|i| f64::from(u8::from(x[(i, 0)] > 0.0))).collect();
    let d = Dataset::unnamed(x, prosgpv::Response::Binary(y)).unwrap();
    let fit = prosgpv::fit_firth_logistic(&d, &[0, 1], &FitOptions::default()).unwrap();
    assert!(fit.converged);
    assert!(fit.coef.beta.iter().all(|b| b.abs() < 20.0));
}
