#![allow(clippy::needless_range_loop)]

use std::f64::consts::E;

use mdlquad::compensated::compensated_sum;
use mdlquad::oracle::{brute_force_sum, stieltjes_coeffs, DiscreteMeasure};
use mdlquad::quadrature::rule_from_table;
use mdlquad::recurrence::{mdl_orthonormal_lattice_values, normalized_coeffs_tau};
use mdlquad::{
    build_rule, dl_eval, mdl_eval, mdl_sum, normalized_coeffs, tridiag_eigen, MeasureSpec,
    RuleSource, Summand, Tau,
};
use proptest::prelude::*;

fn config(cases: u32) -> ProptestConfig {
    ProptestConfig {
        cases,
        failure_persistence: None,
        ..ProptestConfig::default()
    }
}

fn monomial(d: i32, s: f64) -> Summand {
    Summand::full(move |x: f64| x.powi(d) * (-s * x).exp()).with_zero_limit(if d == 0 {
        1.0
    } else {
        0.0
    })
}

/// Cyclic Jacobi rotations on a dense symmetric matrix.
fn dense_jacobi_eigenvalues(mut a: Vec<Vec<f64>>) -> Vec<f64> {
    let n = a.len();
    for _sweep in 0..100 {
        let off: f64 = (0..n)
            .flat_map(|i| (0..n).filter(move |&j| j != i).map(move |j| (i, j)))
            .map(|(i, j)| a[i][j] * a[i][j])
            .sum();
        if off.sqrt() < 1e-300 {
            break;
        }
        for p in 0..n {
            for q in p + 1..n {
                if a[p][q] == 0.0 {
                    continue;
                }
                let theta = (a[q][q] - a[p][p]) / (2.0 * a[p][q]);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let t = if theta == 0.0 { 1.0 } else { t };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for k in 0..n {
                    let (akp, akq) = (a[k][p], a[k][q]);
                    a[k][p] = c * akp - s * akq;
                    a[k][q] = s * akp + c * akq;
                }
                for k in 0..n {
                    let (apk, aqk) = (a[p][k], a[q][k]);
                    a[p][k] = c * apk - s * aqk;
                    a[q][k] = s * apk + c * aqk;
                }
            }
        }
    }
    let mut ev: Vec<f64> = (0..n).map(|i| a[i][i]).collect();
    ev.sort_by(f64::total_cmp);
    ev
}

proptest! {
    #![proptest_config(config(24))]

    #[test]
    fn bosonic_rules_are_exact_to_degree_2n_minus_1(h in 0.05f64..2.0, s in 0.2f64..2.0, n in 1usize..=10) {
        let measure = MeasureSpec::bosonic(h, s).unwrap();
        let rule = build_rule(n, &measure).unwrap();
        for d in 0..2 * n as i32 {
            let reference = brute_force_sum(&monomial(d, s), &measure, 1e-15).unwrap().value;
            let estimate = rule.apply(|x| x.powi(d));
            prop_assert!(((estimate - reference) / reference).abs() < 1e-9, "d={} {} vs {}", d, estimate, reference);
        }
    }

    #[test]
    fn fermionic_rules_are_exact_to_degree_2n_minus_1(h in 0.1f64..2.0, s in 0.3f64..2.0, n in 1usize..=8) {
        let measure = MeasureSpec::fermionic(h, s).unwrap();
        let rule = build_rule(n, &measure).unwrap();
        prop_assert!(rule.nodes()[0] > 0.0);
        for d in 0..2 * n as i32 {
            let reference = brute_force_sum(&monomial(d, s), &measure, 1e-15).unwrap().value;
            let estimate = rule.apply(|x| x.powi(d));
            prop_assert!(((estimate - reference) / reference).abs() < 1e-9, "d={}", d);
        }
    }

    #[test]
    fn consecutive_orders_interlace(hs in 0.05f64..4.0, n in 1usize..30) {
        let measure = MeasureSpec::bosonic(hs, 1.0).unwrap();
        let a = build_rule(n, &measure).unwrap();
        let b = build_rule(n + 1, &measure).unwrap();
        // At large hs the low nodes of both rules lie within an ulp of k h.
        for k in 0..n {
            let slack = 4.0 * f64::EPSILON * a.nodes()[k];
            prop_assert!(b.nodes()[k] <= a.nodes()[k] + slack && a.nodes()[k] <= b.nodes()[k + 1] + slack, "k={}", k);
        }
        prop_assert!(a.weights().iter().chain(b.weights()).all(|&w| w > 0.0));
    }

    #[test]
    fn closed_form_rules_agree_with_stieltjes(hs in 0.1f64..4.0, h in 0.2f64..2.0, n in 1usize..=15) {
        let measure = MeasureSpec::bosonic(h, hs / h).unwrap();
        let closed = build_rule(n, &measure).unwrap();
        let table = stieltjes_coeffs(&DiscreteMeasure::new(measure), n).unwrap();
        let oracle = rule_from_table(&table, RuleSource::Discrete(measure)).unwrap();
        for (a, b) in closed.iter().zip(oracle.iter()) {
            prop_assert!((a.0 - b.0).abs() <= 1e-8 * b.0.max(h), "node {} vs {}", a.0, b.0);
            prop_assert!((a.1 - b.1).abs() <= 1e-8 * b.1, "weight {} vs {}", a.1, b.1);
        }
    }

    #[test]
    fn tridiag_matches_dense_jacobi(
        diag in prop::collection::vec(-10.0f64..10.0, 1..=50),
        seed in prop::collection::vec(-5.0f64..5.0, 50),
    ) {
        let n = diag.len();
        let off: Vec<f64> = seed[..n - 1].to_vec();
        let mut dense = vec![vec![0.0; n]; n];
        for i in 0..n {
            dense[i][i] = diag[i];
            if i + 1 < n {
                dense[i][i + 1] = off[i];
                dense[i + 1][i] = off[i];
            }
        }
        let norm = (0..n).map(|i| dense[i].iter().map(|v| v.abs()).sum::<f64>()).fold(0.0, f64::max);
        let expected = dense_jacobi_eigenvalues(dense);
        let got = tridiag_eigen(&diag, &off).unwrap();
        for (a, b) in got.eigenvalues.iter().zip(&expected) {
            prop_assert!((a - b).abs() <= 1e-10 * norm.max(1.0));
        }
        let sq: f64 = got.first_components.iter().map(|c| c * c).sum();
        prop_assert!((sq - 1.0).abs() < 1e-12);
        prop_assert!(got.first_components.iter().all(|&c| c >= 0.0));
    }

    #[test]
    fn normalized_coeffs_stay_finite(hs in 1e-3f64..100.0, frac in 0.0f64..1.0) {
        let n_max = (1e4 / hs).min(1e6);
        let n = (frac * n_max) as usize;
        let measure = MeasureSpec::bosonic(1.0, hs).unwrap();
        let (a, b) = normalized_coeffs(n, &measure).unwrap();
        prop_assert!(a.is_finite() && a > 0.0);
        prop_assert!(b.is_finite() && b > 0.0);
    }

    #[test]
    fn lattice_orthonormality(hs in 0.3f64..5.0) {
        const DEG: usize = 12;
        let tau = Tau::from_hs(hs).unwrap();
        let mut gram = vec![vec![0.0; DEG + 1]; DEG + 1];
        let end = (60.0 / hs) as usize + 40 * DEG;
        for m in 0..end {
            let p = mdl_orthonormal_lattice_values(DEG, m, tau);
            let w = if m == 0 { 0.5 } else { tau.recip_pow(m) };
            for i in 0..=DEG {
                for j in 0..=DEG {
                    gram[i][j] += w * p[i] * p[j];
                }
            }
        }
        for i in 0..=DEG {
            for j in 0..=DEG {
                let target = if i == j { 1.0 } else { 0.0 };
                prop_assert!((gram[i][j] - target).abs() < 1e-10, "({}, {}) {}", i, j, gram[i][j]);
            }
        }
    }
}

#[test]
fn dl_polynomials_are_orthogonal_without_half_weight() {
    const DEG: usize = 10;
    for hs in [0.1, 0.5, 1.0] {
        let tau = Tau::from_hs(hs).unwrap();
        // <L_n, L_n> = 1 / (tau^{n-1} (tau - 1))
        let norm = |n: usize| tau.recip_pow(n) / tau.one_minus_recip();
        let end = (80.0 / hs) as usize + 60 * DEG;
        for i in 0..=DEG {
            for j in 0..=i {
                let ip = compensated_sum((0..end).map(|n| {
                    tau.recip_pow(n) * dl_eval(i, n, tau).unwrap() * dl_eval(j, n, tau).unwrap()
                }));
                let scaled = ip / (norm(i) * norm(j)).sqrt();
                let target = if i == j { 1.0 } else { 0.0 };
                assert!((scaled - target).abs() < 1e-9, "hs={hs} ({i},{j}) {scaled}");
            }
        }
    }
}

#[test]
fn mdl_is_dl_plus_lower_mdl_terms() {
    // L_n' = L_n + u^n (1 - u) sum_{i<n} L_i' / (1 + u^{i+1})
    for hs in [0.1, 0.5, 1.0] {
        let tau = Tau::from_hs(hs).unwrap();
        let u = tau.recip();
        for n in 0..=10usize {
            for x in 0..=15usize {
                let tail: f64 = (0..n)
                    .map(|i| mdl_eval(i, x as f64, tau) / (1.0 + u.powi(i as i32 + 1)))
                    .sum();
                let rhs =
                    dl_eval(n, x, tau).unwrap() + tau.recip_pow(n) * tau.one_minus_recip() * tail;
                let lhs = mdl_eval(n, x as f64, tau);
                assert!(
                    (lhs - rhs).abs() <= 1e-10 * (1.0 + lhs.abs()),
                    "hs={hs} n={n} x={x}: {lhs} vs {rhs}"
                );
            }
        }
    }
}

#[test]
fn leading_coefficient_from_finite_differences() {
    // The n-th forward difference of a degree-n polynomial on the integers is
    // n! times its leading coefficient, here (1/tau - 1)^n / n!.
    for tau in [E.powf(0.5), E, E.powi(2)] {
        let t = Tau::new(tau).unwrap();
        for n in 1..=8usize {
            let mut diffs: Vec<f64> = (0..=n).map(|x| mdl_eval(n, x as f64, t)).collect();
            for _ in 0..n {
                diffs = diffs.windows(2).map(|w| w[1] - w[0]).collect();
            }
            let expected = (t.recip() - 1.0).powi(n as i32);
            assert!(
                ((diffs[0] - expected) / expected).abs() < 1e-8,
                "tau={tau} n={n}: {} vs {expected}",
                diffs[0]
            );
        }
    }
}

#[test]
fn nodes_sit_above_their_lattice_points_and_at_least_h_apart() {
    let grid: Vec<f64> = (0..40)
        .map(|i| 0.05 + (4.0 - 0.05) * i as f64 / 39.0)
        .collect();
    for n in [1, 2, 5, 10, 25, 50] {
        for &hs in &grid {
            let measure = MeasureSpec::bosonic(hs, 1.0).unwrap();
            let rule = build_rule(n, &measure).unwrap();
            let h = measure.h();
            let x = rule.nodes();
            assert!(x[0] > 0.0);
            for (k, &xk) in x.iter().enumerate() {
                let kh = k as f64 * h;
                assert!(xk >= kh - 4.0 * f64::EPSILON * kh, "N={n} hs={hs} k={k}");
            }
            for k in 1..n {
                let slack = 8.0 * f64::EPSILON * x[k];
                assert!(
                    x[k] - x[k - 1] >= h - slack,
                    "N={n} hs={hs} k={k}: gap {}",
                    (x[k] - x[k - 1]) / h
                );
            }
        }
    }
}

#[test]
fn smallest_node_approaches_origin_as_tau_grows() {
    let x0 = |hs: f64| {
        build_rule(10, &MeasureSpec::bosonic(hs, 1.0).unwrap())
            .unwrap()
            .nodes()[0]
    };
    let (a, b, c) = (x0(1.0), x0(2.0), x0(4.0));
    assert!(c < b && b < a, "{a} {b} {c}");
}

#[test]
fn cosine_error_is_non_increasing_within_noise() {
    let measure = MeasureSpec::bosonic(1.0, 1.6).unwrap();
    let f = Summand::full(|x: f64| x.cos() * (-1.6 * x).exp()).with_zero_limit(1.0);
    let q = (-1.6f64).exp();
    let reference = (1.0 - q * 1f64.cos()) / (1.0 - 2.0 * q * 1f64.cos() + q * q) - 0.5;
    let errs: Vec<f64> = [2, 4, 8, 16]
        .iter()
        .map(|&n| (mdl_sum(&f, &measure, n).unwrap() - reference).abs())
        .collect();
    for w in errs.windows(2) {
        assert!(w[1] <= 2.0 * w[0].max(f64::EPSILON), "{errs:?}");
    }
}

#[test]
fn polynomial_tail_converges_for_any_rule_rate() {
    let measure = MeasureSpec::bosonic(0.5, 2.0).unwrap();
    let f = Summand::full(|x: f64| (-2.0 * x).exp() / ((1.0 + x) * (1.0 + x))).with_zero_limit(1.0);
    let reference = brute_force_sum(&f, &measure, 1e-15).unwrap().value;
    for s in [1.0, 2.0, 4.0] {
        let errs: Vec<f64> = [4, 8, 16, 32]
            .iter()
            .map(|&n| (mdl_sum(&f, &measure.with_s(s).unwrap(), n).unwrap() - reference).abs())
            .collect();
        assert!(errs[3] < errs[0], "s={s}: {errs:?}");
        assert!(errs[3] < 1e-6 * reference, "s={s}: {errs:?}");
    }
}

#[test]
fn recurrence_scales_with_h() {
    let tau = Tau::from_hs(0.7).unwrap();
    for h in [0.1, 1.0, 3.5] {
        let measure = MeasureSpec::bosonic(h, 0.7 / h).unwrap();
        for n in [0, 3, 12] {
            let (a, b) = normalized_coeffs(n, &measure).unwrap();
            let (a0, b0) = normalized_coeffs_tau(n, tau);
            assert!((a - a0).abs() <= 1e-14 * a0 && (b - b0).abs() <= 1e-14 * b0);
        }
    }
}
