//! Property tests of the model, kernel and solver invariants.

mod common;

use common::*;
use proptest::prelude::*;
use valforme_core::linalg::{determinant, dominant_eigenpair, solve_linear, Matrix};
use valforme_core::model::{derive_coefficients, EconomyTable};
use valforme_core::solver::*;

fn table_strategy(n: usize, with_fixed: bool) -> impl Strategy<Value = EconomyTable> {
    let fixed = if with_fixed { prop::collection::vec(10.0f64..200.0, n).boxed() } else { Just(vec![0.0; n]).boxed() };
    (fixed, prop::collection::vec(5.0f64..150.0, n * n), 0.3f64..1.5, 2u32..=10).prop_map(move |(f, u, e, cycles)| {
        let labels: Vec<String> = (1..=n).map(|i| format!("b{i}")).collect();
        let labels: Vec<&str> = labels.iter().map(String::as_str).collect();
        let columns: Vec<Vec<f64>> = (0..n).map(|j| (0..n).map(|i| u[i * n + j]).collect()).collect();
        let columns: Vec<&[f64]> = columns.iter().map(Vec::as_slice).collect();
        from_columns(&labels, f, &columns, vec![e; n], cycles, n - 1)
    })
}

fn closing(t: &EconomyTable) -> ConstraintSet {
    let n = t.len();
    let scale = t.total_capital() / t.capitals().iter().sum::<f64>();
    (2..n).fold(ConstraintSet::new(), |cons, b| cons.fix(b, t.capital(b) * scale))
}

fn matrix_strategy(n: usize) -> impl Strategy<Value = Matrix> {
    prop::collection::vec(-10.0f64..10.0, n * n).prop_map(move |v| Matrix::from_fn(n, |i, j| v[i * n + j]))
}

/// Largest real root of the characteristic polynomial of a 3x3 matrix, by bisection.
fn characteristic_root(a: &Matrix) -> f64 {
    let tr = a[(0, 0)] + a[(1, 1)] + a[(2, 2)];
    let minors = a[(0, 0)] * a[(1, 1)] - a[(0, 1)] * a[(1, 0)] + a[(0, 0)] * a[(2, 2)] - a[(0, 2)] * a[(2, 0)]
        + a[(1, 1)] * a[(2, 2)] - a[(1, 2)] * a[(2, 1)];
    let det = a[(0, 0)] * (a[(1, 1)] * a[(2, 2)] - a[(1, 2)] * a[(2, 1)]) - a[(0, 1)] * (a[(1, 0)] * a[(2, 2)] - a[(1, 2)] * a[(2, 0)])
        + a[(0, 2)] * (a[(1, 0)] * a[(2, 1)] - a[(1, 1)] * a[(2, 0)]);
    let p = |l: f64| ((l - tr) * l + minors) * l - det;
    let bound = 1.0 + tr.abs() + minors.abs() + det.abs();
    let step = bound * 1e-6;
    let mut hi = bound;
    while p(hi - step) > 0.0 {
        hi -= step;
    }
    let mut lo = hi - step;
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if p(mid) > 0.0 {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    0.5 * (lo + hi)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn coefficients_are_row_scale_invariant(t in table_strategy(3, true), branch in 0usize..3, factor in 0.01f64..100.0) {
        let a = derive_coefficients(&t).unwrap();
        let b = derive_coefficients(&t.scale_branch(branch, factor)).unwrap();
        for j in 0..3 {
            prop_assert!(close(a.u[(branch, j)], b.u[(branch, j)], 1e-15));
        }
        prop_assert!(close(a.f[branch], b.f[branch], 1e-15));
        prop_assert!(close(a.w[branch], b.w[branch], 1e-14));
    }

    #[test]
    fn coefficients_survive_reconstruction(t in table_strategy(4, true), k in prop::collection::vec(1.0f64..500.0, 4)) {
        let c = derive_coefficients(&t).unwrap();
        let rebuilt = EconomyTable::from_coefficients(&c, t.branch_names.clone(), &k).unwrap();
        let again = derive_coefficients(&rebuilt).unwrap();
        for i in 0..4 {
            prop_assert!((again.f[i] - c.f[i]).abs() <= 1e-14 * c.f[i].max(1e-300));
            prop_assert!((again.w[i] - c.w[i]).abs() <= 1e-14 * c.w[i]);
            for j in 0..4 {
                prop_assert!((again.u[(i, j)] - c.u[(i, j)]).abs() <= 1e-14 * c.u[(i, j)]);
            }
        }
    }

    #[test]
    fn capital_shares_sum_to_one(t in table_strategy(5, true)) {
        let c = derive_coefficients(&t).unwrap();
        for i in 0..5 {
            prop_assert!((c.f[i] + c.u.row_sum(i) - 1.0).abs() <= 1e-14);
            prop_assert!((c.w[i] - (c.d[i] + c.u.row_sum(i) + c.pl[i])).abs() <= 1e-15);
        }
    }

    #[test]
    fn determinant_is_multiplicative(a in matrix_strategy(4), b in matrix_strategy(4)) {
        let lhs = determinant(&a.mul(&b));
        let rhs = determinant(&a) * determinant(&b);
        prop_assert!((lhs - rhs).abs() <= 1e-10 * rhs.abs().max(1e-3));
    }

    #[test]
    fn perron_root_matches_characteristic_polynomial(v in prop::collection::vec(0.01f64..5.0, 9)) {
        let a = Matrix::from_fn(3, |i, j| v[i * 3 + j]);
        let (lambda, x) = dominant_eigenpair(&a).unwrap();
        prop_assert!((lambda - characteristic_root(&a)).abs() <= 1e-12 * lambda.max(1.0));
        prop_assert!(x.iter().all(|&c| c > 0.0));
    }

    #[test]
    fn solutions_meet_residual_and_profit_bounds(t in prop_oneof![table_strategy(2, true), table_strategy(3, true)]) {
        let c = derive_coefficients(&t).unwrap();
        let cons = closing(&t);
        if let Ok(sol) = solve(&c, t.total_capital(), &cons) {
            prop_assert!(sol.check(&c).is_ok(), "{:?}", sol.check(&c));
            prop_assert!(sol.r_per_branch.iter().all(|&r| r == sol.r_star));
        }
    }

    #[test]
    fn z_changes_sign_downward_at_the_root(t in prop_oneof![table_strategy(2, true), table_strategy(3, true)]) {
        let c = derive_coefficients(&t).unwrap();
        let kt = t.total_capital();
        let cons = closing(&t);
        if let Ok(sol) = solve(&c, kt, &cons) {
            let z = |r: f64| z_at_rate(&c, kt, &cons, r).unwrap();
            prop_assert!(z(sol.r_star - 1e-4) > 0.0);
            prop_assert!(z(sol.r_star + 1e-4) < 0.0);
        }
    }

    #[test]
    fn price_table_read_as_values_is_neutral(t in prop_oneof![table_strategy(2, true), table_strategy(3, true), table_strategy(3, false)]) {
        let c = derive_coefficients(&t).unwrap();
        let cons = closing(&t);
        if let Ok(sol) = solve(&c, t.total_capital(), &cons) {
            let rep = neutral_element_check(&c, &sol, &cons);
            prop_assert!(rep.passed, "{rep:?}");
            prop_assert!(rep.max_x_deviation <= 1e-9);
        }
    }

    #[test]
    fn offsets_are_carried_exactly(t in table_strategy(3, true), d in 0.0f64..0.01) {
        let c = derive_coefficients(&t).unwrap();
        let offsets = vec![d, 0.0, -d];
        let cons = closing(&t).with_offsets(offsets.clone()).with_reference(1);
        if let Ok(sol) = solve(&c, t.total_capital(), &cons) {
            for i in 0..3 {
                prop_assert_eq!(sol.r_per_branch[i], sol.r_star + offsets[i]);
            }
            prop_assert!(sol.check(&c).is_ok());
        }
    }

    #[test]
    fn circulating_surplus_is_allocation_invariant(t in table_strategy(3, false)) {
        let c = derive_coefficients(&t).unwrap();
        let kt = t.total_capital();
        let Ok(first) = solve(&c, kt, &closing(&t)) else { return Ok(()); };
        let Some(zf) = &first.zero_fixed else { return Err(TestCaseError::fail("eigen path expected")); };
        let mut seen = 0;
        for share in [0.1, 0.2, 0.3, 0.4, 0.5, 0.6] {
            if let Ok(sol) = solve(&c, kt, &ConstraintSet::new().fix(2, share * kt)) {
                seen += 1;
                prop_assert!((sol.r_star - zf.eigen_rate).abs() <= 1e-11);
                let pl = first.sum_surplus_value();
                prop_assert!((sol.sum_surplus_value() - pl).abs() <= 1e-9 * pl);
                prop_assert!((sol.sum_profit() - pl).abs() <= 1e-9 * pl);
            }
        }
        prop_assume!(seen >= 5);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    #[test]
    fn linear_solve_residual_is_bounded(n in 1usize..=8, seed in prop::collection::vec(-10.0f64..10.0, 72)) {
        let a = Matrix::from_fn(n, |i, j| seed[i * n + j] + if i == j { 25.0 } else { 0.0 });
        let b: Vec<f64> = seed[64..64 + n].to_vec();
        let x = solve_linear(&a, &b).unwrap();
        let ax = a.mul_vec(&x);
        let res = ax.iter().zip(&b).fold(0.0f64, |m, (p, q)| m.max((p - q).abs()));
        let xn = x.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        let bn = b.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        prop_assert!(res <= 1e-10 * (a.norm_inf() * xn + bn));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn two_branch_no_surplus_closed_form(f in prop::collection::vec(0.0f64..200.0, 2), u in prop::collection::vec(5.0f64..300.0, 4), n in 1u32..12) {
        let t = from_columns(&["1", "2"], f, &[&[u[0], u[1]], &[u[2], u[3]]], vec![0.0; 2], n, 1);
        let c = derive_coefficients(&t).unwrap();
        let sol = solve_no_surplus(&c, 1.0).unwrap();
        let k1 = two_branch_closed_form(&c).unwrap();
        prop_assert!((sol.k[0] - k1).abs() <= 1e-12);
    }
}

#[test]
fn wage_branch_sweep_stays_on_both_equalities() {
    let t = three_branch();
    let c = derive_coefficients(&t).unwrap();
    let kt = t.total_capital();
    let mut rates = Vec::new();
    for step in 0..=20 {
        let k3 = 250.0 + 10.0 * step as f64;
        let sol = solve(&c, kt, &ConstraintSet::new().fix(2, k3)).unwrap();
        sol.check(&c).unwrap();
        assert!((sol.k.iter().sum::<f64>() - kt).abs() <= 1e-9 * kt);
        rates.push(sol.r_star);
    }
    assert!(rates.windows(2).all(|w| w[0] != w[1]));
}

#[test]
fn circulating_sweep_has_constant_rate() {
    let t = three_branch_circulating([1.0; 3]);
    let c = derive_coefficients(&t).unwrap();
    let rates: Vec<f64> = (0..10)
        .map(|s| solve(&c, t.total_capital(), &ConstraintSet::new().fix(2, 200.0 + 15.0 * s as f64)).unwrap().r_star)
        .collect();
    assert!(rates.iter().all(|&r| r == rates[0]));
}
