//! Reference figures reproduced end to end.

mod common;

use common::*;
use valforme_core::dynamics::{run_okishio, Perturbation};
use valforme_core::linalg::{dominant_eigenpair, solve_linear, Matrix};
use valforme_core::model::{check_demand, derive_coefficients, organic_composition};
use valforme_core::solver::*;

fn solved(table: &valforme_core::model::EconomyTable, k_total: f64, cons: &ConstraintSet) -> TransformationSolution {
    let c = derive_coefficients(table).unwrap();
    let sol = solve(&c, k_total, cons).unwrap();
    sol.check(&c).unwrap();
    sol
}

#[test]
fn two_branch_rate_prices_and_capitals() {
    let sol = solved(&two_branch(2.0 / 3.0), 715.0, &ConstraintSet::new());
    assert!(close(sol.r_star, 0.193146313178, 1e-9));
    assert!(all_close(&sol.x, &[1.071157382, 0.902666912], 1e-8));
    assert!(all_close(&sol.k, &[430.565661462, 284.434338538], 1e-7));
    assert!(sol.z_at_solution.abs() <= 1e-13);
}

#[test]
fn two_branch_price_system_solves_to_transformation_coefficients() {
    let c = derive_coefficients(&two_branch(2.0 / 3.0)).unwrap();
    let sol = find_r_star(&c, 715.0, &ConstraintSet::new()).unwrap();
    let (a, b) = assemble_price_system(&c, sol.r_star, &[]);
    let x = solve_linear(&a, &b).unwrap();
    assert!(all_close(&x, &[1.071157382, 0.902666912], 1e-8));
}

#[test]
fn three_branch_with_wage_branch_fixed_at_300() {
    let t = three_branch();
    let sol = solved(&t, t.total_capital(), &ConstraintSet::new().fix(2, 300.0));
    assert!(close(sol.r_star, 0.286831548657402, 1e-11));
    assert!(all_close(&sol.x, &[1.197076827, 0.912705477, 0.988324298], 1e-8));
    assert!(all_close(&sol.k, &[332.67530, 367.32538, 300.0], 1e-5));
    assert!(all_close(&sol.kp, &[332.96549, 366.9866, 300.049], 1e-3));
}

#[test]
fn three_branch_price_system_at_known_rate() {
    let c = derive_coefficients(&three_branch()).unwrap();
    let x = solve_prices(&c, 0.286831548657402, &[]).unwrap();
    assert!(all_close(&x, &[1.197076827, 0.912705477, 0.988324298], 1e-8));
}

#[test]
fn three_branch_with_wage_branch_fixed_at_367() {
    let t = three_branch();
    let sol = solved(&t, t.total_capital(), &ConstraintSet::new().fix(2, 367.9263));
    assert!(all_close(&sol.k[..2], &[305.5184211, 326.5559609], 1e-7));
    assert!(all_close(&sol.x, &[1.19704086, 0.912672947, 0.98829028], 1e-8));
    assert!(close(sol.r_star, 0.286828108, 1e-9));
}

#[test]
fn eigen_rate_of_circulating_economy() {
    let c = derive_coefficients(&three_branch_circulating([1.0; 3])).unwrap();
    let a = Matrix::from_fn(3, |i, j| c.u[(i, j)] / c.w[i]);
    let (lambda, _) = dominant_eigenpair(&a).unwrap();
    assert!(close(1.0 / lambda - 1.0, 0.38795164275602, 1e-11));
}

#[test]
fn circulating_economy_rate_is_allocation_independent() {
    let t = three_branch_circulating([1.0; 3]);
    let k_total = t.total_capital();
    let a = solved(&t, k_total, &ConstraintSet::new().fix(2, 230.0));
    let b = solved(&t, k_total, &ConstraintSet::new().fix(2, 300.0));
    assert!(close(a.r_star, 0.38795164275602, 1e-11));
    assert!(all_close(&a.x, &[1.066812858, 0.961375916, 1.005487667], 1e-8));
    assert!(all_close(&b.x, &[1.066812862, 0.961375919, 1.00548767], 1e-8));
    assert!(all_close(&a.k[..2], &[192.7849340, 331.3620979], 1e-6));
    assert!(all_close(&b.k[..2], &[161.6903969, 292.4566350], 1e-6));
    assert_eq!(a.r_star, b.r_star);
    assert!(close(a.sum_surplus_value(), 292.5725799, 1e-6));
    assert!(close(a.sum_surplus_value(), b.sum_surplus_value(), 1e-9 * a.sum_surplus_value()));
}

#[test]
fn surplus_in_one_branch_only() {
    let t = three_branch_circulating([1.0, 0.0, 0.0]);
    let sol = solved(&t, 754.147032, &ConstraintSet::new().fix(2, 300.0));
    assert!(close(sol.r_star, 0.048862779328106, 1e-12));
    assert!(all_close(&sol.x, &[0.80075591, 1.052914425, 1.0476145], 1e-7));
    assert!(all_close(&sol.k, &[122.8322188, 331.3148132, 300.0], 1e-6));
}

#[test]
fn no_surplus_two_branch_allocation() {
    let c = derive_coefficients(&two_branch(0.0)).unwrap();
    let sol = solve_no_surplus(&c, 715.0).unwrap();
    assert!(all_close(&sol.k, &[394.318937, 320.681063], 1e-6));
    assert_eq!(sol.x, vec![1.0, 1.0]);
    let report = check_demand(&two_branch(0.0), Some(&sol)).unwrap();
    for s in report {
        assert!(s.value.abs() <= 1e-9 && s.price.unwrap().abs() <= 1e-9);
    }
}

#[test]
fn no_surplus_three_branch_allocation() {
    let t = three_branch_circulating([0.0; 3]);
    let sol = solved(&t, t.total_capital(), &ConstraintSet::new());
    assert!(all_close(&sol.k, &[153.33077165, 306.66114982, 294.15511053], 1e-6));
}

#[test]
fn no_luxury_without_profit() {
    let t = five_branch_machine(0.0);
    let sol = solved(&t, 1000.0, &ConstraintSet::new());
    assert!(sol.k[4].abs() <= 1e-9 * 1000.0);
    let w: Vec<f64> = sol.value_table.production.clone();
    assert!(all_close(&w[..4], &[25.811574, 151.210962, 302.3725173, 288.3007806], 1e-6));
}

#[test]
fn innovation_base_economy() {
    let t = five_branch_innovation();
    let sol = solved(&t, 933.5, &ConstraintSet::new().fix(2, 242.0).fix(3, 358.0).fix(4, 5.0));
    assert!(close(sol.r_star, 0.2614634020, 1e-9));
    assert!(close(sol.x[4], 0.63389463, 1e-8));
    assert!(all_close(&sol.k[..2], &[100.7654039, 227.7345961], 1e-6));
    let report = check_demand(&t, Some(&sol)).unwrap();
    assert!(report.iter().all(|s| s.value >= -1e-9 && s.price.unwrap() >= -1e-9));
}

#[test]
fn innovation_phases() {
    let frozen = ConstraintSet::new().fix(2, 242.0).fix(3, 358.0).fix(4, 5.0);
    let p = Perturbation { branch: 1, new_d: 0.0608, new_v: 0.112 };
    let rep = run_okishio(&five_branch_innovation(), 933.5, &p, &frozen).unwrap();
    assert!(close(rep.base.r_star, 0.2614634020, 1e-9));
    assert!(close(rep.transient_profit, 61.0508, 1e-3));
    assert!(close(rep.transient_rate, 0.26822, 1e-5));
    assert!(close(rep.perturbed.r_star, 0.2607298905038033, 1e-10));
    assert!(rep.ordering_holds);
}

#[test]
fn machine_model_with_value_reproduction() {
    let cons = ConstraintSet::new().reproduce(0, Space::Value).reproduce(1, Space::Value).reproduce(2, Space::Value);
    let sol = solved(&five_branch_machine(1.0), 1000.0, &cons);
    assert!(close(sol.r_star, 0.28681293, 1e-8));
    assert!(all_close(&sol.x, &[1.09803952, 1.196933541, 0.912579585, 0.988201294, 2.180359219], 1e-8));
    assert!(all_close(&sol.k, &[28.27324963, 218.4665725, 233.4280629, 516.1034357, 3.728679349], 1e-6));
}

#[test]
fn machine_model_with_price_reproduction() {
    let cons = ConstraintSet::new().reproduce(0, Space::Price).reproduce(1, Space::Price).reproduce(2, Space::Price);
    let sol = solved(&five_branch_machine(1.0), 1000.0, &cons);
    assert!(close(sol.r_star, 0.286813352, 1e-8));
    assert!(all_close(&sol.k, &[25.79074572, 218.2685841, 233.2166525, 517.9696559, 4.754361821], 1e-6));
    assert!(all_close(&sol.x, &[1.098043935, 1.196937949, 0.912583572, 0.988205463, 2.180362816], 1e-8));
}

#[test]
fn luxury_branch_without_fixed_capital() {
    let base = three_branch_circulating([1.0; 3]).with_k_total(1000.0);
    let res = build_bortkiewicz(&base, None).unwrap();
    let sol = &res.solution;
    assert!(close(sol.r_star, 0.387951642, 1e-8));
    assert!(close(sol.x[3], 1.0, 1e-9));
    assert!(all_close(&sol.k, &[156.9355618, 282.4836177, 281.0670172, 279.5138033], 1e-5));
    let report = check_demand(&res.table, Some(sol)).unwrap();
    // the luxury good is consumed out of surplus value only
    assert!(report[..3].iter().all(|s| s.value.abs() <= 1e-9 * 1000.0 && s.price.unwrap().abs() <= 1e-9 * 1000.0));
}

#[test]
fn luxury_branch_with_fixed_capital() {
    let base = three_branch().with_k_total(1000.0);
    let res = build_bortkiewicz(&base, Some(2.233404974 / 255.5311677)).unwrap();
    let sol = &res.solution;
    assert!(res.iterations <= BORTKIEWICZ_MAX_ITER);
    assert!(close(sol.x[3], 1.0, 1e-9));
    assert!(all_close(&sol.x, &[1.197051853, 0.91268289, 0.988300678, 1.0], 1e-8));
    assert!(all_close(&sol.k, &[233.6476244, 252.4165841, 258.4046239, 255.5311677], 1e-6));
}

#[test]
fn arbitrary_luxury_branch_is_not_unit_priced() {
    let t = four_branch_luxury();
    let sol = solve_marx_simple_reproduction(&t, t.total_capital(), Space::Value).unwrap();
    let c = derive_coefficients(&t).unwrap();
    sol.check(&c).unwrap();
    assert!(close(sol.value_table.production[0], 166.0836899, 1e-6));
    assert!(all_close(&sol.value_table.production, &[166.0836899, 328.5690061, 537.194681, 29.50365094], 1e-6));
    assert!((sol.x[3] - 1.0).abs() > 1e-3);
}

#[test]
fn organic_composition_of_five_equal_capitals() {
    let cols: [&[f64]; 2] = [&[80.0, 70.0, 60.0, 85.0, 95.0], &[20.0, 30.0, 40.0, 15.0, 5.0]];
    let t = from_columns(&["I", "II", "III", "IV", "V"], vec![0.0; 5], &cols, vec![1.0; 5], 1, 1);
    let co = organic_composition(&t, None).unwrap();
    assert!(close(co.value_co, 390.0 / 110.0, 1e-14));
    assert!(close(t.average_internal_rate(), 0.22, 1e-15));
}
