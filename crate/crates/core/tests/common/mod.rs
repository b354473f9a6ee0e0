//! Economy tables used across the integration tests.

#![allow(dead_code)]

use valforme_core::linalg::Matrix;
use valforme_core::model::EconomyTable;

pub const E_COL: [f64; 3] = [19.401807, 19.949964, 116.355582];
pub const C_COL: [f64; 3] = [38.803467, 39.899885, 232.711164];
pub const V_COL: [f64; 3] = [24.94517, 47.879993, 214.2];
pub const AMORTIZATION: [f64; 3] = [8.315044, 1.196996, 15.073325];

fn names(list: &[&str]) -> Vec<String> {
    list.iter().map(|s| s.to_string()).collect()
}

/// Builds a table from absolute columns: `columns[j][i]` is commodity `j` used by branch `i`.
pub fn from_columns(labels: &[&str], fixed: Vec<f64>, columns: &[&[f64]], e: Vec<f64>, n: u32, wage: usize) -> EconomyTable {
    let size = labels.len();
    let inputs = Matrix::from_fn(size, |i, j| columns.get(j).map_or(0.0, |col| col[i]));
    EconomyTable::new(names(labels), fixed, inputs, e, n, wage).unwrap()
}

/// Two branches, n = 5, uniform exploitation rate `e`.
pub fn two_branch(e: f64) -> EconomyTable {
    from_columns(&["C", "V"], vec![125.0, 100.0], &[&[200.0, 80.0], &[90.0, 120.0]], vec![e; 2], 5, 1)
}

/// Three branches with fixed capital, n = 10.
pub fn three_branch() -> EconomyTable {
    let fixed = AMORTIZATION.iter().map(|d| 10.0 * d).collect();
    from_columns(&["E", "C", "V"], fixed, &[&E_COL, &C_COL, &V_COL], vec![1.0; 3], 10, 2)
}

/// Three branches without fixed capital and per-branch exploitation rates.
pub fn three_branch_circulating(e: [f64; 3]) -> EconomyTable {
    from_columns(&["E", "C", "V"], vec![0.0; 3], &[&E_COL, &C_COL, &V_COL], e.to_vec(), 10, 2)
}

/// Fixed-capital start of the long convergence run: branch 1 holds 100 more fixed capital.
pub fn three_branch_heavy_first() -> EconomyTable {
    let mut fixed: Vec<f64> = AMORTIZATION.iter().map(|d| 10.0 * d).collect();
    fixed[0] += 100.0;
    from_columns(&["E", "C", "V"], fixed, &[&E_COL, &C_COL, &V_COL], vec![1.0; 3], 10, 2)
}

/// Five branches with a machine branch (M) and a luxury branch (L), n = 10.
pub fn five_branch_innovation() -> EconomyTable {
    from_columns(
        &["M", "E", "C", "V", "L"],
        vec![100.0, 150.0, 50.0, 30.0, 20.0],
        &[&[0.0; 5], &[30.0, 20.0, 35.0, 32.0, 0.5], &[60.0, 50.0, 65.0, 70.0, 1.0], &[40.0, 30.0, 80.0, 60.0, 10.0]],
        vec![1.0, 1.0, 1.0, 1.0, 2.0],
        10,
        3,
    )
    .with_machine(0)
    .unwrap()
}

/// Four branches without fixed capital, the last one unconsumed.
pub fn four_branch_luxury() -> EconomyTable {
    from_columns(
        &["E", "C", "V", "L"],
        vec![0.0; 4],
        &[&[19.401807, 19.949964, 116.355582, 10.0], &[38.803467, 39.899885, 232.711164, 15.0], &[15.0, 47.879993, 215.0, 8.0]],
        vec![1.0; 4],
        10,
        2,
    )
}

/// Five branches with a machine branch and a luxury branch, uniform rate `e`, K_T = 1000.
pub fn five_branch_machine(e: f64) -> EconomyTable {
    let fixed = [6.665533413, 10.0, 2.0, 4.222, 18.888].iter().map(|d| 10.0 * d).collect();
    from_columns(
        &["M", "E", "C", "V", "L"],
        fixed,
        &[
            &[0.0; 5],
            &[31.12982091, 23.334, 33.334, 32.6, 0.38],
            &[62.21764476, 46.666, 66.666, 65.18, 0.74],
            &[39.9972002, 30.0, 80.0, 60.0, 10.0],
        ],
        vec![e; 5],
        10,
        3,
    )
    .with_machine(0)
    .unwrap()
    .with_k_total(1000.0)
}

pub fn close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol
}

pub fn all_close(a: &[f64], b: &[f64], tol: f64) -> bool {
    a.len() == b.len() && a.iter().zip(b).all(|(p, q)| close(*p, *q, tol))
}
