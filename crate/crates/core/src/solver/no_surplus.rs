use alloc::vec;
use alloc::vec::Vec;

use super::allocation::{first_infeasible, reproduction_row};
use super::{Method, ReproductionConstraint, SolveError, Space, TransformationSolution};
use crate::linalg::{solve_linear, Matrix};
use crate::model::TechCoefficients;

/// Unique allocation of an economy without surplus value, at `x = 1` and `r = 0`.
///
/// The `N` demand rows sum to zero identically, so one is dropped: the wage
/// row first, then the others in index order; the first nonsingular system wins.
pub fn solve_no_surplus(c: &TechCoefficients, k_total: f64) -> Result<TransformationSolution, SolveError> {
    let n = c.len();
    if c.has_surplus_value() {
        return Err(SolveError::WrongPath("surplus value present; the no-surplus solver needs e = 0"));
    }
    let ones = vec![1.0; n];
    let demand: Vec<Vec<f64>> = (0..n)
        .map(|j| reproduction_row(c, &ones, ReproductionConstraint { commodity: j, space: Space::Value }))
        .collect();
    let order = core::iter::once(c.wage_index).chain((0..n).filter(|&j| j != c.wage_index));
    let mut rhs = vec![0.0; n];
    rhs[0] = k_total;
    for dropped in order {
        let rows: Vec<&Vec<f64>> = (0..n).filter(|&j| j != dropped).map(|j| &demand[j]).collect();
        let a = Matrix::from_fn(n, |i, j| if i == 0 { 1.0 } else { rows[i - 1][j] });
        let Ok(k) = solve_linear(&a, &rhs) else {
            continue;
        };
        if let Some(branch) = first_infeasible(&k, k_total) {
            return Err(SolveError::Infeasible { branch, capital: k[branch] });
        }
        return Ok(TransformationSolution::assemble(c, ones, k, 0.0, vec![0.0; n], Method::NoSurplus));
    }
    Err(SolveError::NoUniqueAllocation)
}

/// Share of branch 1 in a two-branch no-surplus economy with imported fixed
/// capital: `k_1 = u_21 / (u_12 + u_21)`.
pub fn two_branch_closed_form(c: &TechCoefficients) -> Option<f64> {
    if c.len() != 2 || c.machine_index.is_some() || c.has_surplus_value() {
        return None;
    }
    let (u12, u21) = (c.u[(0, 1)], c.u[(1, 0)]);
    (u12 + u21 > 0.0).then(|| u21 / (u12 + u21))
}
