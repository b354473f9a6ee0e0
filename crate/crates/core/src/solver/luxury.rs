use alloc::string::String;
use alloc::vec::Vec;

use super::rstar::find_r_star;
use super::zero_fixed::{eigen_rate, solve_zero_fixed};
use super::{solve, ConstraintSet, SolveError, Space, TransformationSolution};
use crate::linalg::Matrix;
use crate::model::{derive_coefficients, EconomyTable, TechCoefficients};

/// Iteration cap of the fixed-capital luxury construction.
pub const BORTKIEWICZ_MAX_ITER: usize = 50;
/// Relative change of `K_wage` and `K_L` at which the construction stops.
const BORTKIEWICZ_RTOL: f64 = 1e-12;

/// Four-branch economy with a constructed luxury branch and its solution.
#[derive(Clone, Debug, PartialEq)]
pub struct BortkiewiczResult {
    pub table: EconomyTable,
    pub solution: TransformationSolution,
    /// Last solve of the three base branches.
    pub base_solution: TransformationSolution,
    /// Fixed-point iterations used (0 without fixed capital).
    pub iterations: usize,
}

/// Adds a luxury branch consuming exactly the base economy's surpluses so that
/// every commodity is reproduced in value and in price.
///
/// `d_l` is the luxury branch's amortization per unit of its own capital
/// (`D_L / K_L`, default 0); it is ignored when the base has no fixed capital.
pub fn build_bortkiewicz(base: &EconomyTable, d_l: Option<f64>) -> Result<BortkiewiczResult, SolveError> {
    if base.len() != 3 {
        return Err(SolveError::Unsupported("the luxury construction needs a three-branch base"));
    }
    if base.machine_index.is_some() {
        return Err(SolveError::Unsupported("the luxury construction needs imported fixed capital"));
    }
    if base.e_rates.iter().any(|&e| e != 1.0) {
        return Err(SolveError::Unsupported("the luxury construction assumes unit exploitation rates"));
    }
    let c = derive_coefficients(base)?;
    let k_total = base.total_capital();
    let w = c.wage_index;
    if !c.has_fixed_capital() {
        let (r, _) = eigen_rate(&c)?;
        let k_base = k_total / (1.0 + r);
        let k_wage = r * k_total / c.w[w];
        let base_solution = solve_zero_fixed(&c, k_base, &ConstraintSet::new().fix(w, k_wage))?;
        let table = luxury_table(base, &c, &base_solution.k, 0.0, k_total)?;
        let k_l = table.capital(3);
        let c4 = derive_coefficients(&table)?;
        let solution = solve_zero_fixed(&c4, k_total, &ConstraintSet::new().fix(w, k_wage).fix(3, k_l))?;
        return Ok(BortkiewiczResult { table, solution, base_solution, iterations: 0 });
    }
    let d_l = d_l.unwrap_or(0.0);
    let nc = c.cycles();
    if !(d_l >= 0.0 && nc * d_l < 1.0) {
        return Err(SolveError::InvalidConstraint("luxury amortization share must satisfy 0 <= n d_L < 1".into()));
    }
    let r0 = initial_rate(base, &c, k_total);
    let mut k_l = r0 * k_total / (1.0 + r0);
    let mut k_wage = r0 * k_total / c.w[w];
    for iteration in 1..=BORTKIEWICZ_MAX_ITER {
        let base_solution = find_r_star(&c, k_total - k_l, &ConstraintSet::new().fix(w, k_wage))?;
        let k = &base_solution.k;
        let r = base_solution.r_star;
        let surplus: f64 = (0..3).map(|j| gross_surplus(&c, k, j)).sum();
        let pl: f64 = (0..3).map(|i| c.pl[i] * k[i]).sum();
        let amortization: f64 = (0..3).map(|i| c.d[i] * k[i]).sum();
        let next_l = surplus / (1.0 - nc * d_l);
        let fixed_l = nc * d_l * next_l;
        let next_wage = (pl * (1.0 + r) + r * (fixed_l + amortization)) / c.w[w];
        let settled = (next_wage - k_wage).abs() <= BORTKIEWICZ_RTOL * k_wage.abs()
            && (next_l - k_l).abs() <= BORTKIEWICZ_RTOL * k_l.abs();
        if settled {
            let table = luxury_table(base, &c, k, fixed_l, k_total)?;
            let c4 = derive_coefficients(&table)?;
            let cons = ConstraintSet::new().fix(w, k_wage).fix(3, table.capital(3));
            let solution = find_r_star(&c4, k_total, &cons)?;
            return Ok(BortkiewiczResult { table, solution, base_solution, iterations: iteration });
        }
        k_l = next_l;
        k_wage = next_wage;
    }
    Err(SolveError::NotConverged { iterations: BORTKIEWICZ_MAX_ITER })
}

/// Base rate used to seed the closed-form starting point.
fn initial_rate(base: &EconomyTable, c: &TechCoefficients, k_total: f64) -> f64 {
    let w = c.wage_index;
    let k_wage = base.capital(w) * k_total / base.capitals().iter().sum::<f64>();
    find_r_star(c, k_total, &ConstraintSet::new().fix(w, k_wage))
        .map(|s| s.r_star)
        .unwrap_or_else(|_| base.average_internal_rate())
}

/// `W_j - sum_i U_ij` in value, gross of amortization.
fn gross_surplus(c: &TechCoefficients, k: &[f64], j: usize) -> f64 {
    k[j] * c.w[j] - (0..c.len()).map(|i| k[i] * c.u[(i, j)]).sum::<f64>()
}

fn luxury_table(base: &EconomyTable, c: &TechCoefficients, k: &[f64], fixed_l: f64, k_total: f64) -> Result<EconomyTable, SolveError> {
    let mut names: Vec<String> = base.branch_names.clone();
    names.push("L".into());
    let mut fixed: Vec<f64> = (0..3).map(|i| c.f[i] * k[i]).collect();
    fixed.push(fixed_l);
    let inputs = Matrix::from_fn(4, |i, j| match (i, j) {
        (_, 3) => 0.0,
        (3, j) => gross_surplus(c, k, j),
        (i, j) => c.u[(i, j)] * k[i],
    });
    let table = EconomyTable::new(names, fixed, inputs, alloc::vec![1.0; 4], c.n_cycles, c.wage_index)?;
    Ok(table.with_k_total(k_total))
}

/// Solves a four-branch economy with one luxury commodity, closing the capital
/// system with reproduction of the two non-wage, non-luxury commodities.
pub fn solve_marx_simple_reproduction(table: &EconomyTable, k_total: f64, space: Space) -> Result<TransformationSolution, SolveError> {
    if table.len() != 4 {
        return Err(SolveError::Unsupported("simple reproduction with a luxury branch needs four branches"));
    }
    let luxury: Vec<usize> = (0..4).filter(|&j| table.is_luxury(j)).collect();
    if luxury.len() != 1 {
        return Err(SolveError::Unsupported("exactly one commodity must be unconsumed"));
    }
    let mut cons = ConstraintSet::new();
    for j in (0..4).filter(|&j| j != table.wage_index && j != luxury[0]) {
        cons = cons.reproduce(j, space);
    }
    let c = derive_coefficients(table)?;
    solve(&c, k_total, &cons)
}
