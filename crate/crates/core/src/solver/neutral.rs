use alloc::vec::Vec;

use super::allocation::{reproduction_row, z_absolute};
use super::bracket::{refine, Root};
use super::price::solve_prices;
use super::zero_fixed::eigen_rate;
use super::{ConstraintSet, Method, Space, TransformationSolution};
use crate::linalg::Matrix;
use crate::model::{derive_coefficients, EconomyTable, TechCoefficients};

/// Tolerance on `max |x' - 1|` and on the constraint residuals.
const NEUTRAL_TOL: f64 = 1e-9;

/// Outcome of re-solving a price table read as a value table.
#[derive(Clone, Debug, PartialEq)]
pub struct NeutralReport {
    pub passed: bool,
    pub max_x_deviation: f64,
    pub rate_deviation: f64,
    /// Largest closing-equation residual of the price capitals, relative to total production.
    pub constraint_residual: f64,
    pub x_prime: Vec<f64>,
}

/// Reads the solution's price table as a value table (exploitation rates
/// `S_i / (x_wage V_i)`) and solves it again, holding the allocation at the
/// price capitals, which satisfy both equalities when `x' = 1`.
pub fn neutral_element_check(c: &TechCoefficients, solution: &TransformationSolution, constraints: &ConstraintSet) -> NeutralReport {
    let n = c.len();
    let fail = |x_prime: Vec<f64>| NeutralReport {
        passed: false,
        max_x_deviation: f64::INFINITY,
        rate_deviation: f64::INFINITY,
        constraint_residual: f64::INFINITY,
        x_prime,
    };
    if solution.method == Method::NoSurplus {
        return NeutralReport {
            passed: true,
            max_x_deviation: 0.0,
            rate_deviation: 0.0,
            constraint_residual: 0.0,
            x_prime: alloc::vec![1.0; n],
        };
    }
    let Some(cp) = reinterpret(c, solution) else {
        return fail(Vec::new());
    };
    let kp = &solution.kp;
    let offsets: Vec<f64> = solution.r_per_branch.iter().map(|r| r - solution.r_star).collect();
    let (r_prime, x_prime) = if cp.has_fixed_capital() {
        match rate_root(&cp, kp, &offsets, solution.r_star) {
            Some(found) => found,
            None => return fail(Vec::new()),
        }
    } else {
        let Ok((r, x_unit)) = eigen_rate(&cp) else {
            return fail(Vec::new());
        };
        let pl: f64 = (0..n).map(|i| kp[i] * cp.pl[i]).sum();
        let gain: f64 = (0..n)
            .map(|i| kp[i] * (x_unit[i] * cp.w[i] - (0..n).map(|j| cp.u[(i, j)] * x_unit[j]).sum::<f64>()))
            .sum();
        (r, x_unit.iter().map(|v| v * pl / gain).collect())
    };
    let max_x_deviation = x_prime.iter().fold(0.0, |m: f64, x| m.max((x - 1.0).abs()));
    let scale: f64 = (0..n).map(|i| kp[i] * cp.w[i]).sum();
    let equality_ii: f64 = (0..n).map(|i| kp[i] * cp.w[i] * (1.0 - x_prime[i])).sum();
    let mut constraint_residual = equality_ii.abs() / scale;
    // only price-space balances carry over once prices are read as values
    for &rc in constraints.reproduction.iter().filter(|rc| rc.space == Space::Price) {
        let row = reproduction_row(&cp, &x_prime, rc);
        let dot: f64 = row.iter().zip(kp).map(|(a, b)| a * b).sum();
        constraint_residual = constraint_residual.max(dot.abs() / scale);
    }
    NeutralReport {
        passed: max_x_deviation <= NEUTRAL_TOL && constraint_residual <= NEUTRAL_TOL,
        max_x_deviation,
        rate_deviation: (r_prime - solution.r_star).abs(),
        constraint_residual,
        x_prime,
    }
}

/// Coefficients of the price table read as values.
fn reinterpret(c: &TechCoefficients, s: &TransformationSolution) -> Option<TechCoefficients> {
    let n = c.len();
    let w = c.wage_index;
    let fixed: Vec<f64> = (0..n).map(|i| c.f[i] * s.k[i]).collect();
    let inputs = Matrix::from_fn(n, |i, j| s.x[j] * c.u[(i, j)] * s.k[i]);
    let e: Vec<f64> = (0..n)
        .map(|i| if inputs[(i, w)] > 0.0 { s.price_table.surplus[i] / inputs[(i, w)] } else { 0.0 })
        .collect();
    let names = (0..n).map(|i| alloc::format!("{}", i + 1)).collect();
    let mut table = EconomyTable::new(names, fixed, inputs, e, c.n_cycles, w).ok()?;
    if let Some(m) = c.machine_index {
        table = table.with_machine(m).ok()?;
    }
    derive_coefficients(&table).ok()
}

/// Root of `z'(r)` at fixed capitals `kp`, searched outward from `r0`.
fn rate_root(cp: &TechCoefficients, kp: &[f64], offsets: &[f64], r0: f64) -> Option<(f64, Vec<f64>)> {
    let z = |r: f64| {
        let x = solve_prices(cp, r, offsets).ok()?;
        let v = z_absolute(cp, &x, kp);
        v.is_finite().then_some(v)
    };
    let centre = Root { x: r0, fx: z(r0)? };
    if centre.fx == 0.0 {
        return Some((r0, solve_prices(cp, r0, offsets).ok()?));
    }
    let mut delta = 1e-9 * f64::max(1.0, r0.abs());
    for _ in 0..60 {
        for side in [r0 - delta, r0 + delta] {
            if let Some(fx) = z(side) {
                if fx.signum() != centre.fx.signum() {
                    let root = refine(z, centre, Root { x: side, fx }, 0.0, 1e-16, 400)?;
                    return Some((root.x, solve_prices(cp, root.x, offsets).ok()?));
                }
            }
        }
        delta *= 2.0;
    }
    None
}
