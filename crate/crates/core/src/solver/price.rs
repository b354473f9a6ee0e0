use alloc::vec::Vec;

use crate::linalg::{solve_linear, LinalgError, Matrix};
use crate::model::TechCoefficients;

/// Price system at reference rate `r_ref`.
///
/// Row `i`: `sum_j t_i u_ij x_j - w_i x_i = -d_i (1 + n r_i)` with
/// `t_i = 1 + r_ref + offsets[i]`. Amortization stays on the right-hand side
/// unpriced. An empty `offsets` slice means a uniform rate.
pub fn assemble_price_system(c: &TechCoefficients, r_ref: f64, offsets: &[f64]) -> (Matrix, Vec<f64>) {
    let n = c.len();
    let nc = c.cycles();
    let rate = |i: usize| r_ref + offsets.get(i).copied().unwrap_or(0.0);
    let mut a = Matrix::from_fn(n, |i, j| (1.0 + rate(i)) * c.u[(i, j)]);
    for i in 0..n {
        a[(i, i)] -= c.w[i];
    }
    let b = (0..n).map(|i| -c.d[i] * (1.0 + nc * rate(i))).collect();
    (a, b)
}

/// Transformation coefficients `x(r_ref)`.
pub fn solve_prices(c: &TechCoefficients, r_ref: f64, offsets: &[f64]) -> Result<Vec<f64>, LinalgError> {
    let (a, b) = assemble_price_system(c, r_ref, offsets);
    solve_linear(&a, &b)
}

/// Per-branch rates `r_ref + offsets[i]`.
pub(crate) fn branch_rates(n: usize, r_ref: f64, offsets: &[f64]) -> Vec<f64> {
    (0..n).map(|i| r_ref + offsets.get(i).copied().unwrap_or(0.0)).collect()
}
