use alloc::format;
use alloc::vec::Vec;

use super::allocation::{first_infeasible, solve_k_raw, substitute_duplicate, z_absolute};
use super::bracket::{refine, Root};
use super::price::{assemble_price_system, branch_rates};
use super::{ConstraintSet, Method, SolveError, TransformationSolution, ZeroFixedSolve, RESIDUAL_RTOL};
use crate::linalg::{determinant, dominant_eigenpair, LinalgError, Matrix};
use crate::model::TechCoefficients;

/// Log-spaced modulus grid: `q0 * 2^(k / Q_GRID_DENSITY)` for `|k| <= Q_GRID_HALF`.
const Q_GRID_DENSITY: i32 = 64;
const Q_GRID_HALF: i32 = 640;
/// Reference-rate grid of the determinant scan.
const DET_STEP: f64 = 1e-3;
const DET_R_MAX: f64 = 10.0;
/// Largest accepted `|lambda - 1|` of the rate-weighted matrix at a determinant root.
const UNIT_EIGEN_TOL: f64 = 1e-9;

/// Normalized z at prices `q * x_unit`, with capitals from the constraint system.
pub fn z_of_q(c: &TechCoefficients, k_total: f64, cons: &ConstraintSet, x_unit: &[f64], q: f64) -> Option<f64> {
    let x: Vec<f64> = x_unit.iter().map(|v| q * v).collect();
    let k = solve_k_raw(c, &x, k_total, cons).ok()?;
    let z = z_absolute(c, &x, &k);
    z.is_finite().then_some(z / k_total)
}

fn perron(a: &Matrix) -> Result<(f64, Vec<f64>), SolveError> {
    let (lambda, v) = dominant_eigenpair(a).map_err(|e| SolveError::EigenDomain(format!("{e}")))?;
    if !(lambda > 0.0) || v.iter().any(|&c| !(c > 0.0)) {
        return Err(SolveError::EigenDomain(format!(
            "Perron vector is not strictly positive (eigenvalue {lambda}); the matrix is reducible"
        )));
    }
    Ok((lambda, v))
}

/// Dominant eigenpair of `A_ij = u_ij / w_i`, giving `r = 1 / lambda - 1`.
pub(crate) fn eigen_rate(c: &TechCoefficients) -> Result<(f64, Vec<f64>), SolveError> {
    let a = Matrix::from_fn(c.len(), |i, j| c.u[(i, j)] / c.w[i]);
    let (lambda, v) = perron(&a)?;
    Ok((1.0 / lambda - 1.0, v))
}

/// Solution without fixed capital: prices are `q * x_u` with `x_u` the Perron
/// vector and `q` the root of z(q); with rate offsets the reference rate is
/// the first zero of the price-system determinant.
pub fn solve_zero_fixed(c: &TechCoefficients, k_total: f64, cons: &ConstraintSet) -> Result<TransformationSolution, SolveError> {
    let n = c.len();
    cons.validate(n)?;
    if c.has_fixed_capital() {
        return Err(SolveError::WrongPath("fixed capital present; use the rate scan"));
    }
    if !c.has_surplus_value() {
        return Err(SolveError::WrongPath("no surplus value; use the no-surplus solver"));
    }
    let offsets = cons.offsets(n);
    let (r_ref, x_unit, method) = if cons.is_uniform() {
        let (r, v) = eigen_rate(c)?;
        (r, v, Method::Eigen)
    } else {
        let (r, v) = determinant_root(c, &offsets)?;
        (r, v, Method::DeterminantScan)
    };
    let (cons, note) = match modulus(c, k_total, cons, &x_unit) {
        Err(SolveError::DegenerateConstraints) => match substitute_duplicate(c, cons) {
            Some((alt, note)) => (alt, Some(note)),
            None => return Err(SolveError::DegenerateConstraints),
        },
        _ => (cons.clone(), None),
    };
    let (q, x, k) = modulus(c, k_total, &cons, &x_unit)?;
    let rates = branch_rates(n, r_ref, &offsets);
    let mut sol = TransformationSolution::assemble(c, x.clone(), k, r_ref, rates, method);
    sol.zero_fixed = Some(ZeroFixedSolve { eigen_rate: r_ref, x_unit, q_star: q, x });
    if method == Method::DeterminantScan {
        sol.notes.push("reference rate from the price-system determinant scan (constructed method)".into());
    }
    if let Some(note) = note {
        sol.notes.insert(0, note);
    }
    Ok(sol)
}

/// Root `q*` of z(q) on a log grid around a unit-price scale, with its prices and capitals.
fn modulus(
    c: &TechCoefficients,
    k_total: f64,
    cons: &ConstraintSet,
    x_unit: &[f64],
) -> Result<(f64, Vec<f64>, Vec<f64>), SolveError> {
    let q0 = c.w.iter().sum::<f64>() / c.w.iter().zip(x_unit).map(|(w, x)| w * x).sum::<f64>();
    let at = |q: f64| z_of_q(c, k_total, cons, x_unit, q);
    let mut prev: Option<Root> = None;
    let mut any_bracket = false;
    let mut evaluated = 0usize;
    for step in -Q_GRID_HALF..=Q_GRID_HALF {
        let q = q0 * libm::exp2(f64::from(step) / f64::from(Q_GRID_DENSITY));
        let Some(z) = at(q) else {
            prev = None;
            continue;
        };
        evaluated += 1;
        let here = Root { x: q, fx: z };
        if let Some(p) = prev {
            if p.fx.signum() != z.signum() || z == 0.0 {
                any_bracket = true;
                if let Some(found) = accept_q(c, k_total, cons, x_unit, p, here) {
                    return Ok(found);
                }
            }
        }
        prev = Some(here);
    }
    if evaluated == 0 {
        let x: Vec<f64> = x_unit.iter().map(|v| q0 * v).collect();
        return match solve_k_raw(c, &x, k_total, cons) {
            Err(LinalgError::Singular { .. }) => Err(SolveError::DegenerateConstraints),
            Err(e) => Err(e.into()),
            Ok(_) => Err(SolveError::NoRoot { r_max: DET_R_MAX }),
        };
    }
    if any_bracket {
        Err(SolveError::FixedCapitalChoice)
    } else {
        Err(SolveError::NoRoot { r_max: DET_R_MAX })
    }
}

fn accept_q(
    c: &TechCoefficients,
    k_total: f64,
    cons: &ConstraintSet,
    x_unit: &[f64],
    a: Root,
    b: Root,
) -> Option<(f64, Vec<f64>, Vec<f64>)> {
    let pl_scale = c.pl.iter().fold(0.0, |m: f64, &p| m.max(p));
    let root = refine(|q| z_of_q(c, k_total, cons, x_unit, q), a, b, 1e-12 * pl_scale, 1e-15 * b.x, 400)?;
    let q = root.x;
    let x: Vec<f64> = x_unit.iter().map(|v| q * v).collect();
    let k = solve_k_raw(c, &x, k_total, cons).ok()?;
    let pl_total: f64 = k.iter().zip(&c.pl).map(|(k, p)| k * p).sum::<f64>().abs();
    if !(z_absolute(c, &x, &k).abs() <= RESIDUAL_RTOL * pl_total) {
        return None;
    }
    if first_infeasible(&k, k_total).is_some() || !(q > 0.0) {
        return None;
    }
    Some((q, x, k))
}

/// First reference rate where the homogeneous price system becomes singular
/// with a unit Perron root of `diag((1 + r_i) / w_i) u`.
fn determinant_root(c: &TechCoefficients, offsets: &[f64]) -> Result<(f64, Vec<f64>), SolveError> {
    let det = |r: f64| {
        let d = determinant(&assemble_price_system(c, r, offsets).0);
        d.is_finite().then_some(d)
    };
    let steps = libm::round(DET_R_MAX / DET_STEP) as usize;
    let mut prev: Option<Root> = None;
    for i in 0..=steps {
        let r = i as f64 * DET_STEP;
        let Some(d) = det(r) else {
            prev = None;
            continue;
        };
        let here = Root { x: r, fx: d };
        if let Some(p) = prev {
            if p.fx.signum() != d.signum() || d == 0.0 {
                if let Some(root) = refine(det, p, here, 0.0, 1e-16, 400) {
                    let rates = branch_rates(c.len(), root.x, offsets);
                    let b = Matrix::from_fn(c.len(), |i, j| (1.0 + rates[i]) / c.w[i] * c.u[(i, j)]);
                    if let Ok((lambda, v)) = perron(&b) {
                        if (lambda - 1.0).abs() <= UNIT_EIGEN_TOL {
                            return Ok((root.x, v));
                        }
                    }
                }
            }
        }
        prev = Some(here);
    }
    Err(SolveError::EigenDomain("no reference rate makes the price system singular with a unit Perron root".into()))
}
