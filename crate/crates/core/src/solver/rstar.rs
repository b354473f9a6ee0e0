use alloc::vec::Vec;

use super::allocation::{first_infeasible, solve_k_raw, substitute_duplicate, z_absolute};
use super::bracket::{refine, Root};
use super::price::{branch_rates, solve_prices};
use super::{ConstraintSet, Method, SolveError, TransformationSolution, RESIDUAL_RTOL};
use crate::linalg::LinalgError;
use crate::model::TechCoefficients;

/// Grid and derivative settings of the rate scan.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ScanOptions {
    pub step: f64,
    pub r_max: f64,
    /// Half-width of the central difference used to check `dz/dr < 0`.
    pub derivative_step: f64,
    /// Refinement stops once `|z| <= z_rtol * sum PL` and the bracket is below `r_tol`.
    pub z_rtol: f64,
    pub r_tol: f64,
    pub max_refine: usize,
}

impl Default for ScanOptions {
    fn default() -> Self {
        ScanOptions { step: 1e-3, r_max: 10.0, derivative_step: 1e-7, z_rtol: 1e-12, r_tol: 1e-13, max_refine: 200 }
    }
}

struct Point {
    x: Vec<f64>,
    k: Vec<f64>,
    z: f64,
}

enum Eval {
    Ok(Point),
    PriceSingular,
    CapitalSingular,
    NonFinite,
}

fn evaluate(c: &TechCoefficients, k_total: f64, cons: &ConstraintSet, offsets: &[f64], r: f64) -> Eval {
    let Ok(x) = solve_prices(c, r, offsets) else {
        return Eval::PriceSingular;
    };
    let k = match solve_k_raw(c, &x, k_total, cons) {
        Ok(k) => k,
        Err(LinalgError::Singular { .. }) => return Eval::CapitalSingular,
        Err(_) => return Eval::NonFinite,
    };
    let z = z_absolute(c, &x, &k);
    if !z.is_finite() || k.iter().chain(&x).any(|v| !v.is_finite()) {
        return Eval::NonFinite;
    }
    Eval::Ok(Point { x, k, z })
}

fn z_at(c: &TechCoefficients, k_total: f64, cons: &ConstraintSet, offsets: &[f64], r: f64) -> Option<f64> {
    match evaluate(c, k_total, cons, offsets, r) {
        Eval::Ok(p) => Some(p.z),
        _ => None,
    }
}

/// Normalized z at reference rate `r`, with capitals from the constraint
/// system whether or not they are feasible.
pub fn z_at_rate(c: &TechCoefficients, k_total: f64, cons: &ConstraintSet, r: f64) -> Option<f64> {
    z_at(c, k_total, cons, &cons.offsets(c.len()), r).map(|z| z / k_total)
}

fn surplus_total(c: &TechCoefficients, k: &[f64]) -> f64 {
    k.iter().zip(&c.pl).map(|(k, pl)| k * pl).sum::<f64>().abs()
}

/// Uniform (or offset) rate of profit by scanning z(r) upward from zero.
///
/// Brackets are formed from consecutive grid points with finite z; the
/// refined root must have small |z|, a feasible allocation, positive prices
/// and `dz/dr < 0`, otherwise the scan resumes.
pub fn find_r_star(c: &TechCoefficients, k_total: f64, cons: &ConstraintSet) -> Result<TransformationSolution, SolveError> {
    find_r_star_with(c, k_total, cons, &ScanOptions::default())
}

pub fn find_r_star_with(
    c: &TechCoefficients,
    k_total: f64,
    cons: &ConstraintSet,
    opts: &ScanOptions,
) -> Result<TransformationSolution, SolveError> {
    let n = c.len();
    cons.validate(n)?;
    if !c.has_fixed_capital() {
        return Err(SolveError::WrongPath("all fixed capitals are zero; use the zero-fixed-capital solver"));
    }
    if !(opts.step > 0.0 && opts.r_max > 0.0) {
        return Err(SolveError::InvalidConstraint("scan step and range must be positive".into()));
    }
    let offsets = cons.offsets(n);
    let steps = libm::round(opts.r_max / opts.step) as usize;
    let mut prev: Option<(f64, Point)> = None;
    let mut any_bracket = false;
    let mut prices_ok = 0usize;
    let mut capital_singular = 0usize;
    for i in 0..=steps {
        let r = i as f64 * opts.step;
        let p = match evaluate(c, k_total, cons, &offsets, r) {
            Eval::Ok(p) => {
                prices_ok += 1;
                p
            }
            Eval::CapitalSingular => {
                prices_ok += 1;
                capital_singular += 1;
                prev = None;
                continue;
            }
            Eval::PriceSingular | Eval::NonFinite => {
                prev = None;
                continue;
            }
        };
        if let Some((ra, pa)) = &prev {
            if pa.z > 0.0 && p.z <= 0.0 {
                any_bracket = true;
                if let Some(sol) = accept_root(c, k_total, cons, &offsets, opts, (*ra, pa), (r, &p)) {
                    return Ok(sol);
                }
            }
        }
        prev = Some((r, p));
    }
    if !any_bracket && prices_ok > 0 && capital_singular == prices_ok {
        return match substitute_duplicate(c, cons) {
            Some((alt, note)) => {
                let mut sol = find_r_star_with(c, k_total, &alt, opts)?;
                sol.notes.insert(0, note);
                Ok(sol)
            }
            None => Err(SolveError::DegenerateConstraints),
        };
    }
    if any_bracket {
        Err(SolveError::FixedCapitalChoice)
    } else {
        Err(SolveError::NoRoot { r_max: opts.r_max })
    }
}

fn accept_root(
    c: &TechCoefficients,
    k_total: f64,
    cons: &ConstraintSet,
    offsets: &[f64],
    opts: &ScanOptions,
    (ra, pa): (f64, &Point),
    (rb, pb): (f64, &Point),
) -> Option<TransformationSolution> {
    let scale = f64::max(surplus_total(c, &pa.k), surplus_total(c, &pb.k));
    let ftol = opts.z_rtol * scale;
    let root = refine(
        |r| z_at(c, k_total, cons, offsets, r),
        Root { x: ra, fx: pa.z },
        Root { x: rb, fx: pb.z },
        ftol,
        opts.r_tol,
        opts.max_refine,
    )?;
    let Eval::Ok(p) = evaluate(c, k_total, cons, offsets, root.x) else {
        return None;
    };
    let pl_total = surplus_total(c, &p.k);
    if !(p.z.abs() <= RESIDUAL_RTOL * pl_total) {
        return None;
    }
    if first_infeasible(&p.k, k_total).is_some() || p.x.iter().any(|&v| !(v > 0.0)) {
        return None;
    }
    let h = opts.derivative_step;
    let slope = z_at(c, k_total, cons, offsets, root.x + h)? - z_at(c, k_total, cons, offsets, root.x - h)?;
    if !(slope < 0.0) {
        return None;
    }
    let rates = branch_rates(c.len(), root.x, offsets);
    Some(TransformationSolution::assemble(c, p.x, p.k, root.x, rates, Method::RateScan))
}
