use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use super::{ConstraintSet, ReproductionConstraint, SolveError, Space, FEASIBILITY_RTOL};
use crate::linalg::{solve_linear, LinalgError, Matrix};
use crate::model::{commodity_surplus, TechCoefficients};

/// Coefficient row `a` with `a . K = 0` expressing a reproduction constraint.
///
/// `a . K` equals the commodity surplus of `rc.commodity` at prices `x`
/// (value space uses `x = 1`).
pub fn reproduction_row(c: &TechCoefficients, x: &[f64], rc: ReproductionConstraint) -> Vec<f64> {
    let n = c.len();
    let ones = vec![1.0; n];
    let prices = match rc.space {
        Space::Value => &ones[..],
        Space::Price => x,
    };
    (0..n)
        .map(|i| {
            let mut unit = vec![0.0; n];
            unit[i] = 1.0;
            commodity_surplus(c, &unit, prices, rc.commodity)
        })
        .collect()
}

/// Capital system: conservation, equality II, fixed capitals, reproduction rows.
fn allocation_system(c: &TechCoefficients, x: &[f64], k_total: f64, cons: &ConstraintSet) -> (Matrix, Vec<f64>) {
    let n = c.len();
    let mut rows: Vec<Vec<f64>> = Vec::with_capacity(n);
    let mut rhs = Vec::with_capacity(n);
    rows.push(vec![1.0; n]);
    rhs.push(k_total);
    rows.push((0..n).map(|i| c.w[i] * (1.0 - x[i])).collect());
    rhs.push(0.0);
    for &(b, amount) in &cons.fixed_k {
        let mut row = vec![0.0; n];
        row[b] = 1.0;
        rows.push(row);
        rhs.push(amount);
    }
    for &rc in &cons.reproduction {
        rows.push(reproduction_row(c, x, rc));
        rhs.push(0.0);
    }
    let a = Matrix::from_fn(n, |i, j| rows.get(i).map_or(0.0, |r| r[j]));
    rhs.resize(n, 0.0);
    (a, rhs)
}

/// Solves the capital system without feasibility checks.
pub(crate) fn solve_k_raw(c: &TechCoefficients, x: &[f64], k_total: f64, cons: &ConstraintSet) -> Result<Vec<f64>, LinalgError> {
    let (a, b) = allocation_system(c, x, k_total, cons);
    solve_linear(&a, &b)
}

/// Index of the first branch with capital below `-FEASIBILITY_RTOL * K_T`.
pub(crate) fn first_infeasible(k: &[f64], k_total: f64) -> Option<usize> {
    k.iter().position(|&v| !(v >= -FEASIBILITY_RTOL * k_total.abs()))
}

/// Capital allocation at prices `x` satisfying conservation, equality II and
/// the `N - 2` closing equations.
pub fn solve_k(c: &TechCoefficients, x: &[f64], k_total: f64, cons: &ConstraintSet) -> Result<Vec<f64>, SolveError> {
    let n = c.len();
    cons.validate(n)?;
    if x.len() != n {
        return Err(LinalgError::Dimension { expected: n, found: x.len() }.into());
    }
    let k = match solve_k_raw(c, x, k_total, cons) {
        Ok(k) => k,
        Err(LinalgError::Singular { .. }) => return Err(SolveError::DegenerateConstraints),
        Err(e) => return Err(e.into()),
    };
    if let Some(branch) = first_infeasible(&k, k_total) {
        return Err(SolveError::Infeasible { branch, capital: k[branch] });
    }
    Ok(k)
}

/// `sum_i K_i [x_i w_i - d_i - sum_j x_j u_ij - pl_i]`, equal to `sum S - sum PL`.
pub(crate) fn z_absolute(c: &TechCoefficients, x: &[f64], k: &[f64]) -> f64 {
    let n = c.len();
    (0..n)
        .map(|i| {
            let inputs: f64 = (0..n).map(|j| x[j] * c.u[(i, j)]).sum();
            k[i] * (x[i] * c.w[i] - c.d[i] - inputs - c.pl[i])
        })
        .sum()
}

/// z normalized by total capital: `(sum S - sum PL) / K_T`.
pub fn z_function(c: &TechCoefficients, x: &[f64], k: &[f64]) -> f64 {
    let z = z_absolute(c, x, k);
    let kt: f64 = k.iter().sum();
    if kt != 0.0 {
        z / kt
    } else {
        z
    }
}

/// Branches whose coefficients coincide with an earlier branch's.
fn duplicate_groups(c: &TechCoefficients) -> Vec<Vec<usize>> {
    let n = c.len();
    let same = |a: usize, b: usize| {
        let close = |p: f64, q: f64| (p - q).abs() <= 1e-12 * f64::max(1.0, p.abs().max(q.abs()));
        close(c.d[a], c.d[b]) && close(c.pl[a], c.pl[b]) && (0..n).all(|j| close(c.u[(a, j)], c.u[(b, j)]))
    };
    let mut seen = vec![false; n];
    let mut groups = Vec::new();
    for a in 0..n {
        if seen[a] {
            continue;
        }
        let group: Vec<usize> = (a..n).filter(|&b| !seen[b] && same(a, b)).collect();
        if group.len() > 1 {
            group.iter().for_each(|&b| seen[b] = true);
            groups.push(group);
        }
    }
    groups
}

/// Moves a fixed capital onto a branch of an identical-coefficient group, which
/// removes the singularity caused by indistinguishable branches.
pub(crate) fn substitute_duplicate(c: &TechCoefficients, cons: &ConstraintSet) -> Option<(ConstraintSet, String)> {
    for group in duplicate_groups(c) {
        let fixed_in_group = group.iter().filter(|g| cons.fixed_k.iter().any(|(b, _)| b == *g)).count();
        if fixed_in_group + 1 >= group.len() {
            continue;
        }
        let target = *group.iter().find(|g| !cons.fixed_k.iter().any(|(b, _)| b == *g))?;
        let slot = cons.fixed_k.iter().position(|(b, _)| !group.contains(b))?;
        let mut out = cons.clone();
        let (old, amount) = out.fixed_k[slot];
        out.fixed_k[slot] = (target, amount);
        let note = format!(
            "branches {:?} have identical coefficients; fixed capital {} moved from branch {} to branch {}",
            group.iter().map(|g| g + 1).collect::<Vec<_>>(),
            amount,
            old + 1,
            target + 1
        );
        return Some((out, note));
    }
    None
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{derive_coefficients, EconomyTable};
    use alloc::string::ToString;

    fn coeffs(f: [f64; 3], u: [[f64; 3]; 3]) -> TechCoefficients {
        let names = (1..=3).map(|i| i.to_string()).collect();
        let t = EconomyTable::new(names, f.to_vec(), Matrix::from_rows(&u).unwrap(), vec![1.0; 3], 10, 2).unwrap();
        derive_coefficients(&t).unwrap()
    }

    #[test]
    fn unit_prices_make_equality_two_vacuous() {
        let c = coeffs([10.0, 20.0, 5.0], [[10.0, 20.0, 30.0], [5.0, 25.0, 20.0], [15.0, 10.0, 40.0]]);
        let cons = ConstraintSet::new().fix(2, 50.0);
        assert_eq!(solve_k(&c, &[1.0; 3], 300.0, &cons), Err(SolveError::DegenerateConstraints));
    }

    #[test]
    fn reproduction_row_dot_k_is_commodity_surplus() {
        let c = coeffs([10.0, 20.0, 5.0], [[10.0, 20.0, 30.0], [5.0, 25.0, 20.0], [15.0, 10.0, 40.0]]);
        let k = [70.0, 80.0, 90.0];
        let x = [1.1, 0.9, 1.02];
        for space in [Space::Value, Space::Price] {
            let row = reproduction_row(&c, &x, ReproductionConstraint { commodity: 1, space });
            let dot: f64 = row.iter().zip(&k).map(|(a, b)| a * b).sum();
            let p = if space == Space::Price { x } else { [1.0; 3] };
            assert!((dot - commodity_surplus(&c, &k, &p, 1)).abs() < 1e-12);
        }
    }

    #[test]
    fn duplicate_branches_get_substituted() {
        let c = coeffs([10.0, 10.0, 5.0], [[10.0, 20.0, 30.0], [10.0, 20.0, 30.0], [15.0, 10.0, 40.0]]);
        let cons = ConstraintSet::new().fix(2, 50.0);
        let (out, _) = substitute_duplicate(&c, &cons).unwrap();
        assert_eq!(out.fixed_k, vec![(0, 50.0)]);
    }

    #[test]
    fn z_vanishes_at_unit_prices_without_surplus() {
        let names = (1..=2).map(|i| i.to_string()).collect();
        let u = Matrix::from_rows(&[[20.0, 10.0], [5.0, 30.0]]).unwrap();
        let c = derive_coefficients(&EconomyTable::new(names, vec![0.0; 2], u, vec![0.0; 2], 1, 1).unwrap()).unwrap();
        assert!(z_function(&c, &[1.0, 1.0], &[30.0, 35.0]).abs() < 1e-15);
    }
}
