//! Transformation solver: price system, capital allocation, z-function and
//! the searches for the uniform rate of profit.
//!
//! Entry point is [`solve`], which dispatches to the no-surplus, zero-fixed
//! capital or rate-scan path depending on the coefficients.

mod allocation;
mod bracket;
mod luxury;
mod neutral;
mod no_surplus;
mod price;
mod rstar;
mod zero_fixed;

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;

use crate::linalg::{LinalgError, Matrix};
use crate::model::{ModelError, TechCoefficients};

pub use allocation::{reproduction_row, solve_k, z_function};
pub use luxury::{build_bortkiewicz, solve_marx_simple_reproduction, BortkiewiczResult, BORTKIEWICZ_MAX_ITER};
pub use neutral::{neutral_element_check, NeutralReport};
pub use no_surplus::{solve_no_surplus, two_branch_closed_form};
pub use price::{assemble_price_system, solve_prices};
pub use rstar::{find_r_star, find_r_star_with, z_at_rate, ScanOptions};
pub use zero_fixed::{solve_zero_fixed, z_of_q};

/// Relative tolerance on the conservation residuals of a solution.
pub const RESIDUAL_RTOL: f64 = 1e-9;
/// Absolute residual bound used when total surplus value is zero.
pub const RESIDUAL_ATOL: f64 = 1e-12;
/// Capitals below `-FEASIBILITY_RTOL * K_T` make an allocation infeasible.
pub const FEASIBILITY_RTOL: f64 = 1e-9;

/// Solver failures.
#[derive(Clone, Debug, PartialEq)]
pub enum SolveError {
    Model(ModelError),
    Linalg(LinalgError),
    /// Fewer than `N - 2` fixed capitals and reproduction constraints.
    Underdetermined { given: usize, needed: usize },
    /// More than `N - 2` fixed capitals and reproduction constraints.
    Overdetermined { given: usize, needed: usize },
    InvalidConstraint(String),
    /// The capital system is singular for the chosen constraints.
    DegenerateConstraints,
    /// A branch received negative capital.
    Infeasible { branch: usize, capital: f64 },
    /// Roots exist but every allocation found is infeasible.
    FixedCapitalChoice,
    /// z never crosses zero downward on the scanned range.
    NoRoot { r_max: f64 },
    /// The coefficient matrix has no usable Perron pair.
    EigenDomain(String),
    /// The requested path does not apply to these coefficients.
    WrongPath(&'static str),
    Unsupported(&'static str),
    NotConverged { iterations: usize },
    /// The no-surplus demand system has no unique solution.
    NoUniqueAllocation,
}

impl fmt::Display for SolveError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SolveError::Model(e) => write!(f, "invalid economy table: {e}"),
            SolveError::Linalg(e) => write!(f, "linear algebra failure: {e}"),
            SolveError::Underdetermined { given, needed } => write!(
                f,
                "underdetermined: {given} fixed capitals/reproduction constraints given, {needed} needed"
            ),
            SolveError::Overdetermined { given, needed } => write!(
                f,
                "overdetermined: {given} fixed capitals/reproduction constraints given, {needed} needed"
            ),
            SolveError::InvalidConstraint(msg) => write!(f, "invalid constraint: {msg}"),
            SolveError::DegenerateConstraints => {
                f.write_str("capital system is singular for these constraints; fix a different branch")
            }
            SolveError::Infeasible { branch, capital } => {
                write!(f, "infeasible allocation: branch {} gets capital {capital}", branch + 1)
            }
            SolveError::FixedCapitalChoice => f.write_str(
                "no feasible allocation for this choice of fixed capitals; another one must be chosen",
            ),
            SolveError::NoRoot { r_max } => write!(
                f,
                "the z function never crosses the ordinate axis with a negative derivative on [0, {r_max}]"
            ),
            SolveError::EigenDomain(msg) => write!(f, "eigenvalue path unavailable: {msg}"),
            SolveError::WrongPath(msg) => f.write_str(msg),
            SolveError::Unsupported(msg) => write!(f, "unsupported construction: {msg}"),
            SolveError::NotConverged { iterations } => {
                write!(f, "iteration did not converge within {iterations} steps")
            }
            SolveError::NoUniqueAllocation => f.write_str("no-surplus demand system has no unique allocation"),
        }
    }
}

impl core::error::Error for SolveError {}

impl From<ModelError> for SolveError {
    fn from(e: ModelError) -> Self {
        SolveError::Model(e)
    }
}

impl From<LinalgError> for SolveError {
    fn from(e: LinalgError) -> Self {
        SolveError::Linalg(e)
    }
}

/// Space in which a reproduction constraint balances production and consumption.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Space {
    Value,
    Price,
}

/// "Production of commodity `j` equals its total consumption."
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct ReproductionConstraint {
    pub commodity: usize,
    pub space: Space,
}

/// Equations closing the capital system beyond conservation and equality II.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct ConstraintSet {
    /// `(branch, capital)` pairs held fixed.
    pub fixed_k: Vec<(usize, f64)>,
    /// Per-branch rate offsets; empty means a uniform rate.
    pub profit_offsets: Vec<f64>,
    pub reproduction: Vec<ReproductionConstraint>,
    /// Branch whose rate is the reference rate.
    pub reference_branch: usize,
}

impl ConstraintSet {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn fix(mut self, branch: usize, capital: f64) -> Self {
        self.fixed_k.push((branch, capital));
        self
    }

    pub fn reproduce(mut self, commodity: usize, space: Space) -> Self {
        self.reproduction.push(ReproductionConstraint { commodity, space });
        self
    }

    pub fn with_offsets(mut self, offsets: Vec<f64>) -> Self {
        self.profit_offsets = offsets;
        self
    }

    pub fn with_reference(mut self, branch: usize) -> Self {
        self.reference_branch = branch;
        self
    }

    pub fn is_uniform(&self) -> bool {
        self.profit_offsets.iter().all(|&o| o == self.reference_offset())
    }

    fn reference_offset(&self) -> f64 {
        self.profit_offsets.get(self.reference_branch).copied().unwrap_or(0.0)
    }

    /// Offsets `r_i - r_ref` for `n` branches.
    pub fn offsets(&self, n: usize) -> Vec<f64> {
        if self.profit_offsets.is_empty() {
            return alloc::vec![0.0; n];
        }
        let base = self.reference_offset();
        self.profit_offsets.iter().map(|o| o - base).collect()
    }

    /// Number of closing equations supplied.
    pub fn closing_count(&self) -> usize {
        self.fixed_k.len() + self.reproduction.len()
    }

    /// Checks indices and that exactly `n - 2` closing equations are given.
    pub fn validate(&self, n: usize) -> Result<(), SolveError> {
        let needed = n.saturating_sub(2);
        let given = self.closing_count();
        if given < needed {
            return Err(SolveError::Underdetermined { given, needed });
        }
        if given > needed {
            return Err(SolveError::Overdetermined { given, needed });
        }
        self.validate_indices(n)
    }

    pub(crate) fn validate_indices(&self, n: usize) -> Result<(), SolveError> {
        for (idx, &(b, amount)) in self.fixed_k.iter().enumerate() {
            if b >= n {
                return Err(SolveError::InvalidConstraint(format!("fixed branch {} out of range", b + 1)));
            }
            if !(amount.is_finite() && amount >= 0.0) {
                return Err(SolveError::InvalidConstraint(format!(
                    "fixed capital of branch {} must be finite and nonnegative",
                    b + 1
                )));
            }
            if self.fixed_k[..idx].iter().any(|&(o, _)| o == b) {
                return Err(SolveError::InvalidConstraint(format!("branch {} fixed twice", b + 1)));
            }
        }
        for (idx, rc) in self.reproduction.iter().enumerate() {
            if rc.commodity >= n {
                return Err(SolveError::InvalidConstraint(format!(
                    "reproduction commodity {} out of range",
                    rc.commodity + 1
                )));
            }
            if self.reproduction[..idx].iter().any(|o| o.commodity == rc.commodity) {
                return Err(SolveError::InvalidConstraint(format!(
                    "commodity {} constrained twice",
                    rc.commodity + 1
                )));
            }
        }
        if !self.profit_offsets.is_empty() && self.profit_offsets.len() != n {
            return Err(SolveError::InvalidConstraint(format!(
                "expected {n} profit offsets, found {}",
                self.profit_offsets.len()
            )));
        }
        if self.profit_offsets.iter().any(|o| !o.is_finite()) {
            return Err(SolveError::InvalidConstraint("non-finite profit offset".into()));
        }
        if self.reference_branch >= n {
            return Err(SolveError::InvalidConstraint("reference branch out of range".into()));
        }
        Ok(())
    }
}

/// How a solution was obtained.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Method {
    /// Scan of z(r) with root refinement.
    RateScan,
    /// Perron pair of `u_ij / w_i` plus the modulus search.
    Eigen,
    /// Determinant-zero scan for non-uniform rates without fixed capital
    /// (a constructed method, not taken from the source model).
    DeterminantScan,
    /// Unique allocation without surplus value.
    NoSurplus,
}

impl Method {
    pub fn label(self) -> &'static str {
        match self {
            Method::RateScan => "rate-scan",
            Method::Eigen => "eigen",
            Method::DeterminantScan => "determinant-scan (constructed)",
            Method::NoSurplus => "no-surplus",
        }
    }
}

/// Absolute accounts of a table at a given allocation.
#[derive(Clone, Debug, PartialEq)]
pub struct Accounts {
    /// `D_i`, never priced within a period.
    pub amortization: Vec<f64>,
    /// Consumption, in value or priced by `x_j`.
    pub inputs: Matrix,
    /// `PL_i` in value, `S_i` in price.
    pub surplus: Vec<f64>,
    /// `W_i` in value, `x_i W_i` in price.
    pub production: Vec<f64>,
}

impl Accounts {
    /// Value table `D, U, PL, W` at allocation `k`.
    pub fn values(c: &TechCoefficients, k: &[f64]) -> Self {
        let n = c.len();
        Accounts {
            amortization: (0..n).map(|i| c.d[i] * k[i]).collect(),
            inputs: Matrix::from_fn(n, |i, j| c.u[(i, j)] * k[i]),
            surplus: (0..n).map(|i| c.pl[i] * k[i]).collect(),
            production: (0..n).map(|i| c.w[i] * k[i]).collect(),
        }
    }
}

/// Result of the modulus search in the zero-fixed-capital case.
#[derive(Clone, Debug, PartialEq)]
pub struct ZeroFixedSolve {
    pub eigen_rate: f64,
    pub x_unit: Vec<f64>,
    pub q_star: f64,
    pub x: Vec<f64>,
}

/// Full transformation result.
#[derive(Clone, Debug, PartialEq)]
pub struct TransformationSolution {
    pub x: Vec<f64>,
    pub r_star: f64,
    pub r_per_branch: Vec<f64>,
    pub k: Vec<f64>,
    pub kp: Vec<f64>,
    pub price_table: Accounts,
    pub value_table: Accounts,
    /// `|sum S - sum PL|`.
    pub residual_i: f64,
    /// `|sum x W - sum W|`.
    pub residual_ii: f64,
    /// Normalized z at the solution.
    pub z_at_solution: f64,
    pub method: Method,
    pub zero_fixed: Option<ZeroFixedSolve>,
    /// Diagnostics such as a substituted fixed-capital branch.
    pub notes: Vec<String>,
}

/// A violated solution invariant.
#[derive(Clone, Debug, PartialEq)]
pub struct InvariantViolation {
    pub name: &'static str,
    pub detail: String,
}

impl fmt::Display for InvariantViolation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.name, self.detail)
    }
}

impl TransformationSolution {
    /// Derives every reported quantity from `(x, k, rates)`.
    pub fn assemble(c: &TechCoefficients, x: Vec<f64>, k: Vec<f64>, r_star: f64, r_per_branch: Vec<f64>, method: Method) -> Self {
        let n = c.len();
        let nc = c.cycles();
        let value_table = Accounts::values(c, &k);
        let kp: Vec<f64> = (0..n)
            .map(|i| k[i] * (nc * c.d[i] + (0..n).map(|j| x[j] * c.u[(i, j)]).sum::<f64>()))
            .collect();
        let price_table = Accounts {
            amortization: value_table.amortization.clone(),
            inputs: Matrix::from_fn(n, |i, j| x[j] * value_table.inputs[(i, j)]),
            surplus: (0..n).map(|i| r_per_branch[i] * kp[i]).collect(),
            production: (0..n).map(|i| x[i] * value_table.production[i]).collect(),
        };
        let sum_s: f64 = price_table.surplus.iter().sum();
        let sum_pl: f64 = value_table.surplus.iter().sum();
        let sum_xw: f64 = price_table.production.iter().sum();
        let sum_w: f64 = value_table.production.iter().sum();
        let z_at_solution = z_function(c, &x, &k);
        TransformationSolution {
            residual_i: (sum_s - sum_pl).abs(),
            residual_ii: (sum_xw - sum_w).abs(),
            z_at_solution,
            x,
            r_star,
            r_per_branch,
            k,
            kp,
            price_table,
            value_table,
            method,
            zero_fixed: None,
            notes: Vec::new(),
        }
    }

    pub fn total_capital(&self) -> f64 {
        self.k.iter().sum()
    }

    pub fn sum_surplus_value(&self) -> f64 {
        self.value_table.surplus.iter().sum()
    }

    pub fn sum_profit(&self) -> f64 {
        self.price_table.surplus.iter().sum()
    }

    /// Next-period cost of each branch's fixed capital, `x_m F_i` (machine model only).
    pub fn next_period_fixed_capital(&self, c: &TechCoefficients) -> Option<Vec<f64>> {
        let m = c.machine_index?;
        Some((0..c.len()).map(|i| self.x[m] * c.f[i] * self.k[i]).collect())
    }

    /// Checks the conservation, positivity and profit invariants.
    pub fn check(&self, c: &TechCoefficients) -> Result<(), InvariantViolation> {
        let sum_pl = self.sum_surplus_value();
        let bound_i = if sum_pl > 0.0 { RESIDUAL_RTOL * sum_pl } else { RESIDUAL_ATOL };
        if !(self.residual_i <= bound_i) {
            return Err(InvariantViolation {
                name: "residual_I",
                detail: format!("|sum S - sum PL| = {} exceeds {}", self.residual_i, bound_i),
            });
        }
        let sum_w: f64 = self.value_table.production.iter().sum();
        if !(self.residual_ii <= RESIDUAL_RTOL * sum_w) {
            return Err(InvariantViolation {
                name: "residual_II",
                detail: format!("|sum xW - sum W| = {} exceeds {}", self.residual_ii, RESIDUAL_RTOL * sum_w),
            });
        }
        let kt = self.total_capital();
        if let Some(i) = (0..self.k.len()).find(|&i| self.k[i] < -FEASIBILITY_RTOL * kt) {
            return Err(InvariantViolation { name: "capital", detail: format!("K_{} = {} < 0", i + 1, self.k[i]) });
        }
        if let Some(i) = (0..self.x.len()).find(|&i| !(self.x[i] > 0.0)) {
            return Err(InvariantViolation { name: "x", detail: format!("x_{} = {} is not positive", i + 1, self.x[i]) });
        }
        for i in 0..self.k.len() {
            let expected = self.r_per_branch[i] * self.kp[i];
            let s = self.price_table.surplus[i];
            let scale = f64::max(expected.abs(), s.abs()).max(RESIDUAL_ATOL);
            if !((s - expected).abs() <= RESIDUAL_RTOL * scale.max(c.w[i] * self.k[i] * 1e-3)) {
                return Err(InvariantViolation {
                    name: "profit",
                    detail: format!("S_{} = {} differs from r_i Kp_i = {}", i + 1, s, expected),
                });
            }
        }
        Ok(())
    }
}

/// Dispatches to the no-surplus, zero-fixed-capital or rate-scan solver.
pub fn solve(c: &TechCoefficients, k_total: f64, constraints: &ConstraintSet) -> Result<TransformationSolution, SolveError> {
    if !c.has_surplus_value() {
        if constraints.closing_count() > 0 || !constraints.is_uniform() {
            return Err(SolveError::Overdetermined { given: constraints.closing_count(), needed: 0 });
        }
        return solve_no_surplus(c, k_total);
    }
    if !c.has_fixed_capital() {
        return solve_zero_fixed(c, k_total, constraints);
    }
    find_r_star(c, k_total, constraints)
}

#[cfg(test)]
pub(crate) mod testing {
    use super::*;
    use crate::model::{derive_coefficients, EconomyTable};
    use alloc::string::ToString;
    use alloc::vec;

    /// Two branches; `columns[j][i]` is commodity `j` used by branch `i`.
    pub(crate) fn table(fixed: [f64; 2], e: f64) -> EconomyTable {
        let inputs = Matrix::from_rows(&[[200.0, 90.0], [80.0, 120.0]]).unwrap();
        let names = vec!["C".to_string(), "V".to_string()];
        EconomyTable::new(names, fixed.to_vec(), inputs, vec![e; 2], 5, 1).unwrap()
    }

    pub(crate) fn coefficients(fixed: [f64; 2], e: f64) -> TechCoefficients {
        derive_coefficients(&table(fixed, e)).unwrap()
    }
}

#[cfg(test)]
mod tests {
    use super::testing::coefficients;
    use super::*;
    use alloc::vec;

    #[test]
    fn closing_equations_are_counted() {
        assert_eq!(ConstraintSet::new().validate(2), Ok(()));
        assert_eq!(ConstraintSet::new().validate(3), Err(SolveError::Underdetermined { given: 0, needed: 1 }));
        assert_eq!(ConstraintSet::new().fix(0, 1.0).validate(2), Err(SolveError::Overdetermined { given: 1, needed: 0 }));
        assert!(ConstraintSet::new().fix(1, 1.0).fix(1, 2.0).validate(4).is_err());
        assert!(ConstraintSet::new().fix(0, -1.0).validate(3).is_err());
    }

    #[test]
    fn offsets_are_relative_to_the_reference_branch() {
        let cons = ConstraintSet::new().with_offsets(vec![0.003, 0.001, -0.002]).with_reference(1);
        assert!(!cons.is_uniform());
        assert_eq!(cons.offsets(3), vec![0.002, 0.0, -0.003]);
        assert!(ConstraintSet::new().is_uniform());
        assert_eq!(ConstraintSet::new().offsets(2), vec![0.0; 2]);
    }

    #[test]
    fn dispatcher_picks_the_path_from_the_coefficients() {
        assert_eq!(solve(&coefficients([125.0, 100.0], 2.0 / 3.0), 715.0, &ConstraintSet::new()).unwrap().method, Method::RateScan);
        assert_eq!(solve(&coefficients([0.0, 0.0], 2.0 / 3.0), 715.0, &ConstraintSet::new()).unwrap().method, Method::Eigen);
        assert_eq!(solve(&coefficients([125.0, 100.0], 0.0), 715.0, &ConstraintSet::new()).unwrap().method, Method::NoSurplus);
        let offset = ConstraintSet::new().with_offsets(vec![0.01, 0.0]);
        assert!(matches!(solve(&coefficients([125.0, 100.0], 0.0), 715.0, &offset), Err(SolveError::Overdetermined { .. })));
    }

    #[test]
    fn invariant_check_names_the_broken_residual() {
        let c = coefficients([125.0, 100.0], 2.0 / 3.0);
        let mut sol = solve(&c, 715.0, &ConstraintSet::new()).unwrap();
        assert!(sol.check(&c).is_ok());
        sol.residual_i = 1.0;
        assert_eq!(sol.check(&c).unwrap_err().name, "residual_I");
    }
}
