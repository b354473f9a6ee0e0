//! Economy tables, socio-technical coefficients, demand balances and
//! organic compositions.
//!
//! Branch `i` produces commodity `i`. `inputs[(i, j)]` is the value of
//! commodity `j` consumed by branch `i` per cycle; the wage column carries
//! the variable capital and is the only column generating surplus value.

use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;

use crate::linalg::{Matrix, MAX_ORDER};
use crate::solver::TransformationSolution;

/// Structural errors in an economy table.
#[derive(Clone, Debug, PartialEq)]
pub enum ModelError {
    /// A vector or matrix does not have one entry per branch.
    Shape { what: &'static str, expected: usize, found: usize },
    /// Fewer than two or more than `MAX_ORDER` branches.
    BranchCount(usize),
    /// `K_i = F_i + sum_j U_ij` is zero or negative.
    NonPositiveCapital { branch: usize },
    /// Negative fixed capital, input or exploitation rate.
    NegativeEntry { branch: usize, what: &'static str },
    NonFinite { branch: usize },
    /// Wage or machine index outside `0..N`.
    IndexOutOfRange { what: &'static str, index: usize },
    /// The amortization period must be at least one cycle.
    ZeroCycles,
    /// In the machine model the machine commodity is bought once per period,
    /// never per cycle.
    MachineConsumedPerCycle { branch: usize },
    /// Aggregate variable capital is zero.
    ZeroVariableCapital,
}

impl fmt::Display for ModelError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ModelError::Shape { what, expected, found } => {
                write!(f, "{what}: expected {expected} entries, found {found}")
            }
            ModelError::BranchCount(n) => {
                write!(f, "economy must have between 2 and {MAX_ORDER} branches, found {n}")
            }
            ModelError::NonPositiveCapital { branch } => {
                write!(f, "branch {} has non-positive total capital", branch + 1)
            }
            ModelError::NegativeEntry { branch, what } => {
                write!(f, "branch {} has a negative {what}", branch + 1)
            }
            ModelError::NonFinite { branch } => {
                write!(f, "branch {} has a non-finite entry", branch + 1)
            }
            ModelError::IndexOutOfRange { what, index } => {
                write!(f, "{what} index {index} is out of range")
            }
            ModelError::ZeroCycles => f.write_str("amortization period must be at least 1 cycle"),
            ModelError::MachineConsumedPerCycle { branch } => write!(
                f,
                "branch {} consumes the machine commodity per cycle; machines enter only through amortization",
                branch + 1
            ),
            ModelError::ZeroVariableCapital => f.write_str("aggregate variable capital is zero"),
        }
    }
}

impl core::error::Error for ModelError {}

/// Absolute-value table of an N-branch economy for one production cycle.
#[derive(Clone, Debug, PartialEq)]
pub struct EconomyTable {
    pub branch_names: Vec<String>,
    /// Branch producing the wage good (the variable-capital column).
    pub wage_index: usize,
    /// Branch producing fixed capital; `None` means fixed capital is imported.
    pub machine_index: Option<usize>,
    /// Fixed capital `F_i`, amortized over `n_cycles`.
    pub fixed_capital: Vec<f64>,
    pub n_cycles: u32,
    /// `inputs[(i, j)]`: commodity `j` consumed by branch `i` per cycle.
    pub inputs: Matrix,
    pub e_rates: Vec<f64>,
    /// Total capital target; defaults to the sum of branch capitals.
    pub k_total: Option<f64>,
}

impl EconomyTable {
    /// Builds and validates a table with imported fixed capital.
    pub fn new(
        branch_names: Vec<String>,
        fixed_capital: Vec<f64>,
        inputs: Matrix,
        e_rates: Vec<f64>,
        n_cycles: u32,
        wage_index: usize,
    ) -> Result<Self, ModelError> {
        let table = EconomyTable {
            branch_names,
            wage_index,
            machine_index: None,
            fixed_capital,
            n_cycles,
            inputs,
            e_rates,
            k_total: None,
        };
        table.validate()?;
        Ok(table)
    }

    pub fn with_machine(mut self, index: usize) -> Result<Self, ModelError> {
        self.machine_index = Some(index);
        self.validate()?;
        Ok(self)
    }

    pub fn with_k_total(mut self, k_total: f64) -> Self {
        self.k_total = Some(k_total);
        self
    }

    pub fn len(&self) -> usize {
        self.fixed_capital.len()
    }

    pub fn is_empty(&self) -> bool {
        self.fixed_capital.is_empty()
    }

    /// Checks every structural invariant.
    pub fn validate(&self) -> Result<(), ModelError> {
        let n = self.len();
        if !(2..=MAX_ORDER).contains(&n) {
            return Err(ModelError::BranchCount(n));
        }
        let shape = |what, found| {
            if found == n {
                Ok(())
            } else {
                Err(ModelError::Shape { what, expected: n, found })
            }
        };
        shape("branch names", self.branch_names.len())?;
        shape("input matrix", self.inputs.order())?;
        shape("exploitation rates", self.e_rates.len())?;
        if self.n_cycles == 0 {
            return Err(ModelError::ZeroCycles);
        }
        if self.wage_index >= n {
            return Err(ModelError::IndexOutOfRange { what: "wage", index: self.wage_index });
        }
        if let Some(m) = self.machine_index {
            if m >= n {
                return Err(ModelError::IndexOutOfRange { what: "machine", index: m });
            }
        }
        for i in 0..n {
            let row = self.inputs.row(i);
            if !self.fixed_capital[i].is_finite()
                || !self.e_rates[i].is_finite()
                || row.iter().any(|v| !v.is_finite())
            {
                return Err(ModelError::NonFinite { branch: i });
            }
            if self.fixed_capital[i] < 0.0 {
                return Err(ModelError::NegativeEntry { branch: i, what: "fixed capital" });
            }
            if row.iter().any(|&v| v < 0.0) {
                return Err(ModelError::NegativeEntry { branch: i, what: "input" });
            }
            if self.e_rates[i] < 0.0 {
                return Err(ModelError::NegativeEntry { branch: i, what: "exploitation rate" });
            }
            if !(self.capital(i) > 0.0) {
                return Err(ModelError::NonPositiveCapital { branch: i });
            }
            if let Some(m) = self.machine_index {
                if row[m] != 0.0 {
                    return Err(ModelError::MachineConsumedPerCycle { branch: i });
                }
            }
        }
        Ok(())
    }

    /// `K_i = F_i + sum_j U_ij`.
    pub fn capital(&self, i: usize) -> f64 {
        self.fixed_capital[i] + self.inputs.row_sum(i)
    }

    pub fn capitals(&self) -> Vec<f64> {
        (0..self.len()).map(|i| self.capital(i)).collect()
    }

    /// `K_T`, falling back to the sum of branch capitals.
    pub fn total_capital(&self) -> f64 {
        self.k_total.unwrap_or_else(|| self.capitals().iter().sum())
    }

    /// Variable capital `V_i`.
    pub fn variable_capital(&self, i: usize) -> f64 {
        self.inputs[(i, self.wage_index)]
    }

    /// `PL_i = e_i V_i`.
    pub fn surplus_value(&self, i: usize) -> f64 {
        self.e_rates[i] * self.variable_capital(i)
    }

    /// `D_i = F_i / n`.
    pub fn amortization(&self, i: usize) -> f64 {
        self.fixed_capital[i] / f64::from(self.n_cycles)
    }

    /// `W_i = D_i + sum_j U_ij + PL_i`.
    pub fn production(&self, i: usize) -> f64 {
        self.amortization(i) + self.inputs.row_sum(i) + self.surplus_value(i)
    }

    /// A commodity nobody consumes per cycle and that carries no amortization demand.
    pub fn is_luxury(&self, j: usize) -> bool {
        let unconsumed = self.inputs.column_sum(j) == 0.0;
        let amortized = self.machine_index == Some(j) && self.fixed_capital.iter().any(|&f| f > 0.0);
        unconsumed && !amortized
    }

    /// `PL_i / K_i` per branch, computed in value.
    pub fn internal_rates(&self) -> Vec<f64> {
        (0..self.len()).map(|i| self.surplus_value(i) / self.capital(i)).collect()
    }

    /// `sum PL / sum K`.
    pub fn average_internal_rate(&self) -> f64 {
        let pl: f64 = (0..self.len()).map(|i| self.surplus_value(i)).sum();
        pl / self.capitals().iter().sum::<f64>()
    }

    /// Multiplies every absolute figure of branch `i` by `factor`.
    pub fn scale_branch(&self, i: usize, factor: f64) -> Self {
        let mut out = self.clone();
        out.fixed_capital[i] *= factor;
        for j in 0..self.len() {
            out.inputs[(i, j)] *= factor;
        }
        out
    }

    /// Rebuilds absolute figures from coefficients and a capital vector.
    pub fn from_coefficients(c: &TechCoefficients, names: Vec<String>, k: &[f64]) -> Result<Self, ModelError> {
        let n = c.len();
        if k.len() != n {
            return Err(ModelError::Shape { what: "capital vector", expected: n, found: k.len() });
        }
        let table = EconomyTable {
            branch_names: names,
            wage_index: c.wage_index,
            machine_index: c.machine_index,
            fixed_capital: (0..n).map(|i| c.f[i] * k[i]).collect(),
            n_cycles: c.n_cycles,
            inputs: Matrix::from_fn(n, |i, j| c.u[(i, j)] * k[i]),
            e_rates: c.e.clone(),
            k_total: Some(k.iter().sum()),
        };
        table.validate()?;
        Ok(table)
    }
}

/// Capital-normalized coefficients of each branch.
#[derive(Clone, Debug, PartialEq)]
pub struct TechCoefficients {
    pub n_cycles: u32,
    pub wage_index: usize,
    pub machine_index: Option<usize>,
    /// `F_i / K_i`.
    pub f: Vec<f64>,
    /// `f_i / n`.
    pub d: Vec<f64>,
    /// `U_ij / K_i`.
    pub u: Matrix,
    pub e: Vec<f64>,
    /// `e_i v_i`.
    pub pl: Vec<f64>,
    /// `W_i / K_i`.
    pub w: Vec<f64>,
}

impl TechCoefficients {
    pub fn len(&self) -> usize {
        self.f.len()
    }

    pub fn is_empty(&self) -> bool {
        self.f.is_empty()
    }

    /// Variable-capital coefficient `v_i`.
    pub fn v(&self, i: usize) -> f64 {
        self.u[(i, self.wage_index)]
    }

    pub fn cycles(&self) -> f64 {
        f64::from(self.n_cycles)
    }

    pub fn has_fixed_capital(&self) -> bool {
        self.f.iter().any(|&f| f > 0.0)
    }

    pub fn has_surplus_value(&self) -> bool {
        self.pl.iter().any(|&p| p > 0.0)
    }
}

/// Derives `f, d, u, pl, w` from an absolute table.
pub fn derive_coefficients(table: &EconomyTable) -> Result<TechCoefficients, ModelError> {
    table.validate()?;
    let n = table.len();
    let nc = f64::from(table.n_cycles);
    let k = table.capitals();
    let f: Vec<f64> = (0..n).map(|i| table.fixed_capital[i] / k[i]).collect();
    let d: Vec<f64> = f.iter().map(|fi| fi / nc).collect();
    let u = Matrix::from_fn(n, |i, j| table.inputs[(i, j)] / k[i]);
    let pl: Vec<f64> = (0..n).map(|i| table.e_rates[i] * u[(i, table.wage_index)]).collect();
    let w = (0..n).map(|i| d[i] + u.row_sum(i) + pl[i]).collect();
    Ok(TechCoefficients {
        n_cycles: table.n_cycles,
        wage_index: table.wage_index,
        machine_index: table.machine_index,
        f,
        d,
        u,
        e: table.e_rates.clone(),
        pl,
        w,
    })
}

/// Production minus consumption of one commodity.
#[derive(Clone, Debug, PartialEq)]
pub struct CommoditySurplus {
    pub commodity: usize,
    pub value: f64,
    /// Present when evaluated against a solution.
    pub price: Option<f64>,
    /// Negative surplus: the allocation relies on stocks from earlier cycles.
    pub stock_dependent: bool,
}

/// Value surplus of commodity `j` at allocation `k` and prices `x`.
///
/// With imported fixed capital the branch's own amortization is deducted from
/// its production; the machine commodity must cover everyone's amortization.
pub fn commodity_surplus(c: &TechCoefficients, k: &[f64], x: &[f64], j: usize) -> f64 {
    let n = c.len();
    match c.machine_index {
        Some(m) if m == j => {
            k[j] * c.w[j] * x[j] - (0..n).map(|i| k[i] * c.d[i]).sum::<f64>()
        }
        Some(_) => x[j] * (k[j] * c.w[j] - (0..n).map(|i| k[i] * c.u[(i, j)]).sum::<f64>()),
        None => {
            k[j] * (x[j] * c.w[j] - c.d[j]) - x[j] * (0..n).map(|i| k[i] * c.u[(i, j)]).sum::<f64>()
        }
    }
}

/// Per-commodity surplus report, in value and optionally in price.
pub fn check_demand(table: &EconomyTable, solution: Option<&TransformationSolution>) -> Result<Vec<CommoditySurplus>, ModelError> {
    let c = derive_coefficients(table)?;
    let n = c.len();
    let ones = alloc::vec![1.0; n];
    let k = match solution {
        Some(s) => s.k.clone(),
        None => table.capitals(),
    };
    let scale: f64 = (0..n).map(|i| k[i].abs() * c.w[i]).sum::<f64>().max(1.0);
    let tol = 1e-9 * scale;
    Ok((0..n)
        .map(|j| {
            let value = commodity_surplus(&c, &k, &ones, j);
            let price = solution.map(|s| commodity_surplus(&c, &k, &s.x, j));
            let stock_dependent = value < -tol || price.is_some_and(|p| p < -tol);
            CommoditySurplus { commodity: j, value, price, stock_dependent }
        })
        .collect())
}

/// Aggregate organic composition of capital.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct OrganicComposition {
    /// `(F + non-wage inputs) / V` in value.
    pub value_co: f64,
    /// Same ratio with inputs priced by `x` and `V` by `x_wage`.
    pub price_co: f64,
}

/// Organic composition at allocation `k` and prices `x`.
pub fn organic_composition_at(c: &TechCoefficients, k: &[f64], x: &[f64]) -> Result<OrganicComposition, ModelError> {
    let n = c.len();
    let w = c.wage_index;
    let fixed: f64 = (0..n).map(|i| c.f[i] * k[i]).sum();
    let v: f64 = (0..n).map(|i| c.u[(i, w)] * k[i]).sum();
    if !(v > 0.0) {
        return Err(ModelError::ZeroVariableCapital);
    }
    let mut inputs = 0.0;
    let mut priced = 0.0;
    for i in 0..n {
        for j in (0..n).filter(|&j| j != w) {
            inputs += c.u[(i, j)] * k[i];
            priced += x[j] * c.u[(i, j)] * k[i];
        }
    }
    Ok(OrganicComposition { value_co: (fixed + inputs) / v, price_co: (fixed + priced) / (x[w] * v) })
}

/// Organic composition of the table, or of a solution's allocation and prices.
pub fn organic_composition(table: &EconomyTable, solution: Option<&TransformationSolution>) -> Result<OrganicComposition, ModelError> {
    let c = derive_coefficients(table)?;
    match solution {
        Some(s) => organic_composition_at(&c, &s.k, &s.x),
        None => organic_composition_at(&c, &table.capitals(), &alloc::vec![1.0; c.len()]),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::string::ToString;
    use alloc::vec;

    fn names(n: usize) -> Vec<String> {
        (1..=n).map(|i| i.to_string()).collect()
    }

    fn table_2a() -> EconomyTable {
        let u = Matrix::from_rows(&[[200.0, 90.0], [80.0, 120.0]]).unwrap();
        EconomyTable::new(names(2), vec![125.0, 100.0], u, vec![2.0 / 3.0; 2], 5, 1).unwrap()
    }

    #[test]
    fn two_branch_coefficients() {
        let c = derive_coefficients(&table_2a()).unwrap();
        assert_eq!(c.f[0], 125.0 / 415.0);
        assert_eq!(c.u[(0, 0)], 200.0 / 415.0);
        assert_eq!(c.v(0), 90.0 / 415.0);
        assert!((c.w[0] - 375.0 / 415.0).abs() < 1e-15);
    }

    #[test]
    fn single_input_branch_normalizes_to_one() {
        let u = Matrix::from_rows(&[[0.0, 50.0], [30.0, 0.0]]).unwrap();
        let t = EconomyTable::new(names(2), vec![0.0, 0.0], u, vec![1.0, 0.5], 1, 1).unwrap();
        let c = derive_coefficients(&t).unwrap();
        assert_eq!(c.f[0], 0.0);
        assert_eq!(c.u[(0, 1)], 1.0);
        assert_eq!(c.w[0], 2.0);
        assert_eq!(c.w[1], 1.0);
    }

    #[test]
    fn rejects_non_positive_capital() {
        let u = Matrix::from_rows(&[[0.0, 0.0], [30.0, 10.0]]).unwrap();
        let err = EconomyTable::new(names(2), vec![0.0, 0.0], u, vec![1.0; 2], 1, 1).unwrap_err();
        assert_eq!(err, ModelError::NonPositiveCapital { branch: 0 });
    }

    #[test]
    fn machine_column_must_be_empty() {
        let u = Matrix::from_rows(&[[0.0, 5.0, 5.0], [1.0, 5.0, 5.0], [0.0, 5.0, 5.0]]).unwrap();
        let t = EconomyTable::new(names(3), vec![10.0; 3], u, vec![1.0; 3], 10, 2).unwrap();
        assert_eq!(t.with_machine(0).unwrap_err(), ModelError::MachineConsumedPerCycle { branch: 1 });
    }

    #[test]
    fn luxury_commodity_surplus_is_full_production() {
        let u = Matrix::from_rows(&[[10.0, 20.0, 0.0], [15.0, 25.0, 0.0], [5.0, 10.0, 0.0]]).unwrap();
        let t = EconomyTable::new(names(3), vec![0.0; 3], u, vec![1.0; 3], 1, 1).unwrap();
        assert!(t.is_luxury(2));
        let report = check_demand(&t, None).unwrap();
        assert!((report[2].value - t.production(2)).abs() <= 1e-13 * t.production(2));
    }

    #[test]
    fn identity_prices_give_equal_compositions() {
        let co = organic_composition(&table_2a(), None).unwrap();
        assert_eq!(co.value_co, co.price_co);
        assert!((co.value_co - (225.0 + 280.0) / 210.0).abs() < 1e-14);
    }
}
