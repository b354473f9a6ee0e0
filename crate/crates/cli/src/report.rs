//! Solution report: JSON form, human-readable tables and re-validation.

use serde::{Deserialize, Serialize};
use valforme_core::linalg::Matrix;
use valforme_core::model::{check_demand, derive_coefficients, EconomyTable};
use valforme_core::solver::{Accounts, ConstraintSet, Method, Space, TransformationSolution, RESIDUAL_RTOL};

use crate::error::CliError;
use crate::render::{grid, Precision};
use crate::table::TableFile;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SpaceTag {
    Value,
    Price,
}

impl From<Space> for SpaceTag {
    fn from(s: Space) -> Self {
        match s {
            Space::Value => SpaceTag::Value,
            Space::Price => SpaceTag::Price,
        }
    }
}

impl From<SpaceTag> for Space {
    fn from(s: SpaceTag) -> Self {
        match s {
            SpaceTag::Value => Space::Value,
            SpaceTag::Price => Space::Price,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum MethodTag {
    RateScan,
    Eigen,
    DeterminantScan,
    NoSurplus,
}

impl From<Method> for MethodTag {
    fn from(m: Method) -> Self {
        match m {
            Method::RateScan => MethodTag::RateScan,
            Method::Eigen => MethodTag::Eigen,
            Method::DeterminantScan => MethodTag::DeterminantScan,
            Method::NoSurplus => MethodTag::NoSurplus,
        }
    }
}

impl From<MethodTag> for Method {
    fn from(m: MethodTag) -> Self {
        match m {
            MethodTag::RateScan => Method::RateScan,
            MethodTag::Eigen => Method::Eigen,
            MethodTag::DeterminantScan => Method::DeterminantScan,
            MethodTag::NoSurplus => Method::NoSurplus,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FixedCapital {
    pub branch: String,
    pub capital: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RateOffset {
    pub branch: String,
    pub offset: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Reproduction {
    pub commodity: String,
    pub space: SpaceTag,
}

/// Closing equations in file form; branches are named.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Constraints {
    #[serde(default)]
    pub fixed: Vec<FixedCapital>,
    /// Offsets of `r_i` from the reference branch's rate.
    #[serde(default)]
    pub delta_r: Vec<RateOffset>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub reference_branch: Option<String>,
    #[serde(default)]
    pub reproduction: Vec<Reproduction>,
}

impl Constraints {
    /// Offsets default to zero; the reference is the first branch without an offset.
    pub fn to_set(&self, file: &TableFile) -> Result<ConstraintSet, CliError> {
        let n = file.branches.len();
        let mut cons = ConstraintSet::new();
        for f in &self.fixed {
            cons = cons.fix(file.branch_index(&f.branch)?, f.capital);
        }
        for r in &self.reproduction {
            cons = cons.reproduce(file.branch_index(&r.commodity)?, r.space.into());
        }
        if !self.delta_r.is_empty() {
            let mut offsets = vec![0.0; n];
            let mut given = vec![false; n];
            for d in &self.delta_r {
                let i = file.branch_index(&d.branch)?;
                offsets[i] = d.offset;
                given[i] = true;
            }
            let reference = match &self.reference_branch {
                Some(b) => file.branch_index(b)?,
                None => given.iter().position(|g| !g).unwrap_or(0),
            };
            cons = cons.with_offsets(offsets).with_reference(reference);
        } else if let Some(b) = &self.reference_branch {
            cons = cons.with_reference(file.branch_index(b)?);
        }
        Ok(cons)
    }

    pub fn from_set(cons: &ConstraintSet, names: &[String]) -> Self {
        let n = names.len();
        let offsets = cons.offsets(n);
        Constraints {
            fixed: cons.fixed_k.iter().map(|&(b, capital)| FixedCapital { branch: names[b].clone(), capital }).collect(),
            delta_r: (0..n)
                .filter(|&i| offsets[i] != 0.0)
                .map(|i| RateOffset { branch: names[i].clone(), offset: offsets[i] })
                .collect(),
            reference_branch: (!cons.is_uniform()).then(|| names[cons.reference_branch].clone()),
            reproduction: cons
                .reproduction
                .iter()
                .map(|r| Reproduction { commodity: names[r.commodity].clone(), space: r.space.into() })
                .collect(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AccountRow {
    pub branch: String,
    #[serde(rename = "F_over_n")]
    pub amortization: f64,
    /// Consumption of each commodity, in `AccountsTable::commodities` order.
    pub inputs: Vec<f64>,
    /// `PL` in the value table, `S` in the price table.
    pub surplus: f64,
    #[serde(rename = "W")]
    pub production: f64,
    /// `K` in the value table, `Kp` in the price table.
    #[serde(rename = "K")]
    pub capital: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AccountsTable {
    pub commodities: Vec<String>,
    pub rows: Vec<AccountRow>,
}

impl AccountsTable {
    fn new(names: &[String], a: &Accounts, capital: &[f64]) -> Self {
        let n = names.len();
        AccountsTable {
            commodities: names.to_vec(),
            rows: (0..n)
                .map(|i| AccountRow {
                    branch: names[i].clone(),
                    amortization: a.amortization[i],
                    inputs: a.inputs.row(i).to_vec(),
                    surplus: a.surplus[i],
                    production: a.production[i],
                    capital: capital[i],
                })
                .collect(),
        }
    }

    fn accounts(&self) -> Result<Accounts, String> {
        let n = self.rows.len();
        if self.commodities.len() != n || self.rows.iter().any(|r| r.inputs.len() != n) {
            return Err(format!("table is not {n} x {n}"));
        }
        Ok(Accounts {
            amortization: self.rows.iter().map(|r| r.amortization).collect(),
            inputs: Matrix::from_fn(n, |i, j| self.rows[i].inputs[j]),
            surplus: self.rows.iter().map(|r| r.surplus).collect(),
            production: self.rows.iter().map(|r| r.production).collect(),
        })
    }

    fn render(&self, title: &str, surplus: &str, capital: &str, p: Precision) -> String {
        let mut header = vec![title.to_string(), "F/n".into()];
        header.extend(self.commodities.iter().cloned());
        header.extend([surplus.to_string(), "W".into(), capital.to_string()]);
        let n = self.commodities.len();
        let mut rows: Vec<Vec<String>> = self
            .rows
            .iter()
            .map(|r| {
                let mut row = vec![r.branch.clone(), p.fmt(r.amortization)];
                row.extend(r.inputs.iter().map(|&v| p.fmt(v)));
                row.extend([p.fmt(r.surplus), p.fmt(r.production), p.fmt(r.capital)]);
                row
            })
            .collect();
        let sum = |f: &dyn Fn(&AccountRow) -> f64| p.fmt(self.rows.iter().map(f).sum());
        let mut total = vec!["Total".to_string(), sum(&|r| r.amortization)];
        total.extend((0..n).map(|j| sum(&|r| r.inputs[j])));
        total.extend([sum(&|r| r.surplus), sum(&|r| r.production), sum(&|r| r.capital)]);
        rows.push(total);
        grid(&header, &rows)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BranchResult {
    pub name: String,
    #[serde(rename = "K")]
    pub k: f64,
    #[serde(rename = "Kp")]
    pub kp: f64,
    pub x: f64,
    pub r: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Residuals {
    #[serde(rename = "residual_I")]
    pub residual_i: f64,
    #[serde(rename = "residual_II")]
    pub residual_ii: f64,
    pub z: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DemandRow {
    pub commodity: String,
    pub value: f64,
    pub price: Option<f64>,
    pub stock_dependent: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EigenSummary {
    pub eigen_rate: f64,
    pub q_star: f64,
    pub x_unit: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SolutionReport {
    pub input: TableFile,
    #[serde(rename = "K_total")]
    pub k_total: f64,
    pub constraints: Constraints,
    pub method: MethodTag,
    pub r_star: f64,
    pub branches: Vec<BranchResult>,
    pub value_table: AccountsTable,
    pub price_table: AccountsTable,
    pub residuals: Residuals,
    pub demand: Vec<DemandRow>,
    /// Fixed capital of the next period priced by the machine commodity.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub next_period_fixed_capital: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub zero_fixed: Option<EigenSummary>,
    #[serde(default)]
    pub notes: Vec<String>,
}

impl SolutionReport {
    pub fn build(table: &EconomyTable, k_total: f64, cons: &ConstraintSet, sol: &TransformationSolution) -> Result<Self, CliError> {
        let names = &table.branch_names;
        let c = derive_coefficients(table)?;
        let demand = check_demand(table, Some(sol))?
            .into_iter()
            .map(|d| DemandRow { commodity: names[d.commodity].clone(), value: d.value, price: d.price, stock_dependent: d.stock_dependent })
            .collect();
        Ok(SolutionReport {
            input: TableFile::from_table(table),
            k_total,
            constraints: Constraints::from_set(cons, names),
            method: sol.method.into(),
            r_star: sol.r_star,
            branches: (0..names.len())
                .map(|i| BranchResult { name: names[i].clone(), k: sol.k[i], kp: sol.kp[i], x: sol.x[i], r: sol.r_per_branch[i] })
                .collect(),
            value_table: AccountsTable::new(names, &sol.value_table, &sol.k),
            price_table: AccountsTable::new(names, &sol.price_table, &sol.kp),
            residuals: Residuals { residual_i: sol.residual_i, residual_ii: sol.residual_ii, z: sol.z_at_solution },
            demand,
            next_period_fixed_capital: sol.next_period_fixed_capital(&c),
            zero_fixed: sol.zero_fixed.as_ref().map(|z| EigenSummary { eigen_rate: z.eigen_rate, q_star: z.q_star, x_unit: z.x_unit.clone() }),
            notes: sol.notes.clone(),
        })
    }

    pub fn render(&self, p: Precision) -> String {
        let mut out = String::new();
        out.push_str(&self.value_table.render("VALUES", "PL", "K", p));
        out.push('\n');
        out.push_str(&self.price_table.render("PRICES", "S", "Kp", p));
        out.push('\n');
        let header: Vec<String> = ["Branch", "K", "Kp", "x", "r"].iter().map(|s| s.to_string()).collect();
        let rows: Vec<Vec<String>> = self
            .branches
            .iter()
            .map(|b| vec![b.name.clone(), p.fmt(b.k), p.fmt(b.kp), p.fmt(b.x), p.fmt(b.r)])
            .collect();
        out.push_str(&grid(&header, &rows));
        out.push('\n');
        let method = Method::from(self.method).label();
        out.push_str(&format!("r* = {}  (method: {method})\n", p.fmt(self.r_star)));
        out.push_str(&format!(
            "residual_I = {}  residual_II = {}  z = {}\n",
            p.fmt(self.residuals.residual_i),
            p.fmt(self.residuals.residual_ii),
            p.fmt(self.residuals.z)
        ));
        if let Some(z) = &self.zero_fixed {
            out.push_str(&format!("eigen rate = {}  q* = {}\n", p.fmt(z.eigen_rate), p.fmt(z.q_star)));
        }
        out.push('\n');
        let header: Vec<String> = ["Commodity", "surplus in value", "surplus in price", "stocks needed"].iter().map(|s| s.to_string()).collect();
        let rows: Vec<Vec<String>> = self
            .demand
            .iter()
            .map(|d| vec![d.commodity.clone(), p.fmt(d.value), p.fmt_opt(d.price), if d.stock_dependent { "yes" } else { "no" }.into()])
            .collect();
        out.push_str(&grid(&header, &rows));
        if let Some(f) = &self.next_period_fixed_capital {
            let listed: Vec<String> = f.iter().map(|&v| p.fmt(v)).collect();
            out.push_str(&format!("\nnext-period fixed capital: {}\n", listed.join("  ")));
        }
        for note in &self.notes {
            out.push_str(&format!("note: {note}\n"));
        }
        out
    }

    /// Re-checks the stored numbers against the stored input table.
    /// Returns the violated checks, named as in the solution invariants.
    pub fn violations(&self) -> Vec<String> {
        let fail = |name: &str, detail: String| vec![format!("{name}: {detail}")];
        let table = match self.input.to_table() {
            Ok(t) => t,
            Err(e) => return fail("input", e.to_string()),
        };
        let c = match derive_coefficients(&table) {
            Ok(c) => c,
            Err(e) => return fail("input", e.to_string()),
        };
        let n = table.len();
        if self.branches.len() != n {
            return fail("shape", format!("{} branch results for {n} branches", self.branches.len()));
        }
        let (value_table, price_table) = match (self.value_table.accounts(), self.price_table.accounts()) {
            (Ok(v), Ok(p)) if v.surplus.len() == n && p.surplus.len() == n => (v, p),
            (Err(e), _) | (_, Err(e)) => return fail("shape", e),
            _ => return fail("shape", format!("tables do not have {n} rows")),
        };
        let x: Vec<f64> = self.branches.iter().map(|b| b.x).collect();
        let k: Vec<f64> = self.branches.iter().map(|b| b.k).collect();
        let kp: Vec<f64> = self.branches.iter().map(|b| b.kp).collect();
        let rates: Vec<f64> = self.branches.iter().map(|b| b.r).collect();
        let sum = |v: &[f64]| v.iter().sum::<f64>();
        let stored = TransformationSolution {
            x: x.clone(),
            r_star: self.r_star,
            r_per_branch: rates.clone(),
            k: k.clone(),
            kp: kp.clone(),
            residual_i: (sum(&price_table.surplus) - sum(&value_table.surplus)).abs(),
            residual_ii: (sum(&price_table.production) - sum(&value_table.production)).abs(),
            price_table,
            value_table,
            z_at_solution: self.residuals.z,
            method: self.method.into(),
            zero_fixed: None,
            notes: Vec::new(),
        };
        let mut out = Vec::new();
        if let Err(v) = stored.check(&c) {
            out.push(v.to_string());
        }
        let scale = sum(&stored.value_table.production);
        let tol = RESIDUAL_RTOL * scale;
        if (sum(&k) - self.k_total).abs() > RESIDUAL_RTOL * self.k_total {
            out.push(format!("capital_total: sum K = {} differs from K_total = {}", sum(&k), self.k_total));
        }
        let fresh = TransformationSolution::assemble(&c, x, k, self.r_star, rates, self.method.into());
        let gap = |a: &Accounts, b: &Accounts| {
            let mut worst = 0.0f64;
            for i in 0..n {
                worst = worst
                    .max((a.amortization[i] - b.amortization[i]).abs())
                    .max((a.surplus[i] - b.surplus[i]).abs())
                    .max((a.production[i] - b.production[i]).abs());
                for j in 0..n {
                    worst = worst.max((a.inputs[(i, j)] - b.inputs[(i, j)]).abs());
                }
            }
            worst
        };
        for (name, a, b) in [("value_table", &stored.value_table, &fresh.value_table), ("price_table", &stored.price_table, &fresh.price_table)] {
            let g = gap(a, b);
            if !(g <= tol) {
                out.push(format!("{name}: entries differ from the recomputed table by {g:e} (> {tol:e})"));
            }
        }
        let kp_gap = stored.kp.iter().zip(&fresh.kp).fold(0.0f64, |m, (a, b)| m.max((a - b).abs()));
        if !(kp_gap <= tol) {
            out.push(format!("Kp: price capitals differ from the recomputed ones by {kp_gap:e} (> {tol:e})"));
        }
        out
    }

    pub fn validate(&self) -> Result<(), CliError> {
        let v = self.violations();
        if v.is_empty() {
            Ok(())
        } else {
            Err(CliError::InvalidReport(v))
        }
    }
}
