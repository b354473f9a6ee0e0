//! Scenario files and CSV output.

use std::io::Write;

use serde::{Deserialize, Serialize};
use valforme_core::dynamics::{OkishioReport, Perturbation, ScenarioConfig, Trajectory};
use valforme_core::solver::{ConstraintSet, ReproductionConstraint, TransformationSolution};

use crate::error::CliError;
use crate::render::Precision;
use crate::report::{FixedCapital, Reproduction};
use crate::table::TableFile;

/// Convergence run; branches are named.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioFile {
    pub table: TableFile,
    #[serde(rename = "K_total", default, skip_serializing_if = "Option::is_none")]
    pub k_total: Option<f64>,
    pub delta_r0: f64,
    pub delta_r_step: f64,
    /// Multiplier of the rate differential for each branch, in branch order.
    pub offset_pattern: Vec<f64>,
    pub reference_branch: String,
    pub decremented_branch: String,
    pub initial_capital: f64,
    pub capital_decrement: f64,
    pub iterations: usize,
    #[serde(default)]
    pub extra_fixed: Vec<FixedCapital>,
    #[serde(default)]
    pub reproduction: Vec<Reproduction>,
}

impl ScenarioFile {
    pub fn to_config(&self) -> Result<ScenarioConfig, CliError> {
        let table = self.table.to_table()?;
        let k_total = self.k_total.unwrap_or_else(|| table.total_capital());
        let config = ScenarioConfig {
            k_total,
            delta_r0: self.delta_r0,
            delta_r_step: self.delta_r_step,
            offset_pattern: self.offset_pattern.clone(),
            reference_branch: self.table.branch_index(&self.reference_branch)?,
            decremented_branch: self.table.branch_index(&self.decremented_branch)?,
            initial_capital: self.initial_capital,
            capital_decrement: self.capital_decrement,
            iterations: self.iterations,
            extra_fixed: self
                .extra_fixed
                .iter()
                .map(|f| Ok((self.table.branch_index(&f.branch)?, f.capital)))
                .collect::<Result<_, CliError>>()?,
            reproduction: self
                .reproduction
                .iter()
                .map(|r| Ok(ReproductionConstraint { commodity: self.table.branch_index(&r.commodity)?, space: r.space.into() }))
                .collect::<Result<_, CliError>>()?,
            table,
        };
        config.validate()?;
        Ok(config)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PerturbationSpec {
    pub branch: String,
    pub new_d: f64,
    pub new_v: f64,
}

/// Innovation experiment: base solve, transient, re-solve at frozen capitals.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OkishioFile {
    pub table: TableFile,
    #[serde(rename = "K_total", default, skip_serializing_if = "Option::is_none")]
    pub k_total: Option<f64>,
    #[serde(default)]
    pub frozen: Vec<FixedCapital>,
    #[serde(default)]
    pub reproduction: Vec<Reproduction>,
    pub perturbation: PerturbationSpec,
}

impl OkishioFile {
    pub fn constraints(&self) -> Result<ConstraintSet, CliError> {
        let mut cons = ConstraintSet::new();
        for f in &self.frozen {
            cons = cons.fix(self.table.branch_index(&f.branch)?, f.capital);
        }
        for r in &self.reproduction {
            cons = cons.reproduce(self.table.branch_index(&r.commodity)?, r.space.into());
        }
        Ok(cons)
    }

    pub fn perturbation(&self) -> Result<Perturbation, CliError> {
        let p = &self.perturbation;
        Ok(Perturbation { branch: self.table.branch_index(&p.branch)?, new_d: p.new_d, new_v: p.new_v })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Phase {
    pub r_star: f64,
    pub x: Vec<f64>,
    #[serde(rename = "K")]
    pub k: Vec<f64>,
}

impl From<&TransformationSolution> for Phase {
    fn from(s: &TransformationSolution) -> Self {
        Phase { r_star: s.r_star, x: s.x.clone(), k: s.k.clone() }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OkishioOutput {
    pub innovating_branch: String,
    pub base: Phase,
    pub transient_profit: f64,
    pub transient_rate: f64,
    pub perturbed: Phase,
    pub innovation_incentive: bool,
    pub ordering_holds: bool,
}

impl OkishioOutput {
    pub fn new(branch: String, rep: &OkishioReport) -> Self {
        OkishioOutput {
            innovating_branch: branch,
            base: (&rep.base).into(),
            transient_profit: rep.transient_profit,
            transient_rate: rep.transient_rate,
            perturbed: (&rep.perturbed).into(),
            innovation_incentive: rep.innovation_incentive,
            ordering_holds: rep.ordering_holds,
        }
    }
}

pub fn trajectory_header(n: usize) -> Vec<String> {
    let mut h = vec!["iteration".to_string()];
    h.extend((1..=n).map(|i| format!("K_{i}")));
    h.extend((1..=n).map(|i| format!("r_{i}")));
    h.extend(["r_avg", "sum_S", "sum_PL", "co_value", "co_price", "costs_price", "dS1_dK1", "S1_over_K1"].map(String::from));
    h
}

/// One CSV row per iteration; the last record has an empty `dS1_dK1`.
pub fn write_trajectory(tr: &Trajectory, n: usize, p: Precision, out: &mut dyn Write) -> Result<(), CliError> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(trajectory_header(n)).map_err(csv_error)?;
    for rec in &tr.records {
        let mut row = vec![rec.iteration.to_string()];
        row.extend(rec.k.iter().map(|&v| p.fmt(v)));
        row.extend(rec.r.iter().map(|&v| p.fmt(v)));
        row.extend(
            [rec.r_avg, rec.sum_s, rec.sum_pl, rec.co_value, rec.co_price, rec.costs_price].iter().map(|&v| p.fmt(v)),
        );
        row.push(p.fmt_opt(rec.ds1_dk1));
        row.push(p.fmt(rec.s1_over_k1));
        w.write_record(&row).map_err(csv_error)?;
    }
    w.flush()?;
    Ok(())
}

pub fn sweep_header(n: usize) -> Vec<String> {
    let mut h = vec!["fixed_K".to_string()];
    h.extend((1..=n).map(|i| format!("K_{i}")));
    h.push("r_star".into());
    h.extend((1..=n).map(|i| format!("x_{i}")));
    h
}

pub fn write_sweep(rows: &[(f64, TransformationSolution)], n: usize, p: Precision, out: &mut dyn Write) -> Result<(), CliError> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(sweep_header(n)).map_err(csv_error)?;
    for (fixed, sol) in rows {
        let mut row = vec![p.fmt(*fixed)];
        row.extend(sol.k.iter().map(|&v| p.fmt(v)));
        row.push(p.fmt(sol.r_star));
        row.extend(sol.x.iter().map(|&v| p.fmt(v)));
        w.write_record(&row).map_err(csv_error)?;
    }
    w.flush()?;
    Ok(())
}

fn csv_error(e: csv::Error) -> CliError {
    CliError::Output(std::io::Error::other(e.to_string()))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn trajectory_header_is_exact() {
        assert_eq!(
            trajectory_header(3).join(","),
            "iteration,K_1,K_2,K_3,r_1,r_2,r_3,r_avg,sum_S,sum_PL,co_value,co_price,costs_price,dS1_dK1,S1_over_K1"
        );
    }

    #[test]
    fn sweep_header_lists_capitals_rate_and_prices() {
        assert_eq!(sweep_header(2).join(","), "fixed_K,K_1,K_2,r_star,x_1,x_2");
    }
}
