//! Scenario engine: profit-rate convergence with capital reallocation and the
//! transient profit of a cost-reducing innovation.

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use crate::model::{derive_coefficients, organic_composition_at, EconomyTable, TechCoefficients};
use crate::solver::{solve, ConstraintSet, ReproductionConstraint, SolveError, TransformationSolution};

/// Parameters of a convergence run.
///
/// At iteration `k` the rate differential is `delta_r0 - k * delta_r_step`,
/// branch `i` gets offset `offset_pattern[i] * delta`, and the decremented
/// branch is fixed at `initial_capital - k * capital_decrement`.
#[derive(Clone, Debug, PartialEq)]
pub struct ScenarioConfig {
    pub table: EconomyTable,
    pub k_total: f64,
    pub delta_r0: f64,
    pub delta_r_step: f64,
    pub offset_pattern: Vec<f64>,
    pub reference_branch: usize,
    pub decremented_branch: usize,
    pub initial_capital: f64,
    pub capital_decrement: f64,
    pub iterations: usize,
    /// Further fixed capitals closing the system when `N > 3`.
    pub extra_fixed: Vec<(usize, f64)>,
    pub reproduction: Vec<ReproductionConstraint>,
}

impl ScenarioConfig {
    pub fn validate(&self) -> Result<(), SolveError> {
        let n = self.table.len();
        let bad = |msg: &str| Err(SolveError::InvalidConstraint(msg.into()));
        if self.iterations == 0 {
            return bad("a scenario needs at least one iteration");
        }
        if !(self.delta_r_step >= 0.0 && self.capital_decrement >= 0.0) {
            return bad("decrements must be nonnegative");
        }
        if self.offset_pattern.len() != n {
            return bad("offset pattern needs one entry per branch");
        }
        if self.decremented_branch >= n || self.reference_branch >= n {
            return bad("branch index out of range");
        }
        Ok(())
    }

    /// Rate differential at iteration `k`, computed without accumulation.
    pub fn delta_at(&self, k: usize) -> f64 {
        self.delta_r0 - k as f64 * self.delta_r_step
    }

    pub fn capital_at(&self, k: usize) -> f64 {
        self.initial_capital - k as f64 * self.capital_decrement
    }

    /// Closing equations and offsets of iteration `k`.
    pub fn constraints_at(&self, k: usize) -> ConstraintSet {
        let delta = self.delta_at(k);
        let mut cons = ConstraintSet::new()
            .fix(self.decremented_branch, self.capital_at(k))
            .with_offsets(self.offset_pattern.iter().map(|p| p * delta).collect())
            .with_reference(self.reference_branch);
        cons.fixed_k.extend(self.extra_fixed.iter().copied());
        cons.reproduction.extend(self.reproduction.iter().copied());
        cons
    }
}

/// One iteration of a convergence run.
#[derive(Clone, Debug, PartialEq)]
pub struct TrajectoryRecord {
    pub iteration: usize,
    pub k: Vec<f64>,
    pub r: Vec<f64>,
    /// `sum S / sum Kp`.
    pub r_avg: f64,
    pub s: Vec<f64>,
    pub sum_s: f64,
    pub sum_pl: f64,
    pub co_value: f64,
    pub co_price: f64,
    /// `sum_i (D_i + sum_j x_j U_ij)`.
    pub costs_price: f64,
    pub sum_kp: f64,
    /// Forward difference to the next record; `None` on the last one.
    pub ds1_dk1: Option<f64>,
    pub s1_over_k1: f64,
    pub residual_i: f64,
    pub residual_ii: f64,
}

/// Records of a run, possibly cut short.
#[derive(Clone, Debug, PartialEq)]
pub struct Trajectory {
    pub records: Vec<TrajectoryRecord>,
    /// Why the run stopped early, if it did.
    pub termination: Option<String>,
}

fn record(c: &TechCoefficients, iteration: usize, sol: &TransformationSolution) -> Result<TrajectoryRecord, SolveError> {
    let n = c.len();
    let co = organic_composition_at(c, &sol.k, &sol.x)?;
    let s = sol.price_table.surplus.clone();
    let sum_s: f64 = s.iter().sum();
    let sum_kp: f64 = sol.kp.iter().sum();
    let costs_price = (0..n)
        .map(|i| sol.price_table.amortization[i] + sol.price_table.inputs.row_sum(i))
        .sum();
    Ok(TrajectoryRecord {
        iteration,
        k: sol.k.clone(),
        r: sol.r_per_branch.clone(),
        r_avg: sum_s / sum_kp,
        s1_over_k1: s[0] / sol.k[0],
        s,
        sum_s,
        sum_pl: sol.sum_surplus_value(),
        co_value: co.value_co,
        co_price: co.price_co,
        costs_price,
        sum_kp,
        ds1_dk1: None,
        residual_i: sol.residual_i,
        residual_ii: sol.residual_ii,
    })
}

/// Runs the convergence scenario; a failure after the first iteration ends
/// the run with a partial trajectory.
pub fn run_convergence(config: &ScenarioConfig) -> Result<Trajectory, SolveError> {
    config.validate()?;
    let c = derive_coefficients(&config.table)?;
    let mut records: Vec<TrajectoryRecord> = Vec::with_capacity(config.iterations);
    let mut termination = None;
    for k in 0..config.iterations {
        let outcome = solve(&c, config.k_total, &config.constraints_at(k)).and_then(|sol| record(&c, k, &sol));
        match outcome {
            Ok(rec) => records.push(rec),
            Err(e) if k == 0 => return Err(e),
            Err(e) => {
                termination = Some(format!("iteration {k}: {e}"));
                break;
            }
        }
    }
    for k in 0..records.len().saturating_sub(1) {
        let ds = records[k + 1].s[0] - records[k].s[0];
        let dk = records[k + 1].k[0] - records[k].k[0];
        records[k].ds1_dk1 = Some(ds / dk);
    }
    Ok(Trajectory { records, termination })
}

/// `dS_i/dK_i < S_i/K_i` per step by forward difference; the last record has no step.
pub fn convergence_criterion_for(trajectory: &Trajectory, branch: usize) -> Vec<bool> {
    trajectory
        .records
        .windows(2)
        .map(|w| {
            let slope = (w[1].s[branch] - w[0].s[branch]) / (w[1].k[branch] - w[0].k[branch]);
            slope < w[0].s[branch] / w[0].k[branch]
        })
        .collect()
}

/// Criterion for the branch with the highest rate at the start of the run.
pub fn convergence_criterion(trajectory: &Trajectory) -> Vec<bool> {
    let Some(first) = trajectory.records.first() else {
        return Vec::new();
    };
    let branch = (0..first.r.len()).fold(0, |b, i| if first.r[i] > first.r[b] { i } else { b });
    convergence_criterion_for(trajectory, branch)
}

/// New amortization and variable-capital coefficients of one branch.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Perturbation {
    pub branch: usize,
    pub new_d: f64,
    pub new_v: f64,
}

/// Three phases of the innovation experiment.
#[derive(Clone, Debug, PartialEq)]
pub struct OkishioReport {
    pub base: TransformationSolution,
    /// `S'` of the innovating branch at old capital and prices.
    pub transient_profit: f64,
    /// `r'` of the innovating branch at old capital and prices.
    pub transient_rate: f64,
    pub perturbed: TransformationSolution,
    /// `r' > r`.
    pub innovation_incentive: bool,
    /// `r' > r > r''`.
    pub ordering_holds: bool,
}

/// Coefficients after replacing `d` and `v` of one branch; its surplus value
/// per unit of capital is kept.
pub fn perturb(c: &TechCoefficients, p: &Perturbation) -> Result<TechCoefficients, SolveError> {
    let b = p.branch;
    if b >= c.len() {
        return Err(SolveError::InvalidConstraint("perturbed branch out of range".into()));
    }
    let nc = c.cycles();
    let drift = nc * (p.new_d - c.d[b]) + (p.new_v - c.v(b));
    if !(drift.abs() <= 1e-12 && p.new_d >= 0.0 && p.new_v > 0.0) {
        return Err(SolveError::InvalidConstraint(format!(
            "perturbation must keep branch capital constant (n dd + dv = {drift})"
        )));
    }
    let mut out = c.clone();
    out.d[b] = p.new_d;
    out.f[b] = nc * p.new_d;
    out.u[(b, c.wage_index)] = p.new_v;
    out.e[b] = c.pl[b] / p.new_v;
    out.w[b] = out.d[b] + out.u.row_sum(b) + out.pl[b];
    Ok(out)
}

/// Base solve, transient rate of the innovating branch, and re-solve with
/// the new coefficients and the same frozen capitals.
pub fn run_okishio(
    base: &EconomyTable,
    k_total: f64,
    perturbation: &Perturbation,
    frozen: &ConstraintSet,
) -> Result<OkishioReport, SolveError> {
    let c = derive_coefficients(base)?;
    let first = solve(&c, k_total, frozen)?;
    let cp = perturb(&c, perturbation)?;
    let b = perturbation.branch;
    let wg = c.wage_index;
    let kb = first.k[b];
    let x = &first.x;
    let (v_old, v_new) = (c.v(b) * kb, perturbation.new_v * kb);
    let (d_old, d_new) = (c.d[b] * kb, perturbation.new_d * kb);
    let transient_profit = first.price_table.surplus[b] + x[wg] * (v_old - v_new) - (d_new - d_old);
    let circulating: f64 = (0..c.len()).map(|j| x[j] * cp.u[(b, j)] * kb).sum();
    let transient_rate = transient_profit / (cp.f[b] * kb + circulating);
    let perturbed = solve(&cp, k_total, frozen)?;
    let r = first.r_per_branch[b];
    let innovation_incentive = transient_rate > r;
    let ordering_holds = innovation_incentive && r > perturbed.r_per_branch[b];
    Ok(OkishioReport { base: first, transient_profit, transient_rate, perturbed, innovation_incentive, ordering_holds })
}
