//! Subcommands.

use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use rayon::prelude::*;
use serde::Serialize;
use valforme_core::dynamics::{convergence_criterion, run_convergence, run_okishio};
use valforme_core::linalg::{dominant_eigenpair, Matrix};
use valforme_core::model::{derive_coefficients, EconomyTable};
use valforme_core::solver::{build_bortkiewicz, solve, ConstraintSet, TransformationSolution};

use crate::config::{write_sweep, write_trajectory, OkishioFile, OkishioOutput, ScenarioFile};
use crate::error::CliError;
use crate::render::Precision;
use crate::report::{Constraints, FixedCapital, RateOffset, Reproduction, SolutionReport, SpaceTag};
use crate::table::{load_json, to_json, TableFile};

/// Upper bound on the number of swept points.
const MAX_SWEEP_POINTS: usize = 1_000_000;

#[derive(Debug, Parser)]
#[command(name = "valforme", version, about = "Values into production prices: solver, sweeps and scenarios")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Solve one economy table for r*, prices and the capital allocation.
    Solve(SolveArgs),
    /// Solve for a range of values of one fixed capital.
    Sweep(SweepArgs),
    /// Run a convergence scenario or the innovation experiment.
    Simulate {
        #[command(subcommand)]
        kind: SimulateKind,
    },
    /// Add a luxury branch priced at its value to a three-branch economy.
    Bortkiewicz(BortkiewiczArgs),
    /// Dominant eigenpair of a table without fixed capital.
    Eigen(EigenArgs),
    /// Re-check every invariant of a stored report.
    Validate(ValidateArgs),
}

#[derive(Debug, Args)]
pub struct TableArgs {
    /// Economy table JSON.
    #[arg(long)]
    pub input: PathBuf,
    /// Number of production cycles over which fixed capital is amortized.
    #[arg(long = "n")]
    pub n_cycles: Option<u32>,
    /// Total capital; defaults to the table's K_total or its summed capitals.
    #[arg(long)]
    pub k_total: Option<f64>,
}

#[derive(Debug, Args)]
pub struct ClosingArgs {
    /// Hold a branch's capital fixed, as BRANCH=AMOUNT.
    #[arg(long = "fix", value_parser = parse_assignment)]
    pub fix: Vec<(String, f64)>,
    /// Require production of a commodity to equal its consumption, as repro:COMMODITY:value|price.
    #[arg(long = "constraint", value_parser = parse_reproduction)]
    pub constraint: Vec<Reproduction>,
}

#[derive(Debug, Args)]
pub struct SolveArgs {
    #[command(flatten)]
    pub table: TableArgs,
    #[command(flatten)]
    pub closing: ClosingArgs,
    /// Offset of a branch's rate from the reference rate, as BRANCH=OFFSET.
    #[arg(long = "delta-r", value_parser = parse_assignment)]
    pub delta_r: Vec<(String, f64)>,
    /// Write the JSON report here; `-` prints it instead of the tables.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct SweepArgs {
    #[command(flatten)]
    pub table: TableArgs,
    #[command(flatten)]
    pub closing: ClosingArgs,
    /// Branch whose capital is swept.
    #[arg(long)]
    pub vary: String,
    /// First value of the swept capital.
    #[arg(long)]
    pub from: f64,
    /// Last value, included when reached by whole steps.
    #[arg(long)]
    pub to: f64,
    /// Positive increment between swept values.
    #[arg(long)]
    pub step: f64,
    /// CSV destination; standard output by default.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Subcommand)]
pub enum SimulateKind {
    /// Rate-differential run with capital transfers; writes the trajectory CSV.
    Converge {
        /// Scenario JSON.
        #[arg(long)]
        config: PathBuf,
        /// Data destination; standard output by default.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Cost-reducing innovation in one branch; writes the three-phase JSON.
    Okishio {
        /// Scenario JSON.
        #[arg(long)]
        config: PathBuf,
        /// Data destination; standard output by default.
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Debug, Args)]
pub struct BortkiewiczArgs {
    /// Three-branch base table JSON.
    #[arg(long)]
    pub input: PathBuf,
    /// Amortization of the luxury branch per unit of its capital.
    #[arg(long = "d-L")]
    pub d_l: Option<f64>,
    /// Total capital of the four-branch economy; defaults to the base table's.
    #[arg(long)]
    pub k_total: Option<f64>,
    /// Write the JSON report of the four-branch solution here.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct EigenArgs {
    /// Economy table JSON with all fixed capital zero.
    #[arg(long)]
    pub input: PathBuf,
}

#[derive(Debug, Args)]
pub struct ValidateArgs {
    /// Report JSON written by `solve --out`.
    #[arg(long)]
    pub input: PathBuf,
}

fn parse_assignment(raw: &str) -> Result<(String, f64), String> {
    let (name, value) = raw.split_once('=').ok_or_else(|| format!("expected BRANCH=NUMBER, got {raw:?}"))?;
    let v: f64 = value.trim().parse().map_err(|_| format!("{value:?} is not a number"))?;
    if !v.is_finite() {
        return Err(format!("{value:?} is not finite"));
    }
    Ok((name.trim().to_string(), v))
}

fn parse_reproduction(raw: &str) -> Result<Reproduction, String> {
    let parts: Vec<&str> = raw.split(':').collect();
    match parts.as_slice() {
        ["repro", commodity, space] => {
            let space = match *space {
                "value" => SpaceTag::Value,
                "price" => SpaceTag::Price,
                other => return Err(format!("space must be value or price, got {other:?}")),
            };
            Ok(Reproduction { commodity: commodity.to_string(), space })
        }
        _ => Err(format!("expected repro:COMMODITY:value|price, got {raw:?}")),
    }
}

/// Output streams and rendering settings of one invocation.
pub struct Io<'a> {
    pub stdout: &'a mut dyn Write,
    pub stderr: &'a mut dyn Write,
    pub precision: Precision,
}

pub fn run(cli: Cli, io: &mut Io<'_>) -> Result<(), CliError> {
    match cli.command {
        Command::Solve(a) => cmd_solve(a, io),
        Command::Sweep(a) => cmd_sweep(a, io),
        Command::Simulate { kind: SimulateKind::Converge { config, out } } => cmd_converge(&config, out.as_deref(), io),
        Command::Simulate { kind: SimulateKind::Okishio { config, out } } => cmd_okishio(&config, out.as_deref(), io),
        Command::Bortkiewicz(a) => cmd_bortkiewicz(a, io),
        Command::Eigen(a) => cmd_eigen(&a.input, io),
        Command::Validate(a) => cmd_validate(&a.input, io),
    }
}

fn write_file(path: &Path, text: &str) -> Result<(), CliError> {
    std::fs::write(path, text).map_err(|source| CliError::Io { path: path.to_path_buf(), source })
}

/// Table file with command-line overrides applied, its table and total capital.
fn load_table(a: &TableArgs) -> Result<(TableFile, EconomyTable, f64), CliError> {
    let mut file: TableFile = load_json(&a.input)?;
    if let Some(n) = a.n_cycles {
        file.n_cycles = n;
    }
    if let Some(k) = a.k_total {
        file.k_total = Some(k);
    }
    let table = file.to_table()?;
    let k_total = table.total_capital();
    Ok((file, table, k_total))
}

fn closing(file: &TableFile, c: &ClosingArgs, delta_r: &[(String, f64)]) -> Result<ConstraintSet, CliError> {
    Constraints {
        fixed: c.fix.iter().map(|(b, capital)| FixedCapital { branch: b.clone(), capital: *capital }).collect(),
        delta_r: delta_r.iter().map(|(b, offset)| RateOffset { branch: b.clone(), offset: *offset }).collect(),
        reference_branch: None,
        reproduction: c.constraint.clone(),
    }
    .to_set(file)
}

fn cmd_solve(a: SolveArgs, io: &mut Io<'_>) -> Result<(), CliError> {
    let (file, table, k_total) = load_table(&a.table)?;
    let cons = closing(&file, &a.closing, &a.delta_r)?;
    let c = derive_coefficients(&table)?;
    let sol = solve(&c, k_total, &cons)?;
    let report = SolutionReport::build(&table, k_total, &cons, &sol)?;
    match a.out.as_deref() {
        Some(p) if p == Path::new("-") => io.stdout.write_all(to_json(&report).as_bytes())?,
        Some(p) => {
            write_file(p, &to_json(&report))?;
            io.stdout.write_all(report.render(io.precision).as_bytes())?;
        }
        None => io.stdout.write_all(report.render(io.precision).as_bytes())?,
    }
    Ok(())
}

fn cmd_sweep(a: SweepArgs, io: &mut Io<'_>) -> Result<(), CliError> {
    let (file, table, k_total) = load_table(&a.table)?;
    let vary = file.branch_index(&a.vary)?;
    if !(a.step > 0.0 && a.from.is_finite() && a.to.is_finite() && a.from <= a.to) {
        return Err(CliError::Input("sweep needs finite --from <= --to and a positive --step".into()));
    }
    let count = ((a.to - a.from) / a.step * (1.0 + 1e-12)).floor() as usize + 1;
    if count > MAX_SWEEP_POINTS {
        return Err(CliError::Input(format!("sweep would evaluate {count} points (limit {MAX_SWEEP_POINTS})")));
    }
    let base = closing(&file, &a.closing, &[])?;
    if base.fixed_k.iter().any(|&(b, _)| b == vary) {
        return Err(CliError::Input(format!("branch {:?} is both swept and fixed", a.vary)));
    }
    let c = derive_coefficients(&table)?;
    let results: Vec<(f64, Result<TransformationSolution, String>)> = (0..count)
        .into_par_iter()
        .map(|i| {
            let v = a.from + i as f64 * a.step;
            let mut cons = base.clone();
            cons.fixed_k.insert(0, (vary, v));
            (v, solve(&c, k_total, &cons).map_err(|e| e.to_string()))
        })
        .collect();
    let mut rows = Vec::new();
    for (v, r) in results {
        match r {
            Ok(sol) => rows.push((v, sol)),
            Err(e) => writeln!(io.stderr, "skipped {}={}: {e}", a.vary, io.precision.fmt(v))?,
        }
    }
    if rows.is_empty() {
        return Err(CliError::EmptySweep);
    }
    let n = table.len();
    match &a.out {
        Some(p) => {
            let mut buf = Vec::new();
            write_sweep(&rows, n, io.precision, &mut buf)?;
            std::fs::write(p, buf).map_err(|source| CliError::Io { path: p.clone(), source })
        }
        None => write_sweep(&rows, n, io.precision, io.stdout),
    }
}

fn verdict(ok: bool) -> &'static str {
    if ok {
        "PASS"
    } else {
        "FAIL"
    }
}

fn cmd_converge(config: &Path, out: Option<&Path>, io: &mut Io<'_>) -> Result<(), CliError> {
    let file: ScenarioFile = load_json(config)?;
    let cfg = file.to_config()?;
    let tr = run_convergence(&cfg)?;
    let n = cfg.table.len();
    let falling = tr.records.windows(2).all(|w| w[1].r_avg < w[0].r_avg);
    let crit = convergence_criterion(&tr);
    let held = crit.iter().filter(|&&b| b).count();
    let mut summary = format!("average rate strictly decreasing: {}\n", verdict(falling));
    summary.push_str(&format!(
        "convergence criterion dS1/dK1 < S1/K1: {} ({held}/{})\n",
        verdict(held == crit.len()),
        crit.len()
    ));
    if let Some(t) = &tr.termination {
        summary.push_str(&format!("stopped early at {t}\n"));
    }
    match out {
        Some(p) => {
            let mut buf = Vec::new();
            write_trajectory(&tr, n, io.precision, &mut buf)?;
            std::fs::write(p, buf).map_err(|source| CliError::Io { path: p.to_path_buf(), source })?;
            io.stdout.write_all(summary.as_bytes())?;
        }
        None => {
            write_trajectory(&tr, n, io.precision, io.stdout)?;
            io.stderr.write_all(summary.as_bytes())?;
        }
    }
    Ok(())
}

fn cmd_okishio(config: &Path, out: Option<&Path>, io: &mut Io<'_>) -> Result<(), CliError> {
    let file: OkishioFile = load_json(config)?;
    let table = file.table.to_table()?;
    let k_total = file.k_total.unwrap_or_else(|| table.total_capital());
    let p = file.perturbation()?;
    let rep = run_okishio(&table, k_total, &p, &file.constraints()?)?;
    let output = OkishioOutput::new(table.branch_names[p.branch].clone(), &rep);
    let f = |v: f64| io.precision.fmt(v);
    let summary = format!(
        "r = {}\nS' = {}\nr' = {}\nr'' = {}\nr' > r > r'': {}\n",
        f(rep.base.r_star),
        f(rep.transient_profit),
        f(rep.transient_rate),
        f(rep.perturbed.r_star),
        verdict(rep.ordering_holds)
    );
    match out {
        Some(path) => {
            write_file(path, &to_json(&output))?;
            io.stdout.write_all(summary.as_bytes())?;
        }
        None => {
            io.stdout.write_all(to_json(&output).as_bytes())?;
            io.stderr.write_all(summary.as_bytes())?;
        }
    }
    Ok(())
}

fn cmd_bortkiewicz(a: BortkiewiczArgs, io: &mut Io<'_>) -> Result<(), CliError> {
    let mut file: TableFile = load_json(&a.input)?;
    if let Some(k) = a.k_total {
        file.k_total = Some(k);
    }
    let base = file.to_table()?;
    let res = build_bortkiewicz(&base, a.d_l)?;
    let w = res.table.wage_index;
    let cons = ConstraintSet::new().fix(w, res.solution.k[w]).fix(3, res.solution.k[3]);
    let report = SolutionReport::build(&res.table, res.table.total_capital(), &cons, &res.solution)?;
    if let Some(p) = &a.out {
        write_file(p, &to_json(&report))?;
    }
    let mut text = String::from("constructed table:\n");
    text.push_str(&to_json(&report.input));
    text.push('\n');
    text.push_str(&report.render(io.precision));
    text.push_str(&format!(
        "\nx_L = {}  fixed-point iterations: {}\n",
        io.precision.fmt(res.solution.x[3]),
        res.iterations
    ));
    io.stdout.write_all(text.as_bytes())?;
    Ok(())
}

#[derive(Serialize)]
struct EigenOutput {
    #[serde(rename = "A")]
    a: Vec<Vec<f64>>,
    lambda: f64,
    r: f64,
    x_u: Vec<f64>,
}

fn cmd_eigen(input: &Path, io: &mut Io<'_>) -> Result<(), CliError> {
    let file: TableFile = load_json(input)?;
    let table = file.to_table()?;
    if let Some(b) = table.fixed_capital.iter().position(|&f| f != 0.0) {
        return Err(CliError::Infeasible(format!(
            "the eigen method needs every F = 0; branch {:?} has F = {}",
            table.branch_names[b], table.fixed_capital[b]
        )));
    }
    let c = derive_coefficients(&table)?;
    let n = c.len();
    let a = Matrix::from_fn(n, |i, j| c.u[(i, j)] / c.w[i]);
    let (lambda, x_u) = dominant_eigenpair(&a).map_err(|e| CliError::Infeasible(format!("no dominant eigenpair: {e}")))?;
    let out = EigenOutput { a: (0..n).map(|i| a.row(i).to_vec()).collect(), lambda, r: 1.0 / lambda - 1.0, x_u };
    io.stdout.write_all(to_json(&out).as_bytes())?;
    let f = |v: f64| io.precision.fmt(v);
    writeln!(io.stderr, "lambda = {}  r = {}", f(out.lambda), f(out.r))?;
    Ok(())
}

fn cmd_validate(input: &Path, io: &mut Io<'_>) -> Result<(), CliError> {
    let report: SolutionReport = load_json(input)?;
    report.validate()?;
    writeln!(io.stdout, "{}: all invariants hold", input.display())?;
    Ok(())
}
