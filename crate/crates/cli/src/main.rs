//! `disclab` — generate random t-regular set systems, solve them with the
//! Beck-Fiala, phased, or full-reduction pipelines, sweep parameter grids
//! into CSV, and check cube containment of the fractional discrepancy
//! polytope.
//!
//! Exit codes: 0 success, 1 usage/input error, 2 solver breakdown,
//! 3 capacity exceeded.

mod config;
mod csvio;

use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use clap::{Parser, Subcommand, ValueEnum};
use rayon::prelude::*;

use config::{ConfigFlags, FileConfig, ResolvedConfig};
use csvio::RunRow;
use disclab::phased::{self, AbortReason, PhaseConfig};
use disclab::reduction;
use disclab::rng::derive_seed;
use disclab::set_system::{self, Coloring, SetSystem};
use disclab::Error as CoreError;

#[derive(Parser)]
#[command(name = "disclab", version, about)]
struct Cli {
    /// TOML config file; flags take precedence over its values.
    #[arg(long, global = true, value_name = "PATH")]
    config: Option<PathBuf>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Write a random t-regular set system in the canonical text format.
    Generate {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        m: usize,
        #[arg(long)]
        t: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, value_name = "PATH")]
        out: PathBuf,
    },
    /// Solve one instance and report a CSV row.
    Solve {
        /// Read the instance from a file instead of generating it.
        #[arg(long, value_name = "PATH", conflicts_with_all = ["n", "m", "t"])]
        input: Option<PathBuf>,
        #[arg(long, requires_all = ["m", "t"])]
        n: Option<usize>,
        #[arg(long)]
        m: Option<usize>,
        #[arg(long)]
        t: Option<usize>,
        /// Seed for generation and for the solver.
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, value_enum, default_value_t = Algorithm::Phased)]
        algorithm: Algorithm,
        /// Head size for the full pipeline (default ⌈C_k·m·ln²m⌉).
        #[arg(long)]
        k: Option<usize>,
        /// Phase budget constant c.
        #[arg(long)]
        c: Option<f64>,
        /// Head-size constant C_k.
        #[arg(long = "C-k", alias = "ck")]
        ck: Option<f64>,
        #[command(flatten)]
        knobs: Knobs,
        /// Also write the CSV row (with schema header) to this file.
        #[arg(long, value_name = "PATH")]
        out: Option<PathBuf>,
    },
    /// Run a parameter grid, one CSV row per run plus a summary CSV.
    Sweep {
        #[arg(long, value_delimiter = ',', required = true)]
        m: Vec<usize>,
        #[arg(long, value_delimiter = ',', required = true)]
        t: Vec<usize>,
        /// Element counts; defaults to n = m per cell.
        #[arg(long, value_delimiter = ',')]
        n: Option<Vec<usize>>,
        /// Budget constants to sweep (default: the configured c).
        #[arg(long, value_delimiter = ',')]
        c: Option<Vec<f64>>,
        /// Head-size constants to sweep (full pipeline only).
        #[arg(long = "C-k", alias = "ck", value_delimiter = ',')]
        ck: Option<Vec<f64>>,
        /// n = n-mult · k for full-pipeline cells without an explicit n.
        #[arg(long, default_value_t = 4)]
        n_mult: usize,
        #[arg(long, default_value_t = 20)]
        seeds: u64,
        /// Master seed; per-run seeds are derived deterministically.
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, value_enum, default_value_t = Algorithm::Phased)]
        algorithm: Algorithm,
        #[command(flatten)]
        knobs: Knobs,
        #[arg(long, value_name = "PATH")]
        out: PathBuf,
        /// Worker threads; never affects results.
        #[arg(long)]
        jobs: Option<usize>,
    },
    /// Containment verdict for the system in a file: is the ±2t cube
    /// inside the fractional discrepancy polytope?
    Check {
        #[arg(long, value_name = "PATH")]
        input: PathBuf,
        #[arg(long)]
        t: Option<usize>,
        /// Random ℓ1-sphere directions for the evidence-only sampler.
        #[arg(long)]
        trials: Option<usize>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Algorithm {
    BeckFiala,
    Phased,
    Full,
}

impl Algorithm {
    fn name(self) -> &'static str {
        match self {
            Algorithm::BeckFiala => "beck-fiala",
            Algorithm::Phased => "phased",
            Algorithm::Full => "full",
        }
    }
}

/// Solver knobs shared by `solve` and `sweep`.
#[derive(Debug, Clone, clap::Args)]
struct Knobs {
    /// Freeze threshold δ (default 1/n).
    #[arg(long)]
    delta: Option<f64>,
    /// Numeric tolerance.
    #[arg(long)]
    tol: Option<f64>,
    /// Walk step size γ.
    #[arg(long)]
    gamma: Option<f64>,
    /// Walk step count T.
    #[arg(long)]
    steps: Option<usize>,
    /// Walk restarts per iteration.
    #[arg(long)]
    max_restarts: Option<usize>,
}

impl Knobs {
    fn flags(&self, c: Option<f64>, ck: Option<f64>) -> ConfigFlags {
        ConfigFlags {
            c,
            ck,
            delta: self.delta,
            tol: self.tol,
            gamma: self.gamma,
            steps: self.steps,
            max_restarts: self.max_restarts,
            jobs: None,
            trials: None,
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => 1,
            };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {}", e.message);
            ExitCode::from(e.code)
        }
    }
}

struct CliError {
    code: u8,
    message: String,
}

impl CliError {
    fn usage(message: impl Into<String>) -> Self {
        CliError { code: 1, message: message.into() }
    }
}

impl From<CoreError> for CliError {
    fn from(e: CoreError) -> Self {
        let code = match &e {
            CoreError::InvalidParameter(_) | CoreError::Parse(_) => 1,
            CoreError::Capacity(_) => 3,
            _ => 2,
        };
        CliError { code, message: e.to_string() }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError { code: 1, message: e.to_string() }
    }
}

fn run(cli: Cli) -> Result<(), CliError> {
    let file_cfg = match &cli.config {
        Some(path) => FileConfig::load(path).map_err(CliError::usage)?,
        None => FileConfig::default(),
    };
    match cli.command {
        Command::Generate { n, m, t, seed, out } => {
            let sys = SetSystem::generate_random(n, m, t, seed)?;
            std::fs::write(&out, sys.render())?;
            println!("wrote {} ({} elements, {} sets, degree {})", out.display(), n, m, t);
            Ok(())
        }
        Command::Solve { input, n, m, t, seed, algorithm, k, c, ck, knobs, out } => {
            let cfg = config::resolve(&knobs.flags(c, ck), &file_cfg);
            let sys = load_or_generate(input.as_deref(), n, m, t, seed)?;
            let row = solve_one(&sys, algorithm, seed, k, &cfg)?;
            println!(
                "{} on n={} m={} t={}: discrepancy {:.3}{}{}",
                row.algorithm,
                row.n,
                row.m,
                row.t,
                row.discrepancy,
                if row.fallback_used { " (fallback)" } else { "" },
                row.abort_iteration
                    .map(|i| format!(" (aborted at iteration {i})"))
                    .unwrap_or_default(),
            );
            let csv = format!(
                "{}\n{}\n{}\n",
                csvio::SOLVE_SCHEMA,
                csvio::SOLVE_HEADER,
                row.solve_line()
            );
            match out {
                Some(path) => std::fs::write(path, csv)?,
                None => print!("{csv}"),
            }
            Ok(())
        }
        Command::Sweep {
            m,
            t,
            n,
            c,
            ck,
            n_mult,
            seeds,
            seed,
            algorithm,
            knobs,
            out,
            jobs,
        } => {
            let mut flags = knobs.flags(None, None);
            flags.jobs = jobs;
            let cfg = config::resolve(&flags, &file_cfg);
            sweep(SweepSpec {
                m_list: m,
                t_list: t,
                n_list: n,
                c_list: c,
                ck_list: ck,
                n_mult,
                seeds,
                master_seed: seed,
                algorithm,
                cfg,
                out,
            })
        }
        Command::Check { input, t, trials, seed } => {
            let flags = ConfigFlags { trials, ..ConfigFlags::default() };
            let cfg = config::resolve(&flags, &file_cfg);
            let text = std::fs::read_to_string(&input)?;
            let sys = SetSystem::parse(&text)?;
            let t = t.unwrap_or_else(|| sys.t());
            let a = sys.incidence();
            if sys.m() <= 16 {
                let rep = reduction::containment_check_exact(&a, t, cfg.tol)?;
                println!("CONTAINED={} mode=exact m={} k={} t={t}", rep.contained, sys.m(), sys.n());
                if let Some(q) = rep.failing_vertex {
                    println!("failing_vertex={q:?}");
                }
                if let Some(cert) = rep.certificate {
                    let val = reduction::l1_dual_value(&a, &cert.direction);
                    println!("dual_direction_l1_value={val:.6}");
                }
            } else {
                let rep = reduction::dual_condition_sample(&a, t, cfg.trials, seed);
                let verdict = if rep.certifies_noncontainment { "false" } else { "unknown" };
                println!(
                    "CONTAINED={verdict} mode=evidence-only m={} k={} t={t} min_l1={:.6} evaluated={}",
                    sys.m(),
                    sys.n(),
                    rep.min_value,
                    rep.evaluated
                );
            }
            Ok(())
        }
    }
}

fn load_or_generate(
    input: Option<&std::path::Path>,
    n: Option<usize>,
    m: Option<usize>,
    t: Option<usize>,
    seed: u64,
) -> Result<SetSystem, CliError> {
    match input {
        Some(path) => {
            let text = std::fs::read_to_string(path)?;
            Ok(SetSystem::parse(&text)?)
        }
        None => {
            let (Some(n), Some(m), Some(t)) = (n, m, t) else {
                return Err(CliError::usage(
                    "either --input or all of --n/--m/--t are required",
                ));
            };
            Ok(SetSystem::generate_random(n, m, t, seed)?)
        }
    }
}

fn abort_iteration(abort: &Option<AbortReason>) -> Option<usize> {
    match abort {
        Some(AbortReason::PotentialCondition { iteration, .. })
        | Some(AbortReason::WalkExhausted { iteration, .. }) => Some(*iteration),
        Some(AbortReason::HeadInfeasible) | None => None,
    }
}

fn solve_one(
    sys: &SetSystem,
    algorithm: Algorithm,
    seed: u64,
    k: Option<usize>,
    cfg: &ResolvedConfig,
) -> Result<RunRow, CliError> {
    let start = Instant::now();
    let phase_cfg: PhaseConfig = cfg.phase_config(seed);
    let (discrepancy, fallback_used, abort, head_infeasible, k_used) = match algorithm {
        Algorithm::BeckFiala => {
            let out = disclab::beck_fiala::beck_fiala_color(
                sys,
                &Coloring::zeros(sys.n()),
                cfg.tol,
            )?;
            (set_system::discrepancy(sys, &out)?, false, None, None, None)
        }
        Algorithm::Phased => {
            let rep = phased::solve(sys, &Coloring::zeros(sys.n()), &phase_cfg)?;
            let abort = abort_iteration(&rep.trace.abort);
            (rep.discrepancy_inf, rep.fallback_used, abort, None, None)
        }
        Algorithm::Full => {
            let k = k.unwrap_or_else(|| reduction::default_head_size(sys.m(), cfg.ck));
            let rep = reduction::solve_full(sys, &phase_cfg, k)?;
            let abort = abort_iteration(&rep.solve.trace.abort);
            (
                rep.solve.discrepancy_inf,
                rep.solve.fallback_used,
                abort,
                Some(rep.head_infeasible),
                Some(rep.k),
            )
        }
    };
    Ok(RunRow {
        n: sys.n(),
        m: sys.m(),
        t: sys.t(),
        k: k_used,
        ck: None,
        seed,
        algorithm: algorithm.name().to_string(),
        c: cfg.c,
        discrepancy,
        fallback_used,
        abort_iteration: abort,
        head_infeasible,
        wall_ms: start.elapsed().as_millis(),
    })
}

struct SweepSpec {
    m_list: Vec<usize>,
    t_list: Vec<usize>,
    n_list: Option<Vec<usize>>,
    c_list: Option<Vec<f64>>,
    ck_list: Option<Vec<f64>>,
    n_mult: usize,
    seeds: u64,
    master_seed: u64,
    algorithm: Algorithm,
    cfg: ResolvedConfig,
    out: PathBuf,
}

#[derive(Debug, Clone)]
struct Cell {
    n: Option<usize>,
    m: usize,
    t: usize,
    c: f64,
    ck: Option<f64>,
}

fn sweep(spec: SweepSpec) -> Result<(), CliError> {
    let c_list = spec.c_list.clone().unwrap_or_else(|| vec![spec.cfg.c]);
    let ck_list: Vec<Option<f64>> = match (&spec.ck_list, spec.algorithm) {
        (Some(list), _) => list.iter().map(|&v| Some(v)).collect(),
        (None, Algorithm::Full) => vec![Some(spec.cfg.ck)],
        (None, _) => vec![None],
    };
    let n_list: Vec<Option<usize>> = match &spec.n_list {
        Some(list) => list.iter().map(|&v| Some(v)).collect(),
        None => vec![None],
    };

    let mut cells = Vec::new();
    for &m in &spec.m_list {
        for &t in &spec.t_list {
            if t > m {
                continue;
            }
            for &n in &n_list {
                for &c in &c_list {
                    for &ck in &ck_list {
                        cells.push(Cell { n, m, t, c, ck });
                    }
                }
            }
        }
    }

    // One task per (cell, seed); seeds are derived from the task index so
    // results do not depend on the worker pool.
    let mut tasks = Vec::new();
    for cell in &cells {
        for s in 0..spec.seeds {
            let idx = tasks.len() as u64;
            tasks.push((tasks.len(), cell.clone(), derive_seed(spec.master_seed, idx), s));
        }
    }

    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(spec.cfg.jobs.max(1))
        .build()
        .map_err(|e| CliError::usage(format!("worker pool: {e}")))?;

    let mut rows: Vec<(usize, Result<RunRow, CliError>)> = pool.install(|| {
        tasks
            .par_iter()
            .map(|(idx, cell, seed, _)| (*idx, run_cell(&spec, cell, *seed)))
            .collect()
    });
    rows.sort_by_key(|(idx, _)| *idx);

    let mut lines = String::new();
    lines.push_str(csvio::SWEEP_SCHEMA);
    lines.push('\n');
    lines.push_str(csvio::SWEEP_HEADER);
    lines.push('\n');
    let mut ok_rows = Vec::new();
    for (_, row) in rows {
        let row = row?;
        lines.push_str(&row.sweep_line());
        lines.push('\n');
        ok_rows.push(row);
    }
    std::fs::write(&spec.out, lines)?;

    let summary_path = summary_path(&spec.out);
    std::fs::write(&summary_path, summarize(&ok_rows))?;
    println!(
        "wrote {} ({} rows) and {}",
        spec.out.display(),
        ok_rows.len(),
        summary_path.display()
    );
    Ok(())
}

fn run_cell(spec: &SweepSpec, cell: &Cell, seed: u64) -> Result<RunRow, CliError> {
    let cfg = ResolvedConfig { c: cell.c, ck: cell.ck.unwrap_or(spec.cfg.ck), ..spec.cfg.clone() };
    let (n, k) = match spec.algorithm {
        Algorithm::Full => {
            let k = reduction::default_head_size(cell.m, cfg.ck);
            let n = cell.n.unwrap_or(spec.n_mult * k);
            (n, Some(k))
        }
        _ => (cell.n.unwrap_or(cell.m), None),
    };
    let sys = SetSystem::generate_random(n, cell.m, cell.t, seed)?;
    let mut row = solve_one(&sys, spec.algorithm, seed, k, &cfg)?;
    row.ck = cell.ck;
    Ok(row)
}

fn summary_path(out: &std::path::Path) -> PathBuf {
    match out.extension() {
        Some(ext) => out.with_extension(format!("summary.{}", ext.to_string_lossy())),
        None => out.with_extension("summary"),
    }
}

fn summarize(rows: &[RunRow]) -> String {
    use std::collections::BTreeMap;
    let mut groups: BTreeMap<String, Vec<&RunRow>> = BTreeMap::new();
    for row in rows {
        let key = format!(
            "{},{},{},{},{},{},{}",
            row.m,
            row.t,
            row.n,
            csvio::fmt_opt_usize(row.k),
            csvio::fmt_opt_f64(row.ck),
            csvio::fmt_f64(row.c),
            row.algorithm
        );
        groups.entry(key).or_default().push(row);
    }
    let mut out = String::new();
    out.push_str(csvio::SUMMARY_SCHEMA);
    out.push('\n');
    out.push_str(csvio::SUMMARY_HEADER);
    out.push('\n');
    for (key, rows) in groups {
        let mut discs: Vec<f64> = rows.iter().map(|r| r.discrepancy).collect();
        let runs = rows.len();
        let mean = discs.iter().sum::<f64>() / runs as f64;
        let max = discs.iter().cloned().fold(0.0f64, f64::max);
        let med = csvio::median(&mut discs);
        let t = rows[0].t;
        let over_sqrt = if t > 0 { Some(med / (t as f64).sqrt()) } else { None };
        let aborts = rows.iter().filter(|r| r.abort_iteration.is_some()).count();
        let head_inf = rows.iter().filter(|r| r.head_infeasible == Some(true)).count();
        out.push_str(&format!(
            "{key},{runs},{},{},{},{},{},{}\n",
            csvio::fmt_f64(mean),
            csvio::fmt_f64(med),
            csvio::fmt_f64(max),
            csvio::fmt_opt_f64(over_sqrt),
            csvio::fmt_f64(aborts as f64 / runs as f64),
            csvio::fmt_f64(head_inf as f64 / runs as f64),
        ));
    }
    out
}
