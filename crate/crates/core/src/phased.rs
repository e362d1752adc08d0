//! Budgeted multi-phase coloring solver.
//!
//! Phase 0 reduces the number of fractional variables to at most `m` via a
//! basic feasible solution of `{Ax = Ax₀, x ∈ [-1,1]^n}`. Phase 1 runs
//! `⌈log₂ t⌉` partial-coloring iterations with per-row absolute budget
//! `c·√t / i²`; Phase 2 continues with budget 0 on rows whose alive size
//! exceeds `c·√t` and no constraint on the rest. When the alive count
//! drops to `max(2c√t, 8)` the remaining variables are signed greedily and
//! frozen ones rounded to the nearest `±1`.
//!
//! If the potential condition fails at any iteration (or a walk exhausts
//! its restarts) the run aborts: partial progress is discarded and the
//! Beck-Fiala coloring of the whole system is returned instead, with
//! `fallback_used` set. The fallback's `2t - 1` guarantee is relative to
//! the all-zeros point; `discrepancy_inf` is always reported against the
//! caller's `x0`.

use crate::beck_fiala::{beck_fiala_color, greedy_sign};
use crate::error::{Error, Result};
use crate::lp::{self, BoxedLinearSystem};
use crate::partial_coloring::{partial_color, PartialColoringRequest, WalkOutcome};
use crate::rng::derive_seed;
use crate::set_system::{self, Coloring, SetSystem};
use crate::DEFAULT_TOL;

/// Step size used by the solver's walks when the caller does not pin one.
/// The δ-based default of the walk itself targets much finer freezing
/// resolution than the budget checks here need, at a step-count cost that
/// would dominate the pipeline.
pub const DEFAULT_WALK_GAMMA: f64 = 0.04;

#[derive(Debug, Clone)]
pub struct PhaseConfig {
    /// Budget constant `c`.
    pub c: f64,
    /// Freeze threshold δ; `None` means `1/n` for the instance at hand.
    pub delta: Option<f64>,
    pub tol: f64,
    pub seed: u64,
    pub max_restarts_per_iteration: usize,
    /// Walk step size override; `None` uses [`DEFAULT_WALK_GAMMA`].
    pub gamma: Option<f64>,
    /// Walk step count override; `None` uses `⌈16/γ²⌉`.
    pub steps: Option<usize>,
}

impl Default for PhaseConfig {
    fn default() -> Self {
        PhaseConfig {
            c: 4.0,
            delta: None,
            tol: DEFAULT_TOL,
            seed: 0,
            max_restarts_per_iteration: 20,
            gamma: None,
            steps: None,
        }
    }
}

#[derive(Debug, Clone)]
pub enum AbortReason {
    /// `Σ exp(-c_j²/16) > n_i/16` at the given iteration.
    PotentialCondition { iteration: usize, potential: f64, limit: f64 },
    /// The walk failed every restart at the given iteration.
    WalkExhausted { iteration: usize, attempts: usize },
    /// Column-reduction head matching failed (set by the full pipeline).
    HeadInfeasible,
}

#[derive(Debug, Clone)]
pub struct IterationRecord {
    /// 1-based iteration index.
    pub index: usize,
    /// 1 or 2.
    pub phase: u8,
    pub alive_before: usize,
    pub alive_after: usize,
    /// Phase-1 absolute row budget `c√t/i²`.
    pub row_budget: Option<f64>,
    /// Phase-2 big-row cutoff `c√t`.
    pub big_row_cutoff: Option<f64>,
    /// Rows constrained to zero movement this iteration (Phase 2).
    pub zero_budget_rows: Vec<usize>,
    /// Full-length point snapshots bracketing the iteration.
    pub point_before: Vec<f64>,
    pub point_after: Vec<f64>,
    pub restarts_used: usize,
}

#[derive(Debug, Clone, Default)]
pub struct PhaseTrace {
    /// Point after the Phase-0 basis reduction.
    pub phase0_point: Vec<f64>,
    /// Alive count after Phase 0.
    pub phase0_alive: usize,
    pub iterations: Vec<IterationRecord>,
    /// Alive count entering the greedy endgame.
    pub endgame_alive: usize,
    pub abort: Option<AbortReason>,
}

#[derive(Debug, Clone)]
pub struct SolveReport {
    pub coloring: Coloring,
    /// `‖A(χ - x0)‖_∞`, recomputed from the final coloring.
    pub discrepancy_inf: f64,
    pub trace: PhaseTrace,
    pub fallback_used: bool,
}

pub fn solve(sys: &SetSystem, x0: &Coloring, cfg: &PhaseConfig) -> Result<SolveReport> {
    if cfg.c <= 0.0 {
        return Err(Error::InvalidParameter("c must be positive".into()));
    }
    if x0.len() != sys.n() {
        return Err(Error::InvalidParameter(format!(
            "x0 length {} does not match n = {}",
            x0.len(),
            sys.n()
        )));
    }
    let n = sys.n();
    let t = sys.t();
    let rows = sys.row_members();
    let delta = cfg.delta.unwrap_or(1.0 / n.max(2) as f64);
    let sqrt_t = (t as f64).sqrt();
    let endgame_threshold = (2.0 * cfg.c * sqrt_t).max(8.0);
    let phase1_iterations =
        if t <= 1 { 0 } else { (t as f64).log2().ceil() as usize };

    let mut trace = PhaseTrace::default();

    // Phase 0: basic feasible solution of {Ax = A x0}.
    let target = set_system::raw_discrepancy_vector(sys, x0.values())?;
    let bls = BoxedLinearSystem::unit_box(sys.incidence(), target)?;
    let mut x = lp::basic_feasible_solution(&bls, x0.values(), cfg.tol)?;
    for v in x.iter_mut() {
        if (v.abs() - 1.0).abs() <= 1e-9 {
            *v = v.signum();
        }
    }
    let mut frozen: Vec<bool> = x.iter().map(|v| v.abs() >= 1.0 - delta).collect();
    trace.phase0_point = x.clone();
    trace.phase0_alive = frozen.iter().filter(|&&f| !f).count();

    let mut iteration = 0usize;
    loop {
        let alive: Vec<usize> = (0..n).filter(|&i| !frozen[i]).collect();
        let alive_count = alive.len();
        if (alive_count as f64) <= endgame_threshold {
            trace.endgame_alive = alive_count;
            break;
        }
        iteration += 1;
        if iteration > 64 {
            return Err(Error::SolverBreakdown("phase iteration cap exceeded".into()));
        }

        // Alive-restricted rows and the iteration's budgets.
        let mut req_rows: Vec<Vec<f64>> = Vec::with_capacity(sys.m());
        let mut alive_sizes: Vec<usize> = Vec::with_capacity(sys.m());
        for row in &rows {
            let mut v = vec![0.0f64; alive_count];
            let mut size = 0usize;
            for (pos, &i) in alive.iter().enumerate() {
                if row.binary_search(&i).is_ok() {
                    v[pos] = 1.0;
                    size += 1;
                }
            }
            req_rows.push(v);
            alive_sizes.push(size);
        }

        let phase: u8 = if iteration <= phase1_iterations { 1 } else { 2 };
        let (budgets, row_budget, cutoff, zero_rows) = if phase == 1 {
            let d = cfg.c * sqrt_t / (iteration * iteration) as f64;
            let budgets: Vec<f64> = alive_sizes
                .iter()
                .map(|&s| if s == 0 { f64::INFINITY } else { d / (s as f64).sqrt() })
                .collect();
            (budgets, Some(d), None, Vec::new())
        } else {
            let cutoff = cfg.c * sqrt_t;
            let mut zero_rows = Vec::new();
            let budgets: Vec<f64> = alive_sizes
                .iter()
                .enumerate()
                .map(|(j, &s)| {
                    if s as f64 > cutoff {
                        zero_rows.push(j);
                        0.0
                    } else {
                        f64::INFINITY
                    }
                })
                .collect();
            (budgets, None, Some(cutoff), zero_rows)
        };

        let start: Vec<f64> = alive.iter().map(|&i| x[i]).collect();
        let req = PartialColoringRequest {
            rows: req_rows,
            budgets,
            start,
            delta: Some(delta),
            gamma: Some(cfg.gamma.unwrap_or(DEFAULT_WALK_GAMMA)),
            steps: cfg.steps,
            seed: derive_seed(cfg.seed, iteration as u64),
            max_restarts: cfg.max_restarts_per_iteration,
        };

        let point_before = x.clone();
        match partial_color(&req) {
            Ok(WalkOutcome::Colored(res)) => {
                for (pos, &i) in alive.iter().enumerate() {
                    x[i] = res.point[pos];
                    if res.frozen[pos] {
                        frozen[i] = true;
                    }
                }
                let alive_after = frozen.iter().filter(|&&f| !f).count();
                trace.iterations.push(IterationRecord {
                    index: iteration,
                    phase,
                    alive_before: alive_count,
                    alive_after,
                    row_budget,
                    big_row_cutoff: cutoff,
                    zero_budget_rows: zero_rows,
                    point_before,
                    point_after: x.clone(),
                    restarts_used: res.restarts_used,
                });
            }
            Ok(WalkOutcome::Exhausted { attempts }) => {
                trace.abort = Some(AbortReason::WalkExhausted { iteration, attempts });
                return fallback(sys, x0, cfg, trace);
            }
            Err(Error::RequestRejected { potential, limit }) => {
                trace.abort =
                    Some(AbortReason::PotentialCondition { iteration, potential, limit });
                return fallback(sys, x0, cfg, trace);
            }
            Err(e) => return Err(e),
        }
    }

    // Endgame: round frozen variables to the nearest sign, then sign the
    // alive ones greedily against the deviation from x0.
    let alive: Vec<usize> = (0..n).filter(|&i| !frozen[i]).collect();
    for i in 0..n {
        if frozen[i] {
            x[i] = if x[i] >= 0.0 { 1.0 } else { -1.0 };
        }
    }
    let mut dev = vec![0.0f64; sys.m()];
    for i in 0..n {
        if frozen[i] {
            let d = x[i] - x0.values()[i];
            if d != 0.0 {
                for &j in sys.membership(i) {
                    dev[j] += d;
                }
            }
        } else {
            // Alive variables enter dev as they get signed; account for
            // the -x0 part up front.
            let d = -x0.values()[i];
            if d != 0.0 {
                for &j in sys.membership(i) {
                    dev[j] += d;
                }
            }
        }
    }
    // greedy_sign shifts by (sign - x[i]); seed x with 0 on alive so the
    // accumulator matches dev above.
    for &i in &alive {
        x[i] = 0.0;
    }
    greedy_sign(sys, &mut x, &alive, &mut dev);

    let coloring = Coloring::integral(x)?;
    let disc = deviation_from(sys, &coloring, x0)?;
    Ok(SolveReport { coloring, discrepancy_inf: disc, trace, fallback_used: false })
}

/// `‖A(χ - x0)‖_∞` recomputed from scratch.
pub fn deviation_from(sys: &SetSystem, coloring: &Coloring, x0: &Coloring) -> Result<f64> {
    let a = set_system::raw_discrepancy_vector(sys, coloring.values())?;
    let b = set_system::raw_discrepancy_vector(sys, x0.values())?;
    Ok(a.iter().zip(&b).fold(0.0f64, |acc, (p, q)| acc.max((p - q).abs())))
}

fn fallback(
    sys: &SetSystem,
    x0: &Coloring,
    cfg: &PhaseConfig,
    trace: PhaseTrace,
) -> Result<SolveReport> {
    let coloring = beck_fiala_color(sys, &Coloring::zeros(sys.n()), cfg.tol)?;
    let disc = deviation_from(sys, &coloring, x0)?;
    Ok(SolveReport { coloring, discrepancy_inf: disc, trace, fallback_used: true })
}
