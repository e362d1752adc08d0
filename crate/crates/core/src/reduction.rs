//! Column reduction and fractional-polytope containment checks.
//!
//! The reduction colors the tail elements `k..n` integrally via Beck-Fiala
//! (discrepancy vector `b`, `‖b‖_∞ <= 2t - 1`), then asks the LP for a
//! fractional head coloring with `A_head·x = -b`. Together they form a
//! fractional coloring of the whole system with discrepancy ~0; the phased
//! solver then rounds the head starting from that point. Head matching can
//! fail — for small heads the target may fall outside the reachable
//! polytope — so `HeadInfeasible` is a value, not an error, and the full
//! pipeline degrades to plain Beck-Fiala.
//!
//! Containment of the `±2t` cube in `P = {Ax : x ∈ [-1,1]^k}` is decided
//! exactly by feasibility LPs on the cube's vertices (P is convex, so
//! vertex containment suffices); `dual_condition_sample` probes the
//! equivalent dual condition `‖yᵀA‖₁ > 2t` on the ℓ1 sphere and is
//! one-sided: a value strictly below `2t` certifies non-containment,
//! larger values are evidence only.

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::Exp1;

use crate::beck_fiala::beck_fiala_color;
use crate::error::{Error, Result};
use crate::linalg::DenseMatrix;
use crate::lp::{self, BoxedLinearSystem, Feasibility, InfeasibilityCertificate};
use crate::phased::{self, AbortReason, PhaseConfig, PhaseTrace, SolveReport};
use crate::set_system::{self, Coloring, DiscrepancyVector, SetSystem};

/// Head size `⌈c_k · m · ln²(max(m, 3))⌉` used when the caller does not
/// pick `k` explicitly.
pub fn default_head_size(m: usize, c_k: f64) -> usize {
    let lm = (m.max(3) as f64).ln();
    (c_k * m as f64 * lm * lm).ceil() as usize
}

#[derive(Debug, Clone)]
pub struct ReductionResult {
    /// Integral coloring of elements `k..n`.
    pub tail_coloring: Coloring,
    /// Tail discrepancy vector; `‖b‖_∞ <= 2t - 1`.
    pub b: DiscrepancyVector,
    /// Fractional head coloring with `A_head·x = -b` (within tol).
    pub head_fractional: Coloring,
    pub k: usize,
}

#[derive(Debug, Clone)]
pub enum ReduceOutcome {
    Reduced(ReductionResult),
    HeadInfeasible { certificate: Option<InfeasibilityCertificate> },
}

pub fn reduce(sys: &SetSystem, k: usize, tol: f64) -> Result<ReduceOutcome> {
    if k == 0 || k > sys.n() {
        return Err(Error::InvalidParameter(format!(
            "head size k = {k} outside (0, n = {}]",
            sys.n()
        )));
    }
    let head_elems: Vec<usize> = (0..k).collect();
    let tail_elems: Vec<usize> = (k..sys.n()).collect();
    let head = sys.restrict(&head_elems)?;
    let tail = sys.restrict(&tail_elems)?;

    let tail_coloring = if tail.n() == 0 {
        Coloring::integral(vec![])?
    } else {
        beck_fiala_color(&tail, &Coloring::zeros(tail.n()), tol)?
    };
    let b = set_system::discrepancy_vector(&tail, &tail_coloring)?;
    let bound = if sys.t() == 0 { 0.0 } else { (2 * sys.t() - 1) as f64 };
    if b.max_abs() > bound + 1e-9 {
        return Err(Error::SolverBreakdown(format!(
            "tail coloring discrepancy {} exceeds certified bound {bound}",
            b.max_abs()
        )));
    }

    let target: Vec<f64> = b.values().iter().map(|v| -v).collect();
    let bls = BoxedLinearSystem::unit_box(head.incidence(), target)?;
    match lp::solve_feasible(&bls, tol)? {
        Feasibility::Feasible(x) => Ok(ReduceOutcome::Reduced(ReductionResult {
            tail_coloring,
            b,
            head_fractional: Coloring::fractional(x)?,
            k,
        })),
        Feasibility::Infeasible(cert) => {
            Ok(ReduceOutcome::HeadInfeasible { certificate: Some(cert) })
        }
    }
}

#[derive(Debug, Clone)]
pub struct FullSolveReport {
    pub solve: SolveReport,
    /// The head LP failed and the pipeline fell back before any phases.
    pub head_infeasible: bool,
    pub k: usize,
}

/// Full pipeline: reduce, solve the head from the matched fractional
/// point, and recombine. Any fallback (head infeasibility or a phased
/// abort) discards partial progress and returns the Beck-Fiala coloring
/// of the whole system, keeping the `2t - 1` ceiling.
pub fn solve_full(sys: &SetSystem, cfg: &PhaseConfig, k: usize) -> Result<FullSolveReport> {
    if k == 0 {
        return Err(Error::InvalidParameter("head size k must be positive".into()));
    }
    let k_eff = k.min(sys.n());
    if sys.n() == 0 {
        let coloring = Coloring::integral(vec![])?;
        return Ok(FullSolveReport {
            solve: SolveReport {
                coloring,
                discrepancy_inf: 0.0,
                trace: PhaseTrace::default(),
                fallback_used: false,
            },
            head_infeasible: false,
            k: k_eff,
        });
    }

    match reduce(sys, k_eff, cfg.tol)? {
        ReduceOutcome::HeadInfeasible { .. } => {
            let coloring = beck_fiala_color(sys, &Coloring::zeros(sys.n()), cfg.tol)?;
            let disc = set_system::discrepancy(sys, &coloring)?;
            let trace =
                PhaseTrace { abort: Some(AbortReason::HeadInfeasible), ..Default::default() };
            Ok(FullSolveReport {
                solve: SolveReport { coloring, discrepancy_inf: disc, trace, fallback_used: true },
                head_infeasible: true,
                k: k_eff,
            })
        }
        ReduceOutcome::Reduced(red) => {
            let head_elems: Vec<usize> = (0..k_eff).collect();
            let head = sys.restrict(&head_elems)?;
            let report = phased::solve(&head, &red.head_fractional, cfg)?;
            if report.fallback_used {
                // The head solver's fallback is relative to zero, not to
                // the matched fractional point: recombining would break
                // the 2t-1 ceiling, so recolor the whole system instead.
                let coloring = beck_fiala_color(sys, &Coloring::zeros(sys.n()), cfg.tol)?;
                let disc = set_system::discrepancy(sys, &coloring)?;
                return Ok(FullSolveReport {
                    solve: SolveReport {
                        coloring,
                        discrepancy_inf: disc,
                        trace: report.trace,
                        fallback_used: true,
                    },
                    head_infeasible: false,
                    k: k_eff,
                });
            }
            let mut values = report.coloring.values().to_vec();
            values.extend_from_slice(red.tail_coloring.values());
            let coloring = Coloring::integral(values)?;
            let disc = set_system::discrepancy(sys, &coloring)?;
            Ok(FullSolveReport {
                solve: SolveReport {
                    coloring,
                    discrepancy_inf: disc,
                    trace: report.trace,
                    fallback_used: false,
                },
                head_infeasible: false,
                k: k_eff,
            })
        }
    }
}

#[derive(Debug, Clone)]
pub struct ContainmentReport {
    pub contained: bool,
    /// A cube vertex outside `P` when not contained.
    pub failing_vertex: Option<Vec<f64>>,
    /// Dual certificate for the failing vertex's LP.
    pub certificate: Option<InfeasibilityCertificate>,
}

/// Exact containment `2t·B_∞ ⊆ P` by LP feasibility on all `2^m` cube
/// vertices. Guarded at `m <= 16`.
pub fn containment_check_exact(
    matrix: &DenseMatrix,
    t: usize,
    tol: f64,
) -> Result<ContainmentReport> {
    let m = matrix.nrows();
    if m > 16 {
        return Err(Error::Capacity(format!(
            "vertex enumeration limited to m <= 16, got m = {m}"
        )));
    }
    let radius = 2.0 * t as f64;
    for mask in 0..(1u32 << m) {
        let q: Vec<f64> =
            (0..m).map(|j| if mask >> j & 1 == 1 { radius } else { -radius }).collect();
        let bls = BoxedLinearSystem::unit_box(matrix.clone(), q.clone())?;
        if let Feasibility::Infeasible(cert) = lp::solve_feasible(&bls, tol)? {
            return Ok(ContainmentReport {
                contained: false,
                failing_vertex: Some(q),
                certificate: Some(cert),
            });
        }
    }
    Ok(ContainmentReport { contained: true, failing_vertex: None, certificate: None })
}

/// `‖yᵀA‖₁`.
pub fn l1_dual_value(matrix: &DenseMatrix, y: &[f64]) -> f64 {
    let m = matrix.nrows();
    let k = matrix.ncols();
    let mut total = 0.0;
    for j in 0..k {
        let g: f64 = (0..m).map(|r| y[r] * matrix.get(r, j)).sum();
        total += g.abs();
    }
    total
}

#[derive(Debug, Clone)]
pub struct DualSampleReport {
    /// Minimum `‖yᵀA‖₁` observed over all probed directions.
    pub min_value: f64,
    pub best_direction: Vec<f64>,
    pub evaluated: usize,
    /// True when `min_value < 2t` strictly: a certified witness that the
    /// cube is not contained. Values `>= 2t` prove nothing.
    pub certifies_noncontainment: bool,
}

/// Probe the dual condition with the `2m` signed basis vectors plus
/// `trials` uniform samples from the ℓ1 sphere.
pub fn dual_condition_sample(
    matrix: &DenseMatrix,
    t: usize,
    trials: usize,
    seed: u64,
) -> DualSampleReport {
    dual_condition_sample_with(matrix, t, trials, seed, &[])
}

/// Same as [`dual_condition_sample`], additionally probing the supplied
/// directions (for example an LP infeasibility certificate).
pub fn dual_condition_sample_with(
    matrix: &DenseMatrix,
    t: usize,
    trials: usize,
    seed: u64,
    extra: &[Vec<f64>],
) -> DualSampleReport {
    let m = matrix.nrows();
    let mut best_val = f64::INFINITY;
    let mut best_dir = vec![0.0; m];
    let mut evaluated = 0usize;

    let consider = |y: &[f64], best_val: &mut f64, best_dir: &mut Vec<f64>| {
        let v = l1_dual_value(matrix, y);
        if v < *best_val {
            *best_val = v;
            *best_dir = y.to_vec();
        }
    };

    for j in 0..m {
        for sign in [1.0, -1.0] {
            let mut y = vec![0.0; m];
            y[j] = sign;
            consider(&y, &mut best_val, &mut best_dir);
            evaluated += 1;
        }
    }
    for y in extra {
        if y.len() == m {
            consider(y, &mut best_val, &mut best_dir);
            evaluated += 1;
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for _ in 0..trials {
        // Exponential magnitudes normalized to the simplex, random signs.
        let mut y: Vec<f64> = (0..m).map(|_| rng.sample::<f64, _>(Exp1)).collect();
        let total: f64 = y.iter().sum();
        if total <= 0.0 {
            continue;
        }
        for v in y.iter_mut() {
            *v /= total;
            if rng.gen_bool(0.5) {
                *v = -*v;
            }
        }
        consider(&y, &mut best_val, &mut best_dir);
        evaluated += 1;
    }

    if m == 0 {
        best_val = 0.0;
        best_dir = Vec::new();
    }
    DualSampleReport {
        min_value: best_val,
        best_direction: best_dir,
        evaluated,
        certifies_noncontainment: best_val < 2.0 * t as f64 - 1e-9,
    }
}
