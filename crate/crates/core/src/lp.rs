//! Linear feasibility over box-constrained systems `Ax = b`, `l <= x <= u`,
//! and reduction of a feasible point to a basic one.
//!
//! Feasibility is decided by a phase-1 simplex on bounded variables with
//! one artificial variable per row: exactness of the feasible/infeasible
//! verdict matters downstream, so no interior-point blurring. Ratio-test
//! ties break toward the lowest variable index, and the entering rule
//! falls back to Bland's rule after a long degenerate streak, so the
//! method terminates.

// Index loops here address several arrays at once; iterator forms read worse.
#![allow(clippy::needless_range_loop)]

use crate::error::{Error, Result};
use crate::linalg::{self, DenseMatrix};

/// `Ax = target` subject to `lower <= x <= upper`.
#[derive(Debug, Clone)]
pub struct BoxedLinearSystem {
    pub matrix: DenseMatrix,
    pub target: Vec<f64>,
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
}

impl BoxedLinearSystem {
    pub fn new(
        matrix: DenseMatrix,
        target: Vec<f64>,
        lower: Vec<f64>,
        upper: Vec<f64>,
    ) -> Result<Self> {
        if target.len() != matrix.nrows() {
            return Err(Error::InvalidParameter(format!(
                "target length {} does not match row count {}",
                target.len(),
                matrix.nrows()
            )));
        }
        if lower.len() != matrix.ncols() || upper.len() != matrix.ncols() {
            return Err(Error::InvalidParameter("bound length mismatch".into()));
        }
        if lower.iter().zip(&upper).any(|(l, u)| l > u) {
            return Err(Error::InvalidParameter("lower bound exceeds upper bound".into()));
        }
        Ok(BoxedLinearSystem { matrix, target, lower, upper })
    }

    /// The `[-1, 1]` box used throughout the coloring pipelines.
    pub fn unit_box(matrix: DenseMatrix, target: Vec<f64>) -> Result<Self> {
        let k = matrix.ncols();
        Self::new(matrix, target, vec![-1.0; k], vec![1.0; k])
    }
}

/// Farkas-style witness of infeasibility: for the unit box,
/// `direction·target > ‖directionᵀA‖₁` with `‖direction‖₁ = 1`.
#[derive(Debug, Clone)]
pub struct InfeasibilityCertificate {
    pub direction: Vec<f64>,
    pub gap: f64,
}

#[derive(Debug, Clone)]
pub enum Feasibility {
    Feasible(Vec<f64>),
    Infeasible(InfeasibilityCertificate),
}

impl Feasibility {
    pub fn is_feasible(&self) -> bool {
        matches!(self, Feasibility::Feasible(_))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum VarStatus {
    Basic(usize),
    AtLower,
    AtUpper,
}

/// Bounded-variable phase-1 simplex. Structural variables come first,
/// then one artificial per row.
struct Simplex<'a> {
    a: &'a DenseMatrix,
    m: usize,
    k: usize,
    lower: Vec<f64>,
    upper: Vec<f64>,
    art_sign: Vec<f64>,
    status: Vec<VarStatus>,
    basis: Vec<usize>,
    xb: Vec<f64>,
    binv: DenseMatrix,
    target: Vec<f64>,
    pivot_tol: f64,
}

impl<'a> Simplex<'a> {
    fn new(sys: &'a BoxedLinearSystem) -> Self {
        let m = sys.matrix.nrows();
        let k = sys.matrix.ncols();
        let mut lower = sys.lower.clone();
        let mut upper = sys.upper.clone();
        lower.resize(k + m, 0.0);
        upper.resize(k + m, f64::INFINITY);

        // Structural variables start at the bound nearest zero.
        let mut status: Vec<VarStatus> = (0..k)
            .map(|j| {
                if sys.lower[j].abs() <= sys.upper[j].abs() {
                    VarStatus::AtLower
                } else {
                    VarStatus::AtUpper
                }
            })
            .collect();

        let mut resid = sys.target.clone();
        for j in 0..k {
            let v = match status[j] {
                VarStatus::AtLower => sys.lower[j],
                VarStatus::AtUpper => sys.upper[j],
                VarStatus::Basic(_) => unreachable!(),
            };
            if v != 0.0 {
                for r in 0..m {
                    resid[r] -= sys.matrix.get(r, j) * v;
                }
            }
        }

        let mut art_sign = vec![1.0; m];
        let mut xb = vec![0.0; m];
        let mut basis = vec![0usize; m];
        let mut binv = DenseMatrix::zeros(m, m);
        for r in 0..m {
            art_sign[r] = if resid[r] >= 0.0 { 1.0 } else { -1.0 };
            xb[r] = resid[r].abs();
            basis[r] = k + r;
            status.push(VarStatus::Basic(r));
            binv.set(r, r, art_sign[r]);
        }

        let pivot_tol = 1e-9 * (1.0 + sys.matrix.max_abs());
        Simplex {
            a: &sys.matrix,
            m,
            k,
            lower,
            upper,
            art_sign,
            status,
            basis,
            xb,
            binv,
            target: sys.target.clone(),
            pivot_tol,
        }
    }

    #[inline]
    fn col_entry(&self, var: usize, row: usize) -> f64 {
        if var < self.k {
            self.a.get(row, var)
        } else if var - self.k == row {
            self.art_sign[row]
        } else {
            0.0
        }
    }

    fn nonbasic_value(&self, var: usize) -> f64 {
        match self.status[var] {
            VarStatus::AtLower => self.lower[var],
            VarStatus::AtUpper => self.upper[var],
            VarStatus::Basic(r) => self.xb[r],
        }
    }

    fn objective(&self) -> f64 {
        (0..self.m)
            .filter(|&r| self.basis[r] >= self.k)
            .map(|r| self.xb[r])
            .sum()
    }

    fn multipliers(&self) -> Vec<f64> {
        let mut y = vec![0.0; self.m];
        for r in 0..self.m {
            if self.basis[r] >= self.k {
                for i in 0..self.m {
                    y[i] += self.binv.get(r, i);
                }
            }
        }
        y
    }

    fn reduced_cost(&self, y: &[f64], var: usize) -> f64 {
        if var < self.k {
            -(0..self.m).map(|r| y[r] * self.a.get(r, var)).sum::<f64>()
        } else {
            1.0 - y[var - self.k] * self.art_sign[var - self.k]
        }
    }

    /// Rebuild the basis inverse from scratch and recompute basic values.
    fn refactor(&mut self) -> Result<()> {
        let mut b = DenseMatrix::zeros(self.m, self.m);
        for (r, &var) in self.basis.iter().enumerate() {
            for row in 0..self.m {
                b.set(row, r, self.col_entry(var, row));
            }
        }
        self.binv = linalg::invert(&b, self.pivot_tol)?;

        let mut rhs = self.target.clone();
        for var in 0..self.k + self.m {
            if matches!(self.status[var], VarStatus::Basic(_)) {
                continue;
            }
            let v = self.nonbasic_value(var);
            if v != 0.0 {
                for r in 0..self.m {
                    rhs[r] -= self.col_entry(var, r) * v;
                }
            }
        }
        for r in 0..self.m {
            self.xb[r] = (0..self.m).map(|i| self.binv.get(r, i) * rhs[i]).sum();
        }
        Ok(())
    }

    fn run(&mut self, tol: f64) -> Result<Phase1Outcome> {
        let dtol = 1e-9;
        let total_vars = self.k + self.m;
        let max_iters = 400 + 60 * total_vars;
        let bland_after = 4 * total_vars + 40;
        let mut degenerate_streak = 0usize;
        let mut bland = false;
        let mut pivots_since_refactor = 0usize;

        for _ in 0..max_iters {
            let y = self.multipliers();

            // Entering variable.
            let mut entering: Option<(usize, f64)> = None;
            for var in 0..total_vars {
                let span = self.upper[var] - self.lower[var];
                if span <= 0.0 {
                    continue;
                }
                let d = match self.status[var] {
                    VarStatus::Basic(_) => continue,
                    VarStatus::AtLower => {
                        let d = self.reduced_cost(&y, var);
                        if d < -dtol {
                            d
                        } else {
                            continue;
                        }
                    }
                    VarStatus::AtUpper => {
                        let d = self.reduced_cost(&y, var);
                        if d > dtol {
                            d
                        } else {
                            continue;
                        }
                    }
                };
                if bland {
                    entering = Some((var, d));
                    break;
                }
                match entering {
                    Some((_, best)) if d.abs() <= best.abs() => {}
                    _ => entering = Some((var, d)),
                }
            }

            let Some((e, _)) = entering else {
                // Optimal.
                let z = self.objective();
                if z <= tol {
                    return Ok(Phase1Outcome::Feasible);
                }
                return Ok(Phase1Outcome::Infeasible);
            };

            let sigma = match self.status[e] {
                VarStatus::AtLower => 1.0,
                VarStatus::AtUpper => -1.0,
                VarStatus::Basic(_) => unreachable!(),
            };

            // Direction of basic-value change.
            let mut w = vec![0.0; self.m];
            for r in 0..self.m {
                w[r] = (0..self.m)
                    .map(|i| self.binv.get(r, i) * self.col_entry(e, i))
                    .sum();
            }

            // Ratio test; ties go to the lowest variable index.
            let own_limit = self.upper[e] - self.lower[e];
            let mut best_step = own_limit;
            let mut leave: Option<usize> = None;
            for r in 0..self.m {
                let coef = sigma * w[r];
                let vb = self.basis[r];
                let step = if coef > self.pivot_tol {
                    (self.xb[r] - self.lower[vb]) / coef
                } else if coef < -self.pivot_tol {
                    if self.upper[vb].is_infinite() {
                        continue;
                    }
                    (self.upper[vb] - self.xb[r]) / (-coef)
                } else {
                    continue;
                };
                let step = step.max(0.0);
                if step < best_step - 1e-12 {
                    best_step = step;
                    leave = Some(r);
                } else if (step - best_step).abs() <= 1e-12 {
                    if let Some(cur) = leave {
                        if vb < self.basis[cur] {
                            leave = Some(r);
                        }
                    }
                    // A tie against the entering variable's own span keeps
                    // the bound flip; flips cannot cycle.
                }
            }

            if !best_step.is_finite() {
                return Err(Error::SolverBreakdown(
                    "unbounded direction in phase-1 simplex".into(),
                ));
            }
            if best_step <= 1e-11 {
                degenerate_streak += 1;
                if degenerate_streak > bland_after {
                    bland = true;
                }
            } else {
                degenerate_streak = 0;
            }

            match leave {
                None => {
                    // Bound flip.
                    for r in 0..self.m {
                        self.xb[r] -= sigma * best_step * w[r];
                    }
                    self.status[e] = match self.status[e] {
                        VarStatus::AtLower => VarStatus::AtUpper,
                        VarStatus::AtUpper => VarStatus::AtLower,
                        VarStatus::Basic(_) => unreachable!(),
                    };
                }
                Some(rstar) => {
                    let entering_value = self.nonbasic_value(e) + sigma * best_step;
                    let leaving = self.basis[rstar];
                    let coef = sigma * w[rstar];
                    for r in 0..self.m {
                        self.xb[r] -= sigma * best_step * w[r];
                    }
                    self.status[leaving] = if coef > 0.0 {
                        VarStatus::AtLower
                    } else {
                        VarStatus::AtUpper
                    };
                    self.basis[rstar] = e;
                    self.status[e] = VarStatus::Basic(rstar);
                    self.xb[rstar] = entering_value;

                    let pivot = w[rstar];
                    if pivot.abs() <= self.pivot_tol {
                        return Err(Error::SolverBreakdown("vanishing pivot".into()));
                    }
                    for r in 0..self.m {
                        if r == rstar {
                            continue;
                        }
                        let f = w[r] / pivot;
                        if f != 0.0 {
                            for c in 0..self.m {
                                let v = self.binv.get(r, c) - f * self.binv.get(rstar, c);
                                self.binv.set(r, c, v);
                            }
                        }
                    }
                    for c in 0..self.m {
                        self.binv.set(rstar, c, self.binv.get(rstar, c) / pivot);
                    }

                    pivots_since_refactor += 1;
                    if pivots_since_refactor >= 128 {
                        self.refactor()?;
                        pivots_since_refactor = 0;
                    }
                }
            }
        }
        Err(Error::SolverBreakdown("phase-1 simplex iteration limit".into()))
    }

    fn extract_structural(&self) -> Vec<f64> {
        (0..self.k)
            .map(|j| {
                let v = self.nonbasic_value(j);
                // Snap values sitting on a bound.
                if (v - self.lower[j]).abs() <= 1e-9 {
                    self.lower[j]
                } else if (v - self.upper[j]).abs() <= 1e-9 {
                    self.upper[j]
                } else {
                    v.clamp(self.lower[j], self.upper[j])
                }
            })
            .collect()
    }
}

enum Phase1Outcome {
    Feasible,
    Infeasible,
}

/// Decide feasibility of `sys` and return either a point with
/// `‖Ax - target‖_∞ <= tol` or an infeasibility certificate.
pub fn solve_feasible(sys: &BoxedLinearSystem, tol: f64) -> Result<Feasibility> {
    if tol <= 0.0 {
        return Err(Error::InvalidParameter("tol must be positive".into()));
    }
    let m = sys.matrix.nrows();

    // Cheap exit: the zero-nearest point of the box may already solve the
    // system (in particular target = 0 with 0 in the box).
    let trivial: Vec<f64> =
        (0..sys.matrix.ncols()).map(|j| 0.0f64.clamp(sys.lower[j], sys.upper[j])).collect();
    let resid = residual(sys, &trivial);
    if resid <= tol {
        return Ok(Feasibility::Feasible(trivial));
    }
    if m == 0 {
        return Ok(Feasibility::Feasible(trivial));
    }

    let mut simplex = Simplex::new(sys);
    match simplex.run(tol)? {
        Phase1Outcome::Feasible => {
            let mut x = simplex.extract_structural();
            if residual(sys, &x) > tol {
                // Drift: rebuild the basis once and re-extract.
                simplex.refactor()?;
                x = simplex.extract_structural();
                if residual(sys, &x) > tol {
                    return Err(Error::SolverBreakdown(format!(
                        "feasible verdict but residual {} exceeds tol {tol}",
                        residual(sys, &x)
                    )));
                }
            }
            Ok(Feasibility::Feasible(x))
        }
        Phase1Outcome::Infeasible => {
            simplex.refactor()?;
            let y = simplex.multipliers();
            let norm: f64 = y.iter().map(|v| v.abs()).sum();
            if norm <= 1e-12 {
                return Err(Error::SolverBreakdown("degenerate dual certificate".into()));
            }
            let direction: Vec<f64> = y.iter().map(|v| v / norm).collect();
            let mut gap = linalg::dot(&direction, &sys.target);
            for j in 0..sys.matrix.ncols() {
                let g: f64 = (0..m).map(|r| direction[r] * sys.matrix.get(r, j)).sum();
                gap -= (g * sys.lower[j]).max(g * sys.upper[j]);
            }
            Ok(Feasibility::Infeasible(InfeasibilityCertificate { direction, gap }))
        }
    }
}

fn residual(sys: &BoxedLinearSystem, x: &[f64]) -> f64 {
    let ax = sys.matrix.matvec(x);
    ax.iter().zip(&sys.target).fold(0.0f64, |acc, (a, b)| acc.max((a - b).abs()))
}

/// Move a feasible point to a basic one: repeatedly find a null-space
/// direction over the strictly-inside variables and walk until a bound is
/// hit. The result keeps `Ax` (up to tol) and has at most `rank(A)`
/// entries strictly inside their bounds.
pub fn basic_feasible_solution(
    sys: &BoxedLinearSystem,
    start: &[f64],
    tol: f64,
) -> Result<Vec<f64>> {
    if start.len() != sys.matrix.ncols() {
        return Err(Error::InvalidParameter("start length mismatch".into()));
    }
    if tol <= 0.0 {
        return Err(Error::InvalidParameter("tol must be positive".into()));
    }
    let m = sys.matrix.nrows();
    let snap = 1e-9;
    let mut x: Vec<f64> = start.to_vec();
    for (j, v) in x.iter_mut().enumerate() {
        if *v < sys.lower[j] - snap || *v > sys.upper[j] + snap {
            return Err(Error::InfeasibleStart(format!(
                "start[{j}] = {v} violates bounds"
            )));
        }
        if (*v - sys.lower[j]).abs() <= snap {
            *v = sys.lower[j];
        } else if (*v - sys.upper[j]).abs() <= snap {
            *v = sys.upper[j];
        }
    }
    if residual(sys, &x) > tol {
        return Err(Error::InfeasibleStart(format!(
            "start residual {} exceeds tol {tol}",
            residual(sys, &x)
        )));
    }

    let rank_tol = 1e-9 * (1.0 + sys.matrix.max_abs());
    let max_rounds = x.len() + 4;
    for _ in 0..max_rounds {
        let free: Vec<usize> = (0..x.len())
            .filter(|&j| x[j] > sys.lower[j] && x[j] < sys.upper[j])
            .collect();
        if free.is_empty() {
            break;
        }
        let w = free.len().min(m + 1);
        let chosen = &free[..w];
        let cols: Vec<Vec<f64>> = chosen.iter().map(|&j| sys.matrix.col_copy(j)).collect();
        let col_refs: Vec<&[f64]> = cols.iter().map(|c| c.as_slice()).collect();
        let Some(z) = linalg::column_dependency(m, &col_refs, rank_tol) else {
            if w == free.len() {
                break; // free columns independent: already basic
            }
            return Err(Error::SolverBreakdown(
                "no dependency among m+1 columns".into(),
            ));
        };

        // Largest step in +z keeping the box.
        let mut lam = f64::INFINITY;
        let mut hit = None;
        for (idx, &j) in chosen.iter().enumerate() {
            let zj = z[idx];
            let room = if zj > 1e-14 {
                (sys.upper[j] - x[j]) / zj
            } else if zj < -1e-14 {
                (sys.lower[j] - x[j]) / zj
            } else {
                continue;
            };
            if room < lam {
                lam = room;
                hit = Some(idx);
            }
        }
        let Some(hit) = hit else {
            return Err(Error::SolverBreakdown("zero null-space direction".into()));
        };
        if !lam.is_finite() {
            return Err(Error::SolverBreakdown("unbounded null-space walk".into()));
        }
        for (idx, &j) in chosen.iter().enumerate() {
            x[j] += lam * z[idx];
            if (x[j] - sys.lower[j]).abs() <= snap || x[j] < sys.lower[j] {
                x[j] = sys.lower[j];
            } else if (x[j] - sys.upper[j]).abs() <= snap || x[j] > sys.upper[j] {
                x[j] = sys.upper[j];
            }
        }
        // The limiting variable lands on its bound exactly.
        let j = chosen[hit];
        if x[j] != sys.lower[j] && x[j] != sys.upper[j] {
            x[j] = if z[hit] > 0.0 { sys.upper[j] } else { sys.lower[j] };
        }
    }
    debug_assert!(residual(sys, &x) <= 10.0 * tol.max(1e-12));
    Ok(x)
}
