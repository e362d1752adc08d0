//! Naive reference implementations used only by tests and acceptance runs.
//!
//! Everything here favors trustworthiness over speed: full enumerations,
//! double loops, and a private little Gaussian elimination so no kernel is
//! shared with the production LP path.

use crate::error::{Error, Result};
use crate::linalg::DenseMatrix;
use crate::lp::{self, BoxedLinearSystem, Feasibility};
use crate::set_system::SetSystem;

/// Decide `target ∈ P = {Σ x_i a_i : x_i ∈ [-1, 1]}` two independent ways
/// and insist they agree: a support-function test over the zonotope's
/// facet normals (every (rank-1)-subset of generators), and the membership
/// LP. Guarded at `k <= 16` generators.
pub fn enumerate_polytope_membership(
    matrix: &DenseMatrix,
    target: &[f64],
    tol: f64,
) -> Result<bool> {
    let m = matrix.nrows();
    let k = matrix.ncols();
    if k > 16 {
        return Err(Error::Capacity(format!(
            "membership oracle limited to k <= 16 generators, got {k}"
        )));
    }
    if target.len() != m {
        return Err(Error::InvalidParameter("target length mismatch".into()));
    }
    let generators: Vec<Vec<f64>> = (0..k).map(|j| matrix.col_copy(j)).collect();

    let geometric = support_membership(&generators, target, tol)?;

    let bls = BoxedLinearSystem::unit_box(matrix.clone(), target.to_vec())?;
    let lp_verdict = matches!(lp::solve_feasible(&bls, tol)?, Feasibility::Feasible(_));

    if geometric != lp_verdict {
        return Err(Error::OracleDisagreement(format!(
            "support test says {geometric}, membership LP says {lp_verdict}"
        )));
    }
    Ok(geometric)
}

/// Membership in a symmetric zonotope by support functions: `target ∈ P`
/// iff it lies in the span of the generators and `|⟨u, target⟩| <=
/// Σ_i |⟨u, a_i⟩|` for every facet normal `u`. Facet normals of a rank-r
/// zonotope are the directions orthogonal to some (r-1)-subset of
/// generators spanning an (r-1)-dimensional space.
fn support_membership(generators: &[Vec<f64>], target: &[f64], tol: f64) -> Result<bool> {
    let m = target.len();
    let scale = generators
        .iter()
        .flat_map(|g| g.iter())
        .chain(target.iter())
        .fold(1.0f64, |acc, v| acc.max(v.abs()));
    let eps = tol.max(1e-12) * scale;

    // Orthonormal basis of the span, oracle-local Gram-Schmidt.
    let mut span: Vec<Vec<f64>> = Vec::new();
    for g in generators {
        let mut u = g.clone();
        for _ in 0..2 {
            for b in &span {
                let c = dot(&u, b);
                for i in 0..m {
                    u[i] -= c * b[i];
                }
            }
        }
        let norm = dot(&u, &u).sqrt();
        if norm > eps {
            for v in u.iter_mut() {
                *v /= norm;
            }
            span.push(u);
        }
    }
    let r = span.len();

    // Component of the target outside the span.
    let mut resid = target.to_vec();
    for b in &span {
        let c = dot(&resid, b);
        for i in 0..m {
            resid[i] -= c * b[i];
        }
    }
    if dot(&resid, &resid).sqrt() > eps {
        return Ok(false);
    }
    if r == 0 {
        return Ok(true); // P = {0} and the target projects to 0
    }

    // Work in span coordinates.
    let gens_r: Vec<Vec<f64>> =
        generators.iter().map(|g| span.iter().map(|b| dot(g, b)).collect()).collect();
    let target_r: Vec<f64> = span.iter().map(|b| dot(target, b)).collect();

    if r == 1 {
        let reach: f64 = gens_r.iter().map(|g| g[0].abs()).sum();
        return Ok(target_r[0].abs() <= reach + eps);
    }

    // Every (r-1)-subset of generators proposes a facet normal.
    let k = gens_r.len();
    let mut subset: Vec<usize> = (0..r - 1).collect();
    loop {
        let rows: Vec<&[f64]> = subset.iter().map(|&i| gens_r[i].as_slice()).collect();
        if let Some(u) = normal_to(&rows, r, eps) {
            let reach: f64 = gens_r.iter().map(|g| dot_dim(&u, g, r).abs()).sum();
            if dot_dim(&u, &target_r, r).abs() > reach + eps {
                return Ok(false);
            }
        }
        if !next_combination(&mut subset, k) {
            return Ok(true);
        }
    }
}

/// Advance to the next (lexicographic) subset of `0..k`; false when done.
fn next_combination(subset: &mut [usize], k: usize) -> bool {
    let r = subset.len();
    let mut i = r;
    while i > 0 {
        i -= 1;
        if subset[i] < k - (r - i) {
            subset[i] += 1;
            for j in i + 1..r {
                subset[j] = subset[j - 1] + 1;
            }
            return true;
        }
    }
    false
}

/// Unit vector orthogonal to each given row, or `None` if the rows do not
/// span an (r-1)-dimensional space. Naive elimination, local to the
/// oracle.
fn normal_to(rows: &[&[f64]], r: usize, eps: f64) -> Option<Vec<f64>> {
    let mut work: Vec<Vec<f64>> = rows.iter().map(|row| row[..r].to_vec()).collect();
    // (pivot row, pivot column) pairs.
    let mut pivots: Vec<(usize, usize)> = Vec::new();
    let mut used = vec![false; work.len()];
    for c in 0..r {
        let mut best: Option<usize> = None;
        let mut best_v = eps;
        for (i, row) in work.iter().enumerate() {
            if !used[i] && row[c].abs() > best_v {
                best_v = row[c].abs();
                best = Some(i);
            }
        }
        if let Some(p) = best {
            let prow = work[p].clone();
            for (i, row) in work.iter_mut().enumerate() {
                if i != p {
                    let f = row[c] / prow[c];
                    if f != 0.0 {
                        for cc in 0..r {
                            row[cc] -= f * prow[cc];
                        }
                    }
                }
            }
            used[p] = true;
            pivots.push((p, c));
        }
    }
    if pivots.len() != r - 1 {
        return None; // degenerate subset
    }
    // Free column: the one without a pivot.
    let free = (0..r).find(|c| !pivots.iter().any(|&(_, pc)| pc == *c))?;
    let mut u = vec![0.0; r];
    u[free] = 1.0;
    for &(pr, pc) in &pivots {
        // After full elimination row pr has support only on pc and free
        // columns; pick u[pc] so that row·u = 0.
        u[pc] = -work[pr][free] / work[pr][pc];
    }
    let norm = u.iter().map(|v| v * v).sum::<f64>().sqrt();
    if norm <= eps {
        return None;
    }
    for v in u.iter_mut() {
        *v /= norm;
    }
    Some(u)
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn dot_dim(a: &[f64], b: &[f64], r: usize) -> f64 {
    (0..r).map(|i| a[i] * b[i]).sum()
}

/// Exhaustive minimum discrepancy over all `2^n` sign vectors, written
/// independently of `set_system::brute_force_optimum` (row-major double
/// loop); the two are cross-checked in tests.
pub fn exhaustive_min_discrepancy(sys: &SetSystem) -> Result<f64> {
    if sys.n() > 24 {
        return Err(Error::Capacity(format!(
            "exhaustive search limited to n <= 24, got n = {}",
            sys.n()
        )));
    }
    let n = sys.n();
    let rows = sys.row_members();
    if rows.is_empty() {
        return Ok(0.0);
    }
    let mut best = f64::INFINITY;
    for mask in 0..(1u32 << n) {
        let mut worst = 0.0f64;
        for row in &rows {
            let mut sum = 0.0f64;
            for &i in row {
                sum += if mask >> i & 1 == 1 { 1.0 } else { -1.0 };
            }
            worst = worst.max(sum.abs());
        }
        if worst < best {
            best = worst;
            if best == 0.0 {
                break;
            }
        }
    }
    Ok(best)
}
