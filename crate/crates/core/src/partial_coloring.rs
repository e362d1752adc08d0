//! Partial coloring by a constrained Gaussian walk.
//!
//! Given constraint rows `v_j` with per-row budgets `c_j`, a starting
//! point in `[-1, 1]^n`, and a freeze threshold `δ`, the walk repeatedly
//! steps along a standard Gaussian projected orthogonally to (a) the
//! coordinate directions of frozen variables and (b) rows whose running
//! discrepancy sits within one step of its budget. Steps are scaled so the
//! point never leaves the box; a coordinate landing on the wall freezes
//! there. An attempt succeeds once at least half the variables are frozen
//! (`|x_i| >= 1 - δ`) with every budget respected.
//!
//! Requests must satisfy the potential condition
//! `Σ_j exp(-c_j²/16) <= n/16` (rows with infinite budget contribute 0);
//! a violating request is rejected, which is exactly the phased solver's
//! abort signal. Each attempt independently succeeds with constant
//! probability, so a handful of restarts makes failure negligible.

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::linalg;
use crate::rng::derive_seed;

#[derive(Debug, Clone)]
pub struct PartialColoringRequest {
    /// Constraint rows `v_j`, each of length `n`.
    pub rows: Vec<Vec<f64>>,
    /// Per-row budgets `c_j in [0, +inf]`; the guarantee is
    /// `|<x - x0, v_j>| <= c_j * ‖v_j‖_2`. Infinite budgets never
    /// constrain and are dropped from the potential sum.
    pub budgets: Vec<f64>,
    /// Starting point `x0` in the box.
    pub start: Vec<f64>,
    /// Freeze threshold; defaults to `1/n`.
    pub delta: Option<f64>,
    /// Step size; defaults to `δ / sqrt(8·ln(max(n·m_finite, 2)/δ))`.
    pub gamma: Option<f64>,
    /// Step count; defaults to `⌈16/γ²⌉`.
    pub steps: Option<usize>,
    pub seed: u64,
    /// Additional attempts after the first before giving up.
    pub max_restarts: usize,
}

impl PartialColoringRequest {
    pub fn new(rows: Vec<Vec<f64>>, budgets: Vec<f64>, start: Vec<f64>, seed: u64) -> Self {
        PartialColoringRequest {
            rows,
            budgets,
            start,
            delta: None,
            gamma: None,
            steps: None,
            seed,
            max_restarts: 20,
        }
    }
}

#[derive(Debug, Clone)]
pub struct PartialColoringResult {
    pub point: Vec<f64>,
    /// `frozen[i]` iff `|point[i]| >= 1 - δ`.
    pub frozen: Vec<bool>,
    pub restarts_used: usize,
}

impl PartialColoringResult {
    pub fn frozen_count(&self) -> usize {
        self.frozen.iter().filter(|&&f| f).count()
    }
}

#[derive(Debug, Clone)]
pub enum WalkOutcome {
    Colored(PartialColoringResult),
    /// Every attempt failed to freeze half the variables in time.
    Exhausted { attempts: usize },
}

/// `Σ_j exp(-c_j²/16)` over finite budgets.
pub fn potential(budgets: &[f64]) -> f64 {
    budgets
        .iter()
        .filter(|c| c.is_finite())
        .map(|&c| (-c * c / 16.0).exp())
        .sum()
}

pub fn potential_limit(n: usize) -> f64 {
    n as f64 / 16.0
}

pub fn partial_color(req: &PartialColoringRequest) -> Result<WalkOutcome> {
    let n = req.start.len();
    let m = req.rows.len();
    if req.budgets.len() != m {
        return Err(Error::InvalidParameter("one budget per row required".into()));
    }
    for (j, row) in req.rows.iter().enumerate() {
        if row.len() != n {
            return Err(Error::InvalidParameter(format!(
                "row {j} has length {}, expected {n}",
                row.len()
            )));
        }
    }
    if req.budgets.iter().any(|c| c.is_nan() || *c < 0.0) {
        return Err(Error::InvalidParameter("budgets must be nonnegative".into()));
    }
    if req.start.iter().any(|v| !v.is_finite() || v.abs() > 1.0 + 1e-12) {
        return Err(Error::InvalidParameter("start outside the box".into()));
    }

    let pot = potential(&req.budgets);
    let limit = potential_limit(n);
    if pot > limit + 1e-12 {
        return Err(Error::RequestRejected { potential: pot, limit });
    }

    let delta = req.delta.unwrap_or(1.0 / n.max(1) as f64);
    if !(delta > 0.0 && delta < 1.0) {
        return Err(Error::InvalidParameter(format!("delta {delta} outside (0, 1)")));
    }
    let m_finite = req.budgets.iter().filter(|c| c.is_finite()).count();
    let gamma = req.gamma.unwrap_or_else(|| {
        let arg = ((n * m_finite) as f64).max(2.0) / delta;
        delta / (8.0 * arg.ln()).sqrt()
    });
    if !(gamma > 0.0 && gamma < 1.0) {
        return Err(Error::InvalidParameter(format!("gamma {gamma} outside (0, 1)")));
    }
    let steps = req.steps.unwrap_or_else(|| (16.0 / (gamma * gamma)).ceil() as usize);

    let walk = WalkSetup::new(req, n, delta, gamma, steps);
    for attempt in 0..=req.max_restarts {
        let seed = derive_seed(req.seed, attempt as u64);
        if let Some(result) = walk.attempt(seed) {
            return Ok(WalkOutcome::Colored(PartialColoringResult {
                point: result.0,
                frozen: result.1,
                restarts_used: attempt,
            }));
        }
    }
    Ok(WalkOutcome::Exhausted { attempts: req.max_restarts + 1 })
}

struct WalkSetup<'a> {
    req: &'a PartialColoringRequest,
    n: usize,
    delta: f64,
    gamma: f64,
    steps: usize,
    norms: Vec<f64>,
    /// Absolute budget `c_j‖v_j‖` per row; rows with zero norm or
    /// infinite budget are inert.
    abs_budget: Vec<f64>,
    /// Sparse view of each row: (index, value) pairs.
    sparse: Vec<Vec<(usize, f64)>>,
    /// Rows that can ever activate: finite budget and nonzero norm.
    live: Vec<usize>,
}

impl<'a> WalkSetup<'a> {
    fn new(req: &'a PartialColoringRequest, n: usize, delta: f64, gamma: f64, steps: usize) -> Self {
        let m = req.rows.len();
        let mut norms = vec![0.0; m];
        let mut sparse = Vec::with_capacity(m);
        for (j, row) in req.rows.iter().enumerate() {
            let nz: Vec<(usize, f64)> =
                row.iter().enumerate().filter(|(_, v)| **v != 0.0).map(|(i, v)| (i, *v)).collect();
            norms[j] = nz.iter().map(|(_, v)| v * v).sum::<f64>().sqrt();
            sparse.push(nz);
        }
        let mut abs_budget = vec![f64::INFINITY; m];
        let mut live = Vec::new();
        for j in 0..m {
            if req.budgets[j].is_finite() && norms[j] > 0.0 {
                abs_budget[j] = req.budgets[j] * norms[j];
                live.push(j);
            }
        }
        WalkSetup { req, n, delta, gamma, steps, norms, abs_budget, sparse, live }
    }

    /// One seeded walk; `Some((point, frozen))` on success.
    fn attempt(&self, seed: u64) -> Option<(Vec<f64>, Vec<bool>)> {
        let n = self.n;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut x = self.req.start.clone();
        let mut frozen: Vec<bool> = x.iter().map(|v| v.abs() >= 1.0 - self.delta).collect();
        let mut frozen_count = frozen.iter().filter(|&&f| f).count();
        let mut disc = vec![0.0f64; self.req.rows.len()];
        let mut active: Vec<bool> = vec![false; self.req.rows.len()];
        for &j in &self.live {
            // Budgets smaller than one step are pinned from the start.
            if self.abs_budget[j] <= self.gamma * self.norms[j] {
                active[j] = true;
            }
        }

        let mut basis = self.build_basis(&active, &frozen);
        let mut g = vec![0.0f64; n];
        let mut stall = 0usize;

        for _ in 0..self.steps {
            if 2 * frozen_count >= n {
                break;
            }
            // Gaussian restricted to alive coordinates, projected away
            // from the active row subspace.
            for i in 0..n {
                g[i] = if frozen[i] { 0.0 } else { rng.sample(StandardNormal) };
            }
            for b in &basis {
                let c = linalg::dot(&g, b);
                for i in 0..n {
                    g[i] -= c * b[i];
                }
            }
            let gnorm = linalg::dot(&g, &g).sqrt();
            if gnorm <= 1e-12 {
                stall += 1;
                if stall > 64 {
                    break;
                }
                continue;
            }
            stall = 0;

            // Scale the step so no coordinate leaves the box; the walk
            // direction stays inside the projected subspace, so pinned
            // rows pick up nothing from boundary handling.
            let mut lam = 1.0f64;
            for i in 0..n {
                if frozen[i] || g[i] == 0.0 {
                    continue;
                }
                let step = self.gamma * g[i];
                let room = if step > 0.0 { (1.0 - x[i]) / step } else { (-1.0 - x[i]) / step };
                if room < lam {
                    lam = room.max(0.0);
                }
            }

            let mut froze_now = false;
            for i in 0..n {
                if frozen[i] || g[i] == 0.0 {
                    continue;
                }
                x[i] += lam * self.gamma * g[i];
                if x[i].abs() >= 1.0 - 1e-12 {
                    x[i] = x[i].signum();
                }
                if x[i].abs() >= 1.0 - self.delta {
                    frozen[i] = true;
                    frozen_count += 1;
                    froze_now = true;
                }
            }

            let mut activated = false;
            for &j in &self.live {
                let step_j: f64 =
                    self.sparse[j].iter().map(|&(i, v)| g[i] * v).sum::<f64>() * lam * self.gamma;
                if step_j != 0.0 {
                    disc[j] += step_j;
                }
                if disc[j].abs() > self.abs_budget[j] + 1e-9 * (1.0 + self.abs_budget[j]) {
                    return None; // budget overshoot: restart
                }
                if !active[j] && disc[j].abs() >= self.abs_budget[j] - self.gamma * self.norms[j] {
                    active[j] = true;
                    activated = true;
                }
            }

            if froze_now || activated {
                basis = self.build_basis(&active, &frozen);
            }
        }

        if 2 * frozen_count < n {
            return None;
        }
        // Certify the contract by direct recomputation, not internal state.
        for &j in &self.live {
            let fresh: f64 =
                self.sparse[j].iter().map(|&(i, v)| (x[i] - self.req.start[i]) * v).sum();
            if fresh.abs() > self.abs_budget[j] + 1e-9 * (1.0 + self.abs_budget[j]) {
                return None;
            }
        }
        Some((x, frozen))
    }

    /// Orthonormal basis of the active row vectors restricted to alive
    /// coordinates (two-pass Gram-Schmidt).
    fn build_basis(&self, active: &[bool], frozen: &[bool]) -> Vec<Vec<f64>> {
        let mut basis: Vec<Vec<f64>> = Vec::new();
        for &j in &self.live {
            if !active[j] {
                continue;
            }
            let mut u = vec![0.0f64; self.n];
            for &(i, v) in &self.sparse[j] {
                if !frozen[i] {
                    u[i] = v;
                }
            }
            for _ in 0..2 {
                for b in &basis {
                    let c = linalg::dot(&u, b);
                    if c != 0.0 {
                        for i in 0..self.n {
                            u[i] -= c * b[i];
                        }
                    }
                }
            }
            let norm = linalg::dot(&u, &u).sqrt();
            if norm > 1e-10 * (1.0 + self.norms[j]) {
                for v in u.iter_mut() {
                    *v /= norm;
                }
                basis.push(u);
            }
        }
        basis
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn assert_contract(req: &PartialColoringRequest, res: &PartialColoringResult) {
        let n = req.start.len();
        assert!(2 * res.frozen_count() >= n, "only {} frozen", res.frozen_count());
        let delta = req.delta.unwrap_or(1.0 / n as f64);
        for (i, &f) in res.frozen.iter().enumerate() {
            assert_eq!(f, res.point[i].abs() >= 1.0 - delta);
            assert!(res.point[i].abs() <= 1.0 + 1e-12);
        }
        for (j, row) in req.rows.iter().enumerate() {
            if !req.budgets[j].is_finite() {
                continue;
            }
            let norm: f64 = row.iter().map(|v| v * v).sum::<f64>().sqrt();
            let val: f64 =
                row.iter().zip(res.point.iter().zip(&req.start)).map(|(v, (x, x0))| v * (x - x0)).sum();
            assert!(
                val.abs() <= req.budgets[j] * norm + 1e-6,
                "row {j}: |{val}| > {} * {norm}",
                req.budgets[j]
            );
        }
    }

    #[test]
    fn unconstrained_walk_freezes_half() {
        let req = PartialColoringRequest::new(vec![], vec![], vec![0.0; 8], 1);
        match partial_color(&req).unwrap() {
            WalkOutcome::Colored(res) => {
                assert!(res.frozen_count() >= 4);
                assert_contract(&req, &res);
            }
            WalkOutcome::Exhausted { .. } => panic!("unconstrained walk must succeed"),
        }
    }

    #[test]
    fn zero_budget_row_is_exactly_respected() {
        // One all-ones row with c = 0 on n = 16: potential 1 <= 16/16
        // holds with equality.
        let n = 16;
        let req =
            PartialColoringRequest::new(vec![vec![1.0; n]], vec![0.0], vec![0.0; n], 7);
        match partial_color(&req).unwrap() {
            WalkOutcome::Colored(res) => {
                assert!(res.frozen_count() >= 8);
                let sum: f64 = res.point.iter().sum();
                assert!(sum.abs() <= 1e-6 * 4.0, "sum {sum}");
                assert_contract(&req, &res);
            }
            WalkOutcome::Exhausted { .. } => panic!("walk must succeed"),
        }
    }

    #[test]
    fn violated_potential_condition_is_rejected() {
        // Sixteen zero-budget rows on n = 8: potential 16 > 8/16.
        let n = 8;
        let rows = vec![vec![1.0; n]; 16];
        let req = PartialColoringRequest::new(rows, vec![0.0; 16], vec![0.0; n], 0);
        match partial_color(&req) {
            Err(Error::RequestRejected { potential, limit }) => {
                assert!(potential > limit);
            }
            other => panic!("expected rejection, got {other:?}"),
        }
    }

    #[test]
    fn infinite_budgets_do_not_count() {
        let n = 8;
        let rows = vec![vec![1.0; n]; 16];
        let req =
            PartialColoringRequest::new(rows, vec![f64::INFINITY; 16], vec![0.0; n], 3);
        match partial_color(&req).unwrap() {
            WalkOutcome::Colored(res) => assert!(2 * res.frozen_count() >= n),
            WalkOutcome::Exhausted { .. } => panic!("unconstrained in effect"),
        }
    }

    #[test]
    fn random_requests_respect_budgets() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(11);
        for trial in 0..15 {
            let n = 24;
            let m = rng.gen_range(1..=2);
            let rows: Vec<Vec<f64>> = (0..m)
                .map(|_| (0..n).map(|_| if rng.gen_bool(0.4) { 1.0 } else { 0.0 }).collect())
                .collect();
            let budgets: Vec<f64> = (0..m).map(|_| rng.gen_range(5.0..7.0)).collect();
            assert!(potential(&budgets) <= potential_limit(n));
            let req = PartialColoringRequest::new(rows, budgets, vec![0.0; n], 100 + trial);
            match partial_color(&req).unwrap() {
                WalkOutcome::Colored(res) => assert_contract(&req, &res),
                WalkOutcome::Exhausted { attempts } => {
                    panic!("exhausted after {attempts} attempts on trial {trial}")
                }
            }
        }
    }

    #[test]
    fn rounding_frozen_entries_costs_at_most_one_per_row() {
        // With δ = 1/n and 0/1 rows, snapping every frozen entry to the
        // nearest sign moves each row value by at most ‖v‖₁·δ <= 1.
        let n = 32;
        let rows: Vec<Vec<f64>> = vec![vec![1.0; n]];
        let req = PartialColoringRequest::new(rows.clone(), vec![5.0], vec![0.0; n], 13);
        let WalkOutcome::Colored(res) = partial_color(&req).unwrap() else {
            panic!("walk must succeed");
        };
        let delta = 1.0 / n as f64;
        let mut rounded = res.point.clone();
        for (i, v) in rounded.iter_mut().enumerate() {
            if res.frozen[i] {
                *v = if *v >= 0.0 { 1.0 } else { -1.0 };
            }
        }
        for row in &rows {
            let before: f64 = row.iter().zip(&res.point).map(|(a, b)| a * b).sum();
            let after: f64 = row.iter().zip(&rounded).map(|(a, b)| a * b).sum();
            let l1: f64 = row.iter().map(|v| v.abs()).sum();
            assert!((after - before).abs() <= l1 * delta + 1e-12);
            assert!((after - before).abs() <= 1.0 + 1e-12);
        }
    }

    #[test]
    fn deterministic_for_fixed_seed() {
        let n = 16;
        let req =
            PartialColoringRequest::new(vec![vec![1.0; n]], vec![4.0], vec![0.0; n], 42);
        let a = partial_color(&req).unwrap();
        let b = partial_color(&req).unwrap();
        match (a, b) {
            (WalkOutcome::Colored(ra), WalkOutcome::Colored(rb)) => {
                assert_eq!(ra.point, rb.point);
            }
            _ => panic!("both runs must succeed identically"),
        }
    }
}
