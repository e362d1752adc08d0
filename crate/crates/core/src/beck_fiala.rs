//! Beck-Fiala iterative rounding.
//!
//! Maintains a fractional coloring and repeatedly moves to a basic
//! feasible solution of the active subsystem (rows with more than `t`
//! floating variables), permanently fixing variables that land on `±1`.
//! A row's value is exactly preserved while it is active; once inactive
//! it has at most `t` floating variables, so finishing them costs less
//! than `2t` — with an all-zeros start the classical `2t - 1` bound holds
//! exactly.

use crate::error::{Error, Result};
use crate::linalg::DenseMatrix;
use crate::lp::{self, BoxedLinearSystem};
use crate::set_system::{Coloring, SetSystem};

/// Round `x0` to an integral coloring with `‖A(χ - x0)‖_∞ <= 2t - 1`
/// (plus at most 1 when `x0 != 0`, from rounding the final residue).
pub fn beck_fiala_color(sys: &SetSystem, x0: &Coloring, tol: f64) -> Result<Coloring> {
    if x0.len() != sys.n() {
        return Err(Error::InvalidParameter(format!(
            "starting coloring length {} does not match n = {}",
            x0.len(),
            sys.n()
        )));
    }
    let n = sys.n();
    let t = sys.t();
    let rows = sys.row_members();

    let mut x: Vec<f64> = x0.values().to_vec();
    let mut fixed: Vec<bool> = x.iter().map(|v| v.abs() == 1.0).collect();

    loop {
        // Rows still holding more than t floating variables.
        let active: Vec<usize> = (0..sys.m())
            .filter(|&j| rows[j].iter().filter(|&&i| !fixed[i]).count() > t)
            .collect();
        if active.is_empty() {
            break;
        }
        // Floating variables that appear in some active row.
        let mut in_scope = vec![false; n];
        for &j in &active {
            for &i in &rows[j] {
                if !fixed[i] {
                    in_scope[i] = true;
                }
            }
        }
        let scope: Vec<usize> = (0..n).filter(|&i| in_scope[i]).collect();
        let before = scope.len();

        // Basic feasible solution of {A_active z = A_active x_scope}.
        let mut sub = DenseMatrix::zeros(active.len(), scope.len());
        let mut col_of = vec![usize::MAX; n];
        for (c, &i) in scope.iter().enumerate() {
            col_of[i] = c;
        }
        for (r, &j) in active.iter().enumerate() {
            for &i in &rows[j] {
                if col_of[i] != usize::MAX {
                    sub.set(r, col_of[i], 1.0);
                }
            }
        }
        let start: Vec<f64> = scope.iter().map(|&i| x[i]).collect();
        let target = sub.matvec(&start);
        let bls = BoxedLinearSystem::unit_box(sub, target)?;
        let moved = lp::basic_feasible_solution(&bls, &start, tol)?;

        let mut after = 0usize;
        for (c, &i) in scope.iter().enumerate() {
            x[i] = moved[c];
            if x[i].abs() == 1.0 {
                fixed[i] = true;
            } else {
                after += 1;
            }
        }
        if after >= before {
            return Err(Error::SolverBreakdown(
                "rounding made no progress on floating variables".into(),
            ));
        }
    }

    // No active rows remain: sign the residual floats greedily against
    // the running row values.
    let floats: Vec<usize> = (0..n).filter(|&i| !fixed[i]).collect();
    let mut dev: Vec<f64> = vec![0.0; sys.m()];
    for (i, &xi) in x.iter().enumerate() {
        if xi != 0.0 {
            for &j in sys.membership(i) {
                dev[j] += xi;
            }
        }
    }
    greedy_sign(sys, &mut x, &floats, &mut dev);

    Coloring::integral(x)
}

/// Sequentially assign `±1` to each listed variable, choosing the sign
/// that minimizes the maximum absolute accumulator. `dev` holds per-row
/// accumulators and is updated in place as `x[i]` moves to its sign.
pub(crate) fn greedy_sign(sys: &SetSystem, x: &mut [f64], order: &[usize], dev: &mut [f64]) {
    for &i in order {
        let mut best_sign = 1.0;
        let mut best_cost = f64::INFINITY;
        for &s in &[1.0, -1.0] {
            let shift = s - x[i];
            let mut cost = 0.0f64;
            for (j, &d) in dev.iter().enumerate() {
                let nd = if sys.membership(i).binary_search(&j).is_ok() { d + shift } else { d };
                cost = cost.max(nd.abs());
            }
            if cost < best_cost {
                best_cost = cost;
                best_sign = s;
            }
        }
        let shift = best_sign - x[i];
        for &j in sys.membership(i) {
            dev[j] += shift;
        }
        x[i] = best_sign;
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::set_system::{self, SetSystem};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn check_bound(sys: &SetSystem, seed: u64) {
        let x0 = Coloring::zeros(sys.n());
        let out = beck_fiala_color(sys, &x0, 1e-8).unwrap();
        assert!(out.is_integral());
        let disc = set_system::discrepancy(sys, &out).unwrap();
        let rounded = disc.round();
        assert!((disc - rounded).abs() < 1e-9, "non-integer discrepancy {disc}");
        let bound = if sys.t() == 0 { 0.0 } else { (2 * sys.t() - 1) as f64 };
        assert!(
            rounded <= bound,
            "discrepancy {rounded} exceeds 2t-1 = {bound} (seed {seed})"
        );
    }

    #[test]
    fn disjoint_sets_stay_balanced() {
        // t = 1: every element in exactly one set.
        let sys = SetSystem::generate_random(40, 6, 1, 3).unwrap();
        check_bound(&sys, 3);
    }

    #[test]
    fn single_even_set_has_discrepancy_at_most_one() {
        let sys = SetSystem::new(1, 1, vec![vec![0]; 8]).unwrap();
        let out = beck_fiala_color(&sys, &Coloring::zeros(8), 1e-8).unwrap();
        let disc = set_system::discrepancy(&sys, &out).unwrap();
        assert!(disc <= 1.0);
        let (_, opt) = set_system::brute_force_optimum(&sys).unwrap();
        assert_eq!(opt, 0.0);
    }

    #[test]
    fn bound_holds_over_random_instances() {
        let mut rng = ChaCha8Rng::seed_from_u64(77);
        for trial in 0..50 {
            let m = rng.gen_range(2..=40);
            let t = rng.gen_range(1..=m.min(8));
            let n = rng.gen_range(4..=200);
            let sys = SetSystem::generate_random(n, m, t, 1000 + trial).unwrap();
            check_bound(&sys, 1000 + trial);
        }
    }

    #[test]
    fn degenerate_degree_zero() {
        let sys = SetSystem::generate_random(6, 3, 0, 0).unwrap();
        let out = beck_fiala_color(&sys, &Coloring::zeros(6), 1e-8).unwrap();
        assert!(out.is_integral());
        assert_eq!(set_system::discrepancy(&sys, &out).unwrap(), 0.0);
    }
}
