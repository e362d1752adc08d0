//! Acceptance suite: every criterion prints one PASS/FAIL line (visible
//! with `--nocapture`) and fails the build on violation.
//!
//! Run with:
//!     cargo test -p disclab-cli --test acceptance -- --nocapture

use std::sync::OnceLock;
use std::time::{Duration, Instant};

use disclab::beck_fiala::beck_fiala_color;
use disclab::oracles;
use disclab::partial_coloring::{
    partial_color, potential, potential_limit, PartialColoringRequest, WalkOutcome,
};
use disclab::phased::{self, PhaseConfig, SolveReport};
use disclab::reduction::{self, ReduceOutcome};
use disclab::rng::derive_seed;
use disclab::set_system::{self, Coloring, SetSystem};

const MASTER_SEED: u64 = 0x00AC_CE97;

fn pass(criterion: u32, detail: String) {
    println!("[criterion {criterion}] PASS — {detail}");
}

fn fail(criterion: u32, detail: String) -> ! {
    println!("[criterion {criterion}] FAIL — {detail}");
    panic!("[criterion {criterion}] {detail}");
}

// ---------------------------------------------------------------------
// Shared solver grid for criteria 3, 4, and 5: m = n in {64, 128},
// t in {4, 9, 16} plus 25, 20 seeds each, at the default c and at c = 8
// (the latter keeps the potential condition satisfiable at this scale so
// the phase checks are not vacuous).

struct GridRun {
    m: usize,
    t: usize,
    c: f64,
    sys: SetSystem,
    report: SolveReport,
}

struct Grid {
    runs: Vec<GridRun>,
    build_time: Duration,
}

static GRID: OnceLock<Grid> = OnceLock::new();

fn grid() -> &'static Grid {
    GRID.get_or_init(|| {
        let start = Instant::now();
        let mut runs = Vec::new();
        for &c in &[4.0f64, 8.0] {
            for &m in &[64usize, 128] {
                for &t in &[4usize, 9, 16, 25] {
                    for i in 0..20u64 {
                        let seed = derive_seed(
                            MASTER_SEED,
                            (c as u64) << 40 | (m as u64) << 20 | (t as u64) << 8 | i,
                        );
                        let sys = SetSystem::generate_random(m, m, t, seed).unwrap();
                        let cfg = PhaseConfig { c, seed, ..PhaseConfig::default() };
                        let report =
                            phased::solve(&sys, &Coloring::zeros(m), &cfg).unwrap();
                        runs.push(GridRun { m, t, c, sys, report });
                    }
                }
            }
        }
        Grid { runs, build_time: start.elapsed() }
    })
}

// Criterion 7 runs are shared with criterion 5.
struct ReductionRuns {
    successes: usize,
    total: usize,
    full_reports: Vec<(usize, SolveReport)>, // (t, report)
}

static REDUCTIONS: OnceLock<ReductionRuns> = OnceLock::new();

fn reductions() -> &'static ReductionRuns {
    REDUCTIONS.get_or_init(|| {
        let m = 8usize;
        let t = 2usize;
        let k = reduction::default_head_size(m, 4.0);
        let n = 4 * k;
        let mut successes = 0;
        let mut full_reports = Vec::new();
        for i in 0..50u64 {
            let seed = derive_seed(MASTER_SEED ^ 0x7ED0, i);
            let sys = SetSystem::generate_random(n, m, t, seed).unwrap();
            match reduction::reduce(&sys, k, 1e-8).unwrap() {
                ReduceOutcome::Reduced(red) => {
                    successes += 1;
                    // Recompute both invariants from scratch.
                    let head = sys.restrict(&(0..k).collect::<Vec<_>>()).unwrap();
                    let ax = head.incidence().matvec(red.head_fractional.values());
                    let resid = ax
                        .iter()
                        .zip(red.b.values())
                        .fold(0.0f64, |acc, (a, b)| acc.max((a + b).abs()));
                    if resid > 1e-6 {
                        fail(7, format!("head residual {resid} > 1e-6 on seed {i}"));
                    }
                    if red.b.max_abs() > (2 * t - 1) as f64 {
                        fail(7, format!("‖b‖ = {} > 2t-1 on seed {i}", red.b.max_abs()));
                    }
                }
                ReduceOutcome::HeadInfeasible { .. } => {}
            }
            let cfg = PhaseConfig { seed, ..PhaseConfig::default() };
            let full = reduction::solve_full(&sys, &cfg, k).unwrap();
            full_reports.push((t, full.solve));
        }
        ReductionRuns { successes, total: 50, full_reports }
    })
}

// ---------------------------------------------------------------------

#[test]
fn c1_beck_fiala_hard_bound() {
    use rand::{Rng, SeedableRng};
    let start = Instant::now();
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(MASTER_SEED ^ 0xBF);
    let mut worst = 0.0f64;
    for trial in 0..200u64 {
        let n = rng.gen_range(10..=500);
        let m = rng.gen_range(4..=64);
        let t = rng.gen_range(1..=12usize.min(m));
        let seed = derive_seed(MASTER_SEED ^ 0xBF, trial);
        let sys = SetSystem::generate_random(n, m, t, seed).unwrap();
        let out = beck_fiala_color(&sys, &Coloring::zeros(n), 1e-8).unwrap();
        let disc = set_system::discrepancy(&sys, &out).unwrap();
        let as_int = disc.round();
        if (disc - as_int).abs() > 1e-9 {
            fail(1, format!("non-integer discrepancy {disc} on trial {trial}"));
        }
        if as_int > (2 * t - 1) as f64 {
            fail(
                1,
                format!("discrepancy {as_int} > 2t-1 = {} (n={n} m={m} t={t})", 2 * t - 1),
            );
        }
        worst = worst.max(as_int / (2 * t - 1) as f64);
    }
    let elapsed = start.elapsed();
    if elapsed > Duration::from_secs(120) {
        fail(1, format!("runtime {elapsed:?} exceeds 2 min"));
    }
    pass(1, format!("200/200 within 2t-1 (worst ratio {worst:.2}) in {elapsed:?}"));
}

#[test]
fn c2_partial_coloring_contract() {
    use rand::{Rng, SeedableRng};
    let start = Instant::now();
    let mut first_attempt = 0usize;
    let trials = 200usize;
    for trial in 0..trials {
        let seed = derive_seed(MASTER_SEED ^ 0x9C, trial as u64);
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        let n = [16usize, 24, 32][trial % 3];
        let m = rng.gen_range(1..=n / 8);
        let mut rows: Vec<Vec<f64>> = Vec::new();
        let mut budgets: Vec<f64> = Vec::new();
        for _ in 0..m {
            rows.push((0..n).map(|_| if rng.gen_bool(0.4) { 1.0 } else { 0.0 }).collect());
            budgets.push(if rng.gen_range(0..4) == 0 {
                f64::INFINITY
            } else {
                rng.gen_range(4.8..7.0)
            });
        }
        if trial % 7 == 0 && potential(&budgets) + 1.0 <= potential_limit(n) {
            rows.push(vec![1.0; n]);
            budgets.push(0.0);
        }
        assert!(potential(&budgets) <= potential_limit(n), "request built invalid");
        let req = PartialColoringRequest {
            max_restarts: 10,
            ..PartialColoringRequest::new(rows.clone(), budgets.clone(), vec![0.0; n], seed)
        };
        match partial_color(&req).unwrap() {
            WalkOutcome::Colored(res) => {
                if res.restarts_used == 0 {
                    first_attempt += 1;
                }
                if 2 * res.frozen_count() < n {
                    fail(2, format!("only {} of {n} frozen on trial {trial}", res.frozen_count()));
                }
                for (j, row) in rows.iter().enumerate() {
                    if !budgets[j].is_finite() {
                        continue;
                    }
                    let norm: f64 = row.iter().map(|v| v * v).sum::<f64>().sqrt();
                    let val: f64 = row.iter().zip(&res.point).map(|(v, x)| v * x).sum();
                    if val.abs() > budgets[j] * norm + 1e-6 {
                        fail(2, format!("row {j}: |{val}| > budget on trial {trial}"));
                    }
                }
            }
            WalkOutcome::Exhausted { attempts } => {
                fail(2, format!("trial {trial} exhausted after {attempts} attempts"));
            }
        }
    }
    let rate = first_attempt as f64 / trials as f64;
    if rate < 0.1 {
        fail(2, format!("single-attempt success rate {rate:.3} < 0.1"));
    }
    let elapsed = start.elapsed();
    if elapsed > Duration::from_secs(120) {
        fail(2, format!("runtime {elapsed:?} exceeds 2 min"));
    }
    pass(2, format!("{trials} valid requests honored; single-attempt rate {rate:.2} in {elapsed:?}"));
}

#[test]
fn c3_phase_structure() {
    let g = grid();
    let mut checked_iterations = 0usize;
    let mut non_aborting = 0usize;
    for run in g.runs.iter().filter(|r| [4, 9, 16].contains(&r.t)) {
        if run.report.fallback_used {
            continue;
        }
        non_aborting += 1;
        let rows = run.sys.row_members();
        let sqrt_t = (run.t as f64).sqrt();
        let mut phase1_total = vec![0.0f64; run.sys.m()];
        let mut phase1_budget_sum = 0.0f64;
        for rec in &run.report.trace.iterations {
            if rec.alive_after > rec.alive_before.div_ceil(2) {
                fail(
                    3,
                    format!(
                        "alive {} -> {} fails halving (m={} t={} c={})",
                        rec.alive_before, rec.alive_after, run.m, run.t, run.c
                    ),
                );
            }
            checked_iterations += 1;
            match rec.phase {
                1 => {
                    let d = rec.row_budget.expect("phase-1 budget recorded");
                    phase1_budget_sum += 1.0 / ((rec.index * rec.index) as f64);
                    for (j, row) in rows.iter().enumerate() {
                        let moved: f64 = row
                            .iter()
                            .map(|&i| rec.point_after[i] - rec.point_before[i])
                            .sum();
                        if moved.abs() > d + 1e-6 {
                            fail(3, format!("phase-1 row {j} moved {moved} > budget {d}"));
                        }
                        phase1_total[j] += moved.abs();
                    }
                }
                2 => {
                    for &j in &rec.zero_budget_rows {
                        let moved: f64 = rows[j]
                            .iter()
                            .map(|&i| rec.point_after[i] - rec.point_before[i])
                            .sum();
                        if moved.abs() > 1e-6 {
                            fail(3, format!("phase-2 pinned row {j} moved {moved}"));
                        }
                    }
                }
                p => fail(3, format!("unknown phase {p}")),
            }
        }
        let cap = run.c * sqrt_t * phase1_budget_sum + 1e-6;
        for (j, total) in phase1_total.iter().enumerate() {
            if *total > cap {
                fail(3, format!("phase-1 cumulative row {j}: {total} > {cap}"));
            }
        }
    }
    if g.build_time > Duration::from_secs(300) {
        fail(3, format!("grid runtime {:?} exceeds 5 min", g.build_time));
    }
    pass(
        3,
        format!(
            "{non_aborting} non-aborting runs, {checked_iterations} iterations verified from traces (grid built in {:?})",
            g.build_time
        ),
    );
}

#[test]
fn c4_sqrt_t_scaling() {
    let g = grid();
    let ts = [4usize, 9, 16, 25];
    for &m in &[64usize, 128] {
        let mut medians = Vec::new();
        for &t in &ts {
            let mut discs: Vec<f64> = g
                .runs
                .iter()
                .filter(|r| r.m == m && r.t == t && r.c == 4.0)
                .map(|r| r.report.discrepancy_inf)
                .collect();
            assert_eq!(discs.len(), 20);
            discs.sort_by(|a, b| a.partial_cmp(b).unwrap());
            medians.push(0.5 * (discs[9] + discs[10]));
        }
        let normalized: Vec<f64> =
            medians.iter().zip(&ts).map(|(d, &t)| d / (t as f64).sqrt()).collect();
        let lo = normalized.iter().cloned().fold(f64::INFINITY, f64::min);
        let hi = normalized.iter().cloned().fold(0.0f64, f64::max);
        if hi > 2.0 * lo {
            fail(
                4,
                format!("m={m}: median/sqrt(t) spans {lo:.2}..{hi:.2}, factor > 2"),
            );
        }
        let growth = medians[3] / medians[0];
        if growth > 3.0 {
            fail(4, format!("m={m}: median(t=25)/median(t=4) = {growth:.2} > 3"));
        }
        pass(
            4,
            format!(
                "m={m}: medians {medians:?}, med/sqrt(t) in [{lo:.2}, {hi:.2}], growth {growth:.2}"
            ),
        );
    }
}

#[test]
fn c5_fallback_ceiling() {
    let g = grid();
    let red = reductions();
    let mut checked = 0usize;
    let all_runs = g
        .runs
        .iter()
        .map(|r| (r.t, &r.report))
        .chain(red.full_reports.iter().map(|(t, rep)| (*t, rep)));
    for (t, report) in all_runs {
        checked += 1;
        if report.fallback_used && report.discrepancy_inf > (2 * t - 1) as f64 + 1e-9 {
            fail(
                5,
                format!(
                    "fallback run reports {} > 2t-1 = {}",
                    report.discrepancy_inf,
                    2 * t - 1
                ),
            );
        }
        if report.discrepancy_inf > (2 * t) as f64 + 1e-9 {
            fail(
                5,
                format!("run reports {} > 2t = {} (t={t})", report.discrepancy_inf, 2 * t),
            );
        }
    }
    pass(5, format!("{checked} pipeline runs within the 2t ceiling, fallbacks within 2t-1"));
}

#[test]
fn c6_containment_oracle_equivalence() {
    let start = Instant::now();
    let mut false_verdicts = 0usize;
    for trial in 0..100u64 {
        let m = 1 + (trial as usize) % 4;
        let t = 1 + (trial as usize / 4) % 2.min(m);
        let k = 1 + (trial as usize / 8) % 12;
        let seed = derive_seed(MASTER_SEED ^ 0xC0, trial);
        let sys = SetSystem::generate_random(k, m, t, seed).unwrap();
        let a = sys.incidence();
        let exact = reduction::containment_check_exact(&a, t, 1e-8).unwrap();

        // Oracle: membership of every cube vertex, dual-route checked.
        let radius = 2.0 * t as f64;
        let mut all_in = true;
        for mask in 0..(1u32 << m) {
            let q: Vec<f64> =
                (0..m).map(|j| if mask >> j & 1 == 1 { radius } else { -radius }).collect();
            match oracles::enumerate_polytope_membership(&a, &q, 1e-8) {
                Ok(member) => all_in &= member,
                Err(e) => fail(6, format!("oracle disagreement on trial {trial}: {e}")),
            }
        }
        if exact.contained != all_in {
            fail(
                6,
                format!(
                    "trial {trial}: exact says {}, vertex oracle says {all_in}",
                    exact.contained
                ),
            );
        }
        if !exact.contained {
            false_verdicts += 1;
            let cert = exact.certificate.as_ref().expect("certificate on false verdict");
            let val = reduction::l1_dual_value(&a, &cert.direction);
            if val > 2.0 * t as f64 + 1e-9 {
                fail(6, format!("trial {trial}: certificate value {val} > 2t"));
            }
        }
    }
    let elapsed = start.elapsed();
    if elapsed > Duration::from_secs(180) {
        fail(6, format!("runtime {elapsed:?} exceeds 3 min"));
    }
    pass(
        6,
        format!("100/100 agreements ({false_verdicts} non-containments certified) in {elapsed:?}"),
    );
}

#[test]
fn c7_reduction_feasibility() {
    let start = Instant::now();
    let red = reductions();
    if red.successes < 45 {
        fail(7, format!("only {}/{} reductions succeeded", red.successes, red.total));
    }

    // Threshold sweep pooled over m in {4,6,8}, t in {1,2}: feasibility
    // frequency must be non-decreasing in the head-size ratio.
    let ratios = [0.5f64, 1.0, 2.0, 4.0];
    let mut freqs = Vec::new();
    for (ri, &ratio) in ratios.iter().enumerate() {
        let mut ok = 0usize;
        let mut total = 0usize;
        for &m in &[4usize, 6, 8] {
            for &t in &[1usize, 2] {
                let k = reduction::default_head_size(m, ratio);
                let n = 4 * k;
                for i in 0..10u64 {
                    // Same instance family across ratios, larger heads.
                    let seed = derive_seed(
                        MASTER_SEED ^ 0x5EED,
                        (m as u64) << 32 | (t as u64) << 16 | i,
                    );
                    let sys = SetSystem::generate_random(n, m, t, seed).unwrap();
                    total += 1;
                    if matches!(
                        reduction::reduce(&sys, k, 1e-8).unwrap(),
                        ReduceOutcome::Reduced(_)
                    ) {
                        ok += 1;
                    }
                }
            }
        }
        let f = ok as f64 / total as f64;
        if let Some(&prev) = freqs.last() {
            if f + 1e-12 < prev {
                fail(
                    7,
                    format!(
                        "feasibility frequency dropped from {prev:.3} to {f:.3} at ratio {}",
                        ratios[ri]
                    ),
                );
            }
        }
        freqs.push(f);
    }
    pass(
        7,
        format!(
            "{}/{} reductions feasible; pooled sweep frequencies {freqs:?} non-decreasing in {:?}",
            red.successes,
            red.total,
            start.elapsed()
        ),
    );
}

#[test]
fn c8_optimality_sandwich() {
    use rand::{Rng, SeedableRng};
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(MASTER_SEED ^ 0x0B);
    for trial in 0..100u64 {
        let n = rng.gen_range(4..=12);
        let m = rng.gen_range(2..=10);
        let t = rng.gen_range(1..=4usize.min(m));
        let seed = derive_seed(MASTER_SEED ^ 0x0B, trial);
        let sys = SetSystem::generate_random(n, m, t, seed).unwrap();
        let (_, opt) = set_system::brute_force_optimum(&sys).unwrap();
        let zeros = Coloring::zeros(n);
        let cfg = PhaseConfig { seed, ..PhaseConfig::default() };

        let bf = beck_fiala_color(&sys, &zeros, 1e-8).unwrap();
        let ph = phased::solve(&sys, &zeros, &cfg).unwrap().coloring;
        let full = reduction::solve_full(&sys, &cfg, (n / 2).max(1)).unwrap().solve.coloring;
        for (name, coloring) in [("beck-fiala", &bf), ("phased", &ph), ("full", &full)] {
            let disc = set_system::discrepancy(&sys, coloring).unwrap();
            if disc < opt - 1e-9 {
                fail(
                    8,
                    format!("{name} reports {disc} below exhaustive optimum {opt} on trial {trial}"),
                );
            }
        }
    }
    pass(8, "100/100 instances: every solver output >= exhaustive optimum".into());
}

#[test]
fn c9_cli_determinism() {
    let dir = tempfile::tempdir().unwrap();
    let run_sweep = |name: &str, jobs: &str| {
        let out_path = dir.path().join(name);
        let status = std::process::Command::new(env!("CARGO_BIN_EXE_disclab"))
            .args([
                "sweep", "--m", "16,24", "--t", "2,3", "--seeds", "5", "--seed", "21", "--out",
                out_path.to_str().unwrap(), "--jobs", jobs,
            ])
            .status()
            .expect("sweep runs");
        assert!(status.success());
        // Strip the trailing wall_ms column from every data row.
        let strip = |text: &str| -> String {
            text.lines()
                .map(|l| {
                    if l.starts_with('#') || l.starts_with("n,") {
                        l.to_string()
                    } else {
                        l.rsplit_once(',').map(|(head, _)| head.to_string()).unwrap_or_default()
                    }
                })
                .collect::<Vec<_>>()
                .join("\n")
        };
        let rows = strip(&std::fs::read_to_string(&out_path).unwrap());
        let summary =
            std::fs::read_to_string(dir.path().join(name.replace(".csv", ".summary.csv")))
                .unwrap();
        (rows, summary)
    };
    let a = run_sweep("a.csv", "1");
    let b = run_sweep("b.csv", "4");
    let c = run_sweep("c.csv", "4");
    if a != b || b != c {
        fail(9, "sweep CSV bytes differ across reruns/thread counts".into());
    }

    let gen = |name: &str| {
        let path = dir.path().join(name);
        let status = std::process::Command::new(env!("CARGO_BIN_EXE_disclab"))
            .args(["generate", "--n", "50", "--m", "8", "--t", "2", "--seed", "13", "--out",
                path.to_str().unwrap()])
            .status()
            .unwrap();
        assert!(status.success());
        std::fs::read(path).unwrap()
    };
    if gen("g1.txt") != gen("g2.txt") {
        fail(9, "generate produced different bytes for the same seed".into());
    }
    pass(9, "sweep and generate byte-identical across reruns and thread counts".into());
}
