//! CSV emission. Every file starts with a versioned schema comment; the
//! `wall_ms` column is the only nondeterministic field and is excluded
//! from reproducibility comparisons.

pub const SOLVE_SCHEMA: &str = "# disclab csv solve v1";
pub const SOLVE_HEADER: &str =
    "n,m,t,seed,algorithm,c,discrepancy,fallback_used,abort_iteration,wall_ms";

pub const SWEEP_SCHEMA: &str = "# disclab csv sweep v1";
pub const SWEEP_HEADER: &str =
    "n,m,t,k,ck,seed,algorithm,c,discrepancy,fallback_used,abort_iteration,head_infeasible,wall_ms";

pub const SUMMARY_SCHEMA: &str = "# disclab csv sweep-summary v1";
pub const SUMMARY_HEADER: &str = "m,t,n,k,ck,c,algorithm,runs,mean_discrepancy,median_discrepancy,max_discrepancy,disc_over_sqrt_t,abort_rate,head_infeasible_rate";

pub fn fmt_f64(v: f64) -> String {
    format!("{v:.6}")
}

pub fn fmt_opt_usize(v: Option<usize>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

pub fn fmt_opt_f64(v: Option<f64>) -> String {
    v.map(fmt_f64).unwrap_or_default()
}

/// One solved instance, shared by `solve` and `sweep`.
#[derive(Debug, Clone)]
pub struct RunRow {
    pub n: usize,
    pub m: usize,
    pub t: usize,
    pub k: Option<usize>,
    pub ck: Option<f64>,
    pub seed: u64,
    pub algorithm: String,
    pub c: f64,
    pub discrepancy: f64,
    pub fallback_used: bool,
    pub abort_iteration: Option<usize>,
    pub head_infeasible: Option<bool>,
    pub wall_ms: u128,
}

impl RunRow {
    pub fn solve_line(&self) -> String {
        format!(
            "{},{},{},{},{},{},{},{},{},{}",
            self.n,
            self.m,
            self.t,
            self.seed,
            self.algorithm,
            fmt_f64(self.c),
            fmt_f64(self.discrepancy),
            self.fallback_used,
            fmt_opt_usize(self.abort_iteration),
            self.wall_ms
        )
    }

    pub fn sweep_line(&self) -> String {
        format!(
            "{},{},{},{},{},{},{},{},{},{},{},{},{}",
            self.n,
            self.m,
            self.t,
            fmt_opt_usize(self.k),
            fmt_opt_f64(self.ck),
            self.seed,
            self.algorithm,
            fmt_f64(self.c),
            fmt_f64(self.discrepancy),
            self.fallback_used,
            fmt_opt_usize(self.abort_iteration),
            self.head_infeasible.map(|b| b.to_string()).unwrap_or_default(),
            self.wall_ms
        )
    }
}

pub fn median(values: &mut [f64]) -> f64 {
    values.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let n = values.len();
    if n == 0 {
        return f64::NAN;
    }
    if n % 2 == 1 {
        values[n / 2]
    } else {
        0.5 * (values[n / 2 - 1] + values[n / 2])
    }
}
