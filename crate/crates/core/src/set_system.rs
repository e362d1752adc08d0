//! t-regular set systems: data model, random generation, and discrepancy
//! evaluation.
//!
//! A system has `m` sets over `n` elements with every element contained in
//! exactly `t` distinct sets. Storage is column-major: each element keeps
//! the sorted list of set indices containing it, which matches how the
//! random model samples and how the solvers consume columns. Row views are
//! materialized on demand.

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::linalg::DenseMatrix;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SetSystem {
    n: usize,
    m: usize,
    t: usize,
    /// `membership[i]` is the ascending list of the `t` sets containing
    /// element `i`.
    membership: Vec<Vec<usize>>,
}

impl SetSystem {
    /// Build a system from explicit membership lists, validating the
    /// t-regular invariants.
    pub fn new(m: usize, t: usize, membership: Vec<Vec<usize>>) -> Result<Self> {
        if t > m {
            return Err(Error::InvalidParameter(format!("t = {t} exceeds m = {m}")));
        }
        for (i, sets) in membership.iter().enumerate() {
            if sets.len() != t {
                return Err(Error::InvalidParameter(format!(
                    "element {i} lies in {} sets, expected {t}",
                    sets.len()
                )));
            }
            for w in sets.windows(2) {
                if w[0] >= w[1] {
                    return Err(Error::InvalidParameter(format!(
                        "membership of element {i} is not strictly ascending"
                    )));
                }
            }
            if let Some(&last) = sets.last() {
                if last >= m {
                    return Err(Error::InvalidParameter(format!(
                        "element {i} references set {last} >= m = {m}"
                    )));
                }
            }
        }
        Ok(SetSystem { n: membership.len(), m, t, membership })
    }

    /// Sample a random system: each element independently receives a
    /// uniform t-subset of `[0, m)`, drawn by partial Fisher-Yates.
    /// Deterministic for a fixed seed.
    pub fn generate_random(n: usize, m: usize, t: usize, seed: u64) -> Result<Self> {
        if t > m {
            return Err(Error::InvalidParameter(format!("t = {t} exceeds m = {m}")));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut pool: Vec<usize> = (0..m).collect();
        let mut membership = Vec::with_capacity(n);
        for _ in 0..n {
            for (idx, slot) in pool.iter_mut().enumerate() {
                *slot = idx;
            }
            for j in 0..t {
                let r = rng.gen_range(j..m);
                pool.swap(j, r);
            }
            let mut sets = pool[..t].to_vec();
            sets.sort_unstable();
            membership.push(sets);
        }
        Ok(SetSystem { n, m, t, membership })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn t(&self) -> usize {
        self.t
    }

    pub fn membership(&self, element: usize) -> &[usize] {
        &self.membership[element]
    }

    /// Row view: for each set, the ascending list of its elements.
    pub fn row_members(&self) -> Vec<Vec<usize>> {
        let mut rows = vec![Vec::new(); self.m];
        for (i, sets) in self.membership.iter().enumerate() {
            for &j in sets {
                rows[j].push(i);
            }
        }
        rows
    }

    pub fn row_sizes(&self) -> Vec<usize> {
        let mut sizes = vec![0usize; self.m];
        for sets in &self.membership {
            for &j in sets {
                sizes[j] += 1;
            }
        }
        sizes
    }

    /// Dense 0/1 incidence matrix (m rows, n columns).
    pub fn incidence(&self) -> DenseMatrix {
        let mut a = DenseMatrix::zeros(self.m, self.n);
        for (i, sets) in self.membership.iter().enumerate() {
            for &j in sets {
                a.set(j, i, 1.0);
            }
        }
        a
    }

    /// Subsystem on the chosen elements (same sets, same degree).
    pub fn restrict(&self, elements: &[usize]) -> Result<Self> {
        let membership = elements
            .iter()
            .map(|&i| {
                self.membership
                    .get(i)
                    .cloned()
                    .ok_or_else(|| Error::InvalidParameter(format!("element {i} out of range")))
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(SetSystem { n: membership.len(), m: self.m, t: self.t, membership })
    }

    /// Parse the canonical text format: first line `n m t`, then one line
    /// per element with its set indices, ascending, space-separated.
    pub fn parse(text: &str) -> Result<Self> {
        let mut lines = text.lines();
        let header = lines.next().ok_or_else(|| Error::Parse("empty input".into()))?;
        let mut fields = header.split_whitespace().map(|f| {
            f.parse::<usize>()
                .map_err(|_| Error::Parse(format!("bad header field {f:?}")))
        });
        let n = fields.next().ok_or_else(|| Error::Parse("missing n".into()))??;
        let m = fields.next().ok_or_else(|| Error::Parse("missing m".into()))??;
        let t = fields.next().ok_or_else(|| Error::Parse("missing t".into()))??;
        if fields.next().is_some() {
            return Err(Error::Parse("trailing fields in header".into()));
        }
        let mut membership = Vec::with_capacity(n);
        for i in 0..n {
            let line = lines
                .next()
                .ok_or_else(|| Error::Parse(format!("missing line for element {i}")))?;
            let sets = line
                .split_whitespace()
                .map(|f| {
                    f.parse::<usize>()
                        .map_err(|_| Error::Parse(format!("bad set index {f:?} on element {i}")))
                })
                .collect::<std::result::Result<Vec<_>, _>>()?;
            membership.push(sets);
        }
        if lines.any(|l| !l.trim().is_empty()) {
            return Err(Error::Parse("trailing content after last element".into()));
        }
        Self::new(m, t, membership).map_err(|e| Error::Parse(e.to_string()))
    }

    /// Render the canonical text format; `parse ∘ render` is the identity.
    pub fn render(&self) -> String {
        let mut out = format!("{} {} {}\n", self.n, self.m, self.t);
        for sets in &self.membership {
            let line: Vec<String> = sets.iter().map(|j| j.to_string()).collect();
            out.push_str(&line.join(" "));
            out.push('\n');
        }
        out
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ColoringKind {
    Fractional,
    Integral,
}

/// A point of the coloring cube: entries in `[-1, 1]`, all exactly `±1`
/// for integral colorings.
#[derive(Debug, Clone, PartialEq)]
pub struct Coloring {
    values: Vec<f64>,
    kind: ColoringKind,
}

impl Coloring {
    pub fn fractional(values: Vec<f64>) -> Result<Self> {
        if let Some(v) = values.iter().find(|v| !v.is_finite() || v.abs() > 1.0 + 1e-12) {
            return Err(Error::InvalidParameter(format!("entry {v} outside [-1, 1]")));
        }
        let values = values.into_iter().map(|v| v.clamp(-1.0, 1.0)).collect();
        Ok(Coloring { values, kind: ColoringKind::Fractional })
    }

    /// Entries must be `±1` up to 1e-12 and are snapped exactly.
    pub fn integral(values: Vec<f64>) -> Result<Self> {
        let mut snapped = Vec::with_capacity(values.len());
        for v in values {
            if (v.abs() - 1.0).abs() > 1e-12 {
                return Err(Error::InvalidParameter(format!("entry {v} is not ±1")));
            }
            snapped.push(if v > 0.0 { 1.0 } else { -1.0 });
        }
        Ok(Coloring { values: snapped, kind: ColoringKind::Integral })
    }

    pub fn from_signs(signs: &[i8]) -> Self {
        let values = signs.iter().map(|&s| if s >= 0 { 1.0 } else { -1.0 }).collect();
        Coloring { values, kind: ColoringKind::Integral }
    }

    pub fn zeros(n: usize) -> Self {
        Coloring { values: vec![0.0; n], kind: ColoringKind::Fractional }
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn kind(&self) -> ColoringKind {
        self.kind
    }

    pub fn is_integral(&self) -> bool {
        self.kind == ColoringKind::Integral
    }
}

/// Signed per-set sums `A·x`. Absolute values are taken at reporting
/// boundaries only; the reduction pipeline needs the signs.
#[derive(Debug, Clone, PartialEq)]
pub struct DiscrepancyVector {
    values: Vec<f64>,
}

impl DiscrepancyVector {
    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |acc, v| acc.max(v.abs()))
    }
}

/// Signed row sums of `x` over the system.
pub fn discrepancy_vector(sys: &SetSystem, x: &Coloring) -> Result<DiscrepancyVector> {
    raw_discrepancy_vector(sys, x.values()).map(|values| DiscrepancyVector { values })
}

/// `‖A·x‖_∞`.
pub fn discrepancy(sys: &SetSystem, x: &Coloring) -> Result<f64> {
    Ok(discrepancy_vector(sys, x)?.max_abs())
}

pub(crate) fn raw_discrepancy_vector(sys: &SetSystem, x: &[f64]) -> Result<Vec<f64>> {
    if x.len() != sys.n() {
        return Err(Error::InvalidParameter(format!(
            "coloring length {} does not match n = {}",
            x.len(),
            sys.n()
        )));
    }
    let mut out = vec![0.0; sys.m()];
    for (i, &xi) in x.iter().enumerate() {
        if xi != 0.0 {
            for &j in sys.membership(i) {
                out[j] += xi;
            }
        }
    }
    Ok(out)
}

/// Exhaustively minimize `max_j |A·χ|_j` over all `2^n` sign vectors.
///
/// Guarded at `n <= 24`; the search is deliberately naive and returns the
/// first optimum in mask order (bit `i` set means `χ_i = +1`).
pub fn brute_force_optimum(sys: &SetSystem) -> Result<(Coloring, f64)> {
    if sys.n() > 24 {
        return Err(Error::Capacity(format!(
            "brute force limited to n <= 24, got n = {}",
            sys.n()
        )));
    }
    let n = sys.n();
    let m = sys.m();
    let mut best_mask = 0u32;
    let mut best = f64::INFINITY;
    let mut rows = vec![0.0f64; m];
    for mask in 0..(1u32 << n) {
        for v in rows.iter_mut() {
            *v = 0.0;
        }
        for i in 0..n {
            let xi = if mask >> i & 1 == 1 { 1.0 } else { -1.0 };
            for &j in sys.membership(i) {
                rows[j] += xi;
            }
        }
        let disc = rows.iter().fold(0.0f64, |acc, v| acc.max(v.abs()));
        if disc < best {
            best = disc;
            best_mask = mask;
            if best == 0.0 {
                break;
            }
        }
    }
    if m == 0 {
        best = 0.0;
    }
    let signs: Vec<i8> = (0..n).map(|i| if best_mask >> i & 1 == 1 { 1 } else { -1 }).collect();
    Ok((Coloring::from_signs(&signs), best))
}
