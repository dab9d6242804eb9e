//! Node registration between graphs and the quotient distance `d_g`.
//!
//! Matching solves the Lawler quadratic assignment problem
//! `max_P vec(P)ᵀ K vec(P)` over node permutations, exactly by enumeration for
//! small graphs or approximately by spectral matching or graduated assignment.
//! Whatever the solver, the reported distance is `d_a` recomputed under the
//! returned permutation, so it is always an upper bound on `d_g`.

use std::collections::HashMap;
use std::fmt;
use std::str::FromStr;

use nalgebra::DMatrix;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::curve::{edge_inner_product_with, AlignOptions};
use crate::error::{Error, Result};
use crate::graph::{edge_distance, pad, permute, pre_shape_distance, GraphShape, Permutation};

/// Largest padded size the exact solver will enumerate.
pub const EXACT_LIMIT: usize = 8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Solver {
    Exact,
    Spectral,
    Graduated,
}

impl fmt::Display for Solver {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Solver::Exact => "exact",
            Solver::Spectral => "spectral",
            Solver::Graduated => "graduated",
        })
    }
}

impl FromStr for Solver {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "exact" => Ok(Solver::Exact),
            "spectral" => Ok(Solver::Spectral),
            "graduated" => Ok(Solver::Graduated),
            other => Err(Error::UnknownSolver(other.to_string())),
        }
    }
}

/// Temperature schedule for graduated assignment.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct Schedule {
    pub beta_start: f64,
    pub beta_end: f64,
    pub beta_rate: f64,
    pub sinkhorn_sweeps: usize,
}

impl Default for Schedule {
    fn default() -> Self {
        Schedule {
            beta_start: 0.5,
            beta_end: 200.0,
            beta_rate: 1.075,
            sinkhorn_sweeps: 30,
        }
    }
}

impl Schedule {
    pub fn validate(&self) -> Result<()> {
        let ok = self.beta_start > 0.0
            && self.beta_end >= self.beta_start
            && self.beta_end.is_finite()
            && self.beta_rate > 1.0
            && self.sinkhorn_sweeps >= 1;
        if ok {
            Ok(())
        } else {
            Err(Error::Validation(format!("invalid annealing schedule {self:?}")))
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MatchConfig {
    /// Solver used when the padded size exceeds [`EXACT_LIMIT`].
    pub solver: Solver,
    pub schedule: Schedule,
    /// Edge alignment used for affinities. Distances always use the full
    /// alignment.
    pub affinity_align: AlignOptions,
    pub power_iterations: usize,
}

impl Default for MatchConfig {
    fn default() -> Self {
        MatchConfig {
            solver: Solver::Graduated,
            schedule: Schedule::default(),
            affinity_align: AlignOptions::coarse(),
            power_iterations: 1000,
        }
    }
}

/// Affinity matrix `K` of size `n² × n²`, with `K[a·n+i][b·n+j]` the affinity
/// between edge `(a, b)` of the first graph and edge `(i, j)` of the second.
///
/// Only pairs of present edges can be nonzero, so `K` is stored as a list of
/// edge-pair values; each value occupies four symmetric entries.
#[derive(Debug, Clone)]
pub struct AffinityMatrix {
    n: usize,
    pairs: Vec<((usize, usize), (usize, usize), f64)>,
    lookup: HashMap<((usize, usize), (usize, usize)), f64>,
}

fn ordered(a: usize, b: usize) -> (usize, usize) {
    if a < b {
        (a, b)
    } else {
        (b, a)
    }
}

impl AffinityMatrix {
    /// Builds `K` from `((a, b), (i, j), value)` triples over unordered node
    /// pairs. Negative values are clamped to zero.
    pub fn from_edge_pairs(n: usize, pairs: Vec<((usize, usize), (usize, usize), f64)>) -> Result<Self> {
        let mut lookup = HashMap::with_capacity(pairs.len());
        let mut kept = Vec::with_capacity(pairs.len());
        for ((a, b), (i, j), v) in pairs {
            if a == b || i == j || a.max(b) >= n || i.max(j) >= n {
                return Err(Error::invalid(format!(
                    "edge pair ({a},{b})/({i},{j}) invalid for n = {n}"
                )));
            }
            if !v.is_finite() {
                return Err(Error::Numeric("non-finite affinity".into()));
            }
            let key = (ordered(a, b), ordered(i, j));
            let v = v.max(0.0);
            if lookup.insert(key, v).is_some() {
                return Err(Error::invalid("edge pair listed twice"));
            }
            kept.push((key.0, key.1, v));
        }
        Ok(AffinityMatrix { n, pairs: kept, lookup })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Stored edge-pair values.
    pub fn edge_pairs(&self) -> &[((usize, usize), (usize, usize), f64)] {
        &self.pairs
    }

    /// Affinity between edge `(a, b)` and edge `(i, j)`.
    pub fn edge_affinity(&self, a: usize, b: usize, i: usize, j: usize) -> f64 {
        self.lookup.get(&(ordered(a, b), ordered(i, j))).copied().unwrap_or(0.0)
    }

    /// Entry `K[row][col]`.
    pub fn get(&self, row: usize, col: usize) -> f64 {
        let (a, i) = (row / self.n, row % self.n);
        let (b, j) = (col / self.n, col % self.n);
        if a == b || i == j {
            return 0.0;
        }
        self.edge_affinity(a, b, i, j)
    }

    pub fn max_entry(&self) -> f64 {
        self.pairs.iter().map(|p| p.2).fold(0.0, f64::max)
    }

    pub fn to_dense(&self) -> DMatrix<f64> {
        let m = self.n * self.n;
        DMatrix::from_fn(m, m, |r, c| self.get(r, c))
    }

    /// `y = K x`.
    pub fn mul_vec(&self, x: &[f64]) -> Vec<f64> {
        let n = self.n;
        let mut y = vec![0.0; n * n];
        for &((a, b), (i, j), v) in &self.pairs {
            y[a * n + i] += v * x[b * n + j];
            y[b * n + j] += v * x[a * n + i];
            y[a * n + j] += v * x[b * n + i];
            y[b * n + i] += v * x[a * n + j];
        }
        y
    }

    /// `vec(P)ᵀ K vec(P)` where node `i` of the second graph maps to node
    /// `p(i)` of the first.
    pub fn objective(&self, p: &Permutation) -> f64 {
        let inv = p.inverse();
        let mut terms: Vec<f64> = self
            .pairs
            .iter()
            .filter(|((a, b), (i, j), _)| ordered(inv.apply(*a), inv.apply(*b)) == (*i, *j))
            .map(|&(_, _, v)| 2.0 * v)
            .collect();
        terms.sort_by(f64::total_cmp);
        terms.into_iter().sum()
    }
}

fn check_same_size(a1: &GraphShape, a2: &GraphShape) -> Result<()> {
    if a1.node_count() != a2.node_count() {
        return Err(Error::SizeMismatch(format!(
            "graphs have {} and {} nodes; pad first",
            a1.node_count(),
            a2.node_count()
        )));
    }
    if a1.dim() != a2.dim() || a1.samples() != a2.samples() {
        return Err(Error::SizeMismatch("graphs differ in dimension or edge grid".into()));
    }
    Ok(())
}

/// Affinity matrix with `k = max(0, sup ⟨q¹_ab, O (q²_ij ∘ γ) sqrt(γ')⟩)`.
pub fn build_affinity(a1: &GraphShape, a2: &GraphShape, opts: &AlignOptions) -> Result<AffinityMatrix> {
    check_same_size(a1, a2)?;
    let e1: Vec<(usize, usize)> = a1.slot_pairs().filter(|&(i, j)| a1.has_edge(i, j)).collect();
    let e2: Vec<(usize, usize)> = a2.slot_pairs().filter(|&(i, j)| a2.has_edge(i, j)).collect();
    let jobs: Vec<((usize, usize), (usize, usize))> =
        e1.iter().flat_map(|&x| e2.iter().map(move |&y| (x, y))).collect();
    let pairs = jobs
        .into_par_iter()
        .map(|((a, b), (i, j))| {
            let q1 = a1.edge(a, b).map(|e| e.srvf()).expect("edge listed");
            let q2 = a2.edge(i, j).map(|e| e.srvf()).expect("edge listed");
            edge_inner_product_with(q1, q2, opts).map(|v| ((a, b), (i, j), v))
        })
        .collect::<Result<Vec<_>>>()?;
    AffinityMatrix::from_edge_pairs(a1.node_count(), pairs)
}

#[derive(Debug, Clone, PartialEq)]
pub struct MatchResult {
    /// Applied to the second graph: node `i` of it corresponds to node
    /// `permutation(i)` of the first.
    pub permutation: Permutation,
    /// `d_a(A1, P * A2)`.
    pub quotient_distance: f64,
    /// `vec(P)ᵀ K vec(P)`.
    pub objective: f64,
    pub solver: Solver,
}

fn objective_of(a1: &GraphShape, a2: &GraphShape, p: &Permutation, opts: &AlignOptions) -> Result<f64> {
    let moved = permute(p, a2)?;
    let mut terms = Vec::new();
    for (i, j) in a1.slot_pairs() {
        if let (Some(x), Some(y)) = (a1.edge(i, j), moved.edge(i, j)) {
            terms.push(2.0 * edge_inner_product_with(x.srvf(), y.srvf(), opts)?.max(0.0));
        }
    }
    terms.sort_by(f64::total_cmp);
    Ok(terms.into_iter().sum())
}

fn finish(a1: &GraphShape, a2: &GraphShape, p: Permutation, objective: f64, solver: Solver) -> Result<MatchResult> {
    let quotient_distance = pre_shape_distance(a1, &permute(&p, a2)?)?;
    Ok(MatchResult {
        permutation: p,
        quotient_distance,
        objective,
        solver,
    })
}

// Steps `mapping` to its lexicographic successor; false after the last one.
fn next_permutation(mapping: &mut [usize]) -> bool {
    let n = mapping.len();
    if n < 2 {
        return false;
    }
    let mut i = n - 1;
    while i > 0 && mapping[i - 1] >= mapping[i] {
        i -= 1;
    }
    if i == 0 {
        return false;
    }
    let mut j = n - 1;
    while mapping[j] <= mapping[i - 1] {
        j -= 1;
    }
    mapping.swap(i - 1, j);
    mapping[i..].reverse();
    true
}

/// Global minimizer of `d_a(A1, P * A2)` over all permutations, by
/// enumeration. Ties go to the lexicographically smallest mapping.
pub fn match_exact(a1: &GraphShape, a2: &GraphShape, config: &MatchConfig) -> Result<MatchResult> {
    check_same_size(a1, a2)?;
    let n = a1.node_count();
    if n > EXACT_LIMIT {
        return Err(Error::TooLarge { n, limit: EXACT_LIMIT });
    }
    let slots = a1.slot_pairs().count();
    let (samples, dim) = (a1.samples(), a1.dim());
    let cells: Vec<(usize, usize)> = (0..slots).flat_map(|s| (0..slots).map(move |t| (s, t))).collect();
    let table = cells
        .into_par_iter()
        .map(|(s, t)| edge_distance(a1.slot_srvf(s), a2.slot_srvf(t), samples, dim).map(|d| 2.0 * d * d))
        .collect::<Result<Vec<f64>>>()?;
    let index = |i: usize, j: usize| a1.slot_index(i, j);
    let pairs: Vec<(usize, usize)> = a1.slot_pairs().collect();

    let mut mapping: Vec<usize> = (0..n).collect();
    let mut inverse = vec![0; n];
    let mut best: Option<(Vec<usize>, f64)> = None;
    loop {
        for (i, &m) in mapping.iter().enumerate() {
            inverse[m] = i;
        }
        let total: f64 = pairs
            .iter()
            .enumerate()
            .map(|(s, &(i, j))| table[s * slots + index(inverse[i], inverse[j])])
            .sum();
        if best.as_ref().is_none_or(|(_, b)| total < b - 1e-12) {
            best = Some((mapping.clone(), total));
        }
        if !next_permutation(&mut mapping) {
            break;
        }
    }
    let (mapping, _) = best.expect("at least one permutation");
    let p = Permutation::new(mapping)?;
    let objective = objective_of(a1, a2, &p, &config.affinity_align)?;
    finish(a1, a2, p, objective, Solver::Exact)
}

/// Approximate matching with the spectral or graduated-assignment solver.
pub fn match_approx(a1: &GraphShape, a2: &GraphShape, solver: Solver, config: &MatchConfig) -> Result<MatchResult> {
    check_same_size(a1, a2)?;
    let k = build_affinity(a1, a2, &config.affinity_align)?;
    let p = match solver {
        Solver::Spectral => spectral(&k, config.power_iterations)?,
        Solver::Graduated => graduated(&k, &config.schedule)?,
        Solver::Exact => return match_exact(a1, a2, config),
    };
    let objective = k.objective(&p);
    finish(a1, a2, p, objective, solver)
}

/// Best permutation for graphs of possibly different sizes. Both are padded to
/// `n1 + n2` nodes when the sizes differ; the returned permutation acts on the
/// padded second graph.
pub fn register(
    a1: &GraphShape,
    a2: &GraphShape,
    config: &MatchConfig,
) -> Result<(GraphShape, GraphShape, MatchResult)> {
    let (n1, n2) = (a1.node_count(), a2.node_count());
    let (p1, p2) = if n1 == n2 {
        (a1.clone(), a2.clone())
    } else {
        (pad(a1, n2), pad(a2, n1))
    };
    let result = if p1.node_count() <= EXACT_LIMIT {
        match_exact(&p1, &p2, config)?
    } else {
        match_approx(&p1, &p2, config.solver, config)?
    };
    Ok((p1, p2, result))
}

/// Quotient distance `d_g`: exact for padded size up to [`EXACT_LIMIT`],
/// otherwise the configured approximate solver's upper bound.
pub fn quotient_distance(a1: &GraphShape, a2: &GraphShape, config: &MatchConfig) -> Result<f64> {
    register(a1, a2, config).map(|(_, _, r)| r.quotient_distance)
}

fn spectral(k: &AffinityMatrix, iterations: usize) -> Result<Permutation> {
    let n = k.n();
    let m = n * n;
    if m == 0 {
        return Ok(Permutation::identity(0));
    }
    let mut v = vec![1.0 / (m as f64).sqrt(); m];
    for _ in 0..iterations {
        let mut w = k.mul_vec(&v);
        let norm = w.iter().map(|x| x * x).sum::<f64>().sqrt();
        if norm == 0.0 {
            break;
        }
        w.iter_mut().for_each(|x| *x /= norm);
        let change = w.iter().zip(&v).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        v = w;
        if change < 1e-12 {
            break;
        }
    }
    if v.iter().any(|x| !x.is_finite()) {
        return Err(Error::Numeric("power iteration diverged".into()));
    }
    assignment_from_scores(n, &v)
}

fn graduated(k: &AffinityMatrix, schedule: &Schedule) -> Result<Permutation> {
    schedule.validate()?;
    let n = k.n();
    if n == 0 {
        return Ok(Permutation::identity(0));
    }
    let scale = k.max_entry();
    let mut x = vec![1.0 / n as f64; n * n];
    if scale == 0.0 {
        return assignment_from_scores(n, &x);
    }
    let mut beta = schedule.beta_start;
    while beta <= schedule.beta_end {
        let q: Vec<f64> = k.mul_vec(&x).into_iter().map(|v| v / scale).collect();
        let top = q.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        x = q.iter().map(|v| (beta * (v - top)).exp()).collect();
        sinkhorn(&mut x, n, schedule.sinkhorn_sweeps);
        beta *= schedule.beta_rate;
    }
    if x.iter().any(|v| !v.is_finite()) {
        return Err(Error::Numeric("graduated assignment diverged".into()));
    }
    assignment_from_scores(n, &x)
}

fn sinkhorn(x: &mut [f64], n: usize, sweeps: usize) {
    for _ in 0..sweeps {
        for row in x.chunks_exact_mut(n) {
            let s: f64 = row.iter().sum();
            if s > 0.0 {
                row.iter_mut().for_each(|v| *v /= s);
            }
        }
        for c in 0..n {
            let s: f64 = (0..n).map(|r| x[r * n + c]).sum();
            if s > 0.0 {
                (0..n).for_each(|r| x[r * n + c] /= s);
            }
        }
    }
}

// `scores[a·n + i]` rates node `i` of the second graph against node `a` of the
// first.
fn assignment_from_scores(n: usize, scores: &[f64]) -> Result<Permutation> {
    let top = scores.iter().copied().fold(0.0, f64::max);
    let cost = DMatrix::from_fn(n, n, |a, i| top - scores[a * n + i]);
    let rows = hungarian(&cost);
    let mut mapping = vec![0; n];
    for (a, &i) in rows.iter().enumerate() {
        mapping[i] = a;
    }
    Permutation::new(mapping)
}

/// Minimum-cost perfect assignment of a square cost matrix; entry `r` of the
/// result is the column assigned to row `r`. Rows are inserted in index
/// order, which fixes the choice among tied optima.
pub fn hungarian(cost: &DMatrix<f64>) -> Vec<usize> {
    let n = cost.nrows();
    assert_eq!(n, cost.ncols(), "assignment needs a square matrix");
    // Potentials and matching over 1-based columns; column 0 is a sentinel.
    let mut u = vec![0.0; n + 1];
    let mut v = vec![0.0; n + 1];
    let mut owner = vec![0usize; n + 1];
    let mut way = vec![0usize; n + 1];
    for row in 1..=n {
        owner[0] = row;
        let mut col0 = 0;
        let mut minv = vec![f64::INFINITY; n + 1];
        let mut used = vec![false; n + 1];
        loop {
            used[col0] = true;
            let r0 = owner[col0];
            let mut delta = f64::INFINITY;
            let mut col1 = 0;
            for col in 1..=n {
                if used[col] {
                    continue;
                }
                let cur = cost[(r0 - 1, col - 1)] - u[r0] - v[col];
                if cur < minv[col] {
                    minv[col] = cur;
                    way[col] = col0;
                }
                if minv[col] < delta {
                    delta = minv[col];
                    col1 = col;
                }
            }
            for col in 0..=n {
                if used[col] {
                    u[owner[col]] += delta;
                    v[col] -= delta;
                } else {
                    minv[col] -= delta;
                }
            }
            col0 = col1;
            if owner[col0] == 0 {
                break;
            }
        }
        loop {
            let col1 = way[col0];
            owner[col0] = owner[col1];
            col0 = col1;
            if col0 == 0 {
                break;
            }
        }
    }
    let mut assignment = vec![0; n];
    for col in 1..=n {
        if owner[col] > 0 {
            assignment[owner[col] - 1] = col - 1;
        }
    }
    assignment
}

/// Exhaustive maximizer of `vec(P)ᵀ K vec(P)`; ties go to the
/// lexicographically smallest mapping.
pub fn lawler_exact(k: &AffinityMatrix) -> Result<(Permutation, f64)> {
    let n = k.n();
    if n > EXACT_LIMIT {
        return Err(Error::TooLarge { n, limit: EXACT_LIMIT });
    }
    let mut mapping: Vec<usize> = (0..n).collect();
    let mut best: Option<(Vec<usize>, f64)> = None;
    loop {
        let p = Permutation::new(mapping.clone())?;
        let value = k.objective(&p);
        if best.as_ref().is_none_or(|(_, b)| value > b + 1e-12) {
            best = Some((mapping.clone(), value));
        }
        if !next_permutation(&mut mapping) {
            break;
        }
    }
    let (mapping, value) = best.expect("at least one permutation");
    Ok((Permutation::new(mapping)?, value))
}

/// Brute-force maximizer of the Koopmans–Beckmann objective
/// `Tr(W1 P W2 Pᵀ)` for symmetric scalar weight matrices.
pub fn scalar_qap_oracle(w1: &DMatrix<f64>, w2: &DMatrix<f64>) -> Result<(Permutation, f64)> {
    let n = w1.nrows();
    if !w1.is_square() || w1.shape() != w2.shape() {
        return Err(Error::SizeMismatch(
            "weight matrices must be square and equal-sized".into(),
        ));
    }
    if n > EXACT_LIMIT {
        return Err(Error::TooLarge { n, limit: EXACT_LIMIT });
    }
    let mut mapping: Vec<usize> = (0..n).collect();
    let mut best: Option<(Vec<usize>, f64)> = None;
    loop {
        let mut pm = DMatrix::<f64>::zeros(n, n);
        for (i, &a) in mapping.iter().enumerate() {
            pm[(a, i)] = 1.0;
        }
        let value = (w1 * &pm * w2 * pm.transpose()).trace();
        if best.as_ref().is_none_or(|(_, b)| value > b + 1e-12) {
            best = Some((mapping.clone(), value));
        }
        if !next_permutation(&mut mapping) {
            break;
        }
    }
    let (mapping, value) = best.expect("at least one permutation");
    Ok((Permutation::new(mapping)?, value))
}
