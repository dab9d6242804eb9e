//! Dynamic-programming search for the reparameterization `γ` maximizing
//! `⟨q1, (q2 ∘ γ) sqrt(γ')⟩` over piecewise-linear lattice paths.

use super::Srvf;
use crate::error::{Error, Result};

/// Lattice steps `(Δi, Δj)` with `1 ≤ Δi, Δj ≤ 3`, gcd-reduced.
const MOVES: [(usize, usize); 7] = [(1, 1), (1, 2), (2, 1), (1, 3), (3, 1), (2, 3), (3, 2)];

pub fn lattice_moves() -> &'static [(usize, usize)] {
    &MOVES
}

/// A non-decreasing map of `[0, 1]` onto itself, sampled on the uniform grid.
#[derive(Debug, Clone, PartialEq)]
pub struct Reparam {
    gamma: Vec<f64>,
}

impl Reparam {
    pub fn identity(samples: usize) -> Self {
        let h = 1.0 / (samples - 1) as f64;
        let mut gamma: Vec<f64> = (0..samples).map(|k| k as f64 * h).collect();
        gamma[samples - 1] = 1.0;
        Reparam { gamma }
    }

    /// Validates boundary values and monotonicity.
    pub fn new(gamma: Vec<f64>) -> Result<Self> {
        if gamma.len() < 2 {
            return Err(Error::invalid("reparameterization needs at least 2 samples"));
        }
        if gamma[0] != 0.0 || gamma[gamma.len() - 1] != 1.0 {
            return Err(Error::invalid("reparameterization must fix 0 and 1"));
        }
        if gamma.windows(2).any(|w| !(w[1] >= w[0])) {
            return Err(Error::invalid("reparameterization must be non-decreasing"));
        }
        Ok(Reparam { gamma })
    }

    /// Piecewise-linear map through the lattice vertices of `path`.
    pub fn from_path(path: &[(usize, usize)], samples: usize) -> Self {
        let last = (samples - 1) as f64;
        let mut gamma = vec![0.0; samples];
        for w in path.windows(2) {
            let ((k, l), (i, j)) = (w[0], w[1]);
            let slope = (j - l) as f64 / (i - k) as f64;
            for (p, g) in gamma.iter_mut().enumerate().take(i + 1).skip(k) {
                *g = (l as f64 + slope * (p - k) as f64) / last;
            }
        }
        gamma[samples - 1] = 1.0;
        Reparam { gamma }
    }

    pub fn values(&self) -> &[f64] {
        &self.gamma
    }

    pub fn len(&self) -> usize {
        self.gamma.len()
    }

    pub fn is_empty(&self) -> bool {
        self.gamma.is_empty()
    }

    /// Repeated `[1, 2, 1] / 4` averaging of the interior values. Endpoints
    /// stay fixed and monotonicity is preserved.
    pub fn smoothed(&self, passes: usize) -> Reparam {
        let mut gamma = self.gamma.clone();
        let mut prev = gamma.clone();
        for _ in 0..passes {
            prev.copy_from_slice(&gamma);
            for k in 1..gamma.len() - 1 {
                gamma[k] = 0.25 * (prev[k - 1] + 2.0 * prev[k] + prev[k + 1]);
            }
        }
        Reparam { gamma }
    }

    /// `self ∘ inner`, with `self` interpolated linearly between samples.
    pub fn compose(&self, inner: &Reparam) -> Reparam {
        let last = (self.gamma.len() - 1) as f64;
        let mut gamma: Vec<f64> = inner
            .gamma
            .iter()
            .map(|&t| {
                let s = t * last;
                let lo = (s.floor() as usize).min(self.gamma.len() - 2);
                let f = s - lo as f64;
                self.gamma[lo] + f * (self.gamma[lo + 1] - self.gamma[lo])
            })
            .collect();
        let n = gamma.len();
        gamma[0] = 0.0;
        gamma[n - 1] = 1.0;
        for k in 1..n {
            gamma[k] = gamma[k].max(gamma[k - 1]);
        }
        Reparam { gamma }
    }

    /// Largest deviation from the identity map.
    pub fn max_deviation_from_identity(&self) -> f64 {
        let last = (self.gamma.len() - 1) as f64;
        self.gamma
            .iter()
            .enumerate()
            .map(|(k, g)| (g - k as f64 / last).abs())
            .fold(0.0, f64::max)
    }
}

/// Score of matching `q1` on grid cells `k..=i` against `q2` on `l..=j` with a
/// linear warp, integrated by the trapezoidal rule on `q1`'s grid.
pub fn segment_score(q1: &Srvf, q2: &Srvf, from: (usize, usize), to: (usize, usize)) -> f64 {
    let gram = |p: usize, m: usize| super::dot(q1.row(p), q2.row(m));
    let h = 1.0 / (q1.len() - 1) as f64;
    segment(&gram, h, &stencil(to.0 - from.0, to.1 - from.1), from.0, from.1)
}

// Sample offsets visited by one lattice move: `(Δp, Δm, frac, weight)`.
struct Stencil {
    taps: Vec<(usize, usize, f64, f64)>,
    root: f64,
}

fn stencil(di: usize, dj: usize) -> Stencil {
    let slope = dj as f64 / di as f64;
    let taps = (0..=di)
        .map(|p| {
            let index = slope * p as f64;
            let lo = (index.floor() as usize).min(dj);
            let weight = if p == 0 || p == di { 0.5 } else { 1.0 };
            (p, lo, index - lo as f64, weight)
        })
        .collect();
    Stencil {
        taps,
        root: slope.sqrt(),
    }
}

// `gram(p, m) = ⟨q1[p], q2[m]⟩`; the warped row of q2 is interpolated
// linearly, so its inner product with q1[p] interpolates the Gram entries.
#[inline]
fn segment<G: Fn(usize, usize) -> f64>(gram: &G, h: f64, st: &Stencil, k: usize, l: usize) -> f64 {
    let mut total = 0.0;
    for &(p, m, frac, weight) in &st.taps {
        let g = gram(k + p, l + m);
        let inner = if frac == 0.0 {
            g
        } else {
            g + frac * (gram(k + p, l + m + 1) - g)
        };
        total += weight * (inner * st.root);
    }
    h * total
}

fn check_pair(q1: &Srvf, q2: &Srvf) -> Result<()> {
    if q1.dim() != q2.dim() {
        return Err(Error::DimensionMismatch {
            expected: q1.dim(),
            found: q2.dim(),
        });
    }
    if q1.len() != q2.len() {
        return Err(Error::SizeMismatch(format!(
            "srvf grids differ: {} vs {} samples",
            q1.len(),
            q2.len()
        )));
    }
    if q1.dim() > 8 {
        return Err(Error::invalid("ambient dimension above 8 is not supported"));
    }
    Ok(())
}

/// Optimal lattice path and its score.
///
/// The score accumulates segment scores in path order from `(0, 0)`, so an
/// independent enumeration summing in the same order reproduces it exactly.
pub fn optimal_reparam_with_score(q1: &Srvf, q2: &Srvf) -> Result<(Reparam, f64, Vec<(usize, usize)>)> {
    check_pair(q1, q2)?;
    let n = q1.len();
    let mut table = vec![0.0; n * n];
    for p in 0..n {
        for m in 0..n {
            table[p * n + m] = super::dot(q1.row(p), q2.row(m));
        }
    }
    let gram = |p: usize, m: usize| table[p * n + m];
    let h = 1.0 / (n - 1) as f64;
    let stencils: Vec<Stencil> = MOVES.iter().map(|&(di, dj)| stencil(di, dj)).collect();
    let mut score = vec![f64::NEG_INFINITY; n * n];
    let mut parent = vec![usize::MAX; n * n];
    score[0] = 0.0;
    for i in 1..n {
        for j in 1..n {
            let mut best = f64::NEG_INFINITY;
            let mut from = usize::MAX;
            for (&(di, dj), st) in MOVES.iter().zip(&stencils) {
                if di > i || dj > j {
                    continue;
                }
                let (k, l) = (i - di, j - dj);
                let prev = score[k * n + l];
                if prev == f64::NEG_INFINITY {
                    continue;
                }
                let candidate = prev + segment(&gram, h, st, k, l);
                if candidate > best {
                    best = candidate;
                    from = k * n + l;
                }
            }
            score[i * n + j] = best;
            parent[i * n + j] = from;
        }
    }
    let end = n * n - 1;
    let mut path = vec![(n - 1, n - 1)];
    let mut cell = end;
    while cell != 0 {
        cell = parent[cell];
        if cell == usize::MAX {
            return Err(Error::Numeric("no lattice path reaches the grid corner".into()));
        }
        path.push((cell / n, cell % n));
    }
    path.reverse();
    Ok((Reparam::from_path(&path, n), score[end], path))
}

/// Reparameterization of `q2` best aligned to `q1`.
pub fn optimal_reparam(q1: &Srvf, q2: &Srvf) -> Result<Reparam> {
    optimal_reparam_with_score(q1, q2).map(|(gamma, _, _)| gamma)
}

/// Group action `(q ∘ γ) sqrt(γ')`, with `γ'` from finite differences.
pub fn apply_reparam(q: &Srvf, gamma: &Reparam) -> Result<Srvf> {
    let n = q.len();
    if gamma.len() != n {
        return Err(Error::SizeMismatch(format!(
            "reparameterization has {} samples, srvf has {n}",
            gamma.len()
        )));
    }
    let dim = q.dim();
    let last = (n - 1) as f64;
    let g = &gamma.gamma;
    let mut values = vec![0.0; n * dim];
    for k in 0..n {
        let slope = match k {
            0 => (g[1] - g[0]) * last,
            _ if k == n - 1 => (g[k] - g[k - 1]) * last,
            _ => 0.5 * (g[k + 1] - g[k - 1]) * last,
        };
        let root = slope.max(0.0).sqrt();
        let out = &mut values[k * dim..(k + 1) * dim];
        q.interpolate_into(g[k] * last, out);
        out.iter_mut().for_each(|v| *v *= root);
    }
    Ok(Srvf::from_raw(values, dim))
}

/// Gradient refinement of `gamma` in the direction that lowers
/// `‖q1 − (q2 ∘ γ) sqrt(γ')‖²`.
///
/// Each step composes `γ` with a small diffeomorphism `t + εv(t)`, where `v` is
/// the projection of the gradient onto a low-order sine basis. A step is kept
/// only if it lowers the energy, so the result is never worse than the input.
pub fn refine_reparam(q1: &Srvf, q2: &Srvf, gamma: &Reparam, iterations: usize) -> Result<Reparam> {
    check_pair(q1, q2)?;
    let n = q1.len();
    if gamma.len() != n {
        return Err(Error::SizeMismatch(format!(
            "reparameterization has {} samples, srvf has {n}",
            gamma.len()
        )));
    }
    let dim = q1.dim();
    let last = (n - 1) as f64;
    let weights = super::quadrature_weights(n);
    let basis = (n / 4).clamp(1, 12);
    let grid: Vec<f64> = (0..n).map(|p| p as f64 / last).collect();
    // Basis v_k(t) = sin(kπt) / kπ and its derivative cos(kπt), tabulated.
    let mut table = vec![(0.0, 0.0); n * basis];
    for (p, &t) in grid.iter().enumerate() {
        for k in 0..basis {
            let freq = (k + 1) as f64 * std::f64::consts::PI;
            table[p * basis + k] = ((freq * t).sin() / freq, (freq * t).cos());
        }
    }

    let mut current = gamma.clone();
    let mut warped = apply_reparam(q2, &current)?;
    let mut energy = q1.l2_distance(&warped).powi(2);
    let mut step = 1.0;
    for _ in 0..iterations {
        let mut coef = vec![0.0; basis];
        for p in 0..n {
            let (a, b) = match p {
                0 => (0, 1),
                _ if p == n - 1 => (n - 2, n - 1),
                _ => (p - 1, p + 1),
            };
            let span = (b - a) as f64 / last;
            let (qa, qb, qp, r1) = (warped.row(a), warped.row(b), warped.row(p), q1.row(p));
            for (k, c) in coef.iter_mut().enumerate() {
                let (v, dv) = table[p * basis + k];
                let mut acc = 0.0;
                for d in 0..dim {
                    let dq = (qb[d] - qa[d]) / span;
                    acc += (r1[d] - qp[d]) * (dq * v + 0.5 * qp[d] * dv);
                }
                *c += weights[p] * acc;
            }
        }
        let field: Vec<(f64, f64)> = (0..n)
            .map(|p| {
                table[p * basis..(p + 1) * basis]
                    .iter()
                    .zip(&coef)
                    .fold((0.0, 0.0), |(v, dv), (b, c)| (v + c * b.0, dv + c * b.1))
            })
            .collect();
        let steepest = field.iter().map(|f| f.1.abs()).fold(0.0, f64::max);
        if steepest <= f64::EPSILON {
            break;
        }
        let cap = 0.5 / steepest;
        let mut accepted = false;
        let mut eps = (step * cap).min(cap);
        for _ in 0..12 {
            let mut values: Vec<f64> = grid
                .iter()
                .zip(&field)
                .map(|(&t, f)| {
                    let s = (t + eps * f.0).clamp(0.0, 1.0) * last;
                    let lo = (s.floor() as usize).min(n - 2);
                    let f = s - lo as f64;
                    current.gamma[lo] + f * (current.gamma[lo + 1] - current.gamma[lo])
                })
                .collect();
            values[0] = 0.0;
            values[n - 1] = 1.0;
            for p in 1..n {
                values[p] = values[p].max(values[p - 1]).min(1.0);
            }
            let candidate = Reparam { gamma: values };
            let moved = apply_reparam(q2, &candidate)?;
            let e = q1.l2_distance(&moved).powi(2);
            if e < energy {
                current = candidate;
                warped = moved;
                energy = e;
                accepted = true;
                step = (eps / cap * 2.0).min(1.0);
                break;
            }
            eps *= 0.5;
        }
        if !accepted {
            break;
        }
    }
    Ok(current)
}
