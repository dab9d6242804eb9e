//! Karcher mean, shooting vectors and tangent PCA of graph shapes.

use nalgebra::DMatrix;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::curve::{align, quadrature_weights, AlignOptions, Srvf};
use crate::error::{Error, Result};
use crate::graph::{pad, permute, pre_shape_distance, GraphShape, Permutation};
use crate::matching::{register, MatchConfig};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MeanMode {
    /// Alternate matching and averaging until the variance settles.
    Full,
    /// Register every graph once to the template and average.
    Template,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MeanConfig {
    pub mode: MeanMode,
    pub max_iters: usize,
    /// Stop once the variance drops by less than this fraction.
    pub tolerance: f64,
    pub matching: MatchConfig,
}

impl Default for MeanConfig {
    fn default() -> Self {
        MeanConfig {
            mode: MeanMode::Full,
            max_iters: 20,
            tolerance: 1e-6,
            matching: MatchConfig::default(),
        }
    }
}

#[derive(Debug, Clone)]
pub struct MeanResult {
    pub mean: GraphShape,
    /// Inputs permuted onto the mean's node order with edges aligned to the
    /// mean's edges.
    pub registered: Vec<GraphShape>,
    /// Permutation applied to each (padded) input.
    pub permutations: Vec<Permutation>,
    pub iterations: usize,
    /// `Σ d_a(mean, registered_i)² / m`.
    pub final_variance: f64,
    /// Variance at the start of each accepted iteration.
    pub variance_history: Vec<f64>,
    /// Set when an iteration raised the variance and was discarded.
    pub stopped_on_increase: bool,
}

impl MeanResult {
    /// Fraction of registered samples that have each edge of the mean.
    pub fn presence(&self, i: usize, j: usize) -> f64 {
        let hits = self.registered.iter().filter(|g| g.has_edge(i, j)).count();
        hits as f64 / self.registered.len() as f64
    }

    /// The mean without edges present in fewer than `threshold` of the
    /// samples. Only for display; the tangent model keeps every edge.
    pub fn display_mean(&self, threshold: f64) -> Result<GraphShape> {
        let mut out = GraphShape::new(self.mean.node_count(), self.mean.dim(), self.mean.samples())?
            .with_labels(self.mean.labels().to_vec())?;
        for node in 0..self.mean.node_count() {
            if let Some(p) = self.mean.position(node) {
                out.set_position(node, p.to_vec())?;
            }
        }
        for (i, j, e) in self.mean.edges() {
            if self.presence(i, j) >= threshold {
                out.insert_srvf(i, j, e.srvf().clone(), e.curve().start())?;
            }
        }
        Ok(out)
    }
}

fn pad_all(graphs: &[GraphShape]) -> Vec<GraphShape> {
    let n = graphs.iter().map(|g| g.node_count()).max().unwrap_or(0);
    graphs.iter().map(|g| pad(g, n - g.node_count())).collect()
}

// Best permutation of `g` onto `mean`, never worse than `fallback`.
fn match_one(
    mean: &GraphShape,
    g: &GraphShape,
    fallback: &Permutation,
    config: &MatchConfig,
) -> Result<(Permutation, f64)> {
    let (_, _, result) = register(mean, g, config)?;
    if result.permutation == *fallback {
        return Ok((result.permutation, result.quotient_distance));
    }
    let kept = pre_shape_distance(mean, &permute(fallback, g)?)?;
    if kept <= result.quotient_distance {
        Ok((fallback.clone(), kept))
    } else {
        Ok((result.permutation, result.quotient_distance))
    }
}

// Per-slot reference SRVF (oriented low → high): the mean's edge, or the first
// sample that has one.
fn references(mean: &GraphShape, samples: &[GraphShape]) -> Vec<Option<Srvf>> {
    mean.slot_pairs()
        .map(|(i, j)| {
            mean.srvf_between(i, j)
                .or_else(|| samples.iter().find_map(|g| g.srvf_between(i, j)))
        })
        .collect()
}

// `g` with each edge oriented low → high and aligned to its slot reference.
fn align_to(references: &[Option<Srvf>], g: &GraphShape) -> Result<GraphShape> {
    let opts = AlignOptions::default();
    let mut out = GraphShape::new(g.node_count(), g.dim(), g.samples())?.with_labels(g.labels().to_vec())?;
    for node in 0..g.node_count() {
        if let Some(p) = g.position(node) {
            out.set_position(node, p.to_vec())?;
        }
    }
    let pairs: Vec<(usize, usize)> = g.slot_pairs().collect();
    for ((i, j), reference) in pairs.into_iter().zip(references) {
        let (Some(q), Some(curve)) = (g.srvf_between(i, j), g.curve_between(i, j)) else {
            continue;
        };
        let reference = reference.as_ref().expect("reference exists where a sample has an edge");
        let a = align(reference, &q, &opts)?;
        let start = if a.reversed {
            curve.point(curve.len() - 1)
        } else {
            curve.start()
        };
        out.insert_srvf(i, j, a.aligned, start)?;
    }
    Ok(out)
}

// Entry-wise SRVF average; null edges count as zero.
fn average(template: &GraphShape, registered: &[GraphShape]) -> Result<GraphShape> {
    let m = registered.len() as f64;
    let mut out = GraphShape::new(template.node_count(), template.dim(), template.samples())?
        .with_labels(template.labels().to_vec())?;
    for node in 0..template.node_count() {
        if let Some(p) = template.position(node) {
            out.set_position(node, p.to_vec())?;
        }
    }
    let (samples, dim) = (template.samples(), template.dim());
    let pairs: Vec<(usize, usize)> = template.slot_pairs().collect();
    for (i, j) in pairs {
        let mut sum = vec![0.0; samples * dim];
        let mut start = vec![0.0; dim];
        let mut present = 0usize;
        for g in registered {
            if let Some(e) = g.edge(i, j) {
                // `align_to` stores every edge low → high.
                sum.iter_mut().zip(e.srvf().as_slice()).for_each(|(s, v)| *s += v);
                start.iter_mut().zip(e.curve().start()).for_each(|(s, v)| *s += v);
                present += 1;
            }
        }
        if present == 0 {
            continue;
        }
        sum.iter_mut().for_each(|v| *v /= m);
        start.iter_mut().for_each(|v| *v /= present as f64);
        out.insert_srvf(i, j, Srvf::new(sum, dim)?, &start)?;
    }
    Ok(out)
}

fn variance(mean: &GraphShape, registered: &[GraphShape]) -> Result<f64> {
    let terms = registered
        .par_iter()
        .map(|g| pre_shape_distance(mean, g).map(|d| d * d))
        .collect::<Result<Vec<f64>>>()?;
    Ok(terms.iter().sum::<f64>() / registered.len() as f64)
}

struct Round {
    mean: GraphShape,
    registered: Vec<GraphShape>,
    permutations: Vec<Permutation>,
}

// Matches every graph to `mean` and averages the registered copies.
fn round(
    mean: &GraphShape,
    graphs: &[GraphShape],
    previous: &[Permutation],
    config: &MatchConfig,
) -> Result<(f64, Round)> {
    let matched = graphs
        .par_iter()
        .zip(previous)
        .map(|(g, p)| match_one(mean, g, p, config))
        .collect::<Result<Vec<_>>>()?;
    let m = graphs.len() as f64;
    let v = matched.iter().map(|(_, d)| d * d).sum::<f64>() / m;
    let permuted = graphs
        .iter()
        .zip(&matched)
        .map(|(g, (p, _))| permute(p, g))
        .collect::<Result<Vec<_>>>()?;
    let refs = references(mean, &permuted);
    let registered = permuted
        .par_iter()
        .map(|g| align_to(&refs, g))
        .collect::<Result<Vec<_>>>()?;
    let next = average(mean, &registered)?;
    Ok((
        v,
        Round {
            mean: next,
            registered,
            permutations: matched.into_iter().map(|(p, _)| p).collect(),
        },
    ))
}

/// Karcher mean of a set of graphs in the quotient space.
///
/// Inputs are padded to a common node count and the graph with the most
/// edges (first on ties) seeds the mean. Each iteration registers every graph
/// to the current mean and replaces the mean by the entry-wise SRVF average of
/// the registered graphs. An iteration that would raise the variance is
/// discarded and the previous state returned.
pub fn karcher_mean(graphs: &[GraphShape], config: &MeanConfig) -> Result<MeanResult> {
    if graphs.is_empty() {
        return Err(Error::invalid("the mean of no graphs is undefined"));
    }
    let graphs = pad_all(graphs);
    let template = graphs
        .iter()
        .enumerate()
        .max_by(|a, b| a.1.edge_count().cmp(&b.1.edge_count()).then(b.0.cmp(&a.0)))
        .map(|(_, g)| g.clone())
        .expect("non-empty");
    let n = template.node_count();
    let identity = vec![Permutation::identity(n); graphs.len()];

    let max_iters = match config.mode {
        MeanMode::Full => config.max_iters.max(1),
        MeanMode::Template => 1,
    };
    let mut mean = template;
    let mut previous = identity;
    let mut history: Vec<f64> = Vec::new();
    let mut state: Option<Round> = None;
    let mut stopped_on_increase = false;
    for _ in 0..max_iters {
        let (v, next) = round(&mean, &graphs, &previous, &config.matching)?;
        if let Some(&last) = history.last() {
            if v > last + 1e-9 {
                log::warn!("karcher variance rose from {last} to {v}; keeping the previous mean");
                stopped_on_increase = true;
                break;
            }
        }
        let settled = match history.last() {
            Some(&last) => last == 0.0 || (last - v) / last < config.tolerance,
            None => v == 0.0,
        };
        history.push(v);
        log::debug!("karcher iteration {}: variance {v}", history.len());
        mean = next.mean.clone();
        previous = next.permutations.clone();
        state = Some(next);
        if settled {
            break;
        }
    }
    let state = state.expect("at least one iteration");
    let final_variance = variance(&state.mean, &state.registered)?;
    Ok(MeanResult {
        mean: state.mean,
        registered: state.registered,
        permutations: state.permutations,
        iterations: history.len(),
        final_variance,
        variance_history: history,
        stopped_on_increase,
    })
}

fn check_same(mean: &GraphShape, g: &GraphShape) -> Result<()> {
    if mean.node_count() != g.node_count() || mean.dim() != g.dim() || mean.samples() != g.samples() {
        return Err(Error::SizeMismatch(
            "shooting vectors need graphs of the mean's size and grid".into(),
        ));
    }
    Ok(())
}

/// Tangent vector at `mean` pointing to `registered`: for each upper-triangle
/// slot in row-major order, the edge SRVF aligned to the mean's edge minus
/// the mean's edge, weighted by the square root of the quadrature weights so
/// that Euclidean norms equal L2 norms.
pub fn shooting_vector(mean: &GraphShape, registered: &GraphShape) -> Result<Vec<f64>> {
    check_same(mean, registered)?;
    let (samples, dim) = (mean.samples(), mean.dim());
    let roots: Vec<f64> = quadrature_weights(samples).iter().map(|w| w.sqrt()).collect();
    let opts = AlignOptions::default();
    let mut out = Vec::with_capacity(mean.slot_pairs().count() * samples * dim);
    let zero = Srvf::zeros(samples, dim);
    for (i, j) in mean.slot_pairs() {
        let base = mean.srvf_between(i, j);
        let target = match (&base, registered.srvf_between(i, j)) {
            (Some(b), Some(q)) => align(b, &q, &opts)?.aligned,
            (None, Some(q)) => q,
            (_, None) => zero.clone(),
        };
        let base = base.unwrap_or_else(|| zero.clone());
        for (k, (t, b)) in target.rows().zip(base.rows()).enumerate() {
            out.extend(t.iter().zip(b).map(|(x, y)| roots[k] * (x - y)));
        }
    }
    Ok(out)
}

/// `mean` moved along a tangent vector laid out as by [`shooting_vector`].
pub fn exponential(mean: &GraphShape, vector: &[f64]) -> Result<GraphShape> {
    let (samples, dim) = (mean.samples(), mean.dim());
    let block = samples * dim;
    let pairs: Vec<(usize, usize)> = mean.slot_pairs().collect();
    if vector.len() != pairs.len() * block {
        return Err(Error::SizeMismatch(format!(
            "tangent vector has {} entries, expected {}",
            vector.len(),
            pairs.len() * block
        )));
    }
    let roots: Vec<f64> = quadrature_weights(samples).iter().map(|w| w.sqrt()).collect();
    let mut out = GraphShape::new(mean.node_count(), dim, samples)?.with_labels(mean.labels().to_vec())?;
    for node in 0..mean.node_count() {
        if let Some(p) = mean.position(node) {
            out.set_position(node, p.to_vec())?;
        }
    }
    for (s, (i, j)) in pairs.into_iter().enumerate() {
        let delta = &vector[s * block..(s + 1) * block];
        let base = mean.srvf_between(i, j);
        let values: Vec<f64> = (0..block)
            .map(|idx| {
                let b = base.as_ref().map(|q| q.as_slice()[idx]).unwrap_or(0.0);
                b + delta[idx] / roots[idx / dim]
            })
            .collect();
        let start = mean
            .curve_between(i, j)
            .map(|c| c.start().to_vec())
            .or_else(|| mean.position(i).map(|p| p.to_vec()))
            .unwrap_or_else(|| vec![0.0; dim]);
        out.insert_srvf(i, j, Srvf::new(values, dim)?, &start)?;
    }
    Ok(out)
}

/// Linear model in the tangent space at the Karcher mean.
#[derive(Debug, Clone)]
pub struct TangentModel {
    pub mean: GraphShape,
    pub mean_result: MeanResult,
    /// `m × D` shooting vectors, one row per sample.
    pub shooting_vectors: DMatrix<f64>,
    /// Column means of the shooting vectors.
    pub center: Vec<f64>,
    /// Orthonormal principal directions as rows, by decreasing singular value.
    pub directions: DMatrix<f64>,
    pub singular_values: Vec<f64>,
    /// `m × r` coordinates of the centered shooting vectors.
    pub scores: DMatrix<f64>,
}

/// Karcher mean, shooting vectors and the SVD of their centered matrix.
pub fn tangent_pca(graphs: &[GraphShape], config: &MeanConfig) -> Result<TangentModel> {
    if graphs.len() < 2 {
        return Err(Error::invalid("tangent PCA needs at least 2 graphs"));
    }
    let result = karcher_mean(graphs, config)?;
    let rows = result
        .registered
        .par_iter()
        .map(|g| shooting_vector(&result.mean, g))
        .collect::<Result<Vec<_>>>()?;
    let m = rows.len();
    let d = rows[0].len();
    let shooting = DMatrix::from_fn(m, d, |r, c| rows[r][c]);
    let center: Vec<f64> = (0..d).map(|c| shooting.column(c).sum() / m as f64).collect();
    let centered = DMatrix::from_fn(m, d, |r, c| shooting[(r, c)] - center[c]);
    let (directions, singular_values) = principal_axes(&centered)?;
    let scores = &centered * directions.transpose();
    Ok(TangentModel {
        mean: result.mean.clone(),
        mean_result: result,
        shooting_vectors: shooting,
        center,
        directions,
        singular_values,
        scores,
    })
}

// Right singular vectors (as rows) and singular values, sorted decreasing,
// each direction signed so its largest-magnitude entry is positive.
fn principal_axes(centered: &DMatrix<f64>) -> Result<(DMatrix<f64>, Vec<f64>)> {
    let svd = centered.clone().svd(false, true);
    let v_t = svd
        .v_t
        .ok_or_else(|| Error::Numeric("svd of shooting vectors failed".into()))?;
    let mut order: Vec<usize> = (0..svd.singular_values.len()).collect();
    order.sort_by(|&a, &b| svd.singular_values[b].total_cmp(&svd.singular_values[a]));
    let d = centered.ncols();
    let mut directions = DMatrix::zeros(order.len(), d);
    let mut values = Vec::with_capacity(order.len());
    for (row, &k) in order.iter().enumerate() {
        let v = v_t.row(k);
        let pivot = v
            .iter()
            .copied()
            .fold(0.0f64, |acc, x| if x.abs() > acc.abs() { x } else { acc });
        let sign = if pivot < 0.0 { -1.0 } else { 1.0 };
        for c in 0..d {
            directions[(row, c)] = sign * v[c];
        }
        values.push(svd.singular_values[k]);
    }
    Ok((directions, values))
}

impl TangentModel {
    /// Number of singular values above `1e-10` times the largest.
    pub fn rank(&self) -> usize {
        let top = self.singular_values.first().copied().unwrap_or(0.0);
        self.singular_values
            .iter()
            .filter(|s| **s > 1e-10 * top.max(1e-300))
            .count()
    }

    /// Shooting vector reconstructed from the first `r` scores of sample `i`.
    pub fn reconstruct(&self, i: usize, r: usize) -> Vec<f64> {
        let r = r.min(self.directions.nrows());
        let mut v = self.center.clone();
        for k in 0..r {
            let s = self.scores[(i, k)];
            for (x, d) in v.iter_mut().zip(self.directions.row(k).iter()) {
                *x += s * d;
            }
        }
        v
    }
}

/// Graph at `mean + t·sqrt(σ_k)·direction_k`.
pub fn principal_path(model: &TangentModel, component: usize, t: f64) -> Result<GraphShape> {
    if component >= model.singular_values.len() {
        return Err(Error::invalid(format!(
            "component {component} out of range ({} available)",
            model.singular_values.len()
        )));
    }
    let step = t * model.singular_values[component].sqrt();
    let v: Vec<f64> = model.directions.row(component).iter().map(|d| step * d).collect();
    exponential(&model.mean, &v)
}

/// Share of the total squared singular values carried by the first `r`.
pub fn variance_explained(model: &TangentModel, r: usize) -> f64 {
    let total: f64 = model.singular_values.iter().map(|s| s * s).sum();
    if total == 0.0 {
        return 1.0;
    }
    let head: f64 = model.singular_values.iter().take(r).map(|s| s * s).sum();
    (head / total).clamp(0.0, 1.0)
}
