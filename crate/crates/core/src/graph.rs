//! Graphs whose edges carry curve shapes.
//!
//! A [`GraphShape`] is the adjacency matrix of an undirected simple graph in
//! which every present entry is an elastic curve. Absent entries are null
//! edges, represented by the zero SRVF in every distance computation.

use std::sync::Arc;

use crate::curve::{align, recover_curve, srvf, srvf_distance, AlignOptions, Curve, Srvf};
use crate::error::{Error, Result};

/// A bijection of `0..n`. Node `i` moves to position `mapping[i]`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Permutation {
    mapping: Vec<usize>,
}

impl Permutation {
    pub fn new(mapping: Vec<usize>) -> Result<Self> {
        let mut seen = vec![false; mapping.len()];
        for &m in &mapping {
            if m >= mapping.len() || seen[m] {
                return Err(Error::invalid(format!("{mapping:?} is not a permutation")));
            }
            seen[m] = true;
        }
        Ok(Permutation { mapping })
    }

    pub fn identity(n: usize) -> Self {
        Permutation {
            mapping: (0..n).collect(),
        }
    }

    pub fn len(&self) -> usize {
        self.mapping.len()
    }

    pub fn is_empty(&self) -> bool {
        self.mapping.is_empty()
    }

    pub fn apply(&self, i: usize) -> usize {
        self.mapping[i]
    }

    pub fn mapping(&self) -> &[usize] {
        &self.mapping
    }

    pub fn is_identity(&self) -> bool {
        self.mapping.iter().enumerate().all(|(i, &m)| i == m)
    }

    pub fn inverse(&self) -> Permutation {
        let mut mapping = vec![0; self.mapping.len()];
        for (i, &m) in self.mapping.iter().enumerate() {
            mapping[m] = i;
        }
        Permutation { mapping }
    }

    /// `self ∘ first`: apply `first`, then `self`.
    pub fn compose(&self, first: &Permutation) -> Permutation {
        assert_eq!(self.len(), first.len(), "permutation sizes differ");
        Permutation {
            mapping: first.mapping.iter().map(|&m| self.mapping[m]).collect(),
        }
    }

    /// The same permutation acting on a larger index set, fixing the extra
    /// indices.
    pub fn extended(&self, n: usize) -> Permutation {
        let mut mapping = self.mapping.clone();
        mapping.extend(self.mapping.len()..n);
        Permutation { mapping }
    }
}

/// An edge shape: its resampled curve and the SRVF of that curve.
#[derive(Debug, Clone, PartialEq)]
pub struct EdgeShape {
    srvf: Srvf,
    curve: Curve,
}

impl EdgeShape {
    pub fn srvf(&self) -> &Srvf {
        &self.srvf
    }

    pub fn curve(&self) -> &Curve {
        &self.curve
    }
}

#[derive(Debug, Clone, PartialEq)]
struct Slot {
    shape: Arc<EdgeShape>,
    // The stored curve runs from the lower to the higher node index.
    from_low: bool,
}

/// Adjacency matrix of edge shapes over `n` nodes.
///
/// Only the strict upper triangle is stored. Permuting nodes moves shapes
/// between slots without touching the curves; each slot remembers which
/// endpoint its curve starts at.
#[derive(Debug, Clone, PartialEq)]
pub struct GraphShape {
    dim: usize,
    samples: usize,
    labels: Vec<String>,
    positions: Vec<Option<Vec<f64>>>,
    slots: Vec<Option<Slot>>,
}

fn slot_count(n: usize) -> usize {
    n * n.saturating_sub(1) / 2
}

impl GraphShape {
    /// Edgeless graph with nodes labelled `0..n`.
    pub fn new(n: usize, dim: usize, samples: usize) -> Result<Self> {
        if dim == 0 {
            return Err(Error::invalid("dimension must be positive"));
        }
        if samples < 2 {
            return Err(Error::invalid("edges need at least 2 samples"));
        }
        Ok(GraphShape {
            dim,
            samples,
            labels: (0..n).map(|i| i.to_string()).collect(),
            positions: vec![None; n],
            slots: vec![None; slot_count(n)],
        })
    }

    pub fn with_labels(mut self, labels: Vec<String>) -> Result<Self> {
        if labels.len() != self.node_count() {
            return Err(Error::SizeMismatch(format!(
                "{} labels for {} nodes",
                labels.len(),
                self.node_count()
            )));
        }
        self.labels = labels;
        Ok(self)
    }

    pub fn set_position(&mut self, node: usize, pos: Vec<f64>) -> Result<()> {
        self.check_node(node)?;
        if pos.len() != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                found: pos.len(),
            });
        }
        self.positions[node] = Some(pos);
        Ok(())
    }

    pub fn node_count(&self) -> usize {
        self.labels.len()
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn samples(&self) -> usize {
        self.samples
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn position(&self, node: usize) -> Option<&[f64]> {
        self.positions[node].as_deref()
    }

    pub fn edge_count(&self) -> usize {
        self.slots.iter().filter(|s| s.is_some()).count()
    }

    fn check_node(&self, node: usize) -> Result<()> {
        if node >= self.node_count() {
            return Err(Error::invalid(format!(
                "node {node} out of range for {} nodes",
                self.node_count()
            )));
        }
        Ok(())
    }

    pub(crate) fn slot_index(&self, i: usize, j: usize) -> usize {
        let (a, b) = if i < j { (i, j) } else { (j, i) };
        let n = self.node_count();
        a * n - a * (a + 1) / 2 + (b - a - 1)
    }

    /// Node pairs `(i, j)`, `i < j`, in slot order.
    pub(crate) fn slot_pairs(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        let n = self.node_count();
        (0..n).flat_map(move |i| (i + 1..n).map(move |j| (i, j)))
    }

    pub(crate) fn slot_srvf(&self, slot: usize) -> Option<&Srvf> {
        self.slots[slot].as_ref().map(|s| &s.shape.srvf)
    }

    /// Adds an edge from node `i` to node `j`. The curve is resampled by arc
    /// length to the graph's grid.
    pub fn insert_curve(&mut self, i: usize, j: usize, curve: &Curve) -> Result<()> {
        if curve.dim() != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                found: curve.dim(),
            });
        }
        let curve = curve.resample(self.samples)?;
        let q = srvf(&curve);
        if q.is_zero() {
            return Err(Error::invalid(format!("edge ({i}, {j}) has zero length")));
        }
        self.put(i, j, EdgeShape { srvf: q, curve })
    }

    /// Like [`GraphShape::insert_curve`] for a curve already on the graph's
    /// grid: the samples are used as they are.
    pub fn insert_sampled_curve(&mut self, i: usize, j: usize, curve: &Curve) -> Result<()> {
        if curve.dim() != self.dim || curve.len() != self.samples {
            return Err(Error::SizeMismatch(format!(
                "curve is {}×{}, graph expects {}×{}",
                curve.len(),
                curve.dim(),
                self.samples,
                self.dim
            )));
        }
        let q = srvf(curve);
        if q.is_zero() {
            return Err(Error::invalid(format!("edge ({i}, {j}) has zero length")));
        }
        self.put(
            i,
            j,
            EdgeShape {
                srvf: q,
                curve: curve.clone(),
            },
        )
    }

    /// Adds an edge given by its SRVF and the position its curve starts at
    /// (the `i` end). A zero SRVF leaves the slot null.
    pub fn insert_srvf(&mut self, i: usize, j: usize, q: Srvf, start: &[f64]) -> Result<()> {
        if q.dim() != self.dim || q.len() != self.samples {
            return Err(Error::SizeMismatch(format!(
                "srvf is {}×{}, graph expects {}×{}",
                q.len(),
                q.dim(),
                self.samples,
                self.dim
            )));
        }
        if q.is_zero() {
            self.check_node(i)?;
            self.check_node(j)?;
            let k = self.slot_index(i, j);
            self.slots[k] = None;
            return Ok(());
        }
        let curve = recover_curve(&q, start)?;
        self.put(i, j, EdgeShape { srvf: q, curve })
    }

    fn put(&mut self, i: usize, j: usize, shape: EdgeShape) -> Result<()> {
        self.check_node(i)?;
        self.check_node(j)?;
        if i == j {
            return Err(Error::invalid(format!("self-loop at node {i}")));
        }
        let k = self.slot_index(i, j);
        if self.slots[k].is_some() {
            return Err(Error::invalid(format!(
                "duplicate edge between {} and {}",
                self.labels[i], self.labels[j]
            )));
        }
        self.slots[k] = Some(Slot {
            shape: Arc::new(shape),
            from_low: i < j,
        });
        Ok(())
    }

    pub fn has_edge(&self, i: usize, j: usize) -> bool {
        i != j && self.slots[self.slot_index(i, j)].is_some()
    }

    /// The edge between `i` and `j` in its stored orientation. The diagonal is
    /// always null.
    pub fn edge(&self, i: usize, j: usize) -> Option<&EdgeShape> {
        if i == j {
            return None;
        }
        self.slots[self.slot_index(i, j)].as_ref().map(|s| &*s.shape)
    }

    /// Whether the stored curve of edge `(i, j)` starts at node `i`.
    pub fn runs_from(&self, i: usize, j: usize) -> Option<bool> {
        if i == j {
            return None;
        }
        self.slots[self.slot_index(i, j)]
            .as_ref()
            .map(|s| s.from_low == (i < j))
    }

    /// Edge curve traversed from node `i` to node `j`.
    pub fn curve_between(&self, i: usize, j: usize) -> Option<Curve> {
        let forward = self.runs_from(i, j)?;
        let curve = &self.edge(i, j)?.curve;
        Some(if forward { curve.clone() } else { curve.reversed() })
    }

    /// Edge SRVF for the curve traversed from node `i` to node `j`.
    pub fn srvf_between(&self, i: usize, j: usize) -> Option<Srvf> {
        let forward = self.runs_from(i, j)?;
        let q = &self.edge(i, j)?.srvf;
        Some(if forward { q.clone() } else { q.reversed() })
    }

    /// Present edges as `(i, j)` with the curve running from `i` to `j`.
    pub fn edges(&self) -> impl Iterator<Item = (usize, usize, &EdgeShape)> + '_ {
        self.slot_pairs().zip(&self.slots).filter_map(|((i, j), s)| {
            s.as_ref().map(|s| {
                if s.from_low {
                    (i, j, &*s.shape)
                } else {
                    (j, i, &*s.shape)
                }
            })
        })
    }

    /// Sum of the polyline lengths of all edges.
    pub fn total_length(&self) -> f64 {
        self.edges().map(|(_, _, e)| e.curve.length()).sum()
    }

    /// Every curve and position scaled by `factor > 0`; SRVFs scale by its
    /// square root.
    pub fn scaled(&self, factor: f64) -> Result<GraphShape> {
        if !(factor > 0.0 && factor.is_finite()) {
            return Err(Error::invalid("scale factor must be positive and finite"));
        }
        let root = factor.sqrt();
        let mut out = self.clone();
        for slot in out.slots.iter_mut().flatten() {
            slot.shape = Arc::new(EdgeShape {
                srvf: slot.shape.srvf.scaled(root),
                curve: slot.shape.curve.scaled(factor),
            });
        }
        for pos in out.positions.iter_mut().flatten() {
            pos.iter_mut().for_each(|v| *v *= factor);
        }
        Ok(out)
    }

    fn check_compatible(&self, other: &GraphShape) -> Result<()> {
        if self.node_count() != other.node_count() {
            return Err(Error::SizeMismatch(format!(
                "graphs have {} and {} nodes; pad first",
                self.node_count(),
                other.node_count()
            )));
        }
        if self.dim != other.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                found: other.dim,
            });
        }
        if self.samples != other.samples {
            return Err(Error::SizeMismatch(format!(
                "edge grids differ: {} vs {} samples",
                self.samples, other.samples
            )));
        }
        Ok(())
    }
}

/// `d_s` between two optional edge SRVFs, with the zero SRVF standing in for a
/// null edge.
pub(crate) fn edge_distance(a: Option<&Srvf>, b: Option<&Srvf>, samples: usize, dim: usize) -> Result<f64> {
    match (a, b) {
        (None, None) => Ok(0.0),
        (Some(q), None) | (None, Some(q)) => Ok(q.norm()),
        (Some(q1), Some(q2)) => {
            debug_assert_eq!((q1.len(), q1.dim()), (samples, dim));
            srvf_distance(q1, q2)
        }
    }
}

/// Sums squared terms in ascending order, so the result does not depend on
/// the order the terms were produced in.
pub(crate) fn sorted_sum(mut terms: Vec<f64>) -> f64 {
    terms.sort_by(f64::total_cmp);
    terms.into_iter().sum()
}

/// Pre-shape distance `d_a`: the square root of the squared edge distances
/// summed over all ordered node pairs, i.e. twice over each unordered pair.
pub fn pre_shape_distance(a1: &GraphShape, a2: &GraphShape) -> Result<f64> {
    a1.check_compatible(a2)?;
    let mut terms = Vec::with_capacity(a1.slots.len());
    for k in 0..a1.slots.len() {
        let d = edge_distance(a1.slot_srvf(k), a2.slot_srvf(k), a1.samples, a1.dim)?;
        terms.push(2.0 * d * d);
    }
    Ok(sorted_sum(terms).sqrt())
}

/// Node pairs where either graph has an edge, with the edge distance `d_s`
/// there (a null edge counts as the zero SRVF). `d_a` is the root of twice
/// the sum of their squares.
pub fn edge_distances(a1: &GraphShape, a2: &GraphShape) -> Result<Vec<(usize, usize, f64)>> {
    a1.check_compatible(a2)?;
    let mut out = Vec::new();
    for (k, (i, j)) in a1.slot_pairs().enumerate() {
        let (q1, q2) = (a1.slot_srvf(k), a2.slot_srvf(k));
        if q1.is_some() || q2.is_some() {
            out.push((i, j, edge_distance(q1, q2, a1.samples, a1.dim)?));
        }
    }
    Ok(out)
}

/// `P * A`: the edge between `i` and `j` becomes the edge between `P(i)` and
/// `P(j)`; labels and positions follow their nodes.
pub fn permute(p: &Permutation, a: &GraphShape) -> Result<GraphShape> {
    let n = a.node_count();
    if p.len() != n {
        return Err(Error::SizeMismatch(format!(
            "permutation of {} for a graph of {n} nodes",
            p.len()
        )));
    }
    let mut out = GraphShape {
        dim: a.dim,
        samples: a.samples,
        labels: vec![String::new(); n],
        positions: vec![None; n],
        slots: vec![None; a.slots.len()],
    };
    for i in 0..n {
        out.labels[p.apply(i)] = a.labels[i].clone();
        out.positions[p.apply(i)] = a.positions[i].clone();
    }
    for ((i, j), slot) in a.slot_pairs().zip(&a.slots) {
        if let Some(slot) = slot {
            let (pi, pj) = (p.apply(i), p.apply(j));
            let k = out.slot_index(pi, pj);
            out.slots[k] = Some(Slot {
                shape: Arc::clone(&slot.shape),
                from_low: slot.from_low == (pi < pj),
            });
        }
    }
    Ok(out)
}

/// Appends `extra` isolated null nodes.
pub fn pad(a: &GraphShape, extra: usize) -> GraphShape {
    if extra == 0 {
        return a.clone();
    }
    let n = a.node_count();
    let mut out = GraphShape {
        dim: a.dim,
        samples: a.samples,
        labels: a.labels.clone(),
        positions: a.positions.clone(),
        slots: vec![None; slot_count(n + extra)],
    };
    out.labels.extend((0..extra).map(|k| format!("null{k}")));
    out.positions.extend(std::iter::repeat_n(None, extra));
    for ((i, j), slot) in a.slot_pairs().zip(&a.slots) {
        let k = out.slot_index(i, j);
        out.slots[k] = slot.clone();
    }
    out
}

/// Graph with every curve scaled by the reciprocal of the total edge length.
pub fn total_length_normalize(a: &GraphShape) -> Result<GraphShape> {
    let total = a.total_length();
    if a.edge_count() == 0 || total <= 0.0 {
        return Err(Error::Degenerate(
            "cannot length-normalize a graph without edges".into(),
        ));
    }
    a.scaled(1.0 / total)
}

/// A path of graphs sharing one node ordering.
#[derive(Debug, Clone)]
pub struct GraphGeodesic {
    pub steps: Vec<GraphShape>,
}

fn lerp_point(a: &[f64], b: &[f64], t: f64) -> Vec<f64> {
    a.iter().zip(b).map(|(x, y)| (1.0 - t) * x + t * y).collect()
}

struct EdgePlan {
    q1: Srvf,
    q2: Srvf,
    start1: Vec<f64>,
    start2: Vec<f64>,
}

// Endpoints of the per-edge straight line in SRVF space, in the orientation of
// the first graph's edge where it has one. Without `realign` the second edge
// is only flipped to that orientation.
fn edge_plans(a1: &GraphShape, a2: &GraphShape, realign: bool) -> Result<Vec<Option<EdgePlan>>> {
    let opts = AlignOptions::default();
    let zeros = Srvf::zeros(a1.samples, a1.dim);
    let mut plans = Vec::with_capacity(a1.slots.len());
    for (s1, s2) in a1.slots.iter().zip(&a2.slots) {
        let plan = match (s1, s2) {
            (None, None) => None,
            (Some(e), None) | (None, Some(e)) => {
                let start = e.shape.curve.start().to_vec();
                let (q1, q2) = if s1.is_some() {
                    (e.shape.srvf.clone(), zeros.clone())
                } else {
                    (zeros.clone(), e.shape.srvf.clone())
                };
                Some(EdgePlan {
                    q1,
                    q2,
                    start1: start.clone(),
                    start2: start,
                })
            }
            (Some(e1), Some(e2)) if !realign => {
                let c2 = &e2.shape.curve;
                let flip = e1.from_low != e2.from_low;
                let q2 = if flip {
                    e2.shape.srvf.reversed()
                } else {
                    e2.shape.srvf.clone()
                };
                let start2 = if flip { c2.point(c2.len() - 1) } else { c2.start() };
                Some(EdgePlan {
                    q1: e1.shape.srvf.clone(),
                    q2,
                    start1: e1.shape.curve.start().to_vec(),
                    start2: start2.to_vec(),
                })
            }
            (Some(e1), Some(e2)) => {
                let a = align(&e1.shape.srvf, &e2.shape.srvf, &opts)?;
                let c2 = &e2.shape.curve;
                let start2 = if a.reversed { c2.point(c2.len() - 1) } else { c2.start() };
                Some(EdgePlan {
                    q1: e1.shape.srvf.clone(),
                    q2: a.aligned,
                    start1: e1.shape.curve.start().to_vec(),
                    start2: start2.to_vec(),
                })
            }
        };
        plans.push(plan);
    }
    Ok(plans)
}

fn orientation(a1: &GraphShape, a2: &GraphShape, k: usize) -> bool {
    a1.slots[k]
        .as_ref()
        .or(a2.slots[k].as_ref())
        .map(|s| s.from_low)
        .unwrap_or(true)
}

fn graph_at(a1: &GraphShape, a2: &GraphShape, plans: &[Option<EdgePlan>], t: f64) -> Result<GraphShape> {
    let mut out = GraphShape {
        dim: a1.dim,
        samples: a1.samples,
        labels: a1.labels.clone(),
        positions: a1.positions.clone(),
        slots: vec![None; a1.slots.len()],
    };
    for (k, plan) in plans.iter().enumerate() {
        let Some(plan) = plan else { continue };
        let q = plan.q1.lerp(&plan.q2, t);
        if q.is_zero() {
            continue;
        }
        let curve = recover_curve(&q, &lerp_point(&plan.start1, &plan.start2, t))?;
        out.slots[k] = Some(Slot {
            shape: Arc::new(EdgeShape { srvf: q, curve }),
            from_low: orientation(a1, a2, k),
        });
    }
    Ok(out)
}

/// `a2` with every edge that has a counterpart in `a1` rotated, reparameterized
/// and oriented onto that counterpart. Edges without a counterpart are kept.
pub fn align_edges(a1: &GraphShape, a2: &GraphShape) -> Result<GraphShape> {
    a1.check_compatible(a2)?;
    let plans = edge_plans(a1, a2, true)?;
    let mut out = graph_at(a1, a2, &plans, 1.0)?;
    out.labels = a2.labels.clone();
    out.positions = a2.positions.clone();
    for (k, (s1, s2)) in a1.slots.iter().zip(&a2.slots).enumerate() {
        if s1.is_none() {
            out.slots[k] = s2.clone();
        }
    }
    Ok(out)
}

fn straight_path(a1: &GraphShape, a2: &GraphShape, steps: usize, realign: bool) -> Result<GraphGeodesic> {
    a1.check_compatible(a2)?;
    if steps < 2 {
        return Err(Error::invalid("a geodesic needs at least 2 steps"));
    }
    let plans = edge_plans(a1, a2, realign)?;
    let mut out = Vec::with_capacity(steps);
    out.push(a1.clone());
    for s in 1..steps - 1 {
        out.push(graph_at(a1, a2, &plans, s as f64 / (steps - 1) as f64)?);
    }
    let mut last = graph_at(a1, a2, &plans, 1.0)?;
    last.labels = a2.labels.clone();
    last.positions = a2.positions.clone();
    out.push(last);
    Ok(GraphGeodesic { steps: out })
}

/// Straight-line path in the pre-shape space: each edge pair is aligned and
/// interpolated in SRVF space, and an edge facing a null edge grows from or
/// shrinks to zero. The first step is `a1` itself and the last is `a2` with
/// its edges aligned to `a1`.
pub fn pre_shape_geodesic(a1: &GraphShape, a2: &GraphShape, steps: usize) -> Result<GraphGeodesic> {
    straight_path(a1, a2, steps, true)
}

/// Straight line between two graphs already registered to each other: stored
/// edge SRVFs are interpolated as they are, with no further alignment beyond
/// matching edge orientation.
pub fn registered_geodesic(a1: &GraphShape, a2: &GraphShape, steps: usize) -> Result<GraphGeodesic> {
    straight_path(a1, a2, steps, false)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn line(dx: f64, dy: f64) -> Curve {
        Curve::sample(10, |t| [dx * t, dy * t + 0.1 * (3.0 * t).sin()]).unwrap()
    }

    fn triangle() -> GraphShape {
        let mut g = GraphShape::new(3, 2, 10).unwrap();
        g.insert_curve(0, 1, &line(1.0, 0.0)).unwrap();
        g.insert_curve(2, 1, &line(0.0, 2.0)).unwrap();
        g
    }

    #[test]
    fn permutation_rejects_repeats() {
        assert!(Permutation::new(vec![0, 0, 1]).is_err());
        assert!(Permutation::new(vec![0, 3, 1]).is_err());
    }

    #[test]
    fn compose_and_inverse() {
        let p = Permutation::new(vec![2, 0, 1]).unwrap();
        let q = Permutation::new(vec![1, 2, 0]).unwrap();
        assert_eq!(p.compose(&q).mapping(), &[0, 1, 2]);
        assert!(p.compose(&p.inverse()).is_identity());
    }

    #[test]
    fn slots_cover_upper_triangle() {
        let g = GraphShape::new(5, 2, 4).unwrap();
        let idx: Vec<usize> = g.slot_pairs().map(|(i, j)| g.slot_index(i, j)).collect();
        assert_eq!(idx, (0..10).collect::<Vec<_>>());
        assert_eq!(g.slot_index(3, 1), g.slot_index(1, 3));
    }

    #[test]
    fn insert_rejects_bad_edges() {
        let mut g = triangle();
        assert!(g.insert_curve(1, 1, &line(1.0, 1.0)).is_err());
        assert!(g.insert_curve(1, 0, &line(1.0, 1.0)).is_err());
        assert!(g.insert_curve(0, 5, &line(1.0, 1.0)).is_err());
    }

    #[test]
    fn edges_keep_their_direction() {
        let g = triangle();
        assert_eq!(g.runs_from(2, 1), Some(true));
        assert_eq!(g.runs_from(1, 2), Some(false));
        let c = g.curve_between(1, 2).unwrap();
        assert_eq!(c.point(0), g.edge(1, 2).unwrap().curve().point(9));
        let dirs: Vec<_> = g.edges().map(|(i, j, _)| (i, j)).collect();
        assert_eq!(dirs, vec![(0, 1), (2, 1)]);
    }

    #[test]
    fn permute_moves_labels_and_keeps_orientation() {
        let g = triangle();
        let p = Permutation::new(vec![2, 0, 1]).unwrap();
        let h = permute(&p, &g).unwrap();
        assert_eq!(h.labels(), &["1", "2", "0"]);
        // edge 2 → 1 is now 1 → 0
        assert_eq!(h.runs_from(1, 0), Some(true));
        assert_eq!(h.curve_between(1, 0), g.curve_between(2, 1));
        assert_eq!(permute(&p.inverse(), &h).unwrap(), g);
    }

    #[test]
    fn pad_appends_null_nodes() {
        let g = triangle();
        let p = pad(&g, 2);
        assert_eq!(p.node_count(), 5);
        assert_eq!(p.edge_count(), 2);
        assert_eq!(p.curve_between(2, 1), g.curve_between(2, 1));
        assert_eq!(pad(&g, 0), g);
    }

    #[test]
    fn single_edge_difference() {
        let g = triangle();
        let mut h = GraphShape::new(3, 2, 10).unwrap();
        h.insert_curve(0, 1, &line(1.0, 0.0)).unwrap();
        let d = pre_shape_distance(&g, &h).unwrap();
        let q = g.edge(1, 2).unwrap().srvf();
        assert!((d - 2f64.sqrt() * q.norm()).abs() < 1e-12);
    }

    #[test]
    fn normalized_length_is_one() {
        let g = triangle();
        let n = total_length_normalize(&g).unwrap();
        assert!((n.total_length() - 1.0).abs() < 1e-12);
        assert!(total_length_normalize(&GraphShape::new(3, 2, 10).unwrap()).is_err());
    }

    #[test]
    fn geodesic_grows_missing_edge() {
        let g = triangle();
        let mut h = GraphShape::new(3, 2, 10).unwrap();
        h.insert_curve(0, 1, &line(1.0, 0.0)).unwrap();
        let path = pre_shape_geodesic(&h, &g, 3).unwrap();
        assert!(!path.steps[0].has_edge(1, 2));
        let mid = path.steps[1].edge(1, 2).unwrap().srvf();
        let full = g.edge(1, 2).unwrap().srvf();
        assert!((mid.norm() - 0.5 * full.norm()).abs() < 1e-12);
    }
}
