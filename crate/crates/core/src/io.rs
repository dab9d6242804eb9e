//! File formats: JSON graphs, SWC morphologies, run configuration and the
//! JSON records the command-line tool writes.

use std::collections::{BTreeMap, HashMap, HashSet};
use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::curve::Curve;
use crate::error::{Error, Result};
use crate::graph::GraphShape;
use crate::inference::{DistanceMatrix, TestReport};
use crate::matching::{MatchConfig, Schedule, Solver};
use crate::statistics::{MeanConfig, MeanMode};

/// Node identifier in a graph file: a string or an integer.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(untagged)]
pub enum NodeId {
    Int(i64),
    Name(String),
}

impl fmt::Display for NodeId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            NodeId::Int(v) => write!(f, "{v}"),
            NodeId::Name(s) => f.write_str(s),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NodeRecord {
    pub id: NodeId,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub pos: Option<Vec<f64>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EdgeRecord {
    pub source: NodeId,
    pub target: NodeId,
    pub points: Vec<Vec<f64>>,
}

/// JSON exchange format for graphs with curve-valued edges.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GraphFile {
    pub dim: usize,
    pub nodes: Vec<NodeRecord>,
    pub edges: Vec<EdgeRecord>,
    /// Set when every edge already lies on a common arc-length grid of this
    /// many samples; such edges are loaded without resampling.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub samples_per_edge: Option<usize>,
    /// Free-form sample information such as subject, age, sex or group.
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub metadata: BTreeMap<String, serde_json::Value>,
}

impl GraphFile {
    /// Structural checks, with the offending record named in each message.
    pub fn validate(&self) -> Result<()> {
        if self.dim != 2 && self.dim != 3 {
            return Err(Error::Validation(format!("dim must be 2 or 3, found {}", self.dim)));
        }
        let mut ids = HashSet::new();
        for (k, node) in self.nodes.iter().enumerate() {
            if !ids.insert(&node.id) {
                return Err(Error::Validation(format!("nodes[{k}]: duplicate id {}", node.id)));
            }
            if let Some(p) = &node.pos {
                check_point(p, self.dim).map_err(|m| Error::Validation(format!("nodes[{k}] ({}): {m}", node.id)))?;
            }
        }
        let mut pairs = HashSet::new();
        for (k, e) in self.edges.iter().enumerate() {
            let name = format!("edges[{k}] ({} - {})", e.source, e.target);
            for end in [&e.source, &e.target] {
                if !ids.contains(end) {
                    return Err(Error::Validation(format!("{name}: unknown node {end}")));
                }
            }
            if e.source == e.target {
                return Err(Error::Validation(format!("{name}: self-loop")));
            }
            let key = if format!("{:?}", e.source) < format!("{:?}", e.target) {
                (&e.source, &e.target)
            } else {
                (&e.target, &e.source)
            };
            if !pairs.insert(key) {
                return Err(Error::Validation(format!("{name}: duplicate edge between these nodes")));
            }
            if e.points.len() < 2 {
                return Err(Error::Validation(format!("{name}: needs at least 2 points")));
            }
            for (p, point) in e.points.iter().enumerate() {
                check_point(point, self.dim).map_err(|m| Error::Validation(format!("{name} point {p}: {m}")))?;
            }
        }
        if self.samples_per_edge.is_some_and(|s| s < 2) {
            return Err(Error::Validation("samples_per_edge must be at least 2".into()));
        }
        Ok(())
    }

    /// Converts to a graph shape, resampling each edge by arc length to
    /// `samples` points unless the file says it is already on that grid.
    pub fn to_graph(&self, samples: usize) -> Result<GraphShape> {
        self.validate()?;
        let index: HashMap<&NodeId, usize> = self.nodes.iter().enumerate().map(|(k, n)| (&n.id, k)).collect();
        let labels = self.nodes.iter().map(|n| n.id.to_string()).collect();
        let mut g = GraphShape::new(self.nodes.len(), self.dim, samples)?.with_labels(labels)?;
        for (k, node) in self.nodes.iter().enumerate() {
            if let Some(p) = &node.pos {
                g.set_position(k, p.clone())?;
            }
        }
        let on_grid = self.samples_per_edge == Some(samples);
        for (k, e) in self.edges.iter().enumerate() {
            let curve = Curve::from_rows(&e.points)?;
            let (i, j) = (index[&e.source], index[&e.target]);
            let inserted = if on_grid && curve.len() == samples {
                g.insert_sampled_curve(i, j, &curve)
            } else {
                g.insert_curve(i, j, &curve)
            };
            inserted.map_err(|err| Error::Validation(format!("edges[{k}] ({} - {}): {err}", e.source, e.target)))?;
        }
        Ok(g)
    }

    /// Writes every edge's samples in its stored direction. Null nodes added
    /// by padding are written like any other node.
    pub fn from_graph(g: &GraphShape) -> GraphFile {
        let ids: Vec<NodeId> = g.labels().iter().map(|l| NodeId::Name(l.clone())).collect();
        let nodes = (0..g.node_count())
            .map(|k| NodeRecord {
                id: ids[k].clone(),
                pos: g.position(k).map(|p| p.to_vec()),
            })
            .collect();
        let edges = g
            .edges()
            .map(|(i, j, e)| EdgeRecord {
                source: ids[i].clone(),
                target: ids[j].clone(),
                points: e.curve().points().map(|p| p.to_vec()).collect(),
            })
            .collect();
        GraphFile {
            dim: g.dim(),
            nodes,
            edges,
            samples_per_edge: Some(g.samples()),
            metadata: BTreeMap::new(),
        }
    }

    pub fn with_metadata(mut self, metadata: BTreeMap<String, serde_json::Value>) -> Self {
        self.metadata = metadata;
        self
    }

    /// Numeric metadata entry, such as `age`.
    pub fn number(&self, key: &str) -> Option<f64> {
        self.metadata.get(key).and_then(|v| v.as_f64())
    }

    /// String metadata entry, such as `sex` or `group`. Numbers and booleans
    /// are rendered as text.
    pub fn text(&self, key: &str) -> Option<String> {
        match self.metadata.get(key)? {
            serde_json::Value::String(s) => Some(s.clone()),
            serde_json::Value::Null => None,
            v => Some(v.to_string()),
        }
    }
}

fn check_point(p: &[f64], dim: usize) -> std::result::Result<(), String> {
    if p.len() != dim {
        return Err(format!("has {} coordinates, expected {dim}", p.len()));
    }
    if p.iter().any(|v| !v.is_finite()) {
        return Err("non-finite coordinate".into());
    }
    Ok(())
}

/// Records that can check themselves after being read back.
pub trait Validate {
    fn validate(&self) -> Result<()>;
}

impl Validate for GraphFile {
    fn validate(&self) -> Result<()> {
        GraphFile::validate(self)
    }
}

impl Validate for DistanceMatrix {
    fn validate(&self) -> Result<()> {
        DistanceMatrix::validate(self)
    }
}

impl Validate for TestReport {
    fn validate(&self) -> Result<()> {
        TestReport::validate(self)
    }
}

/// Reads and validates a JSON record.
pub fn read_json<T: DeserializeOwned + Validate>(path: &Path) -> Result<T> {
    let text = fs::read_to_string(path).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })?;
    let value: T = serde_json::from_str(&text).map_err(|e| Error::Parse {
        path: path.to_path_buf(),
        message: e.to_string(),
    })?;
    value.validate().map_err(|e| Error::Parse {
        path: path.to_path_buf(),
        message: e.to_string(),
    })?;
    Ok(value)
}

/// Writes a record as pretty-printed JSON. Floats use the shortest text that
/// reads back to the same value, so output is byte-stable across runs.
pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value).map_err(|e| Error::Parse {
        path: path.to_path_buf(),
        message: e.to_string(),
    })?;
    text.push('\n');
    fs::write(path, text).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })
}

/// Loads a JSON graph file on a grid of `samples` points per edge.
pub fn load_graph(path: &Path, samples: usize) -> Result<GraphShape> {
    let file: GraphFile = read_json(path)?;
    file.to_graph(samples).map_err(|e| Error::Parse {
        path: path.to_path_buf(),
        message: e.to_string(),
    })
}

pub fn save_graph(path: &Path, g: &GraphShape) -> Result<()> {
    write_json(path, &GraphFile::from_graph(g))
}

#[derive(Debug, Clone, Copy, PartialEq)]
struct SwcSample {
    id: i64,
    point: [f64; 3],
    parent: i64,
}

fn parse_swc(text: &str, path: &Path) -> Result<Vec<SwcSample>> {
    let bad = |line: usize, message: String| Error::Parse {
        path: path.to_path_buf(),
        message: format!("line {line}: {message}"),
    };
    let mut samples = Vec::new();
    for (k, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let fields: Vec<&str> = line.split_whitespace().collect();
        if fields.len() < 7 {
            return Err(bad(k + 1, format!("expected 7 fields, found {}", fields.len())));
        }
        let int = |s: &str| {
            s.parse::<i64>()
                .map_err(|_| bad(k + 1, format!("`{s}` is not an integer")))
        };
        let real = |s: &str| {
            s.parse::<f64>()
                .ok()
                .filter(|v| v.is_finite())
                .ok_or_else(|| bad(k + 1, format!("`{s}` is not a finite number")))
        };
        samples.push(SwcSample {
            id: int(fields[0])?,
            point: [real(fields[2])?, real(fields[3])?, real(fields[4])?],
            parent: int(fields[6])?,
        });
    }
    Ok(samples)
}

/// Converts SWC text to a graph. Graph nodes are the root, branch points and
/// tips (samples without exactly one child); each edge is the chain of
/// samples between two consecutive graph nodes. Radii and types are dropped.
pub fn swc_to_graph_file(text: &str, path: &Path) -> Result<GraphFile> {
    let samples = parse_swc(text, path)?;
    let fail = |message: String| Error::Parse {
        path: path.to_path_buf(),
        message,
    };
    if samples.is_empty() {
        return Err(fail("no samples".into()));
    }
    let mut index = HashMap::new();
    for (k, s) in samples.iter().enumerate() {
        if index.insert(s.id, k).is_some() {
            return Err(fail(format!("duplicate sample id {}", s.id)));
        }
    }
    let roots: Vec<usize> = (0..samples.len()).filter(|&k| samples[k].parent == -1).collect();
    match roots.len() {
        0 => return Err(fail("no root sample (parent -1)".into())),
        1 => {}
        n => return Err(fail(format!("{n} root samples; expected one"))),
    }
    let mut children = vec![Vec::new(); samples.len()];
    for (k, s) in samples.iter().enumerate() {
        if s.parent == -1 {
            continue;
        }
        let p = *index
            .get(&s.parent)
            .ok_or_else(|| fail(format!("sample {} has unknown parent {}", s.id, s.parent)))?;
        children[p].push(k);
    }
    // every sample must hang off the root; anything left over sits on a cycle
    let root = roots[0];
    let mut seen = vec![false; samples.len()];
    let mut stack = vec![root];
    while let Some(k) = stack.pop() {
        seen[k] = true;
        stack.extend(&children[k]);
    }
    if let Some(k) = seen.iter().position(|s| !s) {
        return Err(fail(format!("sample {} is on a cycle", samples[k].id)));
    }

    let is_node = |k: usize| k == root || children[k].len() != 1;
    let mut node_of = HashMap::new();
    let mut nodes = Vec::new();
    for (k, s) in samples.iter().enumerate() {
        if is_node(k) {
            node_of.insert(k, nodes.len());
            nodes.push(NodeRecord {
                id: NodeId::Int(s.id),
                pos: Some(s.point.to_vec()),
            });
        }
    }
    let mut edges = Vec::new();
    for k in (0..samples.len()).filter(|&k| is_node(k)) {
        for &first in &children[k] {
            let mut points = vec![samples[k].point.to_vec()];
            let mut cur = first;
            while !is_node(cur) {
                points.push(samples[cur].point.to_vec());
                cur = children[cur][0];
            }
            points.push(samples[cur].point.to_vec());
            edges.push(EdgeRecord {
                source: NodeId::Int(samples[k].id),
                target: NodeId::Int(samples[cur].id),
                points,
            });
        }
    }
    let mut metadata = BTreeMap::new();
    if let Some(stem) = path.file_stem().and_then(|s| s.to_str()) {
        metadata.insert("subject".to_string(), serde_json::Value::String(stem.to_string()));
    }
    let file = GraphFile {
        dim: 3,
        nodes,
        edges,
        samples_per_edge: None,
        metadata,
    };
    file.validate().map_err(|e| fail(e.to_string()))?;
    Ok(file)
}

/// Reads an SWC morphology into the graph file format.
pub fn read_swc(path: &Path) -> Result<GraphFile> {
    let text = fs::read_to_string(path).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })?;
    swc_to_graph_file(&text, path)
}

pub fn load_swc(path: &Path, samples: usize) -> Result<GraphShape> {
    read_swc(path)?.to_graph(samples)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Normalization {
    #[default]
    None,
    /// Scale each graph so its edge lengths sum to one.
    TotalLength,
}

/// Settings shared by every command.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub samples_per_edge: usize,
    pub solver: Solver,
    pub schedule: Schedule,
    pub mean_mode: MeanMode,
    pub max_iters: usize,
    /// Minimum fraction of samples carrying an edge for it to be drawn in
    /// the displayed mean.
    pub presence_threshold: f64,
    pub normalization: Normalization,
    pub seed: u64,
    pub n_perm: usize,
    pub output_dir: PathBuf,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            samples_per_edge: 50,
            solver: Solver::Graduated,
            schedule: Schedule::default(),
            mean_mode: MeanMode::Full,
            max_iters: 20,
            presence_threshold: 0.5,
            normalization: Normalization::None,
            seed: 0,
            n_perm: 30000,
            output_dir: PathBuf::from("."),
        }
    }
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<RunConfig> {
        read_json(path)
    }

    pub fn validate(&self) -> Result<()> {
        if !(3..=10_000).contains(&self.samples_per_edge) {
            return Err(Error::Validation(format!(
                "samples_per_edge must be in 3..=10000, got {}",
                self.samples_per_edge
            )));
        }
        if !(0.0..=1.0).contains(&self.presence_threshold) {
            return Err(Error::Validation(format!(
                "presence_threshold must be in [0, 1], got {}",
                self.presence_threshold
            )));
        }
        if self.n_perm < 100 {
            return Err(Error::Validation(format!(
                "n_perm must be at least 100, got {}",
                self.n_perm
            )));
        }
        if !(1..=1000).contains(&self.max_iters) {
            return Err(Error::Validation(format!(
                "max_iters must be in 1..=1000, got {}",
                self.max_iters
            )));
        }
        self.schedule.validate()
    }

    pub fn matching(&self) -> MatchConfig {
        MatchConfig {
            solver: self.solver,
            schedule: self.schedule,
            ..MatchConfig::default()
        }
    }

    pub fn mean(&self) -> MeanConfig {
        MeanConfig {
            mode: self.mean_mode,
            max_iters: self.max_iters,
            matching: self.matching(),
            ..MeanConfig::default()
        }
    }
}

impl Validate for RunConfig {
    fn validate(&self) -> Result<()> {
        RunConfig::validate(self)
    }
}

/// One matched edge pair; an absent side is a null edge.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MatchedEdge {
    pub first: Option<[String; 2]>,
    pub second: Option<[String; 2]>,
    pub distance: f64,
}

/// Output of `dist`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DistReport {
    pub first: String,
    pub second: String,
    pub distance: f64,
    pub solver: Solver,
    /// `permutation[i]` is the node of the (padded) first graph that node `i`
    /// of the padded second graph lands on.
    pub permutation: Vec<usize>,
    pub first_labels: Vec<String>,
    pub second_labels: Vec<String>,
    pub matched_edges: Vec<MatchedEdge>,
}

impl Validate for DistReport {
    fn validate(&self) -> Result<()> {
        let n = self.permutation.len();
        if !self.distance.is_finite() || self.distance < 0.0 {
            return Err(Error::Validation(format!(
                "distance {} is not a valid distance",
                self.distance
            )));
        }
        if self.first_labels.len() != n || self.second_labels.len() != n {
            return Err(Error::Validation(
                "label lists must match the permutation length".into(),
            ));
        }
        let mut seen = vec![false; n];
        for &p in &self.permutation {
            if p >= n || std::mem::replace(&mut seen[p], true) {
                return Err(Error::Validation("permutation is not a bijection".into()));
            }
        }
        let total: f64 = self.matched_edges.iter().map(|e| e.distance * e.distance).sum();
        if self
            .matched_edges
            .iter()
            .any(|e| !e.distance.is_finite() || e.distance < 0.0 || (e.first.is_none() && e.second.is_none()))
        {
            return Err(Error::Validation("malformed matched edge".into()));
        }
        // the distance is the root of twice the summed squared edge distances
        if ((2.0 * total).sqrt() - self.distance).abs() > 1e-6 * self.distance.max(1.0) {
            return Err(Error::Validation("edge distances do not add up to the total".into()));
        }
        Ok(())
    }
}

/// Output of `pca`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScoresTable {
    pub labels: Vec<String>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub metadata: Vec<BTreeMap<String, serde_json::Value>>,
    pub singular_values: Vec<f64>,
    pub variance_explained: Vec<f64>,
    /// One row per sample, one column per retained component.
    pub scores: Vec<Vec<f64>>,
}

impl Validate for ScoresTable {
    fn validate(&self) -> Result<()> {
        if self.scores.len() != self.labels.len() {
            return Err(Error::Validation(format!(
                "{} score rows for {} labels",
                self.scores.len(),
                self.labels.len()
            )));
        }
        if !self.metadata.is_empty() && self.metadata.len() != self.labels.len() {
            return Err(Error::Validation("metadata must have one entry per sample".into()));
        }
        let r = self.scores.first().map_or(0, |row| row.len());
        if self
            .scores
            .iter()
            .any(|row| row.len() != r || row.iter().any(|v| !v.is_finite()))
        {
            return Err(Error::Validation("score rows are ragged or non-finite".into()));
        }
        if self.singular_values.windows(2).any(|w| w[1] > w[0]) || self.singular_values.iter().any(|s| !(*s >= 0.0)) {
            return Err(Error::Validation(
                "singular values must be non-negative and non-increasing".into(),
            ));
        }
        if self.variance_explained.len() != self.singular_values.len()
            || self.variance_explained.iter().any(|v| !(0.0..=1.0 + 1e-12).contains(v))
        {
            return Err(Error::Validation("variance fractions must lie in [0, 1]".into()));
        }
        Ok(())
    }
}

/// Output of `mds`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MdsTable {
    pub labels: Vec<String>,
    pub eigenvalues: Vec<f64>,
    pub coords: Vec<Vec<f64>>,
}

impl Validate for MdsTable {
    fn validate(&self) -> Result<()> {
        let k = self.eigenvalues.len();
        if self.coords.len() != self.labels.len() || self.coords.iter().any(|r| r.len() != k) {
            return Err(Error::Validation(
                "coordinate table does not match labels and dimensions".into(),
            ));
        }
        if self.eigenvalues.iter().any(|v| !(*v >= 0.0)) || self.eigenvalues.windows(2).any(|w| w[1] > w[0]) {
            return Err(Error::Validation(
                "eigenvalues must be non-negative and non-increasing".into(),
            ));
        }
        Ok(())
    }
}

/// Output of `mean` next to the mean graph itself.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MeanSummary {
    pub inputs: Vec<String>,
    pub iterations: usize,
    pub final_variance: f64,
    pub variance_history: Vec<f64>,
    pub stopped_on_increase: bool,
    pub permutations: Vec<Vec<usize>>,
}

impl Validate for MeanSummary {
    fn validate(&self) -> Result<()> {
        if self.permutations.len() != self.inputs.len() {
            return Err(Error::Validation("one permutation per input expected".into()));
        }
        if self.iterations != self.variance_history.len() {
            return Err(Error::Validation(
                "iteration count and variance history disagree".into(),
            ));
        }
        if self.variance_history.windows(2).any(|w| w[1] > w[0] + 1e-9) {
            return Err(Error::Validation("variance history increases".into()));
        }
        if !(self.final_variance >= 0.0) {
            return Err(Error::Validation("final variance must be non-negative".into()));
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p() -> &'static Path {
        Path::new("test.swc")
    }

    #[test]
    fn unbranched_chain() {
        let f = swc_to_graph_file("1 1 0 0 0 1 -1\n2 3 1 0 0 1 1\n3 3 2 0 0 1 2\n", p()).unwrap();
        assert_eq!(f.nodes.len(), 2);
        assert_eq!(f.edges.len(), 1);
        assert_eq!(f.edges[0].points.len(), 3);
    }

    #[test]
    fn y_shaped_tree() {
        let text = "# comment\n1 1 0 0 0 1 -1\n2 3 0 1 0 1 1\n3 3 -1 2 0 1 2\n4 3 1 2 0 1 2\n5 3 1 3 0 1 4\n";
        let f = swc_to_graph_file(text, p()).unwrap();
        assert_eq!(f.nodes.len(), 4);
        assert_eq!(f.edges.len(), 3);
        assert_eq!(f.metadata["subject"], "test");
    }

    #[test]
    fn swc_structure_errors() {
        let two_roots = "1 1 0 0 0 1 -1\n2 1 1 0 0 1 -1\n";
        let orphan = "1 1 0 0 0 1 -1\n2 1 1 0 0 1 7\n";
        let cycle = "1 1 0 0 0 1 -1\n2 1 1 0 0 1 3\n3 1 2 0 0 1 2\n";
        let short = "1 1 0 0 0 -1\n";
        for text in [two_roots, orphan, cycle, short] {
            assert!(swc_to_graph_file(text, p()).is_err(), "{text}");
        }
    }

    #[test]
    fn graph_file_rejections() {
        let base = r#"{"dim": 2, "nodes": [{"id": "a"}, {"id": 1}],
            "edges": [{"source": "a", "target": 1, "points": [[0, 0], [1, 0]]}]}"#;
        let f: GraphFile = serde_json::from_str(base).unwrap();
        f.validate().unwrap();

        let mut looped = f.clone();
        looped.edges[0].target = NodeId::Name("a".into());
        let msg = looped.validate().unwrap_err().to_string();
        assert!(msg.contains("edges[0]") && msg.contains("self-loop"), "{msg}");

        let mut dup = f.clone();
        dup.edges.push(EdgeRecord {
            source: NodeId::Int(1),
            target: NodeId::Name("a".into()),
            points: vec![vec![0.0, 0.0], vec![0.0, 1.0]],
        });
        assert!(dup.validate().unwrap_err().to_string().contains("duplicate"));

        let mut dangling = f.clone();
        dangling.edges[0].target = NodeId::Int(9);
        assert!(dangling.validate().unwrap_err().to_string().contains("unknown node 9"));

        let mut short = f;
        short.edges[0].points.truncate(1);
        assert!(short.validate().is_err());
    }

    #[test]
    fn straight_edge_has_constant_srvf() {
        let f: GraphFile = serde_json::from_str(
            r#"{"dim": 2, "nodes": [{"id": 0}, {"id": 1}],
                "edges": [{"source": 0, "target": 1, "points": [[0, 0], [0.3, 0], [1, 0]]}]}"#,
        )
        .unwrap();
        let g = f.to_graph(20).unwrap();
        assert_eq!(g.edge_count(), 1);
        let (_, _, e) = g.edges().next().unwrap();
        for row in e.srvf().rows() {
            assert!((row[0] - 1.0).abs() <= 1e-12 && row[1].abs() <= 1e-12);
        }
    }

    #[test]
    fn config_ranges() {
        RunConfig::default().validate().unwrap();
        let bad = RunConfig {
            presence_threshold: 1.5,
            ..RunConfig::default()
        };
        assert!(bad.validate().is_err());
        let parsed: RunConfig = serde_json::from_str(r#"{"samples_per_edge": 30, "solver": "spectral"}"#).unwrap();
        assert_eq!(parsed.samples_per_edge, 30);
        assert_eq!(parsed.solver, Solver::Spectral);
        assert!(serde_json::from_str::<RunConfig>(r#"{"samples": 30}"#).is_err());
    }
}
