#![allow(dead_code)]

use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use elastic_graphs::curve::Curve;
use elastic_graphs::graph::permute;
use elastic_graphs::io::{write_json, GraphFile};
use elastic_graphs::{GraphShape, Permutation};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_elastic-graphs"))
}

pub fn run(args: &[&str]) -> Output {
    bin().args(args).output().unwrap()
}

pub fn swc_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../core/tests/data/swc")
}

pub fn swc_files() -> Vec<PathBuf> {
    let mut files: Vec<PathBuf> = std::fs::read_dir(swc_dir())
        .unwrap()
        .map(|e| e.unwrap().path())
        .filter(|p| p.extension().is_some_and(|e| e == "swc"))
        .collect();
    files.sort();
    files
}

/// Positions of the main-branch nodes. Edge lengths differ so that the branch
/// has no end-to-end symmetry.
const MAIN: [[f64; 2]; 4] = [[0.0, 0.0], [1.4, 0.1], [2.2, 0.6], [2.45, 1.05]];
const MAIN_BEND: [f64; 3] = [0.12, -0.08, 0.15];
pub const ROLES: [&str; 6] = ["root", "b1", "b2", "tip", "s1", "s2"];
pub const MAIN_EDGES: [(usize, usize); 3] = [(0, 1), (1, 2), (2, 3)];

fn arc(from: [f64; 2], to: [f64; 2], bend: f64, samples: usize) -> Curve {
    let (dx, dy) = (to[0] - from[0], to[1] - from[1]);
    Curve::sample(samples, move |t| {
        let b = bend * (PI * t).sin();
        [from[0] + t * dx - b * dy, from[1] + t * dy + b * dx]
    })
    .unwrap()
}

/// The shared main-branch edge between main nodes `k` and `k + 1`.
pub fn main_edge(k: usize, samples: usize) -> Curve {
    arc(MAIN[k], MAIN[k + 1], MAIN_BEND[k], samples)
}

/// Tree with the common main branch (nodes 0-3) and two side edges ending
/// at nodes 4 and 5, whose angle, length and bend vary from sample to
/// sample. Nodes are labelled by their role.
pub fn canonical_tree(rng: &mut ChaCha8Rng, samples: usize) -> GraphShape {
    let labels = ROLES.map(String::from).to_vec();
    let mut g = GraphShape::new(6, 2, samples).unwrap().with_labels(labels).unwrap();
    for (k, &(i, j)) in MAIN_EDGES.iter().enumerate() {
        g.insert_curve(i, j, &main_edge(k, samples)).unwrap();
    }
    for (node, base, angle, reach) in [(1usize, 4usize, 1.9f64, 0.55..0.8), (2, 5, -1.2, 0.25..0.4)] {
        let a = angle + rng.random_range(-0.3..0.3);
        let len = rng.random_range(reach);
        let from = MAIN[node];
        let to = [from[0] + len * a.cos(), from[1] + len * a.sin()];
        let bend = rng.random_range(-0.25..0.25);
        g.insert_curve(node, base, &arc(from, to, bend, samples)).unwrap();
    }
    for (k, p) in MAIN.iter().enumerate() {
        g.set_position(k, p.to_vec()).unwrap();
    }
    g
}

/// A simulated tree with its node order shuffled.
pub fn simulated_tree(rng: &mut ChaCha8Rng, samples: usize) -> GraphShape {
    let g = canonical_tree(rng, samples);
    let mut m: Vec<usize> = (0..6).collect();
    m.shuffle(rng);
    permute(&Permutation::new(m).unwrap(), &g).unwrap()
}

pub fn write_graph(path: &Path, g: &GraphShape, metadata: &[(&str, serde_json::Value)]) {
    let meta: BTreeMap<String, serde_json::Value> = metadata.iter().map(|(k, v)| (k.to_string(), v.clone())).collect();
    write_json(path, &GraphFile::from_graph(g).with_metadata(meta)).unwrap();
}
