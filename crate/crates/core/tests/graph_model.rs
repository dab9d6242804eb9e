mod common;

use common::{random_graph, random_permutation, rng};
use elastic_graphs::curve::{srvf_distance, Curve, Srvf};
use elastic_graphs::graph::{
    align_edges, pad, permute, pre_shape_distance, pre_shape_geodesic, total_length_normalize,
};
use elastic_graphs::{GraphShape, Permutation};

/// Literal double sum over ordered node pairs, null edges as zero SRVFs.
fn ordered_pair_sum(a1: &GraphShape, a2: &GraphShape) -> f64 {
    let n = a1.node_count();
    let zero = Srvf::zeros(a1.samples(), a1.dim());
    let mut total = 0.0;
    for i in 0..n {
        for j in 0..n {
            let q1 = a1.edge(i, j).map(|e| e.srvf()).unwrap_or(&zero);
            let q2 = a2.edge(i, j).map(|e| e.srvf()).unwrap_or(&zero);
            let d = srvf_distance(q1, q2).unwrap();
            total += d * d;
        }
    }
    total.sqrt()
}

#[test]
fn distance_to_self_is_zero() {
    let g = random_graph(&mut rng(1), 5, 0.5, 20);
    assert_eq!(pre_shape_distance(&g, &g).unwrap(), 0.0);
}

#[test]
fn distance_equals_ordered_pair_sum() {
    let mut r = rng(2);
    for _ in 0..3 {
        let a1 = random_graph(&mut r, 4, 0.6, 20);
        let a2 = random_graph(&mut r, 4, 0.6, 20);
        let d = pre_shape_distance(&a1, &a2).unwrap();
        assert!((d - ordered_pair_sum(&a1, &a2)).abs() <= 1e-12);
    }
}

#[test]
fn distance_needs_equal_sizes() {
    let mut r = rng(3);
    let a1 = random_graph(&mut r, 4, 0.5, 20);
    let a2 = random_graph(&mut r, 5, 0.5, 20);
    assert!(pre_shape_distance(&a1, &a2).is_err());
}

#[test]
fn permutation_action_laws() {
    let mut r = rng(4);
    for _ in 0..10 {
        let g = random_graph(&mut r, 5, 0.5, 12);
        assert_eq!(permute(&Permutation::identity(5), &g).unwrap(), g);
        let p1 = random_permutation(&mut r, 5);
        let p2 = random_permutation(&mut r, 5);
        let once = permute(&p2.compose(&p1), &g).unwrap();
        let twice = permute(&p2, &permute(&p1, &g).unwrap()).unwrap();
        assert_eq!(once, twice);
    }
}

#[test]
fn permutation_is_an_isometry() {
    let mut r = rng(5);
    for _ in 0..20 {
        let a1 = random_graph(&mut r, 5, 0.5, 20);
        let a2 = random_graph(&mut r, 5, 0.5, 20);
        let p = random_permutation(&mut r, 5);
        let before = pre_shape_distance(&a1, &a2).unwrap();
        let after = pre_shape_distance(&permute(&p, &a1).unwrap(), &permute(&p, &a2).unwrap()).unwrap();
        assert_eq!(before, after);
    }
}

#[test]
fn padding_is_neutral() {
    let mut r = rng(6);
    let a1 = random_graph(&mut r, 4, 0.6, 20);
    let a2 = random_graph(&mut r, 4, 0.6, 20);
    let padded = pad(&a1, 3);
    assert_eq!(padded.node_count(), 7);
    assert_eq!(padded.edge_count(), a1.edge_count());
    assert_eq!(
        pre_shape_distance(&pad(&a1, 3), &pad(&a2, 3)).unwrap(),
        pre_shape_distance(&a1, &a2).unwrap()
    );
}

#[test]
fn geodesic_between_equal_graphs_is_constant() {
    let g = random_graph(&mut rng(7), 4, 0.6, 20);
    let path = pre_shape_geodesic(&g, &g, 5).unwrap();
    for step in &path.steps {
        assert!(pre_shape_distance(step, &g).unwrap() <= 1e-6);
    }
}

#[test]
fn geodesic_endpoints_and_length() {
    let mut r = rng(8);
    let a1 = random_graph(&mut r, 4, 0.7, 20);
    let a2 = random_graph(&mut r, 4, 0.7, 20);
    let path = pre_shape_geodesic(&a1, &a2, 21).unwrap();
    assert_eq!(path.steps.len(), 21);
    assert_eq!(path.steps[0], a1);
    let last = &path.steps[20];
    let registered = align_edges(&a1, &a2).unwrap();
    for (i, j) in (0..4).flat_map(|i| (i + 1..4).map(move |j| (i, j))) {
        let edge_d = |g: &GraphShape| match (last.edge(i, j), g.edge(i, j)) {
            (Some(x), Some(y)) => srvf_distance(x.srvf(), y.srvf()).unwrap(),
            (None, None) => 0.0,
            _ => panic!("edge ({i}, {j}) lost along the path"),
        };
        assert!(edge_d(&registered) <= 1e-6);
        // Undoing a warp on the grid is not exact.
        assert!(edge_d(&a2) <= 1e-2);
    }
    let total = pre_shape_distance(&a1, &a2).unwrap();
    let walked: f64 = path
        .steps
        .windows(2)
        .map(|w| pre_shape_distance(&w[0], &w[1]).unwrap())
        .sum();
    assert!(
        (walked - total).abs() <= 0.02 * total,
        "walked {walked}, direct {total}"
    );
}

#[test]
fn length_normalization() {
    let mut g = GraphShape::new(2, 2, 30).unwrap();
    g.insert_curve(0, 1, &Curve::sample(30, |t| [t, 0.0]).unwrap()).unwrap();
    let n = total_length_normalize(&g).unwrap();
    for (a, b) in n
        .edge(0, 1)
        .unwrap()
        .curve()
        .points()
        .zip(g.edge(0, 1).unwrap().curve().points())
    {
        assert!((a[0] - b[0]).abs() <= 1e-12 && (a[1] - b[1]).abs() <= 1e-12);
    }

    let mut r = rng(9);
    let g = random_graph(&mut r, 5, 0.6, 25);
    let n = total_length_normalize(&g).unwrap();
    assert!((n.total_length() - 1.0).abs() <= 1e-8);
    let n7 = total_length_normalize(&g.scaled(7.0).unwrap()).unwrap();
    assert!(pre_shape_distance(&n, &n7).unwrap() <= 1e-8);
    for ((_, _, a), (_, _, b)) in n.edges().zip(n7.edges()) {
        for (x, y) in a.curve().as_slice().iter().zip(b.curve().as_slice()) {
            assert!((x - y).abs() <= 1e-12);
        }
    }
}

#[test]
fn metric_axioms_on_small_graphs() {
    let mut r = rng(10);
    for _ in 0..5 {
        let g: Vec<GraphShape> = (0..3).map(|_| random_graph(&mut r, 4, 0.6, 20)).collect();
        let d = |i: usize, j: usize| pre_shape_distance(&g[i], &g[j]).unwrap();
        assert!(d(0, 1) >= 0.0);
        assert!((d(0, 1) - d(1, 0)).abs() <= 1e-6);
        assert!(d(0, 2) <= d(0, 1) + d(1, 2) + 1e-2);
    }
}
