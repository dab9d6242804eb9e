use std::f64::consts::PI;

use elastic_graphs::curve::{
    align, apply_reparam, curve_geodesic, edge_inner_product, lattice_moves, optimal_reparam_with_score,
    optimal_rotation, recover_curve, refine_reparam, segment_score, shape_distance, srvf, AlignOptions, Curve, Reparam,
    Rotation, Srvf,
};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Every monotone lattice path built from the DP move set, scored by summing
/// segment scores in path order.
fn brute_force_best(q1: &Srvf, q2: &Srvf) -> f64 {
    fn walk(q1: &Srvf, q2: &Srvf, at: (usize, usize), acc: f64, end: usize, best: &mut f64) {
        if at == (end, end) {
            *best = best.max(acc);
            return;
        }
        for &(di, dj) in lattice_moves() {
            let next = (at.0 + di, at.1 + dj);
            if next.0 > end || next.1 > end {
                continue;
            }
            let score = acc + segment_score(q1, q2, at, next);
            walk(q1, q2, next, score, end, best);
        }
    }
    let mut best = f64::NEG_INFINITY;
    walk(q1, q2, (0, 0), 0.0, q1.len() - 1, &mut best);
    best
}

fn random_smooth(rng: &mut ChaCha8Rng, samples: usize) -> Curve {
    let a: [f64; 6] = std::array::from_fn(|_| rng.random_range(-0.4..0.4));
    Curve::sample(samples, move |t| {
        [
            t + a[0] * (PI * t).sin() + a[1] * (2.0 * PI * t).sin(),
            a[2] * (PI * t).sin() + a[3] * (2.0 * PI * t).cos() + a[4] * t * t,
            a[5] * (3.0 * t).sin(),
        ]
    })
    .unwrap()
}

fn random_rotation(rng: &mut ChaCha8Rng) -> Rotation {
    let axis = [
        rng.random_range(-1.0..1.0),
        rng.random_range(-1.0..1.0),
        rng.random_range(0.1..1.0),
    ];
    Rotation::axis_angle(axis, rng.random_range(-PI..PI))
}

#[test]
fn dp_matches_exhaustive_path_search() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for samples in 2..=8 {
        for _ in 0..5 {
            let q1 = srvf(&random_smooth(&mut rng, samples));
            let q2 = srvf(&random_smooth(&mut rng, samples));
            let (_, dp, path) = optimal_reparam_with_score(&q1, &q2).unwrap();
            let brute = brute_force_best(&q1, &q2);
            assert_eq!(dp, brute, "T = {samples}");
            let replay = path
                .windows(2)
                .fold(0.0, |acc, w| acc + segment_score(&q1, &q2, w[0], w[1]));
            assert_eq!(replay, dp);
        }
    }
}

#[test]
fn dp_on_six_point_grid_equals_enumeration() {
    let q1 = srvf(&Curve::sample(6, |t| [t, t * t]).unwrap());
    let q2 = srvf(&Curve::sample(6, |t| [t.powi(3), t]).unwrap());
    let (_, dp, _) = optimal_reparam_with_score(&q1, &q2).unwrap();
    assert_eq!(dp, brute_force_best(&q1, &q2));
}

#[test]
fn recovers_known_warp() {
    // β∘γ₀ with γ₀(t) = t², then check the residual after alignment.
    let beta = |t: f64| [t + 0.2 * (PI * t).sin(), 0.3 * (2.0 * PI * t).sin()];
    let c1 = Curve::sample(50, beta).unwrap();
    let c2 = Curve::sample(50, |t| beta(t * t)).unwrap();
    let before = srvf(&c1).l2_distance(&srvf(&c2));
    let after = shape_distance(&c1, &c2).unwrap();
    assert!(after <= 5e-2, "before {before}, after {after}");
    assert!(after < before);
}

/// Dense oracle: rotations on a 0.5° grid, each followed by one DP warp and
/// its gradient polish, for both orientations and both argument orders.
fn dense_distance(q1: &Srvf, q2: &Srvf) -> f64 {
    let mut best = f64::INFINITY;
    for (a, b) in [(q1, q2), (q2, q1)] {
        for cand in [b.clone(), b.reversed()] {
            for step in 0..720 {
                let r = Rotation::planar((step as f64 * 0.5).to_radians());
                let rotated = cand.rotated(&r);
                let (gamma, _, _) = optimal_reparam_with_score(a, &rotated).unwrap();
                best = best.min(a.l2_distance(&rotated));
                for passes in [0, 2, 8, 32] {
                    let polished = refine_reparam(a, &rotated, &gamma.smoothed(passes), 100).unwrap();
                    let warped = apply_reparam(&rotated, &polished).unwrap();
                    best = best.min(a.l2_distance(&warped));
                }
            }
        }
    }
    best
}

#[test]
fn segment_versus_semicircle_agrees_with_dense_search() {
    let segment = Curve::sample(50, |t| [t, 0.0]).unwrap();
    let arc = Curve::sample(50, |t| {
        let r = 1.0 / PI;
        [r * (PI * t).cos(), r * (PI * t).sin()]
    })
    .unwrap();
    assert!((arc.length() - 1.0).abs() < 1e-3);
    let fast = shape_distance(&segment, &arc).unwrap();
    let dense = dense_distance(&srvf(&segment), &srvf(&arc));
    assert!((fast - dense).abs() <= 1e-2, "fast {fast}, dense {dense}");
}

#[test]
fn affinity_of_rotated_warped_copy() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let q1 = srvf(&random_smooth(&mut rng, 50));
    let gamma = Reparam::new(
        (0..50)
            .map(|k| {
                let t = k as f64 / 49.0;
                if k == 49 {
                    1.0
                } else {
                    t + 0.1 * (PI * t).sin() * t
                }
            })
            .collect(),
    )
    .unwrap();
    let q2 = apply_reparam(&q1, &gamma).unwrap().rotated(&random_rotation(&mut rng));
    let k = edge_inner_product(&q1, &q2).unwrap();
    assert!((k - q1.norm_squared()).abs() <= 1e-2, "k {k} vs {}", q1.norm_squared());
}

#[test]
fn rotation_recovers_known_matrix() {
    let q1 = srvf(&Curve::sample(50, |t| [t, 0.2 * (5.0 * t).sin()]).unwrap());
    let r = Rotation::planar(PI / 6.0);
    let o = optimal_rotation(&q1, &q1.rotated(&r.transpose())).unwrap();
    assert!((o.matrix() - r.matrix()).amax() <= 1e-8);
}

#[test]
fn twenty_pairs_symmetric_and_invariant() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for _ in 0..20 {
        let c1 = random_smooth(&mut rng, 50);
        let c2 = random_smooth(&mut rng, 50);
        let d12 = shape_distance(&c1, &c2).unwrap();
        let d21 = shape_distance(&c2, &c1).unwrap();
        assert!((d12 - d21).abs() <= 1e-3);

        let o = random_rotation(&mut rng);
        let power = rng.random_range(0.7..1.4);
        let moved = Curve::sample(50, |t| {
            let s = t.powf(power);
            let k = s * 49.0;
            let lo = (k.floor() as usize).min(48);
            let f = k - lo as f64;
            let (a, b) = (c2.point(lo), c2.point(lo + 1));
            [
                a[0] + f * (b[0] - a[0]),
                a[1] + f * (b[1] - a[1]),
                a[2] + f * (b[2] - a[2]),
            ]
        })
        .unwrap()
        .rotated(&o)
        .translated(&[1.0, -2.0, 0.5]);
        let d_moved = shape_distance(&c1, &moved).unwrap();
        assert!((d_moved - d12).abs() <= 5e-2, "{d12} vs {d_moved}");
    }
}

#[test]
fn triangle_inequality_on_random_triples() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for _ in 0..10 {
        let c: Vec<Curve> = (0..3).map(|_| random_smooth(&mut rng, 30)).collect();
        let d = |i: usize, j: usize| shape_distance(&c[i], &c[j]).unwrap();
        assert!(d(0, 2) <= d(0, 1) + d(1, 2) + 1e-2);
        assert!(d(0, 1) <= d(0, 2) + d(2, 1) + 1e-2);
        assert!(d(1, 2) <= d(1, 0) + d(0, 2) + 1e-2);
    }
}

#[test]
fn geodesic_distance_grows_along_path() {
    let mut rng = ChaCha8Rng::seed_from_u64(21);
    let c1 = random_smooth(&mut rng, 50);
    let c2 = random_smooth(&mut rng, 50);
    let path = curve_geodesic(&c1, &c2, 11).unwrap();
    let dist: Vec<f64> = path.iter().map(|p| shape_distance(p, &c1).unwrap()).collect();
    for w in dist.windows(2) {
        assert!(w[1] >= w[0], "{dist:?}");
    }
}

#[test]
fn geodesic_endpoints_match_alignment() {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let c1 = random_smooth(&mut rng, 50).resample(50).unwrap();
    let c2 = random_smooth(&mut rng, 50).resample(50).unwrap();
    let path = curve_geodesic(&c1, &c2, 4).unwrap();
    let q1 = srvf(&c1);
    let a = align(&q1, &srvf(&c2), &AlignOptions::default()).unwrap();
    let first = recover_curve(&q1, c1.start()).unwrap();
    assert_eq!(path[0], first);
    let last = recover_curve(&a.aligned, path[3].start()).unwrap();
    assert_eq!(path[3], last);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn translation_leaves_srvf_unchanged(
        a in -1.0f64..1.0, b in -1.0f64..1.0, dx in -50.0f64..50.0, dy in -50.0f64..50.0
    ) {
        let c = Curve::sample(30, |t| [t + a * t * t, b * (3.0 * t).sin()]).unwrap();
        let q = srvf(&c);
        let moved = srvf(&c.translated(&[dx, dy]));
        prop_assert!(q.l2_distance(&moved) <= 1e-9 * (1.0 + dx.abs() + dy.abs()));
    }

    #[test]
    fn distance_is_nonnegative_and_reflexive(a in -1.0f64..1.0, b in -1.0f64..1.0) {
        let c1 = Curve::sample(20, |t| [t, a * t * t]).unwrap();
        let c2 = Curve::sample(20, |t| [t, b * (2.0 * t).sin()]).unwrap();
        prop_assert!(shape_distance(&c1, &c2).unwrap() >= 0.0);
        prop_assert!(shape_distance(&c1, &c1).unwrap() == 0.0);
    }
}
