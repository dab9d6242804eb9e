use super::{
    apply_reparam, optimal_reparam, optimal_rotation, recover_curve, refine_reparam, srvf, Curve, Reparam, Rotation,
    Srvf,
};
use crate::error::{Error, Result};

const WARP_SMOOTHING_PASSES: [usize; 3] = [2, 8, 32];
const REFINE_ITERATIONS: usize = 100;
const POLISH_STEPS: usize = 25;
const POLISH_ITERATIONS: usize = 10;

/// Controls the rotation/reparameterization alternation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AlignOptions {
    pub max_rounds: usize,
    /// A step is kept only when it lowers the distance by at least this much.
    pub tolerance: f64,
    /// Also try the second curve traversed backwards.
    pub try_reversal: bool,
    /// Polish each lattice warp by gradient steps. Without it the lattice
    /// warp is only smoothed, which is several times faster.
    pub refine: bool,
}

impl Default for AlignOptions {
    fn default() -> Self {
        AlignOptions {
            max_rounds: 10,
            tolerance: 1e-8,
            try_reversal: true,
            refine: true,
        }
    }
}

impl AlignOptions {
    /// Two rounds without gradient polish.
    pub fn coarse() -> Self {
        AlignOptions {
            max_rounds: 2,
            refine: false,
            ..AlignOptions::default()
        }
    }
}

/// `q2` moved onto `q1` by rotation, reparameterization and optionally reversal.
#[derive(Debug, Clone)]
pub struct Alignment {
    pub aligned: Srvf,
    pub distance: f64,
    pub reversed: bool,
    pub rotation: Rotation,
    /// The warp applied to the (possibly reversed, rotated) input.
    pub gamma: Reparam,
    pub rounds: usize,
}

impl Alignment {
    /// `⟨q1, aligned⟩` for the `q1` this alignment was computed against.
    pub fn inner(&self, q1: &Srvf) -> f64 {
        q1.inner(&self.aligned)
    }
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
    Ok(())
}

struct Oriented {
    aligned: Srvf,
    distance: f64,
    rotation: Rotation,
    gamma: Reparam,
    rounds: usize,
}

fn align_oriented(q1: &Srvf, start: Srvf, opts: &AlignOptions) -> Result<Oriented> {
    // Warps are tracked as one accumulated map applied to the rotated input,
    // so interpolation error does not pile up across rounds.
    let mut rotation = Rotation::identity(q1.dim());
    let mut gamma = Reparam::identity(q1.len());
    let mut current = start.clone();
    let mut distance = q1.l2_distance(&current);
    let mut rounds = 0;
    while rounds < opts.max_rounds {
        rounds += 1;
        let mut improved = false;

        let o = optimal_rotation(q1, &current)?.compose(&rotation);
        let candidate = apply_reparam(&start.rotated(&o), &gamma)?;
        let d = q1.l2_distance(&candidate);
        if d < distance - opts.tolerance {
            current = candidate;
            distance = d;
            rotation = o;
            improved = true;
        }

        // The lattice path has piecewise-constant slopes, which leave a
        // grid-scale ripple in sqrt(γ'). Smooth it, then polish by gradient.
        // The lattice only offers slopes in [1/3, 3], so the new warp is
        // composed onto the current one to reach steeper warps over rounds.
        let rotated = start.rotated(&rotation);
        let lattice = optimal_reparam(q1, &current)?;
        let mut best: Option<(Reparam, f64)> = None;
        for passes in WARP_SMOOTHING_PASSES {
            let composed = gamma.compose(&lattice.smoothed(passes));
            let d = q1.l2_distance(&apply_reparam(&rotated, &composed)?);
            if best.as_ref().is_none_or(|(_, b)| d < *b) {
                best = Some((composed, d));
            }
        }
        if let Some((composed, _)) = best {
            let refined = if opts.refine {
                refine_reparam(q1, &rotated, &composed, REFINE_ITERATIONS)?
            } else {
                composed
            };
            let candidate = apply_reparam(&rotated, &refined)?;
            let d = q1.l2_distance(&candidate);
            if d < distance - opts.tolerance {
                current = candidate;
                distance = d;
                gamma = refined;
                improved = true;
            }
        }

        // Cheap coupled polish: Procrustes against the current warp, then a
        // short gradient refinement from the current warp, without a new DP.
        for _ in 0..if opts.refine { POLISH_STEPS } else { 0 } {
            let o = optimal_rotation(q1, &current)?.compose(&rotation);
            let rotated = start.rotated(&o);
            let refined = refine_reparam(q1, &rotated, &gamma, POLISH_ITERATIONS)?;
            let candidate = apply_reparam(&rotated, &refined)?;
            let d = q1.l2_distance(&candidate);
            if d >= distance - opts.tolerance {
                break;
            }
            current = candidate;
            distance = d;
            rotation = o;
            gamma = refined;
            improved = true;
        }

        if !improved {
            break;
        }
    }
    Ok(Oriented {
        aligned: current,
        distance,
        rotation,
        gamma,
        rounds,
    })
}

/// Aligns `q2` to `q1`, alternating optimal rotation and optimal
/// reparameterization. Each candidate step is kept only if it lowers
/// `‖q1 − q̃2‖`, so the result never does worse than the unaligned input.
///
/// Null inputs are not moved: aligning to a null `q1` returns `q2` unchanged.
pub fn align(q1: &Srvf, q2: &Srvf, opts: &AlignOptions) -> Result<Alignment> {
    check_pair(q1, q2)?;
    let dim = q1.dim();
    if q1.is_zero() || q2.is_zero() {
        return Ok(Alignment {
            aligned: q2.clone(),
            distance: q1.l2_distance(q2),
            reversed: false,
            rotation: Rotation::identity(dim),
            gamma: Reparam::identity(q1.len()),
            rounds: 0,
        });
    }
    one_way(q1, q2, opts)
}

fn one_way(q1: &Srvf, q2: &Srvf, opts: &AlignOptions) -> Result<Alignment> {
    let o = align_oriented(q1, q2.clone(), opts)?;
    let mut best = Alignment {
        aligned: o.aligned,
        distance: o.distance,
        reversed: false,
        rotation: o.rotation,
        gamma: o.gamma,
        rounds: o.rounds,
    };
    if opts.try_reversal {
        let o = align_oriented(q1, q2.reversed(), opts)?;
        if o.distance < best.distance - opts.tolerance {
            best = Alignment {
                aligned: o.aligned,
                distance: o.distance,
                reversed: true,
                rotation: o.rotation,
                gamma: o.gamma,
                rounds: o.rounds,
            };
        }
    }
    Ok(best)
}

/// Elastic shape distance between two SRVFs, symmetrized by taking the
/// smaller of the two alignment directions. Null edges use `d(0, q) = ‖q‖`.
pub fn srvf_distance(q1: &Srvf, q2: &Srvf) -> Result<f64> {
    let opts = AlignOptions::default();
    let forward = align(q1, q2, &opts)?.distance;
    let backward = align(q2, q1, &opts)?.distance;
    Ok(forward.min(backward))
}

/// Shape distance `d_s` between two curves.
///
/// Both curves are first resampled by arc length to a common grid (the larger
/// of the two sample counts), which removes any parameterization the samples
/// carry before the elastic alignment runs.
pub fn shape_distance(c1: &Curve, c2: &Curve) -> Result<f64> {
    if c1.dim() != c2.dim() {
        return Err(Error::DimensionMismatch {
            expected: c1.dim(),
            found: c2.dim(),
        });
    }
    let samples = c1.len().max(c2.len());
    let q1 = srvf(&c1.resample(samples)?);
    let q2 = srvf(&c2.resample(samples)?);
    srvf_distance(&q1, &q2)
}

/// Edge affinity `sup_{O,γ} ⟨q1, O (q2 ∘ γ) sqrt(γ')⟩`; exactly zero when
/// either edge is null.
pub fn edge_inner_product(q1: &Srvf, q2: &Srvf) -> Result<f64> {
    edge_inner_product_with(q1, q2, &AlignOptions::default())
}

/// [`edge_inner_product`] with explicit alignment options.
pub fn edge_inner_product_with(q1: &Srvf, q2: &Srvf, opts: &AlignOptions) -> Result<f64> {
    check_pair(q1, q2)?;
    if q1.is_zero() || q2.is_zero() {
        return Ok(0.0);
    }
    let a = align(q1, q2, opts)?;
    Ok(a.inner(q1))
}

/// Uniform-speed path from `c1` to `c2` in open-curve shape space.
///
/// `q2` is aligned to `q1`, then the SRVFs are interpolated linearly and each
/// intermediate curve is integrated from the interpolated start point.
pub fn curve_geodesic(c1: &Curve, c2: &Curve, steps: usize) -> Result<Vec<Curve>> {
    if steps < 2 {
        return Err(Error::invalid("a geodesic needs at least 2 steps"));
    }
    if c1.dim() != c2.dim() || c1.len() != c2.len() {
        return Err(Error::SizeMismatch(
            "geodesic endpoints must share grid size and dimension".into(),
        ));
    }
    let q1 = srvf(c1);
    let q2 = srvf(c2);
    let alignment = align(&q1, &q2, &AlignOptions::default())?;
    let end_start = if alignment.reversed {
        c2.point(c2.len() - 1)
    } else {
        c2.start()
    };
    let mut path = Vec::with_capacity(steps);
    for s in 0..steps {
        let t = s as f64 / (steps - 1) as f64;
        let q = q1.lerp(&alignment.aligned, t);
        let start: Vec<f64> = c1
            .start()
            .iter()
            .zip(end_start)
            .map(|(a, b)| (1.0 - t) * a + t * b)
            .collect();
        path.push(recover_curve(&q, &start)?);
    }
    Ok(path)
}
