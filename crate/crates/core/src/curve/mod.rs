//! Elastic shape analysis of open curves.
//!
//! Curves are sampled on a uniform grid over `[0, 1]` and encoded by their
//! square-root velocity function (SRVF) `q = β' / sqrt(|β'|)`. Under this
//! encoding the elastic metric becomes the plain L2 metric, so shape distances
//! reduce to L2 distances after optimal rotation and reparameterization.

mod align;
mod reparam;
mod rotation;

pub use align::{
    align, curve_geodesic, edge_inner_product, edge_inner_product_with, shape_distance, srvf_distance, AlignOptions,
    Alignment,
};
pub use reparam::{
    apply_reparam, lattice_moves, optimal_reparam, optimal_reparam_with_score, refine_reparam, segment_score, Reparam,
};
pub use rotation::{optimal_rotation, Rotation};

use crate::error::{Error, Result};

/// Grid size used for every edge unless configured otherwise.
pub const DEFAULT_SAMPLES: usize = 50;

/// Relative threshold below which the local speed counts as zero.
const SPEED_EPSILON: f64 = 1e-8;

/// Sample points of a parameterized curve, stored row-major as `len × dim`.
#[derive(Debug, Clone, PartialEq)]
pub struct Curve {
    points: Vec<f64>,
    dim: usize,
}

/// Square-root velocity function sampled on the same uniform grid as its curve.
#[derive(Debug, Clone, PartialEq)]
pub struct Srvf {
    values: Vec<f64>,
    dim: usize,
}

fn check_rows(data: &[f64], dim: usize, what: &str) -> Result<()> {
    if dim == 0 {
        return Err(Error::invalid(format!("{what} dimension must be positive")));
    }
    if !data.len().is_multiple_of(dim) {
        return Err(Error::invalid(format!(
            "{what} has {} values, not a multiple of dimension {dim}",
            data.len()
        )));
    }
    if data.len() / dim < 2 {
        return Err(Error::invalid(format!("{what} needs at least 2 samples")));
    }
    if data.iter().any(|v| !v.is_finite()) {
        return Err(Error::invalid(format!("{what} has non-finite coordinates")));
    }
    Ok(())
}

impl Curve {
    pub fn new(points: Vec<f64>, dim: usize) -> Result<Self> {
        check_rows(&points, dim, "curve")?;
        Ok(Curve { points, dim })
    }

    pub fn from_rows<R: AsRef<[f64]>>(rows: &[R]) -> Result<Self> {
        let dim = rows.first().map(|r| r.as_ref().len()).unwrap_or(0);
        let mut points = Vec::with_capacity(rows.len() * dim);
        for (k, row) in rows.iter().enumerate() {
            let row = row.as_ref();
            if row.len() != dim {
                return Err(Error::invalid(format!(
                    "point {k} has {} coordinates, expected {dim}",
                    row.len()
                )));
            }
            points.extend_from_slice(row);
        }
        Curve::new(points, dim)
    }

    /// Samples `f` at `samples` uniform parameter values in `[0, 1]`.
    pub fn sample<F, const D: usize>(samples: usize, f: F) -> Result<Self>
    where
        F: Fn(f64) -> [f64; D],
    {
        if samples < 2 {
            return Err(Error::invalid("curve needs at least 2 samples"));
        }
        let h = 1.0 / (samples - 1) as f64;
        let mut points = Vec::with_capacity(samples * D);
        for k in 0..samples {
            points.extend_from_slice(&f(k as f64 * h));
        }
        Curve::new(points, D)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.points.len() / self.dim
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn point(&self, k: usize) -> &[f64] {
        &self.points[k * self.dim..(k + 1) * self.dim]
    }

    pub fn points(&self) -> impl Iterator<Item = &[f64]> {
        self.points.chunks_exact(self.dim)
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.points
    }

    pub fn start(&self) -> &[f64] {
        self.point(0)
    }

    /// Polyline length.
    pub fn length(&self) -> f64 {
        self.points().zip(self.points().skip(1)).map(|(a, b)| dist(a, b)).sum()
    }

    /// Largest distance between any two samples.
    pub fn diameter(&self) -> f64 {
        let mut best = 0.0f64;
        for (i, a) in self.points().enumerate() {
            for b in self.points().skip(i + 1) {
                best = best.max(dist(a, b));
            }
        }
        best
    }

    pub fn translated(&self, offset: &[f64]) -> Curve {
        assert_eq!(offset.len(), self.dim);
        let points = self
            .points
            .iter()
            .enumerate()
            .map(|(k, v)| v + offset[k % self.dim])
            .collect();
        Curve { points, dim: self.dim }
    }

    pub fn scaled(&self, factor: f64) -> Curve {
        Curve {
            points: self.points.iter().map(|v| v * factor).collect(),
            dim: self.dim,
        }
    }

    pub fn rotated(&self, rotation: &Rotation) -> Curve {
        Curve {
            points: rotation.apply_rows(&self.points),
            dim: self.dim,
        }
    }

    pub fn reversed(&self) -> Curve {
        let mut points = Vec::with_capacity(self.points.len());
        for row in self.points.chunks_exact(self.dim).rev() {
            points.extend_from_slice(row);
        }
        Curve { points, dim: self.dim }
    }

    /// Resamples the polyline to `samples` points equally spaced in arc length.
    ///
    /// A curve of zero length collapses to `samples` copies of its first point.
    pub fn resample(&self, samples: usize) -> Result<Curve> {
        if samples < 2 {
            return Err(Error::invalid("resampling needs at least 2 samples"));
        }
        let dim = self.dim;
        let n = self.len();
        let mut cumulative = Vec::with_capacity(n);
        cumulative.push(0.0);
        for k in 1..n {
            let step = dist(self.point(k - 1), self.point(k));
            cumulative.push(cumulative[k - 1] + step);
        }
        let total = cumulative[n - 1];
        let mut points = Vec::with_capacity(samples * dim);
        if total <= 0.0 {
            for _ in 0..samples {
                points.extend_from_slice(self.point(0));
            }
            return Curve::new(points, dim);
        }
        points.extend_from_slice(self.point(0));
        let mut seg = 0;
        for j in 1..samples - 1 {
            let target = total * j as f64 / (samples - 1) as f64;
            while seg + 2 < n && cumulative[seg + 1] < target {
                seg += 1;
            }
            let span = cumulative[seg + 1] - cumulative[seg];
            let frac = if span > 0.0 {
                ((target - cumulative[seg]) / span).clamp(0.0, 1.0)
            } else {
                0.0
            };
            let a = self.point(seg);
            let b = self.point(seg + 1);
            points.extend(a.iter().zip(b).map(|(x, y)| x + frac * (y - x)));
        }
        points.extend_from_slice(self.point(n - 1));
        Curve::new(points, dim)
    }
}

impl Srvf {
    pub fn new(values: Vec<f64>, dim: usize) -> Result<Self> {
        check_rows(&values, dim, "srvf")?;
        Ok(Srvf { values, dim })
    }

    pub fn zeros(samples: usize, dim: usize) -> Srvf {
        Srvf {
            values: vec![0.0; samples * dim],
            dim,
        }
    }

    pub(crate) fn from_raw(values: Vec<f64>, dim: usize) -> Srvf {
        debug_assert_eq!(values.len() % dim, 0);
        Srvf { values, dim }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.values.len() / self.dim
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn row(&self, k: usize) -> &[f64] {
        &self.values[k * self.dim..(k + 1) * self.dim]
    }

    pub fn rows(&self) -> impl Iterator<Item = &[f64]> {
        self.values.chunks_exact(self.dim)
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.values
    }

    /// True for the representation of a null edge.
    pub fn is_zero(&self) -> bool {
        self.values.iter().all(|v| *v == 0.0)
    }

    /// L2 inner product on `[0, 1]` by the trapezoidal rule.
    pub fn inner(&self, other: &Srvf) -> f64 {
        debug_assert_eq!(self.values.len(), other.values.len());
        let weights = quadrature_weights(self.len());
        self.rows()
            .zip(other.rows())
            .zip(&weights)
            .map(|((a, b), w)| w * dot(a, b))
            .sum()
    }

    pub fn norm_squared(&self) -> f64 {
        self.inner(self)
    }

    pub fn norm(&self) -> f64 {
        self.norm_squared().max(0.0).sqrt()
    }

    /// L2 distance without any alignment.
    pub fn l2_distance(&self, other: &Srvf) -> f64 {
        let weights = quadrature_weights(self.len());
        self.rows()
            .zip(other.rows())
            .zip(&weights)
            .map(|((a, b), w)| {
                let d: f64 = a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum();
                w * d
            })
            .sum::<f64>()
            .sqrt()
    }

    /// Length of the curve this SRVF encodes, `∫ |q|²`.
    pub fn curve_length(&self) -> f64 {
        self.norm_squared()
    }

    pub fn scaled(&self, factor: f64) -> Srvf {
        Srvf {
            values: self.values.iter().map(|v| v * factor).collect(),
            dim: self.dim,
        }
    }

    pub fn rotated(&self, rotation: &Rotation) -> Srvf {
        Srvf {
            values: rotation.apply_rows(&self.values),
            dim: self.dim,
        }
    }

    /// SRVF of the same curve traversed backwards: `q_rev(t) = -q(1 - t)`.
    pub fn reversed(&self) -> Srvf {
        let mut values = Vec::with_capacity(self.values.len());
        for row in self.values.chunks_exact(self.dim).rev() {
            values.extend(row.iter().map(|v| -v));
        }
        Srvf { values, dim: self.dim }
    }

    /// `(1 - t)·self + t·other`, computed entry-wise.
    pub fn lerp(&self, other: &Srvf, t: f64) -> Srvf {
        Srvf {
            values: self
                .values
                .iter()
                .zip(&other.values)
                .map(|(a, b)| (1.0 - t) * a + t * b)
                .collect(),
            dim: self.dim,
        }
    }

    /// Linear interpolation of the samples at a fractional grid index.
    pub(crate) fn interpolate_into(&self, index: f64, out: &mut [f64]) {
        let last = self.len() - 1;
        let index = index.clamp(0.0, last as f64);
        let lo = (index.floor() as usize).min(last);
        let frac = index - lo as f64;
        let a = self.row(lo);
        if frac == 0.0 || lo == last {
            out.copy_from_slice(a);
            return;
        }
        let b = self.row(lo + 1);
        for ((o, x), y) in out.iter_mut().zip(a).zip(b) {
            *o = x + frac * (y - x);
        }
    }
}

/// Trapezoidal weights for `samples` uniform points on `[0, 1]`.
pub fn quadrature_weights(samples: usize) -> Vec<f64> {
    let h = 1.0 / (samples - 1) as f64;
    let mut w = vec![h; samples];
    w[0] = 0.5 * h;
    w[samples - 1] = 0.5 * h;
    w
}

/// Square-root velocity function of a sampled curve.
///
/// Velocities come from central differences at interior samples and one-sided
/// differences at the two ends. Wherever the speed falls below
/// `1e-8 · (diameter + 1)` the output row is zero.
pub fn srvf(curve: &Curve) -> Srvf {
    let n = curve.len();
    let dim = curve.dim;
    let h = 1.0 / (n - 1) as f64;
    let eps = SPEED_EPSILON * (curve.diameter() + 1.0);
    let mut values = vec![0.0; n * dim];
    let mut velocity = vec![0.0; dim];
    for k in 0..n {
        let (a, b, span) = match k {
            0 => (0, 1, h),
            _ if k == n - 1 => (n - 2, n - 1, h),
            _ => (k - 1, k + 1, 2.0 * h),
        };
        let pa = curve.point(a);
        let pb = curve.point(b);
        for c in 0..dim {
            velocity[c] = (pb[c] - pa[c]) / span;
        }
        let speed = norm(&velocity);
        if speed < eps {
            continue;
        }
        let scale = 1.0 / speed.sqrt();
        for c in 0..dim {
            values[k * dim + c] = velocity[c] * scale;
        }
    }
    Srvf::from_raw(values, dim)
}

/// Integrates `q|q|` from `start` by the trapezoidal rule.
pub fn recover_curve(q: &Srvf, start: &[f64]) -> Result<Curve> {
    let dim = q.dim;
    if start.len() != dim {
        return Err(Error::DimensionMismatch {
            expected: dim,
            found: start.len(),
        });
    }
    if start.iter().any(|v| !v.is_finite()) || q.values.iter().any(|v| !v.is_finite()) {
        return Err(Error::invalid("non-finite srvf or start point"));
    }
    let n = q.len();
    let h = 1.0 / (n - 1) as f64;
    let integrand: Vec<f64> = q
        .rows()
        .flat_map(|row| {
            let speed = norm(row);
            row.iter().map(move |v| v * speed)
        })
        .collect();
    let mut points = Vec::with_capacity(n * dim);
    points.extend_from_slice(start);
    for k in 1..n {
        for c in 0..dim {
            let prev = points[(k - 1) * dim + c];
            let step = 0.5 * h * (integrand[(k - 1) * dim + c] + integrand[k * dim + c]);
            points.push(prev + step);
        }
    }
    Curve::new(points, dim)
}

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub(crate) fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

fn dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn wavy(samples: usize) -> Curve {
        Curve::sample(samples, |t| [t, 0.3 * (2.0 * std::f64::consts::PI * t).sin()]).unwrap()
    }

    #[test]
    fn straight_line_has_unit_srvf() {
        let line = Curve::sample(50, |t| [t, 0.0]).unwrap();
        let q = srvf(&line);
        for row in q.rows() {
            assert!((row[0] - 1.0).abs() < 1e-12);
            assert_eq!(row[1], 0.0);
        }
    }

    #[test]
    fn constant_curve_maps_to_zero() {
        let c = Curve::sample(20, |_| [0.4, -1.0, 2.0]).unwrap();
        assert!(srvf(&c).is_zero());
    }

    #[test]
    fn quadratic_matches_analytic_derivative() {
        // Oracle: q(t) = (sqrt(2t), 0) from the derivative 2t of t².
        let c = Curve::sample(50, |t| [t * t, 0.0]).unwrap();
        let q = srvf(&c);
        for k in 1..49 {
            let t = k as f64 / 49.0;
            assert!((q.row(k)[0] - (2.0 * t).sqrt()).abs() <= 1e-2, "k={k}");
            assert_eq!(q.row(k)[1], 0.0);
        }
    }

    #[test]
    fn non_finite_points_are_rejected() {
        assert!(Curve::new(vec![0.0, f64::NAN, 1.0, 1.0], 2).is_err());
        assert!(Curve::new(vec![0.0, 0.0], 2).is_err());
    }

    #[test]
    fn recover_constant_integrand() {
        let q = Srvf::new([1.0, 0.0].repeat(11), 2).unwrap();
        let c = recover_curve(&q, &[0.0, 0.0]).unwrap();
        for (k, p) in c.points().enumerate() {
            assert!((p[0] - k as f64 / 10.0).abs() < 1e-12);
            assert_eq!(p[1], 0.0);
        }
        let c = recover_curve(&Srvf::zeros(5, 2), &[1.0, 2.0]).unwrap();
        assert!(c.points().all(|p| p == [1.0, 2.0]));
    }

    #[test]
    fn round_trip_error_shrinks_with_resolution() {
        let error = |samples| {
            let c = wavy(samples);
            let back = recover_curve(&srvf(&c), c.start()).unwrap();
            c.points()
                .zip(back.points())
                .map(|(a, b)| dist(a, b))
                .fold(0.0, f64::max)
        };
        let e100 = error(100);
        let e200 = error(200);
        assert!(e100 <= 5e-2, "e100 = {e100}");
        assert!(e200 <= 0.5 * e100, "e100 = {e100}, e200 = {e200}");
    }

    #[test]
    fn resample_is_uniform_in_arc_length() {
        let c = Curve::from_rows(&[[0.0, 0.0], [1.0, 0.0], [1.0, 3.0]]).unwrap();
        let r = c.resample(5).unwrap();
        assert_eq!(r.len(), 5);
        let expected = [[0.0, 0.0], [1.0, 0.0], [1.0, 1.0], [1.0, 2.0], [1.0, 3.0]];
        for (p, e) in r.points().zip(expected) {
            assert!(dist(p, &e) < 1e-12);
        }
        let point = Curve::from_rows(&[[2.0, 2.0], [2.0, 2.0]]).unwrap();
        assert!(point.resample(4).unwrap().points().all(|p| p == [2.0, 2.0]));
    }

    #[test]
    fn srvf_norm_is_curve_length() {
        let c = wavy(400).resample(50).unwrap();
        let q = srvf(&c);
        assert!((q.curve_length() - c.length()).abs() / c.length() < 1e-2);
    }

    #[test]
    fn reversal_is_an_involution() {
        let q = srvf(&wavy(30));
        assert_eq!(q.reversed().reversed(), q);
        assert_eq!(srvf(&wavy(30).reversed()).row(0)[0], -q.row(29)[0]);
    }
}
