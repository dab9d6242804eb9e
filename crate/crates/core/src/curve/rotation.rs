use nalgebra::DMatrix;

use super::Srvf;
use crate::error::{Error, Result};

/// A proper rotation of `R^d`.
#[derive(Debug, Clone, PartialEq)]
pub struct Rotation {
    matrix: DMatrix<f64>,
}

impl Rotation {
    pub fn identity(dim: usize) -> Self {
        Rotation {
            matrix: DMatrix::identity(dim, dim),
        }
    }

    /// Validates orthogonality and `det = +1` to within `1e-10`.
    pub fn from_matrix(matrix: DMatrix<f64>) -> Result<Self> {
        if !matrix.is_square() {
            return Err(Error::invalid("rotation matrix must be square"));
        }
        let dim = matrix.nrows();
        let gram = matrix.transpose() * &matrix;
        if (gram - DMatrix::<f64>::identity(dim, dim)).amax() > 1e-10 {
            return Err(Error::invalid("rotation matrix is not orthogonal"));
        }
        if (matrix.determinant() - 1.0).abs() > 1e-10 {
            return Err(Error::invalid("rotation matrix has determinant != 1"));
        }
        Ok(Rotation { matrix })
    }

    /// Planar rotation by `angle` radians.
    pub fn planar(angle: f64) -> Self {
        let (s, c) = angle.sin_cos();
        Rotation {
            matrix: DMatrix::from_row_slice(2, 2, &[c, -s, s, c]),
        }
    }

    /// Rotation of `R^3` about a (not necessarily unit) axis.
    pub fn axis_angle(axis: [f64; 3], angle: f64) -> Self {
        let unit = nalgebra::Unit::new_normalize(nalgebra::Vector3::from(axis));
        let r = nalgebra::Rotation3::from_axis_angle(&unit, angle);
        Rotation {
            matrix: DMatrix::from_iterator(3, 3, r.matrix().iter().copied()),
        }
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.matrix
    }

    pub fn transpose(&self) -> Rotation {
        Rotation {
            matrix: self.matrix.transpose(),
        }
    }

    pub fn compose(&self, other: &Rotation) -> Rotation {
        Rotation {
            matrix: &self.matrix * &other.matrix,
        }
    }

    /// Applies the rotation to every row of a row-major `k × dim` buffer.
    pub(crate) fn apply_rows(&self, rows: &[f64]) -> Vec<f64> {
        let dim = self.dim();
        let mut out = vec![0.0; rows.len()];
        for (src, dst) in rows.chunks_exact(dim).zip(out.chunks_exact_mut(dim)) {
            for (r, d) in dst.iter_mut().enumerate() {
                *d = (0..dim).map(|c| self.matrix[(r, c)] * src[c]).sum();
            }
        }
        out
    }
}

/// Rotation `O` maximizing `⟨q1, O q2⟩`.
///
/// Orthogonal Procrustes on the `d × d` cross-covariance `Σ w q1 q2ᵀ`, with the
/// weakest singular direction flipped when the unconstrained optimum is a
/// reflection. A null `q1` or `q2` yields the identity.
pub fn optimal_rotation(q1: &Srvf, q2: &Srvf) -> Result<Rotation> {
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
    let dim = q1.dim();
    if q1.is_zero() || q2.is_zero() {
        return Ok(Rotation::identity(dim));
    }
    let weights = super::quadrature_weights(q1.len());
    let mut cross = DMatrix::<f64>::zeros(dim, dim);
    for ((a, b), w) in q1.rows().zip(q2.rows()).zip(&weights) {
        for r in 0..dim {
            for c in 0..dim {
                cross[(r, c)] += w * a[r] * b[c];
            }
        }
    }
    if cross.amax() == 0.0 {
        return Ok(Rotation::identity(dim));
    }
    let svd = cross.svd(true, true);
    let (Some(u), Some(v_t)) = (svd.u, svd.v_t) else {
        return Err(Error::Numeric("svd of cross-covariance failed".into()));
    };
    let mut sign = DMatrix::<f64>::identity(dim, dim);
    if (&u * &v_t).determinant() < 0.0 {
        // nalgebra does not sort singular values; flip the smallest one.
        let weakest = svd
            .singular_values
            .iter()
            .enumerate()
            .min_by(|a, b| a.1.total_cmp(b.1))
            .map(|(k, _)| k)
            .unwrap_or(dim - 1);
        sign[(weakest, weakest)] = -1.0;
    }
    Ok(Rotation { matrix: u * sign * v_t })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::curve::{srvf, Curve};

    fn spiral() -> Srvf {
        srvf(&Curve::sample(40, |t| [t.cos() * t, (3.0 * t).sin(), 0.5 * t * t]).unwrap())
    }

    #[test]
    fn identical_inputs_give_identity() {
        let q = spiral();
        let o = optimal_rotation(&q, &q).unwrap();
        assert!((o.matrix() - DMatrix::<f64>::identity(3, 3)).amax() < 1e-10);
    }

    #[test]
    fn recovers_planar_rotation() {
        let q1 = srvf(&Curve::sample(40, |t| [t, (4.0 * t).sin() * 0.3]).unwrap());
        let r = Rotation::planar(30f64.to_radians());
        let q2 = q1.rotated(&r.transpose());
        let o = optimal_rotation(&q1, &q2).unwrap();
        assert!((o.matrix() - r.matrix()).amax() < 1e-8);
        assert!((q1.inner(&q2.rotated(&o)) - q1.norm_squared()).abs() < 1e-10);
    }

    #[test]
    fn output_is_a_proper_rotation() {
        let q1 = spiral();
        let q2 = srvf(&Curve::sample(40, |t| [t, -t * t, (2.0 * t).cos()]).unwrap());
        let o = optimal_rotation(&q1, &q2).unwrap();
        Rotation::from_matrix(o.matrix().clone()).unwrap();
    }

    #[test]
    fn null_edge_gives_identity() {
        let o = optimal_rotation(&Srvf::zeros(40, 3), &spiral()).unwrap();
        assert_eq!(o, Rotation::identity(3));
    }

    #[test]
    fn mismatched_dims_error() {
        assert!(optimal_rotation(&Srvf::zeros(4, 2), &Srvf::zeros(4, 3)).is_err());
    }
}
