//! Hypothesis tests and embeddings on shape distances and PCA scores.

use std::collections::BTreeMap;

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, FisherSnedecor, StudentsT};

use crate::error::{Error, Result};

/// Symmetric matrix of pairwise distances with sample identifiers.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DistanceMatrix {
    pub labels: Vec<String>,
    pub d: Vec<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ordering_covariate: Option<Vec<f64>>,
    /// Per-sample metadata (subject, age, sex, group), empty or one per row.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub metadata: Vec<BTreeMap<String, serde_json::Value>>,
}

impl DistanceMatrix {
    pub fn new(labels: Vec<String>, d: Vec<Vec<f64>>) -> Result<Self> {
        let out = DistanceMatrix {
            labels,
            d,
            ordering_covariate: None,
            metadata: Vec::new(),
        };
        out.validate()?;
        Ok(out)
    }

    /// Builds the matrix from a distance function on index pairs `i < j`.
    pub fn from_fn<F>(labels: Vec<String>, mut f: F) -> Result<Self>
    where
        F: FnMut(usize, usize) -> Result<f64>,
    {
        let m = labels.len();
        let mut d = vec![vec![0.0; m]; m];
        for i in 0..m {
            for j in i + 1..m {
                let v = f(i, j)?;
                d[i][j] = v;
                d[j][i] = v;
            }
        }
        DistanceMatrix::new(labels, d)
    }

    pub fn with_covariate(mut self, covariate: Vec<f64>) -> Result<Self> {
        if covariate.len() != self.len() {
            return Err(Error::SizeMismatch(format!(
                "covariate has {} entries for {} samples",
                covariate.len(),
                self.len()
            )));
        }
        self.ordering_covariate = Some(covariate);
        Ok(self)
    }

    pub fn with_metadata(mut self, metadata: Vec<BTreeMap<String, serde_json::Value>>) -> Result<Self> {
        self.metadata = metadata;
        self.validate()?;
        Ok(self)
    }

    pub fn len(&self) -> usize {
        self.d.len()
    }

    pub fn is_empty(&self) -> bool {
        self.d.is_empty()
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.d[i][j]
    }

    /// Rows and columns reordered by increasing covariate (stable on ties).
    pub fn ordered_by_covariate(&self) -> Result<DistanceMatrix> {
        let cov = self
            .ordering_covariate
            .as_ref()
            .ok_or_else(|| Error::invalid("distance matrix has no ordering covariate"))?;
        let mut order: Vec<usize> = (0..self.len()).collect();
        order.sort_by(|&a, &b| cov[a].total_cmp(&cov[b]));
        Ok(DistanceMatrix {
            labels: order.iter().map(|&i| self.labels[i].clone()).collect(),
            d: order
                .iter()
                .map(|&i| order.iter().map(|&j| self.d[i][j]).collect())
                .collect(),
            ordering_covariate: Some(order.iter().map(|&i| cov[i]).collect()),
            metadata: if self.metadata.is_empty() {
                Vec::new()
            } else {
                order.iter().map(|&i| self.metadata[i].clone()).collect()
            },
        })
    }

    /// Square shape, zero diagonal, non-negative finite entries, symmetry
    /// within 1e-6.
    pub fn validate(&self) -> Result<()> {
        let m = self.d.len();
        if self.labels.len() != m {
            return Err(Error::Validation(format!("{} labels for {m} rows", self.labels.len())));
        }
        for (i, row) in self.d.iter().enumerate() {
            if row.len() != m {
                return Err(Error::Validation(format!(
                    "row {i} has {} entries, expected {m}",
                    row.len()
                )));
            }
            if row[i] != 0.0 {
                return Err(Error::Validation(format!("diagonal entry {i} is {}", row[i])));
            }
            for (j, &v) in row.iter().enumerate() {
                if !v.is_finite() || v < 0.0 {
                    return Err(Error::Validation(format!("entry ({i}, {j}) = {v}")));
                }
                if (v - self.d[j][i]).abs() > 1e-6 {
                    return Err(Error::Validation(format!("entries ({i}, {j}) and ({j}, {i}) differ")));
                }
            }
        }
        if !self.metadata.is_empty() && self.metadata.len() != m {
            return Err(Error::Validation(format!(
                "metadata for {} of {m} samples",
                self.metadata.len()
            )));
        }
        if let Some(c) = &self.ordering_covariate {
            if c.len() != m {
                return Err(Error::Validation(format!(
                    "covariate has {} entries for {m} samples",
                    c.len()
                )));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TestMethod {
    WelchT,
    PooledT,
    HotellingT2,
    Pearson,
    Permutation,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TestReport {
    pub method: TestMethod,
    pub statistic: f64,
    pub p_value: f64,
    /// Degrees of freedom; two entries for an F reference.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub dof: Vec<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub permutations: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
}

impl TestReport {
    pub fn validate(&self) -> Result<()> {
        if !(0.0..=1.0).contains(&self.p_value) {
            return Err(Error::Validation(format!("p-value {} outside [0, 1]", self.p_value)));
        }
        if self.statistic.is_nan() {
            return Err(Error::Validation("statistic is NaN".into()));
        }
        if self.method == TestMethod::Permutation && (self.permutations.is_none() || self.seed.is_none()) {
            return Err(Error::Validation("permutation report needs a count and a seed".into()));
        }
        Ok(())
    }
}

fn mean_var(x: &[f64]) -> (f64, f64) {
    let n = x.len() as f64;
    let mean = x.iter().sum::<f64>() / n;
    let var = x.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (n - 1.0);
    (mean, var)
}

fn t_two_sided(t: f64, dof: f64) -> Result<f64> {
    if t.is_infinite() {
        return Ok(0.0);
    }
    let dist = StudentsT::new(0.0, 1.0, dof).map_err(|e| Error::Numeric(e.to_string()))?;
    Ok((2.0 * dist.sf(t.abs())).clamp(0.0, 1.0))
}

/// Two-sample t-test. Welch's unequal-variance form by default; `pooled`
/// switches to the classical equal-variance statistic.
pub fn two_sample_t(a: &[f64], b: &[f64], pooled: bool) -> Result<TestReport> {
    if a.len() < 2 || b.len() < 2 {
        return Err(Error::invalid("each group needs at least 2 samples"));
    }
    let (na, nb) = (a.len() as f64, b.len() as f64);
    let (ma, va) = mean_var(a);
    let (mb, vb) = mean_var(b);
    if va == 0.0 && vb == 0.0 {
        return Err(Error::Degenerate("both groups have zero variance".into()));
    }
    let (t, dof) = if pooled {
        let dof = na + nb - 2.0;
        let sp = ((na - 1.0) * va + (nb - 1.0) * vb) / dof;
        ((ma - mb) / (sp * (1.0 / na + 1.0 / nb)).sqrt(), dof)
    } else {
        let (sa, sb) = (va / na, vb / nb);
        let dof = (sa + sb).powi(2) / (sa * sa / (na - 1.0) + sb * sb / (nb - 1.0));
        ((ma - mb) / (sa + sb).sqrt(), dof)
    };
    Ok(TestReport {
        method: if pooled {
            TestMethod::PooledT
        } else {
            TestMethod::WelchT
        },
        statistic: t,
        p_value: t_two_sided(t, dof)?,
        dof: vec![dof],
        permutations: None,
        seed: None,
    })
}

fn column_means(x: &DMatrix<f64>) -> DVector<f64> {
    DVector::from_fn(x.ncols(), |c, _| x.column(c).mean())
}

fn scatter(x: &DMatrix<f64>, mean: &DVector<f64>) -> DMatrix<f64> {
    let centered = DMatrix::from_fn(x.nrows(), x.ncols(), |r, c| x[(r, c)] - mean[c]);
    centered.transpose() * centered
}

/// Two-sample Hotelling T² on `m × k` score matrices with an F reference.
/// A near-singular pooled covariance gets a ridge of `1e-8 · tr(Σ)/k`.
pub fn hotelling_t2(a: &DMatrix<f64>, b: &DMatrix<f64>) -> Result<TestReport> {
    let k = a.ncols();
    if k == 0 || b.ncols() != k {
        return Err(Error::SizeMismatch(format!(
            "score matrices have {} and {} columns",
            a.ncols(),
            b.ncols()
        )));
    }
    let (na, nb) = (a.nrows() as f64, b.nrows() as f64);
    if a.nrows() < 1 || b.nrows() < 1 || na + nb - 2.0 <= k as f64 {
        return Err(Error::invalid(format!(
            "hotelling needs m_a + m_b - 2 > k; got {} + {} - 2 with k = {k}",
            a.nrows(),
            b.nrows()
        )));
    }
    let (ma, mb) = (column_means(a), column_means(b));
    let pooled = (scatter(a, &ma) + scatter(b, &mb)) / (na + nb - 2.0);
    let diff = &ma - &mb;
    let solve = |s: &DMatrix<f64>| -> Option<DVector<f64>> {
        let chol = s.clone().cholesky()?;
        let l = chol.l();
        let diag = l.diagonal();
        let (lo, hi) = diag
            .iter()
            .fold((f64::INFINITY, 0.0f64), |(lo, hi), v| (lo.min(*v), hi.max(*v)));
        // reject factorizations that are numerically singular
        if !(lo > 1e-7 * hi) {
            return None;
        }
        Some(chol.solve(&diff))
    };
    let x = match solve(&pooled) {
        Some(x) => x,
        None => {
            let ridge = 1e-8 * pooled.trace() / k as f64;
            log::warn!("pooled covariance is near-singular; adding ridge {ridge:e}");
            let regularized = &pooled + DMatrix::identity(k, k) * ridge;
            solve(&regularized).ok_or_else(|| Error::Degenerate("pooled covariance is singular".into()))?
        }
    };
    let t2 = (na * nb / (na + nb)) * diff.dot(&x);
    let (d1, d2) = (k as f64, na + nb - k as f64 - 1.0);
    let f = t2 * d2 / (d1 * (na + nb - 2.0));
    let dist = FisherSnedecor::new(d1, d2).map_err(|e| Error::Numeric(e.to_string()))?;
    Ok(TestReport {
        method: TestMethod::HotellingT2,
        statistic: t2,
        p_value: dist.sf(f.max(0.0)).clamp(0.0, 1.0),
        dof: vec![d1, d2],
        permutations: None,
        seed: None,
    })
}

/// Pearson correlation with its t-based two-sided p-value. The report's
/// statistic is `r`.
pub fn covariate_correlation(scores: &[f64], covariate: &[f64]) -> Result<TestReport> {
    let m = scores.len();
    if covariate.len() != m {
        return Err(Error::SizeMismatch(format!(
            "{m} scores but {} covariate values",
            covariate.len()
        )));
    }
    if m < 3 {
        return Err(Error::invalid("correlation needs at least 3 samples"));
    }
    let mx = scores.iter().sum::<f64>() / m as f64;
    let my = covariate.iter().sum::<f64>() / m as f64;
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (x, y) in scores.iter().zip(covariate) {
        sxy += (x - mx) * (y - my);
        sxx += (x - mx) * (x - mx);
        syy += (y - my) * (y - my);
    }
    if sxx == 0.0 || syy == 0.0 {
        return Err(Error::Degenerate("correlation with a constant variable".into()));
    }
    let r = (sxy / (sxx * syy).sqrt()).clamp(-1.0, 1.0);
    let dof = (m - 2) as f64;
    let t = if r.abs() >= 1.0 {
        f64::INFINITY
    } else {
        r * (dof / (1.0 - r * r)).sqrt()
    };
    Ok(TestReport {
        method: TestMethod::Pearson,
        statistic: r,
        p_value: t_two_sided(t, dof)?,
        dof: vec![dof],
        permutations: None,
        seed: None,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PermutationStatistic {
    /// Mean between-group distance minus mean within-group distance.
    #[default]
    MeanDifference,
    /// Distance-based ANOVA pseudo-F on squared distances.
    PseudoF,
}

fn group_statistic(dist: &DistanceMatrix, labels: &[bool], kind: PermutationStatistic) -> f64 {
    let m = labels.len();
    let (mut between, mut nb, mut within, mut nw) = (0.0, 0usize, 0.0, 0usize);
    let mut ss_within = [0.0, 0.0];
    let mut ss_total = 0.0;
    for i in 0..m {
        for j in i + 1..m {
            let d = dist.get(i, j);
            ss_total += d * d;
            if labels[i] == labels[j] {
                within += d;
                nw += 1;
                ss_within[labels[i] as usize] += d * d;
            } else {
                between += d;
                nb += 1;
            }
        }
    }
    match kind {
        PermutationStatistic::MeanDifference => {
            let b = if nb > 0 { between / nb as f64 } else { 0.0 };
            let w = if nw > 0 { within / nw as f64 } else { 0.0 };
            b - w
        }
        PermutationStatistic::PseudoF => {
            let sizes = [
                labels.iter().filter(|l| !**l).count() as f64,
                labels.iter().filter(|l| **l).count() as f64,
            ];
            let n = m as f64;
            let sst = ss_total / n;
            let ssw: f64 = (0..2)
                .filter(|g| sizes[*g] > 0.0)
                .map(|g| ss_within[g] / sizes[g])
                .sum();
            let ssa = sst - ssw;
            if ssw <= 0.0 {
                return f64::INFINITY;
            }
            ssa / (ssw / (n - 2.0))
        }
    }
}

/// Distance-based two-group permutation test. Replicate `i` shuffles the
/// labels with a ChaCha stream `i` under `seed`, so results do not depend on
/// scheduling. The p-value counts the observed labelling as one replicate.
pub fn permutation_test(
    dist: &DistanceMatrix,
    labels: &[bool],
    n_perm: usize,
    seed: u64,
    kind: PermutationStatistic,
) -> Result<TestReport> {
    dist.validate()?;
    if labels.len() != dist.len() {
        return Err(Error::SizeMismatch(format!(
            "{} labels for {} samples",
            labels.len(),
            dist.len()
        )));
    }
    let ones = labels.iter().filter(|l| **l).count();
    if ones == 0 || ones == labels.len() {
        return Err(Error::invalid("permutation test needs two non-empty groups"));
    }
    if n_perm < 100 {
        return Err(Error::invalid(format!("n_perm must be at least 100, got {n_perm}")));
    }
    let observed = group_statistic(dist, labels, kind);
    // ties within rounding count as exceedances
    let slack = 1e-12 * observed.abs().max(1.0);
    let exceed = (0..n_perm)
        .into_par_iter()
        .filter(|&i| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(i as u64);
            let mut shuffled = labels.to_vec();
            shuffled.shuffle(&mut rng);
            group_statistic(dist, &shuffled, kind) >= observed - slack
        })
        .count();
    Ok(TestReport {
        method: TestMethod::Permutation,
        statistic: observed,
        p_value: (1 + exceed) as f64 / (1 + n_perm) as f64,
        dof: Vec::new(),
        permutations: Some(n_perm),
        seed: Some(seed),
    })
}

/// Classical MDS coordinates and the eigenvalues they came from.
#[derive(Debug, Clone, PartialEq)]
pub struct Embedding {
    /// `m × k` coordinates, columns by decreasing eigenvalue.
    pub coords: DMatrix<f64>,
    pub eigenvalues: Vec<f64>,
}

/// Classical (Torgerson) MDS: top eigenpairs of `-½ J D² J`, scaled by the
/// root eigenvalue. Asking for more dimensions than there are non-negative
/// eigenvalues truncates with a warning.
pub fn classical_mds(dist: &DistanceMatrix, k: usize) -> Result<Embedding> {
    dist.validate()?;
    if k == 0 {
        return Err(Error::invalid("embedding dimension must be at least 1"));
    }
    let m = dist.len();
    if m == 0 {
        return Err(Error::invalid("cannot embed an empty distance matrix"));
    }
    let sq = DMatrix::from_fn(m, m, |i, j| dist.get(i, j).powi(2));
    let row_means: Vec<f64> = (0..m).map(|i| sq.row(i).mean()).collect();
    let grand = row_means.iter().sum::<f64>() / m as f64;
    let b = DMatrix::from_fn(m, m, |i, j| -0.5 * (sq[(i, j)] - row_means[i] - row_means[j] + grand));
    let eig = SymmetricEigen::new(b);
    let mut order: Vec<usize> = (0..m).collect();
    order.sort_by(|&x, &y| eig.eigenvalues[y].total_cmp(&eig.eigenvalues[x]));
    let scale = eig.eigenvalues.iter().fold(0.0f64, |a, v| a.max(v.abs())).max(1.0);
    let usable = order.iter().filter(|&&i| eig.eigenvalues[i] >= -1e-10 * scale).count();
    let kept = if k > usable {
        log::warn!("only {usable} non-negative eigenvalues; embedding in {usable} dimensions instead of {k}");
        usable
    } else {
        k
    };
    let mut coords = DMatrix::zeros(m, kept);
    let mut eigenvalues = Vec::with_capacity(kept);
    for (c, &i) in order.iter().take(kept).enumerate() {
        let lambda = eig.eigenvalues[i].max(0.0);
        let v = eig.eigenvectors.column(i);
        let pivot = v.iter().fold(0.0f64, |a, x| if x.abs() > a.abs() { *x } else { a });
        let sign = if pivot < 0.0 { -1.0 } else { 1.0 };
        for r in 0..m {
            coords[(r, c)] = sign * v[r] * lambda.sqrt();
        }
        eigenvalues.push(lambda);
    }
    Ok(Embedding { coords, eigenvalues })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn euclidean(points: &[[f64; 2]]) -> DistanceMatrix {
        let labels = (0..points.len()).map(|i| format!("s{i}")).collect();
        DistanceMatrix::from_fn(labels, |i, j| {
            Ok(((points[i][0] - points[j][0]).powi(2) + (points[i][1] - points[j][1]).powi(2)).sqrt())
        })
        .unwrap()
    }

    #[test]
    fn identical_groups_give_zero_t() {
        let a = [1.0, 2.0, 4.0, 3.0];
        let r = two_sample_t(&a, &a, false).unwrap();
        assert_eq!(r.statistic, 0.0);
        assert!((r.p_value - 1.0).abs() < 1e-12);
    }

    #[test]
    fn constant_groups_are_degenerate() {
        assert!(two_sample_t(&[1.0, 1.0], &[2.0, 2.0], false).is_err());
    }

    #[test]
    fn perfect_correlation() {
        let x = [1.0, 3.0, 2.0, 5.0];
        let r = covariate_correlation(&x, &x).unwrap();
        assert!((r.statistic - 1.0).abs() < 1e-15);
        assert_eq!(r.p_value, 0.0);
        assert!(covariate_correlation(&x, &[1.0; 4]).is_err());
    }

    #[test]
    fn collinear_points_embed_on_a_line() {
        let d = DistanceMatrix::new(
            vec!["a".into(), "b".into(), "c".into()],
            vec![vec![0.0, 1.0, 2.0], vec![1.0, 0.0, 1.0], vec![2.0, 1.0, 0.0]],
        )
        .unwrap();
        let e = classical_mds(&d, 1).unwrap();
        let x: Vec<f64> = e.coords.column(0).iter().copied().collect();
        let sign = if x[0] < 0.0 { 1.0 } else { -1.0 };
        for (v, want) in x.iter().zip([-1.0, 0.0, 1.0]) {
            assert!((sign * v - want).abs() < 1e-10, "{x:?}");
        }
    }

    #[test]
    fn mds_truncates_to_available_dimensions() {
        let d = euclidean(&[[0.0, 0.0], [1.0, 0.0], [0.0, 1.0]]);
        assert_eq!(classical_mds(&d, 5).unwrap().coords.ncols(), 3);
        assert!(classical_mds(&d, 0).is_err());
    }

    #[test]
    fn validation_rejects_asymmetry() {
        let bad = DistanceMatrix {
            labels: vec!["a".into(), "b".into()],
            d: vec![vec![0.0, 1.0], vec![2.0, 0.0]],
            ordering_covariate: None,
            metadata: Vec::new(),
        };
        assert!(bad.validate().is_err());
    }

    #[test]
    fn permutation_rejects_one_group() {
        let d = euclidean(&[[0.0, 0.0], [1.0, 0.0], [0.0, 1.0]]);
        assert!(permutation_test(&d, &[true; 3], 100, 1, PermutationStatistic::MeanDifference).is_err());
        assert!(permutation_test(&d, &[true, false, true], 10, 1, PermutationStatistic::MeanDifference).is_err());
    }

    #[test]
    fn covariate_ordering() {
        let d = euclidean(&[[0.0, 0.0], [3.0, 0.0], [1.0, 0.0]])
            .with_covariate(vec![30.0, 10.0, 20.0])
            .unwrap();
        let o = d.ordered_by_covariate().unwrap();
        assert_eq!(o.labels, vec!["s1", "s2", "s0"]);
        assert_eq!(o.get(0, 1), 2.0);
        o.validate().unwrap();
    }
}
