//! Analytic hierarchy process: pairwise comparison matrices, principal
//! eigenvector priorities, consistency diagnostics and weighted aggregation.
//!
//! Priorities are normalized to sum to one. The principal eigenvector is found
//! by power iteration from the uniform vector, which for a positive matrix
//! converges to the Perron vector.

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Max-norm distance between successive iterates at which power iteration stops.
pub const CONVERGENCE_TOLERANCE: f64 = 1e-10;

/// Iteration cap for power iteration.
pub const MAX_ITERATIONS: usize = 1000;

/// Matrices with a consistency ratio above this value are flagged.
pub const CR_THRESHOLD: f64 = 0.10;

/// Saaty's random consistency index for orders 1 through 10.
pub const RANDOM_INDEX: [f64; 10] = [0.0, 0.0, 0.58, 0.90, 1.12, 1.24, 1.32, 1.41, 1.45, 1.49];

const RECIPROCITY_TOLERANCE: f64 = 1e-12;
const SUM_TOLERANCE: f64 = 1e-9;
const SAATY_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum AhpError {
    #[error("matrix order must be at least 1")]
    EmptyMatrix,
    #[error("expected {expected} upper-triangle judgments for order {order}, got {actual}")]
    JudgmentCount {
        order: usize,
        expected: usize,
        actual: usize,
    },
    #[error("judgment at position {index} is {value}; judgments must be finite and positive")]
    InvalidJudgment { index: usize, value: f64 },
    #[error("score at position {index} is {value}; scores must be finite and positive")]
    InvalidScore { index: usize, value: f64 },
    #[error("row {row} has {len} entries, expected {order}")]
    NotSquare { row: usize, len: usize, order: usize },
    #[error("entry ({row}, {col}) = {value} is not finite and positive")]
    NonPositiveEntry { row: usize, col: usize, value: f64 },
    #[error("diagonal entry {index} is {value}, expected exactly 1")]
    Diagonal { index: usize, value: f64 },
    #[error("entries ({row}, {col}) and ({col}, {row}) are not reciprocal")]
    NotReciprocal { row: usize, col: usize },
    #[error("weights must be non-negative and sum to 1 (sum = {sum})")]
    NotNormalized { sum: f64 },
    #[error("power iteration did not converge after {iterations} iterations")]
    NotConverged {
        iterations: usize,
        last: Box<PrincipalEigen>,
    },
    #[error("consistency index table covers orders up to {max}, got {order}")]
    OrderTooLarge { order: usize, max: usize },
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
}

#[derive(Debug, Clone)]
enum Entries {
    /// Row-major n x n storage.
    Dense(Vec<f64>),
    /// `entry(i, j) = scores[i] / scores[j]`, evaluated on access so that
    /// orders in the thousands do not need n^2 memory.
    Ratio(Vec<f64>),
}

/// A square, positive, reciprocal judgment matrix.
#[derive(Debug, Clone)]
pub struct PairwiseMatrix {
    order: usize,
    entries: Entries,
}

impl PairwiseMatrix {
    /// Validates a dense matrix given as rows.
    pub fn from_rows(rows: Vec<Vec<f64>>) -> Result<Self, AhpError> {
        let order = rows.len();
        if order == 0 {
            return Err(AhpError::EmptyMatrix);
        }
        let mut flat = Vec::with_capacity(order * order);
        for (row, values) in rows.into_iter().enumerate() {
            if values.len() != order {
                return Err(AhpError::NotSquare {
                    row,
                    len: values.len(),
                    order,
                });
            }
            flat.extend(values);
        }
        let m = PairwiseMatrix {
            order,
            entries: Entries::Dense(flat),
        };
        m.check_invariants()?;
        Ok(m)
    }

    fn check_invariants(&self) -> Result<(), AhpError> {
        let n = self.order;
        for i in 0..n {
            for j in 0..n {
                let a = self.entry(i, j);
                if !(a.is_finite() && a > 0.0) {
                    return Err(AhpError::NonPositiveEntry {
                        row: i,
                        col: j,
                        value: a,
                    });
                }
            }
            let d = self.entry(i, i);
            if d != 1.0 {
                return Err(AhpError::Diagonal { index: i, value: d });
            }
        }
        for i in 0..n {
            for j in (i + 1)..n {
                let expected = 1.0 / self.entry(i, j);
                let actual = self.entry(j, i);
                if ((actual - expected) / expected).abs() > RECIPROCITY_TOLERANCE {
                    return Err(AhpError::NotReciprocal { row: i, col: j });
                }
            }
        }
        Ok(())
    }

    pub fn order(&self) -> usize {
        self.order
    }

    #[inline]
    pub fn entry(&self, row: usize, col: usize) -> f64 {
        match &self.entries {
            Entries::Dense(v) => v[row * self.order + col],
            Entries::Ratio(s) => s[row] / s[col],
        }
    }

    pub fn to_rows(&self) -> Vec<Vec<f64>> {
        (0..self.order)
            .map(|i| (0..self.order).map(|j| self.entry(i, j)).collect())
            .collect()
    }

    /// Matrix with rows and columns reordered so that new index `k` holds old
    /// index `perm[k]`.
    pub fn permuted(&self, perm: &[usize]) -> Result<Self, AhpError> {
        let n = self.order;
        let mut seen = vec![false; n];
        if perm.len() != n || perm.iter().any(|&p| p >= n || std::mem::replace(&mut seen[p], true)) {
            return Err(AhpError::DimensionMismatch(format!(
                "{perm:?} is not a permutation of 0..{n}"
            )));
        }
        let entries = match &self.entries {
            Entries::Dense(_) => {
                let mut flat = Vec::with_capacity(n * n);
                for &i in perm {
                    for &j in perm {
                        flat.push(self.entry(i, j));
                    }
                }
                Entries::Dense(flat)
            }
            Entries::Ratio(s) => Entries::Ratio(perm.iter().map(|&p| s[p]).collect()),
        };
        Ok(PairwiseMatrix { order: n, entries })
    }

    fn multiply(&self, v: &[f64], out: &mut [f64]) {
        let n = self.order;
        match &self.entries {
            Entries::Dense(a) => {
                for (i, o) in out.iter_mut().enumerate() {
                    let row = &a[i * n..(i + 1) * n];
                    *o = row.iter().zip(v).map(|(x, y)| x * y).sum();
                }
            }
            Entries::Ratio(s) => {
                for (i, o) in out.iter_mut().enumerate() {
                    let si = s[i];
                    *o = s.iter().zip(v).map(|(sj, y)| (si / sj) * y).sum();
                }
            }
        }
    }
}

impl PartialEq for PairwiseMatrix {
    fn eq(&self, other: &Self) -> bool {
        self.order == other.order
            && (0..self.order)
                .all(|i| (0..self.order).all(|j| self.entry(i, j) == other.entry(i, j)))
    }
}

/// Builds a pairwise matrix from its strict upper triangle, given row by row.
pub fn build_pairwise(order: usize, upper: &[f64]) -> Result<PairwiseMatrix, AhpError> {
    if order == 0 {
        return Err(AhpError::EmptyMatrix);
    }
    let expected = order * (order - 1) / 2;
    if upper.len() != expected {
        return Err(AhpError::JudgmentCount {
            order,
            expected,
            actual: upper.len(),
        });
    }
    if let Some((index, &value)) = upper
        .iter()
        .enumerate()
        .find(|(_, v)| !(v.is_finite() && **v > 0.0))
    {
        return Err(AhpError::InvalidJudgment { index, value });
    }
    let mut flat = vec![1.0; order * order];
    let mut judgments = upper.iter();
    for i in 0..order {
        for j in (i + 1)..order {
            let a = *judgments.next().expect("count checked above");
            flat[i * order + j] = a;
            flat[j * order + i] = 1.0 / a;
        }
    }
    Ok(PairwiseMatrix {
        order,
        entries: Entries::Dense(flat),
    })
}

/// The perfectly consistent matrix `entries[i][j] = scores[i] / scores[j]`.
pub fn ratio_matrix(scores: &[f64]) -> Result<PairwiseMatrix, AhpError> {
    if scores.is_empty() {
        return Err(AhpError::EmptyMatrix);
    }
    if let Some((index, &value)) = scores
        .iter()
        .enumerate()
        .find(|(_, v)| !(v.is_finite() && **v > 0.0))
    {
        return Err(AhpError::InvalidScore { index, value });
    }
    Ok(PairwiseMatrix {
        order: scores.len(),
        entries: Entries::Ratio(scores.to_vec()),
    })
}

/// Non-negative priorities summing to one.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct WeightVector(Vec<f64>);

impl WeightVector {
    /// Accepts weights that already sum to one.
    pub fn new(weights: Vec<f64>) -> Result<Self, AhpError> {
        let sum: f64 = weights.iter().sum();
        if weights.is_empty()
            || weights.iter().any(|w| !(w.is_finite() && *w >= 0.0))
            || (sum - 1.0).abs() > SUM_TOLERANCE
        {
            return Err(AhpError::NotNormalized { sum });
        }
        Ok(WeightVector(weights))
    }

    /// Divides positive scores by their sum.
    pub fn normalize(scores: &[f64]) -> Result<Self, AhpError> {
        if scores.is_empty() {
            return Err(AhpError::EmptyMatrix);
        }
        if let Some((index, &value)) = scores
            .iter()
            .enumerate()
            .find(|(_, v)| !(v.is_finite() && **v > 0.0))
        {
            return Err(AhpError::InvalidScore { index, value });
        }
        let total: f64 = scores.iter().sum();
        Ok(WeightVector(scores.iter().map(|s| s / total).collect()))
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn into_inner(self) -> Vec<f64> {
        self.0
    }
}

impl std::ops::Index<usize> for WeightVector {
    type Output = f64;
    fn index(&self, i: usize) -> &f64 {
        &self.0[i]
    }
}

/// Result of power iteration.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PrincipalEigen {
    pub weights: WeightVector,
    pub lambda_max: f64,
    pub iterations: usize,
    pub converged: bool,
}

/// Normalized principal right eigenvector and its eigenvalue.
///
/// The eigenvalue is the Rayleigh quotient `w.Aw / w.w` at the final iterate.
pub fn principal_weights(m: &PairwiseMatrix) -> Result<(WeightVector, f64), AhpError> {
    let eigen = power_iteration(m);
    if eigen.converged {
        Ok((eigen.weights, eigen.lambda_max))
    } else {
        Err(AhpError::NotConverged {
            iterations: eigen.iterations,
            last: Box::new(eigen),
        })
    }
}

/// Power iteration with L1 normalization, reporting convergence instead of
/// failing. See [`principal_weights`].
pub fn power_iteration(m: &PairwiseMatrix) -> PrincipalEigen {
    let n = m.order();
    let mut w = vec![1.0 / n as f64; n];
    let mut next = vec![0.0; n];
    let mut converged = false;
    let mut iterations = 0;

    while iterations < MAX_ITERATIONS {
        iterations += 1;
        m.multiply(&w, &mut next);
        let total: f64 = next.iter().sum();
        next.iter_mut().for_each(|x| *x /= total);
        let delta = w
            .iter()
            .zip(&next)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max);
        std::mem::swap(&mut w, &mut next);
        if delta < CONVERGENCE_TOLERANCE {
            converged = true;
            break;
        }
    }

    m.multiply(&w, &mut next);
    let numerator: f64 = w.iter().zip(&next).map(|(a, b)| a * b).sum();
    let denominator: f64 = w.iter().map(|a| a * a).sum();

    PrincipalEigen {
        weights: WeightVector(w),
        lambda_max: numerator / denominator,
        iterations,
        converged,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConsistencyReport {
    pub lambda_max: f64,
    pub ci: f64,
    pub ri: f64,
    pub cr: f64,
    pub acceptable: bool,
}

pub fn random_index(order: usize) -> Result<f64, AhpError> {
    match order {
        0 => Err(AhpError::EmptyMatrix),
        n if n > RANDOM_INDEX.len() => Err(AhpError::OrderTooLarge {
            order: n,
            max: RANDOM_INDEX.len(),
        }),
        n => Ok(RANDOM_INDEX[n - 1]),
    }
}

pub fn consistency_report(m: &PairwiseMatrix, lambda_max: f64) -> Result<ConsistencyReport, AhpError> {
    let n = m.order();
    let ri = random_index(n)?;
    let ci = if n <= 1 {
        0.0
    } else {
        (lambda_max - n as f64) / (n as f64 - 1.0)
    };
    let cr = if n <= 2 { 0.0 } else { ci / ri };
    Ok(ConsistencyReport {
        lambda_max,
        ci,
        ri,
        cr,
        acceptable: cr <= CR_THRESHOLD,
    })
}

/// `global[i] = sum_k criteria[k] * local[k][i]`, summed in criterion order.
pub fn aggregate_global(criteria: &WeightVector, local: &[WeightVector]) -> Result<Vec<f64>, AhpError> {
    if criteria.len() != local.len() {
        return Err(AhpError::DimensionMismatch(format!(
            "{} criteria weights but {} local priority rows",
            criteria.len(),
            local.len()
        )));
    }
    let alternatives = local.first().map_or(0, WeightVector::len);
    if let Some((k, row)) = local.iter().enumerate().find(|(_, r)| r.len() != alternatives) {
        return Err(AhpError::DimensionMismatch(format!(
            "local row {k} has {} alternatives, expected {alternatives}",
            row.len()
        )));
    }
    let mut global = vec![0.0; alternatives];
    for (weight, row) in criteria.as_slice().iter().zip(local) {
        for (g, p) in global.iter_mut().zip(row.as_slice()) {
            *g += weight * p;
        }
    }
    Ok(global)
}

/// The Saaty intensities 1..=9 and their reciprocals.
pub fn is_saaty_judgment(value: f64) -> bool {
    value.is_finite()
        && value > 0.0
        && (1..=9).any(|k| {
            let k = k as f64;
            ((value - k) / k).abs() <= SAATY_TOLERANCE || ((value * k) - 1.0).abs() <= SAATY_TOLERANCE
        })
}

/// All 17 values of the Saaty scale in increasing order.
pub fn saaty_scale() -> Vec<f64> {
    let mut scale: Vec<f64> = (2..=9).rev().map(|k| 1.0 / k as f64).collect();
    scale.extend((1..=9).map(|k| k as f64));
    scale
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn build_two_by_two() {
        let m = build_pairwise(2, &[3.0]).unwrap();
        assert_eq!(m.to_rows(), vec![vec![1.0, 3.0], vec![1.0 / 3.0, 1.0]]);
    }

    #[test]
    fn build_unit_judgments() {
        let m = build_pairwise(3, &[1.0, 1.0, 1.0]).unwrap();
        assert!(m.to_rows().iter().flatten().all(|&x| x == 1.0));
    }

    #[test]
    fn build_rejects_bad_input() {
        assert!(matches!(
            build_pairwise(3, &[2.0, 4.0, 0.0]),
            Err(AhpError::InvalidJudgment { index: 2, .. })
        ));
        assert!(matches!(
            build_pairwise(3, &[2.0, 4.0]),
            Err(AhpError::JudgmentCount { expected: 3, actual: 2, .. })
        ));
        assert!(build_pairwise(2, &[f64::NAN]).is_err());
        assert!(build_pairwise(2, &[f64::INFINITY]).is_err());
        assert_eq!(build_pairwise(0, &[]), Err(AhpError::EmptyMatrix));
        assert_eq!(build_pairwise(1, &[]).unwrap().to_rows(), vec![vec![1.0]]);
    }

    #[test]
    fn from_rows_checks_invariants() {
        assert!(matches!(
            PairwiseMatrix::from_rows(vec![vec![1.0, 2.0], vec![0.4, 1.0]]),
            Err(AhpError::NotReciprocal { .. })
        ));
        assert!(matches!(
            PairwiseMatrix::from_rows(vec![vec![2.0, 2.0], vec![0.5, 1.0]]),
            Err(AhpError::Diagonal { index: 0, .. })
        ));
        assert!(matches!(
            PairwiseMatrix::from_rows(vec![vec![1.0, -2.0], vec![-0.5, 1.0]]),
            Err(AhpError::NonPositiveEntry { .. })
        ));
        assert!(matches!(
            PairwiseMatrix::from_rows(vec![vec![1.0, 2.0], vec![0.5]]),
            Err(AhpError::NotSquare { .. })
        ));
    }

    #[test]
    fn uniform_matrix_weights() {
        let m = build_pairwise(3, &[1.0, 1.0, 1.0]).unwrap();
        let (w, lambda) = principal_weights(&m).unwrap();
        for x in w.as_slice() {
            assert_abs_diff_eq!(*x, 1.0 / 3.0, epsilon = 1e-12);
        }
        assert_abs_diff_eq!(lambda, 3.0, epsilon = 1e-12);
    }

    #[test]
    fn ratio_matrix_weights() {
        let m = ratio_matrix(&[4.0, 2.0, 1.0]).unwrap();
        assert_eq!(m.entry(0, 1), 2.0);
        assert_eq!(m.entry(0, 2), 4.0);
        assert_eq!(m.entry(1, 2), 2.0);
        let (w, lambda) = principal_weights(&m).unwrap();
        assert_abs_diff_eq!(w[0], 4.0 / 7.0, epsilon = 1e-12);
        assert_abs_diff_eq!(w[1], 2.0 / 7.0, epsilon = 1e-12);
        assert_abs_diff_eq!(w[2], 1.0 / 7.0, epsilon = 1e-12);
        assert_abs_diff_eq!(lambda, 3.0, epsilon = 1e-12);
    }

    #[test]
    fn ratio_matrix_equal_scores_is_all_ones() {
        let m = ratio_matrix(&[5.0; 4]).unwrap();
        assert!(m.to_rows().iter().flatten().all(|&x| x == 1.0));
    }

    #[test]
    fn ratio_matrix_rejects_bad_scores() {
        assert!(matches!(ratio_matrix(&[1.0, 0.0]), Err(AhpError::InvalidScore { index: 1, .. })));
        assert!(ratio_matrix(&[-1.0]).is_err());
        assert!(ratio_matrix(&[f64::NAN]).is_err());
        assert_eq!(ratio_matrix(&[]), Err(AhpError::EmptyMatrix));
    }

    #[test]
    fn consistent_property_instance() {
        let (w, _) = principal_weights(&ratio_matrix(&[3.0, 1.0, 2.0]).unwrap()).unwrap();
        for (x, e) in w.as_slice().iter().zip([0.5, 1.0 / 6.0, 1.0 / 3.0]) {
            assert_abs_diff_eq!(*x, e, epsilon = 1e-9);
        }
    }

    #[test]
    fn two_by_two_is_always_consistent() {
        for a in saaty_scale() {
            let m = build_pairwise(2, &[a]).unwrap();
            let (_, lambda) = principal_weights(&m).unwrap();
            let report = consistency_report(&m, lambda).unwrap();
            assert_eq!(report.cr, 0.0);
            assert!(report.acceptable);
        }
    }

    #[test]
    fn consistency_of_ratio_matrix_is_zero() {
        let m = ratio_matrix(&[9.0, 3.0, 7.0, 1.0, 2.5]).unwrap();
        let (_, lambda) = principal_weights(&m).unwrap();
        let report = consistency_report(&m, lambda).unwrap();
        assert_abs_diff_eq!(report.cr, 0.0, epsilon = 1e-9);
        assert!(report.acceptable);
        assert_eq!(report.ri, 1.12);
    }

    #[test]
    fn consistency_rejects_large_order() {
        let m = ratio_matrix(&[1.0; 11]).unwrap();
        assert!(matches!(
            consistency_report(&m, 11.0),
            Err(AhpError::OrderTooLarge { order: 11, max: 10 })
        ));
        assert!(consistency_report(&ratio_matrix(&[1.0; 10]).unwrap(), 10.0).is_ok());
    }

    #[test]
    fn single_element_report() {
        let m = build_pairwise(1, &[]).unwrap();
        let (w, lambda) = principal_weights(&m).unwrap();
        assert_eq!(w.as_slice(), &[1.0]);
        let report = consistency_report(&m, lambda).unwrap();
        assert_eq!((report.ci, report.cr), (0.0, 0.0));
    }

    #[test]
    fn aggregate_examples() {
        let criteria = WeightVector::new(vec![0.5, 0.5]).unwrap();
        let local = [
            WeightVector::new(vec![0.6, 0.4]).unwrap(),
            WeightVector::new(vec![0.2, 0.8]).unwrap(),
        ];
        let global = aggregate_global(&criteria, &local).unwrap();
        assert_abs_diff_eq!(global[0], 0.4, epsilon = 1e-15);
        assert_abs_diff_eq!(global[1], 0.6, epsilon = 1e-15);

        let single = WeightVector::new(vec![1.0]).unwrap();
        let row = WeightVector::new(vec![0.1, 0.2, 0.7]).unwrap();
        assert_eq!(aggregate_global(&single, std::slice::from_ref(&row)).unwrap(), row.as_slice());

        let uniform = WeightVector::normalize(&[1.0; 4]).unwrap();
        let skewed = WeightVector::new(vec![0.7, 0.2, 0.1]).unwrap();
        let global =
            aggregate_global(&skewed, &[uniform.clone(), uniform.clone(), uniform]).unwrap();
        for g in global {
            assert_abs_diff_eq!(g, 0.25, epsilon = 1e-15);
        }
    }

    #[test]
    fn aggregate_dimension_mismatch() {
        let criteria = WeightVector::new(vec![0.5, 0.5]).unwrap();
        let row = WeightVector::new(vec![1.0]).unwrap();
        assert!(aggregate_global(&criteria, std::slice::from_ref(&row)).is_err());
        let other = WeightVector::new(vec![0.5, 0.5]).unwrap();
        assert!(aggregate_global(&criteria, &[row, other]).is_err());
    }

    #[test]
    fn weight_vector_validation() {
        assert!(WeightVector::new(vec![0.5, 0.6]).is_err());
        assert!(WeightVector::new(vec![1.5, -0.5]).is_err());
        assert!(WeightVector::new(vec![]).is_err());
        assert!(WeightVector::normalize(&[1.0, 0.0]).is_err());
    }

    #[test]
    fn saaty_membership() {
        assert_eq!(saaty_scale().len(), 17);
        assert!(saaty_scale().into_iter().all(is_saaty_judgment));
        for bad in [0.0, 10.0, 2.5, 0.3, -1.0, f64::NAN, 1.0 / 10.0] {
            assert!(!is_saaty_judgment(bad), "{bad}");
        }
    }

    #[test]
    fn permutation_roundtrip() {
        let m = build_pairwise(3, &[3.0, 5.0, 3.0]).unwrap();
        let p = m.permuted(&[2, 0, 1]).unwrap();
        assert_eq!(p.entry(0, 1), m.entry(2, 0));
        assert!(m.permuted(&[0, 0, 1]).is_err());
        assert!(m.permuted(&[0, 1]).is_err());
    }
}
