//! Reference computations for tests. Nothing here shares code with the
//! production crates: eigenpairs come from a dense Schur/SVD solver and
//! distances from 3-D unit vectors rather than the haversine formula.

use nalgebra::{DMatrix, DVector};

/// Principal eigenvalue and its eigenvector normalized to sum one.
///
/// The eigenvalue is the real eigenvalue of largest real part returned by the
/// dense Schur solver; the eigenvector spans the null space of `A - lambda I`
/// and is taken as the right singular vector of its smallest singular value.
pub fn dense_principal_eigen(rows: &[Vec<f64>]) -> (Vec<f64>, f64) {
    let n = rows.len();
    let a = DMatrix::from_fn(n, n, |i, j| rows[i][j]);
    let lambda = a
        .clone()
        .complex_eigenvalues()
        .iter()
        .filter(|z| z.im.abs() < 1e-9 * z.re.abs().max(1.0))
        .map(|z| z.re)
        .fold(f64::NEG_INFINITY, f64::max);
    let shifted = &a - DMatrix::identity(n, n) * lambda;
    let svd = shifted.svd(false, true);
    let v_t = svd.v_t.expect("requested V^T");
    let (idx, _) = svd
        .singular_values
        .iter()
        .enumerate()
        .fold((0, f64::INFINITY), |best, (i, &s)| if s < best.1 { (i, s) } else { best });
    let v: DVector<f64> = v_t.row(idx).transpose();
    let total: f64 = v.iter().sum();
    let weights = v.iter().map(|x| x / total).collect();
    (weights, lambda)
}

/// Full reciprocal matrix from a strict upper triangle, row by row.
#[allow(clippy::needless_range_loop)]
pub fn reciprocal_from_upper(n: usize, upper: &[f64]) -> Vec<Vec<f64>> {
    let mut m = vec![vec![1.0; n]; n];
    let mut it = upper.iter();
    for i in 0..n {
        for j in (i + 1)..n {
            let a = *it.next().expect("upper triangle too short");
            m[i][j] = a;
            m[j][i] = 1.0 / a;
        }
    }
    m
}

/// Global AHP scores computed the long way: dense eigenvectors of the
/// criteria matrix and of one explicit alternatives matrix per criterion,
/// then a weighted sum. `scores[k][i]` is alternative `i` on criterion `k`.
pub fn brute_force_ahp(criteria_upper: &[f64], scores: &[Vec<f64>]) -> Vec<f64> {
    let k = scores.len();
    let (criteria_weights, _) = dense_principal_eigen(&reciprocal_from_upper(k, criteria_upper));
    let n = scores[0].len();
    let mut global = vec![0.0; n];
    for (c, row) in scores.iter().enumerate() {
        let matrix: Vec<Vec<f64>> = (0..n)
            .map(|i| (0..n).map(|j| row[i] / row[j]).collect())
            .collect();
        let (local, _) = dense_principal_eigen(&matrix);
        for i in 0..n {
            global[i] += criteria_weights[c] * local[i];
        }
    }
    global
}

fn unit_vector(lat_deg: f64, lon_deg: f64) -> [f64; 3] {
    let (lat, lon) = (lat_deg.to_radians(), lon_deg.to_radians());
    [lat.cos() * lon.cos(), lat.cos() * lon.sin(), lat.sin()]
}

/// Great-circle distance from the angle between two position vectors.
pub fn vector_great_circle_km(a: (f64, f64), b: (f64, f64), radius_km: f64) -> f64 {
    let u = unit_vector(a.0, a.1);
    let v = unit_vector(b.0, b.1);
    let cross = [
        u[1] * v[2] - u[2] * v[1],
        u[2] * v[0] - u[0] * v[2],
        u[0] * v[1] - u[1] * v[0],
    ];
    let sin = (cross[0] * cross[0] + cross[1] * cross[1] + cross[2] * cross[2]).sqrt();
    let cos = u[0] * v[0] + u[1] * v[1] + u[2] * v[2];
    sin.atan2(cos) * radius_km
}
