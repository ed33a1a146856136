//! Tiny dense linear algebra for the n <= 8 matrices this crate touches:
//! LU-based determinant/inverse, matrix-vector products, and
//! orthonormal-basis completion. Matrices are row-major Vec<Vec<f64>>.

use crate::error::{Error, Result};

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    debug_assert_eq!(a.len(), b.len());
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

pub fn normalize(a: &[f64]) -> Vec<f64> {
    let n = norm(a);
    assert!(n > 0.0, "cannot normalize the zero vector");
    a.iter().map(|x| x / n).collect()
}

pub fn scale(a: &[f64], s: f64) -> Vec<f64> {
    a.iter().map(|x| x * s).collect()
}

pub fn add_scaled(a: &[f64], b: &[f64], s: f64) -> Vec<f64> {
    a.iter().zip(b).map(|(x, y)| x + s * y).collect()
}

pub fn mat_vec(m: &[Vec<f64>], x: &[f64]) -> Vec<f64> {
    m.iter().map(|row| dot(row, x)).collect()
}

pub fn transpose(m: &[Vec<f64>]) -> Vec<Vec<f64>> {
    let n = m.len();
    let mut t = vec![vec![0.0; n]; n];
    for i in 0..n {
        for j in 0..n {
            t[j][i] = m[i][j];
        }
    }
    t
}

/// LU decomposition with partial pivoting; returns (lu, perm, det).
fn lu_decompose(m: &[Vec<f64>]) -> Result<(Vec<Vec<f64>>, Vec<usize>, f64)> {
    let n = m.len();
    let mut lu: Vec<Vec<f64>> = m.to_vec();
    let mut perm: Vec<usize> = (0..n).collect();
    let mut det = 1.0;
    for col in 0..n {
        let (pivot_row, pivot_abs) = (col..n)
            .map(|r| (r, lu[r][col].abs()))
            .max_by(|a, b| a.1.total_cmp(&b.1))
            .expect("square matrix");
        if pivot_abs == 0.0 {
            return Err(Error::InvalidParameter(
                "singular matrix (zero pivot in LU)".into(),
            ));
        }
        if pivot_row != col {
            lu.swap(pivot_row, col);
            perm.swap(pivot_row, col);
            det = -det;
        }
        det *= lu[col][col];
        for r in col + 1..n {
            let f = lu[r][col] / lu[col][col];
            lu[r][col] = f;
            for c in col + 1..n {
                lu[r][c] -= f * lu[col][c];
            }
        }
    }
    Ok((lu, perm, det))
}

pub fn determinant(m: &[Vec<f64>]) -> Result<f64> {
    lu_decompose(m).map(|(_, _, d)| d)
}

/// Matrix inverse via LU. Errors on singular input; callers should also
/// consult [`condition_estimate`] when near-singularity matters.
pub fn inverse(m: &[Vec<f64>]) -> Result<Vec<Vec<f64>>> {
    let n = m.len();
    let (lu, perm, _) = lu_decompose(m)?;
    let mut inv = vec![vec![0.0; n]; n];
    for k in 0..n {
        // solve A x = e_k
        let mut y = vec![0.0; n];
        for i in 0..n {
            let mut s = if perm[i] == k { 1.0 } else { 0.0 };
            for j in 0..i {
                s -= lu[i][j] * y[j];
            }
            y[i] = s;
        }
        for i in (0..n).rev() {
            let mut s = y[i];
            for j in i + 1..n {
                s -= lu[i][j] * inv[j][k];
            }
            inv[i][k] = s / lu[i][i];
        }
    }
    Ok(inv)
}

/// Cholesky factor L with A = L L^T, or an error when `m` is not
/// symmetric positive definite (the standard SPD test).
pub fn cholesky(m: &[Vec<f64>]) -> Result<Vec<Vec<f64>>> {
    let n = m.len();
    let scale = m
        .iter()
        .flat_map(|r| r.iter())
        .fold(0.0f64, |a, &x| a.max(x.abs()));
    for i in 0..n {
        for j in 0..i {
            if (m[i][j] - m[j][i]).abs() > 1e-10 * scale.max(1.0) {
                return Err(Error::InvalidParameter(format!(
                    "matrix not symmetric at ({i},{j})"
                )));
            }
        }
    }
    let mut l = vec![vec![0.0; n]; n];
    for i in 0..n {
        for j in 0..=i {
            let mut s = m[i][j];
            for k in 0..j {
                s -= l[i][k] * l[j][k];
            }
            if i == j {
                if s <= 0.0 {
                    return Err(Error::InvalidParameter(format!(
                        "matrix not positive definite (pivot {s:e} at row {i})"
                    )));
                }
                l[i][j] = s.sqrt();
            } else {
                l[i][j] = s / l[j][j];
            }
        }
    }
    Ok(l)
}

/// Cheap condition estimate: ||A||_F ||A^-1||_F (an upper-bound proxy).
pub fn condition_estimate(m: &[Vec<f64>]) -> Result<f64> {
    let inv = inverse(m)?;
    let frob = |a: &[Vec<f64>]| -> f64 {
        a.iter()
            .flat_map(|r| r.iter())
            .map(|x| x * x)
            .sum::<f64>()
            .sqrt()
    };
    Ok(frob(m) * frob(&inv))
}

/// Complete a unit vector `u` to an orthonormal basis; returns the n-1
/// vectors spanning the hyperplane orthogonal to `u` (deterministic:
/// Gram-Schmidt over the coordinate axes, skipping the axis most
/// parallel to `u`).
pub fn orthonormal_complement(u: &[f64]) -> Vec<Vec<f64>> {
    let n = u.len();
    let u = normalize(u);
    let skip = (0..n)
        .max_by(|&i, &j| u[i].abs().total_cmp(&u[j].abs()))
        .expect("non-empty vector");
    let mut basis: Vec<Vec<f64>> = vec![u.clone()];
    for i in 0..n {
        if i == skip {
            continue;
        }
        let mut v = vec![0.0; n];
        v[i] = 1.0;
        for b in &basis {
            let c = dot(&v, b);
            v = add_scaled(&v, b, -c);
        }
        let nv = norm(&v);
        assert!(nv > 1e-12, "basis completion degenerated");
        basis.push(scale(&v, 1.0 / nv));
    }
    basis.remove(0);
    basis
}
