//! Small dense helpers on top of nalgebra.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};

pub type Mat = DMatrix<f64>;
pub type Vector = DVector<f64>;

/// Replace `m` by `(m + mᵀ) / 2` and return the asymmetry that was removed.
pub fn symmetrize(m: &mut Mat) -> f64 {
    let mut asym = 0.0_f64;
    let n = m.nrows();
    for i in 0..n {
        for j in (i + 1)..n {
            let a = m[(i, j)];
            let b = m[(j, i)];
            asym = asym.max((a - b).abs());
            let avg = 0.5 * (a + b);
            m[(i, j)] = avg;
            m[(j, i)] = avg;
        }
    }
    asym
}

pub fn max_abs(m: &Mat) -> f64 {
    m.iter().fold(0.0_f64, |acc, v| acc.max(v.abs()))
}

pub fn is_symmetric(m: &Mat, tol: f64) -> bool {
    m.is_square()
        && (0..m.nrows()).all(|i| (0..i).all(|j| (m[(i, j)] - m[(j, i)]).abs() <= tol))
}

/// Smallest eigenvalue of a symmetric matrix (`+inf` for an empty one).
pub fn min_eigenvalue(m: &Mat) -> f64 {
    if m.nrows() == 0 {
        return f64::INFINITY;
    }
    m.clone()
        .symmetric_eigen()
        .eigenvalues
        .iter()
        .cloned()
        .fold(f64::INFINITY, f64::min)
}

pub fn spectral_radius(m: &Mat) -> f64 {
    if m.nrows() == 0 {
        return 0.0;
    }
    m.complex_eigenvalues()
        .iter()
        .map(|z| z.norm())
        .fold(0.0, f64::max)
}

/// Symmetric square root `S` with `S Sᵀ = m` for a PSD matrix.
///
/// Eigenvalues in `[-1e-10, 0)` are clamped to zero; anything more negative
/// is rejected.
pub fn psd_sqrt(m: &Mat) -> Result<Mat> {
    if m.nrows() == 0 {
        return Ok(m.clone());
    }
    let eig = m.clone().symmetric_eigen();
    let mut vals = eig.eigenvalues.clone();
    for v in vals.iter_mut() {
        if *v < -1e-10 {
            return Err(Error::Numerical(format!(
                "covariance has negative eigenvalue {v:e}"
            )));
        }
        *v = v.max(0.0).sqrt();
    }
    let q = &eig.eigenvectors;
    Ok(q * Mat::from_diagonal(&vals) * q.transpose())
}

/// Trace of `a * b` without forming the product.
pub fn trace_product(a: &Mat, b: &Mat) -> f64 {
    debug_assert_eq!(a.ncols(), b.nrows());
    debug_assert_eq!(a.nrows(), b.ncols());
    let mut acc = 0.0;
    for i in 0..a.nrows() {
        for k in 0..a.ncols() {
            acc += a[(i, k)] * b[(k, i)];
        }
    }
    acc
}

/// `xᵀ m x`.
pub fn quad_form(m: &Mat, x: &Vector) -> f64 {
    if x.is_empty() {
        return 0.0;
    }
    x.dot(&(m * x))
}

/// Build a matrix from row-major nested vectors; an empty outer vector gives a 0×0 matrix.
pub fn from_rows(rows: &[Vec<f64>], field: &str) -> Result<Mat> {
    let nrows = rows.len();
    let ncols = rows.first().map_or(0, Vec::len);
    if let Some((i, r)) = rows.iter().enumerate().find(|(_, r)| r.len() != ncols) {
        return Err(Error::validation(
            field,
            format!("row {i} has {} entries, expected {ncols}", r.len()),
        ));
    }
    Ok(Mat::from_fn(nrows, ncols, |i, j| rows[i][j]))
}

pub fn to_rows(m: &Mat) -> Vec<Vec<f64>> {
    (0..m.nrows())
        .map(|i| (0..m.ncols()).map(|j| m[(i, j)]).collect())
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sqrt_reproduces_covariance() {
        let m = Mat::from_row_slice(2, 2, &[2.0, 0.5, 0.5, 1.0]);
        let s = psd_sqrt(&m).unwrap();
        assert!(max_abs(&(&s * s.transpose() - &m)) < 1e-12);
    }

    #[test]
    fn sqrt_rejects_indefinite() {
        let m = Mat::from_row_slice(2, 2, &[1.0, 0.0, 0.0, -1.0]);
        assert!(psd_sqrt(&m).is_err());
    }

    #[test]
    fn sqrt_clamps_tiny_negative() {
        let m = Mat::from_row_slice(2, 2, &[1.0, 0.0, 0.0, -1e-12]);
        let s = psd_sqrt(&m).unwrap();
        assert_eq!(s[(1, 1)], 0.0);
    }

    #[test]
    fn ragged_rows_name_the_field() {
        let err = from_rows(&[vec![1.0, 2.0], vec![3.0]], "plant.a11").unwrap_err();
        assert!(err.to_string().starts_with("plant.a11"));
    }

    #[test]
    fn trace_product_matches_dense() {
        let a = Mat::from_row_slice(2, 3, &[1.0, 2.0, 3.0, 4.0, 5.0, 6.0]);
        let b = Mat::from_row_slice(3, 2, &[1.0, -1.0, 0.5, 2.0, 0.0, 1.0]);
        assert!((trace_product(&a, &b) - (&a * &b).trace()).abs() < 1e-14);
    }
}
