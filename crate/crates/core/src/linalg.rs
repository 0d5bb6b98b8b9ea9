//! Dense complex linear algebra helpers on top of faer.

use faer::{Mat, MatRef, Side};
use num_complex::Complex64;

use crate::error::{BdkError, Result};

pub type CMat = Mat<Complex64>;

/// Orthonormal basis of the column span, by column-pivoted QR.
///
/// A column of R is kept when its diagonal entry exceeds `rel_tol` times the
/// largest one (the largest candidate column norm).
pub fn orthonormal_columns(a: MatRef<'_, Complex64>, rel_tol: f64) -> CMat {
    orthonormalize(a, |largest| rel_tol * largest)
}

/// As [`orthonormal_columns`] with an absolute threshold on the R diagonal.
pub fn orthonormal_columns_abs(a: MatRef<'_, Complex64>, abs_tol: f64) -> CMat {
    orthonormalize(a, |_| abs_tol)
}

fn orthonormalize(a: MatRef<'_, Complex64>, threshold: impl Fn(f64) -> f64) -> CMat {
    let (m, n) = (a.nrows(), a.ncols());
    if m == 0 || n == 0 {
        return CMat::zeros(m, 0);
    }
    let qr = a.col_piv_qr();
    let r = qr.thin_R();
    let k = m.min(n);
    let largest = r[(0, 0)].norm();
    if largest == 0.0 {
        return CMat::zeros(m, 0);
    }
    let cut = threshold(largest);
    let rank = (0..k).take_while(|&i| r[(i, i)].norm() > cut).count();
    let q = qr.compute_thin_Q();
    q.subcols(0, rank).to_owned()
}

/// x − B(B* x) for B with orthonormal columns.
pub fn project_out(basis: MatRef<'_, Complex64>, x: MatRef<'_, Complex64>) -> CMat {
    if basis.ncols() == 0 {
        return x.to_owned();
    }
    let coeffs = basis.adjoint() * x;
    x - basis * &coeffs
}

/// Squared Frobenius norm.
pub fn frobenius_sqr(a: MatRef<'_, Complex64>) -> f64 {
    let mut acc = 0.0;
    for j in 0..a.ncols() {
        for i in 0..a.nrows() {
            acc += a[(i, j)].norm_sqr();
        }
    }
    acc
}

/// Eigenvalues of a Hermitian matrix in ascending order.
pub fn hermitian_eigenvalues(a: MatRef<'_, Complex64>) -> Result<Vec<f64>> {
    if a.nrows() == 0 {
        return Ok(Vec::new());
    }
    let sym = Mat::from_fn(a.nrows(), a.ncols(), |i, j| {
        (a[(i, j)] + a[(j, i)].conj()) * 0.5
    });
    let mut vals = sym
        .self_adjoint_eigenvalues(Side::Lower)
        .map_err(|e| BdkError::Linalg(format!("{e:?}")))?;
    vals.sort_by(f64::total_cmp);
    Ok(vals)
}

/// Singular values in descending order.
pub fn singular_values(a: MatRef<'_, Complex64>) -> Result<Vec<f64>> {
    if a.nrows() == 0 || a.ncols() == 0 {
        return Ok(Vec::new());
    }
    let mut vals = a
        .singular_values()
        .map_err(|e| BdkError::Linalg(format!("{e:?}")))?;
    vals.sort_by(|x, y| y.total_cmp(x));
    Ok(vals)
}

/// Eigenvalues of a general square complex matrix.
pub fn eigenvalues(a: MatRef<'_, Complex64>) -> Result<Vec<Complex64>> {
    if a.nrows() == 0 {
        return Ok(Vec::new());
    }
    a.eigenvalues()
        .map_err(|e| BdkError::Linalg(format!("{e:?}")))
}

/// Largest deviation of B*B from the identity.
pub fn orthonormality_defect(b: MatRef<'_, Complex64>) -> f64 {
    let gram = b.adjoint() * b;
    let mut worst = 0.0f64;
    for i in 0..gram.nrows() {
        for j in 0..gram.ncols() {
            let target = if i == j { 1.0 } else { 0.0 };
            worst = worst.max((gram[(i, j)] - target).norm());
        }
    }
    worst
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    #[test]
    fn rank_deficient_columns_are_dropped() {
        let a = Mat::from_fn(4, 3, |i, j| match j {
            0 => c(i as f64),
            1 => c(2.0 * i as f64),
            _ => c(if i == 0 { 1.0 } else { 0.0 }),
        });
        let q = orthonormal_columns(a.as_ref(), 1e-10);
        assert_eq!(q.ncols(), 2);
        assert!(orthonormality_defect(q.as_ref()) < 1e-13);
    }

    #[test]
    fn projection_removes_span() {
        let basis = Mat::from_fn(3, 1, |i, _| c(if i == 0 { 1.0 } else { 0.0 }));
        let x = Mat::from_fn(3, 1, |i, _| c(1.0 + i as f64));
        let r = project_out(basis.as_ref(), x.as_ref());
        assert_eq!(r[(0, 0)], c(0.0));
        assert_eq!(r[(2, 0)], c(3.0));
    }

    #[test]
    fn spectra() {
        let a = Mat::from_fn(2, 2, |i, j| if i == j { c(2.0 - i as f64) } else { c(0.0) });
        assert_eq!(hermitian_eigenvalues(a.as_ref()).unwrap(), vec![1.0, 2.0]);
        let s = singular_values(a.as_ref()).unwrap();
        assert!((s[0] - 2.0).abs() < 1e-14 && (s[1] - 1.0).abs() < 1e-14);
        let mut e = eigenvalues(a.as_ref()).unwrap();
        e.sort_by(|x, y| x.re.total_cmp(&y.re));
        assert!((e[0] - c(1.0)).norm() < 1e-14);
    }
}
