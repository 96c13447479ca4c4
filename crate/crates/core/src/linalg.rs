//! Small dense linear-algebra helpers shared by the engines.

use ndarray::{Array1, Array2};
use ndarray_linalg::{Eig, Eigh, Inverse, SVD, UPLO};
use num_complex::Complex64;

use crate::{Error, Result};

pub type CMat = Array2<Complex64>;
pub type CVec = Array1<Complex64>;

pub fn c(re: f64) -> Complex64 {
    Complex64::new(re, 0.0)
}

pub fn ci(im: f64) -> Complex64 {
    Complex64::new(0.0, im)
}

/// Conjugate transpose.
pub fn dagger(m: &CMat) -> CMat {
    m.t().mapv(|z| z.conj())
}

pub fn identity(d: usize) -> CMat {
    Array2::eye(d).mapv(c)
}

pub fn to_complex(m: &Array2<f64>) -> CMat {
    m.mapv(c)
}

/// Kronecker product.
pub fn kron(a: &CMat, b: &CMat) -> CMat {
    let (ra, ca) = a.dim();
    let (rb, cb) = b.dim();
    let mut out = Array2::zeros((ra * rb, ca * cb));
    for i in 0..ra {
        for j in 0..ca {
            let aij = a[(i, j)];
            if aij == Complex64::new(0.0, 0.0) {
                continue;
            }
            for k in 0..rb {
                for l in 0..cb {
                    out[(i * rb + k, j * cb + l)] = aij * b[(k, l)];
                }
            }
        }
    }
    out
}

pub fn frobenius_norm(m: &CMat) -> f64 {
    m.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

pub fn max_abs_diff(a: &CMat, b: &CMat) -> f64 {
    a.iter()
        .zip(b.iter())
        .map(|(x, y)| (x - y).norm())
        .fold(0.0, f64::max)
}

pub fn is_hermitian(m: &CMat, tol: f64) -> bool {
    max_abs_diff(m, &dagger(m)) <= tol
}

/// Eigendecomposition of a general complex matrix: returns `(values, V, V^-1)`
/// such that `M = V diag(values) V^-1`.
pub fn eig_general(m: &CMat) -> Result<(CVec, CMat, CMat)> {
    let (vals, vecs) = m
        .eig()
        .map_err(|e| Error::Linalg(format!("general eigendecomposition: {e}")))?;
    let vinv = vecs
        .inv()
        .map_err(|e| Error::Linalg(format!("eigenvector matrix singular: {e}")))?;
    Ok((vals, vecs, vinv))
}

/// Eigendecomposition of a hermitian complex matrix (ascending eigenvalues).
///
/// The backend hands row-major data to LAPACK as if it were column-major, so
/// it effectively decomposes `conj(M)`; the eigenvalues are unaffected but the
/// returned eigenvectors must be conjugated back.
pub fn eigh_hermitian(m: &CMat) -> Result<(Vec<f64>, CMat)> {
    let std = m.as_standard_layout().to_owned();
    let (vals, vecs) = std
        .eigh(UPLO::Lower)
        .map_err(|e| Error::Linalg(format!("hermitian eigendecomposition: {e}")))?;
    Ok((vals.to_vec(), vecs.mapv(|z| z.conj())))
}

/// Eigendecomposition of a real symmetric matrix (ascending eigenvalues).
pub fn eigh_real(m: &Array2<f64>) -> Result<(Vec<f64>, Array2<f64>)> {
    let (vals, vecs) = m
        .eigh(UPLO::Lower)
        .map_err(|e| Error::Linalg(format!("symmetric eigendecomposition: {e}")))?;
    Ok((vals.to_vec(), vecs))
}

/// Smallest eigenvalue of a hermitian matrix.
pub fn min_eigenvalue(m: &CMat) -> Result<f64> {
    let (vals, _) = eigh_hermitian(m)?;
    Ok(vals.into_iter().fold(f64::INFINITY, f64::min))
}

/// Moore-Penrose pseudoinverse with relative singular-value cutoff.
pub fn pinv(m: &CMat, rcond: f64) -> Result<CMat> {
    let (u, s, vt) = m
        .svd(true, true)
        .map_err(|e| Error::Linalg(format!("svd: {e}")))?;
    let u = u.expect("svd requested u");
    let vt = vt.expect("svd requested vt");
    let smax = s.iter().cloned().fold(0.0, f64::max);
    let cutoff = rcond * smax;
    let (rows, cols) = m.dim();
    let k = s.len();
    let mut out = Array2::zeros((cols, rows));
    for idx in 0..k {
        if s[idx] > cutoff {
            let inv = c(1.0 / s[idx]);
            for i in 0..cols {
                for j in 0..rows {
                    out[(i, j)] += vt[(idx, i)].conj() * inv * u[(j, idx)].conj();
                }
            }
        }
    }
    Ok(out)
}

/// Condition number estimate from the singular values.
pub fn condition_number(m: &CMat) -> Result<f64> {
    let (_, s, _) = m
        .svd(false, false)
        .map_err(|e| Error::Linalg(format!("svd: {e}")))?;
    let smax = s.iter().cloned().fold(0.0, f64::max);
    let smin = s.iter().cloned().fold(f64::INFINITY, f64::min);
    Ok(if smin == 0.0 { f64::INFINITY } else { smax / smin })
}

/// Matrix inverse.
pub fn inverse(m: &CMat) -> Result<CMat> {
    m.inv()
        .map_err(|e| Error::Linalg(format!("matrix inverse: {e}")))
}

/// Determinant via LU factorization.
pub fn det(m: &CMat) -> Result<Complex64> {
    use ndarray_linalg::Determinant;
    m.det()
        .map_err(|e| Error::Linalg(format!("determinant: {e}")))
}

/// Matrix exponential via diagonalization (adequate for the well-conditioned
/// generators handled here).
pub fn expm(m: &CMat) -> Result<CMat> {
    let (vals, v, vinv) = eig_general(m)?;
    let d = vals.len();
    let mut tmp = v.clone();
    for j in 0..d {
        let e = vals[j].exp();
        tmp.column_mut(j).mapv_inplace(|z| z * e);
    }
    Ok(tmp.dot(&vinv))
}

/// `exp(i phase * diag)` style unitary from a hermitian eigendecomposition:
/// given `(vals, vecs)` of hermitian `H`, returns `exp(-i H t)`.
pub fn evolution_operator(vals: &[f64], vecs: &CMat, t: f64) -> CMat {
    let d = vals.len();
    let phases: Vec<Complex64> = vals.iter().map(|&e| (ci(-e * t)).exp()).collect();
    // V diag(phases) V^dagger
    let mut tmp = vecs.clone();
    for j in 0..d {
        let p = phases[j];
        tmp.column_mut(j).mapv_inplace(|z| z * p);
    }
    tmp.dot(&dagger(vecs))
}
