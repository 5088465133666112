//! Dense complex linear-algebra helpers shared by the estimation modules.

use nalgebra::{Cholesky, DMatrix, DVector, Dyn, SymmetricEigen};
use num_complex::Complex64;

use crate::error::{Error, Result};

pub type CMat = DMatrix<Complex64>;
pub type CVec = DVector<Complex64>;

pub(crate) const ZERO: Complex64 = Complex64::new(0.0, 0.0);
pub(crate) const ONE: Complex64 = Complex64::new(1.0, 0.0);

/// `(m + m^H) / 2`.
pub fn hermitian_part(m: &CMat) -> CMat {
    let mut out = m.clone();
    symmetrize_in_place(&mut out);
    out
}

pub(crate) fn symmetrize_in_place(m: &mut CMat) {
    let n = m.nrows();
    for j in 0..n {
        m[(j, j)] = Complex64::new(m[(j, j)].re, 0.0);
        for i in (j + 1)..n {
            let avg = (m[(i, j)] + m[(j, i)].conj()) * 0.5;
            m[(i, j)] = avg;
            m[(j, i)] = avg.conj();
        }
    }
}

/// Largest entrywise modulus of `m - m^H`.
pub fn hermitian_defect(m: &CMat) -> f64 {
    let n = m.nrows();
    let mut worst = 0.0f64;
    for j in 0..n {
        for i in 0..n {
            worst = worst.max((m[(i, j)] - m[(j, i)].conj()).norm());
        }
    }
    worst
}

/// Eigendecomposition of a Hermitian matrix with eigenvalues sorted in
/// descending order; column `i` of the returned matrix pairs with value `i`.
pub fn hermitian_eigen(m: &CMat) -> Result<(Vec<f64>, CMat)> {
    if m.nrows() != m.ncols() {
        return Err(Error::Dimension(format!(
            "eigendecomposition needs a square matrix, got {}x{}",
            m.nrows(),
            m.ncols()
        )));
    }
    let n = m.nrows();
    if n == 0 {
        return Ok((Vec::new(), CMat::zeros(0, 0)));
    }
    let eig = SymmetricEigen::try_new(hermitian_part(m), f64::EPSILON, 0)
        .ok_or_else(|| Error::Factorization("hermitian eigensolver did not converge".into()))?;
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]));
    let values = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let vectors = CMat::from_fn(n, n, |r, c| eig.eigenvectors[(r, order[c])]);
    Ok((values, vectors))
}

pub fn cholesky(m: &CMat) -> Result<Cholesky<Complex64, Dyn>> {
    if m.nrows() != m.ncols() {
        return Err(Error::Dimension(format!(
            "cholesky needs a square matrix, got {}x{}",
            m.nrows(),
            m.ncols()
        )));
    }
    let h = hermitian_part(m);
    let scale = (0..h.nrows()).map(|i| h[(i, i)].re.abs()).fold(0.0, f64::max);
    let floor = scale * h.nrows() as f64 * f64::EPSILON;
    let not_pd = || Error::Factorization("matrix is not positive definite".into());
    // The complex square root never fails, so pivots are checked here.
    let chol = Cholesky::new(h).ok_or_else(not_pd)?;
    let l = chol.l_dirty();
    for i in 0..l.nrows() {
        let d = l[(i, i)];
        if !(d.re > 0.0 && d.re * d.re > floor && d.im.abs() <= 1e-10 * d.re) {
            return Err(not_pd());
        }
    }
    Ok(chol)
}

/// Factor `C` with `C C^H = m` for a Hermitian PSD `m`, built from the
/// eigendecomposition with negative and round-off eigenvalues clipped to zero.
pub fn psd_factor(m: &CMat) -> Result<CMat> {
    let (values, mut vectors) = hermitian_eigen(m)?;
    let cutoff = values.first().map_or(0.0, |top| top.abs()) * m.nrows() as f64 * f64::EPSILON;
    for (j, v) in values.iter().enumerate() {
        let s = if *v > cutoff { v.sqrt() } else { 0.0 };
        vectors.column_mut(j).scale_mut(s);
    }
    Ok(vectors)
}

/// `ln det(m)` for a Hermitian positive definite matrix.
pub fn log_det_hpd(m: &CMat) -> Result<f64> {
    let chol = cholesky(m)?;
    let l = chol.l_dirty();
    Ok((0..m.nrows()).map(|i| 2.0 * l[(i, i)].re.ln()).sum())
}

/// `ln det` of a Hermitian PSD matrix via a semidefinite Cholesky sweep.
/// Pivots below `floor` are clamped to `floor` and their column is dropped,
/// so rank-deficient inputs give a finite (floor-limited) value.
pub fn log_det_psd(m: &CMat, floor: f64) -> f64 {
    let n = m.nrows();
    let mut a = hermitian_part(m);
    let mut total = 0.0;
    for k in 0..n {
        let pivot = a[(k, k)].re;
        if pivot <= floor {
            total += floor.ln();
            continue;
        }
        total += pivot.ln();
        let inv = 1.0 / pivot;
        for j in (k + 1)..n {
            let akj = a[(k, j)];
            if akj == ZERO {
                continue;
            }
            for i in (k + 1)..n {
                let aik = a[(i, k)];
                a[(i, j)] -= aik * akj * inv;
            }
        }
    }
    total
}

/// Dense Kronecker product `a ⊗ b`.
pub fn kron(a: &CMat, b: &CMat) -> CMat {
    let (ar, ac) = a.shape();
    let (br, bc) = b.shape();
    CMat::from_fn(ar * br, ac * bc, |r, c| {
        a[(r / br, c / bc)] * b[(r % br, c % bc)]
    })
}

/// Largest absolute eigenvalue of a Hermitian matrix.
pub fn hermitian_spectral_norm(m: &CMat) -> Result<f64> {
    let (values, _) = hermitian_eigen(m)?;
    Ok(values.iter().fold(0.0f64, |acc, v| acc.max(v.abs())))
}

pub fn trace_re(m: &CMat) -> f64 {
    (0..m.nrows().min(m.ncols())).map(|i| m[(i, i)].re).sum()
}

/// Inverse of a Hermitian positive definite matrix through its Cholesky factor.
pub fn hpd_inverse(m: &CMat) -> Result<CMat> {
    Ok(hermitian_part(&cholesky(m)?.inverse()))
}
