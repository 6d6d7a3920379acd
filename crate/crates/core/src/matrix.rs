//! Dense complex matrices: operator norms, Hermitian square roots, defect
//! operators, positive-semidefiniteness tests and Haar unitaries.

use nalgebra::DMatrix;
use num_complex::Complex64 as C64;

use crate::rng::RngStream;
use crate::{Error, Result};

pub type CMat = DMatrix<C64>;

/// Slack on the contraction status of a norm certificate.
pub const CONTRACTION_SLACK: f64 = 1e-9;
/// Eigenvalues down to this are clamped to zero by [`psd_sqrt`].
pub const EIG_CLAMP: f64 = -1e-10;
/// Hermitian symmetry tolerance for [`psd_sqrt`].
pub const HERMITIAN_TOL: f64 = 1e-12;

fn check_finite(m: &CMat) -> Result<()> {
    if m.iter().all(|c| c.re.is_finite() && c.im.is_finite()) {
        Ok(())
    } else {
        Err(Error::NonFinite)
    }
}

/// Largest singular value.
pub fn operator_norm(m: &CMat) -> Result<f64> {
    check_finite(m)?;
    if m.is_empty() {
        return Ok(0.0);
    }
    let sv = m.clone().svd(false, false).singular_values;
    Ok(sv.iter().copied().fold(0.0, f64::max))
}

/// Largest singular value by power iteration on `M* M`, stopped at relative change `tol`.
pub fn operator_norm_power(m: &CMat, tol: f64, max_iter: usize) -> Result<f64> {
    check_finite(m)?;
    if m.is_empty() {
        return Ok(0.0);
    }
    let g = m.adjoint() * m;
    let n = g.ncols();
    // deterministic start with no special alignment to any basis vector
    let mut v = nalgebra::DVector::<C64>::from_fn(n, |i, _| C64::new(1.0 + 0.1 * i as f64, 0.3 * (i as f64).sin()));
    let mut lambda = 0.0;
    for _ in 0..max_iter {
        let nv = v.norm();
        if nv == 0.0 {
            return Ok(0.0);
        }
        v /= C64::new(nv, 0.0);
        let gv = &g * &v;
        let next = gv.norm();
        if (next - lambda).abs() <= tol * next.max(f64::MIN_POSITIVE) {
            return Ok(next.sqrt());
        }
        lambda = next;
        v = gv;
    }
    Ok(lambda.sqrt())
}

/// Max entrywise deviation from Hermitian symmetry.
pub fn hermitian_defect(m: &CMat) -> f64 {
    let mut worst: f64 = 0.0;
    for i in 0..m.nrows() {
        for j in 0..m.ncols() {
            worst = worst.max((m[(i, j)] - m[(j, i)].conj()).norm());
        }
    }
    worst
}

fn check_square(m: &CMat) -> Result<()> {
    if m.nrows() != m.ncols() {
        return Err(Error::Dimension(format!(
            "expected a square matrix, got {}x{}",
            m.nrows(),
            m.ncols()
        )));
    }
    Ok(())
}

/// Sorted eigenvalues of a Hermitian matrix (ascending).
pub fn hermitian_eigenvalues(m: &CMat) -> Vec<f64> {
    let mut ev: Vec<f64> = m.clone().symmetric_eigen().eigenvalues.iter().copied().collect();
    ev.sort_by(f64::total_cmp);
    ev
}

/// Hermitian square root of a positive-semidefinite Hermitian matrix.
pub fn psd_sqrt(p: &CMat) -> Result<CMat> {
    check_square(p)?;
    check_finite(p)?;
    let scale = p.iter().map(|c| c.norm()).fold(1.0, f64::max);
    let herm = hermitian_defect(p);
    if herm > HERMITIAN_TOL * scale {
        return Err(Error::NotHermitian(herm));
    }
    if p.is_empty() {
        return Ok(p.clone());
    }
    let sym = (p + p.adjoint()) * C64::new(0.5, 0.0);
    let eig = sym.symmetric_eigen();
    let mut roots = Vec::with_capacity(eig.eigenvalues.len());
    for &lam in eig.eigenvalues.iter() {
        if lam < EIG_CLAMP {
            return Err(Error::NegativeEigenvalue(lam));
        }
        roots.push(C64::new(lam.max(0.0).sqrt(), 0.0));
    }
    let q = &eig.eigenvectors;
    let d = DMatrix::from_diagonal(&nalgebra::DVector::from_vec(roots));
    Ok(q * d * q.adjoint())
}

/// Square matrix carrying its recomputable largest singular value.
#[derive(Clone, Debug, PartialEq)]
pub struct ContractionMatrix {
    entries: CMat,
    norm: f64,
}

impl ContractionMatrix {
    /// Wrap any finite square matrix, certifying its norm. Contraction status is not required.
    pub fn new(entries: CMat) -> Result<Self> {
        check_square(&entries)?;
        let norm = operator_norm(&entries)?;
        Ok(Self { entries, norm })
    }

    /// Wrap a matrix that must be a contraction.
    pub fn contraction(entries: CMat) -> Result<Self> {
        let m = Self::new(entries)?;
        if !m.is_contraction() {
            return Err(Error::NotContraction(m.norm));
        }
        Ok(m)
    }

    pub fn identity(n: usize) -> Self {
        Self {
            entries: CMat::identity(n, n),
            norm: if n == 0 { 0.0 } else { 1.0 },
        }
    }

    pub fn zeros(n: usize) -> Self {
        Self {
            entries: CMat::zeros(n, n),
            norm: 0.0,
        }
    }

    pub fn diagonal(values: &[C64]) -> Result<Self> {
        Self::new(DMatrix::from_diagonal(&nalgebra::DVector::from_column_slice(values)))
    }

    pub fn dim(&self) -> usize {
        self.entries.nrows()
    }

    pub fn entries(&self) -> &CMat {
        &self.entries
    }

    pub fn into_entries(self) -> CMat {
        self.entries
    }

    pub fn norm_certificate(&self) -> f64 {
        self.norm
    }

    pub fn is_contraction(&self) -> bool {
        self.norm <= 1.0 + CONTRACTION_SLACK
    }

    pub fn adjoint(&self) -> Self {
        Self {
            entries: self.entries.adjoint(),
            norm: self.norm,
        }
    }

    pub fn transpose(&self) -> Self {
        Self {
            entries: self.entries.transpose(),
            norm: self.norm,
        }
    }
}

/// `(I - A* A)^{1/2}`.
pub fn defect(a: &ContractionMatrix) -> Result<CMat> {
    if !a.is_contraction() {
        return Err(Error::NotContraction(a.norm_certificate()));
    }
    let n = a.dim();
    let e = a.entries();
    let p = CMat::identity(n, n) - e.adjoint() * e;
    psd_sqrt(&p)
}

/// Positive-semidefiniteness with its smallest eigenvalue.
pub fn psd_check(m: &CMat, tol: f64) -> Result<(bool, f64)> {
    check_square(m)?;
    check_finite(m)?;
    let herm = hermitian_defect(m);
    if herm > tol {
        return Err(Error::NotHermitian(herm));
    }
    if m.is_empty() {
        return Ok((true, 0.0));
    }
    let sym = (m + m.adjoint()) * C64::new(0.5, 0.0);
    let min = hermitian_eigenvalues(&sym)[0];
    Ok((min >= -tol, min))
}

/// Matrix of independent standard complex Gaussians.
pub fn gaussian_matrix(rows: usize, cols: usize, rng: &mut RngStream) -> CMat {
    CMat::from_fn(rows, cols, |_, _| rng.complex_gaussian())
}

/// Haar unitary: QR of a complex Gaussian matrix with `R`'s diagonal phases moved into `Q`.
pub fn haar_unitary(n: usize, rng: &mut RngStream) -> CMat {
    let z = gaussian_matrix(n, n, rng);
    let qr = z.qr();
    let mut q = qr.q();
    let r = qr.r();
    for j in 0..n {
        let d = r[(j, j)];
        let phase = if d.norm() > 0.0 { d / d.norm() } else { C64::new(1.0, 0.0) };
        for i in 0..n {
            q[(i, j)] *= phase;
        }
    }
    q
}

/// Eigenvalues of a square complex matrix, read off the complex Schur form.
pub fn eigenvalues(m: &CMat) -> Vec<C64> {
    let (_, t) = m.clone().schur().unpack();
    (0..t.nrows()).map(|i| t[(i, i)]).collect()
}

/// Random contraction `U diag(s) V*` with Haar `U, V` and singular values uniform in `[0, smax]`.
pub fn random_contraction(n: usize, smax: f64, rng: &mut RngStream) -> ContractionMatrix {
    let u = haar_unitary(n, rng);
    let v = haar_unitary(n, rng);
    let s: Vec<C64> = (0..n).map(|_| C64::new(smax * rng.uniform(), 0.0)).collect();
    let d = DMatrix::from_diagonal(&nalgebra::DVector::from_vec(s));
    ContractionMatrix::new(u * d * v.adjoint()).expect("finite square product")
}

/// `max |X* X - I|` entrywise.
pub fn orthonormality_defect(x: &CMat) -> f64 {
    let g = x.adjoint() * x;
    let id = CMat::identity(g.nrows(), g.ncols());
    (g - id).iter().map(|c| c.norm()).fold(0.0, f64::max)
}
