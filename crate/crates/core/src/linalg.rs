//! Dense Hermitian helpers on top of nalgebra.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::C64;

pub type CMat = DMatrix<C64>;
pub type CVec = DVector<C64>;

/// `vᴴ A u`, conjugate-linear in `v`.
pub fn apply_form(a: &CMat, u: &[C64], v: &[C64]) -> Result<C64> {
    if a.ncols() != u.len() {
        return Err(Error::Dimension { expected: a.ncols(), got: u.len() });
    }
    if a.nrows() != v.len() {
        return Err(Error::Dimension { expected: a.nrows(), got: v.len() });
    }
    let mut s = C64::new(0.0, 0.0);
    for i in 0..a.nrows() {
        let mut row = C64::new(0.0, 0.0);
        for j in 0..a.ncols() {
            row += a[(i, j)] * u[j];
        }
        s += v[i].conj() * row;
    }
    Ok(s)
}

/// Real part of `uᴴ A u` without dimension checks.
pub fn quad(a: &CMat, u: &CVec) -> f64 {
    u.dotc(&(a * u)).re
}

/// `‖A − Aᴴ‖_F / ‖A‖_F` (0 for the zero matrix).
pub fn hermitian_defect(a: &CMat) -> f64 {
    let n = a.norm();
    if n == 0.0 {
        return 0.0;
    }
    (a - a.adjoint()).norm() / n
}

pub fn hermitize(a: &CMat) -> CMat {
    (a + a.adjoint()).scale(0.5)
}

/// Eigen-decomposition of a Hermitian matrix, eigenvalues ascending.
pub fn eigh(a: &CMat) -> (Vec<f64>, CMat) {
    let e = hermitize(a).symmetric_eigen();
    let mut order: Vec<usize> = (0..e.eigenvalues.len()).collect();
    order.sort_by(|&i, &j| e.eigenvalues[i].total_cmp(&e.eigenvalues[j]));
    let vals = order.iter().map(|&i| e.eigenvalues[i]).collect();
    let vecs = CMat::from_fn(a.nrows(), order.len(), |r, c| e.eigenvectors[(r, order[c])]);
    (vals, vecs)
}

/// Lower Cholesky factor of a Hermitian positive definite matrix.
pub fn cholesky(b: &CMat, what: &str) -> Result<CMat> {
    hermitize(b)
        .cholesky()
        .map(|c| c.l())
        .ok_or_else(|| Error::NotPositiveDefinite(what.into()))
}

/// `L⁻¹ A L⁻ᴴ` for lower-triangular `L`.
pub fn congruence_inv(l: &CMat, a: &CMat) -> CMat {
    let x = l.solve_lower_triangular(a).expect("nonsingular triangular factor");
    let y = l.solve_lower_triangular(&x.adjoint()).expect("nonsingular triangular factor");
    hermitize(&y.adjoint())
}

/// Solution of the generalized problem `A v = λ B v`.
#[derive(Debug, Clone)]
pub struct GenEig {
    pub values: Vec<f64>,
    /// `B`-orthonormal eigenvectors as columns.
    pub vectors: CMat,
}

/// Generalized Hermitian-definite eigenproblem via Cholesky whitening of `B`.
pub fn gen_eigh(a: &CMat, b: &CMat) -> Result<GenEig> {
    let l = cholesky(b, "generalized eigenproblem metric")?;
    let c = congruence_inv(&l, a);
    let (values, w) = eigh(&c);
    let vectors = l.adjoint().solve_upper_triangular(&w).expect("nonsingular triangular factor");
    if values.iter().any(|v| !v.is_finite()) {
        return Err(Error::Eigen { mode: usize::MAX, reason: "non-finite eigenvalue".into() });
    }
    Ok(GenEig { values, vectors })
}

/// Applies `f(λ)` to a Hermitian matrix through its eigen-decomposition.
pub fn hermitian_function(a: &CMat, f: impl Fn(f64) -> f64) -> CMat {
    let (vals, v) = eigh(a);
    let mut scaled = v.clone();
    for (j, &l) in vals.iter().enumerate() {
        let s = f(l);
        scaled.column_mut(j).scale_mut(s);
    }
    &scaled * v.adjoint()
}

pub fn to_cvec(x: &[C64]) -> CVec {
    CVec::from_column_slice(x)
}
