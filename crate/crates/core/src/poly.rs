//! Exact polynomials in three variables over the Gaussian rationals, and
//! exact dense linear algebra over the same field.

use std::collections::BTreeMap;
use std::fmt;

use num_bigint::BigInt;
use num_complex::Complex;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::C64;

/// Element of `ℚ(i)`.
pub type GaussQ = Complex<BigRational>;

pub fn gq(re: i64, im: i64) -> GaussQ {
    Complex::new(BigRational::from_integer(re.into()), BigRational::from_integer(im.into()))
}

pub fn gq_frac(num: i64, den: i64) -> GaussQ {
    Complex::new(BigRational::new(num.into(), den.into()), BigRational::zero())
}

/// Exact rational value of a finite float.
pub fn gq_from_f64(x: f64) -> Option<GaussQ> {
    BigRational::from_float(x).map(|r| Complex::new(r, BigRational::zero()))
}

pub fn gq_to_c64(z: &GaussQ) -> C64 {
    C64::new(z.re.to_f64().unwrap_or(f64::NAN), z.im.to_f64().unwrap_or(f64::NAN))
}

/// `i^k`.
fn i_pow(k: u32) -> GaussQ {
    match k % 4 {
        0 => gq(1, 0),
        1 => gq(0, 1),
        2 => gq(-1, 0),
        _ => gq(0, -1),
    }
}

pub type Exponent = [u32; 3];

/// Sparse polynomial in `(x₁, x₂, x₃)`; zero coefficients are never stored.
#[derive(Clone, PartialEq, Eq, Default)]
pub struct Poly {
    terms: BTreeMap<Exponent, GaussQ>,
}

impl fmt::Debug for Poly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        let parts: Vec<String> = self
            .terms
            .iter()
            .map(|(e, c)| format!("({} + {}i)·x^{:?}", c.re, c.im, e))
            .collect();
        write!(f, "{}", parts.join(" + "))
    }
}

impl Poly {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn constant(c: GaussQ) -> Self {
        Self::monomial(c, [0, 0, 0])
    }

    pub fn monomial(c: GaussQ, e: Exponent) -> Self {
        let mut terms = BTreeMap::new();
        if !c.is_zero() {
            terms.insert(e, c);
        }
        Self { terms }
    }

    /// The variable `x_k` (`k` = 0, 1, 2).
    pub fn var(k: usize) -> Self {
        let mut e = [0; 3];
        e[k] = 1;
        Self::monomial(gq(1, 0), e)
    }

    /// `x₁² + x₂² + x₃²`.
    pub fn norm_sq() -> Self {
        (0..3).fold(Self::zero(), |acc, k| acc.add(&Self::var(k).mul(&Self::var(k))))
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Exponent, &GaussQ)> {
        self.terms.iter()
    }

    pub fn coeff(&self, e: Exponent) -> GaussQ {
        self.terms.get(&e).cloned().unwrap_or_else(GaussQ::zero)
    }

    /// Total degree; `None` for the zero polynomial.
    pub fn degree(&self) -> Option<u32> {
        self.terms.keys().map(|e| e.iter().sum()).max()
    }

    fn insert_add(&mut self, e: Exponent, c: GaussQ) {
        let v = self.terms.entry(e).or_insert_with(GaussQ::zero);
        *v = &*v + c;
        if v.is_zero() {
            self.terms.remove(&e);
        }
    }

    pub fn add(&self, other: &Self) -> Self {
        let mut out = self.clone();
        for (e, c) in &other.terms {
            out.insert_add(*e, c.clone());
        }
        out
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.add(&other.scale(&gq(-1, 0)))
    }

    pub fn scale(&self, s: &GaussQ) -> Self {
        let mut out = Self::zero();
        for (e, c) in &self.terms {
            out.insert_add(*e, c * s);
        }
        out
    }

    pub fn mul(&self, other: &Self) -> Self {
        let mut out = Self::zero();
        for (ea, ca) in &self.terms {
            for (eb, cb) in &other.terms {
                out.insert_add([ea[0] + eb[0], ea[1] + eb[1], ea[2] + eb[2]], ca * cb);
            }
        }
        out
    }

    pub fn pow(&self, n: u32) -> Self {
        (0..n).fold(Self::constant(gq(1, 0)), |acc, _| acc.mul(self))
    }

    /// Terms of total degree exactly `d`.
    pub fn homogeneous_part(&self, d: i64) -> Self {
        Self {
            terms: self
                .terms
                .iter()
                .filter(|(e, _)| i64::from(e.iter().sum::<u32>()) == d)
                .map(|(e, c)| (*e, c.clone()))
                .collect(),
        }
    }

    /// Substitutes `x_k → i ξ_k`, turning a differential operator into its symbol.
    pub fn to_symbol(&self) -> Self {
        Self {
            terms: self
                .terms
                .iter()
                .map(|(e, c)| (*e, c * i_pow(e.iter().sum())))
                .collect(),
        }
    }

    pub fn eval_exact(&self, x: &[GaussQ; 3]) -> GaussQ {
        let mut s = GaussQ::zero();
        for (e, c) in &self.terms {
            let mut t = c.clone();
            for k in 0..3 {
                for _ in 0..e[k] {
                    t *= &x[k];
                }
            }
            s += t;
        }
        s
    }

    pub fn eval(&self, x: [f64; 3]) -> C64 {
        self.terms
            .iter()
            .map(|(e, c)| gq_to_c64(c) * x[0].powi(e[0] as i32) * x[1].powi(e[1] as i32) * x[2].powi(e[2] as i32))
            .sum()
    }

    /// Integer coefficients when every coefficient is a real integer.
    pub fn to_integer(&self) -> Option<BTreeMap<Exponent, BigInt>> {
        self.terms
            .iter()
            .map(|(e, c)| (c.im.is_zero() && c.re.is_integer()).then(|| (*e, c.re.to_integer())))
            .collect()
    }
}

/// Determinant by cofactor expansion along the first row.
pub fn poly_det(m: &[Vec<Poly>]) -> Poly {
    let n = m.len();
    match n {
        0 => Poly::constant(gq(1, 0)),
        1 => m[0][0].clone(),
        _ => {
            let mut out = Poly::zero();
            for j in 0..n {
                if m[0][j].is_zero() {
                    continue;
                }
                let minor: Vec<Vec<Poly>> = m[1..]
                    .iter()
                    .map(|row| row.iter().enumerate().filter(|(k, _)| *k != j).map(|(_, p)| p.clone()).collect())
                    .collect();
                let term = m[0][j].mul(&poly_det(&minor));
                out = if j % 2 == 0 { out.add(&term) } else { out.sub(&term) };
            }
            out
        }
    }
}

/// Exact dense matrix over `ℚ(i)`.
#[derive(Debug, Clone, PartialEq)]
pub struct ExactMatrix {
    pub rows: Vec<Vec<GaussQ>>,
}

impl ExactMatrix {
    pub fn new(rows: Vec<Vec<GaussQ>>) -> Self {
        Self { rows }
    }

    pub fn nrows(&self) -> usize {
        self.rows.len()
    }

    pub fn ncols(&self) -> usize {
        self.rows.first().map_or(0, Vec::len)
    }

    /// Reduced row echelon form and pivot columns.
    pub fn rref(&self) -> (Self, Vec<usize>) {
        let mut a = self.rows.clone();
        let (m, n) = (self.nrows(), self.ncols());
        let mut pivots = Vec::new();
        let mut r = 0;
        for c in 0..n {
            if r == m {
                break;
            }
            let Some(p) = (r..m).find(|&i| !a[i][c].is_zero()) else { continue };
            a.swap(r, p);
            let inv = GaussQ::one() / &a[r][c];
            for v in a[r].iter_mut() {
                *v = &*v * &inv;
            }
            for i in 0..m {
                if i != r && !a[i][c].is_zero() {
                    let f = a[i][c].clone();
                    for k in 0..n {
                        let d = &f * &a[r][k];
                        a[i][k] = &a[i][k] - d;
                    }
                }
            }
            pivots.push(c);
            r += 1;
        }
        (Self { rows: a }, pivots)
    }

    pub fn rank(&self) -> usize {
        self.rref().1.len()
    }

    /// Basis of the right null space.
    pub fn nullspace(&self) -> Vec<Vec<GaussQ>> {
        let (r, pivots) = self.rref();
        let n = self.ncols();
        (0..n)
            .filter(|c| !pivots.contains(c))
            .map(|free| {
                let mut v = vec![GaussQ::zero(); n];
                v[free] = GaussQ::one();
                for (row, &pc) in pivots.iter().enumerate() {
                    v[pc] = -r.rows[row][free].clone();
                }
                v
            })
            .collect()
    }

    /// Determinant by Gaussian elimination over the field.
    pub fn det(&self) -> GaussQ {
        let n = self.nrows();
        assert_eq!(n, self.ncols(), "determinant of a non-square matrix");
        let mut a = self.rows.clone();
        let mut det = GaussQ::one();
        for c in 0..n {
            let Some(p) = (c..n).find(|&i| !a[i][c].is_zero()) else { return GaussQ::zero() };
            if p != c {
                a.swap(p, c);
                det = -det;
            }
            det *= &a[c][c];
            for i in c + 1..n {
                if a[i][c].is_zero() {
                    continue;
                }
                let f = &a[i][c] / &a[c][c];
                for k in c..n {
                    let d = &f * &a[c][k];
                    a[i][k] = &a[i][k] - d;
                }
            }
        }
        det
    }

    pub fn mul_vec(&self, x: &[GaussQ]) -> Vec<GaussQ> {
        self.rows
            .iter()
            .map(|row| row.iter().zip(x).fold(GaussQ::zero(), |s, (a, b)| s + a * b))
            .collect()
    }
}

/// Largest absolute value of the real and imaginary parts, as a float.
pub fn gq_abs_max(z: &GaussQ) -> f64 {
    z.re.abs().to_f64().unwrap_or(f64::INFINITY).max(z.im.abs().to_f64().unwrap_or(f64::INFINITY))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn symbol_of_laplacian_is_minus_norm_squared() {
        let lap = Poly::norm_sq();
        assert_eq!(lap.to_symbol(), lap.scale(&gq(-1, 0)));
    }

    #[test]
    fn cofactor_determinant_of_diagonal() {
        let x = Poly::var(0);
        let m = vec![vec![x.clone(), Poly::zero()], vec![Poly::zero(), x.pow(2)]];
        assert_eq!(poly_det(&m), x.pow(3));
    }

    #[test]
    fn exact_elimination() {
        let m = ExactMatrix::new(vec![vec![gq(1, 0), gq(0, 1)], vec![gq(0, 1), gq(-1, 0)]]);
        assert_eq!(m.det(), GaussQ::zero());
        assert_eq!(m.rank(), 1);
        let ns = m.nullspace();
        assert_eq!(ns.len(), 1);
        assert!(m.mul_vec(&ns[0]).iter().all(Zero::is_zero));
        let m2 = ExactMatrix::new(vec![vec![gq(2, 0), gq(1, 1)], vec![gq(0, 0), gq(0, 3)]]);
        assert_eq!(m2.det(), gq(0, 6));
    }
}
