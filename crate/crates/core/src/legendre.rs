//! Legendre polynomials, Gauss–Legendre quadrature and the boundary-adapted
//! recombinations used for the wall-normal direction.

use nalgebra::DMatrix;

/// Gauss–Legendre nodes and weights on `[-1, 1]`, nodes ascending.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(n >= 1);
    let mut x = vec![0.0; n];
    let mut w = vec![0.0; n];
    for i in 0..n.div_ceil(2) {
        let mut z = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (p, d) = legendre_and_derivative(n, z);
            dp = d;
            let dz = p / d;
            z -= dz;
            if dz.abs() < 1e-16 {
                break;
            }
        }
        let (_, d) = legendre_and_derivative(n, z);
        dp = if d != 0.0 { d } else { dp };
        let wi = 2.0 / ((1.0 - z * z) * dp * dp);
        x[i] = -z;
        x[n - 1 - i] = z;
        w[i] = wi;
        w[n - 1 - i] = wi;
    }
    if n % 2 == 1 {
        x[n / 2] = 0.0;
    }
    (x, w)
}

fn legendre_and_derivative(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    if n == 0 {
        return (1.0, 0.0);
    }
    for k in 1..n {
        let p2 = ((2 * k + 1) as f64 * x * p1 - k as f64 * p0) / (k + 1) as f64;
        p0 = p1;
        p1 = p2;
    }
    let d = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

/// Values of `d^m P_n / dx^m (x)` for `n ≤ nmax`, `m ≤ mmax`, indexed `[m][n]`.
pub fn legendre_derivatives(nmax: usize, mmax: usize, x: f64) -> Vec<Vec<f64>> {
    let mut out = vec![vec![0.0; nmax + 1]; mmax + 1];
    for m in 0..=mmax {
        out[m][0] = if m == 0 { 1.0 } else { 0.0 };
        if nmax >= 1 {
            out[m][1] = match m {
                0 => x,
                1 => 1.0,
                _ => 0.0,
            };
        }
        for n in 1..nmax {
            let lower = if m > 0 { out[m - 1][n] } else { 0.0 };
            let v = ((2 * n + 1) as f64 * (x * out[m][n] + m as f64 * lower) - n as f64 * out[m][n - 1])
                / (n + 1) as f64;
            out[m][n + 1] = v;
        }
    }
    out
}

/// Boundary-adapted recombination of Legendre polynomials.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BasisKind {
    /// Vanishes at both ends: `(P_j - P_{j+2}) / sqrt(4j+6)`.
    Dirichlet,
    /// Vanishes with its first derivative at both ends.
    Clamped,
}

impl BasisKind {
    /// Number of functions of degree at most `p`.
    pub fn count(self, p: usize) -> usize {
        match self {
            BasisKind::Dirichlet => p - 1,
            BasisKind::Clamped => p - 3,
        }
    }

    /// Coefficient matrix `R` (functions × Legendre degrees `0..=p`).
    pub fn recombination(self, p: usize) -> DMatrix<f64> {
        let n = self.count(p);
        let mut r = DMatrix::zeros(n, p + 1);
        for j in 0..n {
            let jf = j as f64;
            match self {
                BasisKind::Dirichlet => {
                    let s = 1.0 / (4.0 * jf + 6.0).sqrt();
                    r[(j, j)] = s;
                    r[(j, j + 2)] = -s;
                }
                BasisKind::Clamped => {
                    let s = 1.0 / (2.0 * (2.0 * jf + 3.0).powi(2) * (2.0 * jf + 5.0)).sqrt();
                    r[(j, j)] = s;
                    r[(j, j + 2)] = -2.0 * (2.0 * jf + 5.0) / (2.0 * jf + 7.0) * s;
                    r[(j, j + 4)] = (2.0 * jf + 3.0) / (2.0 * jf + 7.0) * s;
                }
            }
        }
        r
    }
}

/// Derivative tables of a recombined basis on the physical interval `[0, h]`.
///
/// `d[m]` has shape `(points × functions)` and holds `d^m b_j / dz^m`.
#[derive(Debug, Clone)]
pub struct Table {
    pub d: Vec<DMatrix<f64>>,
}

impl Table {
    pub fn build(kind: BasisKind, p: usize, h: f64, z: &[f64], max_order: usize) -> Self {
        let r = kind.recombination(p);
        let nf = r.nrows();
        let scale = 2.0 / h;
        let mut d = vec![DMatrix::zeros(z.len(), nf); max_order + 1];
        for (i, &zi) in z.iter().enumerate() {
            let x = 2.0 * zi / h - 1.0;
            let leg = legendre_derivatives(p, max_order, x);
            for (m, dm) in d.iter_mut().enumerate() {
                let f = scale.powi(m as i32);
                for j in 0..nf {
                    let mut s = 0.0;
                    for n in j..=p.min(j + 4) {
                        s += r[(j, n)] * leg[m][n];
                    }
                    dm[(i, j)] = s * f;
                }
            }
        }
        Self { d }
    }

    pub fn npoints(&self) -> usize {
        self.d[0].nrows()
    }

    pub fn nfun(&self) -> usize {
        self.d[0].ncols()
    }
}

/// Plain Legendre table `P_n(2z/h - 1)` and its z-derivatives on `[0, h]`.
pub fn plain_table(p: usize, h: f64, z: &[f64], max_order: usize) -> Vec<DMatrix<f64>> {
    let scale = 2.0 / h;
    let mut d = vec![DMatrix::zeros(z.len(), p + 1); max_order + 1];
    for (i, &zi) in z.iter().enumerate() {
        let leg = legendre_derivatives(p, max_order, 2.0 * zi / h - 1.0);
        for (m, dm) in d.iter_mut().enumerate() {
            let f = scale.powi(m as i32);
            for n in 0..=p {
                dm[(i, n)] = leg[m][n] * f;
            }
        }
    }
    d
}
