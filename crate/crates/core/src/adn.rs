//! Douglis–Nirenberg ellipticity of the stationary system and the
//! Lopatinskii–Shapiro covering condition for the no-slip + wall–eddy
//! boundary operator on a flat wall.
//!
//! Half-space conventions: `t = x₃ ≥ 0` is the inward normal coordinate,
//! `η` is the tangential wavevector and `s = |η|`.

use std::ops::Neg;

use nalgebra::DMatrix;
use num_complex::Complex;
use num_traits::{FromPrimitive, Num, Zero};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::linalg::CMat;
use crate::poly::{gq, gq_from_f64, poly_det, ExactMatrix, GaussQ, Poly};
use crate::C64;

/// Polynomial operator system with Douglis–Nirenberg orders. Entries are
/// polynomials in `(∂₁, ∂₂, ∂₃)`.
#[derive(Debug, Clone, PartialEq)]
pub struct DNSystem {
    pub operator: Vec<Vec<Poly>>,
    pub s: Vec<i64>,
    pub t: Vec<i64>,
    pub boundary: Vec<Vec<Poly>>,
    pub r: Vec<i64>,
}

impl DNSystem {
    /// `Δ²u + ∇p`, `∇·u` with no-slip rows and the two tangential
    /// wall–eddy rows at `x₃ = 0`.
    pub fn ns_alpha_beta(gamma: f64) -> Result<Self> {
        let g = gq_from_f64(gamma).ok_or_else(|| Error::Param(format!("gamma must be finite, got {gamma}")))?;
        let d = Poly::var;
        let bilap = Poly::norm_sq().pow(2);
        let z = Poly::zero;
        let mut operator = vec![vec![z(); 4]; 4];
        for i in 0..3 {
            operator[i][i] = bilap.clone();
            operator[i][3] = d(i);
            operator[3][i] = d(i);
        }
        let mut boundary = vec![vec![z(); 4]; 5];
        for i in 0..3 {
            boundary[i][i] = Poly::constant(gq(1, 0));
        }
        let gp = |p: Poly| p.scale(&g);
        // ∂₃²u₂ − ∂₂∂₃u₃ + γ(∂₁²u₂ − ∂₁∂₂u₁)
        boundary[3][1] = d(2).mul(&d(2)).add(&gp(d(0).mul(&d(0))));
        boundary[3][2] = d(1).mul(&d(2)).scale(&gq(-1, 0));
        boundary[3][0] = gp(d(0).mul(&d(1))).scale(&gq(-1, 0));
        // ∂₃²u₁ − ∂₁∂₃u₃ + γ(∂₁∂₂u₂ − ∂₂²u₁)
        boundary[4][0] = d(2).mul(&d(2)).sub(&gp(d(1).mul(&d(1))));
        boundary[4][2] = d(0).mul(&d(2)).scale(&gq(-1, 0));
        boundary[4][1] = gp(d(0).mul(&d(1)));
        let sys = Self { operator, s: vec![4, 4, 4, 1], t: vec![0, 0, 0, -3], boundary, r: vec![0, 0, 0, 2, 2] };
        sys.validate()?;
        Ok(sys)
    }

    /// Checks `deg L_ij ≤ s_i + t_j` and `deg B_ij ≤ r_i + t_j`.
    pub fn validate(&self) -> Result<()> {
        let n = self.t.len();
        if self.operator.len() != self.s.len() || self.operator.iter().any(|r| r.len() != n) {
            return Err(Error::Invalid("operator matrix does not match the order vectors".into()));
        }
        if self.boundary.len() != self.r.len() || self.boundary.iter().any(|r| r.len() != n) {
            return Err(Error::Invalid("boundary matrix does not match the order vectors".into()));
        }
        let check = |m: &[Vec<Poly>], rows: &[i64], what: &str| -> Result<()> {
            for (i, row) in m.iter().enumerate() {
                for (j, p) in row.iter().enumerate() {
                    if let Some(deg) = p.degree() {
                        if i64::from(deg) > rows[i] + self.t[j] {
                            return Err(Error::Invalid(format!("{what} entry ({i},{j}) has degree {deg} above {}", rows[i] + self.t[j])));
                        }
                    }
                }
            }
            Ok(())
        };
        check(&self.operator, &self.s, "operator")?;
        check(&self.boundary, &self.r, "boundary")
    }

    /// Principal symbol as polynomials in `ξ`: degree-`(s_i + t_j)` part of
    /// each entry with `∂ → iξ`.
    pub fn principal_symbol_poly(&self) -> Vec<Vec<Poly>> {
        self.operator
            .iter()
            .enumerate()
            .map(|(i, row)| row.iter().enumerate().map(|(j, p)| p.homogeneous_part(self.s[i] + self.t[j]).to_symbol()).collect())
            .collect()
    }
}

pub fn principal_symbol(system: &DNSystem, xi: [f64; 3]) -> CMat {
    let p = system.principal_symbol_poly();
    DMatrix::from_fn(p.len(), p.first().map_or(0, Vec::len), |i, j| p[i][j].eval(xi))
}

/// Exact determinant of the principal symbol.
pub fn symbol_determinant(system: &DNSystem) -> Poly {
    poly_det(&system.principal_symbol_poly())
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EllipticityReport {
    pub pass: bool,
    /// Nonzero `ξ` with vanishing determinant.
    pub witness: Option<[i64; 3]>,
    /// `(c, m)` when the determinant is exactly `c·|ξ|^{2m}`.
    pub norm_power: Option<(String, u32)>,
}

/// Exact decision when `det = c|ξ|^{2m}`; otherwise searches integer points
/// in `[-3, 3]³` for a zero. A determinant of neither kind is reported as
/// failing without witness.
pub fn check_ellipticity(system: &DNSystem) -> EllipticityReport {
    let det = symbol_determinant(system);
    if let Some(deg) = det.degree() {
        if deg % 2 == 0 {
            let m = deg / 2;
            let q = Poly::norm_sq().pow(m);
            let c = det.coeff([deg, 0, 0]);
            if !c.is_zero() && q.scale(&c) == det {
                return EllipticityReport { pass: true, witness: None, norm_power: Some((format!("{}{:+}i", c.re, c.im), m)) };
            }
        }
    }
    let mut witness = None;
    'search: for r in 1..=3i64 {
        for a in -r..=r {
            for b in -r..=r {
                for c in -r..=r {
                    if a.abs().max(b.abs()).max(c.abs()) != r {
                        continue;
                    }
                    let x = [gq(a, 0), gq(b, 0), gq(c, 0)];
                    if det.eval_exact(&x).is_zero() {
                        witness = Some([a, b, c]);
                        break 'search;
                    }
                }
            }
        }
    }
    EllipticityReport { pass: false, witness, norm_power: None }
}

/// Choice of the particular solution `v̂` carrying the pressure forcing.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Particular {
    /// `e^{−st}/(8s³)·(−iη₁st², −iη₂st², s²t² − 2st − 2)`, which solves the
    /// forced biharmonic equation but has divergence `t e^{−st}/(2s)`.
    Published,
    /// The above plus `t e^{−st}(iη₁, iη₂, 0)/(2s³)`, divergence-free.
    DivergenceFree,
}

fn check_eta(eta: [f64; 2]) -> Result<f64> {
    let s = eta[0].hypot(eta[1]);
    if !(s > 0.0 && s.is_finite()) {
        return Err(Error::ZeroWavenumber);
    }
    Ok(s)
}

/// Polynomial parts `q_k(t)` of `v̂_k = e^{−st} q_k(t)` (coefficients in `t`).
fn particular_poly(eta: [f64; 2], s: f64, which: Particular) -> [Vec<C64>; 3] {
    let i = C64::i();
    let s3 = s * s * s;
    let mut q = [
        vec![C64::zero(), C64::zero(), -i * eta[0] / (8.0 * s * s)],
        vec![C64::zero(), C64::zero(), -i * eta[1] / (8.0 * s * s)],
        vec![C64::new(-2.0 / (8.0 * s3), 0.0), C64::new(-2.0 * s / (8.0 * s3), 0.0), C64::new(s * s / (8.0 * s3), 0.0)],
    ];
    if which == Particular::DivergenceFree {
        q[0][1] += i * eta[0] / (2.0 * s3);
        q[1][1] += i * eta[1] / (2.0 * s3);
    }
    q
}

fn poly_derivative(q: &[C64]) -> Vec<C64> {
    q.iter().enumerate().skip(1).map(|(k, c)| c * k as f64).collect()
}

fn poly_eval(q: &[C64], t: f64) -> C64 {
    q.iter().rev().fold(C64::zero(), |acc, c| acc * t + c)
}

/// `d^m/dt^m [e^{−st} q(t)]` at `t`.
fn exp_poly_derivative(q: &[C64], s: f64, m: usize, t: f64) -> C64 {
    let mut derivs = vec![q.to_vec()];
    for _ in 0..m {
        let last = derivs.last().expect("nonempty");
        derivs.push(poly_derivative(last));
    }
    let mut binom = 1.0;
    let mut sum = C64::zero();
    for j in 0..=m {
        sum += poly_eval(&derivs[j], t) * binom * (-s).powi((m - j) as i32);
        binom = binom * (m - j) as f64 / (j + 1) as f64;
    }
    sum * (-s * t).exp()
}

/// Member of the decaying solution family
/// `û = e^{−st}(a + tb) + a₀v̂`, `p̂ = a₀e^{−st}`.
#[derive(Debug, Clone, PartialEq)]
pub struct DecayingFamily {
    pub eta: [f64; 2],
    pub a: [C64; 3],
    pub b: [C64; 3],
    pub a0: C64,
    pub particular: Particular,
}

/// Completes `(a₁, a₂, b₁, b₂, a₀)` with the divergence constraints
/// `b₃ = i(η·b)/s`, `a₃ = (iη·a + b₃)/s`.
pub fn closed_form_family(eta: [f64; 2], free: [C64; 5], particular: Particular) -> Result<DecayingFamily> {
    let s = check_eta(eta)?;
    let i = C64::i();
    let [a1, a2, b1, b2, a0] = free;
    let b3 = i * (b1 * eta[0] + b2 * eta[1]) / s;
    let a3 = (i * (a1 * eta[0] + a2 * eta[1]) + b3) / s;
    Ok(DecayingFamily { eta, a: [a1, a2, a3], b: [b1, b2, b3], a0, particular })
}

impl DecayingFamily {
    pub fn s(&self) -> f64 {
        self.eta[0].hypot(self.eta[1])
    }

    fn component_poly(&self, k: usize) -> Vec<C64> {
        let q = particular_poly(self.eta, self.s(), self.particular);
        let mut out = vec![C64::zero(); q[k].len().max(2)];
        out[0] += self.a[k];
        out[1] += self.b[k];
        for (o, c) in out.iter_mut().zip(&q[k]) {
            *o += c * self.a0;
        }
        out
    }

    /// `d^m û / dt^m` at `t`.
    pub fn velocity(&self, m: usize, t: f64) -> [C64; 3] {
        let s = self.s();
        std::array::from_fn(|k| exp_poly_derivative(&self.component_poly(k), s, m, t))
    }

    pub fn pressure(&self, m: usize, t: f64) -> C64 {
        exp_poly_derivative(&[self.a0], self.s(), m, t)
    }

    /// Largest residual of the four half-space equations at `t` and the
    /// magnitude of the terms entering them.
    pub fn ode_residual(&self, t: f64) -> (f64, f64) {
        let s = self.s();
        let i = C64::i();
        let d: Vec<[C64; 3]> = (0..=4).map(|m| self.velocity(m, t)).collect();
        let p = self.pressure(0, t);
        let dp = self.pressure(1, t);
        let bih = |k: usize| d[4][k] - d[2][k] * (2.0 * s * s) + d[0][k] * s.powi(4);
        let rows = [
            bih(0) + i * self.eta[0] * p,
            bih(1) + i * self.eta[1] * p,
            bih(2) + dp,
            d[1][2] + i * (d[0][0] * self.eta[0] + d[0][1] * self.eta[1]),
        ];
        let mut scale = p.norm() * s + dp.norm();
        for k in 0..3 {
            scale += d[4][k].norm() + d[2][k].norm() * 2.0 * s * s + d[0][k].norm() * s.powi(4) + d[1][k].norm() * s;
        }
        (rows.iter().map(|r| r.norm()).fold(0.0, f64::max), scale)
    }
}

/// Boundary rows `(u₁, u₂, u₃, wall–eddy₂, wall–eddy₁)` at `t = 0` acting on
/// `(a₁, a₂, b₁, b₂, a₀)`, over any field `ℚ(i)` or `ℂ`.
fn boundary_rows<T>(e1: Complex<T>, e2: Complex<T>, s: Complex<T>, gamma: Complex<T>, which: Particular) -> Vec<Vec<Complex<T>>>
where
    T: Clone + Num + Neg<Output = T> + FromPrimitive,
{
    let c = |x: i64| Complex::new(T::from_i64(x).expect("small integer"), T::zero());
    let i = Complex::new(T::zero(), T::one());
    let zero = || vec![c(0); 5];
    let unit = |k: usize| {
        let mut v = zero();
        v[k] = c(1);
        v
    };
    let comb = |terms: &[(Complex<T>, &Vec<Complex<T>>)]| -> Vec<Complex<T>> {
        let mut out = zero();
        for (w, v) in terms {
            for (o, x) in out.iter_mut().zip(v.iter()) {
                *o = o.clone() + w.clone() * x.clone();
            }
        }
        out
    };
    let s2 = s.clone() * s.clone();
    let s3 = s2.clone() * s.clone();
    let (a1, a2, b1, b2, a0) = (unit(0), unit(1), unit(2), unit(3), unit(4));
    let b3 = comb(&[(i.clone() * e1.clone() / s.clone(), &b1), (i.clone() * e2.clone() / s.clone(), &b2)]);
    let a3 = comb(&[(i.clone() * e1.clone() / s.clone(), &a1), (i.clone() * e2.clone() / s.clone(), &a2), (c(1) / s.clone(), &b3)]);
    let v0 = [c(0), c(0), -c(1) / (c(4) * s3.clone())];
    let (v1, v2) = match which {
        Particular::Published => (
            [c(0), c(0), c(0)],
            [-(i.clone() * e1.clone()) / (c(4) * s2.clone()), -(i.clone() * e2.clone()) / (c(4) * s2.clone()), c(1) / (c(2) * s.clone())],
        ),
        Particular::DivergenceFree => (
            [i.clone() * e1.clone() / (c(2) * s3.clone()), i.clone() * e2.clone() / (c(2) * s3.clone()), c(0)],
            [
                -(i.clone() * e1.clone()) * c(5) / (c(4) * s2.clone()),
                -(i.clone() * e2.clone()) * c(5) / (c(4) * s2.clone()),
                c(1) / (c(2) * s.clone()),
            ],
        ),
    };
    let a = [&a1, &a2, &a3];
    let b = [&b1, &b2, &b3];
    let u0: Vec<Vec<Complex<T>>> = (0..3).map(|k| comb(&[(c(1), a[k]), (v0[k].clone(), &a0)])).collect();
    let u1: Vec<Vec<Complex<T>>> = (0..3).map(|k| comb(&[(-s.clone(), a[k]), (c(1), b[k]), (v1[k].clone(), &a0)])).collect();
    let u2: Vec<Vec<Complex<T>>> =
        (0..3).map(|k| comb(&[(s2.clone(), a[k]), (-(c(2) * s.clone()), b[k]), (v2[k].clone(), &a0)])).collect();
    // γ-coupling η₂u₁ − η₁u₂ at the wall
    let tw = comb(&[(e2.clone(), &u0[0]), (-e1.clone(), &u0[1])]);
    let row4 = comb(&[(c(1), &u2[1]), (-(i.clone() * e2.clone()), &u1[2]), (gamma.clone() * e1.clone(), &tw)]);
    let row5 = comb(&[(c(1), &u2[0]), (-(i.clone() * e1.clone()), &u1[2]), (gamma * e2, &tw)]);
    vec![u0[0].clone(), u0[1].clone(), u0[2].clone(), row4, row5]
}

/// Covering matrix with the divergence-free particular solution.
pub fn boundary_system(eta: [f64; 2], gamma: f64) -> Result<CMat> {
    boundary_system_with(eta, gamma, Particular::DivergenceFree)
}

pub fn boundary_system_with(eta: [f64; 2], gamma: f64, which: Particular) -> Result<CMat> {
    let s = check_eta(eta)?;
    let re = |x: f64| C64::new(x, 0.0);
    let rows = boundary_rows(re(eta[0]), re(eta[1]), re(s), re(gamma), which);
    Ok(DMatrix::from_fn(5, 5, |i, j| rows[i][j]))
}

/// Exact covering matrix for `η` on a coordinate axis with `|η| = 1`.
pub fn boundary_system_exact(axis: usize, gamma: GaussQ, which: Particular) -> ExactMatrix {
    let e = if axis == 0 { (gq(1, 0), gq(0, 0)) } else { (gq(0, 0), gq(1, 0)) };
    ExactMatrix::new(boundary_rows(e.0, e.1, gq(1, 0), gamma, which))
}

/// Row/column scaling `D_r B D_c` that makes the covering matrix depend on
/// `η/|η|` only.
fn scale_invariant(b: &CMat, s: f64) -> CMat {
    let col = [1.0, 1.0, s, s, s * s * s];
    let row = [1.0, 1.0, 1.0, 1.0 / (s * s), 1.0 / (s * s)];
    DMatrix::from_fn(5, 5, |i, j| b[(i, j)] * row[i] * col[j])
}

/// Relative singular-value threshold for a trivial kernel.
pub const COVERING_SV_TOL: f64 = 1e-8;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CoveringReport {
    pub eta: [f64; 2],
    pub det: [f64; 2],
    pub det_modulus: f64,
    pub kernel_dim: usize,
    /// `σ_min/σ_max` of the scale-invariant covering matrix.
    pub sv_ratio: f64,
    pub pass: bool,
}

/// `on_circle` equispaced unit vectors followed by `random` vectors with
/// log-uniform magnitude in `[min_mag, max_mag]` and uniform angle.
pub fn covering_samples(on_circle: usize, random: usize, min_mag: f64, max_mag: f64, seed: u64) -> Vec<[f64; 2]> {
    use rand::{Rng, SeedableRng};
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    let tau = 2.0 * std::f64::consts::PI;
    let mut out: Vec<[f64; 2]> = (0..on_circle)
        .map(|j| {
            let th = tau * j as f64 / on_circle as f64;
            [th.cos(), th.sin()]
        })
        .collect();
    let (lo, hi) = (min_mag.log10(), max_mag.log10());
    for _ in 0..random {
        let m = 10f64.powf(if hi > lo { rng.random_range(lo..hi) } else { lo });
        let th: f64 = rng.random_range(0.0..tau);
        out.push([m * th.cos(), m * th.sin()]);
    }
    out
}

pub fn check_covering(eta: [f64; 2], gamma: f64) -> Result<CoveringReport> {
    let s = check_eta(eta)?;
    let b = boundary_system(eta, gamma)?;
    let det = b.determinant();
    let sv = scale_invariant(&b, s).singular_values();
    let max = sv.max();
    let kernel_dim = sv.iter().filter(|&&x| x <= COVERING_SV_TOL * max).count();
    Ok(CoveringReport {
        eta,
        det: [det.re, det.im],
        det_modulus: det.norm(),
        kernel_dim,
        sv_ratio: sv.min() / max,
        pass: kernel_dim == 0,
    })
}

/// Degree `d` in `det B(cη) = c^d det B(η)`, measured from one scaling.
pub fn covering_homogeneity(eta: [f64; 2], gamma: f64, c: f64) -> Result<f64> {
    let d0 = boundary_system(eta, gamma)?.determinant().norm();
    let d1 = boundary_system([c * eta[0], c * eta[1]], gamma)?.determinant().norm();
    Ok((d1 / d0).ln() / c.ln())
}

/// Number of jet rows: `d^m û_k/dt^m` for `m ≤ 3`, then `p̂`.
pub const JET_LEN: usize = 13;

/// Decaying solution space computed from the first-order form of the
/// half-space system, in the scaled variables `τ = |η|t`,
/// `û^{(m)}/|η|^m`, `p̂/|η|³`.
#[derive(Debug, Clone)]
pub struct StableSubspace {
    /// Dimension of the decaying space before imposing `∇·û = 0`.
    pub decaying_dim: usize,
    /// Scaled boundary jets, one column per basis solution.
    pub jets: CMat,
    /// Largest `|p̂′ + |η|p̂| / ‖jet‖` over the basis.
    pub pressure_defect: f64,
}

/// Orthonormal basis of the range of `a` (columns with `σ > tol·σ_max`).
fn range_basis(a: &CMat, tol: f64) -> CMat {
    let svd = a.clone().svd(true, false);
    let u = svd.u.expect("requested U");
    let max = svd.singular_values.max();
    let keep: Vec<usize> = (0..svd.singular_values.len()).filter(|&k| svd.singular_values[k] > tol * max).collect();
    DMatrix::from_fn(a.nrows(), keep.len(), |i, j| u[(i, keep[j])])
}

pub fn numeric_stable_subspace(eta: [f64; 2]) -> Result<StableSubspace> {
    let s = check_eta(eta)?;
    let e = [eta[0] / s, eta[1] / s];
    let i = C64::i();
    let n = 14;
    let mut a = CMat::zeros(n, n);
    for k in 0..3 {
        for m in 0..3 {
            a[(4 * k + m, 4 * k + m + 1)] = C64::new(1.0, 0.0);
        }
        let r = 4 * k + 3;
        a[(r, 4 * k)] = C64::new(-1.0, 0.0);
        a[(r, 4 * k + 2)] = C64::new(2.0, 0.0);
        if k < 2 {
            a[(r, 12)] = -i * e[k];
        } else {
            a[(r, 13)] = C64::new(-1.0, 0.0);
        }
    }
    a[(12, 13)] = C64::new(1.0, 0.0);
    a[(13, 12)] = C64::new(1.0, 0.0);
    // (A − I)^7 annihilates the generalized eigenspace of +1 and is
    // invertible on that of −1, so its range is the decaying subspace.
    let shifted = &a - CMat::identity(n, n);
    let power = (0..6).fold(shifted.clone(), |acc, _| &acc * &shifted);
    let q = range_basis(&power, 1e-10);
    let decaying_dim = q.ncols();
    // divergence and its derivative at τ = 0
    let mut c = CMat::zeros(2, n);
    for m in 0..2 {
        c[(m, 8 + m + 1)] = C64::new(1.0, 0.0);
        c[(m, m)] = i * e[0];
        c[(m, 4 + m)] = i * e[1];
    }
    let cq = &c * &q;
    let gram = &cq * cq.adjoint();
    let pinv = gram.try_inverse().ok_or_else(|| Error::Eigen { mode: 0, reason: "dependent divergence constraints".into() })?;
    let null_proj = CMat::identity(decaying_dim, decaying_dim) - cq.adjoint() * pinv * &cq;
    let basis = &q * range_basis(&null_proj, 1e-6);
    let jets = basis.rows(0, JET_LEN).into_owned();
    let pressure_defect = (0..basis.ncols())
        .map(|j| (basis[(13, j)] + basis[(12, j)]).norm() / basis.column(j).norm())
        .fold(0.0, f64::max);
    Ok(StableSubspace { decaying_dim, jets, pressure_defect })
}

/// Scaled jets of the closed-form family for the five unit parameter vectors.
pub fn closed_form_jets(eta: [f64; 2], which: Particular) -> Result<CMat> {
    let s = check_eta(eta)?;
    let mut out = CMat::zeros(JET_LEN, 5);
    for j in 0..5 {
        let mut free = [C64::zero(); 5];
        free[j] = C64::new(1.0, 0.0);
        let fam = closed_form_family(eta, free, which)?;
        for m in 0..4 {
            let v = fam.velocity(m, 0.0);
            for k in 0..3 {
                out[(4 * k + m, j)] = v[k] / s.powi(m as i32);
            }
        }
        out[(12, j)] = fam.pressure(0, 0.0) / s.powi(3);
    }
    Ok(out)
}

fn normalize_columns(a: &CMat) -> CMat {
    let mut out = a.clone();
    for mut c in out.column_iter_mut() {
        let n = c.norm();
        if n > 0.0 {
            c.unscale_mut(n);
        }
    }
    out
}

/// Sine of the largest principal angle between the column spaces.
pub fn subspace_angle(a: &CMat, b: &CMat) -> f64 {
    let qa = range_basis(&normalize_columns(a), 1e-12);
    let qb = range_basis(&normalize_columns(b), 1e-12);
    if qa.ncols() != qb.ncols() {
        return 1.0;
    }
    let r = &qb - &qa * (qa.adjoint() * &qb);
    let r2 = &qa - &qb * (qb.adjoint() * &qa);
    r.singular_values().max().max(r2.singular_values().max()).min(1.0)
}

/// Exact elimination of the covering system for `η` on a coordinate axis,
/// following the steps Dirichlet rows → wall–eddy rows → divergence.
#[derive(Debug, Clone, PartialEq)]
pub struct CoveringAlgebra {
    pub axis: usize,
    pub particular: Particular,
    /// `(a₁, a₂, a₃)/a₀` forced by the Dirichlet rows.
    pub dirichlet_a_over_a0: [GaussQ; 3],
    /// Coefficient of `a₀` left in each wall–eddy row after substituting
    /// the Dirichlet relations.
    pub wall_eddy_a0_coeff: [GaussQ; 2],
    /// Determinant of the wall–eddy rows plus `b₃` constraint in `(b₁, b₂, b₃)`.
    pub b_system_det: GaussQ,
    /// Null space dimension of the full seven-unknown system.
    pub kernel_dim: usize,
    /// Determinant of the reduced 5×5 covering matrix.
    pub covering_det: GaussQ,
}

/// Unknowns `(a₁, a₂, a₃, b₁, b₂, b₃, a₀)` with `|η| = 1`.
pub fn covering_algebra(axis: usize, gamma: GaussQ, which: Particular) -> CoveringAlgebra {
    let (e1, e2) = if axis == 0 { (gq(1, 0), gq(0, 0)) } else { (gq(0, 0), gq(1, 0)) };
    let i = gq(0, 1);
    let z = GaussQ::zero;
    let one = gq(1, 0);
    let v0 = [z(), z(), crate::poly::gq_frac(-1, 4)];
    let (v1, v2) = match which {
        Particular::Published => ([z(), z(), z()], [-(&i * &e1) / gq(4, 0), -(&i * &e2) / gq(4, 0), crate::poly::gq_frac(1, 2)]),
        Particular::DivergenceFree => (
            [&i * &e1 / gq(2, 0), &i * &e2 / gq(2, 0), z()],
            [-(&i * &e1) * gq(5, 0) / gq(4, 0), -(&i * &e2) * gq(5, 0) / gq(4, 0), crate::poly::gq_frac(1, 2)],
        ),
    };
    let unit = |k: usize| {
        let mut v = vec![z(); 7];
        v[k] = one.clone();
        v
    };
    let lin = |terms: &[(GaussQ, Vec<GaussQ>)]| {
        let mut out = vec![z(); 7];
        for (w, v) in terms {
            for (o, x) in out.iter_mut().zip(v) {
                *o = &*o + w * x;
            }
        }
        out
    };
    let a: Vec<Vec<GaussQ>> = (0..3).map(unit).collect();
    let b: Vec<Vec<GaussQ>> = (3..6).map(unit).collect();
    let a0 = unit(6);
    let u0: Vec<Vec<GaussQ>> = (0..3).map(|k| lin(&[(one.clone(), a[k].clone()), (v0[k].clone(), a0.clone())])).collect();
    let u1: Vec<Vec<GaussQ>> =
        (0..3).map(|k| lin(&[(-one.clone(), a[k].clone()), (one.clone(), b[k].clone()), (v1[k].clone(), a0.clone())])).collect();
    let u2: Vec<Vec<GaussQ>> =
        (0..3).map(|k| lin(&[(one.clone(), a[k].clone()), (gq(-2, 0), b[k].clone()), (v2[k].clone(), a0.clone())])).collect();
    let tw = lin(&[(e2.clone(), u0[0].clone()), (-e1.clone(), u0[1].clone())]);
    let w4 = lin(&[(one.clone(), u2[1].clone()), (-(&i * &e2), u1[2].clone()), (&gamma * &e1, tw.clone())]);
    let w5 = lin(&[(one.clone(), u2[0].clone()), (-(&i * &e1), u1[2].clone()), (&gamma * &e2, tw)]);
    // b₃ = i(η·b),  a₃ = iη·a + b₃
    let c1 = lin(&[(one.clone(), b[2].clone()), (-(&i * &e1), b[0].clone()), (-(&i * &e2), b[1].clone())]);
    let c2 = lin(&[(one.clone(), a[2].clone()), (-(&i * &e1), a[0].clone()), (-(&i * &e2), a[1].clone()), (-one.clone(), b[2].clone())]);

    // Dirichlet rows: a_k = −v0_k a₀
    let dir = ExactMatrix::new(u0.clone());
    let (rr, piv) = dir.rref();
    let mut ratio = [z(), z(), z()];
    for (row, &pc) in piv.iter().enumerate() {
        if pc < 3 {
            ratio[pc] = -rr.rows[row][6].clone();
        }
    }
    // substitute a = ratio·a₀ into the wall–eddy rows
    let a0_coeff = |w: &Vec<GaussQ>| -> GaussQ { (0..3).fold(w[6].clone(), |acc, k| acc + &w[k] * &ratio[k]) };
    let wall_eddy_a0_coeff = [a0_coeff(&w4), a0_coeff(&w5)];
    let bsys = ExactMatrix::new(vec![w4[3..6].to_vec(), w5[3..6].to_vec(), c1[3..6].to_vec()]);
    let full = ExactMatrix::new(vec![c1, c2, u0[0].clone(), u0[1].clone(), u0[2].clone(), w4, w5]);
    CoveringAlgebra {
        axis,
        particular: which,
        dirichlet_a_over_a0: ratio,
        wall_eddy_a0_coeff,
        b_system_det: bsys.det(),
        kernel_dim: full.nullspace().len(),
        covering_det: boundary_system_exact(axis, gamma, which).det(),
    }
}
