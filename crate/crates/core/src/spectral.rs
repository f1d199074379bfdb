//! Spectrum of `A`, discrete Gårding constants and the factors `Λ^{±1/2}`,
//! `D` used by the linear propagator.

use rayon::prelude::*;
use serde::Serialize;

use crate::discretization::{ModeOperators, Operators};
use crate::error::{Error, Result};
use crate::linalg::{self, CMat, CVec};
use crate::model::ModelParams;

#[derive(Debug, Clone)]
pub struct EigenPair {
    pub lambda: f64,
    pub mode_index: usize,
    pub eta: [f64; 2],
    /// `M`-normalized coefficients of the mode.
    pub vector: CVec,
    /// `‖K v − λ M v‖ / ((‖K‖ + |λ|‖M‖)‖v‖)`.
    pub residual: f64,
}

fn mode_eigen(op: &ModeOperators, a: &CMat, b: &CMat) -> Result<linalg::GenEig> {
    linalg::gen_eigh(a, b).map_err(|e| match e {
        Error::Eigen { reason, .. } => Error::Eigen { mode: op.mode_index, reason },
        Error::NotPositiveDefinite(w) => Error::Eigen { mode: op.mode_index, reason: w },
        other => other,
    })
}

/// The `count` lowest eigenpairs of `(K_a, M)` over all stored modes,
/// sorted nondecreasingly. Conjugate partners of stored modes are not listed.
pub fn eigenpairs_a(ops: &Operators, count: usize) -> Result<Vec<EigenPair>> {
    let total: usize = ops.modes.iter().map(|m| m.dim()).sum();
    if count > total {
        return Err(Error::Invalid(format!("requested {count} eigenpairs, basis has {total}")));
    }
    let per_mode = ops
        .modes
        .par_iter()
        .map(|op| {
            let e = mode_eigen(op, &op.k_a, &op.m)?;
            let scale_k = op.k_a.norm();
            let scale_m = op.m.norm();
            let pairs: Vec<EigenPair> = e
                .values
                .iter()
                .enumerate()
                .take(count)
                .map(|(j, &lambda)| {
                    let v = e.vectors.column(j).into_owned();
                    let r = (&op.k_a * &v - (&op.m * &v).scale(lambda)).norm();
                    EigenPair {
                        lambda,
                        mode_index: op.mode_index,
                        eta: op.eta(),
                        residual: r / ((scale_k + lambda.abs() * scale_m) * v.norm()),
                        vector: v,
                    }
                })
                .collect();
            Ok(pairs)
        })
        .collect::<Result<Vec<_>>>()?;
    let mut all: Vec<EigenPair> = per_mode.into_iter().flatten().collect();
    all.sort_by(|a, b| a.lambda.total_cmp(&b.lambda).then(a.mode_index.cmp(&b.mode_index)));
    all.truncate(count);
    Ok(all)
}

/// Smallest eigenvalue of the pencil `(K_a + γ₀M, M + K_∇ + K_Δ)` over all modes.
pub fn garding_c0(ops: &Operators, gamma0: f64) -> Result<f64> {
    let mins = ops
        .modes
        .par_iter()
        .map(|op| {
            let a = &op.k_a + op.m.scale(gamma0);
            Ok(mode_eigen(op, &a, &op.h2())?.values[0])
        })
        .collect::<Result<Vec<f64>>>()?;
    Ok(mins.into_iter().fold(f64::INFINITY, f64::min))
}

/// `{0} ∪ {10^j : j = −3..4}`.
pub fn default_gamma0_grid() -> Vec<f64> {
    std::iter::once(0.0).chain((-3..=4).map(|j| 10f64.powi(j))).collect()
}

/// Threshold above which a pencil minimum counts as positive.
pub const C0_POSITIVE: f64 = 1e-10;

#[derive(Debug, Clone, Serialize)]
pub struct GardingReport {
    pub gamma: f64,
    pub k: f64,
    /// `(γ₀, c₀(γ₀))` on the grid.
    pub curve: Vec<(f64, f64)>,
    /// Smallest grid value with positive `c₀`.
    pub gamma0: Option<f64>,
    /// `c₀` at [`GardingReport::gamma0`].
    pub c0: Option<f64>,
    /// Sign-change location refined by bisection.
    pub gamma0_refined: Option<f64>,
    pub norm: &'static str,
}

pub const H2_NORM_DEFINITION: &str = "|u|^2 + |grad u|^2 + |lap u|^2 integrated over the channel";

/// Scans `grid` (ascending) for the first `γ₀` with positive `c₀` and refines
/// the sign change by bisection.
pub fn garding_constants(ops: &Operators, grid: &[f64]) -> Result<GardingReport> {
    let mut curve = Vec::with_capacity(grid.len());
    let mut found: Option<(usize, f64)> = None;
    for (i, &g0) in grid.iter().enumerate() {
        let c0 = garding_c0(ops, g0)?;
        curve.push((g0, c0));
        if c0 > C0_POSITIVE {
            found = Some((i, c0));
            break;
        }
    }
    let mut refined = None;
    if let Some((i, _)) = found {
        if i == 0 {
            refined = Some(grid[0]);
        } else {
            let (mut lo, mut hi) = (grid[i - 1], grid[i]);
            for _ in 0..40 {
                if hi - lo <= 1e-6 * hi {
                    break;
                }
                let mid = 0.5 * (lo + hi);
                if garding_c0(ops, mid)? > C0_POSITIVE {
                    hi = mid;
                } else {
                    lo = mid;
                }
            }
            refined = Some(hi);
        }
    }
    Ok(GardingReport {
        gamma: ops.params.gamma,
        k: ops.params.k,
        curve,
        gamma0: found.map(|(i, _)| grid[i]),
        c0: found.map(|(_, c)| c),
        gamma0_refined: refined,
        norm: H2_NORM_DEFINITION,
    })
}

/// Which stiffness generates the linear semigroup.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Generator {
    /// `β² A`.
    Principal,
    /// `β² A − Δ`.
    WithDiffusion,
}

/// Spectral factors of one mode, in coordinates where `M = I`
/// (`w = Lᴴ c` with `M = L Lᴴ`).
#[derive(Debug, Clone)]
pub struct ModeFactors {
    pub l: CMat,
    /// Matrix of Λ in whitened coordinates.
    pub s: CMat,
    pub s_half: CMat,
    pub s_mhalf: CMat,
    /// `S^{-1/2} L⁻¹ K L⁻ᴴ S^{-1/2}`.
    pub d: CMat,
    /// Eigenvalues of `d`, ascending, and its unitary eigenvectors.
    pub mu: Vec<f64>,
    pub z: CMat,
}

impl ModeFactors {
    /// `Λ^{1/2} u` in whitened coordinates.
    pub fn half_weighted(&self, c: &CVec) -> CVec {
        &self.s_half * (self.l.adjoint() * c)
    }

    /// Inverse of [`ModeFactors::half_weighted`].
    pub fn from_half_weighted(&self, y: &CVec) -> CVec {
        let w = &self.s_mhalf * y;
        self.l.adjoint().solve_upper_triangular(&w).expect("nonsingular factor")
    }

    /// `Λ^{-1/2}` applied to a Galerkin right-hand side `⟨f, b_j⟩`.
    pub fn weighted_rhs(&self, f: &CVec) -> CVec {
        &self.s_mhalf * self.l.solve_lower_triangular(f).expect("nonsingular factor")
    }

    /// `e^{-tD} y`.
    pub fn semigroup(&self, t: f64, y: &CVec) -> CVec {
        let mut c = self.z.adjoint() * y;
        for (ci, &m) in c.iter_mut().zip(&self.mu) {
            *ci *= (-m * t).exp();
        }
        &self.z * c
    }
}

#[derive(Debug, Clone)]
pub struct SpectralFactors {
    pub generator: Generator,
    pub modes: Vec<ModeFactors>,
}

impl SpectralFactors {
    pub fn mu_min(&self) -> f64 {
        self.modes.iter().map(|m| m.mu[0]).fold(f64::INFINITY, f64::min)
    }
}

/// `Λ^{±1/2}` from `(M_Λ, M)` and `D = Λ^{-1/2} K Λ^{-1/2}` with `K` chosen by
/// `generator`.
pub fn lambda_sqrt_and_d(ops: &Operators, params: &ModelParams, generator: Generator) -> Result<SpectralFactors> {
    let b2 = params.beta * params.beta;
    let modes = ops
        .modes
        .par_iter()
        .map(|op| {
            let l = op.m_chol.clone();
            let s = linalg::congruence_inv(&l, &op.m_lambda);
            let (sv, sw) = linalg::eigh(&s);
            if sv[0] <= 0.0 {
                return Err(Error::NotPositiveDefinite(format!("Λ-form of mode {}", op.mode_index)));
            }
            let fun = |f: &dyn Fn(f64) -> f64| {
                let mut sc = sw.clone();
                for (j, &v) in sv.iter().enumerate() {
                    sc.column_mut(j).scale_mut(f(v));
                }
                &sc * sw.adjoint()
            };
            let s_half = fun(&|v| v.sqrt());
            let s_mhalf = fun(&|v| 1.0 / v.sqrt());
            let k = match generator {
                Generator::Principal => op.k_a.scale(b2),
                Generator::WithDiffusion => op.k_a.scale(b2) + &op.k_grad,
            };
            let kt = linalg::congruence_inv(&l, &k);
            let d = linalg::hermitize(&(&s_mhalf * kt * &s_mhalf));
            let (mu, z) = linalg::eigh(&d);
            Ok(ModeFactors { l, s, s_half, s_mhalf, d, mu, z })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(SpectralFactors { generator, modes })
}
