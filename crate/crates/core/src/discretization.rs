//! Per-wavenumber matrices of the L², Λ, gradient, Laplacian and `a(·,·)`
//! forms on the solenoidal basis.
//!
//! Entry `(i, j)` of every matrix is `form(b_j, b_i)`, so that
//! `form(u, φ) = φᴴ K u`. All forms carry the tangential area factor `L1·L2`.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::field::SolenoidalField;
use crate::linalg::{self, CMat, CVec};
use crate::model::ModelParams;
use crate::space::{ChannelSpace, Jet, Mode};
use crate::C64;

#[derive(Debug, Clone)]
pub struct ModeOperators {
    pub mode: Mode,
    pub mode_index: usize,
    /// L² mass.
    pub m: CMat,
    /// Lower Cholesky factor of `m`.
    pub m_chol: CMat,
    /// `∫ ∇u : ∇φ`.
    pub k_grad: CMat,
    /// `∫ Δu · Δφ`.
    pub k_lap: CMat,
    /// `∫ ∇ω : ∇(∇×φ)`.
    pub k_vol: CMat,
    /// `∫ (∇ω)ᵀ : ∇(∇×φ)`.
    pub k_vol_t: CMat,
    /// `∮ (n×ω) · ∂ₙφ` over both walls.
    pub k_bnd: CMat,
    /// `m + α² k_grad`.
    pub m_lambda: CMat,
    /// `k_vol + γ k_vol_t + k k_bnd`.
    pub k_a: CMat,
}

impl ModeOperators {
    pub fn eta(&self) -> [f64; 2] {
        self.mode.eta
    }

    pub fn dim(&self) -> usize {
        self.m.nrows()
    }

    /// Discrete H² form `M + K_∇ + K_Δ`.
    pub fn h2(&self) -> CMat {
        &self.m + &self.k_grad + &self.k_lap
    }

    /// Matrix of `a(·,·)` for other values of `γ` and `k`.
    pub fn form_a(&self, gamma: f64, k: f64) -> CMat {
        &self.k_vol + self.k_vol_t.scale(gamma) + self.k_bnd.scale(k)
    }

    /// Same geometry with new model constants.
    pub fn reparametrize(&self, params: &ModelParams) -> Self {
        let mut out = self.clone();
        out.m_lambda = &self.m + self.k_grad.scale(params.alpha * params.alpha);
        out.k_a = self.form_a(params.gamma, params.k);
        out
    }

    /// `M⁻¹ x` through the stored Cholesky factor.
    pub fn solve_mass(&self, x: &CVec) -> CVec {
        let y = self.m_chol.solve_lower_triangular(x).expect("nonsingular factor");
        self.m_chol.adjoint().solve_upper_triangular(&y).expect("nonsingular factor")
    }
}

/// Operators for every stored mode of a space.
#[derive(Debug, Clone)]
pub struct Operators {
    pub params: ModelParams,
    pub modes: Vec<ModeOperators>,
}

impl Operators {
    /// Same operators with `a(·,·)` rebuilt for `(γ, k)`, including the
    /// limit `k = 0` that lies outside the validated parameter set.
    pub fn with_form(&self, gamma: f64, k: f64) -> Self {
        let mut params = self.params;
        params.gamma = gamma;
        params.k = k;
        params.ell = k * params.beta * params.beta;
        Self {
            params,
            modes: self
                .modes
                .par_iter()
                .map(|m| {
                    let mut o = m.clone();
                    o.k_a = m.form_a(gamma, k);
                    o
                })
                .collect(),
        }
    }

    pub fn reparametrize(&self, params: &ModelParams) -> Self {
        Self {
            params: *params,
            modes: self.modes.par_iter().map(|m| m.reparametrize(params)).collect(),
        }
    }
}

pub fn assemble(space: &ChannelSpace, params: &ModelParams) -> Result<Operators> {
    let modes = (0..space.modes.len())
        .into_par_iter()
        .map(|i| assemble_mode(space, i, params))
        .collect::<Result<Vec<_>>>()?;
    Ok(Operators { params: *params, modes })
}

/// Operators for the stored mode `idx`.
pub fn assemble_mode(space: &ChannelSpace, idx: usize, params: &ModelParams) -> Result<ModeOperators> {
    let mode = space.modes[idx];
    assemble_for(space, mode, idx, params)
}

/// Operators for an arbitrary wavenumber `eta` (zero gives the mean-flow block).
pub fn assemble_for_eta(space: &ChannelSpace, eta: [f64; 2], params: &ModelParams) -> Result<ModeOperators> {
    let mean = eta == [0.0, 0.0];
    let mode = Mode { k1: if mean { 0 } else { i64::MAX }, k2: 0, eta, weight: if mean { 1.0 } else { 2.0 } };
    assemble_for(space, mode, usize::MAX, params)
}

fn assemble_for(space: &ChannelSpace, mode: Mode, idx: usize, params: &ModelParams) -> Result<ModeOperators> {
    let nb = if mode.is_mean() { 2 * space.n_dirichlet() } else { space.n_dirichlet() + space.n_clamped() };
    let area = space.area();
    let w = &space.weights;
    let nq = w.len();
    let jets = space.nodes.basis_jets(&mode, nb, 2);

    let features = |rows: usize, f: &dyn Fn(&Jet, usize) -> Vec<C64>| -> CMat {
        let mut x = CMat::zeros(rows * nq, nb);
        for (j, jet) in jets.iter().enumerate() {
            for q in 0..nq {
                let s = (w[q] * area).sqrt();
                for (r, v) in f(jet, q).into_iter().enumerate() {
                    x[(q * rows + r, j)] = v * s;
                }
            }
        }
        x
    };
    let xv = features(3, &|jet, q| jet.value(q).to_vec());
    let xg = features(9, &|jet, q| jet.grad(q).iter().flatten().copied().collect());
    let xl = features(3, &|jet, q| jet.laplacian(q).to_vec());
    let xo = features(9, &|jet, q| jet.grad_curl(q).iter().flatten().copied().collect());
    let xot = features(9, &|jet, q| {
        let g = jet.grad_curl(q);
        (0..9).map(|r| g[r % 3][r / 3]).collect()
    });

    let gram = |a: &CMat, b: &CMat| linalg::hermitize(&(a.adjoint() * b));
    let m = gram(&xv, &xv);
    let k_grad = gram(&xg, &xg);
    let k_lap = gram(&xl, &xl);
    let k_vol = gram(&xo, &xo);
    let k_vol_t = gram(&xo, &xot);

    // with u = 0 on the wall, n×ω = -(∂ₙu)_tangential and ∂ₙ = ±∂_z
    let wall_jets = space.walls.basis_jets(&mode, nb, 1);
    let mut y = CMat::zeros(4, nb);
    for (j, jet) in wall_jets.iter().enumerate() {
        for wall in 0..2 {
            for c in 0..2 {
                y[(2 * wall + c, j)] = jet.d[1][c][wall] * area.sqrt();
            }
        }
    }
    let k_bnd = -gram(&y, &y);

    let m_chol = linalg::cholesky(&m, "L² mass").map_err(|_| Error::NotPositiveDefinite(format!("L² mass of mode {idx}")))?;
    let mut out = ModeOperators {
        mode,
        mode_index: idx,
        m_lambda: CMat::zeros(0, 0),
        k_a: CMat::zeros(0, 0),
        m,
        m_chol,
        k_grad,
        k_lap,
        k_vol,
        k_vol_t,
        k_bnd,
    };
    out.m_lambda = &out.m + out.k_grad.scale(params.alpha * params.alpha);
    out.k_a = out.form_a(params.gamma, params.k);
    Ok(out)
}

/// `vᴴ A u`.
pub fn apply_form(op: &CMat, u: &[C64], v: &[C64]) -> Result<C64> {
    linalg::apply_form(op, u, v)
}

/// Global value of a Hermitian form on a real field: `Σ_modes weight · uᴴ K u`.
pub fn global_form(ops: &Operators, u: &SolenoidalField, pick: impl Fn(&ModeOperators) -> &CMat) -> f64 {
    ops.modes
        .iter()
        .zip(&u.coeffs)
        .map(|(op, c)| op.mode.weight * linalg::quad(pick(op), c))
        .sum()
}

/// Global pairing `⟨a, b⟩` of two modal vectors with the given per-mode matrix.
pub fn global_pair(ops: &Operators, a: &SolenoidalField, b: &SolenoidalField, pick: impl Fn(&ModeOperators) -> &CMat) -> f64 {
    ops.modes
        .iter()
        .zip(a.coeffs.iter().zip(&b.coeffs))
        .map(|(op, (x, y))| op.mode.weight * y.dotc(&(pick(op) * x)).re)
        .sum()
}

/// Norms of a discrete field.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SobolevNorms {
    pub l2: f64,
    pub h1: f64,
    /// `sqrt(‖u‖² + ‖∇u‖² + ‖Δu‖²)`.
    pub h2: f64,
    /// `‖Ã^{k/2} u‖` for `k = 0, 1, 2` with `Ã = A + γ₀`.
    pub a_scale: [f64; 3],
}

/// Norms of `u`; the A-scale uses the spectral calculus of `(K_a + γ₀M, M)`.
pub fn sobolev_norms(u: &SolenoidalField, ops: &Operators, gamma0: f64) -> Result<SobolevNorms> {
    if u.coeffs.len() != ops.modes.len() {
        return Err(Error::Dimension { expected: ops.modes.len(), got: u.coeffs.len() });
    }
    let mut acc = [0.0f64; 6];
    for (op, c) in ops.modes.iter().zip(&u.coeffs) {
        if c.len() != op.dim() {
            return Err(Error::Dimension { expected: op.dim(), got: c.len() });
        }
        let w = op.mode.weight;
        let l2 = linalg::quad(&op.m, c);
        let g = linalg::quad(&op.k_grad, c);
        let l = linalg::quad(&op.k_lap, c);
        let e = linalg::gen_eigh(&op.k_a, &op.m).map_err(|err| match err {
            Error::Eigen { reason, .. } => Error::Eigen { mode: op.mode_index, reason },
            other => other,
        })?;
        let y = e.vectors.adjoint() * (&op.m * c);
        let mut a1 = 0.0;
        let mut a2 = 0.0;
        for (lam, yi) in e.values.iter().zip(y.iter()) {
            let s = (lam + gamma0).abs();
            a1 += s * yi.norm_sqr();
            a2 += s * s * yi.norm_sqr();
        }
        acc[0] += w * l2;
        acc[1] += w * g;
        acc[2] += w * l;
        acc[3] += w * a1;
        acc[4] += w * a2;
    }
    Ok(SobolevNorms {
        l2: acc[0].sqrt(),
        h1: (acc[0] + acc[1]).sqrt(),
        h2: (acc[0] + acc[1] + acc[2]).sqrt(),
        a_scale: [acc[0].sqrt(), acc[3].sqrt(), acc[4].sqrt()],
    })
}
