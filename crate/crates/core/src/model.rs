//! Physical parameters, channel geometry and discretization resolution.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Physical constants of the NS-αβ model.
///
/// `k = ell / beta²` is derived and never set independently.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModelParams {
    pub alpha: f64,
    pub beta: f64,
    pub gamma: f64,
    pub ell: f64,
    pub k: f64,
}

/// Validates the model constants and derives `k = ell / beta²`.
pub fn derive_params(alpha: f64, beta: f64, gamma: f64, ell: f64) -> Result<ModelParams> {
    if !(alpha.is_finite() && beta.is_finite() && gamma.is_finite() && ell.is_finite()) {
        return Err(Error::Param("parameters must be finite".into()));
    }
    if beta <= 0.0 {
        return Err(Error::Param("beta must be positive".into()));
    }
    if alpha <= beta {
        return Err(Error::Param("alpha must exceed beta".into()));
    }
    if gamma.abs() > 1.0 {
        return Err(Error::Param("|gamma| ≤ 1 required".into()));
    }
    if ell <= 0.0 {
        return Err(Error::Param("ell must be positive".into()));
    }
    Ok(ModelParams {
        alpha,
        beta,
        gamma,
        ell,
        k: ell / (beta * beta),
    })
}

impl ModelParams {
    /// Same α, β, γ with `ell` chosen so that `k = ell / beta²` takes the
    /// requested value.
    pub fn with_k(&self, k: f64) -> Result<ModelParams> {
        derive_params(self.alpha, self.beta, self.gamma, k * self.beta * self.beta)
    }
}

/// Channel `[0, L1) × [0, L2) × [0, H]`, periodic in x and y.
///
/// The wall at `z = 0` has outward normal `-e₃`, the wall at `z = H` has `+e₃`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ChannelGeometry {
    pub l1: f64,
    pub l2: f64,
    pub h: f64,
}

impl ChannelGeometry {
    pub fn new(l1: f64, l2: f64, h: f64) -> Result<Self> {
        for (name, v) in [("L1", l1), ("L2", l2), ("H", h)] {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::Param(format!("{name} must be positive")));
            }
        }
        Ok(Self { l1, l2, h })
    }

    pub fn area(&self) -> f64 {
        self.l1 * self.l2
    }

    /// Outward normal z-component at the wall `which` (0 = bottom, 1 = top).
    pub fn wall_normal(which: usize) -> f64 {
        if which == 0 {
            -1.0
        } else {
            1.0
        }
    }
}

/// Discretization sizes.
///
/// `n1`, `n2` are the tangential Fourier mode counts (even; Nyquist modes are
/// not carried), `p` the wall-normal polynomial degree, `q` the number of
/// Gauss–Legendre nodes, and `mx`, `my` the padded physical grid.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Resolution {
    pub n1: usize,
    pub n2: usize,
    pub p: usize,
    pub q: usize,
    pub mx: usize,
    pub my: usize,
}

impl Resolution {
    /// Smallest node count integrating triple products of degree-`p`
    /// polynomials exactly.
    pub fn min_quadrature(p: usize) -> usize {
        (3 * p + 1).div_ceil(2)
    }

    /// Resolution with the default quadrature and factor-two padding.
    pub fn new(n1: usize, n2: usize, p: usize) -> Result<Self> {
        Self::with_all(n1, n2, p, Self::min_quadrature(p), 2 * n1, 2 * n2)
    }

    pub fn with_all(n1: usize, n2: usize, p: usize, q: usize, mx: usize, my: usize) -> Result<Self> {
        let r = Self { n1, n2, p, q, mx, my };
        r.validate()?;
        Ok(r)
    }

    pub fn validate(&self) -> Result<()> {
        if self.n1 < 2 || self.n2 < 2 || !self.n1.is_multiple_of(2) || !self.n2.is_multiple_of(2) {
            return Err(Error::Resolution("N1 and N2 must be even and at least 2".into()));
        }
        if self.p < 4 {
            return Err(Error::Resolution("P must be at least 4".into()));
        }
        let qmin = Self::min_quadrature(self.p);
        if self.q < qmin {
            return Err(Error::Resolution(format!(
                "Q = {} below the exactness bound ceil((3P+1)/2) = {qmin}",
                self.q
            )));
        }
        if self.mx < self.n1 || self.my < self.n2 {
            return Err(Error::Resolution(format!(
                "physical grid {}x{} smaller than the mode counts {}x{}",
                self.mx, self.my, self.n1, self.n2
            )));
        }
        Ok(())
    }

    /// Whether the tangential grid is padded by at least a factor of two.
    pub fn is_padded(&self) -> bool {
        self.mx >= 2 * self.n1 && self.my >= 2 * self.n2
    }

    /// Same tangential sizes with a different polynomial degree (quadrature
    /// reset to its minimum).
    pub fn with_degree(&self, p: usize) -> Result<Self> {
        Self::with_all(self.n1, self.n2, p, Self::min_quadrature(p), self.mx, self.my)
    }
}
