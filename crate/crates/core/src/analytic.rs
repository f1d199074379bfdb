//! Closed-form wall-normal profiles and manufactured fields with exact
//! derivatives.

use crate::space::{Jet, Mode};
use crate::C64;

/// `Σ c_k e^{λ_k z}` with complex coefficients and rates.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct ExpSum {
    pub terms: Vec<(C64, C64)>,
}

impl ExpSum {
    pub fn exp(coef: C64, rate: C64) -> Self {
        Self { terms: vec![(coef, rate)] }
    }

    pub fn constant(c: f64) -> Self {
        Self::exp(C64::new(c, 0.0), C64::new(0.0, 0.0))
    }

    /// `sin(ω z) e^{σ z}`.
    pub fn sin_exp(omega: f64, sigma: f64) -> Self {
        let h = C64::new(0.0, -0.5);
        Self { terms: vec![(h, C64::new(sigma, omega)), (-h, C64::new(sigma, -omega))] }
    }

    /// `cos(ω z) e^{σ z}`.
    pub fn cos_exp(omega: f64, sigma: f64) -> Self {
        let h = C64::new(0.5, 0.0);
        Self { terms: vec![(h, C64::new(sigma, omega)), (h, C64::new(sigma, -omega))] }
    }

    pub fn add(&self, other: &Self) -> Self {
        let mut terms = self.terms.clone();
        terms.extend_from_slice(&other.terms);
        Self { terms }
    }

    pub fn scale(&self, s: C64) -> Self {
        Self { terms: self.terms.iter().map(|&(c, l)| (c * s, l)).collect() }
    }

    pub fn mul(&self, other: &Self) -> Self {
        let mut terms = Vec::with_capacity(self.terms.len() * other.terms.len());
        for &(a, la) in &self.terms {
            for &(b, lb) in &other.terms {
                terms.push((a * b, la + lb));
            }
        }
        Self { terms }
    }

    /// `d^m/dz^m` evaluated at `z`.
    pub fn eval(&self, m: usize, z: f64) -> C64 {
        self.terms.iter().map(|&(c, l)| c * l.powu(m as u32) * (l * z).exp()).sum()
    }
}

/// Potentials of one tangential mode.
#[derive(Debug, Clone, PartialEq)]
pub enum Potentials {
    /// Mean-flow profiles `(U, V)`.
    Mean { u: ExpSum, v: ExpSum },
    /// Toroidal `ψ` and poloidal `φ`.
    Wave { psi: ExpSum, phi: ExpSum },
}

impl Potentials {
    /// Velocity derivatives up to `max_order` at `z`.
    pub fn jet(&self, mode: &Mode, z: &[f64], max_order: usize) -> Jet {
        let i = C64::i();
        let d = (0..=max_order)
            .map(|m| match self {
                Potentials::Mean { u, v } => [
                    z.iter().map(|&x| u.eval(m, x)).collect(),
                    z.iter().map(|&x| v.eval(m, x)).collect(),
                    vec![C64::new(0.0, 0.0); z.len()],
                ],
                Potentials::Wave { psi, phi } => {
                    let [e1, e2] = mode.eta;
                    [
                        z.iter().map(|&x| i * (e2 * psi.eval(m, x) + e1 * phi.eval(m + 1, x))).collect(),
                        z.iter().map(|&x| i * (-e1 * psi.eval(m, x) + e2 * phi.eval(m + 1, x))).collect(),
                        z.iter().map(|&x| phi.eval(m, x) * mode.kappa2()).collect(),
                    ]
                }
            })
            .collect();
        Jet { eta: mode.eta, d }
    }
}

/// Smooth profiles vanishing with the required derivatives at `z = 0, h`.
pub fn sample_potentials(mode: &Mode, h: f64) -> Potentials {
    let pi = std::f64::consts::PI;
    if mode.is_mean() {
        Potentials::Mean {
            u: ExpSum::sin_exp(pi / h, 1.0 / h),
            v: ExpSum::sin_exp(2.0 * pi / h, -0.5 / h).scale(C64::new(0.5, 0.0)),
        }
    } else {
        let bump = ExpSum::constant(1.0).add(&ExpSum::cos_exp(2.0 * pi / h, 0.0).scale(C64::new(-1.0, 0.0)));
        Potentials::Wave {
            psi: ExpSum::sin_exp(pi / h, 1.0 / h),
            phi: bump.mul(&ExpSum::exp(C64::new(0.3, 0.2), C64::new(0.5 / h, 0.0))),
        }
    }
}

/// Sample pressure profile `c e^{z/h}`.
pub fn sample_pressure(h: f64) -> ExpSum {
    ExpSum::exp(C64::new(0.7, -0.4), C64::new(1.0 / h, 0.0))
}
