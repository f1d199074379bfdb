//! Weak stationary problem `a(u, φ) = ⟨f, φ⟩`, pressure recovery and
//! strong boundary residuals.

use rayon::prelude::*;
use serde::Serialize;

use crate::discretization::Operators;
use crate::error::{Error, Result};
use crate::field::{DualField, SolenoidalField};
use crate::legendre::plain_table;
use crate::linalg::{self, CMat, CVec};
use crate::model::{ChannelGeometry, ModelParams};
use crate::space::{ChannelSpace, Jet, Mode};
use crate::C64;

/// Relative eigenvalue size below which a direction counts as kernel.
pub const KERNEL_TOL: f64 = 1e-10;

/// Body force given by its samples at the quadrature nodes, per stored mode,
/// plus an optional extra dual contribution (e.g. a boundary forcing).
#[derive(Debug, Clone)]
pub struct Forcing {
    pub nodal: Vec<[Vec<C64>; 3]>,
    pub extra: Option<DualField>,
}

impl Forcing {
    pub fn zero(space: &ChannelSpace) -> Self {
        let nq = space.weights.len();
        Self {
            nodal: space.modes.iter().map(|_| std::array::from_fn(|_| vec![C64::new(0.0, 0.0); nq])).collect(),
            extra: None,
        }
    }

    /// Galerkin right-hand side `⟨f, b_j⟩`.
    pub fn dual(&self, space: &ChannelSpace) -> DualField {
        let mut out = SolenoidalField::zeros(space);
        for ((mode, f), c) in space.modes.iter().zip(&self.nodal).zip(out.coeffs.iter_mut()) {
            *c = CVec::from_vec(space.nodes.project(mode, &space.weights, f)).scale(space.area());
        }
        match &self.extra {
            Some(e) => out.add(e),
            None => out,
        }
    }
}

#[derive(Debug, Clone)]
pub struct StationarySolution {
    pub u: SolenoidalField,
    pub kernel_dim: usize,
    /// `max_modes ‖K_a û − f̂‖ / ‖f̂‖`.
    pub relative_residual: f64,
}

/// Solves `K_a û = f̂` per mode. Directions with `|λ| < KERNEL_TOL · max|λ|`
/// of `(K_a, M)` are treated as kernel; the right-hand side must be
/// orthogonal to them.
pub fn solve_stationary(rhs: &DualField, ops: &Operators) -> Result<StationarySolution> {
    let results = ops
        .modes
        .par_iter()
        .zip(rhs.coeffs.par_iter())
        .map(|(op, f)| {
            if f.len() != op.dim() {
                return Err(Error::Dimension { expected: op.dim(), got: f.len() });
            }
            let e = linalg::gen_eigh(&op.k_a, &op.m)?;
            let lmax = e.values.iter().fold(0.0f64, |m, v| m.max(v.abs()));
            let kernel: Vec<usize> = (0..e.values.len()).filter(|&j| e.values[j].abs() < KERNEL_TOL * lmax).collect();
            let fnorm = f.norm();
            let c = if kernel.is_empty() {
                op.k_a.clone().lu().solve(f).ok_or(Error::LinearSolve { mode: op.mode_index })?
            } else {
                let mut c = CVec::zeros(op.dim());
                let mut violation = 0.0f64;
                for j in 0..e.values.len() {
                    let v = e.vectors.column(j);
                    let proj = v.dotc(f);
                    if kernel.contains(&j) {
                        violation = violation.max(proj.norm());
                    } else {
                        c += v.into_owned().scale(1.0) * (proj / e.values[j]);
                    }
                }
                if violation > 1e-8 * fnorm.max(f64::MIN_POSITIVE) {
                    return Err(Error::KernelConsistency { violation, kernel_dim: kernel.len() });
                }
                c
            };
            let res = (&op.k_a * &c - f).norm();
            let rel = if fnorm > 0.0 { res / fnorm } else { res };
            Ok((c, kernel.len(), rel))
        })
        .collect::<Result<Vec<_>>>()?;
    let mut u = SolenoidalField { n1: rhs.n1, n2: rhs.n2, p: rhs.p, coeffs: Vec::with_capacity(results.len()) };
    let mut kernel_dim = 0;
    let mut relative_residual = 0.0f64;
    for (c, k, r) in results {
        u.coeffs.push(c);
        kernel_dim += k;
        relative_residual = relative_residual.max(r);
    }
    Ok(StationarySolution { u, kernel_dim, relative_residual })
}

/// Pressure as Legendre coefficients in `z` per stored mode.
#[derive(Debug, Clone)]
pub struct Pressure {
    pub degree: usize,
    pub coeffs: Vec<CVec>,
    /// Least-squares misfit relative to the residual `r = f − Δ²u`.
    pub defect: f64,
}

impl Pressure {
    /// Values of mode `idx` at `z`.
    pub fn eval(&self, idx: usize, h: f64, z: &[f64]) -> Vec<C64> {
        let t = &plain_table(self.degree, h, z, 0)[0];
        (0..z.len())
            .map(|q| (0..=self.degree).map(|n| self.coeffs[idx][n] * t[(q, n)]).sum())
            .collect()
    }
}

fn bilaplacian_at_nodes(space: &ChannelSpace, mode: &Mode, c: &CVec) -> Vec<[C64; 3]> {
    let jet = space.nodes.jet(mode, c.as_slice(), 4);
    (0..jet.npoints()).map(|q| jet.bilaplacian(q)).collect()
}

/// Recovers `p` from `∇p = r := f − Δ²u` in the least-squares sense per mode
/// (zero-mean gauge). Fails when the relative misfit exceeds `tolerance`.
pub fn recover_pressure(u: &SolenoidalField, f: &Forcing, space: &ChannelSpace, tolerance: f64) -> Result<Pressure> {
    u.check(space)?;
    let degree = space.p() + 2;
    let h = space.geometry.h;
    let tab = plain_table(degree, h, &space.nodes.z, 1);
    let w = &space.weights;
    let nq = w.len();
    let results: Vec<(CVec, f64, f64)> = space
        .modes
        .par_iter()
        .enumerate()
        .map(|(idx, mode)| {
            let b = bilaplacian_at_nodes(space, mode, &u.coeffs[idx]);
            let r: Vec<[C64; 3]> = (0..nq).map(|q| std::array::from_fn(|c| f.nodal[idx][c][q] - b[q][c])).collect();
            let i = C64::i();
            let first = if mode.is_mean() { 1 } else { 0 };
            let ncols = degree + 1 - first;
            let mut a = CMat::zeros(3 * nq, ncols);
            let mut rhs = CVec::zeros(3 * nq);
            for q in 0..nq {
                let s = w[q].sqrt();
                for n in first..=degree {
                    let col = n - first;
                    a[(3 * q, col)] = i * mode.eta[0] * tab[0][(q, n)] * s;
                    a[(3 * q + 1, col)] = i * mode.eta[1] * tab[0][(q, n)] * s;
                    a[(3 * q + 2, col)] = C64::new(tab[1][(q, n)] * s, 0.0);
                }
                for c in 0..3 {
                    rhs[3 * q + c] = r[q][c] * s;
                }
            }
            let sol = least_squares(&a, &rhs);
            let misfit = (&a * &sol - &rhs).norm_squared();
            let mut full = CVec::zeros(degree + 1);
            for n in first..=degree {
                full[n] = sol[n - first];
            }
            (full, misfit * mode.weight, rhs.norm_squared() * mode.weight)
        })
        .collect();
    let mis: f64 = results.iter().map(|r| r.1).sum();
    let tot: f64 = results.iter().map(|r| r.2).sum();
    let defect = if tot > 0.0 { (mis / tot).sqrt() } else { 0.0 };
    if defect > tolerance {
        return Err(Error::WeakSolutionDefect { defect, tolerance });
    }
    Ok(Pressure { degree, coeffs: results.into_iter().map(|r| r.0).collect(), defect })
}

fn least_squares(a: &CMat, b: &CVec) -> CVec {
    // column scaling keeps the derivative columns comparable
    let scales: Vec<f64> = (0..a.ncols()).map(|j| a.column(j).norm().max(f64::MIN_POSITIVE)).collect();
    let mut s = a.clone();
    for (j, sc) in scales.iter().enumerate() {
        s.column_mut(j).unscale_mut(*sc);
    }
    let svd = s.svd(true, true);
    let mut x = svd.solve(b, 1e-13).expect("svd with vectors");
    for (xi, sc) in x.iter_mut().zip(&scales) {
        *xi /= *sc;
    }
    x
}

/// Wall traces of `(1 − n⊗n) G n − k ω` for one mode; index `[wall][component]`.
pub fn wall_eddy_trace(jet: &Jet, params: &ModelParams) -> [[C64; 3]; 2] {
    std::array::from_fn(|wall| {
        let nz = ChannelGeometry::wall_normal(wall);
        let g = jet.grad_curl(wall);
        let w = jet.curl(wall);
        std::array::from_fn(|a| {
            if a == 2 {
                -w[2] * params.k
            } else {
                (g[a][2] + params.gamma * g[2][a]) * nz - w[a] * params.k
            }
        })
    })
}

/// Natural boundary datum `(G n)×n + k n×ω`, the wall forcing that a smooth
/// field violating the wall–eddy condition needs in the weak form.
pub fn wall_defect(jet: &Jet, params: &ModelParams) -> [[C64; 3]; 2] {
    std::array::from_fn(|wall| {
        let nz = ChannelGeometry::wall_normal(wall);
        let g = jet.grad_curl(wall);
        let w = jet.curl(wall);
        let gn: [C64; 3] = std::array::from_fn(|a| (g[a][2] + params.gamma * g[2][a]) * nz);
        // (Gn)×n with n = nz e3, and n×ω
        [
            gn[1] * nz - w[1] * nz * params.k,
            -gn[0] * nz + w[0] * nz * params.k,
            C64::new(0.0, 0.0),
        ]
    })
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct BcResidual {
    /// L² norm of the wall trace of `u`.
    pub dirichlet: f64,
    /// L² norm over both walls of `(1 − n⊗n) G n − k ω`.
    pub wall_eddy: f64,
    /// L² norm over both walls of `G n`, for scale.
    pub traction_scale: f64,
}

/// Strong boundary residuals of a discrete field.
pub fn strong_bc_residual(u: &SolenoidalField, space: &ChannelSpace, params: &ModelParams) -> Result<BcResidual> {
    u.check(space)?;
    let mut acc = [0.0f64; 3];
    for (mode, c) in space.modes.iter().zip(&u.coeffs) {
        let jet = space.walls.jet(mode, c.as_slice(), 2);
        let tr = wall_eddy_trace(&jet, params);
        for wall in 0..2 {
            let g = jet.grad_curl(wall);
            for a in 0..3 {
                acc[0] += mode.weight * jet.d[0][a][wall].norm_sqr();
                acc[1] += mode.weight * tr[wall][a].norm_sqr();
                acc[2] += mode.weight * g[a][2].norm_sqr();
            }
        }
    }
    let area = space.area();
    Ok(BcResidual {
        dirichlet: (area * acc[0]).sqrt(),
        wall_eddy: (area * acc[1]).sqrt(),
        traction_scale: (area * acc[2]).sqrt(),
    })
}

/// Manufactured stationary problem built from closed-form potentials and
/// pressure on a subset of modes.
pub struct Manufactured {
    pub modes: Vec<(usize, crate::analytic::Potentials, crate::analytic::ExpSum)>,
}

impl Manufactured {
    /// Sample problem on the mean mode and the first two wave modes.
    pub fn sample(space: &ChannelSpace) -> Self {
        let h = space.geometry.h;
        let idx: Vec<usize> = (0..space.modes.len().min(3)).collect();
        Self {
            modes: idx
                .into_iter()
                .map(|i| {
                    let m = &space.modes[i];
                    let p = if m.is_mean() {
                        crate::analytic::sample_pressure(h).scale(C64::new(0.3, 0.0))
                    } else {
                        crate::analytic::sample_pressure(h)
                    };
                    (i, crate::analytic::sample_potentials(m, h), p)
                })
                .collect(),
        }
    }

    /// `f = Δ²u* + ∇p*` at the nodes plus the wall forcing from the
    /// natural-condition defect of `u*`.
    pub fn forcing(&self, space: &ChannelSpace, params: &ModelParams) -> Forcing {
        let mut f = Forcing::zero(space);
        let mut extra = SolenoidalField::zeros(space);
        let i = C64::i();
        for (idx, pot, pr) in &self.modes {
            let mode = &space.modes[*idx];
            let jet = pot.jet(mode, &space.nodes.z, 4);
            for q in 0..jet.npoints() {
                let b = jet.bilaplacian(q);
                let z = space.nodes.z[q];
                let (p0, p1) = (pr.eval(0, z), pr.eval(1, z));
                let grad = if mode.is_mean() {
                    [C64::new(0.0, 0.0), C64::new(0.0, 0.0), p1]
                } else {
                    [i * mode.eta[0] * p0, i * mode.eta[1] * p0, p1]
                };
                for c in 0..3 {
                    f.nodal[*idx][c][q] = b[c] + grad[c];
                }
            }
            let wj = pot.jet(mode, &[0.0, space.geometry.h], 2);
            let datum = wall_defect(&wj, params);
            let nb = space.nbasis(*idx);
            let basis = space.walls.basis_jets(mode, nb, 1);
            for (j, bj) in basis.iter().enumerate() {
                let mut s = C64::new(0.0, 0.0);
                for wall in 0..2 {
                    let nz = ChannelGeometry::wall_normal(wall);
                    for a in 0..3 {
                        s += datum[wall][a] * (bj.d[1][a][wall] * nz).conj();
                    }
                }
                extra.coeffs[*idx][j] = s * space.area();
            }
        }
        f.extra = Some(extra);
        f
    }

    /// `‖u_h − u*‖` in the discrete H² norm and relative to `‖u*‖`,
    /// evaluated with `nq` Gauss nodes.
    pub fn h2_error(&self, u: &SolenoidalField, space: &ChannelSpace, nq: usize) -> (f64, f64) {
        let (x, w) = crate::legendre::gauss_legendre(nq);
        let h = space.geometry.h;
        let z: Vec<f64> = x.iter().map(|v| 0.5 * h * (v + 1.0)).collect();
        let w: Vec<f64> = w.iter().map(|v| 0.5 * h * v).collect();
        let tables = space.tables_at(&z);
        let mut err = 0.0;
        let mut norm = 0.0;
        for (idx, mode) in space.modes.iter().enumerate() {
            let uh = tables.jet(mode, u.coeffs[idx].as_slice(), 2);
            let exact = self.modes.iter().find(|m| m.0 == idx).map(|m| m.1.jet(mode, &z, 2));
            for q in 0..z.len() {
                let (ev, eg, el) = match &exact {
                    Some(e) => (e.value(q), e.grad(q), e.laplacian(q)),
                    None => ([C64::new(0.0, 0.0); 3], [[C64::new(0.0, 0.0); 3]; 3], [C64::new(0.0, 0.0); 3]),
                };
                let (hv, hg, hl) = (uh.value(q), uh.grad(q), uh.laplacian(q));
                let mut de = 0.0;
                let mut dn = 0.0;
                for a in 0..3 {
                    de += (hv[a] - ev[a]).norm_sqr() + (hl[a] - el[a]).norm_sqr();
                    dn += ev[a].norm_sqr() + el[a].norm_sqr();
                    for b in 0..3 {
                        de += (hg[a][b] - eg[a][b]).norm_sqr();
                        dn += eg[a][b].norm_sqr();
                    }
                }
                err += mode.weight * w[q] * de;
                norm += mode.weight * w[q] * dn;
            }
        }
        let area = space.area();
        ((area * err).sqrt(), (err / norm).sqrt())
    }

    /// Relative L² error of a recovered pressure (mean-mode constant removed).
    pub fn pressure_error(&self, p: &Pressure, space: &ChannelSpace, nq: usize) -> f64 {
        let (x, w) = crate::legendre::gauss_legendre(nq);
        let h = space.geometry.h;
        let z: Vec<f64> = x.iter().map(|v| 0.5 * h * (v + 1.0)).collect();
        let w: Vec<f64> = w.iter().map(|v| 0.5 * h * v).collect();
        let mut err = 0.0;
        let mut norm = 0.0;
        for (idx, mode) in space.modes.iter().enumerate() {
            let ph = p.eval(idx, h, &z);
            let mut pe: Vec<C64> = match self.modes.iter().find(|m| m.0 == idx) {
                Some(m) => z.iter().map(|&x| m.2.eval(0, x)).collect(),
                None => vec![C64::new(0.0, 0.0); z.len()],
            };
            if mode.is_mean() {
                let mean: C64 = pe.iter().zip(&w).map(|(v, wi)| v * *wi).sum::<C64>() / h;
                pe.iter_mut().for_each(|v| *v -= mean);
            }
            for q in 0..z.len() {
                err += mode.weight * w[q] * (ph[q] - pe[q]).norm_sqr();
                norm += mode.weight * w[q] * pe[q].norm_sqr();
            }
        }
        (err / norm).sqrt()
    }

    /// Natural-condition trace of `u*` (`[mode][wall][component]`).
    pub fn wall_trace(&self, space: &ChannelSpace, params: &ModelParams) -> Vec<[[C64; 3]; 2]> {
        space
            .modes
            .iter()
            .enumerate()
            .map(|(idx, mode)| match self.modes.iter().find(|m| m.0 == idx) {
                Some(m) => wall_eddy_trace(&m.1.jet(mode, &[0.0, space.geometry.h], 2), params),
                None => [[C64::new(0.0, 0.0); 3]; 2],
            })
            .collect()
    }
}

/// L² norm over the walls of the difference between the natural-condition
/// traces of `u` and the reference traces.
pub fn wall_trace_error(u: &SolenoidalField, reference: &[[[C64; 3]; 2]], space: &ChannelSpace, params: &ModelParams) -> (f64, f64) {
    let mut e = 0.0;
    let mut n = 0.0;
    for ((mode, c), r) in space.modes.iter().zip(&u.coeffs).zip(reference) {
        let tr = wall_eddy_trace(&space.walls.jet(mode, c.as_slice(), 2), params);
        for wall in 0..2 {
            for a in 0..3 {
                e += mode.weight * (tr[wall][a] - r[wall][a]).norm_sqr();
                n += mode.weight * r[wall][a].norm_sqr();
            }
        }
    }
    ((space.area() * e).sqrt(), (e / n).sqrt())
}

/// Smooth pseudo-random body force: low-degree Legendre profiles on the
/// lowest wavenumbers.
pub fn smooth_random_forcing(space: &ChannelSpace, seed: u64, max_mode: i64, degree: usize) -> Forcing {
    use rand::{Rng, SeedableRng};
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    let mut f = Forcing::zero(space);
    let tab = plain_table(degree, space.geometry.h, &space.nodes.z, 0);
    for (idx, mode) in space.modes.iter().enumerate() {
        if mode.k1.abs() > max_mode || mode.k2.abs() > max_mode {
            continue;
        }
        for c in 0..3 {
            let coef: Vec<C64> = (0..=degree)
                .map(|_| {
                    let re: f64 = rng.random_range(-1.0..1.0);
                    let im: f64 = if mode.is_mean() { 0.0 } else { rng.random_range(-1.0..1.0) };
                    C64::new(re, im)
                })
                .collect();
            if mode.is_mean() && c == 2 {
                continue;
            }
            for q in 0..space.nodes.npoints() {
                f.nodal[idx][c][q] = (0..=degree).map(|n| coef[n] * tab[0][(q, n)]).sum();
            }
        }
    }
    f
}
