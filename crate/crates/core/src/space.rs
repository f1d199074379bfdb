//! The discrete function space: stored tangential wavenumbers, wall-normal
//! quadrature and tabulated basis derivatives.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::legendre::{gauss_legendre, BasisKind, Table};
use crate::model::{ChannelGeometry, Resolution};
use crate::C64;

/// Highest z-derivative of the velocity that the node tables support.
pub const MAX_VELOCITY_ORDER: usize = 4;

/// One stored tangential wavenumber. Every mode except the mean stands for
/// itself and its Hermitian partner `-η`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Mode {
    pub k1: i64,
    pub k2: i64,
    pub eta: [f64; 2],
    /// 1 for the mean mode, 2 otherwise (the conjugate partner is implicit).
    pub weight: f64,
}

impl Mode {
    pub fn is_mean(&self) -> bool {
        self.k1 == 0 && self.k2 == 0
    }

    pub fn kappa2(&self) -> f64 {
        self.eta[0] * self.eta[0] + self.eta[1] * self.eta[1]
    }

    pub fn kappa(&self) -> f64 {
        self.kappa2().sqrt()
    }
}

/// Basis tables at a set of wall-normal points.
#[derive(Debug, Clone)]
pub struct PointTables {
    pub z: Vec<f64>,
    /// Toroidal potentials and mean profiles.
    pub dir: Table,
    /// Poloidal potentials.
    pub cla: Table,
}

impl PointTables {
    pub fn build(p: usize, h: f64, z: &[f64]) -> Self {
        Self {
            z: z.to_vec(),
            dir: Table::build(BasisKind::Dirichlet, p, h, z, MAX_VELOCITY_ORDER),
            cla: Table::build(BasisKind::Clamped, p, h, z, MAX_VELOCITY_ORDER + 1),
        }
    }

    pub fn npoints(&self) -> usize {
        self.z.len()
    }

    /// `d^m/dz^m` of velocity component `comp` of basis function `j` of `mode`
    /// at point `pt`.
    pub fn basis_value(&self, mode: &Mode, j: usize, comp: usize, m: usize, pt: usize) -> C64 {
        let nd = self.dir.nfun();
        let i = C64::i();
        if mode.is_mean() {
            let (which, jj) = if j < nd { (0, j) } else { (1, j - nd) };
            if comp == which {
                C64::new(self.dir.d[m][(pt, jj)], 0.0)
            } else {
                C64::new(0.0, 0.0)
            }
        } else if j < nd {
            let v = self.dir.d[m][(pt, j)];
            match comp {
                0 => i * mode.eta[1] * v,
                1 => -i * mode.eta[0] * v,
                _ => C64::new(0.0, 0.0),
            }
        } else {
            let jj = j - nd;
            match comp {
                0 => i * mode.eta[0] * self.cla.d[m + 1][(pt, jj)],
                1 => i * mode.eta[1] * self.cla.d[m + 1][(pt, jj)],
                _ => C64::new(mode.kappa2() * self.cla.d[m][(pt, jj)], 0.0),
            }
        }
    }

    /// Velocity derivatives up to `max_order` for a coefficient vector.
    pub fn jet(&self, mode: &Mode, coeffs: &[C64], max_order: usize) -> Jet {
        let nd = self.dir.nfun();
        let np = self.npoints();
        let mut d = vec![[vec![C64::new(0.0, 0.0); np], vec![C64::new(0.0, 0.0); np], vec![C64::new(0.0, 0.0); np]]; max_order + 1];
        let i = C64::i();
        if mode.is_mean() {
            let (uc, vc) = coeffs.split_at(nd);
            for (m, dm) in d.iter_mut().enumerate() {
                dm[0] = real_matvec(&self.dir.d[m], uc);
                dm[1] = real_matvec(&self.dir.d[m], vc);
            }
        } else {
            let (psi, phi) = coeffs.split_at(nd);
            let k2 = mode.kappa2();
            for (m, dm) in d.iter_mut().enumerate() {
                let ps = real_matvec(&self.dir.d[m], psi);
                let ph1 = real_matvec(&self.cla.d[m + 1], phi);
                let ph0 = real_matvec(&self.cla.d[m], phi);
                for q in 0..np {
                    dm[0][q] = i * (mode.eta[1] * ps[q] + mode.eta[0] * ph1[q]);
                    dm[1][q] = i * (-mode.eta[0] * ps[q] + mode.eta[1] * ph1[q]);
                    dm[2][q] = ph0[q] * k2;
                }
            }
        }
        Jet { eta: mode.eta, d }
    }

    /// Jets of every basis function of `mode` (unit coefficient vectors).
    pub fn basis_jets(&self, mode: &Mode, nb: usize, max_order: usize) -> Vec<Jet> {
        let np = self.npoints();
        (0..nb)
            .map(|j| {
                let d = (0..=max_order)
                    .map(|m| {
                        std::array::from_fn(|c| (0..np).map(|pt| self.basis_value(mode, j, c, m, pt)).collect())
                    })
                    .collect();
                Jet { eta: mode.eta, d }
            })
            .collect()
    }

    /// Galerkin projection `∫ F · conj(u_j) dz` of per-point vector samples
    /// onto the basis of `mode`, with quadrature weights `w` (no area factor).
    pub fn project(&self, mode: &Mode, w: &[f64], f: &[Vec<C64>; 3]) -> Vec<C64> {
        let nd = self.dir.nfun();
        let nc = self.cla.nfun();
        let np = self.npoints();
        let i = C64::i();
        if mode.is_mean() {
            let mut out = vec![C64::new(0.0, 0.0); 2 * nd];
            for j in 0..nd {
                let mut s0 = C64::new(0.0, 0.0);
                let mut s1 = C64::new(0.0, 0.0);
                for q in 0..np {
                    let b = self.dir.d[0][(q, j)] * w[q];
                    s0 += f[0][q] * b;
                    s1 += f[1][q] * b;
                }
                out[j] = s0;
                out[nd + j] = s1;
            }
            out
        } else {
            let k2 = mode.kappa2();
            let tor: Vec<C64> = (0..np)
                .map(|q| (-i * mode.eta[1] * f[0][q] + i * mode.eta[0] * f[1][q]) * w[q])
                .collect();
            let pol1: Vec<C64> = (0..np)
                .map(|q| (-i * mode.eta[0] * f[0][q] - i * mode.eta[1] * f[1][q]) * w[q])
                .collect();
            let pol0: Vec<C64> = (0..np).map(|q| f[2][q] * (k2 * w[q])).collect();
            let mut out = vec![C64::new(0.0, 0.0); nd + nc];
            for j in 0..nd {
                out[j] = (0..np).map(|q| tor[q] * self.dir.d[0][(q, j)]).sum();
            }
            for j in 0..nc {
                out[nd + j] = (0..np)
                    .map(|q| pol1[q] * self.cla.d[1][(q, j)] + pol0[q] * self.cla.d[0][(q, j)])
                    .sum();
            }
            out
        }
    }
}

fn real_matvec(a: &nalgebra::DMatrix<f64>, x: &[C64]) -> Vec<C64> {
    let (r, c) = a.shape();
    debug_assert_eq!(c, x.len());
    let mut out = vec![C64::new(0.0, 0.0); r];
    for j in 0..c {
        let xj = x[j];
        if xj.re == 0.0 && xj.im == 0.0 {
            continue;
        }
        let col = a.column(j);
        for (o, &aij) in out.iter_mut().zip(col.iter()) {
            *o += xj * aij;
        }
    }
    out
}

/// Velocity z-derivatives at a set of points for a single wavenumber:
/// `d[m][component][point]`.
#[derive(Debug, Clone)]
pub struct Jet {
    pub eta: [f64; 2],
    pub d: Vec<[Vec<C64>; 3]>,
}

impl Jet {
    pub fn npoints(&self) -> usize {
        self.d[0][0].len()
    }

    pub fn max_order(&self) -> usize {
        self.d.len() - 1
    }

    /// `∂^alpha u_comp` with `∂_x → iη₁`, `∂_y → iη₂`.
    pub fn partial(&self, comp: usize, alpha: [usize; 3], pt: usize) -> C64 {
        let mut f = self.d[alpha[2]][comp][pt];
        let i = C64::i();
        for (a, &e) in alpha[..2].iter().zip(&self.eta) {
            for _ in 0..*a {
                f *= i * e;
            }
        }
        f
    }

    pub fn value(&self, pt: usize) -> [C64; 3] {
        [self.d[0][0][pt], self.d[0][1][pt], self.d[0][2][pt]]
    }

    /// `g[i][j] = ∂_j u_i`.
    pub fn grad(&self, pt: usize) -> [[C64; 3]; 3] {
        std::array::from_fn(|i| std::array::from_fn(|j| self.partial(i, unit(j), pt)))
    }

    pub fn divergence(&self, pt: usize) -> C64 {
        (0..3).map(|j| self.partial(j, unit(j), pt)).sum()
    }

    pub fn curl(&self, pt: usize) -> [C64; 3] {
        let g = self.grad(pt);
        [g[2][1] - g[1][2], g[0][2] - g[2][0], g[1][0] - g[0][1]]
    }

    /// `g[a][b] = ∂_b ω_a` with `ω = ∇×u`.
    pub fn grad_curl(&self, pt: usize) -> [[C64; 3]; 3] {
        let dd = |comp: usize, j: usize, b: usize| {
            let mut al = unit(j);
            al[b] += 1;
            self.partial(comp, al, pt)
        };
        std::array::from_fn(|b_row| {
            let a = b_row;
            std::array::from_fn(|b| match a {
                0 => dd(2, 1, b) - dd(1, 2, b),
                1 => dd(0, 2, b) - dd(2, 0, b),
                _ => dd(1, 0, b) - dd(0, 1, b),
            })
        })
    }

    pub fn laplacian(&self, pt: usize) -> [C64; 3] {
        std::array::from_fn(|i| (0..3).map(|j| self.partial(i, twice(j), pt)).sum())
    }

    /// `g[i][j] = ∂_j Δu_i`.
    pub fn grad_laplacian(&self, pt: usize) -> [[C64; 3]; 3] {
        std::array::from_fn(|i| {
            std::array::from_fn(|j| {
                (0..3)
                    .map(|l| {
                        let mut al = twice(l);
                        al[j] += 1;
                        self.partial(i, al, pt)
                    })
                    .sum()
            })
        })
    }

    pub fn bilaplacian(&self, pt: usize) -> [C64; 3] {
        std::array::from_fn(|i| {
            let mut s = C64::new(0.0, 0.0);
            for a in 0..3 {
                for b in 0..3 {
                    let mut al = twice(a);
                    al[b] += 2;
                    s += self.partial(i, al, pt);
                }
            }
            s
        })
    }
}

fn unit(j: usize) -> [usize; 3] {
    let mut a = [0; 3];
    a[j] = 1;
    a
}

fn twice(j: usize) -> [usize; 3] {
    let mut a = [0; 3];
    a[j] = 2;
    a
}

/// Geometry, resolution, stored modes and wall-normal tables.
#[derive(Debug, Clone)]
pub struct ChannelSpace {
    pub geometry: ChannelGeometry,
    pub resolution: Resolution,
    pub modes: Vec<Mode>,
    /// Gauss nodes on `[0, H]` and their weights.
    pub weights: Vec<f64>,
    pub nodes: PointTables,
    /// Tables at `z = 0` (row 0) and `z = H` (row 1).
    pub walls: PointTables,
}

impl ChannelSpace {
    pub fn new(geometry: ChannelGeometry, resolution: Resolution) -> Result<Self> {
        resolution.validate()?;
        let (x, w) = gauss_legendre(resolution.q);
        let h = geometry.h;
        let z: Vec<f64> = x.iter().map(|xi| 0.5 * h * (xi + 1.0)).collect();
        let weights: Vec<f64> = w.iter().map(|wi| 0.5 * h * wi).collect();
        let modes = enumerate_modes(&geometry, &resolution);
        Ok(Self {
            geometry,
            resolution,
            modes,
            weights,
            nodes: PointTables::build(resolution.p, h, &z),
            walls: PointTables::build(resolution.p, h, &[0.0, h]),
        })
    }

    pub fn p(&self) -> usize {
        self.resolution.p
    }

    pub fn n_dirichlet(&self) -> usize {
        self.nodes.dir.nfun()
    }

    pub fn n_clamped(&self) -> usize {
        self.nodes.cla.nfun()
    }

    /// Number of basis functions of mode `idx`.
    pub fn nbasis(&self, idx: usize) -> usize {
        if self.modes[idx].is_mean() {
            2 * self.n_dirichlet()
        } else {
            self.n_dirichlet() + self.n_clamped()
        }
    }

    pub fn area(&self) -> f64 {
        self.geometry.area()
    }

    /// Stored index of wavenumber `(k1, k2)` and whether it is the conjugate
    /// partner of the stored mode.
    pub fn lookup(&self, k1: i64, k2: i64) -> Option<(usize, bool)> {
        let find = |a: i64, b: i64| self.modes.iter().position(|m| m.k1 == a && m.k2 == b);
        if let Some(i) = find(k1, k2) {
            return Some((i, false));
        }
        find(-k1, -k2).map(|i| (i, true))
    }

    pub fn tables_at(&self, z: &[f64]) -> PointTables {
        PointTables::build(self.resolution.p, self.geometry.h, z)
    }

    pub fn check_same(&self, other: &Resolution) -> Result<()> {
        if self.resolution.n1 != other.n1 || self.resolution.n2 != other.n2 || self.resolution.p != other.p {
            return Err(Error::ResolutionMismatch(format!(
                "space has N={}x{}, P={}; data has N={}x{}, P={}",
                self.resolution.n1, self.resolution.n2, self.resolution.p, other.n1, other.n2, other.p
            )));
        }
        Ok(())
    }
}

/// Mean mode first, then `k2 = 0, k1 > 0`, then `k2 > 0` rows with
/// `k1` ascending. Nyquist wavenumbers are not stored.
fn enumerate_modes(g: &ChannelGeometry, r: &Resolution) -> Vec<Mode> {
    let tau = 2.0 * std::f64::consts::PI;
    let h1 = (r.n1 / 2) as i64 - 1;
    let h2 = (r.n2 / 2) as i64 - 1;
    let mk = |k1: i64, k2: i64| Mode {
        k1,
        k2,
        eta: [tau * k1 as f64 / g.l1, tau * k2 as f64 / g.l2],
        weight: if k1 == 0 && k2 == 0 { 1.0 } else { 2.0 },
    };
    let mut modes = vec![mk(0, 0)];
    for k1 in 1..=h1 {
        modes.push(mk(k1, 0));
    }
    for k2 in 1..=h2 {
        for k1 in -h1..=h1 {
            modes.push(mk(k1, k2));
        }
    }
    modes
}
