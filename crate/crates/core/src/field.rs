//! Solenoidal fields stored as toroidal/poloidal potentials plus mean flow,
//! and their physical-space reconstruction.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::discretization::Operators;
use crate::error::{Error, Result};
use crate::fft::{grid_to_modes, modes_to_grid, PlaneFft};
use crate::linalg::CVec;
use crate::space::{ChannelSpace, PointTables};
use crate::C64;

/// Modal coefficients of a divergence-free velocity.
///
/// For a mode `η ≠ 0` the vector is `[ψ̂; φ̂]` (Dirichlet then clamped
/// coefficients); for the mean mode it is `[U; V]`. The same layout holds
/// Galerkin right-hand sides `⟨f, b_j⟩`.
#[derive(Debug, Clone, PartialEq)]
pub struct SolenoidalField {
    pub n1: usize,
    pub n2: usize,
    pub p: usize,
    pub coeffs: Vec<CVec>,
}

/// Galerkin projections `⟨f, b_j⟩` in the layout of [`SolenoidalField`].
pub type DualField = SolenoidalField;

/// Parameters of a random smooth field.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RandomSpec {
    pub amplitude: f64,
    /// Per-unit-wavenumber decay `e^{-rate·|k|}`.
    pub mode_decay: f64,
    /// Per-degree decay `e^{-rate·j}` of the potential coefficients.
    pub degree_decay: f64,
}

impl Default for RandomSpec {
    fn default() -> Self {
        Self { amplitude: 1.0, mode_decay: 0.5, degree_decay: 0.4 }
    }
}

impl SolenoidalField {
    pub fn zeros(space: &ChannelSpace) -> Self {
        let r = &space.resolution;
        Self {
            n1: r.n1,
            n2: r.n2,
            p: r.p,
            coeffs: (0..space.modes.len()).map(|i| CVec::zeros(space.nbasis(i))).collect(),
        }
    }

    /// Random field from a seeded ChaCha generator; the mean mode is real.
    pub fn random(space: &ChannelSpace, seed: u64, spec: RandomSpec) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut f = Self::zeros(space);
        let nd = space.n_dirichlet();
        for (mode, c) in space.modes.iter().zip(f.coeffs.iter_mut()) {
            let kmag = ((mode.k1 * mode.k1 + mode.k2 * mode.k2) as f64).sqrt();
            let ms = spec.amplitude * (-spec.mode_decay * kmag).exp();
            for (j, v) in c.iter_mut().enumerate() {
                let deg = if j < nd { j } else { j - nd };
                let s = ms * (-spec.degree_decay * deg as f64).exp();
                let re: f64 = StandardNormal.sample(&mut rng);
                let im: f64 = StandardNormal.sample(&mut rng);
                *v = if mode.is_mean() { C64::new(s * re, 0.0) } else { C64::new(s * re, s * im) };
            }
        }
        f
    }

    pub fn check(&self, space: &ChannelSpace) -> Result<()> {
        let r = &space.resolution;
        if (self.n1, self.n2, self.p) != (r.n1, r.n2, r.p) {
            return Err(Error::ResolutionMismatch(format!(
                "field has N={}x{}, P={}; space has N={}x{}, P={}",
                self.n1, self.n2, self.p, r.n1, r.n2, r.p
            )));
        }
        for (i, c) in self.coeffs.iter().enumerate() {
            if c.len() != space.nbasis(i) {
                return Err(Error::Dimension { expected: space.nbasis(i), got: c.len() });
            }
        }
        Ok(())
    }

    pub fn is_finite(&self) -> bool {
        self.coeffs.iter().all(|c| c.iter().all(|v| v.re.is_finite() && v.im.is_finite()))
    }

    /// Euclidean norm of all coefficients.
    pub fn coeff_norm(&self) -> f64 {
        self.coeffs.iter().map(|c| c.norm_squared()).sum::<f64>().sqrt()
    }

    pub fn scale(&self, s: f64) -> Self {
        self.map2(self, |a, _| a * s)
    }

    pub fn add(&self, other: &Self) -> Self {
        self.map2(other, |a, b| a + b)
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.map2(other, |a, b| a - b)
    }

    /// `self + s·other`.
    pub fn axpy(&self, s: f64, other: &Self) -> Self {
        self.map2(other, |a, b| a + b * s)
    }

    fn map2(&self, other: &Self, f: impl Fn(C64, C64) -> C64) -> Self {
        Self {
            n1: self.n1,
            n2: self.n2,
            p: self.p,
            coeffs: self
                .coeffs
                .iter()
                .zip(&other.coeffs)
                .map(|(a, b)| a.zip_map(b, &f))
                .collect(),
        }
    }
}

/// Physical samples on the padded tangential grid at a set of wall-normal
/// points, indexed `(z, y, x)` per component.
#[derive(Debug, Clone, PartialEq)]
pub struct GriddedVelocity {
    pub mx: usize,
    pub my: usize,
    pub z: Vec<f64>,
    pub u: [Vec<f64>; 3],
    /// Largest imaginary part met before discarding it.
    pub max_imag: f64,
}

impl GriddedVelocity {
    pub fn max_abs(&self) -> f64 {
        self.u.iter().flatten().fold(0.0f64, |m, v| m.max(v.abs()))
    }
}

/// Samples of `u` at the points of `tables`.
pub fn sample_velocity(field: &SolenoidalField, space: &ChannelSpace, tables: &PointTables) -> Result<GriddedVelocity> {
    field.check(space)?;
    let plan = PlaneFft::new(space.resolution.mx, space.resolution.my);
    let jets: Vec<_> = space
        .modes
        .iter()
        .zip(&field.coeffs)
        .map(|(m, c)| tables.jet(m, c.as_slice(), 0))
        .collect();
    let mut comps: [Vec<f64>; 3] = Default::default();
    let mut max_imag = 0.0f64;
    for (c, out) in comps.iter_mut().enumerate() {
        let vals: Vec<Vec<C64>> = jets.iter().map(|j| j.d[0][c].clone()).collect();
        let (g, im) = modes_to_grid(space, &plan, &vals);
        *out = g;
        max_imag = max_imag.max(im);
    }
    Ok(GriddedVelocity {
        mx: space.resolution.mx,
        my: space.resolution.my,
        z: tables.z.clone(),
        u: comps,
        max_imag,
    })
}

/// Samples at the padded grid times the wall-normal quadrature nodes.
pub fn potentials_to_velocity(field: &SolenoidalField, space: &ChannelSpace) -> Result<GriddedVelocity> {
    sample_velocity(field, space, &space.nodes)
}

/// L² projection of gridded samples (at the quadrature nodes) onto the
/// solenoidal basis; inverse of [`potentials_to_velocity`] on the discrete space.
pub fn velocity_to_potentials(grid: &GriddedVelocity, space: &ChannelSpace, ops: &Operators) -> Result<SolenoidalField> {
    let r = &space.resolution;
    if grid.mx != r.mx || grid.my != r.my || grid.z.len() != space.weights.len() {
        return Err(Error::ResolutionMismatch(format!(
            "grid {}x{}x{} does not match {}x{}x{}",
            grid.mx,
            grid.my,
            grid.z.len(),
            r.mx,
            r.my,
            space.weights.len()
        )));
    }
    let plan = PlaneFft::new(r.mx, r.my);
    let nq = grid.z.len();
    let comps: Vec<Vec<Vec<C64>>> = grid.u.iter().map(|u| grid_to_modes(space, &plan, u, nq)).collect();
    let mut out = SolenoidalField::zeros(space);
    for (i, (mode, op)) in space.modes.iter().zip(&ops.modes).enumerate() {
        let f = [comps[0][i].clone(), comps[1][i].clone(), comps[2][i].clone()];
        let rhs = CVec::from_vec(space.nodes.project(mode, &space.weights, &f)).scale(space.area());
        let mut c = op.solve_mass(&rhs);
        if mode.is_mean() {
            c.iter_mut().for_each(|v| v.im = 0.0);
        }
        out.coeffs[i] = c;
    }
    Ok(out)
}

/// Largest pointwise divergence over all modes and quadrature nodes,
/// evaluated spectrally in `x, y` and exactly in `z`.
pub fn max_divergence(field: &SolenoidalField, space: &ChannelSpace) -> f64 {
    let mut m = 0.0f64;
    for (mode, c) in space.modes.iter().zip(&field.coeffs) {
        let jet = space.nodes.jet(mode, c.as_slice(), 1);
        for q in 0..jet.npoints() {
            m = m.max(jet.divergence(q).norm());
        }
    }
    m
}

/// Largest velocity magnitude on the two walls.
pub fn max_wall_velocity(field: &SolenoidalField, space: &ChannelSpace) -> f64 {
    let mut m = 0.0f64;
    for (mode, c) in space.modes.iter().zip(&field.coeffs) {
        let jet = space.walls.jet(mode, c.as_slice(), 0);
        for q in 0..2 {
            for v in jet.value(q) {
                m = m.max(v.norm());
            }
        }
    }
    m
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::discretization::assemble;
    use crate::model::{derive_params, ChannelGeometry, Resolution};

    fn setup() -> (ChannelSpace, Operators) {
        let s = ChannelSpace::new(ChannelGeometry::new(2.0, 3.0, 1.0).unwrap(), Resolution::new(6, 4, 10).unwrap()).unwrap();
        let ops = assemble(&s, &derive_params(0.2, 0.1, 0.0, 0.01).unwrap()).unwrap();
        (s, ops)
    }

    #[test]
    fn zero_field_gives_zero_velocity() {
        let (s, _) = setup();
        let g = potentials_to_velocity(&SolenoidalField::zeros(&s), &s).unwrap();
        assert_eq!(g.max_abs(), 0.0);
    }

    #[test]
    fn round_trip_and_reality() {
        let (s, ops) = setup();
        let f = SolenoidalField::random(&s, 7, RandomSpec::default());
        let g = potentials_to_velocity(&f, &s).unwrap();
        assert!(g.max_imag <= 1e-13 * g.max_abs());
        let back = velocity_to_potentials(&g, &s, &ops).unwrap();
        assert!(back.sub(&f).coeff_norm() <= 1e-12 * f.coeff_norm());
    }

    #[test]
    fn toroidal_mode_is_horizontal() {
        let (s, _) = setup();
        let mut f = SolenoidalField::zeros(&s);
        f.coeffs[3][1] = C64::new(1.0, 0.0);
        let jet = s.nodes.jet(&s.modes[3], f.coeffs[3].as_slice(), 0);
        let eta = s.modes[3].eta;
        for q in 0..jet.npoints() {
            let [u1, u2, u3] = jet.value(q);
            assert_eq!(u3.norm(), 0.0);
            assert!((u1 * eta[0] + u2 * eta[1]).norm() < 1e-14);
        }
    }

    #[test]
    fn random_field_respects_invariants() {
        let (s, _) = setup();
        let f = SolenoidalField::random(&s, 11, RandomSpec::default());
        let g = potentials_to_velocity(&f, &s).unwrap();
        assert!(max_divergence(&f, &s) <= 1e-12 * g.max_abs());
        assert!(max_wall_velocity(&f, &s) <= 1e-12 * g.max_abs());
    }

    #[test]
    fn mismatched_field_is_rejected() {
        let (s, _) = setup();
        let mut f = SolenoidalField::zeros(&s);
        f.p = 12;
        assert!(matches!(potentials_to_velocity(&f, &s), Err(Error::ResolutionMismatch(_))));
    }
}
