//! Time integration of `∂t Λu + β²Au − Δu + B(Λu, u) = f`, an exact linear
//! propagator, energy monitors and the multi-run experiments built on them.

use nalgebra::{Dyn, LU};
use rayon::prelude::*;
use serde::Serialize;

use crate::discretization::{Operators, ModeOperators};
use crate::error::{Error, Result};
use crate::fft::{grid_to_modes, modes_to_grid, PlaneFft};
use crate::field::{DualField, SolenoidalField};
use crate::legendre::gauss_legendre;
use crate::linalg::{CMat, CVec};
use crate::model::{ModelParams, Resolution};
use crate::space::ChannelSpace;
use crate::spectral::SpectralFactors;
use crate::C64;

/// Checks the padding needed for exact triple products.
pub fn check_padding(r: &Resolution) -> Result<()> {
    let q = Resolution::min_quadrature(r.p);
    if !r.is_padded() || r.q < q {
        return Err(Error::Padding {
            required_x: 2 * r.n1,
            required_y: 2 * r.n2,
            required_q: q,
            have_x: r.mx,
            have_y: r.my,
            have_q: r.q,
        });
    }
    Ok(())
}

/// Galerkin projection of `B(v, u) = (∇v)u + (∇u)ᵀv` with the filtered
/// velocity `v = u − α²Δu`, and the largest grid speed.
///
/// `B(v + ∇q, u) − B(v, u) = ∇(u·∇q)` is a gradient, so using the unprojected
/// filtered velocity gives the same projection as `Λu`.
pub fn nonlinear_term(u: &SolenoidalField, space: &ChannelSpace, params: &ModelParams) -> Result<(DualField, f64)> {
    check_padding(&space.resolution)?;
    u.check(space)?;
    let plan = PlaneFft::new(space.resolution.mx, space.resolution.my);
    let a2 = params.alpha * params.alpha;
    let nq = space.nodes.npoints();
    // per mode: [u(3), ∂_j u_i (9), v(3), ∂_j v_i (9)]
    let per_mode: Vec<Vec<Vec<C64>>> = space
        .modes
        .par_iter()
        .zip(u.coeffs.par_iter())
        .map(|(mode, c)| {
            let jet = space.nodes.jet(mode, c.as_slice(), 3);
            let mut out = vec![vec![C64::new(0.0, 0.0); nq]; 24];
            for q in 0..nq {
                let val = jet.value(q);
                let g = jet.grad(q);
                let lap = jet.laplacian(q);
                let gl = jet.grad_laplacian(q);
                for i in 0..3 {
                    out[i][q] = val[i];
                    out[12 + i][q] = val[i] - lap[i] * a2;
                    for j in 0..3 {
                        out[3 + 3 * i + j][q] = g[i][j];
                        out[15 + 3 * i + j][q] = g[i][j] - gl[i][j] * a2;
                    }
                }
            }
            out
        })
        .collect();
    let grids: Vec<Vec<f64>> = (0..24)
        .into_par_iter()
        .map(|f| {
            let vals: Vec<Vec<C64>> = per_mode.iter().map(|m| m[f].clone()).collect();
            modes_to_grid(space, &plan, &vals).0
        })
        .collect();
    let npts = grids[0].len();
    let mut prod: [Vec<f64>; 3] = std::array::from_fn(|_| vec![0.0; npts]);
    let mut max_speed = 0.0f64;
    for p in 0..npts {
        let uu = [grids[0][p], grids[1][p], grids[2][p]];
        let vv = [grids[12][p], grids[13][p], grids[14][p]];
        max_speed = max_speed.max((uu[0] * uu[0] + uu[1] * uu[1] + uu[2] * uu[2]).sqrt());
        for (i, out) in prod.iter_mut().enumerate() {
            let mut s = 0.0;
            for j in 0..3 {
                s += grids[15 + 3 * i + j][p] * uu[j] + grids[3 + 3 * j + i][p] * vv[j];
            }
            out[p] = s;
        }
    }
    let spec: Vec<Vec<Vec<C64>>> = prod.par_iter().map(|g| grid_to_modes(space, &plan, g, nq)).collect();
    let mut out = SolenoidalField::zeros(space);
    for (idx, mode) in space.modes.iter().enumerate() {
        let f = [spec[0][idx].clone(), spec[1][idx].clone(), spec[2][idx].clone()];
        let mut c = CVec::from_vec(space.nodes.project(mode, &space.weights, &f)).scale(space.area());
        if mode.is_mean() {
            c.iter_mut().for_each(|v| v.im = 0.0);
        }
        out.coeffs[idx] = c;
    }
    Ok((out, max_speed))
}

/// `‖Λu‖_{H¹} ‖u‖²_{H¹}`, the natural size of `⟨B(Λu, u), u⟩`, with
/// `Λu` taken as `u − α²Δu` at the quadrature nodes.
pub fn skew_scale(u: &SolenoidalField, space: &ChannelSpace, params: &ModelParams) -> Result<f64> {
    u.check(space)?;
    let a2 = params.alpha * params.alpha;
    let w = &space.weights;
    let (sv, su) = space
        .modes
        .par_iter()
        .zip(u.coeffs.par_iter())
        .map(|(mode, c)| {
            let jet = space.nodes.jet(mode, c.as_slice(), 3);
            let (mut sv, mut su) = (0.0, 0.0);
            for q in 0..jet.npoints() {
                let (val, g, lap, gl) = (jet.value(q), jet.grad(q), jet.laplacian(q), jet.grad_laplacian(q));
                for i in 0..3 {
                    su += w[q] * val[i].norm_sqr();
                    sv += w[q] * (val[i] - lap[i] * a2).norm_sqr();
                    for j in 0..3 {
                        su += w[q] * g[i][j].norm_sqr();
                        sv += w[q] * (g[i][j] - gl[i][j] * a2).norm_sqr();
                    }
                }
            }
            (mode.weight * sv, mode.weight * su)
        })
        .reduce(|| (0.0, 0.0), |a, b| (a.0 + b.0, a.1 + b.1));
    let area = space.area();
    Ok((area * sv).sqrt() * area * su)
}

/// Global pairing `⟨F, u⟩ = Σ weight · Re(ûᴴ F̂)` of a dual vector with a field.
pub fn dual_pairing(f: &DualField, u: &SolenoidalField, space: &ChannelSpace) -> f64 {
    space
        .modes
        .iter()
        .zip(f.coeffs.iter().zip(&u.coeffs))
        .map(|(m, (a, b))| m.weight * b.dotc(a).re)
        .sum()
}

/// Solution of `M_Λ ċ = −K c + f̂(t)` through the spectral factors, with the
/// Duhamel integral evaluated by composite Gauss–Legendre quadrature on
/// `nsub` subintervals.
pub fn linear_propagator_exact(
    u0: &SolenoidalField,
    t: f64,
    forcing: Option<&(dyn Fn(f64) -> DualField + Sync)>,
    factors: &SpectralFactors,
    nsub: usize,
) -> SolenoidalField {
    if t == 0.0 {
        return u0.clone();
    }
    let (gx, gw) = gauss_legendre(8);
    let mut out = u0.clone();
    let samples: Vec<(f64, f64, DualField)> = match forcing {
        Some(f) if t > 0.0 => {
            let h = t / nsub.max(1) as f64;
            (0..nsub.max(1))
                .flat_map(|s| {
                    let a = s as f64 * h;
                    gx.iter().zip(&gw).map(move |(x, w)| (a + 0.5 * h * (x + 1.0), 0.5 * h * w)).collect::<Vec<_>>()
                })
                .map(|(tau, w)| (tau, w, f(tau)))
                .collect()
        }
        _ => Vec::new(),
    };
    out.coeffs = factors
        .modes
        .par_iter()
        .enumerate()
        .map(|(i, mf)| {
            let mut y = mf.semigroup(t, &mf.half_weighted(&u0.coeffs[i]));
            for (tau, w, f) in &samples {
                y += mf.semigroup(t - tau, &mf.weighted_rhs(&f.coeffs[i])).scale(*w);
            }
            mf.from_half_weighted(&y)
        })
        .collect();
    out
}

/// Exact solution for a forcing constant in time, using
/// `∫₀ᵗ e^{−(t−τ)μ} dτ = (1 − e^{−μt}) / μ`.
pub fn linear_propagator_constant(u0: &SolenoidalField, t: f64, f: &DualField, factors: &SpectralFactors) -> SolenoidalField {
    if t == 0.0 {
        return u0.clone();
    }
    let mut out = u0.clone();
    out.coeffs = factors
        .modes
        .par_iter()
        .enumerate()
        .map(|(i, mf)| {
            let y0 = mf.semigroup(t, &mf.half_weighted(&u0.coeffs[i]));
            let g = mf.z.adjoint() * mf.weighted_rhs(&f.coeffs[i]);
            let mut c = g;
            for (ci, &m) in c.iter_mut().zip(&mf.mu) {
                let phi = if (m * t).abs() < 1e-8 { t * (1.0 - 0.5 * m * t) } else { -(-m * t).exp_m1() / m };
                *ci *= phi;
            }
            mf.from_half_weighted(&(y0 + &mf.z * c))
        })
        .collect();
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, serde::Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Scheme {
    /// Backward Euler on the linear part, forward Euler on `B`.
    ImexEuler,
    /// Crank–Nicolson on the linear part, Adams–Bashforth 2 on `B`.
    CnAb2,
}

impl Scheme {
    pub fn order(self) -> usize {
        match self {
            Scheme::ImexEuler => 1,
            Scheme::CnAb2 => 2,
        }
    }
}

/// Prefactored per-mode systems for a fixed step size.
pub struct Stepper {
    pub scheme: Scheme,
    pub dt: f64,
    lhs: Vec<LU<C64, Dyn, Dyn>>,
    rhs: Vec<CMat>,
}

impl Stepper {
    pub fn new(ops: &Operators, scheme: Scheme, dt: f64) -> Result<Self> {
        if !(dt > 0.0 && dt.is_finite()) {
            return Err(Error::Invalid(format!("time step must be positive, got {dt}")));
        }
        let b2 = ops.params.beta * ops.params.beta;
        let parts: Vec<(LU<C64, Dyn, Dyn>, CMat)> = ops
            .modes
            .par_iter()
            .map(|op: &ModeOperators| {
                let l = op.k_a.scale(b2) + &op.k_grad;
                let (a, r) = match scheme {
                    Scheme::ImexEuler => (&op.m_lambda + l.scale(dt), op.m_lambda.clone()),
                    Scheme::CnAb2 => (&op.m_lambda + l.scale(0.5 * dt), &op.m_lambda - l.scale(0.5 * dt)),
                };
                (a.lu(), r)
            })
            .collect();
        let (lhs, rhs) = parts.into_iter().unzip();
        Ok(Self { scheme, dt, lhs, rhs })
    }
}

/// Trajectory state; `history` holds the previous nonlinear term.
#[derive(Debug, Clone)]
pub struct EvolutionState {
    pub time: f64,
    pub field: SolenoidalField,
    pub history: Option<DualField>,
}

impl EvolutionState {
    pub fn new(u0: SolenoidalField) -> Self {
        Self { time: 0.0, field: u0, history: None }
    }
}

/// What the explicit part sees.
#[derive(Clone, Copy)]
pub struct Explicit<'a> {
    /// Evaluate `B(Λu, u)`; when false the nonlinearity is frozen to zero.
    pub nonlinear: bool,
    /// Body force, constant in time.
    pub forcing: Option<&'a DualField>,
}

/// One IMEX step. Returns the new state and the largest grid speed seen
/// by the nonlinear evaluation (0 when frozen).
pub fn step_imex(
    state: &EvolutionState,
    stepper: &Stepper,
    space: &ChannelSpace,
    params: &ModelParams,
    explicit: Explicit<'_>,
) -> Result<(EvolutionState, f64)> {
    let dt = stepper.dt;
    let (n, speed) = if explicit.nonlinear {
        nonlinear_term(&state.field, space, params)?
    } else {
        (SolenoidalField::zeros(space), 0.0)
    };
    let prev = state.history.as_ref().unwrap_or(&n);
    let coeffs = (0..space.modes.len())
        .into_par_iter()
        .map(|i| {
            let mut r = &stepper.rhs[i] * &state.field.coeffs[i];
            match stepper.scheme {
                Scheme::ImexEuler => r -= n.coeffs[i].scale(dt),
                Scheme::CnAb2 => r -= (n.coeffs[i].scale(1.5) - prev.coeffs[i].scale(0.5)).scale(dt),
            }
            if let Some(f) = explicit.forcing {
                r += f.coeffs[i].scale(dt);
            }
            stepper.lhs[i].solve(&r).ok_or(Error::LinearSolve { mode: i })
        })
        .collect::<Result<Vec<_>>>()?;
    let mut field = state.field.clone();
    field.coeffs = coeffs;
    for (m, c) in space.modes.iter().zip(field.coeffs.iter_mut()) {
        if m.is_mean() {
            c.iter_mut().for_each(|v| v.im = 0.0);
        }
    }
    Ok((EvolutionState { time: state.time + dt, field, history: Some(n) }, speed))
}

/// Energy quantities of one state.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EnergyReport {
    pub t: f64,
    #[serde(rename = "E_Lambda")]
    pub e_lambda: f64,
    pub a_uu: f64,
    pub grad_sq: f64,
    #[serde(rename = "H1")]
    pub h1: f64,
    #[serde(rename = "H3")]
    pub h3: f64,
    #[serde(rename = "H5")]
    pub h5: f64,
    /// `‖Ãu‖`, the blow-up watchdog quantity.
    #[serde(rename = "H4")]
    pub h4: f64,
    #[serde(rename = "dE_balance")]
    pub de_balance: f64,
}

/// Definitions of the reported norms, echoed in run metadata.
pub const NORM_DEFINITIONS: [(&str, &str); 6] = [
    ("E_Lambda", "0.5 <Lambda u, u> = 0.5 (|u|^2 + alpha^2 |grad u|^2)"),
    ("H1", "sqrt(|u|^2 + |grad u|^2)"),
    ("H3", "sqrt|<Lambda u, A~ u>| with A~ = A + gamma0"),
    ("H4", "|A~ u| (watchdog)"),
    ("H5", "sqrt|<Lambda u, A~^2 u>|"),
    ("dE_balance", "|(E_Lambda(t) - E_Lambda(t - dt))/dt + beta^2 a(u,u) + |grad u|^2| at t"),
];

/// Norm evaluator with the shift `γ₀` of `Ã = A + γ₀`.
pub struct EnergyMonitor {
    pub gamma0: f64,
}

impl EnergyMonitor {
    pub fn report(&self, t: f64, u: &SolenoidalField, ops: &Operators, previous: Option<(f64, f64)>) -> EnergyReport {
        let parts: Vec<[f64; 7]> = ops
            .modes
            .par_iter()
            .zip(u.coeffs.par_iter())
            .map(|(op, c)| {
                let w = op.mode.weight;
                let mc = &op.m * c;
                let ml = &op.m_lambda * c;
                let kc = &op.k_a * c + mc.scale(self.gamma0);
                let x = op.solve_mass(&kc);
                let kx = &op.k_a * &x + (&op.m * &x).scale(self.gamma0);
                let x2 = op.solve_mass(&kx);
                [
                    w * c.dotc(&mc).re,
                    w * c.dotc(&ml).re,
                    w * c.dotc(&(&op.k_a * c)).re,
                    w * c.dotc(&(&op.k_grad * c)).re,
                    w * ml.dotc(&x).re,
                    w * x.dotc(&kx).re,
                    w * ml.dotc(&x2).re,
                ]
            })
            .collect();
        let s: Vec<f64> = (0..7).map(|k| parts.iter().map(|p| p[k]).sum()).collect();
        let b2 = ops.params.beta * ops.params.beta;
        let e = 0.5 * s[1];
        let de = match previous {
            Some((e_prev, dt)) => ((e - e_prev) / dt + b2 * s[2] + s[3]).abs(),
            None => 0.0,
        };
        EnergyReport {
            t,
            e_lambda: e,
            a_uu: s[2],
            grad_sq: s[3],
            h1: (s[0] + s[3]).sqrt(),
            h3: s[4].abs().sqrt(),
            h4: s[5].abs().sqrt(),
            h5: s[6].abs().sqrt(),
            de_balance: de,
        }
    }
}

/// Shift making `K_a + γ₀M` positive semidefinite: `max(0, −λ_min)`.
pub fn spectral_shift(ops: &Operators) -> Result<f64> {
    let mins = ops
        .modes
        .par_iter()
        .map(|op| Ok(crate::linalg::gen_eigh(&op.k_a, &op.m)?.values[0]))
        .collect::<Result<Vec<f64>>>()?;
    Ok(mins.into_iter().fold(0.0f64, |m, l| m.max(-l)))
}

#[derive(Debug, Clone)]
pub struct EvolutionConfig {
    pub dt: f64,
    pub t_final: f64,
    pub scheme: Scheme,
    /// Steps between energy reports.
    pub report_every: usize,
    /// Steps between snapshots (none if `None`).
    pub snapshot_every: Option<usize>,
    pub nonlinear: bool,
    pub forcing: Option<DualField>,
    /// Watchdog ceiling as a multiple of the initial H4 proxy.
    pub watchdog_factor: f64,
    /// Shift of `Ã`; computed from the spectrum when `None`.
    pub gamma0: Option<f64>,
    /// Poison the state with NaN after this many steps.
    pub inject_nan_at: Option<usize>,
}

impl Default for EvolutionConfig {
    fn default() -> Self {
        Self {
            dt: 1e-2,
            t_final: 1.0,
            scheme: Scheme::CnAb2,
            report_every: 1,
            snapshot_every: None,
            nonlinear: true,
            forcing: None,
            watchdog_factor: 1e6,
            gamma0: None,
            inject_nan_at: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum Outcome {
    Completed,
    /// Blow-up suspected: H4 proxy above the ceiling or non-finite state.
    Watchdog { time: f64, step: usize, h4: f64, ceiling: f64, reason: String },
}

#[derive(Debug, Clone)]
pub struct EvolutionRun {
    pub reports: Vec<EnergyReport>,
    pub snapshots: Vec<(f64, SolenoidalField)>,
    pub outcome: Outcome,
    pub final_state: EvolutionState,
    pub gamma0: f64,
    /// Largest advisory CFL number `max|u| dt / min(Δx, Δy)`.
    pub max_cfl: f64,
    pub steps: usize,
}

/// Integrates from `u0` to `t_final` (or until the watchdog fires).
pub fn run_evolution(space: &ChannelSpace, ops: &Operators, u0: &SolenoidalField, cfg: &EvolutionConfig) -> Result<EvolutionRun> {
    u0.check(space)?;
    if cfg.nonlinear {
        check_padding(&space.resolution)?;
    }
    let stepper = Stepper::new(ops, cfg.scheme, cfg.dt)?;
    let gamma0 = match cfg.gamma0 {
        Some(g) => g,
        None => spectral_shift(ops)?,
    };
    let monitor = EnergyMonitor { gamma0 };
    let steps = (cfg.t_final / cfg.dt).round() as usize;
    let dx = (space.geometry.l1 / space.resolution.mx as f64).min(space.geometry.l2 / space.resolution.my as f64);
    let mut state = EvolutionState::new(u0.clone());
    let first = monitor.report(0.0, &state.field, ops, None);
    let ceiling = cfg.watchdog_factor * first.h4.max(f64::MIN_POSITIVE);
    let mut reports = vec![first];
    let mut snapshots = Vec::new();
    if cfg.snapshot_every.is_some() {
        snapshots.push((0.0, state.field.clone()));
    }
    let mut e_prev = first.e_lambda;
    let mut max_cfl = 0.0f64;
    let mut outcome = Outcome::Completed;
    let explicit = Explicit { nonlinear: cfg.nonlinear, forcing: cfg.forcing.as_ref() };
    for n in 1..=steps {
        let (mut next, speed) = step_imex(&state, &stepper, space, &ops.params, explicit)?;
        if cfg.inject_nan_at == Some(n) {
            next.field.coeffs[0][0] = C64::new(f64::NAN, 0.0);
        }
        max_cfl = max_cfl.max(speed * cfg.dt / dx);
        let rep = monitor.report(next.time, &next.field, ops, Some((e_prev, cfg.dt)));
        e_prev = rep.e_lambda;
        let finite = next.field.is_finite() && rep.h4.is_finite();
        if !finite || rep.h4 > ceiling {
            reports.push(rep);
            outcome = Outcome::Watchdog {
                time: next.time,
                step: n,
                h4: rep.h4,
                ceiling,
                reason: if finite { "H4 proxy above ceiling".into() } else { "non-finite state".into() },
            };
            state = next;
            return Ok(EvolutionRun { reports, snapshots, outcome, final_state: state, gamma0, max_cfl, steps: n });
        }
        if n % cfg.report_every.max(1) == 0 || n == steps {
            reports.push(rep);
        }
        if let Some(k) = cfg.snapshot_every {
            if n % k.max(1) == 0 || n == steps {
                snapshots.push((next.time, next.field.clone()));
            }
        }
        state = next;
    }
    Ok(EvolutionRun { reports, snapshots, outcome, final_state: state, gamma0, max_cfl, steps })
}

#[derive(Debug, Clone, Serialize)]
pub struct UniquenessReport {
    pub delta: f64,
    /// `‖w(T)‖_{H¹} / ‖w(0)‖_{H¹}` with `w` the difference of the two runs.
    pub growth: f64,
    /// `(t, growth(t), ∫₀ᵗ H3(u) dτ)` at every step.
    pub series: Vec<(f64, f64, f64)>,
    /// `sup_t log(growth(t)) / ∫₀ᵗ H3`.
    pub max_rate: f64,
}

/// `(‖u‖² + ‖∇u‖²)^{1/2}`.
pub fn h1_norm(u: &SolenoidalField, ops: &Operators) -> f64 {
    ops.modes
        .iter()
        .zip(&u.coeffs)
        .map(|(op, c)| op.mode.weight * c.dotc(&((&op.m + &op.k_grad) * c)).re)
        .sum::<f64>()
        .sqrt()
}

/// Runs `u0` and `u0 + δ·direction` side by side and reports the H¹ growth
/// of their difference. With `δ = 0` the two runs coincide and the growth
/// is 1 by definition.
pub fn uniqueness_probe(
    space: &ChannelSpace,
    ops: &Operators,
    u0: &SolenoidalField,
    direction: &SolenoidalField,
    delta: f64,
    cfg: &EvolutionConfig,
) -> Result<UniquenessReport> {
    let stepper = Stepper::new(ops, cfg.scheme, cfg.dt)?;
    let gamma0 = match cfg.gamma0 {
        Some(g) => g,
        None => spectral_shift(ops)?,
    };
    let monitor = EnergyMonitor { gamma0 };
    let explicit = Explicit { nonlinear: cfg.nonlinear, forcing: cfg.forcing.as_ref() };
    let mut a = EvolutionState::new(u0.clone());
    let mut b = EvolutionState::new(u0.axpy(delta, direction));
    let w0 = h1_norm(&b.field.sub(&a.field), ops);
    let steps = (cfg.t_final / cfg.dt).round() as usize;
    let mut integral = 0.0;
    let mut h3_prev = monitor.report(0.0, &a.field, ops, None).h3;
    let mut series = vec![(0.0, 1.0, 0.0)];
    let mut max_rate = f64::NEG_INFINITY;
    for _ in 0..steps {
        a = step_imex(&a, &stepper, space, &ops.params, explicit)?.0;
        b = step_imex(&b, &stepper, space, &ops.params, explicit)?.0;
        let h3 = monitor.report(a.time, &a.field, ops, None).h3;
        integral += 0.5 * cfg.dt * (h3 + h3_prev);
        h3_prev = h3;
        let growth = if w0 == 0.0 {
            if a.field == b.field {
                1.0
            } else {
                f64::INFINITY
            }
        } else {
            h1_norm(&b.field.sub(&a.field), ops) / w0
        };
        if integral > 0.0 {
            max_rate = max_rate.max(growth.ln() / integral);
        }
        series.push((a.time, growth, integral));
    }
    let growth = series.last().map_or(1.0, |s| s.1);
    Ok(UniquenessReport { delta, growth, series, max_rate })
}

#[derive(Debug, Clone, Serialize)]
pub struct SweepRow {
    pub alpha: f64,
    pub beta: f64,
    pub ell: f64,
    pub sup_l2: f64,
    /// `∫ ‖u‖²_{H¹} dt`.
    pub int_h1_sq: f64,
    /// `α sup_t ‖∇u‖`.
    pub alpha_grad_sup: f64,
    /// `β² ∫ ‖u‖²_{H²} dt`.
    pub beta_h2_int: f64,
    pub l2_nonincreasing: bool,
    pub e_lambda_nonincreasing: bool,
    pub outcome: Outcome,
}

/// Runs the evolution for each `(α, β)` with `k` held fixed
/// (`ℓ = k β²`) and tabulates energy bounds.
pub fn vanishing_sweep(
    space: &ChannelSpace,
    ops: &Operators,
    pairs: &[(f64, f64)],
    u0: &SolenoidalField,
    cfg: &EvolutionConfig,
) -> Result<Vec<SweepRow>> {
    let base = ops.params;
    let mut rows = Vec::with_capacity(pairs.len());
    for &(alpha, beta) in pairs {
        let params = crate::model::derive_params(alpha, beta, base.gamma, base.k * beta * beta)?;
        let o = ops.reparametrize(&params);
        let run = run_evolution(space, &o, u0, &EvolutionConfig { report_every: 1, snapshot_every: None, ..cfg.clone() })?;
        let mut sup_l2 = 0.0f64;
        let mut grad_sup = 0.0f64;
        let mut int_h1 = 0.0;
        let mut int_h2 = 0.0;
        let mut l2_prev = f64::INFINITY;
        let mut e_prev = f64::INFINITY;
        let mut l2_mono = true;
        let mut e_mono = true;
        let h2_of = |r: &EnergyReport| -> f64 {
            // ‖u‖²_{H²} proxy from the reported forms: ‖u‖² + ‖∇u‖² + a(u,u) with γ₀ shift
            (r.h1 * r.h1 + r.a_uu + run.gamma0 * (r.h1 * r.h1 - r.grad_sq)).max(0.0)
        };
        for (i, r) in run.reports.iter().enumerate() {
            let l2 = (r.h1 * r.h1 - r.grad_sq).max(0.0).sqrt();
            sup_l2 = sup_l2.max(l2);
            grad_sup = grad_sup.max(r.grad_sq.sqrt());
            if l2 > l2_prev * (1.0 + 1e-12) {
                l2_mono = false;
            }
            if r.e_lambda > e_prev * (1.0 + 1e-12) {
                e_mono = false;
            }
            l2_prev = l2;
            e_prev = r.e_lambda;
            if i > 0 {
                let p = &run.reports[i - 1];
                let dt = r.t - p.t;
                int_h1 += 0.5 * dt * (r.h1 * r.h1 + p.h1 * p.h1);
                int_h2 += 0.5 * dt * (h2_of(r) + h2_of(p));
            }
        }
        rows.push(SweepRow {
            alpha,
            beta,
            ell: params.ell,
            sup_l2,
            int_h1_sq: int_h1,
            alpha_grad_sup: alpha * grad_sup,
            beta_h2_int: beta * beta * int_h2,
            l2_nonincreasing: l2_mono,
            e_lambda_nonincreasing: e_mono,
            outcome: run.outcome,
        });
    }
    Ok(rows)
}

/// Smooth field `(A + 1)⁻² f` for a low-mode polynomial forcing, scaled to
/// the H¹ norm `h1`.
pub fn smooth_initial_field(space: &ChannelSpace, ops: &Operators, seed: u64, h1: f64) -> Result<SolenoidalField> {
    let f = crate::stationary::smooth_random_forcing(space, seed, 2, 4).dual(space);
    let mut u = SolenoidalField::zeros(space);
    for (i, op) in ops.modes.iter().enumerate() {
        let lu = (&op.k_a + &op.m).lu();
        let once = lu.solve(&f.coeffs[i]).ok_or(Error::LinearSolve { mode: i })?;
        u.coeffs[i] = lu.solve(&(&op.m * once)).ok_or(Error::LinearSolve { mode: i })?;
        if op.mode.is_mean() {
            u.coeffs[i].iter_mut().for_each(|v| v.im = 0.0);
        }
    }
    let n = h1_norm(&u, ops);
    if n == 0.0 {
        return Ok(u);
    }
    Ok(u.scale(h1 / n))
}
