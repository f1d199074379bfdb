//! Acceptance suite. Prints one line per criterion and exits nonzero if any
//! criterion fails.

use std::f64::consts::PI;
use std::time::Instant;

use nsab_core::adn::{self, DNSystem, Particular};
use nsab_core::discretization::{assemble, global_form, Operators};
use nsab_core::evolution::{
    dual_pairing, h1_norm, linear_propagator_constant, nonlinear_term, run_evolution, skew_scale, smooth_initial_field,
    uniqueness_probe, vanishing_sweep, EvolutionConfig, Outcome, Scheme,
};
use nsab_core::field::{RandomSpec, SolenoidalField};
use nsab_core::poly::{gq, gq_frac, Poly};
use nsab_core::spectral::{default_gamma0_grid, eigenpairs_a, garding_constants, lambda_sqrt_and_d, Generator};
use nsab_core::stationary::{recover_pressure, smooth_random_forcing, solve_stationary, wall_trace_error, Manufactured};
use nsab_core::space::ChannelSpace;
use nsab_core::{derive_params, ChannelGeometry, Resolution};
use num_traits::Zero;
use rand::{Rng, SeedableRng};

/// Regression baseline for the lowest eigenvalue of `(K_a, M)` at
/// 2π×2π×1, α=0.2, β=0.1, γ=0, ℓ=0.01, N=10², P=32.
const LAMBDA1_BASELINE: f64 = 53.784_541_303_854_75;

struct Verdict {
    pass: bool,
    detail: String,
}

fn verdict(pass: bool, detail: impl Into<String>) -> Verdict {
    Verdict { pass, detail: detail.into() }
}

fn space(n: usize, p: usize) -> ChannelSpace {
    ChannelSpace::new(ChannelGeometry::new(2.0 * PI, 2.0 * PI, 1.0).unwrap(), Resolution::new(n, n, p).unwrap()).unwrap()
}

fn ops(s: &ChannelSpace, alpha: f64, beta: f64, gamma: f64, ell: f64) -> Operators {
    assemble(s, &derive_params(alpha, beta, gamma, ell).unwrap()).unwrap()
}

fn c1_ellipticity() -> Verdict {
    let sys = DNSystem::ns_alpha_beta(0.5).unwrap();
    let det = adn::symbol_determinant(&sys);
    let target = Poly::norm_sq().pow(5);
    let exact = det.to_integer().is_some() && det == target;
    let rep = adn::check_ellipticity(&sys);
    verdict(
        exact && rep.pass,
        format!("det has {} integer terms, equal to |xi|^10: {exact}; report pass={}", det.terms().count(), rep.pass),
    )
}

fn c2_covering() -> Verdict {
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(2);
    let mut etas: Vec<[f64; 2]> = (0..100)
        .map(|k| {
            let th = 2.0 * PI * (k as f64 + 0.5) / 100.0;
            [th.cos(), th.sin()]
        })
        .collect();
    for _ in 0..20 {
        let mag = 10f64.powf(rng.random_range(-3.0..3.0));
        let th: f64 = rng.random_range(0.0..2.0 * PI);
        etas.push([mag * th.cos(), mag * th.sin()]);
    }
    let mut failures = 0;
    let mut worst_angle = 0.0f64;
    let mut min_ratio = f64::INFINITY;
    for &eta in &etas {
        for gamma in [-1.0, 0.0, 0.5] {
            let r = adn::check_covering(eta, gamma).unwrap();
            if !r.pass || r.kernel_dim != 0 {
                failures += 1;
            }
            min_ratio = min_ratio.min(r.sv_ratio);
        }
        let ss = adn::numeric_stable_subspace(eta).unwrap();
        let cf = adn::closed_form_jets(eta, Particular::DivergenceFree).unwrap();
        worst_angle = worst_angle.max(adn::subspace_angle(&ss.jets, &cf));
    }
    verdict(
        failures == 0 && worst_angle <= 1e-8,
        format!("{} wavevectors, {failures} failures, min sv ratio {min_ratio:.3e}, worst angle {worst_angle:.2e} (tol 1e-8)", etas.len()),
    )
}

fn c3_algebra() -> Verdict {
    let mut ok = true;
    for axis in 0..2 {
        for gamma in [gq(0, 0), gq_frac(1, 2), gq(-1, 0)] {
            let alg = adn::covering_algebra(axis, gamma, Particular::Published);
            ok &= alg.dirichlet_a_over_a0[2] == gq_frac(1, 4)
                && alg.dirichlet_a_over_a0[0].is_zero()
                && alg.dirichlet_a_over_a0[1].is_zero();
            ok &= alg.wall_eddy_a0_coeff.iter().all(Zero::is_zero);
            ok &= !alg.b_system_det.is_zero();
            ok &= alg.kernel_dim == 0;
            ok &= !alg.covering_det.is_zero();
        }
    }
    verdict(ok, "a3 = a0/4 on both axes, wall-eddy rows free of a0, b = 0, trivial kernel")
}

fn c4_symmetry() -> Verdict {
    let s = space(8, 24);
    let base = ops(&s, 0.2, 0.1, 0.0, 0.01);
    let mut worst = 0.0f64;
    for gamma in [-1.0, -0.5, 0.0, 0.5, 1.0] {
        for k in [0.0, 5.0] {
            let o = base.with_form(gamma, k);
            for m in &o.modes {
                let d = (&m.k_a - m.k_a.adjoint()).norm() / m.k_a.norm();
                worst = worst.max(d);
            }
        }
    }
    verdict(worst <= 1e-12, format!("max |K - K^H|/|K| = {worst:.2e} (tol 1e-12)"))
}

fn c5_gamma_minus_one() -> Verdict {
    let s = space(8, 16);
    let o = ops(&s, 0.2, 0.1, -1.0, 0.01).with_form(-1.0, 0.0);
    let mut worst = 0.0f64;
    for seed in 0..20 {
        let u = SolenoidalField::random(&s, seed, RandomSpec::default());
        let a = global_form(&o, &u, |m| &m.k_a);
        let lap = global_form(&o, &u, |m| &m.k_lap);
        worst = worst.max((a - lap).abs() / lap);
    }
    verdict(worst <= 1e-12, format!("max |a(u,u) - |lap u|^2| / |lap u|^2 = {worst:.2e} over 20 fields (tol 1e-12)"))
}

fn c6_garding() -> Verdict {
    let grid = default_gamma0_grid();
    let coarse = space(8, 24);
    let fine = space(8, 32);
    let oc = ops(&coarse, 0.2, 0.1, 0.0, 0.01);
    let of = ops(&fine, 0.2, 0.1, 0.0, 0.01);
    let rel = |a: f64, b: f64| if a == b { 0.0 } else { (a - b).abs() / a.abs().max(b.abs()) };
    let mut ok = true;
    let mut worst = 0.0f64;
    let mut shifts = Vec::new();
    for gamma in [-1.0, 0.0, 1.0] {
        for k in [0.0, 1.0, 5.0] {
            let rc = garding_constants(&oc.with_form(gamma, k), &grid).unwrap();
            let rf = garding_constants(&of.with_form(gamma, k), &grid).unwrap();
            match (rc.gamma0_refined, rc.c0, rf.gamma0_refined, rf.c0) {
                (Some(g1), Some(c1), Some(g2), Some(c2)) => {
                    worst = worst.max(rel(g1, g2)).max(rel(c1, c2));
                    shifts.push(g2);
                }
                _ => ok = false,
            }
        }
    }
    ok &= worst <= 0.05;
    let gmax = shifts.iter().cloned().fold(0.0, f64::max);
    verdict(ok, format!("c0 > 0 found for 9 cases, largest gamma0 {gmax:.4}, max P 24->32 change {worst:.2e} (tol 5%)"))
}

fn c7_eigen() -> Verdict {
    let lam = |p: usize| {
        let s = space(10, p);
        let o = ops(&s, 0.2, 0.1, 0.0, 0.01);
        (eigenpairs_a(&o, 20).unwrap(), o)
    };
    let (pairs, o) = lam(32);
    let (coarse, _) = lam(24);
    let sorted = pairs.windows(2).all(|w| w[0].lambda <= w[1].lambda);
    let mut ortho = 0.0f64;
    for a in &pairs {
        for b in &pairs {
            if a.mode_index != b.mode_index {
                continue;
            }
            let m = &o.modes[a.mode_index].m;
            let g = b.vector.dotc(&(m * &a.vector));
            let target = if std::ptr::eq(a, b) { 1.0 } else { 0.0 };
            ortho = ortho.max((g - nsab_core::C64::new(target, 0.0)).norm());
        }
    }
    let gamma0 = garding_constants(&o, &default_gamma0_grid()).unwrap().gamma0_refined.unwrap_or(f64::INFINITY);
    let l1 = pairs[0].lambda;
    let refine = (l1 - coarse[0].lambda).abs() / l1.abs();
    let baseline = (l1 - LAMBDA1_BASELINE).abs() / LAMBDA1_BASELINE;
    verdict(
        sorted && ortho <= 1e-10 && l1 > -gamma0 && refine <= 1e-6 && baseline <= 1e-6,
        format!(
            "lambda1 = {l1:.10}, gamma0 = {gamma0}, orthonormality {ortho:.1e}, P 24->32 change {refine:.1e}, baseline dev {baseline:.1e}"
        ),
    )
}

fn c8_stationary() -> Verdict {
    let params = derive_params(0.2, 0.1, 0.5, 0.01).unwrap();
    let mut h2 = Vec::new();
    let mut pr = Vec::new();
    let mut wall = Vec::new();
    for p in [8, 16, 24, 32] {
        let s = space(4, p);
        let o = assemble(&s, &params).unwrap();
        let man = Manufactured::sample(&s);
        let f = man.forcing(&s, &params);
        let sol = solve_stationary(&f.dual(&s), &o).unwrap();
        h2.push(man.h2_error(&sol.u, &s, 60).1);
        let pressure = recover_pressure(&sol.u, &f, &s, f64::INFINITY).unwrap();
        pr.push(man.pressure_error(&pressure, &s, 60));
        wall.push(wall_trace_error(&sol.u, &man.wall_trace(&s, &params), &s, &params).1);
    }
    // each refinement gains a factor 10 or has reached the plateau
    let converges = |e: &[f64], plateau: f64| e.windows(2).all(|w| w[1] <= w[0] / 10.0 || w[0] <= plateau);
    let ok = converges(&h2, 1e-10)
        && h2.last().unwrap() <= &1e-10
        && converges(&pr, 1e-8)
        && pr.last().unwrap() <= &1e-8
        && converges(&wall, 1e-10)
        && wall.last().unwrap() <= &1e-10;
    let fmt = |e: &[f64]| e.iter().map(|x| format!("{x:.1e}")).collect::<Vec<_>>().join(" ");
    verdict(ok, format!("P=8..32: H2 [{}], pressure [{}], wall-eddy trace [{}]", fmt(&h2), fmt(&pr), fmt(&wall)))
}

fn c9_skew() -> Verdict {
    let s = space(8, 16);
    let params = derive_params(0.2, 0.1, 0.5, 0.01).unwrap();
    let mut worst = 0.0f64;
    for seed in 0..20 {
        let u = SolenoidalField::random(&s, 100 + seed, RandomSpec::default());
        let (n, _) = nonlinear_term(&u, &s, &params).unwrap();
        let scale = skew_scale(&u, &s, &params).unwrap();
        worst = worst.max(dual_pairing(&n, &u, &s).abs() / scale);
    }
    verdict(worst <= 1e-11, format!("max |<B(Lu,u),u>| / (|Lu|_H1 |u|_H1^2) = {worst:.2e} (tol 1e-11)"))
}

fn c10_propagator() -> Verdict {
    let s = space(8, 16);
    let o = ops(&s, 0.2, 0.1, 0.5, 0.01);
    let u0 = smooth_initial_field(&s, &o, 7, 2.0).unwrap();
    let f = smooth_random_forcing(&s, 3, 2, 3).dual(&s);
    let t = 0.2;
    let factors = lambda_sqrt_and_d(&o, &o.params, Generator::WithDiffusion).unwrap();
    let exact = linear_propagator_constant(&u0, t, &f, &factors);
    let scale = h1_norm(&exact, &o);
    let mut orders = Vec::new();
    let mut ok = true;
    for scheme in [Scheme::ImexEuler, Scheme::CnAb2] {
        let errs: Vec<f64> = [1e-2, 5e-3, 2.5e-3]
            .iter()
            .map(|&dt| {
                let cfg = EvolutionConfig {
                    dt,
                    t_final: t,
                    scheme,
                    nonlinear: false,
                    forcing: Some(f.clone()),
                    report_every: usize::MAX,
                    ..Default::default()
                };
                let run = run_evolution(&s, &o, &u0, &cfg).unwrap();
                h1_norm(&run.final_state.field.sub(&exact), &o) / scale
            })
            .collect();
        let target = scheme.order() as f64;
        for w in errs.windows(2) {
            let q = (w[0] / w[1]).log2();
            ok &= (q - target).abs() <= 0.1;
            orders.push(q);
        }
    }
    let o = orders.iter().map(|q| format!("{q:.3}")).collect::<Vec<_>>();
    verdict(ok, format!("orders Euler [{}, {}] CN [{}, {}] (targets 1, 2 +- 0.1)", o[0], o[1], o[2], o[3]))
}

fn c11_energy() -> Verdict {
    let s = space(16, 32);
    let o = ops(&s, 0.2, 0.1, -1.0, 0.01);
    let u0 = smooth_initial_field(&s, &o, 7, 2.0).unwrap();
    let run = |dt: f64| {
        let cfg = EvolutionConfig {
            dt,
            t_final: 10.0,
            scheme: Scheme::ImexEuler,
            report_every: (0.1 / dt).round() as usize,
            ..Default::default()
        };
        run_evolution(&s, &o, &u0, &cfg).unwrap()
    };
    let (dt_c, dt_f) = (0.02, 0.01);
    let (rc, rf) = (run(dt_c), run(dt_f));
    let mut ok = rc.outcome == Outcome::Completed && rf.outcome == Outcome::Completed;
    let mut c_fit = 0.0f64;
    let mut ratio_range = (f64::INFINITY, 0.0f64);
    let mut bound_ok = true;
    for (a, b) in rc.reports.iter().zip(&rf.reports).skip(1) {
        ok &= (a.t - b.t).abs() < 1e-9;
        let (ea, eb) = (a.de_balance / a.e_lambda, b.de_balance / b.e_lambda);
        c_fit = c_fit.max(ea / dt_c);
        let r = ea / eb;
        ratio_range = (ratio_range.0.min(r), ratio_range.1.max(r));
    }
    for b in rf.reports.iter().skip(1) {
        bound_ok &= b.de_balance / b.e_lambda <= c_fit * dt_f;
    }
    let monotone = |r: &[nsab_core::evolution::EnergyReport]| r.windows(2).all(|w| w[1].e_lambda <= w[0].e_lambda);
    ok &= bound_ok && monotone(&rc.reports) && monotone(&rf.reports);
    ok &= ratio_range.0 >= 1.6 && ratio_range.1 <= 2.4;
    verdict(
        ok,
        format!(
            "residual/E <= {c_fit:.3} dt, coarse/fine ratio in [{:.3}, {:.3}] (target 2 +- 20%), E_Lambda monotone, {} reports",
            ratio_range.0,
            ratio_range.1,
            rc.reports.len()
        ),
    )
}

fn forced_setup() -> (ChannelSpace, Operators, SolenoidalField, SolenoidalField) {
    let s = space(8, 16);
    let o = ops(&s, 0.2, 0.1, 0.5, 0.01);
    let u0 = smooth_initial_field(&s, &o, 7, 2.0).unwrap();
    let f = smooth_random_forcing(&s, 11, 1, 3).dual(&s).scale(20.0);
    (s, o, u0, f)
}

fn c12_long_run() -> Verdict {
    let (s, o, u0, f) = forced_setup();
    let cfg = EvolutionConfig { dt: 1e-2, t_final: 50.0, scheme: Scheme::CnAb2, report_every: 10, forcing: Some(f), ..Default::default() };
    let run = run_evolution(&s, &o, &u0, &cfg).unwrap();
    let half = 25.0;
    let early = run.reports.iter().filter(|r| r.t <= half).map(|r| r.h3).fold(0.0, f64::max);
    let late = run.reports.iter().filter(|r| r.t > half).map(|r| r.h3).fold(0.0, f64::max);
    let ok = run.outcome == Outcome::Completed && late <= 3.0 * early && late.is_finite();
    verdict(ok, format!("T=50: max H3 first half {early:.3}, second half {late:.3} (bound 3x), outcome {:?}", run.outcome))
}

fn c13_uniqueness() -> Verdict {
    let (s, o, u0, f) = forced_setup();
    let dir = smooth_initial_field(&s, &o, 13, 1.0).unwrap();
    let cfg = EvolutionConfig { dt: 1e-2, t_final: 1.0, scheme: Scheme::CnAb2, forcing: Some(f), ..Default::default() };
    let big = uniqueness_probe(&s, &o, &u0, &dir, 1e-6, &cfg).unwrap();
    let small = uniqueness_probe(&s, &o, &u0, &dir, 1e-8, &cfg).unwrap();
    let agree = (big.growth - small.growth).abs() / big.growth;
    let rate = big.max_rate;
    let envelope = small.series.iter().skip(1).all(|&(_, g, int)| g.ln() <= rate * int + 0.01);
    verdict(
        agree <= 0.01 && envelope,
        format!("growth {:.4e} vs {:.4e} (rel diff {agree:.1e}, tol 1%), Gronwall rate {rate:.3}, envelope held: {envelope}", big.growth, small.growth),
    )
}

fn c14_sweep() -> Verdict {
    let s = space(8, 16);
    let o = ops(&s, 0.2, 0.1, 0.5, 0.01);
    let u0 = smooth_initial_field(&s, &o, 7, 2.0).unwrap();
    let pairs: Vec<(f64, f64)> = (0..6).map(|n| (0.2 / 2f64.powi(n), 0.1 / 2f64.powi(n))).collect();
    let cfg = EvolutionConfig { dt: 1e-2, t_final: 1.0, scheme: Scheme::ImexEuler, ..Default::default() };
    let rows = vanishing_sweep(&s, &o, &pairs, &u0, &cfg).unwrap();
    let l2_0 = global_form(&o, &u0, |m| &m.m);
    let grad_0 = global_form(&o, &u0, |m| &m.k_grad);
    let bound = l2_0 + 0.2 * 0.2 * grad_0;
    let mut ok = true;
    for r in &rows {
        ok &= r.outcome == Outcome::Completed;
        ok &= r.sup_l2 * r.sup_l2 <= bound * (1.0 + 1e-9);
        ok &= r.int_h1_sq <= bound * (cfg.t_final + 1.0);
    }
    let sup = rows.iter().map(|r| r.sup_l2).fold(0.0, f64::max);
    let int = rows.iter().map(|r| r.int_h1_sq).fold(0.0, f64::max);
    verdict(
        ok,
        format!("6 pairs: max sup|u| {sup:.4} (bound {:.4}), max int |u|_H1^2 {int:.4} (bound {:.4})", bound.sqrt(), bound * 2.0),
    )
}

type Criterion = (&'static str, fn() -> Verdict);

fn main() {
    let criteria: [Criterion; 14] = [
        ("ellipticity", c1_ellipticity),
        ("covering", c2_covering),
        ("covering algebra", c3_algebra),
        ("form symmetry", c4_symmetry),
        ("gamma=-1 identity", c5_gamma_minus_one),
        ("garding", c6_garding),
        ("eigen-structure", c7_eigen),
        ("stationary convergence", c8_stationary),
        ("skew-symmetry", c9_skew),
        ("propagator oracle", c10_propagator),
        ("energy balance", c11_energy),
        ("global boundedness", c12_long_run),
        ("uniqueness probe", c13_uniqueness),
        ("vanishing sweep", c14_sweep),
    ];
    let only: Option<usize> = std::env::var("NSAB_CRITERION").ok().and_then(|v| v.parse().ok());
    let mut failed = 0;
    for (i, (name, run)) in criteria.iter().enumerate() {
        if only.is_some_and(|k| k != i + 1) {
            continue;
        }
        let start = Instant::now();
        let v = run();
        let tag = if v.pass { "PASS" } else { "FAIL" };
        println!("criterion {:>2} {tag} {name} [{:.1}s]: {}", i + 1, start.elapsed().as_secs_f64(), v.detail);
        if !v.pass {
            failed += 1;
        }
    }
    println!("acceptance: {} failed", failed);
    if failed > 0 {
        std::process::exit(1);
    }
}

