use std::f64::consts::PI;

use nsab_core::discretization::{assemble, global_form, global_pair, Operators};
use nsab_core::field::{RandomSpec, SolenoidalField};
use nsab_core::legendre::plain_table;
use nsab_core::linalg::gen_eigh;
use nsab_core::space::ChannelSpace;
use nsab_core::stationary::*;
use nsab_core::{derive_params, ChannelGeometry, Error, ModelParams, Resolution, C64};
use proptest::prelude::*;

fn setup(p: usize, gamma: f64) -> (ChannelSpace, ModelParams, Operators) {
    let s = ChannelSpace::new(ChannelGeometry::new(2.0 * PI, 3.0, 1.0).unwrap(), Resolution::new(6, 4, p).unwrap()).unwrap();
    let params = derive_params(0.25, 0.1, gamma, 0.01).unwrap();
    let ops = assemble(&s, &params).unwrap();
    (s, params, ops)
}

fn dual_dot(f: &SolenoidalField, s: &ChannelSpace, v: &SolenoidalField) -> f64 {
    s.modes
        .iter()
        .zip(f.coeffs.iter().zip(&v.coeffs))
        .map(|(m, (a, b))| m.weight * b.dotc(a).re)
        .sum()
}

/// Nodal forcing `∇q` for `q = P₃(2z − 1) + z` on every stored mode.
fn gradient_forcing(s: &ChannelSpace) -> (Forcing, Vec<C64>) {
    let h = s.geometry.h;
    let tab = plain_table(3, h, &s.nodes.z, 1);
    let q: Vec<C64> = (0..s.nodes.npoints()).map(|i| C64::new(tab[0][(i, 3)] + s.nodes.z[i], 0.0)).collect();
    let dq: Vec<C64> = (0..s.nodes.npoints()).map(|i| C64::new(tab[1][(i, 3)] + 1.0, 0.0)).collect();
    let mut f = Forcing::zero(s);
    for (idx, mode) in s.modes.iter().enumerate() {
        for i in 0..q.len() {
            f.nodal[idx][0][i] = C64::i() * mode.eta[0] * q[i];
            f.nodal[idx][1][i] = C64::i() * mode.eta[1] * q[i];
            f.nodal[idx][2][i] = dq[i];
        }
    }
    (f, q)
}

#[test]
fn zero_forcing_gives_zero_solution() {
    let (s, _, ops) = setup(10, 0.5);
    let sol = solve_stationary(&Forcing::zero(&s).dual(&s), &ops).unwrap();
    assert_eq!(sol.u.coeff_norm(), 0.0);
    assert_eq!(sol.kernel_dim, 0);
    assert_eq!(sol.relative_residual, 0.0);
}

#[test]
fn galerkin_orthogonality_and_energy_identity() {
    let (s, _, ops) = setup(12, 0.5);
    let f = smooth_random_forcing(&s, 4, 2, 3).dual(&s);
    let u = solve_stationary(&f, &ops).unwrap().u;
    let energy = global_form(&ops, &u, |o| &o.k_a);
    assert!((energy - dual_dot(&f, &s, &u)).abs() <= 1e-12 * energy.abs());
    for seed in 0..5 {
        let phi = SolenoidalField::random(&s, seed, RandomSpec::default());
        let lhs = global_pair(&ops, &u, &phi, |o| &o.k_a);
        let rhs = dual_dot(&f, &s, &phi);
        let scale = (global_form(&ops, &u, |o| &o.k_a) * global_form(&ops, &phi, |o| &o.k_a)).sqrt();
        assert!((lhs - rhs).abs() <= 1e-12 * scale, "{lhs} vs {rhs}");
    }
}

#[test]
fn gradient_forcing_is_absorbed_by_the_pressure() {
    let (s, _, ops) = setup(10, 0.5);
    let (f, q) = gradient_forcing(&s);
    let dual = f.dual(&s);
    let scale = smooth_random_forcing(&s, 1, 2, 3).dual(&s).coeff_norm();
    assert!(dual.coeff_norm() <= 1e-12 * scale);
    let u = solve_stationary(&dual, &ops).unwrap().u;
    assert!(u.coeff_norm() <= 1e-10);

    let p = recover_pressure(&SolenoidalField::zeros(&s), &f, &s, 1e-10).unwrap();
    assert!(p.defect <= 1e-12);
    let h = s.geometry.h;
    let qmean: C64 = s.nodes.z.iter().enumerate().map(|(i, _)| q[i] * s.weights[i]).sum::<C64>() / h;
    for (idx, mode) in s.modes.iter().enumerate() {
        let ph = p.eval(idx, h, &s.nodes.z);
        let shift = if mode.is_mean() { qmean } else { C64::new(0.0, 0.0) };
        for i in 0..q.len() {
            assert!((ph[i] - (q[i] - shift)).norm() <= 1e-10, "mode {idx} node {i}");
        }
    }
}

#[test]
fn discrete_solution_satisfies_dirichlet_exactly() {
    let (s, params, ops) = setup(12, 0.5);
    let u = solve_stationary(&smooth_random_forcing(&s, 8, 2, 3).dual(&s), &ops).unwrap().u;
    let r = strong_bc_residual(&u, &s, &params).unwrap();
    assert!(r.dirichlet <= 1e-12 * r.traction_scale, "{:?}", r);
}

#[test]
fn wall_eddy_residual_decreases_with_degree() {
    let coarse = {
        let (s, params, ops) = setup(12, 0.5);
        let u = solve_stationary(&smooth_random_forcing(&s, 8, 2, 3).dual(&s), &ops).unwrap().u;
        let r = strong_bc_residual(&u, &s, &params).unwrap();
        r.wall_eddy / r.traction_scale
    };
    let fine = {
        let (s, params, ops) = setup(24, 0.5);
        let u = solve_stationary(&smooth_random_forcing(&s, 8, 2, 3).dual(&s), &ops).unwrap().u;
        let r = strong_bc_residual(&u, &s, &params).unwrap();
        r.wall_eddy / r.traction_scale
    };
    assert!(coarse / fine >= 10.0, "{coarse:.3e} -> {fine:.3e}");
}

#[test]
fn simplest_form_has_vanishing_wall_eddy_residual_under_refinement() {
    let run = |p: usize| {
        let (s, _, ops) = setup(p, 0.0);
        let params = derive_params(0.25, 0.1, 0.0, 1e-300).unwrap();
        let ops = ops.with_form(0.0, 0.0);
        let u = solve_stationary(&smooth_random_forcing(&s, 8, 2, 3).dual(&s), &ops).unwrap().u;
        let r = strong_bc_residual(&u, &s, &params).unwrap();
        r.wall_eddy / r.traction_scale
    };
    let (a, b) = (run(10), run(20));
    assert!(b < a && b < 1e-6, "{a:.3e} -> {b:.3e}");
}

/// With `k = 2/h` the horizontal mean flows `z(h − z)` satisfy
/// `∫|u''|² = k Σ_walls |u'|²`, so the mean mode carries a kernel.
#[test]
fn kernel_directions_require_compatible_data() {
    let (s, _, base) = setup(8, 0.5);
    let ops = base.with_form(0.5, 2.0);
    let zero = solve_stationary(&Forcing::zero(&s).dual(&s), &ops).unwrap();
    assert_eq!(zero.kernel_dim, 2);

    let mut f = SolenoidalField::random(&s, 2, RandomSpec::default());
    match solve_stationary(&f, &ops) {
        Err(Error::KernelConsistency { kernel_dim, .. }) => assert_eq!(kernel_dim, 2),
        other => panic!("expected kernel error, got {other:?}"),
    }

    let op = &ops.modes[0];
    let e = gen_eigh(&op.k_a, &op.m).unwrap();
    let c = &mut f.coeffs[0];
    for j in 0..2 {
        let v = e.vectors.column(j).into_owned();
        let proj = v.dotc(c) / v.norm_squared();
        *c -= &v * proj;
    }
    let sol = solve_stationary(&f, &ops).unwrap();
    assert_eq!(sol.kernel_dim, 2);
    assert!(sol.relative_residual <= 1e-10);
}

#[test]
fn pressure_tolerance_and_dimension_errors() {
    let (s, params, ops) = setup(8, 0.5);
    let f = smooth_random_forcing(&s, 8, 2, 3);
    let u = solve_stationary(&f.dual(&s), &ops).unwrap().u;
    assert!(matches!(recover_pressure(&u, &f, &s, 0.0), Err(Error::WeakSolutionDefect { .. })));
    let (other, _, _) = setup(10, 0.5);
    let wrong = SolenoidalField::zeros(&other);
    assert!(solve_stationary(&wrong, &ops).is_err());
    assert!(strong_bc_residual(&wrong, &s, &params).is_err());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn discrete_manufactured_solutions_are_recovered(seed in any::<u64>(), gamma in -1.0..1.0f64, k in 0.0..1.5f64) {
        let (s, _, base) = setup(10, 0.0);
        let ops = base.with_form(gamma, k);
        let exact = SolenoidalField::random(&s, seed, RandomSpec::default());
        let mut f = SolenoidalField::zeros(&s);
        for ((c, op), u) in f.coeffs.iter_mut().zip(&ops.modes).zip(&exact.coeffs) {
            *c = &op.k_a * u;
        }
        let sol = solve_stationary(&f, &ops).unwrap();
        prop_assert_eq!(sol.kernel_dim, 0);
        prop_assert!(sol.u.sub(&exact).coeff_norm() <= 1e-10 * exact.coeff_norm());
    }
}
