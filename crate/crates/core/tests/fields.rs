use std::f64::consts::PI;

use nsab_core::discretization::assemble;
use nsab_core::field::*;
use nsab_core::space::ChannelSpace;
use nsab_core::{derive_params, ChannelGeometry, Error, Resolution, C64};
use proptest::prelude::*;

fn setup(n: usize, p: usize) -> ChannelSpace {
    ChannelSpace::new(ChannelGeometry::new(2.0 * PI, 3.0, 1.0).unwrap(), Resolution::new(n, n, p).unwrap()).unwrap()
}

#[test]
fn parameter_examples() {
    let p = derive_params(0.2, 0.1, 0.0, 0.05).unwrap();
    assert!((p.k - 5.0).abs() < 1e-12);
    assert_eq!(p.k, p.ell / (p.beta * p.beta));
    let msg = derive_params(0.1, 0.2, 0.0, 0.05).unwrap_err().to_string();
    assert!(msg.contains("alpha must exceed beta"), "{msg}");
    let msg = derive_params(0.2, 0.1, 1.5, 0.05).unwrap_err().to_string();
    assert!(msg.contains("|gamma| ≤ 1 required"), "{msg}");
    assert!(matches!(derive_params(0.2, 0.0, 0.0, 0.05), Err(Error::Param(_))));
    assert!(matches!(derive_params(0.2, 0.1, 0.0, 0.0), Err(Error::Param(_))));
}

#[test]
fn geometry_and_resolution_validation() {
    assert!(ChannelGeometry::new(1.0, 0.0, 1.0).is_err());
    assert!(ChannelGeometry::new(1.0, 1.0, -1.0).is_err());
    assert_eq!(ChannelGeometry::wall_normal(0), -1.0);
    assert_eq!(ChannelGeometry::wall_normal(1), 1.0);
    assert!(Resolution::new(7, 8, 8).is_err());
    assert!(Resolution::with_all(8, 8, 8, Resolution::min_quadrature(8) - 1, 16, 16).is_err());
    let r = Resolution::new(8, 8, 8).unwrap();
    assert!(r.is_padded());
    assert_eq!(r.q, 13);
}

#[test]
fn zero_field_has_zero_velocity() {
    let s = setup(4, 8);
    let g = potentials_to_velocity(&SolenoidalField::zeros(&s), &s).unwrap();
    assert_eq!(g.max_abs(), 0.0);
}

#[test]
fn single_toroidal_mode_is_horizontal_and_solenoidal() {
    let s = setup(6, 10);
    let idx = s.lookup(1, 2).unwrap().0;
    let mut f = SolenoidalField::zeros(&s);
    f.coeffs[idx][0] = C64::new(1.0, 0.0);
    let jet = s.nodes.jet(&s.modes[idx], f.coeffs[idx].as_slice(), 0);
    let eta = s.modes[idx].eta;
    for q in 0..jet.npoints() {
        let [u1, u2, u3] = jet.value(q);
        assert_eq!(u3.norm(), 0.0);
        assert!((u1 * eta[0] + u2 * eta[1]).norm() < 1e-14);
    }
}

/// Divergence by 8th-order periodic differences in x, y and 4th-order
/// differences in z on a fine physical grid, relative to the velocity scale.
fn finite_difference_divergence(f: &SolenoidalField, n: usize, p: usize, m: usize) -> f64 {
    let geo = ChannelGeometry::new(2.0 * PI, 3.0, 1.0).unwrap();
    let s = ChannelSpace::new(geo, Resolution::with_all(n, n, p, Resolution::min_quadrature(p), m, m).unwrap()).unwrap();
    let dz = 1e-3;
    let zc = [0.31, 0.5, 0.77];
    let mut z = Vec::new();
    for &c in &zc {
        for k in [-2.0, -1.0, 0.0, 1.0, 2.0] {
            z.push(c + k * dz);
        }
    }
    let g = sample_velocity(f, &s, &s.tables_at(&z)).unwrap();
    let (hx, hy) = (geo.l1 / m as f64, geo.l2 / m as f64);
    let at = |c: usize, iz: usize, iy: usize, ix: usize| g.u[c][(iz * m + iy % m) * m + ix % m];
    let w8 = [4.0 / 5.0, -1.0 / 5.0, 4.0 / 105.0, -1.0 / 280.0];
    let mut worst = 0.0f64;
    for (ic, _) in zc.iter().enumerate() {
        let iz = 5 * ic + 2;
        for iy in 0..m {
            for ix in 0..m {
                let mut dx = 0.0;
                let mut dy = 0.0;
                for (k, w) in w8.iter().enumerate() {
                    let o = k + 1;
                    dx += w * (at(0, iz, iy, ix + o) - at(0, iz, iy, ix + m - o)) / hx;
                    dy += w * (at(1, iz, iy + o, ix) - at(1, iz, iy + m - o, ix)) / hy;
                }
                let dzv = (-at(2, iz + 2, iy, ix) + 8.0 * at(2, iz + 1, iy, ix) - 8.0 * at(2, iz - 1, iy, ix) + at(2, iz - 2, iy, ix))
                    / (12.0 * dz);
                worst = worst.max((dx + dy + dzv).abs());
            }
        }
    }
    worst / g.max_abs()
}

#[test]
fn divergence_vanishes_to_finite_difference_order() {
    let (n, p) = (6, 10);
    let s = setup(n, p);
    let f = SolenoidalField::random(&s, 5, RandomSpec::default());
    let coarse = finite_difference_divergence(&f, n, p, 48);
    let fine = finite_difference_divergence(&f, n, p, 96);
    assert!(fine < 1e-6, "fine-grid divergence {fine:.3e}");
    assert!(coarse / fine > 50.0, "convergence {coarse:.3e} -> {fine:.3e}");
    let g = potentials_to_velocity(&f, &s).unwrap();
    assert!(max_divergence(&f, &s) <= 1e-12 * g.max_abs());
}

#[test]
fn mismatched_resolution_is_rejected() {
    let s = setup(4, 8);
    let other = setup(4, 10);
    let f = SolenoidalField::zeros(&other);
    assert!(matches!(potentials_to_velocity(&f, &s), Err(Error::ResolutionMismatch(_))));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn round_trip_reality_and_wall_conditions(seed in any::<u64>(), amp in 0.01..100.0f64, decay in 0.0..1.0f64) {
        let s = setup(6, 10);
        let ops = assemble(&s, &derive_params(0.2, 0.1, 0.0, 0.01).unwrap()).unwrap();
        let f = SolenoidalField::random(&s, seed, RandomSpec { amplitude: amp, mode_decay: decay, degree_decay: 0.3 });
        let g = potentials_to_velocity(&f, &s).unwrap();
        let scale = g.max_abs();
        prop_assert!(g.max_imag <= 1e-13 * scale);
        prop_assert!(max_wall_velocity(&f, &s) <= 1e-12 * scale);
        prop_assert!(max_divergence(&f, &s) <= 1e-12 * scale);
        let back = velocity_to_potentials(&g, &s, &ops).unwrap();
        prop_assert!(back.sub(&f).coeff_norm() <= 1e-12 * f.coeff_norm());
        for (m, c) in s.modes.iter().zip(&f.coeffs) {
            if m.is_mean() {
                prop_assert!(c.iter().all(|v| v.im == 0.0));
            }
        }
    }

    #[test]
    fn hermitian_storage_covers_each_pair_once(n1 in 1usize..6, n2 in 1usize..6) {
        let s = ChannelSpace::new(ChannelGeometry::new(1.0, 2.0, 1.0).unwrap(), Resolution::new(2 * n1, 2 * n2, 6).unwrap()).unwrap();
        let h1 = n1 as i64 - 1;
        let h2 = n2 as i64 - 1;
        prop_assert_eq!(s.modes.len() as i64, ((2 * h1 + 1) * (2 * h2 + 1) + 1) / 2);
        for k1 in -h1..=h1 {
            for k2 in -h2..=h2 {
                let (a, conj_a) = s.lookup(k1, k2).unwrap();
                let (b, conj_b) = s.lookup(-k1, -k2).unwrap();
                prop_assert_eq!(a, b);
                if k1 != 0 || k2 != 0 {
                    prop_assert!(conj_a != conj_b);
                }
            }
        }
    }
}
