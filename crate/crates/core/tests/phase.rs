use nvlab::oracles::{finite_difference, Direction};
use nvlab::phase::*;
use nvlab::{Complex64, StationaryCase};
use proptest::prelude::*;
use std::f64::consts::PI;

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

fn polar_zeta() -> impl Strategy<Value = Complex64> {
    (0.1f64..5.0, 0.0..2.0 * PI).prop_map(|(r, a)| Complex64::from_polar(r, a))
}

fn small_u() -> impl Strategy<Value = Complex64> {
    (0.0f64..40.0, 0.0..2.0 * PI).prop_map(|(r, a)| Complex64::from_polar(r, a))
}

#[test]
fn phase_vanishes_at_plus_minus_one() {
    for u in [c(0.0, 0.0), c(-18.0, 0.0), c(3.0, -7.0)] {
        assert_eq!(phase_value(u, c(1.0, 0.0)).unwrap().norm(), 0.0);
        assert!(phase_value(u, c(-1.0, 0.0)).unwrap().norm() < 1e-14);
    }
}

#[test]
fn zero_zeta_is_a_domain_error() {
    let e = phase_value(c(1.0, 0.0), c(0.0, 0.0)).unwrap_err();
    assert_eq!(e.kind(), "domain");
    assert!(phase_d1(c(1.0, 0.0), c(0.0, 0.0)).is_err());
    assert!(phase_d2(c(1.0, 0.0), c(0.0, 0.0)).is_err());
}

#[test]
fn second_derivative_values() {
    assert!(phase_d2(c(-18.0, 0.0), c(1.0, 0.0)).unwrap().norm() < 1e-14);
    assert!((phase_d2(c(0.0, 0.0), c(1.0, 0.0)).unwrap() - 18.0).norm() < 1e-14);
    assert!(phase_d1(c(-18.0, 0.0), c(1.0, 0.0)).unwrap().norm() < 1e-14);
}

#[test]
fn zt_form_matches_scaled_phase() {
    let z = c(-40.0, 13.0);
    let zeta = c(0.7, -1.3);
    let t = 2.5;
    let a = phase_value_zt(z, t, zeta).unwrap();
    let b = t * phase_value(z / t, zeta).unwrap();
    assert!((a - b).norm() < 1e-12 * a.norm());
    // t = 0 keeps only the linear part
    let lin = phase_value_zt(z, 0.0, zeta).unwrap();
    let zb = zeta.conj();
    let expect = 0.5 * ((zeta - zb.inv()) * z.conj() - (zb - zeta.inv()) * z);
    assert!((lin - expect).norm() < 1e-12);
}

#[test]
fn psi_matches_phase() {
    let z = c(-5.0, 2.0);
    let t = 1.5;
    for (r, phi) in [(0.4, 0.3), (1.7, 2.2), (3.0, -1.0)] {
        let zeta = Complex64::from_polar(r, phi);
        let a = r - 1.0 / r;
        let psi = phase_psi(z, t, a, phi.cos(), phi.sin(), (3.0 * phi).sin());
        let s = phase_value_zt(z, t, zeta).unwrap();
        assert!((s.im - psi).abs() < 1e-12 * (1.0 + psi.abs()));
    }
}

#[test]
fn triple_root_at_cusps() {
    for k in 0..3 {
        let u = Complex64::from_polar(-18.0, 2.0 * PI * k as f64 / 3.0);
        let a = stationary_points(u).unwrap();
        assert_eq!(a.case, StationaryCase::TripleDegenerate);
        // zeros of S' are +-e^{-i pi k/3}; the conjugate cubic has +-e^{i pi k/3}
        let p = Complex64::from_polar(1.0, -PI * k as f64 / 3.0);
        assert!(a.zeta_points.iter().any(|z| (z - p).norm() < 1e-4));
        assert!(a.zeta_points.iter().any(|z| (z + p).norm() < 1e-4));
        let q = swapped_q_roots(u).unwrap();
        assert!(q.iter().all(|x| (x - p.conj() * p.conj()).norm() < 1e-4));
    }
}

#[test]
fn origin_gives_cube_roots_of_unity() {
    let a = stationary_points(c(0.0, 0.0)).unwrap();
    assert_eq!(a.case, StationaryCase::InteriorNondegenerate);
    for x in a.xi_roots {
        assert!((x.powi(3) - 1.0).norm() < 1e-12);
    }
}

#[test]
fn boundary_instance() {
    // phi = pi/2: u = 6 + 12 i; double root e^{i phi}, simple root e^{-2 i phi}
    let u = boundary_curve(PI / 2.0);
    assert!((u - c(6.0, 12.0)).norm() < 1e-12);
    let a = stationary_points(u).unwrap();
    assert_eq!(a.case, StationaryCase::BoundaryDegenerate);
    assert!((a.xi_roots[0] - c(0.0, 1.0)).norm() < 1e-6);
    assert!((a.xi_roots[2] - c(-1.0, 0.0)).norm() < 1e-6);
    // the conjugate-coefficient cubic has the conjugate roots
    let q = swapped_q_roots(u).unwrap();
    assert!(q.iter().any(|x| (x - c(0.0, -1.0)).norm() < 1e-4));
    assert_eq!(classify(u, default_tol(u)).unwrap(), StationaryCase::BoundaryDegenerate);
}

#[test]
fn exterior_moduli_pattern() {
    let a = stationary_points(c(100.0, 0.0)).unwrap();
    assert_eq!(a.case, StationaryCase::ExteriorNondegenerate);
    let w = a.omega.unwrap();
    assert!(w > 0.0);
    let m: Vec<f64> = a.xi_roots.iter().map(|x| x.norm()).collect();
    assert!((m[0] - (1.0 + w).powi(2)).abs() < 1e-9);
    assert!((m[1] - 1.0).abs() < 1e-9);
    assert!((m[2] - (1.0 + w).powi(-2)).abs() < 1e-9);
}

#[test]
fn boundary_curve_values() {
    assert!((boundary_curve(0.0) - c(-18.0, 0.0)).norm() < 1e-12);
    let k2 = Complex64::from_polar(-18.0, 4.0 * PI / 3.0);
    assert!((boundary_curve(2.0 * PI / 3.0) - k2).norm() < 1e-12);
    assert!((boundary_curve(0.7) - boundary_curve(0.7 + 2.0 * PI)).norm() < 1e-12);
    assert_eq!(cusps()[0], c(-18.0, 0.0));
}

#[test]
fn boundary_curve_classification() {
    for j in 0..360 {
        let phi = 2.0 * PI * j as f64 / 360.0;
        let case = classify(boundary_curve(phi), default_tol(boundary_curve(phi))).unwrap();
        let near_cusp = (0..3).any(|k| {
            let d = (phi - 2.0 * PI * k as f64 / 3.0).rem_euclid(2.0 * PI);
            d.min(2.0 * PI - d) < 1e-9
        });
        if near_cusp {
            assert_eq!(case, StationaryCase::TripleDegenerate, "phi = {phi}");
        } else {
            assert_eq!(case, StationaryCase::BoundaryDegenerate, "phi = {phi}");
        }
    }
}

#[test]
fn bad_tolerance_is_config_error() {
    assert!(stationary_points_tol(c(1.0, 0.0), 0.0).unwrap_err().is_config());
    assert!(stationary_points(c(f64::NAN, 0.0)).is_err());
}

proptest! {
    #[test]
    fn phase_is_imaginary_and_antisymmetric(u in small_u(), zeta in polar_zeta()) {
        let s = phase_value(u, zeta).unwrap();
        prop_assert!(s.re.abs() < 1e-12 * (1.0 + s.norm()));
        let neg = phase_value(u, -zeta).unwrap();
        prop_assert!((neg + s).norm() < 1e-10 * (1.0 + s.norm()));
        let refl = phase_value(u, zeta.conj().inv()).unwrap();
        prop_assert!((refl + s).norm() < 1e-10 * (1.0 + s.norm()));
    }

    #[test]
    fn d1_matches_holomorphic_difference(u in small_u(), zeta in polar_zeta()) {
        let fd = finite_difference(|w| phase_value(u, w).unwrap(), zeta, Direction::Holomorphic, 1e-5, true);
        let d = phase_d1(u, zeta).unwrap();
        prop_assert!((fd - d).norm() < 1e-6 * (1.0 + d.norm()), "{} vs {}", fd, d);
    }

    #[test]
    fn d2_matches_difference_of_d1(u in small_u(), zeta in polar_zeta()) {
        let fd = finite_difference(|w| phase_d1(u, w).unwrap(), zeta, Direction::Real, 1e-5, true);
        let d = phase_d2(u, zeta).unwrap();
        prop_assert!((fd - d).norm() < 1e-6 * (1.0 + d.norm()));
    }

    #[test]
    fn factorization_and_vieta(u in small_u(), zeta in polar_zeta()) {
        let a = stationary_points(u).unwrap();
        let d = phase_d1(u, zeta).unwrap();
        let f = factored_d1(&a.xi_roots, zeta);
        prop_assert!((d - f).norm() < 1e-8 * (1.0 + d.norm()));
        let prod = a.xi_roots[0] * a.xi_roots[1] * a.xi_roots[2];
        prop_assert!((prod - 1.0).norm() < 1e-9);
        for z in a.zeta_points {
            prop_assert!(phase_d1(u, z).unwrap().norm() < 1e-8 * (1.0 + u.norm()));
            prop_assert!(a.zeta_points.iter().any(|w| (*w + z).norm() < 1e-12));
        }
        if a.case == StationaryCase::InteriorNondegenerate {
            for x in a.xi_roots {
                prop_assert!((x.norm() - 1.0).abs() < a.tol);
            }
        }
    }
}
