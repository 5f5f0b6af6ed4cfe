use nvlab::scattering::*;
use nvlab::{Complex64, Profile, ScatteringData};
use proptest::prelude::*;
use std::f64::consts::PI;

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

fn lambda() -> impl Strategy<Value = Complex64> {
    (0.2f64..3.0, 0.0..2.0 * PI).prop_map(|(r, a)| Complex64::from_polar(r, a))
}

fn constant() -> ScatteringData {
    ScatteringData::new(Profile::Constant, 1.0)
}

#[test]
fn zero_profile_is_zero() {
    let d = ScatteringData::zero();
    for l in [c(0.3, 0.1), c(1.0, 0.0), c(-2.0, 5.0)] {
        assert_eq!(d.b(l).unwrap(), c(0.0, 0.0));
    }
    assert_eq!(d.b(c(0.0, 0.0)).unwrap_err().kind(), "domain");
}

#[test]
fn real_on_unit_circle() {
    for d in [ScatteringData::p1(1.0), ScatteringData::p2(1.0)] {
        for j in 0..64 {
            let l = Complex64::from_polar(1.0, 2.0 * PI * j as f64 / 64.0);
            assert!(d.b(l).unwrap().im.abs() < 1e-15);
        }
    }
    // b(1) = b(-1) != 0 for the ridge
    let d = ScatteringData::p1(1.0);
    let (p, m) = (d.b(c(1.0, 0.0)).unwrap(), d.b(c(-1.0, 0.0)).unwrap());
    assert!(p.norm() > 0.5 && (p - m).norm() < 1e-15);
}

#[test]
fn evolution_examples() {
    let d = ScatteringData::p1(1.0);
    for l in [Complex64::from_polar(1.0, 0.7), c(1.3, 0.0), c(-0.8, 0.0)] {
        assert!((d.evolve(37.0, l).unwrap() - d.b(l).unwrap()).norm() < 1e-14);
    }
    let m = evolution_factor(1.0, c(0.0, 2.0));
    assert!((m - Complex64::from_polar(1.0, -63.0 / 4.0)).norm() < 1e-12);
}

#[test]
fn weight_examples() {
    let d = constant();
    assert_eq!(d.r_weight(c(0.0, 1.0)).unwrap(), c(0.0, 0.0));
    assert!((d.r_weight(c(2.0, 0.0)).unwrap() - c(-PI / 2.0, 0.0)).norm() < 1e-15);
    assert!((d.r_weight(c(0.5, 0.0)).unwrap() - c(2.0 * PI, 0.0)).norm() < 1e-14);
    assert!((d.f_weight(c(2.0, 0.0)).unwrap() - c(3.0 * PI / 8.0, 0.0)).norm() < 1e-15);
    assert!(ScatteringData::p1(1.0).f_weight(Complex64::from_polar(1.0, 0.4)).unwrap().norm() < 1e-15);
}

#[test]
fn f_weight_continuous_across_circle() {
    let d = ScatteringData::p1(1.0);
    for phi in [0.0, 0.9, 2.5] {
        for eps in [1e-4, 1e-6, 1e-8] {
            let o = d.f_weight(Complex64::from_polar(1.0 + eps, phi)).unwrap();
            let i = d.f_weight(Complex64::from_polar(1.0 - eps, phi)).unwrap();
            assert!(o.norm() < 10.0 * eps && i.norm() < 10.0 * eps);
        }
    }
}

#[test]
fn ridge_support_and_decay() {
    let d = ScatteringData::p1(1.0);
    assert_eq!(d.support_radius(), Some(1.6));
    assert_eq!(d.b(c(1.7, 0.2)).unwrap(), c(0.0, 0.0));
    assert_eq!(d.b(c(0.1, 0.55)).unwrap(), c(0.0, 0.0));
    let p2 = ScatteringData::p2(1.0);
    assert!(p2.b(c(6.5, 0.0)).unwrap().norm() < 1e-16);
    assert!(p2.b(c(0.0, 1.0 / 6.5)).unwrap().norm() < 1e-16);
}

#[test]
fn ring_evaluation_matches_pointwise() {
    for d in [ScatteringData::p1(0.3), ScatteringData::p2(1.0)] {
        for r in [0.7, 1.0, 1.2, 1.5] {
            let phis: Vec<f64> = (0..17).map(|j| 0.37 * j as f64).collect();
            let cos: Vec<f64> = phis.iter().map(|p| p.cos()).collect();
            let sin: Vec<f64> = phis.iter().map(|p| p.sin()).collect();
            let mut out = vec![c(0.0, 0.0); 17];
            d.b_on_ring(r, &cos, &sin, &mut out);
            for j in 0..17 {
                let b = d.b(Complex64::new(r * cos[j], r * sin[j])).unwrap();
                assert!((out[j] - b).norm() < 1e-14, "r {r} j {j}");
            }
        }
    }
}

#[test]
fn sampled_profile_roundtrip() {
    let src = ScatteringData::p1(1.0);
    let mut rows = Vec::new();
    for i in 0..=40 {
        let r = (1.6f64.ln() * i as f64 / 40.0).exp();
        for j in 0..128 {
            let l = Complex64::from_polar(r, 2.0 * PI * j as f64 / 128.0);
            rows.push((l, src.b(l).unwrap()));
        }
    }
    let sp = SampledProfile::from_samples(&rows).unwrap();
    let d = ScatteringData::new(Profile::Sampled(std::sync::Arc::new(sp)), 1.0);
    for l in [c(1.1, 0.3), c(-0.9, 0.8), c(0.5, -0.4)] {
        assert!((d.b(l).unwrap() - src.b(l).unwrap()).norm() < 2e-3);
    }
    assert!(SampledProfile::from_samples(&rows[..rows.len() - 1]).unwrap_err().is_config());
    assert!(SampledProfile::from_samples(&[(c(0.5, 0.0), c(1.0, 0.0))]).unwrap_err().is_config());
}

#[test]
fn taper_is_a_smooth_step() {
    assert_eq!(taper(1.0, 1.25, 1.6), 1.0);
    assert_eq!(taper(1.6, 1.25, 1.6), 0.0);
    let mid = taper(1.425, 1.25, 1.6);
    assert!((mid - 0.5).abs() < 1e-12);
}

proptest! {
    #[test]
    fn symmetries_hold(l in lambda(), theta in 0.01f64..2.0, t in -50.0f64..50.0) {
        for d in [ScatteringData::p1(theta), ScatteringData::p2(theta)] {
            let b = d.b(l).unwrap();
            let b1 = d.b(-l.conj().inv()).unwrap();
            let b2 = d.b(l.conj().inv()).unwrap();
            prop_assert!((b - b1).norm() < 1e-14);
            prop_assert!((b.conj() - b2).norm() < 1e-14);
            // the evolved data keeps both symmetries and the modulus
            let e = d.evolve(t, l).unwrap();
            prop_assert!((e.norm() - b.norm()).abs() < 1e-14);
            prop_assert!((e - d.evolve(t, -l.conj().inv()).unwrap()).norm() < 1e-12);
            prop_assert!((e.conj() - d.evolve(t, l.conj().inv()).unwrap()).norm() < 1e-12);
            // f(-zeta) = conj f(zeta)
            prop_assert!((d.f_weight(-l).unwrap() - d.f_weight(l).unwrap().conj()).norm() < 1e-14);
        }
    }

    #[test]
    fn circle_invariance(phi in 0.0f64..2.0 * PI, t in -100.0f64..100.0) {
        let d = ScatteringData::p1(1.0);
        let l = Complex64::from_polar(1.0, phi);
        prop_assert!((d.evolve(t, l).unwrap() - d.b(l).unwrap()).norm() < 1e-12);
    }
}
