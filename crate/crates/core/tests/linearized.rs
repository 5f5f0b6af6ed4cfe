use nvlab::linearized::*;
use nvlab::oracles::midpoint_polar;
use nvlab::phase::{boundary_curve, phase_value_zt};
use nvlab::quadrature::{build_grid, GridSpec};
use nvlab::{Complex64, ScatteringData};
use std::f64::consts::PI;

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

// frozen from the midpoint oracle below (Richardson over two levels)
const I_16_CUSP: f64 = 0.2236964443616;

fn abs_f_integral(d: &ScatteringData) -> f64 {
    midpoint_polar(|z| d.f_weight(z).unwrap().norm().into(), 0.625, 1.0, 400, 512).re
        + midpoint_polar(|z| d.f_weight(z).unwrap().norm().into(), 1.0, 1.6, 400, 512).re
}

#[test]
fn zero_data() {
    let d = ScatteringData::zero();
    let o = LinearOptions::default();
    assert_eq!(integral_i(&d, 5.0, c(-3.0, 1.0), &o).unwrap(), c(0.0, 0.0));
    assert_eq!(integral_j(&d, 5.0, c(-3.0, 1.0), &o).unwrap(), c(0.0, 0.0));
    let s = sup_scan(&d, 4.0, &[c(0.0, 0.0), c(-18.0, 0.0)], &o).unwrap();
    assert_eq!(s.sup, 0.0);
}

#[test]
fn cusp_value_matches_midpoint_oracle() {
    let d = ScatteringData::p1(1.0);
    let (t, u) = (16.0, c(-18.0, 0.0));
    let f = |zeta: Complex64| d.f_weight(zeta).unwrap() * phase_value_zt(u * t, t, zeta).unwrap().exp();
    // the weight has a kink on |zeta| = 1, so each side gets its own midpoint rule
    let level = |l: usize| midpoint_polar(f, 0.625, 1.0, 250 << l, 1024 << l) + midpoint_polar(f, 1.0, 1.6, 250 << l, 1024 << l);
    let (a, b) = (level(1), level(2));
    let oracle = b + (b - a) / 3.0;
    let fast = integral_i(&d, t, u, &LinearOptions::default()).unwrap();
    assert!((fast - oracle).norm() < 1e-7 * oracle.norm(), "{fast} vs {oracle}");
    assert!((fast.re - I_16_CUSP).abs() < 1e-10);
}

#[test]
fn t_zero_gives_total_mass() {
    let d = ScatteringData::p1(1.0);
    let o = LinearOptions::default();
    let a = integral_i(&d, 0.0, c(0.0, 0.0), &o).unwrap();
    let b = integral_i(&d, 0.0, c(7.0, -3.0), &o).unwrap();
    assert!((a - b).norm() < 1e-13 && a.im == 0.0);
    let g = build_grid(&GridSpec::new(0.625, 1.6, 16, 8).with_order(16)).unwrap();
    let mass = nvlab::quadrature::integrate(|z| d.f_weight(z).unwrap(), &g).unwrap();
    assert!((a - mass).norm() < 1e-8 * mass.norm(), "{a} vs {mass}");
    // sup over any u-set at t = 0 is the mass
    let s = sup_scan(&d, 0.0, &[c(0.0, 0.0), c(10.0, 5.0), c(-18.0, 0.0)], &o).unwrap();
    assert!((s.sup - mass.norm()).abs() < 1e-8 * mass.norm());
}

#[test]
fn reduced_equals_full_and_is_real() {
    let o = LinearOptions::default();
    // the wide profile only at small t, its support reaches |zeta| = 6.5
    let cases = [
        (ScatteringData::p1(1.0), 3.0, c(-10.0, 4.0)),
        (ScatteringData::p1(1.0), 20.0, c(-18.0, 0.0)),
        (ScatteringData::p1(1.0), 10.0, boundary_curve(1.0)),
        (ScatteringData::p2(1.0), 0.5, c(-10.0, 4.0)),
        (ScatteringData::p2(1.0), 1.0, c(3.0, 2.0)),
    ];
    for (d, t, u) in cases {
        let a = integral_i(&d, t, u, &o).unwrap();
        let b = integral_i_full(&d, t, u, &o).unwrap();
        assert!((a - b).norm() < 1e-10 * (1.0 + a.norm()), "{a} vs {b}");
        assert!(b.im.abs() < 1e-10 * (1.0 + b.norm()));
    }
}

#[test]
fn refinement_doubling_is_stable() {
    let d = ScatteringData::p1(1.0);
    let o = LinearOptions::default();
    let mut fine = o.clone();
    fine.grid = o.grid.scaled(2);
    for (t, u) in [(10.0, c(-18.0, 0.0)), (100.0, c(-18.0, 0.0)), (40.0, c(5.0, 12.0))] {
        for integral in [integral_i, integral_j] {
            let a = integral(&d, t, u, &o).unwrap();
            let b = integral(&d, t, u, &fine).unwrap();
            assert!((a - b).norm() < 1e-4 * b.norm(), "t {t} u {u}: {a} vs {b}");
        }
    }
}

#[test]
fn j_bound_at_t_zero() {
    let d = ScatteringData::p1(1.0);
    let j = integral_j(&d, 0.0, c(1.0, 1.0), &LinearOptions::default()).unwrap();
    assert!(j.norm() <= 3.0 * abs_f_integral(&d) * (1.0 + 1e-6));
}

#[test]
fn uniform_bound() {
    let d = ScatteringData::p1(1.0);
    let bound = abs_f_integral(&d) * (1.0 + 1e-6);
    let o = LinearOptions::default();
    for (t, u) in [(1.0, c(0.0, 0.0)), (8.0, c(-18.0, 0.0)), (8.0, c(20.0, -20.0)), (30.0, boundary_curve(2.0))] {
        assert!(integral_i(&d, t, u, &o).unwrap().norm() <= bound);
    }
}

#[test]
fn linear_in_the_weight() {
    let p1 = ScatteringData::p1(1.0);
    let p2 = ScatteringData::p2(1.0);
    let (z, t) = (c(-30.0, 8.0), 2.0);
    let g = integration_grid(
        &p2,
        z,
        t,
        &GridSpec::new(0.15, 6.5, 8, 4).with_order(16),
        &nvlab::quadrature::Oscillation::INTEGRAL,
        50_000_000,
        0.02,
        1,
    )
    .unwrap();
    let (a, b) = (c(0.3, -1.2), c(-2.0, 0.7));
    let mix = oscillatory_integral(|w| a * p1.f_weight(w).unwrap() + b * p2.f_weight(w).unwrap(), z, t, &g).unwrap();
    let i1 = oscillatory_integral(|w| p1.f_weight(w).unwrap(), z, t, &g).unwrap();
    let i2 = oscillatory_integral(|w| p2.f_weight(w).unwrap(), z, t, &g).unwrap();
    assert!((mix - a * i1 - b * i2).norm() < 1e-12 * (1.0 + mix.norm()));
    // theta scales the integral
    let o = LinearOptions::default();
    let x = integral_i(&p1.with_theta(0.25), t, z / t, &o).unwrap();
    let y = integral_i(&p1, t, z / t, &o).unwrap();
    assert!((x - 0.25 * y).norm() < 1e-14);
}

#[test]
fn linear_v_scaling() {
    let d = ScatteringData::p1(1.0);
    let o = LinearOptions::default();
    let v = linear_v(&d, c(-18.0 * 16.0, 0.0), 16.0, &o).unwrap();
    assert!((v.re + 2.0 / PI * I_16_CUSP).abs() < 1e-10);
}

#[test]
fn default_grid_shape() {
    let g = default_u_grid();
    assert_eq!(g.len(), 24 * 20 + 3 + 36);
    assert!(g.iter().all(|u| u.norm() <= 30.0 + 1e-12));
}

#[test]
fn maximizer_sits_near_the_degenerate_curve() {
    let d = ScatteringData::p1(1.0);
    let o = LinearOptions::default();
    let s = sup_scan(&d, 32.0, &default_u_grid(), &o).unwrap();
    let dist = (0..3600).map(|j| (boundary_curve(2.0 * PI * j as f64 / 3600.0) - s.u_star).norm()).fold(f64::INFINITY, f64::min);
    assert!(dist < 3.0, "u* = {} at distance {dist}", s.u_star);
    assert!(sup_scan(&d, 1.0, &[], &o).unwrap_err().is_config());
}

#[test]
fn synthetic_decay_fits() {
    let ts: [f64; 6] = [8.0, 16.0, 32.0, 64.0, 128.0, 256.0];
    let pure: Vec<(f64, f64)> = ts.iter().map(|t| (*t, (1.0 + t).powf(-0.75))).collect();
    let f = decay_fit(&pure, false).unwrap();
    assert!((f.exponent + 0.75).abs() < 1e-6);
    assert!(f.max_residual < 1e-10);
    let logged: Vec<(f64, f64)> = ts.iter().map(|t| (*t, (3.0 + t).ln() * (1.0 + t).powf(-0.75))).collect();
    let g = decay_fit(&logged, true).unwrap();
    assert!((g.exponent + 0.75).abs() < 1e-3);
    assert_eq!(g.t_range, (8.0, 256.0));
    assert!(decay_fit(&pure[..4], false).unwrap_err().is_config());
    let mut bad = pure.clone();
    bad[0].0 = 0.5;
    assert!(decay_fit(&bad, false).unwrap_err().is_config());
}
