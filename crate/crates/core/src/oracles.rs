//! Brute-force reference implementations for tests.
//!
//! Nothing here shares integration code with [`crate::quadrature`]: grids
//! are midpoint rules in `(r, phi)`, the Cauchy transform is a direct sum
//! with a disk correction for the cell holding the target, and the level-set
//! integrals are one-dimensional polar integrals.

use num_complex::Complex64;
use rayon::prelude::*;
use std::f64::consts::PI;

use crate::error::{Error, Result};

/// Outcome of [`refine_until`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Refined {
    pub value: Complex64,
    /// relative gap between the last two levels
    pub achieved: f64,
    pub levels: usize,
    pub converged: bool,
}

/// Evaluate `task(level)` for `level = 0, 1, ...` until two successive values
/// agree to `rel_tol`, or `max_levels` is reached (then `converged = false`).
pub fn refine_until<F>(task: F, rel_tol: f64, max_levels: usize) -> Result<Refined>
where
    F: Fn(usize) -> Complex64,
{
    if !(rel_tol > 1e-12) {
        return Err(Error::Config(format!("refine_until needs rel_tol > 1e-12, got {rel_tol}")));
    }
    let mut prev = task(0);
    let mut achieved = f64::INFINITY;
    for level in 1..max_levels.max(2) {
        let v = task(level);
        achieved = (v - prev).norm() / v.norm().max(f64::MIN_POSITIVE);
        if achieved < rel_tol {
            return Ok(Refined { value: v, achieved, levels: level + 1, converged: true });
        }
        prev = v;
    }
    Ok(Refined { value: prev, achieved, levels: max_levels.max(2), converged: false })
}

/// Midpoint rule over `r_min <= |z| <= r_max` with `nr x nphi` polar cells.
pub fn midpoint_polar<F>(f: F, r_min: f64, r_max: f64, nr: usize, nphi: usize) -> Complex64
where
    F: Fn(Complex64) -> Complex64 + Sync,
{
    let dr = (r_max - r_min) / nr as f64;
    let dphi = 2.0 * PI / nphi as f64;
    let rows: Vec<Complex64> = (0..nr)
        .into_par_iter()
        .map(|i| {
            let r = r_min + (i as f64 + 0.5) * dr;
            let mut acc = Complex64::new(0.0, 0.0);
            for j in 0..nphi {
                acc += f(Complex64::from_polar(r, (j as f64 + 0.5) * dphi));
            }
            acc * r * dr * dphi
        })
        .collect();
    rows.iter().sum()
}

/// A polar integral refined by doubling both cell counts.
#[derive(Debug, Clone, Copy)]
pub struct PolarTask {
    pub r_min: f64,
    pub r_max: f64,
    pub nr: usize,
    pub nphi: usize,
}

impl PolarTask {
    pub fn eval<F>(&self, f: &F, level: usize) -> Complex64
    where
        F: Fn(Complex64) -> Complex64 + Sync,
    {
        midpoint_polar(f, self.r_min, self.r_max, self.nr << level, self.nphi << level)
    }
}

/// Direction of a finite difference.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Direction {
    /// `d/dx`
    Real,
    /// `d/dy`
    Imag,
    /// `d/dz = (d/dx - i d/dy) / 2`
    Holomorphic,
    /// `d/dz-bar = (d/dx + i d/dy) / 2`
    Antiholomorphic,
    /// `(f(z + h d) - f(z - h d)) / 2h`
    Along(Complex64),
}

fn central<F: Fn(Complex64) -> Complex64>(f: &F, z: Complex64, dir: Direction, h: f64) -> Complex64 {
    let d = |e: Complex64| (f(z + h * e) - f(z - h * e)) / (2.0 * h);
    let i = Complex64::new(0.0, 1.0);
    match dir {
        Direction::Real => d(Complex64::new(1.0, 0.0)),
        Direction::Imag => d(i),
        Direction::Holomorphic => 0.5 * (d(Complex64::new(1.0, 0.0)) - i * d(i)),
        Direction::Antiholomorphic => 0.5 * (d(Complex64::new(1.0, 0.0)) + i * d(i)),
        Direction::Along(e) => d(e),
    }
}

/// Central difference of `f` at `z`, optionally Richardson-extrapolated.
pub fn finite_difference<F>(f: F, z: Complex64, dir: Direction, h: f64, richardson: bool) -> Complex64
where
    F: Fn(Complex64) -> Complex64,
{
    let d1 = central(&f, z, dir, h);
    if !richardson {
        return d1;
    }
    let d2 = central(&f, z, dir, h / 2.0);
    (4.0 * d2 - d1) / 3.0
}

/// `-(1/pi) iint g(zeta)/(zeta - lambda)` over `r_min < |zeta| < r_max` by
/// the midpoint rule after subtracting `g(lambda)`, whose transform over the
/// annulus is known in closed form. The cell holding `lambda` is skipped.
pub fn midpoint_cauchy<F>(g: F, lambda: Complex64, r_min: f64, r_max: f64, nr: usize, nphi: usize) -> Complex64
where
    F: Fn(Complex64) -> Complex64 + Sync,
{
    let rho = lambda.norm();
    let inside = rho > r_min && rho < r_max;
    let g0 = if inside { g(lambda) } else { Complex64::new(0.0, 0.0) };
    let dr = (r_max - r_min) / nr as f64;
    let dphi = 2.0 * PI / nphi as f64;
    let rows: Vec<Complex64> = (0..nr)
        .into_par_iter()
        .map(|i| {
            let r = r_min + (i as f64 + 0.5) * dr;
            let area = r * dr * dphi;
            let mut acc = Complex64::new(0.0, 0.0);
            for j in 0..nphi {
                let c = Complex64::from_polar(r, (j as f64 + 0.5) * dphi);
                let d = c - lambda;
                if d.norm() < 1e-3 * dr.min(r * dphi) {
                    continue;
                }
                acc += (g(c) - g0) * area / d;
            }
            acc
        })
        .collect();
    let smooth = -rows.iter().sum::<Complex64>() / PI;
    smooth + g0 * annulus_indicator_transform(lambda, r_min, r_max)
}

/// `-(1/pi) iint_{r0 < |zeta| < r1} 1/(zeta - lambda)`.
pub fn annulus_indicator_transform(lambda: Complex64, r0: f64, r1: f64) -> Complex64 {
    let rho = lambda.norm();
    if rho <= r0 {
        Complex64::new(0.0, 0.0)
    } else if rho >= r1 {
        (r1 * r1 - r0 * r0) / lambda
    } else {
        lambda.conj() - r0 * r0 / lambda
    }
}

/// `int_a^b cos(theta) |sin 4 theta|^{-3/4} d theta` over one sector
/// `(a, b) = (k pi/4, (k+1) pi/4)`, by the substitution `s = w^4` from both
/// ends and a composite midpoint rule in `w`.
fn sector_integral(k: usize, n: usize) -> f64 {
    let a = k as f64 * PI / 4.0;
    let half = PI / 8.0;
    let wmax = half.powf(0.25);
    let mut total = 0.0;
    for (theta0, dir) in [(a, 1.0), (a + PI / 4.0, -1.0)] {
        let h = wmax / n as f64;
        let mut acc = 0.0;
        for i in 0..n {
            let w = (i as f64 + 0.5) * h;
            let s = w.powi(4);
            let theta = theta0 + dir * s;
            let sinc = (4.0 * s).sin() / (4.0 * s);
            // ds = 4 w^3 dw, |sin 4 theta| = sin 4 s, (4 s)^{-3/4} 4 w^3 = 4^{1/4}
            acc += theta.cos() * 4f64.powf(0.25) * sinc.powf(-0.75);
        }
        total += acc * h;
    }
    total
}

/// Level-set integral `int x dw` over `{xy(x^2-y^2) = level_sign}` in the
/// half-plane `x < 0` (`left = true`) or `x > 0`, from the polar form
/// `4^{-1/4} int cos(theta) |sin 4 theta|^{-3/4} d theta`.
pub fn polar_level_integral(level_sign: f64, left: bool, n: usize) -> f64 {
    let mut total = 0.0;
    for k in 0..8 {
        let mid = (k as f64 + 0.5) * PI / 4.0;
        let s4 = (4.0 * mid).sin();
        let c = mid.cos();
        if s4 * level_sign > 0.0 && ((c < 0.0) == left) {
            // Richardson on the midpoint rule
            let a = sector_integral(k, n);
            let b = sector_integral(k, 2 * n);
            total += (4.0 * b - a) / 3.0;
        }
    }
    total * 4f64.powf(-0.25)
}
