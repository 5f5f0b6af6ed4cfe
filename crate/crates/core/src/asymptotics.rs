//! Leading-order behaviour of `I(t, u)` at the cusp `u = -18`.
//!
//! At `u = -18` the stationary points `zeta = +-1` are fourfold degenerate.
//! Near each of them the holomorphic chart `eta = (c rho(zeta))^{1/4} (zeta - c)`
//! turns the phase into `S = c (eta^4 - conj(eta)^4) = 8 i c s(x, y)` with
//! `eta = x + i y` and `s = x y (x^2 - y^2)`. The coefficient of `t^{-3/4}` is
//! then assembled from one-sided derivatives of `f` at `+-1` and the
//! Gelfand-Leray integrals of `x` over the level curves `s = +-1`:
//!
//! ```text
//! C = 4 g 8^{-3/4} G(3/4) [ f'(1) (J+ e^{3i pi/8} + J- e^{-3i pi/8})
//!                         - f'(-1) (J+ e^{-3i pi/8} + J- e^{3i pi/8}) ]
//! ```
//!
//! with `g = 6^{-3/4}`, `G` the gamma function and `f'(c)` the limit of
//! `d f / d conj(zeta)` from inside the unit disk.

use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;
use statrs::function::gamma::gamma;
use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::linearized::{integral_i, LinearOptions};
use crate::phase::phase_value;
use crate::quadrature::gauss_legendre;
use crate::scattering::ScatteringData;

/// The cusp where the chart applies.
pub const U_HAT: Complex64 = Complex64 { re: -18.0, im: 0.0 };

/// Normal-form chart around a degenerate stationary point `c = +-1` of `S(-18, .)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct NormalFormChart {
    pub center: f64,
    /// `|zeta - center|` up to which the chart and its inverse are guaranteed
    pub valid_radius: f64,
}

/// Chart centered at `+1` or `-1`.
pub fn build_chart(center: f64) -> Result<NormalFormChart> {
    if center != 1.0 && center != -1.0 {
        return Err(Error::Domain(format!("chart center must be +1 or -1, got {center}")));
    }
    Ok(NormalFormChart { center, valid_radius: 0.25 })
}

impl NormalFormChart {
    /// `P(zeta) = -9 zeta - 9/zeta + zeta^3 + zeta^-3 + 16 c`.
    pub fn p(&self, zeta: Complex64) -> Complex64 {
        let inv = zeta.inv();
        -9.0 * zeta - 9.0 * inv + zeta.powi(3) + inv.powi(3) + 16.0 * self.center
    }

    /// `rho(zeta) = (zeta^2 + 4 c zeta + 1) / zeta^3`, so that `P = rho (zeta - c)^4`.
    pub fn rho(&self, zeta: Complex64) -> Complex64 {
        (zeta * zeta + 4.0 * self.center * zeta + 1.0) / zeta.powi(3)
    }

    fn rho_d(&self, zeta: Complex64) -> Complex64 {
        let z3 = zeta.powi(3);
        (2.0 * zeta + 4.0 * self.center) / z3 - 3.0 * (zeta * zeta + 4.0 * self.center * zeta + 1.0) / (z3 * zeta)
    }

    /// Largest admissible `|eta|`.
    pub fn eta_radius(&self) -> f64 {
        // |eta'| >= 6^{1/4} / 2 on the validity disk
        0.5 * 6f64.powf(0.25) * self.valid_radius
    }

    /// `eta(zeta)`, with the principal fourth root of `c rho` (close to 6).
    pub fn eta(&self, zeta: Complex64) -> Result<Complex64> {
        if (zeta - self.center).norm() > self.valid_radius {
            return Err(Error::Domain(format!("zeta = {zeta} outside the chart around {}", self.center)));
        }
        Ok(self.eta_unchecked(zeta))
    }

    fn eta_unchecked(&self, zeta: Complex64) -> Complex64 {
        (self.center * self.rho(zeta)).powf(0.25) * (zeta - self.center)
    }

    fn eta_d(&self, zeta: Complex64) -> Complex64 {
        let q = self.center * self.rho(zeta);
        let q14 = q.powf(0.25);
        q14 + (zeta - self.center) * 0.25 * q14 / q * self.center * self.rho_d(zeta)
    }

    /// Inverse chart `phi(eta)` by Newton iteration.
    pub fn zeta(&self, eta: Complex64) -> Result<Complex64> {
        if eta.norm() > self.eta_radius() {
            return Err(Error::Domain(format!("eta = {eta} outside the chart radius {}", self.eta_radius())));
        }
        let mut z = self.center + eta / 6f64.powf(0.25);
        for _ in 0..50 {
            let r = self.eta_unchecked(z) - eta;
            if r.norm() < 1e-15 * (1.0 + eta.norm()) {
                return Ok(z);
            }
            z -= r / self.eta_d(z);
            if !z.is_finite() || (z - self.center).norm() > 2.0 * self.valid_radius {
                break;
            }
        }
        let r = (self.eta_unchecked(z) - eta).norm();
        if r < 1e-13 {
            return Ok(z);
        }
        Err(Error::Convergence { what: format!("inverse chart at eta = {eta}"), residual: r })
    }

    /// `d eta / d zeta` at the center.
    pub fn derivative_at_center(&self) -> Complex64 {
        self.eta_d(Complex64::new(self.center, 0.0))
    }
}

/// `c (eta^4 - conj(eta)^4)`, the phase `S(-18, phi(eta))` in chart coordinates.
pub fn phase_in_chart(chart: &NormalFormChart, eta: Complex64) -> Result<Complex64> {
    if eta.norm() > chart.eta_radius() {
        return Err(Error::Domain(format!("eta = {eta} outside the chart radius {}", chart.eta_radius())));
    }
    let e4 = eta.powi(4);
    Ok(chart.center * Complex64::new(0.0, 2.0 * e4.im))
}

/// Check `phase_in_chart` against the phase itself at `phi(eta)`; returns the relative error.
pub fn chart_consistency(chart: &NormalFormChart, eta: Complex64) -> Result<f64> {
    let a = phase_in_chart(chart, eta)?;
    let b = phase_value(U_HAT, chart.zeta(eta)?)?;
    Ok((a - b).norm() / a.norm().max(b.norm()).max(f64::MIN_POSITIVE))
}

/// Half plane of the `eta` coordinate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum HalfPlane {
    /// `x < 0`, the image of the inside of the unit disk near `+1`
    Left,
    /// `x > 0`
    Right,
}

/// `J+ = int x w` over `{s = 1}` and `J- = int x w` over `{s = -1}` in one half plane.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LevelSetIntegrals {
    pub half_plane: HalfPlane,
    pub j_plus: f64,
    pub j_minus: f64,
    /// change under halving the tracer step
    pub estimated_error: f64,
}

/// Tracer settings.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TracerOptions {
    /// arc length per step, scaled down by curvature
    pub step: f64,
    /// tracing stops once `|x| + |y|` exceeds this
    pub truncation: f64,
}

impl Default for TracerOptions {
    fn default() -> Self {
        TracerOptions { step: 0.01, truncation: 12.0 }
    }
}

fn level(p: [f64; 2]) -> f64 {
    let [x, y] = p;
    x * y * (x * x - y * y)
}

fn grad(p: [f64; 2]) -> [f64; 2] {
    let [x, y] = p;
    [3.0 * x * x * y - y * y * y, x * x * x - 3.0 * x * y * y]
}

// Hamiltonian flow of s: along it the Gelfand-Leray form is d tau.
fn flow(p: [f64; 2], dir: f64) -> [f64; 2] {
    let g = grad(p);
    [-dir * g[1], dir * g[0]]
}

fn curvature(p: [f64; 2]) -> f64 {
    let [x, y] = p;
    let [sx, sy] = grad(p);
    let (sxx, sxy, syy) = (6.0 * x * y, 3.0 * (x * x - y * y), -6.0 * x * y);
    let g2 = sx * sx + sy * sy;
    (sxx * sy * sy - 2.0 * sxy * sx * sy + syy * sx * sx).abs() / (g2 * g2.sqrt())
}

fn project(mut p: [f64; 2], c: f64) -> Result<[f64; 2]> {
    for _ in 0..30 {
        let r = level(p) - c;
        if r.abs() < 1e-14 * c.abs().max(1.0) {
            return Ok(p);
        }
        let g = grad(p);
        let g2 = g[0] * g[0] + g[1] * g[1];
        p = [p[0] - r * g[0] / g2, p[1] - r * g[1] / g2];
    }
    if (level(p) - c).abs() < 1e-11 {
        return Ok(p);
    }
    Err(Error::Tracing { x: p[0], y: p[1] })
}

/// `4^{-1/4} int_0^delta cos(theta_a + dir s) |sin 4 s|^{-3/4} ds`, via `s = w^4`.
fn tail(theta_a: f64, dir: f64, delta: f64) -> f64 {
    let (x, w) = gauss_legendre(16);
    let top = delta.powf(0.25);
    let mut acc = 0.0;
    for (xi, wi) in x.iter().zip(&w) {
        let ww = 0.5 * top * (xi + 1.0);
        let s = ww.powi(4);
        let sinc = if s == 0.0 { 1.0 } else { (4.0 * s).sin() / (4.0 * s) };
        acc += wi * (theta_a + dir * s).cos() * sinc.powf(-0.75);
    }
    acc * 0.5 * top
}

/// `int x d tau` along one branch of the curve in sector `k`, from its
/// midpoint to the asymptote, for the flow direction `dir`.
fn trace_branch(k: usize, c: f64, dir: f64, opts: &TracerOptions) -> Result<f64> {
    let mid = (k as f64 + 0.5) * PI / 4.0;
    let r0 = 4f64.powf(0.25);
    let mut p = project([r0 * mid.cos(), r0 * mid.sin()], c)?;
    let mut acc = 0.0;
    let mut steps = 0usize;
    while p[0].abs() + p[1].abs() <= opts.truncation {
        steps += 1;
        if steps > 50_000_000 {
            return Err(Error::Tracing { x: p[0], y: p[1] });
        }
        let g = grad(p);
        let gn = (g[0] * g[0] + g[1] * g[1]).sqrt();
        let h_arc = opts.step * (1.0 / curvature(p).max(1e-300)).min(1.0 + (p[0] * p[0] + p[1] * p[1]).sqrt());
        let dt = h_arc / gn;
        // RK4 on (p, int x d tau)
        let f = |q: [f64; 2]| flow(q, dir);
        let k1 = f(p);
        let p2 = [p[0] + 0.5 * dt * k1[0], p[1] + 0.5 * dt * k1[1]];
        let k2 = f(p2);
        let p3 = [p[0] + 0.5 * dt * k2[0], p[1] + 0.5 * dt * k2[1]];
        let k3 = f(p3);
        let p4 = [p[0] + dt * k3[0], p[1] + dt * k3[1]];
        let k4 = f(p4);
        let next =
            [p[0] + dt / 6.0 * (k1[0] + 2.0 * k2[0] + 2.0 * k3[0] + k4[0]), p[1] + dt / 6.0 * (k1[1] + 2.0 * k2[1] + 2.0 * k3[1] + k4[1])];
        acc += dt / 6.0 * (p[0] + 2.0 * p2[0] + 2.0 * p3[0] + p4[0]);
        p = project(next, c)?;
    }
    // the remaining piece lies beyond the truncation, near the asymptote theta_a
    let theta = p[1].atan2(p[0]);
    let a0 = k as f64 * PI / 4.0;
    let theta = a0 + (theta - a0).rem_euclid(2.0 * PI);
    let a1 = a0 + PI / 4.0;
    if !(theta > a0 && theta < a1) {
        return Err(Error::Tracing { x: p[0], y: p[1] });
    }
    let (theta_a, delta) = if theta - a0 < a1 - theta { (a0, theta - a0) } else { (a1, a1 - theta) };
    let side = if theta > theta_a { 1.0 } else { -1.0 };
    Ok(acc + tail(theta_a, side, delta))
}

fn sector_sum(c: f64, half: HalfPlane, opts: &TracerOptions) -> Result<f64> {
    let sectors: Vec<usize> = (0..8)
        .filter(|k| {
            let mid = (*k as f64 + 0.5) * PI / 4.0;
            (4.0 * mid).sin() * c > 0.0 && ((mid.cos() < 0.0) == (half == HalfPlane::Left))
        })
        .collect();
    let parts: Vec<f64> =
        sectors.par_iter().flat_map_iter(|k| [(*k, 1.0), (*k, -1.0)]).map(|(k, d)| trace_branch(k, c, d, opts)).collect::<Result<_>>()?;
    Ok(parts.iter().sum())
}

/// `J+` and `J-` over the given half plane, with default tracer settings.
pub fn gelfand_leray_integrals(half: HalfPlane) -> Result<LevelSetIntegrals> {
    gelfand_leray_integrals_with(half, &TracerOptions::default())
}

/// As [`gelfand_leray_integrals`]; the result uses step `opts.step / 2` and
/// the error estimate compares against step `opts.step`.
pub fn gelfand_leray_integrals_with(half: HalfPlane, opts: &TracerOptions) -> Result<LevelSetIntegrals> {
    if !(opts.step > 0.0) || !(opts.truncation > 2.0) {
        return Err(Error::Config(format!("invalid tracer options {opts:?}")));
    }
    let fine = TracerOptions { step: opts.step / 2.0, ..*opts };
    let jp = sector_sum(1.0, half, &fine)?;
    let jm = sector_sum(-1.0, half, &fine)?;
    let jp0 = sector_sum(1.0, half, opts)?;
    let jm0 = sector_sum(-1.0, half, opts)?;
    let estimated_error = (jp - jp0).abs().max((jm - jm0).abs());
    Ok(LevelSetIntegrals { half_plane: half, j_plus: jp, j_minus: jm, estimated_error })
}

/// `lim d f / d conj(zeta)` at `c = +-1` from inside the unit disk, `-pi b(c) / (2c)`.
pub fn f_prime_limits(data: &ScatteringData, center: f64) -> Result<Complex64> {
    if center != 1.0 && center != -1.0 {
        return Err(Error::Domain(format!("center must be +1 or -1, got {center}")));
    }
    let b = data.b(Complex64::new(center, 0.0))?;
    if !b.is_finite() {
        return Err(Error::Domain(format!("b({center}) is not finite")));
    }
    Ok(-PI * b / (2.0 * center))
}

/// Leading coefficient `C` of `t^{3/4} I(t, -18)` from precomputed level-set integrals.
pub fn constant_c_with(data: &ScatteringData, j: &LevelSetIntegrals) -> Result<Complex64> {
    let fp = f_prime_limits(data, 1.0)?;
    let fm = f_prime_limits(data, -1.0)?;
    let e = Complex64::from_polar(1.0, 3.0 * PI / 8.0);
    let bracket = fp * (j.j_plus * e + j.j_minus * e.conj()) - fm * (j.j_plus * e.conj() + j.j_minus * e);
    let pref = 4.0 * 6f64.powf(-0.75) * 8f64.powf(-0.75) * gamma(0.75);
    Ok(pref * bracket)
}

/// Leading coefficient `C` of `t^{3/4} I(t, -18)`.
pub fn constant_c(data: &ScatteringData) -> Result<Complex64> {
    let j = gelfand_leray_integrals(HalfPlane::Left)?;
    constant_c_with(data, &j)
}

/// One row of the optimality table.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct OptimalityRow {
    pub t: f64,
    /// `t^{3/4} I(t, -18)`
    pub scaled: Complex64,
    pub c: Complex64,
    /// `|scaled - C| / |C|` (absolute gap when `C = 0`)
    pub gap: f64,
}

/// `t^{3/4} I(t, -18)` against `C` for increasing `t >= 8`.
pub fn optimality_check(data: &ScatteringData, t_list: &[f64], opts: &LinearOptions) -> Result<Vec<OptimalityRow>> {
    if t_list.is_empty() || t_list.windows(2).any(|w| !(w[1] > w[0])) || t_list.iter().any(|t| !(*t >= 8.0)) {
        return Err(Error::Config(format!("t list must be increasing with every t >= 8, got {t_list:?}")));
    }
    let c = if data.is_zero() { Complex64::new(0.0, 0.0) } else { constant_c(data)? };
    let rows: Vec<OptimalityRow> = t_list
        .par_iter()
        .map(|&t| {
            let scaled = integral_i(data, t, U_HAT, opts)? * t.powf(0.75);
            let d = (scaled - c).norm();
            let gap = if c.norm() > 0.0 { d / c.norm() } else { d };
            Ok(OptimalityRow { t, scaled, c, gap })
        })
        .collect::<Result<_>>()?;
    Ok(rows)
}
