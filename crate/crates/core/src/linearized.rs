//! The linearized solution `v_lin(z, t) = -(2/pi) I(t, z/t)` and its decay.
//!
//! `I(t, u) = iint f(zeta) e^{t S(u, zeta)}` is computed on grids adapted to
//! the local phase rates, so its cost grows with `|z|` and `t`. For
//! symmetric data (`b(-l) = conj b(l)`, `b(1/conj l) = conj b(l)`) the
//! integrand over the inner disk and over the lower half plane are conjugate
//! images of the one over `|zeta| > 1, 0 <= arg zeta < pi`, so `I` is real and
//! only that quarter is sampled.

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::phase::{boundary_curve, cusps, phase_psi, stationary_points};
use crate::quadrature::{build_adapted_grid, oscillation_check, pairwise_sum, AnnularGrid, GridSpec, Oscillation, PhaseRates};
use crate::scattering::ScatteringData;

/// Bounds on the derivatives of `Psi(z, t; r, phi)` on a ring.
#[derive(Debug, Clone, Copy)]
pub struct ZtRates {
    pub z: Complex64,
    pub t: f64,
}

impl PhaseRates for ZtRates {
    fn radial_rate(&self, r: f64) -> f64 {
        let a = r - 1.0 / r;
        (self.z.norm() + 6.0 * self.t.abs() * (a * a + 1.0)) * (1.0 + 1.0 / (r * r))
    }

    fn angular_bandwidth(&self, r: f64) -> f64 {
        let a = r - 1.0 / r;
        a.abs() * self.z.norm() + 6.0 * self.t.abs() * (a * a * a + 3.0 * a).abs()
    }
}

/// Grid and resolution settings for the oscillatory integrals.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LinearOptions {
    /// base grid; `r_min`/`r_max` are further clamped to the data support
    pub grid: GridSpec,
    pub oscillation: Oscillation,
    /// node budget per integral
    pub budget: usize,
    /// radius of the refinement bands placed at stationary points and on `|zeta| = 1`
    pub zone_radius: f64,
    pub zone_depth: u32,
}

impl Default for LinearOptions {
    fn default() -> Self {
        LinearOptions {
            grid: GridSpec::new(0.05, 6.0, 8, 4).with_order(16),
            oscillation: Oscillation::INTEGRAL,
            budget: 400_000_000,
            zone_radius: 0.02,
            zone_depth: 1,
        }
    }
}

/// Radial range actually needed for `data`: the base range intersected with the support.
pub fn clamped_range(data: &ScatteringData, r_min: f64, r_max: f64) -> (f64, f64) {
    match data.effective_radius() {
        Some(rs) => ((1.0 / rs).max(r_min), rs.min(r_max)),
        None => (r_min, r_max),
    }
}

/// Grid adapted to the phase `S(z, t; .)`, with refinement at the stationary points.
pub fn integration_grid(
    data: &ScatteringData,
    z: Complex64,
    t: f64,
    base: &GridSpec,
    osc: &Oscillation,
    budget: usize,
    zone_radius: f64,
    zone_depth: u32,
) -> Result<AnnularGrid> {
    let (r0, r1) = clamped_range(data, base.r_min, base.r_max);
    let mut spec = GridSpec { r_min: r0, r_max: r1, refinement_zones: Vec::new(), ..base.clone() };
    spec.refinement_zones.extend(base.refinement_zones.iter().copied());
    if zone_depth > 0 {
        spec = spec.with_zone(Complex64::new(1.0, 0.0), zone_radius, zone_depth);
        if t != 0.0 {
            if let Ok(sa) = stationary_points(z / t) {
                for p in sa.zeta_points {
                    if p.norm() > r0 && p.norm() < r1 {
                        spec = spec.with_zone(p, zone_radius, zone_depth);
                    }
                }
            }
        }
    }
    build_adapted_grid(&spec, &ZtRates { z, t }, osc, budget)
}

fn options_grid(data: &ScatteringData, z: Complex64, t: f64, opts: &LinearOptions) -> Result<AnnularGrid> {
    integration_grid(data, z, t, &opts.grid, &opts.oscillation, opts.budget, opts.zone_radius, opts.zone_depth)
}

fn unresolved(grid: &AnnularGrid, z: Complex64, t: f64, osc: &Oscillation) -> Result<()> {
    if let Some(c) = oscillation_check(grid, &ZtRates { z, t }, osc) {
        return Err(Error::BudgetExceeded {
            needed: grid.len(),
            budget: grid.len(),
            r0: c.r0,
            r1: c.r1,
            radial_per_node: c.radial_per_node,
            angular_per_node: c.angular_per_node,
        });
    }
    Ok(())
}

fn check_inputs(t: f64, u: Complex64) -> Result<()> {
    if !t.is_finite() || !u.is_finite() {
        return Err(Error::Domain(format!("non-finite (t, u) = ({t}, {u})")));
    }
    Ok(())
}

/// `I(t, u)` on an adapted grid built from `opts`.
pub fn integral_i(data: &ScatteringData, t: f64, u: Complex64, opts: &LinearOptions) -> Result<Complex64> {
    check_inputs(t, u)?;
    if data.is_zero() {
        return Ok(Complex64::new(0.0, 0.0));
    }
    let z = u * t;
    let grid = options_grid(data, z, t, opts)?;
    integral_i_reduced(data, z, t, &grid)
}

/// `I(t, u)` on a caller-supplied grid, which must resolve the phase under `osc`.
pub fn integral_i_on(data: &ScatteringData, t: f64, u: Complex64, grid: &AnnularGrid, osc: &Oscillation) -> Result<Complex64> {
    check_inputs(t, u)?;
    let z = u * t;
    unresolved(grid, z, t, osc)?;
    integral_i_reduced(data, z, t, grid)
}

/// `iint g(zeta) e^{S(z, t; zeta)}` over a grid for an arbitrary weight `g`.
pub fn oscillatory_integral<G>(g: G, z: Complex64, t: f64, grid: &AnnularGrid) -> Result<Complex64>
where
    G: Fn(Complex64) -> Complex64 + Sync,
{
    crate::quadrature::sum_over_rings(grid, |_, ring, tab| {
        let r = ring.r;
        let a = r - 1.0 / r;
        let mut acc = Complex64::new(0.0, 0.0);
        for j in 0..ring.m {
            let (c, s) = (tab.cos[j], tab.sin[j]);
            let zeta = Complex64::new(r * c, r * s);
            let v = g(zeta);
            if !v.is_finite() {
                return Err(Error::NonFinite { index: ring.offset + j, point: zeta });
            }
            let psi = phase_psi(z, t, a, c, s, s * (3.0 - 4.0 * s * s));
            acc += v * Complex64::from_polar(1.0, psi);
        }
        Ok(acc * ring.node_weight())
    })
}

/// `I` over the whole grid with no use of symmetry.
pub fn integral_i_full(data: &ScatteringData, t: f64, u: Complex64, opts: &LinearOptions) -> Result<Complex64> {
    check_inputs(t, u)?;
    let z = u * t;
    let grid = options_grid(data, z, t, opts)?;
    oscillatory_sum(data, z, t, &grid, |_, _, _| Complex64::new(1.0, 0.0))
}

/// `J(t, u) = iint 3 (zeta / conj zeta) f(zeta) e^{t S(u, zeta)}`.
pub fn integral_j(data: &ScatteringData, t: f64, u: Complex64, opts: &LinearOptions) -> Result<Complex64> {
    check_inputs(t, u)?;
    if data.is_zero() {
        return Ok(Complex64::new(0.0, 0.0));
    }
    let z = u * t;
    let grid = options_grid(data, z, t, opts)?;
    // zeta / conj zeta = e^{2 i phi}
    oscillatory_sum(data, z, t, &grid, |_, c, s| 3.0 * Complex64::new(c * c - s * s, 2.0 * c * s))
}

/// `sum w f(zeta) m(zeta) e^{i Psi}` over all nodes; `m(r, cos, sin)`.
fn oscillatory_sum<M>(data: &ScatteringData, z: Complex64, t: f64, grid: &AnnularGrid, m: M) -> Result<Complex64>
where
    M: Fn(f64, f64, f64) -> Complex64 + Sync,
{
    let parts: Vec<Complex64> = (0..grid.rings.len())
        .into_par_iter()
        .map(|k| {
            let ring = &grid.rings[k];
            let tab = grid.table(ring.m);
            let mut b = vec![Complex64::new(0.0, 0.0); ring.m];
            data.b_on_ring(ring.r, &tab.cos, &tab.sin, &mut b);
            let r = ring.r;
            let a = r - 1.0 / r;
            let fr = PI * (1.0 - r * r).abs() / (2.0 * r * r);
            let mut acc = Complex64::new(0.0, 0.0);
            for j in 0..ring.m {
                let (c, s) = (tab.cos[j], tab.sin[j]);
                let psi = phase_psi(z, t, a, c, s, s * (3.0 - 4.0 * s * s));
                let (ps, pc) = psi.sin_cos();
                acc += b[j] * m(r, c, s) * Complex64::new(pc, ps);
            }
            acc * fr * ring.node_weight()
        })
        .collect();
    let v = pairwise_sum(&parts);
    if !v.is_finite() {
        return Err(Error::NonFinite { index: 0, point: Complex64::new(f64::NAN, f64::NAN) });
    }
    Ok(v)
}

/// `2 Re iint_{|zeta|>1, 0 <= arg zeta < pi} (1 + r^-2) f e^{i Psi}`; node
/// `j + m/2` is the mirror image of node `j`.
fn integral_i_reduced(data: &ScatteringData, z: Complex64, t: f64, grid: &AnnularGrid) -> Result<Complex64> {
    let start = grid.rings.partition_point(|r| r.r < 1.0);
    let parts: Vec<f64> = (start..grid.rings.len())
        .into_par_iter()
        .map(|k| {
            let ring = &grid.rings[k];
            let tab = grid.table(ring.m);
            let m = ring.m;
            let (n, scale) = if m.is_multiple_of(2) { (m / 2, 2.0) } else { (m, 1.0) };
            let mut b = vec![Complex64::new(0.0, 0.0); n];
            data.b_on_ring(ring.r, &tab.cos[..n], &tab.sin[..n], &mut b);
            let r = ring.r;
            let a = r - 1.0 / r;
            let fr = PI * (r * r - 1.0) / (2.0 * r * r) * (1.0 + 1.0 / (r * r));
            let mut acc = 0.0;
            for j in 0..n {
                let (c, s) = (tab.cos[j], tab.sin[j]);
                let psi = phase_psi(z, t, a, c, s, s * (3.0 - 4.0 * s * s));
                let (ps, pc) = psi.sin_cos();
                acc += b[j].re * pc - b[j].im * ps;
            }
            scale * acc * fr * ring.node_weight()
        })
        .collect();
    let v: f64 = pairwise_sum(&parts.iter().map(|x| Complex64::new(*x, 0.0)).collect::<Vec<_>>()).re;
    if !v.is_finite() {
        return Err(Error::NonFinite { index: 0, point: Complex64::new(f64::NAN, f64::NAN) });
    }
    Ok(Complex64::new(v, 0.0))
}

/// `v_lin(z, t) = -(2/pi) I(t, z/t)`; at `t = 0` the phase is `S(z, 0; .)`.
pub fn linear_v(data: &ScatteringData, z: Complex64, t: f64, opts: &LinearOptions) -> Result<Complex64> {
    if !z.is_finite() || !t.is_finite() {
        return Err(Error::Domain(format!("non-finite (z, t) = ({z}, {t})")));
    }
    if data.is_zero() {
        return Ok(Complex64::new(0.0, 0.0));
    }
    let grid = options_grid(data, z, t, opts)?;
    Ok(-2.0 / PI * integral_i_reduced(data, z, t, &grid)?)
}

/// Default scan set: 24 rays x 20 radii with `|u| <= 30`, the three cusps, and
/// 36 points on the boundary curve.
pub fn default_u_grid() -> Vec<Complex64> {
    let mut out = Vec::with_capacity(24 * 20 + 3 + 36);
    for i in 0..20 {
        let rho = 1.5 * (i + 1) as f64;
        for j in 0..24 {
            out.push(Complex64::from_polar(rho, 2.0 * PI * j as f64 / 24.0));
        }
    }
    out.extend(cusps());
    for j in 0..36 {
        out.push(boundary_curve(2.0 * PI * (j as f64 + 0.5) / 36.0));
    }
    out
}

/// Result of [`sup_scan`].
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SupScan {
    pub t: f64,
    pub u_star: Complex64,
    /// `max |I(t, u)|` over the scan set
    pub sup: f64,
    pub values: Vec<(Complex64, Complex64)>,
}

/// `max_u |I(t, u)|` over `u_grid`; the first maximizer wins ties.
pub fn sup_scan(data: &ScatteringData, t: f64, u_grid: &[Complex64], opts: &LinearOptions) -> Result<SupScan> {
    if u_grid.is_empty() {
        return Err(Error::Config("empty u grid".into()));
    }
    let values: Vec<(Complex64, Complex64)> =
        u_grid.par_iter().map(|u| integral_i(data, t, *u, opts).map(|v| (*u, v))).collect::<Result<_>>()?;
    let mut best = 0;
    for (i, (_, v)) in values.iter().enumerate() {
        if v.norm() > values[best].1.norm() {
            best = i;
        }
    }
    Ok(SupScan { t, u_star: values[best].0, sup: values[best].1.norm(), values })
}

/// Least-squares power law `value ~ A (1+t)^p`, with or without the
/// `ln(3+t)` factor divided out first.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DecayFit {
    pub exponent: f64,
    pub with_log_correction: bool,
    pub intercept: f64,
    /// largest absolute residual of the log-log fit
    pub max_residual: f64,
    pub t_range: (f64, f64),
    pub n_points: usize,
}

/// Fit `ln(value) [- ln ln(3+t)]` against `ln(1+t)`; needs at least 5
/// samples with `t >= 1`.
pub fn decay_fit(samples: &[(f64, f64)], log_corrected: bool) -> Result<DecayFit> {
    if samples.len() < 5 {
        return Err(Error::Config(format!("decay fit needs at least 5 samples, got {}", samples.len())));
    }
    let mut xs = Vec::with_capacity(samples.len());
    let mut ys = Vec::with_capacity(samples.len());
    for &(t, v) in samples {
        if !(t >= 1.0) || !(v > 0.0) || !t.is_finite() || !v.is_finite() {
            return Err(Error::Config(format!("decay fit needs t >= 1 and positive values, got ({t}, {v})")));
        }
        xs.push((1.0 + t).ln());
        ys.push(if log_corrected { v.ln() - (3.0 + t).ln().ln() } else { v.ln() });
    }
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    if sxx == 0.0 {
        return Err(Error::Config("decay fit needs at least two distinct t".into()));
    }
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let p = sxy / sxx;
    let c = my - p * mx;
    let max_residual = xs.iter().zip(&ys).map(|(x, y)| (y - c - p * x).abs()).fold(0.0, f64::max);
    let t_min = samples.iter().map(|s| s.0).fold(f64::INFINITY, f64::min);
    let t_max = samples.iter().map(|s| s.0).fold(f64::NEG_INFINITY, f64::max);
    Ok(DecayFit {
        exponent: p,
        with_log_correction: log_corrected,
        intercept: c,
        max_residual,
        t_range: (t_min, t_max),
        n_points: samples.len(),
    })
}
