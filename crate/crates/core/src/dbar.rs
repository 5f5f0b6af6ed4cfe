//! Reconstruction of `v(z, t)` from scattering data through the dbar problem.
//!
//! With `r(z, l, t) = r(l) e^{S(z, t; l)}` the operators are
//!
//! ```text
//! (A f)(l) = dbar^{-1}[ r conj(f) ](l)
//! (B f)(l) = dbar^{-1}[ (d_z r) conj(f) ](l),   d_z r = -(conj(zeta) - 1/zeta) r / 2
//! ```
//!
//! Both are additive and antilinear; `Bbar` is `B` with `d_{conj z} r =
//! (zeta - 1/conj(zeta)) r / 2`. The solution `mu` of `mu = 1 + A mu` and its
//! derivative `nu = d_z mu` are approximated by truncated Neumann series, and
//! `v = -2 nu_{-1}` where `nu_{-1}` is the coefficient of `1/l` at infinity,
//! `(1/pi) iint` of the density.
//!
//! Fields live on the support of `r`, which is all the Cauchy transform
//! needs, and never leave the grid they were created on.

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::linearized::integration_grid;
use crate::phase::phase_psi;
use crate::quadrature::{integrate_values, AnnularGrid, CauchyTransform, GridSpec, Oscillation};
use crate::scattering::ScatteringData;

const ZERO: Complex64 = Complex64 { re: 0.0, im: 0.0 };
const ONE: Complex64 = Complex64 { re: 1.0, im: 0.0 };

/// Where a field was computed.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FieldContext {
    pub z: Complex64,
    pub t: f64,
    pub depth: usize,
}

/// Nodal values on a shared grid.
#[derive(Debug, Clone)]
pub struct LambdaField {
    pub grid: Arc<AnnularGrid>,
    pub values: Vec<Complex64>,
    pub context: FieldContext,
}

impl LambdaField {
    pub fn constant(grid: &Arc<AnnularGrid>, value: Complex64, context: FieldContext) -> Self {
        LambdaField { grid: grid.clone(), values: vec![value; grid.len()], context }
    }

    pub fn from_values(grid: &Arc<AnnularGrid>, values: Vec<Complex64>, context: FieldContext) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::GridMismatch);
        }
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite { index: i, point: grid.node(i).point });
        }
        Ok(LambdaField { grid: grid.clone(), values, context })
    }

    /// Largest nodal modulus.
    pub fn max_norm(&self) -> f64 {
        self.values.iter().map(|v| v.norm()).fold(0.0, f64::max)
    }

    /// `self += other`; both must live on the same grid object.
    pub fn add_assign(&mut self, other: &LambdaField) -> Result<()> {
        if !Arc::ptr_eq(&self.grid, &other.grid) {
            return Err(Error::GridMismatch);
        }
        self.values.par_iter_mut().zip(other.values.par_iter()).for_each(|(a, b)| *a += b);
        Ok(())
    }

    /// `c * self`.
    pub fn scaled(&self, c: Complex64) -> LambdaField {
        LambdaField { values: self.values.iter().map(|v| c * v).collect(), ..self.clone() }
    }
}

/// Grid settings for the reconstruction.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DbarOptions {
    /// base grid; clamped to the support of the data
    pub grid: GridSpec,
    pub oscillation: Oscillation,
    pub budget: usize,
    pub zone_radius: f64,
    pub zone_depth: u32,
    pub depth: usize,
}

impl Default for DbarOptions {
    fn default() -> Self {
        DbarOptions {
            grid: GridSpec::new(0.05, 6.0, 8, 8).with_order(16),
            oscillation: Oscillation::TRANSFORM,
            budget: 60_000_000,
            zone_radius: 0.02,
            zone_depth: 1,
            depth: 3,
        }
    }
}

/// Grid adapted to the phase at `(z, t)`, shared by every field of one reconstruction.
pub fn dbar_grid(data: &ScatteringData, z: Complex64, t: f64, opts: &DbarOptions) -> Result<Arc<AnnularGrid>> {
    let g = integration_grid(data, z, t, &opts.grid, &opts.oscillation, opts.budget, opts.zone_radius, opts.zone_depth)?;
    Ok(Arc::new(g))
}

#[derive(Clone, Copy, PartialEq)]
enum Kernel {
    A,
    B,
    BBar,
}

fn check_zt(z: Complex64, t: f64) -> Result<()> {
    if !z.is_finite() || !t.is_finite() {
        return Err(Error::Domain(format!("non-finite (z, t) = ({z}, {t})")));
    }
    Ok(())
}

/// `r e^S conj(f)` (kernel A) or `d_z r e^S conj(f)` (kernel B) at every node.
fn density(data: &ScatteringData, z: Complex64, t: f64, grid: &AnnularGrid, field: &[Complex64], kernel: Kernel) -> Vec<Complex64> {
    let mut out = vec![ZERO; grid.len()];
    if data.is_zero() {
        return out;
    }
    let mut chunks: Vec<(usize, &mut [Complex64])> = Vec::with_capacity(grid.rings.len());
    let mut rest: &mut [Complex64] = &mut out;
    for (k, ring) in grid.rings.iter().enumerate() {
        let (head, tail) = rest.split_at_mut(ring.m);
        chunks.push((k, head));
        rest = tail;
    }
    chunks.into_par_iter().for_each(|(k, o)| {
        let ring = &grid.rings[k];
        let tab = grid.table(ring.m);
        let r = ring.r;
        let sgn = if r < 1.0 {
            1.0
        } else if r > 1.0 {
            -1.0
        } else {
            0.0
        };
        if sgn == 0.0 {
            return;
        }
        data.b_on_ring(r, &tab.cos, &tab.sin, o);
        let a = r - 1.0 / r;
        let f = &field[ring.offset..ring.offset + ring.m];
        for j in 0..ring.m {
            let (c, s) = (tab.cos[j], tab.sin[j]);
            let zeta = Complex64::new(r * c, r * s);
            let psi = phase_psi(z, t, a, c, s, s * (3.0 - 4.0 * s * s));
            // r(zeta) = pi sgn b / conj(zeta)
            let mut w = PI * sgn * o[j] / zeta.conj() * Complex64::from_polar(1.0, psi);
            match kernel {
                Kernel::A => {}
                Kernel::B => w *= -0.5 * (zeta.conj() - zeta.inv()),
                Kernel::BBar => w *= 0.5 * (zeta - zeta.conj().inv()),
            }
            o[j] = w * f[j].conj();
        }
    });
    out
}

fn transform(grid: &AnnularGrid, dens: Vec<Complex64>) -> Result<Vec<Complex64>> {
    Ok(CauchyTransform::from_values(grid, dens)?.all())
}

fn apply(data: &ScatteringData, z: Complex64, t: f64, field: &LambdaField, kernel: Kernel) -> Result<LambdaField> {
    check_zt(z, t)?;
    let grid = &field.grid;
    if data.is_zero() {
        return Ok(LambdaField::constant(grid, ZERO, FieldContext { z, t, ..field.context }));
    }
    let d = density(data, z, t, grid, &field.values, kernel);
    Ok(LambdaField { grid: grid.clone(), values: transform(grid, d)?, context: FieldContext { z, t, ..field.context } })
}

/// `A_{z,t} f`.
pub fn apply_a(data: &ScatteringData, z: Complex64, t: f64, field: &LambdaField) -> Result<LambdaField> {
    apply(data, z, t, field, Kernel::A)
}

/// `B_{z,t} f`.
pub fn apply_b(data: &ScatteringData, z: Complex64, t: f64, field: &LambdaField) -> Result<LambdaField> {
    apply(data, z, t, field, Kernel::B)
}

/// `dbar^{-1}[(d_{conj z} r) conj(f)]`.
pub fn apply_b_bar(data: &ScatteringData, z: Complex64, t: f64, field: &LambdaField) -> Result<LambdaField> {
    apply(data, z, t, field, Kernel::BBar)
}

/// Nodal density `r e^S conj(f)` of `A f`.
pub fn density_a(data: &ScatteringData, z: Complex64, t: f64, field: &LambdaField) -> Result<Vec<Complex64>> {
    check_zt(z, t)?;
    Ok(density(data, z, t, &field.grid, &field.values, Kernel::A))
}

/// Nodal density `(d_z r) e^S conj(f)` of `B f`.
pub fn density_b(data: &ScatteringData, z: Complex64, t: f64, field: &LambdaField) -> Result<Vec<Complex64>> {
    check_zt(z, t)?;
    Ok(density(data, z, t, &field.grid, &field.values, Kernel::B))
}

/// Coefficient of `1/l` in `dbar^{-1}[density](l)` as `l -> infinity`: `(1/pi) iint density`.
pub fn coeff_at_infinity(grid: &AnnularGrid, density: &[Complex64]) -> Result<Complex64> {
    Ok(integrate_values(density, grid)? / PI)
}

fn coeff(data: &ScatteringData, z: Complex64, t: f64, field: &LambdaField, kernel: Kernel) -> Result<Complex64> {
    coeff_at_infinity(&field.grid, &density(data, z, t, &field.grid, &field.values, kernel))
}

/// Declare divergence when two consecutive increments shrink by less than 1.1.
fn check_contraction(increments: &[f64]) -> Result<()> {
    let mut bad = 0;
    for w in increments.windows(2) {
        if w[1] * 1.1 > w[0] && w[1] > 1e-300 {
            bad += 1;
            if bad >= 2 {
                return Err(Error::Divergence { increments: increments.to_vec() });
            }
        } else {
            bad = 0;
        }
    }
    Ok(())
}

/// Truncated Neumann series for `mu`.
#[derive(Debug, Clone)]
pub struct MuSolution {
    pub field: LambdaField,
    /// max-norms of `A^{2k}(1 + A 1)`, `k = 0..=depth`
    pub increments: Vec<f64>,
    /// norm of the last increment
    pub tail_estimate: f64,
    /// coefficient of `1/l` at infinity
    pub mu_minus1: Complex64,
    /// `g` with `mu = 1 + A g`; evaluates `mu` off the grid
    source: LambdaField,
    data: ScatteringData,
}

impl MuSolution {
    /// `mu(l)` at any `l`, from `1 + dbar^{-1}[r e^S conj(g)]`.
    pub fn at(&self, lambdas: &[Complex64]) -> Result<Vec<Complex64>> {
        let c = self.field.context;
        let d = density(&self.data, c.z, c.t, &self.field.grid, &self.source.values, Kernel::A);
        let ct = CauchyTransform::from_values(&self.field.grid, d)?;
        Ok(lambdas.iter().map(|l| ONE + ct.at(*l)).collect())
    }
}

struct Series {
    mu: LambdaField,
    source: Option<LambdaField>,
    increments: Vec<f64>,
    mu_minus1: Complex64,
}

// a_0 = 1, a_j = A a_{j-1}; mu = sum_{j <= 2D+1} a_j = 1 + A(sum_{j <= 2D} a_j)
fn mu_series(data: &ScatteringData, z: Complex64, t: f64, grid: &Arc<AnnularGrid>, depth: usize, keep_source: bool) -> Result<Series> {
    let ctx = FieldContext { z, t, depth };
    let mut a = LambdaField::constant(grid, ONE, ctx);
    let mut g = a.clone();
    let mut increments = Vec::with_capacity(depth + 1);
    for j in 1..=2 * depth + 1 {
        let next = apply_a(data, z, t, &a)?;
        if j % 2 == 1 {
            // a holds a_{j-1}
            let inc = a.values.par_iter().zip(next.values.par_iter()).map(|(x, y)| (x + y).norm()).reduce(|| 0.0, f64::max);
            increments.push(inc);
            check_contraction(&increments)?;
        }
        if j <= 2 * depth {
            g.add_assign(&next)?;
        }
        a = next;
    }
    let mu_minus1 = coeff(data, z, t, &g, Kernel::A)?;
    // mu = g + a_{2D+1}
    let mut mu = g;
    let source = if keep_source { Some(mu.clone()) } else { None };
    mu.add_assign(&a)?;
    Ok(Series { mu, source, increments, mu_minus1 })
}

/// `mu = sum_{k <= depth} A^{2k} (1 + A 1)` on `grid`.
pub fn solve_mu(data: &ScatteringData, z: Complex64, t: f64, grid: &Arc<AnnularGrid>, depth: usize) -> Result<MuSolution> {
    check_zt(z, t)?;
    let s = mu_series(data, z, t, grid, depth, true)?;
    let tail_estimate = *s.increments.last().unwrap();
    Ok(MuSolution {
        field: s.mu,
        tail_estimate,
        increments: s.increments,
        mu_minus1: s.mu_minus1,
        source: s.source.unwrap(),
        data: data.clone(),
    })
}

/// Output of [`reconstruct_v`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ReconstructionResult {
    pub z: Complex64,
    pub t: f64,
    pub v: Complex64,
    /// coefficient of `B 1`
    pub beta1: Complex64,
    /// coefficient of `A B 1`
    pub alpha1: Complex64,
    /// everything else in `nu_{-1}`
    pub remainder_q: Complex64,
    /// coefficient of `1/l` in `mu`
    pub mu_minus1: Complex64,
    pub depth: usize,
    /// `2 |last increment of nu_{-1}|` plus the last `mu` increment
    pub series_tail_estimate: f64,
    pub nodes: usize,
}

/// `v(z, t) = -2 (beta1 + alpha1 + q)`.
///
/// `nu = d_z mu` and `eta = d_{conj z} mu` solve `nu = B mu + A eta`,
/// `eta = Bbar mu + A nu`, hence `nu = sum_{k <= depth} A^{2k} (B mu + A Bbar mu)`.
/// `beta1` and `alpha1` are the coefficients of `B 1` and `A Bbar 1`.
pub fn reconstruct_v(data: &ScatteringData, z: Complex64, t: f64, grid: &Arc<AnnularGrid>, depth: usize) -> Result<ReconstructionResult> {
    check_zt(z, t)?;
    if depth < 1 {
        return Err(Error::Config("reconstruction needs depth >= 1".into()));
    }
    let ctx = FieldContext { z, t, depth };
    if data.is_zero() {
        return Ok(ReconstructionResult {
            z,
            t,
            v: ZERO,
            beta1: ZERO,
            alpha1: ZERO,
            remainder_q: ZERO,
            mu_minus1: ZERO,
            depth,
            series_tail_estimate: 0.0,
            nodes: grid.len(),
        });
    }
    let one = LambdaField::constant(grid, ONE, ctx);
    let beta1 = coeff(data, z, t, &one, Kernel::B)?;
    let bb1 = apply(data, z, t, &one, Kernel::BBar)?;
    drop(one);
    let alpha1 = coeff(data, z, t, &bb1, Kernel::A)?;
    drop(bb1);

    let s = mu_series(data, z, t, grid, depth, false)?;
    let mu_tail = *s.increments.last().unwrap();
    // w = B mu + A Bbar mu; its coefficient is read off the densities
    let bbmu = apply(data, z, t, &s.mu, Kernel::BBar)?;
    let mut c = coeff(data, z, t, &s.mu, Kernel::B)? + coeff(data, z, t, &bbmu, Kernel::A)?;
    let mut w = apply_b(data, z, t, &s.mu)?;
    drop(s.mu);
    w.add_assign(&apply_a(data, z, t, &bbmu)?)?;
    drop(bbmu);
    // nu = w + sum_k A^{2k} w, so nu_{-1} picks up coeff_A(A^{2k-1} w)
    let mut incs = vec![c.norm()];
    let mut last = ZERO;
    let mut h = w;
    for k in 1..=depth {
        h = apply_a(data, z, t, &h)?;
        last = coeff(data, z, t, &h, Kernel::A)?;
        c += last;
        incs.push(last.norm());
        check_contraction(&incs)?;
        if k < depth {
            h = apply_a(data, z, t, &h)?;
        }
    }
    drop(h);
    let remainder_q = c - beta1 - alpha1;
    let v = -2.0 * (beta1 + alpha1 + remainder_q);
    if !v.is_finite() {
        return Err(Error::NonFinite { index: 0, point: z });
    }
    Ok(ReconstructionResult {
        z,
        t,
        v,
        beta1,
        alpha1,
        remainder_q,
        mu_minus1: s.mu_minus1,
        depth,
        series_tail_estimate: 2.0 * last.norm() + mu_tail,
        nodes: grid.len(),
    })
}

/// [`reconstruct_v`] on a grid built from `opts`.
pub fn reconstruct_v_auto(data: &ScatteringData, z: Complex64, t: f64, opts: &DbarOptions) -> Result<ReconstructionResult> {
    check_zt(z, t)?;
    let grid = dbar_grid(data, z, t, opts)?;
    reconstruct_v(data, z, t, &grid, opts.depth)
}
