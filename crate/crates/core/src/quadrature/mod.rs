//! Annular product grids and the 2D integration primitives built on them.
//!
//! All integrals over the plane are truncated to an annulus
//! `r_min <= |zeta| <= r_max` straddling the unit circle. The radial
//! direction uses composite Gauss-Legendre panels with the unit circle as a
//! panel edge (integrands inherited from the scattering data have a kink
//! there); the angular direction uses the equispaced trapezoid rule, which is
//! spectrally accurate for smooth periodic functions and lets the Cauchy
//! transform work mode by mode.
//!
//! Reductions are deterministic: every ring is summed sequentially and ring
//! partial sums are combined by a fixed pairwise tree, so results do not
//! depend on the number of worker threads.

mod cauchy;
mod gauss;
mod grid;

pub use cauchy::{cauchy_transform, cauchy_transform_all, CauchyTransform};
pub use gauss::{gauss_legendre, gauss_on};
pub use grid::{
    build_adapted_grid, build_grid, fft_size, oscillation_check, phase_variation, AngleTable, AnnularGrid, CellVariation, ComplexSample,
    Flat, GridSpec, Oscillation, PhaseRates, RadialPanel, RefinementZone, Ring,
};

use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{Error, Result};

/// Pairwise (tree) sum with a fixed association order.
pub fn pairwise_sum(xs: &[Complex64]) -> Complex64 {
    match xs.len() {
        0 => Complex64::new(0.0, 0.0),
        1 => xs[0],
        n if n <= 8 => xs.iter().sum(),
        n => {
            let (a, b) = xs.split_at(n / 2);
            pairwise_sum(a) + pairwise_sum(b)
        }
    }
}

/// Combine per-ring partial sums computed by `ring_sum(k, ring, table)`.
pub fn sum_over_rings<F>(grid: &AnnularGrid, ring_sum: F) -> Result<Complex64>
where
    F: Fn(usize, &Ring, &AngleTable) -> Result<Complex64> + Sync,
{
    let partials: Vec<Complex64> = (0..grid.rings.len())
        .into_par_iter()
        .map(|k| {
            let ring = &grid.rings[k];
            ring_sum(k, ring, grid.table(ring.m))
        })
        .collect::<Result<_>>()?;
    Ok(pairwise_sum(&partials))
}

/// `sum_i w_i g(zeta_i)`.
pub fn integrate<F>(g: F, grid: &AnnularGrid) -> Result<Complex64>
where
    F: Fn(Complex64) -> Complex64 + Sync,
{
    sum_over_rings(grid, |_, ring, t| {
        let mut acc = Complex64::new(0.0, 0.0);
        for j in 0..ring.m {
            let z = Complex64::new(ring.r * t.cos[j], ring.r * t.sin[j]);
            let v = g(z);
            if !v.is_finite() {
                return Err(Error::NonFinite { index: ring.offset + j, point: z });
            }
            acc += v;
        }
        Ok(acc * ring.node_weight())
    })
}

/// `sum_i w_i values[i]` for nodal values.
pub fn integrate_values(values: &[Complex64], grid: &AnnularGrid) -> Result<Complex64> {
    if values.len() != grid.len() {
        return Err(Error::GridMismatch);
    }
    sum_over_rings(grid, |_, ring, _| {
        let v = &values[ring.offset..ring.offset + ring.m];
        let mut acc = Complex64::new(0.0, 0.0);
        for (j, x) in v.iter().enumerate() {
            if !x.is_finite() {
                return Err(Error::NonFinite { index: ring.offset + j, point: Complex64::new(f64::NAN, f64::NAN) });
            }
            acc += x;
        }
        Ok(acc * ring.node_weight())
    })
}

/// Largest `|g|` on the inner and outer boundary circles of the grid.
pub fn tail_bound<F>(g: F, grid: &AnnularGrid, samples: usize) -> f64
where
    F: Fn(Complex64) -> Complex64,
{
    let mut worst: f64 = 0.0;
    for r in [grid.r_min(), grid.r_max()] {
        for j in 0..samples.max(1) {
            let z = Complex64::from_polar(r, 2.0 * std::f64::consts::PI * j as f64 / samples.max(1) as f64);
            worst = worst.max(g(z).norm());
        }
    }
    worst
}
