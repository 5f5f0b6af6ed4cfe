//! Cauchy transform `(dbar^-1 g)(lambda) = -(1/pi) iint g(zeta) / (zeta - lambda)` on an annular grid.
//!
//! The density is expanded in angular Fourier modes on every ring,
//! `g(r e^{i phi}) = sum_n G_n(r) e^{i n phi}`. Integrating the kernel over
//! the angle leaves, for a target of modulus `rho`, the output mode `n - 1`
//!
//! ```text
//! n >= 1:  -2 int_rho^R  (rho/r)^{n-1} G_n(r) dr
//! n <= 0:   2 int_r0^rho (r/rho)^{1-n} G_n(r) dr
//! ```
//!
//! The radial integrals are accumulated by two sweeps across the rings
//! (outward modes from the top, inward modes from the bottom). Between
//! consecutive rings each integral is done by product integration against
//! the panel's Lagrange interpolant of `G_n`, so the kernel's jump at
//! `r = rho` is handled exactly and no cell is singular. Cost is
//! `O(N log m)` for `N` nodes.

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};
use std::collections::HashMap;
use std::sync::Arc;

use super::gauss::{barycentric_weights, gauss_on, lagrange_row};
use super::grid::AnnularGrid;
use crate::error::{Error, Result};

const ZERO: Complex64 = Complex64 { re: 0.0, im: 0.0 };
/// Largest `k ln(r1/r0)` handled by interpolating `(r0/r)^k G` over a whole panel.
const KAPPA_FAST: f64 = 4.0;
/// Largest `k ln(b/a)` per piece of the fallback product rule.
const KAPPA_PIECE: f64 = 2.0;

#[derive(Debug)]
struct SubRule {
    y: Vec<f64>,
    v: Vec<f64>,
    ln_ya: Vec<f64>,
    ln_by: Vec<f64>,
    // Lagrange rows, y.len() x p
    l: Vec<f64>,
}

#[derive(Debug)]
struct PanelRule {
    r0: f64,
    r1: f64,
    m: usize,
    first_ring: usize,
    nodes: Vec<f64>,
    bary: Vec<f64>,
    // sub-interval ends: r0, x_0, ..., x_{p-1}, r1
    ends: Vec<f64>,
    // (p+1) x p, s[s][j] = int_{sub s} l_j dr
    s_mat: Vec<f64>,
    kmax_fast: usize,
    fallback: Vec<SubRule>,
}

/// Precomputed radial rules of a grid, cached on the grid.
pub(crate) struct CauchyPlan {
    panels: Vec<PanelRule>,
    ffts: HashMap<usize, (Arc<dyn Fft<f64>>, Arc<dyn Fft<f64>>)>,
    n_max: usize,
}

fn integration_rows(nodes: &[f64], bary: &[f64], a: f64, b: f64) -> Vec<f64> {
    let p = nodes.len();
    let (x, w) = gauss_on(p.max(2), a, b);
    let mut row = vec![0.0; p];
    let mut acc = vec![0.0; p];
    for (xq, wq) in x.iter().zip(&w) {
        lagrange_row(nodes, bary, *xq, &mut row);
        for j in 0..p {
            acc[j] += wq * row[j];
        }
    }
    acc
}

fn sub_rule(nodes: &[f64], bary: &[f64], a: f64, b: f64, kmax: usize) -> SubRule {
    let p = nodes.len();
    let kappa = kmax as f64 * (b / a).ln();
    let pieces = ((kappa / KAPPA_PIECE).ceil() as usize).max(1);
    let q = (p + 15) / 2 + 1;
    let mut y = Vec::new();
    let mut v = Vec::new();
    for i in 0..pieces {
        let pa = a + (b - a) * i as f64 / pieces as f64;
        let pb = a + (b - a) * (i + 1) as f64 / pieces as f64;
        let (x, w) = gauss_on(q, pa, pb);
        y.extend(x);
        v.extend(w);
    }
    let mut l = vec![0.0; y.len() * p];
    for (i, yq) in y.iter().enumerate() {
        lagrange_row(nodes, bary, *yq, &mut l[i * p..(i + 1) * p]);
    }
    let ln_ya = y.iter().map(|yq| (yq / a).ln()).collect();
    let ln_by = y.iter().map(|yq| (b / yq).ln()).collect();
    SubRule { y, v, ln_ya, ln_by, l }
}

impl std::fmt::Debug for CauchyPlan {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("CauchyPlan").field("panels", &self.panels.len()).field("n_max", &self.n_max).finish()
    }
}

impl CauchyPlan {
    pub(crate) fn new(grid: &AnnularGrid) -> Self {
        let p = grid.order;
        let mut planner = FftPlanner::new();
        let mut ffts = HashMap::new();
        let mut panels = Vec::with_capacity(grid.panels.len());
        let mut n_max = 0;
        for pan in &grid.panels {
            ffts.entry(pan.m).or_insert_with(|| (planner.plan_fft_forward(pan.m), planner.plan_fft_inverse(pan.m)));
            n_max = n_max.max(pan.m / 2 + 1);
            let nodes: Vec<f64> = grid.rings[pan.first_ring..pan.first_ring + p].iter().map(|r| r.r).collect();
            let bary = barycentric_weights(&nodes);
            let mut ends = vec![pan.r0];
            ends.extend(&nodes);
            ends.push(pan.r1);
            let mut s_mat = Vec::with_capacity((p + 1) * p);
            for w in ends.windows(2) {
                s_mat.extend(integration_rows(&nodes, &bary, w[0], w[1]));
            }
            let span = (pan.r1 / pan.r0).ln();
            let kmax_fast = (KAPPA_FAST / span).floor().min(1e9) as usize;
            let kmax = pan.m / 2 + 1;
            let fallback =
                if kmax > kmax_fast { ends.windows(2).map(|w| sub_rule(&nodes, &bary, w[0], w[1], kmax)).collect() } else { Vec::new() };
            panels.push(PanelRule {
                r0: pan.r0,
                r1: pan.r1,
                m: pan.m,
                first_ring: pan.first_ring,
                nodes,
                bary,
                ends,
                s_mat,
                kmax_fast,
                fallback,
            });
        }
        CauchyPlan { panels, ffts, n_max }
    }
}

#[inline]
fn coef(g: &[Complex64], m: usize, n: i64) -> Complex64 {
    let a = n.unsigned_abs() as usize;
    if 2 * a < m {
        g[n.rem_euclid(m as i64) as usize]
    } else if 2 * a == m {
        0.5 * g[m / 2]
    } else {
        ZERO
    }
}

/// Angular Fourier coefficients of a density on every ring.
pub struct CauchyTransform<'g> {
    grid: &'g AnnularGrid,
    coeffs: Vec<Complex64>,
}

impl<'g> CauchyTransform<'g> {
    /// Prepare the transform of the density with nodal `values`.
    pub fn new(grid: &'g AnnularGrid, values: &[Complex64]) -> Result<Self> {
        Self::from_values(grid, values.to_vec())
    }

    /// As [`CauchyTransform::new`], reusing the buffer.
    pub fn from_values(grid: &'g AnnularGrid, values: Vec<Complex64>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::GridMismatch);
        }
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite { index: i, point: grid.node(i).point });
        }
        let plan = grid.cauchy.get_or_init(|| CauchyPlan::new(grid));
        let mut coeffs = values;
        use rayon::prelude::*;
        let mut chunks: Vec<(&crate::quadrature::Ring, &mut [Complex64])> = Vec::with_capacity(grid.rings.len());
        let mut rest: &mut [Complex64] = &mut coeffs;
        for ring in &grid.rings {
            let (head, tail) = rest.split_at_mut(ring.m);
            chunks.push((ring, head));
            rest = tail;
        }
        chunks.into_par_iter().for_each(|(ring, c)| {
            let (fwd, _) = &plan.ffts[&ring.m];
            fwd.process(c);
            let s = 1.0 / ring.m as f64;
            c.iter_mut().for_each(|x| *x *= s);
        });
        Ok(CauchyTransform { grid, coeffs })
    }

    fn plan(&self) -> &CauchyPlan {
        self.grid.cauchy.get().expect("plan initialised in new")
    }

    fn ring_coeffs(&self, k: usize) -> &[Complex64] {
        let ring = &self.grid.rings[k];
        &self.coeffs[ring.offset..ring.offset + ring.m]
    }

    /// Outward (`outward = true`, modes `n = 1..=m/2`, indexed by `k = n - 1`)
    /// or inward (modes `n = 0..=-m/2`, indexed by `k = 1 - n`) integrals over
    /// the sub-intervals `[ends[s], ends[s+1]]` of one panel. `rows` are the
    /// matching integration rows. Result layout: `out[s * nk + idx]` where
    /// `idx = k` (outward) or `k - 1` (inward).
    fn panel_integrals(&self, pr: &PanelRule, ends: &[f64], rows: &[f64], outward: bool, out: &mut Vec<Complex64>) -> usize {
        let p = pr.nodes.len();
        let nsub = ends.len() - 1;
        let g: Vec<&[Complex64]> = (0..p).map(|j| self.ring_coeffs(pr.first_ring + j)).collect();
        let nk = if outward { pr.m / 2 } else { pr.m / 2 + 1 };
        out.clear();
        out.resize(nsub * nk, ZERO);
        // fast path factors
        let mut pw: Vec<f64> = vec![1.0; p];
        let step: Vec<f64> = pr.nodes.iter().map(|x| if outward { pr.r0 / x } else { x / pr.r1 }).collect();
        let mut anch: Vec<f64> = vec![1.0; nsub];
        let astep: Vec<f64> = (0..nsub).map(|s| if outward { ends[s] / pr.r0 } else { pr.r1 / ends[s + 1] }).collect();
        let mut h = vec![ZERO; p];
        let mut fb_cache: Option<Vec<SubRule>> = None;
        for idx in 0..nk {
            let k = if outward { idx } else { idx + 1 };
            let n: i64 = if outward { k as i64 + 1 } else { 1 - k as i64 };
            if !outward && idx == 0 {
                // k = 1: apply one step before use
                for j in 0..p {
                    pw[j] *= step[j];
                }
                for s in 0..nsub {
                    anch[s] *= astep[s];
                }
            }
            if k <= pr.kmax_fast {
                for j in 0..p {
                    h[j] = pw[j] * coef(g[j], pr.m, n);
                }
                for s in 0..nsub {
                    let row = &rows[s * p..(s + 1) * p];
                    let mut acc = ZERO;
                    for j in 0..p {
                        acc += h[j] * row[j];
                    }
                    out[s * nk + idx] = acc * anch[s];
                }
            } else {
                let subs: &[SubRule] = if ends.len() == pr.ends.len() && ends == pr.ends.as_slice() {
                    &pr.fallback
                } else {
                    fb_cache
                        .get_or_insert_with(|| ends.windows(2).map(|w| sub_rule(&pr.nodes, &pr.bary, w[0], w[1], pr.m / 2 + 1)).collect())
                };
                for (s, sr) in subs.iter().enumerate() {
                    let mut acc = ZERO;
                    for q in 0..sr.y.len() {
                        let lnk = if outward { sr.ln_ya[q] } else { sr.ln_by[q] };
                        let wq = sr.v[q] * (-(k as f64) * lnk).exp();
                        if wq == 0.0 {
                            continue;
                        }
                        let lrow = &sr.l[q * p..(q + 1) * p];
                        let mut gi = ZERO;
                        for j in 0..p {
                            gi += coef(g[j], pr.m, n) * lrow[j];
                        }
                        acc += gi * wq;
                    }
                    out[s * nk + idx] = acc;
                }
            }
            for j in 0..p {
                pw[j] *= step[j];
            }
            for s in 0..nsub {
                anch[s] *= astep[s];
            }
        }
        nk
    }

    /// Transform evaluated at every grid node.
    pub fn all(&self) -> Vec<Complex64> {
        let grid = self.grid;
        let plan = self.plan();
        let n_max = plan.n_max;
        let mut out = vec![ZERO; grid.len()];
        let mut buf = Vec::new();

        // outward modes: F[k], k = n - 1 >= 0
        let mut f = vec![ZERO; n_max];
        let mut hi = 0usize;
        for pr in plan.panels.iter().rev() {
            let nk = self.panel_integrals(pr, &pr.ends, &pr.s_mat, true, &mut buf);
            let nsub = pr.ends.len() - 1;
            for s in (0..nsub).rev() {
                let (a, b) = (pr.ends[s], pr.ends[s + 1]);
                scale_modes(&mut f[..hi], a / b, 0);
                for k in 0..nk {
                    f[k] += buf[s * nk + k];
                }
                hi = hi.max(nk);
                if s > 0 {
                    let ring = &grid.rings[pr.first_ring + s - 1];
                    let o = &mut out[ring.offset..ring.offset + ring.m];
                    for (k, fk) in f[..hi].iter().enumerate() {
                        o[k % ring.m] += -2.0 * fk;
                    }
                }
            }
        }

        // inward modes: E[k-1], k = 1 - n >= 1
        let mut e = vec![ZERO; n_max];
        let mut hi = 0usize;
        for pr in plan.panels.iter() {
            let nk = self.panel_integrals(pr, &pr.ends, &pr.s_mat, false, &mut buf);
            let nsub = pr.ends.len() - 1;
            for s in 0..nsub {
                let (a, b) = (pr.ends[s], pr.ends[s + 1]);
                scale_modes(&mut e[..hi], a / b, 1);
                for i in 0..nk {
                    e[i] += buf[s * nk + i];
                }
                hi = hi.max(nk);
                if s + 1 < nsub {
                    let ring = &grid.rings[pr.first_ring + s];
                    let o = &mut out[ring.offset..ring.offset + ring.m];
                    let m = ring.m as i64;
                    for (i, ei) in e[..hi].iter().enumerate() {
                        let mode = -(i as i64 + 1);
                        o[mode.rem_euclid(m) as usize] += 2.0 * ei;
                    }
                }
            }
        }

        use rayon::prelude::*;
        let mut chunks: Vec<(usize, &mut [Complex64])> = Vec::with_capacity(grid.rings.len());
        let mut rest: &mut [Complex64] = &mut out;
        for ring in &grid.rings {
            let (head, tail) = rest.split_at_mut(ring.m);
            chunks.push((ring.m, head));
            rest = tail;
        }
        chunks.into_par_iter().for_each(|(m, c)| {
            let (_, inv) = &plan.ffts[&m];
            inv.process(c);
        });
        out
    }

    /// Transform at an arbitrary point.
    pub fn at(&self, lambda: Complex64) -> Complex64 {
        let plan = self.plan();
        let rho = lambda.norm();
        if rho == 0.0 {
            // only the n = 1 mode survives: -2 int G_1 dr
            let mut acc = ZERO;
            let mut buf = Vec::new();
            for pr in &plan.panels {
                let nk = self.panel_integrals(pr, &pr.ends, &pr.s_mat, true, &mut buf);
                if nk > 0 {
                    for s in 0..pr.ends.len() - 1 {
                        acc += buf[s * nk];
                    }
                }
            }
            return -2.0 * acc;
        }
        let unit = lambda / rho;
        let mut fsum = vec![ZERO; plan.n_max];
        let mut esum = vec![ZERO; plan.n_max];
        let mut buf = Vec::new();
        for pr in &plan.panels {
            // split the panel's sub-intervals at rho if it falls inside
            let (ends, rows): (Vec<f64>, Vec<f64>) = if rho > pr.r0 && rho < pr.r1 && !pr.ends.contains(&rho) {
                let mut e = pr.ends.clone();
                let pos = e.partition_point(|x| *x < rho);
                e.insert(pos, rho);
                let rows = e.windows(2).flat_map(|w| integration_rows(&pr.nodes, &pr.bary, w[0], w[1])).collect();
                (e, rows)
            } else {
                (pr.ends.clone(), pr.s_mat.clone())
            };
            let nsub = ends.len() - 1;
            let nk = self.panel_integrals(pr, &ends, &rows, true, &mut buf);
            for s in 0..nsub {
                let a = ends[s];
                if a >= rho {
                    let ratio = rho / a;
                    let mut fac = 1.0;
                    for k in 0..nk {
                        fsum[k] += buf[s * nk + k] * fac;
                        fac *= ratio;
                    }
                }
            }
            let nk = self.panel_integrals(pr, &ends, &rows, false, &mut buf);
            for s in 0..nsub {
                let b = ends[s + 1];
                if b <= rho {
                    let ratio = b / rho;
                    let mut fac = ratio;
                    for i in 0..nk {
                        esum[i] += buf[s * nk + i] * fac;
                        fac *= ratio;
                    }
                }
            }
        }
        // sum_k outward (mode k) and inward (mode -k-1... ) contributions
        let mut acc = ZERO;
        let mut pw = Complex64::new(1.0, 0.0);
        for fk in &fsum {
            acc += -2.0 * fk * pw;
            pw *= unit;
        }
        let inv = unit.conj();
        let mut pw = inv;
        for ei in &esum {
            acc += 2.0 * ei * pw;
            pw *= inv;
        }
        acc
    }
}

/// `v[i] *= ratio^(i + shift)`.
fn scale_modes(v: &mut [Complex64], ratio: f64, shift: i32) {
    let mut fac = ratio.powi(shift);
    for (i, x) in v.iter_mut().enumerate() {
        if fac == 0.0 {
            for y in &mut v[i..] {
                *y = ZERO;
            }
            return;
        }
        *x *= fac;
        fac *= ratio;
    }
}

/// Cauchy transform of nodal `values` at every node.
pub fn cauchy_transform_all(grid: &AnnularGrid, values: &[Complex64]) -> Result<Vec<Complex64>> {
    Ok(CauchyTransform::new(grid, values)?.all())
}

/// Cauchy transform of nodal `values` at `lambda`.
pub fn cauchy_transform(grid: &AnnularGrid, values: &[Complex64], lambda: Complex64) -> Result<Complex64> {
    Ok(CauchyTransform::new(grid, values)?.at(lambda))
}
