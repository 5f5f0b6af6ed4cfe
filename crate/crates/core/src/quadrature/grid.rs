use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::collections::HashMap;
use std::f64::consts::PI;
use std::sync::{Arc, OnceLock};

use super::cauchy::CauchyPlan;
use super::gauss::gauss_on;
use crate::error::{Error, Result};

/// A quadrature node.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ComplexSample {
    pub point: Complex64,
    pub weight: f64,
}

/// Local subdivision request: radial panels meeting the band
/// `||zeta| - |center|| <= radius` are bisected `depth` times and their rings
/// get `2^depth` times more angular points.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RefinementZone {
    pub center: Complex64,
    pub radius: f64,
    pub depth: u32,
}

/// Parameters of an annular grid.
///
/// Radially the annulus is cut into `radial_panels` panels, split between
/// `[r_min, 1]` and `[1, r_max]` in proportion to their lengths so that the
/// unit circle is always a panel edge; each panel carries an `order`-point
/// Gauss-Legendre rule in `r`. Every ring has `angular_panels * order`
/// equispaced angles (the periodic trapezoid rule).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    pub r_min: f64,
    pub r_max: f64,
    pub radial_panels: usize,
    pub angular_panels: usize,
    pub order: usize,
    #[serde(default)]
    pub refinement_zones: Vec<RefinementZone>,
}

impl Default for GridSpec {
    fn default() -> Self {
        GridSpec { r_min: 0.05, r_max: 6.0, radial_panels: 16, angular_panels: 16, order: 4, refinement_zones: Vec::new() }
    }
}

impl GridSpec {
    pub fn new(r_min: f64, r_max: f64, radial_panels: usize, angular_panels: usize) -> Self {
        GridSpec { r_min, r_max, radial_panels, angular_panels, order: 4, refinement_zones: Vec::new() }
    }

    pub fn with_order(mut self, order: usize) -> Self {
        self.order = order;
        self
    }

    pub fn with_zone(mut self, center: Complex64, radius: f64, depth: u32) -> Self {
        self.refinement_zones.push(RefinementZone { center, radius, depth });
        self
    }

    /// Same spec with panel counts multiplied by `factor`.
    pub fn scaled(&self, factor: usize) -> Self {
        GridSpec { radial_panels: self.radial_panels * factor, angular_panels: self.angular_panels * factor, ..self.clone() }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.r_min > 0.0) || !self.r_max.is_finite() {
            return Err(Error::Config(format!("grid radii must satisfy 0 < r_min, finite r_max (got {}, {})", self.r_min, self.r_max)));
        }
        if self.r_min >= self.r_max {
            return Err(Error::Config(format!("r_min = {} must be below r_max = {}", self.r_min, self.r_max)));
        }
        if !(self.r_min < 1.0 && self.r_max > 1.0) {
            return Err(Error::Config(format!("grid must straddle the unit circle (got [{}, {}])", self.r_min, self.r_max)));
        }
        if self.radial_panels < 4 || self.angular_panels < 4 {
            return Err(Error::Config(format!("panel counts must be at least 4 (got {} x {})", self.radial_panels, self.angular_panels)));
        }
        if self.order < 1 || self.order > 64 {
            return Err(Error::Config(format!("Gauss order {} out of range 1..=64", self.order)));
        }
        for z in &self.refinement_zones {
            if !(z.radius > 0.0) || z.depth > 8 || !z.center.is_finite() {
                return Err(Error::Config(format!("invalid refinement zone {z:?}")));
            }
        }
        Ok(())
    }

    fn base_edges(&self) -> Vec<f64> {
        let len_in = 1.0 - self.r_min;
        let len_out = self.r_max - 1.0;
        let n = self.radial_panels;
        let n_in = ((n as f64 * len_in / (len_in + len_out)).round() as usize).clamp(1, n - 1);
        let n_out = n - n_in;
        let mut e: Vec<f64> = (0..n_in).map(|i| self.r_min + len_in * i as f64 / n_in as f64).collect();
        e.extend((0..n_out).map(|i| 1.0 + len_out * i as f64 / n_out as f64));
        e.push(self.r_max);
        e
    }
}

/// Radial panel `[r0, r1]` with `m` angular points on each of its rings.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RadialPanel {
    pub r0: f64,
    pub r1: f64,
    pub m: usize,
    pub first_ring: usize,
}

/// One ring of nodes `r e^{2 pi i j/m}`, `j = 0..m`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Ring {
    pub r: f64,
    /// Gauss weight in `r` (without the Jacobian `r`)
    pub dr: f64,
    pub m: usize,
    /// index of the ring's first node in the global node order
    pub offset: usize,
    pub panel: usize,
}

impl Ring {
    /// Area weight of every node of this ring.
    pub fn node_weight(&self) -> f64 {
        self.dr * self.r * 2.0 * PI / self.m as f64
    }
}

/// Cosine/sine table of the angles `2 pi j / m`.
#[derive(Debug)]
pub struct AngleTable {
    pub cos: Vec<f64>,
    pub sin: Vec<f64>,
}

impl AngleTable {
    fn new(m: usize) -> Self {
        let (mut cos, mut sin) = (Vec::with_capacity(m), Vec::with_capacity(m));
        for j in 0..m {
            let (s, c) = (2.0 * PI * j as f64 / m as f64).sin_cos();
            cos.push(c);
            sin.push(s);
        }
        AngleTable { cos, sin }
    }
}

/// Annular product grid: Gauss-Legendre panels in `r` times equispaced angles.
///
/// Nodes are ordered ring by ring, rings by increasing radius, angles
/// increasing from 0. The node list is implicit; see [`AnnularGrid::node`] and
/// [`AnnularGrid::nodes`].
#[derive(Debug)]
pub struct AnnularGrid {
    pub spec: GridSpec,
    pub panels: Vec<RadialPanel>,
    pub rings: Vec<Ring>,
    pub order: usize,
    n_nodes: usize,
    tables: HashMap<usize, Arc<AngleTable>>,
    pub(crate) cauchy: OnceLock<CauchyPlan>,
}

impl AnnularGrid {
    pub fn r_min(&self) -> f64 {
        self.panels[0].r0
    }

    pub fn r_max(&self) -> f64 {
        self.panels[self.panels.len() - 1].r1
    }

    pub fn len(&self) -> usize {
        self.n_nodes
    }

    pub fn is_empty(&self) -> bool {
        self.n_nodes == 0
    }

    pub fn table(&self, m: usize) -> &AngleTable {
        &self.tables[&m]
    }

    /// Node `index` in global order.
    pub fn node(&self, index: usize) -> ComplexSample {
        let k = self.rings.partition_point(|r| r.offset <= index) - 1;
        let ring = &self.rings[k];
        let j = index - ring.offset;
        let t = self.table(ring.m);
        ComplexSample { point: Complex64::new(ring.r * t.cos[j], ring.r * t.sin[j]), weight: ring.node_weight() }
    }

    /// All nodes in global order.
    pub fn nodes(&self) -> impl Iterator<Item = ComplexSample> + '_ {
        self.rings.iter().flat_map(move |ring| {
            let t = self.table(ring.m);
            let w = ring.node_weight();
            (0..ring.m).map(move |j| ComplexSample { point: Complex64::new(ring.r * t.cos[j], ring.r * t.sin[j]), weight: w })
        })
    }

    /// Node points of one ring.
    pub fn ring_points(&self, k: usize) -> impl Iterator<Item = Complex64> + '_ {
        let ring = self.rings[k];
        let t = self.table(ring.m);
        (0..ring.m).map(move |j| Complex64::new(ring.r * t.cos[j], ring.r * t.sin[j]))
    }

    /// `pi (r_max^2 - r_min^2)`.
    pub fn area(&self) -> f64 {
        PI * (self.r_max().powi(2) - self.r_min().powi(2))
    }

    fn from_panels(spec: GridSpec, panels_in: Vec<(f64, f64, usize)>) -> Self {
        let order = spec.order;
        let mut panels = Vec::with_capacity(panels_in.len());
        let mut rings = Vec::with_capacity(panels_in.len() * order);
        let mut offset = 0;
        let mut tables = HashMap::new();
        for (pi, (r0, r1, m)) in panels_in.into_iter().enumerate() {
            panels.push(RadialPanel { r0, r1, m, first_ring: rings.len() });
            tables.entry(m).or_insert_with(|| Arc::new(AngleTable::new(m)));
            let (x, w) = gauss_on(order, r0, r1);
            for (r, dr) in x.into_iter().zip(w) {
                rings.push(Ring { r, dr, m, offset, panel: pi });
                offset += m;
            }
        }
        AnnularGrid { spec, panels, rings, order, n_nodes: offset, tables, cauchy: OnceLock::new() }
    }
}

/// Build the grid described by `spec`.
pub fn build_grid(spec: &GridSpec) -> Result<AnnularGrid> {
    spec.validate()?;
    let m0 = spec.angular_panels * spec.order;
    let edges = spec.base_edges();
    let mut panels = Vec::new();
    for w in edges.windows(2) {
        let depth = zone_depth(spec, w[0], w[1]);
        let k = 1usize << depth;
        for s in 0..k {
            let a = w[0] + (w[1] - w[0]) * s as f64 / k as f64;
            let b = if s + 1 == k { w[1] } else { w[0] + (w[1] - w[0]) * (s + 1) as f64 / k as f64 };
            panels.push((a, b, m0 << depth));
        }
    }
    Ok(AnnularGrid::from_panels(spec.clone(), panels))
}

fn zone_depth(spec: &GridSpec, r0: f64, r1: f64) -> u32 {
    spec.refinement_zones
        .iter()
        .filter(|z| {
            let c = z.center.norm();
            c + z.radius > r0 && c - z.radius < r1
        })
        .map(|z| z.depth)
        .max()
        .unwrap_or(0)
}

/// Upper bounds on how fast an oscillatory factor `e^{i Psi}` varies on the ring of radius `r`.
pub trait PhaseRates: Sync {
    /// bound on `|d Psi / dr|` over the ring
    fn radial_rate(&self, r: f64) -> f64;
    /// bound on `|d Psi / d phi|` over the ring
    fn angular_bandwidth(&self, r: f64) -> f64;
}

/// No oscillation.
pub struct Flat;

impl PhaseRates for Flat {
    fn radial_rate(&self, _r: f64) -> f64 {
        0.0
    }
    fn angular_bandwidth(&self, _r: f64) -> f64 {
        0.0
    }
}

/// Resolution policy for oscillatory integrands.
///
/// A cell is one radial panel times one angular spacing. Its radial phase
/// variation per node is `max|dPsi/dr| * (r1 - r0) / order`; its angular
/// variation per node is `2 pi B / (m - pad)` with `B` the angular bandwidth.
/// Both must stay below the respective limits.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Oscillation {
    pub radial_per_node: f64,
    pub angular_per_node: f64,
    pub angular_pad: usize,
}

impl Oscillation {
    /// For plain integrals with a 16-point radial rule.
    pub const INTEGRAL: Oscillation = Oscillation { radial_per_node: 0.8, angular_per_node: 5.0, angular_pad: 48 };
    /// For Cauchy transforms, where the density must also be interpolated.
    pub const TRANSFORM: Oscillation = Oscillation { radial_per_node: 1.0, angular_per_node: 3.0, angular_pad: 48 };
}

/// Phase variation of one radial panel.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CellVariation {
    pub panel: usize,
    pub r0: f64,
    pub r1: f64,
    pub radial_per_node: f64,
    pub angular_per_node: f64,
}

fn panel_max(r0: f64, r1: f64, f: impl Fn(f64) -> f64) -> f64 {
    (0..=16).map(|i| f(r0 + (r1 - r0) * i as f64 / 16.0)).fold(0.0, f64::max)
}

/// Per-cell phase-variation estimator.
pub fn phase_variation(grid: &AnnularGrid, rates: &dyn PhaseRates, pad: usize) -> Vec<CellVariation> {
    grid.panels
        .iter()
        .enumerate()
        .map(|(i, p)| {
            let rr = panel_max(p.r0, p.r1, |r| rates.radial_rate(r));
            let bw = panel_max(p.r0, p.r1, |r| rates.angular_bandwidth(r));
            let eff = p.m.saturating_sub(pad).max(1) as f64;
            CellVariation {
                panel: i,
                r0: p.r0,
                r1: p.r1,
                radial_per_node: rr * (p.r1 - p.r0) / grid.order as f64,
                angular_per_node: 2.0 * PI * bw / eff,
            }
        })
        .collect()
}

/// The worst cell violating `osc`, if any.
pub fn oscillation_check(grid: &AnnularGrid, rates: &dyn PhaseRates, osc: &Oscillation) -> Option<CellVariation> {
    phase_variation(grid, rates, osc.angular_pad)
        .into_iter()
        .filter(|c| c.radial_per_node > osc.radial_per_node || c.angular_per_node > osc.angular_per_node)
        .max_by(|a, b| {
            let ka = (a.radial_per_node / osc.radial_per_node).max(a.angular_per_node / osc.angular_per_node);
            let kb = (b.radial_per_node / osc.radial_per_node).max(b.angular_per_node / osc.angular_per_node);
            ka.total_cmp(&kb)
        })
}

/// Smallest `4 * 2^a 3^b 5^c` not below `n`.
pub fn fft_size(n: usize) -> usize {
    let target = n.div_ceil(4).max(1);
    let mut best = usize::MAX;
    let mut p2 = 1usize;
    while p2 < 2 * target {
        let mut p3 = p2;
        while p3 < 2 * target {
            let mut p5 = p3;
            while p5 < 2 * target {
                if p5 >= target && p5 < best {
                    best = p5;
                }
                p5 *= 5;
            }
            p3 *= 3;
        }
        p2 *= 2;
    }
    4 * best
}

/// Refine `spec` until every cell satisfies `osc` for the given phase rates.
///
/// Panels of the base grid (including refinement zones) are split into equal
/// pieces until the radial limit holds, then each piece gets the smallest
/// FFT-friendly ring size meeting the angular limit. Fails with
/// [`Error::BudgetExceeded`] if more than `budget` nodes would be needed.
pub fn build_adapted_grid(spec: &GridSpec, rates: &dyn PhaseRates, osc: &Oscillation, budget: usize) -> Result<AnnularGrid> {
    let base = build_grid(spec)?;
    let mut panels = Vec::new();
    let mut total = 0usize;
    let mut worst: Option<(f64, CellVariation)> = None;
    for p in &base.panels {
        let rr = panel_max(p.r0, p.r1, |r| rates.radial_rate(r));
        let k = ((rr * (p.r1 - p.r0) / (spec.order as f64 * osc.radial_per_node)).ceil() as usize).max(1);
        for s in 0..k {
            let a = p.r0 + (p.r1 - p.r0) * s as f64 / k as f64;
            let b = if s + 1 == k { p.r1 } else { p.r0 + (p.r1 - p.r0) * (s + 1) as f64 / k as f64 };
            let bw = panel_max(a, b, |r| rates.angular_bandwidth(r));
            let need = (2.0 * PI * bw / osc.angular_per_node).ceil() as usize + osc.angular_pad;
            let m = fft_size(need.max(p.m));
            total = total.saturating_add(m * spec.order);
            let cell = CellVariation {
                panel: panels.len(),
                r0: a,
                r1: b,
                radial_per_node: panel_max(a, b, |r| rates.radial_rate(r)) * (b - a) / spec.order as f64,
                angular_per_node: 2.0 * PI * bw / p.m.max(1) as f64,
            };
            let load = bw + panel_max(a, b, |r| rates.radial_rate(r));
            if worst.is_none_or(|(w, _)| load > w) {
                worst = Some((load, cell));
            }
            panels.push((a, b, m));
        }
        if total > budget {
            break;
        }
    }
    if total > budget {
        let (_, c) = worst.unwrap();
        return Err(Error::BudgetExceeded {
            needed: total,
            budget,
            r0: c.r0,
            r1: c.r1,
            radial_per_node: c.radial_per_node,
            angular_per_node: c.angular_per_node,
        });
    }
    Ok(AnnularGrid::from_panels(spec.clone(), panels))
}
