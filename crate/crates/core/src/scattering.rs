//! Scattering data `b(lambda)`: built-in and sampled profiles, the symmetry
//! extension, the time evolution and the two derived weights `r` and `f`.
//!
//! A raw profile `g` is given on the closed exterior disk `|lambda| >= 1` and
//! symmetrized there as `b(lambda) = (g(lambda) + conj g(-lambda)) / 2`; inside
//! the disk `b(lambda) = conj b(1/conj lambda)`. The result satisfies
//! `b(-1/conj lambda) = b(lambda)` and `b(1/conj lambda) = conj b(lambda)`
//! everywhere, hence also `b(-lambda) = conj b(lambda)`. Continuity across
//! the unit circle needs `Im g(lambda) = Im g(-lambda)` there, which every
//! built-in profile satisfies.

use num_complex::Complex64;
use serde::Serialize;
use std::f64::consts::PI;
use std::sync::Arc;

use crate::error::{Error, Result};

/// Smooth cutoff profile used by `P1`: a Gaussian ridge on the unit circle with
/// a compactly supported taper and two angular harmonics.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RidgeParams {
    pub sigma: f64,
    /// weight of `cos 2 phi`
    pub kappa: f64,
    /// weight of `i (r - 1) sin phi`
    pub kappa2: f64,
    /// taper starts at this radius
    pub taper_start: f64,
    /// and reaches zero here; the support is `[1/taper_end, taper_end]`
    pub taper_end: f64,
}

impl Default for RidgeParams {
    fn default() -> Self {
        RidgeParams { sigma: 4.0, kappa: 0.5, kappa2: 0.5, taper_start: 1.25, taper_end: 1.6 }
    }
}

/// Scattering data sampled on a tensor grid in `(ln r, angle)` on `|lambda| >= 1`.
#[derive(Debug, Clone, PartialEq)]
pub struct SampledProfile {
    log_r: Vec<f64>,
    angle: Vec<f64>,
    values: Vec<Complex64>,
}

impl SampledProfile {
    /// Build from scattered rows that must form a full tensor grid.
    ///
    /// Angles are taken in `[0, 2 pi)` and interpolated periodically; outside
    /// the sampled radial range the profile is zero.
    pub fn from_samples(samples: &[(Complex64, Complex64)]) -> Result<Self> {
        if samples.is_empty() {
            return Err(Error::Config("sampled profile has no rows".into()));
        }
        let key = |x: f64| (x * 1e9).round() as i64;
        let mut lr: Vec<f64> = Vec::new();
        let mut an: Vec<f64> = Vec::new();
        for (l, _) in samples {
            if l.norm() < 1.0 - 1e-12 || !l.is_finite() {
                return Err(Error::Config(format!("sampled profile point {l} lies inside the unit disk")));
            }
            lr.push(l.norm().ln());
            an.push(l.arg().rem_euclid(2.0 * PI));
        }
        let mut ulr = lr.clone();
        ulr.sort_by(f64::total_cmp);
        ulr.dedup_by(|a, b| key(*a) == key(*b));
        let mut uan = an.clone();
        uan.sort_by(f64::total_cmp);
        uan.dedup_by(|a, b| key(*a) == key(*b));
        if ulr.len() < 2 || uan.len() < 2 || ulr.len() * uan.len() != samples.len() {
            return Err(Error::Config(format!(
                "sampled profile is not a tensor grid: {} radii x {} angles vs {} rows",
                ulr.len(),
                uan.len(),
                samples.len()
            )));
        }
        let mut values = vec![Complex64::new(f64::NAN, 0.0); samples.len()];
        for (k, (_, b)) in samples.iter().enumerate() {
            let i = ulr.iter().position(|x| key(*x) == key(lr[k])).unwrap();
            let j = uan.iter().position(|x| key(*x) == key(an[k])).unwrap();
            values[i * uan.len() + j] = *b;
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::Config("sampled profile has duplicate or non-finite rows".into()));
        }
        Ok(SampledProfile { log_r: ulr, angle: uan, values })
    }

    fn eval(&self, lambda: Complex64) -> Complex64 {
        let x = lambda.norm().ln();
        let n = self.log_r.len();
        if x < self.log_r[0] || x > self.log_r[n - 1] {
            return Complex64::new(0.0, 0.0);
        }
        let i = match self.log_r.partition_point(|v| *v <= x) {
            0 => 0,
            p if p >= n => n - 2,
            p => p - 1,
        };
        let sx = (x - self.log_r[i]) / (self.log_r[i + 1] - self.log_r[i]);
        let m = self.angle.len();
        let a = lambda.arg().rem_euclid(2.0 * PI);
        let p = self.angle.partition_point(|v| *v <= a);
        let (j0, j1, a0, a1) = if p == 0 {
            (m - 1, 0, self.angle[m - 1] - 2.0 * PI, self.angle[0])
        } else if p == m {
            (m - 1, 0, self.angle[m - 1], self.angle[0] + 2.0 * PI)
        } else {
            (p - 1, p, self.angle[p - 1], self.angle[p])
        };
        let sy = (a - a0) / (a1 - a0);
        let v = |ii: usize, jj: usize| self.values[ii * m + jj];
        v(i, j0) * (1.0 - sx) * (1.0 - sy) + v(i + 1, j0) * sx * (1.0 - sy) + v(i, j1) * (1.0 - sx) * sy + v(i + 1, j1) * sx * sy
    }
}

/// Raw profile on the exterior disk, before symmetrization and scaling by `theta`.
#[derive(Debug, Clone, PartialEq)]
pub enum Profile {
    /// `b = 0`
    Zero,
    /// `b = 1`; test profile (not decaying)
    Constant,
    /// ridge profile with `b(1) != 0`
    P1(RidgeParams),
    /// `(|lambda|^2 - 1) exp(-|lambda|^2 - 1/|lambda|^2)`; vanishes on the unit circle
    P2,
    Sampled(Arc<SampledProfile>),
}

impl Profile {
    pub fn label(&self) -> &'static str {
        match self {
            Profile::Zero => "zero",
            Profile::Constant => "constant",
            Profile::P1(_) => "p1",
            Profile::P2 => "p2",
            Profile::Sampled(_) => "sampled",
        }
    }

    fn raw(&self, lambda: Complex64) -> Complex64 {
        match self {
            Profile::Zero => Complex64::new(0.0, 0.0),
            Profile::Constant => Complex64::new(1.0, 0.0),
            Profile::P1(p) => {
                let r = lambda.norm();
                let chi = taper(r, p.taper_start, p.taper_end);
                if chi == 0.0 {
                    return Complex64::new(0.0, 0.0);
                }
                let (s, c) = (lambda.im / r, lambda.re / r);
                let cos2 = c * c - s * s;
                let env = (-p.sigma * (r - 1.0) * (r - 1.0)).exp() * chi;
                env * Complex64::new(1.0 + p.kappa * cos2, p.kappa2 * (r - 1.0) * s)
            }
            Profile::P2 => {
                let r2 = lambda.norm_sqr();
                Complex64::new((r2 - 1.0) * (-r2 - 1.0 / r2).exp(), 0.0)
            }
            Profile::Sampled(s) => s.eval(lambda),
        }
    }

    /// Radius beyond which (and inside whose reciprocal) the profile vanishes identically.
    pub fn support_radius(&self) -> Option<f64> {
        match self {
            Profile::Zero => Some(1.0),
            Profile::P1(p) => Some(p.taper_end),
            Profile::Sampled(s) => Some(s.log_r.last().copied().unwrap_or(0.0).exp()),
            _ => None,
        }
    }
}

/// `C^infinity` step: 1 for `r <= r0`, 0 for `r >= r1`.
pub fn taper(r: f64, r0: f64, r1: f64) -> f64 {
    if r <= r0 {
        return 1.0;
    }
    if r >= r1 {
        return 0.0;
    }
    let s = (r - r0) / (r1 - r0);
    let f = |x: f64| if x > 0.0 { (-1.0 / x).exp() } else { 0.0 };
    let a = f(1.0 - s);
    a / (a + f(s))
}

/// Symmetric scattering data `theta * b(lambda)`.
#[derive(Debug, Clone, PartialEq)]
pub struct ScatteringData {
    pub profile: Profile,
    pub theta: f64,
    /// Gaussian decay scale of the built-in ridge (0 when not applicable)
    pub decay_rate: f64,
    pub label: String,
}

fn nonzero(l: Complex64) -> Result<()> {
    if l.norm_sqr() == 0.0 || !l.is_finite() {
        return Err(Error::Domain(format!("scattering data evaluated at lambda = {l}")));
    }
    Ok(())
}

impl ScatteringData {
    pub fn new(profile: Profile, theta: f64) -> Self {
        let decay_rate = match &profile {
            Profile::P1(p) => p.sigma,
            Profile::P2 => 1.0,
            _ => 0.0,
        };
        let label = profile.label().to_string();
        ScatteringData { profile, theta, decay_rate, label }
    }

    pub fn zero() -> Self {
        Self::new(Profile::Zero, 1.0)
    }

    pub fn p1(theta: f64) -> Self {
        Self::new(Profile::P1(RidgeParams::default()), theta)
    }

    pub fn p2(theta: f64) -> Self {
        Self::new(Profile::P2, theta)
    }

    pub fn with_theta(&self, theta: f64) -> Self {
        ScatteringData { theta, ..self.clone() }
    }

    pub fn is_zero(&self) -> bool {
        self.theta == 0.0 || matches!(self.profile, Profile::Zero)
    }

    /// Radius `R` with `b = 0` outside the annulus `1/R <= |lambda| <= R`, if any.
    pub fn support_radius(&self) -> Option<f64> {
        if self.is_zero() {
            return Some(1.0);
        }
        self.profile.support_radius()
    }

    /// Radius outside which `|b|` is below `1e-16 |theta|` (exactly zero for compact profiles).
    pub fn effective_radius(&self) -> Option<f64> {
        match (&self.profile, self.support_radius()) {
            (_, Some(r)) => Some(r),
            // r^2 e^{-r^2} < 1e-16
            (Profile::P2, None) => Some(6.5),
            _ => None,
        }
    }

    /// Symmetrized exterior value, `|lambda| >= 1` assumed.
    fn exterior(&self, lambda: Complex64) -> Complex64 {
        0.5 * self.theta * (self.profile.raw(lambda) + self.profile.raw(-lambda).conj())
    }

    /// `b(lambda)`.
    pub fn b(&self, lambda: Complex64) -> Result<Complex64> {
        nonzero(lambda)?;
        Ok(self.b_unchecked(lambda))
    }

    pub(crate) fn b_unchecked(&self, lambda: Complex64) -> Complex64 {
        if self.is_zero() {
            return Complex64::new(0.0, 0.0);
        }
        if lambda.norm_sqr() >= 1.0 {
            self.exterior(lambda)
        } else {
            self.exterior(lambda.conj().inv()).conj()
        }
    }

    /// `b(lambda, t) = exp((lambda^3 + lambda^-3 - conj(..)) t) b(lambda)`.
    pub fn evolve(&self, t: f64, lambda: Complex64) -> Result<Complex64> {
        nonzero(lambda)?;
        Ok(evolution_factor(t, lambda) * self.b_unchecked(lambda))
    }

    /// `r(lambda) = pi sgn(1 - |lambda|^2) b(lambda) / conj(lambda)` with `sgn(0) = 0`.
    pub fn r_weight(&self, lambda: Complex64) -> Result<Complex64> {
        nonzero(lambda)?;
        Ok(self.r_unchecked(lambda))
    }

    pub(crate) fn r_unchecked(&self, lambda: Complex64) -> Complex64 {
        let s = 1.0 - lambda.norm_sqr();
        let sgn = if s > 0.0 {
            1.0
        } else if s < 0.0 {
            -1.0
        } else {
            0.0
        };
        if sgn == 0.0 {
            return Complex64::new(0.0, 0.0);
        }
        PI * sgn * self.b_unchecked(lambda) / lambda.conj()
    }

    /// `f(zeta) = pi |1 - |zeta|^2| / (2 |zeta|^2) b(zeta)`.
    pub fn f_weight(&self, zeta: Complex64) -> Result<Complex64> {
        nonzero(zeta)?;
        Ok(self.f_unchecked(zeta))
    }

    pub(crate) fn f_unchecked(&self, zeta: Complex64) -> Complex64 {
        let m = zeta.norm_sqr();
        PI * (1.0 - m).abs() / (2.0 * m) * self.b_unchecked(zeta)
    }
}

impl ScatteringData {
    /// `b` on the ring `r e^{i phi_j}` with `(cos phi_j, sin phi_j)` given.
    pub fn b_on_ring(&self, r: f64, cos: &[f64], sin: &[f64], out: &mut [Complex64]) {
        if self.is_zero() {
            out.iter_mut().for_each(|o| *o = Complex64::new(0.0, 0.0));
            return;
        }
        match &self.profile {
            Profile::P1(p) => {
                // the ridge is already symmetric under lambda -> -lambda with conjugation
                let (rho, sign) = if r >= 1.0 { (r, 1.0) } else { (1.0 / r, -1.0) };
                let env = self.theta * (-p.sigma * (rho - 1.0) * (rho - 1.0)).exp() * taper(rho, p.taper_start, p.taper_end);
                for j in 0..out.len() {
                    let cos2 = cos[j] * cos[j] - sin[j] * sin[j];
                    out[j] = env * Complex64::new(1.0 + p.kappa * cos2, sign * p.kappa2 * (rho - 1.0) * sin[j]);
                }
            }
            _ => {
                for j in 0..out.len() {
                    out[j] = self.b_unchecked(Complex64::new(r * cos[j], r * sin[j]));
                }
            }
        }
    }
}

/// `exp((lambda^3 + lambda^-3 - conj(lambda)^3 - conj(lambda)^-3) t)`, of unit modulus.
pub fn evolution_factor(t: f64, lambda: Complex64) -> Complex64 {
    // Im(l^-3) = -Im(l^3) / |l|^6, so the exponent vanishes on the circle
    let m3 = lambda.norm_sqr().powi(3);
    Complex64::from_polar(1.0, 2.0 * t * lambda.powi(3).im * (1.0 - 1.0 / m3))
}
