//! The phase `S(u, zeta)`, its holomorphic derivatives, the stationary-point
//! cubic in `xi = zeta^2` and the four-way classification of stationary points.
//!
//! The cubic is obtained from `S'_zeta` itself by clearing `zeta^4`:
//!
//! ```text
//! 3 xi^3 + (conj(u)/2) xi^2 - (u/2) xi - 3 = 0
//! ```
//!
//! so that `S'_zeta = (3/zeta^4) (zeta^2 - xi_0)(zeta^2 - xi_1)(zeta^2 - xi_2)`
//! holds with the returned roots. Under this convention the double root on the
//! boundary curve `u = -6(2e^{-i phi} + e^{2 i phi})` is `e^{i phi}` and the
//! simple root is `e^{-2 i phi}`; [`swapped_q_roots`] exposes the roots of the
//! conjugate-coefficient cubic for comparison.

use nalgebra::Matrix3;
use num_complex::Complex64;
use serde::Serialize;
use std::f64::consts::PI;

use crate::error::{Error, Result};

fn nonzero(zeta: Complex64) -> Result<()> {
    if zeta.norm_sqr() == 0.0 || !zeta.is_finite() {
        return Err(Error::Domain(format!("phase evaluated at zeta = {zeta}")));
    }
    Ok(())
}

/// `S(u, zeta)`. Purely imaginary for every `u`.
pub fn phase_value(u: Complex64, zeta: Complex64) -> Result<Complex64> {
    nonzero(zeta)?;
    Ok(phase_unchecked(u, 1.0, zeta))
}

/// Phase in `(z, t)` form: `1/2((zeta - 1/conj zeta) conj z - conj(..) z) + t(zeta^3 - ...)`.
///
/// Equals `t S(z/t, zeta)` for `t != 0` and stays regular at `t = 0`.
pub fn phase_value_zt(z: Complex64, t: f64, zeta: Complex64) -> Result<Complex64> {
    nonzero(zeta)?;
    Ok(phase_unchecked(z, t, zeta))
}

fn phase_unchecked(z: Complex64, t: f64, zeta: Complex64) -> Complex64 {
    let zb = zeta.conj();
    let inv = zeta.inv();
    let invb = zb.inv();
    let lin = 0.5 * ((zeta - invb) * z.conj() - (zb - inv) * z);
    let cubic = zeta.powi(3) - zb.powi(3) + inv.powi(3) - invb.powi(3);
    // both pieces are of the form w - conj(w); drop the roundoff real part
    Complex64::new(0.0, lin.im + t * cubic.im)
}

/// Imaginary part `Psi` of the `(z, t)` phase (`S = i Psi`) in polar variables.
///
/// `a = r - 1/r`; `(cos_phi, sin_phi)` and `sin_3phi` describe the angle.
#[inline]
pub fn phase_psi(z: Complex64, t: f64, a: f64, cos_phi: f64, sin_phi: f64, sin_3phi: f64) -> f64 {
    a * (z.re * sin_phi - z.im * cos_phi) + 2.0 * t * (a * a * a + 3.0 * a) * sin_3phi
}

/// `dS/dzeta`.
pub fn phase_d1(u: Complex64, zeta: Complex64) -> Result<Complex64> {
    nonzero(zeta)?;
    let z2 = zeta * zeta;
    Ok(u.conj() / 2.0 - u / (2.0 * z2) + 3.0 * z2 - 3.0 / (z2 * z2))
}

/// `d^2S/dzeta^2`.
pub fn phase_d2(u: Complex64, zeta: Complex64) -> Result<Complex64> {
    nonzero(zeta)?;
    let z3 = zeta * zeta * zeta;
    Ok(u / z3 + 6.0 * zeta + 12.0 / (z3 * zeta * zeta))
}

/// Point on the boundary curve of the region where all stationary points lie on the unit circle.
pub fn boundary_curve(phi: f64) -> Complex64 {
    -6.0 * (2.0 * Complex64::from_polar(1.0, -phi) + Complex64::from_polar(1.0, 2.0 * phi))
}

/// The three cusps `-18 e^{2 pi i k/3}`.
pub fn cusps() -> [Complex64; 3] {
    [0, 1, 2].map(|k| Complex64::from_polar(-18.0, 2.0 * PI * k as f64 / 3.0))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum StationaryCase {
    TripleDegenerate,
    BoundaryDegenerate,
    InteriorNondegenerate,
    ExteriorNondegenerate,
}

impl StationaryCase {
    pub fn as_str(&self) -> &'static str {
        match self {
            StationaryCase::TripleDegenerate => "TripleDegenerate",
            StationaryCase::BoundaryDegenerate => "BoundaryDegenerate",
            StationaryCase::InteriorNondegenerate => "InteriorNondegenerate",
            StationaryCase::ExteriorNondegenerate => "ExteriorNondegenerate",
        }
    }
}

/// Roots of the stationary cubic, the six stationary points and their classification.
///
/// Root order: for `TripleDegenerate` and `BoundaryDegenerate` the coincident
/// roots come first; for `ExteriorNondegenerate` roots are sorted by
/// decreasing modulus; otherwise by argument in `(-pi, pi]`.
/// `zeta_points[2i]`, `zeta_points[2i+1]` are the principal square root of
/// `xi_roots[i]` and its negative.
///
/// `phi` is the boundary-curve parameter for `BoundaryDegenerate`
/// (`xi_0 = xi_1 = e^{i phi}`) and the argument of the largest root for
/// `ExteriorNondegenerate` (`xi_0 = (1+omega)^2 e^{i phi}`,
/// `xi_1 = e^{-2 i phi}`). `omega` is set only in the exterior case.
#[derive(Debug, Clone, Serialize)]
pub struct StationaryAnalysis {
    pub u: Complex64,
    pub xi_roots: [Complex64; 3],
    pub zeta_points: [Complex64; 6],
    pub case: StationaryCase,
    pub omega: Option<f64>,
    pub phi: Option<f64>,
    pub tol: f64,
}

/// Default classification tolerance `1e-6 (1 + |u|)`.
pub fn default_tol(u: Complex64) -> f64 {
    1e-6 * (1.0 + u.norm())
}

/// Smallest root separation that double precision can resolve near a triple
/// root: a coefficient perturbation `e` moves the roots by `e^{1/3}`.
pub fn resolution_floor(u: Complex64) -> f64 {
    4.0 * (f64::EPSILON * (1.0 + u.norm())).cbrt()
}

fn cubic_eval(u: Complex64, xi: Complex64) -> (Complex64, Complex64) {
    let c2 = u.conj() / 2.0;
    let c1 = -u / 2.0;
    let p = ((3.0 * xi + c2) * xi + c1) * xi - 3.0;
    let dp = (9.0 * xi + 2.0 * c2) * xi + c1;
    (p, dp)
}

/// Eigenvalues of the companion matrix of the monic stationary cubic.
fn companion_roots(u: Complex64, flip: bool) -> Result<[Complex64; 3]> {
    let (b2, b1) = if flip { (u / 6.0, -u.conj() / 6.0) } else { (u.conj() / 6.0, -u / 6.0) };
    let zero = Complex64::new(0.0, 0.0);
    let one = Complex64::new(1.0, 0.0);
    // xi^3 + b2 xi^2 + b1 xi - 1
    let m = Matrix3::new(-b2, -b1, one, one, zero, zero, zero, one, zero);
    let ev = m.eigenvalues().ok_or_else(|| Error::Convergence { what: "companion eigenvalue solve".into(), residual: f64::NAN })?;
    Ok([ev[0], ev[1], ev[2]])
}

/// Roots of the cubic with `u` and `conj(u)` exchanged; equal to the complex
/// conjugates of [`StationaryAnalysis::xi_roots`] as a set.
pub fn swapped_q_roots(u: Complex64) -> Result<[Complex64; 3]> {
    let mut r = companion_roots(u, true)?;
    sort_by_arg(&mut r);
    Ok(r)
}

fn sort_by_arg(r: &mut [Complex64; 3]) {
    r.sort_by(|a, b| a.arg().total_cmp(&b.arg()));
}

fn polish(u: Complex64, xi: Complex64) -> Complex64 {
    let mut x = xi;
    let (mut p, _) = cubic_eval(u, x);
    for _ in 0..50 {
        let (_, dp) = cubic_eval(u, x);
        if dp.norm() == 0.0 {
            break;
        }
        let cand = x - p / dp;
        let (pc, _) = cubic_eval(u, cand);
        if pc.norm() >= p.norm() {
            break;
        }
        x = cand;
        p = pc;
    }
    x
}

/// Solve the stationary cubic and classify with the default tolerance.
pub fn stationary_points(u: Complex64) -> Result<StationaryAnalysis> {
    stationary_points_tol(u, default_tol(u))
}

/// Solve the stationary cubic and classify with tolerance `tol`.
///
/// Roots closer than `max(tol, resolution_floor(u))` count as coincident.
pub fn stationary_points_tol(u: Complex64, tol: f64) -> Result<StationaryAnalysis> {
    if !u.is_finite() {
        return Err(Error::Domain(format!("non-finite u = {u}")));
    }
    if !(tol > 0.0) {
        return Err(Error::Config(format!("classification tolerance must be positive, got {tol}")));
    }
    let mut xi = companion_roots(u, false)?;
    for x in xi.iter_mut() {
        *x = polish(u, *x);
    }

    let d01 = (xi[0] - xi[1]).norm();
    let d02 = (xi[0] - xi[2]).norm();
    let d12 = (xi[1] - xi[2]).norm();
    let sep = tol.max(resolution_floor(u));
    let close = [d12 < sep, d02 < sep, d01 < sep];
    let n_close = close.iter().filter(|c| **c).count();

    let (case, roots, omega, phi) = if n_close >= 2 {
        let m = (xi[0] + xi[1] + xi[2]) / 3.0;
        (StationaryCase::TripleDegenerate, [m, m, m], None, None)
    } else if n_close == 1 {
        // pair (i, j) coincide, k is simple
        let (i, j, k) = if close[2] {
            (0, 1, 2)
        } else if close[1] {
            (0, 2, 1)
        } else {
            (1, 2, 0)
        };
        let d = (xi[i] + xi[j]) / 2.0;
        (StationaryCase::BoundaryDegenerate, [d, d, xi[k]], None, Some(d.arg()))
    } else if xi.iter().all(|x| (x.norm() - 1.0).abs() < tol) {
        let mut r = xi;
        sort_by_arg(&mut r);
        (StationaryCase::InteriorNondegenerate, r, None, None)
    } else {
        let mut r = xi;
        r.sort_by(|a, b| b.norm().total_cmp(&a.norm()));
        let omega = r[0].norm().sqrt() - 1.0;
        (StationaryCase::ExteriorNondegenerate, r, Some(omega), Some(r[0].arg()))
    };

    let mut zeta_points = [Complex64::new(0.0, 0.0); 6];
    for (i, x) in roots.iter().enumerate() {
        let s = x.sqrt();
        zeta_points[2 * i] = s;
        zeta_points[2 * i + 1] = -s;
    }

    let scale = 1e-8 * (1.0 + u.norm());
    for z in zeta_points {
        let res = phase_d1(u, z)?.norm();
        if !(res < scale) {
            return Err(Error::Convergence { what: format!("stationary point for u = {u}"), residual: res });
        }
    }

    Ok(StationaryAnalysis { u, xi_roots: roots, zeta_points, case, omega, phi, tol })
}

/// Case label of [`stationary_points_tol`].
pub fn classify(u: Complex64, tol: f64) -> Result<StationaryCase> {
    Ok(stationary_points_tol(u, tol)?.case)
}

/// `(3/zeta^4) prod (zeta^2 - xi_i)`.
pub fn factored_d1(roots: &[Complex64; 3], zeta: Complex64) -> Complex64 {
    let z2 = zeta * zeta;
    3.0 / (z2 * z2) * (z2 - roots[0]) * (z2 - roots[1]) * (z2 - roots[2])
}
