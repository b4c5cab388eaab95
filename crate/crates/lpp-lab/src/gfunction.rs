//! The scalar potential `g`, its constant `ell`, the exponent `Delta`, and
//! residual checks of the jump and sign conditions along the contours.
//!
//! `g` is evaluated from a closed form in logarithms of `u = z + R(z)`.
//! Path integration is only used for `Psi_2` and for cross-checks.

use std::f64::consts::PI;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::endpoint::{smooth_branch, EndpointData};
use crate::error::{Error, Result};
use crate::model::ModelParams;
use crate::quad;
use crate::quaddiff::{build_contours, field_direction, ContourSystem, PathKind};

const I: Complex64 = Complex64 { re: 0.0, im: 1.0 };

/// Evaluations closer than this to a cut or pole are rejected.
pub const CUT_GUARD: f64 = 1e-12;

/// Tolerance on the imaginary part of `Delta` and on the agreement of its two routes.
pub const DELTA_TOL: f64 = 1e-10;

fn check_poles(z: Complex64, t: f64) -> Result<()> {
    for p in [0.0, -t, -1.0 / t] {
        if (z - p).norm() < CUT_GUARD {
            return Err(Error::Singular(format!("{z} (pole at {p})")));
        }
    }
    Ok(())
}

/// `W(z) = -gamma a log(1 + t z) - a log(1 + t/z) + log z` with principal logs.
pub fn w_eval(z: Complex64, a: f64, params: &ModelParams) -> Result<Complex64> {
    let t = params.t();
    check_poles(z, t)?;
    if z.im.abs() < CUT_GUARD && z.re <= 0.0 {
        return Err(Error::Domain(format!("{z} lies on the cut (-inf, 0] of W")));
    }
    let g = params.gamma();
    Ok(-g * a * (1.0 + t * z).ln() - a * (1.0 + t / z).ln() + z.ln())
}

pub fn w_prime(z: Complex64, a: f64, params: &ModelParams) -> Result<Complex64> {
    let t = params.t();
    check_poles(z, t)?;
    let g = params.gamma();
    Ok(-g * a / (z + 1.0 / t) - a / (z + t) + (a + 1.0) / z)
}

fn distance_to_polyline(z: Complex64, pts: &[Complex64]) -> f64 {
    pts.windows(2)
        .map(|w| {
            let d = w[1] - w[0];
            let len2 = d.norm_sqr();
            let s = if len2 == 0.0 { 0.0 } else { ((z - w[0]) * d.conj()).re / len2 };
            (z - (w[0] + d * s.clamp(0.0, 1.0))).norm()
        })
        .fold(f64::INFINITY, f64::min)
}

/// `R(z)` off `Gamma_1`. Points on the cut need explicit boundary values.
pub fn r_eval(z: Complex64, cs: &ContourSystem) -> Result<Complex64> {
    if distance_to_polyline(z, &cs.gamma1_closed()) < CUT_GUARD {
        return Err(Error::Domain(format!("{z} lies on Gamma_1; use one-sided values")));
    }
    Ok(cs.r_eval(z))
}

/// `Phi = (1 + gamma a) R (z + z0) / (z (z + t)(z + 1/t))` for a given branch value of `R`.
pub fn phi_with_r(z: Complex64, r: Complex64, ep: &EndpointData) -> Complex64 {
    let t = ep.t();
    ep.lead() * r * (z + ep.z0) / (z * (z + t) * (z + 1.0 / t))
}

pub fn phi_eval(z: Complex64, cs: &ContourSystem) -> Result<Complex64> {
    check_poles(z, cs.endpoint.t())?;
    Ok(phi_with_r(z, r_eval(z, cs)?, &cs.endpoint))
}

/// `h = (W' + Phi) / 2`.
pub fn h_eval(z: Complex64, cs: &ContourSystem) -> Result<Complex64> {
    let ep = &cs.endpoint;
    Ok(0.5 * (w_prime(z, ep.a, &ep.params)? + phi_eval(z, cs)?))
}

/// Closed form of `2 g(z)` for a given branch value `R = R(z)`.
pub fn twice_g_with_r(z: Complex64, r: Complex64, ep: &EndpointData) -> Complex64 {
    let t = ep.t();
    let ga = ep.gamma() * ep.a;
    let a = ep.a;
    let u = z + r;
    -ga * (z + 1.0 / t).ln() - a * (z + t).ln() + (a + 1.0) * z.ln() + ep.lead() * ((z - ep.alpha() + r) / 2.0).ln()
        - ga * ((u + 1.0 / t - ep.x) / (u + 1.0 / t + ep.x)).ln()
        - a * ((u + t - ep.y) / (u + t + ep.y)).ln()
        + (a + 1.0) * ((u - ep.r) / (u + ep.r)).ln()
}

/// `g(z)` off `Gamma_1` and the real interval `(-inf, p_i]`.
pub fn g_eval(z: Complex64, cs: &ContourSystem) -> Result<Complex64> {
    check_poles(z, cs.endpoint.t())?;
    if z.im.abs() < CUT_GUARD && z.re <= cs.p_i {
        return Err(Error::Domain(format!("{z} lies on the cut (-inf, p_i] of g")));
    }
    Ok(0.5 * twice_g_with_r(z, r_eval(z, cs)?, &cs.endpoint))
}

/// `ell = 2 g(xi) - W(xi)`, kept complex.
pub fn ell(ep: &EndpointData) -> Complex64 {
    let t = ep.t();
    let ga = ep.gamma() * ep.a;
    let a = ep.a;
    let xi = ep.xi;
    ga * t.ln() + ep.lead() * ((xi - ep.alpha()) / 2.0).ln()
        - ga * ((xi + 1.0 / t - ep.x) / (xi + 1.0 / t + ep.x)).ln()
        - a * ((xi + t - ep.y) / (xi + t + ep.y)).ln()
        + (a + 1.0) * ((xi - ep.r) / (xi + ep.r)).ln()
}

/// `log` of a negative real approached from the upper half plane.
fn ln_from_above(x: f64) -> Complex64 {
    Complex64::new(x.abs().ln(), if x < 0.0 { PI } else { 0.0 })
}

/// The limit `g(0 + i0)`.
///
/// At the origin `R = -r`, so `u + r` vanishes linearly and its logarithm
/// combines with `log z`. Every remaining logarithm with a negative argument
/// is entered from above because `u'(0) = 1 + alpha/r > 0`.
pub fn g_origin(ep: &EndpointData) -> Complex64 {
    let t = ep.t();
    let ga = ep.gamma() * ep.a;
    let a = ep.a;
    let (r, x, y, alpha) = (ep.r, ep.x, ep.y, ep.alpha());
    let twice = -ga * (1.0 / t).ln() - a * t.ln() + ep.lead() * ln_from_above((-alpha - r) / 2.0)
        - ga * ln_from_above((-r + 1.0 / t - x) / (-r + 1.0 / t + x))
        - a * ln_from_above((-r + t - y) / (-r + t + y))
        + (a + 1.0) * (ln_from_above(-2.0 * r) - (1.0 + alpha / r).ln());
    0.5 * twice
}

/// Real closed form of `Delta` in terms of `r, x, y`.
pub fn delta_closed_form(r: f64, x: f64, y: f64, a: f64, params: &ModelParams) -> f64 {
    let t = params.t();
    let ga = params.gamma() * a;
    -ga * t.ln() + (2.0 + a + ga) * 2f64.ln() + (1.0 + a) * r.ln()
        - 0.5 * (r + 1.0 / t - x).ln()
        - 0.5 * (1.0 + 2.0 * ga) * (r + 1.0 / t + x).ln()
        - 0.5 * (r + t - y).ln()
        - 0.5 * (1.0 + 2.0 * a) * (r + t + y).ln()
}

/// `Delta = g(0 + i0) - ell`.
///
/// Both the potential route and the closed form are evaluated; a nonzero
/// imaginary part or a disagreement means the branches were misassembled.
/// Near `a0` the potential route loses accuracy and only the closed form is used.
pub fn delta(ep: &EndpointData) -> Result<f64> {
    let closed = delta_closed_form(ep.r, ep.x, ep.y, ep.a, &ep.params);
    if ep.is_nearly_degenerate() {
        return Ok(closed);
    }
    let d = g_origin(ep) - ell(ep);
    if d.im.abs() > DELTA_TOL {
        return Err(Error::Invariant(format!("Delta has imaginary part {:e}", d.im)));
    }
    if (d.re - closed).abs() > DELTA_TOL * (1.0 + closed.abs()) {
        return Err(Error::Invariant(format!("Delta from g is {} but the closed form gives {closed}", d.re)));
    }
    Ok(d.re)
}

/// `Delta(a)` on the branch that is smooth through `a0`, defined on both sides of it.
pub fn delta_at(a: f64, params: &ModelParams) -> Result<f64> {
    let (r, x, y) = smooth_branch(a, params)?;
    Ok(delta_closed_form(r, x, y, a, params))
}

/// Precomputed quantities for one endpoint.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GContext {
    pub ep: EndpointData,
    pub alpha: f64,
    pub ell: Complex64,
    pub delta: f64,
    pub contours: Option<ContourSystem>,
}

impl GContext {
    pub fn new(ep: &EndpointData) -> Result<Self> {
        Ok(Self { ep: *ep, alpha: ep.alpha(), ell: ell(ep), delta: delta(ep)?, contours: None })
    }

    pub fn with_contours(ep: &EndpointData) -> Result<Self> {
        let mut ctx = Self::new(ep)?;
        ctx.contours = Some(build_contours(ep)?);
        Ok(ctx)
    }

    fn contours(&self) -> Result<&ContourSystem> {
        self.contours.as_ref().ok_or_else(|| Error::Contour("context was built without contours".into()))
    }
}

/// `Psi_2` at every vertex of the closed `Gamma_2` polyline, from `xi`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Psi2Profile {
    pub points: Vec<Complex64>,
    pub values: Vec<Complex64>,
}

impl Psi2Profile {
    /// Index of the vertex at `-z0`.
    pub fn turning_index(&self) -> usize {
        self.points.iter().position(|z| z.im == 0.0).unwrap_or(self.points.len() / 2)
    }
}

/// `int_xi^z Phi(s) ds` along `Gamma_2`, cumulatively.
///
/// The chords touching `xi` and `conj(xi)` use the square-root substitution.
pub fn psi2_profile(cs: &ContourSystem) -> Result<Psi2Profile> {
    let ep = &cs.endpoint;
    let pts = cs.gamma2_closed();
    let n = pts.len();
    if n < 3 {
        return Err(Error::Contour("Gamma_2 has too few points".into()));
    }
    let phi = |z: Complex64| phi_with_r(z, cs.r_segment(z), ep);
    let panels = 2;
    let mut values = Vec::with_capacity(n);
    let mut acc = Complex64::new(0.0, 0.0);
    values.push(acc);
    for i in 0..n - 1 {
        let (a, b) = (pts[i], pts[i + 1]);
        let piece = if i == 0 {
            quad::segment_from_root(a, b, panels, phi)
        } else if i == n - 2 {
            -quad::segment_from_root(b, a, panels, phi)
        } else {
            quad::segment(a, b, panels, phi)
        };
        if !piece.is_finite() {
            return Err(Error::Invariant(format!("Psi_2 quadrature failed on chord {i}")));
        }
        acc += piece;
        values.push(acc);
    }
    Ok(Psi2Profile { points: pts, values })
}

/// `Psi_2(z)` for a point on (or within `1e-6` of) `Gamma_2`.
pub fn psi2(z: Complex64, ctx: &GContext) -> Result<f64> {
    let cs = ctx.contours()?;
    let prof = psi2_profile(cs)?;
    let (k, d) = prof.points.iter().enumerate().map(|(i, p)| (i, (z - p).norm())).fold((0, f64::INFINITY), |a, b| {
        if b.1 < a.1 {
            b
        } else {
            a
        }
    });
    if d > 1e-6 && distance_to_polyline(z, &prof.points) > 1e-6 {
        return Err(Error::Domain(format!("{z} is not on Gamma_2")));
    }
    let tail = if d == 0.0 {
        Complex64::new(0.0, 0.0)
    } else {
        let ep = &cs.endpoint;
        quad::segment(prof.points[k], z, 2, |s| phi_with_r(s, cs.r_segment(s), ep))
    };
    Ok((prof.values[k] + tail).re)
}

/// Largest residual of one property over the sampled points.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PropertyResidual {
    pub property: String,
    pub max_residual: f64,
    pub argmax_location: Complex64,
    /// Smallest value of a quantity that must stay positive, for sign conditions.
    pub margin: Option<f64>,
    pub samples: usize,
}

impl PropertyResidual {
    fn from_samples(property: &str, samples: &[(Complex64, f64)], margin: Option<f64>) -> Self {
        let first = samples.first().copied().unwrap_or((Complex64::new(f64::NAN, f64::NAN), f64::NAN));
        let (loc, res) = samples.iter().copied().fold(first, |a, b| if b.1 > a.1 || b.1.is_nan() { b } else { a });
        Self { property: property.into(), max_residual: res, argmax_location: loc, margin, samples: samples.len() }
    }

    /// Residual below `tol` and, for sign conditions, a positive margin.
    pub fn holds(&self, tol: f64) -> bool {
        self.max_residual < tol && self.margin.map_or(true, |m| m > 0.0)
    }
}

/// All residuals of the scalar jump problem for one parameter set.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RhpReport {
    pub t: f64,
    pub gamma: f64,
    pub a: f64,
    pub p_i: f64,
    pub residuals: Vec<PropertyResidual>,
}

impl RhpReport {
    pub fn get(&self, property: &str) -> Option<&PropertyResidual> {
        self.residuals.iter().find(|r| r.property == property)
    }

    pub fn all_hold(&self, tol: f64) -> bool {
        self.residuals.iter().all(|r| r.holds(tol))
    }
}

/// Sampling controls for [`check_scalar_rhp`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RhpOptions {
    /// Points per contour.
    pub samples: usize,
    /// Samples closer than this to a zero of `Q` are skipped.
    pub edge: f64,
    /// Normal offsets for the one-sided cross-check, larger first.
    pub offsets: [f64; 2],
    /// Gauss–Legendre panels per chord for the endpoint integrals.
    pub panels: usize,
}

impl Default for RhpOptions {
    fn default() -> Self {
        Self { samples: 200, edge: 1e-3, offsets: [1e-6, 1e-7], panels: 4 }
    }
}

/// Up to `n` distinct vertices spread along the polyline, away from the
/// zeros and from the two ends.
fn sample_vertices(pts: &[Complex64], n: usize, avoid: &[Complex64], edge: f64) -> Vec<usize> {
    let eligible: Vec<usize> =
        (1..pts.len().saturating_sub(1)).filter(|&i| avoid.iter().all(|c| (pts[i] - c).norm() > edge)).collect();
    let m = eligible.len();
    if m <= n {
        return eligible;
    }
    (0..n).map(|k| eligible[(2 * k + 1) * m / (2 * n)]).collect()
}

/// Nearest integer distance of `g_+ - g_-` over `2 pi i`.
fn integer_defect(jump: Complex64) -> f64 {
    let m = jump / (2.0 * PI * I);
    (m - Complex64::new(m.re.round(), 0.0)).norm()
}

/// Residuals of the jump, sign and normalization conditions along the contours.
///
/// Properties reported:
/// - `h_sum`: `h_+ + h_- = W'` on `Gamma_1`, with one-sided values from offsets
///   and Richardson extrapolation;
/// - `h_sum_exact`: the same with the exact one-sided values of `R`;
/// - `h_jump_sign`: `i (h_+ - h_-) dz > 0` on `Gamma_1`;
/// - `gamma2_sign`: `(2h - W') dz < 0` on the upper half of `Gamma_2`;
/// - `endpoint_w`, `endpoint_sw`: the two moment conditions on `1/R_+`;
/// - `g_product`: `exp(g_+ + g_- - W - ell) = 1` on `Gamma_1`;
/// - `g_gamma2`: `exp(2g - W - ell) = exp(Psi_2)` on `Gamma_2`;
/// - `psi2_real`: imaginary part of `Psi_2`;
/// - `psi2_closure`: `|Psi_2(conj xi)|`;
/// - `g_axis_jump`: `g_+ - g_-` in `2 pi i Z` on `(-inf, p_i)`;
/// - `reality`: `g(conj z) = conj g(z)`.
pub fn check_scalar_rhp(ctx: &GContext) -> Result<RhpReport> {
    check_scalar_rhp_with(ctx, &RhpOptions::default())
}

pub fn check_scalar_rhp_with(ctx: &GContext, opts: &RhpOptions) -> Result<RhpReport> {
    let cs = ctx.contours()?;
    let ep = &cs.endpoint;
    let params = &ep.params;
    let a = ep.a;
    let ell = ctx.ell;
    let zeros = [ep.xi, ep.xi.conj(), Complex64::new(-ep.z0, 0.0)];
    let mut residuals = Vec::new();

    // Gamma_1, oriented from conj(xi) to xi
    let g1 = cs.gamma1_closed();
    let idx1 = sample_vertices(&g1, opts.samples, &zeros, opts.edge);
    let on_g1: Vec<_> = idx1
        .par_iter()
        .map(|&i| -> Result<_> {
            let z = g1[i];
            let chord = g1[i + 1] - g1[i - 1];
            let tau = field_direction(z, PathKind::Trajectory, chord, ep);
            let normal = I * tau;
            let wp = w_prime(z, a, params)?;
            let (rp, rm) = cs.r_boundary(z);
            let (phip, phim) = (phi_with_r(z, rp, ep), phi_with_r(z, rm, ep));
            let (hp, hm) = (0.5 * (wp + phip), 0.5 * (wp + phim));

            let side = |sign: f64| -> Result<Complex64> {
                let [e1, e2] = opts.offsets;
                let h1 = h_eval(z + normal * (sign * e1), cs)?;
                let h2 = h_eval(z + normal * (sign * e2), cs)?;
                let ratio = e1 / e2;
                Ok((ratio * h2 - h1) / (ratio - 1.0))
            };
            let (hp_off, hm_off) = (side(1.0)?, side(-1.0)?);
            let res_a = (hp_off + hm_off - wp).norm() / (1.0 + wp.norm());
            let res_a_exact = (hp + hm - wp).norm() / (1.0 + wp.norm());

            let c_val = I * (hp - hm) * tau;
            let res_c = c_val.im.abs() / c_val.norm();

            let w = w_eval(z, a, params)?;
            let gp = 0.5 * twice_g_with_r(z, rp, ep);
            let gm = 0.5 * twice_g_with_r(z, rm, ep);
            let res3 = ((gp + gm - w - ell).exp() - 1.0).norm();
            Ok((z, res_a, res_a_exact, res_c, c_val.re, res3))
        })
        .collect::<Result<_>>()?;
    let pick = |f: fn(&(Complex64, f64, f64, f64, f64, f64)) -> f64| -> Vec<(Complex64, f64)> {
        on_g1.iter().map(|s| (s.0, f(s))).collect()
    };
    let c_margin = on_g1.iter().map(|s| s.4).fold(f64::INFINITY, f64::min);
    residuals.push(PropertyResidual::from_samples("h_sum", &pick(|s| s.1), None));
    residuals.push(PropertyResidual::from_samples("h_sum_exact", &pick(|s| s.2), None));
    residuals.push(PropertyResidual::from_samples("h_jump_sign", &pick(|s| s.3), Some(c_margin)));
    residuals.push(PropertyResidual::from_samples("g_product", &pick(|s| s.5), None));

    // endpoint moment conditions along Gamma_1 with R_+ = -R_seg
    let (e_w, e_sw) = endpoint_integrals(cs, opts.panels);
    residuals.push(PropertyResidual::from_samples("endpoint_w", &[(ep.xi, e_w.norm())], None));
    residuals.push(PropertyResidual::from_samples("endpoint_sw", &[(ep.xi, (e_sw + 1.0).norm())], None));

    // Gamma_2, oriented from xi through -z0
    let prof = psi2_profile(cs)?;
    let turn = prof.turning_index();
    let idx2 = sample_vertices(&prof.points, opts.samples, &zeros, opts.edge);
    let on_g2: Vec<_> = idx2
        .par_iter()
        .map(|&i| -> Result<_> {
            let z = prof.points[i];
            let chord = prof.points[i + 1] - prof.points[i - 1];
            let tau = field_direction(z, PathKind::Orthogonal, chord, ep);
            let phi = phi_with_r(z, cs.r_segment(z), ep);
            let d_val = phi * tau;
            let res_d = d_val.im.abs() / d_val.norm();
            let g = g_eval(z, cs)?;
            let w = w_eval(z, a, params)?;
            let psi = prof.values[i];
            let res5 = ((2.0 * g - w - ell - psi).exp() - 1.0).norm();
            Ok((z, i < turn, res_d, -d_val.re, res5, psi.im.abs()))
        })
        .collect::<Result<_>>()?;
    let upper: Vec<_> = on_g2.iter().filter(|s| s.1).collect();
    let d_margin = upper.iter().map(|s| s.3).fold(f64::INFINITY, f64::min);
    let d_res: Vec<_> = upper.iter().map(|s| (s.0, s.2)).collect();
    residuals.push(PropertyResidual::from_samples("gamma2_sign", &d_res, Some(d_margin)));
    let res5: Vec<_> = on_g2.iter().map(|s| (s.0, s.4)).collect();
    residuals.push(PropertyResidual::from_samples("g_gamma2", &res5, None));
    let res_im: Vec<_> = on_g2.iter().map(|s| (s.0, s.5)).collect();
    residuals.push(PropertyResidual::from_samples("psi2_real", &res_im, None));
    let closure = prof.values.last().copied().unwrap_or_default();
    residuals.push(PropertyResidual::from_samples("psi2_closure", &[(ep.xi.conj(), closure.norm())], None));

    // jump of g across the real axis left of p_i
    let t = ep.t();
    let lo = -2.0 / t - 1.0;
    let delta = 1e-12;
    let on_axis: Vec<(Complex64, f64)> = (0..opts.samples)
        .into_par_iter()
        .filter_map(|k| {
            let x = lo + (cs.p_i - lo) * (k as f64 + 0.5) / opts.samples as f64;
            let near = [0.0, -t, -1.0 / t, ep.alpha(), -ep.z0].iter().any(|p| (x - p).abs() < 1e-6);
            if near {
                return None;
            }
            let up = Complex64::new(x, delta);
            let gp = 0.5 * twice_g_with_r(up, cs.r_eval(up), ep);
            let gm = 0.5 * twice_g_with_r(up.conj(), cs.r_eval(up.conj()), ep);
            Some((Complex64::new(x, 0.0), integer_defect(gp - gm)))
        })
        .collect();
    residuals.push(PropertyResidual::from_samples("g_axis_jump", &on_axis, None));

    let reality: Vec<(Complex64, f64)> = (0..opts.samples)
        .into_par_iter()
        .filter_map(|k| {
            let ang = PI * (k as f64 + 0.5) / opts.samples as f64;
            let z = Complex64::from_polar(0.3 + 3.0 * (k % 7) as f64 / 7.0, ang);
            let up = g_eval(z, cs).ok()?;
            let down = g_eval(z.conj(), cs).ok()?;
            Some((z, (down - up.conj()).norm()))
        })
        .collect();
    residuals.push(PropertyResidual::from_samples("reality", &reality, None));

    Ok(RhpReport { t, gamma: ep.gamma(), a, p_i: cs.p_i, residuals })
}

/// `(int W'/R_+ ds, (1/2 pi i) int s W'/R_+ ds)` over `Gamma_1` from `conj(xi)` to `xi`.
///
/// The integrand is analytic next to `Gamma_1`, so the traced polyline can
/// stand in for the curve; the chords touching the endpoints absorb the
/// inverse square root.
pub fn endpoint_integrals(cs: &ContourSystem, panels: usize) -> (Complex64, Complex64) {
    let ep = &cs.endpoint;
    let pts = cs.gamma1_closed();
    let n = pts.len();
    let f = |s: Complex64| {
        let wp = -ep.gamma() * ep.a / (s + 1.0 / ep.t()) - ep.a / (s + ep.t()) + (ep.a + 1.0) / s;
        let rp = -cs.r_segment(s);
        (wp / rp, s * wp / rp)
    };
    let mut i1 = Complex64::new(0.0, 0.0);
    let mut i2 = Complex64::new(0.0, 0.0);
    for i in 0..n - 1 {
        let (a, b) = (pts[i], pts[i + 1]);
        let (p1, p2) = if i == 0 {
            (quad::segment_from_root(a, b, panels, |s| f(s).0), quad::segment_from_root(a, b, panels, |s| f(s).1))
        } else if i == n - 2 {
            (-quad::segment_from_root(b, a, panels, |s| f(s).0), -quad::segment_from_root(b, a, panels, |s| f(s).1))
        } else {
            (quad::segment(a, b, panels, |s| f(s).0), quad::segment(a, b, panels, |s| f(s).1))
        };
        i1 += p1;
        i2 += p2;
    }
    (i1, i2 / (2.0 * PI * I))
}
