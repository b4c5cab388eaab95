//! The quadratic differential `Q(z) dz^2`, its trajectories and orthogonal
//! trajectories, and the contours `Gamma_1` (from `conj(xi)` to `xi` through
//! the positive axis) and `Gamma_2` (from `xi` to `conj(xi)` through `-z0`).

use std::f64::consts::PI;
use std::io::Write;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::endpoint::{EndpointData, A0_SNAP};
use crate::error::{Error, Result};
use crate::quad;

const I: Complex64 = Complex64 { re: 0.0, im: 1.0 };

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PathKind {
    /// `Q(z) dz^2 > 0`
    Trajectory,
    /// `Q(z) dz^2 < 0`
    Orthogonal,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StartLabel {
    Xi,
    XiBar,
    MinusZ0,
    Seed,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Termination {
    RealAxisCrossing,
    ReachedZero,
    LeftDomain,
    StepLimit,
}

/// A traced curve as an ordered list of points.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComplexPath {
    pub points: Vec<Complex64>,
    pub kind: PathKind,
    pub start_label: StartLabel,
    pub termination: Termination,
    pub crossing: Option<f64>,
}

impl ComplexPath {
    pub fn last(&self) -> Complex64 {
        *self.points.last().expect("paths are never empty")
    }

    pub fn conj(&self) -> ComplexPath {
        ComplexPath {
            points: self.points.iter().map(|z| z.conj()).collect(),
            kind: self.kind,
            start_label: match self.start_label {
                StartLabel::Xi => StartLabel::XiBar,
                StartLabel::XiBar => StartLabel::Xi,
                other => other,
            },
            termination: self.termination,
            crossing: self.crossing,
        }
    }

    /// Largest distance of `exp(i (arg Q + 2 arg dz))` from `+1`
    /// (trajectories) or `-1` (orthogonal) over the chords, with `Q` taken at
    /// chord midpoints. Bounds `|sin(arg Q + 2 arg dz)|` from above.
    pub fn direction_defect(&self, ep: &EndpointData) -> f64 {
        let target = match self.kind {
            PathKind::Trajectory => 1.0,
            PathKind::Orthogonal => -1.0,
        };
        self.points
            .windows(2)
            .map(|w| {
                let dz = w[1] - w[0];
                let q = q_raw(0.5 * (w[0] + w[1]), ep);
                (Complex64::from_polar(1.0, q.arg() + 2.0 * dz.arg()) - target).norm()
            })
            .fold(0.0, f64::max)
    }

    /// Writes `s, Re z, Im z` rows with `s` the cumulative chord length.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        write_points_csv(&self.points, out)
    }
}

/// CSV export of an arbitrary point list with arclength parameter.
pub fn write_points_csv<W: Write>(points: &[Complex64], out: W) -> Result<()> {
    let io = |e: csv::Error| Error::Invariant(format!("csv write failed: {e}"));
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["s", "re", "im"]).map_err(io)?;
    let mut s = 0.0;
    let mut prev = points.first().copied();
    for z in points {
        if let Some(p) = prev {
            s += (z - p).norm();
        }
        prev = Some(*z);
        w.write_record([format!("{s:.16e}"), format!("{:.16e}", z.re), format!("{:.16e}", z.im)]).map_err(io)?;
    }
    w.flush().map_err(|e| Error::Invariant(format!("csv flush failed: {e}")))?;
    Ok(())
}

fn q_raw(z: Complex64, ep: &EndpointData) -> Complex64 {
    let t = ep.t();
    let lead = ep.lead();
    let zp = z + ep.z0;
    let den = z * (z + t) * (z + 1.0 / t);
    -(lead * lead) * (z - ep.xi) * (z - ep.xi.conj()) * zp * zp / (den * den)
}

/// `Q(z) = -(1 + gamma a)^2 (z - xi)(z - conj xi)(z + z0)^2 / (z (z + t)(z + 1/t))^2`.
pub fn q_eval(z: Complex64, ep: &EndpointData) -> Result<Complex64> {
    let t = ep.t();
    for p in [0.0, -t, -1.0 / t] {
        if (z - p).norm() < 1e-12 {
            return Err(Error::Singular(format!("{z} (pole at {p})")));
        }
    }
    Ok(q_raw(z, ep))
}

/// The zeros of `Q` that curves can start from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CriticalPoint {
    Xi,
    XiBar,
    MinusZ0,
}

impl CriticalPoint {
    pub fn location(self, ep: &EndpointData) -> Complex64 {
        match self {
            CriticalPoint::Xi => ep.xi,
            CriticalPoint::XiBar => ep.xi.conj(),
            CriticalPoint::MinusZ0 => Complex64::new(-ep.z0, 0.0),
        }
    }
}

/// Leading coefficient of `Q` at a zero: `Q ~ c (z - z*)^order`.
fn local_coefficient(point: CriticalPoint, ep: &EndpointData) -> (Complex64, u32) {
    let t = ep.t();
    let lead = ep.lead();
    let xi = ep.xi;
    let zp = |z: Complex64| z * (z + t) * (z + 1.0 / t);
    match point {
        CriticalPoint::Xi | CriticalPoint::XiBar => {
            let (s, other) = match point {
                CriticalPoint::Xi => (xi, xi.conj()),
                _ => (xi.conj(), xi),
            };
            let d = zp(s);
            let c = -(lead * lead) * (s - other) * (s + ep.z0) * (s + ep.z0) / (d * d);
            (c, 1)
        }
        CriticalPoint::MinusZ0 => {
            let s = Complex64::new(-ep.z0, 0.0);
            let d = zp(s);
            let c = -(lead * lead) * (s - xi) * (s - xi.conj()) / (d * d);
            (c, 2)
        }
    }
}

/// Unit tangents of the curves leaving a zero, in increasing angle.
///
/// A zero of order `m` has `m + 2` directions of each kind, and the
/// orthogonal ones bisect the trajectory ones.
pub fn local_directions(point: CriticalPoint, kind: PathKind, ep: &EndpointData) -> Vec<Complex64> {
    let (c, order) = local_coefficient(point, ep);
    let prongs = order + 2;
    let target = match kind {
        PathKind::Trajectory => 0.0,
        PathKind::Orthogonal => PI,
    };
    let mut angles: Vec<f64> = (0..prongs)
        .map(|k| {
            let a = (target - c.arg() + 2.0 * PI * k as f64) / prongs as f64;
            a.rem_euclid(2.0 * PI)
        })
        .collect();
    angles.sort_by(f64::total_cmp);
    angles.into_iter().map(|a| Complex64::from_polar(1.0, a)).collect()
}

/// Tracing controls.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TraceOptions {
    pub h_max: f64,
    /// Step is `min(h_max, d / step_divisor)` with `d` the distance to the
    /// nearest zero or pole.
    pub step_divisor: f64,
    /// Distance from a zero at which a curve leaves it.
    pub seed_offset: f64,
    pub r_max: f64,
    pub max_steps: usize,
    /// Pull each step back onto the level set of the conserved part of
    /// `int sqrt(Q) dz`.
    pub project: bool,
    /// A curve passing within this distance of a zero stops at its closest approach.
    pub capture: f64,
}

impl TraceOptions {
    pub fn for_t(t: f64) -> Self {
        Self {
            h_max: 1e-2 / t,
            step_divisor: 50.0,
            seed_offset: 1e-6 / t,
            r_max: 10.0 / t,
            max_steps: 400_000,
            project: true,
            capture: 1e-4 / t,
        }
    }
}

fn field(z: Complex64, kind: PathKind, prev: Complex64, ep: &EndpointData) -> Complex64 {
    let q = q_raw(z, ep);
    let mut v = Complex64::from_polar(1.0, -0.5 * q.arg());
    if kind == PathKind::Orthogonal {
        v *= I;
    }
    if (v * prev.conj()).re < 0.0 {
        v = -v;
    }
    v
}

/// Unit tangent of the curve of the given kind through `z`, oriented to
/// agree with `hint`.
pub fn field_direction(z: Complex64, kind: PathKind, hint: Complex64, ep: &EndpointData) -> Complex64 {
    field(z, kind, hint, ep)
}

fn rk4(z: Complex64, v: Complex64, h: f64, kind: PathKind, ep: &EndpointData) -> (Complex64, Complex64) {
    let k1 = field(z, kind, v, ep);
    let k2 = field(z + k1 * (0.5 * h), kind, k1, ep);
    let k3 = field(z + k2 * (0.5 * h), kind, k2, ep);
    let k4 = field(z + k3 * h, kind, k3, ep);
    (z + (k1 + 2.0 * k2 + 2.0 * k3 + k4) * (h / 6.0), k4)
}

/// `sqrt(Q)` with the sign making `sqrt(Q) v` real positive (trajectories)
/// or positive imaginary (orthogonal).
fn aligned_sqrt_q(z: Complex64, v: Complex64, kind: PathKind, ep: &EndpointData) -> Complex64 {
    let s = q_raw(z, ep).sqrt();
    let p = s * v;
    let flip = match kind {
        PathKind::Trajectory => p.re < 0.0,
        PathKind::Orthogonal => p.im < 0.0,
    };
    if flip {
        -s
    } else {
        s
    }
}

struct Singularities {
    zeros: [Complex64; 3],
    poles: [f64; 3],
}

impl Singularities {
    fn new(ep: &EndpointData) -> Self {
        let t = ep.t();
        Self { zeros: [ep.xi, ep.xi.conj(), Complex64::new(-ep.z0, 0.0)], poles: [0.0, -t, -1.0 / t] }
    }

    fn distance(&self, z: Complex64) -> f64 {
        let dz = self.zeros.iter().map(|s| (z - s).norm()).fold(f64::INFINITY, f64::min);
        let dp = self.poles.iter().map(|&p| (z - p).norm()).fold(f64::INFINITY, f64::min);
        dz.min(dp)
    }

    fn nearest_pole(&self, z: Complex64) -> (f64, f64) {
        self.poles.iter().map(|&p| (p, (z - p).norm())).fold((0.0, f64::INFINITY), |a, b| if b.1 < a.1 { b } else { a })
    }
}

/// Integrates `dz/ds = v(z)` from `start` along the field of the given kind.
///
/// `direction` fixes the initial orientation. Starting exactly at a zero is
/// allowed when `label` names it; the first step then moves `seed_offset`
/// along `direction`.
pub fn trace(
    start: Complex64,
    direction: Complex64,
    kind: PathKind,
    label: StartLabel,
    ep: &EndpointData,
    opts: &TraceOptions,
) -> ComplexPath {
    let sing = Singularities::new(ep);
    let start_zero = match label {
        StartLabel::Xi => Some(0),
        StartLabel::XiBar => Some(1),
        StartLabel::MinusZ0 => Some(2),
        StartLabel::Seed => None,
    };
    let mut points = vec![start];
    let mut v = direction / direction.norm();
    let mut z = start;
    if start_zero.is_some() {
        z = start + v * opts.seed_offset;
        points.push(z);
    }
    // conserved part of F = int sqrt(Q) dz, measured from the start
    let mut invariant = Complex64::new(0.0, 0.0);
    let mut best_zero: Option<(usize, f64)> = None;

    let finish = |points: Vec<Complex64>, termination, crossing| ComplexPath {
        points,
        kind,
        start_label: label,
        termination,
        crossing,
    };

    for _ in 0..opts.max_steps {
        let d = sing.distance(z);
        let h = opts.h_max.min(d / opts.step_divisor);
        let (mut zn, vn) = rk4(z, v, h, kind, ep);

        // near a target zero the level set is a saddle and projection would
        // push the curve sideways
        let near_target =
            sing.zeros.iter().enumerate().any(|(i, s)| Some(i) != start_zero && (z - s).norm() < opts.capture);
        if opts.project && !near_target {
            let inc = quad::segment(z, zn, 1, |p| aligned_sqrt_q(p, vn, kind, ep));
            invariant += inc;
            let s = aligned_sqrt_q(zn, vn, kind, ep);
            let (resid, normal, rate) = match kind {
                PathKind::Trajectory => (invariant.im, vn * I, (s * vn).re),
                PathKind::Orthogonal => (invariant.re, -I * vn, (s * vn).im),
            };
            if rate > 0.0 {
                let delta = -resid / rate;
                if delta.abs() < 0.1 * h {
                    zn += normal * delta;
                    match kind {
                        PathKind::Trajectory => invariant.im = 0.0,
                        PathKind::Orthogonal => invariant.re = 0.0,
                    }
                }
            }
        }

        // real-axis crossing, refined by bisection on the step length
        if z.im != 0.0 && (zn.im == 0.0 || zn.im.signum() != z.im.signum()) {
            let (mut lo, mut hi) = (0.0, h);
            let mut hit = zn;
            for _ in 0..200 {
                let mid = 0.5 * (lo + hi);
                let (zm, _) = rk4(z, v, mid, kind, ep);
                hit = zm;
                if zm.im.abs() < 1e-14 || hi - lo < 1e-16 {
                    break;
                }
                if zm.im.signum() == z.im.signum() {
                    lo = mid;
                } else {
                    hi = mid;
                }
            }
            let x = hit.re;
            points.push(Complex64::new(x, 0.0));
            return finish(points, Termination::RealAxisCrossing, Some(x));
        }

        // closest approach to a zero other than the start
        let mut stop_at_zero = false;
        for (i, s) in sing.zeros.iter().enumerate() {
            if Some(i) == start_zero {
                continue;
            }
            let dist = (zn - s).norm();
            if dist < opts.capture {
                match best_zero {
                    Some((j, prev)) if j == i && dist >= prev => stop_at_zero = true,
                    _ => best_zero = Some((i, dist)),
                }
                if dist < 1e-13 {
                    points.push(zn);
                    stop_at_zero = true;
                }
            }
        }
        if stop_at_zero {
            let end = *points.last().expect("nonempty");
            let crossing = (best_zero.map(|(i, _)| i) == Some(2)).then_some(end.re);
            return finish(points, Termination::ReachedZero, crossing);
        }

        let (pole, pole_dist) = sing.nearest_pole(zn);
        if pole_dist < 1e-10 {
            points.push(Complex64::new(pole, 0.0));
            return finish(points, Termination::RealAxisCrossing, Some(pole));
        }

        points.push(zn);
        if zn.norm() > opts.r_max {
            return finish(points, Termination::LeftDomain, None);
        }
        z = zn;
        v = vn;
    }
    finish(points, Termination::StepLimit, None)
}

/// `Gamma_1` and `Gamma_2` with their crossings of the real axis.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ContourSystem {
    /// Upper half of `Gamma_1`, from `xi` to `p_i`.
    pub gamma1: ComplexPath,
    /// Upper half of `Gamma_2`, from `xi` to (near) `-z0`.
    pub gamma2: ComplexPath,
    /// `Gamma_1` meets the positive axis here.
    pub p_i: f64,
    /// Real part of the closest approach of `Gamma_2` to the axis.
    pub gamma2_hit: f64,
    /// All six curves leaving `xi`, trajectories first.
    pub critical: Vec<ComplexPath>,
    pub endpoint: EndpointData,
    pub warning: Option<String>,
}

impl ContourSystem {
    /// `Gamma_1` from `conj(xi)` through `p_i` to `xi`.
    pub fn gamma1_closed(&self) -> Vec<Complex64> {
        let upper = &self.gamma1.points;
        let mut out: Vec<Complex64> = upper.iter().map(|z| z.conj()).collect();
        out.extend(upper.iter().rev().skip(1));
        out
    }

    /// `Gamma_2` from `xi` through `-z0` to `conj(xi)`.
    pub fn gamma2_closed(&self) -> Vec<Complex64> {
        let upper = &self.gamma2.points;
        let mut out = upper.clone();
        out.push(Complex64::new(-self.endpoint.z0, 0.0));
        out.extend(upper.iter().rev().map(|z| z.conj()));
        out
    }

    /// `|gamma2_hit + z0|`.
    pub fn z0_residual(&self) -> f64 {
        (self.gamma2_hit + self.endpoint.z0).abs()
    }

    /// Max pointwise mismatch between the traced lower half of `Gamma_1`
    /// (from `conj(xi)`) and the mirror image of the upper half.
    pub fn symmetry_residual(&self, opts: &TraceOptions) -> f64 {
        let ep = &self.endpoint;
        let dir = self.gamma1.points[1] - self.gamma1.points[0];
        let lower = trace(ep.xi.conj(), dir.conj(), PathKind::Trajectory, StartLabel::XiBar, ep, opts);
        if lower.points.len() != self.gamma1.points.len() {
            return f64::INFINITY;
        }
        lower.points.iter().zip(&self.gamma1.points).map(|(a, b)| (a - b.conj()).norm()).fold(0.0, f64::max)
    }

    /// True if `z` lies between `Gamma_1` and the segment `[conj xi, xi]`.
    pub fn in_lens(&self, z: Complex64) -> bool {
        let poly = self.gamma1_closed();
        let mut inside = false;
        let n = poly.len();
        for i in 0..n {
            let a = poly[i];
            let b = poly[(i + 1) % n];
            if (a.im > z.im) != (b.im > z.im) {
                let xc = a.re + (z.im - a.im) * (b.re - a.re) / (b.im - a.im);
                if z.re < xc {
                    inside = !inside;
                }
            }
        }
        inside
    }

    /// `sqrt((z - xi)(z - conj xi))` cut along the segment `[conj xi, xi]`.
    pub fn r_segment(&self, z: Complex64) -> Complex64 {
        let ep = &self.endpoint;
        let w = z - ep.alpha();
        let beta = ep.xi.im;
        if w.norm() < 1e-300 {
            return Complex64::new(beta, 0.0);
        }
        let ratio = beta / w;
        w * (1.0 + ratio * ratio).sqrt()
    }

    /// `R(z)`, analytic off `Gamma_1` with `R(z) ~ z` at infinity.
    pub fn r_eval(&self, z: Complex64) -> Complex64 {
        let r = self.r_segment(z);
        if self.in_lens(z) {
            -r
        } else {
            r
        }
    }

    /// One-sided values `(R_+, R_-)` at a point of `Gamma_1`, where `+` is
    /// the left side for the orientation from `conj(xi)` to `xi`.
    pub fn r_boundary(&self, z: Complex64) -> (Complex64, Complex64) {
        let r = self.r_segment(z);
        (-r, r)
    }

    /// `sqrt(Q)` with the cut on `Gamma_1` and `sqrt(Q) ~ i (1 + gamma a)/z` at infinity.
    pub fn sqrt_q(&self, z: Complex64) -> Complex64 {
        sqrt_q_from_r(z, self.r_eval(z), &self.endpoint)
    }
}

/// `i (1 + gamma a) R (z + z0) / (z (z + t)(z + 1/t))` for a given branch value `R`.
pub fn sqrt_q_from_r(z: Complex64, r: Complex64, ep: &EndpointData) -> Complex64 {
    let t = ep.t();
    I * ep.lead() * r * (z + ep.z0) / (z * (z + t) * (z + 1.0 / t))
}

pub fn build_contours(ep: &EndpointData) -> Result<ContourSystem> {
    build_contours_with(ep, &TraceOptions::for_t(ep.t()))
}

pub fn build_contours_with(ep: &EndpointData, opts: &TraceOptions) -> Result<ContourSystem> {
    let a0 = ep.params.scaling().a0;
    if ep.a <= a0 + A0_SNAP || ep.xi.im <= 0.0 {
        return Err(Error::Domain(format!("a = {} must exceed a0 = {a0}", ep.a)));
    }
    let t = ep.t();
    let warning = ep
        .is_nearly_degenerate()
        .then(|| format!("Im xi = {:.3e} < 1e-3: endpoints nearly coalesce, tracing is ill-conditioned", ep.xi.im));

    let mut critical = Vec::with_capacity(6);
    for kind in [PathKind::Trajectory, PathKind::Orthogonal] {
        for d in local_directions(CriticalPoint::Xi, kind, ep) {
            critical.push(trace(ep.xi, d, kind, StartLabel::Xi, ep, opts));
        }
    }

    let positive: Vec<&ComplexPath> = critical[..3]
        .iter()
        .filter(|p| p.termination == Termination::RealAxisCrossing && p.crossing.is_some_and(|x| x > 0.0))
        .collect();
    let gamma1 = match positive.as_slice() {
        [one] => (*one).clone(),
        _ => {
            return Err(Error::Contour(format!(
                "{} trajectories from xi cross the positive axis, expected one",
                positive.len()
            )))
        }
    };
    let p_i = gamma1.crossing.expect("filtered on crossing");

    let minus_z0 = Complex64::new(-ep.z0, 0.0);
    let gamma2 = critical[3..]
        .iter()
        .filter(|p| {
            let x = p.last().re;
            p.termination != Termination::LeftDomain && x > -1.0 / t && x < -t
        })
        .min_by(|a, b| (a.last() - minus_z0).norm().total_cmp(&(b.last() - minus_z0).norm()))
        .cloned()
        .ok_or_else(|| Error::Contour("no orthogonal trajectory from xi reaches (-1/t, -t)".into()))?;
    let gamma2_hit = gamma2.crossing.unwrap_or(gamma2.last().re);
    if (gamma2.last() - minus_z0).norm() > 1e-3 {
        return Err(Error::Contour(format!(
            "orthogonal trajectory ends at {} which is far from -z0 = {}",
            gamma2.last(),
            -ep.z0
        )));
    }

    Ok(ContourSystem { gamma1, gamma2, p_i, gamma2_hit, critical, endpoint: *ep, warning })
}

/// `|Re int sqrt(Q) dz|` from `xi` to a point of `(-1/t, -t)` along the
/// straight segment in the upper half plane.
/// Panels are doubled until two successive values agree, since the segment
/// can pass close to the pole at `-t`.
pub fn real_period_residual(ep: &EndpointData, x_target: f64) -> Result<f64> {
    let mut panels = 8;
    let mut prev = real_period_residual_with(ep, x_target, panels)?;
    while panels < 4096 {
        panels *= 2;
        let next = real_period_residual_with(ep, x_target, panels)?;
        if (next - prev).abs() < 1e-13 {
            return Ok(next);
        }
        prev = next;
    }
    Ok(prev)
}

pub fn real_period_residual_with(ep: &EndpointData, x_target: f64, panels: usize) -> Result<f64> {
    let t = ep.t();
    if !(x_target > -1.0 / t && x_target < -t) {
        return Err(Error::Domain(format!("x = {x_target} must lie in (-1/t, -t)")));
    }
    let xi = ep.xi;
    let end = Complex64::new(x_target, 0.0);
    // along this segment both square-root factors stay off their cuts
    let total = quad::segment_from_root(xi, end, panels, |z| {
        let r = (z - xi).sqrt() * (z - xi.conj()).sqrt();
        sqrt_q_from_r(z, r, ep)
    });
    Ok(total.re.abs())
}
