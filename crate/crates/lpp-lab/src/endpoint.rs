//! Endpoint conditions: the scalar equation `H(r) = 0` on `(r1, r2)` and the
//! derived geometry `x, y, theta_c, xi, z0`.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::ModelParams;

/// Below this distance from `a0` the closed forms are used instead of a root solve.
pub const A0_SNAP: f64 = 1e-9;

/// Solved endpoint geometry for one value of `a`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EndpointData {
    pub a: f64,
    /// `|xi| = -R(0)`
    pub r: f64,
    /// `|xi + 1/t| = -R(-1/t)`
    pub x: f64,
    /// `|xi + t| = -R(-t)`
    pub y: f64,
    pub r1: f64,
    pub r2: f64,
    pub cos_theta: f64,
    pub theta_c: f64,
    pub xi: Complex64,
    pub z0: f64,
    pub params: ModelParams,
}

impl EndpointData {
    pub fn t(&self) -> f64 {
        self.params.t()
    }

    pub fn gamma(&self) -> f64 {
        self.params.gamma()
    }

    /// `1 + gamma a`
    pub fn lead(&self) -> f64 {
        1.0 + self.gamma() * self.a
    }

    /// Real part of the endpoint, `r cos theta_c`.
    pub fn alpha(&self) -> f64 {
        self.xi.re
    }

    /// `|Im xi|` below this makes the contour geometry ill-conditioned.
    pub fn is_nearly_degenerate(&self) -> bool {
        self.xi.im.abs() < 1e-3
    }
}

/// Values and `a`-derivatives of `r, x, y` at `a = a0`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct A0ClosedForms {
    pub r0: f64,
    pub x0: f64,
    pub y0: f64,
    pub r_prime_a0: f64,
    pub x_prime_a0: f64,
    pub y_prime_a0: f64,
}

pub fn a0_closed_forms(params: &ModelParams) -> A0ClosedForms {
    let t = params.t();
    let g = params.gamma();
    let sg = g.sqrt();
    let denom = 4.0 * (1.0 + t * sg) * (t + sg).powi(3);
    let common = (t + t * g + 2.0 * sg).powi(2);
    A0ClosedForms {
        r0: (1.0 + t * sg) / (t + sg),
        x0: sg * (1.0 - t * t) / (t * (t + sg)),
        y0: (1.0 - t * t) / (t + sg),
        r_prime_a0: -3.0 * (g - 1.0) * common * t * t / denom,
        x_prime_a0: (t + 4.0 * sg + 3.0 * t * g) * common * t / denom,
        y_prime_a0: (4.0 * t * sg + g + 3.0) * common * t * t / denom,
    }
}

/// `(r1, r2)`, the interval holding the root of `H`.
pub fn bracket(a: f64, params: &ModelParams) -> (f64, f64) {
    let t = params.t();
    let lead = 1.0 + params.gamma() * a;
    (t * (a + 1.0) / lead, (a + 1.0) / (t * lead))
}

fn h_parts(r: f64, a: f64, params: &ModelParams) -> (f64, f64) {
    let t = params.t();
    let g = params.gamma();
    let (r1, r2) = bracket(a, params);
    let k = (1.0 - t * t) * a * a / (1.0 + g * a).powi(2);
    let u = r2 - r;
    let v = r - r1;
    let h = 1.0 / (r * r) + k * (1.0 / (t * t * u * u) - g * g / (v * v)) - 1.0;
    let dh = -2.0 / r.powi(3) + k * (2.0 / (t * t * u.powi(3)) + 2.0 * g * g / v.powi(3));
    (h, dh)
}

/// `H(r)` on the open bracket.
pub fn endpoint_equation(r: f64, a: f64, params: &ModelParams) -> Result<f64> {
    let (r1, r2) = bracket(a, params);
    if !(r > r1 && r < r2) {
        return Err(Error::Domain(format!("r = {r} outside ({r1}, {r2})")));
    }
    Ok(h_parts(r, a, params).0)
}

/// `x` and `y` from `r`.
fn legs(r: f64, a: f64, params: &ModelParams) -> (f64, f64) {
    let t = params.t();
    let g = params.gamma();
    let (r1, r2) = bracket(a, params);
    let lead = 1.0 + g * a;
    let x = a * g * (1.0 - t * t) / (t * lead * (1.0 - r1 / r));
    let y = a * (1.0 - t * t) / (t * lead * (r2 / r - 1.0));
    (x, y)
}

fn assemble(a: f64, r: f64, x: f64, y: f64, params: &ModelParams) -> EndpointData {
    let t = params.t();
    let (r1, r2) = bracket(a, params);
    let cos_theta = ((x * x - r * r - 1.0 / (t * t)) / (2.0 * r / t)).clamp(-1.0, 1.0);
    let theta_c = cos_theta.acos();
    let xi = Complex64::from_polar(r, theta_c);
    let z0 = (a + 1.0) / (r * (1.0 + params.gamma() * a));
    EndpointData { a, r, x, y, r1, r2, cos_theta, theta_c, xi, z0, params: *params }
}

/// Checks every documented invariant of a solved endpoint.
pub fn check_invariants(ep: &EndpointData) -> Result<()> {
    let t = ep.t();
    let fail = |what: &str| Err(Error::Invariant(format!("{what} at a = {}", ep.a)));
    if !(ep.r1 < ep.r && ep.r < ep.r2) {
        return fail("r1 < r < r2");
    }
    if !(ep.x > 0.0 && ep.y > 0.0) {
        return fail("x, y > 0");
    }
    let raw_cos = (ep.x * ep.x - ep.r * ep.r - 1.0 / (t * t)) / (2.0 * ep.r / t);
    if !(raw_cos > -1.0 - 1e-12 && raw_cos < 1.0) {
        return fail("-1 < cos theta < 1");
    }
    let cos_y = (ep.y * ep.y - ep.r * ep.r - t * t) / (2.0 * ep.r * t);
    if (cos_y - raw_cos).abs() > 1e-10 {
        return fail("agreement of the two cos theta expressions");
    }
    let r_sq = 1.0 + (ep.y * ep.y - t * t * ep.x * ep.x) / (1.0 - t * t);
    if (r_sq - ep.r * ep.r).abs() > 1e-10 * r_sq.max(1.0) {
        return fail("r^2 = 1 + (y^2 - t^2 x^2)/(1 - t^2)");
    }
    if !(t < ep.z0 && ep.z0 < 1.0 / t) {
        return fail("t < z0 < 1/t");
    }
    Ok(())
}

/// Endpoint geometry for `a >= a0`; the closed form is used at `a0`.
pub fn solve_endpoint(a: f64, params: &ModelParams) -> Result<EndpointData> {
    let a0 = params.scaling().a0;
    if !a.is_finite() || a < a0 - A0_SNAP {
        return Err(Error::Domain(format!("a = {a} must be at least a0 = {a0}")));
    }
    let ep = if (a - a0).abs() < A0_SNAP {
        let c = a0_closed_forms(params);
        assemble(a, c.r0, c.x0, c.y0, params)
    } else {
        let r = solve_root(a, params)?;
        let (x, y) = legs(r, a, params);
        assemble(a, r, x, y, params)
    };
    check_invariants(&ep)?;
    Ok(ep)
}

/// Bisection to full resolution, then Newton polish.
fn solve_root(a: f64, params: &ModelParams) -> Result<f64> {
    let (r1, r2) = bracket(a, params);
    let mut lo = r1 * (1.0 + 1e-12);
    let mut hi = r2 * (1.0 - 1e-12);
    let (hlo, hhi) = (h_parts(lo, a, params).0, h_parts(hi, a, params).0);
    if !(hlo < 0.0 && hhi > 0.0) {
        return Err(Error::NoRoot { lo, hi });
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if h_parts(mid, a, params).0 < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let mut r = 0.5 * (lo + hi);
    for _ in 0..3 {
        let (h, dh) = h_parts(r, a, params);
        if dh <= 0.0 || h == 0.0 {
            break;
        }
        let next = r - h / dh;
        if next > r1 && next < r2 && h_parts(next, a, params).0.abs() <= h.abs() {
            r = next;
        } else {
            break;
        }
    }
    Ok(r)
}

/// `(r, x, y)` on the branch that is smooth through `a0`, for any `a` near `a0`.
///
/// Above `a0` this is the solved endpoint. Below `a0` the equation has three
/// roots in the bracket; Newton from the tangent line at `a0` selects the one
/// continuing the physical branch, which is what a centered difference
/// across `a0` needs.
pub fn smooth_branch(a: f64, params: &ModelParams) -> Result<(f64, f64, f64)> {
    let a0 = params.scaling().a0;
    if a >= a0 {
        let ep = solve_endpoint(a, params)?;
        return Ok((ep.r, ep.x, ep.y));
    }
    let c = a0_closed_forms(params);
    let (r1, r2) = bracket(a, params);
    let mut r = c.r0 + c.r_prime_a0 * (a - a0);
    for _ in 0..100 {
        let (h, dh) = h_parts(r, a, params);
        if dh == 0.0 {
            break;
        }
        let step = h / dh;
        r -= step;
        if !(r > r1 && r < r2) {
            return Err(Error::NoRoot { lo: r1, hi: r2 });
        }
        if step.abs() < 1e-16 * r {
            break;
        }
    }
    let (x, y) = legs(r, a, params);
    Ok((r, x, y))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn half() -> ModelParams {
        ModelParams::new(0.5, 1.0).unwrap()
    }

    fn reference() -> ModelParams {
        ModelParams::new(std::f64::consts::FRAC_1_SQRT_2, 2.0).unwrap()
    }

    #[test]
    fn bracket_examples() {
        let (r1, r2) = bracket(0.5, &half());
        assert!((r1 - 0.5).abs() < 1e-15 && (r2 - 2.0).abs() < 1e-15);
        let (r1, r2) = bracket(4.0, &reference());
        assert!((r1 - 5.0 / (9.0 * 2f64.sqrt())).abs() < 1e-15);
        assert!((r2 - 5.0 * 2f64.sqrt() / 9.0).abs() < 1e-15);
        assert!((r2 / r1 - 2.0).abs() < 1e-14);
    }

    #[test]
    fn equation_at_a0_and_edges() {
        let p = half();
        assert!(endpoint_equation(1.0, 0.5, &p).unwrap().abs() < 1e-15);
        let (r1, r2) = bracket(0.5, &p);
        assert!(endpoint_equation(r1 + 1e-6, 0.5, &p).unwrap() < -1e3);
        assert!(endpoint_equation(r2 - 1e-6, 0.5, &p).unwrap() > 1e3);
        assert!(endpoint_equation(r1, 0.5, &p).is_err());
    }

    #[test]
    fn closed_form_at_a0() {
        let ep = solve_endpoint(0.5, &half()).unwrap();
        assert!((ep.r - 1.0).abs() < 1e-15);
        assert!((ep.x - 1.0).abs() < 1e-15);
        assert!((ep.y - 0.5).abs() < 1e-15);
        assert!((ep.cos_theta + 1.0).abs() < 1e-15);
        assert!((ep.z0 - 1.0).abs() < 1e-15);
        let c = a0_closed_forms(&half());
        assert_eq!(c.r_prime_a0, 0.0);
        assert!((c.r0 - 1.0).abs() < 1e-15);
    }

    #[test]
    fn derivative_identity() {
        let p = reference();
        let c = a0_closed_forms(&p);
        let sg = p.gamma().sqrt();
        let t = p.t();
        let lhs = (1.0 + t * sg) * c.r_prime_a0;
        let rhs = c.y_prime_a0 - t * sg * c.x_prime_a0;
        assert!((lhs - rhs).abs() < 1e-12);
    }

    #[test]
    fn reference_parameters() {
        let ep = solve_endpoint(4.0, &reference()).unwrap();
        assert!(ep.r > 0.392_837 && ep.r < 0.785_674);
        assert!(endpoint_equation(ep.r, 4.0, &reference()).unwrap().abs() < 1e-12);
        assert!(ep.xi.im > 0.0);
        // bisection oracle, independent of the solver's polish step
        let (mut lo, mut hi) = bracket(4.0, &reference());
        lo *= 1.0 + 1e-9;
        hi *= 1.0 - 1e-9;
        for _ in 0..100 {
            let mid = 0.5 * (lo + hi);
            if endpoint_equation(mid, 4.0, &reference()).unwrap() < 0.0 {
                lo = mid
            } else {
                hi = mid
            }
        }
        assert!((ep.r - lo).abs() < 1e-13);
    }

    #[test]
    fn just_above_a0() {
        let ep = solve_endpoint(0.5001, &half()).unwrap();
        assert!(ep.cos_theta > -1.0 && ep.cos_theta < -0.9);
    }

    #[test]
    fn below_a0_is_rejected() {
        assert!(matches!(solve_endpoint(0.4, &half()), Err(Error::Domain(_))));
    }

    #[test]
    fn slope_at_a0_matches_closed_form() {
        let p = reference();
        let c = a0_closed_forms(&p);
        let a0 = p.scaling().a0;
        let eps = 1e-5;
        let ep = solve_endpoint(a0 + eps, &p).unwrap();
        let slope = (ep.r - c.r0) / eps;
        assert!((slope / c.r_prime_a0 - 1.0).abs() < 1e-4, "{slope} vs {}", c.r_prime_a0);
    }

    #[test]
    fn smooth_branch_is_continuous_at_a0() {
        let p = reference();
        let a0 = p.scaling().a0;
        let c = a0_closed_forms(&p);
        let (rm, xm, ym) = smooth_branch(a0 - 1e-4, &p).unwrap();
        let (rp, xp, yp) = smooth_branch(a0 + 1e-4, &p).unwrap();
        assert!(((rp - rm) / 2e-4 - c.r_prime_a0).abs() < 1e-6);
        assert!(((xp - xm) / 2e-4 - c.x_prime_a0).abs() < 1e-6);
        assert!(((yp - ym) / 2e-4 - c.y_prime_a0).abs() < 1e-6);
    }

    proptest! {
        #[test]
        fn invariants_above_a0(t in 0.1f64..0.9, g in 1.0f64..5.0, rel in 0.001f64..3.0) {
            let p = ModelParams::new(t, g).unwrap();
            let a = p.scaling().a0 * (1.0 + rel);
            let ep = solve_endpoint(a, &p).unwrap();
            let (h, dh) = h_parts(ep.r, a, &p);
            prop_assert!(h.abs() < 1e-12 * (1.0 + 1.0 / (ep.r * ep.r)));
            prop_assert!(dh > 0.0);
            prop_assert!(ep.x + ep.y > 1.0 / t - t);
            prop_assert!(ep.cos_theta > -1.0 && ep.cos_theta < 1.0);
        }

        #[test]
        fn cos_tends_to_minus_one(t in 0.2f64..0.8, g in 1.0f64..4.0) {
            let p = ModelParams::new(t, g).unwrap();
            let a0 = p.scaling().a0;
            let near = solve_endpoint(a0 * (1.0 + 1e-6), &p).unwrap();
            let far = solve_endpoint(a0 * 1.1, &p).unwrap();
            prop_assert!(near.cos_theta < far.cos_theta);
            prop_assert!(near.cos_theta + 1.0 < 1e-3);
        }
    }
}
