//! Composite Gauss–Legendre quadrature for complex integrands along segments.

use std::sync::OnceLock;

use gauss_quad::GaussLegendre;
use num_complex::Complex64;

/// Points per panel.
pub const PANEL_ORDER: usize = 16;

fn rule() -> &'static [(f64, f64)] {
    static RULE: OnceLock<Vec<(f64, f64)>> = OnceLock::new();
    RULE.get_or_init(|| {
        let gl = GaussLegendre::new(PANEL_ORDER).expect("valid order");
        gl.nodes().copied().zip(gl.weights().copied()).collect()
    })
}

/// `int_a^b f(z) dz` along the straight segment, split into `panels` pieces.
pub fn segment<F>(a: Complex64, b: Complex64, panels: usize, mut f: F) -> Complex64
where
    F: FnMut(Complex64) -> Complex64,
{
    let panels = panels.max(1);
    let step = (b - a) / panels as f64;
    let mut total = Complex64::new(0.0, 0.0);
    for p in 0..panels {
        let lo = a + step * p as f64;
        let mid = lo + step * 0.5;
        for &(x, w) in rule() {
            total += f(mid + step * (0.5 * x)) * (w * 0.5);
        }
    }
    total * step
}

/// `int_a^b f(z) dz` where `f` behaves like `(z - a)^(+-1/2)` near `a`.
///
/// Substitutes `z = a + (b - a) u^2` so the integrand is smooth in `u`.
pub fn segment_from_root<F>(a: Complex64, b: Complex64, panels: usize, mut f: F) -> Complex64
where
    F: FnMut(Complex64) -> Complex64,
{
    let len = b - a;
    let panels = panels.max(1);
    let du = 1.0 / panels as f64;
    let mut total = Complex64::new(0.0, 0.0);
    for p in 0..panels {
        let mid = (p as f64 + 0.5) * du;
        for &(x, w) in rule() {
            let u = mid + 0.5 * du * x;
            total += f(a + len * (u * u)) * (2.0 * u * w * 0.5 * du);
        }
    }
    total * len
}

/// Cumulative integral along a polyline, one value per vertex (starting at 0).
pub fn polyline_cumulative<F>(points: &[Complex64], panels: usize, mut f: F) -> Vec<Complex64>
where
    F: FnMut(Complex64) -> Complex64,
{
    let mut out = Vec::with_capacity(points.len());
    let mut acc = Complex64::new(0.0, 0.0);
    out.push(acc);
    for w in points.windows(2) {
        acc += segment(w[0], w[1], panels, &mut f);
        out.push(acc);
    }
    out
}
