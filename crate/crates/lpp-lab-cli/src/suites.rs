//! Validation suites behind `lpp-lab validate`.

use std::f64::consts::FRAC_1_SQRT_2;

use lpp_lab::asymptotics::{tail_sum, TailWindow};
use lpp_lab::endpoint::solve_endpoint;
use lpp_lab::gfunction::{check_scalar_rhp, delta_at, GContext};
use lpp_lab::quaddiff::{real_period_residual, TraceOptions};
use lpp_lab::ModelParams;
use serde::Serialize;

use crate::output::CliResult;

#[derive(Debug, Clone, Serialize)]
pub struct Check {
    pub name: String,
    pub value: f64,
    pub threshold: String,
    pub pass: bool,
}

impl Check {
    fn below(name: impl Into<String>, value: f64, tol: f64) -> Self {
        Self { name: name.into(), value, threshold: format!("< {tol:e}"), pass: value < tol }
    }

    fn within(name: impl Into<String>, value: f64, lo: f64, hi: f64) -> Self {
        Self { name: name.into(), value, threshold: format!("in [{lo}, {hi}]"), pass: value >= lo && value <= hi }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct SuiteReport {
    pub suite: String,
    pub checks: Vec<Check>,
}

impl SuiteReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.pass)
    }
}

pub fn identities() -> CliResult<SuiteReport> {
    let mut checks = Vec::new();
    for t in [0.1, 0.3, 0.5, 0.7, 0.9] {
        for g in [1.0, 1.5, 2.0, 4.0] {
            let s = ModelParams::new(t, g)?.scaling();
            checks.push(Check::below(
                format!("c2 a0^3 b0^3 = 1/4 (t={t}, gamma={g})"),
                (s.identity_product() - 0.25).abs(),
                1e-12,
            ));
        }
    }
    for g in [1.0, 2.0] {
        for t in [0.5, FRAC_1_SQRT_2] {
            let p = ModelParams::new(t, g)?;
            let s = p.scaling();
            let d0 = delta_at(s.a0, &p)?;
            checks.push(Check::below(format!("Delta(a0) = 0 (t={t}, gamma={g})"), d0.abs(), 1e-12));
            let e = 1e-4;
            let d2 = (delta_at(s.a0 + e, &p)? - 2.0 * d0 + delta_at(s.a0 - e, &p)?) / (e * e);
            checks.push(Check::below(
                format!("Delta''(a0) = -2 c2 (t={t}, gamma={g}), relative"),
                (d2 / (-2.0 * s.c2) - 1.0).abs(),
                1e-3,
            ));
        }
    }
    Ok(SuiteReport { suite: "identities".into(), checks })
}

pub fn tails(t: f64, gamma: f64, size: usize, x: f64) -> CliResult<SuiteReport> {
    let s = tail_sum(t, gamma, size, x, &TailWindow::default())?;
    let mut checks = vec![
        Check::within(format!("sum / (-x^3/12) (N={size}, x={x}, n={}, b={})", s.n, s.b), s.ratio(), 0.6, 1.4),
        Check::below("partial sum vs log CDF difference", (s.value - s.telescoped).abs(), 1e-10),
    ];
    if let Some(w) = &s.warning {
        checks.push(Check { name: w.clone(), value: x, threshold: "inside window".into(), pass: false });
    }
    Ok(SuiteReport { suite: "tails".into(), checks })
}

pub fn rhp(t: f64, gamma: f64, a: f64) -> CliResult<SuiteReport> {
    let p = ModelParams::new(t, gamma)?;
    let ep = solve_endpoint(a, &p)?;
    let ctx = GContext::with_contours(&ep)?;
    let cs = ctx.contours.as_ref().expect("built with contours");
    let mut checks = vec![
        Check::below("Gamma_2 hits -z0", cs.z0_residual(), 1e-6),
        Check::below("conjugation symmetry of Gamma_1", cs.symmetry_residual(&TraceOptions::for_t(t)), 1e-8),
        Check::below("real period on (-1/t, -t)", real_period_residual(&ep, -0.5 * (t + 1.0 / t))?, 1e-6),
    ];
    for r in check_scalar_rhp(&ctx)?.residuals {
        let name = match r.margin {
            Some(m) => format!("{} (margin {m:.3e})", r.property),
            None => r.property.clone(),
        };
        let pass = r.holds(1e-6);
        checks.push(Check { name, value: r.max_residual, threshold: "< 1e-6".into(), pass });
    }
    Ok(SuiteReport { suite: "rhp".into(), checks })
}
