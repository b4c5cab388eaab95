//! Asymptotic predictions for `log(-Y21(0; k))`, the lower moderate-deviation
//! tail, and Tracy–Widom tails, compared against the exact Toeplitz engine.

use std::f64::consts::PI;
use std::io::Write;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::endpoint::solve_endpoint;
use crate::error::{Error, Result};
use crate::gfunction::delta;
use crate::model::{md_level, ModelParams};
use crate::toeplitz::{DistributionTable, SymbolSpec, TableOptions};

/// Leading-order prediction for one `(k, a)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AsymptoticPrediction {
    pub k: usize,
    pub a: f64,
    pub delta: f64,
    /// `sin(theta_c / 2)`
    pub sin_half_theta: f64,
    /// `k Delta + log sin(theta_c / 2)`
    pub predicted_log_y21: f64,
    /// `-c2 k (a - a0)^2`
    pub quadratic_surrogate: f64,
}

pub fn predict_log_y21(k: usize, a: f64, params: &ModelParams) -> Result<AsymptoticPrediction> {
    let s = params.scaling();
    if !(a > s.a0) {
        return Err(Error::Domain(format!("a = {a} must exceed a0 = {}", s.a0)));
    }
    let ep = solve_endpoint(a, params)?;
    let d = delta(&ep)?;
    let sin_half_theta = (0.5 * ep.theta_c).sin();
    let kf = k as f64;
    Ok(AsymptoticPrediction {
        k,
        a,
        delta: d,
        sin_half_theta,
        predicted_log_y21: kf * d + sin_half_theta.ln(),
        quadratic_surrogate: -s.c2 * kf * (a - s.a0) * (a - s.a0),
    })
}

/// One row of a [`ComparisonReport`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComparisonRow {
    /// `k` or `N`, depending on the sweep.
    pub sweep: f64,
    pub exact: f64,
    pub predicted: Option<f64>,
    pub abs_err: Option<f64>,
    pub rel_err: Option<f64>,
    pub flag: Option<String>,
}

impl ComparisonRow {
    fn new(sweep: f64, exact: f64, predicted: Option<f64>, flag: Option<String>) -> Self {
        let abs_err = predicted.map(|p| (exact - p).abs());
        let rel_err = abs_err.map(|e| e / exact.abs());
        Self { sweep, exact, predicted, abs_err, rel_err, flag }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComparisonReport {
    pub quantity: String,
    pub sweep_name: String,
    pub t: f64,
    pub gamma: f64,
    /// Fixed size `N`, when the sweep is over `k`.
    pub size: Option<usize>,
    /// Range of `a = N/k` covered, when meaningful.
    pub a_range: Option<(f64, f64)>,
    /// What `predicted` means in this report.
    pub reference: String,
    pub rows: Vec<ComparisonRow>,
}

impl ComparisonReport {
    pub fn row(&self, sweep: f64) -> Option<&ComparisonRow> {
        self.rows.iter().find(|r| r.sweep == sweep)
    }

    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let io = |e: csv::Error| Error::Invariant(format!("csv write failed: {e}"));
        let mut w = csv::Writer::from_writer(out);
        w.write_record([self.sweep_name.as_str(), "exact", "predicted", "abs_err", "rel_err", "flag"]).map_err(io)?;
        let num = |v: Option<f64>| v.map(fmt_f64).unwrap_or_default();
        for r in &self.rows {
            w.write_record([
                fmt_f64(r.sweep),
                fmt_f64(r.exact),
                num(r.predicted),
                num(r.abs_err),
                num(r.rel_err),
                r.flag.clone().unwrap_or_default(),
            ])
            .map_err(io)?;
        }
        w.flush().map_err(|e| Error::Invariant(format!("csv flush failed: {e}")))?;
        Ok(())
    }

    pub fn to_json(&self) -> Result<String> {
        serde_json::to_string_pretty(self).map_err(|e| Error::Invariant(format!("json encode failed: {e}")))
    }
}

/// 17 significant digits.
pub fn fmt_f64(v: f64) -> String {
    format!("{v:.16e}")
}

/// `M = floor(gamma N)`.
pub fn long_side(gamma: f64, n: usize) -> usize {
    (gamma * n as f64).floor() as usize
}

/// Upper edge `(1 + delta) a0` of the range where the leading term is trusted.
pub const DEFAULT_VALIDITY_DELTA: f64 = 0.3;

/// Exact `log(-Y21(0; k))` for `G(M, N)` against `k Delta(N/k) + log sin(theta_c/2)`.
///
/// Rows with `a <= a0` carry no prediction; rows above `(1 + 0.3) a0` are flagged.
pub fn compare_y21(t: f64, gamma: f64, m: usize, n: usize, k_list: &[usize]) -> Result<ComparisonReport> {
    let params = ModelParams::new(t, gamma)?;
    if m != long_side(gamma, n) {
        return Err(Error::Domain(format!("M = {m} must equal floor(gamma N) = {}", long_side(gamma, n))));
    }
    if k_list.contains(&0) {
        return Err(Error::Domain("k must be at least 1".into()));
    }
    let mut ks = k_list.to_vec();
    ks.sort_unstable();
    ks.dedup();
    let k_top = *ks.last().ok_or_else(|| Error::Domain("empty k list".into()))?;
    let spec = SymbolSpec::new(t, m, n)?;
    let table = DistributionTable::build(
        spec,
        TableOptions { min_k: k_top, k_cap: Some(k_top), stop_at_min: true, ..TableOptions::default() },
    )?;
    let a0 = params.scaling().a0;
    let rows = ks
        .par_iter()
        .map(|&k| -> Result<ComparisonRow> {
            let exact = table.log_y21(k)?;
            let a = n as f64 / k as f64;
            if a <= a0 {
                return Ok(ComparisonRow::new(k as f64, exact, None, Some(format!("a = {a} <= a0"))));
            }
            let pred = predict_log_y21(k, a, &params)?;
            let flag = (a > (1.0 + DEFAULT_VALIDITY_DELTA) * a0)
                .then(|| format!("a = {a} above (1 + {DEFAULT_VALIDITY_DELTA}) a0"));
            Ok(ComparisonRow::new(k as f64, exact, Some(pred.predicted_log_y21), flag))
        })
        .collect::<Result<Vec<_>>>()?;
    let a_lo = n as f64 / k_top as f64;
    let a_hi = n as f64 / ks[0] as f64;
    Ok(ComparisonReport {
        quantity: "log(-Y21(0;k))".into(),
        sweep_name: "k".into(),
        t,
        gamma,
        size: Some(n),
        a_range: Some((a_lo, a_hi)),
        reference: "k Delta + log sin(theta_c/2)".into(),
        rows,
    })
}

/// The window `L <= x <= delta N^(2/3)` of the moderate-deviation sum.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TailWindow {
    pub l: f64,
    pub delta: f64,
}

impl Default for TailWindow {
    fn default() -> Self {
        Self { l: 2.0, delta: 0.3 }
    }
}

impl TailWindow {
    /// Scaled position of the upper summation end `b`.
    ///
    /// The admissible constants satisfy `L > 2 L0 / (a0^(4/3) b0)`; taking
    /// half of the largest admissible `L0` puts `b` at `x = L/4`.
    pub fn upper_x(&self) -> f64 {
        self.l / 4.0
    }
}

/// The sum `sum_{k=n+1}^{b} log(-Y21(0; k))` with everything needed to audit it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TailSum {
    pub size: usize,
    pub x: f64,
    pub window: TailWindow,
    pub n: usize,
    pub b: usize,
    pub value: f64,
    /// `log P(G <= n) - log P(G <= b)` from the cumulative table.
    pub telescoped: f64,
    /// `-x^3 / 12`
    pub md: f64,
    pub warning: Option<String>,
}

impl TailSum {
    pub fn ratio(&self) -> f64 {
        self.value / self.md
    }
}

/// Levels `n = floor(N/a0 - x b0 N^(1/3))` and `b` at `x = L/4`.
pub fn tail_levels(params: &ModelParams, size: usize, x: f64, window: &TailWindow) -> (usize, usize) {
    let s = params.scaling();
    let floor0 = |v: f64| if v > 0.0 { v.floor() as usize } else { 0 };
    (floor0(md_level(size as u64, x, &s)), floor0(md_level(size as u64, window.upper_x(), &s)))
}

pub fn tail_sum(t: f64, gamma: f64, size: usize, x: f64, window: &TailWindow) -> Result<TailSum> {
    let params = ModelParams::new(t, gamma)?;
    if !x.is_finite() {
        return Err(Error::Domain(format!("x = {x} must be finite")));
    }
    let (n, b) = tail_levels(&params, size, x, window);
    let spec = SymbolSpec::new(t, long_side(gamma, size), size)?;
    let table = DistributionTable::build(spec, TableOptions { min_k: b, ..TableOptions::default() })?;
    let mut value = 0.0;
    for k in n + 1..=b {
        value += table.log_y21(k)?;
    }
    let telescoped = if n < b { table.log_cdf_at(n) - table.log_cdf_at(b) } else { 0.0 };
    let upper = window.delta * (size as f64).powf(2.0 / 3.0);
    let warning = (x < window.l || x > upper).then(|| format!("x = {x} outside the window [{}, {upper}]", window.l));
    Ok(TailSum { size, x, window: *window, n, b, value, telescoped, md: md_exponent(x), warning })
}

/// `log P(G <= n) - log P(G <= b)` as the partial sum of `log(-Y21)`, with the default window.
pub fn tail_log_ratio(t: f64, gamma: f64, size: usize, x: f64) -> Result<f64> {
    Ok(tail_sum(t, gamma, size, x, &TailWindow::default())?.value)
}

/// `-x^3 / 12`
pub fn md_exponent(x: f64) -> f64 {
    -x * x * x / 12.0
}

/// `log F(x) ~ x^3 / 12` as `x -> -inf`.
pub fn tw_left_tail_log(x: f64) -> Result<f64> {
    if !(x < 0.0) {
        return Err(Error::Domain(format!("left tail needs x < 0, got {x}")));
    }
    Ok(x * x * x / 12.0)
}

/// `log(1 - F(x)) ~ -(4/3) x^(3/2) - log(16 pi x^(3/2))` as `x -> inf`.
pub fn tw_right_tail_log(x: f64) -> Result<f64> {
    if !(x > 0.0) {
        return Err(Error::Domain(format!("right tail needs x > 0, got {x}")));
    }
    let p = x.powf(1.5);
    Ok(-4.0 / 3.0 * p - (16.0 * PI * p).ln())
}

/// Mass below this is dropped from the upper tail of moment sums.
pub const MOMENT_TAIL: f64 = 1e-12;

/// `E[theta_N^m]` with `theta_N = (G - N/a0) / (b0 N^(1/3))` from the exact distribution.
pub fn scaled_moment(t: f64, gamma: f64, size: usize, m: u32) -> Result<f64> {
    let params = ModelParams::new(t, gamma)?;
    let s = params.scaling();
    let spec = SymbolSpec::new(t, long_side(gamma, size), size)?;
    let table = DistributionTable::build(spec, TableOptions::default())?;
    let nf = size as f64;
    let (center, scale) = (nf / s.a0, s.b0 * nf.cbrt());
    let mut total = 0.0;
    let mut prev = 0.0;
    for (g, lc) in table.log_cdf.iter().enumerate() {
        let cdf = lc.exp();
        let p = cdf - prev;
        prev = cdf;
        total += p * ((g as f64 - center) / scale).powi(m as i32);
        if cdf > 1.0 - MOMENT_TAIL {
            break;
        }
    }
    Ok(total)
}

/// `E[theta_N^m]` across sizes; `predicted` holds the value at the previous size.
pub fn moment_stability(t: f64, gamma: f64, sizes: &[usize], m: u32) -> Result<ComparisonReport> {
    if m > 4 {
        return Err(Error::Domain(format!("moment order {m} exceeds 4")));
    }
    if sizes.is_empty() || sizes.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::Domain("sizes must be nonempty and increasing".into()));
    }
    let values = sizes.par_iter().map(|&n| scaled_moment(t, gamma, n, m)).collect::<Result<Vec<_>>>()?;
    let rows = values
        .iter()
        .enumerate()
        .map(|(i, &v)| ComparisonRow::new(sizes[i] as f64, v, i.checked_sub(1).map(|j| values[j]), None))
        .collect();
    Ok(ComparisonReport {
        quantity: format!("E[theta_N^{m}]"),
        sweep_name: "N".into(),
        t,
        gamma,
        size: None,
        a_range: None,
        reference: "value at the previous N".into(),
        rows,
    })
}
