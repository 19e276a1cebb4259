//! Experiment parameters and the regime inequalities that gate them.
//!
//! Two parameter regions matter on the line: the inflation region, where the
//! quadratic interaction pushes a two-band datum up the frequency ladder,
//! and the well-posed region, where the gauge estimates close. The torus
//! experiments only need positive dispersion and derivative exponents.

use alloc::format;
use alloc::vec::Vec;

// Needed in pure no_std builds; shadowed whenever std is in the crate
// graph (e.g. under the test harness), hence the blanket allow.
#[allow(unused_imports)]
use num_traits::Float;

use crate::{domain_err, Error, Result, Violation};

/// Full parameter set for one experiment.
///
/// `n` is the carrier frequency N of the datum, `theta` the width exponent
/// of the low band, `k` the iterate depth singled out for measurement, and
/// `t_final` the observation time T.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExperimentParams {
    pub alpha: f64,
    pub beta: f64,
    pub s: f64,
    pub sigma: f64,
    pub eps: f64,
    pub n: u32,
    pub theta: f64,
    pub k: u32,
    pub t_final: f64,
}

/// Which inequality family `validate_regime` applies.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RegimeTag {
    /// Line inflation: β above the dispersion threshold, θ inside its window.
    InflationLine,
    /// Line well-posedness: α > 1, β at most (α-1)/2, s above the gauge floor.
    WellposedLine,
    /// Torus growth experiments: positive exponents and N ≥ 3.
    Torus,
}

impl RegimeTag {
    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "inflation-line" => Ok(RegimeTag::InflationLine),
            "wellposed-line" => Ok(RegimeTag::WellposedLine),
            "torus" => Ok(RegimeTag::Torus),
            other => domain_err(format!(
                "unknown regime tag {other:?} (expected inflation-line, wellposed-line, torus)"
            )),
        }
    }

    pub fn as_str(&self) -> &'static str {
        match self {
            RegimeTag::InflationLine => "inflation-line",
            RegimeTag::WellposedLine => "wellposed-line",
            RegimeTag::Torus => "torus",
        }
    }
}

/// Outcome of a regime validation.
#[derive(Debug, Clone, PartialEq)]
pub struct RegimeReport {
    pub tag: RegimeTag,
    pub pass: bool,
    pub violations: Vec<Violation>,
}

fn violation(name: &'static str, detail: alloc::string::String) -> Violation {
    Violation { name, detail }
}

/// Lower edge of the θ window: max(0, α-1, 2(β-1)/3).
pub fn theta_window_lo(alpha: f64, beta: f64) -> f64 {
    (alpha - 1.0).max(2.0 * (beta - 1.0) / 3.0).max(0.0)
}

/// Check the inequalities for `tag`, reporting every violated one by name.
pub fn validate_regime(p: &ExperimentParams, tag: RegimeTag) -> RegimeReport {
    let mut v = Vec::new();
    if !(p.alpha > 0.0) {
        v.push(violation(
            "alpha-positive",
            format!("alpha = {} must be positive", p.alpha),
        ));
    }
    if !(p.eps > 0.0 && p.eps < 1.0) {
        v.push(violation(
            "eps-range",
            format!("eps = {} must lie in (0, 1)", p.eps),
        ));
    }
    if p.n < 3 {
        v.push(violation("n-min", format!("N = {} must be at least 3", p.n)));
    }
    match tag {
        RegimeTag::InflationLine => {
            let floor = ((p.alpha - 1.0) / 2.0).max(0.0);
            if !(p.beta > floor) {
                v.push(violation(
                    "beta-above-dispersion-floor",
                    format!("beta = {} must exceed max((alpha-1)/2, 0) = {floor}", p.beta),
                ));
            }
            let lo = theta_window_lo(p.alpha, p.beta);
            let hi = 2.0 * p.beta;
            if !(p.theta > lo && p.theta < hi) {
                v.push(violation(
                    "theta-window",
                    format!("theta = {} must lie strictly in ({lo}, {hi})", p.theta),
                ));
            }
            if p.k < 1 {
                v.push(violation("k-min", format!("k = {} must be at least 1", p.k)));
            }
            if !(p.t_final > 0.0) {
                v.push(violation(
                    "t-positive",
                    format!("T = {} must be positive", p.t_final),
                ));
            }
        }
        RegimeTag::WellposedLine => {
            if !(p.alpha > 1.0) {
                v.push(violation(
                    "alpha-above-one",
                    format!("alpha = {} must exceed 1", p.alpha),
                ));
            }
            let cap = (p.alpha - 1.0) / 2.0;
            if !(p.beta >= 0.0 && p.beta <= cap) {
                v.push(violation(
                    "beta-below-dispersion-floor",
                    format!("beta = {} must lie in [0, (alpha-1)/2] = [0, {cap}]", p.beta),
                ));
            }
            let s_floor = (p.beta + 0.5).max(p.alpha / 4.0);
            if !(p.s > s_floor) {
                v.push(violation(
                    "s-above-gauge-floor",
                    format!("s = {} must exceed max(beta+1/2, alpha/4) = {s_floor}", p.s),
                ));
            }
        }
        RegimeTag::Torus => {
            if !(p.beta > 0.0) {
                v.push(violation(
                    "beta-positive",
                    format!("beta = {} must be positive", p.beta),
                ));
            }
        }
    }
    RegimeReport {
        tag,
        pass: v.is_empty(),
        violations: v,
    }
}

/// Midpoint of the admissible θ window for the inflation regime.
pub fn choose_theta(alpha: f64, beta: f64) -> Result<f64> {
    let lo = theta_window_lo(alpha, beta);
    let hi = 2.0 * beta;
    if !(lo < hi) {
        return Err(Error::Regime(alloc::vec![violation(
            "theta-window",
            format!("window ({lo}, {hi}) is empty for alpha = {alpha}, beta = {beta}"),
        )]));
    }
    Ok(0.5 * (lo + hi))
}

/// Snap a float to the nearest integer when it is within `tol`, else ceil.
fn ceil_snapped(x: f64, tol: f64) -> f64 {
    let r = x.round();
    if (x - r).abs() <= tol {
        r
    } else {
        x.ceil()
    }
}

/// Iterate depth that overwhelms the requested regularity gap:
/// k = ⌈(|σ-s| + 1)/(β - θ/2)⌉ + 1. Needs β > θ/2; the ceiling snaps
/// values within 1e-9 of an integer so exact ratios are not bumped up
/// by rounding noise.
pub fn choose_k(s: f64, sigma: f64, beta: f64, theta: f64) -> Result<u32> {
    let gap = beta - 0.5 * theta;
    if !(gap > 0.0) {
        return domain_err(format!(
            "iterate depth needs beta > theta/2 (beta = {beta}, theta = {theta})"
        ));
    }
    let raw = ((sigma - s).abs() + 1.0) / gap;
    let k = ceil_snapped(raw, 1e-9) + 1.0;
    if !(k >= 2.0 && k <= u32::MAX as f64) {
        return domain_err(format!("iterate depth {k} out of range"));
    }
    Ok(k as u32)
}

/// Observation time for the line experiment: T = 1/log N.
pub fn choose_time_line(n: u32) -> Result<f64> {
    if n <= 1 {
        return domain_err(format!("N = {n} must exceed 1 for T = 1/log N"));
    }
    Ok(1.0 / (n as f64).ln())
}

/// Observation time for the torus experiment:
/// T = (|σ-s| + 1)(log N)²/N^β.
pub fn choose_time_torus(n: u32, s: f64, sigma: f64, beta: f64) -> Result<f64> {
    if n <= 1 {
        return domain_err(format!("N = {n} must exceed 1 for the torus time scale"));
    }
    let ln_n = (n as f64).ln();
    Ok(((sigma - s).abs() + 1.0) * ln_n * ln_n / (n as f64).powf(beta))
}
