//! The combinatorial majorant behind the iterate bounds.
//!
//! Splitting a depth-k iterate into its two Duhamel factors weights each
//! split (k₁, k₂) by (2k₂)^β/(k-1); summing over all splits gives the
//! sequence
//!
//! ```text
//!     a_1 = 1,    a_k = Σ_{k₁+k₂=k} (2k₂)^β / (k-1) · a_{k₁} a_{k₂},
//! ```
//!
//! which is in turn dominated by (π²2^β)^{k-1} ((k-1)!)^{max(0,β-1)}. The
//! extremal case of the abstract recurrence a_k ≤ C₀ Σ a_{k₁} a_{k₂} is the
//! Catalan sequence, giving the geometric bound with constant (2/3)π²C₀.
//! The same machinery majorises the low-band contribution to a frequency
//! window near N: `tail_sum_bound` evaluates that sum term by term in
//! log-space, since the indices run up to ⌈k + N^{θ+1}⌉ and the summands
//! underflow doubles long before they stop mattering.

use alloc::vec::Vec;

// Needed in pure no_std builds; shadowed whenever std is in the crate
// graph (e.g. under the test harness), hence the blanket allow.
#[allow(unused_imports)]
use num_traits::Float;

use crate::params::ExperimentParams;
use crate::{domain_err, Result};

/// Which recurrence produced a sequence.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MajorantKind {
    /// The derivative-weighted splitting recurrence above.
    SplitWeighted,
    /// The extremal Catalan comparison sequence c_k = C₀ Σ c_{k₁} c_{k₂}.
    CatalanExtremal,
    /// A caller-supplied sequence carried through the report machinery.
    Custom,
}

/// A majorant sequence a_1..a_K with both plain and log-space values.
///
/// `values[k-1]` is a_k as a double (∞ if it overflowed 1e300);
/// `ln_values[k-1]` is ln a_k and stays finite far beyond double range.
#[derive(Debug, Clone, PartialEq)]
pub struct MajorantSeq {
    pub beta: f64,
    pub kind: MajorantKind,
    pub values: Vec<f64>,
    pub ln_values: Vec<f64>,
}

const OVERFLOW_SWITCH: f64 = 1e300;

/// Compute a_1..a_{k_max} of the splitting recurrence, O(K²).
pub fn compute_ak(beta: f64, k_max: u32) -> Result<MajorantSeq> {
    if !(beta >= 0.0) || !beta.is_finite() {
        return domain_err(alloc::format!("beta = {beta} must be finite and nonnegative"));
    }
    if k_max == 0 {
        return domain_err("sequence length must be at least 1");
    }
    let km = k_max as usize;
    let mut values = Vec::with_capacity(km);
    let mut ln_values = Vec::with_capacity(km);
    values.push(1.0);
    ln_values.push(0.0);
    for k in 2..=km {
        let mut plain = 0.0f64;
        // log-sum-exp over the splits, shifted by the running maximum.
        let mut ln_terms: Vec<f64> = Vec::with_capacity(k - 1);
        for k2 in 1..k {
            let k1 = k - k2;
            let w = (2.0 * k2 as f64).powf(beta) / (k as f64 - 1.0);
            plain += w * values[k1 - 1] * values[k2 - 1];
            ln_terms.push(w.ln() + ln_values[k1 - 1] + ln_values[k2 - 1]);
        }
        let m = ln_terms.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let ln_ak = m + ln_terms.iter().map(|t| (t - m).exp()).sum::<f64>().ln();
        values.push(if plain <= OVERFLOW_SWITCH {
            plain
        } else {
            f64::INFINITY
        });
        ln_values.push(ln_ak);
    }
    Ok(MajorantSeq {
        beta,
        kind: MajorantKind::SplitWeighted,
        values,
        ln_values,
    })
}

/// One row of a bound comparison.
#[derive(Debug, Clone, PartialEq)]
pub struct BoundRow {
    pub k: u32,
    pub value: f64,
    pub bound: f64,
    /// value/bound, computed in log-space so overflowed entries still report.
    pub ratio: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BoundReport {
    pub rows: Vec<BoundRow>,
    pub pass: bool,
    /// k attaining the largest ratio.
    pub worst_k: u32,
}

fn report_from_rows(rows: Vec<BoundRow>) -> BoundReport {
    let mut pass = true;
    let mut worst_k = rows.first().map(|r| r.k).unwrap_or(0);
    let mut worst = f64::NEG_INFINITY;
    for r in &rows {
        if r.ratio > worst {
            worst = r.ratio;
            worst_k = r.k;
        }
        if !(r.ratio <= 1.0 + 1e-12) {
            pass = false;
        }
    }
    BoundReport {
        rows,
        pass,
        worst_k,
    }
}

/// Check a_k ≤ (π²2^β)^{k-1} ((k-1)!)^{max(0,β-1)} for every k.
pub fn check_factorial_bound(seq: &MajorantSeq) -> Result<BoundReport> {
    if seq.kind != MajorantKind::SplitWeighted {
        return domain_err("factorial bound applies to the splitting recurrence");
    }
    let base = core::f64::consts::PI * core::f64::consts::PI * 2.0f64.powf(seq.beta);
    let fac_pow = (seq.beta - 1.0).max(0.0);
    let rows = seq
        .ln_values
        .iter()
        .enumerate()
        .map(|(i, &ln_ak)| {
            let k = (i + 1) as u32;
            let ln_bound = i as f64 * base.ln() + fac_pow * libm::lgamma(k as f64);
            BoundRow {
                k,
                value: seq.values[i],
                bound: if ln_bound < OVERFLOW_SWITCH.ln() {
                    ln_bound.exp()
                } else {
                    f64::INFINITY
                },
                ratio: (ln_ak - ln_bound).exp(),
            }
        })
        .collect();
    Ok(report_from_rows(rows))
}

/// Build the extremal sequence c_1 = a1, c_k = C₀ Σ c_{k₁} c_{k₂} (whose
/// closed form is c_k = C₀^{k-1} Catalan(k-1) a1^k) and compare it against
/// the geometric majorant ((2/3)π²C₀)^{k-1} a1^k.
pub fn catalan_majorant_check(c0: f64, a1: f64, k_max: u32) -> Result<BoundReport> {
    if !(c0 > 0.0 && a1 > 0.0) {
        return domain_err("the comparison sequence needs positive C0 and a1");
    }
    if k_max == 0 || k_max > 64 {
        return domain_err("extremal comparison supports 1 ≤ k_max ≤ 64");
    }
    let km = k_max as usize;
    let mut c = Vec::with_capacity(km);
    c.push(a1);
    for k in 2..=km {
        let mut acc = 0.0;
        for k2 in 1..k {
            acc += c[k - k2 - 1] * c[k2 - 1];
        }
        c.push(c0 * acc);
    }
    let geo = 2.0 / 3.0 * core::f64::consts::PI * core::f64::consts::PI * c0;
    let rows = c
        .iter()
        .enumerate()
        .map(|(i, &ck)| {
            let bound = geo.powi(i as i32) * a1.powi(i as i32 + 1);
            BoundRow {
                k: (i + 1) as u32,
                value: ck,
                bound,
                ratio: ck / bound,
            }
        })
        .collect();
    Ok(report_from_rows(rows))
}

/// Exponentially many summands, evaluated in log-space.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TailBound {
    /// The sum as a double; 0.0 when it underflows, ∞ when it overflows.
    pub value: f64,
    /// ln of the sum; -∞ for an empty range.
    pub log_value: f64,
    pub lower: u64,
    pub upper: u64,
    pub empty_range: bool,
}

/// ln of the single depth-l low-band summand of the window estimate at
/// frequency weight σ: ε (π²2^β ε T)^{l-1} ((l-1)^{l-1/2} e^{-l+2})^{max(0,β-1)}
/// · N^{θβ + θ(-β+1/2)l} · N^{-(l-1)θ} · N^{σ-θ/2}.
pub fn ln_tail_summand(p: &ExperimentParams, sigma: f64, l: u64) -> f64 {
    let lf = l as f64;
    let n = p.n as f64;
    let ln_n = n.ln();
    let base = core::f64::consts::PI * core::f64::consts::PI
        * 2.0f64.powf(p.beta)
        * p.eps
        * p.t_final;
    let stirling_pow = (p.beta - 1.0).max(0.0);
    // (l-1)^{l-1/2} e^{-l+2}; at l = 1 the factor is 0^{1/2}·e = 0 when the
    // exponent is active and 1 otherwise.
    let ln_stirling = if stirling_pow == 0.0 {
        0.0
    } else if l == 1 {
        f64::NEG_INFINITY
    } else {
        stirling_pow * ((lf - 0.5) * (lf - 1.0).ln() + (-lf + 2.0))
    };
    let n_exponent = p.theta * p.beta + p.theta * (0.5 - p.beta) * lf - (lf - 1.0) * p.theta
        + sigma
        - 0.5 * p.theta;
    p.eps.ln() + (lf - 1.0) * base.ln() + ln_stirling + n_exponent * ln_n
}

/// Sum the low-band window majorant over its index range
/// l ∈ [⌊(k-1+N^{θ+1})/2⌋, ⌈k+N^{θ+1}⌉].
pub fn tail_sum_bound(p: &ExperimentParams, sigma: f64) -> Result<TailBound> {
    if p.n < 2 || !(p.theta > 0.0) || !(p.eps >= 0.0) || !(p.t_final > 0.0) {
        return domain_err("tail sum needs N ≥ 2, positive theta and T, eps ≥ 0");
    }
    let n_pow = (p.n as f64).powf(p.theta + 1.0);
    if !n_pow.is_finite() || n_pow > 1e15 {
        return Err(crate::Error::Resource {
            what: alloc::format!("window index range ~ N^(θ+1) = {n_pow:.3e} terms"),
            suggestion: alloc::string::String::from("reduce N or theta"),
        });
    }
    let lower = ((p.k as f64 - 1.0 + n_pow) / 2.0).floor() as u64;
    let upper = (p.k as f64 + n_pow).ceil() as u64;
    if lower > upper {
        return Ok(TailBound {
            value: 0.0,
            log_value: f64::NEG_INFINITY,
            lower,
            upper,
            empty_range: true,
        });
    }
    let lower = lower.max(1);
    if p.eps == 0.0 {
        // Every summand carries a factor ε; avoid 0·ln 0 in the log form.
        return Ok(TailBound {
            value: 0.0,
            log_value: f64::NEG_INFINITY,
            lower,
            upper,
            empty_range: false,
        });
    }
    // log-sum-exp over the range; the max shift keeps it exact enough even
    // when every term is astronomically small.
    let mut max_ln = f64::NEG_INFINITY;
    for l in lower..=upper {
        max_ln = max_ln.max(ln_tail_summand(p, sigma, l));
    }
    if max_ln == f64::NEG_INFINITY {
        return Ok(TailBound {
            value: 0.0,
            log_value: f64::NEG_INFINITY,
            lower,
            upper,
            empty_range: false,
        });
    }
    let mut acc = 0.0;
    for l in lower..=upper {
        acc += (ln_tail_summand(p, sigma, l) - max_ln).exp();
    }
    let log_value = max_ln + acc.ln();
    Ok(TailBound {
        value: log_value.exp(),
        log_value,
        lower,
        upper,
        empty_range: false,
    })
}
