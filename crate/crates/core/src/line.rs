//! Picard iterates of the dispersive equation on the real line, computed
//! on exactly aligned frequency lattices.
//!
//! The initial datum concentrates on two bands of width N^{-θ}, one near
//! the origin and one at frequency N. Every later iterate then lives on a
//! finite union of bands [j₂N + j₁/N^θ, j₂N + (k+j₁)/N^θ] with j₁+j₂ = k,
//! because supports add under convolution. All bands are discretized on
//! one shared lattice of step h = 1/(M·N^θ) anchored at the multiples of
//! N: a band stores an integer offset and length in units of h, so the
//! convolution argument ξ−η of two lattice nodes is again a lattice node
//! and support arithmetic is exact integer arithmetic.
//!
//! Time integration works in the interaction picture: the Duhamel
//! integrand is multiplied by e^{+it′ξ^α} before the cumulative Simpson
//! pass and by e^{-itξ^α} after it. On the bands with j₂ ≤ 1 the combined
//! phase ξ^α − (ξ−η)^α − η^α stays O(N^{α−1−θ}) = o(1) in the admissible
//! regime θ > α−1, so the integrand is slowly varying and the default 64
//! time nodes resolve it. Bands with j₂ ≥ 2 oscillate faster than that;
//! they never feed back into the j₂ ≤ 1 bands (j₂ only grows under the
//! recursion), and nothing is measured on them, so their extra quadrature
//! error is quarantined by construction.
//!
//! Profile convolutions use the trapezoid rule cell by cell with
//! one-sided values at band edges. Stored samples are the interior limits
//! of each band, the integrand restricted to one lattice cell is smooth,
//! and a cell contributes only when it lies inside both supports, which
//! makes the computed iterate vanish identically outside its predicted
//! support instead of leaking O(h) mass across edges.

use alloc::vec;
use alloc::vec::Vec;

use num_complex::Complex64;
// Needed in pure no_std builds; shadowed whenever std is in the crate
// graph (e.g. under the test harness), hence the blanket allow.
#[allow(unused_imports)]
use num_traits::Float;
use serde::Serialize;

use crate::params::{validate_regime, ExperimentParams, RegimeTag};
use crate::piecewise::{conv_power, ConvKernel, PiecewisePoly};
use crate::quad::cumulative_simpson;
use crate::recurrence::tail_sum_bound;
use crate::{domain_err, jbracket, Error, Result};

/// One frequency band: nodes at ξ = j₂·N + (start + i)·h, i < len.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct Band {
    pub j2: u32,
    /// Offset of the first node from j₂·N, in lattice units.
    pub start: i64,
    pub len: usize,
}

impl Band {
    pub fn freq(&self, i: usize, h: f64, n: u32) -> f64 {
        self.j2 as f64 * n as f64 + (self.start + i as i64) as f64 * h
    }

    pub fn lo(&self, h: f64, n: u32) -> f64 {
        self.freq(0, h, n)
    }

    pub fn hi(&self, h: f64, n: u32) -> f64 {
        self.freq(self.len - 1, h, n)
    }
}

pub const M_MIN: usize = 8;
const M_MAX: usize = 512;
const MAX_ITERATE: u32 = 5;
const MAX_TIME_NODES: usize = 4096;
const MAX_NODES_PER_PROFILE: usize = 1 << 17;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FreqGrid {
    /// Lattice step 1/(M·N^θ).
    pub h: f64,
    pub n: u32,
    /// Disjoint, sorted by j₂ (one band per j₂ here).
    pub bands: Vec<Band>,
}

impl FreqGrid {
    pub fn node_count(&self) -> usize {
        self.bands.iter().map(|b| b.len).sum()
    }
}

/// Samples û(t_j, ξ_i) of one iterate: `values[time][band][node]`.
#[derive(Debug, Clone, PartialEq)]
pub struct GridProfile {
    pub grid: FreqGrid,
    pub times: Vec<f64>,
    pub values: Vec<Vec<Vec<Complex64>>>,
}

impl GridProfile {
    fn band_index(&self, j2: u32) -> Option<usize> {
        self.grid.bands.iter().position(|b| b.j2 == j2)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FamilyKind {
    /// Both datum bands; iterate l spans j₂ = 0..=l.
    Full,
    /// Low-band datum only; everything stays at j₂ = 0.
    LowBand,
}

/// Iterates 1..=K, `profiles[l-1]` holding iterate l.
#[derive(Debug, Clone, PartialEq)]
pub struct IterateFamily {
    pub kind: FamilyKind,
    /// Lattice nodes per unit band width.
    pub m: usize,
    pub profiles: Vec<GridProfile>,
}

impl IterateFamily {
    pub fn profile(&self, l: u32) -> &GridProfile {
        &self.profiles[l as usize - 1]
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IterOptions {
    /// Nodes per unit band width (a width-N^{-θ} band gets m cells).
    pub m: usize,
    pub time_nodes: usize,
    /// Drop bands with j₂ above this; `None` keeps the full fan-out.
    /// Restricting to j₂ ≤ 1 is lossless for anything measured below 2N,
    /// since a band only ever receives contributions from lower j₂.
    pub max_j2: Option<u32>,
}

impl Default for IterOptions {
    fn default() -> Self {
        Self {
            m: 32,
            time_nodes: 64,
            max_j2: None,
        }
    }
}

fn require_inflation_regime(p: &ExperimentParams) -> Result<()> {
    let rep = validate_regime(p, RegimeTag::InflationLine);
    if !rep.pass {
        return Err(Error::Regime(rep.violations));
    }
    Ok(())
}

fn check_options(opts: &IterOptions, k_max: u32) -> Result<()> {
    if k_max == 0 {
        return domain_err("need at least one iterate");
    }
    if k_max > MAX_ITERATE {
        return Err(Error::Resource {
            what: alloc::format!("iterate depth {k_max} (cap {MAX_ITERATE})"),
            suggestion: alloc::string::String::from(
                "deeper iterates are bounded through the majorant recurrence, not computed",
            ),
        });
    }
    if opts.m < M_MIN || opts.m > M_MAX {
        return domain_err(alloc::format!(
            "nodes per band m = {} outside [{M_MIN}, {M_MAX}]",
            opts.m
        ));
    }
    if opts.time_nodes < 9 || opts.time_nodes > MAX_TIME_NODES {
        return domain_err(alloc::format!(
            "time nodes {} outside [9, {MAX_TIME_NODES}]",
            opts.time_nodes
        ));
    }
    Ok(())
}

/// Bands of iterate l in lattice units, derived from the recursion: the
/// split (k₁, j₂ₐ) ⊕ (k₂, j₂ᵦ) has offsets (k₁-j₂ₐ)M + (k₂-j₂ᵦ)M =
/// (l-j₂)M and lengths adding to lM, independent of the split, so each j₂
/// carries exactly one interval [(l-j₂)M, (2l-j₂)M].
fn band_layout(l: u32, max_j2: u32, m: usize) -> Vec<Band> {
    (0..=l.min(max_j2))
        .map(|j2| Band {
            j2,
            start: (l - j2) as i64 * m as i64,
            len: l as usize * m + 1,
        })
        .collect()
}

fn lattice_step(p: &ExperimentParams, m: usize) -> f64 {
    (p.n as f64).powf(-p.theta) / m as f64
}

/// Initial datum magnitudes: (low-band amplitude εN^{θ/2}, high-band
/// amplitude εN^{-s+θ/2}).
fn phi_amplitudes(p: &ExperimentParams) -> (f64, f64) {
    let n = p.n as f64;
    (
        p.eps * n.powf(p.theta / 2.0),
        p.eps * n.powf(-p.s + p.theta / 2.0),
    )
}

/// Exact magnitude profile of the datum's Fourier transform.
pub fn phi_poly(p: &ExperimentParams) -> Result<PiecewisePoly> {
    require_inflation_regime(p)?;
    let n = p.n as f64;
    let inv = n.powf(-p.theta);
    let (a_low, a_high) = phi_amplitudes(p);
    let low = PiecewisePoly::indicator(inv, 2.0 * inv)?.scale(a_low);
    let high = PiecewisePoly::indicator(n, n + inv)?.scale(a_high);
    Ok(low.add(&high))
}

/// Datum sampled on the iterate-1 lattice as a t = 0 slice.
pub fn build_phi(p: &ExperimentParams, m: usize) -> Result<GridProfile> {
    require_inflation_regime(p)?;
    if !(M_MIN..=M_MAX).contains(&m) {
        return domain_err(alloc::format!("nodes per band m = {m} outside [{M_MIN}, {M_MAX}]"));
    }
    let h = lattice_step(p, m);
    let (a_low, a_high) = phi_amplitudes(p);
    let bands = band_layout(1, 1, m);
    let values = bands
        .iter()
        .map(|b| {
            let amp = if b.j2 == 0 { a_low } else { a_high };
            vec![Complex64::new(amp, 0.0); b.len]
        })
        .collect();
    Ok(GridProfile {
        grid: FreqGrid {
            h,
            n: p.n,
            bands,
        },
        times: vec![0.0],
        values: vec![values],
    })
}

/// Support of iterate k as merged closed intervals
/// ∪_{j₁+j₂=k} [j₂N + j₁/N^θ, j₂N + (k+j₁)/N^θ].
pub fn support_uk(k: u32, p: &ExperimentParams) -> Result<Vec<(f64, f64)>> {
    if k == 0 {
        return domain_err("iterate index starts at 1");
    }
    let n = p.n as f64;
    let inv = n.powf(-p.theta);
    let mut intervals: Vec<(f64, f64)> = (0..=k)
        .map(|j2| {
            let j1 = (k - j2) as f64;
            let base = j2 as f64 * n;
            (base + j1 * inv, base + (k as f64 + j1) * inv)
        })
        .collect();
    intervals.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
    let mut merged: Vec<(f64, f64)> = Vec::with_capacity(intervals.len());
    for iv in intervals {
        match merged.last_mut() {
            Some(last) if iv.0 <= last.1 => last.1 = last.1.max(iv.1),
            _ => merged.push(iv),
        }
    }
    Ok(merged)
}

/// Shared engine for both iterate families.
fn picard(p: &ExperimentParams, k_max: u32, opts: &IterOptions, kind: FamilyKind) -> Result<IterateFamily> {
    require_inflation_regime(p)?;
    check_options(opts, k_max)?;
    let m = opts.m;
    let h = lattice_step(p, m);
    let n = p.n;
    let nf = n as f64;
    let nt = opts.time_nodes;
    let dt = p.t_final / (nt - 1) as f64;
    let times: Vec<f64> = (0..nt).map(|j| j as f64 * dt).collect();
    let family_max_j2 = match kind {
        FamilyKind::Full => opts.max_j2.unwrap_or(k_max),
        FamilyKind::LowBand => 0,
    };
    // Bands of one iterate must stay pairwise disjoint on the real axis.
    if (2 * k_max as usize * m) as f64 * h >= nf {
        return Err(Error::Resource {
            what: alloc::format!("iterate bands of width {}·N^-θ reach the next multiple of N", 2 * k_max),
            suggestion: alloc::string::String::from("increase N or theta, or lower the iterate depth"),
        });
    }

    let (a_low, a_high) = phi_amplitudes(p);
    let mut profiles: Vec<GridProfile> = Vec::with_capacity(k_max as usize);

    // Iterate 1 is the free evolution of the datum: exact at every node.
    {
        let bands = band_layout(1, family_max_j2, m);
        let mut values = Vec::with_capacity(nt);
        for &t in &times {
            let slice: Vec<Vec<Complex64>> = bands
                .iter()
                .map(|b| {
                    let amp = if b.j2 == 0 { a_low } else { a_high };
                    (0..b.len)
                        .map(|i| {
                            let xi = b.freq(i, h, n);
                            Complex64::from_polar(amp, -t * xi.powf(p.alpha))
                        })
                        .collect()
                })
                .collect();
            values.push(slice);
        }
        profiles.push(GridProfile {
            grid: FreqGrid {
                h,
                n,
                bands,
            },
            times: times.clone(),
            values,
        });
    }

    for l in 2..=k_max {
        let bands = band_layout(l, family_max_j2, m);
        let grid = FreqGrid {
            h,
            n,
            bands,
        };
        if grid.node_count() * nt > MAX_NODES_PER_PROFILE * 64 {
            return Err(Error::Resource {
                what: alloc::format!("iterate {l} needs {} samples", grid.node_count() * nt),
                suggestion: alloc::string::String::from("reduce m, time_nodes, or the iterate depth"),
            });
        }

        // Duhamel integrand (the banded bilinear convolution) at every
        // time node, before any phase factors.
        let mut integrand: Vec<Vec<Vec<Complex64>>> = times
            .iter()
            .map(|_| grid.bands.iter().map(|b| vec![Complex64::new(0.0, 0.0); b.len]).collect())
            .collect();

        for (ob_idx, ob) in grid.bands.iter().enumerate() {
            for k1 in 1..l {
                let k2 = l - k1;
                let pa = &profiles[k1 as usize - 1];
                let pb = &profiles[k2 as usize - 1];
                for j2a in 0..=ob.j2.min(k1) {
                    let j2b = ob.j2 - j2a;
                    if j2b > k2 {
                        continue;
                    }
                    let (ia, ib) = match (pa.band_index(j2a), pb.band_index(j2b)) {
                        (Some(ia), Some(ib)) => (ia, ib),
                        _ => continue,
                    };
                    let band_b = pb.grid.bands[ib];
                    let la = pa.grid.bands[ia].len;
                    let lb = band_b.len;
                    // |η|^β at the k₂-factor's nodes.
                    let weights: Vec<f64> = (0..lb)
                        .map(|i| band_b.freq(i, h, n).abs().powf(p.beta))
                        .collect();
                    for (t_idx, _) in times.iter().enumerate() {
                        let a = &pa.values[t_idx][ia];
                        let b = &pb.values[t_idx][ib];
                        let out = &mut integrand[t_idx][ob_idx];
                        // Trapezoid cell by cell: cell m of the η band
                        // pairs with cell (oi-m-1, oi-m) of the ξ-η band
                        // and contributes only when both are interior.
                        for oi in 0..ob.len {
                            let m_lo = oi.saturating_sub(la - 1).max(0);
                            if oi == 0 {
                                continue;
                            }
                            let m_hi = (lb - 2).min(oi - 1);
                            if m_lo > m_hi {
                                continue;
                            }
                            let mut acc = Complex64::new(0.0, 0.0);
                            for mm in m_lo..=m_hi {
                                acc += a[oi - mm] * (weights[mm] * b[mm])
                                    + a[oi - mm - 1] * (weights[mm + 1] * b[mm + 1]);
                            }
                            out[oi] += acc * (0.5 * h);
                        }
                    }
                }
            }
        }

        // Interaction picture: strip the fast phase, integrate in time,
        // put the phase back.
        let mut values: Vec<Vec<Vec<Complex64>>> = times
            .iter()
            .map(|_| grid.bands.iter().map(|b| vec![Complex64::new(0.0, 0.0); b.len]).collect())
            .collect();
        let mut g = vec![Complex64::new(0.0, 0.0); nt];
        for (b_idx, b) in grid.bands.iter().enumerate() {
            for i in 0..b.len {
                let xi_alpha = b.freq(i, h, n).powf(p.alpha);
                for (t_idx, &t) in times.iter().enumerate() {
                    g[t_idx] = Complex64::from_polar(1.0, t * xi_alpha)
                        * integrand[t_idx][b_idx][i];
                }
                let prefix = cumulative_simpson(&g, dt);
                for (t_idx, &t) in times.iter().enumerate() {
                    values[t_idx][b_idx][i] =
                        Complex64::from_polar(1.0, -t * xi_alpha) * prefix[t_idx];
                }
            }
        }
        profiles.push(GridProfile {
            grid,
            times: times.clone(),
            values,
        });
    }

    Ok(IterateFamily {
        kind,
        m,
        profiles,
    })
}

/// Low-band family: iterates of the near-origin datum band alone.
pub fn iterate_low(p: &ExperimentParams, k_max: u32, opts: &IterOptions) -> Result<IterateFamily> {
    picard(p, k_max, opts, FamilyKind::LowBand)
}

/// Full family from both datum bands.
pub fn iterate_full(p: &ExperimentParams, k_max: u32, opts: &IterOptions) -> Result<IterateFamily> {
    picard(p, k_max, opts, FamilyKind::Full)
}

/// Evaluate iterate k of a computed family at an arbitrary frequency by
/// running its Duhamel quadrature against the stored lower iterates, with
/// linear interpolation inside bands and exact zero outside. Far from the
/// predicted support every term vanishes identically, which is what the
/// support check probes.
pub fn evaluate_offgrid(
    family: &IterateFamily,
    p: &ExperimentParams,
    k: u32,
    xi: f64,
    t_idx: usize,
) -> Result<Complex64> {
    if k == 0 || k as usize > family.profiles.len() {
        return domain_err("iterate index out of range for this family");
    }
    let prof = family.profile(k);
    if t_idx >= prof.times.len() {
        return domain_err("time index out of range");
    }
    let h = prof.grid.h;
    let n = prof.grid.n;
    let interp = |gp: &GridProfile, b_idx: usize, t: usize, x: f64| -> Complex64 {
        let b = gp.grid.bands[b_idx];
        let u = (x - b.j2 as f64 * n as f64) / h - b.start as f64;
        if u < -1e-9 || u > (b.len - 1) as f64 + 1e-9 {
            return Complex64::new(0.0, 0.0);
        }
        let u = u.clamp(0.0, (b.len - 1) as f64);
        let i0 = (u.floor() as usize).min(b.len - 2);
        let frac = u - i0 as f64;
        let v = &gp.values[t][b_idx];
        v[i0] * (1.0 - frac) + v[i0 + 1] * frac
    };

    if k == 1 {
        let mut acc = Complex64::new(0.0, 0.0);
        for b_idx in 0..prof.grid.bands.len() {
            acc += interp(prof, b_idx, t_idx, xi);
        }
        return Ok(acc);
    }

    let nt = prof.times.len();
    let dt = prof.times[1] - prof.times[0];
    let xi_alpha = xi.abs().powf(p.alpha);
    let mut g = vec![Complex64::new(0.0, 0.0); nt];
    for (t, slot) in g.iter_mut().enumerate() {
        let mut c = Complex64::new(0.0, 0.0);
        for k1 in 1..k {
            let k2 = k - k1;
            let pa = family.profile(k1);
            let pb = family.profile(k2);
            for (ib, bb) in pb.grid.bands.iter().enumerate() {
                for mm in 0..bb.len {
                    let eta = bb.freq(mm, h, n);
                    let tw = if mm == 0 || mm == bb.len - 1 { 0.5 } else { 1.0 };
                    let x = xi - eta;
                    let mut aval = Complex64::new(0.0, 0.0);
                    for ia in 0..pa.grid.bands.len() {
                        aval += interp(pa, ia, t, x);
                    }
                    c += aval * (tw * h * eta.abs().powf(p.beta)) * pb.values[t][ib][mm];
                }
            }
        }
        *slot = Complex64::from_polar(1.0, prof.times[t] * xi_alpha) * c;
    }
    let prefix = cumulative_simpson(&g, dt);
    Ok(Complex64::from_polar(1.0, -prof.times[t_idx] * xi_alpha) * prefix[t_idx])
}

/// Leading-term profile of iterate k at time t on its top band: the
/// explicit B-spline ε^k t^{k-1}/(k-1)! · N^{-s+(θ/2+β)k-β} ·
/// (1_{low}^{*(k-1)} ∗ 1_{high})(ξ) carried by the free phase.
pub fn leading_term(
    p: &ExperimentParams,
    k: u32,
    t: f64,
    m: usize,
) -> Result<(Band, Vec<Complex64>)> {
    require_inflation_regime(p)?;
    if k == 0 {
        return domain_err("iterate index starts at 1");
    }
    if !(t >= 0.0) {
        return domain_err("time must be nonnegative");
    }
    let n = p.n as f64;
    let inv = n.powf(-p.theta);
    let h = lattice_step(p, m);
    let spline = conv_power(inv, 2.0 * inv, k - 1)?;
    let high = ConvKernel::Poly(PiecewisePoly::indicator(n, n + inv)?);
    let shape = spline.convolve(&high);
    let shape = shape.as_poly().expect("k-fold band convolution is a function");
    let mut log_fac = 0.0;
    for j in 2..k {
        log_fac += (j as f64).ln();
    }
    let amp = p.eps.powi(k as i32)
        * if k == 1 { 1.0 } else { t.powi(k as i32 - 1) / log_fac.exp() }
        * n.powf(-p.s + (p.theta / 2.0 + p.beta) * k as f64 - p.beta);
    let band = Band {
        j2: 1,
        start: (k as i64 - 1) * m as i64,
        len: k as usize * m + 1,
    };
    let values = (0..band.len)
        .map(|i| {
            let xi = band.freq(i, h, p.n);
            Complex64::from_polar(1.0, -t * xi.powf(p.alpha)) * (amp * shape.eval(xi))
        })
        .collect();
    Ok((band, values))
}

/// Relative L² deviation between iterate k and its leading term on the
/// top band, at the family's final time. The pointwise ratio is singular
/// at the band edges where the B-spline vanishes, so the band-integrated
/// form is the stable rendering of the estimate.
pub fn leading_term_deviation(p: &ExperimentParams, k: u32, opts: &IterOptions) -> Result<f64> {
    let family = iterate_full(
        p,
        k,
        &IterOptions {
            max_j2: Some(1),
            ..*opts
        },
    )?;
    let prof = family.profile(k);
    let t_idx = prof.times.len() - 1;
    let (band, lead) = leading_term(p, k, prof.times[t_idx], opts.m)?;
    let b_idx = prof
        .band_index(1)
        .ok_or(Error::Domain(alloc::string::String::from("missing top band")))?;
    debug_assert_eq!(prof.grid.bands[b_idx], band);
    let computed = &prof.values[t_idx][b_idx];
    let mut num = 0.0;
    let mut den = 0.0;
    for i in 0..band.len {
        let tw = if i == 0 || i == band.len - 1 { 0.5 } else { 1.0 };
        num += tw * (computed[i] - lead[i]).norm_sqr();
        den += tw * lead[i].norm_sqr();
    }
    if den == 0.0 {
        return domain_err("leading term vanishes on the band");
    }
    Ok((num / den).sqrt())
}

/// Witness of the worst pointwise bound violation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BoundWitness {
    pub k: u32,
    pub t: f64,
    pub xi: f64,
    pub value: f64,
    pub bound: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BandBoundReport {
    pub checked: usize,
    pub violations: usize,
    pub max_ratio: f64,
    pub worst: Option<BoundWitness>,
}

/// Check the pointwise low-band majorant |û₁^{(k)}(t,ξ)| ≤
/// ε(π²2^βεt)^{k-1}((k-1)!)^{max(0,β-1)} N^{θβ+θ(1/2-β)k} 1^{*(k)}(ξ)
/// at every node and stored time of a low-band family.
pub fn low_band_majorant_check(
    p: &ExperimentParams,
    family: &IterateFamily,
) -> Result<BandBoundReport> {
    if family.kind != FamilyKind::LowBand {
        return domain_err("majorant check applies to the low-band family");
    }
    let n = p.n as f64;
    let inv = n.powf(-p.theta);
    let base = core::f64::consts::PI * core::f64::consts::PI * 2.0f64.powf(p.beta) * p.eps;
    let fac_pow = (p.beta - 1.0).max(0.0);
    let mut checked = 0usize;
    let mut violations = 0usize;
    let mut max_ratio = 0.0f64;
    let mut worst = None;
    for (li, prof) in family.profiles.iter().enumerate() {
        let k = li as u32 + 1;
        let spline = conv_power(inv, 2.0 * inv, k)?;
        let spline = spline.as_poly().expect("k >= 1");
        let mut log_fac = 0.0;
        for j in 2..k {
            log_fac += (j as f64).ln();
        }
        let n_pow = n.powf(p.theta * p.beta + p.theta * (0.5 - p.beta) * k as f64);
        let b = prof.grid.bands[0];
        for (t_idx, &t) in prof.times.iter().enumerate() {
            let scale = p.eps
                * if k == 1 {
                    1.0
                } else {
                    (base * t).powi(k as i32 - 1) * (fac_pow * log_fac).exp()
                }
                * n_pow;
            for i in 0..b.len {
                let xi = b.freq(i, prof.grid.h, prof.grid.n);
                // The spline is nonnegative; cancellation at its vanishing
                // edge can round a hair below zero.
                let bound = scale * spline.eval(xi).max(0.0);
                let value = prof.values[t_idx][0][i].norm();
                if bound == 0.0 && value <= 1e-30 {
                    continue;
                }
                checked += 1;
                let ratio = value / bound;
                if ratio > max_ratio {
                    max_ratio = ratio;
                    worst = Some(BoundWitness {
                        k,
                        t,
                        xi,
                        value,
                        bound,
                    });
                }
                if value > bound * (1.0 + 1e-9) + 1e-30 {
                    violations += 1;
                }
            }
        }
    }
    Ok(BandBoundReport {
        checked,
        violations,
        max_ratio,
        worst,
    })
}

/// Which iterate indices can touch the measurement band
/// [N+(k-1)/N^θ, N+k/N^θ): the directly computed range ⌊k/2⌋..=k and the
/// far range around N^{θ+1} that is only ever bounded, never computed.
pub fn band_decomposition_indices(
    k: u32,
    p: &ExperimentParams,
    xi: f64,
) -> Result<(core::ops::RangeInclusive<u32>, (u64, u64))> {
    let n = p.n as f64;
    let inv = n.powf(-p.theta);
    let lo = n + (k as f64 - 1.0) * inv;
    let hi = n + k as f64 * inv;
    if !(xi >= lo && xi < hi) {
        return domain_err(alloc::format!("xi = {xi} outside the measurement band [{lo}, {hi})"));
    }
    let n_pow = n.powf(p.theta + 1.0);
    let far_lo = ((k as f64 - 1.0 + n_pow) / 2.0).floor() as u64;
    let far_hi = (k as f64 + n_pow).ceil() as u64;
    Ok((k / 2..=k, (far_lo, far_hi)))
}

/// One row of the line inflation experiment.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LineInflationRow {
    pub n: u32,
    pub k: u32,
    pub theta: f64,
    pub t_final: f64,
    /// Sobolev norm of the datum; should be ≲ ε.
    pub phi_hs: f64,
    /// H^σ norm of Σ_{l=⌊k/2⌋}^k û^{(l)}(T) restricted to the band.
    pub band_norm: f64,
    /// ε^k (log N)^{-(k-1)} N^{σ-s+(β-θ/2)(k-1)}.
    pub prediction: f64,
    /// Bound on everything the computation drops.
    pub tail: f64,
    pub ratio: f64,
    /// band_norm - tail > 1/ε at this N.
    pub inflated: bool,
}

/// Measure the band-restricted growth at time T and compare it with the
/// predicted power of N. Only j₂ ≤ 1 bands are computed: the band sits
/// below N + 1, and higher j₂ never feeds back down.
pub fn inflation_experiment_line(p: &ExperimentParams, opts: &IterOptions) -> Result<LineInflationRow> {
    require_inflation_regime(p)?;
    let k = p.k;
    let family = iterate_full(
        p,
        k,
        &IterOptions {
            max_j2: Some(1),
            ..*opts
        },
    )?;
    let m = opts.m;
    let h = family.profiles[0].grid.h;
    let nf = p.n as f64;

    // Accumulate Σ û^{(l)}(T) on lattice offsets (k-1)M ..= kM past N.
    let lo_off = (k as i64 - 1) * m as i64;
    let width = m + 1;
    let mut total = vec![Complex64::new(0.0, 0.0); width];
    for l in (k / 2).max(1)..=k {
        let prof = family.profile(l);
        let t_idx = prof.times.len() - 1;
        let b_idx = match prof.band_index(1) {
            Some(i) => i,
            None => continue,
        };
        let band = prof.grid.bands[b_idx];
        for (w_idx, slot) in total.iter_mut().enumerate() {
            let off = lo_off + w_idx as i64;
            let local = off - band.start;
            if local >= 0 && (local as usize) < band.len {
                *slot += prof.values[t_idx][b_idx][local as usize];
            }
        }
    }
    let mut norm_sq = 0.0;
    for (w_idx, v) in total.iter().enumerate() {
        let tw = if w_idx == 0 || w_idx == width - 1 { 0.5 } else { 1.0 };
        let xi = nf + (lo_off + w_idx as i64) as f64 * h;
        norm_sq += tw * jbracket(xi).powf(2.0 * p.sigma) * v.norm_sqr();
    }
    let band_norm = (norm_sq * h).sqrt();

    let prediction = p.eps.powi(k as i32)
        * nf.ln().powi(-(k as i32) + 1)
        * nf.powf(p.sigma - p.s + (p.beta - p.theta / 2.0) * (k as f64 - 1.0));
    let tail = tail_sum_bound(p, p.sigma)?.value;
    let phi_hs = phi_poly(p)?.weighted_l2_norm(p.s);
    Ok(LineInflationRow {
        n: p.n,
        k,
        theta: p.theta,
        t_final: p.t_final,
        phi_hs,
        band_norm,
        prediction,
        tail,
        ratio: band_norm / prediction,
        inflated: band_norm - tail > 1.0 / p.eps,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::params::{choose_theta, choose_time_line};

    fn params(n: u32, k: u32) -> ExperimentParams {
        let theta = choose_theta(2.0, 1.0).unwrap();
        ExperimentParams {
            alpha: 2.0,
            beta: 1.0,
            s: 0.0,
            sigma: 0.0,
            eps: 0.1,
            n,
            theta,
            k,
            t_final: choose_time_line(n).unwrap(),
        }
    }

    #[test]
    fn datum_support_matches_first_iterate() {
        let p = params(8, 1);
        let sup = support_uk(1, &p).unwrap();
        let inv = 8.0f64.powf(-p.theta);
        assert_eq!(sup.len(), 2);
        assert!((sup[0].0 - inv).abs() < 1e-15);
        assert!((sup[0].1 - 2.0 * inv).abs() < 1e-15);
        assert!((sup[1].0 - 8.0).abs() < 1e-15);
        assert!((sup[1].1 - (8.0 + inv)).abs() < 1e-15);
    }

    #[test]
    fn second_iterate_support_at_unit_theta() {
        let mut p = params(8, 2);
        p.theta = 1.0;
        let sup = support_uk(2, &p).unwrap();
        let expect = [(0.25, 0.5), (8.125, 8.375), (16.0, 16.25)];
        assert_eq!(sup.len(), 3);
        for (got, want) in sup.iter().zip(expect.iter()) {
            assert!((got.0 - want.0).abs() < 1e-14);
            assert!((got.1 - want.1).abs() < 1e-14);
        }
    }

    #[test]
    fn lattice_bands_agree_with_support_formula() {
        let p = params(16, 4);
        let m = 16usize;
        let h = lattice_step(&p, m);
        for k in 1..=4u32 {
            let sup = support_uk(k, &p).unwrap();
            let bands = band_layout(k, k, m);
            assert_eq!(sup.len(), bands.len());
            for (b, (lo, hi)) in bands.iter().zip(sup.iter()) {
                assert!((b.lo(h, p.n) - lo).abs() < 1e-12 * (1.0 + lo.abs()));
                assert!((b.hi(h, p.n) - hi).abs() < 1e-12 * (1.0 + hi.abs()));
            }
        }
    }

    #[test]
    fn datum_norm_stays_of_order_eps() {
        for n in [8u32, 32] {
            for s in [0.0, 1.0] {
                let mut p = params(n, 1);
                p.s = s;
                let norm = phi_poly(&p).unwrap().weighted_l2_norm(s);
                assert!(norm <= 4.0 * p.eps, "n = {n}, s = {s}: {norm}");
                assert!(norm >= p.eps);
            }
        }
    }

    #[test]
    fn datum_sampling_hits_band_amplitudes() {
        let p = params(8, 1);
        let phi = build_phi(&p, 32).unwrap();
        let (a_low, a_high) = phi_amplitudes(&p);
        assert!((phi.values[0][0][16].norm() - a_low).abs() < 1e-15);
        assert!((phi.values[0][1][16].norm() - a_high).abs() < 1e-15);
    }

    #[test]
    fn first_iterate_modulus_is_time_invariant() {
        let p = params(8, 1);
        let fam = iterate_full(
            &p,
            1,
            &IterOptions {
                m: 16,
                time_nodes: 9,
                max_j2: None,
            },
        )
        .unwrap();
        let prof = fam.profile(1);
        let (a_low, a_high) = phi_amplitudes(&p);
        for t_idx in 0..prof.times.len() {
            for (b_idx, b) in prof.grid.bands.iter().enumerate() {
                let amp = if b.j2 == 0 { a_low } else { a_high };
                for i in 0..b.len {
                    assert!((prof.values[t_idx][b_idx][i].norm() - amp).abs() < 1e-12);
                }
            }
        }
    }

    #[test]
    fn higher_iterates_vanish_at_band_edges() {
        let p = params(8, 3);
        let fam = iterate_low(
            &p,
            3,
            &IterOptions {
                m: 16,
                time_nodes: 17,
                max_j2: None,
            },
        )
        .unwrap();
        for l in 2..=3u32 {
            let prof = fam.profile(l);
            let last = prof.times.len() - 1;
            let vals = &prof.values[last][0];
            assert_eq!(vals[0], Complex64::new(0.0, 0.0));
            assert_eq!(vals[vals.len() - 1], Complex64::new(0.0, 0.0));
            assert!(vals.iter().any(|v| v.norm() > 0.0));
        }
    }

    #[test]
    fn low_band_majorant_zero_violations() {
        let p = params(8, 3);
        let fam = iterate_low(
            &p,
            3,
            &IterOptions {
                m: 16,
                time_nodes: 17,
                max_j2: None,
            },
        )
        .unwrap();
        let rep = low_band_majorant_check(&p, &fam).unwrap();
        assert_eq!(rep.violations, 0, "worst: {:?}", rep.worst);
        assert!(rep.max_ratio <= 1.0 + 1e-9);
        assert!(rep.checked > 0);
        // The first iterate saturates the bound exactly.
        assert!(rep.max_ratio > 0.999);
    }

    #[test]
    fn leading_term_at_depth_one_is_free_evolution_of_high_band() {
        let p = params(8, 1);
        let m = 16;
        let (band, lead) = leading_term(&p, 1, 0.3, m).unwrap();
        assert_eq!(band.j2, 1);
        assert_eq!(band.start, 0);
        let (_, a_high) = phi_amplitudes(&p);
        let h = lattice_step(&p, m);
        for i in 0..band.len {
            let xi = band.freq(i, h, p.n);
            let expect = Complex64::from_polar(a_high, -0.3 * xi.powf(p.alpha));
            assert!((lead[i] - expect).norm() < 1e-12);
        }
    }

    #[test]
    fn leading_term_tracks_second_iterate_at_small_time() {
        let mut p = params(8, 2);
        p.t_final = 1e-4;
        let dev = leading_term_deviation(
            &p,
            2,
            &IterOptions {
                m: 32,
                time_nodes: 33,
                max_j2: Some(1),
            },
        )
        .unwrap();
        assert!(dev < 0.05, "deviation {dev}");
    }

    #[test]
    fn decomposition_indices_for_third_iterate() {
        let p = params(16, 3);
        let xi = 16.0 + 2.5 * 16.0f64.powf(-p.theta);
        let (full, far) = band_decomposition_indices(3, &p, xi).unwrap();
        assert_eq!(full, 1..=3);
        assert_eq!(far, (513, 1027));
        assert!(band_decomposition_indices(3, &p, 15.0).is_err());
    }

    #[test]
    fn off_grid_probe_vanishes_between_bands() {
        let p = params(8, 2);
        let fam = iterate_full(
            &p,
            2,
            &IterOptions {
                m: 16,
                time_nodes: 17,
                max_j2: None,
            },
        )
        .unwrap();
        let last = fam.profile(2).times.len() - 1;
        for xi in [4.0, 6.5, 12.0, 40.0] {
            let v = evaluate_offgrid(&fam, &p, 2, xi, last).unwrap();
            assert_eq!(v, Complex64::new(0.0, 0.0), "xi = {xi}");
        }
        // Inside the top band the probe is consistent with stored values.
        let prof = fam.profile(2);
        let b = prof.grid.bands[1];
        let xi = b.freq(b.len / 2, prof.grid.h, p.n);
        let probe = evaluate_offgrid(&fam, &p, 2, xi, last).unwrap();
        let stored = prof.values[last][1][b.len / 2];
        assert!(
            (probe - stored).norm() <= 1e-6 * stored.norm(),
            "probe {probe} vs stored {stored}"
        );
    }

    #[test]
    fn halving_time_step_leaves_band_norm_fixed() {
        let mut p = params(8, 3);
        p.theta = 1.5;
        let coarse = inflation_experiment_line(
            &p,
            &IterOptions {
                m: 32,
                time_nodes: 33,
                max_j2: Some(1),
            },
        )
        .unwrap();
        let fine = inflation_experiment_line(
            &p,
            &IterOptions {
                m: 32,
                time_nodes: 65,
                max_j2: Some(1),
            },
        )
        .unwrap();
        let rel = (coarse.band_norm - fine.band_norm).abs() / fine.band_norm;
        assert!(rel < 1e-6, "relative drift {rel}");
    }

    #[test]
    fn inflation_row_is_well_formed() {
        let p = params(8, 3);
        let row = inflation_experiment_line(
            &p,
            &IterOptions {
                m: 32,
                time_nodes: 33,
                max_j2: Some(1),
            },
        )
        .unwrap();
        assert!(row.band_norm > 0.0);
        assert!(row.prediction > 0.0);
        assert!(row.ratio > 1.0 && row.ratio < 50.0, "ratio {}", row.ratio);
        assert!(row.tail < p.eps);
        assert!(row.phi_hs < 4.0 * p.eps);
        assert!(!row.inflated);
    }

    #[test]
    fn depth_cap_reports_resource_error() {
        let p = params(8, 6);
        let err = iterate_full(&p, 6, &IterOptions::default()).unwrap_err();
        match err {
            Error::Resource { .. } => {}
            other => panic!("expected resource error, got {other:?}"),
        }
    }
}
