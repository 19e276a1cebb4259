//! Measures on the frequency half-line and the gauges that grade them.
//!
//! A `HalfLineMeasure` is a finite collection of atoms plus an absolutely
//! continuous part, all supported in [0, ∞). The quantity everything else
//! is built from is ρ⁰(F, t), the total variation of F on [0, t); dividing
//! by a nondecreasing gauge ν and taking the supremum over t ≤ l gives the
//! growth functional ρ^ν_l that controls the half-line wellposedness
//! theory. For this concrete measure class the supremum over test
//! functions collapses to the total variation, so no test functions are
//! ever materialized.
//!
//! The gauges are ν₀(t) = (∫₀ᵗ ⟨ξ⟩^{-2s} dξ)^{1/2}, its discrete analogue
//! ν̃₀, the decreasing factor κ(l) = 1/(1+l^β), and pointwise products.
//! An atom at the origin paired with a gauge vanishing at 0 makes the
//! supremum infinite; that obstruction is reported as +∞ rather than an
//! error, since detecting it is one of the jobs of this module.

use alloc::boxed::Box;
use alloc::vec::Vec;

use num_complex::Complex64;
// Needed in pure no_std builds; shadowed whenever std is in the crate
// graph (e.g. under the test harness), hence the blanket allow.
#[allow(unused_imports)]
use num_traits::Float;
use serde::{Deserialize, Serialize};

use crate::piecewise::PiecewisePoly;
use crate::quad::GaussRule;
use crate::{domain_err, jbracket, Result};

/// Point mass at `location` with complex `weight`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Atom {
    pub location: f64,
    pub weight: Complex64,
}

/// Absolutely continuous part of a measure.
///
/// `Poly` carries a nonnegative magnitude profile (the modulus of the
/// density; total variation only sees the modulus). `Grid` carries complex
/// samples whose modulus is interpolated linearly between nodes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum Density {
    None,
    Poly(PiecewisePoly),
    Grid { nodes: Vec<f64>, values: Vec<Complex64> },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HalfLineMeasure {
    atoms: Vec<Atom>,
    density: Density,
}

impl HalfLineMeasure {
    /// Validates that no mass sits on the negative half-line.
    pub fn new(mut atoms: Vec<Atom>, density: Density) -> Result<Self> {
        for a in &atoms {
            if !(a.location >= 0.0) || !a.location.is_finite() {
                return domain_err(alloc::format!(
                    "atom location {} outside [0, inf)",
                    a.location
                ));
            }
            if !a.weight.re.is_finite() || !a.weight.im.is_finite() {
                return domain_err("atom weight must be finite");
            }
        }
        atoms.sort_unstable_by(|x, y| x.location.partial_cmp(&y.location).unwrap());
        match &density {
            Density::None => {}
            Density::Poly(p) => {
                if let Some((lo, _)) = p.support() {
                    if lo < 0.0 {
                        return domain_err("density support reaches below 0");
                    }
                }
                // Magnitude profile: spot-check nonnegativity per piece.
                let bps = p.breakpoints();
                for w in bps.windows(2) {
                    for j in 1..8 {
                        let x = w[0] + (w[1] - w[0]) * j as f64 / 8.0;
                        if p.eval(x) < -1e-12 {
                            return domain_err("magnitude profile must be nonnegative");
                        }
                    }
                }
            }
            Density::Grid { nodes, values } => {
                if nodes.len() != values.len() || nodes.len() < 2 {
                    return domain_err("grid density needs matching nodes/values, length >= 2");
                }
                if nodes[0] < 0.0 {
                    return domain_err("grid density support reaches below 0");
                }
                if nodes.windows(2).any(|w| w[0] >= w[1]) {
                    return domain_err("grid nodes must be strictly increasing");
                }
            }
        }
        Ok(Self { atoms, density })
    }

    pub fn zero() -> Self {
        Self {
            atoms: Vec::new(),
            density: Density::None,
        }
    }

    pub fn atoms(&self) -> &[Atom] {
        &self.atoms
    }

    pub fn density(&self) -> &Density {
        &self.density
    }

    /// Largest frequency carrying mass, if any.
    pub fn support_end(&self) -> Option<f64> {
        let atom_end = self.atoms.iter().map(|a| a.location).fold(None, |m: Option<f64>, x| {
            Some(m.map_or(x, |m| m.max(x)))
        });
        let dens_end = match &self.density {
            Density::None => None,
            Density::Poly(p) => p.support().map(|(_, hi)| hi),
            Density::Grid { nodes, .. } => nodes.last().copied(),
        };
        match (atom_end, dens_end) {
            (None, e) | (e, None) => e,
            (Some(a), Some(d)) => Some(a.max(d)),
        }
    }

    pub fn scale(&self, c: f64) -> Self {
        let atoms = self
            .atoms
            .iter()
            .map(|a| Atom {
                location: a.location,
                weight: a.weight * c,
            })
            .collect();
        let density = match &self.density {
            Density::None => Density::None,
            Density::Poly(p) => Density::Poly(p.scale(c.abs())),
            Density::Grid { nodes, values } => Density::Grid {
                nodes: nodes.clone(),
                values: values.iter().map(|v| v * c).collect(),
            },
        };
        Self {
            atoms,
            density,
        }
    }

    fn density_mass_below(&self, t: f64) -> f64 {
        match &self.density {
            Density::None => 0.0,
            Density::Poly(p) => p.integral_to(t),
            Density::Grid { nodes, values } => {
                let mut acc = 0.0;
                for i in 1..nodes.len() {
                    if nodes[i] <= t {
                        acc += 0.5 * (values[i - 1].norm() + values[i].norm())
                            * (nodes[i] - nodes[i - 1]);
                    } else {
                        if nodes[i - 1] < t {
                            let frac = (t - nodes[i - 1]) / (nodes[i] - nodes[i - 1]);
                            let m0 = values[i - 1].norm();
                            let mt = m0 + (values[i].norm() - m0) * frac;
                            acc += 0.5 * (m0 + mt) * (t - nodes[i - 1]);
                        }
                        break;
                    }
                }
                acc
            }
        }
    }

    /// Points where the variation can change character: atom locations and
    /// density breakpoints/nodes.
    fn feature_points(&self) -> Vec<f64> {
        let mut pts: Vec<f64> = self.atoms.iter().map(|a| a.location).collect();
        match &self.density {
            Density::None => {}
            Density::Poly(p) => pts.extend_from_slice(p.breakpoints()),
            Density::Grid { nodes, .. } => pts.extend_from_slice(nodes),
        }
        pts
    }
}

/// Total variation of F on the half-open interval [0, t).
///
/// An atom at exactly t is excluded: the defining supremum runs over test
/// functions supported strictly below t.
pub fn rho0(f: &HalfLineMeasure, t: f64) -> f64 {
    if t <= 0.0 {
        return 0.0;
    }
    let atom_mass: f64 = f
        .atoms
        .iter()
        .take_while(|a| a.location < t)
        .map(|a| a.weight.norm())
        .sum();
    atom_mass + f.density_mass_below(t)
}

/// Total variation of F on the closed interval [0, t]; equals the limit of
/// rho0 from the right and is what the supremum in `rho_gauge` approaches
/// just past an atom.
pub fn rho0_closed(f: &HalfLineMeasure, t: f64) -> f64 {
    if t < 0.0 {
        return 0.0;
    }
    let atom_mass: f64 = f
        .atoms
        .iter()
        .take_while(|a| a.location <= t)
        .map(|a| a.weight.norm())
        .sum();
    atom_mass + f.density_mass_below(t)
}

/// Continuous nondecreasing weight on [0, ∞) (κ is the one deliberate
/// exception: it decreases, and only ever appears as a product factor).
#[derive(Debug, Clone)]
pub enum Gauge {
    /// ν₀(t) = (∫₀ᵗ ⟨ξ⟩^{-2s} dξ)^{1/2}; vanishes at 0.
    Nu0 { s: f64 },
    /// ν̃₀(t) = (⟨⌊t⌋+1⟩^{2|s|}(t-⌊t⌋) + Σ_{n=1}^{⌊t⌋} ⟨n⟩^{2|s|})^{1/2}.
    Nu0Tilde { s: f64 },
    /// κ(t) = 1/(1+t^β).
    Kappa { beta: f64 },
    /// Pointwise product of two gauges.
    Product(Box<Gauge>, Box<Gauge>),
    Custom(fn(f64) -> f64),
}

const NU0_QUAD_REL_TOL: f64 = 1e-11;

impl Gauge {
    /// Evaluate at an ascending list of nonnegative times. ν₀ integrates
    /// cumulatively segment by segment, so a sorted batch costs one pass.
    pub fn eval_many(&self, ts: &[f64]) -> Vec<f64> {
        debug_assert!(ts.windows(2).all(|w| w[0] <= w[1]));
        match self {
            Gauge::Nu0 { s } => {
                let s = *s;
                let rule = GaussRule::new(32);
                let integrand = move |x: f64| jbracket(x).powf(-2.0 * s);
                let mut out = Vec::with_capacity(ts.len());
                let mut prev = 0.0f64;
                let mut acc = 0.0f64;
                for &t in ts {
                    if t > prev {
                        acc += rule.integrate_adaptive(&integrand, prev, t, NU0_QUAD_REL_TOL, 24);
                        prev = t;
                    }
                    out.push(acc.max(0.0).sqrt());
                }
                out
            }
            Gauge::Nu0Tilde { s } => ts.iter().map(|&t| nu0_tilde_value(*s, t)).collect(),
            Gauge::Kappa { beta } => ts
                .iter()
                .map(|&t| 1.0 / (1.0 + t.max(0.0).powf(*beta)))
                .collect(),
            Gauge::Product(a, b) => {
                let va = a.eval_many(ts);
                let vb = b.eval_many(ts);
                va.into_iter().zip(vb).map(|(x, y)| x * y).collect()
            }
            Gauge::Custom(f) => ts.iter().map(|&t| f(t)).collect(),
        }
    }

    pub fn eval(&self, t: f64) -> f64 {
        self.eval_many(&[t])[0]
    }
}

fn nu0_tilde_value(s: f64, t: f64) -> f64 {
    if t <= 0.0 {
        return 0.0;
    }
    let p = 2.0 * s.abs();
    let floor_t = t.floor();
    let mut acc = jbracket(floor_t + 1.0).powf(p) * (t - floor_t);
    let mut n = 1.0;
    while n <= floor_t {
        acc += jbracket(n).powf(p);
        n += 1.0;
    }
    acc.sqrt()
}

/// Largest level at which the gauge is still ≤ 1, i.e. sup ν⁻¹([0,1]).
/// Returns +∞ when the gauge never exceeds 1 below the search cap.
pub fn gauge_unit_level(nu: &Gauge) -> f64 {
    const CAP: f64 = 1e12;
    let mut hi = 1.0f64;
    if nu.eval(hi) <= 1.0 {
        while hi < CAP && nu.eval(hi) <= 1.0 {
            hi *= 2.0;
        }
        if hi >= CAP && nu.eval(hi) <= 1.0 {
            return f64::INFINITY;
        }
    }
    let mut lo = 0.0f64;
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if nu.eval(mid) <= 1.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

const FILL_PER_UNIT: usize = 256;

fn sup_grid(f: &HalfLineMeasure, l: f64) -> Vec<f64> {
    let mut ts: Vec<f64> = f
        .feature_points()
        .into_iter()
        .filter(|&x| x > 0.0 && x < l)
        .collect();
    let cells = ((l * FILL_PER_UNIT as f64).ceil() as usize).clamp(FILL_PER_UNIT, 1 << 20);
    for j in 1..=cells {
        ts.push(l * j as f64 / cells as f64);
    }
    ts.sort_unstable_by(|a, b| a.partial_cmp(b).unwrap());
    ts.dedup();
    ts
}

fn rho_gauge_detail(f: &HalfLineMeasure, nu: &Gauge, l: f64) -> (f64, f64) {
    // An atom at the origin against a gauge with ν(0) = 0 defeats every
    // level: ρ⁰ is bounded below while ν(t) → 0.
    let atom_at_zero = f
        .atoms
        .iter()
        .any(|a| a.location == 0.0 && a.weight.norm() > 0.0);
    if atom_at_zero && nu.eval(0.0) == 0.0 {
        return (f64::INFINITY, 0.0);
    }
    let ts = sup_grid(f, l);
    if ts.is_empty() {
        return (0.0, 0.0);
    }
    let nus = nu.eval_many(&ts);
    let mut best = 0.0f64;
    let mut best_t = ts[0];
    for (i, &t) in ts.iter().enumerate() {
        let nv = nus[i];
        // Open value is attained at t itself; the closed value is the
        // limit from the right, available whenever t < l.
        let mut numerators = [rho0(f, t), f64::NAN];
        let mut m = 1;
        if t < l {
            numerators[1] = rho0_closed(f, t);
            m = 2;
        }
        for &num in &numerators[..m] {
            if num > 0.0 && nv == 0.0 {
                return (f64::INFINITY, t);
            }
            let r = if num == 0.0 { 0.0 } else { num / nv };
            if r > best {
                best = r;
                best_t = t;
            }
        }
    }
    (best, best_t)
}

/// sup_{0 < t ≤ l} ρ⁰(F, t)/ν(t), evaluated on a grid holding every atom
/// location and density breakpoint plus a uniform fill of 256 points per
/// unit. Returns +∞ for the atom-at-zero obstruction.
pub fn rho_gauge(f: &HalfLineMeasure, nu: &Gauge, l: f64) -> Result<f64> {
    if !(l > 0.0) {
        return domain_err("gauge level l must be positive");
    }
    Ok(rho_gauge_detail(f, nu, l).0)
}

/// Supremum over every level. ρ⁰ stabilizes past the support while ν keeps
/// growing, so one level just beyond the support is enough.
pub fn rho_gauge_global(f: &HalfLineMeasure, nu: &Gauge) -> f64 {
    let l = f.support_end().map_or(1.0, |e| e + 1.0).max(1.0);
    rho_gauge_detail(f, nu, l).0
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EmbeddingReport {
    pub rho_global: f64,
    pub hs_norm: f64,
    pub pass: bool,
    /// Time achieving the supremum, for diagnosing a failure.
    pub worst_t: f64,
}

/// Check ρ-global against the Sobolev norm for a density supported on the
/// half-line: the gauge ν₀(s) is built so that the supremum never exceeds
/// the H^s norm of the inverse transform.
pub fn check_hs_embedding(f: &HalfLineMeasure, s: f64) -> Result<EmbeddingReport> {
    if !f.atoms.is_empty() {
        return domain_err("embedding check applies to pure densities");
    }
    let profile = match &f.density {
        Density::Poly(p) => p,
        _ => return domain_err("embedding check needs a polynomial magnitude profile"),
    };
    let hs_norm = profile.weighted_l2_norm(s);
    let nu = Gauge::Nu0 { s };
    let l = f.support_end().map_or(1.0, |e| e + 1.0).max(1.0);
    let (rho_global, worst_t) = rho_gauge_detail(f, &nu, l);
    Ok(EmbeddingReport {
        rho_global,
        hs_norm,
        pass: rho_global <= hs_norm + 1e-8,
        worst_t,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MultiplierReport {
    pub max_discrepancy: f64,
    pub pass: bool,
}

/// Apply the free-evolution multiplier e^{it|ξ|^α} to F and verify the
/// variation profile t′ ↦ ρ⁰(·, t′) is untouched. The multiplier is
/// unimodular, so for atoms and grids the weights change phase only; the
/// polynomial magnitude profile is by definition phase-free.
pub fn multiplier_invariance(f: &HalfLineMeasure, alpha: f64, t: f64) -> MultiplierReport {
    let phase = |x: f64| Complex64::from_polar(1.0, t * x.abs().powf(alpha));
    let atoms = f
        .atoms
        .iter()
        .map(|a| Atom {
            location: a.location,
            weight: a.weight * phase(a.location),
        })
        .collect();
    let density = match &f.density {
        Density::None => Density::None,
        Density::Poly(p) => Density::Poly(p.clone()),
        Density::Grid { nodes, values } => Density::Grid {
            nodes: nodes.clone(),
            values: nodes
                .iter()
                .zip(values)
                .map(|(&x, v)| v * phase(x))
                .collect(),
        },
    };
    let mf = HalfLineMeasure {
        atoms,
        density,
    };
    let end = f.support_end().map_or(1.0, |e| e + 1.0).max(1.0);
    let mut max_disc = 0.0f64;
    for tp in sup_grid(f, end) {
        let d = (rho0(f, tp) - rho0(&mf, tp)).abs();
        if d > max_disc {
            max_disc = d;
        }
        let d = (rho0_closed(f, tp) - rho0_closed(&mf, tp)).abs();
        if d > max_disc {
            max_disc = d;
        }
    }
    MultiplierReport {
        max_discrepancy: max_disc,
        pass: max_disc <= 1e-14,
    }
}

/// Convolution of measures with polynomial densities (atoms convolve to
/// atoms, atom × density shifts the profile, density × density is the
/// exact piecewise convolution).
pub fn convolve_measures(f: &HalfLineMeasure, g: &HalfLineMeasure) -> Result<HalfLineMeasure> {
    let poly_of = |m: &HalfLineMeasure| -> Result<Option<PiecewisePoly>> {
        match &m.density {
            Density::None => Ok(None),
            Density::Poly(p) => Ok(Some(p.clone())),
            Density::Grid { .. } => domain_err("measure convolution needs polynomial densities"),
        }
    };
    let fp = poly_of(f)?;
    let gp = poly_of(g)?;

    let mut atoms: Vec<Atom> = Vec::new();
    for a in &f.atoms {
        for b in &g.atoms {
            atoms.push(Atom {
                location: a.location + b.location,
                weight: a.weight * b.weight,
            });
        }
    }

    let shift = |p: &PiecewisePoly, by: f64, w: f64| -> Result<PiecewisePoly> {
        if p.is_zero() || w == 0.0 {
            return Ok(PiecewisePoly::zero());
        }
        let bps = p.breakpoints().iter().map(|b| b + by).collect();
        // Local piece coordinates are relative to the left breakpoint, so a
        // shift moves breakpoints only.
        PiecewisePoly::from_pieces(bps, p.scale(w).pieces().to_vec())
    };

    let mut density = PiecewisePoly::zero();
    if let (Some(fp), Some(gp)) = (&fp, &gp) {
        density = density.add(&fp.convolve(gp));
    }
    if let Some(gp) = &gp {
        for a in &f.atoms {
            density = density.add(&shift(gp, a.location, a.weight.norm())?);
        }
    }
    if let Some(fp) = &fp {
        for b in &g.atoms {
            density = density.add(&shift(fp, b.location, b.weight.norm())?);
        }
    }

    let density = if density.is_zero() {
        Density::None
    } else {
        Density::Poly(density)
    };
    HalfLineMeasure::new(atoms, density)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GaugeCheckRow {
    pub l: f64,
    pub lhs: f64,
    pub rhs: f64,
    pub margin: f64,
    pub holds: bool,
}

/// Audit ρ^{κν₁}_l(F ∗ G) ≤ ρ^{ν₁}_l(F) · ρ^{ν₁}_l(G) over a list of
/// levels. The gauge ν₁ is supplied by the caller; this only reports the
/// margins, it does not construct ν₁.
pub fn convolution_gauge_check(
    f: &HalfLineMeasure,
    g: &HalfLineMeasure,
    nu1: &Gauge,
    beta: f64,
    levels: &[f64],
) -> Result<Vec<GaugeCheckRow>> {
    if !f.atoms.is_empty() || !g.atoms.is_empty() {
        return domain_err("gauge audit applies to pure densities");
    }
    let conv = convolve_measures(f, g)?;
    // Side condition: supports add.
    if let (Some((flo, _)), Some((glo, _)), Some(cl)) = (
        match &f.density {
            Density::Poly(p) => p.support(),
            _ => None,
        },
        match &g.density {
            Density::Poly(p) => p.support(),
            _ => None,
        },
        match &conv.density {
            Density::Poly(p) => p.support(),
            _ => None,
        },
    ) {
        let expected = flo + glo;
        if (cl.0 - expected).abs() > 1e-9 * (1.0 + expected.abs()) {
            return domain_err("convolution support does not start at the sum of infima");
        }
    }
    let weighted = Gauge::Product(
        Box::new(Gauge::Kappa { beta }),
        Box::new(nu1.clone()),
    );
    let mut rows = Vec::with_capacity(levels.len());
    for &l in levels {
        let lhs = rho_gauge(&conv, &weighted, l)?;
        let rhs = rho_gauge(f, nu1, l)? * rho_gauge(g, nu1, l)?;
        rows.push(GaugeCheckRow {
            l,
            lhs,
            rhs,
            margin: rhs - lhs,
            holds: lhs <= rhs + 1e-10,
        });
    }
    Ok(rows)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn indicator_measure(a: f64, b: f64) -> HalfLineMeasure {
        HalfLineMeasure::new(
            Vec::new(),
            Density::Poly(PiecewisePoly::indicator(a, b).unwrap()),
        )
        .unwrap()
    }

    #[test]
    fn variation_of_indicator_density() {
        let f = indicator_measure(1.0, 2.0);
        assert!((rho0(&f, 1.5) - 0.5).abs() < 1e-15);
        assert_eq!(rho0(&f, 0.5), 0.0);
        assert!((rho0(&f, 10.0) - 1.0).abs() < 1e-15);
    }

    #[test]
    fn atom_exactly_at_cutoff_is_excluded() {
        let f = HalfLineMeasure::new(
            alloc::vec![Atom {
                location: 2.0,
                weight: Complex64::new(3.0, 4.0),
            }],
            Density::None,
        )
        .unwrap();
        assert_eq!(rho0(&f, 2.0), 0.0);
        assert_eq!(rho0_closed(&f, 2.0), 5.0);
        assert_eq!(rho0(&f, 2.0 + 1e-12), 5.0);
    }

    #[test]
    fn atom_at_origin_counts_for_any_positive_time() {
        let f = HalfLineMeasure::new(
            alloc::vec![Atom {
                location: 0.0,
                weight: Complex64::new(0.0, 2.0),
            }],
            Density::None,
        )
        .unwrap();
        assert_eq!(rho0(&f, 1e-9), 2.0);
        assert_eq!(rho0(&f, 7.0), 2.0);
    }

    #[test]
    fn nu0_closed_forms() {
        let nu = Gauge::Nu0 { s: 0.0 };
        let vals = nu.eval_many(&[0.25, 1.0, 4.0]);
        assert!((vals[0] - 0.5).abs() < 1e-10);
        assert!((vals[1] - 1.0).abs() < 1e-10);
        assert!((vals[2] - 2.0).abs() < 1e-10);
        // s = 1: integrand (1+ξ²)^{-1}, antiderivative arctan.
        let nu = Gauge::Nu0 { s: 1.0 };
        let v = nu.eval(1.0);
        assert!((v - (core::f64::consts::FRAC_PI_4).sqrt()).abs() < 1e-10);
    }

    #[test]
    fn nu0_tilde_reference_values() {
        let nu = Gauge::Nu0Tilde { s: 0.0 };
        assert!((nu.eval(2.0) - 2.0f64.sqrt()).abs() < 1e-15);
        assert!((nu.eval(0.5) - 0.5f64.sqrt()).abs() < 1e-15);
        assert_eq!(nu.eval(0.0), 0.0);
        // s = -1 uses |s|: ν̃₀(1.5)² = ⟨2⟩²·0.5 + ⟨1⟩² = 2.5 + 2.
        let nu = Gauge::Nu0Tilde { s: -1.0 };
        assert!((nu.eval(1.5) - 4.5f64.sqrt()).abs() < 1e-15);
    }

    #[test]
    fn indicator_against_square_root_gauge() {
        // ρ⁰(t) = t on [0,1], ν(t) = √t, ratio √t maximized at t = 1.
        let f = indicator_measure(0.0, 1.0);
        let nu = Gauge::Nu0 { s: 0.0 };
        let v = rho_gauge(&f, &nu, 1.0).unwrap();
        assert!((v - 1.0).abs() < 1e-9);
    }

    #[test]
    fn atom_at_zero_is_the_obstruction() {
        let f = HalfLineMeasure::new(
            alloc::vec![Atom {
                location: 0.0,
                weight: Complex64::new(1.0, 0.0),
            }],
            Density::None,
        )
        .unwrap();
        assert_eq!(rho_gauge(&f, &Gauge::Nu0 { s: 0.5 }, 2.0).unwrap(), f64::INFINITY);
        assert_eq!(rho_gauge_global(&f, &Gauge::Nu0Tilde { s: 1.0 }), f64::INFINITY);
        // A gauge positive at 0 sees plain total variation instead.
        let v = rho_gauge(&f, &Gauge::Custom(|_| 1.0), 2.0).unwrap();
        assert!((v - 1.0).abs() < 1e-12);
    }

    #[test]
    fn gauge_supremum_is_homogeneous() {
        let f = indicator_measure(0.5, 2.5);
        let nu = Gauge::Nu0 { s: 0.25 };
        let base = rho_gauge_global(&f, &nu);
        for c in [2.0, 10.0] {
            let v = rho_gauge_global(&f.scale(c), &nu);
            assert!((v - c * base).abs() < 1e-9 * c * base);
        }
    }

    #[test]
    fn zero_measure_has_zero_gauge() {
        let f = HalfLineMeasure::zero();
        assert_eq!(rho_gauge(&f, &Gauge::Nu0 { s: 0.0 }, 3.0).unwrap(), 0.0);
        assert_eq!(rho_gauge_global(&f, &Gauge::Kappa { beta: 1.0 }), 0.0);
    }

    #[test]
    fn embedding_holds_for_shifted_indicator() {
        let f = indicator_measure(1.0, 2.0);
        let rep = check_hs_embedding(&f, 0.0).unwrap();
        assert!(rep.pass, "rho {} vs norm {}", rep.rho_global, rep.hs_norm);
        assert!((rep.hs_norm - 1.0).abs() < 1e-10);
    }

    #[test]
    fn multiplier_leaves_variation_alone() {
        let f = indicator_measure(0.0, 1.0);
        let rep = multiplier_invariance(&f, 2.0, 1.0);
        assert!(rep.pass);
        let g = HalfLineMeasure::new(
            alloc::vec![
                Atom {
                    location: 0.5,
                    weight: Complex64::new(1.0, -2.0),
                },
                Atom {
                    location: 3.0,
                    weight: Complex64::new(0.0, 1.0),
                },
            ],
            Density::None,
        )
        .unwrap();
        let rep = multiplier_invariance(&g, 1.5, 10.0);
        assert!(rep.max_discrepancy <= 1e-15);
    }

    #[test]
    fn measure_convolution_mixes_parts() {
        let f = HalfLineMeasure::new(
            alloc::vec![Atom {
                location: 1.0,
                weight: Complex64::new(2.0, 0.0),
            }],
            Density::Poly(PiecewisePoly::indicator(0.0, 1.0).unwrap()),
        )
        .unwrap();
        let g = indicator_measure(0.0, 1.0);
        let c = convolve_measures(&f, &g).unwrap();
        assert!(c.atoms().is_empty());
        // Density = tent on [0,2] + 2·indicator shifted to [1,2].
        match c.density() {
            Density::Poly(p) => {
                assert!((p.eval(1.5) - (0.5 + 2.0)).abs() < 1e-12);
                assert!((p.eval(0.5) - 0.5).abs() < 1e-12);
                assert!((p.integral() - 3.0).abs() < 1e-12);
            }
            _ => panic!("expected a polynomial density"),
        }
    }

    #[test]
    fn convolution_gauge_rows_report_margins() {
        let f = indicator_measure(0.0, 1.0);
        let rows = convolution_gauge_check(
            &f,
            &f,
            &Gauge::Custom(|t| t.sqrt().max(t)),
            1.0,
            &[0.5, 1.0, 2.0, 4.0],
        )
        .unwrap();
        assert_eq!(rows.len(), 4);
        for r in &rows {
            assert_eq!(r.holds, r.lhs <= r.rhs + 1e-10);
            assert!((r.margin - (r.rhs - r.lhs)).abs() < 1e-12);
        }
    }

    #[test]
    fn unit_level_of_gauges() {
        // ν₀ with s = 0 crosses 1 at t = 1.
        let l = gauge_unit_level(&Gauge::Nu0 { s: 0.0 });
        assert!((l - 1.0).abs() < 1e-9);
        // κ never exceeds 1.
        assert_eq!(gauge_unit_level(&Gauge::Kappa { beta: 2.0 }), f64::INFINITY);
    }

    #[test]
    fn grid_density_variation_uses_trapezoids() {
        let f = HalfLineMeasure::new(
            Vec::new(),
            Density::Grid {
                nodes: alloc::vec![0.0, 1.0, 2.0],
                values: alloc::vec![
                    Complex64::new(0.0, 0.0),
                    Complex64::new(0.0, 1.0),
                    Complex64::new(1.0, 0.0),
                ],
            },
        )
        .unwrap();
        assert!((rho0(&f, 1.0) - 0.5).abs() < 1e-15);
        assert!((rho0(&f, 1.5) - 1.0).abs() < 1e-15);
        assert!((rho0(&f, 5.0) - 1.5).abs() < 1e-15);
    }

    #[test]
    fn negative_support_is_rejected() {
        assert!(HalfLineMeasure::new(
            alloc::vec![Atom {
                location: -0.1,
                weight: Complex64::new(1.0, 0.0),
            }],
            Density::None,
        )
        .is_err());
        assert!(HalfLineMeasure::new(
            Vec::new(),
            Density::Poly(PiecewisePoly::indicator(-1.0, 1.0).unwrap()),
        )
        .is_err());
    }
}
