//! Exact piecewise-polynomial algebra on the line.
//!
//! A `PiecewisePoly` is zero outside its breakpoint span and a polynomial on
//! each piece. Convolutions are computed symbolically, so iterated
//! convolutions of indicators (the B-spline majorants that control the
//! Picard iterate supports) carry no quadrature error; weighted L² norms use
//! adaptive Gauss–Legendre with a 1e-10 relative target.

use alloc::vec;
use alloc::vec::Vec;

// Needed in pure no_std builds; shadowed whenever std is in the crate
// graph (e.g. under the test harness), hence the blanket allow.
#[allow(unused_imports)]
use num_traits::Float;
use serde::{Deserialize, Serialize};

use crate::quad::GaussRule;
use crate::{domain_err, Result};

/// Relative tolerance for weighted L² quadrature.
pub const L2_QUAD_REL_TOL: f64 = 1e-11;
const L2_QUAD_MAX_DEPTH: u32 = 28;

/// Piecewise polynomial with sorted breakpoints.
///
/// `pieces[i]` holds ascending coefficients of the polynomial on
/// `[breakpoints[i], breakpoints[i+1])` in the local variable
/// `x - breakpoints[i]`; local coordinates keep coefficients well scaled for
/// narrow pieces sitting at large frequencies. The function is zero outside
/// the span; evaluation at the final breakpoint uses the last piece, so an
/// indicator takes the value 1 on the whole closed interval.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PiecewisePoly {
    breakpoints: Vec<f64>,
    pieces: Vec<Vec<f64>>,
}

impl PiecewisePoly {
    /// The identically zero function.
    pub fn zero() -> Self {
        PiecewisePoly {
            breakpoints: Vec::new(),
            pieces: Vec::new(),
        }
    }

    /// Characteristic function of `[a, b]`.
    pub fn indicator(a: f64, b: f64) -> Result<Self> {
        if !(a.is_finite() && b.is_finite() && a < b) {
            return domain_err(alloc::format!("indicator needs finite a < b, got [{a}, {b}]"));
        }
        Ok(PiecewisePoly {
            breakpoints: vec![a, b],
            pieces: vec![vec![1.0]],
        })
    }

    /// Build from raw parts, validating the representation invariants.
    pub fn from_pieces(breakpoints: Vec<f64>, pieces: Vec<Vec<f64>>) -> Result<Self> {
        if breakpoints.is_empty() && pieces.is_empty() {
            return Ok(Self::zero());
        }
        if breakpoints.len() < 2 || pieces.len() != breakpoints.len() - 1 {
            return domain_err("piece count must be breakpoint count minus one");
        }
        if breakpoints.iter().any(|b| !b.is_finite()) {
            return domain_err("breakpoints must be finite");
        }
        if breakpoints.windows(2).any(|w| w[0] >= w[1]) {
            return domain_err("breakpoints must be strictly increasing");
        }
        if pieces.iter().any(|p| p.iter().any(|c| !c.is_finite())) {
            return domain_err("coefficients must be finite");
        }
        Ok(PiecewisePoly {
            breakpoints,
            pieces,
        })
    }

    pub fn is_zero(&self) -> bool {
        self.breakpoints.is_empty()
    }

    pub fn breakpoints(&self) -> &[f64] {
        &self.breakpoints
    }

    pub fn pieces(&self) -> &[Vec<f64>] {
        &self.pieces
    }

    /// Closed support span, `None` for the zero function.
    pub fn support(&self) -> Option<(f64, f64)> {
        if self.is_zero() {
            None
        } else {
            Some((self.breakpoints[0], *self.breakpoints.last().unwrap()))
        }
    }

    pub fn degree(&self) -> usize {
        self.pieces
            .iter()
            .map(|p| p.len().saturating_sub(1))
            .max()
            .unwrap_or(0)
    }

    pub fn eval(&self, x: f64) -> f64 {
        if self.is_zero() {
            return 0.0;
        }
        let (lo, hi) = (self.breakpoints[0], *self.breakpoints.last().unwrap());
        if x < lo || x > hi {
            return 0.0;
        }
        let idx = self
            .breakpoints
            .partition_point(|&b| b <= x)
            .saturating_sub(1)
            .min(self.pieces.len() - 1);
        poly_eval(&self.pieces[idx], x - self.breakpoints[idx])
    }

    /// Exact ∫ f over the whole line.
    pub fn integral(&self) -> f64 {
        let mut acc = 0.0;
        for (i, p) in self.pieces.iter().enumerate() {
            let w = self.breakpoints[i + 1] - self.breakpoints[i];
            acc += poly_eval(&poly_antiderivative(p), w);
        }
        acc
    }

    /// Exact ∫_{-∞}^{x} f.
    pub fn integral_to(&self, x: f64) -> f64 {
        if self.is_zero() || x <= self.breakpoints[0] {
            return 0.0;
        }
        let mut acc = 0.0;
        for (i, p) in self.pieces.iter().enumerate() {
            let (a, b) = (self.breakpoints[i], self.breakpoints[i + 1]);
            if x >= b {
                acc += poly_eval(&poly_antiderivative(p), b - a);
            } else {
                acc += poly_eval(&poly_antiderivative(p), x - a);
                break;
            }
        }
        acc
    }

    pub fn scale(&self, c: f64) -> Self {
        let pieces = self
            .pieces
            .iter()
            .map(|p| p.iter().map(|k| k * c).collect())
            .collect();
        PiecewisePoly {
            breakpoints: self.breakpoints.clone(),
            pieces,
        }
    }

    /// Pointwise sum. Breakpoints are merged; pieces are re-expanded in the
    /// local coordinates of the merged grid.
    pub fn add(&self, other: &Self) -> Self {
        if self.is_zero() {
            return other.clone();
        }
        if other.is_zero() {
            return self.clone();
        }
        let mut bps: Vec<f64> = self
            .breakpoints
            .iter()
            .chain(other.breakpoints.iter())
            .copied()
            .collect();
        bps.sort_by(|a, b| a.partial_cmp(b).unwrap());
        bps.dedup();
        let mut pieces = Vec::with_capacity(bps.len() - 1);
        for w in bps.windows(2) {
            let (z0, z1) = (w[0], w[1]);
            let mid = 0.5 * (z0 + z1);
            let mut acc: Vec<f64> = Vec::new();
            for f in [self, other] {
                if let Some(p) = f.piece_covering(mid) {
                    let shifted = poly_shift(&f.pieces[p], z0 - f.breakpoints[p]);
                    poly_add_into(&mut acc, &shifted);
                }
            }
            pieces.push(acc);
        }
        PiecewisePoly {
            breakpoints: bps,
            pieces,
        }
    }

    fn piece_covering(&self, x: f64) -> Option<usize> {
        if self.is_zero() {
            return None;
        }
        let (lo, hi) = self.support().unwrap();
        if x < lo || x > hi {
            return None;
        }
        Some(
            self.breakpoints
                .partition_point(|&b| b <= x)
                .saturating_sub(1)
                .min(self.pieces.len() - 1),
        )
    }

    /// Exact convolution. Support is the Minkowski sum of the supports and
    /// each output piece has degree ≤ deg f + deg g + 1.
    pub fn convolve(&self, other: &Self) -> Self {
        if self.is_zero() || other.is_zero() {
            return Self::zero();
        }
        // Candidate output breakpoints: all pairwise boundary sums.
        let mut cands: Vec<f64> = Vec::new();
        for &a in &self.breakpoints {
            for &b in &other.breakpoints {
                cands.push(a + b);
            }
        }
        cands.sort_by(|a, b| a.partial_cmp(b).unwrap());
        cands.dedup();

        let mut out_pieces: Vec<Vec<f64>> = vec![Vec::new(); cands.len() - 1];
        for i in 0..self.pieces.len() {
            let a_len = self.breakpoints[i + 1] - self.breakpoints[i];
            for j in 0..other.pieces.len() {
                let b_len = other.breakpoints[j + 1] - other.breakpoints[j];
                let origin = self.breakpoints[i] + other.breakpoints[j];
                let span_end = self.breakpoints[i + 1] + other.breakpoints[j + 1];
                let regions = PairRegions::build(&self.pieces[i], a_len, &other.pieces[j], b_len);
                let start = cands.partition_point(|&z| z <= origin) - 1;
                for (k, w) in cands.windows(2).enumerate().skip(start.max(0)) {
                    let (z0, z1) = (w[0], w[1]);
                    if z1 <= origin {
                        continue;
                    }
                    if z0 >= span_end {
                        break;
                    }
                    let ym = 0.5 * (z0 + z1) - origin;
                    let region = regions.select(ym);
                    if region.is_empty() {
                        continue;
                    }
                    let local = poly_shift(region, z0 - origin);
                    poly_add_into(&mut out_pieces[k], &local);
                }
            }
        }
        PiecewisePoly {
            breakpoints: cands,
            pieces: out_pieces,
        }
    }

    /// (∫ ⟨x⟩^{2s} f(x)² dx)^{1/2} by adaptive Gauss–Legendre per piece.
    pub fn weighted_l2_norm(&self, s: f64) -> f64 {
        if self.is_zero() {
            return 0.0;
        }
        let rule = GaussRule::new(32);
        let mut acc = 0.0;
        for (i, p) in self.pieces.iter().enumerate() {
            let (a, b) = (self.breakpoints[i], self.breakpoints[i + 1]);
            let f = |x: f64| {
                let v = poly_eval(p, x - a);
                (1.0 + x * x).powf(s) * v * v
            };
            acc += rule.integrate_adaptive(&f, a, b, L2_QUAD_REL_TOL, L2_QUAD_MAX_DEPTH);
        }
        acc.max(0.0).sqrt()
    }

    /// Pointwise product with the indicator of `[lo, hi)`.
    pub fn band_restrict(&self, lo: f64, hi: f64) -> Result<Self> {
        if !(lo.is_finite() && hi.is_finite() && lo < hi) {
            return domain_err(alloc::format!("band [{lo}, {hi}) is empty or not finite"));
        }
        if self.is_zero() {
            return Ok(Self::zero());
        }
        let (slo, shi) = self.support().unwrap();
        let clo = lo.max(slo);
        let chi = hi.min(shi);
        if clo >= chi {
            return Ok(Self::zero());
        }
        let mut bps = vec![clo];
        for &b in &self.breakpoints {
            if b > clo && b < chi {
                bps.push(b);
            }
        }
        bps.push(chi);
        let mut pieces = Vec::with_capacity(bps.len() - 1);
        for w in bps.windows(2) {
            let mid = 0.5 * (w[0] + w[1]);
            let p = self.piece_covering(mid).expect("interval within support");
            pieces.push(poly_shift(&self.pieces[p], w[0] - self.breakpoints[p]));
        }
        PiecewisePoly::from_pieces(bps, pieces)
    }
}

/// Result of a k-fold convolution power: for k = 0 the unit of convolution
/// (the point mass at the origin), otherwise an honest function.
#[derive(Debug, Clone, PartialEq)]
pub enum ConvKernel {
    Unit,
    Poly(PiecewisePoly),
}

impl ConvKernel {
    pub fn convolve(&self, other: &ConvKernel) -> ConvKernel {
        match (self, other) {
            (ConvKernel::Unit, g) => g.clone(),
            (f, ConvKernel::Unit) => f.clone(),
            (ConvKernel::Poly(f), ConvKernel::Poly(g)) => ConvKernel::Poly(f.convolve(g)),
        }
    }

    pub fn as_poly(&self) -> Option<&PiecewisePoly> {
        match self {
            ConvKernel::Unit => None,
            ConvKernel::Poly(p) => Some(p),
        }
    }
}

/// k-fold convolution power of the indicator of `[a, b]`.
///
/// The result is the cardinal B-spline of order k, rescaled: support
/// `[ka, kb]`, integral `(b-a)^k`, breakpoints `ka + j(b-a)` computed from
/// the integer lattice so repeated convolutions cannot drift.
pub fn conv_power(a: f64, b: f64, k: u32) -> Result<ConvKernel> {
    if k == 0 {
        return Ok(ConvKernel::Unit);
    }
    if !(a.is_finite() && b.is_finite() && a < b) {
        return domain_err(alloc::format!("conv_power needs finite a < b, got [{a}, {b}]"));
    }
    let cell = PiecewisePoly::indicator(0.0, 1.0)?;
    let mut bspline = cell.clone();
    for _ in 1..k {
        bspline = bspline.convolve(&cell);
    }
    debug_assert_eq!(bspline.pieces.len(), k as usize);
    let h = b - a;
    let amp = h.powi(k as i32 - 1);
    let breakpoints: Vec<f64> = (0..=k).map(|j| k as f64 * a + j as f64 * h).collect();
    let pieces: Vec<Vec<f64>> = bspline
        .pieces
        .iter()
        .map(|p| {
            p.iter()
                .enumerate()
                .map(|(m, c)| c * amp / h.powi(m as i32))
                .collect()
        })
        .collect();
    Ok(ConvKernel::Poly(PiecewisePoly::from_pieces(
        breakpoints,
        pieces,
    )?))
}

/// The three closed-form regions of the convolution of two single pieces.
///
/// With p on [0, A] and q on [0, B], the contribution at y = x - origin is
/// ∫ p(u) q(y-u) du over u ∈ [max(0, y-B), min(A, y)]; the integration limits
/// switch at y = min(A, B) and y = max(A, B).
struct PairRegions {
    w: f64,
    big_w: f64,
    span: f64,
    r1: Vec<f64>,
    r2: Vec<f64>,
    r3: Vec<f64>,
}

impl PairRegions {
    fn build(p: &[f64], a_len: f64, q: &[f64], b_len: f64) -> Self {
        let h = bivariate_antiderivative(p, q);
        let at_zero = substitute_const(&h, 0.0);
        let at_a = substitute_const(&h, a_len);
        let at_y = substitute_y(&h);
        let at_y_minus_b = substitute_y_shift(&h, b_len);
        let r1 = poly_sub(&at_y, &at_zero);
        let r2 = if a_len <= b_len {
            poly_sub(&at_a, &at_zero)
        } else {
            poly_sub(&at_y, &at_y_minus_b)
        };
        let r3 = poly_sub(&at_a, &at_y_minus_b);
        PairRegions {
            w: a_len.min(b_len),
            big_w: a_len.max(b_len),
            span: a_len + b_len,
            r1,
            r2,
            r3,
        }
    }

    fn select(&self, y: f64) -> &[f64] {
        if y <= 0.0 || y >= self.span {
            &[]
        } else if y < self.w {
            &self.r1
        } else if y < self.big_w {
            &self.r2
        } else {
            &self.r3
        }
    }
}

/// Coefficients H[i][j] of yⁱ uʲ in ∫ p(u) q(y-u) du (antiderivative in u).
fn bivariate_antiderivative(p: &[f64], q: &[f64]) -> Vec<Vec<f64>> {
    let dp = p.len();
    let dq = q.len();
    if dp == 0 || dq == 0 {
        return vec![vec![0.0]];
    }
    let mut prod = vec![vec![0.0; dp + dq]; dq];
    for (m, &cm) in p.iter().enumerate() {
        if cm == 0.0 {
            continue;
        }
        for (n, &dn) in q.iter().enumerate() {
            if dn == 0.0 {
                continue;
            }
            // q-term d_n (y-u)^n = d_n Σ_r C(n,r) y^{n-r} (-u)^r
            let mut sign = 1.0;
            for r in 0..=n {
                prod[n - r][m + r] += cm * dn * binomial(n, r) * sign;
                sign = -sign;
            }
        }
    }
    let mut h = vec![vec![0.0; dp + dq + 1]; dq];
    for (i, row) in prod.iter().enumerate() {
        for (j, &c) in row.iter().enumerate() {
            if c != 0.0 {
                h[i][j + 1] = c / (j as f64 + 1.0);
            }
        }
    }
    h
}

/// H with u := const, as a polynomial in y.
fn substitute_const(h: &[Vec<f64>], u: f64) -> Vec<f64> {
    let mut out = vec![0.0; h.len()];
    for (i, row) in h.iter().enumerate() {
        out[i] = poly_eval(row, u);
    }
    out
}

/// H with u := y.
fn substitute_y(h: &[Vec<f64>]) -> Vec<f64> {
    let max_deg = h.len() + h.iter().map(|r| r.len()).max().unwrap_or(1);
    let mut out = vec![0.0; max_deg];
    for (i, row) in h.iter().enumerate() {
        for (j, &c) in row.iter().enumerate() {
            if c != 0.0 {
                out[i + j] += c;
            }
        }
    }
    trim_poly(out)
}

/// H with u := y - b.
fn substitute_y_shift(h: &[Vec<f64>], b: f64) -> Vec<f64> {
    let max_deg = h.len() + h.iter().map(|r| r.len()).max().unwrap_or(1);
    let mut out = vec![0.0; max_deg];
    for (i, row) in h.iter().enumerate() {
        for (j, &c) in row.iter().enumerate() {
            if c == 0.0 {
                continue;
            }
            // (y-b)^j = Σ_t C(j,t) y^t (-b)^{j-t}
            for t in 0..=j {
                out[i + t] += c * binomial(j, t) * (-b).powi((j - t) as i32);
            }
        }
    }
    trim_poly(out)
}

fn trim_poly(mut p: Vec<f64>) -> Vec<f64> {
    while p.len() > 1 && *p.last().unwrap() == 0.0 {
        p.pop();
    }
    if p.len() == 1 && p[0] == 0.0 {
        p.clear();
    }
    p
}

pub(crate) fn poly_eval(c: &[f64], x: f64) -> f64 {
    let mut acc = 0.0;
    for &k in c.iter().rev() {
        acc = acc * x + k;
    }
    acc
}

fn poly_antiderivative(c: &[f64]) -> Vec<f64> {
    let mut out = Vec::with_capacity(c.len() + 1);
    out.push(0.0);
    for (m, &k) in c.iter().enumerate() {
        out.push(k / (m as f64 + 1.0));
    }
    out
}

/// p(w + δ) expanded in w.
pub(crate) fn poly_shift(c: &[f64], delta: f64) -> Vec<f64> {
    if delta == 0.0 {
        return c.to_vec();
    }
    let mut out = vec![0.0; c.len()];
    for (m, &cm) in c.iter().enumerate() {
        if cm == 0.0 {
            continue;
        }
        for j in 0..=m {
            out[j] += cm * binomial(m, j) * delta.powi((m - j) as i32);
        }
    }
    out
}

fn poly_add_into(acc: &mut Vec<f64>, p: &[f64]) {
    if acc.len() < p.len() {
        acc.resize(p.len(), 0.0);
    }
    for (a, &b) in acc.iter_mut().zip(p.iter()) {
        *a += b;
    }
}

fn poly_sub(a: &[f64], b: &[f64]) -> Vec<f64> {
    let mut out = a.to_vec();
    if out.len() < b.len() {
        out.resize(b.len(), 0.0);
    }
    for (o, &c) in out.iter_mut().zip(b.iter()) {
        *o -= c;
    }
    trim_poly(out)
}

fn binomial(n: usize, k: usize) -> f64 {
    let k = k.min(n - k.min(n));
    let mut acc = 1.0;
    for i in 0..k {
        acc = acc * (n - i) as f64 / (i + 1) as f64;
    }
    acc
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn indicator_is_one_on_closed_interval() {
        let f = PiecewisePoly::indicator(0.25, 0.5).unwrap();
        assert_eq!(f.eval(0.25), 1.0);
        assert_eq!(f.eval(0.4), 1.0);
        assert_eq!(f.eval(0.5), 1.0);
        assert_eq!(f.eval(0.2499), 0.0);
        assert_eq!(f.eval(0.5001), 0.0);
        assert!((f.integral() - 0.25).abs() < 1e-15);
    }

    #[test]
    fn two_indicators_convolve_to_tent() {
        let f = PiecewisePoly::indicator(0.0, 1.0).unwrap();
        let tent = f.convolve(&f);
        assert_eq!(tent.support(), Some((0.0, 2.0)));
        assert!((tent.eval(1.0) - 1.0).abs() < 1e-15);
        assert!((tent.eval(0.5) - 0.5).abs() < 1e-15);
        assert!((tent.eval(1.5) - 0.5).abs() < 1e-15);
        assert!((tent.integral() - 1.0).abs() < 1e-14);
    }

    #[test]
    fn quadratic_bspline_center_value() {
        // Three-fold power of the unit indicator, evaluated at the midpoint.
        let kern = conv_power(0.0, 1.0, 3).unwrap();
        let p = kern.as_poly().unwrap();
        assert!((p.eval(1.5) - 0.75).abs() < 1e-12);
        assert!((p.integral() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn conv_power_metadata_is_exact() {
        for k in 1..=8u32 {
            let (a, b) = (0.0625, 0.125);
            let kern = conv_power(a, b, k).unwrap();
            let p = kern.as_poly().unwrap();
            let (lo, hi) = p.support().unwrap();
            assert_eq!(lo, k as f64 * a);
            assert_eq!(hi, k as f64 * b);
            let want = (b - a).powi(k as i32);
            assert!(
                (p.integral() - want).abs() <= 1e-12 * want,
                "k = {k}: integral {} vs {want}",
                p.integral()
            );
            // Breakpoints sit exactly on the scaled integer lattice.
            for (j, &bp) in p.breakpoints().iter().enumerate() {
                assert_eq!(bp, k as f64 * a + j as f64 * (b - a));
            }
            // Symmetry of the B-spline about the support midpoint.
            let mid = 0.5 * (lo + hi);
            for t in [0.1, 0.3, 0.45] {
                let d = t * (hi - lo) * 0.5;
                assert!((p.eval(mid + d) - p.eval(mid - d)).abs() < 1e-12 * p.eval(mid).abs());
            }
        }
    }

    #[test]
    fn conv_power_zero_is_the_unit() {
        let unit = conv_power(0.0, 1.0, 0).unwrap();
        assert!(matches!(unit, ConvKernel::Unit));
        let f = ConvKernel::Poly(PiecewisePoly::indicator(2.0, 3.0).unwrap());
        let same = unit.convolve(&f);
        assert_eq!(same, f);
    }

    #[test]
    fn weighted_norms_match_hand_values() {
        // ∫ tent² = 2/3 with trivial weight.
        let f = PiecewisePoly::indicator(0.0, 1.0).unwrap();
        let tent = f.convolve(&f);
        let n0 = tent.weighted_l2_norm(0.0);
        assert!((n0 - (2.0f64 / 3.0).sqrt()).abs() < 1e-12);
        // ∫_0^1 (1+x²) dx = 4/3 for the unit indicator at s = 1.
        let n1 = f.weighted_l2_norm(1.0);
        assert!((n1 - (4.0f64 / 3.0).sqrt()).abs() < 1e-12);
    }

    #[test]
    fn band_restrict_halves_the_tent() {
        let f = PiecewisePoly::indicator(0.0, 1.0).unwrap();
        let tent = f.convolve(&f);
        let left = tent.band_restrict(0.0, 1.0).unwrap();
        assert!((left.integral() - 0.5).abs() < 1e-14);
        assert_eq!(left.eval(1.2), 0.0);
        let inner = tent.band_restrict(0.5, 1.5).unwrap();
        assert!((inner.integral() - 0.75).abs() < 1e-14);
        let empty = tent.band_restrict(5.0, 6.0).unwrap();
        assert!(empty.is_zero());
    }

    #[test]
    fn convolution_scales_bilinearly() {
        let f = PiecewisePoly::indicator(0.0, 2.0).unwrap().scale(3.0);
        let g = PiecewisePoly::indicator(-1.0, 1.0).unwrap().scale(0.5);
        let c = f.convolve(&g);
        assert!((c.integral() - 3.0 * 2.0 * 0.5 * 2.0).abs() < 1e-13);
    }

    #[test]
    fn add_merges_breakpoints() {
        let f = PiecewisePoly::indicator(0.0, 2.0).unwrap();
        let g = PiecewisePoly::indicator(1.0, 3.0).unwrap();
        let s = f.add(&g);
        assert_eq!(s.eval(0.5), 1.0);
        assert_eq!(s.eval(1.5), 2.0);
        assert_eq!(s.eval(2.5), 1.0);
        assert!((s.integral() - 4.0).abs() < 1e-14);
    }

    #[test]
    fn integral_to_walks_the_antiderivative() {
        let f = PiecewisePoly::indicator(0.0, 1.0).unwrap();
        let tent = f.convolve(&f);
        assert_eq!(tent.integral_to(-1.0), 0.0);
        assert!((tent.integral_to(1.0) - 0.5).abs() < 1e-15);
        assert!((tent.integral_to(0.5) - 0.125).abs() < 1e-15);
        assert!((tent.integral_to(7.0) - 1.0).abs() < 1e-15);
    }
}
