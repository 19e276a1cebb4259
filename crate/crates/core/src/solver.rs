//! Spectral time-stepper for ∂t u + iD^α u = u D^β u on a large periodic
//! box, with data supported on nonnegative frequencies only.
//!
//! The state holds box Fourier coefficients on the half-line lattice
//! {0, Δ, 2Δ, ..., MΔ}. The quadratic convolution only ever adds indices,
//! so nonnegative support is preserved structurally: there are no
//! negative slots to alias into. The high end is truncated: modes above
//! two thirds of the lattice are zeroed every step, and a monitor fails
//! the step with a timestamp once energy reaches that edge.
//!
//! A large box has no local smoothing (the mechanism absent on the
//! circle), so runs in the dispersive regime probe only the absence of
//! N-growth at small data and short time; they prove nothing.

use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use num_complex::Complex64;
// Needed in pure no_std builds; shadowed whenever std is in the crate
// graph (e.g. under the test harness), hence the blanket allow.
#[allow(unused_imports)]
use num_traits::Float;
use serde::Serialize;

use crate::params::{choose_theta, validate_regime, ExperimentParams, RegimeTag};
use crate::{domain_err, jbracket, Error, Result};

/// Largest lattice the direct O(M²) convolution is allowed to carry.
pub const MAX_MODES: usize = 2048;
/// Relative energy at the truncation edge that fails a run.
pub const TAIL_REL_TOL: f64 = 1e-8;

/// Coefficients on the half-line frequency lattice {0, Δ, ..., MΔ}.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralState {
    pub params: ExperimentParams,
    /// Box frequency spacing.
    pub delta: f64,
    pub t: f64,
    pub modes: Vec<Complex64>,
}

impl SpectralState {
    /// First zeroed index: modes strictly above this are dealiased away.
    pub fn dealias_cut(&self) -> usize {
        2 * (self.modes.len() - 1) / 3
    }

    pub fn max_modulus(&self) -> f64 {
        self.modes.iter().fold(0.0f64, |acc, c| acc.max(c.norm()))
    }

    /// Sobolev norm (Σ ⟨mΔ⟩^{2s} |c_m|² Δ)^{1/2} with the state's own s.
    /// The Δ weight is a box-measure convention; every use downstream is
    /// a ratio on a fixed lattice, where it cancels.
    pub fn hs_norm(&self) -> f64 {
        let s = self.params.s;
        let mut acc = 0.0;
        for (m, c) in self.modes.iter().enumerate() {
            acc += jbracket(m as f64 * self.delta).powf(2.0 * s) * c.norm_sqr();
        }
        (acc * self.delta).sqrt()
    }
}

/// Energy near the truncation edge relative to the peak, or zero on an
/// empty state. The window spans the last few kept modes and every
/// zeroed slot above them.
fn tail_edge_ratio(state: &SpectralState) -> f64 {
    let cut = state.dealias_cut();
    let w = (state.modes.len() / 64).max(2);
    let lo = cut.saturating_sub(w);
    let peak = state.max_modulus();
    if peak == 0.0 {
        return 0.0;
    }
    let edge = state.modes[lo..]
        .iter()
        .fold(0.0f64, |acc, c| acc.max(c.norm()));
    edge / peak
}

fn tail_guard(state: &SpectralState) -> Result<()> {
    if tail_edge_ratio(state) > TAIL_REL_TOL {
        return Err(Error::Truncation { t: state.t });
    }
    Ok(())
}

/// One integrating-factor RK4 step. The linear phase e^{-i(mΔ)^α dt} is
/// applied exactly; the convolution Σ c_{m1} (m2 Δ)^β c_{m2} runs in
/// fixed ascending order so identical configs give identical bits.
pub fn step(state: &SpectralState, dt: f64) -> Result<SpectralState> {
    if !(dt > 0.0 && dt.is_finite()) {
        return domain_err("dt must be positive and finite");
    }
    tail_guard(state)?;
    step_impl(state, dt, true)
}

fn step_impl(state: &SpectralState, dt: f64, with_nonlinearity: bool) -> Result<SpectralState> {
    let n = state.modes.len();
    let cut = state.dealias_cut();
    let (alpha, beta) = (state.params.alpha, state.params.beta);
    let delta = state.delta;
    // Zero-frequency multiplier weight is zero by convention, matching
    // the cascade oracle.
    let weights: Vec<f64> = (0..n)
        .map(|m| if m == 0 { 0.0 } else { (m as f64 * delta).powf(beta) })
        .collect();
    let e1: Vec<Complex64> = (0..n)
        .map(|m| Complex64::new(0.0, -(m as f64 * delta).powf(alpha) * 0.5 * dt).exp())
        .collect();
    let e2: Vec<Complex64> = e1.iter().map(|z| z * z).collect();

    let nl = |c: &[Complex64], out: &mut [Complex64]| {
        if !with_nonlinearity {
            for slot in out.iter_mut() {
                *slot = Complex64::new(0.0, 0.0);
            }
            return;
        }
        for m in 0..=cut {
            let mut acc = Complex64::new(0.0, 0.0);
            for m2 in 0..=m {
                acc += c[m - m2] * weights[m2] * c[m2];
            }
            out[m] = acc;
        }
        for slot in out.iter_mut().skip(cut + 1) {
            *slot = Complex64::new(0.0, 0.0);
        }
    };

    let c = &state.modes;
    let mut a = vec![Complex64::new(0.0, 0.0); n];
    let mut b = vec![Complex64::new(0.0, 0.0); n];
    let mut cc = vec![Complex64::new(0.0, 0.0); n];
    let mut d = vec![Complex64::new(0.0, 0.0); n];
    let mut tmp = vec![Complex64::new(0.0, 0.0); n];

    nl(c, &mut a);
    for m in 0..n {
        tmp[m] = e1[m] * (c[m] + a[m] * (0.5 * dt));
    }
    nl(&tmp, &mut b);
    for m in 0..n {
        tmp[m] = e1[m] * c[m] + b[m] * (0.5 * dt);
    }
    nl(&tmp, &mut cc);
    for m in 0..n {
        tmp[m] = e2[m] * c[m] + e1[m] * cc[m] * dt;
    }
    nl(&tmp, &mut d);

    let mut next = vec![Complex64::new(0.0, 0.0); n];
    for m in 0..=cut {
        next[m] =
            e2[m] * c[m] + (e2[m] * a[m] + (b[m] + cc[m]) * 2.0 * e1[m] + d[m]) * (dt / 6.0);
    }
    // Everything above the cut is dealiased away.
    if next.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
        return Err(Error::Resource {
            what: format!("mode amplitudes overflowed at t = {:.6e}", state.t + dt),
            suggestion: String::from("shorten the horizon or shrink the datum"),
        });
    }
    Ok(SpectralState {
        params: state.params,
        delta: state.delta,
        t: state.t + dt,
        modes: next,
    })
}

/// Two-band datum on the line lattice: amplitude εN^{θ/2} on
/// [N^{-θ}, 2N^{-θ}] and εN^{-s+θ/2} on [N, N+N^{-θ}], sampled as box
/// coefficients c_m = Δ · amplitude with Δ = N^{-θ}/n_low. The lattice
/// extends to 1.875·N so that after dealiasing the kept band reaches
/// 1.25·N, enough room for the low-band cascade around frequency N.
pub fn build_line_datum(p: &ExperimentParams, n_low: u32) -> Result<SpectralState> {
    if p.n < 3 {
        return domain_err(format!("N = {} must be at least 3", p.n));
    }
    if !(p.theta > 0.0) || !(p.eps > 0.0) {
        return domain_err("theta and eps must be positive");
    }
    if !(1..=64).contains(&n_low) {
        return domain_err("n_low must lie in [1, 64]");
    }
    let nf = p.n as f64;
    let p_idx_f = nf.powf(p.theta + 1.0) * n_low as f64;
    let m_f = 1.875 * p_idx_f;
    if m_f > MAX_MODES as f64 {
        return Err(Error::Resource {
            what: format!(
                "lattice needs {} modes (cap {MAX_MODES}) at N = {}, theta = {}",
                m_f as u64, p.n, p.theta
            ),
            suggestion: String::from("lower N, theta, or n_low"),
        });
    }
    let p_idx = libm::round(p_idx_f) as usize;
    let m_top = libm::round(m_f) as usize;
    let delta = nf.powf(-p.theta) / n_low as f64;
    let mut modes = vec![Complex64::new(0.0, 0.0); m_top + 1];
    let low_amp = delta * p.eps * nf.powf(0.5 * p.theta);
    let high_amp = delta * p.eps * nf.powf(-p.s + 0.5 * p.theta);
    for m in n_low..=2 * n_low {
        modes[m as usize] = Complex64::new(low_amp, 0.0);
    }
    for m in p_idx..=p_idx + n_low as usize {
        modes[m] = Complex64::new(high_amp, 0.0);
    }
    Ok(SpectralState {
        params: *p,
        delta,
        t: 0.0,
        modes,
    })
}

/// Two-mode cascade datum with Δ = N: box coefficients 1/log N and
/// ⟨N⟩^{-s}/log N on slots 0 and 1. Slots through `n_modes` give the
/// cascade room to grow before the dealias cut.
pub fn build_torus_datum(p: &ExperimentParams, n_modes: usize) -> Result<SpectralState> {
    let rep = validate_regime(p, RegimeTag::Torus);
    if !rep.pass {
        return Err(Error::Regime(rep.violations));
    }
    if !(3..=MAX_MODES).contains(&n_modes) {
        return domain_err(format!("n_modes = {n_modes} must lie in [3, {MAX_MODES}]"));
    }
    let ln_n = (p.n as f64).ln();
    let mut modes = vec![Complex64::new(0.0, 0.0); n_modes + 1];
    modes[0] = Complex64::new(1.0 / ln_n, 0.0);
    modes[1] = Complex64::new(jbracket(p.n as f64).powf(-p.s) / ln_n, 0.0);
    Ok(SpectralState {
        params: *p,
        delta: p.n as f64,
        t: 0.0,
        modes,
    })
}

/// ‖u(T_obs)‖_{H^s} / ‖φ‖_{H^s} for the two-band datum, integrated with
/// `n_steps` fixed steps. Truncation failures carry their timestamp.
pub fn growth_ratio(
    p: &ExperimentParams,
    tag: RegimeTag,
    t_obs: f64,
    n_steps: usize,
) -> Result<f64> {
    if tag == RegimeTag::Torus {
        return domain_err("growth ratios are a line-lattice probe");
    }
    let rep = validate_regime(p, tag);
    if !rep.pass {
        return Err(Error::Regime(rep.violations));
    }
    if !(t_obs >= 0.0) {
        return domain_err("T_obs must be nonnegative");
    }
    let mut state = build_line_datum(p, 1)?;
    let denom = state.hs_norm();
    if !(denom > 0.0) {
        return domain_err("datum norm vanished");
    }
    if t_obs == 0.0 {
        return Ok(1.0);
    }
    if n_steps == 0 {
        return domain_err("n_steps must be positive for T_obs > 0");
    }
    let dt = t_obs / n_steps as f64;
    for _ in 0..n_steps {
        state = step(&state, dt)?;
    }
    tail_guard(&state)?;
    Ok(state.hs_norm() / denom)
}

/// Which side of β = max((α-1)/2, 0) a sweep cell sits on.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum CellSide {
    Inflation,
    Wellposed,
    Boundary,
}

impl CellSide {
    pub fn as_str(self) -> &'static str {
        match self {
            CellSide::Inflation => "inflation",
            CellSide::Wellposed => "wellposed",
            CellSide::Boundary => "boundary",
        }
    }
}

/// One row of the phase-diagram table: a cell repeats its fitted
/// exponent on each of its N rows.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepCellRow {
    pub alpha: f64,
    pub beta: f64,
    pub side: CellSide,
    pub n: u32,
    pub t_obs: f64,
    pub ratio: Option<f64>,
    pub growth_exponent: Option<f64>,
    pub flag: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepOptions {
    pub inflation_ns: Vec<u32>,
    pub wellposed_ns: Vec<u32>,
    pub steps: usize,
}

impl Default for SweepOptions {
    fn default() -> Self {
        SweepOptions {
            inflation_ns: vec![8, 16],
            wellposed_ns: vec![8, 16, 32],
            steps: 256,
        }
    }
}

fn fit_slope(points: &[(f64, f64)]) -> Option<f64> {
    if points.len() < 2 {
        return None;
    }
    let n = points.len() as f64;
    let xbar = points.iter().map(|p| p.0).sum::<f64>() / n;
    let ybar = points.iter().map(|p| p.1).sum::<f64>() / n;
    let mut num = 0.0;
    let mut den = 0.0;
    for (x, y) in points {
        num += (x - xbar) * (y - ybar);
        den += (x - xbar) * (x - xbar);
    }
    if den == 0.0 {
        return None;
    }
    Some(num / den)
}

const BOUNDARY_TOL: f64 = 1e-9;

fn err_flag(e: &Error) -> String {
    match e {
        Error::Truncation { t } => format!("truncated@{t:.3e}"),
        Error::Resource { what, .. } => format!("resource: {what}"),
        Error::Regime(v) => format!(
            "regime: {}",
            v.first().map(|x| x.name).unwrap_or("unknown")
        ),
        Error::Domain(msg) => format!("domain: {msg}"),
    }
}

/// Growth-ratio probe over a grid of (α, β) cells. Inflation-side cells
/// run at θ = choose_theta and the smaller N list; dispersive-side and
/// boundary cells run at the probe lattice θ = 1. Per-cell failures
/// become row flags and the sweep continues.
pub fn phase_diagram_sweep(
    points: &[(f64, f64)],
    template: &ExperimentParams,
    opts: &SweepOptions,
) -> Vec<SweepCellRow> {
    let mut rows = Vec::new();
    for &(alpha, beta) in points {
        let floor = ((alpha - 1.0) / 2.0).max(0.0);
        let side = if (beta - floor).abs() <= BOUNDARY_TOL {
            CellSide::Boundary
        } else if beta > floor {
            CellSide::Inflation
        } else {
            CellSide::Wellposed
        };
        let (tag, theta_res, ns) = match side {
            CellSide::Inflation => (
                RegimeTag::InflationLine,
                choose_theta(alpha, beta),
                &opts.inflation_ns,
            ),
            _ => (RegimeTag::WellposedLine, Ok(1.0), &opts.wellposed_ns),
        };
        let theta = match theta_res {
            Ok(th) => th,
            Err(e) => {
                rows.push(SweepCellRow {
                    alpha,
                    beta,
                    side,
                    n: 0,
                    t_obs: template.t_final,
                    ratio: None,
                    growth_exponent: None,
                    flag: err_flag(&e),
                });
                continue;
            }
        };
        let mut cell: Vec<(u32, Result<f64>)> = Vec::new();
        for &n in ns {
            let p = ExperimentParams {
                alpha,
                beta,
                n,
                theta,
                ..*template
            };
            cell.push((n, growth_ratio(&p, tag, template.t_final, opts.steps)));
        }
        let fit: Vec<(f64, f64)> = cell
            .iter()
            .filter_map(|(n, r)| r.as_ref().ok().map(|v| ((*n as f64).ln(), v.ln())))
            .collect();
        let exponent = fit_slope(&fit);
        for (n, res) in cell {
            let (ratio, flag) = match res {
                Ok(v) => (Some(v), String::new()),
                Err(e) => (None, err_flag(&e)),
            };
            rows.push(SweepCellRow {
                alpha,
                beta,
                side,
                n,
                t_obs: template.t_final,
                ratio,
                growth_exponent: exponent,
                flag,
            });
        }
    }
    rows
}

#[cfg(test)]
mod tests {
    use super::*;

    fn torus_params(n: u32) -> ExperimentParams {
        ExperimentParams {
            alpha: 2.0,
            beta: 1.0,
            s: 0.0,
            sigma: 0.0,
            eps: 0.1,
            n,
            theta: 1.0,
            k: 2,
            t_final: 0.1,
        }
    }

    fn sweep_template() -> ExperimentParams {
        ExperimentParams {
            alpha: 2.0,
            beta: 1.0,
            s: 2.0,
            sigma: 0.0,
            eps: 0.25,
            n: 8,
            theta: 1.5,
            k: 2,
            t_final: 0.5,
        }
    }

    fn manual_state(modes: Vec<Complex64>, delta: f64) -> SpectralState {
        SpectralState {
            params: torus_params(8),
            delta,
            t: 0.0,
            modes,
        }
    }

    #[test]
    fn linear_flow_conserves_every_modulus() {
        let mut modes = vec![Complex64::new(0.0, 0.0); 16];
        modes[1] = Complex64::new(0.3, -0.2);
        modes[4] = Complex64::new(-0.1, 0.7);
        modes[9] = Complex64::new(0.05, 0.05);
        let st = manual_state(modes, 0.7);
        let next = step_impl(&st, 0.013, false).unwrap();
        for (before, after) in st.modes.iter().zip(&next.modes) {
            assert!((before.norm() - after.norm()).abs() <= 1e-15 * before.norm().max(1.0));
        }
    }

    #[test]
    fn first_feed_rate_matches_closed_form() {
        let a = Complex64::new(0.3, 0.1);
        let delta = 0.5;
        let mut modes = vec![Complex64::new(0.0, 0.0); 16];
        modes[1] = a;
        let mut st = manual_state(modes, delta);
        let t = 1e-6;
        st = step(&st, t).unwrap();
        let rate = st.modes[2].norm() / t;
        let expect = a.norm_sqr() * delta.powf(st.params.beta);
        assert!(
            (rate - expect).abs() <= 1e-6 * expect,
            "rate {rate} vs {expect}"
        );
    }

    #[test]
    fn zero_mode_is_frozen() {
        let p = torus_params(8);
        let mut st = build_torus_datum(&p, 64).unwrap();
        let c0 = st.modes[0];
        for _ in 0..10 {
            st = step(&st, 0.01).unwrap();
        }
        assert_eq!(st.modes[0], c0);
    }

    #[test]
    fn tracks_cascade_closed_form_on_coarse_lattice() {
        let p = torus_params(8);
        let mut st = build_torus_datum(&p, 64).unwrap();
        let steps = 256;
        let dt = 0.1 / steps as f64;
        for _ in 0..steps {
            st = step(&st, dt).unwrap();
        }
        let exact = crate::torus::cascade_closed_form_first_mode(&p, 0.1).unwrap();
        assert!(
            (st.modes[1] - exact).norm() <= 1e-8 * exact.norm(),
            "lattice {} vs closed form {}",
            st.modes[1],
            exact
        );
    }

    #[test]
    fn halving_dt_cuts_error_sixteenfold() {
        let p = torus_params(8);
        let exact = crate::torus::cascade_closed_form_first_mode(&p, 0.1).unwrap();
        let run = |steps: usize| -> f64 {
            let mut st = build_torus_datum(&p, 64).unwrap();
            let dt = 0.1 / steps as f64;
            for _ in 0..steps {
                st = step(&st, dt).unwrap();
            }
            (st.modes[1] - exact).norm()
        };
        let coarse = run(4);
        let fine = run(8);
        let factor = coarse / fine;
        assert!(
            (10.0..=24.0).contains(&factor),
            "order-four contraction expected, got {factor}"
        );
    }

    #[test]
    fn edge_energy_fails_with_timestamp() {
        let mut modes = vec![Complex64::new(0.0, 0.0); 32];
        modes[1] = Complex64::new(1.0, 0.0);
        modes[25] = Complex64::new(1e-4, 0.0);
        let mut st = manual_state(modes, 0.5);
        st.t = 0.75;
        match step(&st, 0.01) {
            Err(Error::Truncation { t }) => assert_eq!(t, 0.75),
            other => panic!("expected truncation, got {other:?}"),
        }
    }

    #[test]
    fn faint_edge_mass_is_dealiased_away() {
        let mut modes = vec![Complex64::new(0.0, 0.0); 32];
        modes[1] = Complex64::new(1.0, 0.0);
        modes[28] = Complex64::new(1e-12, 0.0);
        let st = manual_state(modes, 0.5);
        let next = step(&st, 0.01).unwrap();
        let cut = next.dealias_cut();
        for c in &next.modes[cut + 1..] {
            assert_eq!(*c, Complex64::new(0.0, 0.0));
        }
    }

    #[test]
    fn ratio_is_one_at_zero_time() {
        let mut p = sweep_template();
        p.n = 8;
        let r = growth_ratio(&p, RegimeTag::InflationLine, 0.0, 128).unwrap();
        assert_eq!(r, 1.0);
    }

    #[test]
    fn no_derivative_case_stays_bounded() {
        let mut p = sweep_template();
        p.beta = 0.0;
        p.s = 1.0;
        p.theta = 1.0;
        p.n = 8;
        let r = growth_ratio(&p, RegimeTag::WellposedLine, 0.5, 128).unwrap();
        assert!(r <= 2.0, "subcritical ratio {r}");
        assert!(r > 0.5);
    }

    #[test]
    fn inflation_ratio_grows_with_n() {
        let mut p8 = sweep_template();
        p8.n = 8;
        let mut p16 = sweep_template();
        p16.n = 16;
        let r8 = growth_ratio(&p8, RegimeTag::InflationLine, 0.5, 128).unwrap();
        let r16 = growth_ratio(&p16, RegimeTag::InflationLine, 0.5, 128).unwrap();
        assert!(r8 > 1.0, "expected growth at N = 8, got {r8}");
        assert!(
            r16 > r8,
            "expected N-growth in the inflation regime: {r8} vs {r16}"
        );
    }

    #[test]
    fn ratios_are_bit_deterministic() {
        let mut p = sweep_template();
        p.n = 8;
        let a = growth_ratio(&p, RegimeTag::InflationLine, 0.3, 64).unwrap();
        let b = growth_ratio(&p, RegimeTag::InflationLine, 0.3, 64).unwrap();
        assert_eq!(a.to_bits(), b.to_bits());
    }

    #[test]
    fn boundary_cell_is_flagged_not_classified() {
        let template = sweep_template();
        let opts = SweepOptions {
            inflation_ns: vec![8, 16],
            wellposed_ns: vec![8, 16],
            steps: 64,
        };
        let rows = phase_diagram_sweep(&[(3.0, 1.0)], &template, &opts);
        assert_eq!(rows.len(), 2);
        for row in &rows {
            assert_eq!(row.side, CellSide::Boundary);
            assert!(row.ratio.is_some());
        }
        assert!(rows[0].growth_exponent.is_some());
    }

    #[test]
    fn oversized_cell_flags_and_sweep_continues() {
        let template = sweep_template();
        let opts = SweepOptions {
            inflation_ns: vec![8],
            wellposed_ns: vec![8],
            steps: 16,
        };
        // (4, 2) is inflation-side with theta = 3.5: the lattice blows the
        // mode cap and the row must say so; the next cell still runs.
        let rows = phase_diagram_sweep(&[(4.0, 2.0), (4.0, 1.0)], &template, &opts);
        assert_eq!(rows.len(), 2);
        assert_eq!(rows[0].side, CellSide::Inflation);
        assert!(rows[0].ratio.is_none());
        assert!(rows[0].flag.starts_with("resource"));
        assert_eq!(rows[1].side, CellSide::Wellposed);
        assert!(rows[1].ratio.is_some());
    }
}
