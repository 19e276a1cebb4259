//! The invariant battery behind `fnls checks`: every analytic statement
//! the library encodes, exercised at small fixed parameters. Each check
//! runs to completion and reports pass/fail; unexpected errors fail the
//! check rather than the process, so the report is always complete.

use fnls_core::line::{
    evaluate_offgrid, iterate_full, iterate_low, leading_term_deviation, low_band_majorant_check,
    support_uk, IterOptions,
};
use fnls_core::params::ExperimentParams;
use fnls_core::piecewise::PiecewisePoly;
use fnls_core::recurrence::{catalan_majorant_check, check_factorial_bound, compute_ak};
use fnls_core::torus::{cascade_closed_form_first_mode, inflation_experiment_torus, ode_oracle};
use fnls_core::xspace::{
    check_hs_embedding, multiplier_invariance, Atom, Density, HalfLineMeasure,
};
use fnls_core::Complex64;
use serde::Serialize;

#[derive(Debug, Serialize)]
pub struct CheckOutcome {
    pub name: &'static str,
    pub pass: bool,
    pub detail: String,
}

#[derive(Debug, Serialize)]
pub struct CheckReport {
    pub pass: bool,
    pub checks: Vec<CheckOutcome>,
}

fn line_params() -> ExperimentParams {
    ExperimentParams {
        alpha: 2.0,
        beta: 1.0,
        s: 0.0,
        sigma: 0.0,
        eps: 0.1,
        n: 8,
        theta: 1.5,
        k: 3,
        t_final: 1.0 / 8.0f64.ln(),
    }
}

fn run(body: impl FnOnce() -> Result<(bool, String), fnls_core::Error>) -> (bool, String) {
    match body() {
        Ok(pair) => pair,
        Err(e) => (false, format!("errored: {e}")),
    }
}

fn majorant_split_consistency(corrupt_ak: bool) -> (bool, String) {
    run(|| {
        let mut seq = compute_ak(1.0, 40)?;
        if corrupt_ak {
            seq.values[1] *= 1.01;
        }
        let mut worst = 0.0f64;
        for (v, lv) in seq.values.iter().zip(&seq.ln_values) {
            if v.is_finite() {
                worst = worst.max((v - lv.exp()).abs() / v.abs().max(f64::MIN_POSITIVE));
            }
        }
        Ok((
            worst <= 1e-9,
            format!("worst relative gap between the two evaluations: {worst:.3e}"),
        ))
    })
}

fn majorant_factorial_bound() -> (bool, String) {
    run(|| {
        let mut pass = true;
        let mut worst = 0.0f64;
        for beta in [0.5, 1.0, 2.0] {
            let rep = check_factorial_bound(&compute_ak(beta, 40)?)?;
            pass &= rep.pass;
            for row in &rep.rows {
                worst = worst.max(row.ratio);
            }
        }
        Ok((pass, format!("worst value/bound ratio: {worst:.3e}")))
    })
}

fn majorant_catalan_envelope() -> (bool, String) {
    run(|| {
        let rep = catalan_majorant_check(1.0, 1.0, 20)?;
        Ok((
            rep.pass,
            format!("worst ratio at k = {}", rep.worst_k),
        ))
    })
}

fn support_bands() -> (bool, String) {
    run(|| {
        let p = line_params();
        let opts = IterOptions {
            m: 16,
            time_nodes: 33,
            max_j2: None,
        };
        let fam = iterate_full(&p, 3, &opts)?;
        let mut pass = true;
        let mut detail = String::from("off-support probes all vanished");
        for k in 1..=3u32 {
            let sup = support_uk(k, &p)?;
            let t_idx = fam.profile(k).times.len() - 1;
            let mut probes = vec![sup[0].0 * 0.5, sup[sup.len() - 1].1 + 1.0];
            for w in sup.windows(2) {
                probes.push(0.5 * (w[0].1 + w[1].0));
            }
            for xi in probes {
                let v = evaluate_offgrid(&fam, &p, k, xi, t_idx)?;
                if v != Complex64::new(0.0, 0.0) {
                    pass = false;
                    detail = format!("iterate {k} leaks {:.3e} at xi = {xi:.6}", v.norm());
                }
            }
            let inside = 0.5 * (sup[0].0 + sup[0].1);
            let v = evaluate_offgrid(&fam, &p, k, inside, t_idx)?;
            if v.norm() <= 0.0 {
                pass = false;
                detail = format!("iterate {k} vanishes inside its support at xi = {inside:.6}");
            }
        }
        Ok((pass, detail))
    })
}

fn low_band_envelope() -> (bool, String) {
    run(|| {
        let p = line_params();
        let opts = IterOptions {
            m: 16,
            time_nodes: 33,
            max_j2: None,
        };
        let fam = iterate_low(&p, 3, &opts)?;
        let rep = low_band_majorant_check(&p, &fam)?;
        Ok((
            rep.violations == 0,
            format!(
                "{} nodes checked, {} violations, max ratio {:.6}",
                rep.checked, rep.violations, rep.max_ratio
            ),
        ))
    })
}

fn leading_term_alignment() -> (bool, String) {
    run(|| {
        let mut p = line_params();
        p.k = 2;
        p.t_final = 1e-4;
        let opts = IterOptions {
            m: 32,
            time_nodes: 33,
            max_j2: Some(1),
        };
        let dev = leading_term_deviation(&p, 2, &opts)?;
        Ok((
            dev < 0.05,
            format!("relative band deviation at depth 2: {dev:.3e}"),
        ))
    })
}

fn gauge_embedding() -> (bool, String) {
    run(|| {
        let density = PiecewisePoly::indicator(0.0, 1.0)?.scale(0.4);
        let f = HalfLineMeasure::new(Vec::new(), Density::Poly(density))?;
        let rep = check_hs_embedding(&f, 1.0)?;
        Ok((
            rep.pass,
            format!(
                "rho-global {:.6e} vs Sobolev comparison {:.6e}",
                rep.rho_global, rep.hs_norm
            ),
        ))
    })
}

fn multiplier_modulus() -> (bool, String) {
    run(|| {
        let density = PiecewisePoly::indicator(0.0, 1.0)?.scale(0.5);
        let f = HalfLineMeasure::new(
            vec![
                Atom {
                    location: 0.5,
                    weight: Complex64::new(0.3, 0.1),
                },
                Atom {
                    location: 1.25,
                    weight: Complex64::new(-0.2, 0.0),
                },
            ],
            Density::Poly(density),
        )?;
        let rep = multiplier_invariance(&f, 2.0, 0.7);
        Ok((
            rep.pass,
            format!("max profile discrepancy {:.3e}", rep.max_discrepancy),
        ))
    })
}

fn cascade_oracle() -> (bool, String) {
    run(|| {
        let p = ExperimentParams {
            alpha: 2.0,
            beta: 1.0,
            s: 0.0,
            sigma: 0.0,
            eps: 0.1,
            n: 8,
            theta: 1.0,
            k: 2,
            t_final: 0.2,
        };
        let traj = ode_oracle(&p, 3, 0.2)?;
        let exact = cascade_closed_form_first_mode(&p, 0.2)?;
        let got = traj.final_coeff(1);
        let rel = (got - exact).norm() / exact.norm();
        Ok((rel <= 1e-9, format!("first-mode relative error {rel:.3e}")))
    })
}

fn torus_growth_identity() -> (bool, String) {
    run(|| {
        let p = ExperimentParams {
            alpha: 2.0,
            beta: 1.0,
            s: 0.0,
            sigma: 0.0,
            eps: 0.1,
            n: 16,
            theta: 1.0,
            k: 2,
            t_final: 0.1,
        };
        let row = inflation_experiment_torus(&p)?;
        let rel = (row.growth - row.growth_identity).abs() / row.growth;
        Ok((
            rel <= 1e-12,
            format!("closed form vs algebraic identity: relative gap {rel:.3e}"),
        ))
    })
}

/// Run the whole battery. `corrupt_ak` injects a fault into the majorant
/// sequence so the failure path can be exercised end to end.
pub fn run_suite(corrupt_ak: bool) -> CheckReport {
    let mut checks = Vec::new();
    let mut push = |name: &'static str, (pass, detail): (bool, String)| {
        checks.push(CheckOutcome { name, pass, detail });
    };
    push(
        "majorant-split-consistency",
        majorant_split_consistency(corrupt_ak),
    );
    push("majorant-factorial-bound", majorant_factorial_bound());
    push("majorant-catalan-envelope", majorant_catalan_envelope());
    push("support-bands", support_bands());
    push("low-band-envelope", low_band_envelope());
    push("leading-term-alignment", leading_term_alignment());
    push("gauge-embedding", gauge_embedding());
    push("multiplier-modulus", multiplier_modulus());
    push("cascade-oracle", cascade_oracle());
    push("torus-growth-identity", torus_growth_identity());
    let pass = checks.iter().all(|c| c.pass);
    CheckReport { pass, checks }
}
