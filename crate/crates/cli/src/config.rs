use std::path::Path;

use fnls_core::params::{
    choose_k, choose_theta, choose_time_torus, ExperimentParams, RegimeTag,
};
use serde::Deserialize;

use crate::error::{from_core, CmdError};

/// Flat JSON config; every field optional, flags override file values.
#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FileConfig {
    pub alpha: Option<f64>,
    pub beta: Option<f64>,
    pub s: Option<f64>,
    pub sigma: Option<f64>,
    pub eps: Option<f64>,
    #[serde(rename = "N")]
    pub n: Option<u32>,
    pub theta: Option<f64>,
    pub k: Option<u32>,
    #[serde(rename = "T")]
    pub t: Option<f64>,
    pub regime_tag: Option<String>,
}

/// Values taken from command-line flags.
#[derive(Debug, Default, Clone, Copy)]
pub struct Overrides {
    pub alpha: Option<f64>,
    pub beta: Option<f64>,
    pub s: Option<f64>,
    pub sigma: Option<f64>,
    pub eps: Option<f64>,
    pub n: Option<u32>,
    pub theta: Option<f64>,
    pub k: Option<u32>,
    pub t: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Kind {
    Torus,
    Line,
    Sweep,
}

#[derive(Debug, Clone, Copy)]
pub struct Resolved {
    pub p: ExperimentParams,
    /// N came from the user (file or flag), not the default.
    pub n_explicit: bool,
    /// T came from the user; otherwise each run derives its own.
    pub t_explicit: bool,
}

fn load_file(path: &Path) -> Result<FileConfig, CmdError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CmdError::Config(format!("cannot read {}: {e}", path.display())))?;
    serde_json::from_str(&text)
        .map_err(|e| CmdError::Config(format!("cannot parse {}: {e}", path.display())))
}

/// defaults <- config file <- flags, then derive anything still missing.
pub fn resolve(kind: Kind, config: Option<&Path>, ov: &Overrides) -> Result<Resolved, CmdError> {
    let file = match config {
        Some(path) => load_file(path)?,
        None => FileConfig::default(),
    };
    if let Some(tag) = &file.regime_tag {
        RegimeTag::parse(tag).map_err(from_core)?;
    }
    // The sweep template defaults differ: its dispersive-side cells need
    // s above the gauge floor, and its horizon is an observation window
    // rather than a proof-scale time.
    let (d_s, d_eps, d_t) = match kind {
        Kind::Sweep => (2.0, 0.25, Some(0.5)),
        _ => (0.0, 0.1, None),
    };
    let alpha = ov.alpha.or(file.alpha).unwrap_or(2.0);
    let beta = ov.beta.or(file.beta).unwrap_or(1.0);
    let s = ov.s.or(file.s).unwrap_or(d_s);
    let sigma = ov.sigma.or(file.sigma).unwrap_or(0.0);
    let eps = ov.eps.or(file.eps).unwrap_or(d_eps);
    let n = ov.n.or(file.n).unwrap_or(16);
    let n_explicit = ov.n.or(file.n).is_some();

    let theta = match ov.theta.or(file.theta) {
        Some(th) => th,
        None => match kind {
            Kind::Line => choose_theta(alpha, beta).map_err(from_core)?,
            // Unused by the torus flow; the sweep picks per cell.
            _ => 1.0,
        },
    };
    let k = match ov.k.or(file.k) {
        Some(k) => k,
        None => match kind {
            Kind::Line => choose_k(s, sigma, beta, theta).map_err(from_core)?,
            _ => 2,
        },
    };
    let user_t = ov.t.or(file.t).or(d_t);
    let t_explicit = ov.t.or(file.t).is_some();
    let t_final = match user_t {
        Some(t) => t,
        None => match kind {
            Kind::Torus => choose_time_torus(n, s, sigma, beta).map_err(from_core)?,
            // Placeholder: line runs derive T per N.
            _ => 1.0,
        },
    };

    if eps >= 0.5 {
        eprintln!(
            "warning: eps = {eps} is not small; the threshold inequalities lose their meaning"
        );
    }

    Ok(Resolved {
        p: ExperimentParams {
            alpha,
            beta,
            s,
            sigma,
            eps,
            n,
            theta,
            k,
            t_final,
        },
        n_explicit,
        t_explicit,
    })
}

/// "a,b;a,b" pairs for the sweep grid.
pub fn parse_cells(spec: &str) -> Result<Vec<(f64, f64)>, CmdError> {
    let mut cells = Vec::new();
    for chunk in spec.split(';') {
        let chunk = chunk.trim();
        if chunk.is_empty() {
            continue;
        }
        let parts: Vec<&str> = chunk.split(',').map(str::trim).collect();
        if parts.len() != 2 {
            return Err(CmdError::Config(format!(
                "cell '{chunk}' must be 'alpha,beta'"
            )));
        }
        let alpha: f64 = parts[0]
            .parse()
            .map_err(|e| CmdError::Config(format!("alpha in '{chunk}': {e}")))?;
        let beta: f64 = parts[1]
            .parse()
            .map_err(|e| CmdError::Config(format!("beta in '{chunk}': {e}")))?;
        cells.push((alpha, beta));
    }
    if cells.is_empty() {
        return Err(CmdError::Config(String::from("the sweep grid is empty")));
    }
    Ok(cells)
}
