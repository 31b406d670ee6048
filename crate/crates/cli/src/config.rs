//! Run configuration: TOML on input, canonical JSON for hashing and for
//! embedding in results.

use std::f64::consts::TAU;
use std::path::{Path, PathBuf};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use squeezecool::cooling::Objective;
use squeezecool::fullmodel::FullModelParams;
use squeezecool::model::optimal_detuning;
use squeezecool::{make_bath, ReducedParams, Scheme, SearchSpec};

use crate::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "all_schemes")]
    pub schemes: Vec<Scheme>,
    /// Divide spectra and rates by `4 G^2 / kappa`.
    #[serde(default = "yes")]
    pub normalized: bool,
    /// Replace the injected squeezing by the Stokes-suppressing bath (ES,
    /// ESIS) and put IS at its Stokes-free intracavity squeezing.
    #[serde(default)]
    pub suppress: bool,
    #[serde(default = "min_phonons")]
    pub objective: Objective,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub model: Option<ModelConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub full_model: Option<FullModelConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub grid: Option<GridConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sweep: Option<SweepConfig>,
    #[serde(default)]
    pub search: SearchSpec,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output: Option<OutputConfig>,
}

fn all_schemes() -> Vec<Scheme> {
    Scheme::ALL.to_vec()
}

fn yes() -> bool {
    true
}

fn min_phonons() -> Objective {
    Objective::MinPhonons
}

fn one() -> f64 {
    1.0
}

fn default_gamma() -> f64 {
    1e-5
}

fn default_n_th() -> f64 {
    1e3
}

/// Effective single-cavity parameters. Either `kappa` or `kappa_over_4wm`
/// sets the dissipation; `delta` defaults to `sqrt(omega_m^2 + kappa^2/4)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub kappa_over_4wm: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub kappa: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub delta: Option<f64>,
    #[serde(default = "one")]
    pub omega_m: f64,
    #[serde(default = "default_gamma")]
    pub gamma: f64,
    #[serde(default = "one")]
    pub g_coupling: f64,
    #[serde(default)]
    pub eps_mag: f64,
    #[serde(default)]
    pub eps_phase: f64,
    #[serde(default)]
    pub r_s: f64,
    #[serde(default)]
    pub phi_s: f64,
    #[serde(default = "default_n_th")]
    pub n_th: f64,
    /// Intrinsic cavity loss; only zero is supported.
    #[serde(default)]
    pub kappa0: f64,
}

/// Two-mode (fundamental + pump) parameters. Complex numbers are written
/// `[re, im]`. Both modes see the same squeezed bath.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FullModelConfig {
    #[serde(default = "one")]
    pub omega_m: f64,
    #[serde(default = "default_gamma")]
    pub gamma: f64,
    #[serde(default = "default_n_th")]
    pub n_th: f64,
    pub delta_s: f64,
    pub delta_p: f64,
    pub kappa_s: f64,
    pub kappa_p: f64,
    pub g_s: f64,
    pub g_p: f64,
    pub eps0: [f64; 2],
    pub drive_s: [f64; 2],
    pub drive_p: [f64; 2],
    #[serde(default)]
    pub r_s: f64,
    #[serde(default)]
    pub phi_s: f64,
    #[serde(default)]
    pub kappa0: f64,
}

/// Frequency grid in units of `omega_m`: explicit `values`, or `points`
/// evenly spaced samples from `omega_min` to `omega_max`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub values: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub omega_min: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub omega_max: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub points: Option<usize>,
}

/// Sweep over `kappa / 4 omega_m`: explicit `values`, or `points`
/// logarithmically spaced samples from `q_min` to `q_max`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub values: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub q_min: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub q_max: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub points: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub path: Option<PathBuf>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub format: Option<Format>,
}

fn config_error(msg: impl Into<String>) -> CliError {
    CliError::Config(msg.into())
}

fn complex(v: [f64; 2]) -> Complex64 {
    Complex64::new(v[0], v[1])
}

/// Reads a TOML config, or a JSON result document previously written by this
/// tool (its embedded `config` is used).
pub fn load(path: &Path) -> Result<RunConfig, CliError> {
    let text =
        std::fs::read_to_string(path).map_err(|e| config_error(format!("cannot read {}: {e}", path.display())))?;
    let config = if text.trim_start().starts_with('{') {
        let doc: serde_json::Value =
            serde_json::from_str(&text).map_err(|e| config_error(format!("{}: {e}", path.display())))?;
        let embedded = doc
            .get("config")
            .cloned()
            .ok_or_else(|| config_error(format!("{}: JSON document has no `config`", path.display())))?;
        serde_json::from_value(embedded).map_err(|e| config_error(format!("{}: {e}", path.display())))?
    } else {
        toml::from_str(&text).map_err(|e| config_error(format!("{}: {e}", path.display())))?
    };
    Ok(config)
}

impl RunConfig {
    pub fn validate(&self) -> Result<(), CliError> {
        match (&self.model, &self.full_model) {
            (Some(_), Some(_)) => return Err(config_error("give either [model] or [full_model], not both")),
            (None, None) => return Err(config_error("missing [model] or [full_model]")),
            _ => {}
        }
        if self.schemes.is_empty() {
            return Err(config_error("`schemes` is empty"));
        }
        if let Some(m) = &self.model {
            if m.kappa0 != 0.0 {
                return Err(config_error("kappa0 must be 0: intrinsic cavity loss is not modelled"));
            }
            if m.kappa.is_some() && m.kappa_over_4wm.is_some() {
                return Err(config_error("give either kappa or kappa_over_4wm, not both"));
            }
        }
        if let Some(f) = &self.full_model {
            if f.kappa0 != 0.0 {
                return Err(config_error("kappa0 must be 0: intrinsic cavity loss is not modelled"));
            }
        }
        self.search.validate().map_err(|e| config_error(e.to_string()))
    }

    /// The configuration as embedded in results and hashed: the seed
    /// resolved into the search block, and no output destination.
    pub fn canonical(&self) -> RunConfig {
        let mut c = self.clone();
        c.search.seed = c.seed;
        c.output = None;
        c
    }

    pub fn hash(&self) -> String {
        let json = serde_json::to_string(&self.canonical()).expect("config serializes");
        format!("{:x}", Sha256::digest(json.as_bytes()))
    }

    pub fn search_spec(&self) -> SearchSpec {
        SearchSpec {
            seed: self.seed,
            ..self.search
        }
    }

    pub fn full_model_params(&self) -> Result<Option<FullModelParams>, CliError> {
        let Some(f) = &self.full_model else {
            return Ok(None);
        };
        let full = FullModelParams {
            omega_m: f.omega_m,
            gamma: f.gamma,
            n_th: f.n_th,
            delta_s: f.delta_s,
            delta_p: f.delta_p,
            kappa_s: f.kappa_s,
            kappa_p: f.kappa_p,
            g_s: f.g_s,
            g_p: f.g_p,
            eps0: complex(f.eps0),
            drive_s: complex(f.drive_s),
            drive_p: complex(f.drive_p),
            bath: make_bath(f.r_s, f.phi_s).map_err(|e| config_error(e.to_string()))?,
        };
        full.validate().map_err(|e| config_error(e.to_string()))?;
        Ok(Some(full))
    }

    /// Reduced parameters of a `[model]` block. `kappa` may be left out only
    /// when `allow_missing_kappa` (sweeps set it per point).
    pub fn reduced_params(&self, allow_missing_kappa: bool) -> Result<ReducedParams, CliError> {
        let m = self
            .model
            .as_ref()
            .ok_or_else(|| config_error("this command needs a [model] block"))?;
        let kappa = match (m.kappa, m.kappa_over_4wm) {
            (Some(k), None) => k,
            (None, Some(q)) => 4.0 * q * m.omega_m,
            (None, None) if allow_missing_kappa => 4.0 * m.omega_m,
            _ => return Err(config_error("[model] needs kappa or kappa_over_4wm")),
        };
        let p = ReducedParams {
            delta: m.delta.unwrap_or_else(|| optimal_detuning(kappa, m.omega_m)),
            kappa,
            omega_m: m.omega_m,
            gamma: m.gamma,
            g_coupling: m.g_coupling,
            eps_mag: m.eps_mag,
            eps_phase: m.eps_phase.rem_euclid(TAU),
            bath: make_bath(m.r_s, m.phi_s).map_err(|e| config_error(e.to_string()))?,
            n_th: m.n_th,
        };
        p.validate().map_err(|e| config_error(e.to_string()))?;
        Ok(p)
    }

    pub fn omega_grid(&self) -> Result<Vec<f64>, CliError> {
        let g = self
            .grid
            .as_ref()
            .ok_or_else(|| config_error("this command needs a [grid] block"))?;
        let values = match (&g.values, g.omega_min, g.omega_max, g.points) {
            (Some(v), None, None, None) => v.clone(),
            (None, Some(lo), Some(hi), Some(n)) => linspace(lo, hi, n),
            _ => {
                return Err(config_error(
                    "[grid] needs either `values` or omega_min, omega_max and points",
                ))
            }
        };
        if values.is_empty() {
            return Err(config_error("[grid] is empty"));
        }
        if values.iter().any(|w| !w.is_finite()) {
            return Err(config_error("[grid] has non-finite entries"));
        }
        Ok(values)
    }

    pub fn sweep_values(&self) -> Result<Vec<f64>, CliError> {
        let s = self
            .sweep
            .as_ref()
            .ok_or_else(|| config_error("this command needs a [sweep] block"))?;
        let values = match (&s.values, s.q_min, s.q_max, s.points) {
            (Some(v), None, None, None) => v.clone(),
            (None, Some(lo), Some(hi), Some(n)) if lo > 0.0 && hi > 0.0 => linspace(lo.log10(), hi.log10(), n)
                .into_iter()
                .map(|x| 10f64.powf(x))
                .collect(),
            _ => {
                return Err(config_error(
                    "[sweep] needs either `values` or positive q_min, q_max and points",
                ))
            }
        };
        if values.len() < 2 {
            return Err(config_error("[sweep] needs at least 2 points"));
        }
        if values.iter().any(|q| !(q.is_finite() && *q > 0.0)) {
            return Err(config_error("[sweep] values must be finite and > 0"));
        }
        Ok(values)
    }
}

fn linspace(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    match n {
        0 => Vec::new(),
        1 => vec![lo],
        _ => (0..n).map(|k| lo + (hi - lo) * k as f64 / (n - 1) as f64).collect(),
    }
}
