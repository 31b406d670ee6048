//! Subcommand bodies. Each returns the records to emit; formatting and exit
//! codes live in `main`.

use std::f64::consts::TAU;

use rayon::prelude::*;
use serde::Serialize;
use squeezecool::cooling::{maximize_rate, minimize_phonons, Objective, OptimizationResult};
use squeezecool::fullmodel::{
    adiabatic_report, classical_steady_state, extract_reduced, AdiabaticReport, ClassicalSteadyState, Reduction,
};
use squeezecool::gaussian::{steady_state, GaussianSteadyState};
use squeezecool::model::{apply_scheme, optimal_detuning};
use squeezecool::response::{
    rates, solve_suppression, spectrum, stokes_zero_eps, with_suppressing_bath, RateSet, SuppressionSolution,
};
use squeezecool::{Error, ReducedParams, Scheme};

use crate::config::RunConfig;
use crate::CliError;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SpectrumRow {
    pub omega_over_omega_m: f64,
    pub scheme: Scheme,
    pub s_ff: Option<f64>,
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepRow {
    pub kappa_over_4wm: f64,
    pub scheme: Scheme,
    pub gamma_minus: Option<f64>,
    pub gamma_plus: Option<f64>,
    pub gamma_opt_normalized: Option<f64>,
    pub n_f_rate_equation: Option<f64>,
    pub n_f_lyapunov: Option<f64>,
    pub g_opt: Option<f64>,
    pub eps_opt: Option<f64>,
    pub r_s: Option<f64>,
    pub phi_s: Option<f64>,
    pub gamma_tot: Option<f64>,
    pub stable: Option<bool>,
    pub evaluations: Option<usize>,
    pub error: Option<String>,
}

#[derive(Debug, Clone, Serialize)]
pub struct SchemeRecord<T> {
    pub scheme: Scheme,
    pub params: ReducedParams,
    #[serde(flatten)]
    pub result: T,
}

#[derive(Debug, Clone, Serialize)]
pub struct AdiabaticRecord {
    pub steady_state: ClassicalSteadyState,
    pub reduction: Reduction,
    pub report: AdiabaticReport,
}

/// Model parameters of the run: the `[model]` block, or the reduction of the
/// `[full_model]` block at its classical steady state.
pub fn base_params(config: &RunConfig) -> Result<ReducedParams, CliError> {
    match config.full_model_params()? {
        Some(full) => {
            let css = classical_steady_state(&full, None)?;
            Ok(extract_reduced(&full, &css)?.params)
        }
        None => config.reduced_params(false),
    }
}

/// Parameters seen by one scheme, with the Stokes-suppressing resources
/// applied when requested.
pub fn scheme_params(base: &ReducedParams, scheme: Scheme, suppress: bool) -> Result<ReducedParams, Error> {
    let p = apply_scheme(base, scheme);
    if !suppress {
        return Ok(p);
    }
    match scheme {
        Scheme::SB => Ok(p),
        Scheme::IS => {
            let eps = stokes_zero_eps(&p)?;
            Ok(p.with_eps(eps.norm(), eps.arg().rem_euclid(TAU)))
        }
        Scheme::ES | Scheme::ESIS => with_suppressing_bath(&p),
    }
}

pub fn cmd_spectrum(config: &RunConfig) -> Result<Vec<SpectrumRow>, CliError> {
    let grid = config.omega_grid()?;
    let base = base_params(config)?;
    let per_scheme = config
        .schemes
        .iter()
        .map(|&s| scheme_params(&base, s, config.suppress).map(|p| (s, p)))
        .collect::<Result<Vec<_>, _>>()?;
    let mut rows = Vec::with_capacity(grid.len() * per_scheme.len());
    for &w in &grid {
        for (scheme, p) in &per_scheme {
            let point = spectrum(w * p.omega_m, p, *scheme);
            let scale = if config.normalized { p.rate_scale() } else { 1.0 };
            rows.push(match point {
                Ok(pt) => SpectrumRow {
                    omega_over_omega_m: w,
                    scheme: *scheme,
                    s_ff: Some(pt.s_ff / scale),
                    error: None,
                },
                Err(e) => SpectrumRow {
                    omega_over_omega_m: w,
                    scheme: *scheme,
                    s_ff: None,
                    error: Some(e.to_string()),
                },
            });
        }
    }
    Ok(rows)
}

fn per_scheme<T>(
    config: &RunConfig,
    f: impl Fn(&ReducedParams, Scheme) -> Result<T, Error>,
) -> Result<Vec<SchemeRecord<T>>, CliError> {
    let base = base_params(config)?;
    config
        .schemes
        .iter()
        .map(|&scheme| {
            let params = scheme_params(&base, scheme, config.suppress)?;
            let result = f(&params, scheme)?;
            Ok(SchemeRecord { scheme, params, result })
        })
        .collect()
}

pub fn cmd_rates(config: &RunConfig) -> Result<Vec<SchemeRecord<RateSet>>, CliError> {
    per_scheme(config, |p, s| rates(p, s, config.normalized))
}

pub fn cmd_suppress(config: &RunConfig) -> Result<Vec<SchemeRecord<SuppressionSolution>>, CliError> {
    let base = base_params(config)?;
    config
        .schemes
        .iter()
        .map(|&scheme| {
            let params = apply_scheme(&base, scheme);
            let result = solve_suppression(&params)?;
            if !result.feasible {
                return Err(Error::InfeasibleSuppression {
                    rhs_modulus: result.rhs_modulus,
                }
                .into());
            }
            Ok(SchemeRecord { scheme, params, result })
        })
        .collect()
}

pub fn cmd_steady(config: &RunConfig) -> Result<Vec<SchemeRecord<GaussianSteadyState>>, CliError> {
    per_scheme(config, |p, _| steady_state(p))
}

fn optimize(
    base: &ReducedParams,
    scheme: Scheme,
    config: &RunConfig,
    objective: Objective,
) -> Result<OptimizationResult, Error> {
    let spec = config.search_spec();
    match objective {
        Objective::MinPhonons => minimize_phonons(base, scheme, &spec),
        Objective::MaxRate => maximize_rate(base, scheme, &spec),
    }
}

pub fn cmd_optimize(config: &RunConfig) -> Result<Vec<OptimizationResult>, CliError> {
    let base = base_params(config)?;
    config
        .schemes
        .iter()
        .map(|&s| optimize(&base, s, config, config.objective).map_err(CliError::from))
        .collect()
}

pub fn cmd_validate_adiabatic(config: &RunConfig) -> Result<AdiabaticRecord, CliError> {
    let full = config
        .full_model_params()?
        .ok_or_else(|| CliError::Config("validate-adiabatic needs a [full_model] block".into()))?;
    let steady_state = classical_steady_state(&full, None)?;
    let reduction = extract_reduced(&full, &steady_state)?;
    let report = adiabatic_report(&full, &steady_state)?;
    Ok(AdiabaticRecord {
        steady_state,
        reduction,
        report,
    })
}

fn sweep_row(base: &ReducedParams, q: f64, scheme: Scheme, config: &RunConfig) -> (SweepRow, Option<Error>) {
    let mut p = *base;
    p.kappa = 4.0 * q * p.omega_m;
    p.delta = optimal_detuning(p.kappa, p.omega_m);
    let outcome = optimize(&p, scheme, config, Objective::MaxRate)
        .and_then(|rate| optimize(&p, scheme, config, Objective::MinPhonons).map(|n| (rate, n)));
    match outcome {
        Ok((rate, n)) => (
            SweepRow {
                kappa_over_4wm: q,
                scheme,
                gamma_minus: Some(rate.gamma_minus_normalized),
                gamma_plus: Some(rate.gamma_plus_normalized),
                gamma_opt_normalized: Some(rate.gamma_opt_normalized),
                n_f_rate_equation: n.n_f_rate_equation,
                n_f_lyapunov: n.n_f_lyapunov,
                g_opt: Some(n.g_opt),
                eps_opt: Some(n.eps_opt),
                r_s: Some(n.r_s_opt),
                phi_s: Some(n.phi_s_opt),
                gamma_tot: Some(n.gamma_tot),
                stable: Some(rate.stable && n.stable),
                evaluations: Some(rate.evaluations + n.evaluations),
                error: None,
            },
            None,
        ),
        Err(e) => (
            SweepRow {
                kappa_over_4wm: q,
                scheme,
                gamma_minus: None,
                gamma_plus: None,
                gamma_opt_normalized: None,
                n_f_rate_equation: None,
                n_f_lyapunov: None,
                g_opt: None,
                eps_opt: None,
                r_s: None,
                phi_s: None,
                gamma_tot: None,
                stable: None,
                evaluations: None,
                error: Some(e.to_string()),
            },
            Some(e),
        ),
    }
}

/// Sweep rows in order of `kappa/4 omega_m`, then scheme, plus the errors of
/// the failed rows.
pub fn cmd_sweep(config: &RunConfig) -> Result<(Vec<SweepRow>, Vec<Error>), CliError> {
    if config.full_model.is_some() {
        return Err(CliError::Config("sweep needs a [model] block".into()));
    }
    let mut qs = config.sweep_values()?;
    qs.sort_by(f64::total_cmp);
    let base = config.reduced_params(true)?;
    let mut schemes = config.schemes.clone();
    schemes.sort();
    schemes.dedup();
    let points: Vec<(f64, Scheme)> = qs.iter().flat_map(|&q| schemes.iter().map(move |&s| (q, s))).collect();
    let results: Vec<(SweepRow, Option<Error>)> = points
        .par_iter()
        .map(|&(q, s)| sweep_row(&base, q, s, config))
        .collect();
    let errors = results.iter().filter_map(|(_, e)| e.clone()).collect();
    Ok((results.into_iter().map(|(r, _)| r).collect(), errors))
}
