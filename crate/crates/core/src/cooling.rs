//! Final phonon numbers and the scheme-wise optimizers.
//!
//! Two cooling limits are available: the weak-coupling rate equation built
//! from the Stokes/anti-Stokes rates, and the exact Lyapunov steady state.
//! The optimizers search the scheme's free variables in unit-box
//! coordinates (log-scaled coupling, log-distance-to-threshold squeezing
//! strength, uniform phases) with multi-start Nelder-Mead.

use std::f64::consts::PI;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::gaussian::{self, build_diffusion, build_drift, max_real_eigenvalue, solve_lyapunov};
use crate::model::{apply_scheme, make_bath, wrap_phase, ReducedParams, Scheme};
use crate::response::{self, rates, RateSet};
use crate::simplex::{self, SimplexOptions};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    RateEquation,
    Lyapunov,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CoolingLimit {
    pub n_f: f64,
    pub method: Method,
    /// Unnormalized rates at the evaluated point.
    pub rates: RateSet,
}

/// `n_f = (gamma n_th + Gamma_+) / (gamma + Gamma_opt)`.
pub fn rate_equation_limit(params: &ReducedParams, scheme: Scheme) -> Result<CoolingLimit> {
    let p = apply_scheme(params, scheme);
    p.validate()?;
    let r = rates(&p, scheme, false)?;
    let net_damping = p.gamma + r.gamma_opt;
    if net_damping <= 0.0 {
        return Err(Error::HeatingDivergence { net_damping });
    }
    Ok(CoolingLimit {
        n_f: (p.gamma * p.n_th + r.gamma_plus) / net_damping,
        method: Method::RateEquation,
        rates: r,
    })
}

/// Phonon occupancy of the exact Gaussian steady state.
pub fn exact_limit(params: &ReducedParams, scheme: Scheme) -> Result<CoolingLimit> {
    let p = apply_scheme(params, scheme);
    p.validate()?;
    let ss = gaussian::steady_state(&p)?;
    let r = rates(&p, scheme, false)?;
    Ok(CoolingLimit {
        n_f: ss.n_b,
        method: Method::Lyapunov,
        rates: r,
    })
}

/// Floor `2 n_th / Q_m + sqrt(n_th / Q_m)` on the phonon number reachable
/// with Stokes-free intracavity squeezing.
pub fn min_phonon_floor(q_m: f64, n_th: f64) -> Result<f64> {
    if !(q_m > 0.0) || !q_m.is_finite() {
        return Err(invalid("q_m", format!("must be finite and > 0, got {q_m}")));
    }
    if !(n_th >= 0.0) || !n_th.is_finite() {
        return Err(invalid("n_th", format!("must be finite and >= 0, got {n_th}")));
    }
    Ok(2.0 * n_th / q_m + (n_th / q_m).sqrt())
}

/// Phonon number through stability + Lyapunov solve only; the optimizer's
/// inner objective. The reported optimum goes through the full checks.
fn fast_phonons(p: &ReducedParams) -> Option<f64> {
    let a = build_drift(p);
    if !(max_real_eigenvalue(&a) < -gaussian::STABILITY_MARGIN * p.omega_m) {
        return None;
    }
    let d = build_diffusion(p);
    let v = solve_lyapunov(&a, &d).ok()?;
    let residual = (a * v + v * a.transpose() + d).norm() / d.norm();
    if !(residual <= gaussian::RESIDUAL_TOL) {
        return None;
    }
    Some(0.5 * (v[(2, 2)] + v[(3, 3)] - 1.0))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SearchMode {
    /// `(r_s, phi_s)` pinned by the Stokes-suppression condition.
    Suppressed,
    /// Every squeezing variable searched independently.
    Free,
}

/// Bounds and budget of a cooling optimization.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SearchSpec {
    pub g_min: f64,
    pub g_max: f64,
    /// Upper bound on `|eps|` as a fraction of the bare parametric threshold
    /// `sqrt(delta^2 + kappa^2/4)/2`.
    pub eps_threshold_fraction: f64,
    /// Pins `|eps|` instead of searching it.
    pub eps_fixed: Option<f64>,
    /// Pins the intracavity squeezing phase.
    pub eps_phase_fixed: Option<f64>,
    pub r_s_max: f64,
    pub mode: SearchMode,
    pub starts: usize,
    pub max_evals_per_start: usize,
    /// Coupling at which stability is checked when maximizing the
    /// (coupling-independent) single-photon rate.
    pub g_ref: f64,
    pub method: Method,
    /// Phonon optima within this relative distance of the best value count
    /// as tied; the smallest coupling among them is reported.
    pub g_tie_tolerance: f64,
    pub seed: u64,
}

impl Default for SearchSpec {
    fn default() -> Self {
        SearchSpec {
            g_min: 1e-3,
            g_max: 1e2,
            eps_threshold_fraction: 1.0 - 1e-6,
            eps_fixed: None,
            eps_phase_fixed: None,
            r_s_max: 4.0,
            mode: SearchMode::Suppressed,
            starts: 24,
            max_evals_per_start: 2000,
            g_ref: 1e-3,
            method: Method::Lyapunov,
            g_tie_tolerance: 1e-3,
            seed: 0,
        }
    }
}

impl SearchSpec {
    pub fn validate(&self) -> Result<()> {
        if !(self.g_min > 0.0 && self.g_max > self.g_min && self.g_max.is_finite()) {
            return Err(invalid("g_min/g_max", "need 0 < g_min < g_max < inf"));
        }
        if !(self.eps_threshold_fraction > 0.0 && self.eps_threshold_fraction < 1.0) {
            return Err(invalid("eps_threshold_fraction", "must lie in (0, 1)"));
        }
        if let Some(e) = self.eps_fixed {
            if !(e >= 0.0 && e.is_finite()) {
                return Err(invalid("eps_fixed", "must be finite and >= 0"));
            }
        }
        if let Some(ph) = self.eps_phase_fixed {
            if !ph.is_finite() {
                return Err(invalid("eps_phase_fixed", "must be finite"));
            }
        }
        if !(self.r_s_max > 0.0 && self.r_s_max.is_finite()) {
            return Err(invalid("r_s_max", "must be finite and > 0"));
        }
        if self.starts == 0 {
            return Err(invalid("starts", "must be >= 1"));
        }
        if self.max_evals_per_start < 10 {
            return Err(invalid("max_evals_per_start", "must be >= 10"));
        }
        if !(self.g_ref > 0.0 && self.g_ref.is_finite()) {
            return Err(invalid("g_ref", "must be finite and > 0"));
        }
        if !(self.g_tie_tolerance >= 0.0 && self.g_tie_tolerance < 1.0) {
            return Err(invalid("g_tie_tolerance", "must lie in [0, 1)"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Objective {
    MinPhonons,
    MaxRate,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OptimizationResult {
    pub scheme: Scheme,
    pub objective: Objective,
    pub method: Method,
    /// Minimized phonon number (phonon objective only).
    pub n_f_min: Option<f64>,
    pub n_f_lyapunov: Option<f64>,
    pub n_f_rate_equation: Option<f64>,
    pub g_opt: f64,
    pub eps_opt: f64,
    pub phi_eps_opt: f64,
    pub r_s_opt: f64,
    pub phi_s_opt: f64,
    pub gamma_minus_normalized: f64,
    pub gamma_plus_normalized: f64,
    pub gamma_opt_normalized: f64,
    /// `gamma_opt_normalized * g_opt^2`.
    pub gamma_tot: f64,
    pub stable: bool,
    pub evaluations: usize,
    pub converged: bool,
    /// Full parameter record at the optimum.
    pub params: ReducedParams,
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum Var {
    LogG,
    EpsMag,
    EpsPhase,
    Rs,
    PhiS,
}

struct Problem {
    base: ReducedParams,
    scheme: Scheme,
    spec: SearchSpec,
    objective: Objective,
    vars: Vec<Var>,
    pin_bath: bool,
    pin_stokes_zero: bool,
    eps_threshold: f64,
    /// decades between `eps_threshold` and the search cap
    eps_decades: f64,
}

impl Problem {
    fn new(base: &ReducedParams, scheme: Scheme, spec: &SearchSpec, objective: Objective) -> Result<Self> {
        base.validate()?;
        spec.validate()?;
        if base.kappa <= 0.0 {
            return Err(invalid("kappa", "optimization needs kappa > 0"));
        }
        let base = apply_scheme(base, scheme);
        let suppressed = spec.mode == SearchMode::Suppressed;
        let mut vars = Vec::new();
        if objective == Objective::MinPhonons {
            vars.push(Var::LogG);
        }
        // in suppressed mode IS has no squeezing freedom left: the only
        // Stokes-free point is eps = 1/(2i chi(omega_m))
        let pin_stokes_zero =
            scheme == Scheme::IS && suppressed && spec.eps_fixed.is_none() && spec.eps_phase_fixed.is_none();
        if scheme.uses_intracavity() && !pin_stokes_zero {
            if spec.eps_fixed.is_none() {
                vars.push(Var::EpsMag);
            }
            if spec.eps_phase_fixed.is_none() {
                vars.push(Var::EpsPhase);
            }
        }
        let pin_bath = scheme.uses_bath() && suppressed;
        if scheme.uses_bath() && !suppressed {
            vars.push(Var::Rs);
            vars.push(Var::PhiS);
        }
        Ok(Problem {
            base,
            scheme,
            spec: *spec,
            objective,
            vars,
            pin_bath,
            pin_stokes_zero,
            eps_threshold: base.opo_threshold(),
            eps_decades: -(1.0 - spec.eps_threshold_fraction).log10(),
        })
    }

    fn log_g_bounds(&self) -> (f64, f64) {
        (self.spec.g_min.log10(), self.spec.g_max.log10())
    }

    fn eps_from_unit(&self, u: f64) -> f64 {
        self.eps_threshold * (1.0 - 10f64.powf(-self.eps_decades * u))
    }

    fn eps_to_unit(&self, eps: f64) -> Option<f64> {
        let frac = 1.0 - eps / self.eps_threshold;
        if frac <= 0.0 {
            return None;
        }
        let u = -frac.log10() / self.eps_decades;
        (0.0..=1.0).contains(&u).then_some(u)
    }

    fn point(&self, u: &[f64]) -> Result<ReducedParams> {
        let mut p = self.base;
        if self.objective == Objective::MaxRate {
            p.g_coupling = self.spec.g_ref;
        }
        if self.scheme.uses_intracavity() {
            if let Some(e) = self.spec.eps_fixed {
                p.eps_mag = e;
            }
            if let Some(ph) = self.spec.eps_phase_fixed {
                p.eps_phase = ph;
            }
        }
        let (mut r_s, mut phi_s) = (p.bath.r_s, p.bath.phi_s);
        for (var, &x) in self.vars.iter().zip(u) {
            match var {
                Var::LogG => {
                    let (lo, hi) = self.log_g_bounds();
                    p.g_coupling = 10f64.powf(lo + x * (hi - lo));
                }
                Var::EpsMag => p.eps_mag = self.eps_from_unit(x),
                Var::EpsPhase => p.eps_phase = 2.0 * PI * x,
                Var::Rs => r_s = self.spec.r_s_max * x,
                Var::PhiS => phi_s = PI * x,
            }
        }
        if self.pin_stokes_zero {
            let e = response::stokes_zero_eps(&p)?;
            p.eps_mag = e.norm();
            p.eps_phase = wrap_phase(e.arg(), 2.0 * PI);
        }
        if self.pin_bath {
            p = response::with_suppressing_bath(&p)?;
        } else if self.scheme.uses_bath() {
            p.bath = make_bath(r_s, phi_s)?;
        }
        Ok(p)
    }

    /// Value minimized by the simplex; `+inf` when infeasible.
    fn value(&self, u: &[f64]) -> f64 {
        let Ok(p) = self.point(u) else {
            return f64::INFINITY;
        };
        match self.objective {
            Objective::MinPhonons => match self.spec.method {
                Method::Lyapunov => fast_phonons(&p).unwrap_or(f64::INFINITY),
                Method::RateEquation => {
                    if !gaussian::stability(&p).0 {
                        return f64::INFINITY;
                    }
                    rate_equation_limit(&p, self.scheme)
                        .map(|c| c.n_f)
                        .unwrap_or(f64::INFINITY)
                }
            },
            Objective::MaxRate => {
                if !gaussian::stability(&p).0 {
                    return f64::INFINITY;
                }
                rates(&p, self.scheme, true)
                    .map(|r| -r.gamma_opt)
                    .unwrap_or(f64::INFINITY)
            }
        }
    }

    /// Known special points worth starting from: no intracavity squeezing,
    /// and the Stokes-free intracavity point.
    fn special_starts(&self, rng: &mut ChaCha8Rng) -> Vec<Vec<f64>> {
        let has = |v: Var| self.vars.contains(&v);
        if !has(Var::EpsMag) {
            return Vec::new();
        }
        let mut out = Vec::new();
        let mut candidates = vec![(0.0, 0.0)];
        if let Ok(e) = response::stokes_zero_eps(&self.base) {
            candidates.push((e.norm(), wrap_phase(e.arg(), 2.0 * PI)));
        }
        for (mag, phase) in candidates {
            let Some(ue) = self.eps_to_unit(mag) else {
                continue;
            };
            let u: Vec<f64> = self
                .vars
                .iter()
                .map(|v| match v {
                    Var::EpsMag => ue,
                    Var::EpsPhase => phase / (2.0 * PI),
                    _ => rng.random::<f64>(),
                })
                .collect();
            out.push(u);
        }
        out
    }

    /// Stratified (Latin hypercube) starts plus the special points, each
    /// redrawn until feasible.
    fn starts(&self) -> Vec<Vec<f64>> {
        let n = self.spec.starts;
        let dim = self.vars.len();
        let mut rng = ChaCha8Rng::seed_from_u64(self.spec.seed);
        let mut columns: Vec<Vec<usize>> = (0..dim)
            .map(|_| {
                let mut c: Vec<usize> = (0..n).collect();
                c.shuffle(&mut rng);
                c
            })
            .collect();
        let mut out = Vec::with_capacity(n + 2);
        for k in 0..n {
            let mut u: Vec<f64> = columns
                .iter_mut()
                .map(|c| (c[k] as f64 + rng.random::<f64>()) / n as f64)
                .collect();
            let mut tries = 0;
            while !self.value(&u).is_finite() && tries < 64 {
                u.iter_mut().for_each(|x| *x = rng.random::<f64>());
                tries += 1;
            }
            out.push(u);
        }
        out.extend(self.special_starts(&mut rng));
        out
    }

    fn search(&self) -> Result<(simplex::SimplexResult, ReducedParams, usize)> {
        let opts = SimplexOptions {
            max_evals: self.spec.max_evals_per_start,
            ..Default::default()
        };
        let starts = if self.vars.is_empty() {
            vec![Vec::new()]
        } else {
            self.starts()
        };
        let runs: Vec<_> = starts
            .par_iter()
            .map(|u0| simplex::minimize(|u| self.value(u), u0, &opts))
            .collect();
        let evaluations = runs.iter().map(|r| r.evals).sum();

        let mut best: Option<(&simplex::SimplexResult, ReducedParams)> = None;
        for run in runs.iter().filter(|r| r.f.is_finite()) {
            let p = self.point(&run.x)?;
            let better = match &best {
                None => true,
                Some((b, bp)) => {
                    let tol = 1e-9 * b.f.abs().max(f64::MIN_POSITIVE);
                    if (run.f - b.f).abs() <= tol {
                        (p.g_coupling, p.eps_mag) < (bp.g_coupling, bp.eps_mag)
                    } else {
                        run.f < b.f
                    }
                }
            };
            if better {
                best = Some((run, p));
            }
        }
        let Some((run, p)) = best else {
            // report why when no start admits the suppressing bath at all
            let mut infeasible = starts.iter().map(|u0| self.point(u0));
            if let Some(Err(e @ Error::InfeasibleSuppression { .. })) = infeasible.next() {
                if infeasible.all(|r| matches!(r, Err(Error::InfeasibleSuppression { .. }))) {
                    return Err(e);
                }
            }
            return Err(Error::EmptyFeasibleSet);
        };
        Ok((run.clone(), p, evaluations))
    }

    /// Same search with the coupling held at `g`.
    fn at_coupling(&self, g: f64) -> Problem {
        let mut base = self.base;
        base.g_coupling = g;
        Problem {
            base,
            vars: self.vars.iter().copied().filter(|v| *v != Var::LogG).collect(),
            ..*self
        }
    }

    /// Bisects (in log G) for the smallest coupling whose best phonon number
    /// is within the tie tolerance of `n_best`.
    fn smallest_tied_coupling(
        &self,
        n_best: f64,
        g_best: f64,
    ) -> Result<Option<(simplex::SimplexResult, ReducedParams, usize)>> {
        let target = n_best * (1.0 + self.spec.g_tie_tolerance);
        let mut evaluations = 0;
        let mut probe = |g: f64| -> Option<(simplex::SimplexResult, ReducedParams)> {
            match self.at_coupling(g).search() {
                Ok((run, p, n)) => {
                    evaluations += n;
                    Some((run, p))
                }
                Err(_) => None,
            }
        };
        let mut lo = self.spec.g_min.log10();
        let mut hi = g_best.log10();
        if let Some(found) = probe(self.spec.g_min).filter(|(r, _)| r.f <= target) {
            return Ok(Some((found.0, found.1, evaluations)));
        }
        let mut best = None;
        while hi - lo > 1e-4 {
            let mid = 0.5 * (lo + hi);
            match probe(10f64.powf(mid)) {
                Some(found) if found.0.f <= target => {
                    hi = mid;
                    best = Some(found);
                }
                _ => lo = mid,
            }
        }
        Ok(best.map(|(r, p)| (r, p, evaluations)))
    }

    fn solve(&self) -> Result<OptimizationResult> {
        let (mut run, mut p, mut evaluations) = self.search()?;
        if self.objective == Objective::MinPhonons && self.vars.contains(&Var::LogG) && self.spec.g_tie_tolerance > 0.0
        {
            if let Some((r, q, n)) = self.smallest_tied_coupling(run.f, p.g_coupling)? {
                evaluations += n;
                if q.g_coupling < p.g_coupling {
                    run = r;
                    p = q;
                }
            }
        }
        self.report(&run, p, evaluations)
    }

    fn report(&self, run: &simplex::SimplexResult, p: ReducedParams, evaluations: usize) -> Result<OptimizationResult> {
        let (stable, _) = gaussian::stability(&p);
        let norm = rates(&p, self.scheme, true)?;
        let n_f_lyapunov = exact_limit(&p, self.scheme).ok().map(|c| c.n_f);
        let n_f_rate_equation = rate_equation_limit(&p, self.scheme).ok().map(|c| c.n_f);
        let n_f_min = match self.objective {
            Objective::MinPhonons => Some(run.f),
            Objective::MaxRate => None,
        };
        Ok(OptimizationResult {
            scheme: self.scheme,
            objective: self.objective,
            method: self.spec.method,
            n_f_min,
            n_f_lyapunov,
            n_f_rate_equation,
            g_opt: p.g_coupling,
            eps_opt: p.eps_mag,
            phi_eps_opt: wrap_phase(p.eps_phase, 2.0 * PI),
            r_s_opt: p.bath.r_s,
            phi_s_opt: p.bath.phi_s,
            gamma_minus_normalized: norm.gamma_minus,
            gamma_plus_normalized: norm.gamma_plus,
            gamma_opt_normalized: norm.gamma_opt,
            gamma_tot: norm.gamma_opt * p.g_coupling * p.g_coupling,
            stable,
            evaluations,
            converged: run.converged,
            params: p,
        })
    }
}

/// Smallest steady-state phonon number reachable under `scheme`.
pub fn minimize_phonons(base: &ReducedParams, scheme: Scheme, spec: &SearchSpec) -> Result<OptimizationResult> {
    Problem::new(base, scheme, spec, Objective::MinPhonons)?.solve()
}

/// Largest normalized net cooling rate `(Gamma_- - Gamma_+)/(4G^2/kappa)`
/// under `scheme`, with stability checked at `spec.g_ref`.
pub fn maximize_rate(base: &ReducedParams, scheme: Scheme, spec: &SearchSpec) -> Result<OptimizationResult> {
    Problem::new(base, scheme, spec, Objective::MaxRate)?.solve()
}

/// Re-evaluates the objective the optimizer minimized at a reported point.
pub fn objective_at(result: &OptimizationResult) -> Result<f64> {
    let p = &result.params;
    match result.objective {
        Objective::MinPhonons => match result.method {
            Method::Lyapunov => Ok(gaussian::steady_state(p)?.n_b),
            Method::RateEquation => Ok(rate_equation_limit(p, result.scheme)?.n_f),
        },
        Objective::MaxRate => Ok(rates(p, result.scheme, true)?.gamma_opt),
    }
}
