//! Frequency-domain response of the squeezed cavity: susceptibility,
//! radiation-pressure force spectrum, Stokes/anti-Stokes rates and the
//! Stokes-suppression condition.
//!
//! Time convention is `e^{-i omega t}`; `chi(omega) = 1/[-i(omega - delta) + kappa/2]`.
//! Every scheme is evaluated through the one general ESIS expression after
//! [`apply_scheme`] has removed the absent squeezing resources.

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::model::{apply_scheme, make_bath, wrap_phase, ReducedParams, Scheme, SqueezedBath};

/// Cutoff on `|1 - 4|eps|^2 chi(w) chi*(-w)|^2` below which the spectrum is
/// considered singular.
pub const THRESHOLD_CUTOFF: f64 = 1e-30;

const I: Complex64 = Complex64 { re: 0.0, im: 1.0 };

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpectrumPoint {
    pub omega: f64,
    pub s_ff: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RateSet {
    /// Anti-Stokes (cooling) rate, `S_FF(omega_m)`.
    pub gamma_minus: f64,
    /// Stokes (heating) rate, `S_FF(-omega_m)`.
    pub gamma_plus: f64,
    pub gamma_opt: f64,
    /// Whether the three rates are divided by `4 G^2 / kappa`.
    pub normalized: bool,
}

impl RateSet {
    pub fn stokes_ratio(&self) -> f64 {
        self.gamma_plus / self.gamma_minus
    }
}

/// Solution of the Stokes-suppression condition for the injected squeezing.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SuppressionSolution {
    /// `artanh |Z|`; infinite when infeasible.
    pub r_s: f64,
    /// `-arg(Z)/2` on `[0, pi)`.
    pub phi_s: f64,
    pub feasible: bool,
    pub rhs_modulus: f64,
}

impl SuppressionSolution {
    pub fn bath(&self) -> Option<SqueezedBath> {
        if self.feasible {
            make_bath(self.r_s, self.phi_s).ok()
        } else {
            None
        }
    }
}

/// Optical susceptibility `1/[-i(omega - delta) + kappa/2]`.
pub fn chi(omega: f64, params: &ReducedParams) -> Result<Complex64> {
    let den = Complex64::new(0.5 * params.kappa, -(omega - params.delta));
    if den.re == 0.0 && den.im == 0.0 {
        return Err(Error::Singularity { omega });
    }
    Ok(den.inv())
}

/// Force spectral density `S_FF(omega)` under `scheme`.
pub fn spectrum(omega: f64, params: &ReducedParams, scheme: Scheme) -> Result<SpectrumPoint> {
    let p = apply_scheme(params, scheme);
    let s_ff = general_spectrum(omega, &p)?;
    Ok(SpectrumPoint { omega, s_ff })
}

fn general_spectrum(omega: f64, p: &ReducedParams) -> Result<f64> {
    let chi_w = chi(omega, p)?;
    let chi_mw = chi(-omega, p)?;
    let eps = p.eps();
    let den = 1.0 - 4.0 * p.eps_mag * p.eps_mag * chi_w * chi_mw.conj();
    let den2 = den.norm_sqr();
    if den2 < THRESHOLD_CUTOFF {
        return Err(Error::NearThreshold {
            omega,
            denominator: den2,
        });
    }
    let (sh, ch) = (p.bath.r_s.sinh(), p.bath.r_s.cosh());
    let conj_part = (1.0 + 2.0 * I * eps.conj() * chi_w.conj()) * chi_mw * sh * p.bath.phase_factor();
    let direct_part = (1.0 - 2.0 * I * eps * chi_mw) * chi_w.conj() * ch;
    let s0 = p.g_coupling * p.g_coupling * p.kappa / den2;
    Ok(s0 * (conj_part + direct_part).norm_sqr())
}

/// Cooling and heating rates read off the spectrum at `+-omega_m`.
pub fn rates(params: &ReducedParams, scheme: Scheme, normalized: bool) -> Result<RateSet> {
    let mut p = apply_scheme(params, scheme);
    let scale = if normalized {
        if p.kappa <= 0.0 {
            return Err(invalid("kappa", "normalized rates need kappa > 0"));
        }
        // S_FF scales as G^2, so evaluating at G = 1 and multiplying by
        // kappa/4 divides out 4G^2/kappa for every G including 0
        p.g_coupling = 1.0;
        0.25 * p.kappa
    } else {
        1.0
    };
    let gamma_minus = scale * general_spectrum(p.omega_m, &p)?;
    let gamma_plus = scale * general_spectrum(-p.omega_m, &p)?;
    Ok(RateSet {
        gamma_minus,
        gamma_plus,
        gamma_opt: gamma_minus - gamma_plus,
        normalized,
    })
}

/// Complex right-hand side `Z` of `tanh(r_s) e^{-2i phi_s} = Z`.
pub fn suppression_rhs(params: &ReducedParams) -> Result<Complex64> {
    let wm = params.omega_m;
    let chi_p = chi(wm, params)?;
    let chi_m = chi(-wm, params)?;
    let eps = params.eps();
    let den = chi_p * (1.0 + 2.0 * I * eps.conj() * chi_m.conj());
    if den.norm() < 1e-300 {
        return Err(Error::Degenerate(
            "suppression denominator chi(w_m)[1 + 2i eps* chi*(-w_m)] vanishes".into(),
        ));
    }
    Ok(-chi_m.conj() * (1.0 - 2.0 * I * eps * chi_p) / den)
}

/// Injected squeezing `(r_s, phi_s)` that cancels the Stokes rate for the
/// intracavity squeezing already present in `params`.
pub fn solve_suppression(params: &ReducedParams) -> Result<SuppressionSolution> {
    let z = suppression_rhs(params)?;
    let modulus = z.norm();
    let phi_s = wrap_phase(-0.5 * z.arg(), std::f64::consts::PI);
    let feasible = modulus < 1.0;
    Ok(SuppressionSolution {
        r_s: if feasible { modulus.atanh() } else { f64::INFINITY },
        phi_s,
        feasible,
        rhs_modulus: modulus,
    })
}

/// `params` with its bath replaced by the Stokes-suppressing one.
pub fn with_suppressing_bath(params: &ReducedParams) -> Result<ReducedParams> {
    let sol = solve_suppression(params)?;
    match sol.bath() {
        Some(bath) => Ok(params.with_bath(bath)),
        None => Err(Error::InfeasibleSuppression {
            rhs_modulus: sol.rhs_modulus,
        }),
    }
}

/// Intracavity squeezing `1/(2i chi(omega_m))` that cancels the Stokes rate
/// without any injected squeezing (the `r_s = 0` root of the suppression
/// condition).
pub fn stokes_zero_eps(params: &ReducedParams) -> Result<Complex64> {
    let chi_p = chi(params.omega_m, params)?;
    Ok((2.0 * I * chi_p).inv())
}

/// Evaluates the spectrum on a grid. Failing points are reported in place
/// and do not abort the scan.
pub fn scan_spectrum(params: &ReducedParams, scheme: Scheme, omega_grid: &[f64]) -> Result<Vec<Result<SpectrumPoint>>> {
    if omega_grid.is_empty() {
        return Err(invalid("omega_grid", "must be nonempty"));
    }
    if let Some(w) = omega_grid.iter().find(|w| !w.is_finite()) {
        return Err(invalid("omega_grid", format!("non-finite entry {w}")));
    }
    Ok(omega_grid.par_iter().map(|&w| spectrum(w, params, scheme)).collect())
}
