//! Parameter records shared by every other module.
//!
//! All frequencies and rates are expressed in units of the mechanical
//! frequency `omega_m` (canonically 1). Only [`thermal_occupancy`] takes
//! absolute SI units.

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};

/// Reduced Planck constant, J s.
pub const HBAR: f64 = 1.054_571_817e-34;
/// Boltzmann constant, J/K.
pub const K_B: f64 = 1.380_649e-23;

/// Maps any phase onto the canonical branch `[0, period)`.
pub(crate) fn wrap_phase(phase: f64, period: f64) -> f64 {
    let w = phase.rem_euclid(period);
    // rem_euclid can round up to exactly `period`
    if w >= period {
        0.0
    } else {
        w
    }
}

/// White squeezed-vacuum environment seen by the cavity input port.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SqueezedBath {
    pub r_s: f64,
    /// Squeezing phase, canonical branch `[0, pi)`.
    pub phi_s: f64,
    /// `sinh^2 r_s`
    pub n_s: f64,
    /// `cosh r_s sinh r_s`
    pub m_s: f64,
}

impl SqueezedBath {
    pub fn vacuum() -> Self {
        SqueezedBath {
            r_s: 0.0,
            phi_s: 0.0,
            n_s: 0.0,
            m_s: 0.0,
        }
    }

    /// `exp(-2 i phi_s)`, the only way the phase enters any formula.
    pub fn phase_factor(&self) -> Complex64 {
        Complex64::from_polar(1.0, -2.0 * self.phi_s)
    }
}

impl Default for SqueezedBath {
    fn default() -> Self {
        Self::vacuum()
    }
}

/// Builds a squeezed bath with its derived correlator weights.
pub fn make_bath(r_s: f64, phi_s: f64) -> Result<SqueezedBath> {
    if !r_s.is_finite() || r_s < 0.0 {
        return Err(invalid("r_s", format!("must be finite and >= 0, got {r_s}")));
    }
    if !phi_s.is_finite() {
        return Err(invalid("phi_s", format!("must be finite, got {phi_s}")));
    }
    let (sh, ch) = (r_s.sinh(), r_s.cosh());
    Ok(SqueezedBath {
        r_s,
        phi_s: wrap_phase(phi_s, PI),
        n_s: sh * sh,
        m_s: ch * sh,
    })
}

/// The four cooling configurations compared throughout the crate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Scheme {
    /// Plain sideband cooling.
    SB,
    /// Extracavity (injected) squeezing only.
    ES,
    /// Intracavity parametric squeezing only.
    IS,
    /// Both squeezing resources.
    ESIS,
}

impl Scheme {
    pub const ALL: [Scheme; 4] = [Scheme::SB, Scheme::ES, Scheme::IS, Scheme::ESIS];

    pub fn uses_bath(self) -> bool {
        matches!(self, Scheme::ES | Scheme::ESIS)
    }

    pub fn uses_intracavity(self) -> bool {
        matches!(self, Scheme::IS | Scheme::ESIS)
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Scheme::SB => "SB",
            Scheme::ES => "ES",
            Scheme::IS => "IS",
            Scheme::ESIS => "ESIS",
        }
    }
}

impl fmt::Display for Scheme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Scheme {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_uppercase().as_str() {
            "SB" => Ok(Scheme::SB),
            "ES" => Ok(Scheme::ES),
            "IS" => Ok(Scheme::IS),
            "ESIS" => Ok(Scheme::ESIS),
            _ => Err(invalid("scheme", format!("unknown scheme `{s}`"))),
        }
    }
}

/// Effective single-cavity model after linearization and elimination of the
/// pump mode.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ReducedParams {
    /// Effective detuning.
    pub delta: f64,
    /// Total cavity dissipation (no intrinsic loss).
    pub kappa: f64,
    pub omega_m: f64,
    pub gamma: f64,
    /// Linearized coupling, real by choice of drive phase.
    pub g_coupling: f64,
    pub eps_mag: f64,
    /// Intracavity squeezing phase, radians.
    pub eps_phase: f64,
    pub bath: SqueezedBath,
    pub n_th: f64,
}

impl ReducedParams {
    /// The operating point used throughout the scheme comparison: detuning
    /// `sqrt(omega_m^2 + kappa^2/4)`, `Q_m = 1e5`, `n_th = 1e3`, no squeezing.
    pub fn benchmark(kappa_over_4wm: f64) -> Self {
        let kappa = 4.0 * kappa_over_4wm;
        ReducedParams {
            delta: optimal_detuning(kappa, 1.0),
            kappa,
            omega_m: 1.0,
            gamma: 1e-5,
            g_coupling: 1.0,
            eps_mag: 0.0,
            eps_phase: 0.0,
            bath: SqueezedBath::vacuum(),
            n_th: 1e3,
        }
    }

    /// Complex intracavity squeezing amplitude `|eps| e^{i phi_eps}`.
    pub fn eps(&self) -> Complex64 {
        Complex64::from_polar(self.eps_mag, self.eps_phase)
    }

    pub fn q_m(&self) -> f64 {
        self.omega_m / self.gamma
    }

    /// Parametric instability boundary for `|eps|` of the bare cavity,
    /// `sqrt(delta^2 + kappa^2/4) / 2`.
    pub fn opo_threshold(&self) -> f64 {
        (self.delta * self.delta + 0.25 * self.kappa * self.kappa).sqrt() / 2.0
    }

    /// Normalization of the single-photon cooling rate, `4 G^2 / kappa`.
    pub fn rate_scale(&self) -> f64 {
        4.0 * self.g_coupling * self.g_coupling / self.kappa
    }

    pub fn with_coupling(mut self, g: f64) -> Self {
        self.g_coupling = g;
        self
    }

    pub fn with_eps(mut self, mag: f64, phase: f64) -> Self {
        self.eps_mag = mag;
        self.eps_phase = phase;
        self
    }

    pub fn with_bath(mut self, bath: SqueezedBath) -> Self {
        self.bath = bath;
        self
    }

    pub fn validate(&self) -> Result<()> {
        let finite = [
            ("delta", self.delta),
            ("kappa", self.kappa),
            ("omega_m", self.omega_m),
            ("gamma", self.gamma),
            ("g_coupling", self.g_coupling),
            ("eps_mag", self.eps_mag),
            ("eps_phase", self.eps_phase),
            ("n_th", self.n_th),
        ];
        for (name, v) in finite {
            if !v.is_finite() {
                return Err(invalid(name, format!("must be finite, got {v}")));
            }
        }
        if self.omega_m <= 0.0 {
            return Err(invalid("omega_m", "must be > 0"));
        }
        if self.kappa < 0.0 {
            return Err(invalid("kappa", "must be >= 0"));
        }
        if self.gamma <= 0.0 {
            return Err(invalid("gamma", "must be > 0"));
        }
        if self.g_coupling < 0.0 {
            return Err(invalid("g_coupling", "must be >= 0"));
        }
        if self.eps_mag < 0.0 {
            return Err(invalid("eps_mag", "must be >= 0"));
        }
        if self.n_th < 0.0 {
            return Err(invalid("n_th", "must be >= 0"));
        }
        let b = &self.bath;
        if !(b.r_s.is_finite() && b.r_s >= 0.0 && b.phi_s.is_finite()) {
            return Err(invalid("bath", "r_s must be finite and >= 0, phi_s finite"));
        }
        Ok(())
    }
}

/// Detuning `sqrt(omega_m^2 + kappa^2/4)` used for the scheme comparison.
pub fn optimal_detuning(kappa: f64, omega_m: f64) -> f64 {
    (omega_m * omega_m + 0.25 * kappa * kappa).sqrt()
}

/// Zeroes the squeezing resources a scheme does not have.
pub fn apply_scheme(params: &ReducedParams, scheme: Scheme) -> ReducedParams {
    let mut p = *params;
    if !scheme.uses_bath() {
        p.bath = SqueezedBath {
            r_s: 0.0,
            n_s: 0.0,
            m_s: 0.0,
            ..p.bath
        };
    }
    if !scheme.uses_intracavity() {
        p.eps_mag = 0.0;
    }
    p
}

/// Bose occupancy of a mechanical mode at angular frequency
/// `omega_m_abs` (rad/s) and temperature `temperature` (K).
pub fn thermal_occupancy(temperature: f64, omega_m_abs: f64) -> Result<f64> {
    if !temperature.is_finite() || temperature < 0.0 {
        return Err(invalid(
            "temperature",
            format!("must be finite and >= 0, got {temperature}"),
        ));
    }
    if !omega_m_abs.is_finite() || omega_m_abs <= 0.0 {
        return Err(invalid(
            "omega_m_abs",
            format!("must be finite and > 0, got {omega_m_abs}"),
        ));
    }
    if temperature == 0.0 {
        return Ok(0.0);
    }
    let x = HBAR * omega_m_abs / (K_B * temperature);
    Ok(1.0 / x.exp_m1())
}
