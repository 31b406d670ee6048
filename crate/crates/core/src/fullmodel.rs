//! Two-mode (fundamental + pump) model: classical steady state, reduction to
//! the effective single-cavity parameters, and the pump-elimination
//! diagnostics.
//!
//! Both optical modes see the same squeezed environment; the reduced model
//! only inherits it through the fundamental mode.

use nalgebra::{SMatrix, SVector};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::model::{make_bath, ReducedParams, SqueezedBath};

const I: Complex64 = Complex64 { re: 0.0, im: 1.0 };

pub const RESIDUAL_TOL: f64 = 1e-9;
pub const MAX_ITERATIONS: usize = 10_000;
/// Roots further apart than this (relative) are reported as bistable.
pub const ROOT_SEPARATION: f64 = 1e-6;
/// `margin >= VALIDITY_MARGIN` counts as "much greater than".
pub const VALIDITY_MARGIN: f64 = 10.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FullModelParams {
    pub omega_m: f64,
    pub gamma: f64,
    pub n_th: f64,
    pub delta_s: f64,
    pub delta_p: f64,
    pub kappa_s: f64,
    pub kappa_p: f64,
    pub g_s: f64,
    pub g_p: f64,
    /// Parametric coupling between the fundamental and pump modes.
    pub eps0: Complex64,
    pub drive_s: Complex64,
    pub drive_p: Complex64,
    pub bath: SqueezedBath,
}

impl FullModelParams {
    /// Reference point whose classical root is `alpha_s = 1e3`,
    /// `alpha_p = 1e2 e^{i pi/4}`: the drives are back-solved from the
    /// mean-field equations. Gives `G = 0.1`, `|eps| = 0.1` and an adiabatic
    /// margin of about 16.
    pub fn reference() -> Self {
        let mut full = FullModelParams {
            omega_m: 1.0,
            gamma: 1e-5,
            n_th: 1e3,
            delta_s: 1.0,
            delta_p: 50.0,
            kappa_s: 2.0,
            kappa_p: 5.0,
            g_s: 1e-4,
            g_p: 1e-4,
            eps0: Complex64::new(1e-3, 0.0),
            drive_s: Complex64::new(0.0, 0.0),
            drive_p: Complex64::new(0.0, 0.0),
            bath: SqueezedBath::vacuum(),
        };
        let a_s = Complex64::new(1e3, 0.0);
        let a_p = Complex64::from_polar(1e2, std::f64::consts::FRAC_PI_4);
        let beta = -I * (full.g_s * a_s.norm_sqr() + full.g_p * a_p.norm_sqr())
            / Complex64::new(0.5 * full.gamma, full.omega_m);
        let [f_s, f_p, _] = full.mean_field_rhs(&[a_s, a_p, beta]);
        full.drive_s = f_s;
        full.drive_p = f_p;
        full
    }

    pub fn validate(&self) -> Result<()> {
        let reals = [
            ("omega_m", self.omega_m),
            ("gamma", self.gamma),
            ("n_th", self.n_th),
            ("delta_s", self.delta_s),
            ("delta_p", self.delta_p),
            ("kappa_s", self.kappa_s),
            ("kappa_p", self.kappa_p),
            ("g_s", self.g_s),
            ("g_p", self.g_p),
        ];
        for (name, v) in reals {
            if !v.is_finite() {
                return Err(invalid(name, format!("must be finite, got {v}")));
            }
        }
        for (name, z) in [
            ("eps0", self.eps0),
            ("drive_s", self.drive_s),
            ("drive_p", self.drive_p),
        ] {
            if !(z.re.is_finite() && z.im.is_finite()) {
                return Err(invalid(name, "must be finite"));
            }
        }
        if self.omega_m <= 0.0 {
            return Err(invalid("omega_m", "must be > 0"));
        }
        if self.gamma <= 0.0 {
            return Err(invalid("gamma", "must be > 0"));
        }
        if self.kappa_s <= 0.0 || self.kappa_p <= 0.0 {
            return Err(invalid("kappa_s/kappa_p", "must be > 0"));
        }
        if self.n_th < 0.0 {
            return Err(invalid("n_th", "must be >= 0"));
        }
        Ok(())
    }

    /// Fields of two independent driven cavities, no mechanical displacement.
    pub fn linear_guess(&self) -> [Complex64; 3] {
        [
            -self.drive_s / Complex64::new(0.5 * self.kappa_s, self.delta_s),
            -self.drive_p / Complex64::new(0.5 * self.kappa_p, self.delta_p),
            Complex64::new(0.0, 0.0),
        ]
    }

    /// Right-hand sides of the classical mean-field equations at
    /// `(alpha_s, alpha_p, beta)`.
    pub fn mean_field_rhs(&self, z: &[Complex64; 3]) -> [Complex64; 3] {
        let [a_s, a_p, b] = *z;
        let x = 2.0 * b.re;
        [
            Complex64::new(-0.5 * self.kappa_s, -self.delta_s) * a_s
                - 2.0 * I * self.eps0.conj() * a_s.conj() * a_p
                - I * self.g_s * a_s * x
                - self.drive_s,
            Complex64::new(-0.5 * self.kappa_p, -self.delta_p) * a_p
                - I * self.eps0 * a_s * a_s
                - I * self.g_p * a_p * x
                - self.drive_p,
            Complex64::new(-0.5 * self.gamma, -self.omega_m) * b
                - I * self.g_s * a_s.norm_sqr()
                - I * self.g_p * a_p.norm_sqr(),
        ]
    }

    fn residual_scale(&self) -> f64 {
        let s = self.drive_s.norm() + self.drive_p.norm();
        if s > 0.0 {
            s
        } else {
            1.0
        }
    }

    /// Relative residual of the mean-field equations.
    pub fn residual(&self, z: &[Complex64; 3]) -> f64 {
        let f = self.mean_field_rhs(z);
        f.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt() / self.residual_scale()
    }

    /// Real 6x6 Jacobian in `(Re, Im)` ordering, assembled from Wirtinger
    /// derivatives: `d/dx = f_z + f_z*`, `d/dy = i (f_z - f_z*)`.
    fn jacobian(&self, z: &[Complex64; 3]) -> SMatrix<f64, 6, 6> {
        let [a_s, a_p, b] = *z;
        let x = 2.0 * b.re;
        let zero = Complex64::new(0.0, 0.0);
        // rows: equations; columns: (d/dz, d/dz*) for alpha_s, alpha_p, beta
        let d: [[(Complex64, Complex64); 3]; 3] = [
            [
                (
                    Complex64::new(-0.5 * self.kappa_s, -self.delta_s) - I * self.g_s * x,
                    -2.0 * I * self.eps0.conj() * a_p,
                ),
                (-2.0 * I * self.eps0.conj() * a_s.conj(), zero),
                (-I * self.g_s * a_s, -I * self.g_s * a_s),
            ],
            [
                (-2.0 * I * self.eps0 * a_s, zero),
                (
                    Complex64::new(-0.5 * self.kappa_p, -self.delta_p) - I * self.g_p * x,
                    zero,
                ),
                (-I * self.g_p * a_p, -I * self.g_p * a_p),
            ],
            [
                (-I * self.g_s * a_s.conj(), -I * self.g_s * a_s),
                (-I * self.g_p * a_p.conj(), -I * self.g_p * a_p),
                (Complex64::new(-0.5 * self.gamma, -self.omega_m), zero),
            ],
        ];
        let mut j = SMatrix::<f64, 6, 6>::zeros();
        for (row, eq) in d.iter().enumerate() {
            for (col, &(fz, fzc)) in eq.iter().enumerate() {
                let dx = fz + fzc;
                let dy = I * (fz - fzc);
                j[(2 * row, 2 * col)] = dx.re;
                j[(2 * row + 1, 2 * col)] = dx.im;
                j[(2 * row, 2 * col + 1)] = dy.re;
                j[(2 * row + 1, 2 * col + 1)] = dy.im;
            }
        }
        j
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ClassicalSteadyState {
    pub alpha_s: Complex64,
    pub alpha_p: Complex64,
    pub beta: Complex64,
    pub residual: f64,
    pub delta_s_eff: f64,
    pub delta_p_eff: f64,
    pub iterations: usize,
    /// Another root was found from a different starting guess (origin,
    /// linear-cavity or resonant fields).
    pub bistable: bool,
}

fn newton(full: &FullModelParams, guess: [Complex64; 3]) -> Result<([Complex64; 3], f64, usize)> {
    let mut z = guess;
    let mut res = full.residual(&z);
    for it in 0..MAX_ITERATIONS {
        if res <= 1e-14 {
            return Ok((z, res, it));
        }
        let f = full.mean_field_rhs(&z);
        let rhs = SVector::<f64, 6>::from_fn(|k, _| {
            let c = f[k / 2];
            -(if k % 2 == 0 { c.re } else { c.im })
        });
        let Some(step) = full.jacobian(&z).lu().solve(&rhs) else {
            return Err(Error::Numerical("singular mean-field Jacobian".into()));
        };
        // damped: halve the step until the residual stops increasing
        let mut t = 1.0;
        let mut accepted = None;
        for _ in 0..60 {
            let trial = [0, 1, 2].map(|k| z[k] + t * Complex64::new(step[2 * k], step[2 * k + 1]));
            let r = full.residual(&trial);
            if r < res {
                accepted = Some((trial, r));
                break;
            }
            t *= 0.5;
        }
        match accepted {
            Some((trial, r)) => {
                z = trial;
                res = r;
            }
            // no descent left: either converged to round-off or stuck
            None => {
                return if res <= RESIDUAL_TOL {
                    Ok((z, res, it))
                } else {
                    Err(Error::NoConvergence {
                        iterations: it,
                        residual: res,
                    })
                };
            }
        }
    }
    if res <= RESIDUAL_TOL {
        Ok((z, res, MAX_ITERATIONS))
    } else {
        Err(Error::NoConvergence {
            iterations: MAX_ITERATIONS,
            residual: res,
        })
    }
}

fn separated(a: &[Complex64; 3], b: &[Complex64; 3]) -> bool {
    let scale = a.iter().chain(b).map(|c| c.norm()).fold(1.0, f64::max);
    a.iter().zip(b).any(|(x, y)| (x - y).norm() > ROOT_SEPARATION * scale)
}

/// Root of the mean-field equations by damped Newton iteration from
/// `initial_guess` (default: [`FullModelParams::linear_guess`]).
pub fn classical_steady_state(
    full: &FullModelParams,
    initial_guess: Option<[Complex64; 3]>,
) -> Result<ClassicalSteadyState> {
    full.validate()?;
    let linear = full.linear_guess();
    let guess = initial_guess.unwrap_or(linear);
    let (z, residual, iterations) = newton(full, guess)?;

    let zero = Complex64::new(0.0, 0.0);
    // resonant fields: the largest amplitudes the drives can sustain, which
    // is where an upper branch lives
    let resonant = [
        -full.drive_s / (0.5 * full.kappa_s),
        -full.drive_p / (0.5 * full.kappa_p),
        zero,
    ];
    let alternates = [[zero; 3], resonant, linear];
    let bistable = alternates
        .iter()
        .filter(|g| separated(g, &guess))
        .filter_map(|g| newton(full, *g).ok())
        .any(|(other, _, _)| separated(&other, &z));

    let [alpha_s, alpha_p, beta] = z;
    let x = 2.0 * beta.re;
    Ok(ClassicalSteadyState {
        alpha_s,
        alpha_p,
        beta,
        residual,
        delta_s_eff: full.delta_s + full.g_s * x,
        delta_p_eff: full.delta_p + full.g_p * x,
        iterations,
        bistable,
    })
}

/// Effective parameters plus the frame rotation that made `G` real.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Reduction {
    pub params: ReducedParams,
    /// `arg(g_s alpha_s)`; the fundamental mode is rotated by this phase.
    pub frame_phase: f64,
}

/// Reduced parameters `G = |g_s alpha_s|`, `eps = eps0* alpha_p` (in the
/// frame where `G` is real), `delta = delta_s_eff`, `kappa = kappa_s`.
pub fn extract_reduced(full: &FullModelParams, css: &ClassicalSteadyState) -> Result<Reduction> {
    if !(css.residual <= RESIDUAL_TOL) {
        return Err(Error::Numerical(format!(
            "classical steady state residual {:e} too large",
            css.residual
        )));
    }
    let coupling = full.g_s * css.alpha_s;
    let frame_phase = if coupling.norm() > 0.0 { coupling.arg() } else { 0.0 };
    // a = a' e^{i theta}: eps a^dag picks up e^{-2i theta}, and so does the
    // input-noise pair correlator
    let eps = full.eps0.conj() * css.alpha_p * Complex64::from_polar(1.0, -2.0 * frame_phase);
    let bath = make_bath(full.bath.r_s, full.bath.phi_s + frame_phase)?;
    let params = ReducedParams {
        delta: css.delta_s_eff,
        kappa: full.kappa_s,
        omega_m: full.omega_m,
        gamma: full.gamma,
        g_coupling: coupling.norm(),
        eps_mag: eps.norm(),
        eps_phase: if eps.norm() > 0.0 { eps.arg() } else { 0.0 },
        bath,
        n_th: full.n_th,
    };
    Ok(Reduction { params, frame_phase })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AdiabaticReport {
    /// Effective pump detuning.
    pub lhs: f64,
    /// `sqrt(g_p^2 |alpha_p|^2 kappa_p / omega_m)` and
    /// `sqrt(kappa_p/kappa_s) |2 eps0 alpha_s|`.
    pub rhs_terms: [f64; 2],
    pub margin: f64,
    pub valid: bool,
    pub detuning_shift_s: f64,
    pub dissipation_shift_s: f64,
    pub mech_detuning_shift: f64,
    /// Magnitude of the pump-induced `b^dag` (mechanical squeezing) term.
    pub mech_squeezing_term: f64,
}

/// Corrections to the fundamental and mechanical modes left over after
/// eliminating the pump, and the validity margin of the elimination.
pub fn adiabatic_report(full: &FullModelParams, css: &ClassicalSteadyState) -> Result<AdiabaticReport> {
    let dp = css.delta_p_eff;
    let kp = full.kappa_p;
    let den = dp * dp + 0.25 * kp * kp;
    if den == 0.0 {
        return Err(Error::Degenerate("pump detuning and dissipation both vanish".into()));
    }
    let ap2 = css.alpha_p.norm_sqr();
    let as2 = css.alpha_s.norm_sqr();
    let e02 = full.eps0.norm_sqr();
    let rhs_terms = [
        (full.g_p * full.g_p * ap2 * kp / full.omega_m).sqrt(),
        (kp / full.kappa_s).sqrt() * (2.0 * full.eps0 * css.alpha_s).norm(),
    ];
    let dominant = rhs_terms[0].max(rhs_terms[1]);
    let margin = if dominant > 0.0 {
        dp / dominant
    } else if dp > 0.0 {
        f64::INFINITY
    } else {
        0.0
    };
    let mech = 2.0 * full.g_p * full.g_p * ap2 * dp / den;
    Ok(AdiabaticReport {
        lhs: dp,
        rhs_terms,
        margin,
        valid: margin >= VALIDITY_MARGIN,
        detuning_shift_s: -4.0 * e02 * as2 * dp / den,
        dissipation_shift_s: 4.0 * e02 * as2 * kp / den,
        mech_detuning_shift: -mech,
        mech_squeezing_term: mech.abs(),
    })
}
