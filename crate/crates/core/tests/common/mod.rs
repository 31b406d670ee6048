//! Independent reference formulas and generators shared by the integration
//! tests. Nothing here calls into the library's spectrum code.
#![allow(dead_code)]

use num_complex::Complex64;
use proptest::prelude::*;
use squeezecool::fullmodel::{classical_steady_state, ClassicalSteadyState, FullModelParams};
use squeezecool::model::{make_bath, optimal_detuning, ReducedParams};

pub const I: Complex64 = Complex64 { re: 0.0, im: 1.0 };

/// `1/[kappa/2 - i(omega - delta)]`, written out independently.
pub fn lorentz(omega: f64, delta: f64, kappa: f64) -> Complex64 {
    Complex64::new(0.5 * kappa, delta - omega).inv()
}

/// Plain sideband cooling: `G^2 kappa / ((w - D)^2 + kappa^2/4)`.
pub fn sb_spectrum(omega: f64, p: &ReducedParams) -> f64 {
    let d = omega - p.delta;
    p.g_coupling * p.g_coupling * p.kappa / (d * d + 0.25 * p.kappa * p.kappa)
}

/// Squeezed input only, with the explicit denominators
/// `i(w + D) + kappa/2` and `i(w - D) + kappa/2`.
pub fn es_spectrum(omega: f64, p: &ReducedParams) -> f64 {
    let (sh, ch) = (p.bath.r_s.sinh(), p.bath.r_s.cosh());
    let ph = Complex64::from_polar(1.0, -2.0 * p.bath.phi_s);
    let a = sh * ph / Complex64::new(0.5 * p.kappa, omega + p.delta);
    let b = ch / Complex64::new(0.5 * p.kappa, omega - p.delta);
    p.g_coupling * p.g_coupling * p.kappa * (a + b).norm_sqr()
}

/// Intracavity squeezing only.
pub fn is_spectrum(omega: f64, p: &ReducedParams) -> f64 {
    let eps = Complex64::from_polar(p.eps_mag, p.eps_phase);
    let cp = lorentz(omega, p.delta, p.kappa);
    let cm = lorentz(-omega, p.delta, p.kappa);
    let num = ((1.0 - 2.0 * I * eps * cm) * cp.conj()).norm_sqr();
    let den = (1.0 - 4.0 * eps.norm_sqr() * cp * cm.conj()).norm_sqr();
    p.g_coupling * p.g_coupling * p.kappa * num / den
}

pub fn rel_diff(a: f64, b: f64) -> f64 {
    if a == b {
        0.0
    } else {
        (a - b).abs() / a.abs().max(b.abs())
    }
}

/// Random reduced parameters kept below the parametric threshold.
pub fn reduced_params() -> impl Strategy<Value = ReducedParams> {
    (
        -2.0f64..3.0,  // log10 kappa
        -0.5f64..3.0,  // detuning relative to the benchmark value
        -6.0f64..-2.0, // log10 gamma
        0.0f64..2.0,   // G
        0.0f64..0.95,  // |eps| / threshold
        0.0f64..std::f64::consts::TAU,
        0.0f64..3.0, // r_s
        0.0f64..std::f64::consts::PI,
        0.0f64..1e3, // n_th
    )
        .prop_map(|(lk, dscale, lg, g, ef, ep, r, phi, n)| {
            let kappa = 10f64.powf(lk);
            let delta = dscale * optimal_detuning(kappa, 1.0);
            let mut p = ReducedParams {
                delta,
                kappa,
                omega_m: 1.0,
                gamma: 10f64.powf(lg),
                g_coupling: g,
                eps_mag: 0.0,
                eps_phase: ep,
                bath: make_bath(r, phi).unwrap(),
                n_th: n,
            };
            p.eps_mag = ef * p.opo_threshold();
            p
        })
}

/// Classical fourth-order Runge-Kutta for a complex linear system.
pub fn rk4<const N: usize>(
    f: impl Fn(&[Complex64; N]) -> [Complex64; N],
    y0: [Complex64; N],
    dt: f64,
    steps: usize,
) -> Vec<[Complex64; N]> {
    let add =
        |y: &[Complex64; N], k: &[Complex64; N], h: f64| -> [Complex64; N] { std::array::from_fn(|i| y[i] + h * k[i]) };
    let mut out = Vec::with_capacity(steps + 1);
    let mut y = y0;
    out.push(y);
    for _ in 0..steps {
        let k1 = f(&y);
        let k2 = f(&add(&y, &k1, 0.5 * dt));
        let k3 = f(&add(&y, &k2, 0.5 * dt));
        let k4 = f(&add(&y, &k3, dt));
        y = std::array::from_fn(|i| y[i] + dt / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]));
        out.push(y);
    }
    out
}

/// Fundamental + pump point with no pump field (the pump drive cancels the
/// parametric source), so the fluctuations of the two optical modes form a
/// closed 2x2 linear system.
pub fn pole_fit_point() -> (FullModelParams, ClassicalSteadyState) {
    let mut full = FullModelParams {
        omega_m: 1.0,
        gamma: 1e-5,
        n_th: 0.0,
        delta_s: 0.5,
        delta_p: 60.0,
        kappa_s: 0.2,
        kappa_p: 10.0,
        g_s: 0.0,
        g_p: 0.0,
        eps0: Complex64::new(0.03, 0.01),
        drive_s: Complex64::new(30.0, -38.0),
        drive_p: Complex64::new(0.0, 0.0),
        bath: make_bath(0.0, 0.0).unwrap(),
    };
    let a_s = -full.drive_s / (I * full.delta_s + 0.5 * full.kappa_s);
    full.drive_p = -I * full.eps0 * a_s * a_s;
    let css = classical_steady_state(&full, None).unwrap();
    (full, css)
}

/// Integrates the linearized fundamental/pump fluctuations by RK4 and reads
/// the slow pole off the late-time fundamental amplitude. Returns the shifts
/// of its detuning and of its dissipation rate.
pub fn fitted_shifts(full: &FullModelParams, css: &ClassicalSteadyState) -> (f64, f64) {
    let ks = Complex64::new(-0.5 * full.kappa_s, -css.delta_s_eff);
    let kp = Complex64::new(-0.5 * full.kappa_p, -css.delta_p_eff);
    let (a_s, eps0) = (css.alpha_s, full.eps0);
    let rhs = |y: &[Complex64; 2]| -> [Complex64; 2] {
        [
            ks * y[0] - 2.0 * I * eps0.conj() * a_s.conj() * y[1],
            kp * y[1] - 2.0 * I * eps0 * a_s * y[0],
        ]
    };
    let dt = 1e-3;
    let traj = rk4(rhs, [Complex64::new(1.0, 0.0), Complex64::new(0.0, 0.0)], dt, 10_000);
    let (t1, t2) = (8_000, 10_000);
    let span = (t2 - t1) as f64 * dt;
    let ratio = traj[t2][0] / traj[t1][0];
    // unwrap the accumulated phase with the per-step advance
    let rate = (traj[t1 + 1][0] / traj[t1][0]).arg() / dt;
    let turns = ((rate * span - ratio.arg()) / std::f64::consts::TAU).round();
    let pole = Complex64::new(ratio.norm().ln(), ratio.arg() + turns * std::f64::consts::TAU) / span;
    (-pole.im - css.delta_s_eff, -2.0 * pole.re - full.kappa_s)
}
