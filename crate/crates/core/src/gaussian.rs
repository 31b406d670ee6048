//! Exact steady state of the linearized cavity + oscillator.
//!
//! Quadratures are ordered `(X_a, Y_a, X_b, Y_b)` with `X = (o + o^dag)/sqrt 2`
//! and `Y = (o - o^dag)/(i sqrt 2)`, so the vacuum covariance is `I/2`. The
//! fluctuations obey `dx/dt = A x + noise` with white noise of diffusion `D`,
//! and the stationary covariance solves `A V + V A^T + D = 0`.

use nalgebra::{Matrix4, SMatrix, SVector, SymmetricEigen};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::ReducedParams;

/// Drift eigenvalues must sit this far left of the imaginary axis (in units
/// of `omega_m`).
pub const STABILITY_MARGIN: f64 = 1e-9;
/// Relative Frobenius residual accepted for the Lyapunov solve.
pub const RESIDUAL_TOL: f64 = 1e-9;
/// Smallest eigenvalue of `V + (i/2) Omega` tolerated as round-off.
pub const PHYSICALITY_TOL: f64 = 1e-8;

pub type DriftMatrix = Matrix4<f64>;
pub type DiffusionMatrix = Matrix4<f64>;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GaussianSteadyState {
    /// Symmetrized second moments, row-major.
    pub covariance: [[f64; 4]; 4],
    pub stable: bool,
    pub max_real_eig: f64,
    /// Phonon occupancy.
    pub n_b: f64,
    /// Photon occupancy.
    pub n_a: f64,
    /// `||A V + V A^T + D||_F / ||D||_F`
    pub residual: f64,
    /// Smallest eigenvalue of `V + (i/2) Omega`.
    pub min_uncertainty_eig: f64,
}

impl GaussianSteadyState {
    pub fn covariance_matrix(&self) -> Matrix4<f64> {
        Matrix4::from_fn(|i, j| self.covariance[i][j])
    }
}

pub fn build_drift(params: &ReducedParams) -> DriftMatrix {
    let eps = params.eps();
    let (er, ei) = (2.0 * eps.re, 2.0 * eps.im);
    let half_k = 0.5 * params.kappa;
    let half_g = 0.5 * params.gamma;
    let (d, wm, g) = (params.delta, params.omega_m, params.g_coupling);
    #[rustfmt::skip]
    let a = Matrix4::new(
        ei - half_k,  d - er,       0.0,       0.0,
        -d - er,      -half_k - ei, -2.0 * g,  0.0,
        0.0,          0.0,          -half_g,   wm,
        -2.0 * g,     0.0,          -wm,       -half_g,
    );
    a
}

pub fn build_diffusion(params: &ReducedParams) -> DiffusionMatrix {
    let k = params.kappa;
    let b = &params.bath;
    let (s2, c2) = (2.0 * b.phi_s).sin_cos();
    let mech = params.gamma * (params.n_th + 0.5);
    let mut d = Matrix4::zeros();
    d[(0, 0)] = k * (b.n_s + 0.5 + b.m_s * c2);
    d[(1, 1)] = k * (b.n_s + 0.5 - b.m_s * c2);
    d[(0, 1)] = -k * b.m_s * s2;
    d[(1, 0)] = d[(0, 1)];
    d[(2, 2)] = mech;
    d[(3, 3)] = mech;
    d
}

/// Largest real part over the drift spectrum.
pub fn max_real_eigenvalue(a: &DriftMatrix) -> f64 {
    a.complex_eigenvalues()
        .iter()
        .map(|z| z.re)
        .fold(f64::NEG_INFINITY, f64::max)
}

/// `(stable, max Re eig)`; stable means every eigenvalue has real part below
/// `-STABILITY_MARGIN * omega_m`.
pub fn stability(params: &ReducedParams) -> (bool, f64) {
    let m = max_real_eigenvalue(&build_drift(params));
    (m < -STABILITY_MARGIN * params.omega_m, m)
}

/// Solves `A V + V A^T + D = 0` by vectorization into a 16x16 system.
pub fn solve_lyapunov(a: &Matrix4<f64>, d: &Matrix4<f64>) -> Result<Matrix4<f64>> {
    // column-major vec: vec(A V) = (I kron A) vec V, vec(V A^T) = (A kron I) vec V
    let mut big = SMatrix::<f64, 16, 16>::zeros();
    for i in 0..4 {
        for j in 0..4 {
            for k in 0..4 {
                big[(i + 4 * j, k + 4 * j)] += a[(i, k)];
                big[(i + 4 * j, i + 4 * k)] += a[(j, k)];
            }
        }
    }
    let rhs = SVector::<f64, 16>::from_iterator(d.iter().map(|x| -x));
    let sol = big
        .lu()
        .solve(&rhs)
        .ok_or_else(|| Error::Numerical("singular Lyapunov operator".into()))?;
    let v = Matrix4::from_column_slice(sol.as_slice());
    Ok(0.5 * (v + v.transpose()))
}

fn uncertainty_min_eig(v: &Matrix4<f64>) -> f64 {
    // V + (i/2) Omega is Hermitian; its spectrum (doubled) is that of the
    // real symmetric embedding [[V, -W], [W, V]] with W = Omega/2
    let mut w = Matrix4::zeros();
    for k in 0..2 {
        w[(2 * k, 2 * k + 1)] = 0.5;
        w[(2 * k + 1, 2 * k)] = -0.5;
    }
    let mut h = SMatrix::<f64, 8, 8>::zeros();
    h.fixed_view_mut::<4, 4>(0, 0).copy_from(v);
    h.fixed_view_mut::<4, 4>(4, 4).copy_from(v);
    h.fixed_view_mut::<4, 4>(0, 4).copy_from(&(-w));
    h.fixed_view_mut::<4, 4>(4, 0).copy_from(&w);
    SymmetricEigen::new(h).eigenvalues.min()
}

pub fn steady_state(params: &ReducedParams) -> Result<GaussianSteadyState> {
    let a = build_drift(params);
    let max_real_eig = max_real_eigenvalue(&a);
    if max_real_eig >= -STABILITY_MARGIN * params.omega_m || max_real_eig.is_nan() {
        return Err(Error::Unstable { max_real_eig });
    }
    let d = build_diffusion(params);
    let v = solve_lyapunov(&a, &d)?;
    let residual = (a * v + v * a.transpose() + d).norm() / d.norm();
    if !(residual <= RESIDUAL_TOL) {
        return Err(Error::Numerical(format!("Lyapunov residual {residual:e}")));
    }
    let min_uncertainty_eig = uncertainty_min_eig(&v);
    if min_uncertainty_eig < -PHYSICALITY_TOL {
        return Err(Error::Numerical(format!(
            "covariance violates the uncertainty relation (min eig {min_uncertainty_eig:e})"
        )));
    }
    let n_a = 0.5 * (v[(0, 0)] + v[(1, 1)] - 1.0);
    let n_b = 0.5 * (v[(2, 2)] + v[(3, 3)] - 1.0);
    let mut covariance = [[0.0; 4]; 4];
    for (i, row) in covariance.iter_mut().enumerate() {
        for (j, x) in row.iter_mut().enumerate() {
            *x = v[(i, j)];
        }
    }
    Ok(GaussianSteadyState {
        covariance,
        stable: true,
        max_real_eig,
        n_b,
        n_a,
        residual,
        min_uncertainty_eig,
    })
}
