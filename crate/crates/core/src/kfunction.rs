//! Coherent-basis kernel of a pure zero-mean Gaussian state.
//!
//! For a state with covariance `V`, the overlap with a coherent state
//! `|α⟩`, `α_k = (q_k + i p_k)/√2`, is
//! `⟨α|ψ⟩ = exp(−½ xᵀ𝓑x) / (det Γ)^{1/4}` with `Γ = κV + I/2`.

use nalgebra::{Cholesky, DMatrix, Dyn};
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::phase_space::{CovarianceMatrix, QuadOrdering};

/// Factor that maps the stored covariance (vacuum variance 1) onto the
/// vacuum-variance-½ convention the kernel formulas assume.
pub const CONVENTION_SCALE: f64 = 0.5;

/// Gaussian kernel data derived from one covariance matrix.
#[derive(Debug, Clone)]
pub struct KFunctionData {
    n_modes: usize,
    gamma: DMatrix<f64>,
    log_det_gamma: f64,
    script_b: DMatrix<Complex64>,
    convention_scale: f64,
}

impl KFunctionData {
    pub fn n_modes(&self) -> usize {
        self.n_modes
    }

    pub fn gamma(&self) -> &DMatrix<f64> {
        &self.gamma
    }

    pub fn log_det_gamma(&self) -> f64 {
        self.log_det_gamma
    }

    /// Exponent matrix over `(q_1..q_N, p_1..p_N)`.
    pub fn script_b(&self) -> &DMatrix<Complex64> {
        &self.script_b
    }

    pub fn convention_scale(&self) -> f64 {
        self.convention_scale
    }

    /// `⟨α|ψ⟩` for the multimode coherent amplitude `alpha`.
    pub fn coherent_overlap(&self, alpha: &[Complex64]) -> Complex64 {
        assert_eq!(alpha.len(), self.n_modes, "one amplitude per mode");
        let sqrt2 = std::f64::consts::SQRT_2;
        let x: Vec<Complex64> = alpha
            .iter()
            .map(|a| Complex64::from(a.re * sqrt2))
            .chain(alpha.iter().map(|a| Complex64::from(a.im * sqrt2)))
            .collect();
        let x = DMatrix::from_column_slice(2 * self.n_modes, 1, &x);
        let quad = (x.transpose() * &self.script_b * &x)[(0, 0)];
        (-0.5 * quad).exp() * (-0.25 * self.log_det_gamma).exp()
    }
}

/// Kernel data of a QQPP covariance with the standard convention scale.
pub fn k_data(cov: &CovarianceMatrix) -> Result<KFunctionData> {
    k_data_with_scale(cov, CONVENTION_SCALE)
}

/// Kernel data with an explicit covariance prescale `κ`.
pub fn k_data_with_scale(cov: &CovarianceMatrix, kappa: f64) -> Result<KFunctionData> {
    if cov.ordering() != QuadOrdering::Qqpp {
        return Err(Error::Contract("k-function requires QQPP ordering".into()));
    }
    let n = cov.n_modes();
    let gamma = cov.entries() * kappa + DMatrix::identity(2 * n, 2 * n) * 0.5;
    let chol = Cholesky::<f64, Dyn>::new(gamma.clone())
        .ok_or_else(|| Error::Numerical("Γ is not positive definite".into()))?;
    let log_det_gamma = 2.0 * chol.l_dirty().diagonal().iter().map(|d| d.ln()).sum::<f64>();
    let inv = chol.inverse();

    let a = inv.view((0, 0), (n, n));
    let c = inv.view((0, n), (n, n));
    let ct = inv.view((n, 0), (n, n));
    let b = inv.view((n, n), (n, n));
    let half_i = Complex64::new(0.0, 0.5);

    let mut script_b = DMatrix::<Complex64>::zeros(2 * n, 2 * n);
    for r in 0..n {
        for s in 0..n {
            let c_sym = c[(r, s)] + ct[(r, s)];
            let a_minus_b = a[(r, s)] - b[(r, s)];
            script_b[(r, s)] = Complex64::from(a[(r, s)]) + half_i * c_sym;
            script_b[(r, n + s)] = Complex64::from(c[(r, s)]) - half_i * a_minus_b;
            script_b[(n + r, s)] = Complex64::from(ct[(r, s)]) - half_i * a_minus_b;
            script_b[(n + r, n + s)] = Complex64::from(b[(r, s)]) - half_i * c_sym;
        }
    }
    script_b *= Complex64::from(0.5);
    let script_b = (&script_b + script_b.transpose()) * Complex64::from(0.5);

    Ok(KFunctionData {
        n_modes: n,
        gamma,
        log_det_gamma,
        script_b,
        convention_scale: kappa,
    })
}
