use std::f64::consts::{PI, TAU};

use nalgebra::DMatrix;
use num_complex::Complex64;

use super::hafnian::hafnian;
use super::request::{p_alpha, p_beta, q_alpha, q_beta, MomentRequest, MAX_FORMS, N_MODES, N_VARS};
use crate::error::{Error, Result};
use crate::kfunction::KFunctionData;

/// Complex logarithm of a determinant, accumulated factor by factor.
///
/// `phase` is the raw sum of the factors' principal arguments; it is not
/// reduced, so two evaluations can be compared for a branch jump.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LogDet {
    pub log_abs: f64,
    pub phase: f64,
}

impl LogDet {
    /// Phase reduced to `(−π, π]`.
    pub fn principal_phase(&self) -> f64 {
        let mut p = self.phase % TAU;
        if p > PI {
            p -= TAU;
        } else if p <= -PI {
            p += TAU;
        }
        p
    }

    /// Principal-branch `ln det`.
    pub fn principal(&self) -> Complex64 {
        Complex64::new(self.log_abs, self.principal_phase())
    }

    /// Phase brought within π of `reference`, for continuation along a sweep.
    pub fn unwrapped_near(&self, reference: f64) -> f64 {
        let p = self.principal_phase();
        p + TAU * ((reference - p) / TAU).round()
    }
}

/// Set of 1-based optical modes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub struct ModeSet(u8);

impl ModeSet {
    pub fn empty() -> Self {
        Self(0)
    }

    pub fn all() -> Self {
        Self(u8::MAX)
    }

    pub fn from_modes(modes: &[usize]) -> Self {
        Self(modes.iter().fold(0u8, |acc, &m| acc | 1 << (m - 1)))
    }

    pub fn contains(&self, mode: usize) -> bool {
        self.0 & (1 << (mode - 1)) != 0
    }

    pub fn modes(&self) -> Vec<usize> {
        (1..=N_MODES).filter(|&m| self.contains(m)).collect()
    }
}

/// Exponent matrix of the doubled (ket/bra) Gaussian integrand, with its
/// inverse cached for moment evaluation.
#[derive(Debug, Clone)]
pub struct AMatrix {
    entries: DMatrix<Complex64>,
    inverse: DMatrix<Complex64>,
    eta: [f64; N_MODES],
    traced: ModeSet,
    log_det: LogDet,
}

impl AMatrix {
    pub fn entries(&self) -> &DMatrix<Complex64> {
        &self.entries
    }

    pub fn inverse(&self) -> &DMatrix<Complex64> {
        &self.inverse
    }

    pub fn eta(&self) -> [f64; N_MODES] {
        self.eta
    }

    pub fn traced_modes(&self) -> ModeSet {
        self.traced
    }

    pub fn log_det(&self) -> LogDet {
        self.log_det
    }
}

/// Assemble the 32×32 exponent matrix for the given per-mode efficiencies.
///
/// Detected modes couple ket and bra amplitudes with weight `η−1`; traced
/// modes with weight `−1`.
pub fn assemble_a(
    ka: &KFunctionData,
    kb: &KFunctionData,
    eta: [f64; N_MODES],
    traced: ModeSet,
) -> Result<AMatrix> {
    if ka.n_modes() != N_MODES || kb.n_modes() != N_MODES {
        return Err(Error::Contract(format!("A matrix needs {N_MODES}-mode kernels")));
    }
    if let Some(bad) = eta.iter().find(|e| !(0.0..=1.0).contains(*e)) {
        return Err(Error::domain("eta", format!("efficiency {bad} outside [0, 1]")));
    }
    let half = 2 * N_MODES;
    let mut a = DMatrix::<Complex64>::zeros(N_VARS, N_VARS);
    a.view_mut((0, 0), (half, half)).copy_from(ka.script_b());
    a.view_mut((half, half), (half, half))
        .copy_from(&kb.script_b().map(|z| z.conj()));
    for k in 0..N_VARS {
        a[(k, k)] += Complex64::new(0.5, 0.0);
    }

    // (c/2)(q_α + i p_α)(q_β − i p_β), split symmetrically over both triangles.
    for mode in 1..=N_MODES {
        let weight = if traced.contains(mode) { -1.0 } else { eta[mode - 1] - 1.0 };
        let h = weight / 2.0;
        let couplings = [
            (q_alpha(mode), q_beta(mode), Complex64::new(h, 0.0)),
            (q_alpha(mode), p_beta(mode), Complex64::new(0.0, -h)),
            (p_alpha(mode), q_beta(mode), Complex64::new(0.0, h)),
            (p_alpha(mode), p_beta(mode), Complex64::new(h, 0.0)),
        ];
        for (r, c, v) in couplings {
            a[(r, c)] += v;
            a[(c, r)] += v;
        }
    }
    let a = (&a + a.transpose()) * Complex64::new(0.5, 0.0);

    let lu = a.clone().lu();
    let mut log_det = LogDet {
        log_abs: 0.0,
        phase: if lu.p().determinant::<f64>() < 0.0 { PI } else { 0.0 },
    };
    for d in lu.u().diagonal().iter() {
        if d.norm() == 0.0 || !d.norm().is_finite() {
            return Err(Error::Numerical("A matrix is singular".into()));
        }
        log_det.log_abs += d.norm().ln();
        log_det.phase += d.arg();
    }
    let inverse = lu
        .try_inverse()
        .ok_or_else(|| Error::Numerical("A matrix is singular".into()))?;

    Ok(AMatrix {
        entries: a,
        inverse,
        eta,
        traced,
        log_det,
    })
}

/// Normalised Gaussian moment `⟨∏ ℓ_k(x)⟩` times the request's prefactor,
/// with two-point function `A⁻¹`.
pub fn wick_moment(a: &AMatrix, req: &MomentRequest) -> Result<Complex64> {
    let n = req.forms.len();
    if n > MAX_FORMS {
        return Err(Error::Contract(format!("{n} forms exceed the cap of {MAX_FORMS}")));
    }
    if n % 2 == 1 {
        return Ok(Complex64::new(0.0, 0.0));
    }
    let rows: Vec<Complex64> = req
        .forms
        .iter()
        .flat_map(|f| f.coeffs().iter().copied())
        .collect();
    let l = DMatrix::from_row_slice(n, N_VARS, &rows);
    Ok(req.scalar_prefactor * wick_contract(&a.inverse, &l)?)
}

/// `haf(L·M·Lᵀ)`: the Gaussian moment of the rows of `l` under two-point
/// matrix `two_point`.
pub fn wick_contract(two_point: &DMatrix<Complex64>, l: &DMatrix<Complex64>) -> Result<Complex64> {
    if l.ncols() != two_point.nrows() {
        return Err(Error::Contract("form length does not match the matrix".into()));
    }
    if l.nrows() % 2 == 1 {
        return Ok(Complex64::new(0.0, 0.0));
    }
    hafnian(&(l * two_point * l.transpose()))
}

/// `1 / ((det Γ_a)^{1/4} (det Γ_b*)^{1/4} √det A)` on the principal branch.
pub fn gaussian_prefactor(a: &AMatrix, ka: &KFunctionData, kb: &KFunctionData) -> Complex64 {
    let log = -0.25 * (ka.log_det_gamma() + kb.log_det_gamma()) - 0.5 * a.log_det.principal();
    log.exp()
}
