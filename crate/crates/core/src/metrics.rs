//! Photonic figures of merit: trace, heralding probability, Bell fidelity and
//! Fock-basis density-matrix elements of the lossy cascaded source.

use std::sync::OnceLock;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::kfunction::{k_data, KFunctionData};
use crate::moments::{
    assemble_a, gaussian_prefactor, wick_moment, AMatrix, LinearForm, ModeSet, MomentRequest,
    MAX_FORMS, N_MODES,
};
use crate::source::{build_cascaded_cov, HeraldPattern, SourceParams};

/// Relative tolerance on the imaginary part of a physical (real) output.
pub const IMAG_TOLERANCE: f64 = 1e-9;
/// Magnitude below which the relative imaginary tolerance stops shrinking.
pub const IMAG_FLOOR: f64 = 1e-30;
/// Allowed excursion of a probability or fidelity outside `[0, 1]`.
pub const RANGE_TOLERANCE: f64 = 1e-9;

/// Receiver-side modes, traced out when only the heralding event matters.
pub const RECEIVER_MODES: [usize; 4] = [1, 2, 7, 8];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MetricFlag {
    ImaginaryResidual,
    OutOfRange,
}

/// A real-valued metric with its diagnostic imaginary part.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MetricResult {
    pub value: f64,
    pub imag_residual: f64,
    pub params_echo: SourceParams,
    pub flag: Option<MetricFlag>,
}

impl MetricResult {
    fn from_complex(z: Complex64, params: &SourceParams, bounded: bool) -> Self {
        let imag_residual = z.im.abs();
        let flag = if imag_residual >= IMAG_TOLERANCE * z.re.abs().max(IMAG_FLOOR) {
            Some(MetricFlag::ImaginaryResidual)
        } else if bounded && !(-RANGE_TOLERANCE..=1.0 + RANGE_TOLERANCE).contains(&z.re) {
            Some(MetricFlag::OutOfRange)
        } else {
            None
        };
        Self {
            value: z.re,
            imag_residual,
            params_echo: *params,
            flag,
        }
    }

    pub fn is_flagged(&self) -> bool {
        self.flag.is_some()
    }
}

/// Bell state the fidelity is measured against:
/// `(|1,0,…,0,1⟩ ± |0,1,…,1,0⟩)/√2` on the receiver modes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BellTarget {
    /// All four coherence terms added, as in the closed-form fidelity.
    #[default]
    Symmetric,
    /// Cross terms subtracted.
    Antisymmetric,
}

impl BellTarget {
    fn cross_sign(self) -> f64 {
        match self {
            BellTarget::Symmetric => 1.0,
            BellTarget::Antisymmetric => -1.0,
        }
    }
}

/// Covariance, kernel and lazily built exponent-matrix variants for one
/// parameter set. Safe to share between threads.
#[derive(Debug)]
pub struct SourceModel {
    params: SourceParams,
    kernel: KFunctionData,
    detected: OnceLock<Result<AMatrix>>,
    heralding: OnceLock<Result<AMatrix>>,
    traced: OnceLock<Result<AMatrix>>,
    reference: BranchReference,
}

/// Phases of `ln det A` for the detected, heralding and fully traced
/// variants at a neighbouring parameter point.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct BranchReference(pub [Option<f64>; 3]);

fn variant_slot(a: &AMatrix) -> usize {
    let traced = a.traced_modes();
    if traced == ModeSet::empty() {
        0
    } else if traced == ModeSet::all() {
        2
    } else {
        1
    }
}

impl SourceModel {
    pub fn new(params: SourceParams) -> Result<Self> {
        params.validate()?;
        let cov = build_cascaded_cov(params.mean_photon, params.bsm_transmissivity)?;
        Ok(Self {
            params,
            kernel: k_data(&cov)?,
            detected: OnceLock::new(),
            heralding: OnceLock::new(),
            traced: OnceLock::new(),
            reference: BranchReference::default(),
        })
    }

    /// Continue `√det A` from the branch used at a nearby parameter point
    /// instead of taking the principal branch.
    pub fn with_branch_reference(mut self, reference: BranchReference) -> Self {
        self.reference = reference;
        self
    }

    /// Phases in use for the variants built so far; feed to the next point
    /// of a sweep.
    pub fn branch_reference(&self) -> BranchReference {
        let mut out = self.reference;
        for (k, slot) in [&self.detected, &self.heralding, &self.traced].into_iter().enumerate() {
            if let Some(Ok(a)) = slot.get() {
                out.0[k] = Some(self.branch_phase(a));
            }
        }
        out
    }

    fn branch_phase(&self, a: &AMatrix) -> f64 {
        match self.reference.0[variant_slot(a)] {
            Some(r) => a.log_det().unwrapped_near(r),
            None => a.log_det().principal_phase(),
        }
    }

    pub fn params(&self) -> &SourceParams {
        &self.params
    }

    pub fn kernel(&self) -> &KFunctionData {
        &self.kernel
    }

    fn variant<'a>(&'a self, slot: &'a OnceLock<Result<AMatrix>>, traced: ModeSet) -> Result<&'a AMatrix> {
        slot.get_or_init(|| assemble_a(&self.kernel, &self.kernel, self.params.eta_vector(), traced))
            .as_ref()
            .map_err(Clone::clone)
    }

    /// Every mode detected (nothing traced).
    pub fn a_detected(&self) -> Result<&AMatrix> {
        self.variant(&self.detected, ModeSet::empty())
    }

    /// Receiver modes traced, heralding modes detected.
    pub fn a_heralding(&self) -> Result<&AMatrix> {
        self.variant(&self.heralding, ModeSet::from_modes(&RECEIVER_MODES))
    }

    /// Every mode traced.
    pub fn a_traced(&self) -> Result<&AMatrix> {
        self.variant(&self.traced, ModeSet::all())
    }

    pub fn prefactor(&self, a: &AMatrix) -> Complex64 {
        if self.reference.0[variant_slot(a)].is_none() {
            return gaussian_prefactor(a, &self.kernel, &self.kernel);
        }
        let log_det = Complex64::new(a.log_det().log_abs, self.branch_phase(a));
        let g = self.kernel.log_det_gamma();
        let log = -0.25 * (g + g) - 0.5 * log_det;
        log.exp()
    }

    /// `prefactor(A) · W(A, req)`.
    pub fn expectation(&self, a: &AMatrix, req: &MomentRequest) -> Result<Complex64> {
        Ok(self.prefactor(a) * wick_moment(a, req)?)
    }

    pub fn photonic_trace(&self) -> Result<MetricResult> {
        let a = self.a_traced()?;
        let z = self.expectation(a, &MomentRequest::new())?;
        Ok(MetricResult::from_complex(z, &self.params, true))
    }

    /// Probability of `pattern` on the heralding detectors with ideal
    /// (dark-count free) detectors, as a complex number before the realness check.
    pub fn pgen_complex(&self, pattern: HeraldPattern) -> Result<Complex64> {
        let a = self.a_heralding()?;
        self.expectation(a, &herald_request(pattern, &self.params.eta_vector()))
    }

    pub fn pgen(&self) -> Result<MetricResult> {
        let z = self.pgen_complex(self.params.herald_pattern)?;
        Ok(MetricResult::from_complex(z, &self.params, true))
    }

    /// Heralding probability with each clicked detector allowed to have
    /// fired on a dark count instead of a photon.
    pub fn pgen_with_dark(&self) -> Result<MetricResult> {
        let pd = self.params.dark_click_prob;
        let clicks = self.params.herald_pattern.clicks();
        let clicked: Vec<usize> = (0..4).filter(|&k| clicks[k] > 0).collect();
        let mut total = Complex64::new(0.0, 0.0);
        for subset in 0u32..(1 << clicked.len()) {
            let n_dark = subset.count_ones() as i32;
            let weight = pd.powi(n_dark) * (1.0 - pd).powi(clicked.len() as i32 - n_dark);
            if weight == 0.0 {
                continue;
            }
            let mut reduced = clicks;
            for (bit, &k) in clicked.iter().enumerate() {
                if subset & (1 << bit) != 0 {
                    reduced[k] = 0;
                }
            }
            total += weight * self.pgen_complex(HeraldPattern::new(reduced)?)?;
        }
        Ok(MetricResult::from_complex(total, &self.params, true))
    }

    /// The four receiver-mode coherence terms `⟨x|ρ|y⟩`, x, y ∈ {|1,0,…,0,1⟩, |0,1,…,1,0⟩},
    /// jointly with the herald pattern, in the order (xx, xy, yx, yy).
    pub fn bell_terms(&self) -> Result<[Complex64; 4]> {
        let herald = self.params.herald_pattern.clicks();
        let mut first = [0u32; N_MODES];
        let mut second = [0u32; N_MODES];
        first[2..6].copy_from_slice(&herald);
        second[2..6].copy_from_slice(&herald);
        first[0] = 1;
        first[7] = 1;
        second[1] = 1;
        second[6] = 1;
        Ok([
            self.fock_element(first, first)?,
            self.fock_element(first, second)?,
            self.fock_element(second, first)?,
            self.fock_element(second, second)?,
        ])
    }

    pub fn fidelity(&self) -> Result<MetricResult> {
        self.fidelity_with_target(BellTarget::default())
    }

    pub fn fidelity_with_target(&self, target: BellTarget) -> Result<MetricResult> {
        let p = self.pgen_complex(self.params.herald_pattern)?;
        if p.re <= 0.0 {
            return Err(Error::UndefinedFidelity);
        }
        let [xx, xy, yx, yy] = self.bell_terms()?;
        let s = target.cross_sign();
        let numerator = 0.5 * (xx + s * xy + s * yx + yy);
        Ok(MetricResult::from_complex(numerator / p, &self.params, true))
    }

    /// `⟨d|ρ|g⟩` for the lossy eight-mode state, with no mode traced.
    pub fn fock_element(&self, d: [u32; N_MODES], g: [u32; N_MODES]) -> Result<Complex64> {
        let total: u32 = d.iter().chain(g.iter()).sum();
        if total as usize > MAX_FORMS {
            return Err(Error::Contract(format!(
                "Fock element with {total} photons exceeds the cap of {MAX_FORMS}"
            )));
        }
        let eta = self.params.eta_vector();
        let mut req = MomentRequest::new();
        let mut scale = 1.0;
        for j in 0..N_MODES {
            req.push(LinearForm::alpha(j + 1), d[j]);
            req.push(LinearForm::beta_conj(j + 1), g[j]);
            scale *= eta[j].sqrt().powi((d[j] + g[j]) as i32)
                / (factorial(d[j]) * factorial(g[j])).sqrt();
        }
        let a = self.a_detected()?;
        self.expectation(a, &req.with_prefactor(Complex64::new(scale, 0.0)))
    }
}

pub(crate) fn factorial(n: u32) -> f64 {
    (1..=n).map(f64::from).product()
}

/// `∏_{j=3..6} (η_j α_j β_j*)^{n_j} / n_j!` as a moment request.
pub(crate) fn herald_request(pattern: HeraldPattern, eta: &[f64; N_MODES]) -> MomentRequest {
    let mut req = MomentRequest::new();
    let mut scale = 1.0;
    for mode in 3..=6 {
        let n = pattern.count(mode);
        req.push(LinearForm::alpha(mode), n);
        req.push(LinearForm::beta_conj(mode), n);
        scale *= eta[mode - 1].powi(n as i32) / factorial(n);
    }
    req.with_prefactor(Complex64::new(scale, 0.0))
}

pub fn photonic_trace(params: &SourceParams) -> Result<MetricResult> {
    SourceModel::new(*params)?.photonic_trace()
}

pub fn pgen(params: &SourceParams) -> Result<MetricResult> {
    SourceModel::new(*params)?.pgen()
}

pub fn pgen_with_dark(params: &SourceParams) -> Result<MetricResult> {
    SourceModel::new(*params)?.pgen_with_dark()
}

pub fn fidelity(params: &SourceParams) -> Result<MetricResult> {
    SourceModel::new(*params)?.fidelity()
}

pub fn fock_element(params: &SourceParams, d: [u32; N_MODES], g: [u32; N_MODES]) -> Result<Complex64> {
    SourceModel::new(*params)?.fock_element(d, g)
}
