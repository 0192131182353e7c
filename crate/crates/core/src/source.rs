//! Source parameters and the Gaussian covariance of the SPDC and cascaded sources.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::phase_space::{
    apply_symplectic, beamsplitter_symplectic, direct_sum, mode_permutation, reorder, tmsv_cov,
    CovarianceMatrix, QuadOrdering,
};

/// Largest total click count accepted on the heralding detectors.
pub const MAX_HERALD_CLICKS: u32 = 8;

/// Photon counts `(n₃, n₄, n₅, n₆)` required on the Bell-measurement detectors.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "[u32; 4]", into = "[u32; 4]")]
pub struct HeraldPattern([u32; 4]);

impl HeraldPattern {
    pub fn new(clicks: [u32; 4]) -> Result<Self> {
        let total: u32 = clicks.iter().sum();
        if total > MAX_HERALD_CLICKS {
            return Err(Error::domain(
                "herald_pattern",
                format!("at most {MAX_HERALD_CLICKS} clicks in total, got {total}"),
            ));
        }
        Ok(Self(clicks))
    }

    pub fn clicks(&self) -> [u32; 4] {
        self.0
    }

    /// Count on 1-based optical mode `mode` (3..=6).
    pub fn count(&self, mode: usize) -> u32 {
        self.0[mode - 3]
    }

    pub fn total(&self) -> u32 {
        self.0.iter().sum()
    }
}

impl Default for HeraldPattern {
    fn default() -> Self {
        Self([1, 1, 0, 0])
    }
}

impl TryFrom<[u32; 4]> for HeraldPattern {
    type Error = Error;
    fn try_from(value: [u32; 4]) -> Result<Self> {
        Self::new(value)
    }
}

impl From<HeraldPattern> for [u32; 4] {
    fn from(p: HeraldPattern) -> Self {
        p.0
    }
}

fn default_transmissivity() -> f64 {
    0.5
}

/// Physical parameters of a cascaded source and its detectors.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SourceParams {
    /// Mean photon number per mode of each squeezer.
    pub mean_photon: f64,
    /// Efficiency of the Bell-measurement (heralding) arm, modes 3 to 6.
    pub bsm_efficiency: f64,
    /// Transmission efficiency towards the receivers, modes 1, 2, 7, 8.
    pub outcoupling_efficiency: f64,
    /// Receiver detector efficiency, modes 1, 2, 7, 8.
    pub detection_efficiency: f64,
    /// Per-detector dark-click probability.
    pub dark_click_prob: f64,
    #[serde(default)]
    pub herald_pattern: HeraldPattern,
    /// Transmissivity of the two Bell-measurement beam splitters.
    #[serde(default = "default_transmissivity")]
    pub bsm_transmissivity: f64,
}

impl Default for SourceParams {
    fn default() -> Self {
        Self {
            mean_photon: 0.1,
            bsm_efficiency: 1.0,
            outcoupling_efficiency: 1.0,
            detection_efficiency: 1.0,
            dark_click_prob: 0.0,
            herald_pattern: HeraldPattern::default(),
            bsm_transmissivity: 0.5,
        }
    }
}

fn unit_interval(field: &'static str, x: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&x) {
        return Err(Error::domain(field, format!("must lie in [0, 1], got {x}")));
    }
    Ok(())
}

impl SourceParams {
    pub fn with_mean_photon(mean_photon: f64) -> Self {
        Self {
            mean_photon,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !self.mean_photon.is_finite() || self.mean_photon < 0.0 {
            return Err(Error::domain(
                "mean_photon",
                format!("must be finite and ≥ 0, got {}", self.mean_photon),
            ));
        }
        unit_interval("bsm_efficiency", self.bsm_efficiency)?;
        unit_interval("outcoupling_efficiency", self.outcoupling_efficiency)?;
        unit_interval("detection_efficiency", self.detection_efficiency)?;
        unit_interval("bsm_transmissivity", self.bsm_transmissivity)?;
        if !(0.0..1.0).contains(&self.dark_click_prob) {
            return Err(Error::domain(
                "dark_click_prob",
                format!("must lie in [0, 1), got {}", self.dark_click_prob),
            ));
        }
        HeraldPattern::new(self.herald_pattern.0)?;
        Ok(())
    }

    /// Per-mode efficiencies for modes 1..=8.
    pub fn eta_vector(&self) -> [f64; 8] {
        let r = self.outcoupling_efficiency * self.detection_efficiency;
        let b = self.bsm_efficiency;
        [r, r, b, b, b, b, r, r]
    }
}

/// Four-mode dual-rail SPDC source (QPQP): two squeezers with their idlers swapped.
pub fn build_spdc_cov(mu: f64) -> Result<CovarianceMatrix> {
    let tmsv = tmsv_cov(mu, QuadOrdering::Qpqp)?;
    let pair = direct_sum(&tmsv, &tmsv)?;
    let swap = mode_permutation(4, &[1, 4, 3, 2], QuadOrdering::Qpqp)?;
    apply_symplectic(&swap, &pair)
}

/// Eight-mode cascaded source (QQPP) after the Bell-measurement splitters on
/// modes (3,5) and (4,6).
pub fn build_cascaded_cov(mu: f64, t: f64) -> Result<CovarianceMatrix> {
    if !(0.0..=1.0).contains(&t) {
        return Err(Error::domain("bsm_transmissivity", format!("must lie in [0, 1], got {t}")));
    }
    let spdc = build_spdc_cov(mu)?;
    let initial = reorder(&direct_sum(&spdc, &spdc)?, QuadOrdering::Qqpp);
    let s35 = beamsplitter_symplectic(8, 3, 5, t, QuadOrdering::Qqpp)?;
    let s46 = beamsplitter_symplectic(8, 4, 6, t, QuadOrdering::Qqpp)?;
    apply_symplectic(&s46, &apply_symplectic(&s35, &initial)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::phase_space::Quadrature::{P, Q};
    use nalgebra::DMatrix;
    use proptest::prelude::*;

    #[test]
    fn vacuum_sources_are_identity() {
        assert_eq!(build_spdc_cov(0.0).unwrap().entries(), &DMatrix::<f64>::identity(8, 8));
        let casc = build_cascaded_cov(0.0, 0.5).unwrap();
        assert!((casc.entries() - DMatrix::<f64>::identity(16, 16)).amax() < 1e-15);
    }

    #[test]
    fn spdc_correlation_pattern() {
        let v = build_spdc_cov(0.1).unwrap();
        assert!((v.determinant() - 1.0).abs() < 1e-9);
        assert!(v.get(Q(1), Q(4)).abs() > 0.1);
        assert_eq!(v.get(Q(1), Q(2)), 0.0);
        assert!(v.get(Q(2), Q(3)).abs() > 0.1);
        assert_eq!(v.get(Q(1), Q(3)), 0.0);
        assert!(v.get(P(1), P(4)) < 0.0);
    }

    #[test]
    fn unit_transmissivity_is_reordered_direct_sum() {
        let spdc = build_spdc_cov(0.7).unwrap();
        let expected = reorder(&direct_sum(&spdc, &spdc).unwrap(), QuadOrdering::Qqpp);
        assert_eq!(build_cascaded_cov(0.7, 1.0).unwrap(), expected);
    }

    #[test]
    fn sources_swap_symmetry() {
        let v = build_cascaded_cov(0.4, 0.5).unwrap();
        // Swapping the two SPDC sources relabels modes (1..4) <-> (5..8).
        // The splitters are not symmetric under that relabelling, so compare the
        // pre-splitter covariance and undo the relabelling.
        let w = build_cascaded_cov(0.4, 1.0).unwrap();
        let swap = mode_permutation(8, &[5, 6, 7, 8, 1, 2, 3, 4], QuadOrdering::Qqpp).unwrap();
        assert_eq!(apply_symplectic(&swap, &w).unwrap(), w);
        assert!((v.determinant() - 1.0).abs() < 1e-9);
    }

    #[test]
    fn params_validation() {
        let ok = SourceParams::default();
        ok.validate().unwrap();
        for bad in [
            SourceParams { mean_photon: -1.0, ..ok },
            SourceParams { bsm_efficiency: 1.5, ..ok },
            SourceParams { outcoupling_efficiency: -0.1, ..ok },
            SourceParams { detection_efficiency: f64::NAN, ..ok },
            SourceParams { dark_click_prob: 1.0, ..ok },
        ] {
            assert!(matches!(bad.validate(), Err(Error::Domain { .. })), "{bad:?}");
        }
        assert!(HeraldPattern::new([3, 3, 2, 1]).is_err());
        assert_eq!(HeraldPattern::default().clicks(), [1, 1, 0, 0]);
        let p = SourceParams {
            outcoupling_efficiency: 0.8,
            detection_efficiency: 0.5,
            bsm_efficiency: 0.3,
            ..ok
        };
        assert_eq!(p.eta_vector(), [0.4, 0.4, 0.3, 0.3, 0.3, 0.3, 0.4, 0.4]);
    }

    proptest! {
        #[test]
        fn cascaded_is_pure(mu in 0.0f64..20.0, t in 0.0f64..=1.0) {
            let v = build_cascaded_cov(mu, t).unwrap();
            prop_assert!((v.determinant() - 1.0).abs() < 1e-9);
            prop_assert!(v.entries().diagonal().iter().all(|&d| d >= 1.0 - 1e-12));
        }
    }
}
