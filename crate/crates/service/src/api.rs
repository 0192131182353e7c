//! Wire schema and the single function that turns a request into numbers.

use serde::{Deserialize, Serialize};
use zalmtwin_core::memory::{spin_spin_dm_with_dark, ClickPattern, SpinSpinDM};
use zalmtwin_core::metrics::{BellTarget, MetricResult, SourceModel};
use zalmtwin_core::source::{HeraldPattern, SourceParams};
use zalmtwin_core::{Error, ENGINE_VERSION};

use crate::error::ApiError;

fn one() -> f64 {
    1.0
}

fn half() -> f64 {
    0.5
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MetricsRequest {
    pub mean_photon: f64,
    #[serde(default = "one")]
    pub bsm_efficiency: f64,
    #[serde(default = "one")]
    pub outcoupling_efficiency: f64,
    #[serde(default = "one")]
    pub detection_efficiency: f64,
    #[serde(default)]
    pub dark_click_prob: f64,
    #[serde(default)]
    pub herald_pattern: Option<[u32; 4]>,
    /// All eight detector counts; requests the memory-loaded state.
    #[serde(default)]
    pub click_pattern: Option<[u32; 8]>,
    #[serde(default = "half")]
    pub bsm_transmissivity: f64,
    #[serde(default)]
    pub bell_target: BellTarget,
}

impl MetricsRequest {
    pub fn new(mean_photon: f64) -> Self {
        Self {
            mean_photon,
            bsm_efficiency: 1.0,
            outcoupling_efficiency: 1.0,
            detection_efficiency: 1.0,
            dark_click_prob: 0.0,
            herald_pattern: None,
            click_pattern: None,
            bsm_transmissivity: 0.5,
            bell_target: BellTarget::default(),
        }
    }

    /// Library parameters, validated.
    pub fn params(&self) -> Result<SourceParams, ApiError> {
        let herald_pattern = match self.herald_pattern {
            Some(h) => HeraldPattern::new(h).map_err(ApiError::from_engine)?,
            None => HeraldPattern::default(),
        };
        let p = SourceParams {
            mean_photon: self.mean_photon,
            bsm_efficiency: self.bsm_efficiency,
            outcoupling_efficiency: self.outcoupling_efficiency,
            detection_efficiency: self.detection_efficiency,
            dark_click_prob: self.dark_click_prob,
            herald_pattern,
            bsm_transmissivity: self.bsm_transmissivity,
        };
        p.validate().map_err(ApiError::from_engine)?;
        Ok(p)
    }

    pub fn click(&self) -> Result<Option<ClickPattern>, ApiError> {
        self.click_pattern
            .map(ClickPattern::new)
            .transpose()
            .map_err(ApiError::from_engine)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ImagResiduals {
    pub pgen: f64,
    pub pgen_dark: f64,
    pub fidelity: Option<f64>,
    pub trace: f64,
}

/// Complex 4×4 matrix as nested `[re, im]` pairs.
pub type WireMatrix = [[[f64; 2]; 4]; 4];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricsResponse {
    pub pgen: f64,
    /// Heralding probability with dark clicks on the heralding detectors.
    pub pgen_dark: f64,
    /// `null` when the heralding probability vanishes.
    pub fidelity: Option<f64>,
    pub trace: f64,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub spin_dm: Option<WireMatrix>,
    pub imag_residuals: ImagResiduals,
    /// `"<metric>:<flag>"` for every flagged metric.
    pub flags: Vec<String>,
    pub engine_version: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpinDmResponse {
    pub spin_dm: WireMatrix,
    pub trace: f64,
    pub click_pattern: [u32; 8],
    pub engine_version: String,
}

pub fn wire_matrix(dm: &SpinSpinDM) -> WireMatrix {
    let mut out = [[[0.0; 2]; 4]; 4];
    for (r, row) in out.iter_mut().enumerate() {
        for (c, cell) in row.iter_mut().enumerate() {
            let z = dm.entries[(r, c)];
            *cell = [z.re, z.im];
        }
    }
    out
}

fn note(flags: &mut Vec<String>, name: &str, m: &MetricResult) {
    if let Some(f) = m.flag {
        let tag = serde_json::to_value(f).ok().and_then(|v| v.as_str().map(str::to_owned));
        flags.push(format!("{name}:{}", tag.unwrap_or_default()));
    }
}

fn ensure_finite(values: &[(&str, f64)]) -> Result<(), ApiError> {
    let bad: Vec<String> = values
        .iter()
        .filter(|(_, v)| !v.is_finite())
        .map(|(n, v)| format!("{n}={v}"))
        .collect();
    if bad.is_empty() {
        Ok(())
    } else {
        Err(ApiError::numerical("non-finite result", bad))
    }
}

/// Evaluate every metric for one request. The HTTP handlers and the command
/// line both go through here.
pub fn compute_metrics(req: &MetricsRequest) -> Result<MetricsResponse, ApiError> {
    let params = req.params()?;
    let click = req.click()?;
    let model = SourceModel::new(params).map_err(ApiError::from_engine)?;
    let pgen = model.pgen().map_err(ApiError::from_engine)?;
    let pgen_dark = model.pgen_with_dark().map_err(ApiError::from_engine)?;
    let trace = model.photonic_trace().map_err(ApiError::from_engine)?;
    let fidelity = match model.fidelity_with_target(req.bell_target) {
        Ok(f) => Some(f),
        Err(Error::UndefinedFidelity) => None,
        Err(e) => return Err(ApiError::from_engine(e)),
    };
    let spin_dm = click
        .map(|c| spin_spin_dm_with_dark(&params, &c).map_err(ApiError::from_engine))
        .transpose()?;

    let mut flags = Vec::new();
    note(&mut flags, "pgen", &pgen);
    note(&mut flags, "pgen_dark", &pgen_dark);
    note(&mut flags, "trace", &trace);
    if let Some(f) = &fidelity {
        note(&mut flags, "fidelity", f);
    }
    let mut numbers = vec![
        ("pgen", pgen.value),
        ("pgen_dark", pgen_dark.value),
        ("trace", trace.value),
    ];
    if let Some(f) = &fidelity {
        numbers.push(("fidelity", f.value));
    }
    if let Some(dm) = &spin_dm {
        numbers.extend(dm.entries.iter().flat_map(|z| [("spin_dm", z.re), ("spin_dm", z.im)]));
    }
    ensure_finite(&numbers)?;

    Ok(MetricsResponse {
        pgen: pgen.value,
        pgen_dark: pgen_dark.value,
        fidelity: fidelity.map(|f| f.value),
        trace: trace.value,
        spin_dm: spin_dm.as_ref().map(wire_matrix),
        imag_residuals: ImagResiduals {
            pgen: pgen.imag_residual,
            pgen_dark: pgen_dark.imag_residual,
            fidelity: fidelity.map(|f| f.imag_residual),
            trace: trace.imag_residual,
        },
        flags,
        engine_version: ENGINE_VERSION.to_owned(),
    })
}

/// Memory-loaded state only; the click pattern defaults to the base pattern.
pub fn compute_spin_dm(req: &MetricsRequest) -> Result<SpinDmResponse, ApiError> {
    let params = req.params()?;
    let click = req.click()?.unwrap_or_default();
    let dm = spin_spin_dm_with_dark(&params, &click).map_err(ApiError::from_engine)?;
    let spin_dm = wire_matrix(&dm);
    ensure_finite(
        &spin_dm
            .iter()
            .flatten()
            .flatten()
            .map(|&v| ("spin_dm", v))
            .collect::<Vec<_>>(),
    )?;
    Ok(SpinDmResponse {
        spin_dm,
        trace: dm.trace(),
        click_pattern: click.counts(),
        engine_version: ENGINE_VERSION.to_owned(),
    })
}
