use clap::Args;
use zalmtwin_core::metrics::BellTarget;
use zalmtwin_service::MetricsRequest;

/// Comma-separated detector counts, e.g. `1,1,0,0`.
pub fn parse_counts<const N: usize>(text: &str) -> Result<[u32; N], String> {
    let counts: Vec<u32> = text
        .split(',')
        .map(|t| t.trim().parse::<u32>().map_err(|e| format!("`{t}`: {e}")))
        .collect::<Result<_, _>>()?;
    counts
        .try_into()
        .map_err(|v: Vec<u32>| format!("expected {N} counts, got {}", v.len()))
}

fn parse_target(text: &str) -> Result<BellTarget, String> {
    match text {
        "symmetric" => Ok(BellTarget::Symmetric),
        "antisymmetric" => Ok(BellTarget::Antisymmetric),
        other => Err(format!("unknown Bell target `{other}` (symmetric|antisymmetric)")),
    }
}

#[derive(Debug, Clone, Args)]
pub struct SourceArgs {
    #[arg(long, default_value_t = 0.1)]
    pub mean_photon: f64,
    #[arg(long, default_value_t = 1.0)]
    pub bsm_efficiency: f64,
    #[arg(long, default_value_t = 1.0)]
    pub outcoupling_efficiency: f64,
    #[arg(long, default_value_t = 1.0)]
    pub detection_efficiency: f64,
    #[arg(long, default_value_t = 0.0)]
    pub dark_click_prob: f64,
    #[arg(long, default_value_t = 0.5)]
    pub bsm_transmissivity: f64,
    /// Heralding detector counts on modes 3..6.
    #[arg(long, value_parser = parse_counts::<4>)]
    pub herald_pattern: Option<[u32; 4]>,
    /// Counts on all eight detectors; enables the memory-loaded state.
    #[arg(long, value_parser = parse_counts::<8>)]
    pub click_pattern: Option<[u32; 8]>,
    #[arg(long, value_parser = parse_target, default_value = "symmetric")]
    pub bell_target: BellTarget,
}

impl SourceArgs {
    pub fn request(&self) -> MetricsRequest {
        MetricsRequest {
            mean_photon: self.mean_photon,
            bsm_efficiency: self.bsm_efficiency,
            outcoupling_efficiency: self.outcoupling_efficiency,
            detection_efficiency: self.detection_efficiency,
            dark_click_prob: self.dark_click_prob,
            herald_pattern: self.herald_pattern,
            click_pattern: self.click_pattern,
            bsm_transmissivity: self.bsm_transmissivity,
            bell_target: self.bell_target,
        }
    }
}
