//! One-parameter sweeps with deterministic CSV/JSON output.

use std::fmt;
use std::io::Write;
use std::time::Instant;

use clap::ValueEnum;
use serde_json::{Map, Value};
use zalmtwin_core::memory::{spin_spin_dm_mixture, ClickPattern};
use zalmtwin_core::metrics::{BranchReference, MetricResult, SourceModel};
use zalmtwin_core::source::SourceParams;
use zalmtwin_core::Error;
use zalmtwin_service::MetricsRequest;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
#[value(rename_all = "snake_case")]
pub enum SweptParameter {
    MeanPhoton,
    BsmEfficiency,
    OutcouplingEfficiency,
    DetectionEfficiency,
    DarkClickProb,
    BsmTransmissivity,
}

impl SweptParameter {
    pub fn name(self) -> &'static str {
        match self {
            SweptParameter::MeanPhoton => "mean_photon",
            SweptParameter::BsmEfficiency => "bsm_efficiency",
            SweptParameter::OutcouplingEfficiency => "outcoupling_efficiency",
            SweptParameter::DetectionEfficiency => "detection_efficiency",
            SweptParameter::DarkClickProb => "dark_click_prob",
            SweptParameter::BsmTransmissivity => "bsm_transmissivity",
        }
    }

    fn set(self, p: &mut SourceParams, value: f64) {
        let slot = match self {
            SweptParameter::MeanPhoton => &mut p.mean_photon,
            SweptParameter::BsmEfficiency => &mut p.bsm_efficiency,
            SweptParameter::OutcouplingEfficiency => &mut p.outcoupling_efficiency,
            SweptParameter::DetectionEfficiency => &mut p.detection_efficiency,
            SweptParameter::DarkClickProb => &mut p.dark_click_prob,
            SweptParameter::BsmTransmissivity => &mut p.bsm_transmissivity,
        };
        *slot = value;
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Scale {
    Linear,
    Log,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
#[value(rename_all = "snake_case")]
pub enum SweepMetric {
    Pgen,
    PgenDark,
    Fidelity,
    SpinDm,
    Trace,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Clone)]
pub struct SweepConfig {
    pub parameter: SweptParameter,
    pub from: f64,
    pub to: f64,
    pub steps: usize,
    pub scale: Scale,
    /// Fixed values of every other parameter.
    pub base: MetricsRequest,
    pub metrics: Vec<SweepMetric>,
    /// Adds a wall-time column; off by default so output is reproducible.
    pub timing: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConfigError(pub String);

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for ConfigError {}

impl SweepConfig {
    pub fn validate(&self) -> Result<(), ConfigError> {
        if !(self.from.is_finite() && self.to.is_finite()) || self.from >= self.to {
            return Err(ConfigError(format!("need from < to, got {} and {}", self.from, self.to)));
        }
        if self.steps < 2 {
            return Err(ConfigError(format!("need at least 2 steps, got {}", self.steps)));
        }
        if self.scale == Scale::Log && self.from <= 0.0 {
            return Err(ConfigError("log scale needs from > 0".into()));
        }
        if self.metrics.is_empty() {
            return Err(ConfigError("no metrics requested".into()));
        }
        self.base
            .params()
            .map_err(|e| ConfigError(format!("fixed parameters: {}", e.body.message)))?;
        self.base
            .click()
            .map_err(|e| ConfigError(format!("click pattern: {}", e.body.message)))?;
        Ok(())
    }

    pub fn grid(&self) -> Vec<f64> {
        let last = (self.steps - 1) as f64;
        (0..self.steps)
            .map(|k| {
                if k == 0 {
                    return self.from;
                }
                if k + 1 == self.steps {
                    return self.to;
                }
                let s = k as f64 / last;
                match self.scale {
                    Scale::Linear => self.from + s * (self.to - self.from),
                    Scale::Log => (self.from.ln() + s * (self.to.ln() - self.from.ln())).exp(),
                }
            })
            .collect()
    }

    /// Column names after the swept value and before the diagnostics.
    pub fn metric_columns(&self) -> Vec<String> {
        let mut cols = Vec::new();
        for m in &self.metrics {
            match m {
                SweepMetric::Pgen => cols.push("pgen".to_owned()),
                SweepMetric::PgenDark => cols.push("pgen_dark".to_owned()),
                SweepMetric::Fidelity => cols.push("fidelity".to_owned()),
                SweepMetric::Trace => cols.push("trace".to_owned()),
                SweepMetric::SpinDm => {
                    for r in 0..4 {
                        for c in 0..4 {
                            cols.push(format!("spin_dm_{r}{c}_re"));
                            cols.push(format!("spin_dm_{r}{c}_im"));
                        }
                    }
                }
            }
        }
        cols
    }

    pub fn header(&self) -> Vec<String> {
        let mut h = vec![self.parameter.name().to_owned()];
        h.extend(self.metric_columns());
        h.push("imag_residual".into());
        if self.timing {
            h.push("wall_time_s".into());
        }
        h.push("error".into());
        h
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub value: f64,
    /// One cell per metric column; `None` where the metric is unavailable.
    pub cells: Vec<Option<f64>>,
    pub imag_residual: f64,
    pub wall_time: f64,
    pub error: Option<String>,
}

struct PointEval<'a> {
    model: &'a SourceModel,
    cells: Vec<Option<f64>>,
    imag: f64,
    problems: Vec<String>,
}

impl PointEval<'_> {
    fn record(&mut self, name: &str, r: Result<MetricResult, Error>) {
        match r {
            Ok(m) => {
                self.imag = self.imag.max(m.imag_residual);
                if let Some(flag) = m.flag {
                    self.problems.push(format!("{name}:{flag:?}"));
                }
                self.cells.push(Some(m.value));
            }
            Err(e) => {
                self.problems.push(format!("{name}:{e}"));
                self.cells.push(None);
            }
        }
    }

    fn spin_dm(&mut self, click: &ClickPattern) {
        match spin_spin_dm_mixture(self.model, click) {
            Ok(dm) => self
                .cells
                .extend(dm.entries.transpose().iter().flat_map(|z| [Some(z.re), Some(z.im)])),
            Err(e) => {
                self.problems.push(format!("spin_dm:{e}"));
                self.cells.extend(std::iter::repeat_n(None, 32));
            }
        }
    }
}

/// Cells, largest imaginary residual, problems, branch for the next point.
type PointOutput = (Vec<Option<f64>>, f64, Vec<String>, BranchReference);

fn evaluate(config: &SweepConfig, params: SourceParams, reference: BranchReference) -> Result<PointOutput, Error> {
    let model = SourceModel::new(params)?.with_branch_reference(reference);
    let click = config.base.click_pattern.map(ClickPattern::new).transpose()?.unwrap_or_default();
    let mut eval = PointEval {
        model: &model,
        cells: Vec::new(),
        imag: 0.0,
        problems: Vec::new(),
    };
    for m in &config.metrics {
        match m {
            SweepMetric::Pgen => eval.record("pgen", model.pgen()),
            SweepMetric::PgenDark => eval.record("pgen_dark", model.pgen_with_dark()),
            SweepMetric::Fidelity => eval.record("fidelity", model.fidelity_with_target(config.base.bell_target)),
            SweepMetric::Trace => eval.record("trace", model.photonic_trace()),
            SweepMetric::SpinDm => eval.spin_dm(&click),
        }
    }
    Ok((eval.cells, eval.imag, eval.problems, model.branch_reference()))
}

/// Evaluate every grid point in order. Failures are reported in the row's
/// error column and the sweep carries on.
pub fn run_sweep(config: &SweepConfig) -> Result<Vec<SweepRow>, ConfigError> {
    config.validate()?;
    let base = config.base.params().map_err(|e| ConfigError(e.body.message))?;
    let width = config.metric_columns().len();
    let mut reference = BranchReference::default();
    let mut rows = Vec::with_capacity(config.steps);
    for value in config.grid() {
        let start = Instant::now();
        let mut params = base;
        config.parameter.set(&mut params, value);
        let row = match evaluate(config, params, reference) {
            Ok((cells, imag_residual, problems, next)) => {
                reference = next;
                SweepRow {
                    value,
                    cells,
                    imag_residual,
                    wall_time: 0.0,
                    error: (!problems.is_empty()).then(|| problems.join(";")),
                }
            }
            Err(e) => SweepRow {
                value,
                cells: vec![None; width],
                imag_residual: 0.0,
                wall_time: 0.0,
                error: Some(e.to_string()),
            },
        };
        rows.push(SweepRow {
            wall_time: start.elapsed().as_secs_f64(),
            ..row
        });
    }
    Ok(rows)
}

fn number(x: f64) -> String {
    format!("{x:e}")
}

pub fn write_csv<W: Write>(config: &SweepConfig, rows: &[SweepRow], out: W) -> csv::Result<()> {
    let mut w = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(out);
    w.write_record(config.header())?;
    for row in rows {
        let mut rec = vec![number(row.value)];
        rec.extend(row.cells.iter().map(|c| c.map(number).unwrap_or_default()));
        rec.push(number(row.imag_residual));
        if config.timing {
            rec.push(number(row.wall_time));
        }
        rec.push(row.error.clone().unwrap_or_default());
        w.write_record(&rec)?;
    }
    w.flush()?;
    Ok(())
}

fn json_number(x: f64) -> Value {
    serde_json::Number::from_f64(x).map_or(Value::Null, Value::Number)
}

pub fn to_json(config: &SweepConfig, rows: &[SweepRow]) -> Value {
    let header = config.header();
    let metric_names = config.metric_columns();
    let objects = rows
        .iter()
        .map(|row| {
            let mut obj = Map::new();
            obj.insert(header[0].clone(), json_number(row.value));
            for (name, cell) in metric_names.iter().zip(&row.cells) {
                obj.insert(name.clone(), cell.map_or(Value::Null, json_number));
            }
            obj.insert("imag_residual".into(), json_number(row.imag_residual));
            if config.timing {
                obj.insert("wall_time_s".into(), json_number(row.wall_time));
            }
            obj.insert("error".into(), row.error.clone().map_or(Value::Null, Value::String));
            Value::Object(obj)
        })
        .collect();
    Value::Array(objects)
}

pub fn write_json<W: Write>(config: &SweepConfig, rows: &[SweepRow], mut out: W) -> std::io::Result<()> {
    serde_json::to_writer_pretty(&mut out, &to_json(config, rows))?;
    out.write_all(b"\n")
}

/// Index of the largest finite value in metric column `col`.
pub fn argmax(rows: &[SweepRow], col: usize) -> Option<usize> {
    rows.iter()
        .enumerate()
        .filter_map(|(k, r)| r.cells.get(col).copied().flatten().filter(|v| v.is_finite()).map(|v| (k, v)))
        .max_by(|a, b| a.1.total_cmp(&b.1))
        .map(|(k, _)| k)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use zalmtwin_core::metrics::pgen;

    fn config(steps: usize, metrics: Vec<SweepMetric>) -> SweepConfig {
        SweepConfig {
            parameter: SweptParameter::MeanPhoton,
            from: 0.01,
            to: 1.0,
            steps,
            scale: Scale::Log,
            base: MetricsRequest::new(0.1),
            metrics,
            timing: false,
        }
    }

    #[test]
    fn degenerate_sweep_has_two_rows() {
        let rows = run_sweep(&config(2, vec![SweepMetric::Pgen])).unwrap();
        assert_eq!(rows.len(), 2);
        assert_eq!(rows[0].value, 0.01);
        assert_eq!(rows[1].value, 1.0);
    }

    #[test]
    fn rejects_bad_configs() {
        let mut c = config(1, vec![SweepMetric::Pgen]);
        assert!(c.validate().is_err());
        c.steps = 3;
        c.from = 2.0;
        assert!(c.validate().is_err());
        c.from = 0.0;
        assert!(c.validate().is_err(), "log scale from zero");
        c.scale = Scale::Linear;
        assert!(c.validate().is_ok());
        c.base.bsm_efficiency = 2.0;
        assert!(c.validate().is_err());
    }

    #[test]
    fn cells_are_library_values() {
        let c = config(5, vec![SweepMetric::Pgen, SweepMetric::Trace]);
        for row in run_sweep(&c).unwrap() {
            let p = SourceParams::with_mean_photon(row.value);
            assert_eq!(row.cells[0].unwrap().to_bits(), pgen(&p).unwrap().value.to_bits());
            assert!(row.error.is_none());
        }
    }

    #[test]
    fn failures_mark_the_row_and_continue() {
        let mut c = config(3, vec![SweepMetric::Fidelity]);
        c.scale = Scale::Linear;
        c.from = 0.0;
        let rows = run_sweep(&c).unwrap();
        assert!(rows[0].error.as_deref().unwrap().starts_with("fidelity:"));
        assert_eq!(rows[0].cells, vec![None]);
        assert!(rows[1].error.is_none() && rows[2].error.is_none());
    }

    #[test]
    fn spin_dm_adds_32_columns() {
        let c = config(2, vec![SweepMetric::SpinDm, SweepMetric::Pgen]);
        assert_eq!(c.metric_columns().len(), 33);
        let rows = run_sweep(&c).unwrap();
        assert_eq!(rows[0].cells.len(), 33);
        assert_eq!(c.header().last().unwrap(), "error");
    }

    #[test]
    fn csv_layout() {
        let c = config(2, vec![SweepMetric::Pgen]);
        let rows = run_sweep(&c).unwrap();
        let mut buf = Vec::new();
        write_csv(&c, &rows, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(!text.contains('\r'));
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[0], "mean_photon,pgen,imag_residual,error");
        assert!(lines[1].starts_with("1e-2,"));
        assert_eq!(lines.len(), 3);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        #[test]
        fn grid_is_increasing_with_exact_ends(from in 1e-4f64..1.0, span in 1e-3f64..50.0, steps in 2usize..300, log in any::<bool>()) {
            let mut c = config(steps, vec![SweepMetric::Pgen]);
            c.from = from;
            c.to = from + span;
            c.scale = if log { Scale::Log } else { Scale::Linear };
            let g = c.grid();
            prop_assert_eq!(g.len(), steps);
            prop_assert_eq!(g[0], c.from);
            prop_assert_eq!(g[steps - 1], c.to);
            prop_assert!(g.windows(2).all(|w| w[0] < w[1]));
        }
    }
}
