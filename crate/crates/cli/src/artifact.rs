use std::path::Path;
use std::time::{Instant, SystemTime, UNIX_EPOCH};

use pfo_core::{EmpiricalMeasure, FitStatus, FitTrace, GaussianMeasure};
use serde::{Deserialize, Serialize};

use crate::config::ExperimentConfig;
use crate::error::CliError;
use crate::formats::write_atomic;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SnapshotSummary {
    pub kind: String,
    pub dim: usize,
    pub mean: Vec<f64>,
    pub cov: Vec<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub points: Option<usize>,
}

impl From<&GaussianMeasure> for SnapshotSummary {
    fn from(g: &GaussianMeasure) -> Self {
        Self {
            kind: "gaussian".into(),
            dim: g.dim(),
            mean: g.mean().iter().copied().collect(),
            cov: g.cov().row_iter().map(|r| r.iter().copied().collect()).collect(),
            points: None,
        }
    }
}

impl From<&EmpiricalMeasure> for SnapshotSummary {
    fn from(e: &EmpiricalMeasure) -> Self {
        let mean = e
            .points()
            .iter()
            .zip(e.weights())
            .fold(vec![0.0; e.dim()], |mut acc, (p, &w)| {
                acc.iter_mut().zip(p.iter()).for_each(|(a, x)| *a += w * x);
                acc
            });
        Self {
            kind: "empirical".into(),
            dim: e.dim(),
            mean,
            cov: e.covariance().row_iter().map(|r| r.iter().copied().collect()).collect(),
            points: Some(e.len()),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Timing {
    pub started_unix_ms: u64,
    pub elapsed_ms: f64,
}

/// Everything needed to inspect or repeat a run; written as `run.json`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunArtifact {
    pub command: String,
    pub config: ExperimentConfig,
    /// `converged`, `max-iters`, `error` or `ok` for non-iterative commands.
    pub status: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub reason: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub iterations: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub final_cost: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub final_grad_norm: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub min_cost: Option<f64>,
    #[serde(default)]
    pub parameters: Vec<f64>,
    #[serde(default)]
    pub snapshots: Vec<SnapshotSummary>,
    /// Command-specific results, such as the EDMD rank.
    #[serde(default, skip_serializing_if = "serde_json::Value::is_null")]
    pub details: serde_json::Value,
    /// Files written next to `run.json`.
    pub files: Vec<String>,
    pub timing: Timing,
}

pub(crate) struct Clock {
    started: Instant,
    started_unix_ms: u64,
}

impl Clock {
    pub fn start() -> Self {
        let started_unix_ms = SystemTime::now()
            .duration_since(UNIX_EPOCH)
            .map(|d| d.as_millis() as u64)
            .unwrap_or(0);
        Self {
            started: Instant::now(),
            started_unix_ms,
        }
    }

    pub fn timing(&self) -> Timing {
        Timing {
            started_unix_ms: self.started_unix_ms,
            elapsed_ms: self.started.elapsed().as_secs_f64() * 1e3,
        }
    }
}

impl RunArtifact {
    pub(crate) fn new(command: &str, config: &ExperimentConfig, clock: &Clock) -> Self {
        Self {
            command: command.into(),
            config: config.clone(),
            status: "ok".into(),
            reason: None,
            iterations: None,
            final_cost: None,
            final_grad_norm: None,
            min_cost: None,
            parameters: Vec::new(),
            snapshots: Vec::new(),
            details: serde_json::Value::Null,
            files: Vec::new(),
            timing: clock.timing(),
        }
    }

    pub(crate) fn record_trace(&mut self, trace: &FitTrace) {
        let (status, reason) = match &trace.status {
            FitStatus::Converged => ("converged", None),
            FitStatus::MaxIters => ("max-iters", None),
            FitStatus::Error(r) => ("error", Some(r.clone())),
        };
        self.status = status.into();
        self.reason = reason;
        let last = trace.last();
        self.iterations = Some(last.iter);
        self.final_cost = Some(last.cost);
        self.final_grad_norm = Some(last.grad_norm);
        self.min_cost = Some(trace.min_cost());
        self.parameters = last.params.clone();
    }

    pub(crate) fn record_failure(&mut self, reason: &str) {
        self.status = "error".into();
        self.reason = Some(reason.into());
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = crate::formats::read_text(path)?;
        serde_json::from_str(&text).map_err(|e| CliError::parse(path, &e))
    }

    pub(crate) fn write(mut self, dir: &Path, clock: &Clock) -> Result<(), CliError> {
        self.timing = clock.timing();
        let json = serde_json::to_string_pretty(&self).expect("artifact serializes");
        write_atomic(&dir.join("run.json"), json.as_bytes())
    }
}
