//! Parameter sweeps over sensing period, variant and replication.

use std::path::Path;

use hypercp_core::{run, RunMetrics, Variant};
use rayon::prelude::*;
use serde::Serialize;

use crate::config::Experiment;
use crate::output::{trace_file_name, write_trace};
use crate::CliError;

/// One finished run of a sweep.
#[derive(Debug, Clone, PartialEq)]
pub struct RunRecord {
    pub period: f64,
    pub variant: Variant,
    pub replication: u32,
    pub seed: u64,
    pub metrics: RunMetrics,
}

/// The cells of a sweep in output order: period as listed, then variant,
/// then replication.
pub fn cells(exp: &Experiment) -> Vec<(f64, Variant, u32)> {
    let mut out = Vec::new();
    for &p in &exp.periods {
        for &v in &exp.variants {
            for r in 0..exp.replications {
                out.push((p, v, r));
            }
        }
    }
    out
}

/// Runs every cell, in parallel across cells. Results come back in
/// [`cells`] order regardless of scheduling. With `trace_dir` set, each
/// run's event trace is written there.
pub fn sweep(exp: &Experiment, trace_dir: Option<&Path>) -> Result<Vec<RunRecord>, CliError> {
    cells(exp)
        .into_par_iter()
        .map(|(period, variant, replication)| {
            let mut cfg = exp.run_config(period, variant, replication);
            cfg.record_trace = trace_dir.is_some();
            let out = run(&cfg).map_err(|e| match e {
                hypercp_core::Error::InvalidConfig(v) => CliError::Config(v),
                other => CliError::Run(other.to_string()),
            })?;
            if let (Some(dir), Some(trace)) = (trace_dir, &out.trace) {
                write_trace(&dir.join(trace_file_name(period, variant, replication)), trace)?;
            }
            Ok(RunRecord {
                period,
                variant,
                replication,
                seed: cfg.seed,
                metrics: out.metrics,
            })
        })
        .collect()
}

/// Mean and standard error of the finite values of a sample.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Stat {
    /// NaN when no value was finite.
    pub mean: f64,
    /// `None` with fewer than two finite values.
    pub stderr: Option<f64>,
    /// Finite values contributing.
    pub n: usize,
}

impl Stat {
    pub fn of(values: impl IntoIterator<Item = f64>) -> Self {
        let xs: Vec<f64> = values.into_iter().filter(|x| x.is_finite()).collect();
        let n = xs.len();
        if n == 0 {
            return Self {
                mean: f64::NAN,
                stderr: None,
                n,
            };
        }
        let mean = xs.iter().sum::<f64>() / n as f64;
        let stderr = (n > 1).then(|| {
            let var = xs.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / (n - 1) as f64;
            (var / n as f64).sqrt()
        });
        Self { mean, stderr, n }
    }
}

/// Aggregates over the replications of one `(period, variant)` cell.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CellSummary {
    pub period_s: f64,
    pub variant: &'static str,
    pub replications: usize,
    pub mean_direction_error_deg: Stat,
    pub mean_offset_error_cm: Stat,
    pub overflow_rate_pps: Stat,
    pub mean_battery_frac: Stat,
    pub mean_latency_s: Stat,
    pub delivered: Stat,
    pub generated: Stat,
    pub dropped: Stat,
}

impl CellSummary {
    pub fn variant(&self) -> Variant {
        self.variant.parse().expect("summary variants are canonical names")
    }
}

/// One summary per `(period, variant)`, in order of first appearance.
pub fn summarize(records: &[RunRecord]) -> Vec<CellSummary> {
    let mut keys: Vec<(f64, Variant)> = Vec::new();
    for r in records {
        if !keys.iter().any(|&(p, v)| p == r.period && v == r.variant) {
            keys.push((r.period, r.variant));
        }
    }
    keys.into_iter()
        .map(|(period, variant)| {
            let group: Vec<&RunMetrics> = records
                .iter()
                .filter(|r| r.period == period && r.variant == variant)
                .map(|r| &r.metrics)
                .collect();
            let stat = |f: fn(&RunMetrics) -> f64| Stat::of(group.iter().map(|m| f(m)));
            CellSummary {
                period_s: period,
                variant: variant.as_str(),
                replications: group.len(),
                mean_direction_error_deg: stat(|m| m.mean_direction_error),
                mean_offset_error_cm: stat(|m| m.mean_offset_error),
                overflow_rate_pps: stat(|m| m.overflow_rate),
                mean_battery_frac: stat(|m| m.mean_battery_fraction),
                mean_latency_s: stat(|m| m.mean_latency),
                delivered: stat(|m| m.delivered_count as f64),
                generated: stat(|m| m.generated_count as f64),
                dropped: stat(|m| m.dropped_count as f64),
            }
        })
        .collect()
}
