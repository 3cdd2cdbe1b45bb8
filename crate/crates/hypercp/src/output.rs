//! Result tables, summaries and event traces on disk.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use hypercp_core::sim::TraceRecord;
use hypercp_core::Variant;

use crate::experiment::{CellSummary, RunRecord};
use crate::CliError;

pub const RESULTS_HEADER: [&str; 10] = [
    "period_s",
    "variant",
    "replication",
    "mean_direction_error_deg",
    "mean_offset_error_cm",
    "overflow_rate_pps",
    "mean_battery_frac",
    "delivered",
    "generated",
    "dropped",
];

/// `x` with nine significant digits in positional notation.
pub fn sig9(x: f64) -> String {
    if !x.is_finite() {
        return if x.is_nan() { "NaN".into() } else if x > 0.0 { "inf".into() } else { "-inf".into() };
    }
    if x == 0.0 {
        return "0".into();
    }
    let magnitude = x.abs().log10().floor() as i32;
    let decimals = (8 - magnitude).max(0) as usize;
    format!("{x:.decimals$}")
}

fn output_error(path: &Path, e: impl std::fmt::Display) -> CliError {
    CliError::Output(format!("{}: {e}", path.display()))
}

/// The results table as CSV text.
pub fn results_csv(records: &[RunRecord]) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(RESULTS_HEADER).expect("writing to memory");
    for r in records {
        let m = &r.metrics;
        w.write_record([
            sig9(r.period),
            r.variant.as_str().to_string(),
            r.replication.to_string(),
            sig9(m.mean_direction_error),
            sig9(m.mean_offset_error),
            sig9(m.overflow_rate),
            sig9(m.mean_battery_fraction),
            m.delivered_count.to_string(),
            m.generated_count.to_string(),
            m.dropped_count.to_string(),
        ])
        .expect("writing to memory");
    }
    String::from_utf8(w.into_inner().expect("flushing to memory")).expect("CSV of ASCII fields")
}

pub fn write_text(path: &Path, text: &str) -> Result<(), CliError> {
    std::fs::write(path, text).map_err(|e| output_error(path, e))
}

pub fn write_results(path: &Path, records: &[RunRecord]) -> Result<(), CliError> {
    write_text(path, &results_csv(records))
}

pub fn summary_json(summary: &[CellSummary]) -> String {
    // Non-finite means serialize as null.
    let mut text = serde_json::to_string_pretty(&serde_json::json!({ "cells": summary })).expect("summary serializes");
    text.push('\n');
    text
}

pub fn write_summary(path: &Path, summary: &[CellSummary]) -> Result<(), CliError> {
    write_text(path, &summary_json(summary))
}

pub fn trace_file_name(period: f64, variant: Variant, replication: u32) -> String {
    format!("trace_p{}_{}_r{replication}.csv", sig9(period), variant.as_str())
}

/// Line-delimited trace: `time,kind,i,j,packet`, packet empty for node
/// events.
pub fn write_trace(path: &Path, trace: &[TraceRecord]) -> Result<(), CliError> {
    let file = File::create(path).map_err(|e| output_error(path, e))?;
    let mut w = BufWriter::new(file);
    let mut emit = || -> std::io::Result<()> {
        writeln!(w, "time,kind,i,j,packet")?;
        for r in trace {
            write!(w, "{},{},{},{},", r.time, r.kind.as_str(), r.node.i, r.node.j)?;
            match r.packet {
                Some(id) => writeln!(w, "{id}")?,
                None => writeln!(w)?,
            }
        }
        w.flush()
    };
    emit().map_err(|e| output_error(path, e))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn nine_significant_digits() {
        assert_eq!(sig9(1.0), "1.00000000");
        assert_eq!(sig9(0.01), "0.0100000000");
        assert_eq!(sig9(123.456789012), "123.456789");
        assert_eq!(sig9(-2.5e-5), "-0.0000250000000");
        assert_eq!(sig9(0.0), "0");
        assert_eq!(sig9(f64::NAN), "NaN");
        assert_eq!(sig9(1234567890.4), "1234567890");
        for x in [0.01, 0.1, 2.0, 7.25, 141.421356] {
            let back: f64 = sig9(x).parse().unwrap();
            assert!((back - x).abs() <= 1e-8 * x.abs());
        }
    }
}
