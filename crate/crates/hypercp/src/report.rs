//! Reproduction report: every acceptance criterion as a machine-checked
//! predicate over the sweep, rendered as text and JSON.

use std::fmt::Write as _;

use hypercp_core::{run, Variant};
use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::checks::{estimator_recovery, identity_check, theorem_oracle};
use crate::config::Experiment;
use crate::experiment::{CellSummary, RunRecord};
use crate::output::results_csv;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Status {
    Pass,
    Fail,
    Unevaluable,
}

impl Status {
    fn from_bool(ok: bool) -> Self {
        if ok {
            Status::Pass
        } else {
            Status::Fail
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            Status::Pass => "PASS",
            Status::Fail => "FAIL",
            Status::Unevaluable => "UNEVALUABLE",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Measured {
    pub label: String,
    pub value: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CriterionResult {
    pub id: u8,
    pub name: &'static str,
    /// The predicate, in words.
    pub target: &'static str,
    pub status: Status,
    pub measured: Vec<Measured>,
    pub notes: Vec<String>,
}

impl CriterionResult {
    fn new(id: u8, name: &'static str, target: &'static str) -> Self {
        Self {
            id,
            name,
            target,
            status: Status::Unevaluable,
            measured: Vec::new(),
            notes: Vec::new(),
        }
    }

    fn measure(&mut self, label: impl Into<String>, value: f64) {
        self.measured.push(Measured {
            label: label.into(),
            value,
        });
    }

    fn missing(mut self, what: impl Into<String>) -> Self {
        self.status = Status::Unevaluable;
        self.notes.push(what.into());
        self
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Report {
    pub preset: Option<&'static str>,
    /// SHA-256 of the resolved configuration text.
    pub config_hash: String,
    pub criteria: Vec<CriterionResult>,
}

pub fn config_hash(resolved_toml: &str) -> String {
    Sha256::digest(resolved_toml.as_bytes())
        .iter()
        .fold(String::with_capacity(64), |mut s, b| {
            let _ = write!(s, "{b:02x}");
            s
        })
}

/// Sweep means indexed by period and variant.
struct Table<'a> {
    cells: &'a [CellSummary],
}

const PERIOD_TOL: f64 = 1e-9;

impl<'a> Table<'a> {
    fn cell(&self, period: f64, variant: Variant) -> Option<&'a CellSummary> {
        self.cells
            .iter()
            .find(|c| (c.period_s - period).abs() <= PERIOD_TOL && c.variant == variant.as_str())
    }

    fn variants(&self) -> Vec<Variant> {
        Variant::ALL
            .into_iter()
            .filter(|v| self.cells.iter().any(|c| c.variant == v.as_str()))
            .collect()
    }

    /// Swept periods of `variant`, ascending.
    fn periods(&self, variant: Variant) -> Vec<f64> {
        let mut p: Vec<f64> = self
            .cells
            .iter()
            .filter(|c| c.variant == variant.as_str())
            .map(|c| c.period_s)
            .collect();
        p.sort_by(f64::total_cmp);
        p
    }

    /// Means of `f` at `periods`, or the first missing period.
    fn means(&self, variant: Variant, periods: &[f64], f: fn(&CellSummary) -> f64) -> Result<Vec<f64>, f64> {
        periods
            .iter()
            .map(|&p| self.cell(p, variant).map(f).ok_or(p))
            .collect()
    }
}

fn dir(c: &CellSummary) -> f64 {
    c.mean_direction_error_deg.mean
}
fn offset(c: &CellSummary) -> f64 {
    c.mean_offset_error_cm.mean
}
fn overflow(c: &CellSummary) -> f64 {
    c.overflow_rate_pps.mean
}
fn battery(c: &CellSummary) -> f64 {
    c.mean_battery_frac.mean
}

/// Least-squares line through `(x, y)`: `(slope, r²)`.
pub fn linear_fit(x: &[f64], y: &[f64]) -> (f64, f64) {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = x.iter().map(|a| (a - mx) * (a - mx)).sum();
    let syy: f64 = y.iter().map(|b| (b - my) * (b - my)).sum();
    let slope = sxy / sxx;
    let r2 = if syy > 0.0 { sxy * sxy / (sxx * syy) } else { 1.0 };
    (slope, r2)
}

/// Relative difference of `other` from `reference`.
pub fn relative_difference(reference: f64, other: f64) -> f64 {
    if reference == other {
        0.0
    } else {
        (other - reference).abs() / reference.abs()
    }
}

/// Evaluates a per-variant predicate; fails if any variant fails.
fn per_variant(
    mut c: CriterionResult,
    table: &Table,
    mut check: impl FnMut(Variant, &mut CriterionResult) -> Result<bool, String>,
) -> CriterionResult {
    let variants = table.variants();
    if variants.is_empty() {
        return c.missing("no sweep results");
    }
    let mut ok = true;
    for v in variants {
        match check(v, &mut c) {
            Ok(pass) => ok &= pass,
            Err(why) => return c.missing(why),
        }
    }
    c.status = Status::from_bool(ok);
    c
}

fn missing_period(v: Variant) -> impl Fn(f64) -> String {
    move |p| format!("sweep has no {} cell at period {p} s", v.as_str())
}

fn direction_minimum(table: &Table) -> CriterionResult {
    let c = CriterionResult::new(
        1,
        "direction-error minimum",
        "min over periods {1,2,3} s of mean direction error <= 2 deg; max over the sweep <= 6 deg",
    );
    per_variant(c, table, |v, c| {
        let mid = table.means(v, &[1.0, 2.0, 3.0], dir).map_err(missing_period(v))?;
        let all = table.means(v, &table.periods(v), dir).map_err(missing_period(v))?;
        let min = mid.iter().copied().fold(f64::INFINITY, f64::min);
        let max = all.iter().copied().fold(f64::NEG_INFINITY, |a, b| if b.is_nan() { f64::INFINITY } else { a.max(b) });
        c.measure(format!("{} min over 1-3 s (deg)", v.as_str()), min);
        c.measure(format!("{} max over sweep (deg)", v.as_str()), max);
        Ok(min <= 2.0 && max <= 6.0)
    })
}

fn congestion(table: &Table) -> CriterionResult {
    let c = CriterionResult::new(
        2,
        "congestion regime",
        "overflow(0.01 s) >= 10 x overflow(3 s); overflow < 0.01 pkt/s/node at every period >= 3 s",
    );
    per_variant(c, table, |v, c| {
        let ends = table.means(v, &[0.01, 3.0], overflow).map_err(missing_period(v))?;
        let calm: Vec<f64> = table.periods(v).into_iter().filter(|&p| p >= 3.0 - PERIOD_TOL).collect();
        let calm_rates = table.means(v, &calm, overflow).map_err(missing_period(v))?;
        let worst_calm = calm_rates.iter().copied().fold(0.0, f64::max);
        c.measure(format!("{} overflow at 0.01 s (pkt/s/node)", v.as_str()), ends[0]);
        c.measure(format!("{} overflow at 3 s (pkt/s/node)", v.as_str()), ends[1]);
        c.measure(format!("{} worst overflow at >= 3 s (pkt/s/node)", v.as_str()), worst_calm);
        Ok(ends[0] >= 10.0 * ends[1] && ends[0] > 0.0 && worst_calm < 0.01)
    })
}

fn offset_linearity(table: &Table) -> CriterionResult {
    let c = CriterionResult::new(
        3,
        "offset-error linearity",
        "regression of mean offset error on period over {1..5} s: R^2 >= 0.9, slope > 0; offset at 2 s in [10, 100] cm",
    );
    per_variant(c, table, |v, c| {
        let x = [1.0, 2.0, 3.0, 4.0, 5.0];
        let y = table.means(v, &x, offset).map_err(missing_period(v))?;
        let (slope, r2) = linear_fit(&x, &y);
        c.measure(format!("{} slope (cm/s)", v.as_str()), slope);
        c.measure(format!("{} R^2", v.as_str()), r2);
        c.measure(format!("{} offset at 2 s (cm)", v.as_str()), y[1]);
        Ok(r2 >= 0.9 && slope > 0.0 && (10.0..=100.0).contains(&y[1]))
    })
}

fn battery_floor(table: &Table) -> CriterionResult {
    let c = CriterionResult::new(
        4,
        "battery floor and asymptote",
        "battery(0.01 s) >= 0.5; battery(5 s) >= 0.95; non-decreasing in period with at most 2 violations",
    );
    per_variant(c, table, |v, c| {
        let ends = table.means(v, &[0.01, 5.0], battery).map_err(missing_period(v))?;
        let all = table.means(v, &table.periods(v), battery).map_err(missing_period(v))?;
        let drops = all.windows(2).filter(|w| !(w[1] >= w[0])).count();
        c.measure(format!("{} battery at 0.01 s", v.as_str()), ends[0]);
        c.measure(format!("{} battery at 5 s", v.as_str()), ends[1]);
        c.measure(format!("{} monotonicity violations", v.as_str()), drops as f64);
        Ok(ends[0] >= 0.5 && ends[1] >= 0.95 && drops <= 2)
    })
}

fn variant_parity(table: &Table) -> CriterionResult {
    let mut c = CriterionResult::new(
        5,
        "ideal-vs-estimated parity",
        "every period: |direction error difference| <= 1 deg and overflow relative to ideal within 25%",
    );
    let periods = table.periods(Variant::Ideal);
    let paired: Vec<(f64, &CellSummary, &CellSummary)> = periods
        .iter()
        .filter_map(|&p| Some((p, table.cell(p, Variant::Ideal)?, table.cell(p, Variant::Estimated)?)))
        .collect();
    if paired.is_empty() {
        return c.missing("needs both variants at a common period");
    }
    let mut ok = true;
    for (p, i, e) in paired {
        let d = (dir(i) - dir(e)).abs();
        let r = relative_difference(overflow(i), overflow(e));
        c.measure(format!("{p} s direction difference (deg)"), d);
        c.measure(format!("{p} s overflow relative difference"), r);
        ok &= d <= 1.0 && r <= 0.25;
    }
    c.status = Status::from_bool(ok);
    c
}

pub const ORACLE_TRIALS: u64 = 10_000;
pub const IDENTITY_TRIALS: u64 = 1_000_000;

fn oracle(seed: u64) -> CriterionResult {
    let mut c = CriterionResult::new(
        6,
        "next-hop rule minimises the drift bound",
        "10^4 random local configurations: rule and brute-force minimiser agree in 100% of cases",
    );
    let a = theorem_oracle(ORACLE_TRIALS, seed);
    c.measure("trials", a.trials as f64);
    c.measure("agreements", a.agreements as f64);
    c.status = Status::from_bool(a.all_agree());
    c
}

fn identity(seed: u64) -> CriterionResult {
    let mut c = CriterionResult::new(
        7,
        "squared queue inequality",
        "10^6 random tuples meeting the precondition all satisfy the inequality",
    );
    let a = identity_check(IDENTITY_TRIALS, seed);
    c.measure("trials", a.trials as f64);
    c.measure("satisfied", a.agreements as f64);
    c.status = Status::from_bool(a.all_agree());
    c
}

fn conservation(records: &[RunRecord]) -> CriterionResult {
    let mut c = CriterionResult::new(
        8,
        "conservation",
        "packet accounting exact on every run; per-node energy within 1e-9 relative; no bound violations",
    );
    if records.is_empty() {
        return c.missing("no runs");
    }
    let accounting_failures = records.iter().filter(|r| !r.metrics.invariants.accounting_holds).count();
    let violations: u64 = records.iter().map(|r| r.metrics.invariants.bound_violations).sum();
    let residual = records
        .iter()
        .map(|r| r.metrics.invariants.max_energy_residual)
        .fold(0.0, f64::max);
    c.measure("runs", records.len() as f64);
    c.measure("runs with accounting mismatch", accounting_failures as f64);
    c.measure("bound violations", violations as f64);
    c.measure("max energy residual (relative)", residual);
    c.status = Status::from_bool(accounting_failures == 0 && violations == 0 && residual <= 1e-9);
    c
}

fn recovery() -> CriterionResult {
    let mut c = CriterionResult::new(
        9,
        "estimator recovery",
        "noiseless footprint: direction error < 1 deg, offset < one cell diagonal; tilted cones within 1 deg",
    );
    let r = estimator_recovery();
    c.measure("direction error (deg)", r.direction_error_deg);
    c.measure("offset error (cm)", r.offset_error_cm);
    c.measure("cell diagonal (cm)", r.cell_diagonal_cm);
    c.measure("tilted-cone error (deg)", r.tilted_error_deg);
    c.status = Status::from_bool(r.passes());
    c
}

fn determinism(exp: &Experiment, records: &[RunRecord]) -> CriterionResult {
    let mut c = CriterionResult::new(
        10,
        "determinism",
        "re-running a cell with the same seed reproduces its results row byte for byte",
    );
    let Some(first) = records.first() else {
        return c.missing("no runs");
    };
    let mut cfg = exp.run_config(first.period, first.variant, first.replication);
    cfg.record_trace = false;
    let again = match run(&cfg) {
        Ok(out) => out.metrics,
        Err(e) => return c.missing(format!("re-run failed: {e}")),
    };
    let rerun = RunRecord {
        metrics: again,
        ..first.clone()
    };
    let same = results_csv(std::slice::from_ref(first)) == results_csv(std::slice::from_ref(&rerun));
    c.measure("identical rows", f64::from(u8::from(same)));
    c.status = Status::from_bool(same);
    c
}

/// Evaluates every criterion. `oracle_seed` seeds the randomized checks.
pub fn generate(
    exp: &Experiment,
    records: &[RunRecord],
    summary: &[CellSummary],
    preset: Option<&'static str>,
    resolved_toml: &str,
    oracle_seed: u64,
) -> Report {
    let table = Table { cells: summary };
    Report {
        preset,
        config_hash: config_hash(resolved_toml),
        criteria: vec![
            direction_minimum(&table),
            congestion(&table),
            offset_linearity(&table),
            battery_floor(&table),
            variant_parity(&table),
            oracle(oracle_seed),
            identity(oracle_seed),
            conservation(records),
            recovery(),
            determinism(exp, records),
        ],
    }
}

impl Report {
    pub fn to_text(&self) -> String {
        let mut s = String::from("Hyper-CP reproduction report\n");
        let _ = writeln!(s, "preset: {}", self.preset.unwrap_or("none"));
        let _ = writeln!(s, "config sha256: {}", self.config_hash);
        for c in &self.criteria {
            let _ = writeln!(s, "[{}] criterion {}: {}", c.status.label(), c.id, c.name);
            let _ = writeln!(s, "    target: {}", c.target);
            for m in &c.measured {
                let _ = writeln!(s, "    {} = {}", m.label, m.value);
            }
            for n in &c.notes {
                let _ = writeln!(s, "    note: {n}");
            }
        }
        s
    }

    pub fn to_json(&self) -> String {
        let mut text = serde_json::to_string_pretty(self).expect("report serializes");
        text.push('\n');
        text
    }

    pub fn status(&self, id: u8) -> Option<Status> {
        self.criteria.iter().find(|c| c.id == id).map(|c| c.status)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::experiment::Stat;

    fn cell(period: f64, variant: Variant, d: f64, o: f64, ovf: f64, b: f64) -> CellSummary {
        let s = |x| Stat {
            mean: x,
            stderr: None,
            n: 1,
        };
        CellSummary {
            period_s: period,
            variant: variant.as_str(),
            replications: 1,
            mean_direction_error_deg: s(d),
            mean_offset_error_cm: s(o),
            overflow_rate_pps: s(ovf),
            mean_battery_frac: s(b),
            mean_latency_s: s(0.0),
            delivered: s(0.0),
            generated: s(0.0),
            dropped: s(0.0),
        }
    }

    fn good_table() -> Vec<CellSummary> {
        let mut out = Vec::new();
        for v in Variant::ALL {
            for (p, d, o, ovf, b) in [
                (0.01, 4.0, 40.0, 2.0, 0.7),
                (0.1, 3.0, 42.0, 0.2, 0.75),
                (0.5, 2.5, 45.0, 0.03, 0.85),
                (1.0, 1.5, 48.0, 0.01, 0.9),
                (2.0, 1.0, 52.0, 0.002, 0.95),
                (3.0, 1.1, 56.0, 0.001, 0.97),
                (4.0, 1.4, 59.0, 0.0005, 0.98),
                (5.0, 1.8, 63.0, 0.0002, 0.99),
            ] {
                out.push(cell(p, v, d, o, ovf, b));
            }
        }
        out
    }

    #[test]
    fn trend_predicates_on_a_conforming_table() {
        let cells = good_table();
        let t = Table { cells: &cells };
        for c in [
            direction_minimum(&t),
            congestion(&t),
            offset_linearity(&t),
            battery_floor(&t),
            variant_parity(&t),
        ] {
            assert_eq!(c.status, Status::Pass, "{c:?}");
        }
    }

    #[test]
    fn missing_period_five_leaves_linearity_unevaluable() {
        let cells: Vec<CellSummary> = good_table().into_iter().filter(|c| c.period_s != 5.0).collect();
        let t = Table { cells: &cells };
        let c = offset_linearity(&t);
        assert_eq!(c.status, Status::Unevaluable);
        assert!(c.notes[0].contains('5'), "{:?}", c.notes);
        assert_eq!(direction_minimum(&t).status, Status::Pass);
    }

    #[test]
    fn predicates_fail_when_trends_break() {
        let mut cells = good_table();
        for c in cells.iter_mut().filter(|c| c.variant == "estimated") {
            c.mean_direction_error_deg.mean += 2.0;
            c.mean_offset_error_cm.mean = 200.0 - 20.0 * c.period_s;
        }
        let t = Table { cells: &cells };
        assert_eq!(variant_parity(&t).status, Status::Fail);
        assert_eq!(offset_linearity(&t).status, Status::Fail);
    }

    #[test]
    fn fit_and_relative_difference() {
        let (slope, r2) = linear_fit(&[1.0, 2.0, 3.0], &[2.0, 4.0, 6.0]);
        assert!((slope - 2.0).abs() < 1e-12 && (r2 - 1.0).abs() < 1e-12);
        assert_eq!(relative_difference(0.0, 0.0), 0.0);
        assert_eq!(relative_difference(4.0, 5.0), 0.25);
        assert!(relative_difference(0.0, 1.0).is_infinite());
    }

    #[test]
    fn hash_is_stable_hex() {
        let h = config_hash("abc");
        assert_eq!(h, "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
    }
}
