//! Acceptance gate for the full sensing-period sweep.
//!
//! Runs the `paper-fig4-7` preset through the command-line binary, twice,
//! and checks every acceptance criterion from the written outputs with code
//! kept independent of the crate's own report module. Prints one PASS/FAIL
//! line per criterion and exits non-zero if any criterion fails.

use std::collections::BTreeMap;
use std::path::Path;
use std::process::{Command, ExitCode};
use std::time::{Duration, Instant};

use hypercp::checks::estimator_recovery;
use hypercp::config::{FileConfig, Preset};
use hypercp::experiment::sweep;
use hypercp_core::lyapunov::{check_identity, queue_estimate};
use hypercp_core::routing::{policy_filter, select_next_hop, Candidate, NeighborEstimate};
use hypercp_core::{Coord, GridTopology, RoutingConfig};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const PERIODS: [f64; 8] = [0.01, 0.1, 0.5, 1.0, 2.0, 3.0, 4.0, 5.0];
const VARIANTS: [&str; 2] = ["ideal", "estimated"];
const MIN_REPLICATIONS: usize = 20;

struct Outcome {
    pass: bool,
    detail: String,
}

fn verdict(id: u8, name: &str, o: &Outcome) {
    let label = if o.pass { "PASS" } else { "FAIL" };
    println!("{label} criterion {id:>2} {name}: {}", o.detail);
}

/// Per-cell means of the results table, keyed by (period in ms, variant).
struct Means {
    cells: BTreeMap<(u64, String), Vec<[f64; 4]>>,
}

impl Means {
    fn parse(csv_text: &str) -> Self {
        let mut reader = csv::Reader::from_reader(csv_text.as_bytes());
        let headers = reader.headers().expect("header row").clone();
        let col = |name: &str| headers.iter().position(|h| h == name).unwrap_or_else(|| panic!("column {name}"));
        let (period, variant) = (col("period_s"), col("variant"));
        let values = [
            col("mean_direction_error_deg"),
            col("mean_offset_error_cm"),
            col("overflow_rate_pps"),
            col("mean_battery_frac"),
        ];
        let mut cells: BTreeMap<(u64, String), Vec<[f64; 4]>> = BTreeMap::new();
        for row in reader.records() {
            let row = row.expect("well-formed row");
            let p: f64 = row[period].parse().expect("numeric period");
            let v = values.map(|c| row[c].parse::<f64>().unwrap_or(f64::NAN));
            cells.entry((ms(p), row[variant].to_string())).or_default().push(v);
        }
        Self { cells }
    }

    fn reps(&self, p: f64, v: &str) -> usize {
        self.cells.get(&(ms(p), v.to_string())).map_or(0, Vec::len)
    }

    /// Mean of column `k` over the finite replications of a cell.
    fn mean(&self, p: f64, v: &str, k: usize) -> f64 {
        let rows = &self.cells[&(ms(p), v.to_string())];
        let xs: Vec<f64> = rows.iter().map(|r| r[k]).filter(|x| x.is_finite()).collect();
        xs.iter().sum::<f64>() / xs.len() as f64
    }

    fn dir(&self, p: f64, v: &str) -> f64 {
        self.mean(p, v, 0)
    }
    fn offset(&self, p: f64, v: &str) -> f64 {
        self.mean(p, v, 1)
    }
    fn overflow(&self, p: f64, v: &str) -> f64 {
        self.mean(p, v, 2)
    }
    fn battery(&self, p: f64, v: &str) -> f64 {
        self.mean(p, v, 3)
    }
}

fn ms(p: f64) -> u64 {
    (p * 1000.0).round() as u64
}

fn direction_minimum(m: &Means) -> Outcome {
    let mut pass = true;
    let mut detail = Vec::new();
    for v in VARIANTS {
        let min = [1.0, 2.0, 3.0].iter().map(|&p| m.dir(p, v)).fold(f64::INFINITY, f64::min);
        let max = PERIODS.iter().map(|&p| m.dir(p, v)).fold(f64::NEG_INFINITY, f64::max);
        pass &= min <= 2.0 && max <= 6.0;
        detail.push(format!("{v}: min(1-3 s) {min:.3} deg, max {max:.3} deg"));
    }
    Outcome {
        pass,
        detail: format!("{} (need min <= 2, max <= 6)", detail.join("; ")),
    }
}

fn congestion(m: &Means) -> Outcome {
    let mut pass = true;
    let mut detail = Vec::new();
    for v in VARIANTS {
        let busy = m.overflow(0.01, v);
        let calm = m.overflow(3.0, v);
        let worst = PERIODS
            .iter()
            .filter(|&&p| p >= 3.0)
            .map(|&p| m.overflow(p, v))
            .fold(0.0, f64::max);
        pass &= busy > 0.0 && busy >= 10.0 * calm && worst < 0.01;
        detail.push(format!(
            "{v}: 0.01 s {busy:.4}, 3 s {calm:.6}, worst >= 3 s {worst:.6} pkt/s/node"
        ));
    }
    Outcome {
        pass,
        detail: format!("{} (need ratio >= 10, calm < 0.01)", detail.join("; ")),
    }
}

fn offset_linearity(m: &Means) -> Outcome {
    let xs = [1.0, 2.0, 3.0, 4.0, 5.0];
    let mut pass = true;
    let mut detail = Vec::new();
    for v in VARIANTS {
        let ys: Vec<f64> = xs.iter().map(|&p| m.offset(p, v)).collect();
        let n = xs.len() as f64;
        let mx = xs.iter().sum::<f64>() / n;
        let my = ys.iter().sum::<f64>() / n;
        let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
        let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
        let syy: f64 = ys.iter().map(|y| (y - my).powi(2)).sum();
        let slope = sxy / sxx;
        let r2 = sxy * sxy / (sxx * syy);
        let at2 = ys[1];
        pass &= r2 >= 0.9 && slope > 0.0 && (10.0..=100.0).contains(&at2);
        detail.push(format!("{v}: slope {slope:.3} cm/s, R^2 {r2:.3}, 2 s {at2:.2} cm"));
    }
    Outcome {
        pass,
        detail: format!("{} (need R^2 >= 0.9, slope > 0, 10..100 cm)", detail.join("; ")),
    }
}

fn battery_floor(m: &Means) -> Outcome {
    let mut pass = true;
    let mut detail = Vec::new();
    for v in VARIANTS {
        let series: Vec<f64> = PERIODS.iter().map(|&p| m.battery(p, v)).collect();
        let drops = series.windows(2).filter(|w| w[1] < w[0]).count();
        let (low, high) = (series[0], series[PERIODS.len() - 1]);
        pass &= low >= 0.5 && high >= 0.95 && drops <= 2;
        detail.push(format!("{v}: 0.01 s {low:.4}, 5 s {high:.4}, {drops} decreases"));
    }
    Outcome {
        pass,
        detail: format!("{} (need >= 0.5, >= 0.95, <= 2 decreases)", detail.join("; ")),
    }
}

fn parity(m: &Means) -> Outcome {
    let mut pass = true;
    let mut worst_dir: (f64, f64) = (0.0, 0.0);
    let mut worst_rel: (f64, f64) = (0.0, 0.0);
    for p in PERIODS {
        let d = (m.dir(p, "ideal") - m.dir(p, "estimated")).abs();
        let (i, e) = (m.overflow(p, "ideal"), m.overflow(p, "estimated"));
        let rel = if i == e { 0.0 } else { (e - i).abs() / i };
        pass &= d <= 1.0 && rel <= 0.25;
        if d > worst_dir.1 {
            worst_dir = (p, d);
        }
        if rel > worst_rel.1 {
            worst_rel = (p, rel);
        }
    }
    Outcome {
        pass,
        detail: format!(
            "worst direction gap {:.3} deg at {} s, worst overflow gap {:.1}% at {} s (need <= 1 deg, <= 25%)",
            worst_dir.1,
            worst_dir.0,
            100.0 * worst_rel.1,
            worst_rel.0
        ),
    }
}

/// The node's own summand plus each neighbour's in-flow summand, written out
/// from the bound directly: `[τR_in + U + G]² + [τR_out − U]² − 2U²`.
fn local_bound(own: f64, tau: f64, rate: f64, neighbours: &[(Coord, f64, f64)], target: Coord) -> f64 {
    let summand = |r_in: f64, r_out: f64, u: f64, g: f64| (r_in + u + g).powi(2) + (r_out - u).powi(2) - 2.0 * u * u;
    summand(0.0, tau * rate, own, 0.0)
        + neighbours
            .iter()
            .map(|&(m, u, g)| summand(if m == target { tau * rate } else { 0.0 }, 0.0, u, g))
            .sum::<f64>()
}

fn theorem_oracle() -> Outcome {
    const TRIALS: u32 = 10_000;
    let topo = GridTopology::new(31, 31).expect("default grid");
    let cfg = RoutingConfig::default();
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed_0006);
    let mut agree = 0;
    for _ in 0..TRIALS {
        let n = loop {
            let c = Coord::new(rng.random_range(0..31), rng.random_range(0..31));
            if !topo.is_gateway(c) {
                break c;
            }
        };
        let w = topo.nearest_gateway(n).expect("in bounds");
        let views: Vec<Candidate> = topo
            .neighbors(n)
            .expect("in bounds")
            .iter()
            .filter(|m| !topo.is_gateway(**m))
            .map(|&m| Candidate {
                coord: m,
                estimate: NeighborEstimate {
                    queue_est: f64::from(rng.random_range(0u32..80)) / 4.0,
                    battery_est: f64::from(rng.random_range(0u32..=1000)),
                    generated_est: f64::from(rng.random_range(0u32..40)) / 4.0,
                    age: 0.0,
                },
            })
            .collect();
        let eligible = policy_filter(n, w, &views, &cfg, 1000.0);
        let own = f64::from(rng.random_range(1u32..=10));
        let tau = 0.5f64.powi(rng.random_range(0..6));
        let rate = f64::from(rng.random_range(1u32..=8));
        let nb: Vec<(Coord, f64, f64)> = eligible
            .iter()
            .map(|c| (c.coord, c.estimate.queue_est, c.estimate.generated_est))
            .collect();
        // First minimiser in neighbour order.
        let mut best: Option<(Coord, f64)> = None;
        for &(m, _, _) in &nb {
            let b = local_bound(own, tau, rate, &nb, m);
            if best.map_or(true, |(_, v)| b < v) {
                best = Some((m, b));
            }
        }
        if select_next_hop(own, &eligible) == best.map(|(m, _)| m) {
            agree += 1;
        }
    }
    Outcome {
        pass: agree == TRIALS,
        detail: format!("{agree}/{TRIALS} configurations agree (need 100%)"),
    }
}

fn identity() -> Outcome {
    const TRIALS: u32 = 1_000_000;
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed_0007);
    let mut held = 0;
    for _ in 0..TRIALS {
        let scale = 10f64.powi(rng.random_range(-2..3));
        let (u, mu, a) = (rng.random::<f64>() * scale, rng.random::<f64>() * scale, rng.random::<f64>() * scale);
        let v = (u - mu).max(0.0) + a;
        let v = v * rng.random::<f64>();
        debug_assert!(v <= queue_estimate(u, mu, a, 0.0));
        if check_identity(v, u, mu, a) {
            held += 1;
        }
    }
    Outcome {
        pass: held == TRIALS,
        detail: format!("{held}/{TRIALS} tuples satisfy the squared inequality (need 100%)"),
    }
}

fn recovery() -> Outcome {
    let diagonal = 2f64.sqrt() * 500.0 / 31.0;
    let r = estimator_recovery();
    Outcome {
        pass: r.direction_error_deg < 1.0 && r.offset_error_cm < diagonal && r.tilted_error_deg < 1.0,
        detail: format!(
            "direction {:.3} deg, offset {:.2} cm (diagonal {diagonal:.2}), tilted {:.3} deg (need < 1, < diagonal, < 1)",
            r.direction_error_deg, r.offset_error_cm, r.tilted_error_deg
        ),
    }
}

fn run_cli(out: &Path) -> (bool, Duration) {
    let start = Instant::now();
    let status = Command::new(env!("CARGO_BIN_EXE_hypercp"))
        .args(["run", "--preset", "paper-fig4-7", "--out"])
        .arg(out)
        .status()
        .expect("binary runs");
    (status.success(), start.elapsed())
}

fn main() -> ExitCode {
    let dir = tempfile::tempdir().expect("temporary directory");
    let (first, second) = (dir.path().join("first"), dir.path().join("second"));

    let (ok, elapsed) = run_cli(&first);
    assert!(ok, "preset run failed");
    println!("preset sweep: 20 reps x 8 periods x 2 variants in {:.1} s", elapsed.as_secs_f64());
    let csv_text = std::fs::read_to_string(first.join("results.csv")).expect("results.csv");
    let means = Means::parse(&csv_text);
    let complete = PERIODS
        .iter()
        .all(|&p| VARIANTS.iter().all(|v| means.reps(p, v) >= MIN_REPLICATIONS));
    assert!(complete, "preset sweep is missing cells");

    // Conservation is checked in-run; the records carry the invariants.
    let mut cfg = FileConfig::default();
    Preset::PaperFig4To7.apply(&mut cfg);
    let exp = cfg.experiment().expect("preset is valid");
    let records = sweep(&exp, None).expect("sweep runs");
    let accounting = records.iter().filter(|r| !r.metrics.invariants.accounting_holds).count();
    let violations: u64 = records.iter().map(|r| r.metrics.invariants.bound_violations).sum();
    let residual = records
        .iter()
        .map(|r| r.metrics.invariants.max_energy_residual)
        .fold(0.0, f64::max);
    let conservation = Outcome {
        pass: accounting == 0 && violations == 0 && residual <= 1e-9,
        detail: format!(
            "{} runs: {accounting} accounting mismatches, {violations} bound violations, max energy residual {residual:.2e} (need 0, 0, <= 1e-9)",
            records.len()
        ),
    };

    let (ok2, _) = run_cli(&second);
    let same = ok2
        && std::fs::read(second.join("results.csv")).expect("second results.csv") == csv_text.as_bytes();
    let determinism = Outcome {
        pass: same,
        detail: format!(
            "second run results.csv {} ({} bytes)",
            if same { "byte-identical" } else { "differs" },
            csv_text.len()
        ),
    };

    let outcomes = [
        (1, "direction-error minimum", direction_minimum(&means)),
        (2, "congestion regime", congestion(&means)),
        (3, "offset-error linearity", offset_linearity(&means)),
        (4, "battery floor and asymptote", battery_floor(&means)),
        (5, "ideal-vs-estimated parity", parity(&means)),
        (6, "next-hop rule vs brute-force bound minimiser", theorem_oracle()),
        (7, "squared queue inequality", identity()),
        (8, "conservation", conservation),
        (9, "estimator recovery", recovery()),
        (10, "determinism", determinism),
    ];
    for (id, name, o) in &outcomes {
        verdict(*id, name, o);
    }
    let failed = outcomes.iter().filter(|(_, _, o)| !o.pass).count();
    println!("acceptance: {} passed, {failed} failed", outcomes.len() - failed);
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
