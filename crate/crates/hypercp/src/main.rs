use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use hypercp::config::{FileConfig, Overrides, Preset, VariantChoice};
use hypercp::experiment::{summarize, sweep};
use hypercp::output::{write_results, write_summary, write_text};
use hypercp::report;
use hypercp::CliError;

#[derive(Debug, Parser)]
#[command(name = "hypercp", version, about = "Hyper-CP nanonetwork simulator")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Run the sweep and write results, summary and report.
    Run(Common),
    /// Check the configuration and print it with all defaults filled in.
    Validate(Common),
}

#[derive(Debug, Args)]
struct Common {
    /// TOML configuration file; defaults apply when omitted.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Output directory.
    #[arg(long, default_value = "results")]
    out: PathBuf,
    /// Comma-separated sensing periods in seconds.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    periods: Option<Vec<f64>>,
    /// Replications per period and variant.
    #[arg(long)]
    reps: Option<u32>,
    #[arg(long, value_enum)]
    variant: Option<VariantChoice>,
    /// Base seed; replication r uses seed + r.
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long, value_enum)]
    preset: Option<Preset>,
    /// Write one event trace per run under <out>/traces.
    #[arg(long)]
    trace: bool,
}

impl Common {
    fn resolved_config(&self) -> Result<FileConfig, CliError> {
        let mut cfg = match &self.config {
            Some(path) => FileConfig::load(path)?,
            None => FileConfig::default(),
        };
        Overrides {
            preset: self.preset,
            periods: self.periods.clone(),
            replications: self.reps,
            variants: self.variant,
            seed: self.seed,
            trace: self.trace,
        }
        .apply(&mut cfg);
        cfg.resolved()
    }
}

fn create_dir(path: &Path) -> Result<(), CliError> {
    std::fs::create_dir_all(path).map_err(|e| CliError::Output(format!("{}: {e}", path.display())))
}

fn validate(args: &Common) -> Result<(), CliError> {
    let cfg = args.resolved_config()?;
    cfg.experiment()?;
    print!("{}", cfg.to_toml());
    Ok(())
}

fn run(args: &Common) -> Result<(), CliError> {
    let cfg = args.resolved_config()?;
    let exp = cfg.experiment()?;
    let resolved = cfg.to_toml();
    create_dir(&args.out)?;
    write_text(&args.out.join("config.resolved.toml"), &resolved)?;
    let trace_dir = exp.trace.then(|| args.out.join("traces"));
    if let Some(dir) = &trace_dir {
        create_dir(dir)?;
    }
    let records = sweep(&exp, trace_dir.as_deref())?;
    let summary = summarize(&records);
    write_results(&args.out.join("results.csv"), &records)?;
    write_summary(&args.out.join("summary.json"), &summary)?;
    let report = report::generate(&exp, &records, &summary, args.preset.map(Preset::name), &resolved, exp.seed);
    write_text(&args.out.join("report.txt"), &report.to_text())?;
    write_text(&args.out.join("report.json"), &report.to_json())?;
    eprintln!(
        "{} runs written to {}",
        records.len(),
        args.out.join("results.csv").display()
    );
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    let result = match &cli.command {
        Command::Run(args) => run(args),
        Command::Validate(args) => validate(args),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
