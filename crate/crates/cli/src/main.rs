use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use tcbench_cli::config::ExperimentConfig;
use tcbench_cli::pipeline::{self, Backends, RunOptions, RunSummary};
use tcbench_cli::CliError;

#[derive(Parser)]
#[command(
    name = "tcbench",
    version,
    about = "Text classification benchmarking: fine-tuning vs zero-shot"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Common {
    /// Experiment config (TOML).
    #[arg(long)]
    config: PathBuf,
    /// Validate and print the plan; write nothing.
    #[arg(long)]
    dry_run: bool,
    /// Run with this single seed instead of the configured list.
    #[arg(long)]
    seed: Option<u64>,
    /// Artifact directory override.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Md,
    Tex,
}

#[derive(Subcommand)]
enum Command {
    /// Run the configured task end to end.
    Run(Common),
    /// Load and preprocess the dataset; write a canonical dump.
    Ingest(Common),
    /// Write the train/test split.
    Split(Common),
    /// Run a fine-tuning or baseline task.
    Finetune(Common),
    /// Run a prompted or NLI zero-shot task.
    Zeroshot(Common),
    /// Run a learning-curve ablation.
    Ablate(Common),
    /// Render a results table from a run store.
    Report {
        /// Run store directory.
        #[arg(long, conflicts_with = "config")]
        store: Option<PathBuf>,
        /// Take the store directory from this config.
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long, value_enum, default_value = "md")]
        format: Format,
        #[arg(long)]
        bold_best: bool,
    },
}

impl Common {
    fn options(&self) -> RunOptions {
        RunOptions {
            dry_run: self.dry_run,
            seed: self.seed,
            out: self.out.clone(),
        }
    }
}

fn print_summary(s: &RunSummary, dry_run: bool) {
    if dry_run {
        print!("{}", s.plan);
        return;
    }
    for r in &s.records {
        println!("run {} ({}, {})", r.run_id, r.task, r.system_name);
    }
    if let Some(t) = &s.table {
        print!("{t}");
    }
    for a in &s.artifacts {
        println!("wrote {}", a.display());
    }
}

fn staged(c: &Common, expect: Option<&[&str]>) -> Result<(), CliError> {
    let cfg = ExperimentConfig::load(&c.config)?;
    let summary = pipeline::execute(&cfg, &c.options(), &Backends::default(), expect)?;
    print_summary(&summary, c.dry_run);
    Ok(())
}

fn run(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Run(c) => staged(&c, None),
        Command::Finetune(c) => staged(&c, Some(&["finetune", "baseline"])),
        Command::Zeroshot(c) => staged(&c, Some(&["zeroshot", "nli"])),
        Command::Ablate(c) => staged(&c, Some(&["ablation"])),
        Command::Ingest(c) => {
            let cfg = ExperimentConfig::load(&c.config)?;
            if c.dry_run {
                print!("{}", pipeline::plan(&cfg)?);
                return Ok(());
            }
            let (ds, path) = pipeline::ingest(&cfg, &c.options(), &Backends::default())?;
            println!("{} records, class counts {:?}", ds.len(), ds.class_counts());
            if let Some(p) = path {
                println!("wrote {}", p.display());
            }
            Ok(())
        }
        Command::Split(c) => {
            let cfg = ExperimentConfig::load(&c.config)?;
            if c.dry_run {
                print!("{}", pipeline::plan(&cfg)?);
                return Ok(());
            }
            let (split, paths) = pipeline::split_stage(&cfg, &c.options(), &Backends::default())?;
            println!("train {} / test {}", split.train.len(), split.test.len());
            for p in paths {
                println!("wrote {}", p.display());
            }
            Ok(())
        }
        Command::Report {
            store,
            config,
            format,
            bold_best,
        } => {
            let store = match (store, config) {
                (Some(s), _) => s,
                (None, Some(c)) => ExperimentConfig::load(&c)?.output.store_dir,
                (None, None) => return Err(CliError::ConfigInvalid("report: give --store or --config".into())),
            };
            print!(
                "{}",
                pipeline::report_table(&store, matches!(format, Format::Tex), bold_best)?
            );
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
