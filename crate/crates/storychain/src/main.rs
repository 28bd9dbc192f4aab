use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use storychain::config::{load_config, PipelineConfig};
use storychain::error::Error;
use storychain::pipeline;

#[derive(Parser)]
#[command(name = "storychain", version, about = "Detect chains of related news articles")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Common {
    /// key = value configuration file; defaults apply when omitted
    #[arg(short, long)]
    config: Option<PathBuf>,
    /// override config keys, e.g. -s window_days=2 -s seed=7
    #[arg(short = 's', long = "set", value_name = "KEY=VALUE")]
    set: Vec<String>,
}

#[derive(Subcommand)]
enum Command {
    /// Validate the raw corpus and write normalized articles plus stats
    Ingest(Common),
    /// Build the similarity network and the hierarchical story tree
    Cluster(Common),
    /// Evaluate the three pair classifiers against labeled pairs
    Eval(Common),
    /// Story-level tables: sizes, source association, follow-up delays
    Stats(Common),
    /// Full pipeline: ingest, cluster, eval (if labels), stats
    Run(Common),
}

impl Common {
    fn config(&self) -> storychain::Result<PipelineConfig> {
        let mut cfg = match &self.config {
            Some(path) => load_config(path)?,
            None => PipelineConfig::default(),
        };
        for kv in &self.set {
            let (key, value) = kv
                .split_once('=')
                .ok_or_else(|| Error::Config(format!("--set expects KEY=VALUE, got {kv:?}")))?;
            cfg.apply(key.trim(), value.trim())?;
        }
        cfg.validate()?;
        Ok(cfg)
    }
}

fn run(cli: Cli) -> storychain::Result<()> {
    match cli.command {
        Command::Ingest(c) => pipeline::cmd_ingest(&c.config()?),
        Command::Cluster(c) => pipeline::cmd_cluster(&c.config()?),
        Command::Eval(c) => pipeline::cmd_eval(&c.config()?).map(|_| ()),
        Command::Stats(c) => pipeline::cmd_stats(&c.config()?),
        Command::Run(c) => pipeline::cmd_run(&c.config()?),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            // clap uses 0 for --help/--version and 2 for usage errors;
            // remap usage errors to 1 so 2 stays reserved for data errors
            let code = if e.exit_code() == 0 { 0 } else { 1 };
            let _ = e.print();
            return ExitCode::from(code as u8);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
