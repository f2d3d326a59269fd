use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use sckg_core::pipeline::{
    cmd_build, cmd_extract, cmd_ingest, cmd_report, Arm, Mode, PipelineConfig, PipelineError, ReportKind,
    ReportRequest,
};

#[derive(Debug, Parser)]
#[command(name = "sckg", version, about = "Build a supply-chain knowledge graph from search snippets")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Args)]
struct Common {
    /// Pipeline config (TOML)
    #[arg(long)]
    config: PathBuf,
    #[arg(long)]
    mode: Option<Mode>,
    #[arg(long)]
    arm: Option<Arm>,
    /// Output directory, overriding `output_dir`
    #[arg(long)]
    out: Option<PathBuf>,
    /// Worker threads, overriding `concurrency`
    #[arg(long)]
    concurrency: Option<usize>,
    /// Log live chat requests and responses here
    #[arg(long)]
    audit_dir: Option<PathBuf>,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Collect snippets (and pages/chunks for the full-text arm)
    Ingest(Common),
    /// Run relation extraction over the ingested corpora
    Extract(Common),
    /// Resolve, label and merge relations into a graph snapshot
    Build(Common),
    /// Compute a report over the built snapshot
    Report {
        /// stats, ccdf, saturation, cost, coverage or topdeg
        kind: ReportKind,
        #[command(flatten)]
        common: Common,
        /// Keep only edges with evidence at tier K or better
        #[arg(long)]
        tier: Option<u8>,
        /// Keep only edges touching a listed firm
        #[arg(long)]
        listed: bool,
        /// Rows in the top-degree table
        #[arg(long, default_value_t = 20)]
        top: usize,
    },
}

fn load(common: &Common) -> Result<PipelineConfig, PipelineError> {
    let mut cfg = PipelineConfig::load(&common.config)?;
    if let Some(m) = common.mode {
        cfg.mode = m;
    }
    if let Some(a) = common.arm {
        cfg.arm = a;
    }
    if let Some(o) = &common.out {
        cfg.output_dir = o.clone();
    }
    if let Some(c) = common.concurrency {
        cfg.concurrency = c;
    }
    if let Some(dir) = &common.audit_dir {
        cfg.live.get_or_insert_with(Default::default).audit_dir = Some(dir.clone());
    }
    cfg.validate()?;
    Ok(cfg)
}

fn run(cli: Cli) -> Result<(), PipelineError> {
    match cli.command {
        Command::Ingest(common) => {
            let summary = cmd_ingest(&load(&common)?)?;
            log::info!("ingest: {} pair(s) run, {} skipped", summary.ran, summary.skipped);
            println!(
                "requests {}  snippets {}  fetched {}/{}  chunks {}",
                summary.ledger.requests,
                summary.ledger.snippets,
                summary.ledger.fetch.success,
                summary.ledger.fetch.attempts,
                summary.ledger.chunks
            );
        }
        Command::Extract(common) => {
            let summary = cmd_extract(&load(&common)?)?;
            for (arm, l) in &summary.ledgers {
                println!(
                    "{arm}: calls {}  relations {}  rejected {}  tokens {}",
                    l.calls, l.accepted, l.rejections.total(), l.input_tokens
                );
            }
        }
        Command::Build(common) => {
            let summary = cmd_build(&load(&common)?)?;
            for (arm, l) in &summary.ledgers {
                println!("{arm}: nodes {}  edges {}  raw {}", l.nodes, l.edges, l.graph.raw_in);
            }
        }
        Command::Report {
            kind,
            common,
            tier,
            listed,
            top,
        } => {
            let cfg = load(&common)?;
            let req = ReportRequest {
                kind,
                arm: None,
                tier,
                listed,
                top,
            };
            let out = cmd_report(&cfg, &req)?;
            print!("{}", out.text);
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            let code = err.exit_code();
            eprintln!("error: {:#}", anyhow::Error::new(err).context("sckg failed"));
            ExitCode::from(u8::try_from(code).unwrap_or(1))
        }
    }
}
