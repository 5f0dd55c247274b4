use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use grounding_cli::commands::{to_json, write_text};
use grounding_cli::{assess, flow, run_case, serve, AssessInput, Synthesis, DATA_DIR_ENV};
use grounding_core::ingest::FlowQuality;
use grounding_core::CASE_NAMES;

#[derive(Parser)]
#[command(name = "grounding", version, about = "Ship grounding damage assessment")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(clap::Args, Clone, Copy)]
struct SynthesisArgs {
    /// Seed of the table synthesis sampler.
    #[arg(long)]
    seed: Option<u64>,
    /// Samples drawn per parent cell when synthesizing tables.
    #[arg(long)]
    samples: Option<usize>,
}

impl From<SynthesisArgs> for Synthesis {
    fn from(a: SynthesisArgs) -> Self {
        Synthesis {
            seed: a.seed,
            samples_per_cell: a.samples,
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Posterior damage from ship, incident and evidence files.
    Assess {
        #[arg(long)]
        ship: PathBuf,
        #[arg(long)]
        incident: Option<PathBuf>,
        /// Model configuration (module toggles, error catalog, bins).
        #[arg(long)]
        model: Option<PathBuf>,
        /// JSON Lines or JSON array of evidence.
        #[arg(long)]
        evidence: Option<PathBuf>,
        #[arg(long, value_delimiter = ',', default_value = "D_t,D_v,Y_D")]
        query: Vec<String>,
        #[command(flatten)]
        synthesis: SynthesisArgs,
        /// Report file; standard output when absent.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// HTTP JSON service.
    Serve {
        #[arg(long, default_value_t = 8080)]
        port: u16,
        #[arg(long, env = DATA_DIR_ENV)]
        data_dir: Option<PathBuf>,
    },
    /// Bundled reference cases.
    Case {
        #[command(subcommand)]
        action: CaseAction,
    },
    /// Flow rate from tank level soundings.
    Flow {
        /// `time_s,level_m` CSV.
        #[arg(long)]
        levels: PathBuf,
        /// `level_m,volume_m3` CSV.
        #[arg(long)]
        volume_curve: PathBuf,
        /// Averaging window, seconds.
        #[arg(long, default_value_t = 60.0)]
        window: f64,
        #[arg(long, value_enum, default_value_t = Quality::Good)]
        quality: Quality,
    },
}

#[derive(Subcommand)]
enum CaseAction {
    /// Runs a case and checks it against its tolerances.
    Run {
        #[arg(value_parser = clap::builder::PossibleValuesParser::new(CASE_NAMES))]
        name: String,
        #[command(flatten)]
        synthesis: SynthesisArgs,
        #[arg(long, default_value = ".")]
        out_dir: PathBuf,
    },
    List,
}

#[derive(Clone, Copy, ValueEnum)]
enum Quality {
    Good,
    Poor,
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    match run(Cli::parse()) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}

fn run(cli: Cli) -> Result<ExitCode, Box<dyn std::error::Error>> {
    match cli.command {
        Command::Assess {
            ship,
            incident,
            model,
            evidence,
            query,
            synthesis,
            out,
        } => {
            let report = assess(&AssessInput {
                ship,
                incident,
                model,
                evidence,
                query,
                synthesis: synthesis.into(),
            })?;
            let text = to_json(&report);
            match out {
                Some(path) => write_text(&path, &text)?,
                None => println!("{text}"),
            }
        }
        Command::Serve { port, data_dir } => {
            let rt = tokio::runtime::Runtime::new()?;
            rt.block_on(serve(port, data_dir))?;
        }
        Command::Case {
            action: CaseAction::List,
        } => {
            for name in CASE_NAMES {
                println!("{name}");
            }
        }
        Command::Case {
            action: CaseAction::Run { name, synthesis, out_dir },
        } => {
            let run = run_case(&name, synthesis.into(), &out_dir)?;
            for c in &run.checks {
                println!("{} {}: {}", if c.passed { "PASS" } else { "FAIL" }, c.criterion, c.detail);
            }
            if !run.passed() {
                return Ok(ExitCode::FAILURE);
            }
        }
        Command::Flow {
            levels,
            volume_curve,
            window,
            quality,
        } => {
            let quality = match quality {
                Quality::Good => FlowQuality::Good,
                Quality::Poor => FlowQuality::Poor,
            };
            println!("{}", to_json(&flow(&levels, &volume_curve, window, quality)?));
        }
    }
    Ok(ExitCode::SUCCESS)
}
