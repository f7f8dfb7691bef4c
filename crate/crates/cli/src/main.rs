//! `kflow`: regional knowledge-flow accounting from the command line.
//!
//! Exit codes: 0 success, 1 input error, 2 configuration error, 3 internal
//! invariant violation.

mod commands;
mod config;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use kflow::synthkit::GeneratorConfig;
use kflow::{Error, Orientation};

use crate::commands::Session;
use crate::config::{ConfigArgs, ConfigError};

#[derive(Parser, Debug)]
#[command(name = "kflow", version, about = "Regional knowledge-flow accounting")]
#[command(
    after_help = "Settings come from --config (TOML, same keys as the long flags with \
                  underscores, corpus_dir for --corpus) and are overridden by flags. Exit codes: \
                  0 ok, 1 input error, 2 configuration error, 3 internal invariant violation."
)]
struct Cli {
    #[command(flatten)]
    config: ConfigArgs,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum OrientationArg {
    Generated,
    Earned,
    Both,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Check author links and address resolution; writes validation.csv
    Validate,
    /// Classify publications by region of production; writes attribution.csv
    Assign,
    /// Gains, flow matrix and per-region summary
    Flows {
        /// Also write one matrix per subject category (sc_matrices.csv)
        #[arg(long)]
        per_sc: bool,
    },
    /// Regional balance of knowledge flows, overall and per subject category
    Balance {
        /// Region for the per-SC breakdown; repeatable [default: every region]
        #[arg(long = "region")]
        regions: Vec<String>,
    },
    /// Bilateral balance between two regions, per subject category
    Pairwise {
        /// Perspective region
        x: String,
        /// Partner region
        y: String,
        /// Restrict to the subject categories of one macro-area
        #[arg(long)]
        area: Option<String>,
    },
    /// Outflow (KOSI) and inflow (KISI) specialization indexes
    Specialize {
        #[arg(long, value_enum, default_value = "both")]
        orientation: OrientationArg,
        /// Subject categories listed per region in top_*.csv
        #[arg(long, default_value_t = 10)]
        top: usize,
    },
    /// Maximum import/export partner graph; writes edges.csv and edges.dot
    Edges {
        /// Use one subject category's matrix instead of the overall one
        #[arg(long)]
        sc: Option<String>,
    },
    /// Generate a synthetic corpus with planted ground truth
    Synth {
        /// Generator config (TOML); flags below override it
        #[arg(long)]
        generator: Option<PathBuf>,
        /// Target directory
        #[arg(long)]
        out: PathBuf,
        /// [default: 1]
        #[arg(long)]
        seed: Option<u64>,
        /// [default: 500]
        #[arg(long)]
        n_pubs: Option<usize>,
        /// [default: 5]
        #[arg(long)]
        n_regions: Option<usize>,
        /// [default: 10]
        #[arg(long)]
        n_scs: Option<usize>,
        /// Probability that a citation stays near the cited region [default: 0.5]
        #[arg(long)]
        locality: Option<f64>,
        /// Expected citations per publication [default: 3]
        #[arg(long)]
        citation_density: Option<f64>,
    },
    /// Run every stage; writes all exports, report.json and manifest.json
    Report,
}

fn exit_code(err: &anyhow::Error) -> u8 {
    if err.chain().any(|e| e.is::<ConfigError>()) {
        return 2;
    }
    for e in err.chain() {
        if let Some(core) = e.downcast_ref::<Error>() {
            return match core {
                Error::Invariant(_) => 3,
                Error::InvalidArgument(_) => 2,
                _ => 1,
            };
        }
    }
    1
}

fn run(cli: Cli) -> anyhow::Result<()> {
    if let Command::Synth {
        generator,
        out,
        seed,
        n_pubs,
        n_regions,
        n_scs,
        locality,
        citation_density,
    } = &cli.command
    {
        let mut g = match generator {
            Some(p) => commands::load_generator(p)?,
            None => GeneratorConfig::default(),
        };
        g.seed = seed.unwrap_or(g.seed);
        g.n_pubs = n_pubs.unwrap_or(g.n_pubs);
        g.n_regions = n_regions.unwrap_or(g.n_regions);
        g.n_scs = n_scs.unwrap_or(g.n_scs);
        g.locality = locality.unwrap_or(g.locality);
        g.citation_density = citation_density.unwrap_or(g.citation_density);
        g.validate().map_err(|e| ConfigError(e.to_string()))?;
        return commands::synth(&g, out);
    }
    let session = Session::open(config::load(&cli.config)?)?;
    match cli.command {
        Command::Validate => commands::validate(session),
        Command::Assign => commands::assign(session),
        Command::Flows { per_sc } => commands::flows(session, per_sc),
        Command::Balance { regions } => commands::balance(session, &regions),
        Command::Pairwise { x, y, area } => commands::pairwise(session, &x, &y, area.as_deref()),
        Command::Specialize { orientation, top } => {
            let which = match orientation {
                OrientationArg::Generated => Some(Orientation::Generated),
                OrientationArg::Earned => Some(Orientation::Earned),
                OrientationArg::Both => None,
            };
            commands::specialize(session, which, top)
        }
        Command::Edges { sc } => commands::edges(session, sc.as_deref()),
        Command::Report => commands::report(session),
        Command::Synth { .. } => unreachable!("handled above"),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::from(exit_code(&err))
        }
    }
}
