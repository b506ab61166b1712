//! `tradegm`: trade-network Google matrix pipeline.
//!
//! Exit codes: 0 success, 2 usage or validation failure, 3 numerical failure.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

mod commands;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

#[derive(Parser, Debug)]
#[command(name = "tradegm", version, about = "Google matrix analysis of multiproduct trade networks")]
pub struct Cli {
    /// Trade-flow CSV (`year,exporter,importer,product,value_usd`).
    #[arg(long, global = true)]
    pub input: Option<PathBuf>,

    /// Year to select from the input; required when it holds several.
    #[arg(long, global = true)]
    pub year: Option<i32>,

    /// Damping factor of the Google matrices.
    #[arg(long, global = true, default_value_t = tradegm_core::google::DEFAULT_DAMPING)]
    pub alpha: f64,

    /// L1 stopping tolerance of the PageRank power iteration.
    #[arg(long, global = true, default_value_t = tradegm_core::ranks::DEFAULT_TOLERANCE)]
    pub tol: f64,

    /// Maximum PageRank iterations.
    #[arg(long, global = true, default_value_t = tradegm_core::ranks::DEFAULT_MAX_ITER)]
    pub max_iter: usize,

    /// Central-difference step for sensitivities.
    #[arg(long, global = true, default_value_t = tradegm_core::sensitivity::DEFAULT_STEP)]
    pub step: f64,

    /// JSON group config (`{"label": ..., "members": [...]}`) merged after ingestion.
    #[arg(long, global = true)]
    pub merge_config: Option<PathBuf>,

    #[arg(long, global = true, default_value = ".")]
    pub out_dir: PathBuf,

    #[arg(long, global = true, value_enum, default_value_t = Format::Csv)]
    pub format: Format,

    /// Seed for `synth`.
    #[arg(long, global = true, default_value_t = 42)]
    pub seed: u64,

    /// Print errors to stderr as JSON objects.
    #[arg(long, global = true)]
    pub json_errors: bool,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
pub enum PerturbKind {
    /// One product, all exporters.
    Global,
    /// One product, one exporter.
    Country,
    /// All products of one exporter.
    Labor,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Validate and normalize a trade-flow file.
    Ingest,
    /// Merge a country group (see --merge-config) and write the merged flows.
    Merge,
    /// PageRank/CheiRank and ImportRank/ExportRank tables.
    Rank {
        #[arg(long, default_value_t = 20)]
        top: usize,
        /// Also dump both Google matrices in coordinate format.
        #[arg(long)]
        dump_matrix: bool,
    },
    /// Per-country trade balances in both descriptions.
    Balance,
    /// Balance derivatives under a price shock.
    Sensitivity {
        #[arg(long, value_enum)]
        perturb: PerturbKind,
        /// Product code for global and country shocks.
        #[arg(long)]
        product: Option<String>,
        /// Shocked country (id or two-letter code) for country and labor shocks.
        #[arg(long)]
        target: Option<String>,
        /// Labor shocks on every country in turn.
        #[arg(long)]
        all_targets: bool,
    },
    /// Reduced Google matrices for a set of actors.
    Regomax {
        /// Comma-separated country ids or two-letter codes.
        #[arg(long, value_delimiter = ',', required = true)]
        actors: Vec<String>,
        /// Strongest outgoing links kept per node.
        #[arg(long, default_value_t = 4)]
        k: usize,
    },
    /// Generate a seeded gravity-model trade file.
    Synth {
        #[arg(long, default_value_t = 24)]
        countries: usize,
        #[arg(long, default_value_t = 10)]
        products: usize,
        #[arg(long, default_value_t = 0.3)]
        sparsity: f64,
    },
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match commands::run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            let code = e.exit_code();
            if cli.json_errors {
                let obj = serde_json::json!({
                    "error": e.to_string(),
                    "kind": e.kind(),
                    "exit_code": code,
                });
                eprintln!("{obj}");
            } else {
                eprintln!("error: {e}");
            }
            ExitCode::from(code)
        }
    }
}
