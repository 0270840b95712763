use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

#[derive(Debug, Parser)]
#[command(name = "hcm", version, about = "Check actual causation and harm in causal utility models")]
pub struct Cli {
    /// Print a machine-readable JSON report instead of text.
    #[arg(long, global = true)]
    pub json: bool,

    /// Largest witness set to search; 0 allows only but-for causation.
    #[arg(long, global = true, value_name = "N")]
    pub max_witness: Option<usize>,

    /// List every witness set, not just the first one found.
    #[arg(long, global = true)]
    pub all_witnesses: bool,

    /// Accepted for forward compatibility; every mode is deterministic.
    #[arg(long, global = true, value_name = "N")]
    pub seed: Option<u64>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args)]
pub struct ModelArgs {
    /// Path to a `.hcm` model file.
    pub model: PathBuf,

    /// Named context from the model file; defaults to `main` or the only one.
    #[arg(long, short)]
    pub context: Option<String>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Print the value of every endogenous variable, one per line.
    Solve(ModelArgs),

    /// Evaluate a formula, optionally prefixed with `[X <- x, ...]`.
    Eval {
        #[command(flatten)]
        model: ModelArgs,
        #[arg(long)]
        formula: String,
    },

    /// Check whether an event is an actual cause of an effect.
    ///
    /// Without --contrast the contrast and contrast effect are searched for.
    Cause {
        #[command(flatten)]
        model: ModelArgs,
        #[arg(long)]
        event: String,
        #[arg(long, requires = "contrast_effect")]
        contrast: Option<String>,
        #[arg(long)]
        effect: String,
        #[arg(long, requires = "contrast")]
        contrast_effect: Option<String>,
    },

    /// Check whether an event harms, and in which sense.
    Harm {
        #[command(flatten)]
        model: ModelArgs,
        #[arg(long)]
        event: String,
        #[arg(long, group = "mode")]
        strict: bool,
        #[arg(long, group = "mode")]
        counterfactual: bool,
        #[arg(long, group = "mode")]
        below_default: bool,
        /// Judge the alternative event with these values instead.
        #[arg(long, group = "mode", value_name = "CONTRAST")]
        alternative: Option<String>,
        /// Override the model's default utility, e.g. `1/2`.
        #[arg(long, value_name = "RATIONAL")]
        default: Option<String>,
    },

    /// Run the worked-example corpus and compare against expected verdicts.
    Corpus {
        /// Only entries whose name matches this glob.
        #[arg(long)]
        filter: Option<String>,
        /// Directory holding a MANIFEST and model files; the built-in corpus otherwise.
        #[arg(long)]
        dir: Option<PathBuf>,
    },

    /// Print the dependency graph in DOT format.
    Graph {
        /// Path to a `.hcm` model file.
        model: PathBuf,
    },

    /// Re-run the query recorded in a JSON report (`-` reads stdin).
    Replay { report: PathBuf },
}
