use std::fs::File;
use std::io::{self, BufWriter, Read, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use yayambo::synth::{ArtificialClassifier, ArtificialEnsembleSpec};
use yayambo::{FusionRule, YayamboParams};
use yayambo_cli::commands::{render_eval, render_pairwise, write_fuse_results};
use yayambo_cli::{
    cmd_eval, cmd_fuse, cmd_pairwise, cmd_synth, parse_predictions, write_predictions,
};
use yayambo_cli::{CliError, Format, PredictionRecord, RunConfig};

/// Fuse classifier probability outputs without any knowledge of the classifiers.
#[derive(Debug, Parser)]
#[command(name = "yayambo", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Fuse every observation and emit one JSON line per observation and rule.
    Fuse {
        #[command(flatten)]
        io: IoArgs,
        #[command(flatten)]
        run: RunArgs,
        /// Include per-iteration consensus states in yayambo results.
        #[arg(long)]
        trace: bool,
    },
    /// Score each classifier column and each fusion rule against the labels.
    Eval {
        #[command(flatten)]
        io: IoArgs,
        #[command(flatten)]
        run: RunArgs,
        /// Clamp for the true-class probability in cross-entropy.
        #[arg(long, default_value_t = yayambo::metrics::DEFAULT_CE_FLOOR)]
        floor: f64,
        /// Emit JSON instead of an aligned text table.
        #[arg(long)]
        json: bool,
    },
    /// Pairwise prediction disagreement and decision agreement between classifiers.
    Pairwise {
        #[command(flatten)]
        io: IoArgs,
        /// Emit JSON instead of aligned text tables.
        #[arg(long)]
        json: bool,
    },
    /// Generate a labeled binary dataset from the artificial classifiers f1..f5.
    Synth {
        /// Observations generated for each of the two classes.
        #[arg(long, default_value_t = 5000)]
        n_per_class: usize,
        /// Comma-separated classifiers, in output column order.
        #[arg(long, value_delimiter = ',', default_value = "f1,f2,f3,f4,f5")]
        classifiers: Vec<ArtificialClassifier>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, value_enum, default_value_t = Format::Jsonl)]
        format: Format,
        /// Output file; stdout when absent or `-`.
        #[arg(long)]
        output: Option<PathBuf>,
    },
}

#[derive(Debug, Args)]
struct IoArgs {
    /// Prediction file; stdin when absent or `-`.
    input: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Format::Jsonl)]
    format: Format,
    /// Output file; stdout when absent or `-`.
    #[arg(long)]
    output: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum RuleArg {
    Sum,
    Product,
    Majority,
    Borda,
    Yayambo,
    All,
}

#[derive(Debug, Args)]
struct RunArgs {
    #[arg(long, value_enum, default_value_t = RuleArg::All)]
    rule: RuleArg,
    /// Consensus threshold, scaled by the number of classifiers.
    #[arg(long, default_value_t = YayamboParams::DEFAULT_EPSILON)]
    epsilon: f64,
    /// Smoothing term of the dissimilarity logarithm.
    #[arg(long, default_value_t = YayamboParams::DEFAULT_EPSILON0)]
    epsilon0: f64,
    #[arg(long, default_value_t = YayamboParams::DEFAULT_MAX_ITER)]
    max_iter: usize,
}

impl RunArgs {
    fn config(&self, trace: bool, floor: f64) -> Result<RunConfig, CliError> {
        let rules = match self.rule {
            RuleArg::All => FusionRule::ALL.to_vec(),
            RuleArg::Sum => vec![FusionRule::Sum],
            RuleArg::Product => vec![FusionRule::Product],
            RuleArg::Majority => vec![FusionRule::Majority],
            RuleArg::Borda => vec![FusionRule::Borda],
            RuleArg::Yayambo => vec![FusionRule::Yayambo],
        };
        let params = YayamboParams {
            epsilon: self.epsilon,
            epsilon0: self.epsilon0,
            max_iter: self.max_iter,
        };
        RunConfig::new(rules, params, trace, floor)
    }
}

fn is_stdio(path: &Option<PathBuf>) -> bool {
    path.as_ref().is_none_or(|p| p.as_os_str() == "-")
}

fn read_records(io: &IoArgs) -> Result<Vec<PredictionRecord>, CliError> {
    let input: Box<dyn Read> = if is_stdio(&io.input) {
        Box::new(io::stdin().lock())
    } else {
        Box::new(File::open(io.input.as_ref().unwrap())?)
    };
    let records = parse_predictions(input, io.format)?;
    if records.is_empty() {
        return Err(CliError::EmptyInput);
    }
    Ok(records)
}

fn open_output(path: &Option<PathBuf>) -> Result<Box<dyn Write>, CliError> {
    Ok(if is_stdio(path) {
        Box::new(BufWriter::new(io::stdout().lock()))
    } else {
        Box::new(BufWriter::new(File::create(path.as_ref().unwrap())?))
    })
}

/// Returns the number of record-level failures.
fn run(cli: Cli) -> Result<usize, CliError> {
    match cli.command {
        Command::Fuse { io, run, trace } => {
            let config = run.config(trace, yayambo::metrics::DEFAULT_CE_FLOOR)?;
            let records = read_records(&io)?;
            let results = cmd_fuse(&records, &config);
            for r in results.iter().filter(|r| r.is_error()) {
                eprintln!(
                    "observation {:?}, rule {}: {}",
                    r.obs_id,
                    r.rule,
                    r.error.as_deref().unwrap_or("")
                );
            }
            let mut out = open_output(&io.output)?;
            write_fuse_results(&mut out, &results)?;
            out.flush()?;
            Ok(results.iter().filter(|r| r.is_error()).count())
        }
        Command::Eval {
            io,
            run,
            floor,
            json,
        } => {
            let config = run.config(false, floor)?;
            let records = read_records(&io)?;
            let report = cmd_eval(&records, &config)?;
            let mut out = open_output(&io.output)?;
            if json {
                serde_json::to_writer_pretty(&mut out, &report).map_err(io::Error::from)?;
                writeln!(out)?;
            } else {
                write!(out, "{}", render_eval(&report))?;
            }
            out.flush()?;
            for row in report.rows.iter().filter(|r| r.failed > 0) {
                eprintln!(
                    "{}: {} observation(s) could not be fused",
                    row.name, row.failed
                );
            }
            Ok(report.failures())
        }
        Command::Pairwise { io, json } => {
            let records = read_records(&io)?;
            let report = cmd_pairwise(&records)?;
            let mut out = open_output(&io.output)?;
            if json {
                serde_json::to_writer_pretty(&mut out, &report).map_err(io::Error::from)?;
                writeln!(out)?;
            } else {
                write!(out, "{}", render_pairwise(&report))?;
            }
            out.flush()?;
            Ok(0)
        }
        Command::Synth {
            n_per_class,
            classifiers,
            seed,
            format,
            output,
        } => {
            let spec = ArtificialEnsembleSpec::new(n_per_class, seed, classifiers)
                .map_err(|e| CliError::Config(e.to_string()))?;
            let mut out = open_output(&output)?;
            write_predictions(&mut out, &cmd_synth(&spec), format)?;
            out.flush()?;
            Ok(0)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(0) => ExitCode::SUCCESS,
        Ok(_) => ExitCode::from(1),
        Err(err) => {
            eprintln!("error: {err}");
            ExitCode::from(2)
        }
    }
}
