use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use qtrit_cli::{
    bounds_table, classical, gap_report, parse_j_values, quantum_run, quantum_verify, rows_to_csv,
    BoundsOptions, ClassicalCommand, CliError, CliResult, GapOptions, ReportEnvelope, RunOptions,
    VerifyOptions,
};
use qtrit_core::bounds::{Family, ImRule};
use qtrit_core::quantum_protocol::Engine;

#[derive(Parser)]
#[command(
    name = "qtrit",
    version,
    about = "Trit communication-complexity simulator and analyzer"
)]
struct Cli {
    /// Output format.
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    format: Format,
    /// Write the report here instead of stdout.
    #[arg(long, global = true)]
    output: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Json,
    Csv,
}

#[derive(Clone, Copy, ValueEnum)]
enum EngineArg {
    Dense,
    Analytic,
}

#[derive(Subcommand)]
enum Command {
    /// Check the root gate, the qubit swap and the class rotation on every X pattern.
    QuantumVerify {
        /// Party counts for the dense class sweep.
        #[arg(long = "k", value_delimiter = ',', default_values_t = [4usize, 7])]
        parties: Vec<usize>,
        #[arg(long, default_value_t = 1e-10)]
        tolerance: f64,
        #[arg(long, hide = true)]
        tamper: bool,
    },
    /// Run the quantum protocol on random admissible inputs.
    QuantumRun {
        #[arg(long = "k")]
        parties: usize,
        #[arg(long, default_value_t = 1000)]
        trials: u64,
        #[arg(long, value_enum, default_value_t = EngineArg::Dense)]
        engine: EngineArg,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Include one record per trial.
        #[arg(long)]
        records: bool,
    },
    /// Classical strategy analysis.
    Classical {
        #[command(subcommand)]
        command: ClassicalArgs,
    },
    /// Evaluate one bound family over a range of j.
    Bounds {
        #[arg(long)]
        family: Family,
        /// `5..60:5`, `5..60` or `5,10,20`.
        #[arg(long = "j", default_value = "5..60:5")]
        js: String,
        #[arg(long, default_value = "max")]
        im_rule: ImRule,
        #[arg(long)]
        a: Option<u8>,
        #[arg(long)]
        i: Option<u8>,
        #[arg(long)]
        m: Option<u8>,
    },
    /// Quantum success against the best homogeneous classical strategy.
    GapReport {
        #[arg(long = "k", value_delimiter = ',', default_values_t = [4usize, 13, 31])]
        parties: Vec<usize>,
        #[arg(long, default_value_t = 1000)]
        trials: u64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
}

#[derive(Subcommand)]
enum ClassicalArgs {
    /// The ten-party all-zero transcript example.
    Example,
    /// Success probability of a strategy profile.
    Eval {
        #[arg(long = "k")]
        parties: usize,
        /// Division name (`A`..`O`), a 6-trit table, or `001122x3,012012`.
        #[arg(long)]
        profile: String,
        /// Allow the exhaustive evaluator up to ten parties.
        #[arg(long)]
        long_run: bool,
    },
    /// Best homogeneous strategy, optionally refined by local search.
    Search {
        #[arg(long = "k")]
        parties: usize,
        #[arg(long, default_value_t = 0)]
        rounds: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
}

fn dispatch(command: Command) -> CliResult<ReportEnvelope> {
    match command {
        Command::QuantumVerify {
            parties,
            tolerance,
            tamper,
        } => quantum_verify(&VerifyOptions {
            parties,
            tolerance,
            tamper,
        }),
        Command::QuantumRun {
            parties,
            trials,
            engine,
            seed,
            records,
        } => {
            let engine = match engine {
                EngineArg::Dense => Engine::Dense,
                EngineArg::Analytic => Engine::Analytic,
            };
            quantum_run(&RunOptions {
                parties,
                trials,
                engine,
                seed,
                records,
            })
        }
        Command::Classical { command } => classical(&match command {
            ClassicalArgs::Example => ClassicalCommand::Example,
            ClassicalArgs::Eval {
                parties,
                profile,
                long_run,
            } => ClassicalCommand::Eval {
                parties,
                profile,
                long_run,
            },
            ClassicalArgs::Search {
                parties,
                rounds,
                seed,
            } => ClassicalCommand::Search {
                parties,
                rounds,
                seed,
            },
        }),
        Command::Bounds {
            family,
            js,
            im_rule,
            a,
            i,
            m,
        } => {
            let js = parse_j_values(&js)?;
            bounds_table(&BoundsOptions {
                family,
                js,
                im_rule,
                a,
                i,
                m,
            })
        }
        Command::GapReport {
            parties,
            trials,
            seed,
        } => gap_report(&GapOptions {
            parties,
            trials,
            seed,
        }),
    }
}

fn run(cli: Cli) -> CliResult<i32> {
    let envelope = dispatch(cli.command)?;
    let text = match cli.format {
        Format::Json => envelope.to_json() + "\n",
        Format::Csv => rows_to_csv(&envelope)?,
    };
    match cli.output {
        Some(path) => std::fs::write(&path, text)
            .map_err(|e| CliError::Failure(format!("{}: {e}", path.display())))?,
        None => print!("{text}"),
    }
    Ok(envelope.exit_code())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    match run(cli) {
        Ok(code) => ExitCode::from(code as u8),
        Err(e) => {
            eprintln!("{e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
