mod serve;

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::Context;
use clap::{Parser, Subcommand, ValueEnum};
use oas2gql_core::eval::{eval_corpus, render_table};
use oas2gql_core::preprocess::Casing;
use oas2gql_core::report::finalize_report;
use oas2gql_core::schema::print_sdl;
use oas2gql_core::{generate_from_path, GenerateOptions};

/// Generation failed (bad document, or a warning cause under --strict).
const EXIT_GENERATION: u8 = 1;
/// Bad invocation: missing files, unparsable flags.
const EXIT_USAGE: u8 = 2;

#[derive(Parser)]
#[command(name = "oas2gql", version, about = "Wrap a REST API described by OpenAPI in a GraphQL interface")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum CasingArg {
    Camel,
    Preserve,
}

impl From<CasingArg> for Casing {
    fn from(value: CasingArg) -> Self {
        match value {
            CasingArg::Camel => Casing::Camel,
            CasingArg::Preserve => Casing::Preserve,
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Generate the GraphQL schema and the generation report.
    Generate {
        oas: PathBuf,
        /// Fail instead of mitigating missing or ambiguous information.
        #[arg(long)]
        strict: bool,
        /// Write the JSON report here.
        #[arg(long)]
        report: Option<PathBuf>,
        /// Write the SDL here instead of stdout.
        #[arg(long)]
        sdl: Option<PathBuf>,
        #[arg(long, value_enum, default_value = "camel")]
        casing: CasingArg,
    },
    /// Serve the wrapper over HTTP.
    Serve(serve::ServeArgs),
    /// Generate every document in a directory and summarize the outcomes.
    Eval {
        corpus: PathBuf,
        /// Also run every document in strict mode.
        #[arg(long)]
        strict_also: bool,
        /// Write the full statistics as JSON here.
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn usage(message: impl std::fmt::Display) -> ExitCode {
    eprintln!("error: {message}");
    ExitCode::from(EXIT_USAGE)
}

fn write(path: &Path, text: &str) -> anyhow::Result<()> {
    std::fs::write(path, text).with_context(|| format!("cannot write {}", path.display()))
}

fn cmd_generate(oas: &Path, options: GenerateOptions, report: Option<&Path>, sdl: Option<&Path>) -> anyhow::Result<ExitCode> {
    let (schema, generation_report) = match generate_from_path(oas, &options) {
        Ok(generated) => (Some(generated.schema), generated.report),
        Err(failure) => {
            eprintln!("error: {}", failure.error);
            (None, failure.report)
        }
    };
    if let Some(path) = report {
        write(path, &finalize_report(&generation_report))?;
    }
    for warning in &generation_report.warnings {
        eprintln!("warning: {} at {}: {}", warning.kind.as_str(), warning.location, warning.mitigation);
    }
    let Some(schema) = schema else {
        return Ok(ExitCode::from(EXIT_GENERATION));
    };
    let text = print_sdl(&schema);
    match sdl {
        Some(path) => write(path, &text)?,
        None => print!("{text}"),
    }
    Ok(ExitCode::SUCCESS)
}

fn cmd_eval(corpus: &Path, strict_also: bool, out: Option<&Path>) -> anyhow::Result<ExitCode> {
    let parallelism = std::thread::available_parallelism().map(|n| n.get()).unwrap_or(4);
    let stats = eval_corpus(corpus, strict_also, parallelism)
        .with_context(|| format!("cannot read corpus {}", corpus.display()))?;
    if let Some(path) = out {
        write(path, &serde_json::to_string_pretty(&stats)?)?;
    }
    print!("{}", render_table(&stats));
    Ok(ExitCode::SUCCESS)
}

fn main() -> ExitCode {
    tracing_subscriber::fmt()
        .with_env_filter(tracing_subscriber::EnvFilter::from_default_env())
        .with_writer(std::io::stderr)
        .init();
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Generate {
            oas,
            strict,
            report,
            sdl,
            casing,
        } => {
            if !oas.is_file() {
                return usage(format!("{} is not a readable file", oas.display()));
            }
            let options = GenerateOptions {
                strict,
                casing: casing.into(),
                ..Default::default()
            };
            cmd_generate(&oas, options, report.as_deref(), sdl.as_deref())
        }
        Command::Serve(args) => {
            if !args.oas.is_file() {
                return usage(format!("{} is not a readable file", args.oas.display()));
            }
            serve::run(args)
        }
        Command::Eval { corpus, strict_also, out } => {
            if !corpus.is_dir() {
                return usage(format!("{} is not a directory", corpus.display()));
            }
            cmd_eval(&corpus, strict_also, out.as_deref())
        }
    };
    result.unwrap_or_else(|e| usage(format!("{e:#}")))
}
