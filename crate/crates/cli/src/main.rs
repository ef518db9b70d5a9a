//! `stackcount`: point counts, measures and Poincaré series from a project file.

mod commands;
mod error;
mod project;

use clap::{Parser, Subcommand, ValueEnum};
use stackcount::measures::SeriesKind;
use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use commands::{Outcome, SpecializeArgs};
use error::{exit, CliError};
use project::Project;

#[derive(Parser)]
#[command(name = "stackcount", version, about = "Exact point counting over truncated p-adic rings")]
struct Cli {
    /// Project file (TOML). Built-in names are available without one.
    #[arg(long, global = true)]
    project: Option<PathBuf>,
    /// Exit with status 5 when a result is partial or a verdict is not a match.
    #[arg(long, global = true)]
    strict: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum Kind {
    Tilde,
    P,
    Q,
}

impl From<Kind> for SeriesKind {
    fn from(k: Kind) -> Self {
        match k {
            Kind::Tilde => SeriesKind::Tilde,
            Kind::P => SeriesKind::P,
            Kind::Q => SeriesKind::Q,
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Number of points over a ring (groupoid-weighted for stacks).
    Count {
        #[arg(long)]
        target: String,
        #[arg(long)]
        ring: String,
        /// Maximum number of candidate points examined.
        #[arg(long)]
        bound: Option<u64>,
    },
    /// Poincaré series coefficients, optionally with a rational fit.
    Series {
        #[arg(long)]
        target: String,
        #[arg(long)]
        ring: String,
        #[arg(long, value_enum, default_value = "tilde")]
        kind: Kind,
        #[arg(long)]
        terms: Option<usize>,
        #[arg(long)]
        fit: bool,
    },
    /// p-adic measure of the target or of a definable subset.
    Measure {
        #[arg(long)]
        target: Option<String>,
        #[arg(long)]
        ring: String,
        /// Formula text or the name of a formula in the project.
        #[arg(long)]
        set: Option<String>,
        /// Dimension used for normalization (defaults to the target's).
        #[arg(long, allow_hyphen_values = true)]
        dim: Option<i64>,
        #[arg(long)]
        max_level: Option<u32>,
    },
    /// Greenberg transform and the point-count comparison it guarantees.
    Greenberg {
        #[arg(long)]
        target: String,
        #[arg(long)]
        ring: String,
        /// Overrides the ring's level.
        #[arg(long)]
        level: Option<u32>,
        #[arg(long)]
        emit_equations: bool,
    },
    /// Equations of the singular locus.
    Singular {
        #[arg(long)]
        target: String,
        /// Also count its points over this ring.
        #[arg(long)]
        ring: Option<String>,
    },
    /// Witt vector structure polynomials.
    Witt {
        #[arg(long)]
        p: u64,
        #[arg(long, default_value_t = 3)]
        len: usize,
        #[arg(long)]
        emit_polys: bool,
    },
    /// Groupoid-weighted point count of a quotient stack over a finite field.
    StackCount {
        #[arg(long)]
        stack: String,
        /// `q=<prime power>` or a ring name.
        #[arg(long)]
        field: String,
    },
    /// Measures a formula at several primes and compares with an expression in q.
    Specialize {
        #[arg(long)]
        set: String,
        #[arg(long)]
        target: Option<String>,
        #[arg(long, value_delimiter = ',')]
        primes: Vec<u64>,
        #[arg(long, value_delimiter = ',')]
        bad_primes: Vec<u64>,
        #[arg(long)]
        expect: Option<String>,
        #[arg(long, allow_hyphen_values = true)]
        dim: Option<i64>,
        #[arg(long)]
        max_level: Option<u32>,
    },
}

fn run(cli: &Cli) -> Result<Outcome, CliError> {
    let project = match &cli.project {
        Some(path) => Project::load(path)?,
        None => Project::default(),
    };
    match &cli.command {
        Command::Count { target, ring, bound } => commands::count(&project, target, ring, *bound),
        Command::Series { target, ring, kind, terms, fit } => {
            commands::series_cmd(&project, target, ring, (*kind).into(), *terms, *fit)
        }
        Command::Measure { target, ring, set, dim, max_level } => {
            commands::measure(&project, target.as_deref(), ring, set.as_deref(), *dim, *max_level)
        }
        Command::Greenberg { target, ring, level, emit_equations } => {
            commands::greenberg(&project, target, ring, *level, *emit_equations)
        }
        Command::Singular { target, ring } => commands::singular(&project, target, ring.as_deref()),
        Command::Witt { p, len, emit_polys } => commands::witt(*p, *len, *emit_polys),
        Command::StackCount { stack, field } => commands::stack_count(&project, stack, field),
        Command::Specialize { set, target, primes, bad_primes, expect, dim, max_level } => commands::specialize(
            &project,
            SpecializeArgs {
                set,
                target: target.as_deref(),
                primes: primes.clone(),
                bad_primes: bad_primes.clone(),
                expect: expect.as_deref(),
                dim: *dim,
                max_level: *max_level,
            },
        ),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(out) => {
            let mut stdout = std::io::stdout().lock();
            if write!(stdout, "{}", out.report).and_then(|_| stdout.flush()).is_err() {
                return ExitCode::from(exit::FAILURE);
            }
            if cli.strict && !out.complete {
                eprintln!("error: result is partial (--strict)");
                return ExitCode::from(exit::PARTIAL);
            }
            ExitCode::from(exit::OK)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
