//! `cgfa`: probabilistic termination of Chemical Ground Form models, exactly
//! for a concrete initial solution or as bounds for an interval one.
//!
//! Exit codes: 0 success, 1 invalid model or I/O failure, 2 state cap
//! exceeded, 64 usage error.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use cgfa_core::export::{
    abstract_json, alts_dot, concrete_json, decimal, dtmc_dot, imc_dot, lts_dot,
};
use cgfa_core::termination::DEFAULT_MAX_ITERS;
use cgfa_core::{
    build_lts, explore, parse_model, reach_bounds, reach_termination, to_dtmc, to_imc, AbstractLts,
    Dtmc, Imc, Lts, Model, Rational, ReachBounds, Scalar,
};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};
use thiserror::Error;

#[derive(Debug, Parser)]
#[command(
    name = "cgfa",
    version,
    about = "Termination analysis of Chemical Ground Form models"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Exact termination probability from a concrete `init`.
    Check(Invocation),
    /// Termination bounds from an interval `init`.
    Abstract(Invocation),
    /// Write one stage of the pipeline as JSON, DOT or text.
    Export(Invocation),
}

#[derive(Debug, Args)]
struct Invocation {
    model: PathBuf,
    #[command(flatten)]
    flags: Flags,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Dot,
    Text,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Stage {
    Lts,
    Dtmc,
    Alts,
    Imc,
    Bounds,
}

impl Stage {
    fn is_concrete(self) -> bool {
        matches!(self, Stage::Lts | Stage::Dtmc)
    }

    fn name(self) -> &'static str {
        match self {
            Stage::Lts => "lts",
            Stage::Dtmc => "dtmc",
            Stage::Alts => "alts",
            Stage::Imc => "imc",
            Stage::Bounds => "bounds",
        }
    }
}

#[derive(Debug, Args)]
struct Flags {
    /// Replace new abstract states by an already explored state containing them.
    #[arg(long, overrides_with = "no_widening")]
    widening: bool,
    #[arg(long)]
    no_widening: bool,
    #[arg(long, default_value_t = 100_000)]
    state_cap: usize,
    /// Largest valuation box enumerated exactly when bounding rate ratios.
    #[arg(long, default_value_t = 4096)]
    enum_cap: usize,
    #[arg(long, default_value_t = 1e-9)]
    epsilon: f64,
    #[arg(long, value_enum)]
    format: Option<Format>,
    #[arg(long, value_enum)]
    stage: Option<Stage>,
    /// Write the result here instead of standard output.
    #[arg(long, short)]
    output: Option<PathBuf>,
}

impl Flags {
    fn widening(&self) -> bool {
        !self.no_widening
    }

    fn config(&self, stage: Stage) -> Value {
        json!({
            "widening": self.widening(),
            "state_cap": self.state_cap,
            "enum_cap": self.enum_cap,
            "epsilon": self.epsilon,
            "max_iters": DEFAULT_MAX_ITERS,
            "stage": stage.name(),
        })
    }
}

#[derive(Debug, Error)]
enum Failure {
    #[error("{0}")]
    Invalid(String),
    #[error("{0}")]
    Cap(String),
    #[error("{0}")]
    Io(String),
}

impl Failure {
    fn code(&self) -> u8 {
        match self {
            Failure::Invalid(_) | Failure::Io(_) => 1,
            Failure::Cap(_) => 2,
        }
    }
}

fn load(path: &Path) -> Result<(String, Model), Failure> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Failure::Io(format!("{}: {e}", path.display())))?;
    let model = parse_model(&text).map_err(|e| {
        let lines: Vec<String> = e
            .diagnostics
            .iter()
            .map(|d| format!("{}: {d}", path.display()))
            .collect();
        Failure::Invalid(lines.join("\n"))
    })?;
    let name = path
        .file_stem()
        .map_or_else(|| "model".to_owned(), |s| s.to_string_lossy().into_owned());
    Ok((name, model))
}

struct Concrete {
    lts: Lts,
    dtmc: Dtmc<Rational>,
    termination: Vec<f64>,
}

fn run_concrete(model: &Model, flags: &Flags) -> Result<Concrete, Failure> {
    let init = model.init.as_concrete().ok_or_else(|| {
        Failure::Invalid(
            "the concrete analysis needs an exact `init`; use `cgfa abstract` for intervals".into(),
        )
    })?;
    let lts =
        build_lts(&model.env, &init, flags.state_cap).map_err(|e| Failure::Cap(e.to_string()))?;
    let dtmc = to_dtmc(&lts);
    let termination = reach_termination(&dtmc.map_scalar(f64::from_rational), flags.epsilon);
    Ok(Concrete {
        lts,
        dtmc,
        termination,
    })
}

struct Abstract {
    alts: AbstractLts,
    imc: Imc<Rational>,
    bounds: ReachBounds<f64>,
}

fn run_abstract(model: &Model, flags: &Flags) -> Result<Abstract, Failure> {
    let init = model.init.to_abstract();
    let alts = explore(&model.env, &init, flags.widening(), flags.state_cap)
        .map_err(|e| Failure::Cap(format!("abstract {e}")))?;
    let imc = to_imc(&alts, flags.enum_cap).map_err(|e| Failure::Invalid(e.to_string()))?;
    let bounds = reach_bounds(
        &imc.map_scalar(f64::from_rational),
        flags.epsilon,
        DEFAULT_MAX_ITERS,
    )
    .map_err(|e| Failure::Invalid(format!("malformed interval chain: {e}")))?;
    Ok(Abstract { alts, imc, bounds })
}

fn concrete_text(name: &str, c: &Concrete, elapsed: f64) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "model: {name}\nmode: concrete");
    let _ = writeln!(
        out,
        "states: {}\ntransitions: {}",
        c.lts.states.len(),
        c.lts.edges.len()
    );
    let _ = writeln!(out, "initial: {}", c.lts.states[c.lts.initial]);
    let _ = writeln!(
        out,
        "termination at initial: {}",
        decimal(c.termination[c.lts.initial])
    );
    let _ = writeln!(out, "per state:");
    for (i, s) in c.lts.states.iter().enumerate() {
        let _ = writeln!(out, "  {i:>4}  {}  {s}", decimal(c.termination[i]));
    }
    let _ = writeln!(out, "elapsed: {elapsed:.3}s");
    out
}

fn abstract_text(name: &str, a: &Abstract, flags: &Flags, elapsed: f64) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "model: {name}\nmode: abstract");
    let widening = if flags.widening() { "on" } else { "off" };
    let _ = writeln!(
        out,
        "abstract states: {} (widening {widening}, {} replaced)",
        a.alts.states.len(),
        a.alts.replacements.len()
    );
    let _ = writeln!(out, "abstract transitions: {}", a.alts.edges.len());
    let _ = writeln!(out, "initial: {}", a.alts.states[a.alts.initial]);
    let fallback = if a.imc.fallback_used {
        "yes (bounds may be wider than necessary)"
    } else {
        "no"
    };
    let _ = writeln!(out, "fallback ratio bounds: {fallback}");
    let (lo, hi) = a.bounds.at(a.alts.initial);
    let _ = writeln!(
        out,
        "termination at initial: [{}, {}]",
        decimal(lo),
        decimal(hi)
    );
    if !a.bounds.converged {
        let _ = writeln!(out, "warning: value iteration hit the iteration cap");
    }
    let _ = writeln!(out, "per state:");
    for (i, s) in a.alts.states.iter().enumerate() {
        let (lo, hi) = a.bounds.at(i);
        let _ = writeln!(out, "  {i:>4}  [{}, {}]  {s}", decimal(lo), decimal(hi));
    }
    let _ = writeln!(out, "elapsed: {elapsed:.3}s");
    out
}

fn pretty(doc: &Value) -> String {
    let mut s = serde_json::to_string_pretty(doc).expect("JSON values always serialize");
    s.push('\n');
    s
}

fn render(command: &Command) -> Result<(String, Option<PathBuf>), Failure> {
    let (inv, default_stage, default_format) = match command {
        Command::Check(inv) => (inv, Stage::Dtmc, Format::Text),
        Command::Abstract(inv) => (inv, Stage::Bounds, Format::Text),
        Command::Export(inv) => (inv, Stage::Bounds, Format::Json),
    };
    let flags = &inv.flags;
    let (name, model) = load(&inv.model)?;
    let stage = match (command, flags.stage) {
        (Command::Check(_), Some(s)) if !s.is_concrete() => {
            return Err(Failure::Invalid(format!(
                "`check` produces concrete stages, not `{}`",
                s.name()
            )))
        }
        (Command::Abstract(_), Some(s)) if s.is_concrete() => {
            return Err(Failure::Invalid(format!(
                "`abstract` produces abstract stages, not `{}`",
                s.name()
            )))
        }
        (Command::Export(_), None) if model.init.as_concrete().is_some() => Stage::Dtmc,
        (_, Some(s)) => s,
        (_, None) => default_stage,
    };
    let format = flags.format.unwrap_or(default_format);
    let started = Instant::now();
    let config = flags.config(stage);
    let text = if stage.is_concrete() {
        let c = run_concrete(&model, flags)?;
        match format {
            Format::Json => pretty(&concrete_json(
                &name,
                &config,
                &c.lts,
                &c.dtmc,
                &c.termination,
            )),
            Format::Dot if stage == Stage::Lts => lts_dot(&c.lts),
            Format::Dot => dtmc_dot(&c.dtmc),
            Format::Text => concrete_text(&name, &c, started.elapsed().as_secs_f64()),
        }
    } else {
        let a = run_abstract(&model, flags)?;
        match format {
            Format::Json => pretty(&abstract_json(&name, &config, &a.alts, &a.imc, &a.bounds)),
            Format::Dot if stage == Stage::Alts => alts_dot(&a.alts),
            Format::Dot if stage == Stage::Imc => imc_dot(&a.imc, None),
            Format::Dot => imc_dot(&a.imc, Some(&a.bounds)),
            Format::Text => abstract_text(&name, &a, flags, started.elapsed().as_secs_f64()),
        }
    };
    Ok((text, flags.output.clone()))
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(64)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    let result = render(&cli.command).and_then(|(text, output)| match output {
        Some(path) => {
            std::fs::write(&path, text).map_err(|e| Failure::Io(format!("{}: {e}", path.display())))
        }
        None => {
            print!("{text}");
            Ok(())
        }
    });
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.code())
        }
    }
}
