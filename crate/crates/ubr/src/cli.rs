//! The `ubr` command line.

use std::fs;
use std::io::{self, BufRead, Write};
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand, ValueEnum};
use ubr_core::parse::{is_incomplete, parse_term_spanned, SpanTree};
use ubr_core::{
    parse_term, run, synth, ParseError, RunResult, Status, Strategy, Synth, Term, TypeCtx,
    TypeError,
};

use crate::harness::gen::GenConfig;
use crate::harness::props::{run_properties, run_regression, PropertyReport};
use crate::json::{Diagnostic, RunSummary, Span, TraceEntry};

pub const EXIT_OK: i32 = 0;
pub const EXIT_FAILURES: i32 = 1;
pub const EXIT_ERROR: i32 = 2;
pub const EXIT_STUCK: i32 = 3;
pub const EXIT_FUEL: i32 = 4;
pub const EXIT_PARSE: i32 = 5;
pub const EXIT_TYPE: i32 = 6;
pub const EXIT_USAGE: i32 = 64;
pub const EXIT_IO: i32 = 74;

#[derive(Parser, Debug)]
#[command(name = "ubr", version, about = "Unbind/rebind lambda calculus")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Type-check a program and print its canonical type.
    Check {
        file: PathBuf,
        /// Print diagnostics as JSON.
        #[arg(long)]
        json: bool,
    },
    /// Evaluate a program.
    Run {
        file: PathBuf,
        #[arg(long, value_enum, default_value_t = StrategyArg::Cbv)]
        strategy: StrategyArg,
        #[arg(long, default_value_t = 100_000)]
        fuel: usize,
        /// Print every reduction step.
        #[arg(long)]
        trace: bool,
        /// Emit newline-delimited JSON.
        #[arg(long)]
        json: bool,
    },
    /// Print the type of an expression.
    Type { expr: String },
    /// Interactive read-eval-type-print loop.
    Repl,
    /// Run the property suites on generated terms and the example corpus.
    Fuzz {
        #[arg(long)]
        seed: u64,
        #[arg(long)]
        count: usize,
        #[arg(long, default_value_t = 5)]
        max_depth: usize,
        #[arg(long, default_value_t = 3)]
        max_level: u32,
        /// Write the full report as JSON.
        #[arg(long)]
        report: Option<PathBuf>,
    },
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum StrategyArg {
    Cbv,
    Cbn,
}

impl From<StrategyArg> for Strategy {
    fn from(s: StrategyArg) -> Strategy {
        match s {
            StrategyArg::Cbv => Strategy::CallByValue,
            StrategyArg::Cbn => Strategy::CallByName,
        }
    }
}

/// Process entry point.
pub fn main() -> i32 {
    let stdin = io::stdin();
    run_cli(
        std::env::args(),
        &mut io::stdout().lock(),
        &mut io::stderr().lock(),
        &mut stdin.lock(),
    )
}

/// Runs the command line with explicit streams and returns the exit code.
pub fn run_cli<I, S>(
    args: I,
    out: &mut dyn Write,
    err: &mut dyn Write,
    input: &mut dyn BufRead,
) -> i32
where
    I: IntoIterator<Item = S>,
    S: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let text = e.render().to_string();
            let _ = if e.use_stderr() {
                err.write_all(text.as_bytes())
            } else {
                out.write_all(text.as_bytes())
            };
            return code;
        }
    };
    let result = match cli.command {
        Command::Check { file, json } => check(&file, json, out, err),
        Command::Run {
            file,
            strategy,
            fuel,
            trace,
            json,
        } => run_file(&file, strategy.into(), fuel, trace, json, out, err),
        Command::Type { expr } => type_of(&expr, out, err),
        Command::Repl => repl(input, out),
        Command::Fuzz {
            seed,
            count,
            max_depth,
            max_level,
            report,
        } => {
            let cfg = GenConfig {
                seed,
                max_depth,
                max_level,
                ..GenConfig::default()
            };
            fuzz(&cfg, count, report.as_deref(), out, err)
        }
    };
    result.unwrap_or_else(|e| {
        let _ = writeln!(err, "ubr: {e}");
        EXIT_IO
    })
}

fn read(path: &Path) -> io::Result<String> {
    fs::read_to_string(path)
        .map_err(|e| io::Error::new(e.kind(), format!("{}: {e}", path.display())))
}

/// A diagnostic with its human-readable position.
struct Located {
    line: usize,
    column: usize,
    diag: Diagnostic,
}

fn parse_diagnostic(e: &ParseError) -> Located {
    Located {
        line: e.span.line,
        column: e.span.column,
        diag: Diagnostic {
            code: "ParseError".into(),
            span: Span {
                start: e.span.start,
                end: e.span.end,
            },
            message: format!("expected {}, found {}", e.expected.join(" or "), e.found),
        },
    }
}

fn type_diagnostic(e: &TypeError, spans: &SpanTree) -> Located {
    let at = spans.locate(&e.path);
    Located {
        line: at.line,
        column: at.column,
        diag: Diagnostic {
            code: e.code.name().into(),
            span: Span {
                start: at.start,
                end: at.end,
            },
            message: e.message.clone(),
        },
    }
}

fn report(d: &Located, file: &str, json: bool, err: &mut dyn Write) -> io::Result<()> {
    if json {
        writeln!(
            err,
            "{}",
            serde_json::to_string(&d.diag).expect("diagnostic serializes")
        )
    } else {
        writeln!(
            err,
            "{file}:{}:{}: error[{}]: {}",
            d.line, d.column, d.diag.code, d.diag.message
        )
    }
}

fn check(file: &Path, json: bool, out: &mut dyn Write, err: &mut dyn Write) -> io::Result<i32> {
    let src = read(file)?;
    let name = file.display().to_string();
    let (term, spans) = match parse_term_spanned(&src) {
        Ok(p) => p,
        Err(e) => {
            report(&parse_diagnostic(&e), &name, json, err)?;
            return Ok(EXIT_PARSE);
        }
    };
    match synth(&TypeCtx::empty(), &term) {
        Ok(s) => {
            writeln!(out, "type: {s}")?;
            writeln!(
                out,
                "value type: {}",
                if s.is_value_type() { "yes" } else { "no" }
            )?;
            Ok(EXIT_OK)
        }
        Err(e) => {
            report(&type_diagnostic(&e, &spans), &name, json, err)?;
            Ok(EXIT_TYPE)
        }
    }
}

fn status_code(s: Status) -> i32 {
    match s {
        Status::Value => EXIT_OK,
        Status::Error => EXIT_ERROR,
        Status::Stuck(_) => EXIT_STUCK,
        Status::FuelExhausted => EXIT_FUEL,
    }
}

fn status_name(s: Status) -> String {
    match s {
        Status::Value => "value".into(),
        Status::Error => "error".into(),
        Status::Stuck(r) => format!("stuck:{r}"),
        Status::FuelExhausted => "fuel".into(),
    }
}

fn run_file(
    file: &Path,
    strategy: Strategy,
    fuel: usize,
    trace: bool,
    json: bool,
    out: &mut dyn Write,
    err: &mut dyn Write,
) -> io::Result<i32> {
    let src = read(file)?;
    let term = match parse_term(&src) {
        Ok(t) => t,
        Err(e) => {
            report(
                &parse_diagnostic(&e),
                &file.display().to_string(),
                json,
                err,
            )?;
            return Ok(EXIT_PARSE);
        }
    };
    let r = run(&term, strategy, fuel);
    if json {
        write_json_run(&r, out)?;
    } else {
        if trace {
            writeln!(out, "   {term}")?;
            for (rule, t) in &r.trace {
                writeln!(out, "-> {t}    [{rule}]")?;
            }
        }
        writeln!(out, "{}", r.final_term)?;
        match r.status {
            Status::Stuck(reason) => writeln!(err, "stuck: {reason}")?,
            Status::FuelExhausted => writeln!(err, "fuel exhausted after {} steps", r.steps)?,
            _ => {}
        }
    }
    Ok(status_code(r.status))
}

/// One trace line per step, then a summary line.
pub fn write_json_run(r: &RunResult, out: &mut dyn Write) -> io::Result<()> {
    for (i, (rule, t)) in r.trace.iter().enumerate() {
        let line = TraceEntry::new(i + 1, rule, t);
        writeln!(
            out,
            "{}",
            serde_json::to_string(&line).expect("trace serializes")
        )?;
    }
    let summary = RunSummary {
        status: status_name(r.status),
        steps: r.steps,
        term: r.final_term.to_string(),
    };
    writeln!(
        out,
        "{}",
        serde_json::to_string(&summary).expect("summary serializes")
    )
}

fn type_of(expr: &str, out: &mut dyn Write, err: &mut dyn Write) -> io::Result<i32> {
    let (term, spans) = match parse_term_spanned(expr) {
        Ok(p) => p,
        Err(e) => {
            report(&parse_diagnostic(&e), "<expr>", false, err)?;
            return Ok(EXIT_PARSE);
        }
    };
    match synth(&TypeCtx::empty(), &term) {
        Ok(s) => {
            writeln!(out, "{s}")?;
            Ok(EXIT_OK)
        }
        Err(e) => {
            report(&type_diagnostic(&e, &spans), "<expr>", false, err)?;
            Ok(EXIT_TYPE)
        }
    }
}

const REPL_HELP: &str = "\
:type EXPR      print the type of EXPR
:strategy cbv   evaluate call-by-value (default)
:strategy cbn   evaluate call-by-name
:help           this text
:quit           leave
Anything else is typed and evaluated. Incomplete input continues on the next line.";

fn repl(input: &mut dyn BufRead, out: &mut dyn Write) -> io::Result<i32> {
    let mut strategy = Strategy::CallByValue;
    let mut pending = String::new();
    loop {
        write!(
            out,
            "{}",
            if pending.is_empty() { "ubr> " } else { "...> " }
        )?;
        out.flush()?;
        let mut line = String::new();
        if input.read_line(&mut line)? == 0 {
            writeln!(out)?;
            return Ok(EXIT_OK);
        }
        if pending.is_empty() {
            let cmd = line.trim();
            if cmd.is_empty() {
                continue;
            }
            if let Some(rest) = cmd.strip_prefix(':') {
                let (name, arg) = rest.split_once(char::is_whitespace).unwrap_or((rest, ""));
                match (name, arg.trim()) {
                    ("q" | "quit", _) => return Ok(EXIT_OK),
                    ("h" | "help", _) => writeln!(out, "{REPL_HELP}")?,
                    ("strategy", "cbv") => strategy = Strategy::CallByValue,
                    ("strategy", "cbn") => strategy = Strategy::CallByName,
                    ("t" | "type", e) => match parse_term(e) {
                        Ok(t) => writeln!(out, "{}", describe_type(&t))?,
                        Err(e) => writeln!(out, "parse error: {e}")?,
                    },
                    _ => writeln!(out, "unknown command; try :help")?,
                }
                continue;
            }
        }
        pending.push_str(&line);
        match parse_term(&pending) {
            Ok(t) => {
                writeln!(out, "type: {}", describe_type(&t))?;
                let r = run(&t, strategy, 100_000);
                writeln!(out, "{}", r.final_term)?;
                if r.status != Status::Value {
                    writeln!(out, "({})", r.status)?;
                }
                pending.clear();
            }
            Err(e) if is_incomplete(&e, &pending) => {}
            Err(e) => {
                writeln!(out, "parse error: {e}")?;
                pending.clear();
            }
        }
    }
}

fn describe_type(t: &Term) -> String {
    match synth(&TypeCtx::empty(), t) {
        Ok(Synth::Type(s)) => s.to_string(),
        Ok(Synth::Bottom) => "bottom".into(),
        Err(e) => format!("ill-typed ({e})"),
    }
}

fn fuzz(
    cfg: &GenConfig,
    count: usize,
    report_path: Option<&Path>,
    out: &mut dyn Write,
    err: &mut dyn Write,
) -> io::Result<i32> {
    let mut report = run_regression();
    report.seed = Some(cfg.seed);
    report.merge(run_properties(cfg, count));
    write_summary(&report, out)?;
    if let Some(path) = report_path {
        let text = serde_json::to_string_pretty(&report).expect("report serializes");
        fs::write(path, text + "\n")
            .map_err(|e| io::Error::new(e.kind(), format!("{}: {e}", path.display())))?;
    }
    let untriaged = report.untriaged().count();
    if untriaged > 0 {
        writeln!(err, "{untriaged} failures without a known cause")?;
        return Ok(EXIT_FAILURES);
    }
    Ok(EXIT_OK)
}

fn write_summary(r: &PropertyReport, out: &mut dyn Write) -> io::Result<()> {
    writeln!(
        out,
        "terms: {}  steps: {}  fuel exhausted: {}",
        r.terms, r.steps, r.fuel_exhausted
    )?;
    for s in &r.properties {
        let triaged = s.failures.iter().filter(|f| f.triage.is_some()).count();
        writeln!(
            out,
            "{:<18} cases {:>6}  passed {:>6}  failed {:>4} ({} triaged)",
            s.property,
            s.cases,
            s.passes,
            s.failures.len(),
            triaged
        )?;
    }
    writeln!(out, "progress audit entries: {}", r.progress_audit.len())
}
