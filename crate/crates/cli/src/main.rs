//! `arc`: check, simulate, generate and graph `.arc` models.
//!
//! Exit codes: 0 ok, 1 model errors, 2 usage or input errors, 3 simulation
//! errors, 4 write errors.

use std::fs;
use std::io::{self, IsTerminal, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use arc_core::codegen::{self, emit, Options};
use arc_core::diag::{Diagnostic, Severity};
use arc_core::model::InstanceModel;
use arc_core::sim::{self, Trace};
use arc_core::Checked;

#[derive(Parser)]
#[command(name = "arc", version, about = "Component & connector models: check, simulate, generate")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Report diagnostics for a set of model files.
    Check {
        /// Model files (`.arc`).
        #[arg(required = true)]
        files: Vec<PathBuf>,
        /// One JSON object per diagnostic.
        #[arg(long)]
        json: bool,
    },
    /// Run a model for a number of ticks and write the full trace.
    Simulate {
        /// Model files (`.arc`).
        #[arg(required = true)]
        files: Vec<PathBuf>,
        /// Component to instantiate as the root.
        #[arg(long)]
        root: String,
        /// Messages for the root's in-ports (JSONL).
        #[arg(long)]
        input: Option<PathBuf>,
        /// Scheduled out-port messages for native instances (JSONL).
        #[arg(long)]
        stubs: Option<PathBuf>,
        /// Number of ticks to run.
        #[arg(long)]
        ticks: usize,
        /// Defaults to standard output.
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Generate a project from a model.
    Generate {
        /// Model files (`.arc`).
        #[arg(required = true)]
        files: Vec<PathBuf>,
        /// Component to instantiate as the root.
        #[arg(long)]
        root: String,
        /// `reference` (runnable Python project) or `dot`.
        #[arg(long, default_value = "reference")]
        backend: String,
        /// Output directory; created if missing.
        #[arg(long)]
        out: PathBuf,
        /// Backend option `key=value`; may repeat.
        #[arg(long = "option", value_name = "KEY=VALUE")]
        options: Vec<String>,
    },
    /// Print the architecture as a Graphviz digraph.
    Graph {
        /// Model files (`.arc`).
        #[arg(required = true)]
        files: Vec<PathBuf>,
        /// Component to instantiate as the root.
        #[arg(long)]
        root: String,
        /// Defaults to standard output.
        #[arg(long)]
        output: Option<PathBuf>,
    },
}

/// A failure already reported to stderr, carrying its exit code.
struct Exit(u8);

const MODEL: Exit = Exit(1);
const USAGE: Exit = Exit(2);
const RUNTIME: Exit = Exit(3);
const WRITE: Exit = Exit(4);

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Check { files, json } => check(&files, json),
        Command::Simulate { files, root, input, stubs, ticks, output } => {
            simulate(&files, &root, input.as_deref(), stubs.as_deref(), ticks, output.as_deref())
        }
        Command::Generate { files, root, backend, out, options } => generate(&files, &root, &backend, &out, &options),
        Command::Graph { files, root, output } => graph(&files, &root, output.as_deref()),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(Exit(code)) => ExitCode::from(code),
    }
}

fn fail(code: Exit, msg: impl std::fmt::Display) -> Exit {
    eprintln!("{}: {msg}", paint("error", Severity::Error, io::stderr().is_terminal()));
    code
}

fn color_enabled(terminal: bool) -> bool {
    match std::env::var("ARC_COLOR").as_deref() {
        Ok("never") => false,
        _ => terminal,
    }
}

fn paint(text: &str, severity: Severity, terminal: bool) -> String {
    if !color_enabled(terminal) {
        return text.to_string();
    }
    let code = match severity {
        Severity::Error => "31",
        Severity::Warning => "33",
    };
    format!("\x1b[1;{code}m{text}\x1b[0m")
}

fn render(d: &Diagnostic, terminal: bool) -> String {
    let plain = d.to_string();
    let tag = format!("{}[{}]", d.severity, d.code);
    plain.replacen(&tag, &paint(&tag, d.severity, terminal), 1)
}

fn read_sources(files: &[PathBuf]) -> Result<Vec<(String, String)>, Exit> {
    let mut out = Vec::with_capacity(files.len());
    for f in files {
        let bytes = fs::read(f).map_err(|e| fail(USAGE, format!("{}: {e}", f.display())))?;
        let name = f.display().to_string();
        match String::from_utf8(bytes) {
            Ok(text) => out.push((name, text)),
            Err(e) => {
                // the parser reports the exact position
                let d = arc_core::parser::parse_bytes(e.as_bytes(), &name).err().unwrap_or_default();
                print_diags_stderr(&d);
                return Err(USAGE);
            }
        }
    }
    Ok(out)
}

fn print_diags_stderr(diags: &[Diagnostic]) {
    let term = io::stderr().is_terminal();
    for d in diags {
        eprintln!("{}", render(d, term));
    }
}

/// Parses and checks; parse failures exit 2, checker errors exit 1.
fn load(files: &[PathBuf]) -> Result<Checked, Exit> {
    let sources = read_sources(files)?;
    let refs: Vec<(&str, &str)> = sources.iter().map(|(a, b)| (a.as_str(), b.as_str())).collect();
    match arc_core::load(&refs) {
        Ok(c) => {
            print_diags_stderr(&c.warnings);
            Ok(c)
        }
        Err(diags) => {
            print_diags_stderr(&diags);
            let parse_level = diags.iter().any(|d| d.code.starts_with('P'));
            Err(if parse_level { USAGE } else { MODEL })
        }
    }
}

fn instantiate(files: &[PathBuf], root: &str) -> Result<InstanceModel, Exit> {
    let checked = load(files)?;
    if checked.table.library.component(root).is_none() {
        return Err(fail(USAGE, format!("no component named `{root}` in the given files")));
    }
    checked.instantiate(root).map_err(|e| fail(MODEL, e))
}

fn check(files: &[PathBuf], json: bool) -> Result<(), Exit> {
    let sources = read_sources(files)?;
    let mut units = Vec::new();
    let mut diags = Vec::new();
    for (name, text) in &sources {
        match arc_core::parser::parse(text, name) {
            Ok(u) => units.push(u),
            Err(d) => diags.extend(d),
        }
    }
    let parse_failed = !diags.is_empty();
    if !parse_failed {
        diags = arc_core::checker::check(&units).1;
    }
    arc_core::diag::sort_diagnostics(&mut diags);
    let term = io::stdout().is_terminal();
    let mut out = io::stdout().lock();
    for d in &diags {
        let line = if json { d.to_json_line() } else { render(d, term) };
        let _ = writeln!(out, "{line}");
    }
    if parse_failed {
        Err(USAGE)
    } else if arc_core::diag::has_errors(&diags) {
        Err(MODEL)
    } else {
        Ok(())
    }
}

fn read_trace(path: &Path, types: &std::collections::BTreeMap<String, arc_core::model::TypeExpr>, m: &InstanceModel) -> Result<Trace, Exit> {
    let text = fs::read_to_string(path).map_err(|e| fail(USAGE, format!("{}: {e}", path.display())))?;
    Trace::from_jsonl(&text, types, &m.enums).map_err(|e| fail(USAGE, format!("{}: {e}", path.display())))
}

fn write_output(output: Option<&Path>, text: &str) -> Result<(), Exit> {
    match output {
        Some(p) => fs::write(p, text).map_err(|e| fail(WRITE, format!("{}: {e}", p.display()))),
        None => io::stdout().lock().write_all(text.as_bytes()).map_err(|e| fail(WRITE, e)),
    }
}

fn simulate(
    files: &[PathBuf],
    root: &str,
    input: Option<&Path>,
    stubs: Option<&Path>,
    ticks: usize,
    output: Option<&Path>,
) -> Result<(), Exit> {
    let m = instantiate(files, root)?;
    let env = match input {
        Some(p) => read_trace(p, &sim::input_types(&m), &m)?,
        None => Trace::new(),
    };
    let stub_trace = match stubs {
        Some(p) => read_trace(p, &sim::native_output_types(&m), &m)?,
        None => Trace::new(),
    };
    let bindings = sim::stub_bindings(&m, &stub_trace).map_err(|e| fail(USAGE, e))?;
    let trace = sim::run(&m, bindings, &env, ticks).map_err(|e| fail(RUNTIME, e))?;
    write_output(output, &trace.to_jsonl())
}

fn parse_options(raw: &[String]) -> Result<Options, Exit> {
    let mut opts = Options::new();
    for r in raw {
        let (k, v) = r.split_once('=').ok_or_else(|| fail(USAGE, format!("option `{r}` is not KEY=VALUE")))?;
        opts.insert(k.to_string(), v.to_string());
    }
    Ok(opts)
}

fn generate(files: &[PathBuf], root: &str, backend: &str, out: &Path, options: &[String]) -> Result<(), Exit> {
    let Some(b) = codegen::backend(backend) else {
        return Err(fail(USAGE, format!("unknown backend `{backend}` (expected `reference` or `dot`)")));
    };
    let options = parse_options(options)?;
    let m = instantiate(files, root)?;
    let generated = b.generate(&m, &options).map_err(|e| fail(USAGE, e))?;
    let report = emit(&generated, out);
    for (path, e) in &report.errors {
        eprintln!("{}: {path}: {e}", paint("error", Severity::Error, io::stderr().is_terminal()));
    }
    println!(
        "written: {}, skipped: {}, unchanged: {}, failed: {}",
        report.written.len(),
        report.skipped.len(),
        report.unchanged.len(),
        report.errors.len()
    );
    if report.is_ok() {
        Ok(())
    } else {
        Err(WRITE)
    }
}

fn graph(files: &[PathBuf], root: &str, output: Option<&Path>) -> Result<(), Exit> {
    use codegen::Backend;
    let m = instantiate(files, root)?;
    let files = codegen::DotBackend.generate(&m, &Options::new()).map_err(|e| fail(USAGE, e))?;
    let text = String::from_utf8_lossy(&files[0].content).into_owned();
    write_output(output, &text)
}
