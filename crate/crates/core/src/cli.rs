//! The `lgt` command-line front end.
//!
//! Exit codes: 0 on success, 1 on domain errors (invalid tables, failed
//! script steps, licensing errors), 2 on usage and I/O errors.

use std::fmt::Write as _;
use std::fs;
use std::io::{self, Read, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::formula::{ast_summary, parse_label};
use crate::lexicon::{flatten, render, validate_licensing, ExportFormat, LicensingIssue, Severity};
use crate::normalizer::{apply_script_with, ApplyMode, Command, Script, TransformationReport};
use crate::tableset::{load_tableset, save_tableset, LoadError};
use crate::tableset::{Coding, TableSet};

pub const REPORT_FILE: &str = "report.jsonl";

#[derive(Debug, Parser)]
#[command(name = "lgt", version, about = "Compile and check Lexicon-Grammar tables")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Cmd,
}

#[derive(Debug, Subcommand)]
pub enum Cmd {
    /// Parse property labels, one per line, and print their canonical form.
    Parse {
        /// Read labels from this file instead of standard input.
        file: Option<PathBuf>,
    },
    /// Check table invariants and argument licensing.
    Validate(RunArgs),
    /// Apply a transformation script and write the normalized tables.
    Normalize {
        #[command(flatten)]
        run: RunArgs,
        /// Skip steps whose effect is already present.
        #[arg(long)]
        resume: bool,
    },
    /// Like `normalize`, restricted to the script's `split-loc` steps.
    Split {
        #[command(flatten)]
        run: RunArgs,
        #[arg(long)]
        resume: bool,
    },
    /// Load, optionally normalize, flatten and export the lexicon.
    Build(RunArgs),
    /// Per-class coding statistics. Never writes anything.
    Stats(RunArgs),
}

#[derive(Debug, Clone, Args)]
pub struct RunArgs {
    /// Directory holding one `<classId>.tsv` per class.
    #[arg(long, value_name = "DIR")]
    pub tables: PathBuf,
    /// Class definitions file.
    #[arg(long, value_name = "FILE")]
    pub defs: PathBuf,
    #[arg(long, value_name = "FILE")]
    pub script: Option<PathBuf>,
    #[arg(long, value_name = "DIR")]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Format::Structured)]
    pub format: Format,
    /// Treat warnings as failures.
    #[arg(long)]
    pub strict: bool,
    #[arg(long, default_value_t = 1, value_parser = clap::value_parser!(u16).range(1..))]
    pub jobs: u16,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Text,
    Structured,
}

impl From<Format> for ExportFormat {
    fn from(f: Format) -> Self {
        match f {
            Format::Text => ExportFormat::Text,
            Format::Structured => ExportFormat::Structured,
        }
    }
}

#[derive(Debug)]
pub enum Failure {
    /// Exit 1.
    Domain(String),
    /// Exit 2.
    Usage(String),
}

impl Failure {
    pub fn code(&self) -> u8 {
        match self {
            Failure::Domain(_) => 1,
            Failure::Usage(_) => 2,
        }
    }

    fn message(&self) -> &str {
        match self {
            Failure::Domain(m) | Failure::Usage(m) => m,
        }
    }
}

impl From<LoadError> for Failure {
    fn from(e: LoadError) -> Self {
        match e {
            LoadError::Io { .. } => Failure::Usage(e.to_string()),
            _ => Failure::Domain(e.to_string()),
        }
    }
}

fn io_failure(path: &Path) -> impl Fn(io::Error) -> Failure + '_ {
    move |e| Failure::Usage(format!("{}: {e}", path.display()))
}

pub fn main() -> ExitCode {
    let cli = Cli::parse();
    let mut out = String::new();
    let result = run(cli, &mut out);
    let mut stdout = io::stdout().lock();
    if stdout.write_all(out.as_bytes()).and_then(|()| stdout.flush()).is_err() {
        return ExitCode::from(2);
    }
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            if !f.message().is_empty() {
                eprintln!("lgt: {}", f.message());
            }
            ExitCode::from(f.code())
        }
    }
}

/// Run one command. Ordinary output is appended to `out` even when the
/// command fails.
pub fn run(cli: Cli, out: &mut String) -> Result<(), Failure> {
    match cli.command {
        Cmd::Parse { file } => cmd_parse(file.as_deref(), out),
        Cmd::Validate(args) => in_pool(args.jobs, || cmd_validate(&args, out)),
        Cmd::Normalize { run, resume } => in_pool(run.jobs, || cmd_normalize(&run, resume, false, out)),
        Cmd::Split { run, resume } => in_pool(run.jobs, || cmd_normalize(&run, resume, true, out)),
        Cmd::Build(args) => in_pool(args.jobs, || cmd_build(&args, out)),
        Cmd::Stats(args) => in_pool(args.jobs, || cmd_stats(&args, out)),
    }
}

fn in_pool<T: Send>(jobs: u16, f: impl FnOnce() -> Result<T, Failure> + Send) -> Result<T, Failure> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(usize::from(jobs))
        .build()
        .map_err(|e| Failure::Usage(format!("thread pool: {e}")))?;
    pool.install(f)
}

pub fn cmd_parse(file: Option<&Path>, out: &mut String) -> Result<(), Failure> {
    let mut text = String::new();
    match file {
        Some(p) => text = fs::read_to_string(p).map_err(io_failure(p))?,
        None => {
            io::stdin()
                .lock()
                .read_to_string(&mut text)
                .map_err(|e| Failure::Usage(format!("stdin: {e}")))?;
        }
    }
    let mut failures = 0usize;
    for (i, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        match parse_label(line) {
            Ok(label) => {
                let _ = writeln!(out, "{}\t{}", label.canonical(), ast_summary(&label));
                let expanded = label.expanded();
                if expanded.len() > 1 {
                    for e in expanded {
                        let _ = writeln!(out, "\t-> {e}");
                    }
                }
            }
            Err(e) => {
                failures += 1;
                eprintln!("line {}: {e}", i + 1);
            }
        }
    }
    if failures > 0 {
        return Err(Failure::Domain(format!("{failures} label(s) failed to parse")));
    }
    Ok(())
}

fn load(args: &RunArgs) -> Result<TableSet, Failure> {
    Ok(load_tableset(&args.tables, &args.defs)?)
}

fn run_script(ts: &TableSet, path: &Path, resume: bool, split_only: bool) -> Result<(TableSet, TransformationReport), Failure> {
    let script = Script::from_file(path).map_err(|e| match e.step {
        0 => Failure::Usage(e.to_string()),
        _ => Failure::Domain(format!("{}: {e}", path.display())),
    })?;
    let script = if split_only { script.filtered(Command::is_split_loc) } else { script };
    let mode = if resume { ApplyMode::Resume } else { ApplyMode::Strict };
    apply_script_with(ts, &script, mode).map_err(|e| Failure::Domain(format!("{}: {e}", path.display())))
}

fn load_and_normalize(args: &RunArgs) -> Result<TableSet, Failure> {
    let ts = load(args)?;
    match &args.script {
        Some(p) => Ok(run_script(&ts, p, false, false)?.0),
        None => Ok(ts),
    }
}

fn require_out(args: &RunArgs) -> Result<&Path, Failure> {
    args.out
        .as_deref()
        .ok_or_else(|| Failure::Usage("--out is required".into()))
}

/// Fill a fresh directory next to `out`, then move it into place. A failed
/// run leaves `out` as it was.
pub fn write_atomically(out: &Path, fill: impl FnOnce(&Path) -> Result<(), Failure>) -> Result<(), Failure> {
    let parent = match out.parent() {
        Some(p) if !p.as_os_str().is_empty() => p.to_path_buf(),
        _ => PathBuf::from("."),
    };
    fs::create_dir_all(&parent).map_err(io_failure(&parent))?;
    let name = out
        .file_name()
        .ok_or_else(|| Failure::Usage(format!("{}: not a directory name", out.display())))?
        .to_string_lossy()
        .into_owned();
    let staging = tempfile::Builder::new()
        .prefix(&format!(".{name}.new-"))
        .tempdir_in(&parent)
        .map_err(io_failure(&parent))?;
    fill(staging.path())?;

    let old = tempfile::Builder::new()
        .prefix(&format!(".{name}.old-"))
        .tempdir_in(&parent)
        .map_err(io_failure(&parent))?;
    let displaced = old.path().join(&name);
    let had_previous = out.exists();
    if had_previous {
        fs::rename(out, &displaced).map_err(io_failure(out))?;
    }
    let staged = staging.keep();
    if let Err(e) = fs::rename(&staged, out) {
        if had_previous {
            let _ = fs::rename(&displaced, out);
        }
        let _ = fs::remove_dir_all(&staged);
        return Err(io_failure(out)(e));
    }
    Ok(())
}

fn count(issues: &[LicensingIssue], s: Severity) -> usize {
    issues.iter().filter(|i| i.severity == s).count()
}

pub fn cmd_validate(args: &RunArgs, out: &mut String) -> Result<(), Failure> {
    let ts = load_and_normalize(args)?;
    let records = flatten(&ts);
    let issues = validate_licensing(&records);
    for i in &issues {
        let _ = writeln!(out, "{i}");
    }
    let (errors, warnings) = (count(&issues, Severity::Error), count(&issues, Severity::Warning));
    let _ = writeln!(
        out,
        "{} classes, {} records: {errors} error(s), {warnings} warning(s)",
        ts.tables.len(),
        records.len()
    );
        if errors > 0 || (args.strict && warnings > 0) {
        return Err(Failure::Domain(String::new()));
    }
    Ok(())
}

pub fn cmd_normalize(args: &RunArgs, resume: bool, split_only: bool, out: &mut String) -> Result<(), Failure> {
    let script = args
        .script
        .as_deref()
        .ok_or_else(|| Failure::Usage("--script is required".into()))?;
    let dest = require_out(args)?;
    let ts = load(args)?;
    let (normalized, report) = run_script(&ts, script, resume, split_only)?;
    write_atomically(dest, |dir| {
        save_tableset(&normalized, dir)?;
        let path = dir.join(REPORT_FILE);
        fs::write(&path, report.to_jsonl()).map_err(io_failure(&path))
    })?;
    let _ = writeln!(
        out,
        "{} step(s) applied; {} classes written to {}",
        report.steps.len(),
        normalized.tables.len(),
        dest.display()
    );
    Ok(())
}

pub fn cmd_build(args: &RunArgs, out: &mut String) -> Result<(), Failure> {
    let dest = require_out(args)?;
    let ts = load_and_normalize(args)?;
    let records = flatten(&ts);
    let issues = validate_licensing(&records);
    let (errors, warnings) = (count(&issues, Severity::Error), count(&issues, Severity::Warning));
    if args.strict && errors + warnings > 0 {
        return Err(Failure::Domain(format!(
            "{errors} licensing error(s), {warnings} warning(s); nothing written"
        )));
    }
    let format = ExportFormat::from(args.format);
    let text = render(&records, format);
    write_atomically(dest, |dir| {
        let path = dir.join(format.file_name());
        fs::write(&path, &text).map_err(io_failure(&path))
    })?;
    let _ = writeln!(out, "{} records; {errors} error(s), {warnings} warning(s)", records.len());
    Ok(())
}

pub fn cmd_stats(args: &RunArgs, out: &mut String) -> Result<(), Failure> {
    let ts = load_and_normalize(args)?;
    out.push_str(&render_stats(&ts));
    Ok(())
}

/// Tab-separated, one row per class, then one line per reflexive link.
pub fn render_stats(ts: &TableSet) -> String {
    use rayon::prelude::*;
    let rows: Vec<String> = ts
        .tables
        .values()
        .collect::<Vec<_>>()
        .par_iter()
        .map(|t| {
            let def = ts.definitions.get(&t.class_id);
            let mut all_plus = Vec::new();
            let mut all_minus = Vec::new();
            let mut overlap = Vec::new();
            for (i, label) in t.columns.iter().enumerate() {
                if !t.entries.is_empty() {
                    if t.column_codings(i).all(|c| c == Coding::Plus) {
                        all_plus.push(label.to_string());
                    } else if t.column_codings(i).all(|c| c == Coding::Minus) {
                        all_minus.push(label.to_string());
                    }
                }
                if def.is_some_and(|d| d.implies(label)) {
                    overlap.push(label.to_string());
                }
            }
            let cells = t.cell_count();
            let uncoded = t
                .entries
                .iter()
                .flat_map(|e| &e.codings)
                .filter(|c| **c == Coding::Uncoded)
                .count();
            let density = if cells == 0 { 0.0 } else { 100.0 * uncoded as f64 / cells as f64 };
            format!(
                "{}\t{}\t{}\t{:.1}%\t{}\t{}\t{}\n",
                t.class_id,
                t.entries.len(),
                t.columns.len(),
                density,
                all_plus.join("; "),
                all_minus.join("; "),
                if overlap.is_empty() { "ok".to_string() } else { overlap.join("; ") },
            )
        })
        .collect();
    let mut s = String::from("class\tentries\tcolumns\tuncoded\tall_plus\tall_minus\toverlap\n");
    for r in rows {
        s.push_str(&r);
    }
    for link in ts.links.iter().filter(|l| l.is_reflexive()) {
        let _ = writeln!(s, "warning: {} is linked to itself", link.ends().0);
    }
    s
}
