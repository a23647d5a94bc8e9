//! The `essence` command line.
//!
//! Exit codes: 0 success, 1 error diagnostics (or warnings under
//! `--strict`), 2 usage error, 3 unreadable input or unwritable output.

use std::ffi::OsString;
use std::fmt::Write;
use std::fs;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand, ValueEnum};

use crate::diagnostic::Diagnostic;
use crate::dsl::{export_dot, parse_files, Export};
use crate::lint::{all_rules, rule_set, run_lints};
use crate::metamodel::{ModelDocument, DEFAULT_MAX_DEPTH};
use crate::progress::EnactmentState;
use crate::togaf::corpus::{materialize, render_practices};
use crate::togaf::{map_phase, MapConfig, PhaseId};
use crate::validator::{check_wellformedness, resolve, ResolvedModel, ValidationConfig};

pub const EXIT_OK: i32 = 0;
pub const EXIT_DIAGNOSTICS: i32 = 1;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_IO: i32 = 3;

#[derive(Debug, Parser)]
#[command(name = "essence", version, about = "Essence method engineering: check, lint, map, enact and export .ess models")]
struct Cli {
    /// Treat warnings as failures.
    #[arg(long, global = true)]
    strict: bool,
    /// Deepest allowed activity space nesting.
    #[arg(long, global = true, value_name = "N", default_value_t = DEFAULT_MAX_DEPTH)]
    max_depth: usize,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Parse, resolve and check well-formedness.
    Check {
        #[arg(required = true)]
        files: Vec<PathBuf>,
    },
    /// Run lint rules.
    Lint {
        #[arg(required = true)]
        files: Vec<PathBuf>,
        /// Only run these rules (comma separated).
        #[arg(long, value_delimiter = ',', value_name = "IDS")]
        enable: Vec<String>,
        /// Skip these rules (comma separated).
        #[arg(long, value_delimiter = ',', value_name = "IDS")]
        disable: Vec<String>,
    },
    /// Map TOGAF phase specifications to practices.
    Map {
        #[arg(required = true)]
        files: Vec<PathBuf>,
        /// Only map this phase (P, A..H, RM).
        #[arg(long)]
        phase: Option<String>,
    },
    /// Print the visitation trace of a method.
    Enact {
        #[arg(required = true)]
        files: Vec<PathBuf>,
        #[arg(long)]
        method: String,
        #[arg(long)]
        steps: usize,
    },
    /// Export the model.
    Export {
        #[arg(required = true)]
        files: Vec<PathBuf>,
        #[arg(long, value_enum, default_value_t = Format::Tree)]
        format: Format,
    },
    /// Write the bundled ADM corpus into a directory.
    Corpus { dir: PathBuf },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Tree,
    Dot,
}

/// Result of one invocation.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Output {
    pub code: i32,
    pub stdout: String,
    pub stderr: String,
}

impl Output {
    fn new(code: i32) -> Self {
        Self {
            code,
            stdout: String::new(),
            stderr: String::new(),
        }
    }
}

/// Runs the command line; `args` includes the program name.
pub fn run<I, T>(args: I) -> Output
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let text = e.render().to_string();
            let mut out = Output::new(if e.use_stderr() { EXIT_USAGE } else { EXIT_OK });
            if e.use_stderr() {
                out.stderr = text;
            } else {
                out.stdout = text;
            }
            return out;
        }
    };
    let mut out = Output::new(EXIT_OK);
    let mut ctx = Ctx { cli: &cli, out: &mut out };
    if let Err(code) = ctx.dispatch() {
        out.code = code;
    }
    out
}

struct Ctx<'a> {
    cli: &'a Cli,
    out: &'a mut Output,
}

type Step<T> = Result<T, i32>;

impl Ctx<'_> {
    fn dispatch(&mut self) -> Step<()> {
        match &self.cli.command {
            Command::Check { files } => self.check(files),
            Command::Lint { files, enable, disable } => self.lint(files, enable, disable),
            Command::Map { files, phase } => self.map(files, phase.as_deref()),
            Command::Enact { files, method, steps } => self.enact(files, method, *steps),
            Command::Export { files, format } => self.export(files, *format),
            Command::Corpus { dir } => self.corpus(dir),
        }
    }

    fn error(&mut self, code: i32, message: impl AsRef<str>) -> i32 {
        let _ = writeln!(self.out.stderr, "error: {}", message.as_ref());
        code
    }

    fn expand(&mut self, files: &[PathBuf]) -> Step<Vec<PathBuf>> {
        let mut paths = Vec::new();
        for f in files {
            if f.is_dir() {
                let entries = fs::read_dir(f)
                    .map_err(|e| self.error(EXIT_IO, format!("cannot read directory {}: {e}", f.display())))?;
                let mut found: Vec<PathBuf> = entries
                    .filter_map(|e| e.ok().map(|e| e.path()))
                    .filter(|p| p.extension().is_some_and(|x| x == "ess"))
                    .collect();
                found.sort();
                paths.extend(found);
            } else {
                paths.push(f.clone());
            }
        }
        Ok(paths)
    }

    /// Reads and parses the inputs, printing parse warnings. Returns the
    /// document and the number of warnings printed.
    fn load(&mut self, files: &[PathBuf]) -> Step<(ModelDocument, usize)> {
        let mut sources = Vec::new();
        for path in self.expand(files)? {
            let text = fs::read_to_string(&path)
                .map_err(|e| self.error(EXIT_IO, format!("cannot read {}: {e}", path.display())))?;
            sources.push((path.display().to_string(), text));
        }
        match parse_files(&sources) {
            Ok(parsed) => {
                for w in &parsed.warnings {
                    let _ = writeln!(self.out.stdout, "{w}");
                }
                Ok((parsed.document, parsed.warnings.len()))
            }
            Err(diags) => {
                for d in &diags {
                    let _ = writeln!(self.out.stdout, "{d}");
                }
                let errors = diags.iter().filter(|d| d.is_error()).count();
                self.summary(errors, diags.len() - errors);
                Err(EXIT_DIAGNOSTICS)
            }
        }
    }

    fn resolve(&mut self, doc: &ModelDocument, warnings: usize) -> Step<ResolvedModel> {
        resolve(doc).map_err(|diags| {
            self.print(&diags);
            self.summary(diags.len(), warnings);
            EXIT_DIAGNOSTICS
        })
    }

    fn print(&mut self, diags: &[Diagnostic]) {
        for d in diags {
            let _ = writeln!(self.out.stdout, "{d}");
        }
    }

    fn summary(&mut self, errors: usize, warnings: usize) {
        let _ = writeln!(self.out.stdout, "{errors} errors, {warnings} warnings");
    }

    fn verdict(&self, errors: usize, warnings: usize) -> Step<()> {
        if errors > 0 || (self.cli.strict && warnings > 0) {
            Err(EXIT_DIAGNOSTICS)
        } else {
            Ok(())
        }
    }

    fn validation(&self) -> ValidationConfig {
        ValidationConfig {
            max_nesting_depth: self.cli.max_depth,
        }
    }

    fn check(&mut self, files: &[PathBuf]) -> Step<()> {
        let (doc, parse_warnings) = self.load(files)?;
        let model = self.resolve(&doc, parse_warnings)?;
        let diags = check_wellformedness(&model, &self.validation());
        self.print(&diags);
        let errors = diags.iter().filter(|d| d.is_error()).count();
        let warnings = parse_warnings + diags.len() - errors;
        self.summary(errors, warnings);
        self.verdict(errors, warnings)
    }

    fn lint(&mut self, files: &[PathBuf], enable: &[String], disable: &[String]) -> Step<()> {
        let selected = if enable.is_empty() { Ok(all_rules()) } else { rule_set(enable) };
        let enabled = selected
            .and_then(|set| rule_set(disable).map(|off| set.difference(&off).copied().collect()))
            .map_err(|e| self.error(EXIT_USAGE, e.to_string()))?;
        let (doc, parse_warnings) = self.load(files)?;
        let model = self.resolve(&doc, parse_warnings)?;
        let diags = run_lints(&model, &enabled).map_err(|e| self.error(EXIT_USAGE, e.to_string()))?;
        self.print(&diags);
        let warnings = parse_warnings + diags.len();
        self.summary(0, warnings);
        self.verdict(0, warnings)
    }

    fn map(&mut self, files: &[PathBuf], phase: Option<&str>) -> Step<()> {
        let only = match phase {
            Some(p) => Some(
                p.parse::<PhaseId>()
                    .map_err(|_| self.error(EXIT_USAGE, format!("unknown phase `{p}` (expected P, A..H or RM)")))?,
            ),
            None => None,
        };
        let (doc, parse_warnings) = self.load(files)?;
        let model = self.resolve(&doc, parse_warnings)?;
        let specs: Vec<_> = model.phases().filter(|ph| only.is_none_or(|p| ph.phase == p)).collect();
        if specs.is_empty() {
            let what = only.map_or("any phase".to_string(), |p| format!("phase {p}"));
            return Err(self.error(EXIT_DIAGNOSTICS, format!("the input declares no specification for {what}")));
        }
        let config = MapConfig {
            max_depth: self.cli.max_depth,
        };
        let mut practices = Vec::new();
        for spec in specs {
            let p = map_phase(spec, &model, &config)
                .map_err(|e| self.error(EXIT_DIAGNOSTICS, format!("phase {}: {e}", spec.phase)))?;
            practices.push(p);
        }
        self.out.stdout.push_str(&render_practices(&practices));
        if self.cli.strict && parse_warnings > 0 {
            return Err(EXIT_DIAGNOSTICS);
        }
        Ok(())
    }

    fn enact(&mut self, files: &[PathBuf], method: &str, steps: usize) -> Step<()> {
        let (doc, parse_warnings) = self.load(files)?;
        let model = self.resolve(&doc, parse_warnings)?;
        let Some(m) = model
            .methods()
            .find(|m| m.name == method || m.id.as_str() == method)
        else {
            return Err(self.error(EXIT_DIAGNOSTICS, format!("no method named `{method}`")));
        };
        let mut state = EnactmentState::start(m).map_err(|e| self.error(EXIT_DIAGNOSTICS, e.to_string()))?;
        for _ in 0..steps {
            state.advance();
        }
        for entry in state.trace() {
            let label = model
                .lookup(entry.practice.as_str())
                .and_then(|p| PhaseId::ALL.into_iter().find(|ph| ph.practice_name() == p.name()))
                .map_or_else(|| entry.practice.to_string(), |ph| ph.to_string());
            let _ = writeln!(self.out.stdout, "{} {}", entry.iteration, label);
        }
        if self.cli.strict && parse_warnings > 0 {
            return Err(EXIT_DIAGNOSTICS);
        }
        Ok(())
    }

    fn export(&mut self, files: &[PathBuf], format: Format) -> Step<()> {
        let (doc, parse_warnings) = self.load(files)?;
        let model = self.resolve(&doc, parse_warnings)?;
        let mut diags = check_wellformedness(&model, &self.validation());
        diags.extend(run_lints(&model, &all_rules()).expect("catalog rules are lints"));
        diags.sort_by_key(|d| (model.position(&d.path), d.rule));
        match format {
            Format::Tree => {
                self.out.stdout.push_str(&Export::new(&model).with_diagnostics(&diags).to_json_pretty());
                self.out.stdout.push('\n');
            }
            Format::Dot => self.out.stdout.push_str(&export_dot(&model)),
        }
        let errors = diags.iter().filter(|d| d.is_error()).count();
        self.verdict(errors, parse_warnings + diags.len() - errors)
    }

    fn corpus(&mut self, dir: &Path) -> Step<()> {
        let written = materialize(dir)
            .map_err(|e| self.error(EXIT_IO, format!("cannot write corpus to {}: {e}", dir.display())))?;
        for path in written {
            let _ = writeln!(self.out.stdout, "wrote {}", path.display());
        }
        Ok(())
    }
}
