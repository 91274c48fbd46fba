//! Command-line front end.
//!
//! Exit status: 0 when a query has at least one binding (or a command other
//! than `query` succeeds), 1 when a query has none, 2 on usage, parse,
//! validation or I/O errors.

use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::Duration;

use clap::{Args, Parser, Subcommand};

use crate::engine::{trace_to_jsonl, ResolverConfig};
use crate::session::{Session, SessionError};

#[derive(Debug, Parser)]
#[command(
    name = "semres",
    about = "Resolve queries over a knowledge base with annotated services"
)]
struct Cli {
    #[command(flatten)]
    global: Global,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Args, Default)]
struct Global {
    /// Turtle file to load first (repeatable).
    #[arg(long, global = true)]
    kb: Vec<PathBuf>,
    /// Service annotation to load first (repeatable).
    #[arg(long, global = true)]
    annotation: Vec<PathBuf>,
    /// Mock service file to register first (repeatable).
    #[arg(long, global = true)]
    mock: Vec<PathBuf>,
    /// Rule expansion depth limit [default: 16].
    #[arg(long, global = true)]
    max_depth: Option<usize>,
    /// Per service call [default: 10000].
    #[arg(long, global = true)]
    timeout_ms: Option<u64>,
    /// Prefix for IRIs of instances created by service calls
    /// [default: urn:semres:instance:].
    #[arg(long, global = true)]
    fresh_base: Option<String>,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Load Turtle files and report what they contained.
    Load { files: Vec<PathBuf> },
    /// Load, validate and compile service annotations.
    Annotate {
        files: Vec<PathBuf>,
        /// Print the compiled rules.
        #[arg(long)]
        dump_rules: bool,
    },
    /// Register mock services.
    Mock { files: Vec<PathBuf> },
    /// Answer a triple-pattern query; `.` separates conjuncts.
    Query {
        pattern: String,
        /// Add the triples produced by service calls to the knowledge base.
        #[arg(long)]
        assert: bool,
        /// Write the resolution trace as JSON lines.
        #[arg(long)]
        trace: Option<PathBuf>,
    },
    /// Run a session script: one command per line, `#` comments.
    Run { script: PathBuf },
}

/// Runs the CLI with `args` (including the program name). Never panics on
/// bad input; returns the exit status.
pub fn cli_main(args: &[String], out: &mut dyn Write, err: &mut dyn Write) -> i32 {
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => return clap_error(e, out, err),
    };
    let mut session = Session::new(ResolverConfig::default());
    let mut ctx = Context {
        session: &mut session,
        base: None,
        out,
        err,
    };
    ctx.run(cli)
}

fn clap_error(e: clap::Error, out: &mut dyn Write, err: &mut dyn Write) -> i32 {
    use clap::error::ErrorKind;
    let help = matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion);
    let target: &mut dyn Write = if help { out } else { err };
    let _ = write!(target, "{}", e.render());
    if help {
        0
    } else {
        2
    }
}

struct Context<'a> {
    session: &'a mut Session,
    /// Directory relative paths resolve against (a script's directory).
    base: Option<PathBuf>,
    out: &'a mut dyn Write,
    err: &'a mut dyn Write,
}

impl Context<'_> {
    fn path(&self, p: &Path) -> PathBuf {
        match &self.base {
            Some(b) if p.is_relative() => b.join(p),
            _ => p.to_path_buf(),
        }
    }

    fn run(&mut self, cli: Cli) -> i32 {
        match self
            .apply_globals(&cli.global)
            .and_then(|()| self.command(cli.command))
        {
            Ok(code) => code,
            Err(e) => {
                let _ = writeln!(self.err, "error: {e}");
                2
            }
        }
    }

    fn apply_globals(&mut self, g: &Global) -> Result<(), SessionError> {
        let config = self.session.config_mut();
        if let Some(d) = g.max_depth {
            config.limits.max_depth = d;
        }
        if let Some(ms) = g.timeout_ms {
            config.limits.timeout = Duration::from_millis(ms);
        }
        if let Some(base) = &g.fresh_base {
            config.fresh_base = base.clone();
        }
        for f in &g.kb {
            self.session.load_kb_file(&self.path(f))?;
        }
        for f in &g.mock {
            self.session.add_mock_file(&self.path(f))?;
        }
        for f in &g.annotation {
            self.annotate(f, false)?;
        }
        Ok(())
    }

    fn annotate(&mut self, f: &Path, dump: bool) -> Result<(), SessionError> {
        let added = self.session.add_annotation_file(&self.path(f))?;
        for w in &added.warnings {
            let _ = writeln!(self.err, "warning: {}: {w}", added.rule.id);
        }
        if dump {
            let _ = write!(self.out, "{}", added.rule.dump());
        }
        Ok(())
    }

    fn command(&mut self, cmd: Command) -> Result<i32, SessionError> {
        match cmd {
            Command::Load { files } => {
                for f in files {
                    let s = self.session.load_kb_file(&self.path(&f))?;
                    let _ = writeln!(
                        self.out,
                        "{}: {} triples, {} axioms, {} declarations",
                        f.display(),
                        s.triples,
                        s.axioms,
                        s.declarations
                    );
                }
                Ok(0)
            }
            Command::Annotate { files, dump_rules } => {
                for f in files {
                    self.annotate(&f, dump_rules)?;
                }
                Ok(0)
            }
            Command::Mock { files } => {
                for f in files {
                    self.session.add_mock_file(&self.path(&f))?;
                }
                Ok(0)
            }
            Command::Query {
                pattern,
                assert,
                trace,
            } => {
                let result = self.session.query_text(&pattern, assert)?;
                for b in &result.outcome.bindings {
                    let _ = writeln!(self.out, "{b}");
                }
                if let Some(n) = result.asserted {
                    let _ = writeln!(self.err, "asserted {n} triples");
                }
                if let Some(t) = trace {
                    let path = self.path(&t);
                    std::fs::write(&path, trace_to_jsonl(&result.outcome.trace))
                        .map_err(|source| SessionError::Io { path, source })?;
                }
                Ok(if result.outcome.bindings.is_empty() {
                    1
                } else {
                    0
                })
            }
            Command::Run { script } => self.script(&self.path(&script)),
        }
    }

    /// Runs every line; stops at the first error. The status is that of the
    /// last command.
    fn script(&mut self, path: &Path) -> Result<i32, SessionError> {
        let text = std::fs::read_to_string(path).map_err(|source| SessionError::Io {
            path: path.to_path_buf(),
            source,
        })?;
        let saved = self
            .base
            .replace(path.parent().map(Path::to_path_buf).unwrap_or_default());
        let mut status = 0;
        for (i, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let Some(words) = shlex::split(line) else {
                let _ = writeln!(self.err, "{}:{}: unbalanced quotes", path.display(), i + 1);
                status = 2;
                break;
            };
            let args = std::iter::once("semres".to_string()).chain(words);
            let cli = match Cli::try_parse_from(args) {
                Ok(c) => c,
                Err(e) => {
                    let _ = write!(self.err, "{}:{}: {}", path.display(), i + 1, e.render());
                    status = 2;
                    break;
                }
            };
            if matches!(cli.command, Command::Run { .. }) {
                let _ = writeln!(
                    self.err,
                    "{}:{}: scripts cannot nest",
                    path.display(),
                    i + 1
                );
                status = 2;
                break;
            }
            status = self.run(cli);
            if status == 2 {
                break;
            }
        }
        self.base = saved;
        Ok(status)
    }
}
