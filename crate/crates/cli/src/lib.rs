//! Command-line front end for the file-safety checker.
//!
//! `filesafe check` explores every schedule of a program and reports whether
//! some execution gets stuck, `filesafe run` follows a single execution, and
//! `filesafe relax` rewrites a safe-mode program into whilef syntax.

use std::fmt::Write as _;
use std::fs;
use std::io::{self, Write as _};
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use filesafe_core::machine::{format_env, format_status};
use filesafe_core::semantics::head_rule;
use filesafe_core::{
    explore_graph, initial_config, parse_program, pretty_print, relax_program, run_single, Bounds,
    Choice, Configuration, Env, Exhausted, ExploreError, FileStatusTable, FileStore, FsSpec,
    MachineError, Mode, Options, ParseError, Policy, Program, ReadMode, Rule, RunEnd, SpecError,
    Trace, Verdict, VerdictKind,
};
use serde::{Deserialize, Serialize};

pub const SCHEMA: &str = "filesafe-report/1";

pub const EXIT_SAFE: i32 = 0;
pub const EXIT_UNSAFE: i32 = 1;
pub const EXIT_UNKNOWN: i32 = 2;
pub const EXIT_USAGE: i32 = 64;

/// Frames shown per control sequence in text output.
const SUMMARY_FRAMES: usize = 3;

#[derive(Debug, Parser)]
#[command(
    name = "filesafe",
    version,
    about = "Bounded file-safety checker for while_f programs"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Explore all executions and report Safe, Unsafe or Unknown.
    Check(CheckArgs),
    /// Follow a single execution and print every step.
    Run(RunArgs),
    /// Rewrite positioned reads into machine-chosen reads.
    Relax(RelaxArgs),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum ModeArg {
    Whilef,
    Safe,
}

impl From<ModeArg> for Mode {
    fn from(m: ModeArg) -> Mode {
        match m {
            ModeArg::Whilef => Mode::WhileF,
            ModeArg::Safe => Mode::SafeWhileF,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum ReadModeArg {
    Cursor,
    Oracle,
}

impl From<ReadModeArg> for ReadMode {
    fn from(m: ReadModeArg) -> ReadMode {
        match m {
            ReadModeArg::Cursor => ReadMode::Cursor,
            ReadModeArg::Oracle => ReadMode::Oracle,
        }
    }
}

#[derive(Clone, Debug, Args)]
pub struct ProgramArgs {
    /// Program source file.
    pub program: PathBuf,
    #[arg(long, value_enum, default_value = "whilef")]
    pub mode: ModeArg,
    /// Position choice for `(x, p) = read(f)`; whilef mode only.
    #[arg(long, value_enum)]
    pub read_mode: Option<ReadModeArg>,
    /// Largest copy count tried for `forkfor`.
    #[arg(long, default_value_t = 2)]
    pub forkfor_max: usize,
    #[arg(long, default_value_t = 10_000)]
    pub max_steps: usize,
    #[arg(long, default_value_t = 1_000_000)]
    pub max_states: usize,
    /// Virtual filesystem as JSON; unlisted files are closed and empty.
    #[arg(long)]
    pub fs: Option<PathBuf>,
    /// Accept any nonzero guard as true.
    #[arg(long)]
    pub truthy: bool,
}

#[derive(Clone, Debug, Args)]
pub struct CheckArgs {
    #[command(flatten)]
    pub program: ProgramArgs,
    /// Write the JSON report here (`-` for standard output) instead of the
    /// text report.
    #[arg(long)]
    pub json: Option<PathBuf>,
}

#[derive(Clone, Debug, Args)]
#[command(group = clap::ArgGroup::new("policy").required(true).args(["seed", "first"]))]
pub struct RunArgs {
    #[command(flatten)]
    pub program: ProgramArgs,
    /// Pick successors uniformly with this seed.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Always take the first successor.
    #[arg(long)]
    pub first: bool,
}

#[derive(Clone, Debug, Args)]
pub struct RelaxArgs {
    /// Safe-mode program source.
    pub program: PathBuf,
    /// Output file; standard output when omitted.
    #[arg(short, long)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{}: {source}", path.display())]
    Io { path: PathBuf, source: io::Error },
    #[error("{}:{source}", path.display())]
    Parse { path: PathBuf, source: ParseError },
    #[error("{}: {source}", path.display())]
    Spec { path: PathBuf, source: SpecError },
    #[error(transparent)]
    Machine(#[from] MachineError),
    #[error(transparent)]
    Relax(#[from] ExploreError),
    #[error("--read-mode only applies to whilef programs")]
    ReadModeInSafeMode,
    #[error("cannot encode report: {0}")]
    Json(#[from] serde_json::Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        EXIT_USAGE
    }
}

fn read_file(path: &Path) -> Result<String, CliError> {
    fs::read_to_string(path).map_err(|source| CliError::Io {
        path: path.to_path_buf(),
        source,
    })
}

fn write_file(path: &Path, text: &str) -> Result<(), CliError> {
    fs::write(path, text).map_err(|source| CliError::Io {
        path: path.to_path_buf(),
        source,
    })
}

/// Reads a virtual filesystem description. Files the program uses but the
/// spec omits still need [`FsSpec::with_defaults_for`].
pub fn load_fs_spec(path: &Path) -> Result<(FileStore, FileStatusTable), CliError> {
    let spec = FsSpec::from_json(&read_file(path)?).map_err(|source| CliError::Spec {
        path: path.to_path_buf(),
        source,
    })?;
    Ok((spec.store, spec.status))
}

/// A parsed program with its start configuration and settings.
pub struct Loaded {
    pub program: Program,
    pub start: Configuration,
    pub bounds: Bounds,
    pub options: Options,
}

pub fn load(args: &ProgramArgs) -> Result<Loaded, CliError> {
    let mode = Mode::from(args.mode);
    if mode == Mode::SafeWhileF && args.read_mode.is_some() {
        return Err(CliError::ReadModeInSafeMode);
    }
    let program =
        parse_program(&read_file(&args.program)?, mode).map_err(|source| CliError::Parse {
            path: args.program.clone(),
            source,
        })?;
    let spec = match &args.fs {
        Some(path) => {
            let (store, status) = load_fs_spec(path)?;
            FsSpec { store, status }
        }
        None => FsSpec::default(),
    }
    .with_defaults_for(&program);
    let start = initial_config(&program, &spec.store, &spec.status)?;
    Ok(Loaded {
        program,
        start,
        bounds: Bounds {
            forkfor_max: args.forkfor_max,
            max_steps: args.max_steps,
            max_states: args.max_states,
        },
        options: Options {
            read_mode: args.read_mode.map(ReadMode::from).unwrap_or_default(),
            truthy_guards: args.truthy,
        },
    })
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct VerdictReport {
    pub kind: VerdictKind,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub exhausted: Option<Exhausted>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub frontier: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub forkfor_bounded: Option<bool>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct StepReport {
    pub rule: Rule,
    pub choice: Choice,
    /// The first frames of the control after the step.
    pub control_summary: String,
    pub env: Env,
    pub status: FileStatusTable,
    /// The full configuration after the step.
    pub config: Configuration,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct WitnessReport {
    pub start: Configuration,
    pub steps: Vec<StepReport>,
}

impl WitnessReport {
    pub fn from_trace(t: &Trace) -> WitnessReport {
        WitnessReport {
            start: t.start.clone(),
            steps: t
                .steps
                .iter()
                .map(|(ri, c)| StepReport {
                    rule: ri.rule,
                    choice: ri.choice.clone(),
                    control_summary: c.control.summary(SUMMARY_FRAMES),
                    env: c.env.clone(),
                    status: c.status.clone(),
                    config: c.clone(),
                })
                .collect(),
        }
    }

    pub fn to_trace(&self) -> Trace {
        Trace {
            start: self.start.clone(),
            steps: self
                .steps
                .iter()
                .map(|s| {
                    let inst = filesafe_core::RuleInstance {
                        rule: s.rule,
                        choice: s.choice.clone(),
                    };
                    (inst, s.config.clone())
                })
                .collect(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Flags {
    pub mode: Mode,
    pub read_mode: ReadMode,
    pub truthy_guards: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub schema: String,
    pub verdict: VerdictReport,
    pub states: usize,
    pub normal_forms: usize,
    pub witness: Option<WitnessReport>,
    pub bounds: Bounds,
    pub flags: Flags,
    pub wall_time_ms: f64,
}

impl Report {
    pub fn exit_code(&self) -> i32 {
        exit_code(self.verdict.kind)
    }

    pub fn to_json(&self) -> Result<String, CliError> {
        Ok(serde_json::to_string_pretty(self)? + "\n")
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let v = &self.verdict;
        match v.kind {
            VerdictKind::Safe => {
                let _ = write!(
                    out,
                    "Safe: {} final normal form(s), {} state(s) explored",
                    self.normal_forms, self.states
                );
                if v.forkfor_bounded == Some(true) {
                    let _ = write!(
                        out,
                        "; forkfor copies bounded by {}",
                        self.bounds.forkfor_max
                    );
                }
                out.push('\n');
            }
            VerdictKind::Unsafe => {
                let w = self
                    .witness
                    .as_ref()
                    .expect("unsafe reports carry a witness");
                let _ = writeln!(
                    out,
                    "Unsafe: stuck after {} step(s), {} state(s) explored",
                    w.steps.len(),
                    self.states
                );
                let _ = writeln!(
                    out,
                    "  start {} | {} | {}",
                    w.start.control.summary(SUMMARY_FRAMES),
                    format_env(&w.start.env),
                    format_status(&w.start.status)
                );
                for (i, s) in w.steps.iter().enumerate() {
                    let _ = writeln!(
                        out,
                        "  {:>4} {} [{}] ⇒ {} | {} | {}",
                        i + 1,
                        s.rule,
                        s.choice,
                        s.control_summary,
                        format_env(&s.env),
                        format_status(&s.status)
                    );
                }
                let stuck = w.steps.last().map_or(&w.start, |s| &s.config);
                let _ = writeln!(out, "{}", stuck_line(stuck));
            }
            VerdictKind::Unknown => {
                let which = match v.exhausted {
                    Some(Exhausted::Steps) => format!("max-steps {}", self.bounds.max_steps),
                    Some(Exhausted::States) | None => {
                        format!("max-states {}", self.bounds.max_states)
                    }
                };
                let _ = writeln!(
                    out,
                    "Unknown: {which} exhausted with {} state(s) on the frontier, {} state(s) explored",
                    v.frontier.unwrap_or(0),
                    self.states
                );
            }
        }
        out
    }
}

pub fn exit_code(kind: VerdictKind) -> i32 {
    match kind {
        VerdictKind::Safe => EXIT_SAFE,
        VerdictKind::Unsafe => EXIT_UNSAFE,
        VerdictKind::Unknown => EXIT_UNKNOWN,
    }
}

fn stuck_line(c: &Configuration) -> String {
    let rule = head_rule(c).map_or_else(|| "no rule".to_string(), |r| r.to_string());
    format!(
        "Stuck at {rule}: {} | {} | {}",
        c.control.summary(SUMMARY_FRAMES),
        format_env(&c.env),
        format_status(&c.status)
    )
}

/// Runs the explorer and builds the report.
pub fn cmd_check(args: &CheckArgs) -> Result<Report, CliError> {
    let loaded = load(&args.program)?;
    let started = Instant::now();
    let ex = explore_graph(&loaded.start, &loaded.bounds, &loaded.options);
    let wall_time_ms = started.elapsed().as_secs_f64() * 1000.0;
    let (verdict, witness) = match &ex.verdict {
        Verdict::Safe {
            forkfor_bounded, ..
        } => (
            VerdictReport {
                kind: VerdictKind::Safe,
                exhausted: None,
                frontier: None,
                forkfor_bounded: Some(*forkfor_bounded),
            },
            None,
        ),
        Verdict::Unsafe { witness, .. } => (
            VerdictReport {
                kind: VerdictKind::Unsafe,
                exhausted: None,
                frontier: None,
                forkfor_bounded: None,
            },
            Some(WitnessReport::from_trace(witness)),
        ),
        Verdict::Unknown {
            exhausted,
            frontier,
        } => (
            VerdictReport {
                kind: VerdictKind::Unknown,
                exhausted: Some(*exhausted),
                frontier: Some(*frontier),
                forkfor_bounded: None,
            },
            None,
        ),
    };
    Ok(Report {
        schema: SCHEMA.to_string(),
        verdict,
        states: ex.states_visited(),
        normal_forms: ex.final_nodes.len(),
        witness,
        bounds: loaded.bounds,
        flags: Flags {
            mode: loaded.program.mode,
            read_mode: loaded.options.read_mode,
            truthy_guards: loaded.options.truthy_guards,
        },
        wall_time_ms,
    })
}

/// Output of `filesafe run`: one line per step and a closing line.
pub fn cmd_run(args: &RunArgs) -> Result<(i32, String), CliError> {
    let loaded = load(&args.program)?;
    let policy = match args.seed {
        Some(seed) => Policy::Seeded(seed),
        None => Policy::FirstChoice,
    };
    let run = run_single(&loaded.start, policy, &loaded.bounds, &loaded.options);
    let mut out = String::new();
    for (ri, c) in &run.trace.steps {
        let head = c.control.head().map_or_else(String::new, |f| f.to_string());
        let _ = writeln!(
            out,
            "{} [{}] ⇒ {head} | {} | {}",
            ri.rule,
            ri.choice,
            format_env(&c.env),
            format_status(&c.status)
        );
    }
    let last = run.trace.last();
    let code = match run.end {
        RunEnd::Final => {
            let _ = writeln!(
                out,
                "Final after {} step(s): {}",
                run.trace.len(),
                last.control.summary(1)
            );
            EXIT_SAFE
        }
        RunEnd::Stuck => {
            let _ = writeln!(out, "{}", stuck_line(last));
            EXIT_UNSAFE
        }
        RunEnd::Cutoff => {
            let _ = writeln!(out, "Cutoff after {} step(s)", run.trace.len());
            EXIT_UNKNOWN
        }
    };
    Ok((code, out))
}

/// The relaxed program text.
pub fn cmd_relax(args: &RelaxArgs) -> Result<String, CliError> {
    let program =
        parse_program(&read_file(&args.program)?, Mode::SafeWhileF).map_err(|source| {
            CliError::Parse {
                path: args.program.clone(),
                source,
            }
        })?;
    Ok(pretty_print(&relax_program(&program)?) + "\n")
}

fn dispatch(cli: &Cli, stdout: &mut impl io::Write) -> Result<i32, CliError> {
    let emit = |out: &mut dyn io::Write, text: &str| {
        out.write_all(text.as_bytes())
            .map_err(|source| CliError::Io {
                path: PathBuf::from("<stdout>"),
                source,
            })
    };
    match &cli.command {
        Command::Check(args) => {
            let report = cmd_check(args)?;
            match &args.json {
                Some(path) if path.as_os_str() == "-" => emit(stdout, &report.to_json()?)?,
                Some(path) => write_file(path, &report.to_json()?)?,
                None => emit(stdout, &report.to_text())?,
            }
            Ok(report.exit_code())
        }
        Command::Run(args) => {
            let (code, text) = cmd_run(args)?;
            emit(stdout, &text)?;
            Ok(code)
        }
        Command::Relax(args) => {
            let text = cmd_relax(args)?;
            match &args.output {
                Some(path) => write_file(path, &text)?,
                None => emit(stdout, &text)?,
            }
            Ok(EXIT_SAFE)
        }
    }
}

/// Entry point shared by the binary and the tests; returns the exit code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                EXIT_USAGE
            } else {
                EXIT_SAFE
            };
        }
    };
    let stdout = io::stdout();
    let mut lock = stdout.lock();
    match dispatch(&cli, &mut lock) {
        Ok(code) => {
            let _ = lock.flush();
            code
        }
        Err(e) => {
            eprintln!("filesafe: {e}");
            e.exit_code()
        }
    }
}
