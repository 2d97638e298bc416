//! The `beliefgraph` command line.
//!
//! [`run`] holds the whole program so it can be driven from tests without
//! spawning a process. Data goes to stdout, diagnostics to stderr.
//!
//! Exit codes: 0 success, 1 findings in `--strict` mode, 2 input error
//! (unreadable file, parse, schema or validation failure), 3 usage error.

use std::fmt::Write as _;
use std::io::Read;
use std::path::{Path, PathBuf};

use beliefgraph_core::coherence::{CoherenceOptions, EnumerationLimits, UnderminingPolicy};
use beliefgraph_core::diagnostics::{ConfSource, DivergenceEntry};
use beliefgraph_core::format::{self, InputFormat};
use beliefgraph_core::{
    divergence_map, enumerate_maximal_coherent, graph_report_with, max_coherent_subgraph_with,
    propagate_confidence, BeliefSystem, DiagnosticsOverlay, Error, ExtractOptions, GraphReport,
    Mode, Objective, ParseReport, PropagationConfig, ReportOptions, Thresholds, Warning,
};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::json;

pub const EXIT_OK: i32 = 0;
pub const EXIT_FINDINGS: i32 = 1;
pub const EXIT_INPUT: i32 = 2;
pub const EXIT_USAGE: i32 = 3;

#[derive(Debug, Parser)]
#[command(
    name = "beliefgraph",
    version,
    about = "Structural diagnostics for belief graphs"
)]
struct Cli {
    #[command(flatten)]
    global: Global,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Args)]
struct Global {
    /// Input format; by default `.json` files are JSON and everything else BGL.
    #[arg(long, global = true, value_enum)]
    format: Option<FormatArg>,

    /// Write data to this file instead of stdout.
    #[arg(long, short, global = true)]
    output: Option<PathBuf>,

    /// Machine-readable JSON output.
    #[arg(long, global = true, conflicts_with = "text")]
    json: bool,

    /// Human-readable output (the default).
    #[arg(long, global = true)]
    text: bool,

    /// Worker threads for independent sub-analyses; output is identical for any value.
    #[arg(long, global = true, env = "BELIEF_THREADS", default_value_t = 1)]
    threads: usize,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum FormatArg {
    Bgl,
    Json,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Parse and validate a document.
    Validate {
        file: PathBuf,
        /// Exit 1 when defaults had to be applied.
        #[arg(long)]
        strict: bool,
    },
    /// Full diagnostic report.
    Analyze {
        file: PathBuf,
        #[command(flatten)]
        thresholds: ThresholdArgs,
        #[command(flatten)]
        propagation: PropagationArgs,
        /// Skip contradiction-cycle enumeration.
        #[arg(long)]
        no_cycles: bool,
        /// Cap on reported contradiction cycles and chains.
        #[arg(long, default_value_t = EnumerationLimits::default().max_results)]
        max_cycles: usize,
        /// Longest contradiction chain reported, in nodes.
        #[arg(long, default_value_t = CoherenceOptions::default().chain_max_len)]
        chain_max_len: usize,
        /// Which edges carry undermining forward from a contradiction target.
        #[arg(long, value_enum, default_value = "support")]
        policy: PolicyArg,
        /// Exit 1 when the confidence-consistency audit finds violations.
        #[arg(long)]
        strict: bool,
    },
    /// Largest coherent subset under an objective.
    Extract {
        file: PathBuf,
        #[arg(long, value_enum, default_value = "count")]
        objective: ObjectiveArg,
        #[arg(long, value_enum, default_value = "auto")]
        mode: ModeArg,
        /// Also list up to N inclusion-maximal coherent subsets.
        #[arg(long, value_name = "N")]
        enumerate: Option<usize>,
        /// In auto mode, the most conflict vertices solved exactly.
        #[arg(long, default_value_t = ExtractOptions::default().auto_exact_limit)]
        exact_limit: usize,
    },
    /// Derive confidence from weighted support.
    Propagate {
        file: PathBuf,
        #[command(flatten)]
        propagation: PropagationArgs,
        /// Write a copy of the document with conf replaced by the derived values.
        #[arg(long, value_name = "PATH")]
        write: Option<PathBuf>,
    },
    /// Credibility/confidence divergence table.
    Diverge {
        file: PathBuf,
        #[command(flatten)]
        thresholds: ThresholdArgs,
        #[command(flatten)]
        propagation: PropagationArgs,
        #[arg(long, value_enum, default_value = "assigned")]
        conf: ConfArg,
    },
    /// Convert to another format.
    Export {
        file: PathBuf,
        #[arg(long, value_enum)]
        to: ExportArg,
        /// Style nodes using a report produced by `analyze --json`.
        #[arg(long, value_name = "REPORT")]
        overlay: Option<PathBuf>,
    },
}

#[derive(Debug, Args)]
struct ThresholdArgs {
    #[arg(long, default_value_t = Thresholds::default().tau_high)]
    tau_high: f64,
    #[arg(long, default_value_t = Thresholds::default().tau_low)]
    tau_low: f64,
    /// Support mass that counts as strong (sigma_strong).
    #[arg(long, default_value_t = Thresholds::default().sigma_strong)]
    sigma: f64,
}

impl ThresholdArgs {
    fn get(&self) -> Thresholds {
        Thresholds {
            tau_high: self.tau_high,
            tau_low: self.tau_low,
            sigma_strong: self.sigma,
        }
    }
}

#[derive(Debug, Args)]
struct PropagationArgs {
    /// Damping in (0, 1]; by default 1 on acyclic support and 0.5 otherwise.
    #[arg(long)]
    damping: Option<f64>,
    #[arg(long, default_value_t = PropagationConfig::default().tolerance)]
    tolerance: f64,
    #[arg(long, default_value_t = PropagationConfig::default().max_iterations)]
    max_iter: usize,
}

impl PropagationArgs {
    fn get(&self) -> PropagationConfig {
        PropagationConfig {
            damping: self.damping,
            tolerance: self.tolerance,
            max_iterations: self.max_iter,
        }
    }
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum PolicyArg {
    Support,
    SupportAndQualification,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum ObjectiveArg {
    Count,
    Cred,
    Conf,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum ModeArg {
    Exact,
    Heuristic,
    Auto,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum ConfArg {
    Assigned,
    Propagated,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum ExportArg {
    Dot,
    Graphml,
    Json,
    Bgl,
}

/// Everything one invocation produced.
#[derive(Debug, Default, Clone, PartialEq, Eq)]
pub struct Outcome {
    pub stdout: Vec<u8>,
    pub stderr: Vec<u8>,
    pub code: i32,
}

impl Outcome {
    pub fn stdout_str(&self) -> &str {
        std::str::from_utf8(&self.stdout).unwrap_or("")
    }

    pub fn stderr_str(&self) -> &str {
        std::str::from_utf8(&self.stderr).unwrap_or("")
    }
}

/// A failure, already classified by exit code.
#[derive(Debug)]
struct Failure {
    code: i32,
    kind: &'static str,
    message: String,
    position: Option<(usize, usize)>,
}

impl Failure {
    fn input(kind: &'static str, message: impl Into<String>) -> Self {
        Failure {
            code: EXIT_INPUT,
            kind,
            message: message.into(),
            position: None,
        }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = match e.root() {
            Error::InvalidParameter(_) => EXIT_USAGE,
            _ => EXIT_INPUT,
        };
        Failure {
            code,
            kind: e.kind(),
            message: e.to_string(),
            position: e.position(),
        }
    }
}

struct Ctx<'a> {
    global: &'a Global,
    out: String,
    err: String,
}

impl Ctx<'_> {
    fn json(&self) -> bool {
        self.global.json
    }

    fn warn(&mut self, w: &Warning) {
        let _ = writeln!(self.err, "warning: {}: {}", w.location, w.message);
    }
}

/// Runs the program on `argv` (including the program name). `stdin` is only
/// read when the input file is `-`.
pub fn run<I, T>(argv: I, stdin: &mut dyn Read) -> Outcome
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let text = e.render().to_string();
            return match e.kind() {
                clap::error::ErrorKind::DisplayHelp
                | clap::error::ErrorKind::DisplayVersion
                | clap::error::ErrorKind::DisplayHelpOnMissingArgumentOrSubcommand
                    if e.exit_code() == 0 =>
                {
                    Outcome {
                        stdout: text.into_bytes(),
                        ..Default::default()
                    }
                }
                _ => Outcome {
                    stderr: text.into_bytes(),
                    code: EXIT_USAGE,
                    ..Default::default()
                },
            };
        }
    };

    let mut ctx = Ctx {
        global: &cli.global,
        out: String::new(),
        err: String::new(),
    };
    let code = match dispatch(&cli.command, &mut ctx, stdin) {
        Ok(code) => match &cli.global.output {
            Some(path) => match std::fs::write(path, &ctx.out) {
                Ok(()) => {
                    ctx.out.clear();
                    code
                }
                Err(e) => {
                    ctx.out.clear();
                    report_failure(
                        &mut ctx,
                        Failure::input("IoError", format!("cannot write {}: {e}", path.display())),
                    )
                }
            },
            None => code,
        },
        Err(f) => {
            ctx.out.clear();
            report_failure(&mut ctx, f)
        }
    };
    Outcome {
        stdout: ctx.out.into_bytes(),
        stderr: ctx.err.into_bytes(),
        code,
    }
}

fn report_failure(ctx: &mut Ctx, f: Failure) -> i32 {
    let _ = writeln!(ctx.err, "error: {}", f.message);
    if ctx.json() {
        let mut error = json!({ "kind": f.kind, "message": f.message, "exit_code": f.code });
        if let Some((line, column)) = f.position {
            error["line"] = json!(line);
            error["column"] = json!(column);
        }
        ctx.out = to_pretty(&json!({ "error": error }));
    }
    f.code
}

fn to_pretty<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("plain data serializes");
    s.push('\n');
    s
}

fn read_input(path: &Path, stdin: &mut dyn Read) -> Result<String, Failure> {
    let mut text = String::new();
    let read = if path == Path::new("-") {
        stdin.read_to_string(&mut text).map(|_| ())
    } else {
        std::fs::read_to_string(path).map(|t| text = t)
    };
    read.map_err(|e| Failure::input("IoError", format!("cannot read {}: {e}", path.display())))?;
    Ok(text)
}

fn load(ctx: &mut Ctx, path: &Path, stdin: &mut dyn Read) -> Result<ParseReport, Failure> {
    let text = read_input(path, stdin)?;
    let format = match ctx.global.format {
        Some(FormatArg::Bgl) => InputFormat::Bgl,
        Some(FormatArg::Json) => InputFormat::Json,
        None => InputFormat::from_path(path),
    };
    let report = format.parse(&text).map_err(|e| {
        let mut f = Failure::from(e);
        // a malformed document is an input problem whatever the variant
        f.code = EXIT_INPUT;
        f.message = format!("{}: {}", path.display(), f.message);
        f
    })?;
    for w in &report.warnings {
        ctx.warn(w);
    }
    Ok(report)
}

fn dispatch(cmd: &Command, ctx: &mut Ctx, stdin: &mut dyn Read) -> Result<i32, Failure> {
    match cmd {
        Command::Validate { file, strict } => validate(ctx, file, *strict, stdin),
        Command::Analyze {
            file,
            thresholds,
            propagation,
            no_cycles,
            max_cycles,
            chain_max_len,
            policy,
            strict,
        } => {
            let limits = EnumerationLimits {
                max_results: *max_cycles,
                ..Default::default()
            };
            let opts = ReportOptions {
                thresholds: thresholds.get(),
                propagation: propagation.get(),
                coherence: CoherenceOptions {
                    policy: match policy {
                        PolicyArg::Support => UnderminingPolicy::SupportOnly,
                        PolicyArg::SupportAndQualification => {
                            UnderminingPolicy::SupportAndQualification
                        }
                    },
                    cycles: (!no_cycles).then_some(limits),
                    chain_max_len: *chain_max_len,
                    chains: Some(limits),
                },
                threads: ctx.global.threads.max(1),
            };
            let sys = load(ctx, file, stdin)?.system;
            let report = graph_report_with(&sys, &opts)?;
            ctx.out = if ctx.json() {
                let mut s = report.to_json();
                s.push('\n');
                s
            } else {
                report.to_text()
            };
            let findings = !report.consistency_violations.is_empty();
            Ok(if *strict && findings {
                EXIT_FINDINGS
            } else {
                EXIT_OK
            })
        }
        Command::Extract {
            file,
            objective,
            mode,
            enumerate,
            exact_limit,
        } => {
            let sys = load(ctx, file, stdin)?.system;
            extract(ctx, &sys, *objective, *mode, *enumerate, *exact_limit)
        }
        Command::Propagate {
            file,
            propagation,
            write,
        } => {
            let sys = load(ctx, file, stdin)?.system;
            let result = propagate_confidence(&sys, &propagation.get())?;
            if !result.converged {
                let _ = writeln!(
                    ctx.err,
                    "warning: no convergence after {} iterations (residual {:e})",
                    result.iterations, result.residual
                );
            }
            if let Some(path) = write {
                let updated = result.apply(&sys)?;
                let text = match InputFormat::from_path(path) {
                    InputFormat::Json => format::to_json_pretty(&updated),
                    InputFormat::Bgl => format::render_bgl(&updated)?,
                };
                std::fs::write(path, text).map_err(|e| {
                    Failure::input("IoError", format!("cannot write {}: {e}", path.display()))
                })?;
            }
            ctx.out = if ctx.json() {
                to_pretty(&result)
            } else {
                let mut s = format!(
                    "iterations {}, converged {}, residual {:e}, damping {}\n",
                    result.iterations, result.converged, result.residual, result.damping
                );
                for n in sys.nodes() {
                    let _ = writeln!(
                        s,
                        "{}\t{:.4} -> {:.4}",
                        n.id, n.conf, result.conf_out[&n.id]
                    );
                }
                s
            };
            Ok(EXIT_OK)
        }
        Command::Diverge {
            file,
            thresholds,
            propagation,
            conf,
        } => {
            let th = thresholds.get();
            let source = match conf {
                ConfArg::Assigned => ConfSource::Assigned,
                ConfArg::Propagated => ConfSource::Propagated(propagation.get()),
            };
            let sys = load(ctx, file, stdin)?.system;
            let entries = divergence_map(&sys, &th, source)?;
            ctx.out = if ctx.json() {
                to_pretty(&json!({ "thresholds": th, "entries": entries }))
            } else {
                divergence_text(&entries)
            };
            Ok(EXIT_OK)
        }
        Command::Export { file, to, overlay } => {
            let overlay = overlay.as_deref().map(load_overlay).transpose()?;
            let sys = load(ctx, file, stdin)?.system;
            ctx.out = match to {
                ExportArg::Dot => format::to_dot(&sys, overlay.as_ref()),
                ExportArg::Graphml => format::to_graphml(&sys, overlay.as_ref()),
                ExportArg::Json => format::to_json_pretty(&sys),
                ExportArg::Bgl => format::render_bgl(&sys)?,
            };
            Ok(EXIT_OK)
        }
    }
}

fn validate(
    ctx: &mut Ctx,
    file: &Path,
    strict: bool,
    stdin: &mut dyn Read,
) -> Result<i32, Failure> {
    let report = load(ctx, file, stdin)?;
    let sys = &report.system;
    ctx.out = if ctx.json() {
        to_pretty(&json!({
            "valid": true,
            "nodes": sys.node_count(),
            "edges": sys.edge_count(),
            "warnings": report.warnings,
        }))
    } else {
        format!("{} nodes, {} edges\n", sys.node_count(), sys.edge_count())
    };
    Ok(if strict && !report.warnings.is_empty() {
        EXIT_FINDINGS
    } else {
        EXIT_OK
    })
}

fn extract(
    ctx: &mut Ctx,
    sys: &BeliefSystem,
    objective: ObjectiveArg,
    mode: ModeArg,
    enumerate: Option<usize>,
    exact_limit: usize,
) -> Result<i32, Failure> {
    let objective = match objective {
        ObjectiveArg::Count => Objective::Count,
        ObjectiveArg::Cred => Objective::TotalCred,
        ObjectiveArg::Conf => Objective::TotalConf,
    };
    let mode = match mode {
        ModeArg::Exact => Mode::Exact,
        ModeArg::Heuristic => Mode::Heuristic,
        ModeArg::Auto => Mode::Auto,
    };
    let opts = ExtractOptions {
        auto_exact_limit: exact_limit,
    };
    let result = max_coherent_subgraph_with(sys, objective, mode, &opts)?;
    let maximal = enumerate
        .map(|limit| enumerate_maximal_coherent(sys, limit))
        .transpose()?;
    ctx.out = if ctx.json() {
        let mut doc = json!({ "objective": objective, "mode": mode, "result": result });
        if let Some(m) = &maximal {
            doc["maximal"] = json!(m);
        }
        to_pretty(&doc)
    } else {
        let mut s = format!(
            "{} of {} nodes, score {}, {}\n",
            result.nodes.len(),
            sys.node_count(),
            result.score,
            if result.exact { "exact" } else { "heuristic" }
        );
        for id in &result.nodes {
            let _ = writeln!(s, "  {id}");
        }
        if let Some(m) = &maximal {
            let _ = writeln!(
                s,
                "{} maximal coherent sets{}",
                m.items.len(),
                if m.truncated { " (truncated)" } else { "" }
            );
            for set in &m.items {
                let names: Vec<&str> = set.iter().map(|id| id.as_str()).collect();
                let _ = writeln!(s, "  {{{}}}", names.join(", "));
            }
        }
        s
    };
    Ok(EXIT_OK)
}

fn divergence_text(entries: &[DivergenceEntry]) -> String {
    let mut s = String::from("node\tcred\tconf\tdelta\tclass\n");
    for e in entries {
        let _ = writeln!(
            s,
            "{}\t{:.3}\t{:.3}\t{:+.3}\t{:?}",
            e.node, e.cred, e.conf, e.delta, e.class
        );
    }
    s
}

fn load_overlay(path: &Path) -> Result<DiagnosticsOverlay, Failure> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Failure::input("IoError", format!("cannot read {}: {e}", path.display())))?;
    let report: GraphReport = serde_json::from_str(&text).map_err(|e| {
        Failure::input(
            "SchemaError",
            format!(
                "{}: not a report produced by `analyze --json`: {e}",
                path.display()
            ),
        )
    })?;
    Ok(DiagnosticsOverlay::from_report(&report))
}
