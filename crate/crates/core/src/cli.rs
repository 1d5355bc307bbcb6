//! Command-line front end. `run` never panics on bad input; errors come back
//! as a `CommandResult` with exit code 1 (invalid input) or 2 (capacity or
//! convergence).

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand};
use serde_json::{json, Value};

use crate::error::{Error, Result};
use crate::graphs::{circulant, cycle, independence_number, Graph};
use crate::quantum::{kcbs_model, paper_model, qmax_seesaw, schmidt, ModelFile, QuantumModel, DEFAULT_RESTARTS};
use crate::report::paper_report;
use crate::scenarios::{
    builtin, edge_patterns_c5, enumerate_pentagonal, exclusivity_graph, feasible_patterns, lhv_bound, Inequality,
    ScenarioFile, BUILTIN_NAMES,
};
use crate::simkit::{run_experiment, SimConfig, DEFAULT_SHOTS};
use crate::theta::{lovasz_theta, DEFAULT_TOL};

/// Graph name for the five-cycle viewed as a contextuality scenario.
pub const KCBS_GRAPH: &str = "kcbs-graph";

#[derive(Parser, Debug)]
#[command(name = "pentabell", version, about = "Bounds and simulations for pentagonal Bell inequalities")]
pub struct Cli {
    /// Print machine-readable JSON instead of text
    #[arg(long, global = true)]
    pub json: bool,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Independence number of a graph, with a witness set
    Alpha {
        /// Graph file, or a name: pentagon, kcbs-graph, ci8, cN, kN, emptyN, or a built-in scenario
        graph: String,
    },
    /// Lovász number of a graph, with certificate checks
    Theta {
        graph: String,
        #[arg(long, default_value_t = DEFAULT_TOL)]
        tol: f64,
    },
    /// Local hidden variable bound by strategy enumeration
    Lhv {
        /// Scenario file or built-in name
        scenario: String,
    },
    /// Quantum lower bound by see-saw optimization
    Qmax {
        scenario: String,
        /// Local dimensions, e.g. 2,2
        #[arg(long, default_value = "2,2", value_parser = parse_dims)]
        dims: (usize, usize),
        #[arg(long, default_value_t = DEFAULT_RESTARTS)]
        restarts: usize,
        #[arg(long, env = "PENTABELL_SEED", default_value_t = 0)]
        seed: u64,
        /// Write the optimal model to this file
        #[arg(long)]
        model_out: Option<PathBuf>,
    },
    /// Edge patterns and all inequivalent pentagonal inequalities
    Enumerate,
    /// Finite-statistics simulation of an experiment
    Simulate {
        scenario: String,
        /// Model file; defaults to the quoted optimal model of a built-in scenario
        #[arg(long)]
        model: Option<PathBuf>,
        #[arg(long, default_value_t = DEFAULT_SHOTS)]
        shots: u64,
        #[arg(long, env = "PENTABELL_SEED", default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 1.0)]
        visibility: f64,
    },
    /// Recompute every reference number and report PASS/FAIL per item
    PaperReport {
        /// Multiply all tolerances by this factor
        #[arg(long, default_value_t = 1.0, hide = true)]
        tolerance_scale: f64,
    },
}

fn parse_dims(s: &str) -> std::result::Result<(usize, usize), String> {
    let parts: Vec<&str> = s.split(',').collect();
    match parts.as_slice() {
        [a, b] => Ok((a.trim().parse().map_err(|e| format!("{e}"))?, b.trim().parse().map_err(|e| format!("{e}"))?)),
        _ => Err("expected two comma-separated dimensions".into()),
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct CommandResult {
    pub exit_code: i32,
    /// Report for standard output.
    pub text: String,
    pub json: Option<Value>,
    /// Message for standard error.
    pub error: Option<String>,
}

impl CommandResult {
    fn ok(text: String, json: Value) -> Self {
        CommandResult { exit_code: 0, text, json: Some(json), error: None }
    }

    fn failed(e: &Error) -> Self {
        CommandResult { exit_code: e.exit_code(), text: String::new(), json: None, error: Some(format!("error: {e}")) }
    }

    /// What goes to standard output under the given `--json` setting.
    pub fn stdout(&self, json: bool) -> String {
        match (&self.json, json) {
            (Some(v), true) => serde_json::to_string_pretty(v).expect("json value") + "\n",
            _ => self.text.clone(),
        }
    }
}

/// Parses arguments (program name first) and runs the command.
pub fn run_args<I, T>(args: I) -> (CommandResult, bool)
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    match Cli::try_parse_from(args) {
        Ok(cli) => {
            let json = cli.json;
            (run(cli), json)
        }
        Err(e) => {
            use clap::error::ErrorKind;
            let shown = matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion);
            let exit_code = if shown { 0 } else { 1 };
            let r = if shown {
                CommandResult { exit_code, text: e.to_string(), json: None, error: None }
            } else {
                CommandResult { exit_code, text: String::new(), json: None, error: Some(e.to_string()) }
            };
            (r, false)
        }
    }
}

pub fn run(cli: Cli) -> CommandResult {
    let result = match cli.command {
        Command::Alpha { graph } => cmd_alpha(&graph),
        Command::Theta { graph, tol } => cmd_theta(&graph, tol),
        Command::Lhv { scenario } => cmd_lhv(&scenario),
        Command::Qmax { scenario, dims, restarts, seed, model_out } => {
            cmd_qmax(&scenario, dims, restarts, seed, model_out.as_deref())
        }
        Command::Enumerate => cmd_enumerate(),
        Command::Simulate { scenario, model, shots, seed, visibility } => {
            SimConfig::new(shots, seed, visibility).and_then(|cfg| cmd_simulate(&scenario, model.as_deref(), &cfg))
        }
        Command::PaperReport { tolerance_scale } => Ok(cmd_paper_report(tolerance_scale)),
    };
    result.unwrap_or_else(|e| CommandResult::failed(&e))
}

fn read(path: &Path) -> Result<String> {
    Ok(std::fs::read_to_string(path)?)
}

/// A graph from a file, or from a name when no such file exists.
pub fn resolve_graph(spec: &str) -> Result<Graph> {
    let path = Path::new(spec);
    if path.is_file() {
        return Graph::from_json(&read(path)?);
    }
    let number = |prefix: &str| spec.strip_prefix(prefix).and_then(|n| n.parse::<usize>().ok());
    if spec == "pentagon" || spec == KCBS_GRAPH {
        return cycle(5);
    }
    if spec == "ci8" {
        return circulant(8, &[1, 4]);
    }
    if let Some(iq) = builtin(spec) {
        return Ok(exclusivity_graph(&iq).0);
    }
    if let Some(n) = number("empty") {
        return Ok(Graph::empty(n));
    }
    if let Some(n) = number("c") {
        return cycle(n);
    }
    if let Some(n) = number("k") {
        if n == 0 || n > crate::graphs::MAX_VERTICES {
            return Err(Error::invalid(format!("complete graph order {n} out of range")));
        }
        return Ok(Graph::complete(n));
    }
    Err(Error::invalid(format!("no graph file or known graph named {spec:?}")))
}

/// A scenario from a file, or a built-in name when no such file exists.
pub fn resolve_scenario(spec: &str) -> Result<Inequality> {
    let path = Path::new(spec);
    if path.is_file() {
        let mut iq = Inequality::from_json(&read(path)?)?;
        if iq.name.is_empty() {
            iq.name = path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
        }
        return Ok(iq);
    }
    builtin(spec).ok_or_else(|| {
        Error::invalid(format!("no scenario file or built-in scenario named {spec:?} (built-ins: {})", BUILTIN_NAMES.join(", ")))
    })
}

fn cmd_alpha(spec: &str) -> Result<CommandResult> {
    let g = resolve_graph(spec)?;
    let s = independence_number(&g)?;
    let text = format!("alpha = {}\nwitness = {:?}\n", s.size, s.witness);
    Ok(CommandResult::ok(text, json!({"graph": spec, "alpha": s.size, "witness": s.witness})))
}

fn cmd_theta(spec: &str, tol: f64) -> Result<CommandResult> {
    let g = resolve_graph(spec)?;
    let r = lovasz_theta(&g, tol)?;
    let (neg, trace, edge) = r.certificate_violation(&g);
    let certified = neg <= 1e-8 && trace <= 1e-8 && edge <= 1e-8;
    let mut text = String::new();
    let _ = writeln!(text, "theta = {:.6}", r.value);
    let _ = writeln!(text, "upper bound = {:.6}", r.upper_bound);
    let _ = writeln!(text, "iterations = {}", r.iterations);
    let _ = writeln!(
        text,
        "certificate: {} (negative eigenvalue {neg:.1e}, trace error {trace:.1e}, edge entry {edge:.1e})",
        if certified { "ok" } else { "not ok" }
    );
    let json = json!({
        "graph": spec,
        "theta": r.value,
        "upper_bound": r.upper_bound,
        "gap": r.gap,
        "certificate": {"ok": certified, "negative_eigenvalue": neg, "trace_error": trace, "edge_entry": edge},
    });
    Ok(CommandResult::ok(text, json))
}

fn cmd_lhv(spec: &str) -> Result<CommandResult> {
    if spec == KCBS_GRAPH && !Path::new(spec).is_file() {
        let alpha = independence_number(&cycle(5)?)?;
        let text = format!("noncontextual bound = {}\nwitness = {:?}\n", alpha.size, alpha.witness);
        return Ok(CommandResult::ok(text, json!({"scenario": spec, "lhv": alpha.size, "witness": alpha.witness})));
    }
    let iq = resolve_scenario(spec)?;
    let (value, strategy) = lhv_bound(&iq, iq.alice_settings, iq.bob_settings)?;
    let (g, _) = exclusivity_graph(&iq);
    let alpha = independence_number(&g).ok().map(|s| s.size);
    let mut text = String::new();
    let _ = writeln!(text, "{}: {iq}", iq.name);
    let _ = writeln!(text, "LHV bound = {value}");
    let _ = writeln!(text, "strategy: alice outcomes {:?}, bob outcomes {:?}", strategy.alice, strategy.bob);
    if let Some(a) = alpha {
        let _ = writeln!(text, "alpha of exclusivity graph = {a}");
    }
    let json = json!({
        "scenario": iq.name,
        "lhv": value,
        "strategy": {"alice": strategy.alice, "bob": strategy.bob},
        "alpha": alpha,
    });
    Ok(CommandResult::ok(text, json))
}

fn cmd_qmax(spec: &str, dims: (usize, usize), restarts: usize, seed: u64, model_out: Option<&Path>) -> Result<CommandResult> {
    if spec == KCBS_GRAPH && !Path::new(spec).is_file() {
        let m = kcbs_model();
        let theta = lovasz_theta(&cycle(5)?, DEFAULT_TOL)?.value;
        let text = format!("quantum value = {:.6}\ntheta = {theta:.6}\n", m.total());
        let json = json!({"scenario": spec, "value": m.total(), "theta": theta, "probabilities": m.probabilities(), "model": m});
        return Ok(CommandResult::ok(text, json));
    }
    let iq = resolve_scenario(spec)?;
    let r = qmax_seesaw(&iq, dims, restarts, seed)?;
    let (g, _) = exclusivity_graph(&iq);
    let theta = lovasz_theta(&g, DEFAULT_TOL)?.value;
    let coefficients = schmidt(&r.model.state, dims)?;
    let model = ModelFile::from(&r.model);
    if let Some(path) = model_out {
        std::fs::write(path, r.model.to_json())?;
    }
    let mut text = String::new();
    let _ = writeln!(text, "{}: {iq}", iq.name);
    let _ = writeln!(text, "quantum value = {:.6} (dims {}x{}, {restarts} restarts, seed {seed})", r.value, dims.0, dims.1);
    let _ = writeln!(text, "theta = {theta:.6}; value within theta: {}", r.value <= theta + 1e-6);
    let shown: Vec<String> = coefficients.iter().map(|c| format!("{c:.6}")).collect();
    let _ = writeln!(text, "schmidt coefficients = [{}]", shown.join(", "));
    if let Some(path) = model_out {
        let _ = writeln!(text, "model written to {}", path.display());
    }
    let json = json!({
        "scenario": iq.name,
        "value": r.value,
        "dims": [dims.0, dims.1],
        "restarts": restarts,
        "seed": seed,
        "theta": theta,
        "within_theta": r.value <= theta + 1e-6,
        "schmidt": coefficients,
        "model": model,
    });
    Ok(CommandResult::ok(text, json))
}

fn cmd_enumerate() -> Result<CommandResult> {
    let patterns = edge_patterns_c5();
    let feasible = feasible_patterns();
    let found = enumerate_pentagonal(3, 3)?;
    let mut text = String::new();
    let _ = writeln!(text, "edge pattern classes: {}", patterns.len());
    for p in &patterns {
        let status = if p.has_triple_run() { "infeasible" } else { "feasible" };
        let _ = writeln!(text, "  {} ({} labelings, {status})", p.representative, p.members.len());
    }
    let names: Vec<&str> = feasible.iter().map(|p| p.representative.as_str()).collect();
    let _ = writeln!(text, "feasible: {}", names.join(", "));
    let _ = writeln!(text, "inequivalent pentagonal inequalities: {}", found.len());
    for iq in &found {
        let lhv = iq.bounds.map(|b| b.lhv).unwrap_or(f64::NAN);
        let _ = writeln!(text, "  {}: {iq}  (LHV {lhv})", iq.name);
    }
    let json = json!({
        "patterns": patterns.iter().map(|p| json!({
            "representative": p.representative,
            "members": p.members.len(),
            "feasible": !p.has_triple_run(),
        })).collect::<Vec<_>>(),
        "feasible": names,
        "inequalities": found.iter().map(|iq| json!({
            "name": iq.name,
            "scenario": ScenarioFile::from(iq),
            "terms": iq.terms.iter().map(|e| e.to_string()).collect::<Vec<_>>(),
            "lhv": iq.bounds.map(|b| b.lhv),
        })).collect::<Vec<_>>(),
    });
    Ok(CommandResult::ok(text, json))
}

fn cmd_simulate(spec: &str, model: Option<&Path>, cfg: &SimConfig) -> Result<CommandResult> {
    let iq = resolve_scenario(spec)?;
    let m = match model {
        Some(path) => QuantumModel::from_json(&read(path)?)?,
        None => paper_model(spec)
            .ok_or_else(|| Error::invalid(format!("no built-in model for {spec:?}; pass --model")))?,
    };
    let report = run_experiment(&iq, &m, cfg)?;
    let mut text = report.to_text();
    let _ = writeln!(text, "shots per setting pair {}, seed {}, visibility {}", cfg.shots, cfg.seed, cfg.visibility);
    Ok(CommandResult::ok(text, serde_json::to_value(&report)?))
}

fn cmd_paper_report(tolerance_scale: f64) -> CommandResult {
    let report = paper_report(tolerance_scale);
    let exit_code = if report.all_pass() { 0 } else { 1 };
    let json = json!({"all_pass": report.all_pass(), "checks": report.checks});
    CommandResult { exit_code, text: report.to_text(), json: Some(json), error: None }
}
