//! Command-line front end: evaluate temporal robustness of a signal against
//! a spec file, run Monte Carlo risk estimation, check spec files, and export
//! the built-in scenarios.
//!
//! Exit codes: 0 success, 2 specification/validation error, 3 I/O error.

use clap::{Args, Parser, Subcommand};
use std::path::{Path, PathBuf};
use std::time::Instant;

use temprisk::exec::{init_thread_cap, ExecPolicy};
use temprisk::io;
use temprisk::parse::{parse_constraint, parse_formula, print_constraint};
use temprisk::risk::RiskRequest;
use temprisk::robustness::{
    eta, theta, Checker, ConstraintChecker, CountingChecker, StlChecker,
};
use temprisk::scenario::{example_sines, servicing, t_intersection};
use temprisk::signal::{GroupPartition, Signal};
use temprisk::stochastic::{
    mc_risk, BaseSource, McConfig, ProcessModel, RobustnessKind, ShiftDistribution,
};
use temprisk::Error;

#[derive(Parser)]
#[command(name = "temprisk", version, about = "Temporal robustness and its risk")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Compute synchronous or asynchronous temporal robustness of a signal.
    Eval(EvalArgs),
    /// Monte Carlo estimation of temporal robustness risk.
    Mc(McArgs),
    /// Parse and validate a spec file, emitting its canonical form.
    ParseCheck(ParseCheckArgs),
    /// Export a built-in scenario (config, signal, spec).
    Scenario(ScenarioArgs),
}

#[derive(Args)]
struct EvalArgs {
    /// Signal file (.csv or .json).
    #[arg(long)]
    signal: PathBuf,
    /// Spec file: constraint lines or an STL formula.
    #[arg(long)]
    spec: PathBuf,
    /// eta (synchronous) or theta (asynchronous).
    #[arg(long, default_value = "theta")]
    kind: String,
    /// Robustness bound in steps.
    #[arg(long, default_value_t = 100)]
    r: i64,
    /// Shift groups as 1-based component lists, e.g. "1,2;3,4".
    /// Defaults to one group per component.
    #[arg(long)]
    groups: Option<String>,
    /// Evaluation time step for STL formulas.
    #[arg(long, default_value_t = 0)]
    t: i64,
    /// Seconds per step (interval conversion and CSV ingestion).
    #[arg(long, default_value_t = 1.0)]
    dt: f64,
}

#[derive(Args)]
struct McArgs {
    /// Built-in scenario: example1, tintersection:S1, tintersection:S2,
    /// or servicing.
    #[arg(long, conflicts_with = "model")]
    scenario: Option<String>,
    /// Custom model description (JSON).
    #[arg(long)]
    model: Option<PathBuf>,
    /// Uniform start-time bound in steps (tintersection, example1).
    #[arg(long, default_value_t = 0)]
    d: i64,
    /// Poisson delay rates "l1,l2" (servicing).
    #[arg(long)]
    lambda: Option<String>,
    /// Deterministic per-group shifts "k1,k2,..", overriding --d.
    #[arg(long)]
    det_shifts: Option<String>,
    /// Gaussian speed-noise sigma (tintersection).
    #[arg(long, default_value_t = 0.0)]
    noise_sigma: f64,
    #[arg(long, default_value = "theta")]
    kind: String,
    /// Robustness bound in steps.
    #[arg(long, default_value_t = 10)]
    r: i64,
    /// Number of realizations.
    #[arg(long = "N", default_value_t = 10_000)]
    n: usize,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    /// Risk levels, comma separated.
    #[arg(long, default_value = "0.95")]
    beta: String,
    #[arg(long, default_value_t = 0.01)]
    delta: f64,
    #[arg(long)]
    out_dir: PathBuf,
}

#[derive(Args)]
struct ParseCheckArgs {
    #[arg(long)]
    spec: PathBuf,
    #[arg(long, default_value_t = 1.0)]
    dt: f64,
}

#[derive(Args)]
struct ScenarioArgs {
    /// example1, tintersection:S1, tintersection:S2, or servicing.
    #[arg(long)]
    name: String,
    #[arg(long)]
    out_dir: PathBuf,
}

fn main() {
    init_thread_cap();
    let cli = Cli::parse();
    let result = match cli.cmd {
        Cmd::Eval(a) => cmd_eval(a),
        Cmd::Mc(a) => cmd_mc(a),
        Cmd::ParseCheck(a) => cmd_parse_check(a),
        Cmd::Scenario(a) => cmd_scenario(a),
    };
    if let Err(e) = result {
        eprintln!("error: {e}");
        let code = match e {
            Error::Io(_) => 3,
            _ => 2,
        };
        std::process::exit(code);
    }
}

/// A spec file holds either constraint lines or one STL formula.
enum SpecFile {
    Constraint(temprisk::constraint::ConstraintSpec),
    Formula(temprisk::formula::StlFormula),
}

fn looks_like_constraint(text: &str) -> bool {
    text.lines()
        .map(|l| l.split('#').next().unwrap_or("").trim())
        .filter(|l| !l.is_empty())
        .all(|l| l.starts_with("on") || l.starts_with("default"))
}

fn load_spec(path: &Path, dt: f64) -> Result<SpecFile, Error> {
    let text = io::read_file(path)?;
    if looks_like_constraint(&text) {
        Ok(SpecFile::Constraint(parse_constraint(&text)?))
    } else {
        Ok(SpecFile::Formula(parse_formula(&text, dt)?))
    }
}

fn load_signal(path: &Path, dt: f64) -> Result<Signal, Error> {
    let text = io::read_file(path)?;
    if path.extension().is_some_and(|e| e == "json") {
        io::signal_from_json(&text)
    } else {
        io::signal_from_csv(&text, dt)
    }
}

fn parse_kind(kind: &str) -> Result<RobustnessKind, Error> {
    match kind {
        "eta" => Ok(RobustnessKind::Eta),
        "theta" => Ok(RobustnessKind::Theta),
        other => Err(Error::Validation(format!(
            "kind must be 'eta' or 'theta', got '{other}'"
        ))),
    }
}

fn cmd_eval(a: EvalArgs) -> Result<(), Error> {
    let signal = load_signal(&a.signal, a.dt)?;
    let spec = load_spec(&a.spec, a.dt)?;
    let kind = parse_kind(&a.kind)?;
    let checker: Box<dyn Checker> = match spec {
        SpecFile::Constraint(c) => Box::new(ConstraintChecker::new(c, signal.n())?),
        SpecFile::Formula(f) => Box::new(StlChecker::new(f, signal.n(), a.t)?),
    };
    let counting = CountingChecker::new(checker.as_ref());
    let groups = match &a.groups {
        Some(g) => GroupPartition::parse(g, signal.n())?,
        None => GroupPartition::per_component(signal.n()),
    };
    let policy = ExecPolicy::from_env();
    let value = match kind {
        RobustnessKind::Eta => eta(&signal, &counting, a.r)?,
        RobustnessKind::Theta => theta(&signal, &counting, a.r, &groups, policy)?,
    };
    let out = serde_json::json!({
        "schema": 1,
        "sign": value.sign.value(),
        "magnitude": value.magnitude,
        "saturated": value.saturated,
        "signed": value.signed(),
        "checker_calls": counting.calls(),
    });
    println!("{}", serde_json::to_string_pretty(&out).expect("serializable"));
    Ok(())
}

fn parse_f64_list(text: &str, what: &str) -> Result<Vec<f64>, Error> {
    text.split(',')
        .map(|p| {
            p.trim()
                .parse::<f64>()
                .map_err(|_| Error::Validation(format!("bad {what} entry '{p}'")))
        })
        .collect()
}

fn parse_i64_list(text: &str, what: &str) -> Result<Vec<i64>, Error> {
    text.split(',')
        .map(|p| {
            p.trim()
                .parse::<i64>()
                .map_err(|_| Error::Validation(format!("bad {what} entry '{p}'")))
        })
        .collect()
}

/// Custom model description.
#[derive(serde::Deserialize, serde::Serialize)]
struct ModelFile {
    signal: PathBuf,
    spec: PathBuf,
    #[serde(default = "default_dt")]
    dt: f64,
    #[serde(default)]
    t: i64,
    groups: String,
    shifts: Vec<ShiftDistribution>,
}

fn default_dt() -> f64 {
    1.0
}

struct PreparedModel {
    model: ProcessModel,
    checker: Box<dyn Checker>,
    config_json: serde_json::Value,
}

fn prepare_model(a: &McArgs) -> Result<PreparedModel, Error> {
    if let Some(path) = &a.model {
        let text = io::read_file(path)?;
        let mf: ModelFile =
            serde_json::from_str(&text).map_err(|e| Error::Validation(format!("model json: {e}")))?;
        let signal = load_signal(&mf.signal, mf.dt)?;
        let n = signal.n();
        let groups = GroupPartition::parse(&mf.groups, n)?;
        let checker: Box<dyn Checker> = match load_spec(&mf.spec, mf.dt)? {
            SpecFile::Constraint(c) => Box::new(ConstraintChecker::new(c, n)?),
            SpecFile::Formula(f) => Box::new(StlChecker::new(f, n, mf.t)?),
        };
        let config_json = serde_json::to_value(&mf).expect("serializable");
        let model = ProcessModel::new(
            BaseSource::Fixed(signal),
            groups,
            mf.shifts.clone(),
            vec![],
            a.seed,
        )?;
        return Ok(PreparedModel {
            model,
            checker,
            config_json,
        });
    }
    let name = a
        .scenario
        .as_deref()
        .ok_or_else(|| Error::Validation("pass --scenario or --model".into()))?;
    match name {
        "tintersection:S1" | "tintersection:S2" => {
            let cfg = if name.ends_with("S1") {
                t_intersection::TIntersectionConfig::s1()
            } else {
                t_intersection::TIntersectionConfig::s2()
            };
            let shifts = match &a.det_shifts {
                Some(text) => {
                    let vals = parse_i64_list(text, "det-shifts")?;
                    if vals.len() != 3 {
                        return Err(Error::Validation("need 3 deterministic shifts".into()));
                    }
                    vals.into_iter()
                        .map(|shift| ShiftDistribution::Deterministic { shift })
                        .collect()
                }
                None => vec![ShiftDistribution::UniformInt { d: a.d }; 3],
            };
            let model = t_intersection::process_model(&cfg, shifts.clone(), a.noise_sigma, a.seed)?;
            let checker: Box<dyn Checker> = Box::new(t_intersection::TIChecker::new(&cfg));
            let config_json = serde_json::json!({
                "scenario": name,
                "config": serde_json::to_value(&cfg).expect("serializable"),
                "shifts": serde_json::to_value(&shifts).expect("serializable"),
                "noise_sigma": a.noise_sigma,
            });
            Ok(PreparedModel {
                model,
                checker,
                config_json,
            })
        }
        "servicing" => {
            let cfg = servicing::ServicingConfig::default();
            let lambdas = match &a.lambda {
                Some(text) => parse_f64_list(text, "lambda")?,
                None => vec![1.0, 1.0],
            };
            if lambdas.len() != 2 {
                return Err(Error::Validation("need 2 lambda values".into()));
            }
            let model = servicing::poisson_delay_model(&cfg, lambdas[0], lambdas[1], a.seed)?;
            let (_, formula, _) = servicing::build(&cfg)?;
            let checker: Box<dyn Checker> = Box::new(StlChecker::new(formula, 8, 0)?);
            let config_json = serde_json::json!({
                "scenario": name,
                "config": serde_json::to_value(&cfg).expect("serializable"),
                "lambda": lambdas,
            });
            Ok(PreparedModel {
                model,
                checker,
                config_json,
            })
        }
        "example1" => {
            let cfg = example_sines::ExampleSinesConfig::default();
            let (signal, constraint, groups) = example_sines::build(&cfg)?;
            let checker: Box<dyn Checker> = Box::new(ConstraintChecker::new(constraint, 2)?);
            let shifts = vec![ShiftDistribution::UniformInt { d: a.d }; groups.group_count()];
            let config_json = serde_json::json!({
                "scenario": name,
                "config": serde_json::to_value(&cfg).expect("serializable"),
                "d": a.d,
            });
            let model =
                ProcessModel::new(BaseSource::Fixed(signal), groups, shifts, vec![], a.seed)?;
            Ok(PreparedModel {
                model,
                checker,
                config_json,
            })
        }
        other => Err(Error::Validation(format!("unknown scenario '{other}'"))),
    }
}

fn cmd_mc(a: McArgs) -> Result<(), Error> {
    let started = Instant::now();
    let prepared = prepare_model(&a)?;
    let betas = parse_f64_list(&a.beta, "beta")?;
    let mut requests = Vec::new();
    for &beta in &betas {
        requests.push(RiskRequest::Var { beta, delta: a.delta });
    }
    for &beta in &betas {
        requests.push(RiskRequest::Cvar { beta });
    }
    requests.push(RiskRequest::Expectation);
    let cfg = McConfig {
        n: a.n,
        r: a.r,
        kind: parse_kind(&a.kind)?,
        requests,
    };
    let outcome = mc_risk(
        &prepared.model,
        prepared.checker.as_ref(),
        &cfg,
        ExecPolicy::from_env(),
    )?;
    let config_json = serde_json::json!({
        "model": prepared.config_json,
        "mc": serde_json::to_value(&cfg).expect("serializable"),
    });
    let command: Vec<String> = std::env::args().collect();
    let manifest = io::RunManifest::new(
        command.join(" "),
        &config_json,
        a.seed,
        started.elapsed().as_millis() as u64,
    );
    let report_doc = serde_json::json!({
        "schema": 1,
        "manifest": {
            "command": manifest.command,
            "config_digest": manifest.config_digest,
            "seed": manifest.seed,
            "tool_version": manifest.tool_version,
        },
        "report": serde_json::to_value(&outcome.report).expect("serializable"),
    });
    io::write_file(
        &a.out_dir.join("report.json"),
        &serde_json::to_string_pretty(&report_doc).expect("serializable"),
    )?;
    io::write_file(&a.out_dir.join("samples.csv"), &io::samples_to_csv(&outcome.samples))?;
    io::write_file(&a.out_dir.join("report.csv"), &io::report_to_csv(&outcome.report))?;
    io::write_file(
        &a.out_dir.join("hist.json"),
        &serde_json::to_string_pretty(&io::histogram(&outcome.samples)).expect("serializable"),
    )?;
    io::write_file(
        &a.out_dir.join("manifest.json"),
        &serde_json::to_string_pretty(&manifest).expect("serializable"),
    )?;
    let any_var_error = outcome.report.var.iter().any(|v| v.error.is_some());
    println!(
        "{}",
        serde_json::to_string_pretty(&outcome.report).expect("serializable")
    );
    if any_var_error {
        return Err(Error::Validation(
            "one or more risk requests failed their sample-size precondition (see report.json)"
                .into(),
        ));
    }
    Ok(())
}

fn cmd_parse_check(a: ParseCheckArgs) -> Result<(), Error> {
    let text = io::read_file(&a.spec)?;
    if looks_like_constraint(&text) {
        let c = parse_constraint(&text)?;
        print!("{}", print_constraint(&c));
    } else {
        let f = parse_formula(&text, a.dt)?;
        log_intervals(&f, a.dt);
        println!("{f}");
    }
    Ok(())
}

fn log_intervals(f: &temprisk::formula::StlFormula, dt: f64) {
    use temprisk::formula::StlFormula::*;
    match f {
        True | Pred(_) => {}
        Not(p) => log_intervals(p, dt),
        And(x, y) | Or(x, y) => {
            log_intervals(x, dt);
            log_intervals(y, dt);
        }
        UntilF(i, x, y) | UntilP(i, x, y) => {
            eprintln!(
                "interval [{},{}] -> [{},{}] steps at dt={dt}",
                i.lo_units, i.hi_units, i.lo, i.hi
            );
            log_intervals(x, dt);
            log_intervals(y, dt);
        }
        EvF(i, p) | EvP(i, p) | AlwF(i, p) | AlwP(i, p) => {
            eprintln!(
                "interval [{},{}] -> [{},{}] steps at dt={dt}",
                i.lo_units, i.hi_units, i.lo, i.hi
            );
            log_intervals(p, dt);
        }
    }
}

fn cmd_scenario(a: ScenarioArgs) -> Result<(), Error> {
    match a.name.as_str() {
        "example1" => {
            let cfg = example_sines::ExampleSinesConfig::default();
            let (signal, constraint, _) = example_sines::build(&cfg)?;
            io::write_file(
                &a.out_dir.join("config.json"),
                &serde_json::to_string_pretty(&cfg).expect("serializable"),
            )?;
            io::write_file(&a.out_dir.join("signal.csv"), &io::signal_to_csv(&signal))?;
            io::write_file(&a.out_dir.join("constraint.spec"), &print_constraint(&constraint))?;
        }
        "tintersection:S1" | "tintersection:S2" => {
            let cfg = if a.name.ends_with("S1") {
                t_intersection::TIntersectionConfig::s1()
            } else {
                t_intersection::TIntersectionConfig::s2()
            };
            let (signal, constraint, _) = t_intersection::build(&cfg)?;
            io::write_file(
                &a.out_dir.join("config.json"),
                &serde_json::to_string_pretty(&cfg).expect("serializable"),
            )?;
            io::write_file(&a.out_dir.join("signal.csv"), &io::signal_to_csv(&signal))?;
            io::write_file(&a.out_dir.join("constraint.spec"), &print_constraint(&constraint))?;
        }
        "servicing" => {
            let cfg = servicing::ServicingConfig::default();
            let (signal, _, _) = servicing::build(&cfg)?;
            io::write_file(
                &a.out_dir.join("config.json"),
                &serde_json::to_string_pretty(&cfg).expect("serializable"),
            )?;
            io::write_file(&a.out_dir.join("signal.csv"), &io::signal_to_csv(&signal))?;
            io::write_file(&a.out_dir.join("formula.stl"), &cfg.formula_text())?;
        }
        other => return Err(Error::Validation(format!("unknown scenario '{other}'"))),
    }
    Ok(())
}
