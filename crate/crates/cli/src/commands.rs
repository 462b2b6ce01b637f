use std::fs;
use std::path::Path;

use rayon::prelude::*;
use serde_json::{json, Value};

use pcosync_core::analysis::tail_bound;
use pcosync_core::engine::{simulate, Record, SimConfig, StopConditions, TriggerModel, UpdateRule};
use pcosync_core::montecarlo::{self, CampaignSettings};
use pcosync_core::stringcheck::{string_check, StringCheckSpec};
use pcosync_core::{rng, BoundReport, Digraph};

use crate::args::{BoundArgs, CompareArgs, ModelArgs, MontecarloArgs, RunArgs, SimulateArgs, StringCheckArgs};
use crate::{specs, CliError};

/// Audit block embedded in every artifact.
pub struct Echo {
    pub invocation: Value,
}

impl Echo {
    fn with(&self, master_seed: u64, resolved: Value) -> Value {
        json!({
            "tool": "pcosync",
            "version": env!("CARGO_PKG_VERSION"),
            "rng": rng::GENERATOR,
            "master_seed": master_seed,
            "invocation": self.invocation,
            "resolved": resolved,
        })
    }
}

fn write_out(path: Option<&Path>, text: &str) -> Result<(), CliError> {
    match path {
        Some(p) => fs::write(p, text).map_err(|e| CliError::Runtime(format!("{}: {e}", p.display()))),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn json_text(v: &Value) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("json value serializes");
    s.push('\n');
    s
}

fn csv_text(echo: &Value, body: &str) -> String {
    format!("# {}\n{body}", serde_json::to_string(echo).expect("json value serializes"))
}

/// Summary lines go to stdout when the artifact goes to a file.
fn say(to_file: bool, line: &str) {
    if to_file {
        println!("{line}");
    } else {
        eprintln!("{line}");
    }
}

fn fmt_opt(v: Option<f64>) -> String {
    v.map_or_else(|| "none".into(), |x| x.to_string())
}

fn load_graph(model: &ModelArgs) -> Result<Digraph, CliError> {
    let g = specs::graph(&model.graph, model.seed)?;
    if model.require_rooted && !g.is_rooted() {
        return Err(CliError::Validation(format!("graph '{}' has no root", model.graph)));
    }
    Ok(g)
}

fn build_config(model: &ModelArgs, run: &RunArgs, graph: Digraph) -> Result<SimConfig, CliError> {
    let n = graph.n();
    let r = specs::thresholds(&model.r, n, model.seed)?;
    let cfg = SimConfig {
        rule: specs::rule(&model.rule, r, specs::tie(model.tie))?,
        trigger: specs::trigger(&model.trigger)?,
        initial: specs::initial_phases(&run.init, n)?,
        period: model.period,
        seed: model.seed,
        stop: StopConditions {
            sync_eps: run.eps,
            max_time: run.max_time,
            max_jumps: run.max_jumps,
            stop_on_sync: true,
        },
        order: specs::order(run.order),
        record: Record::Full,
        graph,
    };
    cfg.validate()?;
    Ok(cfg)
}

/// Bound for binary-rule, vertex-triggered runs on rooted graphs.
fn bound_for(cfg: &SimConfig) -> Option<BoundReport> {
    match (&cfg.rule, &cfg.trigger) {
        (UpdateRule::Binary { r, .. }, TriggerModel::VertexBernoulli { probs }) if cfg.graph.is_rooted() => {
            tail_bound(&cfg.graph, probs, r, cfg.period).ok()
        }
        _ => None,
    }
}

pub fn cmd_simulate(echo: &Echo, a: &SimulateArgs) -> Result<(), CliError> {
    let mut cfg = build_config(&a.model, &a.run, load_graph(&a.model)?)?;
    cfg.stop.stop_on_sync = !a.no_stop_on_sync;
    let arc = simulate(&cfg)?;
    let echo = echo.with(cfg.seed, serde_json::to_value(&cfg).expect("config serializes"));
    write_out(a.out.as_deref(), &json_text(&arc.to_json(&echo)))?;
    if let Some(p) = &a.events_csv {
        write_out(Some(p), &csv_text(&echo, &arc.events_csv()))?;
    }
    let to_file = a.out.is_some();
    say(to_file, &format!("sync_time: {}", fmt_opt(arc.sync_time)));
    say(to_file, &format!("jumps: {}", arc.jumps));
    say(to_file, &format!("final_V: {}", arc.final_v()));
    Ok(())
}

pub fn cmd_montecarlo(echo: &Echo, a: &MontecarloArgs) -> Result<(), CliError> {
    if a.runs == 0 {
        return Err(CliError::Validation("--runs must be at least 1".into()));
    }
    let cfg = build_config(&a.model, &a.run, load_graph(&a.model)?)?;
    let bound = bound_for(&cfg);
    let unit = match a.bin.trim() {
        "tstar" => bound
            .as_ref()
            .map(|b| b.t_star)
            .ok_or_else(|| CliError::Validation("--bin tstar needs a binary rule, vertex trigger and rooted graph".into()))?,
        s => s
            .parse::<f64>()
            .map_err(|_| CliError::Validation(format!("bad --bin '{s}'")))?,
    };
    let batch = montecarlo::run_batch(&cfg, a.runs, a.model.seed)?;
    let tail = montecarlo::empirical_tail(&batch.sync_times(), unit)?;

    let echo = echo.with(
        a.model.seed,
        json!({ "config": cfg, "bin": unit, "bound": bound }),
    );
    write_out(a.out.as_deref(), &csv_text(&echo, &montecarlo::tail_csv(&tail, bound.as_ref())?))?;
    if let Some(p) = &a.batch_out {
        write_out(Some(p), &csv_text(&echo, &batch.to_csv()?))?;
    }
    let to_file = a.out.is_some();
    say(to_file, &format!("runs: {} synchronized: {}", batch.runs, batch.success_count));
    say(to_file, &format!("mean_sync_time: {} median: {}", fmt_opt(batch.mean), fmt_opt(batch.median)));
    if let Some(b) = &bound {
        say(to_file, &format!("T*: {} rho: {} ln(1-rho): {}", b.t_star, b.rho, b.ln_eta));
    }
    Ok(())
}

pub fn cmd_compare(echo: &Echo, a: &CompareArgs) -> Result<(), CliError> {
    let families = a
        .families
        .split(',')
        .map(|f| specs::family(f, a.seed))
        .collect::<Result<Vec<_>, _>>()?;
    let sizes = specs::size_grid(&a.n)?;
    let settings = CampaignSettings {
        period: a.period,
        p: a.p,
        eps: a.eps,
        max_time: a.max_time,
        max_jumps: a.max_jumps,
        runs: a.runs,
        master_seed: a.seed,
    };
    if a.runs == 0 {
        return Err(CliError::Validation("--runs must be at least 1".into()));
    }
    if !(a.p > 0.0 && a.p < 1.0) {
        return Err(CliError::Validation(format!("p = {} must lie in (0,1)", a.p)));
    }

    let (body, resolved) = match &a.slope_sweep {
        Some(grid) => {
            let m_grid = specs::float_grid(grid)?;
            let [n] = sizes.as_slice() else {
                return Err(CliError::Validation("--slope-sweep takes a single --n".into()));
            };
            let rows = montecarlo::slope_sweep(&m_grid, &families, *n, &settings)?;
            (
                montecarlo::sweep_csv(&rows)?,
                json!({ "settings": settings, "families": families, "n": n, "m_grid": m_grid }),
            )
        }
        None => {
            let rules = a
                .rules
                .split(',')
                .map(specs::rule_spec)
                .collect::<Result<Vec<_>, _>>()?;
            let rows = montecarlo::compare(&rules, &families, &sizes, &settings)?;
            (
                montecarlo::compare_csv(&rows)?,
                json!({ "settings": settings, "families": families, "n_grid": sizes, "rules": rules }),
            )
        }
    };
    let echo = echo.with(a.seed, resolved);
    write_out(a.out.as_deref(), &csv_text(&echo, &body))?;
    say(a.out.is_some(), &format!("rows: {}", body.lines().count().saturating_sub(1)));
    Ok(())
}

pub fn cmd_bound(echo: &Echo, a: &BoundArgs) -> Result<(), CliError> {
    let g = load_graph(&a.model)?;
    let r = specs::thresholds(&a.model.r, g.n(), a.model.seed)?;
    let probs = match specs::trigger(&a.model.trigger)? {
        TriggerModel::VertexBernoulli { probs } => probs,
        _ => return Err(CliError::Validation("the bound needs a vertex:P trigger".into())),
    };
    let b = tail_bound(&g, &probs, &r, a.model.period)?;
    let tail: Vec<Value> = (1..=a.n_max).map(|n| json!({ "n": n, "bound": b.tail(n) })).collect();
    let echo = echo.with(
        a.model.seed,
        json!({ "graph": g, "r": r, "probs": probs, "period": a.model.period }),
    );
    let out = json!({ "config_echo": echo, "bound": b, "tail": tail });
    write_out(a.out.as_deref(), &json_text(&out))?;
    let to_file = a.out.is_some();
    say(to_file, &format!("ell*: {} L*: {} dep: {}", b.ell_star, b.l_star, b.dep));
    say(to_file, &format!("T*: {} rho: {} ln(1-rho): {}", b.t_star, b.rho, b.ln_eta));
    Ok(())
}

pub fn cmd_string_check(echo: &Echo, a: &StringCheckArgs) -> Result<(), CliError> {
    if a.runs == 0 {
        return Err(CliError::Validation("--runs must be at least 1".into()));
    }
    let g = specs::graph(&a.graph, a.seed)?;
    let root = match a.root {
        Some(v) => v,
        None => *g.roots().first().ok_or(pcosync_core::Error::NotRooted)?,
    };
    let r = specs::thresholds(&a.r, g.n(), a.seed)?;
    let initial = specs::init(&a.init, g.n())?;
    let prefix = match &a.prefix {
        Some(p) => specs::masks_file(p)?.masks,
        None => Vec::new(),
    };
    let base = StringCheckSpec {
        graph: g,
        root,
        r,
        tie: specs::tie(a.tie),
        period: a.period,
        initial,
        prefix,
        seed: a.seed,
    };
    let reports = (0..a.runs as u64)
        .into_par_iter()
        .map(|i| {
            let mut spec = base.clone();
            spec.seed = rng::derive_seed(a.seed, &[i]);
            string_check(&spec).map(|(rep, arc)| {
                json!({ "run": i, "seed": spec.seed, "initial": arc.initial, "report": rep })
            })
        })
        .collect::<Result<Vec<_>, _>>()?;
    let passed = reports.iter().filter(|r| r["report"]["passed"] == json!(true)).count();
    let head = &reports[0]["report"];

    let echo = echo.with(
        a.seed,
        json!({ "graph": base.graph, "root": root, "r": base.r, "tie": base.tie, "period": a.period,
                "prefix_len": base.prefix.len() }),
    );
    let out = json!({
        "config_echo": echo,
        "root": root,
        "q_star": head["q_star"],
        "ell_star": head["ell_star"],
        "l_star": head["l_star"],
        "runs": a.runs,
        "passed": passed,
        "results": reports,
    });
    write_out(a.out.as_deref(), &json_text(&out))?;
    let to_file = a.out.is_some();
    say(
        to_file,
        &format!("root: {root} q*: {} ell*: {} L*: {}", head["q_star"], head["ell_star"], head["l_star"]),
    );
    say(to_file, &format!("passed: {passed}/{}", a.runs));
    if passed < a.runs {
        return Err(CliError::CheckFailed(format!("{} run(s) failed the string check", a.runs - passed)));
    }
    Ok(())
}
