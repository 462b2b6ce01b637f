//! Parsers for the small flag languages (graph specs, thresholds, triggers,
//! grids).

use std::fs;
use std::path::Path;

use pcosync_core::engine::{FireOrder, InitialPhases, PhaseVector, TiePolicy, TriggerModel, UpdateRule};
use pcosync_core::montecarlo::RuleSpec;
use pcosync_core::{generate, rng, Digraph, GraphKind, GraphSequence};

use crate::args::{Order, Tie};
use crate::CliError;

fn invalid(msg: impl Into<String>) -> CliError {
    CliError::Validation(msg.into())
}

fn num<T: std::str::FromStr>(s: &str, what: &str) -> Result<T, CliError> {
    s.trim()
        .parse()
        .map_err(|_| invalid(format!("cannot parse {what} from '{s}'")))
}

fn read(path: &Path) -> Result<String, CliError> {
    fs::read_to_string(path).map_err(|e| invalid(format!("{}: {e}", path.display())))
}

/// Family without a size, as used by `compare --families`.
pub fn family(spec: &str, master_seed: u64) -> Result<GraphKind, CliError> {
    let parts: Vec<&str> = spec.trim().split(':').collect();
    match parts.as_slice() {
        ["complete"] => Ok(GraphKind::Complete),
        ["path"] => Ok(GraphKind::Path),
        ["cycle"] => Ok(GraphKind::Cycle),
        ["regular", d] => Ok(GraphKind::Regular { d: num(d, "degree")? }),
        ["random-rooted", p] => Ok(GraphKind::RandomRooted {
            extra_edge_prob: num(p, "edge probability")?,
            seed: master_seed,
        }),
        ["random-rooted", p, s] => Ok(GraphKind::RandomRooted {
            extra_edge_prob: num(p, "edge probability")?,
            seed: num(s, "graph seed")?,
        }),
        _ => Err(invalid(format!("unknown graph family '{spec}'"))),
    }
}

/// Full graph spec: a family with its size, or `file:PATH`.
pub fn graph(spec: &str, master_seed: u64) -> Result<Digraph, CliError> {
    if let Some(path) = spec.strip_prefix("file:") {
        let (g, dups) = Digraph::parse_edge_list(&read(Path::new(path))?)?;
        if dups > 0 {
            eprintln!("warning: {dups} duplicate edge(s) in {path} ignored");
        }
        return Ok(g);
    }
    let parts: Vec<&str> = spec.trim().split(':').collect();
    let (kind, n) = match parts.as_slice() {
        [fam, n] if ["complete", "path", "cycle"].contains(fam) => (family(fam, master_seed)?, *n),
        ["regular", d, n] => (GraphKind::Regular { d: num(d, "degree")? }, *n),
        ["random-rooted", n, p] => (family(&format!("random-rooted:{p}"), master_seed)?, *n),
        ["random-rooted", n, p, s] => (family(&format!("random-rooted:{p}:{s}"), master_seed)?, *n),
        _ => return Err(invalid(format!("unknown graph spec '{spec}'"))),
    };
    Ok(generate(kind, num(n, "vertex count")?)?)
}

pub fn thresholds(spec: &str, n: usize, master_seed: u64) -> Result<Vec<f64>, CliError> {
    let spec = spec.trim();
    if spec == "uniform" {
        return Ok(rng::shared_uniform(master_seed, "thresholds", n));
    }
    let values = spec
        .split(',')
        .map(|s| num::<f64>(s, "threshold"))
        .collect::<Result<Vec<_>, _>>()?;
    match values.len() {
        1 => Ok(vec![values[0]; n]),
        len if len == n => Ok(values),
        len => Err(invalid(format!("{len} thresholds given for {n} agents"))),
    }
}

pub fn tie(t: Tie) -> TiePolicy {
    match t {
        Tie::ToZero => TiePolicy::ToZero,
        Tie::ToOne => TiePolicy::ToOne,
        Tie::Random => TiePolicy::Random,
    }
}

pub fn order(o: Order) -> FireOrder {
    match o {
        Order::Ascending => FireOrder::Ascending,
        Order::Random => FireOrder::Random,
    }
}

pub fn rule(spec: &str, r: Vec<f64>, tie: TiePolicy) -> Result<UpdateRule, CliError> {
    let parts: Vec<&str> = spec.trim().split(':').collect();
    match parts.as_slice() {
        ["binary"] => Ok(UpdateRule::Binary { r, tie }),
        ["linear", m1, m2] => Ok(UpdateRule::PiecewiseLinear {
            m1: num(m1, "slope")?,
            m2: num(m2, "slope")?,
        }),
        _ => Err(invalid(format!("unknown rule '{spec}'"))),
    }
}

pub fn rule_spec(spec: &str) -> Result<RuleSpec, CliError> {
    let parts: Vec<&str> = spec.trim().split(':').collect();
    match parts.as_slice() {
        ["binary"] => Ok(RuleSpec::Binary { r: 0.5 }),
        ["binary", r] => Ok(RuleSpec::Binary { r: num(r, "threshold")? }),
        ["linear", m1, m2] => Ok(RuleSpec::Linear {
            m1: num(m1, "slope")?,
            m2: num(m2, "slope")?,
        }),
        _ => Err(invalid(format!("unknown rule '{spec}'"))),
    }
}

pub fn trigger(spec: &str) -> Result<TriggerModel, CliError> {
    let spec = spec.trim();
    if let Some(rest) = spec.strip_prefix("vertex:") {
        let probs = rest
            .split(',')
            .map(|s| num::<f64>(s, "probability"))
            .collect::<Result<Vec<_>, _>>()?;
        return Ok(TriggerModel::VertexBernoulli { probs });
    }
    if let Some(rest) = spec.strip_prefix("edge:") {
        return Ok(TriggerModel::EdgeBernoulli { p: num(rest, "probability")? });
    }
    if let Some(rest) = spec.strip_prefix("masks:") {
        let (path, repeat) = match rest.strip_suffix(":repeat") {
            Some(p) => (p, true),
            None => (rest, false),
        };
        let seq = GraphSequence::parse(&read(Path::new(path))?, repeat)?;
        return Ok(TriggerModel::Deterministic { seq });
    }
    Err(invalid(format!("unknown trigger '{spec}'")))
}

pub fn masks_file(path: &Path) -> Result<GraphSequence, CliError> {
    Ok(GraphSequence::parse(&read(path)?, false)?)
}

/// `None` means uniform initial phases.
pub fn init(spec: &str, n: usize) -> Result<Option<Vec<f64>>, CliError> {
    let spec = spec.trim();
    if spec == "uniform" {
        return Ok(None);
    }
    let tau = if let Some(mu) = spec.strip_prefix("const:") {
        vec![num(mu, "phase")?; n]
    } else {
        spec.split(',')
            .map(|s| num::<f64>(s, "phase"))
            .collect::<Result<Vec<_>, _>>()?
    };
    if tau.len() != n {
        return Err(invalid(format!("{} initial phases given for {n} agents", tau.len())));
    }
    PhaseVector::new(tau.clone())?;
    Ok(Some(tau))
}

pub fn initial_phases(spec: &str, n: usize) -> Result<InitialPhases, CliError> {
    Ok(match init(spec, n)? {
        Some(tau) => InitialPhases::Explicit(PhaseVector(tau)),
        None => InitialPhases::Uniform,
    })
}

/// `N`, `A:B:STEP` (inclusive) or `N1,N2,...`.
pub fn size_grid(spec: &str) -> Result<Vec<usize>, CliError> {
    let parts: Vec<&str> = spec.trim().split(':').collect();
    let grid: Vec<usize> = match parts.as_slice() {
        [a, b, step] => {
            let (a, b, step): (usize, usize, usize) = (num(a, "size")?, num(b, "size")?, num(step, "step")?);
            if step == 0 || b < a {
                return Err(invalid(format!("bad size range '{spec}'")));
            }
            (a..=b).step_by(step).collect()
        }
        [list] => list
            .split(',')
            .map(|s| num(s, "size"))
            .collect::<Result<_, _>>()?,
        _ => return Err(invalid(format!("bad size grid '{spec}'"))),
    };
    if grid.is_empty() || grid.contains(&0) {
        return Err(invalid(format!("bad size grid '{spec}'")));
    }
    Ok(grid)
}

/// `A:B:STEP` (inclusive, rounded to 1e-9) or a comma list.
pub fn float_grid(spec: &str) -> Result<Vec<f64>, CliError> {
    let parts: Vec<&str> = spec.trim().split(':').collect();
    match parts.as_slice() {
        [a, b, step] => {
            let (a, b, step): (f64, f64, f64) = (num(a, "value")?, num(b, "value")?, num(step, "step")?);
            if !(step > 0.0) || b < a {
                return Err(invalid(format!("bad range '{spec}'")));
            }
            let count = ((b - a) / step + 1e-9).floor() as usize + 1;
            Ok((0..count)
                .map(|i| ((a + i as f64 * step) * 1e9).round() / 1e9)
                .collect())
        }
        [list] => list.split(',').map(|s| num(s, "value")).collect(),
        _ => Err(invalid(format!("bad grid '{spec}'"))),
    }
}
