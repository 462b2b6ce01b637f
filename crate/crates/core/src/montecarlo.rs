//! Seeded batch campaigns: sync-time tails, rule comparison across graph
//! families, and slope sweeps.
//!
//! Run `i` of a batch always uses the stream derived from
//! `(master_seed, i)`; comparison cells use `(master_seed, family, n, i)` so
//! every rule sees the same initial phases and the same trigger draws.
//! Results never depend on the rayon schedule.

use rayon::prelude::*;
use serde::Serialize;

use crate::analysis::BoundReport;
use crate::engine::{simulate, InitialPhases, Record, SimConfig, StopConditions, TriggerModel, UpdateRule};
use crate::error::{Error, Result};
use crate::graph::{generate, GraphKind};
use crate::rng;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunRecord {
    pub run_index: u64,
    pub seed: u64,
    pub sync_time: Option<f64>,
    pub jumps: u64,
    pub final_v: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BatchResult {
    pub records: Vec<RunRecord>,
    pub runs: usize,
    pub success_count: usize,
    /// Over successful runs only.
    pub mean: Option<f64>,
    pub median: Option<f64>,
}

impl BatchResult {
    pub fn sync_times(&self) -> Vec<Option<f64>> {
        self.records.iter().map(|r| r.sync_time).collect()
    }

    /// Columns `run,seed,sync_time,jumps,final_V`; a run that never
    /// synchronized has an empty `sync_time`.
    pub fn to_csv(&self) -> Result<String> {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(["run", "seed", "sync_time", "jumps", "final_V"])
            .map_err(csv_err)?;
        for r in &self.records {
            w.write_record([
                r.run_index.to_string(),
                r.seed.to_string(),
                r.sync_time.map(|t| t.to_string()).unwrap_or_default(),
                r.jumps.to_string(),
                r.final_v.to_string(),
            ])
            .map_err(csv_err)?;
        }
        finish(w)
    }
}

fn csv_err(e: csv::Error) -> Error {
    Error::Io(e.to_string())
}

fn finish(w: csv::Writer<Vec<u8>>) -> Result<String> {
    let bytes = w.into_inner().map_err(|e| Error::Io(e.to_string()))?;
    Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
}

fn median(sorted: &[f64]) -> Option<f64> {
    match sorted.len() {
        0 => None,
        n if n % 2 == 1 => Some(sorted[n / 2]),
        n => Some(0.5 * (sorted[n / 2 - 1] + sorted[n / 2])),
    }
}

/// Runs `runs` independent copies of `template`, run `i` seeded from
/// `(master_seed, i)`. Event recording is switched off.
pub fn run_batch(template: &SimConfig, runs: usize, master_seed: u64) -> Result<BatchResult> {
    if runs == 0 {
        return Err(Error::InvalidParameter("runs must be at least 1".into()));
    }
    template.validate()?;
    let records = (0..runs as u64)
        .into_par_iter()
        .map(|i| {
            let mut cfg = template.clone();
            cfg.seed = rng::derive_seed(master_seed, &[i]);
            cfg.record = Record::Off;
            let arc = simulate(&cfg)?;
            Ok(RunRecord {
                run_index: i,
                seed: cfg.seed,
                sync_time: arc.sync_time,
                jumps: arc.jumps,
                final_v: arc.final_v(),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let mut times: Vec<f64> = records.iter().filter_map(|r| r.sync_time).collect();
    times.sort_by(f64::total_cmp);
    Ok(BatchResult {
        runs,
        success_count: times.len(),
        mean: (!times.is_empty()).then(|| times.iter().sum::<f64>() / times.len() as f64),
        median: median(&times),
        records,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TailPoint {
    pub n: usize,
    pub threshold: f64,
    /// Fraction of runs whose sync time exceeds `threshold`.
    pub tail: f64,
}

/// `P(T* > n * unit)` for `n = 1..=ceil(max / unit)`. Runs that never
/// synchronized (`None`) count as exceeding every threshold.
pub fn empirical_tail(times: &[Option<f64>], unit: f64) -> Result<Vec<TailPoint>> {
    if times.is_empty() {
        return Err(Error::Empty("sync-time list"));
    }
    if !(unit > 0.0) {
        return Err(Error::InvalidParameter("bin unit must be positive".into()));
    }
    let total = times.len() as f64;
    let mut finite: Vec<f64> = times.iter().flatten().copied().collect();
    finite.sort_by(f64::total_cmp);
    let max = finite.last().copied().unwrap_or(0.0);
    let bins = ((max / unit).ceil() as usize).max(1);
    Ok((1..=bins)
        .map(|n| {
            let threshold = n as f64 * unit;
            let below = finite.partition_point(|&t| t <= threshold);
            TailPoint {
                n,
                threshold,
                tail: 1.0 - below as f64 / total,
            }
        })
        .collect())
}

/// Columns `n,threshold_time,empirical_tail,tail_bound`. The bound
/// column is empty when no bound applies.
pub fn tail_csv(points: &[TailPoint], bound: Option<&BoundReport>) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["n", "threshold_time", "empirical_tail", "theorem3_bound"])
        .map_err(csv_err)?;
    for p in points {
        w.write_record([
            p.n.to_string(),
            p.threshold.to_string(),
            p.tail.to_string(),
            bound.map(|b| b.tail_at(p.threshold).to_string()).unwrap_or_default(),
        ])
        .map_err(csv_err)?;
    }
    finish(w)
}

/// Update rule parameterized independently of the network size.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum RuleSpec {
    /// Binary rule with every threshold equal to `r`.
    Binary { r: f64 },
    Linear { m1: f64, m2: f64 },
}

impl RuleSpec {
    pub fn label(&self) -> String {
        match self {
            RuleSpec::Binary { r } if *r == 0.5 => "binary".into(),
            RuleSpec::Binary { r } => format!("binary:{r}"),
            RuleSpec::Linear { m1, m2 } => format!("linear:{m1}:{m2}"),
        }
    }

    pub fn instantiate(&self, n: usize) -> UpdateRule {
        match *self {
            RuleSpec::Binary { r } => UpdateRule::binary(vec![r; n]),
            RuleSpec::Linear { m1, m2 } => UpdateRule::PiecewiseLinear { m1, m2 },
        }
    }

    /// Slope `m` for both branches; `m = 0` is the binary rule with `r = 0.5`.
    pub fn slope(m: f64) -> Self {
        if m == 0.0 {
            RuleSpec::Binary { r: 0.5 }
        } else {
            RuleSpec::Linear { m1: m, m2: m }
        }
    }
}

/// Shared settings for comparison campaigns.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CampaignSettings {
    pub period: f64,
    pub p: f64,
    pub eps: f64,
    pub max_time: f64,
    pub max_jumps: u64,
    pub runs: usize,
    pub master_seed: u64,
}

impl Default for CampaignSettings {
    fn default() -> Self {
        CampaignSettings {
            period: 1.0,
            p: 0.5,
            eps: 0.05,
            max_time: 500.0,
            max_jumps: 1_000_000,
            runs: 50,
            master_seed: 0,
        }
    }
}

impl CampaignSettings {
    /// Seed for run `run` of the `(family, n)` cell, shared by all rules.
    pub fn cell_seed(&self, family: &GraphKind, n: usize, run: u64) -> u64 {
        rng::derive_seed(self.master_seed, &[rng::fnv1a(&family.label()), n as u64, run])
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CellMean {
    /// Mean sync time with runs that never met the criterion counted at
    /// `max_time`.
    pub mean: f64,
    pub runs: usize,
    pub censored: usize,
}

fn cell_mean(family: GraphKind, n: usize, rule: RuleSpec, s: &CampaignSettings) -> Result<CellMean> {
    let graph = generate(family, n)?;
    if !graph.is_rooted() {
        return Err(Error::NotRooted);
    }
    let times = (0..s.runs as u64)
        .into_par_iter()
        .map(|run| {
            let cfg = SimConfig {
                graph: graph.clone(),
                period: s.period,
                rule: rule.instantiate(n),
                trigger: TriggerModel::vertex(s.p),
                initial: InitialPhases::Uniform,
                seed: s.cell_seed(&family, n, run),
                stop: StopConditions {
                    sync_eps: s.eps,
                    max_time: s.max_time,
                    max_jumps: s.max_jumps,
                    stop_on_sync: true,
                },
                order: Default::default(),
                record: Record::Off,
            };
            simulate(&cfg).map(|arc| arc.sync_time)
        })
        .collect::<Result<Vec<_>>>()?;
    let censored = times.iter().filter(|t| t.is_none()).count();
    let total: f64 = times.iter().map(|t| t.unwrap_or(s.max_time)).sum();
    Ok(CellMean {
        mean: total / times.len() as f64,
        runs: times.len(),
        censored,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CompareRow {
    pub family: String,
    pub n: usize,
    pub rule: String,
    pub mean_sync_time: f64,
    pub runs: usize,
    pub censored: usize,
    pub eps: f64,
}

/// Mean sync time per `(family, n, rule)`, rows ordered by family, then
/// `n`, then rule.
pub fn compare(
    rules: &[RuleSpec],
    families: &[GraphKind],
    n_grid: &[usize],
    settings: &CampaignSettings,
) -> Result<Vec<CompareRow>> {
    if settings.runs == 0 {
        return Err(Error::InvalidParameter("runs must be at least 1".into()));
    }
    for rule in rules {
        rule.instantiate(2).validate(2)?;
    }
    let mut rows = Vec::new();
    for family in families {
        for &n in n_grid {
            for rule in rules {
                let cell = cell_mean(*family, n, *rule, settings)?;
                rows.push(CompareRow {
                    family: family.label(),
                    n,
                    rule: rule.label(),
                    mean_sync_time: cell.mean,
                    runs: cell.runs,
                    censored: cell.censored,
                    eps: settings.eps,
                });
            }
        }
    }
    Ok(rows)
}

/// Columns `family,n,rule,mean_sync_time,runs,eps`.
pub fn compare_csv(rows: &[CompareRow]) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["family", "n", "rule", "mean_sync_time", "runs", "eps"])
        .map_err(csv_err)?;
    for r in rows {
        w.write_record([
            r.family.clone(),
            r.n.to_string(),
            r.rule.clone(),
            r.mean_sync_time.to_string(),
            r.runs.to_string(),
            r.eps.to_string(),
        ])
        .map_err(csv_err)?;
    }
    finish(w)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepRow {
    pub family: String,
    pub n: usize,
    pub m: f64,
    pub mean_sync_time: f64,
    pub runs: usize,
    pub censored: usize,
    pub eps: f64,
}

/// Mean sync time per `(family, m)` with `m1 = m2 = m`.
pub fn slope_sweep(
    m_grid: &[f64],
    families: &[GraphKind],
    n: usize,
    settings: &CampaignSettings,
) -> Result<Vec<SweepRow>> {
    if let Some(m) = m_grid.iter().find(|m| !(**m >= 0.0 && **m <= 0.5)) {
        return Err(Error::InvalidParameter(format!("slope {m} outside [0,0.5]")));
    }
    let mut rows = Vec::new();
    for family in families {
        for &m in m_grid {
            let cell = cell_mean(*family, n, RuleSpec::slope(m), settings)?;
            rows.push(SweepRow {
                family: family.label(),
                n,
                m,
                mean_sync_time: cell.mean,
                runs: cell.runs,
                censored: cell.censored,
                eps: settings.eps,
            });
        }
    }
    Ok(rows)
}

/// Columns `family,n,m,mean_sync_time,runs,eps`.
pub fn sweep_csv(rows: &[SweepRow]) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["family", "n", "m", "mean_sync_time", "runs", "eps"])
        .map_err(csv_err)?;
    for r in rows {
        w.write_record([
            r.family.clone(),
            r.n.to_string(),
            r.m.to_string(),
            r.mean_sync_time.to_string(),
            r.runs.to_string(),
            r.eps.to_string(),
        ])
        .map_err(csv_err)?;
    }
    finish(w)
}
