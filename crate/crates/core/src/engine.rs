//! Event-driven hybrid simulation of a pulse-coupled oscillator network.
//!
//! Phases flow at rate `1/T` on `[0, 1]`. When an agent reaches 1 it resets
//! to 0 and, depending on the trigger model, pulses some or all of its
//! out-neighbors, which then update their phase with the configured rule.
//! Exactly one agent fires per jump; agents that sit at 1 simultaneously
//! fire in consecutive jumps at the same continuous time.

use std::collections::VecDeque;

use rand::distributions::Open01;
use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::analysis;
use crate::error::{Error, Result};
use crate::feasible::{self, GraphSequence, TriggerMask};
use crate::graph::Digraph;
use crate::rng::{self, Stream};

/// Phases within this distance of 1 are snapped to exactly 1 during flows.
pub const FIRE_TOLERANCE: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct PhaseVector(pub Vec<f64>);

impl PhaseVector {
    pub fn new(tau: Vec<f64>) -> Result<Self> {
        if let Some(x) = tau.iter().find(|x| !(0.0..=1.0).contains(*x)) {
            return Err(Error::InvalidParameter(format!("phase {x} outside [0,1]")));
        }
        Ok(PhaseVector(tau))
    }

    pub fn constant(n: usize, mu: f64) -> Self {
        PhaseVector(vec![mu; n])
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn max(&self) -> f64 {
        self.0.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }
}

/// Value chosen when a receiver's phase equals its threshold exactly.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TiePolicy {
    ToZero,
    #[default]
    ToOne,
    Random,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum UpdateRule {
    /// Reset to 0 below the threshold, to 1 above it.
    Binary {
        r: Vec<f64>,
        #[serde(default)]
        tie: TiePolicy,
    },
    /// `m1 * x` on `[0, 0.5]`, `m2 * x + 1 - m2` on `(0.5, 1]`.
    PiecewiseLinear { m1: f64, m2: f64 },
}

impl UpdateRule {
    pub fn binary(r: Vec<f64>) -> Self {
        UpdateRule::Binary {
            r,
            tie: TiePolicy::default(),
        }
    }

    pub fn validate(&self, n: usize) -> Result<()> {
        match self {
            UpdateRule::Binary { r, .. } => {
                if r.len() != n {
                    return Err(Error::InvalidParameter(format!(
                        "expected {n} thresholds, got {}",
                        r.len()
                    )));
                }
                feasible::check_thresholds(r).map(|_| ())
            }
            UpdateRule::PiecewiseLinear { m1, m2 } => {
                for (name, m) in [("m1", m1), ("m2", m2)] {
                    if !(*m > 0.0 && *m <= 0.5) {
                        return Err(Error::InvalidParameter(format!(
                            "slope {name}={m} outside (0,0.5]"
                        )));
                    }
                }
                Ok(())
            }
        }
    }

    /// Smallest reset-to-refire interval as a fraction of the period.
    fn refire_fraction(&self) -> f64 {
        match self {
            UpdateRule::Binary { r, .. } => r.iter().copied().fold(1.0, f64::min),
            UpdateRule::PiecewiseLinear { .. } => 0.5,
        }
    }

    /// Upper bound on jumps in any period of length `T` for `n` agents.
    pub fn jump_bound(&self, n: usize) -> usize {
        n * ((1.0 / self.refire_fraction()).floor() as usize + 1)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum TriggerModel {
    /// Consume one mask of the sequence per jump.
    Deterministic { seq: GraphSequence },
    /// One Bernoulli draw per out-active vertex per jump; `probs` holds
    /// either a single shared probability or one per vertex `1..=n`.
    VertexBernoulli { probs: Vec<f64> },
    /// One Bernoulli draw per out-edge of the firer.
    EdgeBernoulli { p: f64 },
}

impl TriggerModel {
    pub fn vertex(p: f64) -> Self {
        TriggerModel::VertexBernoulli { probs: vec![p] }
    }

    pub fn validate(&self, g: &Digraph) -> Result<()> {
        let open = |p: f64| {
            if p > 0.0 && p < 1.0 {
                Ok(())
            } else {
                Err(Error::InvalidParameter(format!(
                    "probability {p} outside (0,1)"
                )))
            }
        };
        match self {
            TriggerModel::Deterministic { seq } => {
                let n_star = feasible::active_vertices(g).len();
                match seq.mask_len() {
                    Some(len) if len != n_star => Err(Error::MaskLength {
                        expected: n_star,
                        got: len,
                    }),
                    _ => Ok(()),
                }
            }
            TriggerModel::VertexBernoulli { probs } => {
                if probs.len() != 1 && probs.len() != g.n() {
                    return Err(Error::InvalidParameter(format!(
                        "expected 1 or {} probabilities, got {}",
                        g.n(),
                        probs.len()
                    )));
                }
                probs.iter().try_for_each(|&p| open(p))
            }
            TriggerModel::EdgeBernoulli { p } => open(*p),
        }
    }

    /// Per-bit probabilities over the out-active vertices.
    fn active_probs(&self, g: &Digraph) -> Vec<f64> {
        match self {
            TriggerModel::VertexBernoulli { probs } if probs.len() > 1 => feasible::active_vertices(g)
                .into_iter()
                .map(|v| probs[v - 1])
                .collect(),
            TriggerModel::VertexBernoulli { probs } => probs.clone(),
            _ => Vec::new(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind", content = "tau")]
pub enum InitialPhases {
    Explicit(PhaseVector),
    /// I.i.d. uniform on (0,1), drawn first from the run's stream.
    Uniform,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FireOrder {
    #[default]
    Ascending,
    Random,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Record {
    /// Keep only the summary (sync time, jump count, final phases).
    Off,
    #[default]
    Full,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StopConditions {
    /// `0` means exact membership in the synchronization set.
    pub sync_eps: f64,
    pub max_time: f64,
    pub max_jumps: u64,
    /// When false the run continues past synchronization.
    #[serde(default = "yes")]
    pub stop_on_sync: bool,
}

fn yes() -> bool {
    true
}

impl Default for StopConditions {
    fn default() -> Self {
        StopConditions {
            sync_eps: 0.0,
            max_time: 500.0,
            max_jumps: 1_000_000,
            stop_on_sync: true,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimConfig {
    pub graph: Digraph,
    pub period: f64,
    pub rule: UpdateRule,
    pub trigger: TriggerModel,
    pub initial: InitialPhases,
    pub seed: u64,
    pub stop: StopConditions,
    #[serde(default)]
    pub order: FireOrder,
    #[serde(default)]
    pub record: Record,
}

impl SimConfig {
    pub fn new(graph: Digraph, rule: UpdateRule, trigger: TriggerModel) -> Self {
        SimConfig {
            graph,
            period: 1.0,
            rule,
            trigger,
            initial: InitialPhases::Uniform,
            seed: 0,
            stop: StopConditions::default(),
            order: FireOrder::default(),
            record: Record::default(),
        }
    }

    pub fn n(&self) -> usize {
        self.graph.n()
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.period > 0.0 && self.period.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "period {} must be positive",
                self.period
            )));
        }
        self.rule.validate(self.n())?;
        self.trigger.validate(&self.graph)?;
        if let InitialPhases::Explicit(tau) = &self.initial {
            if tau.len() != self.n() {
                return Err(Error::InvalidParameter(format!(
                    "expected {} initial phases, got {}",
                    self.n(),
                    tau.len()
                )));
            }
            PhaseVector::new(tau.0.clone())?;
        }
        let s = &self.stop;
        if !(s.sync_eps >= 0.0) {
            return Err(Error::InvalidParameter("sync_eps must be >= 0".into()));
        }
        if !(s.max_time > 0.0) || s.max_jumps == 0 {
            return Err(Error::InvalidParameter("stop bounds must be positive".into()));
        }
        Ok(())
    }
}

/// Which edges carried a pulse at a jump.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Activation {
    /// Full feasible-subgraph mask drawn or consumed for this jump.
    Mask(TriggerMask),
    /// Receivers whose edge from the firer fired (edge-triggering).
    Edges(Vec<usize>),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct JumpEvent {
    pub t: f64,
    /// Jump counter after this jump; the `k`-th jump uses the `k`-th mask.
    pub k: u64,
    pub firer: usize,
    pub activation: Activation,
    pub tau_before: Vec<f64>,
    pub tau_after: Vec<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Termination {
    Synchronized,
    MaxTime,
    MaxJumps,
}

/// A recorded solution on its hybrid time domain.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HybridArc {
    pub period: f64,
    pub initial: Vec<f64>,
    pub events: Vec<JumpEvent>,
    pub final_tau: Vec<f64>,
    pub final_time: f64,
    pub jumps: u64,
    pub sync_eps: f64,
    /// First hybrid time at which the synchronization criterion held.
    pub sync_time: Option<f64>,
    pub sync_jump: Option<u64>,
    pub terminated_by: Termination,
}

impl HybridArc {
    pub fn final_v(&self) -> f64 {
        analysis::lyapunov_v(&self.final_tau)
    }

    /// `(t, k, tau)` at every recorded hybrid time where the state changes:
    /// the origin, then each post-jump state.
    pub fn states(&self) -> impl Iterator<Item = (f64, u64, &[f64])> {
        std::iter::once((0.0, 0, self.initial.as_slice()))
            .chain(self.events.iter().map(|e| (e.t, e.k, e.tau_after.as_slice())))
    }

    /// Masks used by the recorded jumps, when the model records masks.
    pub fn masks(&self) -> Vec<TriggerMask> {
        self.events
            .iter()
            .filter_map(|e| match &e.activation {
                Activation::Mask(m) => Some(m.clone()),
                Activation::Edges(_) => None,
            })
            .collect()
    }
}

/// Flow time until the leading agent reaches 1.
pub fn time_to_next_fire(tau: &PhaseVector, period: f64) -> Result<f64> {
    if let Some(i) = tau.0.iter().position(|&x| x >= 1.0) {
        return Err(Error::PendingFirer(i + 1));
    }
    Ok(period * (1.0 - tau.max()))
}

fn advance(tau: &mut [f64], delta: f64) {
    for x in tau.iter_mut() {
        *x += delta;
        if *x >= 1.0 - FIRE_TOLERANCE {
            *x = 1.0;
        }
    }
}

/// Flows every phase forward by `dt / T`.
pub fn flow(tau: &PhaseVector, dt: f64, period: f64) -> Result<PhaseVector> {
    if dt == 0.0 {
        return Ok(tau.clone());
    }
    let limit = time_to_next_fire(tau, period)?;
    if dt < 0.0 || dt > limit * (1.0 + 1e-12) + FIRE_TOLERANCE * period {
        return Err(Error::FlowOvershoot { dt, limit });
    }
    let mut out = tau.0.clone();
    advance(&mut out, dt / period);
    Ok(PhaseVector(out))
}

/// New phase of receiver `j` (1-based) after a pulse.
pub fn phase_update<R: Rng + ?Sized>(tau_j: f64, j: usize, rule: &UpdateRule, rng: &mut R) -> f64 {
    match rule {
        UpdateRule::Binary { r, tie } => {
            let rj = r[j - 1];
            if tau_j < rj {
                0.0
            } else if tau_j > rj {
                1.0
            } else {
                match tie {
                    TiePolicy::ToZero => 0.0,
                    TiePolicy::ToOne => 1.0,
                    TiePolicy::Random => {
                        if rng.gen::<bool>() {
                            1.0
                        } else {
                            0.0
                        }
                    }
                }
            }
        }
        UpdateRule::PiecewiseLinear { m1, m2 } => {
            if tau_j <= 0.5 {
                m1 * tau_j
            } else {
                m2 * tau_j + 1.0 - m2
            }
        }
    }
}

/// Resets `firer` to 0 and updates every receiver in `pulsed`; all other
/// agents keep their phase.
pub fn apply_jump<R: Rng + ?Sized>(
    tau: &PhaseVector,
    firer: usize,
    pulsed: &[usize],
    rule: &UpdateRule,
    rng: &mut R,
) -> Result<PhaseVector> {
    if tau.0[firer - 1] != 1.0 {
        return Err(Error::NotFiring(firer));
    }
    let mut out = tau.0.clone();
    out[firer - 1] = 0.0;
    for &j in pulsed {
        out[j - 1] = phase_update(tau.0[j - 1], j, rule, rng);
    }
    Ok(PhaseVector(out))
}

/// Stateful runner for one configuration.
pub struct Simulator<'a> {
    cfg: &'a SimConfig,
    tau: Vec<f64>,
    t: f64,
    k: u64,
    rng: Stream,
    active_idx: Vec<Option<usize>>,
    n_star: usize,
    active_probs: Vec<f64>,
    recent: VecDeque<f64>,
    zeno_bound: usize,
}

impl<'a> Simulator<'a> {
    pub fn new(cfg: &'a SimConfig) -> Result<Self> {
        cfg.validate()?;
        let mut rng = rng::stream(cfg.seed);
        let tau = match &cfg.initial {
            InitialPhases::Explicit(tau) => tau.0.clone(),
            InitialPhases::Uniform => (0..cfg.n()).map(|_| rng.sample(Open01)).collect(),
        };
        let active_idx = feasible::active_index(&cfg.graph);
        let n_star = active_idx.iter().flatten().count();
        Ok(Simulator {
            cfg,
            tau,
            t: 0.0,
            k: 0,
            rng,
            active_idx,
            n_star,
            active_probs: cfg.trigger.active_probs(&cfg.graph),
            recent: VecDeque::new(),
            zeno_bound: cfg.rule.jump_bound(cfg.n()),
        })
    }

    pub fn tau(&self) -> &[f64] {
        &self.tau
    }

    pub fn time(&self) -> f64 {
        self.t
    }

    pub fn jumps(&self) -> u64 {
        self.k
    }

    fn pending(&self) -> Option<usize> {
        let mut at_one = self.tau.iter().enumerate().filter(|(_, &x)| x >= 1.0).map(|(i, _)| i + 1);
        at_one.next()
    }

    /// Continuous time until the next jump (0 when an agent is at 1).
    pub fn time_to_next_jump(&self) -> f64 {
        if self.pending().is_some() {
            0.0
        } else {
            self.cfg.period * (1.0 - self.tau.iter().copied().fold(0.0, f64::max))
        }
    }

    /// Flows for `dt` without reaching a firing. Used to stop at a horizon.
    pub fn flow_for(&mut self, dt: f64) {
        advance(&mut self.tau, dt / self.cfg.period);
        self.t += dt;
    }

    fn choose_firer(&mut self) -> usize {
        match self.cfg.order {
            FireOrder::Ascending => self.pending().expect("a firer is pending"),
            FireOrder::Random => {
                let at_one: Vec<usize> = self
                    .tau
                    .iter()
                    .enumerate()
                    .filter(|(_, &x)| x >= 1.0)
                    .map(|(i, _)| i + 1)
                    .collect();
                *at_one.choose(&mut self.rng).expect("a firer is pending")
            }
        }
    }

    /// Flows to the next firing instant (if nobody is at 1) and performs
    /// exactly one jump.
    pub fn step(&mut self) -> Result<JumpEvent> {
        if self.pending().is_none() {
            let max = self.tau.iter().copied().fold(0.0, f64::max);
            let delta = 1.0 - max;
            self.t += self.cfg.period * delta;
            advance(&mut self.tau, delta);
        }
        let firer = self.choose_firer();
        let g = &self.cfg.graph;
        let out = g.out_neighbors(firer);
        let (activation, pulsed): (Activation, Vec<usize>) = match &self.cfg.trigger {
            TriggerModel::Deterministic { seq } => {
                let m = seq
                    .get(self.k as usize)
                    .ok_or(Error::SequenceExhausted(self.k))?
                    .clone();
                let sent = self.active_idx[firer - 1].is_some_and(|i| m.get(i));
                (Activation::Mask(m), if sent { out.to_vec() } else { Vec::new() })
            }
            TriggerModel::VertexBernoulli { .. } => {
                let m = feasible::sample_mask(&self.active_probs, self.n_star, &mut self.rng);
                let sent = self.active_idx[firer - 1].is_some_and(|i| m.get(i));
                (Activation::Mask(m), if sent { out.to_vec() } else { Vec::new() })
            }
            TriggerModel::EdgeBernoulli { p } => {
                let pulsed: Vec<usize> = out
                    .iter()
                    .copied()
                    .filter(|_| self.rng.gen::<f64>() < *p)
                    .collect();
                (Activation::Edges(pulsed.clone()), pulsed)
            }
        };
        let before = PhaseVector(std::mem::take(&mut self.tau));
        let after = apply_jump(&before, firer, &pulsed, &self.cfg.rule, &mut self.rng)?;
        self.tau = after.0;
        self.k += 1;

        let window = self.cfg.period * (1.0 - 1e-9);
        self.recent.push_back(self.t);
        while self.recent.front().is_some_and(|&s| s < self.t - window) {
            self.recent.pop_front();
        }
        if self.recent.len() > self.zeno_bound {
            return Err(Error::ZenoGuard {
                count: self.recent.len(),
                bound: self.zeno_bound,
                t: self.t,
            });
        }

        Ok(JumpEvent {
            t: self.t,
            k: self.k,
            firer,
            activation,
            tau_before: before.0,
            tau_after: self.tau.clone(),
        })
    }

    fn is_synced(&self) -> bool {
        analysis::is_sync(&self.tau, self.cfg.stop.sync_eps)
    }

    /// Steps until a stop condition holds.
    pub fn run(mut self) -> Result<HybridArc> {
        let stop = self.cfg.stop.clone();
        let initial = self.tau.clone();
        let mut events = Vec::new();
        let (mut sync_time, mut sync_jump) = (None, None);
        if self.is_synced() {
            sync_time = Some(0.0);
            sync_jump = Some(0);
        }
        let terminated_by = loop {
            if sync_time.is_some() && stop.stop_on_sync {
                break Termination::Synchronized;
            }
            if self.k >= stop.max_jumps {
                break Termination::MaxJumps;
            }
            let wait = self.time_to_next_jump();
            if self.t + wait > stop.max_time {
                let rest = (stop.max_time - self.t).max(0.0);
                self.flow_for(rest);
                self.t = stop.max_time;
                break Termination::MaxTime;
            }
            let ev = self.step()?;
            if sync_time.is_none() && self.is_synced() {
                sync_time = Some(self.t);
                sync_jump = Some(self.k);
            }
            if self.cfg.record == Record::Full {
                events.push(ev);
            }
        };
        Ok(HybridArc {
            period: self.cfg.period,
            initial,
            events,
            final_tau: self.tau,
            final_time: self.t,
            jumps: self.k,
            sync_eps: stop.sync_eps,
            sync_time,
            sync_jump,
            terminated_by,
        })
    }
}

/// Runs `cfg` to termination.
pub fn simulate(cfg: &SimConfig) -> Result<HybridArc> {
    Simulator::new(cfg)?.run()
}

#[derive(Debug, Serialize)]
struct ExportEvent<'a> {
    t: f64,
    k: u64,
    firer: usize,
    mask: &'a Activation,
    tau_after: &'a [f64],
}

#[derive(Debug, Serialize)]
struct ArcExport<'a> {
    config_echo: &'a serde_json::Value,
    rng: &'static str,
    initial: &'a [f64],
    events: Vec<ExportEvent<'a>>,
    sync_time: Option<f64>,
    jumps: u64,
    final_time: f64,
    final_tau: &'a [f64],
    final_v: f64,
    terminated_by: Termination,
}

impl HybridArc {
    /// JSON export with the caller's configuration echoed verbatim.
    pub fn to_json(&self, config_echo: &serde_json::Value) -> serde_json::Value {
        let export = ArcExport {
            config_echo,
            rng: rng::GENERATOR,
            initial: &self.initial,
            events: self
                .events
                .iter()
                .map(|e| ExportEvent {
                    t: e.t,
                    k: e.k,
                    firer: e.firer,
                    mask: &e.activation,
                    tau_after: &e.tau_after,
                })
                .collect(),
            sync_time: self.sync_time,
            jumps: self.jumps,
            final_time: self.final_time,
            final_tau: &self.final_tau,
            final_v: self.final_v(),
            terminated_by: self.terminated_by,
        };
        serde_json::to_value(export).expect("arc serializes")
    }

    /// Compact event table with columns `t,k,firer,V`.
    pub fn events_csv(&self) -> String {
        let mut s = String::from("t,k,firer,V\n");
        for e in &self.events {
            s.push_str(&format!(
                "{},{},{},{}\n",
                e.t,
                e.k,
                e.firer,
                analysis::lyapunov_v(&e.tau_after)
            ));
        }
        s
    }
}
