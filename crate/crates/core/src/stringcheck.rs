//! Deterministic replay of a synchronization string.
//!
//! The trigger sequence is `prefix, silent masks until the root fires,
//! zeta, all-ones forever`, with the root's firing consuming the first mask
//! of `zeta`. Layer-by-layer progress is then read off the recorded arc.

use serde::Serialize;

use crate::analysis::{is_sync, lyapunov_v, partial_depth};
use crate::engine::{
    simulate, HybridArc, InitialPhases, PhaseVector, Record, SimConfig, StopConditions, TiePolicy,
    TriggerModel, UpdateRule,
};
use crate::error::Result;
use crate::feasible::{self, GraphSequence, TriggerMask};
use crate::graph::Digraph;

#[derive(Debug, Clone)]
pub struct StringCheckSpec {
    pub graph: Digraph,
    pub root: usize,
    pub r: Vec<f64>,
    pub tie: TiePolicy,
    pub period: f64,
    /// `None` draws i.i.d. uniform phases from `seed`.
    pub initial: Option<Vec<f64>>,
    pub prefix: Vec<TriggerMask>,
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LayerMilestone {
    pub q: usize,
    /// First jump of the layer's block within the string.
    pub k_start: u64,
    pub t_start: f64,
    /// First jump at which agents up to depth `q + 1` were synchronized.
    pub reached_at: Option<u64>,
    /// Partial depth after the last jump of the block.
    pub depth_at_end: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StringCheckReport {
    pub root: usize,
    pub q_star: usize,
    pub ell_star: usize,
    pub l_star: usize,
    /// Jump at which the root fires and the string starts.
    pub k_root: u64,
    pub t_root: f64,
    pub layers: Vec<LayerMilestone>,
    /// Partial depth never decreased from the root's firing onwards.
    pub depth_monotone: bool,
    pub final_v: f64,
    pub synced: bool,
    pub sync_time: Option<f64>,
    /// `t_ref + (1 + q* ell*) T`, with `t_ref` the end of the prefix.
    pub time_bound: f64,
    pub within_bound: bool,
    pub passed: bool,
}

fn deterministic_config(spec: &StringCheckSpec, seq: GraphSequence, max_jumps: u64) -> SimConfig {
    SimConfig {
        graph: spec.graph.clone(),
        period: spec.period,
        rule: UpdateRule::Binary {
            r: spec.r.clone(),
            tie: spec.tie,
        },
        trigger: TriggerModel::Deterministic { seq },
        initial: match &spec.initial {
            Some(tau) => InitialPhases::Explicit(PhaseVector(tau.clone())),
            None => InitialPhases::Uniform,
        },
        seed: spec.seed,
        stop: StopConditions {
            sync_eps: 0.0,
            max_time: f64::MAX,
            max_jumps,
            stop_on_sync: false,
        },
        order: Default::default(),
        record: Record::Full,
    }
}

pub fn string_check(spec: &StringCheckSpec) -> Result<(StringCheckReport, HybridArc)> {
    let ss = feasible::sync_string(&spec.graph, spec.root, &spec.r)?;
    let n_star = feasible::active_vertices(&spec.graph).len();
    let silent = TriggerMask::zeros(n_star);
    let pre = spec.prefix.len() as u64;

    // Locate the root's first firing once the prefix is used up.
    let mut search = spec.prefix.clone();
    search.push(silent.clone());
    let repeat_from = search.len() - 1;
    let probe_seq = GraphSequence::with_tail(search, true, repeat_from)?;
    let horizon = pre + spec.r.len() as u64 * ss.ell_star as u64 + 1;
    let probe = simulate(&deterministic_config(spec, probe_seq, horizon))?;
    let k_root = probe
        .events
        .iter()
        .find(|e| e.firer == spec.root && e.k > pre)
        .map(|e| e.k)
        .expect("root fires within one period of silent masks");
    let t_ref = if pre == 0 {
        0.0
    } else {
        probe.events[pre as usize - 1].t
    };

    let mut masks = spec.prefix.clone();
    masks.extend(std::iter::repeat(silent).take((k_root - 1 - pre) as usize));
    masks.extend(ss.sequence.masks.iter().cloned());
    masks.push(TriggerMask::ones(n_star));
    let tail = masks.len() - 1;
    let seq = GraphSequence::with_tail(masks, true, tail)?;
    let last = k_root - 1 + ss.l_star as u64;
    let arc = simulate(&deterministic_config(spec, seq, last.max(k_root)))?;

    let part = spec.graph.depth_partition(spec.root)?;
    let ell = ss.ell_star as u64;
    let event = |k: u64| &arc.events[(k - 1) as usize];
    let t_root = event(k_root).t;

    let mut layers = Vec::with_capacity(ss.q_star);
    for q in 0..ss.q_star {
        let k_start = k_root + q as u64 * ell;
        let k_end = k_start + ell - 1;
        let reached_at = arc
            .events
            .iter()
            .skip((k_root - 1) as usize)
            .find(|e| partial_depth(&e.tau_after, &part, 0.0) > q)
            .map(|e| e.k);
        layers.push(LayerMilestone {
            q,
            k_start,
            t_start: event(k_start).t,
            reached_at,
            depth_at_end: partial_depth(&event(k_end).tau_after, &part, 0.0),
        });
    }

    let depths: Vec<usize> = arc
        .events
        .iter()
        .skip((k_root - 1) as usize)
        .map(|e| partial_depth(&e.tau_after, &part, 0.0))
        .collect();
    let depth_monotone = depths.windows(2).all(|w| w[0] <= w[1]);

    let sync_time = arc
        .states()
        .find(|(_, _, tau)| is_sync(tau, 0.0))
        .map(|(t, _, _)| t);
    let time_bound = t_ref + (1 + ss.l_star) as f64 * spec.period;
    let within_bound = sync_time.is_some_and(|t| t <= time_bound);
    let synced = is_sync(&arc.final_tau, 0.0);
    let layers_ok = layers
        .iter()
        .all(|l| l.reached_at.is_some_and(|k| k < l.k_start + ell) && l.depth_at_end > l.q);

    let report = StringCheckReport {
        root: spec.root,
        q_star: ss.q_star,
        ell_star: ss.ell_star,
        l_star: ss.l_star,
        k_root,
        t_root,
        layers,
        depth_monotone,
        final_v: lyapunov_v(&arc.final_tau),
        synced,
        sync_time,
        time_bound,
        within_bound,
        passed: synced && within_bound && layers_ok && depth_monotone,
    };
    Ok((report, arc))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{generate, GraphKind};

    fn layered_spec(seed: u64) -> StringCheckSpec {
        StringCheckSpec {
            graph: Digraph::new(4, [(1, 2), (2, 3), (3, 2), (3, 4)]).unwrap().0,
            root: 1,
            r: vec![0.125; 4],
            tie: TiePolicy::ToOne,
            period: 1.0,
            initial: None,
            prefix: Vec::new(),
            seed,
        }
    }

    #[test]
    fn layered_four_string_synchronizes() {
        for seed in 0..20 {
            let (rep, arc) = string_check(&layered_spec(seed)).unwrap();
            assert_eq!((rep.ell_star, rep.l_star, rep.q_star), (36, 108, 3));
            assert!(rep.passed, "{rep:?}");
            assert_eq!(rep.final_v, 0.0);
            assert!(rep.t_root <= 1.0);
            assert_eq!(arc.events[(rep.k_root - 1) as usize].firer, 1);
            let zeta = feasible::sync_string(&layered_spec(0).graph, 1, &[0.125; 4]).unwrap().sequence.masks;
            assert_eq!(feasible::find_string(&arc.masks(), &zeta), Some(rep.k_root as usize));
        }
    }

    #[test]
    fn prefix_is_consumed_first() {
        let mut spec = layered_spec(5);
        spec.prefix = vec!["111".parse().unwrap(); 7];
        let (rep, arc) = string_check(&spec).unwrap();
        assert!(rep.k_root > 7);
        assert!(rep.passed, "{rep:?}");
        assert!(arc.masks()[..7].iter().all(|m| m.to_string() == "111"));
    }

    #[test]
    fn single_vertex_is_trivial() {
        let spec = StringCheckSpec {
            graph: Digraph::new(1, []).unwrap().0,
            root: 1,
            r: vec![0.5],
            tie: TiePolicy::ToOne,
            period: 1.0,
            initial: Some(vec![0.3]),
            prefix: Vec::new(),
            seed: 0,
        };
        let (rep, _) = string_check(&spec).unwrap();
        assert_eq!(rep.l_star, 0);
        assert!(rep.layers.is_empty());
        assert_eq!(rep.sync_time, Some(0.0));
        assert!(rep.passed);
    }

    #[test]
    fn cycle_from_every_root() {
        let g = generate(GraphKind::Cycle, 5).unwrap();
        for root in 1..=5 {
            let spec = StringCheckSpec {
                graph: g.clone(),
                root,
                r: vec![0.3, 0.6, 0.45, 0.2, 0.8],
                tie: TiePolicy::ToOne,
                period: 1.0,
                initial: None,
                prefix: Vec::new(),
                seed: root as u64,
            };
            let (rep, _) = string_check(&spec).unwrap();
            assert_eq!(rep.q_star, 4);
            assert!(rep.passed, "root {root}: {rep:?}");
        }
    }
}
