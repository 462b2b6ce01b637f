//! Lyapunov diagnostics, synchronization-set membership, and the closed-form
//! sync-time bound.

use serde::Serialize;

use crate::engine::HybridArc;
use crate::error::{Error, Result};
use crate::feasible;
use crate::graph::{DepthPartition, Digraph};

/// Tolerance for circle-identified equality of phases.
pub const SYNC_TOLERANCE: f64 = 1e-12;

/// One minus the largest circular gap between consecutive sorted phases,
/// with 0 and 1 identified. Zero iff all agents sit at one circle point.
pub fn lyapunov_v(tau: &[f64]) -> f64 {
    if tau.is_empty() {
        return 0.0;
    }
    let mut pts: Vec<f64> = tau.iter().map(|&x| if x >= 1.0 { 0.0 } else { x }).collect();
    pts.sort_by(f64::total_cmp);
    let wrap = 1.0 - pts[pts.len() - 1] + pts[0];
    let max_gap = pts.windows(2).map(|w| w[1] - w[0]).fold(wrap, f64::max);
    (1.0 - max_gap).max(0.0)
}

fn circle_distance(a: f64, b: f64) -> f64 {
    let d = (a - b).rem_euclid(1.0);
    d.min(1.0 - d)
}

/// `eps = 0`: all phases coincide on the circle (which covers both the
/// all-equal branch and `{0,1}^N`). `eps > 0`: `V(tau) <= eps`.
pub fn is_sync(tau: &[f64], eps: f64) -> bool {
    if eps == 0.0 {
        match tau.first() {
            None => true,
            Some(&x0) => tau.iter().all(|&x| circle_distance(x, x0) <= SYNC_TOLERANCE),
        }
    } else {
        lyapunov_v(tau) <= eps
    }
}

/// Largest `q` such that all agents of depth at most `q` are synchronized.
pub fn partial_depth(tau: &[f64], part: &DepthPartition, eps: f64) -> usize {
    let mut members: Vec<f64> = part.layers[0].iter().map(|&v| tau[v - 1]).collect();
    for q in 1..=part.q_star() {
        members.extend(part.layers[q].iter().map(|&v| tau[v - 1]));
        if !is_sync(&members, eps) {
            return q - 1;
        }
    }
    part.q_star()
}

/// First recorded hybrid time at which the criterion holds. `V` is constant
/// during flows, so only the origin and post-jump states are checked.
///
/// For arcs recorded without events this falls back to the arc's own
/// summary, which is only available for the arc's `sync_eps`.
pub fn sync_time(arc: &HybridArc, eps: f64) -> Option<f64> {
    if (arc.events.len() as u64) < arc.jumps {
        return if eps == arc.sync_eps { arc.sync_time } else { None };
    }
    arc.states().find(|(_, _, tau)| is_sync(tau, eps)).map(|(t, _, _)| t)
}

/// Minimum and maximum number of jumps over windows of length `period`
/// inside the arc. The minimum is taken over left-open windows `(a, a+T]`
/// and the maximum over right-open windows `[a, a+T)`; anchoring `a` at the
/// origin, at event times, and at `final_time - T` is exhaustive.
pub fn jump_window_counts(arc: &HybridArc, period: f64) -> Result<(usize, usize)> {
    if arc.final_time < period {
        return Err(Error::ArcTooShort {
            span: arc.final_time,
            period,
        });
    }
    let times: Vec<f64> = arc.events.iter().map(|e| e.t).collect();
    let last_start = arc.final_time - period;
    let anchors = std::iter::once(0.0)
        .chain(times.iter().copied())
        .chain(std::iter::once(last_start))
        .filter(|&a| a <= last_start);
    let (mut lo, mut hi) = (usize::MAX, 0);
    for a in anchors {
        let end = a + period;
        // (a, a+T]
        let open_left = times.partition_point(|&t| t <= end) - times.partition_point(|&t| t <= a);
        // [a, a+T)
        let open_right = times.partition_point(|&t| t < end) - times.partition_point(|&t| t < a);
        lo = lo.min(open_left);
        hi = hi.max(open_right);
    }
    Ok((lo, hi))
}

/// Constants of the exponential sync-time tail bound.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BoundReport {
    pub ell_star: usize,
    /// `dep * ell_star`: the longest synchronization string over all roots.
    pub l_star: usize,
    pub dep: usize,
    /// `(dep * ell_star + 1) * T`.
    pub t_star: f64,
    /// `ln(1 - rho)`, kept because `1 - rho` underflows for most graphs.
    pub ln_eta: f64,
    /// `1 - exp(ln_eta)`; rounds to exactly 1.0 once `ln_eta < -37`.
    pub rho: f64,
}

impl BoundReport {
    /// `rho^n`, the bound on `P(T* > n * t_star)`.
    pub fn tail(&self, n: u32) -> f64 {
        (f64::from(n) * (-self.ln_eta.exp()).ln_1p()).exp()
    }

    /// Bound on `P(T* > s)` for any `s >= 0`: `rho^floor(s / t_star)`.
    pub fn tail_at(&self, s: f64) -> f64 {
        self.tail((s / self.t_star).floor().max(0.0) as u32)
    }
}

/// `probs` is one shared probability or one per vertex `1..=n`; with
/// per-vertex values the minimum and maximum over out-active vertices are
/// used.
pub fn tail_bound(g: &Digraph, probs: &[f64], r: &[f64], period: f64) -> Result<BoundReport> {
    let n = g.n();
    if r.len() != n {
        return Err(Error::InvalidParameter(format!(
            "expected {n} thresholds, got {}",
            r.len()
        )));
    }
    if !(period > 0.0) {
        return Err(Error::InvalidParameter("period must be positive".into()));
    }
    if let Some(p) = probs.iter().find(|p| !(**p > 0.0 && **p < 1.0)) {
        return Err(Error::InvalidParameter(format!("probability {p} outside (0,1)")));
    }
    let dep = g.depth()?;
    if dep == 0 {
        return Err(Error::InvalidParameter(
            "bound needs at least two vertices".into(),
        ));
    }
    let (p_lo, p_hi) = match probs {
        [p] => (*p, *p),
        _ if probs.len() == n => {
            let active: Vec<f64> = feasible::active_vertices(g)
                .into_iter()
                .map(|v| probs[v - 1])
                .collect();
            (
                active.iter().copied().fold(f64::INFINITY, f64::min),
                active.iter().copied().fold(f64::NEG_INFINITY, f64::max),
            )
        }
        _ => {
            return Err(Error::InvalidParameter(format!(
                "expected 1 or {n} probabilities, got {}",
                probs.len()
            )))
        }
    };
    let ell_star = feasible::ell_star(n, r)?;
    let exponent = (n * ell_star) as f64;
    let ln_eta = exponent * (p_lo.ln() + (dep as f64 - 1.0) * (1.0 - p_hi).ln());
    Ok(BoundReport {
        ell_star,
        l_star: dep * ell_star,
        dep,
        t_star: (dep * ell_star + 1) as f64 * period,
        ln_eta,
        rho: -ln_eta.exp_m1(),
    })
}
