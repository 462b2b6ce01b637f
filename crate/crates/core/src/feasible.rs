//! Feasible subgraphs and their binary encoding.
//!
//! A feasible subgraph keeps, for every vertex, either all of its out-edges
//! or none of them. Ordering the out-active vertices ascending, such a
//! subgraph is exactly a bit string [`TriggerMask`] with one bit per
//! out-active vertex.

use std::fmt;
use std::str::FromStr;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{DepthPartition, Digraph};

/// Largest number of out-active vertices [`enumerate_masks`] accepts.
pub const ENUMERATION_LIMIT: usize = 20;

/// One bit per out-active vertex, in ascending vertex order.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(into = "String", try_from = "String")]
pub struct TriggerMask(Vec<bool>);

impl TriggerMask {
    pub fn new(bits: Vec<bool>) -> Self {
        TriggerMask(bits)
    }

    pub fn zeros(len: usize) -> Self {
        TriggerMask(vec![false; len])
    }

    pub fn ones(len: usize) -> Self {
        TriggerMask(vec![true; len])
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn bits(&self) -> &[bool] {
        &self.0
    }

    pub fn get(&self, idx: usize) -> bool {
        self.0[idx]
    }

    pub fn count_ones(&self) -> usize {
        self.0.iter().filter(|&&b| b).count()
    }
}

impl fmt::Display for TriggerMask {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for &b in &self.0 {
            f.write_str(if b { "1" } else { "0" })?;
        }
        Ok(())
    }
}

impl FromStr for TriggerMask {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        s.chars()
            .map(|c| match c {
                '0' => Ok(false),
                '1' => Ok(true),
                other => Err(Error::InvalidParameter(format!(
                    "mask character {other:?} is not 0 or 1"
                ))),
            })
            .collect::<Result<Vec<_>>>()
            .map(TriggerMask)
    }
}

impl From<TriggerMask> for String {
    fn from(m: TriggerMask) -> Self {
        m.to_string()
    }
}

impl TryFrom<String> for TriggerMask {
    type Error = Error;

    fn try_from(s: String) -> Result<Self> {
        s.parse()
    }
}

/// A finite list of masks. With `repeat`, the list is cycled from
/// `repeat_from` onwards once exhausted, so a prefix followed by an
/// eventually periodic tail can be expressed.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GraphSequence {
    pub masks: Vec<TriggerMask>,
    #[serde(default)]
    pub repeat: bool,
    #[serde(default)]
    pub repeat_from: usize,
}

impl GraphSequence {
    pub fn new(masks: Vec<TriggerMask>, repeat: bool) -> Result<Self> {
        Self::with_tail(masks, repeat, 0)
    }

    pub fn with_tail(masks: Vec<TriggerMask>, repeat: bool, repeat_from: usize) -> Result<Self> {
        if let Some(first) = masks.first() {
            if let Some(bad) = masks.iter().find(|m| m.len() != first.len()) {
                return Err(Error::MaskLength {
                    expected: first.len(),
                    got: bad.len(),
                });
            }
        }
        if repeat && repeat_from >= masks.len() {
            return Err(Error::InvalidParameter(
                "repeating sequence needs a non-empty tail".into(),
            ));
        }
        Ok(GraphSequence {
            masks,
            repeat,
            repeat_from,
        })
    }

    pub fn len(&self) -> usize {
        self.masks.len()
    }

    pub fn is_empty(&self) -> bool {
        self.masks.is_empty()
    }

    pub fn mask_len(&self) -> Option<usize> {
        self.masks.first().map(TriggerMask::len)
    }

    /// The mask used by the jump at 0-based position `idx`.
    pub fn get(&self, idx: usize) -> Option<&TriggerMask> {
        if idx < self.masks.len() {
            return Some(&self.masks[idx]);
        }
        if !self.repeat {
            return None;
        }
        let period = self.masks.len() - self.repeat_from;
        Some(&self.masks[self.repeat_from + (idx - self.masks.len()) % period])
    }

    /// Parses the mask file format: one 0/1 string per line, `#` comments.
    pub fn parse(text: &str, repeat: bool) -> Result<Self> {
        let mut masks = Vec::new();
        for (idx, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let m = line.parse().map_err(|e: Error| Error::Parse {
                line: idx + 1,
                msg: e.to_string(),
            })?;
            masks.push(m);
        }
        Self::new(masks, repeat)
    }

    pub fn to_text(&self) -> String {
        self.masks.iter().map(|m| format!("{m}\n")).collect()
    }
}

/// Vertices with at least one out-neighbor, ascending. Its length is `N*`.
pub fn active_vertices(g: &Digraph) -> Vec<usize> {
    g.vertices().filter(|&v| !g.out_neighbors(v).is_empty()).collect()
}

/// Position of each vertex in the active list, indexed by `vertex - 1`.
pub fn active_index(g: &Digraph) -> Vec<Option<usize>> {
    let mut idx = vec![None; g.n()];
    for (i, v) in active_vertices(g).into_iter().enumerate() {
        idx[v - 1] = Some(i);
    }
    idx
}

fn check_len(g: &Digraph, m: &TriggerMask) -> Result<Vec<usize>> {
    let active = active_vertices(g);
    if m.len() != active.len() {
        return Err(Error::MaskLength {
            expected: active.len(),
            got: m.len(),
        });
    }
    Ok(active)
}

/// The feasible subgraph keeping the out-edges of every vertex whose bit is set.
pub fn subgraph_from_mask(g: &Digraph, m: &TriggerMask) -> Result<Digraph> {
    let active = check_len(g, m)?;
    let edges = active
        .iter()
        .zip(m.bits())
        .filter(|(_, &b)| b)
        .flat_map(|(&i, _)| g.out_neighbors(i).iter().map(move |&j| (i, j)));
    Digraph::new(g.n(), edges).map(|(s, _)| s)
}

/// Inverse of [`subgraph_from_mask`]. Fails if `sub` is not a feasible
/// subgraph of `g`.
pub fn mask_from_subgraph(g: &Digraph, sub: &Digraph) -> Result<TriggerMask> {
    if sub.n() != g.n() {
        return Err(Error::InvalidParameter("vertex sets differ".into()));
    }
    if let Some((u, v)) = sub.edges().find(|&(u, v)| !g.has_edge(u, v)) {
        return Err(Error::InvalidParameter(format!(
            "edge ({u},{v}) is not in the base graph"
        )));
    }
    let bits = active_vertices(g)
        .into_iter()
        .map(|i| {
            let kept = sub.out_neighbors(i).len();
            if kept == 0 {
                Ok(false)
            } else if kept == g.out_neighbors(i).len() {
                Ok(true)
            } else {
                Err(Error::InvalidParameter(format!(
                    "vertex {i} keeps only some of its out-edges"
                )))
            }
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(TriggerMask(bits))
}

fn check_probs(probs: &[f64], len: usize) -> Result<()> {
    if probs.len() != 1 && probs.len() != len {
        return Err(Error::InvalidParameter(format!(
            "expected 1 or {len} probabilities, got {}",
            probs.len()
        )));
    }
    Ok(())
}

/// Probability of drawing `m` when bit `i` is Bernoulli(`probs[i]`).
/// A single-element `probs` is the homogeneous case.
pub fn mask_probability(m: &TriggerMask, probs: &[f64]) -> Result<f64> {
    check_probs(probs, m.len())?;
    if let Some(p) = probs.iter().find(|p| !(**p > 0.0 && **p < 1.0)) {
        return Err(Error::InvalidParameter(format!(
            "probability {p} outside (0,1)"
        )));
    }
    if let [p] = probs {
        let ones = m.count_ones() as i32;
        let zeros = m.len() as i32 - ones;
        return Ok(p.powi(ones) * (1.0 - p).powi(zeros));
    }
    Ok(m
        .bits()
        .iter()
        .zip(probs)
        .map(|(&b, &p)| if b { p } else { 1.0 - p })
        .product())
}

/// Independent Bernoulli draw per bit. Boundary values 0 and 1 are allowed.
pub fn sample_mask<R: Rng + ?Sized>(probs: &[f64], len: usize, rng: &mut R) -> TriggerMask {
    debug_assert!(probs.len() == 1 || probs.len() == len);
    let bits = (0..len)
        .map(|i| {
            let p = if probs.len() == 1 { probs[0] } else { probs[i] };
            rng.gen::<f64>() < p
        })
        .collect();
    TriggerMask(bits)
}

/// All `2^N*` masks in lexicographic order.
pub fn enumerate_masks(g: &Digraph) -> Result<Vec<TriggerMask>> {
    let len = active_vertices(g).len();
    if len > ENUMERATION_LIMIT {
        return Err(Error::TooManyMasks {
            count: len,
            limit: ENUMERATION_LIMIT,
        });
    }
    Ok((0u64..1 << len)
        .map(|code| TriggerMask((0..len).map(|i| code >> (len - 1 - i) & 1 == 1).collect()))
        .collect())
}

/// Mask selecting exactly the out-active vertices at depth `q`.
pub fn layer_graph(g: &Digraph, part: &DepthPartition, q: usize) -> Result<TriggerMask> {
    if q > part.q_star() {
        return Err(Error::LayerOutOfRange {
            q,
            q_star: part.q_star(),
        });
    }
    let layer = &part.layers[q];
    Ok(TriggerMask(
        active_vertices(g)
            .into_iter()
            .map(|v| layer.contains(&v))
            .collect(),
    ))
}

/// `N * (floor(1 / r_min) + 1)`: the jump budget per period.
pub fn ell_star(n: usize, r: &[f64]) -> Result<usize> {
    let r_min = check_thresholds(r)?;
    Ok(n * ((1.0 / r_min).floor() as usize + 1))
}

pub(crate) fn check_thresholds(r: &[f64]) -> Result<f64> {
    if r.is_empty() {
        return Err(Error::Empty("threshold vector"));
    }
    if let Some(x) = r.iter().find(|x| !(**x > 0.0 && **x < 1.0)) {
        return Err(Error::InvalidParameter(format!("threshold {x} outside (0,1)")));
    }
    Ok(r.iter().copied().fold(f64::INFINITY, f64::min))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SyncString {
    pub root: usize,
    pub q_star: usize,
    pub ell_star: usize,
    pub l_star: usize,
    pub sequence: GraphSequence,
}

/// Layer masks for depths `0..q*`, each repeated `ell*` times.
pub fn sync_string(g: &Digraph, root: usize, r: &[f64]) -> Result<SyncString> {
    if r.len() != g.n() {
        return Err(Error::InvalidParameter(format!(
            "expected {} thresholds, got {}",
            g.n(),
            r.len()
        )));
    }
    let ell = ell_star(g.n(), r)?;
    let part = g.depth_partition(root)?;
    let q_star = part.q_star();
    let mut masks = Vec::with_capacity(ell * q_star);
    for q in 0..q_star {
        let m = layer_graph(g, &part, q)?;
        masks.extend(std::iter::repeat(m).take(ell));
    }
    Ok(SyncString {
        root,
        q_star,
        ell_star: ell,
        l_star: ell * q_star,
        sequence: GraphSequence::new(masks, false)?,
    })
}

/// Smallest 1-based position at which `zeta` occurs contiguously in `prefix`.
pub fn find_string(prefix: &[TriggerMask], zeta: &[TriggerMask]) -> Option<usize> {
    if zeta.is_empty() {
        return Some(1);
    }
    prefix.windows(zeta.len()).position(|w| w == zeta).map(|i| i + 1)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{generate, GraphKind};
    use rand::SeedableRng;
    use std::collections::BTreeSet;

    fn layered_four() -> Digraph {
        Digraph::new(4, [(1, 2), (2, 3), (3, 2), (3, 4)]).unwrap().0
    }

    fn mask(s: &str) -> TriggerMask {
        s.parse().unwrap()
    }

    fn edges(g: &Digraph) -> BTreeSet<(usize, usize)> {
        g.edges().collect()
    }

    #[test]
    fn active_vertex_examples() {
        assert_eq!(active_vertices(&generate(GraphKind::Path, 3).unwrap()), vec![1, 2]);
        assert_eq!(active_vertices(&generate(GraphKind::Complete, 3).unwrap()), vec![1, 2, 3]);
        assert!(active_vertices(&Digraph::new(2, []).unwrap().0).is_empty());
    }

    #[test]
    fn subgraph_examples() {
        let g = layered_four();
        assert_eq!(edges(&subgraph_from_mask(&g, &mask("100")).unwrap()), BTreeSet::from([(1, 2)]));
        assert_eq!(subgraph_from_mask(&g, &mask("000")).unwrap().edge_count(), 0);
        assert_eq!(subgraph_from_mask(&g, &mask("111")).unwrap(), g);
        assert!(matches!(
            subgraph_from_mask(&g, &mask("10")),
            Err(Error::MaskLength { expected: 3, got: 2 })
        ));
    }

    #[test]
    fn mask_from_rejects_infeasible() {
        let g = generate(GraphKind::Complete, 3).unwrap();
        let partial = Digraph::new(3, [(1, 2)]).unwrap().0;
        assert!(mask_from_subgraph(&g, &partial).is_err());
        let foreign = Digraph::new(3, [(1, 2)]).unwrap().0;
        assert!(mask_from_subgraph(&generate(GraphKind::Path, 3).unwrap(), &foreign).is_ok());
        let not_sub = Digraph::new(3, [(3, 1)]).unwrap().0;
        assert!(mask_from_subgraph(&generate(GraphKind::Path, 3).unwrap(), &not_sub).is_err());
    }

    #[test]
    fn bijection_exhaustive() {
        for n in 1..=10 {
            for g in [
                generate(GraphKind::Complete, n).unwrap(),
                generate(GraphKind::Path, n).unwrap(),
                generate(GraphKind::RandomRooted { extra_edge_prob: 0.3, seed: n as u64 }, n).unwrap(),
            ] {
                for m in enumerate_masks(&g).unwrap() {
                    let sub = subgraph_from_mask(&g, &m).unwrap();
                    for v in g.vertices() {
                        let kept = sub.out_neighbors(v).len();
                        assert!(kept == 0 || kept == g.out_neighbors(v).len());
                    }
                    assert_eq!(mask_from_subgraph(&g, &sub).unwrap(), m);
                }
            }
        }
    }

    #[test]
    fn probability_examples() {
        for s in ["000", "010", "111"] {
            assert_eq!(mask_probability(&mask(s), &[0.5]).unwrap(), 0.125);
        }
        let p = mask_probability(&mask("101"), &[0.3]).unwrap();
        assert!((p - 0.063).abs() < 1e-15);
        let p = mask_probability(&mask("101"), &[0.3, 0.3, 0.3]).unwrap();
        assert!((p - 0.063).abs() < 1e-15);
        assert!(mask_probability(&mask("1"), &[1.0]).is_err());
        assert!(mask_probability(&mask("1"), &[0.0]).is_err());
        assert!(mask_probability(&mask("11"), &[0.5, 0.5, 0.5]).is_err());
    }

    #[test]
    fn probabilities_normalize() {
        let g = generate(GraphKind::Complete, 6).unwrap();
        let masks = enumerate_masks(&g).unwrap();
        let hom: f64 = masks.iter().map(|m| mask_probability(m, &[0.37]).unwrap()).sum();
        assert!((hom - 1.0).abs() < 1e-12);
        let probs = [0.1, 0.9, 0.5, 0.33, 0.72, 0.05];
        let het: f64 = masks.iter().map(|m| mask_probability(m, &probs).unwrap()).sum();
        assert!((het - 1.0).abs() < 1e-12);
    }

    #[test]
    fn sampling_boundaries_and_means() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(1);
        assert_eq!(sample_mask(&[1.0], 4, &mut rng), TriggerMask::ones(4));
        assert_eq!(sample_mask(&[0.0], 4, &mut rng), TriggerMask::zeros(4));
        let draws = 100_000;
        let mut counts = [0usize; 3];
        for _ in 0..draws {
            let m = sample_mask(&[0.5], 3, &mut rng);
            for (c, &b) in counts.iter_mut().zip(m.bits()) {
                *c += b as usize;
            }
        }
        for c in counts {
            let mean = c as f64 / draws as f64;
            assert!((mean - 0.5).abs() < 0.02, "mean {mean}");
        }
    }

    #[test]
    fn enumeration() {
        let g = Digraph::new(3, [(1, 2), (2, 3)]).unwrap().0;
        let all = enumerate_masks(&g).unwrap();
        let text: Vec<String> = all.iter().map(|m| m.to_string()).collect();
        assert_eq!(text, ["00", "01", "10", "11"]);
        let single = enumerate_masks(&Digraph::new(1, []).unwrap().0).unwrap();
        assert_eq!(single, vec![TriggerMask::zeros(0)]);
        let big = generate(GraphKind::Cycle, 21).unwrap();
        assert!(matches!(enumerate_masks(&big), Err(Error::TooManyMasks { count: 21, .. })));
    }

    #[test]
    fn layer_graph_examples() {
        let g = layered_four();
        let part = g.depth_partition(1).unwrap();
        let m0 = layer_graph(&g, &part, 0).unwrap();
        assert_eq!(m0, mask("100"));
        assert_eq!(edges(&subgraph_from_mask(&g, &m0).unwrap()), BTreeSet::from([(1, 2)]));
        let m2 = layer_graph(&g, &part, 2).unwrap();
        assert_eq!(edges(&subgraph_from_mask(&g, &m2).unwrap()), BTreeSet::from([(3, 2), (3, 4)]));
        // Vertex 4 has no out-edges, so layer 3 selects nothing.
        assert_eq!(layer_graph(&g, &part, 3).unwrap(), mask("000"));
        assert!(matches!(layer_graph(&g, &part, 4), Err(Error::LayerOutOfRange { .. })));

        let k3 = generate(GraphKind::Complete, 3).unwrap();
        let part = k3.depth_partition(1).unwrap();
        let m = layer_graph(&k3, &part, 0).unwrap();
        assert_eq!(edges(&subgraph_from_mask(&k3, &m).unwrap()), BTreeSet::from([(1, 2), (1, 3)]));
    }

    #[test]
    fn sync_string_examples() {
        let g = layered_four();
        let r = [0.125, 0.5, 0.7, 0.3];
        let s = sync_string(&g, 1, &r).unwrap();
        assert_eq!((s.ell_star, s.l_star, s.q_star), (36, 108, 3));
        assert_eq!(s.sequence.len(), 108);
        let part = g.depth_partition(1).unwrap();
        for q in 0..3 {
            let want = layer_graph(&g, &part, q).unwrap();
            assert!(s.sequence.masks[q * 36..(q + 1) * 36].iter().all(|m| *m == want));
        }

        let k2 = generate(GraphKind::Complete, 2).unwrap();
        let s = sync_string(&k2, 1, &[0.5, 0.5]).unwrap();
        assert_eq!((s.ell_star, s.q_star, s.l_star), (6, 1, 6));

        let single = Digraph::new(1, []).unwrap().0;
        let s = sync_string(&single, 1, &[0.5]).unwrap();
        assert_eq!(s.l_star, 0);
        assert!(s.sequence.is_empty());

        assert_eq!(sync_string(&g, 2, &r).unwrap_err(), Error::NotARoot(2));
        assert!(sync_string(&g, 1, &[0.0, 0.5, 0.5, 0.5]).is_err());
        assert!(sync_string(&g, 1, &[0.5, 0.5, 1.0, 0.5]).is_err());
    }

    #[test]
    fn find_string_examples() {
        let g = layered_four();
        let zeta = sync_string(&g, 1, &[0.5; 4]).unwrap().sequence.masks;
        assert_eq!(find_string(&zeta, &zeta), Some(1));
        let mut shifted = vec![mask("111")];
        shifted.extend(zeta.iter().cloned());
        assert_eq!(find_string(&shifted, &zeta), Some(2));
        assert_eq!(find_string(&zeta[1..], &zeta), None);
        assert_eq!(find_string(&[], &[]), Some(1));
    }

    #[test]
    fn sequence_cycling_and_file_format() {
        let seq = GraphSequence::with_tail(vec![mask("10"), mask("01"), mask("11")], true, 1).unwrap();
        let got: Vec<String> = (0..7).map(|k| seq.get(k).unwrap().to_string()).collect();
        assert_eq!(got, ["10", "01", "11", "01", "11", "01", "11"]);
        let once = GraphSequence::new(vec![mask("1")], false).unwrap();
        assert!(once.get(1).is_none());
        assert!(GraphSequence::new(vec![mask("1"), mask("10")], false).is_err());

        let parsed = GraphSequence::parse("# layer 0\n100\n\n010 # next\n", true).unwrap();
        assert_eq!(parsed.masks, vec![mask("100"), mask("010")]);
        assert!(parsed.repeat);
        assert_eq!(GraphSequence::parse(&parsed.to_text(), true).unwrap(), parsed);
        assert!(matches!(GraphSequence::parse("10\n12\n", false), Err(Error::Parse { line: 2, .. })));
    }
}
