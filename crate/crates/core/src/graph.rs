//! Simple directed graphs over vertices `1..=n`, their generators, and the
//! root/depth structure used by the synchronization analysis.
//!
//! Vertices are 1-indexed everywhere in the public API and in files.

use std::collections::{BTreeSet, VecDeque};
use std::fmt::Write as _;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng;

/// An immutable simple digraph: no self-arcs, no duplicate edges.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "RawDigraph", into = "RawDigraph")]
pub struct Digraph {
    n: usize,
    /// `out[i - 1]` holds the sorted out-neighbors of vertex `i`.
    out: Vec<Vec<usize>>,
    /// `inc[j - 1]` holds the sorted in-neighbors of vertex `j`.
    inc: Vec<Vec<usize>>,
}

#[derive(Serialize, Deserialize)]
struct RawDigraph {
    n: usize,
    edges: Vec<(usize, usize)>,
}

impl TryFrom<RawDigraph> for Digraph {
    type Error = Error;

    fn try_from(raw: RawDigraph) -> Result<Self> {
        Digraph::new(raw.n, raw.edges).map(|(g, _)| g)
    }
}

impl From<Digraph> for RawDigraph {
    fn from(g: Digraph) -> Self {
        RawDigraph {
            n: g.n,
            edges: g.edges().collect(),
        }
    }
}

impl Digraph {
    /// Validates and builds a digraph. Duplicate edges are dropped; the
    /// number dropped is returned alongside the graph.
    pub fn new<I>(n: usize, edges: I) -> Result<(Self, usize)>
    where
        I: IntoIterator<Item = (usize, usize)>,
    {
        if n == 0 {
            return Err(Error::EmptyGraph);
        }
        let mut set = BTreeSet::new();
        let mut duplicates = 0;
        for (u, v) in edges {
            for w in [u, v] {
                if w == 0 || w > n {
                    return Err(Error::VertexOutOfRange { vertex: w, n });
                }
            }
            if u == v {
                return Err(Error::SelfArc(u));
            }
            if !set.insert((u, v)) {
                duplicates += 1;
            }
        }
        Ok((Self::from_edge_set(n, &set), duplicates))
    }

    fn from_edge_set(n: usize, set: &BTreeSet<(usize, usize)>) -> Self {
        let mut out = vec![Vec::new(); n];
        let mut inc = vec![Vec::new(); n];
        for &(u, v) in set {
            out[u - 1].push(v);
            inc[v - 1].push(u);
        }
        for l in inc.iter_mut() {
            l.sort_unstable();
        }
        Digraph { n, out, inc }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn edge_count(&self) -> usize {
        self.out.iter().map(Vec::len).sum()
    }

    /// Edges in lexicographic order.
    pub fn edges(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.out
            .iter()
            .enumerate()
            .flat_map(|(i, l)| l.iter().map(move |&j| (i + 1, j)))
    }

    pub fn out_neighbors(&self, v: usize) -> &[usize] {
        &self.out[v - 1]
    }

    pub fn in_neighbors(&self, v: usize) -> &[usize] {
        &self.inc[v - 1]
    }

    pub fn has_edge(&self, u: usize, v: usize) -> bool {
        u >= 1 && u <= self.n && self.out[u - 1].binary_search(&v).is_ok()
    }

    pub fn vertices(&self) -> impl Iterator<Item = usize> {
        1..=self.n
    }

    /// BFS distances from `source`; `None` marks unreachable vertices.
    pub fn distances_from(&self, source: usize) -> Vec<Option<usize>> {
        let mut dist = vec![None; self.n];
        dist[source - 1] = Some(0);
        let mut queue = VecDeque::from([source]);
        while let Some(u) = queue.pop_front() {
            let d = dist[u - 1].unwrap();
            for &w in &self.out[u - 1] {
                if dist[w - 1].is_none() {
                    dist[w - 1] = Some(d + 1);
                    queue.push_back(w);
                }
            }
        }
        dist
    }

    /// All vertices from which every other vertex is reachable, ascending.
    pub fn roots(&self) -> Vec<usize> {
        self.vertices()
            .filter(|&v| self.distances_from(v).iter().all(Option::is_some))
            .collect()
    }

    pub fn is_rooted(&self) -> bool {
        !self.roots().is_empty()
    }

    pub fn is_root(&self, v: usize) -> bool {
        v >= 1 && v <= self.n && self.distances_from(v).iter().all(Option::is_some)
    }

    /// BFS layering from `root`.
    pub fn depth_partition(&self, root: usize) -> Result<DepthPartition> {
        if !self.is_root(root) {
            return Err(Error::NotARoot(root));
        }
        let dist = self.distances_from(root);
        let q_star = dist.iter().flatten().copied().max().unwrap_or(0);
        let mut layers = vec![Vec::new(); q_star + 1];
        for (i, d) in dist.iter().enumerate() {
            layers[d.expect("root reaches all vertices")].push(i + 1);
        }
        Ok(DepthPartition { root, layers })
    }

    /// Maximum over all roots of the root's largest BFS depth.
    pub fn depth(&self) -> Result<usize> {
        self.roots()
            .into_iter()
            .map(|r| self.distances_from(r).into_iter().flatten().max().unwrap_or(0))
            .max()
            .ok_or(Error::NotRooted)
    }

    /// Renders the edge-list text format.
    pub fn to_edge_list(&self) -> String {
        let mut s = format!("n {}\n", self.n);
        for (u, v) in self.edges() {
            let _ = writeln!(s, "{u} {v}");
        }
        s
    }

    /// Parses the edge-list text format: a `n <N>` header, then one `u v`
    /// pair per line. `#` starts a comment. Returns the number of duplicate
    /// edges that were dropped.
    pub fn parse_edge_list(text: &str) -> Result<(Self, usize)> {
        let mut n = None;
        let mut edges = Vec::new();
        for (idx, raw) in text.lines().enumerate() {
            let line_no = idx + 1;
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let mut parts = line.split_whitespace();
            let first = parts.next().unwrap();
            let parse = |tok: Option<&str>| -> Result<usize> {
                tok.ok_or_else(|| Error::Parse {
                    line: line_no,
                    msg: "expected two fields".into(),
                })?
                .parse()
                .map_err(|e| Error::Parse {
                    line: line_no,
                    msg: format!("{e}"),
                })
            };
            if n.is_none() {
                if first != "n" {
                    return Err(Error::Parse {
                        line: line_no,
                        msg: "expected header `n <N>`".into(),
                    });
                }
                n = Some(parse(parts.next())?);
            } else {
                let u = parse(Some(first))?;
                let v = parse(parts.next())?;
                edges.push((u, v));
            }
            if parts.next().is_some() {
                return Err(Error::Parse {
                    line: line_no,
                    msg: "trailing fields".into(),
                });
            }
        }
        let n = n.ok_or(Error::Parse {
            line: 0,
            msg: "missing header `n <N>`".into(),
        })?;
        Digraph::new(n, edges)
    }
}

/// BFS layers of a rooted digraph with respect to one root.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DepthPartition {
    pub root: usize,
    /// `layers[q]` lists the vertices at depth `q`, ascending.
    pub layers: Vec<Vec<usize>>,
}

impl DepthPartition {
    pub fn q_star(&self) -> usize {
        self.layers.len() - 1
    }

    /// Vertices of depth at most `q`, ascending.
    pub fn up_to(&self, q: usize) -> Vec<usize> {
        let mut v: Vec<usize> = self.layers[..=q.min(self.q_star())].concat();
        v.sort_unstable();
        v
    }

    /// Depth of each vertex, indexed by `vertex - 1`.
    pub fn depth_of(&self) -> Vec<usize> {
        let n = self.layers.iter().map(Vec::len).sum();
        let mut d = vec![0; n];
        for (q, layer) in self.layers.iter().enumerate() {
            for &v in layer {
                d[v - 1] = q;
            }
        }
        d
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum GraphKind {
    Complete,
    Path,
    Cycle,
    Regular { d: usize },
    RandomRooted { extra_edge_prob: f64, seed: u64 },
}

impl GraphKind {
    pub fn label(&self) -> String {
        match self {
            GraphKind::Complete => "complete".into(),
            GraphKind::Path => "path".into(),
            GraphKind::Cycle => "cycle".into(),
            GraphKind::Regular { d } => format!("regular:{d}"),
            GraphKind::RandomRooted {
                extra_edge_prob,
                seed,
            } => format!("random-rooted:{extra_edge_prob}:{seed}"),
        }
    }
}

/// Builds a member of one of the standard families on `n` vertices.
pub fn generate(kind: GraphKind, n: usize) -> Result<Digraph> {
    if n == 0 {
        return Err(Error::EmptyGraph);
    }
    match kind {
        GraphKind::Complete => Ok(regular_unchecked(n, n - 1)),
        GraphKind::Cycle => {
            if n == 1 {
                // 1-regular needs n >= 2; the single vertex is its own trivial cycle.
                return Ok(regular_unchecked(1, 0));
            }
            Ok(regular_unchecked(n, 1))
        }
        GraphKind::Path => {
            let edges = (1..n).map(|i| (i, i + 1));
            Digraph::new(n, edges).map(|(g, _)| g)
        }
        GraphKind::Regular { d } => {
            if d == 0 || d >= n {
                return Err(Error::InvalidDegree { d, n });
            }
            Ok(regular_unchecked(n, d))
        }
        GraphKind::RandomRooted {
            extra_edge_prob,
            seed,
        } => {
            if !(0.0..=1.0).contains(&extra_edge_prob) {
                return Err(Error::InvalidParameter(format!(
                    "extra_edge_prob {extra_edge_prob} outside [0,1]"
                )));
            }
            Ok(random_rooted(n, extra_edge_prob, seed))
        }
    }
}

/// Vertex `i` gets out-neighbors `((i + j) mod n) + 1` for `j = 0..d`.
fn regular_unchecked(n: usize, d: usize) -> Digraph {
    let edges = (1..=n).flat_map(|i| (0..d).map(move |j| (i, ((i + j) % n) + 1)));
    Digraph::new(n, edges).expect("regular construction is simple").0
}

/// A uniformly random parent among already attached vertices for each new
/// vertex (a spanning arborescence from vertex 1), then every other ordered
/// pair independently with probability `p`.
fn random_rooted(n: usize, p: f64, seed: u64) -> Digraph {
    let mut stream = rng::stream(rng::derive_seed(seed, &[rng::fnv1a("random_rooted")]));
    let mut set = BTreeSet::new();
    for v in 2..=n {
        let parent = stream.gen_range(1..v);
        set.insert((parent, v));
    }
    for u in 1..=n {
        for v in 1..=n {
            if u != v && !set.contains(&(u, v)) && stream.gen_bool(p) {
                set.insert((u, v));
            }
        }
    }
    Digraph::from_edge_set(n, &set)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn layered_four() -> Digraph {
        Digraph::new(4, [(1, 2), (2, 3), (3, 2), (3, 4)]).unwrap().0
    }

    fn edge_set(g: &Digraph) -> BTreeSet<(usize, usize)> {
        g.edges().collect()
    }

    /// Floyd-Warshall style closure, independent of the BFS code path.
    fn reach_matrix(g: &Digraph) -> Vec<Vec<bool>> {
        let n = g.n();
        let mut r = vec![vec![false; n]; n];
        for (i, row) in r.iter_mut().enumerate() {
            row[i] = true;
        }
        for (u, v) in g.edges() {
            r[u - 1][v - 1] = true;
        }
        for k in 0..n {
            for i in 0..n {
                for j in 0..n {
                    if r[i][k] && r[k][j] {
                        r[i][j] = true;
                    }
                }
            }
        }
        r
    }

    /// Bellman-Ford relaxation with unit weights.
    fn shortest_paths(g: &Digraph, s: usize) -> Vec<Option<usize>> {
        let n = g.n();
        let mut d = vec![None; n];
        d[s - 1] = Some(0);
        for _ in 0..n {
            for (u, v) in g.edges() {
                if let Some(du) = d[u - 1] {
                    if d[v - 1].map_or(true, |dv: usize| du + 1 < dv) {
                        d[v - 1] = Some(du + 1);
                    }
                }
            }
        }
        d
    }

    #[test]
    fn build_layered_four_and_trivial() {
        let g = layered_four();
        assert_eq!(g.n(), 4);
        assert_eq!(g.edge_count(), 4);
        let (single, dup) = Digraph::new(1, []).unwrap();
        assert_eq!(single.edge_count(), 0);
        assert_eq!(dup, 0);
    }

    #[test]
    fn build_rejects_bad_edges() {
        assert_eq!(Digraph::new(2, [(1, 1)]).unwrap_err(), Error::SelfArc(1));
        assert!(matches!(
            Digraph::new(2, [(1, 3)]),
            Err(Error::VertexOutOfRange { vertex: 3, n: 2 })
        ));
        assert!(matches!(
            Digraph::new(2, [(0, 1)]),
            Err(Error::VertexOutOfRange { .. })
        ));
        assert_eq!(Digraph::new(0, []).unwrap_err(), Error::EmptyGraph);
    }

    #[test]
    fn duplicates_are_counted() {
        let (g, dup) = Digraph::new(3, [(1, 2), (1, 2), (2, 3), (1, 2)]).unwrap();
        assert_eq!(dup, 2);
        assert_eq!(g.edge_count(), 2);
    }

    #[test]
    fn generators() {
        let c = generate(GraphKind::Cycle, 3).unwrap();
        assert_eq!(edge_set(&c), BTreeSet::from([(1, 2), (2, 3), (3, 1)]));
        let k2 = generate(GraphKind::Complete, 2).unwrap();
        assert_eq!(edge_set(&k2), BTreeSet::from([(1, 2), (2, 1)]));
        let p = generate(GraphKind::Path, 3).unwrap();
        assert_eq!(edge_set(&p), BTreeSet::from([(1, 2), (2, 3)]));
        let r = generate(GraphKind::Regular { d: 5 }, 50).unwrap();
        assert!(r.vertices().all(|v| r.out_neighbors(v).len() == 5));
        assert!(matches!(
            generate(GraphKind::Regular { d: 4 }, 4),
            Err(Error::InvalidDegree { .. })
        ));
        assert!(matches!(
            generate(GraphKind::Regular { d: 0 }, 4),
            Err(Error::InvalidDegree { .. })
        ));
    }

    #[test]
    fn regular_extremes_match_cycle_and_complete() {
        for n in 2..9 {
            let r1 = generate(GraphKind::Regular { d: 1 }, n).unwrap();
            assert_eq!(r1, generate(GraphKind::Cycle, n).unwrap());
            let rn = generate(GraphKind::Regular { d: n - 1 }, n).unwrap();
            assert_eq!(rn, generate(GraphKind::Complete, n).unwrap());
        }
    }

    #[test]
    fn roots_examples() {
        assert_eq!(layered_four().roots(), vec![1]);
        assert_eq!(generate(GraphKind::Cycle, 4).unwrap().roots(), vec![1, 2, 3, 4]);
        assert!(Digraph::new(2, []).unwrap().0.roots().is_empty());
        assert_eq!(Digraph::new(1, []).unwrap().0.roots(), vec![1]);
    }

    #[test]
    fn depth_partition_examples() {
        let part = layered_four().depth_partition(1).unwrap();
        assert_eq!(part.layers, vec![vec![1], vec![2], vec![3], vec![4]]);
        assert_eq!(part.q_star(), 3);

        let k5 = generate(GraphKind::Complete, 5).unwrap();
        let part = k5.depth_partition(1).unwrap();
        assert_eq!(part.layers, vec![vec![1], vec![2, 3, 4, 5]]);
        assert_eq!(part.q_star(), 1);

        let single = Digraph::new(1, []).unwrap().0;
        let part = single.depth_partition(1).unwrap();
        assert_eq!(part.layers, vec![vec![1]]);
        assert_eq!(part.q_star(), 0);

        assert_eq!(layered_four().depth_partition(2).unwrap_err(), Error::NotARoot(2));
    }

    #[test]
    fn graph_depth_examples() {
        for n in 2..7 {
            assert_eq!(generate(GraphKind::Complete, n).unwrap().depth().unwrap(), 1);
        }
        assert_eq!(layered_four().depth().unwrap(), 3);
        // Brute force: each root of the 4-cycle reaches its predecessor in 3 hops.
        let c4 = generate(GraphKind::Cycle, 4).unwrap();
        let brute = c4
            .roots()
            .into_iter()
            .map(|r| shortest_paths(&c4, r).into_iter().flatten().max().unwrap())
            .max()
            .unwrap();
        assert_eq!(brute, 3);
        assert_eq!(c4.depth().unwrap(), 3);
        assert_eq!(Digraph::new(2, []).unwrap().0.depth().unwrap_err(), Error::NotRooted);
    }

    #[test]
    fn edge_list_format() {
        let text = "# layered\nn 4\n1 2\n2 3 # back\n3 2\n\n3 4\n1 2\n";
        let (g, dup) = Digraph::parse_edge_list(text).unwrap();
        assert_eq!(g, layered_four());
        assert_eq!(dup, 1);
        let (again, _) = Digraph::parse_edge_list(&g.to_edge_list()).unwrap();
        assert_eq!(again, g);
        assert!(Digraph::parse_edge_list("1 2\n").is_err());
        assert!(Digraph::parse_edge_list("n 3\n1\n").is_err());
        assert!(Digraph::parse_edge_list("n 3\n1 1\n").is_err());
        assert!(Digraph::parse_edge_list("").is_err());
    }

    #[test]
    fn serde_roundtrip_validates() {
        let json = serde_json::to_string(&layered_four()).unwrap();
        let back: Digraph = serde_json::from_str(&json).unwrap();
        assert_eq!(back, layered_four());
        assert!(serde_json::from_str::<Digraph>(r#"{"n":2,"edges":[[1,1]]}"#).is_err());
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        fn small_graph() -> impl Strategy<Value = Digraph> {
            (1usize..=8).prop_flat_map(|n| {
                proptest::collection::vec((1..=n, 1..=n), 0..(n * n))
                    .prop_map(move |pairs| {
                        let edges = pairs.into_iter().filter(|(u, v)| u != v);
                        Digraph::new(n, edges).unwrap().0
                    })
            })
        }

        proptest! {
            #[test]
            fn roots_match_closure_oracle(g in small_graph()) {
                let reach = reach_matrix(&g);
                let oracle: Vec<usize> = (0..g.n())
                    .filter(|&i| reach[i].iter().all(|&b| b))
                    .map(|i| i + 1)
                    .collect();
                prop_assert_eq!(g.roots(), oracle);
            }

            #[test]
            fn layers_match_shortest_paths(g in small_graph()) {
                for root in g.roots() {
                    let part = g.depth_partition(root).unwrap();
                    let sp = shortest_paths(&g, root);
                    let mut seen = BTreeSet::new();
                    for (q, layer) in part.layers.iter().enumerate() {
                        prop_assert!(!layer.is_empty());
                        for &v in layer {
                            prop_assert!(seen.insert(v));
                            prop_assert_eq!(sp[v - 1], Some(q));
                            if q > 0 {
                                prop_assert!(g.in_neighbors(v).iter().any(|u| part.layers[q - 1].contains(u)));
                            }
                        }
                    }
                    prop_assert_eq!(seen.len(), g.n());
                    prop_assert_eq!(part.layers[0].clone(), vec![root]);
                }
            }

            #[test]
            fn random_rooted_has_root_one(n in 1usize..30, p in 0.0f64..0.5, seed: u64) {
                let g = generate(GraphKind::RandomRooted { extra_edge_prob: p, seed }, n).unwrap();
                prop_assert!(g.is_root(1));
            }
        }
    }
}
