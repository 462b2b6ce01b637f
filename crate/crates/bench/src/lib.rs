//! Fixtures shared by the criterion benches.

use pcosync_core::{generate, Digraph, GraphKind, SimConfig, TriggerModel, UpdateRule};

/// The four-vertex graph whose synchronization string has length 108.
pub fn layered_four() -> Digraph {
    Digraph::new(4, [(1, 2), (2, 3), (3, 2), (3, 4)]).expect("valid edges").0
}

/// Binary rule with `r = 0.5`, vertex triggering with `p = 0.5`.
pub fn binary_config(kind: GraphKind, n: usize, seed: u64) -> SimConfig {
    let mut cfg = SimConfig::new(
        generate(kind, n).expect("valid family"),
        UpdateRule::binary(vec![0.5; n]),
        TriggerModel::vertex(0.5),
    );
    cfg.seed = seed;
    cfg
}

pub fn linear_config(kind: GraphKind, n: usize, seed: u64) -> SimConfig {
    let mut cfg = binary_config(kind, n, seed);
    cfg.rule = UpdateRule::PiecewiseLinear { m1: 0.3261, m2: 0.46 };
    cfg.stop.sync_eps = 0.05;
    cfg
}
