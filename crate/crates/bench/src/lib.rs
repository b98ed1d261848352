//! Fixtures shared by the benchmarks.

use driftwalk::{build_graph, folner_indicator, srw_kernel, Graph, GraphSpec, Kernel};

pub struct Fixture {
    pub name: &'static str,
    pub graph: Graph,
    pub kernel: Kernel,
}

pub fn fixture(name: &'static str, spec: GraphSpec) -> Fixture {
    let graph = build_graph(&spec).expect("benchmark graph builds");
    let kernel = srw_kernel(&graph);
    Fixture { name, graph, kernel }
}

/// Graphs of a few thousand vertices from the main families.
pub fn standard() -> Vec<Fixture> {
    vec![
        fixture("cycle_4096", GraphSpec::cycle(4096)),
        fixture("torus_64x64", GraphSpec::torus(64, 2)),
        fixture("hypercube_12", GraphSpec::hypercube(12)),
        fixture("lamplighter_8", GraphSpec::lamplighter(8)),
    ]
}

/// Half-box seed for the heat-flow benchmarks.
pub fn half_box(f: &Fixture) -> Vec<f64> {
    let side = match f.graph.family() {
        driftwalk::Family::Cycle { n } | driftwalk::Family::Torus { n, .. } => *n / 2,
        _ => panic!("half_box needs a cycle or torus"),
    };
    folner_indicator(&f.graph, side).expect("seed builds")
}
