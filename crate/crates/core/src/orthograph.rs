//! Orthogonality graph of a sequential scenario: vertices are events, edges
//! join locally exclusive events.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::polytope::{ConstraintSystem, RowKind};
use crate::scenario::SequentialScenario;

pub const DEFAULT_GRAPH_CAP: usize = 1 << 16;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OrthogonalityGraph {
    pub scenario: SequentialScenario,
    /// Sorted adjacency lists.
    adjacency: Vec<Vec<usize>>,
}

impl OrthogonalityGraph {
    pub fn vertex_count(&self) -> usize {
        self.adjacency.len()
    }

    pub fn neighbors(&self, v: usize) -> &[usize] {
        &self.adjacency[v]
    }

    pub fn adjacent(&self, u: usize, v: usize) -> bool {
        self.adjacency[u].binary_search(&v).is_ok()
    }

    pub fn edge_count(&self) -> usize {
        self.adjacency.iter().map(Vec::len).sum::<usize>() / 2
    }

    /// Edges `(u, v)` with `u < v`, in lexicographic order.
    pub fn edges(&self) -> Vec<(usize, usize)> {
        self.adjacency
            .iter()
            .enumerate()
            .flat_map(|(u, adj)| adj.iter().filter(move |&&v| v > u).map(move |&v| (u, v)))
            .collect()
    }

    /// Same graph with some edges dropped.
    pub fn without_edges(&self, drop: &[(usize, usize)]) -> OrthogonalityGraph {
        let mut adjacency = self.adjacency.clone();
        for &(u, v) in drop {
            adjacency[u].retain(|&w| w != v);
            adjacency[v].retain(|&w| w != u);
        }
        OrthogonalityGraph {
            scenario: self.scenario,
            adjacency,
        }
    }

    pub fn to_json(&self) -> GraphJson {
        GraphJson {
            n: self.vertex_count(),
            edges: self.edges().into_iter().map(|(u, v)| [u, v]).collect(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GraphJson {
    pub n: usize,
    pub edges: Vec<[usize; 2]>,
}

pub fn build_graph(s: &SequentialScenario) -> Result<OrthogonalityGraph> {
    build_graph_with_cap(s, DEFAULT_GRAPH_CAP)
}

pub fn build_graph_with_cap(s: &SequentialScenario, cap: usize) -> Result<OrthogonalityGraph> {
    let n = s.n_seq();
    if n > cap {
        return Err(Error::DimensionCap {
            what: "n_seq",
            actual: n,
            cap,
        });
    }
    let events = s.events();
    let mut adjacency = vec![Vec::new(); n];
    for u in 0..n {
        for v in u + 1..n {
            if events[u].orthogonal_to(&events[v]) {
                adjacency[u].push(v);
                adjacency[v].push(u);
            }
        }
    }
    Ok(OrthogonalityGraph {
        scenario: *s,
        adjacency,
    })
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Clique {
    pub kind: RowKind,
    pub vertices: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct CliqueSet {
    pub cliques: Vec<Clique>,
}

/// Supports of the normalization and time-ordered no-signaling rows, each
/// checked to be a clique of `g`.
pub fn constraint_cliques(cs: &ConstraintSystem, g: &OrthogonalityGraph) -> Result<CliqueSet> {
    if cs.scenario != g.scenario {
        return Err(Error::ScenarioMismatch);
    }
    let mut cliques = Vec::new();
    for row in cs.equality_rows() {
        let vertices = row.support();
        check_clique(g, &vertices)?;
        cliques.push(Clique {
            kind: row.kind,
            vertices,
        });
    }
    Ok(CliqueSet { cliques })
}

pub fn check_clique(g: &OrthogonalityGraph, vertices: &[usize]) -> Result<()> {
    for (i, &u) in vertices.iter().enumerate() {
        for &v in &vertices[i + 1..] {
            if !g.adjacent(u, v) {
                return Err(Error::NotAClique(u, v));
            }
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::polytope::build_constraints;

    #[test]
    fn chsh_graph() {
        let g = build_graph(&SequentialScenario::chsh()).unwrap();
        assert_eq!(g.vertex_count(), 16);
        assert_eq!(g.edge_count(), 56);
        assert!((0..16).all(|v| g.neighbors(v).len() == 7));
    }

    #[test]
    fn trivial_scenario() {
        let g = build_graph(&SequentialScenario::new(1, 1, 1).unwrap()).unwrap();
        assert_eq!(g.vertex_count(), 1);
        assert_eq!(g.edge_count(), 0);
    }

    /// Single-run rule: same setting for some party and different outcome.
    #[test]
    fn single_run_matches_standard_rule() {
        for (m, d) in [(2, 2), (3, 2), (2, 3)] {
            let s = SequentialScenario::new(1, m, d).unwrap();
            let g = build_graph(&s).unwrap();
            let ev = s.events();
            for u in 0..ev.len() {
                for v in 0..ev.len() {
                    if u == v {
                        continue;
                    }
                    let (a, b) = (&ev[u], &ev[v]);
                    let expected = (a.inputs_a == b.inputs_a && a.outputs_a != b.outputs_a)
                        || (a.inputs_b == b.inputs_b && a.outputs_b != b.outputs_b);
                    assert_eq!(g.adjacent(u, v), expected);
                }
            }
        }
    }

    #[test]
    fn chsh_cliques() {
        let s = SequentialScenario::chsh();
        let cs = build_constraints(&s).unwrap();
        let g = build_graph(&s).unwrap();
        let cl = constraint_cliques(&cs, &g).unwrap();
        assert_eq!(cl.cliques.len(), 12);
        assert_eq!(cl.cliques[0].vertices, vec![0, 1, 2, 3]);
        for c in &cl.cliques {
            assert_eq!(c.vertices.len(), 4);
        }
    }

    #[test]
    fn non_adjacent_pair_rejected() {
        let s = SequentialScenario::chsh();
        let g = build_graph(&s).unwrap();
        // (i_A,i_B,o_A,o_B) = (0,0,0,0) and (1,1,0,0): different settings on both sides.
        let u = 0;
        let v = s
            .event_index(&crate::scenario::Event {
                inputs_a: vec![1],
                inputs_b: vec![1],
                outputs_a: vec![0],
                outputs_b: vec![0],
            })
            .unwrap();
        assert!(matches!(check_clique(&g, &[u, v]), Err(Error::NotAClique(0, 12))));
    }
}
