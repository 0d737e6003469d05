mod common;

use nscert::orthograph::{build_graph, build_graph_with_cap, check_clique, constraint_cliques};
use nscert::polytope::{build_constraints, RowKind};
use nscert::scenario::SequentialScenario;
use nscert::Error;

#[test]
fn chsh_graph() {
    let s = SequentialScenario::chsh();
    let g = build_graph(&s).unwrap();
    assert_eq!(g.vertex_count(), 16);
    assert_eq!(g.edge_count(), 56);
    assert!((0..16).all(|v| g.neighbors(v).len() == 7));
    let json = g.to_json();
    assert_eq!(json.n, 16);
    assert!(json.edges.windows(2).all(|w| w[0] < w[1]));
    assert!(json.edges.iter().all(|[u, v]| u < v));
}

#[test]
fn edges_match_definition_across_matrix() {
    for s in common::scenario_matrix().into_iter().filter(|s| s.n_seq() <= 256) {
        let g = build_graph(&s).unwrap();
        let n = s.n_seq();
        let mut count = 0;
        for u in 0..n {
            assert!(!g.adjacent(u, u));
            for v in u + 1..n {
                let expected = common::orthogonal(&s, u, v);
                assert_eq!(g.adjacent(u, v), expected, "{s:?} {u} {v}");
                assert_eq!(g.adjacent(v, u), expected);
                count += usize::from(expected);
            }
        }
        assert_eq!(g.edge_count(), count);
    }
}

#[test]
fn constraint_supports_are_cliques() {
    for s in common::scenario_matrix() {
        let cs = build_constraints(&s).unwrap();
        let g = build_graph(&s).unwrap();
        let cliques = constraint_cliques(&cs, &g).unwrap();
        assert_eq!(cliques.cliques.len(), cs.count(RowKind::Norm) + cs.count(RowKind::Tons));
        for c in &cliques.cliques {
            for (i, &u) in c.vertices.iter().enumerate() {
                for &v in &c.vertices[i + 1..] {
                    assert!(common::orthogonal(&s, u, v), "{s:?}: {u} {v}");
                }
            }
        }
    }
}

#[test]
fn removing_an_edge_breaks_a_clique() {
    let s = SequentialScenario::chsh();
    let cs = build_constraints(&s).unwrap();
    let g = build_graph(&s).unwrap();
    let cliques = constraint_cliques(&cs, &g).unwrap();
    let support = &cliques.cliques[0].vertices;
    let h = g.without_edges(&[(support[0], support[1])]);
    assert!(matches!(check_clique(&h, support), Err(Error::NotAClique(_, _))));
    assert!(matches!(constraint_cliques(&cs, &h), Err(Error::NotAClique(_, _))));
}

#[test]
fn cap_enforced() {
    let s = SequentialScenario::new(2, 2, 2).unwrap();
    assert!(matches!(build_graph_with_cap(&s, 100), Err(Error::DimensionCap { .. })));
}
