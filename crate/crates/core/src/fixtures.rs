//! Deterministic fixture graphs for tests, demos and benchmarks: seeded
//! random connected graphs, trees with prescribed branching patterns, and
//! edits (chords, sphere cliques, extra leaves) that preserve or break weak
//! spherical symmetry in controlled ways.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::graph::{layer, VertexId, WeightedGraph};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn random_function(rng: &mut ChaCha8Rng, n: usize) -> Vec<f64> {
    (0..n).map(|_| rng.random_range(-1.0..1.0)).collect()
}

/// Random connected graph: a random attachment tree plus extra edges, with
/// measures in `[0.5, 2]`, weights in `[0.2, 2]` and, optionally, potentials
/// in `[0, 1]` on roughly half the vertices.
pub fn random_connected_graph(
    rng: &mut ChaCha8Rng,
    n_min: usize,
    n_max: usize,
    with_potential: bool,
) -> WeightedGraph {
    let n = rng.random_range(n_min..=n_max);
    let mut vertices = Vec::with_capacity(n);
    for i in 0..n {
        let m = rng.random_range(0.5..2.0);
        let c = if with_potential && rng.random_bool(0.5) {
            rng.random_range(0.0..1.0)
        } else {
            0.0
        };
        vertices.push((i, m, c));
    }
    let mut edges = Vec::new();
    let mut present = std::collections::HashSet::new();
    for i in 1..n {
        let j = rng.random_range(0..i);
        present.insert((j, i));
        edges.push((j, i, rng.random_range(0.2..2.0)));
    }
    for _ in 0..n / 2 {
        let u = rng.random_range(0..n);
        let v = rng.random_range(0..n);
        let key = (u.min(v), u.max(v));
        if u != v && present.insert(key) {
            edges.push((key.0, key.1, rng.random_range(0.2..2.0)));
        }
    }
    WeightedGraph::build(&vertices, &edges, None).expect("fixture graph is valid")
}

/// Rooted tree where a vertex at radius `r` with within-sphere index `idx`
/// gets `children(r, idx)` children. Unit weights and measures, no potential.
pub fn custom_tree(radius: usize, children: impl Fn(usize, usize) -> usize) -> WeightedGraph {
    let mut edges = Vec::new();
    let mut current: Vec<usize> = vec![0];
    let mut next_id = 1usize;
    for r in 0..radius {
        let mut next = Vec::new();
        for (idx, &u) in current.iter().enumerate() {
            for _ in 0..children(r, idx) {
                edges.push((u, next_id, 1.0));
                next.push(next_id);
                next_id += 1;
            }
        }
        current = next;
    }
    let vertices: Vec<(usize, f64, f64)> = (0..next_id).map(|i| (i, 1.0, 0.0)).collect();
    WeightedGraph::build(&vertices, &edges, Some(VertexId(0))).expect("tree fixture is valid")
}

/// Tree with outward degree 2 or 3 per vertex in a fixed pattern: every
/// fourth vertex of each sphere gets three children, the rest two. The root
/// gets three.
pub fn mixed_tree(radius: usize) -> WeightedGraph {
    custom_tree(radius, |r, idx| {
        if r == 0 || idx % 4 == 0 {
            3
        } else {
            2
        }
    })
}

/// 3-regular tree truncation with one extra leaf attached to a single
/// sphere-2 vertex, so `kappa_+` varies on that sphere.
pub fn lopsided_tree(radius: usize) -> WeightedGraph {
    assert!(radius >= 2);
    let base = custom_tree(radius, |r, _| if r == 0 { 3 } else { 2 });
    let layering = layer(&base, VertexId(0)).unwrap();
    let target = layering.sphere(2)[0];
    let n = base.vertex_count();
    let mut vertices: Vec<(usize, f64, f64)> = (0..n).map(|i| (i, 1.0, 0.0)).collect();
    vertices.push((n, 1.0, 0.0));
    let mut edges: Vec<(usize, usize, f64)> = base.edges().to_vec();
    edges.push((target.0, n, 1.0));
    WeightedGraph::build(&vertices, &edges, Some(VertexId(0))).unwrap()
}

/// Adds one edge inside sphere `r` (between its first two vertices). The
/// curvatures only see inter-sphere edges, so weak spherical symmetry is
/// unaffected.
pub fn with_intra_sphere_chord(graph: &WeightedGraph, r: usize) -> WeightedGraph {
    let layering = layer(graph, graph.root()).unwrap();
    let sphere = layering.sphere(r);
    assert!(sphere.len() >= 2, "sphere {r} too small for a chord");
    let vertices: Vec<(usize, f64, f64)> = (0..graph.vertex_count())
        .map(|i| {
            (
                i,
                graph.measure(VertexId(i)),
                graph.potential(VertexId(i)),
            )
        })
        .collect();
    let mut edges: Vec<(usize, usize, f64)> = graph.edges().to_vec();
    edges.push((sphere[0].0, sphere[1].0, 1.0));
    WeightedGraph::build(&vertices, &edges, Some(graph.root())).unwrap()
}

/// Completes every sphere to a clique with unit-weight edges.
pub fn complete_spheres(graph: &WeightedGraph) -> WeightedGraph {
    let layering = layer(graph, graph.root()).unwrap();
    let vertices: Vec<(usize, f64, f64)> = (0..graph.vertex_count())
        .map(|i| {
            (
                i,
                graph.measure(VertexId(i)),
                graph.potential(VertexId(i)),
            )
        })
        .collect();
    let mut edges: Vec<(usize, usize, f64)> = graph.edges().to_vec();
    let mut present: std::collections::HashSet<(usize, usize)> =
        edges.iter().map(|&(u, v, _)| (u, v)).collect();
    for sphere in layering.spheres() {
        for (a, &u) in sphere.iter().enumerate() {
            for &v in &sphere[a + 1..] {
                if present.insert((u.0, v.0)) {
                    edges.push((u.0, v.0, 1.0));
                }
            }
        }
    }
    WeightedGraph::build(&vertices, &edges, Some(graph.root())).unwrap()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn random_graphs_are_reproducible() {
        let mut a = rng(42);
        let mut b = rng(42);
        let ga = random_connected_graph(&mut a, 5, 30, true);
        let gb = random_connected_graph(&mut b, 5, 30, true);
        assert_eq!(ga.vertex_count(), gb.vertex_count());
        assert_eq!(ga.edges(), gb.edges());
    }

    #[test]
    fn mixed_tree_has_outward_degrees_two_and_three() {
        let g = mixed_tree(4);
        let l = layer(&g, VertexId(0)).unwrap();
        let c = crate::graph::curvature(&g, &l).unwrap();
        let mut seen = std::collections::BTreeSet::new();
        for r in 1..4 {
            for &v in l.sphere(r) {
                seen.insert(c.kappa_plus(v) as u64);
            }
        }
        assert_eq!(seen.into_iter().collect::<Vec<_>>(), vec![2, 3]);
    }

    #[test]
    fn sphere_completion_preserves_curvatures() {
        let (g, _) = crate::profile::make_antitree(2.0, 4).unwrap();
        let completed = complete_spheres(&g);
        let l = layer(&completed, VertexId(0)).unwrap();
        let report = crate::graph::detect_weak_symmetry(&completed, VertexId(0), 1e-12).unwrap();
        assert_eq!(report.verdict, crate::verdict::Verdict::Positive);
        assert_eq!(l.max_radius(), 4);
    }
}
