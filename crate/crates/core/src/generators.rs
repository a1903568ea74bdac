//! Deterministic graph families used by tests, experiments and the CLI.
//! All generators produce unit lengths and unit costs unless noted.

use alloc::vec::Vec;

use rand::Rng;

use crate::graph::{Edge, Graph, VertexId};
use crate::rng;

fn build(n: usize, directed: bool, pairs: Vec<(VertexId, VertexId)>) -> Graph {
    Graph::unit(n, directed, &pairs).expect("generator emits a valid edge list")
}

pub fn complete(n: usize, directed: bool) -> Graph {
    let pairs = (0..n)
        .flat_map(|u| (0..n).map(move |v| (u, v)))
        .filter(|&(u, v)| if directed { u != v } else { u < v })
        .collect();
    build(n, directed, pairs)
}

/// Erdős–Rényi graph: every ordered (directed) or unordered pair is an edge
/// independently with probability `prob`.
pub fn gnp(n: usize, prob: f64, directed: bool, seed: u64) -> Graph {
    let mut rng = rng::derived_stream(seed, rng::tag::GENERATOR, n as u64);
    let mut pairs = Vec::new();
    for u in 0..n {
        for v in 0..n {
            let wanted = if directed { u != v } else { u < v };
            if wanted && rng.random::<f64>() < prob {
                pairs.push((u, v));
            }
        }
    }
    build(n, directed, pairs)
}

/// `w x h` grid, vertex `(x, y)` has id `y * w + x`.
pub fn grid(w: usize, h: usize) -> Graph {
    let mut pairs = Vec::new();
    for y in 0..h {
        for x in 0..w {
            let id = y * w + x;
            if x + 1 < w {
                pairs.push((id, id + 1));
            }
            if y + 1 < h {
                pairs.push((id, id + w));
            }
        }
    }
    build(w * h, false, pairs)
}

/// Circulant graph. Directed: arcs `i -> i+1, .., i+d`, so every in- and
/// out-degree is `d`. Undirected: offsets `1..=d/2`, plus the antipodal
/// offset when `d` is odd (requires even `n`).
pub fn circulant(n: usize, d: usize, directed: bool) -> Option<Graph> {
    if n == 0 || d >= n {
        return None;
    }
    let mut pairs = Vec::new();
    if directed {
        for i in 0..n {
            for off in 1..=d {
                pairs.push((i, (i + off) % n));
            }
        }
    } else {
        if d % 2 == 1 && n % 2 == 1 {
            return None;
        }
        for i in 0..n {
            for off in 1..=d / 2 {
                pairs.push((i, (i + off) % n));
            }
            if d % 2 == 1 && i < n / 2 {
                pairs.push((i, i + n / 2));
            }
        }
        pairs.iter_mut().for_each(|p| *p = (p.0.min(p.1), p.0.max(p.1)));
        pairs.sort_unstable();
        pairs.dedup();
    }
    Some(build(n, directed, pairs))
}

/// Directed gadget with `u = 0`, `v = 1`, an arc `u -> v` of cost `m`, and
/// midpoints `w_i = 2..r+2` with unit-cost arcs `u -> w_i -> v`.
pub fn gap_fixture(m: f64, r: usize) -> Graph {
    let mut edges = alloc::vec![Edge::new(0, 1, 1.0, m)];
    for w in 2..r + 2 {
        edges.push(Edge::unit(0, w));
        edges.push(Edge::unit(w, 1));
    }
    Graph::new(r + 2, true, edges).expect("gap fixture is valid")
}

pub fn path(n: usize) -> Graph {
    build(n, false, (1..n).map(|v| (v - 1, v)).collect())
}

pub fn cycle(n: usize) -> Graph {
    let mut pairs: Vec<_> = (1..n).map(|v| (v - 1, v)).collect();
    if n > 2 {
        pairs.push((0, n - 1));
    }
    build(n, false, pairs)
}

pub fn star(n: usize) -> Graph {
    build(n, false, (1..n).map(|v| (0, v)).collect())
}

pub fn petersen() -> Graph {
    let mut pairs = Vec::new();
    for i in 0..5 {
        pairs.push((i, (i + 1) % 5));
        pairs.push((i, i + 5));
        pairs.push((5 + i, 5 + (i + 2) % 5));
    }
    build(10, false, pairs)
}

/// Uniform random labelled tree (random parent among earlier vertices).
pub fn random_tree(n: usize, seed: u64) -> Graph {
    let mut rng = rng::derived_stream(seed, rng::tag::GENERATOR, 0x7472_6565);
    build(n, false, (1..n).map(|v| (rng.random_range(0..v), v)).collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sizes() {
        assert_eq!(complete(4, true).num_edges(), 12);
        assert_eq!(complete(5, false).num_edges(), 10);
        assert_eq!(gnp(5, 0.0, true, 1).num_edges(), 0);
        assert_eq!(gnp(5, 1.0, true, 1).num_edges(), 20);
        assert_eq!(grid(16, 16).num_edges(), 2 * 16 * 15);
        let p = petersen();
        assert_eq!(p.num_edges(), 15);
        assert!((0..10).all(|v| p.undirected_neighbors(v).len() == 3));
        let c = circulant(12, 3, true).unwrap();
        assert_eq!(c.max_degree(), 3);
        assert_eq!(c.num_edges(), 36);
        assert!((0..12).all(|v| circulant(12, 3, false).unwrap().undirected_neighbors(v).len() == 3));
    }

    #[test]
    fn gap_fixture_shape() {
        let g = gap_fixture(1000.0, 3);
        assert_eq!(g.n(), 5);
        assert_eq!(g.num_edges(), 7);
        assert_eq!(g.edge(g.edge_between(0, 1).unwrap()).cost, 1000.0);
        assert_eq!(g.length2_paths(0, 1).len(), 3);
    }

    #[test]
    fn gnp_is_deterministic() {
        assert_eq!(gnp(12, 0.3, false, 9), gnp(12, 0.3, false, 9));
        assert_eq!(random_tree(10, 3).num_edges(), 9);
    }
}
