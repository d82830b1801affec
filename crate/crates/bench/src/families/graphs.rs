//! Named graphs for the isomorphism family.

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum NamedGraph {
    Petersen,
    Icosahedral,
    Dodecahedral,
}

impl NamedGraph {
    pub fn name(self) -> &'static str {
        match self {
            NamedGraph::Petersen => "petersen",
            NamedGraph::Icosahedral => "icosahedral",
            NamedGraph::Dodecahedral => "dodecahedral",
        }
    }

    pub fn vertices(self) -> usize {
        match self {
            NamedGraph::Petersen => 10,
            NamedGraph::Icosahedral => 12,
            NamedGraph::Dodecahedral => 20,
        }
    }

    pub fn edges(self) -> Vec<(usize, usize)> {
        match self {
            NamedGraph::Petersen => generalized_petersen(5, 2),
            NamedGraph::Dodecahedral => generalized_petersen(10, 2),
            NamedGraph::Icosahedral => icosahedron(),
        }
    }

    /// Row-major 0/1 adjacency matrix.
    pub fn adjacency(self) -> Vec<f64> {
        let n = self.vertices();
        let mut a = vec![0.0; n * n];
        for (i, j) in self.edges() {
            a[i * n + j] = 1.0;
            a[j * n + i] = 1.0;
        }
        a
    }
}

/// Outer cycle `0..k`, spokes `i -- k+i`, inner star polygon with step `s`.
fn generalized_petersen(k: usize, s: usize) -> Vec<(usize, usize)> {
    let mut e = Vec::with_capacity(3 * k);
    for i in 0..k {
        e.push((i, (i + 1) % k));
        e.push((i, k + i));
        e.push((k + i, k + (i + s) % k));
    }
    e
}

/// Apex 0, upper ring 1..=5, lower ring 6..=10, bottom 11.
fn icosahedron() -> Vec<(usize, usize)> {
    let mut e = Vec::with_capacity(30);
    for i in 0..5 {
        let (u, u1) = (1 + i, 1 + (i + 1) % 5);
        let (l, l1) = (6 + i, 6 + (i + 1) % 5);
        e.extend([(0, u), (u, u1), (u, l), (u, l1), (l, l1), (l, 11)]);
    }
    e
}

#[cfg(test)]
mod tests {
    use super::*;

    fn degrees(g: NamedGraph) -> Vec<usize> {
        let n = g.vertices();
        let a = g.adjacency();
        (0..n).map(|i| a[i * n..(i + 1) * n].iter().filter(|&&x| x == 1.0).count()).collect()
    }

    #[test]
    fn named_graphs_are_regular_with_known_edge_counts() {
        for (g, deg, edges) in
            [(NamedGraph::Petersen, 3, 15), (NamedGraph::Icosahedral, 5, 30), (NamedGraph::Dodecahedral, 3, 30)]
        {
            assert!(degrees(g).iter().all(|&d| d == deg), "{g:?}");
            let mut e: Vec<_> = g.edges().into_iter().map(|(i, j)| (i.min(j), i.max(j))).collect();
            e.sort_unstable();
            e.dedup();
            assert_eq!(e.len(), edges, "{g:?}");
        }
    }

    /// Girth by breadth-first search from every vertex.
    fn girth(g: NamedGraph) -> usize {
        let n = g.vertices();
        let a = g.adjacency();
        let mut best = usize::MAX;
        for s in 0..n {
            let mut dist = vec![usize::MAX; n];
            let mut parent = vec![usize::MAX; n];
            dist[s] = 0;
            let mut queue = std::collections::VecDeque::from([s]);
            while let Some(u) = queue.pop_front() {
                for v in (0..n).filter(|&v| a[u * n + v] == 1.0) {
                    if dist[v] == usize::MAX {
                        dist[v] = dist[u] + 1;
                        parent[v] = u;
                        queue.push_back(v);
                    } else if parent[u] != v {
                        best = best.min(dist[u] + dist[v] + 1);
                    }
                }
            }
        }
        best
    }

    #[test]
    fn girths_match_the_named_graphs() {
        assert_eq!(girth(NamedGraph::Petersen), 5);
        assert_eq!(girth(NamedGraph::Dodecahedral), 5);
        assert_eq!(girth(NamedGraph::Icosahedral), 3);
    }
}
