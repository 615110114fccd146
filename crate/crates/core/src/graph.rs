//! Undirected simple graphs on at most 64 vertices, stored as adjacency masks.

use rand::Rng;

use crate::error::{Error, Result};
use crate::itemset::ItemSet;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Graph {
    n: usize,
    adj: Vec<u64>,
}

impl Graph {
    pub fn empty(n: usize) -> Result<Self> {
        if n > 64 {
            return Err(Error::CapExceeded {
                what: "graph vertices",
                limit: 64,
                got: n,
            });
        }
        Ok(Graph { n, adj: vec![0; n] })
    }

    pub fn complete(n: usize) -> Result<Self> {
        let mut g = Graph::empty(n)?;
        for u in 0..n {
            for v in 0..n {
                if u != v {
                    g.adj[u] |= 1 << v;
                }
            }
        }
        Ok(g)
    }

    pub fn cycle(n: usize) -> Result<Self> {
        let mut g = Graph::empty(n)?;
        if n >= 2 {
            for u in 0..n {
                g.add_edge(u, (u + 1) % n)?;
            }
        }
        Ok(g)
    }

    pub fn from_edges(n: usize, edges: &[(usize, usize)]) -> Result<Self> {
        let mut g = Graph::empty(n)?;
        for &(u, v) in edges {
            g.add_edge(u, v)?;
        }
        Ok(g)
    }

    pub fn add_edge(&mut self, u: usize, v: usize) -> Result<()> {
        if u >= self.n || v >= self.n {
            return Err(Error::invalid(format!(
                "edge ({u},{v}) out of vertex range 0..{}",
                self.n
            )));
        }
        if u == v {
            return Err(Error::invalid(format!("self-loop at vertex {u}")));
        }
        self.adj[u] |= 1 << v;
        self.adj[v] |= 1 << u;
        Ok(())
    }

    /// Erdos-Renyi G(n, p) with the given rng.
    pub fn random(n: usize, p: f64, rng: &mut impl Rng) -> Result<Self> {
        let mut g = Graph::empty(n)?;
        for u in 0..n {
            for v in u + 1..n {
                if rng.random::<f64>() < p {
                    g.add_edge(u, v)?;
                }
            }
        }
        Ok(g)
    }

    pub fn vertex_count(&self) -> usize {
        self.n
    }

    pub fn has_edge(&self, u: usize, v: usize) -> bool {
        u < self.n && v < self.n && self.adj[u] & (1 << v) != 0
    }

    pub fn edges(&self) -> Vec<(usize, usize)> {
        let mut out = Vec::new();
        for u in 0..self.n {
            for v in u + 1..self.n {
                if self.has_edge(u, v) {
                    out.push((u, v));
                }
            }
        }
        out
    }

    pub fn adjacency_mask(&self, v: usize) -> u64 {
        self.adj[v]
    }

    /// Extends the graph with `delta` fresh, fully interconnected vertices
    /// that have no edges to the original graph.
    pub fn with_fresh_clique(&self, delta: usize) -> Result<Graph> {
        let n2 = self.n + delta;
        let mut g = Graph::empty(n2)?;
        g.adj[..self.n].copy_from_slice(&self.adj);
        for u in self.n..n2 {
            for v in self.n..n2 {
                if u != v {
                    g.adj[u] |= 1 << v;
                }
            }
        }
        Ok(g)
    }

    pub fn is_clique_mask(&self, mask: u64) -> bool {
        let mut rest = mask;
        while rest != 0 {
            let v = rest.trailing_zeros() as usize;
            rest &= rest - 1;
            let others = mask & !(1u64 << v);
            if others & !self.adj[v] != 0 {
                return false;
            }
        }
        true
    }

    pub fn is_clique(&self, set: &ItemSet) -> bool {
        debug_assert_eq!(set.ground_size(), self.n);
        self.is_clique_mask(set.as_mask())
    }
}
