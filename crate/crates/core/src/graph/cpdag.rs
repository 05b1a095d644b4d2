use std::cmp::Ordering;
use std::ops::ControlFlow;

use super::{Dag, NodeSet, MAX_NODES};
use crate::error::{Error, Result};

/// `(n, sorted directed edges, sorted undirected edges)`.
pub type CanonicalKey = (usize, Vec<(usize, usize)>, Vec<(usize, usize)>);

/// Completed partially directed acyclic graph: the canonical representative
/// of a Markov equivalence class.
///
/// Directed edges are those oriented identically in every member DAG;
/// the remaining skeleton edges are undirected. Ordering follows the
/// canonical encoding: node count, then the sorted directed edge list, then
/// the sorted undirected edge list.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Cpdag {
    /// `directed[v]` holds the parents of `v` via directed edges.
    directed: Vec<NodeSet>,
    /// Symmetric adjacency of undirected edges.
    undirected: Vec<NodeSet>,
}

impl Cpdag {
    pub fn empty(n: usize) -> Self {
        Dag::empty(n).to_cpdag()
    }

    /// The class of complete DAGs: every pair joined by an undirected edge.
    pub fn complete(n: usize) -> Self {
        Dag::complete(n).to_cpdag()
    }

    /// Builds a class from explicit edge lists, checking that the result is
    /// a genuine completed PDAG.
    pub fn new(
        n: usize,
        directed: &[(usize, usize)],
        undirected: &[(usize, usize)],
    ) -> Result<Self> {
        if n > MAX_NODES {
            return Err(Error::TooLarge(format!("{n} nodes")));
        }
        let mut dir = vec![NodeSet::EMPTY; n];
        let mut und = vec![NodeSet::EMPTY; n];
        let mut seen = std::collections::HashSet::new();
        for &(u, v) in directed.iter().chain(undirected) {
            if u >= n || v >= n {
                return Err(Error::NodeOutOfRange { index: u.max(v), n });
            }
            if u == v {
                return Err(Error::Structure(format!("self-loop on node {u}")));
            }
            if !seen.insert((u.min(v), u.max(v))) {
                return Err(Error::Structure(format!("pair {u}, {v} listed twice")));
            }
        }
        for &(u, v) in directed {
            dir[v].insert(u);
        }
        for &(u, v) in undirected {
            und[u].insert(v);
            und[v].insert(u);
        }
        let candidate = Cpdag {
            directed: dir,
            undirected: und,
        };
        if candidate.first_extension().is_none() {
            return Err(Error::Structure(
                "edge set is not a completed PDAG of any DAG".into(),
            ));
        }
        Ok(candidate)
    }

    /// Orients v-structures, then closes under the three standard
    /// orientation-propagation rules.
    pub fn from_dag(g: &Dag) -> Cpdag {
        let n = g.n();
        let skel = g.skeleton();
        let mut directed = vec![NodeSet::EMPTY; n];
        let mut undirected = skel.clone();
        for (a, c, b) in g.v_structures() {
            for p in [a, b] {
                directed[c].insert(p);
                undirected[c].remove(p);
                undirected[p].remove(c);
            }
        }
        let mut c = Cpdag {
            directed,
            undirected,
        };
        c.close_orientations(&skel);
        c
    }

    fn orient(&mut self, u: usize, v: usize) {
        self.undirected[u].remove(v);
        self.undirected[v].remove(u);
        self.directed[v].insert(u);
    }

    fn close_orientations(&mut self, skel: &[NodeSet]) {
        let n = self.n();
        let adjacent = |a: usize, b: usize| skel[a].contains(b);
        loop {
            let mut changed = false;
            for b in 0..n {
                for c in self.undirected[b] {
                    // a -> b -- c, a and c non-adjacent  =>  b -> c
                    let r1 = self.directed[b].iter().any(|a| a != c && !adjacent(a, c));
                    // b -> a -> c with b -- c  =>  b -> c
                    let r2 = self.directed[c]
                        .iter()
                        .any(|a| self.directed[a].contains(b));
                    // b -- a1, b -- a2, a1 -> c <- a2, a1, a2 non-adjacent  =>  b -> c
                    let mids: Vec<usize> = self.undirected[b]
                        .intersection(self.directed[c])
                        .iter()
                        .collect();
                    let r3 = mids
                        .iter()
                        .enumerate()
                        .any(|(i, &a1)| mids[i + 1..].iter().any(|&a2| !adjacent(a1, a2)));
                    if r1 || r2 || r3 {
                        self.orient(b, c);
                        changed = true;
                    }
                }
            }
            if !changed {
                break;
            }
        }
    }

    pub fn n(&self) -> usize {
        self.directed.len()
    }

    pub fn directed_parents(&self, v: usize) -> NodeSet {
        self.directed[v]
    }

    pub fn undirected_neighbors(&self, v: usize) -> NodeSet {
        self.undirected[v]
    }

    pub fn adjacent(&self, u: usize, v: usize) -> bool {
        self.directed[v].contains(u)
            || self.directed[u].contains(v)
            || self.undirected[u].contains(v)
    }

    /// Sorted `(parent, child)` list of compelled edges.
    pub fn directed_edges(&self) -> Vec<(usize, usize)> {
        let mut out: Vec<_> = (0..self.n())
            .flat_map(|v| self.directed[v].iter().map(move |u| (u, v)))
            .collect();
        out.sort_unstable();
        out
    }

    /// Sorted `(u, v)` list with `u < v` of reversible edges.
    pub fn undirected_edges(&self) -> Vec<(usize, usize)> {
        (0..self.n())
            .flat_map(|u| {
                self.undirected[u]
                    .iter()
                    .filter(move |&v| v > u)
                    .map(move |v| (u, v))
            })
            .collect()
    }

    pub fn edge_count(&self) -> usize {
        self.directed.iter().map(|s| s.len()).sum::<usize>()
            + self.undirected.iter().map(|s| s.len()).sum::<usize>() / 2
    }

    pub fn is_complete(&self) -> bool {
        let n = self.n();
        self.edge_count() == n * n.saturating_sub(1) / 2
    }

    /// The canonical encoding: sorted directed edges, then sorted undirected edges.
    pub fn canonical_key(&self) -> CanonicalKey {
        (self.n(), self.directed_edges(), self.undirected_edges())
    }

    /// Every member DAG of the class.
    pub fn consistent_extensions(&self) -> Result<Vec<Dag>> {
        let mut out = Vec::new();
        let _ = self.walk_extensions(&mut |g| {
            out.push(g);
            ControlFlow::<()>::Continue(())
        });
        if out.is_empty() {
            return Err(Error::NoExtension);
        }
        Ok(out)
    }

    /// First member DAG in enumeration order; used as the class representative.
    pub fn representative(&self) -> Dag {
        self.first_extension()
            .expect("a completed PDAG always has a consistent extension")
    }

    fn first_extension(&self) -> Option<Dag> {
        match self.walk_extensions(&mut ControlFlow::Break) {
            ControlFlow::Break(g) => Some(g),
            ControlFlow::Continue(()) => None,
        }
    }

    /// Backtracking over orientations of the undirected edges, pruning
    /// cycles and v-structures absent from the class. Each completed
    /// orientation is accepted only if it maps back to `self`.
    fn walk_extensions<B>(&self, visit: &mut dyn FnMut(Dag) -> ControlFlow<B>) -> ControlFlow<B> {
        let n = self.n();
        let skel: Vec<NodeSet> = (0..n)
            .map(|v| {
                let mut s = self.directed[v].union(self.undirected[v]);
                for c in 0..n {
                    if self.directed[c].contains(v) {
                        s.insert(c);
                    }
                }
                s
            })
            .collect();
        let edges = self.undirected_edges();
        let mut parents = self.directed.clone();
        if topo_ok(&parents).is_none() {
            return ControlFlow::Continue(());
        }
        self.extend(0, &edges, &skel, &mut parents, visit)
    }

    fn extend<B>(
        &self,
        i: usize,
        edges: &[(usize, usize)],
        skel: &[NodeSet],
        parents: &mut Vec<NodeSet>,
        visit: &mut dyn FnMut(Dag) -> ControlFlow<B>,
    ) -> ControlFlow<B> {
        if i == edges.len() {
            let g = Dag::from_parents_unchecked(parents.clone());
            if g.to_cpdag() == *self {
                return visit(g);
            }
            return ControlFlow::Continue(());
        }
        let (a, b) = edges[i];
        for (u, v) in [(a, b), (b, a)] {
            // u -> v is reversible in the class, so any collider it forms is new.
            let introduces_collider = parents[v].iter().any(|w| !skel[u].contains(w));
            if introduces_collider || reaches(parents, v, u) {
                continue;
            }
            parents[v].insert(u);
            self.extend(i + 1, edges, skel, parents, visit)?;
            parents[v].remove(u);
        }
        ControlFlow::Continue(())
    }
}

fn topo_ok(parents: &[NodeSet]) -> Option<()> {
    super::topo_from_parents(parents).map(|_| ())
}

/// Whether a directed path `from ⇝ to` exists in the graph given by `parents`.
fn reaches(parents: &[NodeSet], from: usize, to: usize) -> bool {
    // Walk backwards from `to` through parents.
    let mut seen = NodeSet::singleton(to);
    let mut frontier = NodeSet::singleton(to);
    while let Some(x) = frontier.first() {
        frontier.remove(x);
        if x == from {
            return true;
        }
        let fresh = parents[x].difference(seen);
        seen = seen.union(fresh);
        frontier = frontier.union(fresh);
    }
    false
}

impl PartialOrd for Cpdag {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Cpdag {
    fn cmp(&self, other: &Self) -> Ordering {
        self.canonical_key().cmp(&other.canonical_key())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::equivalent;

    #[test]
    fn chain_is_fully_undirected() {
        let chain = Dag::from_edges(3, &[(0, 1), (1, 2)]).unwrap();
        let c = chain.to_cpdag();
        assert!(c.directed_edges().is_empty());
        assert_eq!(c.undirected_edges(), vec![(0, 1), (1, 2)]);
    }

    #[test]
    fn collider_stays_directed() {
        let g = Dag::from_edges(3, &[(0, 2), (1, 2)]).unwrap();
        let c = g.to_cpdag();
        assert_eq!(c.directed_edges(), vec![(0, 2), (1, 2)]);
        assert!(c.undirected_edges().is_empty());
    }

    #[test]
    fn single_edge_is_undirected() {
        let c = Dag::from_edges(2, &[(0, 1)]).unwrap().to_cpdag();
        assert_eq!(c.undirected_edges(), vec![(0, 1)]);
        let ext = c.consistent_extensions().unwrap();
        assert_eq!(ext.len(), 2);
        assert!(ext.contains(&Dag::from_edges(2, &[(1, 0)]).unwrap()));
    }

    #[test]
    fn propagation_orients_downstream_edge() {
        // 0 -> 2 <- 1, 2 -- 3 gets oriented 2 -> 3.
        let g = Dag::from_edges(4, &[(0, 2), (1, 2), (2, 3)]).unwrap();
        let c = g.to_cpdag();
        assert_eq!(c.directed_edges(), vec![(0, 2), (1, 2), (2, 3)]);
        assert_eq!(c.consistent_extensions().unwrap(), vec![g]);
    }

    #[test]
    fn triangle_has_six_extensions() {
        let c = Cpdag::complete(3);
        let ext = c.consistent_extensions().unwrap();
        assert_eq!(ext.len(), 6);
        assert!(ext.iter().all(|g| equivalent(g, &ext[0]).unwrap()));
    }

    #[test]
    fn explicit_construction_validates() {
        assert!(Cpdag::new(2, &[], &[(0, 1)]).is_ok());
        // A lone directed edge is not a completed PDAG.
        assert!(Cpdag::new(2, &[(0, 1)], &[]).is_err());
        assert!(Cpdag::new(3, &[(0, 2), (1, 2)], &[]).is_ok());
        assert!(Cpdag::new(2, &[(0, 1)], &[(0, 1)]).is_err());
        assert!(Cpdag::new(2, &[(0, 9)], &[]).is_err());
    }

    #[test]
    fn ordering_is_canonical() {
        let a = Cpdag::empty(3);
        let b = Cpdag::complete(3);
        assert!(a < b);
        assert_eq!(a.cmp(&a.clone()), Ordering::Equal);
    }
}
