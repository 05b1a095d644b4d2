//! Directed acyclic graphs, d-separation, and equivalence-class machinery.
//!
//! Nodes are identified by index; variable names live only in
//! [`VariableSpec`]. Parent sets are stored as [`NodeSet`] bit masks, which
//! caps graphs at 64 nodes.

mod cpdag;
mod encoding;
mod nodeset;

pub use cpdag::{CanonicalKey, Cpdag};
pub use encoding::{format_cpdag, format_dag, one_line, parse_cpdag, parse_dag};
pub use nodeset::{NodeSet, MAX_NODES};

use std::collections::HashSet;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Names and state counts of a set of categorical variables.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct VariableSpec {
    names: Vec<String>,
    cards: Vec<usize>,
}

/// Largest state count a variable may have; states are stored as `u8`.
pub const MAX_CARD: usize = 256;

impl VariableSpec {
    pub fn new(names: Vec<String>, cards: Vec<usize>) -> Result<Self> {
        if names.len() != cards.len() {
            return Err(Error::Spec(format!(
                "{} names but {} cardinalities",
                names.len(),
                cards.len()
            )));
        }
        if names.len() > MAX_NODES {
            return Err(Error::Spec(format!("at most {MAX_NODES} variables")));
        }
        let mut seen = HashSet::new();
        for name in &names {
            if name.is_empty()
                || name.trim() != name
                || name.contains(['\n', '\r', ',', ';', '|', '"'])
                || name.contains("->")
                || name.contains("--")
            {
                return Err(Error::Spec(format!("invalid variable name {name:?}")));
            }
            if !seen.insert(name.as_str()) {
                return Err(Error::Spec(format!("duplicate variable name {name:?}")));
            }
        }
        if let Some((i, &c)) = cards
            .iter()
            .enumerate()
            .find(|(_, &c)| c == 0 || c > MAX_CARD)
        {
            return Err(Error::Spec(format!(
                "variable {:?} has cardinality {c}, expected 1..={MAX_CARD}",
                names[i]
            )));
        }
        Ok(VariableSpec { names, cards })
    }

    /// Variables named `X1..Xn` with the given cardinalities.
    pub fn numbered(cards: &[usize]) -> Self {
        let names = (1..=cards.len()).map(|i| format!("X{i}")).collect();
        VariableSpec::new(names, cards.to_vec()).expect("numbered spec is valid")
    }

    pub fn len(&self) -> usize {
        self.names.len()
    }

    pub fn is_empty(&self) -> bool {
        self.names.is_empty()
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn cards(&self) -> &[usize] {
        &self.cards
    }

    pub fn card(&self, v: usize) -> usize {
        self.cards[v]
    }

    pub fn name(&self, v: usize) -> &str {
        &self.names[v]
    }

    pub fn index_of(&self, name: &str) -> Option<usize> {
        self.names.iter().position(|n| n == name)
    }

    /// Restriction to the variables in `keep`, preserving order.
    pub fn restrict(&self, keep: NodeSet) -> VariableSpec {
        VariableSpec {
            names: keep.iter().map(|v| self.names[v].clone()).collect(),
            cards: keep.iter().map(|v| self.cards[v]).collect(),
        }
    }

    /// Number of joint configurations of `vars`.
    pub fn configurations(&self, vars: NodeSet) -> usize {
        vars.iter().map(|v| self.cards[v]).product()
    }
}

/// Deterministic topological order of the graph given by `n` and `edges`;
/// ties are broken by smallest node index.
pub fn topological_order(n: usize, edges: &[(usize, usize)]) -> Result<Vec<usize>> {
    if n > MAX_NODES {
        return Err(Error::TooLarge(format!("{n} nodes, at most {MAX_NODES}")));
    }
    let mut parents = vec![NodeSet::EMPTY; n];
    for &(u, v) in edges {
        check_node(u, n)?;
        check_node(v, n)?;
        if u == v {
            return Err(Error::Structure(format!("self-loop on node {u}")));
        }
        parents[v].insert(u);
    }
    topo_from_parents(&parents).ok_or(Error::Cycle)
}

fn topo_from_parents(parents: &[NodeSet]) -> Option<Vec<usize>> {
    let n = parents.len();
    let mut placed = NodeSet::EMPTY;
    let mut order = Vec::with_capacity(n);
    while order.len() < n {
        let next = (0..n).find(|&v| !placed.contains(v) && parents[v].is_subset(placed))?;
        placed.insert(next);
        order.push(next);
    }
    Some(order)
}

fn check_node(v: usize, n: usize) -> Result<()> {
    if v < n {
        Ok(())
    } else {
        Err(Error::NodeOutOfRange { index: v, n })
    }
}

/// A directed acyclic graph over nodes `0..n`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Dag {
    parents: Vec<NodeSet>,
}

impl Dag {
    pub fn empty(n: usize) -> Self {
        assert!(n <= MAX_NODES);
        Dag {
            parents: vec![NodeSet::EMPTY; n],
        }
    }

    /// Complete DAG consistent with the index order (`u -> v` for all `u < v`).
    pub fn complete(n: usize) -> Self {
        assert!(n <= MAX_NODES);
        Dag {
            parents: (0..n).map(NodeSet::full).collect(),
        }
    }

    pub fn from_edges(n: usize, edges: &[(usize, usize)]) -> Result<Self> {
        topological_order(n, edges)?;
        let mut parents = vec![NodeSet::EMPTY; n];
        for &(u, v) in edges {
            parents[v].insert(u);
        }
        Ok(Dag { parents })
    }

    /// Builds from per-node parent sets, validating acyclicity.
    pub fn from_parents(parents: Vec<NodeSet>) -> Result<Self> {
        let n = parents.len();
        if n > MAX_NODES {
            return Err(Error::TooLarge(format!("{n} nodes")));
        }
        for (v, pa) in parents.iter().enumerate() {
            if pa.contains(v) {
                return Err(Error::Structure(format!("self-loop on node {v}")));
            }
            if !pa.is_subset(NodeSet::full(n)) {
                return Err(Error::NodeOutOfRange {
                    index: pa.iter().last().unwrap_or(0),
                    n,
                });
            }
        }
        topo_from_parents(&parents).ok_or(Error::Cycle)?;
        Ok(Dag { parents })
    }

    pub(crate) fn from_parents_unchecked(parents: Vec<NodeSet>) -> Self {
        debug_assert!(topo_from_parents(&parents).is_some());
        Dag { parents }
    }

    pub fn n(&self) -> usize {
        self.parents.len()
    }

    pub fn parents(&self, v: usize) -> NodeSet {
        self.parents[v]
    }

    pub fn parent_sets(&self) -> &[NodeSet] {
        &self.parents
    }

    pub fn children(&self, v: usize) -> NodeSet {
        (0..self.n())
            .filter(|&c| self.parents[c].contains(v))
            .collect()
    }

    pub fn has_edge(&self, u: usize, v: usize) -> bool {
        v < self.n() && self.parents[v].contains(u)
    }

    pub fn adjacent(&self, u: usize, v: usize) -> bool {
        self.has_edge(u, v) || self.has_edge(v, u)
    }

    pub fn edge_count(&self) -> usize {
        self.parents.iter().map(|p| p.len()).sum()
    }

    /// Edges `(parent, child)` sorted lexicographically.
    pub fn edges(&self) -> Vec<(usize, usize)> {
        let mut out: Vec<_> = (0..self.n())
            .flat_map(|v| self.parents[v].iter().map(move |u| (u, v)))
            .collect();
        out.sort_unstable();
        out
    }

    pub fn topological_order(&self) -> Vec<usize> {
        topo_from_parents(&self.parents).expect("Dag is acyclic")
    }

    /// Nodes reachable from `u` by a directed path (excluding `u` unless on a cycle).
    pub fn descendants(&self, u: usize) -> NodeSet {
        let mut seen = NodeSet::EMPTY;
        let mut frontier = NodeSet::singleton(u);
        while let Some(x) = frontier.first() {
            frontier.remove(x);
            for c in self.children(x) {
                if !seen.contains(c) {
                    seen.insert(c);
                    frontier.insert(c);
                }
            }
        }
        seen
    }

    /// `set` together with all of its ancestors.
    pub fn ancestral_closure(&self, set: NodeSet) -> NodeSet {
        let mut closed = set;
        let mut frontier = set;
        while let Some(x) = frontier.first() {
            frontier.remove(x);
            let fresh = self.parents[x].difference(closed);
            closed = closed.union(fresh);
            frontier = frontier.union(fresh);
        }
        closed
    }

    /// Adds `u -> v`; fails if the nodes are already adjacent or a cycle would form.
    pub fn with_edge(&self, u: usize, v: usize) -> Result<Dag> {
        check_node(u, self.n())?;
        check_node(v, self.n())?;
        if u == v || self.adjacent(u, v) {
            return Err(Error::Structure(format!("cannot add {u} -> {v}")));
        }
        if self.descendants(v).contains(u) {
            return Err(Error::Cycle);
        }
        let mut parents = self.parents.clone();
        parents[v].insert(u);
        Ok(Dag { parents })
    }

    pub fn without_edge(&self, u: usize, v: usize) -> Result<Dag> {
        if !self.has_edge(u, v) {
            return Err(Error::EdgeAbsent(u, v));
        }
        let mut parents = self.parents.clone();
        parents[v].remove(u);
        Ok(Dag { parents })
    }

    /// Adjacency sets of the underlying undirected graph.
    pub fn skeleton(&self) -> Vec<NodeSet> {
        let n = self.n();
        let mut adj = vec![NodeSet::EMPTY; n];
        for v in 0..n {
            for u in self.parents[v] {
                adj[u].insert(v);
                adj[v].insert(u);
            }
        }
        adj
    }

    /// Unshielded colliders `a -> c <- b` with `a < b`, as `(a, c, b)`, sorted.
    pub fn v_structures(&self) -> Vec<(usize, usize, usize)> {
        let mut out = Vec::new();
        for c in 0..self.n() {
            let pa: Vec<usize> = self.parents[c].iter().collect();
            for (i, &a) in pa.iter().enumerate() {
                for &b in &pa[i + 1..] {
                    if !self.adjacent(a, b) {
                        out.push((a, c, b));
                    }
                }
            }
        }
        out.sort_unstable();
        out
    }

    /// Whether `u -> v` is covered: `Pa(v) = Pa(u) ∪ {u}`.
    pub fn is_covered(&self, u: usize, v: usize) -> Result<bool> {
        check_node(u, self.n())?;
        check_node(v, self.n())?;
        if !self.has_edge(u, v) {
            return Err(Error::EdgeAbsent(u, v));
        }
        Ok(self.parents[v] == self.parents[u].with(u))
    }

    /// Reverses a covered edge; the result is in the same equivalence class.
    pub fn reverse_covered(&self, u: usize, v: usize) -> Result<Dag> {
        if !self.is_covered(u, v)? {
            return Err(Error::NotCovered(u, v));
        }
        let mut parents = self.parents.clone();
        parents[v].remove(u);
        parents[u].insert(v);
        Ok(Dag::from_parents_unchecked(parents))
    }

    /// Covered edges of the graph, sorted.
    pub fn covered_edges(&self) -> Vec<(usize, usize)> {
        self.edges()
            .into_iter()
            .filter(|&(u, v)| self.parents[v] == self.parents[u].with(u))
            .collect()
    }

    /// Free parameters of a full-table parametrization:
    /// `Σ_i (r_i − 1) · Π_{p ∈ Pa_i} r_p`.
    pub fn parameter_count(&self, spec: &VariableSpec) -> u64 {
        assert_eq!(spec.len(), self.n(), "spec does not match graph size");
        (0..self.n())
            .map(|v| (spec.card(v) as u64 - 1) * spec.configurations(self.parents[v]) as u64)
            .sum()
    }

    /// Whether `x` and `y` are d-separated given `z`.
    pub fn d_separated(&self, q: &SepQuery) -> Result<bool> {
        let n = self.n();
        check_node(q.x, n)?;
        check_node(q.y, n)?;
        if !q.z.is_subset(NodeSet::full(n)) {
            return Err(Error::Query("conditioning set out of range".into()));
        }
        Ok(self.sets_d_separated(NodeSet::singleton(q.x), NodeSet::singleton(q.y), q.z))
    }

    /// Set form of d-separation via the moralized ancestral graph of `x ∪ y ∪ z`.
    /// The three sets must be pairwise disjoint.
    pub fn sets_d_separated(&self, x: NodeSet, y: NodeSet, z: NodeSet) -> bool {
        let anc = self.ancestral_closure(x.union(y).union(z));
        let n = self.n();
        let mut moral = vec![NodeSet::EMPTY; n];
        for v in anc {
            let pa = self.parents[v];
            for p in pa {
                moral[v].insert(p);
                moral[p].insert(v);
                moral[p] = moral[p].union(pa.without(p));
            }
        }
        let open = anc.difference(z);
        let mut reached = x;
        let mut frontier = x;
        while let Some(u) = frontier.first() {
            frontier.remove(u);
            let fresh = moral[u].intersection(open).difference(reached);
            if !fresh.is_disjoint(y) {
                return false;
            }
            reached = reached.union(fresh);
            frontier = frontier.union(fresh);
        }
        true
    }

    /// All singleton d-separation statements of the graph.
    pub fn separations(&self) -> SeparationTable {
        SeparationTable::build(self.n(), |x, y, z| {
            self.sets_d_separated(NodeSet::singleton(x), NodeSet::singleton(y), z)
        })
    }

    pub fn to_cpdag(&self) -> Cpdag {
        Cpdag::from_dag(self)
    }
}

/// Same skeleton and same v-structures.
pub fn equivalent(g1: &Dag, g2: &Dag) -> Result<bool> {
    same_size(g1, g2)?;
    Ok(g1.skeleton() == g2.skeleton() && g1.v_structures() == g2.v_structures())
}

/// `g ≤ h`: every d-separation of `h` also holds in `g`.
pub fn included_in(g: &Dag, h: &Dag) -> Result<bool> {
    same_size(g, h)?;
    Ok(h.separations().is_subset(&g.separations()))
}

fn same_size(a: &Dag, b: &Dag) -> Result<()> {
    if a.n() != b.n() {
        return Err(Error::SizeMismatch {
            left: a.n(),
            right: b.n(),
        });
    }
    Ok(())
}

/// A d-separation query `x ⫫ y | z` over single nodes.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct SepQuery {
    pub x: usize,
    pub y: usize,
    pub z: NodeSet,
}

impl SepQuery {
    pub fn new(x: usize, y: usize, z: NodeSet) -> Result<Self> {
        if x == y {
            return Err(Error::Query("x and y must differ".into()));
        }
        if z.contains(x) || z.contains(y) {
            return Err(Error::Query("conditioning set contains an endpoint".into()));
        }
        Ok(SepQuery { x, y, z })
    }
}

/// Truth table of singleton statements `x ⫫ y | z` for `x < y`, `z ⊆ V \ {x, y}`.
///
/// Used both for graphical separations and for independencies of a joint
/// distribution, so that inclusion checks reduce to subset tests.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct SeparationTable {
    n: usize,
    bits: Vec<u64>,
}

impl SeparationTable {
    pub fn build(n: usize, mut holds: impl FnMut(usize, usize, NodeSet) -> bool) -> Self {
        assert!(n <= 16, "separation tables are for small graphs");
        let slots = (n * n) << n;
        let mut bits = vec![0u64; slots.div_ceil(64)];
        let all = NodeSet::full(n);
        for x in 0..n {
            for y in x + 1..n {
                for z in all.without(x).without(y).subsets() {
                    if holds(x, y, z) {
                        let i = Self::slot(n, x, y, z);
                        bits[i / 64] |= 1 << (i % 64);
                    }
                }
            }
        }
        SeparationTable { n, bits }
    }

    fn slot(n: usize, x: usize, y: usize, z: NodeSet) -> usize {
        ((x * n + y) << n) | z.bits() as usize
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn holds(&self, x: usize, y: usize, z: NodeSet) -> bool {
        let (x, y) = if x < y { (x, y) } else { (y, x) };
        let i = Self::slot(self.n, x, y, z);
        self.bits[i / 64] & (1 << (i % 64)) != 0
    }

    pub fn is_subset(&self, other: &SeparationTable) -> bool {
        self.n == other.n && self.bits.iter().zip(&other.bits).all(|(a, b)| a & !b == 0)
    }

    pub fn count(&self) -> usize {
        self.bits.iter().map(|b| b.count_ones() as usize).sum()
    }

    /// Statements `(x, y, z)` that hold, in slot order.
    pub fn statements(&self) -> Vec<(usize, usize, NodeSet)> {
        let n = self.n;
        let all = NodeSet::full(n);
        let mut out = Vec::new();
        for x in 0..n {
            for y in x + 1..n {
                for z in all.without(x).without(y).subsets() {
                    if self.holds(x, y, z) {
                        out.push((x, y, z));
                    }
                }
            }
        }
        out
    }
}
