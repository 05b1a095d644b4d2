//! Greedy search over equivalence classes.
//!
//! Neighborhoods are generated by enumerating the consistent extensions of
//! a class and applying single-edge edits. Moves require a strict score
//! improvement; among equally good improving neighbors the one with the
//! smallest canonical key wins.

mod trace;

pub use trace::{Phase, SearchState, SearchTrace, TraceStep};

use std::collections::BTreeMap;
use std::fmt;

use crate::error::{Error, Result};
use crate::graph::{Cpdag, Dag, VariableSpec};
use crate::scoring::Scorer;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Algorithm {
    Fes,
    Bes,
    Ges,
    Uges,
}

impl std::str::FromStr for Algorithm {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "fes" => Ok(Algorithm::Fes),
            "bes" => Ok(Algorithm::Bes),
            "ges" => Ok(Algorithm::Ges),
            "uges" => Ok(Algorithm::Uges),
            other => Err(Error::Config(format!("unknown algorithm {other:?}"))),
        }
    }
}

impl fmt::Display for Algorithm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Algorithm::Fes => "fes",
            Algorithm::Bes => "bes",
            Algorithm::Ges => "ges",
            Algorithm::Uges => "uges",
        })
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Start {
    Empty,
    Complete,
    Class(Cpdag),
}

impl Start {
    pub fn class(&self, n: usize) -> Result<Cpdag> {
        match self {
            Start::Empty => Ok(Cpdag::empty(n)),
            Start::Complete => Ok(Cpdag::complete(n)),
            Start::Class(c) if c.n() == n => Ok(c.clone()),
            Start::Class(c) => Err(Error::SizeMismatch {
                left: c.n(),
                right: n,
            }),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SearchConfig {
    pub algorithm: Algorithm,
    pub start: Start,
    /// Moves allowed per phase; `None` means `n² + n`.
    pub max_steps: Option<usize>,
}

impl Default for SearchConfig {
    fn default() -> Self {
        SearchConfig {
            algorithm: Algorithm::Ges,
            start: Start::Empty,
            max_steps: None,
        }
    }
}

impl SearchConfig {
    pub fn new(algorithm: Algorithm) -> Self {
        SearchConfig {
            algorithm,
            start: match algorithm {
                Algorithm::Bes => Start::Complete,
                _ => Start::Empty,
            },
            max_steps: None,
        }
    }

    pub fn steps_for(&self, n: usize) -> Result<usize> {
        match self.max_steps {
            Some(0) => Err(Error::Config("max_steps must be positive".into())),
            Some(s) => Ok(s),
            None => Ok(n * n + n),
        }
    }
}

/// A single-edge edit applied to a member DAG.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Edit {
    Insert(usize, usize),
    Delete(usize, usize),
}

impl Edit {
    /// `insert A -> B` or `delete A -> B` with variable names.
    pub fn describe(self, spec: &VariableSpec) -> String {
        match self {
            Edit::Insert(u, v) => format!("insert {} -> {}", spec.name(u), spec.name(v)),
            Edit::Delete(u, v) => format!("delete {} -> {}", spec.name(u), spec.name(v)),
        }
    }

    pub fn phase(self) -> Phase {
        match self {
            Edit::Insert(..) => Phase::Forward,
            Edit::Delete(..) => Phase::Backward,
        }
    }
}

impl fmt::Display for Edit {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Edit::Insert(u, v) => write!(f, "insert {u}->{v}"),
            Edit::Delete(u, v) => write!(f, "delete {u}->{v}"),
        }
    }
}

/// Neighbor classes keyed by class, each with the first edit that reached it.
pub type Neighborhood = BTreeMap<Cpdag, Edit>;

fn extensions(c: &Cpdag) -> Vec<Dag> {
    c.consistent_extensions()
        .expect("a completed PDAG always has a consistent extension")
}

fn forward_from(exts: &[Dag], out: &mut Neighborhood) {
    for g in exts {
        let n = g.n();
        for u in 0..n {
            for v in 0..n {
                if u == v || g.adjacent(u, v) {
                    continue;
                }
                if let Ok(h) = g.with_edge(u, v) {
                    out.entry(h.to_cpdag()).or_insert(Edit::Insert(u, v));
                }
            }
        }
    }
}

fn backward_from(exts: &[Dag], out: &mut Neighborhood) {
    for g in exts {
        for (u, v) in g.edges() {
            let h = g.without_edge(u, v).expect("edge present");
            out.entry(h.to_cpdag()).or_insert(Edit::Delete(u, v));
        }
    }
}

/// Classes reachable by adding one edge to some member of `c`.
pub fn forward_neighborhood(c: &Cpdag) -> Neighborhood {
    let mut out = BTreeMap::new();
    forward_from(&extensions(c), &mut out);
    out
}

/// Classes reachable by deleting one edge from some member of `c`.
pub fn backward_neighborhood(c: &Cpdag) -> Neighborhood {
    let mut out = BTreeMap::new();
    backward_from(&extensions(c), &mut out);
    out
}

pub fn forward_neighbors(c: &Cpdag) -> Vec<Cpdag> {
    forward_neighborhood(c).into_keys().collect()
}

pub fn backward_neighbors(c: &Cpdag) -> Vec<Cpdag> {
    backward_neighborhood(c).into_keys().collect()
}

/// Which single-edge edits a phase may use.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Moves {
    Forward,
    Backward,
    Both,
}

/// Score of a class, taken on its representative member.
pub fn class_score<S: Scorer + ?Sized>(scorer: &S, c: &Cpdag) -> f64 {
    scorer.score(&c.representative())
}

/// Hill-climbs from `start` until no neighbor strictly improves the score
/// or `max_steps` moves have been made.
pub fn greedy_phase<S: Scorer + ?Sized>(
    start: &Cpdag,
    moves: Moves,
    scorer: &S,
    max_steps: usize,
) -> Result<SearchTrace> {
    if start.n() != scorer.spec().len() {
        return Err(Error::SizeMismatch {
            left: start.n(),
            right: scorer.spec().len(),
        });
    }
    let first_phase = match moves {
        Moves::Backward => Phase::Backward,
        _ => Phase::Forward,
    };
    let mut trace = SearchTrace::start(first_phase, start.clone(), class_score(scorer, start));
    let mut taken = 0;
    loop {
        let current = trace.last().state.clone();
        let exts = extensions(&current.class);
        trace.set_member_count(exts.len());
        let mut hood = BTreeMap::new();
        if moves != Moves::Backward {
            forward_from(&exts, &mut hood);
        }
        if moves != Moves::Forward {
            backward_from(&exts, &mut hood);
        }
        let mut best: Option<(Cpdag, Edit, f64)> = None;
        for (class, edit) in hood {
            let s = class_score(scorer, &class);
            let threshold = best.as_ref().map_or(current.score, |b| b.2);
            if s > threshold {
                best = Some((class, edit, s));
            }
        }
        let Some((class, edit, score)) = best else {
            return Ok(trace);
        };
        if taken == max_steps {
            trace.truncated = true;
            return Ok(trace);
        }
        trace.push(edit, SearchState::new(class, score));
        taken += 1;
    }
}

pub fn fes<S: Scorer + ?Sized>(scorer: &S, start: &Cpdag, max_steps: usize) -> Result<SearchTrace> {
    greedy_phase(start, Moves::Forward, scorer, max_steps)
}

pub fn bes<S: Scorer + ?Sized>(scorer: &S, start: &Cpdag, max_steps: usize) -> Result<SearchTrace> {
    greedy_phase(start, Moves::Backward, scorer, max_steps)
}

/// Forward phase from `start`, then backward from where it stopped.
pub fn ges<S: Scorer + ?Sized>(scorer: &S, start: &Cpdag, max_steps: usize) -> Result<SearchTrace> {
    let mut trace = fes(scorer, start, max_steps)?;
    let back = bes(scorer, &trace.last().state.class, max_steps)?;
    trace.extend(back);
    Ok(trace)
}

pub fn uges<S: Scorer + ?Sized>(
    scorer: &S,
    start: &Cpdag,
    max_steps: usize,
) -> Result<SearchTrace> {
    greedy_phase(start, Moves::Both, scorer, max_steps)
}

/// Runs the configured algorithm.
pub fn search<S: Scorer + ?Sized>(scorer: &S, cfg: &SearchConfig) -> Result<SearchTrace> {
    let n = scorer.spec().len();
    let start = cfg.start.class(n)?;
    let steps = cfg.steps_for(n)?;
    match cfg.algorithm {
        Algorithm::Fes => fes(scorer, &start, steps),
        Algorithm::Bes => bes(scorer, &start, steps),
        Algorithm::Ges => ges(scorer, &start, steps),
        Algorithm::Uges => uges(scorer, &start, steps),
    }
}
