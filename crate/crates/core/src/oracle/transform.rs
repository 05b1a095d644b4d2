use std::collections::{HashMap, VecDeque};
use std::fmt;

use crate::error::{Error, Result};
use crate::graph::{included_in, Dag};

/// A single step in a transformation sequence.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Move {
    /// Reverse the covered edge `u -> v`.
    Reverse(usize, usize),
    /// Add the edge `u -> v`.
    Add(usize, usize),
}

impl fmt::Display for Move {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Move::Reverse(u, v) => write!(f, "reverse {u}->{v}"),
            Move::Add(u, v) => write!(f, "add {u}->{v}"),
        }
    }
}

impl Move {
    pub fn apply(self, g: &Dag) -> Result<Dag> {
        match self {
            Move::Reverse(u, v) => g.reverse_covered(u, v),
            Move::Add(u, v) => g.with_edge(u, v),
        }
    }
}

/// `r + 2a`: `r` edges of `h` that appear reversed in `g`, `a` edges of `h`
/// absent from `g` in either direction.
pub fn transformation_bound(g: &Dag, h: &Dag) -> usize {
    let mut r = 0;
    let mut a = 0;
    for (u, v) in h.edges() {
        if g.has_edge(v, u) {
            r += 1;
        } else if !g.has_edge(u, v) {
            a += 1;
        }
    }
    r + 2 * a
}

/// Shortest sequence of covered reversals and single-edge additions that
/// turns `g` into `h` while every intermediate DAG stays included in `h`.
///
/// Fails if `g` is not included in `h`, or if no sequence fits within
/// [`transformation_bound`].
pub fn transformation_sequence(g: &Dag, h: &Dag) -> Result<Vec<Move>> {
    if !included_in(g, h)? {
        return Err(Error::NotIncluded(
            "source is not included in target".into(),
        ));
    }
    let target_seps = h.separations();
    let bound = transformation_bound(g, h);
    let mut prev: HashMap<Dag, (Dag, Move)> = HashMap::new();
    let mut depth: HashMap<Dag, usize> = HashMap::from([(g.clone(), 0)]);
    let mut queue = VecDeque::from([g.clone()]);
    while let Some(cur) = queue.pop_front() {
        if &cur == h {
            let mut moves = Vec::new();
            let mut at = cur;
            while let Some((p, m)) = prev.get(&at) {
                moves.push(*m);
                at = p.clone();
            }
            moves.reverse();
            return Ok(moves);
        }
        let d = depth[&cur];
        if d >= bound {
            continue;
        }
        for m in candidate_moves(&cur) {
            let Ok(next) = m.apply(&cur) else { continue };
            if depth.contains_key(&next) || !target_seps.is_subset(&next.separations()) {
                continue;
            }
            depth.insert(next.clone(), d + 1);
            prev.insert(next.clone(), (cur.clone(), m));
            queue.push_back(next);
        }
    }
    Err(Error::NotIncluded(format!(
        "no transformation within {bound} steps"
    )))
}

fn candidate_moves(g: &Dag) -> Vec<Move> {
    let n = g.n();
    let mut moves: Vec<Move> = g
        .covered_edges()
        .into_iter()
        .map(|(u, v)| Move::Reverse(u, v))
        .collect();
    for u in 0..n {
        for v in 0..n {
            if u != v && !g.adjacent(u, v) {
                moves.push(Move::Add(u, v));
            }
        }
    }
    moves
}
