//! Exact brute-force ground truth for small variable sets.
//!
//! Everything here enumerates: joint tables, independence sweeps, all DAGs
//! and classes on up to five nodes, and breadth-first searches over
//! single-edge transformations. None of it is meant to scale.

mod joint;
mod transform;

pub use joint::{
    ci_holds, condition_and_marginalize, joint_from_bn, JointTable, CI_TOL, MAX_CELLS,
};
pub use transform::{transformation_bound, transformation_sequence, Move};

use std::collections::BTreeSet;

use crate::error::{Error, Result};
use crate::graph::{Cpdag, Dag, NodeSet, SeparationTable, VariableSpec};

/// Largest node count for DAG and class enumeration.
pub const MAX_ENUM_NODES: usize = 5;

/// A dependence of a singleton on a set that no member of the set carries.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct CompositionCounterexample {
    pub x: usize,
    pub y: NodeSet,
    pub z: NodeSet,
}

/// Checks composition in contrapositive form: whenever `x` depends on the
/// set `Y` given `Z`, some single `y ∈ Y` must also depend on `x` given `Z`.
///
/// Returns the first counterexample in sweep order (`x` ascending, then `Z`,
/// then `Y`, by mask), or `None` if composition holds.
pub fn composition_counterexample(p: &JointTable, tol: f64) -> Option<CompositionCounterexample> {
    let n = p.n();
    let all = NodeSet::full(n);
    for x in 0..n {
        let rest = all.without(x);
        for z in rest.subsets() {
            let avail = rest.difference(z);
            for y in avail.subsets().filter(|s| s.len() >= 2) {
                let set_dependent = !joint::ci_holds_unchecked(p, NodeSet::singleton(x), y, z, tol);
                if set_dependent
                    && y.iter().all(|yi| {
                        joint::ci_holds_unchecked(
                            p,
                            NodeSet::singleton(x),
                            NodeSet::singleton(yi),
                            z,
                            tol,
                        )
                    })
                {
                    return Some(CompositionCounterexample { x, y, z });
                }
            }
        }
    }
    None
}

pub fn composition_holds(p: &JointTable) -> bool {
    composition_counterexample(p, CI_TOL).is_none()
}

/// An independence statement `X _||_ Y | Z` over named variable sets.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct CiStatement {
    pub x: NodeSet,
    pub y: NodeSet,
    pub z: NodeSet,
}

impl CiStatement {
    /// Parses `A,B _||_ C | D,E`; the conditioning part is optional.
    pub fn parse(text: &str, spec: &VariableSpec) -> Result<Self> {
        let bad = |msg: String| Error::Query(format!("{msg} in {text:?}"));
        let (x, rest) = text
            .split_once("_||_")
            .ok_or_else(|| bad("missing _||_".into()))?;
        let (y, z) = rest.split_once('|').unwrap_or((rest, ""));
        let set = |part: &str, allow_empty: bool| -> Result<NodeSet> {
            let mut out = NodeSet::EMPTY;
            for name in part.split(',').map(str::trim).filter(|s| !s.is_empty()) {
                let v = spec
                    .index_of(name)
                    .ok_or_else(|| bad(format!("unknown variable {name:?}")))?;
                if out.contains(v) {
                    return Err(bad(format!("{name} repeated")));
                }
                out.insert(v);
            }
            if out.is_empty() && !allow_empty {
                return Err(bad("empty side".into()));
            }
            Ok(out)
        };
        let stmt = CiStatement {
            x: set(x, false)?,
            y: set(y, false)?,
            z: set(z, true)?,
        };
        if !stmt.x.is_disjoint(stmt.y) || !stmt.x.is_disjoint(stmt.z) || !stmt.y.is_disjoint(stmt.z)
        {
            return Err(bad("sets overlap".into()));
        }
        Ok(stmt)
    }

    pub fn holds(&self, p: &JointTable, tol: f64) -> Result<bool> {
        ci_holds(p, self.x, self.y, self.z, tol)
    }

    pub fn format(&self, spec: &VariableSpec) -> String {
        let names = |s: NodeSet| s.iter().map(|v| spec.name(v)).collect::<Vec<_>>().join(",");
        if self.z.is_empty() {
            format!("{} _||_ {}", names(self.x), names(self.y))
        } else {
            format!(
                "{} _||_ {} | {}",
                names(self.x),
                names(self.y),
                names(self.z)
            )
        }
    }
}

/// All DAGs on `n` nodes, in increasing order.
pub fn enumerate_dags(n: usize) -> Result<Vec<Dag>> {
    if n > MAX_ENUM_NODES {
        return Err(Error::TooLarge(format!(
            "DAG enumeration limited to {MAX_ENUM_NODES} nodes"
        )));
    }
    let pairs: Vec<(usize, usize)> = (0..n)
        .flat_map(|u| (u + 1..n).map(move |v| (u, v)))
        .collect();
    let mut out = Vec::new();
    // Each unordered pair is absent, u -> v, or v -> u.
    let total = 3usize.pow(pairs.len() as u32);
    for code in 0..total {
        let mut parents = vec![NodeSet::EMPTY; n];
        let mut c = code;
        for &(u, v) in &pairs {
            match c % 3 {
                1 => parents[v].insert(u),
                2 => parents[u].insert(v),
                _ => {}
            }
            c /= 3;
        }
        if let Ok(g) = Dag::from_parents(parents) {
            out.push(g);
        }
    }
    out.sort();
    Ok(out)
}

/// All equivalence classes on `n` nodes, in canonical order.
pub fn enumerate_classes(n: usize) -> Result<Vec<Cpdag>> {
    let set: BTreeSet<Cpdag> = enumerate_dags(n)?.iter().map(Dag::to_cpdag).collect();
    Ok(set.into_iter().collect())
}

/// `g` includes `p`: every singleton d-separation of `g` is an independence of `p`.
pub fn includes(g: &Dag, p: &JointTable) -> Result<bool> {
    if g.n() != p.n() {
        return Err(Error::SizeMismatch {
            left: g.n(),
            right: p.n(),
        });
    }
    Ok(g.separations().is_subset(&p.independencies(CI_TOL)))
}

/// One equivalence class with its representative and separation table.
#[derive(Clone, Debug)]
pub struct CatalogEntry {
    pub class: Cpdag,
    pub representative: Dag,
    pub separations: SeparationTable,
}

/// Every equivalence class on `n` nodes with its separation table, built
/// once and reused across distributions.
#[derive(Clone, Debug)]
pub struct ClassCatalog {
    n: usize,
    entries: Vec<CatalogEntry>,
}

/// Optimal classes for one distribution.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct OptimalClasses {
    pub inclusion_optimal: Vec<Cpdag>,
    pub parameter_optimal: Vec<Cpdag>,
}

impl ClassCatalog {
    pub fn new(n: usize) -> Result<Self> {
        let entries = enumerate_classes(n)?
            .into_iter()
            .map(|class| {
                let representative = class.representative();
                let separations = representative.separations();
                CatalogEntry {
                    class,
                    representative,
                    separations,
                }
            })
            .collect();
        Ok(ClassCatalog { n, entries })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn entries(&self) -> &[CatalogEntry] {
        &self.entries
    }

    fn check(&self, p: &JointTable) -> Result<()> {
        if p.n() != self.n {
            return Err(Error::SizeMismatch {
                left: self.n,
                right: p.n(),
            });
        }
        Ok(())
    }

    /// Entries whose members include `p`.
    pub fn including(&self, p: &JointTable) -> Result<Vec<&CatalogEntry>> {
        self.check(p)?;
        let ci = p.independencies(CI_TOL);
        Ok(self
            .entries
            .iter()
            .filter(|e| e.separations.is_subset(&ci))
            .collect())
    }

    /// Including classes with no strictly included class that also includes `p`.
    pub fn inclusion_optimal(&self, p: &JointTable) -> Result<Vec<Cpdag>> {
        let including = self.including(p)?;
        Ok(including
            .iter()
            .filter(|e| {
                !including.iter().any(|o| {
                    o.separations != e.separations && e.separations.is_subset(&o.separations)
                })
            })
            .map(|e| e.class.clone())
            .collect())
    }

    /// Including classes with the fewest free parameters.
    pub fn parameter_optimal(&self, p: &JointTable) -> Result<Vec<Cpdag>> {
        let including = self.including(p)?;
        let counts: Vec<u64> = including
            .iter()
            .map(|e| e.representative.parameter_count(p.spec()))
            .collect();
        let Some(&best) = counts.iter().min() else {
            return Ok(Vec::new());
        };
        Ok(including
            .iter()
            .zip(&counts)
            .filter(|(_, &c)| c == best)
            .map(|(e, _)| e.class.clone())
            .collect())
    }

    pub fn optimal(&self, p: &JointTable) -> Result<OptimalClasses> {
        Ok(OptimalClasses {
            inclusion_optimal: self.inclusion_optimal(p)?,
            parameter_optimal: self.parameter_optimal(p)?,
        })
    }
}

pub fn inclusion_optimal_classes(p: &JointTable) -> Result<Vec<Cpdag>> {
    ClassCatalog::new(p.n())?.inclusion_optimal(p)
}

pub fn parameter_optimal_classes(p: &JointTable) -> Result<Vec<Cpdag>> {
    ClassCatalog::new(p.n())?.parameter_optimal(p)
}
