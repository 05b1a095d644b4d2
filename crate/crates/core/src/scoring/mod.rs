//! Decomposable scoring criteria.
//!
//! Every criterion here is a sum of per-family terms `s(X_i, Pa_i)`, so a
//! [`Scorer`] only has to supply [`Scorer::local`]; totals and cached
//! evaluation come for free.

mod dataset;
mod local;

pub use dataset::{
    read_dataset, read_schema, write_dataset, write_schema, Cards, CategoricalDataset,
};
pub use local::{bdeu_local, bic_local, tally, SufficientStats};

use std::collections::HashMap;
use std::sync::RwLock;

use crate::error::{Error, Result};
use crate::graph::{Dag, NodeSet, VariableSpec};
use crate::oracle::JointTable;

/// Which criterion a [`ScoreConfig`] selects.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Criterion {
    Bdeu,
    Bic,
    Oracle,
}

impl std::str::FromStr for Criterion {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "bdeu" => Ok(Criterion::Bdeu),
            "bic" => Ok(Criterion::Bic),
            "oracle" => Ok(Criterion::Oracle),
            other => Err(Error::Config(format!("unknown score {other:?}"))),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ScoreConfig {
    pub criterion: Criterion,
    /// Equivalent sample size for BDeu.
    pub ess: f64,
    /// Constant log structure prior added to every total.
    pub structure_prior: f64,
    /// Effective sample size of the oracle criterion.
    pub oracle_pseudo_m: f64,
}

impl Default for ScoreConfig {
    fn default() -> Self {
        ScoreConfig {
            criterion: Criterion::Bdeu,
            ess: 10.0,
            structure_prior: 0.0,
            oracle_pseudo_m: 1e6,
        }
    }
}

impl ScoreConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.ess > 0.0 && self.ess.is_finite()) {
            return Err(Error::Config(format!(
                "ess must be positive, got {}",
                self.ess
            )));
        }
        if !(self.oracle_pseudo_m > 0.0 && self.oracle_pseudo_m.is_finite()) {
            return Err(Error::Config(format!(
                "oracle pseudo sample size must be positive, got {}",
                self.oracle_pseudo_m
            )));
        }
        Ok(())
    }
}

/// Memo of local scores keyed by `(child, parent set)`.
///
/// Inserts are insert-if-absent, so concurrent readers may duplicate work
/// but always observe the same value.
#[derive(Debug, Default)]
pub struct LocalScoreCache {
    map: RwLock<HashMap<(usize, NodeSet), f64>>,
}

impl LocalScoreCache {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn get(&self, child: usize, parents: NodeSet) -> Option<f64> {
        self.map.read().unwrap().get(&(child, parents)).copied()
    }

    pub fn get_or_insert_with(
        &self,
        child: usize,
        parents: NodeSet,
        f: impl FnOnce() -> f64,
    ) -> f64 {
        if let Some(v) = self.get(child, parents) {
            return v;
        }
        let value = f();
        *self
            .map
            .write()
            .unwrap()
            .entry((child, parents))
            .or_insert(value)
    }

    pub fn len(&self) -> usize {
        self.map.read().unwrap().len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

/// A decomposable scoring criterion over a fixed variable set.
pub trait Scorer: Sync {
    fn spec(&self) -> &VariableSpec;

    /// Local term for `child` with the given parents (uncached).
    fn local(&self, child: usize, parents: NodeSet) -> f64;

    fn cache(&self) -> &LocalScoreCache;

    /// Constant added to every total.
    fn structure_prior(&self) -> f64 {
        0.0
    }

    fn cached_local(&self, child: usize, parents: NodeSet) -> f64 {
        self.cache()
            .get_or_insert_with(child, parents, || self.local(child, parents))
    }

    /// `Σ_i s(X_i, Pa_i) + prior`.
    fn score(&self, g: &Dag) -> f64 {
        let total: f64 = (0..g.n()).map(|v| self.cached_local(v, g.parents(v))).sum();
        total + self.structure_prior()
    }
}

/// BDeu or BIC over a dataset.
#[derive(Debug)]
pub struct DataScorer<'a> {
    data: &'a CategoricalDataset,
    criterion: Criterion,
    ess: f64,
    prior: f64,
    cache: LocalScoreCache,
}

impl<'a> DataScorer<'a> {
    pub fn new(data: &'a CategoricalDataset, cfg: &ScoreConfig) -> Result<Self> {
        cfg.validate()?;
        if cfg.criterion == Criterion::Oracle {
            return Err(Error::Config(
                "the oracle score needs a joint table, not data".into(),
            ));
        }
        Ok(DataScorer {
            data,
            criterion: cfg.criterion,
            ess: cfg.ess,
            prior: cfg.structure_prior,
            cache: LocalScoreCache::new(),
        })
    }
}

impl Scorer for DataScorer<'_> {
    fn spec(&self) -> &VariableSpec {
        self.data.spec()
    }

    fn local(&self, child: usize, parents: NodeSet) -> f64 {
        let stats = tally(self.data, child, parents).expect("family within the dataset");
        match self.criterion {
            Criterion::Bdeu => bdeu_local(&stats, self.ess),
            Criterion::Bic => bic_local(&stats, self.data.len()),
            Criterion::Oracle => unreachable!("rejected in DataScorer::new"),
        }
    }

    fn cache(&self) -> &LocalScoreCache {
        &self.cache
    }

    fn structure_prior(&self) -> f64 {
        self.prior
    }
}

/// Deterministic large-sample criterion evaluated on an exact joint table:
/// `pseudo_m · E_p[log p_G*(O)] − (d/2) · log pseudo_m`, where `p_G*` takes
/// its conditionals straight from `p`.
#[derive(Debug)]
pub struct OracleScorer<'a> {
    joint: &'a JointTable,
    pseudo_m: f64,
    prior: f64,
    cache: LocalScoreCache,
}

impl<'a> OracleScorer<'a> {
    pub fn new(joint: &'a JointTable, cfg: &ScoreConfig) -> Result<Self> {
        cfg.validate()?;
        Ok(OracleScorer {
            joint,
            pseudo_m: cfg.oracle_pseudo_m,
            prior: cfg.structure_prior,
            cache: LocalScoreCache::new(),
        })
    }
}

impl Scorer for OracleScorer<'_> {
    fn spec(&self) -> &VariableSpec {
        self.joint.spec()
    }

    fn local(&self, child: usize, parents: NodeSet) -> f64 {
        oracle_local(self.joint, child, parents, self.pseudo_m)
    }

    fn cache(&self) -> &LocalScoreCache {
        &self.cache
    }

    fn structure_prior(&self) -> f64 {
        self.prior
    }
}

/// Oracle local term. Parent configurations with zero probability get a
/// uniform conditional row, which carries zero expected weight.
pub fn oracle_local(p: &JointTable, child: usize, parents: NodeSet, pseudo_m: f64) -> f64 {
    let spec = p.spec();
    let r = spec.card(child);
    let q = spec.configurations(parents);
    // Marginal over parents ∪ {child}; child is placed last in the index so
    // each parent configuration owns a contiguous run of r cells.
    let family: Vec<usize> = parents.iter().chain(std::iter::once(child)).collect();
    let table = p.marginal_ordered(&family);
    let mut expected_ll = 0.0;
    for j in 0..q {
        let row = &table[j * r..(j + 1) * r];
        let pj: f64 = row.iter().sum();
        if pj <= 0.0 {
            continue;
        }
        for &pjk in row {
            if pjk > 0.0 {
                expected_ll += pjk * (pjk / pj).ln();
            }
        }
    }
    let d_local = (q * (r - 1)) as f64;
    pseudo_m * expected_ll - 0.5 * d_local * pseudo_m.ln()
}

/// Scores `g` under `cfg` against a dataset.
pub fn score(g: &Dag, data: &CategoricalDataset, cfg: &ScoreConfig) -> Result<f64> {
    check_graph(g, data.spec())?;
    Ok(DataScorer::new(data, cfg)?.score(g))
}

/// Scores `g` with the oracle criterion.
pub fn oracle_score(g: &Dag, p: &JointTable, pseudo_m: f64) -> Result<f64> {
    check_graph(g, p.spec())?;
    let cfg = ScoreConfig {
        criterion: Criterion::Oracle,
        oracle_pseudo_m: pseudo_m,
        ..ScoreConfig::default()
    };
    Ok(OracleScorer::new(p, &cfg)?.score(g))
}

fn check_graph(g: &Dag, spec: &VariableSpec) -> Result<()> {
    if g.n() != spec.len() {
        return Err(Error::SizeMismatch {
            left: g.n(),
            right: spec.len(),
        });
    }
    Ok(())
}
