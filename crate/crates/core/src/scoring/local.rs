use libm::lgamma;

use super::CategoricalDataset;
use crate::error::{Error, Result};
use crate::graph::NodeSet;

/// Contingency counts `N_ijk` for one family.
///
/// Parent configurations are indexed mixed-radix over the parents in
/// ascending index order, lowest-indexed parent most significant.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SufficientStats {
    pub child: usize,
    pub parents: Vec<usize>,
    /// States of the child, `r_i`.
    pub r: usize,
    /// Parent configurations, `q_i`.
    pub q: usize,
    /// Row-major `q × r` table.
    pub counts: Vec<u64>,
}

impl SufficientStats {
    pub fn count(&self, j: usize, k: usize) -> u64 {
        self.counts[j * self.r + k]
    }

    pub fn row(&self, j: usize) -> &[u64] {
        &self.counts[j * self.r..(j + 1) * self.r]
    }

    pub fn total(&self) -> u64 {
        self.counts.iter().sum()
    }
}

pub fn tally(data: &CategoricalDataset, child: usize, parents: NodeSet) -> Result<SufficientStats> {
    let spec = data.spec();
    let n = spec.len();
    if child >= n {
        return Err(Error::NodeOutOfRange { index: child, n });
    }
    if !parents.is_subset(NodeSet::full(n)) {
        return Err(Error::Query("parent set out of range".into()));
    }
    if parents.contains(child) {
        return Err(Error::Query("child listed among its parents".into()));
    }
    let parent_list: Vec<usize> = parents.iter().collect();
    let r = spec.card(child);
    let q = spec.configurations(parents);
    let mut counts = vec![0u64; q * r];
    let child_col = data.column(child);
    let parent_cols: Vec<(&[u8], usize)> = parent_list
        .iter()
        .map(|&p| (data.column(p), spec.card(p)))
        .collect();
    for (i, &k) in child_col.iter().enumerate() {
        let mut j = 0usize;
        for &(col, card) in &parent_cols {
            j = j * card + col[i] as usize;
        }
        counts[j * r + k as usize] += 1;
    }
    Ok(SufficientStats {
        child,
        parents: parent_list,
        r,
        q,
        counts,
    })
}

/// BDeu log marginal likelihood of one family:
/// `Σ_j [lnΓ(a/q) − lnΓ(a/q + N_ij)] + Σ_jk [lnΓ(a/(rq) + N_ijk) − lnΓ(a/(rq))]`.
///
/// Terms with a zero count cancel exactly and are skipped.
pub fn bdeu_local(stats: &SufficientStats, ess: f64) -> f64 {
    let a_j = ess / stats.q as f64;
    let a_jk = a_j / stats.r as f64;
    let lg_a_j = lgamma(a_j);
    let lg_a_jk = lgamma(a_jk);
    let mut total = 0.0;
    for j in 0..stats.q {
        let row = stats.row(j);
        let n_j: u64 = row.iter().sum();
        if n_j == 0 {
            continue;
        }
        total += lg_a_j - lgamma(a_j + n_j as f64);
        for &n_jk in row {
            if n_jk > 0 {
                total += lgamma(a_jk + n_jk as f64) - lg_a_jk;
            }
        }
    }
    total
}

/// BIC of one family: maximised log-likelihood minus `q(r−1)/2 · ln m`.
/// An empty dataset scores zero.
pub fn bic_local(stats: &SufficientStats, m: usize) -> f64 {
    if m == 0 {
        return 0.0;
    }
    let mut ll = 0.0;
    for j in 0..stats.q {
        let row = stats.row(j);
        let n_j: u64 = row.iter().sum();
        for &n_jk in row {
            if n_jk > 0 {
                ll += n_jk as f64 * (n_jk as f64 / n_j as f64).ln();
            }
        }
    }
    let d_local = (stats.q * (stats.r - 1)) as f64;
    ll - 0.5 * d_local * (m as f64).ln()
}
