//! Parametric networks, the shifted-Dirichlet parameter sampler, forward and
//! selection-biased sampling, and the two gold-standard generative models.

mod gold;
mod model_file;

pub use gold::{gold_four_cycle, gold_w, GoldStandard, Role};
pub use model_file::{parse_model, write_model};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Gamma};

use crate::error::{Error, Result};
use crate::graph::{Dag, VariableSpec};
use crate::scoring::CategoricalDataset;

/// Seed plus stream id for a ChaCha8 generator. Distinct streams under one
/// seed are independent, so jobs can be split without sharing state.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct RngSeed {
    pub seed: u64,
    pub stream: u64,
}

impl RngSeed {
    pub fn new(seed: u64, stream: u64) -> Self {
        RngSeed { seed, stream }
    }

    pub fn rng(self) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(self.stream);
        rng
    }
}

/// A DAG with full conditional probability tables.
///
/// `cpts[i]` is a row-major `q_i × r_i` table; row `j` is the distribution
/// of node `i` under parent configuration `j` (mixed-radix, lowest-indexed
/// parent most significant).
#[derive(Clone, Debug, PartialEq)]
pub struct ParametricBn {
    structure: Dag,
    spec: VariableSpec,
    cpts: Vec<Vec<f64>>,
}

/// Tolerance on CPT row sums.
pub const ROW_SUM_TOL: f64 = 1e-12;

impl ParametricBn {
    pub fn new(structure: Dag, spec: VariableSpec, cpts: Vec<Vec<f64>>) -> Result<Self> {
        Self::with_tolerance(structure, spec, cpts, ROW_SUM_TOL)
    }

    pub(crate) fn with_tolerance(
        structure: Dag,
        spec: VariableSpec,
        cpts: Vec<Vec<f64>>,
        tol: f64,
    ) -> Result<Self> {
        if structure.n() != spec.len() || cpts.len() != spec.len() {
            return Err(Error::Spec(
                "structure, spec and CPT counts disagree".into(),
            ));
        }
        for (v, table) in cpts.iter().enumerate() {
            let r = spec.card(v);
            let q = spec.configurations(structure.parents(v));
            if table.len() != q * r {
                return Err(Error::Spec(format!(
                    "CPT of {} has {} entries, expected {}",
                    spec.name(v),
                    table.len(),
                    q * r
                )));
            }
            if table.iter().any(|&x| !(x.is_finite() && x >= 0.0)) {
                return Err(Error::Spec(format!(
                    "CPT of {} has invalid entries",
                    spec.name(v)
                )));
            }
            for row in table.chunks(r) {
                let s: f64 = row.iter().sum();
                if (s - 1.0).abs() > tol {
                    return Err(Error::Spec(format!(
                        "CPT row of {} sums to {s}",
                        spec.name(v)
                    )));
                }
            }
        }
        Ok(ParametricBn {
            structure,
            spec,
            cpts,
        })
    }

    pub fn structure(&self) -> &Dag {
        &self.structure
    }

    pub fn spec(&self) -> &VariableSpec {
        &self.spec
    }

    pub fn cpt(&self, v: usize) -> &[f64] {
        &self.cpts[v]
    }

    pub fn cpts(&self) -> &[Vec<f64>] {
        &self.cpts
    }

    /// `p(X_v = k | Pa_v = j)`.
    pub fn prob(&self, v: usize, j: usize, k: usize) -> f64 {
        self.cpts[v][j * self.spec.card(v) + k]
    }

    /// Parent configuration index of `v` in a full assignment.
    pub fn parent_config(&self, v: usize, states: &[u8]) -> usize {
        self.structure
            .parents(v)
            .iter()
            .fold(0, |j, p| j * self.spec.card(p) + states[p] as usize)
    }
}

/// Normalised `(1, 1/2, …, 1/k)`.
pub fn basis_mean(k: usize) -> Result<Vec<f64>> {
    if k < 1 {
        return Err(Error::Config("basis mean needs at least one state".into()));
    }
    let raw: Vec<f64> = (1..=k).map(|i| 1.0 / i as f64).collect();
    let total: f64 = raw.iter().sum();
    Ok(raw.into_iter().map(|x| x / total).collect())
}

/// Cyclic right shift of `mu` by `j mod k` places.
pub fn shifted_mean(mu: &[f64], j: usize) -> Vec<f64> {
    let k = mu.len();
    if k == 0 {
        return Vec::new();
    }
    let s = j % k;
    let mut out = vec![0.0; k];
    for (i, &x) in mu.iter().enumerate() {
        out[(i + s) % k] = x;
    }
    out
}

/// Draws every CPT row from a Dirichlet whose mean is the basis mean
/// shifted by the (1-based) parent configuration index, scaled by `ess`.
///
/// Draw order is node index, then configuration, then state, so the result
/// is a pure function of the seed.
pub fn sample_parameters(
    structure: &Dag,
    spec: &VariableSpec,
    ess: f64,
    seed: RngSeed,
) -> Result<ParametricBn> {
    if !(ess > 0.0 && ess.is_finite()) {
        return Err(Error::Config(format!("ess must be positive, got {ess}")));
    }
    if structure.n() != spec.len() {
        return Err(Error::SizeMismatch {
            left: structure.n(),
            right: spec.len(),
        });
    }
    let mut rng = seed.rng();
    let mut cpts = Vec::with_capacity(spec.len());
    for v in 0..spec.len() {
        let r = spec.card(v);
        let q = spec.configurations(structure.parents(v));
        let basis = basis_mean(r)?;
        let mut table = Vec::with_capacity(q * r);
        for j in 0..q {
            let alpha: Vec<f64> = shifted_mean(&basis, j + 1)
                .iter()
                .map(|m| ess * m)
                .collect();
            table.extend(dirichlet(&mut rng, &alpha));
        }
        cpts.push(table);
    }
    ParametricBn::new(structure.clone(), spec.clone(), cpts)
}

fn dirichlet<R: Rng>(rng: &mut R, alpha: &[f64]) -> Vec<f64> {
    let draws: Vec<f64> = alpha
        .iter()
        .map(|&a| Gamma::new(a, 1.0).expect("positive shape").sample(rng))
        .collect();
    let total: f64 = draws.iter().sum();
    if total > 0.0 {
        draws.into_iter().map(|x| x / total).collect()
    } else {
        // All components underflowed; fall back to the mean.
        let s: f64 = alpha.iter().sum();
        alpha.iter().map(|a| a / s).collect()
    }
}

/// Ancestral sampler reusing one generator across records.
struct AncestralSampler<'a> {
    bn: &'a ParametricBn,
    order: Vec<usize>,
}

impl<'a> AncestralSampler<'a> {
    fn new(bn: &'a ParametricBn) -> Self {
        AncestralSampler {
            bn,
            order: bn.structure.topological_order(),
        }
    }

    fn draw<R: Rng>(&self, rng: &mut R, states: &mut [u8]) {
        for &v in &self.order {
            let r = self.bn.spec.card(v);
            let j = self.bn.parent_config(v, states);
            let row = &self.bn.cpts[v][j * r..(j + 1) * r];
            let u: f64 = rng.random();
            let mut acc = 0.0;
            let mut k = r - 1;
            for (i, &p) in row.iter().enumerate() {
                acc += p;
                if u < acc {
                    k = i;
                    break;
                }
            }
            states[v] = k as u8;
        }
    }
}

/// `m` i.i.d. records over all variables of `bn`.
pub fn forward_sample(bn: &ParametricBn, m: usize, seed: RngSeed) -> CategoricalDataset {
    let n = bn.spec.len();
    let sampler = AncestralSampler::new(bn);
    let mut rng = seed.rng();
    let mut columns = vec![Vec::with_capacity(m); n];
    let mut states = vec![0u8; n];
    for _ in 0..m {
        sampler.draw(&mut rng, &mut states);
        for (col, &s) in columns.iter_mut().zip(&states) {
            col.push(s);
        }
    }
    CategoricalDataset::from_columns_unchecked(bn.spec.clone(), columns)
}

/// Draws between acceptance-rate checks in [`observed_sample`].
const SELECTION_BATCH: u64 = 1_000_000;
/// Estimated acceptance probability below which selection sampling aborts.
const MIN_ACCEPTANCE: f64 = 1e-6;

/// `m` records over the observed variables of `gold`: raw draws whose
/// selection variables differ from their required values are discarded,
/// then hidden and selection columns are dropped.
pub fn observed_sample(gold: &GoldStandard, m: usize, seed: RngSeed) -> Result<CategoricalDataset> {
    let bn = gold.bn()?;
    let observed = gold.observed();
    let required = gold.selection_values();
    if required.is_empty() {
        return Ok(forward_sample(&bn, m, seed).project(observed));
    }
    let n = bn.spec.len();
    let sampler = AncestralSampler::new(&bn);
    let mut rng = seed.rng();
    let keep: Vec<usize> = observed.iter().collect();
    let mut columns = vec![Vec::with_capacity(m); keep.len()];
    let mut states = vec![0u8; n];
    let mut accepted = 0usize;
    let mut draws = 0u64;
    while accepted < m {
        sampler.draw(&mut rng, &mut states);
        draws += 1;
        if required.iter().all(|&(v, s)| states[v] == s) {
            for (col, &v) in columns.iter_mut().zip(&keep) {
                col.push(states[v]);
            }
            accepted += 1;
        }
        if draws.is_multiple_of(SELECTION_BATCH) {
            let estimate = accepted as f64 / draws as f64;
            if estimate < MIN_ACCEPTANCE {
                return Err(Error::SelectionAbort { draws, estimate });
            }
        }
    }
    Ok(CategoricalDataset::from_columns_unchecked(
        bn.spec.restrict(observed),
        columns,
    ))
}
