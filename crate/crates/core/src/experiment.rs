//! Reproducible sweeps: for every (sample size, replicate) cell draw fresh
//! parameters for a gold standard, sample a dataset, run a search and
//! classify the learned class against the exact optima of that cell's margin.

use std::fmt;
use std::io::{Read, Write};
use std::str::FromStr;
use std::time::Instant;

use rayon::prelude::*;

use crate::datagen::{gold_four_cycle, gold_w, observed_sample, GoldStandard, RngSeed};
use crate::error::{Error, Result};
use crate::graph::{format_cpdag, one_line, Cpdag};
use crate::oracle::ClassCatalog;
use crate::scoring::{Criterion, DataScorer, OracleScorer, ScoreConfig};
use crate::search::{search, SearchConfig};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum GoldId {
    W,
    Cycle4,
}

impl GoldId {
    pub fn model(self) -> GoldStandard {
        match self {
            GoldId::W => gold_w(),
            GoldId::Cycle4 => gold_four_cycle(),
        }
    }
}

impl FromStr for GoldId {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "w" => Ok(GoldId::W),
            "cycle4" => Ok(GoldId::Cycle4),
            other => Err(Error::Config(format!("unknown gold standard {other:?}"))),
        }
    }
}

impl fmt::Display for GoldId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            GoldId::W => "w",
            GoldId::Cycle4 => "cycle4",
        })
    }
}

/// Dirichlet equivalent sample size used when drawing gold-standard CPTs.
pub const PARAMETER_ESS: f64 = 10.0;

#[derive(Clone, Debug, PartialEq)]
pub struct ExperimentPlan {
    pub gold: GoldId,
    pub sizes: Vec<usize>,
    pub replicates: usize,
    pub base_seed: u64,
    pub score: ScoreConfig,
    pub search: SearchConfig,
    /// Worker threads; 0 picks the machine default.
    pub workers: usize,
    /// Record wall time per replicate. Off by default so output is reproducible.
    pub timing: bool,
}

/// `10 · 2^k` for `k` in `0..count`.
pub fn doubling_sizes(count: u32) -> Vec<usize> {
    (0..count).map(|k| 10usize << k).collect()
}

impl ExperimentPlan {
    /// Sizes 10 to 163840, 50 replicates.
    pub fn desk(gold: GoldId) -> Self {
        ExperimentPlan {
            gold,
            sizes: doubling_sizes(15),
            replicates: 50,
            base_seed: 0,
            score: ScoreConfig::default(),
            search: SearchConfig::default(),
            workers: 0,
            timing: false,
        }
    }

    /// Sizes 10 to 655360, 100 replicates.
    pub fn paper_scale(gold: GoldId) -> Self {
        ExperimentPlan {
            sizes: doubling_sizes(17),
            replicates: 100,
            ..Self::desk(gold)
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.sizes.is_empty() {
            return Err(Error::Config("no sample sizes".into()));
        }
        if self.sizes[0] == 0 || self.sizes.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::Config(
                "sample sizes must be positive and strictly increasing".into(),
            ));
        }
        if self.replicates == 0 {
            return Err(Error::Config("replicates must be at least 1".into()));
        }
        self.score.validate()?;
        self.search.steps_for(1)?;
        Ok(())
    }
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// `base ^ splitmix64(splitmix64(m) ^ replicate)`. Parameters use stream 0
/// of this seed and the dataset stream 1.
pub fn replicate_seed(base: u64, m: usize, replicate: usize) -> u64 {
    base ^ splitmix64(splitmix64(m as u64) ^ replicate as u64)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Outcome {
    ParameterOptimal,
    InclusionOptimalOnly,
    NotInclusionOptimal,
    Error,
}

impl Outcome {
    pub fn is_inclusion_optimal(self) -> bool {
        matches!(
            self,
            Outcome::ParameterOptimal | Outcome::InclusionOptimalOnly
        )
    }
}

impl fmt::Display for Outcome {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Outcome::ParameterOptimal => "parameter_optimal",
            Outcome::InclusionOptimalOnly => "inclusion_optimal_only",
            Outcome::NotInclusionOptimal => "not_inclusion_optimal",
            Outcome::Error => "error",
        })
    }
}

impl FromStr for Outcome {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "parameter_optimal" => Ok(Outcome::ParameterOptimal),
            "inclusion_optimal_only" => Ok(Outcome::InclusionOptimalOnly),
            "not_inclusion_optimal" => Ok(Outcome::NotInclusionOptimal),
            "error" => Ok(Outcome::Error),
            other => Err(Error::Config(format!("unknown outcome {other:?}"))),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ExperimentRow {
    pub gold: GoldId,
    pub m: usize,
    pub replicate: usize,
    pub outcome: Outcome,
    /// One-line class encoding, or the error message for failed replicates.
    pub class: String,
    pub millis: u64,
}

/// A replicate row plus the learned class, when the run succeeded.
#[derive(Clone, Debug)]
pub struct ReplicateResult {
    pub row: ExperimentRow,
    pub learned: Option<Cpdag>,
}

/// Learned class against the exact optima of a margin.
pub fn classify(
    learned: &Cpdag,
    inclusion_optimal: &[Cpdag],
    parameter_optimal: &[Cpdag],
) -> Outcome {
    if !inclusion_optimal.contains(learned) {
        Outcome::NotInclusionOptimal
    } else if parameter_optimal.contains(learned) {
        Outcome::ParameterOptimal
    } else {
        Outcome::InclusionOptimalOnly
    }
}

fn learn_one(
    plan: &ExperimentPlan,
    catalog: &ClassCatalog,
    m: usize,
    replicate: usize,
) -> Result<(Cpdag, Outcome, String)> {
    let seed = replicate_seed(plan.base_seed, m, replicate);
    let gold = plan
        .gold
        .model()
        .with_parameters(PARAMETER_ESS, RngSeed::new(seed, 0))?;
    let margin = gold.exact_margin()?;
    let optimal = catalog.optimal(&margin)?;
    let trace = if plan.score.criterion == Criterion::Oracle {
        search(&OracleScorer::new(&margin, &plan.score)?, &plan.search)?
    } else {
        let data = observed_sample(&gold, m, RngSeed::new(seed, 1))?;
        search(&DataScorer::new(&data, &plan.score)?, &plan.search)?
    };
    let learned = trace.result().clone();
    let outcome = classify(
        &learned,
        &optimal.inclusion_optimal,
        &optimal.parameter_optimal,
    );
    let text = one_line(&format_cpdag(&learned, margin.spec()));
    Ok((learned, outcome, text))
}

/// Runs one cell. Failures become rows with outcome `error`.
pub fn run_replicate(
    plan: &ExperimentPlan,
    catalog: &ClassCatalog,
    m: usize,
    replicate: usize,
) -> ReplicateResult {
    let started = Instant::now();
    let result = learn_one(plan, catalog, m, replicate);
    let millis = if plan.timing {
        started.elapsed().as_millis() as u64
    } else {
        0
    };
    let (learned, outcome, class) = match result {
        Ok((c, o, t)) => (Some(c), o, t),
        Err(e) => (None, Outcome::Error, e.to_string()),
    };
    ReplicateResult {
        row: ExperimentRow {
            gold: plan.gold,
            m,
            replicate,
            outcome,
            class,
            millis,
        },
        learned,
    }
}

/// All cells of `plan`, ordered by size then replicate whatever the worker count.
pub fn run_experiment(plan: &ExperimentPlan) -> Result<Vec<ExperimentRow>> {
    plan.validate()?;
    let catalog = ClassCatalog::new(plan.gold.model().observed().len())?;
    let cells: Vec<(usize, usize)> = plan
        .sizes
        .iter()
        .flat_map(|&m| (0..plan.replicates).map(move |r| (m, r)))
        .collect();
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(plan.workers)
        .build()
        .map_err(|e| Error::Config(format!("worker pool: {e}")))?;
    Ok(pool.install(|| {
        cells
            .par_iter()
            .map(|&(m, r)| run_replicate(plan, &catalog, m, r).row)
            .collect()
    }))
}

#[derive(Clone, Debug, PartialEq)]
pub struct SizeSummary {
    pub m: usize,
    pub replicates: usize,
    pub errors: usize,
    pub inclusion_optimal: usize,
    pub parameter_optimal: usize,
}

impl SizeSummary {
    fn completed(&self) -> usize {
        self.replicates - self.errors
    }

    /// Share of completed replicates that are inclusion optimal.
    pub fn inclusion_fraction(&self) -> f64 {
        self.inclusion_optimal as f64 / self.completed() as f64
    }

    /// Share of completed replicates that are parameter optimal.
    pub fn parameter_fraction(&self) -> f64 {
        self.parameter_optimal as f64 / self.completed() as f64
    }
}

/// Per-size counts, in order of first appearance.
pub fn summarize(rows: &[ExperimentRow]) -> Vec<SizeSummary> {
    let mut out: Vec<SizeSummary> = Vec::new();
    for row in rows {
        let idx = match out.iter().position(|s| s.m == row.m) {
            Some(i) => i,
            None => {
                out.push(SizeSummary {
                    m: row.m,
                    replicates: 0,
                    errors: 0,
                    inclusion_optimal: 0,
                    parameter_optimal: 0,
                });
                out.len() - 1
            }
        };
        let s = &mut out[idx];
        s.replicates += 1;
        match row.outcome {
            Outcome::Error => s.errors += 1,
            Outcome::ParameterOptimal => {
                s.inclusion_optimal += 1;
                s.parameter_optimal += 1;
            }
            Outcome::InclusionOptimalOnly => s.inclusion_optimal += 1,
            Outcome::NotInclusionOptimal => {}
        }
    }
    out
}

pub const RESULTS_HEADER: [&str; 6] = ["gold", "m", "replicate", "outcome", "class", "millis"];

fn fraction(x: f64) -> String {
    if x.is_finite() {
        format!("{x:.6}")
    } else {
        "NA".into()
    }
}

/// Rows as CSV, then a `#`-prefixed summary block with one line per size.
pub fn write_results<W: Write>(mut w: W, rows: &[ExperimentRow]) -> Result<()> {
    {
        let mut csv = csv::Writer::from_writer(&mut w);
        csv.write_record(RESULTS_HEADER)?;
        for r in rows {
            csv.write_record([
                r.gold.to_string(),
                r.m.to_string(),
                r.replicate.to_string(),
                r.outcome.to_string(),
                r.class.clone(),
                r.millis.to_string(),
            ])?;
        }
        csv.flush()?;
    }
    writeln!(w, "# summary")?;
    writeln!(
        w,
        "# m,replicates,errors,inclusion_optimal,parameter_optimal,inclusion_fraction,parameter_fraction"
    )?;
    for s in summarize(rows) {
        writeln!(
            w,
            "# {},{},{},{},{},{},{}",
            s.m,
            s.replicates,
            s.errors,
            s.inclusion_optimal,
            s.parameter_optimal,
            fraction(s.inclusion_fraction()),
            fraction(s.parameter_fraction())
        )?;
    }
    Ok(())
}

/// Reads the rows written by [`write_results`], skipping the summary block.
pub fn read_results<R: Read>(reader: R) -> Result<Vec<ExperimentRow>> {
    let mut csv = csv::ReaderBuilder::new()
        .comment(Some(b'#'))
        .from_reader(reader);
    let header = csv.headers()?.clone();
    if header.iter().ne(RESULTS_HEADER) {
        return Err(Error::parse(1, "unexpected results header"));
    }
    let mut rows = Vec::new();
    for (i, rec) in csv.records().enumerate() {
        let rec = rec?;
        let line = i + 2;
        let field = |k: usize| rec.get(k).unwrap_or_default();
        let num = |k: usize| {
            field(k).parse::<u64>().map_err(|_| {
                Error::parse(
                    line,
                    format!("bad {} value {:?}", RESULTS_HEADER[k], field(k)),
                )
            })
        };
        rows.push(ExperimentRow {
            gold: field(0)
                .parse()
                .map_err(|e: Error| Error::parse(line, e.to_string()))?,
            m: num(1)? as usize,
            replicate: num(2)? as usize,
            outcome: field(3)
                .parse()
                .map_err(|e: Error| Error::parse(line, e.to_string()))?,
            class: field(4).to_owned(),
            millis: num(5)?,
        });
    }
    Ok(rows)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tiny(gold: GoldId) -> ExperimentPlan {
        ExperimentPlan {
            sizes: vec![10, 200],
            replicates: 3,
            base_seed: 11,
            ..ExperimentPlan::desk(gold)
        }
    }

    #[test]
    fn default_plans() {
        let desk = ExperimentPlan::desk(GoldId::W);
        assert_eq!(desk.sizes.first(), Some(&10));
        assert_eq!(desk.sizes.last(), Some(&163_840));
        assert_eq!(desk.replicates, 50);
        let paper = ExperimentPlan::paper_scale(GoldId::Cycle4);
        assert_eq!(paper.sizes.len(), 17);
        assert_eq!(paper.sizes.last(), Some(&655_360));
        assert_eq!(paper.replicates, 100);
    }

    #[test]
    fn plan_validation() {
        let mut p = tiny(GoldId::W);
        p.sizes = vec![20, 10];
        assert!(p.validate().is_err());
        p.sizes = vec![0];
        assert!(p.validate().is_err());
        p.sizes = vec![10];
        p.replicates = 0;
        assert!(p.validate().is_err());
    }

    #[test]
    fn seeds_differ_per_cell() {
        let a = replicate_seed(0, 10, 0);
        assert_ne!(a, replicate_seed(0, 10, 1));
        assert_ne!(a, replicate_seed(0, 20, 0));
        assert_eq!(replicate_seed(5, 10, 0), a ^ 5);
    }

    #[test]
    fn single_cell_plan() {
        let plan = ExperimentPlan {
            sizes: vec![10],
            replicates: 1,
            ..tiny(GoldId::W)
        };
        let rows = run_experiment(&plan).unwrap();
        assert_eq!(rows.len(), 1);
        let mut out = Vec::new();
        write_results(&mut out, &rows).unwrap();
        let text = String::from_utf8(out).unwrap();
        assert!(text.starts_with("gold,m,replicate,outcome,class,millis\n"));
        assert!(text.contains("# summary\n"));
        assert_eq!(read_results(text.as_bytes()).unwrap(), rows);
    }

    #[test]
    fn rows_are_ordered_and_reproducible() {
        for gold in [GoldId::W, GoldId::Cycle4] {
            let mut plan = tiny(gold);
            plan.workers = 1;
            let serial = run_experiment(&plan).unwrap();
            plan.workers = 4;
            let parallel = run_experiment(&plan).unwrap();
            assert_eq!(serial, parallel);
            let cells: Vec<_> = serial.iter().map(|r| (r.m, r.replicate)).collect();
            assert_eq!(
                cells,
                [(10, 0), (10, 1), (10, 2), (200, 0), (200, 1), (200, 2)]
            );
        }
    }

    #[test]
    fn summary_counts() {
        let row = |m, outcome| ExperimentRow {
            gold: GoldId::W,
            m,
            replicate: 0,
            outcome,
            class: String::new(),
            millis: 0,
        };
        let rows = [
            row(10, Outcome::ParameterOptimal),
            row(10, Outcome::NotInclusionOptimal),
            row(10, Outcome::Error),
            row(20, Outcome::InclusionOptimalOnly),
        ];
        let s = summarize(&rows);
        assert_eq!(s.len(), 2);
        assert_eq!(
            (
                s[0].replicates,
                s[0].errors,
                s[0].inclusion_optimal,
                s[0].parameter_optimal
            ),
            (3, 1, 1, 1)
        );
        assert_eq!(s[0].inclusion_fraction(), 0.5);
        assert_eq!(s[1].parameter_fraction(), 0.0);
    }

    #[test]
    fn rejects_bad_results() {
        assert!(read_results("a,b\n".as_bytes()).is_err());
        let bad = "gold,m,replicate,outcome,class,millis\nw,ten,0,error,,0\n";
        assert!(read_results(bad.as_bytes()).is_err());
        let bad = "gold,m,replicate,outcome,class,millis\nw,10,0,great,,0\n";
        assert!(read_results(bad.as_bytes()).is_err());
    }
}
