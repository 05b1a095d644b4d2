use std::fs;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};

use ges_core::datagen::{observed_sample, parse_model, write_model, GoldStandard, RngSeed};
use ges_core::experiment::{run_experiment, write_results, ExperimentPlan, GoldId, PARAMETER_ESS};
use ges_core::graph::{
    format_cpdag, format_dag, parse_cpdag, parse_dag, Dag, NodeSet, VariableSpec,
};
use ges_core::oracle::{composition_counterexample, CiStatement, ClassCatalog, JointTable, CI_TOL};
use ges_core::scoring::{
    read_dataset, read_schema, write_dataset, write_schema, Cards, CategoricalDataset, Criterion,
    DataScorer, OracleScorer, ScoreConfig, Scorer,
};
use ges_core::search::{search, Algorithm, SearchConfig, SearchTrace, Start};

#[derive(Parser)]
#[command(
    name = "ges",
    version,
    about = "Greedy equivalence search over Bayesian-network structures"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Draw parameters for a gold standard and sample a dataset of its observables.
    Generate(GenerateArgs),
    /// Learn an equivalence class from data (or from a model's exact margin).
    Learn(LearnArgs),
    /// Score a DAG against data or a model's exact margin.
    Score(ScoreArgs),
    /// Exact optima, composition and independence queries for a model's margin.
    Oracle(OracleArgs),
    /// Run a sample-size sweep and write a results table.
    Experiment(ExperimentArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum GoldArg {
    W,
    Cycle4,
}

impl From<GoldArg> for GoldId {
    fn from(g: GoldArg) -> Self {
        match g {
            GoldArg::W => GoldId::W,
            GoldArg::Cycle4 => GoldId::Cycle4,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum ScoreArg {
    Bdeu,
    Bic,
    Oracle,
}

impl From<ScoreArg> for Criterion {
    fn from(s: ScoreArg) -> Self {
        match s {
            ScoreArg::Bdeu => Criterion::Bdeu,
            ScoreArg::Bic => Criterion::Bic,
            ScoreArg::Oracle => Criterion::Oracle,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum AlgorithmArg {
    Ges,
    Uges,
    Fes,
    Bes,
}

impl From<AlgorithmArg> for Algorithm {
    fn from(a: AlgorithmArg) -> Self {
        match a {
            AlgorithmArg::Ges => Algorithm::Ges,
            AlgorithmArg::Uges => Algorithm::Uges,
            AlgorithmArg::Fes => Algorithm::Fes,
            AlgorithmArg::Bes => Algorithm::Bes,
        }
    }
}

/// Where a model comes from: a built-in gold standard or a JSON file.
#[derive(Args)]
#[group(required = true, multiple = false)]
struct ModelSource {
    /// Built-in gold standard.
    #[arg(long, value_enum)]
    gold: Option<GoldArg>,
    /// Model JSON file.
    #[arg(long)]
    model: Option<PathBuf>,
}

#[derive(Args)]
struct ScoreOpts {
    #[arg(long, value_enum, default_value = "bdeu")]
    score: ScoreArg,
    /// BDeu equivalent sample size.
    #[arg(long, default_value_t = 10.0)]
    ess: f64,
    /// Constant log structure prior.
    #[arg(long, default_value_t = 0.0)]
    structure_prior: f64,
    /// Effective sample size for the oracle score.
    #[arg(long, default_value_t = 1e6)]
    pseudo_m: f64,
}

impl ScoreOpts {
    fn config(&self) -> ScoreConfig {
        ScoreConfig {
            criterion: self.score.into(),
            ess: self.ess,
            structure_prior: self.structure_prior,
            oracle_pseudo_m: self.pseudo_m,
        }
    }
}

#[derive(Args)]
struct GenerateArgs {
    #[command(flatten)]
    source: ModelSource,
    /// Number of records.
    #[arg(long)]
    m: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Output directory for model.json, data.csv and data.schema.json.
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct LearnArgs {
    /// Dataset CSV; its schema is read from the `.schema.json` sidecar when present.
    #[arg(long, required_unless_present = "joint")]
    data: Option<PathBuf>,
    /// Explicit schema file.
    #[arg(long, conflicts_with = "infer_cards")]
    schema: Option<PathBuf>,
    /// Without a schema, take each cardinality as the largest observed value plus one.
    #[arg(long)]
    infer_cards: bool,
    /// Model JSON whose exact margin feeds the oracle score.
    #[arg(long)]
    joint: Option<PathBuf>,
    #[command(flatten)]
    score: ScoreOpts,
    #[arg(long, value_enum, default_value = "ges")]
    algorithm: AlgorithmArg,
    /// `empty`, `complete`, or a class encoding file.
    #[arg(long)]
    start: Option<String>,
    /// Moves allowed per phase (default n^2 + n).
    #[arg(long)]
    max_steps: Option<usize>,
    /// Output directory for class.txt and trace.tsv; the class goes to stdout otherwise.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct ScoreArgs {
    /// DAG or class encoding file (`A -> B` or `A -- B` per line).
    #[arg(long)]
    graph: PathBuf,
    /// Dataset CSV, as for `learn`.
    #[arg(long, required_unless_present = "joint")]
    data: Option<PathBuf>,
    #[arg(long, conflicts_with = "infer_cards")]
    schema: Option<PathBuf>,
    #[arg(long)]
    infer_cards: bool,
    /// Model JSON for the oracle score.
    #[arg(long)]
    joint: Option<PathBuf>,
    #[command(flatten)]
    score: ScoreOpts,
}

#[derive(Args)]
struct OracleArgs {
    #[command(flatten)]
    source: ModelSource,
    /// Seed for drawing parameters when the model has none.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Independence query such as `X1 _||_ X3 | X2,X4`; repeatable.
    #[arg(long)]
    ci: Vec<String>,
    /// Also write the margin as a CSV table.
    #[arg(long)]
    joint_csv: Option<PathBuf>,
}

#[derive(Args)]
struct ExperimentArgs {
    #[arg(long, value_enum)]
    gold: GoldArg,
    /// Comma-separated sample sizes (default 10 to 163840, doubling).
    #[arg(long, value_delimiter = ',')]
    sizes: Option<Vec<usize>>,
    /// Replicates per size (default 50).
    #[arg(long)]
    replicates: Option<usize>,
    /// Sizes 10 to 655360 and 100 replicates.
    #[arg(long)]
    paper_scale: bool,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Worker threads (0 = all cores).
    #[arg(long, default_value_t = 0)]
    workers: usize,
    #[command(flatten)]
    score: ScoreOpts,
    #[arg(long, value_enum, default_value = "ges")]
    algorithm: AlgorithmArg,
    /// Record wall-clock milliseconds per replicate.
    #[arg(long)]
    timing: bool,
    /// Results CSV; stdout when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Generate(a) => generate(a),
        Command::Learn(a) => learn(a),
        Command::Score(a) => score(a),
        Command::Oracle(a) => oracle(a),
        Command::Experiment(a) => experiment(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}

fn load_model(source: &ModelSource) -> Result<GoldStandard> {
    match (&source.gold, &source.model) {
        (Some(g), _) => Ok(GoldId::from(*g).model()),
        (None, Some(path)) => {
            let text =
                fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
            parse_model(&text).with_context(|| format!("parsing {}", path.display()))
        }
        (None, None) => bail!("one of --gold or --model is required"),
    }
}

fn with_parameters(gold: GoldStandard, seed: u64) -> Result<GoldStandard> {
    if gold.has_parameters() {
        Ok(gold)
    } else {
        Ok(gold.with_parameters(PARAMETER_ESS, RngSeed::new(seed, 0))?)
    }
}

fn margin_of(path: &Path) -> Result<JointTable> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    let gold = parse_model(&text).with_context(|| format!("parsing {}", path.display()))?;
    if !gold.has_parameters() {
        bail!("{} has no parameters", path.display());
    }
    Ok(gold.exact_margin()?)
}

fn sidecar(data: &Path) -> PathBuf {
    data.with_extension("schema.json")
}

fn load_data(data: &Path, schema: Option<&Path>, infer: bool) -> Result<CategoricalDataset> {
    let schema_path = schema
        .map(Path::to_path_buf)
        .unwrap_or_else(|| sidecar(data));
    let spec = if schema.is_some() || (!infer && schema_path.exists()) {
        let text = fs::read_to_string(&schema_path)
            .with_context(|| format!("reading {}", schema_path.display()))?;
        Some(read_schema(&text).with_context(|| format!("parsing {}", schema_path.display()))?)
    } else if infer {
        None
    } else {
        bail!(
            "no schema for {}: pass --schema, add {}, or use --infer-cards",
            data.display(),
            schema_path.display()
        );
    };
    let file = fs::File::open(data).with_context(|| format!("opening {}", data.display()))?;
    let cards = match &spec {
        Some(s) => Cards::Schema(s),
        None => Cards::Infer,
    };
    read_dataset(io::BufReader::new(file), cards)
        .with_context(|| format!("reading {}", data.display()))
}

fn create(path: &Path) -> Result<BufWriter<fs::File>> {
    let f = fs::File::create(path).with_context(|| format!("creating {}", path.display()))?;
    Ok(BufWriter::new(f))
}

fn generate(a: GenerateArgs) -> Result<()> {
    let gold = with_parameters(load_model(&a.source)?, a.seed)?;
    let data = observed_sample(&gold, a.m, RngSeed::new(a.seed, 1))?;
    fs::create_dir_all(&a.out).with_context(|| format!("creating {}", a.out.display()))?;
    fs::write(a.out.join("model.json"), write_model(&gold))?;
    let mut w = create(&a.out.join("data.csv"))?;
    write_dataset(&mut w, &data)?;
    w.flush()?;
    fs::write(a.out.join("data.schema.json"), write_schema(data.spec()))?;
    Ok(())
}

fn parse_start(arg: Option<&str>, algorithm: Algorithm, spec: &VariableSpec) -> Result<Start> {
    Ok(match arg {
        None => SearchConfig::new(algorithm).start,
        Some("empty") => Start::Empty,
        Some("complete") => Start::Complete,
        Some(path) => {
            let text = fs::read_to_string(path).with_context(|| format!("reading {path}"))?;
            Start::Class(parse_cpdag(&text, spec).with_context(|| format!("parsing {path}"))?)
        }
    })
}

fn run_search<S: Scorer + ?Sized>(scorer: &S, a: &LearnArgs) -> Result<SearchTrace> {
    let algorithm = a.algorithm.into();
    let cfg = SearchConfig {
        algorithm,
        start: parse_start(a.start.as_deref(), algorithm, scorer.spec())?,
        max_steps: a.max_steps,
    };
    Ok(search(scorer, &cfg)?)
}

fn write_learned(trace: &SearchTrace, spec: &VariableSpec, out: Option<&Path>) -> Result<()> {
    let class = format_cpdag(trace.result(), spec);
    match out {
        Some(dir) => {
            fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
            fs::write(dir.join("class.txt"), &class)?;
            let mut w = create(&dir.join("trace.tsv"))?;
            trace.write_tsv(&mut w, spec)?;
            w.flush()?;
        }
        None => print!("{class}"),
    }
    if trace.truncated {
        eprintln!("warning: search stopped at the step bound");
    }
    Ok(())
}

fn learn(a: LearnArgs) -> Result<()> {
    let cfg = a.score.config();
    if cfg.criterion == Criterion::Oracle {
        let Some(joint) = &a.joint else {
            bail!("--score oracle needs --joint <model file>");
        };
        let p = margin_of(joint)?;
        let scorer = OracleScorer::new(&p, &cfg)?;
        let trace = run_search(&scorer, &a)?;
        return write_learned(&trace, p.spec(), a.out.as_deref());
    }
    let Some(path) = &a.data else {
        bail!("--data is required unless --score oracle");
    };
    let data = load_data(path, a.schema.as_deref(), a.infer_cards)?;
    let scorer = DataScorer::new(&data, &cfg)?;
    let trace = run_search(&scorer, &a)?;
    write_learned(&trace, data.spec(), a.out.as_deref())
}

/// A DAG, or for a class encoding its representative member.
fn graph_to_score(text: &str, spec: &VariableSpec) -> Result<Dag> {
    match parse_dag(text, spec) {
        Ok(g) => Ok(g),
        Err(dag_err) => parse_cpdag(text, spec)
            .map(|c| c.representative())
            .map_err(|_| dag_err.into()),
    }
}

fn score(a: ScoreArgs) -> Result<()> {
    let cfg = a.score.config();
    let text =
        fs::read_to_string(&a.graph).with_context(|| format!("reading {}", a.graph.display()))?;
    let value = if cfg.criterion == Criterion::Oracle {
        let Some(joint) = &a.joint else {
            bail!("--score oracle needs --joint <model file>");
        };
        let p = margin_of(joint)?;
        let g = graph_to_score(&text, p.spec())?;
        OracleScorer::new(&p, &cfg)?.score(&g)
    } else {
        let Some(path) = &a.data else {
            bail!("--data is required unless --score oracle");
        };
        let data = load_data(path, a.schema.as_deref(), a.infer_cards)?;
        let g = graph_to_score(&text, data.spec())?;
        DataScorer::new(&data, &cfg)?.score(&g)
    };
    println!("{value}");
    Ok(())
}

fn indent(text: &str) -> String {
    text.lines().map(|l| format!("  {l}\n")).collect()
}

fn oracle(a: OracleArgs) -> Result<()> {
    let gold = with_parameters(load_model(&a.source)?, a.seed)?;
    let p = gold.exact_margin()?;
    let spec = p.spec().clone();
    let queries =
        a.ci.iter()
            .map(|q| CiStatement::parse(q, &spec))
            .collect::<ges_core::Result<Vec<_>>>()?;
    let catalog = ClassCatalog::new(p.n())?;
    let optimal = catalog.optimal(&p)?;
    let stdout = io::stdout();
    let mut out = stdout.lock();
    writeln!(
        out,
        "inclusion-optimal classes: {}",
        optimal.inclusion_optimal.len()
    )?;
    for class in &optimal.inclusion_optimal {
        let params = class.representative().parameter_count(&spec);
        let tag = if optimal.parameter_optimal.contains(class) {
            " (parameter optimal)"
        } else {
            ""
        };
        writeln!(out, "class with {params} parameters{tag}")?;
        write!(out, "{}", indent(&format_cpdag(class, &spec)))?;
        writeln!(out, "  representative:")?;
        write!(
            out,
            "{}",
            indent(&indent(&format_dag(&class.representative(), &spec)))
        )?;
    }
    match composition_counterexample(&p, CI_TOL) {
        None => writeln!(out, "composition: holds")?,
        Some(c) => {
            let names = |s: NodeSet| s.iter().map(|v| spec.name(v)).collect::<Vec<_>>().join(",");
            writeln!(
                out,
                "composition: fails ({} depends on {{{}}} given {{{}}} but on no single member)",
                spec.name(c.x),
                names(c.y),
                names(c.z)
            )?;
        }
    }
    for q in &queries {
        let verdict = if q.holds(&p, CI_TOL)? {
            "holds"
        } else {
            "fails"
        };
        writeln!(out, "{}: {verdict}", q.format(&spec))?;
    }
    if let Some(path) = &a.joint_csv {
        let mut w = create(path)?;
        p.write_csv(&mut w)?;
        w.flush()?;
    }
    Ok(())
}

fn experiment(a: ExperimentArgs) -> Result<()> {
    let gold: GoldId = a.gold.into();
    let mut plan = if a.paper_scale {
        ExperimentPlan::paper_scale(gold)
    } else {
        ExperimentPlan::desk(gold)
    };
    if let Some(sizes) = a.sizes {
        plan.sizes = sizes;
    }
    if let Some(r) = a.replicates {
        plan.replicates = r;
    }
    plan.base_seed = a.seed;
    plan.workers = a.workers;
    plan.timing = a.timing;
    plan.score = a.score.config();
    plan.search = SearchConfig::new(a.algorithm.into());
    let rows = run_experiment(&plan)?;
    match &a.out {
        Some(path) => {
            let mut w = create(path)?;
            write_results(&mut w, &rows)?;
            w.flush()?;
        }
        None => write_results(io::stdout().lock(), &rows)?,
    }
    Ok(())
}
