//! Command-line entry points. Every command writes its resolved configuration
//! next to its results so a run can be repeated exactly.

use std::fs;
use std::path::{Path, PathBuf};
use std::time::Duration;

use clap::{Args, Parser, Subcommand, ValueEnum};
use num_rational::BigRational;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::error::{Error, Result};
use crate::exact::{format_rational, parse_rational};
use crate::generators::{generate, GenSpec};
use crate::local_search::{iteration_bound, run_local_search, SearchTrace};
use crate::metric::{MetricInstance, Solution};
use crate::oracle::{
    annotate_nearly_good, brute_force_optimum_budgeted, certify_stability_budgeted, eps_from_eps_prime,
    DEFAULT_ENUMERATION_BUDGET,
};
use crate::reductions::{
    cbt_to_kmeans, e3sat_to_3dm, full_chain, occurrence_split_family, qsat_to_e3sat, tdm_to_cbt, CnfFormula,
    Constants, TripleSystem,
};
use crate::verify::{measure_sat_stability, verify_chain, ChainBudgets, SearchBudget, Verdict};

pub const EXIT_OK: i32 = 0;
pub const EXIT_FAILED: i32 = 1;
pub const EXIT_INCONCLUSIVE: i32 = 2;
pub const EXIT_USAGE: i32 = 3;

#[derive(Debug, Parser, Serialize)]
#[command(name = "stable-kmeans", version, about = "Local search and reduction tooling for stable discrete clustering")]
pub struct Cli {
    /// Worker threads for parallel sections (default: all cores).
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand, Serialize)]
#[serde(tag = "command", rename_all = "kebab-case")]
pub enum Command {
    /// Generate an instance from a JSON generator spec.
    Generate(GenerateArgs),
    /// Run best-improvement multi-swap local search.
    Solve(SolveArgs),
    /// Decide stability of an instance exactly.
    Certify(CertifyArgs),
    /// Run one reduction stage (or the whole chain) on an input file.
    Reduce(ReduceArgs),
    /// Run the whole chain on a CNF and check every stage.
    VerifyChain(VerifyChainArgs),
    /// Run local search over a suite of generated instances.
    Bench(BenchArgs),
    /// Tabulate SAT stability of the occurrence-split family.
    DemoSplitStability(DemoArgs),
}

#[derive(Debug, Args, Serialize)]
pub struct GenerateArgs {
    /// Generator spec (JSON).
    #[arg(long)]
    pub spec: PathBuf,
    #[arg(long, short)]
    pub out: PathBuf,
}

#[derive(Debug, Args, Serialize)]
pub struct SolveArgs {
    #[arg(long)]
    pub instance: PathBuf,
    /// Maximum number of centres swapped per step.
    #[arg(long, default_value_t = 2)]
    pub rho: usize,
    /// Stop after ⌈2k·ln(nΔ)⌉ steps.
    #[arg(long)]
    pub truncate: bool,
    /// Explicit step cap (overrides --truncate).
    #[arg(long)]
    pub cap: Option<usize>,
    /// Starting centres, comma separated (default: the first k).
    #[arg(long, value_delimiter = ',')]
    pub start: Option<Vec<usize>>,
    /// Also brute-force the optimum and locate the first nearly-good iterate.
    #[arg(long)]
    pub oracle: bool,
    /// Stability slack used for the nearly-good test.
    #[arg(long, default_value = "1/20")]
    pub eps_prime: String,
    /// Output prefix: writes `<out>.json` and `<out>.csv`.
    #[arg(long, short)]
    pub out: PathBuf,
}

#[derive(Debug, Args, Serialize)]
pub struct CertifyArgs {
    #[arg(long)]
    pub instance: PathBuf,
    /// Stretch factor, e.g. `21/20`.
    #[arg(long)]
    pub alpha: String,
    /// Maximum number of k-subsets to enumerate.
    #[arg(long, default_value_t = DEFAULT_ENUMERATION_BUDGET)]
    pub budget: u128,
    #[arg(long, short)]
    pub out: PathBuf,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Stage {
    /// Any CNF to exactly-3 CNF.
    Exact3,
    /// Exactly-3 CNF to a triple system.
    Matching,
    /// Triple system to a covering instance.
    Covering,
    /// Covering instance to discrete k-means.
    Kmeans,
    /// CNF through every stage.
    Full,
}

#[derive(Debug, Args, Serialize)]
pub struct ReduceArgs {
    /// DIMACS CNF, or a `p 3dm` triple file for the covering and k-means stages.
    #[arg(long)]
    pub input: PathBuf,
    #[arg(long, value_enum, default_value_t = Stage::Full)]
    pub stage: Stage,
    /// Wheel copy count (a power of 4, at least 4).
    #[arg(long)]
    pub k_override: Option<usize>,
    /// Emit basis-vector coordinates instead of a distance table.
    #[arg(long)]
    pub coordinates: bool,
    #[arg(long)]
    pub out_dir: PathBuf,
}

#[derive(Debug, Args, Serialize)]
pub struct BudgetArgs {
    /// Node cap per exhaustive search.
    #[arg(long, default_value_t = 50_000_000)]
    pub max_nodes: u64,
    /// Wall-clock cap per exhaustive search, in seconds.
    #[arg(long, default_value_t = 60)]
    pub max_seconds: u64,
}

impl BudgetArgs {
    fn budget(&self) -> SearchBudget {
        SearchBudget::nodes(self.max_nodes).with_time(Duration::from_secs(self.max_seconds))
    }
}

#[derive(Debug, Args, Serialize)]
pub struct VerifyChainArgs {
    #[arg(long)]
    pub cnf: PathBuf,
    #[arg(long)]
    pub k_override: Option<usize>,
    #[command(flatten)]
    pub budget: BudgetArgs,
    /// Report path (JSON); the text summary goes to stdout.
    #[arg(long, short)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args, Serialize)]
pub struct BenchArgs {
    /// Suite (JSON): `{"rho": 2, "alpha": "21/20", "instances": [<spec>, ...]}`.
    #[arg(long)]
    pub suite: PathBuf,
    #[arg(long, short)]
    pub out: PathBuf,
}

#[derive(Debug, Args, Serialize)]
pub struct DemoArgs {
    #[arg(long, default_value_t = 6)]
    pub n_max: usize,
    #[command(flatten)]
    pub budget: BudgetArgs,
    #[arg(long, short)]
    pub out: PathBuf,
}

/// What a command reports back to `main`.
pub struct Outcome {
    pub code: i32,
    pub stdout: String,
    pub stderr: String,
}

impl Outcome {
    fn ok(stdout: String) -> Self {
        Self::with_code(EXIT_OK, stdout)
    }

    fn with_code(code: i32, stdout: String) -> Self {
        Self { code, stdout, stderr: String::new() }
    }
}

/// Parses `args` and runs the command. Usage errors map to exit code 3,
/// exhausted budgets to 2.
pub fn run_from<I, T>(args: I) -> Outcome
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let text = e.render().to_string();
            return if e.use_stderr() {
                Outcome { code: EXIT_USAGE, stdout: String::new(), stderr: text }
            } else {
                Outcome::ok(text)
            };
        }
    };
    if let Some(n) = cli.threads {
        // fails only if the pool already exists, in which case it is reused
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n.max(1)).build_global();
    }
    match execute(&cli) {
        Ok(o) => o,
        Err(e) => Outcome {
            code: if e.is_budget() { EXIT_INCONCLUSIVE } else { EXIT_USAGE },
            stdout: String::new(),
            stderr: format!("error: {e}\n"),
        },
    }
}

fn config_of(cli: &Cli) -> Value {
    serde_json::to_value(cli).expect("arguments serialize")
}

fn read(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|e| Error::Parse(format!("{}: {e}", path.display())))
}

fn write(path: &Path, text: &str) -> Result<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir)?;
    }
    fs::write(path, text)?;
    Ok(())
}

fn with_extension(prefix: &Path, ext: &str) -> PathBuf {
    let mut s = prefix.as_os_str().to_owned();
    s.push(".");
    s.push(ext);
    PathBuf::from(s)
}

fn pretty(v: &impl Serialize) -> Result<String> {
    let mut s = serde_json::to_string_pretty(v)?;
    s.push('\n');
    Ok(s)
}

fn load_instance(path: &Path) -> Result<MetricInstance> {
    MetricInstance::from_json(&read(path)?)
}

fn rational_arg(s: &str) -> Result<BigRational> {
    parse_rational(s)
}

fn execute(cli: &Cli) -> Result<Outcome> {
    let config = config_of(cli);
    match &cli.command {
        Command::Generate(a) => cmd_generate(a, config),
        Command::Solve(a) => cmd_solve(a, config),
        Command::Certify(a) => cmd_certify(a, config),
        Command::Reduce(a) => cmd_reduce(a, config),
        Command::VerifyChain(a) => cmd_verify_chain(a, config),
        Command::Bench(a) => cmd_bench(a, config),
        Command::DemoSplitStability(a) => cmd_demo(a, config),
    }
}

fn cmd_generate(a: &GenerateArgs, config: Value) -> Result<Outcome> {
    let spec: GenSpec = serde_json::from_str(&read(&a.spec)?).map_err(|e| Error::SpecInvalid(e.to_string()))?;
    let inst = generate(&spec)?;
    let mut file = serde_json::to_value(inst.to_file())?;
    file["generator"] = serde_json::to_value(&spec)?;
    file["config"] = config;
    write(&a.out, &pretty(&file)?)?;
    Ok(Outcome::ok(format!(
        "wrote {} ({} points, {} centres, k={})\n",
        a.out.display(),
        inst.n_points(),
        inst.n_centres(),
        inst.k()
    )))
}

#[derive(Serialize)]
struct SolveSummary {
    final_cost: String,
    final_centres: Solution,
    iterations: usize,
    iteration_bound: usize,
    terminated_locally_optimal: bool,
    iteration_cap_hit: bool,
    optimum_cost: Option<String>,
    optimum_found: Option<bool>,
    first_nearly_good_index: Option<usize>,
}

fn cmd_solve(a: &SolveArgs, config: Value) -> Result<Outcome> {
    let inst = load_instance(&a.instance)?;
    let start = match &a.start {
        Some(v) => Solution::new(v.iter().copied(), inst.n_centres(), inst.k())?,
        None => Solution::first(inst.k()),
    };
    let bound = iteration_bound(&inst);
    let cap = a.cap.or(a.truncate.then_some(bound));
    let mut trace: SearchTrace = run_local_search(&inst, a.rho, &start, cap)?;
    let mut optimum_cost = None;
    let mut optimum_found = None;
    if a.oracle {
        let opt = brute_force_optimum_budgeted(&inst, DEFAULT_ENUMERATION_BUDGET)?;
        let eps = eps_from_eps_prime(&rational_arg(&a.eps_prime)?);
        annotate_nearly_good(&inst, &mut trace, &opt.optima[0], &eps);
        optimum_found = Some(trace.last().cost == opt.cost);
        optimum_cost = Some(opt.cost.to_string());
    }
    let last = trace.last();
    let summary = SolveSummary {
        final_cost: last.cost.to_string(),
        final_centres: last.centre_indices.clone(),
        iterations: trace.steps(),
        iteration_bound: bound,
        terminated_locally_optimal: trace.terminated_locally_optimal,
        iteration_cap_hit: trace.iteration_cap_hit,
        optimum_cost,
        optimum_found,
        first_nearly_good_index: trace.first_nearly_good_index,
    };
    let doc = json!({ "config": config, "summary": summary, "trace": trace });
    write(&with_extension(&a.out, "json"), &pretty(&doc)?)?;
    write(&with_extension(&a.out, "csv"), &trace.to_csv())?;
    Ok(Outcome::ok(pretty(&summary)?))
}

fn cmd_certify(a: &CertifyArgs, config: Value) -> Result<Outcome> {
    let inst = load_instance(&a.instance)?;
    let alpha = rational_arg(&a.alpha)?;
    let report = certify_stability_budgeted(&inst, &alpha, a.budget)?;
    let doc = json!({ "config": config, "report": report });
    write(&a.out, &pretty(&doc)?)?;
    Ok(Outcome::ok(format!(
        "alpha={} stable={} optima={} min_margin={}\n",
        report.alpha,
        report.stable,
        report.optima_count,
        report.min_margin.as_deref().unwrap_or("-")
    )))
}

fn cmd_reduce(a: &ReduceArgs, config: Value) -> Result<Outcome> {
    let text = read(&a.input)?;
    let dir = &a.out_dir;
    fs::create_dir_all(dir)?;
    let mut written = Vec::new();
    let mut put = |name: &str, body: String| -> Result<()> {
        let p = dir.join(name);
        write(&p, &body)?;
        written.push(p.display().to_string());
        Ok(())
    };
    let provenance: Value = match a.stage {
        Stage::Exact3 => {
            let phi = CnfFormula::from_dimacs(&text)?;
            let (psi, prov) = qsat_to_e3sat(&phi)?;
            put("exact3.cnf", psi.to_dimacs())?;
            json!({ "exact3": prov })
        }
        Stage::Matching => {
            let psi = CnfFormula::from_dimacs(&text)?;
            let (ts, prov) = e3sat_to_3dm(&psi, a.k_override)?;
            put("triples.3dm", ts.to_text())?;
            json!({ "wheels": prov, "tags": ts.tags(), "roles": ts.roles() })
        }
        Stage::Covering => {
            let ts = TripleSystem::from_text(&text)?;
            let mut constants = Constants::new();
            let cover = tdm_to_cbt(&ts, &mut constants);
            put("cover.3dm", cover.to_text())?;
            json!({ "constants": constants })
        }
        Stage::Kmeans => {
            let ts = TripleSystem::from_text(&text)?;
            let (inst, prov) = cbt_to_kmeans(&ts, a.coordinates)?;
            put("instance.json", inst.to_json()? + "\n")?;
            json!({ "embed": prov })
        }
        Stage::Full => {
            let phi = CnfFormula::from_dimacs(&text)?;
            let out = if a.coordinates {
                let mut o = full_chain(&phi, a.k_override)?;
                let (inst, prov) = cbt_to_kmeans(&o.triples, true)?;
                o.instance = inst;
                o.provenance.embed = prov;
                o
            } else {
                full_chain(&phi, a.k_override)?
            };
            put("exact3.cnf", out.exact3.to_dimacs())?;
            put("triples.3dm", out.triples.to_text())?;
            put("instance.json", out.instance.to_json()? + "\n")?;
            serde_json::to_value(&out.provenance)?
        }
    };
    let doc = json!({ "config": config, "provenance": provenance });
    put("provenance.json", pretty(&doc)?)?;
    Ok(Outcome::ok(written.join("\n") + "\n"))
}

fn cmd_verify_chain(a: &VerifyChainArgs, config: Value) -> Result<Outcome> {
    let phi = CnfFormula::from_dimacs(&read(&a.cnf)?)?;
    let report = verify_chain(&phi, a.k_override, &ChainBudgets::all(a.budget.budget()))?;
    if let Some(out) = &a.out {
        let doc = json!({ "config": config, "report": report });
        write(out, &pretty(&doc)?)?;
    }
    let code = match report.verdict {
        Verdict::Pass => EXIT_OK,
        Verdict::Fail => EXIT_FAILED,
        Verdict::Inconclusive => EXIT_INCONCLUSIVE,
    };
    Ok(Outcome::with_code(code, report.summary()))
}

#[derive(Debug, Deserialize)]
struct Suite {
    #[serde(default = "default_rho")]
    rho: usize,
    #[serde(default = "default_alpha")]
    alpha: String,
    #[serde(default = "default_budget")]
    budget: u128,
    #[serde(default)]
    instances: Vec<GenSpec>,
}

fn default_rho() -> usize {
    2
}

fn default_alpha() -> String {
    "21/20".into()
}

fn default_budget() -> u128 {
    DEFAULT_ENUMERATION_BUDGET
}

pub const BENCH_HEADER: &str = "instance,n,k,delta,iterations,bound,opt_found,certified_stable,error";

#[derive(Serialize)]
struct BenchRow {
    instance: String,
    n: Option<usize>,
    k: Option<usize>,
    delta: Option<u64>,
    iterations: Option<usize>,
    bound: Option<usize>,
    opt_found: Option<bool>,
    certified_stable: Option<bool>,
    error: Option<String>,
}

fn bench_row(i: usize, spec: &GenSpec, suite: &Suite, alpha: &BigRational) -> BenchRow {
    let name = format!("{i}-{:?}-{}", spec.kind, spec.seed).to_lowercase();
    let run = || -> Result<BenchRow> {
        let inst = generate(spec)?;
        let bound = iteration_bound(&inst);
        let trace = run_local_search(&inst, suite.rho, &Solution::first(inst.k()), Some(bound))?;
        let opt = brute_force_optimum_budgeted(&inst, suite.budget)?;
        let stable = certify_stability_budgeted(&inst, alpha, suite.budget)?.stable;
        Ok(BenchRow {
            instance: name.clone(),
            n: Some(inst.n_points()),
            k: Some(inst.k()),
            delta: Some(inst.delta_max()),
            iterations: Some(trace.steps()),
            bound: Some(bound),
            opt_found: Some(trace.last().cost == opt.cost),
            certified_stable: Some(stable),
            error: None,
        })
    };
    run().unwrap_or_else(|e| BenchRow {
        instance: name.clone(),
        n: None,
        k: None,
        delta: None,
        iterations: None,
        bound: None,
        opt_found: None,
        certified_stable: None,
        error: Some(e.to_string()),
    })
}

fn csv_text<R: Serialize>(header: &str, rows: &[R]) -> Result<String> {
    let mut w = csv::WriterBuilder::new().has_headers(false).from_writer(Vec::new());
    w.write_record(header.split(','))
        .and_then(|_| rows.iter().try_for_each(|r| w.serialize(r)))
        .map_err(|e| Error::Parse(e.to_string()))?;
    let bytes = w.into_inner().map_err(|e| Error::Parse(e.to_string()))?;
    Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
}

fn cmd_bench(a: &BenchArgs, config: Value) -> Result<Outcome> {
    let suite: Suite = serde_json::from_str(&read(&a.suite)?).map_err(|e| Error::SpecInvalid(e.to_string()))?;
    let alpha = rational_arg(&suite.alpha)?;
    let rows: Vec<BenchRow> = suite
        .instances
        .iter()
        .enumerate()
        .map(|(i, spec)| bench_row(i, spec, &suite, &alpha))
        .collect();
    write(&a.out, &csv_text(BENCH_HEADER, &rows)?)?;
    write(&with_extension(&a.out, "config.json"), &pretty(&config)?)?;
    Ok(Outcome::ok(format!("wrote {} rows to {}\n", suite.instances.len(), a.out.display())))
}

pub const DEMO_HEADER: &str = "n,s_phi,s_psi,phi_at_least_half,psi_decreasing";

fn cmd_demo(a: &DemoArgs, config: Value) -> Result<Outcome> {
    if a.n_max == 0 {
        return Err(Error::InvalidConfig("n-max must be at least 1".into()));
    }
    let budget = a.budget.budget();
    let half = crate::exact::rational(1, 2);
    let mut rows = Vec::new();
    let mut prev: Option<BigRational> = None;
    let mut all_ok = true;
    for n in 1..=a.n_max {
        let (phi, psi) = occurrence_split_family(n)?;
        let sp = measure_sat_stability(&phi, &budget)?;
        let ss = measure_sat_stability(&psi, &budget)?;
        let half_ok = sp.exact >= half;
        // the trend is defined from n = 2 on
        let decreasing = n < 3 || prev.as_ref().is_some_and(|p| &ss.exact < p);
        all_ok &= half_ok && decreasing;
        rows.push((n, format_rational(&sp.exact), format_rational(&ss.exact), half_ok, decreasing));
        prev = Some(ss.exact);
    }
    let csv = csv_text(DEMO_HEADER, &rows)?;
    write(&a.out, &csv)?;
    write(&with_extension(&a.out, "config.json"), &pretty(&config)?)?;
    Ok(Outcome::with_code(if all_ok { EXIT_OK } else { EXIT_FAILED }, csv))
}
