use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use degroot::bounds::{self, BoundReport, ChainFacts, Constants, InitialProfile, Quantity, Verdict};
use degroot::coupled::coincidence_probability;
use degroot::dynamics::{run_replicas, simulate_trace, InitialOpinionSpec, InitialOpinions, TauEstimate};
use degroot::experiments::{run_experiment, BoundComparison, ExperimentConfig, ExperimentName};
use degroot::fragmentation::moments;
use degroot::graph::{metrics, validate, GraphSpec};
use degroot::rng::{derive_seed, Lane};
use degroot::stats::variance_with_stderr;
use degroot::{Chain, Error};

#[derive(Parser)]
#[command(name = "degroot", version, about = "Asynchronous DeGroot dynamics toolkit")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Monte Carlo consensus times with bound comparisons.
    Simulate(SimulateArgs),
    /// Mean, variance, energy and oscillation along one trajectory.
    Trace(TraceArgs),
    /// Moments of the fragmentation process.
    Fragment(FragmentArgs),
    /// Coincidence probability of coupled walkers.
    Couple(CoupleArgs),
    /// Every closed-form bound with its applicability.
    Bounds(BoundsArgs),
    /// Runs a curated experiment.
    Experiment(ExperimentArgs),
    /// Checks a graph and prints its metrics and spectral data.
    ValidateGraph(ValidateArgs),
}

#[derive(Clone, Copy, ValueEnum, PartialEq)]
enum Format {
    Json,
    Csv,
}

#[derive(Args)]
struct Output {
    /// Directory for output files; stdout only when absent.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "json")]
    format: Format,
}

#[derive(Args)]
struct SimulateArgs {
    #[arg(long)]
    graph: GraphSpec,
    #[arg(long, default_value = "uniform")]
    init: InitialOpinionSpec,
    #[arg(long, default_value_t = 0.1)]
    eps: f64,
    #[arg(long, default_value_t = 100)]
    replicas: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Censoring horizon; derived from the spectral gap when absent.
    #[arg(long)]
    t_max: Option<f64>,
    /// Exit with status 2 when a bound is violated.
    #[arg(long)]
    strict: bool,
    #[command(flatten)]
    output: Output,
}

#[derive(Args)]
struct TraceArgs {
    #[arg(long)]
    graph: GraphSpec,
    #[arg(long, default_value = "uniform")]
    init: InitialOpinionSpec,
    #[arg(long, value_delimiter = ',', default_value = "0,1,2,4,8,16")]
    times: Vec<f64>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[command(flatten)]
    output: Output,
}

#[derive(Args)]
struct FragmentArgs {
    #[arg(long)]
    graph: GraphSpec,
    #[arg(long, default_value_t = 0)]
    origin: usize,
    #[arg(long, value_delimiter = ',', default_value = "1,2,4,8,16")]
    times: Vec<f64>,
    #[arg(long, value_delimiter = ',', default_value = "2")]
    moments: Vec<u32>,
    #[arg(long, default_value_t = 1000)]
    replicas: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[command(flatten)]
    output: Output,
}

#[derive(Args)]
struct CoupleArgs {
    #[arg(long)]
    graph: GraphSpec,
    #[arg(long, default_value_t = 0)]
    origin: usize,
    #[arg(long, default_value_t = 2)]
    walkers: usize,
    #[arg(long)]
    t: f64,
    #[arg(long, default_value_t = 1000)]
    replicas: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[command(flatten)]
    output: Output,
}

#[derive(Args)]
struct BoundsArgs {
    #[arg(long)]
    graph: GraphSpec,
    #[arg(long, default_value = "uniform")]
    init: InitialOpinionSpec,
    #[arg(long, default_value_t = 0.1)]
    eps: f64,
    /// Value of the unquantified constants.
    #[arg(long, default_value_t = 1.0)]
    constant: f64,
    #[command(flatten)]
    output: Output,
}

#[derive(Args)]
struct ExperimentArgs {
    /// Experiment name; may be omitted when --config names one.
    name: Option<ExperimentName>,
    /// JSON config; command-line values override it.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Single size, e.g. the cycle length.
    #[arg(long)]
    n: Option<usize>,
    #[arg(long, value_delimiter = ',')]
    sizes: Option<Vec<usize>>,
    #[arg(long)]
    graph: Option<GraphSpec>,
    #[arg(long)]
    init: Option<InitialOpinionSpec>,
    #[arg(long, value_delimiter = ',')]
    eps: Option<Vec<f64>>,
    #[arg(long)]
    replicas: Option<usize>,
    #[arg(long, value_delimiter = ',')]
    times: Option<Vec<f64>>,
    #[arg(long)]
    t_max: Option<f64>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    strict: bool,
    #[command(flatten)]
    output: Output,
}

#[derive(Args)]
struct ValidateArgs {
    #[arg(long)]
    graph: GraphSpec,
    #[command(flatten)]
    output: Output,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    match run(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}

fn run(cli: Cli) -> Result<ExitCode, Error> {
    match cli.command {
        Command::Simulate(a) => simulate(a),
        Command::Trace(a) => trace(a),
        Command::Fragment(a) => fragment(a),
        Command::Couple(a) => couple(a),
        Command::Bounds(a) => bounds_cmd(a),
        Command::Experiment(a) => experiment(a),
        Command::ValidateGraph(a) => validate_graph(a),
    }
}

fn write_file(dir: &Path, name: &str, contents: &str) -> Result<(), Error> {
    fs::create_dir_all(dir)?;
    fs::write(dir.join(name), contents)?;
    Ok(())
}

fn pretty(v: &impl serde::Serialize) -> Result<String, Error> {
    Ok(serde_json::to_string_pretty(v)? + "\n")
}

/// Writes `files` under `--out` and prints either the summary or the CSV table.
fn emit(output: &Output, summary: &Value, csv: &str, files: &[(&str, String)]) -> Result<(), Error> {
    if let Some(dir) = &output.out {
        write_file(dir, "summary.json", &pretty(summary)?)?;
        for (name, contents) in files {
            write_file(dir, name, contents)?;
        }
    }
    match output.format {
        Format::Json => print!("{}", pretty(summary)?),
        Format::Csv => print!("{csv}"),
    }
    Ok(())
}

fn bounds_csv(rows: &[BoundComparison]) -> String {
    let mut out = String::from(BoundComparison::csv_header());
    out.push('\n');
    for r in rows {
        out.push_str(&r.csv_row());
        out.push('\n');
    }
    out
}

fn table_csv(columns: &[&str], rows: impl IntoIterator<Item = Vec<String>>) -> String {
    let mut out = columns.join(",");
    out.push('\n');
    for row in rows {
        out.push_str(&row.join(","));
        out.push('\n');
    }
    out
}

fn opt(x: Option<f64>) -> String {
    x.map_or(String::new(), |v| v.to_string())
}

fn violated(rows: &[BoundComparison]) -> bool {
    rows.iter().any(|b| b.verdict == Verdict::Violated && !b.bound.unspecified_constant)
}

fn simulate(a: SimulateArgs) -> Result<ExitCode, Error> {
    let chain = Chain::from_spec(&a.graph)?;
    let facts = ChainFacts::new(&chain)?;
    let t_max = a.t_max.unwrap_or_else(|| bounds::default_t_max(&facts, a.eps));
    let records = run_replicas(&chain, &a.init, a.eps, t_max, a.replicas, a.seed)?;
    let est = TauEstimate::from_records(a.eps, t_max, records);
    let opinions = InitialOpinions::new(&a.init, &chain)?;
    let profile = InitialProfile::iid(&chain, &a.init).unwrap_or_else(|| InitialProfile::fixed(&chain, &opinions.draw(0)));
    let midpoints: Vec<f64> = est.records.iter().filter(|r| !r.result.censored()).map(|r| r.result.midpoint).collect();
    let (var, var_se) = variance_with_stderr(&midpoints);
    let label = a.graph.to_string();
    let comparisons: Vec<BoundComparison> = bounds::all_bounds(&facts, &profile, a.eps, Constants::default())
        .into_iter()
        .filter(|b| b.applicable)
        .map(|b| match b.quantity {
            Quantity::Variance => BoundComparison::new(&label, Some(a.eps), var, var_se, est.censored_fraction(), b),
            _ => BoundComparison::new(&label, Some(a.eps), est.mean, est.stderr, est.censored_fraction(), b),
        })
        .collect();
    let summary = json!({
        "graph": label,
        "init": a.init,
        "eps": a.eps,
        "replicas": a.replicas,
        "seed": a.seed,
        "t_max": t_max,
        "tau": est,
        "consensus_variance": {"estimate": var, "stderr": var_se, "from_midpoint_of": midpoints.len()},
        "spectral": facts.spectral,
        "bounds": comparisons,
    });
    let replicas_csv = table_csv(
        &["replica", "clock_seed", "opinion_seed", "tau", "censored", "consensus_value", "midpoint", "final_osc", "events"],
        est.records.iter().map(|r| {
            vec![
                r.replica.to_string(),
                r.clock_seed.to_string(),
                r.opinion_seed.to_string(),
                opt(r.result.tau),
                r.result.censored().to_string(),
                r.result.consensus_value.to_string(),
                r.result.midpoint.to_string(),
                r.result.final_osc.to_string(),
                r.result.events.to_string(),
            ]
        }),
    );
    emit(&a.output, &summary, &replicas_csv, &[("replicas.csv", replicas_csv.clone()), ("bounds.csv", bounds_csv(&comparisons))])?;
    Ok(if a.strict && violated(&comparisons) { ExitCode::from(2) } else { ExitCode::SUCCESS })
}

fn trace(a: TraceArgs) -> Result<ExitCode, Error> {
    let chain = Chain::from_spec(&a.graph)?;
    let opinions = InitialOpinions::new(&a.init, &chain)?;
    let f0 = opinions.draw(derive_seed(a.seed, 0, Lane::Opinion));
    let points = simulate_trace(&chain, f0, &a.times, derive_seed(a.seed, 0, Lane::Clock))?;
    let summary = json!({"graph": a.graph.to_string(), "init": a.init, "seed": a.seed, "trace": points});
    let csv = table_csv(
        &["t", "mean", "variance", "energy", "osc"],
        points.iter().map(|p| {
            let s = p.summary;
            [p.t, s.mean, s.variance, s.energy, s.osc].iter().map(|x| x.to_string()).collect()
        }),
    );
    emit(&a.output, &summary, &csv, &[("trace.csv", csv.clone())])?;
    Ok(ExitCode::SUCCESS)
}

fn fragment(a: FragmentArgs) -> Result<ExitCode, Error> {
    let chain = Chain::from_spec(&a.graph)?;
    let est = moments(chain.matrix(), a.origin, &a.times, &a.moments, a.replicas, a.seed)?;
    let summary = json!({"graph": a.graph.to_string(), "origin": a.origin, "seed": a.seed, "moments": est});
    let csv = table_csv(
        &["d", "t", "mean", "stderr"],
        est.iter().flat_map(|m| {
            m.points.iter().map(move |p| vec![m.d.to_string(), p.t.to_string(), p.mean.to_string(), p.stderr.to_string()])
        }),
    );
    emit(&a.output, &summary, &csv, &[("moments.csv", csv.clone())])?;
    Ok(ExitCode::SUCCESS)
}

fn couple(a: CoupleArgs) -> Result<ExitCode, Error> {
    let chain = Chain::from_spec(&a.graph)?;
    let est = coincidence_probability(chain.matrix(), a.origin, a.walkers, a.t, a.replicas, a.seed)?;
    let summary = json!({"graph": a.graph.to_string(), "origin": a.origin, "seed": a.seed, "coincidence": est});
    let csv = table_csv(
        &["walkers", "t", "probability", "stderr"],
        [vec![a.walkers.to_string(), a.t.to_string(), est.probability.estimate.to_string(), est.probability.stderr.to_string()]],
    );
    emit(&a.output, &summary, &csv, &[])?;
    Ok(ExitCode::SUCCESS)
}

fn bound_rows(reports: &[BoundReport]) -> String {
    table_csv(
        &["bound", "quantity", "kind", "applicable", "value", "formula", "reason", "unspecified_constant"],
        reports.iter().map(|b| {
            vec![
                b.name.clone(),
                format!("{:?}", b.quantity).to_lowercase(),
                format!("{:?}", b.kind).to_lowercase(),
                b.applicable.to_string(),
                opt(b.value),
                format!("\"{}\"", b.formula),
                format!("\"{}\"", b.reason.clone().unwrap_or_default()),
                b.unspecified_constant.to_string(),
            ]
        }),
    )
}

fn bounds_cmd(a: BoundsArgs) -> Result<ExitCode, Error> {
    let chain = Chain::from_spec(&a.graph)?;
    let facts = ChainFacts::new(&chain)?;
    let opinions = InitialOpinions::new(&a.init, &chain)?;
    let profile = InitialProfile::iid(&chain, &a.init).unwrap_or_else(|| InitialProfile::fixed(&chain, &opinions.draw(0)));
    let constants = Constants { degree: a.constant, eulerian: a.constant };
    let reports = bounds::all_bounds(&facts, &profile, a.eps, constants);
    let applicable: Vec<&BoundReport> = reports.iter().filter(|b| b.applicable).collect();
    let summary = json!({
        "graph": a.graph.to_string(),
        "init": a.init,
        "eps": a.eps,
        "initial_profile": profile,
        "spectral": facts.spectral,
        "r_max": facts.r_max,
        "applicable": applicable,
        "inapplicable": reports.iter().filter(|b| !b.applicable).collect::<Vec<_>>(),
    });
    let csv = bound_rows(&reports);
    emit(&a.output, &summary, &csv, &[("bounds.csv", csv.clone())])?;
    Ok(ExitCode::SUCCESS)
}

fn experiment(a: ExperimentArgs) -> Result<ExitCode, Error> {
    let mut config = match &a.config {
        Some(path) => ExperimentConfig::from_json(&fs::read_to_string(path)?)?,
        None => match a.name {
            Some(name) => ExperimentConfig::new(name),
            None => return Err(Error::InvalidParameter("give an experiment name or --config".into())),
        },
    };
    if let Some(name) = a.name {
        if name != config.experiment {
            return Err(Error::InvalidParameter(format!("config names {}, command line names {name}", config.experiment)));
        }
    }
    if let Some(n) = a.n {
        if matches!(config.experiment, ExperimentName::SpectralLowerBound | ExperimentName::MomentDecaySuite | ExperimentName::ConcentrationSuite) {
            config.graph = None;
            config.sizes = Some(vec![n]);
        } else {
            return Err(Error::InvalidParameter(format!("--n applies to single-graph experiments; use --sizes for {}", config.experiment)));
        }
    }
    macro_rules! set {
        ($($field:ident),*) => { $( if let Some(v) = a.$field.clone() { config.$field = Some(v); } )* };
    }
    set!(sizes, graph, init, eps, replicas, times, t_max, seed);
    let start = Instant::now();
    let report = run_experiment(&config)?;
    let elapsed = start.elapsed().as_secs_f64();
    eprintln!("{}: {:?} ({}) in {elapsed:.1} s", report.experiment, report.verdict, report.reason);
    let summary = serde_json::to_value(&report)?;
    let csv = report.table.to_csv();
    emit(
        &a.output,
        &summary,
        &csv,
        &[
            ("table.csv", csv.clone()),
            ("bounds.csv", bounds_csv(&report.bounds)),
            ("timing.json", pretty(&json!({"wall_clock_seconds": elapsed}))?),
        ],
    )?;
    Ok(if a.strict && report.any_violation() { ExitCode::from(2) } else { ExitCode::SUCCESS })
}

fn validate_graph(a: ValidateArgs) -> Result<ExitCode, Error> {
    let p = degroot::graph::build(&a.graph)?;
    let report = validate(&p);
    if !report.is_valid() {
        let summary = json!({"graph": a.graph.to_string(), "valid": false, "validation": report});
        emit(&a.output, &summary, "", &[])?;
        return Ok(ExitCode::from(1));
    }
    let m = metrics(&p);
    let chain = Chain::new(p)?;
    let spectral = chain.spectral()?;
    let summary = json!({
        "graph": a.graph.to_string(),
        "valid": true,
        "metrics": m,
        "pi_min": chain.stationary().pi_min,
        "pi_max": chain.stationary().pi_max,
        "spectral": spectral,
    });
    let csv = table_csv(
        &["n", "arcs", "diameter", "reversible", "gamma", "gamma_star", "gamma_hat", "pi_min"],
        [vec![
            m.n.to_string(),
            m.arc_count.to_string(),
            m.diameter.to_string(),
            spectral.reversible.to_string(),
            spectral.gamma.to_string(),
            spectral.gamma_star.to_string(),
            spectral.gamma_hat.to_string(),
            chain.stationary().pi_min.to_string(),
        ]],
    );
    emit(&a.output, &summary, &csv, &[])?;
    Ok(ExitCode::SUCCESS)
}
