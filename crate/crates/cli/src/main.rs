use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use ggmix_core::config::{Model, RunConfig};
use ggmix_core::ihmm::run_ihmm;
use ggmix_core::io::{chain_seed, load_csv, read_trace, standardize, write_csv, write_trace};
use ggmix_core::mixture::run_dpm;
use ggmix_core::summaries::{
    adjusted_rand_index, backtest_comparison, coclustering, edge_probabilities, misclassified, modal_partition,
    summarize, two_block_partition, PortfolioTrace, Summary,
};
use ggmix_core::synth::{paper_simulation_dataset, regime_switching_dataset, simulation_specs, SimulationDataset};
use ggmix_core::trace::TraceRecord;
use ggmix_core::{Error, Result};
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

#[derive(Parser)]
#[command(name = "ggmix", version, about = "Mixtures and infinite HMMs of decomposable Gaussian graphical models")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a synthetic data set and its labels.
    Synth(SynthArgs),
    /// Run the sampler and write one trace file per chain.
    Fit(FitArgs),
    /// Post-process the traces in a fit directory.
    Summarize(SummarizeArgs),
    /// Rolling portfolio comparison of the graph-learning iHMM, the
    /// complete-graph iHMM and a single model.
    Backtest(BacktestArgs),
}

#[derive(Args)]
struct SynthArgs {
    /// The two-cluster star/cycle benchmark (200 x 10).
    #[arg(long, conflicts_with = "regimes")]
    paper_sim: bool,
    /// Sequential data alternating between the star and cycle models.
    #[arg(long)]
    regimes: bool,
    #[arg(long, default_value_t = 300)]
    n: usize,
    #[arg(long, default_value_t = 50)]
    segment: usize,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    /// Data file; `labels.csv` is written next to it.
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args, Clone)]
struct RunArgs {
    /// JSON config file; flags and --set override its values.
    #[arg(long)]
    config: Option<PathBuf>,
    /// `key=value` override with a dotted key, e.g. `ihmm.alpha=2`.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    overrides: Vec<String>,
    /// dpm, pitman-yor or ihmm.
    #[arg(long)]
    model: Option<String>,
    /// Numeric CSV, one observation per row.
    #[arg(long)]
    data: Option<PathBuf>,
    /// Output directory.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Iterations per chain, burn-in included.
    #[arg(long)]
    sweeps: Option<usize>,
    #[arg(long)]
    burnin: Option<usize>,
    /// Keep every k-th sweep after burn-in.
    #[arg(long)]
    thin: Option<usize>,
    /// Master seed; chain k uses a seed derived from it.
    #[arg(long)]
    seed: Option<u64>,
    /// Independent chains, run in parallel (GGMIX_THREADS caps the pool).
    #[arg(long)]
    chains: Option<usize>,
    /// Pitman-Yor discount in [0, 1).
    #[arg(long)]
    discount: Option<f64>,
    /// Initial concentration.
    #[arg(long)]
    alpha0: Option<f64>,
    /// Graph moves per cluster per sweep.
    #[arg(long)]
    graph_mh_repeats: Option<usize>,
    /// Fit on the raw columns instead of standardized ones.
    #[arg(long)]
    no_standardize: bool,
}

#[derive(Args)]
struct FitArgs {
    #[command(flatten)]
    run: RunArgs,
    /// Store sampled means and precisions in the trace.
    #[arg(long)]
    sample_params: bool,
}

#[derive(Args)]
struct SummarizeArgs {
    /// Directory written by `fit`.
    #[arg(long)]
    dir: PathBuf,
    /// Output directory; defaults to `--dir`.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Labels file to score the point partitions against.
    #[arg(long)]
    truth: Option<PathBuf>,
    /// Also write one edge-probability file per observation.
    #[arg(long)]
    per_observation: bool,
}

#[derive(Args)]
struct BacktestArgs {
    #[command(flatten)]
    run: RunArgs,
    /// Rows in the first fitting window.
    #[arg(long)]
    start: Option<usize>,
    /// Stop once the fitting window reaches this many rows; defaults to the data length.
    #[arg(long)]
    end: Option<usize>,
    /// Target expected return per period.
    #[arg(long)]
    target_return: Option<f64>,
}

#[derive(Serialize, Deserialize)]
struct FitMeta {
    model: Model,
    observations: usize,
    dim: usize,
    chains: usize,
    columns: Option<Vec<String>>,
    mean: Option<Vec<f64>>,
    sd: Option<Vec<f64>>,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Synth(a) => synth(a),
        Command::Fit(a) => fit(a),
        Command::Summarize(a) => summarize_dir(a),
        Command::Backtest(a) => backtest(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("ggmix: {e}");
            ExitCode::from(if e.is_usage() { 2 } else { 1 })
        }
    }
}

fn create_dir(dir: &Path) -> Result<()> {
    fs::create_dir_all(dir).map_err(|e| Error::Io { path: dir.to_path_buf(), source: e })
}

fn write_text(path: &Path, text: &str) -> Result<()> {
    fs::write(path, text).map_err(|e| Error::Io { path: path.to_path_buf(), source: e })
}

fn synth(a: SynthArgs) -> Result<()> {
    let mut rng = ChaCha8Rng::seed_from_u64(a.seed);
    let ds: SimulationDataset = if a.regimes {
        regime_switching_dataset(&simulation_specs()?, a.segment, a.n, &mut rng)?
    } else if a.paper_sim {
        paper_simulation_dataset(&mut rng)?
    } else {
        return Err(Error::Config("choose --paper-sim or --regimes".into()));
    };
    if let Some(parent) = a.out.parent().filter(|p| !p.as_os_str().is_empty()) {
        create_dir(parent)?;
    }
    let p = ds.data.first().map_or(0, |x| x.len());
    let header: Vec<String> = (1..=p).map(|j| format!("x{j}")).collect();
    write_csv(&a.out, Some(&header), ds.data.iter().map(|x| x.as_slice()))?;
    let labels: Vec<[f64; 1]> = ds.labels.iter().map(|&l| [(l + 1) as f64]).collect();
    let label_path = a.out.with_file_name("labels.csv");
    write_csv(label_path, Some(&["label".to_string()]), labels.iter().map(|r| r.as_slice()))
}

fn resolve(run: &RunArgs) -> Result<RunConfig> {
    let mut c = match &run.config {
        Some(path) => RunConfig::load(path)?,
        None => RunConfig::default(),
    };
    c.apply_overrides(run.overrides.iter().map(String::as_str))?;
    if let Some(m) = &run.model {
        c.model = m.parse()?;
    }
    if let Some(d) = &run.data {
        c.data = Some(d.clone());
    }
    if let Some(o) = &run.out {
        c.out = o.clone();
    }
    c.sweeps = run.sweeps.unwrap_or(c.sweeps);
    c.burnin = run.burnin.unwrap_or(c.burnin);
    c.thin = run.thin.unwrap_or(c.thin);
    c.seed = run.seed.unwrap_or(c.seed);
    c.chains = run.chains.unwrap_or(c.chains);
    if let Some(d) = run.discount {
        c.mixture.discount = d;
        // A bare --discount selects Pitman-Yor; an explicit --model dpm keeps the DP.
        if run.model.is_none() && c.model == Model::Dpm && d > 0.0 {
            c.model = Model::PitmanYor;
        }
    }
    if let Some(a) = run.alpha0 {
        c.mixture.alpha0 = a;
        c.ihmm.alpha0 = a;
    }
    if let Some(r) = run.graph_mh_repeats {
        c.mixture.graph_mh_repeats = r;
        c.ihmm.graph_mh_repeats = r;
    }
    if run.no_standardize {
        c.standardize = false;
    }
    c.validate()?;
    Ok(c)
}

fn thread_pool() -> Result<rayon::ThreadPool> {
    let mut b = rayon::ThreadPoolBuilder::new();
    if let Ok(v) = std::env::var("GGMIX_THREADS") {
        let n: usize = v
            .parse()
            .ok()
            .filter(|&n| n > 0)
            .ok_or_else(|| Error::Config(format!("GGMIX_THREADS must be a positive integer, got {v:?}")))?;
        b = b.num_threads(n);
    }
    b.build().map_err(|e| Error::Config(format!("thread pool: {e}")))
}

fn fit(a: FitArgs) -> Result<()> {
    let mut c = resolve(&a.run)?;
    if a.sample_params {
        c.mixture.sample_params = true;
        c.ihmm.sample_params = true;
    }
    let data_path = c.data.clone().ok_or_else(|| Error::Config("--data is required".into()))?;
    let table = load_csv(&data_path)?;
    let (data, mean, sd) = if c.standardize {
        let s = standardize(&table.rows)?;
        let (m, d) = (s.mean.iter().copied().collect(), s.sd.iter().copied().collect());
        (s.data, Some(m), Some(d))
    } else {
        (table.rows.clone(), None, None)
    };
    let p = table.dim();
    let prior = c.prior.spec::<f64>(p)?;
    let chain = c.chain()?;
    let mixture = c.effective_mixture();
    let traces: Vec<Result<Vec<TraceRecord>>> = thread_pool()?.install(|| {
        (0..c.chains)
            .into_par_iter()
            .map(|k| {
                let mut rng = ChaCha8Rng::seed_from_u64(chain_seed(c.seed, k));
                match c.model {
                    Model::Dpm | Model::PitmanYor => run_dpm(&data, &prior, &mixture, &chain, &mut rng),
                    Model::Ihmm => run_ihmm(&data, &prior, &c.ihmm, &chain, &mut rng),
                }
            })
            .collect()
    });
    create_dir(&c.out)?;
    for (k, t) in traces.into_iter().enumerate() {
        write_trace(c.out.join(format!("trace_chain{}.jsonl", k + 1)), &t?)?;
    }
    let meta =
        FitMeta { model: c.model, observations: data.len(), dim: p, chains: c.chains, columns: table.header, mean, sd };
    write_text(&c.out.join("meta.json"), &serde_json::to_string_pretty(&meta).expect("serializable"))?;
    write_text(&c.out.join("config.json"), &c.to_json())
}

/// All chains of a fit directory, concatenated in chain order.
fn read_chains(dir: &Path, chains: usize) -> Result<Vec<TraceRecord>> {
    let mut all = Vec::new();
    for k in 1..=chains {
        all.extend(read_trace(dir.join(format!("trace_chain{k}.jsonl")))?);
    }
    Ok(all)
}

fn matrix_rows(m: &ggmix_core::summaries::Matrix) -> Vec<Vec<f64>> {
    m.row_iter().map(|r| r.iter().copied().collect()).collect()
}

#[derive(Serialize)]
struct Report {
    model: Model,
    #[serde(flatten)]
    summary: Summary,
    #[serde(skip_serializing_if = "Option::is_none")]
    two_block_ari: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    modal_misclassified: Option<usize>,
}

fn summarize_dir(a: SummarizeArgs) -> Result<()> {
    let meta_path = a.dir.join("meta.json");
    let text = fs::read_to_string(&meta_path).map_err(|e| Error::Io { path: meta_path.clone(), source: e })?;
    let meta: FitMeta = serde_json::from_str(&text).map_err(|e| Error::Parse {
        path: meta_path,
        line: e.line(),
        msg: e.to_string(),
    })?;
    let trace = read_chains(&a.dir, meta.chains)?;
    let out = a.out.unwrap_or_else(|| a.dir.clone());
    create_dir(&out)?;
    let co = coclustering(&trace)?;
    let rows = matrix_rows(&co);
    write_csv(out.join("coclustering.csv"), None, rows.iter().map(Vec::as_slice))?;
    let maps = edge_probabilities(&trace, meta.dim)?;
    if a.per_observation {
        for (j, m) in maps.iter().enumerate() {
            let rows = matrix_rows(m);
            write_csv(out.join(format!("edges_obs{}.csv", j + 1)), None, rows.iter().map(Vec::as_slice))?;
        }
    }
    let two_block = two_block_partition(&co)?;
    let (modal, _) = modal_partition(&trace)?;
    let rows: Vec<[f64; 3]> =
        (0..meta.observations).map(|j| [(j + 1) as f64, (two_block[j] + 1) as f64, (modal[j] + 1) as f64]).collect();
    let header = ["observation", "two_block", "modal"].map(String::from);
    write_csv(out.join("partition.csv"), Some(&header), rows.iter().map(|r| r.as_slice()))?;
    let (ari, miss) = match &a.truth {
        Some(path) => {
            let t = load_csv(path)?;
            let labels: Vec<usize> = t.rows.iter().map(|r| r[0] as usize).collect();
            (Some(adjusted_rand_index(&two_block, &labels)?), Some(misclassified(&modal, &labels)?))
        }
        None => (None, None),
    };
    let report =
        Report { model: meta.model, summary: summarize(&trace)?, two_block_ari: ari, modal_misclassified: miss };
    write_text(&out.join("summary.json"), &serde_json::to_string_pretty(&report).expect("serializable"))
}

fn write_portfolio(path: &Path, trace: &PortfolioTrace) -> Result<()> {
    let p = trace.steps.first().map_or(0, |s| s.weights.len());
    let mut header = vec!["t".to_string()];
    header.extend((1..=p).map(|j| format!("w{j}")));
    header.extend(["return".to_string(), "cumret".to_string()]);
    let rows: Vec<Vec<f64>> = trace
        .steps
        .iter()
        .map(|s| {
            let mut r = vec![s.t as f64];
            r.extend(&s.weights);
            r.extend([s.ret, s.cumulative]);
            r
        })
        .collect();
    write_csv(path, Some(&header), rows.iter().map(Vec::as_slice))
}

fn backtest(a: BacktestArgs) -> Result<()> {
    let mut c = resolve(&a.run)?;
    if let Some(s) = a.start {
        c.backtest.start = s;
    }
    if a.end.is_some() {
        c.backtest.end = a.end;
    }
    if let Some(m) = a.target_return {
        c.backtest.target_return = m;
    }
    c.validate()?;
    let data_path = c.data.clone().ok_or_else(|| Error::Config("--data is required".into()))?;
    let table = load_csv(&data_path)?;
    let traces = backtest_comparison(&table.rows, &c.backtest_config(), c.seed)?;
    create_dir(&c.out)?;
    let mut totals = serde_json::Map::new();
    for t in &traces {
        write_portfolio(&c.out.join(format!("portfolio_{}.csv", t.model.name())), t)?;
        totals.insert(t.model.name().to_string(), serde_json::json!(t.cumulative()));
    }
    let report = serde_json::json!({ "cumulative_return": totals, "periods": traces[0].steps.len() });
    write_text(&c.out.join("backtest.json"), &serde_json::to_string_pretty(&report).expect("serializable"))?;
    write_text(&c.out.join("config.json"), &c.to_json())
}
