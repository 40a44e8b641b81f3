//! `mlncc`: generate networks, analyze layers once, compose hub estimates,
//! and score them against the exact AND-graph answer.
//!
//! Every stage reads and writes plain files, so any step can be re-run from
//! the artifacts of the previous one.

use std::fs::{self, File};
use std::io::{self, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand, ValueEnum};
use mlncc::eval::{
    analyze_layers_timed, mean_rows, write_means_csv, write_reports_csv, InstanceReports,
};
use mlncc::{
    compose_multi, evaluate, gen_mln, ground_truth, load_summary, parse_edge_list, run_ensemble,
    save_summary, write_edge_list, CompositionResult, GenSpec, GroundTruth, HoMln, LayerSummary,
    Manifest, Method, Selection, UndirectedGraph,
};
use serde::{Deserialize, Serialize};

#[derive(Debug, Parser)]
#[command(
    name = "mlncc",
    version,
    about = "Closeness hubs of AND-aggregated multilayer networks"
)]
struct Cli {
    /// Worker threads for layer analysis and ensembles.
    #[arg(long, global = true, env = "MLN_CC_THREADS", value_parser = clap::value_parser!(u32).range(1..))]
    threads: Option<u32>,

    #[arg(long, global = true, value_enum, default_value_t = Output::Json)]
    output: Output,

    /// Suppress progress messages on stderr.
    #[arg(long, global = true)]
    quiet: bool,

    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Output {
    Json,
    Csv,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum MethodArg {
    Naive,
    Cc1,
    Cc2,
}

impl From<MethodArg> for Method {
    fn from(m: MethodArg) -> Self {
        match m {
            MethodArg::Naive => Method::Naive,
            MethodArg::Cc1 => Method::Cc1,
            MethodArg::Cc2 => Method::Cc2,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum SelectionArg {
    AboveAverage,
    TopK,
}

#[derive(Debug, clap::Args)]
struct SelectionOpts {
    #[arg(long, value_enum, default_value_t = SelectionArg::AboveAverage)]
    selection: SelectionArg,

    /// Number of hubs for `--selection top-k`.
    #[arg(long, value_parser = clap::value_parser!(u64).range(1..))]
    k: Option<u64>,
}

impl SelectionOpts {
    fn resolve(&self) -> Result<Selection> {
        match (self.selection, self.k) {
            (SelectionArg::AboveAverage, _) => Ok(Selection::AboveAverage),
            (SelectionArg::TopK, Some(k)) => Ok(Selection::TopK(k as usize)),
            (SelectionArg::TopK, None) => Err(usage("--selection top-k requires --k")),
        }
    }
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Generate a two-layer network from a TOML or JSON spec.
    Generate {
        #[arg(long)]
        spec: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Analyze each layer once and write its summary.
    Analyze {
        #[arg(required = true)]
        layers: Vec<PathBuf>,
        #[arg(long)]
        out: PathBuf,
        /// Vertex count when the edge lists do not declare one.
        #[arg(long)]
        n: Option<usize>,
    },
    /// Estimate AND-graph hubs from stored layer summaries.
    Compose {
        #[arg(required = true, num_args = 2..)]
        summaries: Vec<PathBuf>,
        #[arg(long, value_enum)]
        method: MethodArg,
        #[command(flatten)]
        selection: SelectionOpts,
        #[arg(long)]
        out: PathBuf,
    },
    /// Exact hubs of the AND-aggregated layers.
    GroundTruth {
        #[arg(required = true, num_args = 2..)]
        layers: Vec<PathBuf>,
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        n: Option<usize>,
    },
    /// Score a composition result against ground truth.
    Evaluate {
        #[arg(long)]
        result: PathBuf,
        #[arg(long)]
        gt: PathBuf,
        /// Timing sidecar written by `analyze`, for the per-layer times.
        #[arg(long)]
        timing: Option<PathBuf>,
        /// Write here instead of stdout.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Generate one network per seed and report mean accuracy and timing.
    Bench {
        #[arg(long)]
        spec: PathBuf,
        #[arg(long, default_value_t = 20)]
        seeds: u64,
        /// First seed; instances use `seed_start..seed_start + seeds`.
        #[arg(long, default_value_t = 1)]
        seed_start: u64,
        #[arg(long, value_enum, value_delimiter = ',', default_values_t = [MethodArg::Naive, MethodArg::Cc1, MethodArg::Cc2])]
        methods: Vec<MethodArg>,
        #[command(flatten)]
        selection: SelectionOpts,
        /// Per-instance CSV; means go next to it as `<stem>.means.csv`.
        #[arg(long)]
        out: PathBuf,
    },
}

/// Bad input from the user; exits with status 2.
#[derive(Debug)]
struct UsageError(String);

impl std::fmt::Display for UsageError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for UsageError {}

fn usage(msg: impl Into<String>) -> anyhow::Error {
    UsageError(msg.into()).into()
}

fn exit_code(err: &anyhow::Error) -> u8 {
    for cause in err.chain() {
        if cause.is::<UsageError>() {
            return 2;
        }
        if let Some(e) = cause.downcast_ref::<mlncc::Error>() {
            return match e {
                mlncc::Error::Io(io) if io.kind() != io::ErrorKind::NotFound => 1,
                mlncc::Error::Csv(_) => 1,
                _ => 2,
            };
        }
        if let Some(e) = cause.downcast_ref::<io::Error>() {
            return if e.kind() == io::ErrorKind::NotFound {
                2
            } else {
                1
            };
        }
        if cause.is::<serde_json::Error>() {
            return 2;
        }
    }
    1
}

struct Ctx {
    output: Output,
    quiet: bool,
}

impl Ctx {
    fn note(&self, msg: impl AsRef<str>) {
        if !self.quiet {
            eprintln!("{}", msg.as_ref());
        }
    }
}

fn open(path: &Path) -> Result<BufReader<File>> {
    File::open(path)
        .map(BufReader::new)
        .with_context(|| format!("cannot open {}", path.display()))
}

fn create(path: &Path) -> Result<BufWriter<File>> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).with_context(|| format!("cannot create {}", dir.display()))?;
    }
    File::create(path)
        .map(BufWriter::new)
        .with_context(|| format!("cannot create {}", path.display()))
}

fn write_text(path: &Path, text: &str) -> Result<()> {
    let mut w = create(path)?;
    w.write_all(text.as_bytes())?;
    w.write_all(b"\n")?;
    w.flush()?;
    Ok(())
}

fn read_spec(path: &Path) -> Result<GenSpec> {
    let text =
        fs::read_to_string(path).with_context(|| format!("cannot read {}", path.display()))?;
    let spec = match path.extension().and_then(|e| e.to_str()) {
        Some("json") => GenSpec::from_json_str(&text),
        _ => GenSpec::from_toml_str(&text),
    };
    spec.with_context(|| format!("invalid spec {}", path.display()))
}

/// Parses every layer and widens them to a common vertex count.
fn read_layers(
    paths: &[PathBuf],
    n_hint: Option<usize>,
    ctx: &Ctx,
) -> Result<Vec<UndirectedGraph>> {
    let mut graphs = Vec::with_capacity(paths.len());
    for path in paths {
        let parsed = parse_edge_list(open(path)?, n_hint)
            .with_context(|| format!("cannot parse {}", path.display()))?;
        if parsed.dropped.total() > 0 {
            ctx.note(format!(
                "warning: {}: dropped {} self-loops and {} duplicate edges",
                path.display(),
                parsed.dropped.self_loops,
                parsed.dropped.duplicates
            ));
        }
        graphs.push(parsed.graph);
    }
    let n = graphs.iter().map(UndirectedGraph::n).max().unwrap_or(0);
    graphs
        .into_iter()
        .map(|g| {
            if g.n() == n {
                Ok(g)
            } else {
                UndirectedGraph::from_edges(n, g.edges().collect::<Vec<_>>()).map_err(Into::into)
            }
        })
        .collect()
}

fn file_stem(path: &Path) -> String {
    let name = path.file_name().and_then(|s| s.to_str()).unwrap_or("layer");
    name.split('.')
        .next()
        .filter(|s| !s.is_empty())
        .unwrap_or(name)
        .to_owned()
}

fn cmd_generate(spec_path: &Path, out: &Path, ctx: &Ctx) -> Result<PathBuf> {
    let spec = read_spec(spec_path)?;
    let start = Instant::now();
    let mln = gen_mln(&spec)?;
    let mut names = Vec::new();
    for (g, label) in mln.layers().iter().zip(mln.labels()) {
        let name = format!("{label}.edges");
        let mut w = create(&out.join(&name))?;
        write_edge_list(g, &mut w)?;
        ctx.note(format!("{name}: n={} m={}", g.n(), g.m()));
        names.push(name);
    }
    let manifest = Manifest {
        n: mln.n(),
        layers: names,
        seed: spec.seed,
        spec,
    };
    let path = out.join("manifest.json");
    write_text(&path, &serde_json::to_string_pretty(&manifest)?)?;
    ctx.note(format!(
        "generated in {:.3}s",
        start.elapsed().as_secs_f64()
    ));
    Ok(path)
}

#[derive(Debug, Serialize, Deserialize)]
struct LayerTiming {
    input: String,
    summary: String,
    t_psi: f64,
}

#[derive(Debug, Serialize, Deserialize)]
struct TimingSidecar {
    layers: Vec<LayerTiming>,
}

fn cmd_analyze(
    layers: &[PathBuf],
    out: &Path,
    n: Option<usize>,
    ctx: &Ctx,
) -> Result<Vec<PathBuf>> {
    let graphs = read_layers(layers, n, ctx)?;
    let refs: Vec<&UndirectedGraph> = graphs.iter().collect();
    let analyzed = analyze_layers_timed(&refs);
    let mut paths = Vec::new();
    let mut timing = TimingSidecar { layers: Vec::new() };
    for ((input, (summary, secs)), g) in layers.iter().zip(&analyzed).zip(&graphs) {
        let name = format!("{}.summary.json", file_stem(input));
        let path = out.join(&name);
        let mut w = create(&path)?;
        save_summary(summary, &mut w)?;
        ctx.note(format!(
            "{}: n={} m={} hubs={} t_psi={secs:.3}s",
            input.display(),
            g.n(),
            g.m(),
            summary.cc_nodes.len()
        ));
        timing.layers.push(LayerTiming {
            input: input.display().to_string(),
            summary: name,
            t_psi: *secs,
        });
        paths.push(path);
    }
    write_text(
        &out.join("timing.json"),
        &serde_json::to_string_pretty(&timing)?,
    )?;
    Ok(paths)
}

fn read_summary(path: &Path) -> Result<LayerSummary> {
    load_summary(open(path)?).with_context(|| format!("cannot load summary {}", path.display()))
}

fn cmd_compose(
    summaries: &[PathBuf],
    method: Method,
    selection: Selection,
    out: &Path,
    ctx: &Ctx,
) -> Result<PathBuf> {
    if method == Method::Cc1 && summaries.len() != 2 {
        return Err(usage(format!(
            "unsupported: cc1 composes exactly two summaries, got {}",
            summaries.len()
        )));
    }
    let loaded = summaries
        .iter()
        .map(|p| read_summary(p))
        .collect::<Result<Vec<_>>>()?;
    let refs: Vec<&LayerSummary> = loaded.iter().collect();
    let result = compose_multi(&refs, method, selection)?;
    write_text(out, &result.to_json_string())?;
    ctx.note(format!(
        "{method}: {} estimated hubs, elapsed {:.6}s",
        result.est_cc_nodes.len(),
        result.elapsed_s
    ));
    Ok(out.to_path_buf())
}

fn cmd_ground_truth(
    layers: &[PathBuf],
    out: &Path,
    n: Option<usize>,
    ctx: &Ctx,
) -> Result<PathBuf> {
    let graphs = read_layers(layers, n, ctx)?;
    let count = graphs.len();
    let mln = HoMln::from_layers(graphs)?;
    let run = ground_truth(&mln, &(0..count).collect::<Vec<_>>())?;
    write_text(out, &run.truth.to_json_string())?;
    ctx.note(format!(
        "AND graph: m={} hubs={} t_gt={:.3}s",
        run.truth.and_edges,
        run.truth.cc_nodes.len(),
        run.truth.timing.t_gt()
    ));
    Ok(out.to_path_buf())
}

fn cmd_evaluate(
    result: &Path,
    gt: &Path,
    timing: Option<&Path>,
    out: Option<&Path>,
    ctx: &Ctx,
) -> Result<()> {
    let text =
        fs::read_to_string(result).with_context(|| format!("cannot read {}", result.display()))?;
    let result = CompositionResult::from_json_str(&text)
        .with_context(|| format!("invalid result {}", result.display()))?;
    let text = fs::read_to_string(gt).with_context(|| format!("cannot read {}", gt.display()))?;
    let truth = GroundTruth::from_json_str(&text)
        .with_context(|| format!("invalid ground truth {}", gt.display()))?;
    let t_psi = match timing {
        Some(path) => {
            let sidecar: TimingSidecar = serde_json::from_reader(open(path)?)
                .with_context(|| format!("invalid timing file {}", path.display()))?;
            sidecar.layers.iter().map(|l| l.t_psi).collect()
        }
        None => Vec::new(),
    };
    let report = evaluate(&result, &truth, t_psi)?;
    let rendered = match ctx.output {
        Output::Json => report.to_json_string() + "\n",
        Output::Csv => {
            let mut buf = Vec::new();
            let inst = [InstanceReports {
                seed: 0,
                reports: vec![report],
            }];
            write_reports_csv(&inst, &mut buf)?;
            String::from_utf8(buf)?
        }
    };
    match out {
        Some(path) => {
            let mut w = create(path)?;
            w.write_all(rendered.as_bytes())?;
            w.flush()?;
        }
        None => print!("{rendered}"),
    }
    Ok(())
}

fn cmd_bench(
    spec_path: &Path,
    seeds: u64,
    seed_start: u64,
    methods: &[Method],
    selection: Selection,
    out: &Path,
    ctx: &Ctx,
) -> Result<(PathBuf, PathBuf)> {
    if seeds == 0 {
        return Err(usage("--seeds must be at least 1"));
    }
    let spec = read_spec(spec_path)?;
    let seed_list: Vec<u64> = (seed_start..seed_start + seeds).collect();
    let start = Instant::now();
    let instances = run_ensemble(&spec, &seed_list, methods, selection)?;
    ctx.note(format!(
        "{} instances in {:.2}s",
        instances.len(),
        start.elapsed().as_secs_f64()
    ));
    write_reports_csv(&instances, create(out)?)?;
    let rows = mean_rows(&instances);
    let means = out.with_file_name(format!("{}.means.csv", file_stem(out)));
    write_means_csv(&rows, create(&means)?)?;
    match ctx.output {
        Output::Json => {
            for row in &rows {
                println!("{}", serde_json::to_string(row)?);
            }
        }
        Output::Csv => {
            let stdout = io::stdout();
            write_means_csv(&rows, stdout.lock())?;
        }
    }
    Ok((out.to_path_buf(), means))
}

fn run(cli: Cli) -> Result<()> {
    let threads = match cli.threads {
        Some(t) => t as usize,
        None => std::thread::available_parallelism().map_or(1, |n| n.get()),
    };
    rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build_global()
        .context("cannot start worker pool")?;
    let ctx = Ctx {
        output: cli.output,
        quiet: cli.quiet,
    };

    match cli.command {
        Command::Generate { spec, out } => {
            let manifest = cmd_generate(&spec, &out, &ctx)?;
            println!("{}", manifest.display());
        }
        Command::Analyze { layers, out, n } => {
            for p in cmd_analyze(&layers, &out, n, &ctx)? {
                println!("{}", p.display());
            }
        }
        Command::Compose {
            summaries,
            method,
            selection,
            out,
        } => {
            let path = cmd_compose(&summaries, method.into(), selection.resolve()?, &out, &ctx)?;
            println!("{}", path.display());
        }
        Command::GroundTruth { layers, out, n } => {
            println!("{}", cmd_ground_truth(&layers, &out, n, &ctx)?.display());
        }
        Command::Evaluate {
            result,
            gt,
            timing,
            out,
        } => cmd_evaluate(&result, &gt, timing.as_deref(), out.as_deref(), &ctx)?,
        Command::Bench {
            spec,
            seeds,
            seed_start,
            methods,
            selection,
            out,
        } => {
            let methods: Vec<Method> = methods.into_iter().map(Into::into).collect();
            if methods.is_empty() {
                bail!(usage("--methods must name at least one method"));
            }
            let (rows, means) = cmd_bench(
                &spec,
                seeds,
                seed_start,
                &methods,
                selection.resolve()?,
                &out,
                &ctx,
            )?;
            ctx.note(format!("wrote {} and {}", rows.display(), means.display()));
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::from(exit_code(&err))
        }
    }
}
