//! `tempsketch` command line: embed graphs, run the replica benchmark, stitch
//! identities by bucketing.
//!
//! Exit codes: 0 success, 1 usage, 2 bad data or parameters, 3 runtime or I/O.

use std::fs::{self, File};
use std::io::{self, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use tempsketch::error::StageExt;
use tempsketch::eval::decision_metrics;
use tempsketch::features::parse_attributes;
use tempsketch::hashing::{read_sketches, write_sketches};
use tempsketch::pipeline::{bucket_sketches, classify_pairs, Attributes};
use tempsketch::stitching::{parse_pairs, stitch_unsupervised};
use tempsketch::{
    embed, evaluate_supervised, evaluate_unsupervised, inject_replicas, load_edge_list, EdgeSchema, EmbedParams,
    Error, EvalParams, LoadOptions, MetricReport, NodeId, NodeTypeTable, RunConfig, TemporalGraph,
};

#[derive(Parser)]
#[command(name = "tempsketch", version, about = "Binary temporal node sketches for identity stitching")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Embed every node of a graph as a K-bit sketch.
    Embed {
        #[command(flatten)]
        graph: GraphArgs,
        #[command(flatten)]
        sketch: SketchArgs,
        /// Sketch file; sparse sketches go to stdout when omitted.
        #[arg(short, long)]
        output: Option<PathBuf>,
        #[arg(long, value_parser = ["sparse", "packed"])]
        format: Option<String>,
        /// Write per-(node, distance) histograms as CSV.
        #[arg(long)]
        dump_histograms: Option<PathBuf>,
    },
    /// Supervised evaluation: injected replicas, or labeled pairs from `--pairs`.
    Eval {
        #[command(flatten)]
        graph: GraphArgs,
        #[command(flatten)]
        sketch: SketchArgs,
        #[command(flatten)]
        replicas: ReplicaArgs,
        #[command(flatten)]
        classifier: ClassifierArgs,
        /// `label_u<TAB>label_v<TAB>0|1` lines over nodes of the input graph.
        #[arg(long)]
        pairs: Option<PathBuf>,
        /// Report file; the report goes to stdout when omitted.
        #[arg(short, long)]
        output: Option<PathBuf>,
        #[arg(long)]
        json: bool,
    },
    /// Unsupervised stitching of injected replicas by banded bucketing.
    Stitch {
        #[command(flatten)]
        graph: GraphArgs,
        #[command(flatten)]
        sketch: SketchArgs,
        #[command(flatten)]
        replicas: ReplicaArgs,
        #[arg(long)]
        band_bits: Option<usize>,
        /// Candidate pair file.
        #[arg(short, long)]
        output: Option<PathBuf>,
        #[arg(long)]
        json: bool,
    },
    /// Candidate pairs from banded bucketing of sketches.
    Buckets {
        /// Read sketches from this file instead of embedding `--input`.
        #[arg(long)]
        sketches: Option<PathBuf>,
        #[command(flatten)]
        graph: GraphArgs,
        #[command(flatten)]
        sketch: SketchArgs,
        #[arg(long)]
        band_bits: Option<usize>,
        /// Score these labeled pairs by co-bucketing instead of listing candidates.
        #[arg(long)]
        pairs: Option<PathBuf>,
        #[arg(short, long)]
        output: Option<PathBuf>,
        #[arg(long)]
        json: bool,
    },
    /// Write a perturbed copy of a graph with injected replicas.
    Replicas {
        #[command(flatten)]
        graph: GraphArgs,
        #[command(flatten)]
        replicas: ReplicaArgs,
        #[arg(long)]
        seed: Option<u64>,
        /// Edge list; ground truth goes to `<output>.truth`.
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
}

#[derive(Args)]
struct GraphArgs {
    /// `key=value` file (e.g. a run manifest); flags override it.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Edge list.
    #[arg(short, long)]
    input: Option<PathBuf>,
    /// Column layout, e.g. "src dst timestamp".
    #[arg(long)]
    schema: Option<String>,
    #[arg(long)]
    directed: bool,
    /// `label<TAB>type` lines.
    #[arg(long)]
    node_types: Option<PathBuf>,
    /// `label<TAB>v1,v2,...` lines.
    #[arg(long)]
    attributes: Option<PathBuf>,
    #[arg(long)]
    attribute_fill: Option<f64>,
    #[arg(long)]
    threads: Option<usize>,
}

#[derive(Args)]
struct SketchArgs {
    /// Walks per edge.
    #[arg(long)]
    walks: Option<usize>,
    #[arg(long)]
    walk_length: Option<usize>,
    #[arg(long, value_parser = ["auto", "short", "long", "static"])]
    policy: Option<String>,
    /// Sketch bits per node.
    #[arg(long)]
    dim: Option<usize>,
    #[arg(long)]
    max_dt: Option<usize>,
    #[arg(long)]
    bins: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Args)]
struct ReplicaArgs {
    #[arg(long)]
    fraction: Option<f64>,
    #[arg(long)]
    p1: Option<f64>,
    #[arg(long)]
    p2: Option<f64>,
}

#[derive(Args)]
struct ClassifierArgs {
    #[arg(long)]
    lambda: Option<f64>,
    #[arg(long)]
    tol: Option<f64>,
    #[arg(long)]
    max_iter: Option<usize>,
    #[arg(long)]
    split_ratio: Option<f64>,
    #[arg(long)]
    shuffle_labels: bool,
}

enum Failure {
    Usage(String),
    Run(Error),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Run(e)
    }
}

type CliResult<T> = Result<T, Failure>;

fn set_opt<T: ToString>(c: &mut RunConfig, key: &str, value: &Option<T>) -> tempsketch::Result<()> {
    match value {
        Some(v) => c.set(key, &v.to_string()),
        None => Ok(()),
    }
}

fn set_path(c: &mut RunConfig, key: &str, value: &Option<PathBuf>) -> tempsketch::Result<()> {
    match value {
        Some(p) => c.set(key, &p.display().to_string()),
        None => Ok(()),
    }
}

impl GraphArgs {
    /// Defaults, then `--config`, then flags.
    fn base_config(&self) -> CliResult<RunConfig> {
        let mut c = RunConfig::default();
        if let Some(path) = &self.config {
            let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
            c.apply_key_values(&text).stage("config")?;
        }
        set_path(&mut c, "input", &self.input)?;
        set_opt(&mut c, "schema", &self.schema)?;
        if self.directed {
            c.directed = true;
        }
        set_path(&mut c, "node_types", &self.node_types)?;
        set_path(&mut c, "attributes", &self.attributes)?;
        set_opt(&mut c, "attribute_fill", &self.attribute_fill)?;
        set_opt(&mut c, "threads", &self.threads)?;
        Ok(c)
    }
}

impl SketchArgs {
    fn apply(&self, c: &mut RunConfig) -> tempsketch::Result<()> {
        set_opt(c, "walks", &self.walks)?;
        set_opt(c, "walk_length", &self.walk_length)?;
        set_opt(c, "policy", &self.policy)?;
        set_opt(c, "dim", &self.dim)?;
        set_opt(c, "max_dt", &self.max_dt)?;
        set_opt(c, "bins", &self.bins)?;
        set_opt(c, "seed", &self.seed)
    }
}

impl ReplicaArgs {
    fn apply(&self, c: &mut RunConfig) -> tempsketch::Result<()> {
        set_opt(c, "fraction", &self.fraction)?;
        set_opt(c, "p1", &self.p1)?;
        set_opt(c, "p2", &self.p2)
    }
}

impl ClassifierArgs {
    fn apply(&self, c: &mut RunConfig) -> tempsketch::Result<()> {
        set_opt(c, "lambda", &self.lambda)?;
        set_opt(c, "tol", &self.tol)?;
        set_opt(c, "max_iter", &self.max_iter)?;
        set_opt(c, "split_ratio", &self.split_ratio)?;
        if self.shuffle_labels {
            c.shuffle_labels = true;
        }
        Ok(())
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 1 } else { 0 });
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            eprintln!("run 'tempsketch --help' for usage");
            ExitCode::from(1)
        }
        Err(Failure::Run(Error::Io { source, .. })) if source.kind() == io::ErrorKind::BrokenPipe => ExitCode::SUCCESS,
        Err(Failure::Run(e)) => {
            eprintln!("error: {e}");
            ExitCode::from(if e.is_data_error() { 2 } else { 3 })
        }
    }
}

fn run(cli: Cli) -> CliResult<()> {
    match cli.command {
        Command::Embed { graph, sketch, output, format, dump_histograms } => {
            let mut c = graph.base_config()?;
            sketch.apply(&mut c)?;
            set_path(&mut c, "output", &output)?;
            set_opt(&mut c, "format", &format)?;
            set_path(&mut c, "dump_histograms", &dump_histograms)?;
            cmd_embed(&c)
        }
        Command::Eval { graph, sketch, replicas, classifier, pairs, output, json } => {
            let mut c = graph.base_config()?;
            sketch.apply(&mut c)?;
            replicas.apply(&mut c)?;
            classifier.apply(&mut c)?;
            set_path(&mut c, "output", &output)?;
            cmd_eval(&c, pairs.as_deref(), json)
        }
        Command::Stitch { graph, sketch, replicas, band_bits, output, json } => {
            let mut c = graph.base_config()?;
            sketch.apply(&mut c)?;
            replicas.apply(&mut c)?;
            set_opt(&mut c, "band_bits", &band_bits)?;
            set_path(&mut c, "output", &output)?;
            cmd_stitch(&c, json)
        }
        Command::Buckets { sketches, graph, sketch, band_bits, pairs, output, json } => {
            let mut c = graph.base_config()?;
            sketch.apply(&mut c)?;
            set_opt(&mut c, "band_bits", &band_bits)?;
            set_path(&mut c, "output", &output)?;
            cmd_buckets(&c, sketches.as_deref(), pairs.as_deref(), json)
        }
        Command::Replicas { graph, replicas, seed, output } => {
            let mut c = graph.base_config()?;
            replicas.apply(&mut c)?;
            set_opt(&mut c, "seed", &seed)?;
            set_path(&mut c, "output", &output)?;
            cmd_replicas(&c)
        }
    }
}

/// Validation and thread pool setup shared by every command.
fn prepare(c: &RunConfig) -> CliResult<()> {
    c.validate().stage("config")?;
    if let Some(n) = c.threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| Error::io("<thread pool>", io::Error::other(e.to_string())))?;
    }
    Ok(())
}

fn open(path: &Path) -> tempsketch::Result<BufReader<File>> {
    File::open(path).map(BufReader::new).map_err(|e| Error::io(path, e))
}

fn create(path: &Path) -> tempsketch::Result<BufWriter<File>> {
    File::create(path).map(BufWriter::new).map_err(|e| Error::io(path, e))
}

/// `path` with `.suffix` appended to its file name.
fn sibling(path: &Path, suffix: &str) -> PathBuf {
    let mut s = path.as_os_str().to_owned();
    s.push(".");
    s.push(suffix);
    PathBuf::from(s)
}

fn load_graph(c: &RunConfig) -> CliResult<TemporalGraph> {
    let input = c.input.as_ref().ok_or_else(|| Failure::Usage("an input edge list is required (--input)".into()))?;
    let types = match &c.node_types {
        Some(path) => Some(NodeTypeTable::parse(open(path)?).stage("graph")?),
        None => None,
    };
    let options = LoadOptions { schema: EdgeSchema::parse(&c.schema).stage("config")?, directed: c.directed };
    let g = load_edge_list(open(input)?, &options, types.as_ref()).stage("graph")?;
    eprintln!(
        "loaded {} nodes, {} edges ({}{})",
        g.num_nodes(),
        g.num_edges(),
        if g.is_directed() { "directed" } else { "undirected" },
        if g.is_temporal() { ", temporal" } else { "" }
    );
    Ok(g)
}

fn load_attributes(c: &RunConfig, g: &TemporalGraph) -> CliResult<Option<Attributes>> {
    let Some(path) = &c.attributes else { return Ok(None) };
    let values = parse_attributes(open(path)?, g).stage("features")?;
    Ok(Some(Attributes { values, fill: c.attribute_fill }))
}

fn write_manifest(c: &RunConfig, command: &str) -> CliResult<()> {
    let text = format!("# tempsketch {command}\n{}", c.manifest());
    match &c.output {
        Some(out) => {
            let path = sibling(out, "manifest");
            fs::write(&path, text).map_err(|e| Error::io(&path, e))?;
        }
        None => eprint!("{text}"),
    }
    Ok(())
}

fn write_report(report: &MetricReport, json: bool, extra: &[(&str, String)]) -> CliResult<()> {
    let text = if json {
        let mut s = report.to_json();
        s.pop();
        for (k, v) in extra {
            s.push_str(&format!(", \"{k}\": {v}"));
        }
        s + "}\n"
    } else {
        let mut s = report.to_key_value();
        for (k, v) in extra {
            s.push_str(&format!("{k}={v}\n"));
        }
        s
    };
    print!("{text}");
    Ok(())
}

fn write_candidates(pairs: &[(NodeId, NodeId)], labels: &[String], out: Option<&Path>) -> CliResult<()> {
    let lines = |w: &mut dyn Write| -> io::Result<()> {
        for &(u, v) in pairs {
            writeln!(w, "{}\t{}", labels[u as usize], labels[v as usize])?;
        }
        w.flush()
    };
    match out {
        Some(path) => lines(&mut create(path)?).map_err(|e| Error::io(path, e))?,
        None => lines(&mut io::stdout().lock()).map_err(|e| Error::io("<stdout>", e))?,
    }
    Ok(())
}

fn cmd_embed(c: &RunConfig) -> CliResult<()> {
    prepare(c)?;
    if c.output.is_none() && c.format == tempsketch::SketchFormat::Packed {
        return Err(Failure::Usage("packed sketches need an output file (--output)".into()));
    }
    let g = load_graph(c)?;
    let attrs = load_attributes(c, &g)?;
    let params = EmbedParams::from(c);
    let e = embed(&g, attrs.as_ref(), &params)?;
    match &c.output {
        Some(out) => {
            write_sketches(&e.sketches, g.labels(), out, c.format).stage("output")?;
            e.planes.write_file(&sibling(out, "planes")).stage("output")?;
        }
        None => {
            let mut stdout = io::stdout().lock();
            tempsketch::hashing::write_sparse(&e.sketches, g.labels(), &mut stdout)
                .map_err(|err| Error::io("<stdout>", err))?;
        }
    }
    if let Some(path) = &c.dump_histograms {
        let mut w = create(path)?;
        e.histograms.write_csv(g.labels(), &mut w).map_err(|err| Error::io(path, err))?;
    }
    eprintln!(
        "embedded {} nodes into {} bits ({} walks, histogram dim {})",
        e.sketches.num_rows(),
        e.sketches.num_bits(),
        e.policy.mode,
        e.histograms.layout().dim()
    );
    write_manifest(c, "embed")
}

fn cmd_eval(c: &RunConfig, pairs: Option<&Path>, json: bool) -> CliResult<()> {
    prepare(c)?;
    let g = load_graph(c)?;
    let attrs = load_attributes(c, &g)?;
    let params = EvalParams::from(c);
    let run = match pairs {
        Some(path) => {
            let pairs = parse_pairs(open(path)?, |l| g.node_id(l)).stage("pairs")?;
            let e = embed(&g, attrs.as_ref(), &params.embed)?;
            classify_pairs(&e.sketches, &pairs, &params)?
        }
        None => {
            let out = evaluate_supervised(&g, attrs.as_ref(), &params)?;
            eprintln!("injected {} replicas", out.benchmark.truth.pairs.len());
            out.run
        }
    };
    let extra = [("train_pairs", run.train.len().to_string()), ("test_pairs", run.test.len().to_string())];
    write_report(&run.report, json, &extra)?;
    if let Some(out) = &c.output {
        let mut w = create(out)?;
        let text = if json { run.report.to_json() + "\n" } else { run.report.to_key_value() };
        w.write_all(text.as_bytes()).and_then(|_| w.flush()).map_err(|e| Error::io(out, e))?;
    }
    write_manifest(c, "eval")
}

fn cmd_stitch(c: &RunConfig, json: bool) -> CliResult<()> {
    prepare(c)?;
    let g = load_graph(c)?;
    let attrs = load_attributes(c, &g)?;
    let out = evaluate_unsupervised(&g, attrs.as_ref(), &EvalParams::from(c))?;
    let candidates = out.table.candidate_pairs();
    eprintln!(
        "injected {} replicas; {} candidate pairs (bound {})",
        out.benchmark.truth.pairs.len(),
        candidates.len(),
        out.table.candidate_pair_bound()
    );
    let extra = [("candidates", candidates.len().to_string())];
    write_report(&out.report, json, &extra)?;
    if let Some(path) = &c.output {
        write_candidates(&candidates, out.benchmark.graph.labels(), Some(path))?;
    }
    write_manifest(c, "stitch")
}

fn cmd_buckets(c: &RunConfig, sketches: Option<&Path>, pairs: Option<&Path>, json: bool) -> CliResult<()> {
    prepare(c)?;
    let (labels, z) = match sketches {
        Some(path) => {
            let (labels, z) = read_sketches(path).stage("sketches")?;
            let labels = labels.unwrap_or_else(|| (0..z.num_rows()).map(|i| i.to_string()).collect());
            (labels, z)
        }
        None => {
            if c.input.is_none() {
                return Err(Failure::Usage("either --sketches or --input is required".into()));
            }
            let g = load_graph(c)?;
            let attrs = load_attributes(c, &g)?;
            let e = embed(&g, attrs.as_ref(), &EmbedParams::from(c))?;
            (g.labels().to_vec(), e.sketches)
        }
    };
    let table = bucket_sketches(&z, c.band_bits, c.seed)?;
    match pairs {
        Some(path) => {
            let index: std::collections::HashMap<&str, NodeId> =
                labels.iter().enumerate().map(|(i, l)| (l.as_str(), i as NodeId)).collect();
            let pairs = parse_pairs(open(path)?, |l| index.get(l).copied()).stage("pairs")?;
            let queries: Vec<(NodeId, NodeId)> = pairs.iter().map(|p| (p.u, p.v)).collect();
            let decisions = stitch_unsupervised(&table, &queries).stage("buckets")?;
            let truth: Vec<bool> = pairs.iter().map(|p| p.label).collect();
            let report = decision_metrics(&decisions, &truth).stage("metrics")?;
            write_report(&report, json, &[])?;
        }
        None => {
            let candidates = table.candidate_pairs();
            eprintln!("{} candidate pairs (bound {})", candidates.len(), table.candidate_pair_bound());
            write_candidates(&candidates, &labels, c.output.as_deref())?;
        }
    }
    write_manifest(c, "buckets")
}

fn cmd_replicas(c: &RunConfig) -> CliResult<()> {
    prepare(c)?;
    let g = load_graph(c)?;
    let params = EvalParams::from(c).replicas;
    let (perturbed, truth) = inject_replicas(&g, &params).stage("replicas")?;
    eprintln!("injected {} replicas; {} edges kept", truth.pairs.len(), perturbed.num_edges());
    match &c.output {
        Some(out) => {
            let mut w = create(out)?;
            perturbed.write_edge_list(&mut w).and_then(|_| w.flush()).map_err(|e| Error::io(out, e))?;
            let path = sibling(out, "truth");
            truth.write(&perturbed, create(&path)?).map_err(|e| Error::io(&path, e))?;
            if perturbed.num_node_types() > 1 {
                let path = sibling(out, "types");
                let mut w = create(&path)?;
                perturbed.write_node_types(&mut w).and_then(|_| w.flush()).map_err(|e| Error::io(&path, e))?;
            }
            eprintln!("reload with --schema \"{}\"", perturbed.canonical_schema());
        }
        None => {
            let mut stdout = io::stdout().lock();
            perturbed.write_edge_list(&mut stdout).map_err(|e| Error::io("<stdout>", e))?;
        }
    }
    write_manifest(c, "replicas")
}
