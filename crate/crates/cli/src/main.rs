use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use clap::{ArgAction, Args, Parser, Subcommand};
use serde::Serialize;

use rtknn::dataset::{read_records, split_records};
use rtknn::experiment::{exact_truth, run_experiment, sweep, SweepAxis};
use rtknn::{
    Aabb, Dataset, DatasetFormat, Error, GroundTruth, MetricSpec, ReductionConfig, SearchIndex,
    DEFAULT_LEAF_SIZE,
};

const EXIT_INPUT: u8 = 2;
const EXIT_INVARIANT: u8 = 3;

#[derive(Parser)]
#[command(
    name = "rtknn",
    version,
    about = "k-NN search over an emulated ray-tracing BVH"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Build the index and report its shape.
    BuildInfo {
        #[command(flatten)]
        common: Common,
        /// Include an indented dump of the tree.
        #[arg(long)]
        dump: bool,
    },
    /// Run every query and score it against the exact oracle.
    Query {
        #[command(flatten)]
        common: Common,
        /// Reuse ground truth written by `oracle`.
        #[arg(long)]
        truth: Option<PathBuf>,
    },
    /// Repeat `query` over increasing values of one parameter.
    Sweep {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        axis: SweepAxis,
        /// Comma-separated, strictly increasing.
        #[arg(long, value_delimiter = ',', required = true)]
        values: Vec<f64>,
    },
    /// Compute exact neighbors by linear scan.
    Oracle {
        #[command(flatten)]
        common: Common,
    },
}

#[derive(Args)]
struct Common {
    /// Dataset file; uniform random points are generated from --seed when omitted.
    #[arg(long)]
    data: Option<PathBuf>,
    #[arg(long, default_value = "csv-xyz")]
    format: DatasetFormat,
    /// Number of data records.
    #[arg(long, default_value_t = 10_000)]
    n: usize,
    /// Number of query records (default 100, or every record of --query-file).
    #[arg(long)]
    queries: Option<usize>,
    /// Read queries from this file (same format as --data) instead of the records after the data.
    #[arg(long)]
    query_file: Option<PathBuf>,
    #[arg(long, default_value = "lp:2")]
    metric: MetricSpec,
    #[arg(long, default_value_t = 0.1, allow_hyphen_values = true)]
    radius: f64,
    #[arg(long, default_value_t = 10)]
    k: usize,
    #[arg(long, default_value_t = false, action = ArgAction::Set)]
    enhanced: bool,
    #[arg(long, default_value_t = DEFAULT_LEAF_SIZE)]
    leaf_size: usize,
    #[arg(long, default_value_t = 1)]
    repeats: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Write JSON here instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
}

const DEFAULT_QUERIES: usize = 100;

impl Common {
    fn config(&self) -> ReductionConfig {
        ReductionConfig::new(self.metric, self.radius, self.k)
            .enhanced(self.enhanced)
            .leaf_size(self.leaf_size)
    }

    fn dataset(&self) -> Result<Dataset, Error> {
        match (&self.data, &self.query_file) {
            (None, None) => Ok(Dataset::uniform(
                self.format,
                self.n,
                self.queries.unwrap_or(DEFAULT_QUERIES),
                self.seed,
            )),
            (None, Some(qf)) => {
                let queries = take_queries(read_records(self.format, qf)?, self.queries)?;
                let data = Dataset::uniform(self.format, self.n, 0, self.seed).data;
                Ok(Dataset { data, queries })
            }
            (Some(path), None) => split_records(
                read_records(self.format, path)?,
                self.n,
                self.queries.unwrap_or(DEFAULT_QUERIES),
            ),
            (Some(path), Some(qf)) => {
                let data = split_records(read_records(self.format, path)?, self.n, 0)?.data;
                let queries = take_queries(read_records(self.format, qf)?, self.queries)?;
                Ok(Dataset { data, queries })
            }
        }
    }

    fn emit<T: Serialize>(&self, value: &T) -> Result<(), Error> {
        let mut w: Box<dyn Write> = match &self.out {
            Some(path) => Box::new(BufWriter::new(File::create(path)?)),
            None => Box::new(BufWriter::new(io::stdout().lock())),
        };
        serde_json::to_writer_pretty(&mut w, value)?;
        writeln!(w)?;
        w.flush()?;
        Ok(())
    }
}

fn take_queries(
    mut records: Vec<rtknn::InputPoint>,
    q: Option<usize>,
) -> Result<Vec<rtknn::InputPoint>, Error> {
    if let Some(q) = q {
        if q > records.len() {
            return Err(Error::InsufficientRecords {
                needed: q,
                available: records.len(),
            });
        }
        records.truncate(q);
    }
    Ok(records)
}

#[derive(Serialize)]
struct BuildInfo {
    schema: &'static str,
    metric: MetricSpec,
    radius: f64,
    enhanced: bool,
    leaf_size: usize,
    n: usize,
    transforms: Vec<&'static str>,
    half_width: f64,
    node_count: usize,
    leaf_count: usize,
    depth: usize,
    root_bounds: Aabb,
    #[serde(skip_serializing_if = "Option::is_none")]
    tree: Option<String>,
    timings: BuildTimings,
}

#[derive(Serialize)]
struct BuildTimings {
    build_ms: f64,
}

#[derive(Serialize)]
struct OracleOutput<'a> {
    schema: &'static str,
    seed: u64,
    n: usize,
    queries: usize,
    #[serde(flatten)]
    truth: &'a GroundTruth,
}

fn run(cli: Cli) -> Result<(), Error> {
    match cli.command {
        Command::BuildInfo { common, dump } => {
            let dataset = common.dataset()?;
            let config = common.config();
            let start = Instant::now();
            let index = SearchIndex::build(&dataset.data, &config)?;
            let build_ms = start.elapsed().as_secs_f64() * 1e3;
            let bvh = index.inner().bvh();
            common.emit(&BuildInfo {
                schema: "rtknn.build-info/v1",
                metric: config.metric,
                radius: config.radius,
                enhanced: config.enhanced,
                leaf_size: config.leaf_size,
                n: dataset.data.len(),
                transforms: index.chain().0.iter().map(|t| t.name()).collect(),
                half_width: index.inner().half_width(),
                node_count: bvh.node_count(),
                leaf_count: bvh.leaf_count(),
                depth: bvh.depth(),
                root_bounds: bvh.root_bounds(),
                tree: dump.then(|| bvh.dump()),
                timings: BuildTimings { build_ms },
            })
        }
        Command::Query { common, truth } => {
            let dataset = common.dataset()?;
            let config = common.config();
            let truth = truth.map(GroundTruth::load).transpose()?;
            let mut report = run_experiment(&dataset, &config, common.repeats, truth.as_ref())?;
            report.config.seed = Some(common.seed);
            common.emit(&report)
        }
        Command::Sweep {
            common,
            axis,
            values,
        } => {
            let dataset = common.dataset()?;
            let mut reports = sweep(&dataset, &common.config(), axis, &values, common.repeats)?;
            for r in &mut reports {
                r.config.seed = Some(common.seed);
            }
            common.emit(&reports)
        }
        Command::Oracle { common } => {
            let dataset = common.dataset()?;
            let truth = exact_truth(&dataset, common.metric, common.k)?;
            common.emit(&OracleOutput {
                schema: "rtknn.ground-truth/v1",
                seed: common.seed,
                n: dataset.data.len(),
                queries: dataset.queries.len(),
                truth: &truth,
            })
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            if e.is_input_error() {
                ExitCode::from(EXIT_INPUT)
            } else {
                ExitCode::from(EXIT_INVARIANT)
            }
        }
    }
}
