//! Command-line options and the optional config file.
//!
//! Every option can also be given in a TOML file under a table named after
//! the subcommand, e.g. `[cluster]` with `p_grid = "2:8"`. A JSON run
//! manifest written by a previous run is accepted as well, which replays
//! that run. Values given on the command line win over the file, and the
//! file wins over built-in defaults.

use std::fmt;
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand};
use serde::{Deserialize, Serialize};

/// Invalid invocation: bad flags, unreadable inputs, inconsistent options.
/// Reported with exit status 2.
#[derive(Debug)]
pub struct UsageError(pub String);

impl fmt::Display for UsageError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for UsageError {}

pub fn usage(msg: impl Into<String>) -> anyhow::Error {
    UsageError(msg.into()).into()
}

#[derive(Debug, Parser)]
#[command(
    name = "amdc",
    version,
    about = "Cluster categorical sequences by adjacency matrix decomposition"
)]
pub struct Cli {
    /// Worker threads for parallel steps (default: all cores).
    #[arg(long, global = true)]
    pub threads: Option<usize>,

    /// TOML config file, or a run manifest to replay.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Discretise timestamped episodes into fixed-length sequences.
    Ingest(IngestOpts),
    /// Fit the decomposition clustering and select (h, p).
    Cluster(ClusterOpts),
    /// Levenshtein distances, average linkage and Dunn-index selection.
    Baseline(BaselineOpts),
    /// Draw one dataset from a benchmark scenario.
    Simulate(SimulateOpts),
    /// Compare methods over replicated scenario datasets.
    Benchmark(BenchmarkOpts),
    /// Bootstrap stability of a fitted clustering.
    Stability(StabilityOpts),
    /// Contribution of each transition to each singular direction.
    Contrib(ContribOpts),
    /// Draw one SVG heatmap per cluster.
    Render(RenderOpts),
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Ingest(_) => "ingest",
            Command::Cluster(_) => "cluster",
            Command::Baseline(_) => "baseline",
            Command::Simulate(_) => "simulate",
            Command::Benchmark(_) => "benchmark",
            Command::Stability(_) => "stability",
            Command::Contrib(_) => "contrib",
            Command::Render(_) => "render",
        }
    }
}

/// Field-wise "first present value wins".
pub trait Merge {
    fn merge(self, fallback: Self) -> Self;
}

macro_rules! options {
    (
        $(#[$meta:meta])*
        pub struct $name:ident {
            $(
                $(#[$fmeta:meta])*
                pub $field:ident : $ty:ty,
            )*
        }
    ) => {
        $(#[$meta])*
        #[derive(Debug, Clone, Default, PartialEq, Args, Serialize, Deserialize)]
        #[serde(default, deny_unknown_fields)]
        pub struct $name {
            /// Directory for all outputs.
            #[arg(long)]
            #[serde(skip_serializing)]
            pub out_dir: Option<PathBuf>,
            $(
                $(#[$fmeta])*
                pub $field: $ty,
            )*
        }

        impl Merge for $name {
            fn merge(self, fallback: Self) -> Self {
                Self {
                    out_dir: self.out_dir.or(fallback.out_dir),
                    $($field: self.$field.merge(fallback.$field),)*
                }
            }
        }
    };
}

impl<T> Merge for Option<T> {
    fn merge(self, fallback: Self) -> Self {
        self.or(fallback)
    }
}

impl<T> Merge for Vec<T> {
    fn merge(self, fallback: Self) -> Self {
        if self.is_empty() {
            fallback
        } else {
            self
        }
    }
}

options! {
    pub struct IngestOpts {
        /// Episode CSV: group_id,date,start_iso8601,end_iso8601,state.
        #[arg(long)]
        pub input: Option<PathBuf>,
        /// Minutes per sequence position.
        #[arg(long)]
        pub quantum: Option<u32>,
        /// Start of the discretised day, HH:MM.
        #[arg(long)]
        pub day_start: Option<String>,
        /// End of the discretised day, HH:MM (24:00 allowed).
        #[arg(long)]
        pub day_end: Option<String>,
        /// Collapse activity labels to H/W/T/O.
        #[arg(long, num_args = 0..=1, default_missing_value = "true")]
        pub hwto: Option<bool>,
        /// Two-column CSV (label,state) used to relabel states.
        #[arg(long)]
        pub state_map: Option<PathBuf>,
        /// Keep sequences that contain uncovered intervals.
        #[arg(long, num_args = 0..=1, default_missing_value = "true")]
        pub keep_missing: Option<bool>,
        /// Drop sequences whose share of non-home positions exceeds this.
        #[arg(long)]
        pub max_nonhome: Option<f64>,
        /// States counted as non-home, comma separated.
        #[arg(long)]
        pub nonhome_states: Option<String>,
        /// Keep at most this many sequences per group (seeded sample).
        #[arg(long)]
        pub max_per_group: Option<usize>,
        /// Join consecutive days into one sequence per week.
        #[arg(long, num_args = 0..=1, default_missing_value = "true")]
        pub week: Option<bool>,
        /// Days joined by --week, e.g. mon-fri.
        #[arg(long)]
        pub week_days: Option<String>,
        #[arg(long)]
        pub seed: Option<u64>,
    }
}

options! {
    pub struct ClusterOpts {
        /// Sequence CSV.
        #[arg(long)]
        pub input: Option<PathBuf>,
        /// State alphabet, e.g. H,W,T,O (default: inferred, sorted).
        #[arg(long)]
        pub alphabet: Option<String>,
        /// Embedding dimensions, e.g. 1:10 or 1,2,4 (default: 1 to min(10, rank)).
        #[arg(long)]
        pub h_grid: Option<String>,
        /// Cluster counts, e.g. 2:10.
        #[arg(long)]
        pub p_grid: Option<String>,
        #[arg(long)]
        pub restarts: Option<usize>,
        #[arg(long)]
        pub seed: Option<u64>,
        /// Minutes per position, used to place weight windows.
        #[arg(long)]
        pub quantum: Option<u32>,
        /// Weight window HH:MM-HH:MM=w; repeatable.
        #[arg(long = "weight")]
        pub weights: Vec<String>,
        /// Render one SVG heatmap per cluster (default: true).
        #[arg(long, num_args = 0..=1, default_missing_value = "true")]
        pub render: Option<bool>,
    }
}

options! {
    pub struct BaselineOpts {
        #[arg(long)]
        pub input: Option<PathBuf>,
        #[arg(long)]
        pub alphabet: Option<String>,
        #[arg(long)]
        pub p_grid: Option<String>,
        /// Write the full distance matrix as CSV.
        #[arg(long, num_args = 0..=1, default_missing_value = "true")]
        pub emit_distance_matrix: Option<bool>,
        /// Render one SVG heatmap per cluster (default: true).
        #[arg(long, num_args = 0..=1, default_missing_value = "true")]
        pub render: Option<bool>,
    }
}

options! {
    pub struct SimulateOpts {
        /// Scenario, e.g. state-low, dur2-medium or duration:low:2.
        #[arg(long)]
        pub scenario: Option<String>,
        /// Markov order of the generating chains.
        #[arg(long)]
        pub order: Option<usize>,
        #[arg(long)]
        pub n_sequences: Option<usize>,
        #[arg(long)]
        pub seq_len: Option<usize>,
        #[arg(long)]
        pub seed: Option<u64>,
        /// Which benchmark replicate to reproduce.
        #[arg(long)]
        pub replicate: Option<usize>,
    }
}

options! {
    pub struct BenchmarkOpts {
        /// Scenarios to run; repeatable (default: the whole catalog).
        #[arg(long = "scenario")]
        pub scenarios: Vec<String>,
        /// Markov orders, comma separated.
        #[arg(long)]
        pub orders: Option<String>,
        /// Methods, comma separated: amdc, hier.
        #[arg(long)]
        pub methods: Option<String>,
        /// Datasets per scenario and order.
        #[arg(long)]
        pub replicates: Option<usize>,
        #[arg(long)]
        pub n_sequences: Option<usize>,
        #[arg(long)]
        pub seq_len: Option<usize>,
        /// 500 datasets of 250 sequences of length 500.
        #[arg(long, num_args = 0..=1, default_missing_value = "true")]
        pub full_scale: Option<bool>,
        #[arg(long)]
        pub p_grid: Option<String>,
        #[arg(long)]
        pub h_grid: Option<String>,
        #[arg(long)]
        pub restarts: Option<usize>,
        #[arg(long)]
        pub seed: Option<u64>,
    }
}

options! {
    pub struct StabilityOpts {
        #[arg(long)]
        pub input: Option<PathBuf>,
        #[arg(long)]
        pub alphabet: Option<String>,
        #[arg(long)]
        pub h_grid: Option<String>,
        #[arg(long)]
        pub p_grid: Option<String>,
        #[arg(long)]
        pub restarts: Option<usize>,
        #[arg(long)]
        pub seed: Option<u64>,
        #[arg(long)]
        pub quantum: Option<u32>,
        #[arg(long = "weight")]
        pub weights: Vec<String>,
        /// Bootstrap replicates.
        #[arg(long)]
        pub replicates: Option<usize>,
    }
}

options! {
    pub struct ContribOpts {
        #[arg(long)]
        pub input: Option<PathBuf>,
        #[arg(long)]
        pub alphabet: Option<String>,
        #[arg(long)]
        pub quantum: Option<u32>,
        #[arg(long = "weight")]
        pub weights: Vec<String>,
    }
}

options! {
    pub struct RenderOpts {
        #[arg(long)]
        pub input: Option<PathBuf>,
        #[arg(long)]
        pub alphabet: Option<String>,
        /// Assignment CSV with columns id,cluster.
        #[arg(long)]
        pub assignments: Option<PathBuf>,
        /// Positions between vertical separators (default: 288 for multi-day sequences).
        #[arg(long)]
        pub separator_every: Option<usize>,
    }
}

/// Per-subcommand tables of a config file.
#[derive(Debug, Default, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ConfigFile {
    pub threads: Option<usize>,
    /// Subcommand recorded in a replayed manifest.
    #[serde(skip)]
    pub replay_of: Option<String>,
    pub ingest: IngestOpts,
    pub cluster: ClusterOpts,
    pub baseline: BaselineOpts,
    pub simulate: SimulateOpts,
    pub benchmark: BenchmarkOpts,
    pub stability: StabilityOpts,
    pub contrib: ContribOpts,
    pub render: RenderOpts,
}

/// The part of a manifest needed to replay a run.
#[derive(Debug, Deserialize)]
struct ManifestReplay {
    command: String,
    config: serde_json::Value,
}

pub fn load_config(path: &Path) -> Result<ConfigFile> {
    if !path.is_file() {
        return Err(usage(format!("config file not found: {}", path.display())));
    }
    let text =
        std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    if path.extension().is_some_and(|e| e == "json") {
        let replay: ManifestReplay = serde_json::from_str(&text)
            .map_err(|e| usage(format!("{} is not a run manifest: {e}", path.display())))?;
        let table = serde_json::json!({ &replay.command: replay.config });
        let mut file: ConfigFile = serde_json::from_value(table).map_err(|e| {
            usage(format!(
                "invalid manifest config in {}: {e}",
                path.display()
            ))
        })?;
        file.replay_of = Some(replay.command);
        return Ok(file);
    }
    toml::from_str(&text).map_err(|e| usage(format!("invalid config file {}: {e}", path.display())))
}

/// Applies the config file under the command-line values.
pub fn merge_command(command: Command, file: ConfigFile) -> Command {
    match command {
        Command::Ingest(o) => Command::Ingest(o.merge(file.ingest)),
        Command::Cluster(o) => Command::Cluster(o.merge(file.cluster)),
        Command::Baseline(o) => Command::Baseline(o.merge(file.baseline)),
        Command::Simulate(o) => Command::Simulate(o.merge(file.simulate)),
        Command::Benchmark(o) => Command::Benchmark(o.merge(file.benchmark)),
        Command::Stability(o) => Command::Stability(o.merge(file.stability)),
        Command::Contrib(o) => Command::Contrib(o.merge(file.contrib)),
        Command::Render(o) => Command::Render(o.merge(file.render)),
    }
}

/// Parses `a:b` (inclusive range) or a comma-separated list.
pub fn parse_grid(spec: &str) -> Result<Vec<usize>> {
    let bad = || usage(format!("invalid grid `{spec}`; use a:b or a,b,c"));
    let values: Vec<usize> = if let Some((a, b)) = spec.split_once(':') {
        let a: usize = a.trim().parse().map_err(|_| bad())?;
        let b: usize = b.trim().parse().map_err(|_| bad())?;
        if a > b {
            return Err(bad());
        }
        (a..=b).collect()
    } else {
        spec.split(',')
            .map(|x| x.trim().parse().map_err(|_| bad()))
            .collect::<Result<_>>()?
    };
    if values.is_empty() {
        return Err(bad());
    }
    Ok(values)
}

/// Parses `HH:MM` (with `24:00` allowed) into minutes after midnight.
pub fn parse_clock(s: &str) -> Result<u32> {
    let bad = || usage(format!("invalid clock time `{s}`; use HH:MM"));
    let (h, m) = s.split_once(':').ok_or_else(bad)?;
    let h: u32 = h.parse().map_err(|_| bad())?;
    let m: u32 = m.parse().map_err(|_| bad())?;
    if m >= 60 || h > 24 || (h == 24 && m > 0) {
        return Err(bad());
    }
    Ok(h * 60 + m)
}
