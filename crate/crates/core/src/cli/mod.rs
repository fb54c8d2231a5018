//! Batch front end. Every subcommand resolves its parameters from flags, then
//! an optional TOML config, then defaults, and writes one output file that
//! starts with the resolved configuration.
//!
//! Exit codes: 2 for usage or config errors, 1 when an experiment violates
//! its reference bound (or fails for another reason), 0 otherwise.

mod commands;

use std::collections::BTreeMap;
use std::ffi::OsString;
use std::fmt::Display;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use clap::{Args, Parser, Subcommand};

pub const OUT_DIR_ENV: &str = "BCLIQUE_OUT_DIR";

#[derive(Debug, Parser)]
#[command(name = "bclique", version, about = "Experiments on binary-encoded clique formulas")]
pub struct Cli {
    #[command(flatten)]
    pub global: Global,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args)]
pub struct Global {
    /// TOML file; top-level keys apply to every command, a `[command]` table
    /// (e.g. `[walk]`) overrides them.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Output directory; defaults to $BCLIQUE_OUT_DIR, then the working directory.
    #[arg(long, global = true)]
    pub out_dir: Option<PathBuf>,
    /// Output file, overriding the per-command default name.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Worker threads.
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    /// Add a generation timestamp line to the header.
    #[arg(long, global = true)]
    pub timestamp: bool,
}

#[derive(Debug, Clone, Args, Default)]
pub struct GraphArgs {
    #[arg(long)]
    pub n: Option<usize>,
    #[arg(long)]
    pub k: Option<usize>,
    #[arg(long)]
    pub p: Option<f64>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Read the graph from a JSON file instead of sampling it.
    #[arg(long)]
    pub graph: Option<PathBuf>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Sample G(n, p, k) and write it as JSON.
    SampleGraph(GraphArgs),
    /// Write a clique formula as DIMACS.
    Encode {
        #[command(subcommand)]
        which: EncodeCmd,
    },
    /// Density properties of a graph.
    CheckDensity {
        #[command(subcommand)]
        which: DensityCmd,
    },
    /// Frequency of tuples with many non-neighbors over sampled graphs.
    Concentration(ConcentrationArgs),
    /// The random walk through a parity decision tree.
    Walk {
        #[command(subcommand)]
        which: WalkCmd,
    },
    /// Affine restriction extracted from a successful walk.
    Extract(ExtractArgs),
    /// Closure and safety of random linear systems.
    ClosureTest(ClosureArgs),
    /// Satisfaction probability of random systems by rank.
    RankProb(RankArgs),
    /// Block width, the node map and the covering tree.
    Bottleneck {
        #[command(subcommand)]
        which: BottleneckCmd,
    },
    /// Check a refutation of the block formula.
    Verify {
        #[command(subcommand)]
        which: ProofCmd,
    },
    /// Translate a refutation into a shape-DAG.
    Translate {
        #[command(subcommand)]
        which: TranslateCmd,
    },
    /// Communication protocols over the input split.
    Comm {
        #[command(subcommand)]
        which: CommCmd,
    },
}

#[derive(Debug, Subcommand)]
pub enum EncodeCmd {
    /// Binary encoding of a k-clique in G(n, p).
    Bin(GraphArgs),
    /// Block encoding of a transversal clique.
    Block(GraphArgs),
}

#[derive(Debug, Subcommand)]
pub enum DensityCmd {
    /// Least s for which the graph is s-almost-complete.
    Ac {
        #[command(flatten)]
        graph: GraphArgs,
        /// Fail unless the graph is s-almost-complete.
        #[arg(long)]
        s: Option<usize>,
    },
    /// Bounded common neighborhoods.
    Bcn {
        #[command(flatten)]
        graph: GraphArgs,
        #[arg(long)]
        alpha: Option<f64>,
        #[arg(long)]
        beta: Option<f64>,
        #[arg(long)]
        r: Option<usize>,
        /// auto, exhaustive or sampled.
        #[arg(long)]
        mode: Option<String>,
        #[arg(long)]
        trials: Option<u64>,
        #[arg(long)]
        budget: Option<u64>,
    },
}

#[derive(Debug, Args)]
pub struct ConcentrationArgs {
    #[arg(long)]
    pub n: Option<usize>,
    #[arg(long)]
    pub k: Option<usize>,
    #[arg(long)]
    pub p: Option<f64>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub graphs: Option<u64>,
    #[arg(long)]
    pub tuples: Option<u64>,
}

#[derive(Debug, Clone, Args)]
pub struct TreeArgs {
    #[command(flatten)]
    pub graph: GraphArgs,
    /// Vertices of M as `block:index`, comma separated.
    #[arg(long)]
    pub m: Option<String>,
    #[arg(long)]
    pub depth: Option<usize>,
    /// Most variables per query.
    #[arg(long)]
    pub max_vars: Option<usize>,
    /// Seed of the random tree.
    #[arg(long)]
    pub tree_seed: Option<u64>,
    /// Read the tree from a file in nested text form instead.
    #[arg(long)]
    pub tree: Option<PathBuf>,
}

#[derive(Debug, Subcommand)]
pub enum WalkCmd {
    /// One walk, written as a JSON transcript.
    Simulate(TreeArgs),
    /// Node visits of walks against direct runs.
    Distribution {
        #[command(flatten)]
        tree: TreeArgs,
        #[arg(long)]
        trials: Option<u64>,
        /// Fail when the leaf total-variation distance exceeds this.
        #[arg(long)]
        tv_max: Option<f64>,
    },
    /// Non-failing fraction of walks against the success bound.
    SuccessRate {
        #[command(flatten)]
        tree: TreeArgs,
        #[arg(long)]
        trials: Option<u64>,
        #[arg(long)]
        alpha: Option<f64>,
        /// Measured on the graph when absent.
        #[arg(long)]
        beta: Option<f64>,
        #[arg(long)]
        r: Option<usize>,
    },
}

#[derive(Debug, Args)]
pub struct ExtractArgs {
    #[command(flatten)]
    pub tree: TreeArgs,
    /// Walks tried before giving up on a success.
    #[arg(long)]
    pub attempts: Option<u64>,
    #[arg(long)]
    pub r: Option<usize>,
}

#[derive(Debug, Args)]
pub struct ClosureArgs {
    #[arg(long)]
    pub systems: Option<u64>,
    #[arg(long)]
    pub max_k: Option<usize>,
    /// Most bits per block.
    #[arg(long)]
    pub max_bits: Option<usize>,
    #[arg(long)]
    pub seed: Option<u64>,
}

#[derive(Debug, Args)]
pub struct RankArgs {
    #[arg(long)]
    pub n: Option<usize>,
    #[arg(long)]
    pub k: Option<usize>,
    #[arg(long)]
    pub max_rank: Option<usize>,
    /// Size of each allowed set; defaults to ⌈2n/3⌉.
    #[arg(long)]
    pub allowed: Option<usize>,
    #[arg(long)]
    pub trials: Option<u64>,
    #[arg(long)]
    pub seed: Option<u64>,
}

#[derive(Debug, Subcommand)]
pub enum BottleneckCmd {
    /// Map inputs to nodes of the DAG from a refutation of the block formula.
    Mu {
        #[command(flatten)]
        graph: GraphArgs,
        #[arg(long)]
        q: Option<usize>,
    },
    /// Covering tree on a random triangle.
    Cover {
        #[command(flatten)]
        graph: GraphArgs,
        #[arg(long)]
        q: Option<usize>,
        /// Rectangles whose union forms X'.
        #[arg(long)]
        support: Option<usize>,
        #[arg(long)]
        node_cap: Option<usize>,
    },
    /// Block-depth census over random covering trees.
    Census {
        #[command(flatten)]
        graph: GraphArgs,
        #[arg(long)]
        q: Option<usize>,
        #[arg(long)]
        support: Option<usize>,
        #[arg(long)]
        instances: Option<u64>,
        #[arg(long)]
        node_cap: Option<usize>,
        /// `matching` for a 1-almost-complete graph, `gnp` for G(n, p, k).
        #[arg(long)]
        family: Option<String>,
    },
}

#[derive(Debug, Clone, Args)]
pub struct ProofArgs {
    #[command(flatten)]
    pub graph: GraphArgs,
    /// Proof in text form; a tree-like refutation is generated when absent.
    #[arg(long)]
    pub proof: Option<PathBuf>,
    /// Also write the proof that was checked.
    #[arg(long)]
    pub save_proof: Option<PathBuf>,
    /// Use the hand-built refutation of the edgeless n = 2, k = 2 instance.
    #[arg(long)]
    pub edgeless: bool,
    #[arg(long)]
    pub budget: Option<usize>,
}

#[derive(Debug, Subcommand)]
pub enum ProofCmd {
    Cp(ProofArgs),
    Rlin(ProofArgs),
}

#[derive(Debug, Subcommand)]
pub enum TranslateCmd {
    CpDag(ProofArgs),
    RlinDag(ProofArgs),
}

#[derive(Debug, Clone, Args)]
pub struct ProtocolArgs {
    #[command(flatten)]
    pub graph: GraphArgs,
    /// Read the protocol from JSON instead of building one.
    #[arg(long)]
    pub protocol: Option<PathBuf>,
    /// baseline, random or constant.
    #[arg(long)]
    pub kind: Option<String>,
    #[arg(long)]
    pub a: Option<usize>,
    #[arg(long)]
    pub b: Option<usize>,
    #[arg(long)]
    pub depth: Option<usize>,
    #[arg(long)]
    pub protocol_seed: Option<u64>,
    #[arg(long)]
    pub gamma: Option<f64>,
    /// Most free coordinates per side for the spread check.
    #[arg(long)]
    pub free_budget: Option<usize>,
    #[arg(long)]
    pub save_protocol: Option<PathBuf>,
}

#[derive(Debug, Subcommand)]
pub enum CommCmd {
    /// Structural audit and per-leaf spread.
    Check(ProtocolArgs),
    /// Distributional error, exhaustive against sampled.
    Error {
        #[command(flatten)]
        protocol: ProtocolArgs,
        #[arg(long)]
        trials: Option<u64>,
    },
    /// Per-leaf fixed blocks and non-edge probabilities.
    Census {
        #[command(flatten)]
        protocol: ProtocolArgs,
        /// Defaults to the least s for which the graph is s-almost-complete.
        #[arg(long)]
        s: Option<usize>,
    },
}

#[derive(Debug)]
pub enum CliError {
    /// Invalid configuration or parameters.
    Config(String),
    /// The experiment ran but violated its reference.
    Assertion(String),
    /// Anything else, e.g. I/O.
    Failed(String),
}

impl CliError {
    pub fn code(&self) -> i32 {
        match self {
            CliError::Config(_) => 2,
            CliError::Assertion(_) | CliError::Failed(_) => 1,
        }
    }
}

impl Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Config(m) => write!(f, "config error: {m}"),
            CliError::Assertion(m) => write!(f, "assertion failed: {m}"),
            CliError::Failed(m) => write!(f, "error: {m}"),
        }
    }
}

pub(crate) fn config_err(e: impl Display) -> CliError {
    CliError::Config(e.to_string())
}

pub(crate) fn failed(e: impl Display) -> CliError {
    CliError::Failed(e.to_string())
}

/// Resolved parameters of one run, in the order they were looked up.
pub struct Ctx {
    name: String,
    table: toml::Table,
    resolved: BTreeMap<String, String>,
    out_dir: PathBuf,
    out: Option<PathBuf>,
    timestamp: bool,
}

/// Values readable from TOML.
pub trait TomlValue: Sized {
    fn from_toml(v: &toml::Value) -> Option<Self>;
}

impl TomlValue for usize {
    fn from_toml(v: &toml::Value) -> Option<Self> {
        v.as_integer().and_then(|i| usize::try_from(i).ok())
    }
}

impl TomlValue for u64 {
    fn from_toml(v: &toml::Value) -> Option<Self> {
        v.as_integer().and_then(|i| u64::try_from(i).ok())
    }
}

impl TomlValue for f64 {
    fn from_toml(v: &toml::Value) -> Option<Self> {
        v.as_float().or_else(|| v.as_integer().map(|i| i as f64))
    }
}

impl TomlValue for String {
    fn from_toml(v: &toml::Value) -> Option<Self> {
        v.as_str().map(str::to_string)
    }
}

impl TomlValue for PathBuf {
    fn from_toml(v: &toml::Value) -> Option<Self> {
        v.as_str().map(PathBuf::from)
    }
}

impl Ctx {
    fn new(name: &str, global: &Global) -> Result<Self, CliError> {
        let mut table = toml::Table::new();
        if let Some(path) = &global.config {
            let text = std::fs::read_to_string(path).map_err(|e| config_err(format!("{}: {e}", path.display())))?;
            let doc: toml::Table = text.parse().map_err(|e| config_err(format!("{}: {e}", path.display())))?;
            let section = name.split(' ').next().unwrap_or(name).to_string();
            for (k, v) in &doc {
                if !v.is_table() {
                    table.insert(k.clone(), v.clone());
                }
            }
            if let Some(toml::Value::Table(t)) = doc.get(&section) {
                for (k, v) in t {
                    table.insert(k.clone(), v.clone());
                }
            }
        }
        let out_dir = match &global.out_dir {
            Some(d) => d.clone(),
            None => match table.get("out_dir").and_then(PathBuf::from_toml) {
                Some(d) => d,
                None => std::env::var_os(OUT_DIR_ENV).map(PathBuf::from).unwrap_or_else(|| PathBuf::from(".")),
            },
        };
        Ok(Self {
            name: name.to_string(),
            table,
            resolved: BTreeMap::new(),
            out_dir,
            out: global.out.clone(),
            timestamp: global.timestamp,
        })
    }

    fn lookup<T: TomlValue>(&self, key: &str) -> Result<Option<T>, CliError> {
        match self.table.get(key) {
            None => Ok(None),
            Some(v) => T::from_toml(v)
                .map(Some)
                .ok_or_else(|| config_err(format!("config key `{key}` has the wrong type"))),
        }
    }

    /// Flag, then config, then `default`.
    pub fn get<T: TomlValue + Display + Clone>(&mut self, key: &str, flag: Option<T>, default: T) -> Result<T, CliError> {
        let v = match flag {
            Some(v) => v,
            None => self.lookup(key)?.unwrap_or(default),
        };
        self.resolved.insert(key.to_string(), v.to_string());
        Ok(v)
    }

    /// Flag, then config, else absent.
    pub fn opt<T: TomlValue + Display + Clone>(&mut self, key: &str, flag: Option<T>) -> Result<Option<T>, CliError> {
        let v = match flag {
            Some(v) => Some(v),
            None => self.lookup(key)?,
        };
        if let Some(v) = &v {
            self.resolved.insert(key.to_string(), v.to_string());
        }
        Ok(v)
    }

    pub fn path(&mut self, key: &str, flag: Option<PathBuf>) -> Result<Option<PathBuf>, CliError> {
        let v = match flag {
            Some(v) => Some(v),
            None => self.lookup::<PathBuf>(key)?,
        };
        if let Some(v) = &v {
            self.resolved.insert(key.to_string(), v.display().to_string());
        }
        Ok(v)
    }

    /// Records a derived value in the header.
    pub fn note(&mut self, key: &str, value: impl Display) {
        self.resolved.insert(key.to_string(), value.to_string());
    }

    pub fn parse<T: FromStr>(&mut self, key: &str, flag: Option<String>, default: &str) -> Result<T, CliError> {
        let s = self.get(key, flag, default.to_string())?;
        s.parse()
            .map_err(|_| config_err(format!("`{key}` cannot be `{s}`")))
    }

    /// Header lines: the command, one `key = value` line per parameter and
    /// optionally a timestamp.
    pub fn header(&self) -> Vec<String> {
        let mut lines = vec![format!("bclique {}", self.name)];
        lines.extend(self.resolved.iter().map(|(k, v)| format!("{k} = {v}")));
        if self.timestamp {
            let secs = std::time::SystemTime::now()
                .duration_since(std::time::UNIX_EPOCH)
                .map(|d| d.as_secs())
                .unwrap_or(0);
            lines.push(format!("generated = {secs}"));
        }
        lines
    }

    pub fn config_json(&self) -> serde_json::Value {
        let mut m = serde_json::Map::new();
        m.insert("command".into(), self.name.clone().into());
        for (k, v) in &self.resolved {
            m.insert(k.clone(), v.clone().into());
        }
        if self.timestamp {
            m.insert("generated".into(), self.header().last().cloned().unwrap_or_default().into());
        }
        serde_json::Value::Object(m)
    }

    fn target(&self, default_name: &str) -> PathBuf {
        self.out.clone().unwrap_or_else(|| self.out_dir.join(default_name))
    }

    pub fn write(&self, default_name: &str, contents: &str) -> Result<PathBuf, CliError> {
        let path = self.target(default_name);
        write_file(&path, contents)?;
        println!("wrote {}", path.display());
        Ok(path)
    }

    /// JSON object with the configuration under `config`.
    pub fn write_json(&self, default_name: &str, mut value: serde_json::Value) -> Result<PathBuf, CliError> {
        match &mut value {
            serde_json::Value::Object(m) => {
                m.insert("config".into(), self.config_json());
            }
            other => {
                value = serde_json::json!({ "config": self.config_json(), "result": other.take() });
            }
        }
        let text = serde_json::to_string_pretty(&value).map_err(failed)? + "\n";
        self.write(default_name, &text)
    }

    pub fn write_csv(&self, default_name: &str, rows: &[crate::stats::CsvRow]) -> Result<PathBuf, CliError> {
        let mut buf = Vec::new();
        crate::stats::write_csv(&mut buf, &self.header(), rows).map_err(failed)?;
        self.write(default_name, &String::from_utf8(buf).map_err(failed)?)
    }

    /// Writes to a path given by the user, outside the main output.
    pub fn write_extra(&self, path: &Path, contents: &str) -> Result<(), CliError> {
        write_file(path, contents)?;
        println!("wrote {}", path.display());
        Ok(())
    }
}

fn write_file(path: &Path, contents: &str) -> Result<(), CliError> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir).map_err(|e| failed(format!("{}: {e}", dir.display())))?;
    }
    std::fs::write(path, contents).map_err(|e| failed(format!("{}: {e}", path.display())))
}

/// Parses `args` (program name first) and runs the command; returns the exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = e.exit_code();
            let _ = e.print();
            return code;
        }
    };
    match execute(cli) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("{e}");
            e.code()
        }
    }
}

pub fn execute(cli: Cli) -> Result<(), CliError> {
    if let Some(t) = cli.global.threads {
        if t == 0 {
            return Err(config_err("--threads must be positive"));
        }
        // a pool set earlier in the same process is kept
        let _ = rayon::ThreadPoolBuilder::new().num_threads(t).build_global();
    }
    commands::dispatch(cli.command, &cli.global)
}
