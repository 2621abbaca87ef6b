//! The `dctsent` command-line front-end.
//!
//! Exit codes: 0 on success, 1 for usage errors, 2 for data errors.

mod bench;
mod encode;
mod eval;
mod gen;

use std::fmt;
use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};

use crate::encoder::{PoolingMethod, DEFAULT_MAX_K};
use crate::format::Format;
use crate::lexicon::OovPolicy;
use crate::probe::Task;

pub use bench::cmd_bench;
pub use encode::{cmd_encode, encode_stream, EncodeSummary};
pub use eval::{cmd_eval, EvalReport};
pub use gen::cmd_gen_tasks;

/// Default sentence-length cap (plan size); longer sentences are truncated.
pub const DEFAULT_MAX_LEN: usize = 256;

#[derive(Debug, Parser)]
#[command(name = "dctsent", version, about = "DCT sentence embeddings from word vectors")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Encode one sentence per input line into fixed-length vectors.
    Encode(EncodeArgs),
    /// Encode a probing dataset, tune a classifier on dev, report test accuracy.
    Eval(EvalArgs),
    /// Generate a synthetic probing dataset (TSV plus a JSON manifest).
    GenTasks(GenArgs),
    /// Time AVG and DCT(K) encoding over a corpus.
    Bench(BenchArgs),
}

#[derive(Debug, Clone, Args)]
pub struct PoolingArgs {
    /// Pooling method: dct, avg, max or dct-star.
    #[arg(long, default_value = "dct")]
    pub method: String,
    /// Number of DCT coefficients kept (required for dct and dct-star).
    #[arg(long)]
    pub k: Option<usize>,
    /// Accept K above the default limit of 7.
    #[arg(long)]
    pub allow_large_k: bool,
    /// Maximum sentence length in words; longer sentences are truncated.
    #[arg(long, default_value_t = DEFAULT_MAX_LEN)]
    pub max_len: usize,
}

impl PoolingArgs {
    pub fn method(&self) -> Result<PoolingMethod, CliError> {
        let method = PoolingMethod::from_parts(&self.method, self.k).map_err(CliError::Usage)?;
        let max_k = if self.allow_large_k { usize::MAX } else { DEFAULT_MAX_K };
        method
            .check_k(max_k)
            .map_err(|e| CliError::Usage(format!("{e} (use --allow-large-k to override)")))?;
        if self.max_len == 0 {
            return Err(CliError::Usage("--max-len must be at least 1".into()));
        }
        Ok(method)
    }
}

#[derive(Debug, Clone, Args)]
pub struct EncodeArgs {
    /// Word-vector text file.
    #[arg(long)]
    pub vectors: PathBuf,
    /// Input sentences, one per line (default: stdin).
    #[arg(long)]
    pub input: Option<PathBuf>,
    /// Output file (default: stdout).
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[command(flatten)]
    pub pooling: PoolingArgs,
    /// Out-of-vocabulary policy: skip, zero or error.
    #[arg(long, default_value = "skip")]
    pub oov: OovPolicy,
    /// Output format: tsv or bin.
    #[arg(long, default_value = "tsv")]
    pub format: Format,
    /// Keep token case.
    #[arg(long)]
    pub no_lowercase: bool,
    /// Lines encoded per parallel batch.
    #[arg(long, default_value_t = 4096, hide = true)]
    pub chunk: usize,
}

#[derive(Debug, Clone, Args)]
pub struct EvalArgs {
    /// Dataset TSV (split, label, sentence).
    #[arg(long)]
    pub input: PathBuf,
    /// Task name for the report.
    #[arg(long)]
    pub task: Option<Task>,
    /// Word-vector text file; if absent, seeded synthetic vectors are used.
    #[arg(long)]
    pub vectors: Option<PathBuf>,
    /// Dimension of synthetic vectors.
    #[arg(long, default_value_t = 50)]
    pub dim: usize,
    #[command(flatten)]
    pub pooling: PoolingArgs,
    #[arg(long, default_value = "skip")]
    pub oov: OovPolicy,
    /// Seed for synthetic vectors and classifier training.
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Hyper-parameter grid: full (hidden 0/50/100/200/512 × dropout 0/0.1/0.2)
    /// or small (hidden 0/50 × dropout 0/0.1).
    #[arg(long, default_value = "full")]
    pub grid: String,
    #[arg(long, default_value_t = 40)]
    pub epochs: usize,
    #[arg(long, default_value_t = 0.05)]
    pub learning_rate: f64,
    #[arg(long, default_value_t = 32)]
    pub batch_size: usize,
    /// Also write the report here.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
pub struct GenArgs {
    /// sentlen, wc or bshift.
    #[arg(long)]
    pub task: Task,
    /// Dataset TSV path; the manifest goes to `<out>.manifest.json`.
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    pub vocab: Option<usize>,
    /// sentlen: comma-separated length ranges, e.g. `1-4,5-8`.
    #[arg(long)]
    pub buckets: Option<String>,
    /// sentlen: sentences per bucket.
    #[arg(long)]
    pub per_bucket: Option<usize>,
    /// wc: number of designated target words.
    #[arg(long)]
    pub target_words: Option<usize>,
    /// wc: sentences per target word.
    #[arg(long)]
    pub per_word: Option<usize>,
    /// wc, bshift: sentence length.
    #[arg(long)]
    pub sent_len: Option<usize>,
    /// bshift: number of base sentences (each yields a pair).
    #[arg(long)]
    pub base: Option<usize>,
}

#[derive(Debug, Clone, Args)]
pub struct BenchArgs {
    /// Corpus, one sentence per line (requires --vectors). Without it a
    /// synthetic corpus is generated.
    #[arg(long, requires = "vectors")]
    pub input: Option<PathBuf>,
    #[arg(long)]
    pub vectors: Option<PathBuf>,
    #[arg(long, default_value = "skip")]
    pub oov: OovPolicy,
    /// Synthetic corpus size.
    #[arg(long, default_value_t = 10_000)]
    pub sentences: usize,
    /// Synthetic vector dimension.
    #[arg(long, default_value_t = 50)]
    pub dim: usize,
    /// Synthetic sentence length range.
    #[arg(long, default_value_t = 5)]
    pub min_words: usize,
    #[arg(long, default_value_t = 30)]
    pub max_words: usize,
    /// Values of K to time.
    #[arg(long, value_delimiter = ',', default_value = "1,2,3,4,5,6,7")]
    pub ks: Vec<usize>,
    /// Timed repetitions per method (median reported).
    #[arg(long, default_value_t = 5)]
    pub reps: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value_t = DEFAULT_MAX_LEN)]
    pub max_len: usize,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Data(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 1,
            CliError::Data(_) => 2,
        }
    }

    pub(crate) fn data(e: impl fmt::Display) -> Self {
        CliError::Data(e.to_string())
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Usage(m) => write!(f, "usage error: {m}"),
            CliError::Data(m) => write!(f, "error: {m}"),
        }
    }
}

impl std::error::Error for CliError {}

impl From<io::Error> for CliError {
    fn from(e: io::Error) -> Self {
        CliError::Data(e.to_string())
    }
}

pub(crate) fn open_output(path: Option<&Path>) -> Result<Box<dyn Write>, CliError> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(
            File::create(p).map_err(|e| CliError::Data(format!("{}: {e}", p.display())))?,
        )),
        None => Box::new(BufWriter::new(io::stdout().lock())),
    })
}

pub(crate) fn open_input(path: &Path) -> Result<File, CliError> {
    File::open(path).map_err(|e| CliError::Data(format!("{}: {e}", path.display())))
}

pub fn run(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Encode(args) => cmd_encode(&args).map(|_| ()),
        Command::Eval(args) => cmd_eval(&args).map(|_| ()),
        Command::GenTasks(args) => cmd_gen_tasks(&args),
        Command::Bench(args) => cmd_bench(&args).map(|_| ()),
    }
}

/// Parse `args` and run; returns the process exit code.
pub fn main_with_args<I, S>(args: I) -> i32
where
    I: IntoIterator<Item = S>,
    S: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    match run(cli) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("{e}");
            e.exit_code()
        }
    }
}
