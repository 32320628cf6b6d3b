use std::fs::{self, File};
use std::io::{self, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{anyhow, bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::json;

use troenpy::corpus::{Corpus, CorpusFormat, SplitSpec, TokenizerConfig};
use troenpy::format::sig9;
use troenpy::itc::{self, Distribution, LogConfig};
use troenpy::knn::{evaluate, EvalOptions};
use troenpy::quantum::{self, DensityMatrix};
use troenpy::selftro::{embedding_init, rank_terms, NeighborCounts, SelfTroenpyTable};
use troenpy::weighting::{ClassCounts, Negatives, Scheme, Smoothing, TermWeights, WeightOptions};

/// Certainty-based information measures and term weighting.
///
/// Every flag can also be set through an environment variable named
/// TROENPY_<FLAG>, e.g. TROENPY_SEED or TROENPY_CLAMP_EPS.
#[derive(Debug, Parser, Serialize)]
#[command(name = "troenpy", version)]
struct Cli {
    #[command(flatten)]
    common: Common,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Clone, Copy, ValueEnum, Serialize)]
enum LogBase {
    #[serde(rename = "e")]
    E,
    #[value(name = "2")]
    #[serde(rename = "2")]
    Two,
    #[value(name = "10")]
    #[serde(rename = "10")]
    Ten,
}

impl LogBase {
    fn value(self) -> f64 {
        match self {
            LogBase::E => std::f64::consts::E,
            LogBase::Two => 2.0,
            LogBase::Ten => 10.0,
        }
    }
}

#[derive(Debug, Clone, Copy, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
enum FormatArg {
    Tsv,
    #[value(name = "dir-per-class", alias = "dir")]
    DirPerClass,
    #[value(name = "plain-lines", alias = "lines")]
    PlainLines,
}

impl From<FormatArg> for CorpusFormat {
    fn from(f: FormatArg) -> Self {
        match f {
            FormatArg::Tsv => CorpusFormat::Tsv,
            FormatArg::DirPerClass => CorpusFormat::DirPerClass,
            FormatArg::PlainLines => CorpusFormat::PlainLines,
        }
    }
}

#[derive(Debug, Args, Serialize)]
struct Common {
    /// Logarithm base.
    #[arg(long, global = true, env = "TROENPY_LOG_BASE", default_value = "e")]
    log_base: LogBase,
    /// Floor applied to every log argument.
    #[arg(
        long,
        global = true,
        env = "TROENPY_CLAMP_EPS",
        default_value_t = 1e-12
    )]
    clamp_eps: f64,
    /// Class-count smoothing: none or laplace:α.
    #[arg(long, global = true, env = "TROENPY_SMOOTHING", default_value = "none")]
    smoothing: Smoothing,
    /// Negative scheme factors: raw or clamp0.
    #[arg(long, global = true, env = "TROENPY_NEGATIVES", default_value = "raw")]
    negatives: Negatives,
    #[arg(long, global = true, env = "TROENPY_SEED", default_value_t = 42)]
    seed: u64,
    /// KNN neighborhood size.
    #[arg(long, global = true, env = "TROENPY_K", default_value_t = 7,
          value_parser = clap::value_parser!(u64).range(1..))]
    k: u64,
    #[arg(long, global = true, env = "TROENPY_TRAIN_FRAC", default_value_t = 0.8)]
    train_frac: f64,
    #[arg(long, global = true, env = "TROENPY_REPEATS", default_value_t = 50,
          value_parser = clap::value_parser!(u64).range(1..))]
    repeats: u64,
    /// Co-occurrence window radius.
    #[arg(long, global = true, env = "TROENPY_WINDOW", default_value_t = 10,
          value_parser = clap::value_parser!(u64).range(1..))]
    window: u64,
    /// Embedding dimension.
    #[arg(long, global = true, env = "TROENPY_DIM", default_value_t = 64,
          value_parser = clap::value_parser!(u64).range(1..))]
    dim: u64,
    /// Corpus format [default: tsv for labeled commands, plain-lines for selftro].
    #[arg(long, global = true, env = "TROENPY_FORMAT")]
    format: Option<FormatArg>,
    /// Output file; stdout when absent. A `<out>.config.json` sidecar records the run.
    #[arg(long, global = true, env = "TROENPY_OUT")]
    out: Option<PathBuf>,
    /// Keep token case.
    #[arg(long, global = true, env = "TROENPY_KEEP_CASE")]
    keep_case: bool,
    /// Emit punctuation characters as tokens.
    #[arg(long, global = true, env = "TROENPY_PUNCT_TOKENS")]
    punct_tokens: bool,
    #[arg(
        long,
        global = true,
        env = "TROENPY_MIN_TOKEN_LEN",
        default_value_t = 1
    )]
    min_token_len: usize,
    /// Split on whitespace only (pre-tokenized input).
    #[arg(long, global = true, env = "TROENPY_WHITESPACE_TOKENS")]
    whitespace_tokens: bool,
}

impl Common {
    fn log_config(&self) -> Result<LogConfig> {
        Ok(LogConfig::new(self.log_base.value(), self.clamp_eps)?)
    }

    fn tokenizer(&self) -> TokenizerConfig {
        TokenizerConfig {
            keep_case: self.keep_case || self.whitespace_tokens,
            punctuation_tokens: self.punct_tokens,
            min_token_len: self.min_token_len,
            whitespace_only: self.whitespace_tokens,
        }
    }

    fn load(&self, path: &Path, default: CorpusFormat) -> Result<Corpus> {
        let format = self.format.map_or(default, CorpusFormat::from);
        let corpus = Corpus::load(path, format, &self.tokenizer())?;
        log::info!("{}", serde_json::to_string(&corpus.report(path, format))?);
        Ok(corpus)
    }
}

#[derive(Debug, Subcommand, Serialize)]
#[serde(rename_all = "kebab-case", tag = "subcommand")]
enum Command {
    /// Entropy, troenpy and related quantities of one distribution.
    Info {
        /// Whitespace-separated nonnegative reals; normalized if needed.
        file: PathBuf,
    },
    /// Per-term df, IDF, PCF and NCF table for a labeled corpus.
    Weights { corpus: PathBuf },
    /// Repeated-split KNN evaluation of one or more weighting schemes.
    Classify {
        corpus: PathBuf,
        /// Comma-separated: tf-idf, tf-pi, tf-ncf10, tf-ncf1*, tf-ncf*0.
        #[arg(long, value_delimiter = ',', default_value = "tf-idf,tf-pi")]
        schemes: Vec<Scheme>,
        /// Print the JSON report instead of the table.
        #[arg(long)]
        json: bool,
        /// Per-repeat error rates as CSV.
        #[arg(long)]
        csv: Option<PathBuf>,
        /// Split each class separately.
        #[arg(long)]
        stratified: bool,
    },
    /// Self-troenpy table from an unlabeled corpus.
    Selftro {
        corpus: PathBuf,
        /// Also print the top N terms.
        #[arg(long)]
        top: Option<usize>,
        /// Ignore terms rarer than this in the ranking.
        #[arg(long, default_value_t = 1)]
        min_count: u64,
    },
    /// Embedding initialization scaled by self-troenpy.
    EmbedInit {
        /// Table written by `selftro`.
        table: PathBuf,
    },
    /// Eigenvalues, Von Neumann entropy and quantum troenpy of a density matrix.
    Quantum {
        /// First line d, then d rows of d reals.
        file: PathBuf,
    },
}

fn read_to_string(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|e| {
        troenpy::Error::Io {
            path: path.to_path_buf(),
            source: e,
        }
        .into()
    })
}

fn io_err(path: &Path) -> impl FnOnce(io::Error) -> anyhow::Error + '_ {
    move |e| {
        troenpy::Error::Io {
            path: path.to_path_buf(),
            source: e,
        }
        .into()
    }
}

/// Writes to `--out` (plus a config sidecar) or stdout.
fn emit<F>(out: Option<&Path>, run: &serde_json::Value, write: F) -> Result<()>
where
    F: FnOnce(&mut dyn Write) -> io::Result<()>,
{
    match out {
        Some(path) => {
            let mut file = BufWriter::new(File::create(path).map_err(io_err(path))?);
            write(&mut file).map_err(io_err(path))?;
            file.flush().map_err(io_err(path))?;
            let sidecar = sidecar_path(path);
            let body = serde_json::to_string_pretty(run)? + "\n";
            fs::write(&sidecar, body).map_err(io_err(&sidecar))?;
        }
        None => {
            let stdout = io::stdout();
            let mut lock = stdout.lock();
            write(&mut lock).map_err(io_err(Path::new("<stdout>")))?;
            lock.flush().map_err(io_err(Path::new("<stdout>")))?;
        }
    }
    Ok(())
}

fn sidecar_path(out: &Path) -> PathBuf {
    let mut name = out.as_os_str().to_owned();
    name.push(".config.json");
    PathBuf::from(name)
}

fn run(cli: &Cli) -> Result<()> {
    let run_config = json!({
        "tool": "troenpy",
        "version": env!("CARGO_PKG_VERSION"),
        "config": cli,
    });
    let common = &cli.common;
    let cfg = common.log_config()?;
    let out = common.out.as_deref();

    match &cli.command {
        Command::Info { file } => {
            let text = read_to_string(file)?;
            let mut values = Vec::new();
            for tok in text.split_whitespace() {
                let v: f64 = tok
                    .parse()
                    .map_err(|_| anyhow!("'{tok}' is not a number"))?;
                if !v.is_finite() || v < 0.0 {
                    bail!("entries must be nonnegative and finite, got {tok}");
                }
                values.push(v);
            }
            if values.is_empty() {
                bail!("{}: no values", file.display());
            }
            let sum: f64 = values.iter().sum();
            let dist = if (sum - 1.0).abs() > itc::SUM_TOLERANCE {
                eprintln!("note: values sum to {sum}; normalized");
                Distribution::normalize(&values)?
            } else {
                Distribution::new(values)?
            };
            if dist.troenpy_clamped(&cfg) {
                eprintln!(
                    "note: some 1 - p is below the clamp epsilon {:e}; troenpy is clamp-dominated",
                    cfg.clamp_epsilon()
                );
            }
            let or_undefined =
                |r: troenpy::Result<f64>| r.map_or_else(|_| "undefined (K < 2)".to_string(), sig9);
            emit(out, &run_config, |w| {
                writeln!(w, "entropy\t{}", sig9(itc::entropy(&dist, &cfg)))?;
                writeln!(w, "troenpy\t{}", sig9(itc::troenpy(&dist, &cfg)))?;
                writeln!(
                    w,
                    "troenpy_min\t{}",
                    or_undefined(itc::troenpy_min(dist.len(), &cfg))
                )?;
                writeln!(
                    w,
                    "dual_cross_entropy\t{}",
                    or_undefined(itc::dual_cross_entropy(&dist, &cfg))
                )
            })
        }

        Command::Weights { corpus } => {
            let corpus = common.load(corpus, CorpusFormat::Tsv)?;
            let counts = ClassCounts::from_corpus(&corpus)?;
            let opts = WeightOptions {
                smoothing: common.smoothing,
                log: cfg,
            };
            let weights = TermWeights::compute(&counts, &opts)?;
            if weights.clamped_terms() > 0 {
                eprintln!(
                    "note: {} term(s) hit the log clamp; --smoothing laplace avoids this",
                    weights.clamped_terms()
                );
            }
            emit(out, &run_config, |w| {
                weights.write_tsv(corpus.vocabulary(), w)
            })
        }

        Command::Classify {
            corpus,
            schemes,
            json,
            csv,
            stratified,
        } => {
            let corpus = common.load(corpus, CorpusFormat::Tsv)?;
            let opts = EvalOptions {
                k: common.k as usize,
                split: SplitSpec {
                    train_fraction: common.train_frac,
                    repeats: common.repeats as usize,
                    seed: common.seed,
                    stratified: *stratified,
                },
                weighting: WeightOptions {
                    smoothing: common.smoothing,
                    log: cfg,
                },
                negatives: common.negatives,
            };
            let report = evaluate(&corpus, schemes, &opts)?;
            let doc = json!({ "run": run_config, "report": report });
            if let Some(path) = csv {
                let mut file = BufWriter::new(File::create(path).map_err(io_err(path))?);
                report.write_csv(&mut file).map_err(io_err(path))?;
                file.flush().map_err(io_err(path))?;
            }
            if let Some(path) = out {
                let body = serde_json::to_string_pretty(&doc)? + "\n";
                fs::write(path, body).map_err(io_err(path))?;
            }
            let stdout = io::stdout();
            let mut lock = stdout.lock();
            if *json {
                writeln!(lock, "{}", serde_json::to_string_pretty(&doc)?)?;
            } else {
                report.write_table(&mut lock)?;
            }
            Ok(())
        }

        Command::Selftro {
            corpus,
            top,
            min_count,
        } => {
            let corpus = common.load(corpus, CorpusFormat::PlainLines)?;
            let counts = NeighborCounts::count(&corpus, common.window as usize)?;
            let table = SelfTroenpyTable::compute(&counts, corpus.vocabulary(), &cfg)?;
            emit(out, &run_config, |w| table.write_tsv(w))?;

            // Keep stdout clean when the table itself went there.
            let mut stats: Box<dyn Write> = if out.is_some() {
                Box::new(io::stdout())
            } else {
                Box::new(io::stderr())
            };
            writeln!(stats, "vocabulary_size\t{}", table.len())?;
            writeln!(stats, "corpus_entropy\t{}", sig9(table.corpus_entropy))?;
            writeln!(stats, "corpus_troenpy\t{}", sig9(table.corpus_troenpy))?;
            if let Some(n) = top {
                writeln!(stats, "rank\tword\ttroenpy\tcount")?;
                for (i, e) in rank_terms(&table, *n, *min_count).iter().enumerate() {
                    writeln!(stats, "{}\t{}\t{:.2}\t{}", i + 1, e.term, e.weight, e.count)?;
                }
            }
            Ok(())
        }

        Command::EmbedInit { table } => {
            let file = File::open(table).map_err(io_err(table))?;
            let table = SelfTroenpyTable::read_tsv(BufReader::new(file), &cfg)
                .with_context(|| format!("reading {}", table.display()))?;
            let emb = embedding_init(&table, common.dim as usize, common.seed)?;
            emit(out, &run_config, |w| emb.write_text(w))
        }

        Command::Quantum { file } => {
            let matrix = parse_matrix(&read_to_string(file)?, file)?;
            let eigen = matrix.eigenvalues()?;
            let entropy = quantum::von_neumann_entropy(&matrix, &cfg)?;
            let tro = quantum::quantum_troenpy(&matrix, &cfg)?;
            emit(out, &run_config, |w| {
                let ev: Vec<String> = eigen.probs().iter().map(|v| sig9(*v)).collect();
                writeln!(w, "eigenvalues\t{}", ev.join(" "))?;
                writeln!(w, "von_neumann_entropy\t{}", sig9(entropy))?;
                writeln!(w, "quantum_troenpy\t{}", sig9(tro))
            })
        }
    }
}

fn parse_matrix(text: &str, path: &Path) -> Result<DensityMatrix> {
    let parse_err = |line: usize, message: String| troenpy::Error::Parse {
        path: path.to_path_buf(),
        line,
        message,
    };
    let mut lines = text
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l))
        .filter(|(_, l)| !l.trim().is_empty());
    let (n, first) = lines
        .next()
        .ok_or_else(|| parse_err(1, "empty file".into()))?;
    let dim: usize = first
        .trim()
        .parse()
        .map_err(|_| parse_err(n, format!("expected the dimension, got '{}'", first.trim())))?;
    let mut rows = Vec::with_capacity(dim);
    for _ in 0..dim {
        let (n, line) = lines
            .next()
            .ok_or_else(|| parse_err(n, format!("expected {dim} rows")))?;
        let row = line
            .split_whitespace()
            .map(|t| {
                t.parse::<f64>()
                    .map_err(|_| parse_err(n, format!("'{t}' is not a number")))
            })
            .collect::<Result<Vec<f64>, _>>()?;
        if row.len() != dim {
            return Err(parse_err(n, format!("expected {dim} values, got {}", row.len())).into());
        }
        rows.push(row);
    }
    if let Some((n, _)) = lines.next() {
        return Err(parse_err(n, "trailing data after the matrix".into()).into());
    }
    Ok(DensityMatrix::new(rows)?)
}

/// 0 success, 1 validation or configuration error, 2 I/O error.
fn exit_code(err: &anyhow::Error) -> u8 {
    for cause in err.chain() {
        if let Some(e) = cause.downcast_ref::<troenpy::Error>() {
            if e.is_io() {
                return 2;
            }
        }
        if cause.downcast_ref::<io::Error>().is_some() {
            return 2;
        }
    }
    1
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(exit_code(&e))
        }
    }
}
