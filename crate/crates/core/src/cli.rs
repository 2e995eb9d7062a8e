//! Command-line front end.

use std::ffi::OsString;
use std::io::Write;
use std::path::PathBuf;

use clap::{Parser, Subcommand, ValueEnum};

use crate::corpus::{load_corpus, Corpus};
use crate::embeddings::EmbeddingFormat;
use crate::error::{Error, Result};
use crate::report::{self, OutputFormat};
use crate::session::{load_stopwords, Session, SessionConfig};
use crate::tfidf::{build_df_index, DEFAULT_K, DEFAULT_MIN_DF};
use crate::trivia::DEFAULT_SAMPLE_CAP;

pub const CACHE_ENV: &str = "TRIVIA_MINER_CACHE";

#[derive(Debug, Clone, Copy, ValueEnum)]
enum FormatArg {
    Text,
    Binary,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum OutputArg {
    Jsonl,
    Table,
}

#[derive(Debug, Parser)]
#[command(
    name = "trivia-miner",
    version,
    about = "Rank an article's categories by how surprising its membership is"
)]
struct Cli {
    /// Corpus to score (JSON Lines: id, title, text, categories).
    #[arg(long, global = true)]
    corpus: Option<PathBuf>,
    /// Reference corpus for document frequencies [default: --corpus].
    #[arg(long, global = true)]
    idf_corpus: Option<PathBuf>,
    /// Word vectors in word2vec format.
    #[arg(long, global = true)]
    embeddings: Option<PathBuf>,
    #[arg(long, global = true, value_enum, default_value = "binary")]
    embeddings_format: FormatArg,
    /// Prebuilt document-frequency index; replaces counting the IDF corpus.
    #[arg(long, global = true)]
    index: Option<PathBuf>,
    /// Stopword list, one word per line [default: bundled English list].
    #[arg(long, global = true)]
    stopwords: Option<PathBuf>,
    /// Number of top TF-IDF terms per article.
    #[arg(long, global = true, default_value_t = DEFAULT_K)]
    k: usize,
    /// Minimum document frequency for a term to be indexed.
    #[arg(long, global = true, default_value_t = DEFAULT_MIN_DF)]
    min_df: u64,
    /// Largest category sample used for surprise and cohesiveness.
    #[arg(long, global = true, default_value_t = DEFAULT_SAMPLE_CAP)]
    sample_cap: usize,
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    #[arg(long, global = true, default_value_t = 1)]
    workers: usize,
    /// Similarity cache file [env: TRIVIA_MINER_CACHE, which takes precedence].
    #[arg(long, global = true)]
    cache: Option<PathBuf>,
    /// Drop categories whose trivia score is below this value.
    #[arg(long, global = true, allow_negative_numbers = true)]
    threshold: Option<f64>,
    #[arg(long, global = true, value_enum, default_value = "jsonl")]
    output: OutputArg,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Count document frequencies and write the index file.
    BuildIndex {
        /// Destination file [default: --index].
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Rank the categories of an article by trivia score.
    TopTrivia { article: String },
    /// Similarity of two articles.
    Similarity { first: String, second: String },
    /// Members of a category, most surprising first.
    Outliers { category: String },
    /// Paragraph of an article closest to a category title.
    Explain { article: String, category: String },
}

impl Cli {
    fn session_config(&self, cache_env: Option<PathBuf>) -> Result<SessionConfig> {
        let corpus = self
            .corpus
            .clone()
            .ok_or_else(|| Error::Config("--corpus is required".into()))?;
        let embeddings = self
            .embeddings
            .clone()
            .ok_or_else(|| Error::Config("--embeddings is required".into()))?;
        Ok(SessionConfig {
            idf_corpus_path: self.idf_corpus.clone(),
            index_path: self.index.clone(),
            embeddings_format: match self.embeddings_format {
                FormatArg::Text => EmbeddingFormat::Text,
                FormatArg::Binary => EmbeddingFormat::Binary,
            },
            stopwords_path: self.stopwords.clone(),
            k: self.k,
            min_df: self.min_df,
            sample_cap: self.sample_cap,
            seed: self.seed,
            workers: self.workers,
            cache_path: cache_env.or_else(|| self.cache.clone()),
            threshold: self.threshold,
            ..SessionConfig::new(corpus, embeddings)
        })
    }

    fn output(&self) -> OutputFormat {
        match self.output {
            OutputArg::Jsonl => OutputFormat::Jsonl,
            OutputArg::Table => OutputFormat::Table,
        }
    }
}

/// Runs the tool with the process environment and returns the exit code.
pub fn run<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cache_env = std::env::var_os(CACHE_ENV)
        .filter(|v| !v.is_empty())
        .map(PathBuf::from);
    run_with_cache_env(args, cache_env, stdout, stderr)
}

/// Like [`run`], with the cache override passed explicitly.
pub fn run_with_cache_env<I, T>(
    args: I,
    cache_env: Option<PathBuf>,
    stdout: &mut dyn Write,
    stderr: &mut dyn Write,
) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            let text = e.render().to_string();
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => {
                    let _ = stdout.write_all(text.as_bytes());
                    0
                }
                _ => {
                    let _ = stderr.write_all(text.as_bytes());
                    4
                }
            };
        }
    };
    let mut hint = None;
    match execute(&cli, cache_env, stdout, stderr, &mut hint) {
        Ok(()) => 0,
        Err(e) => {
            let _ = writeln!(stderr, "error: {e}");
            if let Some(hint) = hint {
                let _ = writeln!(stderr, "{hint}");
            }
            e.exit_code()
        }
    }
}

fn execute(
    cli: &Cli,
    cache_env: Option<PathBuf>,
    stdout: &mut dyn Write,
    stderr: &mut dyn Write,
    hint: &mut Option<String>,
) -> Result<()> {
    let format = cli.output();
    let stdout_err = |e| Error::io("<stdout>", e);
    if let Command::BuildIndex { out } = &cli.command {
        return build_index(cli, out.as_ref(), stdout, stderr);
    }
    let session = Session::open(cli.session_config(cache_env)?)?;
    let result = match &cli.command {
        Command::BuildIndex { .. } => unreachable!(),
        Command::TopTrivia { article } => session
            .top_trivia(article)
            .map_err(|e| with_suggestions(e, session.corpus(), hint))
            .and_then(|ranking| {
                report::write_scores(stdout, format, &ranking.scores).map_err(stdout_err)
            }),
        Command::Similarity { first, second } => session
            .similarity(first, second)
            .map_err(|e| with_suggestions(e, session.corpus(), hint))
            .and_then(|v| writeln!(stdout, "{v:.6}").map_err(stdout_err)),
        Command::Outliers { category } => session.outliers(category).and_then(|members| {
            report::write_members(stdout, format, &members).map_err(stdout_err)
        }),
        Command::Explain { article, category } => session
            .explain(article, category)
            .map_err(|e| with_suggestions(e, session.corpus(), hint))
            .and_then(|ex| {
                let text = &session
                    .corpus()
                    .article(article)
                    .expect("explained article exists")
                    .paragraphs[ex.paragraph];
                report::write_explanation(stdout, format, &ex, text).map_err(stdout_err)
            }),
    };
    // Values computed before a failure are still worth keeping.
    let saved = session.save_cache();
    result?;
    saved
}

fn build_index(
    cli: &Cli,
    out: Option<&PathBuf>,
    stdout: &mut dyn Write,
    stderr: &mut dyn Write,
) -> Result<()> {
    let out = out
        .or(cli.index.as_ref())
        .ok_or_else(|| Error::Config("build-index needs --out or --index".into()))?;
    let source = cli
        .idf_corpus
        .as_ref()
        .or(cli.corpus.as_ref())
        .ok_or_else(|| Error::Config("--corpus or --idf-corpus is required".into()))?;
    let stopwords = load_stopwords(cli.stopwords.as_deref())?;
    let corpus = load_corpus(source)?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cli.workers.max(1))
        .build()
        .map_err(|e| Error::Config(format!("cannot start worker pool: {e}")))?;
    let index = pool.install(|| build_df_index(&corpus, &stopwords, cli.min_df))?;
    if index.is_empty() {
        let _ = writeln!(
            stderr,
            "warning: no term reaches a document frequency of {}; the index is empty",
            index.min_df()
        );
    }
    index.save(out)?;
    writeln!(
        stdout,
        "{} terms, {} documents",
        index.len(),
        index.n_docs()
    )
    .map_err(|e| Error::io("<stdout>", e))
}

/// Records the closest article titles for an unknown-article error.
fn with_suggestions(e: Error, corpus: &Corpus, hint: &mut Option<String>) -> Error {
    if let Error::UnknownArticle(id) = &e {
        let near = nearest_titles(corpus, id, 3);
        if !near.is_empty() {
            *hint = Some(format!("did you mean: {}", near.join("; ")));
        }
    }
    e
}

/// Titles (with ids) of the `n` articles whose id or title is closest to `query`.
pub fn nearest_titles(corpus: &Corpus, query: &str, n: usize) -> Vec<String> {
    let q = query.to_lowercase();
    let mut scored: Vec<(f64, String)> = corpus
        .articles()
        .iter()
        .map(|a| {
            let by_title = strsim::normalized_levenshtein(&q, &a.title.to_lowercase());
            let by_id = strsim::normalized_levenshtein(&q, &a.id.to_lowercase());
            (by_title.max(by_id), format!("{} ({})", a.title, a.id))
        })
        .collect();
    scored.sort_by(|x, y| y.0.total_cmp(&x.0).then_with(|| x.1.cmp(&y.1)));
    scored.into_iter().take(n).map(|(_, t)| t).collect()
}
