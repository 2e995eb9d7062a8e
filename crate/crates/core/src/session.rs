//! Everything needed to answer queries about one corpus: loaded inputs,
//! per-article term lists, the similarity cache and a worker pool.

use std::fs::File;
use std::path::{Path, PathBuf};

use log::{info, warn};
use rayon::prelude::*;

use crate::corpus::{load_corpus, Corpus};
use crate::embeddings::{EmbeddingFormat, EmbeddingStore, Lexicon, SurfaceForms};
use crate::error::{Error, Result};
use crate::similarity::{
    bytes_digest, file_digest, resolve_terms, CorpusSimilarity, GenerationInputs, ResolvedTerms,
    SimilarityCache, SimilarityConfig, WEIGHTING_SCHEME,
};
use crate::textnorm::{normalize, normalize_tokens, Stopwords};
use crate::tfidf::{top_tfidf, DfIndex, RankedTerms, DEFAULT_K, DEFAULT_MIN_DF};
use crate::trivia::{
    explain_category, EngineConfig, Explanation, MemberSurprise, Ranking, TriviaEngine,
    DEFAULT_SAMPLE_CAP,
};

#[derive(Debug, Clone, PartialEq)]
pub struct SessionConfig {
    pub corpus_path: PathBuf,
    /// Reference corpus for document frequencies; the scored corpus if unset.
    pub idf_corpus_path: Option<PathBuf>,
    /// Prebuilt document-frequency index, used instead of counting.
    pub index_path: Option<PathBuf>,
    pub embeddings_path: PathBuf,
    pub embeddings_format: EmbeddingFormat,
    /// Stopword file; the bundled English list if unset.
    pub stopwords_path: Option<PathBuf>,
    pub k: usize,
    pub min_df: u64,
    pub sample_cap: usize,
    pub seed: u64,
    pub workers: usize,
    pub cache_path: Option<PathBuf>,
    pub threshold: Option<f64>,
}

impl SessionConfig {
    pub fn new(corpus: impl Into<PathBuf>, embeddings: impl Into<PathBuf>) -> Self {
        SessionConfig {
            corpus_path: corpus.into(),
            idf_corpus_path: None,
            index_path: None,
            embeddings_path: embeddings.into(),
            embeddings_format: EmbeddingFormat::Binary,
            stopwords_path: None,
            k: DEFAULT_K,
            min_df: DEFAULT_MIN_DF,
            sample_cap: DEFAULT_SAMPLE_CAP,
            seed: 0,
            workers: 1,
            cache_path: None,
            threshold: None,
        }
    }

    pub fn engine_config(&self) -> EngineConfig {
        EngineConfig {
            sample_cap: self.sample_cap,
            rng_seed: self.seed,
            trivia_threshold: self.threshold,
            ..EngineConfig::default()
        }
    }

    pub fn idf_source(&self) -> &Path {
        self.idf_corpus_path.as_deref().unwrap_or(&self.corpus_path)
    }

    /// Checks value ranges and that every input file can be opened.
    pub fn validate(&self) -> Result<()> {
        SimilarityConfig::new(self.k)?;
        self.engine_config().validate()?;
        if self.workers == 0 {
            return Err(Error::Config("workers must be at least 1".into()));
        }
        let mut inputs = vec![self.corpus_path.as_path(), self.embeddings_path.as_path()];
        inputs.extend(self.idf_corpus_path.as_deref());
        inputs.extend(self.index_path.as_deref());
        inputs.extend(self.stopwords_path.as_deref());
        for path in inputs {
            File::open(path).map_err(|e| Error::io(path, e))?;
        }
        Ok(())
    }
}

pub fn load_stopwords(path: Option<&Path>) -> Result<Stopwords> {
    match path {
        Some(p) => Stopwords::load(p),
        None => Ok(Stopwords::english()),
    }
}

/// Document frequencies plus stem-to-word table over a reference corpus.
pub fn analyze_reference(
    corpus: &Corpus,
    stopwords: &Stopwords,
    min_df: u64,
) -> Result<(DfIndex, SurfaceForms)> {
    let tokens: Vec<Vec<_>> = corpus
        .articles()
        .par_iter()
        .map(|a| normalize_tokens(&a.text, stopwords).collect())
        .collect();
    let index = DfIndex::from_documents(
        tokens.iter().map(|doc| doc.iter().map(|t| t.stem.as_str())),
        min_df,
    )?;
    let surfaces = SurfaceForms::from_tokens(tokens.into_iter().flatten());
    Ok((index, surfaces))
}

pub struct Session {
    config: SessionConfig,
    corpus: Corpus,
    stopwords: Stopwords,
    index: DfIndex,
    surfaces: SurfaceForms,
    store: EmbeddingStore,
    ranked: Vec<RankedTerms>,
    resolved: Vec<ResolvedTerms<usize>>,
    cache: SimilarityCache,
    sim_cfg: SimilarityConfig,
    pool: rayon::ThreadPool,
}

impl Session {
    pub fn open(config: SessionConfig) -> Result<Session> {
        config.validate()?;
        let sim_cfg = SimilarityConfig::new(config.k)?;
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(config.workers)
            .build()
            .map_err(|e| Error::Config(format!("cannot start worker pool: {e}")))?;

        let stopwords = load_stopwords(config.stopwords_path.as_deref())?;
        let corpus = load_corpus(&config.corpus_path)?;
        let reference = match &config.idf_corpus_path {
            Some(p) if p != &config.corpus_path => Some(load_corpus(p)?),
            _ => None,
        };
        let reference_corpus = reference.as_ref().unwrap_or(&corpus);

        let (index, surfaces) = pool.install(|| -> Result<_> {
            let (counted, surfaces) =
                analyze_reference(reference_corpus, &stopwords, config.min_df)?;
            let index = match &config.index_path {
                Some(p) => DfIndex::load(p)?,
                None => counted,
            };
            Ok((index, surfaces))
        })?;
        if index.is_empty() {
            warn!("document-frequency index is empty; every article will have no terms");
        }
        let store = EmbeddingStore::load(&config.embeddings_path, config.embeddings_format)?;
        info!(
            "loaded {} articles, {} categories, {} index terms, {} vectors of dim {}",
            corpus.n_docs(),
            corpus.categories().len(),
            index.len(),
            store.len(),
            store.dim()
        );

        let (ranked, resolved) = pool.install(|| {
            let lexicon = Lexicon::new(&store, Some(&surfaces));
            corpus
                .articles()
                .par_iter()
                .map(|a| {
                    let ranked = top_tfidf(&normalize(&a.text, &stopwords), &index, sim_cfg.k());
                    let resolved = resolve_terms(&ranked, &lexicon, &sim_cfg);
                    (ranked, resolved)
                })
                .unzip()
        });

        let tag = generation_inputs(&config)?.tag();
        let cache = match &config.cache_path {
            Some(p) => SimilarityCache::load(p, tag).unwrap_or_else(|e| {
                warn!("ignoring unreadable similarity cache: {e}");
                SimilarityCache::new(tag)
            }),
            None => SimilarityCache::new(tag),
        };

        Ok(Session {
            config,
            corpus,
            stopwords,
            index,
            surfaces,
            store,
            ranked,
            resolved,
            cache,
            sim_cfg,
            pool,
        })
    }

    pub fn config(&self) -> &SessionConfig {
        &self.config
    }

    pub fn corpus(&self) -> &Corpus {
        &self.corpus
    }

    pub fn index(&self) -> &DfIndex {
        &self.index
    }

    pub fn embeddings(&self) -> &EmbeddingStore {
        &self.store
    }

    pub fn cache(&self) -> &SimilarityCache {
        &self.cache
    }

    /// Top TF-IDF terms of an article.
    pub fn top_terms(&self, id: &str) -> Result<&RankedTerms> {
        let i = self
            .corpus
            .article_index(id)
            .ok_or_else(|| Error::UnknownArticle(id.to_owned()))?;
        Ok(&self.ranked[i])
    }

    /// Run `f` on the worker pool with a trivia engine over this session.
    pub fn with_engine<R: Send>(
        &self,
        f: impl FnOnce(&TriviaEngine<'_, CorpusSimilarity<'_, Lexicon<'_>>>) -> Result<R> + Send,
    ) -> Result<R> {
        let lexicon = Lexicon::new(&self.store, Some(&self.surfaces));
        let sim = CorpusSimilarity::new(
            &self.corpus,
            &self.resolved,
            &lexicon,
            self.sim_cfg,
            &self.cache,
        );
        let engine = TriviaEngine::new(&self.corpus, sim, self.config.engine_config())?;
        self.pool.install(|| f(&engine))
    }

    pub fn similarity(&self, a: &str, b: &str) -> Result<f64> {
        self.with_engine(|e| e.similarity_source().cached_similarity(a, b))
    }

    pub fn top_trivia(&self, article: &str) -> Result<Ranking> {
        self.with_engine(|e| e.top_trivia(article))
    }

    pub fn outliers(&self, category: &str) -> Result<Vec<MemberSurprise>> {
        self.with_engine(|e| e.rank_members_by_surprise(category))
    }

    pub fn explain(&self, article: &str, category: &str) -> Result<Explanation> {
        let art = self
            .corpus
            .article(article)
            .ok_or_else(|| Error::UnknownArticle(article.to_owned()))?;
        if self.corpus.category(category).is_none() {
            return Err(Error::UnknownCategory(category.to_owned()));
        }
        let lexicon = Lexicon::new(&self.store, Some(&self.surfaces));
        explain_category(
            art,
            category,
            &self.index,
            &self.stopwords,
            &lexicon,
            &self.sim_cfg,
        )
    }

    /// Flush the similarity cache to its file, if one is configured.
    pub fn save_cache(&self) -> Result<()> {
        match &self.config.cache_path {
            Some(p) => self.cache.save(p),
            None => Ok(()),
        }
    }
}

fn generation_inputs(config: &SessionConfig) -> Result<GenerationInputs> {
    let idf_digest = match &config.index_path {
        Some(p) => file_digest(p)?,
        None => file_digest(config.idf_source())?,
    };
    let stopwords_digest = match &config.stopwords_path {
        Some(p) => file_digest(p)?,
        None => bytes_digest(Stopwords::bundled_text().as_bytes()),
    };
    Ok(GenerationInputs {
        corpus_digest: file_digest(&config.corpus_path)?,
        embeddings_digest: file_digest(&config.embeddings_path)?,
        idf_digest,
        stopwords_digest,
        k: config.k as u64,
        min_df: config.min_df.max(1),
        scheme: WEIGHTING_SCHEME.to_owned(),
    })
}
