//! Trivia mining over a categorized article corpus.
//!
//! An article's categories are ranked by how cohesive each category is and
//! how unlike its fellow members the article is, using an article similarity
//! built from top TF-IDF terms and word embeddings.

mod binio;

pub mod cli;
pub mod corpus;
pub mod embeddings;
pub mod error;
pub mod report;
pub mod session;
pub mod similarity;
pub mod textnorm;
pub mod tfidf;
pub mod trivia;

pub use corpus::{load_corpus, Article, ArticleRecord, Category, Corpus};
pub use embeddings::{EmbeddingFormat, EmbeddingStore};
pub use error::{Error, Result};
pub use report::OutputFormat;
pub use session::{Session, SessionConfig};
pub use similarity::{
    article_similarity, CorpusSimilarity, PairSimilarity, SimilarityCache, SimilarityConfig,
};
pub use textnorm::{normalize, Stopwords};
pub use tfidf::{top_tfidf, DfIndex, RankedTerms};
pub use trivia::{CategoryScore, EngineConfig, TriviaEngine};
