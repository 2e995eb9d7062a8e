//! Article-article similarity over top TF-IDF terms.
//!
//! For every position `i` of each term list, the best match of that term in
//! the other list is taken; the two best matches at position `i` share the
//! linear weight `w(i) = k - i + 1`:
//!
//! ```text
//! sigma = (1/z) * sum_i w(i) * (max_j s(T1[i], T2[j]) + max_j s(T2[i], T1[j]))
//! ```
//!
//! With two full lists of in-vocabulary terms `z = k(k+1)`. Positions that
//! are missing (short lists) or out of vocabulary add nothing to the sum and
//! their weight is left out of `z`, so an article always has similarity 1
//! with itself. The result is clamped to [-1, 1].

mod cache;

use std::sync::atomic::{AtomicU64, Ordering};

use log::warn;

pub use cache::{bytes_digest, file_digest, GenerationInputs, GenerationTag, SimilarityCache};

use crate::corpus::Corpus;
use crate::embeddings::{EmbeddingStore, Lexicon};
use crate::error::{Error, Result};
use crate::tfidf::RankedTerms;

/// Identifier of the position weighting, folded into cache generation tags.
pub const WEIGHTING_SCHEME: &str = "linear-k-minus-i-plus-1";

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SimilarityConfig {
    k: usize,
}

impl SimilarityConfig {
    pub fn new(k: usize) -> Result<Self> {
        if k == 0 {
            return Err(Error::Config("k must be at least 1".into()));
        }
        Ok(SimilarityConfig { k })
    }

    pub fn k(&self) -> usize {
        self.k
    }

    /// Weight of zero-based position `idx`.
    pub fn weight(&self, idx: usize) -> u64 {
        (self.k - idx) as u64
    }

    /// Normalizer for two full in-vocabulary lists: `2 * C(k+1, 2)`.
    pub fn full_z(&self) -> u64 {
        (self.k * (self.k + 1)) as u64
    }
}

impl Default for SimilarityConfig {
    fn default() -> Self {
        SimilarityConfig {
            k: crate::tfidf::DEFAULT_K,
        }
    }
}

/// Word-level similarity source for the article metric.
///
/// Terms are resolved to handles once per article; `similarity` must be
/// symmetric for the article metric to be.
pub trait TermSpace {
    type Handle: Copy + Send + Sync;

    fn resolve(&self, term: &str) -> Option<Self::Handle>;

    fn similarity(&self, a: Self::Handle, b: Self::Handle) -> f64;
}

impl TermSpace for EmbeddingStore {
    type Handle = usize;

    fn resolve(&self, term: &str) -> Option<usize> {
        self.row(term)
    }

    fn similarity(&self, a: usize, b: usize) -> f64 {
        self.row_similarity(a, b)
    }
}

impl TermSpace for Lexicon<'_> {
    type Handle = usize;

    fn resolve(&self, term: &str) -> Option<usize> {
        self.resolve_row(term)
    }

    fn similarity(&self, a: usize, b: usize) -> f64 {
        self.store.row_similarity(a, b)
    }
}

impl<T: TermSpace + ?Sized> TermSpace for &T {
    type Handle = T::Handle;

    fn resolve(&self, term: &str) -> Option<Self::Handle> {
        (**self).resolve(term)
    }

    fn similarity(&self, a: Self::Handle, b: Self::Handle) -> f64 {
        (**self).similarity(a, b)
    }
}

/// A term list with each position resolved to a handle (`None` when out of
/// vocabulary). Holds at most `k` positions.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct ResolvedTerms<H> {
    pub handles: Vec<Option<H>>,
}

impl<H> ResolvedTerms<H> {
    pub fn has_vocabulary(&self) -> bool {
        self.handles.iter().any(Option::is_some)
    }
}

pub fn resolve_terms<S: TermSpace>(
    terms: &RankedTerms,
    space: &S,
    cfg: &SimilarityConfig,
) -> ResolvedTerms<S::Handle> {
    ResolvedTerms {
        handles: terms
            .iter_terms()
            .take(cfg.k)
            .map(|t| space.resolve(t))
            .collect(),
    }
}

pub fn article_similarity<S: TermSpace>(
    t1: &RankedTerms,
    t2: &RankedTerms,
    space: &S,
    cfg: &SimilarityConfig,
) -> f64 {
    if t1.is_empty() && t2.is_empty() {
        warn!("similarity of two empty term lists defined as 0");
    }
    resolved_similarity(
        &resolve_terms(t1, space, cfg),
        &resolve_terms(t2, space, cfg),
        space,
        cfg,
    )
}

/// The article metric on pre-resolved term lists.
pub fn resolved_similarity<S: TermSpace>(
    r1: &ResolvedTerms<S::Handle>,
    r2: &ResolvedTerms<S::Handle>,
    space: &S,
    cfg: &SimilarityConfig,
) -> f64 {
    let a = &r1.handles[..r1.handles.len().min(cfg.k)];
    let b = &r2.handles[..r2.handles.len().min(cfg.k)];

    // sims[i * b.len() + j] = s(a[i], b[j]) for resolved pairs
    let mut sims = vec![None; a.len() * b.len()];
    for (i, ha) in a.iter().enumerate() {
        let Some(ha) = ha else { continue };
        for (j, hb) in b.iter().enumerate() {
            if let Some(hb) = hb {
                sims[i * b.len() + j] = Some(space.similarity(*ha, *hb));
            }
        }
    }
    let mut numerator = 0.0f64;
    let mut z = 0u64;
    for i in 0..cfg.k {
        let w = cfg.weight(i);
        let mut forward = 0.0;
        let mut backward = 0.0;
        if let Some(Some(_)) = a.get(i) {
            forward = best((0..b.len()).map(|j| sims[i * b.len() + j]));
            z += w;
        }
        if let Some(Some(_)) = b.get(i) {
            backward = best((0..a.len()).map(|j| sims[j * b.len() + i]));
            z += w;
        }
        numerator += w as f64 * (forward + backward);
    }
    if z == 0 {
        return 0.0;
    }
    (numerator / z as f64).clamp(-1.0, 1.0)
}

/// Largest resolved candidate; 0 when there is none.
fn best(values: impl Iterator<Item = Option<f64>>) -> f64 {
    values.flatten().reduce(f64::max).unwrap_or(0.0)
}

/// Source of article-article similarity by id, as consumed by the trivia
/// engine. Implementations must be pure functions of the pair.
pub trait PairSimilarity: Sync {
    fn similarity(&self, a: &str, b: &str) -> Result<f64>;
}

impl<T: PairSimilarity + ?Sized> PairSimilarity for &T {
    fn similarity(&self, a: &str, b: &str) -> Result<f64> {
        (**self).similarity(a, b)
    }
}

/// Similarity between corpus articles, memoized in a [`SimilarityCache`].
pub struct CorpusSimilarity<'a, S: TermSpace> {
    corpus: &'a Corpus,
    terms: &'a [ResolvedTerms<S::Handle>],
    space: &'a S,
    cfg: SimilarityConfig,
    cache: &'a SimilarityCache,
    computed: AtomicU64,
}

impl<'a, S: TermSpace + Sync> CorpusSimilarity<'a, S> {
    /// `terms` holds one resolved list per article, in corpus order.
    pub fn new(
        corpus: &'a Corpus,
        terms: &'a [ResolvedTerms<S::Handle>],
        space: &'a S,
        cfg: SimilarityConfig,
        cache: &'a SimilarityCache,
    ) -> Self {
        assert_eq!(terms.len(), corpus.n_docs(), "one term list per article");
        CorpusSimilarity {
            corpus,
            terms,
            space,
            cfg,
            cache,
            computed: AtomicU64::new(0),
        }
    }

    fn terms_of(&self, id: &str) -> Result<&ResolvedTerms<S::Handle>> {
        self.corpus
            .article_index(id)
            .map(|i| &self.terms[i])
            .ok_or_else(|| Error::UnknownArticle(id.to_owned()))
    }

    /// Cache hit if present, otherwise compute and store. The diagonal is
    /// computed directly and never cached.
    pub fn cached_similarity(&self, a1: &str, a2: &str) -> Result<f64> {
        let t1 = self.terms_of(a1)?;
        let t2 = self.terms_of(a2)?;
        if a1 == a2 {
            return Ok(resolved_similarity(t1, t2, self.space, &self.cfg));
        }
        let (lo, hi) = if a1 < a2 { (t1, t2) } else { (t2, t1) };
        Ok(self.cache.get_or_insert_with(a1, a2, || {
            self.computed.fetch_add(1, Ordering::Relaxed);
            resolved_similarity(lo, hi, self.space, &self.cfg)
        }))
    }

    /// Number of metric evaluations performed through this handle.
    pub fn computations(&self) -> u64 {
        self.computed.load(Ordering::Relaxed)
    }

    pub fn config(&self) -> &SimilarityConfig {
        &self.cfg
    }
}

impl<S: TermSpace + Sync> PairSimilarity for CorpusSimilarity<'_, S> {
    fn similarity(&self, a: &str, b: &str) -> Result<f64> {
        self.cached_similarity(a, b)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::collections::HashMap;

    /// Word similarities given as an explicit symmetric table.
    struct Table {
        words: Vec<&'static str>,
        sims: HashMap<(usize, usize), f64>,
    }

    impl Table {
        fn new(words: &[&'static str], pairs: &[(&str, &str, f64)]) -> Self {
            let mut t = Table {
                words: words.to_vec(),
                sims: HashMap::new(),
            };
            for &(a, b, s) in pairs {
                let (a, b) = (t.resolve(a).unwrap(), t.resolve(b).unwrap());
                t.sims.insert((a, b), s);
                t.sims.insert((b, a), s);
            }
            t
        }
    }

    impl TermSpace for Table {
        type Handle = usize;
        fn resolve(&self, term: &str) -> Option<usize> {
            self.words.iter().position(|w| *w == term)
        }
        fn similarity(&self, a: usize, b: usize) -> f64 {
            if a == b {
                1.0
            } else {
                self.sims.get(&(a, b)).copied().unwrap_or(0.0)
            }
        }
    }

    fn ranked(terms: &[&str], k: usize) -> RankedTerms {
        RankedTerms::from_terms(terms.iter().copied(), k)
    }

    #[test]
    fn config_weights() {
        let cfg = SimilarityConfig::new(10).unwrap();
        assert_eq!(cfg.weight(0), 10);
        assert_eq!(cfg.weight(9), 1);
        let sum: u64 = (0..10).map(|i| cfg.weight(i)).sum();
        assert_eq!(sum, 55);
        assert_eq!(cfg.full_z(), 2 * sum);
        assert!(SimilarityConfig::new(0).is_err());
    }

    #[test]
    fn hand_worked_two_term_example() {
        let table = Table::new(
            &["x", "y", "z"],
            &[("x", "y", 0.5), ("x", "z", 0.2), ("y", "z", 0.4)],
        );
        let cfg = SimilarityConfig::new(2).unwrap();
        let s = article_similarity(
            &ranked(&["x", "y"], 2),
            &ranked(&["x", "z"], 2),
            &table,
            &cfg,
        );
        // forward maxes (1, 0.5), backward maxes (1, 0.4)
        // (2 * (1 + 1) + 1 * (0.5 + 0.4)) / 6
        assert!((s - 4.9 / 6.0).abs() < 1e-12);
        assert!((s - 0.816667).abs() < 1e-6);
    }

    #[test]
    fn identity_and_empty_lists() {
        let table = Table::new(&["a", "b", "c"], &[("a", "b", 0.3)]);
        let cfg = SimilarityConfig::new(3).unwrap();
        let t = ranked(&["a", "b", "c"], 3);
        assert_eq!(article_similarity(&t, &t, &table, &cfg), 1.0);
        let short = ranked(&["b", "oov"], 3);
        assert_eq!(article_similarity(&short, &short, &table, &cfg), 1.0);
        let empty = RankedTerms::default();
        assert_eq!(article_similarity(&empty, &empty, &table, &cfg), 0.0);
        assert_eq!(article_similarity(&t, &empty, &table, &cfg), 0.0);
        let oov = ranked(&["q", "r"], 3);
        assert_eq!(article_similarity(&oov, &oov, &table, &cfg), 0.0);
        assert_eq!(article_similarity(&t, &oov, &table, &cfg), 0.0);
    }

    #[test]
    fn full_lists_use_the_standard_normalizer() {
        // every cross similarity 0.5, no shared term: sigma = 0.5 exactly
        let table = Table::new(
            &["a", "b", "c", "d"],
            &[
                ("a", "c", 0.5),
                ("a", "d", 0.5),
                ("b", "c", 0.5),
                ("b", "d", 0.5),
            ],
        );
        let cfg = SimilarityConfig::new(2).unwrap();
        let s = article_similarity(
            &ranked(&["a", "b"], 2),
            &ranked(&["c", "d"], 2),
            &table,
            &cfg,
        );
        assert_eq!(s, 0.5);
    }

    #[test]
    fn short_lists_keep_positional_weights() {
        // t1 = [a], t2 = [a, b] with s(a,b) = 0.5, k = 2
        // forward: pos0 a -> 1 (w2); backward: pos0 a -> 1 (w2), pos1 b -> 0.5 (w1)
        // (2*(1+1) + 1*(0 + 0.5)) / (2 + 2 + 1)
        let table = Table::new(&["a", "b"], &[("a", "b", 0.5)]);
        let cfg = SimilarityConfig::new(2).unwrap();
        let s = article_similarity(&ranked(&["a"], 2), &ranked(&["a", "b"], 2), &table, &cfg);
        assert_eq!(s, 4.5 / 5.0);
    }

    #[test]
    fn adversarial_embeddings_stay_in_range() {
        let store = EmbeddingStore::from_vectors(
            2,
            [("p", [1.0f32, 0.0]), ("n", [-1.0, 0.0]), ("q", [0.6, 0.8])],
        )
        .unwrap();
        let cfg = SimilarityConfig::new(2).unwrap();
        let s = article_similarity(&ranked(&["p"], 2), &ranked(&["n"], 2), &store, &cfg);
        assert_eq!(s, -1.0);
        let s = article_similarity(
            &ranked(&["p", "q"], 2),
            &ranked(&["q", "p"], 2),
            &store,
            &cfg,
        );
        assert!((-1.0..=1.0).contains(&s));
    }
}
