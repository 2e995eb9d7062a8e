//! Category ranking by trivia-worthiness.
//!
//! For an article `a` and one of its categories `C`:
//!
//! * `sigma(a, C)` is the mean similarity of `a` to the other members,
//! * surprise is `1 / sigma(a, C)`,
//! * cohesiveness is the mean similarity over all member pairs,
//! * trivia is `cohesiveness / sigma(a, C)`: about 1 for a typical member,
//!   below 1 for an exemplar, above 1 for an outsider.
//!
//! Large categories are replaced by a seeded sample that always contains the
//! article being scored. Pair similarities may be evaluated in parallel but
//! every sum runs sequentially in category member order, so results do not
//! depend on the number of workers.

use std::cmp::Ordering;

use log::warn;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::ser::{Serialize, SerializeStruct, Serializer};
use sha2::{Digest, Sha256};

use crate::corpus::{Article, Category, Corpus};
use crate::error::{Error, Result};
use crate::similarity::{
    article_similarity, resolve_terms, PairSimilarity, SimilarityConfig, TermSpace,
};
use crate::textnorm::{normalize, Stopwords};
use crate::tfidf::{top_tfidf, DfIndex};

pub const DEFAULT_SAMPLE_CAP: usize = 50;
pub const DEFAULT_MIN_CATEGORY_SIZE: usize = 2;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EngineConfig {
    /// Largest member set used when scoring a category.
    pub sample_cap: usize,
    pub rng_seed: u64,
    pub min_category_size: usize,
    /// Report only categories whose trivia score reaches this value.
    pub trivia_threshold: Option<f64>,
}

impl Default for EngineConfig {
    fn default() -> Self {
        EngineConfig {
            sample_cap: DEFAULT_SAMPLE_CAP,
            rng_seed: 0,
            min_category_size: DEFAULT_MIN_CATEGORY_SIZE,
            trivia_threshold: None,
        }
    }
}

impl EngineConfig {
    pub fn validate(&self) -> Result<()> {
        if self.sample_cap < 2 {
            return Err(Error::Config("sample cap must be at least 2".into()));
        }
        if self.min_category_size < 2 {
            return Err(Error::Config(
                "minimum category size must be at least 2".into(),
            ));
        }
        if self.trivia_threshold.is_some_and(f64::is_nan) {
            return Err(Error::Config("trivia threshold is NaN".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CategoryScore {
    pub category: String,
    /// `f64::INFINITY` when the article's mean similarity is not positive.
    pub surprise: f64,
    pub cohesiveness: f64,
    pub trivia: f64,
    pub sampled: bool,
    pub sample_size: usize,
}

impl CategoryScore {
    /// The article's mean similarity to the category was not positive.
    pub fn is_degenerate(&self) -> bool {
        self.surprise.is_infinite()
    }
}

/// Finite values as JSON numbers, infinity as the string `"inf"`.
pub(crate) struct JsonFloat(pub f64);

impl Serialize for JsonFloat {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        if self.0.is_finite() {
            s.serialize_f64(self.0)
        } else if self.0 > 0.0 {
            s.serialize_str("inf")
        } else if self.0 < 0.0 {
            s.serialize_str("-inf")
        } else {
            s.serialize_str("nan")
        }
    }
}

impl Serialize for CategoryScore {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let mut st = s.serialize_struct("CategoryScore", 6)?;
        st.serialize_field("category", &self.category)?;
        st.serialize_field("surprise", &JsonFloat(self.surprise))?;
        st.serialize_field("cohesiveness", &JsonFloat(self.cohesiveness))?;
        st.serialize_field("trivia", &JsonFloat(self.trivia))?;
        st.serialize_field("sampled", &self.sampled)?;
        st.serialize_field("sample_size", &self.sample_size)?;
        st.end()
    }
}

/// Surprise of one article with respect to one category.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Surprise {
    pub surprise: f64,
    /// Mean similarity of the article to the other (sampled) members.
    pub similarity: f64,
    pub sampled: bool,
    pub sample_size: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MemberSurprise {
    pub article: String,
    pub surprise: f64,
    pub similarity: f64,
}

impl Serialize for MemberSurprise {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let mut st = s.serialize_struct("MemberSurprise", 3)?;
        st.serialize_field("article", &self.article)?;
        st.serialize_field("surprise", &JsonFloat(self.surprise))?;
        st.serialize_field("similarity", &JsonFloat(self.similarity))?;
        st.end()
    }
}

/// Output of [`TriviaEngine::top_trivia`].
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Ranking {
    /// Best first; degenerate entries last.
    pub scores: Vec<CategoryScore>,
    /// Categories of the article that were too small to score.
    pub excluded: Vec<String>,
}

/// Seed for a category's sample, independent of evaluation order.
fn category_rng(seed: u64, category: &str) -> ChaCha8Rng {
    let mut h = Sha256::new();
    h.update(seed.to_le_bytes());
    h.update(category.as_bytes());
    ChaCha8Rng::from_seed(h.finalize().into())
}

/// The members used to score `category` for `target`: all of them when the
/// category fits under `cap`, otherwise `target` plus `cap - 1` others drawn
/// without replacement. Members keep their category order.
pub fn sample_members<'c>(
    category: &'c Category,
    cap: usize,
    seed: u64,
    target: &str,
) -> Vec<&'c str> {
    let members = &category.members;
    if members.len() <= cap {
        return members.iter().map(String::as_str).collect();
    }
    let target_pos = members.iter().position(|m| m == target);
    let pool: Vec<usize> = (0..members.len())
        .filter(|&i| Some(i) != target_pos)
        .collect();
    let draw = if target_pos.is_some() { cap - 1 } else { cap };
    let mut rng = category_rng(seed, &category.name);
    let mut chosen: Vec<usize> = rand::seq::index::sample(&mut rng, pool.len(), draw)
        .into_iter()
        .map(|i| pool[i])
        .chain(target_pos)
        .collect();
    chosen.sort_unstable();
    chosen.into_iter().map(|i| members[i].as_str()).collect()
}

/// Similarities of all unordered pairs `(i, j)`, `i < j`, in row-major order.
fn pair_similarities<P: PairSimilarity>(sim: &P, members: &[&str]) -> Result<Vec<f64>> {
    let pairs: Vec<(usize, usize)> = (0..members.len())
        .flat_map(|i| (i + 1..members.len()).map(move |j| (i, j)))
        .collect();
    pairs
        .par_iter()
        .map(|&(i, j)| sim.similarity(members[i], members[j]))
        .collect()
}

/// Index of pair `(i, j)`, `i < j`, in the row-major pair list of `n` members.
fn pair_index(n: usize, i: usize, j: usize) -> usize {
    debug_assert!(i < j && j < n);
    i * (2 * n - i - 1) / 2 + (j - i - 1)
}

fn mean(values: impl Iterator<Item = f64>) -> f64 {
    let (sum, count) = values.fold((0.0, 0usize), |(s, c), v| (s + v, c + 1));
    sum / count as f64
}

/// Mean similarity between `members[target]` and every other member, summed
/// in member order.
fn similarity_to_rest(pairs: &[f64], n: usize, target: usize) -> f64 {
    mean((0..n).filter(|&m| m != target).map(|m| {
        let (i, j) = if m < target { (m, target) } else { (target, m) };
        pairs[pair_index(n, i, j)]
    }))
}

fn surprise_of(similarity: f64) -> f64 {
    if similarity > 0.0 {
        1.0 / similarity
    } else {
        f64::INFINITY
    }
}

fn ranking_order(a: &CategoryScore, b: &CategoryScore) -> Ordering {
    a.is_degenerate()
        .cmp(&b.is_degenerate())
        .then_with(|| b.trivia.total_cmp(&a.trivia))
        .then_with(|| a.category.cmp(&b.category))
}

pub struct TriviaEngine<'a, P> {
    corpus: &'a Corpus,
    sim: P,
    cfg: EngineConfig,
}

impl<'a, P: PairSimilarity> TriviaEngine<'a, P> {
    pub fn new(corpus: &'a Corpus, sim: P, cfg: EngineConfig) -> Result<Self> {
        cfg.validate()?;
        Ok(TriviaEngine { corpus, sim, cfg })
    }

    pub fn config(&self) -> &EngineConfig {
        &self.cfg
    }

    pub fn similarity_source(&self) -> &P {
        &self.sim
    }

    fn category(&self, name: &str) -> Result<&'a Category> {
        self.corpus
            .category(name)
            .ok_or_else(|| Error::UnknownCategory(name.to_owned()))
    }

    fn article(&self, id: &str) -> Result<&'a Article> {
        self.corpus
            .article(id)
            .ok_or_else(|| Error::UnknownArticle(id.to_owned()))
    }

    /// Checked member set for scoring `category` around `article`.
    fn scoring_members(&self, article: &str, category: &'a Category) -> Result<Vec<&'a str>> {
        if !category.contains(article) {
            return Err(Error::NotAMember {
                article: article.to_owned(),
                category: category.name.clone(),
            });
        }
        if category.len() < 2 {
            return Err(Error::SingletonCategory(category.name.clone()));
        }
        Ok(sample_members(
            category,
            self.cfg.sample_cap,
            self.cfg.rng_seed,
            article,
        ))
    }

    pub fn sample(&self, category: &str, target: &str) -> Result<Vec<&'a str>> {
        let cat = self.category(category)?;
        Ok(sample_members(
            cat,
            self.cfg.sample_cap,
            self.cfg.rng_seed,
            target,
        ))
    }

    pub fn surprise(&self, article: &str, category: &str) -> Result<Surprise> {
        let cat = self.category(category)?;
        let members = self.scoring_members(article, cat)?;
        let sims = members
            .iter()
            .filter(|&&m| m != article)
            .map(|m| self.sim.similarity(article, m))
            .collect::<Result<Vec<f64>>>()?;
        let similarity = mean(sims.into_iter());
        Ok(Surprise {
            surprise: surprise_of(similarity),
            similarity,
            sampled: members.len() < cat.len(),
            sample_size: members.len(),
        })
    }

    /// Mean pairwise similarity of the members sampled around `article`
    /// (the whole category when it fits under the sample cap).
    pub fn cohesiveness(&self, category: &str, article: &str) -> Result<f64> {
        let cat = self.category(category)?;
        let members = self.scoring_members(article, cat)?;
        Ok(mean(pair_similarities(&self.sim, &members)?.into_iter()))
    }

    pub fn trivia_score(&self, article: &str, category: &str) -> Result<CategoryScore> {
        let cat = self.category(category)?;
        let members = self.scoring_members(article, cat)?;
        let n = members.len();
        let target = members
            .iter()
            .position(|&m| m == article)
            .expect("target is always sampled");
        let pairs = pair_similarities(&self.sim, &members)?;
        let cohesiveness = mean(pairs.iter().copied());
        let similarity = similarity_to_rest(&pairs, n, target);
        let surprise = surprise_of(similarity);
        let trivia = if surprise.is_finite() {
            cohesiveness / similarity
        } else {
            f64::INFINITY
        };
        Ok(CategoryScore {
            category: cat.name.clone(),
            surprise,
            cohesiveness,
            trivia,
            sampled: n < cat.len(),
            sample_size: n,
        })
    }

    /// Scores every sufficiently large category of `article`, best first.
    pub fn top_trivia(&self, article: &str) -> Result<Ranking> {
        let art = self.article(article)?;
        let mut excluded = Vec::new();
        let mut scorable = Vec::new();
        for name in &art.categories {
            let cat = self.category(name)?;
            if cat.len() < self.cfg.min_category_size {
                warn!(
                    "{article}: category {name:?} has {} member(s), below the minimum of {}; skipped",
                    cat.len(),
                    self.cfg.min_category_size
                );
                excluded.push(name.clone());
            } else {
                scorable.push(name.as_str());
            }
        }
        if scorable.is_empty() {
            warn!("{article}: no scorable category");
        }
        let mut scores = scorable
            .par_iter()
            .map(|name| self.trivia_score(article, name))
            .collect::<Result<Vec<_>>>()?;
        scores.sort_by(ranking_order);
        if let Some(threshold) = self.cfg.trivia_threshold {
            scores.retain(|s| s.trivia >= threshold);
        }
        Ok(Ranking { scores, excluded })
    }

    /// Every member's surprise with respect to `category`, most surprising
    /// first; the last entry is the category's exemplar.
    pub fn rank_members_by_surprise(&self, category: &str) -> Result<Vec<MemberSurprise>> {
        let cat = self.category(category)?;
        if cat.len() < 2 {
            return Err(Error::SingletonCategory(cat.name.clone()));
        }
        let mut out = cat
            .members
            .par_iter()
            .map(|m| {
                let s = self.surprise(m, category)?;
                Ok(MemberSurprise {
                    article: m.clone(),
                    surprise: s.surprise,
                    similarity: s.similarity,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        out.sort_by(|a, b| {
            b.surprise
                .total_cmp(&a.surprise)
                .then_with(|| a.article.cmp(&b.article))
        });
        Ok(out)
    }
}

#[derive(Debug, Clone, PartialEq, serde::Serialize)]
pub struct Explanation {
    pub paragraph: usize,
    pub score: f64,
}

/// Picks the paragraph of `article` most similar to the category title.
///
/// Title and paragraphs are reduced to their top TF-IDF terms against
/// `index` and compared with the article metric. Paragraphs without any
/// in-vocabulary term are not candidates; ties go to the earliest paragraph.
pub fn explain_category<S: TermSpace>(
    article: &Article,
    category_title: &str,
    index: &DfIndex,
    stopwords: &Stopwords,
    space: &S,
    cfg: &SimilarityConfig,
) -> Result<Explanation> {
    let title = top_tfidf(&normalize(category_title, stopwords), index, cfg.k());
    let mut best: Option<Explanation> = None;
    for (i, paragraph) in article.paragraphs.iter().enumerate() {
        let terms = top_tfidf(&normalize(paragraph, stopwords), index, cfg.k());
        if !resolve_terms(&terms, space, cfg).has_vocabulary() {
            continue;
        }
        let score = article_similarity(&title, &terms, space, cfg);
        if best.as_ref().is_none_or(|b| score > b.score) {
            best = Some(Explanation {
                paragraph: i,
                score,
            });
        }
    }
    best.ok_or_else(|| Error::NoExplainableParagraph(article.id.clone()))
}
