//! Synthetic corpora and embeddings shared by the integration tests.
#![allow(dead_code)]

use std::collections::HashMap;
use std::fs;
use std::path::{Path, PathBuf};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use trivia_miner::corpus::ArticleRecord;
use trivia_miner::error::Result;
use trivia_miner::similarity::PairSimilarity;
use trivia_miner::{EmbeddingFormat, EmbeddingStore};

pub const TARGET: &str = "target";
pub const PLANTED: &str = "Planted category";
pub const DECOY_A: &str = "Decoy category A";
pub const DECOY_B: &str = "Decoy category B";
pub const LONER: &str = "Lonely category";

/// Similarity between planted members.
pub const TIGHT: f64 = 0.8;
/// Similarity of the target to each planted member.
pub const ATTACH: f64 = 0.38;
/// Pairwise similarity inside a decoy, target included.
pub const DECOY: f64 = 0.3;

/// A corpus whose articles are words with known embedding geometry.
pub struct Fixture {
    pub dir: tempfile::TempDir,
    pub corpus: PathBuf,
    pub embeddings_text: PathBuf,
    pub embeddings_binary: PathBuf,
}

impl Fixture {
    /// Flags for a run against this fixture: every token is indexed (df 1).
    pub fn args(&self) -> Vec<String> {
        vec![
            "--corpus".into(),
            self.corpus.display().to_string(),
            "--embeddings".into(),
            self.embeddings_binary.display().to_string(),
            "--min-df".into(),
            "1".into(),
        ]
    }
}

/// Ten distinct, stem-stable tokens for article number `n`.
pub fn tokens(n: usize) -> Vec<String> {
    (0..10).map(|j| format!("t{n:02}w{j}")).collect()
}

fn unit(dim: usize, i: usize) -> Vec<f64> {
    let mut v = vec![0.0; dim];
    v[i] = 1.0;
    v
}

fn combo(parts: &[(f64, &[f64])]) -> Vec<f64> {
    let dim = parts[0].1.len();
    let mut out = vec![0.0; dim];
    for (w, v) in parts {
        for (o, x) in out.iter_mut().zip(*v) {
            *o += w * x;
        }
    }
    out
}

/// 30 articles: a target, ten tight planted members, two decoy categories of
/// nine members each that also contain the target, and one filler article in
/// a singleton category.
///
/// Geometry (shared axes p, a, b; a private axis per article):
///   planted member = sqrt(.8) p + sqrt(.2) own      (pairwise 0.8)
///   decoy member   = sqrt(.3) a|b + sqrt(.7) own    (pairwise 0.3)
///   target         = (.38/sqrt(.8)) p + sqrt(.3) a + sqrt(.3) b + rest own
pub fn planted_outlier() -> Fixture {
    let dir = tempfile::tempdir().unwrap();
    let n_articles = 30;
    let dim = 3 + n_articles;
    let (p, a, b) = (unit(dim, 0), unit(dim, 1), unit(dim, 2));
    let own = |n: usize| unit(dim, 3 + n);

    let mut records = Vec::new();
    let mut vectors: Vec<Vec<f64>> = Vec::new();

    let tp = ATTACH / TIGHT.sqrt();
    let td = DECOY.sqrt();
    let rest = (1.0 - tp * tp - 2.0 * td * td).sqrt();
    records.push(ArticleRecord::new(
        TARGET,
        "The Target",
        "",
        &[DECOY_A, PLANTED, DECOY_B],
    ));
    vectors.push(combo(&[(tp, &p), (td, &a), (td, &b), (rest, &own(0))]));

    for i in 0..10 {
        records.push(ArticleRecord::new(
            &format!("planted{i}"),
            &format!("Planted {i}"),
            "",
            &[PLANTED],
        ));
        vectors.push(combo(&[
            (TIGHT.sqrt(), &p),
            ((1.0 - TIGHT).sqrt(), &own(records.len() - 1)),
        ]));
    }
    for (name, axis, tag) in [(DECOY_A, &a, "da"), (DECOY_B, &b, "db")] {
        for i in 0..9 {
            records.push(ArticleRecord::new(
                &format!("{tag}{i}"),
                &format!("Decoy {tag} {i}"),
                "",
                &[name],
            ));
            vectors.push(combo(&[
                (DECOY.sqrt(), axis),
                ((1.0 - DECOY).sqrt(), &own(records.len() - 1)),
            ]));
        }
    }
    records.push(ArticleRecord::new("filler", "Filler", "", &[LONER]));
    vectors.push(own(records.len() - 1));
    assert_eq!(records.len(), n_articles);

    for (n, r) in records.iter_mut().enumerate() {
        let words = tokens(n);
        r.text = format!("{}\n\n{}", words[..5].join(" "), words[5..].join(" "));
    }
    let corpus = dir.path().join("corpus.jsonl");
    write_corpus(&corpus, &records);

    let store = EmbeddingStore::from_vectors(
        dim,
        vectors.iter().enumerate().flat_map(|(n, v)| {
            let v32: Vec<f32> = v.iter().map(|&x| x as f32).collect();
            tokens(n).into_iter().map(move |t| (t, v32.clone()))
        }),
    )
    .unwrap();
    let embeddings_text = dir.path().join("vectors.txt");
    let embeddings_binary = dir.path().join("vectors.bin");
    store.save(&embeddings_text, EmbeddingFormat::Text).unwrap();
    store
        .save(&embeddings_binary, EmbeddingFormat::Binary)
        .unwrap();
    Fixture {
        dir,
        corpus,
        embeddings_text,
        embeddings_binary,
    }
}

pub fn write_corpus(path: &Path, records: &[ArticleRecord]) {
    let mut text = String::new();
    for r in records {
        text.push_str(&serde_json::to_string(r).unwrap());
        text.push('\n');
    }
    fs::write(path, text).unwrap();
}

/// Pair similarities from a table keyed by unordered id pair; missing pairs
/// fall back to `default`.
pub struct StubSimilarity {
    pub table: HashMap<(String, String), f64>,
    pub default: f64,
}

impl StubSimilarity {
    pub fn new(default: f64) -> Self {
        StubSimilarity {
            table: HashMap::new(),
            default,
        }
    }

    pub fn set(&mut self, a: &str, b: &str, v: f64) {
        let key = if a <= b {
            (a.into(), b.into())
        } else {
            (b.into(), a.into())
        };
        self.table.insert(key, v);
    }

    pub fn get(&self, a: &str, b: &str) -> f64 {
        self.similarity(a, b).unwrap()
    }
}

impl PairSimilarity for StubSimilarity {
    fn similarity(&self, a: &str, b: &str) -> Result<f64> {
        if a == b {
            return Ok(1.0);
        }
        let key = if a <= b {
            (a.to_owned(), b.to_owned())
        } else {
            (b.to_owned(), a.to_owned())
        };
        Ok(self.table.get(&key).copied().unwrap_or(self.default))
    }
}

/// Random unit vectors of dimension `dim` for `terms`.
pub fn random_store(rng: &mut ChaCha8Rng, dim: usize, terms: &[String]) -> EmbeddingStore {
    EmbeddingStore::from_vectors(
        dim,
        terms.iter().map(|t| {
            let v: Vec<f32> = (0..dim).map(|_| rng.random_range(-1.0f32..1.0)).collect();
            (t.clone(), v)
        }),
    )
    .unwrap()
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}
