//! Document-frequency statistics and top-K TF-IDF term extraction.
//!
//! Scores are `tf(t) * ln(n_docs / df(t))` with `tf` the raw count of a term
//! in the article. Terms missing from the index (pruned or never seen)
//! score nothing, and so do terms that appear in every document.

use std::cmp::Ordering;
use std::collections::{HashMap, HashSet};
use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use crate::binio::{write_short_string, OffsetReader};
use crate::corpus::Corpus;
use crate::error::{Error, Result};
use crate::textnorm::{normalize, Stopwords, TokenStream};

pub const DEFAULT_MIN_DF: u64 = 10;
pub const DEFAULT_K: usize = 10;

const DF_MAGIC: &[u8] = b"TMDF1";

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DfIndex {
    df: HashMap<String, u64>,
    n_docs: u64,
    min_df: u64,
}

impl DfIndex {
    /// Count, for every term, the number of documents containing it, then
    /// drop terms below `min_df`. A `min_df` of 0 behaves like 1.
    pub fn from_documents<D, T>(documents: D, min_df: u64) -> Result<DfIndex>
    where
        D: IntoIterator,
        D::Item: IntoIterator<Item = T>,
        T: AsRef<str>,
    {
        let min_df = min_df.max(1);
        let mut df: HashMap<String, u64> = HashMap::new();
        let mut n_docs = 0u64;
        let mut seen = HashSet::new();
        for doc in documents {
            n_docs += 1;
            seen.clear();
            for term in doc {
                let term = term.as_ref();
                if !seen.contains(term) {
                    seen.insert(term.to_owned());
                    *df.entry(term.to_owned()).or_insert(0) += 1;
                }
            }
        }
        if n_docs == 0 {
            return Err(Error::EmptyCorpus);
        }
        df.retain(|_, count| *count >= min_df);
        Ok(DfIndex { df, n_docs, min_df })
    }

    pub fn n_docs(&self) -> u64 {
        self.n_docs
    }

    pub fn min_df(&self) -> u64 {
        self.min_df
    }

    pub fn len(&self) -> usize {
        self.df.len()
    }

    pub fn is_empty(&self) -> bool {
        self.df.is_empty()
    }

    pub fn df(&self, term: &str) -> Option<u64> {
        self.df.get(term).copied()
    }

    pub fn idf(&self, term: &str) -> Option<f64> {
        self.df(term)
            .map(|df| (self.n_docs as f64 / df as f64).ln())
    }

    /// Terms with their counts in ascending byte order.
    pub fn entries(&self) -> Vec<(&str, u64)> {
        let mut entries: Vec<_> = self.df.iter().map(|(t, &c)| (t.as_str(), c)).collect();
        entries.sort_unstable_by(|a, b| a.0.cmp(b.0));
        entries
    }

    pub fn write_to<W: Write>(&self, w: &mut W) -> std::io::Result<()> {
        w.write_all(DF_MAGIC)?;
        w.write_all(&self.n_docs.to_le_bytes())?;
        w.write_all(&self.min_df.to_le_bytes())?;
        w.write_all(&(self.df.len() as u64).to_le_bytes())?;
        for (term, count) in self.entries() {
            write_short_string(w, term)?;
            w.write_all(&count.to_le_bytes())?;
        }
        Ok(())
    }

    pub fn read_from<R: BufRead>(reader: R) -> Result<DfIndex> {
        let mut r = OffsetReader::new(reader, "df index");
        r.expect_magic(DF_MAGIC)?;
        let n_docs = r.read_u64()?;
        let min_df = r.read_u64()?;
        if min_df == 0 {
            return Err(r.malformed("min_df must be at least 1"));
        }
        let count = r.read_u64()?;
        let mut df = HashMap::new();
        for _ in 0..count {
            let start = r.offset();
            let term = r.read_short_string()?;
            let c = r.read_u64()?;
            if c < min_df || c > n_docs {
                return Err(Error::Malformed {
                    what: "df index",
                    offset: start,
                    message: format!("document count {c} for {term:?} out of range"),
                });
            }
            if df.insert(term, c).is_some() {
                return Err(Error::Malformed {
                    what: "df index",
                    offset: start,
                    message: "duplicate term".into(),
                });
            }
        }
        if !r.at_eof()? {
            return Err(r.malformed("trailing bytes after last entry"));
        }
        Ok(DfIndex { df, n_docs, min_df })
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        let file = File::create(path).map_err(|e| Error::io(path, e))?;
        let mut w = BufWriter::new(file);
        self.write_to(&mut w)
            .and_then(|_| w.flush())
            .map_err(|e| Error::io(path, e))
    }

    pub fn load(path: impl AsRef<Path>) -> Result<DfIndex> {
        let path = path.as_ref();
        let file = File::open(path).map_err(|e| Error::io(path, e))?;
        DfIndex::read_from(BufReader::new(file))
    }
}

/// Build document frequencies over the normalized text of every article.
pub fn build_df_index(corpus: &Corpus, stopwords: &Stopwords, min_df: u64) -> Result<DfIndex> {
    DfIndex::from_documents(
        corpus
            .articles()
            .iter()
            .map(|a| normalize(&a.text, stopwords).tokens),
        min_df,
    )
}

/// An article's highest-scoring terms, best first.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct RankedTerms {
    pub terms: Vec<(String, f64)>,
    pub k: usize,
}

impl RankedTerms {
    pub fn from_terms<S: Into<String>>(terms: impl IntoIterator<Item = S>, k: usize) -> Self {
        let terms: Vec<(String, f64)> = terms
            .into_iter()
            .take(k)
            .enumerate()
            .map(|(i, t)| (t.into(), (k - i) as f64))
            .collect();
        RankedTerms { terms, k }
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn iter_terms(&self) -> impl Iterator<Item = &str> {
        self.terms.iter().map(|(t, _)| t.as_str())
    }
}

fn rank_order(a: &(String, f64), b: &(String, f64)) -> Ordering {
    b.1.total_cmp(&a.1).then_with(|| a.0.cmp(&b.0))
}

pub fn top_tfidf(tokens: &TokenStream, index: &DfIndex, k: usize) -> RankedTerms {
    let mut tf: HashMap<&str, u64> = HashMap::new();
    for t in tokens.iter() {
        *tf.entry(t).or_insert(0) += 1;
    }
    let mut scored: Vec<(String, f64)> = tf
        .into_iter()
        .filter_map(|(term, count)| {
            let score = count as f64 * index.idf(term)?;
            (score > 0.0).then(|| (term.to_owned(), score))
        })
        .collect();
    scored.sort_unstable_by(rank_order);
    scored.truncate(k);
    RankedTerms { terms: scored, k }
}
