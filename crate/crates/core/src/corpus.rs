//! Article/category corpus loaded from a JSON Lines snapshot.
//!
//! Each line is one article object with `id`, `title`, `text` and
//! `categories`. Unknown fields are ignored. The category index is built as
//! the exact inverse of the per-article category lists.

use std::collections::HashMap;
use std::fs::File;
use std::io::{BufRead, BufReader};
use std::path::Path;

use log::warn;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// One line of the corpus file.
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
pub struct ArticleRecord {
    pub id: String,
    #[serde(default)]
    pub title: String,
    #[serde(default)]
    pub text: String,
    #[serde(default)]
    pub categories: Vec<String>,
}

impl ArticleRecord {
    pub fn new(id: &str, title: &str, text: &str, categories: &[&str]) -> Self {
        ArticleRecord {
            id: id.to_owned(),
            title: title.to_owned(),
            text: text.to_owned(),
            categories: categories.iter().map(|c| (*c).to_owned()).collect(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Article {
    pub id: String,
    pub title: String,
    pub text: String,
    pub paragraphs: Vec<String>,
    pub categories: Vec<String>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Category {
    pub name: String,
    /// Member ids in corpus order.
    pub members: Vec<String>,
}

impl Category {
    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    /// Singletons stay in the corpus but cannot be scored.
    pub fn is_singleton(&self) -> bool {
        self.members.len() < 2
    }

    pub fn contains(&self, id: &str) -> bool {
        self.members.iter().any(|m| m == id)
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct Corpus {
    articles: Vec<Article>,
    by_id: HashMap<String, usize>,
    categories: Vec<Category>,
    by_category: HashMap<String, usize>,
    warnings: Vec<String>,
}

/// Read and validate a JSONL corpus file.
pub fn load_corpus(path: impl AsRef<Path>) -> Result<Corpus> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    Corpus::from_reader(BufReader::new(file), path)
}

impl Corpus {
    pub fn from_reader<R: BufRead>(reader: R, path: &Path) -> Result<Corpus> {
        let mut records = Vec::new();
        for (idx, line) in reader.lines().enumerate() {
            let line = line.map_err(|e| Error::io(path, e))?;
            if line.trim().is_empty() {
                continue;
            }
            let record: ArticleRecord = serde_json::from_str(&line).map_err(|e| Error::Parse {
                path: path.to_owned(),
                line: idx + 1,
                message: e.to_string(),
            })?;
            records.push(record);
        }
        Corpus::from_records(records)
    }

    pub fn from_records(records: impl IntoIterator<Item = ArticleRecord>) -> Result<Corpus> {
        let mut corpus = Corpus::default();
        for record in records {
            if corpus.by_id.contains_key(&record.id) {
                return Err(Error::DuplicateId(record.id));
            }
            let mut categories: Vec<String> = Vec::with_capacity(record.categories.len());
            for name in record.categories {
                if name.trim().is_empty() {
                    corpus.warn(format!(
                        "article {:?}: dropping category with an empty name",
                        record.id
                    ));
                } else if categories.contains(&name) {
                    corpus.warn(format!(
                        "article {:?}: duplicate category {name:?} ignored",
                        record.id
                    ));
                } else {
                    categories.push(name);
                }
            }
            let paragraphs = split_paragraphs(&record.text);
            corpus
                .by_id
                .insert(record.id.clone(), corpus.articles.len());
            corpus.articles.push(Article {
                id: record.id,
                title: record.title,
                text: record.text,
                paragraphs,
                categories,
            });
        }

        for article in &corpus.articles {
            for name in &article.categories {
                let idx = *corpus.by_category.entry(name.clone()).or_insert_with(|| {
                    corpus.categories.push(Category {
                        name: name.clone(),
                        members: Vec::new(),
                    });
                    corpus.categories.len() - 1
                });
                corpus.categories[idx].members.push(article.id.clone());
            }
        }
        Ok(corpus)
    }

    fn warn(&mut self, message: String) {
        warn!("{message}");
        self.warnings.push(message);
    }

    pub fn n_docs(&self) -> usize {
        self.articles.len()
    }

    pub fn is_empty(&self) -> bool {
        self.articles.is_empty()
    }

    /// Articles in file order.
    pub fn articles(&self) -> &[Article] {
        &self.articles
    }

    pub fn article(&self, id: &str) -> Option<&Article> {
        self.by_id.get(id).map(|&i| &self.articles[i])
    }

    /// Position of an article in file order.
    pub fn article_index(&self, id: &str) -> Option<usize> {
        self.by_id.get(id).copied()
    }

    /// Categories in order of first appearance.
    pub fn categories(&self) -> &[Category] {
        &self.categories
    }

    pub fn category(&self, name: &str) -> Option<&Category> {
        self.by_category.get(name).map(|&i| &self.categories[i])
    }

    /// Messages recorded while loading (dropped or duplicated categories).
    pub fn warnings(&self) -> &[String] {
        &self.warnings
    }

    /// Checks that the category index is exactly the inverse of the
    /// per-article category lists.
    pub fn is_consistent(&self) -> bool {
        let forward = self.articles.iter().all(|a| {
            a.categories
                .iter()
                .all(|c| self.category(c).is_some_and(|cat| cat.contains(&a.id)))
        });
        let backward = self.categories.iter().all(|cat| {
            !cat.members.is_empty()
                && cat.members.iter().all(|m| {
                    self.article(m)
                        .is_some_and(|a| a.categories.iter().any(|c| c == &cat.name))
                })
        });
        forward && backward && self.by_id.len() == self.articles.len()
    }
}

/// Split a document body on blank lines (runs of two or more newlines).
/// Segments are trimmed and empty ones dropped.
pub fn split_paragraphs(text: &str) -> Vec<String> {
    let bytes = text.as_bytes();
    let mut out = Vec::new();
    let mut push = |segment: &str| {
        let segment = segment.trim();
        if !segment.is_empty() {
            out.push(segment.to_owned());
        }
    };

    let mut start = 0;
    let mut i = 0;
    while i < bytes.len() {
        if bytes[i] != b'\n' {
            i += 1;
            continue;
        }
        let mut j = i;
        let mut newlines = 0;
        while j < bytes.len() && matches!(bytes[j], b'\n' | b'\r') {
            if bytes[j] == b'\n' {
                newlines += 1;
            }
            j += 1;
        }
        if newlines >= 2 {
            push(&text[start..i]);
            start = j;
        }
        i = j;
    }
    push(&text[start..]);
    out
}
