//! Text normalization: tokenize, case-fold, drop stopwords, stem.
//!
//! The stage order is fixed. Stopwords are matched against folded surface
//! forms before stemming, and again against the stem.

mod porter;

use std::collections::HashSet;
use std::fs;
use std::path::Path;

pub use porter::stem;

use crate::error::{Error, Result};

const DEFAULT_STOPWORDS: &str = include_str!("../../data/stopwords_en.txt");

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Stopwords(HashSet<String>);

impl Stopwords {
    /// The bundled English list.
    pub fn english() -> Self {
        Self::parse(DEFAULT_STOPWORDS)
    }

    /// Contents of the bundled list file.
    pub fn bundled_text() -> &'static str {
        DEFAULT_STOPWORDS
    }

    pub fn empty() -> Self {
        Stopwords(HashSet::new())
    }

    /// One word per line; `#` starts a comment; blank lines ignored.
    pub fn parse(text: &str) -> Self {
        let words = text
            .lines()
            .map(|line| line.split('#').next().unwrap_or("").trim())
            .filter(|w| !w.is_empty())
            .map(str::to_lowercase)
            .collect();
        Stopwords(words)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Ok(Self::parse(&text))
    }

    pub fn contains(&self, word: &str) -> bool {
        self.0.contains(word)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

impl<S: AsRef<str>> FromIterator<S> for Stopwords {
    fn from_iter<I: IntoIterator<Item = S>>(iter: I) -> Self {
        Stopwords(
            iter.into_iter()
                .map(|w| w.as_ref().to_lowercase())
                .collect(),
        )
    }
}

/// Normalized terms of one text, in order of occurrence.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct TokenStream {
    pub tokens: Vec<String>,
}

impl TokenStream {
    pub fn len(&self) -> usize {
        self.tokens.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tokens.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = &str> {
        self.tokens.iter().map(String::as_str)
    }
}

/// A normalized term together with the folded word it came from.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NormalizedToken {
    pub surface: String,
    pub stem: String,
}

/// Maximal runs of alphanumeric characters.
pub fn tokenize(text: &str) -> impl Iterator<Item = &str> {
    text.split(|c: char| !c.is_alphanumeric())
        .filter(|t| !t.is_empty())
}

/// Like [`normalize`] but keeps each term's folded surface form.
pub fn normalize_tokens<'a>(
    text: &'a str,
    stopwords: &'a Stopwords,
) -> impl Iterator<Item = NormalizedToken> + 'a {
    tokenize(text).filter_map(move |raw| {
        let surface: String = raw
            .to_lowercase()
            .chars()
            .filter(|c| !c.is_whitespace())
            .collect();
        if surface.is_empty() || stopwords.contains(&surface) {
            return None;
        }
        let stem = stem(&surface);
        // A few stems collide with stopwords ("ons" -> "on").
        if stopwords.contains(&stem) {
            return None;
        }
        Some(NormalizedToken { surface, stem })
    })
}

pub fn normalize(text: &str, stopwords: &Stopwords) -> TokenStream {
    TokenStream {
        tokens: normalize_tokens(text, stopwords).map(|t| t.stem).collect(),
    }
}
