//! Pre-trained word vectors in the word2vec text and binary formats.
//!
//! Vectors are scaled to unit length when loaded, so word similarity is a
//! plain dot product. The dot product is accumulated in `f64` in component
//! order, which makes it exactly symmetric.

use std::collections::HashMap;
use std::fs::File;
use std::io::{self, BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use log::warn;

use crate::binio::OffsetReader;
use crate::error::{Error, Result};
use crate::textnorm::NormalizedToken;

/// Tolerance on the Euclidean norm of a stored unit vector.
pub const UNIT_NORM_TOLERANCE: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum EmbeddingFormat {
    Text,
    #[default]
    Binary,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EmbeddingStore {
    dim: usize,
    terms: Vec<String>,
    rows: HashMap<String, usize>,
    data: Vec<f32>,
    unit_normalized: bool,
}

impl EmbeddingStore {
    pub fn new(dim: usize, unit_normalized: bool) -> Self {
        EmbeddingStore {
            dim,
            terms: Vec::new(),
            rows: HashMap::new(),
            data: Vec::new(),
            unit_normalized,
        }
    }

    /// Build a unit-normalized store from in-memory vectors.
    pub fn from_vectors<S, V>(dim: usize, vectors: impl IntoIterator<Item = (S, V)>) -> Result<Self>
    where
        S: Into<String>,
        V: AsRef<[f32]>,
    {
        let mut store = EmbeddingStore::new(dim, true);
        for (i, (term, v)) in vectors.into_iter().enumerate() {
            let v = v.as_ref();
            if v.len() != dim {
                return Err(Error::ComponentCount {
                    line: i + 1,
                    expected: dim,
                    found: v.len(),
                });
            }
            store.push(term.into(), v.to_vec())?;
        }
        Ok(store)
    }

    /// Adds a vector, normalizing it when the store is unit-normalized.
    /// Duplicate terms keep their first vector.
    fn push(&mut self, term: String, mut v: Vec<f32>) -> Result<()> {
        debug_assert_eq!(v.len(), self.dim);
        if v.iter().any(|x| !x.is_finite()) {
            return Err(Error::NonFinite(term));
        }
        if self.unit_normalized {
            let norm = v
                .iter()
                .map(|&x| f64::from(x) * f64::from(x))
                .sum::<f64>()
                .sqrt();
            if norm == 0.0 {
                return Err(Error::ZeroVector(term));
            }
            // Vectors already at unit length are stored untouched so that
            // write/read cycles reproduce them bit for bit.
            if (norm - 1.0).abs() > UNIT_NORM_TOLERANCE {
                for x in &mut v {
                    *x = (f64::from(*x) / norm) as f32;
                }
            }
        }
        if self.rows.contains_key(&term) {
            warn!("duplicate embedding for {term:?}; keeping the first");
            return Ok(());
        }
        self.rows.insert(term.clone(), self.terms.len());
        self.terms.push(term);
        self.data.extend_from_slice(&v);
        Ok(())
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn is_unit_normalized(&self) -> bool {
        self.unit_normalized
    }

    pub fn row(&self, term: &str) -> Option<usize> {
        self.rows.get(term).copied()
    }

    pub fn term(&self, row: usize) -> &str {
        &self.terms[row]
    }

    pub fn vector(&self, row: usize) -> &[f32] {
        &self.data[row * self.dim..(row + 1) * self.dim]
    }

    pub fn get(&self, term: &str) -> Option<&[f32]> {
        self.row(term).map(|r| self.vector(r))
    }

    /// Terms and vectors in load order.
    pub fn iter(&self) -> impl Iterator<Item = (&str, &[f32])> {
        self.terms
            .iter()
            .enumerate()
            .map(|(r, t)| (t.as_str(), self.vector(r)))
    }

    /// Cosine of two stored rows, clamped to [-1, 1]. A row compared with
    /// itself is exactly 1.
    pub fn row_similarity(&self, a: usize, b: usize) -> f64 {
        if a == b {
            return 1.0;
        }
        let dot: f64 = self
            .vector(a)
            .iter()
            .zip(self.vector(b))
            .map(|(&x, &y)| f64::from(x) * f64::from(y))
            .sum();
        dot.clamp(-1.0, 1.0)
    }

    /// `None` when either word is out of vocabulary.
    pub fn word_similarity(&self, w1: &str, w2: &str) -> Option<f64> {
        Some(self.row_similarity(self.row(w1)?, self.row(w2)?))
    }

    pub fn read_text<R: BufRead>(reader: R, label: &Path) -> Result<Self> {
        let parse_err = |line: usize, message: String| Error::Parse {
            path: label.to_owned(),
            line,
            message,
        };
        let mut lines = reader.lines().enumerate();
        let (vocab, dim) = match lines.next() {
            Some((_, line)) => {
                let line = line.map_err(|e| Error::io(label, e))?;
                parse_header(&line).map_err(|m| parse_err(1, m))?
            }
            None => return Err(parse_err(1, "missing header".into())),
        };
        let mut store = EmbeddingStore::new(dim, true);
        let mut found = 0usize;
        for (idx, line) in lines {
            let line = line.map_err(|e| Error::io(label, e))?;
            let line_no = idx + 1;
            let mut fields = line.split_whitespace();
            let Some(term) = fields.next() else { continue };
            found += 1;
            if found > vocab {
                continue;
            }
            let v = fields
                .map(|f| {
                    f.parse::<f32>()
                        .map_err(|e| parse_err(line_no, format!("bad component {f:?}: {e}")))
                })
                .collect::<Result<Vec<f32>>>()?;
            if v.len() != dim {
                return Err(Error::ComponentCount {
                    line: line_no,
                    expected: dim,
                    found: v.len(),
                });
            }
            store.push(term.to_owned(), v)?;
        }
        if found != vocab {
            return Err(Error::EntryCount {
                declared: vocab,
                found,
            });
        }
        Ok(store)
    }

    pub fn read_binary<R: BufRead>(reader: R) -> Result<Self> {
        let mut r = OffsetReader::new(reader, "word2vec binary");
        let header = r.read_until(b'\n')?;
        let (vocab, dim) =
            parse_header(&String::from_utf8_lossy(&header)).map_err(|m| Error::Malformed {
                what: "word2vec binary",
                offset: 0,
                message: m,
            })?;
        let mut store = EmbeddingStore::new(dim, true);
        for _ in 0..vocab {
            while r.peek()? == Some(b'\n') {
                r.skip_byte();
            }
            let term = r.read_until(b' ')?;
            let term = String::from_utf8_lossy(&term).into_owned();
            let mut v = Vec::with_capacity(dim);
            for _ in 0..dim {
                v.push(r.read_f32()?);
            }
            store.push(term, v)?;
        }
        while r.peek()? == Some(b'\n') {
            r.skip_byte();
        }
        if !r.at_eof()? {
            return Err(r.malformed(format!("data after the declared {vocab} entries")));
        }
        Ok(store)
    }

    pub fn write_text<W: Write>(&self, w: &mut W) -> io::Result<()> {
        writeln!(w, "{} {}", self.len(), self.dim)?;
        for (term, v) in self.iter() {
            check_term(term)?;
            w.write_all(term.as_bytes())?;
            for x in v {
                write!(w, " {x}")?;
            }
            w.write_all(b"\n")?;
        }
        Ok(())
    }

    pub fn write_binary<W: Write>(&self, w: &mut W) -> io::Result<()> {
        writeln!(w, "{} {}", self.len(), self.dim)?;
        for (term, v) in self.iter() {
            check_term(term)?;
            w.write_all(term.as_bytes())?;
            w.write_all(b" ")?;
            for x in v {
                w.write_all(&x.to_le_bytes())?;
            }
            w.write_all(b"\n")?;
        }
        Ok(())
    }

    pub fn save(&self, path: impl AsRef<Path>, format: EmbeddingFormat) -> Result<()> {
        let path = path.as_ref();
        let file = File::create(path).map_err(|e| Error::io(path, e))?;
        let mut w = BufWriter::new(file);
        match format {
            EmbeddingFormat::Text => self.write_text(&mut w),
            EmbeddingFormat::Binary => self.write_binary(&mut w),
        }
        .and_then(|_| w.flush())
        .map_err(|e| Error::io(path, e))
    }

    pub fn load(path: impl AsRef<Path>, format: EmbeddingFormat) -> Result<Self> {
        match format {
            EmbeddingFormat::Text => load_word2vec_text(path),
            EmbeddingFormat::Binary => load_word2vec_binary(path),
        }
    }
}

fn check_term(term: &str) -> io::Result<()> {
    if term.is_empty() || term.contains([' ', '\n']) {
        return Err(io::Error::new(
            io::ErrorKind::InvalidInput,
            format!("term {term:?} cannot be written in word2vec format"),
        ));
    }
    Ok(())
}

fn parse_header(line: &str) -> std::result::Result<(usize, usize), String> {
    let mut parts = line.split_whitespace();
    let mut next = |name: &str| -> std::result::Result<usize, String> {
        parts
            .next()
            .ok_or_else(|| format!("header is missing {name}"))?
            .parse()
            .map_err(|e| format!("bad {name} in header: {e}"))
    };
    let vocab = next("vocabulary size")?;
    let dim = next("dimension")?;
    if parts.next().is_some() {
        return Err("header has extra fields".into());
    }
    Ok((vocab, dim))
}

pub fn load_word2vec_text(path: impl AsRef<Path>) -> Result<EmbeddingStore> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    EmbeddingStore::read_text(BufReader::new(file), path)
}

pub fn load_word2vec_binary(path: impl AsRef<Path>) -> Result<EmbeddingStore> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    EmbeddingStore::read_binary(BufReader::new(file))
}

pub fn word_similarity(store: &EmbeddingStore, w1: &str, w2: &str) -> Option<f64> {
    store.word_similarity(w1, w2)
}

/// Surface words seen for each stem, most frequent first.
///
/// TF-IDF terms are stems while embedding vocabularies hold ordinary words;
/// this table maps a stem back to the words it came from.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct SurfaceForms {
    by_stem: HashMap<String, Vec<String>>,
}

impl SurfaceForms {
    pub fn from_tokens(tokens: impl IntoIterator<Item = NormalizedToken>) -> Self {
        let mut counts: HashMap<String, HashMap<String, u64>> = HashMap::new();
        for t in tokens {
            if t.surface != t.stem {
                *counts
                    .entry(t.stem)
                    .or_default()
                    .entry(t.surface)
                    .or_insert(0) += 1;
            }
        }
        let by_stem = counts
            .into_iter()
            .map(|(stem, forms)| {
                let mut forms: Vec<(String, u64)> = forms.into_iter().collect();
                forms.sort_unstable_by(|a, b| b.1.cmp(&a.1).then_with(|| a.0.cmp(&b.0)));
                (stem, forms.into_iter().map(|(s, _)| s).collect())
            })
            .collect();
        SurfaceForms { by_stem }
    }

    pub fn candidates(&self, stem: &str) -> &[String] {
        self.by_stem.get(stem).map_or(&[], Vec::as_slice)
    }

    pub fn len(&self) -> usize {
        self.by_stem.len()
    }

    pub fn is_empty(&self) -> bool {
        self.by_stem.is_empty()
    }
}

/// Resolves TF-IDF terms to embedding rows: the term itself if it is in the
/// vocabulary, otherwise its most frequent in-vocabulary surface form.
#[derive(Debug, Clone, Copy)]
pub struct Lexicon<'a> {
    pub store: &'a EmbeddingStore,
    pub surfaces: Option<&'a SurfaceForms>,
}

impl<'a> Lexicon<'a> {
    pub fn new(store: &'a EmbeddingStore, surfaces: Option<&'a SurfaceForms>) -> Self {
        Lexicon { store, surfaces }
    }

    pub fn resolve_row(&self, term: &str) -> Option<usize> {
        self.store.row(term).or_else(|| {
            self.surfaces?
                .candidates(term)
                .iter()
                .find_map(|s| self.store.row(s))
        })
    }
}
