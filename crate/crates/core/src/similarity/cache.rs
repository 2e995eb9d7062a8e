//! Memory- and file-backed memo of article similarities.
//!
//! Entries are keyed by the unordered id pair and bound to a generation
//! tag, a digest of every input that can change a similarity value. A cache
//! file written under a different tag is never served.

use std::fs::{self, File};
use std::io::{self, BufRead, BufReader, BufWriter, Read, Write};
use std::path::Path;
use std::sync::atomic::{AtomicU64, Ordering};

use dashmap::DashMap;
use log::info;
use sha2::{Digest, Sha256};

use crate::binio::{write_short_string, OffsetReader};
use crate::error::{Error, Result};

const CACHE_MAGIC: &[u8] = b"TMSC1";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub struct GenerationTag(pub [u8; 32]);

impl GenerationTag {
    pub fn to_hex(&self) -> String {
        self.0.iter().map(|b| format!("{b:02x}")).collect()
    }
}

/// Everything a cached similarity value depends on.
#[derive(Debug, Clone, Default)]
pub struct GenerationInputs {
    pub corpus_digest: [u8; 32],
    pub embeddings_digest: [u8; 32],
    /// Digest of the IDF reference (corpus file or prebuilt index).
    pub idf_digest: [u8; 32],
    pub stopwords_digest: [u8; 32],
    pub k: u64,
    pub min_df: u64,
    pub scheme: String,
}

impl GenerationInputs {
    pub fn tag(&self) -> GenerationTag {
        let mut h = Sha256::new();
        h.update(b"trivia-miner similarity cache\0");
        h.update(self.corpus_digest);
        h.update(self.embeddings_digest);
        h.update(self.idf_digest);
        h.update(self.stopwords_digest);
        h.update(self.k.to_le_bytes());
        h.update(self.min_df.to_le_bytes());
        h.update((self.scheme.len() as u64).to_le_bytes());
        h.update(self.scheme.as_bytes());
        GenerationTag(h.finalize().into())
    }
}

/// SHA-256 of a file's contents.
pub fn file_digest(path: impl AsRef<Path>) -> Result<[u8; 32]> {
    let path = path.as_ref();
    let mut file = File::open(path).map_err(|e| Error::io(path, e))?;
    let mut h = Sha256::new();
    let mut buf = vec![0u8; 1 << 16];
    loop {
        let n = file.read(&mut buf).map_err(|e| Error::io(path, e))?;
        if n == 0 {
            break;
        }
        h.update(&buf[..n]);
    }
    Ok(h.finalize().into())
}

/// SHA-256 of an in-memory buffer.
pub fn bytes_digest(bytes: &[u8]) -> [u8; 32] {
    Sha256::digest(bytes).into()
}

#[derive(Debug, Default)]
pub struct SimilarityCache {
    tag: GenerationTag,
    entries: DashMap<(String, String), f64>,
    hits: AtomicU64,
    misses: AtomicU64,
}

fn key(a: &str, b: &str) -> (String, String) {
    if a <= b {
        (a.to_owned(), b.to_owned())
    } else {
        (b.to_owned(), a.to_owned())
    }
}

impl SimilarityCache {
    pub fn new(tag: GenerationTag) -> Self {
        SimilarityCache {
            tag,
            ..Default::default()
        }
    }

    pub fn tag(&self) -> GenerationTag {
        self.tag
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn hits(&self) -> u64 {
        self.hits.load(Ordering::Relaxed)
    }

    pub fn misses(&self) -> u64 {
        self.misses.load(Ordering::Relaxed)
    }

    pub fn get(&self, a: &str, b: &str) -> Option<f64> {
        self.entries.get(&key(a, b)).map(|v| *v)
    }

    pub fn insert(&self, a: &str, b: &str, value: f64) {
        self.entries.insert(key(a, b), value);
    }

    /// Returns the stored value for the pair, computing it on a miss.
    ///
    /// The map lock is not held while `compute` runs, so two workers may
    /// compute the same pair; `compute` must be pure, making either result
    /// acceptable.
    pub fn get_or_insert_with(&self, a: &str, b: &str, compute: impl FnOnce() -> f64) -> f64 {
        let k = key(a, b);
        if let Some(v) = self.entries.get(&k) {
            self.hits.fetch_add(1, Ordering::Relaxed);
            return *v;
        }
        self.misses.fetch_add(1, Ordering::Relaxed);
        let value = compute();
        self.entries.insert(k, value);
        value
    }

    pub fn write_to<W: Write>(&self, w: &mut W) -> io::Result<()> {
        let mut entries: Vec<((String, String), f64)> = self
            .entries
            .iter()
            .map(|e| (e.key().clone(), *e.value()))
            .collect();
        entries.sort_unstable_by(|x, y| x.0.cmp(&y.0));
        w.write_all(CACHE_MAGIC)?;
        w.write_all(&self.tag.0)?;
        w.write_all(&(entries.len() as u64).to_le_bytes())?;
        for ((a, b), v) in entries {
            write_short_string(w, &a)?;
            write_short_string(w, &b)?;
            w.write_all(&v.to_le_bytes())?;
        }
        Ok(())
    }

    pub fn read_from<R: BufRead>(reader: R) -> Result<Self> {
        let mut r = OffsetReader::new(reader, "similarity cache");
        r.expect_magic(CACHE_MAGIC)?;
        let mut tag = [0u8; 32];
        r.read_exact(&mut tag)?;
        let count = r.read_u64()?;
        let cache = SimilarityCache::new(GenerationTag(tag));
        for _ in 0..count {
            let start = r.offset();
            let a = r.read_short_string()?;
            let b = r.read_short_string()?;
            let v = r.read_f64()?;
            if a >= b {
                return Err(Error::Malformed {
                    what: "similarity cache",
                    offset: start,
                    message: format!("pair ({a:?}, {b:?}) is not in ascending order"),
                });
            }
            if !(-1.0..=1.0).contains(&v) {
                return Err(Error::Malformed {
                    what: "similarity cache",
                    offset: start,
                    message: format!("similarity {v} out of range"),
                });
            }
            cache.entries.insert((a, b), v);
        }
        if !r.at_eof()? {
            return Err(r.malformed("trailing bytes after last entry"));
        }
        Ok(cache)
    }

    /// Load a cache file for `tag`. A missing file, or one written under a
    /// different tag, yields an empty cache.
    pub fn load(path: impl AsRef<Path>, tag: GenerationTag) -> Result<Self> {
        let path = path.as_ref();
        let file = match File::open(path) {
            Ok(f) => f,
            Err(e) if e.kind() == io::ErrorKind::NotFound => return Ok(SimilarityCache::new(tag)),
            Err(e) => return Err(Error::io(path, e)),
        };
        let cache = SimilarityCache::read_from(BufReader::new(file))?;
        if cache.tag != tag {
            info!(
                "{}: cache generation {} does not match {}; starting empty",
                path.display(),
                cache.tag.to_hex(),
                tag.to_hex()
            );
            return Ok(SimilarityCache::new(tag));
        }
        Ok(cache)
    }

    /// Write the cache atomically (temporary file, then rename).
    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        let mut tmp_name = path.as_os_str().to_owned();
        tmp_name.push(".tmp");
        let tmp = Path::new(&tmp_name);
        let file = File::create(tmp).map_err(|e| Error::io(tmp, e))?;
        let mut w = BufWriter::new(file);
        self.write_to(&mut w)
            .and_then(|_| w.flush())
            .map_err(|e| Error::io(tmp, e))?;
        drop(w);
        fs::rename(tmp, path).map_err(|e| Error::io(path, e))
    }
}
