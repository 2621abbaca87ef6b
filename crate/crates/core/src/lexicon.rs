//! Pretrained word vectors in the whitespace-separated text format, plus
//! tokenization and token-to-matrix lookup.
//!
//! The text format is one word per line, the token followed by its vector
//! components. An optional first line `count dim` (exactly two integers) is
//! detected and skipped:
//!
//! ```text
//! 2 3
//! a 1 0 0
//! b 0 1 0
//! ```

use std::collections::HashMap;
use std::fmt;
use std::fs::File;
use std::io::{self, BufRead, BufReader, Write};
use std::path::Path;
use std::str::FromStr;

use thiserror::Error;

use crate::encoder::{EncodeError, SentenceMatrix};
use crate::scalar::Scalar;

#[derive(Debug, Error)]
pub enum LexiconError {
    #[error("I/O error: {0}")]
    Io(#[from] io::Error),
    #[error("vector file contains no entries")]
    Empty,
    #[error("line {line}: {message}")]
    Malformed { line: usize, message: String },
    #[error("inconsistent dimensions at line {line}: expected {expected}, found {found}")]
    InconsistentDim {
        line: usize,
        expected: usize,
        found: usize,
    },
    #[error("vector dimension {found} does not match expected {expected}")]
    DimMismatch { expected: usize, found: usize },
    #[error("out-of-vocabulary token {0:?}")]
    Oov(String),
    #[error(transparent)]
    Encode(#[from] EncodeError),
}

/// What to do with tokens missing from the table.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum OovPolicy {
    #[default]
    Skip,
    Zero,
    Error,
}

impl fmt::Display for OovPolicy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            OovPolicy::Skip => "skip",
            OovPolicy::Zero => "zero",
            OovPolicy::Error => "error",
        })
    }
}

impl FromStr for OovPolicy {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "skip" => Ok(OovPolicy::Skip),
            "zero" | "zero-vector" => Ok(OovPolicy::Zero),
            "error" => Ok(OovPolicy::Error),
            _ => Err(format!("unknown OOV policy {s:?} (expected skip, zero or error)")),
        }
    }
}

/// Token → vector map with a fixed dimensionality. Vectors are kept as `f32`.
#[derive(Debug, Clone)]
pub struct WordEmbeddingTable {
    dim: usize,
    words: Vec<String>,
    index: HashMap<String, usize>,
    vectors: Vec<f32>,
    oov_policy: OovPolicy,
    duplicates: usize,
}

impl WordEmbeddingTable {
    pub fn new(dim: usize, oov_policy: OovPolicy) -> Self {
        assert!(dim > 0, "embedding dimension must be positive");
        Self {
            dim,
            words: Vec::new(),
            index: HashMap::new(),
            vectors: Vec::new(),
            oov_policy,
            duplicates: 0,
        }
    }

    /// Insert a vector. Returns `false` (and keeps the old vector) if the
    /// token is already present.
    ///
    /// Panics if the token is empty or contains whitespace, or if the vector
    /// has the wrong length or non-finite entries.
    pub fn insert(&mut self, token: &str, vector: &[f32]) -> bool {
        assert!(
            !token.is_empty() && !token.chars().any(char::is_whitespace),
            "invalid token {token:?}"
        );
        assert_eq!(vector.len(), self.dim, "vector length");
        assert!(vector.iter().all(|v| v.is_finite()), "non-finite vector");
        if self.index.contains_key(token) {
            self.duplicates += 1;
            return false;
        }
        self.index.insert(token.to_owned(), self.words.len());
        self.words.push(token.to_owned());
        self.vectors.extend_from_slice(vector);
        true
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.words.len()
    }

    pub fn is_empty(&self) -> bool {
        self.words.is_empty()
    }

    pub fn oov_policy(&self) -> OovPolicy {
        self.oov_policy
    }

    pub fn set_oov_policy(&mut self, policy: OovPolicy) {
        self.oov_policy = policy;
    }

    /// Number of duplicate tokens dropped while loading.
    pub fn duplicates(&self) -> usize {
        self.duplicates
    }

    pub fn lookup(&self, token: &str) -> Option<&[f32]> {
        self.index
            .get(token)
            .map(|&i| &self.vectors[i * self.dim..(i + 1) * self.dim])
    }

    /// Entries in insertion order.
    pub fn iter(&self) -> impl Iterator<Item = (&str, &[f32])> {
        self.words
            .iter()
            .map(String::as_str)
            .zip(self.vectors.chunks_exact(self.dim))
    }

    /// Parse the text format from a reader.
    pub fn read_text<R: BufRead>(
        reader: R,
        expected_dim: Option<usize>,
        oov_policy: OovPolicy,
    ) -> Result<Self, LexiconError> {
        let mut table: Option<Self> = None;
        let mut values = Vec::new();
        for (idx, line) in reader.lines().enumerate() {
            let line_no = idx + 1;
            let line = line?;
            let line = line.strip_suffix('\r').unwrap_or(&line);
            if line.trim().is_empty() {
                continue;
            }
            let mut fields = line.split_whitespace();
            let token = fields.next().expect("non-blank line has a field");
            if line_no == 1 && is_header(line) {
                continue;
            }
            values.clear();
            for field in fields {
                let v: f32 = field.parse().map_err(|_| LexiconError::Malformed {
                    line: line_no,
                    message: format!("cannot parse {field:?} as a number"),
                })?;
                if !v.is_finite() {
                    return Err(LexiconError::Malformed {
                        line: line_no,
                        message: format!("non-finite value {field:?}"),
                    });
                }
                values.push(v);
            }
            let table = match &mut table {
                Some(t) => t,
                None => {
                    if values.is_empty() {
                        return Err(LexiconError::Malformed {
                            line: line_no,
                            message: "token has no vector".into(),
                        });
                    }
                    if let Some(expected) = expected_dim {
                        if expected != values.len() {
                            return Err(LexiconError::DimMismatch {
                                expected,
                                found: values.len(),
                            });
                        }
                    }
                    table.insert(Self::new(values.len(), oov_policy))
                }
            };
            if values.len() != table.dim {
                return Err(LexiconError::InconsistentDim {
                    line: line_no,
                    expected: table.dim,
                    found: values.len(),
                });
            }
            if !table.insert(token, &values) {
                log::warn!("line {line_no}: duplicate token {token:?} ignored");
            }
        }
        table.ok_or(LexiconError::Empty)
    }

    /// Write the table with a `count dim` header.
    pub fn write_text<W: Write>(&self, mut w: W) -> io::Result<()> {
        writeln!(w, "{} {}", self.len(), self.dim)?;
        for (word, vector) in self.iter() {
            w.write_all(word.as_bytes())?;
            for v in vector {
                write!(w, " {v}")?;
            }
            w.write_all(b"\n")?;
        }
        w.flush()
    }
}

/// A first line with exactly two integer fields is a `count dim` header.
fn is_header(line: &str) -> bool {
    let fields: Vec<&str> = line.split_whitespace().collect();
    fields.len() == 2 && fields.iter().all(|f| f.parse::<u64>().is_ok())
}

/// Load a word-vector text file. The dimension is taken from the first data
/// line and must match `expected_dim` when one is given.
pub fn load_table(
    path: impl AsRef<Path>,
    expected_dim: Option<usize>,
    oov_policy: OovPolicy,
) -> Result<WordEmbeddingTable, LexiconError> {
    let file = File::open(path)?;
    WordEmbeddingTable::read_text(BufReader::new(file), expected_dim, oov_policy)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TokenizedSentence {
    pub tokens: Vec<String>,
    pub source_text: String,
}

impl TokenizedSentence {
    pub fn from_tokens<S: AsRef<str>>(tokens: &[S]) -> Self {
        let tokens: Vec<String> = tokens.iter().map(|t| t.as_ref().to_owned()).collect();
        let source_text = tokens.join(" ");
        Self { tokens, source_text }
    }

    pub fn len(&self) -> usize {
        self.tokens.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tokens.is_empty()
    }
}

/// Whitespace tokenizer that strips surrounding punctuation.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Tokenizer {
    pub lowercase: bool,
}

impl Default for Tokenizer {
    fn default() -> Self {
        Self { lowercase: true }
    }
}

impl Tokenizer {
    pub fn tokenize(&self, text: &str) -> TokenizedSentence {
        let tokens = text
            .split_whitespace()
            .map(|raw| raw.trim_matches(is_punctuation))
            .filter(|t| !t.is_empty())
            .map(|t| if self.lowercase { t.to_lowercase() } else { t.to_owned() })
            .collect();
        TokenizedSentence {
            tokens,
            source_text: text.to_owned(),
        }
    }
}

/// Tokenize with the default settings (lowercasing on).
pub fn tokenize(text: &str) -> TokenizedSentence {
    Tokenizer::default().tokenize(text)
}

fn is_punctuation(c: char) -> bool {
    c.is_ascii_punctuation()
        || matches!(
            c,
            '\u{2010}'..='\u{2027}' | '\u{2030}'..='\u{205E}' | '«' | '»' | '¡' | '¿' | '·'
        )
}

/// Stack the vectors of `sent` into an `N × d` matrix, applying the table's
/// OOV policy. Also returns the number of OOV tokens seen.
pub fn embed_tokens_counting<T: Scalar>(
    table: &WordEmbeddingTable,
    sent: &TokenizedSentence,
) -> Result<(SentenceMatrix<T>, usize), LexiconError> {
    let mut mat = SentenceMatrix::new(table.dim())?;
    let mut row: Vec<T> = Vec::with_capacity(table.dim());
    let mut oov = 0;
    for token in &sent.tokens {
        match table.lookup(token) {
            Some(v) => {
                row.clear();
                row.extend(v.iter().map(|&x| T::from_f32(x).expect("f32 widens")));
                mat.push_row(&row)?;
            }
            None => {
                oov += 1;
                match table.oov_policy() {
                    OovPolicy::Skip => {}
                    OovPolicy::Zero => {
                        row.clear();
                        row.resize(table.dim(), T::zero());
                        mat.push_row(&row)?;
                    }
                    OovPolicy::Error => return Err(LexiconError::Oov(token.clone())),
                }
            }
        }
    }
    Ok((mat, oov))
}

/// Stack the vectors of `sent` into an `N × d` matrix, applying the table's
/// OOV policy.
pub fn embed_tokens<T: Scalar>(
    table: &WordEmbeddingTable,
    sent: &TokenizedSentence,
) -> Result<SentenceMatrix<T>, LexiconError> {
    embed_tokens_counting(table, sent).map(|(m, _)| m)
}

#[cfg(test)]
mod tests {
    use super::*;

    const SMALL: &str = "2 3\na 1 0 0\nb 0 1 0\n";

    fn small(policy: OovPolicy) -> WordEmbeddingTable {
        WordEmbeddingTable::read_text(SMALL.as_bytes(), None, policy).unwrap()
    }

    #[test]
    fn reads_headered_file() {
        let t = small(OovPolicy::Skip);
        assert_eq!(t.dim(), 3);
        assert_eq!(t.len(), 2);
        assert_eq!(t.lookup("a"), Some(&[1.0f32, 0.0, 0.0][..]));
        assert_eq!(t.lookup("z"), None);
    }

    #[test]
    fn reads_headerless_file() {
        let t = WordEmbeddingTable::read_text("a 1 0\nb 0 1\n".as_bytes(), Some(2), OovPolicy::Skip)
            .unwrap();
        assert_eq!((t.dim(), t.len()), (2, 2));
    }

    #[test]
    fn rejects_inconsistent_dims() {
        let err =
            WordEmbeddingTable::read_text("a 1 0\nb 0 1 1\n".as_bytes(), None, OovPolicy::Skip)
                .unwrap_err();
        assert!(matches!(
            err,
            LexiconError::InconsistentDim { line: 2, expected: 2, found: 3 }
        ));
        assert!(err.to_string().contains("line 2"));
    }

    #[test]
    fn rejects_bad_input() {
        let err = WordEmbeddingTable::read_text("".as_bytes(), None, OovPolicy::Skip).unwrap_err();
        assert!(matches!(err, LexiconError::Empty));
        let err = WordEmbeddingTable::read_text("3 2\n".as_bytes(), None, OovPolicy::Skip)
            .unwrap_err();
        assert!(matches!(err, LexiconError::Empty));
        let err = WordEmbeddingTable::read_text("a 1 x\n".as_bytes(), None, OovPolicy::Skip)
            .unwrap_err();
        assert!(matches!(err, LexiconError::Malformed { line: 1, .. }));
        let err = WordEmbeddingTable::read_text("a 1 2\nb 1 nan\n".as_bytes(), None, OovPolicy::Skip)
            .unwrap_err();
        assert!(matches!(err, LexiconError::Malformed { line: 2, .. }));
        let err = WordEmbeddingTable::read_text(SMALL.as_bytes(), Some(4), OovPolicy::Skip)
            .unwrap_err();
        assert!(matches!(err, LexiconError::DimMismatch { expected: 4, found: 3 }));
    }

    #[test]
    fn duplicates_keep_first() {
        let t = WordEmbeddingTable::read_text("a 1 2\na 3 4\nb 5 6\n".as_bytes(), None, OovPolicy::Skip)
            .unwrap();
        assert_eq!(t.len(), 2);
        assert_eq!(t.duplicates(), 1);
        assert_eq!(t.lookup("a"), Some(&[1.0f32, 2.0][..]));
    }

    #[test]
    fn write_then_read_round_trips() {
        let t = WordEmbeddingTable::read_text("x 0.1 -2.5e-3\ny 3.14159 7\n".as_bytes(), None, OovPolicy::Skip)
            .unwrap();
        let mut buf = Vec::new();
        t.write_text(&mut buf).unwrap();
        let back = WordEmbeddingTable::read_text(&buf[..], None, OovPolicy::Skip).unwrap();
        assert_eq!(back.iter().collect::<Vec<_>>(), t.iter().collect::<Vec<_>>());
    }

    #[test]
    fn tokenizer_examples() {
        assert_eq!(tokenize("Man bites dog.").tokens, ["man", "bites", "dog"]);
        assert!(tokenize("").tokens.is_empty());
        assert_eq!(tokenize("dog  bites   man").tokens, ["dog", "bites", "man"]);
        assert_eq!(tokenize("\"Well,\" -- she said…").tokens, ["well", "she", "said"]);
        assert_eq!(tokenize("don't e-mail").tokens, ["don't", "e-mail"]);
        let cased = Tokenizer { lowercase: false }.tokenize("Man bites Dog!");
        assert_eq!(cased.tokens, ["Man", "bites", "Dog"]);
        assert_eq!(cased.source_text, "Man bites Dog!");
    }

    #[test]
    fn embed_examples() {
        let sent = TokenizedSentence::from_tokens(&["a", "b"]);
        let m: SentenceMatrix<f64> = embed_tokens(&small(OovPolicy::Skip), &sent).unwrap();
        assert_eq!(m.rows().collect::<Vec<_>>(), vec![&[1.0, 0.0, 0.0][..], &[0.0, 1.0, 0.0][..]]);

        let sent = TokenizedSentence::from_tokens(&["a", "z"]);
        let (m, oov) = embed_tokens_counting::<f64>(&small(OovPolicy::Skip), &sent).unwrap();
        assert_eq!((m.n_rows(), oov), (1, 1));
        assert_eq!(m.row(0), &[1.0, 0.0, 0.0]);

        let m: SentenceMatrix<f64> = embed_tokens(&small(OovPolicy::Zero), &sent).unwrap();
        assert_eq!(m.row(1), &[0.0, 0.0, 0.0]);

        let err = embed_tokens::<f64>(&small(OovPolicy::Error), &sent).unwrap_err();
        assert!(matches!(err, LexiconError::Oov(ref t) if t == "z"));

        let all_oov = TokenizedSentence::from_tokens(&["y", "z"]);
        let m: SentenceMatrix<f64> = embed_tokens(&small(OovPolicy::Skip), &all_oov).unwrap();
        assert!(m.is_empty());
    }
}
