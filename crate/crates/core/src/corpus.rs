//! Parallel corpus loading, tokenization, and the n-gram-to-unigram rewrite.
//!
//! A corpus is an ordered list of (source, target) sentence pairs. Tokens are
//! whatever whitespace splitting yields; no further normalization is applied.
//! `unigramize` rewrites every sentence into its sequence of overlapping
//! n-grams, each rendered as a single underscore-joined token, and
//! `de_unigramize` undoes the rewrite exactly.

use std::fmt;
use std::io::BufRead;
use std::ops::Deref;

use crate::error::{Error, Result, Side};

/// Joiner inserted between the words of an n-gram token.
pub const JOINER: char = '_';
/// Escape prefix protecting literal joiners (and escapes) in base tokens.
pub const ESCAPE: char = '\\';

/// A single word: non-empty and free of whitespace.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Token(String);

impl Token {
    pub fn new(text: impl Into<String>) -> Result<Self> {
        let text = text.into();
        if text.is_empty() {
            return Err(Error::InvalidToken {
                token: text,
                reason: "empty",
            });
        }
        if text.chars().any(char::is_whitespace) {
            return Err(Error::InvalidToken {
                token: text,
                reason: "contains whitespace",
            });
        }
        Ok(Token(text))
    }

    /// Construction for strings already known to satisfy the invariants,
    /// e.g. the output of `split_whitespace`.
    fn from_trusted(text: String) -> Self {
        debug_assert!(!text.is_empty() && !text.chars().any(char::is_whitespace));
        Token(text)
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl Deref for Token {
    type Target = str;

    fn deref(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for Token {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

/// A non-empty token sequence stored as a single space-joined string.
///
/// Tokens contain no whitespace, so the joined form is lossless; it doubles
/// as the canonical ordering key for phrase tables.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Phrase(String);

impl Phrase {
    pub fn from_tokens<'a, I>(tokens: I) -> Self
    where
        I: IntoIterator<Item = &'a Token>,
    {
        let joined = tokens
            .into_iter()
            .map(Token::as_str)
            .collect::<Vec<_>>()
            .join(" ");
        debug_assert!(!joined.is_empty());
        Phrase(joined)
    }

    /// Parses a whitespace-separated phrase, normalizing runs of whitespace
    /// to single spaces. Empty input is rejected.
    pub fn parse(text: &str) -> Result<Self> {
        let words: Vec<&str> = text.split_whitespace().collect();
        if words.is_empty() {
            return Err(Error::InvalidToken {
                token: text.to_string(),
                reason: "empty phrase",
            });
        }
        Ok(Phrase(words.join(" ")))
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }

    pub fn tokens(&self) -> impl Iterator<Item = &str> {
        self.0.split(' ')
    }

    /// Number of words in the phrase.
    pub fn word_count(&self) -> usize {
        self.0.split(' ').count()
    }
}

impl fmt::Display for Phrase {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

/// A (source phrase, target phrase) pair; one entry of a phrase table.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct PhrasePair {
    pub source: Phrase,
    pub target: Phrase,
}

impl PhrasePair {
    pub fn new(source: Phrase, target: Phrase) -> Self {
        PhrasePair { source, target }
    }
}

impl fmt::Display for PhrasePair {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} ||| {}", self.source, self.target)
    }
}

/// One line of a parallel corpus.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SentencePair {
    pub source: Vec<Token>,
    pub target: Vec<Token>,
}

/// Read access shared by original and unigramized corpora, so the sampler
/// and aligner work over either.
pub trait ParallelText {
    fn line_count(&self) -> usize;
    fn pair(&self, index: usize) -> &SentencePair;
}

/// A sentence-aligned parallel corpus. Immutable once constructed.
#[derive(Debug, Clone)]
pub struct Corpus {
    pairs: Vec<SentencePair>,
}

impl Corpus {
    /// Loads a corpus from two line-aligned readers, one sentence per line.
    ///
    /// The streams must have the same number of lines and no empty (or
    /// whitespace-only) lines.
    pub fn from_readers(source: impl BufRead, target: impl BufRead) -> Result<Self> {
        let source_lines = read_lines(source)?;
        let target_lines = read_lines(target)?;
        if source_lines.len() != target_lines.len() {
            return Err(Error::LineCountMismatch {
                source_lines: source_lines.len(),
                target_lines: target_lines.len(),
            });
        }
        let mut pairs = Vec::with_capacity(source_lines.len());
        for (i, (src, tgt)) in source_lines.iter().zip(&target_lines).enumerate() {
            pairs.push(SentencePair {
                source: tokenize_non_empty(src, Side::Source, i + 1)?,
                target: tokenize_non_empty(tgt, Side::Target, i + 1)?,
            });
        }
        Ok(Corpus { pairs })
    }

    /// Loads a corpus from a single reader with source and target separated
    /// by a tab on each line.
    pub fn from_tab_reader(reader: impl BufRead) -> Result<Self> {
        let mut pairs = Vec::new();
        for (i, line) in read_lines(reader)?.iter().enumerate() {
            let (src, tgt) = line
                .split_once('\t')
                .ok_or(Error::MissingTab { line: i + 1 })?;
            pairs.push(SentencePair {
                source: tokenize_non_empty(src, Side::Source, i + 1)?,
                target: tokenize_non_empty(tgt, Side::Target, i + 1)?,
            });
        }
        Ok(Corpus { pairs })
    }

    /// Convenience wrapper over `from_readers` for in-memory text.
    pub fn from_texts(source: &str, target: &str) -> Result<Self> {
        Self::from_readers(source.as_bytes(), target.as_bytes())
    }

    pub fn pairs(&self) -> &[SentencePair] {
        &self.pairs
    }
}

impl ParallelText for Corpus {
    fn line_count(&self) -> usize {
        self.pairs.len()
    }

    fn pair(&self, index: usize) -> &SentencePair {
        &self.pairs[index]
    }
}

/// Loads a monolingual text (e.g. a test set), one sentence per line.
pub fn load_monolingual(reader: impl BufRead) -> Result<Vec<Vec<Token>>> {
    read_lines(reader)?
        .iter()
        .enumerate()
        .map(|(i, line)| tokenize_non_empty(line, Side::Source, i + 1))
        .collect()
}

fn read_lines(reader: impl BufRead) -> Result<Vec<String>> {
    reader.lines().collect::<std::io::Result<Vec<_>>>().map_err(Error::from)
}

fn tokenize_non_empty(line: &str, side: Side, line_no: usize) -> Result<Vec<Token>> {
    let tokens = tokenize(line);
    if tokens.is_empty() {
        return Err(Error::EmptyLine { side, line: line_no });
    }
    Ok(tokens)
}

/// Splits on runs of Unicode whitespace; nothing else.
pub fn tokenize(line: &str) -> Vec<Token> {
    line.split_whitespace()
        .map(|w| Token::from_trusted(w.to_string()))
        .collect()
}

/// A corpus whose source n-grams and target m-grams have been rewritten as
/// single joined tokens. Lines shorter than the order become empty, but the
/// line itself is kept so line indices keep meaning the same sentences.
#[derive(Debug, Clone)]
pub struct UnigramizedCorpus {
    n: usize,
    m: usize,
    pairs: Vec<SentencePair>,
}

impl UnigramizedCorpus {
    /// Source n-gram order.
    pub fn source_order(&self) -> usize {
        self.n
    }

    /// Target m-gram order.
    pub fn target_order(&self) -> usize {
        self.m
    }

    pub fn pairs(&self) -> &[SentencePair] {
        &self.pairs
    }
}

impl ParallelText for UnigramizedCorpus {
    fn line_count(&self) -> usize {
        self.pairs.len()
    }

    fn pair(&self, index: usize) -> &SentencePair {
        &self.pairs[index]
    }
}

/// Rewrites the corpus so every overlapping source n-gram (target m-gram)
/// becomes one joined token. A side with fewer than n (m) words becomes
/// empty. Literal joiners and escapes in base tokens are escaped so the
/// transform is invertible.
pub fn unigramize(corpus: &Corpus, n: usize, m: usize) -> UnigramizedCorpus {
    assert!(n >= 1 && m >= 1, "n-gram orders must be >= 1");
    let pairs = corpus
        .pairs()
        .iter()
        .map(|pair| SentencePair {
            source: unigramize_tokens(&pair.source, n),
            target: unigramize_tokens(&pair.target, m),
        })
        .collect();
    UnigramizedCorpus { n, m, pairs }
}

/// The per-sentence half of `unigramize`: every overlapping window of
/// `order` tokens becomes one joined, escaped token.
pub fn unigramize_tokens(tokens: &[Token], order: usize) -> Vec<Token> {
    if tokens.len() < order {
        return Vec::new();
    }
    tokens
        .windows(order)
        .map(|window| {
            let joined = window
                .iter()
                .map(|t| escape_word(t.as_str()))
                .collect::<Vec<_>>()
                .join(&JOINER.to_string());
            Token::from_trusted(joined)
        })
        .collect()
}

fn escape_word(word: &str) -> String {
    let mut out = String::with_capacity(word.len());
    for c in word.chars() {
        if c == ESCAPE || c == JOINER {
            out.push(ESCAPE);
        }
        out.push(c);
    }
    out
}

/// Splits a joined token back into the original word sequence.
///
/// Tokens that never went through `unigramize` and contain no joiner come
/// back as a single-word phrase. Dangling escapes and empty word segments
/// are rejected.
pub fn de_unigramize(token: &Token) -> Result<Vec<Token>> {
    let malformed = |reason| Error::MalformedPhraseToken {
        token: token.as_str().to_string(),
        reason,
    };
    let mut words = Vec::new();
    let mut current = String::new();
    let mut chars = token.as_str().chars();
    while let Some(c) = chars.next() {
        if c == ESCAPE {
            match chars.next() {
                Some(e) if e == ESCAPE || e == JOINER => current.push(e),
                Some(_) => return Err(malformed("invalid escape sequence")),
                None => return Err(malformed("dangling escape")),
            }
        } else if c == JOINER {
            if current.is_empty() {
                return Err(malformed("empty word segment"));
            }
            words.push(Token::from_trusted(std::mem::take(&mut current)));
        } else {
            current.push(c);
        }
    }
    if current.is_empty() {
        return Err(malformed("empty word segment"));
    }
    words.push(Token::from_trusted(current));
    Ok(words)
}

/// Renders a token sequence as a plain line of text.
pub fn join_tokens(tokens: &[Token]) -> String {
    tokens
        .iter()
        .map(Token::as_str)
        .collect::<Vec<_>>()
        .join(" ")
}
