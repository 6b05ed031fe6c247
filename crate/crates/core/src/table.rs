//! Phrase translation tables: feature estimation from alignment counts and
//! the Moses plain-text interchange format.
//!
//! Every entry carries five features in file order: inverse translation
//! probability p(s|t), inverse lexical weight, direct translation
//! probability p(t|s), direct lexical weight, and the constant phrase
//! penalty e.

use std::collections::{BTreeMap, HashMap};
use std::io::{BufRead, Write};

use crate::aligner::AlignmentCounts;
use crate::corpus::{Phrase, PhrasePair};
use crate::error::{Error, Result};

/// The phrase penalty shared by every entry.
pub const PHRASE_PENALTY: f64 = std::f64::consts::E;

/// Word-level translation distributions in both directions, estimated from
/// phrase-pair co-occurrence mass. Rows are normalized: for every source
/// word s, the w(t|s) sum to 1, and symmetrically.
#[derive(Debug, Clone)]
pub struct Lexicon {
    tgt_given_src: HashMap<String, HashMap<String, f64>>,
    src_given_tgt: HashMap<String, HashMap<String, f64>>,
}

impl Lexicon {
    /// w(target | source); 0 when the pair never co-occurred.
    pub fn tgt_given_src(&self, source: &str, target: &str) -> f64 {
        self.tgt_given_src
            .get(source)
            .and_then(|row| row.get(target))
            .copied()
            .unwrap_or(0.0)
    }

    /// w(source | target); 0 when the pair never co-occurred.
    pub fn src_given_tgt(&self, target: &str, source: &str) -> f64 {
        self.src_given_tgt
            .get(target)
            .and_then(|row| row.get(source))
            .copied()
            .unwrap_or(0.0)
    }
}

/// Estimates the word translation distributions: every (source word, target
/// word) occurrence pair inside an aligned phrase pair contributes that
/// pair's count, and the mass is then row-normalized in each direction.
pub fn build_lexicon(counts: &AlignmentCounts) -> Result<Lexicon> {
    if counts.is_empty() {
        return Err(Error::EmptyCounts);
    }
    let mut cooc: HashMap<&str, HashMap<&str, f64>> = HashMap::new();
    for (pair, c) in counts.iter() {
        for s in pair.source.tokens() {
            let row = cooc.entry(s).or_default();
            for t in pair.target.tokens() {
                *row.entry(t).or_insert(0.0) += c as f64;
            }
        }
    }
    let mut tgt_given_src: HashMap<String, HashMap<String, f64>> = HashMap::new();
    let mut inverse_mass: HashMap<&str, f64> = HashMap::new();
    for (s, row) in &cooc {
        let total: f64 = row.values().sum();
        let normalized = row
            .iter()
            .map(|(t, &mass)| (t.to_string(), mass / total))
            .collect();
        tgt_given_src.insert(s.to_string(), normalized);
        for (t, &mass) in row {
            *inverse_mass.entry(t).or_insert(0.0) += mass;
        }
    }
    let mut src_given_tgt: HashMap<String, HashMap<String, f64>> = HashMap::new();
    for (s, row) in &cooc {
        for (t, &mass) in row {
            src_given_tgt
                .entry(t.to_string())
                .or_default()
                .insert(s.to_string(), mass / inverse_mass[t]);
        }
    }
    Ok(Lexicon {
        tgt_given_src,
        src_given_tgt,
    })
}

/// One phrase table entry: four probabilities plus the constant penalty.
/// `extra` holds any further fields found after the fifth feature when a
/// table was parsed; they pass through writing untouched.
#[derive(Debug, Clone, PartialEq)]
pub struct PhraseTableEntry {
    pub p_src_given_tgt: f64,
    pub lex_src_given_tgt: f64,
    pub p_tgt_given_src: f64,
    pub lex_tgt_given_src: f64,
    pub penalty: f64,
    pub extra: Vec<String>,
}

impl PhraseTableEntry {
    pub fn new(
        p_src_given_tgt: f64,
        lex_src_given_tgt: f64,
        p_tgt_given_src: f64,
        lex_tgt_given_src: f64,
    ) -> Self {
        PhraseTableEntry {
            p_src_given_tgt,
            lex_src_given_tgt,
            p_tgt_given_src,
            lex_tgt_given_src,
            penalty: PHRASE_PENALTY,
            extra: Vec::new(),
        }
    }
}

/// A phrase translation table keyed by phrase pair, ordered by source phrase
/// then target phrase so every serialization is deterministic.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct PhraseTable {
    entries: BTreeMap<PhrasePair, PhraseTableEntry>,
}

impl PhraseTable {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn insert(&mut self, pair: PhrasePair, entry: PhraseTableEntry) -> Option<PhraseTableEntry> {
        self.entries.insert(pair, entry)
    }

    pub fn get(&self, pair: &PhrasePair) -> Option<&PhraseTableEntry> {
        self.entries.get(pair)
    }

    pub fn contains(&self, pair: &PhrasePair) -> bool {
        self.entries.contains_key(pair)
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Entries in (source, target) lexicographic order.
    pub fn iter(&self) -> impl Iterator<Item = (&PhrasePair, &PhraseTableEntry)> {
        self.entries.iter()
    }

    pub fn pairs(&self) -> impl Iterator<Item = &PhrasePair> {
        self.entries.keys()
    }
}

impl FromIterator<(PhrasePair, PhraseTableEntry)> for PhraseTable {
    fn from_iter<I: IntoIterator<Item = (PhrasePair, PhraseTableEntry)>>(iter: I) -> Self {
        PhraseTable {
            entries: iter.into_iter().collect(),
        }
    }
}

/// Turns counts into a table: direct and inverse translation probabilities
/// are count ratios, lexical weights average the word distribution over all
/// words of the other side, and the penalty is constant.
///
/// The lexical weight of a target phrase given a source phrase multiplies,
/// over target words t, the mean of w(t|s) across the source words s; the
/// inverse direction is symmetric.
pub fn estimate_features(counts: &AlignmentCounts, lexicon: &Lexicon) -> PhraseTable {
    let mut source_totals: HashMap<&Phrase, u64> = HashMap::new();
    let mut target_totals: HashMap<&Phrase, u64> = HashMap::new();
    for (pair, c) in counts.iter() {
        *source_totals.entry(&pair.source).or_insert(0) += c;
        *target_totals.entry(&pair.target).or_insert(0) += c;
    }
    counts
        .iter()
        .map(|(pair, c)| {
            let p_tgt_given_src = c as f64 / source_totals[&pair.source] as f64;
            let p_src_given_tgt = c as f64 / target_totals[&pair.target] as f64;
            let lex_tgt_given_src = lexical_weight(&pair.source, &pair.target, |s, t| {
                lexicon.tgt_given_src(s, t)
            });
            let lex_src_given_tgt = lexical_weight(&pair.target, &pair.source, |t, s| {
                lexicon.src_given_tgt(t, s)
            });
            (
                pair.clone(),
                PhraseTableEntry::new(
                    p_src_given_tgt,
                    lex_src_given_tgt,
                    p_tgt_given_src,
                    lex_tgt_given_src,
                ),
            )
        })
        .collect()
}

fn lexical_weight(
    given: &Phrase,
    predicted: &Phrase,
    w: impl Fn(&str, &str) -> f64,
) -> f64 {
    let given_words: Vec<&str> = given.tokens().collect();
    predicted
        .tokens()
        .map(|p| {
            given_words.iter().map(|g| w(g, p)).sum::<f64>() / given_words.len() as f64
        })
        .product()
}

/// Full count-to-table pipeline; empty counts yield an empty table.
pub fn table_from_counts(counts: &AlignmentCounts) -> PhraseTable {
    if counts.is_empty() {
        return PhraseTable::new();
    }
    let lexicon = build_lexicon(counts).expect("counts checked non-empty");
    estimate_features(counts, &lexicon)
}

/// Writes the table in the Moses plain-text format, one entry per line:
///
/// ```text
/// source words ||| target words ||| p(s|t) lex(s|t) p(t|s) lex(t|s) penalty
/// ```
///
/// Features carry six significant digits; entries come out sorted, so two
/// writes of the same table are byte-identical.
pub fn write_moses(table: &PhraseTable, mut sink: impl Write) -> Result<()> {
    for (pair, entry) in table.iter() {
        write!(
            sink,
            "{} ||| {} ||| {} {} {} {} {}",
            pair.source,
            pair.target,
            format_feature(entry.p_src_given_tgt),
            format_feature(entry.lex_src_given_tgt),
            format_feature(entry.p_tgt_given_src),
            format_feature(entry.lex_tgt_given_src),
            format_feature(entry.penalty),
        )?;
        for extra in &entry.extra {
            write!(sink, " {extra}")?;
        }
        writeln!(sink)?;
    }
    Ok(())
}

/// `write_moses` into a string.
pub fn moses_to_string(table: &PhraseTable) -> String {
    let mut buf = Vec::new();
    write_moses(table, &mut buf).expect("writing to a Vec cannot fail");
    String::from_utf8(buf).expect("table text is UTF-8")
}

/// Parses a Moses-format table. Lines must have at least the two phrase
/// fields and five numeric features; anything after the fifth feature is
/// preserved verbatim. Duplicate phrase pairs are rejected.
pub fn parse_moses(reader: impl BufRead) -> Result<PhraseTable> {
    let mut table = PhraseTable::new();
    for (i, line) in reader.lines().enumerate() {
        let line = line?;
        let line_no = i + 1;
        if line.trim().is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(" ||| ").collect();
        if fields.len() < 3 {
            return Err(Error::TableFormat {
                line: line_no,
                reason: format!(
                    "expected `source ||| target ||| features`, found {} field(s)",
                    fields.len()
                ),
            });
        }
        let source = Phrase::parse(fields[0]).map_err(|_| Error::TableFormat {
            line: line_no,
            reason: "empty source phrase".to_string(),
        })?;
        let target = Phrase::parse(fields[1]).map_err(|_| Error::TableFormat {
            line: line_no,
            reason: "empty target phrase".to_string(),
        })?;
        let raw: Vec<&str> = fields[2].split_whitespace().collect();
        if raw.len() < 5 {
            return Err(Error::TableFormat {
                line: line_no,
                reason: format!("expected at least 5 features, found {}", raw.len()),
            });
        }
        let mut features = [0.0f64; 5];
        for (slot, text) in features.iter_mut().zip(&raw) {
            *slot = text.parse().map_err(|_| Error::TableFormat {
                line: line_no,
                reason: format!("feature {text:?} is not a number"),
            })?;
        }
        let entry = PhraseTableEntry {
            p_src_given_tgt: features[0],
            lex_src_given_tgt: features[1],
            p_tgt_given_src: features[2],
            lex_tgt_given_src: features[3],
            penalty: features[4],
            extra: raw[5..].iter().map(|s| s.to_string()).collect(),
        };
        let pair = PhrasePair::new(source, target);
        if table.insert(pair.clone(), entry).is_some() {
            return Err(Error::DuplicatePair {
                line: line_no,
                pair: pair.to_string(),
            });
        }
    }
    Ok(table)
}

/// Formats a feature with six significant digits, trailing zeros kept
/// (printf's `%#.6g` without exponent notation for the magnitudes that
/// occur here), so `1.0` prints as `1.00000` and e as `2.71828`.
pub fn format_feature(value: f64) -> String {
    if value == 0.0 {
        return "0.00000".to_string();
    }
    if !value.is_finite() {
        return value.to_string();
    }
    let sci = format!("{value:.5e}");
    let (mantissa, exponent) = sci.split_once('e').expect("{:e} always has an exponent");
    let exponent: i32 = exponent.parse().expect("exponent is an integer");
    let negative = mantissa.starts_with('-');
    let digits: String = mantissa.chars().filter(char::is_ascii_digit).collect();
    debug_assert_eq!(digits.len(), 6);
    let mut out = String::new();
    if negative {
        out.push('-');
    }
    if exponent < 0 {
        out.push_str("0.");
        for _ in 0..(-exponent - 1) {
            out.push('0');
        }
        out.push_str(&digits);
    } else if exponent < 6 {
        let point = exponent as usize + 1;
        out.push_str(&digits[..point]);
        if point < digits.len() {
            out.push('.');
            out.push_str(&digits[point..]);
        }
    } else {
        out.push_str(&digits);
        for _ in 0..(exponent as usize - 5) {
            out.push('0');
        }
    }
    out
}
