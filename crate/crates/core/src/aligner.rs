//! The sampling aligner: words sharing an identical occurrence distribution
//! within a subcorpus are grouped, groups spanning both languages emit phrase
//! pairs, and counts accumulate across subcorpora for as long as the budget
//! (or the user) allows.

use std::collections::HashMap;
use std::sync::atomic::{AtomicBool, AtomicU64, Ordering};
use std::sync::Arc;
use std::time::{Duration, Instant};

use crate::corpus::{ParallelText, Phrase, PhrasePair, Token};
use crate::sampler::{derive_seed, draw_subcorpus, RandomSource, SizeDistribution, Subcorpus};

/// A word's occurrence profile within one subcorpus: for every subcorpus
/// line the word appears in (by position within the draw), how many times it
/// occurs there. Words are grouped for alignment exactly when their profiles
/// are identical, multiplicities included.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Signature(Vec<(u32, u32)>);

impl Signature {
    /// (subcorpus line position, occurrence count) pairs, positions strictly
    /// increasing.
    pub fn occurrences(&self) -> &[(u32, u32)] {
        &self.0
    }
}

/// Per-side word-to-signature maps for one subcorpus.
pub struct SubcorpusSignatures<'a> {
    pub source: HashMap<&'a str, Signature>,
    pub target: HashMap<&'a str, Signature>,
}

/// Words of both sides sharing one signature. Groups with an empty side
/// never emit and are dropped during extraction.
pub struct SignatureGroup<'a> {
    pub signature: Signature,
    pub source_words: Vec<&'a str>,
    pub target_words: Vec<&'a str>,
}

/// Upper bounds on emitted phrase lengths, in tokens of the corpus being
/// aligned. `unigram()` keeps only single-token pairs, which is how the
/// n-gram grid runs the aligner over unigramized corpora.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PhraseLengthFilter {
    max_source_tokens: Option<usize>,
    max_target_tokens: Option<usize>,
}

impl PhraseLengthFilter {
    pub fn new(max_source_tokens: Option<usize>, max_target_tokens: Option<usize>) -> Self {
        assert!(max_source_tokens.is_none_or(|b| b >= 1));
        assert!(max_target_tokens.is_none_or(|b| b >= 1));
        PhraseLengthFilter {
            max_source_tokens,
            max_target_tokens,
        }
    }

    pub fn unbounded() -> Self {
        Self::new(None, None)
    }

    /// Single-token phrases only on both sides.
    pub fn unigram() -> Self {
        Self::new(Some(1), Some(1))
    }

    pub fn admits(&self, source_len: usize, target_len: usize) -> bool {
        self.max_source_tokens.is_none_or(|b| source_len <= b)
            && self.max_target_tokens.is_none_or(|b| target_len <= b)
    }
}

/// Accumulated (source phrase, target phrase) counts; the merge of two
/// accumulators is plain count addition, so order never matters.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct AlignmentCounts {
    counts: HashMap<PhrasePair, u64>,
}

impl AlignmentCounts {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn increment(&mut self, pair: PhrasePair, by: u64) {
        if by > 0 {
            *self.counts.entry(pair).or_insert(0) += by;
        }
    }

    pub fn merge(&mut self, other: AlignmentCounts) {
        for (pair, c) in other.counts {
            *self.counts.entry(pair).or_insert(0) += c;
        }
    }

    pub fn get(&self, pair: &PhrasePair) -> u64 {
        self.counts.get(pair).copied().unwrap_or(0)
    }

    pub fn len(&self) -> usize {
        self.counts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.counts.is_empty()
    }

    /// Total number of emission events across all processed subcorpora.
    pub fn total(&self) -> u64 {
        self.counts.values().sum()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&PhrasePair, u64)> {
        self.counts.iter().map(|(p, &c)| (p, c))
    }

    /// Entries in (source, target) order; the deterministic view.
    pub fn iter_sorted(&self) -> Vec<(&PhrasePair, u64)> {
        let mut entries: Vec<_> = self.iter().collect();
        entries.sort_by(|a, b| a.0.cmp(b.0));
        entries
    }
}

impl FromIterator<(PhrasePair, u64)> for AlignmentCounts {
    fn from_iter<I: IntoIterator<Item = (PhrasePair, u64)>>(iter: I) -> Self {
        let mut counts = AlignmentCounts::new();
        for (pair, c) in iter {
            counts.increment(pair, c);
        }
        counts
    }
}

/// Cooperative cancellation flag; setting it ends an anytime run at the next
/// subcorpus boundary with everything collected so far.
#[derive(Debug, Clone, Default)]
pub struct CancelFlag(Arc<AtomicBool>);

impl CancelFlag {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn cancel(&self) {
        self.0.store(true, Ordering::Relaxed);
    }

    pub fn is_cancelled(&self) -> bool {
        self.0.load(Ordering::Relaxed)
    }
}

/// How long an anytime run keeps drawing subcorpora. Iteration budgets are
/// reproducible; wall-clock budgets are not and exist for production runs.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Budget {
    Iterations(u64),
    Duration(Duration),
}

/// Computes, for each distinct word on each side, its occurrence signature
/// over the subcorpus lines.
pub fn compute_signatures<'a, T: ParallelText>(
    text: &'a T,
    sub: &Subcorpus,
) -> SubcorpusSignatures<'a> {
    SubcorpusSignatures {
        source: side_signatures(text, sub, |p| &p.source),
        target: side_signatures(text, sub, |p| &p.target),
    }
}

fn side_signatures<'a, T: ParallelText>(
    text: &'a T,
    sub: &Subcorpus,
    side: impl Fn(&'a crate::corpus::SentencePair) -> &'a [Token],
) -> HashMap<&'a str, Signature> {
    let mut map: HashMap<&'a str, Signature> = HashMap::new();
    for (pos, &line) in sub.lines().iter().enumerate() {
        let pos = pos as u32;
        for token in side(text.pair(line)) {
            let sig = map.entry(token.as_str()).or_insert_with(|| Signature(Vec::new()));
            match sig.0.last_mut() {
                Some(last) if last.0 == pos => last.1 += 1,
                _ => sig.0.push((pos, 1)),
            }
        }
    }
    map
}

/// Groups both sides' words by identical signature.
pub fn group_by_signature<'a>(sigs: SubcorpusSignatures<'a>) -> Vec<SignatureGroup<'a>> {
    let mut groups: HashMap<Signature, (Vec<&'a str>, Vec<&'a str>)> = HashMap::new();
    for (word, sig) in sigs.source {
        groups.entry(sig).or_default().0.push(word);
    }
    for (word, sig) in sigs.target {
        groups.entry(sig).or_default().1.push(word);
    }
    groups
        .into_iter()
        .map(|(signature, (source_words, target_words))| SignatureGroup {
            signature,
            source_words,
            target_words,
        })
        .collect()
}

/// Aligns one subcorpus and returns the resulting count delta.
///
/// Every signature group populated on both sides is visited; on each line of
/// its signature, the positions covered by the group's words must form one
/// contiguous span per side, and the two spans are emitted as a phrase pair
/// when the length filter admits them. Discontiguous occurrences skip that
/// line only.
pub fn extract_alignments<T: ParallelText>(
    text: &T,
    sub: &Subcorpus,
    filter: &PhraseLengthFilter,
) -> AlignmentCounts {
    let mut counts = AlignmentCounts::new();
    extract_alignments_into(text, sub, filter, &mut counts);
    counts
}

fn extract_alignments_into<T: ParallelText>(
    text: &T,
    sub: &Subcorpus,
    filter: &PhraseLengthFilter,
    counts: &mut AlignmentCounts,
) {
    let groups = group_by_signature(compute_signatures(text, sub));
    for group in &groups {
        if group.source_words.is_empty() || group.target_words.is_empty() {
            continue;
        }
        let source_set: std::collections::HashSet<&str> =
            group.source_words.iter().copied().collect();
        let target_set: std::collections::HashSet<&str> =
            group.target_words.iter().copied().collect();
        for &(pos, _) in group.signature.occurrences() {
            let pair = text.pair(sub.lines()[pos as usize]);
            let Some(source_span) = contiguous_span(&pair.source, &source_set) else {
                continue;
            };
            let Some(target_span) = contiguous_span(&pair.target, &target_set) else {
                continue;
            };
            if !filter.admits(source_span.len(), target_span.len()) {
                continue;
            }
            counts.increment(
                PhrasePair::new(
                    Phrase::from_tokens(source_span),
                    Phrase::from_tokens(target_span),
                ),
                1,
            );
        }
    }
}

/// The sentence slice covered by `words`, provided their occurrences form
/// one contiguous span. Returns None when they are discontiguous (or absent).
fn contiguous_span<'a>(
    sentence: &'a [Token],
    words: &std::collections::HashSet<&str>,
) -> Option<&'a [Token]> {
    let mut first = None;
    let mut last = 0;
    let mut hits = 0;
    for (i, token) in sentence.iter().enumerate() {
        if words.contains(token.as_str()) {
            if first.is_none() {
                first = Some(i);
            }
            last = i;
            hits += 1;
        }
    }
    let first = first?;
    (last - first + 1 == hits).then(|| &sentence[first..=last])
}

/// Draws and aligns subcorpora until the budget runs out or `cancel` fires,
/// merging every delta into one accumulator. With an iteration budget the
/// result is a pure function of (corpus, seed, iterations, filter).
pub fn run_anytime<T: ParallelText>(
    text: &T,
    dist: &SizeDistribution,
    budget: Budget,
    rng: &mut RandomSource,
    filter: &PhraseLengthFilter,
) -> AlignmentCounts {
    run_anytime_observed(text, dist, budget, rng, filter, None, None)
}

/// `run_anytime` with optional cancellation and a shared subcorpus counter
/// for progress reporting.
pub fn run_anytime_observed<T: ParallelText>(
    text: &T,
    dist: &SizeDistribution,
    budget: Budget,
    rng: &mut RandomSource,
    filter: &PhraseLengthFilter,
    cancel: Option<&CancelFlag>,
    progress: Option<&AtomicU64>,
) -> AlignmentCounts {
    let mut counts = AlignmentCounts::new();
    let cancelled = || cancel.is_some_and(CancelFlag::is_cancelled);
    let step = |rng: &mut RandomSource, counts: &mut AlignmentCounts| {
        let sub = draw_subcorpus(text, dist, rng);
        extract_alignments_into(text, &sub, filter, counts);
        if let Some(p) = progress {
            p.fetch_add(1, Ordering::Relaxed);
        }
    };
    match budget {
        Budget::Iterations(n) => {
            for _ in 0..n {
                if cancelled() {
                    break;
                }
                step(rng, &mut counts);
            }
        }
        Budget::Duration(d) => {
            let deadline = Instant::now() + d;
            while Instant::now() < deadline && !cancelled() {
                step(rng, &mut counts);
            }
        }
    }
    counts
}

/// Multi-worker anytime run. Worker w draws from a generator seeded by
/// `derive_seed(master_seed, [w])`; iteration budgets are split so the
/// worker totals sum to the requested amount, making the merged result
/// deterministic for a fixed worker count. Wall-clock budgets share one
/// deadline and are not reproducible.
#[allow(clippy::too_many_arguments)]
pub fn run_anytime_parallel<T: ParallelText + Sync>(
    text: &T,
    dist: &SizeDistribution,
    budget: Budget,
    master_seed: u64,
    workers: usize,
    filter: &PhraseLengthFilter,
    cancel: Option<&CancelFlag>,
    progress: Option<&AtomicU64>,
) -> AlignmentCounts {
    let workers = workers.max(1);
    if workers == 1 {
        let mut rng = RandomSource::from_seed(derive_seed(master_seed, &[0]));
        return run_anytime_observed(text, dist, budget, &mut rng, filter, cancel, progress);
    }
    let worker_budget = |w: usize| match budget {
        Budget::Iterations(n) => {
            let base = n / workers as u64;
            let extra = u64::from((w as u64) < n % workers as u64);
            Budget::Iterations(base + extra)
        }
        Budget::Duration(d) => Budget::Duration(d),
    };
    std::thread::scope(|scope| {
        let handles: Vec<_> = (0..workers)
            .map(|w| {
                let budget = worker_budget(w);
                scope.spawn(move || {
                    let mut rng = RandomSource::from_seed(derive_seed(master_seed, &[w as u64]));
                    run_anytime_observed(text, dist, budget, &mut rng, filter, cancel, progress)
                })
            })
            .collect();
        let mut merged = AlignmentCounts::new();
        for handle in handles {
            merged.merge(handle.join().expect("aligner worker panicked"));
        }
        merged
    })
}
