//! sampalign: a sampling-based sub-sentential aligner and phrase translation
//! table toolkit.
//!
//! The aligner draws many random subcorpora from a sentence-aligned parallel
//! corpus, sizes chosen so small subcorpora dominate, and aligns the words
//! that share an identical occurrence distribution within each draw. Counts
//! accumulate for as long as the run is allowed to continue and are then
//! turned into a five-feature phrase translation table in the Moses text
//! format.
//!
//! On top of the base aligner sit the n-gram grid pipeline, which rewrites
//! n-grams as single underscore-joined tokens so they align like ordinary
//! words, a time/iteration scheduler spreading a total budget over the grid,
//! and table utilities: union merge, backoff filtering, and distribution,
//! coverage, and overlap reports.

pub mod aligner;
pub mod corpus;
pub mod error;
pub mod sampler;
pub mod scheduler;
pub mod table;
pub mod table_ops;

pub use aligner::{
    compute_signatures, extract_alignments, run_anytime, run_anytime_parallel, AlignmentCounts,
    Budget, CancelFlag, PhraseLengthFilter, Signature,
};
pub use corpus::{
    de_unigramize, join_tokens, load_monolingual, tokenize, unigramize, unigramize_tokens,
    Corpus, ParallelText, Phrase, PhrasePair, SentencePair, Token, UnigramizedCorpus,
};
pub use error::{Error, Result, Side};
pub use sampler::{derive_seed, draw_subcorpus, RandomSource, SizeDistribution, Subcorpus};
pub use scheduler::{
    align_grid, allot_iterations, allot_time, format_grid, grid_counts, time_weights, GridBudget,
    ScheduleMode, TimeSchedule,
};
pub use table::{
    build_lexicon, estimate_features, format_feature, moses_to_string, parse_moses,
    table_from_counts, write_moses, Lexicon, PhraseTable, PhraseTableEntry, PHRASE_PENALTY,
};
pub use table_ops::{
    backoff_filter, coverage_report, distribution_matrix, merge_union, overlap_report,
    CoverageReport, CoverageRow, DistributionMatrix, OverlapReport, Prefer,
};
