//! The n-gram grid driver: run the aligner once per (n, m) unigramized
//! corpus, with the total budget spread over the grid either evenly or by a
//! standard-normal weight on |n - m|, then merge all de-unigramized counts
//! and estimate features once.

use std::sync::atomic::AtomicU64;

use crate::aligner::{
    run_anytime_parallel, AlignmentCounts, Budget, CancelFlag, PhraseLengthFilter,
};
use crate::corpus::{de_unigramize, unigramize, Corpus, ParallelText, Phrase, PhrasePair};
use crate::error::Result;
use crate::sampler::{derive_seed, SizeDistribution};
use crate::table::{table_from_counts, PhraseTable};

/// How the total budget is spread over the N x N grid cells.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ScheduleMode {
    /// Every cell gets the same share.
    Equal,
    /// Cell (n, m) weighted by exp(-(n-m)^2 / 2): most of the budget goes to
    /// the diagonal, where source and target orders match.
    StdNormal,
}

/// Normalized cell weights for an N x N grid; rows are source orders 1..=N.
pub fn time_weights(order: usize, mode: ScheduleMode) -> Vec<Vec<f64>> {
    assert!(order >= 1, "grid order must be >= 1");
    let raw: Vec<Vec<f64>> = (1..=order)
        .map(|n| {
            (1..=order)
                .map(|m| match mode {
                    ScheduleMode::Equal => 1.0,
                    ScheduleMode::StdNormal => {
                        let d = n as f64 - m as f64;
                        (-0.5 * d * d).exp()
                    }
                })
                .collect()
        })
        .collect();
    let total: f64 = raw.iter().flatten().sum();
    raw.iter()
        .map(|row| row.iter().map(|w| w / total).collect())
        .collect()
}

/// Integer seconds allotted to each grid cell.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TimeSchedule {
    order: usize,
    mode: ScheduleMode,
    total_seconds: u64,
    seconds: Vec<Vec<u64>>,
}

impl TimeSchedule {
    pub fn order(&self) -> usize {
        self.order
    }

    pub fn mode(&self) -> ScheduleMode {
        self.mode
    }

    pub fn total_seconds(&self) -> u64 {
        self.total_seconds
    }

    pub fn cells(&self) -> &[Vec<u64>] {
        &self.seconds
    }

    pub fn cell(&self, n: usize, m: usize) -> u64 {
        self.seconds[n - 1][m - 1]
    }

    /// Sum actually allotted; differs from the requested total by at most
    /// half a second per cell.
    pub fn allotted_total(&self) -> u64 {
        self.seconds.iter().flatten().sum()
    }
}

/// Splits `total_seconds` over the grid, rounding each cell's share half-up
/// to whole seconds (so the grid total may drift from the request by up to
/// N^2/2 seconds).
pub fn allot_time(order: usize, total_seconds: u64, mode: ScheduleMode) -> TimeSchedule {
    assert!(total_seconds >= 1, "total budget must be positive");
    let seconds = time_weights(order, mode)
        .iter()
        .map(|row| {
            row.iter()
                .map(|w| (total_seconds as f64 * w).round() as u64)
                .collect()
        })
        .collect();
    TimeSchedule {
        order,
        mode,
        total_seconds,
        seconds,
    }
}

/// Splits an iteration budget over the grid with largest-remainder rounding,
/// so the cells sum to the requested total exactly.
pub fn allot_iterations(order: usize, total_iterations: u64, mode: ScheduleMode) -> Vec<Vec<u64>> {
    let weights = time_weights(order, mode);
    let mut cells: Vec<Vec<u64>> = vec![vec![0; order]; order];
    let mut remainders: Vec<(f64, usize, usize)> = Vec::with_capacity(order * order);
    let mut allotted = 0u64;
    for (i, row) in weights.iter().enumerate() {
        for (j, w) in row.iter().enumerate() {
            let quota = total_iterations as f64 * w;
            let base = quota.floor() as u64;
            cells[i][j] = base;
            allotted += base;
            remainders.push((quota - base as f64, i, j));
        }
    }
    // Hand the leftover iterations to the largest fractional parts; ties go
    // to the earlier cell in row-major order for determinism.
    remainders.sort_by(|a, b| {
        b.0.partial_cmp(&a.0)
            .unwrap()
            .then_with(|| (a.1, a.2).cmp(&(b.1, b.2)))
    });
    let mut leftover = total_iterations - allotted;
    for &(_, i, j) in &remainders {
        if leftover == 0 {
            break;
        }
        cells[i][j] += 1;
        leftover -= 1;
    }
    cells
}

/// Renders a budget grid as aligned integer columns with order labels.
pub fn format_grid(cells: &[Vec<u64>]) -> String {
    let order = cells.len();
    let width = cells
        .iter()
        .flatten()
        .map(|c| c.to_string().len())
        .chain(std::iter::once(order.to_string().len()))
        .max()
        .unwrap_or(1)
        .max(2);
    let mut out = String::new();
    out.push_str(&" ".repeat(width));
    for m in 1..=order {
        out.push_str(&format!(" {m:>width$}"));
    }
    out.push('\n');
    for (i, row) in cells.iter().enumerate() {
        out.push_str(&format!("{:>width$}", i + 1));
        for cell in row {
            out.push_str(&format!(" {cell:>width$}"));
        }
        out.push('\n');
    }
    out
}

/// Total budget for a grid run.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GridBudget {
    TotalIterations(u64),
    TotalSeconds(u64),
}

/// Runs the aligner over every (n, m) cell of the grid and returns the
/// merged, de-unigramized counts.
///
/// Each cell aligns the unigramized n-m corpus under a single-token filter,
/// then splits every joined token back into words. Cell generators derive
/// from (seed, n, m), so results do not depend on the order cells run in;
/// a 1x1 grid uses the seed directly and is exactly a plain run under a
/// (1,1) length filter.
#[allow(clippy::too_many_arguments)]
pub fn grid_counts(
    corpus: &Corpus,
    order: usize,
    budget: GridBudget,
    mode: ScheduleMode,
    master_seed: u64,
    workers: usize,
    cancel: Option<&CancelFlag>,
    progress: Option<&AtomicU64>,
) -> Result<AlignmentCounts> {
    assert!(order >= 1, "grid order must be >= 1");
    let cell_budgets: Vec<Vec<Budget>> = match budget {
        GridBudget::TotalIterations(total) => allot_iterations(order, total, mode)
            .into_iter()
            .map(|row| row.into_iter().map(Budget::Iterations).collect())
            .collect(),
        GridBudget::TotalSeconds(total) => allot_time(order, total, mode)
            .cells()
            .iter()
            .map(|row| {
                row.iter()
                    .map(|&s| Budget::Duration(std::time::Duration::from_secs(s)))
                    .collect()
            })
            .collect(),
    };
    let filter = PhraseLengthFilter::unigram();
    let mut merged = AlignmentCounts::new();
    for n in 1..=order {
        for m in 1..=order {
            if cancel.is_some_and(CancelFlag::is_cancelled) {
                return Ok(merged);
            }
            let text = unigramize(corpus, n, m);
            let dist = SizeDistribution::new(text.line_count());
            let cell_seed = if order == 1 {
                master_seed
            } else {
                derive_seed(master_seed, &[n as u64, m as u64])
            };
            let cell_counts = run_anytime_parallel(
                &text,
                &dist,
                cell_budgets[n - 1][m - 1],
                cell_seed,
                workers,
                &filter,
                cancel,
                progress,
            );
            merge_deunigramized(&mut merged, cell_counts)?;
        }
    }
    Ok(merged)
}

/// Splits each single-token alignment of a grid cell back into its word
/// sequences and adds it to the accumulator.
fn merge_deunigramized(into: &mut AlignmentCounts, cell: AlignmentCounts) -> Result<()> {
    for (pair, count) in cell.iter() {
        let source_token = crate::corpus::tokenize(pair.source.as_str());
        let target_token = crate::corpus::tokenize(pair.target.as_str());
        debug_assert_eq!(source_token.len(), 1, "unigram filter emits single tokens");
        debug_assert_eq!(target_token.len(), 1);
        let source_words = de_unigramize(&source_token[0])?;
        let target_words = de_unigramize(&target_token[0])?;
        into.increment(
            PhrasePair::new(
                Phrase::from_tokens(&source_words),
                Phrase::from_tokens(&target_words),
            ),
            count,
        );
    }
    Ok(())
}

/// Full grid pipeline: merged counts, then one feature estimation pass over
/// the complete set of alignments.
#[allow(clippy::too_many_arguments)]
pub fn align_grid(
    corpus: &Corpus,
    order: usize,
    budget: GridBudget,
    mode: ScheduleMode,
    master_seed: u64,
    workers: usize,
    cancel: Option<&CancelFlag>,
    progress: Option<&AtomicU64>,
) -> Result<PhraseTable> {
    let counts = grid_counts(corpus, order, budget, mode, master_seed, workers, cancel, progress)?;
    Ok(table_from_counts(&counts))
}
