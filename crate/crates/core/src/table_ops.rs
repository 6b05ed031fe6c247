//! Phrase-table set algebra and analytics: union merge with parameter
//! preference, backoff length filtering, length-distribution matrices,
//! test-set coverage, and cross-table overlap.

use std::collections::{BTreeMap, HashSet};
use std::fmt::Write as _;

use crate::corpus::{Phrase, Token};
use crate::table::PhraseTable;

/// Whose features win on phrase pairs present in both tables.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Prefer {
    A,
    B,
}

/// Union of two tables. Entries found in both keep the preferred table's
/// features verbatim; nothing is renormalized.
pub fn merge_union(a: &PhraseTable, b: &PhraseTable, prefer: Prefer) -> PhraseTable {
    let (base, overriding) = match prefer {
        Prefer::A => (b, a),
        Prefer::B => (a, b),
    };
    let mut merged: PhraseTable = base
        .iter()
        .map(|(p, e)| (p.clone(), e.clone()))
        .collect();
    for (pair, entry) in overriding.iter() {
        merged.insert(pair.clone(), entry.clone());
    }
    merged
}

/// Keeps only entries whose source phrase has at most `max_n` words.
/// Features are untouched; applying the same limit twice changes nothing.
pub fn backoff_filter(table: &PhraseTable, max_n: usize) -> PhraseTable {
    assert!(max_n >= 1, "backoff limit must be >= 1");
    table
        .iter()
        .filter(|(pair, _)| pair.source.word_count() <= max_n)
        .map(|(p, e)| (p.clone(), e.clone()))
        .collect()
}

/// How many entries fall into each (source length, target length) cell.
/// The full histogram is kept; `max_display` only bounds the rendered grid,
/// with longer entries folded into the totals.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DistributionMatrix {
    max_display: usize,
    cells: BTreeMap<(usize, usize), u64>,
    grand_total: u64,
}

impl DistributionMatrix {
    pub fn cell(&self, source_len: usize, target_len: usize) -> u64 {
        self.cells.get(&(source_len, target_len)).copied().unwrap_or(0)
    }

    /// All populated cells, in (source length, target length) order.
    pub fn cells(&self) -> impl Iterator<Item = ((usize, usize), u64)> + '_ {
        self.cells.iter().map(|(&k, &v)| (k, v))
    }

    pub fn row_total(&self, source_len: usize) -> u64 {
        self.cells
            .range((source_len, 0)..(source_len + 1, 0))
            .map(|(_, &v)| v)
            .sum()
    }

    pub fn column_total(&self, target_len: usize) -> u64 {
        self.cells
            .iter()
            .filter(|((_, t), _)| *t == target_len)
            .map(|(_, &v)| v)
            .sum()
    }

    pub fn grand_total(&self) -> u64 {
        self.grand_total
    }

    /// Longest lengths seen, as (source, target).
    pub fn max_lengths(&self) -> (usize, usize) {
        self.cells.keys().fold((0, 0), |(ms, mt), &(s, t)| {
            (ms.max(s), mt.max(t))
        })
    }

    pub fn max_display(&self) -> usize {
        self.max_display
    }

    /// Aligned plain-text grid in the style of a source-by-target table,
    /// with a trailing overflow column/row when entries exceed the display
    /// bound. Totals always cover every entry.
    pub fn render_text(&self) -> String {
        let (max_s, max_t) = self.max_lengths();
        let overflow = max_s > self.max_display || max_t > self.max_display;
        let shown = self.max_display.min(max_s.max(max_t).max(1));
        let mut columns: Vec<String> = vec!["source".to_string()];
        columns.extend((1..=shown).map(|t| t.to_string()));
        if overflow {
            columns.push("...".to_string());
        }
        columns.push("total".to_string());
        let mut rows: Vec<Vec<String>> = Vec::new();
        for s in 1..=shown {
            let mut row = vec![s.to_string()];
            for t in 1..=shown {
                row.push(self.cell(s, t).to_string());
            }
            if overflow {
                let rest: u64 = self.row_total(s)
                    - (1..=shown).map(|t| self.cell(s, t)).sum::<u64>();
                row.push(rest.to_string());
            }
            row.push(self.row_total(s).to_string());
            rows.push(row);
        }
        if overflow {
            let mut row = vec!["...".to_string()];
            for t in 1..=shown {
                let rest: u64 = self.column_total(t)
                    - (1..=shown).map(|s| self.cell(s, t)).sum::<u64>();
                row.push(rest.to_string());
            }
            let shown_mass: u64 = (1..=shown)
                .flat_map(|s| (1..=shown).map(move |t| (s, t)))
                .map(|(s, t)| self.cell(s, t))
                .sum();
            let row_mass: u64 = (1..=shown).map(|s| self.row_total(s)).sum();
            let col_mass: u64 = (1..=shown).map(|t| self.column_total(t)).sum();
            let corner = self.grand_total + shown_mass - row_mass - col_mass;
            row.push(corner.to_string());
            let overflow_rows: u64 = self.grand_total - row_mass;
            row.push(overflow_rows.to_string());
            rows.push(row);
        }
        let mut total_row = vec!["total".to_string()];
        for t in 1..=shown {
            total_row.push(self.column_total(t).to_string());
        }
        if overflow {
            let col_mass: u64 = (1..=shown).map(|t| self.column_total(t)).sum();
            total_row.push((self.grand_total - col_mass).to_string());
        }
        total_row.push(self.grand_total.to_string());
        rows.push(total_row);
        render_aligned(&columns, &rows)
    }

    /// Tab-separated form: one populated cell per line plus a total line.
    pub fn render_tsv(&self) -> String {
        let mut out = String::from("source_len\ttarget_len\tcount\n");
        for ((s, t), count) in self.cells() {
            let _ = writeln!(out, "{s}\t{t}\t{count}");
        }
        let _ = writeln!(out, "total\t\t{}", self.grand_total);
        out
    }
}

/// Counts table entries by (source word count, target word count).
pub fn distribution_matrix(table: &PhraseTable, max_display: usize) -> DistributionMatrix {
    let mut cells: BTreeMap<(usize, usize), u64> = BTreeMap::new();
    for (pair, _) in table.iter() {
        *cells
            .entry((pair.source.word_count(), pair.target.word_count()))
            .or_insert(0) += 1;
    }
    DistributionMatrix {
        max_display: max_display.max(1),
        grand_total: table.len() as u64,
        cells,
    }
}

/// Per-order coverage of a test text by a table's source phrases.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CoverageReport {
    rows: Vec<CoverageRow>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CoverageRow {
    pub order: usize,
    /// Distinct n-grams of this order in the test text.
    pub unique: u64,
    /// How many of them occur as a source phrase of the table.
    pub found: u64,
    /// The remainder; found + missing = unique.
    pub missing: u64,
}

impl CoverageReport {
    pub fn rows(&self) -> &[CoverageRow] {
        &self.rows
    }

    pub fn render_text(&self) -> String {
        let columns = vec![
            "n-gram".to_string(),
            "unique".to_string(),
            "in table".to_string(),
            "not in table".to_string(),
        ];
        let rows = self
            .rows
            .iter()
            .map(|r| {
                vec![
                    format!("{}", r.order),
                    r.unique.to_string(),
                    r.found.to_string(),
                    r.missing.to_string(),
                ]
            })
            .collect::<Vec<_>>();
        render_aligned(&columns, &rows)
    }

    pub fn render_tsv(&self) -> String {
        let mut out = String::from("n\tunique\tfound\tmissing\n");
        for r in &self.rows {
            let _ = writeln!(out, "{}\t{}\t{}\t{}", r.order, r.unique, r.found, r.missing);
        }
        out
    }
}

/// For each order n up to `max_n`, how many distinct n-grams of the test
/// lines appear as source phrases of the table.
pub fn coverage_report(
    table: &PhraseTable,
    test_lines: &[Vec<Token>],
    max_n: usize,
) -> CoverageReport {
    assert!(max_n >= 1, "coverage order must be >= 1");
    let sources: HashSet<&str> = table.pairs().map(|p| p.source.as_str()).collect();
    let mut rows = Vec::with_capacity(max_n);
    for order in 1..=max_n {
        let mut unique: HashSet<String> = HashSet::new();
        for line in test_lines {
            if line.len() < order {
                continue;
            }
            for window in line.windows(order) {
                unique.insert(Phrase::from_tokens(window).as_str().to_string());
            }
        }
        let found = unique.iter().filter(|g| sources.contains(g.as_str())).count() as u64;
        rows.push(CoverageRow {
            order,
            unique: unique.len() as u64,
            found,
            missing: unique.len() as u64 - found,
        });
    }
    CoverageReport { rows }
}

/// Shared and exclusive phrase pairs of two tables, compared on exact
/// (source, target) identity with features ignored.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct OverlapReport {
    pub overlap: u64,
    pub only_a: u64,
    pub only_b: u64,
}

impl OverlapReport {
    pub fn total_a(&self) -> u64 {
        self.overlap + self.only_a
    }

    pub fn total_b(&self) -> u64 {
        self.overlap + self.only_b
    }

    pub fn render_text(&self) -> String {
        let columns = vec![
            "table".to_string(),
            "overlap".to_string(),
            "difference".to_string(),
            "total".to_string(),
        ];
        let rows = vec![
            vec![
                "A".to_string(),
                self.overlap.to_string(),
                self.only_a.to_string(),
                self.total_a().to_string(),
            ],
            vec![
                "B".to_string(),
                self.overlap.to_string(),
                self.only_b.to_string(),
                self.total_b().to_string(),
            ],
        ];
        render_aligned(&columns, &rows)
    }

    pub fn render_tsv(&self) -> String {
        format!(
            "table\toverlap\tdifference\ttotal\nA\t{}\t{}\t{}\nB\t{}\t{}\t{}\n",
            self.overlap,
            self.only_a,
            self.total_a(),
            self.overlap,
            self.only_b,
            self.total_b(),
        )
    }
}

pub fn overlap_report(a: &PhraseTable, b: &PhraseTable) -> OverlapReport {
    let overlap = a.pairs().filter(|pair| b.contains(pair)).count() as u64;
    OverlapReport {
        overlap,
        only_a: a.len() as u64 - overlap,
        only_b: b.len() as u64 - overlap,
    }
}

fn render_aligned(columns: &[String], rows: &[Vec<String>]) -> String {
    let mut widths: Vec<usize> = columns.iter().map(String::len).collect();
    for row in rows {
        for (i, cell) in row.iter().enumerate() {
            widths[i] = widths[i].max(cell.len());
        }
    }
    let mut out = String::new();
    let render_row = |row: &[String], out: &mut String| {
        let mut first = true;
        for (cell, &w) in row.iter().zip(&widths) {
            if !first {
                out.push_str("  ");
            }
            let _ = write!(out, "{cell:>w$}");
            first = false;
        }
        out.push('\n');
    };
    render_row(columns, &mut out);
    for row in rows {
        render_row(row, &mut out);
    }
    out
}
