//! Browser bindings for the interactive demo page: the subcorpus-size
//! distribution, the grid time schedule, the n-gram rewrite, and a small
//! in-browser alignment run.
//!
//! The `*_impl` functions carry the logic and are testable on any target;
//! the `wasm_bindgen` wrappers only translate errors into `JsValue`.

use wasm_bindgen::prelude::*;

use sampalign::{
    align_grid, allot_time, moses_to_string, tokenize, unigramize_tokens, Corpus, GridBudget,
    ScheduleMode, SizeDistribution, Token,
};

const MAX_ORDER: usize = 10;
const MAX_LINES: usize = 5_000;
const MAX_ITERATIONS: u64 = 2_000_000;

/// p(k) for k = 1..=min(n-1, max_points), normalized over the full support.
#[wasm_bindgen]
pub fn size_distribution_probs(corpus_lines: u32, max_points: u32) -> Result<Vec<f64>, JsValue> {
    size_distribution_probs_impl(corpus_lines, max_points).map_err(to_js)
}

/// Seconds per grid cell, row-major over source orders 1..=order.
#[wasm_bindgen]
pub fn schedule_seconds(order: u32, total_seconds: u32, normal: bool) -> Result<Vec<u32>, JsValue> {
    schedule_seconds_impl(order, total_seconds, normal).map_err(to_js)
}

/// Rewrites one line of text into its overlapping n-gram tokens.
#[wasm_bindgen]
pub fn rewrite_ngrams(line: &str, order: u32) -> Result<String, JsValue> {
    rewrite_ngrams_impl(line, order).map_err(to_js)
}

/// Runs the grid aligner on a pasted parallel corpus and returns the phrase
/// table in the Moses text format.
#[wasm_bindgen]
pub fn align_demo(
    source_text: &str,
    target_text: &str,
    order: u32,
    iterations: u32,
    seed: u32,
    normal: bool,
) -> Result<String, JsValue> {
    align_demo_impl(source_text, target_text, order, iterations, seed, normal).map_err(to_js)
}

fn to_js(message: String) -> JsValue {
    JsValue::from_str(&message)
}

fn size_distribution_probs_impl(corpus_lines: u32, max_points: u32) -> Result<Vec<f64>, String> {
    if corpus_lines < 1 {
        return Err("corpus must have at least one line".to_string());
    }
    let dist = SizeDistribution::new(corpus_lines as usize);
    let take = (max_points as usize).min(dist.max_size()).max(1);
    Ok(dist.probs()[..take].to_vec())
}

fn schedule_seconds_impl(order: u32, total_seconds: u32, normal: bool) -> Result<Vec<u32>, String> {
    let order = check_order(order)?;
    if total_seconds < 1 {
        return Err("total budget must be positive".to_string());
    }
    let schedule = allot_time(order, total_seconds as u64, mode_of(normal));
    Ok(schedule
        .cells()
        .iter()
        .flatten()
        .map(|&s| s as u32)
        .collect())
}

fn rewrite_ngrams_impl(line: &str, order: u32) -> Result<String, String> {
    let order = check_order(order)?;
    let tokens = tokenize(line);
    let joined = unigramize_tokens(&tokens, order);
    Ok(joined
        .iter()
        .map(Token::as_str)
        .collect::<Vec<_>>()
        .join(" "))
}

fn align_demo_impl(
    source_text: &str,
    target_text: &str,
    order: u32,
    iterations: u32,
    seed: u32,
    normal: bool,
) -> Result<String, String> {
    let order = check_order(order)?;
    let corpus = Corpus::from_texts(source_text, target_text).map_err(|e| e.to_string())?;
    if corpus.pairs().len() > MAX_LINES {
        return Err("corpus too large for the demo".to_string());
    }
    let iterations = (iterations as u64).min(MAX_ITERATIONS);
    let table = align_grid(
        &corpus,
        order,
        GridBudget::TotalIterations(iterations),
        mode_of(normal),
        seed as u64,
        1,
        None,
        None,
    )
    .map_err(|e| e.to_string())?;
    Ok(moses_to_string(&table))
}

fn mode_of(normal: bool) -> ScheduleMode {
    if normal {
        ScheduleMode::StdNormal
    } else {
        ScheduleMode::Equal
    }
}

fn check_order(order: u32) -> Result<usize, String> {
    let order = order as usize;
    if (1..=MAX_ORDER).contains(&order) {
        Ok(order)
    } else {
        Err(format!("order must be between 1 and {MAX_ORDER}"))
    }
}
