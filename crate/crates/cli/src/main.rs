//! Command-line front end for the sampalign toolkit.
//!
//! Exit codes: 0 success, 1 usage error, 2 input-format error, 3 I/O error.
//! Diagnostics go to stderr; table and report data go to the output path or
//! stdout.

use std::fs::File;
use std::io::{self, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::sync::atomic::{AtomicBool, AtomicU64, Ordering};
use std::time::Duration;

use clap::{Args, Parser, Subcommand, ValueEnum};

use sampalign::{
    align_grid, allot_iterations, allot_time, backoff_filter, coverage_report,
    distribution_matrix, format_grid, join_tokens, load_monolingual, merge_union, overlap_report,
    parse_moses, run_anytime_parallel, table_from_counts, unigramize, write_moses, Budget,
    CancelFlag, Corpus, GridBudget, ParallelText, PhraseLengthFilter, PhraseTable, Prefer,
    ScheduleMode, SizeDistribution,
};

const DEFAULT_SEED: u64 = 1;

#[derive(Parser)]
#[command(
    name = "sampalign",
    version,
    about = "Sampling-based sub-sentential aligner and phrase table toolkit"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Align a parallel corpus into a phrase translation table
    Align(AlignArgs),
    /// Run the aligner over the 1..N n-gram grid and merge the subtables
    #[command(name = "align1n")]
    Align1n(Align1nArgs),
    /// Rewrite source n-grams and target m-grams as single joined tokens
    Unigramize(UnigramizeArgs),
    /// Print the per-cell budget grid for an n-gram grid run
    Schedule(ScheduleArgs),
    /// Union-merge two phrase tables, preferring one side's parameters
    Merge(MergeArgs),
    /// Keep only entries whose source phrase is at most N words long
    Backoff(BackoffArgs),
    /// Phrase-pair length distribution of a table
    #[command(name = "stats-dist")]
    StatsDist(StatsDistArgs),
    /// n-gram coverage of a test text by a table's source phrases
    #[command(name = "stats-coverage")]
    StatsCoverage(StatsCoverageArgs),
    /// Overlap between the phrase pairs of two tables
    #[command(name = "stats-overlap")]
    StatsOverlap(StatsOverlapArgs),
}

#[derive(Args)]
struct CorpusInput {
    /// Source text, one sentence per line (or tab-separated parallel lines
    /// when TARGET is omitted)
    source: PathBuf,
    /// Target text, one sentence per line
    target: Option<PathBuf>,
}

#[derive(Args)]
#[group(id = "budget", required = true, multiple = false)]
struct BudgetArgs {
    /// Number of subcorpora to process; runs with the same seed,
    /// iteration count, and thread count are bit-reproducible
    #[arg(long, group = "budget")]
    iterations: Option<u64>,
    /// Wall-clock budget such as 90s, 30m, or 7h (a bare number means
    /// seconds); not reproducible
    #[arg(long, group = "budget")]
    time: Option<String>,
}

#[derive(Args)]
struct SeedArgs {
    /// Master seed for the random generator
    #[arg(long, default_value_t = DEFAULT_SEED)]
    seed: u64,
    /// Seed from OS entropy instead (forfeits reproducibility)
    #[arg(long, conflicts_with = "seed")]
    random_seed: bool,
    /// Worker threads; 1 keeps runs reproducible and is how timing
    /// comparisons should be made
    #[arg(long, default_value_t = 1)]
    threads: usize,
}

#[derive(Args)]
struct AlignArgs {
    #[command(flatten)]
    corpus: CorpusInput,
    #[command(flatten)]
    budget: BudgetArgs,
    #[command(flatten)]
    seed: SeedArgs,
    /// Longest source phrase to emit, in tokens
    #[arg(long)]
    max_source: Option<usize>,
    /// Longest target phrase to emit, in tokens
    #[arg(long)]
    max_target: Option<usize>,
    /// Output path for the phrase table (stdout when omitted)
    #[arg(short, long)]
    output: Option<PathBuf>,
}

#[derive(Args)]
struct Align1nArgs {
    #[command(flatten)]
    corpus: CorpusInput,
    /// Largest n-gram order: the grid runs every (n, m) cell with
    /// 1 <= n, m <= N
    #[arg(long = "n", value_name = "N")]
    order: usize,
    #[command(flatten)]
    budget: BudgetArgs,
    /// How the total budget is spread over the grid cells
    #[arg(long, value_enum, default_value_t = ModeArg::Normal)]
    mode: ModeArg,
    #[command(flatten)]
    seed: SeedArgs,
    /// Output path for the phrase table (stdout when omitted)
    #[arg(short, long)]
    output: Option<PathBuf>,
}

#[derive(Args)]
struct UnigramizeArgs {
    #[command(flatten)]
    corpus: CorpusInput,
    /// Source n-gram order
    #[arg(long = "n", value_name = "N")]
    source_order: usize,
    /// Target m-gram order (defaults to N)
    #[arg(long = "m", value_name = "M")]
    target_order: Option<usize>,
    /// Output path for tab-separated parallel lines (stdout when omitted)
    #[arg(short, long)]
    output: Option<PathBuf>,
}

#[derive(Args)]
#[command(group(
    clap::ArgGroup::new("schedule_budget")
        .required(true)
        .multiple(false)
        .args(["seconds", "iterations"])
))]
struct ScheduleArgs {
    /// Grid order N
    #[arg(long = "n", value_name = "N")]
    order: usize,
    /// Total time to spread over the grid (suffix h, m, or s)
    #[arg(long)]
    seconds: Option<String>,
    /// Total iterations to spread over the grid
    #[arg(long)]
    iterations: Option<u64>,
    /// How the budget is spread over the cells
    #[arg(long, value_enum, default_value_t = ModeArg::Normal)]
    mode: ModeArg,
    /// Output path (stdout when omitted)
    #[arg(short, long)]
    output: Option<PathBuf>,
}

#[derive(Args)]
struct MergeArgs {
    /// First phrase table (A)
    table_a: PathBuf,
    /// Second phrase table (B)
    table_b: PathBuf,
    /// Whose features win on shared phrase pairs
    #[arg(long, value_enum)]
    prefer: PreferArg,
    /// Output path for the merged table (stdout when omitted)
    #[arg(short, long)]
    output: Option<PathBuf>,
}

#[derive(Args)]
struct BackoffArgs {
    /// Phrase table to filter
    table: PathBuf,
    /// Longest source phrase to keep, in words
    #[arg(long)]
    max_n: usize,
    /// Output path for the filtered table (stdout when omitted)
    #[arg(short, long)]
    output: Option<PathBuf>,
}

#[derive(Args)]
struct StatsDistArgs {
    /// Phrase table to analyze
    table: PathBuf,
    /// Largest length shown as its own row/column; longer entries fold
    /// into the totals
    #[arg(long, default_value_t = 7)]
    max_display: usize,
    #[arg(long, value_enum, default_value_t = FormatArg::Text)]
    format: FormatArg,
    /// Output path (stdout when omitted)
    #[arg(short, long)]
    output: Option<PathBuf>,
}

#[derive(Args)]
struct StatsCoverageArgs {
    /// Phrase table to check against
    table: PathBuf,
    /// Test text, one sentence per line
    test: PathBuf,
    /// Largest n-gram order to report
    #[arg(long, default_value_t = 7)]
    max_n: usize,
    #[arg(long, value_enum, default_value_t = FormatArg::Text)]
    format: FormatArg,
    /// Output path (stdout when omitted)
    #[arg(short, long)]
    output: Option<PathBuf>,
}

#[derive(Args)]
struct StatsOverlapArgs {
    /// First phrase table (A)
    table_a: PathBuf,
    /// Second phrase table (B)
    table_b: PathBuf,
    #[arg(long, value_enum, default_value_t = FormatArg::Text)]
    format: FormatArg,
    /// Output path (stdout when omitted)
    #[arg(short, long)]
    output: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum ModeArg {
    Equal,
    Normal,
}

impl From<ModeArg> for ScheduleMode {
    fn from(mode: ModeArg) -> Self {
        match mode {
            ModeArg::Equal => ScheduleMode::Equal,
            ModeArg::Normal => ScheduleMode::StdNormal,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum PreferArg {
    A,
    B,
}

#[derive(Clone, Copy, ValueEnum)]
enum FormatArg {
    Text,
    Tsv,
}

enum CliError {
    Usage(String),
    Input(String),
    Io(String),
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Usage(_) => 1,
            CliError::Input(_) => 2,
            CliError::Io(_) => 3,
        }
    }

    fn message(&self) -> &str {
        match self {
            CliError::Usage(m) | CliError::Input(m) | CliError::Io(m) => m,
        }
    }
}

impl From<sampalign::Error> for CliError {
    fn from(err: sampalign::Error) -> Self {
        match err {
            sampalign::Error::Io(e) => CliError::Io(e.to_string()),
            other => CliError::Input(other.to_string()),
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(err) => {
            use clap::error::ErrorKind;
            if matches!(err.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                print!("{err}");
                return ExitCode::SUCCESS;
            }
            eprint!("{err}");
            return ExitCode::from(1);
        }
    };
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("sampalign: {}", err.message());
            ExitCode::from(err.exit_code())
        }
    }
}

fn run(command: Command) -> Result<(), CliError> {
    match command {
        Command::Align(args) => cmd_align(args),
        Command::Align1n(args) => cmd_align1n(args),
        Command::Unigramize(args) => cmd_unigramize(args),
        Command::Schedule(args) => cmd_schedule(args),
        Command::Merge(args) => cmd_merge(args),
        Command::Backoff(args) => cmd_backoff(args),
        Command::StatsDist(args) => cmd_stats_dist(args),
        Command::StatsCoverage(args) => cmd_stats_coverage(args),
        Command::StatsOverlap(args) => cmd_stats_overlap(args),
    }
}

fn cmd_align(args: AlignArgs) -> Result<(), CliError> {
    let corpus = load_corpus(&args.corpus)?;
    let dist = SizeDistribution::new(corpus.line_count());
    let budget = resolve_budget(&args.budget)?;
    let seed = resolve_seed(&args.seed);
    let filter = PhraseLengthFilter::new(args.max_source, args.max_target);
    let cancel = install_interrupt_handler();
    let counts = with_progress(|progress| {
        run_anytime_parallel(
            &corpus,
            &dist,
            budget,
            seed,
            args.seed.threads,
            &filter,
            Some(&cancel),
            Some(progress),
        )
    });
    if cancel.is_cancelled() {
        eprintln!("sampalign: interrupted; writing alignments collected so far");
    }
    let table = table_from_counts(&counts);
    write_table(args.output.as_deref(), &table)?;
    eprintln!(
        "aligned {} line(s): {} phrase pair(s), {} emission(s)",
        corpus.line_count(),
        table.len(),
        counts.total()
    );
    Ok(())
}

fn cmd_align1n(args: Align1nArgs) -> Result<(), CliError> {
    if args.order < 1 {
        return Err(CliError::Usage("--n must be at least 1".to_string()));
    }
    let corpus = load_corpus(&args.corpus)?;
    let budget = resolve_grid_budget(&args.budget)?;
    let seed = resolve_seed(&args.seed);
    let cancel = install_interrupt_handler();
    let table = with_progress(|progress| {
        align_grid(
            &corpus,
            args.order,
            budget,
            args.mode.into(),
            seed,
            args.seed.threads,
            Some(&cancel),
            Some(progress),
        )
    })?;
    if cancel.is_cancelled() {
        eprintln!("sampalign: interrupted; writing alignments collected so far");
    }
    write_table(args.output.as_deref(), &table)?;
    eprintln!(
        "grid 1..{} over {} line(s): {} phrase pair(s)",
        args.order,
        corpus.line_count(),
        table.len()
    );
    Ok(())
}

fn cmd_unigramize(args: UnigramizeArgs) -> Result<(), CliError> {
    if args.source_order < 1 {
        return Err(CliError::Usage("--n must be at least 1".to_string()));
    }
    let target_order = args.target_order.unwrap_or(args.source_order);
    if target_order < 1 {
        return Err(CliError::Usage("--m must be at least 1".to_string()));
    }
    let corpus = load_corpus(&args.corpus)?;
    let rewritten = unigramize(&corpus, args.source_order, target_order);
    write_output(args.output.as_deref(), |out| {
        for pair in rewritten.pairs() {
            writeln!(out, "{}\t{}", join_tokens(&pair.source), join_tokens(&pair.target))?;
        }
        Ok(())
    })
}

fn cmd_schedule(args: ScheduleArgs) -> Result<(), CliError> {
    if args.order < 1 {
        return Err(CliError::Usage("--n must be at least 1".to_string()));
    }
    let cells = if let Some(spec) = &args.seconds {
        let total = parse_duration_seconds(spec)?;
        allot_time(args.order, total, args.mode.into())
            .cells()
            .to_vec()
    } else {
        let total = args.iterations.expect("clap enforces the budget group");
        allot_iterations(args.order, total, args.mode.into())
    };
    write_output(args.output.as_deref(), |out| {
        out.write_all(format_grid(&cells).as_bytes())
    })
}

fn cmd_merge(args: MergeArgs) -> Result<(), CliError> {
    let a = load_table(&args.table_a)?;
    let b = load_table(&args.table_b)?;
    let prefer = match args.prefer {
        PreferArg::A => Prefer::A,
        PreferArg::B => Prefer::B,
    };
    let merged = merge_union(&a, &b, prefer);
    write_table(args.output.as_deref(), &merged)?;
    eprintln!(
        "merged {} + {} entries into {}",
        a.len(),
        b.len(),
        merged.len()
    );
    Ok(())
}

fn cmd_backoff(args: BackoffArgs) -> Result<(), CliError> {
    if args.max_n < 1 {
        return Err(CliError::Usage("--max-n must be at least 1".to_string()));
    }
    let table = load_table(&args.table)?;
    let filtered = backoff_filter(&table, args.max_n);
    write_table(args.output.as_deref(), &filtered)?;
    eprintln!("kept {} of {} entries", filtered.len(), table.len());
    Ok(())
}

fn cmd_stats_dist(args: StatsDistArgs) -> Result<(), CliError> {
    if args.max_display < 1 {
        return Err(CliError::Usage(
            "--max-display must be at least 1".to_string(),
        ));
    }
    let table = load_table(&args.table)?;
    let matrix = distribution_matrix(&table, args.max_display);
    let rendered = match args.format {
        FormatArg::Text => matrix.render_text(),
        FormatArg::Tsv => matrix.render_tsv(),
    };
    write_output(args.output.as_deref(), |out| {
        out.write_all(rendered.as_bytes())
    })
}

fn cmd_stats_coverage(args: StatsCoverageArgs) -> Result<(), CliError> {
    if args.max_n < 1 {
        return Err(CliError::Usage("--max-n must be at least 1".to_string()));
    }
    let table = load_table(&args.table)?;
    let lines = load_monolingual(open_reader(&args.test)?).map_err(|err| match err {
        sampalign::Error::Io(e) => CliError::Io(format!("{}: {e}", args.test.display())),
        other => CliError::Input(format!("{}: {other}", args.test.display())),
    })?;
    let report = coverage_report(&table, &lines, args.max_n);
    let rendered = match args.format {
        FormatArg::Text => report.render_text(),
        FormatArg::Tsv => report.render_tsv(),
    };
    write_output(args.output.as_deref(), |out| {
        out.write_all(rendered.as_bytes())
    })
}

fn cmd_stats_overlap(args: StatsOverlapArgs) -> Result<(), CliError> {
    let a = load_table(&args.table_a)?;
    let b = load_table(&args.table_b)?;
    let report = overlap_report(&a, &b);
    let rendered = match args.format {
        FormatArg::Text => report.render_text(),
        FormatArg::Tsv => report.render_tsv(),
    };
    write_output(args.output.as_deref(), |out| {
        out.write_all(rendered.as_bytes())
    })
}

fn load_corpus(input: &CorpusInput) -> Result<Corpus, CliError> {
    let corpus = match &input.target {
        Some(target) => Corpus::from_readers(open_reader(&input.source)?, open_reader(target)?),
        None => Corpus::from_tab_reader(open_reader(&input.source)?),
    }?;
    Ok(corpus)
}

fn load_table(path: &Path) -> Result<PhraseTable, CliError> {
    parse_moses(open_reader(path)?).map_err(|err| match err {
        sampalign::Error::Io(e) => CliError::Io(format!("{}: {e}", path.display())),
        other => CliError::Input(format!("{}: {other}", path.display())),
    })
}

fn open_reader(path: &Path) -> Result<BufReader<File>, CliError> {
    File::open(path)
        .map(BufReader::new)
        .map_err(|e| CliError::Io(format!("{}: {e}", path.display())))
}

fn write_table(path: Option<&Path>, table: &PhraseTable) -> Result<(), CliError> {
    write_output(path, |out| write_moses_io(table, out))
}

fn write_moses_io(table: &PhraseTable, out: &mut dyn Write) -> io::Result<()> {
    match write_moses(table, out) {
        Ok(()) => Ok(()),
        Err(sampalign::Error::Io(e)) => Err(e),
        Err(other) => Err(io::Error::other(other.to_string())),
    }
}

fn write_output(
    path: Option<&Path>,
    write: impl FnOnce(&mut dyn Write) -> io::Result<()>,
) -> Result<(), CliError> {
    let describe = |e: io::Error| match path {
        Some(p) => CliError::Io(format!("{}: {e}", p.display())),
        None => CliError::Io(format!("stdout: {e}")),
    };
    match path {
        Some(p) => {
            let file = File::create(p).map_err(&describe)?;
            let mut out = BufWriter::new(file);
            write(&mut out).map_err(&describe)?;
            out.flush().map_err(&describe)
        }
        None => {
            let stdout = io::stdout();
            let mut out = stdout.lock();
            write(&mut out).map_err(&describe)?;
            out.flush().map_err(&describe)
        }
    }
}

fn resolve_budget(args: &BudgetArgs) -> Result<Budget, CliError> {
    if let Some(iterations) = args.iterations {
        return Ok(Budget::Iterations(iterations));
    }
    let spec = args.time.as_ref().expect("clap enforces the budget group");
    Ok(Budget::Duration(Duration::from_secs(
        parse_duration_seconds(spec)?,
    )))
}

fn resolve_grid_budget(args: &BudgetArgs) -> Result<GridBudget, CliError> {
    if let Some(iterations) = args.iterations {
        return Ok(GridBudget::TotalIterations(iterations));
    }
    let spec = args.time.as_ref().expect("clap enforces the budget group");
    Ok(GridBudget::TotalSeconds(parse_duration_seconds(spec)?))
}

/// Parses "90", "90s", "30m", or "7h" into whole seconds.
fn parse_duration_seconds(spec: &str) -> Result<u64, CliError> {
    let spec = spec.trim();
    let usage = || CliError::Usage(format!("invalid duration {spec:?} (use e.g. 90s, 30m, 7h)"));
    let (number, unit): (&str, u64) = match spec.chars().last() {
        Some('h') => (&spec[..spec.len() - 1], 3600),
        Some('m') => (&spec[..spec.len() - 1], 60),
        Some('s') => (&spec[..spec.len() - 1], 1),
        Some(c) if c.is_ascii_digit() => (spec, 1),
        _ => return Err(usage()),
    };
    let value: u64 = number.parse().map_err(|_| usage())?;
    let seconds = value.checked_mul(unit).ok_or_else(usage)?;
    if seconds == 0 {
        return Err(CliError::Usage(
            "time budget must be at least one second".to_string(),
        ));
    }
    Ok(seconds)
}

fn resolve_seed(args: &SeedArgs) -> u64 {
    if args.random_seed {
        let seed = sampalign::RandomSource::from_entropy().next_u64();
        eprintln!("seeding from entropy: --seed {seed}");
        seed
    } else {
        args.seed
    }
}

/// Ctrl-C asks the aligner to finalize with everything collected so far.
fn install_interrupt_handler() -> CancelFlag {
    let cancel = CancelFlag::new();
    let handler = cancel.clone();
    if let Err(err) = ctrlc::set_handler(move || handler.cancel()) {
        eprintln!("sampalign: interrupt handler unavailable: {err}");
    }
    cancel
}

/// Runs `work` while a side thread reports the subcorpus count to stderr
/// every couple of seconds.
fn with_progress<R>(work: impl FnOnce(&AtomicU64) -> R) -> R {
    let progress = AtomicU64::new(0);
    let done = AtomicBool::new(false);
    std::thread::scope(|scope| {
        scope.spawn(|| {
            let mut reported = 0;
            let mut ticks = 0u32;
            while !done.load(Ordering::Relaxed) {
                std::thread::sleep(Duration::from_millis(100));
                ticks += 1;
                if ticks.is_multiple_of(20) {
                    let now = progress.load(Ordering::Relaxed);
                    if now != reported {
                        eprintln!("{now} subcorpora processed");
                        reported = now;
                    }
                }
            }
        });
        let result = work(&progress);
        done.store(true, Ordering::Relaxed);
        result
    })
}
