//! Command-line front end for the Maltese morphology toolkit.
//!
//! Every subcommand reads and validates all of its inputs before writing
//! any output, and produces byte-identical output for identical inputs,
//! settings, and seed.

mod config;

use std::collections::{BTreeMap, BTreeSet};
use std::env;
use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use morphkit_core::affixes::{
    build_inventory, read_inventory, read_segmentations, segment, write_inventory,
    write_segmentations,
};
use morphkit_core::cascade::{
    load_cascade, save_cascade, search_best_order, train_cascade, Property, SearchStrategy,
};
use morphkit_core::classify::NULL_LABEL;
use morphkit_core::cluster_stats::{build_analysis_report, load_cluster_origins};
use morphkit_core::clustering::{
    build_context_vectors, initial_clusters, merge_clusters, read_clusters, write_clusters,
};
use morphkit_core::evaluation::{evaluate, evaluate_split, EvalReport, Evaluation, SplitCounts};
use morphkit_core::lexicon::{
    corpus_tokens, load_cluster_evals, load_corpus, load_labelled_lexicon, split_dataset,
    WordEntry,
};
use morphkit_core::{Error, Result};

use config::{parse_config, Settings};

#[derive(Parser)]
#[command(name = "morphkit", version, about = "Maltese hybrid-morphology toolkit")]
struct Cli {
    /// Settings file; defaults to $MORPHKIT_CONFIG when set
    #[arg(long, global = true, value_name = "FILE")]
    config: Option<PathBuf>,

    #[command(flatten)]
    overrides: Overrides,

    #[command(subcommand)]
    command: Command,
}

/// Flag overrides for individual settings keys.
#[derive(Args)]
struct Overrides {
    /// Longest affix considered, in characters
    #[arg(long, global = true, value_name = "N")]
    max_affix_len: Option<usize>,
    /// Minimum number of distinct words exhibiting an affix
    #[arg(long, global = true, value_name = "N")]
    min_count: Option<u64>,
    /// Minimum branching factor at an affix's diversification point
    #[arg(long, global = true, value_name = "N")]
    branch_min: Option<usize>,
    /// Shortest stem a segmentation may leave behind
    #[arg(long, global = true, value_name = "N")]
    min_stem_len: Option<usize>,
    /// Most prefixes stripped from one word
    #[arg(long, global = true, value_name = "N")]
    max_prefixes: Option<usize>,
    /// Co-occurrence window for context vectors, in tokens
    #[arg(long, global = true, value_name = "N")]
    window: Option<usize>,
    /// Minimum orthographic similarity for a cluster merge
    #[arg(long, global = true, value_name = "X")]
    ortho_threshold: Option<f64>,
    /// Minimum semantic similarity for a cluster merge
    #[arg(long, global = true, value_name = "X")]
    sem_threshold: Option<f64>,
    /// Cluster merge rounds
    #[arg(long, global = true, value_name = "N")]
    max_merge_rounds: Option<u32>,
    /// Nodes with fewer instances become leaves
    #[arg(long, global = true, value_name = "N")]
    min_leaf: Option<usize>,
    /// Tree depth cap; 0 means unbounded
    #[arg(long, global = true, value_name = "N")]
    max_depth: Option<usize>,
    /// Order search strategy: exhaustive or greedy
    #[arg(long, global = true, value_name = "NAME")]
    strategy: Option<String>,
    /// Partial orders kept per level in greedy search
    #[arg(long, global = true, value_name = "N")]
    beam: Option<usize>,
    /// Seed for the dataset split
    #[arg(long, global = true, value_name = "N")]
    seed: Option<u64>,
    /// Fraction of the lexicon held out for order search
    #[arg(long, global = true, value_name = "X")]
    heldout_fraction: Option<f64>,
    /// Fraction of the lexicon reserved for testing
    #[arg(long, global = true, value_name = "X")]
    test_fraction: Option<f64>,
}

#[derive(Clone, Copy, ValueEnum)]
enum ReportFormat {
    Text,
    Csv,
}

#[derive(Subcommand)]
enum Command {
    /// Discover an affix inventory from a raw corpus
    Affixes {
        #[arg(long, value_name = "FILE")]
        corpus: PathBuf,
        #[arg(long, value_name = "FILE")]
        out: PathBuf,
    },
    /// Segment every corpus word against a stored inventory
    Segment {
        #[arg(long, value_name = "FILE")]
        corpus: PathBuf,
        #[arg(long, value_name = "FILE")]
        affixes: PathBuf,
        #[arg(long, value_name = "FILE")]
        out: PathBuf,
    },
    /// Group segmentations by stem, then merge similar clusters
    Cluster {
        #[arg(long, value_name = "FILE")]
        segments: PathBuf,
        #[arg(long, value_name = "FILE")]
        corpus: PathBuf,
        #[arg(long, value_name = "FILE")]
        out: PathBuf,
    },
    /// Tabulate expert evaluations of a cluster set by origin
    AnalyzeClusters {
        #[arg(long, value_name = "FILE")]
        clusters: PathBuf,
        #[arg(long, value_name = "FILE")]
        evals: PathBuf,
        #[arg(long, value_name = "FILE")]
        origins: PathBuf,
        #[arg(long, value_name = "FILE")]
        out: PathBuf,
        #[arg(long, value_enum, default_value = "text")]
        format: ReportFormat,
    },
    /// Train a cascade of morphological property classifiers
    Train {
        #[arg(long, value_name = "FILE")]
        lexicon: PathBuf,
        /// Comma-separated property order, e.g. person,number
        #[arg(long, value_name = "LIST", conflicts_with = "search", required_unless_present = "search")]
        order: Option<String>,
        /// Search for the best property order on held-out data
        #[arg(long)]
        search: bool,
        #[arg(long, value_name = "DIR")]
        out: PathBuf,
    },
    /// Label words with a trained cascade
    Label {
        #[arg(long, value_name = "DIR")]
        cascade: PathBuf,
        /// Words to label
        #[arg(long, value_name = "WORD", num_args = 1.., required = true)]
        words: Vec<String>,
    },
    /// Score a cascade on labelled test and/or origin-tagged gold data
    Evaluate {
        #[arg(long, value_name = "DIR")]
        cascade: PathBuf,
        #[arg(long, value_name = "FILE", required_unless_present = "gold")]
        test: Option<PathBuf>,
        #[arg(long, value_name = "FILE", required_unless_present = "test")]
        gold: Option<PathBuf>,
        #[arg(long, value_name = "FILE")]
        out: PathBuf,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let settings = match build_settings(&cli) {
        Ok(s) => s,
        Err(e) => return fail(&e, true),
    };
    match run(cli.command, &settings) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => fail(&e, false),
    }
}

/// One-line diagnostic and a phase-dependent exit code: 3 for file system
/// problems, 4 for settings problems, 5 for malformed or inconsistent data.
fn fail(err: &Error, settings_phase: bool) -> ExitCode {
    eprintln!("morphkit: {err}");
    let code = match err {
        Error::Io(_) => 3,
        _ if settings_phase => 4,
        _ => 5,
    };
    ExitCode::from(code)
}

fn build_settings(cli: &Cli) -> Result<Settings> {
    let mut settings = Settings::default();
    let path = cli
        .config
        .clone()
        .or_else(|| env::var_os("MORPHKIT_CONFIG").map(PathBuf::from));
    if let Some(path) = path {
        let text = fs::read_to_string(&path).map_err(|e| io_at(&path, e))?;
        parse_config(&text, &mut settings)?;
    }
    let o = &cli.overrides;
    if let Some(v) = o.max_affix_len {
        settings.affix.max_affix_len = v;
    }
    if let Some(v) = o.min_count {
        settings.affix.min_count = v;
    }
    if let Some(v) = o.branch_min {
        settings.affix.branch_min = v;
    }
    if let Some(v) = o.min_stem_len {
        settings.affix.min_stem_len = v;
    }
    if let Some(v) = o.max_prefixes {
        settings.affix.max_prefixes = v;
    }
    if let Some(v) = o.window {
        settings.cluster.window = v;
    }
    if let Some(v) = o.ortho_threshold {
        settings.cluster.ortho_threshold = v;
    }
    if let Some(v) = o.sem_threshold {
        settings.cluster.sem_threshold = v;
    }
    if let Some(v) = o.max_merge_rounds {
        settings.cluster.max_merge_rounds = v;
    }
    if let Some(v) = o.min_leaf {
        settings.tree.min_leaf = v;
    }
    if let Some(v) = o.max_depth {
        settings.tree.max_depth = v;
    }
    if let Some(v) = &o.strategy {
        settings.search.strategy = SearchStrategy::parse(v)?;
    }
    if let Some(v) = o.beam {
        settings.search.beam = v;
    }
    if let Some(v) = o.seed {
        settings.seed = v;
    }
    if let Some(v) = o.heldout_fraction {
        settings.heldout_fraction = v;
    }
    if let Some(v) = o.test_fraction {
        settings.test_fraction = v;
    }
    settings.validate()?;
    Ok(settings)
}

fn run(command: Command, settings: &Settings) -> Result<()> {
    match command {
        Command::Affixes { corpus, out } => cmd_affixes(settings, &corpus, &out),
        Command::Segment { corpus, affixes, out } => cmd_segment(settings, &corpus, &affixes, &out),
        Command::Cluster { segments, corpus, out } => {
            cmd_cluster(settings, &segments, &corpus, &out)
        }
        Command::AnalyzeClusters { clusters, evals, origins, out, format } => {
            cmd_analyze(&clusters, &evals, &origins, &out, format)
        }
        Command::Train { lexicon, order, search: _, out } => {
            cmd_train(settings, &lexicon, order.as_deref(), &out)
        }
        Command::Label { cascade, words } => cmd_label(&cascade, &words),
        Command::Evaluate { cascade, test, gold, out } => {
            cmd_evaluate(&cascade, test.as_deref(), gold.as_deref(), &out)
        }
    }
}

fn io_at(path: &Path, e: io::Error) -> Error {
    Error::Io(io::Error::new(e.kind(), format!("{}: {e}", path.display())))
}

fn read_file(path: &Path) -> Result<Vec<u8>> {
    fs::read(path).map_err(|e| io_at(path, e))
}

fn write_file(path: &Path, bytes: &[u8]) -> Result<()> {
    fs::write(path, bytes).map_err(|e| io_at(path, e))
}

fn cmd_affixes(settings: &Settings, corpus: &Path, out: &Path) -> Result<()> {
    let entries = load_corpus(&read_file(corpus)?[..])?;
    let inventory = build_inventory(&entries, &settings.affix)?;
    let mut buf = Vec::new();
    write_inventory(&inventory, &mut buf)?;
    write_file(out, &buf)
}

fn cmd_segment(settings: &Settings, corpus: &Path, affixes: &Path, out: &Path) -> Result<()> {
    let inventory = read_inventory(&read_file(affixes)?[..], settings.affix.clone())?;
    let entries = load_corpus(&read_file(corpus)?[..])?;
    let segs = entries
        .iter()
        .map(|e| segment(&e.surface, &inventory))
        .collect::<Result<Vec<_>>>()?;
    let mut buf = Vec::new();
    write_segmentations(&segs, &mut buf)?;
    write_file(out, &buf)
}

fn cmd_cluster(settings: &Settings, segments: &Path, corpus: &Path, out: &Path) -> Result<()> {
    let segs = read_segmentations(&read_file(segments)?[..])?;
    let initial = initial_clusters(&segs);
    let tokens = corpus_tokens(&read_file(corpus)?[..])?;
    let vocab: BTreeSet<String> = segs.iter().map(|s| s.surface.clone()).collect();
    let vectors = build_context_vectors(&tokens, &vocab, settings.cluster.window)?;
    let merged = merge_clusters(&initial, &vectors, &settings.cluster)?;
    let mut buf = Vec::new();
    write_clusters(&merged, &mut buf)?;
    write_file(out, &buf)
}

fn cmd_analyze(
    clusters: &Path,
    evals: &Path,
    origins: &Path,
    out: &Path,
    format: ReportFormat,
) -> Result<()> {
    let set = read_clusters(&read_file(clusters)?[..])?;
    let records = load_cluster_evals(&read_file(evals)?[..], &set)?;
    let origin_map = load_cluster_origins(&read_file(origins)?[..], &set)?;
    let report = build_analysis_report(&set, &records, &origin_map)?;
    let rendered = match format {
        ReportFormat::Text => report.to_text(),
        ReportFormat::Csv => report.to_csv(),
    };
    write_file(out, rendered.as_bytes())
}

fn cmd_train(settings: &Settings, lexicon: &Path, order: Option<&str>, out: &Path) -> Result<()> {
    let loaded = load_labelled_lexicon(&read_file(lexicon)?[..])?;
    let mut freq: BTreeMap<&str, u64> = BTreeMap::new();
    for e in &loaded.entries {
        *freq.entry(e.surface.as_str()).or_insert(0) += 1;
    }
    let words: Vec<WordEntry> = freq
        .into_iter()
        .map(|(surface, frequency)| WordEntry { surface: surface.to_string(), frequency })
        .collect();
    let inventory = build_inventory(&words, &settings.affix)?;
    let order: Vec<Property> = match order {
        Some(names) => names
            .split(',')
            .map(|n| Property::parse(n.trim()))
            .collect::<Result<_>>()?,
        None => {
            let split = split_dataset(
                &loaded.entries,
                (settings.train_fraction(), settings.heldout_fraction, settings.test_fraction),
                settings.seed,
            )?;
            search_best_order(
                &split.train,
                &split.heldout,
                &inventory,
                &Property::ALL,
                &settings.search,
                &settings.tree,
            )?
            .order
        }
    };
    let cascade = train_cascade(&loaded.entries, &inventory, &order, &settings.tree)?;
    fs::create_dir_all(out).map_err(|e| io_at(out, e))?;
    save_cascade(&cascade, &inventory, out)
}

fn cmd_label(cascade_dir: &Path, words: &[String]) -> Result<()> {
    let (cascade, inventory) = load_cascade(cascade_dir)?;
    let mut lines = Vec::with_capacity(words.len());
    for word in words {
        let label = cascade.classify(&inventory, word)?;
        let mut parts = vec![label.surface.clone()];
        for a in &label.assignments {
            let shown = if a.label == NULL_LABEL { "null" } else { a.label.as_str() };
            parts.push(format!("{}={shown}", a.property.name()));
        }
        lines.push(parts.join(" "));
    }
    let mut stdout = io::stdout().lock();
    for line in &lines {
        writeln!(stdout, "{line}")?;
    }
    Ok(())
}

fn cmd_evaluate(
    cascade_dir: &Path,
    test: Option<&Path>,
    gold: Option<&Path>,
    out: &Path,
) -> Result<()> {
    let (cascade, inventory) = load_cascade(cascade_dir)?;
    let traditional: Option<Evaluation> = test
        .map(|path| {
            let loaded = load_labelled_lexicon(&read_file(path)?[..])?;
            evaluate(&cascade, &inventory, &loaded.entries)
        })
        .transpose()?;
    let split: Option<Vec<SplitCounts>> = gold
        .map(|path| {
            let loaded = load_labelled_lexicon(&read_file(path)?[..])?;
            evaluate_split(&cascade, &inventory, &loaded.entries)
        })
        .transpose()?;
    let mut report = EvalReport::from_parts(&cascade.order, traditional.as_ref(), split.as_deref());
    let names: Vec<&str> = cascade.order.iter().map(|p| p.name()).collect();
    report.metadata.push(("order".to_string(), names.join(",")));
    write_file(out, report.to_csv().as_bytes())
}
