//! `xmlir`: index an XML collection, run the retrieval systems over a topic
//! set, and evaluate runs against INEX-style assessments.

mod settings;

use std::collections::{BTreeMap, HashSet};
use std::fs::{self, File};
use std::io::{self, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand};

use xmlir_core::assessments::{
    categorize_topic, element_distribution, general_counts, load_assessments, AssessmentSet,
    RelevanceCase,
};
use xmlir_core::eval::{collect_sizes, evaluate, CategoryFilter, EvalOptions, EvalReport, SizeMap};
use xmlir_core::pipeline::{
    load_topics, read_run, write_run, Engine, RunResult, System, SystemConfig, Topic,
};
use xmlir_core::{build_index, ingest_corpus, Corpus, InvertedIndex, PerArticle, TokenizerConfig};

use settings::Settings;

const INDEX_FILE: &str = "index.tsv";
const MANIFEST_FILE: &str = "manifest.tsv";

/// Hybrid XML element retrieval and evaluation
#[derive(Parser, Debug)]
#[command(name = "xmlir", version, about)]
struct Cli {
    /// TOML file with default option values; command-line flags override it
    #[arg(long, global = true, env = "XMLIR_CONFIG")]
    config: Option<PathBuf>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Build the article index and the ingestion manifest (needs --corpus, --out DIR)
    Index(Settings),
    /// Run systems over the topics; one run file per (system, n, combo) cell
    Run(Settings),
    /// Score run files against assessments
    Eval(Settings),
    /// Run and score the full experimental grid in one go
    Report(Settings),
    /// Element-type distribution per assessment view and topic categories
    AssessStats(Settings),
    /// Print the effective options as a config file
    Config(Settings),
}

fn main() -> Result<()> {
    let cli = Cli::parse();
    let base = match &cli.config {
        Some(path) => Settings::load(path)?,
        None => Settings::default(),
    };
    match cli.command {
        Command::Index(s) => cmd_index(&s.over(base)),
        Command::Run(s) => cmd_run(&s.over(base)),
        Command::Eval(s) => cmd_eval(&s.over(base)),
        Command::Report(s) => cmd_report(&s.over(base)),
        Command::AssessStats(s) => cmd_assess_stats(&s.over(base)),
        Command::Config(s) => {
            print!("{}", s.over(base).to_toml()?);
            Ok(())
        }
    }
}

fn tokenizer() -> TokenizerConfig {
    TokenizerConfig::default()
}

fn load_corpus(s: &Settings) -> Result<Corpus> {
    let dir = Settings::require(&s.corpus, "corpus")?;
    let corpus = ingest_corpus(dir, &tokenizer())
        .with_context(|| format!("reading corpus {}", dir.display()))?;
    for d in corpus.diagnostics() {
        eprintln!("warning: skipped {}: {}", d.file.display(), d.message);
    }
    if corpus.is_empty() {
        bail!("no readable XML documents under {}", dir.display());
    }
    Ok(corpus)
}

fn load_index(s: &Settings, corpus: &Corpus) -> Result<InvertedIndex> {
    let Some(path) = &s.index else {
        return Ok(build_index(corpus)?);
    };
    let file = if path.is_dir() {
        path.join(INDEX_FILE)
    } else {
        path.clone()
    };
    let reader = BufReader::new(
        File::open(&file).with_context(|| format!("opening index {}", file.display()))?,
    );
    let index = InvertedIndex::read_from(reader)
        .with_context(|| format!("reading index {}", file.display()))?;
    let corpus_ids: Vec<_> = corpus.docs().iter().map(|d| d.doc()).collect();
    if index.doc_ids().iter().collect::<Vec<_>>() != corpus_ids {
        bail!(
            "index {} was built from a different corpus; re-run `xmlir index`",
            file.display()
        );
    }
    Ok(index)
}

fn load_topic_set(s: &Settings) -> Result<Vec<Topic>> {
    let path = Settings::require(&s.topics, "topics")?;
    let mut topics = Vec::new();
    for t in load_topics(path)? {
        match t {
            Ok(t) => topics.push(t),
            Err(e) => eprintln!("warning: topic skipped: {e}"),
        }
    }
    if topics.is_empty() {
        bail!("no usable topics in {}", path.display());
    }
    Ok(topics)
}

fn load_assessment_sets(s: &Settings) -> Result<Vec<AssessmentSet>> {
    let path = Settings::require(&s.assessments, "assessments")?;
    let mut sets: Vec<AssessmentSet> = Vec::new();
    for a in load_assessments(path)? {
        match a {
            Ok(a) if sets.iter().any(|s| s.topic_id == a.topic_id) => {
                eprintln!(
                    "warning: duplicate assessments for topic {}; keeping the first",
                    a.topic_id
                )
            }
            Ok(a) => sets.push(a),
            Err(e) => eprintln!("warning: assessments skipped: {e}"),
        }
    }
    if sets.is_empty() {
        bail!("no usable assessments in {}", path.display());
    }
    Ok(sets)
}

/// Output file, or stdout when none was given.
fn output(path: Option<&Path>) -> Result<Box<dyn Write>> {
    Ok(match path {
        Some(p) => {
            if let Some(parent) = p.parent().filter(|d| !d.as_os_str().is_empty()) {
                fs::create_dir_all(parent)
                    .with_context(|| format!("creating {}", parent.display()))?;
            }
            Box::new(BufWriter::new(
                File::create(p).with_context(|| format!("creating {}", p.display()))?,
            ))
        }
        None => Box::new(BufWriter::new(io::stdout().lock())),
    })
}

fn cmd_index(s: &Settings) -> Result<()> {
    let out = Settings::require(&s.out, "out")?;
    let corpus = load_corpus(s)?;
    let index = build_index(&corpus)?;
    fs::create_dir_all(out).with_context(|| format!("creating {}", out.display()))?;

    let mut w = output(Some(&out.join(INDEX_FILE)))?;
    index.write_to(&mut w)?;
    w.flush()?;

    let mut m = output(Some(&out.join(MANIFEST_FILE)))?;
    writeln!(m, "ordinal\tdoc_id\ttokens\telements")?;
    for (i, d) in corpus.docs().iter().enumerate() {
        writeln!(m, "{i}\t{}\t{}\t{}", d.doc(), index.doc_length(i), d.len())?;
    }
    m.flush()?;
    eprintln!(
        "indexed {} documents ({} skipped, {} terms) into {}",
        corpus.len(),
        corpus.diagnostics().len(),
        index.terms().count(),
        out.display()
    );
    Ok(())
}

/// Requested (system, n, combo) cells; full-text ignores n and combo.
fn cells(
    s: &Settings,
    default_systems: &[System],
    default_n: &[PerArticle],
) -> Result<Vec<SystemConfig>> {
    let mut systems = s.systems()?;
    if systems.is_empty() {
        systems = default_systems.to_vec();
    }
    let rank = s.rank_params()?;
    let per_article = s.per_article(default_n)?;
    let combos = s.combos()?;
    let cre_modes: Vec<bool> = match s.cre {
        Some(c) => vec![c],
        None if default_systems.len() > 1 => vec![false, true],
        None => vec![false],
    };
    let mut out: Vec<SystemConfig> = Vec::new();
    let mut tags = HashSet::new();
    for system in systems {
        for &cre in &cre_modes {
            for &n in &per_article {
                for &combo in &combos {
                    let mut c = SystemConfig::new(system)
                        .with_per_article(n)
                        .with_rank(rank);
                    if cre {
                        c = c.with_cre(combo);
                    }
                    if tags.insert(c.tag()) {
                        out.push(c);
                    }
                }
            }
        }
    }
    Ok(out)
}

fn execute(engine: &Engine<'_>, topics: &[Topic], config: &SystemConfig) -> Vec<RunResult> {
    engine
        .run_topics(topics, config)
        .into_iter()
        .zip(topics)
        .filter_map(|(r, t)| match r {
            Ok(r) => Some(r),
            Err(e) => {
                eprintln!("warning: {} topic {}: {e}", config.tag(), t.id);
                None
            }
        })
        .collect()
}

fn cmd_run(s: &Settings) -> Result<()> {
    if s.systems()?.is_empty() {
        bail!("--system is required (fulltext, xmldb or hybrid)");
    }
    let cells = cells(s, &[], &[PerArticle::All])?;
    if cells.len() > 1 && s.out.is_none() {
        bail!(
            "{} run cells requested; --out must name a directory",
            cells.len()
        );
    }
    let corpus = load_corpus(s)?;
    let index = load_index(s, &corpus)?;
    let topics = load_topic_set(s)?;
    let engine = Engine::new(&corpus, &index, tokenizer());

    for config in &cells {
        let runs = execute(&engine, &topics, config);
        let target = match (&s.out, cells.len()) {
            (Some(dir), n) if n > 1 => Some(dir.join(format!("{}.run", config.tag()))),
            (out, _) => out.clone(),
        };
        let mut w = output(target.as_deref())?;
        write_run(&mut w, &runs, &config.tag())?;
        w.flush()?;
        if let Some(t) = &target {
            eprintln!("wrote {} ({} topics)", t.display(), runs.len());
        }
    }
    Ok(())
}

/// Sizes of every judged and retrieved element, for the size-weighted metrics.
fn sizes_for(corpus: &Corpus, runs: &[&[RunResult]], sets: &[AssessmentSet]) -> SizeMap {
    let judged = sets
        .iter()
        .flat_map(|s| s.entries().iter().map(|e| (&e.doc, &e.path)));
    let retrieved = runs
        .iter()
        .flat_map(|rs| rs.iter())
        .flat_map(|r| r.entries.iter().map(|e| (&e.doc, &e.path)));
    collect_sizes(corpus, judged.chain(retrieved))
}

fn report_diagnostics(label: &str, report: &EvalReport) {
    for d in &report.diagnostics {
        eprintln!("warning: {label}: {d}");
    }
}

fn fmt_map(report: &EvalReport) -> String {
    report
        .mean_average_precision()
        .map_or_else(|| "-".to_string(), |m| format!("{m:.4}"))
}

fn cmd_eval(s: &Settings) -> Result<()> {
    if s.run.is_empty() {
        bail!("--run is required");
    }
    let sets = load_assessment_sets(s)?;
    let mut runs: Vec<(PathBuf, Vec<RunResult>)> = Vec::new();
    for path in &s.run {
        let file = File::open(path).with_context(|| format!("opening run {}", path.display()))?;
        let parsed = read_run(BufReader::new(file))
            .with_context(|| format!("reading run {}", path.display()))?;
        runs.push((path.clone(), parsed));
    }
    let cases = s.cases(&[RelevanceCase::Original])?;
    let categories = s.categories(&[CategoryFilter::All])?;
    let metrics = s.metrics()?;

    let sizes = if metrics.iter().any(|m| m.needs_sizes()) {
        let corpus = load_corpus(s).context("size-weighted metrics need --corpus")?;
        let all: Vec<&[RunResult]> = runs.iter().map(|(_, r)| r.as_slice()).collect();
        Some(sizes_for(&corpus, &all, &sets))
    } else {
        None
    };

    let mut w = output(s.out.as_deref())?;
    let single = runs.len() == 1 && cases.len() == 1 && categories.len() == 1 && metrics.len() == 1;
    if !single {
        writeln!(w, "run\tmetric\tcase\tcategory\ttopics\tMAP")?;
    }
    for (path, run) in &runs {
        for &metric in &metrics {
            for &case in &cases {
                for &category in &categories {
                    let options = EvalOptions {
                        case,
                        metric,
                        category,
                    };
                    let report = evaluate(run, &sets, options, sizes.as_ref())?;
                    report_diagnostics(&path.display().to_string(), &report);
                    if single {
                        report.write_to(&mut w)?;
                    } else {
                        writeln!(
                            w,
                            "{}\t{metric}\t{case}\t{category}\t{}\t{}",
                            path.display(),
                            report.topics.len(),
                            fmt_map(&report)
                        )?;
                    }
                }
            }
        }
    }
    w.flush()?;
    Ok(())
}

fn cmd_report(s: &Settings) -> Result<()> {
    let corpus = load_corpus(s)?;
    let index = load_index(s, &corpus)?;
    let topics = load_topic_set(s)?;
    let sets = load_assessment_sets(s)?;
    let engine = Engine::new(&corpus, &index, tokenizer());

    let cells = cells(
        s,
        &System::ALL,
        &[PerArticle::Top(1), PerArticle::Top(10), PerArticle::All],
    )?;
    let cases = s.cases(&RelevanceCase::ALL)?;
    let categories = s.categories(&CategoryFilter::ALL)?;
    let metrics = s.metrics()?;

    let runs: Vec<(SystemConfig, Vec<RunResult>)> = cells
        .into_iter()
        .map(|c| {
            let r = execute(&engine, &topics, &c);
            (c, r)
        })
        .collect();
    let sizes = if metrics.iter().any(|m| m.needs_sizes()) {
        let all: Vec<&[RunResult]> = runs.iter().map(|(_, r)| r.as_slice()).collect();
        Some(sizes_for(&corpus, &all, &sets))
    } else {
        None
    };

    let mut w = output(s.out.as_deref())?;
    write!(w, "system\tn\tmetric\tcase")?;
    for c in &categories {
        write!(w, "\t{c}")?;
    }
    writeln!(w)?;
    let mut warned = HashSet::new();
    for (config, run) in &runs {
        let n = if config.system == System::FullText {
            "-".to_string()
        } else {
            config.per_article.to_string()
        };
        let name = match config.system {
            System::FullText => config.system.to_string(),
            _ if config.cre => format!("{}-cre-{}", config.system, config.combo),
            _ => config.system.to_string(),
        };
        for &metric in &metrics {
            for &case in &cases {
                write!(w, "{name}\t{n}\t{metric}\t{case}")?;
                for &category in &categories {
                    let report = evaluate(
                        run,
                        &sets,
                        EvalOptions {
                            case,
                            metric,
                            category,
                        },
                        sizes.as_ref(),
                    )?;
                    for d in &report.diagnostics {
                        if warned.insert(d.clone()) {
                            eprintln!("warning: {d}");
                        }
                    }
                    write!(w, "\t{}", fmt_map(&report))?;
                }
                writeln!(w)?;
            }
        }
    }
    w.flush()?;
    Ok(())
}

fn cmd_assess_stats(s: &Settings) -> Result<()> {
    let sets = load_assessment_sets(s)?;
    let cases = s.cases(&RelevanceCase::ALL)?;
    let mut w = output(s.out.as_deref())?;

    writeln!(w, "# element distribution")?;
    writeln!(w, "case\telement\tcount")?;
    for &case in &cases {
        for (tag, count) in element_distribution(&sets, case) {
            writeln!(w, "{case}\t{tag}\t{count}")?;
        }
    }

    writeln!(w, "# topic categories")?;
    writeln!(w, "topic_id\tcategory\tarticles\tother")?;
    let mut totals: BTreeMap<String, usize> = BTreeMap::new();
    let mut ordered: Vec<&AssessmentSet> = sets.iter().collect();
    ordered.sort_by_key(|s| s.topic_id);
    for set in ordered {
        let (articles, others) = general_counts(set);
        let category = match categorize_topic(set) {
            Ok(c) => c.to_string(),
            Err(_) => "-".to_string(),
        };
        *totals.entry(category.clone()).or_default() += 1;
        writeln!(w, "{}\t{category}\t{articles}\t{others}", set.topic_id)?;
    }
    for (category, count) in totals {
        writeln!(w, "# {category}\t{count}")?;
    }
    w.flush()?;
    Ok(())
}
