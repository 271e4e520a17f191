//! Run scoring against strictly quantised assessments.
//!
//! Average precision is the mean interpolated precision at the 100 recall
//! levels 0.01, 0.02, .., 1.00, where the interpolated precision at level `r`
//! is the best precision reached at any point with recall of at least `r`.
//!
//! Three metrics share that interpolation:
//!
//! * `inex-eval`: one unit per element; recall base is the size of the view.
//! * `ng-s`: size-weighted recall and precision, each entry counted in full.
//! * `ng-o`: like `ng-s`, but relevant text already covered by an earlier
//!   entry of the same document is not credited again.
//!
//! The two size-weighted metrics are reconstructions and are labelled
//! `ng-reconstructed` in reports.

use std::collections::{BTreeMap, HashMap, HashSet};
use std::fmt;
use std::io::Write;
use std::str::FromStr;

use crate::assessments::{
    categorize_topic, derive_view, AssessmentSet, ElementKey, RelevanceCase, TopicCategory,
};
use crate::corpus::{Corpus, DocId};
use crate::error::{Error, Result};
use crate::path::ElementPath;
use crate::pipeline::RunResult;

pub const RECALL_LEVELS: u64 = 100;

/// Binary relevance for one topic under one assessment view.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct QuantizedJudgment {
    pub topic_id: u32,
    relevant: HashSet<ElementKey>,
}

impl QuantizedJudgment {
    pub fn new(topic_id: u32, relevant: impl IntoIterator<Item = ElementKey>) -> Self {
        QuantizedJudgment {
            topic_id,
            relevant: relevant.into_iter().collect(),
        }
    }

    /// Strict quantisation of the chosen view: its members are relevant.
    pub fn strict(set: &AssessmentSet, case: RelevanceCase) -> Self {
        QuantizedJudgment::new(set.topic_id, derive_view(set, case))
    }

    pub fn recall_base(&self) -> usize {
        self.relevant.len()
    }

    pub fn is_relevant(&self, doc: &DocId, path: &ElementPath) -> bool {
        self.relevant.contains(&(doc.clone(), path.clone()))
    }

    pub fn relevant(&self) -> impl Iterator<Item = &ElementKey> {
        self.relevant.iter()
    }
}

/// Interpolated average precision over the 100 recall levels.
///
/// `curve[k]` holds the covered amount and precision after `k + 1` entries;
/// covered amounts must be non-decreasing. Recall level `i / 100` is reached
/// once `covered * 100 >= i * total`, compared in integers.
fn interpolated_ap(curve: &[(u64, f64)], total: u64) -> f64 {
    let mut best_from = vec![0.0f64; curve.len() + 1];
    for k in (0..curve.len()).rev() {
        best_from[k] = best_from[k + 1].max(curve[k].1);
    }
    let total = total as u128;
    let mut k = 0;
    let mut sum = 0.0;
    for level in 1..=RECALL_LEVELS as u128 {
        while k < curve.len() && (curve[k].0 as u128) * (RECALL_LEVELS as u128) < level * total {
            k += 1;
        }
        sum += best_from[k];
    }
    sum / RECALL_LEVELS as f64
}

pub fn inex_eval_strict(run: &RunResult, judgments: &QuantizedJudgment) -> Result<f64> {
    let base = judgments.recall_base();
    if base == 0 {
        return Err(Error::NoHighlyRelevant(judgments.topic_id.to_string()));
    }
    let mut hits = 0u64;
    let curve: Vec<(u64, f64)> = run
        .entries
        .iter()
        .enumerate()
        .map(|(i, e)| {
            if judgments.is_relevant(&e.doc, &e.path) {
                hits += 1;
            }
            (hits, hits as f64 / (i + 1) as f64)
        })
        .collect();
    Ok(interpolated_ap(&curve, base as u64))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum OverlapMode {
    /// Every entry counts its whole subtree.
    Sizes,
    /// Relevant text already covered earlier is not credited again.
    Overlap,
}

pub type SizeMap = HashMap<ElementKey, usize>;

/// Subtree token counts for every judged and retrieved element that resolves
/// in `corpus`.
pub fn collect_sizes<'a>(
    corpus: &Corpus,
    keys: impl IntoIterator<Item = (&'a DocId, &'a ElementPath)>,
) -> SizeMap {
    let mut sizes = SizeMap::new();
    for (doc, path) in keys {
        if let Some(node) = corpus.resolve(doc, path) {
            sizes.insert((doc.clone(), path.clone()), node.subtree_size());
        }
    }
    sizes
}

/// Judged or retrieved elements that have no size; they count as size 0.
pub fn missing_sizes(
    run: &RunResult,
    judgments: &QuantizedJudgment,
    sizes: &SizeMap,
) -> Vec<ElementKey> {
    let mut missing: Vec<ElementKey> = judgments
        .relevant
        .iter()
        .cloned()
        .chain(run.entries.iter().map(|e| (e.doc.clone(), e.path.clone())))
        .filter(|k| !sizes.contains_key(k))
        .collect();
    missing.sort();
    missing.dedup();
    missing
}

pub fn inex_eval_ng(
    run: &RunResult,
    judgments: &QuantizedJudgment,
    sizes: &SizeMap,
    mode: OverlapMode,
) -> Result<f64> {
    let size_of = |k: &ElementKey| sizes.get(k).copied().unwrap_or(0) as u64;
    let total: u64 = judgments.relevant.iter().map(size_of).sum();
    if total == 0 {
        return Err(Error::NoHighlyRelevant(judgments.topic_id.to_string()));
    }

    let mut earlier: HashMap<&DocId, Vec<&ElementPath>> = HashMap::new();
    let mut covered = 0u64;
    let mut consumed = 0u64;
    let mut curve = Vec::with_capacity(run.entries.len());
    for e in &run.entries {
        let key = (e.doc.clone(), e.path.clone());
        let size = size_of(&key);
        consumed += size;
        if judgments.relevant.contains(&key) {
            covered += match mode {
                OverlapMode::Sizes => size,
                OverlapMode::Overlap => {
                    let seen = earlier.get(&e.doc).map(Vec::as_slice).unwrap_or(&[]);
                    size.saturating_sub(already_covered(&e.doc, &e.path, seen, &size_of))
                }
            };
        }
        earlier.entry(&e.doc).or_default().push(&e.path);
        let precision = if consumed == 0 {
            0.0
        } else {
            covered as f64 / consumed as f64
        };
        curve.push((covered, precision));
    }
    Ok(interpolated_ap(&curve, total))
}

/// Size of the part of `path` lying inside earlier entries of the same document.
fn already_covered(
    doc: &DocId,
    path: &ElementPath,
    seen: &[&ElementPath],
    size_of: &impl Fn(&ElementKey) -> u64,
) -> u64 {
    if seen.iter().any(|s| s.is_ancestor_or_self_of(path)) {
        return size_of(&(doc.clone(), path.clone()));
    }
    let inside: Vec<&ElementPath> = seen
        .iter()
        .copied()
        .filter(|s| path.is_ancestor_of(s))
        .collect();
    inside
        .iter()
        .filter(|s| !inside.iter().any(|o| o.is_ancestor_of(s)))
        .map(|s| size_of(&(doc.clone(), (*s).clone())))
        .sum()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Metric {
    InexEval,
    NgS,
    NgO,
}

impl Metric {
    pub const ALL: [Metric; 3] = [Metric::InexEval, Metric::NgS, Metric::NgO];

    pub fn needs_sizes(self) -> bool {
        !matches!(self, Metric::InexEval)
    }

    pub fn label(self) -> &'static str {
        match self {
            Metric::InexEval => "inex-eval strict",
            Metric::NgS => "ng-reconstructed(s) strict",
            Metric::NgO => "ng-reconstructed(o) strict",
        }
    }
}

impl fmt::Display for Metric {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Metric::InexEval => "inex-eval",
            Metric::NgS => "ng-s",
            Metric::NgO => "ng-o",
        })
    }
}

impl FromStr for Metric {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "inex-eval" | "inex_eval" => Ok(Metric::InexEval),
            "ng-s" => Ok(Metric::NgS),
            "ng-o" => Ok(Metric::NgO),
            other => Err(Error::InvalidParameter(format!("unknown metric {other:?}"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum CategoryFilter {
    All,
    Broad,
    Narrow,
}

impl CategoryFilter {
    pub const ALL: [CategoryFilter; 3] = [
        CategoryFilter::All,
        CategoryFilter::Broad,
        CategoryFilter::Narrow,
    ];

    pub fn admits(self, category: TopicCategory) -> bool {
        match self {
            CategoryFilter::All => true,
            CategoryFilter::Broad => category == TopicCategory::Broad,
            CategoryFilter::Narrow => category == TopicCategory::Narrow,
        }
    }
}

impl fmt::Display for CategoryFilter {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            CategoryFilter::All => "all",
            CategoryFilter::Broad => "broad",
            CategoryFilter::Narrow => "narrow",
        })
    }
}

impl FromStr for CategoryFilter {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "all" => Ok(CategoryFilter::All),
            "broad" => Ok(CategoryFilter::Broad),
            "narrow" => Ok(CategoryFilter::Narrow),
            other => Err(Error::InvalidParameter(format!(
                "unknown topic category {other:?}"
            ))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct EvalOptions {
    pub case: RelevanceCase,
    pub metric: Metric,
    pub category: CategoryFilter,
}

impl Default for EvalOptions {
    fn default() -> Self {
        EvalOptions {
            case: RelevanceCase::Original,
            metric: Metric::InexEval,
            category: CategoryFilter::All,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EvalReport {
    pub options: EvalOptions,
    /// Scored topics in ascending id order.
    pub topics: Vec<(u32, f64)>,
    pub diagnostics: Vec<String>,
}

impl EvalReport {
    /// Mean over scored topics; `None` when nothing could be scored.
    pub fn mean_average_precision(&self) -> Option<f64> {
        if self.topics.is_empty() {
            None
        } else {
            Some(self.topics.iter().map(|(_, ap)| ap).sum::<f64>() / self.topics.len() as f64)
        }
    }

    /// `topic_id<TAB>AP` rows followed by a `MAP` row.
    pub fn write_to<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        writeln!(
            out,
            "# metric={} case={} category={}",
            self.options.metric.label(),
            self.options.case,
            self.options.category
        )?;
        writeln!(out, "topic_id\tAP")?;
        for (topic, ap) in &self.topics {
            writeln!(out, "{topic}\t{ap:.6}")?;
        }
        match self.mean_average_precision() {
            Some(map) => writeln!(out, "MAP\t{map:.6}"),
            None => writeln!(out, "MAP\t-"),
        }
    }
}

/// Scores every topic present in both `runs` and `sets` that passes the
/// category filter. Mismatches and unscoreable topics become diagnostics.
pub fn evaluate(
    runs: &[RunResult],
    sets: &[AssessmentSet],
    options: EvalOptions,
    sizes: Option<&SizeMap>,
) -> Result<EvalReport> {
    if options.metric.needs_sizes() && sizes.is_none() {
        return Err(Error::InvalidParameter(format!(
            "metric {} needs element sizes from a corpus",
            options.metric
        )));
    }
    let mut diagnostics = Vec::new();
    let by_topic: BTreeMap<u32, &AssessmentSet> = sets.iter().map(|s| (s.topic_id, s)).collect();
    let run_topics: HashSet<u32> = runs.iter().map(|r| r.topic_id).collect();
    for id in by_topic.keys().filter(|id| !run_topics.contains(id)) {
        diagnostics.push(format!("topic {id}: assessed but absent from the run"));
    }

    let mut topics = Vec::new();
    for run in runs {
        let Some(set) = by_topic.get(&run.topic_id) else {
            diagnostics.push(format!(
                "topic {}: in the run but not assessed",
                run.topic_id
            ));
            continue;
        };
        let category = match categorize_topic(set) {
            Ok(c) => c,
            Err(e) => {
                diagnostics.push(format!("topic {}: skipped: {e}", run.topic_id));
                continue;
            }
        };
        if !options.category.admits(category) {
            continue;
        }
        let judgments = QuantizedJudgment::strict(set, options.case);
        let scored = match (options.metric, sizes) {
            (Metric::InexEval, _) => inex_eval_strict(run, &judgments),
            (Metric::NgS | Metric::NgO, Some(sizes)) => {
                let missing = missing_sizes(run, &judgments, sizes);
                if !missing.is_empty() {
                    diagnostics.push(format!(
                        "topic {}: {} elements without a size, counted as 0",
                        run.topic_id,
                        missing.len()
                    ));
                }
                let mode = if options.metric == Metric::NgS {
                    OverlapMode::Sizes
                } else {
                    OverlapMode::Overlap
                };
                inex_eval_ng(run, &judgments, sizes, mode)
            }
            (_, None) => unreachable!("checked above"),
        };
        match scored {
            Ok(ap) => topics.push((run.topic_id, ap)),
            Err(e) => diagnostics.push(format!("topic {}: skipped: {e}", run.topic_id)),
        }
    }
    topics.sort_by_key(|(id, _)| *id);
    Ok(EvalReport {
        options,
        topics,
        diagnostics,
    })
}
