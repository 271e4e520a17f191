//! Graded relevance assessments and their derived views.
//!
//! An element is highly relevant when both exhaustivity and specificity are 3.
//! Within each document the highly relevant set can be reduced to its
//! outermost members (the General view) or its innermost members (the
//! Specific view). Topics are then categorised by whether their General view
//! is dominated by whole articles.

use std::collections::{BTreeMap, BTreeSet, HashSet};
use std::fmt;
use std::path::Path;
use std::str::FromStr;

use crate::corpus::{Corpus, DocId};
use crate::error::{Error, Result};
use crate::path::ElementPath;

pub type ElementKey = (DocId, ElementPath);

pub const HIGHLY_RELEVANT: u8 = 3;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AssessmentEntry {
    pub doc: DocId,
    pub path: ElementPath,
    pub exhaustivity: u8,
    pub specificity: u8,
}

impl AssessmentEntry {
    pub fn new(doc: DocId, path: ElementPath, exhaustivity: u8, specificity: u8) -> Result<Self> {
        if exhaustivity > 3 || specificity > 3 {
            return Err(Error::InvalidAssessment(format!(
                "{doc} {path}: E={exhaustivity} S={specificity} outside 0..3"
            )));
        }
        Ok(AssessmentEntry {
            doc,
            path,
            exhaustivity,
            specificity,
        })
    }

    pub fn is_highly_relevant(&self) -> bool {
        self.exhaustivity == HIGHLY_RELEVANT && self.specificity == HIGHLY_RELEVANT
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AssessmentSet {
    pub topic_id: u32,
    entries: Vec<AssessmentEntry>,
}

impl AssessmentSet {
    pub fn new(topic_id: u32, entries: Vec<AssessmentEntry>) -> Result<Self> {
        let mut seen = HashSet::with_capacity(entries.len());
        for e in &entries {
            if !seen.insert((&e.doc, &e.path)) {
                return Err(Error::DuplicatePath {
                    doc: e.doc.to_string(),
                    path: e.path.to_string(),
                });
            }
        }
        Ok(AssessmentSet { topic_id, entries })
    }

    pub fn entries(&self) -> &[AssessmentEntry] {
        &self.entries
    }

    /// Assessed elements that do not exist in `corpus`. They stay in the set.
    pub fn unresolved(&self, corpus: &Corpus) -> Vec<ElementKey> {
        self.entries
            .iter()
            .filter(|e| corpus.resolve(&e.doc, &e.path).is_none())
            .map(|e| (e.doc.clone(), e.path.clone()))
            .collect()
    }
}

fn attr_u8(node: roxmltree::Node<'_, '_>, name: &str) -> Result<u8> {
    let raw = node
        .attribute(name)
        .ok_or_else(|| Error::InvalidAssessment(format!("<path> without {name} attribute")))?;
    raw.trim()
        .parse()
        .map_err(|_| Error::InvalidAssessment(format!("{name}={raw:?} is not a grade")))
}

/// Parses one topic's assessments: `<file file="doc-id">` elements holding
/// `<path E=".." S=".." path="/article[1]/.."/>` entries. The topic id comes
/// from a `topic`/`topic_id` attribute on the root, else from `fallback_topic`.
pub fn parse_assessments(xml: &str, fallback_topic: Option<u32>) -> Result<AssessmentSet> {
    let options = roxmltree::ParsingOptions {
        allow_dtd: true,
        ..Default::default()
    };
    let doc = roxmltree::Document::parse_with_options(xml, options).map_err(|e| Error::Xml {
        path: "assessments".into(),
        message: e.to_string(),
    })?;
    let root = doc.root_element();
    let topic_id = match root
        .attribute("topic")
        .or_else(|| root.attribute("topic_id"))
    {
        Some(raw) => raw
            .trim()
            .parse()
            .map_err(|_| Error::InvalidAssessment(format!("topic id {raw:?} is not an integer")))?,
        None => fallback_topic
            .ok_or_else(|| Error::InvalidAssessment("no topic id on the root element".into()))?,
    };

    let mut entries = Vec::new();
    for file in root
        .descendants()
        .filter(|n| n.is_element() && n.tag_name().name() == "file")
    {
        let doc = DocId::new(file.attribute("file").unwrap_or_default())?;
        for node in file
            .children()
            .filter(|n| n.is_element() && n.tag_name().name() == "path")
        {
            let raw = node
                .attribute("path")
                .ok_or_else(|| Error::InvalidAssessment("<path> without path attribute".into()))?;
            entries.push(AssessmentEntry::new(
                doc.clone(),
                raw.parse()?,
                attr_u8(node, "E")?,
                attr_u8(node, "S")?,
            )?);
        }
    }
    AssessmentSet::new(topic_id, entries)
}

/// Loads every `*.xml` file of a directory (or a single file) as one topic's
/// assessments. Files that fail are returned as errors in place.
pub fn load_assessments(path: &Path) -> Result<Vec<Result<AssessmentSet>>> {
    let files = if path.is_dir() {
        let mut files: Vec<_> = std::fs::read_dir(path)
            .map_err(|e| Error::io(path, e))?
            .filter_map(|e| e.ok().map(|e| e.path()))
            .filter(|p| p.extension().is_some_and(|x| x.eq_ignore_ascii_case("xml")))
            .collect();
        files.sort();
        files
    } else {
        vec![path.to_path_buf()]
    };
    Ok(files
        .into_iter()
        .map(|f| {
            let text = std::fs::read_to_string(&f).map_err(|e| Error::io(&f, e))?;
            let digits: String = f
                .file_stem()
                .map(|s| {
                    s.to_string_lossy()
                        .chars()
                        .filter(char::is_ascii_digit)
                        .collect()
                })
                .unwrap_or_default();
            parse_assessments(&text, digits.parse().ok()).map_err(|e| match e {
                Error::Xml { message, .. } => Error::Xml { path: f, message },
                other => Error::InvalidAssessment(format!("{}: {other}", f.display())),
            })
        })
        .collect())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum RelevanceCase {
    Original,
    General,
    Specific,
}

impl RelevanceCase {
    pub const ALL: [RelevanceCase; 3] = [
        RelevanceCase::Original,
        RelevanceCase::General,
        RelevanceCase::Specific,
    ];
}

impl fmt::Display for RelevanceCase {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            RelevanceCase::Original => "original",
            RelevanceCase::General => "general",
            RelevanceCase::Specific => "specific",
        })
    }
}

impl FromStr for RelevanceCase {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "original" => Ok(RelevanceCase::Original),
            "general" => Ok(RelevanceCase::General),
            "specific" => Ok(RelevanceCase::Specific),
            other => Err(Error::InvalidParameter(format!(
                "unknown relevance case {other:?}"
            ))),
        }
    }
}

pub fn highly_relevant(set: &AssessmentSet) -> BTreeSet<ElementKey> {
    set.entries
        .iter()
        .filter(|e| e.is_highly_relevant())
        .map(|e| (e.doc.clone(), e.path.clone()))
        .collect()
}

pub fn derive_view(set: &AssessmentSet, case: RelevanceCase) -> BTreeSet<ElementKey> {
    let hr = highly_relevant(set);
    match case {
        RelevanceCase::Original => hr,
        RelevanceCase::General => hr
            .iter()
            .filter(|(doc, path)| !path.ancestors().any(|a| hr.contains(&(doc.clone(), a))))
            .cloned()
            .collect(),
        RelevanceCase::Specific => {
            let mut has_inner: HashSet<ElementKey> = HashSet::new();
            for (doc, path) in &hr {
                for a in path.ancestors() {
                    has_inner.insert((doc.clone(), a));
                }
            }
            hr.into_iter().filter(|k| !has_inner.contains(k)).collect()
        }
    }
}

/// Occurrences of each element tag in the chosen view, over all topics.
pub fn element_distribution(
    sets: &[AssessmentSet],
    case: RelevanceCase,
) -> BTreeMap<String, usize> {
    let mut counts = BTreeMap::new();
    for set in sets {
        for (_, path) in derive_view(set, case) {
            *counts.entry(path.last_tag().to_string()).or_insert(0) += 1;
        }
    }
    counts
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum TopicCategory {
    Broad,
    Narrow,
    Neutral,
}

impl fmt::Display for TopicCategory {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            TopicCategory::Broad => "broad",
            TopicCategory::Narrow => "narrow",
            TopicCategory::Neutral => "neutral",
        })
    }
}

/// `articles` General elements that are whole documents against `others`.
pub fn category_from_counts(articles: usize, others: usize) -> TopicCategory {
    match articles.cmp(&others) {
        std::cmp::Ordering::Greater => TopicCategory::Broad,
        std::cmp::Ordering::Less => TopicCategory::Narrow,
        std::cmp::Ordering::Equal => TopicCategory::Neutral,
    }
}

/// Counts of (whole-document, other) elements in the General view.
pub fn general_counts(set: &AssessmentSet) -> (usize, usize) {
    let general = derive_view(set, RelevanceCase::General);
    let articles = general.iter().filter(|(_, p)| p.is_root()).count();
    (articles, general.len() - articles)
}

pub fn categorize_topic(set: &AssessmentSet) -> Result<TopicCategory> {
    let (articles, others) = general_counts(set);
    if articles + others == 0 {
        return Err(Error::NoHighlyRelevant(set.topic_id.to_string()));
    }
    Ok(category_from_counts(articles, others))
}
