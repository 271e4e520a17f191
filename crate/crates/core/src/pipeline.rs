//! The five retrieval systems and their shared plumbing.
//!
//! * `fulltext`: ranked whole articles.
//! * `xmldb`: AND matches followed by the remaining OR matches, per document,
//!   documents in ingestion order.
//! * `hybrid`: the same per-article element lists, articles taken in ranked
//!   order.
//!
//! With CRE post-processing enabled, each article's element list is replaced
//! by its ranked coherent retrieval elements.

use std::collections::{BTreeMap, HashSet};
use std::fmt;
use std::io::{BufRead, Write};
use std::path::Path;
use std::str::FromStr;

use rayon::prelude::*;

use crate::corpus::{Corpus, DocId, DocumentTree};
use crate::cre::{identify_cres, rank_cres, HeuristicCombo, PerArticle};
use crate::error::{Error, Result};
use crate::matcher::{match_elements, ElementQuery, MatchMode};
use crate::path::ElementPath;
use crate::ranker::{rank_articles, InvertedIndex, RankParams};
use crate::tokenize::TokenizerConfig;

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Topic {
    pub id: u32,
    pub title: String,
    pub description: String,
    pub narrative: String,
    /// Comma-separated keyword phrases, trimmed.
    pub keywords: Vec<String>,
}

fn child_text(node: roxmltree::Node<'_, '_>, tag: &str) -> String {
    node.children()
        .find(|c| c.is_element() && c.tag_name().name().eq_ignore_ascii_case(tag))
        .map(|c| {
            let text: String = c
                .descendants()
                .filter(|d| d.is_text())
                .filter_map(|d| d.text())
                .collect();
            text.split_whitespace().collect::<Vec<_>>().join(" ")
        })
        .unwrap_or_default()
}

fn topic_from_node(node: roxmltree::Node<'_, '_>) -> Result<Topic> {
    let raw_id = node
        .attribute("topic_id")
        .ok_or_else(|| Error::InvalidTopic("missing topic_id attribute".into()))?;
    let id = raw_id
        .trim()
        .parse()
        .map_err(|_| Error::InvalidTopic(format!("topic_id {raw_id:?} is not an integer")))?;
    let keywords = child_text(node, "keywords")
        .split(',')
        .map(str::trim)
        .filter(|k| !k.is_empty())
        .map(str::to_string)
        .collect();
    Ok(Topic {
        id,
        title: child_text(node, "title"),
        description: child_text(node, "description"),
        narrative: child_text(node, "narrative"),
        keywords,
    })
}

/// Parses a topics document whose root is either one `<inex_topic>` or a
/// wrapper holding several. Each topic parses independently.
pub fn parse_topics(xml: &str) -> Result<Vec<Result<Topic>>> {
    let options = roxmltree::ParsingOptions {
        allow_dtd: true,
        ..Default::default()
    };
    let doc = roxmltree::Document::parse_with_options(xml, options).map_err(|e| Error::Xml {
        path: "topics".into(),
        message: e.to_string(),
    })?;
    let root = doc.root_element();
    if root.tag_name().name() == "inex_topic" {
        return Ok(vec![topic_from_node(root)]);
    }
    Ok(root
        .descendants()
        .filter(|n| n.is_element() && n.tag_name().name() == "inex_topic")
        .map(topic_from_node)
        .collect())
}

/// Loads topics from one file or from every `*.xml` file of a directory.
pub fn load_topics(path: &Path) -> Result<Vec<Result<Topic>>> {
    let read = |p: &Path| -> Result<Vec<Result<Topic>>> {
        let text = std::fs::read_to_string(p).map_err(|e| Error::io(p, e))?;
        parse_topics(&text).map_err(|e| match e {
            Error::Xml { message, .. } => Error::Xml {
                path: p.to_path_buf(),
                message,
            },
            other => other,
        })
    };
    if path.is_dir() {
        let mut files: Vec<_> = std::fs::read_dir(path)
            .map_err(|e| Error::io(path, e))?
            .filter_map(|e| e.ok().map(|e| e.path()))
            .filter(|p| p.extension().is_some_and(|x| x.eq_ignore_ascii_case("xml")))
            .collect();
        files.sort();
        let mut out = Vec::new();
        for f in files {
            match read(&f) {
                Ok(topics) => out.extend(topics),
                Err(e) => out.push(Err(e)),
            }
        }
        Ok(out)
    } else {
        read(path)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TopicQueries {
    /// Every keyword token, repeats kept.
    pub article_query: Vec<String>,
    pub and: ElementQuery,
    pub or: ElementQuery,
}

/// Keyword phrases are split into their terms: AND wants every term of every
/// phrase, OR any one term.
pub fn translate_topic(topic: &Topic, tokenizer: &TokenizerConfig) -> Result<TopicQueries> {
    let article_query: Vec<String> = topic
        .keywords
        .iter()
        .flat_map(|phrase| tokenizer.tokenize(phrase))
        .collect();
    if article_query.is_empty() {
        return Err(Error::EmptyKeywords(topic.id.to_string()));
    }
    Ok(TopicQueries {
        and: ElementQuery::new(article_query.iter().cloned(), MatchMode::And)?,
        or: ElementQuery::new(article_query.iter().cloned(), MatchMode::Or)?,
        article_query,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum System {
    FullText,
    XmlDb,
    Hybrid,
}

impl System {
    pub const ALL: [System; 3] = [System::FullText, System::XmlDb, System::Hybrid];
}

impl fmt::Display for System {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            System::FullText => "fulltext",
            System::XmlDb => "xmldb",
            System::Hybrid => "hybrid",
        })
    }
}

impl FromStr for System {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "fulltext" => Ok(System::FullText),
            "xmldb" => Ok(System::XmlDb),
            "hybrid" => Ok(System::Hybrid),
            other => Err(Error::InvalidParameter(format!("unknown system {other:?}"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SystemConfig {
    pub system: System,
    /// Ignored for [`System::FullText`].
    pub cre: bool,
    pub combo: HeuristicCombo,
    pub per_article: PerArticle,
    pub rank: RankParams,
}

impl SystemConfig {
    pub fn new(system: System) -> Self {
        SystemConfig {
            system,
            cre: false,
            combo: HeuristicCombo::MPE,
            per_article: PerArticle::All,
            rank: RankParams::default(),
        }
    }

    pub fn with_cre(mut self, combo: HeuristicCombo) -> Self {
        self.cre = true;
        self.combo = combo;
        self
    }

    pub fn with_per_article(mut self, n: PerArticle) -> Self {
        self.per_article = n;
        self
    }

    pub fn with_rank(mut self, rank: RankParams) -> Self {
        self.rank = rank;
        self
    }

    pub fn max_results(&self) -> usize {
        self.rank.max_results()
    }

    /// Label written in the last column of run files, e.g. `hybrid-cre-MpE-n10`.
    pub fn tag(&self) -> String {
        match self.system {
            System::FullText => self.system.to_string(),
            _ if self.cre => format!("{}-cre-{}-n{}", self.system, self.combo, self.per_article),
            _ => format!("{}-n{}", self.system, self.per_article),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunEntry {
    pub rank: usize,
    pub doc: DocId,
    pub path: ElementPath,
    pub score: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunResult {
    pub topic_id: u32,
    pub entries: Vec<RunEntry>,
}

impl RunResult {
    fn from_elements(topic_id: u32, items: Vec<(DocId, ElementPath, Option<f64>)>) -> Self {
        RunResult {
            topic_id,
            entries: items
                .into_iter()
                .enumerate()
                .map(|(i, (doc, path, score))| RunEntry {
                    rank: i + 1,
                    doc,
                    path,
                    score,
                })
                .collect(),
        }
    }
}

/// Corpus, index and tokenizer bundled for query time.
pub struct Engine<'a> {
    pub corpus: &'a Corpus,
    pub index: &'a InvertedIndex,
    pub tokenizer: TokenizerConfig,
}

impl<'a> Engine<'a> {
    pub fn new(corpus: &'a Corpus, index: &'a InvertedIndex, tokenizer: TokenizerConfig) -> Self {
        Engine {
            corpus,
            index,
            tokenizer,
        }
    }

    /// AND matches, then OR matches not already listed, truncated or replaced
    /// by ranked CREs as configured.
    pub fn article_elements(
        &self,
        tree: &DocumentTree,
        queries: &TopicQueries,
        config: &SystemConfig,
    ) -> Result<Vec<ElementPath>> {
        let mut list = match_elements(tree, &queries.and);
        let seen: HashSet<ElementPath> = list.iter().map(|m| m.path.clone()).collect();
        list.extend(
            match_elements(tree, &queries.or)
                .into_iter()
                .filter(|m| !seen.contains(&m.path)),
        );
        if config.cre {
            if list.is_empty() {
                return Ok(Vec::new());
            }
            let cres = identify_cres(&list)?;
            return Ok(rank_cres(cres, &config.combo, config.per_article)
                .into_iter()
                .map(|c| c.path)
                .collect());
        }
        let mut paths: Vec<ElementPath> = list.into_iter().map(|m| m.path).collect();
        config.per_article.truncate(&mut paths);
        Ok(paths)
    }

    pub fn run_fulltext(&self, topic: &Topic, config: &SystemConfig) -> Result<RunResult> {
        let queries = translate_topic(topic, &self.tokenizer)?;
        let items = rank_articles(self.index, &queries.article_query, &config.rank)
            .into_iter()
            .filter_map(|a| {
                let root = self.corpus.docs().get(a.ordinal)?.root().path.clone();
                Some((a.doc, root, Some(a.score)))
            })
            .take(config.max_results())
            .collect();
        Ok(RunResult::from_elements(topic.id, items))
    }

    pub fn run_xmldb(&self, topic: &Topic, config: &SystemConfig) -> Result<RunResult> {
        let queries = translate_topic(topic, &self.tokenizer)?;
        self.collect(topic.id, self.corpus.docs().iter(), &queries, config)
    }

    pub fn run_hybrid(&self, topic: &Topic, config: &SystemConfig) -> Result<RunResult> {
        let queries = translate_topic(topic, &self.tokenizer)?;
        let ranked = rank_articles(self.index, &queries.article_query, &config.rank);
        let docs = ranked
            .iter()
            .filter_map(|a| self.corpus.docs().get(a.ordinal));
        self.collect(topic.id, docs, &queries, config)
    }

    fn collect<'t>(
        &self,
        topic_id: u32,
        docs: impl Iterator<Item = &'t DocumentTree>,
        queries: &TopicQueries,
        config: &SystemConfig,
    ) -> Result<RunResult> {
        let cap = config.max_results();
        let mut items = Vec::new();
        for tree in docs {
            if items.len() >= cap {
                break;
            }
            for path in self.article_elements(tree, queries, config)? {
                if items.len() >= cap {
                    break;
                }
                items.push((tree.doc().clone(), path, None));
            }
        }
        Ok(RunResult::from_elements(topic_id, items))
    }

    pub fn run(&self, topic: &Topic, config: &SystemConfig) -> Result<RunResult> {
        match config.system {
            System::FullText => self.run_fulltext(topic, config),
            System::XmlDb => self.run_xmldb(topic, config),
            System::Hybrid => self.run_hybrid(topic, config),
        }
    }

    /// Runs every topic, in parallel, keeping input order.
    pub fn run_topics(&self, topics: &[Topic], config: &SystemConfig) -> Vec<Result<RunResult>> {
        topics.par_iter().map(|t| self.run(t, config)).collect()
    }
}

fn format_score(score: Option<f64>) -> String {
    match score {
        Some(s) => format!("{s}"),
        None => "-".to_string(),
    }
}

/// Writes runs as `topic_id rank doc_id element_path score_or_dash system_tag`,
/// tab separated, one entry per line.
pub fn write_run<W: Write>(mut out: W, runs: &[RunResult], tag: &str) -> std::io::Result<()> {
    for run in runs {
        for e in &run.entries {
            writeln!(
                out,
                "{}\t{}\t{}\t{}\t{}\t{}",
                run.topic_id,
                e.rank,
                e.doc,
                e.path,
                format_score(e.score),
                tag
            )?;
        }
    }
    Ok(())
}

/// Reads a run file back. Topics keep the order of first appearance and
/// entries are ordered by rank.
pub fn read_run<R: BufRead>(input: R) -> Result<Vec<RunResult>> {
    let mut by_topic: BTreeMap<u32, (usize, Vec<RunEntry>)> = BTreeMap::new();
    for (n, line) in input.lines().enumerate() {
        let line_no = n + 1;
        let err = |message: String| Error::RunFormat {
            line: line_no,
            message,
        };
        let line = line.map_err(|e| err(e.to_string()))?;
        if line.trim().is_empty() {
            continue;
        }
        let f: Vec<&str> = line.split('\t').collect();
        if f.len() < 5 {
            return Err(err(format!(
                "expected 6 tab-separated fields, found {}",
                f.len()
            )));
        }
        let topic_id: u32 = f[0].parse().map_err(|_| err("bad topic id".into()))?;
        let rank: usize = f[1].parse().map_err(|_| err("bad rank".into()))?;
        let doc = DocId::new(f[2]).map_err(|e| err(e.to_string()))?;
        let path: ElementPath = f[3].parse().map_err(|e: Error| err(e.to_string()))?;
        let score = match f[4] {
            "-" => None,
            s => Some(s.parse::<f64>().map_err(|_| err("bad score".into()))?),
        };
        let order = by_topic.len();
        by_topic
            .entry(topic_id)
            .or_insert_with(|| (order, Vec::new()))
            .1
            .push(RunEntry {
                rank,
                doc,
                path,
                score,
            });
    }
    let mut runs: Vec<(usize, RunResult)> = by_topic
        .into_iter()
        .map(|(topic_id, (order, mut entries))| {
            entries.sort_by_key(|e| e.rank);
            (order, RunResult { topic_id, entries })
        })
        .collect();
    runs.sort_by_key(|(order, _)| *order);
    Ok(runs.into_iter().map(|(_, r)| r).collect())
}
