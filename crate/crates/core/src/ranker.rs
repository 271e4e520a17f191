//! Whole-article ranking over an inverted index with pivoted length
//! normalisation.
//!
//! ```text
//! score(d) = Σ_t  w_q(t) · w_d(t) / norm(d)
//! w_d(t)   = 1 + ln tf(t, d)
//! w_q(t)   = qtf(t) · ln(1 + N / df(t))
//! norm(d)  = (1 − slope) + slope · len(d) / avg_len
//! ```

use std::collections::BTreeMap;
use std::io::{BufRead, Write};

use crate::corpus::{Corpus, DocId};
use crate::error::{Error, Result};

pub const DEFAULT_SLOPE: f64 = 0.55;
pub const DEFAULT_MAX_RESULTS: usize = 1500;

const INDEX_MAGIC: &str = "xmlir-index";
const INDEX_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub struct Posting {
    /// Ingestion ordinal of the document.
    pub doc: usize,
    pub tf: u32,
}

#[derive(Debug, Clone, PartialEq)]
pub struct InvertedIndex {
    postings: BTreeMap<String, Vec<Posting>>,
    doc_ids: Vec<DocId>,
    doc_lengths: Vec<u64>,
    avg_doc_length: f64,
}

impl InvertedIndex {
    pub fn build(corpus: &Corpus) -> Result<Self> {
        if corpus.is_empty() {
            return Err(Error::EmptyCorpus);
        }
        let mut postings: BTreeMap<String, Vec<Posting>> = BTreeMap::new();
        let mut doc_lengths = Vec::with_capacity(corpus.len());
        for (ordinal, tree) in corpus.docs().iter().enumerate() {
            let mut counts: BTreeMap<&str, u32> = BTreeMap::new();
            let mut len = 0u64;
            for token in tree.all_tokens() {
                *counts.entry(token).or_insert(0) += 1;
                len += 1;
            }
            doc_lengths.push(len);
            for (term, tf) in counts {
                postings
                    .entry(term.to_string())
                    .or_default()
                    .push(Posting { doc: ordinal, tf });
            }
        }
        let doc_ids = corpus.docs().iter().map(|d| d.doc().clone()).collect();
        Ok(Self::assemble(postings, doc_ids, doc_lengths))
    }

    fn assemble(
        postings: BTreeMap<String, Vec<Posting>>,
        doc_ids: Vec<DocId>,
        doc_lengths: Vec<u64>,
    ) -> Self {
        let avg_doc_length = doc_lengths.iter().sum::<u64>() as f64 / doc_lengths.len() as f64;
        InvertedIndex {
            postings,
            doc_ids,
            doc_lengths,
            avg_doc_length,
        }
    }

    pub fn doc_count(&self) -> usize {
        self.doc_ids.len()
    }

    pub fn doc_ids(&self) -> &[DocId] {
        &self.doc_ids
    }

    pub fn doc_length(&self, ordinal: usize) -> u64 {
        self.doc_lengths[ordinal]
    }

    pub fn avg_doc_length(&self) -> f64 {
        self.avg_doc_length
    }

    pub fn postings(&self, term: &str) -> &[Posting] {
        self.postings.get(term).map(Vec::as_slice).unwrap_or(&[])
    }

    pub fn terms(&self) -> impl Iterator<Item = &str> {
        self.postings.keys().map(String::as_str)
    }

    fn norm(&self, ordinal: usize, slope: f64) -> f64 {
        let ratio = if self.avg_doc_length > 0.0 {
            self.doc_lengths[ordinal] as f64 / self.avg_doc_length
        } else {
            1.0
        };
        (1.0 - slope) + slope * ratio
    }

    /// Line-oriented, versioned serialisation. Round-trips exactly.
    pub fn write_to<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        writeln!(out, "{INDEX_MAGIC}\t{INDEX_VERSION}")?;
        writeln!(out, "docs\t{}", self.doc_ids.len())?;
        for (i, (id, len)) in self.doc_ids.iter().zip(&self.doc_lengths).enumerate() {
            writeln!(out, "doc\t{i}\t{id}\t{len}")?;
        }
        writeln!(out, "terms\t{}", self.postings.len())?;
        for (term, list) in &self.postings {
            write!(out, "term\t{term}\t{}", list.len())?;
            for p in list {
                write!(out, "\t{}:{}", p.doc, p.tf)?;
            }
            writeln!(out)?;
        }
        Ok(())
    }

    pub fn read_from<R: BufRead>(input: R) -> Result<Self> {
        let mut lines = input.lines().enumerate();
        let mut next = |expect: &str| -> Result<(usize, Vec<String>)> {
            let (n, line) = lines.next().ok_or_else(|| Error::IndexFormat {
                line: 0,
                message: format!("unexpected end of file, expected {expect}"),
            })?;
            let line = line.map_err(|e| Error::IndexFormat {
                line: n + 1,
                message: e.to_string(),
            })?;
            let fields: Vec<String> = line.split('\t').map(str::to_string).collect();
            if fields[0] != expect {
                return Err(Error::IndexFormat {
                    line: n + 1,
                    message: format!("expected {expect}, found {:?}", fields[0]),
                });
            }
            Ok((n + 1, fields))
        };
        let bad = |line: usize, message: &str| Error::IndexFormat {
            line,
            message: message.to_string(),
        };
        let num = |line: usize, s: &str| -> Result<u64> {
            s.parse()
                .map_err(|_| bad(line, "expected an unsigned integer"))
        };

        let (n, header) = next(INDEX_MAGIC)?;
        if header.get(1).map(String::as_str) != Some("1") {
            return Err(bad(n, "unsupported index version"));
        }
        let (n, docs) = next("docs")?;
        let doc_count = num(n, docs.get(1).ok_or_else(|| bad(n, "missing count"))?)? as usize;
        if doc_count == 0 {
            return Err(Error::EmptyCorpus);
        }
        let mut doc_ids = Vec::with_capacity(doc_count);
        let mut doc_lengths = Vec::with_capacity(doc_count);
        for i in 0..doc_count {
            let (n, f) = next("doc")?;
            if f.len() != 4 || num(n, &f[1])? as usize != i {
                return Err(bad(n, "malformed doc line"));
            }
            doc_ids.push(DocId::new(f[2].clone()).map_err(|e| bad(n, &e.to_string()))?);
            doc_lengths.push(num(n, &f[3])?);
        }
        let (n, terms) = next("terms")?;
        let term_count = num(n, terms.get(1).ok_or_else(|| bad(n, "missing count"))?)?;
        let mut postings = BTreeMap::new();
        for _ in 0..term_count {
            let (n, f) = next("term")?;
            if f.len() < 3 {
                return Err(bad(n, "malformed term line"));
            }
            let df = num(n, &f[2])? as usize;
            if f.len() != 3 + df {
                return Err(bad(n, "posting count does not match df"));
            }
            let mut list = Vec::with_capacity(df);
            for raw in &f[3..] {
                let (d, tf) = raw
                    .split_once(':')
                    .ok_or_else(|| bad(n, "malformed posting"))?;
                let doc = num(n, d)? as usize;
                if doc >= doc_count {
                    return Err(bad(n, "posting refers to an unknown document"));
                }
                list.push(Posting {
                    doc,
                    tf: num(n, tf)? as u32,
                });
            }
            postings.insert(f[1].clone(), list);
        }
        Ok(Self::assemble(postings, doc_ids, doc_lengths))
    }
}

pub fn build_index(corpus: &Corpus) -> Result<InvertedIndex> {
    InvertedIndex::build(corpus)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RankParams {
    slope: f64,
    max_results: usize,
}

impl Default for RankParams {
    fn default() -> Self {
        RankParams {
            slope: DEFAULT_SLOPE,
            max_results: DEFAULT_MAX_RESULTS,
        }
    }
}

impl RankParams {
    pub fn new(slope: f64, max_results: usize) -> Result<Self> {
        if !(0.0..=1.0).contains(&slope) {
            return Err(Error::InvalidParameter(format!(
                "slope {slope} outside [0, 1]"
            )));
        }
        if max_results == 0 {
            return Err(Error::InvalidParameter(
                "max_results must be positive".into(),
            ));
        }
        Ok(RankParams { slope, max_results })
    }

    pub fn slope(&self) -> f64 {
        self.slope
    }

    pub fn max_results(&self) -> usize {
        self.max_results
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScoredArticle {
    pub doc: DocId,
    pub ordinal: usize,
    pub score: f64,
    pub rank: usize,
}

/// Ranks articles for a bag of query terms. Repeated terms weigh in once per
/// occurrence. Zero-score articles are dropped; ties go to the earlier
/// ingested article.
pub fn rank_articles(
    index: &InvertedIndex,
    query: &[String],
    params: &RankParams,
) -> Vec<ScoredArticle> {
    let mut qtf: Vec<(&str, u32)> = Vec::new();
    for term in query {
        match qtf.iter_mut().find(|(t, _)| *t == term.as_str()) {
            Some((_, n)) => *n += 1,
            None => qtf.push((term.as_str(), 1)),
        }
    }

    let n = index.doc_count() as f64;
    let mut acc = vec![0.0f64; index.doc_count()];
    let mut touched = vec![false; index.doc_count()];
    for (term, count) in qtf {
        let list = index.postings(term);
        if list.is_empty() {
            continue;
        }
        let w_q = count as f64 * (1.0 + n / list.len() as f64).ln();
        for p in list {
            acc[p.doc] += w_q * (1.0 + (p.tf as f64).ln());
            touched[p.doc] = true;
        }
    }

    let mut hits: Vec<(usize, f64)> = acc
        .iter()
        .enumerate()
        .filter(|&(d, &s)| touched[d] && s > 0.0)
        .map(|(d, &s)| (d, s / index.norm(d, params.slope)))
        .filter(|&(_, s)| s > 0.0 && s.is_finite())
        .collect();
    hits.sort_by(|a, b| b.1.total_cmp(&a.1).then(a.0.cmp(&b.0)));
    hits.truncate(params.max_results);
    hits.into_iter()
        .enumerate()
        .map(|(i, (ordinal, score))| ScoredArticle {
            doc: index.doc_ids[ordinal].clone(),
            ordinal,
            score,
            rank: i + 1,
        })
        .collect()
}
