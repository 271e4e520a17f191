#![allow(dead_code)]

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use xmlir_core::assessments::{AssessmentEntry, AssessmentSet};
use xmlir_core::pipeline::Topic;
use xmlir_core::{Corpus, DocId, DocumentTree, ElementPath, MatchingElement, TokenizerConfig};

/// Ten short articles for ranking checks.
pub const TEN_DOCS: [&str; 10] = [
    "patricia tries are compact tries",
    "string search with suffix trees",
    "text search engines rank documents by text statistics",
    "patricia",
    "a survey of string pattern matching and string search algorithms",
    "binary tries and digital search trees",
    "unrelated words about networks",
    "tries tries tries tries",
    "pattern matching in text with patricia trees and tries for string search",
    "search",
];

pub const W4095: &str = "ic/1999/w4095";

/// The OR answer list of the worked example article, in article order.
pub const OR_LIST: [&str; 12] = [
    "/article[1]/bdy[1]/sec[2]/ip1[1]",
    "/article[1]/bdy[1]/sec[2]/ss1[1]/ip1[1]",
    "/article[1]/bdy[1]/sec[2]/ss1[1]/p[1]",
    "/article[1]/bdy[1]/sec[2]/ss1[2]/p[1]",
    "/article[1]/bdy[1]/sec[2]/ss1[3]/ip1[1]",
    "/article[1]/bdy[1]/sec[4]/ip1[1]",
    "/article[1]/bdy[1]/sec[4]/p[1]",
    "/article[1]/bdy[1]/sec[4]/p[2]",
    "/article[1]/bdy[1]/sec[4]/p[3]",
    "/article[1]/bm[1]/app[1]/sec[1]/ip1[1]",
    "/article[1]/bm[1]/app[1]/sec[2]/p[1]",
    "/article[1]/bm[1]/app[1]/sec[2]/p[2]",
];

/// Expected ranked CREs under MpE: (path, matches, length, sequence).
pub const RANKED_CRES: [(&str, usize, usize, &[u32]); 7] = [
    ("/article[1]", 12, 1, &[1]),
    ("/article[1]/bdy[1]", 9, 2, &[1, 1]),
    ("/article[1]/bdy[1]/sec[2]", 5, 3, &[1, 1, 2]),
    ("/article[1]/bdy[1]/sec[4]", 4, 3, &[1, 1, 4]),
    ("/article[1]/bm[1]/app[1]", 3, 3, &[1, 1, 1]),
    ("/article[1]/bdy[1]/sec[2]/ss1[1]", 2, 4, &[1, 1, 2, 1]),
    ("/article[1]/bm[1]/app[1]/sec[2]", 2, 4, &[1, 1, 1, 2]),
];

pub fn or_list() -> Vec<MatchingElement> {
    let doc = DocId::new(W4095).unwrap();
    OR_LIST
        .iter()
        .map(|p| MatchingElement {
            doc: doc.clone(),
            path: p.parse().unwrap(),
        })
        .collect()
}

/// An article whose OR matches for {patricia, tries} are exactly `OR_LIST`.
pub const W4095_XML: &str = r#"<article>
  <fm><ti>Text indexing structures</ti></fm>
  <bdy>
    <sec><st>Introduction</st><p>Background on indexing.</p></sec>
    <sec>
      <ip1>Patricia tries are compact.</ip1>
      <ss1><ip1>Building a Patricia tree.</ip1><p>Insertion into tries.</p></ss1>
      <ss1><ip1>Overview.</ip1><p>Searching Patricia structures.</p></ss1>
      <ss1><ip1>Deletion in tries.</ip1><p>Further notes.</p></ss1>
    </sec>
    <sec><st>Related work</st><p>Suffix arrays.</p></sec>
    <sec>
      <st>Evaluation</st>
      <ip1>We compare Patricia variants.</ip1>
      <p>Tries use less memory.</p>
      <p>Patricia lookups are fast.</p>
      <p>Tries scale well.</p>
    </sec>
  </bdy>
  <bm>
    <app>
      <sec><ip1>Patricia pseudo code.</ip1><p>Listing.</p></sec>
      <sec><p>Tries proofs.</p><p>Patricia bounds.</p></sec>
    </app>
  </bm>
</article>"#;

/// The visible rows of the worked assessment extract: (E, S, path).
pub const ASSESSMENT_ROWS: [(u8, u8, &str); 21] = [
    (3, 3, "/article[1]"),
    (3, 3, "/article[1]/bdy[1]"),
    (3, 3, "/article[1]/bdy[1]/sec[2]"),
    (3, 3, "/article[1]/bdy[1]/sec[2]/ip1[1]"),
    (3, 3, "/article[1]/bdy[1]/sec[2]/ss1[1]"),
    (3, 3, "/article[1]/bdy[1]/sec[2]/ss1[1]/ip1[1]"),
    (3, 3, "/article[1]/bdy[1]/sec[2]/ss1[1]/p[1]"),
    (3, 3, "/article[1]/bdy[1]/sec[2]/ss1[2]"),
    (3, 3, "/article[1]/bdy[1]/sec[2]/ss1[2]/ip1[1]"),
    (3, 3, "/article[1]/bdy[1]/sec[2]/ss1[2]/p[1]"),
    (3, 3, "/article[1]/bdy[1]/sec[4]"),
    (0, 0, "/article[1]/bdy[1]/sec[4]/st[1]"),
    (3, 3, "/article[1]/bdy[1]/sec[4]/ip1[1]"),
    (3, 3, "/article[1]/bdy[1]/sec[4]/p[1]"),
    (3, 3, "/article[1]/bdy[1]/sec[4]/p[2]"),
    (3, 3, "/article[1]/bdy[1]/sec[4]/p[3]"),
    (3, 2, "/article[1]/bm[1]"),
    (3, 2, "/article[1]/bm[1]/app[1]"),
    (3, 2, "/article[1]/bm[1]/app[1]/sec[1]"),
    (3, 2, "/article[1]/bm[1]/app[1]/sec[1]/ip1[1]"),
    (3, 2, "/article[1]/bm[1]/app[1]/sec[1]/ip1[1]"),
];

pub const SPECIFIC_LEAVES: [&str; 9] = [
    "/article[1]/bdy[1]/sec[2]/ip1[1]",
    "/article[1]/bdy[1]/sec[2]/ss1[1]/ip1[1]",
    "/article[1]/bdy[1]/sec[2]/ss1[1]/p[1]",
    "/article[1]/bdy[1]/sec[2]/ss1[2]/ip1[1]",
    "/article[1]/bdy[1]/sec[2]/ss1[2]/p[1]",
    "/article[1]/bdy[1]/sec[4]/ip1[1]",
    "/article[1]/bdy[1]/sec[4]/p[1]",
    "/article[1]/bdy[1]/sec[4]/p[2]",
    "/article[1]/bdy[1]/sec[4]/p[3]",
];

pub fn assessment_extract(topic_id: u32) -> AssessmentSet {
    let doc = DocId::new(W4095).unwrap();
    // The last visible row repeats an earlier one; keep the first.
    let mut rows: Vec<AssessmentEntry> = Vec::new();
    for (e, s, p) in ASSESSMENT_ROWS {
        let path: ElementPath = p.parse().unwrap();
        if rows.iter().any(|r| r.path == path) {
            continue;
        }
        rows.push(AssessmentEntry::new(doc.clone(), path, e, s).unwrap());
    }
    AssessmentSet::new(topic_id, rows).unwrap()
}

/// Random XML tree with at most `max_nodes` elements; tags drawn from a small
/// alphabet so same-tag sibling indices above 1 are common.
pub fn random_xml(rng: &mut impl Rng, max_nodes: usize, vocab: &[&str]) -> String {
    const TAGS: [&str; 3] = ["a", "b", "c"];
    // parent pointers in creation order
    let n = rng.gen_range(1..=max_nodes);
    let mut children: Vec<Vec<usize>> = vec![Vec::new(); n];
    for i in 1..n {
        let parent = rng.gen_range(0..i);
        children[parent].push(i);
    }
    let tags: Vec<&str> = (0..n).map(|_| TAGS[rng.gen_range(0..TAGS.len())]).collect();
    let texts: Vec<String> = (0..n)
        .map(|_| {
            let k = rng.gen_range(0..3);
            (0..k)
                .map(|_| vocab[rng.gen_range(0..vocab.len())])
                .collect::<Vec<_>>()
                .join(" ")
        })
        .collect();
    fn emit(i: usize, children: &[Vec<usize>], tags: &[&str], texts: &[String], out: &mut String) {
        let tag = if i == 0 { "root" } else { tags[i] };
        out.push('<');
        out.push_str(tag);
        out.push('>');
        out.push_str(&texts[i]);
        for &c in &children[i] {
            emit(c, children, tags, texts, out);
            out.push(' ');
        }
        out.push_str("</");
        out.push_str(tag);
        out.push('>');
    }
    let mut out = String::new();
    emit(0, &children, &tags, &texts, &mut out);
    out
}

pub fn random_tree(rng: &mut impl Rng, max_nodes: usize, vocab: &[&str]) -> DocumentTree {
    let xml = random_xml(rng, max_nodes, vocab);
    DocumentTree::parse(DocId::new("r").unwrap(), &xml, &TokenizerConfig::default()).unwrap()
}

/// A random non-empty antichain of element paths of `tree`, in document order.
pub fn random_antichain(rng: &mut impl Rng, tree: &DocumentTree) -> Vec<ElementPath> {
    let mut ids: Vec<usize> = (0..tree.len()).collect();
    ids.shuffle(rng);
    let want = rng.gen_range(1..=tree.len());
    let mut chosen: Vec<usize> = Vec::new();
    for id in ids {
        if chosen.len() == want {
            break;
        }
        let p = &tree.node(id).path;
        if chosen.iter().all(|&c| {
            let q = &tree.node(c).path;
            !q.is_ancestor_or_self_of(p) && !p.is_ancestor_of(q)
        }) {
            chosen.push(id);
        }
    }
    chosen.sort();
    chosen
        .into_iter()
        .map(|id| tree.node(id).path.clone())
        .collect()
}

/// Random graded judgments over the elements of one to three random trees.
/// Roughly two in five elements are highly relevant.
pub fn random_judgments(rng: &mut impl Rng, topic_id: u32) -> AssessmentSet {
    let mut entries = Vec::new();
    for d in 0..rng.gen_range(1..=3) {
        let xml = random_xml(rng, 30, &["t"]);
        let doc = DocId::new(format!("doc{d}")).unwrap();
        let tree = DocumentTree::parse(doc.clone(), &xml, &TokenizerConfig::default()).unwrap();
        for node in tree.nodes() {
            let roll = rng.gen_range(0..10);
            let (e, s) = match roll {
                0..=3 => (3, 3),
                4 => continue,
                _ => (rng.gen_range(0..=3), rng.gen_range(0..=2)),
            };
            entries.push(AssessmentEntry::new(doc.clone(), node.path.clone(), e, s).unwrap());
        }
    }
    AssessmentSet::new(topic_id, entries).unwrap()
}

/// A random tree with a non-empty relevant set and a run of distinct
/// elements of that tree; runs may nest elements inside each other.
pub struct RunCase {
    pub tree: DocumentTree,
    pub relevant: Vec<ElementPath>,
    pub run: Vec<ElementPath>,
}

pub fn random_run_case(rng: &mut impl Rng) -> RunCase {
    let tree = random_tree(rng, 30, &["t", "u", "v"]);
    let mut ids: Vec<usize> = (0..tree.len()).collect();
    ids.shuffle(rng);
    let rel_count = rng.gen_range(1..=tree.len());
    let relevant = ids[..rel_count]
        .iter()
        .map(|&i| tree.node(i).path.clone())
        .collect();
    ids.shuffle(rng);
    let run_len = rng.gen_range(0..=tree.len());
    let run = ids[..run_len]
        .iter()
        .map(|&i| tree.node(i).path.clone())
        .collect();
    RunCase {
        tree,
        relevant,
        run,
    }
}

impl RunCase {
    pub fn run_result(&self, topic_id: u32) -> xmlir_core::pipeline::RunResult {
        xmlir_core::pipeline::RunResult {
            topic_id,
            entries: self
                .run
                .iter()
                .enumerate()
                .map(|(i, p)| xmlir_core::pipeline::RunEntry {
                    rank: i + 1,
                    doc: self.tree.doc().clone(),
                    path: p.clone(),
                    score: None,
                })
                .collect(),
        }
    }

    pub fn judgment(&self, topic_id: u32) -> xmlir_core::eval::QuantizedJudgment {
        xmlir_core::eval::QuantizedJudgment::new(
            topic_id,
            self.relevant
                .iter()
                .map(|p| (self.tree.doc().clone(), p.clone())),
        )
    }

    pub fn sizes(&self) -> xmlir_core::eval::SizeMap {
        self.tree
            .nodes()
            .iter()
            .map(|n| ((self.tree.doc().clone(), n.path.clone()), n.subtree_size()))
            .collect()
    }

    pub fn flags(&self) -> Vec<bool> {
        self.run.iter().map(|p| self.relevant.contains(p)).collect()
    }

    pub fn has_overlap(&self) -> bool {
        self.run
            .iter()
            .any(|a| self.run.iter().any(|b| a.is_ancestor_of(b)))
    }
}

/// Synthetic collection for end-to-end runs.
///
/// Each topic owns two keywords. Its relevant articles hold one section with
/// two subsections of two paragraphs mentioning both keywords, plus one stray
/// mention in the back matter. Decoy articles mention one keyword once inside
/// long filler text and are ingested before the relevant ones.
pub struct Synthetic {
    pub docs: Vec<(String, String)>,
    pub topics: Vec<Topic>,
    pub assessments: Vec<AssessmentSet>,
}

impl Synthetic {
    pub fn corpus(&self) -> Corpus {
        Corpus::from_xml(
            self.docs.iter().map(|(a, b)| (a.as_str(), b.as_str())),
            &TokenizerConfig::default(),
        )
        .unwrap()
    }

    pub fn topics_xml(&self) -> String {
        let mut out = String::from("<topics>\n");
        for t in &self.topics {
            out.push_str(&format!(
                "<inex_topic topic_id=\"{}\" query_type=\"CO\"><title>{}</title><description>d</description><narrative>n</narrative><keywords>{}</keywords></inex_topic>\n",
                t.id,
                t.title,
                t.keywords.join(", ")
            ));
        }
        out.push_str("</topics>\n");
        out
    }

    pub fn assessment_xml(&self, set: &AssessmentSet) -> String {
        let mut out = format!("<assessments topic=\"{}\">\n", set.topic_id);
        let mut current: Option<&DocId> = None;
        for e in set.entries() {
            if current != Some(&e.doc) {
                if current.is_some() {
                    out.push_str("</file>\n");
                }
                out.push_str(&format!("<file file=\"{}\">\n", e.doc));
                current = Some(&e.doc);
            }
            out.push_str(&format!(
                "  <path E=\"{}\" S=\"{}\" path=\"{}\"/>\n",
                e.exhaustivity, e.specificity, e.path
            ));
        }
        if current.is_some() {
            out.push_str("</file>\n");
        }
        out.push_str("</assessments>\n");
        out
    }
}

const FILLER: [&str; 24] = [
    "system",
    "data",
    "model",
    "network",
    "design",
    "method",
    "result",
    "value",
    "process",
    "analysis",
    "memory",
    "program",
    "approach",
    "paper",
    "user",
    "performance",
    "time",
    "set",
    "structure",
    "control",
    "theory",
    "language",
    "code",
    "field",
];

fn filler(rng: &mut impl Rng, words: usize) -> String {
    (0..words)
        .map(|_| FILLER[rng.gen_range(0..FILLER.len())])
        .collect::<Vec<_>>()
        .join(" ")
}

pub fn synthetic(doc_count: usize, topic_count: usize, seed: u64) -> Synthetic {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let relevant_per_topic = 3;
    let decoys_per_topic = 6;
    assert!(doc_count >= topic_count * (relevant_per_topic + decoys_per_topic));

    let keywords: Vec<(String, String)> = (0..topic_count)
        .map(|t| (format!("alpha{t}"), format!("omega{t}")))
        .collect();

    // Slot assignment: decoys early in ingestion order, relevant articles late.
    let mut role: Vec<Option<(usize, bool)>> = vec![None; doc_count];
    for t in 0..topic_count {
        for d in 0..decoys_per_topic {
            role[t * decoys_per_topic + d] = Some((t, false));
        }
        for r in 0..relevant_per_topic {
            role[doc_count - 1 - (t * relevant_per_topic + r)] = Some((t, true));
        }
    }

    let mut docs = Vec::with_capacity(doc_count);
    let mut entries: Vec<Vec<AssessmentEntry>> = vec![Vec::new(); topic_count];
    for (i, r) in role.iter().enumerate() {
        let id = format!("syn/{:03}/d{i:04}", i / 50);
        let mut xml = format!("<article><fm><ti>{}</ti></fm><bdy>", filler(&mut rng, 4));
        match r {
            Some((t, true)) => {
                let (k1, k2) = &keywords[*t];
                xml.push_str(&format!("<sec><p>{}</p></sec>", filler(&mut rng, 30)));
                xml.push_str("<sec>");
                for _ in 0..2 {
                    xml.push_str("<ss1>");
                    for _ in 0..2 {
                        xml.push_str(&format!(
                            "<p>{k1} {} {k2} {} {k1} {k2}</p>",
                            filler(&mut rng, 5),
                            filler(&mut rng, 5)
                        ));
                    }
                    xml.push_str("</ss1>");
                }
                xml.push_str("</sec>");
                xml.push_str(&format!("<sec><p>{}</p></sec>", filler(&mut rng, 30)));
                xml.push_str(&format!(
                    "</bdy><bm><app><p>{} {k1}</p></app></bm></article>",
                    filler(&mut rng, 6)
                ));
                let doc = DocId::new(id.clone()).unwrap();
                let hr = [
                    "/article[1]",
                    "/article[1]/bdy[1]/sec[2]",
                    "/article[1]/bdy[1]/sec[2]/ss1[1]",
                    "/article[1]/bdy[1]/sec[2]/ss1[1]/p[1]",
                    "/article[1]/bdy[1]/sec[2]/ss1[1]/p[2]",
                    "/article[1]/bdy[1]/sec[2]/ss1[2]",
                    "/article[1]/bdy[1]/sec[2]/ss1[2]/p[1]",
                    "/article[1]/bdy[1]/sec[2]/ss1[2]/p[2]",
                ];
                for p in hr {
                    entries[*t]
                        .push(AssessmentEntry::new(doc.clone(), p.parse().unwrap(), 3, 3).unwrap());
                }
                entries[*t].push(
                    AssessmentEntry::new(doc.clone(), "/article[1]/bdy[1]".parse().unwrap(), 3, 2)
                        .unwrap(),
                );
            }
            Some((t, false)) => {
                let (k1, k2) = &keywords[*t];
                let kw = if i % 2 == 0 { k1 } else { k2 };
                for s in 0..3 {
                    xml.push_str("<sec>");
                    for p in 0..3 {
                        if s == 1 && p == 1 {
                            xml.push_str(&format!(
                                "<p>{} {kw} {}</p>",
                                filler(&mut rng, 40),
                                filler(&mut rng, 40)
                            ));
                        } else {
                            xml.push_str(&format!("<p>{}</p>", filler(&mut rng, 40)));
                        }
                    }
                    xml.push_str("</sec>");
                }
                xml.push_str("</bdy></article>");
            }
            None => {
                for _ in 0..rng.gen_range(1..4) {
                    xml.push_str(&format!("<sec><p>{}</p></sec>", filler(&mut rng, 25)));
                }
                xml.push_str("</bdy></article>");
            }
        }
        docs.push((id, xml));
    }

    let topics = keywords
        .iter()
        .enumerate()
        .map(|(t, (k1, k2))| Topic {
            id: 200 + t as u32,
            title: format!("topic {t}"),
            description: String::new(),
            narrative: String::new(),
            keywords: vec![k1.clone(), format!("{k2} {k1}")],
        })
        .collect();
    let assessments = entries
        .into_iter()
        .enumerate()
        .map(|(t, e)| AssessmentSet::new(200 + t as u32, e).unwrap())
        .collect();
    Synthetic {
        docs,
        topics,
        assessments,
    }
}

pub mod oracle {
    //! Brute-force reference implementations, written against the
    //! definitions rather than against the library's data structures.

    use std::collections::{BTreeMap, BTreeSet, HashSet};

    use xmlir_core::{Corpus, DocumentTree, ElementPath};

    /// Pivoted cosine scores recomputed from raw tokens, sorted by score then
    /// ingestion position, zero scores dropped.
    pub fn rank(corpus: &Corpus, query: &[&str], slope: f64) -> Vec<(String, f64)> {
        let docs: Vec<Vec<&str>> = corpus
            .docs()
            .iter()
            .map(|d| d.all_tokens().collect())
            .collect();
        let n = docs.len() as f64;
        let avg = docs.iter().map(|d| d.len()).sum::<usize>() as f64 / n;
        let mut bag: BTreeMap<&str, f64> = BTreeMap::new();
        for t in query {
            *bag.entry(t).or_default() += 1.0;
        }
        let mut out: Vec<(usize, f64)> = Vec::new();
        for (i, d) in docs.iter().enumerate() {
            let mut dot = 0.0;
            for (t, qtf) in &bag {
                let tf = d.iter().filter(|x| *x == t).count();
                if tf == 0 {
                    continue;
                }
                let df = docs.iter().filter(|o| o.contains(t)).count() as f64;
                dot += qtf * (1.0 + n / df).ln() * (1.0 + (tf as f64).ln());
            }
            let ratio = if avg == 0.0 {
                1.0
            } else {
                d.len() as f64 / avg
            };
            let score = dot / ((1.0 - slope) + slope * ratio);
            if score > 0.0 {
                out.push((i, score));
            }
        }
        out.sort_by(|a, b| b.1.partial_cmp(&a.1).unwrap().then(a.0.cmp(&b.0)));
        out.into_iter()
            .map(|(i, s)| (corpus.docs()[i].doc().to_string(), s))
            .collect()
    }

    /// Terms of every element's subtree, found by path prefix.
    fn subtree_terms(tree: &DocumentTree) -> Vec<HashSet<&str>> {
        tree.nodes()
            .iter()
            .map(|n| {
                tree.nodes()
                    .iter()
                    .filter(|o| n.path.is_ancestor_or_self_of(&o.path))
                    .flat_map(|o| o.tokens.iter().map(String::as_str))
                    .collect()
            })
            .collect()
    }

    /// Most specific satisfying elements, in document order.
    pub fn matches(tree: &DocumentTree, terms: &[&str], all: bool) -> Vec<ElementPath> {
        let sets = subtree_terms(tree);
        let ok: Vec<bool> = sets
            .iter()
            .map(|s| {
                if all {
                    terms.iter().all(|t| s.contains(t))
                } else {
                    terms.iter().any(|t| s.contains(t))
                }
            })
            .collect();
        let nodes = tree.nodes();
        (0..nodes.len())
            .filter(|&i| ok[i])
            .filter(|&i| {
                !(0..nodes.len()).any(|j| ok[j] && nodes[i].path.is_ancestor_of(&nodes[j].path))
            })
            .map(|i| nodes[i].path.clone())
            .collect()
    }

    /// CREs by the literal fixpoint: an element becomes a CRE when at least
    /// two members of (matching ∪ CREs) lie strictly beneath it under at least
    /// two distinct children. Returns (path, matches) sorted by path.
    pub fn cres(tree: &DocumentTree, matching: &[ElementPath]) -> BTreeSet<(ElementPath, usize)> {
        if matching.len() == 1 {
            return [(matching[0].clone(), 1)].into_iter().collect();
        }
        let mut found: BTreeSet<ElementPath> = BTreeSet::new();
        loop {
            let mut grew = false;
            for node in tree.nodes() {
                if found.contains(&node.path) {
                    continue;
                }
                let below: Vec<&ElementPath> = matching
                    .iter()
                    .chain(found.iter())
                    .filter(|p| node.path.is_ancestor_of(p))
                    .collect();
                let distinct: BTreeSet<(&str, u32)> = below
                    .iter()
                    .map(|p| {
                        let s = &p.steps()[node.path.len()];
                        (s.tag.as_str(), s.index)
                    })
                    .collect();
                if below.len() >= 2 && distinct.len() >= 2 {
                    found.insert(node.path.clone());
                    grew = true;
                }
            }
            if !grew {
                break;
            }
        }
        found
            .into_iter()
            .map(|p| {
                let m = matching.iter().filter(|x| p.is_ancestor_of(x)).count();
                (p, m)
            })
            .collect()
    }

    /// Interpolated AP written from the textbook definition with float recall.
    pub fn naive_ap(relevant_flags: &[bool], base: usize) -> f64 {
        let mut points = Vec::new();
        let mut hits = 0usize;
        for (k, &r) in relevant_flags.iter().enumerate() {
            if r {
                hits += 1;
            }
            points.push((hits as f64 / base as f64, hits as f64 / (k + 1) as f64));
        }
        let mut total = 0.0;
        for i in 1..=100 {
            let level = i as f64 / 100.0;
            let best = points
                .iter()
                .filter(|(rec, _)| *rec >= level)
                .map(|(_, p)| *p)
                .fold(0.0, f64::max);
            total += best;
        }
        total / 100.0
    }

    /// Highly relevant elements without a highly relevant proper ancestor.
    pub fn general(hr: &[ElementPath]) -> BTreeSet<ElementPath> {
        hr.iter()
            .filter(|p| !hr.iter().any(|q| q.is_ancestor_of(p)))
            .cloned()
            .collect()
    }

    /// Highly relevant elements without a highly relevant proper descendant.
    pub fn specific(hr: &[ElementPath]) -> BTreeSet<ElementPath> {
        hr.iter()
            .filter(|p| !hr.iter().any(|q| p.is_ancestor_of(q)))
            .cloned()
            .collect()
    }
}

pub mod laws {
    //! Structural laws every run must satisfy.

    use std::collections::HashSet;

    use xmlir_core::pipeline::{translate_topic, Engine, RunResult, System, SystemConfig, Topic};
    use xmlir_core::{identify_cres, match_elements, rank_articles, ElementPath, MatchingElement};

    /// Checks the cap, per-article contiguity, AND-prefix, article order and
    /// CRE membership laws. Returns the first violation.
    pub fn check(
        engine: &Engine<'_>,
        topic: &Topic,
        config: &SystemConfig,
        run: &RunResult,
    ) -> Result<(), String> {
        let tag = config.tag();
        if run.topic_id != topic.id {
            return Err(format!("{tag}: topic id {} != {}", run.topic_id, topic.id));
        }
        if run.entries.len() > config.max_results() {
            return Err(format!("{tag}: {} entries over the cap", run.entries.len()));
        }
        if run.entries.iter().enumerate().any(|(i, e)| e.rank != i + 1) {
            return Err(format!("{tag}: ranks not consecutive"));
        }
        let queries = translate_topic(topic, &engine.tokenizer).map_err(|e| e.to_string())?;

        // split into per-document blocks
        let mut blocks: Vec<(usize, Vec<&ElementPath>)> = Vec::new();
        for e in &run.entries {
            let ord = engine
                .corpus
                .ordinal(&e.doc)
                .ok_or(format!("{tag}: unknown doc {}", e.doc))?;
            match blocks.last_mut() {
                Some((d, paths)) if *d == ord => paths.push(&e.path),
                _ => blocks.push((ord, vec![&e.path])),
            }
        }
        let mut seen = HashSet::new();
        for (d, _) in &blocks {
            if !seen.insert(*d) {
                return Err(format!("{tag}: document {d} appears in two blocks"));
            }
        }

        let order: Vec<usize> = blocks.iter().map(|(d, _)| *d).collect();
        let ranked: Vec<usize> = rank_articles(engine.index, &queries.article_query, &config.rank)
            .iter()
            .map(|a| a.ordinal)
            .collect();
        match config.system {
            System::XmlDb => {
                if order.windows(2).any(|w| w[0] >= w[1]) {
                    return Err(format!("{tag}: documents out of ingestion order"));
                }
            }
            System::Hybrid | System::FullText => {
                let mut it = ranked.iter();
                if !order.iter().all(|d| it.any(|r| r == d)) {
                    return Err(format!(
                        "{tag}: documents not a subsequence of the article ranking"
                    ));
                }
            }
        }

        for (d, paths) in &blocks {
            let tree = &engine.corpus.docs()[*d];
            if config.system == System::FullText {
                if paths.len() != 1 || !paths[0].is_root() {
                    return Err(format!("{tag}: full-text entry is not a whole article"));
                }
                continue;
            }
            if let Some(n) = config.per_article.limit() {
                if paths.len() > n {
                    return Err(format!(
                        "{tag}: {} entries for one article, limit {n}",
                        paths.len()
                    ));
                }
            }
            let and = match_elements(tree, &queries.and);
            let mut expected: Vec<MatchingElement> = and.clone();
            let and_paths: HashSet<&ElementPath> = and.iter().map(|m| &m.path).collect();
            expected.extend(
                match_elements(tree, &queries.or)
                    .into_iter()
                    .filter(|m| !and_paths.contains(&m.path)),
            );
            if config.cre {
                let cres: HashSet<ElementPath> = identify_cres(&expected)
                    .map_err(|e| e.to_string())?
                    .into_iter()
                    .map(|c| c.path)
                    .collect();
                if let Some(p) = paths.iter().find(|p| !cres.contains(**p)) {
                    return Err(format!("{tag}: {p} is not a CRE of its article"));
                }
            } else {
                let want: Vec<&ElementPath> =
                    expected.iter().map(|m| &m.path).take(paths.len()).collect();
                if *paths != want {
                    return Err(format!("{tag}: article list is not the AND-then-OR prefix"));
                }
                let and_prefix = and.len().min(paths.len());
                if paths[..and_prefix]
                    .iter()
                    .zip(&and)
                    .any(|(p, a)| **p != a.path)
                {
                    return Err(format!("{tag}: AND matches do not lead"));
                }
            }
        }
        Ok(())
    }
}

/// fulltext, xmldb, xmldb-cre, hybrid and hybrid-cre with `n` per article.
pub fn five_systems(n: xmlir_core::PerArticle) -> Vec<xmlir_core::pipeline::SystemConfig> {
    use xmlir_core::pipeline::{System, SystemConfig};
    use xmlir_core::HeuristicCombo;
    vec![
        SystemConfig::new(System::FullText),
        SystemConfig::new(System::XmlDb).with_per_article(n),
        SystemConfig::new(System::XmlDb)
            .with_per_article(n)
            .with_cre(HeuristicCombo::MPE),
        SystemConfig::new(System::Hybrid).with_per_article(n),
        SystemConfig::new(System::Hybrid)
            .with_per_article(n)
            .with_cre(HeuristicCombo::MPE),
    ]
}
