//! Element-granularity AND/OR keyword matching.
//!
//! A matching element is the most specific element whose subtree contains all
//! (AND) or any (OR) of the query terms. Matches are reported in document
//! order and, across a corpus, in ingestion order of the documents. There is
//! no ranking at this level.

use std::collections::HashMap;

use crate::corpus::{Corpus, DocId, DocumentTree, NodeId};
use crate::error::{Error, Result};
use crate::path::ElementPath;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum MatchMode {
    And,
    Or,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ElementQuery {
    terms: Vec<String>,
    mode: MatchMode,
}

impl ElementQuery {
    /// Duplicate terms collapse; order of first occurrence is kept.
    pub fn new<I, S>(terms: I, mode: MatchMode) -> Result<Self>
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        let mut unique: Vec<String> = Vec::new();
        for t in terms {
            let t = t.into();
            if !unique.contains(&t) {
                unique.push(t);
            }
        }
        if unique.is_empty() {
            return Err(Error::InvalidParameter(
                "element query needs at least one term".into(),
            ));
        }
        Ok(ElementQuery {
            terms: unique,
            mode,
        })
    }

    pub fn terms(&self) -> &[String] {
        &self.terms
    }

    pub fn mode(&self) -> MatchMode {
        self.mode
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct MatchingElement {
    pub doc: DocId,
    pub path: ElementPath,
}

/// Per-node bitset of which query terms occur somewhere in the subtree.
struct TermMasks {
    words: usize,
    bits: Vec<u64>,
}

impl TermMasks {
    fn compute(tree: &DocumentTree, query: &ElementQuery) -> Self {
        let slot: HashMap<&str, usize> = query
            .terms
            .iter()
            .enumerate()
            .map(|(i, t)| (t.as_str(), i))
            .collect();
        let words = query.terms.len().div_ceil(64);
        let mut bits = vec![0u64; words * tree.len()];
        for id in (0..tree.len()).rev() {
            let node = tree.node(id);
            for token in &node.tokens {
                if let Some(&i) = slot.get(token.as_str()) {
                    bits[id * words + i / 64] |= 1 << (i % 64);
                }
            }
            for &c in &node.children {
                for w in 0..words {
                    bits[id * words + w] |= bits[c * words + w];
                }
            }
        }
        TermMasks { words, bits }
    }

    fn mask(&self, id: NodeId) -> &[u64] {
        &self.bits[id * self.words..(id + 1) * self.words]
    }

    fn satisfies(&self, id: NodeId, query: &ElementQuery) -> bool {
        let mask = self.mask(id);
        match query.mode {
            MatchMode::Or => mask.iter().any(|&w| w != 0),
            MatchMode::And => {
                let n = query.terms.len();
                mask.iter().enumerate().all(|(w, &bits)| {
                    let width = (n - w * 64).min(64);
                    let full = if width == 64 {
                        u64::MAX
                    } else {
                        (1u64 << width) - 1
                    };
                    bits & full == full
                })
            }
        }
    }
}

/// Node ids of the most specific satisfying elements, in document order.
pub fn matching_nodes(tree: &DocumentTree, query: &ElementQuery) -> Vec<NodeId> {
    let masks = TermMasks::compute(tree, query);
    // Subtree term sets only grow towards the root, so if any descendant
    // satisfies the predicate then some child does too.
    (0..tree.len())
        .filter(|&id| {
            masks.satisfies(id, query)
                && !tree
                    .node(id)
                    .children
                    .iter()
                    .any(|&c| masks.satisfies(c, query))
        })
        .collect()
}

pub fn match_elements(tree: &DocumentTree, query: &ElementQuery) -> Vec<MatchingElement> {
    matching_nodes(tree, query)
        .into_iter()
        .map(|id| MatchingElement {
            doc: tree.doc().clone(),
            path: tree.node(id).path.clone(),
        })
        .collect()
}

/// Per-document matches concatenated in document identifier order.
pub fn collection_match(corpus: &Corpus, query: &ElementQuery) -> Vec<MatchingElement> {
    corpus
        .docs()
        .iter()
        .flat_map(|tree| match_elements(tree, query))
        .collect()
}
