//! Document trees and corpus ingestion.
//!
//! Every XML file under a corpus root becomes one [`DocumentTree`]. Nodes are
//! stored in pre-order, so a node's index is also its document-order position
//! and its subtree is the contiguous range `id..subtree_end`.

use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use walkdir::WalkDir;

use crate::error::{Error, Result};
use crate::path::ElementPath;
use crate::tokenize::TokenizerConfig;

/// Relative file path without the `.xml` suffix, e.g. `ic/1999/w4095`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct DocId(String);

impl DocId {
    pub fn new(value: impl Into<String>) -> Result<Self> {
        let value = value.into();
        if value.is_empty() || value.contains(char::is_whitespace) {
            return Err(Error::InvalidParameter(format!(
                "document identifier {value:?} must be non-empty and contain no whitespace"
            )));
        }
        Ok(DocId(value))
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }

    fn from_relative(rel: &Path) -> Option<Self> {
        let mut parts: Vec<String> = rel
            .components()
            .map(|c| c.as_os_str().to_string_lossy().into_owned())
            .collect();
        let last = parts.pop()?;
        let stem = match last.rfind('.') {
            Some(dot) if last[dot + 1..].eq_ignore_ascii_case("xml") => last[..dot].to_string(),
            _ => last,
        };
        parts.push(stem);
        DocId::new(parts.join("/")).ok()
    }
}

impl fmt::Display for DocId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

pub type NodeId = usize;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Node {
    pub tag: String,
    pub parent: Option<NodeId>,
    pub children: Vec<NodeId>,
    /// Tokens of the text directly inside this element.
    pub tokens: Vec<String>,
    pub path: ElementPath,
    subtree_end: NodeId,
    subtree_size: usize,
}

impl Node {
    /// Token count of this element and all of its descendants.
    pub fn subtree_size(&self) -> usize {
        self.subtree_size
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DocumentTree {
    doc: DocId,
    nodes: Vec<Node>,
    by_path: HashMap<ElementPath, NodeId>,
}

impl DocumentTree {
    pub fn parse(doc: DocId, xml: &str, tokenizer: &TokenizerConfig) -> Result<Self> {
        let options = roxmltree::ParsingOptions {
            allow_dtd: true,
            ..Default::default()
        };
        let parsed =
            roxmltree::Document::parse_with_options(xml, options).map_err(|e| Error::Xml {
                path: PathBuf::from(doc.as_str()),
                message: e.to_string(),
            })?;
        let mut builder = TreeBuilder {
            nodes: Vec::new(),
            tokenizer,
        };
        let root = parsed.root_element();
        let path = ElementPath::root(root.tag_name().name());
        builder.visit(root, None, path);
        Ok(Self::from_nodes(doc, builder.nodes))
    }

    fn from_nodes(doc: DocId, mut nodes: Vec<Node>) -> Self {
        // Children always follow their parent in pre-order, so a reverse sweep
        // sees every subtree total before the parent needs it.
        for id in (0..nodes.len()).rev() {
            let own = nodes[id].tokens.len();
            let below: usize = nodes[id]
                .children
                .iter()
                .map(|&c| nodes[c].subtree_size)
                .sum();
            let end = nodes[id]
                .children
                .last()
                .map(|&c| nodes[c].subtree_end)
                .unwrap_or(id + 1);
            nodes[id].subtree_size = own + below;
            nodes[id].subtree_end = end;
        }
        let by_path = nodes
            .iter()
            .enumerate()
            .map(|(id, n)| (n.path.clone(), id))
            .collect();
        DocumentTree {
            doc,
            nodes,
            by_path,
        }
    }

    pub fn doc(&self) -> &DocId {
        &self.doc
    }

    pub fn root(&self) -> &Node {
        &self.nodes[0]
    }

    pub fn nodes(&self) -> &[Node] {
        &self.nodes
    }

    pub fn node(&self, id: NodeId) -> &Node {
        &self.nodes[id]
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// Pre-order ids of `id` and all of its descendants.
    pub fn subtree(&self, id: NodeId) -> std::ops::Range<NodeId> {
        id..self.nodes[id].subtree_end
    }

    pub fn node_id(&self, path: &ElementPath) -> Option<NodeId> {
        self.by_path.get(path).copied()
    }

    pub fn resolve_path(&self, path: &ElementPath) -> Option<&Node> {
        self.node_id(path).map(|id| &self.nodes[id])
    }

    /// Token multiset of the element at `path` and all of its descendants.
    pub fn subtree_terms(&self, path: &ElementPath) -> Result<BTreeMap<String, usize>> {
        let id = self.node_id(path).ok_or_else(|| Error::UnresolvedPath {
            doc: self.doc.to_string(),
            path: path.to_string(),
        })?;
        let mut terms = BTreeMap::new();
        for node in &self.nodes[self.subtree(id)] {
            for token in &node.tokens {
                *terms.entry(token.clone()).or_insert(0) += 1;
            }
        }
        Ok(terms)
    }

    pub fn subtree_size(&self, path: &ElementPath) -> Option<usize> {
        self.resolve_path(path).map(Node::subtree_size)
    }

    /// All tokens of the document in document order.
    pub fn all_tokens(&self) -> impl Iterator<Item = &str> {
        self.nodes
            .iter()
            .flat_map(|n| n.tokens.iter().map(String::as_str))
    }
}

struct TreeBuilder<'t> {
    nodes: Vec<Node>,
    tokenizer: &'t TokenizerConfig,
}

impl TreeBuilder<'_> {
    fn visit(
        &mut self,
        element: roxmltree::Node<'_, '_>,
        parent: Option<NodeId>,
        path: ElementPath,
    ) {
        let id = self.nodes.len();
        self.nodes.push(Node {
            tag: element.tag_name().name().to_string(),
            parent,
            children: Vec::new(),
            tokens: Vec::new(),
            path: path.clone(),
            subtree_end: id + 1,
            subtree_size: 0,
        });
        let mut seen: HashMap<&str, u32> = HashMap::new();
        for child in element.children() {
            if child.is_text() {
                let text = child.text().unwrap_or_default();
                let tokens = self.tokenizer.tokenize(text);
                self.nodes[id].tokens.extend(tokens);
            } else if child.is_element() {
                let tag = child.tag_name().name();
                let index = seen.entry(tag).or_insert(0);
                *index += 1;
                let child_id = self.nodes.len();
                self.nodes[id].children.push(child_id);
                self.visit(child, Some(id), path.child(tag, *index));
            }
        }
    }
}

/// A file that could not be read or parsed during ingestion.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Diagnostic {
    pub file: PathBuf,
    pub message: String,
}

impl fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.file.display(), self.message)
    }
}

/// Immutable collection of parsed documents in ingestion order.
#[derive(Debug, Clone, Default)]
pub struct Corpus {
    docs: Vec<DocumentTree>,
    ordinals: HashMap<DocId, usize>,
    diagnostics: Vec<Diagnostic>,
}

impl Corpus {
    pub fn from_trees(docs: Vec<DocumentTree>) -> Result<Self> {
        let mut ordinals = HashMap::with_capacity(docs.len());
        for (i, d) in docs.iter().enumerate() {
            if ordinals.insert(d.doc.clone(), i).is_some() {
                return Err(Error::InvalidParameter(format!(
                    "duplicate document identifier {}",
                    d.doc
                )));
            }
        }
        Ok(Corpus {
            docs,
            ordinals,
            diagnostics: Vec::new(),
        })
    }

    /// Parses in-memory `(doc id, xml)` pairs in the given order.
    pub fn from_xml<'a, I>(sources: I, tokenizer: &TokenizerConfig) -> Result<Self>
    where
        I: IntoIterator<Item = (&'a str, &'a str)>,
    {
        let docs = sources
            .into_iter()
            .map(|(id, xml)| DocumentTree::parse(DocId::new(id)?, xml, tokenizer))
            .collect::<Result<Vec<_>>>()?;
        Corpus::from_trees(docs)
    }

    pub fn docs(&self) -> &[DocumentTree] {
        &self.docs
    }

    pub fn len(&self) -> usize {
        self.docs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.docs.is_empty()
    }

    pub fn diagnostics(&self) -> &[Diagnostic] {
        &self.diagnostics
    }

    /// Ingestion sequence number of a document.
    pub fn ordinal(&self, doc: &DocId) -> Option<usize> {
        self.ordinals.get(doc).copied()
    }

    pub fn get(&self, doc: &DocId) -> Option<&DocumentTree> {
        self.ordinal(doc).map(|i| &self.docs[i])
    }

    pub fn resolve(&self, doc: &DocId, path: &ElementPath) -> Option<&Node> {
        self.get(doc)?.resolve_path(path)
    }
}

fn decode(bytes: Vec<u8>) -> String {
    match String::from_utf8(bytes) {
        Ok(s) => s,
        // Older collections declare ISO-8859-1; every byte maps to one char.
        Err(e) => e.into_bytes().iter().map(|&b| b as char).collect(),
    }
}

/// Reads every `*.xml` file below `root` into a corpus.
///
/// Files are ingested in lexicographic order of their relative paths, which
/// fixes the document identifier order. Unreadable or malformed files are
/// skipped and reported through [`Corpus::diagnostics`].
pub fn ingest_corpus(root: &Path, tokenizer: &TokenizerConfig) -> Result<Corpus> {
    let meta = std::fs::metadata(root).map_err(|e| Error::io(root, e))?;
    if !meta.is_dir() {
        return Err(Error::io(
            root,
            std::io::Error::new(std::io::ErrorKind::NotFound, "not a directory"),
        ));
    }

    let mut files = Vec::new();
    let mut diagnostics = Vec::new();
    for entry in WalkDir::new(root).sort_by_file_name() {
        let entry = match entry {
            Ok(e) => e,
            Err(e) => {
                if e.depth() == 0 {
                    let source = e
                        .into_io_error()
                        .unwrap_or_else(|| std::io::Error::other("walk failed"));
                    return Err(Error::io(root, source));
                }
                diagnostics.push(Diagnostic {
                    file: e.path().map(Path::to_path_buf).unwrap_or_default(),
                    message: e.to_string(),
                });
                continue;
            }
        };
        let is_xml = entry
            .path()
            .extension()
            .is_some_and(|x| x.eq_ignore_ascii_case("xml"));
        if entry.file_type().is_file() && is_xml {
            files.push(entry.into_path());
        }
    }
    let mut rel_sorted: Vec<(String, PathBuf)> = files
        .into_iter()
        .map(|p| {
            let rel = p
                .strip_prefix(root)
                .unwrap_or(&p)
                .to_string_lossy()
                .replace('\\', "/");
            (rel, p)
        })
        .collect();
    rel_sorted.sort();

    let parsed: Vec<std::result::Result<DocumentTree, Diagnostic>> = rel_sorted
        .par_iter()
        .map(|(rel, full)| {
            let fail = |message: String| Diagnostic {
                file: full.clone(),
                message,
            };
            let doc = DocId::from_relative(Path::new(rel))
                .ok_or_else(|| fail("cannot derive a document identifier".into()))?;
            let bytes = std::fs::read(full).map_err(|e| fail(e.to_string()))?;
            DocumentTree::parse(doc, &decode(bytes), tokenizer).map_err(|e| match e {
                Error::Xml { message, .. } => fail(format!("malformed XML: {message}")),
                other => fail(other.to_string()),
            })
        })
        .collect();

    let mut docs = Vec::with_capacity(parsed.len());
    for item in parsed {
        match item {
            Ok(tree) => docs.push(tree),
            Err(d) => diagnostics.push(d),
        }
    }
    let mut corpus = Corpus::from_trees(docs)?;
    corpus.diagnostics = diagnostics;
    Ok(corpus)
}
