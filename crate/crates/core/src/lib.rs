//! Hybrid XML element retrieval.
//!
//! The crate combines a whole-article ranker (inverted index with pivoted
//! length normalisation) with element-level AND/OR matching, post-processes
//! per-article match lists into ranked coherent retrieval elements, and scores
//! the resulting runs against INEX-style graded assessments.

pub mod assessments;
pub mod corpus;
pub mod cre;
pub mod error;
pub mod eval;
pub mod matcher;
pub mod path;
pub mod pipeline;
pub mod ranker;
pub mod tokenize;

pub use corpus::{ingest_corpus, Corpus, DocId, DocumentTree};
pub use cre::{identify_cres, rank_cres, CreRecord, HeuristicCombo, PerArticle};
pub use error::{Error, Result};
pub use matcher::{collection_match, match_elements, ElementQuery, MatchMode, MatchingElement};
pub use path::{ElementPath, SequenceKey};
pub use ranker::{build_index, rank_articles, InvertedIndex, RankParams, ScoredArticle};
pub use tokenize::TokenizerConfig;
