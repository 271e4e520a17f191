//! Element addressing in the `/article[1]/bdy[1]/sec[2]` notation.
//!
//! A path is a sequence of `(tag, index)` steps where the index counts only
//! same-tag siblings, starting at 1. Ancestry is prefix containment.

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Step {
    pub tag: String,
    pub index: u32,
}

impl Step {
    pub fn new(tag: impl Into<String>, index: u32) -> Self {
        Step {
            tag: tag.into(),
            index,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct ElementPath {
    steps: Vec<Step>,
}

impl ElementPath {
    pub fn root(tag: impl Into<String>) -> Self {
        ElementPath {
            steps: vec![Step::new(tag, 1)],
        }
    }

    pub fn from_steps(steps: Vec<Step>) -> Result<Self> {
        if steps.is_empty() {
            return Err(Error::InvalidPath {
                input: String::new(),
                reason: "path has no steps",
            });
        }
        if steps.iter().any(|s| s.index == 0) {
            return Err(Error::InvalidPath {
                input: format_steps(&steps),
                reason: "sibling indices start at 1",
            });
        }
        Ok(ElementPath { steps })
    }

    pub fn steps(&self) -> &[Step] {
        &self.steps
    }

    /// Number of steps, counted from the document root.
    pub fn len(&self) -> usize {
        self.steps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.steps.is_empty()
    }

    pub fn is_root(&self) -> bool {
        self.steps.len() == 1
    }

    pub fn child(&self, tag: impl Into<String>, index: u32) -> Self {
        let mut steps = self.steps.clone();
        steps.push(Step::new(tag, index));
        ElementPath { steps }
    }

    pub fn parent(&self) -> Option<Self> {
        if self.steps.len() <= 1 {
            return None;
        }
        Some(ElementPath {
            steps: self.steps[..self.steps.len() - 1].to_vec(),
        })
    }

    /// Proper prefix test.
    pub fn is_ancestor_of(&self, other: &ElementPath) -> bool {
        self.steps.len() < other.steps.len() && other.steps.starts_with(&self.steps)
    }

    pub fn is_ancestor_or_self_of(&self, other: &ElementPath) -> bool {
        other.steps.starts_with(&self.steps)
    }

    pub fn last_tag(&self) -> &str {
        self.steps.last().map(|s| s.tag.as_str()).unwrap_or("")
    }

    pub fn sequence(&self) -> SequenceKey {
        SequenceKey(self.steps.iter().map(|s| s.index).collect())
    }

    /// Proper ancestors, nearest first.
    pub fn ancestors(&self) -> impl Iterator<Item = ElementPath> + '_ {
        (1..self.steps.len()).rev().map(move |n| ElementPath {
            steps: self.steps[..n].to_vec(),
        })
    }

    /// The prefix of `self` one step longer than `ancestor`, i.e. the child of
    /// `ancestor` on the way down to `self`.
    pub fn child_toward(&self, ancestor: &ElementPath) -> Option<&Step> {
        if ancestor.is_ancestor_of(self) {
            self.steps.get(ancestor.steps.len())
        } else {
            None
        }
    }
}

fn format_steps(steps: &[Step]) -> String {
    let mut out = String::new();
    for step in steps {
        out.push('/');
        out.push_str(&step.tag);
        out.push('[');
        out.push_str(&step.index.to_string());
        out.push(']');
    }
    out
}

impl fmt::Display for ElementPath {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&format_steps(&self.steps))
    }
}

impl FromStr for ElementPath {
    type Err = Error;

    fn from_str(input: &str) -> Result<Self> {
        let invalid = |reason| Error::InvalidPath {
            input: input.to_string(),
            reason,
        };
        let body = input
            .trim()
            .strip_prefix('/')
            .ok_or_else(|| invalid("path must start with '/'"))?;
        let mut steps = Vec::new();
        for raw in body.split('/') {
            if raw.is_empty() {
                return Err(invalid("empty step"));
            }
            // Bare tags such as `/article` are read as `[1]`.
            let (tag, index) = match raw.find('[') {
                Some(open) => {
                    let close = raw
                        .strip_suffix(']')
                        .ok_or_else(|| invalid("unterminated index"))?;
                    let index: u32 = close[open + 1..]
                        .parse()
                        .map_err(|_| invalid("index is not a positive integer"))?;
                    (&raw[..open], index)
                }
                None => (raw, 1),
            };
            if tag.is_empty() {
                return Err(invalid("empty tag"));
            }
            if index == 0 {
                return Err(invalid("sibling indices start at 1"));
            }
            steps.push(Step::new(tag, index));
        }
        Ok(ElementPath { steps })
    }
}

/// Index projection of a path, e.g. `[1, 1, 2]` for `/article[1]/bdy[1]/sec[2]`.
/// Compared lexicographically by integer component.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct SequenceKey(pub Vec<u32>);

impl fmt::Display for SequenceKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for i in &self.0 {
            write!(f, "{i}")?;
        }
        Ok(())
    }
}
