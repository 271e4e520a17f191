//! Coherent retrieval elements.
//!
//! Given the matching elements of one article, a coherent retrieval element
//! (CRE) is an element with matching elements or other CREs below at least two
//! of its distinct children. CREs are then ordered by a three-letter heuristic
//! code such as `MpE`:
//!
//! * `M` / `m`: more / fewer matching elements below the CRE,
//! * `P` / `p`: longer / shorter absolute path,
//! * `B` / `E`: sequence key nearer the beginning / end of the article.
//!
//! The first two letters pick the primary and secondary key (one of each
//! kind); the sequence letter always breaks the remaining ties.

use std::cmp::Ordering;
use std::collections::{BTreeSet, HashMap, HashSet};
use std::fmt;
use std::str::FromStr;

use crate::corpus::DocId;
use crate::error::{Error, Result};
use crate::matcher::MatchingElement;
use crate::path::{ElementPath, SequenceKey, Step};

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct CreRecord {
    pub doc: DocId,
    pub path: ElementPath,
    /// Number of input matching elements strictly below this element.
    pub matches: usize,
    pub length: usize,
    pub sequence: SequenceKey,
    /// Input position of the first matching element below (or at) this
    /// element. Inputs arrive in article order, so this orders CREs whose
    /// sequence keys coincide.
    pub first_match: usize,
}

impl CreRecord {
    fn new(doc: DocId, path: ElementPath, matches: usize, first_match: usize) -> Self {
        CreRecord {
            length: path.len(),
            sequence: path.sequence(),
            doc,
            path,
            matches,
            first_match,
        }
    }
}

/// Finds the coherent retrieval elements of one article's match list.
///
/// A list holding a single element yields that element itself with one match.
/// The result is ordered by first contributing match, outermost first.
pub fn identify_cres(matching: &[MatchingElement]) -> Result<Vec<CreRecord>> {
    let first = matching.first().ok_or(Error::EmptyMatchList)?;
    let doc = &first.doc;
    let root = &first.path.steps()[0];
    let mut seen = HashSet::with_capacity(matching.len());
    for m in matching {
        if &m.doc != doc {
            return Err(Error::MixedDocuments);
        }
        if &m.path.steps()[0] != root {
            return Err(Error::InvalidParameter(format!(
                "{} does not share the root of {}",
                m.path, first.path
            )));
        }
        if !seen.insert(&m.path) {
            return Err(Error::DuplicatePath {
                doc: doc.to_string(),
                path: m.path.to_string(),
            });
        }
    }

    if matching.len() == 1 {
        return Ok(vec![CreRecord::new(doc.clone(), first.path.clone(), 1, 0)]);
    }

    struct Tally<'a> {
        children: BTreeSet<&'a Step>,
        matches: usize,
        first_match: usize,
    }

    // Every CRE below a candidate sits under some child that also holds a
    // matching element, so counting the distinct children that lead to
    // matching elements reaches the same fixpoint as iterating over CREs.
    let mut tallies: HashMap<ElementPath, Tally<'_>> = HashMap::new();
    for (pos, m) in matching.iter().enumerate() {
        let steps = m.path.steps();
        for depth in 1..steps.len() {
            let ancestor = ElementPath::from_steps(steps[..depth].to_vec())?;
            let t = tallies.entry(ancestor).or_insert_with(|| Tally {
                children: BTreeSet::new(),
                matches: 0,
                first_match: pos,
            });
            t.children.insert(&steps[depth]);
            t.matches += 1;
        }
    }

    let mut cres: Vec<CreRecord> = tallies
        .into_iter()
        .filter(|(_, t)| t.children.len() >= 2)
        .map(|(path, t)| CreRecord::new(doc.clone(), path, t.matches, t.first_match))
        .collect();
    cres.sort_by(|a, b| {
        a.first_match
            .cmp(&b.first_match)
            .then(a.length.cmp(&b.length))
            .then_with(|| a.path.cmp(&b.path))
    });
    Ok(cres)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Heuristic {
    /// `M`
    MoreMatches,
    /// `m`
    FewerMatches,
    /// `P`
    LongerPath,
    /// `p`
    ShorterPath,
}

impl Heuristic {
    fn letter(self) -> char {
        match self {
            Heuristic::MoreMatches => 'M',
            Heuristic::FewerMatches => 'm',
            Heuristic::LongerPath => 'P',
            Heuristic::ShorterPath => 'p',
        }
    }

    fn from_letter(c: char) -> Option<Self> {
        Some(match c {
            'M' => Heuristic::MoreMatches,
            'm' => Heuristic::FewerMatches,
            'P' => Heuristic::LongerPath,
            'p' => Heuristic::ShorterPath,
            _ => return None,
        })
    }

    fn on_matches(self) -> bool {
        matches!(self, Heuristic::MoreMatches | Heuristic::FewerMatches)
    }

    fn compare(self, a: &CreRecord, b: &CreRecord) -> Ordering {
        match self {
            Heuristic::MoreMatches => b.matches.cmp(&a.matches),
            Heuristic::FewerMatches => a.matches.cmp(&b.matches),
            Heuristic::LongerPath => b.length.cmp(&a.length),
            Heuristic::ShorterPath => a.length.cmp(&b.length),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SequenceOrder {
    /// `B`
    Beginning,
    /// `E`
    End,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct HeuristicCombo {
    primary: Heuristic,
    secondary: Heuristic,
    sequence: SequenceOrder,
}

impl HeuristicCombo {
    pub const MPE: HeuristicCombo = HeuristicCombo {
        primary: Heuristic::MoreMatches,
        secondary: Heuristic::ShorterPath,
        sequence: SequenceOrder::End,
    };

    pub fn new(primary: Heuristic, secondary: Heuristic, sequence: SequenceOrder) -> Result<Self> {
        if primary.on_matches() == secondary.on_matches() {
            return Err(Error::InvalidCombo(format!(
                "{}{}",
                primary.letter(),
                secondary.letter()
            )));
        }
        Ok(HeuristicCombo {
            primary,
            secondary,
            sequence,
        })
    }

    /// The 16 valid combinations.
    pub fn all() -> Vec<HeuristicCombo> {
        use Heuristic::*;
        let mut out = Vec::with_capacity(16);
        for primary in [MoreMatches, FewerMatches, LongerPath, ShorterPath] {
            let seconds = if primary.on_matches() {
                [ShorterPath, LongerPath]
            } else {
                [FewerMatches, MoreMatches]
            };
            for secondary in seconds {
                for sequence in [SequenceOrder::Beginning, SequenceOrder::End] {
                    out.push(HeuristicCombo {
                        primary,
                        secondary,
                        sequence,
                    });
                }
            }
        }
        out
    }

    pub fn primary(&self) -> Heuristic {
        self.primary
    }

    pub fn secondary(&self) -> Heuristic {
        self.secondary
    }

    pub fn sequence(&self) -> SequenceOrder {
        self.sequence
    }

    pub fn compare(&self, a: &CreRecord, b: &CreRecord) -> Ordering {
        let by_position = a
            .sequence
            .cmp(&b.sequence)
            .then(a.first_match.cmp(&b.first_match));
        let by_position = match self.sequence {
            SequenceOrder::Beginning => by_position,
            SequenceOrder::End => by_position.reverse(),
        };
        self.primary
            .compare(a, b)
            .then_with(|| self.secondary.compare(a, b))
            .then(by_position)
            .then_with(|| a.doc.cmp(&b.doc))
            .then_with(|| a.path.cmp(&b.path))
    }
}

impl Default for HeuristicCombo {
    fn default() -> Self {
        HeuristicCombo::MPE
    }
}

impl fmt::Display for HeuristicCombo {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let tail = match self.sequence {
            SequenceOrder::Beginning => 'B',
            SequenceOrder::End => 'E',
        };
        write!(
            f,
            "{}{}{}",
            self.primary.letter(),
            self.secondary.letter(),
            tail
        )
    }
}

impl FromStr for HeuristicCombo {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let invalid = || Error::InvalidCombo(s.to_string());
        let chars: Vec<char> = s.trim().chars().collect();
        if chars.len() != 3 {
            return Err(invalid());
        }
        let primary = Heuristic::from_letter(chars[0]).ok_or_else(invalid)?;
        let secondary = Heuristic::from_letter(chars[1]).ok_or_else(invalid)?;
        let sequence = match chars[2] {
            'B' => SequenceOrder::Beginning,
            'E' => SequenceOrder::End,
            _ => return Err(invalid()),
        };
        HeuristicCombo::new(primary, secondary, sequence).map_err(|_| invalid())
    }
}

/// How many elements each article may contribute.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum PerArticle {
    Top(usize),
    All,
}

impl PerArticle {
    pub fn limit(self) -> Option<usize> {
        match self {
            PerArticle::Top(n) => Some(n),
            PerArticle::All => None,
        }
    }

    pub fn truncate<T>(self, items: &mut Vec<T>) {
        if let PerArticle::Top(n) = self {
            items.truncate(n);
        }
    }
}

impl fmt::Display for PerArticle {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PerArticle::Top(n) => write!(f, "{n}"),
            PerArticle::All => f.write_str("all"),
        }
    }
}

impl FromStr for PerArticle {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        if s.eq_ignore_ascii_case("all") {
            return Ok(PerArticle::All);
        }
        match s.parse::<usize>() {
            Ok(n) if n > 0 => Ok(PerArticle::Top(n)),
            _ => Err(Error::InvalidParameter(format!(
                "elements per article must be a positive integer or \"all\", got {s:?}"
            ))),
        }
    }
}

pub fn rank_cres(
    mut cres: Vec<CreRecord>,
    combo: &HeuristicCombo,
    n: PerArticle,
) -> Vec<CreRecord> {
    cres.sort_by(|a, b| combo.compare(a, b));
    n.truncate(&mut cres);
    cres
}
