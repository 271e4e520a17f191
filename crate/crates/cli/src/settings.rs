//! Options shared by every subcommand, readable from a TOML file.
//!
//! Keys in the file are the long flag names (`max-results = 1500`). Values
//! given on the command line replace the file's; list options given on the
//! command line replace the whole list.

use std::fmt::Display;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use anyhow::{bail, Context, Result};
use clap::Args;
use serde::{Deserialize, Deserializer, Serialize};

use xmlir_core::assessments::RelevanceCase;
use xmlir_core::eval::{CategoryFilter, Metric};
use xmlir_core::pipeline::System;
use xmlir_core::{HeuristicCombo, PerArticle, RankParams};

/// Validates a flag value through its domain type and stores the canonical
/// spelling.
fn checked<T>(s: &str) -> std::result::Result<String, String>
where
    T: FromStr + Display,
    T::Err: Display,
{
    s.parse::<T>()
        .map(|v| v.to_string())
        .map_err(|e| e.to_string())
}

fn one_or_many<'de, D, T>(d: D) -> std::result::Result<Vec<T>, D::Error>
where
    D: Deserializer<'de>,
    T: Deserialize<'de>,
{
    #[derive(Deserialize)]
    #[serde(untagged)]
    enum OneOrMany<T> {
        One(T),
        Many(Vec<T>),
    }
    Ok(match OneOrMany::deserialize(d)? {
        OneOrMany::One(v) => vec![v],
        OneOrMany::Many(v) => v,
    })
}

/// Per-article limits may be written as TOML integers or strings.
fn limits<'de, D>(d: D) -> std::result::Result<Vec<String>, D::Error>
where
    D: Deserializer<'de>,
{
    #[derive(Deserialize)]
    #[serde(untagged)]
    enum Limit {
        Count(u64),
        Word(String),
    }
    let raw: Vec<Limit> = one_or_many(d)?;
    Ok(raw
        .into_iter()
        .map(|l| match l {
            Limit::Count(n) => n.to_string(),
            Limit::Word(w) => w,
        })
        .collect())
}

#[derive(Args, Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields, rename_all = "kebab-case")]
pub struct Settings {
    /// Directory of XML articles
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub corpus: Option<PathBuf>,

    /// Topic file, or a directory of topic files
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub topics: Option<PathBuf>,

    /// Assessment file, or a directory with one file per topic
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub assessments: Option<PathBuf>,

    /// Index written by `index` (directory or index file); rebuilt from the
    /// corpus when absent
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub index: Option<PathBuf>,

    /// Run file to evaluate (repeatable)
    #[arg(long)]
    #[serde(
        deserialize_with = "one_or_many",
        skip_serializing_if = "Vec::is_empty"
    )]
    pub run: Vec<PathBuf>,

    /// Retrieval system: fulltext, xmldb or hybrid (repeatable)
    #[arg(long, value_parser = checked::<System>)]
    #[serde(
        deserialize_with = "one_or_many",
        skip_serializing_if = "Vec::is_empty"
    )]
    pub system: Vec<String>,

    /// Replace each article's elements by its ranked coherent retrieval elements
    #[arg(long, num_args = 0..=1, default_missing_value = "true")]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub cre: Option<bool>,

    /// CRE heuristic combination such as MpE or PME (repeatable)
    #[arg(long, value_parser = checked::<HeuristicCombo>)]
    #[serde(
        deserialize_with = "one_or_many",
        skip_serializing_if = "Vec::is_empty"
    )]
    pub combo: Vec<String>,

    /// Elements per article: 1, 10 or all (repeatable)
    #[arg(long, value_parser = checked::<PerArticle>)]
    #[serde(deserialize_with = "limits", skip_serializing_if = "Vec::is_empty")]
    pub n: Vec<String>,

    /// Pivoted length normalisation slope
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub slope: Option<f64>,

    /// Cap on ranked articles and on entries per topic [default: 1500]
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub max_results: Option<usize>,

    /// Assessment view: original, general or specific (repeatable)
    #[arg(long, value_parser = checked::<RelevanceCase>)]
    #[serde(
        deserialize_with = "one_or_many",
        skip_serializing_if = "Vec::is_empty"
    )]
    pub case: Vec<String>,

    /// Topic category filter: all, broad or narrow (repeatable)
    #[arg(long, value_parser = checked::<CategoryFilter>)]
    #[serde(
        deserialize_with = "one_or_many",
        skip_serializing_if = "Vec::is_empty"
    )]
    pub category: Vec<String>,

    /// Metric: inex-eval, ng-s or ng-o (repeatable)
    #[arg(long, value_parser = checked::<Metric>)]
    #[serde(
        deserialize_with = "one_or_many",
        skip_serializing_if = "Vec::is_empty"
    )]
    pub metric: Vec<String>,

    /// Output file or directory
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub out: Option<PathBuf>,
}

impl Settings {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .with_context(|| format!("reading config {}", path.display()))?;
        toml::from_str(&text).with_context(|| format!("parsing config {}", path.display()))
    }

    pub fn to_toml(&self) -> Result<String> {
        Ok(toml::to_string(self)?)
    }

    /// `self` (command line) over `base` (config file).
    pub fn over(self, base: Settings) -> Settings {
        fn list<T>(cli: Vec<T>, base: Vec<T>) -> Vec<T> {
            if cli.is_empty() {
                base
            } else {
                cli
            }
        }
        Settings {
            corpus: self.corpus.or(base.corpus),
            topics: self.topics.or(base.topics),
            assessments: self.assessments.or(base.assessments),
            index: self.index.or(base.index),
            run: list(self.run, base.run),
            system: list(self.system, base.system),
            cre: self.cre.or(base.cre),
            combo: list(self.combo, base.combo),
            n: list(self.n, base.n),
            slope: self.slope.or(base.slope),
            max_results: self.max_results.or(base.max_results),
            case: list(self.case, base.case),
            category: list(self.category, base.category),
            metric: list(self.metric, base.metric),
            out: self.out.or(base.out),
        }
    }

    pub fn require<'a>(value: &'a Option<PathBuf>, flag: &str) -> Result<&'a Path> {
        match value {
            Some(p) => Ok(p),
            None => bail!("--{flag} is required (or set `{flag}` in the config file)"),
        }
    }

    pub fn systems(&self) -> Result<Vec<System>> {
        parse_all(&self.system, "system")
    }

    pub fn combos(&self) -> Result<Vec<HeuristicCombo>> {
        let combos = parse_all(&self.combo, "combo")?;
        Ok(if combos.is_empty() {
            vec![HeuristicCombo::MPE]
        } else {
            combos
        })
    }

    pub fn per_article(&self, default: &[PerArticle]) -> Result<Vec<PerArticle>> {
        let n = parse_all(&self.n, "n")?;
        Ok(if n.is_empty() { default.to_vec() } else { n })
    }

    pub fn cases(&self, default: &[RelevanceCase]) -> Result<Vec<RelevanceCase>> {
        let c = parse_all(&self.case, "case")?;
        Ok(if c.is_empty() { default.to_vec() } else { c })
    }

    pub fn categories(&self, default: &[CategoryFilter]) -> Result<Vec<CategoryFilter>> {
        let c = parse_all(&self.category, "category")?;
        Ok(if c.is_empty() { default.to_vec() } else { c })
    }

    pub fn metrics(&self) -> Result<Vec<Metric>> {
        let m = parse_all(&self.metric, "metric")?;
        Ok(if m.is_empty() {
            vec![Metric::InexEval]
        } else {
            m
        })
    }

    pub fn rank_params(&self) -> Result<RankParams> {
        let defaults = RankParams::default();
        Ok(RankParams::new(
            self.slope.unwrap_or(defaults.slope()),
            self.max_results.unwrap_or(defaults.max_results()),
        )?)
    }
}

fn parse_all<T>(values: &[String], flag: &str) -> Result<Vec<T>>
where
    T: FromStr + PartialEq,
    T::Err: std::error::Error + Send + Sync + 'static,
{
    let mut out: Vec<T> = Vec::new();
    for v in values {
        let parsed = v
            .parse::<T>()
            .with_context(|| format!("invalid --{flag} value {v:?}"))?;
        if !out.contains(&parsed) {
            out.push(parsed);
        }
    }
    Ok(out)
}
