//! Exact-match evaluation, diagnostics, and seed aggregation.

mod render;
pub mod stats;

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::fmt;
use core::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::dataset::{SplitFile, SplitName};
use crate::transform::SubstitutionPlan;

pub use render::{format_stat, render_table, STD_DISPLAY_THRESHOLD};
pub use stats::{average_ranks, pearson, spearman, Correlation, StatsError};

/// COGS generalization categories that test structural rather than lexical
/// generalization.
pub const DEFAULT_STRUCTURAL_TAGS: [&str; 3] = ["cp_recursion", "obj_pp_to_subj_pp", "pp_recursion"];

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum EvalError {
    #[error("prediction rows ({predictions}) do not match reference rows ({reference})")]
    RowCount { predictions: usize, reference: usize },
    #[error("accuracy {0} is outside [0, 1]")]
    OutOfRange(f64),
    #[error("report lacks metric {0:?}")]
    MissingMetric(String),
    #[error("no reports to aggregate")]
    NoReports,
    #[error("report {index} has a different metric set than report 0 (first difference: {metric:?})")]
    MismatchedMetrics { index: usize, metric: String },
    #[error("reports use different match policies")]
    MixedPolicies,
    #[error("metric {0:?} present in both reports")]
    DuplicateMetric(String),
    #[error("unknown option {0:?}")]
    UnknownOption(String),
    #[error(transparent)]
    Stats(#[from] StatsError),
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MatchPolicy {
    /// Byte equality.
    #[default]
    Strict,
    /// Equality after whitespace canonicalization around replacement tokens.
    Canonical,
}

impl MatchPolicy {
    pub fn other(self) -> MatchPolicy {
        match self {
            MatchPolicy::Strict => MatchPolicy::Canonical,
            MatchPolicy::Canonical => MatchPolicy::Strict,
        }
    }
}

impl FromStr for MatchPolicy {
    type Err = EvalError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "strict" => Ok(MatchPolicy::Strict),
            "canonical" => Ok(MatchPolicy::Canonical),
            _ => Err(EvalError::UnknownOption(s.to_string())),
        }
    }
}

impl fmt::Display for MatchPolicy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            MatchPolicy::Strict => "strict",
            MatchPolicy::Canonical => "canonical",
        })
    }
}

/// Collapses whitespace runs, trims, and puts exactly one space on each side
/// of every occurrence of a token in `tokens` (longest match first).
pub fn canonicalize(text: &str, tokens: &[&str]) -> String {
    let mut toks: Vec<&str> = tokens.iter().copied().filter(|t| !t.is_empty()).collect();
    toks.sort_by(|a, b| b.len().cmp(&a.len()).then(a.cmp(b)));
    let mut spaced = String::with_capacity(text.len() + 8);
    let mut i = 0;
    'outer: while i < text.len() {
        let rest = &text[i..];
        for t in &toks {
            if rest.starts_with(t) {
                spaced.push(' ');
                spaced.push_str(t);
                spaced.push(' ');
                i += t.len();
                continue 'outer;
            }
        }
        let c = rest.chars().next().expect("non-empty");
        spaced.push(c);
        i += c.len_utf8();
    }
    let mut out = String::with_capacity(spaced.len());
    for w in spaced.split_whitespace() {
        if !out.is_empty() {
            out.push(' ');
        }
        out.push_str(w);
    }
    out
}

pub fn exact_match(pred: &str, gold: &str, policy: MatchPolicy, tokens: &[&str]) -> bool {
    match policy {
        MatchPolicy::Strict => pred == gold,
        MatchPolicy::Canonical => pred == gold || canonicalize(pred, tokens) == canonicalize(gold, tokens),
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct RunMeta {
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub seed: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub model: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub step: Option<u64>,
}

/// Model outputs, one per reference row.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct PredictionFile {
    pub rows: Vec<String>,
    pub meta: RunMeta,
}

impl PredictionFile {
    /// One prediction per line; a final newline does not start a row.
    pub fn parse(text: &str, meta: RunMeta) -> PredictionFile {
        let body = text.strip_suffix('\n').unwrap_or(text);
        let rows = if text.is_empty() {
            Vec::new()
        } else {
            body.split('\n').map(|l| l.strip_suffix('\r').unwrap_or(l).to_string()).collect()
        };
        PredictionFile { rows, meta }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Score {
    pub correct: u64,
    pub total: u64,
}

impl Score {
    pub fn accuracy(self) -> f64 {
        if self.total == 0 {
            0.0
        } else {
            self.correct as f64 / self.total as f64
        }
    }

    fn add(&mut self, hit: bool) {
        self.total += 1;
        self.correct += u64::from(hit);
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct LexStruct {
    pub lexical: Score,
    pub structural: Score,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct EvalReport {
    pub meta: RunMeta,
    pub policy: MatchPolicy,
    /// Keys: `gen`, `gen_lex_only`, `test_id`, `test_lex`, `dev`, `train`.
    pub per_split: BTreeMap<String, Score>,
    pub per_category: BTreeMap<String, Score>,
    /// Lexical-generalization predictions containing a replacement string.
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub novel_token_rate: Option<Score>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub lex_struct: Option<LexStruct>,
    /// Per-split scores under the other policy, kept only where they differ.
    #[serde(skip_serializing_if = "BTreeMap::is_empty", default)]
    pub other_policy: BTreeMap<String, Score>,
}

impl EvalReport {
    pub fn accuracy(&self, split: &str) -> Result<f64, EvalError> {
        self.per_split
            .get(split)
            .map(|s| s.accuracy())
            .ok_or_else(|| EvalError::MissingMetric(split.to_string()))
    }

    /// Combines reports over different splits of one run.
    pub fn merge(mut self, other: EvalReport) -> Result<EvalReport, EvalError> {
        if self.policy != other.policy {
            return Err(EvalError::MixedPolicies);
        }
        for (k, v) in other.per_split {
            if self.per_split.insert(k.clone(), v).is_some() {
                return Err(EvalError::DuplicateMetric(k));
            }
        }
        for (k, v) in other.per_category {
            if self.per_category.insert(k.clone(), v).is_some() {
                return Err(EvalError::DuplicateMetric(alloc::format!("category/{k}")));
            }
        }
        for (k, v) in other.other_policy {
            self.other_policy.insert(k, v);
        }
        if other.novel_token_rate.is_some() {
            if self.novel_token_rate.is_some() {
                return Err(EvalError::DuplicateMetric("novel_token_rate".into()));
            }
            self.novel_token_rate = other.novel_token_rate;
        }
        if other.lex_struct.is_some() {
            if self.lex_struct.is_some() {
                return Err(EvalError::DuplicateMetric("lex_struct".into()));
            }
            self.lex_struct = other.lex_struct;
        }
        if self.meta == RunMeta::default() {
            self.meta = other.meta;
        }
        Ok(self)
    }

    /// Flat `name -> value` view used for aggregation and tables.
    pub fn metrics(&self) -> BTreeMap<String, f64> {
        let mut m = BTreeMap::new();
        for (k, s) in &self.per_split {
            m.insert(k.clone(), s.accuracy());
        }
        for (k, s) in &self.per_category {
            m.insert(alloc::format!("category/{k}"), s.accuracy());
        }
        if let Some(n) = self.novel_token_rate {
            m.insert("novel_token_rate".into(), n.accuracy());
        }
        if let Some(ls) = self.lex_struct {
            m.insert("lexical".into(), ls.lexical.accuracy());
            m.insert("structural".into(), ls.structural.accuracy());
        }
        m
    }
}

fn split_key(name: SplitName) -> &'static str {
    match name {
        SplitName::Train => "train",
        SplitName::Dev => "dev",
        SplitName::Test => "test_id",
        SplitName::Gen => "gen",
        SplitName::Testlex => "test_lex",
    }
}

/// Scores `preds` against `reference`. On the gen split, categories listed in
/// `structural_tags` are excluded from `gen_lex_only` and from the
/// novel-token rate.
pub fn evaluate_split(
    preds: &PredictionFile,
    reference: &SplitFile,
    plan: Option<&SubstitutionPlan>,
    policy: MatchPolicy,
    structural_tags: &[&str],
) -> Result<EvalReport, EvalError> {
    if preds.rows.len() != reference.rows.len() {
        return Err(EvalError::RowCount {
            predictions: preds.rows.len(),
            reference: reference.rows.len(),
        });
    }
    let tokens: Vec<&str> = plan.map(|p| p.replacements().collect()).unwrap_or_default();
    let structural: BTreeSet<&str> = structural_tags.iter().copied().collect();
    let is_gen = reference.name == SplitName::Gen;
    let key = split_key(reference.name);

    let mut whole = Score::default();
    let mut whole_other = Score::default();
    let mut lex = Score::default();
    let mut lex_other = Score::default();
    let mut strc = Score::default();
    let mut novel = Score::default();
    let mut per_category: BTreeMap<String, Score> = BTreeMap::new();

    for (pred, gold) in preds.rows.iter().zip(&reference.rows) {
        let hit = exact_match(pred, &gold.target, policy, &tokens);
        let hit_other = exact_match(pred, &gold.target, policy.other(), &tokens);
        whole.add(hit);
        whole_other.add(hit_other);
        per_category.entry(gold.category.clone()).or_default().add(hit);
        if is_gen {
            if structural.contains(gold.category.as_str()) {
                strc.add(hit);
            } else {
                lex.add(hit);
                lex_other.add(hit_other);
                if plan.is_some() {
                    novel.add(tokens.iter().any(|t| pred.contains(t)));
                }
            }
        }
    }

    let mut per_split = BTreeMap::new();
    let mut other_policy = BTreeMap::new();
    per_split.insert(key.to_string(), whole);
    if whole_other != whole {
        other_policy.insert(key.to_string(), whole_other);
    }
    if is_gen {
        per_split.insert("gen_lex_only".to_string(), lex);
        if lex_other != lex {
            other_policy.insert("gen_lex_only".to_string(), lex_other);
        }
    }
    Ok(EvalReport {
        meta: preds.meta.clone(),
        policy,
        per_split,
        per_category,
        novel_token_rate: (is_gen && plan.is_some()).then_some(novel),
        lex_struct: is_gen.then_some(LexStruct {
            lexical: lex,
            structural: strc,
        }),
        other_policy,
    })
}

fn check_unit(x: f64) -> Result<f64, EvalError> {
    if (0.0..=1.0).contains(&x) {
        Ok(x)
    } else {
        Err(EvalError::OutOfRange(x))
    }
}

/// Accuracy lost when lexical exposure is controlled.
pub fn overestimation(baseline_acc: f64, controlled_acc: f64) -> Result<f64, EvalError> {
    Ok(check_unit(baseline_acc)? - check_unit(controlled_acc)?)
}

/// `|test_lex - gen_lex_only|` of one report.
pub fn test_lex_gap(report: &EvalReport) -> Result<f64, EvalError> {
    test_lex_gap_values(report.accuracy("test_lex")?, report.accuracy("gen_lex_only")?)
}

pub fn test_lex_gap_values(test_lex: f64, gen_lex_only: f64) -> Result<f64, EvalError> {
    Ok((check_unit(test_lex)? - check_unit(gen_lex_only)?).abs())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MetricStat {
    pub mean: f64,
    /// Sample standard deviation; absent when n = 1.
    pub std: Option<f64>,
    pub n: usize,
}

pub fn mean_std(values: &[f64]) -> MetricStat {
    let n = values.len();
    let mean = values.iter().sum::<f64>() / n as f64;
    let std = (n > 1).then(|| {
        let ss: f64 = values.iter().map(|v| (v - mean) * (v - mean)).sum();
        libm::sqrt(ss / (n - 1) as f64)
    });
    MetricStat { mean, std, n }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AggregateReport {
    pub policy: MatchPolicy,
    pub seeds: Vec<Option<String>>,
    pub metrics: BTreeMap<String, MetricStat>,
}

impl AggregateReport {
    pub fn get(&self, metric: &str) -> Result<&MetricStat, EvalError> {
        self.metrics.get(metric).ok_or_else(|| EvalError::MissingMetric(metric.to_string()))
    }

    /// Gap between the Test-Lex and Gen-Lex means.
    pub fn test_lex_gap(&self) -> Result<f64, EvalError> {
        test_lex_gap_values(self.get("test_lex")?.mean, self.get("gen_lex_only")?.mean)
    }
}

/// Per-metric mean and sample std across seeds. All reports must expose the
/// same metric set and policy.
pub fn aggregate_seeds(reports: &[EvalReport]) -> Result<AggregateReport, EvalError> {
    let first = reports.first().ok_or(EvalError::NoReports)?;
    let keys: Vec<String> = first.metrics().into_keys().collect();
    let mut columns: BTreeMap<String, Vec<f64>> = keys.iter().map(|k| (k.clone(), Vec::new())).collect();
    for (index, r) in reports.iter().enumerate() {
        if r.policy != first.policy {
            return Err(EvalError::MixedPolicies);
        }
        let m = r.metrics();
        if let Some(diff) = m
            .keys()
            .filter(|k| !columns.contains_key(*k))
            .chain(keys.iter().filter(|k| !m.contains_key(*k)))
            .next()
        {
            return Err(EvalError::MismatchedMetrics {
                index,
                metric: diff.clone(),
            });
        }
        for (k, v) in m {
            columns.get_mut(&k).expect("checked").push(v);
        }
    }
    Ok(AggregateReport {
        policy: first.policy,
        seeds: reports.iter().map(|r| r.meta.seed.clone()).collect(),
        metrics: columns.into_iter().map(|(k, v)| (k, mean_std(&v))).collect(),
    })
}
