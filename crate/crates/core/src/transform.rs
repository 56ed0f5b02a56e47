//! Substitution plans: replacing controlled items with novel character
//! sequences or sentinel tokens, consistently in sentences and logical forms.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::fmt;
use core::ops::Range;
use core::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::dataset::{Example, SplitFile, SplitName};
use crate::lexicon::ControlledItem;
use crate::lf::{is_identifier, parse_lf_spanned, ParseError};
use crate::sampler::{sample_sequences, SamplerConfig, SamplerError};
use crate::text::{sentence_tokens, splice};

pub const DEFAULT_SENTINEL_TEMPLATE: &str = "[w{n}]";
/// Visible whitespace marker used by SentencePiece vocabularies.
pub const WHITESPACE_MARKER_ESCAPED: &str = "\\u2581";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PlanMode {
    Charseq,
    Sentinel,
}

impl FromStr for PlanMode {
    type Err = TransformError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "charseq" => Ok(PlanMode::Charseq),
            "sentinel" => Ok(PlanMode::Sentinel),
            _ => Err(TransformError::UnknownOption(s.to_string())),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PlanEntry {
    pub item: ControlledItem,
    pub replacement: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SubstitutionPlan {
    pub mode: PlanMode,
    pub entries: Vec<PlanEntry>,
    pub sentinel_template: String,
    /// Sampler settings used in charseq mode.
    pub sampler: Option<SamplerConfig>,
    pub blocklist_size: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum TransformError {
    #[error("no controlled items to substitute")]
    NoItems,
    #[error("duplicate lemma {0:?} in item list")]
    DuplicateLemma(String),
    #[error("charseq mode needs a sampler configuration")]
    MissingSampler,
    #[error(transparent)]
    Sampler(#[from] SamplerError),
    #[error("sentinel template {0:?} must contain exactly one {{n}} and form a single LF identifier")]
    BadTemplate(String),
    #[error("replacement {replacement:?} collides with {what}")]
    Collision { replacement: String, what: String },
    #[error("{split} line {line}: {source}")]
    Parse {
        split: SplitName,
        line: usize,
        source: ParseError,
    },
    #[error("{split} line {line}: {message}")]
    Consistency {
        split: SplitName,
        line: usize,
        message: String,
    },
    #[error("{split} line {line}: cannot invert {replacement:?}: item {lemma:?} has several surface forms")]
    AmbiguousInflection {
        split: SplitName,
        line: usize,
        replacement: String,
        lemma: String,
    },
    #[error("a vocabulary manifest only applies to sentinel plans")]
    NotSentinel,
    #[error("manifest line {line}: {message}")]
    Manifest { line: usize, message: String },
    #[error("unknown option {0:?}")]
    UnknownOption(String),
}

fn instantiate(template: &str, n: usize) -> String {
    template.replace("{n}", &n.to_string())
}

/// Builds a one-to-one plan. Entries follow lemma order; sentinels are
/// numbered in that order.
pub fn build_plan(
    items: &[ControlledItem],
    mode: PlanMode,
    sampler: Option<&SamplerConfig>,
    sentinel_template: Option<&str>,
) -> Result<SubstitutionPlan, TransformError> {
    if items.is_empty() {
        return Err(TransformError::NoItems);
    }
    let mut sorted: Vec<ControlledItem> = items.to_vec();
    sorted.sort_by(|a, b| a.lemma.cmp(&b.lemma));
    for w in sorted.windows(2) {
        if w[0].lemma == w[1].lemma {
            return Err(TransformError::DuplicateLemma(w[0].lemma.clone()));
        }
    }
    let template = sentinel_template.unwrap_or(DEFAULT_SENTINEL_TEMPLATE);

    let (replacements, sampler_cfg, blocklist_size) = match mode {
        PlanMode::Sentinel => {
            if template.matches("{n}").count() != 1 || !is_identifier(&instantiate(template, 0)) || template.contains('\\') {
                return Err(TransformError::BadTemplate(template.to_string()));
            }
            let r: Vec<String> = (0..sorted.len()).map(|n| instantiate(template, n)).collect();
            (r, None, 0)
        }
        PlanMode::Charseq => {
            let cfg = sampler.ok_or(TransformError::MissingSampler)?;
            let mut cfg = cfg.clone();
            cfg.count = sorted.len();
            let mut block = cfg.blocklist.clone();
            for it in &sorted {
                block.push(it.lemma.clone());
                block.extend(it.surface_forms.iter().cloned());
            }
            cfg.blocklist = block;
            let r = sample_sequences(&cfg)?;
            let size = cfg.blocklist.len();
            cfg.blocklist.clear();
            (r, Some(cfg), size)
        }
    };

    for r in &replacements {
        for it in &sorted {
            if it.lemma == *r || it.surface_forms.iter().any(|f| f == r) {
                return Err(TransformError::Collision {
                    replacement: r.clone(),
                    what: format!("item {:?}", it.lemma),
                });
            }
        }
    }

    Ok(SubstitutionPlan {
        mode,
        entries: sorted
            .into_iter()
            .zip(replacements)
            .map(|(item, replacement)| PlanEntry { item, replacement })
            .collect(),
        sentinel_template: template.to_string(),
        sampler: sampler_cfg,
        blocklist_size,
    })
}

impl SubstitutionPlan {
    pub fn replacements(&self) -> impl Iterator<Item = &str> {
        self.entries.iter().map(|e| e.replacement.as_str())
    }

    pub fn items(&self) -> impl Iterator<Item = &ControlledItem> {
        self.entries.iter().map(|e| &e.item)
    }

    /// Items realized by more than one word form; inversion is ambiguous
    /// for them.
    pub fn multi_form_items(&self) -> Vec<&ControlledItem> {
        self.items().filter(|i| i.surface_forms.len() > 1).collect()
    }

    /// Fails if a replacement already appears as a token of `vocabulary`.
    pub fn check_novel<'a>(&self, vocabulary: impl IntoIterator<Item = &'a str>) -> Result<(), TransformError> {
        let reps: BTreeSet<&str> = self.replacements().collect();
        for w in vocabulary {
            for r in &reps {
                if w == *r || (self.mode == PlanMode::Charseq && w.to_ascii_lowercase().contains(*r)) {
                    return Err(TransformError::Collision {
                        replacement: r.to_string(),
                        what: format!("dataset token {w:?}"),
                    });
                }
            }
        }
        Ok(())
    }
}

struct RowEdit {
    sentence: Vec<(Range<usize>, String)>,
    target: Vec<(Range<usize>, String)>,
}

fn rewrite_split<F>(split: &SplitFile, mut f: F) -> Result<SplitFile, TransformError>
where
    F: FnMut(usize, &Example) -> Result<Option<RowEdit>, TransformError>,
{
    let mut rows = Vec::with_capacity(split.rows.len());
    for (i, row) in split.rows.iter().enumerate() {
        match f(i + 1, row)? {
            None => rows.push(row.clone()),
            Some(mut edit) => rows.push(Example {
                source: splice(&row.source, &mut edit.sentence),
                target: splice(&row.target, &mut edit.target),
                category: row.category.clone(),
            }),
        }
    }
    Ok(SplitFile {
        name: split.name,
        rows,
        trailing_newline: split.trailing_newline,
    })
}

/// Byte ranges of LF words (lemmas and names), paired with their text.
fn lf_words(split: SplitName, line: usize, target: &str) -> Result<Vec<(Range<usize>, &str)>, TransformError> {
    let (_, spans) = parse_lf_spanned(target).map_err(|source| TransformError::Parse { split, line, source })?;
    let mut out: Vec<(Range<usize>, &str)> = spans
        .definites
        .into_iter()
        .chain(spans.atoms)
        .map(|r| {
            let w = &target[r.clone()];
            (r, w)
        })
        .collect();
    out.extend(spans.names.into_iter().map(|(r, _)| {
        let w = &target[r.clone()];
        (r, w)
    }));
    Ok(out)
}

fn consistency(split: SplitName, line: usize, in_sentence: &BTreeSet<&str>, in_lf: &BTreeSet<&str>) -> Result<(), TransformError> {
    if let Some(l) = in_lf.difference(in_sentence).next() {
        return Err(TransformError::Consistency {
            split,
            line,
            message: format!("item {l:?} appears in the logical form but none of its surface forms is in the sentence"),
        });
    }
    if let Some(l) = in_sentence.difference(in_lf).next() {
        return Err(TransformError::Consistency {
            split,
            line,
            message: format!("a surface form of item {l:?} appears in the sentence but the logical form lacks it"),
        });
    }
    Ok(())
}

/// Substitutes every controlled item in sentences (whole tokens) and logical
/// forms (lemmas and names). Rows without controlled items are untouched.
pub fn apply_plan(split: &SplitFile, plan: &SubstitutionPlan) -> Result<SplitFile, TransformError> {
    let mut by_lemma: BTreeMap<&str, &PlanEntry> = BTreeMap::new();
    let mut by_form: BTreeMap<&str, &PlanEntry> = BTreeMap::new();
    for e in &plan.entries {
        by_lemma.insert(&e.item.lemma, e);
        for f in &e.item.surface_forms {
            by_form.insert(f, e);
        }
    }
    let reps: BTreeSet<&str> = plan.replacements().collect();

    rewrite_split(split, |line, row| {
        let mut edit = RowEdit {
            sentence: Vec::new(),
            target: Vec::new(),
        };
        let mut in_sentence = BTreeSet::new();
        let mut in_lf = BTreeSet::new();
        for tok in sentence_tokens(&row.source) {
            let w = &row.source[tok.word.clone()];
            if reps.contains(w) {
                return Err(TransformError::Collision {
                    replacement: w.to_string(),
                    what: format!("{} line {line} of the input", split.name),
                });
            }
            if let Some(e) = by_form.get(w) {
                in_sentence.insert(e.item.lemma.as_str());
                edit.sentence.push((tok.word, e.replacement.clone()));
            }
        }
        for (range, w) in lf_words(split.name, line, &row.target)? {
            if reps.contains(w) {
                return Err(TransformError::Collision {
                    replacement: w.to_string(),
                    what: format!("{} line {line} of the input", split.name),
                });
            }
            if let Some(e) = by_lemma.get(w) {
                in_lf.insert(e.item.lemma.as_str());
                edit.target.push((range, e.replacement.clone()));
            }
        }
        consistency(split.name, line, &in_sentence, &in_lf)?;
        Ok((!in_lf.is_empty()).then_some(edit))
    })
}

/// Undoes [`apply_plan`].
pub fn invert_plan(split: &SplitFile, plan: &SubstitutionPlan) -> Result<SplitFile, TransformError> {
    let by_rep: BTreeMap<&str, &PlanEntry> = plan.entries.iter().map(|e| (e.replacement.as_str(), e)).collect();

    rewrite_split(split, |line, row| {
        let mut edit = RowEdit {
            sentence: Vec::new(),
            target: Vec::new(),
        };
        let mut in_sentence = BTreeSet::new();
        let mut in_lf = BTreeSet::new();
        for tok in sentence_tokens(&row.source) {
            let w = &row.source[tok.word.clone()];
            if let Some(e) = by_rep.get(w) {
                let [form] = e.item.surface_forms.as_slice() else {
                    return Err(TransformError::AmbiguousInflection {
                        split: split.name,
                        line,
                        replacement: w.to_string(),
                        lemma: e.item.lemma.clone(),
                    });
                };
                in_sentence.insert(e.replacement.as_str());
                edit.sentence.push((tok.word, form.clone()));
            }
        }
        for (range, w) in lf_words(split.name, line, &row.target)? {
            if let Some(e) = by_rep.get(w) {
                in_lf.insert(e.replacement.as_str());
                edit.target.push((range, e.item.lemma.clone()));
            }
        }
        consistency(split.name, line, &in_sentence, &in_lf).map_err(|e| match e {
            TransformError::Consistency { split, line, .. } => TransformError::Consistency {
                split,
                line,
                message: String::from("replacement present in only one of sentence and logical form"),
            },
            other => other,
        })?;
        Ok((!in_lf.is_empty()).then_some(edit))
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum InitScheme {
    #[serde(rename = "random")]
    Random,
    #[serde(rename = "avgWithNoise")]
    AvgWithNoise,
    #[serde(rename = "unusedEmbeddings")]
    UnusedEmbeddings,
}

impl InitScheme {
    pub fn as_str(self) -> &'static str {
        match self {
            InitScheme::Random => "random",
            InitScheme::AvgWithNoise => "avgWithNoise",
            InitScheme::UnusedEmbeddings => "unusedEmbeddings",
        }
    }
}

impl FromStr for InitScheme {
    type Err = TransformError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        [InitScheme::Random, InitScheme::AvgWithNoise, InitScheme::UnusedEmbeddings]
            .into_iter()
            .find(|i| i.as_str() == s)
            .ok_or_else(|| TransformError::UnknownOption(s.to_string()))
    }
}

impl fmt::Display for InitScheme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// How new tokens enter a whitespace-sensitive subword tokenizer.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum AddStrategy {
    /// Add " tok" and then "tok", in that order.
    BothVariants,
    /// Data rewrites sequence-initial tokens to " tok"; only " tok" is added.
    InitialPrepended,
}

impl AddStrategy {
    pub fn as_str(self) -> &'static str {
        match self {
            AddStrategy::BothVariants => "both-variants",
            AddStrategy::InitialPrepended => "initial-prepended",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct VocabularyManifest {
    /// (whitespace-prepended form, bare form) per token.
    pub tokens: Vec<(String, String)>,
    pub init_scheme: InitScheme,
    pub strategy: AddStrategy,
    pub notes: String,
}

pub fn emit_manifest(plan: &SubstitutionPlan, init_scheme: InitScheme) -> Result<VocabularyManifest, TransformError> {
    if plan.mode != PlanMode::Sentinel {
        return Err(TransformError::NotSentinel);
    }
    Ok(VocabularyManifest {
        tokens: plan.replacements().map(|r| (format!(" {r}"), r.to_string())).collect(),
        init_scheme,
        strategy: AddStrategy::BothVariants,
        notes: String::new(),
    })
}

fn escape_token(t: &str) -> String {
    t.replace(' ', WHITESPACE_MARKER_ESCAPED)
}

fn unescape_token(t: &str) -> String {
    t.replace(WHITESPACE_MARKER_ESCAPED, " ")
}

impl VocabularyManifest {
    /// Tokens in the order they must be added to the tokenizer.
    pub fn add_order(&self) -> Vec<&str> {
        let mut out = Vec::with_capacity(self.tokens.len() * 2);
        for (spaced, bare) in &self.tokens {
            out.push(spaced.as_str());
            if self.strategy == AddStrategy::BothVariants {
                out.push(bare.as_str());
            }
        }
        out
    }

    /// `ADD<TAB>token` lines in add order, then `INIT`, `STRATEGY` and
    /// optional `NOTE` lines. Spaces are written as a literal `▁`.
    pub fn to_file_string(&self) -> String {
        let mut out = String::new();
        for t in self.add_order() {
            out.push_str("ADD\t");
            out.push_str(&escape_token(t));
            out.push('\n');
        }
        out.push_str("INIT\t");
        out.push_str(self.init_scheme.as_str());
        out.push('\n');
        out.push_str("STRATEGY\t");
        out.push_str(self.strategy.as_str());
        out.push('\n');
        for n in self.notes.lines() {
            out.push_str("NOTE\t");
            out.push_str(n);
            out.push('\n');
        }
        out
    }

    pub fn parse(text: &str) -> Result<VocabularyManifest, TransformError> {
        let bad = |line: usize, message: &str| TransformError::Manifest {
            line,
            message: message.to_string(),
        };
        let mut adds: Vec<String> = Vec::new();
        let mut init = None;
        let mut strategy = AddStrategy::BothVariants;
        let mut notes: Vec<&str> = Vec::new();
        for (i, line) in text.lines().enumerate() {
            let (key, val) = line.split_once('\t').ok_or_else(|| bad(i + 1, "expected KEY<TAB>value"))?;
            match key {
                "ADD" if init.is_none() => adds.push(unescape_token(val)),
                "ADD" => return Err(bad(i + 1, "ADD after INIT")),
                "INIT" => init = Some(val.parse::<InitScheme>().map_err(|_| bad(i + 1, "unknown init scheme"))?),
                "STRATEGY" => {
                    strategy = match val {
                        "both-variants" => AddStrategy::BothVariants,
                        "initial-prepended" => AddStrategy::InitialPrepended,
                        _ => return Err(bad(i + 1, "unknown strategy")),
                    }
                }
                "NOTE" => notes.push(val),
                _ => return Err(bad(i + 1, "unknown key")),
            }
        }
        let init_scheme = init.ok_or_else(|| bad(text.lines().count(), "missing INIT line"))?;
        let mut tokens = Vec::new();
        match strategy {
            AddStrategy::BothVariants => {
                if !adds.len().is_multiple_of(2) {
                    return Err(bad(0, "odd number of ADD lines"));
                }
                for pair in adds.chunks(2) {
                    if pair[0] != format!(" {}", pair[1]) {
                        return Err(bad(0, "whitespace-prepended form must precede its bare form"));
                    }
                    tokens.push((pair[0].clone(), pair[1].clone()));
                }
            }
            AddStrategy::InitialPrepended => {
                for a in adds {
                    let bare = a.strip_prefix(' ').ok_or_else(|| bad(0, "expected whitespace-prepended token"))?.to_string();
                    tokens.push((a, bare));
                }
            }
        }
        Ok(VocabularyManifest {
            tokens,
            init_scheme,
            strategy,
            notes: notes.join("\n"),
        })
    }
}
