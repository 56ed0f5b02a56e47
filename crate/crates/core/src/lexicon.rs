//! Context-controlled lexical items: inferred from the splits or declared in
//! a manifest.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::string::{String, ToString};
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::dataset::{DatasetError, SplitFile};
use crate::lf::LogicalForm;
use crate::slots::{row_slots, SlotClass};
use crate::text::sentence_tokens;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ControlledItem {
    /// Predicate lemma or proper-name constant as it appears in logical forms.
    pub lemma: String,
    /// Sentence word forms realizing the item, sorted.
    pub surface_forms: Vec<String>,
    /// 0-based row indices into the training split.
    pub exposure_rows: Vec<usize>,
    /// Context of the item in its first exposure row.
    pub exposure_role: Option<SlotClass>,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum LexiconError {
    #[error("{split} {source}")]
    Dataset { split: &'static str, source: DatasetError },
    #[error("manifest line {line}: expected `lemma<TAB>form[,form...]`")]
    ManifestLine { line: usize },
    #[error("manifest is not valid UTF-8")]
    ManifestUtf8,
    #[error("lemma not found: {0}")]
    LemmaNotFound(String),
    #[error("duplicate lemma in manifest: {0}")]
    DuplicateLemma(String),
}

fn parse_split(split: &SplitFile) -> Result<Vec<LogicalForm>, LexiconError> {
    split.parse_all().map_err(|source| LexiconError::Dataset {
        split: split.name.as_str(),
        source,
    })
}

/// Word forms in `sentence` that realize `key` according to `lf`.
fn surface_forms_in(sentence: &str, lf: &LogicalForm, key: &str) -> BTreeSet<String> {
    let toks = sentence_tokens(sentence);
    let mut forms = BTreeSet::new();
    for slot in row_slots(sentence, lf) {
        if slot.key != key {
            continue;
        }
        if let Some(tok) = slot.token.and_then(|i| toks.get(i)) {
            let w = &sentence[tok.word.clone()];
            if !w.is_empty() {
                forms.insert(w.to_string());
            }
        }
    }
    if forms.is_empty() {
        // fall back to a literal occurrence of the key
        if toks.iter().any(|t| &sentence[t.word.clone()] == key) {
            forms.insert(key.to_string());
        }
    }
    forms
}

fn exposure_role(sentence: &str, lf: &LogicalForm, key: &str) -> Option<SlotClass> {
    row_slots(sentence, lf).into_iter().find(|s| s.key == key).map(|s| s.class)
}

/// Items whose lexical key occurs in exactly one training row and in at
/// least one generalization row. Sorted by lemma.
pub fn infer_controlled_items(train: &SplitFile, gen: &SplitFile) -> Result<Vec<ControlledItem>, LexiconError> {
    let train_lfs = parse_split(train)?;
    let gen_lfs = parse_split(gen)?;

    let mut rows_by_key: BTreeMap<&str, Vec<usize>> = BTreeMap::new();
    for (i, lf) in train_lfs.iter().enumerate() {
        for k in lf.lexical_keys() {
            rows_by_key.entry(k).or_default().push(i);
        }
    }
    let gen_keys: BTreeSet<&str> = gen_lfs.iter().flat_map(|lf| lf.lexical_keys()).collect();

    let mut items = Vec::new();
    for (key, rows) in rows_by_key {
        if rows.len() != 1 || !gen_keys.contains(key) {
            continue;
        }
        let row = rows[0];
        let ex = &train.rows[row];
        let lf = &train_lfs[row];
        let mut forms = surface_forms_in(&ex.source, lf, key);
        if forms.is_empty() {
            forms.insert(key.to_string());
        }
        items.push(ControlledItem {
            lemma: key.to_string(),
            surface_forms: forms.into_iter().collect(),
            exposure_rows: rows,
            exposure_role: exposure_role(&ex.source, lf, key),
        });
    }
    Ok(items)
}

/// Loads a `lemma<TAB>form,form` manifest and resolves exposure rows against
/// the training split.
pub fn load_controlled_items(manifest: &[u8], train: &SplitFile) -> Result<Vec<ControlledItem>, LexiconError> {
    let text = core::str::from_utf8(manifest).map_err(|_| LexiconError::ManifestUtf8)?;
    let train_lfs = parse_split(train)?;
    let mut items: Vec<ControlledItem> = Vec::new();
    for (i, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let mut cols = line.split('\t');
        let (Some(lemma), Some(forms), None) = (cols.next(), cols.next(), cols.next()) else {
            return Err(LexiconError::ManifestLine { line: i + 1 });
        };
        let lemma = lemma.trim();
        let mut surface: Vec<String> = forms
            .split(',')
            .map(str::trim)
            .filter(|f| !f.is_empty())
            .map(String::from)
            .collect();
        if lemma.is_empty() || surface.is_empty() {
            return Err(LexiconError::ManifestLine { line: i + 1 });
        }
        surface.sort();
        surface.dedup();
        if items.iter().any(|it| it.lemma == lemma) {
            return Err(LexiconError::DuplicateLemma(lemma.to_string()));
        }
        let rows: Vec<usize> = train_lfs
            .iter()
            .enumerate()
            .filter(|(_, lf)| lf.lexical_keys().contains(lemma))
            .map(|(i, _)| i)
            .collect();
        let Some(&first) = rows.first() else {
            return Err(LexiconError::LemmaNotFound(lemma.to_string()));
        };
        items.push(ControlledItem {
            lemma: lemma.to_string(),
            surface_forms: surface,
            exposure_role: exposure_role(&train.rows[first].source, &train_lfs[first], lemma),
            exposure_rows: rows,
        });
    }
    items.sort_by(|a, b| a.lemma.cmp(&b.lemma));
    Ok(items)
}

/// Renders items in the manifest format read by [`load_controlled_items`].
pub fn render_manifest(items: &[ControlledItem]) -> String {
    let mut out = String::new();
    for it in items {
        out.push_str(&it.lemma);
        out.push('\t');
        out.push_str(&it.surface_forms.join(","));
        out.push('\n');
    }
    out
}

/// Number of training rows mentioning `lemma` in their logical form.
pub fn count_rows_with(split: &SplitFile, lemma: &str) -> Result<usize, LexiconError> {
    Ok(parse_split(split)?.iter().filter(|lf| lf.lexical_keys().contains(lemma)).count())
}
