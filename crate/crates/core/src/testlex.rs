//! Test-Lex: in-distribution uses of controlled items, built by swapping an
//! item into a training row slot of the same context class.
//!
//! Items whose exposure is a primitive row have no in-distribution sentence
//! context and get no Test-Lex rows; the total is split across the rest.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::ops::Range;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::dataset::{Example, SplitFile, SplitName};
use crate::lexicon::ControlledItem;
use crate::lf::{parse_lf_spanned, LogicalForm, Term};
use crate::slots::{row_slots, Slot, SlotClass};
use crate::text::{sentence_tokens, splice};

pub const CATEGORY_PREFIX: &str = "test_lex_";
pub const DEFAULT_TOTAL: usize = 12_000;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TestLexConfig {
    pub total: usize,
    pub seed: u64,
    pub per_item_cap: Option<usize>,
}

impl Default for TestLexConfig {
    fn default() -> Self {
        TestLexConfig {
            total: DEFAULT_TOTAL,
            seed: 0,
            per_item_cap: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum TestLexError {
    #[error("no controlled item has a sentence exposure context")]
    NoEligibleItems,
    #[error("total {total} is smaller than the number of eligible items ({items})")]
    TotalTooSmall { total: usize, items: usize },
    #[error("item {0:?} has no exposure context")]
    NoExposureRole(String),
    #[error("no compatible template rows for item {0:?}")]
    NoTemplates(String),
    #[error("item {lemma:?}: only {got} distinct rows reachable, {wanted} requested")]
    QuotaUnreachable { lemma: String, wanted: usize, got: usize },
    #[error("training row {line}: {message}")]
    Train { line: usize, message: String },
}

pub fn category_for(lemma: &str) -> String {
    let mut s = String::from(CATEGORY_PREFIX);
    s.push_str(lemma);
    s
}

/// Items that can receive Test-Lex rows: those exposed in a sentence.
pub fn eligible_items(items: &[ControlledItem]) -> Vec<&ControlledItem> {
    items
        .iter()
        .filter(|i| !matches!(i.exposure_role, None | Some(SlotClass::Primitive)))
        .collect()
}

/// Per-item row counts: an even split with the remainder handed out one by
/// one in lemma order, each capped by `per_item_cap`.
pub fn allocate(lemmas: &[&str], config: &TestLexConfig) -> Vec<usize> {
    let k = lemmas.len();
    if k == 0 {
        return Vec::new();
    }
    let mut order: Vec<usize> = (0..k).collect();
    order.sort_by_key(|&i| lemmas[i]);
    let base = config.total / k;
    let rem = config.total % k;
    let mut quota = alloc::vec![base; k];
    for &i in order.iter().take(rem) {
        quota[i] += 1;
    }
    if let Some(cap) = config.per_item_cap {
        for q in &mut quota {
            *q = (*q).min(cap);
        }
    }
    quota
}

struct Template<'a> {
    row: usize,
    example: &'a Example,
    lf: LogicalForm,
    lf_spans: crate::lf::LfSpans,
    slots: Vec<Slot>,
}

fn is_ing(word: &str) -> bool {
    word.ends_with("ing")
}

/// The item's form matching the inflection of `template_word`.
fn pick_form<'a>(item: &'a ControlledItem, template_word: &str) -> Option<&'a str> {
    item.surface_forms
        .iter()
        .find(|f| is_ing(f) == is_ing(template_word))
        .map(String::as_str)
}

/// Byte ranges in the LF text naming `slot`.
fn lf_ranges(t: &Template<'_>, slot: &Slot) -> Vec<Range<usize>> {
    let mut out = Vec::new();
    match &slot.class {
        SlotClass::Noun { .. } => {
            let v = Term::Var(slot.var.expect("noun slots carry a variable"));
            for (d, span) in t.lf.definites.iter().zip(&t.lf_spans.definites) {
                if d.lemma == slot.key && d.term == v {
                    out.push(span.clone());
                }
            }
            for (a, span) in t.lf.atoms.iter().zip(&t.lf_spans.atoms) {
                if a.lemma == slot.key && a.roles.is_empty() && a.args.len() == 1 && a.args[0] == v {
                    out.push(span.clone());
                }
            }
        }
        SlotClass::Verb { .. } => {
            let v = Term::Var(slot.var.expect("verb slots carry a variable"));
            for (a, span) in t.lf.atoms.iter().zip(&t.lf_spans.atoms) {
                if a.lemma == slot.key && !a.roles.is_empty() && a.args.first() == Some(&v) {
                    out.push(span.clone());
                }
            }
        }
        SlotClass::Name { .. } => {
            for (span, n) in &t.lf_spans.names {
                if *n == slot.key {
                    out.push(span.clone());
                }
            }
        }
        SlotClass::Primitive => {}
    }
    out
}

/// Swaps `item` into `slot` of the template; None if the forms do not fit.
fn swap(t: &Template<'_>, slot: &Slot, item: &ControlledItem) -> Option<Example> {
    let toks = sentence_tokens(&t.example.source);
    let target_tok = toks.get(slot.token?)?;
    let old_word = &t.example.source[target_tok.word.clone()];
    let form = pick_form(item, old_word)?;
    let mut sent_edits: Vec<(Range<usize>, String)> = match slot.class {
        // a name may recur in the sentence; every occurrence is the same entity
        SlotClass::Name { .. } => toks
            .iter()
            .filter(|tk| t.example.source[tk.word.clone()] == *old_word)
            .map(|tk| (tk.word.clone(), form.to_string()))
            .collect(),
        _ => alloc::vec![(target_tok.word.clone(), form.to_string())],
    };
    let mut lf_edits: Vec<(Range<usize>, String)> =
        lf_ranges(t, slot).into_iter().map(|r| (r, item.lemma.clone())).collect();
    if lf_edits.is_empty() {
        return None;
    }
    Some(Example::new(
        splice(&t.example.source, &mut sent_edits),
        splice(&t.example.target, &mut lf_edits),
        category_for(&item.lemma),
    ))
}

fn class_of(example: &Example, lemma: &str) -> Result<Vec<SlotClass>, String> {
    let (lf, _) = parse_lf_spanned(&example.target).map_err(|e| e.to_string())?;
    Ok(row_slots(&example.source, &lf)
        .into_iter()
        .filter(|s| s.key == lemma)
        .map(|s| s.class)
        .collect())
}

fn item_seed(seed: u64, lemma: &str) -> u64 {
    // FNV-1a over the lemma, mixed with the run seed
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for b in lemma.bytes() {
        h ^= u64::from(b);
        h = h.wrapping_mul(0x0000_0100_0000_01b3);
    }
    h ^ seed.rotate_left(17)
}

/// Builds the Test-Lex split. Rows are grouped by item in lemma order.
pub fn generate_test_lex(
    train: &SplitFile,
    items: &[ControlledItem],
    config: &TestLexConfig,
) -> Result<SplitFile, TestLexError> {
    let eligible = eligible_items(items);
    if let Some(it) = items.iter().find(|i| i.exposure_role.is_none()) {
        return Err(TestLexError::NoExposureRole(it.lemma.clone()));
    }
    if eligible.is_empty() {
        return Err(TestLexError::NoEligibleItems);
    }
    if config.total < eligible.len() {
        return Err(TestLexError::TotalTooSmall {
            total: config.total,
            items: eligible.len(),
        });
    }

    let controlled: BTreeSet<&str> = items.iter().map(|i| i.lemma.as_str()).collect();
    let train_sources: BTreeSet<&str> = train.rows.iter().map(|r| r.source.as_str()).collect();

    // templates: training rows without any controlled item
    let mut templates = Vec::new();
    for (row, ex) in train.rows.iter().enumerate() {
        let (lf, lf_spans) = parse_lf_spanned(&ex.target).map_err(|e| TestLexError::Train {
            line: row + 1,
            message: e.to_string(),
        })?;
        if lf.lexical_keys().iter().any(|k| controlled.contains(k)) {
            continue;
        }
        let slots = row_slots(&ex.source, &lf);
        templates.push(Template {
            row,
            example: ex,
            lf,
            lf_spans,
            slots,
        });
    }
    let mut by_class: BTreeMap<&SlotClass, Vec<(usize, usize)>> = BTreeMap::new();
    for (ti, t) in templates.iter().enumerate() {
        for (si, s) in t.slots.iter().enumerate() {
            if s.token.is_some() && s.class != SlotClass::Primitive {
                by_class.entry(&s.class).or_default().push((ti, si));
            }
        }
    }

    let lemmas: Vec<&str> = eligible.iter().map(|i| i.lemma.as_str()).collect();
    let quotas = allocate(&lemmas, config);
    let mut order: Vec<usize> = (0..eligible.len()).collect();
    order.sort_by_key(|&i| lemmas[i]);

    let mut rows = Vec::with_capacity(config.total);
    for i in order {
        let item = eligible[i];
        let class = item.exposure_role.as_ref().expect("eligible");
        let wanted = quotas[i];
        let Some(pool) = by_class.get(class) else {
            return Err(TestLexError::NoTemplates(item.lemma.clone()));
        };
        let mut pool = pool.clone();
        let mut rng = ChaCha8Rng::seed_from_u64(item_seed(config.seed, &item.lemma));
        pool.shuffle(&mut rng);

        let mut seen: BTreeSet<String> = BTreeSet::new();
        let mut got = Vec::with_capacity(wanted);
        let mut any_fit = false;
        for (ti, si) in pool {
            if got.len() == wanted {
                break;
            }
            let t = &templates[ti];
            let slot = &t.slots[si];
            let Some(ex) = swap(t, slot, item) else { continue };
            any_fit = true;
            if train_sources.contains(ex.source.as_str()) || seen.contains(&ex.source) {
                continue;
            }
            // the swapped row must keep the class it was chosen for
            if !class_of(&ex, &item.lemma).is_ok_and(|cs| cs.contains(class)) {
                continue;
            }
            debug_assert!(t.row < train.rows.len());
            seen.insert(ex.source.clone());
            got.push(ex);
        }
        if !any_fit {
            return Err(TestLexError::NoTemplates(item.lemma.clone()));
        }
        if got.len() < wanted {
            return Err(TestLexError::QuotaUnreachable {
                lemma: item.lemma.clone(),
                wanted,
                got: got.len(),
            });
        }
        rows.extend(got);
    }
    Ok(SplitFile::new(SplitName::Testlex, rows))
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ItemAudit {
    pub count: usize,
    /// Rows where the item's context class differs from its exposure class.
    pub role_mismatches: usize,
    /// Rows whose sentence occurs verbatim in training.
    pub train_overlap: usize,
    pub parse_failures: usize,
    /// Rows that also mention another controlled item.
    pub foreign_items: usize,
}

impl ItemAudit {
    pub fn passes(&self) -> bool {
        self.role_mismatches == 0 && self.train_overlap == 0 && self.parse_failures == 0 && self.foreign_items == 0
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct TestLexAudit {
    pub items: BTreeMap<String, ItemAudit>,
    /// Rows whose category names no known item.
    pub unassigned: usize,
    /// Sentences occurring more than once in the split.
    pub duplicates: usize,
}

impl TestLexAudit {
    pub fn passes(&self) -> bool {
        self.unassigned == 0 && self.duplicates == 0 && self.items.values().all(ItemAudit::passes)
    }
}

/// Audits a Test-Lex split against the training split and item list.
pub fn validate_test_lex(split: &SplitFile, train: &SplitFile, items: &[ControlledItem]) -> TestLexAudit {
    let train_sources: BTreeSet<&str> = train.rows.iter().map(|r| r.source.as_str()).collect();
    let by_lemma: BTreeMap<&str, &ControlledItem> = items.iter().map(|i| (i.lemma.as_str(), i)).collect();
    let mut audit = TestLexAudit::default();
    let mut seen = BTreeSet::new();
    for row in &split.rows {
        if !seen.insert(row.source.as_str()) {
            audit.duplicates += 1;
        }
        let item = row
            .category
            .strip_prefix(CATEGORY_PREFIX)
            .and_then(|l| by_lemma.get(l).copied());
        let Some(item) = item else {
            audit.unassigned += 1;
            continue;
        };
        let a = audit.items.entry(item.lemma.clone()).or_default();
        a.count += 1;
        if train_sources.contains(row.source.as_str()) {
            a.train_overlap += 1;
        }
        let lf = match crate::lf::parse_lf(&row.target) {
            Ok(lf) => lf,
            Err(_) => {
                a.parse_failures += 1;
                continue;
            }
        };
        let keys = lf.lexical_keys();
        if keys.iter().any(|k| *k != item.lemma && by_lemma.contains_key(k)) {
            a.foreign_items += 1;
        }
        let classes: Vec<SlotClass> = row_slots(&row.source, &lf)
            .into_iter()
            .filter(|s| s.key == item.lemma)
            .map(|s| s.class)
            .collect();
        let matched = match &item.exposure_role {
            Some(c) => classes.contains(c),
            None => false,
        };
        if !matched {
            a.role_mismatches += 1;
        }
    }
    audit
}
