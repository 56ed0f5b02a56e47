//! Lexical slots of a row and the context class each one sits in.
//!
//! COGS variables index sentence tokens, so a noun `cat ( x _ 4 )` lives at
//! token 4. A slot's class is what Test-Lex must preserve when it swaps a
//! controlled item in: the governing role, whether the word precedes its
//! head, definiteness for nouns, and the argument frame for verbs.

use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::fmt;

use serde::{Deserialize, Serialize};

use crate::lf::{Atom, LogicalForm, Term};
use crate::text::sentence_tokens;

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct FrameRole {
    pub role: String,
    /// The argument precedes the verb in the sentence.
    pub before: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum SlotClass {
    /// Isolated primitive row (lambda form or bare constant).
    Primitive,
    Noun {
        definite: bool,
        /// Role path of the governing atom; empty when ungoverned.
        governor: String,
        before_head: bool,
    },
    Name {
        governor: String,
        before_head: bool,
    },
    Verb {
        governor: String,
        frame: Vec<FrameRole>,
    },
}

impl SlotClass {
    pub fn kind(&self) -> &'static str {
        match self {
            SlotClass::Primitive => "primitive",
            SlotClass::Noun { .. } => "noun",
            SlotClass::Name { .. } => "name",
            SlotClass::Verb { .. } => "verb",
        }
    }
}

fn side(before: bool) -> &'static str {
    if before {
        "<"
    } else {
        ">"
    }
}

impl fmt::Display for SlotClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SlotClass::Primitive => f.write_str("primitive"),
            SlotClass::Noun {
                definite,
                governor,
                before_head,
            } => write!(
                f,
                "noun {} {}{}",
                if *definite { "def" } else { "indef" },
                if governor.is_empty() { "-" } else { governor },
                side(*before_head)
            ),
            SlotClass::Name { governor, before_head } => write!(
                f,
                "name {}{}",
                if governor.is_empty() { "-" } else { governor },
                side(*before_head)
            ),
            SlotClass::Verb { governor, frame } => {
                write!(f, "verb {} [", if governor.is_empty() { "-" } else { governor })?;
                for (i, r) in frame.iter().enumerate() {
                    if i > 0 {
                        f.write_str(",")?;
                    }
                    write!(f, "{}{}", r.role, side(r.before))?;
                }
                f.write_str("]")
            }
        }
    }
}

/// One occurrence of a lexical key (predicate lemma or name) in a row.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Slot {
    pub key: String,
    pub class: SlotClass,
    /// Sentence token realizing the slot, when it can be located.
    pub token: Option<usize>,
    /// Variable the predicate holds of (nouns and verbs).
    pub var: Option<u32>,
}

struct RowView<'a> {
    words: Vec<&'a str>,
    lf: &'a LogicalForm,
}

impl<'a> RowView<'a> {
    fn name_position(&self, name: &str) -> Option<usize> {
        self.words.iter().position(|w| *w == name)
    }

    fn position(&self, t: &Term) -> Option<usize> {
        match t {
            Term::Var(i) => Some(*i as usize),
            Term::Name(n) => self.name_position(n),
            Term::Bound(_) => None,
        }
    }

    fn governor_of(&self, t: &Term) -> Option<&'a Atom> {
        self.lf
            .atoms
            .iter()
            .find(|a| a.args.len() == 2 && a.args[1] == *t && a.args[0] != *t)
    }

    fn governor_class(&self, t: &Term, own_pos: Option<usize>) -> (String, bool) {
        match self.governor_of(t) {
            Some(g) => {
                let before = match (own_pos, self.position(&g.args[0])) {
                    (Some(p), Some(h)) => p < h,
                    _ => false,
                };
                (g.role_path(), before)
            }
            None => (String::new(), false),
        }
    }
}

fn noun_vars(lf: &LogicalForm) -> Vec<(u32, &str, bool)> {
    let mut out: Vec<(u32, &str, bool)> = Vec::new();
    for d in &lf.definites {
        if let Term::Var(v) = d.term {
            out.push((v, d.lemma.as_str(), true));
        }
    }
    for a in &lf.atoms {
        if a.roles.is_empty() && a.args.len() == 1 {
            if let Term::Var(v) = a.args[0] {
                if !out.iter().any(|(w, _, _)| *w == v) {
                    out.push((v, a.lemma.as_str(), false));
                }
            }
        }
    }
    out
}

/// Lists the lexical slots of one row.
pub fn row_slots(sentence: &str, lf: &LogicalForm) -> Vec<Slot> {
    let toks = sentence_tokens(sentence);
    let words: Vec<&str> = toks.iter().map(|t| &sentence[t.word.clone()]).collect();
    let content_words: Vec<usize> = words
        .iter()
        .enumerate()
        .filter(|(_, w)| !w.is_empty())
        .map(|(i, _)| i)
        .collect();
    let view = RowView { words, lf };

    if lf.constant.is_some() || !lf.lambdas.is_empty() {
        let token = if content_words.len() == 1 { Some(content_words[0]) } else { None };
        return lf
            .lexical_keys()
            .into_iter()
            .map(|k| Slot {
                key: k.to_string(),
                class: SlotClass::Primitive,
                token: token.or_else(|| view.name_position(k)),
                var: None,
            })
            .collect();
    }

    let mut slots = Vec::new();
    let nouns = noun_vars(lf);
    for &(v, lemma, definite) in &nouns {
        let (governor, before_head) = view.governor_class(&Term::Var(v), Some(v as usize));
        slots.push(Slot {
            key: lemma.to_string(),
            class: SlotClass::Noun {
                definite,
                governor,
                before_head,
            },
            token: Some(v as usize),
            var: Some(v),
        });
    }

    let mut seen_verbs: Vec<u32> = Vec::new();
    for a in &lf.atoms {
        if a.roles.is_empty() {
            continue;
        }
        let Some(Term::Var(v)) = a.args.first() else { continue };
        let v = *v;
        if nouns.iter().any(|(n, _, _)| *n == v) || seen_verbs.contains(&v) {
            continue;
        }
        seen_verbs.push(v);
        let mut frame: Vec<FrameRole> = lf
            .atoms
            .iter()
            .filter(|b| b.lemma == a.lemma && b.args.len() == 2 && b.args[0] == Term::Var(v))
            .map(|b| FrameRole {
                role: b.role_path(),
                before: view.position(&b.args[1]).map(|p| p < v as usize).unwrap_or(false),
            })
            .collect();
        frame.sort();
        let (governor, _) = view.governor_class(&Term::Var(v), Some(v as usize));
        slots.push(Slot {
            key: a.lemma.clone(),
            class: SlotClass::Verb { governor, frame },
            token: Some(v as usize),
            var: Some(v),
        });
    }

    let mut seen_names: Vec<&str> = Vec::new();
    for a in &lf.atoms {
        for t in &a.args {
            let Term::Name(n) = t else { continue };
            if seen_names.contains(&n.as_str()) {
                continue;
            }
            seen_names.push(n);
            let pos = view.name_position(n);
            let (governor, before_head) = view.governor_class(t, pos);
            slots.push(Slot {
                key: n.clone(),
                class: SlotClass::Name { governor, before_head },
                token: pos,
                var: None,
            });
        }
    }
    slots.sort_by_key(|s| (s.token.unwrap_or(usize::MAX), s.var));
    slots
}
