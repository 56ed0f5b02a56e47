//! COGS split files: three tab-separated columns (sentence, logical form,
//! category), one row per line, no header.

use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::fmt;
use core::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::lf::{self, LfStyle, LogicalForm, ParseError};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Example {
    pub source: String,
    pub target: String,
    pub category: String,
}

impl Example {
    pub fn new(source: impl Into<String>, target: impl Into<String>, category: impl Into<String>) -> Self {
        Example {
            source: source.into(),
            target: target.into(),
            category: category.into(),
        }
    }

    pub fn logical_form(&self) -> Result<LogicalForm, ParseError> {
        lf::parse_lf(&self.target)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SplitName {
    Train,
    Dev,
    Test,
    Gen,
    Testlex,
}

impl SplitName {
    pub const ALL: [SplitName; 5] = [
        SplitName::Train,
        SplitName::Dev,
        SplitName::Test,
        SplitName::Gen,
        SplitName::Testlex,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            SplitName::Train => "train",
            SplitName::Dev => "dev",
            SplitName::Test => "test",
            SplitName::Gen => "gen",
            SplitName::Testlex => "testlex",
        }
    }
}

impl fmt::Display for SplitName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for SplitName {
    type Err = DatasetError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        SplitName::ALL
            .into_iter()
            .find(|n| n.as_str() == s)
            .ok_or_else(|| DatasetError::UnknownSplit(s.to_string()))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum DatasetError {
    #[error("input is not valid UTF-8 (byte {valid_up_to})")]
    Utf8 { valid_up_to: usize },
    #[error("line {line}: expected 3 tab-separated fields, found {found}")]
    FieldCount { line: usize, found: usize },
    #[error("line {line}: empty source sentence")]
    EmptySource { line: usize },
    #[error("line {line}: generalization rows need a category tag")]
    EmptyCategory { line: usize },
    #[error("line {line}: {source}")]
    Lf { line: usize, source: ParseError },
    #[error("unknown split name {0:?}")]
    UnknownSplit(String),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SplitFile {
    pub name: SplitName,
    pub rows: Vec<Example>,
    /// False only when the input's last row lacked its newline.
    pub trailing_newline: bool,
}

impl SplitFile {
    pub fn new(name: SplitName, rows: Vec<Example>) -> Self {
        SplitFile {
            name,
            rows,
            trailing_newline: true,
        }
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    /// Renders the split back to its file bytes.
    pub fn to_tsv(&self) -> String {
        let mut out = String::with_capacity(self.rows.iter().map(|r| r.source.len() + r.target.len() + 24).sum());
        for (i, r) in self.rows.iter().enumerate() {
            out.push_str(&r.source);
            out.push('\t');
            out.push_str(&r.target);
            out.push('\t');
            out.push_str(&r.category);
            if i + 1 < self.rows.len() || self.trailing_newline {
                out.push('\n');
            }
        }
        out
    }

    /// The LF rendering used by most rows; official COGS files are spaced.
    pub fn detect_style(&self) -> LfStyle {
        let mut spaced = 0usize;
        let mut compact = 0usize;
        for r in &self.rows {
            match LfStyle::detect(&r.target) {
                Some(LfStyle::Spaced) => spaced += 1,
                Some(LfStyle::Compact) => compact += 1,
                None => {}
            }
        }
        if compact > spaced {
            LfStyle::Compact
        } else {
            LfStyle::Spaced
        }
    }

    /// Parses every target; the first failure is reported with its line.
    pub fn parse_all(&self) -> Result<Vec<LogicalForm>, DatasetError> {
        self.rows
            .iter()
            .enumerate()
            .map(|(i, r)| lf::parse_lf(&r.target).map_err(|source| DatasetError::Lf { line: i + 1, source }))
            .collect()
    }

    /// Word tokens of all sentences and logical forms.
    pub fn vocabulary(&self) -> alloc::collections::BTreeSet<String> {
        let mut vocab = alloc::collections::BTreeSet::new();
        for r in &self.rows {
            for t in crate::text::sentence_tokens(&r.source) {
                if !t.word.is_empty() {
                    vocab.insert(r.source[t.word].to_string());
                }
            }
            for w in r.target.split(|c: char| c.is_whitespace() || "*(),;.".contains(c)) {
                if !w.is_empty() {
                    vocab.insert(w.to_string());
                }
            }
        }
        vocab
    }
}

pub fn parse_split_file(bytes: &[u8], name: SplitName) -> Result<SplitFile, DatasetError> {
    let text = core::str::from_utf8(bytes).map_err(|e| DatasetError::Utf8 {
        valid_up_to: e.valid_up_to(),
    })?;
    let mut rows = Vec::new();
    let trailing_newline = text.is_empty() || text.ends_with('\n');
    let body = text.strip_suffix('\n').unwrap_or(text);
    if !text.is_empty() {
        for (i, line) in body.split('\n').enumerate() {
            let fields: Vec<&str> = line.split('\t').collect();
            if fields.len() != 3 {
                return Err(DatasetError::FieldCount {
                    line: i + 1,
                    found: fields.len(),
                });
            }
            if fields[0].trim().is_empty() {
                return Err(DatasetError::EmptySource { line: i + 1 });
            }
            if name == SplitName::Gen && fields[2].is_empty() {
                return Err(DatasetError::EmptyCategory { line: i + 1 });
            }
            rows.push(Example::new(fields[0], fields[1], fields[2]));
        }
    }
    Ok(SplitFile {
        name,
        rows,
        trailing_newline,
    })
}
