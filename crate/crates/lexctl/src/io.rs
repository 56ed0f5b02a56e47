//! Reading and writing the on-disk formats.

use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use lexctl_core::dataset::parse_split_file;
use lexctl_core::{SplitFile, SplitName};
use serde::Serialize;

/// File name of a split inside a dataset directory.
pub fn split_file_name(name: SplitName) -> &'static str {
    match name {
        SplitName::Train => "train.tsv",
        SplitName::Dev => "dev.tsv",
        SplitName::Test => "test.tsv",
        SplitName::Gen => "gen.tsv",
        SplitName::Testlex => "test_lex.tsv",
    }
}

pub fn read_bytes(path: &Path) -> Result<Vec<u8>> {
    fs::read(path).with_context(|| format!("cannot read {}", path.display()))
}

pub fn read_text(path: &Path) -> Result<String> {
    String::from_utf8(read_bytes(path)?).with_context(|| format!("{} is not valid UTF-8", path.display()))
}

pub fn read_split(path: &Path, name: SplitName) -> Result<SplitFile> {
    let bytes = read_bytes(path)?;
    parse_split_file(&bytes, name).with_context(|| format!("{}", path.display()))
}

/// The splits of one dataset directory, in train/dev/test/gen order.
#[derive(Debug, Clone)]
pub struct Dataset {
    pub dir: PathBuf,
    pub splits: Vec<SplitFile>,
}

impl Dataset {
    pub fn get(&self, name: SplitName) -> Option<&SplitFile> {
        self.splits.iter().find(|s| s.name == name)
    }

    pub fn require(&self, name: SplitName) -> Result<&SplitFile> {
        self.get(name)
            .with_context(|| format!("{} has no {}", self.dir.display(), split_file_name(name)))
    }
}

/// Loads `train.tsv` and `gen.tsv` (required) plus `dev.tsv` and `test.tsv`
/// when present.
pub fn load_dataset(dir: &Path) -> Result<Dataset> {
    if !dir.is_dir() {
        bail!("dataset directory {} does not exist", dir.display());
    }
    let mut splits = Vec::new();
    for name in [SplitName::Train, SplitName::Dev, SplitName::Test, SplitName::Gen] {
        let path = dir.join(split_file_name(name));
        if path.is_file() {
            splits.push(read_split(&path, name)?);
        } else if matches!(name, SplitName::Train | SplitName::Gen) {
            bail!("missing {} in {}", split_file_name(name), dir.display());
        }
    }
    Ok(Dataset {
        dir: dir.to_path_buf(),
        splits,
    })
}

/// Non-empty lines with surrounding whitespace removed.
pub fn read_lines(path: &Path) -> Result<Vec<String>> {
    Ok(read_text(path)?
        .lines()
        .map(str::trim)
        .filter(|l| !l.is_empty())
        .map(String::from)
        .collect())
}

/// Structural category list: one tag per line, `#` starts a comment.
pub fn read_tag_list(path: &Path) -> Result<Vec<String>> {
    Ok(read_text(path)?
        .lines()
        .map(|l| l.split('#').next().unwrap_or("").trim())
        .filter(|l| !l.is_empty())
        .map(String::from)
        .collect())
}

pub fn write_file(path: &Path, contents: impl AsRef<[u8]>) -> Result<()> {
    if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
        fs::create_dir_all(parent).with_context(|| format!("cannot create {}", parent.display()))?;
    }
    fs::write(path, contents).with_context(|| format!("cannot write {}", path.display()))
}

/// Pretty JSON with a trailing newline. Struct fields keep declaration
/// order and maps are sorted, so output is stable.
pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut s = serde_json::to_string_pretty(value)?;
    s.push('\n');
    write_file(path, s)
}

pub fn read_json<T: serde::de::DeserializeOwned>(path: &Path) -> Result<T> {
    let text = read_text(path)?;
    serde_json::from_str(&text).with_context(|| format!("cannot parse {}", path.display()))
}
