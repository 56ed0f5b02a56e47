//! Single-pass multi-pattern substring counting (Aho-Corasick).
//!
//! The automaton is a dense DFA over byte classes. Bytes that occur in no
//! pattern share class 0, so the transition table stays small for the short
//! a-z patterns this toolkit checks. ASCII case folding is done by mapping
//! upper- and lower-case letters to the same class.

use alloc::collections::VecDeque;
use alloc::string::{String, ToString};
use alloc::vec;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

pub const MIN_PATTERN_LEN: usize = 4;
pub const CONTEXT_WINDOW: usize = 40;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ScanError {
    #[error("no patterns given")]
    NoPatterns,
    #[error("pattern {0:?} is empty")]
    EmptyPattern(String),
    #[error("pattern {pattern:?} is shorter than {min} bytes")]
    TooShort { pattern: String, min: usize },
    #[error("pattern {0:?} is missing from the scan report")]
    MissingPattern(String),
}

const DEAD: u32 = u32::MAX;

#[derive(Debug, Clone)]
pub struct Automaton {
    classes: [u16; 256],
    stride: usize,
    trans: Vec<u32>,
    /// `outputs[out_start[s]..out_start[s + 1]]` are the patterns ending at state `s`.
    out_start: Vec<u32>,
    outputs: Vec<u32>,
    pattern_lens: Vec<usize>,
    case_fold: bool,
}

impl Automaton {
    /// Builds the automaton. Patterns must be non-empty; duplicates are allowed
    /// and each copy is reported.
    pub fn new<P: AsRef<[u8]>>(patterns: &[P], case_fold: bool) -> Result<Self, ScanError> {
        if patterns.is_empty() {
            return Err(ScanError::NoPatterns);
        }
        let fold = |b: u8| if case_fold { b.to_ascii_lowercase() } else { b };

        let mut classes = [0u16; 256];
        let mut next_class = 1u16;
        for p in patterns {
            let p = p.as_ref();
            if p.is_empty() {
                return Err(ScanError::EmptyPattern(String::new()));
            }
            for &b in p {
                let b = fold(b);
                if classes[b as usize] == 0 {
                    classes[b as usize] = next_class;
                    next_class += 1;
                }
            }
        }
        if case_fold {
            for b in b'A'..=b'Z' {
                classes[b as usize] = classes[b.to_ascii_lowercase() as usize];
            }
        }
        let stride = next_class as usize;

        // trie
        let mut trans: Vec<u32> = vec![DEAD; stride];
        let mut own: Vec<Vec<u32>> = vec![Vec::new()];
        for (id, p) in patterns.iter().enumerate() {
            let mut s = 0usize;
            for &b in p.as_ref() {
                let c = classes[fold(b) as usize] as usize;
                let t = trans[s * stride + c];
                s = if t == DEAD {
                    let n = own.len();
                    trans[s * stride + c] = n as u32;
                    trans.extend(core::iter::repeat_n(DEAD, stride));
                    own.push(Vec::new());
                    n
                } else {
                    t as usize
                };
            }
            own[s].push(id as u32);
        }
        let n_states = own.len();

        // failure links, breadth first; fill missing edges to get a DFA
        let mut fail = vec![0u32; n_states];
        let mut queue = VecDeque::new();
        for slot in trans.iter_mut().take(stride) {
            let t = *slot;
            if t == DEAD {
                *slot = 0;
            } else {
                fail[t as usize] = 0;
                queue.push_back(t as usize);
            }
        }
        let mut order = Vec::with_capacity(n_states);
        while let Some(s) = queue.pop_front() {
            order.push(s);
            for c in 0..stride {
                let t = trans[s * stride + c];
                let via_fail = trans[fail[s] as usize * stride + c];
                if t == DEAD {
                    trans[s * stride + c] = via_fail;
                } else {
                    fail[t as usize] = via_fail;
                    queue.push_back(t as usize);
                }
            }
        }

        // merge outputs along failure links (BFS order guarantees the
        // fail target is complete first)
        let mut merged: Vec<Vec<u32>> = own;
        for &s in &order {
            let f = fail[s] as usize;
            if f != s && !merged[f].is_empty() {
                let extra = merged[f].clone();
                merged[s].extend(extra);
            }
        }
        let mut out_start = Vec::with_capacity(n_states + 1);
        let mut outputs = Vec::new();
        for m in &merged {
            out_start.push(outputs.len() as u32);
            outputs.extend_from_slice(m);
        }
        out_start.push(outputs.len() as u32);

        Ok(Automaton {
            classes,
            stride,
            trans,
            out_start,
            outputs,
            pattern_lens: patterns.iter().map(|p| p.as_ref().len()).collect(),
            case_fold,
        })
    }

    pub fn pattern_count(&self) -> usize {
        self.pattern_lens.len()
    }

    pub fn pattern_len(&self, id: usize) -> usize {
        self.pattern_lens[id]
    }

    pub fn case_fold(&self) -> bool {
        self.case_fold
    }

    pub fn state_count(&self) -> usize {
        self.out_start.len() - 1
    }

    pub fn scanner(&self) -> Scanner<'_> {
        Scanner {
            ac: self,
            state: 0,
            offset: 0,
        }
    }
}

/// Streaming cursor over an [`Automaton`]; feed consecutive chunks of one
/// stream and matches spanning chunk boundaries are still found.
#[derive(Debug, Clone)]
pub struct Scanner<'a> {
    ac: &'a Automaton,
    state: u32,
    offset: u64,
}

impl<'a> Scanner<'a> {
    /// Calls `on_match(pattern_id, start_offset)` for every occurrence,
    /// overlapping ones included. Offsets are relative to the stream start.
    #[inline]
    pub fn feed<F: FnMut(usize, u64)>(&mut self, chunk: &[u8], mut on_match: F) {
        let ac = self.ac;
        let mut s = self.state as usize;
        for (i, &b) in chunk.iter().enumerate() {
            s = ac.trans[s * ac.stride + ac.classes[b as usize] as usize] as usize;
            let (lo, hi) = (ac.out_start[s] as usize, ac.out_start[s + 1] as usize);
            if lo != hi {
                let end = self.offset + i as u64 + 1;
                for &id in &ac.outputs[lo..hi] {
                    on_match(id as usize, end - ac.pattern_lens[id as usize] as u64);
                }
            }
        }
        self.state = s as u32;
        self.offset += chunk.len() as u64;
    }

    pub fn bytes_seen(&self) -> u64 {
        self.offset
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SampleLocation {
    pub file: String,
    pub offset: u64,
    /// Up to 40 bytes around the match, lossily decoded.
    pub context: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PatternHits {
    pub pattern: String,
    pub count: u64,
    pub samples: Vec<SampleLocation>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FileError {
    pub file: String,
    pub message: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScanReport {
    pub case_fold: bool,
    pub patterns: Vec<PatternHits>,
    pub bytes_scanned: u64,
    pub files_scanned: u64,
    pub elapsed_secs: f64,
    pub file_errors: Vec<FileError>,
}

impl ScanReport {
    pub fn empty<S: AsRef<str>>(patterns: &[S], case_fold: bool) -> Self {
        ScanReport {
            case_fold,
            patterns: patterns
                .iter()
                .map(|p| PatternHits {
                    pattern: p.as_ref().to_string(),
                    count: 0,
                    samples: Vec::new(),
                })
                .collect(),
            bytes_scanned: 0,
            files_scanned: 0,
            elapsed_secs: 0.0,
            file_errors: Vec::new(),
        }
    }

    /// Folds `other` into `self`. Both must cover the same pattern list.
    pub fn merge(&mut self, other: ScanReport, max_samples: usize) {
        for (mine, theirs) in self.patterns.iter_mut().zip(other.patterns) {
            debug_assert_eq!(mine.pattern, theirs.pattern);
            mine.count += theirs.count;
            let room = max_samples.saturating_sub(mine.samples.len());
            mine.samples.extend(theirs.samples.into_iter().take(room));
        }
        self.bytes_scanned += other.bytes_scanned;
        self.files_scanned += other.files_scanned;
        self.elapsed_secs = self.elapsed_secs.max(other.elapsed_secs);
        self.file_errors.extend(other.file_errors);
    }

    pub fn count(&self, pattern: &str) -> Option<u64> {
        self.patterns.iter().find(|p| p.pattern == pattern).map(|p| p.count)
    }

    pub fn throughput_mb_per_s(&self) -> Option<f64> {
        (self.elapsed_secs > 0.0).then(|| self.bytes_scanned as f64 / 1e6 / self.elapsed_secs)
    }
}

/// Rejects empty pattern lists and patterns under [`MIN_PATTERN_LEN`] bytes.
pub fn validate_patterns<S: AsRef<str>>(patterns: &[S]) -> Result<(), ScanError> {
    if patterns.is_empty() {
        return Err(ScanError::NoPatterns);
    }
    for p in patterns {
        let p = p.as_ref();
        if p.len() < MIN_PATTERN_LEN {
            return Err(ScanError::TooShort {
                pattern: p.to_string(),
                min: MIN_PATTERN_LEN,
            });
        }
    }
    Ok(())
}

/// Byte window of at most [`CONTEXT_WINDOW`] bytes around a match.
pub fn context_range(start: u64, len: usize, total: u64) -> (u64, u64) {
    let half = (CONTEXT_WINDOW.saturating_sub(len) / 2) as u64;
    let lo = start.saturating_sub(half);
    let hi = (lo + CONTEXT_WINDOW as u64).min(total);
    (lo, hi)
}

/// Scans one in-memory buffer named `file`.
pub fn scan_bytes(ac: &Automaton, patterns: &[String], file: &str, data: &[u8], max_samples: usize) -> ScanReport {
    let mut report = ScanReport::empty(patterns, ac.case_fold());
    let mut scanner = ac.scanner();
    scanner.feed(data, |id, start| {
        let hits = &mut report.patterns[id];
        hits.count += 1;
        if hits.samples.len() < max_samples {
            let (lo, hi) = context_range(start, ac.pattern_len(id), data.len() as u64);
            hits.samples.push(SampleLocation {
                file: file.to_string(),
                offset: start,
                context: String::from_utf8_lossy(&data[lo as usize..hi as usize]).into_owned(),
            });
        }
    });
    report.bytes_scanned = data.len() as u64;
    report.files_scanned = 1;
    report
}

/// Splits `patterns` by whether `report` saw them.
pub fn filter_absent<'r, S: AsRef<str>>(
    patterns: &[S],
    report: &'r ScanReport,
) -> Result<(Vec<String>, Vec<&'r PatternHits>), ScanError> {
    let mut absent = Vec::new();
    let mut present = Vec::new();
    for p in patterns {
        let p = p.as_ref();
        let hits = report
            .patterns
            .iter()
            .find(|h| h.pattern == p)
            .ok_or_else(|| ScanError::MissingPattern(p.to_string()))?;
        if hits.count == 0 {
            absent.push(p.to_string());
        } else {
            present.push(hits);
        }
    }
    Ok((absent, present))
}
