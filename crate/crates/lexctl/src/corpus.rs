//! Streaming multi-pattern scan over a directory of text files.

use std::fs::File;
use std::io::{Read, Seek, SeekFrom};
use std::path::{Path, PathBuf};
use std::time::Instant;

use anyhow::{bail, Result};
use lexctl_core::sampler::sample_sequences;
use lexctl_core::scan::{
    context_range, filter_absent, validate_patterns, Automaton, FileError, SampleLocation, ScanReport,
};
use lexctl_core::SamplerConfig;
use rayon::prelude::*;
use walkdir::WalkDir;

/// Bytes read per `read` call.
pub const CHUNK_SIZE: usize = 1 << 20;
pub const DEFAULT_MAX_SAMPLES: usize = 5;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ScanOptions {
    pub case_fold: bool,
    pub max_samples: usize,
}

impl Default for ScanOptions {
    fn default() -> Self {
        ScanOptions {
            case_fold: true,
            max_samples: DEFAULT_MAX_SAMPLES,
        }
    }
}

/// Regular files under `root` (or `root` itself), sorted by path.
pub fn corpus_files(root: &Path) -> Result<Vec<PathBuf>> {
    if root.is_file() {
        return Ok(vec![root.to_path_buf()]);
    }
    if !root.is_dir() {
        bail!("corpus path {} does not exist", root.display());
    }
    let mut files: Vec<PathBuf> = WalkDir::new(root)
        .sort_by_file_name()
        .into_iter()
        .filter_map(|e| e.ok())
        .filter(|e| e.file_type().is_file())
        .map(|e| e.into_path())
        .collect();
    files.sort();
    Ok(files)
}

fn display_name(root: &Path, path: &Path) -> String {
    let rel = path.strip_prefix(root).ok().filter(|r| !r.as_os_str().is_empty());
    let shown = rel.unwrap_or_else(|| path.file_name().map(Path::new).unwrap_or(path));
    shown.to_string_lossy().replace('\\', "/")
}

fn scan_file(ac: &Automaton, patterns: &[String], path: &Path, name: &str, max_samples: usize) -> ScanReport {
    let mut report = ScanReport::empty(patterns, ac.case_fold());
    let fail = |mut report: ScanReport, e: std::io::Error| {
        report.file_errors.push(FileError {
            file: name.to_string(),
            message: e.to_string(),
        });
        report
    };
    let mut file = match File::open(path) {
        Ok(f) => f,
        Err(e) => return fail(report, e),
    };
    let mut scanner = ac.scanner();
    let mut buf = vec![0u8; CHUNK_SIZE];
    let mut starts: Vec<Vec<u64>> = vec![Vec::new(); patterns.len()];
    loop {
        let n = match file.read(&mut buf) {
            Ok(0) => break,
            Ok(n) => n,
            Err(e) if e.kind() == std::io::ErrorKind::Interrupted => continue,
            Err(e) => return fail(report, e),
        };
        scanner.feed(&buf[..n], |id, start| {
            report.patterns[id].count += 1;
            if starts[id].len() < max_samples {
                starts[id].push(start);
            }
        });
    }
    let total = scanner.bytes_seen();
    for (id, offs) in starts.into_iter().enumerate() {
        for start in offs {
            let (lo, hi) = context_range(start, ac.pattern_len(id), total);
            let mut ctx = vec![0u8; (hi - lo) as usize];
            let read = file.seek(SeekFrom::Start(lo)).and_then(|_| file.read_exact(&mut ctx));
            if let Err(e) = read {
                return fail(report, e);
            }
            report.patterns[id].samples.push(SampleLocation {
                file: name.to_string(),
                offset: start,
                context: String::from_utf8_lossy(&ctx).into_owned(),
            });
        }
    }
    report.bytes_scanned = total;
    report.files_scanned = 1;
    report
}

/// Counts every (overlapping) occurrence of every pattern in every file under
/// `root`. Unreadable files are recorded in the report; the scan continues.
pub fn scan_corpus(patterns: &[String], root: &Path, opts: ScanOptions) -> Result<ScanReport> {
    validate_patterns(patterns)?;
    let ac = Automaton::new(patterns, opts.case_fold)?;
    let files = corpus_files(root)?;
    let started = Instant::now();
    let parts: Vec<ScanReport> = files
        .par_iter()
        .map(|p| scan_file(&ac, patterns, p, &display_name(root, p), opts.max_samples))
        .collect();
    let mut report = ScanReport::empty(patterns, opts.case_fold);
    for part in parts {
        report.merge(part, opts.max_samples);
    }
    report.elapsed_secs = started.elapsed().as_secs_f64();
    Ok(report)
}

/// Outcome of [`sample_absent`].
#[derive(Debug, Clone)]
pub struct AbsentSample {
    pub sequences: Vec<String>,
    /// Scans performed, including the final clean one.
    pub rounds: usize,
    /// Every sequence rejected because the corpus contains it.
    pub rejected: Vec<String>,
    pub report: ScanReport,
}

/// Samples, scans, and resamples with found sequences blocklisted until none
/// occurs in the corpus.
pub fn sample_absent(config: &SamplerConfig, root: &Path, opts: ScanOptions, max_rounds: usize) -> Result<AbsentSample> {
    let mut cfg = config.clone();
    let mut rejected = Vec::new();
    for round in 1..=max_rounds {
        let sequences = sample_sequences(&cfg)?;
        let report = scan_corpus(&sequences, root, opts)?;
        let (_, present) = filter_absent(&sequences, &report)?;
        if present.is_empty() {
            return Ok(AbsentSample {
                sequences,
                rounds: round,
                rejected,
                report,
            });
        }
        for hit in present {
            rejected.push(hit.pattern.clone());
            cfg.blocklist.push(hit.pattern.clone());
        }
    }
    bail!("sequences still found in the corpus after {max_rounds} rounds; rejected: {}", rejected.join(", "))
}
