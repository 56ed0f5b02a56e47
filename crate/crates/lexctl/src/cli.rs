//! `lexctl` subcommands. Stages talk to each other only through files.

use std::collections::BTreeMap;
use std::ffi::OsString;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::time::Instant;

use anyhow::{bail, ensure, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use lexctl_core::eval::{
    self, aggregate_seeds, evaluate_split, overestimation, pearson, render_table, spearman,
    AggregateReport, EvalReport, MatchPolicy, MetricStat, PredictionFile, RunMeta,
};
use lexctl_core::lexicon::{infer_controlled_items, load_controlled_items, render_manifest};
use lexctl_core::sampler::sample_sequences;
use lexctl_core::testlex::{generate_test_lex, validate_test_lex, TestLexConfig};
use lexctl_core::transform::{apply_plan, build_plan, emit_manifest, invert_plan};
use lexctl_core::{
    CharDistribution, ControlledItem, InitScheme, LengthBucket, PlanMode, SamplerConfig, SplitFile, SplitName,
    SubstitutionPlan,
};
use serde::Serialize;

use crate::corpus::{sample_absent, scan_corpus, ScanOptions, DEFAULT_MAX_SAMPLES};
use crate::io::{
    load_dataset, read_bytes, read_json, read_lines, read_split, read_tag_list, read_text, split_file_name, write_file,
    write_json, Dataset,
};
use crate::run_manifest::{self, Recorder};

pub const PLAN_FILE: &str = "plan.json";
pub const ITEMS_FILE: &str = "items.tsv";
pub const VOCAB_FILE: &str = "vocab.manifest";
const MAX_RESAMPLE_ROUNDS: usize = 20;

#[derive(Debug, Parser)]
#[command(name = "lexctl", version, about = "Lexical-exposure control for COGS-format datasets")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// List context-controlled items (one training exposure, used in gen).
    Infer(InferArgs),
    /// Draw novel character sequences.
    Sample(SampleArgs),
    /// Count pattern occurrences in a text corpus.
    Scan(ScanArgs),
    /// Substitute controlled items in every split.
    Transform(TransformArgs),
    /// Generate the Test-Lex split.
    Testlex(TestlexArgs),
    /// Score prediction files against reference splits.
    Evaluate(EvaluateArgs),
    /// Aggregate evaluation reports across seeds into tables.
    Report(ReportArgs),
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct DataArgs {
    /// Directory holding train.tsv, gen.tsv and optionally dev.tsv, test.tsv.
    #[arg(long)]
    pub data: Option<PathBuf>,
    #[arg(long, conflicts_with = "data", requires = "gen")]
    pub train: Option<PathBuf>,
    #[arg(long, conflicts_with = "data", requires = "train")]
    pub gen: Option<PathBuf>,
}

impl DataArgs {
    fn load(&self) -> Result<Dataset> {
        match (&self.data, &self.train, &self.gen) {
            (Some(dir), _, _) => load_dataset(dir),
            (None, Some(train), Some(gen)) => Ok(Dataset {
                dir: train.parent().unwrap_or(Path::new(".")).to_path_buf(),
                splits: vec![read_split(train, SplitName::Train)?, read_split(gen, SplitName::Gen)?],
            }),
            _ => bail!("give either --data DIR or both --train FILE and --gen FILE"),
        }
    }
}

#[derive(Debug, Args, Serialize)]
pub struct InferArgs {
    #[command(flatten)]
    pub data: DataArgs,
    /// Item manifest output (lemma<TAB>forms); stdout when omitted.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Also write the items with exposure rows and contexts as JSON.
    #[arg(long)]
    pub json: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum LengthArg {
    Shorter,
    Longer,
}

#[derive(Debug, Clone, Copy, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum DistArg {
    Random,
    Cvcv,
}

impl From<LengthArg> for LengthBucket {
    fn from(l: LengthArg) -> Self {
        match l {
            LengthArg::Shorter => LengthBucket::Shorter,
            LengthArg::Longer => LengthBucket::Longer,
        }
    }
}

impl From<DistArg> for CharDistribution {
    fn from(d: DistArg) -> Self {
        match d {
            DistArg::Random => CharDistribution::Random,
            DistArg::Cvcv => CharDistribution::Cvcv,
        }
    }
}

#[derive(Debug, Args, Serialize)]
pub struct SampleArgs {
    #[arg(long, value_enum, default_value = "shorter")]
    pub length: LengthArg,
    #[arg(long, value_enum, default_value = "cvcv")]
    pub dist: DistArg,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    pub count: usize,
    /// Words the output may not equal or be contained in, one per line.
    #[arg(long)]
    pub blocklist: Option<PathBuf>,
    /// Resample until no sequence occurs in this corpus.
    #[arg(long)]
    pub corpus: Option<PathBuf>,
    /// One sequence per line; stdout when omitted.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args, Serialize)]
pub struct ScanArgs {
    /// Patterns, one per line, at least 4 bytes each.
    #[arg(long)]
    pub patterns: PathBuf,
    /// A file or a directory scanned recursively.
    #[arg(long)]
    pub corpus: PathBuf,
    #[arg(long)]
    pub no_case_fold: bool,
    #[arg(long, default_value_t = DEFAULT_MAX_SAMPLES)]
    pub max_samples: usize,
    /// JSON report output.
    #[arg(long)]
    pub report: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum ModeArg {
    Charseq,
    Sentinel,
}

#[derive(Debug, Clone, Copy, ValueEnum, Serialize)]
pub enum InitArg {
    #[value(name = "random")]
    #[serde(rename = "random")]
    Random,
    #[value(name = "avgWithNoise")]
    #[serde(rename = "avgWithNoise")]
    AvgWithNoise,
    #[value(name = "unusedEmbeddings")]
    #[serde(rename = "unusedEmbeddings")]
    UnusedEmbeddings,
}

impl From<InitArg> for InitScheme {
    fn from(i: InitArg) -> Self {
        match i {
            InitArg::Random => InitScheme::Random,
            InitArg::AvgWithNoise => InitScheme::AvgWithNoise,
            InitArg::UnusedEmbeddings => InitScheme::UnusedEmbeddings,
        }
    }
}

#[derive(Debug, Args, Serialize)]
pub struct TransformArgs {
    /// Dataset directory; every split found there is transformed.
    #[arg(long)]
    pub data: PathBuf,
    #[arg(long, value_enum)]
    pub mode: ModeArg,
    /// Item manifest; inferred from train and gen when omitted.
    #[arg(long)]
    pub items: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "shorter")]
    pub length: LengthArg,
    #[arg(long, value_enum, default_value = "cvcv")]
    pub dist: DistArg,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Extra blocklist for charseq sampling (the dataset vocabulary is always blocked).
    #[arg(long)]
    pub blocklist: Option<PathBuf>,
    /// Resample charseq replacements until none occurs in this corpus.
    #[arg(long)]
    pub corpus: Option<PathBuf>,
    #[arg(long, default_value = lexctl_core::transform::DEFAULT_SENTINEL_TEMPLATE)]
    pub sentinel_template: String,
    #[arg(long, value_enum, default_value = "random")]
    pub init_scheme: InitArg,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args, Serialize)]
pub struct TestlexArgs {
    #[command(flatten)]
    pub data: DataArgs,
    #[arg(long)]
    pub items: Option<PathBuf>,
    #[arg(long, default_value_t = lexctl_core::testlex::DEFAULT_TOTAL)]
    pub total: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    pub per_item_cap: Option<usize>,
    /// Apply this substitution plan to the generated rows.
    #[arg(long)]
    pub plan: Option<PathBuf>,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args, Serialize)]
pub struct EvaluateArgs {
    /// Split of each reference file (repeat per pair): train, dev, test, gen, testlex.
    #[arg(long = "split", required = true)]
    pub splits: Vec<String>,
    #[arg(long = "reference", required = true)]
    pub references: Vec<PathBuf>,
    #[arg(long = "predictions", required = true)]
    pub predictions: Vec<PathBuf>,
    #[arg(long)]
    pub plan: Option<PathBuf>,
    #[arg(long, default_value = "strict")]
    pub policy: String,
    /// Structural category tags, one per line; COGS recursion tags by default.
    #[arg(long)]
    pub structural_tags: Option<PathBuf>,
    #[arg(long = "seed-id")]
    pub seed_id: Option<String>,
    #[arg(long)]
    pub model: Option<String>,
    #[arg(long)]
    pub step: Option<u64>,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args, Serialize)]
pub struct ReportArgs {
    /// Evaluation report JSON files.
    #[arg(required = true)]
    pub reports: Vec<PathBuf>,
    /// Table columns; `test_lex_gap` and `overestimation` are derived.
    #[arg(long, value_delimiter = ',', default_value = "gen,gen_lex_only,test_id,test_lex")]
    pub columns: Vec<String>,
    /// Model id whose gen accuracy is the overestimation baseline.
    #[arg(long)]
    pub baseline: Option<String>,
    /// Correlate this metric with the checkpoint step across reports.
    #[arg(long)]
    pub correlate: Option<String>,
    /// Markdown table output; stdout when omitted.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Aggregates as JSON.
    #[arg(long)]
    pub json: Option<PathBuf>,
}

pub fn run<I, T>(args: I) -> Result<()>
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) if !e.use_stderr() => {
            // --help and --version
            print!("{e}");
            return Ok(());
        }
        Err(e) => bail!("{}", e.render().to_string().trim_end()),
    };
    match cli.command {
        Command::Infer(a) => infer(&a),
        Command::Sample(a) => sample(&a),
        Command::Scan(a) => scan(&a),
        Command::Transform(a) => transform(&a),
        Command::Testlex(a) => testlex(&a),
        Command::Evaluate(a) => evaluate(&a),
        Command::Report(a) => report(&a),
    }
}

fn require_file(path: &Path, what: &str) -> Result<()> {
    ensure!(path.is_file(), "{what} {} does not exist", path.display());
    Ok(())
}

fn items_for(ds: &Dataset, manifest: Option<&Path>) -> Result<Vec<ControlledItem>> {
    let train = ds.require(SplitName::Train)?;
    match manifest {
        Some(p) => Ok(load_controlled_items(&read_bytes(p)?, train).with_context(|| format!("{}", p.display()))?),
        None => Ok(infer_controlled_items(train, ds.require(SplitName::Gen)?)?),
    }
}

fn emit(out: Option<&Path>, text: &str) -> Result<()> {
    match out {
        Some(p) => write_file(p, text),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn infer(a: &InferArgs) -> Result<()> {
    let mut rec = Recorder::start("infer", a, None)?;
    let started = Instant::now();
    let ds = a.data.load()?;
    let items = items_for(&ds, None)?;
    eprintln!("{} controlled items in {:.2?}", items.len(), started.elapsed());
    for it in &items {
        let ctx = it.exposure_role.as_ref().map(ToString::to_string).unwrap_or_else(|| "?".into());
        eprintln!("  {:<16} train row {:>6}  {ctx}", it.lemma, it.exposure_rows[0] + 1);
    }
    emit(a.out.as_deref(), &render_manifest(&items))?;
    if let Some(p) = &a.json {
        write_json(p, &items)?;
        rec.artifact(p);
    }
    if let Some(p) = &a.out {
        rec.artifact(p);
        rec.finish(&run_manifest::beside(p))?;
    }
    Ok(())
}

fn sampler_config(length: LengthArg, dist: DistArg, seed: u64, count: usize, blocklist: Option<&Path>) -> Result<SamplerConfig> {
    let block = match blocklist {
        Some(p) => read_lines(p)?,
        None => Vec::new(),
    };
    Ok(SamplerConfig::new(length.into(), dist.into(), seed, count).with_blocklist(block))
}

fn sample(a: &SampleArgs) -> Result<()> {
    let mut rec = Recorder::start("sample", a, Some(a.seed))?;
    let cfg = sampler_config(a.length, a.dist, a.seed, a.count, a.blocklist.as_deref())?;
    let seqs = match &a.corpus {
        Some(root) => {
            let found = sample_absent(&cfg, root, ScanOptions::default(), MAX_RESAMPLE_ROUNDS)?;
            eprintln!("{} scan round(s); rejected {:?}", found.rounds, found.rejected);
            found.sequences
        }
        None => sample_sequences(&cfg)?,
    };
    let mut text = seqs.join("\n");
    text.push('\n');
    emit(a.out.as_deref(), &text)?;
    if let Some(p) = &a.out {
        rec.artifact(p);
        rec.finish(&run_manifest::beside(p))?;
    }
    Ok(())
}

fn scan(a: &ScanArgs) -> Result<()> {
    require_file(&a.patterns, "patterns file")?;
    let mut rec = Recorder::start("scan", a, None)?;
    let patterns = read_lines(&a.patterns)?;
    let opts = ScanOptions {
        case_fold: !a.no_case_fold,
        max_samples: a.max_samples,
    };
    let report = scan_corpus(&patterns, &a.corpus, opts)?;
    let present: Vec<_> = report.patterns.iter().filter(|p| p.count > 0).collect();
    println!(
        "{} patterns, {} absent, {} present; {} files, {} bytes{}",
        patterns.len(),
        patterns.len() - present.len(),
        present.len(),
        report.files_scanned,
        report.bytes_scanned,
        report
            .throughput_mb_per_s()
            .map(|t| format!(", {t:.1} MB/s"))
            .unwrap_or_default()
    );
    for p in &present {
        println!("  {} x{}", p.pattern, p.count);
    }
    for e in &report.file_errors {
        eprintln!("warning: {}: {}", e.file, e.message);
    }
    if let Some(p) = &a.report {
        write_json(p, &report)?;
        rec.artifact(p);
        rec.finish(&run_manifest::beside(p))?;
    }
    Ok(())
}

fn transform(a: &TransformArgs) -> Result<()> {
    let mut rec = Recorder::start("transform", a, Some(a.seed))?;
    let ds = load_dataset(&a.data)?;
    let items = items_for(&ds, a.items.as_deref())?;
    let mode = match a.mode {
        ModeArg::Charseq => PlanMode::Charseq,
        ModeArg::Sentinel => PlanMode::Sentinel,
    };

    let mut vocab = std::collections::BTreeSet::new();
    for s in &ds.splits {
        vocab.extend(s.vocabulary());
    }
    let plan = match mode {
        PlanMode::Sentinel => build_plan(&items, mode, None, Some(&a.sentinel_template))?,
        PlanMode::Charseq => {
            let mut cfg = sampler_config(a.length, a.dist, a.seed, items.len(), a.blocklist.as_deref())?;
            cfg.blocklist.extend(vocab.iter().cloned());
            let mut plan = build_plan(&items, mode, Some(&cfg), None)?;
            if let Some(root) = &a.corpus {
                let mut rounds = 0;
                loop {
                    rounds += 1;
                    let reps: Vec<String> = plan.replacements().map(String::from).collect();
                    let report = scan_corpus(&reps, root, ScanOptions::default())?;
                    let found: Vec<String> = report.patterns.iter().filter(|p| p.count > 0).map(|p| p.pattern.clone()).collect();
                    if found.is_empty() {
                        break;
                    }
                    ensure!(rounds < MAX_RESAMPLE_ROUNDS, "replacements still in corpus after {rounds} rounds");
                    eprintln!("round {rounds}: resampling {found:?} found in corpus");
                    cfg.blocklist.extend(found);
                    plan = build_plan(&items, mode, Some(&cfg), None)?;
                }
            }
            plan
        }
    };
    plan.check_novel(vocab.iter().map(String::as_str))?;

    std::fs::create_dir_all(&a.out).with_context(|| format!("cannot create {}", a.out.display()))?;
    for split in &ds.splits {
        let out = apply_plan(split, &plan)?;
        let back = invert_plan(&out, &plan);
        if plan.multi_form_items().is_empty() {
            let back = back?;
            ensure!(back.to_tsv() == split.to_tsv(), "{}: inverse transform does not reproduce the input", split.name);
        }
        let path = a.out.join(split_file_name(split.name));
        write_file(&path, out.to_tsv())?;
        rec.artifact(&path);
    }
    let plan_path = a.out.join(PLAN_FILE);
    write_json(&plan_path, &plan)?;
    rec.artifact(&plan_path);
    let items_path = a.out.join(ITEMS_FILE);
    write_file(&items_path, render_manifest(&items))?;
    rec.artifact(&items_path);
    if mode == PlanMode::Sentinel {
        let manifest = emit_manifest(&plan, a.init_scheme.into())?;
        let p = a.out.join(VOCAB_FILE);
        write_file(&p, manifest.to_file_string())?;
        rec.artifact(&p);
    }
    for e in &plan.entries {
        eprintln!("  {} -> {}", e.item.lemma, e.replacement);
    }
    rec.finish(&a.out.join(run_manifest::FILE_NAME))?;
    Ok(())
}

fn testlex(a: &TestlexArgs) -> Result<()> {
    let mut rec = Recorder::start("testlex", a, Some(a.seed))?;
    let ds = a.data.load()?;
    let train = ds.require(SplitName::Train)?;
    let items = items_for(&ds, a.items.as_deref())?;
    let cfg = TestLexConfig {
        total: a.total,
        seed: a.seed,
        per_item_cap: a.per_item_cap,
    };
    let started = Instant::now();
    let split = generate_test_lex(train, &items, &cfg)?;
    let audit = validate_test_lex(&split, train, &items);
    ensure!(audit.passes(), "generated split failed its audit: {:?}", audit);
    eprintln!("{} Test-Lex rows in {:.2?}", split.len(), started.elapsed());
    let split = match &a.plan {
        Some(p) => {
            let plan: SubstitutionPlan = read_json(p)?;
            apply_plan(&split, &plan)?
        }
        None => split,
    };
    write_file(&a.out, split.to_tsv())?;
    rec.artifact(&a.out);
    let audit_path = a.out.with_extension("audit.json");
    write_json(&audit_path, &audit)?;
    rec.artifact(&audit_path);
    rec.finish(&run_manifest::beside(&a.out))?;
    Ok(())
}

fn evaluate(a: &EvaluateArgs) -> Result<()> {
    ensure!(
        a.splits.len() == a.references.len() && a.references.len() == a.predictions.len(),
        "--split, --reference and --predictions must be given the same number of times"
    );
    for (r, p) in a.references.iter().zip(&a.predictions) {
        require_file(r, "reference")?;
        require_file(p, "predictions")?;
    }
    let mut rec = Recorder::start("evaluate", a, None)?;
    let policy: MatchPolicy = a.policy.parse()?;
    let plan: Option<SubstitutionPlan> = a.plan.as_deref().map(read_json).transpose()?;
    let tags: Vec<String> = match &a.structural_tags {
        Some(p) => {
            let tags = read_tag_list(p)?;
            rec.echo("structural_tag_list", serde_json::json!(tags));
            tags
        }
        None => eval::DEFAULT_STRUCTURAL_TAGS.iter().map(|s| s.to_string()).collect(),
    };
    let tag_refs: Vec<&str> = tags.iter().map(String::as_str).collect();
    let meta = RunMeta {
        seed: a.seed_id.clone(),
        model: a.model.clone(),
        step: a.step,
    };

    let mut merged: Option<EvalReport> = None;
    for ((split, r), p) in a.splits.iter().zip(&a.references).zip(&a.predictions) {
        let name: SplitName = split.parse()?;
        let reference: SplitFile = read_split(r, name)?;
        let preds = PredictionFile::parse(&read_text(p)?, meta.clone());
        let rep = evaluate_split(&preds, &reference, plan.as_ref(), policy, &tag_refs)
            .with_context(|| format!("{} vs {}", p.display(), r.display()))?;
        merged = Some(match merged {
            None => rep,
            Some(m) => m.merge(rep)?,
        });
    }
    let report = merged.expect("at least one pair");
    for (k, s) in &report.per_split {
        let mut line = format!("{k:<14} {:.4}  ({}/{})", s.accuracy(), s.correct, s.total);
        if let Some(o) = report.other_policy.get(k) {
            let _ = write!(line, "  [{}: {:.4}]", policy.other(), o.accuracy());
        }
        println!("{line}");
    }
    if let Some(n) = report.novel_token_rate {
        println!("{:<14} {:.4}", "novel_tokens", n.accuracy());
    }
    write_json(&a.out, &report)?;
    rec.artifact(&a.out);
    rec.finish(&run_manifest::beside(&a.out))?;
    Ok(())
}

fn group_label(r: &EvalReport) -> String {
    r.meta.model.clone().unwrap_or_else(|| "-".to_string())
}

/// Adds derived columns to an aggregate.
fn with_derived(agg: &AggregateReport, baseline: Option<&AggregateReport>) -> Result<AggregateReport> {
    let mut out = agg.clone();
    if let Ok(gap) = agg.test_lex_gap() {
        out.metrics.insert("test_lex_gap".into(), MetricStat { mean: gap, std: None, n: agg.seeds.len() });
    }
    if let (Some(base), Ok(gen)) = (baseline, agg.get("gen")) {
        let o = overestimation(base.get("gen")?.mean, gen.mean)?;
        out.metrics.insert("overestimation".into(), MetricStat { mean: o, std: None, n: agg.seeds.len() });
    }
    Ok(out)
}

fn report(a: &ReportArgs) -> Result<()> {
    let mut rec = Recorder::start("report", a, None)?;
    let mut groups: BTreeMap<String, Vec<EvalReport>> = BTreeMap::new();
    let mut all = Vec::new();
    for p in &a.reports {
        let r: EvalReport = read_json(p)?;
        groups.entry(group_label(&r)).or_default().push(r.clone());
        all.push(r);
    }
    let mut aggs: BTreeMap<String, AggregateReport> = BTreeMap::new();
    for (label, reps) in &groups {
        aggs.insert(label.clone(), aggregate_seeds(reps).with_context(|| format!("group {label}"))?);
    }
    let baseline = match &a.baseline {
        Some(b) => Some(aggs.get(b).with_context(|| format!("no reports for baseline model {b:?}"))?.clone()),
        None => None,
    };
    let derived: Vec<(String, AggregateReport)> = aggs
        .iter()
        .map(|(l, g)| Ok((l.clone(), with_derived(g, baseline.as_ref())?)))
        .collect::<Result<_>>()?;
    let rows: Vec<(&str, &AggregateReport)> = derived.iter().map(|(l, g)| (l.as_str(), g)).collect();
    let cols: Vec<&str> = a.columns.iter().map(String::as_str).collect();
    let mut text = render_table(&rows, &cols);

    if let Some(metric) = &a.correlate {
        let mut xs = Vec::new();
        let mut ys = Vec::new();
        for r in &all {
            let step = r.meta.step.with_context(|| "report without --step cannot be correlated")?;
            let y = if metric == "test_lex_gap" {
                eval::test_lex_gap(r)?
            } else {
                *r.metrics().get(metric).with_context(|| format!("report lacks metric {metric:?}"))?
            };
            xs.push(step as f64);
            ys.push(y);
        }
        let s = spearman(&xs, &ys)?;
        let p = pearson(&xs, &ys)?;
        let _ = writeln!(text, "\n{metric} vs step (n = {}):", s.n);
        let _ = writeln!(text, "  spearman rho = {:.3}, p = {:.3}", s.coefficient, s.p_value);
        let _ = writeln!(text, "  pearson r = {:.3}, p = {:.3}", p.coefficient, p.p_value);
    }
    emit(a.out.as_deref(), &text)?;
    if let Some(p) = &a.json {
        let map: BTreeMap<&str, &AggregateReport> = derived.iter().map(|(l, g)| (l.as_str(), g)).collect();
        write_json(p, &map)?;
        rec.artifact(p);
    }
    if let Some(p) = a.out.as_ref().or(a.json.as_ref()) {
        if let Some(p) = &a.out {
            rec.artifact(p);
        }
        rec.finish(&run_manifest::beside(p))?;
    }
    Ok(())
}
