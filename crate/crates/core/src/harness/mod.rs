//! Batch experiments: generate synthetic ciphers, run every segmenter,
//! score against gold and write tables plus the per-cipher artifacts the
//! tables were computed from.

mod config;

use std::fmt::Write as _;
use std::path::Path;

use rayon::prelude::*;
use serde::Serialize;

pub use config::{ExperimentConfig, SpaceMode};

use crate::ciphergen::{derive_seed, generate_key, sample_cipher, truncate, EncipherOptions, GeneratedCipher, KeySpec};
use crate::corpus::clean_text;
use crate::error::{Error, Result};
use crate::metrics::{seg_edits, vocab_f1};
use crate::model::{PlainText, Segmentation};
use crate::segmenters::{max_seed_vocabulary, ModelKind, Segmenter, TrainParams};

/// Scores of one model on one cipher.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ModelScore {
    pub model: String,
    pub f1: f64,
    pub precision: f64,
    pub recall: f64,
    pub seg_er: f64,
    pub seg_edits: usize,
    pub reference_segments: usize,
    pub learned_vocabulary: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CipherRecord {
    pub id: String,
    pub condition: String,
    pub length: usize,
    pub gold_vocabulary: usize,
    pub vocab_size: usize,
    pub scores: Vec<ModelScore>,
}

/// One line of a result table: a model's mean scores over a batch.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TableRow {
    pub condition: String,
    pub length: usize,
    pub model: String,
    pub label: String,
    pub mean_f1: f64,
    pub mean_seg_er: f64,
    pub ciphers: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ResultTable {
    pub experiment: String,
    pub seed: u64,
    pub rows: Vec<TableRow>,
    pub ciphers: Vec<CipherRecord>,
}

impl ResultTable {
    pub fn row(&self, condition: &str, length: usize, model: ModelKind) -> Option<&TableRow> {
        self.rows.iter().find(|r| r.condition == condition && r.length == length && r.model == model.id())
    }

    /// Mean SegER of `model` under `condition`, across every length.
    pub fn mean_seg_er(&self, condition: &str, model: ModelKind) -> Option<f64> {
        self.rows.iter().find(|r| r.condition == condition && r.model == model.id()).map(|r| r.mean_seg_er)
    }

    /// The mean rows as CSV, with scores in percent.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("experiment,condition,length,model,label,ciphers,mean_f1_pct,mean_seg_er_pct\n");
        for r in &self.rows {
            let _ = writeln!(
                out,
                "{},{},{},{},{},{},{:.4},{:.4}",
                self.experiment,
                r.condition,
                r.length,
                r.model,
                r.label,
                r.ciphers,
                100.0 * r.mean_f1,
                100.0 * r.mean_seg_er
            );
        }
        out
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)? + "\n")
    }

    /// Plain-text table, one row per model, one column pair per condition.
    pub fn render(&self) -> String {
        let mut out = String::new();
        let mut conditions: Vec<(&str, usize)> = Vec::new();
        for r in &self.rows {
            if !conditions.contains(&(r.condition.as_str(), r.length)) {
                conditions.push((r.condition.as_str(), r.length));
            }
        }
        let _ = write!(out, "{:<16}", "model");
        for (c, l) in &conditions {
            let _ = write!(out, " | {:>22}", format!("{c} @{l} F1/SegER %"));
        }
        out.push('\n');
        for m in ModelKind::ALL {
            if !self.rows.iter().any(|r| r.model == m.id()) {
                continue;
            }
            let _ = write!(out, "{:<16}", m.label());
            for &(c, l) in &conditions {
                match self.row(c, l, m) {
                    Some(r) => {
                        let _ = write!(out, " | {:>10.2} {:>11.2}", 100.0 * r.mean_f1, 100.0 * r.mean_seg_er);
                    }
                    None => {
                        let _ = write!(out, " | {:>22}", "-");
                    }
                }
            }
            out.push('\n');
        }
        out
    }
}

/// A cipher as it was scored, with the segmentation each model produced.
#[derive(Clone, Debug)]
pub struct CipherArtifact {
    pub id: String,
    pub cipher: GeneratedCipher,
    pub segmentations: Vec<(ModelKind, Segmentation)>,
}

/// A finished experiment.
#[derive(Clone, Debug)]
pub struct ExperimentRun {
    pub table: ResultTable,
    pub artifacts: Vec<CipherArtifact>,
    pub config: ExperimentConfig,
}

impl ExperimentRun {
    /// Write `results.csv`, `results.json`, the config and, under
    /// `ciphers/<id>/`, each cipher with its gold, key, plaintext and the
    /// output of every model.
    pub fn write(&self, dir: &Path) -> Result<()> {
        std::fs::create_dir_all(dir)?;
        std::fs::write(dir.join("results.csv"), self.table.to_csv())?;
        std::fs::write(dir.join("results.json"), self.table.to_json()?)?;
        std::fs::write(dir.join("config.cfg"), self.config.to_text())?;
        for a in &self.artifacts {
            let d = dir.join("ciphers").join(&a.id);
            write_cipher(&d, &a.cipher)?;
            for (m, seg) in &a.segmentations {
                std::fs::write(d.join(format!("seg-{}.txt", m.id())), seg.serialize())?;
            }
        }
        Ok(())
    }
}

/// Write `cipher.txt`, `gold.txt`, `key.tsv` and `plain.txt` into `dir`.
pub fn write_cipher(dir: &Path, g: &GeneratedCipher) -> Result<()> {
    std::fs::create_dir_all(dir)?;
    std::fs::write(dir.join("cipher.txt"), g.ciphertext.serialize())?;
    std::fs::write(dir.join("gold.txt"), gold_text(g))?;
    std::fs::write(dir.join("key.tsv"), g.key.to_tsv())?;
    std::fs::write(dir.join("plain.txt"), format!("{}\n", g.plaintext.as_str()))?;
    Ok(())
}

/// Gold segmentation laid out like the ciphertext: one line per cipher
/// line, and with word spaces kept, one space-separated group per word.
fn gold_text(g: &GeneratedCipher) -> String {
    let mut segs = g.gold.segments().iter();
    let mut out = String::new();
    for line in g.ciphertext.lines() {
        let mut groups: Vec<String> = Vec::new();
        for word in line.split_whitespace() {
            let n = word.chars().count();
            let mut taken = 0;
            let mut parts: Vec<&str> = Vec::new();
            while taken < n {
                let s = segs.next().expect("gold covers the ciphertext");
                taken += s.chars().count();
                parts.push(s);
            }
            groups.push(parts.join(" "));
        }
        out.push_str(&groups.join(if g.keeps_spaces() { " | " } else { " " }));
        out.push('\n');
    }
    out
}

pub fn load_corpus(cfg: &ExperimentConfig) -> Result<PlainText> {
    let path = cfg.corpus.as_ref().ok_or_else(|| Error::InvalidArgument("no corpus configured".into()))?;
    let text = std::fs::read_to_string(path)
        .map_err(|e| Error::InvalidArgument(format!("cannot read corpus {}: {e}", path.display())))?;
    let clean = clean_text(&text);
    if clean.is_empty() {
        return Err(Error::EmptyCorpus);
    }
    Ok(clean)
}

fn key_spec(cfg: &ExperimentConfig, seed: u64) -> KeySpec {
    KeySpec {
        homophones_per_vowel: cfg.homophones_per_vowel,
        homophones_per_consonant: cfg.homophones_per_consonant,
        nulls: cfg.nulls,
        nomenclature: cfg.nomenclature,
        ..KeySpec::homophonic(1, 1, seed)
    }
}

/// Cipher `index` of the batch described by `cfg`, `length` symbols, word spaces kept.
pub fn generate_cipher(cfg: &ExperimentConfig, corpus: &PlainText, index: usize, length: usize) -> Result<GeneratedCipher> {
    let s = derive_seed(cfg.seed, index as u64);
    let key = generate_key(&key_spec(cfg, derive_seed(s, 0)))?;
    let options = EncipherOptions {
        keep_spaces: true,
        null_rate: cfg.null_rate,
        nomenclature_rate: cfg.nomenclature_rate,
    };
    sample_cipher(corpus, &key, length, &options, derive_seed(s, 1))
}

/// The batch of `cfg`, in the space condition `spaces`.
pub fn generate_batch(cfg: &ExperimentConfig, corpus: &PlainText, spaces: bool) -> Result<Vec<GeneratedCipher>> {
    with_pool(cfg.threads, || {
        (0..cfg.n_ciphers)
            .into_par_iter()
            .map(|i| generate_cipher(cfg, corpus, i, cfg.length).map(|g| condition_variant(cfg, g, spaces)))
            .collect()
    })
}

fn condition_variant(cfg: &ExperimentConfig, g: GeneratedCipher, spaces: bool) -> GeneratedCipher {
    if spaces {
        g
    } else {
        g.without_spaces(cfg.line_width)
    }
}

fn condition_name(spaces: bool) -> &'static str {
    if spaces {
        "spaces"
    } else {
        "no-spaces"
    }
}

fn with_pool<T: Send>(threads: Option<usize>, f: impl FnOnce() -> T + Send) -> T {
    match threads.and_then(|n| rayon::ThreadPoolBuilder::new().num_threads(n).build().ok()) {
        Some(pool) => pool.install(f),
        None => f(),
    }
}

/// Vocabulary size used for homophonic ciphers: the largest vocabulary a
/// capped unigram model can seed from the cipher.
pub fn homophonic_vocab_size(g: &GeneratedCipher) -> usize {
    max_seed_vocabulary(&g.ciphertext, Some(2))
}

/// Train and score every model of `cfg` on one cipher.
fn score_cipher(
    cfg: &ExperimentConfig,
    id: String,
    condition: &str,
    g: &GeneratedCipher,
    vocab_size: usize,
) -> Result<(CipherRecord, CipherArtifact)> {
    let params = TrainParams { vocab_size, unigram: cfg.unigram() };
    let gold_vocab = g.gold.vocabulary();
    let mut scores = Vec::with_capacity(cfg.models.len());
    let mut segmentations = Vec::with_capacity(cfg.models.len());
    for &kind in &cfg.models {
        let (_, report) = Segmenter::<f64>::run(kind, &g.ciphertext, &params);
        let seg = report.segmentations.into_iter().next().expect("one cipher in, one segmentation out");
        let v = vocab_f1(&report.vocabulary, &gold_vocab)?;
        let (rate, edits) = seg_edits(&seg, &g.gold)?;
        scores.push(ModelScore {
            model: kind.id().to_string(),
            f1: v.f1,
            precision: v.precision,
            recall: v.recall,
            seg_er: rate,
            seg_edits: edits,
            reference_segments: g.gold.len(),
            learned_vocabulary: report.vocabulary.len(),
        });
        segmentations.push((kind, seg));
    }
    let record = CipherRecord {
        id: id.clone(),
        condition: condition.to_string(),
        length: g.ciphertext.len(),
        gold_vocabulary: gold_vocab.len(),
        vocab_size,
        scores,
    };
    Ok((record, CipherArtifact { id, cipher: g.clone(), segmentations }))
}

/// Mean rows per (condition, nominal length, model), in first-seen order.
fn aggregate(cfg: &ExperimentConfig, records: &[(usize, CipherRecord)]) -> Vec<TableRow> {
    let mut keys: Vec<(String, usize)> = Vec::new();
    for (len, r) in records {
        if !keys.contains(&(r.condition.clone(), *len)) {
            keys.push((r.condition.clone(), *len));
        }
    }
    let mut rows = Vec::new();
    for (condition, len) in keys {
        let group: Vec<&CipherRecord> =
            records.iter().filter(|(l, r)| *l == len && r.condition == condition).map(|(_, r)| r).collect();
        for &kind in &cfg.models {
            let scores: Vec<&ModelScore> =
                group.iter().filter_map(|r| r.scores.iter().find(|s| s.model == kind.id())).collect();
            let n = scores.len() as f64;
            rows.push(TableRow {
                condition: condition.clone(),
                length: len,
                model: kind.id().to_string(),
                label: kind.label().to_string(),
                mean_f1: scores.iter().map(|s| s.f1).sum::<f64>() / n,
                mean_seg_er: scores.iter().map(|s| s.seg_er).sum::<f64>() / n,
                ciphers: scores.len(),
            });
        }
    }
    rows
}

type Job = (usize, String, &'static str, GeneratedCipher, usize);

fn run_jobs(cfg: &ExperimentConfig, experiment: &str, jobs: Vec<Job>) -> Result<ExperimentRun> {
    let results: Vec<(usize, CipherRecord, CipherArtifact)> = with_pool(cfg.threads, || {
        jobs.into_par_iter()
            .map(|(len, id, cond, g, vocab)| score_cipher(cfg, id, cond, &g, vocab).map(|(r, a)| (len, r, a)))
            .collect::<Result<Vec<_>>>()
    })?;
    let mut records = Vec::with_capacity(results.len());
    let mut artifacts = Vec::with_capacity(results.len());
    for (len, r, a) in results {
        records.push((len, r));
        artifacts.push(a);
    }
    let table = ResultTable {
        experiment: experiment.to_string(),
        seed: cfg.seed,
        rows: aggregate(cfg, &records),
        ciphers: records.into_iter().map(|(_, r)| r).collect(),
    };
    Ok(ExperimentRun { table, artifacts, config: cfg.clone() })
}

/// Monoalphabetic batch with and/or without word spaces, every configured
/// model, vocabulary size from the config.
pub fn run_mono_experiment(cfg: &ExperimentConfig, corpus: &PlainText) -> Result<ExperimentRun> {
    let base = generate_batch(cfg, corpus, true)?;
    let mut jobs: Vec<Job> = Vec::new();
    for &spaces in cfg.spaces.conditions() {
        let cond = condition_name(spaces);
        for (i, g) in base.iter().enumerate() {
            let g = condition_variant(cfg, g.clone(), spaces);
            jobs.push((cfg.length, format!("{cond}/{i:03}"), cond, g, cfg.vocab_size));
        }
    }
    run_jobs(cfg, "mono", jobs)
}

/// Prefixes of `length_ciphers` long ciphers at doubling lengths from
/// `min_length` to `max_length`.
pub fn run_length_study(cfg: &ExperimentConfig, corpus: &PlainText) -> Result<ExperimentRun> {
    let spaces = cfg.spaces != SpaceMode::Off;
    let cond = condition_name(spaces);
    let lengths = crate::ciphergen::doubling_lengths(cfg.min_length, cfg.max_length);
    let mut jobs: Vec<Job> = Vec::new();
    for i in 0..cfg.length_ciphers {
        let g = condition_variant(cfg, generate_cipher(cfg, corpus, i, cfg.max_length)?, spaces);
        for (len, p) in lengths.iter().zip(truncate(&g, &lengths)?) {
            jobs.push((*len, format!("{cond}/{i:03}/{len}"), cond, p, cfg.vocab_size));
        }
    }
    run_jobs(cfg, "length", jobs)
}

/// Homophonic batch at each of `homophonic_lengths` (prefixes of one cipher
/// per seed); vocabulary size per cipher from [`homophonic_vocab_size`].
pub fn run_homophonic_experiment(cfg: &ExperimentConfig, corpus: &PlainText) -> Result<ExperimentRun> {
    let spaces = cfg.spaces == SpaceMode::On;
    let cond = condition_name(spaces);
    let longest = cfg.homophonic_lengths.iter().copied().max().unwrap_or(cfg.length);
    let mut jobs: Vec<Job> = Vec::new();
    for i in 0..cfg.n_ciphers {
        let g = condition_variant(cfg, generate_cipher(cfg, corpus, i, longest)?, spaces);
        for (len, p) in cfg.homophonic_lengths.iter().zip(truncate(&g, &cfg.homophonic_lengths)?) {
            let vocab = homophonic_vocab_size(&p);
            jobs.push((*len, format!("{cond}/{i:03}/{len}"), cond, p, vocab));
        }
    }
    run_jobs(cfg, "homophonic", jobs)
}

/// Gnuplot script plotting SegER against cipher length from `csv` (as
/// written by [`ResultTable::to_csv`] for a length study).
pub fn gnuplot_script(table: &ResultTable, csv: &str) -> String {
    let mut out = String::new();
    out.push_str("set datafile separator ','\nset logscale x 2\nset xlabel 'cipher length'\n");
    out.push_str("set ylabel 'SegER %'\nset key top right\n");
    let plots: Vec<String> = table
        .rows
        .iter()
        .map(|r| r.model.clone())
        .fold(Vec::new(), |mut acc, m| {
            if !acc.contains(&m) {
                acc.push(m);
            }
            acc
        })
        .into_iter()
        .map(|m| format!("'{csv}' using ($4 eq '{m}' ? $3 : 1/0):8 with linespoints title '{m}'"))
        .collect();
    let _ = writeln!(out, "plot {}", plots.join(", \\\n     "));
    out
}
