use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use log::info;

use numseg_core::charlm::{lm_train, read_arpa, write_arpa};
use numseg_core::corpus::clean_lines;
use numseg_core::decipher::Decoder;
use numseg_core::harness::{
    generate_batch, gnuplot_script, load_corpus, run_homophonic_experiment, run_length_study, run_mono_experiment,
    write_cipher, ExperimentConfig, SpaceMode,
};
use numseg_core::metrics::{seg_edits, ter_edits, vocab_f1, EvalReport};
use numseg_core::model::{parse_cipher, parse_key, parse_segmentation, CipherText};
use numseg_core::segmenters::{bpe_train, unigram_train, Segmenter, UnigramConfig};
use numseg_core::{CharNgramLm, Error, PlainText};

#[derive(Parser)]
#[command(name = "numseg", version, about = "Segment and decipher numerical substitution ciphers")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a batch of synthetic ciphers.
    Gen {
        #[arg(long)]
        spec: Option<PathBuf>,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        corpus: Option<PathBuf>,
        /// Override a config option, as key=value.
        #[arg(long = "set", value_name = "KEY=VALUE")]
        overrides: Vec<String>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Learn a segmentation model from a ciphertext.
    Train {
        #[arg(long, value_enum)]
        algo: Algo,
        #[arg(long = "max-piece")]
        max_piece: Option<usize>,
        #[arg(long, default_value_t = 36)]
        vocab: usize,
        /// Chunk width of the baseline.
        #[arg(long, default_value_t = 2)]
        width: usize,
        #[arg(long = "seed-multiplier", default_value_t = UnigramConfig::default().seed_multiplier)]
        seed_multiplier: usize,
        #[arg(long = "em-iters", default_value_t = UnigramConfig::default().em_iters)]
        em_iters: usize,
        #[arg(long = "prune-fraction", default_value_t = UnigramConfig::default().prune_fraction)]
        prune_fraction: f64,
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Segment a ciphertext with a trained model.
    Segment {
        #[arg(long)]
        model: PathBuf,
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Train a character n-gram model (ARPA output) on plain text.
    Lm {
        #[arg(long, default_value_t = 5)]
        order: usize,
        /// Keep word spaces; by default they are removed, matching deciphering.
        #[arg(long = "keep-spaces")]
        keep_spaces: bool,
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Decipher with a known key and a character language model.
    Decipher {
        #[arg(long)]
        key: PathBuf,
        #[arg(long)]
        lm: PathBuf,
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long = "seg-out")]
        seg_out: Option<PathBuf>,
        /// Decode in windows of about this many symbols.
        #[arg(long)]
        chunk: Option<usize>,
    },
    /// Score a hypothesis against a reference.
    Eval {
        #[arg(long)]
        hyp: PathBuf,
        #[arg(long = "ref")]
        reference: PathBuf,
        #[arg(long, value_enum)]
        metric: Metric,
        /// For f1: score the pieces of this model instead of the hypothesis segments.
        #[arg(long)]
        model: Option<PathBuf>,
        #[arg(long)]
        json: bool,
    },
    /// Run an experiment and write its tables and artifacts.
    Experiment {
        #[arg(value_enum)]
        kind: ExperimentKind,
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        corpus: Option<PathBuf>,
        #[arg(long = "set", value_name = "KEY=VALUE")]
        overrides: Vec<String>,
        #[arg(long)]
        out: Option<PathBuf>,
        /// Also write a gnuplot script (length study).
        #[arg(long)]
        plot: bool,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum Algo {
    Baseline,
    Bpe,
    Unigram,
}

#[derive(Clone, Copy, ValueEnum)]
enum Metric {
    Seger,
    F1,
    Ter,
}

#[derive(Clone, Copy, ValueEnum)]
enum ExperimentKind {
    Mono,
    Length,
    Homophonic,
}

enum Failure {
    Validation(String),
    Runtime(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        if e.is_validation() {
            Failure::Validation(e.to_string())
        } else {
            Failure::Runtime(e.to_string())
        }
    }
}

type CliResult<T = ()> = Result<T, Failure>;

fn read(path: &Path) -> CliResult<String> {
    fs::read_to_string(path).map_err(|e| Failure::Validation(format!("{}: {e}", path.display())))
}

fn write(path: &Path, text: &str) -> CliResult {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).map_err(|e| Failure::Runtime(format!("{}: {e}", dir.display())))?;
    }
    fs::write(path, text).map_err(|e| Failure::Runtime(format!("{}: {e}", path.display())))
}

fn emit(path: Option<&Path>, text: &str) -> CliResult {
    match path {
        Some(p) => write(p, text),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn read_cipher(path: &Path) -> CliResult<CipherText> {
    Ok(parse_cipher(&read(path)?, None)?.cipher)
}

fn build_config(
    file: Option<&Path>,
    base: ExperimentConfig,
    seed: Option<u64>,
    corpus: Option<&Path>,
    overrides: &[String],
) -> CliResult<ExperimentConfig> {
    let mut cfg = base;
    if let Some(p) = file {
        cfg.apply_text(&read(p)?, &p.display().to_string())?;
    }
    for (i, o) in overrides.iter().enumerate() {
        let bad = |reason: String| Failure::from(Error::Config { file: "--set".into(), line: i + 1, reason });
        let (k, v) = o.split_once('=').ok_or_else(|| bad(format!("expected key=value, got {o:?}")))?;
        cfg.set(k.trim(), v).map_err(bad)?;
    }
    if let Some(s) = seed {
        cfg.seed = s;
    }
    if let Some(c) = corpus {
        cfg.corpus = Some(c.to_path_buf());
    }
    cfg.check().map_err(|reason| Failure::from(Error::Config { file: "config".into(), line: 0, reason }))?;
    Ok(cfg)
}

fn run(cli: Cli) -> CliResult {
    match cli.command {
        Command::Gen { spec, seed, corpus, overrides, out } => {
            let cfg = build_config(spec.as_deref(), ExperimentConfig::default(), seed, corpus.as_deref(), &overrides)?;
            let text = load_corpus(&cfg)?;
            let conditions = cfg.spaces.conditions();
            for &spaces in conditions {
                let batch = generate_batch(&cfg, &text, spaces)?;
                let root = if conditions.len() > 1 {
                    out.join(if spaces { "spaces" } else { "no-spaces" })
                } else {
                    out.clone()
                };
                for (i, g) in batch.iter().enumerate() {
                    write_cipher(&root.join(format!("{i:03}")), g)?;
                }
                info!("wrote {} ciphers to {}", batch.len(), root.display());
            }
            write(&out.join("spec.cfg"), &cfg.to_text())
        }
        Command::Train { algo, max_piece, vocab, width, seed_multiplier, em_iters, prune_fraction, input, out } => {
            let cipher = read_cipher(&input)?;
            if matches!(max_piece, Some(0)) || width == 0 || vocab == 0 {
                return Err(Failure::Validation("sizes must be positive".into()));
            }
            let model: Segmenter<f64> = match algo {
                Algo::Baseline => Segmenter::Baseline(width),
                Algo::Bpe => Segmenter::Bpe(bpe_train(&cipher, vocab, max_piece)),
                Algo::Unigram => {
                    let cfg = UnigramConfig { vocab_size: vocab, max_piece_len: max_piece, seed_multiplier, em_iters, prune_fraction };
                    let (m, diag) = unigram_train(&cipher, &cfg);
                    info!("{} seed pieces, {} EM iterations", diag.seed_pieces, diag.em_iterations());
                    Segmenter::Unigram(m)
                }
            };
            write(&out, &model.to_json()?)
        }
        Command::Segment { model, input, out } => {
            let model = Segmenter::<f64>::from_json(&read(&model)?)?;
            let cipher = read_cipher(&input)?;
            emit(out.as_deref(), &model.segment(&cipher).serialize())
        }
        Command::Lm { order, keep_spaces, input, out } => {
            let lines: Vec<String> = clean_lines(&read(&input)?)
                .into_iter()
                .map(|l| if keep_spaces { l } else { l.replace(' ', "") })
                .collect();
            let lm: CharNgramLm = lm_train(&lines, order)?;
            write(&out, &write_arpa(&lm))
        }
        Command::Decipher { key, lm, input, out, seg_out, chunk } => {
            let cipher = parse_cipher(&read(&input)?, None)?.cipher;
            let key = parse_key(&read(&key)?, Some(cipher.alphabet()))?;
            let lm: CharNgramLm = read_arpa(&read(&lm)?)?;
            let decoder = Decoder::new(&key, &lm);
            let d = match chunk {
                Some(w) => decoder.decode_chunked(&cipher, w)?,
                None => decoder.decode(&cipher)?,
            };
            emit(out.as_deref(), &format!("{}\n", d.plaintext.as_str()))?;
            if let Some(p) = seg_out {
                write(&p, &d.segmentation.serialize())?;
            }
            Ok(())
        }
        Command::Eval { hyp, reference, metric, model, json } => {
            let mut report = EvalReport::default();
            let line = match metric {
                Metric::Seger => {
                    let h = parse_segmentation(&read(&hyp)?, None)?;
                    let r = parse_segmentation(&read(&reference)?, None)?;
                    let (rate, edits) = seg_edits(&h, &r)?;
                    report.seg_er = Some(rate);
                    report.edits = edits;
                    report.reference_len = r.len();
                    format!("seger {:.4}% ({edits} edits / {} segments)", 100.0 * rate, r.len())
                }
                Metric::F1 => {
                    let r = parse_segmentation(&read(&reference)?, None)?;
                    let learned = match model {
                        Some(m) => {
                            let cipher = parse_cipher(&read(&hyp)?, None)?.cipher;
                            Segmenter::<f64>::from_json(&read(&m)?)?.vocabulary(&cipher)
                        }
                        None => parse_segmentation(&read(&hyp)?, None)?.vocabulary(),
                    };
                    let v = vocab_f1(&learned, &r.vocabulary())?;
                    report.precision = Some(v.precision);
                    report.recall = Some(v.recall);
                    report.f1 = Some(v.f1);
                    report.reference_len = r.vocabulary().len();
                    format!("f1 {:.4}% (precision {:.4}%, recall {:.4}%)", 100.0 * v.f1, 100.0 * v.precision, 100.0 * v.recall)
                }
                Metric::Ter => {
                    let h = PlainText::new(read(&hyp)?.trim_end_matches('\n'));
                    let r = PlainText::new(read(&reference)?.trim_end_matches('\n'));
                    let (rate, edits) = ter_edits(&h, &r)?;
                    report.ter = Some(rate);
                    report.edits = edits;
                    report.reference_len = r.len_chars();
                    format!("ter {:.4}% ({edits} edits / {} characters)", 100.0 * rate, r.len_chars())
                }
            };
            if json {
                println!("{}", report.to_json()?);
            } else {
                println!("{line}");
            }
            Ok(())
        }
        Command::Experiment { kind, config, seed, corpus, overrides, out, plot } => {
            let base = match kind {
                ExperimentKind::Homophonic => ExperimentConfig {
                    homophones_per_vowel: 3,
                    homophones_per_consonant: 2,
                    spaces: SpaceMode::Off,
                    n_ciphers: 10,
                    ..ExperimentConfig::default()
                },
                ExperimentKind::Mono | ExperimentKind::Length => ExperimentConfig::default(),
            };
            let cfg = build_config(config.as_deref(), base, seed, corpus.as_deref(), &overrides)?;
            let text = load_corpus(&cfg)?;
            let run = match kind {
                ExperimentKind::Mono => run_mono_experiment(&cfg, &text)?,
                ExperimentKind::Length => run_length_study(&cfg, &text)?,
                ExperimentKind::Homophonic => run_homophonic_experiment(&cfg, &text)?,
            };
            print!("{}", run.table.render());
            if let Some(dir) = out {
                run.write(&dir)?;
                if plot {
                    write(&dir.join("plot.gp"), &gnuplot_script(&run.table, "results.csv"))?;
                }
                info!("wrote {}", dir.display());
            }
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Validation(m)) => {
            eprintln!("error: {m}");
            ExitCode::from(1)
        }
        Err(Failure::Runtime(m)) => {
            eprintln!("error: {m}");
            ExitCode::from(2)
        }
    }
}
