//! Key-free segmentation: fixed-width baselines, byte pair encoding and a
//! unigram language model, plus the versioned model file they share.

mod baseline;
mod bpe;
mod unigram;

use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

pub use baseline::baseline_segment;
pub use bpe::{bpe_segment, bpe_train, MergeVocabulary};
pub use unigram::{
    max_seed_vocabulary, seed_pieces, unigram_segment, unigram_train, EmRound, TrainingDiagnostics, UnigramConfig,
    UnigramModel,
};

use crate::error::{Error, Result};
use crate::model::{CipherText, Segmentation};
use crate::scalar::Scalar;

const MODEL_FORMAT: &str = "numseg-model";
const MODEL_VERSION: u32 = 1;

/// Run `f` over each hard-boundary span and keep the cipher's line layout.
pub(crate) fn segment_spans(cipher: &CipherText, mut f: impl FnMut(&str) -> Vec<String>) -> Segmentation {
    let spaces = cipher.has_spaces();
    let mut lines = Vec::with_capacity(cipher.lines().len());
    for line in cipher.lines() {
        let mut segs = Vec::new();
        if spaces {
            for w in line.split_whitespace() {
                segs.extend(f(w));
            }
        } else if !line.is_empty() {
            segs.extend(f(line));
        }
        lines.push(segs);
    }
    let seg = Segmentation::from_lines(lines).expect("segmenters never emit empty segments");
    debug_assert!(seg.validate(cipher.flat()).is_ok());
    seg
}

/// The segmenters compared in the experiments.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum ModelKind {
    OneDigit,
    TwoDigit,
    Bpe,
    Bpe2,
    Unigram,
    Unigram2,
}

impl ModelKind {
    pub const ALL: [ModelKind; 6] =
        [ModelKind::OneDigit, ModelKind::TwoDigit, ModelKind::Bpe, ModelKind::Bpe2, ModelKind::Unigram, ModelKind::Unigram2];

    /// Row label used in result tables.
    pub fn label(self) -> &'static str {
        match self {
            ModelKind::OneDigit => "1-dig baseline",
            ModelKind::TwoDigit => "2-dig baseline",
            ModelKind::Bpe => "BPE",
            ModelKind::Bpe2 => "BPE 2",
            ModelKind::Unigram => "Unigram LM",
            ModelKind::Unigram2 => "Unigram LM 2",
        }
    }

    pub fn id(self) -> &'static str {
        match self {
            ModelKind::OneDigit => "1-dig",
            ModelKind::TwoDigit => "2-dig",
            ModelKind::Bpe => "bpe",
            ModelKind::Bpe2 => "bpe2",
            ModelKind::Unigram => "unigram",
            ModelKind::Unigram2 => "unigram2",
        }
    }

    /// Piece-length cap of the learned variants.
    pub fn max_piece_len(self) -> Option<usize> {
        match self {
            ModelKind::Bpe2 | ModelKind::Unigram2 => Some(2),
            _ => None,
        }
    }
}

impl fmt::Display for ModelKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.id())
    }
}

impl FromStr for ModelKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        ModelKind::ALL
            .into_iter()
            .find(|m| m.id() == s)
            .ok_or_else(|| Error::InvalidArgument(format!("unknown model {s:?}")))
    }
}

/// A trained (or parameter-free) segmenter.
#[derive(Clone, Debug, PartialEq)]
pub enum Segmenter<F> {
    Baseline(usize),
    Bpe(MergeVocabulary),
    Unigram(UnigramModel<F>),
}

/// Vocabulary, segmentations and training trace of one segmenter run.
#[derive(Clone, Debug, PartialEq)]
pub struct SegmenterReport {
    pub vocabulary: BTreeSet<String>,
    pub segmentations: Vec<Segmentation>,
    pub diagnostics: TrainingDiagnostics,
}

/// Shared training parameters.
#[derive(Clone, Debug, PartialEq)]
pub struct TrainParams {
    pub vocab_size: usize,
    pub unigram: UnigramConfig,
}

impl Default for TrainParams {
    fn default() -> Self {
        Self { vocab_size: 36, unigram: UnigramConfig::default() }
    }
}

impl<F: Scalar> Segmenter<F> {
    /// Train `kind` on `corpus`.
    pub fn train(kind: ModelKind, corpus: &CipherText, params: &TrainParams) -> (Self, TrainingDiagnostics) {
        match kind {
            ModelKind::OneDigit => (Segmenter::Baseline(1), TrainingDiagnostics::default()),
            ModelKind::TwoDigit => (Segmenter::Baseline(2), TrainingDiagnostics::default()),
            ModelKind::Bpe | ModelKind::Bpe2 => {
                (Segmenter::Bpe(bpe_train(corpus, params.vocab_size, kind.max_piece_len())), TrainingDiagnostics::default())
            }
            ModelKind::Unigram | ModelKind::Unigram2 => {
                let cfg = UnigramConfig {
                    vocab_size: params.vocab_size,
                    max_piece_len: kind.max_piece_len(),
                    ..params.unigram.clone()
                };
                let (m, d) = unigram_train(corpus, &cfg);
                (Segmenter::Unigram(m), d)
            }
        }
    }

    pub fn segment(&self, cipher: &CipherText) -> Segmentation {
        match self {
            Segmenter::Baseline(k) => baseline_segment(cipher, *k),
            Segmenter::Bpe(v) => bpe_segment(cipher, v),
            Segmenter::Unigram(m) => unigram_segment(cipher, m),
        }
    }

    /// Learned vocabulary. Baselines have none, so the distinct segments of
    /// their output on `cipher` stand in for it.
    pub fn vocabulary(&self, cipher: &CipherText) -> BTreeSet<String> {
        match self {
            Segmenter::Baseline(_) => self.segment(cipher).vocabulary(),
            Segmenter::Bpe(v) => v.pieces().clone(),
            Segmenter::Unigram(m) => m.vocabulary(),
        }
    }

    /// Train on `corpus` and segment it.
    pub fn run(kind: ModelKind, corpus: &CipherText, params: &TrainParams) -> (Self, SegmenterReport) {
        let (model, diagnostics) = Self::train(kind, corpus, params);
        let seg = model.segment(corpus);
        let vocabulary = model.vocabulary(corpus);
        (model, SegmenterReport { vocabulary, segmentations: vec![seg], diagnostics })
    }

    pub fn to_json(&self) -> Result<String> {
        let file = match self {
            Segmenter::Baseline(k) => ModelFile::Baseline { width: *k },
            Segmenter::Bpe(v) => ModelFile::Bpe {
                max_piece_len: v.max_piece_len(),
                alphabet: v.pieces().iter().filter(|p| p.chars().count() == 1).cloned().collect(),
                merges: v.merges().to_vec(),
            },
            Segmenter::Unigram(m) => ModelFile::Unigram {
                max_piece_len: m.max_piece_len(),
                pieces: m.pieces().iter().map(|(p, lp)| (p.clone(), lp.as_f64())).collect(),
            },
        };
        let env = Envelope { format: MODEL_FORMAT.into(), version: MODEL_VERSION, model: file };
        Ok(serde_json::to_string_pretty(&env)? + "\n")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let env: Envelope = serde_json::from_str(text)?;
        if env.format != MODEL_FORMAT {
            return Err(Error::Model(format!("unexpected format tag {:?}", env.format)));
        }
        if env.version != MODEL_VERSION {
            return Err(Error::Model(format!("unsupported version {}", env.version)));
        }
        Ok(match env.model {
            ModelFile::Baseline { width } if width >= 1 => Segmenter::Baseline(width),
            ModelFile::Baseline { .. } => return Err(Error::Model("baseline width must be positive".into())),
            ModelFile::Bpe { max_piece_len, alphabet, merges } => {
                let mut symbols = Vec::new();
                for a in alphabet {
                    let mut cs = a.chars();
                    match (cs.next(), cs.next()) {
                        (Some(c), None) => symbols.push(c),
                        _ => return Err(Error::Model(format!("alphabet entry {a:?} is not one symbol"))),
                    }
                }
                Segmenter::Bpe(MergeVocabulary::new(symbols, merges, max_piece_len))
            }
            ModelFile::Unigram { max_piece_len, pieces } => {
                if pieces.iter().any(|(p, _)| p.is_empty()) {
                    return Err(Error::Model("empty piece".into()));
                }
                Segmenter::Unigram(UnigramModel::from_pieces(
                    pieces.into_iter().map(|(p, lp)| (p, F::of(lp))),
                    max_piece_len,
                ))
            }
        })
    }
}

#[derive(Serialize, Deserialize)]
struct Envelope {
    format: String,
    version: u32,
    #[serde(flatten)]
    model: ModelFile,
}

#[derive(Serialize, Deserialize)]
#[serde(tag = "algorithm", rename_all = "lowercase")]
enum ModelFile {
    Baseline { width: usize },
    Bpe { max_piece_len: Option<usize>, alphabet: Vec<String>, merges: Vec<(String, String)> },
    Unigram { max_piece_len: Option<usize>, pieces: Vec<(String, f64)> },
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn model_kind_ids_round_trip() {
        for m in ModelKind::ALL {
            assert_eq!(m.id().parse::<ModelKind>().unwrap(), m);
        }
        assert!("bpe3".parse::<ModelKind>().is_err());
    }

    #[test]
    fn model_files_round_trip() {
        let c = CipherText::from_lines(Default::default(), vec!["121234123456".into(), "3456".into()]).unwrap();
        for kind in [ModelKind::TwoDigit, ModelKind::Bpe2, ModelKind::Unigram2] {
            let (m, _) = Segmenter::<f64>::train(kind, &c, &TrainParams { vocab_size: 14, ..Default::default() });
            let back = Segmenter::<f64>::from_json(&m.to_json().unwrap()).unwrap();
            assert_eq!(back.segment(&c), m.segment(&c));
        }
    }

    #[test]
    fn model_file_rejects_other_formats() {
        assert!(Segmenter::<f64>::from_json(r#"{"format":"x","version":1,"algorithm":"baseline","width":2}"#).is_err());
        assert!(Segmenter::<f64>::from_json(r#"{"format":"numseg-model","version":9,"algorithm":"baseline","width":2}"#).is_err());
        let ok = Segmenter::<f64>::from_json(r#"{"format":"numseg-model","version":1,"algorithm":"baseline","width":2}"#);
        assert_eq!(ok.unwrap(), Segmenter::Baseline(2));
    }
}
