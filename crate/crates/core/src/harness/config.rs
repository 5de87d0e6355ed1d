use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use crate::ciphergen::{DEFAULT_LENGTH, DEFAULT_LINE_WIDTH};
use crate::error::{Error, Result};
use crate::segmenters::{ModelKind, UnigramConfig};

/// Which space conditions an experiment runs.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SpaceMode {
    On,
    Off,
    Both,
}

impl SpaceMode {
    pub fn conditions(self) -> &'static [bool] {
        match self {
            SpaceMode::On => &[true],
            SpaceMode::Off => &[false],
            SpaceMode::Both => &[true, false],
        }
    }
}

impl fmt::Display for SpaceMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            SpaceMode::On => "on",
            SpaceMode::Off => "off",
            SpaceMode::Both => "both",
        })
    }
}

impl FromStr for SpaceMode {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "on" | "true" | "yes" => Ok(SpaceMode::On),
            "off" | "false" | "no" => Ok(SpaceMode::Off),
            "both" => Ok(SpaceMode::Both),
            _ => Err(format!("expected on, off or both, got {s:?}")),
        }
    }
}

/// Every knob of the generator and the experiments. Read from a flat
/// `key = value` file; `#` starts a comment.
#[derive(Clone, Debug, PartialEq)]
pub struct ExperimentConfig {
    pub corpus: Option<PathBuf>,
    pub seed: u64,
    pub n_ciphers: usize,
    pub length: usize,
    pub spaces: SpaceMode,
    pub line_width: usize,
    pub models: Vec<ModelKind>,
    pub vocab_size: usize,
    pub seed_multiplier: usize,
    pub em_iters: usize,
    pub prune_fraction: f64,
    pub homophones_per_vowel: usize,
    pub homophones_per_consonant: usize,
    pub nulls: usize,
    pub nomenclature: usize,
    pub null_rate: f64,
    pub nomenclature_rate: f64,
    pub min_length: usize,
    pub max_length: usize,
    pub length_ciphers: usize,
    pub homophonic_lengths: Vec<usize>,
    pub threads: Option<usize>,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        let u = UnigramConfig::default();
        Self {
            corpus: None,
            seed: 1,
            n_ciphers: 100,
            length: DEFAULT_LENGTH,
            spaces: SpaceMode::Both,
            line_width: DEFAULT_LINE_WIDTH,
            models: ModelKind::ALL.to_vec(),
            vocab_size: 36,
            seed_multiplier: u.seed_multiplier,
            em_iters: u.em_iters,
            prune_fraction: u.prune_fraction,
            homophones_per_vowel: 1,
            homophones_per_consonant: 1,
            nulls: 0,
            nomenclature: 0,
            null_rate: 0.0,
            nomenclature_rate: 0.0,
            min_length: 128,
            max_length: 16384,
            length_ciphers: 1,
            homophonic_lengths: vec![1024, 4096],
            threads: None,
        }
    }
}

fn parse<T: FromStr>(value: &str) -> std::result::Result<T, String>
where
    T::Err: fmt::Display,
{
    value.parse::<T>().map_err(|e| format!("bad value {value:?}: {e}"))
}

fn parse_list<T: FromStr>(value: &str) -> std::result::Result<Vec<T>, String>
where
    T::Err: fmt::Display,
{
    let items: Vec<T> =
        value.split(',').map(str::trim).filter(|s| !s.is_empty()).map(parse).collect::<std::result::Result<_, _>>()?;
    if items.is_empty() {
        return Err("empty list".into());
    }
    Ok(items)
}

fn positive(n: usize) -> std::result::Result<usize, String> {
    if n == 0 {
        Err("must be positive".into())
    } else {
        Ok(n)
    }
}

fn rate(x: f64) -> std::result::Result<f64, String> {
    if (0.0..=1.0).contains(&x) {
        Ok(x)
    } else {
        Err(format!("{x} is not in [0, 1]"))
    }
}

impl ExperimentConfig {
    /// Set one option from its text form.
    pub fn set(&mut self, key: &str, value: &str) -> std::result::Result<(), String> {
        let v = value.trim();
        match key {
            "corpus" => self.corpus = Some(PathBuf::from(v)),
            "seed" => self.seed = parse(v)?,
            "n_ciphers" => self.n_ciphers = positive(parse(v)?)?,
            "length" => self.length = positive(parse(v)?)?,
            "spaces" => self.spaces = parse(v)?,
            "line_width" => {
                let w: usize = parse(v)?;
                if w < 2 {
                    return Err("line width must be at least 2".into());
                }
                self.line_width = w;
            }
            "models" => self.models = parse_list(v)?,
            "vocab_size" => self.vocab_size = positive(parse(v)?)?,
            "seed_multiplier" => self.seed_multiplier = positive(parse(v)?)?,
            "em_iters" => self.em_iters = positive(parse(v)?)?,
            "prune_fraction" => {
                let f: f64 = parse(v)?;
                if !(f > 0.0 && f < 1.0) {
                    return Err("prune fraction must be in (0, 1)".into());
                }
                self.prune_fraction = f;
            }
            "homophones_per_vowel" => self.homophones_per_vowel = positive(parse(v)?)?,
            "homophones_per_consonant" => self.homophones_per_consonant = positive(parse(v)?)?,
            "nulls" => self.nulls = parse(v)?,
            "nomenclature" => self.nomenclature = parse(v)?,
            "null_rate" => self.null_rate = rate(parse(v)?)?,
            "nomenclature_rate" => self.nomenclature_rate = rate(parse(v)?)?,
            "min_length" => self.min_length = positive(parse(v)?)?,
            "max_length" => self.max_length = positive(parse(v)?)?,
            "length_ciphers" => self.length_ciphers = positive(parse(v)?)?,
            "homophonic_lengths" => {
                let l: Vec<usize> = parse_list(v)?;
                if l.contains(&0) {
                    return Err("lengths must be positive".into());
                }
                self.homophonic_lengths = l;
            }
            "threads" => self.threads = Some(positive(parse(v)?)?),
            _ => return Err(format!("unknown option {key:?}")),
        }
        Ok(())
    }

    /// Parse config text over the defaults; `file` names the source in error messages.
    pub fn parse(text: &str, file: &str) -> Result<Self> {
        let mut cfg = Self::default();
        cfg.apply_text(text, file)?;
        cfg.check().map_err(|reason| Error::Config { file: file.to_string(), line: 0, reason })?;
        Ok(cfg)
    }

    /// Apply the options in config text on top of `self`.
    pub fn apply_text(&mut self, text: &str, file: &str) -> Result<()> {
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let err = |reason: String| Error::Config { file: file.to_string(), line: i + 1, reason };
            let (k, v) = line.split_once('=').ok_or_else(|| err("expected key = value".into()))?;
            self.set(k.trim(), v).map_err(err)?;
        }
        Ok(())
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::Config {
            file: path.display().to_string(),
            line: 0,
            reason: e.to_string(),
        })?;
        Self::parse(&text, &path.display().to_string())
    }

    /// Cross-field checks.
    pub fn check(&self) -> std::result::Result<(), String> {
        if self.min_length > self.max_length {
            return Err(format!("min_length {} exceeds max_length {}", self.min_length, self.max_length));
        }
        Ok(())
    }

    /// Canonical `key = value` text; parsing it gives back the same config.
    pub fn to_text(&self) -> String {
        let list = |v: &[usize]| v.iter().map(usize::to_string).collect::<Vec<_>>().join(",");
        let mut out = String::new();
        if let Some(c) = &self.corpus {
            out.push_str(&format!("corpus = {}\n", c.display()));
        }
        out.push_str(&format!("seed = {}\n", self.seed));
        out.push_str(&format!("n_ciphers = {}\n", self.n_ciphers));
        out.push_str(&format!("length = {}\n", self.length));
        out.push_str(&format!("spaces = {}\n", self.spaces));
        out.push_str(&format!("line_width = {}\n", self.line_width));
        let models: Vec<&str> = self.models.iter().map(|m| m.id()).collect();
        out.push_str(&format!("models = {}\n", models.join(",")));
        out.push_str(&format!("vocab_size = {}\n", self.vocab_size));
        out.push_str(&format!("seed_multiplier = {}\n", self.seed_multiplier));
        out.push_str(&format!("em_iters = {}\n", self.em_iters));
        out.push_str(&format!("prune_fraction = {}\n", self.prune_fraction));
        out.push_str(&format!("homophones_per_vowel = {}\n", self.homophones_per_vowel));
        out.push_str(&format!("homophones_per_consonant = {}\n", self.homophones_per_consonant));
        out.push_str(&format!("nulls = {}\n", self.nulls));
        out.push_str(&format!("nomenclature = {}\n", self.nomenclature));
        out.push_str(&format!("null_rate = {}\n", self.null_rate));
        out.push_str(&format!("nomenclature_rate = {}\n", self.nomenclature_rate));
        out.push_str(&format!("min_length = {}\n", self.min_length));
        out.push_str(&format!("max_length = {}\n", self.max_length));
        out.push_str(&format!("length_ciphers = {}\n", self.length_ciphers));
        out.push_str(&format!("homophonic_lengths = {}\n", list(&self.homophonic_lengths)));
        if let Some(t) = self.threads {
            out.push_str(&format!("threads = {t}\n"));
        }
        out
    }

    pub fn unigram(&self) -> UnigramConfig {
        UnigramConfig {
            vocab_size: self.vocab_size,
            max_piece_len: None,
            seed_multiplier: self.seed_multiplier,
            em_iters: self.em_iters,
            prune_fraction: self.prune_fraction,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_and_reports_line_numbers() {
        let cfg = ExperimentConfig::parse("# batch\nn_ciphers = 5\nmodels = bpe2, unigram2\n", "a.cfg").unwrap();
        assert_eq!(cfg.n_ciphers, 5);
        assert_eq!(cfg.models, vec![ModelKind::Bpe2, ModelKind::Unigram2]);
        match ExperimentConfig::parse("seed = 1\nlength = -3\n", "b.cfg") {
            Err(Error::Config { file, line, .. }) => assert_eq!((file.as_str(), line), ("b.cfg", 2)),
            other => panic!("unexpected {other:?}"),
        }
        assert!(ExperimentConfig::parse("colour = red\n", "c.cfg").is_err());
        assert!(ExperimentConfig::parse("just words\n", "c.cfg").is_err());
        assert!(ExperimentConfig::parse("min_length = 4096\nmax_length = 128\n", "c.cfg").is_err());
    }

    #[test]
    fn text_form_round_trips() {
        let mut cfg = ExperimentConfig::default();
        cfg.set("corpus", "data/x.txt").unwrap();
        cfg.set("spaces", "off").unwrap();
        cfg.set("threads", "2").unwrap();
        assert_eq!(ExperimentConfig::parse(&cfg.to_text(), "t").unwrap(), cfg);
        assert_eq!(ExperimentConfig::parse(&ExperimentConfig::default().to_text(), "t").unwrap(), ExperimentConfig::default());
    }
}
