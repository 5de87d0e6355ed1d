use std::cmp::Ordering;
use std::collections::{BTreeMap, BTreeSet, HashMap};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::model::{CipherAlphabet, CipherText, Segmentation};
use crate::scalar::{log_sum_exp, Scalar};
use crate::segmenters::segment_spans;

/// Training knobs for the unigram segmenter.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct UnigramConfig {
    pub vocab_size: usize,
    pub max_piece_len: Option<usize>,
    /// Multi-symbol seed pieces kept, as a multiple of `vocab_size`.
    pub seed_multiplier: usize,
    /// EM iterations between pruning steps.
    pub em_iters: usize,
    /// Fraction of the vocabulary dropped at each pruning step.
    pub prune_fraction: f64,
}

impl Default for UnigramConfig {
    fn default() -> Self {
        Self { vocab_size: 36, max_piece_len: None, seed_multiplier: 4, em_iters: 2, prune_fraction: 0.25 }
    }
}

/// Corpus log-likelihood after each EM update of one round.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct EmRound {
    pub pieces: usize,
    /// First entry is the likelihood before the round's first update.
    pub log_likelihood: Vec<f64>,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct TrainingDiagnostics {
    pub seed_pieces: usize,
    pub rounds: Vec<EmRound>,
}

impl TrainingDiagnostics {
    pub fn em_iterations(&self) -> usize {
        self.rounds.iter().map(|r| r.log_likelihood.len().saturating_sub(1)).sum()
    }

    /// Largest decrease of the likelihood between consecutive EM updates
    /// within a round (0 when the trace is monotone).
    pub fn max_decrease(&self) -> f64 {
        self.rounds
            .iter()
            .flat_map(|r| r.log_likelihood.windows(2).map(|w| w[0] - w[1]))
            .fold(0.0, f64::max)
    }
}

/// Piece log-probabilities of a trained unigram segmenter.
#[derive(Clone, Debug, PartialEq)]
pub struct UnigramModel<F> {
    pieces: Vec<(String, F)>,
    index: HashMap<String, usize>,
    max_piece_len: Option<usize>,
    trie: Trie,
}

impl<F: Scalar> UnigramModel<F> {
    /// Build from (piece, log-probability) pairs. Pieces are sorted by string.
    pub fn from_pieces(pieces: impl IntoIterator<Item = (String, F)>, max_piece_len: Option<usize>) -> Self {
        let mut pieces: Vec<(String, F)> = pieces.into_iter().collect();
        pieces.sort_by(|a, b| a.0.cmp(&b.0));
        pieces.dedup_by(|a, b| a.0 == b.0);
        let index = pieces.iter().enumerate().map(|(i, (p, _))| (p.clone(), i)).collect();
        let trie = Trie::build(pieces.iter().map(|(p, _)| p.as_str()));
        Self { pieces, index, max_piece_len, trie }
    }

    pub fn pieces(&self) -> &[(String, F)] {
        &self.pieces
    }

    pub fn log_prob(&self, piece: &str) -> Option<F> {
        self.index.get(piece).map(|&i| self.pieces[i].1)
    }

    pub fn vocabulary(&self) -> BTreeSet<String> {
        self.pieces.iter().map(|(p, _)| p.clone()).collect()
    }

    pub fn len(&self) -> usize {
        self.pieces.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pieces.is_empty()
    }

    pub fn max_piece_len(&self) -> Option<usize> {
        self.max_piece_len
    }

    /// Σ exp(log p) over all pieces.
    pub fn total_probability(&self) -> f64 {
        self.pieces.iter().map(|(_, lp)| lp.as_f64().exp()).sum()
    }

    fn lattice(&self, chars: &[char]) -> Lattice {
        Lattice::build(&self.trie, chars)
    }

    /// Best segmentation of one span and its log-probability. Ties go to
    /// fewer segments, then to the lexicographically smallest first segment.
    pub fn viterbi(&self, span: &str) -> Option<(Vec<String>, F)> {
        let chars: Vec<char> = span.chars().collect();
        let n = chars.len();
        let lattice = self.lattice(&chars);
        // best[i]: best score and segment count for chars[i..]
        let mut best: Vec<Option<(F, usize, usize)>> = vec![None; n + 1];
        best[n] = Some((F::zero(), 0, usize::MAX));
        for start in (0..n).rev() {
            let mut choice: Option<(F, usize, usize)> = None;
            for &(end, piece) in lattice.from(start) {
                let Some((tail, count, _)) = best[end] else { continue };
                let lp = self.pieces[piece].1;
                if lp == F::neg_infinity() {
                    continue;
                }
                let cand = (lp + tail, count + 1, piece);
                choice = Some(match choice {
                    None => cand,
                    Some(cur) => {
                        if self.better(cand, cur) {
                            cand
                        } else {
                            cur
                        }
                    }
                });
            }
            best[start] = choice;
        }
        let (score, _, _) = best[0]?;
        let mut out = Vec::new();
        let mut pos = 0;
        while pos < n {
            let (_, _, piece) = best[pos].expect("path exists");
            let p = &self.pieces[piece].0;
            out.push(p.clone());
            pos += p.chars().count();
        }
        Some((out, score))
    }

    fn better(&self, a: (F, usize, usize), b: (F, usize, usize)) -> bool {
        match a.0.partial_cmp(&b.0).unwrap_or(Ordering::Equal) {
            Ordering::Greater => true,
            Ordering::Less => false,
            Ordering::Equal => match a.1.cmp(&b.1) {
                Ordering::Less => true,
                Ordering::Greater => false,
                Ordering::Equal => self.pieces[a.2].0 < self.pieces[b.2].0,
            },
        }
    }
}

/// Viterbi segmentation of every span of `cipher`.
pub fn unigram_segment<F: Scalar>(cipher: &CipherText, model: &UnigramModel<F>) -> Segmentation {
    segment_spans(cipher, |span| {
        model.viterbi(span).map(|(s, _)| s).unwrap_or_else(|| span.chars().map(String::from).collect())
    })
}

#[derive(Clone, Debug, Default, PartialEq)]
struct Trie {
    children: Vec<Vec<(char, u32)>>,
    piece: Vec<Option<u32>>,
}

impl Trie {
    fn build<'a>(pieces: impl Iterator<Item = &'a str>) -> Self {
        let mut t = Trie { children: vec![Vec::new()], piece: vec![None] };
        for (id, p) in pieces.enumerate() {
            let mut node = 0usize;
            for c in p.chars() {
                node = match t.children[node].iter().find(|(k, _)| *k == c) {
                    Some(&(_, n)) => n as usize,
                    None => {
                        let n = t.children.len();
                        t.children.push(Vec::new());
                        t.piece.push(None);
                        t.children[node].push((c, n as u32));
                        n
                    }
                };
            }
            t.piece[node] = Some(id as u32);
        }
        t
    }
}

/// All (start, end, piece) matches in a span, grouped by start.
struct Lattice {
    offsets: Vec<usize>,
    edges: Vec<(usize, usize)>,
}

impl Lattice {
    fn build(trie: &Trie, chars: &[char]) -> Self {
        let mut offsets = Vec::with_capacity(chars.len() + 1);
        let mut edges = Vec::new();
        for start in 0..chars.len() {
            offsets.push(edges.len());
            let mut node = 0usize;
            for (k, &c) in chars[start..].iter().enumerate() {
                match trie.children[node].iter().find(|(x, _)| *x == c) {
                    Some(&(_, n)) => node = n as usize,
                    None => break,
                }
                if let Some(p) = trie.piece[node] {
                    edges.push((start + k + 1, p as usize));
                }
            }
        }
        offsets.push(edges.len());
        Lattice { offsets, edges }
    }

    fn len(&self) -> usize {
        self.offsets.len() - 1
    }

    fn from(&self, start: usize) -> &[(usize, usize)] {
        &self.edges[self.offsets[start]..self.offsets[start + 1]]
    }

    /// log Σ over segmentations of Π p, with `skip` excluded and `shift`
    /// added to every other piece's log-probability.
    fn log_z<F: Scalar>(&self, logp: &[F], skip: Option<usize>, shift: F) -> F {
        let n = self.len();
        let mut alpha = vec![F::neg_infinity(); n + 1];
        alpha[0] = F::zero();
        for start in 0..n {
            let a = alpha[start];
            if a == F::neg_infinity() {
                continue;
            }
            for &(end, piece) in self.from(start) {
                if Some(piece) == skip {
                    continue;
                }
                alpha[end] = F::log_add(alpha[end], a + logp[piece] + shift);
            }
        }
        alpha[n]
    }

    /// Adds `weight ×` expected piece counts to `counts`; returns log Z.
    fn expected_counts<F: Scalar>(&self, logp: &[F], weight: F, counts: &mut [F]) -> F {
        let n = self.len();
        let mut alpha = vec![F::neg_infinity(); n + 1];
        let mut beta = vec![F::neg_infinity(); n + 1];
        alpha[0] = F::zero();
        for start in 0..n {
            let a = alpha[start];
            if a == F::neg_infinity() {
                continue;
            }
            for &(end, piece) in self.from(start) {
                alpha[end] = F::log_add(alpha[end], a + logp[piece]);
            }
        }
        beta[n] = F::zero();
        for start in (0..n).rev() {
            let b = log_sum_exp(self.from(start).iter().map(|&(end, piece)| logp[piece] + beta[end]));
            beta[start] = b;
        }
        let z = alpha[n];
        if z == F::neg_infinity() {
            return z;
        }
        for (start, &a) in alpha.iter().enumerate().take(n) {
            if a == F::neg_infinity() {
                continue;
            }
            for &(end, piece) in self.from(start) {
                let post = (a + logp[piece] + beta[end] - z).exp();
                counts[piece] = counts[piece] + weight * post;
            }
        }
        z
    }
}

/// Distinct training spans with multiplicities, in sorted order.
fn span_counts(corpus: &CipherText) -> Vec<(Vec<char>, usize)> {
    let mut counts: BTreeMap<&str, usize> = BTreeMap::new();
    for s in corpus.spans() {
        *counts.entry(s).or_default() += 1;
    }
    counts.into_iter().map(|(s, n)| (s.chars().collect(), n)).collect()
}

/// Seed vocabulary: every symbol of the corpus plus the most valuable
/// multi-symbol substrings (frequency × length, seen at least twice, at most
/// `max_piece_len` long), capped at `seed_multiplier × vocab_size`.
/// Returns pieces with their initial weights (frequency × length).
pub fn seed_pieces(corpus: &CipherText, config: &UnigramConfig) -> Vec<(String, f64)> {
    let spans = span_counts(corpus);
    seed_from_spans(&spans, config.max_piece_len, Some(config.seed_multiplier * config.vocab_size))
}

/// Size of the seed vocabulary when the multiplier cap is lifted.
pub fn max_seed_vocabulary(corpus: &CipherText, max_piece_len: Option<usize>) -> usize {
    seed_from_spans(&span_counts(corpus), max_piece_len, None).len()
}

fn seed_from_spans(spans: &[(Vec<char>, usize)], max_len: Option<usize>, cap: Option<usize>) -> Vec<(String, f64)> {
    let mut singles: BTreeMap<char, usize> = BTreeMap::new();
    let mut multi: HashMap<String, usize> = HashMap::new();
    for (chars, n) in spans {
        for &c in chars {
            *singles.entry(c).or_default() += n;
        }
        for start in 0..chars.len() {
            let limit = max_len.map_or(chars.len(), |m| (start + m).min(chars.len()));
            let mut s = String::new();
            s.push(chars[start]);
            for &c in &chars[start + 1..limit] {
                s.push(c);
                *multi.entry(s.clone()).or_default() += n;
            }
        }
    }
    let mut ranked: Vec<(String, f64)> = multi
        .into_iter()
        .filter(|(_, n)| *n >= 2)
        .map(|(s, n)| {
            let score = (n * s.chars().count()) as f64;
            (s, score)
        })
        .collect();
    ranked.sort_by(|a, b| b.1.partial_cmp(&a.1).unwrap().then_with(|| a.0.cmp(&b.0)));
    if let Some(cap) = cap {
        ranked.truncate(cap);
    }
    let mut out: Vec<(String, f64)> = singles.into_iter().map(|(c, n)| (c.to_string(), n as f64)).collect();
    out.extend(ranked);
    out
}

struct Trainer<F> {
    pieces: Vec<String>,
    logp: Vec<F>,
    lattices: Vec<(Lattice, F)>,
    spans: Vec<(Vec<char>, usize)>,
}

impl<F: Scalar> Trainer<F> {
    fn new(spans: Vec<(Vec<char>, usize)>, seeds: Vec<(String, f64)>) -> Self {
        let total: f64 = seeds.iter().map(|(_, w)| w).sum();
        let pieces = seeds.iter().map(|(p, _)| p.clone()).collect();
        let logp = seeds.iter().map(|(_, w)| F::of((w / total).ln())).collect();
        let mut t = Trainer { pieces, logp, lattices: Vec::new(), spans };
        t.rebuild();
        t
    }

    fn rebuild(&mut self) {
        let trie = Trie::build(self.pieces.iter().map(String::as_str));
        self.lattices = self
            .spans
            .par_iter()
            .map(|(chars, n)| (Lattice::build(&trie, chars), F::of(*n as f64)))
            .collect();
    }

    fn log_likelihood(&self, skip: Option<usize>, shift: F) -> F {
        let parts: Vec<F> = self.lattices.par_iter().map(|(l, w)| *w * l.log_z(&self.logp, skip, shift)).collect();
        parts.into_iter().fold(F::zero(), |a, b| a + b)
    }

    /// One EM update. Returns the likelihood under the parameters before the update.
    fn em_step(&mut self) -> F {
        let k = self.pieces.len();
        let partial: Vec<(Vec<F>, F)> = self
            .lattices
            .par_iter()
            .map(|(l, w)| {
                let mut c = vec![F::zero(); k];
                let z = l.expected_counts(&self.logp, *w, &mut c);
                (c, *w * z)
            })
            .collect();
        let mut counts = vec![F::zero(); k];
        let mut ll = F::zero();
        for (c, z) in partial {
            for (acc, v) in counts.iter_mut().zip(c) {
                *acc = *acc + v;
            }
            ll = ll + z;
        }
        let total = counts.iter().fold(F::zero(), |a, &b| a + b);
        for (lp, c) in self.logp.iter_mut().zip(&counts) {
            *lp = if *c > F::zero() { (*c / total).ln() } else { F::neg_infinity() };
        }
        ll
    }

    /// Drop the multi-symbol pieces whose removal costs the least likelihood.
    fn prune(&mut self, target: usize) {
        let base = self.log_likelihood(None, F::zero());
        let mut losses: Vec<(F, usize)> = (0..self.pieces.len())
            .into_par_iter()
            .filter(|&i| self.pieces[i].chars().count() > 1)
            .map(|i| {
                let p = self.logp[i].exp();
                let loss = if p >= F::one() {
                    F::infinity()
                } else {
                    base - self.log_likelihood(Some(i), -(F::one() - p).ln())
                };
                (loss, i)
            })
            .collect();
        losses.sort_by(|a, b| {
            a.0.partial_cmp(&b.0).unwrap_or(Ordering::Equal).then_with(|| self.pieces[a.1].cmp(&self.pieces[b.1]))
        });
        let remove = self.pieces.len().saturating_sub(target).min(losses.len());
        let dropped: BTreeSet<usize> = losses[..remove].iter().map(|&(_, i)| i).collect();
        let mut pieces = Vec::new();
        let mut logp = Vec::new();
        for (i, (p, lp)) in self.pieces.drain(..).zip(self.logp.drain(..)).enumerate() {
            if !dropped.contains(&i) {
                pieces.push(p);
                logp.push(lp);
            }
        }
        let z = log_sum_exp(logp.iter().copied());
        for lp in &mut logp {
            *lp = *lp - z;
        }
        self.pieces = pieces;
        self.logp = logp;
        self.rebuild();
    }
}

/// Train a unigram segmenter by EM with likelihood-based vocabulary pruning.
///
/// Each round runs `em_iters` EM updates; while the vocabulary is larger than
/// `vocab_size`, the `prune_fraction` of multi-symbol pieces whose removal
/// least reduces the corpus likelihood is dropped and another round follows.
/// Single symbols are never pruned; alphabet symbols missing from the corpus
/// are added at the end with a small probability so every string stays
/// segmentable.
pub fn unigram_train<F: Scalar>(corpus: &CipherText, config: &UnigramConfig) -> (UnigramModel<F>, TrainingDiagnostics) {
    let spans = span_counts(corpus);
    let seeds = seed_from_spans(&spans, config.max_piece_len, Some(config.seed_multiplier * config.vocab_size));
    let mut diagnostics = TrainingDiagnostics { seed_pieces: seeds.len(), rounds: Vec::new() };
    if seeds.is_empty() {
        return (finalize(Vec::new(), corpus.alphabet(), config.max_piece_len), diagnostics);
    }
    let mut trainer: Trainer<F> = Trainer::new(spans, seeds);
    loop {
        let mut round = EmRound { pieces: trainer.pieces.len(), log_likelihood: Vec::new() };
        for _ in 0..config.em_iters.max(1) {
            round.log_likelihood.push(trainer.em_step().as_f64());
        }
        round.log_likelihood.push(trainer.log_likelihood(None, F::zero()).as_f64());
        let drops = round.log_likelihood.windows(2).any(|w| w[1] < w[0] - 1e-9 * w[0].abs().max(1.0));
        if drops {
            log::warn!("EM likelihood decreased within a round: {:?}", round.log_likelihood);
        }
        diagnostics.rounds.push(round);
        if trainer.pieces.len() <= config.vocab_size {
            break;
        }
        let shrunk = (trainer.pieces.len() as f64 * (1.0 - config.prune_fraction)).floor() as usize;
        let target = shrunk.max(config.vocab_size).min(trainer.pieces.len() - 1);
        let before = trainer.pieces.len();
        trainer.prune(target);
        if trainer.pieces.len() == before {
            break;
        }
    }
    let pieces = trainer.pieces.into_iter().zip(trainer.logp).collect();
    (finalize(pieces, corpus.alphabet(), config.max_piece_len), diagnostics)
}

fn finalize<F: Scalar>(mut pieces: Vec<(String, F)>, alphabet: &CipherAlphabet, max_len: Option<usize>) -> UnigramModel<F> {
    pieces.retain(|(p, lp)| *lp > F::neg_infinity() || p.chars().count() == 1);
    let floor = pieces
        .iter()
        .map(|(_, lp)| *lp)
        .filter(|lp| *lp > F::neg_infinity())
        .fold(F::zero(), F::min)
        - F::of(1000f64.ln());
    for (_, lp) in pieces.iter_mut() {
        if *lp == F::neg_infinity() {
            *lp = floor;
        }
    }
    for &c in alphabet.symbols() {
        let s = c.to_string();
        if !pieces.iter().any(|(p, _)| *p == s) {
            pieces.push((s, floor));
        }
    }
    let z = log_sum_exp(pieces.iter().map(|(_, lp)| *lp));
    for (_, lp) in pieces.iter_mut() {
        *lp = *lp - z;
    }
    UnigramModel::from_pieces(pieces, max_len)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cipher(lines: &[&str]) -> CipherText {
        CipherText::from_lines(CipherAlphabet::digits(), lines.iter().map(|s| s.to_string()).collect()).unwrap()
    }

    #[test]
    fn single_symbol_input() {
        let m: UnigramModel<f64> =
            UnigramModel::from_pieces([("7".to_string(), -1.0), ("77".to_string(), -1.5)], Some(2));
        assert_eq!(m.viterbi("7").unwrap().0, ["7"]);
        assert!(m.viterbi("").unwrap().0.is_empty());
    }

    #[test]
    fn ties_prefer_fewer_segments_then_smaller_first_piece() {
        let lp = (0.25f64).ln();
        let m = UnigramModel::from_pieces(
            [("1".to_string(), lp), ("2".to_string(), lp), ("12".to_string(), 2.0 * lp), ("21".to_string(), 2.0 * lp)],
            None,
        );
        assert_eq!(m.viterbi("12").unwrap().0, ["12"]);
        // 1|21 and 12|1 score the same with two segments
        assert_eq!(m.viterbi("121").unwrap().0, ["1", "21"]);
    }

    #[test]
    fn one_letter_alphabet_yields_runs() {
        let a = CipherAlphabet::new(['a']).unwrap();
        let c = CipherText::from_lines(a, vec!["aaaa".into(), "aaaaaa".into(), "aa".into()]).unwrap();
        let (m, diag) = unigram_train::<f64>(&c, &UnigramConfig { vocab_size: 3, ..Default::default() });
        assert!(m.pieces().iter().all(|(p, _)| p.chars().all(|c| c == 'a')));
        assert!((m.total_probability() - 1.0).abs() < 1e-6);
        assert!(diag.max_decrease() <= 1e-9);
        // marginals of a span lattice sum to one per position
        let trie = Trie::build(m.pieces().iter().map(|(p, _)| p.as_str()));
        let chars: Vec<char> = "aaaaa".chars().collect();
        let lattice = Lattice::build(&trie, &chars);
        let logp: Vec<f64> = m.pieces().iter().map(|(_, lp)| *lp).collect();
        let mut counts = vec![0.0; logp.len()];
        lattice.expected_counts(&logp, 1.0, &mut counts);
        let covered: f64 = counts.iter().zip(m.pieces()).map(|(c, (p, _))| c * p.len() as f64).sum();
        assert!((covered - 5.0).abs() < 1e-9);
    }

    #[test]
    fn seeds_respect_cap_and_keep_singles() {
        let c = cipher(&["1212121234", "343434"]);
        let cfg = UnigramConfig { vocab_size: 2, max_piece_len: Some(2), seed_multiplier: 1, ..Default::default() };
        let seeds = seed_pieces(&c, &cfg);
        let singles = seeds.iter().filter(|(p, _)| p.len() == 1).count();
        assert_eq!(singles, 4);
        assert_eq!(seeds.len(), 6);
        assert!(seeds.iter().all(|(p, _)| p.len() <= 2));
        assert_eq!(max_seed_vocabulary(&c, Some(2)), 4 + 4);
    }

    #[test]
    fn training_reaches_target_size() {
        let c = cipher(&["12345123451234512345", "5432154321"]);
        let cfg = UnigramConfig { vocab_size: 8, max_piece_len: Some(2), ..Default::default() };
        let (m, diag) = unigram_train::<f64>(&c, &cfg);
        assert!(m.len() <= 8 + 5, "{}", m.len());
        assert!(m.pieces().iter().all(|(p, _)| p.len() <= 2));
        assert!(diag.max_decrease() <= 1e-9);
        for d in "0123456789".chars() {
            assert!(m.log_prob(&d.to_string()).is_some());
        }
        let seg = unigram_segment(&c, &m);
        seg.validate(c.flat()).unwrap();
    }
}
