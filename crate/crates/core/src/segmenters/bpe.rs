use std::collections::{BTreeMap, BTreeSet, HashMap};

use crate::model::{CipherText, Segmentation};
use crate::segmenters::segment_spans;

/// Learned BPE merges, in training order.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MergeVocabulary {
    pub(crate) merges: Vec<(String, String)>,
    pub(crate) pieces: BTreeSet<String>,
    pub(crate) max_piece_len: Option<usize>,
}

impl MergeVocabulary {
    pub fn new(alphabet: impl IntoIterator<Item = char>, merges: Vec<(String, String)>, max_piece_len: Option<usize>) -> Self {
        let mut pieces: BTreeSet<String> = alphabet.into_iter().map(String::from).collect();
        for (a, b) in &merges {
            pieces.insert(format!("{a}{b}"));
        }
        Self { merges, pieces, max_piece_len }
    }

    pub fn merges(&self) -> &[(String, String)] {
        &self.merges
    }

    pub fn pieces(&self) -> &BTreeSet<String> {
        &self.pieces
    }

    pub fn max_piece_len(&self) -> Option<usize> {
        self.max_piece_len
    }
}

struct Interner {
    strings: Vec<String>,
    lookup: HashMap<String, u32>,
}

impl Interner {
    fn id(&mut self, s: &str) -> u32 {
        if let Some(&id) = self.lookup.get(s) {
            return id;
        }
        let id = self.strings.len() as u32;
        self.strings.push(s.to_string());
        self.lookup.insert(s.to_string(), id);
        id
    }
}

/// Greedy pair merging. Pairs whose merge would exceed `max_piece_len`
/// symbols are never candidates; ties on frequency go to the
/// lexicographically smallest (left, right) pair.
pub fn bpe_train(corpus: &CipherText, vocab_size: usize, max_piece_len: Option<usize>) -> MergeVocabulary {
    let mut interner = Interner { strings: Vec::new(), lookup: HashMap::new() };
    let mut span_counts: BTreeMap<&str, usize> = BTreeMap::new();
    for s in corpus.spans() {
        *span_counts.entry(s).or_default() += 1;
    }
    let mut words: Vec<(Vec<u32>, usize)> = span_counts
        .into_iter()
        .map(|(s, n)| (s.chars().map(|c| interner.id(c.encode_utf8(&mut [0; 4]))).collect(), n))
        .collect();
    let mut lens: Vec<usize> = vec![1; interner.strings.len()];
    let mut vocab = MergeVocabulary::new(corpus.alphabet().symbols().iter().copied(), Vec::new(), max_piece_len);

    while vocab.pieces.len() < vocab_size {
        let mut counts: HashMap<(u32, u32), usize> = HashMap::new();
        for (w, n) in &words {
            for p in w.windows(2) {
                *counts.entry((p[0], p[1])).or_default() += n;
            }
        }
        let best = counts
            .into_iter()
            .filter(|&((a, b), _)| max_piece_len.is_none_or(|m| lens[a as usize] + lens[b as usize] <= m))
            .max_by(|&(pa, ca), &(pb, cb)| {
                let key_a = (&interner.strings[pa.0 as usize], &interner.strings[pa.1 as usize]);
                let key_b = (&interner.strings[pb.0 as usize], &interner.strings[pb.1 as usize]);
                ca.cmp(&cb).then_with(|| key_b.cmp(&key_a))
            });
        let Some(((a, b), count)) = best else { break };
        if count < 2 {
            break;
        }
        let merged = format!("{}{}", interner.strings[a as usize], interner.strings[b as usize]);
        let new_id = interner.id(&merged);
        if lens.len() <= new_id as usize {
            lens.push(lens[a as usize] + lens[b as usize]);
        }
        for (w, _) in &mut words {
            merge_pair(w, a, b, new_id);
        }
        vocab.merges.push((interner.strings[a as usize].clone(), interner.strings[b as usize].clone()));
        vocab.pieces.insert(merged);
    }
    vocab
}

fn merge_pair(w: &mut Vec<u32>, a: u32, b: u32, to: u32) {
    let mut out = Vec::with_capacity(w.len());
    let mut i = 0;
    while i < w.len() {
        if i + 1 < w.len() && w[i] == a && w[i + 1] == b {
            out.push(to);
            i += 2;
        } else {
            out.push(w[i]);
            i += 1;
        }
    }
    *w = out;
}

/// Replay the merges in training order over each span.
pub fn bpe_segment(cipher: &CipherText, vocab: &MergeVocabulary) -> Segmentation {
    let ranks: HashMap<(&str, &str), usize> =
        vocab.merges.iter().enumerate().map(|(r, (a, b))| ((a.as_str(), b.as_str()), r)).collect();
    segment_spans(cipher, |span| apply_merges(span, &ranks))
}

fn apply_merges(span: &str, ranks: &HashMap<(&str, &str), usize>) -> Vec<String> {
    let mut pieces: Vec<String> = span.chars().map(String::from).collect();
    loop {
        let best = pieces
            .windows(2)
            .filter_map(|p| ranks.get(&(p[0].as_str(), p[1].as_str())).copied())
            .min();
        let Some(rank) = best else { break };
        let mut out = Vec::with_capacity(pieces.len());
        let mut i = 0;
        while i < pieces.len() {
            if i + 1 < pieces.len() && ranks.get(&(pieces[i].as_str(), pieces[i + 1].as_str())) == Some(&rank) {
                out.push(format!("{}{}", pieces[i], pieces[i + 1]));
                i += 2;
            } else {
                out.push(std::mem::take(&mut pieces[i]));
                i += 1;
            }
        }
        pieces = out;
    }
    pieces
}
