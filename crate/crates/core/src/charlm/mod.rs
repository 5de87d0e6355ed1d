//! Character n-gram language model with interpolated Witten-Bell smoothing.
//!
//! The interpolated estimate is stored in backoff form: for a history `h`
//! with `C` tokens of `T` distinct types, seen continuations keep their full
//! interpolated probability and everything else is reached through the
//! backoff weight `T / (C + T)`, which reproduces the interpolation exactly.

mod arpa;

use std::collections::{BTreeMap, HashMap};

use crate::error::{Error, Result};
use crate::scalar::Scalar;
use crate::wfst::{Arc, CharLabels, Label, StateId, Wfst, EPSILON, PHI};

pub use arpa::{read_arpa, write_arpa};

pub(crate) type Token = u32;
pub(crate) const BOS: Token = 0;
pub(crate) const EOS: Token = 1;
pub(crate) const UNK: Token = 2;
const FIRST_CHAR: Token = 3;

#[derive(Clone, Debug, PartialEq)]
pub(crate) struct Node<F> {
    /// Natural-log probabilities of continuations stored at this history, by token.
    pub(crate) probs: BTreeMap<Token, F>,
    /// Natural-log backoff weight.
    pub(crate) backoff: F,
}

impl<F: Scalar> Node<F> {
    fn new() -> Self {
        Self { probs: BTreeMap::new(), backoff: F::zero() }
    }
}

/// A trained character model. Log-probabilities are natural logs.
#[derive(Clone, Debug, PartialEq)]
pub struct CharNgramLm<F> {
    order: usize,
    vocab: Vec<char>,
    index: HashMap<char, Token>,
    nodes: HashMap<Vec<Token>, Node<F>>,
}

impl<F: Scalar> CharNgramLm<F> {
    pub(crate) fn from_parts(order: usize, vocab: Vec<char>, nodes: HashMap<Vec<Token>, Node<F>>) -> Self {
        let index = vocab.iter().enumerate().map(|(i, &c)| (c, i as Token + FIRST_CHAR)).collect();
        Self { order, vocab, index, nodes }
    }

    pub fn order(&self) -> usize {
        self.order
    }

    /// Characters seen in training, sorted.
    pub fn vocab(&self) -> &[char] {
        &self.vocab
    }

    /// Number of stored histories (contexts with at least one continuation).
    pub fn num_histories(&self) -> usize {
        self.nodes.len()
    }

    /// Labels for the characters of this model, shared with the acceptor.
    pub fn char_labels(&self) -> CharLabels {
        CharLabels::new(self.vocab.iter().copied())
    }

    pub(crate) fn token(&self, c: char) -> Token {
        self.index.get(&c).copied().unwrap_or(UNK)
    }

    pub(crate) fn char_of(&self, t: Token) -> Option<char> {
        (t as usize).checked_sub(FIRST_CHAR as usize).and_then(|i| self.vocab.get(i).copied())
    }

    pub(crate) fn nodes(&self) -> &HashMap<Vec<Token>, Node<F>> {
        &self.nodes
    }

    /// Every token the model can predict: characters, end of line, unknown.
    fn predictable(&self) -> impl Iterator<Item = Token> + '_ {
        [EOS, UNK].into_iter().chain((0..self.vocab.len() as Token).map(|i| i + FIRST_CHAR))
    }

    fn token_log_prob(&self, context: &[Token], w: Token) -> F {
        let mut acc = F::zero();
        for k in (0..=context.len()).rev() {
            if let Some(node) = self.nodes.get(&context[context.len() - k..]) {
                if let Some(&lp) = node.probs.get(&w) {
                    return acc + lp;
                }
                acc = acc + node.backoff;
            }
        }
        // only reachable for tokens the root does not store, i.e. never for a trained model
        F::neg_infinity()
    }

    fn start_context(&self) -> Vec<Token> {
        vec![BOS; self.order - 1]
    }

    /// log P(c | context). `context` is the text before `c` on the same line;
    /// the line start is implied before it.
    pub fn log_prob(&self, context: &str, c: char) -> F {
        let mut ctx = self.start_context();
        for ch in context.chars() {
            push_context(&mut ctx, self.token(ch), self.order);
        }
        self.token_log_prob(&ctx, self.token(c))
    }

    /// Sum of log-probabilities of the characters of `text`, read as one
    /// line from its start. The end-of-line event is not scored, so the empty
    /// string scores 0.
    pub fn score(&self, text: &str) -> F {
        self.score_from(&[], text)
    }

    /// Like [`CharNgramLm::score`], continuing after `history` instead of a line start.
    /// Only the last `order - 1` characters of `history` matter.
    pub fn score_from(&self, history: &[char], text: &str) -> F {
        let mut ctx = self.start_context();
        for &c in history {
            push_context(&mut ctx, self.token(c), self.order);
        }
        let mut total = F::zero();
        for c in text.chars() {
            let t = self.token(c);
            total = total + self.token_log_prob(&ctx, t);
            push_context(&mut ctx, t, self.order);
        }
        total
    }

    /// Total probability assigned to all predictable tokens after each
    /// stored history, as `(history length, mass)` pairs. Each mass is 1 up
    /// to rounding.
    pub fn history_masses(&self) -> Vec<(usize, F)> {
        let mut keys: Vec<&Vec<Token>> = self.nodes.keys().collect();
        keys.sort();
        keys.into_iter()
            .map(|h| {
                let mass = self.predictable().map(|w| self.token_log_prob(h, w).exp()).sum::<F>();
                (h.len(), mass)
            })
            .collect()
    }
}

fn push_context(ctx: &mut Vec<Token>, t: Token, order: usize) {
    if order <= 1 {
        return;
    }
    if ctx.len() == order - 1 {
        ctx.remove(0);
    }
    ctx.push(t);
}

/// Train an `order`-gram model on `lines`, each padded with `order - 1`
/// start symbols and closed by an end symbol.
pub fn lm_train<F: Scalar>(lines: &[impl AsRef<str>], order: usize) -> Result<CharNgramLm<F>> {
    if order == 0 {
        return Err(Error::InvalidArgument("n-gram order must be at least 1".into()));
    }
    let mut vocab: Vec<char> = lines.iter().flat_map(|l| l.as_ref().chars()).collect();
    vocab.sort_unstable();
    vocab.dedup();
    if vocab.is_empty() {
        return Err(Error::EmptyCorpus);
    }
    let mut lm: CharNgramLm<F> = CharNgramLm::from_parts(order, vocab, HashMap::new());

    let mut counts: HashMap<Vec<Token>, BTreeMap<Token, u64>> = HashMap::new();
    for line in lines {
        let mut toks = lm.start_context();
        toks.extend(line.as_ref().chars().map(|c| lm.token(c)));
        toks.push(EOS);
        for i in order - 1..toks.len() {
            for k in 0..order {
                *counts.entry(toks[i - k..i].to_vec()).or_default().entry(toks[i]).or_default() += 1;
            }
        }
    }

    let mut histories: Vec<Vec<Token>> = counts.keys().cloned().collect();
    histories.sort_by(|a, b| a.len().cmp(&b.len()).then_with(|| a.cmp(b)));
    let vocab_size = F::of((lm.vocab.len() + 2) as f64);
    for h in histories {
        let c = &counts[&h];
        let total = F::of(c.values().sum::<u64>() as f64);
        let types = F::of(c.len() as f64);
        let denom = total + types;
        let mut node = Node::new();
        if h.is_empty() {
            let uniform = types / vocab_size;
            for w in lm.predictable().collect::<Vec<_>>() {
                let cw = F::of(c.get(&w).copied().unwrap_or(0) as f64);
                node.probs.insert(w, ((cw + uniform) / denom).ln());
            }
        } else {
            for (&w, &cw) in c {
                let lower = lm.token_log_prob(&h[1..], w).exp();
                node.probs.insert(w, ((F::of(cw as f64) + types * lower) / denom).ln());
            }
            node.backoff = (types / denom).ln();
        }
        lm.nodes.insert(h, node);
    }
    Ok(lm)
}

/// Score `text` under `lm` (natural log, end of line not scored).
pub fn lm_score<F: Scalar>(lm: &CharNgramLm<F>, text: &str) -> F {
    lm.score(text)
}

/// Weighted acceptor equivalent to an [`CharNgramLm`]: one state per stored
/// history, failure arcs for backoff, every state final with weight 0. The
/// weight of accepting a string is its negated score.
#[derive(Clone, Debug)]
pub struct LmAcceptor<F> {
    pub fst: Wfst<F>,
    pub labels: CharLabels,
}

pub fn lm_to_acceptor<F: Scalar>(lm: &CharNgramLm<F>) -> LmAcceptor<F> {
    let labels = lm.char_labels();
    let mut histories: Vec<&Vec<Token>> = lm.nodes.keys().collect();
    histories.sort();
    let mut fst = Wfst::new();
    let ids: HashMap<&[Token], StateId> = histories.iter().map(|h| (h.as_slice(), fst.add_state())).collect();
    let longest_node_suffix = |seq: &[Token]| -> StateId {
        (0..=seq.len()).find_map(|k| ids.get(&seq[k..]).copied()).expect("the empty history is always stored")
    };
    let label_of = |t: Token| -> Label {
        match t {
            UNK => labels.unknown(),
            _ => labels.label(lm.char_of(t).expect("character token")),
        }
    };
    for h in &histories {
        let s = ids[h.as_slice()];
        fst.set_final(s, F::zero());
        let node = &lm.nodes[*h];
        let mut arcs: Vec<Arc<F>> = Vec::with_capacity(node.probs.len() + 1);
        for (&w, &lp) in &node.probs {
            if w == EOS || w == BOS {
                continue;
            }
            let mut next: Vec<Token> = h.to_vec();
            push_context(&mut next, w, lm.order);
            if lm.order == 1 {
                next.clear();
            }
            let l = label_of(w);
            arcs.push(Arc::new(l, l, -lp, longest_node_suffix(&next)));
        }
        if !h.is_empty() {
            arcs.push(Arc::new(PHI, EPSILON, -node.backoff, longest_node_suffix(&h[1..])));
        }
        arcs.sort_by_key(|a| a.ilabel);
        for a in arcs {
            fst.add_arc(s, a);
        }
    }
    let start = longest_node_suffix(&lm.start_context());
    fst.set_start(start);
    fst.arc_sort_input();
    LmAcceptor { fst, labels }
}
