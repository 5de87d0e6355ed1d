//! ARPA back-off format. Probabilities are log10; a space character is
//! written as `<space>`, unseen characters as `<unk>`.

use std::collections::{BTreeMap, HashMap};
use std::fmt::Write as _;

use super::{CharNgramLm, Node, Token, BOS, EOS, UNK};
use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Log10 probability written for events the model never predicts.
const NEVER: f64 = -99.0;

fn token_name<F: Scalar>(lm: &CharNgramLm<F>, t: Token) -> String {
    match t {
        BOS => "<s>".into(),
        EOS => "</s>".into(),
        UNK => "<unk>".into(),
        _ => match lm.char_of(t).expect("character token") {
            ' ' => "<space>".into(),
            c => c.to_string(),
        },
    }
}

/// ngram -> (log10 prob, log10 backoff), for one order.
type Entries = BTreeMap<Vec<Token>, (f64, Option<f64>)>;

pub fn write_arpa<F: Scalar>(lm: &CharNgramLm<F>) -> String {
    let ln10 = std::f64::consts::LN_10;
    let mut entries: Vec<Entries> = vec![BTreeMap::new(); lm.order()];
    for (h, node) in lm.nodes() {
        for (&w, &lp) in &node.probs {
            let mut g = h.clone();
            g.push(w);
            entries[g.len() - 1].insert(g, (lp.as_f64() / ln10, None));
        }
    }
    for (h, node) in lm.nodes() {
        if h.is_empty() {
            continue;
        }
        let e = entries[h.len() - 1].entry(h.clone()).or_insert((NEVER, None));
        e.1 = Some(node.backoff.as_f64() / ln10);
    }
    // the line-start unigram is a context only
    entries[0].entry(vec![BOS]).or_insert((NEVER, None));

    let mut out = String::from("\\data\\\n");
    for (k, e) in entries.iter().enumerate() {
        let _ = writeln!(out, "ngram {}={}", k + 1, e.len());
    }
    for (k, e) in entries.iter().enumerate() {
        let _ = write!(out, "\n\\{}-grams:\n", k + 1);
        for (g, (p, bo)) in e {
            let words: Vec<String> = g.iter().map(|&t| token_name(lm, t)).collect();
            let _ = write!(out, "{p:.10}\t{}", words.join(" "));
            if let Some(bo) = bo {
                let _ = write!(out, "\t{bo:.10}");
            }
            out.push('\n');
        }
    }
    out.push_str("\n\\end\\\n");
    out
}

pub fn read_arpa<F: Scalar>(text: &str) -> Result<CharNgramLm<F>> {
    let malformed = |line: usize, reason: &str| Error::Malformed { line, reason: reason.into() };
    let ln10 = std::f64::consts::LN_10;
    let mut section: Option<usize> = None;
    let mut declared: Vec<usize> = Vec::new();
    let mut raw: Vec<(usize, Vec<String>, f64, Option<f64>)> = Vec::new();
    let mut ended = false;
    for (i, line) in text.lines().enumerate() {
        let n = i + 1;
        let line = line.trim_end_matches('\r');
        if line.trim().is_empty() {
            continue;
        }
        if line == "\\data\\" {
            section = Some(0);
            continue;
        }
        if line == "\\end\\" {
            ended = true;
            break;
        }
        if let Some(k) = line.strip_prefix('\\').and_then(|r| r.strip_suffix("-grams:")) {
            let k: usize = k.parse().map_err(|_| malformed(n, "bad section header"))?;
            if k == 0 || k > declared.len() {
                return Err(malformed(n, "section order not declared"));
            }
            section = Some(k);
            continue;
        }
        match section {
            None => return Err(malformed(n, "content before \\data\\")),
            Some(0) => {
                let count = line
                    .strip_prefix("ngram ")
                    .and_then(|r| r.split_once('='))
                    .ok_or_else(|| malformed(n, "expected `ngram k=count`"))?;
                let k: usize = count.0.trim().parse().map_err(|_| malformed(n, "bad order"))?;
                let c: usize = count.1.trim().parse().map_err(|_| malformed(n, "bad count"))?;
                if k != declared.len() + 1 {
                    return Err(malformed(n, "orders must be listed in sequence"));
                }
                declared.push(c);
            }
            Some(k) => {
                let fields: Vec<&str> = line.split_whitespace().collect();
                if fields.len() != k + 1 && fields.len() != k + 2 {
                    return Err(malformed(n, "wrong number of fields"));
                }
                let p: f64 = fields[0].parse().map_err(|_| malformed(n, "bad probability"))?;
                let bo = match fields.get(k + 1) {
                    Some(b) => Some(b.parse::<f64>().map_err(|_| malformed(n, "bad backoff"))?),
                    None => None,
                };
                raw.push((n, fields[1..=k].iter().map(|s| s.to_string()).collect(), p, bo));
            }
        }
    }
    if !ended {
        return Err(malformed(text.lines().count(), "missing \\end\\"));
    }
    if declared.is_empty() {
        return Err(Error::EmptyCorpus);
    }
    for (k, &c) in declared.iter().enumerate() {
        let found = raw.iter().filter(|r| r.1.len() == k + 1).count();
        if found != c {
            return Err(malformed(0, &format!("declared {c} {}-grams, found {found}", k + 1)));
        }
    }

    let mut vocab: Vec<char> = Vec::new();
    for (n, words, _, _) in &raw {
        for w in words {
            match w.as_str() {
                "<s>" | "</s>" | "<unk>" => {}
                "<space>" => vocab.push(' '),
                other => {
                    let mut cs = other.chars();
                    match (cs.next(), cs.next()) {
                        (Some(c), None) => vocab.push(c),
                        _ => return Err(malformed(*n, "token is not a single character")),
                    }
                }
            }
        }
    }
    vocab.sort_unstable();
    vocab.dedup();
    let mut lm: CharNgramLm<F> = CharNgramLm::from_parts(declared.len(), vocab, HashMap::new());
    let mut nodes: HashMap<Vec<Token>, Node<F>> = HashMap::new();
    nodes.insert(Vec::new(), Node::new());
    for (_, words, p, bo) in raw {
        let g: Vec<Token> = words
            .iter()
            .map(|w| match w.as_str() {
                "<s>" => BOS,
                "</s>" => EOS,
                "<unk>" => UNK,
                "<space>" => lm.token(' '),
                other => lm.token(other.chars().next().expect("checked above")),
            })
            .collect();
        if p > NEVER + 1.0 {
            let (h, w) = g.split_at(g.len() - 1);
            nodes.entry(h.to_vec()).or_insert_with(Node::new).probs.insert(w[0], F::of(p * ln10));
        }
        if let Some(bo) = bo {
            nodes.entry(g).or_insert_with(Node::new).backoff = F::of(bo * ln10);
        }
    }
    // a history with only a backoff entry and no continuations is not a stored history
    nodes.retain(|h, n| h.is_empty() || !n.probs.is_empty());
    lm = CharNgramLm::from_parts(lm.order(), lm.vocab().to_vec(), nodes);
    Ok(lm)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::charlm::lm_train;

    #[test]
    fn round_trip_preserves_scores() {
        let m: CharNgramLm<f64> = lm_train(&["a cat sat", "on the mat"], 3).unwrap();
        let text = write_arpa(&m);
        assert!(text.contains("<space>"));
        assert!(text.contains("<unk>"));
        let back: CharNgramLm<f64> = read_arpa(&text).unwrap();
        assert_eq!(back.order(), 3);
        assert_eq!(back.vocab(), m.vocab());
        for s in ["the cat", "xyz", "mat on a"] {
            assert!((back.score(s) - m.score(s)).abs() < 1e-6);
        }
    }

    #[test]
    fn malformed_files_are_rejected() {
        assert!(read_arpa::<f64>("hello").is_err());
        assert!(read_arpa::<f64>("\\data\\\nngram 1=2\n\n\\1-grams:\n-1\ta\n\\end\\\n").is_err());
        assert!(read_arpa::<f64>("\\data\\\nngram 1=1\n\n\\1-grams:\n-1\tab\n\\end\\\n").is_err());
    }
}
