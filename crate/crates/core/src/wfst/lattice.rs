use std::collections::HashMap;

use super::{Arc, CharLabels, Label, StateId, Wfst, EPSILON};
use crate::error::{Error, Result};
use crate::model::{CipherKey, PlainUnit};
use crate::scalar::Scalar;

const CONTEXT_CHARS: usize = 12;

/// All segmentations of a ciphertext into key elements.
///
/// Input labels are cipher symbols (alphabet index + 1); output labels are
/// key elements (entry index + 1), emitted on the first symbol of each
/// element. State `i` for `i <= n` stands for "the first `i` symbols are
/// segmented"; any further states sit inside multi-symbol elements.
#[derive(Clone, Debug)]
pub struct SegmentationLattice<F> {
    pub fst: Wfst<F>,
    /// Number of cipher symbols.
    pub positions: usize,
}

impl<F: Scalar> SegmentationLattice<F> {
    /// Cipher position of `state`, if it is a position state.
    pub fn position_of(&self, state: StateId) -> Option<usize> {
        ((state as usize) <= self.positions).then_some(state as usize)
    }
}

/// Build the segmentation lattice of `flat` (no whitespace) under `key`.
///
/// Fails with [`Error::UnsegmentablePosition`] when the text cannot be cut
/// into key elements; the position is the furthest point any partial
/// segmentation reaches.
pub fn build_segmentation_fst<F: Scalar>(flat: &str, key: &CipherKey) -> Result<SegmentationLattice<F>> {
    let symbols: Vec<char> = flat.chars().collect();
    let n = symbols.len();
    let alphabet = key.alphabet();
    let mut sym_label: HashMap<char, Label> = HashMap::new();
    for (i, &c) in alphabet.symbols().iter().enumerate() {
        sym_label.insert(c, i as Label + 1);
    }
    for (i, &c) in symbols.iter().enumerate() {
        if !sym_label.contains_key(&c) {
            return Err(Error::Alphabet { symbol: c, line: 1, column: i + 1 });
        }
    }
    let elements: HashMap<&str, Label> =
        key.entries().iter().enumerate().map(|(i, e)| (e.element.as_str(), i as Label + 1)).collect();
    let max_len = key.max_element_len();

    // byte offsets of every char position, for slicing candidate elements
    let offsets: Vec<usize> = flat.char_indices().map(|(b, _)| b).chain(std::iter::once(flat.len())).collect();
    let mut fst = Wfst::new();
    for _ in 0..=n {
        fst.add_state();
    }
    fst.set_start(0);
    fst.set_final(n as StateId, F::zero());
    let mut reachable = vec![false; n + 1];
    reachable[0] = true;
    for i in 0..n {
        if !reachable[i] {
            continue;
        }
        for len in 1..=max_len.min(n - i) {
            let piece = &flat[offsets[i]..offsets[i + len]];
            let Some(&el) = elements.get(piece) else { continue };
            reachable[i + len] = true;
            let mut from = i as StateId;
            for k in 0..len {
                let to = if k + 1 == len { (i + len) as StateId } else { fst.add_state() };
                let olabel = if k == 0 { el } else { EPSILON };
                fst.add_arc(from, Arc::new(sym_label[&symbols[i + k]], olabel, F::zero(), to));
                from = to;
            }
        }
    }
    if !reachable[n] {
        let position = (0..n).rev().find(|&i| reachable[i]).unwrap_or(0);
        let context: String = symbols[position..n.min(position + CONTEXT_CHARS)].iter().collect();
        return Err(Error::UnsegmentablePosition { position, context });
    }
    // drop dead ends but keep position states addressable by index
    let trimmed = trim_keep_positions(&fst, n);
    Ok(SegmentationLattice { fst: trimmed, positions: n })
}

/// Remove arcs into states that cannot reach the end; state ids are kept.
fn trim_keep_positions<F: Scalar>(fst: &Wfst<F>, n: usize) -> Wfst<F> {
    let mut rev: Vec<Vec<StateId>> = vec![Vec::new(); fst.num_states()];
    for s in fst.states() {
        for a in fst.arcs(s) {
            rev[a.next as usize].push(s);
        }
    }
    let mut alive = vec![false; fst.num_states()];
    alive[n] = true;
    let mut stack = vec![n as StateId];
    while let Some(s) = stack.pop() {
        for &p in &rev[s as usize] {
            if !alive[p as usize] {
                alive[p as usize] = true;
                stack.push(p);
            }
        }
    }
    let mut out = Wfst::new();
    for _ in fst.states() {
        out.add_state();
    }
    out.set_start(0);
    out.set_final(n as StateId, F::zero());
    for s in fst.states() {
        if !alive[s as usize] {
            continue;
        }
        for a in fst.arcs(s) {
            if alive[a.next as usize] {
                out.add_arc(s, *a);
            }
        }
    }
    out
}

/// Single-state transducer from key elements (entry index + 1) to plaintext
/// characters. Multi-character targets become chains; nulls map to epsilon;
/// nomenclature elements map to the unknown-character label.
pub fn build_key_fst<F: Scalar>(key: &CipherKey, chars: &CharLabels) -> Wfst<F> {
    let mut fst = Wfst::new();
    let hub = fst.add_state();
    fst.set_start(hub);
    fst.set_final(hub, F::zero());
    for (i, e) in key.entries().iter().enumerate() {
        let el = i as Label + 1;
        match &e.target {
            PlainUnit::Null => fst.add_arc(hub, Arc::new(el, EPSILON, F::zero(), hub)),
            PlainUnit::Nomenclature => fst.add_arc(hub, Arc::new(el, chars.unknown(), F::zero(), hub)),
            PlainUnit::Text(t) => {
                let cs: Vec<char> = t.chars().collect();
                let mut from = hub;
                for (k, &c) in cs.iter().enumerate() {
                    let to = if k + 1 == cs.len() { hub } else { fst.add_state() };
                    let ilabel = if k == 0 { el } else { EPSILON };
                    fst.add_arc(from, Arc::new(ilabel, chars.label(c), F::zero(), to));
                    from = to;
                }
            }
        }
    }
    fst
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::parse_key;

    #[test]
    fn ia_excerpt_lattice_has_eight_paths() {
        let key = parse_key("0\te\n2\to\n4\ta\n5\ts\n22\tp\n24\tr\n25\tt", None).unwrap();
        let lat: SegmentationLattice<f64> = build_segmentation_fst("25422024", &key).unwrap();
        assert_eq!(lat.fst.count_paths(), Some(8));
    }

    #[test]
    fn unsegmentable_text_reports_position() {
        let key = parse_key("2\to\n24\tr", None).unwrap();
        match build_segmentation_fst::<f64>("2425", &key) {
            Err(Error::UnsegmentablePosition { position, context }) => {
                assert_eq!(position, 3);
                assert_eq!(context, "5");
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn key_fst_maps_elements_to_chars() {
        let key = parse_key("24\tr\n7\tth\n3\t@NULL\n19\t@NOM", None).unwrap();
        let chars = CharLabels::new("hrt".chars());
        let fst: Wfst<f64> = build_key_fst(&key, &chars);
        let hub = fst.start().unwrap();
        let r = fst.arcs(hub).iter().find(|a| a.ilabel == 1).unwrap();
        assert_eq!(chars.char_of(r.olabel), Some('r'));
        assert_eq!(r.next, hub);
        let null = fst.arcs(hub).iter().find(|a| a.ilabel == 3).unwrap();
        assert_eq!(null.olabel, EPSILON);
        let nom = fst.arcs(hub).iter().find(|a| a.ilabel == 4).unwrap();
        assert_eq!(nom.olabel, chars.unknown());
        assert_eq!(fst.num_states(), 2);
    }
}
