//! Evaluation: vocabulary F1, segmentation error rate and character TER.

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{PlainText, Segmentation};

/// Stand-in character for every `⟨NOM:..⟩` placeholder when computing TER.
pub const NOMENCLATURE_CLASS: char = '§';

#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct VocabScore {
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub precision: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub recall: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub f1: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seg_er: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub ter: Option<f64>,
    pub edits: usize,
    pub reference_len: usize,
}

impl EvalReport {
    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }
}

/// Unit-cost Levenshtein distance between two sequences.
pub fn edit_distance<T: PartialEq>(hyp: &[T], reference: &[T]) -> usize {
    let mut prev: Vec<usize> = (0..=reference.len()).collect();
    let mut cur = vec![0; reference.len() + 1];
    for (i, h) in hyp.iter().enumerate() {
        cur[0] = i + 1;
        for (j, r) in reference.iter().enumerate() {
            let sub = prev[j] + usize::from(h != r);
            cur[j + 1] = sub.min(prev[j + 1] + 1).min(cur[j] + 1);
        }
        std::mem::swap(&mut prev, &mut cur);
    }
    prev[reference.len()]
}

/// Exact-match precision, recall and F1 of a learned piece set against the gold vocabulary.
pub fn vocab_f1(learned: &BTreeSet<String>, gold: &BTreeSet<String>) -> Result<VocabScore> {
    if gold.is_empty() {
        return Err(Error::EmptyReference);
    }
    let hits = learned.intersection(gold).count() as f64;
    let precision = if learned.is_empty() { 0.0 } else { hits / learned.len() as f64 };
    let recall = hits / gold.len() as f64;
    let f1 = if precision + recall == 0.0 { 0.0 } else { 2.0 * precision * recall / (precision + recall) };
    Ok(VocabScore { precision, recall, f1 })
}

/// Segment edits (insertions, deletions, substitutions of whole segments) per reference segment.
pub fn seg_er(hyp: &Segmentation, reference: &Segmentation) -> Result<f64> {
    Ok(seg_edits(hyp, reference)?.0)
}

/// SegER together with the raw edit count.
pub fn seg_edits(hyp: &Segmentation, reference: &Segmentation) -> Result<(f64, usize)> {
    if reference.is_empty() {
        return Err(Error::EmptyReference);
    }
    let edits = edit_distance(hyp.segments(), reference.segments());
    Ok((edits as f64 / reference.len() as f64, edits))
}

/// Character-level Levenshtein distance per reference character.
pub fn ter(hyp: &PlainText, reference: &PlainText) -> Result<f64> {
    Ok(ter_edits(hyp, reference)?.0)
}

pub fn ter_edits(hyp: &PlainText, reference: &PlainText) -> Result<(f64, usize)> {
    let h = nomenclature_classes(hyp.as_str());
    let r = nomenclature_classes(reference.as_str());
    if r.is_empty() {
        return Err(Error::EmptyReference);
    }
    let edits = edit_distance(&h, &r);
    Ok((edits as f64 / r.len() as f64, edits))
}

/// Characters of `text` with each `⟨NOM:..⟩` placeholder collapsed to one class symbol.
pub fn nomenclature_classes(text: &str) -> Vec<char> {
    let mut out = Vec::with_capacity(text.len());
    let mut rest = text;
    while let Some(start) = rest.find("⟨NOM:") {
        out.extend(rest[..start].chars());
        match rest[start..].find('⟩') {
            Some(end) => {
                out.push(NOMENCLATURE_CLASS);
                rest = &rest[start + end + '⟩'.len_utf8()..];
            }
            None => {
                out.extend(rest[start..].chars());
                rest = "";
            }
        }
    }
    out.extend(rest.chars());
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn seg(v: &[&str]) -> Segmentation {
        Segmentation::new(v.iter().map(|s| s.to_string()).collect()).unwrap()
    }

    fn set(v: &[&str]) -> BTreeSet<String> {
        v.iter().map(|s| s.to_string()).collect()
    }

    #[test]
    fn f1_cases() {
        let g = set(&["2", "22"]);
        assert_eq!(vocab_f1(&g, &g).unwrap().f1, 1.0);
        assert_eq!(vocab_f1(&set(&["5", "7"]), &g).unwrap().f1, 0.0);
        let s = vocab_f1(&set(&["2", "22", "5", "7"]), &g).unwrap();
        assert_eq!((s.precision, s.recall), (0.5, 1.0));
        assert!((s.f1 - 2.0 / 3.0).abs() < 1e-12);
        assert!(matches!(vocab_f1(&g, &BTreeSet::new()), Err(Error::EmptyReference)));
    }

    #[test]
    fn seg_er_cases() {
        let r = seg(&["2", "22", "8"]);
        assert_eq!(seg_er(&r, &r).unwrap(), 0.0);
        let (rate, edits) = seg_edits(&seg(&["2", "2", "2", "8"]), &r).unwrap();
        assert_eq!(edits, 2);
        assert!((rate - 2.0 / 3.0).abs() < 1e-12);
        assert!(seg_er(&r, &seg(&[])).is_err());
    }

    #[test]
    fn singleton_hypothesis_can_exceed_one() {
        let r = seg(&["25", "42", "20", "24"]);
        let h = seg(&["2", "5", "4", "2", "2", "0", "2", "4"]);
        assert!(seg_er(&h, &r).unwrap() > 1.0);
    }

    #[test]
    fn ter_cases() {
        assert_eq!(ter(&"abc".into(), &"abc".into()).unwrap(), 0.0);
        assert!((ter(&"abd".into(), &"abc".into()).unwrap() - 1.0 / 3.0).abs() < 1e-12);
        assert!(ter(&"abc".into(), &"".into()).is_err());
    }

    #[test]
    fn nomenclature_placeholders_count_as_one_character() {
        assert_eq!(nomenclature_classes("a⟨NOM:19⟩b"), vec!['a', NOMENCLATURE_CLASS, 'b']);
        assert_eq!(ter(&"a⟨NOM:19⟩b".into(), &"a⟨NOM:7⟩b".into()).unwrap(), 0.0);
    }
}
