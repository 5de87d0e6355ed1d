//! Known-key decipherment of non-deterministic ciphers.
//!
//! The segmentation lattice of the ciphertext is composed with the key
//! transducer and a character language model acceptor; the best path gives
//! both the plaintext and the segmentation that produced it. Word spaces and
//! line breaks in the ciphertext are ignored.

use crate::charlm::{lm_to_acceptor, CharNgramLm, LmAcceptor};
use crate::error::{Error, Result};
use crate::model::{CipherKey, CipherText, PlainText, PlainUnit, Segmentation};
use crate::scalar::Scalar;
use crate::wfst::{build_key_fst, build_segmentation_fst, compose_from, compose_with_origins, match_with_failure, shortest_path, StateId};

/// Stand-in fed to the language model history for a nomenclature element.
const NOMENCLATURE_STAND_IN: char = '\u{FFFD}';

#[derive(Clone, Debug, PartialEq)]
pub struct Decipherment<F> {
    pub plaintext: PlainText,
    pub segmentation: Segmentation,
    /// Negative natural-log probability of the plaintext under the model.
    pub cost: F,
}

/// A key and a language model prepared for repeated decoding.
pub struct Decoder<'a, F> {
    key: &'a CipherKey,
    lm: &'a CharNgramLm<F>,
    acceptor: LmAcceptor<F>,
}

impl<'a, F: Scalar> Decoder<'a, F> {
    pub fn new(key: &'a CipherKey, lm: &'a CharNgramLm<F>) -> Self {
        Self { key, lm, acceptor: lm_to_acceptor(lm) }
    }

    pub fn acceptor(&self) -> &LmAcceptor<F> {
        &self.acceptor
    }

    /// Acceptor state after reading `history`.
    fn lm_state_after(&self, history: &[char]) -> Option<StateId> {
        let fst = &self.acceptor.fst;
        let mut q = fst.start()?;
        for &c in history {
            let (arcs, _) = match_with_failure(fst, q, self.acceptor.labels.label(c), fst.num_states());
            q = arcs.first()?.next;
        }
        Some(q)
    }

    /// Best segmentation and plaintext of `flat` (cipher symbols only),
    /// scoring the plaintext as a continuation of `history`.
    pub fn decode_flat(&self, flat: &str, history: &[char]) -> Result<Decipherment<F>> {
        if flat.is_empty() {
            return Ok(Decipherment {
                plaintext: PlainText::default(),
                segmentation: Segmentation::default(),
                cost: F::zero(),
            });
        }
        let lattice = build_segmentation_fst::<F>(flat, self.key)?;
        let key_fst = build_key_fst::<F>(self.key, &self.acceptor.labels);
        let (seg_key, seg_key_origins) = compose_with_origins(&lattice.fst, &key_fst);
        let (full, full_origins) = compose_from(&seg_key, &self.acceptor.fst, self.lm_state_after(history));
        let path = shortest_path(&full)?;

        let mut cuts = vec![0usize];
        for &s in &path.states {
            let seg_state = seg_key_origins[full_origins[s as usize].0 as usize].0;
            if let Some(p) = lattice.position_of(seg_state) {
                if p > *cuts.last().expect("non-empty") {
                    cuts.push(p);
                }
            }
        }
        if *cuts.last().expect("non-empty") != lattice.positions {
            return Err(Error::NoPath);
        }
        let chars: Vec<char> = flat.chars().collect();
        let segments: Vec<String> = cuts.windows(2).map(|w| chars[w[0]..w[1]].iter().collect()).collect();
        let plaintext = self.key.apply(&segments).ok_or(Error::NoPath)?;
        Ok(Decipherment { plaintext: plaintext.into(), segmentation: Segmentation::new(segments)?, cost: path.weight })
    }

    /// Decode the whole cipher in one lattice.
    pub fn decode(&self, cipher: &CipherText) -> Result<Decipherment<F>> {
        self.decode_flat(cipher.flat(), &[])
    }

    /// Decode in windows of about `window` symbols. Each window ends on a
    /// position where the whole text can still be segmented; the first half
    /// of its segments (at least one) is committed and the language model
    /// history carries over to the next window.
    pub fn decode_chunked(&self, cipher: &CipherText, window: usize) -> Result<Decipherment<F>> {
        if window < 2 * self.lm.order() {
            return Err(Error::InvalidArgument(format!(
                "window of {window} symbols is below twice the model order {}",
                self.lm.order()
            )));
        }
        let flat: Vec<char> = cipher.flat().chars().collect();
        let n = flat.len();
        if n <= window {
            return self.decode(cipher);
        }
        let text: String = flat.iter().collect();
        let global = build_segmentation_fst::<F>(&text, self.key)?;
        // a position is a valid cut when some full segmentation passes through it
        let valid: Vec<bool> = (0..=n).map(|p| p == n || !global.fst.arcs(p as StateId).is_empty()).collect();

        let keep = self.lm.order().saturating_sub(1);
        let mut history: Vec<char> = Vec::new();
        let mut segments: Vec<String> = Vec::new();
        let mut cost = F::zero();
        let mut p = 0;
        while p < n {
            let mut end = (p + window).min(n);
            while end > p && !valid[end] {
                end -= 1;
            }
            if end == p {
                // no valid cut inside the window: extend to the next one
                end = (p + window + 1..=n).find(|&q| valid[q]).expect("n is always valid");
            }
            let chunk: String = flat[p..end].iter().collect();
            let d = self.decode_flat(&chunk, &history)?;
            let segs = d.segmentation.segments();
            let commit = if end == n {
                segs.len()
            } else {
                let half = p + window / 2;
                let mut upto = 0;
                let mut at = p;
                for s in segs {
                    let next = at + s.chars().count();
                    if next > half && upto > 0 {
                        break;
                    }
                    at = next;
                    upto += 1;
                }
                upto
            };
            let committed = &segs[..commit];
            cost = cost - self.lm.score_from(&history, &self.render_history(committed));
            for s in committed {
                p += s.chars().count();
                history.extend(self.render_history(std::slice::from_ref(s)).chars());
            }
            if history.len() > keep {
                history.drain(..history.len() - keep);
            }
            segments.extend(committed.iter().cloned());
        }
        let plaintext = self.key.apply(&segments).ok_or(Error::NoPath)?;
        Ok(Decipherment { plaintext: plaintext.into(), segmentation: Segmentation::new(segments)?, cost })
    }

    /// Plaintext as the language model sees it.
    fn render_history(&self, segments: &[String]) -> String {
        let mut out = String::new();
        for s in segments {
            match self.key.get(s) {
                Some(PlainUnit::Text(t)) => out.push_str(t),
                Some(PlainUnit::Nomenclature) => out.push(NOMENCLATURE_STAND_IN),
                Some(PlainUnit::Null) | None => {}
            }
        }
        out
    }
}

/// Decipher `cipher` under `key`, picking among its segmentations by `lm`.
pub fn decipher_with_key<F: Scalar>(
    cipher: &CipherText,
    key: &CipherKey,
    lm: &CharNgramLm<F>,
) -> Result<(PlainText, Segmentation)> {
    let d = Decoder::new(key, lm).decode(cipher)?;
    Ok((d.plaintext, d.segmentation))
}

/// [`decipher_with_key`] over windows of about `window` symbols.
pub fn chunked_decode<F: Scalar>(
    cipher: &CipherText,
    key: &CipherKey,
    lm: &CharNgramLm<F>,
    window: usize,
) -> Result<(PlainText, Segmentation)> {
    let d = Decoder::new(key, lm).decode_chunked(cipher, window)?;
    Ok((d.plaintext, d.segmentation))
}
