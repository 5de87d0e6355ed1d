use crate::model::{CipherText, Segmentation};

/// Fixed-width chunks of `k` symbols. Spans are words when the cipher keeps
/// spaces and the whole stream otherwise, so a span of odd length ends in a
/// one-symbol segment when `k == 2`.
pub fn baseline_segment(cipher: &CipherText, k: usize) -> Segmentation {
    assert!(k >= 1, "chunk width must be positive");
    let mut segments = Vec::new();
    for span in cipher.baseline_spans() {
        let chars: Vec<char> = span.chars().collect();
        segments.extend(chars.chunks(k).map(|c| c.iter().collect::<String>()));
    }
    Segmentation::from_trusted(segments)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn flat(s: &str) -> CipherText {
        CipherText::from_flat(s).unwrap()
    }

    #[test]
    fn two_digit_chunks() {
        assert_eq!(baseline_segment(&flat("25422024"), 2).segments(), ["25", "42", "20", "24"]);
        assert_eq!(baseline_segment(&flat("222"), 2).segments(), ["22", "2"]);
    }

    #[test]
    fn one_digit_chunks() {
        assert_eq!(baseline_segment(&flat("2228"), 1).segments(), ["2", "2", "2", "8"]);
        assert!(baseline_segment(&flat(""), 2).is_empty());
    }

    #[test]
    fn chunks_restart_at_word_spaces_but_not_lines() {
        let words = CipherText::from_lines(Default::default(), vec!["123 45".into()]).unwrap();
        assert_eq!(baseline_segment(&words, 2).segments(), ["12", "3", "45"]);
        let lines = CipherText::from_lines(Default::default(), vec!["123".into(), "45".into()]).unwrap();
        assert_eq!(baseline_segment(&lines, 2).segments(), ["12", "34", "5"]);
    }
}
