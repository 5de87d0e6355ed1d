//! Plaintext corpus cleaning.
//!
//! Letters are lowercased, whitespace and hyphens become word spaces, every
//! other character (punctuation, digits, symbols) is dropped, and runs of
//! spaces collapse to one.

use crate::model::PlainText;

/// Clean a single line.
pub fn clean_line(line: &str) -> String {
    let mut out = String::with_capacity(line.len());
    let mut pending_space = false;
    for c in line.chars() {
        if c.is_alphabetic() {
            if pending_space && !out.is_empty() {
                out.push(' ');
            }
            pending_space = false;
            out.extend(c.to_lowercase());
        } else if c.is_whitespace() || c == '-' {
            pending_space = true;
        }
    }
    out
}

/// Cleaned, non-empty lines of a corpus.
pub fn clean_lines(text: &str) -> Vec<String> {
    text.lines().map(clean_line).filter(|l| !l.is_empty()).collect()
}

/// The whole corpus as one running text, lines joined by single spaces.
pub fn clean_text(text: &str) -> PlainText {
    PlainText::new(clean_lines(text).join(" "))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn strips_punctuation_and_collapses_space() {
        assert_eq!(clean_line("  `And what is the use of a book,'  thought Alice"), "and what is the use of a book thought alice");
        assert_eq!(clean_line("Rabbit-Hole 1865!"), "rabbit hole");
        assert_eq!(clean_line("don't"), "dont");
        assert_eq!(clean_line("  --  "), "");
    }

    #[test]
    fn lines_and_text() {
        let t = "Down the\n\n  Rabbit-Hole.\n";
        assert_eq!(clean_lines(t), vec!["down the", "rabbit hole"]);
        assert_eq!(clean_text(t).as_str(), "down the rabbit hole");
    }
}
