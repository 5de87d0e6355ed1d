use std::fmt;

use serde::{Deserialize, Serialize};

/// Deciphered or source plaintext: lowercased letters, optionally word spaces,
/// and `⟨NOM:..⟩` placeholders for nomenclature elements.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct PlainText(String);

impl PlainText {
    pub fn new(text: impl Into<String>) -> Self {
        Self(text.into())
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }

    pub fn chars(&self) -> std::str::Chars<'_> {
        self.0.chars()
    }

    pub fn len_chars(&self) -> usize {
        self.0.chars().count()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn into_string(self) -> String {
        self.0
    }

    /// The same text with word spaces removed.
    pub fn without_spaces(&self) -> PlainText {
        PlainText(self.0.chars().filter(|c| *c != ' ').collect())
    }
}

impl fmt::Display for PlainText {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl From<&str> for PlainText {
    fn from(s: &str) -> Self {
        Self(s.to_string())
    }
}

impl From<String> for PlainText {
    fn from(s: String) -> Self {
        Self(s)
    }
}
