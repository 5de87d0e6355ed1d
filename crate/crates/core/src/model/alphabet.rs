use std::fmt;

use crate::error::{Error, Result};

const DEFAULT_SYMBOLS: &str = "0123456789";

/// Ordered set of single-character cipher symbols.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct CipherAlphabet {
    symbols: Vec<char>,
}

impl Default for CipherAlphabet {
    fn default() -> Self {
        Self::digits()
    }
}

impl CipherAlphabet {
    pub fn digits() -> Self {
        Self { symbols: DEFAULT_SYMBOLS.chars().collect() }
    }

    pub fn new(symbols: impl IntoIterator<Item = char>) -> Result<Self> {
        let mut out: Vec<char> = Vec::new();
        for c in symbols {
            if c.is_whitespace() || c == '#' {
                return Err(Error::InvalidAlphabet(format!("{c:?} cannot be a cipher symbol")));
            }
            if out.contains(&c) {
                return Err(Error::InvalidAlphabet(format!("symbol {c:?} listed twice")));
            }
            out.push(c);
        }
        if out.is_empty() {
            return Err(Error::InvalidAlphabet("no symbols".into()));
        }
        Ok(Self { symbols: out })
    }

    /// Parse the value part of an `#alphabet <symbols>` header line.
    pub fn from_header(line: &str) -> Option<Result<Self>> {
        let rest = line.strip_prefix("#alphabet")?;
        Some(Self::new(rest.trim().chars()))
    }

    pub fn header(&self) -> String {
        format!("#alphabet {self}")
    }

    pub fn is_default(&self) -> bool {
        *self == Self::digits()
    }

    pub fn contains(&self, c: char) -> bool {
        self.symbols.contains(&c)
    }

    pub fn symbols(&self) -> &[char] {
        &self.symbols
    }

    pub fn len(&self) -> usize {
        self.symbols.len()
    }

    pub fn is_empty(&self) -> bool {
        self.symbols.is_empty()
    }

    /// First character of `s` that is not in the alphabet, as a 0-based char index.
    pub fn first_foreign(&self, s: &str) -> Option<(usize, char)> {
        s.chars().enumerate().find(|&(_, c)| !self.contains(c))
    }
}

impl fmt::Display for CipherAlphabet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for c in &self.symbols {
            write!(f, "{c}")?;
        }
        Ok(())
    }
}
