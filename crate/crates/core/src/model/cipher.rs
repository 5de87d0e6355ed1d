use crate::error::{Error, Result};
use crate::model::{CipherAlphabet, Segmentation};

/// A transcribed cipher: its lines as written plus the concatenated symbol stream.
///
/// Lines may contain spaces. In a cipher file spaces mark either word
/// boundaries (ciphers that keep word spaces) or gold segment boundaries;
/// either way they are not part of `flat`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CipherText {
    alphabet: CipherAlphabet,
    lines: Vec<String>,
    flat: String,
}

/// Result of reading a cipher file.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ParsedCipher {
    pub cipher: CipherText,
    /// Present when any line contained spaces.
    pub gold: Option<Segmentation>,
}

impl CipherText {
    /// Build from lines, checking every non-space character against the alphabet.
    pub fn from_lines(alphabet: CipherAlphabet, lines: Vec<String>) -> Result<Self> {
        for (li, line) in lines.iter().enumerate() {
            check_line(&alphabet, line, li + 1)?;
        }
        let flat = lines.iter().flat_map(|l| l.chars().filter(|c| !c.is_whitespace())).collect();
        Ok(Self { alphabet, lines, flat })
    }

    /// A single-line cipher over the default digit alphabet.
    pub fn from_flat(flat: &str) -> Result<Self> {
        Self::from_lines(CipherAlphabet::digits(), vec![flat.to_string()])
    }

    pub fn alphabet(&self) -> &CipherAlphabet {
        &self.alphabet
    }

    pub fn lines(&self) -> &[String] {
        &self.lines
    }

    pub fn flat(&self) -> &str {
        &self.flat
    }

    /// Number of cipher symbols.
    pub fn len(&self) -> usize {
        self.flat.chars().count()
    }

    pub fn is_empty(&self) -> bool {
        self.flat.is_empty()
    }

    pub fn has_spaces(&self) -> bool {
        self.lines.iter().any(|l| l.contains(char::is_whitespace))
    }

    /// Hard-boundary spans used by the learned segmenters: space-delimited
    /// words when the cipher keeps spaces, otherwise lines.
    pub fn spans(&self) -> Vec<&str> {
        if self.has_spaces() {
            self.lines.iter().flat_map(|l| l.split_whitespace()).collect()
        } else {
            self.lines.iter().map(|l| l.as_str()).filter(|l| !l.is_empty()).collect()
        }
    }

    /// Spans used by the fixed-width baselines: words when the cipher keeps
    /// spaces, otherwise the whole stream with line breaks removed.
    pub fn baseline_spans(&self) -> Vec<&str> {
        if self.has_spaces() {
            self.spans()
        } else if self.flat.is_empty() {
            Vec::new()
        } else {
            vec![self.flat.as_str()]
        }
    }

    /// Same symbols, one line, spaces removed.
    pub fn stripped(&self) -> CipherText {
        CipherText {
            alphabet: self.alphabet.clone(),
            lines: vec![self.flat.clone()],
            flat: self.flat.clone(),
        }
    }

    /// File form, with an alphabet header when the alphabet is not the default.
    pub fn serialize(&self) -> String {
        let mut out = String::new();
        if !self.alphabet.is_default() {
            out.push_str(&self.alphabet.header());
            out.push('\n');
        }
        for l in &self.lines {
            out.push_str(l);
            out.push('\n');
        }
        out
    }
}

fn check_line(alphabet: &CipherAlphabet, line: &str, line_no: usize) -> Result<()> {
    for (col, c) in line.chars().enumerate() {
        if !c.is_whitespace() && !alphabet.contains(c) {
            return Err(Error::Alphabet { symbol: c, line: line_no, column: col + 1 });
        }
    }
    Ok(())
}

/// Content lines of a cipher-format file with their 1-based line numbers.
/// `#alphabet` headers set the alphabet; other `#` lines are comments.
fn content_lines<'a>(
    text: &'a str,
    alphabet: Option<&CipherAlphabet>,
) -> Result<(CipherAlphabet, Vec<(usize, &'a str)>)> {
    let mut alpha = alphabet.cloned().unwrap_or_default();
    let mut lines = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.strip_suffix('\r').unwrap_or(raw);
        if line.starts_with('#') {
            if let Some(a) = CipherAlphabet::from_header(line) {
                alpha = a?;
            }
            continue;
        }
        lines.push((i + 1, line));
    }
    Ok((alpha, lines))
}

/// Parse a cipher file. Spaces inside lines are read as gold segment boundaries.
pub fn parse_cipher(text: &str, alphabet: Option<&CipherAlphabet>) -> Result<ParsedCipher> {
    let (alpha, lines) = content_lines(text, alphabet)?;
    for &(no, line) in &lines {
        check_line(&alpha, line, no)?;
    }
    let owned: Vec<String> = lines.iter().map(|(_, l)| l.to_string()).collect();
    let cipher = CipherText::from_lines(alpha, owned)?;
    let gold = if cipher.has_spaces() {
        Some(Segmentation::from_lines(
            cipher.lines.iter().map(|l| l.split_whitespace().map(str::to_string).collect()).collect(),
        )?)
    } else {
        None
    };
    Ok(ParsedCipher { cipher, gold })
}

/// Parse a segmentation file (gold or hypothesis). Same format as a cipher
/// file, but the result is always a segmentation, even without spaces. A
/// `|` between segments (the word marker of gold files) reads as a space.
pub fn parse_segmentation(text: &str, alphabet: Option<&CipherAlphabet>) -> Result<Segmentation> {
    let (alpha, lines) = content_lines(text, alphabet)?;
    let mut per_line = Vec::with_capacity(lines.len());
    for &(no, line) in &lines {
        let line = if alpha.contains('|') { line.to_string() } else { line.replace('|', " ") };
        check_line(&alpha, &line, no)?;
        per_line.push(line.split_whitespace().map(str::to_string).collect());
    }
    Segmentation::from_lines(per_line)
}
