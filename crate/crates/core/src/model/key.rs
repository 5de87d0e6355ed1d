use std::collections::{BTreeMap, HashMap};
use std::fmt;

use crate::error::{Error, Result};
use crate::model::CipherAlphabet;

/// What a cipher element stands for.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum PlainUnit {
    /// A letter or a short letter group (syllable, preposition).
    Text(String),
    /// A whole word encoded by a code number; the word itself is not known.
    Nomenclature,
    /// An element that encodes nothing.
    Null,
}

impl fmt::Display for PlainUnit {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PlainUnit::Text(t) => f.write_str(t),
            PlainUnit::Nomenclature => f.write_str("@NOM"),
            PlainUnit::Null => f.write_str("@NULL"),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct KeyEntry {
    pub element: String,
    pub target: PlainUnit,
}

/// A substitution table from cipher elements to plaintext units.
#[derive(Clone, Debug)]
pub struct CipherKey {
    alphabet: CipherAlphabet,
    entries: Vec<KeyEntry>,
    index: HashMap<String, usize>,
    deterministic: bool,
}

impl PartialEq for CipherKey {
    fn eq(&self, other: &Self) -> bool {
        self.alphabet == other.alphabet && self.entries == other.entries
    }
}

impl CipherKey {
    pub fn new(alphabet: CipherAlphabet, entries: Vec<KeyEntry>) -> Result<Self> {
        let mut index = HashMap::with_capacity(entries.len());
        for (i, e) in entries.iter().enumerate() {
            if e.element.is_empty() {
                return Err(Error::InvalidArgument("empty key element".into()));
            }
            if let Some((col, symbol)) = alphabet.first_foreign(&e.element) {
                return Err(Error::Alphabet { symbol, line: i + 1, column: col + 1 });
            }
            if index.insert(e.element.clone(), i).is_some() {
                return Err(Error::DuplicateElement(e.element.clone()));
            }
        }
        let deterministic = is_prefix_free(entries.iter().map(|e| e.element.as_str()));
        Ok(Self { alphabet, entries, index, deterministic })
    }

    /// Convenience constructor for letter-only keys over digits.
    pub fn from_pairs<'a>(pairs: impl IntoIterator<Item = (&'a str, &'a str)>) -> Result<Self> {
        let entries = pairs
            .into_iter()
            .map(|(e, t)| KeyEntry { element: e.to_string(), target: PlainUnit::Text(t.to_string()) })
            .collect();
        Self::new(CipherAlphabet::digits(), entries)
    }

    pub fn alphabet(&self) -> &CipherAlphabet {
        &self.alphabet
    }

    pub fn entries(&self) -> &[KeyEntry] {
        &self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn get(&self, element: &str) -> Option<&PlainUnit> {
        self.index.get(element).map(|&i| &self.entries[i].target)
    }

    /// True when no element is a proper prefix of another. Such keys admit a
    /// single segmentation of any ciphertext built from their elements.
    pub fn is_deterministic(&self) -> bool {
        self.deterministic
    }

    /// Number of (shorter, longer) element pairs where the shorter is a proper
    /// prefix of the longer.
    pub fn prefix_collisions(&self) -> usize {
        let mut n = 0;
        for a in &self.entries {
            for b in &self.entries {
                if b.element.len() > a.element.len() && b.element.starts_with(&a.element) {
                    n += 1;
                }
            }
        }
        n
    }

    /// Longest element, in symbols.
    pub fn max_element_len(&self) -> usize {
        self.entries.iter().map(|e| e.element.chars().count()).max().unwrap_or(0)
    }

    /// Elements enciphering each single plaintext character, in key order.
    pub fn homophones(&self) -> BTreeMap<char, Vec<&str>> {
        let mut out: BTreeMap<char, Vec<&str>> = BTreeMap::new();
        for e in &self.entries {
            if let PlainUnit::Text(t) = &e.target {
                let mut cs = t.chars();
                if let (Some(c), None) = (cs.next(), cs.next()) {
                    out.entry(c).or_default().push(&e.element);
                }
            }
        }
        out
    }

    /// Apply the key to a segmentation. Nulls vanish, nomenclature elements
    /// become `⟨NOM:element⟩`. Returns `None` for a segment that is not a key element.
    pub fn apply(&self, segments: &[String]) -> Option<String> {
        let mut out = String::new();
        for s in segments {
            match self.get(s)? {
                PlainUnit::Text(t) => out.push_str(t),
                PlainUnit::Nomenclature => {
                    out.push_str(&nomenclature_placeholder(s));
                }
                PlainUnit::Null => {}
            }
        }
        Some(out)
    }

    pub fn to_tsv(&self) -> String {
        let mut out = String::new();
        if !self.alphabet.is_default() {
            out.push_str(&self.alphabet.header());
            out.push('\n');
        }
        for e in &self.entries {
            out.push_str(&e.element);
            out.push('\t');
            out.push_str(&e.target.to_string());
            out.push('\n');
        }
        out
    }
}

pub fn nomenclature_placeholder(element: &str) -> String {
    format!("⟨NOM:{element}⟩")
}

fn is_prefix_free<'a>(elements: impl Iterator<Item = &'a str>) -> bool {
    let mut sorted: Vec<&str> = elements.collect();
    sorted.sort_unstable();
    // after sorting, a prefix is always immediately followed by one of its extensions
    sorted.windows(2).all(|w| !w[1].starts_with(w[0]))
}

/// Parse a key file: `element<TAB>target` per line, `@NOM` and `@NULL` as
/// special targets, optional `#alphabet` header, other `#` lines ignored.
pub fn parse_key(text: &str, alphabet: Option<&CipherAlphabet>) -> Result<CipherKey> {
    let mut alpha = alphabet.cloned().unwrap_or_default();
    let mut entries: Vec<KeyEntry> = Vec::new();
    let mut lines_of: Vec<usize> = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.strip_suffix('\r').unwrap_or(raw);
        if line.starts_with('#') {
            if let Some(a) = CipherAlphabet::from_header(line) {
                alpha = a?;
            }
            continue;
        }
        if line.trim().is_empty() {
            continue;
        }
        let (element, target) = line.split_once('\t').ok_or_else(|| Error::Malformed {
            line: i + 1,
            reason: "expected element<TAB>target".into(),
        })?;
        if element.is_empty() {
            return Err(Error::Malformed { line: i + 1, reason: "empty element".into() });
        }
        let target = match target {
            "@NOM" => PlainUnit::Nomenclature,
            "@NULL" => PlainUnit::Null,
            "" => return Err(Error::Malformed { line: i + 1, reason: "empty target".into() }),
            t => PlainUnit::Text(t.to_string()),
        };
        entries.push(KeyEntry { element: element.to_string(), target });
        lines_of.push(i + 1);
    }
    // report alphabet violations with file line numbers
    for (e, &line) in entries.iter().zip(&lines_of) {
        if let Some((col, symbol)) = alpha.first_foreign(&e.element) {
            return Err(Error::Alphabet { symbol, line, column: col + 1 });
        }
    }
    CipherKey::new(alpha, entries)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ia_excerpt_is_non_deterministic() {
        let k = parse_key("2\to\n4\ta\n24\tr", None).unwrap();
        assert_eq!(k.len(), 3);
        assert!(!k.is_deterministic());
        assert_eq!(k.prefix_collisions(), 1);
    }

    #[test]
    fn prefix_free_key_is_deterministic() {
        let k = parse_key("2\ta\n8\td", None).unwrap();
        assert!(k.is_deterministic());
    }

    #[test]
    fn duplicate_element_is_rejected() {
        assert!(matches!(parse_key("2\ta\n2\tb", None), Err(Error::DuplicateElement(e)) if e == "2"));
    }

    #[test]
    fn foreign_symbol_is_rejected() {
        assert!(matches!(parse_key("2\ta\n3x\tb", None), Err(Error::Alphabet { line: 2, .. })));
        let k = parse_key("#alphabet 0123456789.\n.\te\n0\te\n", None).unwrap();
        assert_eq!(k.homophones()[&'e'], vec![".", "0"]);
    }

    #[test]
    fn special_targets_and_apply() {
        let k = parse_key("19\t@NOM\n3\t@NULL\n2\ta\n", None).unwrap();
        assert_eq!(k.get("19"), Some(&PlainUnit::Nomenclature));
        let segs: Vec<String> = ["2", "3", "19", "2"].iter().map(|s| s.to_string()).collect();
        assert_eq!(k.apply(&segs).unwrap(), "a⟨NOM:19⟩a");
        assert_eq!(parse_key(&k.to_tsv(), None).unwrap(), k);
    }
}
