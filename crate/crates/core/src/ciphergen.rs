//! Synthetic numerical ciphers: random keys, homophonic enciphering, line
//! reflow and prefix truncation.

use rand::seq::index;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::model::{CipherAlphabet, CipherKey, CipherText, KeyEntry, PlainText, PlainUnit, Segmentation};

pub const DEFAULT_LENGTH: usize = 2048;
pub const DEFAULT_LINE_WIDTH: usize = 43;
const VOWELS: &str = "aeiou";

/// Parameters of a random key.
#[derive(Clone, Debug, PartialEq)]
pub struct KeySpec {
    pub plaintext_alphabet: Vec<char>,
    pub element_pool: Vec<String>,
    pub homophones_per_vowel: usize,
    pub homophones_per_consonant: usize,
    /// Extra elements mapped to nothing.
    pub nulls: usize,
    /// Extra elements standing for whole words.
    pub nomenclature: usize,
    pub rng_seed: u64,
}

impl Default for KeySpec {
    fn default() -> Self {
        Self {
            plaintext_alphabet: ('a'..='z').collect(),
            element_pool: (0..100).map(|n| n.to_string()).collect(),
            homophones_per_vowel: 1,
            homophones_per_consonant: 1,
            nulls: 0,
            nomenclature: 0,
            rng_seed: 0,
        }
    }
}

impl KeySpec {
    pub fn monoalphabetic(seed: u64) -> Self {
        Self { rng_seed: seed, ..Self::default() }
    }

    pub fn homophonic(vowels: usize, consonants: usize, seed: u64) -> Self {
        Self { homophones_per_vowel: vowels, homophones_per_consonant: consonants, rng_seed: seed, ..Self::default() }
    }

    fn count_for(&self, c: char) -> usize {
        if VOWELS.contains(c) {
            self.homophones_per_vowel
        } else {
            self.homophones_per_consonant
        }
    }

    fn validate(&self) -> Result<usize> {
        if self.homophones_per_vowel == 0 || self.homophones_per_consonant == 0 {
            return Err(Error::InvalidArgument("homophone counts must be at least 1".into()));
        }
        let mut seen = std::collections::HashSet::new();
        if let Some(dup) = self.element_pool.iter().find(|e| !seen.insert(e.as_str())) {
            return Err(Error::DuplicateElement(dup.clone()));
        }
        let mut chars = std::collections::HashSet::new();
        if let Some(dup) = self.plaintext_alphabet.iter().find(|c| !chars.insert(**c)) {
            return Err(Error::InvalidArgument(format!("plaintext character {dup:?} listed twice")));
        }
        let needed: usize = self.plaintext_alphabet.iter().map(|&c| self.count_for(c)).sum::<usize>()
            + self.nulls
            + self.nomenclature;
        Ok(needed)
    }
}

/// Draw a key: every plaintext character gets its configured number of
/// distinct elements, sampled without replacement from the pool.
pub fn generate_key(spec: &KeySpec) -> Result<CipherKey> {
    let needed = spec.validate()?;
    if needed > spec.element_pool.len() {
        return Err(Error::PoolExhausted { needed, available: spec.element_pool.len() });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(spec.rng_seed);
    let picks = index::sample(&mut rng, spec.element_pool.len(), needed).into_vec();
    let mut picks = picks.into_iter().map(|i| spec.element_pool[i].clone());
    let mut entries = Vec::with_capacity(needed);
    for &c in &spec.plaintext_alphabet {
        for _ in 0..spec.count_for(c) {
            entries.push(KeyEntry { element: picks.next().unwrap(), target: PlainUnit::Text(c.to_string()) });
        }
    }
    for _ in 0..spec.nulls {
        entries.push(KeyEntry { element: picks.next().unwrap(), target: PlainUnit::Null });
    }
    for _ in 0..spec.nomenclature {
        entries.push(KeyEntry { element: picks.next().unwrap(), target: PlainUnit::Nomenclature });
    }
    let alphabet = alphabet_for_pool(&spec.element_pool)?;
    CipherKey::new(alphabet, entries)
}

fn alphabet_for_pool(pool: &[String]) -> Result<CipherAlphabet> {
    let digits = CipherAlphabet::digits();
    if pool.iter().all(|e| digits.first_foreign(e).is_none()) {
        return Ok(digits);
    }
    let mut symbols: Vec<char> = digits.symbols().to_vec();
    for e in pool {
        for c in e.chars() {
            if !symbols.contains(&c) {
                symbols.push(c);
            }
        }
    }
    CipherAlphabet::new(symbols)
}

/// Draw keys with successive seeds until one has at least `min_collisions`
/// prefix collisions, i.e. a key that makes ciphers non-deterministic.
pub fn generate_ambiguous_key(spec: &KeySpec, min_collisions: usize) -> Result<CipherKey> {
    for attempt in 0..10_000u64 {
        let s = KeySpec { rng_seed: derive_seed(spec.rng_seed, attempt), ..spec.clone() };
        let key = generate_key(&s)?;
        if key.prefix_collisions() >= min_collisions {
            return Ok(key);
        }
    }
    Err(Error::InvalidArgument(format!("no key with {min_collisions} prefix collisions found")))
}

/// Optional enciphering behavior beyond plain substitution.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct EncipherOptions {
    /// Keep word spaces as separators in the cipher line.
    pub keep_spaces: bool,
    /// Probability of inserting a null element after each character.
    pub null_rate: f64,
    /// Probability of replacing a word by a nomenclature element.
    pub nomenclature_rate: f64,
}

impl EncipherOptions {
    pub fn spaces(keep_spaces: bool) -> Self {
        Self { keep_spaces, ..Self::default() }
    }
}

/// A cipher together with everything used to make it.
#[derive(Clone, Debug, PartialEq)]
pub struct GeneratedCipher {
    pub ciphertext: CipherText,
    pub gold: Segmentation,
    pub key: CipherKey,
    /// The enciphered text; contains word spaces only when they were kept.
    pub plaintext: PlainText,
    /// Segments per word, when word spaces were kept.
    word_lengths: Option<Vec<usize>>,
    /// Line width, when laid out by [`GeneratedCipher::without_spaces`].
    line_width: Option<usize>,
}

impl GeneratedCipher {
    pub fn keeps_spaces(&self) -> bool {
        self.word_lengths.is_some()
    }

    /// Key applied to the gold segmentation, spaces reinserted when kept.
    fn rendered_plaintext(key: &CipherKey, gold: &[String], words: Option<&[usize]>) -> String {
        match words {
            None => key.apply(gold).expect("gold segments are key elements"),
            Some(lengths) => {
                let mut out = Vec::with_capacity(lengths.len());
                let mut start = 0;
                for &n in lengths {
                    out.push(key.apply(&gold[start..start + n]).expect("gold segments are key elements"));
                    start += n;
                }
                out.join(" ")
            }
        }
    }

    fn assemble(key: CipherKey, gold: Vec<String>, words: Option<Vec<usize>>) -> Result<Self> {
        let line = match &words {
            None => gold.concat(),
            Some(lengths) => {
                let mut parts = Vec::with_capacity(lengths.len());
                let mut start = 0;
                for &n in lengths {
                    parts.push(gold[start..start + n].concat());
                    start += n;
                }
                parts.join(" ")
            }
        };
        let lines = if line.is_empty() { Vec::new() } else { vec![line] };
        let ciphertext = CipherText::from_lines(key.alphabet().clone(), lines)?;
        let plaintext = PlainText::new(Self::rendered_plaintext(&key, &gold, words.as_deref()));
        Ok(Self { ciphertext, gold: Segmentation::from_trusted(gold), key, plaintext, word_lengths: words, line_width: None })
    }

    /// Cut to the longest prefix of whole gold segments with at most `symbols` symbols.
    pub fn prefix(&self, symbols: usize) -> Result<GeneratedCipher> {
        let mut taken = 0;
        let mut count = 0;
        for s in self.gold.segments() {
            let l = s.chars().count();
            if taken + l > symbols {
                break;
            }
            taken += l;
            count += 1;
        }
        let gold: Vec<String> = self.gold.segments()[..count].to_vec();
        let words = self.word_lengths.as_ref().map(|lengths| {
            let mut out = Vec::new();
            let mut left = count;
            for &n in lengths {
                if left == 0 {
                    break;
                }
                out.push(n.min(left));
                left -= n.min(left);
            }
            out
        });
        let cut = Self::assemble(self.key.clone(), gold, words)?;
        Ok(match self.line_width {
            Some(w) => cut.without_spaces(w),
            None => cut,
        })
    }

    /// Drop word spaces and lay the elements out in lines of at most `width`
    /// symbols, breaking lines only between elements.
    pub fn without_spaces(&self, width: usize) -> GeneratedCipher {
        assert!(width >= self.key.max_element_len().max(1), "line width below the longest element");
        let mut lines: Vec<String> = Vec::new();
        let mut line = String::new();
        let mut used = 0;
        for s in self.gold.segments() {
            let l = s.chars().count();
            if used + l > width {
                lines.push(std::mem::take(&mut line));
                used = 0;
            }
            line.push_str(s);
            used += l;
        }
        if !line.is_empty() {
            lines.push(line);
        }
        let ciphertext =
            CipherText::from_lines(self.key.alphabet().clone(), lines).expect("gold segments are in the alphabet");
        GeneratedCipher {
            ciphertext,
            gold: self.gold.flattened(),
            key: self.key.clone(),
            plaintext: self.plaintext.without_spaces(),
            word_lengths: None,
            line_width: Some(width),
        }
    }
}

/// Encipher `plaintext` by replacing each character with a uniformly chosen homophone.
pub fn encipher(plaintext: &PlainText, key: &CipherKey, options: &EncipherOptions, rng_seed: u64) -> Result<GeneratedCipher> {
    let homophones = key.homophones();
    let nulls: Vec<&str> =
        key.entries().iter().filter(|e| e.target == PlainUnit::Null).map(|e| e.element.as_str()).collect();
    let noms: Vec<&str> =
        key.entries().iter().filter(|e| e.target == PlainUnit::Nomenclature).map(|e| e.element.as_str()).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(rng_seed);
    let mut gold: Vec<String> = Vec::new();
    let mut words: Vec<usize> = Vec::new();
    for word in plaintext.as_str().split(' ').filter(|w| !w.is_empty()) {
        let before = gold.len();
        if !noms.is_empty() && options.nomenclature_rate > 0.0 && rng.gen_bool(options.nomenclature_rate) {
            gold.push(noms[rng.gen_range(0..noms.len())].to_string());
        } else {
            for c in word.chars() {
                let choices = homophones.get(&c).ok_or(Error::MissingMapping(c))?;
                gold.push(choices[rng.gen_range(0..choices.len())].to_string());
                if !nulls.is_empty() && options.null_rate > 0.0 && rng.gen_bool(options.null_rate) {
                    gold.push(nulls[rng.gen_range(0..nulls.len())].to_string());
                }
            }
        }
        words.push(gold.len() - before);
    }
    let words = options.keep_spaces.then_some(words);
    GeneratedCipher::assemble(key.clone(), gold, words)
}

/// Break the symbol stream into lines of exactly `width` symbols (the last may be shorter).
pub fn reflow(ciphertext: &CipherText, width: usize) -> CipherText {
    assert!(width >= 1, "line width must be positive");
    let symbols: Vec<char> = ciphertext.flat().chars().collect();
    let lines = symbols.chunks(width).map(|c| c.iter().collect()).collect();
    CipherText::from_lines(ciphertext.alphabet().clone(), lines).expect("reflow keeps the alphabet")
}

/// Prefixes of `cipher` at each requested length, cut on gold boundaries.
pub fn truncate(cipher: &GeneratedCipher, lengths: &[usize]) -> Result<Vec<GeneratedCipher>> {
    lengths.iter().map(|&l| cipher.prefix(l)).collect()
}

/// 128, 256, ... up to and including `max` (powers of two).
pub fn doubling_lengths(min: usize, max: usize) -> Vec<usize> {
    std::iter::successors(Some(min), |&l| l.checked_mul(2)).take_while(|&l| l <= max).collect()
}

/// Encipher a window of `corpus` chosen by `rng_seed`, cut to `length` symbols.
///
/// The window starts at a random word and wraps around the corpus end.
pub fn sample_cipher(
    corpus: &PlainText,
    key: &CipherKey,
    length: usize,
    options: &EncipherOptions,
    rng_seed: u64,
) -> Result<GeneratedCipher> {
    let words: Vec<&str> = corpus.as_str().split(' ').filter(|w| !w.is_empty()).collect();
    if words.is_empty() {
        return Err(Error::EmptyCorpus);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(rng_seed);
    let start = rng.gen_range(0..words.len());
    let mut text: Vec<&str> = Vec::new();
    let mut letters = 0;
    // every letter yields at least one symbol
    for i in 0.. {
        if letters >= length {
            break;
        }
        if i >= words.len() * 2 && letters == 0 {
            break;
        }
        let w = words[(start + i) % words.len()];
        letters += w.chars().count();
        text.push(w);
    }
    let cipher = encipher(&PlainText::new(text.join(" ")), key, options, derive_seed(rng_seed, 1))?;
    cipher.prefix(length)
}

/// Mix a base seed with an index (splitmix64).
pub fn derive_seed(base: u64, index: u64) -> u64 {
    let mut z = base.wrapping_add(index.wrapping_add(1).wrapping_mul(0x9E37_79B9_7F4A_7C15));
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}
