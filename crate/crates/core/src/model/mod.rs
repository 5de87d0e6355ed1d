//! Ciphers, keys, segmentations and their file formats.

mod alphabet;
mod cipher;
mod key;
mod plain;
mod segmentation;

pub use alphabet::CipherAlphabet;
pub use cipher::{parse_cipher, parse_segmentation, CipherText, ParsedCipher};
pub use key::{nomenclature_placeholder, parse_key, CipherKey, KeyEntry, PlainUnit};
pub use plain::PlainText;
pub use segmentation::Segmentation;
