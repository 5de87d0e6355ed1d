//! Segmentation and known-key decipherment of unsegmented numerical
//! substitution ciphers.
//!
//! Without a key, ciphers are segmented by fixed-width baselines, byte pair
//! encoding with an optional piece-length cap, or a unigram language model
//! trained by EM. With a key, a non-deterministic cipher is deciphered by
//! composing a segmentation lattice, a key transducer and a character n-gram
//! model, then taking the best path.

pub mod charlm;
pub mod ciphergen;
pub mod corpus;
pub mod decipher;
pub mod error;
pub mod harness;
pub mod metrics;
pub mod model;
pub mod scalar;
pub mod segmenters;
pub mod wfst;

pub use error::{Error, Result};
pub use model::{CipherAlphabet, CipherKey, CipherText, PlainText, PlainUnit, Segmentation};
pub use scalar::Scalar;

pub type UnigramModel = segmenters::UnigramModel<f64>;
pub type UnigramModel32 = segmenters::UnigramModel<f32>;
pub type CharNgramLm = charlm::CharNgramLm<f64>;
pub type CharNgramLm32 = charlm::CharNgramLm<f32>;
pub type Wfst = wfst::Wfst<f64>;
pub type Wfst32 = wfst::Wfst<f32>;
pub type Path = wfst::Path<f64>;
