//! Bilingual (English/Mandarin) viseme toolkit: IPA transliteration and
//! phoneme-to-viseme mapping, corpus construction with incremental splits,
//! a surrogate viseme classifier trained under monolingual, bilingual and
//! sequential protocols, and critical-period analysis of its learning curves.

pub mod analyzer;
pub mod bundled;
pub mod corpus;
pub mod error;
pub mod features;
pub mod learner;
pub mod rng;
pub mod viseme;

pub use error::{Error, Result};
