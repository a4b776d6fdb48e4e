//! Silver word-alignment evaluation data from minimal pairs, and the harness
//! that ranks word aligners against silver or gold alignments.
//!
//! The pipeline translates a monolingual sentence, asks a fill-mask provider
//! for substitutes at each position, translates every minimal pair and links
//! a source word to the single target word that all valid substitutes
//! change. The evaluation side trains tokenizers and an IBM Model 1 aligner,
//! symmetrizes, and scores predictions with precision, recall, F1 and AER.

pub mod align;
pub mod cli;
pub mod corpus;
pub mod eval;
pub mod inference;
pub mod minpair;
pub mod providers;
pub mod synth;
pub mod tokenize;

pub use corpus::{AlignmentLink, AlignmentSet, Sentence, SentencePair, SilverRecord, Sureness};
