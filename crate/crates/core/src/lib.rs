#![cfg_attr(not(feature = "std"), no_std)]

//! Lexical-exposure control for COGS-format compositional generalization data.
//!
//! The crate is `no_std` with `alloc`. It holds the pure parts of the
//! toolkit: the dataset and logical-form layer, controlled-item inference,
//! nonce-string sampling, substitution plans, Test-Lex generation, the
//! multi-pattern scanning automaton, and the evaluation metrics. File IO and
//! the command-line front end live in the `lexctl` crate.

extern crate alloc;

pub mod dataset;
pub mod eval;
pub mod lexicon;
pub mod lf;
pub mod sampler;
pub mod scan;
pub mod slots;
pub mod testlex;
pub mod transform;

mod text;

pub use dataset::{Example, SplitFile, SplitName};
pub use lexicon::{ControlledItem, LexiconError};
pub use lf::{Atom, Definite, LfStyle, LogicalForm, ParseError, Term};
pub use sampler::{CharDistribution, LengthBucket, SamplerConfig, SamplerError};
pub use slots::SlotClass;
pub use transform::{InitScheme, PlanMode, SubstitutionPlan, TransformError, VocabularyManifest};
