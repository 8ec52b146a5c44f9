//! Variable-to-variable length codes for memoryless sources.
//!
//! A [`SourceModel`] fixes symbol probabilities and an output arity. From it
//! the crate builds prefix-free parsings of the input and prefix codes on the
//! output ([`vv::construct_vv`]), fixed-length output codes
//! ([`vf::construct_vf`]) and equiprobable block codes
//! ([`vf::construct_block`]). [`analysis`] measures delay and redundancy,
//! [`codec`] runs the codes on symbol streams and [`file`] stores them as JSON.
//!
//! ```
//! use vvcode::{analysis, vv, SourceModel};
//!
//! let model = SourceModel::parse(&["0.4", "0.6"], 2).unwrap();
//! let code = vv::construct_vv(&model, &vv::VvParams::default()).unwrap();
//! let m = analysis::metrics(&code.book).unwrap();
//! assert!(m.redundancy >= 0.0);
//! ```

pub mod analysis;
pub mod codebook;
pub mod codec;
pub mod diophantine;
pub mod error;
pub mod file;
pub mod source;
pub mod vf;
pub mod vv;
pub mod word_sets;

pub use codebook::{Assignment, CodeBook, CodeKind};
pub use error::{Error, Result};
pub use source::{Alphabet, Profile, SourceModel, Word};

#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/introduction.md")]
    mod introduction {}
    #[doc = include_str!("../../../book/src/sources.md")]
    mod sources {}
    #[doc = include_str!("../../../book/src/word-sets.md")]
    mod word_sets {}
    #[doc = include_str!("../../../book/src/vv-codes.md")]
    mod vv_codes {}
    #[doc = include_str!("../../../book/src/vf-codes.md")]
    mod vf_codes {}
    #[doc = include_str!("../../../book/src/analysis.md")]
    mod analysis {}
    #[doc = include_str!("../../../book/src/codec.md")]
    mod codec {}
    #[doc = include_str!("../../../book/src/cli.md")]
    mod cli {}
}
