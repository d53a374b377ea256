//! Static predecessor search over sets of `w`-bit keys whose query cost
//! depends on the distance from the query to the nearest keys.
//!
//! [`index::PredIndex`] bundles the z-fast trie and the optional search
//! structures; [`oracle::Oracle`] is the brute-force reference used by the
//! tests and by `zpred verify`.

pub mod bitkey;
pub mod cli;
pub mod distsearch;
pub mod error;
pub mod finger;
pub mod global;
pub mod index;
pub mod locator;
pub mod oracle;
pub mod trie;
pub mod zfast;

pub use error::{Error, Result};
pub use index::{Algo, Answer, BuildOptions, PredIndex, SpaceReport};
pub use locator::Backend;
