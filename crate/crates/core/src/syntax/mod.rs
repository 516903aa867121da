//! Types, terms, words and multisets.

pub mod multiset;
pub mod parse;
mod print;
pub mod term;
pub mod ty;
pub mod word;

pub use multiset::Multiset;
pub use parse::{parse_term, parse_type, ParseError};
pub use term::{Name, Path, Term};
pub use ty::Ty;
pub use word::{Bit, Word};
