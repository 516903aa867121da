//! Coherent differential PCF.
//!
//! The crate covers the whole pipeline for the language: concrete syntax,
//! simple typing, the syntactic differential, the rewriting system, the
//! nondeterministic Krivine machine over access words, its deterministic
//! refinement with writable cells, and a relational oracle given by
//! non-idempotent intersection types.

pub mod differential;
pub mod gen;
pub mod machine;
pub mod program;
pub mod rel;
pub mod rewrite;
pub mod syntax;
pub mod typing;

pub use syntax::{Bit, Multiset, Name, Term, Ty, Word};
