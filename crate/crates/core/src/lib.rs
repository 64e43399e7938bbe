//! Factorized relations and the grammars, automata and path representations
//! that describe the same finite sets of words.
//!
//! Tuples over a finite domain are words. A factorized relation is then a
//! non-recursive grammar whose language has a single word length, and the
//! modules below move between relations, grammars, automata and path
//! multiset representations and decide membership, counting, enumeration
//! and equivalence on them.

#![no_std]

extern crate alloc;

pub mod algorithms;
pub mod automata;
pub mod families;
pub mod gen;
pub mod grammar;
pub mod limits;
pub mod name;
pub mod nfr;
pub mod pmr;
pub mod samples;
pub mod ufr;
pub mod value;

pub use limits::{Limits, ResourceLimit};
pub use name::Name;
pub use value::{Discipline, Relation, Tuple, Value, Word};
