//! Partition-determined functions over finite groups and rings, exact
//! discrete entropy, fractional coverings, and verifiers for the entropy and
//! compound-set cardinality inequalities they satisfy (or fail).

pub mod algebra;
pub mod entropy;
pub mod hypergraph;
pub mod inequalities;
pub mod pdfunc;
pub mod poly;
pub mod representatives;
pub mod search;

pub use algebra::{ElementId, ElementSet, FiniteGroup, FiniteRing, GroundFamily};
pub use pdfunc::{PdFunction, SubsetMask, Value};
