//! Finite-model-theory workbench: relational structures and their free
//! joins and amalgams, Fraïssé-class checks, approximate Ramsey search over
//! embedding colourings, EPPA witnesses, and certificates that a colouring
//! is not null or not tame.

pub mod canon;
pub mod class;
pub mod colouring;
pub mod config;
pub mod construct;
pub mod embedding;
pub mod eppa;
pub mod error;
pub mod harness;
pub mod report;
pub mod structure;
pub mod witness;

pub use canon::{canonical_form, CanonicalForm};
pub use class::{Approximant, ClassSpec};
pub use colouring::{Colouring, ColouringFamily, Rational};
pub use embedding::{Embedding, PartialAutomorphism};
pub use error::{Error, Result};
pub use structure::{FinStructure, Signature};
pub use witness::{IndexSet, NonNullWitness, NonTameWitness};
