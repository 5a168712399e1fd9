//! Doubly coupled designs: an orthogonal array `D1` of qualitative factors
//! paired with a Latin hypercube `D2` of quantitative factors such that the
//! quantitative rows under every level of any one or any two qualitative
//! factors still form a (collapsed) Latin hypercube.

pub mod array;
pub mod bundle;
pub mod cli;
pub mod construct;
pub mod criteria;
pub mod design;
pub mod error;
pub mod gf;
pub mod oa;
pub mod perm;
pub mod reference;
pub mod verify;

pub use array::{IntegerMatrix, LatinHypercube, OrthogonalArray};
pub use construct::Family;
pub use design::{CoupledDesign, PermutationPlan, Witness};
pub use error::{Error, Result};
pub use gf::GaloisField;
pub use perm::Permutation;
pub use verify::{verify_design, VerificationReport};
