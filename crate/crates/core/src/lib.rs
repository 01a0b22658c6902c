//! Exact symbolic verification and numerical evaluation for unitary
//! theta lifts: a Fock-model symbolic calculus over Q(i)[pi, pi^-1],
//! hermitian lattices over imaginary quadratic fields, vector-valued theta
//! series, and Green-form evaluators.

pub mod error;
pub mod exact;
pub mod fock;
pub mod green;
pub mod lattice;
pub mod schrodinger;
pub mod special;
pub mod weil;

pub use error::{LatticeError, NumericError, SymbolicError};
pub use exact::{ExactScalar, GaussRat};
pub use fock::{ExtGen, ExtMonomial, FockForm, FockVariable, Kind, PolyMonomial, Signature};
