//! Graph states of prime-power dimension built from generalized CNOT circuits.

pub mod classify;
pub mod duality;
pub mod entangle;
pub mod gf;
pub mod io;
pub mod linalg;
pub mod relations;
pub mod rewrite;
pub mod simulator;

pub use gf::{Elem, Field, GfError};
pub use rewrite::{canonicalize, commute_pair, Canonical, Circuit, GraphState, Relation, RewriteError, SymbolicState};
pub use simulator::{DensityMatrix, Gate, Init, Operator, Register, SimError, StateVector, DEFAULT_TOL};
