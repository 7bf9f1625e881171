//! Exact-arithmetic linear programming hierarchies for linear codes over F_q.
//!
//! The crate enumerates the lattice of subspaces of F_q^n, builds the
//! Krawtchouk and partial-Krawtchouk LP hierarchies in their subspace
//! (pseudoprobability) and unsymmetrized forms, solves them with a
//! certifying rational simplex, and cross-checks the results against a
//! brute-force code-search oracle. All arithmetic is exact: field elements,
//! lattice counts, LP coefficients, optima and certificates are integers or
//! arbitrary-precision rationals throughout.

pub mod field;
pub mod hierarchy;
pub mod lattice;
pub mod lp;
pub mod oracle;
pub mod suites;

pub use field::{FieldSpec, FqElement, FqVector};
pub use hierarchy::{CumulativeSolution, Instance, PseudoDistribution};
pub use lattice::{Lattice, MinWeight, Subspace, SubspaceId};
pub use lp::{LinearProgram, LpSolution, Relation, Sense, Status};
pub use oracle::{OracleReport, VerificationReport};

/// Exact rational scalar used for every LP coefficient, solution value and
/// certificate in the crate.
pub type Rational = num_rational::BigRational;

/// Resource limits shared by the enumeration and builder entry points.
///
/// Every cap can be overridden; the defaults keep desk-scale runs well away
/// from memory or time blowups.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Caps {
    /// Maximum total number of subspaces a lattice enumeration may produce.
    pub max_subspaces: u64,
    /// Maximum number of tuple-indexed variables in an unsymmetrized model.
    pub max_tuples: u64,
    /// Highest level probed by the infeasibility-level search.
    pub max_level: u32,
}

impl Default for Caps {
    fn default() -> Self {
        Caps {
            max_subspaces: 100_000,
            max_tuples: 1 << 16,
            max_level: 64,
        }
    }
}
