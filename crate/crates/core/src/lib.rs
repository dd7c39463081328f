//! Finite-dimensional weak Hopf *-algebras over the complex numbers, presented
//! by structure constants, together with the full operator-algebraic bundle one
//! can build from a faithful positive left integral: the canonical idempotent
//! and its leg algebras, distinguished base functionals, counit, antipode,
//! modular automorphisms and modular element, GNS spaces, the multiplicative
//! partial isometry `W`, the modular operators `T`, `∇`, `J`, `Z`, `P`, the
//! dual algebra, and a machine-readable certificate report for every identity
//! along the way.
//!
//! The crate is organized as a pipeline over immutable data:
//!
//! * [`linalg`] — complex dense kernel (adjoints in non-standard inner
//!   products, antilinear operators, Hermitian functional calculus, subspaces).
//! * [`algebra`] — *-algebra presentations, element arithmetic, regular
//!   representations, functional Gram data.
//! * [`coalgebra`] — comultiplication validation, canonical idempotent, legs,
//!   leg anti-isomorphisms, distinguished functionals, counit.
//! * [`integrals`] — left/right integrals, antipode, modular automorphisms and
//!   modular element, the full relation and quasi-invariance suites.
//! * [`gns`] — GNS spaces, the bridge unitary, `W`, modular operators, the
//!   commutation suite and the final quantum-groupoid certificate.
//! * [`duality`] — the dual weak Hopf *-algebra and biduality checks.
//! * [`groupoid`] — finite groupoids and example generators.
//! * [`io`] — the JSON presentation schema.
//! * [`pipeline`] — the staged verification driver used by the CLI.

#![deny(unsafe_code)]

pub mod algebra;
pub mod coalgebra;
pub mod duality;
pub mod error;
pub mod gns;
pub mod groupoid;
pub mod integrals;
pub mod io;
pub mod linalg;
pub mod pipeline;
pub mod report;
pub mod tol;

pub use error::WqgError;
pub use report::{Check, Status, VerificationReport};
pub use tol::Tolerance;

/// Result alias used throughout the crate.
pub type Result<T> = std::result::Result<T, WqgError>;
