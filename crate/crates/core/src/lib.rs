//! Computational toolkit for the q-deformed canonical commutation relations
//!
//! ```text
//! a(f) a†(g) = (1-q) <f,g> 1 + q a†(g) a(f),        -1 <= q <= 1,
//! ```
//!
//! interpolating between Bose (q = 1), free/Cuntz (q = 0) and Fermi (q = -1)
//! statistics.  The crate provides:
//!
//! - [`wick`] — exact symbolic algebra over the relations: unique Wick
//!   (normal-ordered) forms by rewriting, adjoints, coherent-state expectation
//!   functionals `omega_phi` and Gram matrices of word families.  Coefficients
//!   are either exact rational functions of a symbolic `q` ([`exact`]) or
//!   complex doubles at a fixed numeric `q`.
//! - [`single_mode`] — the analytic toolkit for one generator: the weighted
//!   shift realization, operator-norm branches, the `beta±` and `epsilon`
//!   infinite products with certified truncation tails, the `V_{alpha,beta}`
//!   intertwiner series and the q-exponential, and Radon–Nikodym transport
//!   between coherent states.
//! - [`fock`] — degree-truncated matrix representations for d generators:
//!   Gram matrices, Cholesky orthonormalization, creation/annihilation
//!   matrices, coherent vectors, GNS spaces for peripheral states, Cesàro
//!   means, and the `rho`/isometry constructions with their spectral lower
//!   bound.
//! - [`boundary`] — the endpoints q = ±1: the abelian evaluation at q = +1
//!   and the full Clifford-algebra classification at q = -1 (bilinear forms,
//!   real quadratic form, rank, explicit Pauli-word representations).
//! - [`parse`] — a text syntax for polynomials in the generators, used by the
//!   CLI and the tests; printing and parsing round-trip.
//! - [`export`] — deterministic JSON + base64 serialization of truncated
//!   representations; loading reproduces matrices bit-exactly.
//! - [`suite`] — named verification checks aggregating the invariants of all
//!   modules, including the acceptance criteria run by the `acceptance`
//!   integration test and the CLI `verify` command.
//!
//! Inner products are conjugate-linear in the *first* slot throughout, so the
//! defining property of the coherent state reads
//! `omega_phi(a†(f) X) = <phi, f> omega_phi(X)` literally.

pub mod boundary;
pub mod error;
pub mod exact;
pub mod export;
pub mod fock;
pub mod parse;
pub mod scalar;
pub mod single_mode;
pub mod suite;
pub mod wick;

pub use error::{Error, Result};
pub use scalar::{ExactRing, FloatRing, QParam, Scalar};
pub use wick::{Gen, ModeVector, OpKind, WickPolynomial, Word};
