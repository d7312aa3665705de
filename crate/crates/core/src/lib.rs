//! Mutually unbiased bases: explicit constructions, validation, and
//! numerical evidence for (un)extendibility.
//!
//! A [`Basis`] stores its states as matrix rows. A [`MubSet`] is an ordered
//! collection of bases in one dimension. The [`extender`] module searches for
//! vectors unbiased to every basis of a set by multi-start descent on the
//! unit sphere; failure to find one is evidence, not proof, of strong
//! unextendibility.

pub mod bloch;
pub mod constructions;
pub mod cv;
pub mod error;
pub mod extender;
pub mod io;
pub mod linalg;

pub use error::{MubError, Result};
pub use linalg::{Basis, CVec, MubSet, ValidationReport, C64, DEFAULT_TOL};
