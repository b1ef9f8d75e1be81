//! Exact-arithmetic toolkit for multiplicative maps `Φ: M_n(F) → M_k(F)`,
//! i.e. maps with `Φ(AB) = Φ(A)Φ(B)` and no linearity assumed, over `F = Q`
//! or a quadratic field `Q(√d)`.
//!
//! * [`field`], [`matrix`], [`slword`]: exact scalars, dense linear algebra
//!   and transvection words.
//! * [`mapexpr`]: composition expressions over the canonical atoms, their
//!   evaluation and simplification to canonical form.
//! * [`classify`]: recovery of the canonical form of a black-box oracle.
//! * [`verify`]: multiplicativity and equality fuzzing, lower central
//!   series checks.
//! * [`doc`]: the JSON document formats.

pub mod classify;
pub mod doc;
pub mod error;
pub mod field;
pub mod mapexpr;
pub mod matrix;
pub mod oracle;
pub mod slword;
pub mod verify;

pub use error::{Error, Result};
pub use field::{Field, Hom, RingHom, Scalar};
pub use matrix::Matrix;
