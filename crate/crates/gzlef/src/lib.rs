//! Invariant word norms on finite groups and on the lamplighter-type
//! wreath products `(⊕_Z P) ⋊ Z` and their cyclic truncations.
//!
//! Group products compose left to right throughout; see [`group`].

pub mod axioms;
pub mod commutators;
pub mod error;
pub mod group;
pub mod gz_norm;
pub mod lamp;
pub mod norm;
pub mod oracle;
pub mod props;
pub mod sample;

pub use error::{Error, Result};
pub use group::{FiniteGroup, GroupSpec, Perm};
pub use lamp::{Lamp, LampElem, Mode};

/// Exact norm values.
pub type Rational = num_rational::Ratio<i64>;
/// Norm table with exact rational values.
pub type RatNormTable = norm::NormTable<Rational>;
/// Norm table with floating-point values.
pub type FloatNormTable = norm::NormTable<f64>;
