//! Exact calculus of characteristic classes over modelled cohomology rings,
//! and a numerical Chern-Weil laboratory for classical Bott-Chern classes on
//! the projective line.
//!
//! The symbolic side is layered bottom-up:
//!
//! * [`algebra`] - rationals, truncated series, truncated graded rings;
//! * [`classes`] - formal bundles and characteristic classes (ch, td,
//!   additive and multiplicative classes) via Newton's identities;
//! * [`spaces`] - cohomology models of points, projective spaces, projective
//!   bundles and the universal rank-2 base, with pull-back and push-forward;
//! * [`rr`] - Riemann-Roch checks, the tower identity, the error-transfer
//!   operators on rank-2 projective bundles and the solver for the correcting
//!   additive series.
//!
//! [`numeric`] holds the grid-based Chern-Weil code and [`cli`] the expression
//! language and scenario runner behind the `charclass` binary.

pub mod algebra;
pub mod classes;
pub mod cli;
pub mod numeric;
pub mod rr;
pub mod spaces;

pub use algebra::{GradedElement, GradedRing, Rational, UnivariateSeries};
pub use classes::{CharSeries, FormalBundle};
pub use spaces::{MapModel, SpaceModel};
