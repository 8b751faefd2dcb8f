//! Numerical Chern–Weil computations on the projective line: metrics on
//! chart grids, curvature and characteristic forms by finite differences,
//! `dd^c`, two-chart integration, and classical Bott–Chern forms built by
//! deforming an exact sequence over an auxiliary projective line.

pub mod bott_chern;
pub mod forms;
pub mod grid;
pub mod jet;
pub mod linalg;
pub mod product;

use thiserror::Error;

pub use bott_chern::{BottChernOptions, BottChernOutput, Cutoff, DeformationDatum, DownstairsReport};
pub use forms::{HermitianMetric, MetricSample, NumericForm};
pub use grid::{Chart, ChartGrid, StencilOrder};
pub use linalg::{CMat, C64};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum NumericError {
    #[error("metric is not hermitian positive definite at node {node} ({point}) of the {chart:?} chart")]
    InvalidMetric { chart: Chart, node: usize, point: C64 },
    #[error("section vanishes at node {node} ({point})")]
    SingularNode { node: usize, point: C64 },
    #[error("chart densities disagree on the overlap by {max_diff:e} near {at}")]
    ChartMismatch { max_diff: f64, at: C64 },
    #[error("grid with {n} nodes per side is too small (need {need})")]
    GridTooSmall { n: usize, need: usize },
    #[error("expected a form of bidegree {expected:?}, got {got:?}")]
    Bidegree { expected: (u8, u8), got: (u8, u8) },
    #[error("invalid datum: {0}")]
    InvalidDatum(String),
}
