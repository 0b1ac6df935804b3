//! Numerical laboratory for invariant scalar curvature problems on
//! manifolds with a one-dimensional orbit space.
//!
//! The crate is organised bottom-up: [`quotient_geometry`] supplies the
//! weighted calculus on the orbit space, [`models`] the metric families,
//! and the remaining modules the Yamabe, Kazdan-Warner, Cheeger and
//! canonical-variation machinery built on top.

// `!(x > 0.0)` is used on purpose so that NaN is rejected too
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod canonical_variation;
pub mod cheeger;
pub mod dual;
pub mod error;
pub mod kazdan_warner;
pub mod models;
pub mod quotient_geometry;
pub mod trig;
pub mod yamabe;

pub use error::{Error, Result};
pub use models::{LeftInvariantMetric, StructureConstants, WarpedProductMetric, YamabeConstants};
pub use nalgebra;
pub use quotient_geometry::{build_mesh, DiscreteFunction, QuotientMesh, Topology};
