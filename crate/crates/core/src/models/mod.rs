//! Metric families with closed-form curvature: warped products over a
//! circle and left-invariant metrics on Lie groups.

mod left_invariant;
mod warped;

pub use left_invariant::{scal_left_invariant, sectional_left_invariant, LeftInvariantMetric, StructureConstants};
pub use warped::{ricci_warped, scal_diagonal, scal_stencil, scal_warped, WarpedProductMetric};

/// Exponents of the conformal Laplacian in dimension `n ≥ 3`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct YamabeConstants {
    pub n: usize,
    pub b_n: f64,
    pub gamma_n: f64,
    pub two_star: f64,
}

impl YamabeConstants {
    pub fn new(n: usize) -> crate::Result<Self> {
        if n < 3 {
            return Err(crate::Error::invalid(format!("dimension must be >= 3, got {n}")));
        }
        let nf = n as f64;
        Ok(YamabeConstants {
            n,
            b_n: (nf - 1.0) / (nf - 2.0),
            gamma_n: (nf + 2.0) / (nf - 2.0),
            two_star: 2.0 * nf / (nf - 2.0),
        })
    }

    /// Exponent of the conformal factor: `g̃ = u^{4/(n-2)} g`.
    pub fn conformal_power(&self) -> f64 {
        4.0 / (self.n as f64 - 2.0)
    }
}
