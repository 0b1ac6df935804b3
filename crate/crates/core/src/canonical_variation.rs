//! Canonical variation `g̃_s = g|_H + s·g|_V` of a Riemannian submersion with
//! totally geodesic fibers, evaluated pointwise from curvature tables.

use nalgebra::DMatrix;

use crate::error::{Error, Result};

/// Curvature data at one point of the total space, in a `g`-orthonormal
/// frame `{e_i}` horizontal and `{e'_a}` vertical.
#[derive(Debug, Clone, PartialEq)]
pub struct SubmersionPointData {
    /// `K_h(dπ e_i, dπ e_j)`, `n × n`.
    pub k_base: DMatrix<f64>,
    /// `K_g(e_i, e_j)`, `n × n`.
    pub k_tot_hh: DMatrix<f64>,
    /// `K_g(e_i, e'_a)`, `n × k`.
    pub k_mixed: DMatrix<f64>,
    /// Scalar curvature of the fiber at the point.
    pub fiber_scal: f64,
    fiber_dim: usize,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Plane {
    Horizontal(usize, usize),
    Mixed(usize, usize),
    /// Vertical plane, carrying `K_{g_F}(V, W)` for the `g`-unit pair.
    Vertical(f64),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Threshold {
    At(f64),
    Unbounded,
}

/// Largest `s` examined before a positive scal is called unbounded.
pub const THRESHOLD_CAP: f64 = 1e6;

impl SubmersionPointData {
    pub fn new(
        k_base: DMatrix<f64>,
        k_tot_hh: DMatrix<f64>,
        k_mixed: DMatrix<f64>,
        fiber_dim: usize,
        fiber_scal: f64,
    ) -> Result<Self> {
        let n = k_base.nrows();
        if fiber_dim < 1 {
            return Err(Error::invalid("fiber dimension must be >= 1"));
        }
        if k_base.shape() != (n, n) || k_tot_hh.shape() != (n, n) || k_mixed.shape() != (n, fiber_dim) {
            return Err(Error::invalid(format!("tables must be {n}×{n}, {n}×{n} and {n}×{fiber_dim}")));
        }
        for t in [&k_base, &k_tot_hh] {
            if (t - t.transpose()).amax() > 1e-12 * (1.0 + t.amax()) {
                return Err(Error::invalid("horizontal tables must be symmetric"));
            }
            if t.diagonal().amax() != 0.0 {
                return Err(Error::invalid("horizontal tables must have zero diagonal"));
            }
        }
        if !fiber_scal.is_finite() {
            return Err(Error::invalid("fiber scalar curvature must be finite"));
        }
        if fiber_dim == 1 && fiber_scal != 0.0 {
            return Err(Error::invalid("a one-dimensional fiber is flat"));
        }
        Ok(SubmersionPointData { k_base, k_tot_hh, k_mixed, fiber_scal, fiber_dim })
    }

    /// Riemannian product of a base with the given sectional table and a
    /// fiber of constant curvature: `K_tot = K_base`, no mixed curvature.
    pub fn product(k_base: DMatrix<f64>, fiber_dim: usize, fiber_scal: f64) -> Result<Self> {
        let n = k_base.nrows();
        Self::new(k_base.clone(), k_base, DMatrix::zeros(n, fiber_dim), fiber_dim, fiber_scal)
    }

    pub fn base_dim(&self) -> usize {
        self.k_base.nrows()
    }

    pub fn fiber_dim(&self) -> usize {
        self.fiber_dim
    }

    pub fn scal_base(&self) -> f64 {
        self.k_base.sum()
    }
}

fn check_s(s: f64) -> Result<()> {
    if s > 0.0 && s.is_finite() {
        Ok(())
    } else {
        Err(Error::invalid(format!("canonical variation parameter must be > 0, got {s}")))
    }
}

/// Unnormalized sectional curvature of `g̃_s` on a pair of `g`-unit vectors.
pub fn cv_sectional(d: &SubmersionPointData, s: f64, plane: Plane) -> Result<f64> {
    check_s(s)?;
    let n = d.base_dim();
    match plane {
        Plane::Horizontal(i, j) if i < n && j < n => Ok(d.k_base[(i, j)] * (1.0 - s) + s * d.k_tot_hh[(i, j)]),
        Plane::Mixed(i, a) if i < n && a < d.fiber_dim => Ok(s * s * d.k_mixed[(i, a)]),
        Plane::Vertical(k_f) => Ok(s * k_f),
        _ => Err(Error::invalid(format!("plane {plane:?} outside a {n}+{} frame", d.fiber_dim))),
    }
}

/// `scal_{g̃_s} = (1-s) scal_h + s ΣK_g(e_i,e_j) + 2s ΣK_g(e_i,e'_a) + scal_F / s`.
pub fn cv_scal(d: &SubmersionPointData, s: f64) -> Result<f64> {
    check_s(s)?;
    Ok((1.0 - s) * d.scal_base() + s * d.k_tot_hh.sum() + 2.0 * s * d.k_mixed.sum() + d.fiber_scal / s)
}

/// Double sum of [`cv_sectional`] over a `g̃_s`-orthonormal frame, the
/// vertical vectors rescaled by `1/√s`. Vertical planes use the constant
/// curvature value `scal_F / (k(k-1))`.
pub fn cv_scal_by_frame(d: &SubmersionPointData, s: f64) -> Result<f64> {
    check_s(s)?;
    let (n, k) = (d.base_dim(), d.fiber_dim);
    let mut total = 0.0;
    for i in 0..n {
        for j in 0..n {
            if i != j {
                total += cv_sectional(d, s, Plane::Horizontal(i, j))?;
            }
        }
    }
    for i in 0..n {
        for a in 0..k {
            total += 2.0 * cv_sectional(d, s, Plane::Mixed(i, a))? / s;
        }
    }
    if k >= 2 {
        let k_f = d.fiber_scal / (k * (k - 1)) as f64;
        let pairs = (k * (k - 1)) as f64;
        total += pairs * cv_sectional(d, s, Plane::Vertical(k_f))? / (s * s);
    }
    Ok(total)
}

/// Largest `s*` with `cv_scal(s) > 0` on `(0, s*)`.
pub fn positivity_threshold(d: &SubmersionPointData) -> Result<Threshold> {
    if !(d.fiber_scal > 0.0) {
        return Err(Error::precondition(
            "lemma5.3",
            format!("fiber scalar curvature must be positive, got {}", d.fiber_scal),
        ));
    }
    let f = |s: f64| cv_scal(d, s).expect("s > 0");
    // cv_scal · s is a cubic in s, so a fine log grid brackets its first root
    let grid = 2000;
    let (lo, hi) = (1e-12f64.ln(), THRESHOLD_CAP.ln());
    let mut prev = 1e-12;
    if !(f(prev) > 0.0) {
        return Err(Error::numerical("positivity_threshold", "cv_scal not positive near s = 0"));
    }
    for i in 1..=grid {
        let s = (lo + (hi - lo) * i as f64 / grid as f64).exp();
        if f(s) <= 0.0 {
            let (mut a, mut b) = (prev, s);
            while b - a > 1e-12 * b.max(1.0) {
                let mid = 0.5 * (a + b);
                if f(mid) > 0.0 {
                    a = mid;
                } else {
                    b = mid;
                }
            }
            return Ok(Threshold::At(0.5 * (a + b)));
        }
        prev = s;
    }
    Ok(Threshold::Unbounded)
}
