use crate::dual::Scalar;
use crate::error::{check_len, Error, Result};
use crate::quotient_geometry::{build_mesh, DiscreteFunction, QuotientMesh, Topology};

/// `dr² + f(r)² g_F` over a circle of length `L`, with a `k`-dimensional
/// fiber whose unit metric has constant scalar curvature `c_F`.
///
/// The mesh weights are kept equal to `f^k`, the orbit volume up to the
/// constant volume of the unit fiber.
#[derive(Debug, Clone, PartialEq)]
pub struct WarpedProductMetric {
    mesh: QuotientMesh,
    k: usize,
    c_f: f64,
    f: Vec<f64>,
}

impl WarpedProductMetric {
    pub fn new(length: f64, k: usize, c_f: f64, f: Vec<f64>) -> Result<Self> {
        if k < 2 {
            return Err(Error::invalid(format!("fiber dimension must be >= 2, got {k}")));
        }
        if !c_f.is_finite() {
            return Err(Error::invalid("fiber scalar curvature must be finite"));
        }
        if let Some((j, v)) = f.iter().enumerate().find(|(_, v)| !(**v > 0.0 && v.is_finite())) {
            return Err(Error::invalid(format!("warping must be positive, f[{j}] = {v}")));
        }
        let weights = f.iter().map(|v| v.powi(k as i32)).collect();
        let mesh = QuotientMesh::from_weights(Topology::Circle, length, weights)?;
        Ok(WarpedProductMetric { mesh, k, c_f, f })
    }

    pub fn from_fn(n: usize, length: f64, k: usize, c_f: f64, f: impl Fn(f64) -> f64) -> Result<Self> {
        let probe = build_mesh(Topology::Circle, n, length, |_| 1.0)?;
        let vals = probe.nodes().iter().map(|&r| f(r)).collect();
        Self::new(length, k, c_f, vals)
    }

    /// `S¹(2π) × S³` with the round unit fiber: scal ≡ 6.
    pub fn round_fiber(n: usize) -> Result<Self> {
        Self::from_fn(n, std::f64::consts::TAU, 3, 6.0, |_| 1.0)
    }

    /// `S¹(2π) × T³`, flat.
    pub fn flat_torus(n: usize) -> Result<Self> {
        Self::from_fn(n, std::f64::consts::TAU, 3, 0.0, |_| 1.0)
    }

    /// `S¹(2π) × Σ` with `Σ` a hyperbolic surface: scal ≡ -2.
    pub fn hyperbolic_fiber(n: usize) -> Result<Self> {
        Self::from_fn(n, std::f64::consts::TAU, 2, -2.0, |_| 1.0)
    }

    pub fn mesh(&self) -> &QuotientMesh {
        &self.mesh
    }

    pub fn fiber_dim(&self) -> usize {
        self.k
    }

    pub fn fiber_scal(&self) -> f64 {
        self.c_f
    }

    pub fn warping(&self) -> &[f64] {
        &self.f
    }

    /// Total dimension `k + 1`.
    pub fn dim(&self) -> usize {
        self.k + 1
    }

    pub fn len(&self) -> usize {
        self.f.len()
    }

    pub fn is_empty(&self) -> bool {
        self.f.is_empty()
    }

    pub fn with_warping(&self, f: Vec<f64>) -> Result<Self> {
        check_len(self.len(), f.len())?;
        Self::new(self.mesh.length(), self.k, self.c_f, f)
    }

    /// The homothetic metric `c·g`: base length and warping scale by `√c`.
    pub fn scaled(&self, c: f64) -> Result<Self> {
        if !(c > 0.0) {
            return Err(Error::invalid(format!("scale factor must be positive, got {c}")));
        }
        let s = c.sqrt();
        Self::new(self.mesh.length() * s, self.k, self.c_f, self.f.iter().map(|v| v * s).collect())
    }

    /// Reflected warping `r ↦ f(-r)`.
    pub fn reflected(&self) -> Result<Self> {
        let n = self.len();
        let f = (0..n).map(|j| self.f[(n - j) % n]).collect();
        self.with_warping(f)
    }
}

/// Scalar curvature of `p² dr² + q² g_F` at one node from its three-point
/// stencil. With `p ≡ 1` this is the standard warped-product formula with
/// central first and second differences.
#[allow(clippy::too_many_arguments)]
pub fn scal_stencil<T: Scalar>(p: [T; 3], q: [T; 3], h: f64, k: usize, c_f: f64) -> T {
    let hh = T::cst(h);
    let two = T::cst(2.0);
    let qs = (q[2] - q[0]) / (two * hh) / p[1];
    let p_plus = (p[1] + p[2]) / two;
    let p_minus = (p[1] + p[0]) / two;
    let qss = ((q[2] - q[1]) / (hh * p_plus) - (q[1] - q[0]) / (hh * p_minus)) / (hh * p[1]);
    let kf = k as f64;
    let ratio = qs / q[1];
    T::cst(c_f) / (q[1] * q[1]) - T::cst(2.0 * kf) * qss / q[1] - T::cst(kf * (kf - 1.0)) * ratio * ratio
}

/// Nodewise scalar curvature of the periodic diagonal metric `p² dr² + q² g_F`.
pub fn scal_diagonal(h: f64, k: usize, c_f: f64, p: &[f64], q: &[f64]) -> Result<DiscreteFunction> {
    check_len(p.len(), q.len())?;
    let n = p.len();
    Ok((0..n)
        .map(|j| {
            let (a, b) = ((j + n - 1) % n, (j + 1) % n);
            scal_stencil([p[a], p[j], p[b]], [q[a], q[j], q[b]], h, k, c_f)
        })
        .collect())
}

pub fn scal_warped(m: &WarpedProductMetric) -> DiscreteFunction {
    let ones = vec![1.0; m.len()];
    scal_diagonal(m.mesh.spacing(), m.k, m.c_f, &ones, &m.f).expect("lengths agree")
}

/// Radial and fiber Ricci eigenvalues in the orthonormal frame.
pub fn ricci_warped(m: &WarpedProductMetric) -> (DiscreteFunction, DiscreteFunction) {
    let n = m.len();
    let h = m.mesh.spacing();
    let f = &m.f;
    let kf = m.k as f64;
    let mut rr = vec![0.0; n];
    let mut fib = vec![0.0; n];
    for j in 0..n {
        let (a, b) = ((j + n - 1) % n, (j + 1) % n);
        let d1 = (f[b] - f[a]) / (2.0 * h) / f[j];
        let d2 = (f[b] - 2.0 * f[j] + f[a]) / (h * h) / f[j];
        rr[j] = -kf * d2;
        fib[j] = -d2 - (kf - 1.0) * d1 * d1 + m.c_f / (kf * f[j] * f[j]);
    }
    (rr, fib)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::TAU;

    fn bumpy(n: usize) -> WarpedProductMetric {
        WarpedProductMetric::from_fn(n, TAU, 3, 6.0, |r| 1.0 + 0.1 * r.sin()).unwrap()
    }

    #[test]
    fn presets() {
        let s = scal_warped(&WarpedProductMetric::round_fiber(32).unwrap());
        assert!(s.iter().all(|v| (v - 6.0).abs() < 1e-13));
        let s = scal_warped(&WarpedProductMetric::flat_torus(32).unwrap());
        assert!(s.iter().all(|v| v.abs() < 1e-13));
        let s = scal_warped(&WarpedProductMetric::hyperbolic_fiber(32).unwrap());
        assert!(s.iter().all(|v| (v + 2.0).abs() < 1e-13));
    }

    #[test]
    fn invalid_metrics() {
        assert!(WarpedProductMetric::from_fn(32, TAU, 1, 0.0, |_| 1.0).is_err());
        assert!(WarpedProductMetric::from_fn(32, TAU, 3, 6.0, |r| r.sin()).is_err());
    }

    #[test]
    fn weights_follow_warping() {
        let m = bumpy(64);
        for (w, f) in m.mesh().weights().iter().zip(m.warping()) {
            assert!((w - f.powi(3)).abs() < 1e-15);
        }
    }

    #[test]
    fn round_fiber_ricci_is_einstein_on_fiber() {
        let (rr, fib) = ricci_warped(&WarpedProductMetric::round_fiber(32).unwrap());
        assert!(rr.iter().all(|v| v.abs() < 1e-13));
        assert!(fib.iter().all(|v| (v - 2.0).abs() < 1e-13));
        let (rr, fib) = ricci_warped(&WarpedProductMetric::flat_torus(32).unwrap());
        assert!(rr.iter().chain(&fib).all(|v| v.abs() < 1e-13));
    }

    #[test]
    fn ricci_trace_is_scal() {
        let m =
            WarpedProductMetric::from_fn(64, TAU, 4, 12.0, |r| 1.2 + 0.3 * r.sin() + 0.1 * (3.0 * r).cos()).unwrap();
        let s = scal_warped(&m);
        let (rr, fib) = ricci_warped(&m);
        for j in 0..64 {
            assert!((rr[j] + 4.0 * fib[j] - s[j]).abs() < 1e-8);
        }
    }

    #[test]
    fn scaling_divides_scal() {
        let m = bumpy(128);
        let s = scal_warped(&m);
        let s2 = scal_warped(&m.scaled(4.0).unwrap());
        for j in 0..128 {
            assert!((s2[j] - s[j] / 4.0).abs() < 1e-10);
        }
    }

    #[test]
    fn reflection_invariance() {
        let m = bumpy(64);
        let s = scal_warped(&m);
        let sr = scal_warped(&m.reflected().unwrap());
        for j in 0..64 {
            assert!((s[j] - sr[(64 - j) % 64]).abs() < 1e-12);
        }
    }

    #[test]
    fn stencil_reduces_to_warped_formula() {
        let m = bumpy(48);
        let a = scal_warped(&m);
        let h = m.mesh().spacing();
        for j in 0..48 {
            let f = m.warping();
            let (l, r) = ((j + 47) % 48, (j + 1) % 48);
            let d1 = (f[r] - f[l]) / (2.0 * h);
            let d2 = (f[r] - 2.0 * f[j] + f[l]) / (h * h);
            let direct = 6.0 / (f[j] * f[j]) - 6.0 * d2 / f[j] - 6.0 * d1 * d1 / (f[j] * f[j]);
            assert!((a[j] - direct).abs() < 1e-10);
        }
    }
}
