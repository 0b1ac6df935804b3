use nalgebra::{DMatrix, DVector, SymmetricEigen};

use crate::error::{Error, Result};

/// Structure constants `c^l_{ij}` of a Lie algebra in a basis that is
/// orthonormal for a bi-invariant inner product `Q`.
#[derive(Debug, Clone, PartialEq)]
pub struct StructureConstants {
    d: usize,
    c: Vec<f64>,
}

const STRUCTURE_TOL: f64 = 1e-10;

impl StructureConstants {
    /// `c` is indexed as `c[(i * d + j) * d + l]`.
    pub fn new(d: usize, c: Vec<f64>) -> Result<Self> {
        if c.len() != d * d * d {
            return Err(Error::invalid(format!(
                "structure constants need d³ = {} entries, got {}",
                d * d * d,
                c.len()
            )));
        }
        let s = StructureConstants { d, c };
        s.validate()?;
        Ok(s)
    }

    pub fn abelian(d: usize) -> Self {
        StructureConstants { d, c: vec![0.0; d * d * d] }
    }

    /// `su(2)` with `[e_i, e_j] = ε_{ijl} e_l`.
    pub fn su2() -> Self {
        let mut c = vec![0.0; 27];
        for (i, j, l) in [(0, 1, 2), (1, 2, 0), (2, 0, 1)] {
            c[(i * 3 + j) * 3 + l] = 1.0;
            c[(j * 3 + i) * 3 + l] = -1.0;
        }
        StructureConstants { d: 3, c }
    }

    /// Direct sum; the basis of `self` comes first.
    pub fn direct_sum(&self, other: &StructureConstants) -> Self {
        let d = self.d + other.d;
        let mut c = vec![0.0; d * d * d];
        for i in 0..self.d {
            for j in 0..self.d {
                for l in 0..self.d {
                    c[(i * d + j) * d + l] = self.get(i, j, l);
                }
            }
        }
        let o = self.d;
        for i in 0..other.d {
            for j in 0..other.d {
                for l in 0..other.d {
                    c[((i + o) * d + j + o) * d + l + o] = other.get(i, j, l);
                }
            }
        }
        StructureConstants { d, c }
    }

    pub fn dim(&self) -> usize {
        self.d
    }

    pub fn get(&self, i: usize, j: usize, l: usize) -> f64 {
        self.c[(i * self.d + j) * self.d + l]
    }

    pub fn is_abelian(&self) -> bool {
        self.c.iter().all(|v| v.abs() < STRUCTURE_TOL)
    }

    pub fn bracket(&self, x: &[f64], y: &[f64]) -> Vec<f64> {
        let d = self.d;
        let mut out = vec![0.0; d];
        for i in 0..d {
            if x[i] == 0.0 {
                continue;
            }
            for j in 0..d {
                let xy = x[i] * y[j];
                if xy == 0.0 {
                    continue;
                }
                let base = (i * d + j) * d;
                for (l, o) in out.iter_mut().enumerate() {
                    *o += xy * self.c[base + l];
                }
            }
        }
        out
    }

    /// Matrix of `ad_x` acting on coordinate vectors.
    pub fn ad(&self, x: &[f64]) -> DMatrix<f64> {
        let d = self.d;
        let mut a = DMatrix::zeros(d, d);
        for j in 0..d {
            for l in 0..d {
                a[(l, j)] = (0..d).map(|i| x[i] * self.get(i, j, l)).sum();
            }
        }
        a
    }

    pub fn jacobi_residual(&self) -> f64 {
        let d = self.d;
        let e = |i: usize| {
            let mut v = vec![0.0; d];
            v[i] = 1.0;
            v
        };
        let mut worst = 0.0f64;
        for i in 0..d {
            for j in 0..d {
                for k in 0..d {
                    let (x, y, z) = (e(i), e(j), e(k));
                    let a = self.bracket(&x, &self.bracket(&y, &z));
                    let b = self.bracket(&y, &self.bracket(&z, &x));
                    let c = self.bracket(&z, &self.bracket(&x, &y));
                    for l in 0..d {
                        worst = worst.max((a[l] + b[l] + c[l]).abs());
                    }
                }
            }
        }
        worst
    }

    fn validate(&self) -> Result<()> {
        let d = self.d;
        for i in 0..d {
            for j in 0..d {
                for l in 0..d {
                    let v = self.get(i, j, l);
                    if (v + self.get(j, i, l)).abs() > STRUCTURE_TOL {
                        return Err(Error::invalid("structure constants not antisymmetric in (i, j)"));
                    }
                    if (v - self.get(j, l, i)).abs() > STRUCTURE_TOL {
                        return Err(Error::invalid(
                            "structure constants not totally antisymmetric (Q not bi-invariant)",
                        ));
                    }
                }
            }
        }
        let r = self.jacobi_residual();
        if r > STRUCTURE_TOL {
            return Err(Error::invalid(format!("Jacobi identity fails, residual {r:e}")));
        }
        Ok(())
    }
}

/// Left-invariant metric `g(U, V) = Q(PU, V)`.
#[derive(Debug, Clone, PartialEq)]
pub struct LeftInvariantMetric {
    brackets: StructureConstants,
    p: DMatrix<f64>,
}

impl LeftInvariantMetric {
    pub fn new(brackets: StructureConstants, p: DMatrix<f64>) -> Result<Self> {
        let d = brackets.dim();
        if p.nrows() != d || p.ncols() != d {
            return Err(Error::invalid(format!("P must be {d}×{d}")));
        }
        if (&p - p.transpose()).amax() > 1e-12 * (1.0 + p.amax()) {
            return Err(Error::invalid("P must be symmetric"));
        }
        let min = SymmetricEigen::new(p.clone()).eigenvalues.min();
        if !(min > 0.0) {
            return Err(Error::invalid(format!("P must be positive-definite, min eigenvalue {min:e}")));
        }
        Ok(LeftInvariantMetric { brackets, p })
    }

    pub fn bi_invariant(brackets: StructureConstants) -> Self {
        let d = brackets.dim();
        LeftInvariantMetric { brackets, p: DMatrix::identity(d, d) }
    }

    pub fn diagonal(brackets: StructureConstants, diag: &[f64]) -> Result<Self> {
        Self::new(brackets, DMatrix::from_diagonal(&DVector::from_column_slice(diag)))
    }

    /// Berger sphere: `su(2)` with `P = diag(λ, 1, 1)`.
    pub fn su2_berger(lambda: f64) -> Result<Self> {
        Self::diagonal(StructureConstants::su2(), &[lambda, 1.0, 1.0])
    }

    pub fn dim(&self) -> usize {
        self.brackets.dim()
    }

    pub fn brackets(&self) -> &StructureConstants {
        &self.brackets
    }

    pub fn tensor(&self) -> &DMatrix<f64> {
        &self.p
    }

    pub fn with_tensor(&self, p: DMatrix<f64>) -> Result<Self> {
        Self::new(self.brackets.clone(), p)
    }

    pub fn g(&self, x: &[f64], y: &[f64]) -> f64 {
        let d = self.dim();
        let mut s = 0.0;
        for i in 0..d {
            for j in 0..d {
                s += x[i] * self.p[(i, j)] * y[j];
            }
        }
        s
    }

    /// A `g`-orthonormal basis, as coordinate vectors.
    pub fn orthonormal_frame(&self) -> Vec<Vec<f64>> {
        let eig = SymmetricEigen::new(self.p.clone());
        (0..self.dim())
            .map(|a| {
                let s = eig.eigenvalues[a].sqrt();
                eig.eigenvectors.column(a).iter().map(|v| v / s).collect()
            })
            .collect()
    }

    /// `U(X, Y)` defined by `2g(U(X,Y), Z) = g([Z,X], Y) + g(X, [Z,Y])`.
    fn u_term(&self, x: &[f64], y: &[f64]) -> Vec<f64> {
        let d = self.dim();
        let mut rhs = DVector::zeros(d);
        let mut ez = vec![0.0; d];
        for z in 0..d {
            ez[z] = 1.0;
            rhs[z] = 0.5 * (self.g(&self.brackets.bracket(&ez, x), y) + self.g(x, &self.brackets.bracket(&ez, y)));
            ez[z] = 0.0;
        }
        let sol = self.p.clone().cholesky().expect("P positive-definite").solve(&rhs);
        sol.iter().copied().collect()
    }
}

/// Unnormalized sectional curvature `R(X, Y, Y, X)` of a left-invariant
/// metric.
pub fn sectional_left_invariant(m: &LeftInvariantMetric, x: &[f64], y: &[f64]) -> f64 {
    let b = &m.brackets;
    let xy = b.bracket(x, y);
    let uxy = m.u_term(x, y);
    let uxx = m.u_term(x, x);
    let uyy = m.u_term(y, y);
    -0.75 * m.g(&xy, &xy) - 0.5 * m.g(&b.bracket(x, &xy), y) - 0.5 * m.g(&b.bracket(y, &b.bracket(y, x)), x)
        + m.g(&uxy, &uxy)
        - m.g(&uxx, &uyy)
}

/// Scalar curvature from structure constants and `P`:
/// `-¼ Σ|[e_i,e_j]|² - ½ Σ B(e_i,e_i) - |H|²` over a `g`-orthonormal frame,
/// `B` the Killing form and `H = Σ tr(ad e_i) e_i`.
pub fn scal_left_invariant(m: &LeftInvariantMetric) -> f64 {
    let frame = m.orthonormal_frame();
    let b = &m.brackets;
    let mut s = 0.0;
    for ei in &frame {
        for ej in &frame {
            let br = b.bracket(ei, ej);
            s -= 0.25 * m.g(&br, &br);
        }
    }
    let d = m.dim();
    let mut h = vec![0.0; d];
    for ei in &frame {
        let ad = b.ad(ei);
        s -= 0.5 * (&ad * &ad).trace();
        let tr = ad.trace();
        for (hl, el) in h.iter_mut().zip(ei) {
            *hl += tr * el;
        }
    }
    s - m.g(&h, &h)
}
