//! Cheeger deformations `g_t` at a single point of a `G`-manifold.
//!
//! A point is described by [`OrbitData`]: the Lie algebra `𝔤 = 𝔪_x ⊕ 𝔤_x`
//! in a `Q`-orthonormal basis (the first `k` basis vectors span `𝔪_x`), the
//! orbit tensor `P` on `𝔪_x`, sectional curvature data and the one-form
//! derivatives `dw_Z` that the model supplies. Isotropy enters through
//! [`IsotropyData`].

use nalgebra::{DMatrix, DVector, SymmetricEigen};

use crate::error::{Error, Result};
use crate::models::{sectional_left_invariant, LeftInvariantMetric, StructureConstants};

/// Sectional curvature of the undeformed metric at the point.
#[derive(Debug, Clone, PartialEq)]
pub enum PointCurvature {
    /// The point is a group element and the metric is left-invariant.
    LeftInvariant,
    /// `K_g` between members of a `g`-orthonormal frame: normal `e_i`
    /// (`m×m`), normal against orbit `v_a/√λ_a` (`m×k`) and orbit against
    /// orbit (`k×k`). Requires a diagonal `P`.
    Tables { normal: DMatrix<f64>, mixed: DMatrix<f64>, orbit: DMatrix<f64> },
}

#[derive(Debug, Clone, PartialEq)]
pub struct OrbitData {
    brackets: StructureConstants,
    orbit_dim: usize,
    p: DMatrix<f64>,
    normal_dim: usize,
    curvature: PointCurvature,
    dw_normal: Vec<Vec<f64>>,
    dw_mixed: Vec<Vec<f64>>,
}

/// Differentials `ρ_{e_i}: 𝔤_x → ν_x`, one `m × dim 𝔤_x` matrix per
/// normal basis vector, in a `g`-orthonormal normal frame.
#[derive(Debug, Clone, PartialEq)]
pub struct IsotropyData {
    rho: Vec<DMatrix<f64>>,
}

/// A tangent vector split as normal part plus action field `U*`, `U ∈ 𝔪_x`
/// in `Q`-coordinates.
#[derive(Debug, Clone, PartialEq)]
pub struct SplitVector {
    pub normal: Vec<f64>,
    pub orbit: Vec<f64>,
}

impl SplitVector {
    pub fn new(normal: Vec<f64>, orbit: Vec<f64>) -> Self {
        SplitVector { normal, orbit }
    }
}

const SKEW_TOL: f64 = 1e-10;

impl IsotropyData {
    pub fn new(rho: Vec<DMatrix<f64>>) -> Result<Self> {
        if let Some(first) = rho.first() {
            let (m, h) = first.shape();
            if m != rho.len() {
                return Err(Error::invalid(format!(
                    "need one ρ map per normal vector: {} maps into a {m}-dimensional space",
                    rho.len()
                )));
            }
            if rho.iter().any(|r| r.shape() != (m, h)) {
                return Err(Error::invalid("ρ maps must share one shape"));
            }
        }
        Ok(IsotropyData { rho })
    }

    /// Isotropy algebra of dimension `iso_dim` acting trivially on an
    /// `m`-dimensional normal space.
    pub fn trivial(m: usize, iso_dim: usize) -> Self {
        IsotropyData { rho: vec![DMatrix::zeros(m, iso_dim); m] }
    }

    /// One-dimensional isotropy rotating the normal plane spanned by
    /// `e_a, e_b` at speed `s`: `ρ_{e_a} Z = s z e_b`, `ρ_{e_b} Z = -s z e_a`.
    pub fn rotation(m: usize, a: usize, b: usize, s: f64) -> Self {
        let mut rho = vec![DMatrix::zeros(m, 1); m];
        rho[a][(b, 0)] = s;
        rho[b][(a, 0)] = -s;
        IsotropyData { rho }
    }

    pub fn normal_dim(&self) -> usize {
        self.rho.len()
    }

    pub fn isotropy_dim(&self) -> usize {
        self.rho.first().map_or(0, |r| r.ncols())
    }

    pub fn rho(&self, i: usize) -> &DMatrix<f64> {
        &self.rho[i]
    }
}

impl OrbitData {
    /// A point of the group itself, `G` acting on `(G, g)` by left
    /// translations.
    pub fn homogeneous(metric: &LeftInvariantMetric) -> Self {
        let d = metric.dim();
        OrbitData {
            brackets: metric.brackets().clone(),
            orbit_dim: d,
            p: metric.tensor().clone(),
            normal_dim: 0,
            curvature: PointCurvature::LeftInvariant,
            dw_normal: Vec::new(),
            dw_mixed: Vec::new(),
        }
    }

    /// Point described by sectional tables. `p_diag` is the diagonal of `P`
    /// on `𝔪_x`, which spans the first `p_diag.len()` basis vectors of `𝔤`.
    pub fn from_tables(
        brackets: StructureConstants,
        p_diag: &[f64],
        normal: DMatrix<f64>,
        mixed: DMatrix<f64>,
        orbit: DMatrix<f64>,
    ) -> Result<Self> {
        let k = p_diag.len();
        let m = normal.nrows();
        if k > brackets.dim() {
            return Err(Error::invalid("orbit dimension exceeds dim 𝔤"));
        }
        if normal.ncols() != m || mixed.shape() != (m, k) || orbit.shape() != (k, k) {
            return Err(Error::invalid(format!("sectional tables must be {m}×{m}, {m}×{k}, {k}×{k}")));
        }
        for t in [&normal, &orbit] {
            if (t - t.transpose()).amax() > 1e-12 * (1.0 + t.amax()) {
                return Err(Error::invalid("sectional tables must be symmetric"));
            }
            if t.diagonal().amax() != 0.0 {
                return Err(Error::invalid("sectional tables must have zero diagonal"));
            }
        }
        if p_diag.iter().any(|l| !(*l > 0.0)) {
            return Err(Error::invalid("P must be positive-definite"));
        }
        let d = brackets.dim();
        Ok(OrbitData {
            brackets,
            orbit_dim: k,
            p: DMatrix::from_diagonal(&DVector::from_column_slice(p_diag)),
            normal_dim: m,
            curvature: PointCurvature::Tables { normal, mixed, orbit },
            dw_normal: vec![vec![0.0; d]; m * m],
            dw_mixed: vec![vec![0.0; d]; m * k],
        })
    }

    /// Model-supplied `dw_Z(e_i, e_j)` for `Z` ranging over `𝔤`, as
    /// `Q`-vectors indexed `[i * m + j]`. Must be antisymmetric in `(i, j)`.
    /// The isotropy contribution is added separately from [`IsotropyData`].
    pub fn with_dw_normal(mut self, dw: Vec<Vec<f64>>) -> Result<Self> {
        let (m, d) = (self.normal_dim, self.brackets.dim());
        if dw.len() != m * m || dw.iter().any(|v| v.len() != d) {
            return Err(Error::invalid("dw_normal must hold m² vectors of length dim 𝔤"));
        }
        for i in 0..m {
            for j in 0..m {
                for z in 0..d {
                    if (dw[i * m + j][z] + dw[j * m + i][z]).abs() > SKEW_TOL {
                        return Err(Error::invalid("dw_normal must be antisymmetric"));
                    }
                }
            }
        }
        self.dw_normal = dw;
        Ok(self)
    }

    /// Model-supplied `dw_Z(e_i, v_a*)` indexed `[i * k + a]`.
    pub fn with_dw_mixed(mut self, dw: Vec<Vec<f64>>) -> Result<Self> {
        let (m, k, d) = (self.normal_dim, self.orbit_dim, self.brackets.dim());
        if dw.len() != m * k || dw.iter().any(|v| v.len() != d) {
            return Err(Error::invalid("dw_mixed must hold m·k vectors of length dim 𝔤"));
        }
        self.dw_mixed = dw;
        Ok(self)
    }

    pub fn brackets(&self) -> &StructureConstants {
        &self.brackets
    }

    pub fn orbit_dim(&self) -> usize {
        self.orbit_dim
    }

    pub fn normal_dim(&self) -> usize {
        self.normal_dim
    }

    pub fn isotropy_dim(&self) -> usize {
        self.brackets.dim() - self.orbit_dim
    }

    pub fn tensor(&self) -> &DMatrix<f64> {
        &self.p
    }

    fn embed(&self, u: &[f64]) -> Vec<f64> {
        let mut v = vec![0.0; self.brackets.dim()];
        v[..u.len()].copy_from_slice(u);
        v
    }

    /// `P` applied to a vector of `𝔤`, extended by zero on `𝔤_x`.
    fn p_full(&self, z: &[f64]) -> Vec<f64> {
        let k = self.orbit_dim;
        let pz = &self.p * DVector::from_column_slice(&z[..k]);
        self.embed(pz.as_slice())
    }

    fn check_isotropy(&self, iso: Option<&IsotropyData>) -> Result<()> {
        let Some(iso) = iso else { return Ok(()) };
        let (m, h) = (self.normal_dim, self.isotropy_dim());
        if iso.normal_dim() != m || (m > 0 && iso.isotropy_dim() != h) {
            return Err(Error::invalid(format!(
                "isotropy data has shape {}×{}, point needs {m}×{h}",
                iso.normal_dim(),
                iso.isotropy_dim()
            )));
        }
        // dw_Z(e_i, e_j) = g(e_i, ρ_{e_j} Z) has to be a two-form
        for i in 0..m {
            for j in 0..m {
                for z in 0..h {
                    if (iso.rho[j][(i, z)] + iso.rho[i][(j, z)]).abs() > SKEW_TOL {
                        return Err(Error::invalid("isotropy data inconsistent: g(e_i, ρ_{e_j} Z) not antisymmetric"));
                    }
                }
            }
        }
        Ok(())
    }
}

/// Eigenvalues of `P` ascending and a `Q`-orthonormal eigenbasis (columns).
pub fn p_eigendecomposition(o: &OrbitData) -> Result<(Vec<f64>, DMatrix<f64>)> {
    let k = o.orbit_dim;
    let p = &o.p;
    let diagonal = (0..k).all(|i| (0..k).all(|j| i == j || p[(i, j)] == 0.0));
    let (vals, vecs) = if diagonal {
        (p.diagonal(), DMatrix::identity(k, k))
    } else {
        let e = SymmetricEigen::new(p.clone());
        (e.eigenvalues, e.eigenvectors)
    };
    let mut order: Vec<usize> = (0..k).collect();
    order.sort_by(|a, b| vals[*a].total_cmp(&vals[*b]));
    let lambdas: Vec<f64> = order.iter().map(|&i| vals[i]).collect();
    if let Some(bad) = lambdas.iter().find(|l| !(**l > 0.0)) {
        return Err(Error::invalid(format!("P has non-positive eigenvalue {bad:e}")));
    }
    let basis = DMatrix::from_fn(k, k, |r, c| vecs[(r, order[c])]);
    Ok((lambdas, basis))
}

/// `C_t`: identity on the normal part, `(1 + tP)^{-1}` on the orbit part.
pub fn c_t_apply(o: &OrbitData, t: f64, x: &SplitVector) -> Result<SplitVector> {
    check_time(t)?;
    let k = o.orbit_dim;
    let a = DMatrix::identity(k, k) + &o.p * t;
    let u = a
        .lu()
        .solve(&DVector::from_column_slice(&x.orbit))
        .ok_or_else(|| Error::numerical("c_t_apply", "1 + tP singular"))?;
    Ok(SplitVector { normal: x.normal.clone(), orbit: u.as_slice().to_vec() })
}

fn check_time(t: f64) -> Result<()> {
    if t >= 0.0 && t.is_finite() {
        Ok(())
    } else {
        Err(Error::invalid(format!("Cheeger time must be >= 0, got {t}")))
    }
}

/// The vector `a` with `dw_Z(X̄, Ȳ) + (t/2) Q([PU, PV], Z) = Q(a, Z)`.
fn z_numerator(o: &OrbitData, iso: Option<&IsotropyData>, t: f64, x: &SplitVector, y: &SplitVector) -> Vec<f64> {
    let d = o.brackets.dim();
    let (m, k) = (o.normal_dim, o.orbit_dim);
    let mut a = vec![0.0; d];

    for i in 0..m {
        for j in 0..m {
            let c = x.normal[i] * y.normal[j];
            if c == 0.0 {
                continue;
            }
            for (al, dw) in a.iter_mut().zip(&o.dw_normal[i * m + j]) {
                *al += c * dw;
            }
            if let Some(iso) = iso {
                let rho = &iso.rho[j];
                for z in 0..rho.ncols() {
                    a[k + z] += c * rho[(i, z)];
                }
            }
        }
    }
    for i in 0..m {
        for b in 0..k {
            let c = x.normal[i] * y.orbit[b] - y.normal[i] * x.orbit[b];
            if c != 0.0 {
                for (al, dw) in a.iter_mut().zip(&o.dw_mixed[i * k + b]) {
                    *al += c * dw;
                }
            }
        }
    }

    let u = o.embed(&x.orbit);
    let v = o.embed(&y.orbit);
    let pu = o.p_full(&u);
    let pv = o.p_full(&v);
    let br = &o.brackets;
    let t1 = br.bracket(&pu, &v);
    let t2 = br.bracket(&u, &pv);
    let t3 = o.p_full(&br.bracket(&u, &v));
    let t4 = br.bracket(&pu, &pv);
    for l in 0..d {
        a[l] += 0.5 * (t1[l] + t2[l] - t3[l]) + 0.5 * t * t4[l];
    }
    a
}

/// `(tG + 1)^{-1} a` where `G` is `P` on `𝔪_x` and zero on `𝔤_x`.
fn apply_denominator_inverse(o: &OrbitData, t: f64, a: &[f64]) -> Vec<f64> {
    let k = o.orbit_dim;
    let mut out = a.to_vec();
    if k > 0 {
        let b = DMatrix::identity(k, k) + &o.p * t;
        let sol = b.cholesky().expect("1 + tP is positive-definite").solve(&DVector::from_column_slice(&a[..k]));
        out[..k].copy_from_slice(sol.as_slice());
    }
    out
}

/// The maximum of the `z_t` quotient and a unit `Z` attaining it.
///
/// On the unit sphere the quotient is `(a·Z)² / Zᵀ(tG + 1)Z`, a ratio of a
/// rank-one form and a positive-definite one, so the generalized eigenvalue
/// problem has the single nonzero root `aᵀ(tG + 1)^{-1}a` with eigenvector
/// `(tG + 1)^{-1}a`.
pub fn z_t_maximizer(
    o: &OrbitData,
    iso: Option<&IsotropyData>,
    t: f64,
    x: &SplitVector,
    y: &SplitVector,
) -> Result<(f64, Vec<f64>)> {
    check_time(t)?;
    check_split(o, x)?;
    check_split(o, y)?;
    o.check_isotropy(iso)?;
    let a = z_numerator(o, iso, t, x, y);
    let w = apply_denominator_inverse(o, t, &a);
    let q: f64 = a.iter().zip(&w).map(|(p, q)| p * q).sum();
    let norm = w.iter().map(|v| v * v).sum::<f64>().sqrt();
    let z = if norm > 0.0 {
        w.iter().map(|v| v / norm).collect()
    } else {
        let mut e = vec![0.0; a.len()];
        if let Some(first) = e.first_mut() {
            *first = 1.0;
        }
        e
    };
    Ok((3.0 * t * q, z))
}

/// `z_t(X̄, Ȳ) = 3t max_{|Z|_Q = 1} {dw_Z(X̄,Ȳ) + (t/2)Q([PU,PV],Z)}² / (t g(Z*,Z*) + 1)`.
pub fn z_t_term(o: &OrbitData, iso: Option<&IsotropyData>, t: f64, x: &SplitVector, y: &SplitVector) -> Result<f64> {
    z_t_maximizer(o, iso, t, x, y).map(|(v, _)| v)
}

/// The quotient inside the `z_t` maximum at a given `Z`, times `3t`.
pub fn z_t_quotient(
    o: &OrbitData,
    iso: Option<&IsotropyData>,
    t: f64,
    x: &SplitVector,
    y: &SplitVector,
    z: &[f64],
) -> f64 {
    let a = z_numerator(o, iso, t, x, y);
    let num: f64 = a.iter().zip(z).map(|(p, q)| p * q).sum();
    let k = o.orbit_dim;
    let zm = DVector::from_column_slice(&z[..k]);
    let gzz = (zm.transpose() * &o.p * &zm)[(0, 0)];
    let zz: f64 = z.iter().map(|v| v * v).sum();
    3.0 * t * num * num / (t * gzz + zz)
}

fn check_split(o: &OrbitData, x: &SplitVector) -> Result<()> {
    if x.normal.len() != o.normal_dim || x.orbit.len() != o.orbit_dim {
        return Err(Error::invalid(format!(
            "tangent vector has parts ({}, {}), point needs ({}, {})",
            x.normal.len(),
            x.orbit.len(),
            o.normal_dim,
            o.orbit_dim
        )));
    }
    Ok(())
}

/// Scalar curvature of the Cheeger deformation `g_t` at the point.
pub fn scal_cheeger(o: &OrbitData, iso: Option<&IsotropyData>, t: f64) -> Result<f64> {
    check_time(t)?;
    o.check_isotropy(iso)?;
    let (m, k) = (o.normal_dim, o.orbit_dim);
    let (lambdas, basis) = p_eigendecomposition(o)?;

    // frame: normal e_i, then C_t^{1/2} of the g-orthonormal orbit frame
    let mut frame = Vec::with_capacity(m + k);
    for i in 0..m {
        let mut e = vec![0.0; m];
        e[i] = 1.0;
        frame.push(SplitVector::new(e, vec![0.0; k]));
    }
    for (a, &l) in lambdas.iter().enumerate() {
        let s = 1.0 / (l * (1.0 + t * l)).sqrt();
        let u = basis.column(a).iter().map(|v| v * s).collect();
        frame.push(SplitVector::new(vec![0.0; m], u));
    }

    let first = match &o.curvature {
        PointCurvature::LeftInvariant => {
            let metric = LeftInvariantMetric::new(o.brackets.clone(), o.p.clone())?;
            let mut s = 0.0;
            for x in &frame {
                for y in &frame {
                    s += sectional_left_invariant(&metric, &x.orbit, &y.orbit);
                }
            }
            s
        }
        PointCurvature::Tables { normal, mixed, orbit } => {
            // basis vectors are coordinate vectors since P is diagonal
            let coord: Vec<usize> = (0..k).map(|a| basis.column(a).iamax()).collect();
            let shrink: Vec<f64> = lambdas.iter().map(|l| 1.0 / (1.0 + t * l)).collect();
            let mut s = normal.sum();
            for i in 0..m {
                for a in 0..k {
                    s += 2.0 * mixed[(i, coord[a])] * shrink[a];
                }
            }
            for a in 0..k {
                for b in 0..k {
                    s += orbit[(coord[a], coord[b])] * shrink[a] * shrink[b];
                }
            }
            s
        }
    };

    let mut second = 0.0;
    for x in &frame {
        for y in &frame {
            second += z_t_term(o, iso, t, x, y)?;
        }
    }

    let mut third = 0.0;
    for a in 0..k {
        for b in 0..k {
            let (la, lb) = (lambdas[a], lambdas[b]);
            let va = o.embed(basis.column(a).as_slice());
            let vb = o.embed(basis.column(b).as_slice());
            let br = o.brackets.bracket(&va, &vb);
            let nrm: f64 = br.iter().map(|v| v * v).sum();
            third += la * lb * t.powi(3) / ((1.0 + t * la) * (1.0 + t * lb)) * 0.25 * nrm;
        }
    }
    Ok(first + second + third)
}

/// `¼ Σ_{i,j} |[v_i, v_j]|_Q²` over a `Q`-orthonormal basis of `𝔪_x`.
pub fn scal_bar(o: &OrbitData) -> f64 {
    let k = o.orbit_dim;
    let d = o.brackets.dim();
    let mut s = 0.0;
    for a in 0..k {
        for b in 0..k {
            let mut va = vec![0.0; d];
            let mut vb = vec![0.0; d];
            va[a] = 1.0;
            vb[b] = 1.0;
            s += o.brackets.bracket(&va, &vb).iter().map(|v| v * v).sum::<f64>();
        }
    }
    0.25 * s
}

/// `ξ(ρ) = Σ_{i,j} |e_j^{H_i}|⁴ / |ρ_{e_i}^{-1} e_j^{H_i}|_Q²`, with `H_i` the
/// image of `ρ_{e_i}` and the inverse taken on `H_i` (pseudo-inverse).
pub fn xi(iso: &IsotropyData) -> f64 {
    let m = iso.normal_dim();
    let mut total = 0.0;
    for rho in &iso.rho {
        if rho.ncols() == 0 {
            continue;
        }
        let svd = rho.clone().svd(true, true);
        let (u, vt) = (svd.u.expect("u requested"), svd.v_t.expect("v_t requested"));
        let smax = svd.singular_values.max();
        let tol = 1e-12 * smax.max(f64::MIN_POSITIVE);
        let ranks: Vec<usize> = (0..svd.singular_values.len()).filter(|&r| svd.singular_values[r] > tol).collect();
        for j in 0..m {
            // e_j projected onto H and pulled back by the pseudo-inverse
            let mut proj_norm2 = 0.0;
            let mut pre = DVector::<f64>::zeros(rho.ncols());
            for &r in &ranks {
                let c = u[(j, r)];
                proj_norm2 += c * c;
                pre += vt.row(r).transpose() * (c / svd.singular_values[r]);
            }
            let pre2 = pre.norm_squared();
            if proj_norm2 > 0.0 && pre2 > 0.0 {
                total += proj_norm2 * proj_norm2 / pre2;
            }
        }
    }
    total
}

/// Exact value of `lim (1/t) scal_{g_t}` at the point: the normal
/// homogeneous scalar curvature `¼Σ|[v_i,v_j]_𝔪|² + Σ|[v_i,v_j]_{𝔤_x}|²`
/// plus `3 Σ_{i,j} |ρ_{e_j}ᵀ e_i|²`. Agrees with `scal_bar + 3ξ` when
/// `[𝔪_x, 𝔪_x] ⊂ 𝔪_x` and every `ρ_{e_j}` is conformal on its image.
pub fn asymptotic_slope(o: &OrbitData, iso: Option<&IsotropyData>) -> Result<f64> {
    o.check_isotropy(iso)?;
    let k = o.orbit_dim;
    let d = o.brackets.dim();
    let mut s = 0.0;
    for a in 0..k {
        for b in 0..k {
            let mut va = vec![0.0; d];
            let mut vb = vec![0.0; d];
            va[a] = 1.0;
            vb[b] = 1.0;
            let br = o.brackets.bracket(&va, &vb);
            let m_part: f64 = br[..k].iter().map(|v| v * v).sum();
            let h_part: f64 = br[k..].iter().map(|v| v * v).sum();
            s += 0.25 * m_part + h_part;
        }
    }
    if let Some(iso) = iso {
        s += 3.0 * iso.rho.iter().map(|r| r.norm_squared()).sum::<f64>();
    }
    Ok(s)
}

/// `max_x (scal_bar + 3ξ) / min_x (scal_bar + 3ξ)`.
pub fn pinching_limit(points: &[(OrbitData, Option<IsotropyData>)]) -> Result<f64> {
    if points.is_empty() {
        return Err(Error::invalid("pinching limit needs at least one point"));
    }
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for (o, iso) in points {
        if o.brackets.is_abelian() {
            return Err(Error::precondition(
                "theorem4.8",
                "abelian symmetry algebra: Cheeger deformation does not pinch",
            ));
        }
        o.check_isotropy(iso.as_ref())?;
        let v = scal_bar(o) + 3.0 * iso.as_ref().map_or(0.0, xi);
        lo = lo.min(v);
        hi = hi.max(v);
    }
    if !(lo > 0.0) {
        return Err(Error::precondition(
            "prop5.1",
            format!("limit denominator min(scal_bar + 3ξ) = {lo:e} is not positive"),
        ));
    }
    Ok(hi / lo)
}

/// Left-invariant metric of `P_t = (1 + tP)^{-1} P`.
pub fn deformed_group_metric(m: &LeftInvariantMetric, t: f64) -> Result<LeftInvariantMetric> {
    check_time(t)?;
    let d = m.dim();
    let p = m.tensor();
    let a = DMatrix::identity(d, d) + p * t;
    let pt = a.lu().solve(p).ok_or_else(|| Error::numerical("deformed_group_metric", "1 + tP singular"))?;
    let sym = (&pt + pt.transpose()) * 0.5;
    m.with_tensor(sym)
}

/// Smallest grid time after which `scal_cheeger` stays positive on a
/// logarithmic grid up to `t_max`; `None` if it is not positive at `t_max`.
pub fn positivity_onset(o: &OrbitData, iso: Option<&IsotropyData>, t_max: f64, samples: usize) -> Result<Option<f64>> {
    check_time(t_max)?;
    let samples = samples.max(2);
    let (lo, hi) = (1e-3f64.ln(), t_max.max(2e-3).ln());
    let mut grid = vec![0.0];
    grid.extend((0..samples).map(|i| (lo + (hi - lo) * i as f64 / (samples - 1) as f64).exp()));
    let mut onset = None;
    for &t in &grid {
        let s = scal_cheeger(o, iso, t)?;
        if s > 0.0 {
            onset.get_or_insert(t);
        } else {
            onset = None;
        }
    }
    Ok(onset)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::models::scal_left_invariant;

    fn su2(p: &[f64]) -> LeftInvariantMetric {
        LeftInvariantMetric::diagonal(StructureConstants::su2(), p).unwrap()
    }

    #[test]
    fn eigendecomposition_sorted() {
        let o = OrbitData::homogeneous(&su2(&[2.0, 0.5, 1.0]));
        let (l, v) = p_eigendecomposition(&o).unwrap();
        assert_eq!(l, vec![0.5, 1.0, 2.0]);
        assert_eq!(v[(1, 0)], 1.0);
    }

    #[test]
    fn c_t_halves_at_unit_time() {
        let o = OrbitData::homogeneous(&su2(&[1.0, 1.0, 1.0]));
        let x = SplitVector::new(vec![], vec![1.0, -2.0, 4.0]);
        let y = c_t_apply(&o, 1.0, &x).unwrap();
        assert_eq!(y.orbit, vec![0.5, -1.0, 2.0]);
        assert_eq!(c_t_apply(&o, 0.0, &x).unwrap(), x);
    }

    #[test]
    fn z_vanishes_at_zero_time() {
        let o = OrbitData::homogeneous(&su2(&[0.7, 1.3, 2.0]));
        let x = SplitVector::new(vec![], vec![1.0, 0.2, -0.4]);
        let y = SplitVector::new(vec![], vec![0.3, -1.0, 0.5]);
        assert_eq!(z_t_term(&o, None, 0.0, &x, &y).unwrap(), 0.0);
        let z = z_t_term(&o, None, 2.0, &x, &y).unwrap();
        assert!(z > 0.0);
        assert!((z - z_t_term(&o, None, 2.0, &y, &x).unwrap()).abs() < 1e-12 * z);
    }

    #[test]
    fn abelian_z_vanishes() {
        let m = LeftInvariantMetric::diagonal(StructureConstants::abelian(3), &[0.5, 1.0, 3.0]).unwrap();
        let o = OrbitData::homogeneous(&m);
        let x = SplitVector::new(vec![], vec![1.0, 0.2, -0.4]);
        let y = SplitVector::new(vec![], vec![0.3, -1.0, 0.5]);
        assert_eq!(z_t_term(&o, None, 5.0, &x, &y).unwrap(), 0.0);
        let s0 = scal_cheeger(&o, None, 0.0).unwrap();
        assert_eq!(s0, 0.0);
        assert_eq!(scal_cheeger(&o, None, 100.0).unwrap(), 0.0);
    }

    #[test]
    fn undeformed_scal() {
        let m = su2(&[0.5, 1.0, 2.0]);
        let s = scal_cheeger(&OrbitData::homogeneous(&m), None, 0.0).unwrap();
        assert!((s - scal_left_invariant(&m)).abs() < 1e-12);
    }

    #[test]
    fn bi_invariant_matches_deformed_metric() {
        let m = su2(&[1.0, 1.0, 1.0]);
        let o = OrbitData::homogeneous(&m);
        for t in [0.0, 0.1, 1.0, 10.0, 100.0] {
            let a = scal_cheeger(&o, None, t).unwrap();
            let b = scal_left_invariant(&deformed_group_metric(&m, t).unwrap());
            assert!((a - b).abs() < 1e-8 * b.abs(), "t = {t}: {a} vs {b}");
        }
    }

    #[test]
    fn deformed_eigenvalues() {
        let m = su2(&[1.0, 1.0, 1.0]);
        let d = deformed_group_metric(&m, 1.0).unwrap();
        assert!((d.tensor() - DMatrix::identity(3, 3) * 0.5).amax() < 1e-15);
        assert_eq!(deformed_group_metric(&m, 0.0).unwrap(), m);
    }

    #[test]
    fn scal_bar_values() {
        assert!((scal_bar(&OrbitData::homogeneous(&su2(&[1.0, 1.0, 1.0]))) - 1.5).abs() < 1e-15);
        assert_eq!(
            scal_bar(&OrbitData::homogeneous(&su2(&[0.5, 1.0, 2.0]))),
            scal_bar(&OrbitData::homogeneous(&su2(&[1.0, 1.0, 1.0])))
        );
        let ab = LeftInvariantMetric::bi_invariant(StructureConstants::abelian(2));
        assert_eq!(scal_bar(&OrbitData::homogeneous(&ab)), 0.0);
    }

    #[test]
    fn xi_values() {
        assert_eq!(xi(&IsotropyData::trivial(3, 1)), 0.0);
        let mut rho = vec![DMatrix::zeros(2, 1); 2];
        rho[0][(1, 0)] = 1.0;
        let one = IsotropyData::new(rho).unwrap();
        assert!((xi(&one) - 1.0).abs() < 1e-14);
        let s = 1.7;
        assert!((xi(&IsotropyData::rotation(2, 0, 1, s)) - 2.0 * s * s).abs() < 1e-12);
    }

    #[test]
    fn pinching_of_two_points() {
        let g = StructureConstants::su2().direct_sum(&StructureConstants::abelian(1));
        let tables = |m: usize| {
            OrbitData::from_tables(
                g.clone(),
                &[1.0, 1.0, 1.0],
                DMatrix::zeros(m, m),
                DMatrix::zeros(m, 3),
                DMatrix::zeros(3, 3),
            )
            .unwrap()
        };
        let free = (tables(2), Some(IsotropyData::trivial(2, 1)));
        let s = 0.5;
        let singular = (tables(2), Some(IsotropyData::rotation(2, 0, 1, s)));
        // ξ = 2s² = 1/2, so (3/2 + 3/2) / (3/2) = 2
        let r = pinching_limit(&[free.clone(), singular]).unwrap();
        assert!((r - 2.0).abs() < 1e-12);
        assert_eq!(pinching_limit(&[free.clone(), free]).unwrap(), 1.0);
    }

    #[test]
    fn abelian_pinching_rejected() {
        let ab = LeftInvariantMetric::bi_invariant(StructureConstants::abelian(2));
        let r = pinching_limit(&[(OrbitData::homogeneous(&ab), None)]);
        assert!(matches!(r, Err(Error::Precondition { .. })));
    }

    #[test]
    fn inconsistent_isotropy_rejected() {
        let g = StructureConstants::su2().direct_sum(&StructureConstants::abelian(1));
        let o = OrbitData::from_tables(
            g,
            &[1.0, 1.0, 1.0],
            DMatrix::zeros(2, 2),
            DMatrix::zeros(2, 3),
            DMatrix::zeros(3, 3),
        )
        .unwrap();
        let mut rho = vec![DMatrix::zeros(2, 1); 2];
        rho[0][(1, 0)] = 1.0;
        rho[1][(0, 0)] = 1.0;
        let iso = IsotropyData::new(rho).unwrap();
        assert!(scal_cheeger(&o, Some(&iso), 1.0).is_err());
    }
}
