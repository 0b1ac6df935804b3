//! Prescribing scalar curvature on the warped family by the direct method:
//! the operator `F(g) = scal_g`, its linearization `A`, the adjoint `A*`, a
//! Newton solve of `F(g + A*u) = K`, a one-dimensional approximation by
//! circle diffeomorphisms and the assembled pipeline.

mod approx;
mod pipeline;

pub use approx::{approximate_at_nodes, approximate_by_diffeo, ApproxProblem, Approximation, Diffeo1D};
pub use pipeline::{full_prescribe, pinching_check, PrescribeConfig, Prescription};

use nalgebra::{DMatrix, DVector};

use crate::dual::Dual;
use crate::error::{check_len, Error, Result};
use crate::models::{scal_diagonal, scal_stencil, scal_warped, WarpedProductMetric};
use crate::quotient_geometry::DiscreteFunction;

/// Invariant diagonal 2-tensor `h = a dr² + b f² g_F`.
#[derive(Debug, Clone, PartialEq)]
pub struct MetricPerturbation {
    pub a: DiscreteFunction,
    pub b: DiscreteFunction,
}

impl MetricPerturbation {
    pub fn new(a: DiscreteFunction, b: DiscreteFunction) -> Result<Self> {
        check_len(a.len(), b.len())?;
        Ok(MetricPerturbation { a, b })
    }

    pub fn zeros(n: usize) -> Self {
        MetricPerturbation { a: vec![0.0; n], b: vec![0.0; n] }
    }

    pub fn len(&self) -> usize {
        self.a.len()
    }

    pub fn is_empty(&self) -> bool {
        self.a.is_empty()
    }

    pub fn scaled(&self, t: f64) -> Self {
        MetricPerturbation { a: self.a.iter().map(|v| v * t).collect(), b: self.b.iter().map(|v| v * t).collect() }
    }

    pub fn add(&self, o: &MetricPerturbation) -> Result<Self> {
        check_len(self.len(), o.len())?;
        Ok(MetricPerturbation {
            a: self.a.iter().zip(&o.a).map(|(x, y)| x + y).collect(),
            b: self.b.iter().zip(&o.b).map(|(x, y)| x + y).collect(),
        })
    }

    pub fn sup_norm(&self) -> f64 {
        self.a.iter().chain(&self.b).fold(0.0, |m, v| m.max(v.abs()))
    }
}

/// `p² dr² + q² g_F` sampled on the uniform circle mesh of a warped product.
/// Every metric `g + h` on the family has this form.
#[derive(Debug, Clone, PartialEq)]
pub struct DiagonalMetric {
    pub length: f64,
    pub k: usize,
    pub c_f: f64,
    pub p: DiscreteFunction,
    pub q: DiscreteFunction,
}

impl DiagonalMetric {
    pub fn from_warped(m: &WarpedProductMetric) -> Self {
        DiagonalMetric {
            length: m.mesh().length(),
            k: m.fiber_dim(),
            c_f: m.fiber_scal(),
            p: vec![1.0; m.len()],
            q: m.warping().to_vec(),
        }
    }

    /// `g + h`, failing when it leaves the positive cone.
    pub fn perturbed(m: &WarpedProductMetric, h: &MetricPerturbation) -> Result<Self> {
        check_len(m.len(), h.len())?;
        let mut out = Self::from_warped(m);
        for j in 0..m.len() {
            let (ea, eb) = (1.0 + h.a[j], 1.0 + h.b[j]);
            if !(ea > 0.0 && eb > 0.0) {
                return Err(Error::numerical(
                    "metric perturbation",
                    format!("g + h is not positive-definite at node {j} (1+a = {ea:e}, 1+b = {eb:e})"),
                ));
            }
            out.p[j] = ea.sqrt();
            out.q[j] *= eb.sqrt();
        }
        Ok(out)
    }

    pub fn len(&self) -> usize {
        self.p.len()
    }

    pub fn is_empty(&self) -> bool {
        self.p.is_empty()
    }

    pub fn spacing(&self) -> f64 {
        self.length / self.len() as f64
    }

    /// Homothety `c·g`.
    pub fn scaled(&self, c: f64) -> Self {
        let s = c.sqrt();
        DiagonalMetric {
            p: self.p.iter().map(|v| v * s).collect(),
            q: self.q.iter().map(|v| v * s).collect(),
            ..self.clone()
        }
    }

    pub fn scal(&self) -> DiscreteFunction {
        scal_diagonal(self.spacing(), self.k, self.c_f, &self.p, &self.q).expect("lengths agree")
    }
}

pub fn scal_operator_f(metric: &WarpedProductMetric) -> DiscreteFunction {
    scal_warped(metric)
}

/// `F(g + h)`.
pub fn scal_perturbed(metric: &WarpedProductMetric, h: &MetricPerturbation) -> Result<DiscreteFunction> {
    Ok(DiagonalMetric::perturbed(metric, h)?.scal())
}

/// Tensor inner product induced by `g`: `Σ μ_j (a a′ + k b b′)`.
pub fn tensor_inner(metric: &WarpedProductMetric, h1: &MetricPerturbation, h2: &MetricPerturbation) -> Result<f64> {
    check_len(metric.len(), h1.len())?;
    check_len(metric.len(), h2.len())?;
    let k = metric.fiber_dim() as f64;
    Ok(metric.mesh().masses().iter().enumerate().map(|(j, mu)| mu * (h1.a[j] * h2.a[j] + k * h1.b[j] * h2.b[j])).sum())
}

/// Central difference of `F` along `h`, extrapolated once.
pub fn apply_a(metric: &WarpedProductMetric, h: &MetricPerturbation) -> Result<DiscreteFunction> {
    check_len(metric.len(), h.len())?;
    let norm = h.sup_norm();
    if norm == 0.0 {
        return Ok(vec![0.0; metric.len()]);
    }
    let tau = 1e-3 / norm;
    let diff = |t: f64| -> Result<Vec<f64>> {
        let plus = scal_perturbed(metric, &h.scaled(t))?;
        let minus = scal_perturbed(metric, &h.scaled(-t))?;
        Ok(plus.iter().zip(&minus).map(|(p, m)| (p - m) / (2.0 * t)).collect())
    };
    let coarse = diff(tau)?;
    let fine = diff(0.5 * tau)?;
    Ok(fine.iter().zip(&coarse).map(|(f, c)| (4.0 * f - c) / 3.0).collect())
}

/// Exact Jacobian of `F` at `p² dr² + q² g_F` with respect to the
/// coefficients `(a, b)` of `(1+a) dr² + (1+b) f² g_F`, where `f` is the
/// reference warping.
pub fn jacobian(m: &DiagonalMetric, f: &[f64]) -> Result<(DMatrix<f64>, DMatrix<f64>)> {
    let n = m.len();
    check_len(n, m.q.len())?;
    check_len(n, f.len())?;
    let h = m.spacing();
    let mut ja = DMatrix::zeros(n, n);
    let mut jb = DMatrix::zeros(n, n);
    for j in 0..n {
        let idx = [(j + n - 1) % n, j, (j + 1) % n];
        let consts = |v: &[f64]| idx.map(|i| Dual { v: v[i], d: 0.0 });
        for (slot, &i) in idx.iter().enumerate() {
            // dp/da = 1/(2p), dq/db = f²/(2q)
            let mut p = consts(&m.p);
            p[slot].d = 0.5 / m.p[i];
            ja[(j, i)] += scal_stencil(p, consts(&m.q), h, m.k, m.c_f).d;
            let mut q = consts(&m.q);
            q[slot].d = 0.5 * f[i] * f[i] / m.q[i];
            jb[(j, i)] += scal_stencil(consts(&m.p), q, h, m.k, m.c_f).d;
        }
    }
    Ok((ja, jb))
}

/// Matrix of `A*` at `g`, functions to stacked `(a, b)` coefficients: the
/// transpose of the Jacobian for the weighted inner products.
pub fn adjoint_matrix(metric: &WarpedProductMetric) -> Result<DMatrix<f64>> {
    let n = metric.len();
    let (ja, jb) = jacobian(&DiagonalMetric::from_warped(metric), metric.warping())?;
    let mu = metric.mesh().masses();
    let k = metric.fiber_dim() as f64;
    let mut out = DMatrix::zeros(2 * n, n);
    for m in 0..n {
        for j in 0..n {
            out[(m, j)] = mu[j] * ja[(j, m)] / mu[m];
            out[(n + m, j)] = mu[j] * jb[(j, m)] / (k * mu[m]);
        }
    }
    Ok(out)
}

pub fn apply_a_star(metric: &WarpedProductMetric, u: &[f64]) -> Result<MetricPerturbation> {
    let n = metric.len();
    check_len(n, u.len())?;
    let v = adjoint_matrix(metric)? * DVector::from_column_slice(u);
    Ok(MetricPerturbation { a: v.rows(0, n).iter().copied().collect(), b: v.rows(n, n).iter().copied().collect() })
}

/// Smallest singular value of `A*` between the weighted function space and
/// the tensor space.
pub fn kernel_min_singular(metric: &WarpedProductMetric) -> Result<f64> {
    let n = metric.len();
    let mut m = adjoint_matrix(metric)?;
    let mu = metric.mesh().masses();
    let k = metric.fiber_dim() as f64;
    for r in 0..n {
        for j in 0..n {
            let col = 1.0 / mu[j].sqrt();
            m[(r, j)] *= mu[r].sqrt() * col;
            m[(n + r, j)] *= (k * mu[r]).sqrt() * col;
        }
    }
    let sv = m
        .try_svd(false, false, f64::EPSILON, 10_000)
        .ok_or_else(|| Error::numerical("kernel_min_singular", "SVD did not converge"))?
        .singular_values;
    Ok(sv.min())
}

#[derive(Debug, Clone, PartialEq)]
pub struct NewtonConfig {
    pub tol: f64,
    pub max_iter: usize,
    /// Smallest admissible singular value of `A*`.
    pub kernel_threshold: f64,
}

impl Default for NewtonConfig {
    fn default() -> Self {
        NewtonConfig { tol: 1e-10, max_iter: 30, kernel_threshold: 1e-6 }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct NewtonReport {
    /// Sup-norm residual `‖F(g + A*u) - K‖∞` before each step and at the end.
    pub history: Vec<f64>,
    pub iterations: usize,
    pub kernel_singular: f64,
    /// Tikhonov shift applied to a near-singular step, if any.
    pub shift: Option<f64>,
}

/// Solve `F(g + A*u) = K` by damped Newton on `u`.
pub fn newton_prescribe(
    metric: &WarpedProductMetric,
    k_target: &[f64],
    cfg: &NewtonConfig,
) -> Result<(DiagonalMetric, DiscreteFunction, NewtonReport)> {
    let n = metric.len();
    check_len(n, k_target.len())?;
    let sigma = kernel_min_singular(metric)?;
    if sigma < cfg.kernel_threshold {
        return Err(Error::precondition(
            "lemma3.2",
            format!(
                "A* has a near-kernel (smallest singular value {sigma:.3e} < {:.1e}); \
                 the metric is in the exceptional case",
                cfg.kernel_threshold
            ),
        ));
    }
    let astar = adjoint_matrix(metric)?;
    let to_h = |u: &[f64]| -> MetricPerturbation {
        let v = &astar * DVector::from_column_slice(u);
        MetricPerturbation { a: v.rows(0, n).iter().copied().collect(), b: v.rows(n, n).iter().copied().collect() }
    };
    let sup = |r: &[f64]| r.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let defect = |u: &[f64]| -> Result<(DiagonalMetric, Vec<f64>)> {
        let g = DiagonalMetric::perturbed(metric, &to_h(u))?;
        let r = g.scal().iter().zip(k_target).map(|(s, k)| s - k).collect();
        Ok((g, r))
    };

    let mut u = vec![0.0; n];
    let (mut g, mut r) = defect(&u)?;
    let mut res = sup(&r);
    let mut history = vec![res];
    let mut shift = None;
    let mut iter = 0;
    while res >= cfg.tol {
        if iter >= cfg.max_iter {
            return Err(Error::diverged("newton_prescribe", format!("{iter} steps, residual {res:e}")));
        }
        iter += 1;
        let (ja, jb) = jacobian(&g, metric.warping())?;
        let mut jac = DMatrix::zeros(n, 2 * n);
        jac.view_mut((0, 0), (n, n)).copy_from(&ja);
        jac.view_mut((0, n), (n, n)).copy_from(&jb);
        let mut q = jac * &astar;
        let rhs = DVector::from_iterator(n, r.iter().map(|v| -v));
        let step = match q.clone().lu().solve(&rhs) {
            Some(s) if s.iter().all(|v| v.is_finite()) => s,
            _ => {
                let eps = 1e-12 * q.amax().max(1.0);
                for j in 0..n {
                    q[(j, j)] += eps;
                }
                shift = Some(eps);
                q.lu()
                    .solve(&rhs)
                    .ok_or_else(|| Error::numerical("newton_prescribe", "singular linearization after shift"))?
            }
        };
        let mut t = 1.0;
        loop {
            let cand: Vec<f64> = u.iter().zip(step.iter()).map(|(a, b)| a + t * b).collect();
            if let Ok((gc, rc)) = defect(&cand) {
                let rn = sup(&rc);
                if rn < res || t < 1e-3 && rn < res * (1.0 + 1e-12) {
                    u = cand;
                    g = gc;
                    r = rc;
                    res = rn;
                    break;
                }
            }
            t *= 0.5;
            if t < 1e-8 {
                return Err(Error::diverged(
                    "newton_prescribe",
                    format!("damping failed at step {iter}, residual {res:e}, or g + A*u left the positive cone"),
                ));
            }
        }
        history.push(res);
    }
    Ok((g, u, NewtonReport { history, iterations: iter, kernel_singular: sigma, shift }))
}
