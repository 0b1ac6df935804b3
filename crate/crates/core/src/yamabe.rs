//! Constant scalar curvature in a conformal class of a warped product.
//!
//! For `g̃ = u^{4/(n-2)} g` the scalar curvature is
//! `u^{-γ}(-4b_n Δu + scal_g u)`; constant-curvature factors solve
//! `4b_n Δu - scal_g u + c u^γ = 0`. Positive constants come from
//! constrained minimization of `J`, negative ones from a Newton solve with a
//! mass normalization.

use nalgebra::{DMatrix, DVector, SymmetricEigen};

use crate::error::{check_len, Error, Result};
use crate::models::{scal_warped, WarpedProductMetric, YamabeConstants};
use crate::quotient_geometry::DiscreteFunction;
use crate::trig::TrigInterpolant;

#[derive(Debug, Clone, PartialEq)]
pub struct ConformalProblem {
    pub metric: WarpedProductMetric,
    pub constants: YamabeConstants,
    pub c: f64,
    pub eps: f64,
    scal: DiscreteFunction,
}

impl ConformalProblem {
    pub fn new(metric: WarpedProductMetric, c: f64, eps: f64) -> Result<Self> {
        if !(eps > 0.0) {
            return Err(Error::invalid(format!("constraint level must be > 0, got {eps}")));
        }
        if !c.is_finite() {
            return Err(Error::invalid("target constant must be finite"));
        }
        let constants = YamabeConstants::new(metric.dim())?;
        let scal = scal_warped(&metric);
        Ok(ConformalProblem { metric, constants, c, eps, scal })
    }

    pub fn scal(&self) -> &[f64] {
        &self.scal
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolverConfig {
    /// Initial step of the line search.
    pub step: f64,
    pub tol_residual: f64,
    pub max_iter: usize,
    pub positivity_floor: f64,
    /// Residual at which descent hands over to a constrained Newton polish.
    /// Set to 0 to disable.
    pub polish_below: f64,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig { step: 1.0, tol_residual: 1e-9, max_iter: 20_000, positivity_floor: 1e-10, polish_below: 1e-4 }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConformalSolution {
    pub u: DiscreteFunction,
    pub lambda: f64,
    pub c_prime: f64,
    pub residual_norm: f64,
    pub iterations: usize,
    /// Objective (descent) or residual (Newton) per iteration.
    pub history: Vec<f64>,
}

pub fn functional_j(p: &ConformalProblem, u: &[f64]) -> Result<f64> {
    let mesh = p.metric.mesh();
    check_len(mesh.len(), u.len())?;
    let k = &p.constants;
    let energy = mesh.dirichlet_energy(u)?;
    let su2: Vec<f64> = u.iter().zip(&p.scal).map(|(a, s)| s * a * a).collect();
    let pow: Vec<f64> = u.iter().map(|a| a.abs().powf(k.two_star)).collect();
    Ok(2.0 * k.b_n * energy + 0.5 * mesh.integrate(&su2)? - p.c / k.two_star * mesh.integrate(&pow)?)
}

/// Gradient of `J` for the weighted inner product:
/// `-4b_n Δu + scal·u - c|u|^{2*-2}u`.
pub fn gradient_j(p: &ConformalProblem, u: &[f64]) -> Result<DiscreteFunction> {
    let lap = p.metric.mesh().laplacian(u)?;
    let k = &p.constants;
    Ok(u.iter()
        .zip(&lap)
        .zip(&p.scal)
        .map(|((a, l), s)| -4.0 * k.b_n * l + s * a - p.c * a.abs().powf(k.two_star - 2.0) * a)
        .collect())
}

fn constraint_value(p: &ConformalProblem, u: &[f64]) -> Result<f64> {
    let k = &p.constants;
    let pow: Vec<f64> = u.iter().map(|a| a.abs().powf(k.two_star)).collect();
    Ok(p.c / k.two_star * p.metric.mesh().integrate(&pow)?)
}

/// Clamp to the nonnegative cone, then scale onto `(c/2*) ∫ u^{2*} = ε`.
pub fn project_to_constraint(p: &ConformalProblem, u: &[f64]) -> Result<DiscreteFunction> {
    if !(p.c > 0.0) {
        return Err(Error::precondition("lemma4.4", format!("constraint needs c > 0, got {}", p.c)));
    }
    let clamped: Vec<f64> = u.iter().map(|a| a.max(0.0)).collect();
    let level = constraint_value(p, &clamped)?;
    if !(level > 0.0) {
        return Err(Error::invalid("cannot project u ≡ 0 onto the constraint"));
    }
    let scale = (p.eps / level).powf(1.0 / p.constants.two_star);
    Ok(clamped.iter().map(|a| a * scale).collect())
}

/// Pointwise defect `4b_n Δu - scal·u + constant·u^γ`.
pub fn el_residual(p: &ConformalProblem, u: &[f64], constant: f64) -> Result<DiscreteFunction> {
    residual_with(&p.metric, &p.scal, &p.constants, u, constant)
}

fn residual_with(
    metric: &WarpedProductMetric,
    scal: &[f64],
    k: &YamabeConstants,
    u: &[f64],
    constant: f64,
) -> Result<DiscreteFunction> {
    let lap = metric.mesh().laplacian(u)?;
    Ok(u.iter()
        .zip(&lap)
        .zip(scal)
        .map(|((a, l), s)| 4.0 * k.b_n * l - s * a + constant * a.abs().powf(k.gamma_n))
        .collect())
}

/// `1 + λ = (4b_n E(u) + ∫scal u²) / (c ∫u^{2*})` at a constrained critical point.
fn multiplier(p: &ConformalProblem, u: &[f64]) -> Result<f64> {
    let mesh = p.metric.mesh();
    let k = &p.constants;
    let su2: Vec<f64> = u.iter().zip(&p.scal).map(|(a, s)| s * a * a).collect();
    let pow: Vec<f64> = u.iter().map(|a| a.abs().powf(k.two_star)).collect();
    let num = 4.0 * k.b_n * mesh.dirichlet_energy(u)? + mesh.integrate(&su2)?;
    Ok(num / (p.c * mesh.integrate(&pow)?))
}

/// Constrained minimization of `J` from `u ≡ 1`.
pub fn minimize_on_constraint(p: &ConformalProblem, cfg: &SolverConfig) -> Result<ConformalSolution> {
    minimize_from(p, cfg, &vec![1.0; p.metric.len()])
}

/// Projected gradient descent with a Sobolev preconditioner
/// `M = -4b_n Δ + σ` and Armijo backtracking, stopped on the weighted L²
/// norm of the Euler–Lagrange defect.
pub fn minimize_from(p: &ConformalProblem, cfg: &SolverConfig, u0: &[f64]) -> Result<ConformalSolution> {
    let mesh = p.metric.mesh();
    check_len(mesh.len(), u0.len())?;
    let min_scal = p.scal.iter().copied().fold(f64::INFINITY, f64::min);
    let max_scal = p.scal.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let scale = 1.0 + max_scal.abs();
    if min_scal < -1e-10 * scale || max_scal <= 1e-10 * scale {
        return Err(Error::precondition(
            "prop4.5",
            format!("needs scal >= 0 and not identically 0; scal ranges over [{min_scal:e}, {max_scal:e}]"),
        ));
    }
    if !(p.c > 0.0) {
        return Err(Error::precondition("prop4.5", format!("needs c > 0, got {}", p.c)));
    }

    let k = p.constants;
    let n = mesh.len();
    let sigma = max_scal.max(1.0);
    let mut m = mesh.laplacian_matrix() * (-4.0 * k.b_n);
    for j in 0..n {
        m[(j, j)] += sigma;
    }
    let lu = m.lu();
    let solve = |r: &[f64]| -> Result<Vec<f64>> {
        lu.solve(&DVector::from_column_slice(r))
            .map(|v| v.as_slice().to_vec())
            .ok_or_else(|| Error::numerical("minimize_on_constraint", "preconditioner singular"))
    };

    let mut u = project_to_constraint(p, u0)?;
    let mut j_val = functional_j(p, &u)?;
    let mut history = vec![j_val];
    let mut alpha = cfg.step;
    let mut previous: Option<(Vec<f64>, Vec<f64>, Vec<f64>)> = None;
    // retried each time the residual drops another decade below a failed attempt
    let mut polish_at = cfg.polish_below;
    for iter in 0..=cfg.max_iter {
        let lam1 = multiplier(p, &u)?;
        let c_prime = lam1 * p.c;
        let res = el_residual(p, &u, c_prime)?;
        let res_norm = mesh.weighted_lp_norm(&res, 2.0)?;
        if res_norm < cfg.tol_residual {
            return finish(u, lam1 - 1.0, c_prime, res_norm, iter, history, cfg);
        }
        if res_norm < polish_at {
            let polished = newton_constrained(
                &p.metric,
                &p.scal,
                &k,
                u.clone(),
                c_prime,
                1.0,
                Normalization::Power { c: p.c, level: p.eps },
                cfg.tol_residual,
                50,
                cfg.positivity_floor,
                "minimize_on_constraint",
            );
            match polished {
                Ok((v, cp, steps, _)) => {
                    let res = el_residual(p, &v, cp)?;
                    let rn = mesh.weighted_lp_norm(&res, 2.0)?;
                    history.push(functional_j(p, &v)?);
                    return finish(v, cp / p.c - 1.0, cp, rn, iter + steps, history, cfg);
                }
                Err(_) => polish_at = res_norm / 10.0,
            }
        }
        if iter == cfg.max_iter {
            break;
        }

        let g_j = gradient_j(p, &u)?;
        let g_f: Vec<f64> = u.iter().map(|a| p.c * a.abs().powf(k.gamma_n)).collect();
        let x = solve(&g_j)?;
        let y = solve(&g_f)?;
        let gy = mesh.inner(&g_f, &y)?;
        let beta = mesh.inner(&g_f, &x)? / gy;
        let z: Vec<f64> = x.iter().zip(&y).map(|(a, b)| a - beta * b).collect();
        let steepest: Vec<f64> = z.iter().map(|v| -v).collect();

        // Polak–Ribière+ on the preconditioned gradient, kept tangent to
        // the constraint
        let mut dir = steepest.clone();
        if let Some((g_prev, z_prev, d_prev)) = &previous {
            let diff: Vec<f64> = g_j.iter().zip(g_prev).map(|(a, b)| a - b).collect();
            let b_cg = (mesh.inner(&diff, &z)? / mesh.inner(g_prev, z_prev)?).max(0.0);
            if b_cg.is_finite() && b_cg > 0.0 {
                let mixed: Vec<f64> = dir.iter().zip(d_prev).map(|(a, b)| a + b_cg * b).collect();
                let off = mesh.inner(&g_f, &mixed)? / gy;
                let mixed: Vec<f64> = mixed.iter().zip(&y).map(|(a, b)| a - off * b).collect();
                if mesh.inner(&g_j, &mixed)? < 0.0 {
                    dir = mixed;
                }
            }
        }
        let mut slope = mesh.inner(&g_j, &dir)?;
        if slope >= 0.0 {
            return Err(Error::diverged(
                "minimize_on_constraint",
                format!("no descent direction at iteration {iter}, residual {res_norm:e}"),
            ));
        }

        let search = |dir: &[f64], slope: f64| -> Result<Option<(Vec<f64>, f64, f64)>> {
            let mut a = (alpha * 2.0).min(cfg.step * 1e3);
            for _ in 0..60 {
                let trial: Vec<f64> = u.iter().zip(dir).map(|(ui, di)| ui + a * di).collect();
                if let Ok(cand) = project_to_constraint(p, &trial) {
                    let jc = functional_j(p, &cand)?;
                    if jc <= j_val + 1e-4 * a * slope {
                        return Ok(Some((cand, jc, a)));
                    }
                }
                a *= 0.5;
            }
            Ok(None)
        };
        let mut accepted = search(&dir, slope)?;
        if accepted.is_none() && dir != steepest {
            dir = steepest;
            slope = mesh.inner(&g_j, &dir)?;
            accepted = search(&dir, slope)?;
        }
        let Some((cand, jc, a)) = accepted else {
            return Err(Error::diverged(
                "minimize_on_constraint",
                format!("line search stalled at iteration {iter}, residual {res_norm:e}"),
            ));
        };
        previous = Some((g_j, z, dir));
        alpha = a;
        u = cand;
        j_val = jc;
        history.push(j_val);
        let umin = u.iter().copied().fold(f64::INFINITY, f64::min);
        if umin < cfg.positivity_floor {
            return Err(Error::diverged(
                "minimize_on_constraint",
                format!("positivity floor breached: min u = {umin:e} at iteration {iter}"),
            ));
        }
    }
    let lam1 = multiplier(p, &u)?;
    let res = el_residual(p, &u, lam1 * p.c)?;
    Err(Error::diverged(
        "minimize_on_constraint",
        format!("{} iterations, residual {:e}", cfg.max_iter, mesh.weighted_lp_norm(&res, 2.0)?),
    ))
}

fn finish(
    u: Vec<f64>,
    lambda: f64,
    c_prime: f64,
    residual_norm: f64,
    iterations: usize,
    history: Vec<f64>,
    cfg: &SolverConfig,
) -> Result<ConformalSolution> {
    let umin = u.iter().copied().fold(f64::INFINITY, f64::min);
    if umin < cfg.positivity_floor {
        return Err(Error::diverged(
            "minimize_on_constraint",
            format!("converged to a factor with min u = {umin:e} below the positivity floor"),
        ));
    }
    Ok(ConformalSolution { u, lambda, c_prime, residual_norm, iterations, history })
}

#[derive(Debug, Clone, PartialEq)]
pub struct NegativeConfig {
    /// Final constant `c`, so that the rescaled metric has scal ≡ -c.
    pub c: Option<f64>,
    pub initial: Option<DiscreteFunction>,
    pub tol_residual: f64,
    pub max_iter: usize,
    pub positivity_floor: f64,
    /// Eigenvalue tolerance of the obstruction check.
    pub classify_tol: f64,
}

impl Default for NegativeConfig {
    fn default() -> Self {
        NegativeConfig {
            c: None,
            initial: None,
            tol_residual: 1e-10,
            max_iter: 100,
            positivity_floor: 1e-10,
            classify_tol: 1e-8,
        }
    }
}

/// Lower bound on `c`: `-(2*/2) min scal · vol^{1-2*/2}`.
pub fn negative_constant_bound(metric: &WarpedProductMetric) -> Result<f64> {
    let k = YamabeConstants::new(metric.dim())?;
    let scal = scal_warped(metric);
    let min = scal.iter().copied().fold(f64::INFINITY, f64::min);
    let vol = metric.mesh().volume();
    Ok(-(k.two_star / 2.0) * min * vol.powf(1.0 - k.two_star / 2.0))
}

/// Solve `4b_n Δu - scal·u - c′u^γ = 0` for `u > 0`, `c′ > 0` with
/// `∫u = vol`, then rescale `u` so that the constant equals `c_used`.
pub fn solve_negative_constant(metric: &WarpedProductMetric, cfg: &NegativeConfig) -> Result<(ConformalSolution, f64)> {
    let k = YamabeConstants::new(metric.dim())?;
    let mesh = metric.mesh();
    let n = mesh.len();
    let bound = negative_constant_bound(metric)?;
    let c_used = match cfg.c {
        Some(c) if c < bound || !(c > 0.0) => {
            return Err(Error::precondition(
                "prop4.7",
                format!("c = {c} is below the admissible bound {bound:.17e} (and must be > 0)"),
            ))
        }
        Some(c) => c,
        None => bound.max(1.0),
    };

    let class = classify_conformal_class(metric, cfg.classify_tol)?;
    if class.verdict != Verdict::NG {
        return Err(Error::precondition(
            "theoremB",
            format!(
                "conformal class is {} (first eigenvalue {:.6e}); no metric of constant negative scalar curvature",
                class.verdict, class.lambda1
            ),
        ));
    }

    let scal = scal_warped(metric);
    let mut u = match &cfg.initial {
        Some(u0) => {
            check_len(n, u0.len())?;
            u0.clone()
        }
        None => mesh.nodes().iter().map(|r| 1.0 + 0.2 * r.cos()).collect(),
    };
    if u.iter().any(|a| !(*a > 0.0)) {
        return Err(Error::invalid("initial conformal factor must be positive"));
    }
    let vol = mesh.volume();
    let mass = mesh.integrate(&u)?;
    u.iter_mut().for_each(|a| *a *= vol / mass);
    let su: Vec<f64> = u.iter().zip(&scal).map(|(a, s)| a * s).collect();
    let ug: Vec<f64> = u.iter().map(|a| a.powf(k.gamma_n)).collect();
    let c_prime = (-mesh.integrate(&su)? / mesh.integrate(&ug)?).max(1e-3);

    let norm_kind = Normalization::Mass(vol);
    let out = newton_constrained(
        metric,
        &scal,
        &k,
        u,
        c_prime,
        -1.0,
        norm_kind,
        cfg.tol_residual,
        cfg.max_iter,
        cfg.positivity_floor,
        "solve_negative_constant",
    )?;
    let (u, c_prime, iter, history) = out;

    if !(c_prime > 0.0) {
        return Err(Error::diverged("solve_negative_constant", format!("collapsed to c′ = {c_prime:e}")));
    }
    let umax = u.iter().copied().fold(0.0, f64::max);
    let umin = u.iter().copied().fold(f64::INFINITY, f64::min);
    if umax < cfg.positivity_floor || umin <= 0.0 {
        return Err(Error::diverged("solve_negative_constant", "collapsed to u ≡ 0"));
    }

    // v = a u solves the equation with constant c′ a^{1-γ}
    let a = (c_prime / c_used).powf(1.0 / (k.gamma_n - 1.0));
    let u: Vec<f64> = u.iter().map(|v| v * a).collect();
    let res = residual_with(metric, &scal, &k, &u, -c_used)?;
    let residual_norm = mesh.weighted_lp_norm(&res, 2.0)?;
    Ok((
        ConformalSolution {
            u,
            lambda: -c_used / c_prime - 1.0,
            c_prime: c_used,
            residual_norm,
            iterations: iter,
            history,
        },
        c_used,
    ))
}

#[derive(Debug, Clone, Copy)]
enum Normalization {
    /// `∫u = V`.
    Mass(f64),
    /// `(c/2*) ∫u^{2*} = ε`.
    Power { c: f64, level: f64 },
}

/// Damped Newton on `4b_n Δu - scal·u + sign·c′u^γ = 0` together with one
/// normalization, for the unknowns `(u, c′)`.
#[allow(clippy::too_many_arguments)]
fn newton_constrained(
    metric: &WarpedProductMetric,
    scal: &[f64],
    k: &YamabeConstants,
    mut u: Vec<f64>,
    mut c_prime: f64,
    sign: f64,
    normalization: Normalization,
    tol: f64,
    max_iter: usize,
    floor: f64,
    stage: &'static str,
) -> Result<(Vec<f64>, f64, usize, Vec<f64>)> {
    let mesh = metric.mesh();
    let n = mesh.len();
    let lap = mesh.laplacian_matrix() * (4.0 * k.b_n);
    let masses = mesh.masses();
    let constraint = |u: &[f64]| -> Result<f64> {
        match normalization {
            Normalization::Mass(v) => Ok(mesh.integrate(u)? - v),
            Normalization::Power { c, level } => {
                let pow: Vec<f64> = u.iter().map(|a| a.abs().powf(k.two_star)).collect();
                Ok(c / k.two_star * mesh.integrate(&pow)? - level)
            }
        }
    };
    let merit = |u: &[f64], cp: f64| -> Result<(Vec<f64>, f64, f64)> {
        let r = residual_with(metric, scal, k, u, sign * cp)?;
        let g = constraint(u)?;
        let rn = mesh.weighted_lp_norm(&r, 2.0)?;
        Ok((r, rn, (rn * rn + g * g).sqrt()))
    };

    let (mut r, mut rn, mut norm) = merit(&u, c_prime)?;
    let mut history = vec![rn];
    let mut iter = 0;
    while rn >= tol {
        if iter >= max_iter {
            return Err(Error::diverged(stage, format!("{iter} Newton steps, residual {rn:e}")));
        }
        iter += 1;
        let mut jac = DMatrix::zeros(n + 1, n + 1);
        jac.view_mut((0, 0), (n, n)).copy_from(&lap);
        for j in 0..n {
            jac[(j, j)] += -scal[j] + sign * k.gamma_n * c_prime * u[j].powf(k.gamma_n - 1.0);
            jac[(j, n)] = sign * u[j].powf(k.gamma_n);
            jac[(n, j)] = match normalization {
                Normalization::Mass(_) => masses[j],
                Normalization::Power { c, .. } => c * masses[j] * u[j].powf(k.two_star - 1.0),
            };
        }
        let mut rhs = DVector::zeros(n + 1);
        for j in 0..n {
            rhs[j] = -r[j];
        }
        rhs[n] = -constraint(&u)?;
        let step = jac.lu().solve(&rhs).ok_or_else(|| Error::numerical(stage, "singular Newton matrix"))?;

        let mut t = 1.0;
        loop {
            let cand: Vec<f64> = (0..n).map(|j| u[j] + t * step[j]).collect();
            let cp = c_prime + t * step[n];
            if cand.iter().all(|a| *a > floor) {
                let (rc, rnc, nc) = merit(&cand, cp)?;
                if nc < norm * (1.0 - 1e-4 * t) || (nc < norm && t < 1e-3) {
                    u = cand;
                    c_prime = cp;
                    r = rc;
                    rn = rnc;
                    norm = nc;
                    break;
                }
            }
            t *= 0.5;
            if t < 1e-10 {
                return Err(Error::diverged(stage, format!("damping failed at step {iter}, residual {rn:e}")));
            }
        }
        history.push(rn);
    }
    Ok((u, c_prime, iter, history))
}

/// Fraction of the non-constant spectral energy of `u` in the upper half
/// of the resolved modes. Small values indicate a resolved, smooth factor.
pub fn spectral_tail(u: &[f64]) -> f64 {
    if u.len() < 4 {
        return 0.0;
    }
    let e = TrigInterpolant::new(u, 1.0).mode_energy();
    let total: f64 = e.iter().sum();
    if total == 0.0 {
        return 0.0;
    }
    e[e.len() / 2..].iter().sum::<f64>() / total
}

/// Multiply `u` so that its conformal scalar curvature moves from the
/// constant `from` to `to`; both must have the same sign.
pub fn rescale_to_constant(u: &[f64], n: usize, from: f64, to: f64) -> Result<DiscreteFunction> {
    let k = YamabeConstants::new(n)?;
    if !(from * to > 0.0) {
        return Err(Error::invalid(format!("cannot rescale scal {from} to {to}: signs differ or vanish")));
    }
    let a = (from / to).powf(1.0 / (k.gamma_n - 1.0));
    Ok(u.iter().map(|v| v * a).collect())
}

/// Scalar curvature of `u^{4/(n-2)} g`: `u^{-γ}(-4b_n Δu + scal·u)`.
pub fn conformal_scal(metric: &WarpedProductMetric, u: &[f64]) -> Result<DiscreteFunction> {
    check_len(metric.len(), u.len())?;
    if let Some((j, v)) = u.iter().enumerate().find(|(_, v)| !(**v > 0.0)) {
        return Err(Error::invalid(format!("conformal factor must be positive, u[{j}] = {v}")));
    }
    let k = YamabeConstants::new(metric.dim())?;
    let lap = metric.mesh().laplacian(u)?;
    let scal = scal_warped(metric);
    Ok(u.iter().zip(&lap).zip(&scal).map(|((a, l), s)| a.powf(-k.gamma_n) * (-4.0 * k.b_n * l + s * a)).collect())
}

/// The conformal metric `u^{4/(n-2)} g` rewritten as a warped product in its
/// own arclength `s`, sampled on a uniform mesh with the same node count.
/// Also returns the original parameter `r(s_j)` of each new node.
pub fn conformal_change(metric: &WarpedProductMetric, u: &[f64]) -> Result<(WarpedProductMetric, Vec<f64>)> {
    check_len(metric.len(), u.len())?;
    if u.iter().any(|v| !(*v > 0.0)) {
        return Err(Error::invalid("conformal factor must be positive"));
    }
    let n = metric.len();
    let length = metric.mesh().length();
    let expo = 2.0 / (metric.dim() as f64 - 2.0);
    let phi: Vec<f64> = u.iter().map(|v| v.powf(expo)).collect();
    let tp = TrigInterpolant::new(&phi, length);
    let tf = TrigInterpolant::new(metric.warping(), length);
    let new_length = tp.mean() * length;
    let mut r_of_s = Vec::with_capacity(n);
    let mut r = 0.0;
    for j in 0..n {
        let s = j as f64 * new_length / n as f64;
        if j > 0 {
            r = s / tp.mean();
        }
        for _ in 0..100 {
            let dr = (tp.integral(r) - s) / tp.eval(r);
            r -= dr;
            if dr.abs() < 1e-15 * length {
                break;
            }
        }
        r_of_s.push(r);
    }
    let f_new = r_of_s.iter().map(|&r| tp.eval(r) * tf.eval(r)).collect();
    let m = WarpedProductMetric::new(new_length, metric.fiber_dim(), metric.fiber_scal(), f_new)?;
    Ok((m, r_of_s))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Verdict {
    PG,
    ZG,
    NG,
}

impl std::fmt::Display for Verdict {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Verdict::PG => "P_G",
            Verdict::ZG => "Z_G",
            Verdict::NG => "N_G",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Classification {
    pub verdict: Verdict,
    pub lambda1: f64,
}

pub const CLASSIFY_TOL: f64 = 1e-8;

/// Sign of the first eigenvalue of `-4b_n Δ + scal` on the weighted quotient.
pub fn classify_conformal_class(metric: &WarpedProductMetric, tol: f64) -> Result<Classification> {
    let k = YamabeConstants::new(metric.dim())?;
    let mesh = metric.mesh();
    let n = mesh.len();
    let scal = scal_warped(metric);
    let mut a = mesh.laplacian_matrix() * (-4.0 * k.b_n);
    for j in 0..n {
        a[(j, j)] += scal[j];
    }
    let sq: Vec<f64> = mesh.masses().iter().map(|m| m.sqrt()).collect();
    let sym = DMatrix::from_fn(n, n, |i, j| {
        let v = sq[i] * a[(i, j)] / sq[j];
        let w = sq[j] * a[(j, i)] / sq[i];
        0.5 * (v + w)
    });
    let eig = SymmetricEigen::try_new(sym, f64::EPSILON, 10_000)
        .ok_or_else(|| Error::numerical("classify_conformal_class", "eigen-solver failed"))?;
    let lambda1 = eig.eigenvalues.min();
    let verdict = if lambda1.abs() < tol {
        Verdict::ZG
    } else if lambda1 > 0.0 {
        Verdict::PG
    } else {
        Verdict::NG
    };
    Ok(Classification { verdict, lambda1 })
}
