//! Scale, approximate, solve and pull back.

use super::approx::{approximate_at_nodes, Diffeo1D};
use super::{kernel_min_singular, newton_prescribe, DiagonalMetric, NewtonConfig, NewtonReport};
use crate::error::{Error, Result};
use crate::models::{scal_warped, WarpedProductMetric};
use crate::quotient_geometry::DiscreteFunction;

/// Strict nodewise `c·min f < scal_j < c·max f`.
pub fn pinching_check(f: &[f64], scal: &[f64], c: f64) -> bool {
    if !(c > 0.0) || f.is_empty() {
        return false;
    }
    let fmin = f.iter().copied().fold(f64::INFINITY, f64::min);
    let fmax = f.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    scal.iter().all(|s| c * fmin < *s && *s < c * fmax)
}

#[derive(Debug, Clone, PartialEq)]
pub struct PrescribeConfig {
    /// Candidate scalings, tried for the widest pinching margin.
    pub c_grid: Vec<f64>,
    /// Nodal tolerance of the approximation stage.
    pub tau: f64,
    pub newton: NewtonConfig,
    /// Relative size of the warping bump used to leave the exceptional case.
    pub bump: f64,
}

impl Default for PrescribeConfig {
    fn default() -> Self {
        PrescribeConfig {
            c_grid: (0..=60).map(|i| 10f64.powf(-3.0 + 6.0 * i as f64 / 60.0)).collect(),
            tau: 1e-3,
            newton: NewtonConfig::default(),
            bump: 1e-3,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Prescription {
    /// `c·g̃` in the original coordinate `r`.
    pub metric: DiagonalMetric,
    /// The output metric is the push-forward of `metric` by `phi`.
    pub phi: Diffeo1D,
    pub c: f64,
    /// `s_j = φ(r_j)` reduced to `[0, L)`.
    pub pushed_nodes: Vec<f64>,
    /// Scalar curvature of the output at `s_j`.
    pub scal_out: Vec<f64>,
    /// `f(s_j)`.
    pub target: Vec<f64>,
    /// `max_j |scal_out_j - f(s_j)|`.
    pub residual: f64,
    /// `max_j |c·f(φ(r_j)) - scal_g(r_j)|` handed to Newton.
    pub approx_deviation: f64,
    /// Scalar curvature of the metric handed to Newton, after any bump.
    pub scal_base: DiscreteFunction,
    /// Newton potential: the output is `c·(g + A*u)` before the push-forward.
    pub u: DiscreteFunction,
    pub newton: Option<NewtonReport>,
    /// Whether the warping was bumped to escape a kernel of `A*`.
    pub perturbed: bool,
}

fn select_c(fine: &[f64], scal: &[f64], grid: &[f64]) -> Option<f64> {
    let fmin = fine.iter().copied().fold(f64::INFINITY, f64::min);
    let fmax = fine.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let smin = scal.iter().copied().fold(f64::INFINITY, f64::min);
    let smax = scal.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    grid.iter()
        .copied()
        .filter(|&c| pinching_check(fine, scal, c))
        .map(|c| (c, (smin / c - fmin).min(fmax - smax / c)))
        .fold(None, |best: Option<(f64, f64)>, cand| match best {
            Some(b) if b.1 >= cand.1 => Some(b),
            _ => Some(cand),
        })
        .map(|b| b.0)
}

pub fn full_prescribe(
    metric: &WarpedProductMetric,
    f: &dyn Fn(f64) -> f64,
    cfg: &PrescribeConfig,
) -> Result<Prescription> {
    let n = metric.len();
    let l = metric.mesh().length();
    let nodes = metric.mesh().nodes().to_vec();
    let wrap = |x: f64| x.rem_euclid(l);
    let fine: Vec<f64> = (0..16 * n).map(|i| f(i as f64 * l / (16 * n) as f64)).collect();

    let scal = scal_warped(metric);
    let f_nodes: Vec<f64> = nodes.iter().map(|&r| f(r)).collect();
    let scale = 1.0 + scal.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    if f_nodes.iter().zip(&scal).all(|(a, b)| (a - b).abs() <= 1e-12 * scale) {
        return Ok(Prescription {
            metric: DiagonalMetric::from_warped(metric),
            phi: Diffeo1D::identity(l),
            c: 1.0,
            pushed_nodes: nodes,
            scal_out: scal.clone(),
            target: f_nodes.clone(),
            residual: f_nodes.iter().zip(&scal).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max),
            approx_deviation: 0.0,
            scal_base: scal,
            u: vec![0.0; n],
            newton: None,
            perturbed: false,
        });
    }

    let pinching_error = || {
        Error::precondition(
            "condition1",
            format!(
                "pinching c·min f < scal < c·max f fails for every c in the grid [{:.1e}, {:.1e}]",
                cfg.c_grid.first().copied().unwrap_or(f64::NAN),
                cfg.c_grid.last().copied().unwrap_or(f64::NAN)
            ),
        )
    };
    select_c(&fine, &scal, &cfg.c_grid).ok_or_else(pinching_error)?;

    let mut base = metric.clone();
    let mut perturbed = false;
    if kernel_min_singular(&base)? < cfg.newton.kernel_threshold && cfg.bump > 0.0 {
        let bumped = base
            .warping()
            .iter()
            .zip(&nodes)
            .map(|(w, r)| w * (1.0 + cfg.bump * (std::f64::consts::TAU * r / l).cos()))
            .collect();
        base = base.with_warping(bumped)?;
        perturbed = true;
    }
    let scal = scal_warped(&base);
    let c = select_c(&fine, &scal, &cfg.c_grid).ok_or_else(pinching_error)?;

    let target: Vec<f64> = scal.iter().map(|s| s / c).collect();
    let phi = approximate_at_nodes(f, &target, l, cfg.tau)?;
    let k: Vec<f64> = nodes.iter().map(|&r| c * f(wrap(phi.eval(r)))).collect();
    let approx_deviation = k.iter().zip(&scal).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);

    let (g, u, report) = newton_prescribe(&base, &k, &cfg.newton)?;
    let out = g.scaled(c);
    let scal_out = out.scal();
    let pushed: Vec<f64> = nodes.iter().map(|&r| wrap(phi.eval(r))).collect();
    let f_pushed: Vec<f64> = pushed.iter().map(|&s| f(s)).collect();
    let residual = scal_out.iter().zip(&f_pushed).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
    Ok(Prescription {
        metric: out,
        phi,
        c,
        pushed_nodes: pushed,
        scal_out,
        target: f_pushed,
        residual,
        approx_deviation,
        scal_base: scal,
        u,
        newton: Some(report),
        perturbed,
    })
}
