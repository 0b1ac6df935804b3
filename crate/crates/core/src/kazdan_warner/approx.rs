//! Approximating a target by `f∘φ` with `φ` a circle diffeomorphism.
//!
//! The circle is cut into cells on which the target is nearly constant.
//! Each cell is sent close to one point `x_i` where `f` matches the cell
//! value, the points increasing around the circle, and `φ` climbs between
//! consecutive points on thin smooth transitions at the cell boundaries.

use crate::error::{Error, Result};

/// 8-point Gauss–Legendre rule on `[-1, 1]`.
const GL_X: [f64; 4] =
    [0.183_434_642_495_649_8, 0.525_532_409_916_329, 0.796_666_477_413_626_7, 0.960_289_856_497_536_3];
const GL_W: [f64; 4] =
    [0.362_683_783_378_362, 0.313_706_645_877_887_3, 0.222_381_034_453_374_5, 0.101_228_536_290_376_3];

fn gauss(a: f64, b: f64, mut g: impl FnMut(f64) -> f64) -> f64 {
    let (mid, half) = (0.5 * (a + b), 0.5 * (b - a));
    let mut s = 0.0;
    for (x, w) in GL_X.iter().zip(&GL_W) {
        s += w * (g(mid - half * x) + g(mid + half * x));
    }
    s * half
}

fn smoother_step(x: f64) -> f64 {
    if x <= 0.0 {
        0.0
    } else if x >= 1.0 {
        1.0
    } else {
        x * x * x * (x * (6.0 * x - 15.0) + 10.0)
    }
}

fn smoother_step_prime(x: f64) -> f64 {
    if x <= 0.0 || x >= 1.0 {
        0.0
    } else {
        30.0 * x * x * (1.0 - x) * (1.0 - x)
    }
}

/// Orientation-preserving circle diffeomorphism of degree one, lifted to the
/// line: `φ(r + L) = φ(r) + L`.
#[derive(Debug, Clone, PartialEq)]
pub struct Diffeo1D {
    period: f64,
    eta: f64,
    base: f64,
    anchor: (f64, f64),
    /// `(center, jump)` of each smooth step, centers increasing within one
    /// period.
    steps: Vec<(f64, f64)>,
    /// `prefix[i]` = sum of the first `i` jumps.
    prefix: Vec<f64>,
    width: f64,
}

impl Diffeo1D {
    pub fn identity(period: f64) -> Self {
        Diffeo1D { period, eta: 1.0, base: 0.0, anchor: (0.0, 0.0), steps: Vec::new(), prefix: vec![0.0], width: 0.0 }
    }

    fn from_points(period: f64, centers: &[f64], xs: &[f64], width: f64, eta: f64) -> Self {
        let m = xs.len();
        let mut steps = Vec::new();
        let first_jump = xs[0] + period - xs[m - 1];
        steps.push((centers[0], first_jump));
        for i in 1..m {
            let jump = xs[i] - xs[i - 1];
            if jump > 0.0 {
                steps.push((centers[i], jump));
            }
        }
        let mut prefix = vec![0.0];
        for &(_, g) in &steps {
            prefix.push(prefix.last().unwrap() + g);
        }
        Diffeo1D { period, eta, base: xs[m - 1] - period, anchor: (centers[0], xs[0]), steps, prefix, width }
    }

    pub fn period(&self) -> f64 {
        self.period
    }

    /// Number of smooth steps.
    pub fn transitions(&self) -> usize {
        self.steps.len()
    }

    pub fn transition_width(&self) -> f64 {
        self.width
    }

    /// `Σ G_i R(r - c_i)` and its derivative, where `R` is a smooth
    /// staircase rising by one across each `c_i + kL`.
    fn staircase(&self, r: f64) -> (f64, f64) {
        let l = self.period;
        let lo = self.steps[0].0 - 0.5 * self.width;
        let turns = ((r - lo) / l).floor();
        let r0 = r - turns * l;
        // steps finished before r0, then the at most two still in progress
        let done = self.steps.partition_point(|&(c, _)| c + 0.5 * self.width <= r0);
        let mut v = self.prefix[done];
        let mut d = 0.0;
        for &(c, g) in &self.steps[done..] {
            let x = (r0 - c) / self.width + 0.5;
            if x <= 0.0 {
                break;
            }
            v += g * smoother_step(x);
            d += g * smoother_step_prime(x) / self.width;
        }
        (v + turns * self.prefix[self.steps.len()], d)
    }

    pub fn eval(&self, r: f64) -> f64 {
        let lin = self.eta * (self.anchor.1 + r - self.anchor.0);
        if self.steps.is_empty() {
            return lin;
        }
        (1.0 - self.eta) * (self.base + self.staircase(r).0) + lin
    }

    pub fn derivative(&self, r: f64) -> f64 {
        if self.steps.is_empty() {
            return self.eta;
        }
        (1.0 - self.eta) * self.staircase(r).1 + self.eta
    }

    /// Node values `φ_j` and derivatives `φ′_j`.
    pub fn sample(&self, nodes: &[f64]) -> (Vec<f64>, Vec<f64>) {
        (nodes.iter().map(|&r| self.eval(r)).collect(), nodes.iter().map(|&r| self.derivative(r)).collect())
    }

    pub fn winding_number(&self) -> f64 {
        (self.eval(self.period) - self.eval(0.0)) / self.period
    }
}

/// Inputs of the approximation: `f` and the target on a circle of the given
/// period, and the density of the measure used for the `L^p` norm.
pub struct ApproxProblem<'a> {
    pub f: &'a dyn Fn(f64) -> f64,
    pub target: &'a dyn Fn(f64) -> f64,
    pub weight: &'a dyn Fn(f64) -> f64,
    pub period: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Approximation {
    pub phi: Diffeo1D,
    /// `‖f∘φ - target‖_p` by composite Gauss–Legendre quadrature.
    pub error: f64,
    pub cells: usize,
}

struct FGrid<'a> {
    f: &'a dyn Fn(f64) -> f64,
    period: f64,
    dx: f64,
    vals: Vec<f64>,
}

impl<'a> FGrid<'a> {
    fn new(f: &'a dyn Fn(f64) -> f64, period: f64, m: usize) -> Self {
        let dx = period / m as f64;
        let vals = (0..m).map(|i| f(i as f64 * dx)).collect();
        FGrid { f, period, dx, vals }
    }

    fn at(&self, x: f64) -> f64 {
        (self.f)(x.rem_euclid(self.period))
    }

    fn grid(&self, i: i64) -> f64 {
        self.vals[i.rem_euclid(self.vals.len() as i64) as usize]
    }

    fn min(&self) -> f64 {
        self.vals.iter().copied().fold(f64::INFINITY, f64::min)
    }

    fn max(&self) -> f64 {
        self.vals.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    fn max_jump(&self) -> f64 {
        let m = self.vals.len() as i64;
        (0..m).map(|i| (self.grid(i + 1) - self.grid(i)).abs()).fold(0.0, f64::max)
    }

    /// Earliest `x ∈ [from, limit)` with `|f(x) - t| ≤ tol`.
    fn next_match(&self, from: f64, limit: f64, t: f64, tol: f64) -> Option<f64> {
        let mut fa = self.at(from) - t;
        if fa.abs() <= tol {
            return Some(from);
        }
        let mut a = from;
        let mut i = (from / self.dx).floor() as i64 + 1;
        loop {
            let b = i as f64 * self.dx;
            if b >= limit {
                return None;
            }
            let fb = self.grid(i) - t;
            if fa.signum() != fb.signum() {
                let (mut lo, mut hi, flo) = (a, b, fa);
                for _ in 0..200 {
                    let mid = 0.5 * (lo + hi);
                    let fm = self.at(mid) - t;
                    if fm.abs() <= 0.5 * tol {
                        return Some(mid);
                    }
                    if fm.signum() == flo.signum() {
                        lo = mid;
                    } else {
                        hi = mid;
                    }
                }
                return Some(hi);
            }
            if fb.abs() <= tol {
                return Some(b);
            }
            a = b;
            fa = fb;
            i += 1;
        }
    }

    /// Starting points for the first cell, one per band where `f` meets `t`.
    fn starts(&self, t: f64, tol: f64, cap: usize) -> Vec<f64> {
        let mut out = Vec::new();
        let mut from = 0.0;
        while let Some(x) = self.next_match(from, self.period, t, tol) {
            out.push(x);
            // leave the band before looking again
            let mut i = (x / self.dx).floor() as i64 + 1;
            while (i as f64 * self.dx) < self.period && (self.grid(i) - t).abs() <= tol {
                i += 1;
            }
            from = i as f64 * self.dx;
            if from >= self.period {
                break;
            }
        }
        if out.len() > cap {
            let stride = out.len() as f64 / cap as f64;
            out = (0..cap).map(|i| out[(i as f64 * stride) as usize]).collect();
        }
        out
    }

    /// Increasing points `x_i` with `f(x_i)` within `tol` of `targets[i]`
    /// and `x_last < x_0 + period`.
    fn greedy(&self, targets: &[f64], tol: f64) -> Option<Vec<f64>> {
        for x0 in self.starts(targets[0], tol, 64) {
            let limit = x0 + self.period;
            let mut xs = vec![x0];
            let mut ok = true;
            for &t in &targets[1..] {
                match self.next_match(*xs.last().unwrap(), limit, t, tol) {
                    Some(x) => xs.push(x),
                    None => {
                        ok = false;
                        break;
                    }
                }
            }
            if ok {
                return Some(xs);
            }
        }
        None
    }
}

fn fgrid_size(n: usize) -> usize {
    n.max(16_384)
}

/// Build `φ` with `‖f∘φ - target‖_p < ε`.
pub fn approximate_by_diffeo(prob: &ApproxProblem, p: f64, eps: f64) -> Result<Approximation> {
    if !(p >= 1.0) || !(eps > 0.0) || !(prob.period > 0.0) {
        return Err(Error::invalid(format!("need p >= 1, ε > 0 and a positive period (p = {p}, ε = {eps})")));
    }
    let l = prob.period;
    let fg = FGrid::new(prob.f, l, fgrid_size(0));
    let (fmin, fmax) = (fg.min(), fg.max());
    let slack = fg.max_jump();

    let panels = 2048;
    let volume: f64 =
        (0..panels).map(|i| gauss(i as f64 * l / panels as f64, (i + 1) as f64 * l / panels as f64, prob.weight)).sum();
    let wmax = (0..8 * panels).map(|i| (prob.weight)(i as f64 * l / (8 * panels) as f64)).fold(0.0, f64::max);
    let tau = eps / (3.0 * volume.powf(1.0 / p));

    // target grid fine enough that it moves by at most τ/20 per cell
    let mut mt = 1 << 14;
    let tvals = loop {
        let v: Vec<f64> = (0..mt).map(|i| (prob.target)(i as f64 * l / mt as f64)).collect();
        let jump = (0..mt).map(|i| (v[(i + 1) % mt] - v[i]).abs()).fold(0.0, f64::max);
        if jump <= 0.05 * tau || mt >= 1 << 22 {
            break v;
        }
        mt *= 2;
    };
    let (tmin, tmax) = tvals.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), v| (a.min(*v), b.max(*v)));
    if tmin < fmin - slack || tmax > fmax + slack {
        return Err(Error::precondition(
            "lemma3.4",
            format!("target range [{tmin:.6e}, {tmax:.6e}] leaves the range of f [{fmin:.6e}, {fmax:.6e}]"),
        ));
    }
    if tvals.iter().enumerate().all(|(i, t)| *t == (prob.f)(i as f64 * l / mt as f64)) {
        return Ok(Approximation { phi: Diffeo1D::identity(l), error: 0.0, cells: 1 });
    }

    let dt = l / mt as f64;
    let (starts, levels) = cells(&tvals, 1.8 * tau);
    let centers: Vec<f64> = starts.iter().map(|&i| i as f64 * dt).collect();
    let xs = fg.greedy(&levels, 0.9 * tau).ok_or_else(|| infeasible(levels.len()))?;

    // transition width from the share of the error budget left to the steps
    let lip = slack / fg.dx;
    let eta = (1e-6f64).min(0.05 * tau / (lip * l + 1.0));
    let m = xs.len();
    let mut mass = 0.0;
    for i in 0..m {
        let (lo, hi) = if i == 0 { (xs[m - 1] - l, xs[0]) } else { (xs[i - 1], xs[i]) };
        if hi <= lo {
            continue;
        }
        let t = (prob.target)(centers[i]);
        let i0 = (lo / fg.dx).floor() as i64;
        let i1 = (hi / fg.dx).ceil() as i64;
        let d = (i0..=i1).map(|j| (fg.grid(j) - t).abs()).fold(0.0, f64::max) + 2.0 * tau + slack;
        mass += wmax * d.powf(p);
    }
    let budget = 0.5 * eps.powf(p) * (1.0 - (2.0f64 / 3.0).powf(p));
    let gaps = retained_gaps(&centers, &xs, l);
    let mut width = (budget / mass).min(0.25 * gaps).min(l / 8.0);
    let resolution = 1e3 * f64::EPSILON * l;
    if width < resolution {
        let achievable = (mass * resolution / (0.5 * (1.0 - (2.0f64 / 3.0).powf(p)))).powf(1.0 / p);
        return Err(Error::numerical(
            "approximate_by_diffeo",
            format!("ε = {eps:e} too small: transitions would be {width:.3e} wide; achievable ε ≈ {achievable:.3e}"),
        ));
    }
    width = width.max(resolution);
    let phi = Diffeo1D::from_points(l, &centers, &xs, width, eta);
    let error = lp_error(prob, &phi, p);
    if !(error < eps) {
        return Err(Error::numerical(
            "approximate_by_diffeo",
            format!("achieved ‖f∘φ - target‖_{p} = {error:.6e} not below ε = {eps:e}"),
        ));
    }
    Ok(Approximation { phi, error, cells: levels.len() })
}

fn infeasible(cells: usize) -> Error {
    Error::numerical(
        "approximate_by_diffeo",
        format!(
            "no increasing choice of matching points for {cells} cells within one turn; \
             a degree-one circle map cannot order the values of f as the target needs"
        ),
    )
}

/// Runs of consecutive samples whose spread stays within `band`, returned as
/// start indices and mid-range levels.
fn cells(vals: &[f64], band: f64) -> (Vec<usize>, Vec<f64>) {
    let mut starts = vec![0];
    let mut levels = Vec::new();
    let (mut lo, mut hi) = (vals[0], vals[0]);
    for (i, &v) in vals.iter().enumerate().skip(1) {
        let (nlo, nhi) = (lo.min(v), hi.max(v));
        if nhi - nlo > band {
            levels.push(0.5 * (lo + hi));
            starts.push(i);
            lo = v;
            hi = v;
        } else {
            lo = nlo;
            hi = nhi;
        }
    }
    levels.push(0.5 * (lo + hi));
    (starts, levels)
}

/// Smallest cyclic distance between the centers of retained steps.
fn retained_gaps(centers: &[f64], xs: &[f64], l: f64) -> f64 {
    let kept: Vec<f64> = (0..xs.len()).filter(|&i| i == 0 || xs[i] > xs[i - 1]).map(|i| centers[i]).collect();
    if kept.len() < 2 {
        return l;
    }
    let mut g = kept[0] + l - kept[kept.len() - 1];
    for w in kept.windows(2) {
        g = g.min(w[1] - w[0]);
    }
    g
}

/// `‖f∘φ - target‖_p` with panels aligned to the transitions.
pub(crate) fn lp_error(prob: &ApproxProblem, phi: &Diffeo1D, p: f64) -> f64 {
    let l = prob.period;
    let integrand = |r: f64| {
        let e = (prob.f)(phi.eval(r).rem_euclid(l)) - (prob.target)(r.rem_euclid(l));
        (prob.weight)(r.rem_euclid(l)) * e.abs().powf(p)
    };
    if phi.steps.is_empty() {
        return (0..2048)
            .map(|i| gauss(i as f64 * l / 2048.0, (i + 1) as f64 * l / 2048.0, integrand))
            .sum::<f64>()
            .powf(1.0 / p);
    }
    let w = phi.width;
    let start = phi.steps[0].0 - 0.5 * w;
    let mut bounds: Vec<(f64, f64)> = phi.steps.iter().map(|&(c, _)| (c - 0.5 * w, c + 0.5 * w)).collect();
    bounds.push((start + l, start + l));
    let mut total = 0.0;
    let max_panel = l / 2048.0;
    for k in 0..bounds.len() - 1 {
        let (a, b) = bounds[k];
        // a step sweeping a long arc of f needs more panels than a short one
        let jump = if k < phi.steps.len() { phi.steps[k].1 } else { 0.0 };
        let sub = ((jump / l * 256.0).ceil() as usize * 4).clamp(2, 64);
        for i in 0..sub {
            total += gauss(a + (b - a) * i as f64 / sub as f64, a + (b - a) * (i + 1) as f64 / sub as f64, integrand);
        }
        let (c, d) = (b, bounds[k + 1].0);
        let pieces = ((d - c) / max_panel).ceil().max(1.0) as usize;
        for i in 0..pieces {
            total +=
                gauss(c + (d - c) * i as f64 / pieces as f64, c + (d - c) * (i + 1) as f64 / pieces as f64, integrand);
        }
    }
    total.powf(1.0 / p)
}

/// Node-level construction used by the pipeline: cells are runs of nodes,
/// every transition sits strictly between two nodes, and
/// `|f(φ(r_j)) - target_j| ≤ 2τ` at each node.
pub fn approximate_at_nodes(f: &dyn Fn(f64) -> f64, target: &[f64], period: f64, tau: f64) -> Result<Diffeo1D> {
    let n = target.len();
    if n < 2 || !(tau > 0.0) {
        return Err(Error::invalid("need at least two nodes and τ > 0"));
    }
    let h = period / n as f64;
    let fg = FGrid::new(f, period, fgrid_size(64 * n));
    let slack = fg.max_jump();
    let (fmin, fmax) = (fg.min(), fg.max());
    if let Some((j, t)) = target.iter().enumerate().find(|(_, t)| **t < fmin - slack || **t > fmax + slack) {
        return Err(Error::precondition(
            "lemma3.4",
            format!("target {t:.6e} at node {j} outside the range of f [{fmin:.6e}, {fmax:.6e}]"),
        ));
    }
    if target.iter().enumerate().all(|(j, t)| *t == f(j as f64 * h)) {
        return Ok(Diffeo1D::identity(period));
    }
    let (starts, levels) = cells(target, 0.9 * tau);
    let centers: Vec<f64> = starts.iter().map(|&j| (j as f64 - 0.5) * h).collect();
    let xs = fg.greedy(&levels, 0.5 * tau).ok_or_else(|| infeasible(levels.len()))?;
    let lip = slack / fg.dx;
    let eta = (1e-6f64).min(0.05 * tau / (lip * period + 1.0));
    Ok(Diffeo1D::from_points(period, &centers, &xs, 0.5 * h, eta))
}
