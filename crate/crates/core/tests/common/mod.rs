//! Independent oracles shared by the integration tests.
#![allow(dead_code)]

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use scalab::cheeger::{z_t_quotient, IsotropyData, OrbitData, SplitVector};
use scalab::LeftInvariantMetric;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn log_uniform(rng: &mut ChaCha8Rng, lo: f64, hi: f64) -> f64 {
    (rng.gen_range(lo.ln()..hi.ln())).exp()
}

pub fn gaussian(rng: &mut ChaCha8Rng) -> f64 {
    // Box–Muller
    let u1: f64 = rng.gen_range(f64::MIN_POSITIVE..1.0);
    let u2: f64 = rng.gen();
    (-2.0 * u1.ln()).sqrt() * (std::f64::consts::TAU * u2).cos()
}

pub fn random_vec(rng: &mut ChaCha8Rng, d: usize) -> Vec<f64> {
    (0..d).map(|_| gaussian(rng)).collect()
}

pub fn random_unit(rng: &mut ChaCha8Rng, d: usize) -> Vec<f64> {
    let v = random_vec(rng, d);
    let n = v.iter().map(|x| x * x).sum::<f64>().sqrt();
    v.iter().map(|x| x / n).collect()
}

/// Milnor's closed form on a unimodular three-dimensional algebra: in a
/// `g`-orthonormal frame with `[e_2,e_3] = λ_1 e_1` and cyclic, scal is
/// `2(μ_1μ_2 + μ_2μ_3 + μ_3μ_1)` with `μ_i = ½(λ_1+λ_2+λ_3) - λ_i`.
/// For `su(2)` with `P = diag(p)` one has `λ_1 = √(p_1 / (p_2 p_3))`.
pub fn milnor_su2_scal(p: [f64; 3]) -> f64 {
    let l = [(p[0] / (p[1] * p[2])).sqrt(), (p[1] / (p[2] * p[0])).sqrt(), (p[2] / (p[0] * p[1])).sqrt()];
    let half = 0.5 * (l[0] + l[1] + l[2]);
    let mu = [half - l[0], half - l[1], half - l[2]];
    2.0 * (mu[0] * mu[1] + mu[1] * mu[2] + mu[2] * mu[0])
}

/// Full curvature tensor of a left-invariant metric from the Koszul formula,
/// in a Cholesky-orthonormal frame. Returns the frame (coordinate vectors)
/// and `R_ijkl = g(R(e_i,e_j)e_k, e_l)`.
pub struct Koszul {
    pub frame: Vec<Vec<f64>>,
    pub d: usize,
    r: Vec<f64>,
}

impl Koszul {
    pub fn new(m: &LeftInvariantMetric) -> Self {
        let d = m.dim();
        let p = m.tensor().clone();
        let l = p.clone().cholesky().expect("positive-definite").l();
        let linv_t = l.try_inverse().expect("invertible").transpose();
        let frame: Vec<Vec<f64>> = (0..d).map(|a| linv_t.column(a).iter().copied().collect()).collect();
        let g = |x: &[f64], y: &[f64]| -> f64 {
            let mut s = 0.0;
            for i in 0..d {
                for j in 0..d {
                    s += x[i] * p[(i, j)] * y[j];
                }
            }
            s
        };
        let idx = |i: usize, j: usize, k: usize| (i * d + j) * d + k;
        let mut c = vec![0.0; d * d * d];
        for i in 0..d {
            for j in 0..d {
                let br = m.brackets().bracket(&frame[i], &frame[j]);
                for k in 0..d {
                    c[idx(i, j, k)] = g(&br, &frame[k]);
                }
            }
        }
        let mut gamma = vec![0.0; d * d * d];
        for i in 0..d {
            for j in 0..d {
                for k in 0..d {
                    gamma[idx(i, j, k)] = 0.5 * (c[idx(i, j, k)] - c[idx(j, k, i)] + c[idx(k, i, j)]);
                }
            }
        }
        let mut r = vec![0.0; d * d * d * d];
        for i in 0..d {
            for j in 0..d {
                for k in 0..d {
                    for l in 0..d {
                        let mut v = 0.0;
                        for s in 0..d {
                            v += gamma[idx(j, k, s)] * gamma[idx(i, s, l)]
                                - gamma[idx(i, k, s)] * gamma[idx(j, s, l)]
                                - c[idx(i, j, s)] * gamma[idx(s, k, l)];
                        }
                        r[((i * d + j) * d + k) * d + l] = v;
                    }
                }
            }
        }
        Koszul { frame, d, r }
    }

    pub fn r(&self, i: usize, j: usize, k: usize, l: usize) -> f64 {
        self.r[((i * self.d + j) * self.d + k) * self.d + l]
    }

    pub fn scal(&self) -> f64 {
        let mut s = 0.0;
        for i in 0..self.d {
            for j in 0..self.d {
                s += self.r(i, j, j, i);
            }
        }
        s
    }

    /// `R(X, Y, Y, X)` for `X, Y` given in frame coordinates.
    pub fn sectional(&self, x: &[f64], y: &[f64]) -> f64 {
        let d = self.d;
        let mut s = 0.0;
        for i in 0..d {
            for j in 0..d {
                for k in 0..d {
                    for l in 0..d {
                        s += self.r(i, j, k, l) * x[i] * y[j] * y[k] * x[l];
                    }
                }
            }
        }
        s
    }

    /// Coordinate vector of `Σ a_i e_i`.
    pub fn to_coords(&self, a: &[f64]) -> Vec<f64> {
        let mut v = vec![0.0; self.d];
        for (ai, e) in a.iter().zip(&self.frame) {
            for (vk, ek) in v.iter_mut().zip(e) {
                *vk += ai * ek;
            }
        }
        v
    }
}

/// Largest `z_t` quotient over `samples` random unit `Z`, with the sample.
pub fn sampled_z_max(
    o: &OrbitData,
    iso: Option<&IsotropyData>,
    t: f64,
    x: &SplitVector,
    y: &SplitVector,
    samples: usize,
    rng: &mut ChaCha8Rng,
) -> (f64, Vec<f64>) {
    let d = o.brackets().dim();
    let mut best = (f64::NEG_INFINITY, vec![0.0; d]);
    for _ in 0..samples {
        let z = random_unit(rng, d);
        let q = z_t_quotient(o, iso, t, x, y, &z);
        if q > best.0 {
            best = (q, z);
        }
    }
    best
}

/// Local ascent on the unit sphere from `z`, using central-difference
/// gradients of the quotient only.
pub fn polish_z(o: &OrbitData, iso: Option<&IsotropyData>, t: f64, x: &SplitVector, y: &SplitVector, z: &[f64]) -> f64 {
    let d = z.len();
    let q = |z: &[f64]| {
        let n = z.iter().map(|v| v * v).sum::<f64>().sqrt();
        let u: Vec<f64> = z.iter().map(|v| v / n).collect();
        z_t_quotient(o, iso, t, x, y, &u)
    };
    let mut z = z.to_vec();
    let mut val = q(&z);
    let mut step = 1e-2;
    for _ in 0..2000 {
        let mut grad = vec![0.0; d];
        let hstep = 1e-7;
        for i in 0..d {
            let mut zp = z.clone();
            let mut zm = z.clone();
            zp[i] += hstep;
            zm[i] -= hstep;
            grad[i] = (q(&zp) - q(&zm)) / (2.0 * hstep);
        }
        let gn = grad.iter().map(|v| v * v).sum::<f64>().sqrt();
        if gn == 0.0 {
            break;
        }
        loop {
            let cand: Vec<f64> = z.iter().zip(&grad).map(|(a, g)| a + step * g / gn).collect();
            let n = cand.iter().map(|v| v * v).sum::<f64>().sqrt();
            let cand: Vec<f64> = cand.iter().map(|v| v / n).collect();
            let qc = q(&cand);
            if qc > val {
                z = cand;
                val = qc;
                step *= 1.5;
                break;
            }
            step *= 0.5;
            if step < 1e-14 {
                return val;
            }
        }
    }
    val
}

/// `c_0 + Σ_{k=1..modes} (a_k cos kr + b_k sin kr)` with coefficients of
/// size at most `amp / k`.
pub fn random_trig(rng: &mut ChaCha8Rng, c0: f64, modes: usize, amp: f64) -> impl Fn(f64) -> f64 + Clone {
    let coef: Vec<(f64, f64)> =
        (1..=modes).map(|k| (rng.gen_range(-amp..amp) / k as f64, rng.gen_range(-amp..amp) / k as f64)).collect();
    move |r: f64| {
        c0 + coef
            .iter()
            .enumerate()
            .map(|(k, (a, b))| {
                let kr = (k + 1) as f64 * r;
                a * kr.cos() + b * kr.sin()
            })
            .sum::<f64>()
    }
}

pub fn samples(n: usize, length: f64, f: impl Fn(f64) -> f64) -> Vec<f64> {
    (0..n).map(|j| f(j as f64 * length / n as f64)).collect()
}

pub fn sup_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

pub fn diag3(p: [f64; 3]) -> DMatrix<f64> {
    DMatrix::from_diagonal(&nalgebra::DVector::from_column_slice(&p))
}
