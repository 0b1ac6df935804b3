//! Trigonometric interpolation of periodic samples on a uniform grid.
//!
//! Used to resample smooth periodic data after a change of parameter, where
//! the spectral accuracy keeps resampling error far below the O(h²) error
//! of the finite-difference operators being compared.

use std::f64::consts::TAU;

#[derive(Debug, Clone, PartialEq)]
pub struct TrigInterpolant {
    period: f64,
    mean: f64,
    cos: Vec<f64>,
    sin: Vec<f64>,
    nyquist: f64,
    n: usize,
}

impl TrigInterpolant {
    /// Samples are taken at `r_j = j·period/N`, `j = 0..N`.
    pub fn new(values: &[f64], period: f64) -> Self {
        let n = values.len();
        assert!(n >= 2, "need at least two samples");
        let table_cos: Vec<f64> = (0..n).map(|m| (TAU * m as f64 / n as f64).cos()).collect();
        let table_sin: Vec<f64> = (0..n).map(|m| (TAU * m as f64 / n as f64).sin()).collect();
        let half = n / 2;
        let top = if n % 2 == 0 { half } else { half + 1 };
        let mut cos = vec![0.0; top];
        let mut sin = vec![0.0; top];
        for k in 1..top {
            let (mut a, mut b) = (0.0, 0.0);
            for (j, &u) in values.iter().enumerate() {
                let m = (j * k) % n;
                a += u * table_cos[m];
                b += u * table_sin[m];
            }
            cos[k] = 2.0 * a / n as f64;
            sin[k] = 2.0 * b / n as f64;
        }
        let nyquist = if n % 2 == 0 {
            values.iter().enumerate().map(|(j, u)| if j % 2 == 0 { *u } else { -*u }).sum::<f64>() / n as f64
        } else {
            0.0
        };
        let mean = values.iter().sum::<f64>() / n as f64;
        TrigInterpolant { period, mean, cos, sin, nyquist, n }
    }

    pub fn period(&self) -> f64 {
        self.period
    }

    pub fn mean(&self) -> f64 {
        self.mean
    }

    fn omega(&self) -> f64 {
        TAU / self.period
    }

    fn sweep(&self, r: f64, mut term: impl FnMut(usize, f64, f64)) {
        let theta = self.omega() * r;
        let (s1, c1) = theta.sin_cos();
        let (mut s, mut c) = (s1, c1);
        for k in 1..self.cos.len() {
            term(k, c, s);
            let next_c = c * c1 - s * s1;
            s = s * c1 + c * s1;
            c = next_c;
        }
    }

    fn nyquist_angle(&self, r: f64) -> f64 {
        0.5 * self.n as f64 * self.omega() * r
    }

    pub fn eval(&self, r: f64) -> f64 {
        let mut v = self.mean;
        self.sweep(r, |k, c, s| v += self.cos[k] * c + self.sin[k] * s);
        v + self.nyquist * self.nyquist_angle(r).cos()
    }

    pub fn derivative(&self, r: f64) -> f64 {
        let w = self.omega();
        let mut v = 0.0;
        self.sweep(r, |k, c, s| v += k as f64 * w * (self.sin[k] * c - self.cos[k] * s));
        v - self.nyquist * 0.5 * self.n as f64 * w * self.nyquist_angle(r).sin()
    }

    /// `a_k² + b_k²` for `k = 1..`, the Nyquist mode last when present.
    pub fn mode_energy(&self) -> Vec<f64> {
        let mut e: Vec<f64> = (1..self.cos.len()).map(|k| self.cos[k].powi(2) + self.sin[k].powi(2)).collect();
        if self.n % 2 == 0 {
            e.push(self.nyquist * self.nyquist);
        }
        e
    }

    /// `∫_0^r` of the interpolant.
    pub fn integral(&self, r: f64) -> f64 {
        let w = self.omega();
        let mut v = self.mean * r;
        self.sweep(r, |k, c, s| {
            v += (self.cos[k] * s - self.sin[k] * (c - 1.0)) / (k as f64 * w);
        });
        v + self.nyquist * self.nyquist_angle(r).sin() / (0.5 * self.n as f64 * w)
    }
}
