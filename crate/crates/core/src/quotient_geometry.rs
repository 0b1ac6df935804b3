//! Weighted one-dimensional calculus on an orbit space.
//!
//! A [`QuotientMesh`] is a uniform grid on a circle or an interval together
//! with the orbit-volume weight `w(r)`. Every integral in the crate goes
//! through [`QuotientMesh::masses`], so discrete adjointness statements are
//! exact matrix identities.

use nalgebra::DMatrix;

use crate::error::{check_len, Error, Result};

/// Samples of a basic function, one value per mesh node.
pub type DiscreteFunction = Vec<f64>;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Topology {
    Circle,
    Interval,
}

#[derive(Debug, Clone, PartialEq)]
pub struct QuotientMesh {
    topology: Topology,
    length: f64,
    h: f64,
    nodes: Vec<f64>,
    weights: Vec<f64>,
    edge_weights: Vec<f64>,
    masses: Vec<f64>,
}

pub const MIN_NODES: usize = 16;

/// Sample `weight` on a uniform grid. Circle meshes omit the duplicate
/// endpoint; interval meshes include both endpoints.
pub fn build_mesh(topology: Topology, n: usize, length: f64, weight: impl Fn(f64) -> f64) -> Result<QuotientMesh> {
    if n < MIN_NODES {
        return Err(Error::invalid(format!("mesh needs N >= {MIN_NODES}, got {n}")));
    }
    if !(length > 0.0 && length.is_finite()) {
        return Err(Error::invalid(format!("mesh length must be positive, got {length}")));
    }
    let h = match topology {
        Topology::Circle => length / n as f64,
        Topology::Interval => length / (n - 1) as f64,
    };
    let nodes: Vec<f64> = (0..n).map(|j| j as f64 * h).collect();
    let weights = nodes.iter().map(|&r| weight(r)).collect();
    QuotientMesh::from_weights(topology, length, weights)
}

impl QuotientMesh {
    /// Build a mesh from already sampled weights.
    pub fn from_weights(topology: Topology, length: f64, mut weights: Vec<f64>) -> Result<Self> {
        let n = weights.len();
        if topology == Topology::Interval && n >= 2 {
            // sampled zeros of the weight may come out as -1e-16
            let scale = weights.iter().fold(0.0f64, |m, w| m.max(w.abs()));
            for j in [0, n - 1] {
                if weights[j] < 0.0 && weights[j] > -1e-12 * scale {
                    weights[j] = 0.0;
                }
            }
        }
        if n < MIN_NODES {
            return Err(Error::invalid(format!("mesh needs N >= {MIN_NODES}, got {n}")));
        }
        if !(length > 0.0 && length.is_finite()) {
            return Err(Error::invalid(format!("mesh length must be positive, got {length}")));
        }
        for (j, &w) in weights.iter().enumerate() {
            let endpoint = topology == Topology::Interval && (j == 0 || j == n - 1);
            let ok = if endpoint { w >= 0.0 } else { w > 0.0 };
            if !ok || !w.is_finite() {
                return Err(Error::invalid(format!("weight must be positive at interior nodes, w[{j}] = {w}")));
            }
        }
        let h = match topology {
            Topology::Circle => length / n as f64,
            Topology::Interval => length / (n - 1) as f64,
        };
        let nodes = (0..n).map(|j| j as f64 * h).collect();

        let n_edges = match topology {
            Topology::Circle => n,
            Topology::Interval => n - 1,
        };
        let edge_weights = (0..n_edges).map(|e| 0.5 * (weights[e] + weights[(e + 1) % n])).collect();

        let mut masses: Vec<f64> = weights.iter().map(|&w| w * h).collect();
        if topology == Topology::Interval {
            // half cell [0, h/2], trapezoid with the midpoint weight interpolated
            masses[0] = 0.5 * h * (3.0 * weights[0] + weights[1]) / 4.0;
            masses[n - 1] = 0.5 * h * (3.0 * weights[n - 1] + weights[n - 2]) / 4.0;
        }
        let total: f64 = masses.iter().sum();
        if !(total > 0.0) {
            return Err(Error::invalid("total volume must be positive"));
        }
        Ok(QuotientMesh { topology, length, h, nodes, weights, edge_weights, masses })
    }

    pub fn topology(&self) -> Topology {
        self.topology
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn length(&self) -> f64 {
        self.length
    }

    pub fn spacing(&self) -> f64 {
        self.h
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// Quadrature weights: `w_j h` with half cells at interval endpoints.
    pub fn masses(&self) -> &[f64] {
        &self.masses
    }

    /// Weights at edge midpoints, `(w_j + w_{j+1}) / 2`.
    pub fn edge_weights(&self) -> &[f64] {
        &self.edge_weights
    }

    pub fn volume(&self) -> f64 {
        self.masses.iter().sum()
    }

    /// Same topology and length, new weights.
    pub fn with_weights(&self, weights: Vec<f64>) -> Result<Self> {
        check_len(self.len(), weights.len())?;
        Self::from_weights(self.topology, self.length, weights)
    }

    fn check(&self, u: &[f64]) -> Result<()> {
        check_len(self.len(), u.len())
    }

    pub fn integrate(&self, u: &[f64]) -> Result<f64> {
        self.check(u)?;
        Ok(u.iter().zip(&self.masses).map(|(a, m)| a * m).sum())
    }

    /// Weighted L² inner product.
    pub fn inner(&self, u: &[f64], v: &[f64]) -> Result<f64> {
        self.check(u)?;
        self.check(v)?;
        Ok(u.iter().zip(v).zip(&self.masses).map(|((a, b), m)| a * b * m).sum())
    }

    pub fn weighted_lp_norm(&self, u: &[f64], p: f64) -> Result<f64> {
        if !(p >= 1.0) {
            return Err(Error::invalid(format!("L^p norm needs p >= 1, got {p}")));
        }
        self.check(u)?;
        if p.is_infinite() {
            return Ok(u.iter().fold(0.0, |m, a| m.max(a.abs())));
        }
        let s: f64 = u.iter().zip(&self.masses).map(|(a, m)| a.abs().powf(p) * m).sum();
        Ok(s.powf(1.0 / p))
    }

    /// Second-order central difference, one-sided at interval endpoints.
    pub fn derivative(&self, u: &[f64]) -> Result<DiscreteFunction> {
        self.check(u)?;
        let n = u.len();
        let h = self.h;
        let mut d = vec![0.0; n];
        match self.topology {
            Topology::Circle => {
                for j in 0..n {
                    d[j] = (u[(j + 1) % n] - u[(j + n - 1) % n]) / (2.0 * h);
                }
            }
            Topology::Interval => {
                for j in 1..n - 1 {
                    d[j] = (u[j + 1] - u[j - 1]) / (2.0 * h);
                }
                d[0] = (-3.0 * u[0] + 4.0 * u[1] - u[2]) / (2.0 * h);
                d[n - 1] = (3.0 * u[n - 1] - 4.0 * u[n - 2] + u[n - 3]) / (2.0 * h);
            }
        }
        Ok(d)
    }

    fn fluxes(&self, u: &[f64]) -> Vec<f64> {
        let n = u.len();
        self.edge_weights.iter().enumerate().map(|(e, we)| we * (u[(e + 1) % n] - u[e]) / self.h).collect()
    }

    /// Divergence-form operator `(1/w)(w u')'`. On an interval the boundary
    /// flux is zero, which is the Neumann closure at singular orbits.
    pub fn laplacian(&self, u: &[f64]) -> Result<DiscreteFunction> {
        self.check(u)?;
        let n = u.len();
        let flux = self.fluxes(u);
        let mut out = vec![0.0; n];
        for j in 0..n {
            let right = match self.topology {
                Topology::Interval if j == n - 1 => 0.0,
                _ => flux[j],
            };
            let left = match self.topology {
                Topology::Circle => flux[(j + n - 1) % n],
                Topology::Interval if j == 0 => 0.0,
                Topology::Interval => flux[j - 1],
            };
            out[j] = (right - left) / self.masses[j];
        }
        Ok(out)
    }

    /// Dense matrix of [`laplacian`](Self::laplacian).
    pub fn laplacian_matrix(&self) -> DMatrix<f64> {
        let n = self.len();
        let mut m = DMatrix::zeros(n, n);
        let inv_h = 1.0 / self.h;
        for (e, &we) in self.edge_weights.iter().enumerate() {
            let (a, b) = (e, (e + 1) % n);
            let c = we * inv_h;
            m[(a, b)] += c / self.masses[a];
            m[(a, a)] -= c / self.masses[a];
            m[(b, a)] += c / self.masses[b];
            m[(b, b)] -= c / self.masses[b];
        }
        m
    }

    /// Dirichlet form `Σ_e w_e δu δv / h`; satisfies
    /// `dirichlet_form(u, v) = -inner(laplacian(u), v)` exactly.
    pub fn dirichlet_form(&self, u: &[f64], v: &[f64]) -> Result<f64> {
        self.check(u)?;
        self.check(v)?;
        let n = u.len();
        Ok(self
            .edge_weights
            .iter()
            .enumerate()
            .map(|(e, we)| {
                let b = (e + 1) % n;
                we * (u[b] - u[e]) * (v[b] - v[e]) / self.h
            })
            .sum())
    }

    pub fn dirichlet_energy(&self, u: &[f64]) -> Result<f64> {
        self.dirichlet_form(u, u)
    }
}

pub fn integrate(mesh: &QuotientMesh, u: &[f64]) -> Result<f64> {
    mesh.integrate(u)
}

pub fn weighted_lp_norm(mesh: &QuotientMesh, u: &[f64], p: f64) -> Result<f64> {
    mesh.weighted_lp_norm(u, p)
}

pub fn derivative(mesh: &QuotientMesh, u: &[f64]) -> Result<DiscreteFunction> {
    mesh.derivative(u)
}

pub fn laplacian(mesh: &QuotientMesh, u: &[f64]) -> Result<DiscreteFunction> {
    mesh.laplacian(u)
}
