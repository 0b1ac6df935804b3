//! Named models: warped products for the conformal and prescription
//! commands, left-invariant metrics on su(2) for the Cheeger sweep, and
//! pointwise submersion data for the canonical variation.

use std::f64::consts::TAU;

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use scalab::canonical_variation::SubmersionPointData;
use scalab::nalgebra::{DMatrix, Matrix3};
use scalab::{LeftInvariantMetric, StructureConstants, WarpedProductMetric};

use crate::config::ScenarioConfig;
use crate::expr;
use crate::run::CliError;

/// Resolved warped-product parameters.
#[derive(Debug, Clone, PartialEq)]
pub struct WarpedSpec {
    pub length: f64,
    pub k: usize,
    pub c_f: f64,
    pub f: String,
}

pub const WARPED_PRESETS: &[&str] = &["round-fiber", "flat-torus", "hyperbolic-fiber", "bumpy"];

fn warped_defaults(name: &str) -> Option<WarpedSpec> {
    let spec = |k, c_f, f: &str| WarpedSpec { length: TAU, k, c_f, f: f.to_string() };
    Some(match name {
        "round-fiber" => spec(3, 6.0, "1"),
        "flat-torus" => spec(3, 0.0, "1"),
        "hyperbolic-fiber" => spec(2, -2.0, "1"),
        "bumpy" => spec(3, 6.0, "1+0.2*sin(r)"),
        _ => return None,
    })
}

pub fn warped_spec(cfg: &ScenarioConfig) -> Result<WarpedSpec, CliError> {
    let mut spec = warped_defaults(&cfg.preset).ok_or_else(|| {
        CliError::Config(format!(
            "unknown model preset '{}' for {} (expected one of {})",
            cfg.preset,
            cfg.command,
            WARPED_PRESETS.join(", ")
        ))
    })?;
    if let Some(l) = cfg.length {
        spec.length = l;
    }
    if let Some(k) = cfg.k {
        spec.k = k;
    }
    if let Some(c) = cfg.c_f {
        spec.c_f = c;
    }
    if let Some(f) = &cfg.f {
        spec.f = f.clone();
    }
    Ok(spec)
}

pub fn build_warped(spec: &WarpedSpec, n: usize) -> Result<WarpedProductMetric, CliError> {
    let f = expr::compile(&spec.f).map_err(|e| CliError::Config(format!("model.f: {e}")))?;
    Ok(WarpedProductMetric::from_fn(n, spec.length, spec.k, spec.c_f, f)?)
}

/// Rebuild from stored warping samples, as read back from an artifact.
pub fn warped_from_samples(spec: &WarpedSpec, f: Vec<f64>) -> Result<WarpedProductMetric, CliError> {
    Ok(WarpedProductMetric::new(spec.length, spec.k, spec.c_f, f)?)
}

pub const GROUP_PRESETS: &[&str] =
    &["su2-biinvariant", "su2-berger(λ)", "su2-diag(a,b,c)", "su2-random", "u2-biinvariant", "abelian3"];

fn args(name: &str, prefix: &str) -> Option<Result<Vec<f64>, CliError>> {
    let inner = name.strip_prefix(prefix)?.strip_prefix('(')?.strip_suffix(')')?;
    Some(
        inner
            .split(',')
            .map(|s| {
                s.trim().parse::<f64>().map_err(|_| CliError::Config(format!("preset '{name}': bad argument '{s}'")))
            })
            .collect(),
    )
}

/// Rotation from a uniformly random unit quaternion.
fn random_rotation(rng: &mut ChaCha8Rng) -> Matrix3<f64> {
    let q = loop {
        let q: [f64; 4] = std::array::from_fn(|_| rng.gen_range(-1.0..1.0));
        let n2: f64 = q.iter().map(|v| v * v).sum();
        if n2 > 1e-4 && n2 <= 1.0 {
            break q.map(|v| v / n2.sqrt());
        }
    };
    let [w, x, y, z] = q;
    Matrix3::new(
        1.0 - 2.0 * (y * y + z * z),
        2.0 * (x * y - w * z),
        2.0 * (x * z + w * y),
        2.0 * (x * y + w * z),
        1.0 - 2.0 * (x * x + z * z),
        2.0 * (y * z - w * x),
        2.0 * (x * z - w * y),
        2.0 * (y * z + w * x),
        1.0 - 2.0 * (x * x + y * y),
    )
}

pub fn group_metric(name: &str, rng: &mut ChaCha8Rng) -> Result<LeftInvariantMetric, CliError> {
    match name {
        "su2-biinvariant" => return Ok(LeftInvariantMetric::bi_invariant(StructureConstants::su2())),
        "u2-biinvariant" => {
            let g = StructureConstants::su2().direct_sum(&StructureConstants::abelian(1));
            return Ok(LeftInvariantMetric::bi_invariant(g));
        }
        "abelian3" => return Ok(LeftInvariantMetric::bi_invariant(StructureConstants::abelian(3))),
        "su2-random" => {
            let d = Matrix3::from_diagonal(&scalab::nalgebra::Vector3::from_fn(|_, _| {
                (rng.gen_range(0.2f64.ln()..5f64.ln())).exp()
            }));
            let r = random_rotation(rng);
            let p = r * d * r.transpose();
            let p = DMatrix::from_fn(3, 3, |i, j| 0.5 * (p[(i, j)] + p[(j, i)]));
            return Ok(LeftInvariantMetric::new(StructureConstants::su2(), p)?);
        }
        _ => {}
    }
    if let Some(a) = args(name, "su2-berger") {
        let a = a?;
        if a.len() != 1 {
            return Err(CliError::Config(format!("preset '{name}' takes one argument")));
        }
        return Ok(LeftInvariantMetric::su2_berger(a[0])?);
    }
    if let Some(a) = args(name, "su2-diag") {
        let a = a?;
        if a.len() != 3 {
            return Err(CliError::Config(format!("preset '{name}' takes three arguments")));
        }
        return Ok(LeftInvariantMetric::diagonal(StructureConstants::su2(), &a)?);
    }
    Err(CliError::Config(format!(
        "unknown group preset '{name}' for cheeger (expected one of {})",
        GROUP_PRESETS.join(", ")
    )))
}

pub const SUBMERSION_PRESETS: &[&str] = &["flat-round", "negative-round", "hopf", "random"];

fn sym2(v: f64) -> DMatrix<f64> {
    DMatrix::from_row_slice(2, 2, &[0.0, v, v, 0.0])
}

pub fn submersion(name: &str, rng: &mut ChaCha8Rng) -> Result<SubmersionPointData, CliError> {
    let d = match name {
        // flat base times the unit S²
        "flat-round" => SubmersionPointData::product(DMatrix::zeros(2, 2), 2, 2.0)?,
        // base with scal -4 times the unit S²
        "negative-round" => SubmersionPointData::product(sym2(-2.0), 2, 2.0)?,
        // unit S³ over S²(1/2), circle fibers
        "hopf" => SubmersionPointData::new(sym2(4.0), sym2(1.0), DMatrix::from_element(2, 1, 1.0), 1, 0.0)?,
        "random" => {
            let base = sym2(rng.gen_range(-3.0..1.0));
            let tot = sym2(rng.gen_range(-1.0..1.0));
            let mixed = DMatrix::from_fn(2, 2, |_, _| rng.gen_range(0.0..1.0));
            SubmersionPointData::new(base, tot, mixed, 2, rng.gen_range(0.5..3.0))?
        }
        _ => {
            return Err(CliError::Config(format!(
                "unknown submersion preset '{name}' for canonical (expected one of {})",
                SUBMERSION_PRESETS.join(", ")
            )))
        }
    };
    Ok(d)
}
