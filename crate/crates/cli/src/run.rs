//! The six commands. Each writes its artifacts, reads them back, and
//! computes the numbers in the report from what was read.

use std::f64::consts::TAU;
use std::fmt;
use std::fs;
use std::io;
use std::path::Path;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use scalab::canonical_variation::{cv_scal, cv_sectional, positivity_threshold, Plane, Threshold};
use scalab::cheeger::{asymptotic_slope, pinching_limit, scal_cheeger, OrbitData};
use scalab::kazdan_warner::{
    approximate_by_diffeo, full_prescribe, ApproxProblem, DiagonalMetric, NewtonConfig, PrescribeConfig,
};
use scalab::models::scal_warped;
use scalab::yamabe::{
    classify_conformal_class, conformal_scal, el_residual, minimize_on_constraint, solve_negative_constant,
    ConformalProblem, NegativeConfig, SolverConfig, CLASSIFY_TOL,
};
use scalab::WarpedProductMetric;

use crate::config::{Command, ScenarioConfig};
use crate::expr;
use crate::output::{column, emit_csv, emit_dat, fmt_f64, read_csv, Report};
use crate::presets::{self, WarpedSpec};

#[derive(Debug)]
pub enum CliError {
    Config(String),
    Io(String),
    Core(scalab::Error),
}

impl CliError {
    /// 2 precondition rejection, 3 solver failure, 4 I/O or configuration.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Core(scalab::Error::Precondition { .. }) => 2,
            CliError::Core(scalab::Error::NonConvergence { .. } | scalab::Error::Numerical { .. }) => 3,
            _ => 4,
        }
    }

    pub fn status(&self) -> &'static str {
        match self.exit_code() {
            2 => "rejected",
            3 => "failed",
            _ => "error",
        }
    }

    pub fn condition(&self) -> Option<&str> {
        match self {
            CliError::Core(scalab::Error::Precondition { condition, .. }) => Some(condition),
            _ => None,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Config(m) => write!(f, "configuration: {m}"),
            CliError::Io(m) => write!(f, "i/o: {m}"),
            CliError::Core(e) => write!(f, "{e}"),
        }
    }
}

impl std::error::Error for CliError {}

impl From<scalab::Error> for CliError {
    fn from(e: scalab::Error) -> Self {
        CliError::Core(e)
    }
}

impl From<io::Error> for CliError {
    fn from(e: io::Error) -> Self {
        CliError::Io(e.to_string())
    }
}

fn sup(v: impl IntoIterator<Item = f64>) -> f64 {
    v.into_iter().fold(0.0, |m, x| m.max(x.abs()))
}

fn min_max(v: &[f64]) -> (f64, f64) {
    v.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), x| (a.min(*x), b.max(*x)))
}

fn write_model(dir: &Path, m: &WarpedProductMetric) -> Result<(), CliError> {
    let scal = scal_warped(m);
    let rows: Vec<Vec<f64>> =
        m.mesh().nodes().iter().zip(m.warping()).zip(&scal).map(|((r, f), s)| vec![*r, *f, *s]).collect();
    emit_csv(&dir.join("model.csv"), &["r", "f", "scal"], &rows)?;
    emit_dat(&dir.join("plotdata/scal.dat"), m.mesh().nodes(), &scal)?;
    Ok(())
}

/// The metric as stored in `model.csv`.
fn read_model(dir: &Path, spec: &WarpedSpec) -> Result<WarpedProductMetric, CliError> {
    let table = read_csv(&dir.join("model.csv"))?;
    presets::warped_from_samples(spec, column(&table, "f")?)
}

fn warped(cfg: &ScenarioConfig) -> Result<(WarpedSpec, WarpedProductMetric), CliError> {
    let spec = presets::warped_spec(cfg)?;
    let m = presets::build_warped(&spec, cfg.n)?;
    write_model(&cfg.outdir, &m)?;
    let m = read_model(&cfg.outdir, &spec)?;
    Ok((spec, m))
}

fn classify(cfg: &ScenarioConfig, rep: &mut Report) -> Result<(), CliError> {
    let (_, m) = warped(cfg)?;
    let class = classify_conformal_class(&m, cfg.tol.unwrap_or(CLASSIFY_TOL))?;
    let (lo, hi) = min_max(&scal_warped(&m));
    rep.put("verdict", class.verdict);
    rep.num("lambda1", class.lambda1);
    rep.num("scal_min", lo);
    rep.num("scal_max", hi);
    Ok(())
}

fn yamabe(cfg: &ScenarioConfig, rep: &mut Report) -> Result<(), CliError> {
    let (_, m) = warped(cfg)?;
    let (u, constant) = if cfg.yamabe_negative {
        if let Some(c) = cfg.yamabe_c {
            if !(c > 0.0) {
                return Err(CliError::Config(format!("yamabe.c must be > 0 (scal ≡ -c), got {c}")));
            }
        }
        let defaults = NegativeConfig::default();
        let ncfg = NegativeConfig {
            c: cfg.yamabe_c,
            tol_residual: cfg.tol.unwrap_or(defaults.tol_residual),
            max_iter: cfg.max_iter.unwrap_or(defaults.max_iter),
            ..defaults
        };
        let (sol, c) = solve_negative_constant(&m, &ncfg)?;
        rep.put("mode", "negative");
        rep.num("solver.lambda", sol.lambda);
        rep.num("solver.c_prime", -c);
        rep.put("solver.iterations", sol.iterations);
        rep.num("solver.residual_norm", sol.residual_norm);
        (sol.u, -c)
    } else {
        let c = cfg.yamabe_c.unwrap_or(6.0);
        if !(c > 0.0) {
            return Err(CliError::Config(format!(
                "yamabe.c must be > 0 for the positive solver, got {c}; set yamabe.negative for scal ≡ -c"
            )));
        }
        let defaults = SolverConfig::default();
        let scfg = SolverConfig {
            tol_residual: cfg.tol.unwrap_or(defaults.tol_residual),
            max_iter: cfg.max_iter.unwrap_or(defaults.max_iter),
            ..defaults
        };
        let sol = minimize_on_constraint(&ConformalProblem::new(m.clone(), c, 1.0)?, &scfg)?;
        rep.put("mode", "positive");
        rep.num("solver.lambda", sol.lambda);
        rep.num("solver.one_plus_lambda", 1.0 + sol.lambda);
        rep.num("solver.c_prime", sol.c_prime);
        rep.put("solver.iterations", sol.iterations);
        rep.num("solver.residual_norm", sol.residual_norm);
        (sol.u, sol.c_prime)
    };

    let scal_out = conformal_scal(&m, &u)?;
    let nodes = m.mesh().nodes();
    let rows: Vec<Vec<f64>> = (0..u.len()).map(|j| vec![nodes[j], u[j], scal_out[j]]).collect();
    let path = cfg.outdir.join("solution.csv");
    emit_csv(&path, &["r", "u", "scal_out"], &rows)?;
    emit_dat(&cfg.outdir.join("plotdata/u.dat"), nodes, &u)?;
    emit_dat(&cfg.outdir.join("plotdata/scal_out.dat"), nodes, &scal_out)?;

    let table = read_csv(&path)?;
    let u = column(&table, "u")?;
    let scal = conformal_scal(&m, &u)?;
    let vol_u: Vec<f64> = u.iter().map(|a| a.powf(2.0 * m.dim() as f64 / (m.dim() as f64 - 2.0))).collect();
    let weighted: Vec<f64> = scal.iter().zip(&vol_u).map(|(s, w)| s * w).collect();
    let mean = m.mesh().integrate(&weighted)? / m.mesh().integrate(&vol_u)?;
    let p = ConformalProblem::new(m.clone(), constant.abs(), 1.0)?;
    let (umin, umax) = min_max(&u);
    rep.num("u_min", umin);
    rep.num("u_max", umax);
    rep.num("scal_mean", mean);
    rep.num("scal_deviation", sup(scal.iter().map(|s| s - constant)));
    rep.num("el_residual_sup", sup(el_residual(&p, &u, constant)?));
    Ok(())
}

fn prescribe(cfg: &ScenarioConfig, rep: &mut Report) -> Result<(), CliError> {
    let (spec, m) = warped(cfg)?;
    let f = expr::expr_or_file(&cfg.prescribe_target, spec.length)
        .map_err(|e| CliError::Config(format!("prescribe.target: {e}")))?;
    let defaults = NewtonConfig::default();
    let pcfg = PrescribeConfig {
        tau: cfg.prescribe_eps / 10.0,
        newton: NewtonConfig {
            tol: cfg.tol.unwrap_or(defaults.tol),
            max_iter: cfg.max_iter.unwrap_or(defaults.max_iter),
            ..defaults
        },
        ..PrescribeConfig::default()
    };
    let out = full_prescribe(&m, &*f, &pcfg)?;

    let nodes = m.mesh().nodes();
    let (phi, dphi) = out.phi.sample(nodes);
    let rows: Vec<Vec<f64>> = (0..nodes.len())
        .map(|j| {
            vec![
                nodes[j],
                phi[j],
                dphi[j],
                out.pushed_nodes[j],
                out.scal_base[j],
                out.u[j],
                out.metric.p[j],
                out.metric.q[j],
                out.scal_out[j],
                out.target[j],
            ]
        })
        .collect();
    let path = cfg.outdir.join("prescribe.csv");
    let header = ["r", "phi", "phi_prime", "s", "scal_base", "u", "p", "q", "scal_out", "target"];
    emit_csv(&path, &header, &rows)?;
    emit_dat(&cfg.outdir.join("plotdata/phi.dat"), nodes, &phi)?;
    emit_dat(&cfg.outdir.join("plotdata/scal_out.dat"), &out.pushed_nodes, &out.scal_out)?;
    emit_dat(&cfg.outdir.join("plotdata/target.dat"), &out.pushed_nodes, &out.target)?;

    let table = read_csv(&path)?;
    let s = column(&table, "s")?;
    let base = column(&table, "scal_base")?;
    let fs: Vec<f64> = s.iter().map(|&x| f(x)).collect();
    let c = out.c;
    let rebuilt = DiagonalMetric {
        length: spec.length,
        k: spec.k,
        c_f: spec.c_f,
        p: column(&table, "p")?,
        q: column(&table, "q")?,
    };
    let scal = rebuilt.scal();
    let gap: Vec<f64> = fs.iter().zip(&base).map(|(a, b)| a - b / c).collect();
    rep.num("c", c);
    rep.put("perturbed", out.perturbed);
    rep.num("stage.approx.deviation", c * sup(gap.iter().copied()));
    rep.num("stage.approx.lp_error", m.mesh().weighted_lp_norm(&gap, cfg.prescribe_p)?);
    rep.num("stage.newton.residual", c * sup(scal.iter().zip(&fs).map(|(a, b)| a - b)));
    rep.num("residual", sup(scal.iter().zip(&fs).map(|(a, b)| a - b)));
    rep.num("phi_prime_min", min_max(&column(&table, "phi_prime")?).0);
    match &out.newton {
        Some(n) => {
            rep.put("solver.newton_iterations", n.iterations);
            let h: Vec<String> = n.history.iter().map(|v| fmt_f64(*v)).collect();
            rep.put("solver.newton_history", h.join(" "));
            rep.num("solver.kernel_singular", n.kernel_singular);
        }
        None => rep.put("solver.newton_iterations", 0),
    }
    Ok(())
}

fn cheeger(cfg: &ScenarioConfig, rep: &mut Report) -> Result<(), CliError> {
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let metric = presets::group_metric(&cfg.preset, &mut rng)?;
    let o = OrbitData::homogeneous(&metric);
    let limit = pinching_limit(&[(o.clone(), None)])?;
    let predicted = asymptotic_slope(&o, None)?;
    let steps = cfg.cheeger_steps;
    let (lo, hi) = (1e-3f64.ln(), cfg.cheeger_t_max.max(2e-3).ln());
    let mut rows = Vec::with_capacity(steps);
    for i in 0..steps {
        let t = (lo + (hi - lo) * i as f64 / (steps - 1) as f64).exp();
        let s = scal_cheeger(&o, None, t)?;
        rows.push(vec![t, s, s / t, predicted, s / t / predicted]);
    }
    let path = cfg.outdir.join("cheeger.csv");
    emit_csv(&path, &["t", "scal", "scal_over_t", "predicted_limit", "ratio"], &rows)?;

    let table = read_csv(&path)?;
    let (t, s, ratio) = (column(&table, "t")?, column(&table, "scal")?, column(&table, "ratio")?);
    emit_dat(&cfg.outdir.join("plotdata/scal.dat"), &t, &s)?;
    emit_dat(&cfg.outdir.join("plotdata/ratio.dat"), &t, &ratio)?;
    let onset = (0..t.len()).find(|&i| s[i..].iter().all(|v| *v > 0.0)).map(|i| t[i]);
    rep.num("scal_initial", scal_cheeger(&o, None, 0.0)?);
    rep.num("predicted_limit", predicted);
    rep.num("pinching_limit", limit);
    rep.num("final_t", t[t.len() - 1]);
    rep.num("final_ratio", ratio[ratio.len() - 1]);
    match onset {
        Some(t0) => rep.num("positivity_onset", t0),
        None => rep.put("positivity_onset", "none"),
    }
    Ok(())
}

fn canonical(cfg: &ScenarioConfig, rep: &mut Report) -> Result<(), CliError> {
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let d = presets::submersion(&cfg.preset, &mut rng)?;
    let (lo, hi, steps) = cfg.canonical_sweep;
    let (n, k) = (d.base_dim(), d.fiber_dim());
    let mut rows = Vec::with_capacity(steps);
    for i in 0..steps {
        let s = lo + (hi - lo) * i as f64 / (steps - 1) as f64;
        let mut hh = Vec::new();
        let mut hv = Vec::new();
        for a in 0..n {
            for b in 0..n {
                if a != b {
                    hh.push(cv_sectional(&d, s, Plane::Horizontal(a, b))?);
                }
            }
            for v in 0..k {
                hv.push(cv_sectional(&d, s, Plane::Mixed(a, v))?);
            }
        }
        let vv =
            if k >= 2 { cv_sectional(&d, s, Plane::Vertical(d.fiber_scal / (k * (k - 1)) as f64))? } else { f64::NAN };
        let (hh_lo, hh_hi) = min_max(&hh);
        let (hv_lo, hv_hi) = min_max(&hv);
        rows.push(vec![s, cv_scal(&d, s)?, hh_lo, hh_hi, hv_lo, hv_hi, vv]);
    }
    let path = cfg.outdir.join("canonical.csv");
    emit_csv(&path, &["s", "scal", "hh_min", "hh_max", "hv_min", "hv_max", "vv"], &rows)?;

    let table = read_csv(&path)?;
    let (s, scal) = (column(&table, "s")?, column(&table, "scal")?);
    emit_dat(&cfg.outdir.join("plotdata/scal.dat"), &s, &scal)?;
    let (smin, smax) = min_max(&scal);
    rep.num("scal_min", smin);
    rep.num("scal_max", smax);
    match scal.iter().position(|v| *v <= 0.0) {
        Some(i) => rep.num("first_nonpositive_s", s[i]),
        None => rep.put("first_nonpositive_s", "none"),
    }
    match positivity_threshold(&d) {
        Ok(Threshold::At(t)) => rep.num("threshold", t),
        Ok(Threshold::Unbounded) => rep.put("threshold", "unbounded"),
        Err(scalab::Error::Precondition { condition, detail }) => {
            rep.put("threshold", "unavailable");
            rep.put("threshold_condition", format!("({condition}) {detail}"));
        }
        Err(e) => return Err(e.into()),
    }
    Ok(())
}

/// `Σ a_m sin(m r + θ_m)` as an expression in `r`.
fn random_trig_expr(rng: &mut ChaCha8Rng, modes: usize, amp: f64) -> String {
    (1..=modes)
        .map(|m| {
            let a = rng.gen_range(-amp..amp) / m as f64;
            let th = rng.gen_range(0.0..TAU);
            format!("({a:?})*sin({m}*r+({th:?}))")
        })
        .collect::<Vec<_>>()
        .join("+")
}

fn approx(cfg: &ScenarioConfig, rep: &mut Report) -> Result<(), CliError> {
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let period = cfg.length.unwrap_or(TAU);
    let f_src = cfg.approx_f.clone().unwrap_or_else(|| random_trig_expr(&mut rng, 3, 1.0));
    let f = expr::expr_or_file(&f_src, period).map_err(|e| CliError::Config(format!("approx.f: {e}")))?;
    let t_src = match &cfg.approx_target {
        Some(t) => t.clone(),
        None => {
            // a single random mode squeezed into the middle of the range of f;
            // a degree-one map cannot follow a target with more oscillation than f
            let grid: Vec<f64> = (0..4096).map(|i| f(period * i as f64 / 4096.0)).collect();
            let (fmin, fmax) = min_max(&grid);
            let h = random_trig_expr(&mut rng, 1, 1.0);
            let hf = expr::compile(&h).map_err(CliError::Config)?;
            let hmax = sup((0..4096).map(|i| hf(period * i as f64 / 4096.0))).max(1e-12);
            format!("({:?})+({:?})*({h})", 0.5 * (fmin + fmax), 0.4 * (fmax - fmin) / hmax)
        }
    };
    let target = expr::expr_or_file(&t_src, period).map_err(|e| CliError::Config(format!("approx.target: {e}")))?;
    rep.put("f", &f_src);
    rep.put("target", &t_src);

    let one = |_: f64| 1.0;
    let prob = ApproxProblem { f: &*f, target: &*target, weight: &one, period };
    let a = approximate_by_diffeo(&prob, cfg.approx_p, cfg.approx_eps)?;

    let m = 16 * cfg.n;
    let rows: Vec<Vec<f64>> = (0..m)
        .map(|i| {
            let r = period * i as f64 / m as f64;
            let x = a.phi.eval(r);
            vec![r, x, a.phi.derivative(r), f(x.rem_euclid(period)), target(r)]
        })
        .collect();
    let path = cfg.outdir.join("approx.csv");
    emit_csv(&path, &["r", "phi", "phi_prime", "f_of_phi", "target"], &rows)?;

    let table = read_csv(&path)?;
    let (r, phi) = (column(&table, "r")?, column(&table, "phi")?);
    let (fp, tg) = (column(&table, "f_of_phi")?, column(&table, "target")?);
    emit_dat(&cfg.outdir.join("plotdata/phi.dat"), &r, &phi)?;
    emit_dat(&cfg.outdir.join("plotdata/f_of_phi.dat"), &r, &fp)?;
    let p = cfg.approx_p;
    let grid_err =
        (fp.iter().zip(&tg).map(|(a, b)| (a - b).abs().powf(p)).sum::<f64>() * period / m as f64).powf(1.0 / p);
    let monotone = phi.windows(2).all(|w| w[1] > w[0]) && column(&table, "phi_prime")?.iter().all(|v| *v > 0.0);
    rep.num("solver.lp_error", a.error);
    rep.put("solver.cells", a.cells);
    rep.put("solver.transitions", a.phi.transitions());
    rep.num("solver.transition_width", a.phi.transition_width());
    rep.num("solver.winding_number", a.phi.winding_number());
    rep.num("grid_lp_error", grid_err);
    // the CSV grid undersamples narrow transitions, so also integrate on a
    // midpoint grid a few points per transition wide
    let fine = ((4.0 * period / a.phi.transition_width().max(1e-12)).ceil() as usize).clamp(m, 1 << 19);
    let fine_err = ((0..fine)
        .map(|i| {
            let r = period * (i as f64 + 0.5) / fine as f64;
            (f(a.phi.eval(r).rem_euclid(period)) - target(r)).abs().powf(p)
        })
        .sum::<f64>()
        * period
        / fine as f64)
        .powf(1.0 / p);
    rep.num("resolved_lp_error", fine_err);
    rep.put("monotone", monotone);
    Ok(())
}

/// Run one command, writing its artifacts under `cfg.outdir`. The returned
/// report holds the command's results only.
pub fn run_scenario(cfg: &ScenarioConfig) -> Result<Report, CliError> {
    fs::create_dir_all(cfg.outdir.join("plotdata"))?;
    let mut rep = Report::new();
    match cfg.command {
        Command::Classify => classify(cfg, &mut rep)?,
        Command::Yamabe => yamabe(cfg, &mut rep)?,
        Command::Prescribe => prescribe(cfg, &mut rep)?,
        Command::Cheeger => cheeger(cfg, &mut rep)?,
        Command::Canonical => canonical(cfg, &mut rep)?,
        Command::Approx => approx(cfg, &mut rep)?,
    }
    Ok(rep)
}

/// Run and write `report.txt`, plus the wall time in `timing.txt` so the
/// report itself stays reproducible. Returns the process exit code.
pub fn execute(cfg: &ScenarioConfig) -> i32 {
    let start = Instant::now();
    let result = run_scenario(cfg);
    let mut report = Report::new();
    report.put("command", cfg.command);
    let code = match result {
        Ok(r) => {
            report.put("status", "ok");
            for (k, v) in r.entries() {
                report.put(k.clone(), v);
            }
            0
        }
        Err(e) => {
            eprintln!("scalab {}: {e}", cfg.command);
            report.put("status", e.status());
            if let Some(c) = e.condition() {
                report.put("condition", c);
            }
            report.put("message", &e);
            e.exit_code()
        }
    };
    for (k, v) in cfg.echo() {
        report.put(format!("config.{k}"), v);
    }
    let written = fs::create_dir_all(&cfg.outdir)
        .and_then(|_| fs::write(cfg.outdir.join("report.txt"), report.render()))
        .and_then(|_| {
            fs::write(cfg.outdir.join("timing.txt"), format!("wall_seconds = {:.6}\n", start.elapsed().as_secs_f64()))
        });
    match written {
        Ok(()) => code,
        Err(e) => {
            eprintln!("scalab {}: cannot write report in {}: {e}", cfg.command, cfg.outdir.display());
            4
        }
    }
}
