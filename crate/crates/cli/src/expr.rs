//! Functions of `r` given as expressions or sample files.

use std::path::Path;

use exmex::Express;

pub type RealFn = Box<dyn Fn(f64) -> f64>;

/// Compile an expression in `r` such as `6*(1+0.1*sin(r))` or `1 + r^2`.
/// The usual elementary functions and the constants `PI`, `E` are
/// available.
pub fn compile(src: &str) -> Result<RealFn, String> {
    let expr = exmex::parse::<f64>(src).map_err(|e| format!("cannot parse expression '{src}': {e}"))?;
    let vars = expr.var_names().to_vec();
    if let Some(v) = vars.iter().find(|v| v.as_str() != "r") {
        return Err(format!("expression '{src}': unknown variable '{v}' (only r is allowed)"));
    }
    let uses_r = !vars.is_empty();
    let f = move |r: f64| {
        let args: &[f64] = if uses_r { &[r] } else { &[] };
        expr.eval(args).unwrap_or(f64::NAN)
    };
    for probe in [0.0, 0.5, 1.0] {
        if !f(probe).is_finite() {
            return Err(format!("expression '{src}' is not finite at r = {probe}"));
        }
    }
    Ok(Box::new(f))
}

/// Periodic piecewise-linear interpolant of `r value` samples, one pair per
/// line, separated by whitespace or a comma. `#` starts a comment.
pub fn from_samples(text: &str, period: f64) -> Result<RealFn, String> {
    let mut pts: Vec<(f64, f64)> = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let cols: Vec<&str> = line.split(|c: char| c == ',' || c.is_whitespace()).filter(|s| !s.is_empty()).collect();
        if cols.len() != 2 {
            return Err(format!("line {}: expected two columns", i + 1));
        }
        let parse = |s: &str| s.parse::<f64>().map_err(|_| format!("line {}: cannot parse '{s}'", i + 1));
        let (r, v) = (parse(cols[0])?, parse(cols[1])?);
        if !(r.is_finite() && v.is_finite()) {
            return Err(format!("line {}: non-finite sample", i + 1));
        }
        pts.push((r.rem_euclid(period), v));
    }
    if pts.len() < 2 {
        return Err("need at least two samples".to_string());
    }
    pts.sort_by(|a, b| a.0.total_cmp(&b.0));
    if pts.windows(2).any(|w| w[0].0 == w[1].0) {
        return Err("duplicate sample positions".to_string());
    }
    Ok(Box::new(move |r: f64| {
        let x = r.rem_euclid(period);
        let i = pts.partition_point(|p| p.0 <= x);
        let (a, b) = match i {
            0 => {
                let (r1, v1) = pts[pts.len() - 1];
                ((r1 - period, v1), pts[0])
            }
            i if i == pts.len() => {
                let (r0, v0) = pts[0];
                (pts[i - 1], (r0 + period, v0))
            }
            i => (pts[i - 1], pts[i]),
        };
        a.1 + (b.1 - a.1) * (x - a.0) / (b.0 - a.0)
    }))
}

/// A path to an existing file is read as samples, anything else is
/// compiled as an expression.
pub fn expr_or_file(src: &str, period: f64) -> Result<RealFn, String> {
    let path = Path::new(src);
    if path.is_file() {
        let text = std::fs::read_to_string(path).map_err(|e| format!("cannot read {src}: {e}"))?;
        from_samples(&text, period).map_err(|e| format!("{src}: {e}"))
    } else {
        compile(src)
    }
}
