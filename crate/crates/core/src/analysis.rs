//! Fits of Monte-Carlo failure rates.
//!
//! Two models are supported. At low rates, `log p_fail = log A + β·L^δ +
//! α·L^γ·log p`, fitted in stages: a straight line in `log p` per size, then
//! the gradients `G(L) = α·L^γ` and intercepts `I(L) = log A + β·L^δ` across
//! sizes. Near threshold, `p_fail = exp(B0 + B1·x + B2·x²)` with
//! `x = (p − p_th)·L^μ`. All logarithms are natural.

use std::collections::BTreeMap;
use std::fs;
use std::io;
use std::path::Path;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::experiment::{format_g17, SampleStats};

/// Points per size used by [`fit_lowp_lines`].
pub const LOWP_POINTS: usize = 5;

/// Search interval for `δ`.
pub const DELTA_RANGE: (f64, f64) = (0.5, 2.5);

/// Final width of the `δ` bracket; `log A` moves about 30 times as far as `δ`.
pub const GOLDEN_TOLERANCE: f64 = 1e-9;
pub const SIMPLEX_TOLERANCE: f64 = 1e-6;
const SIMPLEX_MAX_ITERATIONS: usize = 20_000;

/// One measured failure rate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DataPoint {
    pub width: u32,
    pub p: f64,
    pub p_fail: f64,
}

impl DataPoint {
    pub fn new(width: u32, p: f64, p_fail: f64) -> Self {
        Self { width, p, p_fail }
    }
}

/// Pools rows that share `(L, p)` by summing their counts, sorted by `(L, p)`.
pub fn points_from_stats(stats: &[SampleStats]) -> Vec<DataPoint> {
    let mut pooled: BTreeMap<(u32, u64), (u64, u64)> = BTreeMap::new();
    for s in stats {
        let e = pooled.entry((s.width, s.p.to_bits())).or_default();
        e.0 += s.samples;
        e.1 += s.failures;
    }
    let mut points: Vec<DataPoint> = pooled
        .into_iter()
        .map(|((width, p), (samples, failures))| {
            let p_fail = if samples == 0 {
                0.0
            } else {
                failures as f64 / samples as f64
            };
            DataPoint::new(width, f64::from_bits(p), p_fail)
        })
        .collect();
    sort_points(&mut points);
    points
}

fn sort_points(points: &mut [DataPoint]) {
    points.sort_by(|a, b| a.width.cmp(&b.width).then(a.p.total_cmp(&b.p)));
}

fn by_width(points: &[DataPoint]) -> BTreeMap<u32, Vec<DataPoint>> {
    let mut sorted = points.to_vec();
    sort_points(&mut sorted);
    let mut groups: BTreeMap<u32, Vec<DataPoint>> = BTreeMap::new();
    for pt in sorted {
        groups.entry(pt.width).or_default().push(pt);
    }
    groups
}

/// Drops points whose log is undefined, with a warning for each.
fn loggable(points: Vec<DataPoint>) -> Vec<DataPoint> {
    points
        .into_iter()
        .filter(|pt| {
            let ok = pt.p_fail > 0.0 && pt.p > 0.0;
            if !ok {
                log::warn!(
                    "L={} p={}: no failures, point excluded from the log fit",
                    pt.width,
                    pt.p
                );
            }
            ok
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Line {
    pub slope: f64,
    pub intercept: f64,
}

/// Ordinary least squares `y ≈ intercept + slope·x`.
pub fn least_squares_line(x: &[f64], y: &[f64]) -> Result<Line> {
    assert_eq!(x.len(), y.len());
    let n = x.len() as f64;
    if x.len() < 2 {
        return Err(Error::Fit(format!("a line needs two points, got {}", x.len())));
    }
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxx: f64 = x.iter().map(|a| (a - mx) * (a - mx)).sum();
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    if sxx == 0.0 {
        return Err(Error::Fit("all abscissae coincide".into()));
    }
    let slope = sxy / sxx;
    Ok(Line {
        slope,
        intercept: my - slope * mx,
    })
}

fn squared_residual(x: &[f64], y: &[f64], line: Line) -> f64 {
    x.iter()
        .zip(y)
        .map(|(a, b)| (b - line.intercept - line.slope * a).powi(2))
        .sum()
}

/// Straight line of `log p_fail` against `log p` for one size.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LowpLine {
    pub gradient: f64,
    pub intercept: f64,
    pub points: usize,
    pub residual: f64,
}

/// Fits each size over its `count` lowest rates that have failures.
pub fn fit_lowp_lines_with(points: &[DataPoint], count: usize) -> Result<BTreeMap<u32, LowpLine>> {
    if count < 2 {
        return Err(Error::Config(format!("need at least two points per line, got {count}")));
    }
    let mut out = BTreeMap::new();
    for (width, group) in by_width(points) {
        let usable = loggable(group);
        if usable.len() < count {
            return Err(Error::Fit(format!(
                "L={width}: need {count} points with failures, got {}",
                usable.len()
            )));
        }
        let chosen = &usable[..count];
        let x: Vec<f64> = chosen.iter().map(|pt| pt.p.ln()).collect();
        let y: Vec<f64> = chosen.iter().map(|pt| pt.p_fail.ln()).collect();
        let line = least_squares_line(&x, &y)?;
        out.insert(
            width,
            LowpLine {
                gradient: line.slope,
                intercept: line.intercept,
                points: count,
                residual: squared_residual(&x, &y, line),
            },
        );
    }
    if out.is_empty() {
        return Err(Error::Fit("no data".into()));
    }
    Ok(out)
}

pub fn fit_lowp_lines(points: &[DataPoint]) -> Result<BTreeMap<u32, LowpLine>> {
    fit_lowp_lines_with(points, LOWP_POINTS)
}

/// `log G(L) = log α + γ·log L`; returns `(log α, γ)`.
pub fn fit_gamma_alpha(gradients: &[(u32, f64)]) -> Result<(f64, f64)> {
    if gradients.len() < 3 {
        return Err(Error::Fit(format!("need three sizes, got {}", gradients.len())));
    }
    if let Some((l, g)) = gradients.iter().find(|(_, g)| *g <= 0.0) {
        return Err(Error::Fit(format!("L={l}: gradient {g} is not positive")));
    }
    let x: Vec<f64> = gradients.iter().map(|(l, _)| (*l as f64).ln()).collect();
    let y: Vec<f64> = gradients.iter().map(|(_, g)| g.ln()).collect();
    let line = least_squares_line(&x, &y)?;
    Ok((line.intercept, line.slope))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InterceptFit {
    pub log_a: f64,
    pub beta: f64,
    pub delta: f64,
    pub residual: f64,
}

/// `I(L) = log A + β·L^δ`: linear in `(log A, β)` for fixed `δ`, golden
/// section over `δ`.
pub fn fit_intercepts(intercepts: &[(u32, f64)]) -> Result<InterceptFit> {
    if intercepts.len() < 3 {
        return Err(Error::Fit(format!("need three sizes, got {}", intercepts.len())));
    }
    let y: Vec<f64> = intercepts.iter().map(|(_, i)| *i).collect();
    let inner = |delta: f64| -> Option<(Line, f64)> {
        let x: Vec<f64> = intercepts.iter().map(|(l, _)| (*l as f64).powf(delta)).collect();
        let line = least_squares_line(&x, &y).ok()?;
        Some((line, squared_residual(&x, &y, line)))
    };
    let cost = |delta: f64| inner(delta).map_or(f64::INFINITY, |(_, r)| r);
    let (lo, hi) = DELTA_RANGE;
    let delta = golden_section(cost, lo, hi, GOLDEN_TOLERANCE);
    let (line, residual) = inner(delta).ok_or_else(|| Error::Fit("degenerate sizes".into()))?;
    let fit = InterceptFit {
        log_a: line.intercept,
        beta: line.slope,
        delta,
        residual,
    };
    if delta - lo < 2.0 * GOLDEN_TOLERANCE || hi - delta < 2.0 * GOLDEN_TOLERANCE {
        return Err(Error::Fit(format!(
            "δ ran into the search boundary; best candidate log A={}, β={}, δ={}",
            fit.log_a, fit.beta, fit.delta
        )));
    }
    Ok(fit)
}

/// Minimum of a unimodal `f` on `[a, b]`, to interval width `tol`.
pub fn golden_section(f: impl Fn(f64) -> f64, mut a: f64, mut b: f64, tol: f64) -> f64 {
    let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
    let mut c = b - inv_phi * (b - a);
    let mut d = a + inv_phi * (b - a);
    let (mut fc, mut fd) = (f(c), f(d));
    while b - a > tol {
        if fc <= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - inv_phi * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + inv_phi * (b - a);
            fd = f(d);
        }
    }
    (a + b) / 2.0
}

/// Low-rate fit of all five constants.
#[derive(Debug, Clone, PartialEq)]
pub struct AnsatzFit {
    pub a: f64,
    pub alpha: f64,
    pub beta: f64,
    pub gamma: f64,
    pub delta: f64,
    pub log_a: f64,
    pub log_alpha: f64,
    pub per_l: BTreeMap<u32, LowpLine>,
    pub points_used: usize,
    /// Squared log residual of the full model over the points used.
    pub residual: f64,
}

impl AnsatzFit {
    pub fn predict_log(&self, width: u32, p: f64) -> f64 {
        let l = width as f64;
        self.log_a + self.beta * l.powf(self.delta) + self.alpha * l.powf(self.gamma) * p.ln()
    }

    pub fn report(&self) -> FitReport {
        let params = [
            ("A", self.a),
            ("alpha", self.alpha),
            ("beta", self.beta),
            ("gamma", self.gamma),
            ("delta", self.delta),
            ("log_A", self.log_a),
            ("log_alpha", self.log_alpha),
        ];
        let per_l = self
            .per_l
            .iter()
            .map(|(&l, line)| {
                let entry = [
                    ("G", line.gradient),
                    ("I", line.intercept),
                    ("points", line.points as f64),
                    ("residual", line.residual),
                ];
                (l, named(&entry))
            })
            .collect();
        FitReport {
            model: "ansatz".into(),
            params: named(&params),
            per_l,
            points_used: self.points_used,
            residual: self.residual,
        }
    }
}

pub fn fit_ansatz(points: &[DataPoint]) -> Result<AnsatzFit> {
    fit_ansatz_with(points, LOWP_POINTS)
}

pub fn fit_ansatz_with(points: &[DataPoint], count: usize) -> Result<AnsatzFit> {
    let per_l = fit_lowp_lines_with(points, count)?;
    let gradients: Vec<(u32, f64)> = per_l.iter().map(|(&l, f)| (l, f.gradient)).collect();
    let intercepts: Vec<(u32, f64)> = per_l.iter().map(|(&l, f)| (l, f.intercept)).collect();
    let (log_alpha, gamma) = fit_gamma_alpha(&gradients)?;
    let icpt = fit_intercepts(&intercepts)?;
    let mut fit = AnsatzFit {
        a: icpt.log_a.exp(),
        alpha: log_alpha.exp(),
        beta: icpt.beta,
        gamma,
        delta: icpt.delta,
        log_a: icpt.log_a,
        log_alpha,
        per_l,
        points_used: 0,
        residual: 0.0,
    };
    for (width, group) in by_width(points) {
        for pt in loggable(group).into_iter().take(count) {
            fit.residual += (pt.p_fail.ln() - fit.predict_log(width, pt.p)).powi(2);
            fit.points_used += 1;
        }
    }
    Ok(fit)
}

/// Finite-size scaling fit near the crossing.
#[derive(Debug, Clone, PartialEq)]
pub struct ThresholdFit {
    pub p_th: f64,
    pub mu: f64,
    pub b: [f64; 3],
    /// Rate window the data were restricted to.
    pub p_min: f64,
    pub p_max: f64,
    pub per_l: BTreeMap<u32, usize>,
    pub points_used: usize,
    pub residual: f64,
    pub iterations: usize,
}

impl ThresholdFit {
    pub fn scaled(&self, width: u32, p: f64) -> f64 {
        (p - self.p_th) * (width as f64).powf(self.mu)
    }

    pub fn predict_log(&self, width: u32, p: f64) -> f64 {
        let x = self.scaled(width, p);
        self.b[0] + self.b[1] * x + self.b[2] * x * x
    }

    pub fn report(&self) -> FitReport {
        let params = [
            ("p_th", self.p_th),
            ("mu", self.mu),
            ("B0", self.b[0]),
            ("B1", self.b[1]),
            ("B2", self.b[2]),
            ("p_min", self.p_min),
            ("p_max", self.p_max),
        ];
        let per_l = self
            .per_l
            .iter()
            .map(|(&l, &n)| (l, named(&[("points", n as f64)])))
            .collect();
        FitReport {
            model: "threshold".into(),
            params: named(&params),
            per_l,
            points_used: self.points_used,
            residual: self.residual,
        }
    }
}

struct ScalingData {
    log_l: Vec<f64>,
    p: Vec<f64>,
    y: DVector<f64>,
}

impl ScalingData {
    /// Least-squares `(B0, B1, B2)` and the squared residual; `None` when
    /// the design is rank deficient.
    fn solve(&self, p_th: f64, mu: f64) -> Option<([f64; 3], f64)> {
        let x: Vec<f64> = self
            .p
            .iter()
            .zip(&self.log_l)
            .map(|(p, ll)| (p - p_th) * (mu * ll).exp())
            .collect();
        if x.iter().any(|v| !v.is_finite()) {
            return None;
        }
        let design = DMatrix::from_fn(x.len(), 3, |i, j| x[i].powi(j as i32));
        let svd = design.clone().svd(true, true);
        let scale = svd.singular_values.max();
        if svd.rank(scale * 1e-12) < 3 {
            return None;
        }
        let coef = svd.solve(&self.y, scale * 1e-12).ok()?;
        let residual = (&design * &coef - &self.y).norm_squared();
        Some(([coef[0], coef[1], coef[2]], residual))
    }
}

/// Fits the points with `p` inside `window` (inclusive; all points if `None`).
pub fn fit_threshold(points: &[DataPoint], window: Option<(f64, f64)>) -> Result<ThresholdFit> {
    let (p_min, p_max) = window.unwrap_or((f64::NEG_INFINITY, f64::INFINITY));
    if p_min > p_max {
        return Err(Error::Config(format!("empty rate window [{p_min}, {p_max}]")));
    }
    let groups: BTreeMap<u32, Vec<DataPoint>> = by_width(points)
        .into_iter()
        .map(|(l, g)| {
            (
                l,
                loggable(g.into_iter().filter(|pt| pt.p >= p_min && pt.p <= p_max).collect()),
            )
        })
        .filter(|(_, g)| !g.is_empty())
        .collect();
    if groups.len() < 3 {
        return Err(Error::Fit(format!(
            "need three sizes in the window, got {}",
            groups.len()
        )));
    }
    if let Some((l, g)) = groups.iter().find(|(_, g)| g.len() < 4) {
        return Err(Error::Fit(format!(
            "L={l}: need four rates in the window, got {}",
            g.len()
        )));
    }
    let used: Vec<DataPoint> = groups.values().flatten().copied().collect();
    let data = ScalingData {
        log_l: used.iter().map(|pt| (pt.width as f64).ln()).collect(),
        p: used.iter().map(|pt| pt.p).collect(),
        y: DVector::from_iterator(used.len(), used.iter().map(|pt| pt.p_fail.ln())),
    };

    let start_p = match crossing_estimate(&groups) {
        Some(p) => p,
        None => {
            log::warn!("the curves do not cross inside the window; starting from the median rate");
            median(used.iter().map(|pt| pt.p).collect())
        }
    };
    let start = [start_p, 1.0];
    if data.solve(start[0], start[1]).is_none() {
        return Err(Error::Fit("degenerate design matrix at the starting point".into()));
    }
    let cost = |v: [f64; 2]| data.solve(v[0], v[1]).map_or(f64::INFINITY, |(_, r)| r);
    let spread = used.iter().map(|pt| pt.p).fold(f64::NEG_INFINITY, f64::max)
        - used.iter().map(|pt| pt.p).fold(f64::INFINITY, f64::min);
    let step = [(spread / 4.0).max(1e-3), 0.25];
    let nm = nelder_mead(cost, start, step, SIMPLEX_TOLERANCE, SIMPLEX_MAX_ITERATIONS);
    if !nm.converged {
        log::warn!(
            "simplex did not shrink below {SIMPLEX_TOLERANCE} in {} steps",
            nm.iterations
        );
    }
    let [p_th, mu] = nm.best;
    let (b, residual) = data
        .solve(p_th, mu)
        .ok_or_else(|| Error::Fit("degenerate design matrix at the optimum".into()))?;
    let lo = used.iter().map(|pt| pt.p).fold(f64::INFINITY, f64::min);
    let hi = used.iter().map(|pt| pt.p).fold(f64::NEG_INFINITY, f64::max);
    Ok(ThresholdFit {
        p_th,
        mu,
        b,
        p_min: if p_min.is_finite() { p_min } else { lo },
        p_max: if p_max.is_finite() { p_max } else { hi },
        per_l: groups.iter().map(|(&l, g)| (l, g.len())).collect(),
        points_used: used.len(),
        residual,
        iterations: nm.iterations,
    })
}

fn median(mut v: Vec<f64>) -> f64 {
    v.sort_by(f64::total_cmp);
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2]
    } else {
        (v[n / 2 - 1] + v[n / 2]) / 2.0
    }
}

/// Median of the pairwise crossings of consecutive sizes' `log p_fail`
/// curves, linearly interpolated between shared rates.
fn crossing_estimate(groups: &BTreeMap<u32, Vec<DataPoint>>) -> Option<f64> {
    let sizes: Vec<&Vec<DataPoint>> = groups.values().collect();
    let mut crossings = Vec::new();
    for pair in sizes.windows(2) {
        let (small, large) = (pair[0], pair[1]);
        let diff: Vec<(f64, f64)> = small
            .iter()
            .filter_map(|a| {
                large
                    .iter()
                    .find(|b| b.p == a.p)
                    .map(|b| (a.p, a.p_fail.ln() - b.p_fail.ln()))
            })
            .collect();
        for w in diff.windows(2) {
            let ((p0, d0), (p1, d1)) = (w[0], w[1]);
            if d0 == 0.0 {
                crossings.push(p0);
            } else if d0 * d1 < 0.0 {
                crossings.push(p0 + (p1 - p0) * d0 / (d0 - d1));
            }
        }
        if let Some(&(p, d)) = diff.last() {
            if d == 0.0 {
                crossings.push(p);
            }
        }
    }
    (!crossings.is_empty()).then(|| median(crossings))
}

#[derive(Debug, Clone, Copy)]
pub struct Simplex {
    pub best: [f64; 2],
    pub value: f64,
    pub iterations: usize,
    pub converged: bool,
}

/// Nelder–Mead in two dimensions; stops when the simplex diameter drops
/// below `tol`.
pub fn nelder_mead(f: impl Fn([f64; 2]) -> f64, start: [f64; 2], step: [f64; 2], tol: f64, max_iter: usize) -> Simplex {
    let mut pts = [start, [start[0] + step[0], start[1]], [start[0], start[1] + step[1]]];
    let mut vals = pts.map(&f);
    let lerp = |a: [f64; 2], b: [f64; 2], t: f64| [a[0] + t * (b[0] - a[0]), a[1] + t * (b[1] - a[1])];
    let dist = |a: [f64; 2], b: [f64; 2]| (a[0] - b[0]).hypot(a[1] - b[1]);
    let mut iterations = 0;
    loop {
        let mut order = [0, 1, 2];
        order.sort_by(|&i, &j| vals[i].total_cmp(&vals[j]));
        pts = order.map(|i| pts[i]);
        vals = order.map(|i| vals[i]);
        let diameter = dist(pts[0], pts[1]).max(dist(pts[0], pts[2])).max(dist(pts[1], pts[2]));
        if diameter < tol || iterations >= max_iter {
            return Simplex {
                best: pts[0],
                value: vals[0],
                iterations,
                converged: diameter < tol,
            };
        }
        iterations += 1;
        let centroid = lerp(pts[0], pts[1], 0.5);
        let reflected = lerp(centroid, pts[2], -1.0);
        let fr = f(reflected);
        if fr < vals[0] {
            let expanded = lerp(centroid, pts[2], -2.0);
            let fe = f(expanded);
            (pts[2], vals[2]) = if fe < fr { (expanded, fe) } else { (reflected, fr) };
        } else if fr < vals[1] {
            (pts[2], vals[2]) = (reflected, fr);
        } else {
            let (contracted, fc) = if fr < vals[2] {
                let c = lerp(centroid, reflected, 0.5);
                (c, f(c))
            } else {
                let c = lerp(centroid, pts[2], 0.5);
                (c, f(c))
            };
            if fc < vals[2].min(fr) {
                (pts[2], vals[2]) = (contracted, fc);
            } else {
                for i in 1..3 {
                    pts[i] = lerp(pts[0], pts[i], 0.5);
                    vals[i] = f(pts[i]);
                }
            }
        }
    }
}

/// Serialized form of either fit.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitReport {
    pub model: String,
    pub params: BTreeMap<String, f64>,
    #[serde(rename = "per_L")]
    pub per_l: BTreeMap<u32, BTreeMap<String, f64>>,
    pub points_used: usize,
    pub residual: f64,
}

fn named(entries: &[(&str, f64)]) -> BTreeMap<String, f64> {
    entries.iter().map(|&(k, v)| (k.to_string(), v)).collect()
}

/// Compact JSON with every float written to 17 significant digits.
struct G17Formatter;

impl serde_json::ser::Formatter for G17Formatter {
    fn write_f64<W: ?Sized + io::Write>(&mut self, writer: &mut W, value: f64) -> io::Result<()> {
        writer.write_all(format_g17(value).as_bytes())
    }

    fn write_f32<W: ?Sized + io::Write>(&mut self, writer: &mut W, value: f32) -> io::Result<()> {
        self.write_f64(writer, value as f64)
    }
}

impl FitReport {
    pub fn to_json(&self) -> Result<String> {
        let mut buf = Vec::new();
        let mut ser = serde_json::Serializer::with_formatter(&mut buf, G17Formatter);
        self.serialize(&mut ser)?;
        buf.push(b'\n');
        Ok(String::from_utf8(buf).expect("JSON is UTF-8"))
    }

    pub fn from_json(text: &str) -> Result<FitReport> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        fs::write(path, self.to_json()?)?;
        Ok(())
    }
}
