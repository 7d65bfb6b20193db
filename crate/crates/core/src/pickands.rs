//! Pickands dependence functions.
//!
//! A dependence function `A` on `[0, 1]` is convex with
//! `max(t, 1 - t) <= A(t) <= 1`. The orientation used throughout the crate is
//! `A(t) = -ln C(exp(-(1 - t)), exp(-t))`.

use std::fmt;
use std::io::{Read, Write};

use crate::error::{check_range, Error, Result};

/// Grid resolution used by [`DependenceFunction::validate`].
pub const VALIDATION_GRID: usize = 2048;
/// Absolute tolerance of every validation check.
pub const VALIDATION_TOL: f64 = 1e-9;

/// Parametric family backing a [`DependenceFunction`].
#[derive(Debug, Clone, PartialEq)]
pub enum Family {
    /// `A(t) = 1 - min(beta t, alpha (1 - t))`.
    MarshallOlkin { alpha: f64, beta: f64 },
    /// `A(t) = ((1 - t)^theta + t^theta)^(1/theta)`.
    Gumbel { theta: f64 },
    /// `A(t) = max(1 - t, t, (1 - a)(1 - t) + (1 - b) t)`.
    Pareto { a: f64, b: f64 },
    /// Linear interpolation of `(t, A(t))` knots.
    PiecewiseLinear { knots: Vec<(f64, f64)> },
    /// Convex combination of dependence functions.
    Mixture {
        components: Vec<(f64, DependenceFunction)>,
    },
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Family::MarshallOlkin { alpha, beta } => {
                write!(f, "marshall-olkin(alpha={alpha}, beta={beta})")
            }
            Family::Gumbel { theta } => write!(f, "gumbel(theta={theta})"),
            Family::Pareto { a, b } => write!(f, "pareto(a={a}, b={b})"),
            Family::PiecewiseLinear { knots } => {
                write!(f, "piecewise-linear({} knots)", knots.len())
            }
            Family::Mixture { components } => {
                write!(f, "mixture(")?;
                for (i, (w, d)) in components.iter().enumerate() {
                    if i > 0 {
                        write!(f, " + ")?;
                    }
                    write!(f, "{w}*{}", d.family)?;
                }
                write!(f, ")")
            }
        }
    }
}

/// A point where the one-sided derivatives of `A` differ.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Kink {
    pub t: f64,
    pub left_slope: f64,
    pub right_slope: f64,
}

impl Kink {
    /// Mass of the atom of `dA'` at this point.
    pub fn jump(&self) -> f64 {
        self.right_slope - self.left_slope
    }
}

/// Breakpoints and segment slopes of a piecewise-linear `A`.
#[derive(Debug, Clone, PartialEq)]
struct Pieces {
    breaks: Vec<f64>,
    slopes: Vec<f64>,
}

impl Pieces {
    fn deriv_right(&self, t: f64) -> f64 {
        self.slopes[self.breaks.partition_point(|&b| b <= t)]
    }

    fn deriv_left(&self, t: f64) -> f64 {
        self.slopes[self.breaks.partition_point(|&b| b < t)]
    }

    fn kinks(&self) -> Vec<Kink> {
        self.breaks
            .iter()
            .enumerate()
            .filter(|&(i, _)| self.slopes[i] != self.slopes[i + 1])
            .map(|(i, &t)| Kink {
                t,
                left_slope: self.slopes[i],
                right_slope: self.slopes[i + 1],
            })
            .collect()
    }
}

/// A validated Pickands dependence function. Immutable once built.
#[derive(Debug, Clone, PartialEq)]
pub struct DependenceFunction {
    family: Family,
    pieces: Option<Pieces>,
    kinks: Vec<Kink>,
}

impl DependenceFunction {
    /// `A = 1`, the independence copula.
    pub fn independence() -> Self {
        mo_dependence(0.0, 0.0).expect("valid parameters")
    }

    pub fn family(&self) -> &Family {
        &self.family
    }

    /// Interior points where `A'` jumps, sorted by `t`.
    pub fn kinks(&self) -> &[Kink] {
        &self.kinks
    }

    pub fn kink_points(&self) -> Vec<f64> {
        self.kinks.iter().map(|k| k.t).collect()
    }

    /// `true` when `A` is linear between its kinks.
    pub fn is_piecewise_linear(&self) -> bool {
        match &self.family {
            Family::Gumbel { theta } => *theta == 1.0,
            Family::Mixture { components } => {
                components.iter().all(|(_, d)| d.is_piecewise_linear())
            }
            _ => true,
        }
    }

    pub fn eval(&self, t: f64) -> f64 {
        let t = t.clamp(0.0, 1.0);
        match &self.family {
            Family::MarshallOlkin { alpha, beta } => 1.0 - (beta * t).min(alpha * (1.0 - t)),
            Family::Gumbel { theta } => gumbel_a(*theta, t),
            Family::Pareto { a, b } => (1.0 - t).max(t).max((1.0 - a) * (1.0 - t) + (1.0 - b) * t),
            Family::PiecewiseLinear { knots } => interpolate(knots, t),
            Family::Mixture { components } => components.iter().map(|(w, d)| w * d.eval(t)).sum(),
        }
    }

    /// Right derivative `A'(t+)`.
    pub fn deriv_right(&self, t: f64) -> f64 {
        match (&self.family, &self.pieces) {
            (_, Some(p)) => p.deriv_right(t),
            (Family::Gumbel { theta }, None) => gumbel_deriv(*theta, t),
            (Family::Mixture { components }, None) => {
                components.iter().map(|(w, d)| w * d.deriv_right(t)).sum()
            }
            _ => unreachable!("piecewise-linear families carry pieces"),
        }
    }

    /// Left derivative `A'(t-)`.
    pub fn deriv_left(&self, t: f64) -> f64 {
        match (&self.family, &self.pieces) {
            (_, Some(p)) => p.deriv_left(t),
            (Family::Gumbel { theta }, None) => gumbel_deriv(*theta, t),
            (Family::Mixture { components }, None) => {
                components.iter().map(|(w, d)| w * d.deriv_left(t)).sum()
            }
            _ => unreachable!("piecewise-linear families carry pieces"),
        }
    }

    /// `A''(t)` where `A` is twice differentiable; `None` on kinks and at the
    /// endpoints.
    pub fn second_deriv(&self, t: f64) -> Option<f64> {
        if !(t > 0.0 && t < 1.0) || self.kinks.iter().any(|k| k.t == t) {
            return None;
        }
        match &self.family {
            Family::Gumbel { theta } => Some(gumbel_second_deriv(*theta, t)),
            Family::Mixture { components } => components
                .iter()
                .map(|(w, d)| d.second_deriv(t).map(|v| w * v))
                .sum(),
            _ => Some(0.0),
        }
    }

    /// Checks the defining constraints on a [`VALIDATION_GRID`] grid plus all
    /// kinks, and that slopes are nondecreasing across every kink.
    pub fn validate(&self) -> ValidationReport {
        let kinks = self.kink_points();
        let mut report = validate_with_points(|t| self.eval(t), VALIDATION_GRID, &kinks);
        if let Some(p) = &self.pieces {
            for (i, w) in p.slopes.windows(2).enumerate() {
                if w[1] < w[0] - VALIDATION_TOL {
                    report.push(p.breaks[i], Constraint::SlopeOrder, w[0] - w[1]);
                }
            }
        } else {
            for k in self.kinks.iter().filter(|k| k.jump() < -VALIDATION_TOL) {
                report.push(k.t, Constraint::SlopeOrder, -k.jump());
            }
        }
        report
    }

    /// Knots reproducing `A`: exact for piecewise-linear functions, a 1024
    /// interval sampling (plus kinks) otherwise.
    pub fn to_knots(&self) -> Vec<(f64, f64)> {
        if let Family::PiecewiseLinear { knots } = &self.family {
            return knots.clone();
        }
        let mut ts = vec![0.0, 1.0];
        ts.extend(self.breaks());
        if !self.is_piecewise_linear() {
            ts.extend((1..1024).map(|i| i as f64 / 1024.0));
        }
        ts.sort_by(f64::total_cmp);
        ts.dedup();
        ts.into_iter().map(|t| (t, self.eval(t))).collect()
    }

    fn breaks(&self) -> Vec<f64> {
        match (&self.family, &self.pieces) {
            (_, Some(p)) => p.breaks.clone(),
            (Family::Mixture { components }, None) => {
                components.iter().flat_map(|(_, d)| d.breaks()).collect()
            }
            _ => Vec::new(),
        }
    }

    fn from_pieces(family: Family, pieces: Pieces) -> Self {
        let kinks = pieces.kinks();
        Self {
            family,
            pieces: Some(pieces),
            kinks,
        }
    }
}

fn interpolate(knots: &[(f64, f64)], t: f64) -> f64 {
    let i = knots.partition_point(|&(x, _)| x <= t);
    if i == 0 {
        return knots[0].1;
    }
    if i == knots.len() {
        return knots[knots.len() - 1].1;
    }
    let (x0, y0) = knots[i - 1];
    let (x1, y1) = knots[i];
    y0 + (y1 - y0) * (t - x0) / (x1 - x0)
}

// Gumbel helpers work with m = max(t, 1 - t) and r = min / max so that large
// theta never underflows.
fn gumbel_split(t: f64) -> (f64, f64) {
    let s = 1.0 - t;
    let (m, n) = if t >= s { (t, s) } else { (s, t) };
    (m, n / m)
}

fn gumbel_a(theta: f64, t: f64) -> f64 {
    if theta == 1.0 {
        return 1.0;
    }
    let (m, r) = gumbel_split(t);
    m * (r.powf(theta).ln_1p() / theta).exp()
}

fn gumbel_deriv(theta: f64, t: f64) -> f64 {
    if theta == 1.0 {
        return 0.0;
    }
    let (_, r) = gumbel_split(t);
    let sign = if t >= 0.5 { 1.0 } else { -1.0 };
    let rt = r.powf(theta);
    sign * (1.0 + rt).powf(1.0 / theta - 1.0) * (1.0 - r.powf(theta - 1.0))
}

fn gumbel_second_deriv(theta: f64, t: f64) -> f64 {
    if theta == 1.0 {
        return 0.0;
    }
    let (m, r) = gumbel_split(t);
    (theta - 1.0) * r.powf(theta - 2.0) * (1.0 + r.powf(theta)).powf(1.0 / theta - 2.0)
        / (m * m * m)
}

/// Marshall-Olkin dependence function `1 - min(beta t, alpha (1 - t))`.
pub fn mo_dependence(alpha: f64, beta: f64) -> Result<DependenceFunction> {
    check_range("alpha", alpha, 0.0, 1.0, "0 <= alpha <= 1")?;
    check_range("beta", beta, 0.0, 1.0, "0 <= beta <= 1")?;
    let pieces = if alpha == 0.0 || beta == 0.0 {
        Pieces {
            breaks: vec![],
            slopes: vec![0.0],
        }
    } else {
        Pieces {
            breaks: vec![alpha / (alpha + beta)],
            slopes: vec![-beta, alpha],
        }
    };
    Ok(DependenceFunction::from_pieces(
        Family::MarshallOlkin { alpha, beta },
        pieces,
    ))
}

/// Gumbel dependence function; `theta = 1` is independence.
pub fn gumbel_dependence(theta: f64) -> Result<DependenceFunction> {
    check_range("theta", theta, 1.0, f64::MAX, "finite theta >= 1")?;
    let pieces = (theta == 1.0).then(|| Pieces {
        breaks: vec![],
        slopes: vec![0.0],
    });
    Ok(DependenceFunction {
        family: Family::Gumbel { theta },
        pieces,
        kinks: Vec::new(),
    })
}

/// Abscissae `(t_P, t_Q)` where the line `(1 - a)(1 - t) + (1 - b) t` meets
/// `1 - t` and `t`. Both equal `1/2` when `a + b = 1`.
pub fn pareto_abscissae(a: f64, b: f64) -> (f64, f64) {
    if a + b >= 1.0 - 1e-15 {
        return (0.5, 0.5);
    }
    let nu = a - b;
    (a / (1.0 + nu), (1.0 - a) / (1.0 - nu))
}

/// Dependence function of `min(u, v, u^(1-a) v^(1-b))`.
pub fn pareto_dependence(a: f64, b: f64) -> Result<DependenceFunction> {
    check_range("a", a, 0.0, 1.0, "a >= 0 and a + b <= 1")?;
    check_range("b", b, 0.0, 1.0, "b >= 0 and a + b <= 1")?;
    if a + b > 1.0 + 1e-12 {
        return Err(Error::ParamOutOfRange {
            name: "a + b",
            value: a + b,
            expected: "a + b <= 1",
        });
    }
    let (tp, tq) = pareto_abscissae(a, b);
    let pieces = if tp == tq {
        Pieces {
            breaks: vec![tp],
            slopes: vec![-1.0, 1.0],
        }
    } else {
        let nu = a - b;
        let mut breaks = Vec::new();
        let mut slopes = Vec::new();
        if tp > 0.0 {
            slopes.push(-1.0);
            breaks.push(tp);
        }
        slopes.push(nu);
        if tq < 1.0 {
            breaks.push(tq);
            slopes.push(1.0);
        }
        Pieces { breaks, slopes }
    };
    Ok(DependenceFunction::from_pieces(
        Family::Pareto { a, b },
        pieces,
    ))
}

/// Piecewise-linear dependence function through `knots`, accepted only if it
/// passes validation.
pub fn piecewise_linear_dependence(knots: Vec<(f64, f64)>) -> Result<DependenceFunction> {
    let mut layout = ValidationReport::default();
    if knots.len() < 2 {
        layout.push(0.0, Constraint::KnotLayout, 1.0);
    } else {
        if knots[0].0 != 0.0 {
            layout.push(knots[0].0, Constraint::KnotLayout, knots[0].0.abs());
        }
        let last = knots[knots.len() - 1].0;
        if last != 1.0 {
            layout.push(last, Constraint::KnotLayout, (last - 1.0).abs());
        }
        for w in knots.windows(2) {
            if !(w[1].0 > w[0].0) {
                layout.push(w[1].0, Constraint::KnotLayout, w[0].0 - w[1].0);
            }
        }
        for &(t, s) in &knots {
            if !t.is_finite() || !s.is_finite() {
                layout.push(t, Constraint::KnotLayout, f64::INFINITY);
            }
        }
    }
    if !layout.valid {
        return Err(Error::InvalidDependenceFunction(layout));
    }

    let breaks = knots[1..knots.len() - 1].iter().map(|k| k.0).collect();
    let slopes = knots
        .windows(2)
        .map(|w| (w[1].1 - w[0].1) / (w[1].0 - w[0].0))
        .collect();
    let d = DependenceFunction::from_pieces(
        Family::PiecewiseLinear { knots },
        Pieces { breaks, slopes },
    );
    let report = d.validate();
    if report.valid {
        Ok(d)
    } else {
        Err(Error::InvalidDependenceFunction(report))
    }
}

/// Convex combination `sum w_i A_i`. Weights must be nonnegative with a
/// positive sum; they are normalised to sum to one.
pub fn mixture_dependence(
    components: Vec<(f64, DependenceFunction)>,
) -> Result<DependenceFunction> {
    let total: f64 = components.iter().map(|(w, _)| *w).sum();
    for (w, _) in &components {
        check_range("weight", *w, 0.0, f64::MAX, "nonnegative weight")?;
    }
    if !(total > 0.0) {
        return Err(Error::ParamOutOfRange {
            name: "weights",
            value: total,
            expected: "positive total weight",
        });
    }
    let components: Vec<_> = components
        .into_iter()
        .filter(|(w, _)| *w > 0.0)
        .map(|(w, d)| (w / total, d))
        .collect();

    let mut ts: Vec<f64> = components
        .iter()
        .flat_map(|(_, d)| d.kink_points())
        .collect();
    ts.sort_by(f64::total_cmp);
    ts.dedup();

    let mut d = DependenceFunction {
        family: Family::Mixture { components },
        pieces: None,
        kinks: Vec::new(),
    };
    d.kinks = ts
        .into_iter()
        .map(|t| Kink {
            t,
            left_slope: d.deriv_left(t),
            right_slope: d.deriv_right(t),
        })
        .filter(|k| k.left_slope != k.right_slope)
        .collect();
    Ok(d)
}

/// Support line `(1 - a)(1 - t) + (1 - b) t` of `A` at `t = 1/2`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TangentParams {
    pub a: f64,
    pub b: f64,
}

/// Tangent of `A` at `1/2`, with `a + b = 2 (1 - A(1/2))`.
///
/// At a kink the slope is the midpoint of the subdifferential, clipped so that
/// `a, b >= 0`.
pub fn tangent_at_half(dep: &DependenceFunction) -> TangentParams {
    let lambda = (2.0 * (1.0 - dep.eval(0.5))).clamp(0.0, 1.0);
    let slope = (0.5 * (dep.deriv_left(0.5) + dep.deriv_right(0.5))).clamp(-lambda, lambda);
    TangentParams {
        a: (0.5 * (lambda + slope)).max(0.0),
        b: (0.5 * (lambda - slope)).max(0.0),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Constraint {
    KnotLayout,
    Endpoint,
    LowerEnvelope,
    UpperEnvelope,
    Convexity,
    SlopeOrder,
}

impl fmt::Display for Constraint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Constraint::KnotLayout => "knots must start at t=0, end at t=1 and increase strictly",
            Constraint::Endpoint => "A(0) = A(1) = 1",
            Constraint::LowerEnvelope => "A(t) >= max(t, 1-t)",
            Constraint::UpperEnvelope => "A(t) <= 1",
            Constraint::Convexity => "midpoint convexity",
            Constraint::SlopeOrder => "nondecreasing slopes",
        };
        f.write_str(s)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Violation {
    pub t: f64,
    pub constraint: Constraint,
    pub magnitude: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ValidationReport {
    pub valid: bool,
    pub violations: Vec<Violation>,
}

impl Default for ValidationReport {
    fn default() -> Self {
        Self {
            valid: true,
            violations: Vec::new(),
        }
    }
}

impl ValidationReport {
    fn push(&mut self, t: f64, constraint: Constraint, magnitude: f64) {
        self.valid = false;
        self.violations.push(Violation {
            t,
            constraint,
            magnitude,
        });
    }

    pub fn worst(&self) -> Option<&Violation> {
        self.violations
            .iter()
            .max_by(|a, b| a.magnitude.total_cmp(&b.magnitude))
    }
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.worst() {
            None => write!(f, "valid"),
            Some(v) => write!(
                f,
                "{} violation(s); worst: {} at t = {} (by {:.3e})",
                self.violations.len(),
                v.constraint,
                v.t,
                v.magnitude
            ),
        }
    }
}

/// Checks a candidate `A` sampled on a uniform grid of `grid_size` intervals.
pub fn validate<F: Fn(f64) -> f64>(a: F, grid_size: usize) -> ValidationReport {
    validate_with_points(a, grid_size, &[])
}

/// Like [`validate`], additionally checking the envelope and local convexity
/// at each of `extra` (typically kinks).
pub fn validate_with_points<F: Fn(f64) -> f64>(
    a: F,
    grid_size: usize,
    extra: &[f64],
) -> ValidationReport {
    let n = grid_size.max(3);
    let tol = VALIDATION_TOL;
    let mut report = ValidationReport::default();

    for t in [0.0, 1.0] {
        let dev = (a(t) - 1.0).abs();
        if !(dev <= tol) {
            report.push(t, Constraint::Endpoint, dev);
        }
    }

    let h = 1.0 / n as f64;
    let values: Vec<f64> = (0..=n).map(|i| a(i as f64 * h)).collect();
    let check_envelope = |t: f64, v: f64, report: &mut ValidationReport| {
        let floor = t.max(1.0 - t);
        if !(v >= floor - tol) {
            report.push(t, Constraint::LowerEnvelope, floor - v);
        }
        if !(v <= 1.0 + tol) {
            report.push(t, Constraint::UpperEnvelope, v - 1.0);
        }
    };
    for (i, &v) in values.iter().enumerate() {
        check_envelope(i as f64 * h, v, &mut report);
    }
    for i in 1..n {
        let excess = values[i] - 0.5 * (values[i - 1] + values[i + 1]);
        if !(excess <= tol) {
            report.push(i as f64 * h, Constraint::Convexity, excess);
        }
    }
    for &t in extra {
        let v = a(t);
        check_envelope(t, v, &mut report);
        let w = h.min(t).min(1.0 - t);
        if w > 0.0 {
            let excess = v - 0.5 * (a(t - w) + a(t + w));
            if !(excess <= tol) {
                report.push(t, Constraint::Convexity, excess);
            }
        }
    }
    report
}

/// Reads `t,A` knots from CSV with a mandatory header row.
pub fn read_knots_csv<R: Read>(reader: R) -> Result<Vec<(f64, f64)>> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(true)
        .trim(csv::Trim::All)
        .from_reader(reader);
    let headers = rdr.headers()?.clone();
    if headers.len() != 2 || &headers[0] != "t" || &headers[1] != "A" {
        return Err(Error::Parse(format!(
            "expected header `t,A`, found `{}`",
            headers.iter().collect::<Vec<_>>().join(",")
        )));
    }
    let mut knots = Vec::new();
    for (line, rec) in rdr.records().enumerate() {
        let rec = rec?;
        let field = |i: usize| -> Result<f64> {
            rec.get(i)
                .and_then(|s| s.parse::<f64>().ok())
                .ok_or_else(|| Error::Parse(format!("row {}: bad number", line + 2)))
        };
        knots.push((field(0)?, field(1)?));
    }
    Ok(knots)
}

pub fn write_knots_csv<W: Write>(writer: W, knots: &[(f64, f64)]) -> Result<()> {
    let mut w = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(writer);
    w.write_record(["t", "A"])?;
    for &(t, s) in knots {
        w.write_record([format!("{t:.16e}"), format!("{s:.16e}")])?;
    }
    w.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn mo_examples() {
        let d = mo_dependence(0.5, 0.5).unwrap();
        assert_eq!(d.eval(0.5), 0.75);
        assert_eq!(d.kinks().len(), 1);
        assert_eq!(d.kinks()[0].t, 0.5);

        for (alpha, beta) in [(0.0, 0.7), (0.4, 0.0), (0.0, 0.0)] {
            let d = mo_dependence(alpha, beta).unwrap();
            assert!(d.kinks().is_empty());
            for i in 0..=10 {
                assert_eq!(d.eval(i as f64 / 10.0), 1.0);
            }
        }
        assert_eq!(mo_dependence(1.0, 1.0).unwrap().eval(0.5), 0.5);
        assert!(matches!(
            mo_dependence(1.2, 0.3),
            Err(Error::ParamOutOfRange { .. })
        ));
        assert!(mo_dependence(-0.1, 0.3).is_err());
    }

    #[test]
    fn mo_kink_location_and_slopes() {
        let d = mo_dependence(0.7, 0.2).unwrap();
        let k = d.kinks()[0];
        assert!((k.t - 0.7 / 0.9).abs() < 1e-15);
        assert_eq!(k.left_slope, -0.2);
        assert_eq!(k.right_slope, 0.7);
        assert_eq!(d.deriv_left(k.t), -0.2);
        assert_eq!(d.deriv_right(k.t), 0.7);
        assert_eq!(d.second_deriv(k.t), None);
        assert_eq!(d.second_deriv(0.3), Some(0.0));
    }

    #[test]
    fn gumbel_examples() {
        let d = gumbel_dependence(1.0).unwrap();
        assert!((0..=20).all(|i| d.eval(i as f64 / 20.0) == 1.0));
        let theta = 1.0 / (1.5f64).log2();
        let d = gumbel_dependence(theta).unwrap();
        assert!((d.eval(0.5) - 0.75).abs() < 1e-15);
        let d = gumbel_dependence(1.710).unwrap();
        assert!((d.eval(0.5) - 2f64.powf(1.0 / 1.710 - 1.0)).abs() < 1e-15);
        assert!((d.eval(0.5) - 0.75).abs() < 5e-4);
        let d = gumbel_dependence(1e4).unwrap();
        assert!((d.eval(0.5) - 0.5).abs() < 1e-4);
        assert!(gumbel_dependence(0.9).is_err());
        assert!(gumbel_dependence(f64::INFINITY).is_err());
    }

    #[test]
    fn gumbel_matches_direct_formula_and_finite_differences() {
        for theta in [1.3, 2.0, 5.5, 40.0] {
            let d = gumbel_dependence(theta).unwrap();
            for i in 1..100 {
                let t = i as f64 / 100.0;
                let direct = ((1.0 - t).powf(theta) + t.powf(theta)).powf(1.0 / theta);
                assert!((d.eval(t) - direct).abs() < 1e-14);
                let h = 1e-6;
                let fd = (d.eval(t + h) - d.eval(t - h)) / (2.0 * h);
                assert!((d.deriv_right(t) - fd).abs() < 1e-6, "theta={theta} t={t}");
                let fd2 = (d.deriv_right(t + h) - d.deriv_right(t - h)) / (2.0 * h);
                let a2 = d.second_deriv(t).unwrap();
                assert!(
                    (a2 - fd2).abs() < 1e-5 * (1.0 + a2.abs()),
                    "theta={theta} t={t}"
                );
            }
        }
    }

    /// Intersection of two lines `y = c0 + c1 t` by Cramer's rule.
    fn intersect(l1: (f64, f64), l2: (f64, f64)) -> f64 {
        (l2.0 - l1.0) / (l1.1 - l2.1)
    }

    #[test]
    fn pareto_abscissae_match_line_intersections() {
        for (a, b) in [(0.25, 0.25), (0.5, 0.0), (0.1, 0.3), (0.05, 0.6)] {
            let tangent = (1.0 - a, a - b);
            let tp = intersect(tangent, (1.0, -1.0));
            let tq = intersect(tangent, (0.0, 1.0));
            let (p, q) = pareto_abscissae(a, b);
            assert!((p - tp).abs() < 1e-15 && (q - tq).abs() < 1e-15, "{a} {b}");
        }
        let (p, q) = pareto_abscissae(0.25, 0.25);
        assert_eq!((p, q), (0.25, 0.75));
        let (p, q) = pareto_abscissae(0.5, 0.0);
        assert!((p - 1.0 / 3.0).abs() < 1e-16);
        assert_eq!(q, 1.0);
    }

    #[test]
    fn pareto_examples() {
        let d = pareto_dependence(0.25, 0.25).unwrap();
        assert_eq!(d.eval(0.5), 0.75);
        assert_eq!(d.kink_points(), vec![0.25, 0.75]);
        let d = pareto_dependence(0.5, 0.0).unwrap();
        assert_eq!(d.kinks().len(), 1);
        let d = pareto_dependence(0.0, 0.0).unwrap();
        assert!(d.kinks().is_empty());
        assert!((0..=10).all(|i| d.eval(i as f64 / 10.0) == 1.0));
        let d = pareto_dependence(1.0, 0.0).unwrap();
        assert_eq!(d.kink_points(), vec![0.5]);
        assert_eq!(d.eval(0.5), 0.5);
        assert!(pareto_dependence(0.7, 0.4).is_err());
        assert!(pareto_dependence(-0.1, 0.4).is_err());
    }

    #[test]
    fn piecewise_linear_examples() {
        let d = piecewise_linear_dependence(vec![(0.0, 1.0), (0.5, 0.75), (1.0, 1.0)]).unwrap();
        let mo = mo_dependence(0.5, 0.5).unwrap();
        for i in 0..=100 {
            let t = i as f64 / 100.0;
            assert!((d.eval(t) - mo.eval(t)).abs() < 1e-15);
        }
        assert_eq!(d.kinks(), mo.kinks());

        let err =
            piecewise_linear_dependence(vec![(0.0, 1.0), (0.5, 0.4), (1.0, 1.0)]).unwrap_err();
        match err {
            Error::InvalidDependenceFunction(r) => {
                assert!(r
                    .violations
                    .iter()
                    .any(|v| v.constraint == Constraint::LowerEnvelope))
            }
            e => panic!("unexpected {e}"),
        }

        // Slopes -1/3, -1/4, 2/3 are nondecreasing: a valid convex function.
        let d = piecewise_linear_dependence(vec![(0.0, 1.0), (0.3, 0.9), (0.7, 0.8), (1.0, 1.0)])
            .unwrap();
        assert_eq!(d.kinks().len(), 2);

        // Concave bump.
        assert!(
            piecewise_linear_dependence(vec![(0.0, 1.0), (0.3, 0.7), (0.6, 0.9), (1.0, 1.0)])
                .is_err()
        );
    }

    #[test]
    fn piecewise_linear_layout_errors() {
        for knots in [
            vec![(0.0, 1.0)],
            vec![(0.1, 1.0), (1.0, 1.0)],
            vec![(0.0, 1.0), (0.9, 0.95)],
            vec![(0.0, 1.0), (0.5, 0.8), (0.5, 0.8), (1.0, 1.0)],
            vec![(0.0, 1.0), (0.5, f64::NAN), (1.0, 1.0)],
        ] {
            assert!(matches!(
                piecewise_linear_dependence(knots),
                Err(Error::InvalidDependenceFunction(_))
            ));
        }
    }

    #[test]
    fn validate_examples() {
        assert!(mo_dependence(0.7, 0.2).unwrap().validate().valid);
        assert!(gumbel_dependence(2.0).unwrap().validate().valid);
        let r = validate(|t| 1.0 - 3.0 * t * (1.0 - t), 2048);
        assert!(!r.valid);
        let at_half = r.violations.iter().find(|v| v.t == 0.5).unwrap();
        assert_eq!(at_half.constraint, Constraint::LowerEnvelope);
        assert!((at_half.magnitude - 0.25).abs() < 1e-12);
        // max(t, 1-t) - A(t) peaks at t = 1/3 and 2/3 with value 1/3.
        let w = r.worst().unwrap();
        assert!((w.t - 1.0 / 3.0).abs() < 1e-3 || (w.t - 2.0 / 3.0).abs() < 1e-3);
        assert!((w.magnitude - 1.0 / 3.0).abs() < 1e-6);
        // Endpoint failure.
        assert!(!validate(|_| 0.9, 16).valid);
    }

    #[test]
    fn tangent_examples() {
        let t = tangent_at_half(&mo_dependence(0.5, 0.5).unwrap());
        assert_eq!((t.a, t.b), (0.25, 0.25));
        let d = gumbel_dependence(1.710).unwrap();
        let t = tangent_at_half(&d);
        let lambda = 2.0 * (1.0 - d.eval(0.5));
        assert!((t.a - t.b).abs() < 1e-15);
        assert!((t.a + t.b - lambda).abs() < 1e-12);
        assert!((t.a - 0.25).abs() < 5e-4);
        let t = tangent_at_half(&DependenceFunction::independence());
        assert_eq!((t.a, t.b), (0.0, 0.0));
    }

    #[test]
    fn tangent_at_asymmetric_kink_uses_subdifferential_midpoint() {
        // Kink at 1/2 with slopes -0.2 and 0.4, so the midpoint slope is 0.1.
        let d = piecewise_linear_dependence(vec![(0.0, 1.0), (0.25, 0.85), (0.5, 0.8), (1.0, 1.0)])
            .unwrap();
        let t = tangent_at_half(&d);
        assert!((t.a - 0.25).abs() < 1e-12);
        assert!((t.b - 0.15).abs() < 1e-12);
    }

    #[test]
    fn mixture_kinks_and_validity() {
        let d = mixture_dependence(vec![
            (1.0, mo_dependence(0.8, 0.3).unwrap()),
            (1.0, gumbel_dependence(3.0).unwrap()),
            (2.0, pareto_dependence(0.1, 0.4).unwrap()),
        ])
        .unwrap();
        assert!(d.validate().valid);
        assert_eq!(d.kinks().len(), 3);
        let t = 0.4;
        let expect = 0.25 * mo_dependence(0.8, 0.3).unwrap().eval(t)
            + 0.25 * gumbel_dependence(3.0).unwrap().eval(t)
            + 0.5 * pareto_dependence(0.1, 0.4).unwrap().eval(t);
        assert!((d.eval(t) - expect).abs() < 1e-15);
        assert!(!d.is_piecewise_linear());
        assert!(mixture_dependence(vec![]).is_err());
        assert!(mixture_dependence(vec![(-1.0, DependenceFunction::independence())]).is_err());
    }

    #[test]
    fn knots_csv_round_trip_and_header() {
        let d = pareto_dependence(0.2, 0.1).unwrap();
        let mut buf = Vec::new();
        write_knots_csv(&mut buf, &d.to_knots()).unwrap();
        assert!(buf.starts_with(b"t,A\n"));
        let knots = read_knots_csv(buf.as_slice()).unwrap();
        let back = piecewise_linear_dependence(knots).unwrap();
        for i in 0..=64 {
            let t = i as f64 / 64.0;
            assert!((back.eval(t) - d.eval(t)).abs() < 1e-15);
        }
        assert!(read_knots_csv("x,y\n0,1\n1,1\n".as_bytes()).is_err());
        assert!(read_knots_csv("t,A\n0,abc\n".as_bytes()).is_err());
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(1000))]

        #[test]
        fn families_are_valid(alpha in 0.0f64..=1.0, beta in 0.0f64..=1.0, theta in 1.0f64..60.0, w in 0.0f64..=1.0) {
            prop_assert!(mo_dependence(alpha, beta).unwrap().validate().valid);
            prop_assert!(gumbel_dependence(theta).unwrap().validate().valid);
            let (a, b) = (alpha * w, (1.0 - alpha) * w * beta);
            prop_assert!(pareto_dependence(a, b).unwrap().validate().valid);
        }
    }

    proptest! {
        #[test]
        fn mo_matches_closed_form(alpha in 0.0f64..=1.0, beta in 0.0f64..=1.0, t in 0.0f64..=1.0) {
            let d = mo_dependence(alpha, beta).unwrap();
            prop_assert_eq!(d.eval(t), 1.0 - (beta * t).min(alpha * (1.0 - t)));
        }

        #[test]
        fn pareto_matches_three_line_max(a in 0.0f64..=1.0, frac in 0.0f64..=1.0, t in 0.0f64..=1.0) {
            let b = (1.0 - a) * frac;
            let d = pareto_dependence(a, b).unwrap();
            let direct = (1.0 - t).max(t).max((1.0 - a) * (1.0 - t) + (1.0 - b) * t);
            prop_assert!((d.eval(t) - direct).abs() <= 1e-15);
            // The piecewise description agrees with the closed form.
            let (tp, tq) = pareto_abscissae(a, b);
            let piecewise = if t < tp { 1.0 - t } else if t < tq { (1.0 - a) * (1.0 - t) + (1.0 - b) * t } else { t };
            prop_assert!((d.eval(t) - piecewise).abs() <= 1e-15);
        }

        #[test]
        fn tangent_is_a_lower_support(alpha in 0.0f64..=1.0, beta in 0.0f64..=1.0, theta in 1.0f64..30.0, pick in 0usize..3) {
            let d = match pick {
                0 => mo_dependence(alpha, beta).unwrap(),
                1 => gumbel_dependence(theta).unwrap(),
                _ => pareto_dependence(alpha * 0.5, beta * 0.5).unwrap(),
            };
            let tp = tangent_at_half(&d);
            prop_assert!(tp.a >= 0.0 && tp.b >= 0.0);
            prop_assert!((tp.a + tp.b - 2.0 * (1.0 - d.eval(0.5))).abs() <= 1e-12);
            for i in 0..=256 {
                let t = i as f64 / 256.0;
                prop_assert!(d.eval(t) >= (1.0 - tp.a) * (1.0 - t) + (1.0 - tp.b) * t - 1e-12);
            }
        }

        #[test]
        fn symmetric_families_are_symmetric(alpha in 0.0f64..=1.0, theta in 1.0f64..50.0, t in 0.0f64..=1.0) {
            for d in [
                mo_dependence(alpha, alpha).unwrap(),
                gumbel_dependence(theta).unwrap(),
                pareto_dependence(alpha * 0.5, alpha * 0.5).unwrap(),
            ] {
                prop_assert!((d.eval(t) - d.eval(1.0 - t)).abs() <= 1e-15);
            }
        }
    }
}
