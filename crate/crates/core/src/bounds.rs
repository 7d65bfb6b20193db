//! Bounds for extreme value copulas with a known upper tail coefficient
//! `lambda`, classical rank-correlation regions, and a randomized verification
//! sweep over dependence functions.
//!
//! Pointwise, every such copula lies between the Marshall-Olkin copula with
//! `alpha = beta = lambda` and a member of the family
//! `min(u, v, u^(1-a) v^(1-b))`, `a + b = lambda`, picked by the tangent of
//! `A` at `1/2`. For the coefficients this gives
//!
//! * `3 lambda / (4 - lambda) <= rho <= 1 - 16 ((1 - lambda) / (4 - lambda))^2`
//! * `lambda / (2 - lambda) <= tau <= lambda`

use std::fmt;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::coefficients::{lambda_from_a, rho_numeric, tau_numeric};
use crate::copula::EvCopula;
use crate::error::{check_range, Error, Result};
use crate::pickands::{
    gumbel_dependence, mixture_dependence, mo_dependence, piecewise_linear_dependence,
    tangent_at_half, DependenceFunction, TangentParams,
};

/// Slack allowed between quadrature output and closed-form coefficient bounds.
pub const COEFFICIENT_SLACK: f64 = 1e-7;
/// Slack allowed for pointwise copula envelopes.
pub const ENVELOPE_SLACK: f64 = 1e-9;
/// Slack allowed for the rho/tau inequalities.
pub const INEQUALITY_SLACK: f64 = 1e-9;

/// Lower pointwise bound `min(u^(1-lambda) v, u v^(1-lambda))`.
pub fn pointwise_lower(lambda: f64, u: f64, v: f64) -> Result<f64> {
    check_range("lambda", lambda, 0.0, 1.0, "0 <= lambda <= 1")?;
    check_range("u", u, 0.0, 1.0, "0 <= u <= 1")?;
    check_range("v", v, 0.0, 1.0, "0 <= v <= 1")?;
    Ok((u.powf(1.0 - lambda) * v).min(u * v.powf(1.0 - lambda)))
}

/// Upper pointwise bound `min(u, v, u^(1-a) v^(1-b))`.
pub fn pointwise_upper(a: f64, b: f64, u: f64, v: f64) -> Result<f64> {
    check_range("a", a, 0.0, 1.0, "a >= 0 and a + b <= 1")?;
    check_range("b", b, 0.0, 1.0, "b >= 0 and a + b <= 1")?;
    if a + b > 1.0 + 1e-12 {
        return Err(Error::ParamOutOfRange {
            name: "a + b",
            value: a + b,
            expected: "a + b <= 1",
        });
    }
    check_range("u", u, 0.0, 1.0, "0 <= u <= 1")?;
    check_range("v", v, 0.0, 1.0, "0 <= v <= 1")?;
    Ok(u.min(v).min(u.powf(1.0 - a) * v.powf(1.0 - b)))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EnvelopeCheck {
    pub grid: usize,
    /// Largest `lower - C` over the grid, or 0.
    pub max_lower_violation: f64,
    /// Largest `C - upper` over the grid, or 0.
    pub max_upper_violation: f64,
    pub tangent: TangentParams,
}

impl EnvelopeCheck {
    pub fn passes(&self) -> bool {
        self.max_lower_violation <= ENVELOPE_SLACK && self.max_upper_violation <= ENVELOPE_SLACK
    }
}

/// Compares `C` against both pointwise envelopes on the interior grid
/// `(i / (grid + 1), j / (grid + 1))`, `1 <= i, j <= grid`.
pub fn check_envelope(c: &EvCopula, grid: usize) -> EnvelopeCheck {
    let grid = grid.max(2);
    let lambda = c.tail_coefficient();
    let tangent = tangent_at_half(c.dependence());
    let (a, b) = (tangent.a, tangent.b);
    let step = 1.0 / (grid + 1) as f64;
    let mut lower_v: f64 = 0.0;
    let mut upper_v: f64 = 0.0;
    for i in 1..=grid {
        let u = i as f64 * step;
        for j in 1..=grid {
            let v = j as f64 * step;
            let x = c.eval(u, v);
            let lo = (u.powf(1.0 - lambda) * v).min(u * v.powf(1.0 - lambda));
            let hi = u.min(v).min(u.powf(1.0 - a) * v.powf(1.0 - b));
            lower_v = lower_v.max(lo - x);
            upper_v = upper_v.max(x - hi);
        }
    }
    EnvelopeCheck {
        grid,
        max_lower_violation: lower_v,
        max_upper_violation: upper_v,
        tangent,
    }
}

/// Copula at which an interval endpoint is attained.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Attainer {
    MarshallOlkin { alpha: f64, beta: f64 },
    Pareto { a: f64, b: f64 },
}

impl fmt::Display for Attainer {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Attainer::MarshallOlkin { alpha, beta } => write!(f, "MO alpha={alpha} beta={beta}"),
            Attainer::Pareto { a, b } => write!(f, "Pareto a={a} b={b}"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundsInterval {
    pub lo: f64,
    pub hi: f64,
    pub attained_lo: Attainer,
    pub attained_hi: Attainer,
}

impl BoundsInterval {
    /// Signed distance to the nearest endpoint; negative outside.
    pub fn margin(&self, x: f64) -> f64 {
        (x - self.lo).min(self.hi - x)
    }

    fn attainers(lambda: f64) -> (Attainer, Attainer) {
        (
            Attainer::MarshallOlkin {
                alpha: lambda,
                beta: lambda,
            },
            Attainer::Pareto {
                a: lambda / 2.0,
                b: lambda / 2.0,
            },
        )
    }
}

/// `3 lambda / (4 - lambda) <= rho <= 1 - 16 ((1 - lambda) / (4 - lambda))^2`.
pub fn rho_bounds(lambda: f64) -> Result<BoundsInterval> {
    check_range("lambda", lambda, 0.0, 1.0, "0 <= lambda <= 1")?;
    let (attained_lo, attained_hi) = BoundsInterval::attainers(lambda);
    let r = (1.0 - lambda) / (4.0 - lambda);
    Ok(BoundsInterval {
        lo: 3.0 * lambda / (4.0 - lambda),
        hi: 1.0 - 16.0 * r * r,
        attained_lo,
        attained_hi,
    })
}

/// `lambda / (2 - lambda) <= tau <= lambda`.
pub fn tau_bounds(lambda: f64) -> Result<BoundsInterval> {
    check_range("lambda", lambda, 0.0, 1.0, "0 <= lambda <= 1")?;
    let (attained_lo, attained_hi) = BoundsInterval::attainers(lambda);
    Ok(BoundsInterval {
        lo: lambda / (2.0 - lambda),
        hi: lambda,
        attained_lo,
        attained_hi,
    })
}

/// Attainable `rho` range for a given `tau` over all copulas.
pub fn classical_region(tau: f64) -> (f64, f64) {
    if tau >= 0.0 {
        ((3.0 * tau - 1.0) / 2.0, (1.0 + 2.0 * tau - tau * tau) / 2.0)
    } else {
        ((tau * tau + 2.0 * tau - 1.0) / 2.0, (1.0 + 3.0 * tau) / 2.0)
    }
}

/// Margins of the extreme value inequalities for a `(rho, tau)` pair.
/// Positive margins mean the inequality holds.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InequalityCheck {
    /// `rho - (sqrt(1 + 3 tau) - 1)`.
    pub hutchinson_lai_lower: f64,
    /// `min(1.5 tau, 2 tau - tau^2) - rho`.
    pub hutchinson_lai_upper: f64,
    /// `rho - 3 tau / (2 + tau)`.
    pub trutschnig: f64,
}

impl InequalityCheck {
    pub fn worst(&self) -> f64 {
        self.hutchinson_lai_lower
            .min(self.hutchinson_lai_upper)
            .min(self.trutschnig)
    }

    pub fn passes(&self) -> bool {
        self.worst() >= -INEQUALITY_SLACK
    }
}

pub fn ev_inequalities(rho: f64, tau: f64) -> InequalityCheck {
    InequalityCheck {
        hutchinson_lai_lower: rho - ((1.0 + 3.0 * tau).sqrt() - 1.0),
        hutchinson_lai_upper: (1.5 * tau).min(2.0 * tau - tau * tau) - rho,
        trutschnig: rho - 3.0 * tau / (2.0 + tau),
    }
}

/// Blomqvist's beta of an extreme value copula with tail coefficient `lambda`.
pub fn lambda_blomqvist(lambda: f64) -> Result<f64> {
    check_range("lambda", lambda, 0.0, 1.0, "0 <= lambda <= 1")?;
    Ok(lambda.exp2() - 1.0)
}

/// Inverse of [`lambda_blomqvist`]: `log2(1 + beta)`.
pub fn blomqvist_lambda(beta: f64) -> Result<f64> {
    check_range("beta", beta, 0.0, 1.0, "0 <= beta <= 1")?;
    Ok((1.0 + beta).log2())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum CorpusKind {
    PiecewiseLinear,
    MarshallOlkin,
    Gumbel,
    Mixture,
    /// Supplied by the caller rather than drawn at random.
    Supplied,
}

impl fmt::Display for CorpusKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            CorpusKind::PiecewiseLinear => "piecewise-linear",
            CorpusKind::MarshallOlkin => "marshall-olkin",
            CorpusKind::Gumbel => "gumbel",
            CorpusKind::Mixture => "mixture",
            CorpusKind::Supplied => "supplied",
        })
    }
}

/// Random convex piecewise-linear `A` with 2 to 8 interior kinks.
///
/// Slopes are drawn sorted in `[-1, 1]`, shifted so the function returns to 1
/// at `t = 1`, and rescaled into `[-1, 1]` if the shift pushed any outside.
pub fn random_piecewise_linear<R: Rng + ?Sized>(rng: &mut R) -> DependenceFunction {
    let k = rng.random_range(2..=8usize);
    let mut ts: Vec<f64> = (0..k).map(|_| rng.random_range(0.01..0.99)).collect();
    ts.sort_by(f64::total_cmp);
    ts.dedup();
    let mut edges = vec![0.0];
    edges.extend(&ts);
    edges.push(1.0);

    let mut slopes: Vec<f64> = (0..edges.len() - 1)
        .map(|_| rng.random_range(-1.0..=1.0))
        .collect();
    slopes.sort_by(f64::total_cmp);
    let drift: f64 = slopes
        .iter()
        .zip(edges.windows(2))
        .map(|(s, w)| s * (w[1] - w[0]))
        .sum();
    slopes.iter_mut().for_each(|s| *s -= drift);
    let peak = slopes.iter().fold(0.0f64, |m, s| m.max(s.abs()));
    if peak > 1.0 {
        slopes.iter_mut().for_each(|s| *s /= peak);
    }

    let mut knots = vec![(0.0, 1.0)];
    let mut level = 1.0;
    for (i, &t) in ts.iter().enumerate() {
        level += slopes[i] * (t - edges[i]);
        knots.push((t, level));
    }
    knots.push((1.0, 1.0));
    piecewise_linear_dependence(knots).expect("generator yields convex functions in the band")
}

fn random_of_kind<R: Rng + ?Sized>(kind: CorpusKind, rng: &mut R) -> DependenceFunction {
    match kind {
        CorpusKind::PiecewiseLinear => random_piecewise_linear(rng),
        CorpusKind::MarshallOlkin => {
            mo_dependence(rng.random_range(0.0..=1.0), rng.random_range(0.0..=1.0))
                .expect("parameters in range")
        }
        CorpusKind::Gumbel => {
            gumbel_dependence((rng.random_range(0.0..1.0) * 40f64.ln()).exp()).expect("theta >= 1")
        }
        CorpusKind::Supplied => unreachable!("supplied functions are not generated"),
        CorpusKind::Mixture => {
            let n = rng.random_range(2..=3usize);
            let parts = (0..n)
                .map(|_| {
                    let kind = match rng.random_range(0..3u8) {
                        0 => CorpusKind::PiecewiseLinear,
                        1 => CorpusKind::MarshallOlkin,
                        _ => CorpusKind::Gumbel,
                    };
                    (rng.random_range(0.05..1.0), random_of_kind(kind, rng))
                })
                .collect();
            mixture_dependence(parts).expect("positive weights")
        }
    }
}

#[derive(Debug, Clone)]
pub struct CorpusItem {
    pub index: usize,
    pub kind: CorpusKind,
    pub dependence: DependenceFunction,
}

/// The `index`-th member of the corpus for `seed`. Each member draws from its
/// own ChaCha8 stream, so items do not depend on generation order.
pub fn corpus_item(seed: u64, index: usize) -> CorpusItem {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index as u64);
    let kind = match index % 4 {
        0 => CorpusKind::PiecewiseLinear,
        1 => CorpusKind::MarshallOlkin,
        2 => CorpusKind::Gumbel,
        _ => CorpusKind::Mixture,
    };
    CorpusItem {
        index,
        kind,
        dependence: random_of_kind(kind, &mut rng),
    }
}

pub fn random_corpus(n: usize, seed: u64) -> Vec<CorpusItem> {
    (0..n)
        .into_par_iter()
        .map(|i| corpus_item(seed, i))
        .collect()
}

/// Every bound evaluated for one dependence function.
#[derive(Debug, Clone)]
pub struct ItemReport {
    pub lambda: f64,
    pub rho: f64,
    pub tau: f64,
    pub rho_interval: BoundsInterval,
    pub tau_interval: BoundsInterval,
    pub envelope: EnvelopeCheck,
    pub inequalities: InequalityCheck,
}

impl ItemReport {
    pub fn rho_margin(&self) -> f64 {
        self.rho_interval.margin(self.rho)
    }

    pub fn tau_margin(&self) -> f64 {
        self.tau_interval.margin(self.tau)
    }

    pub fn passes(&self) -> bool {
        self.rho_margin() >= -COEFFICIENT_SLACK
            && self.tau_margin() >= -COEFFICIENT_SLACK
            && self.envelope.passes()
            && self.inequalities.passes()
    }
}

pub fn check_dependence(dep: &DependenceFunction, grid: usize) -> Result<ItemReport> {
    let lambda = lambda_from_a(dep);
    let rho = rho_numeric(dep)?;
    let tau = tau_numeric(dep)?;
    Ok(ItemReport {
        lambda,
        rho,
        tau,
        rho_interval: rho_bounds(lambda)?,
        tau_interval: tau_bounds(lambda)?,
        envelope: check_envelope(&EvCopula::new(dep.clone()), grid),
        inequalities: ev_inequalities(rho, tau),
    })
}

/// Worst observed margins for one family in a sweep.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FamilySummary {
    pub kind: CorpusKind,
    pub count: usize,
    pub min_rho_margin: f64,
    pub min_tau_margin: f64,
    pub max_envelope_violation: f64,
    pub min_inequality_margin: f64,
}

#[derive(Debug, Clone)]
pub struct SweepReport {
    pub items: Vec<(CorpusItem, ItemReport)>,
    pub families: Vec<FamilySummary>,
}

impl SweepReport {
    pub fn failures(&self) -> impl Iterator<Item = &(CorpusItem, ItemReport)> {
        self.items.iter().filter(|(_, r)| !r.passes())
    }

    pub fn passes(&self) -> bool {
        self.failures().next().is_none()
    }
}

/// Checks every bound on each item; item order is preserved regardless of
/// how the work is scheduled.
pub fn verify_items(items: Vec<CorpusItem>, grid: usize) -> Result<SweepReport> {
    let reports: Vec<ItemReport> = items
        .par_iter()
        .map(|it| check_dependence(&it.dependence, grid))
        .collect::<Result<_>>()?;
    let items: Vec<_> = items.into_iter().zip(reports).collect();

    let mut kinds: Vec<CorpusKind> = items.iter().map(|(it, _)| it.kind).collect();
    kinds.sort();
    kinds.dedup();
    let families = kinds
        .into_iter()
        .map(|kind| {
            let mut s = FamilySummary {
                kind,
                count: 0,
                min_rho_margin: f64::INFINITY,
                min_tau_margin: f64::INFINITY,
                max_envelope_violation: 0.0,
                min_inequality_margin: f64::INFINITY,
            };
            for (_, r) in items.iter().filter(|(it, _)| it.kind == kind) {
                s.count += 1;
                s.min_rho_margin = s.min_rho_margin.min(r.rho_margin());
                s.min_tau_margin = s.min_tau_margin.min(r.tau_margin());
                s.max_envelope_violation = s
                    .max_envelope_violation
                    .max(r.envelope.max_lower_violation)
                    .max(r.envelope.max_upper_violation);
                s.min_inequality_margin = s.min_inequality_margin.min(r.inequalities.worst());
            }
            s
        })
        .collect();
    Ok(SweepReport { items, families })
}

/// Randomized sweep of `n` corpus members.
pub fn verify_corpus(n: usize, seed: u64, grid: usize) -> Result<SweepReport> {
    verify_items(random_corpus(n, seed), grid)
}
