//! Sampling from extreme value copulas and empirical dependence estimates.
//!
//! Samples are produced in chunks of [`CHUNK`] pairs; chunk `k` draws from
//! stream `k` of a ChaCha8 generator seeded with the batch seed, so a batch is
//! bit-identical for a given `(seed, generator, n)` however the chunks are
//! scheduled.

use std::fmt;
use std::io::{Read, Write};

use rand::distr::Open01;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::copula::EvCopula;
use crate::error::{check_range, Error, Result};
use crate::numerics::invert_monotone_cdf;

pub const CHUNK: usize = 4096;
pub const DEFAULT_LAMBDA_THRESHOLDS: [f64; 3] = [0.90, 0.95, 0.99];

#[derive(Debug, Clone, PartialEq)]
pub enum Generator {
    Independence,
    /// Exponential shock construction for Marshall-Olkin copulas.
    MarshallOlkinShock {
        alpha: f64,
        beta: f64,
    },
    /// Conditional inversion `v = (dC/du)^-1(u, p)`.
    ConditionalInversion {
        family: String,
    },
    /// Pairs read from outside.
    External,
}

impl fmt::Display for Generator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Generator::Independence => f.write_str("independence"),
            Generator::MarshallOlkinShock { alpha, beta } => {
                write!(f, "mo-shock(alpha={alpha}, beta={beta})")
            }
            Generator::ConditionalInversion { family } => {
                write!(f, "conditional-inversion({family})")
            }
            Generator::External => f.write_str("external"),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SampleBatch {
    pub pairs: Vec<(f64, f64)>,
    pub seed: u64,
    pub generator: Generator,
    pub n: usize,
}

impl SampleBatch {
    pub fn from_pairs(pairs: Vec<(f64, f64)>) -> Self {
        SampleBatch {
            n: pairs.len(),
            pairs,
            seed: 0,
            generator: Generator::External,
        }
    }

    pub fn us(&self) -> impl Iterator<Item = f64> + '_ {
        self.pairs.iter().map(|p| p.0)
    }

    pub fn vs(&self) -> impl Iterator<Item = f64> + '_ {
        self.pairs.iter().map(|p| p.1)
    }
}

fn chunk_rng(seed: u64, chunk: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(chunk as u64);
    rng
}

fn chunked<F>(n: usize, seed: u64, draw: F) -> Result<Vec<(f64, f64)>>
where
    F: Fn(&mut ChaCha8Rng) -> Result<(f64, f64)> + Sync,
{
    let chunks = n.div_ceil(CHUNK);
    let parts: Vec<Vec<(f64, f64)>> = (0..chunks)
        .into_par_iter()
        .map(|k| {
            let mut rng = chunk_rng(seed, k);
            let len = CHUNK.min(n - k * CHUNK);
            (0..len).map(|_| draw(&mut rng)).collect()
        })
        .collect::<Result<_>>()?;
    Ok(parts.concat())
}

fn check_count(n: usize) -> Result<()> {
    if n == 0 {
        return Err(Error::ParamOutOfRange {
            name: "n",
            value: 0.0,
            expected: "n >= 1",
        });
    }
    Ok(())
}

/// Independent uniform pairs.
pub fn sample_independence(n: usize, seed: u64) -> Result<SampleBatch> {
    check_count(n)?;
    let pairs = chunked(n, seed, |rng| Ok((rng.sample(Open01), rng.sample(Open01))))?;
    Ok(SampleBatch {
        pairs,
        seed,
        generator: Generator::Independence,
        n,
    })
}

/// Exact Marshall-Olkin sampling from three unit exponential shocks.
///
/// With rates `l1 = (1 - alpha) / alpha`, `l2 = (1 - beta) / beta` and a
/// common shock of rate 1, `X = min(E1 / l1, E12)` and
/// `Y = min(E2 / l2, E12)` have survival copula `MO(alpha, beta)`; the pair
/// returned is `(exp(-X / alpha), exp(-Y / beta))`. A zero parameter gives
/// the independence copula and is sampled as such.
pub fn sample_mo(alpha: f64, beta: f64, n: usize, seed: u64) -> Result<SampleBatch> {
    check_range("alpha", alpha, 0.0, 1.0, "0 <= alpha <= 1")?;
    check_range("beta", beta, 0.0, 1.0, "0 <= beta <= 1")?;
    if alpha == 0.0 || beta == 0.0 {
        return sample_independence(n, seed);
    }
    check_count(n)?;
    let l1 = (1.0 - alpha) / alpha;
    let l2 = (1.0 - beta) / beta;
    let exp1 = |rng: &mut ChaCha8Rng| -> f64 { -rng.sample::<f64, _>(Open01).ln() };
    let pairs = chunked(n, seed, |rng| {
        let (e1, e2, e12) = (exp1(rng), exp1(rng), exp1(rng));
        let x = (e1 / l1).min(e12);
        let y = (e2 / l2).min(e12);
        Ok(((-x / alpha).exp(), (-y / beta).exp()))
    })?;
    Ok(SampleBatch {
        pairs,
        seed,
        generator: Generator::MarshallOlkinShock { alpha, beta },
        n,
    })
}

/// Conditional-inversion sampler for any extreme value copula. Jumps in
/// `dC/du` are resolved by the generalized inverse, so singular components
/// are reproduced.
pub fn sample_generic(c: &EvCopula, n: usize, seed: u64) -> Result<SampleBatch> {
    check_count(n)?;
    let pairs = chunked(n, seed, |rng| {
        let u: f64 = rng.sample(Open01);
        let p: f64 = rng.sample(Open01);
        let v = invert_monotone_cdf(|v| c.partial_u(u, v), p, (0.0, 1.0))?;
        Ok((u, v))
    })?;
    Ok(SampleBatch {
        pairs,
        seed,
        generator: Generator::ConditionalInversion {
            family: c.dependence().family().to_string(),
        },
        n,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct EmpiricalCoefficients {
    pub rho_hat: f64,
    pub tau_hat: f64,
    pub beta_hat: f64,
    /// `(threshold, estimate)` in the order given.
    pub lambda_hat: Vec<(f64, f64)>,
    /// Estimate at the largest threshold.
    pub lambda_summary: f64,
}

/// Average ranks, 1-based.
pub fn average_ranks(xs: &[f64]) -> Vec<f64> {
    let mut idx: Vec<usize> = (0..xs.len()).collect();
    idx.sort_by(|&i, &j| xs[i].total_cmp(&xs[j]));
    let mut ranks = vec![0.0; xs.len()];
    let mut i = 0;
    while i < idx.len() {
        let mut j = i + 1;
        while j < idx.len() && xs[idx[j]] == xs[idx[i]] {
            j += 1;
        }
        let r = (i + j + 1) as f64 / 2.0;
        for &k in &idx[i..j] {
            ranks[k] = r;
        }
        i = j;
    }
    ranks
}

fn pearson(x: &[f64], y: &[f64]) -> f64 {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (a, b) in x.iter().zip(y) {
        let (da, db) = (a - mx, b - my);
        sxy += da * db;
        sxx += da * da;
        syy += db * db;
    }
    sxy / (sxx * syy).sqrt()
}

fn tied_pairs<T: PartialEq>(sorted: &[T]) -> i64 {
    let mut total = 0i64;
    let mut i = 0;
    while i < sorted.len() {
        let mut j = i + 1;
        while j < sorted.len() && sorted[j] == sorted[i] {
            j += 1;
        }
        let t = (j - i) as i64;
        total += t * (t - 1) / 2;
        i = j;
    }
    total
}

/// Bottom-up merge sort returning the number of strict inversions.
fn sort_counting_swaps(xs: &mut Vec<f64>) -> i64 {
    let n = xs.len();
    let mut buf = vec![0.0; n];
    let mut swaps = 0i64;
    let mut width = 1;
    while width < n {
        let mut lo = 0;
        while lo < n {
            let mid = (lo + width).min(n);
            let hi = (lo + 2 * width).min(n);
            let (mut i, mut j, mut k) = (lo, mid, lo);
            while i < mid && j < hi {
                if xs[i] <= xs[j] {
                    buf[k] = xs[i];
                    i += 1;
                } else {
                    buf[k] = xs[j];
                    j += 1;
                    swaps += (mid - i) as i64;
                }
                k += 1;
            }
            buf[k..k + mid - i].copy_from_slice(&xs[i..mid]);
            k += mid - i;
            buf[k..k + hi - j].copy_from_slice(&xs[j..hi]);
            lo = hi;
        }
        std::mem::swap(xs, &mut buf);
        width *= 2;
    }
    swaps
}

/// Concordant minus discordant pairs, in `O(n log n)`.
pub fn concordance_balance(pairs: &[(f64, f64)]) -> i64 {
    let mut sorted = pairs.to_vec();
    sorted.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.total_cmp(&b.1)));
    let n = sorted.len() as i64;
    let n0 = n * (n - 1) / 2;
    let us: Vec<f64> = sorted.iter().map(|p| p.0).collect();
    let n1 = tied_pairs(&us);
    let n3 = tied_pairs(&sorted);
    let mut vs: Vec<f64> = sorted.iter().map(|p| p.1).collect();
    let swaps = sort_counting_swaps(&mut vs);
    let n2 = tied_pairs(&vs);
    n0 - n1 - n2 + n3 - 2 * swaps
}

/// Concordant minus discordant pairs by direct enumeration.
pub fn concordance_balance_direct(pairs: &[(f64, f64)]) -> i64 {
    let sign = |x: f64| (x > 0.0) as i64 - (x < 0.0) as i64;
    let mut total = 0;
    for (i, a) in pairs.iter().enumerate() {
        for b in &pairs[i + 1..] {
            total += sign(a.0 - b.0) * sign(a.1 - b.1);
        }
    }
    total
}

fn median(xs: &[f64]) -> f64 {
    let mut s = xs.to_vec();
    s.sort_by(f64::total_cmp);
    let m = s.len() / 2;
    if s.len() % 2 == 1 {
        s[m]
    } else {
        (s[m - 1] + s[m]) / 2.0
    }
}

/// Rank-based estimates of rho, tau, beta and the tail coefficient.
///
/// `lambda_hat(t) = 2 - ln C_n(t, t) / ln t` with the empirical copula
/// `C_n(t, t) = #{R_i <= n t, S_i <= n t} / n`, clipped to `[0, 1]`.
pub fn empirical_coefficients(
    pairs: &[(f64, f64)],
    lambda_thresholds: &[f64],
) -> Result<EmpiricalCoefficients> {
    let n = pairs.len();
    if n < 10 {
        return Err(Error::DegenerateSample(format!(
            "need at least 10 pairs, got {n}"
        )));
    }
    if lambda_thresholds.is_empty() {
        return Err(Error::ParamOutOfRange {
            name: "lambda_thresholds",
            value: 0.0,
            expected: "at least one threshold",
        });
    }
    for &t in lambda_thresholds {
        if !(t > 0.0 && t < 1.0) {
            return Err(Error::ParamOutOfRange {
                name: "threshold",
                value: t,
                expected: "0 < t < 1",
            });
        }
    }
    let us: Vec<f64> = pairs.iter().map(|p| p.0).collect();
    let vs: Vec<f64> = pairs.iter().map(|p| p.1).collect();
    if us.iter().any(|x| !x.is_finite()) || vs.iter().any(|x| !x.is_finite()) {
        return Err(Error::DegenerateSample("non-finite coordinate".into()));
    }
    if us.iter().all(|&x| x == us[0]) {
        return Err(Error::DegenerateSample("all u identical".into()));
    }
    if vs.iter().all(|&x| x == vs[0]) {
        return Err(Error::DegenerateSample("all v identical".into()));
    }

    let ru = average_ranks(&us);
    let rv = average_ranks(&vs);
    let rho_hat = pearson(&ru, &rv).clamp(-1.0, 1.0);

    let pairs_total = (n as i64) * (n as i64 - 1) / 2;
    let tau_hat = concordance_balance(pairs) as f64 / pairs_total as f64;

    let (mu, mv) = (median(&us), median(&vs));
    let (mut agree, mut disagree) = (0u64, 0u64);
    for (u, v) in us.iter().zip(&vs) {
        let s = (u - mu) * (v - mv);
        if s > 0.0 {
            agree += 1;
        } else if s < 0.0 {
            disagree += 1;
        }
    }
    let beta_hat = if agree + disagree == 0 {
        0.0
    } else {
        (agree as f64 - disagree as f64) / (agree + disagree) as f64
    };

    let nf = n as f64;
    let lambda_hat: Vec<(f64, f64)> = lambda_thresholds
        .iter()
        .map(|&t| {
            let cut = nf * t;
            let hits = ru
                .iter()
                .zip(&rv)
                .filter(|(a, b)| **a <= cut && **b <= cut)
                .count();
            let est = 2.0 - (hits as f64 / nf).ln() / t.ln();
            (
                t,
                if est.is_nan() {
                    0.0
                } else {
                    est.clamp(0.0, 1.0)
                },
            )
        })
        .collect();
    let lambda_summary = lambda_hat
        .iter()
        .max_by(|a, b| a.0.total_cmp(&b.0))
        .map(|p| p.1)
        .expect("nonempty thresholds");

    Ok(EmpiricalCoefficients {
        rho_hat,
        tau_hat,
        beta_hat,
        lambda_hat,
        lambda_summary,
    })
}

/// Kolmogorov-Smirnov distance of the sample to the uniform law on `[0, 1]`.
pub fn ks_uniform(xs: impl IntoIterator<Item = f64>) -> f64 {
    let mut s: Vec<f64> = xs.into_iter().collect();
    s.sort_by(f64::total_cmp);
    let n = s.len() as f64;
    s.iter()
        .enumerate()
        .map(|(i, &x)| ((i + 1) as f64 / n - x).max(x - i as f64 / n))
        .fold(0.0, f64::max)
}

/// Asymptotic 1% critical value of the one-sample KS statistic.
pub fn ks_critical_1pct(n: usize) -> f64 {
    1.63 / (n as f64).sqrt()
}

/// Writes pairs as `u,v` CSV with 17 significant digits.
pub fn write_pairs_csv<W: Write>(pairs: &[(f64, f64)], out: W) -> Result<()> {
    write_pairs(pairs, out, b',')
}

pub fn write_pairs<W: Write>(pairs: &[(f64, f64)], out: W, delimiter: u8) -> Result<()> {
    let mut w = csv::WriterBuilder::new()
        .delimiter(delimiter)
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(out);
    w.write_record(["u", "v"])?;
    for (u, v) in pairs {
        w.write_record([format!("{u:.16e}"), format!("{v:.16e}")])?;
    }
    w.flush()?;
    Ok(())
}

/// Reads `u,v` CSV. Every value must lie in `[0, 1]`; empty input gives no pairs.
pub fn read_pairs_csv<R: Read>(input: R) -> Result<Vec<(f64, f64)>> {
    read_pairs(input, b',')
}

pub fn read_pairs<R: Read>(input: R, delimiter: u8) -> Result<Vec<(f64, f64)>> {
    let mut r = csv::ReaderBuilder::new()
        .delimiter(delimiter)
        .trim(csv::Trim::All)
        .from_reader(input);
    let headers = r.headers()?.clone();
    if headers.is_empty() {
        return Ok(Vec::new());
    }
    if headers.len() != 2 || &headers[0] != "u" || &headers[1] != "v" {
        return Err(Error::Parse(format!(
            "expected header `u,v`, got `{}`",
            headers.iter().collect::<Vec<_>>().join(",")
        )));
    }
    let mut pairs = Vec::new();
    for (line, rec) in r.records().enumerate() {
        let rec = rec?;
        let field = |i: usize| -> Result<f64> {
            let s = rec.get(i).unwrap_or("");
            let x: f64 = s
                .parse()
                .map_err(|_| Error::Parse(format!("row {}: `{s}` is not a number", line + 1)))?;
            if !(0.0..=1.0).contains(&x) {
                return Err(Error::Parse(format!(
                    "row {}: {x} outside [0, 1]",
                    line + 1
                )));
            }
            Ok(x)
        };
        pairs.push((field(0)?, field(1)?));
    }
    Ok(pairs)
}
