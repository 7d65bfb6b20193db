//! Extreme value copulas induced by a dependence function through
//! `C(u, v) = exp((ln u + ln v) A(ln v / (ln u + ln v)))`.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::pickands::DependenceFunction;

/// A bivariate copula evaluator.
pub trait Copula {
    fn cdf(&self, u: f64, v: f64) -> f64;
}

impl<F: Fn(f64, f64) -> f64> Copula for F {
    fn cdf(&self, u: f64, v: f64) -> f64 {
        self(u, v)
    }
}

/// The copula with dependence function `A`.
#[derive(Debug, Clone, PartialEq)]
pub struct EvCopula {
    dependence: DependenceFunction,
    lambda: f64,
}

impl EvCopula {
    pub fn new(dependence: DependenceFunction) -> Self {
        let lambda = (2.0 * (1.0 - dependence.eval(0.5))).clamp(0.0, 1.0);
        Self { dependence, lambda }
    }

    pub fn dependence(&self) -> &DependenceFunction {
        &self.dependence
    }

    /// Upper tail dependence coefficient `2 (1 - A(1/2))`.
    pub fn tail_coefficient(&self) -> f64 {
        self.lambda
    }

    /// Exponent `2 - lambda` of the diagonal section `C(u, u) = u^(2 - lambda)`.
    pub fn diag_exponent(&self) -> f64 {
        2.0 - self.lambda
    }

    pub fn eval(&self, u: f64, v: f64) -> f64 {
        let (u, v) = (u.clamp(0.0, 1.0), v.clamp(0.0, 1.0));
        if u == 0.0 || v == 0.0 {
            return 0.0;
        }
        if u == 1.0 {
            return v;
        }
        if v == 1.0 {
            return u;
        }
        let (lu, lv) = (u.ln(), v.ln());
        let s = lu + lv;
        (s * self.dependence.eval(lv / s)).exp()
    }

    /// Conditional distribution `dC/du (u, v)` of `V` given `U = u`.
    ///
    /// Where `A` is kinked this is the right limit in `v`, so `v -> dC/du` is
    /// right-continuous.
    pub fn partial_u(&self, u: f64, v: f64) -> f64 {
        if v <= 0.0 {
            return 0.0;
        }
        if v >= 1.0 {
            return 1.0;
        }
        let u = u.clamp(f64::MIN_POSITIVE, 1.0);
        if u == 1.0 {
            return (v * (1.0 - self.dependence.deriv_left(1.0))).clamp(0.0, 1.0);
        }
        let (lu, lv) = (u.ln(), v.ln());
        let s = lu + lv;
        let t = lv / s;
        // t decreases as v increases, so the right limit in v uses A'(t-).
        let d = &self.dependence;
        let c = (s * d.eval(t)).exp();
        (c / u * (d.eval(t) - t * d.deriv_left(t))).clamp(0.0, 1.0)
    }
}

impl Copula for EvCopula {
    fn cdf(&self, u: f64, v: f64) -> f64 {
        self.eval(u, v)
    }
}

/// Survival copula `u + v - 1 + C(1 - u, 1 - v)`.
pub fn survival<C: Copula + ?Sized>(c: &C, u: f64, v: f64) -> f64 {
    u + v - 1.0 + c.cdf(1.0 - u, 1.0 - v)
}

/// Wrapper evaluating the survival copula of `C`.
#[derive(Debug, Clone)]
pub struct SurvivalCopula<C>(pub C);

impl<C: Copula> Copula for SurvivalCopula<C> {
    fn cdf(&self, u: f64, v: f64) -> f64 {
        survival(&self.0, u, v)
    }
}

/// Largest `|C(u^s, v^s) - C(u, v)^s|` over `samples` random `(u, v, s)` with
/// `s` in `(0, 10]`.
pub fn check_max_stability(c: &EvCopula, samples: usize, seed: u64) -> f64 {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst: f64 = 0.0;
    for _ in 0..samples {
        let u: f64 = rng.random();
        let v: f64 = rng.random();
        let s = 10.0 * (1.0 - rng.random::<f64>());
        let lhs = c.eval(u.powf(s), v.powf(s));
        let rhs = c.eval(u, v).powf(s);
        worst = worst.max((lhs - rhs).abs());
    }
    worst
}

/// Smallest C-volume over the cells of a uniform `grid x grid` partition of
/// the unit square. Negative values indicate a violation of 2-increasingness.
pub fn check_two_increasing<C: Copula + ?Sized>(c: &C, grid: usize) -> f64 {
    let n = grid.max(2);
    let pts: Vec<f64> = (0..=n).map(|i| i as f64 / n as f64).collect();
    let mut prev: Vec<f64> = pts.iter().map(|&u| c.cdf(u, pts[0])).collect();
    let mut min_volume = f64::INFINITY;
    for &v in &pts[1..] {
        let row: Vec<f64> = pts.iter().map(|&u| c.cdf(u, v)).collect();
        for i in 0..n {
            let vol = row[i + 1] - row[i] - prev[i + 1] + prev[i];
            min_volume = min_volume.min(vol);
        }
        prev = row;
    }
    min_volume
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pickands::{gumbel_dependence, mo_dependence, pareto_dependence};
    use proptest::prelude::*;

    fn mo(alpha: f64, beta: f64) -> EvCopula {
        EvCopula::new(mo_dependence(alpha, beta).unwrap())
    }

    fn mo_direct(alpha: f64, beta: f64, u: f64, v: f64) -> f64 {
        (u.powf(1.0 - alpha) * v).min(u * v.powf(1.0 - beta))
    }

    #[test]
    fn eval_examples() {
        assert!((mo(0.5, 0.5).eval(0.25, 0.25) - 0.125).abs() < 1e-15);
        let ind = EvCopula::new(DependenceFunction::independence());
        assert!((ind.eval(0.3, 0.7) - 0.21).abs() < 1e-15);
        let direct = mo_direct(0.5, 0.5, 0.25, 0.49);
        assert!((direct - 0.175).abs() < 1e-15);
        assert!((mo(0.5, 0.5).eval(0.25, 0.49) - 0.175).abs() < 1e-15);
    }

    #[test]
    fn boundaries() {
        let c = EvCopula::new(gumbel_dependence(3.0).unwrap());
        assert_eq!(c.eval(0.4, 1.0), 0.4);
        assert_eq!(c.eval(1.0, 0.7), 0.7);
        assert_eq!(c.eval(0.0, 0.7), 0.0);
        assert_eq!(c.eval(0.3, 0.0), 0.0);
    }

    #[test]
    fn partial_u_examples() {
        let ind = EvCopula::new(DependenceFunction::independence());
        assert!((ind.partial_u(0.3, 0.7) - 0.7).abs() < 1e-15);
        assert_eq!(mo(1.0, 1.0).partial_u(0.3, 0.6), 1.0);
        assert_eq!(mo(1.0, 1.0).partial_u(0.3, 0.2), 0.0);
        // Right-continuous at the jump v = u.
        assert_eq!(mo(1.0, 1.0).partial_u(0.3, 0.3), 1.0);

        let g = EvCopula::new(gumbel_dependence(2.0).unwrap());
        let expect = 0.5f64.powf(2f64.sqrt() - 1.0) * 2f64.powf(0.5 - 1.0);
        let h = 1e-6;
        let fd = (g.eval(0.5 + h, 0.5) - g.eval(0.5 - h, 0.5)) / (2.0 * h);
        assert!((fd - expect).abs() < 1e-8);
        assert!((g.partial_u(0.5, 0.5) - expect).abs() < 1e-14);
    }

    #[test]
    fn survival_examples() {
        let ind = EvCopula::new(DependenceFunction::independence());
        assert!((survival(&ind, 0.3, 0.7) - 0.21).abs() < 1e-15);
        let c = mo(0.5, 0.5);
        assert!((survival(&c, 1.0, 0.37) - 0.37).abs() < 1e-15);
        assert!((survival(&c, 0.5, 0.5) - 0.5f64.powf(1.5)).abs() < 1e-15);
    }

    #[test]
    fn max_stability_examples() {
        for c in [
            mo(0.3, 0.9),
            EvCopula::new(gumbel_dependence(2.5).unwrap()),
            EvCopula::new(DependenceFunction::independence()),
        ] {
            assert!(check_max_stability(&c, 2000, 3) <= 1e-12);
        }
    }

    #[test]
    fn two_increasing_examples() {
        let ind = EvCopula::new(DependenceFunction::independence());
        assert!(check_two_increasing(&ind, 64) >= -1e-15);
        assert!(check_two_increasing(&mo(0.5, 0.5), 64) >= -1e-12);
        let pareto = EvCopula::new(pareto_dependence(0.3, 0.2).unwrap());
        assert!(check_two_increasing(&pareto, 64) >= -1e-12);
        let upper = |u: f64, v: f64| u.min(v).min(u.powf(0.7) * v.powf(0.8));
        assert!(check_two_increasing(&upper, 64) >= -1e-12);
        // Every cell of u + v - uv has volume -du dv.
        let not_copula = |u: f64, v: f64| u + v - u * v;
        assert!(check_two_increasing(&not_copula, 32) < 0.0);
    }

    proptest! {
        #[test]
        fn pickands_round_trip(alpha in 0.0f64..=1.0, beta in 0.0f64..=1.0, theta in 1.0f64..30.0, t in 0.0f64..=1.0) {
            for d in [mo_dependence(alpha, beta).unwrap(), gumbel_dependence(theta).unwrap()] {
                let c = EvCopula::new(d.clone());
                let back = -c.eval((-(1.0 - t)).exp(), (-t).exp()).ln();
                prop_assert!((back - d.eval(t)).abs() <= 1e-12);
            }
        }

        #[test]
        fn diagonal_law(alpha in 0.0f64..=1.0, beta in 0.0f64..=1.0, theta in 1.0f64..30.0, u in 0.0f64..=1.0) {
            for d in [mo_dependence(alpha, beta).unwrap(), gumbel_dependence(theta).unwrap()] {
                let c = EvCopula::new(d);
                prop_assert!((c.eval(u, u) - u.powf(c.diag_exponent())).abs() <= 1e-12);
            }
        }

        #[test]
        fn mo_matches_direct_min_form(alpha in 0.0f64..=1.0, beta in 0.0f64..=1.0, u in 0.0f64..=1.0, v in 0.0f64..=1.0) {
            prop_assert!((mo(alpha, beta).eval(u, v) - mo_direct(alpha, beta, u, v)).abs() <= 1e-14);
        }

        #[test]
        fn frechet_bounds(theta in 1.0f64..30.0, alpha in 0.0f64..=1.0, u in 0.0f64..=1.0, v in 0.0f64..=1.0) {
            for c in [mo(alpha, 1.0 - alpha), EvCopula::new(gumbel_dependence(theta).unwrap())] {
                let x = c.eval(u, v);
                prop_assert!(x >= (u + v - 1.0).max(0.0) - 1e-15);
                prop_assert!(x <= u.min(v) + 1e-15);
            }
        }

        #[test]
        fn survival_is_an_involution(theta in 1.0f64..30.0, u in 0.0f64..=1.0, v in 0.0f64..=1.0) {
            let c = EvCopula::new(gumbel_dependence(theta).unwrap());
            let twice = SurvivalCopula(SurvivalCopula(c.clone()));
            prop_assert!((twice.cdf(u, v) - c.eval(u, v)).abs() <= 1e-14);
        }

        #[test]
        fn partial_u_matches_finite_differences(theta in 1.0f64..20.0, alpha in 0.05f64..=1.0, beta in 0.05f64..=1.0, u in 0.05f64..0.95, v in 0.05f64..0.95) {
            let h = 1e-6;
            let g = EvCopula::new(gumbel_dependence(theta).unwrap());
            let fd = (g.eval(u + h, v) - g.eval(u - h, v)) / (2.0 * h);
            prop_assert!((g.partial_u(u, v) - fd).abs() <= 1e-5);

            // Away from the kink curve of the Marshall-Olkin copula.
            let m = mo(alpha, beta);
            let t = v.ln() / (u.ln() + v.ln());
            let kink = alpha / (alpha + beta);
            prop_assume!((t - kink).abs() > 1e-3);
            let fd = (m.eval(u + h, v) - m.eval(u - h, v)) / (2.0 * h);
            prop_assert!((m.partial_u(u, v) - fd).abs() <= 1e-5);
        }

        #[test]
        fn partial_u_is_a_distribution_in_v(alpha in 0.0f64..=1.0, beta in 0.0f64..=1.0, u in 0.01f64..0.99) {
            let c = mo(alpha, beta);
            let mut prev = 0.0;
            for i in 0..=200 {
                let v = i as f64 / 200.0;
                let h = c.partial_u(u, v);
                prop_assert!((0.0..=1.0).contains(&h));
                prop_assert!(h >= prev - 1e-12);
                prev = h;
            }
            prop_assert_eq!(prev, 1.0);
        }
    }
}
