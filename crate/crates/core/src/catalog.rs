//! Score families and quasi-arithmetic generators.
//!
//! The catalog carries both well-behaved families (quasi-arithmetic scores,
//! `arctan`) and deliberate counterexamples whose `claims` record which of
//! the properties `C`, `T`, `Z` they are expected to lack.

use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{Claims, ObservationDomain, ParameterInterval, ScoreFamily, WeightedSample};
use crate::scalar::{compensated_sum, Real};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Monotonicity {
    Increasing,
    Decreasing,
}

type RealFn<T> = dyn Fn(T) -> T + Send + Sync;

/// Continuous strictly monotone generator `f` on an open interval, with its
/// inverse.
#[derive(Clone)]
pub struct Generator<T> {
    name: String,
    interval: ParameterInterval<T>,
    monotonicity: Monotonicity,
    forward: Arc<RealFn<T>>,
    inverse: Arc<RealFn<T>>,
}

impl<T: Real> fmt::Debug for Generator<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Generator")
            .field("name", &self.name)
            .field("interval", &self.interval)
            .field("monotonicity", &self.monotonicity)
            .finish_non_exhaustive()
    }
}

impl<T: Real> Generator<T> {
    /// Builds a generator and checks strict monotonicity and the inverse on a
    /// sample grid of the interval.
    pub fn new(
        name: impl Into<String>,
        interval: ParameterInterval<T>,
        monotonicity: Monotonicity,
        forward: impl Fn(T) -> T + Send + Sync + 'static,
        inverse: impl Fn(T) -> T + Send + Sync + 'static,
    ) -> Result<Self> {
        let g = Self {
            name: name.into(),
            interval,
            monotonicity,
            forward: Arc::new(forward),
            inverse: Arc::new(inverse),
        };
        g.validate()?;
        Ok(g)
    }

    fn invalid(&self, reason: String) -> Error {
        Error::InvalidGenerator {
            name: self.name.clone(),
            reason,
        }
    }

    fn validate(&self) -> Result<()> {
        let grid = self.sample_grid(64);
        let values: Vec<T> = grid.iter().map(|&x| self.f(x)).collect();
        for w in values.windows(2) {
            let ok = match self.monotonicity {
                Monotonicity::Increasing => w[0] < w[1],
                Monotonicity::Decreasing => w[0] > w[1],
            };
            if !ok || !w[0].is_finite() || !w[1].is_finite() {
                return Err(self.invalid(format!(
                    "not strictly {:?} on the sample grid",
                    self.monotonicity
                )));
            }
        }
        let tol = T::lit(1e-10);
        for (&x, &y) in grid.iter().zip(&values) {
            let back = self.f_inverse(y);
            if (back - x).abs() > tol * T::one().max(x.abs()) {
                return Err(self.invalid(format!("inverse fails at x = {x} (got {back})")));
            }
        }
        Ok(())
    }

    /// Points spread across the interval; for unbounded ends the grid
    /// extends geometrically.
    pub fn sample_grid(&self, n: usize) -> Vec<T> {
        let (lo, hi) = (self.interval.lo(), self.interval.hi());
        let n = n.max(2);
        match (lo.is_finite(), hi.is_finite()) {
            (true, true) => (1..=n)
                .map(|i| lo + (hi - lo) * T::from_usize(i).unwrap() / T::from_usize(n + 1).unwrap())
                .collect(),
            (true, false) => (0..n)
                .map(|i| {
                    let e = T::lit(-6.0)
                        + T::lit(9.0) * T::from_usize(i).unwrap() / T::from_usize(n - 1).unwrap();
                    lo + T::lit(10.0).powf(e) * T::one().max(lo.abs())
                })
                .collect(),
            (false, true) => {
                let mut v: Vec<T> = (0..n)
                    .map(|i| {
                        let e = T::lit(-6.0)
                            + T::lit(9.0) * T::from_usize(i).unwrap()
                                / T::from_usize(n - 1).unwrap();
                        hi - T::lit(10.0).powf(e) * T::one().max(hi.abs())
                    })
                    .collect();
                v.reverse();
                v
            }
            (false, false) => (0..n)
                .map(|i| {
                    T::lit(-1000.0)
                        + T::lit(2000.0) * T::from_usize(i).unwrap() / T::from_usize(n - 1).unwrap()
                })
                .collect(),
        }
    }

    pub fn f(&self, x: T) -> T {
        (self.forward)(x)
    }

    pub fn f_inverse(&self, y: T) -> T {
        (self.inverse)(y)
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn interval(&self) -> &ParameterInterval<T> {
        &self.interval
    }

    pub fn monotonicity(&self) -> Monotonicity {
        self.monotonicity
    }

    /// `x -> a * g(x) + b`, `a != 0`; produces the same quasi-arithmetic mean.
    pub fn affine(&self, a: T, b: T) -> Result<Self> {
        if a == T::zero() || !a.is_finite() || !b.is_finite() {
            return Err(self.invalid("affine factor must be finite and nonzero".into()));
        }
        let (f1, f2) = (self.forward.clone(), self.inverse.clone());
        let monotonicity = match (self.monotonicity, a > T::zero()) {
            (m, true) => m,
            (Monotonicity::Increasing, false) => Monotonicity::Decreasing,
            (Monotonicity::Decreasing, false) => Monotonicity::Increasing,
        };
        Generator::new(
            format!("{a}*{}+{b}", self.name),
            self.interval,
            monotonicity,
            move |x| a * f1(x) + b,
            move |y| f2((y - b) / a),
        )
    }

    pub fn identity() -> Self {
        Generator::new(
            "id",
            ParameterInterval::real_line(),
            Monotonicity::Increasing,
            |x| x,
            |y| y,
        )
        .expect("identity generator")
    }

    pub fn ln() -> Self {
        Generator::new(
            "ln",
            ParameterInterval::positive_half_line(),
            Monotonicity::Increasing,
            |x: T| x.ln(),
            |y: T| y.exp(),
        )
        .expect("ln generator")
    }

    pub fn reciprocal() -> Self {
        Generator::new(
            "recip",
            ParameterInterval::positive_half_line(),
            Monotonicity::Decreasing,
            |x: T| x.recip(),
            |y: T| y.recip(),
        )
        .expect("reciprocal generator")
    }

    /// `x -> x^p` on `(0, inf)`; decreasing for `p < 0`, rejected for `p = 0`.
    pub fn power(p: T) -> Result<Self> {
        if p == T::zero() || !p.is_finite() {
            return Err(Error::InvalidGenerator {
                name: format!("pow:{p}"),
                reason: "exponent must be finite and nonzero".into(),
            });
        }
        let monotonicity = if p > T::zero() {
            Monotonicity::Increasing
        } else {
            Monotonicity::Decreasing
        };
        Generator::new(
            format!("pow:{p}"),
            ParameterInterval::positive_half_line(),
            monotonicity,
            move |x: T| x.powf(p),
            move |y: T| y.powf(p.recip()),
        )
    }
}

/// `psi(x, t) = sigma * (f(x) - f(t))` with `sigma = -1` for decreasing
/// generators, so the score sum is positive before the estimate and negative
/// after it. Its generalized psi-estimator is the quasi-arithmetic mean.
pub fn qa_score<T: Real>(g: &Generator<T>) -> ScoreFamily<T> {
    let sigma = match g.monotonicity() {
        Monotonicity::Increasing => T::one(),
        Monotonicity::Decreasing => -T::one(),
    };
    let gen = g.clone();
    ScoreFamily::new(
        format!("qa:{}", g.name()),
        *g.interval(),
        ObservationDomain::Interval(*g.interval()),
        Claims::CTZ,
        move |x, t| match x.to_real::<T>() {
            Some(x) => sigma * (gen.f(x) - gen.f(t)),
            None => T::nan(),
        },
    )
}

/// `f^{-1}((1/n) sum_i w_i f(x_i))` with multiplicities `w_i`.
pub fn qa_mean<T: Real>(g: &Generator<T>, sample: &WeightedSample) -> Result<T> {
    let domain = ObservationDomain::Interval(*g.interval());
    let mut terms = Vec::with_capacity(sample.distinct());
    for (obs, m) in sample.iter() {
        if !domain.contains(obs) {
            return Err(Error::ObservationOutOfDomain {
                family: format!("qa:{}", g.name()),
                observation: obs.to_string(),
            });
        }
        let x = obs.to_real::<T>().expect("numeric observation");
        terms.push(T::from_u64(m).unwrap() * g.f(x));
    }
    let n = T::from_u64(sample.size()).unwrap();
    let mean = g.f_inverse(compensated_sum(terms) / n);
    // Clamp rounding excursions back into the sample's range.
    let (lo, hi) = sample.real_range::<T>().expect("numeric sample");
    Ok(mean.max(lo).min(hi))
}

/// Huber's clipped location score `clamp(x - t, -kappa, kappa)`.
pub fn huber_score<T: Real>(kappa: T) -> Result<ScoreFamily<T>> {
    if !(kappa > T::zero()) || !kappa.is_finite() {
        return Err(Error::Precondition(format!(
            "huber kappa must be positive, got {kappa}"
        )));
    }
    Ok(ScoreFamily::new(
        format!("huber:{kappa}"),
        ParameterInterval::real_line(),
        ObservationDomain::AnyReal,
        Claims::C,
        move |x, t| match x.to_real::<T>() {
            Some(x) => (x - t).max(-kappa).min(kappa),
            None => T::nan(),
        },
    ))
}

/// `arctan(x - t)` on the real line: continuous, strictly decreasing score
/// sums with limits `±n pi / 2`.
pub fn arctan_score<T: Real>() -> ScoreFamily<T> {
    ScoreFamily::new(
        "arctan",
        ParameterInterval::real_line(),
        ObservationDomain::AnyReal,
        Claims::CTZ,
        |x, t| match x.to_real::<T>() {
            Some(x) => (x - t).atan(),
            None => T::nan(),
        },
    )
}

fn sign<T: Real>(v: T) -> T {
    if v > T::zero() {
        T::one()
    } else if v < T::zero() {
        -T::one()
    } else {
        T::zero()
    }
}

/// `sign(x - t)`: the median score. Even splits produce plateaus, so no
/// property is claimed.
pub fn median_score<T: Real>() -> ScoreFamily<T> {
    ScoreFamily::new(
        "median",
        ParameterInterval::real_line(),
        ObservationDomain::AnyReal,
        Claims::NONE,
        |x, t| match x.to_real::<T>() {
            Some(x) => sign(x - t),
            None => T::nan(),
        },
    )
}

/// `+1` for `t < x`, `-2` for `t >= x`. Single observations have a strict
/// sign change at `x`, but the score sum never vanishes there.
pub fn step_score<T: Real>() -> ScoreFamily<T> {
    ScoreFamily::new(
        "step",
        ParameterInterval::real_line(),
        ObservationDomain::AnyReal,
        Claims::T,
        |x, t| match x.to_real::<T>() {
            Some(x) if t < x => T::one(),
            Some(_) => T::lit(-2.0),
            None => T::nan(),
        },
    )
}
