//! Builtin estimators used as audit subjects: classical means, order
//! statistics and a few deliberately broken estimators.

use std::fmt;
use std::sync::Arc;

use crate::catalog::{qa_mean, Generator};
use crate::error::{Error, Result};
use crate::model::{EstimatorOracle, ListOracle, Observation, Provenance, WeightedSample};
use crate::scalar::{compensated_sum, Real};

fn reals<T: Real>(sample: &WeightedSample) -> Result<Vec<(T, u64)>> {
    sample
        .iter()
        .map(|(o, m)| {
            o.to_real::<T>()
                .map(|v| (v, m))
                .ok_or_else(|| Error::Precondition(format!("non-numeric observation {o}")))
        })
        .collect()
}

fn list_reals<T: Real>(xs: &[Observation]) -> Result<Vec<T>> {
    if xs.is_empty() {
        return Err(Error::EmptySample);
    }
    xs.iter()
        .map(|o| {
            o.to_real::<T>()
                .ok_or_else(|| Error::Precondition(format!("non-numeric observation {o}")))
        })
        .collect()
}

/// Multiplicity-weighted arithmetic mean.
pub fn arithmetic_mean<T: Real>() -> EstimatorOracle<T> {
    EstimatorOracle::new("arithmetic", Provenance::Builtin, |s| {
        let v = reals::<T>(s)?;
        let n = T::from_u64(s.size()).unwrap();
        Ok(compensated_sum(v.into_iter().map(|(x, m)| T::from_u64(m).unwrap() * x)) / n)
    })
}

pub fn quasi_arithmetic<T: Real>(g: &Generator<T>) -> EstimatorOracle<T> {
    let g = g.clone();
    EstimatorOracle::new(
        format!("qa-mean:{}", g.name()),
        Provenance::Builtin,
        move |s| qa_mean(&g, s),
    )
}

pub fn maximum<T: Real>() -> EstimatorOracle<T> {
    EstimatorOracle::new("max", Provenance::Builtin, |s| {
        Ok(reals::<T>(s)?
            .into_iter()
            .fold(T::neg_infinity(), |acc, (x, _)| acc.max(x)))
    })
}

pub fn minimum<T: Real>() -> EstimatorOracle<T> {
    EstimatorOracle::new("min", Provenance::Builtin, |s| {
        Ok(reals::<T>(s)?
            .into_iter()
            .fold(T::infinity(), |acc, (x, _)| acc.min(x)))
    })
}

/// `sum x_i`: not internal, so it cannot be a generalized psi-estimator.
pub fn total<T: Real>() -> EstimatorOracle<T> {
    EstimatorOracle::new("sum", Provenance::Builtin, |s| {
        let v = reals::<T>(s)?;
        Ok(compensated_sum(
            v.into_iter().map(|(x, m)| T::from_u64(m).unwrap() * x),
        ))
    })
}

/// Sample median (average of the two middle order statistics for even n).
pub fn median<T: Real>() -> EstimatorOracle<T> {
    EstimatorOracle::new("median", Provenance::Builtin, |s| {
        let v = reals::<T>(s)?;
        let n = s.size();
        let order_stat = |k: u64| {
            let mut seen = 0;
            for &(x, m) in &v {
                seen += m;
                if k < seen {
                    return x;
                }
            }
            unreachable!("k < n")
        };
        Ok(if n % 2 == 1 {
            order_stat(n / 2)
        } else {
            (order_stat(n / 2 - 1) + order_stat(n / 2)) / T::lit(2.0)
        })
    })
}

/// `(2 x_1 + x_2 + ... + x_n) / (n + 1)`: depends on list order.
pub fn first_biased_mean<T: Real>() -> ListOracle<T> {
    ListOracle::new("first-biased", |xs: &[Observation]| {
        let v = list_reals::<T>(xs)?;
        let n = T::from_usize(v.len()).unwrap();
        Ok((v[0] + compensated_sum(v.iter().copied())) / (n + T::one()))
    })
}

/// Looks up a builtin multiset oracle by CLI name.
pub fn builtin_oracle(name: &str) -> Result<EstimatorOracle<f64>> {
    Ok(match name {
        "arithmetic" | "mean" => arithmetic_mean(),
        "geometric" => quasi_arithmetic(&Generator::ln()),
        "harmonic" => quasi_arithmetic(&Generator::reciprocal()),
        "max" => maximum(),
        "min" => minimum(),
        "sum" => total(),
        "median" => median(),
        other => {
            return Err(Error::Precondition(format!(
                "unknown builtin estimator `{other}`"
            )))
        }
    })
}

/// Builtin list oracle by name; multiset oracles are wrapped.
pub fn builtin_list_oracle(name: &str) -> Result<ListOracle<f64>> {
    match name {
        "first-biased" => Ok(first_biased_mean()),
        other => builtin_oracle(other).map(ListOracle::from_multiset),
    }
}

pub const BUILTIN_NAMES: &[&str] = &[
    "arithmetic",
    "geometric",
    "harmonic",
    "max",
    "min",
    "sum",
    "median",
    "first-biased",
];

type SeqFn<T> = dyn Fn(&[T]) -> T + Send + Sync;

/// A sequence of n-variable means `M_n : I^n -> R` over plain reals.
#[derive(Clone)]
pub struct MeanSequence<T> {
    name: String,
    eval: Arc<SeqFn<T>>,
}

impl<T: Real> fmt::Debug for MeanSequence<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("MeanSequence")
            .field("name", &self.name)
            .finish_non_exhaustive()
    }
}

impl<T: Real> MeanSequence<T> {
    pub fn new(name: impl Into<String>, eval: impl Fn(&[T]) -> T + Send + Sync + 'static) -> Self {
        Self {
            name: name.into(),
            eval: Arc::new(eval),
        }
    }

    pub fn eval(&self, xs: &[T]) -> T {
        (self.eval)(xs)
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    /// `f^{-1}(mean of f(x_i))`, summed in list order.
    pub fn quasi_arithmetic(g: &Generator<T>) -> Self {
        let g = g.clone();
        Self::new(format!("qa-mean:{}", g.name()), move |xs: &[T]| {
            let n = T::from_usize(xs.len()).unwrap();
            g.f_inverse(compensated_sum(xs.iter().map(|&x| g.f(x))) / n)
        })
    }

    pub fn median() -> Self {
        Self::new("median", |xs: &[T]| {
            let mut v = xs.to_vec();
            v.sort_by(|a, b| a.partial_cmp(b).expect("no NaN"));
            let n = v.len();
            if n % 2 == 1 {
                v[n / 2]
            } else {
                (v[n / 2 - 1] + v[n / 2]) / T::lit(2.0)
            }
        })
    }

    pub fn maximum() -> Self {
        Self::new("max", |xs: &[T]| {
            xs.iter().copied().fold(T::neg_infinity(), T::max)
        })
    }
}

/// Builtin mean sequence by CLI name.
pub fn builtin_mean_sequence(name: &str) -> Result<MeanSequence<f64>> {
    Ok(match name {
        "arithmetic" | "mean" => MeanSequence::quasi_arithmetic(&Generator::identity()),
        "geometric" => MeanSequence::quasi_arithmetic(&Generator::ln()),
        "harmonic" => MeanSequence::quasi_arithmetic(&Generator::reciprocal()),
        "median" => MeanSequence::median(),
        "max" => MeanSequence::maximum(),
        other => {
            return Err(Error::Precondition(format!(
                "unknown mean sequence `{other}`"
            )))
        }
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn s(v: &[f64]) -> WeightedSample {
        WeightedSample::of_reals(v).unwrap()
    }

    #[test]
    fn builtin_values() {
        assert_eq!(arithmetic_mean::<f64>().eval(&s(&[1.0, 3.0])).unwrap(), 2.0);
        assert_eq!(maximum::<f64>().eval(&s(&[1.0, 3.0])).unwrap(), 3.0);
        assert_eq!(minimum::<f64>().eval(&s(&[1.0, 3.0])).unwrap(), 1.0);
        assert_eq!(total::<f64>().eval(&s(&[0.25, 0.5])).unwrap(), 0.75);
        assert_eq!(median::<f64>().eval(&s(&[0.0, 1.0, 4.0])).unwrap(), 1.0);
        assert_eq!(
            median::<f64>().eval(&s(&[0.0, 1.0, 4.0, 5.0])).unwrap(),
            2.5
        );
    }

    #[test]
    fn first_biased_depends_on_order() {
        let m = first_biased_mean::<f64>();
        let a = m
            .eval(&[Observation::real(0.0), Observation::real(1.0)])
            .unwrap();
        let b = m
            .eval(&[Observation::real(1.0), Observation::real(0.0)])
            .unwrap();
        assert!((a - 1.0 / 3.0).abs() < 1e-15 && (b - 2.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn lookup_by_name() {
        for name in BUILTIN_NAMES {
            assert!(builtin_list_oracle(name).is_ok(), "{name}");
        }
        assert!(builtin_oracle("nope").is_err());
        assert_eq!(
            builtin_mean_sequence("median")
                .unwrap()
                .eval(&[3.0, 1.0, 2.0]),
            2.0
        );
    }
}
