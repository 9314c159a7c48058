//! Empirical audits of the axioms characterising generalized psi-estimators
//! and quasi-arithmetic means. Every failing check carries concrete,
//! re-evaluable witnesses.

mod checks;
mod kolmogorov;

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use rand::distributions::Open01;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{Observation, WeightedSample};

pub use checks::{
    check_asymptotic_idempotency, check_asymptotic_idempotency_sampled,
    check_generator_equivalence, check_internality, check_symmetry, check_t_property,
    check_z_property, idempotency_gap, internality_violation, power_schedule, recheck,
    symmetry_violation, AffineFit, Subject,
};
pub use kolmogorov::kolmogorov_suite;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Axiom {
    Symmetry,
    Internality,
    StrictInternality,
    AsymptoticIdempotency,
    TProperty,
    ZProperty,
    Monotonicity,
    Continuity,
    Reflexivity,
    Replacement,
    GeneratorEquivalence,
    SubsemigroupClosure,
}

impl Axiom {
    pub const ALL: [Axiom; 12] = [
        Axiom::Symmetry,
        Axiom::Internality,
        Axiom::StrictInternality,
        Axiom::AsymptoticIdempotency,
        Axiom::TProperty,
        Axiom::ZProperty,
        Axiom::Monotonicity,
        Axiom::Continuity,
        Axiom::Reflexivity,
        Axiom::Replacement,
        Axiom::GeneratorEquivalence,
        Axiom::SubsemigroupClosure,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Axiom::Symmetry => "symmetry",
            Axiom::Internality => "internality",
            Axiom::StrictInternality => "strict-internality",
            Axiom::AsymptoticIdempotency => "asymptotic-idempotency",
            Axiom::TProperty => "t-property",
            Axiom::ZProperty => "z-property",
            Axiom::Monotonicity => "monotonicity",
            Axiom::Continuity => "continuity",
            Axiom::Reflexivity => "reflexivity",
            Axiom::Replacement => "replacement",
            Axiom::GeneratorEquivalence => "generator-equivalence",
            Axiom::SubsemigroupClosure => "subsemigroup-closure",
        }
    }
}

impl fmt::Display for Axiom {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Axiom {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Axiom::ALL
            .into_iter()
            .find(|a| a.as_str() == s)
            .ok_or_else(|| Error::Precondition(format!("unknown axiom `{s}`")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Verdict {
    Pass,
    Fail,
    Inconclusive,
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Verdict::Pass => "pass",
            Verdict::Fail => "fail",
            Verdict::Inconclusive => "inconclusive",
        })
    }
}

/// The inputs of a witness, enough to re-evaluate it from scratch.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum WitnessInputs {
    Permutation {
        original: Vec<Observation>,
        permuted: Vec<Observation>,
    },
    Pair {
        x: WeightedSample,
        y: WeightedSample,
    },
    Replication {
        x: WeightedSample,
        y: Observation,
        n: u64,
    },
    Sample {
        sample: WeightedSample,
    },
    /// Two points of `I^n` differing in one coordinate, `lower < upper` there.
    Coordinate {
        lower: Vec<f64>,
        upper: Vec<f64>,
        coordinate: usize,
    },
    Constant {
        x: f64,
        n: usize,
    },
    Replacement {
        x: Vec<f64>,
        y: Vec<f64>,
    },
    Closure {
        r: WeightedSample,
        s: WeightedSample,
        t: f64,
    },
}

/// A concrete counterexample: inputs, the evaluated sides of the violated
/// relation and the size of the violation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Witness {
    pub trial: usize,
    pub inputs: WitnessInputs,
    pub values: Vec<f64>,
    pub violation: f64,
    pub description: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ObservationPool {
    List(Vec<Observation>),
    /// Uniform reals in the open interval.
    Range {
        lo: f64,
        hi: f64,
    },
}

impl ObservationPool {
    /// Numeric span of the pool, if it has one.
    pub fn span(&self) -> Option<(f64, f64)> {
        match self {
            ObservationPool::Range { lo, hi } => Some((*lo, *hi)),
            ObservationPool::List(obs) => {
                let v: Vec<f64> = obs.iter().filter_map(|o| o.to_real::<f64>()).collect();
                (!v.is_empty()).then(|| {
                    v.iter()
                        .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &x| {
                            (a.min(x), b.max(x))
                        })
                })
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SamplerConfig {
    pub seed: u64,
    pub pool: ObservationPool,
    pub max_block: usize,
    pub trials: usize,
    pub tolerance: f64,
}

impl SamplerConfig {
    pub fn new(pool: ObservationPool) -> Self {
        Self {
            seed: 0,
            pool,
            max_block: 8,
            trials: 1000,
            tolerance: 1e-9,
        }
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn with_trials(mut self, trials: usize) -> Self {
        self.trials = trials;
        self
    }

    pub fn with_max_block(mut self, max_block: usize) -> Self {
        self.max_block = max_block;
        self
    }

    pub fn with_tolerance(mut self, tolerance: f64) -> Self {
        self.tolerance = tolerance;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.trials == 0 {
            return Err(Error::Precondition(
                "sampler needs at least one trial".into(),
            ));
        }
        if self.max_block == 0 {
            return Err(Error::Precondition("max_block must be at least 1".into()));
        }
        if !(self.tolerance >= 0.0) || !self.tolerance.is_finite() {
            return Err(Error::Precondition(
                "tolerance must be finite and non-negative".into(),
            ));
        }
        match &self.pool {
            ObservationPool::List(v) if v.is_empty() => {
                Err(Error::Precondition("observation pool is empty".into()))
            }
            ObservationPool::Range { lo, hi }
                if !(lo < hi) || !lo.is_finite() || !hi.is_finite() =>
            {
                Err(Error::Precondition(format!(
                    "bad sampling range ({lo}, {hi})"
                )))
            }
            _ => Ok(()),
        }
    }

    pub fn sampler(&self) -> Sampler {
        Sampler {
            rng: ChaCha8Rng::seed_from_u64(self.seed),
            pool: self.pool.clone(),
            max_block: self.max_block,
        }
    }
}

/// Deterministic draw of observations, lists and multisets from a pool.
pub struct Sampler {
    rng: ChaCha8Rng,
    pool: ObservationPool,
    max_block: usize,
}

impl Sampler {
    pub fn observation(&mut self) -> Observation {
        match &self.pool {
            ObservationPool::List(v) => v.choose(&mut self.rng).expect("pool nonempty").clone(),
            ObservationPool::Range { lo, hi } => Observation::real(self.real_in(*lo, *hi)),
        }
    }

    /// Uniform in the open interval `(lo, hi)`.
    pub fn real_in(&mut self, lo: f64, hi: f64) -> f64 {
        let u: f64 = self.rng.sample(Open01);
        lo + (hi - lo) * u
    }

    pub fn unit(&mut self) -> f64 {
        self.rng.sample(Open01)
    }

    pub fn block_len(&mut self) -> usize {
        self.rng.gen_range(1..=self.max_block)
    }

    pub fn index(&mut self, n: usize) -> usize {
        self.rng.gen_range(0..n)
    }

    pub fn list(&mut self) -> Vec<Observation> {
        let n = self.block_len();
        (0..n).map(|_| self.observation()).collect()
    }

    pub fn multiset(&mut self) -> WeightedSample {
        WeightedSample::from_observations(self.list()).expect("nonempty list")
    }

    pub fn shuffle<X>(&mut self, xs: &mut [X]) {
        xs.shuffle(&mut self.rng);
    }
}

/// Outcome of one audit.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AxiomReport {
    pub axiom: Axiom,
    pub subject: String,
    pub verdict: Verdict,
    pub trials: usize,
    /// Trials whose evaluation raised an error (counted, never a witness).
    pub errors: usize,
    pub witnesses: Vec<Witness>,
    pub max_violation: f64,
    pub tolerance: f64,
    pub config: Option<SamplerConfig>,
    /// `(n, gap)` or `(delta, response)` series for limit-type checks.
    pub series: Vec<(f64, f64)>,
    pub metrics: BTreeMap<String, f64>,
    pub notes: Vec<String>,
}

/// Witnesses kept per report; the count of failing trials is still exact.
pub const MAX_WITNESSES: usize = 16;

impl AxiomReport {
    pub(crate) fn new(
        axiom: Axiom,
        subject: &str,
        tolerance: f64,
        config: Option<&SamplerConfig>,
    ) -> Self {
        Self {
            axiom,
            subject: subject.to_string(),
            verdict: Verdict::Inconclusive,
            trials: 0,
            errors: 0,
            witnesses: Vec::new(),
            max_violation: 0.0,
            tolerance,
            config: config.cloned(),
            series: Vec::new(),
            metrics: BTreeMap::new(),
            notes: Vec::new(),
        }
    }

    pub(crate) fn observe(&mut self, violation: f64) {
        if violation > self.max_violation {
            self.max_violation = violation;
        }
    }

    pub(crate) fn push_witness(&mut self, w: Witness) {
        *self.metrics.entry("failing_trials".into()).or_insert(0.0) += 1.0;
        if self.witnesses.len() < MAX_WITNESSES {
            self.witnesses.push(w);
        }
    }

    pub(crate) fn record_error(&mut self, e: &Error) {
        if self.errors == 0 {
            self.notes.push(format!("first evaluation error: {e}"));
        }
        self.errors += 1;
    }

    /// Fail if any witness, Inconclusive if errors or no trials, else Pass.
    pub(crate) fn finish_sampled(mut self) -> Self {
        self.witnesses.sort_by_key(|w| w.trial);
        self.verdict = if !self.witnesses.is_empty() {
            Verdict::Fail
        } else if self.errors > 0 || self.trials == 0 {
            Verdict::Inconclusive
        } else {
            Verdict::Pass
        };
        self
    }

    pub fn passed(&self) -> bool {
        self.verdict == Verdict::Pass
    }

    pub fn failed(&self) -> bool {
        self.verdict == Verdict::Fail
    }
}

/// Exit-style summary: any Fail dominates, then Inconclusive.
pub fn overall_verdict(reports: &[AxiomReport]) -> Verdict {
    if reports.iter().any(AxiomReport::failed) {
        Verdict::Fail
    } else if reports.iter().all(AxiomReport::passed) {
        Verdict::Pass
    } else {
        Verdict::Inconclusive
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn axiom_names_round_trip() {
        for a in Axiom::ALL {
            assert_eq!(a.as_str().parse::<Axiom>().unwrap(), a);
            assert_eq!(serde_json::to_string(&a).unwrap(), format!("\"{a}\""));
        }
        assert!("nope".parse::<Axiom>().is_err());
    }

    #[test]
    fn sampler_is_deterministic() {
        let cfg = SamplerConfig::new(ObservationPool::Range { lo: 0.0, hi: 1.0 }).with_seed(7);
        let a: Vec<_> = {
            let mut s = cfg.sampler();
            (0..20).map(|_| s.multiset()).collect()
        };
        let b: Vec<_> = {
            let mut s = cfg.sampler();
            (0..20).map(|_| s.multiset()).collect()
        };
        assert_eq!(a, b);
        for m in &a {
            assert!(m.size() >= 1 && m.size() <= 8);
            let (lo, hi) = m.real_range::<f64>().unwrap();
            assert!(0.0 < lo && hi < 1.0);
        }
    }

    #[test]
    fn config_validation() {
        let ok = SamplerConfig::new(ObservationPool::List(vec![Observation::int(0)]));
        assert!(ok.validate().is_ok());
        assert!(ok.clone().with_trials(0).validate().is_err());
        assert!(SamplerConfig::new(ObservationPool::List(vec![]))
            .validate()
            .is_err());
        assert!(
            SamplerConfig::new(ObservationPool::Range { lo: 1.0, hi: 1.0 })
                .validate()
                .is_err()
        );
    }
}
