//! Domain types shared by every module: parameter intervals, observations,
//! weighted samples (elements of the free Abelian semigroup over the
//! observation space), score families, estimator oracles and tolerances.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use num_rational::Rational64;
use num_traits::ToPrimitive;
use ordered_float::OrderedFloat;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};
use crate::scalar::{parse_decimal_big, Real};

/// Open interval `(lo, hi)`; either end may be infinite.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ParameterInterval<T> {
    lo: T,
    hi: T,
}

impl<T: Real> ParameterInterval<T> {
    pub fn new(lo: T, hi: T) -> Result<Self> {
        if lo.is_nan() || hi.is_nan() || lo >= hi || lo == T::infinity() || hi == T::neg_infinity()
        {
            return Err(Error::InvalidInterval {
                lo: lo.as_f64(),
                hi: hi.as_f64(),
            });
        }
        Ok(Self { lo, hi })
    }

    pub fn real_line() -> Self {
        Self {
            lo: T::neg_infinity(),
            hi: T::infinity(),
        }
    }

    pub fn positive_half_line() -> Self {
        Self {
            lo: T::zero(),
            hi: T::infinity(),
        }
    }

    pub fn lo(&self) -> T {
        self.lo
    }

    pub fn hi(&self) -> T {
        self.hi
    }

    pub fn contains(&self, t: T) -> bool {
        self.lo < t && t < self.hi
    }

    pub fn is_bounded(&self) -> bool {
        self.lo.is_finite() && self.hi.is_finite()
    }

    /// Midpoint when bounded, otherwise 0 moved inside the interval.
    pub fn default_seed(&self) -> T {
        if self.is_bounded() {
            return self.lo + (self.hi - self.lo) / T::lit(2.0);
        }
        if self.contains(T::zero()) {
            T::zero()
        } else if self.lo.is_finite() {
            self.lo + T::one().max(self.lo.abs())
        } else {
            self.hi - T::one().max(self.hi.abs())
        }
    }
}

impl<T: Real> fmt::Display for ParameterInterval<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {})", self.lo, self.hi)
    }
}

/// An element of the observation space.
///
/// Numeric observations read from text are stored exactly as rationals so
/// that multiset equality never depends on floating-point rounding. `Real`
/// is for generated or computed values used in estimation and audits.
/// Ordering compares variants first (`Exact < Real < Symbol`), then values.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Observation {
    Exact(Rational64),
    Real(OrderedFloat<f64>),
    Symbol(Arc<str>),
}

impl Observation {
    pub fn real(x: f64) -> Self {
        Observation::Real(OrderedFloat(x))
    }

    pub fn int(n: i64) -> Self {
        Observation::Exact(Rational64::from_integer(n))
    }

    pub fn ratio(numer: i64, denom: i64) -> Self {
        Observation::Exact(Rational64::new(numer, denom))
    }

    pub fn symbol(s: &str) -> Self {
        Observation::Symbol(Arc::from(s))
    }

    /// Numeric value, `None` for symbols.
    pub fn to_real<T: Real>(&self) -> Option<T> {
        match self {
            Observation::Exact(r) => {
                let v = *r.numer() as f64 / *r.denom() as f64;
                T::from_f64(v)
            }
            Observation::Real(x) => T::from_f64(x.0),
            Observation::Symbol(_) => None,
        }
    }

    pub fn is_numeric(&self) -> bool {
        !matches!(self, Observation::Symbol(_))
    }
}

impl FromStr for Observation {
    type Err = Error;

    /// Decimals become exact rationals, `p/q` is accepted, anything else that
    /// is a bare identifier becomes a symbol.
    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        if s.is_empty() {
            return Err(Error::Precondition("empty observation".into()));
        }
        if let Some((p, q)) = s.split_once('/') {
            if let (Ok(p), Ok(q)) = (p.trim().parse::<i64>(), q.trim().parse::<i64>()) {
                if q != 0 {
                    return Ok(Observation::Exact(Rational64::new(p, q)));
                }
            }
        }
        if let Some(big) = parse_decimal_big(s) {
            if let (Some(n), Some(d)) = (big.numer().to_i64(), big.denom().to_i64()) {
                return Ok(Observation::Exact(Rational64::new(n, d)));
            }
            let v: f64 = s
                .parse()
                .map_err(|_| Error::Precondition(format!("unparsable number `{s}`")))?;
            return Ok(Observation::real(v));
        }
        if s.chars()
            .all(|c| c.is_alphanumeric() || c == '_' || c == '-')
        {
            return Ok(Observation::symbol(s));
        }
        Err(Error::Precondition(format!("unparsable observation `{s}`")))
    }
}

impl fmt::Display for Observation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Observation::Exact(r) => fmt_rational(f, r),
            Observation::Real(x) => write!(f, "{}", x.0),
            Observation::Symbol(s) => write!(f, "{s}"),
        }
    }
}

fn fmt_rational(f: &mut fmt::Formatter<'_>, r: &Rational64) -> fmt::Result {
    if r.is_integer() {
        return write!(f, "{}", r.numer());
    }
    // Terminating decimals print as decimals, everything else as p/q.
    let mut d = *r.denom();
    let (mut twos, mut fives) = (0u32, 0u32);
    while d % 2 == 0 {
        d /= 2;
        twos += 1;
    }
    while d % 5 == 0 {
        d /= 5;
        fives += 1;
    }
    let places = twos.max(fives);
    if d != 1 || places > 18 {
        return write!(f, "{}/{}", r.numer(), r.denom());
    }
    let scale = 10i128.pow(places);
    let scaled = *r.numer() as i128 * scale / *r.denom() as i128;
    let sign = if scaled < 0 { "-" } else { "" };
    let abs = scaled.unsigned_abs();
    let int = abs / scale as u128;
    let frac = abs % scale as u128;
    write!(f, "{sign}{int}.{frac:0width$}", width = places as usize)
}

impl Serialize for Observation {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

impl<'de> Deserialize<'de> for Observation {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

impl From<f64> for Observation {
    fn from(x: f64) -> Self {
        Observation::real(x)
    }
}

/// Finite multiset of observations with positive multiplicities.
///
/// The map is kept in canonical (sorted) order, so two samples are equal
/// exactly when they contain the same observations with the same counts.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct WeightedSample {
    entries: BTreeMap<Observation, u64>,
}

impl WeightedSample {
    /// Builds a sample from `(observation, multiplicity)` pairs, merging
    /// duplicates. Fails on an empty result or a zero multiplicity.
    pub fn from_counts(pairs: impl IntoIterator<Item = (Observation, u64)>) -> Result<Self> {
        let mut entries = BTreeMap::new();
        for (obs, count) in pairs {
            if count == 0 {
                return Err(Error::Precondition(format!(
                    "multiplicity of {obs} must be positive"
                )));
            }
            *entries.entry(obs).or_insert(0u64) += count;
        }
        if entries.is_empty() {
            return Err(Error::EmptySample);
        }
        Ok(Self { entries })
    }

    pub fn from_observations(obs: impl IntoIterator<Item = Observation>) -> Result<Self> {
        Self::from_counts(obs.into_iter().map(|o| (o, 1)))
    }

    pub fn of_reals(values: &[f64]) -> Result<Self> {
        Self::from_observations(values.iter().map(|&v| Observation::real(v)))
    }

    pub fn single(obs: Observation) -> Self {
        Self {
            entries: BTreeMap::from([(obs, 1)]),
        }
    }

    /// Total number of observations counted with multiplicity.
    pub fn size(&self) -> u64 {
        self.entries.values().sum()
    }

    pub fn distinct(&self) -> usize {
        self.entries.len()
    }

    pub fn multiplicity(&self, obs: &Observation) -> u64 {
        self.entries.get(obs).copied().unwrap_or(0)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&Observation, u64)> + '_ {
        self.entries.iter().map(|(o, &m)| (o, m))
    }

    pub fn observations(&self) -> impl Iterator<Item = &Observation> + '_ {
        self.entries.keys()
    }

    /// Multiset union: multiplicities add pointwise.
    pub fn concat(&self, other: &WeightedSample) -> WeightedSample {
        let mut entries = self.entries.clone();
        for (obs, &m) in &other.entries {
            *entries.entry(obs.clone()).or_insert(0) += m;
        }
        WeightedSample { entries }
    }

    /// `n`-fold union of the sample with itself.
    pub fn replicate(&self, n: u64) -> Result<WeightedSample> {
        if n == 0 {
            return Err(Error::ZeroReplication);
        }
        Ok(WeightedSample {
            entries: self
                .entries
                .iter()
                .map(|(o, &m)| (o.clone(), m * n))
                .collect(),
        })
    }

    /// Expanded list in canonical order.
    pub fn to_list(&self) -> Vec<Observation> {
        self.entries
            .iter()
            .flat_map(|(o, &m)| std::iter::repeat_n(o.clone(), m as usize))
            .collect()
    }

    /// Real values of numeric observations, `None` if any is symbolic.
    pub fn real_range<T: Real>(&self) -> Option<(T, T)> {
        let mut lo = T::infinity();
        let mut hi = T::neg_infinity();
        for obs in self.entries.keys() {
            let v = obs.to_real::<T>()?;
            lo = lo.min(v);
            hi = hi.max(v);
        }
        Some((lo, hi))
    }
}

impl fmt::Display for WeightedSample {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{")?;
        for (i, (obs, m)) in self.entries.iter().enumerate() {
            if i > 0 {
                write!(f, ", ")?;
            }
            if *m == 1 {
                write!(f, "{obs}")?;
            } else {
                write!(f, "{obs}:x{m}")?;
            }
        }
        write!(f, "}}")
    }
}

#[derive(Serialize, Deserialize)]
struct SampleEntry {
    value: Observation,
    count: u64,
}

impl Serialize for WeightedSample {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let v: Vec<SampleEntry> = self
            .entries
            .iter()
            .map(|(o, &m)| SampleEntry {
                value: o.clone(),
                count: m,
            })
            .collect();
        v.serialize(s)
    }
}

impl<'de> Deserialize<'de> for WeightedSample {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let v: Vec<SampleEntry> = Vec::deserialize(d)?;
        WeightedSample::from_counts(v.into_iter().map(|e| (e.value, e.count)))
            .map_err(serde::de::Error::custom)
    }
}

/// Capability claims of a score family: continuity in the parameter `C`,
/// sign-change estimator for every sample `T`, vanishing score sum at the
/// estimator `Z`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct Claims {
    pub continuous: bool,
    pub sign_change: bool,
    pub zero: bool,
}

impl Claims {
    pub const NONE: Claims = Claims {
        continuous: false,
        sign_change: false,
        zero: false,
    };
    pub const CTZ: Claims = Claims {
        continuous: true,
        sign_change: true,
        zero: true,
    };
    pub const C: Claims = Claims {
        continuous: true,
        sign_change: false,
        zero: false,
    };
    pub const T: Claims = Claims {
        continuous: false,
        sign_change: true,
        zero: false,
    };
}

impl fmt::Display for Claims {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut parts = Vec::new();
        if self.continuous {
            parts.push("C");
        }
        if self.sign_change {
            parts.push("T");
        }
        if self.zero {
            parts.push("Z");
        }
        write!(f, "{{{}}}", parts.join(","))
    }
}

/// Which observations a score family or oracle accepts.
#[derive(Debug, Clone, PartialEq)]
pub enum ObservationDomain<T> {
    AnyReal,
    Interval(ParameterInterval<T>),
    Alphabet(Vec<Observation>),
}

impl<T: Real> ObservationDomain<T> {
    pub fn contains(&self, obs: &Observation) -> bool {
        match self {
            ObservationDomain::AnyReal => obs.to_real::<T>().is_some_and(|v| v.is_finite()),
            ObservationDomain::Interval(i) => obs.to_real::<T>().is_some_and(|v| i.contains(v)),
            ObservationDomain::Alphabet(a) => a.binary_search(obs).is_ok(),
        }
    }
}

type ScoreFn<T> = dyn Fn(&Observation, T) -> T + Send + Sync;

/// A score function `psi(x, t)` on observations times an open parameter
/// interval, with declared capability claims.
#[derive(Clone)]
pub struct ScoreFamily<T> {
    name: String,
    domain: ParameterInterval<T>,
    observations: ObservationDomain<T>,
    claims: Claims,
    eval: Arc<ScoreFn<T>>,
}

impl<T: Real> ScoreFamily<T> {
    pub fn new(
        name: impl Into<String>,
        domain: ParameterInterval<T>,
        observations: ObservationDomain<T>,
        claims: Claims,
        eval: impl Fn(&Observation, T) -> T + Send + Sync + 'static,
    ) -> Self {
        Self {
            name: name.into(),
            domain,
            observations,
            claims,
            eval: Arc::new(eval),
        }
    }

    pub fn eval(&self, x: &Observation, t: T) -> T {
        (self.eval)(x, t)
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn domain(&self) -> &ParameterInterval<T> {
        &self.domain
    }

    pub fn observation_domain(&self) -> &ObservationDomain<T> {
        &self.observations
    }

    pub fn claims(&self) -> Claims {
        self.claims
    }

    pub fn with_claims(mut self, claims: Claims) -> Self {
        self.claims = claims;
        self
    }

    pub fn with_name(mut self, name: impl Into<String>) -> Self {
        self.name = name.into();
        self
    }

    /// Rejects samples containing observations outside the family's domain.
    pub fn check_sample(&self, sample: &WeightedSample) -> Result<()> {
        match sample
            .observations()
            .find(|o| !self.observations.contains(o))
        {
            Some(o) => Err(Error::ObservationOutOfDomain {
                family: self.name.clone(),
                observation: o.to_string(),
            }),
            None => Ok(()),
        }
    }
}

impl<T: Real> fmt::Debug for ScoreFamily<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ScoreFamily")
            .field("name", &self.name)
            .field("domain", &self.domain)
            .field("claims", &self.claims)
            .finish_non_exhaustive()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Provenance {
    FromScoreFamily,
    FromTable,
    Builtin,
}

type OracleFn<T> = dyn Fn(&WeightedSample) -> Result<T> + Send + Sync;

/// Black-box estimator evaluated on multisets; symmetric by construction.
#[derive(Clone)]
pub struct EstimatorOracle<T> {
    name: String,
    provenance: Provenance,
    eval: Arc<OracleFn<T>>,
}

impl<T: Real> EstimatorOracle<T> {
    pub fn new(
        name: impl Into<String>,
        provenance: Provenance,
        eval: impl Fn(&WeightedSample) -> Result<T> + Send + Sync + 'static,
    ) -> Self {
        Self {
            name: name.into(),
            provenance,
            eval: Arc::new(eval),
        }
    }

    pub fn eval(&self, sample: &WeightedSample) -> Result<T> {
        (self.eval)(sample)
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn provenance(&self) -> Provenance {
        self.provenance
    }
}

impl<T: Real> fmt::Debug for EstimatorOracle<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("EstimatorOracle")
            .field("name", &self.name)
            .field("provenance", &self.provenance)
            .finish_non_exhaustive()
    }
}

type ListFn<T> = dyn Fn(&[Observation]) -> Result<T> + Send + Sync;

/// Estimator evaluated on ordered lists; may or may not be symmetric.
#[derive(Clone)]
pub struct ListOracle<T> {
    name: String,
    multiset_backed: bool,
    eval: Arc<ListFn<T>>,
}

impl<T: Real> ListOracle<T> {
    pub fn new(
        name: impl Into<String>,
        eval: impl Fn(&[Observation]) -> Result<T> + Send + Sync + 'static,
    ) -> Self {
        Self {
            name: name.into(),
            multiset_backed: false,
            eval: Arc::new(eval),
        }
    }

    /// Wraps a multiset oracle; the list is canonicalized before evaluation.
    pub fn from_multiset(oracle: EstimatorOracle<T>) -> Self {
        let name = oracle.name().to_string();
        Self {
            name,
            multiset_backed: true,
            eval: Arc::new(move |xs: &[Observation]| {
                oracle.eval(&WeightedSample::from_observations(xs.iter().cloned())?)
            }),
        }
    }

    pub fn eval(&self, xs: &[Observation]) -> Result<T> {
        (self.eval)(xs)
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn is_multiset_backed(&self) -> bool {
        self.multiset_backed
    }
}

impl<T: Real> fmt::Debug for ListOracle<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ListOracle")
            .field("name", &self.name)
            .field("multiset_backed", &self.multiset_backed)
            .finish_non_exhaustive()
    }
}

/// Numerical knobs for bracketing and bisection.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Tolerances<T> {
    pub bracket_growth: T,
    pub root_abs_tol: T,
    pub plateau_width_tol: T,
    pub zero_tol: T,
    pub max_bracket_steps: usize,
    pub max_bisect_steps: usize,
}

impl<T: Real> Default for Tolerances<T> {
    fn default() -> Self {
        Self {
            bracket_growth: T::lit(2.0),
            root_abs_tol: T::lit(1e-12),
            plateau_width_tol: T::lit(1e-9),
            zero_tol: T::lit(1e-10),
            max_bracket_steps: 200,
            max_bisect_steps: 200,
        }
    }
}

impl<T: Real> Tolerances<T> {
    pub fn validate(&self) -> Result<()> {
        let bad = |what: &str| Err(Error::InvalidTolerances(what.to_string()));
        if !(self.bracket_growth > T::one()) {
            return bad("bracket_growth must exceed 1");
        }
        for (name, v) in [
            ("root_abs_tol", self.root_abs_tol),
            ("plateau_width_tol", self.plateau_width_tol),
            ("zero_tol", self.zero_tol),
        ] {
            if !(v > T::zero()) || !v.is_finite() {
                return bad(&format!("{name} must be positive and finite"));
            }
        }
        if self.max_bracket_steps == 0 || self.max_bisect_steps == 0 {
            return bad("step limits must be at least 1");
        }
        Ok(())
    }
}
