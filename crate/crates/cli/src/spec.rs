//! Parsers for the small textual languages on the command line: score
//! families, generators, means, intervals and tolerance overrides.

use std::path::Path;

use psiaxiom::catalog::{arctan_score, huber_score, median_score, qa_score, step_score};
use psiaxiom::model::{EstimatorOracle, ListOracle};
use psiaxiom::oracles::{
    builtin_list_oracle, builtin_mean_sequence, builtin_oracle, quasi_arithmetic, MeanSequence,
};
use psiaxiom::proofkit::{table_score, PsiTable};
use psiaxiom::{Generator, Interval, Score, Tolerances};

#[derive(Debug, thiserror::Error)]
pub enum SpecError {
    #[error("unknown {kind} `{name}`")]
    Unknown { kind: &'static str, name: String },

    #[error("malformed `{spec}`: {reason}")]
    Malformed { spec: String, reason: String },

    #[error(transparent)]
    Core(#[from] psiaxiom::Error),
}

fn malformed(spec: &str, reason: impl Into<String>) -> SpecError {
    SpecError::Malformed {
        spec: spec.into(),
        reason: reason.into(),
    }
}

fn number(spec: &str, raw: &str) -> Result<f64, SpecError> {
    raw.trim()
        .parse::<f64>()
        .map_err(|_| malformed(spec, format!("`{raw}` is not a number")))
}

/// `id`, `ln`, `recip` or `pow:<p>`.
pub fn parse_generator(spec: &str) -> Result<Generator, SpecError> {
    match spec.trim() {
        "id" => Ok(Generator::identity()),
        "ln" => Ok(Generator::ln()),
        "recip" => Ok(Generator::reciprocal()),
        s => match s.strip_prefix("pow:") {
            Some(p) => Ok(Generator::power(number(spec, p)?)?),
            None => Err(SpecError::Unknown {
                kind: "generator",
                name: s.into(),
            }),
        },
    }
}

/// `qa:<generator>`, `huber:<kappa>`, `arctan`, `median`, `step` or
/// `table:<path>`.
pub fn parse_psi_spec(spec: &str) -> Result<Score, SpecError> {
    let s = spec.trim();
    if let Some(g) = s.strip_prefix("qa:") {
        return Ok(qa_score(&parse_generator(g)?));
    }
    if let Some(k) = s.strip_prefix("huber:") {
        return Ok(huber_score(number(spec, k)?)?);
    }
    if let Some(path) = s.strip_prefix("table:") {
        let table = PsiTable::read(Path::new(path))?;
        return Ok(table_score(&table, s)?);
    }
    match s {
        "arctan" => Ok(arctan_score()),
        "median" => Ok(median_score()),
        "step" => Ok(step_score()),
        "huber" | "qa" | "table" => Err(malformed(spec, "missing parameter")),
        _ => Err(SpecError::Unknown {
            kind: "score family",
            name: s.into(),
        }),
    }
}

/// A builtin estimator name, or `qa:<generator>` for its quasi-arithmetic
/// mean.
pub fn parse_oracle(spec: &str) -> Result<EstimatorOracle<f64>, SpecError> {
    match spec.trim().strip_prefix("qa:") {
        Some(g) => Ok(quasi_arithmetic(&parse_generator(g)?)),
        None => builtin_oracle(spec.trim()).map_err(|_| SpecError::Unknown {
            kind: "estimator",
            name: spec.trim().into(),
        }),
    }
}

pub fn parse_list_oracle(spec: &str) -> Result<ListOracle<f64>, SpecError> {
    match spec.trim().strip_prefix("qa:") {
        Some(_) => Ok(ListOracle::from_multiset(parse_oracle(spec)?)),
        None => builtin_list_oracle(spec.trim()).map_err(|_| SpecError::Unknown {
            kind: "estimator",
            name: spec.trim().into(),
        }),
    }
}

pub fn parse_mean_sequence(spec: &str) -> Result<MeanSequence<f64>, SpecError> {
    match spec.trim().strip_prefix("qa:") {
        Some(g) => Ok(MeanSequence::quasi_arithmetic(&parse_generator(g)?)),
        None => builtin_mean_sequence(spec.trim()).map_err(|_| SpecError::Unknown {
            kind: "mean sequence",
            name: spec.trim().into(),
        }),
    }
}

/// `lo:hi`, where either end may be `-inf` / `inf`.
pub fn parse_interval(spec: &str) -> Result<Interval, SpecError> {
    let (lo, hi) = spec
        .split_once(':')
        .ok_or_else(|| malformed(spec, "expected lo:hi"))?;
    Ok(Interval::new(number(spec, lo)?, number(spec, hi)?)?)
}

/// Finite `lo:hi`.
pub fn parse_range(spec: &str) -> Result<(f64, f64), SpecError> {
    let i = parse_interval(spec)?;
    if !i.is_bounded() {
        return Err(malformed(spec, "range ends must be finite"));
    }
    Ok((i.lo(), i.hi()))
}

/// Knobs adjustable through `--tol k=v,...`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ToleranceOverrides {
    pub estimation: Tolerances,
    /// Equality / strictness tolerance for the axiom checks.
    pub axiom: f64,
    /// Bound on one-sided limits in the z-limit diagnostic.
    pub limit: f64,
    /// Distance from `mu(s)` within which synthesis skips a constraint.
    pub boundary: f64,
}

impl Default for ToleranceOverrides {
    fn default() -> Self {
        Self {
            estimation: Tolerances::default(),
            axiom: 1e-9,
            limit: 1e-8,
            boundary: 1e-9,
        }
    }
}

pub const TOLERANCE_KEYS: &[&str] = &[
    "root_abs_tol",
    "plateau_width_tol",
    "zero_tol",
    "bracket_growth",
    "max_bracket_steps",
    "max_bisect_steps",
    "axiom",
    "limit",
    "boundary",
];

pub fn parse_tolerances(spec: &str) -> Result<ToleranceOverrides, SpecError> {
    let mut t = ToleranceOverrides::default();
    for item in spec.split(',').map(str::trim).filter(|s| !s.is_empty()) {
        let (key, raw) = item
            .split_once('=')
            .ok_or_else(|| malformed(item, "expected key=value"))?;
        let (key, raw) = (key.trim(), raw.trim());
        let steps = || {
            raw.parse::<usize>()
                .map_err(|_| malformed(item, format!("`{raw}` is not a count")))
        };
        match key {
            "root_abs_tol" => t.estimation.root_abs_tol = number(item, raw)?,
            "plateau_width_tol" => t.estimation.plateau_width_tol = number(item, raw)?,
            "zero_tol" => t.estimation.zero_tol = number(item, raw)?,
            "bracket_growth" => t.estimation.bracket_growth = number(item, raw)?,
            "max_bracket_steps" => t.estimation.max_bracket_steps = steps()?,
            "max_bisect_steps" => t.estimation.max_bisect_steps = steps()?,
            "axiom" => t.axiom = number(item, raw)?,
            "limit" => t.limit = number(item, raw)?,
            "boundary" => t.boundary = number(item, raw)?,
            _ => {
                return Err(SpecError::Unknown {
                    kind: "tolerance key (expected one of root_abs_tol, plateau_width_tol, zero_tol, bracket_growth, max_bracket_steps, max_bisect_steps, axiom, limit, boundary)",
                    name: key.into(),
                })
            }
        }
    }
    t.estimation.validate()?;
    for (name, v) in [
        ("axiom", t.axiom),
        ("limit", t.limit),
        ("boundary", t.boundary),
    ] {
        if !(v.is_finite() && v > 0.0) {
            return Err(malformed(spec, format!("{name} must be positive")));
        }
    }
    Ok(t)
}

#[cfg(test)]
mod tests {
    use super::*;
    use psiaxiom::estimator::estimate;
    use psiaxiom::WeightedSample;

    #[test]
    fn catalog_names_resolve() {
        for s in [
            "qa:id",
            "qa:ln",
            "qa:recip",
            "qa:pow:2",
            "qa:pow:-1",
            "huber:1.5",
            "arctan",
            "median",
            "step",
        ] {
            parse_psi_spec(s).unwrap();
        }
        let huber = parse_psi_spec("huber:1.5").unwrap();
        assert!(huber.name().contains("1.5"));
        let s = WeightedSample::of_reals(&[1.0, 4.0]).unwrap();
        let geo = estimate(
            &parse_psi_spec("qa:ln").unwrap(),
            &s,
            &Tolerances::default(),
        )
        .unwrap();
        assert!((geo.theta - 2.0).abs() < 1e-12);
    }

    #[test]
    fn bad_specs_rejected() {
        assert!(matches!(
            parse_psi_spec("qa:pow:0"),
            Err(SpecError::Core(_))
        ));
        assert!(matches!(
            parse_psi_spec("huber:abc"),
            Err(SpecError::Malformed { .. })
        ));
        assert!(matches!(
            parse_psi_spec("huber:-1"),
            Err(SpecError::Core(_))
        ));
        assert!(matches!(
            parse_psi_spec("huber"),
            Err(SpecError::Malformed { .. })
        ));
        assert!(matches!(
            parse_psi_spec("qa:exp"),
            Err(SpecError::Unknown { .. })
        ));
        assert!(matches!(
            parse_psi_spec("tukey"),
            Err(SpecError::Unknown { .. })
        ));
        assert!(parse_psi_spec("table:/nonexistent/table.json").is_err());
    }

    #[test]
    fn oracles_and_means() {
        let m = parse_oracle("qa:ln").unwrap();
        let s = WeightedSample::of_reals(&[1.0, 4.0]).unwrap();
        assert!((m.eval(&s).unwrap() - 2.0).abs() < 1e-12);
        assert!(parse_oracle("sum").is_ok());
        assert!(parse_oracle("first-biased").is_err());
        assert!(parse_list_oracle("first-biased").is_ok());
        assert!((parse_mean_sequence("qa:recip").unwrap().eval(&[1.0, 1.0]) - 1.0).abs() < 1e-12);
        assert!(parse_mean_sequence("sum").is_err());
    }

    #[test]
    fn intervals() {
        let i = parse_interval("-inf:inf").unwrap();
        assert!(!i.is_bounded());
        let i = parse_interval("0:1").unwrap();
        assert_eq!((i.lo(), i.hi()), (0.0, 1.0));
        assert!(parse_interval("1:0").is_err());
        assert!(parse_interval("0-1").is_err());
        assert!(parse_range("0:inf").is_err());
    }

    #[test]
    fn tolerance_overrides() {
        let t = parse_tolerances("zero_tol=1e-8, axiom=1e-3,max_bisect_steps=50").unwrap();
        assert_eq!(t.estimation.zero_tol, 1e-8);
        assert_eq!(t.axiom, 1e-3);
        assert_eq!(t.estimation.max_bisect_steps, 50);
        assert_eq!(parse_tolerances("").unwrap(), ToleranceOverrides::default());
        assert!(matches!(
            parse_tolerances("epsilon=1"),
            Err(SpecError::Unknown { .. })
        ));
        assert!(parse_tolerances("zero_tol").is_err());
        assert!(parse_tolerances("axiom=-1").is_err());
        assert_eq!(TOLERANCE_KEYS.len(), 9);
    }
}
