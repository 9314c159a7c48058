//! Desk-scale synthesis of a score table from a black-box estimator.
//!
//! For each grid point `t` the multisets of size at most `N` split into
//! `A_t` (estimate below `t`) and `B_t` (above). An additive functional
//! `F(s) = sum_x m_s(x) c_x` negative on `A_t` and positive on `B_t` is found
//! by an exact LP maximizing the margin; `psi(x, t) = c_x` then has the
//! decreasing-type orientation directly (score sums are positive for samples
//! whose estimate lies right of `t`). A zero margin yields a dual certificate:
//! integer weights under which both sides sum to the same multiset.

use std::collections::BTreeMap;
use std::path::Path;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{
    Claims, EstimatorOracle, Observation, ObservationDomain, ParameterInterval, ScoreFamily,
    WeightedSample,
};
use crate::scalar::{LpScalar, Real};

use super::semigroup::{classify, enumerate_multisets, Level};
use super::simplex::{solve, LpOutcome, LpProblem};

pub const ORIENTATION: &str = "decreasing-type";

/// Offset in `(0, 1)` placing grid points away from rational ties.
const GRID_OFFSET: f64 = 0.381_966;

/// `n` points in `(lo, hi)`, one per cell of a uniform partition, at an
/// irrational-looking offset so that they avoid means of small integer
/// samples.
pub fn tie_avoiding_grid(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    (0..n)
        .map(|j| lo + (hi - lo) * (j as f64 + GRID_OFFSET) / n as f64)
        .collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct PsiTable {
    pub alphabet: Vec<Observation>,
    pub theta_grid: Vec<f64>,
    pub theta_interval: Option<(f64, f64)>,
    pub boundary_tol: f64,
    pub max_size: usize,
    /// `values[i][j] = psi(alphabet[i], theta_grid[j])`.
    pub values: Vec<Vec<BigRational>>,
    /// Optimal LP margin per grid point.
    pub margins: Vec<BigRational>,
}

#[derive(Serialize, Deserialize)]
struct TableHeader {
    orientation: String,
    alphabet: Vec<Observation>,
    theta_grid: Vec<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    theta_interval: Option<(f64, f64)>,
    boundary_tol: f64,
    max_size: usize,
    margins: Vec<String>,
}

#[derive(Serialize, Deserialize)]
struct TableRow {
    observation: Observation,
    values: Vec<String>,
}

#[derive(Serialize, Deserialize)]
struct TableFile {
    header: TableHeader,
    rows: Vec<TableRow>,
}

fn parse_rational(s: &str) -> Result<BigRational> {
    BigRational::parse_lenient(s).ok_or_else(|| Error::InvalidTable(format!("bad rational `{s}`")))
}

impl PsiTable {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidTable(m));
        if self.alphabet.is_empty() || self.theta_grid.is_empty() {
            return bad("alphabet and grid must be nonempty".into());
        }
        if self.alphabet.windows(2).any(|w| w[0] >= w[1]) {
            return bad("alphabet must be sorted without duplicates".into());
        }
        if self.theta_grid.iter().any(|t| !t.is_finite())
            || self.theta_grid.windows(2).any(|w| w[0] >= w[1])
        {
            return bad("theta grid must be finite and strictly increasing".into());
        }
        if self.values.len() != self.alphabet.len()
            || self.values.iter().any(|r| r.len() != self.theta_grid.len())
        {
            return bad("value matrix must be alphabet × grid".into());
        }
        if self.margins.len() != self.theta_grid.len() {
            return bad("one margin per grid point".into());
        }
        if let Some((lo, hi)) = self.theta_interval {
            if !(lo < hi) || self.theta_grid.iter().any(|&t| t <= lo || t >= hi) {
                return bad("grid must lie inside the parameter interval".into());
            }
        }
        Ok(())
    }

    pub fn row(&self, x: &Observation) -> Option<&[BigRational]> {
        self.alphabet
            .binary_search(x)
            .ok()
            .map(|i| self.values[i].as_slice())
    }

    /// Exact score sum of `s` at grid column `j`.
    pub fn score_sum_at(&self, s: &WeightedSample, j: usize) -> Option<BigRational> {
        let mut acc = BigRational::zero();
        for (x, m) in s.iter() {
            acc += &self.row(x)?[j] * BigRational::from_integer(BigInt::from(m));
        }
        Some(acc)
    }

    pub fn to_json(&self) -> Result<String> {
        let file = TableFile {
            header: TableHeader {
                orientation: ORIENTATION.into(),
                alphabet: self.alphabet.clone(),
                theta_grid: self.theta_grid.clone(),
                theta_interval: self.theta_interval,
                boundary_tol: self.boundary_tol,
                max_size: self.max_size,
                margins: self.margins.iter().map(ToString::to_string).collect(),
            },
            rows: self
                .alphabet
                .iter()
                .zip(&self.values)
                .map(|(o, r)| TableRow {
                    observation: o.clone(),
                    values: r.iter().map(ToString::to_string).collect(),
                })
                .collect(),
        };
        serde_json::to_string_pretty(&file).map_err(|e| Error::InvalidTable(e.to_string()))
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let file: TableFile =
            serde_json::from_str(text).map_err(|e| Error::InvalidTable(e.to_string()))?;
        let h = file.header;
        if h.orientation != ORIENTATION {
            return Err(Error::InvalidTable(format!(
                "unsupported orientation `{}`",
                h.orientation
            )));
        }
        if file.rows.len() != h.alphabet.len()
            || file
                .rows
                .iter()
                .zip(&h.alphabet)
                .any(|(r, a)| &r.observation != a)
        {
            return Err(Error::InvalidTable(
                "rows must follow the header alphabet".into(),
            ));
        }
        let values = file
            .rows
            .iter()
            .map(|r| r.values.iter().map(|v| parse_rational(v)).collect())
            .collect::<Result<Vec<Vec<_>>>>()?;
        let margins = h
            .margins
            .iter()
            .map(|v| parse_rational(v))
            .collect::<Result<_>>()?;
        let table = PsiTable {
            alphabet: h.alphabet,
            theta_grid: h.theta_grid,
            theta_interval: h.theta_interval,
            boundary_tol: h.boundary_tol,
            max_size: h.max_size,
            values,
            margins,
        };
        table.validate()?;
        Ok(table)
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_json()?)?;
        Ok(())
    }

    pub fn read(path: &Path) -> Result<Self> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }
}

/// Score family backed by a table: linear between grid columns, constant
/// beyond the first and last. Observations outside the alphabet score NaN
/// and are rejected by the sample check.
pub fn table_score<T: Real>(table: &PsiTable, name: &str) -> Result<ScoreFamily<T>> {
    table.validate()?;
    let domain = match table.theta_interval {
        Some((lo, hi)) => ParameterInterval::new(T::lit(lo), T::lit(hi))?,
        None => ParameterInterval::real_line(),
    };
    let grid: Vec<T> = table.theta_grid.iter().map(|&t| T::lit(t)).collect();
    let rows: Vec<Vec<T>> = table
        .values
        .iter()
        .map(|r| r.iter().map(|v| T::lit(LpScalar::to_f64(v))).collect())
        .collect();
    let alphabet = table.alphabet.clone();
    Ok(ScoreFamily::new(
        name,
        domain,
        ObservationDomain::Alphabet(table.alphabet.clone()),
        Claims::NONE,
        move |x, t| {
            let Ok(i) = alphabet.binary_search(x) else {
                return T::nan();
            };
            interpolate(&grid, &rows[i], t)
        },
    ))
}

fn interpolate<T: Real>(grid: &[T], v: &[T], t: T) -> T {
    let last = grid.len() - 1;
    if t <= grid[0] {
        return v[0];
    }
    if t >= grid[last] {
        return v[last];
    }
    let j = grid.partition_point(|&g| g <= t) - 1;
    let w = (t - grid[j]) / (grid[j + 1] - grid[j]);
    v[j] + w * (v[j + 1] - v[j])
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CertificateTerm {
    pub side: Level,
    pub sample: WeightedSample,
    pub weight: u64,
    pub mu: f64,
}

/// Integer weights on multisets of `A_t` and `B_t` whose weighted sums are
/// the same multiset, so no additive functional separates the two sides.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InfeasibilityCertificate {
    pub t: f64,
    pub terms: Vec<CertificateTerm>,
    pub witness: String,
}

impl InfeasibilityCertificate {
    /// Exact integer check that both sides sum to the same nonempty multiset.
    pub fn combination_balances(&self) -> bool {
        let mut balance: BTreeMap<&Observation, i128> = BTreeMap::new();
        let mut total: u128 = 0;
        for term in &self.terms {
            let sign: i128 = match term.side {
                Level::InA => 1,
                Level::InB => -1,
                Level::Boundary => return false,
            };
            total += term.weight as u128;
            for (x, m) in term.sample.iter() {
                *balance.entry(x).or_insert(0) += sign * term.weight as i128 * m as i128;
            }
        }
        total >= 1 && balance.values().all(|&v| v == 0)
    }

    /// Re-evaluates every term's side with `m` and checks the balance.
    pub fn revalidate(&self, m: &EstimatorOracle<f64>, boundary_tol: f64) -> Result<bool> {
        for term in &self.terms {
            if classify(m.eval(&term.sample)?, self.t, boundary_tol) != term.side {
                return Ok(false);
            }
        }
        Ok(self.combination_balances())
    }
}

fn describe(terms: &[CertificateTerm], t: f64) -> String {
    let side = |level: Level| {
        let parts: Vec<String> = terms
            .iter()
            .filter(|c| c.side == level)
            .map(|c| format!("{}×{}", c.weight, c.sample))
            .collect();
        parts.join(" + ")
    };
    format!(
        "{} (estimates below {t}) equals {} (estimates above {t}) as multisets",
        side(Level::InA),
        side(Level::InB)
    )
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridPointSummary {
    pub t: f64,
    pub in_a: usize,
    pub in_b: usize,
    pub boundary: usize,
    pub margin: f64,
    pub pivots: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Synthesis {
    Table(PsiTable),
    Infeasible(InfeasibilityCertificate),
}

#[derive(Debug, Clone, PartialEq)]
pub struct SynthesisOutcome {
    pub result: Synthesis,
    pub grid: Vec<GridPointSummary>,
    pub multisets: usize,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SynthesisConfig {
    pub boundary_tol: f64,
    pub max_pivots: usize,
    pub enumeration_cap: u128,
    pub theta_interval: Option<(f64, f64)>,
}

impl Default for SynthesisConfig {
    fn default() -> Self {
        Self {
            boundary_tol: 1e-9,
            max_pivots: 200_000,
            enumeration_cap: super::semigroup::DEFAULT_ENUMERATION_CAP,
            theta_interval: None,
        }
    }
}

fn int(n: i64) -> BigRational {
    BigRational::from_integer(BigInt::from(n))
}

/// Solves one LP per grid point in order. Stops at the first grid point
/// with zero margin and returns its certificate.
pub fn synthesize_psi(
    m: &EstimatorOracle<f64>,
    alphabet: &[Observation],
    theta_grid: &[f64],
    max_size: usize,
    cfg: &SynthesisConfig,
) -> Result<SynthesisOutcome> {
    if theta_grid.is_empty() || theta_grid.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::Precondition(
            "theta grid must be nonempty and increasing".into(),
        ));
    }
    let samples = enumerate_multisets(alphabet, max_size, cfg.enumeration_cap)?;
    let mut symbols = alphabet.to_vec();
    symbols.sort();
    symbols.dedup();
    let k = symbols.len();
    let mus = samples
        .iter()
        .map(|s| m.eval(s))
        .collect::<Result<Vec<f64>>>()?;
    let counts: Vec<Vec<i64>> = samples
        .iter()
        .map(|s| symbols.iter().map(|x| s.multiplicity(x) as i64).collect())
        .collect();

    let mut grid_summary = Vec::new();
    let mut values = vec![Vec::with_capacity(theta_grid.len()); k];
    let mut margins = Vec::new();
    for &t in theta_grid {
        let sides: Vec<(usize, Level)> = mus
            .iter()
            .enumerate()
            .map(|(i, &mu)| (i, classify(mu, t, cfg.boundary_tol)))
            .filter(|(_, l)| *l != Level::Boundary)
            .collect();
        let in_a = sides.iter().filter(|(_, l)| *l == Level::InA).count();
        let boundary = samples.len() - sides.len();

        // variables: p_0..p_k, q_0..q_k, eps
        let nvars = 2 * k + 1;
        let mut rows = Vec::with_capacity(sides.len() + nvars);
        let mut rhs = Vec::with_capacity(sides.len() + nvars);
        for &(i, level) in &sides {
            let sign = if level == Level::InA { 1 } else { -1 };
            let mut row = vec![BigRational::zero(); nvars];
            for (x, &c) in counts[i].iter().enumerate() {
                row[x] = int(sign * c);
                row[k + x] = int(-sign * c);
            }
            row[2 * k] = BigRational::one();
            rows.push(row);
            rhs.push(BigRational::zero());
        }
        for v in 0..nvars {
            let mut row = vec![BigRational::zero(); nvars];
            row[v] = BigRational::one();
            rows.push(row);
            rhs.push(BigRational::one());
        }
        let mut objective = vec![BigRational::zero(); nvars];
        objective[2 * k] = BigRational::one();
        let problem = LpProblem {
            objective,
            rows,
            rhs,
        };
        let LpOutcome::Optimal(sol) = solve(&problem, cfg.max_pivots)? else {
            unreachable!("all variables are bounded")
        };
        grid_summary.push(GridPointSummary {
            t,
            in_a,
            in_b: sides.len() - in_a,
            boundary,
            margin: LpScalar::to_f64(&sol.value),
            pivots: sol.pivots,
        });

        if sol.value.is_positive() {
            for (x, row) in values.iter_mut().enumerate() {
                row.push(&sol.primal[x] - &sol.primal[k + x]);
            }
            margins.push(sol.value);
            continue;
        }

        let duals = &sol.dual[..sides.len()];
        let weights = BigRational::integer_weights(duals).ok_or_else(|| {
            Error::Precondition("dual multipliers do not scale to integers".into())
        })?;
        let terms: Vec<CertificateTerm> = sides
            .iter()
            .zip(weights)
            .filter(|(_, w)| *w > 0)
            .map(|(&(i, side), weight)| CertificateTerm {
                side,
                sample: samples[i].clone(),
                weight,
                mu: mus[i],
            })
            .collect();
        let certificate = InfeasibilityCertificate {
            t,
            witness: describe(&terms, t),
            terms,
        };
        debug_assert!(certificate.combination_balances());
        return Ok(SynthesisOutcome {
            result: Synthesis::Infeasible(certificate),
            grid: grid_summary,
            multisets: samples.len(),
        });
    }
    let table = PsiTable {
        alphabet: symbols,
        theta_grid: theta_grid.to_vec(),
        theta_interval: cfg.theta_interval,
        boundary_tol: cfg.boundary_tol,
        max_size,
        values,
        margins,
    };
    table.validate()?;
    Ok(SynthesisOutcome {
        result: Synthesis::Table(table),
        grid: grid_summary,
        multisets: samples.len(),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CellViolation {
    pub sample: WeightedSample,
    pub t: f64,
    pub mu: f64,
    pub score_sum: String,
    /// `+1` when the estimate lies right of `t`, `-1` when left.
    pub expected_sign: i8,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerificationReport {
    pub multisets: usize,
    pub cells_checked: usize,
    pub boundary_cells: usize,
    pub violations: Vec<CellViolation>,
}

impl VerificationReport {
    pub fn passed(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Checks the sign of every exact score sum over all multisets of size at
/// most `max_size` at every grid point against the oracle.
pub fn verify_synthesis(
    table: &PsiTable,
    m: &EstimatorOracle<f64>,
    alphabet: &[Observation],
    max_size: usize,
) -> Result<VerificationReport> {
    table.validate()?;
    if let Some(x) = alphabet.iter().find(|x| table.row(x).is_none()) {
        return Err(Error::Precondition(format!("table has no row for {x}")));
    }
    let samples = enumerate_multisets(
        alphabet,
        max_size,
        super::semigroup::DEFAULT_ENUMERATION_CAP,
    )?;
    let mut report = VerificationReport {
        multisets: samples.len(),
        cells_checked: 0,
        boundary_cells: 0,
        violations: Vec::new(),
    };
    for s in &samples {
        let mu = m.eval(s)?;
        for (j, &t) in table.theta_grid.iter().enumerate() {
            let expected: i8 = match classify(mu, t, table.boundary_tol) {
                Level::Boundary => {
                    report.boundary_cells += 1;
                    continue;
                }
                Level::InA => -1,
                Level::InB => 1,
            };
            report.cells_checked += 1;
            let sum = table.score_sum_at(s, j).expect("row present");
            let ok = match expected {
                1 => sum.is_positive(),
                _ => sum.is_negative(),
            };
            if !ok {
                report.violations.push(CellViolation {
                    sample: s.clone(),
                    t,
                    mu,
                    score_sum: sum.to_string(),
                    expected_sign: expected,
                });
            }
        }
    }
    Ok(report)
}
