//! The ratio `f_{x,y}(t) = -S_x(t) / S_y(t)` of two score sums, its
//! diagnostics, the anchor normalization of a score family, and the check of
//! the zero property through one-sided limits of the ratio.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::estimator::{estimate, score_sum};
use crate::model::{Observation, ObservationDomain, ScoreFamily, Tolerances, WeightedSample};
use crate::scalar::Real;

/// `-score_sum(x_block, t) / score_sum(y_block, t)`.
pub fn ratio_fn<T: Real>(
    psi: &ScoreFamily<T>,
    x_block: &WeightedSample,
    y_block: &WeightedSample,
    t: T,
    tol: &Tolerances<T>,
) -> Result<T> {
    let den = score_sum(psi, y_block, t);
    if den.abs() <= tol.zero_tol {
        return Err(Error::DenominatorNearZero {
            t: t.as_f64(),
            value: den.as_f64(),
        });
    }
    Ok(-score_sum(psi, x_block, t) / den)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Direction {
    Increasing,
    Decreasing,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RatioDiagnostic {
    pub x_block: WeightedSample,
    pub y_block: WeightedSample,
    pub x_estimate: f64,
    /// Estimate of the y-block; the ratio is undefined there.
    pub domain_gap: f64,
    /// Interior grid over the interval between the two estimates.
    pub grid: Vec<f64>,
    pub values: Vec<f64>,
    /// Grid points dropped because the denominator vanished.
    pub skipped: usize,
    pub expected_direction: Direction,
    pub positive_on_gap_interval: bool,
    pub monotone_on_gap_interval: bool,
    pub continuity_consistent: bool,
    /// Largest jump between neighbours on the continuity window.
    pub max_jump: f64,
    /// Same on the 4× refined grid.
    pub refined_max_jump: f64,
}

/// Largest absolute difference between neighbouring values of `f` over
/// `segments`, each sampled at a number of points proportional to its
/// length.
fn max_adjacent_jump<T: Real>(
    f: &impl Fn(T) -> Result<T>,
    segments: &[(f64, f64)],
    points: usize,
) -> f64 {
    let total: f64 = segments.iter().map(|(a, b)| b - a).sum();
    let mut worst = 0.0f64;
    for &(a, b) in segments {
        let k = ((points as f64) * (b - a) / total).ceil().max(2.0) as usize;
        let mut prev: Option<f64> = None;
        for j in 0..k {
            let t = a + (b - a) * j as f64 / (k - 1) as f64;
            match f(T::lit(t)) {
                Ok(v) => {
                    let v = v.as_f64();
                    if let Some(p) = prev {
                        worst = worst.max((v - p).abs());
                    }
                    prev = Some(v);
                }
                Err(_) => prev = None,
            }
        }
    }
    worst
}

/// Evaluates the ratio between the two block estimates and flags
/// positivity, the expected monotone direction and continuity.
///
/// Continuity is judged on a window extending half the gap beyond both
/// estimates (clipped to the parameter interval) with a tenth of the gap
/// cut out around the y-estimate, where the ratio has its pole. It counts as
/// consistent when refining the grid 4× at least halves the largest jump.
pub fn audit_ratio<T: Real>(
    psi: &ScoreFamily<T>,
    x_block: &WeightedSample,
    y_block: &WeightedSample,
    grid_size: usize,
    tol: &Tolerances<T>,
) -> Result<RatioDiagnostic> {
    let mx = estimate(psi, x_block, tol)?.theta.as_f64();
    let my = estimate(psi, y_block, tol)?.theta.as_f64();
    if (mx - my).abs() <= tol.plateau_width_tol.as_f64() {
        return Err(Error::BlocksEqualEstimate {
            x_estimate: mx,
            y_estimate: my,
        });
    }
    let grid_size = grid_size.max(2);
    let (a, b) = (mx.min(my), mx.max(my));
    let f = |t: T| ratio_fn(psi, x_block, y_block, t, tol);

    let mut grid = Vec::with_capacity(grid_size);
    let mut values = Vec::with_capacity(grid_size);
    let mut skipped = 0;
    for j in 1..=grid_size {
        let t = a + (b - a) * j as f64 / (grid_size + 1) as f64;
        match f(T::lit(t)) {
            Ok(v) => {
                grid.push(t);
                values.push(v.as_f64());
            }
            Err(Error::DenominatorNearZero { .. }) => skipped += 1,
            Err(e) => return Err(e),
        }
    }
    let expected_direction = if mx < my {
        Direction::Increasing
    } else {
        Direction::Decreasing
    };
    let positive = !values.is_empty() && values.iter().all(|&v| v > 0.0);
    let monotone = values.windows(2).all(|w| match expected_direction {
        Direction::Increasing => w[1] > w[0],
        Direction::Decreasing => w[1] < w[0],
    });

    let width = b - a;
    let domain = psi.domain();
    let margin = width * 1e-6;
    let lo = (a - width / 2.0).max(domain.lo().as_f64() + margin);
    let hi = (b + width / 2.0).min(domain.hi().as_f64() - margin);
    let hole = (my - width / 10.0, my + width / 10.0);
    let segments: Vec<(f64, f64)> = [(lo, hole.0), (hole.1, hi)]
        .into_iter()
        .filter(|(s, e)| e > s)
        .collect();
    let max_jump = max_adjacent_jump(&f, &segments, grid_size);
    let refined_max_jump = max_adjacent_jump(&f, &segments, 4 * grid_size);

    Ok(RatioDiagnostic {
        x_block: x_block.clone(),
        y_block: y_block.clone(),
        x_estimate: mx,
        domain_gap: my,
        grid,
        values,
        skipped,
        expected_direction,
        positive_on_gap_interval: positive,
        monotone_on_gap_interval: monotone,
        continuity_consistent: refined_max_jump <= max_jump / 2.0,
        max_jump,
        refined_max_jump,
    })
}

/// `|psi(u, t)| + |psi(v, t)|`.
pub fn normalization_denominator<T: Real>(
    psi: &ScoreFamily<T>,
    u: &Observation,
    v: &Observation,
    t: T,
) -> T {
    psi.eval(u, t).abs() + psi.eval(v, t).abs()
}

/// `psi(x, t) / (|psi(u, t)| + |psi(v, t)|)` for anchors with distinct
/// single-observation estimates. Claims are kept as they are: dividing by a
/// positive continuous function preserves continuity but cannot create it.
pub fn normalize_psi<T: Real>(
    psi_star: &ScoreFamily<T>,
    u: &Observation,
    v: &Observation,
    tol: &Tolerances<T>,
) -> Result<ScoreFamily<T>> {
    let mu = estimate(psi_star, &WeightedSample::single(u.clone()), tol)?.theta;
    let mv = estimate(psi_star, &WeightedSample::single(v.clone()), tol)?.theta;
    if (mu - mv).abs() <= tol.plateau_width_tol {
        return Err(Error::AnchorsIndistinguishable {
            u_estimate: mu.as_f64(),
            v_estimate: mv.as_f64(),
        });
    }
    let inner = psi_star.clone();
    let (u, v) = (u.clone(), v.clone());
    let name = format!("normalized({}; {u}, {v})", psi_star.name());
    let observations: ObservationDomain<T> = psi_star.observation_domain().clone();
    Ok(ScoreFamily::new(
        name,
        *psi_star.domain(),
        observations,
        psi_star.claims(),
        move |x, t| inner.eval(x, t) / normalization_denominator(&inner, &u, &v, t),
    ))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ZLimitReport {
    pub theta: f64,
    pub y_estimate: f64,
    pub h0: f64,
    /// `(h, f(theta - h))` along the halving sequence.
    pub left: Vec<(f64, f64)>,
    /// `(h, f(theta + h))`.
    pub right: Vec<(f64, f64)>,
    pub left_limit: f64,
    pub right_limit: f64,
    /// `score_sum(x_block, theta)` for cross-checking.
    pub direct_residual: f64,
    pub tolerance: f64,
    pub z_consistent: bool,
}

const LIMIT_HALVINGS: usize = 20;

/// One-sided limits of `f_{x,{y}}` at the x-block estimate. Requires the
/// estimate of `{y}` to lie strictly to the right.
///
/// The step starts at `1e3 * root_abs_tol * max(1, |theta|)`, capped at a
/// quarter of the distance to the y-estimate, and halves until `theta ± h`
/// rounds to `theta`, at most 20 times.
pub fn z_via_ratio_limits<T: Real>(
    psi: &ScoreFamily<T>,
    x_block: &WeightedSample,
    y: &Observation,
    tol: &Tolerances<T>,
    limit_tol: f64,
) -> Result<ZLimitReport> {
    let theta = estimate(psi, x_block, tol)?.theta;
    let y_block = WeightedSample::single(y.clone());
    let my = estimate(psi, &y_block, tol)?.theta;
    if !(my > theta + tol.plateau_width_tol) {
        return Err(Error::Precondition(format!(
            "estimate of {{{y}}} ({my}) must exceed the x-block estimate ({theta})"
        )));
    }
    let mut h0 = T::lit(1e3) * tol.root_abs_tol * T::one().max(theta.abs());
    h0 = h0.min((my - theta) / T::lit(4.0));
    if psi.domain().lo().is_finite() {
        h0 = h0.min((theta - psi.domain().lo()) / T::lit(2.0));
    }
    let f = |t: T| ratio_fn(psi, x_block, &y_block, t, tol).map(|v| v.as_f64());
    let mut left = Vec::new();
    let mut right = Vec::new();
    let mut h = h0;
    for _ in 0..=LIMIT_HALVINGS {
        if theta - h == theta || theta + h == theta {
            break;
        }
        left.push((h.as_f64(), f(theta - h)?));
        right.push((h.as_f64(), f(theta + h)?));
        h = h / T::lit(2.0);
    }
    let left_limit = left.last().map_or(f64::NAN, |p| p.1);
    let right_limit = right.last().map_or(f64::NAN, |p| p.1);
    Ok(ZLimitReport {
        theta: theta.as_f64(),
        y_estimate: my.as_f64(),
        h0: h0.as_f64(),
        left,
        right,
        left_limit,
        right_limit,
        direct_residual: score_sum(psi, x_block, theta).as_f64(),
        tolerance: limit_tol,
        z_consistent: left_limit.abs() <= limit_tol && right_limit.abs() <= limit_tol,
    })
}
