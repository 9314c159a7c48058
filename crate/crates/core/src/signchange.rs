//! Point of sign change (of decreasing type) for a real function on an open
//! interval.
//!
//! `theta` is a point of sign change for `f` when `f(t) > 0` for every
//! `t < theta` and `f(t) < 0` for every `t > theta`. The value `f(theta)` is
//! unconstrained and continuity is never assumed, so the search only relies
//! on the sign of evaluated points: `f(t) > 0` implies `t <= theta` and
//! `f(t) < 0` implies `t >= theta`. No derivatives are used.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{ParameterInterval, Tolerances};
use crate::scalar::Real;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SignChangeStatus {
    /// Bracket shrunk below `root_abs_tol` with strict signs on both sides.
    Located,
    /// As `Located`, and `|f(theta)| <= zero_tol`.
    ExactZero,
    /// `f` stays within the zero band on a region wider than
    /// `plateau_width_tol`: no strict sign change exists there.
    Plateau,
    /// No positive-then-negative pair was found.
    NoBracket,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SignChangeResult<T> {
    pub theta: T,
    pub bracket: (T, T),
    pub residual_at_theta: T,
    pub evaluations: usize,
    pub status: SignChangeStatus,
    /// Certified zero-band interval when `status == Plateau`.
    pub plateau: Option<(T, T)>,
    /// Probe log of the bracketing phase when `status == NoBracket`.
    pub probes: Vec<T>,
}

impl<T: Real> SignChangeResult<T> {
    pub fn is_located(&self) -> bool {
        matches!(
            self.status,
            SignChangeStatus::Located | SignChangeStatus::ExactZero
        )
    }
}

/// Outcome of [`bracket_sign_change`].
#[derive(Debug, Clone, PartialEq)]
pub enum BracketSearch<T> {
    /// `f(lo) > 0 > f(hi)` with `lo < hi`.
    Found {
        lo: T,
        hi: T,
        evaluations: usize,
    },
    NoBracket {
        probes: Vec<T>,
        evaluations: usize,
    },
}

/// Probe point number `k` (0-based) moving away from `seed`.
///
/// Toward a finite end the remaining distance is halved each step; toward an
/// infinite end the offset from the seed grows geometrically from
/// `max(1, |seed|)`.
fn probe<T: Real>(domain: &ParameterInterval<T>, seed: T, right: bool, k: usize, growth: T) -> T {
    let end = if right { domain.hi() } else { domain.lo() };
    if end.is_finite() {
        let frac = T::lit(0.5).powi(k as i32 + 1);
        end - (end - seed) * frac
    } else {
        let offset = T::one().max(seed.abs()) * growth.powi(k as i32);
        if right {
            seed + offset
        } else {
            seed - offset
        }
    }
}

/// Searches outward from `seed` for `lo < hi` with `f(lo) > 0 > f(hi)`.
///
/// If `f(seed) > 0` the seed is the left end and only the right side is
/// searched; if `f(seed) < 0` it is the right end; otherwise both sides are
/// searched. Each side gets at most `max_bracket_steps` probes.
pub fn bracket_sign_change<T: Real>(
    f: impl Fn(T) -> T,
    domain: &ParameterInterval<T>,
    seed: T,
    tol: &Tolerances<T>,
) -> Result<BracketSearch<T>> {
    tol.validate()?;
    if !domain.contains(seed) {
        return Err(Error::SeedOutsideDomain {
            seed: seed.as_f64(),
        });
    }
    let fs = f(seed);
    let mut evaluations = 1;
    let mut probes = vec![seed];
    let mut lo = (fs > T::zero()).then_some(seed);
    let mut hi = (fs < T::zero()).then_some(seed);

    for right in [true, false] {
        let wanted = if right { &mut hi } else { &mut lo };
        if wanted.is_some() {
            continue;
        }
        let mut last = seed;
        for k in 0..tol.max_bracket_steps {
            let p = probe(domain, seed, right, k, tol.bracket_growth);
            if p == last || !domain.contains(p) || !p.is_finite() {
                break;
            }
            last = p;
            let fp = f(p);
            evaluations += 1;
            probes.push(p);
            let hit = if right {
                fp < T::zero()
            } else {
                fp > T::zero()
            };
            if hit {
                *wanted = Some(p);
                break;
            }
        }
    }

    Ok(match (lo, hi) {
        (Some(lo), Some(hi)) => BracketSearch::Found {
            lo,
            hi,
            evaluations,
        },
        _ => BracketSearch::NoBracket {
            probes,
            evaluations,
        },
    })
}

enum ZeroBand<T> {
    Narrowed(T, T),
    Plateau(T, T),
    Unresolved(T, T),
}

/// Called when `|f(mid)| <= zero_tol`. Probes `mid ± delta` with `delta`
/// shrinking from `(b - a) / 4`. Any strictly signed probe tightens the
/// bracket, however small its value; probes that evaluate to zero widen the
/// zero-band evidence around `mid`.
fn resolve_zero_band<T: Real>(
    f: &impl Fn(T) -> T,
    mid: T,
    a: T,
    b: T,
    tol: &Tolerances<T>,
    evaluations: &mut usize,
) -> ZeroBand<T> {
    let (mut a, mut b) = (a, b);
    let two = T::lit(2.0);
    let mut delta = (b - a) / T::lit(4.0);
    let mut left_ext = T::zero();
    let mut right_ext = T::zero();
    loop {
        let l = mid - delta;
        let r = mid + delta;
        if l == mid || r == mid || two * delta <= tol.root_abs_tol {
            return ZeroBand::Unresolved(l.max(a), r.min(b));
        }
        let fl = f(l);
        let fr = f(r);
        *evaluations += 2;

        if fl > T::zero() {
            a = a.max(l);
        } else if fl < T::zero() {
            b = b.min(l);
        } else if fl == T::zero() {
            left_ext = left_ext.max(delta);
        }
        if fr < T::zero() {
            b = b.min(r);
        } else if fr > T::zero() {
            a = a.max(r);
        } else if fr == T::zero() {
            right_ext = right_ext.max(delta);
        }

        if left_ext + right_ext > tol.plateau_width_tol {
            return ZeroBand::Plateau(mid - left_ext, mid + right_ext);
        }
        if !(a < mid && mid < b) || (fl > T::zero() && fr < T::zero()) {
            return ZeroBand::Narrowed(a, b);
        }
        delta = delta / two;
    }
}

/// Decimal with the fewest digits inside `[a, b]`; the midpoint if the
/// search fails. Keeps exact estimates (e.g. `2`, `0.3`) exact.
fn simplest_in<T: Real>(a: T, b: T) -> T {
    let mid = a + (b - a) / T::lit(2.0);
    if a <= T::zero() && T::zero() <= b {
        return T::zero();
    }
    let width = b - a;
    if !(width > T::zero()) || !mid.is_finite() {
        return mid;
    }
    let ten = T::lit(10.0);
    let top = mid.abs().log10().ceil().to_i32().unwrap_or(0) + 1;
    let bottom = width.log10().floor().to_i32().unwrap_or(0) - 1;
    let mut k = top;
    while k >= bottom {
        let c = if k >= 0 {
            let s = ten.powi(k);
            (mid / s).round() * s
        } else {
            let s = ten.powi(-k);
            (mid * s).round() / s
        };
        if a <= c && c <= b {
            return c;
        }
        k -= 1;
    }
    mid
}

/// Locates the point of sign change of decreasing type for `f`.
///
/// Bisection keeps `f(a) > 0 > f(b)`. A midpoint inside the zero band
/// triggers symmetric probing that either tightens the bracket or certifies
/// a plateau. On success `theta` is the simplest decimal inside the final
/// bracket of width at most `root_abs_tol` (or the narrowest representable).
pub fn find_sign_change<T: Real>(
    f: impl Fn(T) -> T,
    domain: &ParameterInterval<T>,
    seed: T,
    tol: &Tolerances<T>,
) -> Result<SignChangeResult<T>> {
    let (mut a, mut b, mut evaluations) = match bracket_sign_change(&f, domain, seed, tol)? {
        BracketSearch::Found {
            lo,
            hi,
            evaluations,
        } => (lo, hi, evaluations),
        BracketSearch::NoBracket {
            probes,
            evaluations,
        } => {
            return Ok(SignChangeResult {
                theta: seed,
                bracket: (seed, seed),
                residual_at_theta: T::nan(),
                evaluations,
                status: SignChangeStatus::NoBracket,
                plateau: None,
                probes,
            })
        }
    };

    let two = T::lit(2.0);
    for _ in 0..tol.max_bisect_steps {
        if b - a <= tol.root_abs_tol {
            break;
        }
        let mid = a + (b - a) / two;
        if mid <= a || mid >= b {
            break;
        }
        let fm = f(mid);
        evaluations += 1;
        if fm.is_nan() {
            return Ok(SignChangeResult {
                theta: mid,
                bracket: (a, b),
                residual_at_theta: fm,
                evaluations,
                status: SignChangeStatus::NoBracket,
                plateau: None,
                probes: vec![mid],
            });
        }
        if fm.abs() <= tol.zero_tol {
            match resolve_zero_band(&f, mid, a, b, tol, &mut evaluations) {
                ZeroBand::Narrowed(na, nb) => {
                    a = na;
                    b = nb;
                }
                ZeroBand::Plateau(lo, hi) => {
                    return Ok(SignChangeResult {
                        theta: mid,
                        bracket: (a, b),
                        residual_at_theta: fm,
                        evaluations,
                        status: SignChangeStatus::Plateau,
                        plateau: Some((lo, hi)),
                        probes: Vec::new(),
                    });
                }
                ZeroBand::Unresolved(na, nb) => {
                    a = na;
                    b = nb;
                    break;
                }
            }
        } else if fm > T::zero() {
            a = mid;
        } else {
            b = mid;
        }
    }

    let theta = simplest_in(a, b);
    let residual = f(theta);
    evaluations += 1;
    let status = if residual.abs() <= tol.zero_tol {
        SignChangeStatus::ExactZero
    } else {
        SignChangeStatus::Located
    };
    Ok(SignChangeResult {
        theta,
        bracket: (a, b),
        residual_at_theta: residual,
        evaluations,
        status,
        plateau: None,
        probes: Vec::new(),
    })
}

/// Partition of grid indices by the sign of `f`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SignProfile {
    pub positive: Vec<usize>,
    pub zero: Vec<usize>,
    pub negative: Vec<usize>,
    /// Positives, then at most one zero-band run, then negatives, and not
    /// identically zero.
    pub decreasing_type: bool,
}

/// Level sets of `f` on `grid` with zero band `|f| <= zero_tol`.
pub fn sign_profile<T: Real>(f: impl Fn(T) -> T, grid: &[T], zero_tol: T) -> SignProfile {
    let mut profile = SignProfile {
        positive: Vec::new(),
        zero: Vec::new(),
        negative: Vec::new(),
        decreasing_type: false,
    };
    // 0 = positive, 1 = zero band, 2 = negative
    let mut phase = 0u8;
    let mut monotone = true;
    for (i, &t) in grid.iter().enumerate() {
        let v = f(t);
        let class = if v.abs() <= zero_tol {
            profile.zero.push(i);
            1
        } else if v > T::zero() {
            profile.positive.push(i);
            0
        } else {
            profile.negative.push(i);
            2
        };
        if class < phase {
            monotone = false;
        }
        phase = phase.max(class);
    }
    profile.decreasing_type =
        monotone && !(profile.positive.is_empty() && profile.negative.is_empty());
    profile
}
