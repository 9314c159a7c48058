//! The semigroup view of an estimator: `mu(s) = M(s)` on multisets, the
//! level sets `A_t = {mu < t}` and `B_t = {mu > t}`, and probes of their
//! closure under ⊕ and of their algebraic core.

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use crate::axiomlab::{Axiom, AxiomReport, SamplerConfig, Witness, WitnessInputs};
use crate::error::{Error, Result};
use crate::model::{EstimatorOracle, Observation, WeightedSample};
use crate::scalar::Real;

/// Default guard for [`enumerate_multisets`].
pub const DEFAULT_ENUMERATION_CAP: u128 = 1_000_000;

pub fn mu<T: Real>(m: &EstimatorOracle<T>, s: &WeightedSample) -> Result<T> {
    m.eval(s)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Level {
    InA,
    InB,
    Boundary,
}

pub fn classify(mu: f64, t: f64, tol: f64) -> Level {
    if mu < t - tol {
        Level::InA
    } else if mu > t + tol {
        Level::InB
    } else {
        Level::Boundary
    }
}

pub fn level_membership<T: Real>(
    m: &EstimatorOracle<T>,
    s: &WeightedSample,
    t: T,
    tol: f64,
) -> Result<Level> {
    Ok(classify(m.eval(s)?.as_f64(), t.as_f64(), tol))
}

/// For `r, s` on the same side of `t`, whether `r ⊕ s` leaves that side.
/// Returns `[mu(r), mu(s), mu(r ⊕ s)]`, the violation (distance of
/// `mu(r ⊕ s)` past `t ∓ tol` toward the other side, `>= 0` for a witness)
/// and whether the pair is a witness. Pairs straddling `t` or touching the
/// boundary impose nothing.
pub fn closure_violation<T: Real>(
    m: &EstimatorOracle<T>,
    r: &WeightedSample,
    s: &WeightedSample,
    t: T,
    tol: f64,
) -> Result<(Vec<f64>, f64, bool)> {
    let t = t.as_f64();
    let mr = m.eval(r)?.as_f64();
    let ms = m.eval(s)?.as_f64();
    let side = classify(mr, t, tol);
    if side == Level::Boundary || side != classify(ms, t, tol) {
        return Ok((vec![mr, ms], 0.0, false));
    }
    let mrs = m.eval(&r.concat(s))?.as_f64();
    let violation = match side {
        Level::InA => mrs - (t - tol),
        _ => (t + tol) - mrs,
    };
    Ok((vec![mr, ms, mrs], violation, classify(mrs, t, tol) != side))
}

/// Samples pairs from `cfg` and checks that `A_t` and `B_t` are closed under
/// ⊕. Witnesses are deduplicated by unordered pair.
pub fn closure_probe<T: Real>(
    m: &EstimatorOracle<T>,
    t: T,
    cfg: &SamplerConfig,
) -> Result<AxiomReport> {
    cfg.validate()?;
    let mut report = AxiomReport::new(
        Axiom::SubsemigroupClosure,
        m.name(),
        cfg.tolerance,
        Some(cfg),
    );
    report.metrics.insert("t".into(), t.as_f64());
    let mut sampler = cfg.sampler();
    let mut seen = BTreeSet::new();
    let mut constrained = 0usize;
    for trial in 0..cfg.trials {
        let (mut r, mut s) = (sampler.multiset(), sampler.multiset());
        if s < r {
            std::mem::swap(&mut r, &mut s);
        }
        report.trials += 1;
        match closure_violation(m, &r, &s, t, cfg.tolerance) {
            Ok((values, v, is_witness)) => {
                if values.len() == 3 {
                    constrained += 1;
                    report.observe(v.max(0.0));
                }
                if is_witness && seen.insert((r.clone(), s.clone())) {
                    let side = if values[0] < t.as_f64() { "A_t" } else { "B_t" };
                    report.push_witness(Witness {
                        trial,
                        description: format!(
                            "r = {r} and s = {s} lie in {side} (mu = {}, {}) but mu(r ⊕ s) = {} does not, at t = {t}",
                            values[0], values[1], values[2]
                        ),
                        inputs: WitnessInputs::Closure {
                            r,
                            s,
                            t: t.as_f64(),
                        },
                        values,
                        violation: v,
                    });
                }
            }
            Err(e) => report.record_error(&e),
        }
    }
    report
        .metrics
        .insert("constrained_pairs".into(), constrained as f64);
    Ok(report.finish_sampled())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "outcome", content = "n", rename_all = "kebab-case")]
pub enum CoreProbe {
    Found(u64),
    Unresolved(u64),
}

/// Smallest `n <= n_max` with `replicate(a, n) ⊕ s` in `A_t`.
pub fn core_probe<T: Real>(
    m: &EstimatorOracle<T>,
    t: T,
    a: &WeightedSample,
    s: &WeightedSample,
    n_max: u64,
    tol: f64,
) -> Result<CoreProbe> {
    if level_membership(m, a, t, tol)? != Level::InA {
        return Err(Error::Precondition(format!(
            "{a} is not in A_t for t = {t}"
        )));
    }
    for n in 1..=n_max {
        if level_membership(m, &a.replicate(n)?.concat(s), t, tol)? == Level::InA {
            return Ok(CoreProbe::Found(n));
        }
    }
    Ok(CoreProbe::Unresolved(n_max))
}

/// `C(max_size + k, k) - 1`, saturating.
pub fn multiset_count(k: usize, max_size: usize) -> u128 {
    let mut c: u128 = 1;
    for i in 1..=k as u128 {
        c = match c.checked_mul(max_size as u128 + i) {
            Some(v) => v / i,
            None => return u128::MAX,
        };
    }
    c - 1
}

/// All multisets over `alphabet` of size `1..=max_size`, ordered by size and
/// then by decreasing multiplicity of earlier symbols.
pub fn enumerate_multisets(
    alphabet: &[Observation],
    max_size: usize,
    cap: u128,
) -> Result<Vec<WeightedSample>> {
    let mut symbols = alphabet.to_vec();
    symbols.sort();
    symbols.dedup();
    if symbols.is_empty() || max_size == 0 {
        return Err(Error::Precondition(
            "need a nonempty alphabet and max size >= 1".into(),
        ));
    }
    let count = multiset_count(symbols.len(), max_size);
    if count > cap {
        return Err(Error::EnumerationCap { count, cap });
    }
    let mut out = Vec::with_capacity(count as usize);
    let mut counts = vec![0u64; symbols.len()];
    for size in 1..=max_size as u64 {
        fill(&symbols, &mut counts, 0, size, &mut out);
    }
    Ok(out)
}

fn fill(
    symbols: &[Observation],
    counts: &mut [u64],
    i: usize,
    left: u64,
    out: &mut Vec<WeightedSample>,
) {
    if i + 1 == symbols.len() {
        counts[i] = left;
        let pairs = symbols
            .iter()
            .zip(counts.iter())
            .filter(|(_, &c)| c > 0)
            .map(|(o, &c)| (o.clone(), c));
        out.push(WeightedSample::from_counts(pairs).expect("size >= 1"));
        return;
    }
    for c in (0..=left).rev() {
        counts[i] = c;
        fill(symbols, counts, i + 1, left - c, out);
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::axiomlab::{ObservationPool, Verdict};
    use crate::oracles::{arithmetic_mean, maximum, total};

    fn s(v: &[f64]) -> WeightedSample {
        WeightedSample::of_reals(v).unwrap()
    }

    #[test]
    fn mu_and_levels() {
        let m = arithmetic_mean::<f64>();
        let x = s(&[1.0, 3.0]);
        assert_eq!(mu(&m, &x).unwrap(), 2.0);
        assert_eq!(mu(&m, &x.replicate(2).unwrap()).unwrap(), 2.0);
        assert_eq!(level_membership(&m, &x, 2.5, 1e-9).unwrap(), Level::InA);
        assert_eq!(
            level_membership(&m, &x, 2.0, 1e-9).unwrap(),
            Level::Boundary
        );
        assert_eq!(level_membership(&m, &x, 1.0, 1e-9).unwrap(), Level::InB);
    }

    #[test]
    fn closure_of_sum_fails_with_exact_pair() {
        let pool = ObservationPool::List(vec![Observation::real(0.2), Observation::real(0.3)]);
        let cfg = SamplerConfig::new(pool).with_max_block(1).with_trials(100);
        let r = closure_probe(&total::<f64>(), 0.4, &cfg).unwrap();
        assert_eq!(r.verdict, Verdict::Fail);
        assert!(r.witnesses.iter().any(|w| w.inputs
            == WitnessInputs::Closure {
                r: s(&[0.2]),
                s: s(&[0.3]),
                t: 0.4
            }
            && w.values == vec![0.2, 0.3, 0.5]));
        for m in [arithmetic_mean::<f64>(), maximum()] {
            let cfg =
                SamplerConfig::new(ObservationPool::Range { lo: 0.0, hi: 1.0 }).with_trials(500);
            assert!(closure_probe(&m, 0.5, &cfg).unwrap().passed());
        }
    }

    #[test]
    fn core_probe_examples() {
        let mean = arithmetic_mean::<f64>();
        assert_eq!(
            core_probe(&mean, 1.0, &s(&[0.0]), &s(&[10.0]), 100, 1e-9).unwrap(),
            CoreProbe::Found(10)
        );
        assert_eq!(
            core_probe(&mean, 0.5, &s(&[0.0]), &s(&[0.0]), 100, 1e-9).unwrap(),
            CoreProbe::Found(1)
        );
        assert_eq!(
            core_probe(&maximum::<f64>(), 1.0, &s(&[0.0]), &s(&[10.0]), 100, 1e-9).unwrap(),
            CoreProbe::Unresolved(100)
        );
        assert!(core_probe(&mean, 1.0, &s(&[5.0]), &s(&[10.0]), 100, 1e-9).is_err());
    }

    #[test]
    fn enumeration_counts() {
        let ab = [Observation::symbol("a"), Observation::symbol("b")];
        let all = enumerate_multisets(&ab, 2, DEFAULT_ENUMERATION_CAP).unwrap();
        let shown: Vec<String> = all.iter().map(ToString::to_string).collect();
        assert_eq!(shown, ["{a}", "{b}", "{a:x2}", "{a, b}", "{b:x2}"]);
        assert_eq!(
            enumerate_multisets(&ab[..1], 3, DEFAULT_ENUMERATION_CAP)
                .unwrap()
                .len(),
            3
        );
        let four: Vec<Observation> = (1..=4).map(Observation::int).collect();
        let all = enumerate_multisets(&four, 6, DEFAULT_ENUMERATION_CAP).unwrap();
        assert_eq!(all.len(), 209);
        assert_eq!(all.iter().collect::<BTreeSet<_>>().len(), 209);
        assert!(matches!(
            enumerate_multisets(&four, 6, 100),
            Err(Error::EnumerationCap {
                count: 209,
                cap: 100
            })
        ));
        assert_eq!(multiset_count(2, 2), 5);
        assert_eq!(multiset_count(200, 400), u128::MAX);
    }
}
