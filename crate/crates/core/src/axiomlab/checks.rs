use crate::catalog::{qa_mean, Generator};
use crate::error::{Error, Result};
use crate::estimator::estimate;
use crate::model::{
    EstimatorOracle, ListOracle, Observation, ScoreFamily, Tolerances, WeightedSample,
};
use crate::oracles::MeanSequence;
use crate::scalar::Real;

use super::kolmogorov;
use super::{Axiom, AxiomReport, SamplerConfig, Verdict, Witness, WitnessInputs};

/// `[M(original), M(permuted)]` and their absolute difference.
pub fn symmetry_violation<T: Real>(
    m: &ListOracle<T>,
    original: &[Observation],
    permuted: &[Observation],
) -> Result<(Vec<f64>, f64)> {
    let a = m.eval(original)?.as_f64();
    let b = m.eval(permuted)?.as_f64();
    Ok((vec![a, b], (a - b).abs()))
}

/// Samples lists and permutations; a multiset-backed oracle passes
/// structurally without sampling.
pub fn check_symmetry<T: Real>(m: &ListOracle<T>, cfg: &SamplerConfig) -> Result<AxiomReport> {
    cfg.validate()?;
    let mut report = AxiomReport::new(Axiom::Symmetry, m.name(), cfg.tolerance, Some(cfg));
    if m.is_multiset_backed() {
        report.verdict = Verdict::Pass;
        report.notes.push(
            "oracle evaluates canonical multisets, so it is symmetric by construction".into(),
        );
        return Ok(report);
    }
    let mut sampler = cfg.sampler();
    for trial in 0..cfg.trials {
        let original = sampler.list();
        let mut permuted = original.clone();
        sampler.shuffle(&mut permuted);
        report.trials += 1;
        match symmetry_violation(m, &original, &permuted) {
            Ok((mut values, v)) => {
                report.observe(v);
                if v > cfg.tolerance {
                    let (mut original, mut permuted) = (original, permuted);
                    if permuted < original {
                        std::mem::swap(&mut original, &mut permuted);
                        values.swap(0, 1);
                    }
                    report.push_witness(Witness {
                        trial,
                        description: format!(
                            "M({}) = {} but M({}) = {}",
                            fmt_list(&original),
                            values[0],
                            fmt_list(&permuted),
                            values[1]
                        ),
                        inputs: WitnessInputs::Permutation { original, permuted },
                        values,
                        violation: v,
                    });
                }
            }
            Err(e) => report.record_error(&e),
        }
    }
    if cfg.max_block == 1 {
        report
            .notes
            .push("single-element lists only: the check is vacuous".into());
    }
    Ok(report.finish_sampled())
}

fn fmt_list(xs: &[Observation]) -> String {
    let parts: Vec<String> = xs.iter().map(ToString::to_string).collect();
    format!("({})", parts.join(", "))
}

/// Evaluates `[M(x), M(y), M(x ⊕ y)]` and returns the violation together with
/// whether it constitutes a witness.
///
/// Non-strict: the violation is how far `M(x ⊕ y)` lies outside
/// `[min, max]`. Strict (only when `|M(x) - M(y)| > tol`): the violation is
/// `tol - margin` where `margin` is the distance of `M(x ⊕ y)` to the nearer
/// end, so a witness has violation `>= 0`.
pub fn internality_violation<T: Real>(
    m: &EstimatorOracle<T>,
    x: &WeightedSample,
    y: &WeightedSample,
    strict: bool,
    tol: f64,
) -> Result<(Vec<f64>, f64, bool)> {
    let mx = m.eval(x)?.as_f64();
    let my = m.eval(y)?.as_f64();
    let mxy = m.eval(&x.concat(y))?.as_f64();
    let (lo, hi) = (mx.min(my), mx.max(my));
    let outside = (lo - mxy).max(mxy - hi).max(0.0);
    let values = vec![mx, my, mxy];
    if strict && hi - lo > tol {
        let margin = (mxy - lo).min(hi - mxy);
        Ok((values, tol - margin, margin <= tol))
    } else {
        Ok((values, outside, outside > tol))
    }
}

pub fn check_internality<T: Real>(
    m: &EstimatorOracle<T>,
    cfg: &SamplerConfig,
    strict: bool,
) -> Result<AxiomReport> {
    cfg.validate()?;
    let axiom = if strict {
        Axiom::StrictInternality
    } else {
        Axiom::Internality
    };
    let mut report = AxiomReport::new(axiom, m.name(), cfg.tolerance, Some(cfg));
    let mut sampler = cfg.sampler();
    for trial in 0..cfg.trials {
        let x = sampler.multiset();
        let y = sampler.multiset();
        report.trials += 1;
        match internality_violation(m, &x, &y, strict, cfg.tolerance) {
            Ok((values, v, is_witness)) => {
                report.observe(v.max(0.0));
                if is_witness {
                    report.push_witness(Witness {
                        trial,
                        description: format!(
                            "M(x) = {}, M(y) = {}, M(x ⊕ y) = {} is not {}between them",
                            values[0],
                            values[1],
                            values[2],
                            if strict { "strictly " } else { "" }
                        ),
                        inputs: WitnessInputs::Pair { x, y },
                        values,
                        violation: v,
                    });
                }
            }
            Err(e) => report.record_error(&e),
        }
    }
    Ok(report.finish_sampled())
}

/// `[M(x), M(replicate(x, n) ⊕ {y})]` and `gap(n)`.
pub fn idempotency_gap<T: Real>(
    m: &EstimatorOracle<T>,
    x: &WeightedSample,
    y: &Observation,
    n: u64,
) -> Result<(Vec<f64>, f64)> {
    let base = m.eval(x)?.as_f64();
    let perturbed = m
        .eval(&x.replicate(n)?.concat(&WeightedSample::single(y.clone())))?
        .as_f64();
    Ok((vec![base, perturbed], (perturbed - base).abs()))
}

/// `1, 2, 4, ..., 2^max_exp`.
pub fn power_schedule(max_exp: u32) -> Vec<u64> {
    (0..=max_exp).map(|k| 1u64 << k).collect()
}

/// Pass iff the gaps are non-increasing over the last half of the schedule
/// and the final gap is within `tol`; Fail iff every gap in the last half
/// exceeds `tol`; Inconclusive otherwise.
pub fn check_asymptotic_idempotency<T: Real>(
    m: &EstimatorOracle<T>,
    x: &WeightedSample,
    y: &Observation,
    schedule: &[u64],
    tol: f64,
) -> Result<AxiomReport> {
    if schedule.is_empty() || schedule.windows(2).any(|w| w[0] >= w[1]) || schedule[0] == 0 {
        return Err(Error::Precondition(
            "schedule must be a nonempty increasing list of positive integers".into(),
        ));
    }
    let mut report = AxiomReport::new(Axiom::AsymptoticIdempotency, m.name(), tol, None);
    for &n in schedule {
        report.trials += 1;
        match idempotency_gap(m, x, y, n) {
            Ok((_, gap)) => report.series.push((n as f64, gap)),
            Err(e) => {
                report.record_error(&e);
                return Ok(report);
            }
        }
    }
    let gaps: Vec<f64> = report.series.iter().map(|&(_, g)| g).collect();
    let tail = &gaps[gaps.len() / 2..];
    let last = *gaps.last().unwrap();
    report.max_violation = last;
    report.metrics.insert("final_gap".into(), last);
    let slack = (tol * 1e-3).max(1e-11);
    let decreasing = tail.windows(2).all(|w| w[1] <= w[0] + slack);
    report.verdict = if tail.iter().all(|&g| g > tol) {
        let n = *schedule.last().unwrap();
        let (values, gap) = idempotency_gap(m, x, y, n)?;
        report.push_witness(Witness {
            trial: schedule.len() - 1,
            description: format!(
                "gap stays above {tol} over the last half of the schedule; at n = {n}, |{} - {}| = {gap}",
                values[1], values[0]
            ),
            inputs: WitnessInputs::Replication {
                x: x.clone(),
                y: y.clone(),
                n,
            },
            values,
            violation: gap,
        });
        Verdict::Fail
    } else if decreasing && last <= tol {
        Verdict::Pass
    } else {
        Verdict::Inconclusive
    };
    Ok(report)
}

/// Runs the asymptotic idempotency check for `cfg.trials` random `(x, y)`.
pub fn check_asymptotic_idempotency_sampled<T: Real>(
    m: &EstimatorOracle<T>,
    cfg: &SamplerConfig,
    schedule: &[u64],
) -> Result<AxiomReport> {
    cfg.validate()?;
    let mut report = AxiomReport::new(
        Axiom::AsymptoticIdempotency,
        m.name(),
        cfg.tolerance,
        Some(cfg),
    );
    let mut sampler = cfg.sampler();
    let mut inconclusive = 0usize;
    for trial in 0..cfg.trials {
        let x = sampler.multiset();
        let y = sampler.observation();
        let sub = check_asymptotic_idempotency(m, &x, &y, schedule, cfg.tolerance)?;
        report.trials += 1;
        report.errors += sub.errors;
        report.observe(sub.max_violation);
        if trial == 0 {
            report.series = sub.series.clone();
        }
        match sub.verdict {
            Verdict::Fail => {
                for mut w in sub.witnesses {
                    w.trial = trial;
                    report.push_witness(w);
                }
            }
            Verdict::Inconclusive => {
                if inconclusive == 0 {
                    report
                        .notes
                        .push(format!("trial {trial} inconclusive: x = {x}, y = {y}"));
                }
                inconclusive += 1;
            }
            Verdict::Pass => {}
        }
    }
    report
        .metrics
        .insert("inconclusive_trials".into(), inconclusive as f64);
    let mut report = report.finish_sampled();
    if report.verdict == Verdict::Pass && inconclusive > 0 {
        report.verdict = Verdict::Inconclusive;
    }
    Ok(report)
}

fn samples_for(cfg: &SamplerConfig, seeds: &[WeightedSample]) -> Vec<WeightedSample> {
    let mut sampler = cfg.sampler();
    seeds
        .iter()
        .cloned()
        .chain((0..cfg.trials).map(|_| sampler.multiset()))
        .collect()
}

/// Existence of a sign change on every sample: `seeds` first, then
/// `cfg.trials` samples from the pool.
pub fn check_t_property<T: Real>(
    psi: &ScoreFamily<T>,
    tol: &Tolerances<T>,
    cfg: &SamplerConfig,
    seeds: &[WeightedSample],
) -> Result<AxiomReport> {
    cfg.validate()?;
    let mut report = AxiomReport::new(Axiom::TProperty, psi.name(), cfg.tolerance, Some(cfg));
    for (trial, sample) in samples_for(cfg, seeds).into_iter().enumerate() {
        report.trials += 1;
        match t_property_violation(psi, tol, &sample) {
            Ok(None) => {}
            Ok(Some((values, v, description))) => {
                report.observe(v);
                report.push_witness(Witness {
                    trial,
                    inputs: WitnessInputs::Sample { sample },
                    values,
                    violation: v,
                    description,
                });
            }
            Err(e) => report.record_error(&e),
        }
    }
    Ok(report.finish_sampled())
}

type Found = Option<(Vec<f64>, f64, String)>;

fn t_property_violation<T: Real>(
    psi: &ScoreFamily<T>,
    tol: &Tolerances<T>,
    sample: &WeightedSample,
) -> Result<Found> {
    match estimate(psi, sample, tol) {
        Ok(_) => Ok(None),
        Err(Error::Plateau { lo, hi, .. }) => Ok(Some((
            vec![lo, hi],
            hi - lo,
            format!(
                "score sum vanishes on [{lo}, {hi}] for {sample}: no single point of sign change"
            ),
        ))),
        Err(Error::NoBracket {
            probes, last_probe, ..
        }) => Ok(Some((
            vec![last_probe],
            probes as f64,
            format!("no sign change found for {sample} after {probes} probes"),
        ))),
        Err(e) => Err(e),
    }
}

/// `|score_sum(theta)| <= cfg.tolerance * n` at every estimate.
pub fn check_z_property<T: Real>(
    psi: &ScoreFamily<T>,
    tol: &Tolerances<T>,
    cfg: &SamplerConfig,
    seeds: &[WeightedSample],
) -> Result<AxiomReport> {
    cfg.validate()?;
    let mut report = AxiomReport::new(Axiom::ZProperty, psi.name(), cfg.tolerance, Some(cfg));
    for (trial, sample) in samples_for(cfg, seeds).into_iter().enumerate() {
        report.trials += 1;
        match z_property_violation(psi, tol, cfg.tolerance, &sample) {
            Ok(None) => {}
            Ok(Some((values, v, description))) => {
                report.observe(v);
                report.push_witness(Witness {
                    trial,
                    inputs: WitnessInputs::Sample { sample },
                    values,
                    violation: v,
                    description,
                });
            }
            Err(e) => report.record_error(&e),
        }
    }
    let worst = report.max_violation;
    report.metrics.insert("max_abs_residual".into(), worst);
    Ok(report.finish_sampled())
}

fn z_property_violation<T: Real>(
    psi: &ScoreFamily<T>,
    tol: &Tolerances<T>,
    per_obs_tol: f64,
    sample: &WeightedSample,
) -> Result<Found> {
    let r = estimate(psi, sample, tol)?;
    let z = r.z_residual.as_f64();
    let bound = per_obs_tol * sample.size() as f64;
    Ok((z.abs() > bound).then(|| {
        (
            vec![r.theta.as_f64(), z],
            z.abs(),
            format!(
                "score sum at theta = {} is {z} for {sample}, beyond {bound}",
                r.theta
            ),
        )
    }))
}

/// Least-squares fit `f ≈ a·g + b`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AffineFit {
    pub a: f64,
    pub b: f64,
    /// Largest absolute residual over the fit grid.
    pub residual: f64,
}

impl AffineFit {
    /// `None` when `g` is numerically constant on the grid.
    pub fn least_squares(g: &[f64], f: &[f64]) -> Option<Self> {
        let n = g.len() as f64;
        let gm = g.iter().sum::<f64>() / n;
        let fm = f.iter().sum::<f64>() / n;
        let sgg: f64 = g.iter().map(|x| (x - gm) * (x - gm)).sum();
        let sgf: f64 = g.iter().zip(f).map(|(x, y)| (x - gm) * (y - fm)).sum();
        let scale = g.iter().fold(0.0f64, |m, x| m.max(x.abs())).max(1.0);
        if sgg <= 1e-24 * scale * scale * n {
            return None;
        }
        let a = sgf / sgg;
        let b = fm - a * gm;
        let residual = g
            .iter()
            .zip(f)
            .fold(0.0f64, |m, (x, y)| m.max((y - (a * x + b)).abs()));
        Some(Self { a, b, residual })
    }
}

fn generator_gap<T: Real>(
    f: &Generator<T>,
    g: &Generator<T>,
    sample: &WeightedSample,
) -> Result<(Vec<f64>, f64)> {
    let af = qa_mean(f, sample)?.as_f64();
    let ag = qa_mean(g, sample)?.as_f64();
    Ok((vec![af, ag], (af - ag).abs()))
}

/// Do `f` and `g` generate the same quasi-arithmetic mean? The verdict uses
/// sampled means only; the affine fit is reported alongside.
pub fn check_generator_equivalence<T: Real>(
    f: &Generator<T>,
    g: &Generator<T>,
    cfg: &SamplerConfig,
) -> Result<AxiomReport> {
    cfg.validate()?;
    let subject = format!("{} vs {}", f.name(), g.name());
    let mut report = AxiomReport::new(
        Axiom::GeneratorEquivalence,
        &subject,
        cfg.tolerance,
        Some(cfg),
    );
    let grid: Vec<T> = f
        .sample_grid(64)
        .into_iter()
        .filter(|&t| g.interval().contains(t))
        .collect();
    let gv: Vec<f64> = grid.iter().map(|&t| g.f(t).as_f64()).collect();
    let fv: Vec<f64> = grid.iter().map(|&t| f.f(t).as_f64()).collect();
    let fit = (grid.len() >= 2)
        .then(|| AffineFit::least_squares(&gv, &fv))
        .flatten();
    match fit {
        Some(fit) => {
            report.metrics.insert("fit_a".into(), fit.a);
            report.metrics.insert("fit_b".into(), fit.b);
            report.metrics.insert("fit_residual".into(), fit.residual);
        }
        None => {
            report
                .notes
                .push("degenerate affine fit: g is constant on the common grid".into());
            report.verdict = Verdict::Inconclusive;
            return Ok(report);
        }
    }
    let mut sampler = cfg.sampler();
    for trial in 0..cfg.trials {
        let sample = sampler.multiset();
        report.trials += 1;
        match generator_gap(f, g, &sample) {
            Ok((values, v)) => {
                report.observe(v);
                if v > cfg.tolerance {
                    report.push_witness(Witness {
                        trial,
                        description: format!(
                            "means differ on {sample}: {} (f) vs {} (g)",
                            values[0], values[1]
                        ),
                        inputs: WitnessInputs::Sample { sample },
                        values,
                        violation: v,
                    });
                }
            }
            Err(e) => report.record_error(&e),
        }
    }
    Ok(report.finish_sampled())
}

/// The audited object a witness is re-evaluated against.
pub enum Subject<'a, T> {
    List(&'a ListOracle<T>),
    Oracle(&'a EstimatorOracle<T>),
    Score(&'a ScoreFamily<T>, &'a Tolerances<T>),
    Mean(&'a MeanSequence<T>),
    Generators(&'a Generator<T>, &'a Generator<T>),
}

impl<T> Clone for Subject<'_, T> {
    fn clone(&self) -> Self {
        *self
    }
}

impl<T> Copy for Subject<'_, T> {}

/// Re-evaluates a witness from its stored inputs and returns the recomputed
/// violation.
pub fn recheck<T: Real>(
    axiom: Axiom,
    w: &Witness,
    subject: Subject<'_, T>,
    tolerance: f64,
) -> Result<f64> {
    let mismatch = || {
        Error::Precondition(format!(
            "witness inputs do not match axiom {axiom} and the given subject"
        ))
    };
    match (axiom, &w.inputs, subject) {
        (Axiom::Symmetry, WitnessInputs::Permutation { original, permuted }, Subject::List(m)) => {
            Ok(symmetry_violation(m, original, permuted)?.1)
        }
        (
            Axiom::Internality | Axiom::StrictInternality,
            WitnessInputs::Pair { x, y },
            Subject::Oracle(m),
        ) => Ok(internality_violation(m, x, y, axiom == Axiom::StrictInternality, tolerance)?.1),
        (
            Axiom::AsymptoticIdempotency,
            WitnessInputs::Replication { x, y, n },
            Subject::Oracle(m),
        ) => Ok(idempotency_gap(m, x, y, *n)?.1),
        (Axiom::TProperty, WitnessInputs::Sample { sample }, Subject::Score(psi, tol)) => {
            Ok(t_property_violation(psi, tol, sample)?.map_or(0.0, |f| f.1))
        }
        (Axiom::ZProperty, WitnessInputs::Sample { sample }, Subject::Score(psi, tol)) => {
            Ok(estimate(psi, sample, tol)?.z_residual.as_f64().abs())
        }
        (
            Axiom::GeneratorEquivalence,
            WitnessInputs::Sample { sample },
            Subject::Generators(f, g),
        ) => Ok(generator_gap(f, g, sample)?.1),
        (
            Axiom::Monotonicity | Axiom::Continuity | Axiom::Reflexivity | Axiom::Replacement,
            inputs,
            Subject::Mean(m),
        ) => kolmogorov::recheck(axiom, inputs, m, tolerance).ok_or_else(mismatch),
        (Axiom::SubsemigroupClosure, WitnessInputs::Closure { r, s, t }, Subject::Oracle(m)) => {
            Ok(crate::proofkit::closure_violation(m, r, s, T::lit(*t), tolerance)?.1)
        }
        _ => Err(mismatch()),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::axiomlab::ObservationPool;
    use crate::catalog::{median_score, qa_score, step_score};
    use crate::estimator::list_oracle;
    use crate::oracles::{arithmetic_mean, first_biased_mean, maximum};

    fn pool01() -> SamplerConfig {
        SamplerConfig::new(ObservationPool::List(vec![
            Observation::int(0),
            Observation::int(1),
        ]))
        .with_max_block(2)
        .with_trials(50)
    }

    fn s(v: &[f64]) -> WeightedSample {
        WeightedSample::of_reals(v).unwrap()
    }

    #[test]
    fn symmetry_of_first_biased_mean_fails() {
        let m = first_biased_mean::<f64>();
        let r = check_symmetry(&m, &pool01()).unwrap();
        assert_eq!(r.verdict, Verdict::Fail);
        let w = &r.witnesses[0];
        assert_eq!(
            w.inputs,
            WitnessInputs::Permutation {
                original: vec![Observation::int(0), Observation::int(1)],
                permuted: vec![Observation::int(1), Observation::int(0)],
            }
        );
        assert!((w.values[0] - 1.0 / 3.0).abs() < 1e-15 && (w.values[1] - 2.0 / 3.0).abs() < 1e-15);
        let again = recheck(Axiom::Symmetry, w, Subject::List(&m), 1e-9).unwrap();
        assert!((again - w.violation).abs() <= 1e-12);
    }

    #[test]
    fn symmetry_passes_and_short_circuits() {
        let cfg = SamplerConfig::new(ObservationPool::Range { lo: 0.0, hi: 5.0 }).with_trials(100);
        let psi = qa_score(&Generator::<f64>::identity());
        let r = check_symmetry(&list_oracle(&psi, Tolerances::default()), &cfg).unwrap();
        assert_eq!((r.verdict, r.trials), (Verdict::Pass, 100));
        let wrapped = ListOracle::from_multiset(arithmetic_mean::<f64>());
        let r = check_symmetry(&wrapped, &cfg).unwrap();
        assert_eq!((r.verdict, r.trials), (Verdict::Pass, 0));
        let r = check_symmetry(&first_biased_mean::<f64>(), &pool01().with_max_block(1)).unwrap();
        assert_eq!(r.verdict, Verdict::Pass);
    }

    #[test]
    fn internality_of_mean_and_max() {
        let mean = arithmetic_mean::<f64>();
        let (values, _, w) =
            internality_violation(&mean, &s(&[0.0]), &s(&[1.0]), true, 1e-9).unwrap();
        assert_eq!(values, vec![0.0, 1.0, 0.5]);
        assert!(!w);
        let cfg = SamplerConfig::new(ObservationPool::Range { lo: 0.0, hi: 5.0 }).with_trials(200);
        assert!(check_internality(&mean, &cfg, true).unwrap().passed());
        let max = maximum::<f64>();
        assert!(check_internality(&max, &cfg, false).unwrap().passed());
        let r = check_internality(&max, &cfg, true).unwrap();
        assert!(r.failed());
        for w in &r.witnesses {
            let again = recheck(Axiom::StrictInternality, w, Subject::Oracle(&max), 1e-9).unwrap();
            assert!((again - w.violation).abs() <= 1e-12);
            assert!(w.values[0] != w.values[1]);
        }
        // equal estimates impose no strictness
        let (_, _, w) =
            internality_violation(&max, &s(&[1.0]), &s(&[0.0, 1.0]), true, 1e-9).unwrap();
        assert!(!w);
    }

    #[test]
    fn idempotency_mean_max() {
        let sched = power_schedule(15);
        let x = s(&[0.0]);
        let y = Observation::int(1);
        let r =
            check_asymptotic_idempotency(&arithmetic_mean::<f64>(), &x, &y, &sched, 1e-3).unwrap();
        assert_eq!(r.verdict, Verdict::Pass);
        for &(n, g) in &r.series {
            assert!((g - 1.0 / (n + 1.0)).abs() <= 1e-12);
        }
        let max = maximum::<f64>();
        let r = check_asymptotic_idempotency(&max, &x, &y, &sched, 1e-3).unwrap();
        assert_eq!(r.verdict, Verdict::Fail);
        assert!(r.series.iter().all(|&(_, g)| g == 1.0));
        let w = &r.witnesses[0];
        assert_eq!(
            recheck(Axiom::AsymptoticIdempotency, w, Subject::Oracle(&max), 1e-3).unwrap(),
            1.0
        );
        assert!(check_asymptotic_idempotency(&max, &x, &y, &[2, 1], 1e-3).is_err());
    }

    #[test]
    fn idempotency_short_schedule_and_oscillation() {
        let mean = arithmetic_mean::<f64>();
        let (x, y) = (s(&[0.0]), Observation::int(1));
        // every gap 1/(n+1) on 1..8 exceeds the tolerance
        let r = check_asymptotic_idempotency(&mean, &x, &y, &power_schedule(3), 1e-3).unwrap();
        assert_eq!(r.verdict, Verdict::Fail);
        // sizes n + 1 alternate between multiples of 3 and not
        let wobbly = EstimatorOracle::new("wobbly", crate::model::Provenance::Builtin, move |s| {
            let bump = if s.size() % 3 == 0 { 0.01 } else { 0.0 };
            Ok(mean.eval(s)? + bump)
        });
        let r = check_asymptotic_idempotency(&wobbly, &x, &y, &power_schedule(15), 1e-3).unwrap();
        assert_eq!(r.verdict, Verdict::Inconclusive);
    }

    #[test]
    fn t_and_z_properties() {
        let tol = Tolerances::default();
        let cfg = pool01().with_trials(20).with_tolerance(1e-8);
        let seeds = [s(&[0.0, 1.0])];
        let r = check_t_property(&median_score::<f64>(), &tol, &cfg, &seeds).unwrap();
        assert!(r.failed());
        assert_eq!(r.witnesses[0].trial, 0);
        let r = check_z_property(&step_score::<f64>(), &tol, &cfg, &seeds).unwrap();
        assert!(r.failed());
        assert_eq!(r.witnesses[0].values, vec![0.0, -1.0]);
        let psi = qa_score(&Generator::<f64>::identity());
        assert!(check_z_property(&psi, &tol, &cfg, &seeds).unwrap().passed());
        assert!(check_t_property(&psi, &tol, &cfg, &seeds).unwrap().passed());
    }

    #[test]
    fn generator_equivalence() {
        let cfg = SamplerConfig::new(ObservationPool::Range { lo: 0.5, hi: 9.0 }).with_trials(100);
        let ln = Generator::<f64>::ln();
        let r = check_generator_equivalence(&ln, &ln.affine(2.0, 5.0).unwrap(), &cfg).unwrap();
        assert!(r.passed());
        assert!(
            (r.metrics["fit_a"] - 0.5).abs() < 1e-12 && (r.metrics["fit_b"] + 2.5).abs() < 1e-12
        );
        let r = check_generator_equivalence(&ln, &ln, &cfg).unwrap();
        assert!((r.metrics["fit_a"] - 1.0).abs() < 1e-12 && r.metrics["fit_b"].abs() < 1e-12);
        let id = Generator::<f64>::identity();
        let cfg = SamplerConfig::new(ObservationPool::List(vec![
            Observation::int(1),
            Observation::int(4),
        ]))
        .with_max_block(2)
        .with_trials(50);
        let r = check_generator_equivalence(&id, &ln, &cfg).unwrap();
        assert!(r.failed());
        assert!(r
            .witnesses
            .iter()
            .any(|w| w.values == vec![2.5, 2.0000000000000004]
                || (w.values[0] == 2.5 && (w.values[1] - 2.0).abs() < 1e-12)));
    }

    #[test]
    fn affine_fit_degenerate() {
        assert!(AffineFit::least_squares(&[1.0, 1.0, 1.0], &[0.0, 1.0, 2.0]).is_none());
    }
}
