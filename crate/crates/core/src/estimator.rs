//! Score sums and generalized psi-estimates.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{
    EstimatorOracle, ListOracle, Observation, ParameterInterval, Provenance, ScoreFamily,
    Tolerances, WeightedSample,
};
use crate::scalar::{compensated_sum, Real};
use crate::signchange::{find_sign_change, SignChangeResult, SignChangeStatus};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EstimateReport<T> {
    pub theta: T,
    pub sign_change: SignChangeResult<T>,
    /// Score sum evaluated at `theta`.
    pub z_residual: T,
    pub n: u64,
    /// Set when the family claims `Z` but `|z_residual| > zero_tol * n`.
    pub claim_violation: Option<String>,
}

/// `sum_x m(x) * psi(x, t)` over distinct observations in canonical order.
/// Cost is linear in the number of distinct observations.
pub fn score_sum<T: Real>(psi: &ScoreFamily<T>, sample: &WeightedSample, t: T) -> T {
    compensated_sum(
        sample
            .iter()
            .map(|(x, m)| T::from_u64(m).unwrap() * psi.eval(x, t)),
    )
}

/// `|S(a ⊕ b, t) - S(a, t) - S(b, t)|` where `S` is the score sum.
pub fn homomorphism_residual<T: Real>(
    psi: &ScoreFamily<T>,
    a: &WeightedSample,
    b: &WeightedSample,
    t: T,
) -> T {
    let ab = score_sum(psi, &a.concat(b), t);
    (ab - score_sum(psi, a, t) - score_sum(psi, b, t)).abs()
}

fn seed_for<T: Real>(domain: &ParameterInterval<T>, sample: &WeightedSample) -> T {
    if let Some((lo, hi)) = sample.real_range::<T>() {
        let mid = lo + (hi - lo) / T::lit(2.0);
        if domain.contains(lo) && domain.contains(hi) && domain.contains(mid) {
            return mid;
        }
    }
    domain.default_seed()
}

fn located_or_error<T: Real>(sc: &SignChangeResult<T>, sample: &WeightedSample) -> Result<()> {
    match sc.status {
        SignChangeStatus::Located | SignChangeStatus::ExactZero => Ok(()),
        SignChangeStatus::Plateau => {
            let (lo, hi) = sc.plateau.unwrap_or(sc.bracket);
            Err(Error::Plateau {
                sample: sample.clone(),
                lo: lo.as_f64(),
                hi: hi.as_f64(),
            })
        }
        SignChangeStatus::NoBracket => Err(Error::NoBracket {
            sample: sample.clone(),
            probes: sc.probes.len(),
            last_probe: sc.probes.last().map_or(f64::NAN, |p| p.as_f64()),
        }),
    }
}

/// Generalized psi-estimate on the family's own parameter interval.
pub fn estimate<T: Real>(
    psi: &ScoreFamily<T>,
    sample: &WeightedSample,
    tol: &Tolerances<T>,
) -> Result<EstimateReport<T>> {
    estimate_on(psi, sample, psi.domain(), tol)
}

/// As [`estimate`], searching on `domain` (a sub-interval of the family's).
pub fn estimate_on<T: Real>(
    psi: &ScoreFamily<T>,
    sample: &WeightedSample,
    domain: &ParameterInterval<T>,
    tol: &Tolerances<T>,
) -> Result<EstimateReport<T>> {
    psi.check_sample(sample)?;
    let seed = seed_for(domain, sample);
    let sc = find_sign_change(|t| score_sum(psi, sample, t), domain, seed, tol)?;
    located_or_error(&sc, sample)?;
    let n = sample.size();
    let z_residual = score_sum(psi, sample, sc.theta);
    let claim_violation = (psi.claims().zero
        && z_residual.abs() > tol.zero_tol * T::from_u64(n).unwrap())
    .then(|| {
        format!(
            "`{}` claims Z but the score sum at theta = {} is {}",
            psi.name(),
            sc.theta,
            z_residual
        )
    });
    Ok(EstimateReport {
        theta: sc.theta,
        sign_change: sc,
        z_residual,
        n,
        claim_violation,
    })
}

/// Multiset oracle `M(s) = theta_psi(s)`.
pub fn estimator_oracle<T: Real>(psi: &ScoreFamily<T>, tol: Tolerances<T>) -> EstimatorOracle<T> {
    let psi = psi.clone();
    let name = psi.name().to_string();
    EstimatorOracle::new(name, Provenance::FromScoreFamily, move |s| {
        estimate(&psi, s, &tol).map(|r| r.theta)
    })
}

/// List oracle that sums scores in list order (not canonical order), so a
/// symmetry audit exercises the estimator rather than the multiset type.
pub fn list_oracle<T: Real>(psi: &ScoreFamily<T>, tol: Tolerances<T>) -> ListOracle<T> {
    let psi = psi.clone();
    let name = psi.name().to_string();
    ListOracle::new(name, move |xs: &[Observation]| {
        let sample = WeightedSample::from_observations(xs.iter().cloned())?;
        psi.check_sample(&sample)?;
        let domain = *psi.domain();
        let seed = seed_for(&domain, &sample);
        let f = |t: T| compensated_sum(xs.iter().map(|x| psi.eval(x, t)));
        let sc = find_sign_change(f, &domain, seed, &tol)?;
        located_or_error(&sc, &sample)?;
        Ok(sc.theta)
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::catalog::{huber_score, median_score, qa_score, step_score, Generator};

    fn sample(v: &[f64]) -> WeightedSample {
        WeightedSample::of_reals(v).unwrap()
    }

    #[test]
    fn score_sum_uses_multiplicities() {
        let psi = qa_score(&Generator::<f64>::identity());
        let s =
            WeightedSample::from_counts([(Observation::real(1.0), 2), (Observation::real(4.0), 1)])
                .unwrap();
        assert_eq!(score_sum(&psi, &s, 0.0), 6.0);
        let x = Observation::real(2.5);
        assert_eq!(
            score_sum(&psi, &WeightedSample::single(x.clone()), 1.0),
            psi.eval(&x, 1.0)
        );
    }

    #[test]
    fn arithmetic_mean_estimate() {
        let psi = qa_score(&Generator::<f64>::identity());
        let r = estimate(&psi, &sample(&[1.0, 2.0, 3.0]), &Tolerances::default()).unwrap();
        assert_eq!(r.theta, 2.0);
        assert_eq!(r.z_residual, 0.0);
        assert_eq!(r.sign_change.status, SignChangeStatus::ExactZero);
        assert!(r.claim_violation.is_none());
    }

    #[test]
    fn huber_plateau_is_an_error() {
        let psi = huber_score(1.0f64).unwrap();
        let tol = Tolerances::default();
        let r = estimate(&psi, &sample(&[0.0, 1.0]), &tol).unwrap();
        assert!((r.theta - 0.5).abs() < 1e-12);
        match estimate(&psi, &sample(&[0.0, 10.0]), &tol) {
            Err(Error::Plateau { lo, hi, .. }) => assert!(1.0 <= lo && hi <= 9.0),
            other => panic!("expected plateau, got {other:?}"),
        }
    }

    #[test]
    fn median_cases() {
        let psi = median_score::<f64>();
        let tol = Tolerances::default();
        assert!(matches!(
            estimate(&psi, &sample(&[0.0, 1.0]), &tol),
            Err(Error::Plateau { .. })
        ));
        let r = estimate(&psi, &sample(&[0.0, 1.0, 4.0]), &tol).unwrap();
        assert_eq!((r.theta, r.z_residual), (1.0, 0.0));
        let s = WeightedSample::from_counts([(Observation::real(3.0), 5)]).unwrap();
        assert_eq!(estimate(&psi, &s, &tol).unwrap().theta, 3.0);
    }

    #[test]
    fn step_score_residuals() {
        let psi = step_score::<f64>();
        let tol = Tolerances::default();
        let r = estimate(&psi, &sample(&[0.7]), &tol).unwrap();
        assert_eq!((r.theta, r.z_residual), (0.7, -2.0));
        let r = estimate(&psi, &sample(&[0.0, 1.0]), &tol).unwrap();
        assert_eq!((r.theta, r.z_residual), (0.0, -1.0));
    }

    #[test]
    fn z_claim_violation_is_reported_not_raised() {
        let psi = step_score::<f64>().with_claims(crate::model::Claims::CTZ);
        let r = estimate(&psi, &sample(&[0.0, 1.0]), &Tolerances::default()).unwrap();
        assert!(r.claim_violation.is_some());
    }

    #[test]
    fn out_of_domain_observation() {
        let psi = qa_score(&Generator::<f64>::ln());
        assert!(matches!(
            estimate(&psi, &sample(&[-1.0, 1.0]), &Tolerances::default()),
            Err(Error::ObservationOutOfDomain { .. })
        ));
    }

    #[test]
    fn list_oracle_matches_multiset_oracle() {
        let psi = qa_score(&Generator::<f64>::ln());
        let tol = Tolerances::default();
        let xs: Vec<Observation> = [3.0, 1.0, 4.0, 1.0, 5.0]
            .iter()
            .map(|&v| Observation::real(v))
            .collect();
        let a = list_oracle(&psi, tol).eval(&xs).unwrap();
        let b = estimator_oracle(&psi, tol)
            .eval(&WeightedSample::from_observations(xs).unwrap())
            .unwrap();
        assert!((a - b).abs() < 1e-12);
    }
}
