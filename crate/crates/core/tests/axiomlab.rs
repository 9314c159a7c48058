use psiaxiom::axiomlab::{
    check_asymptotic_idempotency, check_asymptotic_idempotency_sampled, check_internality,
    check_symmetry, check_t_property, check_z_property, power_schedule, recheck, Axiom,
    AxiomReport, ObservationPool, SamplerConfig, Subject, Verdict,
};
use psiaxiom::catalog::{arctan_score, huber_score, median_score, qa_score, step_score, Generator};
use psiaxiom::estimator::{estimator_oracle, list_oracle};
use psiaxiom::model::{Claims, ScoreFamily, Tolerances};
use psiaxiom::oracles::{first_biased_mean, maximum, quasi_arithmetic, total};
use psiaxiom::{Observation, WeightedSample};

fn cfg(lo: f64, hi: f64) -> SamplerConfig {
    SamplerConfig::new(ObservationPool::Range { lo, hi })
        .with_trials(200)
        .with_max_block(4)
        .with_seed(23)
}

fn assert_rechecks<T: psiaxiom::scalar::Real>(report: &AxiomReport, subject: Subject<'_, T>) {
    for w in &report.witnesses {
        let again = recheck(report.axiom, w, subject, report.tolerance).unwrap();
        assert!(
            (again - w.violation).abs() <= 1e-12,
            "{:?}: {again} vs {}",
            report.axiom,
            w.violation
        );
    }
}

#[test]
fn geometric_gap_follows_direct_computation() {
    let g = Generator::<f64>::ln();
    let m = quasi_arithmetic(&g);
    let x = WeightedSample::of_reals(&[1.0, 4.0]).unwrap();
    let schedule = power_schedule(15);
    let report =
        check_asymptotic_idempotency(&m, &x, &Observation::real(100.0), &schedule, 1e-3).unwrap();
    assert_eq!(report.verdict, Verdict::Pass);
    for (&n, &(at, gap)) in schedule.iter().zip(&report.series) {
        let n = n as f64;
        let direct = ((n * 4f64.ln() + 100f64.ln()) / (2.0 * n + 1.0)).exp() - 2.0;
        assert_eq!(at, n);
        assert!((gap - direct).abs() <= 1e-12 * direct.max(1.0), "n = {n}");
    }
    assert!(report.series.windows(2).all(|w| w[1].1 < w[0].1));
}

#[test]
fn identical_configs_give_identical_reports() {
    let m = estimator_oracle(&arctan_score::<f64>(), Tolerances::default());
    let run = || {
        let c = cfg(-3.0, 3.0);
        [
            check_internality(&m, &c, true).unwrap(),
            check_asymptotic_idempotency_sampled(&m, &c, &power_schedule(8)).unwrap(),
            check_z_property(&arctan_score::<f64>(), &Tolerances::default(), &c, &[]).unwrap(),
        ]
    };
    let (a, b) = (run(), run());
    assert_eq!(a, b);
    assert_eq!(
        serde_json::to_string(&a).unwrap(),
        serde_json::to_string(&b).unwrap()
    );
}

fn ctz_catalog() -> Vec<ScoreFamily<f64>> {
    vec![
        qa_score(&Generator::identity()),
        qa_score(&Generator::ln()),
        qa_score(&Generator::reciprocal()),
        qa_score(&Generator::power(2.0).unwrap()),
        qa_score(&Generator::power(-1.0).unwrap()),
        arctan_score(),
    ]
}

#[test]
fn ctz_families_pass_the_forward_axioms() {
    let tol = Tolerances::default();
    // slow convergers (recip, pow:-1) need a narrow pool to settle by n = 2^15
    let c = cfg(1.0, 4.0).with_tolerance(1e-3);
    for psi in ctz_catalog() {
        assert_eq!(psi.claims(), Claims::CTZ, "{}", psi.name());
        let list = list_oracle(&psi, tol);
        let m = estimator_oracle(&psi, tol);
        let reports = [
            check_symmetry(&list, &c).unwrap(),
            check_internality(&m, &c.clone().with_tolerance(1e-9), true).unwrap(),
            check_asymptotic_idempotency_sampled(
                &m,
                &c.clone().with_trials(40),
                &power_schedule(15),
            )
            .unwrap(),
        ];
        for r in &reports {
            assert_eq!(
                r.verdict,
                Verdict::Pass,
                "{} {:?}: {:?}",
                psi.name(),
                r.axiom,
                r.notes
            );
        }
    }
}

#[test]
fn counterexample_scores_fail_a_designated_axiom() {
    let tol = Tolerances::default();
    let c = cfg(0.0, 10.0);
    let cases: [(ScoreFamily<f64>, Axiom); 3] = [
        (huber_score(0.5).unwrap(), Axiom::TProperty),
        (median_score(), Axiom::TProperty),
        (step_score(), Axiom::ZProperty),
    ];
    for (psi, axiom) in &cases {
        assert_ne!(psi.claims(), Claims::CTZ);
        let report = match axiom {
            Axiom::TProperty => check_t_property(psi, &tol, &c, &[]).unwrap(),
            _ => check_z_property(psi, &tol, &c, &[]).unwrap(),
        };
        assert_eq!(report.verdict, Verdict::Fail, "{}", psi.name());
        assert!(!report.witnesses.is_empty());
        assert_rechecks(&report, Subject::Score(psi, &tol));
    }
}

#[test]
fn counterexample_oracles_fail_a_designated_axiom() {
    let c = cfg(0.0, 1.0);
    let symmetry = check_symmetry(&first_biased_mean::<f64>(), &c).unwrap();
    assert_eq!(symmetry.verdict, Verdict::Fail);
    assert_rechecks(&symmetry, Subject::List(&first_biased_mean::<f64>()));

    let max = maximum::<f64>();
    let strict = check_internality(&max, &c, true).unwrap();
    assert_eq!(strict.verdict, Verdict::Fail);
    assert_eq!(
        check_internality(&max, &c, false).unwrap().verdict,
        Verdict::Pass
    );
    assert_rechecks(&strict, Subject::Oracle(&max));

    let sum = total::<f64>();
    let idem =
        check_asymptotic_idempotency_sampled(&sum, &c.clone().with_trials(20), &power_schedule(10))
            .unwrap();
    assert_eq!(idem.verdict, Verdict::Fail);
    assert_rechecks(&idem, Subject::Oracle(&sum));
}
