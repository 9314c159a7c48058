use num_rational::BigRational;
use proptest::prelude::*;

use psiaxiom::axiomlab::{
    internality_violation, ObservationPool, SamplerConfig, Verdict, WitnessInputs,
};
use psiaxiom::catalog::{arctan_score, huber_score, qa_score, Generator};
use psiaxiom::estimator::estimate;
use psiaxiom::model::Tolerances;
use psiaxiom::oracles::{arithmetic_mean, maximum, quasi_arithmetic, total};
use psiaxiom::proofkit::{
    closure_probe, closure_violation, enumerate_multisets, normalize_psi, ratio_fn, synthesize_psi,
    tie_avoiding_grid, verify_synthesis, Synthesis, SynthesisConfig,
};
use psiaxiom::{Observation, WeightedSample};

fn sample(v: &[f64]) -> WeightedSample {
    WeightedSample::of_reals(v).unwrap()
}

fn block() -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(0.1f64..10.0, 1..6)
}

fn close(a: f64, b: f64) -> bool {
    (a - b).abs() <= 1e-10 * a.abs().max(b.abs()).max(1e-300)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn ratio_is_reciprocal(x in block(), y in block(), t in 0.1f64..10.0) {
        let tol = Tolerances::default();
        for psi in [arctan_score::<f64>(), qa_score(&Generator::ln())] {
            let (x, y) = (sample(&x), sample(&y));
            if let (Ok(a), Ok(b)) = (ratio_fn(&psi, &x, &y, t, &tol), ratio_fn(&psi, &y, &x, t, &tol)) {
                prop_assert!(close(a * b, 1.0), "{a} * {b}");
            }
        }
    }

    #[test]
    fn ratio_decomposes_over_an_extra_block(x in block(), y in block(), z in block(), t in 0.1f64..10.0) {
        let tol = Tolerances::default();
        let psi = arctan_score::<f64>();
        let (x, y, z) = (sample(&x), sample(&y), sample(&z));
        if let Ok(direct) = ratio_fn(&psi, &x, &y, t, &tol) {
            let joined = ratio_fn(&psi, &z.concat(&x), &y, t, &tol).unwrap();
            let extra = ratio_fn(&psi, &z, &y, t, &tol).unwrap();
            let scale = joined.abs().max(extra.abs()).max(1.0);
            prop_assert!((direct - (joined - extra)).abs() <= 1e-10 * scale);
        }
    }

    #[test]
    fn normalization_keeps_every_estimate(v in prop::collection::vec(-20.0f64..20.0, 1..10)) {
        let tol = Tolerances::default();
        for psi in [arctan_score::<f64>(), huber_score(1.0).unwrap()] {
            let normalized = normalize_psi(&psi, &Observation::real(-1.0), &Observation::real(2.0), &tol).unwrap();
            let s = sample(&v);
            // huber plateaus on spread samples; those must stay unresolved
            let Ok(a) = estimate(&psi, &s, &tol).map(|r| r.theta) else {
                prop_assert!(estimate(&normalized, &s, &tol).is_err());
                continue;
            };
            let b = estimate(&normalized, &s, &tol).unwrap().theta;
            prop_assert!((a - b).abs() <= tol.root_abs_tol * a.abs().max(1.0) * 4.0, "{a} vs {b}");
        }
    }
}

#[test]
fn closure_witnesses_are_strict_internality_witnesses() {
    let cfg = SamplerConfig::new(ObservationPool::Range { lo: 0.0, hi: 1.0 })
        .with_trials(400)
        .with_seed(17);
    for (m, expect) in [
        (total::<f64>(), Verdict::Fail),
        (maximum(), Verdict::Pass),
        (arithmetic_mean(), Verdict::Pass),
    ] {
        let report = closure_probe(&m, 0.6, &cfg).unwrap();
        assert_eq!(report.verdict, expect, "{}", m.name());
        for w in &report.witnesses {
            let WitnessInputs::Closure { r, s, t } = &w.inputs else {
                panic!("closure inputs")
            };
            let (_, _, strict) = internality_violation(&m, r, s, true, cfg.tolerance).unwrap();
            assert!(
                strict,
                "{}: closure witness at t = {t} missed by strict internality",
                m.name()
            );
        }
    }
}

#[test]
fn strict_internality_witnesses_break_closure_between() {
    let m = total::<f64>();
    let tol = 1e-9;
    let words = enumerate_multisets(
        &[Observation::real(0.2), Observation::real(0.3)],
        3,
        1 << 20,
    )
    .unwrap();
    let mut checked = 0;
    for r in &words {
        for s in &words {
            let (values, _, strict) = internality_violation(&m, r, s, true, tol).unwrap();
            let (lo, hi) = (values[0].min(values[1]), values[0].max(values[1]));
            if !strict || values[2] <= hi + 2.0 * tol {
                continue;
            }
            // any t between max(mu(r), mu(s)) and mu(r ⊕ s) puts both in A_t
            let t = (hi + values[2]) / 2.0;
            let (_, _, broken) = closure_violation(&m, r, s, t, tol).unwrap();
            assert!(broken, "t = {t}, mu in [{lo}, {hi}], joined {}", values[2]);
            checked += 1;
        }
    }
    assert!(checked > 10);
}

#[test]
fn synthesized_table_is_additive_and_verifies() {
    let m = quasi_arithmetic(&Generator::<f64>::ln());
    let alphabet: Vec<Observation> = [1, 2, 4].iter().map(|&n| Observation::int(n)).collect();
    let grid = tie_avoiding_grid(1.0, 4.0, 9);
    let cfg = SynthesisConfig {
        theta_interval: Some((1.0, 4.0)),
        ..SynthesisConfig::default()
    };
    let out = synthesize_psi(&m, &alphabet, &grid, 4, &cfg).unwrap();
    assert!(out.grid.iter().all(|g| g.margin > 0.0));
    let Synthesis::Table(table) = out.result else {
        panic!("geometric mean should separate")
    };
    assert!(verify_synthesis(&table, &m, &alphabet, 4).unwrap().passed());

    let words = enumerate_multisets(&alphabet, 2, 1 << 20).unwrap();
    for j in 0..grid.len() {
        for a in &words {
            for b in &words {
                let joined = table.score_sum_at(&a.concat(b), j).unwrap();
                let split: BigRational =
                    table.score_sum_at(a, j).unwrap() + table.score_sum_at(b, j).unwrap();
                assert_eq!(joined, split);
            }
        }
    }
}

#[test]
fn certificates_revalidate_exactly() {
    let cfg = SynthesisConfig::default();
    for (m, alphabet, t) in [
        (
            total::<f64>(),
            vec![Observation::real(0.2), Observation::real(0.3)],
            0.4,
        ),
        (total::<f64>(), vec![Observation::int(1)], 1.5),
    ] {
        let out = synthesize_psi(&m, &alphabet, &[t], 3, &cfg).unwrap();
        let Synthesis::Infeasible(cert) = out.result else {
            panic!("{} should be infeasible", m.name())
        };
        assert!(cert.combination_balances());
        assert!(cert.revalidate(&m, cfg.boundary_tol).unwrap());
    }
}
