use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use psiaxiom::catalog::{
    arctan_score, huber_score, median_score, qa_mean, qa_score, step_score, Generator,
};
use psiaxiom::estimator::{estimate, homomorphism_residual, score_sum};
use psiaxiom::model::{ObservationDomain, ParameterInterval, ScoreFamily, Tolerances};
use psiaxiom::signchange::{
    bracket_sign_change, find_sign_change, BracketSearch, SignChangeStatus,
};
use psiaxiom::{Observation, WeightedSample};

const GRID: usize = 1_000_000;

/// Last grid point in `[lo, hi]` where `f > 0`, followed by the first `<= 0`.
fn scan(f: &impl Fn(f64) -> f64, lo: f64, hi: f64) -> (f64, f64) {
    let pitch = (hi - lo) / GRID as f64;
    let mut prev = lo;
    for j in 1..=GRID {
        let t = lo + pitch * j as f64;
        if f(t) <= 0.0 {
            return (prev, t);
        }
        prev = t;
    }
    panic!("no sign change on the scan range")
}

/// Two nested million-point scans: the second over the cell found by the
/// first, so the pitch ends near `(hi - lo) * 1e-12`.
fn nested_scan(f: &impl Fn(f64) -> f64, lo: f64, hi: f64) -> f64 {
    let (a, b) = scan(f, lo, hi);
    let (c, d) = scan(f, a, b);
    (c + d) / 2.0
}

fn sample(v: &[f64]) -> WeightedSample {
    WeightedSample::of_reals(v).unwrap()
}

#[test]
fn arctan_estimate_matches_grid_scan() {
    let psi = arctan_score::<f64>();
    let s = sample(&[0.0, 1.0, 5.0]);
    let r = estimate(&psi, &s, &Tolerances::default()).unwrap();
    let oracle = nested_scan(&|t| score_sum(&psi, &s, t), 0.0, 5.0);
    assert!((r.theta - oracle).abs() <= 1e-8, "{} vs {oracle}", r.theta);
    assert!(0.0 < r.theta && r.theta < 5.0);
    assert!(r.z_residual.abs() <= 1e-10);
}

#[test]
fn doubling_bracket_trace() {
    let tol = Tolerances::default();
    let line = ParameterInterval::real_line();
    let found = bracket_sign_change(|t: f64| 100.0 - t, &line, 0.0, &tol).unwrap();
    assert_eq!(
        found,
        BracketSearch::Found {
            lo: 0.0,
            hi: 128.0,
            evaluations: 9
        }
    );
    let r = find_sign_change(|t: f64| 100.0 - t, &line, 0.0, &tol).unwrap();
    assert_eq!(r.theta, 100.0);

    let BracketSearch::NoBracket { probes, .. } =
        bracket_sign_change(|_: f64| 1.0, &line, 0.0, &tol).unwrap()
    else {
        panic!("a positive constant has no sign change")
    };
    assert!(probes.iter().take(5).copied().eq([0.0, 1.0, 2.0, 4.0, 8.0]));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn sign_change_agrees_with_grid_scan(root in -50.0f64..50.0, slope in 0.01f64..20.0, cubic in 0.0f64..2.0) {
        let f = move |t: f64| -slope * (t - root) - cubic * (t - root).powi(3);
        let r = find_sign_change(f, &ParameterInterval::real_line(), 0.0, &Tolerances::default()).unwrap();
        let (lo, hi) = (-100.0, 100.0);
        let (a, b) = scan(&f, lo, hi);
        let pitch = (hi - lo) / GRID as f64;
        prop_assert!(r.theta >= a - 1e-12 - pitch && r.theta <= b + 1e-12 + pitch);
        prop_assert!(r.bracket.0 <= r.theta && r.theta <= r.bracket.1);
        let cap = Tolerances::<f64>::default();
        prop_assert!(r.evaluations <= cap.max_bracket_steps + cap.max_bisect_steps + 64);
    }
}

fn random_sample(rng: &mut ChaCha8Rng, lo: f64, hi: f64, max_n: usize) -> WeightedSample {
    let n = rng.gen_range(1..=max_n);
    let v: Vec<f64> = (0..n).map(|_| rng.gen_range(lo..hi)).collect();
    sample(&v)
}

#[test]
fn score_sum_is_a_homomorphism() {
    let families: Vec<ScoreFamily<f64>> = vec![
        qa_score(&Generator::identity()),
        qa_score(&Generator::ln()),
        qa_score(&Generator::reciprocal()),
        arctan_score(),
        huber_score(1.5).unwrap(),
        median_score(),
        step_score(),
    ];
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for trial in 0..100_000 {
        let psi = &families[trial % families.len()];
        let a = random_sample(&mut rng, 0.1, 10.0, 6);
        let b = random_sample(&mut rng, 0.1, 10.0, 6);
        let t = rng.gen_range(0.1..10.0);
        let scale = score_sum(psi, &a, t).abs() + score_sum(psi, &b, t).abs() + 1.0;
        assert!(
            homomorphism_residual(psi, &a, &b, t) <= 1e-12 * scale,
            "trial {trial}"
        );
    }
}

#[test]
fn step_residual_is_a_nonzero_piecewise_value() {
    let psi = step_score::<f64>();
    let tol = Tolerances::default();
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let mut located = 0;
    for _ in 0..500 {
        let s = random_sample(&mut rng, -5.0, 5.0, 7);
        let Ok(r) = estimate(&psi, &s, &tol) else {
            continue;
        };
        located += 1;
        // count the piecewise value at theta by hand
        let above = s
            .iter()
            .filter(|(x, _)| x.to_real::<f64>().unwrap() > r.theta)
            .map(|(_, m)| m as f64)
            .sum::<f64>();
        let below = s.size() as f64 - above;
        assert_eq!(r.z_residual, above - 2.0 * below);
        assert!(r.z_residual.abs() >= 1.0);
    }
    assert!(located > 100);
}

#[test]
fn affine_generators_give_the_same_mean() {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let bases = [
        Generator::<f64>::ln(),
        Generator::reciprocal(),
        Generator::power(2.0).unwrap(),
    ];
    for g in &bases {
        for (a, b) in [(3.0, -1.0), (-0.5, 4.0), (0.25, 0.5)] {
            let f = g.affine(a, b).unwrap();
            for _ in 0..200 {
                let s = random_sample(&mut rng, 0.1, 10.0, 20);
                let (x, y) = (qa_mean(g, &s).unwrap(), qa_mean(&f, &s).unwrap());
                assert!(
                    (x - y).abs() <= 1e-9 * x.abs().max(1.0),
                    "{} a={a}",
                    g.name()
                );
            }
        }
    }
}

fn arb_sample() -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(0.1f64..10.0, 1..12)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn permutation_invariance_is_bitwise(v in arb_sample(), seed in any::<u64>()) {
        let psi = qa_score(&Generator::<f64>::ln());
        let mut w = v.clone();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rand::seq::SliceRandom::shuffle(w.as_mut_slice(), &mut rng);
        let tol = Tolerances::default();
        let a = estimate(&psi, &sample(&v), &tol).unwrap();
        let b = estimate(&psi, &sample(&w), &tol).unwrap();
        prop_assert_eq!(a.theta.to_bits(), b.theta.to_bits());
        prop_assert_eq!(a, b);
    }

    #[test]
    fn positive_scaling_keeps_the_estimate(v in arb_sample(), c in 0.1f64..5.0) {
        let base = arctan_score::<f64>();
        let inner = base.clone();
        let scaled = ScoreFamily::new(
            "scaled-arctan",
            *base.domain(),
            ObservationDomain::AnyReal,
            base.claims(),
            move |x: &Observation, t: f64| (c + t * t) * inner.eval(x, t),
        );
        let tol = Tolerances::default();
        let a = estimate(&base, &sample(&v), &tol).unwrap().theta;
        let b = estimate(&scaled, &sample(&v), &tol).unwrap().theta;
        prop_assert!((a - b).abs() <= 1e-12 * a.abs().max(1.0) + tol.root_abs_tol);
    }

    #[test]
    fn replication_keeps_the_estimate(v in arb_sample(), m in 1u64..50) {
        let psi = qa_score(&Generator::<f64>::reciprocal());
        let tol = Tolerances::default();
        let s = sample(&v);
        let a = estimate(&psi, &s, &tol).unwrap().theta;
        let b = estimate(&psi, &s.replicate(m).unwrap(), &tol).unwrap().theta;
        prop_assert!((a - b).abs() <= tol.root_abs_tol * a.abs().max(1.0) * 4.0);
    }

    #[test]
    fn continuous_families_vanish_at_the_estimate(v in arb_sample()) {
        let tol = Tolerances::default();
        for psi in [qa_score(&Generator::<f64>::identity()), qa_score(&Generator::ln()), arctan_score()] {
            let s = sample(&v);
            let r = estimate(&psi, &s, &tol).unwrap();
            prop_assert!(r.z_residual.abs() <= tol.zero_tol * s.size() as f64);
            prop_assert!(r.claim_violation.is_none());
            prop_assert!(matches!(r.sign_change.status, SignChangeStatus::Located | SignChangeStatus::ExactZero));
        }
    }
}
