//! Kolmogorov–Nagumo axioms for a sequence of means on a compact interval.

use crate::error::{Error, Result};
use crate::oracles::MeanSequence;
use crate::scalar::Real;

use super::{
    Axiom, AxiomReport, ObservationPool, Sampler, SamplerConfig, Verdict, Witness, WitnessInputs,
};

const HALVINGS: usize = 40;

fn eval<T: Real>(m: &MeanSequence<T>, xs: &[f64]) -> f64 {
    let v: Vec<T> = xs.iter().map(|&x| T::lit(x)).collect();
    m.eval(&v).as_f64()
}

fn point(sampler: &mut Sampler, lo: f64, hi: f64) -> Vec<f64> {
    let n = sampler.block_len();
    (0..n).map(|_| sampler.real_in(lo, hi)).collect()
}

/// Moves coordinate `i` by `delta` toward whichever side has room, returning
/// `(lower, upper)` points.
fn displaced(x: &[f64], i: usize, delta: f64, hi: f64) -> (Vec<f64>, Vec<f64>) {
    let mut y = x.to_vec();
    if x[i] + delta <= hi {
        y[i] += delta;
        (x.to_vec(), y)
    } else {
        y[i] -= delta;
        (y, x.to_vec())
    }
}

fn monotonicity_violation<T: Real>(
    m: &MeanSequence<T>,
    lower: &[f64],
    upper: &[f64],
    tol: f64,
) -> (Vec<f64>, f64) {
    let (a, b) = (eval(m, lower), eval(m, upper));
    (vec![a, b], tol - (b - a))
}

fn reflexivity_violation<T: Real>(m: &MeanSequence<T>, x: f64, n: usize) -> (Vec<f64>, f64) {
    let v = eval(m, &vec![x; n]);
    (vec![v, x], (v - x).abs())
}

fn replacement_violation<T: Real>(m: &MeanSequence<T>, x: &[f64], y: &[f64]) -> (Vec<f64>, f64) {
    let xbar = eval(m, x);
    let lhs: Vec<f64> = x.iter().chain(y).copied().collect();
    let rhs: Vec<f64> = std::iter::repeat_n(xbar, x.len())
        .chain(y.iter().copied())
        .collect();
    let (a, b) = (eval(m, &lhs), eval(m, &rhs));
    (vec![a, b, xbar], (a - b).abs())
}

pub(super) fn recheck<T: Real>(
    axiom: Axiom,
    inputs: &WitnessInputs,
    m: &MeanSequence<T>,
    tol: f64,
) -> Option<f64> {
    match (axiom, inputs) {
        (Axiom::Monotonicity, WitnessInputs::Coordinate { lower, upper, .. }) => {
            Some(monotonicity_violation(m, lower, upper, tol).1)
        }
        (Axiom::Continuity, WitnessInputs::Coordinate { lower, upper, .. }) => {
            Some((eval(m, upper) - eval(m, lower)).abs())
        }
        (Axiom::Reflexivity, WitnessInputs::Constant { x, n }) => {
            Some(reflexivity_violation(m, *x, *n).1)
        }
        (Axiom::Replacement, WitnessInputs::Replacement { x, y }) => {
            Some(replacement_violation(m, x, y).1)
        }
        _ => None,
    }
}

/// Four reports: strict coordinate-wise monotonicity, continuity as a
/// vanishing perturbation response, reflexivity and replacement. The
/// interval is the pool's range, which must be finite.
pub fn kolmogorov_suite<T: Real>(
    m: &MeanSequence<T>,
    cfg: &SamplerConfig,
) -> Result<Vec<AxiomReport>> {
    cfg.validate()?;
    let (lo, hi) = match &cfg.pool {
        ObservationPool::Range { lo, hi } => (*lo, *hi),
        ObservationPool::List(_) => {
            return Err(Error::Precondition(
                "the Kolmogorov suite needs a compact interval, given as a range pool".into(),
            ))
        }
    };
    let tol = cfg.tolerance;
    let width = hi - lo;
    let mut sampler = cfg.sampler();

    let mut mono = AxiomReport::new(Axiom::Monotonicity, m.name(), tol, Some(cfg));
    for trial in 0..cfg.trials {
        let x = point(&mut sampler, lo, hi);
        let i = sampler.index(x.len());
        let delta = width * (0.05 + 0.45 * sampler.unit());
        let (lower, upper) = displaced(&x, i, delta, hi);
        let (values, v) = monotonicity_violation(m, &lower, &upper, tol);
        mono.trials += 1;
        mono.observe(v.max(0.0));
        if v >= 0.0 {
            mono.push_witness(Witness {
                trial,
                description: format!(
                    "raising coordinate {i} from {} to {} moves the mean from {} to {}",
                    lower[i], upper[i], values[0], values[1]
                ),
                inputs: WitnessInputs::Coordinate {
                    lower,
                    upper,
                    coordinate: i,
                },
                values,
                violation: v,
            });
        }
    }

    let mut cont = AxiomReport::new(Axiom::Continuity, m.name(), tol, Some(cfg));
    let mut worst_final = -1.0;
    let mut any_inconclusive = false;
    for trial in 0..cfg.trials {
        let x = point(&mut sampler, lo, hi);
        let i = sampler.index(x.len());
        let base = eval(m, &x);
        let series: Vec<(f64, f64, Vec<f64>)> = (0..HALVINGS)
            .map(|j| {
                let delta = 0.25 * width * 0.5f64.powi(j as i32);
                let (lower, upper) = displaced(&x, i, delta, hi);
                let moved = if lower == x { upper } else { lower };
                (delta, (eval(m, &moved) - base).abs(), moved)
            })
            .collect();
        cont.trials += 1;
        let tail = &series[HALVINGS / 2..];
        let last = tail.last().unwrap();
        cont.observe(last.1);
        if last.1 > worst_final {
            worst_final = last.1;
            cont.series = series.iter().map(|(d, r, _)| (*d, *r)).collect();
        }
        if tail.iter().all(|(_, r, _)| *r > tol) {
            let (lower, upper) = if last.2[i] < x[i] {
                (last.2.clone(), x.clone())
            } else {
                (x.clone(), last.2.clone())
            };
            cont.push_witness(Witness {
                trial,
                description: format!(
                    "response to a perturbation of size {:e} in coordinate {i} stays at {}",
                    last.0, last.1
                ),
                values: vec![eval(m, &lower), eval(m, &upper)],
                inputs: WitnessInputs::Coordinate {
                    lower,
                    upper,
                    coordinate: i,
                },
                violation: last.1,
            });
        } else if last.1 > tol {
            any_inconclusive = true;
        }
    }

    let mut refl = AxiomReport::new(Axiom::Reflexivity, m.name(), tol, Some(cfg));
    for trial in 0..cfg.trials {
        let x = sampler.real_in(lo, hi);
        let n = sampler.block_len();
        let (values, v) = reflexivity_violation(m, x, n);
        refl.trials += 1;
        refl.observe(v);
        if v > tol {
            refl.push_witness(Witness {
                trial,
                description: format!("M of {n} copies of {x} is {}", values[0]),
                inputs: WitnessInputs::Constant { x, n },
                values,
                violation: v,
            });
        }
    }

    let mut repl = AxiomReport::new(Axiom::Replacement, m.name(), tol, Some(cfg));
    for trial in 0..cfg.trials {
        let x = point(&mut sampler, lo, hi);
        let y = point(&mut sampler, lo, hi);
        let (values, v) = replacement_violation(m, &x, &y);
        repl.trials += 1;
        repl.observe(v);
        if v > tol {
            repl.push_witness(Witness {
                trial,
                description: format!(
                    "replacing x by copies of its mean {} changes M from {} to {}",
                    values[2], values[0], values[1]
                ),
                inputs: WitnessInputs::Replacement { x, y },
                values,
                violation: v,
            });
        }
    }

    let mut cont = cont.finish_sampled();
    if cont.verdict == Verdict::Pass && any_inconclusive {
        cont.verdict = Verdict::Inconclusive;
    }
    Ok(vec![
        mono.finish_sampled(),
        cont,
        refl.finish_sampled(),
        repl.finish_sampled(),
    ])
}
