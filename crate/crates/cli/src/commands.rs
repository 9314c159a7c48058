use anyhow::{bail, Context};
use psiaxiom::axiomlab::{
    check_asymptotic_idempotency, check_asymptotic_idempotency_sampled,
    check_generator_equivalence, check_internality, check_symmetry, check_t_property,
    check_z_property, kolmogorov_suite, power_schedule, Axiom, AxiomReport, Verdict,
};
use psiaxiom::catalog::{arctan_score, huber_score, median_score, qa_score, step_score};
use psiaxiom::estimator::{estimate_on, estimator_oracle, list_oracle};
use psiaxiom::model::{EstimatorOracle, ListOracle};
use psiaxiom::oracles::BUILTIN_NAMES;
use psiaxiom::proofkit::{
    audit_ratio, closure_probe, core_probe, mu, synthesize_psi, tie_avoiding_grid,
    verify_synthesis, z_via_ratio_limits, CoreProbe, Synthesis, SynthesisConfig,
};
use psiaxiom::{Generator, Score, WeightedSample};

use crate::report::Report;
use crate::spec::{
    parse_generator, parse_list_oracle, parse_mean_sequence, parse_oracle, parse_psi_spec,
};
use crate::{Command, Diagnosis, RunConfig};

pub(crate) fn execute(config: &RunConfig) -> anyhow::Result<Report> {
    let mut report = Report::new(config.command.name(), config.tolerance_snapshot());
    echo_common(config, &mut report);
    match &config.command {
        Command::Estimate => estimate(config, &mut report)?,
        Command::Audit { .. } => audit(config, &mut report)?,
        Command::Kolmogorov => kolmogorov(config, &mut report)?,
        Command::Diagnose(d) => diagnose(config, d, &mut report)?,
        Command::Synthesize { .. } => synthesize(config, &mut report)?,
        Command::CatalogList => catalog(&mut report),
    }
    Ok(report)
}

fn echo_common(config: &RunConfig, report: &mut Report) {
    if let Some(p) = &config.psi_spec {
        report.input("psi", p);
    }
    if let Some(m) = &config.mean_spec {
        report.input("mean", m);
    }
    if let Some(d) = &config.data_path {
        report.input("data", d.display().to_string());
    }
    if let Some(i) = &config.theta_interval {
        report.input("theta", [i.lo(), i.hi()]);
    }
    if matches!(
        config.command,
        Command::Audit { .. }
            | Command::Kolmogorov
            | Command::Diagnose(Diagnosis::Semigroup { .. })
    ) {
        report.input("seed", config.sampler.seed);
        report.input("trials", config.sampler.trials);
        report.input("max_block", config.sampler.max_block);
        if let Some((lo, hi)) = config.sampler.range {
            report.input("range", [lo, hi]);
        }
    }
}

fn psi(config: &RunConfig) -> anyhow::Result<Score> {
    let spec = config.psi_spec.as_deref().context("--psi is required")?;
    parse_psi_spec(spec).with_context(|| format!("--psi {spec}"))
}

fn estimate(config: &RunConfig, report: &mut Report) -> anyhow::Result<()> {
    let psi = psi(config)?;
    let data = config.data()?.context("--data is required")?;
    report.input("sample", &data);
    let domain = config.theta_interval.unwrap_or(*psi.domain());
    let r = estimate_on(&psi, &data, &domain, &config.tolerances.estimation)?;
    report.metric("theta", r.theta);
    report.metric("z_residual", r.z_residual);
    report.metric("n", r.n);
    report.metric("status", r.sign_change.status);
    report.metric(
        "bracket",
        [r.sign_change.bracket.0, r.sign_change.bracket.1],
    );
    report.metric("evaluations", r.sign_change.evaluations);
    if let Some(v) = r.claim_violation {
        report.metric("claim_violation", v);
    }
    Ok(())
}

/// The audited estimator, from either `--psi` or `--mean`.
struct Audited {
    score: Option<Score>,
    list: ListOracle<f64>,
    oracle: Option<EstimatorOracle<f64>>,
}

fn audited(config: &RunConfig) -> anyhow::Result<Audited> {
    let tol = config.tolerances.estimation;
    if config.psi_spec.is_some() {
        let psi = psi(config)?;
        return Ok(Audited {
            list: list_oracle(&psi, tol),
            oracle: Some(estimator_oracle(&psi, tol)),
            score: Some(psi),
        });
    }
    let spec = config
        .mean_spec
        .as_deref()
        .context("--psi or --mean is required")?;
    Ok(Audited {
        score: None,
        list: parse_list_oracle(spec)?,
        oracle: parse_oracle(spec).ok(),
    })
}

fn audit(config: &RunConfig, report: &mut Report) -> anyhow::Result<()> {
    let Command::Audit {
        axioms,
        t,
        y,
        schedule_exp,
        generators,
    } = &config.command
    else {
        unreachable!()
    };
    let data = config.data()?;
    let cfg = config.sampler_config(data.as_ref())?;
    let tol = config.tolerances.estimation;
    let seeds: Vec<WeightedSample> = data.iter().cloned().collect();
    let schedule = power_schedule(*schedule_exp);
    let subject = if config.psi_spec.is_some() || config.mean_spec.is_some() {
        Some(audited(config)?)
    } else {
        None
    };
    let axioms = if axioms.is_empty() {
        default_axioms(subject.as_ref(), generators.is_some())
    } else {
        axioms.clone()
    };
    report.input(
        "axioms",
        axioms.iter().map(|a| a.as_str()).collect::<Vec<_>>(),
    );
    report.input("schedule_max_exp", schedule_exp);
    if let Some(t) = t {
        report.input("t", t);
    }
    if let Some(y) = y {
        report.input("y", y);
    }

    let need = |what: &str| -> anyhow::Result<&Audited> {
        subject
            .as_ref()
            .with_context(|| format!("{what} needs --psi or --mean"))
    };
    let oracle = |what: &str| -> anyhow::Result<&EstimatorOracle<f64>> {
        need(what)?.oracle.as_ref().with_context(|| {
            format!(
                "{what} needs a multiset estimator; `{}` is defined on ordered lists only",
                need(what).map_or("", |s| s.list.name())
            )
        })
    };
    let score = |what: &str| -> anyhow::Result<&Score> {
        need(what)?
            .score
            .as_ref()
            .with_context(|| format!("{what} needs a score family (--psi)"))
    };

    for axiom in &axioms {
        let what = axiom.as_str();
        let r: AxiomReport = match axiom {
            Axiom::Symmetry => check_symmetry(&need(what)?.list, &cfg)?,
            Axiom::Internality => check_internality(oracle(what)?, &cfg, false)?,
            Axiom::StrictInternality => check_internality(oracle(what)?, &cfg, true)?,
            Axiom::AsymptoticIdempotency => match (y, &data) {
                (Some(y), Some(d)) => {
                    check_asymptotic_idempotency(oracle(what)?, d, y, &schedule, cfg.tolerance)?
                }
                _ => check_asymptotic_idempotency_sampled(oracle(what)?, &cfg, &schedule)?,
            },
            Axiom::TProperty => check_t_property(score(what)?, &tol, &cfg, &seeds)?,
            Axiom::ZProperty => check_z_property(score(what)?, &tol, &cfg, &seeds)?,
            Axiom::SubsemigroupClosure => {
                let t = t.context("subsemigroup-closure needs --t")?;
                closure_probe(oracle(what)?, t, &cfg)?
            }
            Axiom::GeneratorEquivalence => {
                let (f, g) = generators
                    .as_ref()
                    .context("generator-equivalence needs --generators f,g")?;
                check_generator_equivalence(&parse_generator(f)?, &parse_generator(g)?, &cfg)?
            }
            Axiom::Monotonicity | Axiom::Continuity | Axiom::Reflexivity | Axiom::Replacement => {
                bail!("{what} is checked by the kolmogorov command")
            }
        };
        report.absorb(&r);
    }
    Ok(())
}

fn default_axioms(subject: Option<&Audited>, generators: bool) -> Vec<Axiom> {
    let mut out = Vec::new();
    if let Some(s) = subject {
        out.push(Axiom::Symmetry);
        if s.oracle.is_some() {
            out.extend([Axiom::StrictInternality, Axiom::AsymptoticIdempotency]);
        }
        if s.score.is_some() {
            out.extend([Axiom::TProperty, Axiom::ZProperty]);
        }
    }
    if generators {
        out.push(Axiom::GeneratorEquivalence);
    }
    out
}

fn kolmogorov(config: &RunConfig, report: &mut Report) -> anyhow::Result<()> {
    let spec = config.mean_spec.as_deref().context("--mean is required")?;
    let m = parse_mean_sequence(spec)?;
    let cfg = config.sampler_config(None)?;
    for r in kolmogorov_suite(&m, &cfg)? {
        report.absorb(&r);
    }
    Ok(())
}

fn pass_if(ok: bool) -> Verdict {
    if ok {
        Verdict::Pass
    } else {
        Verdict::Fail
    }
}

fn diagnose(config: &RunConfig, d: &Diagnosis, report: &mut Report) -> anyhow::Result<()> {
    let tol = config.tolerances.estimation;
    match d {
        Diagnosis::Ratio { x, y, grid } => {
            let psi = psi(config)?;
            report.input("x", x);
            report.input("y", y);
            report.input("grid", grid);
            let r = audit_ratio(&psi, x, y, *grid, &tol)?;
            report.verdict(
                "ratio-positive",
                psi.name(),
                pass_if(r.positive_on_gap_interval),
            );
            report.verdict(
                "ratio-monotone",
                psi.name(),
                pass_if(r.monotone_on_gap_interval),
            );
            report.verdict(
                "ratio-continuity",
                psi.name(),
                pass_if(r.continuity_consistent),
            );
            report.metric("x_estimate", r.x_estimate);
            report.metric("y_estimate", r.domain_gap);
            report.metric("expected_direction", r.expected_direction);
            report.metric("skipped", r.skipped);
            report.metric("max_jump", r.max_jump);
            report.metric("refined_max_jump", r.refined_max_jump);
            report.metric("grid", &r.grid);
            report.metric("values", &r.values);
        }
        Diagnosis::ZLimits { x, y } => {
            let psi = psi(config)?;
            report.input("x", x);
            report.input("y", y);
            let r = z_via_ratio_limits(&psi, x, y, &tol, config.tolerances.limit)?;
            report.verdict("z-consistent", psi.name(), pass_if(r.z_consistent));
            report.metric("theta", r.theta);
            report.metric("y_estimate", r.y_estimate);
            report.metric("h0", r.h0);
            report.metric("left_limit", r.left_limit);
            report.metric("right_limit", r.right_limit);
            report.metric("direct_residual", r.direct_residual);
            report.metric("left", &r.left);
            report.metric("right", &r.right);
        }
        Diagnosis::Semigroup { t, core, n_max } => {
            let a = audited(config)?;
            let m = a
                .oracle
                .as_ref()
                .context("semigroup probes need a multiset estimator")?;
            let data = config.data()?;
            let cfg = config.sampler_config(data.as_ref())?;
            report.input("t", t);
            if let Some(d) = &data {
                report.metric("mu_data", mu(m, d)?);
            }
            report.absorb(&closure_probe(m, *t, &cfg)?);
            if let Some((base, s)) = core {
                report.input("core_a", base);
                report.input("core_s", s);
                report.input("n_max", n_max);
                match core_probe(m, *t, base, s, *n_max, config.tolerances.axiom)? {
                    CoreProbe::Found(n) => report.metric("core_n", n),
                    CoreProbe::Unresolved(n) => report.metric("core_unresolved_at", n),
                }
            }
        }
    }
    Ok(())
}

fn synthesize(config: &RunConfig, report: &mut Report) -> anyhow::Result<()> {
    let Command::Synthesize {
        alphabet,
        max_size,
        grid,
        table_path,
    } = &config.command
    else {
        unreachable!()
    };
    let spec = config.mean_spec.as_deref().context("--mean is required")?;
    let m = parse_oracle(spec)?;
    let (lo, hi) = match config.theta_interval {
        Some(i) => (i.lo(), i.hi()),
        None => {
            let s = WeightedSample::from_observations(alphabet.iter().cloned())?;
            s.real_range::<f64>()
                .context("alphabet must be numeric unless --theta is given")?
        }
    };
    if !(lo.is_finite() && hi.is_finite() && lo < hi) {
        bail!("synthesis needs a finite theta range with lo < hi, got {lo}:{hi}");
    }
    let theta_grid = tie_avoiding_grid(lo, hi, *grid);
    report.input("alphabet", alphabet);
    report.input("max_size", max_size);
    report.input("grid", grid);
    report.input("theta_range", [lo, hi]);
    let cfg = SynthesisConfig {
        boundary_tol: config.tolerances.boundary,
        theta_interval: Some((lo, hi)),
        ..SynthesisConfig::default()
    };
    let out = synthesize_psi(&m, alphabet, &theta_grid, *max_size, &cfg)?;
    report.metric("multisets", out.multisets);
    report.metric("grid_points", &out.grid);
    match out.result {
        Synthesis::Table(table) => {
            let check = verify_synthesis(&table, &m, alphabet, *max_size)?;
            report.verdict("separation", m.name(), Verdict::Pass);
            report.verdict("verification", m.name(), pass_if(check.passed()));
            report.metric("cells_checked", check.cells_checked);
            report.metric("boundary_cells", check.boundary_cells);
            report.metric("violations", &check.violations);
            report.metric(
                "margins",
                table
                    .margins
                    .iter()
                    .map(|r| r.to_string())
                    .collect::<Vec<_>>(),
            );
            if let Some(path) = table_path {
                table.write(path)?;
                report.metric("table", path.display().to_string());
            }
        }
        Synthesis::Infeasible(cert) => {
            report.verdict("separation", m.name(), Verdict::Fail);
            report.metric("certificate_balances", cert.combination_balances());
            report.metric(
                "certificate_revalidates",
                cert.revalidate(&m, cfg.boundary_tol)?,
            );
            report.metric("certificate", &cert);
        }
    }
    Ok(())
}

fn catalog(report: &mut Report) {
    let families: Vec<(&str, Score)> = vec![
        ("qa:id", qa_score(&Generator::identity())),
        ("qa:ln", qa_score(&Generator::ln())),
        ("qa:recip", qa_score(&Generator::reciprocal())),
        (
            "qa:pow:<p>",
            qa_score(&Generator::power(2.0).expect("pow:2")),
        ),
        ("huber:<kappa>", huber_score(1.0).expect("huber:1")),
        ("arctan", arctan_score()),
        ("median", median_score()),
        ("step", step_score()),
    ];
    let rows: Vec<_> = families
        .iter()
        .map(|(spec, f)| {
            serde_json::json!({
                "spec": spec,
                "claims": f.claims(),
                "domain": [f.domain().lo(), f.domain().hi()],
            })
        })
        .collect();
    report.metric("families", rows);
    report.metric("table", "table:<path>");
    report.metric("estimators", BUILTIN_NAMES);
    report.metric("generators", ["id", "ln", "recip", "pow:<p>"]);
}
