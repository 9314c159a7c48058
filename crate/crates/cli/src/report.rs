//! Structured run reports. Everything except `timing` is a pure function of
//! the run configuration, so two runs with the same seed produce the same
//! body byte for byte.

use std::collections::BTreeMap;
use std::io::Write;

use psiaxiom::axiomlab::{AxiomReport, Verdict, Witness};
use psiaxiom::Tolerances;
use serde::Serialize;
use serde_json::{json, Value};

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Json,
    Csv,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VerdictLine {
    pub check: String,
    pub subject: String,
    pub verdict: Verdict,
    pub trials: usize,
    pub errors: usize,
    pub max_violation: f64,
    pub tolerance: f64,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub series: Vec<(f64, f64)>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub notes: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct WitnessLine {
    pub check: String,
    #[serde(flatten)]
    pub witness: Witness,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ToleranceSnapshot {
    pub estimation: Tolerances,
    pub axiom: f64,
    pub limit: f64,
    pub boundary: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Timing {
    pub elapsed_ms: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Report {
    pub command: String,
    pub inputs: BTreeMap<String, Value>,
    pub verdicts: Vec<VerdictLine>,
    pub witnesses: Vec<WitnessLine>,
    pub metrics: BTreeMap<String, Value>,
    pub version: String,
    pub tolerances: ToleranceSnapshot,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub timing: Option<Timing>,
}

impl Report {
    pub fn new(command: &str, tolerances: ToleranceSnapshot) -> Self {
        Self {
            command: command.into(),
            inputs: BTreeMap::new(),
            verdicts: Vec::new(),
            witnesses: Vec::new(),
            metrics: BTreeMap::new(),
            version: VERSION.into(),
            tolerances,
            timing: None,
        }
    }

    pub fn input(&mut self, key: &str, value: impl Serialize) {
        self.inputs.insert(key.into(), json!(value));
    }

    pub fn metric(&mut self, key: &str, value: impl Serialize) {
        self.metrics.insert(key.into(), json!(value));
    }

    pub fn verdict(&mut self, check: &str, subject: &str, verdict: Verdict) {
        self.verdicts.push(VerdictLine {
            check: check.into(),
            subject: subject.into(),
            verdict,
            trials: 1,
            errors: 0,
            max_violation: 0.0,
            tolerance: self.tolerances.axiom,
            series: Vec::new(),
            notes: Vec::new(),
        });
    }

    /// Folds an axiom report in: a verdict line, its witnesses, and its
    /// metrics under `<axiom>.<key>`.
    pub fn absorb(&mut self, r: &AxiomReport) {
        let check = r.axiom.as_str();
        self.verdicts.push(VerdictLine {
            check: check.into(),
            subject: r.subject.clone(),
            verdict: r.verdict,
            trials: r.trials,
            errors: r.errors,
            max_violation: r.max_violation,
            tolerance: r.tolerance,
            series: r.series.clone(),
            notes: r.notes.clone(),
        });
        self.witnesses
            .extend(r.witnesses.iter().map(|w| WitnessLine {
                check: check.into(),
                witness: w.clone(),
            }));
        for (k, v) in &r.metrics {
            self.metric(&format!("{check}.{k}"), v);
        }
    }

    pub fn falsified(&self) -> bool {
        self.verdicts.iter().any(|v| v.verdict == Verdict::Fail)
    }

    /// JSON without the timing block.
    pub fn body_json(&self) -> String {
        let body = Report {
            timing: None,
            ..self.clone()
        };
        serde_json::to_string_pretty(&body).expect("reports serialize")
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("reports serialize")
    }

    /// Flat `section,key,value` rows; structured values are embedded as
    /// compact JSON.
    pub fn to_csv(&self) -> String {
        let mut w = csv::Writer::from_writer(Vec::new());
        let mut row = |a: &str, b: &str, c: &str| w.write_record([a, b, c]).expect("in-memory csv");
        row("section", "key", "value");
        row("command", "", &self.command);
        row("version", "", &self.version);
        for (k, v) in &self.inputs {
            row("input", k, &scalar(v));
        }
        for v in &self.verdicts {
            row(
                "verdict",
                &format!("{}:{}", v.check, v.subject),
                &scalar(&json!(v.verdict)),
            );
        }
        for (i, x) in self.witnesses.iter().enumerate() {
            let body = serde_json::to_string(&x.witness).expect("witness serializes");
            row("witness", &format!("{}#{i}", x.check), &body);
        }
        for (k, v) in &self.metrics {
            row("metric", k, &scalar(v));
        }
        let tol = serde_json::to_value(&self.tolerances).expect("tolerances serialize");
        row("tolerances", "", &tol.to_string());
        if let Some(t) = &self.timing {
            row("timing", "elapsed_ms", &t.elapsed_ms.to_string());
        }
        String::from_utf8(w.into_inner().expect("in-memory csv")).expect("utf-8")
    }

    pub fn render(&self, format: Format) -> String {
        match format {
            Format::Json => self.to_json(),
            Format::Csv => self.to_csv(),
        }
    }

    pub fn write_to(&self, format: Format, out: &mut dyn Write) -> std::io::Result<()> {
        out.write_all(self.render(format).as_bytes())?;
        if format == Format::Json {
            out.write_all(b"\n")?;
        }
        Ok(())
    }
}

fn scalar(v: &Value) -> String {
    match v {
        Value::String(s) => s.clone(),
        other => other.to_string(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn snapshot() -> ToleranceSnapshot {
        ToleranceSnapshot {
            estimation: Tolerances::default(),
            axiom: 1e-9,
            limit: 1e-8,
            boundary: 1e-9,
        }
    }

    #[test]
    fn body_excludes_timing() {
        let mut r = Report::new("estimate", snapshot());
        r.metric("theta", 2.0);
        let body = r.body_json();
        r.timing = Some(Timing { elapsed_ms: 3.5 });
        assert_eq!(r.body_json(), body);
        assert!(r.to_json().contains("elapsed_ms"));
        assert!(!body.contains("elapsed_ms"));
    }

    #[test]
    fn csv_rows() {
        let mut r = Report::new("estimate", snapshot());
        r.input("psi", "qa:id");
        r.metric("theta", 2.0);
        r.verdict("t-property", "qa:id", Verdict::Pass);
        let csv = r.to_csv();
        assert!(csv.starts_with("section,key,value\n"));
        assert!(csv.contains("input,psi,qa:id\n"));
        assert!(csv.contains("metric,theta,2.0\n"));
        assert!(csv.contains("verdict,t-property:qa:id,pass\n"));
        assert!(!r.falsified());
        r.verdict("z-property", "qa:id", Verdict::Fail);
        assert!(r.falsified());
    }
}
