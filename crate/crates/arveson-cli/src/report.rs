//! Machine-readable reports: every verdict is traceable to a residual and
//! a threshold, and report bytes are deterministic for a fixed input and
//! seed.

use serde::Serialize;

pub const SCHEMA: &str = "arveson-report/v1";

#[derive(Serialize, Clone, Debug, PartialEq, Eq)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Pass,
    Fail,
    Inconclusive,
    Info,
}

#[derive(Serialize, Clone, Debug)]
pub struct CheckEntry {
    pub name: String,
    pub residual: f64,
    pub threshold: f64,
    pub verdict: Verdict,
}

impl CheckEntry {
    pub fn gated(name: &str, residual: f64, threshold: f64) -> Self {
        CheckEntry {
            name: name.to_string(),
            residual,
            threshold,
            verdict: if residual <= threshold {
                Verdict::Pass
            } else {
                Verdict::Fail
            },
        }
    }

    pub fn info(name: &str, value: f64) -> Self {
        CheckEntry {
            name: name.to_string(),
            residual: value,
            threshold: f64::INFINITY,
            verdict: Verdict::Info,
        }
    }

    pub fn inconclusive(name: &str, residual: f64, threshold: f64) -> Self {
        CheckEntry {
            name: name.to_string(),
            residual,
            threshold,
            verdict: Verdict::Inconclusive,
        }
    }
}

#[derive(Serialize, Clone, Debug)]
pub struct Report {
    pub schema: &'static str,
    pub command: String,
    pub input_digest: String,
    pub seed: u64,
    pub tol: f64,
    pub checks: Vec<CheckEntry>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub artifacts: Option<serde_json::Value>,
}

impl Report {
    pub fn new(command: String, input_digest: String, seed: u64, tol: f64) -> Self {
        Report {
            schema: SCHEMA,
            command,
            input_digest,
            seed,
            tol,
            checks: Vec::new(),
            artifacts: None,
        }
    }

    pub fn push(&mut self, entry: CheckEntry) {
        self.checks.push(entry);
    }

    pub fn verdict_of(&self, name: &str) -> Option<&Verdict> {
        self.checks
            .iter()
            .find(|c| c.name == name)
            .map(|c| &c.verdict)
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        out.push_str(&format!("# {}\n", self.command));
        out.push_str(&format!("input: {}\n", self.input_digest));
        out.push_str(&format!("seed: {}  tol: {:e}\n", self.seed, self.tol));
        let width = self
            .checks
            .iter()
            .map(|c| c.name.len())
            .max()
            .unwrap_or(0);
        for c in &self.checks {
            let mark = match c.verdict {
                Verdict::Pass => "pass",
                Verdict::Fail => "FAIL",
                Verdict::Inconclusive => "inconclusive",
                Verdict::Info => "info",
            };
            if matches!(c.verdict, Verdict::Info) {
                out.push_str(&format!(
                    "{:width$}  {:>12}  value {:.6e}\n",
                    c.name,
                    mark,
                    c.residual,
                    width = width
                ));
            } else {
                out.push_str(&format!(
                    "{:width$}  {:>12}  residual {:.6e}  threshold {:.6e}\n",
                    c.name,
                    mark,
                    c.residual,
                    c.threshold,
                    width = width
                ));
            }
        }
        out
    }
}

/// Exit status per the contract: 0 pass, 1 check failed, 2 input error,
/// 3 inconclusive.
pub fn exit_code(report: &Report, required: &[String]) -> i32 {
    let mut inconclusive = false;
    for name in required {
        match report.verdict_of(name) {
            Some(Verdict::Fail) => return 1,
            Some(Verdict::Inconclusive) => inconclusive = true,
            Some(_) => {}
            None => return 2,
        }
    }
    if inconclusive {
        3
    } else {
        0
    }
}
