use serde::{Deserialize, Serialize};

/// One decay-table cell: sequence index, distance of the field to its limit
/// in the scenario topology, sup distance of the initial data, and the
/// solution error in the scenario norm (zero when the scenario solves
/// nothing). `norm_kind` names the quantity the row measures.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DecayRow {
    pub n: f64,
    pub field_distance: f64,
    pub data_distance: f64,
    pub solution_error: f64,
    pub norm_kind: String,
}

/// A named pass/fail with the evidence that produced it.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Verdict {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

impl Verdict {
    pub fn new(name: impl Into<String>, passed: bool, detail: impl Into<String>) -> Self {
        Verdict {
            name: name.into(),
            passed,
            detail: detail.into(),
        }
    }
}

/// Outcome of one experiment: the decay table, the hypothesis checks the
/// scenario's claim rests on (recorded, never enforced - negative controls
/// are data), and the verdicts computed from the table.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ExperimentReport {
    pub scenario: String,
    pub hypotheses: Vec<Verdict>,
    pub rows: Vec<DecayRow>,
    pub verdicts: Vec<Verdict>,
    pub passed: bool,
}

impl ExperimentReport {
    pub fn new(scenario: impl Into<String>) -> Self {
        ExperimentReport {
            scenario: scenario.into(),
            hypotheses: Vec::new(),
            rows: Vec::new(),
            verdicts: Vec::new(),
            passed: true,
        }
    }

    pub fn push_verdict(&mut self, v: Verdict) {
        self.passed &= v.passed;
        self.verdicts.push(v);
    }

    pub fn rows_of_kind<'a>(&'a self, kind: &'a str) -> impl Iterator<Item = &'a DecayRow> {
        self.rows.iter().filter(move |r| r.norm_kind == kind)
    }
}

/// Monotone-decay verdict over a series: strictly nonincreasing and the
/// final value below `ratio` times the first.
pub fn decay_verdict(name: &str, series: &[(f64, f64)], ratio: f64) -> Verdict {
    if series.len() < 2 {
        return Verdict::new(name, false, "series too short");
    }
    let monotone = series.windows(2).all(|w| w[1].1 <= w[0].1 + 1e-15);
    let first = series[0].1;
    let last = series[series.len() - 1].1;
    let below = last <= ratio * first;
    Verdict::new(
        name,
        monotone && below,
        format!(
            "first = {first:.6e}, last = {last:.6e}, ratio = {:.3e} (target {ratio}), monotone = {monotone}",
            if first > 0.0 { last / first } else { 0.0 }
        ),
    )
}
