//! One PASS/FAIL line per acceptance criterion. Scenarios run sequentially so
//! the per-criterion wall-clock limits below are meaningful.

use lldforge::suite::{run_scenario, scenario, ScenarioResult, Verdict};

struct Criterion {
    id: u32,
    scenario: &'static str,
    /// Seconds.
    limit: Option<f64>,
    /// Metric that must equal the given value exactly.
    pinned: &'static [(&'static str, &'static str)],
    /// Metric that must be at least the given integer.
    at_least: &'static [(&'static str, u64)],
}

const CRITERIA: &[Criterion] = &[
    Criterion { id: 1, scenario: "flanders", limit: Some(30.0), pinned: &[("violations", "0")], at_least: &[("spaces", 200)] },
    Criterion { id: 2, scenario: "small-field-gate", limit: None, pinned: &[("urk", "2"), ("e_r+1_in_ker_A", "true"), ("B_e_r+1_outside_im_A", "true")], at_least: &[] },
    Criterion { id: 3, scenario: "lld2-classification", limit: Some(60.0), pinned: &[], at_least: &[("lld_spaces", 1)] },
    Criterion { id: 4, scenario: "mata4-count", limit: None, pinned: &[("dim", "6"), ("c_max", "3"), ("rank_le_3", "36"), ("oracle", "36")], at_least: &[] },
    Criterion { id: 5, scenario: "alt4-pfaffian", limit: None, pinned: &[], at_least: &[] },
    Criterion { id: 6, scenario: "rank-dichotomy", limit: None, pinned: &[], at_least: &[] },
    Criterion { id: 7, scenario: "hyperplane-mrk", limit: Some(300.0), pinned: &[], at_least: &[] },
    Criterion { id: 8, scenario: "closure-f9", limit: None, pinned: &[("dim", "6"), ("nonzero_vectors", "80")], at_least: &[] },
    Criterion { id: 9, scenario: "closure-quaternion", limit: None, pinned: &[], at_least: &[] },
    Criterion { id: 10, scenario: "rectification", limit: None, pinned: &[], at_least: &[("axes", 20)] },
    Criterion { id: 11, scenario: "jordan", limit: None, pinned: &[], at_least: &[] },
    Criterion { id: 12, scenario: "extraction", limit: Some(600.0), pinned: &[], at_least: &[] },
    Criterion { id: 13, scenario: "bounds", limit: None, pinned: &[("violations", "0")], at_least: &[("hyperplanes", 100)] },
    Criterion { id: 14, scenario: "complement", limit: None, pinned: &[], at_least: &[("instances", 100)] },
];

fn judge(c: &Criterion, r: &ScenarioResult) -> Vec<String> {
    let mut why = Vec::new();
    if r.verdict != Verdict::Pass {
        why.push(format!("verdict {}: {}", r.verdict, r.log.counterexample.as_deref().unwrap_or("-")));
    }
    if let Some(l) = c.limit {
        if r.seconds >= l {
            why.push(format!("took {:.1} s, limit {l} s", r.seconds));
        }
    }
    for (k, v) in c.pinned {
        match r.log.metric_value(k) {
            Some(got) if got == *v => {}
            got => why.push(format!("{k} = {got:?}, expected {v}")),
        }
    }
    for (k, v) in c.at_least {
        match r.log.metric_value(k).and_then(|s| s.parse::<u64>().ok()) {
            Some(got) if got >= *v => {}
            got => why.push(format!("{k} = {got:?}, expected at least {v}")),
        }
    }
    why
}

fn main() {
    let mut failed = 0;
    for c in CRITERIA {
        let s = scenario(c.scenario).expect("scenario exists");
        let r = run_scenario(s);
        let why = judge(c, &r);
        let metrics: Vec<String> = r.log.metrics.iter().map(|(k, v)| format!("{k}={v}")).collect();
        if why.is_empty() {
            println!("PASS AC{:02} {} ({:.2} s) {}", c.id, c.scenario, r.seconds, metrics.join(" "));
        } else {
            failed += 1;
            println!("FAIL AC{:02} {} ({:.2} s): {}", c.id, c.scenario, r.seconds, why.join("; "));
            for l in &r.log.transcript {
                println!("    {l}");
            }
        }
    }
    println!("{} of {} criteria pass", CRITERIA.len() - failed, CRITERIA.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
