//! Machine-readable verification reports.
//!
//! ```json
//! {
//!   "definition": "alice",
//!   "modulus": 5,
//!   "batch_len": null,
//!   "variant": "shipped",
//!   "passed": true,
//!   "cells_checked": 5000,
//!   "counterexample": null,
//!   "tables": [{"event": "...", "outcome": ["c1", "c2"], "entries": [{"value": [1, 2], "probability": "1/25"}]}]
//! }
//! ```
//!
//! Probabilities are exact fractions rendered as `"num/den"` strings.

use blindpad_core::verifier::{Probability, VerificationReport};
use serde_json::{json, Map, Value};

fn fraction(p: &Probability) -> String {
    format!("{}/{}", p.numer(), p.denom())
}

pub fn to_json(report: &VerificationReport) -> Value {
    let counterexample = report.counterexample().map(|cx| {
        let assignment: Map<String, Value> = cx.assignment.iter().map(|(k, v)| (k.clone(), json!(v))).collect();
        json!({
            "clause": cx.clause.to_string(),
            "assignment": assignment,
            "left": fraction(&cx.left),
            "right": fraction(&cx.right),
            "rechecked": report.recheck(),
        })
    });
    let tables: Vec<Value> = report
        .tables()
        .iter()
        .map(|t| {
            let entries: Vec<Value> = t
                .entries()
                .iter()
                .map(|(value, pr)| json!({"value": value, "probability": fraction(pr)}))
                .collect();
            json!({"event": t.event(), "outcome": t.outcome_labels(), "entries": entries})
        })
        .collect();
    json!({
        "definition": report.definition().cli_name(),
        "modulus": report.modulus(),
        "batch_len": report.batch_len(),
        "variant": report.variant().cli_name(),
        "passed": report.passed(),
        "cells_checked": report.cells_checked(),
        "counterexample": counterexample,
        "tables": tables,
    })
}
