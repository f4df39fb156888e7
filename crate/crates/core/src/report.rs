//! Claim records shared by every verification suite.

use serde::Serialize;
use serde_json::{json, Value};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Status {
    Pass,
    Fail,
}

impl Status {
    pub fn from_bool(ok: bool) -> Status {
        if ok {
            Status::Pass
        } else {
            Status::Fail
        }
    }
}

/// One checked statement with the values that decided it.
#[derive(Clone, Debug, Serialize)]
pub struct ClaimRecord {
    pub id: String,
    pub paper_ref: String,
    pub params: Value,
    pub status: Status,
    pub witness: Value,
}

impl ClaimRecord {
    pub fn new(id: impl Into<String>, statement: impl Into<String>, params: Value, ok: bool, witness: Value) -> Self {
        ClaimRecord {
            id: id.into(),
            paper_ref: statement.into(),
            params,
            status: Status::from_bool(ok),
            witness,
        }
    }

    pub fn passed(&self) -> bool {
        self.status == Status::Pass
    }
}

/// Per-index comparison inside a claim's witness.
#[derive(Clone, Debug, Serialize)]
pub struct WitnessEntry {
    pub l: usize,
    pub expected: String,
    pub actual: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub threshold: Option<String>,
    pub ok: bool,
}

impl WitnessEntry {
    pub fn new(l: usize, expected: impl ToString, actual: impl ToString, ok: bool) -> Self {
        WitnessEntry { l, expected: expected.to_string(), actual: actual.to_string(), threshold: None, ok }
    }

    pub fn with_threshold(mut self, threshold: impl ToString) -> Self {
        self.threshold = Some(threshold.to_string());
        self
    }
}

/// A claim whose witness is a list of per-index entries; passes iff all do.
pub fn entries_claim(id: &str, statement: &str, params: Value, entries: Vec<WitnessEntry>) -> ClaimRecord {
    let ok = entries.iter().all(|e| e.ok);
    let failures: Vec<&WitnessEntry> = entries.iter().filter(|e| !e.ok).collect();
    let witness = json!({
        "checked": entries.len(),
        "first_failure": failures.first(),
        "entries": entries,
    });
    ClaimRecord::new(id, statement, params, ok, witness)
}

#[derive(Clone, Debug, Serialize)]
pub struct Report {
    pub suite: String,
    pub config: Value,
    pub claims: Vec<ClaimRecord>,
    pub elapsed_ms: u128,
}

impl Report {
    pub fn passed(&self) -> bool {
        self.claims.iter().all(ClaimRecord::passed)
    }

    pub fn failures(&self) -> impl Iterator<Item = &ClaimRecord> {
        self.claims.iter().filter(|c| !c.passed())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn status_serializes_lowercase() {
        let c = ClaimRecord::new("x", "v(2) = 1", json!({}), true, json!(null));
        let v = serde_json::to_value(&c).unwrap();
        assert_eq!(v["status"], "pass");
        assert_eq!(v["paper_ref"], "v(2) = 1");
    }

    #[test]
    fn entries_claim_fails_on_any_entry() {
        let e = vec![WitnessEntry::new(1, "1", "1", true), WitnessEntry::new(2, "1", "2", false)];
        let c = entries_claim("y", "s", json!({}), e);
        assert!(!c.passed());
        assert_eq!(c.witness["first_failure"]["l"], 2);
    }
}
