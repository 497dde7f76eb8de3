//! Pass/fail reports shared by the condition checks and certificates.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Verdict {
    Pass,
    Fail,
    Inconclusive,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConditionEntry {
    pub id: String,
    pub verdict: Verdict,
    pub diagnostics: BTreeMap<String, f64>,
    pub description: String,
}

/// Ordered list of verdicts; each id appears once.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct ConditionReport {
    entries: Vec<ConditionEntry>,
}

impl ConditionReport {
    /// Appends an entry. Panics on a repeated id, which is a caller bug.
    pub fn push(
        &mut self,
        id: impl Into<String>,
        verdict: Verdict,
        diagnostics: Vec<(String, f64)>,
        description: impl Into<String>,
    ) {
        let id = id.into();
        assert!(self.get(&id).is_none(), "duplicate condition id {id}");
        self.entries.push(ConditionEntry {
            id,
            verdict,
            diagnostics: diagnostics.into_iter().collect(),
            description: description.into(),
        });
    }

    /// Appends all entries of another report.
    pub fn extend(&mut self, other: ConditionReport) {
        for e in other.entries {
            assert!(self.get(&e.id).is_none(), "duplicate condition id {}", e.id);
            self.entries.push(e);
        }
    }

    pub fn entries(&self) -> &[ConditionEntry] {
        &self.entries
    }

    pub fn get(&self, id: &str) -> Option<&ConditionEntry> {
        self.entries.iter().find(|e| e.id == id)
    }

    pub fn verdict(&self, id: &str) -> Option<Verdict> {
        self.get(id).map(|e| e.verdict)
    }

    pub fn all_pass(&self) -> bool {
        self.entries.iter().all(|e| e.verdict == Verdict::Pass)
    }

    pub fn diagnostic(&self, id: &str, name: &str) -> Option<f64> {
        self.get(id).and_then(|e| e.diagnostics.get(name).copied())
    }

    /// Fixed-width table for terminals.
    pub fn to_table(&self) -> String {
        let width = self.entries.iter().map(|e| e.id.len()).max().unwrap_or(2).max(2);
        let mut out = format!("{:<width$}  {:<12}  description\n", "id", "verdict");
        for e in &self.entries {
            let v = match e.verdict {
                Verdict::Pass => "PASS",
                Verdict::Fail => "FAIL",
                Verdict::Inconclusive => "INCONCLUSIVE",
            };
            out.push_str(&format!("{:<width$}  {:<12}  {}\n", e.id, v, e.description));
            for (k, x) in &e.diagnostics {
                out.push_str(&format!("{:<width$}    {k} = {x:.6e}\n", ""));
            }
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    #[should_panic(expected = "duplicate")]
    fn duplicate_ids_rejected() {
        let mut r = ConditionReport::default();
        r.push("a", Verdict::Pass, vec![], "");
        r.push("a", Verdict::Fail, vec![], "");
    }

    #[test]
    fn verdict_serializes_upper_case() {
        let mut r = ConditionReport::default();
        r.push("x", Verdict::Inconclusive, vec![("v".into(), 1.5)], "d");
        let json = serde_json::to_string(&r).unwrap();
        assert!(json.contains("\"INCONCLUSIVE\""), "{json}");
        assert!(!r.all_pass());
        assert_eq!(r.diagnostic("x", "v"), Some(1.5));
    }
}
