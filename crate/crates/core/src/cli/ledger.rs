use std::collections::BTreeMap;

use serde::Serialize;
use serde_json::Value;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Status {
    Pass,
    Fail,
    /// The computed result disagrees with a stated closed form; informational.
    Erratum,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct LedgerEntry {
    pub name: String,
    pub status: Status,
    pub details: String,
}

/// Append-only record of one verification run.
#[derive(Clone, Debug, Default, Serialize)]
pub struct VerificationLedger {
    entries: Vec<LedgerEntry>,
    constants: BTreeMap<String, Value>,
}

impl VerificationLedger {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn push(&mut self, name: impl Into<String>, status: Status, details: impl Into<String>) {
        self.entries.push(LedgerEntry {
            name: name.into(),
            status,
            details: details.into(),
        });
    }

    pub fn pass(&mut self, name: &str, details: impl Into<String>) {
        self.push(name, Status::Pass, details);
    }

    pub fn fail(&mut self, name: &str, details: impl Into<String>) {
        self.push(name, Status::Fail, details);
    }

    pub fn erratum(&mut self, name: &str, details: impl Into<String>) {
        self.push(name, Status::Erratum, details);
    }

    pub fn constant(&mut self, key: &str, value: impl Into<Value>) {
        self.constants.insert(key.to_string(), value.into());
    }

    pub fn entries(&self) -> &[LedgerEntry] {
        &self.entries
    }

    pub fn constants(&self) -> &BTreeMap<String, Value> {
        &self.constants
    }

    pub fn first_failure(&self) -> Option<&LedgerEntry> {
        self.entries.iter().find(|e| e.status == Status::Fail)
    }

    pub fn passed(&self) -> bool {
        self.first_failure().is_none()
    }

    pub fn to_csv(&self) -> String {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(["name", "status", "details"]).expect("in-memory csv");
        for e in &self.entries {
            let status = serde_json::to_value(e.status).expect("status serializes");
            w.write_record([e.name.as_str(), status.as_str().unwrap_or(""), e.details.as_str()])
                .expect("in-memory csv");
        }
        String::from_utf8(w.into_inner().expect("in-memory csv")).expect("utf8 csv")
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for e in &self.entries {
            let tag = match e.status {
                Status::Pass => "PASS",
                Status::Fail => "FAIL",
                Status::Erratum => "ERRATUM",
            };
            out.push_str(&format!("[{tag}] {}: {}\n", e.name, e.details));
        }
        for (k, v) in &self.constants {
            out.push_str(&format!("{k} = {v}\n"));
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn append_only_and_failure_lookup() {
        let mut l = VerificationLedger::new();
        l.pass("eigen", "ok");
        l.erratum("eigen/sign", "computed -1");
        assert!(l.passed());
        l.fail("lowering", "n=3");
        assert_eq!(l.entries().len(), 3);
        assert_eq!(l.first_failure().unwrap().name, "lowering");
        assert!(l.to_csv().starts_with("name,status,details\neigen,pass,ok\n"));
        assert!(l.to_text().contains("[ERRATUM] eigen/sign"));
    }
}
