//! Generation report: the warning taxonomy, strict/non-strict handling and
//! the JSON document handed to developers after a run.

use std::collections::BTreeSet;
use std::fmt;

use serde::Serialize;

use crate::error::{ErrorKind, GenerateError};

/// Closed set of mitigations the generator may apply in non-strict mode.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub enum WarningKind {
    /// The operation has no success response (or payload) schema; it is skipped.
    MissingResponseSchema,
    /// Several 2xx responses carry a schema; the lowest status code wins.
    MultipleResponses,
    /// A schema lacks a type or is incomplete; it is exposed as `String`.
    InvalidSchemaType,
    /// A schema declares a type with no GraphQL counterpart; it is exposed as `String`.
    UnknownSchemaType,
    /// A construct outside the supported subset was ignored.
    UnsupportedFeature,
}

impl WarningKind {
    pub const ALL: [WarningKind; 5] = [
        WarningKind::MissingResponseSchema,
        WarningKind::MultipleResponses,
        WarningKind::InvalidSchemaType,
        WarningKind::UnknownSchemaType,
        WarningKind::UnsupportedFeature,
    ];

    pub fn as_str(&self) -> &'static str {
        match self {
            WarningKind::MissingResponseSchema => "MissingResponseSchema",
            WarningKind::MultipleResponses => "MultipleResponses",
            WarningKind::InvalidSchemaType => "InvalidSchemaType",
            WarningKind::UnknownSchemaType => "UnknownSchemaType",
            WarningKind::UnsupportedFeature => "UnsupportedFeature",
        }
    }

    pub fn parse(text: &str) -> Option<WarningKind> {
        WarningKind::ALL.into_iter().find(|k| k.as_str() == text)
    }
}

impl fmt::Display for WarningKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Mode {
    Strict,
    #[default]
    NonStrict,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Outcome {
    Success,
    Error,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct WarningRecord {
    pub kind: WarningKind,
    /// JSON pointer into the (normalized) document.
    pub location: String,
    pub message: String,
    pub mitigation: String,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ReportError {
    pub kind: ErrorKind,
    pub message: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub location: Option<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
pub struct Stats {
    pub operations_total: usize,
    pub operations_skipped: usize,
    pub types_created: usize,
    pub links_attached: usize,
    pub viewers_created: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Report {
    pub source: String,
    pub mode: Mode,
    pub outcome: Outcome,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<ReportError>,
    pub warnings: Vec<WarningRecord>,
    /// Informational messages that are not mitigations (never fatal).
    pub notes: Vec<String>,
    pub stats: Stats,
    #[serde(skip)]
    seen: BTreeSet<(WarningKind, String)>,
}

impl Report {
    pub fn new(source: impl Into<String>, mode: Mode) -> Self {
        Report {
            source: source.into(),
            mode,
            outcome: Outcome::Success,
            error: None,
            warnings: Vec::new(),
            notes: Vec::new(),
            stats: Stats::default(),
            seen: BTreeSet::new(),
        }
    }

    /// Record a mitigation. In strict mode the cause is returned as an error
    /// instead and nothing is appended.
    ///
    /// The same (kind, location) pair is only recorded once; schemas shared
    /// between an input and an output type are visited twice.
    pub fn record_warning(
        &mut self,
        kind: WarningKind,
        location: impl Into<String>,
        message: impl Into<String>,
        mitigation: impl Into<String>,
    ) -> Result<(), GenerateError> {
        let location = location.into();
        let message = message.into();
        if self.mode == Mode::Strict {
            return Err(GenerateError::new(ErrorKind::Strict(kind), message).at(location));
        }
        if self.seen.insert((kind, location.clone())) {
            self.warnings.push(WarningRecord {
                kind,
                location,
                message,
                mitigation: mitigation.into(),
            });
        }
        Ok(())
    }

    pub fn note(&mut self, text: impl Into<String>) {
        self.notes.push(text.into());
    }

    pub fn fail(&mut self, err: &GenerateError) {
        self.outcome = Outcome::Error;
        self.error = Some(ReportError {
            kind: err.kind,
            message: err.message.clone(),
            location: err.location.clone(),
        });
    }

    pub fn count(&self, kind: WarningKind) -> usize {
        self.warnings.iter().filter(|w| w.kind == kind).count()
    }

    pub fn is_success(&self) -> bool {
        self.outcome == Outcome::Success
    }
}

/// Serialize a report as pretty JSON. Field order is fixed by the struct
/// layout, so identical runs give byte-identical output.
pub fn finalize_report(report: &Report) -> String {
    serde_json::to_string_pretty(report).expect("report serializes")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn clean_run_has_no_warnings() {
        let report = Report::new("a.json", Mode::NonStrict);
        let json: serde_json::Value = serde_json::from_str(&finalize_report(&report)).unwrap();
        assert_eq!(json["outcome"], "success");
        assert_eq!(json["warnings"], serde_json::json!([]));
        assert!(json.get("error").is_none());
        assert_eq!(json["stats"]["operations_total"], 0);
    }

    #[test]
    fn non_strict_appends_and_dedupes() {
        let mut report = Report::new("a.json", Mode::NonStrict);
        report
            .record_warning(WarningKind::MultipleResponses, "/paths/~1a/get", "m", "chose 200")
            .unwrap();
        report
            .record_warning(WarningKind::MultipleResponses, "/paths/~1a/get", "m", "chose 200")
            .unwrap();
        report
            .record_warning(WarningKind::InvalidSchemaType, "/paths/~1b/get", "m", "String")
            .unwrap();
        assert_eq!(report.warnings.len(), 2);
        let json: serde_json::Value = serde_json::from_str(&finalize_report(&report)).unwrap();
        assert_eq!(json["warnings"][0]["kind"], "MultipleResponses");
        assert_eq!(json["warnings"][1]["location"], "/paths/~1b/get");
    }

    #[test]
    fn strict_aborts_with_the_same_cause() {
        let mut report = Report::new("a.json", Mode::Strict);
        let err = report
            .record_warning(WarningKind::MissingResponseSchema, "/paths/~1a/get", "no schema", "skip")
            .unwrap_err();
        assert_eq!(err.kind, ErrorKind::Strict(WarningKind::MissingResponseSchema));
        assert_eq!(err.location.as_deref(), Some("/paths/~1a/get"));
        assert!(report.warnings.is_empty());
        report.fail(&err);
        let json: serde_json::Value = serde_json::from_str(&finalize_report(&report)).unwrap();
        assert_eq!(json["outcome"], "error");
        assert_eq!(json["error"]["kind"], "MissingResponseSchema");
    }

    #[test]
    fn finalize_is_deterministic() {
        let mut report = Report::new("x.yaml", Mode::NonStrict);
        report
            .record_warning(WarningKind::UnknownSchemaType, "/a", "file", "String")
            .unwrap();
        assert_eq!(finalize_report(&report), finalize_report(&report.clone()));
    }
}
