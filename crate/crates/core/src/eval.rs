//! Batch runs over a directory of OpenAPI documents.

use std::collections::BTreeMap;
use std::fmt::Write;
use std::io;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;

use serde::Serialize;

use crate::report::{Report, WarningKind};
use crate::{generate_from_path, GenerateOptions};

/// Skipped-operation ratio buckets, in display order.
pub const BUCKETS: [&str; 5] = ["0%", "(0,25%)", "[25,50%)", "[50,100%)", "100%"];

pub fn bucket(skipped: usize, total: usize) -> &'static str {
    if skipped == 0 || total == 0 {
        return BUCKETS[0];
    }
    if skipped >= total {
        return BUCKETS[4];
    }
    // Compare skipped/total against 1/4 and 1/2 without floating point.
    if skipped * 4 < total {
        BUCKETS[1]
    } else if skipped * 2 < total {
        BUCKETS[2]
    } else {
        BUCKETS[3]
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct RunSummary {
    pub success: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
    pub warnings: BTreeMap<String, usize>,
    pub operations_total: usize,
    pub operations_skipped: usize,
}

impl RunSummary {
    fn from_report(report: &Report) -> Self {
        let mut warnings = BTreeMap::new();
        for w in &report.warnings {
            *warnings.entry(w.kind.as_str().to_string()).or_insert(0) += 1;
        }
        RunSummary {
            success: report.is_success(),
            error: report.error.as_ref().map(|e| e.kind.as_str().to_string()),
            warnings,
            operations_total: report.stats.operations_total,
            operations_skipped: report.stats.operations_skipped,
        }
    }

    fn crashed(message: String) -> Self {
        RunSummary {
            success: false,
            error: Some(format!("Internal: {message}")),
            warnings: BTreeMap::new(),
            operations_total: 0,
            operations_skipped: 0,
        }
    }

    pub fn warning_count(&self) -> usize {
        self.warnings.values().sum()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct FileResult {
    pub file: String,
    pub non_strict: RunSummary,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub strict: Option<RunSummary>,
}

#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize)]
pub struct ModeStats {
    pub total: usize,
    pub successes: usize,
    pub errors_by_kind: BTreeMap<String, usize>,
    /// Only counted for successful runs.
    pub warnings_by_kind: BTreeMap<String, usize>,
    pub warnings_total: usize,
    /// Per successful API, the ratio of skipped operations.
    pub skipped_histogram: BTreeMap<String, usize>,
}

impl ModeStats {
    fn add(&mut self, run: &RunSummary) {
        self.total += 1;
        match &run.error {
            None if run.success => {
                self.successes += 1;
                for (kind, n) in &run.warnings {
                    *self.warnings_by_kind.entry(kind.clone()).or_insert(0) += n;
                    self.warnings_total += n;
                }
                *self
                    .skipped_histogram
                    .entry(bucket(run.operations_skipped, run.operations_total).to_string())
                    .or_insert(0) += 1;
            }
            error => {
                let kind = error.clone().unwrap_or_else(|| "Internal".into());
                *self.errors_by_kind.entry(kind).or_insert(0) += 1;
            }
        }
    }

    pub fn errors(&self) -> usize {
        self.errors_by_kind.values().sum()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct CorpusStats {
    pub non_strict: ModeStats,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub strict: Option<ModeStats>,
    pub files: Vec<FileResult>,
}

pub fn is_oas_file(path: &Path) -> bool {
    matches!(
        path.extension().and_then(|e| e.to_str()).map(str::to_ascii_lowercase).as_deref(),
        Some("json" | "yaml" | "yml")
    )
}

/// OpenAPI candidates directly inside `dir`, sorted by file name.
pub fn corpus_files(dir: &Path) -> io::Result<Vec<PathBuf>> {
    let mut files: Vec<PathBuf> = std::fs::read_dir(dir)?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.is_file() && is_oas_file(p))
        .collect();
    files.sort();
    Ok(files)
}

fn run_one(path: &Path, options: &GenerateOptions) -> RunSummary {
    let outcome = catch_unwind(AssertUnwindSafe(|| match generate_from_path(path, options) {
        Ok(generated) => RunSummary::from_report(&generated.report),
        Err(failure) => RunSummary::from_report(&failure.report),
    }));
    outcome.unwrap_or_else(|panic| {
        let message = panic
            .downcast_ref::<String>()
            .cloned()
            .or_else(|| panic.downcast_ref::<&str>().map(|s| s.to_string()))
            .unwrap_or_else(|| "generation panicked".into());
        RunSummary::crashed(message)
    })
}

/// Generate every file non-strict (and strict, if asked) with bounded
/// parallelism. Per-file failures are recorded, never propagated.
pub fn eval_corpus(dir: &Path, strict_also: bool, parallelism: usize) -> io::Result<CorpusStats> {
    let files = corpus_files(dir)?;
    let results: Mutex<Vec<Option<FileResult>>> = Mutex::new(vec![None; files.len()]);
    let next = AtomicUsize::new(0);
    let workers = parallelism.clamp(1, files.len().max(1));
    std::thread::scope(|scope| {
        for _ in 0..workers {
            scope.spawn(|| loop {
                let i = next.fetch_add(1, Ordering::SeqCst);
                let Some(path) = files.get(i) else { break };
                let non_strict = run_one(path, &GenerateOptions::default());
                let strict = strict_also.then(|| {
                    run_one(
                        path,
                        &GenerateOptions {
                            strict: true,
                            ..Default::default()
                        },
                    )
                });
                let file = path
                    .file_name()
                    .map(|n| n.to_string_lossy().into_owned())
                    .unwrap_or_default();
                results.lock().expect("results")[i] = Some(FileResult {
                    file,
                    non_strict,
                    strict,
                });
            });
        }
    });
    let files: Vec<FileResult> = results
        .into_inner()
        .expect("results")
        .into_iter()
        .flatten()
        .collect();
    let mut non_strict = ModeStats::default();
    let mut strict = strict_also.then(ModeStats::default);
    for f in &files {
        non_strict.add(&f.non_strict);
        if let (Some(stats), Some(run)) = (strict.as_mut(), &f.strict) {
            stats.add(run);
        }
    }
    Ok(CorpusStats {
        non_strict,
        strict,
        files,
    })
}

fn pct(n: usize, total: usize) -> String {
    if total == 0 {
        return format!("{n}");
    }
    format!("{n} ({:.1}%)", 100.0 * n as f64 / total as f64)
}

fn row(out: &mut String, label: &str, cells: &[String]) {
    let _ = write!(out, "{label:<24}");
    for cell in cells {
        let _ = write!(out, "{cell:>18}");
    }
    out.push('\n');
}

/// Plain-text summary: outcomes, error breakdown, warning breakdown and
/// the skipped-operation histogram.
pub fn render_table(stats: &CorpusStats) -> String {
    let modes: Vec<(&str, &ModeStats)> = std::iter::once(("non-strict", &stats.non_strict))
        .chain(stats.strict.as_ref().map(|s| ("strict", s)))
        .collect();
    let mut out = String::new();
    let header: Vec<String> = modes.iter().map(|(name, _)| name.to_string()).collect();
    row(&mut out, "Outcome", &header);
    row(&mut out, "Total", &modes.iter().map(|(_, s)| s.total.to_string()).collect::<Vec<_>>());
    row(&mut out, "Success", &modes.iter().map(|(_, s)| pct(s.successes, s.total)).collect::<Vec<_>>());
    row(&mut out, "Error", &modes.iter().map(|(_, s)| pct(s.errors(), s.total)).collect::<Vec<_>>());

    out.push('\n');
    row(&mut out, "Errors by kind", &header);
    let mut kinds: Vec<&String> = modes.iter().flat_map(|(_, s)| s.errors_by_kind.keys()).collect();
    kinds.sort();
    kinds.dedup();
    for kind in kinds {
        let cells: Vec<String> = modes
            .iter()
            .map(|(_, s)| pct(s.errors_by_kind.get(kind).copied().unwrap_or(0), s.total))
            .collect();
        row(&mut out, kind, &cells);
    }

    out.push('\n');
    row(&mut out, "Warnings (non-strict)", &["count".to_string()]);
    for kind in WarningKind::ALL {
        if kind == WarningKind::UnsupportedFeature {
            continue;
        }
        let n = stats.non_strict.warnings_by_kind.get(kind.as_str()).copied().unwrap_or(0);
        row(&mut out, kind.as_str(), &[n.to_string()]);
    }
    let extra = WarningKind::UnsupportedFeature.as_str();
    let n = stats.non_strict.warnings_by_kind.get(extra).copied().unwrap_or(0);
    row(&mut out, &format!("{extra} (extra)"), &[n.to_string()]);
    row(&mut out, "Total", &[stats.non_strict.warnings_total.to_string()]);

    out.push('\n');
    row(&mut out, "Skipped operations", &["APIs".to_string()]);
    for label in BUCKETS {
        let n = stats.non_strict.skipped_histogram.get(label).copied().unwrap_or(0);
        row(&mut out, label, &[pct(n, stats.non_strict.successes)]);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bucket_edges() {
        assert_eq!(bucket(0, 10), "0%");
        assert_eq!(bucket(0, 0), "0%");
        assert_eq!(bucket(2, 10), "(0,25%)");
        assert_eq!(bucket(1, 4), "[25,50%)");
        assert_eq!(bucket(4, 10), "[25,50%)");
        assert_eq!(bucket(1, 2), "[50,100%)");
        assert_eq!(bucket(9, 10), "[50,100%)");
        assert_eq!(bucket(10, 10), "100%");
    }

    #[test]
    fn mode_stats_accounting() {
        let mut stats = ModeStats::default();
        let ok = RunSummary {
            success: true,
            error: None,
            warnings: BTreeMap::from([("MultipleResponses".to_string(), 2)]),
            operations_total: 4,
            operations_skipped: 1,
        };
        let bad = RunSummary {
            success: false,
            error: Some("InvalidOas".into()),
            ..ok.clone()
        };
        stats.add(&ok);
        stats.add(&bad);
        assert_eq!(stats.successes + stats.errors(), stats.total);
        assert_eq!(stats.warnings_total, 2);
        assert_eq!(stats.skipped_histogram["[25,50%)"], 1);
    }
}
