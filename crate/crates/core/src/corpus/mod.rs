//! Issue data model, tracker-export ingestion, and dataset construction.
//!
//! An [`IssueRecord`] is one row of a tracker export after normalization:
//! missing numerics become zero, empty categoricals become the literal
//! category `"unknown"`, and presence-flag columns collapse to 0/1.
//! [`build_dataset`] turns labeled records into a [`Dataset`] for one of the
//! two assignment tasks, and [`stratified_split`] produces the fold plans
//! used by cross-validation.

mod ingest;
mod split;

pub use ingest::{ingest, ingest_reader, record_from_json, write_csv, IngestOutcome, RowWarning, SchemaMap};
pub use split::{stratified_indices, stratified_split, FoldPlan};

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Result, TriageError};

/// Canonical CSV headers, in column order.
pub const CANONICAL_HEADERS: [&str; 24] = [
    "id",
    "project",
    "summary",
    "description",
    "issue_type",
    "reporter",
    "priority",
    "frequency",
    "bug_category",
    "labels",
    "watchers",
    "images",
    "reopen_count",
    "reassign_count",
    "linked_issues",
    "sub_tasks",
    "components",
    "reported_by_customer",
    "tested_versions",
    "test_execution_type",
    "approval_type",
    "affects_versions",
    "assignee_role",
    "assignee_seniority",
];

/// Placeholder category stored for empty categorical cells.
pub const UNKNOWN_CATEGORY: &str = "unknown";

/// One issue from a tracker export, normalized.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IssueRecord {
    pub id: String,
    pub project: String,
    pub summary: String,
    pub description: String,
    pub issue_type: String,
    pub reporter: String,
    pub priority: String,
    pub frequency: String,
    pub bug_category: String,
    pub labels: String,
    pub watchers: u32,
    pub images: u32,
    pub reopen_count: u32,
    pub reassign_count: u32,
    pub linked_issues: u32,
    pub sub_tasks: u32,
    pub components: u32,
    pub reported_by_customer: bool,
    pub tested_versions: bool,
    pub test_execution_type: bool,
    pub approval_type: bool,
    pub affects_versions: bool,
    pub assignee_role: Option<String>,
    pub assignee_seniority: Option<String>,
}

impl Default for IssueRecord {
    fn default() -> Self {
        IssueRecord {
            id: String::new(),
            project: String::new(),
            summary: String::new(),
            description: String::new(),
            issue_type: UNKNOWN_CATEGORY.to_string(),
            reporter: UNKNOWN_CATEGORY.to_string(),
            priority: UNKNOWN_CATEGORY.to_string(),
            frequency: UNKNOWN_CATEGORY.to_string(),
            bug_category: UNKNOWN_CATEGORY.to_string(),
            labels: UNKNOWN_CATEGORY.to_string(),
            watchers: 0,
            images: 0,
            reopen_count: 0,
            reassign_count: 0,
            linked_issues: 0,
            sub_tasks: 0,
            components: 0,
            reported_by_customer: false,
            tested_versions: false,
            test_execution_type: false,
            approval_type: false,
            affects_versions: false,
            assignee_role: None,
            assignee_seniority: None,
        }
    }
}

impl IssueRecord {
    /// Issue text used for feature extraction: summary then description,
    /// single-space joined.
    pub fn combined_text(&self) -> String {
        let mut text = String::with_capacity(self.summary.len() + self.description.len() + 1);
        text.push_str(&self.summary);
        text.push(' ');
        text.push_str(&self.description);
        text
    }
}

/// The two assignment tasks.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum TaskKind {
    /// Assign an issue to a team role: Developer, Tester, Designer, Leader.
    TeamAssignment,
    /// Assign a developer issue to a seniority level: Senior, Mid, Junior.
    DeveloperAssignment,
}

impl TaskKind {
    pub fn name(&self) -> &'static str {
        match self {
            TaskKind::TeamAssignment => "team",
            TaskKind::DeveloperAssignment => "developer",
        }
    }

    pub fn parse(name: &str) -> Option<TaskKind> {
        match name.to_ascii_lowercase().as_str() {
            "team" | "ta" => Some(TaskKind::TeamAssignment),
            "developer" | "da" | "dev" => Some(TaskKind::DeveloperAssignment),
            _ => None,
        }
    }
}

/// Canonical team-role labels.
pub const ROLE_LABELS: [&str; 4] = ["Developer", "Tester", "Designer", "Leader"];
/// Canonical seniority labels.
pub const SENIORITY_LABELS: [&str; 3] = ["Senior", "Mid", "Junior"];

/// Maps a raw role cell to its canonical label. Accepts the short canonical
/// names and the long forms that appear in raw exports.
pub fn normalize_role(raw: &str) -> Option<&'static str> {
    match raw.trim().to_ascii_lowercase().as_str() {
        "developer" | "software developer" | "software engineer" => Some("Developer"),
        "tester" | "test engineer" => Some("Tester"),
        "designer" | "ui/ux designer" | "ui designer" => Some("Designer"),
        "leader" | "team leader" | "team lead" => Some("Leader"),
        _ => None,
    }
}

/// Maps a raw seniority cell to its canonical label.
pub fn normalize_seniority(raw: &str) -> Option<&'static str> {
    match raw.trim().to_ascii_lowercase().as_str() {
        "senior" => Some("Senior"),
        "mid" | "mid-level" | "middle" => Some("Mid"),
        "junior" => Some("Junior"),
        _ => None,
    }
}

/// Labeled dataset for one task.
///
/// `label_index` is a bijection from observed label categories onto
/// `0..n_classes`, with codes assigned in lexicographic category order.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Dataset {
    pub records: Vec<IssueRecord>,
    pub task: TaskKind,
    pub labels: Vec<usize>,
    pub label_index: BTreeMap<String, usize>,
}

impl Dataset {
    pub fn n_classes(&self) -> usize {
        self.label_index.len()
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    /// Label names indexed by code.
    pub fn label_names(&self) -> Vec<String> {
        let mut names = vec![String::new(); self.label_index.len()];
        for (name, &code) in &self.label_index {
            names[code] = name.clone();
        }
        names
    }
}

/// Result of [`build_dataset`]: the dataset plus non-fatal warnings.
#[derive(Debug)]
pub struct DatasetBuild {
    pub dataset: Dataset,
    pub warnings: Vec<String>,
}

/// Builds the labeled dataset for `task` from ingested records.
///
/// For [`TaskKind::DeveloperAssignment`] only records whose role is
/// Developer are retained and the label is the seniority level. Records
/// whose label does not normalize into the task's label space are dropped
/// with a warning.
pub fn build_dataset(records: &[IssueRecord], task: TaskKind) -> Result<DatasetBuild> {
    let mut warnings = Vec::new();
    let mut kept: Vec<IssueRecord> = Vec::new();
    let mut raw_labels: Vec<&'static str> = Vec::new();

    for (i, rec) in records.iter().enumerate() {
        let Some(role_raw) = rec.assignee_role.as_deref() else {
            continue;
        };
        let Some(role) = normalize_role(role_raw) else {
            warnings.push(format!("record {i}: unrecognized role '{role_raw}', dropped"));
            continue;
        };
        match task {
            TaskKind::TeamAssignment => {
                kept.push(rec.clone());
                raw_labels.push(role);
            }
            TaskKind::DeveloperAssignment => {
                if role != "Developer" {
                    continue;
                }
                let Some(seniority) = rec.assignee_seniority.as_deref().and_then(normalize_seniority)
                else {
                    warnings.push(format!(
                        "record {i}: developer row without a usable seniority label, dropped"
                    ));
                    continue;
                };
                kept.push(rec.clone());
                raw_labels.push(seniority);
            }
        }
    }

    if kept.is_empty() {
        return Err(TriageError::NoUsableRecords {
            task: task.name().to_string(),
        });
    }

    let mut distinct: Vec<&'static str> = raw_labels.clone();
    distinct.sort_unstable();
    distinct.dedup();
    let label_index: BTreeMap<String, usize> = distinct
        .iter()
        .enumerate()
        .map(|(code, name)| (name.to_string(), code))
        .collect();
    if label_index.len() == 1 {
        warnings.push(format!(
            "single class: only label '{}' is present",
            distinct[0]
        ));
    }

    let labels = raw_labels
        .iter()
        .map(|name| label_index[*name])
        .collect::<Vec<_>>();

    Ok(DatasetBuild {
        dataset: Dataset {
            records: kept,
            task,
            labels,
            label_index,
        },
        warnings,
    })
}
