//! CSV ingestion and serialization for tracker exports.
//!
//! Files are UTF-8, comma-delimited, RFC-4180 quoted, with a header row.
//! A [`SchemaMap`] renames canonical columns to whatever the export uses;
//! unmapped canonical columns that are absent from the file fall back to
//! their defaults (counts to zero, categories to `"unknown"`, flags to 0).

use std::collections::BTreeMap;
use std::fs::File;
use std::io::{Read, Write};
use std::path::Path;

use crate::corpus::{IssueRecord, CANONICAL_HEADERS, UNKNOWN_CATEGORY};
use crate::error::{Result, TriageError};

/// Canonical column name -> actual header name in the file.
pub type SchemaMap = BTreeMap<String, String>;

/// A non-fatal problem found while reading one row.
#[derive(Debug, Clone)]
pub struct RowWarning {
    /// 1-based data row index (header row excluded).
    pub row: usize,
    pub message: String,
}

/// Records plus the warning tally from one ingestion run.
#[derive(Debug)]
pub struct IngestOutcome {
    pub records: Vec<IssueRecord>,
    pub warnings: Vec<RowWarning>,
    /// Rows dropped because the assignee role cell was empty.
    pub dropped_unlabeled: usize,
}

/// Reads a tracker export from `path`.
///
/// Rows with an empty assignee-role cell are dropped. Rows with an
/// unparseable numeric cell are skipped and reported in the warning tally.
pub fn ingest(path: &Path, schema: &SchemaMap) -> Result<IngestOutcome> {
    let file = File::open(path)?;
    ingest_reader(file, schema)
}

/// [`ingest`] over any reader.
pub fn ingest_reader<R: Read>(reader: R, schema: &SchemaMap) -> Result<IngestOutcome> {
    let mut csv_reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .flexible(true)
        .from_reader(reader);

    let headers = csv_reader.headers()?.clone();
    let columns = resolve_columns(&headers, schema)?;

    let mut records = Vec::new();
    let mut warnings = Vec::new();
    let mut dropped_unlabeled = 0usize;

    for (i, row) in csv_reader.records().enumerate() {
        let row_index = i + 1;
        let row = match row {
            Ok(row) => row,
            Err(err) => {
                warnings.push(RowWarning {
                    row: row_index,
                    message: format!("unreadable row: {err}"),
                });
                continue;
            }
        };
        match parse_row(&row, &columns) {
            Ok(Some(record)) => records.push(record),
            Ok(None) => dropped_unlabeled += 1,
            Err(TriageError::MalformedRow { detail, .. }) => warnings.push(RowWarning {
                row: row_index,
                message: detail,
            }),
            Err(other) => return Err(other),
        }
    }

    Ok(IngestOutcome {
        records,
        warnings,
        dropped_unlabeled,
    })
}

/// Column index per canonical name; `None` when the column is absent and
/// was not explicitly mapped.
struct ResolvedColumns {
    index: BTreeMap<&'static str, Option<usize>>,
}

fn resolve_columns(headers: &csv::StringRecord, schema: &SchemaMap) -> Result<ResolvedColumns> {
    let position = |name: &str| headers.iter().position(|h| h == name);
    let mut index = BTreeMap::new();
    for canonical in CANONICAL_HEADERS {
        let slot = match schema.get(canonical) {
            Some(mapped) => match position(mapped) {
                Some(i) => Some(i),
                None => {
                    return Err(TriageError::MissingColumn {
                        name: mapped.clone(),
                    })
                }
            },
            None => position(canonical),
        };
        index.insert(canonical, slot);
    }
    for required in ["summary", "description", "assignee_role"] {
        if index[required].is_none() {
            return Err(TriageError::MissingColumn {
                name: required.to_string(),
            });
        }
    }
    Ok(ResolvedColumns { index })
}

impl ResolvedColumns {
    fn cell<'a>(&self, row: &'a csv::StringRecord, name: &'static str) -> &'a str {
        self.index[name]
            .and_then(|i| row.get(i))
            .unwrap_or("")
            .trim()
    }
}

/// Empty numeric cells become 0; anything that does not parse as a
/// non-negative integer (a float with zero fraction is accepted) is
/// malformed.
fn parse_count(cell: &str, column: &'static str) -> std::result::Result<u32, String> {
    if cell.is_empty() {
        return Ok(0);
    }
    if let Ok(v) = cell.parse::<u32>() {
        return Ok(v);
    }
    match cell.parse::<f64>() {
        Ok(v) if v.is_finite() && v >= 0.0 && v.fract() == 0.0 && v <= u32::MAX as f64 => {
            Ok(v as u32)
        }
        _ => Err(format!("unparseable numeric '{cell}' in column {column}")),
    }
}

/// Presence flags record only whether a value exists in the cell.
fn parse_presence(cell: &str) -> bool {
    if cell.is_empty() {
        return false;
    }
    !matches!(cell.to_ascii_lowercase().as_str(), "0" | "false" | "no")
}

fn parse_category(cell: &str) -> String {
    if cell.is_empty() {
        UNKNOWN_CATEGORY.to_string()
    } else {
        cell.to_string()
    }
}

/// Returns `Ok(None)` for rows dropped because the role cell is empty.
fn parse_row(row: &csv::StringRecord, columns: &ResolvedColumns) -> Result<Option<IssueRecord>> {
    let role_cell = columns.cell(row, "assignee_role");
    if role_cell.is_empty() {
        return Ok(None);
    }

    let mut counts = [0u32; 7];
    for (slot, column) in [
        "watchers",
        "images",
        "reopen_count",
        "reassign_count",
        "linked_issues",
        "sub_tasks",
        "components",
    ]
    .into_iter()
    .enumerate()
    {
        counts[slot] = parse_count(columns.cell(row, column), column).map_err(|detail| {
            TriageError::MalformedRow { row: 0, detail }
        })?;
    }

    let role = role_cell.to_string();
    // Seniority is meaningful only for developer rows.
    let seniority_cell = columns.cell(row, "assignee_seniority");
    let seniority = if seniority_cell.is_empty() {
        None
    } else if super::normalize_role(&role) == Some("Developer") {
        Some(seniority_cell.to_string())
    } else {
        None
    };

    Ok(Some(IssueRecord {
        id: columns.cell(row, "id").to_string(),
        project: columns.cell(row, "project").to_string(),
        summary: columns.cell(row, "summary").to_string(),
        description: columns.cell(row, "description").to_string(),
        issue_type: parse_category(columns.cell(row, "issue_type")),
        reporter: parse_category(columns.cell(row, "reporter")),
        priority: parse_category(columns.cell(row, "priority")),
        frequency: parse_category(columns.cell(row, "frequency")),
        bug_category: parse_category(columns.cell(row, "bug_category")),
        labels: parse_category(columns.cell(row, "labels")),
        watchers: counts[0],
        images: counts[1],
        reopen_count: counts[2],
        reassign_count: counts[3],
        linked_issues: counts[4],
        sub_tasks: counts[5],
        components: counts[6],
        reported_by_customer: parse_presence(columns.cell(row, "reported_by_customer")),
        tested_versions: parse_presence(columns.cell(row, "tested_versions")),
        test_execution_type: parse_presence(columns.cell(row, "test_execution_type")),
        approval_type: parse_presence(columns.cell(row, "approval_type")),
        affects_versions: parse_presence(columns.cell(row, "affects_versions")),
        assignee_role: Some(role),
        assignee_seniority: seniority,
    }))
}

/// Writes records as canonical CSV. Ingesting the output yields
/// field-equal records.
pub fn write_csv<W: Write>(records: &[IssueRecord], writer: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    w.write_record(CANONICAL_HEADERS)?;
    let flag = |b: bool| if b { "1" } else { "0" };
    for r in records {
        w.write_record([
            r.id.as_str(),
            r.project.as_str(),
            r.summary.as_str(),
            r.description.as_str(),
            r.issue_type.as_str(),
            r.reporter.as_str(),
            r.priority.as_str(),
            r.frequency.as_str(),
            r.bug_category.as_str(),
            r.labels.as_str(),
            &r.watchers.to_string(),
            &r.images.to_string(),
            &r.reopen_count.to_string(),
            &r.reassign_count.to_string(),
            &r.linked_issues.to_string(),
            &r.sub_tasks.to_string(),
            &r.components.to_string(),
            flag(r.reported_by_customer),
            flag(r.tested_versions),
            flag(r.test_execution_type),
            flag(r.approval_type),
            flag(r.affects_versions),
            r.assignee_role.as_deref().unwrap_or(""),
            r.assignee_seniority.as_deref().unwrap_or(""),
        ])?;
    }
    w.flush()?;
    Ok(())
}

/// Builds a record from a JSON issue document using the canonical field
/// names. Missing optional fields default exactly as in CSV ingestion;
/// `summary` and `description` are required.
pub fn record_from_json(value: &serde_json::Value) -> Result<IssueRecord> {
    let obj = value
        .as_object()
        .ok_or_else(|| TriageError::Invalid("issue document must be a JSON object".into()))?;
    for required in ["summary", "description"] {
        if !obj.contains_key(required) {
            return Err(TriageError::MissingRequiredField {
                name: required.to_string(),
            });
        }
    }

    let text = |name: &str| -> String {
        match obj.get(name) {
            Some(serde_json::Value::String(s)) => s.trim().to_string(),
            Some(serde_json::Value::Number(n)) => n.to_string(),
            Some(serde_json::Value::Bool(b)) => b.to_string(),
            _ => String::new(),
        }
    };
    let count = |name: &'static str| -> Result<u32> {
        match obj.get(name) {
            None | Some(serde_json::Value::Null) => Ok(0),
            Some(serde_json::Value::Number(n)) => {
                let v = n.as_f64().unwrap_or(-1.0);
                parse_count(&format!("{v}"), name)
                    .map_err(|detail| TriageError::MalformedRow { row: 0, detail })
            }
            Some(serde_json::Value::String(s)) => parse_count(s.trim(), name)
                .map_err(|detail| TriageError::MalformedRow { row: 0, detail }),
            Some(other) => Err(TriageError::MalformedRow {
                row: 0,
                detail: format!("unparseable numeric {other} in column {name}"),
            }),
        }
    };
    let presence = |name: &str| -> bool {
        match obj.get(name) {
            Some(serde_json::Value::Bool(b)) => *b,
            Some(serde_json::Value::String(s)) => parse_presence(s.trim()),
            Some(serde_json::Value::Number(n)) => n.as_f64() != Some(0.0),
            _ => false,
        }
    };
    let category = |name: &str| parse_category(text(name).trim());

    let role_raw = text("assignee_role");
    let role = if role_raw.is_empty() { None } else { Some(role_raw) };
    let seniority_raw = text("assignee_seniority");
    let seniority = match (&role, seniority_raw.is_empty()) {
        (Some(r), false) if super::normalize_role(r) == Some("Developer") => Some(seniority_raw),
        _ => None,
    };

    Ok(IssueRecord {
        id: text("id"),
        project: text("project"),
        summary: text("summary"),
        description: text("description"),
        issue_type: category("issue_type"),
        reporter: category("reporter"),
        priority: category("priority"),
        frequency: category("frequency"),
        bug_category: category("bug_category"),
        labels: category("labels"),
        watchers: count("watchers")?,
        images: count("images")?,
        reopen_count: count("reopen_count")?,
        reassign_count: count("reassign_count")?,
        linked_issues: count("linked_issues")?,
        sub_tasks: count("sub_tasks")?,
        components: count("components")?,
        reported_by_customer: presence("reported_by_customer"),
        tested_versions: presence("tested_versions"),
        test_execution_type: presence("test_execution_type"),
        approval_type: presence("approval_type"),
        affects_versions: presence("affects_versions"),
        assignee_role: role,
        assignee_seniority: seniority,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn csv_bytes(body: &str) -> Vec<u8> {
        body.as_bytes().to_vec()
    }

    fn minimal_header() -> String {
        CANONICAL_HEADERS.join(",")
    }

    #[test]
    fn header_only_file_yields_no_records() {
        let data = csv_bytes(&minimal_header());
        let out = ingest_reader(&data[..], &SchemaMap::new()).unwrap();
        assert!(out.records.is_empty());
        assert!(out.warnings.is_empty());
    }

    #[test]
    fn blank_watchers_cell_becomes_zero() {
        let data = format!(
            "{}\nI-1,P1,title,body,Bug,alice,High,always,General,Admin,,0,0,0,0,0,0,,,,,,Developer,Mid\n",
            minimal_header()
        );
        let out = ingest_reader(data.as_bytes(), &SchemaMap::new()).unwrap();
        assert_eq!(out.records.len(), 1);
        assert_eq!(out.records[0].watchers, 0);
    }

    #[test]
    fn empty_role_rows_are_dropped() {
        let data = format!(
            "{h}\nI-1,P1,a,b,Bug,alice,High,always,General,Admin,1,0,0,0,0,0,0,,,,,,Developer,Mid\nI-2,P1,c,d,Bug,bob,Low,always,General,Admin,1,0,0,0,0,0,0,,,,,,,\n",
            h = minimal_header()
        );
        let out = ingest_reader(data.as_bytes(), &SchemaMap::new()).unwrap();
        assert_eq!(out.records.len(), 1);
        assert_eq!(out.dropped_unlabeled, 1);
    }

    #[test]
    fn malformed_numeric_skips_row_with_warning() {
        let data = format!(
            "{h}\nI-1,P1,a,b,Bug,alice,High,always,General,Admin,abc,0,0,0,0,0,0,,,,,,Developer,Mid\nI-2,P1,c,d,Bug,bob,Low,always,General,Admin,2,0,0,0,0,0,0,,,,,,Tester,\n",
            h = minimal_header()
        );
        let out = ingest_reader(data.as_bytes(), &SchemaMap::new()).unwrap();
        assert_eq!(out.records.len(), 1);
        assert_eq!(out.warnings.len(), 1);
        assert_eq!(out.warnings[0].row, 1);
        assert!(out.warnings[0].message.contains("watchers"));
    }

    #[test]
    fn schema_map_renames_headers() {
        let data = "Key,Summary Text,Body,Role\nI-1,hello,world,Tester\n";
        let mut schema = SchemaMap::new();
        schema.insert("id".into(), "Key".into());
        schema.insert("summary".into(), "Summary Text".into());
        schema.insert("description".into(), "Body".into());
        schema.insert("assignee_role".into(), "Role".into());
        let out = ingest_reader(data.as_bytes(), &schema).unwrap();
        assert_eq!(out.records.len(), 1);
        assert_eq!(out.records[0].summary, "hello");
        assert_eq!(out.records[0].issue_type, UNKNOWN_CATEGORY);
    }

    #[test]
    fn schema_naming_absent_header_is_an_error() {
        let data = "summary,description,assignee_role\na,b,Tester\n";
        let mut schema = SchemaMap::new();
        schema.insert("watchers".into(), "Watcher Count".into());
        let err = ingest_reader(data.as_bytes(), &schema).unwrap_err();
        assert!(matches!(err, TriageError::MissingColumn { name } if name == "Watcher Count"));
    }

    #[test]
    fn missing_required_column_is_an_error() {
        let data = "summary,assignee_role\na,Tester\n";
        let err = ingest_reader(data.as_bytes(), &SchemaMap::new()).unwrap_err();
        assert!(matches!(err, TriageError::MissingColumn { name } if name == "description"));
    }

    #[test]
    fn float_formatted_counts_parse() {
        assert_eq!(parse_count("3.0", "watchers").unwrap(), 3);
        assert!(parse_count("3.5", "watchers").is_err());
        assert!(parse_count("-1", "watchers").is_err());
        assert!(parse_count("1e999", "watchers").is_err());
    }

    #[test]
    fn seniority_cleared_for_non_developers() {
        let data = format!(
            "{h}\nI-1,P1,a,b,Bug,alice,High,always,General,Admin,1,0,0,0,0,0,0,,,,,,Tester,Senior\n",
            h = minimal_header()
        );
        let out = ingest_reader(data.as_bytes(), &SchemaMap::new()).unwrap();
        assert_eq!(out.records[0].assignee_seniority, None);
    }

    #[test]
    fn csv_round_trip_is_field_equal() {
        let records = vec![
            IssueRecord {
                id: "I-1".into(),
                project: "P1".into(),
                summary: "Server v1.0.9 Test Request".into(),
                description: "Please, test \"it\".".into(),
                issue_type: "Test Request".into(),
                watchers: 3,
                tested_versions: true,
                assignee_role: Some("Tester".into()),
                ..IssueRecord::default()
            },
            IssueRecord {
                id: "I-2".into(),
                summary: "a, b".into(),
                description: "multi\nline".into(),
                assignee_role: Some("Developer".into()),
                assignee_seniority: Some("Senior".into()),
                ..IssueRecord::default()
            },
        ];
        let mut buf = Vec::new();
        write_csv(&records, &mut buf).unwrap();
        let out = ingest_reader(&buf[..], &SchemaMap::new()).unwrap();
        assert_eq!(out.records, records);
    }

    #[test]
    fn json_issue_document_defaults() {
        let value: serde_json::Value = serde_json::from_str(
            r#"{"summary": "Login icon broken", "description": "", "watchers": 2, "tested_versions": "ProjectName 9.4.x"}"#,
        )
        .unwrap();
        let rec = record_from_json(&value).unwrap();
        assert_eq!(rec.watchers, 2);
        assert_eq!(rec.description, "");
        assert!(rec.tested_versions);
        assert_eq!(rec.issue_type, UNKNOWN_CATEGORY);

        let missing: serde_json::Value = serde_json::from_str(r#"{"summary": "x"}"#).unwrap();
        assert!(matches!(
            record_from_json(&missing).unwrap_err(),
            TriageError::MissingRequiredField { name } if name == "description"
        ));
    }
}
