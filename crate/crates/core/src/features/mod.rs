//! Feature extraction: the curated feature vector plus BoW/TF-IDF baselines.
//!
//! The curated vector has a fixed 39-column layout:
//!
//! - `FJN1..FJN7` tracker counts (watchers, images, reopen, reassign,
//!   linked issues, sub-tasks, components)
//! - `FJB1..FJB5` presence flags (reported-by-customer, tested versions,
//!   test execution type, approval type, affects versions)
//! - `FJC1..FJC6` label-encoded categories (issue type, reporter, priority,
//!   frequency, bug category, labels)
//! - `FTN1..FTN4` text numerics (summary words, description words,
//!   polarity, subjectivity)
//! - `FTNP_<Tag>` one POS-tag count per tag
//! - `FTB1..FTB6` keyword booleans (bug, test, document, design words,
//!   necessity verb, negative verb)

mod matrix;
mod pipeline;
mod vectorize;

pub use matrix::{FeatureKind, FeatureMatrix, RowEntries};
pub use pipeline::{FeatureConfig, FeatureMode, FittedPipeline, PipelineSpec, SavedPipeline, TextResources};
pub use vectorize::{bow_transform, fit_vocabulary, ngrams, tfidf_transform, NgramMode, Vocabulary};

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::corpus::IssueRecord;
use crate::error::{Result, TriageError};
use crate::scalar::Scalar;
use crate::textprep::{normalize_tokenize, pos_tag, sentiment, PosTag, SentimentLexicon, Tagger};

/// Keyword lists behind the FTB boolean features.
///
/// Entries are lowercase. An entry starting with `-` matches token
/// suffixes, and a `@verb` suffix restricts the entry to verb-tagged
/// tokens (used for agglutinative negation suffixes).
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct KeywordRuleSet {
    pub bug_words: Vec<String>,
    pub test_words: Vec<String>,
    pub document_words: Vec<String>,
    pub design_words: Vec<String>,
    pub necessity_rule: Vec<String>,
    pub negation_rule: Vec<String>,
}

impl KeywordRuleSet {
    /// Parses the sectioned `key=comma-list` rules format.
    pub fn parse(text: &str) -> Result<Self> {
        let mut rules = KeywordRuleSet {
            bug_words: Vec::new(),
            test_words: Vec::new(),
            document_words: Vec::new(),
            design_words: Vec::new(),
            necessity_rule: Vec::new(),
            negation_rule: Vec::new(),
        };
        for (i, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let Some((key, list)) = line.split_once('=') else {
                return Err(TriageError::Invalid(format!(
                    "rules line {}: expected 'key=word,word,...'",
                    i + 1
                )));
            };
            let words: Vec<String> = list
                .split(',')
                .map(|w| w.trim().to_lowercase())
                .filter(|w| !w.is_empty())
                .collect();
            match key.trim() {
                "bug_words" => rules.bug_words = words,
                "test_words" => rules.test_words = words,
                "document_words" => rules.document_words = words,
                "design_words" => rules.design_words = words,
                "necessity_rule" => rules.necessity_rule = words,
                "negation_rule" => rules.negation_rule = words,
                other => {
                    return Err(TriageError::Invalid(format!(
                        "rules line {}: unknown key '{other}'",
                        i + 1
                    )))
                }
            }
        }
        Ok(rules)
    }

    /// Bundled English rule set.
    pub fn bundled_english() -> Self {
        Self::parse(include_str!("../../data/keyword_rules_en.txt"))
            .expect("bundled keyword rules parse")
    }
}

/// Whether a marker entry fires on a tagged token.
fn marker_fires(entry: &str, token: &str, tag: PosTag) -> bool {
    let (pattern, verb_only) = match entry.split_once('@') {
        Some((p, "verb")) => (p, true),
        _ => (entry, false),
    };
    if verb_only && tag != PosTag::Verb {
        return false;
    }
    match pattern.strip_prefix('-') {
        Some(suffix) => token.ends_with(suffix),
        None => token == pattern,
    }
}

/// Label encoder for one categorical column.
///
/// Codes follow lexicographic category order. Unseen categories at predict
/// time map to the code of `"unknown"` when it was observed during
/// training, otherwise to the reserved code `len()`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CategoryEncoder {
    map: BTreeMap<String, usize>,
}

impl CategoryEncoder {
    pub fn fit<'a>(values: impl Iterator<Item = &'a str>) -> Self {
        let mut distinct: Vec<&str> = values.collect();
        distinct.sort_unstable();
        distinct.dedup();
        CategoryEncoder {
            map: distinct
                .into_iter()
                .enumerate()
                .map(|(code, v)| (v.to_string(), code))
                .collect(),
        }
    }

    pub fn encode(&self, value: &str) -> usize {
        if let Some(&code) = self.map.get(value) {
            return code;
        }
        self.map
            .get(crate::corpus::UNKNOWN_CATEGORY)
            .copied()
            .unwrap_or(self.map.len())
    }

    pub fn len(&self) -> usize {
        self.map.len()
    }

    pub fn is_empty(&self) -> bool {
        self.map.is_empty()
    }
}

/// Per-FJC-column label encoders, fitted on training records only.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CuratedEncoders {
    pub issue_type: CategoryEncoder,
    pub reporter: CategoryEncoder,
    pub priority: CategoryEncoder,
    pub frequency: CategoryEncoder,
    pub bug_category: CategoryEncoder,
    pub labels: CategoryEncoder,
}

impl CuratedEncoders {
    pub fn fit<'a>(records: impl Iterator<Item = &'a IssueRecord> + Clone) -> Self {
        CuratedEncoders {
            issue_type: CategoryEncoder::fit(records.clone().map(|r| r.issue_type.as_str())),
            reporter: CategoryEncoder::fit(records.clone().map(|r| r.reporter.as_str())),
            priority: CategoryEncoder::fit(records.clone().map(|r| r.priority.as_str())),
            frequency: CategoryEncoder::fit(records.clone().map(|r| r.frequency.as_str())),
            bug_category: CategoryEncoder::fit(records.clone().map(|r| r.bug_category.as_str())),
            labels: CategoryEncoder::fit(records.map(|r| r.labels.as_str())),
        }
    }
}

/// The curated feature vector of one issue.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CuratedFeatureVector {
    /// FJN1..FJN7.
    pub counts: [u32; 7],
    /// FJB1..FJB5.
    pub presence: [bool; 5],
    /// FJC1..FJC6 label codes.
    pub categories: [usize; 6],
    /// FTN1: summary word count.
    pub summary_words: u32,
    /// FTN2: description word count.
    pub description_words: u32,
    /// FTN3 in [-1, 1].
    pub polarity: f64,
    /// FTN4 in [0, 1].
    pub subjectivity: f64,
    /// FTNP: one slot per tag in [`PosTag::ALL`] order; slots sum to the
    /// combined-text token count.
    pub pos_counts: [u32; 11],
    /// FTB1..FTB6.
    pub keyword_flags: [bool; 6],
}

impl CuratedFeatureVector {
    pub fn to_row<F: Scalar>(&self) -> Vec<F> {
        let mut row = Vec::with_capacity(CURATED_WIDTH);
        row.extend(self.counts.iter().map(|&v| F::from_count(v as usize)));
        row.extend(self.presence.iter().map(|&b| flag::<F>(b)));
        row.extend(self.categories.iter().map(|&v| F::from_count(v)));
        row.push(F::from_count(self.summary_words as usize));
        row.push(F::from_count(self.description_words as usize));
        row.push(F::real(self.polarity));
        row.push(F::real(self.subjectivity));
        row.extend(self.pos_counts.iter().map(|&v| F::from_count(v as usize)));
        row.extend(self.keyword_flags.iter().map(|&b| flag::<F>(b)));
        row
    }
}

fn flag<F: Scalar>(b: bool) -> F {
    if b {
        F::one()
    } else {
        F::zero()
    }
}

/// Width of the curated feature vector.
pub const CURATED_WIDTH: usize = 39;

/// Curated column names, in vector order.
pub fn curated_column_names() -> Vec<String> {
    let mut names = Vec::with_capacity(CURATED_WIDTH);
    names.extend((1..=7).map(|i| format!("FJN{i}")));
    names.extend((1..=5).map(|i| format!("FJB{i}")));
    names.extend((1..=6).map(|i| format!("FJC{i}")));
    names.extend((1..=4).map(|i| format!("FTN{i}")));
    names.extend(PosTag::ALL.iter().map(|t| format!("FTNP_{}", t.name())));
    names.extend((1..=6).map(|i| format!("FTB{i}")));
    names
}

/// Extracts the curated feature vector for one issue.
///
/// The issue text is the summary and description joined by one space, on
/// the feature path (no cleaning, no stopword removal).
pub fn extract_curated(
    issue: &IssueRecord,
    rules: &KeywordRuleSet,
    lexicon: &SentimentLexicon,
    tagger: &dyn Tagger,
    encoders: &CuratedEncoders,
) -> CuratedFeatureVector {
    let summary_tokens = normalize_tokenize(&issue.summary);
    let description_tokens = normalize_tokenize(&issue.description);
    let tokens = normalize_tokenize(&issue.combined_text());

    let (polarity, subjectivity) = sentiment(&tokens, lexicon);

    let tagged = pos_tag(&tokens, tagger);
    let mut pos_counts = [0u32; 11];
    for (_, tag) in &tagged {
        pos_counts[tag.slot()] += 1;
    }

    let word_flag = |words: &[String]| tokens.iter().any(|t| words.iter().any(|w| t == w));
    let marker_flag = |markers: &[String]| {
        tagged
            .iter()
            .any(|(token, tag)| markers.iter().any(|m| marker_fires(m, token, *tag)))
    };

    CuratedFeatureVector {
        counts: [
            issue.watchers,
            issue.images,
            issue.reopen_count,
            issue.reassign_count,
            issue.linked_issues,
            issue.sub_tasks,
            issue.components,
        ],
        presence: [
            issue.reported_by_customer,
            issue.tested_versions,
            issue.test_execution_type,
            issue.approval_type,
            issue.affects_versions,
        ],
        categories: [
            encoders.issue_type.encode(&issue.issue_type),
            encoders.reporter.encode(&issue.reporter),
            encoders.priority.encode(&issue.priority),
            encoders.frequency.encode(&issue.frequency),
            encoders.bug_category.encode(&issue.bug_category),
            encoders.labels.encode(&issue.labels),
        ],
        summary_words: summary_tokens.len() as u32,
        description_words: description_tokens.len() as u32,
        polarity,
        subjectivity,
        pos_counts,
        keyword_flags: [
            word_flag(&rules.bug_words),
            word_flag(&rules.test_words),
            word_flag(&rules.document_words),
            word_flag(&rules.design_words),
            marker_flag(&rules.necessity_rule),
            marker_flag(&rules.negation_rule),
        ],
    }
}

/// Stacks curated vectors into a dense matrix, optionally keeping only a
/// column subset.
pub fn assemble<F: Scalar>(
    vectors: &[CuratedFeatureVector],
    selection: Option<&[String]>,
) -> Result<FeatureMatrix<F>> {
    let rows: Vec<Vec<F>> = vectors.iter().map(CuratedFeatureVector::to_row).collect();
    let full = FeatureMatrix::from_rows(rows, curated_column_names(), FeatureKind::Curated)?;
    match selection {
        Some(columns) => full.select(columns),
        None => Ok(full),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::textprep::BaselineTagger;

    fn fixture_resources() -> (KeywordRuleSet, SentimentLexicon, BaselineTagger) {
        (
            KeywordRuleSet::bundled_english(),
            SentimentLexicon::bundled_english(),
            BaselineTagger::new(),
        )
    }

    fn empty_encoders() -> CuratedEncoders {
        CuratedEncoders::fit(std::iter::empty())
    }

    #[test]
    fn bug_word_token_sets_ftb1() {
        let (rules, lexicon, tagger) = fixture_resources();
        let issue = IssueRecord {
            summary: "Page fails".into(),
            description: "value is null on submit".into(),
            ..IssueRecord::default()
        };
        let v = extract_curated(&issue, &rules, &lexicon, &tagger, &empty_encoders());
        assert!(v.keyword_flags[0], "FTB1 fires on 'null'");
    }

    #[test]
    fn empty_description_has_zero_word_count() {
        let (rules, lexicon, tagger) = fixture_resources();
        let issue = IssueRecord {
            summary: "Anything".into(),
            description: String::new(),
            ..IssueRecord::default()
        };
        let v = extract_curated(&issue, &rules, &lexicon, &tagger, &empty_encoders());
        assert_eq!(v.description_words, 0);
    }

    #[test]
    fn table_two_fixture_counts() {
        let (rules, lexicon, tagger) = fixture_resources();
        let issue = IssueRecord {
            summary: "Server v1.0.9 Test Request".into(),
            description: "Please test it.".into(),
            ..IssueRecord::default()
        };
        let v = extract_curated(&issue, &rules, &lexicon, &tagger, &empty_encoders());
        assert_eq!(v.summary_words, 4, "FTN1");
        assert_eq!(v.description_words, 3, "FTN2");
        assert!(v.keyword_flags[1], "FTB2 fires on 'test'");
        let tag_sum: u32 = v.pos_counts.iter().sum();
        assert_eq!(tag_sum, 7, "FTNP slots sum to combined token count");
    }

    #[test]
    fn necessity_and_negation_markers() {
        let (rules, lexicon, tagger) = fixture_resources();
        let should_issue = IssueRecord {
            summary: "Rooms".into(),
            description: "it should be separated".into(),
            ..IssueRecord::default()
        };
        let v = extract_curated(&should_issue, &rules, &lexicon, &tagger, &empty_encoders());
        assert!(v.keyword_flags[4], "FTB5 fires on 'should'");
        assert!(!v.keyword_flags[5]);

        let negative_issue = IssueRecord {
            summary: "Mail".into(),
            description: "the order e-mail doesn't come".into(),
            ..IssueRecord::default()
        };
        let v = extract_curated(&negative_issue, &rules, &lexicon, &tagger, &empty_encoders());
        assert!(v.keyword_flags[5], "FTB6 fires on the n't suffix");
    }

    #[test]
    fn determinism_identical_records_identical_vectors() {
        let (rules, lexicon, tagger) = fixture_resources();
        let issue = IssueRecord {
            summary: "Version Filter MacId Problem".into(),
            description: "Problem experienced due to different incoming Mac address.".into(),
            watchers: 3,
            ..IssueRecord::default()
        };
        let encoders = empty_encoders();
        let a = extract_curated(&issue, &rules, &lexicon, &tagger, &encoders);
        let b = extract_curated(&issue, &rules, &lexicon, &tagger, &encoders);
        assert_eq!(a, b);
    }

    #[test]
    fn encoder_assigns_lexicographic_codes_and_unknown_fallback() {
        let enc = CategoryEncoder::fit(["Bug", "Story", "Bug", "Epic"].into_iter());
        assert_eq!(enc.encode("Bug"), 0);
        assert_eq!(enc.encode("Epic"), 1);
        assert_eq!(enc.encode("Story"), 2);
        // No "unknown" seen in training: unseen maps to the reserved code.
        assert_eq!(enc.encode("Task"), 3);

        let enc = CategoryEncoder::fit(["Bug", "unknown"].into_iter());
        assert_eq!(enc.encode("Task"), enc.encode("unknown"));
    }

    #[test]
    fn assemble_has_full_width_and_selection_works() {
        let (rules, lexicon, tagger) = fixture_resources();
        let issue = IssueRecord {
            summary: "a".into(),
            description: "b".into(),
            ..IssueRecord::default()
        };
        let vectors = vec![
            extract_curated(&issue, &rules, &lexicon, &tagger, &empty_encoders()),
            extract_curated(&issue, &rules, &lexicon, &tagger, &empty_encoders()),
        ];
        let m = assemble::<f64>(&vectors, None).unwrap();
        assert_eq!(m.rows(), 2);
        assert_eq!(m.cols(), CURATED_WIDTH);
        assert_eq!(m.column_names().len(), CURATED_WIDTH);

        let s = assemble::<f64>(&vectors, Some(&["FJC1".to_string()])).unwrap();
        assert_eq!(s.cols(), 1);
    }

    #[test]
    fn rules_parse_and_reject_unknown_keys() {
        let rules = KeywordRuleSet::parse("bug_words=error,null\ntest_words=test\n").unwrap();
        assert_eq!(rules.bug_words, vec!["error", "null"]);
        assert!(KeywordRuleSet::parse("nope=1,2").is_err());
    }

    #[test]
    fn verb_guarded_suffix_marker() {
        // A Turkish-style guarded suffix only fires on verb-tagged tokens.
        assert!(marker_fires("-ing@verb", "failing", PosTag::Verb));
        assert!(!marker_fires("-ing@verb", "failing", PosTag::Noun));
        assert!(marker_fires("not", "not", PosTag::Adverb));
    }
}
