//! Lexicon-based sentiment scoring.
//!
//! Polarity and subjectivity are means over lexicon-matched tokens, with a
//! single-token-lookback negation rule flipping the polarity of a matched
//! token that directly follows a negation marker.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Result, TriageError};

/// Word-level sentiment entries plus negation/necessity marker lists.
///
/// Marker entries starting with `-` match token suffixes (for example
/// `-n't`); all other entries match whole tokens.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SentimentLexicon {
    entries: BTreeMap<String, (f64, f64)>,
    negation_markers: Vec<String>,
    necessity_markers: Vec<String>,
}

impl SentimentLexicon {
    /// Builds a lexicon, validating that polarities lie in [-1, 1] and
    /// subjectivities in [0, 1].
    pub fn new(
        entries: BTreeMap<String, (f64, f64)>,
        negation_markers: Vec<String>,
        necessity_markers: Vec<String>,
    ) -> Result<Self> {
        for (word, (polarity, subjectivity)) in &entries {
            if !(-1.0..=1.0).contains(polarity) || !polarity.is_finite() {
                return Err(TriageError::Invalid(format!(
                    "sentiment entry '{word}': polarity {polarity} outside [-1, 1]"
                )));
            }
            if !(0.0..=1.0).contains(subjectivity) || !subjectivity.is_finite() {
                return Err(TriageError::Invalid(format!(
                    "sentiment entry '{word}': subjectivity {subjectivity} outside [0, 1]"
                )));
            }
        }
        Ok(SentimentLexicon {
            entries,
            negation_markers: negation_markers.iter().map(|m| m.to_lowercase()).collect(),
            necessity_markers: necessity_markers.iter().map(|m| m.to_lowercase()).collect(),
        })
    }

    /// Parses the tab-separated lexicon format: `word<TAB>polarity<TAB>subjectivity`.
    ///
    /// Lines starting with `!negation` or `!necessity` declare marker lists
    /// as comma-separated values; the bundled defaults are used when a file
    /// declares none.
    pub fn parse(text: &str) -> Result<Self> {
        let mut entries = BTreeMap::new();
        let mut negation: Option<Vec<String>> = None;
        let mut necessity: Option<Vec<String>> = None;
        for (i, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            if let Some(rest) = line.strip_prefix("!negation=") {
                negation = Some(rest.split(',').map(|m| m.trim().to_lowercase()).collect());
                continue;
            }
            if let Some(rest) = line.strip_prefix("!necessity=") {
                necessity = Some(rest.split(',').map(|m| m.trim().to_lowercase()).collect());
                continue;
            }
            let mut parts = line.split('\t');
            let (Some(word), Some(pol), Some(subj)) = (parts.next(), parts.next(), parts.next())
            else {
                return Err(TriageError::Invalid(format!(
                    "lexicon line {}: expected 'word<TAB>polarity<TAB>subjectivity'",
                    i + 1
                )));
            };
            let pol: f64 = pol.trim().parse().map_err(|_| {
                TriageError::Invalid(format!("lexicon line {}: bad polarity '{pol}'", i + 1))
            })?;
            let subj: f64 = subj.trim().parse().map_err(|_| {
                TriageError::Invalid(format!("lexicon line {}: bad subjectivity '{subj}'", i + 1))
            })?;
            entries.insert(word.trim().to_lowercase(), (pol, subj));
        }
        SentimentLexicon::new(
            entries,
            negation.unwrap_or_else(default_negation_markers),
            necessity.unwrap_or_else(default_necessity_markers),
        )
    }

    /// Bundled English lexicon.
    pub fn bundled_english() -> Self {
        Self::parse(include_str!("../../data/sentiment_en.tsv"))
            .expect("bundled sentiment lexicon parses")
    }

    pub fn entry(&self, token: &str) -> Option<(f64, f64)> {
        self.entries.get(token).copied()
    }

    pub fn negation_markers(&self) -> &[String] {
        &self.negation_markers
    }

    pub fn necessity_markers(&self) -> &[String] {
        &self.necessity_markers
    }

    /// Whether `token` is a negation marker (whole token or `-suffix` form).
    pub fn is_negation(&self, token: &str) -> bool {
        marker_matches(&self.negation_markers, token)
    }
}

fn default_negation_markers() -> Vec<String> {
    ["not", "never", "no", "none", "cannot", "-n't"]
        .iter()
        .map(|m| m.to_string())
        .collect()
}

fn default_necessity_markers() -> Vec<String> {
    vec!["should".to_string()]
}

/// Marker entries starting with `-` match suffixes; others whole tokens.
pub(crate) fn marker_matches(markers: &[String], token: &str) -> bool {
    markers.iter().any(|m| match m.strip_prefix('-') {
        Some(suffix) => token.ends_with(suffix),
        None => token == m,
    })
}

/// Scores tokens against the lexicon.
///
/// Polarity is the mean polarity over matched tokens (0 if none match),
/// sign-flipped for tokens directly preceded by a negation marker;
/// subjectivity is the mean subjectivity over matched tokens. Outputs are
/// clamped to [-1, 1] and [0, 1].
pub fn sentiment(tokens: &[String], lexicon: &SentimentLexicon) -> (f64, f64) {
    let mut polarity_sum = 0.0;
    let mut subjectivity_sum = 0.0;
    let mut matched = 0usize;
    for (i, token) in tokens.iter().enumerate() {
        let Some((polarity, subjectivity)) = lexicon.entry(token) else {
            continue;
        };
        let negated = i > 0 && lexicon.is_negation(&tokens[i - 1]);
        polarity_sum += if negated { -polarity } else { polarity };
        subjectivity_sum += subjectivity;
        matched += 1;
    }
    if matched == 0 {
        return (0.0, 0.0);
    }
    let n = matched as f64;
    ((polarity_sum / n).clamp(-1.0, 1.0), (subjectivity_sum / n).clamp(0.0, 1.0))
}
