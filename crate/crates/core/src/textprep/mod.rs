//! Tokenization and the two text-preparation paths.
//!
//! The feature path keeps every token as-is after lowercasing (no cleaning,
//! every word's feature matters); the embedding path additionally strips
//! digits and punctuation, drops stopwords, and lemmatizes. POS tagging and
//! sentiment scoring sit behind pluggable interfaces with bundled English
//! defaults.

mod postag;
mod sentiment;

pub use postag::{pos_tag, BaselineTagger, PosTag, TagError, Tagger};
pub use sentiment::{sentiment, SentimentLexicon};

use std::collections::{BTreeMap, BTreeSet};

use crate::error::Result;

/// Ordered token list; tokens never contain whitespace.
pub type TokenList = Vec<String>;

/// Lowercases and splits on whitespace runs.
pub fn normalize_tokenize(text: &str) -> TokenList {
    text.to_lowercase()
        .split_whitespace()
        .map(str::to_string)
        .collect()
}

/// Embedding-path cleaning: strips numeric and punctuation characters from
/// each token, removes emptied tokens and stopwords, then maps survivors
/// through the lemma table (identity for words not in the table).
pub fn clean_for_embedding(
    tokens: &[String],
    stopwords: &BTreeSet<String>,
    lemmas: &BTreeMap<String, String>,
) -> TokenList {
    tokens
        .iter()
        .map(|t| t.chars().filter(|c| c.is_alphabetic()).collect::<String>())
        .filter(|t| !t.is_empty())
        .filter(|t| !stopwords.contains(t))
        .map(|t| lemmas.get(&t).cloned().unwrap_or(t))
        .collect()
}

/// Parses a stopword file: one word per line, `#` comments allowed.
pub fn parse_stopwords(text: &str) -> BTreeSet<String> {
    text.lines()
        .map(str::trim)
        .filter(|l| !l.is_empty() && !l.starts_with('#'))
        .map(|l| l.to_lowercase())
        .collect()
}

/// Parses a lemma file: `surface<TAB>lemma` per line.
pub fn parse_lemmas(text: &str) -> Result<BTreeMap<String, String>> {
    let mut map = BTreeMap::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let mut parts = line.split('\t');
        match (parts.next(), parts.next()) {
            (Some(surface), Some(lemma)) => {
                map.insert(surface.to_lowercase(), lemma.to_lowercase());
            }
            _ => {
                return Err(crate::error::TriageError::Invalid(format!(
                    "lemma file line {}: expected 'surface<TAB>lemma'",
                    i + 1
                )))
            }
        }
    }
    Ok(map)
}

/// Bundled English stopword list.
pub fn bundled_stopwords() -> BTreeSet<String> {
    parse_stopwords(include_str!("../../data/stopwords_en.txt"))
}

/// Bundled English lemma table.
pub fn bundled_lemmas() -> BTreeMap<String, String> {
    parse_lemmas(include_str!("../../data/lemmas_en.tsv")).expect("bundled lemma table parses")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_text_tokenizes_to_nothing() {
        assert!(normalize_tokenize("").is_empty());
    }

    #[test]
    fn tokenization_lowercases_and_splits_on_spaces() {
        // Table-2 style summary line.
        assert_eq!(
            normalize_tokenize("Server v1.0.9 Test Request"),
            vec!["server", "v1.0.9", "test", "request"]
        );
    }

    #[test]
    fn whitespace_runs_collapse() {
        assert_eq!(normalize_tokenize("A  B"), vec!["a", "b"]);
        assert_eq!(normalize_tokenize("a\t b\nc"), vec!["a", "b", "c"]);
    }

    #[test]
    fn tokenization_is_idempotent() {
        let once = normalize_tokenize("Server v1.0.9  Test Request!");
        let again = normalize_tokenize(&once.join(" "));
        assert_eq!(once, again);
    }

    #[test]
    fn cleaning_removes_stopwords_and_lemmatizes() {
        let tokens = normalize_tokenize("the server is failing");
        let stopwords: BTreeSet<String> = ["the", "is"].iter().map(|s| s.to_string()).collect();
        let lemmas = BTreeMap::new();
        assert_eq!(
            clean_for_embedding(&tokens, &stopwords, &lemmas),
            vec!["server", "failing"]
        );
    }

    #[test]
    fn cleaning_strips_digits_and_punctuation() {
        let tokens = vec!["v1.0.9".to_string()];
        let cleaned = clean_for_embedding(&tokens, &BTreeSet::new(), &BTreeMap::new());
        assert_eq!(cleaned, vec!["v"]);

        let tokens = vec!["1.0.9".to_string(), "!!".to_string()];
        let cleaned = clean_for_embedding(&tokens, &BTreeSet::new(), &BTreeMap::new());
        assert!(cleaned.is_empty(), "fully stripped tokens are removed");
    }

    #[test]
    fn cleaning_applies_lemma_table() {
        let tokens = vec!["errors".to_string()];
        let mut lemmas = BTreeMap::new();
        lemmas.insert("errors".to_string(), "error".to_string());
        assert_eq!(
            clean_for_embedding(&tokens, &BTreeSet::new(), &lemmas),
            vec!["error"]
        );
    }

    #[test]
    fn bundled_resources_load() {
        let stopwords = bundled_stopwords();
        assert!(stopwords.contains("the"));
        assert!(stopwords.contains("and"));
        let lemmas = bundled_lemmas();
        assert_eq!(lemmas.get("errors").map(String::as_str), Some("error"));
    }
}
