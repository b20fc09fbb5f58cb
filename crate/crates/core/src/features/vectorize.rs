//! Bag-of-words and TF-IDF vectorizers.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Result, TriageError};
use crate::features::{FeatureKind, FeatureMatrix};
use crate::scalar::Scalar;
use crate::textprep::TokenList;

/// N-gram extraction mode.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum NgramMode {
    Unigram,
    Bigram,
    UnigramPlusBigram,
}

impl NgramMode {
    pub fn name(&self) -> &'static str {
        match self {
            NgramMode::Unigram => "unigram",
            NgramMode::Bigram => "bigram",
            NgramMode::UnigramPlusBigram => "unigram+bigram",
        }
    }
}

/// Expands a token list into its n-grams; bigrams join adjacent tokens
/// with `_`.
pub fn ngrams(tokens: &[String], mode: NgramMode) -> Vec<String> {
    let mut out = Vec::new();
    if matches!(mode, NgramMode::Unigram | NgramMode::UnigramPlusBigram) {
        out.extend(tokens.iter().cloned());
    }
    if matches!(mode, NgramMode::Bigram | NgramMode::UnigramPlusBigram) {
        out.extend(tokens.windows(2).map(|w| format!("{}_{}", w[0], w[1])));
    }
    out
}

/// Term-to-column vocabulary with document frequencies, fitted on training
/// folds only and immutable afterwards.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Vocabulary {
    term_to_col: BTreeMap<String, u32>,
    doc_freq: Vec<u32>,
    n_documents: usize,
    ngram: NgramMode,
}

impl Vocabulary {
    pub fn len(&self) -> usize {
        self.term_to_col.len()
    }

    pub fn is_empty(&self) -> bool {
        self.term_to_col.is_empty()
    }

    pub fn ngram_mode(&self) -> NgramMode {
        self.ngram
    }

    pub fn n_documents(&self) -> usize {
        self.n_documents
    }

    pub fn column_of(&self, term: &str) -> Option<u32> {
        self.term_to_col.get(term).copied()
    }

    pub fn document_frequency(&self, term: &str) -> Option<u32> {
        self.column_of(term).map(|c| self.doc_freq[c as usize])
    }

    /// Column names in column order.
    pub fn column_names(&self) -> Vec<String> {
        let mut names = vec![String::new(); self.term_to_col.len()];
        for (term, &col) in &self.term_to_col {
            names[col as usize] = term.clone();
        }
        names
    }

    /// Smooth inverse document frequency: `ln((1+N)/(1+df)) + 1`.
    pub fn idf(&self, col: u32) -> f64 {
        let n = self.n_documents as f64;
        let df = self.doc_freq[col as usize] as f64;
        ((1.0 + n) / (1.0 + df)).ln() + 1.0
    }
}

/// Builds a vocabulary from training texts: every n-gram whose document
/// frequency reaches `min_df`, columns in lexicographic term order.
pub fn fit_vocabulary(
    train_texts: &[TokenList],
    mode: NgramMode,
    min_df: usize,
) -> Result<Vocabulary> {
    if train_texts.is_empty() {
        return Err(TriageError::DegenerateData {
            detail: "cannot fit a vocabulary on zero documents".into(),
        });
    }
    let mut doc_freq_map: BTreeMap<String, u32> = BTreeMap::new();
    for tokens in train_texts {
        let mut terms = ngrams(tokens, mode);
        terms.sort_unstable();
        terms.dedup();
        for term in terms {
            *doc_freq_map.entry(term).or_insert(0) += 1;
        }
    }
    let min_df = min_df.max(1);
    // BTreeMap iteration gives the lexicographic column order directly.
    let kept: Vec<(String, u32)> = doc_freq_map
        .into_iter()
        .filter(|(_, df)| *df as usize >= min_df)
        .collect();
    if kept.is_empty() {
        return Err(TriageError::EmptyVocabulary { min_df });
    }
    let mut term_to_col = BTreeMap::new();
    let mut doc_freq = Vec::with_capacity(kept.len());
    for (col, (term, df)) in kept.into_iter().enumerate() {
        term_to_col.insert(term, col as u32);
        doc_freq.push(df);
    }
    Ok(Vocabulary {
        term_to_col,
        doc_freq,
        n_documents: train_texts.len(),
        ngram: mode,
    })
}

fn count_rows(texts: &[TokenList], vocab: &Vocabulary) -> Vec<Vec<(u32, u32)>> {
    texts
        .iter()
        .map(|tokens| {
            let mut counts: BTreeMap<u32, u32> = BTreeMap::new();
            for term in ngrams(tokens, vocab.ngram) {
                if let Some(col) = vocab.column_of(&term) {
                    *counts.entry(col).or_insert(0) += 1;
                }
            }
            counts.into_iter().collect()
        })
        .collect()
}

/// Raw term counts; out-of-vocabulary terms are ignored.
pub fn bow_transform<F: Scalar>(
    texts: &[TokenList],
    vocab: &Vocabulary,
) -> Result<FeatureMatrix<F>> {
    let rows = count_rows(texts, vocab)
        .into_iter()
        .map(|row| {
            row.into_iter()
                .map(|(c, n)| (c, F::from_count(n as usize)))
                .collect()
        })
        .collect();
    FeatureMatrix::from_sparse_rows(rows, vocab.column_names(), FeatureKind::Text)
}

/// TF-IDF: raw counts times smooth IDF, then L2 row normalization
/// (all-zero rows stay zero).
pub fn tfidf_transform<F: Scalar>(
    texts: &[TokenList],
    vocab: &Vocabulary,
) -> Result<FeatureMatrix<F>> {
    let rows = count_rows(texts, vocab)
        .into_iter()
        .map(|row| {
            let mut entries: Vec<(u32, F)> = row
                .into_iter()
                .map(|(c, n)| (c, F::real(n as f64 * vocab.idf(c))))
                .collect();
            let norm = entries
                .iter()
                .map(|(_, v)| *v * *v)
                .fold(F::zero(), |a, b| a + b)
                .sqrt();
            if norm > F::zero() {
                for (_, v) in &mut entries {
                    *v = *v / norm;
                }
            }
            entries
        })
        .collect();
    FeatureMatrix::from_sparse_rows(rows, vocab.column_names(), FeatureKind::Text)
}
