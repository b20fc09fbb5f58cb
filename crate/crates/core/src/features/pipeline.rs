//! Feature pipelines: fit on training records, transform anything.
//!
//! A [`PipelineSpec`] bundles the feature mode with the text resources and
//! tagger; [`PipelineSpec::fit`] freezes the training-fold state (category
//! encoders or vocabulary) into a [`FittedPipeline`]. Transforming held-out
//! records never mutates the fitted state.

use std::collections::{BTreeMap, BTreeSet};
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::corpus::IssueRecord;
use crate::error::{Result, TriageError};
use crate::features::{
    assemble, bow_transform, extract_curated, fit_vocabulary, tfidf_transform, CuratedEncoders,
    FeatureMatrix, KeywordRuleSet, NgramMode, Vocabulary,
};
use crate::scalar::Scalar;
use crate::textprep::{
    bundled_lemmas, bundled_stopwords, clean_for_embedding, normalize_tokenize, BaselineTagger,
    SentimentLexicon, Tagger, TokenList,
};

/// Which feature family to build.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum FeatureMode {
    Curated,
    Bow,
    Tfidf,
}

impl FeatureMode {
    pub fn name(&self) -> &'static str {
        match self {
            FeatureMode::Curated => "curated",
            FeatureMode::Bow => "bow",
            FeatureMode::Tfidf => "tfidf",
        }
    }

    pub fn parse(name: &str) -> Option<FeatureMode> {
        match name.to_ascii_lowercase().as_str() {
            "curated" => Some(FeatureMode::Curated),
            "bow" => Some(FeatureMode::Bow),
            "tfidf" | "tf-idf" => Some(FeatureMode::Tfidf),
            _ => None,
        }
    }
}

/// Mode plus vectorizer settings.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct FeatureConfig {
    pub mode: FeatureMode,
    pub ngram: NgramMode,
    pub min_df: usize,
}

impl FeatureConfig {
    pub fn new(mode: FeatureMode) -> Self {
        FeatureConfig {
            mode,
            ngram: NgramMode::Unigram,
            min_df: 1,
        }
    }

    pub fn with_ngram(mut self, ngram: NgramMode) -> Self {
        self.ngram = ngram;
        self
    }

    pub fn with_min_df(mut self, min_df: usize) -> Self {
        self.min_df = min_df;
        self
    }
}

impl Default for FeatureConfig {
    fn default() -> Self {
        FeatureConfig::new(FeatureMode::Curated)
    }
}

/// Loadable text resources with bundled English defaults.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TextResources {
    pub rules: KeywordRuleSet,
    pub lexicon: SentimentLexicon,
    pub stopwords: BTreeSet<String>,
    pub lemmas: BTreeMap<String, String>,
}

impl Default for TextResources {
    fn default() -> Self {
        TextResources {
            rules: KeywordRuleSet::bundled_english(),
            lexicon: SentimentLexicon::bundled_english(),
            stopwords: bundled_stopwords(),
            lemmas: bundled_lemmas(),
        }
    }
}

/// Unfitted pipeline: configuration plus shared resources.
#[derive(Clone)]
pub struct PipelineSpec {
    pub config: FeatureConfig,
    pub resources: Arc<TextResources>,
    pub tagger: Arc<dyn Tagger>,
}

impl PipelineSpec {
    pub fn new(config: FeatureConfig) -> Self {
        PipelineSpec {
            config,
            resources: Arc::new(TextResources::default()),
            tagger: Arc::new(BaselineTagger::new()),
        }
    }

    pub fn with_resources(mut self, resources: Arc<TextResources>) -> Self {
        self.resources = resources;
        self
    }

    pub fn with_tagger(mut self, tagger: Arc<dyn Tagger>) -> Self {
        self.tagger = tagger;
        self
    }

    /// Embedding-path tokens for one record.
    fn embedding_tokens(&self, record: &IssueRecord) -> TokenList {
        let tokens = normalize_tokenize(&record.combined_text());
        clean_for_embedding(&tokens, &self.resources.stopwords, &self.resources.lemmas)
    }

    /// Fits the pipeline state on the given training records.
    pub fn fit(&self, records: &[&IssueRecord]) -> Result<FittedPipeline> {
        if records.is_empty() {
            return Err(TriageError::DegenerateData {
                detail: "cannot fit a feature pipeline on zero records".into(),
            });
        }
        let state = match self.config.mode {
            FeatureMode::Curated => {
                PipelineState::Curated(CuratedEncoders::fit(records.iter().copied()))
            }
            FeatureMode::Bow | FeatureMode::Tfidf => {
                let texts: Vec<TokenList> = records
                    .iter()
                    .map(|r| self.embedding_tokens(r))
                    .collect();
                PipelineState::Text(fit_vocabulary(
                    &texts,
                    self.config.ngram,
                    self.config.min_df,
                )?)
            }
        };
        Ok(FittedPipeline {
            spec: self.clone(),
            state,
        })
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
enum PipelineState {
    Curated(CuratedEncoders),
    Text(Vocabulary),
}

/// A pipeline with frozen training-fold state.
#[derive(Clone)]
pub struct FittedPipeline {
    spec: PipelineSpec,
    state: PipelineState,
}

impl FittedPipeline {
    pub fn config(&self) -> FeatureConfig {
        self.spec.config
    }

    /// Column names of the matrices this pipeline produces.
    pub fn column_names(&self) -> Vec<String> {
        match &self.state {
            PipelineState::Curated(_) => crate::features::curated_column_names(),
            PipelineState::Text(vocab) => vocab.column_names(),
        }
    }

    /// Transforms records into a feature matrix. Pure: the fitted state is
    /// never modified.
    pub fn transform<F: Scalar>(&self, records: &[&IssueRecord]) -> Result<FeatureMatrix<F>> {
        match &self.state {
            PipelineState::Curated(encoders) => {
                let vectors: Vec<_> = records
                    .iter()
                    .map(|r| {
                        extract_curated(
                            r,
                            &self.spec.resources.rules,
                            &self.spec.resources.lexicon,
                            self.spec.tagger.as_ref(),
                            encoders,
                        )
                    })
                    .collect();
                assemble(&vectors, None)
            }
            PipelineState::Text(vocab) => {
                let texts: Vec<TokenList> = records
                    .iter()
                    .map(|r| self.spec.embedding_tokens(r))
                    .collect();
                match self.spec.config.mode {
                    FeatureMode::Bow => bow_transform(&texts, vocab),
                    FeatureMode::Tfidf => tfidf_transform(&texts, vocab),
                    FeatureMode::Curated => unreachable!("curated state handled above"),
                }
            }
        }
    }

    /// Serializable form; the tagger is stored by name.
    pub fn to_saved(&self) -> SavedPipeline {
        SavedPipeline {
            config: self.spec.config,
            resources: (*self.spec.resources).clone(),
            tagger_name: self.spec.tagger.name().to_string(),
            state: self.state.clone(),
        }
    }
}

/// On-disk form of a fitted pipeline. Only bundled taggers can be restored
/// by name.
#[derive(Clone, Serialize, Deserialize)]
pub struct SavedPipeline {
    config: FeatureConfig,
    resources: TextResources,
    tagger_name: String,
    state: PipelineState,
}

impl SavedPipeline {
    pub fn restore(self) -> Result<FittedPipeline> {
        let tagger: Arc<dyn Tagger> = if self.tagger_name == BaselineTagger::NAME {
            Arc::new(BaselineTagger::new())
        } else {
            return Err(TriageError::UnknownTagger {
                name: self.tagger_name,
            });
        };
        Ok(FittedPipeline {
            spec: PipelineSpec {
                config: self.config,
                resources: Arc::new(self.resources),
                tagger,
            },
            state: self.state,
        })
    }
}
