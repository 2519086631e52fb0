//! Inference backends. The engine only talks to these traits; the simulator
//! plugs in scripted implementations.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::genpipe::Tier;
use crate::intent::{IntentDecomposition, IntentProfile};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ProviderError {
    #[error("provider refused the request: {0}")]
    Refused(String),
    #[error("provider failed: {0}")]
    Failed(String),
}

/// What a description backend is asked for.
#[derive(Debug, Clone, PartialEq)]
pub struct DescriptionRequest {
    pub frame_id: u64,
    pub tier: Tier,
    /// Set for the detailed tier only.
    pub prompt: Option<String>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DescriptionResponse {
    pub sentences: Vec<String>,
    /// Overrides the configured tier latency when set.
    pub latency: Option<f64>,
}

pub trait DescriptionProvider {
    fn describe(&mut self, request: &DescriptionRequest) -> Result<DescriptionResponse, ProviderError>;
}

/// Intent similarity and proximity for one detailed sentence.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SentenceScore {
    pub sim: f64,
    pub depth: f64,
}

/// Scores detailed-tier sentences against the current intent. A live
/// backend would run a sentence embedder, a region locator and a depth
/// estimator here.
pub trait SentenceScorer {
    fn score(
        &mut self,
        frame_id: u64,
        sentences: &[String],
        profile: &IntentProfile,
    ) -> Result<Vec<SentenceScore>, ProviderError>;
}

pub trait IntentDecomposer {
    fn decompose(&mut self, text: &str) -> Result<IntentDecomposition, ProviderError>;
}

pub trait SentenceEmbedder {
    /// `None` when the text has no embedding; redundancy then falls back to
    /// exact matching.
    fn embed(&self, text: &str) -> Option<Vec<f64>>;
}

/// Embedder that knows nothing; only exact repeats count as redundant.
#[derive(Debug, Clone, Copy, Default)]
pub struct NoEmbedder;

impl SentenceEmbedder for NoEmbedder {
    fn embed(&self, _text: &str) -> Option<Vec<f64>> {
        None
    }
}
