//! Scenario replay, transcripts and metrics.

pub mod engine;
pub mod metrics;
pub mod scenario;
pub mod transcript;

pub use engine::run;
pub use metrics::{evaluate, MetricKind, MetricsError, MetricsReport};
pub use scenario::{load_scenario, Scenario, ScenarioError, ScenarioRecord};
pub use transcript::{Transcript, TranscriptError, TranscriptRecord};
