//! Real-time scene narration for blind and low-vision users.
//!
//! Frames from a moving camera pass through keyframe selection, each
//! keyframe is described at three levels of detail by slower and slower
//! backends, and a presenter speaks the most useful, still-accurate sentence
//! whenever it is free. Everything is driven by explicit timestamps, so a
//! recorded scenario replays to the same transcript every time.

pub mod config;
pub mod genpipe;
pub mod intent;
pub mod keyframe;
pub mod presenter;
pub mod provider;
pub mod ranker;
pub mod sim;
pub mod types;

pub use config::{ConfigOverrides, EngineConfig, ValidationResult};
pub use genpipe::{DescriptionBuffer, DescriptionGenerator, DescriptionPacket, Tier, Verbosity};
pub use intent::{IntentProfile, RuleBasedDecomposer};
pub use keyframe::{KeyframeDecision, KeyframeExtractor, KeyframeReason, KeyframeState};
pub use presenter::{PlaybackState, SoundEvent, SoundPolicy};
pub use ranker::{rank_sentences, select_next, RankedSentence};
pub use types::{BBox, Composition, Detection, FrameRecord};
