//! Keyframe extraction.
//!
//! A frame becomes a keyframe when any of these holds, checked in this order:
//!
//! 1. no keyframe has been emitted yet (bootstrap);
//! 2. the camera yaw moved at least `orientation_unit_deg` from the last keyframe;
//! 3. the last `n` frames share one nonempty composition;
//! 4. the last `n` frames are all empty and the frame embedding has drifted
//!    below `thres` cosine similarity from the last keyframe;
//! 5. `2n` consecutive nonempty frames each changed composition from their
//!    predecessor (camera drift or objects moving through view).
//!
//! Every keyframe clears the composition window and the drift counter, and
//! becomes the new orientation reference. `m` consecutive keyframes sharing
//! one nonempty composition fire the detail trigger.

use std::collections::VecDeque;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::config::EngineConfig;
use crate::types::{Composition, Detection, FrameRecord};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum KeyframeError {
    #[error("frame {got} arrived after frame {previous}")]
    OutOfOrder { previous: u64, got: u64 },
    #[error("orientation {0} outside [0, 360)")]
    OrientationOutOfRange(f64),
    #[error(transparent)]
    Similarity(#[from] SimilarityError),
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SimilarityError {
    #[error("dimension mismatch: {left} vs {right}")]
    DimensionMismatch { left: usize, right: usize },
    #[error("cosine similarity undefined for a zero or empty vector")]
    ZeroVector,
}

/// Minimal circular distance between two yaw angles, in `[0, 180]`.
pub fn orientation_delta(a: f64, b: f64) -> Result<f64, KeyframeError> {
    for v in [a, b] {
        if !(0.0..360.0).contains(&v) {
            return Err(KeyframeError::OrientationOutOfRange(v));
        }
    }
    let d = (a - b).abs();
    Ok(d.min(360.0 - d))
}

pub fn composition_of(detections: &[Detection]) -> Composition {
    let mut comp = Composition::new();
    for det in detections {
        comp.insert(det.track_id, det.class_label.as_str());
    }
    comp
}

pub fn cosine_similarity(u: &[f64], v: &[f64]) -> Result<f64, SimilarityError> {
    if u.len() != v.len() {
        return Err(SimilarityError::DimensionMismatch {
            left: u.len(),
            right: v.len(),
        });
    }
    let (mut dot, mut nu, mut nv) = (0.0, 0.0, 0.0);
    for (a, b) in u.iter().zip(v) {
        dot += a * b;
        nu += a * a;
        nv += b * b;
    }
    if nu == 0.0 || nv == 0.0 {
        return Err(SimilarityError::ZeroVector);
    }
    Ok((dot / (nu.sqrt() * nv.sqrt())).clamp(-1.0, 1.0))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum KeyframeReason {
    Bootstrap,
    OrientationShift,
    StableComposition,
    EmptyFallback,
    DriftPeriodic,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum KeyframeDecision {
    NotKeyframe,
    Keyframe {
        reason: KeyframeReason,
        detail_trigger: bool,
    },
}

impl KeyframeDecision {
    pub fn is_keyframe(&self) -> bool {
        matches!(self, KeyframeDecision::Keyframe { .. })
    }

    pub fn reason(&self) -> Option<KeyframeReason> {
        match self {
            KeyframeDecision::Keyframe { reason, .. } => Some(*reason),
            KeyframeDecision::NotKeyframe => None,
        }
    }

    pub fn detail_trigger(&self) -> bool {
        matches!(
            self,
            KeyframeDecision::Keyframe {
                detail_trigger: true,
                ..
            }
        )
    }
}

/// Snapshot of the most recent keyframe, the reference for later rules.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KeyframeRef {
    pub frame_id: u64,
    pub orientation_deg: f64,
    pub composition: Composition,
    pub feature_vector: Vec<f64>,
}

/// Extractor state. A plain value: clone it to snapshot, compare it to
/// check replay.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct KeyframeState {
    pub last_keyframe: Option<KeyframeRef>,
    /// Compositions since the last keyframe, at most `n`.
    pub recent_compositions: VecDeque<Composition>,
    pub keyframe_streak: usize,
    streak_composition: Option<Composition>,
    /// Length of the current run of nonempty, frame-to-frame changing
    /// compositions.
    pub frames_since_differing_check: usize,
    previous_composition: Option<Composition>,
    last_frame_id: Option<u64>,
}

impl KeyframeState {
    pub fn new() -> Self {
        Self::default()
    }

    /// Pure transition: returns the decision and the successor state. On
    /// error the caller's state is untouched.
    pub fn process_frame(
        &self,
        frame: &FrameRecord,
        cfg: &EngineConfig,
    ) -> Result<(KeyframeDecision, KeyframeState), KeyframeError> {
        let mut next = self.clone();
        let decision = next.advance(frame, cfg)?;
        Ok((decision, next))
    }

    /// In-place variant of [`process_frame`](Self::process_frame).
    pub fn process(
        &mut self,
        frame: &FrameRecord,
        cfg: &EngineConfig,
    ) -> Result<KeyframeDecision, KeyframeError> {
        let (decision, next) = self.process_frame(frame, cfg)?;
        *self = next;
        Ok(decision)
    }

    fn advance(
        &mut self,
        frame: &FrameRecord,
        cfg: &EngineConfig,
    ) -> Result<KeyframeDecision, KeyframeError> {
        if let Some(previous) = self.last_frame_id {
            if frame.frame_id <= previous {
                return Err(KeyframeError::OutOfOrder {
                    previous,
                    got: frame.frame_id,
                });
            }
        }
        if !(0.0..360.0).contains(&frame.orientation_deg) {
            return Err(KeyframeError::OrientationOutOfRange(frame.orientation_deg));
        }

        let n = cfg.n.max(1);
        let comp = composition_of(&frame.detections);

        self.recent_compositions.push_back(comp.clone());
        while self.recent_compositions.len() > n {
            self.recent_compositions.pop_front();
        }

        let changed = self.previous_composition.as_ref() != Some(&comp);
        self.frames_since_differing_check = if comp.is_empty() {
            0
        } else if self.frames_since_differing_check > 0 && changed {
            self.frames_since_differing_check + 1
        } else {
            1
        };
        self.previous_composition = Some(comp.clone());
        self.last_frame_id = Some(frame.frame_id);

        let reason = self.fire(frame, &comp, n, cfg)?;
        let Some(reason) = reason else {
            return Ok(KeyframeDecision::NotKeyframe);
        };

        self.last_keyframe = Some(KeyframeRef {
            frame_id: frame.frame_id,
            orientation_deg: frame.orientation_deg,
            composition: comp.clone(),
            feature_vector: frame.feature_vector.clone(),
        });
        self.recent_compositions.clear();
        self.frames_since_differing_check = 0;

        if comp.is_empty() {
            self.keyframe_streak = 0;
            self.streak_composition = None;
        } else if self.streak_composition.as_ref() == Some(&comp) {
            self.keyframe_streak += 1;
        } else {
            self.keyframe_streak = 1;
            self.streak_composition = Some(comp);
        }
        let detail_trigger = self.keyframe_streak >= cfg.m.max(1);
        if detail_trigger {
            // the next trigger needs another m keyframes
            self.keyframe_streak = 0;
        }

        Ok(KeyframeDecision::Keyframe {
            reason,
            detail_trigger,
        })
    }

    fn fire(
        &self,
        frame: &FrameRecord,
        comp: &Composition,
        n: usize,
        cfg: &EngineConfig,
    ) -> Result<Option<KeyframeReason>, KeyframeError> {
        let Some(last) = &self.last_keyframe else {
            return Ok(Some(KeyframeReason::Bootstrap));
        };
        if orientation_delta(last.orientation_deg, frame.orientation_deg)?
            >= cfg.orientation_unit_deg
        {
            return Ok(Some(KeyframeReason::OrientationShift));
        }
        let window_full = self.recent_compositions.len() == n;
        if window_full && self.recent_compositions.iter().all(|c| c == comp) {
            if !comp.is_empty() {
                return Ok(Some(KeyframeReason::StableComposition));
            }
            let sim = cosine_similarity(&frame.feature_vector, &last.feature_vector)?;
            if sim < cfg.thres {
                return Ok(Some(KeyframeReason::EmptyFallback));
            }
        }
        if self.frames_since_differing_check >= 2 * n {
            return Ok(Some(KeyframeReason::DriftPeriodic));
        }
        Ok(None)
    }
}

/// Convenience wrapper owning a config and state.
#[derive(Debug, Clone)]
pub struct KeyframeExtractor {
    cfg: EngineConfig,
    state: KeyframeState,
}

impl KeyframeExtractor {
    pub fn new(cfg: EngineConfig) -> Self {
        Self {
            cfg,
            state: KeyframeState::new(),
        }
    }

    pub fn process(&mut self, frame: &FrameRecord) -> Result<KeyframeDecision, KeyframeError> {
        self.state.process(frame, &self.cfg)
    }

    pub fn state(&self) -> &KeyframeState {
        &self.state
    }
}
