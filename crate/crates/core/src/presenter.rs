//! Speech channel with sound-context policies.
//!
//! One utterance plays at a time. Sounds mapped to `Pause` freeze playback
//! until every such sound has ended; sounds mapped to `VolumeHigh` raise the
//! volume while any of them is active. Time is whatever clock the caller
//! passes in, so the same code runs on the simulator's virtual clock.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::config::EngineConfig;
use crate::ranker::Utterance;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SoundPhase {
    Start,
    End,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SoundEvent {
    pub label: String,
    pub phase: SoundPhase,
    pub timestamp: f64,
    #[serde(default = "one")]
    pub confidence: f64,
}

fn one() -> f64 {
    1.0
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SoundAction {
    Pause,
    VolumeHigh,
}

#[derive(Debug, Clone, PartialEq, Error)]
#[error("policy parse error: {0}")]
pub struct PolicyError(String);

/// Label → action map. Labels match case-insensitively.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct SoundPolicy {
    rules: BTreeMap<String, SoundAction>,
}

impl SoundPolicy {
    pub fn empty() -> Self {
        Self {
            rules: BTreeMap::new(),
        }
    }

    pub fn with_rule(mut self, label: &str, action: SoundAction) -> Self {
        self.set(label, action);
        self
    }

    pub fn set(&mut self, label: &str, action: SoundAction) {
        self.rules.insert(label.trim().to_lowercase(), action);
    }

    pub fn action_for(&self, label: &str) -> Option<SoundAction> {
        self.rules.get(&label.trim().to_lowercase()).copied()
    }

    pub fn rules(&self) -> &BTreeMap<String, SoundAction> {
        &self.rules
    }

    /// Policy file: one `label = "pause" | "volume_high"` line per sound.
    pub fn from_toml_str(text: &str) -> Result<Self, PolicyError> {
        let raw: BTreeMap<String, SoundAction> =
            toml::from_str(text).map_err(|e| PolicyError(e.message().to_string()))?;
        let mut policy = Self::empty();
        for (label, action) in raw {
            policy.set(&label, action);
        }
        Ok(policy)
    }
}

impl Default for SoundPolicy {
    fn default() -> Self {
        Self::empty()
            .with_rule("speech", SoundAction::Pause)
            .with_rule("typing", SoundAction::VolumeHigh)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AudioSegment {
    pub start: f64,
    pub end: f64,
    pub volume: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum PresenterAction {
    Pause,
    Resume,
    Volume(f64),
}

/// Handle for a scheduled completion; stale once playback pauses.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CompletionToken(u64);

#[derive(Debug, Clone, PartialEq)]
struct ActiveUtterance {
    utterance: Utterance,
    words: usize,
    started_at: f64,
    remaining_secs: f64,
    playing_since: Option<f64>,
    segments: Vec<AudioSegment>,
}

/// A finished (or, at shutdown, abandoned) utterance.
#[derive(Debug, Clone, PartialEq)]
pub struct SpokenUtterance {
    pub utterance: Utterance,
    pub words: usize,
    pub start: f64,
    pub end: f64,
    pub segments: Vec<AudioSegment>,
    pub completed: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PlaybackState {
    current: Option<ActiveUtterance>,
    paused_by: BTreeSet<String>,
    volume_high_by: BTreeSet<String>,
    volume: f64,
    generation: u64,
    volume_normal: f64,
    volume_high: f64,
    rate: f64,
}

pub fn word_count(text: &str) -> usize {
    text.split_whitespace().count()
}

impl PlaybackState {
    pub fn new(cfg: &EngineConfig) -> Self {
        Self {
            current: None,
            paused_by: BTreeSet::new(),
            volume_high_by: BTreeSet::new(),
            volume: cfg.volume_normal,
            generation: 0,
            volume_normal: cfg.volume_normal,
            volume_high: cfg.volume_high,
            rate: cfg.speaking_rate_wps,
        }
    }

    pub fn is_idle(&self) -> bool {
        self.current.is_none()
    }

    pub fn is_paused(&self) -> bool {
        !self.paused_by.is_empty()
    }

    pub fn paused_by(&self) -> &BTreeSet<String> {
        &self.paused_by
    }

    pub fn volume(&self) -> f64 {
        self.volume
    }

    pub fn current_text(&self) -> Option<&str> {
        self.current.as_ref().map(|c| c.utterance.text.as_str())
    }

    pub fn words_remaining(&self, now: f64) -> Option<f64> {
        self.current.as_ref().map(|c| {
            let played = c.playing_since.map_or(0.0, |s| now - s);
            (c.remaining_secs - played).max(0.0) * self.rate
        })
    }

    fn close_segment(&mut self, now: f64) {
        let volume = self.volume;
        if let Some(cur) = &mut self.current {
            if let Some(since) = cur.playing_since {
                if now > since {
                    cur.segments.push(AudioSegment { start: since, end: now, volume });
                }
            }
        }
    }

    /// Applies a sound event at its own timestamp. Returns the actions taken
    /// and, after a resume, the new completion to schedule.
    pub fn handle_sound(
        &mut self,
        event: &SoundEvent,
        policy: &SoundPolicy,
    ) -> (Vec<PresenterAction>, Option<(f64, CompletionToken)>) {
        let now = event.timestamp;
        let label = event.label.trim().to_lowercase();
        let mut actions = Vec::new();
        let mut schedule = None;
        match (policy.action_for(&label), event.phase) {
            (None, _) => {}
            (Some(SoundAction::Pause), SoundPhase::Start) => {
                let was_paused = self.is_paused();
                self.paused_by.insert(label);
                if !was_paused {
                    self.close_segment(now);
                    if let Some(cur) = &mut self.current {
                        if let Some(since) = cur.playing_since.take() {
                            cur.remaining_secs = (cur.remaining_secs - (now - since)).max(0.0);
                        }
                    }
                    self.generation += 1;
                    actions.push(PresenterAction::Pause);
                }
            }
            (Some(SoundAction::Pause), SoundPhase::End) => {
                if !self.paused_by.remove(&label) {
                    log::warn!("sound `{label}` ended at {now} without a start");
                } else if !self.is_paused() {
                    if let Some(cur) = &mut self.current {
                        cur.playing_since = Some(now);
                        self.generation += 1;
                        schedule = Some((now + cur.remaining_secs, CompletionToken(self.generation)));
                    }
                    actions.push(PresenterAction::Resume);
                }
            }
            (Some(SoundAction::VolumeHigh), SoundPhase::Start) => {
                let was_high = !self.volume_high_by.is_empty();
                self.volume_high_by.insert(label);
                if !was_high {
                    self.set_volume(now, self.volume_high);
                    actions.push(PresenterAction::Volume(self.volume));
                }
            }
            (Some(SoundAction::VolumeHigh), SoundPhase::End) => {
                if !self.volume_high_by.remove(&label) {
                    log::warn!("sound `{label}` ended at {now} without a start");
                } else if self.volume_high_by.is_empty() {
                    self.set_volume(now, self.volume_normal);
                    actions.push(PresenterAction::Volume(self.volume));
                }
            }
        }
        (actions, schedule)
    }

    fn set_volume(&mut self, now: f64, volume: f64) {
        self.close_segment(now);
        self.volume = volume;
        if let Some(cur) = &mut self.current {
            if let Some(since) = cur.playing_since {
                cur.remaining_secs = (cur.remaining_secs - (now - since)).max(0.0);
                cur.playing_since = Some(now);
            }
        }
    }

    /// When idle and not paused, pulls the next utterance from `select` and
    /// starts it. Returns the completion to schedule.
    pub fn tick(
        &mut self,
        now: f64,
        select: impl FnOnce() -> Option<Utterance>,
    ) -> Option<(f64, CompletionToken)> {
        if !self.is_idle() || self.is_paused() {
            return None;
        }
        let utterance = select()?;
        let words = word_count(&utterance.text);
        let duration = words as f64 / self.rate;
        self.generation += 1;
        self.current = Some(ActiveUtterance {
            utterance,
            words,
            started_at: now,
            remaining_secs: duration,
            playing_since: Some(now),
            segments: Vec::new(),
        });
        Some((now + duration, CompletionToken(self.generation)))
    }

    /// Finishes the current utterance if `token` is still live.
    pub fn complete(&mut self, now: f64, token: CompletionToken) -> Option<SpokenUtterance> {
        if token.0 != self.generation || self.is_paused() {
            return None;
        }
        self.close_segment(now);
        let cur = self.current.take()?;
        Some(SpokenUtterance {
            utterance: cur.utterance,
            words: cur.words,
            start: cur.started_at,
            end: now,
            segments: cur.segments,
            completed: true,
        })
    }

    /// Drops whatever is still playing or paused, e.g. at end of input.
    pub fn abandon(&mut self, now: f64) -> Option<SpokenUtterance> {
        self.close_segment(now);
        self.generation += 1;
        let cur = self.current.take()?;
        Some(SpokenUtterance {
            utterance: cur.utterance,
            words: cur.words,
            start: cur.started_at,
            end: now,
            segments: cur.segments,
            completed: false,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::genpipe::Tier;

    fn utt(text: &str) -> Utterance {
        Utterance {
            text: text.into(),
            tier: Tier::Label,
            packet_id: 1,
            referenced_frame_id: 0,
            sentence_index: 0,
            requested_at: 0.0,
            ready_at: 0.1,
        }
    }

    fn sound(label: &str, phase: SoundPhase, t: f64) -> SoundEvent {
        SoundEvent { label: label.into(), phase, timestamp: t, confidence: 1.0 }
    }

    #[test]
    fn duration_follows_word_count() {
        let mut st = PlaybackState::new(&EngineConfig::default());
        let (end, token) = st.tick(1.0, || Some(utt("A desk, a cat"))).unwrap();
        assert!((end - (1.0 + 4.0 / 3.0)).abs() < 1e-12);
        let spoken = st.complete(end, token).unwrap();
        assert_eq!(spoken.words, 4);
        assert_eq!(spoken.segments.len(), 1);
        assert!(st.is_idle());
    }

    #[test]
    fn pause_freezes_and_delays_completion() {
        let policy = SoundPolicy::default();
        let mut st = PlaybackState::new(&EngineConfig::default());
        let (end, token) = st.tick(0.0, || Some(utt("one two three four five six"))).unwrap();
        assert_eq!(end, 2.0);
        let (actions, _) = st.handle_sound(&sound("Speech", SoundPhase::Start, 1.0), &policy);
        assert_eq!(actions, vec![PresenterAction::Pause]);
        assert!((st.words_remaining(1.5).unwrap() - 3.0).abs() < 1e-12);
        // the old completion is void
        assert!(st.complete(end, token).is_none());
        let (actions, sched) = st.handle_sound(&sound("speech", SoundPhase::End, 3.0), &policy);
        assert_eq!(actions, vec![PresenterAction::Resume]);
        let (end2, token2) = sched.unwrap();
        assert!((end2 - 4.0).abs() < 1e-12);
        let spoken = st.complete(end2, token2).unwrap();
        assert_eq!(spoken.segments.len(), 2);
        assert!((spoken.end - spoken.start - (2.0 + 2.0)).abs() < 1e-12);
    }

    #[test]
    fn overlapping_pauses_resume_after_the_last() {
        let policy = SoundPolicy::default().with_rule("doorbell", SoundAction::Pause);
        let mut st = PlaybackState::new(&EngineConfig::default());
        st.tick(0.0, || Some(utt("a b c"))).unwrap();
        st.handle_sound(&sound("speech", SoundPhase::Start, 0.5), &policy);
        let (a, _) = st.handle_sound(&sound("doorbell", SoundPhase::Start, 0.6), &policy);
        assert!(a.is_empty());
        let (a, s) = st.handle_sound(&sound("speech", SoundPhase::End, 0.7), &policy);
        assert!(a.is_empty() && s.is_none());
        let (a, s) = st.handle_sound(&sound("doorbell", SoundPhase::End, 0.9), &policy);
        assert_eq!(a, vec![PresenterAction::Resume]);
        assert!((s.unwrap().0 - 1.4).abs() < 1e-12);
    }

    #[test]
    fn ringtone_raises_volume() {
        let policy = SoundPolicy::default().with_rule("ringtone", SoundAction::VolumeHigh);
        let mut st = PlaybackState::new(&EngineConfig::default());
        let (end, token) = st.tick(0.0, || Some(utt("a b c d e f"))).unwrap();
        let (a, _) = st.handle_sound(&sound("Ringtone", SoundPhase::Start, 0.5), &policy);
        assert_eq!(a, vec![PresenterAction::Volume(1.5)]);
        st.handle_sound(&sound("ringtone", SoundPhase::End, 1.0), &policy);
        let spoken = st.complete(end, token).unwrap();
        let vols: Vec<_> = spoken.segments.iter().map(|s| (s.start, s.end, s.volume)).collect();
        assert_eq!(vols, vec![(0.0, 0.5, 1.0), (0.5, 1.0, 1.5), (1.0, 2.0, 1.0)]);
    }

    #[test]
    fn pause_after_volume_change_keeps_total_duration() {
        let policy = SoundPolicy::default();
        let mut st = PlaybackState::new(&EngineConfig::default());
        st.tick(0.0, || Some(utt("a b c d e f"))).unwrap();
        st.handle_sound(&sound("typing", SoundPhase::Start, 0.5), &policy);
        st.handle_sound(&sound("speech", SoundPhase::Start, 1.0), &policy);
        assert!((st.words_remaining(1.0).unwrap() - 3.0).abs() < 1e-12);
        let (_, sched) = st.handle_sound(&sound("speech", SoundPhase::End, 2.0), &policy);
        let (end, token) = sched.unwrap();
        assert!((end - 3.0).abs() < 1e-12);
        let spoken = st.complete(end, token).unwrap();
        let vols: Vec<_> = spoken.segments.iter().map(|s| (s.start, s.end, s.volume)).collect();
        assert_eq!(vols, vec![(0.0, 0.5, 1.0), (0.5, 1.0, 1.5), (2.0, 3.0, 1.5)]);
    }

    #[test]
    fn unconfigured_and_unmatched_sounds_do_nothing() {
        let policy = SoundPolicy::empty();
        let mut st = PlaybackState::new(&EngineConfig::default());
        let (a, s) = st.handle_sound(&sound("water", SoundPhase::Start, 0.0), &policy);
        assert!(a.is_empty() && s.is_none());
        let (a, _) = st.handle_sound(&sound("speech", SoundPhase::End, 0.0), &SoundPolicy::default());
        assert!(a.is_empty());
        assert!(!st.is_paused());
    }

    #[test]
    fn idle_with_nothing_to_say() {
        let mut st = PlaybackState::new(&EngineConfig::default());
        assert!(st.tick(0.0, || None).is_none());
        assert!(st.is_idle());
    }

    #[test]
    fn paused_presenter_does_not_pull() {
        let mut st = PlaybackState::new(&EngineConfig::default());
        st.handle_sound(&sound("speech", SoundPhase::Start, 0.0), &SoundPolicy::default());
        let mut pulled = false;
        assert!(st
            .tick(0.1, || {
                pulled = true;
                Some(utt("x"))
            })
            .is_none());
        assert!(!pulled);
    }

    #[test]
    fn policy_file() {
        let p = SoundPolicy::from_toml_str("Speech = \"pause\"\nringtone = \"volume_high\"\n").unwrap();
        assert_eq!(p.action_for("speech"), Some(SoundAction::Pause));
        assert_eq!(p.action_for("RINGTONE"), Some(SoundAction::VolumeHigh));
        assert!(SoundPolicy::from_toml_str("speech = \"mute\"").is_err());
    }
}
