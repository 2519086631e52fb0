//! Deterministic discrete-event replay of a scenario on a virtual clock.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use crate::config::EngineConfig;
use crate::genpipe::{DescriptionBuffer, DescriptionGenerator, DescriptionPacket};
use crate::intent::{default_profile, IntentProfile};
use crate::keyframe::{composition_of, KeyframeDecision, KeyframeState};
use crate::presenter::{CompletionToken, PlaybackState, PresenterAction, SoundPolicy, SpokenUtterance};
use crate::ranker::{select_next, FreshnessContext};

use super::scenario::{IntentCommand, Scenario, ScriptedDecomposer, ScriptedEmbedder, ScriptedProviders};
use super::transcript::{Transcript, TranscriptRecord, UtteranceRecord};

enum Event {
    Frame(usize),
    Ready(Box<DescriptionPacket>),
    SpeechDone(CompletionToken),
    Intent(usize),
    Sound(usize),
}

impl Event {
    fn class(&self) -> u8 {
        match self {
            Event::Frame(_) => 0,
            Event::Ready(_) => 1,
            Event::SpeechDone(_) => 2,
            Event::Intent(_) => 3,
            Event::Sound(_) => 4,
        }
    }
}

struct Queued {
    time: f64,
    class: u8,
    seq: u64,
    event: Event,
}

impl PartialEq for Queued {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for Queued {}

impl PartialOrd for Queued {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

// Reversed so the max-heap pops the earliest event.
impl Ord for Queued {
    fn cmp(&self, other: &Self) -> Ordering {
        other
            .time
            .total_cmp(&self.time)
            .then(other.class.cmp(&self.class))
            .then(other.seq.cmp(&self.seq))
    }
}

struct Sim<'a> {
    scenario: &'a Scenario,
    cfg: &'a EngineConfig,
    queue: BinaryHeap<Queued>,
    seq: u64,
    keyframes: KeyframeState,
    generator: DescriptionGenerator,
    buffer: DescriptionBuffer,
    presenter: PlaybackState,
    profile: IntentProfile,
    policy: SoundPolicy,
    decomposer: ScriptedDecomposer,
    embedder: ScriptedEmbedder,
    ctx: Option<FreshnessContext>,
    transcript: Transcript,
}

/// Replays `scenario` under `cfg` and returns the transcript. The output
/// depends only on the inputs.
pub fn run(scenario: &Scenario, cfg: &EngineConfig) -> Transcript {
    let dataset = scenario.dataset_classes();
    let mut sim = Sim {
        scenario,
        cfg,
        queue: BinaryHeap::new(),
        seq: 0,
        keyframes: KeyframeState::new(),
        generator: DescriptionGenerator::new(cfg.clone()),
        buffer: DescriptionBuffer::new(cfg),
        presenter: PlaybackState::new(cfg),
        profile: default_profile(&dataset).expect("scenario dataset is nonempty"),
        policy: scenario.sound_policy(),
        decomposer: ScriptedDecomposer::new(&scenario.decompositions, &dataset),
        embedder: ScriptedEmbedder::new(&scenario.embeddings),
        ctx: None,
        transcript: Transcript::new(scenario.digest(), cfg.clone()),
    };
    for (i, f) in scenario.frames.iter().enumerate() {
        sim.schedule(f.timestamp, Event::Frame(i));
    }
    for (i, e) in scenario.intents.iter().enumerate() {
        sim.schedule(e.timestamp, Event::Intent(i));
    }
    for (i, s) in scenario.sounds.iter().enumerate() {
        sim.schedule(s.timestamp, Event::Sound(i));
    }
    sim.run_to_end();
    sim.transcript.finish();
    sim.transcript
}

impl Sim<'_> {
    fn schedule(&mut self, time: f64, event: Event) {
        self.seq += 1;
        self.queue.push(Queued {
            time,
            class: event.class(),
            seq: self.seq,
            event,
        });
    }

    fn run_to_end(&mut self) {
        let mut now = f64::NEG_INFINITY;
        while let Some(next) = self.queue.peek().map(|q| q.time) {
            debug_assert!(next >= now, "virtual clock went backwards");
            now = next;
            while self.queue.peek().is_some_and(|q| q.time == now) {
                let q = self.queue.pop().expect("peeked");
                self.handle(q.event, now);
            }
            self.tick(now);
        }
        if now.is_finite() {
            if let Some(spoken) = self.presenter.abandon(now) {
                self.record_utterance(spoken);
            }
        }
    }

    fn handle(&mut self, event: Event, now: f64) {
        match event {
            Event::Frame(i) => self.on_frame(i, now),
            Event::Ready(packet) => {
                if let Err(e) = self.buffer.on_result(*packet, now) {
                    log::warn!("dropping completed packet: {e}");
                }
            }
            Event::SpeechDone(token) => {
                if let Some(spoken) = self.presenter.complete(now, token) {
                    self.buffer.record_spoken(&spoken.utterance.text);
                    self.record_utterance(spoken);
                }
            }
            Event::Intent(i) => self.on_intent(i, now),
            Event::Sound(i) => self.on_sound(i),
        }
    }

    fn on_frame(&mut self, i: usize, now: f64) {
        let frame = &self.scenario.frames[i];
        let decision = match self.keyframes.process(frame, self.cfg) {
            Ok(d) => d,
            Err(e) => {
                log::warn!("frame {} skipped: {e}", frame.frame_id);
                return;
            }
        };
        self.ctx = Some(FreshnessContext {
            current_composition: composition_of(&frame.detections),
            current_orientation_deg: frame.orientation_deg,
            current_feature_vector: frame.feature_vector.clone(),
        });
        let KeyframeDecision::Keyframe { reason, detail_trigger } = decision else {
            return;
        };
        self.transcript.push(TranscriptRecord::Keyframe {
            t: now,
            frame_id: frame.frame_id,
            reason,
            detail_trigger,
        });
        let dispatch = match self.generator.on_keyframe(
            &decision,
            frame,
            &self.profile,
            &mut ScriptedProviders::new(self.scenario),
            &mut ScriptedProviders::new(self.scenario),
            now,
        ) {
            Ok(d) => d,
            Err(e) => {
                log::warn!("keyframe {} not dispatched: {e}", frame.frame_id);
                return;
            }
        };
        for (tier, reason) in dispatch.dropped {
            self.transcript.push(TranscriptRecord::Dropped {
                t: now,
                tier,
                frame_id: frame.frame_id,
                reason,
            });
        }
        for packet in dispatch.pending {
            self.transcript.push(TranscriptRecord::Request {
                t: now,
                packet_id: packet.packet_id,
                tier: packet.tier,
                frame_id: packet.referenced_frame_id,
                requested_at: packet.requested_at,
                ready_at: packet.ready_at,
                verbosity: packet.verbosity_used,
            });
            self.schedule(packet.ready_at, Event::Ready(Box::new(packet)));
        }
    }

    fn on_intent(&mut self, i: usize, now: f64) {
        let event = &self.scenario.intents[i];
        let result = match event.command().expect("validated on load") {
            IntentCommand::SetText(text) => self
                .profile
                .set_intent(&text, &mut self.decomposer)
                .map(|p| (p, format!("intent `{text}`"))),
            IntentCommand::Attribute(attr, level) => self
                .profile
                .apply_attribute_command(&attr, level)
                .map(|p| (p, format!("{attr} {level:?}").to_lowercase())),
            IntentCommand::Classes { add, remove } => self
                .profile
                .merge_classes(&add, &remove)
                .map(|p| (p, format!("classes +{add:?} -{remove:?}"))),
            IntentCommand::Verbosity(mode) => Ok((
                self.profile.with_verbosity_mode(mode),
                format!("verbosity {mode:?}").to_lowercase(),
            )),
            IntentCommand::Clear => Ok((self.profile.clear_intent(), "cleared".to_string())),
        };
        let record = match result {
            Ok((profile, detail)) => {
                self.profile = profile;
                TranscriptRecord::IntentUpdate { t: now, ok: true, detail }
            }
            Err(e) => TranscriptRecord::IntentUpdate {
                t: now,
                ok: false,
                detail: e.to_string(),
            },
        };
        self.transcript.push(record);
    }

    fn on_sound(&mut self, i: usize) {
        let event = &self.scenario.sounds[i];
        let (actions, schedule) = self.presenter.handle_sound(event, &self.policy);
        let t = event.timestamp;
        let label = event.label.trim().to_lowercase();
        for action in actions {
            let label = label.clone();
            self.transcript.push(match action {
                PresenterAction::Pause => TranscriptRecord::Pause { t, label },
                PresenterAction::Resume => TranscriptRecord::Resume { t, label },
                PresenterAction::Volume(volume) => TranscriptRecord::Volume { t, label, volume },
            });
        }
        if let Some((at, token)) = schedule {
            self.schedule(at, Event::SpeechDone(token));
        }
    }

    fn tick(&mut self, now: f64) {
        let Some(ctx) = &self.ctx else { return };
        let buffer = &mut self.buffer;
        let transcript = &mut self.transcript;
        let embedder = &self.embedder;
        let cfg = self.cfg;
        let started = self.presenter.tick(now, || {
            let sel = select_next(buffer, ctx, embedder, cfg, now);
            if !sel.evicted.is_empty() {
                transcript.push(TranscriptRecord::Eviction {
                    t: now,
                    packet_ids: sel.evicted,
                });
            }
            for (packet_id, sentence_index) in sel.skipped {
                transcript.push(TranscriptRecord::Skip {
                    t: now,
                    packet_id,
                    sentence_index,
                });
            }
            sel.utterance
        });
        if let Some((at, token)) = started {
            self.schedule(at, Event::SpeechDone(token));
        }
    }

    fn record_utterance(&mut self, spoken: SpokenUtterance) {
        let u = spoken.utterance;
        self.transcript.push(TranscriptRecord::Utterance(UtteranceRecord {
            t: spoken.start,
            text: u.text,
            tier: u.tier,
            packet_id: u.packet_id,
            frame_id: u.referenced_frame_id,
            sentence_index: u.sentence_index,
            requested_at: u.requested_at,
            start: spoken.start,
            end: spoken.end,
            words: spoken.words,
            segments: spoken.segments,
            completed: spoken.completed,
        }));
    }
}
