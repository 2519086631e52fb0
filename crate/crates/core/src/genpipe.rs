//! Description generation: on every keyframe all three tiers are requested,
//! and completed results wait in the description buffer until selected.

use std::collections::VecDeque;
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::config::EngineConfig;
use crate::intent::{Attribute, AttributeLevel, IntentKind, IntentProfile, VerbosityMode};
use crate::keyframe::{composition_of, KeyframeDecision};
use crate::provider::{
    DescriptionProvider, DescriptionRequest, ProviderError, SentenceScore, SentenceScorer,
};
use crate::ranker::{rank_sentences, RankedSentence};
use crate::types::{Composition, FrameRecord};

/// Description granularity, ordered by richness (and latency).
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Tier {
    Label,
    General,
    Detailed,
}

impl Tier {
    pub const ALL: [Tier; 3] = [Tier::Label, Tier::General, Tier::Detailed];

    pub fn name(&self) -> &'static str {
        match self {
            Tier::Label => "label",
            Tier::General => "general",
            Tier::Detailed => "detailed",
        }
    }
}

impl fmt::Display for Tier {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Length constraint requested from the detailed tier.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Verbosity {
    Concise,
    Normal,
    Verbose,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DescriptionPacket {
    pub packet_id: u64,
    pub tier: Tier,
    pub sentences: Vec<String>,
    pub referenced_frame_id: u64,
    pub referenced_orientation_deg: f64,
    pub referenced_composition: Composition,
    pub referenced_feature_vector: Vec<f64>,
    pub requested_at: f64,
    pub ready_at: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub verbosity_used: Option<Verbosity>,
    /// One score per sentence, detailed tier only.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub scores: Option<Vec<SentenceScore>>,
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum GenError {
    #[error("label phrase needs a nonempty composition")]
    EmptyComposition,
    #[error("on_keyframe called for a non-keyframe")]
    NotKeyframe,
    #[error("packet {0} is already buffered")]
    DuplicatePacket(u64),
    #[error("packet {packet_id} is not ready until {ready_at} (now {now})")]
    NotReady { packet_id: u64, ready_at: f64, now: f64 },
    #[error("detailed packet {0} carries {1} scores for {2} sentences")]
    ScoreMismatch(u64, usize, usize),
    #[error(transparent)]
    Provider(#[from] ProviderError),
}

/// A buffered packet together with the sentences still to be spoken, in
/// speaking order.
#[derive(Debug, Clone, PartialEq)]
pub struct BufferedPacket {
    pub packet: DescriptionPacket,
    pub remaining: VecDeque<usize>,
}

impl BufferedPacket {
    pub fn is_exhausted(&self) -> bool {
        self.remaining.is_empty()
    }
}

#[derive(Debug, Clone)]
pub struct DescriptionBuffer {
    packets: Vec<BufferedPacket>,
    spoken_history: VecDeque<String>,
    history_window: usize,
    split_threshold: f64,
}

impl DescriptionBuffer {
    pub fn new(cfg: &EngineConfig) -> Self {
        Self {
            packets: Vec::new(),
            spoken_history: VecDeque::new(),
            history_window: cfg.spoken_history_window,
            split_threshold: cfg.sim_split_threshold,
        }
    }

    /// Buffers a completed packet. Detailed sentences are ranked here, once.
    pub fn on_result(&mut self, packet: DescriptionPacket, now: f64) -> Result<(), GenError> {
        if packet.ready_at > now {
            return Err(GenError::NotReady {
                packet_id: packet.packet_id,
                ready_at: packet.ready_at,
                now,
            });
        }
        if self.contains(packet.packet_id) {
            return Err(GenError::DuplicatePacket(packet.packet_id));
        }
        let remaining: VecDeque<usize> = match (&packet.tier, &packet.scores) {
            (Tier::Detailed, Some(scores)) => {
                if scores.len() != packet.sentences.len() {
                    return Err(GenError::ScoreMismatch(
                        packet.packet_id,
                        scores.len(),
                        packet.sentences.len(),
                    ));
                }
                let ranked: Vec<RankedSentence> = packet
                    .sentences
                    .iter()
                    .zip(scores)
                    .enumerate()
                    .map(|(i, (text, s))| RankedSentence::new(text.clone(), s.sim, s.depth, i))
                    .collect();
                rank_sentences(&ranked, self.split_threshold)
                    .into_iter()
                    .map(|r| r.source_index)
                    .collect()
            }
            _ => (0..packet.sentences.len()).collect(),
        };
        // stable: equal ready_at keeps arrival order
        let at = self
            .packets
            .partition_point(|p| p.packet.ready_at <= packet.ready_at);
        self.packets.insert(at, BufferedPacket { packet, remaining });
        Ok(())
    }

    pub fn contains(&self, packet_id: u64) -> bool {
        self.packets.iter().any(|p| p.packet.packet_id == packet_id)
    }

    pub fn packets(&self) -> &[BufferedPacket] {
        &self.packets
    }

    pub fn len(&self) -> usize {
        self.packets.len()
    }

    pub fn is_empty(&self) -> bool {
        self.packets.is_empty()
    }

    pub fn spoken_history(&self) -> &VecDeque<String> {
        &self.spoken_history
    }

    pub fn record_spoken(&mut self, text: &str) {
        self.spoken_history.push_back(text.to_string());
        while self.spoken_history.len() > self.history_window {
            self.spoken_history.pop_front();
        }
    }

    pub(crate) fn get_mut(&mut self, packet_id: u64) -> Option<&mut BufferedPacket> {
        self.packets.iter_mut().find(|p| p.packet.packet_id == packet_id)
    }

    /// Removes every packet matching `pred`, returning the removed ids in
    /// buffer order.
    pub(crate) fn remove_where(&mut self, mut pred: impl FnMut(&BufferedPacket) -> bool) -> Vec<u64> {
        let mut removed = Vec::new();
        self.packets.retain(|p| {
            if pred(p) {
                removed.push(p.packet.packet_id);
                false
            } else {
                true
            }
        });
        removed
    }
}

/// Detailed-tier length constraint for the current context.
///
/// A manual verbosity mode always wins. In adaptive mode a detail trigger
/// asks for verbose output, and a run of two or more keyframes that each
/// show several intent-relevant classes asks for concise output.
pub fn select_verbosity(profile: &IntentProfile, trigger: bool, intent_hits_streak: usize) -> Verbosity {
    match profile.verbosity_mode {
        VerbosityMode::Concise => Verbosity::Concise,
        VerbosityMode::Normal => Verbosity::Normal,
        VerbosityMode::Verbose => Verbosity::Verbose,
        VerbosityMode::Adaptive if trigger => Verbosity::Verbose,
        VerbosityMode::Adaptive if intent_hits_streak >= 2 => Verbosity::Concise,
        VerbosityMode::Adaptive => Verbosity::Normal,
    }
}

fn example_adjectives(attr: Attribute) -> &'static str {
    match attr {
        Attribute::Color => "red, silver, pale blue",
        Attribute::Texture => "smooth, rough, glossy",
        Attribute::Material => "wooden, metallic, woven",
        Attribute::Shape => "round, rectangular, slender",
        Attribute::Spatial => "left of, behind, next to",
    }
}

pub fn length_constraint(verbosity: Verbosity) -> &'static str {
    match verbosity {
        Verbosity::Verbose => "over 15 words",
        Verbosity::Normal => "at least 10 words",
        Verbosity::Concise => "less than 5 words",
    }
}

/// Attribute slot of the prompt: verbose attributes first, then normal ones,
/// disabled attributes left out.
pub fn attribute_slot(profile: &IntentProfile) -> String {
    let pick = |level: AttributeLevel| {
        Attribute::ALL
            .into_iter()
            .filter(move |a| profile.level(*a) == level)
    };
    pick(AttributeLevel::Verbose)
        .chain(pick(AttributeLevel::Normal))
        .map(|a| format!("{} (e.g., {})", a.name(), example_adjectives(a)))
        .collect::<Vec<_>>()
        .join(", ")
}

pub fn build_prompt(profile: &IntentProfile, verbosity: Verbosity) -> String {
    format!(
        "You are a helpful visual describer, who can see and describe for BVI people. \
         You will not mention this is an image; just describe it, and also don't mention \
         camera blur or motion. Please ensure you provide these adjectives to enrich the \
         descriptions [{}], you should describe each object with ONLY ONE sentence at maximum. \
         Don't use 'it' to refer to an object. Most importantly, each sentence should be {}.",
        attribute_slot(profile),
        length_constraint(verbosity)
    )
}

fn with_article(label: &str) -> String {
    let vowel = label
        .chars()
        .next()
        .is_some_and(|c| matches!(c.to_ascii_lowercase(), 'a' | 'e' | 'i' | 'o' | 'u'));
    format!("{} {}", if vowel { "an" } else { "a" }, label)
}

/// Short object list such as `"A desk, a cabinet, and a cat"`.
pub fn format_label_phrase(comp: &Composition) -> Result<String, GenError> {
    let items: Vec<String> = comp.class_labels().into_iter().map(with_article).collect();
    let mut phrase = match items.as_slice() {
        [] => return Err(GenError::EmptyComposition),
        [only] => only.clone(),
        [init @ .., last] => format!("{}, and {}", init.join(", "), last),
    };
    if let Some(first) = phrase.get(..1) {
        let upper = first.to_ascii_uppercase();
        phrase.replace_range(..1, &upper);
    }
    Ok(phrase)
}

/// Result of dispatching one keyframe.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct KeyframeDispatch {
    /// Packets that will complete at their `ready_at`.
    pub pending: Vec<DescriptionPacket>,
    pub dropped: Vec<(Tier, String)>,
    pub verbosity: Option<Verbosity>,
}

/// Issues the three tier requests for each keyframe.
#[derive(Debug, Clone)]
pub struct DescriptionGenerator {
    cfg: EngineConfig,
    next_packet_id: u64,
    intent_hits_streak: usize,
}

impl DescriptionGenerator {
    pub fn new(cfg: EngineConfig) -> Self {
        Self {
            cfg,
            next_packet_id: 1,
            intent_hits_streak: 0,
        }
    }

    pub fn intent_hits_streak(&self) -> usize {
        self.intent_hits_streak
    }

    fn packet(&mut self, tier: Tier, frame: &FrameRecord, comp: &Composition, now: f64, latency: f64) -> DescriptionPacket {
        let packet_id = self.next_packet_id;
        self.next_packet_id += 1;
        DescriptionPacket {
            packet_id,
            tier,
            sentences: Vec::new(),
            referenced_frame_id: frame.frame_id,
            referenced_orientation_deg: frame.orientation_deg,
            referenced_composition: comp.clone(),
            referenced_feature_vector: frame.feature_vector.clone(),
            requested_at: now,
            ready_at: now + latency.max(0.0),
            verbosity_used: None,
            scores: None,
        }
    }

    /// Starts all description tasks for a keyframe. In-flight requests from
    /// earlier keyframes are never cancelled; a tier whose provider refuses
    /// is dropped without affecting the others.
    pub fn on_keyframe(
        &mut self,
        decision: &KeyframeDecision,
        frame: &FrameRecord,
        profile: &IntentProfile,
        describer: &mut dyn DescriptionProvider,
        scorer: &mut dyn SentenceScorer,
        now: f64,
    ) -> Result<KeyframeDispatch, GenError> {
        if !decision.is_keyframe() {
            return Err(GenError::NotKeyframe);
        }
        let comp = composition_of(&frame.detections);
        let mut out = KeyframeDispatch::default();

        let hits = if profile.kind == IntentKind::Specific {
            comp.class_labels()
                .into_iter()
                .filter(|c| profile.is_relevant(c))
                .count()
        } else {
            0
        };
        self.intent_hits_streak = if hits >= 2 { self.intent_hits_streak + 1 } else { 0 };

        match format_label_phrase(&comp) {
            Ok(phrase) => {
                let mut p = self.packet(Tier::Label, frame, &comp, now, self.cfg.tier_latencies.label);
                p.sentences.push(phrase);
                out.pending.push(p);
            }
            Err(e) => out.dropped.push((Tier::Label, e.to_string())),
        }

        let general = DescriptionRequest {
            frame_id: frame.frame_id,
            tier: Tier::General,
            prompt: None,
        };
        match describer.describe(&general) {
            Ok(resp) if resp.sentences.iter().any(|s| !s.trim().is_empty()) => {
                let latency = resp.latency.unwrap_or(self.cfg.tier_latencies.general);
                let mut p = self.packet(Tier::General, frame, &comp, now, latency);
                let joined = resp
                    .sentences
                    .iter()
                    .map(|s| s.trim())
                    .filter(|s| !s.is_empty())
                    .collect::<Vec<_>>()
                    .join(" ");
                p.sentences.push(joined);
                out.pending.push(p);
            }
            Ok(_) => out.dropped.push((Tier::General, "empty response".into())),
            Err(e) => out.dropped.push((Tier::General, e.to_string())),
        }

        let verbosity = select_verbosity(profile, decision.detail_trigger(), self.intent_hits_streak);
        out.verbosity = Some(verbosity);
        let detailed = DescriptionRequest {
            frame_id: frame.frame_id,
            tier: Tier::Detailed,
            prompt: Some(build_prompt(profile, verbosity)),
        };
        let response = describer.describe(&detailed).and_then(|resp| {
            let sentences: Vec<String> = resp
                .sentences
                .iter()
                .map(|s| s.trim().to_string())
                .filter(|s| !s.is_empty())
                .collect();
            let scores = scorer.score(frame.frame_id, &sentences, profile)?;
            Ok((resp.latency, sentences, scores))
        });
        match response {
            Ok((_, sentences, _)) if sentences.is_empty() => {
                out.dropped.push((Tier::Detailed, "empty response".into()))
            }
            Ok((_, sentences, scores)) if scores.len() != sentences.len() => out.dropped.push((
                Tier::Detailed,
                format!("{} scores for {} sentences", scores.len(), sentences.len()),
            )),
            Ok((latency, sentences, scores)) => {
                let latency = latency.unwrap_or(self.cfg.tier_latencies.detailed);
                let mut p = self.packet(Tier::Detailed, frame, &comp, now, latency);
                p.sentences = sentences;
                p.scores = Some(scores);
                p.verbosity_used = Some(verbosity);
                out.pending.push(p);
            }
            Err(e) => out.dropped.push((Tier::Detailed, e.to_string())),
        }
        Ok(out)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::intent::default_profile;
    use crate::keyframe::KeyframeReason;
    use crate::provider::DescriptionResponse;
    use crate::types::Detection;

    struct Canned {
        refuse: Vec<Tier>,
    }

    impl DescriptionProvider for Canned {
        fn describe(&mut self, req: &DescriptionRequest) -> Result<crate::provider::DescriptionResponse, ProviderError> {
            if self.refuse.contains(&req.tier) {
                return Err(ProviderError::Refused(req.tier.to_string()));
            }
            let sentences = match req.tier {
                Tier::General => vec!["A cat sits on a desk.".to_string()],
                _ => vec!["A white desk.".to_string(), "A grey cat.".to_string()],
            };
            Ok(DescriptionResponse { sentences, latency: None })
        }
    }

    struct FlatScores;

    impl SentenceScorer for FlatScores {
        fn score(&mut self, _f: u64, s: &[String], _p: &IntentProfile) -> Result<Vec<SentenceScore>, ProviderError> {
            Ok(s.iter().map(|_| SentenceScore { sim: 0.0, depth: 1.0 }).collect())
        }
    }

    fn kf() -> KeyframeDecision {
        KeyframeDecision::Keyframe { reason: KeyframeReason::Bootstrap, detail_trigger: false }
    }

    fn office_frame(id: u64) -> FrameRecord {
        FrameRecord {
            frame_id: id,
            timestamp: 0.0,
            orientation_deg: 0.0,
            detections: vec![Detection::new(1, "desk"), Detection::new(2, "cat")],
            feature_vector: vec![1.0],
        }
    }

    fn profile_with(levels: &[(Attribute, AttributeLevel)], mode: VerbosityMode) -> IntentProfile {
        let mut p = IntentProfile::default().with_verbosity_mode(mode);
        for (a, l) in levels {
            p = p.apply_attribute_command(a.name(), *l).unwrap();
        }
        p
    }

    #[test]
    fn verbosity_selection() {
        let adaptive = IntentProfile::default();
        assert_eq!(select_verbosity(&adaptive, true, 0), Verbosity::Verbose);
        assert_eq!(select_verbosity(&adaptive, false, 0), Verbosity::Normal);
        assert_eq!(select_verbosity(&adaptive, false, 1), Verbosity::Normal);
        assert_eq!(select_verbosity(&adaptive, false, 2), Verbosity::Concise);
        let concise = adaptive.with_verbosity_mode(VerbosityMode::Concise);
        assert_eq!(select_verbosity(&concise, true, 0), Verbosity::Concise);
    }

    #[test]
    fn prompt_length_constraints() {
        let p = profile_with(
            &[(Attribute::Color, AttributeLevel::Verbose), (Attribute::Spatial, AttributeLevel::Verbose)],
            VerbosityMode::Adaptive,
        );
        let prompt = build_prompt(&p, Verbosity::Verbose);
        assert!(prompt.contains("over 15 words"));
        assert!(prompt.starts_with("You are a helpful visual describer"));
        // verbose attributes lead the slot
        let slot = attribute_slot(&p);
        assert!(slot.starts_with("color (e.g."), "{slot}");
        assert!(slot.find("spatial").unwrap() < slot.find("texture").unwrap());

        assert!(build_prompt(&IntentProfile::default(), Verbosity::Normal).contains("at least 10 words"));
    }

    #[test]
    fn prompt_with_everything_disabled() {
        let all_off: Vec<_> = Attribute::ALL.iter().map(|a| (*a, AttributeLevel::Disabled)).collect();
        let p = profile_with(&all_off, VerbosityMode::Adaptive);
        let prompt = build_prompt(&p, Verbosity::Concise);
        assert!(prompt.contains("descriptions [],"));
        assert!(prompt.contains("less than 5 words"));
    }

    #[test]
    fn prompt_never_mentions_disabled_attributes() {
        let p = profile_with(&[(Attribute::Texture, AttributeLevel::Disabled)], VerbosityMode::Adaptive);
        for v in [Verbosity::Concise, Verbosity::Normal, Verbosity::Verbose] {
            let prompt = build_prompt(&p, v);
            assert!(!prompt.contains("texture"));
            let constraints = ["over 15 words", "at least 10 words", "less than 5 words"];
            assert_eq!(constraints.iter().filter(|c| prompt.contains(*c)).count(), 1);
        }
    }

    #[test]
    fn label_phrases() {
        let office = Composition::from_members([(1, "desk"), (2, "cabinet"), (3, "printer"), (4, "cat")]);
        assert_eq!(format_label_phrase(&office).unwrap(), "A desk, a cabinet, a printer, and a cat");
        assert_eq!(format_label_phrase(&Composition::from_members([(1, "apple")])).unwrap(), "An apple");
        let cats = Composition::from_members([(1, "cat"), (2, "cat"), (3, "desk")]);
        assert_eq!(format_label_phrase(&cats).unwrap(), "A cat, and a desk");
        assert_eq!(format_label_phrase(&Composition::new()), Err(GenError::EmptyComposition));
    }

    #[test]
    fn keyframe_issues_three_requests_at_tier_latencies() {
        let cfg = EngineConfig::default();
        let mut gen = DescriptionGenerator::new(cfg);
        let d = gen
            .on_keyframe(&kf(), &office_frame(0), &IntentProfile::default(), &mut Canned { refuse: vec![] }, &mut FlatScores, 10.0)
            .unwrap();
        let ready: Vec<_> = d.pending.iter().map(|p| (p.tier, p.ready_at)).collect();
        assert_eq!(
            ready,
            vec![(Tier::Label, 10.0 + 0.1), (Tier::General, 10.0 + 2.87), (Tier::Detailed, 10.0 + 8.78)]
        );
        assert!(d.pending.windows(2).all(|w| w[0].ready_at < w[1].ready_at));
        assert_eq!(d.pending[0].sentences, vec!["A desk, and a cat".to_string()]);
        assert_eq!(d.pending[2].verbosity_used, Some(Verbosity::Normal));
    }

    #[test]
    fn consecutive_keyframes_accumulate_requests() {
        let mut gen = DescriptionGenerator::new(EngineConfig::default());
        let mut all = Vec::new();
        for (i, t) in [(0, 0.0), (3, 0.5)] {
            let d = gen
                .on_keyframe(&kf(), &office_frame(i), &IntentProfile::default(), &mut Canned { refuse: vec![] }, &mut FlatScores, t)
                .unwrap();
            all.extend(d.pending);
        }
        assert_eq!(all.len(), 6);
        let mut ids: Vec<_> = all.iter().map(|p| p.packet_id).collect();
        ids.dedup();
        assert_eq!(ids.len(), 6);
    }

    #[test]
    fn refused_tier_is_dropped_alone() {
        let mut gen = DescriptionGenerator::new(EngineConfig::default());
        let d = gen
            .on_keyframe(
                &kf(),
                &office_frame(0),
                &IntentProfile::default(),
                &mut Canned { refuse: vec![Tier::Detailed] },
                &mut FlatScores,
                0.0,
            )
            .unwrap();
        assert_eq!(d.pending.len(), 2);
        assert_eq!(d.dropped.len(), 1);
        assert_eq!(d.dropped[0].0, Tier::Detailed);
    }

    #[test]
    fn not_a_keyframe_is_an_error() {
        let mut gen = DescriptionGenerator::new(EngineConfig::default());
        let res = gen.on_keyframe(
            &KeyframeDecision::NotKeyframe,
            &office_frame(0),
            &IntentProfile::default(),
            &mut Canned { refuse: vec![] },
            &mut FlatScores,
            0.0,
        );
        assert_eq!(res, Err(GenError::NotKeyframe));
    }

    #[test]
    fn intent_hits_drive_concise_mode() {
        let mut gen = DescriptionGenerator::new(EngineConfig::default());
        let mut profile = default_profile(&["desk".to_string(), "cat".to_string()]).unwrap();
        profile.kind = IntentKind::Specific;
        profile.raw_text = "find the cat".into();
        let mut verbosities = Vec::new();
        for i in 0..3 {
            let d = gen
                .on_keyframe(&kf(), &office_frame(i), &profile, &mut Canned { refuse: vec![] }, &mut FlatScores, i as f64)
                .unwrap();
            verbosities.push(d.verbosity.unwrap());
        }
        assert_eq!(verbosities, vec![Verbosity::Normal, Verbosity::Concise, Verbosity::Concise]);
    }

    fn packet(id: u64, ready_at: f64) -> DescriptionPacket {
        DescriptionPacket {
            packet_id: id,
            tier: Tier::Label,
            sentences: vec!["A cat".into()],
            referenced_frame_id: id,
            referenced_orientation_deg: 0.0,
            referenced_composition: Composition::new(),
            referenced_feature_vector: vec![1.0],
            requested_at: 0.0,
            ready_at,
            verbosity_used: None,
            scores: None,
        }
    }

    #[test]
    fn buffer_orders_by_ready_time_and_rejects_duplicates() {
        let mut buf = DescriptionBuffer::new(&EngineConfig::default());
        buf.on_result(packet(1, 3.0), 5.0).unwrap();
        assert_eq!(buf.len(), 1);
        buf.on_result(packet(2, 1.5), 5.0).unwrap();
        let order: Vec<_> = buf.packets().iter().map(|p| p.packet.ready_at).collect();
        assert_eq!(order, vec![1.5, 3.0]);
        assert_eq!(buf.on_result(packet(1, 3.0), 5.0), Err(GenError::DuplicatePacket(1)));
        assert!(matches!(buf.on_result(packet(3, 9.0), 5.0), Err(GenError::NotReady { .. })));
    }

    #[test]
    fn history_is_bounded() {
        let mut buf = DescriptionBuffer::new(&EngineConfig::default());
        for i in 0..8 {
            buf.record_spoken(&format!("line {i}"));
        }
        assert_eq!(buf.spoken_history().len(), 5);
        assert_eq!(buf.spoken_history().front().unwrap(), "line 3");
    }
}
