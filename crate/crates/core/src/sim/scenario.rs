//! Scenario files: UTF-8, one JSON record per line, each tagged by `kind`.
//!
//! ```text
//! {"kind":"config","n":5}
//! {"kind":"frame","frame_id":0,"timestamp":0.0,"orientation_deg":0.0,"detections":[...],"feature_vector":[1.0,0.0]}
//! {"kind":"output","frame_id":0,"tier":"detailed","sentences":["..."],"scores":[{"sim":0.1,"depth":40.0}]}
//! {"kind":"intent","timestamp":1.0,"text":"find my keys"}
//! {"kind":"sound","label":"speech","phase":"start","timestamp":2.0}
//! {"kind":"annotation","label":"keys","visible_from":0.0,"visible_until":4.0}
//! ```
//!
//! Blank lines and lines starting with `#` are ignored.

use std::collections::{BTreeMap, HashMap};
use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::config::{ConfigOverrides, EngineConfig};
use crate::genpipe::Tier;
use crate::intent::{
    AttributeLevel, IntentDecomposition, IntentKind, RuleBasedDecomposer, VerbosityMode, COCO_CLASSES,
};
use crate::presenter::{SoundAction, SoundEvent, SoundPhase, SoundPolicy};
use crate::provider::{
    DescriptionProvider, DescriptionRequest, DescriptionResponse, IntentDecomposer, ProviderError,
    SentenceEmbedder, SentenceScore, SentenceScorer,
};
use crate::intent::IntentProfile;
use crate::types::FrameRecord;

/// Scripted backend output for one `(frame_id, tier)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScriptedOutput {
    pub frame_id: u64,
    pub tier: Tier,
    #[serde(default)]
    pub sentences: Vec<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub latency: Option<f64>,
    /// Model scores per detailed sentence, in sentence order.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub scores: Option<Vec<SentenceScore>>,
    /// Ground-truth relevance and proximity used only by the priority metric.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub truth: Option<Vec<SentenceScore>>,
    #[serde(default, skip_serializing_if = "std::ops::Not::not")]
    pub refuse: bool,
}

/// A change to the user's intent at a point in time.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct IntentEvent {
    pub timestamp: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub text: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub attribute: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub level: Option<AttributeLevel>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub add: Vec<String>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub remove: Vec<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub verbosity_mode: Option<VerbosityMode>,
    #[serde(default, skip_serializing_if = "std::ops::Not::not")]
    pub clear: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub enum IntentCommand {
    SetText(String),
    Attribute(String, AttributeLevel),
    Classes { add: Vec<String>, remove: Vec<String> },
    Verbosity(VerbosityMode),
    Clear,
}

impl IntentEvent {
    pub fn command(&self) -> Result<IntentCommand, &'static str> {
        let mut forms = Vec::new();
        if let Some(text) = &self.text {
            forms.push(IntentCommand::SetText(text.clone()));
        }
        match (&self.attribute, self.level) {
            (Some(a), Some(l)) => forms.push(IntentCommand::Attribute(a.clone(), l)),
            (None, None) => {}
            _ => return Err("attribute and level must be given together"),
        }
        if !self.add.is_empty() || !self.remove.is_empty() {
            forms.push(IntentCommand::Classes {
                add: self.add.clone(),
                remove: self.remove.clone(),
            });
        }
        if let Some(mode) = self.verbosity_mode {
            forms.push(IntentCommand::Verbosity(mode));
        }
        if self.clear {
            forms.push(IntentCommand::Clear);
        }
        match forms.len() {
            1 => Ok(forms.pop().unwrap()),
            0 => Err("intent record carries no command"),
            _ => Err("intent record carries more than one command"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Annotation {
    pub label: String,
    pub visible_from: f64,
    pub visible_until: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DecompositionScript {
    pub text: String,
    pub intent_kind: IntentKind,
    #[serde(default)]
    pub classes: Vec<String>,
    #[serde(default)]
    pub verbose_attributes: Vec<crate::intent::Attribute>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PolicyRule {
    pub label: String,
    pub action: SoundAction,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DatasetClasses {
    pub classes: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EmbeddingScript {
    pub text: String,
    pub vector: Vec<f64>,
}

/// One line of a scenario file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ScenarioRecord {
    Config(ConfigOverrides),
    Frame(FrameRecord),
    Output(ScriptedOutput),
    Intent(IntentEvent),
    Decomposition(DecompositionScript),
    Sound(SoundEvent),
    Annotation(Annotation),
    Policy(PolicyRule),
    Dataset(DatasetClasses),
    Embedding(EmbeddingScript),
}

#[derive(Debug, Error)]
pub enum ScenarioError {
    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("line {line}: {message}")]
    Line { line: usize, message: String },
    #[error("line {line}: field `{field}`: {message}")]
    Field {
        line: usize,
        field: &'static str,
        message: String,
    },
}

impl ScenarioError {
    pub fn line(&self) -> Option<usize> {
        match self {
            ScenarioError::Io { .. } => None,
            ScenarioError::Line { line, .. } | ScenarioError::Field { line, .. } => Some(*line),
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct Scenario {
    pub config: ConfigOverrides,
    pub frames: Vec<FrameRecord>,
    pub outputs: BTreeMap<(u64, Tier), ScriptedOutput>,
    pub intents: Vec<IntentEvent>,
    pub decompositions: Vec<DecompositionScript>,
    pub sounds: Vec<SoundEvent>,
    pub annotations: Vec<Annotation>,
    pub policy: Option<SoundPolicy>,
    pub dataset: Option<Vec<String>>,
    pub embeddings: Vec<EmbeddingScript>,
    records: Vec<ScenarioRecord>,
}

pub fn load_scenario(path: impl AsRef<Path>) -> Result<Scenario, ScenarioError> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|source| ScenarioError::Io {
        path: path.display().to_string(),
        source,
    })?;
    Scenario::parse(&text)
}

fn field(line: usize, field: &'static str, message: impl Into<String>) -> ScenarioError {
    ScenarioError::Field {
        line,
        field,
        message: message.into(),
    }
}

impl Scenario {
    pub fn parse(text: &str) -> Result<Self, ScenarioError> {
        let mut numbered = Vec::new();
        for (idx, raw) in text.lines().enumerate() {
            let line = idx + 1;
            let trimmed = raw.trim();
            if trimmed.is_empty() || trimmed.starts_with('#') {
                continue;
            }
            let record: ScenarioRecord = serde_json::from_str(trimmed).map_err(|e| ScenarioError::Line {
                line,
                message: e.to_string(),
            })?;
            numbered.push((line, record));
        }
        Self::build(numbered)
    }

    /// Builds and validates a scenario from in-memory records; record `i`
    /// is reported as line `i + 1`.
    pub fn from_records(records: Vec<ScenarioRecord>) -> Result<Self, ScenarioError> {
        Self::build(records.into_iter().enumerate().map(|(i, r)| (i + 1, r)).collect())
    }

    fn build(numbered: Vec<(usize, ScenarioRecord)>) -> Result<Self, ScenarioError> {
        let mut sc = Scenario::default();
        let mut frame_lines = Vec::new();
        let mut timed: Vec<(usize, &'static str, f64)> = Vec::new();
        for (line, record) in &numbered {
            let line = *line;
            match record {
                ScenarioRecord::Config(c) => sc.config = sc.config.merged(c),
                ScenarioRecord::Frame(f) => {
                    sc.frames.push(f.clone());
                    frame_lines.push(line);
                }
                ScenarioRecord::Output(o) => {
                    if o.tier == Tier::Label {
                        return Err(field(line, "tier", "label output is derived from detections"));
                    }
                    if o.sentences.iter().any(|s| s.trim().is_empty()) {
                        return Err(field(line, "sentences", "empty sentence"));
                    }
                    if !o.refuse && o.sentences.is_empty() {
                        return Err(field(line, "sentences", "no sentences and not a refusal"));
                    }
                    if matches!(o.latency, Some(l) if !(l.is_finite() && l >= 0.0)) {
                        return Err(field(line, "latency", "must be a finite non-negative number"));
                    }
                    if o.tier == Tier::Detailed && !o.refuse {
                        match &o.scores {
                            None => return Err(field(line, "scores", "detailed output needs one score per sentence")),
                            Some(s) if s.len() != o.sentences.len() => {
                                return Err(field(
                                    line,
                                    "scores",
                                    format!("{} scores for {} sentences", s.len(), o.sentences.len()),
                                ))
                            }
                            Some(s) if s.iter().any(|s| !(s.depth.is_finite() && s.depth >= 0.0) || !s.sim.is_finite()) => {
                                return Err(field(line, "scores", "depth must be ≥ 0 and scores finite"))
                            }
                            _ => {}
                        }
                    }
                    if let Some(t) = &o.truth {
                        if t.len() != o.sentences.len() {
                            return Err(field(line, "truth", "one truth score per sentence"));
                        }
                    }
                    if sc.outputs.insert((o.frame_id, o.tier), o.clone()).is_some() {
                        return Err(field(line, "frame_id", format!("duplicate {} output for frame {}", o.tier, o.frame_id)));
                    }
                }
                ScenarioRecord::Intent(i) => {
                    if let Err(msg) = i.command() {
                        return Err(ScenarioError::Line { line, message: msg.to_string() });
                    }
                    timed.push((line, "timestamp", i.timestamp));
                    sc.intents.push(i.clone());
                }
                ScenarioRecord::Decomposition(d) => sc.decompositions.push(d.clone()),
                ScenarioRecord::Sound(s) => {
                    if !(0.0..=1.0).contains(&s.confidence) {
                        return Err(field(line, "confidence", "must be in [0,1]"));
                    }
                    timed.push((line, "timestamp", s.timestamp));
                    sc.sounds.push(s.clone());
                }
                ScenarioRecord::Annotation(a) => {
                    if a.visible_until < a.visible_from {
                        return Err(field(line, "visible_until", "window ends before it starts"));
                    }
                    timed.push((line, "visible_from", a.visible_from));
                    timed.push((line, "visible_until", a.visible_until));
                    sc.annotations.push(a.clone());
                }
                ScenarioRecord::Policy(p) => {
                    sc.policy.get_or_insert_with(SoundPolicy::default).set(&p.label, p.action);
                }
                ScenarioRecord::Dataset(d) => {
                    if d.classes.is_empty() {
                        return Err(field(line, "classes", "dataset class list is empty"));
                    }
                    sc.dataset = Some(d.classes.clone());
                }
                ScenarioRecord::Embedding(e) => sc.embeddings.push(e.clone()),
            }
        }

        let cfg = sc.config.apply(EngineConfig::default());
        if let crate::config::ValidationResult::Invalid(v) = cfg.validate() {
            let line = numbered
                .iter()
                .find(|(_, r)| matches!(r, ScenarioRecord::Config(_)))
                .map_or(1, |(l, _)| *l);
            return Err(field(line, v[0].field, v[0].constraint));
        }

        sc.check_frames(&frame_lines, &cfg)?;

        if let (Some(first), Some(last)) = (sc.frames.first(), sc.frames.last()) {
            for (line, name, t) in &timed {
                if *t < first.timestamp - 1e-9 || *t > last.timestamp + 1e-9 {
                    return Err(field(
                        *line,
                        name,
                        format!("{t} outside frame span [{}, {}]", first.timestamp, last.timestamp),
                    ));
                }
            }
        } else if let Some((line, name, _)) = timed.first() {
            return Err(field(*line, name, "timed event in a scenario without frames"));
        }

        for (line, record) in &numbered {
            if let ScenarioRecord::Output(o) = record {
                if !sc.frames.iter().any(|f| f.frame_id == o.frame_id) {
                    return Err(field(*line, "frame_id", format!("no frame {}", o.frame_id)));
                }
            }
        }

        sc.check_sound_alternation(&numbered)?;
        sc.records = numbered.into_iter().map(|(_, r)| r).collect();
        Ok(sc)
    }

    fn check_frames(&self, lines: &[usize], cfg: &EngineConfig) -> Result<(), ScenarioError> {
        let dim = self.frames.first().map(|f| f.feature_vector.len());
        let min_spacing = 1.0 / cfg.fps;
        for (i, f) in self.frames.iter().enumerate() {
            let line = lines[i];
            if !(0.0..360.0).contains(&f.orientation_deg) {
                return Err(field(line, "orientation_deg", "must be in [0, 360)"));
            }
            if !f.timestamp.is_finite() {
                return Err(field(line, "timestamp", "must be finite"));
            }
            if f.feature_vector.is_empty() || f.feature_vector.iter().all(|v| *v == 0.0) {
                return Err(field(line, "feature_vector", "needs at least one nonzero component"));
            }
            if Some(f.feature_vector.len()) != dim {
                return Err(field(line, "feature_vector", "dimension differs from the first frame"));
            }
            if let Some(bad) = f.detections.iter().position(|d| !d.is_valid()) {
                return Err(field(line, "detections", format!("detection {bad} has an invalid bbox or confidence")));
            }
            if i > 0 {
                let prev = &self.frames[i - 1];
                if f.frame_id <= prev.frame_id {
                    return Err(field(line, "frame_id", format!("{} does not increase past {}", f.frame_id, prev.frame_id)));
                }
                if f.timestamp < prev.timestamp {
                    return Err(field(line, "timestamp", "timestamps must not decrease"));
                }
                if f.timestamp - prev.timestamp < min_spacing - 1e-6 {
                    return Err(field(line, "timestamp", format!("frames closer than 1/fps = {min_spacing}")));
                }
            }
        }
        Ok(())
    }

    fn check_sound_alternation(&self, numbered: &[(usize, ScenarioRecord)]) -> Result<(), ScenarioError> {
        let mut sounds: Vec<(usize, &SoundEvent)> = numbered
            .iter()
            .filter_map(|(l, r)| match r {
                ScenarioRecord::Sound(s) => Some((*l, s)),
                _ => None,
            })
            .collect();
        sounds.sort_by(|a, b| a.1.timestamp.total_cmp(&b.1.timestamp));
        let mut active: HashMap<String, bool> = HashMap::new();
        for (line, s) in sounds {
            let on = active.entry(s.label.trim().to_lowercase()).or_insert(false);
            match (s.phase, *on) {
                (SoundPhase::Start, false) => *on = true,
                (SoundPhase::End, true) => *on = false,
                (SoundPhase::Start, true) => return Err(field(line, "phase", format!("`{}` started twice", s.label))),
                (SoundPhase::End, false) => return Err(field(line, "phase", format!("`{}` ended without a start", s.label))),
            }
        }
        Ok(())
    }

    pub fn records(&self) -> &[ScenarioRecord] {
        &self.records
    }

    pub fn to_jsonl(&self) -> String {
        records_to_jsonl(&self.records)
    }

    /// SHA-256 of the canonical serialization; ties transcripts to their
    /// scenario.
    pub fn digest(&self) -> String {
        hex::encode(Sha256::digest(self.to_jsonl().as_bytes()))
    }

    pub fn effective_config(&self, extra: &ConfigOverrides) -> EngineConfig {
        self.config.merged(extra).apply(EngineConfig::default())
    }

    pub fn dataset_classes(&self) -> Vec<String> {
        self.dataset
            .clone()
            .unwrap_or_else(|| COCO_CLASSES.iter().map(|s| s.to_string()).collect())
    }

    pub fn sound_policy(&self) -> SoundPolicy {
        self.policy.clone().unwrap_or_default()
    }

    pub fn output(&self, frame_id: u64, tier: Tier) -> Option<&ScriptedOutput> {
        self.outputs.get(&(frame_id, tier))
    }
}

pub fn records_to_jsonl(records: &[ScenarioRecord]) -> String {
    let mut out = String::new();
    for r in records {
        out.push_str(&serde_json::to_string(r).expect("records serialize"));
        out.push('\n');
    }
    out
}

/// Description backend and sentence scorer answering from the scenario.
pub struct ScriptedProviders<'a> {
    scenario: &'a Scenario,
}

impl<'a> ScriptedProviders<'a> {
    pub fn new(scenario: &'a Scenario) -> Self {
        Self { scenario }
    }
}

impl DescriptionProvider for ScriptedProviders<'_> {
    fn describe(&mut self, request: &DescriptionRequest) -> Result<DescriptionResponse, ProviderError> {
        match self.scenario.output(request.frame_id, request.tier) {
            Some(o) if !o.refuse => Ok(DescriptionResponse {
                sentences: o.sentences.clone(),
                latency: o.latency,
            }),
            Some(_) => Err(ProviderError::Refused(format!("{} for frame {}", request.tier, request.frame_id))),
            None => Err(ProviderError::Refused(format!(
                "no scripted {} output for frame {}",
                request.tier, request.frame_id
            ))),
        }
    }
}

impl SentenceScorer for ScriptedProviders<'_> {
    fn score(
        &mut self,
        frame_id: u64,
        sentences: &[String],
        _profile: &IntentProfile,
    ) -> Result<Vec<SentenceScore>, ProviderError> {
        let out = self
            .scenario
            .output(frame_id, Tier::Detailed)
            .and_then(|o| o.scores.clone())
            .ok_or_else(|| ProviderError::Failed(format!("no scores for frame {frame_id}")))?;
        if out.len() != sentences.len() {
            return Err(ProviderError::Failed("score count mismatch".into()));
        }
        Ok(out)
    }
}

/// Scripted decompositions keyed by normalized text, falling back to the
/// keyword rules.
pub struct ScriptedDecomposer {
    scripts: HashMap<String, IntentDecomposition>,
    fallback: RuleBasedDecomposer,
}

fn intent_key(text: &str) -> String {
    text.split_whitespace().collect::<Vec<_>>().join(" ").to_lowercase()
}

impl ScriptedDecomposer {
    pub fn new(scripts: &[DecompositionScript], vocabulary: &[String]) -> Self {
        Self {
            scripts: scripts
                .iter()
                .map(|d| {
                    (
                        intent_key(&d.text),
                        IntentDecomposition {
                            kind: d.intent_kind,
                            classes: d.classes.clone(),
                            verbose_attributes: d.verbose_attributes.clone(),
                        },
                    )
                })
                .collect(),
            fallback: RuleBasedDecomposer::new(vocabulary.iter().cloned()),
        }
    }
}

impl IntentDecomposer for ScriptedDecomposer {
    fn decompose(&mut self, text: &str) -> Result<IntentDecomposition, ProviderError> {
        match self.scripts.get(&intent_key(text)) {
            Some(d) => Ok(d.clone()),
            None => self.fallback.decompose(text),
        }
    }
}

#[derive(Debug, Clone, Default)]
pub struct ScriptedEmbedder {
    table: HashMap<String, Vec<f64>>,
}

impl ScriptedEmbedder {
    pub fn new(scripts: &[EmbeddingScript]) -> Self {
        Self {
            table: scripts.iter().map(|e| (e.text.clone(), e.vector.clone())).collect(),
        }
    }
}

impl SentenceEmbedder for ScriptedEmbedder {
    fn embed(&self, text: &str) -> Option<Vec<f64>> {
        self.table.get(text).cloned()
    }
}
