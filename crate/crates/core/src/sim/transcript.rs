//! Run transcripts: a header line followed by time-ordered JSON records.

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::config::EngineConfig;
use crate::genpipe::{Tier, Verbosity};
use crate::keyframe::KeyframeReason;
use crate::presenter::AudioSegment;

pub const TRANSCRIPT_FORMAT: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TranscriptHeader {
    pub format: u32,
    pub scenario_digest: String,
    pub config: EngineConfig,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct UtteranceRecord {
    pub t: f64,
    pub text: String,
    pub tier: Tier,
    pub packet_id: u64,
    pub frame_id: u64,
    pub sentence_index: usize,
    pub requested_at: f64,
    pub start: f64,
    pub end: f64,
    pub words: usize,
    pub segments: Vec<AudioSegment>,
    pub completed: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum TranscriptRecord {
    Keyframe {
        t: f64,
        frame_id: u64,
        reason: KeyframeReason,
        detail_trigger: bool,
    },
    Request {
        t: f64,
        packet_id: u64,
        tier: Tier,
        frame_id: u64,
        requested_at: f64,
        ready_at: f64,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        verbosity: Option<Verbosity>,
    },
    Dropped {
        t: f64,
        tier: Tier,
        frame_id: u64,
        reason: String,
    },
    Eviction {
        t: f64,
        packet_ids: Vec<u64>,
    },
    Skip {
        t: f64,
        packet_id: u64,
        sentence_index: usize,
    },
    Pause {
        t: f64,
        label: String,
    },
    Resume {
        t: f64,
        label: String,
    },
    Volume {
        t: f64,
        label: String,
        volume: f64,
    },
    IntentUpdate {
        t: f64,
        ok: bool,
        detail: String,
    },
    Utterance(UtteranceRecord),
}

impl TranscriptRecord {
    pub fn time(&self) -> f64 {
        match self {
            TranscriptRecord::Keyframe { t, .. }
            | TranscriptRecord::Request { t, .. }
            | TranscriptRecord::Dropped { t, .. }
            | TranscriptRecord::Eviction { t, .. }
            | TranscriptRecord::Skip { t, .. }
            | TranscriptRecord::Pause { t, .. }
            | TranscriptRecord::Resume { t, .. }
            | TranscriptRecord::Volume { t, .. }
            | TranscriptRecord::IntentUpdate { t, .. } => *t,
            TranscriptRecord::Utterance(u) => u.t,
        }
    }
}

#[derive(Debug, Error)]
pub enum TranscriptError {
    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("transcript is empty")]
    Empty,
    #[error("line {line}: {message}")]
    Line { line: usize, message: String },
}

#[derive(Debug, Clone, PartialEq)]
pub struct Transcript {
    pub header: TranscriptHeader,
    pub records: Vec<TranscriptRecord>,
}

impl Transcript {
    pub fn new(scenario_digest: String, config: EngineConfig) -> Self {
        Self {
            header: TranscriptHeader {
                format: TRANSCRIPT_FORMAT,
                scenario_digest,
                config,
            },
            records: Vec::new(),
        }
    }

    pub fn push(&mut self, record: TranscriptRecord) {
        self.records.push(record);
    }

    /// Stable sort by time; records sharing a time keep emission order.
    pub fn finish(&mut self) {
        self.records.sort_by(|a, b| a.time().total_cmp(&b.time()));
    }

    pub fn utterances(&self) -> impl Iterator<Item = &UtteranceRecord> {
        self.records.iter().filter_map(|r| match r {
            TranscriptRecord::Utterance(u) => Some(u),
            _ => None,
        })
    }

    pub fn count(&self, pred: impl Fn(&TranscriptRecord) -> bool) -> usize {
        self.records.iter().filter(|r| pred(r)).count()
    }

    pub fn to_jsonl(&self) -> String {
        let mut out = serde_json::to_string(&self.header).expect("header serializes");
        out.push('\n');
        for r in &self.records {
            out.push_str(&serde_json::to_string(r).expect("records serialize"));
            out.push('\n');
        }
        out
    }

    pub fn parse(text: &str) -> Result<Self, TranscriptError> {
        let mut lines = text
            .lines()
            .enumerate()
            .filter(|(_, l)| !l.trim().is_empty());
        let (_, first) = lines.next().ok_or(TranscriptError::Empty)?;
        let header: TranscriptHeader = serde_json::from_str(first).map_err(|e| TranscriptError::Line {
            line: 1,
            message: format!("header: {e}"),
        })?;
        if header.format != TRANSCRIPT_FORMAT {
            return Err(TranscriptError::Line {
                line: 1,
                message: format!("unsupported transcript format {}", header.format),
            });
        }
        let mut records = Vec::new();
        for (idx, line) in lines {
            let record = serde_json::from_str(line).map_err(|e| TranscriptError::Line {
                line: idx + 1,
                message: e.to_string(),
            })?;
            records.push(record);
        }
        Ok(Self { header, records })
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self, TranscriptError> {
        let path = path.as_ref();
        let text = fs::read_to_string(path).map_err(|source| TranscriptError::Io {
            path: path.display().to_string(),
            source,
        })?;
        Self::parse(&text)
    }
}
