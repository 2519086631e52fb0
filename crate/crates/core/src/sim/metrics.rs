//! Offline scoring of a transcript against its scenario.

use std::collections::{BTreeMap, HashMap, HashSet};
use std::fmt::Write as _;

use serde::Serialize;
use thiserror::Error;

use crate::genpipe::Tier;
use crate::provider::SentenceScore;

use super::scenario::{Annotation, Scenario};
use super::transcript::{Transcript, TranscriptRecord};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum MetricsError {
    #[error("transcript was produced from a different scenario (digest {transcript}, scenario {scenario})")]
    DigestMismatch { transcript: String, scenario: String },
    #[error("utterance from frame {0} has no scripted detailed output")]
    MissingOutput(u64),
    #[error("utterance from frame {frame_id} refers to sentence {index} of {len}")]
    BadSentenceIndex { frame_id: u64, index: usize, len: usize },
}

pub fn check_pair(transcript: &Transcript, scenario: &Scenario) -> Result<(), MetricsError> {
    let digest = scenario.digest();
    if transcript.header.scenario_digest != digest {
        return Err(MetricsError::DigestMismatch {
            transcript: transcript.header.scenario_digest.clone(),
            scenario: digest,
        });
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct WindowResult {
    pub label: String,
    pub visible_from: f64,
    pub visible_until: f64,
    pub covered: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CoverageReport {
    pub covered: usize,
    pub total: usize,
    /// `None` when the scenario has no annotations.
    pub ratio: Option<f64>,
    pub windows: Vec<WindowResult>,
}

/// A window counts as covered when an utterance overlapping it (closed
/// intervals) mentions its label, case-insensitively.
pub fn coverage(transcript: &Transcript, annotations: &[Annotation]) -> CoverageReport {
    let spoken: Vec<(f64, f64, String)> = transcript
        .utterances()
        .map(|u| (u.start, u.end, u.text.to_lowercase()))
        .collect();
    let windows: Vec<WindowResult> = annotations
        .iter()
        .map(|a| {
            let label = a.label.to_lowercase();
            let covered = spoken
                .iter()
                .any(|(s, e, text)| *s <= a.visible_until && *e >= a.visible_from && text.contains(&label));
            WindowResult {
                label: a.label.clone(),
                visible_from: a.visible_from,
                visible_until: a.visible_until,
                covered,
            }
        })
        .collect();
    let covered = windows.iter().filter(|w| w.covered).count();
    CoverageReport {
        covered,
        total: windows.len(),
        ratio: (!windows.is_empty()).then(|| covered as f64 / windows.len() as f64),
        windows,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PriorityReport {
    pub judged: usize,
    pub correct: usize,
    /// `None` when nothing from the detailed tier was spoken.
    pub ratio: Option<f64>,
}

/// Whether `chosen` is what a ground-truth ranking would speak next among
/// `candidates` (which include `chosen`).
pub fn is_priority_correct(chosen: SentenceScore, candidates: &[SentenceScore], threshold: f64) -> bool {
    if chosen.sim >= threshold {
        candidates.iter().all(|c| c.sim <= chosen.sim)
    } else {
        candidates
            .iter()
            .all(|c| c.sim < threshold && c.depth <= chosen.depth)
    }
}

/// Judges every spoken detailed sentence against the not-yet-spoken
/// sentences of the same packet, using ground truth where the scenario has
/// it and the scripted model scores otherwise.
pub fn priority(transcript: &Transcript, scenario: &Scenario, threshold: f64) -> Result<PriorityReport, MetricsError> {
    let mut spoken: HashMap<u64, HashSet<usize>> = HashMap::new();
    let mut judged = 0;
    let mut correct = 0;
    for u in transcript.utterances().filter(|u| u.tier == Tier::Detailed) {
        let out = scenario
            .output(u.frame_id, Tier::Detailed)
            .ok_or(MetricsError::MissingOutput(u.frame_id))?;
        let truth = out
            .truth
            .as_ref()
            .or(out.scores.as_ref())
            .ok_or(MetricsError::MissingOutput(u.frame_id))?;
        if u.sentence_index >= truth.len() {
            return Err(MetricsError::BadSentenceIndex {
                frame_id: u.frame_id,
                index: u.sentence_index,
                len: truth.len(),
            });
        }
        let done = spoken.entry(u.packet_id).or_default();
        let candidates: Vec<SentenceScore> = (0..truth.len())
            .filter(|i| !done.contains(i))
            .map(|i| truth[i])
            .collect();
        judged += 1;
        if is_priority_correct(truth[u.sentence_index], &candidates, threshold) {
            correct += 1;
        }
        done.insert(u.sentence_index);
    }
    Ok(PriorityReport {
        judged,
        correct,
        ratio: (judged > 0).then(|| correct as f64 / judged as f64),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LatencyStats {
    pub count: usize,
    pub mean: f64,
    pub min: f64,
    pub max: f64,
}

impl LatencyStats {
    fn of(values: &[f64]) -> Option<Self> {
        if values.is_empty() {
            return None;
        }
        Some(Self {
            count: values.len(),
            mean: values.iter().sum::<f64>() / values.len() as f64,
            min: values.iter().copied().fold(f64::INFINITY, f64::min),
            max: values.iter().copied().fold(f64::NEG_INFINITY, f64::max),
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LatencyReport {
    /// Request to ready, per tier.
    pub generation: BTreeMap<Tier, LatencyStats>,
    /// Request to start of speech, over all utterances.
    pub to_speech: Option<LatencyStats>,
}

pub fn latency(transcript: &Transcript) -> LatencyReport {
    let mut per_tier: BTreeMap<Tier, Vec<f64>> = BTreeMap::new();
    for r in &transcript.records {
        if let TranscriptRecord::Request {
            tier,
            requested_at,
            ready_at,
            ..
        } = r
        {
            per_tier.entry(*tier).or_default().push(ready_at - requested_at);
        }
    }
    let to_speech: Vec<f64> = transcript.utterances().map(|u| u.start - u.requested_at).collect();
    LatencyReport {
        generation: per_tier
            .into_iter()
            .filter_map(|(t, v)| LatencyStats::of(&v).map(|s| (t, s)))
            .collect(),
        to_speech: LatencyStats::of(&to_speech),
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize)]
pub struct MetricsReport {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub coverage: Option<CoverageReport>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub priority: Option<PriorityReport>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub latency: Option<LatencyReport>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MetricKind {
    Coverage,
    Priority,
    Latency,
}

impl MetricKind {
    pub const ALL: [MetricKind; 3] = [MetricKind::Coverage, MetricKind::Priority, MetricKind::Latency];
}

/// Computes the requested metrics after checking that the transcript
/// belongs to the scenario.
pub fn evaluate(
    transcript: &Transcript,
    scenario: &Scenario,
    which: &[MetricKind],
) -> Result<MetricsReport, MetricsError> {
    check_pair(transcript, scenario)?;
    let mut report = MetricsReport::default();
    if which.contains(&MetricKind::Coverage) {
        report.coverage = Some(coverage(transcript, &scenario.annotations));
    }
    if which.contains(&MetricKind::Priority) {
        let threshold = transcript.header.config.sim_split_threshold;
        report.priority = Some(priority(transcript, scenario, threshold)?);
    }
    if which.contains(&MetricKind::Latency) {
        report.latency = Some(latency(transcript));
    }
    Ok(report)
}

fn percent(ratio: Option<f64>) -> String {
    ratio.map_or_else(|| "N/A".to_string(), |r| format!("{:.2}%", r * 100.0))
}

impl MetricsReport {
    pub fn render_table(&self) -> String {
        let mut out = String::new();
        if let Some(c) = &self.coverage {
            let _ = writeln!(out, "coverage  {:>8}  ({}/{} windows)", percent(c.ratio), c.covered, c.total);
        }
        if let Some(p) = &self.priority {
            let _ = writeln!(out, "priority  {:>8}  ({}/{} detailed sentences)", percent(p.ratio), p.correct, p.judged);
        }
        if let Some(l) = &self.latency {
            let _ = writeln!(out, "latency   {:<9} {:>6} {:>8} {:>8} {:>8}", "tier", "count", "mean", "min", "max");
            for (tier, s) in &l.generation {
                let _ = writeln!(
                    out,
                    "          {:<9} {:>6} {:>8.3} {:>8.3} {:>8.3}",
                    tier.name(),
                    s.count,
                    s.mean,
                    s.min,
                    s.max
                );
            }
            match &l.to_speech {
                Some(s) => {
                    let _ = writeln!(
                        out,
                        "          {:<9} {:>6} {:>8.3} {:>8.3} {:>8.3}",
                        "to-speech", s.count, s.mean, s.min, s.max
                    );
                }
                None => {
                    let _ = writeln!(out, "          {:<9} {:>6}", "to-speech", "N/A");
                }
            }
        }
        out
    }
}
