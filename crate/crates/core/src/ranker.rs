//! Ordering of detailed sentences and selection of the next utterance.

use std::cmp::Ordering;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::config::EngineConfig;
use crate::genpipe::{DescriptionBuffer, DescriptionPacket, Tier};
use crate::keyframe::{cosine_similarity, orientation_delta};
use crate::provider::SentenceEmbedder;
use crate::types::Composition;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RankedSentence {
    pub text: String,
    pub sim_score: f64,
    /// Mean depth-map value of the sentence's region; larger is nearer.
    pub depth_score: f64,
    pub source_index: usize,
}

impl RankedSentence {
    pub fn new(text: impl Into<String>, sim_score: f64, depth_score: f64, source_index: usize) -> Self {
        Self {
            text: text.into(),
            sim_score,
            depth_score,
            source_index,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum RankError {
    #[error("mask pixel ({row}, {col}) outside {rows}x{cols} depth map")]
    OutOfBounds { row: usize, col: usize, rows: usize, cols: usize },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DepthScore {
    pub value: f64,
    /// Set when the mask was empty and `value` is the farthest score, 0.
    pub empty_mask: bool,
}

/// Mean depth under a `(row, col)` pixel mask. Duplicate pixels count once.
pub fn depth_score(mask: &[(usize, usize)], depth_map: &[Vec<f64>]) -> Result<DepthScore, RankError> {
    let mut pixels: Vec<(usize, usize)> = mask.to_vec();
    pixels.sort_unstable();
    pixels.dedup();
    if pixels.is_empty() {
        return Ok(DepthScore {
            value: 0.0,
            empty_mask: true,
        });
    }
    let rows = depth_map.len();
    let mut sum = 0.0;
    for &(row, col) in &pixels {
        let value = depth_map
            .get(row)
            .and_then(|r| r.get(col))
            .ok_or(RankError::OutOfBounds {
                row,
                col,
                rows,
                cols: depth_map.get(row).map_or(0, Vec::len),
            })?;
        sum += value;
    }
    Ok(DepthScore {
        value: sum / pixels.len() as f64,
        empty_mask: false,
    })
}

/// Intent-relevant sentences (`sim ≥ threshold`) by descending similarity,
/// then the rest by descending depth. Ties keep source order.
pub fn rank_sentences(sentences: &[RankedSentence], threshold: f64) -> Vec<RankedSentence> {
    let (mut relevant, mut rest): (Vec<_>, Vec<_>) = sentences
        .iter()
        .cloned()
        .partition(|s| s.sim_score >= threshold);
    let by = |key: fn(&RankedSentence) -> f64| {
        move |a: &RankedSentence, b: &RankedSentence| -> Ordering {
            key(b)
                .total_cmp(&key(a))
                .then(a.source_index.cmp(&b.source_index))
        }
    };
    relevant.sort_by(by(|s| s.sim_score));
    rest.sort_by(by(|s| s.depth_score));
    relevant.extend(rest);
    relevant
}

/// The scene as of the most recently processed frame.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FreshnessContext {
    pub current_composition: Composition,
    pub current_orientation_deg: f64,
    pub current_feature_vector: Vec<f64>,
}

/// A packet still describes the scene if its composition matches, the camera
/// has not turned a full unit, or the frames still look alike.
pub fn is_up_to_date(packet: &DescriptionPacket, ctx: &FreshnessContext, cfg: &EngineConfig) -> bool {
    if packet.referenced_composition == ctx.current_composition {
        return true;
    }
    let turned = orientation_delta(packet.referenced_orientation_deg, ctx.current_orientation_deg);
    if matches!(turned, Ok(d) if d < cfg.orientation_unit_deg) {
        return true;
    }
    matches!(
        cosine_similarity(&packet.referenced_feature_vector, &ctx.current_feature_vector),
        Ok(s) if s >= cfg.thres
    )
}

/// Lowercased, whitespace-collapsed, trailing punctuation trimmed.
pub fn normalize_text(text: &str) -> String {
    text.split_whitespace()
        .collect::<Vec<_>>()
        .join(" ")
        .to_lowercase()
        .trim_end_matches(|c: char| c.is_ascii_punctuation())
        .to_string()
}

pub fn is_redundant<'a>(
    text: &str,
    history: impl IntoIterator<Item = &'a String>,
    embedder: &dyn SentenceEmbedder,
    threshold: f64,
) -> bool {
    let norm = normalize_text(text);
    let mut embedding: Option<Option<Vec<f64>>> = None;
    for prev in history {
        if normalize_text(prev) == norm {
            return true;
        }
        let mine = embedding.get_or_insert_with(|| embedder.embed(text));
        if let (Some(mine), Some(theirs)) = (mine.as_ref(), embedder.embed(prev)) {
            if matches!(cosine_similarity(mine, &theirs), Ok(s) if s >= threshold) {
                return true;
            }
        }
    }
    false
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Utterance {
    pub text: String,
    pub tier: Tier,
    pub packet_id: u64,
    pub referenced_frame_id: u64,
    pub sentence_index: usize,
    pub requested_at: f64,
    pub ready_at: f64,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct Selection {
    pub utterance: Option<Utterance>,
    /// Packets removed because a stale candidate renewed the buffer.
    pub evicted: Vec<u64>,
    /// `(packet_id, sentence_index)` pairs dropped as redundant.
    pub skipped: Vec<(u64, usize)>,
}

/// Picks the next sentence to speak.
///
/// Ready packets are scanned richest tier first and, within a tier, newest
/// referenced frame first. A stale candidate is evicted together with every
/// packet referencing an older frame, and the scan restarts. Redundant
/// sentences are consumed silently.
pub fn select_next(
    buffer: &mut DescriptionBuffer,
    ctx: &FreshnessContext,
    embedder: &dyn SentenceEmbedder,
    cfg: &EngineConfig,
    now: f64,
) -> Selection {
    let mut sel = Selection::default();
    let history: Vec<String> = buffer.spoken_history().iter().cloned().collect();
    'scan: loop {
        let mut candidates: Vec<(Tier, u64, u64)> = buffer
            .packets()
            .iter()
            .filter(|p| p.packet.ready_at <= now && !p.is_exhausted())
            .map(|p| (p.packet.tier, p.packet.referenced_frame_id, p.packet.packet_id))
            .collect();
        candidates.sort_by(|a, b| b.0.cmp(&a.0).then(b.1.cmp(&a.1)).then(a.2.cmp(&b.2)));

        for (_, frame_id, packet_id) in candidates {
            let Some(entry) = buffer.get_mut(packet_id) else {
                continue;
            };
            if !is_up_to_date(&entry.packet, ctx, cfg) {
                let evicted = buffer.remove_where(|p| {
                    p.packet.packet_id == packet_id || p.packet.referenced_frame_id < frame_id
                });
                sel.evicted.extend(evicted);
                continue 'scan;
            }
            while let Some(index) = entry.remaining.pop_front() {
                let text = &entry.packet.sentences[index];
                if is_redundant(text, &history, embedder, cfg.redundancy_threshold) {
                    sel.skipped.push((packet_id, index));
                    continue;
                }
                sel.utterance = Some(Utterance {
                    text: text.clone(),
                    tier: entry.packet.tier,
                    packet_id,
                    referenced_frame_id: entry.packet.referenced_frame_id,
                    sentence_index: index,
                    requested_at: entry.packet.requested_at,
                    ready_at: entry.packet.ready_at,
                });
                break;
            }
            if sel.utterance.is_some() {
                break 'scan;
            }
        }
        break;
    }
    buffer.remove_where(|p| p.is_exhausted());
    sel
}
