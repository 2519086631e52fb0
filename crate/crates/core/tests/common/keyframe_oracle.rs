//! Keyframe decisions recomputed from the whole frame history, without any
//! incremental state.

#![allow(dead_code)]

use livedesc_core::{EngineConfig, FrameRecord, KeyframeReason};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct OracleDecision {
    pub reason: Option<KeyframeReason>,
    pub detail_trigger: bool,
}

fn members(f: &FrameRecord) -> Vec<(i64, String)> {
    let mut m: Vec<(i64, String)> = f
        .detections
        .iter()
        .map(|d| (d.track_id, d.class_label.clone()))
        .collect();
    m.sort();
    m.dedup();
    m
}

fn angle(a: f64, b: f64) -> f64 {
    let d = (a - b).abs() % 360.0;
    d.min(360.0 - d)
}

fn cosine(u: &[f64], v: &[f64]) -> f64 {
    let dot: f64 = u.iter().zip(v).map(|(a, b)| a * b).sum();
    let nu: f64 = u.iter().map(|a| a * a).sum::<f64>().sqrt();
    let nv: f64 = v.iter().map(|a| a * a).sum::<f64>().sqrt();
    (dot / (nu * nv)).clamp(-1.0, 1.0)
}

/// Decisions for every frame of `frames`.
pub fn decide_all(frames: &[FrameRecord], cfg: &EngineConfig) -> Vec<OracleDecision> {
    let n = cfg.n;
    let comps: Vec<Vec<(i64, String)>> = frames.iter().map(members).collect();
    let mut out: Vec<OracleDecision> = Vec::with_capacity(frames.len());
    let mut keyframes: Vec<usize> = Vec::new();
    for t in 0..frames.len() {
        let reason = match keyframes.last() {
            None => Some(KeyframeReason::Bootstrap),
            Some(&k) => {
                let since = t - k;
                let window_equal = since >= n && (t + 1 - n..=t).all(|j| comps[j] == comps[t]);
                let run = {
                    let mut r = 0;
                    while r < since && !comps[t - r].is_empty() && (r == 0 || comps[t - r] != comps[t - r + 1]) {
                        r += 1;
                    }
                    r
                };
                if angle(frames[k].orientation_deg, frames[t].orientation_deg) >= cfg.orientation_unit_deg {
                    Some(KeyframeReason::OrientationShift)
                } else if window_equal && !comps[t].is_empty() {
                    Some(KeyframeReason::StableComposition)
                } else if window_equal && cosine(&frames[t].feature_vector, &frames[k].feature_vector) < cfg.thres {
                    Some(KeyframeReason::EmptyFallback)
                } else if run >= 2 * n {
                    Some(KeyframeReason::DriftPeriodic)
                } else {
                    None
                }
            }
        };
        let detail_trigger = reason.is_some() && !comps[t].is_empty() && {
            // Identical keyframes in a row, counting back to the last trigger.
            let mut count = 1;
            for &k in keyframes.iter().rev() {
                if comps[k] != comps[t] || out[k].detail_trigger {
                    break;
                }
                count += 1;
            }
            count == cfg.m
        };
        if reason.is_some() {
            keyframes.push(t);
        }
        out.push(OracleDecision { reason, detail_trigger });
    }
    out
}
