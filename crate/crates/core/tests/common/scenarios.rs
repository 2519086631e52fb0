//! Builders for the bundled scenario files under `scenarios/`.

#![allow(dead_code)]

use livedesc_core::config::ConfigOverrides;
use livedesc_core::intent::AttributeLevel;
use livedesc_core::presenter::{SoundAction, SoundEvent, SoundPhase};
use livedesc_core::provider::SentenceScore;
use livedesc_core::sim::scenario::{
    Annotation, DecompositionScript, IntentEvent, PolicyRule, ScenarioRecord, ScriptedOutput,
};
use livedesc_core::{Detection, FrameRecord, Tier};

pub type Builder = fn() -> Vec<ScenarioRecord>;

pub const BUNDLED: [(&str, Builder); 5] = [
    ("minimal.jsonl", minimal),
    ("quick_scan.jsonl", quick_scan),
    ("reference.jsonl", reference),
    ("sounds.jsonl", sounds),
    ("intent.jsonl", intent),
];

pub fn frame(frame_id: u64, timestamp: f64, orientation: f64, classes: &[(i64, &str)], fv: Vec<f64>) -> ScenarioRecord {
    ScenarioRecord::Frame(FrameRecord {
        frame_id,
        timestamp,
        orientation_deg: orientation,
        detections: classes.iter().map(|(id, c)| Detection::new(*id, *c)).collect(),
        feature_vector: fv,
    })
}

pub fn one_hot(dim: usize, at: usize) -> Vec<f64> {
    let mut v = vec![0.0; dim];
    v[at] = 1.0;
    v
}

pub fn general(frame_id: u64, text: &str) -> ScenarioRecord {
    ScenarioRecord::Output(ScriptedOutput {
        frame_id,
        tier: Tier::General,
        sentences: vec![text.to_string()],
        latency: None,
        scores: None,
        truth: None,
        refuse: false,
    })
}

pub fn detailed(frame_id: u64, sentences: &[String], scores: Vec<SentenceScore>, truth: Option<Vec<SentenceScore>>) -> ScenarioRecord {
    ScenarioRecord::Output(ScriptedOutput {
        frame_id,
        tier: Tier::Detailed,
        sentences: sentences.to_vec(),
        latency: None,
        scores: Some(scores),
        truth,
        refuse: false,
    })
}

pub fn sound(label: &str, phase: SoundPhase, timestamp: f64) -> ScenarioRecord {
    ScenarioRecord::Sound(SoundEvent {
        label: label.to_string(),
        phase,
        timestamp,
        confidence: 1.0,
    })
}

fn score(sim: f64, depth: f64) -> SentenceScore {
    SentenceScore { sim, depth }
}

fn strings(items: &[&str]) -> Vec<String> {
    items.iter().map(|s| s.to_string()).collect()
}

fn intent_text(timestamp: f64, text: &str) -> ScenarioRecord {
    ScenarioRecord::Intent(IntentEvent {
        timestamp,
        text: Some(text.to_string()),
        attribute: None,
        level: None,
        add: Vec::new(),
        remove: Vec::new(),
        verbosity_mode: None,
        clear: false,
    })
}

fn intent_clear(timestamp: f64) -> ScenarioRecord {
    ScenarioRecord::Intent(IntentEvent {
        timestamp,
        text: None,
        attribute: None,
        level: None,
        add: Vec::new(),
        remove: Vec::new(),
        verbosity_mode: None,
        clear: true,
    })
}

pub fn minimal() -> Vec<ScenarioRecord> {
    vec![frame(0, 0.0, 0.0, &[(1, "chair")], vec![1.0, 0.0])]
}

pub const SCAN_END: f64 = 3.0;
pub const QUICK_SCAN_FRAMES: u64 = 56;

/// Three seconds of turning (a new view and 40° every second), then eight
/// seconds holding still in an office.
pub fn quick_scan() -> Vec<ScenarioRecord> {
    let views: [(f64, &[(i64, &str)]); 4] = [
        (0.0, &[(1, "desk"), (2, "chair")]),
        (40.0, &[(3, "couch"), (4, "tv")]),
        (80.0, &[(5, "sink"), (6, "refrigerator")]),
        (120.0, &[(7, "desk"), (8, "cabinet"), (9, "printer"), (10, "cat")]),
    ];
    let mut out = Vec::new();
    for id in 0..QUICK_SCAN_FRAMES {
        let view = ((id / 5) as usize).min(3);
        let (orientation, classes) = views[view];
        out.push(frame(id, id as f64 / 5.0, orientation, classes, one_hot(4, view)));
    }
    out.push(general(0, "A small study with a wooden desk and a chair."));
    out.push(general(5, "A living room with a couch facing a television."));
    out.push(general(10, "A kitchen corner with a sink and a fridge."));
    out.push(general(15, "An office with a desk, a printer, and a cat on the floor."));
    let scan_details = [
        (0, ["The desk is cluttered with papers.", "A chair is pushed under the desk."]),
        (5, ["The couch has two cushions.", "The television is switched off."]),
        (10, ["The sink is empty.", "The fridge door is closed."]),
    ];
    for (id, sentences) in scan_details {
        out.push(detailed(id, &strings(&sentences), vec![score(0.1, 120.0), score(0.05, 80.0)], None));
    }
    out.push(detailed(
        15,
        &strings(&[
            "A gray cat sleeps on the carpet near your feet.",
            "A printer sits on a cabinet against the far wall.",
            "The desk holds a monitor and a mug.",
        ]),
        vec![score(0.1, 230.0), score(0.05, 40.0), score(0.12, 120.0)],
        None,
    ));
    out
}

/// Covered object classes per scene of the reference walk.
pub const REFERENCE_SCENES: [&[&str]; 20] = [
    &["person", "bicycle", "bench"],
    &["motorcycle", "traffic light"],
    &["fire hydrant", "stop sign"],
    &["parking meter", "bird", "cat"],
    &["dog", "horse"],
    &["sheep", "cow", "elephant"],
    &["bear", "zebra"],
    &["giraffe", "backpack"],
    &["handbag", "suitcase", "skis"],
    &["snowboard", "sports ball"],
    &["baseball bat", "baseball glove", "skateboard"],
    &["surfboard", "tennis racket"],
    &["bottle", "wine glass"],
    &["fork", "knife", "spoon"],
    &["bowl", "banana"],
    &["apple", "sandwich", "orange"],
    &["broccoli", "carrot"],
    &["hot dog", "pizza"],
    &["donut", "cake", "chair"],
    &["couch", "potted plant"],
];

/// Objects present in a scene but never detected or described.
pub const REFERENCE_MISSED: [&str; 16] = [
    "vase",
    "scissors",
    "teddy bear",
    "hair drier",
    "toothbrush",
    "dining table",
    "toilet",
    "laptop",
    "mouse",
    "remote",
    "keyboard",
    "cell phone",
    "microwave",
    "toaster",
    "refrigerator",
    "clock",
];

pub const REFERENCE_SCENE_SECS: u64 = 30;

/// Spoken detailed sentences whose ground truth disagrees with the model's
/// order, per scene.
pub fn reference_errors(scene: usize) -> usize {
    if [3, 9, 15].contains(&scene) {
        2
    } else {
        1
    }
}

fn missed_for(scene: usize) -> Option<&'static str> {
    if scene % 5 == 4 {
        return None;
    }
    Some(REFERENCE_MISSED[scene - scene / 5])
}

/// A twenty-scene walk at one frame per second: each scene turns 90°, holds
/// for 30 s, and carries six detailed sentences.
pub fn reference() -> Vec<ScenarioRecord> {
    let mut out = vec![ScenarioRecord::Config(ConfigOverrides {
        fps: Some(1.0),
        ..ConfigOverrides::default()
    })];
    let dim = REFERENCE_SCENES.len();
    let places = ["street", "plaza", "garden", "yard", "field", "lobby", "hall", "market", "patio", "gym"];
    let sides = ["on your left", "on your right", "straight ahead", "behind you", "to the left", "to the right"];
    for (s, classes) in REFERENCE_SCENES.iter().enumerate() {
        let t0 = (s as u64 * REFERENCE_SCENE_SECS) as f64;
        let first_id = s as u64 * REFERENCE_SCENE_SECS;
        let detections: Vec<(i64, &str)> = classes
            .iter()
            .enumerate()
            .map(|(i, c)| ((s * 10 + i + 1) as i64, *c))
            .collect();
        let orientation = ((s * 90) % 360) as f64;
        if s > 0 {
            out.push(if s % 2 == 1 {
                intent_text(t0 - 0.5, &format!("where is the {}", classes[0]))
            } else {
                intent_clear(t0 - 0.5)
            });
        }
        for k in 0..REFERENCE_SCENE_SECS {
            out.push(frame(first_id + k, t0 + k as f64, orientation, &detections, one_hot(dim, s)));
        }
        let place = places[s % places.len()];
        out.push(general(first_id, &format!("An open {place} with the {} nearby.", classes[0])));

        let sentences: Vec<String> = (0..6)
            .map(|j| {
                let c = classes[j % classes.len()];
                format!("The {c} is {} meters {}.", s * 6 + j + 2, sides[j])
            })
            .collect();
        // Speaking order is a rotation of the source order.
        let order: Vec<usize> = (0..6).map(|j| (j + s) % 6).collect();
        let relevance = s % 2 == 1;
        let mut scores = vec![score(0.0, 0.0); 6];
        let mut truth = vec![score(0.0, 0.0); 6];
        let errors = reference_errors(s);
        for (j, &idx) in order.iter().enumerate() {
            let jf = j as f64;
            if relevance {
                scores[idx] = score(0.8 - 0.1 * jf, 50.0 + 10.0 * jf);
                let t = if j < errors { 0.21 + 0.01 * jf } else { 0.9 - 0.1 * jf };
                truth[idx] = score(t, 50.0);
            } else {
                scores[idx] = score(0.05 - 0.01 * jf, 200.0 - 25.0 * jf);
                let d = if j < errors { 10.0 + jf } else { 200.0 - 25.0 * jf };
                truth[idx] = score(0.05, d);
            }
        }
        out.push(detailed(first_id, &sentences, scores, Some(truth)));

        let until = t0 + (REFERENCE_SCENE_SECS - 1) as f64;
        for c in classes.iter().copied().chain(missed_for(s)) {
            out.push(ScenarioRecord::Annotation(Annotation {
                label: c.to_string(),
                visible_from: t0,
                visible_until: until,
            }));
        }
    }
    out
}

/// A still scene narrated through conversation, typing and a doorbell.
pub fn sounds() -> Vec<ScenarioRecord> {
    let mut out = vec![ScenarioRecord::Policy(PolicyRule {
        label: "doorbell".into(),
        action: SoundAction::Pause,
    })];
    for id in 0..100 {
        out.push(frame(id, id as f64 / 5.0, 15.0, &[(1, "laptop"), (2, "keyboard"), (3, "cup")], vec![0.2, 0.9, 0.1]));
    }
    out.push(general(0, "A tidy workspace with a laptop, a keyboard, and a cup of coffee."));
    out.push(detailed(
        0,
        &strings(&[
            "The laptop screen shows a spreadsheet.",
            "A white cup sits to the right of the keyboard.",
            "The keyboard is close to the edge of the desk.",
        ]),
        vec![score(0.1, 90.0), score(0.15, 160.0), score(0.02, 210.0)],
        None,
    ));
    out.push(sound("speech", SoundPhase::Start, 1.0));
    out.push(sound("speech", SoundPhase::End, 2.4));
    out.push(sound("typing", SoundPhase::Start, 3.6));
    out.push(sound("typing", SoundPhase::End, 7.0));
    out.push(sound("speech", SoundPhase::Start, 9.4));
    out.push(sound("doorbell", SoundPhase::Start, 9.8));
    out.push(sound("speech", SoundPhase::End, 10.6));
    out.push(sound("doorbell", SoundPhase::End, 11.2));
    out.push(sound("typing", SoundPhase::Start, 12.0));
    out.push(sound("typing", SoundPhase::End, 19.8));
    out
}

/// A user looking for a cup after a first look around the room.
pub fn intent() -> Vec<ScenarioRecord> {
    let mut out = vec![ScenarioRecord::Decomposition(DecompositionScript {
        text: "where is my cup".into(),
        intent_kind: livedesc_core::intent::IntentKind::Specific,
        classes: vec!["cup".into()],
        verbose_attributes: vec![livedesc_core::intent::Attribute::Color],
    })];
    for id in 0..75 {
        let (orientation, classes, fv): (f64, &[(i64, &str)], Vec<f64>) = if id < 50 {
            (0.0, &[(1, "bookshelf"), (2, "armchair")], vec![1.0, 0.0, 0.2])
        } else {
            (70.0, &[(3, "cup"), (4, "dining table"), (5, "bowl")], vec![0.0, 1.0, 0.2])
        };
        out.push(frame(id, id as f64 / 5.0, orientation, classes, fv));
    }
    out.push(ScenarioRecord::Intent(IntentEvent {
        timestamp: 9.6,
        text: None,
        attribute: Some("material".into()),
        level: Some(AttributeLevel::Verbose),
        add: Vec::new(),
        remove: Vec::new(),
        verbosity_mode: None,
        clear: false,
    }));
    out.push(intent_text(9.8, "where is my cup"));
    out.push(general(0, "A reading corner with a tall bookshelf and an armchair."));
    out.push(general(50, "A dining area with a table set for breakfast."));
    out.push(detailed(
        50,
        &strings(&[
            "A bowl of cereal sits in the middle of the table.",
            "Your red ceramic cup is at the near edge of the table.",
            "The dining table is made of dark oak.",
        ]),
        vec![score(0.12, 140.0), score(0.71, 220.0), score(0.18, 100.0)],
        None,
    ));
    out
}
