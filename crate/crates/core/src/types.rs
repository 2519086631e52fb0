//! Frame metadata shared by every stage of the pipeline.

use std::collections::BTreeSet;
use std::fmt;

use serde::{Deserialize, Serialize};

/// Normalized bounding box, all components in `[0, 1]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BBox {
    pub x: f64,
    pub y: f64,
    pub w: f64,
    pub h: f64,
}

impl BBox {
    pub fn new(x: f64, y: f64, w: f64, h: f64) -> Self {
        Self { x, y, w, h }
    }

    /// True when the rectangle lies fully inside the unit square.
    pub fn is_normalized(&self) -> bool {
        let unit = |v: f64| (0.0..=1.0).contains(&v);
        unit(self.x)
            && unit(self.y)
            && unit(self.w)
            && unit(self.h)
            && self.x + self.w <= 1.0 + 1e-12
            && self.y + self.h <= 1.0 + 1e-12
    }
}

impl Default for BBox {
    fn default() -> Self {
        Self::new(0.0, 0.0, 1.0, 1.0)
    }
}

/// One tracked object in a frame.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Detection {
    pub track_id: i64,
    pub class_label: String,
    #[serde(default)]
    pub bbox: BBox,
    #[serde(default = "full_confidence")]
    pub confidence: f64,
}

fn full_confidence() -> f64 {
    1.0
}

impl Detection {
    pub fn new(track_id: i64, class_label: impl Into<String>) -> Self {
        Self {
            track_id,
            class_label: class_label.into(),
            bbox: BBox::default(),
            confidence: 1.0,
        }
    }

    pub fn is_valid(&self) -> bool {
        self.bbox.is_normalized() && (0.0..=1.0).contains(&self.confidence)
    }
}

/// Metadata for a single camera frame. Pixels never enter the engine; the
/// feature vector is an opaque embedding of the image.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FrameRecord {
    pub frame_id: u64,
    pub timestamp: f64,
    pub orientation_deg: f64,
    #[serde(default)]
    pub detections: Vec<Detection>,
    pub feature_vector: Vec<f64>,
}

/// A `(track_id, class_label)` pair.
pub type Member = (i64, String);

/// The set of objects visible in a frame.
///
/// Members keep their first-seen order so label phrases read in detection
/// order, but equality is plain set equality.
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Composition {
    members: Vec<Member>,
}

impl Composition {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn from_members<I, S>(members: I) -> Self
    where
        I: IntoIterator<Item = (i64, S)>,
        S: Into<String>,
    {
        let mut comp = Self::new();
        for (id, label) in members {
            comp.insert(id, label);
        }
        comp
    }

    /// Inserts a member, returning false if it was already present.
    pub fn insert(&mut self, track_id: i64, class_label: impl Into<String>) -> bool {
        let label = class_label.into();
        if self.contains(track_id, &label) {
            return false;
        }
        self.members.push((track_id, label));
        true
    }

    pub fn contains(&self, track_id: i64, class_label: &str) -> bool {
        self.members
            .iter()
            .any(|(id, label)| *id == track_id && label == class_label)
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = &Member> {
        self.members.iter()
    }

    /// Distinct class labels in first-seen order.
    pub fn class_labels(&self) -> Vec<&str> {
        let mut seen = BTreeSet::new();
        self.members
            .iter()
            .filter(|(_, label)| seen.insert(label.as_str()))
            .map(|(_, label)| label.as_str())
            .collect()
    }

    fn sorted(&self) -> BTreeSet<(i64, &str)> {
        self.members.iter().map(|(id, l)| (*id, l.as_str())).collect()
    }
}

impl PartialEq for Composition {
    fn eq(&self, other: &Self) -> bool {
        self.members.len() == other.members.len() && self.sorted() == other.sorted()
    }
}

impl Eq for Composition {}

impl fmt::Display for Composition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("{")?;
        for (i, (id, label)) in self.members.iter().enumerate() {
            if i > 0 {
                f.write_str(", ")?;
            }
            write!(f, "({id}, {label})")?;
        }
        f.write_str("}")
    }
}
