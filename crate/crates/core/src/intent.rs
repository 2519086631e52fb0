//! User intent: which object classes matter and how much attribute detail to
//! ask for.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::provider::{IntentDecomposer, ProviderError};

/// Object classes used when no intent narrows them (COCO).
pub const COCO_CLASSES: [&str; 80] = [
    "person", "bicycle", "car", "motorcycle", "airplane", "bus", "train", "truck", "boat",
    "traffic light", "fire hydrant", "stop sign", "parking meter", "bench", "bird", "cat", "dog",
    "horse", "sheep", "cow", "elephant", "bear", "zebra", "giraffe", "backpack", "umbrella",
    "handbag", "tie", "suitcase", "frisbee", "skis", "snowboard", "sports ball", "kite",
    "baseball bat", "baseball glove", "skateboard", "surfboard", "tennis racket", "bottle",
    "wine glass", "cup", "fork", "knife", "spoon", "bowl", "banana", "apple", "sandwich", "orange",
    "broccoli", "carrot", "hot dog", "pizza", "donut", "cake", "chair", "couch", "potted plant",
    "bed", "dining table", "toilet", "tv", "laptop", "mouse", "remote", "keyboard", "cell phone",
    "microwave", "oven", "toaster", "sink", "refrigerator", "book", "clock", "vase", "scissors",
    "teddy bear", "hair drier", "toothbrush",
];

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Attribute {
    Color,
    Texture,
    Material,
    Shape,
    Spatial,
}

impl Attribute {
    pub const ALL: [Attribute; 5] = [
        Attribute::Color,
        Attribute::Texture,
        Attribute::Material,
        Attribute::Shape,
        Attribute::Spatial,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            Attribute::Color => "color",
            Attribute::Texture => "texture",
            Attribute::Material => "material",
            Attribute::Shape => "shape",
            Attribute::Spatial => "spatial",
        }
    }
}

impl fmt::Display for Attribute {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Attribute {
    type Err = IntentError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Attribute::ALL
            .into_iter()
            .find(|a| a.name().eq_ignore_ascii_case(s.trim()))
            .ok_or_else(|| IntentError::UnknownAttribute(s.to_string()))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AttributeLevel {
    Disabled,
    Normal,
    Verbose,
}

impl FromStr for AttributeLevel {
    type Err = IntentError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "disabled" => Ok(AttributeLevel::Disabled),
            "normal" => Ok(AttributeLevel::Normal),
            "verbose" => Ok(AttributeLevel::Verbose),
            other => Err(IntentError::UnknownLevel(other.to_string())),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum IntentKind {
    Unspecified,
    General,
    Specific,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum VerbosityMode {
    Adaptive,
    Concise,
    Normal,
    Verbose,
}

/// What an intent decomposer extracts from free text.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IntentDecomposition {
    pub kind: IntentKind,
    #[serde(default)]
    pub classes: Vec<String>,
    #[serde(default)]
    pub verbose_attributes: Vec<Attribute>,
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum IntentError {
    #[error("dataset class list is empty")]
    EmptyDataset,
    #[error("intent text is empty")]
    EmptyText,
    #[error("unknown attribute `{0}`")]
    UnknownAttribute(String),
    #[error("unknown attribute level `{0}`")]
    UnknownLevel(String),
    #[error("decomposition is not usable: {0}")]
    BadDecomposition(&'static str),
    #[error("object class list would become empty")]
    EmptyClasses,
    #[error(transparent)]
    Provider(#[from] ProviderError),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IntentProfile {
    pub raw_text: String,
    pub kind: IntentKind,
    pub object_classes: Vec<String>,
    /// The fallback list restored for general or unspecified intents.
    pub dataset_classes: Vec<String>,
    pub attributes: BTreeMap<Attribute, AttributeLevel>,
    pub verbosity_mode: VerbosityMode,
}

fn normal_attributes() -> BTreeMap<Attribute, AttributeLevel> {
    Attribute::ALL
        .into_iter()
        .map(|a| (a, AttributeLevel::Normal))
        .collect()
}

pub fn default_profile(dataset_classes: &[String]) -> Result<IntentProfile, IntentError> {
    if dataset_classes.is_empty() {
        return Err(IntentError::EmptyDataset);
    }
    Ok(IntentProfile {
        raw_text: String::new(),
        kind: IntentKind::Unspecified,
        object_classes: dataset_classes.to_vec(),
        dataset_classes: dataset_classes.to_vec(),
        attributes: normal_attributes(),
        verbosity_mode: VerbosityMode::Adaptive,
    })
}

impl Default for IntentProfile {
    fn default() -> Self {
        let coco: Vec<String> = COCO_CLASSES.iter().map(|s| s.to_string()).collect();
        default_profile(&coco).expect("COCO list is nonempty")
    }
}

impl IntentProfile {
    pub fn level(&self, attribute: Attribute) -> AttributeLevel {
        self.attributes
            .get(&attribute)
            .copied()
            .unwrap_or(AttributeLevel::Normal)
    }

    /// Replaces the intent with the decomposition of `text`. On any failure
    /// the profile is left as it was.
    pub fn set_intent(
        &self,
        text: &str,
        decomposer: &mut dyn IntentDecomposer,
    ) -> Result<IntentProfile, IntentError> {
        if text.trim().is_empty() {
            return Err(IntentError::EmptyText);
        }
        let dec = decomposer.decompose(text)?;
        let mut next = self.clone();
        next.raw_text = text.to_string();
        next.attributes = normal_attributes();
        match dec.kind {
            IntentKind::Unspecified => {
                return Err(IntentError::BadDecomposition(
                    "nonempty text cannot be unspecified",
                ))
            }
            IntentKind::General => {
                next.object_classes = next.dataset_classes.clone();
            }
            IntentKind::Specific => {
                let classes = dedupe(dec.classes.iter().map(String::as_str));
                if classes.is_empty() {
                    return Err(IntentError::BadDecomposition(
                        "specific intent without object classes",
                    ));
                }
                next.object_classes = classes;
            }
        }
        next.kind = dec.kind;
        for attr in dec.verbose_attributes {
            next.attributes.insert(attr, AttributeLevel::Verbose);
        }
        Ok(next)
    }

    pub fn clear_intent(&self) -> IntentProfile {
        IntentProfile {
            raw_text: String::new(),
            kind: IntentKind::Unspecified,
            object_classes: self.dataset_classes.clone(),
            dataset_classes: self.dataset_classes.clone(),
            attributes: normal_attributes(),
            verbosity_mode: self.verbosity_mode,
        }
    }

    pub fn apply_attribute_command(
        &self,
        attribute: &str,
        level: AttributeLevel,
    ) -> Result<IntentProfile, IntentError> {
        let attribute: Attribute = attribute.parse()?;
        let mut next = self.clone();
        next.attributes.insert(attribute, level);
        Ok(next)
    }

    /// `(classes ∪ add) \ remove`, survivors in place, additions appended.
    pub fn merge_classes(&self, add: &[String], remove: &[String]) -> Result<IntentProfile, IntentError> {
        let removed = |c: &str| remove.iter().any(|r| r.eq_ignore_ascii_case(c));
        let merged: Vec<String> = dedupe(
            self.object_classes
                .iter()
                .chain(add)
                .map(String::as_str)
                .filter(|c| !removed(c)),
        );
        if merged.is_empty() {
            return Err(IntentError::EmptyClasses);
        }
        let mut next = self.clone();
        next.object_classes = merged;
        Ok(next)
    }

    pub fn with_verbosity_mode(&self, mode: VerbosityMode) -> IntentProfile {
        let mut next = self.clone();
        next.verbosity_mode = mode;
        next
    }

    /// Whether `class_label` is one of the profile's object classes.
    pub fn is_relevant(&self, class_label: &str) -> bool {
        self.object_classes
            .iter()
            .any(|c| c.eq_ignore_ascii_case(class_label))
    }

    pub fn invariants_hold(&self) -> bool {
        (self.kind == IntentKind::Unspecified) == self.raw_text.is_empty()
            && !self.object_classes.is_empty()
            && Attribute::ALL.iter().all(|a| self.attributes.contains_key(a))
    }
}

fn dedupe<'a>(items: impl Iterator<Item = &'a str>) -> Vec<String> {
    let mut out: Vec<String> = Vec::new();
    for item in items {
        let item = item.trim();
        if !item.is_empty() && !out.iter().any(|o| o.eq_ignore_ascii_case(item)) {
            out.push(item.to_string());
        }
    }
    out
}

const SPECIFIC_CUES: [&str; 3] = ["find", "looking for", "where is"];

const ATTRIBUTE_CUES: [(Attribute, &[&str]); 5] = [
    (
        Attribute::Color,
        &[
            "color", "colour", "red", "orange", "yellow", "green", "blue", "purple", "pink",
            "brown", "black", "white", "gray", "grey", "silver", "gold",
        ],
    ),
    (Attribute::Texture, &["texture", "rough", "smooth", "soft", "fuzzy"]),
    (Attribute::Material, &["material", "wooden", "metal", "plastic", "glass", "fabric"]),
    (Attribute::Shape, &["shape", "round", "square", "rectangular", "curved"]),
    (
        Attribute::Spatial,
        &["spatial", "location", "position", "on the", "next to", "near", "around", "behind", "left", "right"],
    ),
];

/// Keyword-based decomposer used when no scripted decomposition matches.
///
/// Text containing "find", "looking for" or "where is" is specific; its
/// classes are the vocabulary entries it mentions.
#[derive(Debug, Clone)]
pub struct RuleBasedDecomposer {
    vocabulary: Vec<String>,
}

impl RuleBasedDecomposer {
    pub fn new(vocabulary: impl IntoIterator<Item = impl Into<String>>) -> Self {
        Self {
            vocabulary: vocabulary.into_iter().map(Into::into).collect(),
        }
    }
}

impl Default for RuleBasedDecomposer {
    fn default() -> Self {
        Self::new(COCO_CLASSES)
    }
}

fn contains_phrase(haystack: &str, phrase: &str) -> bool {
    let words: Vec<&str> = haystack
        .split(|c: char| !c.is_alphanumeric())
        .filter(|w| !w.is_empty())
        .collect();
    let target: Vec<&str> = phrase.split_whitespace().collect();
    !target.is_empty() && words.windows(target.len()).any(|w| w == target.as_slice())
}

impl IntentDecomposer for RuleBasedDecomposer {
    fn decompose(&mut self, text: &str) -> Result<IntentDecomposition, ProviderError> {
        let lower = text.to_lowercase();
        let specific = SPECIFIC_CUES.iter().any(|cue| contains_phrase(&lower, cue));
        let verbose_attributes = ATTRIBUTE_CUES
            .iter()
            .filter(|(_, cues)| cues.iter().any(|cue| contains_phrase(&lower, cue)))
            .map(|(attr, _)| *attr)
            .collect();
        let classes = if specific {
            self.vocabulary
                .iter()
                .filter(|c| contains_phrase(&lower, &c.to_lowercase()))
                .cloned()
                .collect()
        } else {
            Vec::new()
        };
        Ok(IntentDecomposition {
            kind: if specific {
                IntentKind::Specific
            } else {
                IntentKind::General
            },
            classes,
            verbose_attributes,
        })
    }
}
