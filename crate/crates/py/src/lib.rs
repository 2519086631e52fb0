//! Python bindings for the livedesc engine.

use pyo3::exceptions::{PyIOError, PyValueError};
use pyo3::prelude::*;

use livedesc_core::config::ValidationResult;
use livedesc_core::genpipe::format_label_phrase as label_phrase;
use livedesc_core::keyframe::{self, KeyframeDecision};
use livedesc_core::sim::{self, MetricKind, ScenarioError, TranscriptError};
use livedesc_core::{Composition, FrameRecord, RankedSentence};

fn value_err(e: impl std::fmt::Display) -> PyErr {
    PyValueError::new_err(e.to_string())
}

fn scenario_err(e: ScenarioError) -> PyErr {
    match e {
        ScenarioError::Io { .. } => PyIOError::new_err(e.to_string()),
        _ => value_err(e),
    }
}

fn transcript_err(e: TranscriptError) -> PyErr {
    match e {
        TranscriptError::Io { .. } => PyIOError::new_err(e.to_string()),
        _ => value_err(e),
    }
}

#[pyclass(module = "livedesc", from_py_object)]
#[derive(Clone)]
struct EngineConfig {
    inner: livedesc_core::EngineConfig,
}

#[pymethods]
impl EngineConfig {
    /// Defaults, optionally overridden by a TOML document.
    #[new]
    #[pyo3(signature = (toml=None))]
    fn new(toml: Option<&str>) -> PyResult<Self> {
        let inner = match toml {
            None => livedesc_core::EngineConfig::default(),
            Some(text) => livedesc_core::ConfigOverrides::from_toml_str(text)
                .map_err(value_err)?
                .apply(livedesc_core::EngineConfig::default()),
        };
        Ok(Self { inner })
    }

    /// Constraint violations, empty when the config is usable.
    fn validate(&self) -> Vec<String> {
        self.inner.validate().violations().iter().map(|v| v.to_string()).collect()
    }

    fn to_toml(&self) -> String {
        self.inner.to_toml_string()
    }

    #[getter]
    fn n(&self) -> usize {
        self.inner.n
    }

    #[getter]
    fn m(&self) -> usize {
        self.inner.m
    }

    #[getter]
    fn thres(&self) -> f64 {
        self.inner.thres
    }

    #[getter]
    fn speaking_rate_wps(&self) -> f64 {
        self.inner.speaking_rate_wps
    }

    #[getter]
    fn fps(&self) -> f64 {
        self.inner.fps
    }

    fn __repr__(&self) -> String {
        format!(
            "EngineConfig(n={}, m={}, thres={}, fps={})",
            self.inner.n, self.inner.m, self.inner.thres, self.inner.fps
        )
    }
}

fn config_or_default(cfg: Option<&EngineConfig>) -> livedesc_core::EngineConfig {
    cfg.map(|c| c.inner.clone()).unwrap_or_default()
}

#[pyfunction]
fn orientation_delta(a: f64, b: f64) -> PyResult<f64> {
    keyframe::orientation_delta(a, b).map_err(value_err)
}

#[pyfunction]
fn cosine_similarity(u: Vec<f64>, v: Vec<f64>) -> PyResult<f64> {
    keyframe::cosine_similarity(&u, &v).map_err(value_err)
}

/// Label-tier phrase for `(track_id, class_label)` pairs.
#[pyfunction]
fn format_label_phrase(members: Vec<(i64, String)>) -> PyResult<String> {
    let comp = Composition::from_members(members);
    label_phrase(&comp).map_err(value_err)
}

/// Orders `(text, sim, depth)` triples; returns `(source_index, text)` pairs.
#[pyfunction]
#[pyo3(signature = (sentences, threshold=0.2))]
fn rank_sentences(sentences: Vec<(String, f64, f64)>, threshold: f64) -> Vec<(usize, String)> {
    let input: Vec<RankedSentence> = sentences
        .into_iter()
        .enumerate()
        .map(|(i, (text, sim, depth))| RankedSentence::new(text, sim, depth, i))
        .collect();
    livedesc_core::rank_sentences(&input, threshold)
        .into_iter()
        .map(|s| (s.source_index, s.text))
        .collect()
}

#[pyclass(module = "livedesc")]
struct KeyframeExtractor {
    inner: livedesc_core::KeyframeExtractor,
}

#[pymethods]
impl KeyframeExtractor {
    #[new]
    #[pyo3(signature = (config=None))]
    fn new(config: Option<&EngineConfig>) -> Self {
        Self {
            inner: livedesc_core::KeyframeExtractor::new(config_or_default(config)),
        }
    }

    /// Takes one frame as a JSON object; returns `(reason, detail_trigger)`,
    /// with `reason` None for ordinary frames.
    fn process(&mut self, frame_json: &str) -> PyResult<(Option<String>, bool)> {
        let frame: FrameRecord = serde_json::from_str(frame_json).map_err(value_err)?;
        let decision = self.inner.process(&frame).map_err(value_err)?;
        let reason = match decision {
            KeyframeDecision::NotKeyframe => None,
            KeyframeDecision::Keyframe { reason, .. } => {
                Some(serde_json::to_value(reason).expect("reason serializes").as_str().unwrap_or_default().to_string())
            }
        };
        Ok((reason, decision.detail_trigger()))
    }
}

#[pyclass(module = "livedesc")]
struct Scenario {
    inner: sim::Scenario,
}

#[pymethods]
impl Scenario {
    #[staticmethod]
    fn load(path: &str) -> PyResult<Self> {
        sim::load_scenario(path).map(|inner| Self { inner }).map_err(scenario_err)
    }

    #[staticmethod]
    fn parse(text: &str) -> PyResult<Self> {
        sim::Scenario::parse(text).map(|inner| Self { inner }).map_err(scenario_err)
    }

    #[getter]
    fn digest(&self) -> String {
        self.inner.digest()
    }

    #[getter]
    fn frame_count(&self) -> usize {
        self.inner.frames.len()
    }

    /// Replays the scenario. Settings inside the scenario apply on top of `config`.
    #[pyo3(signature = (config=None))]
    fn run(&self, config: Option<&EngineConfig>) -> PyResult<Transcript> {
        let base = config_or_default(config);
        let cfg = self.inner.config.apply(base);
        if let ValidationResult::Invalid(v) = cfg.validate() {
            let list: Vec<String> = v.iter().map(|v| v.to_string()).collect();
            return Err(PyValueError::new_err(list.join("; ")));
        }
        Ok(Transcript {
            inner: sim::run(&self.inner, &cfg),
        })
    }
}

#[pyclass(module = "livedesc")]
struct Transcript {
    inner: sim::Transcript,
}

#[pymethods]
impl Transcript {
    #[staticmethod]
    fn parse(text: &str) -> PyResult<Self> {
        sim::Transcript::parse(text).map(|inner| Self { inner }).map_err(transcript_err)
    }

    fn to_jsonl(&self) -> String {
        self.inner.to_jsonl()
    }

    /// `(start, end, tier, text)` for every utterance.
    fn utterances(&self) -> Vec<(f64, f64, String, String)> {
        self.inner
            .utterances()
            .map(|u| (u.start, u.end, u.tier.name().to_string(), u.text.clone()))
            .collect()
    }

    fn __len__(&self) -> usize {
        self.inner.records.len()
    }
}

/// Coverage, priority and latency of a transcript, as a JSON document.
#[pyfunction]
fn evaluate(transcript: &Transcript, scenario: &Scenario) -> PyResult<String> {
    let report = sim::evaluate(&transcript.inner, &scenario.inner, &MetricKind::ALL).map_err(value_err)?;
    Ok(serde_json::to_string(&report).expect("report serializes"))
}

#[pymodule]
fn livedesc(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<EngineConfig>()?;
    m.add_class::<KeyframeExtractor>()?;
    m.add_class::<Scenario>()?;
    m.add_class::<Transcript>()?;
    m.add_function(wrap_pyfunction!(orientation_delta, m)?)?;
    m.add_function(wrap_pyfunction!(cosine_similarity, m)?)?;
    m.add_function(wrap_pyfunction!(format_label_phrase, m)?)?;
    m.add_function(wrap_pyfunction!(rank_sentences, m)?)?;
    m.add_function(wrap_pyfunction!(evaluate, m)?)?;
    Ok(())
}
