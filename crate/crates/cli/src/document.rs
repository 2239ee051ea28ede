//! Input document schema and validation.
//!
//! Documents are JSON. A finite dynamical system:
//!
//! ```json
//! {
//!   "type": "finite",
//!   "numeric_mode": "rational",
//!   "points": ["0", "1", "2", "3"],
//!   "map": ["1", "0", "3", "3"],
//!   "measure": ["1/4", "1/4", "1/4", "1/4"]
//! }
//! ```
//!
//! A Markov or hidden-Markov source:
//!
//! ```json
//! {
//!   "type": "markov",
//!   "states": ["a", "b", "c"],
//!   "transition": [["1/2","1/2","0"], ["1/2","1/2","0"], ["0","0","1"]],
//!   "initial": ["1/4", "1/4", "1/2"]
//! }
//! ```
//!
//! with `"type": "hmm"` adding `"emission": {"symbols": [...], "map": [...]}`
//! where `map` lists the emitted symbol per state. Weights are strings
//! (`"1/4"`, `"0.25"`) or integers; in rational mode they are read exactly,
//! so JSON floats are rejected there rather than silently rounded. Optional
//! fields `schedule`, `epsilon`, `max_depth`, `budget` and `seed` preset what
//! the matching command-line flags would.

use amsdec_core::numeric::{parse_scalar, Scalar};
use amsdec_core::sources::MarkovSource;
use amsdec_core::{EndoMap, FiniteSpace, ProbabilityMeasure};
use serde::Deserialize;
use std::sync::Arc;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NumericMode {
    Rational,
    Float,
}

impl NumericMode {
    pub fn as_str(&self) -> &'static str {
        match self {
            NumericMode::Rational => "rational",
            NumericMode::Float => "float",
        }
    }
}

/// Raw document as deserialized; weights stay untyped until the numeric mode
/// is known.
#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SystemDocument {
    #[serde(rename = "type")]
    pub kind: String,
    #[serde(default)]
    pub numeric_mode: Option<String>,

    // Finite systems.
    #[serde(default)]
    pub points: Option<Vec<String>>,
    #[serde(default)]
    pub map: Option<Vec<String>>,
    #[serde(default)]
    pub measure: Option<Vec<serde_json::Value>>,

    // Sources.
    #[serde(default)]
    pub states: Option<Vec<String>>,
    #[serde(default)]
    pub transition: Option<Vec<Vec<serde_json::Value>>>,
    #[serde(default)]
    pub initial: Option<Vec<serde_json::Value>>,
    #[serde(default)]
    pub emission: Option<EmissionDocument>,

    // Optional presets for the matching flags.
    #[serde(default)]
    pub schedule: Option<Vec<u64>>,
    #[serde(default)]
    pub epsilon: Option<serde_json::Value>,
    #[serde(default)]
    pub max_depth: Option<usize>,
    #[serde(default)]
    pub budget: Option<u64>,
    #[serde(default)]
    pub seed: Option<u64>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EmissionDocument {
    pub symbols: Vec<String>,
    /// Emitted symbol label per state, aligned with `states`.
    pub map: Vec<String>,
}

/// A document validated against one numeric mode.
#[derive(Debug)]
pub enum ValidatedSystem<S: Scalar> {
    Finite {
        space: Arc<FiniteSpace>,
        map: EndoMap,
        measure: ProbabilityMeasure<S>,
    },
    Source(MarkovSource<S>),
}

impl SystemDocument {
    pub fn from_json(text: &str) -> Result<Self, String> {
        serde_json::from_str(text).map_err(|e| format!("document schema error: {e}"))
    }

    pub fn numeric_mode(&self) -> Result<NumericMode, String> {
        match self.numeric_mode.as_deref() {
            None | Some("rational") => Ok(NumericMode::Rational),
            Some("float") => Ok(NumericMode::Float),
            Some(other) => Err(format!(
                "numeric_mode must be \"rational\" or \"float\", got {other:?}"
            )),
        }
    }

    pub fn is_source(&self) -> Result<bool, String> {
        match self.kind.as_str() {
            "finite" => Ok(false),
            "markov" | "hmm" => Ok(true),
            other => Err(format!(
                "type must be \"finite\", \"markov\" or \"hmm\", got {other:?}"
            )),
        }
    }

    /// Validate against the chosen numeric mode, producing typed objects.
    pub fn validate<S: Scalar>(&self) -> Result<ValidatedSystem<S>, String> {
        if self.is_source()? {
            self.validate_source()
        } else {
            self.validate_finite()
        }
    }

    fn validate_finite<S: Scalar>(&self) -> Result<ValidatedSystem<S>, String> {
        let points = self
            .points
            .as_ref()
            .ok_or("finite system needs a \"points\" field")?;
        let map_labels = self
            .map
            .as_ref()
            .ok_or("finite system needs a \"map\" field")?;
        let measure_values = self
            .measure
            .as_ref()
            .ok_or("finite system needs a \"measure\" field")?;
        let space = FiniteSpace::new(points.clone()).map_err(|e| e.to_string())?;
        if map_labels.len() != points.len() {
            return Err(format!(
                "map lists {} images for {} points",
                map_labels.len(),
                points.len()
            ));
        }
        let next = map_labels
            .iter()
            .map(|label| space.index_of(label).map_err(|e| e.to_string()))
            .collect::<Result<Vec<usize>, String>>()?;
        let map = EndoMap::new(space.clone(), next).map_err(|e| e.to_string())?;
        if measure_values.len() != points.len() {
            return Err(format!(
                "measure lists {} weights for {} points",
                measure_values.len(),
                points.len()
            ));
        }
        let weights = measure_values
            .iter()
            .enumerate()
            .map(|(i, v)| {
                weight_value::<S>(v)
                    .map_err(|e| format!("measure weight for point {:?}: {e}", points[i]))
            })
            .collect::<Result<Vec<S>, String>>()?;
        let measure = ProbabilityMeasure::from_weights(space.clone(), weights)
            .map_err(|e| format!("measure: {e}"))?;
        Ok(ValidatedSystem::Finite {
            space,
            map,
            measure,
        })
    }

    fn validate_source<S: Scalar>(&self) -> Result<ValidatedSystem<S>, String> {
        let states = self
            .states
            .as_ref()
            .ok_or("source needs a \"states\" field")?;
        let transition_values = self
            .transition
            .as_ref()
            .ok_or("source needs a \"transition\" field")?;
        let initial_values = self
            .initial
            .as_ref()
            .ok_or("source needs an \"initial\" field")?;
        if transition_values.len() != states.len() {
            return Err(format!(
                "transition matrix has {} rows for {} states",
                transition_values.len(),
                states.len()
            ));
        }
        let transition = transition_values
            .iter()
            .enumerate()
            .map(|(i, row)| {
                row.iter()
                    .enumerate()
                    .map(|(j, v)| {
                        weight_value::<S>(v).map_err(|e| {
                            format!("transition[{:?}][{:?}]: {e}", states[i], states[j])
                        })
                    })
                    .collect::<Result<Vec<S>, String>>()
            })
            .collect::<Result<Vec<Vec<S>>, String>>()?;
        let initial = initial_values
            .iter()
            .enumerate()
            .map(|(i, v)| {
                weight_value::<S>(v).map_err(|e| format!("initial[{:?}]: {e}", states[i]))
            })
            .collect::<Result<Vec<S>, String>>()?;

        match (self.kind.as_str(), &self.emission) {
            ("markov", None) => {
                MarkovSource::new(states.clone(), transition, initial)
                    .map(ValidatedSystem::Source)
                    .map_err(|e| e.to_string())
            }
            ("markov", Some(_)) => {
                Err("type \"markov\" must not carry an emission; use \"hmm\"".into())
            }
            ("hmm", Some(emission)) => {
                if emission.map.len() != states.len() {
                    return Err(format!(
                        "emission map lists {} symbols for {} states",
                        emission.map.len(),
                        states.len()
                    ));
                }
                let map = emission
                    .map
                    .iter()
                    .map(|label| {
                        emission
                            .symbols
                            .iter()
                            .position(|s| s == label)
                            .ok_or_else(|| format!("emission symbol {label:?} not in alphabet"))
                    })
                    .collect::<Result<Vec<usize>, String>>()?;
                MarkovSource::with_emission(
                    states.clone(),
                    transition,
                    initial,
                    emission.symbols.clone(),
                    map,
                )
                .map(ValidatedSystem::Source)
                .map_err(|e| e.to_string())
            }
            ("hmm", None) => Err("type \"hmm\" needs an \"emission\" field".into()),
            _ => unreachable!("is_source already screened the type"),
        }
    }

    pub fn epsilon_value<S: Scalar>(&self) -> Result<Option<S>, String> {
        match &self.epsilon {
            None => Ok(None),
            Some(v) => weight_value::<S>(v).map(Some).map_err(|e| format!("epsilon: {e}")),
        }
    }
}

/// Read a JSON weight: strings and integers are exact in both modes; JSON
/// floats are accepted only in float mode.
pub fn weight_value<S: Scalar>(value: &serde_json::Value) -> Result<S, String> {
    match value {
        serde_json::Value::String(text) => parse_scalar::<S>(text).map_err(|e| e.to_string()),
        serde_json::Value::Number(number) => {
            if let Some(n) = number.as_i64() {
                Ok(S::from_int(n))
            } else if S::EXACT {
                Err(format!(
                    "{number} is a float literal; rational mode needs a string like \"1/4\""
                ))
            } else {
                parse_scalar::<S>(&number.to_string()).map_err(|e| e.to_string())
            }
        }
        other => Err(format!("expected a weight, got {other}")),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_rational::BigRational;

    const S1_DOC: &str = r#"{
        "type": "finite",
        "points": ["0", "1", "2", "3"],
        "map": ["1", "0", "3", "3"],
        "measure": ["1/4", "1/4", "1/4", "1/4"]
    }"#;

    #[test]
    fn parses_finite_document() {
        let doc = SystemDocument::from_json(S1_DOC).unwrap();
        assert_eq!(doc.numeric_mode().unwrap(), NumericMode::Rational);
        match doc.validate::<BigRational>().unwrap() {
            ValidatedSystem::Finite { space, map, measure } => {
                assert_eq!(space.len(), 4);
                assert_eq!(map.images(), &[1, 0, 3, 3]);
                assert_eq!(
                    measure.weight(0),
                    &BigRational::from_ratio(1, 4)
                );
            }
            ValidatedSystem::Source(_) => panic!("expected finite"),
        }
    }

    #[test]
    fn rejects_unknown_fields_and_bad_types() {
        assert!(SystemDocument::from_json(r#"{"type": "finite", "bogus": 1}"#).is_err());
        let doc =
            SystemDocument::from_json(r#"{"type": "weird"}"#).unwrap();
        assert!(doc.is_source().is_err());
    }

    #[test]
    fn float_literals_rejected_in_rational_mode() {
        let text = r#"{
            "type": "finite",
            "points": ["a", "b"],
            "map": ["b", "a"],
            "measure": [0.5, 0.5]
        }"#;
        let doc = SystemDocument::from_json(text).unwrap();
        let err = doc.validate::<BigRational>().unwrap_err();
        assert!(err.contains("rational mode"), "{err}");
        assert!(doc.validate::<f64>().is_ok());
    }

    #[test]
    fn validation_errors_name_the_field() {
        let text = r#"{
            "type": "markov",
            "states": ["x", "y"],
            "transition": [["1/2", "2/5"], ["1/2", "1/2"]],
            "initial": ["1", "0"]
        }"#;
        let doc = SystemDocument::from_json(text).unwrap();
        let err = doc.validate::<BigRational>().unwrap_err();
        assert!(err.contains("state x"), "{err}");
        assert!(err.contains("9/10"), "{err}");
    }

    #[test]
    fn hmm_needs_emission_and_markov_refuses_it() {
        let hmm = r#"{
            "type": "hmm",
            "states": ["1", "2"],
            "transition": [["1/2","1/2"],["1/2","1/2"]],
            "initial": ["1","0"]
        }"#;
        let doc = SystemDocument::from_json(hmm).unwrap();
        assert!(doc.validate::<BigRational>().is_err());

        let hmm_good = r#"{
            "type": "hmm",
            "states": ["1", "2"],
            "transition": [["1/2","1/2"],["1/2","1/2"]],
            "initial": ["1","0"],
            "emission": {"symbols": ["x"], "map": ["x", "x"]}
        }"#;
        let doc = SystemDocument::from_json(hmm_good).unwrap();
        match doc.validate::<BigRational>().unwrap() {
            ValidatedSystem::Source(src) => {
                assert!(src.is_hidden());
                assert_eq!(src.alphabet_size(), 1);
            }
            _ => panic!("expected source"),
        }
    }
}
