//! The instance file: a measure, its sets, and one coefficient per set.
//!
//! ```json
//! {"measure": {"mode": "divisible", "atoms": [{"id": "a", "mass": 1.0}]},
//!  "sets": [{"id": "S", "label": "whole", "atoms": ["a"], "lambda": 1.0}]}
//! ```
//!
//! Unknown fields are rejected. File order is iteration order.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::carleson::CoefficientFamily;
use crate::error::{Error, Result};
use crate::measure::DiscreteMeasure;
use crate::set_system::SetSystem;

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct SetDoc {
    id: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    label: Option<String>,
    atoms: Vec<String>,
    lambda: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct InstanceDoc {
    measure: DiscreteMeasure,
    sets: Vec<SetDoc>,
}

#[derive(Debug, Clone)]
pub struct Instance {
    pub system: SetSystem,
    pub lambda: CoefficientFamily,
}

impl Instance {
    pub fn new(system: SetSystem, lambda: CoefficientFamily) -> Result<Self> {
        if lambda.len() != system.len() {
            return Err(Error::LengthMismatch {
                expected: system.len(),
                got: lambda.len(),
            });
        }
        Ok(Instance { system, lambda })
    }

    pub fn to_json(&self) -> String {
        let doc = InstanceDoc {
            measure: self.system.measure().clone(),
            sets: self
                .system
                .sets()
                .iter()
                .enumerate()
                .map(|(i, s)| SetDoc {
                    id: s.id.clone(),
                    label: s.label.clone(),
                    atoms: s
                        .members()
                        .iter()
                        .map(|&a| self.system.measure().atom_id(a).to_string())
                        .collect(),
                    lambda: self.lambda.get(i),
                })
                .collect(),
        };
        serde_json::to_string_pretty(&doc).expect("instance documents always serialize")
    }
}

/// Parses and validates an instance document.
pub fn load_instance(document: &str) -> Result<Instance> {
    let doc: InstanceDoc = serde_json::from_str(document)?;
    let mut lambda = Vec::with_capacity(doc.sets.len());
    let mut sets = Vec::with_capacity(doc.sets.len());
    for set in doc.sets {
        if !(set.lambda.is_finite() && set.lambda >= 0.0) {
            return Err(Error::InvalidCoefficient {
                id: set.id,
                value: set.lambda,
            });
        }
        lambda.push(set.lambda);
        sets.push((set.id, set.label, set.atoms));
    }
    let system = SetSystem::new(doc.measure, sets)?;
    let lambda = CoefficientFamily::new(&system, lambda)?;
    Ok(Instance { system, lambda })
}

pub fn load_instance_file(path: impl AsRef<Path>) -> Result<Instance> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path)
        .map_err(|e| Error::InvalidParameter(format!("cannot read {}: {e}", path.display())))?;
    load_instance(&text)
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = r#"{"measure":{"mode":"divisible","atoms":[{"id":"a","mass":1.0}]},
        "sets":[{"id":"S","atoms":["a"],"lambda":1.0}]}"#;

    #[test]
    fn minimal_instance() {
        let inst = load_instance(MINIMAL).unwrap();
        assert_eq!(inst.system.len(), 1);
        assert_eq!(inst.lambda.get(0), 1.0);
        let again = load_instance(&inst.to_json()).unwrap();
        assert_eq!(again.system.sets(), inst.system.sets());
    }

    #[test]
    fn negative_lambda_names_the_set() {
        let doc = MINIMAL.replace(r#""lambda":1.0"#, r#""lambda":-1"#);
        match load_instance(&doc) {
            Err(Error::InvalidCoefficient { id, value }) => {
                assert_eq!(id, "S");
                assert_eq!(value, -1.0);
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn missing_atom_names_set_and_atom() {
        let doc = MINIMAL.replace(r#""atoms":["a"]"#, r#""atoms":["a","b"]"#);
        let err = load_instance(&doc).unwrap_err();
        assert_eq!(err.to_string(), "set `S` references missing atom `b`");
    }

    #[test]
    fn schema_errors_carry_location() {
        let doc = MINIMAL.replace(r#""lambda":1.0"#, r#""lambda":1.0,"weight":2"#);
        let err = load_instance(&doc).unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains("weight") && msg.contains("line"), "{msg}");

        let neg = MINIMAL.replace(r#""mass":1.0"#, r#""mass":-0.5"#);
        assert!(load_instance(&neg).unwrap_err().to_string().contains("`a`"));

        let dup = MINIMAL.replace(
            r#"{"id":"S","atoms":["a"],"lambda":1.0}"#,
            r#"{"id":"S","atoms":["a"],"lambda":1.0},{"id":"S","atoms":[],"lambda":0}"#,
        );
        assert!(matches!(load_instance(&dup), Err(Error::DuplicateSet(_))));
    }
}
