//! Text records for evaluations.

use serde::{Deserialize, Serialize};

use super::{Evaluation, EvaluationKind};
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "parameters", rename_all = "kebab-case")]
pub enum RecordKind {
    Uniform { a: f64, b: f64 },
    Exponential { rate: f64 },
    FoldedNormal { location: f64, scale: f64 },
    StepDensity { weights: Vec<f64> },
    Comb { k: u32 },
    Shifted { base: Box<EvaluationRecord>, offset: f64 },
}

/// `{kind, parameters, tail_tolerance}` form of an [`Evaluation`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvaluationRecord {
    #[serde(flatten)]
    pub kind: RecordKind,
    pub tail_tolerance: f64,
}

impl EvaluationRecord {
    /// Fails for user-supplied densities, which carry code rather than data.
    pub fn from_evaluation(theta: &Evaluation) -> Result<Self> {
        let kind = match theta.kind() {
            EvaluationKind::Uniform { a, b } => RecordKind::Uniform { a: *a, b: *b },
            EvaluationKind::Exponential { rate } => RecordKind::Exponential { rate: *rate },
            EvaluationKind::FoldedNormal { location, scale } => {
                RecordKind::FoldedNormal { location: *location, scale: *scale }
            }
            EvaluationKind::StepDensity(w) => RecordKind::StepDensity { weights: w.weights.clone() },
            EvaluationKind::Comb { k } => RecordKind::Comb { k: *k },
            EvaluationKind::Shifted { base, offset } => RecordKind::Shifted {
                base: Box::new(Self::from_evaluation(base)?),
                offset: *offset,
            },
            EvaluationKind::GenericDensity(_) => {
                return Err(Error::Unsupported("generic densities have no text record".into()))
            }
        };
        Ok(Self { kind, tail_tolerance: theta.tail_tolerance() })
    }

    pub fn to_evaluation(&self) -> Result<Evaluation> {
        let theta = match &self.kind {
            RecordKind::Uniform { a, b } => Evaluation::uniform(*a, *b)?,
            RecordKind::Exponential { rate } => Evaluation::exponential(*rate)?,
            RecordKind::FoldedNormal { location, scale } => Evaluation::folded_normal(*location, *scale)?,
            RecordKind::StepDensity { weights } => Evaluation::step_density(weights)?,
            RecordKind::Comb { k } => Evaluation::comb(*k)?,
            RecordKind::Shifted { base, offset } => base.to_evaluation()?.shift_pushforward(*offset)?,
        };
        theta.with_tail_tolerance(self.tail_tolerance)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string(self)?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn json_layout() {
        let theta = Evaluation::uniform(1.0, 3.0).unwrap();
        let json = EvaluationRecord::from_evaluation(&theta).unwrap().to_json().unwrap();
        assert_eq!(json, r#"{"kind":"uniform","parameters":{"a":1.0,"b":3.0},"tail_tolerance":1e-6}"#);
    }

    #[test]
    fn round_trip() {
        let cases = vec![
            Evaluation::exponential(0.25).unwrap().with_tail_tolerance(1e-4).unwrap(),
            Evaluation::folded_normal(2.0, 0.5).unwrap(),
            Evaluation::step_density(&[0.25, 0.75]).unwrap(),
            Evaluation::comb(3).unwrap().shift_pushforward(1.5).unwrap(),
        ];
        for theta in cases {
            let rec = EvaluationRecord::from_evaluation(&theta).unwrap();
            let back = EvaluationRecord::from_json(&rec.to_json().unwrap()).unwrap();
            assert_eq!(rec, back);
            let again = back.to_evaluation().unwrap();
            assert_eq!(again.label(), theta.label());
            assert_eq!(again.tail_tolerance(), theta.tail_tolerance());
        }
    }

    #[test]
    fn generic_is_unsupported() {
        let g = Evaluation::generic(|_| 1.0, 1.0, vec![]).unwrap();
        assert!(matches!(EvaluationRecord::from_evaluation(&g), Err(Error::Unsupported(_))));
    }

    #[test]
    fn invalid_parameters_are_rejected_on_load() {
        let rec = EvaluationRecord::from_json(r#"{"kind":"exponential","parameters":{"rate":-1},"tail_tolerance":1e-6}"#)
            .unwrap();
        assert!(rec.to_evaluation().is_err());
    }
}
