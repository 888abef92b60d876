//! System descriptions, their serializable text form and the builtin
//! catalogue.

pub mod builtin;
pub mod disk_reference;

use std::collections::BTreeMap;

use nalgebra::DVector;
use serde::{Deserialize, Serialize};

use crate::control::ForceField;
use crate::distributions::{Distribution, InputDistribution};
use crate::dynamics::TangentState;
use crate::error::{check_len, Error, Result};
use crate::exprlang::Expr;
use crate::geometry::{ChartSpec, MetricField, PotentialField};

/// Closed-form feedback law, one expression per input over `(q, q̇)`.
#[derive(Debug, Clone, PartialEq)]
pub struct ReferenceControl {
    pub components: Vec<Expr>,
}

impl ReferenceControl {
    pub fn eval(&self, state: &TangentState) -> Result<DVector<f64>> {
        let vals = self
            .components
            .iter()
            .map(|e| e.eval(state.q.as_slice(), state.qdot.as_slice()))
            .collect::<Result<Vec<_>, _>>()?;
        Ok(DVector::from_vec(vals))
    }
}

/// Immutable mechanical control system on a single chart.
#[derive(Debug, Clone, PartialEq)]
pub struct SystemSpec {
    pub name: String,
    pub chart: ChartSpec,
    pub metric: MetricField,
    pub potential: PotentialField,
    pub constraints: Distribution,
    pub inputs: InputDistribution,
    pub drift_force: ForceField,
    pub reference_controls: Vec<ReferenceControl>,
}

/// Text form of a system: every field is an expression string over the
/// declared coordinates (`x`, `x_dot`, or positional `q1`, `v1`) and
/// parameters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SystemDefinition {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
    pub dim: usize,
    pub coordinates: Vec<String>,
    #[serde(default)]
    pub parameters: BTreeMap<String, f64>,
    pub metric: Vec<Vec<String>>,
    #[serde(default = "zero_string")]
    pub potential: String,
    #[serde(default)]
    pub constraints: Vec<Vec<String>>,
    #[serde(default)]
    pub inputs: Vec<Vec<String>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub drift_force: Option<Vec<String>>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub reference_controls: Vec<Vec<String>>,
}

fn zero_string() -> String {
    "0".into()
}

/// Points at which the metric expressions are checked for symmetry.
fn probe_points(n: usize) -> Vec<Vec<f64>> {
    let base = [0.0, 0.37, -1.21, 2.03, -0.58, 1.49, -2.71, 0.83];
    (0..4).map(|p| (0..n).map(|i| base[(i + 3 * p) % base.len()]).collect()).collect()
}

impl SystemSpec {
    pub fn from_definition(def: &SystemDefinition) -> Result<Self> {
        if def.dim != def.coordinates.len() {
            return Err(Error::InvalidSystem(format!(
                "dim is {} but {} coordinates are declared",
                def.dim,
                def.coordinates.len()
            )));
        }
        let chart = ChartSpec::new(def.coordinates.clone(), def.parameters.clone())?;
        let n = chart.dim();
        let metric = MetricField::parse(&chart, &def.metric)?;
        let potential = PotentialField::new(chart.parse_configuration(&def.potential, "potential")?)?;
        let constraints = Distribution::parse(&chart, &def.constraints)?;
        if constraints.count() >= n {
            return Err(Error::InvalidSystem(format!(
                "{} constraints leave no motion in dimension {n}",
                constraints.count()
            )));
        }
        let inputs = InputDistribution::parse(&chart, &def.inputs)?;
        let drift_force = match &def.drift_force {
            Some(src) => {
                check_len(n, src.len())?;
                ForceField::parse(&chart, src)?
            }
            None => ForceField::zero(n),
        };
        let reference_controls = def
            .reference_controls
            .iter()
            .enumerate()
            .map(|(l, law)| {
                check_len(inputs.count(), law.len())?;
                let components = law
                    .iter()
                    .enumerate()
                    .map(|(a, s)| chart.parse_phase(s, &format!("reference_controls[{l}][{a}]")))
                    .collect::<Result<Vec<_>>>()?;
                Ok(ReferenceControl { components })
            })
            .collect::<Result<Vec<_>>>()?;
        for q in probe_points(n) {
            match metric.check_symmetric_at(&q) {
                Err(Error::Eval(_)) | Ok(()) => {}
                Err(e) => return Err(e),
            }
        }
        Ok(SystemSpec {
            name: def.name.clone().unwrap_or_else(|| "custom".into()),
            chart,
            metric,
            potential,
            constraints,
            inputs,
            drift_force,
            reference_controls,
        })
    }

    /// Text form that parses back to an equal system.
    pub fn to_definition(&self) -> SystemDefinition {
        let n = self.dim();
        let rows = |forms: &[Vec<Expr>]| -> Vec<Vec<String>> {
            forms.iter().map(|r| r.iter().map(|e| e.to_string()).collect()).collect()
        };
        SystemDefinition {
            name: Some(self.name.clone()),
            dim: n,
            coordinates: self.chart.coordinates().to_vec(),
            parameters: self.chart.parameters().clone(),
            metric: (0..n).map(|i| (0..n).map(|j| self.metric.entry(i, j).to_string()).collect()).collect(),
            potential: self.potential.expr().to_string(),
            constraints: rows(self.constraints.forms()),
            inputs: rows(self.inputs.forms()),
            drift_force: self.drift_force.components().map(|c| c.iter().map(|e| e.to_string()).collect()),
            reference_controls: self
                .reference_controls
                .iter()
                .map(|r| r.components.iter().map(|e| e.to_string()).collect())
                .collect(),
        }
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let def: SystemDefinition = serde_json::from_str(text)
            .map_err(|e| Error::InvalidSystem(format!("malformed system definition: {e}")))?;
        Self::from_definition(&def)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&self.to_definition()).expect("definitions always serialize")
    }

    pub fn dim(&self) -> usize {
        self.chart.dim()
    }

    pub fn parameter(&self, name: &str) -> Option<f64> {
        self.chart.parameters().get(name).copied()
    }
}
