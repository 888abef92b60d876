use nalgebra::DVector;

use super::compare::compare_trajectories;
use super::integrate::{integrate, IntegratorSettings};
use super::{project_initial_state, ConnectionField, TangentState};
use crate::connections::{covariant_derivative, ConnectionKind};
use crate::distributions::PointJets;
use crate::error::Result;
use crate::linalg::FieldJet;
use crate::parallel::{map, Execution};
use crate::systems::SystemSpec;

/// Settings for [`geodesic_invariance_check`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InvarianceSettings {
    pub horizon: f64,
    pub dt: f64,
    pub tol: f64,
}

impl Default for InvarianceSettings {
    fn default() -> Self {
        InvarianceSettings { horizon: 10.0, dt: 1e-3, tol: 1e-6 }
    }
}

#[derive(Debug, Clone)]
pub struct InvarianceReport {
    pub kind: ConnectionKind,
    /// Per-sample `max_t ‖φ‖∞`, or the integration error message.
    pub per_sample: Vec<std::result::Result<f64, String>>,
    pub max_drift: f64,
    pub passed: bool,
}

/// Integrate geodesics of `kind` from each (projected) sample and report the
/// largest constraint residual reached.
pub fn geodesic_invariance_check(
    system: &SystemSpec,
    kind: ConnectionKind,
    samples: &[TangentState],
    settings: &InvarianceSettings,
    execution: Execution,
) -> Result<InvarianceReport> {
    let starts = samples.iter().map(|s| project_initial_state(system, s)).collect::<Result<Vec<_>>>()?;
    let field = ConnectionField { system, kind, forces: false };
    let integ = IntegratorSettings::rk4(settings.dt, settings.horizon);
    let per_sample: Vec<_> =
        map(&starts, execution, |s| integrate(&field, s, &integ).map(|t| t.max_drift()).map_err(|e| e.to_string()));
    let max_drift = per_sample.iter().filter_map(|r| r.as_ref().ok()).copied().fold(0.0, f64::max);
    let passed = per_sample.iter().all(|r| r.is_ok()) && max_drift < settings.tol;
    Ok(InvarianceReport { kind, per_sample, max_drift, passed })
}

/// A point with a local section of `D` through it.
#[derive(Debug, Clone)]
pub struct SectionSample {
    pub q: Vec<f64>,
    pub field: FieldJet,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModifiedPotentialReport {
    /// `max ‖(𝒬 − P_F)(∇^G_X X)‖∞` over the samples.
    pub max_gap: f64,
    pub passed: bool,
}

/// Threshold for [`check_modified_potential_condition`].
pub const MODIFIED_POTENTIAL_TOL: f64 = 1e-8;

/// Compare the normal and input projectors on `∇^G_X X` for sections `X` of `D`.
pub fn check_modified_potential_condition(
    system: &SystemSpec,
    samples: &[SectionSample],
) -> Result<ModifiedPotentialReport> {
    let mut max_gap: f64 = 0.0;
    for s in samples {
        let jets = PointJets::at(system, &s.q)?;
        let d = covariant_derivative(&jets.levi_civita, &s.field.value, &s.field);
        let diff = (&jets.normal_projector()?.value - &jets.input_projector()?.value) * d;
        max_gap = max_gap.max(diff.amax());
    }
    Ok(ModifiedPotentialReport { max_gap, passed: max_gap < MODIFIED_POTENTIAL_TOL })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TangencyReport {
    /// `max ‖μ(∇^G_X X)‖∞` over the samples.
    pub max_gap: f64,
    pub passed: bool,
    /// When tangency holds: largest distance between free, nonholonomic and
    /// (if transversal) constrained geodesics started from the samples.
    pub trajectory_gap: Option<f64>,
}

pub const TANGENCY_TOL: f64 = 1e-8;
const TANGENCY_TRAJECTORY_TOL: f64 = 1e-6;
const TANGENCY_HORIZON: f64 = 2.0;

/// Whether the Levi-Civita geodesic spray is tangent to `D`, and if so,
/// whether the three geodesic families coincide.
pub fn geodesic_field_tangency_check(system: &SystemSpec, samples: &[SectionSample]) -> Result<TangencyReport> {
    let mut max_gap: f64 = 0.0;
    for s in samples {
        let jets = PointJets::at(system, &s.q)?;
        let d = covariant_derivative(&jets.levi_civita, &s.field.value, &s.field);
        if jets.constraints.value.nrows() > 0 {
            max_gap = max_gap.max((&jets.constraints.value * d).amax());
        }
    }
    if max_gap >= TANGENCY_TOL {
        return Ok(TangencyReport { max_gap, passed: false, trajectory_gap: None });
    }
    let settings = IntegratorSettings::rk4(1e-3, TANGENCY_HORIZON);
    let mut gap: f64 = 0.0;
    for s in samples.iter().take(5) {
        let start = TangentState { t: 0.0, q: DVector::from_column_slice(&s.q), qdot: s.field.value.clone() };
        let free =
            integrate(&ConnectionField { system, kind: ConnectionKind::LeviCivita, forces: false }, &start, &settings)?;
        let nh = integrate(
            &ConnectionField { system, kind: ConnectionKind::Nonholonomic, forces: false },
            &start,
            &settings,
        )?;
        gap = gap.max(compare_trajectories(&free, &nh)?.max);
        let constrained =
            integrate(&ConnectionField { system, kind: ConnectionKind::Constrained, forces: false }, &start, &settings);
        if let Ok(c) = constrained {
            gap = gap.max(compare_trajectories(&free, &c)?.max);
        }
    }
    Ok(TangencyReport { max_gap, passed: gap < TANGENCY_TRAJECTORY_TOL, trajectory_gap: Some(gap) })
}
