//! Second-order fields for the four formulations, integration, trajectory
//! records, comparison and the consistency checks built on top of them.

mod checks;
mod compare;
mod integrate;
mod trajectory;

use std::fmt;
use std::str::FromStr;

use nalgebra::DVector;
use serde::{Deserialize, Serialize};

use crate::connections::{symbols_from_jets, ConnectionKind};
use crate::control::{closed_loop_field, uncontrolled_acceleration, ControlSettings};
use crate::distributions::{orthogonal_projectors, PointJets};
use crate::error::{check_len, Error, Result};
use crate::geometry::metric_at;
use crate::parallel::{map, Execution};
use crate::systems::SystemSpec;

pub use checks::{
    check_modified_potential_condition, geodesic_field_tangency_check, geodesic_invariance_check, InvarianceReport,
    InvarianceSettings, ModifiedPotentialReport, SectionSample, TangencyReport,
};
pub use compare::{compare_trajectories, TrajectoryDistance};
pub use integrate::{integrate, IntegratorSettings, Method};
pub use trajectory::{Sample, Trajectory};

/// Residual magnitude above which an initial state is projected onto `D`.
pub const INITIAL_PROJECTION_TOL: f64 = 1e-10;

/// A point `(q, q̇)` of the tangent bundle at time `t`.
#[derive(Debug, Clone, PartialEq)]
pub struct TangentState {
    pub t: f64,
    pub q: DVector<f64>,
    pub qdot: DVector<f64>,
}

impl TangentState {
    pub fn new(t: f64, q: Vec<f64>, qdot: Vec<f64>) -> Self {
        assert_eq!(q.len(), qdot.len(), "q and qdot must have equal length");
        TangentState { t, q: DVector::from_vec(q), qdot: DVector::from_vec(qdot) }
    }

    pub fn dim(&self) -> usize {
        self.q.len()
    }

    pub fn is_finite(&self) -> bool {
        self.t.is_finite() && self.q.iter().chain(self.qdot.iter()).all(|x| x.is_finite())
    }
}

/// Acceleration and the controls that produced it.
#[derive(Debug, Clone)]
pub struct FieldSample {
    pub qddot: DVector<f64>,
    pub controls: DVector<f64>,
}

/// `q̈ = F(q, q̇)`.
pub trait SecondOrderField: Sync {
    fn system(&self) -> &SystemSpec;
    /// Number of control channels recorded per sample.
    fn control_count(&self) -> usize {
        0
    }
    fn evaluate(&self, state: &TangentState) -> Result<FieldSample>;
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Formulation {
    /// Free system plus the invariance-enforcing feedback.
    ClosedLoop,
    /// Geodesics of the constrained connection with the `D`-projected forces.
    Constrained,
    /// Geodesics of the nonholonomic connection with the `𝒫`-projected forces.
    Nonholonomic,
    /// Free system, no control.
    Uncontrolled,
}

impl Formulation {
    pub const ALL: [Formulation; 4] =
        [Formulation::ClosedLoop, Formulation::Constrained, Formulation::Nonholonomic, Formulation::Uncontrolled];

    pub fn name(self) -> &'static str {
        match self {
            Formulation::ClosedLoop => "closedloop",
            Formulation::Constrained => "constrained",
            Formulation::Nonholonomic => "nonholonomic",
            Formulation::Uncontrolled => "uncontrolled",
        }
    }
}

impl fmt::Display for Formulation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Formulation {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        Formulation::ALL
            .into_iter()
            .find(|f| f.name() == s)
            .ok_or_else(|| Error::InvalidSettings(format!("unknown formulation `{s}`")))
    }
}

pub struct ClosedLoopField<'a> {
    pub system: &'a SystemSpec,
    pub settings: ControlSettings,
}

impl SecondOrderField for ClosedLoopField<'_> {
    fn system(&self) -> &SystemSpec {
        self.system
    }
    fn control_count(&self) -> usize {
        self.system.inputs.count()
    }
    fn evaluate(&self, state: &TangentState) -> Result<FieldSample> {
        let s = closed_loop_field(self.system, state, &self.settings)?;
        Ok(FieldSample { qddot: s.qddot, controls: s.tau })
    }
}

pub struct UncontrolledField<'a> {
    pub system: &'a SystemSpec,
}

impl SecondOrderField for UncontrolledField<'_> {
    fn system(&self) -> &SystemSpec {
        self.system
    }
    fn evaluate(&self, state: &TangentState) -> Result<FieldSample> {
        Ok(FieldSample { qddot: uncontrolled_acceleration(self.system, state)?, controls: DVector::zeros(0) })
    }
}

/// Geodesic spray of a connection plus the non-inertial forces projected
/// onto `D` by the connection's own complement: `q̈ = −Γ(q̇, q̇) + (I − T)(Y⁰ − grad V)`.
/// With `forces = false` the field is the bare geodesic spray.
pub struct ConnectionField<'a> {
    pub system: &'a SystemSpec,
    pub kind: ConnectionKind,
    pub forces: bool,
}

impl SecondOrderField for ConnectionField<'_> {
    fn system(&self) -> &SystemSpec {
        self.system
    }
    fn evaluate(&self, state: &TangentState) -> Result<FieldSample> {
        let q = state.q.as_slice();
        let jets = PointJets::at(self.system, q)?;
        let gamma = symbols_from_jets(&jets, self.kind)?;
        let mut qddot = -gamma.contract(&state.qdot, &state.qdot);
        if self.forces {
            let sys = self.system;
            let mut force = sys.drift_force.eval(q, state.qdot.as_slice())?;
            if !sys.potential.is_zero() {
                force -= &jets.metric_inverse.value * sys.potential.differential(q)?;
            }
            if force.amax() != 0.0 {
                let projected = match self.kind {
                    ConnectionKind::LeviCivita => force,
                    ConnectionKind::Constrained => &force - &jets.input_projector()?.value * &force,
                    ConnectionKind::Nonholonomic => &force - &jets.normal_projector()?.value * &force,
                };
                qddot += projected;
            }
        }
        Ok(FieldSample { qddot, controls: DVector::zeros(0) })
    }
}

/// Project `q̇` onto `D` with `𝒫` when `max |φ|` exceeds the tolerance.
pub fn project_initial_state(system: &SystemSpec, state: &TangentState) -> Result<TangentState> {
    check_len(system.dim(), state.dim())?;
    let q = state.q.as_slice();
    let phi = system.constraints.matrix_at(q)? * &state.qdot;
    if phi.is_empty() || phi.amax() <= INITIAL_PROJECTION_TOL {
        return Ok(state.clone());
    }
    log::warn!("initial state violates the constraints by {:.3e}; projecting the velocity onto D", phi.amax());
    let pair = orthogonal_projectors(&system.metric, &system.constraints, q)?;
    Ok(TangentState { t: state.t, q: state.q.clone(), qdot: &pair.onto_d * &state.qdot })
}

/// `½ q̇ᵀ M q̇ + V(q)`.
pub fn energy(system: &SystemSpec, state: &TangentState) -> Result<f64> {
    let q = state.q.as_slice();
    let m = metric_at(&system.metric, q)?;
    Ok(0.5 * state.qdot.dot(&(m * &state.qdot)) + system.potential.value(q)?)
}

/// Integrate one formulation from `initial` (projected onto `D` first when
/// needed, except for the uncontrolled formulation).
pub fn simulate(
    system: &SystemSpec,
    formulation: Formulation,
    initial: &TangentState,
    settings: &IntegratorSettings,
    control: &ControlSettings,
) -> Result<Trajectory> {
    let start = match formulation {
        Formulation::Uncontrolled => initial.clone(),
        _ => project_initial_state(system, initial)?,
    };
    let mut traj = match formulation {
        Formulation::ClosedLoop => integrate(&ClosedLoopField { system, settings: *control }, &start, settings)?,
        Formulation::Constrained => {
            integrate(&ConnectionField { system, kind: ConnectionKind::Constrained, forces: true }, &start, settings)?
        }
        Formulation::Nonholonomic => {
            integrate(&ConnectionField { system, kind: ConnectionKind::Nonholonomic, forces: true }, &start, settings)?
        }
        Formulation::Uncontrolled => integrate(&UncontrolledField { system }, &start, settings)?,
    };
    traj.formulation = Some(formulation);
    Ok(traj)
}

pub fn closed_loop_trajectory(
    system: &SystemSpec,
    initial: &TangentState,
    settings: &IntegratorSettings,
) -> Result<Trajectory> {
    simulate(system, Formulation::ClosedLoop, initial, settings, &ControlSettings::default())
}

pub fn constrained_geodesic_trajectory(
    system: &SystemSpec,
    initial: &TangentState,
    settings: &IntegratorSettings,
) -> Result<Trajectory> {
    simulate(system, Formulation::Constrained, initial, settings, &ControlSettings::default())
}

pub fn nonholonomic_trajectory(
    system: &SystemSpec,
    initial: &TangentState,
    settings: &IntegratorSettings,
) -> Result<Trajectory> {
    simulate(system, Formulation::Nonholonomic, initial, settings, &ControlSettings::default())
}

/// Run one formulation from many initial states.
pub fn simulate_batch(
    system: &SystemSpec,
    formulation: Formulation,
    initials: &[TangentState],
    settings: &IntegratorSettings,
    control: &ControlSettings,
    execution: Execution,
) -> Vec<Result<Trajectory>> {
    map(initials, execution, |s| simulate(system, formulation, s, settings, control))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::systems::builtin;

    #[test]
    fn formulation_names_parse() {
        for f in Formulation::ALL {
            assert_eq!(f.name().parse::<Formulation>().unwrap(), f);
        }
        assert!("geodesic".parse::<Formulation>().is_err());
    }

    #[test]
    fn off_constraint_start_is_projected() {
        let sys = builtin::se2_knife(1.0, 1.0);
        let s = TangentState::new(0.0, vec![0.0; 3], vec![1.0, 1.0, 0.0]);
        let p = project_initial_state(&sys, &s).unwrap();
        assert!((p.qdot - DVector::from_vec(vec![1.0, 0.0, 0.0])).amax() < 1e-14);
        let on = TangentState::new(0.0, vec![0.0; 3], vec![1.0, 0.0, 3.0]);
        assert_eq!(project_initial_state(&sys, &on).unwrap(), on);
    }

    #[test]
    fn energy_of_knife() {
        let sys = builtin::se2_knife(2.0, 3.0);
        let s = TangentState::new(0.0, vec![0.0; 3], vec![1.0, 0.0, 1.0]);
        assert!((energy(&sys, &s).unwrap() - 2.5).abs() < 1e-15);
    }

    #[test]
    fn constrained_field_matches_closed_loop_pointwise() {
        let sys = builtin::rolling_disk(1.0, 2.0, 3.0);
        let phi: f64 = 0.6;
        let s = TangentState::new(0.0, vec![0.1, 0.2, 0.3, phi], vec![0.7 * phi.cos(), 0.7 * phi.sin(), 0.7, -0.4]);
        let a = ClosedLoopField { system: &sys, settings: ControlSettings::default() }.evaluate(&s).unwrap();
        let b = ConnectionField { system: &sys, kind: ConnectionKind::Constrained, forces: true }.evaluate(&s).unwrap();
        assert!((a.qddot - b.qddot).amax() < 1e-12);
    }
}
