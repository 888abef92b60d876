//! Feedback synthesis for invariance of the constraint distribution and
//! the resulting closed-loop second-order field.

use std::fmt;

use nalgebra::{DMatrix, DVector};

use crate::dynamics::TangentState;
use crate::error::{check_len, Error, Result};
use crate::exprlang::Expr;
use crate::geometry::{factor, levi_civita_from_jet, ChartSpec};
use crate::linalg::{min_norm_solve, LeastSquares};
use crate::systems::SystemSpec;

/// `A` is treated as singular when `σ_min ≤ SINGULAR_RTOL · σ_max`.
pub const SINGULAR_RTOL: f64 = 1e-10;
/// Least-squares residual above `CONSISTENCY_TOL · (1 + ‖b‖)` means `Aτ = b`
/// has no solution.
pub const CONSISTENCY_TOL: f64 = 1e-9;

/// Uncontrolled force vector field `Y⁰(q, q̇)`.
#[derive(Debug, Clone, PartialEq)]
pub struct ForceField {
    n: usize,
    components: Option<Vec<Expr>>,
}

impl ForceField {
    pub fn zero(n: usize) -> Self {
        ForceField { n, components: None }
    }

    pub fn new(n: usize, components: Vec<Expr>) -> Result<Self> {
        check_len(n, components.len())?;
        if components.iter().all(Expr::is_literal_zero) {
            return Ok(Self::zero(n));
        }
        Ok(ForceField { n, components: Some(components) })
    }

    pub fn parse(chart: &ChartSpec, sources: &[String]) -> Result<Self> {
        let comps = sources
            .iter()
            .enumerate()
            .map(|(i, s)| chart.parse_phase(s, &format!("drift_force[{i}]")))
            .collect::<Result<Vec<_>>>()?;
        Self::new(chart.dim(), comps)
    }

    pub fn is_zero(&self) -> bool {
        self.components.is_none()
    }

    pub fn components(&self) -> Option<&[Expr]> {
        self.components.as_deref()
    }

    pub fn eval(&self, q: &[f64], qdot: &[f64]) -> Result<DVector<f64>> {
        match &self.components {
            None => Ok(DVector::zeros(self.n)),
            Some(c) => {
                let vals = c.iter().map(|e| e.eval(q, qdot)).collect::<Result<Vec<_>, _>>()?;
                Ok(DVector::from_vec(vals))
            }
        }
    }
}

/// Solution of `A τ = b` with its diagnostics.
#[derive(Debug, Clone, PartialEq)]
pub struct ControlSolution {
    pub tau: DVector<f64>,
    /// `σ_max / σ_min` of `A` (infinite when singular).
    pub condition: f64,
    /// `‖A τ − b‖`.
    pub residual: f64,
    pub rhs_norm: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub enum ControlOutcome {
    Unique(ControlSolution),
    /// `b` is not in the range of `A`; carries the least-squares attempt.
    NonExistent(ControlSolution),
    /// `A` is singular but `b` is in its range; carries the minimum-norm solution.
    NonUnique(ControlSolution),
}

impl ControlOutcome {
    pub fn solution(&self) -> &ControlSolution {
        match self {
            ControlOutcome::Unique(s) | ControlOutcome::NonExistent(s) | ControlOutcome::NonUnique(s) => s,
        }
    }

    pub fn label(&self) -> &'static str {
        match self {
            ControlOutcome::Unique(_) => "Unique",
            ControlOutcome::NonExistent(_) => "NonExistent",
            ControlOutcome::NonUnique(_) => "NonUnique",
        }
    }
}

impl fmt::Display for ControlOutcome {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = self.solution();
        match self {
            ControlOutcome::Unique(_) => write!(f, "Unique (cond(A) = {:.3e})", s.condition),
            ControlOutcome::NonExistent(_) => write!(
                f,
                "NonExistent: A is singular and b is outside its range (residual {:.3e}, |b| = {:.3e})",
                s.residual, s.rhs_norm
            ),
            ControlOutcome::NonUnique(_) => {
                write!(f, "NonUnique: A is singular and b is in its range (minimum-norm |tau| = {:.3e})", s.tau.norm())
            }
        }
    }
}

/// What the closed loop does when the control is not unique.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum NonUniquePolicy {
    #[default]
    Refuse,
    MinimumNorm,
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct ControlSettings {
    pub policy: NonUniquePolicy,
    /// Optional gain `k` so that `A τ = b − k φ`, which drives the residuals to
    /// zero instead of holding them constant. Off by default.
    pub stabilize: Option<f64>,
}

/// Pointwise quantities shared by the control computations.
struct Pieces {
    /// `m × n`.
    c: DMatrix<f64>,
    /// `Σ_j q̇^j ∂_j C`.
    c_dot: DMatrix<f64>,
    /// `n × k` force fields.
    y: DMatrix<f64>,
    /// Uncontrolled acceleration.
    drift: DVector<f64>,
}

fn pieces(system: &SystemSpec, state: &TangentState) -> Result<Pieces> {
    let n = system.dim();
    check_len(n, state.q.len())?;
    check_len(n, state.qdot.len())?;
    let q = state.q.as_slice();
    let metric = system.metric.jet(q)?;
    let chol = factor(&metric.value, q)?;
    let lc = levi_civita_from_jet(&metric, &chol.inverse());
    let mut drift = -lc.contract(&state.qdot, &state.qdot);
    drift += system.drift_force.eval(q, state.qdot.as_slice())?;
    if !system.potential.is_zero() {
        drift -= chol.solve(&system.potential.differential(q)?);
    }
    let c_jet = system.constraints.jet(q)?;
    let c_dot = c_jet.directional(&state.qdot);
    let f = system.inputs.covectors_at(q)?;
    let y = chol.solve(&f.transpose());
    Ok(Pieces { c: c_jet.value, c_dot, y, drift })
}

/// `A^b_a = μ^b(Y^a)`, an `m × k` matrix.
pub fn control_matrix(system: &SystemSpec, q: &[f64]) -> Result<DMatrix<f64>> {
    let c = system.constraints.matrix_at(q)?;
    let y = system.inputs.vector_fields_at(&system.metric, q)?;
    Ok(c * y)
}

/// Acceleration of the uncontrolled system, `−Γ^G(q̇, q̇) − grad V + Y⁰`.
pub fn uncontrolled_acceleration(system: &SystemSpec, state: &TangentState) -> Result<DVector<f64>> {
    Ok(pieces(system, state)?.drift)
}

/// `b^b = −[(∂_j μ^b_i) q̇^j q̇^i + μ^b_i a^i]` with `a` the uncontrolled
/// acceleration: minus the rate of change of `φ^b` along the free flow.
pub fn control_rhs(system: &SystemSpec, state: &TangentState) -> Result<DVector<f64>> {
    let p = pieces(system, state)?;
    Ok(rhs_from(&p, &state.qdot))
}

fn rhs_from(p: &Pieces, qdot: &DVector<f64>) -> DVector<f64> {
    -(&p.c_dot * qdot + &p.c * &p.drift)
}

fn classify(a: &DMatrix<f64>, b: &DVector<f64>) -> ControlOutcome {
    let ls: LeastSquares = min_norm_solve(a, b, SINGULAR_RTOL);
    let rhs_norm = b.norm();
    let full = a.nrows() == a.ncols() && ls.rank == a.ncols() && a.ncols() > 0;
    let condition = if ls.rank == a.ncols().min(a.nrows()) && ls.sigma_min > 0.0 && a.ncols() > 0 {
        ls.sigma_max / ls.sigma_min
    } else {
        f64::INFINITY
    };
    let solution = ControlSolution { tau: ls.x, condition, residual: ls.residual, rhs_norm };
    if full || (a.nrows() == 0 && a.ncols() == 0) {
        ControlOutcome::Unique(solution)
    } else if solution.residual > CONSISTENCY_TOL * (1.0 + rhs_norm) {
        ControlOutcome::NonExistent(solution)
    } else {
        ControlOutcome::NonUnique(solution)
    }
}

/// Solve `A τ = b` for the invariance-enforcing control at `state`.
pub fn solve_control(system: &SystemSpec, state: &TangentState) -> Result<ControlOutcome> {
    let p = pieces(system, state)?;
    let b = rhs_from(&p, &state.qdot);
    Ok(classify(&(&p.c * &p.y), &b))
}

/// One evaluation of the closed-loop field.
#[derive(Debug, Clone)]
pub struct ClosedLoopSample {
    pub qddot: DVector<f64>,
    pub tau: DVector<f64>,
}

/// `q̈ = −Γ^G(q̇, q̇) − grad V + Y⁰ + Σ τ_a Y^a`.
pub fn closed_loop_field(
    system: &SystemSpec,
    state: &TangentState,
    settings: &ControlSettings,
) -> Result<ClosedLoopSample> {
    let p = pieces(system, state)?;
    let mut b = rhs_from(&p, &state.qdot);
    if let Some(k) = settings.stabilize {
        b -= (&p.c * &state.qdot) * k;
    }
    let outcome = classify(&(&p.c * &p.y), &b);
    let tau = match outcome {
        ControlOutcome::Unique(s) => s.tau,
        ControlOutcome::NonUnique(s) if settings.policy == NonUniquePolicy::MinimumNorm => s.tau,
        other => return Err(Error::ControlUnavailable(other)),
    };
    Ok(ClosedLoopSample { qddot: &p.drift + &p.y * &tau, tau })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::systems::builtin;

    fn st(q: &[f64], v: &[f64]) -> TangentState {
        TangentState::new(0.0, q.to_vec(), v.to_vec())
    }

    #[test]
    fn se2_matrix_rhs_and_control() {
        let sys = builtin::se2_knife(1.0, 1.0);
        for th in [0.0, 0.5, -2.0] {
            let a = control_matrix(&sys, &[0.0, 0.0, th]).unwrap();
            assert!((a[(0, 0)] - 1.0).abs() < 1e-15);
        }
        let s = st(&[0.0; 3], &[1.0, 0.0, 2.0]);
        assert!((control_rhs(&sys, &s).unwrap()[0] + 2.0).abs() < 1e-15);
        match solve_control(&sys, &s).unwrap() {
            ControlOutcome::Unique(sol) => assert!((sol.tau[0] + 2.0).abs() < 1e-14),
            other => panic!("{other}"),
        }
        let out = closed_loop_field(&sys, &s, &ControlSettings::default()).unwrap();
        assert!((out.qddot - DVector::from_vec(vec![0.0, 2.0, -2.0])).amax() < 1e-14);
        assert_eq!(control_rhs(&sys, &st(&[0.3, 0.1, 1.0], &[0.0; 3])).unwrap()[0], 0.0);
    }

    #[test]
    fn disk_matrix_and_control() {
        let sys = builtin::rolling_disk(1.0, 1.0, 1.0);
        let a = control_matrix(&sys, &[0.0; 4]).unwrap();
        assert!((a - DMatrix::from_row_slice(2, 2, &[2.0, 0.0, 0.0, 1.0])).amax() < 1e-15);
        let phi = std::f64::consts::FRAC_PI_2;
        let s = st(&[0.0, 0.0, 0.0, phi], &[phi.cos(), phi.sin(), 1.0, 1.0]);
        match solve_control(&sys, &s).unwrap() {
            ControlOutcome::Unique(sol) => {
                assert!((sol.tau[0] + 1.0).abs() < 1e-14 && sol.tau[1].abs() < 1e-14, "{:?}", sol.tau)
            }
            other => panic!("{other}"),
        }
    }

    #[test]
    fn damped_rhs_unchanged_on_constraint() {
        let plain = builtin::se2_knife(1.0, 1.0);
        let damped = builtin::se2_damped(1.0, 1.0, 2.0);
        let th: f64 = 0.7;
        let s = st(&[0.0, 0.0, th], &[1.5 * th.cos(), 1.5 * th.sin(), -0.4]);
        let b0 = control_rhs(&plain, &s).unwrap();
        let b1 = control_rhs(&damped, &s).unwrap();
        assert!((b0 - b1).amax() < 1e-14);
        let acc = uncontrolled_acceleration(&damped, &st(&[0.0; 3], &[1.0, 1.0, 0.0])).unwrap();
        assert!((acc - DVector::from_vec(vec![-2.0, -2.0, 0.0])).amax() < 1e-15);
    }

    #[test]
    fn failure_modes() {
        let none = builtin::nonexistence_demo(1.0, 1.0);
        let th: f64 = 0.4;
        let a = control_matrix(&none, &[0.0, 0.0, th]).unwrap();
        assert!(a[(0, 0)].abs() < 1e-15);
        let generic = st(&[0.0, 0.0, th], &[th.cos(), th.sin(), 1.0]);
        let out = solve_control(&none, &generic).unwrap();
        assert!(matches!(out, ControlOutcome::NonExistent(_)), "{out}");
        assert!(matches!(
            closed_loop_field(&none, &generic, &ControlSettings::default()),
            Err(Error::ControlUnavailable(ControlOutcome::NonExistent(_)))
        ));
        // on the degenerate set cosθ ẋ + sinθ ẏ = 0 the right-hand side vanishes too
        let degenerate = st(&[0.0, 0.0, th], &[0.0, 0.0, 1.0]);
        assert!(matches!(solve_control(&none, &degenerate).unwrap(), ControlOutcome::NonUnique(_)));

        let many = builtin::nonuniqueness_demo(1.0, 1.0);
        let s = st(&[0.0, 0.0, th], &[th.cos(), th.sin(), 1.0]);
        let out = solve_control(&many, &s).unwrap();
        assert!(matches!(out, ControlOutcome::NonUnique(_)), "{out}");
        assert!(closed_loop_field(&many, &s, &ControlSettings::default()).is_err());
        let relaxed = ControlSettings { policy: NonUniquePolicy::MinimumNorm, stabilize: None };
        assert!(closed_loop_field(&many, &s, &relaxed).is_ok());
    }

    #[test]
    fn stabilized_law_contracts_residual() {
        let sys = builtin::se2_knife(1.0, 1.0);
        let s = st(&[0.0; 3], &[1.0, 0.5, 2.0]);
        let settings = ControlSettings { stabilize: Some(3.0), ..Default::default() };
        let out = closed_loop_field(&sys, &s, &settings).unwrap();
        // d/dt φ = (∂_j μ q̇^j) q̇ + μ q̈ must equal −3 φ
        let c = sys.constraints.matrix_at(s.q.as_slice()).unwrap();
        let c_dot = sys.constraints.jet(s.q.as_slice()).unwrap().directional(&s.qdot);
        let rate = &c_dot * &s.qdot + &c * &out.qddot;
        let phi = &c * &s.qdot;
        assert!((rate + phi * 3.0).amax() < 1e-13);
    }
}
