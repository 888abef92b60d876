use nalgebra::DVector;
use serde::{Deserialize, Serialize};

use super::trajectory::{Sample, Trajectory};
use super::{energy, SecondOrderField, TangentState};
use crate::error::{check_len, Error, Result};
use crate::exprlang::EvalError;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "method", rename_all = "lowercase")]
pub enum Method {
    /// Classical fixed-step Runge-Kutta.
    Rk4,
    /// Dormand-Prince 5(4) with step-size control.
    Rk45 { atol: f64, rtol: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IntegratorSettings {
    pub method: Method,
    /// Fixed step for RK4, initial step for RK45.
    pub dt: f64,
    pub horizon: f64,
}

impl IntegratorSettings {
    pub fn rk4(dt: f64, horizon: f64) -> Self {
        IntegratorSettings { method: Method::Rk4, dt, horizon }
    }

    pub fn rk45(atol: f64, rtol: f64, horizon: f64) -> Self {
        IntegratorSettings { method: Method::Rk45 { atol, rtol }, dt: 1e-3, horizon }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.dt.is_finite() && self.dt > 0.0) {
            return Err(Error::InvalidSettings(format!("time step must be positive, got {}", self.dt)));
        }
        if !(self.horizon.is_finite() && self.horizon >= 0.0) {
            return Err(Error::InvalidSettings(format!("horizon must be non-negative, got {}", self.horizon)));
        }
        if let Method::Rk45 { atol, rtol } = self.method {
            if !(atol > 0.0 && rtol > 0.0 && atol.is_finite() && rtol.is_finite()) {
                return Err(Error::InvalidSettings("RK45 tolerances must be positive".into()));
            }
        }
        Ok(())
    }
}

impl Default for IntegratorSettings {
    fn default() -> Self {
        Self::rk4(1e-3, 10.0)
    }
}

/// Packed phase-space state `[q; q̇]`.
fn pack(s: &TangentState) -> DVector<f64> {
    let n = s.dim();
    DVector::from_fn(2 * n, |i, _| if i < n { s.q[i] } else { s.qdot[i - n] })
}

fn unpack(t: f64, y: &DVector<f64>) -> TangentState {
    let n = y.len() / 2;
    TangentState { t, q: y.rows(0, n).into_owned(), qdot: y.rows(n, n).into_owned() }
}

fn derivative(field: &dyn SecondOrderField, t: f64, y: &DVector<f64>) -> Result<DVector<f64>> {
    let n = y.len() / 2;
    if !y.iter().all(|v| v.is_finite()) {
        return Err(Error::StepFailure { t });
    }
    let s = unpack(t, y);
    let acc = match field.evaluate(&s) {
        Ok(sample) if sample.qddot.iter().all(|v| v.is_finite()) => sample.qddot,
        Ok(_) | Err(Error::Eval(EvalError::NonFinite)) => return Err(Error::StepFailure { t }),
        Err(e) => return Err(e),
    };
    let mut out = DVector::zeros(2 * n);
    out.rows_mut(0, n).copy_from(&s.qdot);
    out.rows_mut(n, n).copy_from(&acc);
    Ok(out)
}

fn record(field: &dyn SecondOrderField, state: TangentState) -> Result<Sample> {
    if !state.is_finite() {
        return Err(Error::StepFailure { t: state.t });
    }
    let t = state.t;
    let overflow = |e: Error| match e {
        Error::Eval(EvalError::NonFinite) => Error::StepFailure { t },
        e => e,
    };
    let system = field.system();
    let controls = field.evaluate(&state).map_err(overflow)?.controls;
    let residuals = system.constraints.matrix_at(state.q.as_slice()).map_err(overflow)? * &state.qdot;
    let energy = energy(system, &state).map_err(overflow)?;
    Ok(Sample { state, controls, residuals, energy })
}

fn rk4_step(field: &dyn SecondOrderField, t: f64, y: &DVector<f64>, h: f64) -> Result<DVector<f64>> {
    let k1 = derivative(field, t, y)?;
    let k2 = derivative(field, t + 0.5 * h, &(y + &k1 * (0.5 * h)))?;
    let k3 = derivative(field, t + 0.5 * h, &(y + &k2 * (0.5 * h)))?;
    let k4 = derivative(field, t + h, &(y + &k3 * h))?;
    Ok(y + (k1 + k2 * 2.0 + k3 * 2.0 + k4) * (h / 6.0))
}

// Dormand-Prince coefficients.
const C: [f64; 7] = [0.0, 1.0 / 5.0, 3.0 / 10.0, 4.0 / 5.0, 8.0 / 9.0, 1.0, 1.0];
const A: [[f64; 6]; 7] = [
    [0.0; 6],
    [1.0 / 5.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [19372.0 / 6561.0, -25360.0 / 2187.0, 64448.0 / 6561.0, -212.0 / 729.0, 0.0, 0.0],
    [9017.0 / 3168.0, -355.0 / 33.0, 46732.0 / 5247.0, 49.0 / 176.0, -5103.0 / 18656.0, 0.0],
    [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0],
];
const B5: [f64; 7] = [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0, 0.0];
const B4: [f64; 7] =
    [5179.0 / 57600.0, 0.0, 7571.0 / 16695.0, 393.0 / 640.0, -92097.0 / 339200.0, 187.0 / 2100.0, 1.0 / 40.0];

/// One Dormand-Prince step: fifth-order solution and the error estimate.
fn dopri_step(field: &dyn SecondOrderField, t: f64, y: &DVector<f64>, h: f64) -> Result<(DVector<f64>, DVector<f64>)> {
    let mut k: Vec<DVector<f64>> = Vec::with_capacity(7);
    for stage in 0..7 {
        let mut ys = y.clone();
        for (j, kj) in k.iter().enumerate() {
            if A[stage][j] != 0.0 {
                ys += kj * (h * A[stage][j]);
            }
        }
        k.push(derivative(field, t + C[stage] * h, &ys)?);
    }
    let mut high = y.clone();
    let mut err = DVector::zeros(y.len());
    for (i, ki) in k.iter().enumerate() {
        high += ki * (h * B5[i]);
        err += ki * (h * (B5[i] - B4[i]));
    }
    Ok((high, err))
}

/// Integrate `field` from `initial` over `[t0, t0 + horizon]`, recording
/// every accepted step. A zero horizon yields the single initial sample.
pub fn integrate(
    field: &dyn SecondOrderField,
    initial: &TangentState,
    settings: &IntegratorSettings,
) -> Result<Trajectory> {
    settings.validate()?;
    let n = field.system().dim();
    check_len(n, initial.dim())?;
    let t0 = initial.t;
    let t_end = t0 + settings.horizon;
    let mut samples = vec![record(field, initial.clone())?];
    let mut y = pack(initial);
    match settings.method {
        Method::Rk4 => {
            let steps = (settings.horizon / settings.dt - 1e-9).ceil().max(0.0) as usize;
            let mut t = t0;
            for step in 1..=steps {
                let t_next = if step == steps { t_end } else { t0 + step as f64 * settings.dt };
                y = rk4_step(field, t, &y, t_next - t)?;
                t = t_next;
                samples.push(record(field, unpack(t, &y))?);
            }
        }
        Method::Rk45 { atol, rtol } => {
            let mut t = t0;
            let mut h = settings.dt.min(settings.horizon);
            let h_min = 1e-14 * settings.horizon.max(1.0);
            while t < t_end {
                let last = t + h >= t_end;
                let step = if last { t_end - t } else { h };
                let (y_new, e) = dopri_step(field, t, &y, step)?;
                let err = (0..y.len())
                    .map(|i| {
                        let scale = atol + rtol * y[i].abs().max(y_new[i].abs());
                        (e[i] / scale).powi(2)
                    })
                    .sum::<f64>()
                    .sqrt()
                    / (y.len() as f64).sqrt();
                if !err.is_finite() {
                    return Err(Error::StepFailure { t });
                }
                if err <= 1.0 {
                    t = if last { t_end } else { t + step };
                    y = y_new;
                    samples.push(record(field, unpack(t, &y))?);
                }
                let factor = if err == 0.0 { 5.0 } else { (0.9 * err.powf(-0.2)).clamp(0.2, 5.0) };
                h = step * factor;
                if h < h_min && t < t_end {
                    return Err(Error::StepFailure { t });
                }
            }
        }
    }
    Ok(Trajectory { formulation: None, dim: n, control_count: field.control_count(), samples })
}
