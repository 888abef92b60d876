use nalgebra::DVector;

use super::trajectory::Trajectory;
use crate::error::{check_len, Error, Result};

/// Sup-norm distances between two trajectories on a common time grid.
#[derive(Debug, Clone, PartialEq)]
pub struct TrajectoryDistance {
    /// `max(q_distance, qdot_distance)`.
    pub max: f64,
    pub q_distance: f64,
    pub qdot_distance: f64,
    /// `(t, ‖Δq‖∞, ‖Δq̇‖∞)` on the comparison grid.
    pub series: Vec<(f64, f64, f64)>,
}

fn interpolate(traj: &Trajectory, t: f64) -> (DVector<f64>, DVector<f64>) {
    let s = &traj.samples;
    let idx = s.partition_point(|x| x.state.t < t);
    if idx == 0 {
        return (s[0].state.q.clone(), s[0].state.qdot.clone());
    }
    if idx >= s.len() {
        let last = &s[s.len() - 1].state;
        return (last.q.clone(), last.qdot.clone());
    }
    let (a, b) = (&s[idx - 1].state, &s[idx].state);
    if b.t == t {
        return (b.q.clone(), b.qdot.clone());
    }
    let w = (t - a.t) / (b.t - a.t);
    (&a.q * (1.0 - w) + &b.q * w, &a.qdot * (1.0 - w) + &b.qdot * w)
}

fn mean_spacing(traj: &Trajectory, lo: f64, hi: f64) -> f64 {
    let inside = traj.samples.iter().filter(|s| s.state.t >= lo && s.state.t <= hi).count();
    if inside <= 1 {
        f64::INFINITY
    } else {
        (hi - lo) / (inside - 1) as f64
    }
}

/// Compare on the coarser of the two grids, restricted to the overlapping
/// time range, interpolating the finer trajectory linearly.
pub fn compare_trajectories(a: &Trajectory, b: &Trajectory) -> Result<TrajectoryDistance> {
    check_len(a.dim, b.dim)?;
    if a.is_empty() || b.is_empty() {
        return Err(Error::GridMismatch);
    }
    let lo = a.initial_state().t.max(b.initial_state().t);
    let hi = a.final_state().t.min(b.final_state().t);
    if lo > hi {
        return Err(Error::GridMismatch);
    }
    let (coarse, fine) = if mean_spacing(a, lo, hi) >= mean_spacing(b, lo, hi) { (a, b) } else { (b, a) };
    let mut out = TrajectoryDistance { max: 0.0, q_distance: 0.0, qdot_distance: 0.0, series: Vec::new() };
    for s in coarse.samples.iter().filter(|s| s.state.t >= lo && s.state.t <= hi) {
        let (q, qdot) = interpolate(fine, s.state.t);
        let dq = (&s.state.q - q).amax();
        let dv = (&s.state.qdot - qdot).amax();
        out.q_distance = out.q_distance.max(dq);
        out.qdot_distance = out.qdot_distance.max(dv);
        out.series.push((s.state.t, dq, dv));
    }
    out.max = out.q_distance.max(out.qdot_distance);
    Ok(out)
}
