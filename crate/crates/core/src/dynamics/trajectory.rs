use std::io::{self, Write};

use nalgebra::DVector;
use serde::Serialize;

use super::{Formulation, TangentState};

/// One recorded time point with its diagnostics.
#[derive(Debug, Clone, PartialEq)]
pub struct Sample {
    pub state: TangentState,
    /// Applied controls; empty for formulations without feedback.
    pub controls: DVector<f64>,
    /// Constraint residuals `φ^b`.
    pub residuals: DVector<f64>,
    /// `½ q̇ᵀ M q̇ + V`.
    pub energy: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub formulation: Option<Formulation>,
    pub dim: usize,
    pub control_count: usize,
    pub samples: Vec<Sample>,
}

#[derive(Serialize)]
struct JsonSample<'a> {
    t: f64,
    q: &'a [f64],
    qdot: &'a [f64],
    controls: &'a [f64],
    residuals: &'a [f64],
    energy: f64,
}

#[derive(Serialize)]
struct JsonTrajectory<'a> {
    formulation: Option<Formulation>,
    dim: usize,
    samples: Vec<JsonSample<'a>>,
}

impl Trajectory {
    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn times(&self) -> Vec<f64> {
        self.samples.iter().map(|s| s.state.t).collect()
    }

    pub fn initial_state(&self) -> &TangentState {
        &self.samples[0].state
    }

    pub fn final_state(&self) -> &TangentState {
        &self.samples.last().expect("trajectory has at least one sample").state
    }

    /// `max_t ‖φ‖∞`.
    pub fn max_drift(&self) -> f64 {
        self.samples.iter().map(|s| s.residuals.amax()).fold(0.0, f64::max)
    }

    /// `max_t ‖τ‖∞`.
    pub fn max_control(&self) -> f64 {
        self.samples.iter().map(|s| s.controls.amax()).fold(0.0, f64::max)
    }

    /// `max_t E − min_t E`.
    pub fn energy_span(&self) -> f64 {
        let (lo, hi) = self
            .samples
            .iter()
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), s| (lo.min(s.energy), hi.max(s.energy)));
        hi - lo
    }

    fn residual_count(&self) -> usize {
        self.samples.first().map_or(0, |s| s.residuals.len())
    }

    /// Header `t,q1..qn,v1..vn,u1..uk,phi1..phim,energy` then one row per
    /// sample with 17 significant digits.
    pub fn write_csv<W: Write>(&self, mut out: W) -> io::Result<()> {
        let mut header = vec!["t".to_string()];
        header.extend((1..=self.dim).map(|i| format!("q{i}")));
        header.extend((1..=self.dim).map(|i| format!("v{i}")));
        header.extend((1..=self.control_count).map(|i| format!("u{i}")));
        header.extend((1..=self.residual_count()).map(|i| format!("phi{i}")));
        header.push("energy".into());
        writeln!(out, "{}", header.join(","))?;
        for s in &self.samples {
            let mut row = vec![s.state.t];
            row.extend(s.state.q.iter());
            row.extend(s.state.qdot.iter());
            row.extend(s.controls.iter());
            row.extend(s.residuals.iter());
            row.push(s.energy);
            let cells: Vec<String> = row.iter().map(|x| format!("{x:.16e}")).collect();
            writeln!(out, "{}", cells.join(","))?;
        }
        Ok(())
    }

    pub fn write_json<W: Write>(&self, out: W) -> io::Result<()> {
        let doc = JsonTrajectory {
            formulation: self.formulation,
            dim: self.dim,
            samples: self
                .samples
                .iter()
                .map(|s| JsonSample {
                    t: s.state.t,
                    q: s.state.q.as_slice(),
                    qdot: s.state.qdot.as_slice(),
                    controls: s.controls.as_slice(),
                    residuals: s.residuals.as_slice(),
                    energy: s.energy,
                })
                .collect(),
        };
        serde_json::to_writer_pretty(out, &doc).map_err(io::Error::other)
    }
}
