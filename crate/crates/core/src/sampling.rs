//! Seeded random sampling of configurations, on-constraint states and
//! local sections of the constraint distribution.

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::distributions::{orthogonal_projectors, PointJets};
use crate::dynamics::{SectionSample, TangentState};
use crate::error::Result;
use crate::linalg::FieldJet;
use crate::systems::SystemSpec;

const MAX_ATTEMPTS: usize = 100;

/// Deterministic sampler; the same seed reproduces the same sequence.
#[derive(Debug, Clone)]
pub struct Sampler {
    rng: ChaCha8Rng,
}

impl Sampler {
    pub fn new(seed: u64) -> Self {
        Sampler { rng: ChaCha8Rng::seed_from_u64(seed) }
    }

    pub fn uniform(&mut self, lo: f64, hi: f64) -> f64 {
        self.rng.random_range(lo..hi)
    }

    pub fn vector(&mut self, n: usize, lo: f64, hi: f64) -> DVector<f64> {
        DVector::from_fn(n, |_, _| self.rng.random_range(lo..hi))
    }

    pub fn matrix(&mut self, rows: usize, cols: usize, lo: f64, hi: f64) -> DMatrix<f64> {
        DMatrix::from_fn(rows, cols, |_, _| self.rng.random_range(lo..hi))
    }

    /// Configuration in `[-π, π]^n`.
    pub fn configuration(&mut self, n: usize) -> Vec<f64> {
        let pi = std::f64::consts::PI;
        (0..n).map(|_| self.rng.random_range(-pi..pi)).collect()
    }

    /// Random field with affine components around the point.
    pub fn field(&mut self, n: usize) -> FieldJet {
        FieldJet::new(self.vector(n, -1.0, 1.0), self.matrix(n, n, -1.0, 1.0))
    }

    /// Random `q` and `q̇ = 𝒫(q) z` for uniform `z ∈ [-1, 1]^n`.
    pub fn on_constraint_state(&mut self, system: &SystemSpec) -> Result<TangentState> {
        self.on_constraint_state_within(system, 1.0)
    }

    /// As [`Sampler::on_constraint_state`] with `z ∈ [-speed, speed]^n`.
    pub fn on_constraint_state_within(&mut self, system: &SystemSpec, speed: f64) -> Result<TangentState> {
        let n = system.dim();
        let mut last = None;
        for _ in 0..MAX_ATTEMPTS {
            let q = self.configuration(n);
            let z = self.vector(n, -speed, speed);
            match orthogonal_projectors(&system.metric, &system.constraints, &q) {
                Ok(pair) => {
                    return Ok(TangentState { t: 0.0, q: DVector::from_vec(q), qdot: &pair.onto_d * z });
                }
                Err(e) => last = Some(e),
            }
        }
        Err(last.expect("at least one attempt"))
    }

    /// Section of `D` through `q`: `X = 𝒫 Z` for a random affine field `Z`.
    pub fn d_section(&mut self, system: &SystemSpec, q: &[f64]) -> Result<FieldJet> {
        let jets = PointJets::at(system, q)?;
        let p = PointJets::complement_of(&jets.normal_projector()?);
        let z = self.field(system.dim());
        Ok(p.apply(&z))
    }

    /// Random point with a random `D`-section through it.
    pub fn section_sample(&mut self, system: &SystemSpec) -> Result<SectionSample> {
        let mut last = None;
        for _ in 0..MAX_ATTEMPTS {
            let q = self.configuration(system.dim());
            match self.d_section(system, &q) {
                Ok(field) => return Ok(SectionSample { q, field }),
                Err(e) => last = Some(e),
            }
        }
        Err(last.expect("at least one attempt"))
    }
}
