//! Affine connections on the chart: Levi-Civita, nonholonomic and
//! constrained, as coordinate symbols and as operators on field jets.

use std::fmt;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::distributions::PointJets;
use crate::error::Result;
use crate::linalg::{FieldJet, MatrixJet};
use crate::systems::SystemSpec;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ConnectionKind {
    LeviCivita,
    /// Built from the metric-orthogonal projector onto `D^⊥`.
    Nonholonomic,
    /// Built from the oblique projector onto the input distribution along `D`.
    Constrained,
}

impl ConnectionKind {
    pub fn name(self) -> &'static str {
        match self {
            ConnectionKind::LeviCivita => "levicivita",
            ConnectionKind::Nonholonomic => "nonholonomic",
            ConnectionKind::Constrained => "constrained",
        }
    }

    pub fn from_name(name: &str) -> Option<Self> {
        match name {
            "levicivita" | "levi-civita" => Some(ConnectionKind::LeviCivita),
            "nonholonomic" => Some(ConnectionKind::Nonholonomic),
            "constrained" => Some(ConnectionKind::Constrained),
            _ => None,
        }
    }
}

impl fmt::Display for ConnectionKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Symbols `Γ^k_ij`, so that `∇_{∂_i} ∂_j = Γ^k_ij ∂_k`.
#[derive(Debug, Clone, PartialEq)]
pub struct ConnectionCoefficients {
    n: usize,
    kind: ConnectionKind,
    data: Vec<f64>,
}

impl ConnectionCoefficients {
    pub fn zeros(n: usize, kind: ConnectionKind) -> Self {
        ConnectionCoefficients { n, kind, data: vec![0.0; n * n * n] }
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn kind(&self) -> ConnectionKind {
        self.kind
    }

    fn index(&self, k: usize, i: usize, j: usize) -> usize {
        debug_assert!(k < self.n && i < self.n && j < self.n);
        (k * self.n + i) * self.n + j
    }

    pub fn get(&self, k: usize, i: usize, j: usize) -> f64 {
        self.data[self.index(k, i, j)]
    }

    pub fn set(&mut self, k: usize, i: usize, j: usize, value: f64) {
        let idx = self.index(k, i, j);
        self.data[idx] = value;
    }

    /// `Γ(x, y)^k = Γ^k_ij x^i y^j`.
    pub fn contract(&self, x: &DVector<f64>, y: &DVector<f64>) -> DVector<f64> {
        let n = self.n;
        DVector::from_fn(n, |k, _| {
            let mut s = 0.0;
            for i in 0..n {
                if x[i] == 0.0 {
                    continue;
                }
                let row = &self.data[(k * n + i) * n..(k * n + i + 1) * n];
                s += x[i] * row.iter().zip(y.iter()).map(|(g, yj)| g * yj).sum::<f64>();
            }
            s
        })
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0, |m, x| m.max(x.abs()))
    }

    /// All `(k, i, j, Γ^k_ij)` in index order.
    pub fn entries(&self) -> impl Iterator<Item = (usize, usize, usize, f64)> + '_ {
        let n = self.n;
        self.data.iter().enumerate().map(move |(idx, v)| (idx / (n * n), (idx / n) % n, idx % n, *v))
    }

    /// Largest entry-wise difference to another set of symbols.
    pub fn max_difference(&self, other: &ConnectionCoefficients) -> f64 {
        assert_eq!(self.n, other.n);
        self.data.iter().zip(&other.data).fold(0.0, |m, (a, b)| m.max((a - b).abs()))
    }

    /// Torsion `T(x, y) = Γ(x, y) − Γ(y, x)`.
    pub fn torsion(&self, x: &DVector<f64>, y: &DVector<f64>) -> DVector<f64> {
        self.contract(x, y) - self.contract(y, x)
    }
}

/// Symbols of `∇^G + ∇^G(T ·) − T ∇^G` for a projector jet `T`:
/// `Γ^k_ij = Γ^G^k_ij + (∂_i T)^k_j + Γ^G^k_il T^l_j − T^k_l Γ^G^l_ij`.
pub(crate) fn modified_symbols(
    lc: &ConnectionCoefficients,
    projector: &MatrixJet,
    kind: ConnectionKind,
) -> ConnectionCoefficients {
    let n = lc.dim();
    let t = &projector.value;
    let mut out = ConnectionCoefficients::zeros(n, kind);
    for k in 0..n {
        for i in 0..n {
            for j in 0..n {
                let mut v = lc.get(k, i, j) + projector.partials[i][(k, j)];
                for l in 0..n {
                    v += lc.get(k, i, l) * t[(l, j)] - t[(k, l)] * lc.get(l, i, j);
                }
                out.set(k, i, j, v);
            }
        }
    }
    out
}

/// Coordinate symbols of the requested connection at `q`.
pub fn christoffel_of(system: &SystemSpec, q: &[f64], kind: ConnectionKind) -> Result<ConnectionCoefficients> {
    let jets = PointJets::at(system, q)?;
    symbols_from_jets(&jets, kind)
}

pub(crate) fn symbols_from_jets(jets: &PointJets, kind: ConnectionKind) -> Result<ConnectionCoefficients> {
    Ok(match kind {
        ConnectionKind::LeviCivita => jets.levi_civita.clone(),
        ConnectionKind::Nonholonomic => modified_symbols(&jets.levi_civita, &jets.normal_projector()?, kind),
        ConnectionKind::Constrained => modified_symbols(&jets.levi_civita, &jets.input_projector()?, kind),
    })
}

/// `∇_X Y = X^i ∂_i Y + Γ(X, Y)`.
pub fn covariant_derivative(gamma: &ConnectionCoefficients, x: &DVector<f64>, y: &FieldJet) -> DVector<f64> {
    y.derivative_along(x) + gamma.contract(x, &y.value)
}

/// `[X, Y] = (∂Y) X − (∂X) Y`.
pub fn lie_bracket(x: &FieldJet, y: &FieldJet) -> DVector<f64> {
    &y.jacobian * &x.value - &x.jacobian * &y.value
}

/// `∇^G_X Y + ∇^G_X (T Y) − T ∇^G_X Y`, evaluated from the operator
/// definition rather than from the symbols.
fn modified_apply(lc: &ConnectionCoefficients, projector: &MatrixJet, x: &FieldJet, y: &FieldJet) -> DVector<f64> {
    let base = covariant_derivative(lc, &x.value, y);
    let ty = projector.apply(y);
    let along = covariant_derivative(lc, &x.value, &ty);
    &base + along - &projector.value * &base
}

/// `∇^nh_X Y` at `q` through the normal projector.
pub fn nonholonomic_connection_apply(
    system: &SystemSpec,
    q: &[f64],
    x: &FieldJet,
    y: &FieldJet,
) -> Result<DVector<f64>> {
    let jets = PointJets::at(system, q)?;
    Ok(modified_apply(&jets.levi_civita, &jets.normal_projector()?, x, y))
}

/// `∇^c_X Y` at `q` through the input projector.
pub fn constrained_connection_apply(
    system: &SystemSpec,
    q: &[f64],
    x: &FieldJet,
    y: &FieldJet,
) -> Result<DVector<f64>> {
    let jets = PointJets::at(system, q)?;
    Ok(modified_apply(&jets.levi_civita, &jets.input_projector()?, x, y))
}

/// Torsion of the constrained connection on `(X, Y)` and the input-projected
/// bracket `P_F [X, Y]`. For sections of `D` the two sum to zero.
#[derive(Debug, Clone)]
pub struct TorsionSample {
    pub torsion: DVector<f64>,
    pub projected_bracket: DVector<f64>,
}

impl TorsionSample {
    pub fn defect(&self) -> f64 {
        (&self.torsion + &self.projected_bracket).amax()
    }
}

pub fn torsion_constrained(system: &SystemSpec, q: &[f64], x: &FieldJet, y: &FieldJet) -> Result<TorsionSample> {
    let jets = PointJets::at(system, q)?;
    let pf = jets.input_projector()?;
    let gamma = modified_symbols(&jets.levi_civita, &pf, ConnectionKind::Constrained);
    Ok(TorsionSample { torsion: gamma.torsion(&x.value, &y.value), projected_bracket: &pf.value * lie_bracket(x, y) })
}

/// Matrix `(Γ(e_i, ·))` helper for the geodesic spray: `Γ(v, v)`.
pub fn quadratic_term(gamma: &ConnectionCoefficients, v: &DVector<f64>) -> DVector<f64> {
    gamma.contract(v, v)
}

/// Dense `n × n` slice `[Γ^k_ij]_{k,j}` for fixed `i`.
pub fn slice_along(gamma: &ConnectionCoefficients, i: usize) -> DMatrix<f64> {
    let n = gamma.dim();
    DMatrix::from_fn(n, n, |k, j| gamma.get(k, i, j))
}
