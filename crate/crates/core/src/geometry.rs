//! Chart-level Riemannian machinery.
//!
//! Everything here is evaluated pointwise from expression fields; positive
//! definiteness of the metric is only verified at the points actually
//! evaluated, through Cholesky factorization.

use std::collections::{BTreeMap, HashSet};

use nalgebra::{Cholesky, DMatrix, DVector, Dyn};

use crate::connections::{ConnectionCoefficients, ConnectionKind};
use crate::error::{check_len, Error, Result};
use crate::exprlang::{eval_coordinate_gradient, parse, Expr, SymbolTable};
use crate::linalg::MatrixJet;

/// Coordinate chart: dimension, coordinate names and bound parameters.
#[derive(Debug, Clone, PartialEq)]
pub struct ChartSpec {
    coordinates: Vec<String>,
    parameters: BTreeMap<String, f64>,
}

fn is_identifier(s: &str) -> bool {
    let mut chars = s.chars();
    matches!(chars.next(), Some(c) if c.is_alphabetic() || c == '_') && chars.all(|c| c.is_alphanumeric() || c == '_')
}

impl ChartSpec {
    pub fn new(coordinates: Vec<String>, parameters: BTreeMap<String, f64>) -> Result<Self> {
        if coordinates.is_empty() {
            return Err(Error::InvalidSystem("chart needs at least one coordinate".into()));
        }
        let n = coordinates.len();
        let mut seen = HashSet::new();
        let reserved: Vec<String> = (1..=n).flat_map(|i| [format!("q{i}"), format!("v{i}")]).collect();
        for name in coordinates.iter().chain(parameters.keys()) {
            if !is_identifier(name) {
                return Err(Error::InvalidSystem(format!("`{name}` is not a valid identifier")));
            }
            if !seen.insert(name.clone()) {
                return Err(Error::InvalidSystem(format!("duplicate name `{name}`")));
            }
        }
        for (name, value) in &parameters {
            if reserved.contains(name) || name == "pi" || coordinates.iter().any(|c| format!("{c}_dot") == *name) {
                return Err(Error::InvalidSystem(format!("parameter `{name}` shadows a chart symbol")));
            }
            if !value.is_finite() {
                return Err(Error::InvalidSystem(format!("parameter `{name}` is not finite")));
            }
        }
        Ok(ChartSpec { coordinates, parameters })
    }

    pub fn dim(&self) -> usize {
        self.coordinates.len()
    }

    pub fn coordinates(&self) -> &[String] {
        &self.coordinates
    }

    pub fn parameters(&self) -> &BTreeMap<String, f64> {
        &self.parameters
    }

    pub fn symbols(&self) -> SymbolTable {
        self.parameters.iter().fold(SymbolTable::for_chart(&self.coordinates), |t, (k, v)| t.with_param(k.clone(), *v))
    }

    /// Parse an expression that may use coordinates and velocities.
    pub fn parse_phase(&self, source: &str, context: &str) -> Result<Expr> {
        parse(source, &self.symbols()).map_err(|source| Error::Parse { context: context.to_string(), source })
    }

    /// Parse an expression restricted to configuration variables.
    pub fn parse_configuration(&self, source: &str, context: &str) -> Result<Expr> {
        parse(source, &self.symbols().coordinates_only())
            .map_err(|source| Error::Parse { context: context.to_string(), source })
    }
}

/// Coordinate mass matrix `M(q)` as expressions, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct MetricField {
    n: usize,
    entries: Vec<Expr>,
}

impl MetricField {
    pub fn new(n: usize, entries: Vec<Expr>) -> Result<Self> {
        check_len(n * n, entries.len())?;
        if entries.iter().any(Expr::uses_velocity) {
            return Err(Error::InvalidSystem("metric entries must not depend on velocities".into()));
        }
        Ok(MetricField { n, entries })
    }

    pub fn parse(chart: &ChartSpec, rows: &[Vec<String>]) -> Result<Self> {
        let n = chart.dim();
        check_len(n, rows.len())?;
        let mut entries = Vec::with_capacity(n * n);
        for (i, row) in rows.iter().enumerate() {
            check_len(n, row.len())?;
            for (j, src) in row.iter().enumerate() {
                entries.push(chart.parse_configuration(src, &format!("metric[{i}][{j}]"))?);
            }
        }
        MetricField::new(n, entries)
    }

    /// Constant diagonal metric.
    pub fn diagonal(values: &[f64]) -> Self {
        let n = values.len();
        let entries =
            (0..n * n).map(|idx| if idx / n == idx % n { Expr::Num(values[idx / n]) } else { Expr::zero() }).collect();
        MetricField { n, entries }
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn entry(&self, i: usize, j: usize) -> &Expr {
        &self.entries[i * self.n + j]
    }

    /// Entry-wise symmetry of the expressions as given, at `q`.
    pub fn check_symmetric_at(&self, q: &[f64]) -> Result<()> {
        for i in 0..self.n {
            for j in (i + 1)..self.n {
                let a = self.entry(i, j).eval(q, &[])?;
                let b = self.entry(j, i).eval(q, &[])?;
                if (a - b).abs() > 1e-12 * (1.0 + a.abs().max(b.abs())) {
                    return Err(Error::AsymmetricMetric { i, j, q: q.to_vec() });
                }
            }
        }
        Ok(())
    }

    /// `M(q)` and `∂_k M(q)`, upper triangle evaluated and mirrored.
    pub fn jet(&self, q: &[f64]) -> Result<MatrixJet> {
        check_len(self.n, q.len())?;
        let n = self.n;
        let mut value = DMatrix::zeros(n, n);
        let mut partials = vec![DMatrix::zeros(n, n); n];
        for i in 0..n {
            for j in i..n {
                let d = eval_coordinate_gradient(self.entry(i, j), q, &[])?;
                value[(i, j)] = d.value();
                value[(j, i)] = d.value();
                for (k, p) in partials.iter_mut().enumerate() {
                    p[(i, j)] = d.partial(k);
                    p[(j, i)] = d.partial(k);
                }
            }
        }
        Ok(MatrixJet { value, partials })
    }
}

/// Potential energy `V(q)`.
#[derive(Debug, Clone, PartialEq)]
pub struct PotentialField {
    expr: Expr,
}

impl PotentialField {
    pub fn new(expr: Expr) -> Result<Self> {
        if expr.uses_velocity() {
            return Err(Error::InvalidSystem("potential must not depend on velocities".into()));
        }
        Ok(PotentialField { expr })
    }

    pub fn zero() -> Self {
        PotentialField { expr: Expr::zero() }
    }

    pub fn expr(&self) -> &Expr {
        &self.expr
    }

    pub fn is_zero(&self) -> bool {
        self.expr.is_literal_zero()
    }

    pub fn value(&self, q: &[f64]) -> Result<f64> {
        Ok(self.expr.eval(q, &[])?)
    }

    /// `dV(q)` as a covector.
    pub fn differential(&self, q: &[f64]) -> Result<DVector<f64>> {
        if self.is_zero() {
            return Ok(DVector::zeros(q.len()));
        }
        let d = eval_coordinate_gradient(&self.expr, q, &[])?;
        Ok(DVector::from_fn(q.len(), |k, _| d.partial(k)))
    }
}

pub(crate) fn factor(m: &DMatrix<f64>, q: &[f64]) -> Result<Cholesky<f64, Dyn>> {
    Cholesky::new(m.clone()).ok_or_else(|| Error::NotPositiveDefinite { q: q.to_vec() })
}

/// Evaluated metric at `q`, verified symmetric positive definite.
pub fn metric_at(metric: &MetricField, q: &[f64]) -> Result<DMatrix<f64>> {
    check_len(metric.dim(), q.len())?;
    let n = metric.dim();
    let mut m = DMatrix::zeros(n, n);
    for i in 0..n {
        for j in i..n {
            let v = metric.entry(i, j).eval(q, &[])?;
            m[(i, j)] = v;
            m[(j, i)] = v;
        }
    }
    factor(&m, q)?;
    Ok(m)
}

/// Raise an index: `M(q)^{-1} ξ`.
pub fn sharp(metric: &MetricField, q: &[f64], covector: &DVector<f64>) -> Result<DVector<f64>> {
    check_len(metric.dim(), covector.len())?;
    let m = metric_at(metric, q)?;
    Ok(factor(&m, q)?.solve(covector))
}

/// Lower an index: `M(q) v`.
pub fn flat(metric: &MetricField, q: &[f64], vector: &DVector<f64>) -> Result<DVector<f64>> {
    check_len(metric.dim(), vector.len())?;
    Ok(metric_at(metric, q)? * vector)
}

/// Levi-Civita symbols from a metric jet and its inverse:
/// `Γ^k_ij = ½ g^{kl} (∂_i g_jl + ∂_j g_il − ∂_l g_ij)`.
pub(crate) fn levi_civita_from_jet(jet: &MatrixJet, inverse: &DMatrix<f64>) -> ConnectionCoefficients {
    let n = jet.value.nrows();
    let mut lowered = vec![0.0; n * n * n]; // [l][i][j]
    for l in 0..n {
        for i in 0..n {
            for j in i..n {
                let v = 0.5 * (jet.partials[i][(j, l)] + jet.partials[j][(i, l)] - jet.partials[l][(i, j)]);
                lowered[(l * n + i) * n + j] = v;
                lowered[(l * n + j) * n + i] = v;
            }
        }
    }
    let mut gamma = ConnectionCoefficients::zeros(n, ConnectionKind::LeviCivita);
    for k in 0..n {
        for i in 0..n {
            for j in i..n {
                let s: f64 = (0..n).map(|l| inverse[(k, l)] * lowered[(l * n + i) * n + j]).sum();
                gamma.set(k, i, j, s);
                gamma.set(k, j, i, s);
            }
        }
    }
    gamma
}

pub fn christoffel_lc(metric: &MetricField, q: &[f64]) -> Result<ConnectionCoefficients> {
    let jet = metric.jet(q)?;
    let chol = factor(&jet.value, q)?;
    Ok(levi_civita_from_jet(&jet, &chol.inverse()))
}

/// `grad V = M(q)^{-1} dV(q)`.
pub fn grad_potential(metric: &MetricField, potential: &PotentialField, q: &[f64]) -> Result<DVector<f64>> {
    if potential.is_zero() {
        return Ok(DVector::zeros(q.len()));
    }
    let dv = potential.differential(q)?;
    sharp(metric, q, &dv)
}
