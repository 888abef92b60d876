//! Constraint and input distributions and their projector pairs.
//!
//! Two independent constructions exist for each projector pair. The public
//! [`oblique_projectors`] and [`orthogonal_projectors`] work from SVD kernel
//! bases and block solves. [`PointJets`] builds the same projectors from the
//! closed forms `P_F = Y (C Y)^{-1} C` and `Q = M^{-1} Cᵀ (C M^{-1} Cᵀ)^{-1} C`
//! and carries their coordinate derivatives, which the connections need.

use nalgebra::{DMatrix, DVector};

use crate::connections::ConnectionCoefficients;
use crate::dynamics::TangentState;
use crate::error::{check_len, Error, Result};
use crate::exprlang::{eval_coordinate_gradient, Expr};
use crate::geometry::{factor, levi_civita_from_jet, metric_at, ChartSpec, MetricField};
use crate::linalg::{null_space, numerical_rank, singular_values, MatrixJet};
use crate::systems::SystemSpec;

/// Relative rank cutoff for constraint matrices.
pub const RANK_RTOL: f64 = 1e-10;
/// Default threshold on the smallest singular value of `[basis_D | basis_F]`.
pub const DEFAULT_TRANSVERSALITY_TOL: f64 = 1e-8;

/// Family of one-forms given as coefficient rows over the chart.
#[derive(Debug, Clone, PartialEq)]
struct FormRows {
    n: usize,
    rows: Vec<Vec<Expr>>,
}

impl FormRows {
    fn new(n: usize, rows: Vec<Vec<Expr>>, what: &str) -> Result<Self> {
        for row in &rows {
            check_len(n, row.len())?;
            if row.iter().any(Expr::uses_velocity) {
                return Err(Error::InvalidSystem(format!("{what} coefficients must not depend on velocities")));
            }
        }
        Ok(FormRows { n, rows })
    }

    fn parse(chart: &ChartSpec, rows: &[Vec<String>], what: &str) -> Result<Self> {
        let parsed = rows
            .iter()
            .enumerate()
            .map(|(a, row)| {
                check_len(chart.dim(), row.len())?;
                row.iter()
                    .enumerate()
                    .map(|(i, src)| chart.parse_configuration(src, &format!("{what}[{a}][{i}]")))
                    .collect::<Result<Vec<_>>>()
            })
            .collect::<Result<Vec<_>>>()?;
        FormRows::new(chart.dim(), parsed, what)
    }

    fn matrix_at(&self, q: &[f64]) -> Result<DMatrix<f64>> {
        check_len(self.n, q.len())?;
        let mut out = DMatrix::zeros(self.rows.len(), self.n);
        for (a, row) in self.rows.iter().enumerate() {
            for (i, e) in row.iter().enumerate() {
                out[(a, i)] = e.eval(q, &[])?;
            }
        }
        Ok(out)
    }

    fn jet(&self, q: &[f64]) -> Result<MatrixJet> {
        check_len(self.n, q.len())?;
        let (rows, n) = (self.rows.len(), self.n);
        let mut value = DMatrix::zeros(rows, n);
        let mut partials = vec![DMatrix::zeros(rows, n); n];
        for (a, row) in self.rows.iter().enumerate() {
            for (i, e) in row.iter().enumerate() {
                if e.is_literal_zero() {
                    continue;
                }
                let d = eval_coordinate_gradient(e, q, &[])?;
                value[(a, i)] = d.value();
                for (k, p) in partials.iter_mut().enumerate() {
                    p[(a, i)] = d.partial(k);
                }
            }
        }
        Ok(MatrixJet { value, partials })
    }
}

/// Constraint distribution `D = ker [μ^a_i(q)]`, stored through its
/// annihilating one-forms `μ^a`.
#[derive(Debug, Clone, PartialEq)]
pub struct Distribution {
    forms: FormRows,
}

impl Distribution {
    pub fn new(n: usize, forms: Vec<Vec<Expr>>) -> Result<Self> {
        Ok(Distribution { forms: FormRows::new(n, forms, "constraint")? })
    }

    pub fn parse(chart: &ChartSpec, rows: &[Vec<String>]) -> Result<Self> {
        Ok(Distribution { forms: FormRows::parse(chart, rows, "constraints")? })
    }

    /// Number of constraints `m`.
    pub fn count(&self) -> usize {
        self.forms.rows.len()
    }

    pub fn dim(&self) -> usize {
        self.forms.n
    }

    pub fn rank(&self) -> usize {
        self.forms.n - self.count()
    }

    pub fn forms(&self) -> &[Vec<Expr>] {
        &self.forms.rows
    }

    /// The `m × n` matrix `[μ^a_i(q)]`.
    pub fn matrix_at(&self, q: &[f64]) -> Result<DMatrix<f64>> {
        self.forms.matrix_at(q)
    }

    pub fn jet(&self, q: &[f64]) -> Result<MatrixJet> {
        self.forms.jet(q)
    }
}

/// Input distribution: control one-forms `f^a`, with `Y^a = ♯ f^a`.
#[derive(Debug, Clone, PartialEq)]
pub struct InputDistribution {
    forms: FormRows,
}

impl InputDistribution {
    pub fn new(n: usize, forms: Vec<Vec<Expr>>) -> Result<Self> {
        Ok(InputDistribution { forms: FormRows::new(n, forms, "input")? })
    }

    pub fn parse(chart: &ChartSpec, rows: &[Vec<String>]) -> Result<Self> {
        Ok(InputDistribution { forms: FormRows::parse(chart, rows, "inputs")? })
    }

    /// Number of inputs `k`.
    pub fn count(&self) -> usize {
        self.forms.rows.len()
    }

    pub fn forms(&self) -> &[Vec<Expr>] {
        &self.forms.rows
    }

    /// The `k × n` matrix `[f^a_i(q)]`.
    pub fn covectors_at(&self, q: &[f64]) -> Result<DMatrix<f64>> {
        self.forms.matrix_at(q)
    }

    pub fn jet(&self, q: &[f64]) -> Result<MatrixJet> {
        self.forms.jet(q)
    }

    /// `n × k` matrix whose columns are the force fields `Y^a = M^{-1} f^a`.
    pub fn vector_fields_at(&self, metric: &MetricField, q: &[f64]) -> Result<DMatrix<f64>> {
        let m = metric_at(metric, q)?;
        let f = self.covectors_at(q)?;
        Ok(factor(&m, q)?.solve(&f.transpose()))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ProjectorKind {
    /// `TQ = D ⊕ F`: parts `(P_D, P_F)`.
    Oblique,
    /// `TQ = D ⊕ D^⊥`: parts `(𝒫, 𝒬)`.
    Orthogonal,
}

/// Complementary projectors at a point; `onto_d` has range `D`.
#[derive(Debug, Clone)]
pub struct ProjectorPair {
    pub kind: ProjectorKind,
    pub onto_d: DMatrix<f64>,
    pub complement: DMatrix<f64>,
}

/// Largest entry-wise violation of each projector identity.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProjectorDefects {
    pub complementarity: f64,
    pub idempotence: f64,
    pub annihilation: f64,
    pub range_in_d: f64,
}

impl ProjectorDefects {
    pub fn max(&self) -> f64 {
        self.complementarity.max(self.idempotence).max(self.annihilation).max(self.range_in_d)
    }
}

impl ProjectorPair {
    /// Defects of `A + B = I`, `A² = A`, `B² = B`, `AB = BA = 0` and `C A = 0`.
    pub fn defects(&self, constraints: &DMatrix<f64>) -> ProjectorDefects {
        let a = &self.onto_d;
        let b = &self.complement;
        let n = a.nrows();
        let amax = |m: DMatrix<f64>| m.amax();
        ProjectorDefects {
            complementarity: amax(a + b - DMatrix::identity(n, n)),
            idempotence: amax(a * a - a).max(amax(b * b - b)),
            annihilation: amax(a * b).max(amax(b * a)),
            range_in_d: if constraints.nrows() == 0 { 0.0 } else { amax(constraints * a) },
        }
    }
}

/// `φ^b = μ^b(q)(q̇)` for every constraint.
pub fn constraint_residuals(dist: &Distribution, state: &TangentState) -> Result<DVector<f64>> {
    check_len(dist.dim(), state.qdot.len())?;
    Ok(dist.matrix_at(state.q.as_slice())? * &state.qdot)
}

/// Orthonormal basis of `D_q` (columns), signs fixed so the first
/// significant entry of each column is positive.
pub fn basis_d(dist: &Distribution, q: &[f64]) -> Result<DMatrix<f64>> {
    let c = dist.matrix_at(q)?;
    let (basis, rank) = null_space(&c, RANK_RTOL);
    if rank < dist.count() {
        return Err(Error::RankDeficientConstraints { q: q.to_vec() });
    }
    Ok(basis)
}

/// Raw force fields `Y^a(q)` as columns.
pub fn basis_f(metric: &MetricField, input: &InputDistribution, q: &[f64]) -> Result<DMatrix<f64>> {
    input.vector_fields_at(metric, q)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Transversality {
    Transversal {
        sigma_min: f64,
    },
    /// `rank` of `[basis_D | basis_F]`, estimated `dim(D ∩ F)`, and whether
    /// `D + F` still spans the tangent space.
    Deficient {
        rank: usize,
        overlap: usize,
        spans: bool,
        sigma_min: f64,
    },
}

impl Transversality {
    pub fn is_transversal(&self) -> bool {
        matches!(self, Transversality::Transversal { .. })
    }
}

fn normalized_columns(m: &DMatrix<f64>) -> DMatrix<f64> {
    let mut out = m.clone();
    for mut col in out.column_iter_mut() {
        let norm = col.norm();
        if norm > 0.0 {
            col /= norm;
        }
    }
    out
}

pub fn check_transversality(
    metric: &MetricField,
    dist: &Distribution,
    input: &InputDistribution,
    q: &[f64],
    tol: f64,
) -> Result<Transversality> {
    let n = dist.dim();
    let bd = basis_d(dist, q)?;
    let bf = normalized_columns(&basis_f(metric, input, q)?);
    let stacked = concat_columns(&bd, &bf);
    let s = singular_values(&stacked);
    let rank = s.iter().filter(|x| **x > tol).count();
    let sigma_min = if stacked.ncols() < n { 0.0 } else { s.get(n - 1).copied().unwrap_or(0.0) };
    if stacked.ncols() == n && sigma_min > tol {
        return Ok(Transversality::Transversal { sigma_min });
    }
    let rank_f = if bf.ncols() == 0 { 0 } else { singular_values(&bf).iter().filter(|x| **x > tol).count() };
    Ok(Transversality::Deficient {
        rank,
        overlap: (bd.ncols() + rank_f).saturating_sub(rank),
        spans: rank == n,
        sigma_min,
    })
}

fn concat_columns(a: &DMatrix<f64>, b: &DMatrix<f64>) -> DMatrix<f64> {
    let mut out = DMatrix::zeros(a.nrows(), a.ncols() + b.ncols());
    out.columns_mut(0, a.ncols()).copy_from(a);
    out.columns_mut(a.ncols(), b.ncols()).copy_from(b);
    out
}

/// `(P_D, P_F)` from the decomposition `v = B_D c_D + B_F c_F`.
pub fn oblique_projectors(
    metric: &MetricField,
    dist: &Distribution,
    input: &InputDistribution,
    q: &[f64],
) -> Result<ProjectorPair> {
    let n = dist.dim();
    let bd = basis_d(dist, q)?;
    let bf = basis_f(metric, input, q)?;
    if bd.ncols() + bf.ncols() != n {
        return Err(Error::NotTransversal { q: q.to_vec() });
    }
    let stacked = concat_columns(&bd, &bf);
    if numerical_rank(&stacked, RANK_RTOL) < n {
        return Err(Error::NotTransversal { q: q.to_vec() });
    }
    let inv = stacked.try_inverse().ok_or_else(|| Error::NotTransversal { q: q.to_vec() })?;
    let r = bd.ncols();
    let onto_d = &bd * inv.rows(0, r);
    let complement = &bf * inv.rows(r, n - r);
    Ok(ProjectorPair { kind: ProjectorKind::Oblique, onto_d, complement })
}

/// `(𝒫, 𝒬)` with `𝒫 = B (Bᵀ M B)^{-1} Bᵀ M` for a kernel basis `B` of `D`.
pub fn orthogonal_projectors(metric: &MetricField, dist: &Distribution, q: &[f64]) -> Result<ProjectorPair> {
    let n = dist.dim();
    let m = metric_at(metric, q)?;
    let b = basis_d(dist, q)?;
    let gram = b.transpose() * &m * &b;
    let chol = factor(&gram, q)?;
    let onto_d = &b * chol.solve(&(b.transpose() * &m));
    let complement = DMatrix::identity(n, n) - &onto_d;
    Ok(ProjectorPair { kind: ProjectorKind::Orthogonal, onto_d, complement })
}

/// Everything the connections need at one point, with first derivatives.
#[derive(Debug, Clone)]
pub struct PointJets {
    pub q: Vec<f64>,
    pub metric: MatrixJet,
    pub metric_inverse: MatrixJet,
    /// `m × n` constraint matrix `C`.
    pub constraints: MatrixJet,
    /// `n × k` matrix of force fields `Y^a`.
    pub input_fields: MatrixJet,
    pub levi_civita: ConnectionCoefficients,
}

impl PointJets {
    pub fn at(system: &SystemSpec, q: &[f64]) -> Result<Self> {
        let metric = system.metric.jet(q)?;
        let chol = factor(&metric.value, q)?;
        let inv = chol.inverse();
        let metric_inverse =
            MatrixJet { partials: metric.partials.iter().map(|d| -(&inv * d * &inv)).collect(), value: inv.clone() };
        let constraints = system.constraints.jet(q)?;
        let forms = system.inputs.jet(q)?;
        let input_fields = metric_inverse.mul(&forms.transpose());
        let levi_civita = levi_civita_from_jet(&metric, &inv);
        Ok(PointJets { q: q.to_vec(), metric, metric_inverse, constraints, input_fields, levi_civita })
    }

    pub fn dim(&self) -> usize {
        self.q.len()
    }

    /// Oblique projector onto `F` along `D`, `P_F = Y (C Y)^{-1} C`.
    pub fn input_projector(&self) -> Result<MatrixJet> {
        let n = self.dim();
        let (m, k) = (self.constraints.value.nrows(), self.input_fields.value.ncols());
        if m != k {
            return Err(Error::NotTransversal { q: self.q.clone() });
        }
        if m == 0 {
            return Ok(MatrixJet::constant(DMatrix::zeros(n, n), n));
        }
        let a = self.constraints.mul(&self.input_fields);
        let s = singular_values(&a.value);
        if s.last().copied().unwrap_or(0.0) <= RANK_RTOL * s[0].max(f64::MIN_POSITIVE) {
            return Err(Error::NotTransversal { q: self.q.clone() });
        }
        let a_inv = a.inverse().ok_or_else(|| Error::NotTransversal { q: self.q.clone() })?;
        Ok(self.input_fields.mul(&a_inv).mul(&self.constraints))
    }

    /// Metric-orthogonal projector onto `D^⊥`,
    /// `𝒬 = M^{-1} Cᵀ (C M^{-1} Cᵀ)^{-1} C`.
    pub fn normal_projector(&self) -> Result<MatrixJet> {
        let n = self.dim();
        if self.constraints.value.nrows() == 0 {
            return Ok(MatrixJet::constant(DMatrix::zeros(n, n), n));
        }
        let raised = self.metric_inverse.mul(&self.constraints.transpose());
        let gram = self.constraints.mul(&raised);
        if numerical_rank(&gram.value, RANK_RTOL) < gram.value.nrows() {
            return Err(Error::RankDeficientConstraints { q: self.q.clone() });
        }
        let gram_inv = gram.inverse().ok_or_else(|| Error::RankDeficientConstraints { q: self.q.clone() })?;
        Ok(raised.mul(&gram_inv).mul(&self.constraints))
    }

    /// `D`-part of a jet projector: `I - T`.
    pub fn complement_of(t: &MatrixJet) -> MatrixJet {
        MatrixJet::identity(t.value.nrows(), t.width()).sub(t)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::systems::builtin;

    fn state(q: &[f64], qdot: &[f64]) -> TangentState {
        TangentState::new(0.0, q.to_vec(), qdot.to_vec())
    }

    #[test]
    fn se2_residuals_and_bases() {
        let sys = builtin::se2_knife(1.0, 1.0);
        let r = constraint_residuals(&sys.constraints, &state(&[0.0, 0.0, 0.0], &[1.0, 0.0, 2.0])).unwrap();
        assert_eq!(r.as_slice(), &[0.0]);
        let r = constraint_residuals(&sys.constraints, &state(&[0.3, 0.1, 1.2], &[0.0; 3])).unwrap();
        assert_eq!(r.as_slice(), &[0.0]);

        let bd = basis_d(&sys.constraints, &[0.0, 0.0, 0.0]).unwrap();
        // span{e1, e3}: the projector onto the column space is diag(1, 0, 1)
        let proj = &bd * bd.transpose();
        assert!((proj - DMatrix::from_diagonal(&DVector::from_vec(vec![1.0, 0.0, 1.0]))).amax() < 1e-14);

        let bf = basis_f(&sys.metric, &sys.inputs, &[0.0, 0.0, 0.0]).unwrap();
        assert!((bf.column(0) - DVector::from_vec(vec![0.0, -1.0, 1.0])).amax() < 1e-15);
    }

    #[test]
    fn disk_residuals() {
        let sys = builtin::rolling_disk(1.0, 2.0, 3.0);
        let r = constraint_residuals(&sys.constraints, &state(&[0.0; 4], &[1.0, 0.0, 1.0, 0.0])).unwrap();
        assert_eq!(r.as_slice(), &[0.0, 0.0]);
    }

    #[test]
    fn transversality_diagnosis() {
        let knife = builtin::se2_knife(1.0, 1.0);
        for th in [-2.0, 0.0, 0.7, std::f64::consts::FRAC_PI_2, 3.0] {
            let t =
                check_transversality(&knife.metric, &knife.constraints, &knife.inputs, &[0.0, 0.0, th], 1e-8).unwrap();
            assert!(t.is_transversal(), "{t:?}");
        }
        let none = builtin::nonexistence_demo(1.0, 1.0);
        let t = check_transversality(&none.metric, &none.constraints, &none.inputs, &[0.0, 0.0, 0.4], 1e-8).unwrap();
        assert!(matches!(t, Transversality::Deficient { rank: 2, overlap: 1, spans: false, .. }), "{t:?}");
        let many = builtin::nonuniqueness_demo(1.0, 1.0);
        let t = check_transversality(&many.metric, &many.constraints, &many.inputs, &[0.0, 0.0, 0.4], 1e-8).unwrap();
        assert!(matches!(t, Transversality::Deficient { rank: 3, overlap: 1, spans: true, .. }), "{t:?}");
    }

    #[test]
    fn oblique_projector_example() {
        let sys = builtin::se2_knife(1.0, 1.0);
        let q = [0.0, 0.0, std::f64::consts::FRAC_PI_2];
        let pair = oblique_projectors(&sys.metric, &sys.constraints, &sys.inputs, &q).unwrap();
        let px = pair.complement.column(0);
        assert!((px - DVector::from_vec(vec![1.0, 0.0, 1.0])).amax() < 1e-14);
        let bd = basis_d(&sys.constraints, &q).unwrap();
        assert!((&pair.onto_d * &bd - &bd).amax() < 1e-14);
        let none = builtin::nonexistence_demo(1.0, 1.0);
        assert!(matches!(
            oblique_projectors(&none.metric, &none.constraints, &none.inputs, &q),
            Err(Error::NotTransversal { .. })
        ));
    }

    #[test]
    fn orthogonal_projector_examples() {
        let sys = builtin::se2_knife(1.0, 1.0);
        let pair = orthogonal_projectors(&sys.metric, &sys.constraints, &[0.0, 0.0, 0.0]).unwrap();
        let mut expected = DMatrix::zeros(3, 3);
        expected[(1, 1)] = 1.0;
        assert!((&pair.complement - expected).amax() < 1e-14);

        let chart = ChartSpec::new(vec!["a".into(), "b".into(), "c".into()], Default::default()).unwrap();
        let dist = Distribution::parse(
            &chart,
            &[vec!["0".into(), "1".into(), "0".into()], vec!["0".into(), "0".into(), "1".into()]],
        )
        .unwrap();
        let pair = orthogonal_projectors(&MetricField::diagonal(&[1.0, 1.0, 1.0]), &dist, &[0.0; 3]).unwrap();
        let mut expected = DMatrix::zeros(3, 3);
        expected[(0, 0)] = 1.0;
        assert!((&pair.onto_d - expected).amax() < 1e-14);
    }

    #[test]
    fn rank_deficient_constraints() {
        let chart = ChartSpec::new(vec!["a".into(), "b".into()], Default::default()).unwrap();
        let dist = Distribution::parse(&chart, &[vec!["a".into(), "0".into()]]).unwrap();
        assert!(basis_d(&dist, &[1.0, 0.0]).is_ok());
        assert!(matches!(basis_d(&dist, &[0.0, 0.0]), Err(Error::RankDeficientConstraints { .. })));
    }

    #[test]
    fn unconstrained_distribution() {
        let dist = Distribution::new(3, vec![]).unwrap();
        assert_eq!(basis_d(&dist, &[0.0; 3]).unwrap(), DMatrix::identity(3, 3));
        assert_eq!(constraint_residuals(&dist, &state(&[0.0; 3], &[1.0, 2.0, 3.0])).unwrap().len(), 0);
    }

    #[test]
    fn jets_agree_with_block_solve_route() {
        let sys = builtin::se2_knife(2.0, 3.0);
        let q = [0.3, -0.2, 0.9];
        let jets = PointJets::at(&sys, &q).unwrap();
        let pf = jets.input_projector().unwrap();
        let pair = oblique_projectors(&sys.metric, &sys.constraints, &sys.inputs, &q).unwrap();
        assert!((&pf.value - &pair.complement).amax() < 1e-12);
        let qn = jets.normal_projector().unwrap();
        let ortho = orthogonal_projectors(&sys.metric, &sys.constraints, &q).unwrap();
        assert!((&qn.value - &ortho.complement).amax() < 1e-12);
    }
}
