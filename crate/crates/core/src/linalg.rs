//! Small dense linear algebra: first-order matrix jets and SVD utilities.

use nalgebra::{DMatrix, DVector, SVD};

/// Matrix-valued function of the chart coordinates evaluated at a point,
/// together with its first partials `∂_k` for every coordinate.
#[derive(Debug, Clone)]
pub struct MatrixJet {
    pub value: DMatrix<f64>,
    pub partials: Vec<DMatrix<f64>>,
}

impl MatrixJet {
    pub fn constant(value: DMatrix<f64>, width: usize) -> Self {
        let zero = DMatrix::zeros(value.nrows(), value.ncols());
        MatrixJet { value, partials: vec![zero; width] }
    }

    pub fn identity(n: usize, width: usize) -> Self {
        Self::constant(DMatrix::identity(n, n), width)
    }

    pub fn width(&self) -> usize {
        self.partials.len()
    }

    pub fn mul(&self, rhs: &MatrixJet) -> MatrixJet {
        debug_assert_eq!(self.width(), rhs.width());
        MatrixJet {
            value: &self.value * &rhs.value,
            partials: self
                .partials
                .iter()
                .zip(&rhs.partials)
                .map(|(da, db)| da * &rhs.value + &self.value * db)
                .collect(),
        }
    }

    pub fn add(&self, rhs: &MatrixJet) -> MatrixJet {
        MatrixJet {
            value: &self.value + &rhs.value,
            partials: self.partials.iter().zip(&rhs.partials).map(|(a, b)| a + b).collect(),
        }
    }

    pub fn sub(&self, rhs: &MatrixJet) -> MatrixJet {
        MatrixJet {
            value: &self.value - &rhs.value,
            partials: self.partials.iter().zip(&rhs.partials).map(|(a, b)| a - b).collect(),
        }
    }

    pub fn transpose(&self) -> MatrixJet {
        MatrixJet { value: self.value.transpose(), partials: self.partials.iter().map(|d| d.transpose()).collect() }
    }

    /// `None` when the value is singular.
    pub fn inverse(&self) -> Option<MatrixJet> {
        let inv = self.value.clone().try_inverse()?;
        let partials = self.partials.iter().map(|d| -(&inv * d * &inv)).collect();
        Some(MatrixJet { value: inv, partials })
    }

    /// `Σ_k dir_k ∂_k` of the matrix.
    pub fn directional(&self, dir: &DVector<f64>) -> DMatrix<f64> {
        let mut out = DMatrix::zeros(self.value.nrows(), self.value.ncols());
        for (k, d) in self.partials.iter().enumerate() {
            out += d * dir[k];
        }
        out
    }

    /// Apply to a vector field jet: product rule on `T(q) Y(q)`.
    pub fn apply(&self, field: &FieldJet) -> FieldJet {
        let value = &self.value * &field.value;
        let mut jacobian = &self.value * &field.jacobian;
        for (k, d) in self.partials.iter().enumerate() {
            let col = d * &field.value;
            let mut target = jacobian.column_mut(k);
            target += col;
        }
        FieldJet { value, jacobian }
    }
}

/// Vector field value and Jacobian at a point: `jacobian[(k, i)] = ∂_i Y^k`.
#[derive(Debug, Clone, PartialEq)]
pub struct FieldJet {
    pub value: DVector<f64>,
    pub jacobian: DMatrix<f64>,
}

impl FieldJet {
    pub fn new(value: DVector<f64>, jacobian: DMatrix<f64>) -> Self {
        assert_eq!(value.len(), jacobian.nrows());
        FieldJet { value, jacobian }
    }

    /// Coordinate field `∂_i` in dimension `n`.
    pub fn coordinate(n: usize, i: usize) -> Self {
        FieldJet { value: DVector::from_fn(n, |k, _| if k == i { 1.0 } else { 0.0 }), jacobian: DMatrix::zeros(n, n) }
    }

    /// Field with the given value at the point and zero derivative.
    pub fn constant(value: DVector<f64>) -> Self {
        let n = value.len();
        FieldJet { value, jacobian: DMatrix::zeros(n, n) }
    }

    pub fn dim(&self) -> usize {
        self.value.len()
    }

    /// Derivative of the field along `x`: `x^i ∂_i Y`.
    pub fn derivative_along(&self, x: &DVector<f64>) -> DVector<f64> {
        &self.jacobian * x
    }

    pub fn scaled(&self, s: f64) -> FieldJet {
        FieldJet { value: &self.value * s, jacobian: &self.jacobian * s }
    }

    pub fn plus(&self, other: &FieldJet) -> FieldJet {
        FieldJet { value: &self.value + &other.value, jacobian: &self.jacobian + &other.jacobian }
    }
}

/// Singular values, largest first.
pub fn singular_values(a: &DMatrix<f64>) -> Vec<f64> {
    if a.nrows() == 0 || a.ncols() == 0 {
        return Vec::new();
    }
    let mut s: Vec<f64> = a.clone().singular_values().iter().copied().collect();
    s.sort_by(|x, y| y.total_cmp(x));
    s
}

/// Rank counting singular values above `rtol * σ_max`.
pub fn numerical_rank(a: &DMatrix<f64>, rtol: f64) -> usize {
    let s = singular_values(a);
    match s.first() {
        Some(&max) if max > 0.0 => s.iter().filter(|x| **x > rtol * max).count(),
        _ => 0,
    }
}

/// Flip each column so its first entry above `1e-12` in magnitude is positive.
pub fn fix_column_signs(basis: &mut DMatrix<f64>) {
    for mut col in basis.column_iter_mut() {
        if let Some(first) = col.iter().copied().find(|x| x.abs() > 1e-12) {
            if first < 0.0 {
                col.neg_mut();
            }
        }
    }
}

/// Orthonormal basis of `ker a` (columns) and the numerical rank of `a`.
pub fn null_space(a: &DMatrix<f64>, rtol: f64) -> (DMatrix<f64>, usize) {
    let n = a.ncols();
    if a.nrows() == 0 {
        return (DMatrix::identity(n, n), 0);
    }
    let rows = a.nrows().max(n);
    let mut padded = DMatrix::zeros(rows, n);
    padded.view_mut((0, 0), (a.nrows(), n)).copy_from(a);
    let svd = SVD::new(padded, false, true);
    let v_t = svd.v_t.expect("requested V^T");
    let mut order: Vec<usize> = (0..svd.singular_values.len()).collect();
    order.sort_by(|&i, &j| svd.singular_values[j].total_cmp(&svd.singular_values[i]));
    let max = svd.singular_values[order[0]];
    let rank = if max > 0.0 { order.iter().filter(|&&i| svd.singular_values[i] > rtol * max).count() } else { 0 };
    let kernel: Vec<DVector<f64>> = order[rank..].iter().map(|&i| v_t.row(i).transpose()).collect();
    let mut basis = if kernel.is_empty() { DMatrix::zeros(n, 0) } else { DMatrix::from_columns(&kernel) };
    fix_column_signs(&mut basis);
    (basis, rank)
}

/// Minimum-norm least-squares solution of `a x = b` by SVD, with
/// singular values at or below `rtol * σ_max` treated as zero.
#[derive(Debug, Clone)]
pub struct LeastSquares {
    pub x: DVector<f64>,
    pub rank: usize,
    pub sigma_max: f64,
    pub sigma_min: f64,
    pub residual: f64,
}

pub fn min_norm_solve(a: &DMatrix<f64>, b: &DVector<f64>, rtol: f64) -> LeastSquares {
    let (rows, cols) = a.shape();
    if rows == 0 || cols == 0 {
        return LeastSquares { x: DVector::zeros(cols), rank: 0, sigma_max: 0.0, sigma_min: 0.0, residual: b.norm() };
    }
    let svd = SVD::new(a.clone(), true, true);
    let s = &svd.singular_values;
    let max = s.iter().copied().fold(0.0, f64::max);
    let min = s.iter().copied().fold(f64::INFINITY, f64::min);
    let cutoff = rtol * max;
    let rank = s.iter().filter(|x| **x > cutoff && **x > 0.0).count();
    let u = svd.u.as_ref().expect("requested U");
    let v_t = svd.v_t.as_ref().expect("requested V^T");
    let mut x = DVector::zeros(cols);
    for i in 0..s.len() {
        if s[i] > cutoff && s[i] > 0.0 {
            let coeff = u.column(i).dot(b) / s[i];
            x += v_t.row(i).transpose() * coeff;
        }
    }
    let residual = (a * &x - b).norm();
    LeastSquares { x, rank, sigma_max: max, sigma_min: min, residual }
}
