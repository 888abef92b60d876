use thiserror::Error;

use super::ast::{BinOp, Expr, Func, Symbol};
use super::dual::{DualScalar, Scalar, MAX_PARTIALS};

/// Evaluation left the real domain of an operation.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum EvalError {
    #[error("division by zero")]
    DivisionByZero,
    #[error("log of non-positive value {0}")]
    LogOfNonPositive(f64),
    #[error("sqrt of negative value {0}")]
    SqrtOfNegative(f64),
    #[error("derivative of sqrt at 0")]
    SqrtSlopeAtZero,
    #[error("{base}^{exponent} is not real")]
    InvalidPower { base: f64, exponent: f64 },
    #[error("non-finite result")]
    NonFinite,
    #[error("symbol {0:?} not supplied to the evaluator")]
    MissingSymbol(Symbol),
    #[error("too many seeds: {0} (max {MAX_PARTIALS})")]
    TooManySeeds(usize),
}

impl Expr {
    /// Evaluate with coordinates `q` and velocities `v`. `v` may be empty for
    /// configuration-only expressions.
    pub fn eval_with<S: Scalar>(&self, q: &[S], v: &[S]) -> Result<S, EvalError> {
        let out = match self {
            Expr::Num(x) => S::from_f64(*x),
            Expr::Param { value, .. } => S::from_f64(*value),
            Expr::Var { symbol, .. } => {
                let slot = match symbol {
                    Symbol::Coord(i) => q.get(*i),
                    Symbol::Vel(i) => v.get(*i),
                };
                *slot.ok_or(EvalError::MissingSymbol(*symbol))?
            }
            Expr::Neg(e) => -e.eval_with(q, v)?,
            Expr::Call { func, arg } => {
                let a = arg.eval_with(q, v)?;
                let x = a.value();
                match func {
                    Func::Sin => a.sin(),
                    Func::Cos => a.cos(),
                    Func::Tan => a.tan(),
                    Func::Exp => a.exp(),
                    Func::Abs => a.abs(),
                    Func::Log => {
                        if x <= 0.0 {
                            return Err(EvalError::LogOfNonPositive(x));
                        }
                        a.ln()
                    }
                    Func::Sqrt => {
                        if x < 0.0 {
                            return Err(EvalError::SqrtOfNegative(x));
                        }
                        if x == 0.0 && a.is_varying() {
                            return Err(EvalError::SqrtSlopeAtZero);
                        }
                        a.sqrt()
                    }
                }
            }
            Expr::Binary { op, lhs, rhs } => {
                let a = lhs.eval_with(q, v)?;
                let b = rhs.eval_with(q, v)?;
                match op {
                    BinOp::Add => a + b,
                    BinOp::Sub => a - b,
                    BinOp::Mul => a * b,
                    BinOp::Div => {
                        if b.value() == 0.0 {
                            return Err(EvalError::DivisionByZero);
                        }
                        a / b
                    }
                    BinOp::Pow => {
                        let (base, exponent) = (a.value(), b.value());
                        let integral = exponent.fract() == 0.0 && !b.is_varying();
                        let bad = (base < 0.0 && !integral)
                            || (base == 0.0 && exponent < 0.0)
                            || (base <= 0.0 && b.is_varying())
                            || (base == 0.0 && exponent < 1.0 && exponent != 0.0 && a.is_varying());
                        if bad {
                            return Err(EvalError::InvalidPower { base, exponent });
                        }
                        a.pow(b)
                    }
                }
            }
        };
        if out.value().is_finite() {
            Ok(out)
        } else {
            Err(EvalError::NonFinite)
        }
    }

    pub fn eval(&self, q: &[f64], v: &[f64]) -> Result<f64, EvalError> {
        self.eval_with::<f64>(q, v)
    }
}

/// Evaluate `expr` at `(q, v)` with partials seeded on `seeds`, in order.
///
/// Partial slot `s` of the result is the derivative with respect to
/// `seeds[s]`.
pub fn eval_dual(expr: &Expr, q: &[f64], v: &[f64], seeds: &[Symbol]) -> Result<DualScalar, EvalError> {
    if seeds.len() > MAX_PARTIALS {
        return Err(EvalError::TooManySeeds(seeds.len()));
    }
    let width = seeds.len();
    let mut dq: Vec<DualScalar> = q.iter().map(|x| DualScalar::constant(*x)).collect();
    let mut dv: Vec<DualScalar> = v.iter().map(|x| DualScalar::constant(*x)).collect();
    for (slot, sym) in seeds.iter().enumerate() {
        let target = match sym {
            Symbol::Coord(i) => dq.get_mut(*i),
            Symbol::Vel(i) => dv.get_mut(*i),
        }
        .ok_or(EvalError::MissingSymbol(*sym))?;
        *target = DualScalar::variable(target.value(), slot, width);
    }
    expr.eval_with(&dq, &dv)
}

/// Evaluate with every coordinate seeded: partial `i` is `∂/∂q_i`.
pub fn eval_coordinate_gradient(expr: &Expr, q: &[f64], v: &[f64]) -> Result<DualScalar, EvalError> {
    if q.len() > MAX_PARTIALS {
        return Err(EvalError::TooManySeeds(q.len()));
    }
    let dq: Vec<DualScalar> = q.iter().enumerate().map(|(i, x)| DualScalar::variable(*x, i, q.len())).collect();
    let dv: Vec<DualScalar> = v.iter().map(|x| DualScalar::constant(*x)).collect();
    expr.eval_with(&dq, &dv)
}
