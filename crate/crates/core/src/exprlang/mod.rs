//! Scalar expression language for system definitions.
//!
//! Users write metric entries, potentials, one-form coefficients and force
//! components as text over chart coordinates and velocities. Expressions are
//! parsed once into an immutable [`Expr`] and evaluated either on plain
//! `f64` or on [`DualScalar`] for exact first derivatives.

mod ast;
mod dual;
mod eval;
mod parser;

pub use ast::{BinOp, Expr, Func, Symbol};
pub use dual::{DualScalar, Scalar, MAX_PARTIALS};
pub use eval::{eval_coordinate_gradient, eval_dual, EvalError};
pub use parser::{parse, Binding, ParseError, SymbolTable};
