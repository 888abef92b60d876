use std::fmt;

/// Resolved reference to a chart variable.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Symbol {
    /// Coordinate `q_i` (zero-based).
    Coord(usize),
    /// Velocity `v_i` (zero-based).
    Vel(usize),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Func {
    Sin,
    Cos,
    Tan,
    Exp,
    Log,
    Sqrt,
    Abs,
}

impl Func {
    pub fn from_name(name: &str) -> Option<Func> {
        Some(match name {
            "sin" => Func::Sin,
            "cos" => Func::Cos,
            "tan" => Func::Tan,
            "exp" => Func::Exp,
            "log" => Func::Log,
            "sqrt" => Func::Sqrt,
            "abs" => Func::Abs,
            _ => return None,
        })
    }

    pub fn name(self) -> &'static str {
        match self {
            Func::Sin => "sin",
            Func::Cos => "cos",
            Func::Tan => "tan",
            Func::Exp => "exp",
            Func::Log => "log",
            Func::Sqrt => "sqrt",
            Func::Abs => "abs",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum BinOp {
    Add,
    Sub,
    Mul,
    Div,
    Pow,
}

impl BinOp {
    fn symbol(self) -> &'static str {
        match self {
            BinOp::Add => " + ",
            BinOp::Sub => " - ",
            BinOp::Mul => "*",
            BinOp::Div => "/",
            BinOp::Pow => "^",
        }
    }

    fn precedence(self) -> u8 {
        match self {
            BinOp::Add | BinOp::Sub => 1,
            BinOp::Mul | BinOp::Div => 2,
            BinOp::Pow => 4,
        }
    }
}

/// Scalar expression over chart coordinates, velocities and bound parameters.
///
/// Symbol names are kept next to their resolution so that [`fmt::Display`]
/// reproduces text that reparses to the same tree under the same symbol table.
#[derive(Debug, Clone, PartialEq)]
pub enum Expr {
    Num(f64),
    Var { name: String, symbol: Symbol },
    Param { name: String, value: f64 },
    Neg(Box<Expr>),
    Binary { op: BinOp, lhs: Box<Expr>, rhs: Box<Expr> },
    Call { func: Func, arg: Box<Expr> },
}

const PREC_NEG: u8 = 3;
const PREC_ATOM: u8 = 5;

impl Expr {
    pub fn zero() -> Expr {
        Expr::Num(0.0)
    }

    /// True when the expression is the literal `0` (not merely zero-valued).
    pub fn is_literal_zero(&self) -> bool {
        matches!(self, Expr::Num(v) if *v == 0.0)
    }

    /// True when any velocity symbol appears in the tree.
    pub fn uses_velocity(&self) -> bool {
        match self {
            Expr::Var { symbol, .. } => matches!(symbol, Symbol::Vel(_)),
            Expr::Num(_) | Expr::Param { .. } => false,
            Expr::Neg(e) | Expr::Call { arg: e, .. } => e.uses_velocity(),
            Expr::Binary { lhs, rhs, .. } => lhs.uses_velocity() || rhs.uses_velocity(),
        }
    }

    pub fn depth(&self) -> usize {
        match self {
            Expr::Num(_) | Expr::Var { .. } | Expr::Param { .. } => 1,
            Expr::Neg(e) | Expr::Call { arg: e, .. } => 1 + e.depth(),
            Expr::Binary { lhs, rhs, .. } => 1 + lhs.depth().max(rhs.depth()),
        }
    }

    fn precedence(&self) -> u8 {
        match self {
            Expr::Binary { op, .. } => op.precedence(),
            Expr::Neg(_) => PREC_NEG,
            _ => PREC_ATOM,
        }
    }
}

fn write_wrapped(f: &mut fmt::Formatter<'_>, e: &Expr, parens: bool) -> fmt::Result {
    if parens {
        write!(f, "({e})")
    } else {
        write!(f, "{e}")
    }
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Expr::Num(v) => write!(f, "{v}"),
            Expr::Var { name, .. } | Expr::Param { name, .. } => f.write_str(name),
            Expr::Neg(e) => {
                f.write_str("-")?;
                write_wrapped(f, e, e.precedence() < PREC_NEG)
            }
            Expr::Call { func, arg } => write!(f, "{}({arg})", func.name()),
            Expr::Binary { op, lhs, rhs } => {
                let p = op.precedence();
                let (lp, rp) = (lhs.precedence(), rhs.precedence());
                let left_parens = if *op == BinOp::Pow { lp <= p } else { lp < p };
                let right_parens = if *op == BinOp::Pow { rp < PREC_NEG } else { rp <= p };
                write_wrapped(f, lhs, left_parens)?;
                f.write_str(op.symbol())?;
                write_wrapped(f, rhs, right_parens)
            }
        }
    }
}
