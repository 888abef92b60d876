//! Tokenizer and Pratt parser for the scalar expression language.
//!
//! Precedence, loosest first: `+ -`, `* /`, unary `-`, `^`. Binary operators
//! are left-associative except `^`, which is right-associative, so `-x^2`
//! is `-(x^2)` and `a^b^c` is `a^(b^c)`.

use std::collections::HashMap;

use thiserror::Error;

use super::ast::{BinOp, Expr, Func, Symbol};

#[derive(Debug, Clone, PartialEq)]
pub enum Binding {
    Coord(usize),
    Vel(usize),
    Param(f64),
}

/// Names an expression may reference, resolved at parse time.
#[derive(Debug, Clone, Default)]
pub struct SymbolTable {
    bindings: HashMap<String, Binding>,
}

impl SymbolTable {
    pub fn new() -> Self {
        Self::default()
    }

    /// Coordinates are reachable as `q1..qn` and by name; velocities as
    /// `v1..vn` and `<name>_dot`.
    pub fn for_chart<S: AsRef<str>>(coordinates: &[S]) -> Self {
        let mut table = SymbolTable::new();
        for (i, name) in coordinates.iter().enumerate() {
            let name = name.as_ref();
            table.bind(format!("q{}", i + 1), Binding::Coord(i));
            table.bind(format!("v{}", i + 1), Binding::Vel(i));
            table.bind(name.to_string(), Binding::Coord(i));
            table.bind(format!("{name}_dot"), Binding::Vel(i));
        }
        table
    }

    pub fn bind(&mut self, name: impl Into<String>, binding: Binding) {
        self.bindings.insert(name.into(), binding);
    }

    pub fn with_param(mut self, name: impl Into<String>, value: f64) -> Self {
        self.bind(name, Binding::Param(value));
        self
    }

    pub fn resolve(&self, name: &str) -> Option<&Binding> {
        self.bindings.get(name)
    }

    /// Same table with every velocity binding dropped, for fields that may
    /// only depend on configuration.
    pub fn coordinates_only(&self) -> Self {
        SymbolTable {
            bindings: self
                .bindings
                .iter()
                .filter(|(_, b)| !matches!(b, Binding::Vel(_)))
                .map(|(k, v)| (k.clone(), v.clone()))
                .collect(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ParseError {
    #[error("empty expression")]
    EmptyInput,
    #[error("unknown symbol `{name}` at {line}:{column}")]
    UnknownSymbol { name: String, line: usize, column: usize },
    #[error("syntax error at {line}:{column}: {message}")]
    Syntax { message: String, line: usize, column: usize },
}

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Num(f64),
    Ident(String),
    Op(char),
    LParen,
    RParen,
    End,
}

#[derive(Debug, Clone)]
struct Token {
    tok: Tok,
    line: usize,
    column: usize,
}

fn tokenize(src: &str) -> Result<Vec<Token>, ParseError> {
    let chars: Vec<char> = src.chars().collect();
    let mut out = Vec::new();
    let (mut line, mut column) = (1usize, 1usize);
    let mut i = 0;
    while i < chars.len() {
        let c = chars[i];
        let (tl, tc) = (line, column);
        if c == '\n' {
            line += 1;
            column = 1;
            i += 1;
            continue;
        }
        if c.is_whitespace() {
            column += 1;
            i += 1;
            continue;
        }
        let start = i;
        let tok = if c.is_ascii_digit() || c == '.' {
            while i < chars.len() && (chars[i].is_ascii_digit() || chars[i] == '.') {
                i += 1;
            }
            if i < chars.len() && (chars[i] == 'e' || chars[i] == 'E') {
                let mut j = i + 1;
                if j < chars.len() && (chars[j] == '+' || chars[j] == '-') {
                    j += 1;
                }
                if j < chars.len() && chars[j].is_ascii_digit() {
                    while j < chars.len() && chars[j].is_ascii_digit() {
                        j += 1;
                    }
                    i = j;
                }
            }
            let text: String = chars[start..i].iter().collect();
            let value = text.parse::<f64>().map_err(|_| ParseError::Syntax {
                message: format!("malformed number `{text}`"),
                line: tl,
                column: tc,
            })?;
            Tok::Num(value)
        } else if c.is_alphabetic() || c == '_' {
            while i < chars.len() && (chars[i].is_alphanumeric() || chars[i] == '_') {
                i += 1;
            }
            Tok::Ident(chars[start..i].iter().collect())
        } else {
            i += 1;
            match c {
                '+' | '-' | '*' | '/' | '^' => Tok::Op(c),
                '(' => Tok::LParen,
                ')' => Tok::RParen,
                _ => {
                    return Err(ParseError::Syntax {
                        message: format!("unexpected character `{c}`"),
                        line: tl,
                        column: tc,
                    })
                }
            }
        };
        column += i - start;
        out.push(Token { tok, line: tl, column: tc });
    }
    out.push(Token { tok: Tok::End, line, column });
    Ok(out)
}

const PREFIX_NEG_BP: u8 = 5;

fn infix_binding_power(op: char) -> Option<(u8, u8, BinOp)> {
    Some(match op {
        '+' => (1, 2, BinOp::Add),
        '-' => (1, 2, BinOp::Sub),
        '*' => (3, 4, BinOp::Mul),
        '/' => (3, 4, BinOp::Div),
        '^' => (7, 6, BinOp::Pow),
        _ => return None,
    })
}

struct Parser<'a> {
    tokens: Vec<Token>,
    pos: usize,
    symbols: &'a SymbolTable,
}

impl Parser<'_> {
    fn peek(&self) -> &Token {
        &self.tokens[self.pos]
    }

    fn next(&mut self) -> Token {
        let t = self.tokens[self.pos].clone();
        if self.pos + 1 < self.tokens.len() {
            self.pos += 1;
        }
        t
    }

    fn syntax(tok: &Token, message: impl Into<String>) -> ParseError {
        ParseError::Syntax { message: message.into(), line: tok.line, column: tok.column }
    }

    fn expr(&mut self, min_bp: u8) -> Result<Expr, ParseError> {
        let tok = self.next();
        let mut lhs = match &tok.tok {
            Tok::Num(v) => Expr::Num(*v),
            Tok::Op('-') => Expr::Neg(Box::new(self.expr(PREFIX_NEG_BP)?)),
            Tok::Op('+') => self.expr(PREFIX_NEG_BP)?,
            Tok::LParen => {
                let inner = self.expr(0)?;
                let close = self.next();
                if close.tok != Tok::RParen {
                    return Err(Self::syntax(&close, "expected `)`"));
                }
                inner
            }
            Tok::Ident(name) => self.identifier(name, &tok)?,
            Tok::End => return Err(Self::syntax(&tok, "unexpected end of input")),
            other => return Err(Self::syntax(&tok, format!("unexpected token {other:?}"))),
        };

        loop {
            let tok = self.peek().clone();
            let op = match tok.tok {
                Tok::Op(c) => c,
                Tok::End | Tok::RParen => break,
                ref other => return Err(Self::syntax(&tok, format!("expected operator, found {other:?}"))),
            };
            let (l_bp, r_bp, bin) = infix_binding_power(op).expect("lexer only emits known ops");
            if l_bp < min_bp {
                break;
            }
            self.next();
            let rhs = self.expr(r_bp)?;
            lhs = Expr::Binary { op: bin, lhs: Box::new(lhs), rhs: Box::new(rhs) };
        }
        Ok(lhs)
    }

    fn identifier(&mut self, name: &str, tok: &Token) -> Result<Expr, ParseError> {
        if self.peek().tok == Tok::LParen {
            let func = Func::from_name(name).ok_or_else(|| Self::syntax(tok, format!("unknown function `{name}`")))?;
            self.next();
            let arg = self.expr(0)?;
            let close = self.next();
            if close.tok != Tok::RParen {
                return Err(Self::syntax(&close, "expected `)` after function argument"));
            }
            return Ok(Expr::Call { func, arg: Box::new(arg) });
        }
        if Func::from_name(name).is_some() {
            return Err(Self::syntax(tok, format!("function `{name}` needs a parenthesized argument")));
        }
        match self.symbols.resolve(name) {
            Some(Binding::Coord(i)) => Ok(Expr::Var { name: name.to_string(), symbol: Symbol::Coord(*i) }),
            Some(Binding::Vel(i)) => Ok(Expr::Var { name: name.to_string(), symbol: Symbol::Vel(*i) }),
            Some(Binding::Param(v)) => Ok(Expr::Param { name: name.to_string(), value: *v }),
            None if name == "pi" => Ok(Expr::Param { name: "pi".into(), value: std::f64::consts::PI }),
            None => Err(ParseError::UnknownSymbol { name: name.to_string(), line: tok.line, column: tok.column }),
        }
    }
}

/// Parse `source` against `symbols`. Every identifier must resolve.
pub fn parse(source: &str, symbols: &SymbolTable) -> Result<Expr, ParseError> {
    if source.trim().is_empty() {
        return Err(ParseError::EmptyInput);
    }
    let tokens = tokenize(source)?;
    let mut p = Parser { tokens, pos: 0, symbols };
    let expr = p.expr(0)?;
    let tail = p.peek();
    if tail.tok != Tok::End {
        return Err(Parser::syntax(tail, "unexpected trailing input"));
    }
    Ok(expr)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn se2() -> SymbolTable {
        SymbolTable::for_chart(&["x", "y", "theta"]).with_param("m", 2.0)
    }

    #[test]
    fn unknown_symbol_reports_position() {
        let err = parse("x + 2*zeta", &se2()).unwrap_err();
        assert_eq!(err, ParseError::UnknownSymbol { name: "zeta".into(), line: 1, column: 7 });
    }

    #[test]
    fn empty_input() {
        assert_eq!(parse("  \n ", &se2()).unwrap_err(), ParseError::EmptyInput);
    }

    #[test]
    fn syntax_errors() {
        for src in ["x +", "(x", "x y", "sin x", "3 $ 4", "foo(x)", ")"] {
            assert!(matches!(parse(src, &se2()), Err(ParseError::Syntax { .. })), "{src} should be a syntax error");
        }
        match parse("x +\n  * y", &se2()) {
            Err(ParseError::Syntax { line, column, .. }) => assert_eq!((line, column), (2, 3)),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn aliases_resolve_to_same_symbol() {
        let t = se2();
        let a = parse("theta", &t).unwrap();
        let b = parse("q3", &t).unwrap();
        match (a, b) {
            (Expr::Var { symbol: s1, .. }, Expr::Var { symbol: s2, .. }) => assert_eq!(s1, s2),
            _ => unreachable!(),
        }
        assert!(parse("theta_dot", &t).unwrap().uses_velocity());
        assert!(parse("v2", &t).unwrap().uses_velocity());
    }

    #[test]
    fn coordinates_only_rejects_velocities() {
        let t = se2().coordinates_only();
        assert!(matches!(parse("v1", &t), Err(ParseError::UnknownSymbol { .. })));
        assert!(parse("m*cos(q3)", &t).is_ok());
    }

    #[test]
    fn precedence_shapes() {
        let t = se2();
        let e = parse("-x^2", &t).unwrap();
        assert!(matches!(e, Expr::Neg(ref inner) if matches!(**inner, Expr::Binary { op: BinOp::Pow, .. })));
        let e = parse("x - y - theta", &t).unwrap();
        match e {
            Expr::Binary { op: BinOp::Sub, lhs, .. } => {
                assert!(matches!(*lhs, Expr::Binary { op: BinOp::Sub, .. }))
            }
            _ => panic!(),
        }
        let e = parse("x^y^theta", &t).unwrap();
        match e {
            Expr::Binary { op: BinOp::Pow, rhs, .. } => {
                assert!(matches!(*rhs, Expr::Binary { op: BinOp::Pow, .. }))
            }
            _ => panic!(),
        }
    }

    #[test]
    fn numbers() {
        let t = SymbolTable::new();
        assert_eq!(parse("1e-3", &t).unwrap(), Expr::Num(1e-3));
        assert_eq!(parse(".5", &t).unwrap(), Expr::Num(0.5));
        assert_eq!(parse("2.5E+2", &t).unwrap(), Expr::Num(250.0));
        assert_eq!(parse("0", &t).unwrap(), Expr::zero());
        assert!(parse("1.2.3", &t).is_err());
    }
}
