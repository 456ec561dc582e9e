//! A small arithmetic language in one free variable `x`.
//!
//! Grammar, lowest precedence first:
//!
//! ```text
//! sum     := product (('+' | '-') product)*
//! product := unary (('*' | '/') unary)*
//! unary   := ('-' | '+') unary | power
//! power   := atom ('^' unary)?
//! atom    := number | 'x' | 'pi' | 'e' | func '(' sum ')' | '(' sum ')'
//! func    := sin | cos | tan | sinh | cosh | tanh | sech | exp | log | abs | sqrt
//! ```
//!
//! `^` is right-associative and binds tighter than unary minus, so `-2^2`
//! is `-(2^2)` and `2^3^2` is `2^(3^2)`. `log` is the natural logarithm.
//!
//! Evaluation never fails: `log(0)`, `1/0` and friends produce IEEE
//! non-finite values that downstream numerics can detect.

use std::fmt;
use std::str::FromStr;

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ExprError {
    #[error("syntax error at byte {offset}: {message}")]
    Syntax { offset: usize, message: String },
    #[error("unknown identifier `{name}` at byte {offset}")]
    UnknownIdentifier { name: String, offset: usize },
}

impl ExprError {
    /// Byte offset into the source where the problem was detected.
    pub fn offset(&self) -> usize {
        match self {
            ExprError::Syntax { offset, .. } | ExprError::UnknownIdentifier { offset, .. } => {
                *offset
            }
        }
    }

    fn syntax(offset: usize, message: impl Into<String>) -> Self {
        ExprError::Syntax {
            offset,
            message: message.into(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Constant {
    Pi,
    E,
}

impl Constant {
    pub fn value(self) -> f64 {
        match self {
            Constant::Pi => std::f64::consts::PI,
            Constant::E => std::f64::consts::E,
        }
    }

    fn name(self) -> &'static str {
        match self {
            Constant::Pi => "pi",
            Constant::E => "e",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Func {
    Sin,
    Cos,
    Tan,
    Sinh,
    Cosh,
    Tanh,
    Sech,
    Exp,
    Log,
    Abs,
    Sqrt,
}

impl Func {
    const ALL: [Func; 11] = [
        Func::Sin,
        Func::Cos,
        Func::Tan,
        Func::Sinh,
        Func::Cosh,
        Func::Tanh,
        Func::Sech,
        Func::Exp,
        Func::Log,
        Func::Abs,
        Func::Sqrt,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Func::Sin => "sin",
            Func::Cos => "cos",
            Func::Tan => "tan",
            Func::Sinh => "sinh",
            Func::Cosh => "cosh",
            Func::Tanh => "tanh",
            Func::Sech => "sech",
            Func::Exp => "exp",
            Func::Log => "log",
            Func::Abs => "abs",
            Func::Sqrt => "sqrt",
        }
    }

    fn lookup(name: &str) -> Option<Func> {
        Func::ALL.into_iter().find(|f| f.name() == name)
    }

    pub fn apply(self, v: f64) -> f64 {
        match self {
            Func::Sin => v.sin(),
            Func::Cos => v.cos(),
            Func::Tan => v.tan(),
            Func::Sinh => v.sinh(),
            Func::Cosh => v.cosh(),
            Func::Tanh => v.tanh(),
            // 1/cosh overflows gracefully to 0 for large |v|.
            Func::Sech => 1.0 / v.cosh(),
            Func::Exp => v.exp(),
            // ln of a negative number is NaN, ln 0 is -inf: both propagate.
            Func::Log => v.ln(),
            Func::Abs => v.abs(),
            Func::Sqrt => v.sqrt(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BinOp {
    Add,
    Sub,
    Mul,
    Div,
    Pow,
}

impl BinOp {
    fn name(self) -> &'static str {
        match self {
            BinOp::Add => "add",
            BinOp::Sub => "sub",
            BinOp::Mul => "mul",
            BinOp::Div => "div",
            BinOp::Pow => "pow",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Node {
    Number(f64),
    Var,
    Const(Constant),
    Neg(Box<Node>),
    Binary {
        op: BinOp,
        lhs: Box<Node>,
        rhs: Box<Node>,
    },
    Call {
        func: Func,
        arg: Box<Node>,
    },
}

impl Node {
    fn eval(&self, x: f64) -> f64 {
        match self {
            Node::Number(v) => *v,
            Node::Var => x,
            Node::Const(c) => c.value(),
            Node::Neg(inner) => -inner.eval(x),
            Node::Binary { op, lhs, rhs } => {
                let (l, r) = (lhs.eval(x), rhs.eval(x));
                match op {
                    BinOp::Add => l + r,
                    BinOp::Sub => l - r,
                    BinOp::Mul => l * r,
                    BinOp::Div => l / r,
                    BinOp::Pow => l.powf(r),
                }
            }
            Node::Call { func, arg } => func.apply(arg.eval(x)),
        }
    }
}

/// Compact functional rendering, e.g. `sech(mul(2, x))`.
impl fmt::Display for Node {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Node::Number(v) => write!(f, "{v}"),
            Node::Var => f.write_str("x"),
            Node::Const(c) => f.write_str(c.name()),
            Node::Neg(inner) => write!(f, "neg({inner})"),
            Node::Binary { op, lhs, rhs } => write!(f, "{}({lhs}, {rhs})", op.name()),
            Node::Call { func, arg } => write!(f, "{}({arg})", func.name()),
        }
    }
}

/// A parsed expression. Immutable; evaluation is pure.
#[derive(Debug, Clone, PartialEq)]
pub struct ExprAst {
    root: Node,
    source: String,
}

impl ExprAst {
    pub fn root(&self) -> &Node {
        &self.root
    }

    pub fn source(&self) -> &str {
        &self.source
    }

    pub fn eval_at(&self, x: f64) -> f64 {
        self.root.eval(x)
    }
}

impl fmt::Display for ExprAst {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.root.fmt(f)
    }
}

impl FromStr for ExprAst {
    type Err = ExprError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        parse(s)
    }
}

pub fn parse(source: &str) -> Result<ExprAst, ExprError> {
    let tokens = tokenize(source)?;
    if tokens.len() == 1 {
        return Err(ExprError::syntax(0, "empty expression"));
    }
    let mut parser = Parser { tokens, pos: 0 };
    let root = parser.sum()?;
    let tail = parser.peek();
    if tail.kind != Tok::End {
        return Err(ExprError::syntax(
            tail.offset,
            format!("unexpected {}", tail.kind.describe()),
        ));
    }
    Ok(ExprAst {
        root,
        source: source.to_string(),
    })
}

pub fn eval_at(ast: &ExprAst, x: f64) -> f64 {
    ast.eval_at(x)
}

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Num(f64),
    Ident(String),
    Plus,
    Minus,
    Star,
    Slash,
    Caret,
    LParen,
    RParen,
    End,
}

impl Tok {
    fn describe(&self) -> String {
        match self {
            Tok::Num(v) => format!("number {v}"),
            Tok::Ident(s) => format!("identifier `{s}`"),
            Tok::Plus => "`+`".into(),
            Tok::Minus => "`-`".into(),
            Tok::Star => "`*`".into(),
            Tok::Slash => "`/`".into(),
            Tok::Caret => "`^`".into(),
            Tok::LParen => "`(`".into(),
            Tok::RParen => "`)`".into(),
            Tok::End => "end of input".into(),
        }
    }
}

#[derive(Debug, Clone)]
struct Token {
    kind: Tok,
    offset: usize,
}

fn tokenize(source: &str) -> Result<Vec<Token>, ExprError> {
    let bytes = source.as_bytes();
    let mut out = Vec::new();
    let mut i = 0;
    while i < bytes.len() {
        let c = bytes[i];
        let start = i;
        let simple = match c {
            b'+' => Some(Tok::Plus),
            b'-' => Some(Tok::Minus),
            b'*' => Some(Tok::Star),
            b'/' => Some(Tok::Slash),
            b'^' => Some(Tok::Caret),
            b'(' => Some(Tok::LParen),
            b')' => Some(Tok::RParen),
            _ => None,
        };
        if let Some(kind) = simple {
            out.push(Token {
                kind,
                offset: start,
            });
            i += 1;
        } else if c.is_ascii_whitespace() {
            i += 1;
        } else if c.is_ascii_digit() || c == b'.' {
            while i < bytes.len() && (bytes[i].is_ascii_digit() || bytes[i] == b'.') {
                i += 1;
            }
            // Exponent only when followed by digits; otherwise `e` is the constant.
            if i < bytes.len() && (bytes[i] == b'e' || bytes[i] == b'E') {
                let mut j = i + 1;
                if j < bytes.len() && (bytes[j] == b'+' || bytes[j] == b'-') {
                    j += 1;
                }
                if j < bytes.len() && bytes[j].is_ascii_digit() {
                    while j < bytes.len() && bytes[j].is_ascii_digit() {
                        j += 1;
                    }
                    i = j;
                }
            }
            let text = &source[start..i];
            let value: f64 = text
                .parse()
                .map_err(|_| ExprError::syntax(start, format!("malformed number `{text}`")))?;
            out.push(Token {
                kind: Tok::Num(value),
                offset: start,
            });
        } else if c.is_ascii_alphabetic() || c == b'_' {
            while i < bytes.len() && (bytes[i].is_ascii_alphanumeric() || bytes[i] == b'_') {
                i += 1;
            }
            out.push(Token {
                kind: Tok::Ident(source[start..i].to_string()),
                offset: start,
            });
        } else {
            let ch = source[start..].chars().next().unwrap_or('?');
            return Err(ExprError::syntax(
                start,
                format!("unexpected character `{ch}`"),
            ));
        }
    }
    out.push(Token {
        kind: Tok::End,
        offset: source.len(),
    });
    Ok(out)
}

struct Parser {
    tokens: Vec<Token>,
    pos: usize,
}

impl Parser {
    fn peek(&self) -> &Token {
        &self.tokens[self.pos]
    }

    fn bump(&mut self) -> Token {
        let tok = self.tokens[self.pos].clone();
        if tok.kind != Tok::End {
            self.pos += 1;
        }
        tok
    }

    fn expect(&mut self, kind: Tok) -> Result<(), ExprError> {
        let tok = self.bump();
        if tok.kind == kind {
            Ok(())
        } else {
            Err(ExprError::syntax(
                tok.offset,
                format!(
                    "expected {}, found {}",
                    kind.describe(),
                    tok.kind.describe()
                ),
            ))
        }
    }

    fn sum(&mut self) -> Result<Node, ExprError> {
        let mut lhs = self.product()?;
        loop {
            let op = match self.peek().kind {
                Tok::Plus => BinOp::Add,
                Tok::Minus => BinOp::Sub,
                _ => return Ok(lhs),
            };
            self.bump();
            let rhs = self.product()?;
            lhs = binary(op, lhs, rhs);
        }
    }

    fn product(&mut self) -> Result<Node, ExprError> {
        let mut lhs = self.unary()?;
        loop {
            let op = match self.peek().kind {
                Tok::Star => BinOp::Mul,
                Tok::Slash => BinOp::Div,
                _ => return Ok(lhs),
            };
            self.bump();
            let rhs = self.unary()?;
            lhs = binary(op, lhs, rhs);
        }
    }

    fn unary(&mut self) -> Result<Node, ExprError> {
        match self.peek().kind {
            Tok::Minus => {
                self.bump();
                Ok(Node::Neg(Box::new(self.unary()?)))
            }
            Tok::Plus => {
                self.bump();
                self.unary()
            }
            _ => self.power(),
        }
    }

    fn power(&mut self) -> Result<Node, ExprError> {
        let base = self.atom()?;
        if self.peek().kind == Tok::Caret {
            self.bump();
            // The exponent may itself carry a sign or another `^`.
            let exponent = self.unary()?;
            return Ok(binary(BinOp::Pow, base, exponent));
        }
        Ok(base)
    }

    fn atom(&mut self) -> Result<Node, ExprError> {
        let tok = self.bump();
        match tok.kind {
            Tok::Num(v) => Ok(Node::Number(v)),
            Tok::LParen => {
                let inner = self.sum()?;
                self.expect(Tok::RParen)?;
                Ok(inner)
            }
            Tok::Ident(name) => self.identifier(name, tok.offset),
            other => Err(ExprError::syntax(
                tok.offset,
                format!("expected a value, found {}", other.describe()),
            )),
        }
    }

    fn identifier(&mut self, name: String, offset: usize) -> Result<Node, ExprError> {
        match name.as_str() {
            "x" => return Ok(Node::Var),
            "pi" => return Ok(Node::Const(Constant::Pi)),
            "e" => return Ok(Node::Const(Constant::E)),
            _ => {}
        }
        let Some(func) = Func::lookup(&name) else {
            return Err(ExprError::UnknownIdentifier { name, offset });
        };
        let open = self.peek().offset;
        if self.peek().kind != Tok::LParen {
            return Err(ExprError::syntax(
                open,
                format!("function `{name}` must be followed by `(`"),
            ));
        }
        self.bump();
        let arg = self.sum()?;
        self.expect(Tok::RParen)?;
        Ok(Node::Call {
            func,
            arg: Box::new(arg),
        })
    }
}

fn binary(op: BinOp, lhs: Node, rhs: Node) -> Node {
    Node::Binary {
        op,
        lhs: Box::new(lhs),
        rhs: Box::new(rhs),
    }
}
