use std::fmt;

/// 1-based source position.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct Span {
    pub line: usize,
    pub column: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum CoordKind {
    /// `z` / `z_i`: coordinates of the ball the symbol lives on.
    Z,
    /// `zc` / `zc_j`: coordinates of the complementary ball `B^{n-ℓ}`.
    Zc,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Func {
    Re,
    Im,
    Conj,
    Abs2,
    Sqrt,
}

impl Func {
    pub fn name(self) -> &'static str {
        match self {
            Func::Re => "re",
            Func::Im => "im",
            Func::Conj => "conj",
            Func::Abs2 => "abs2",
            Func::Sqrt => "sqrt",
        }
    }

    pub(crate) fn from_name(name: &str) -> Option<Func> {
        Some(match name {
            "re" => Func::Re,
            "im" => Func::Im,
            "conj" => Func::Conj,
            "abs2" => Func::Abs2,
            "sqrt" => Func::Sqrt,
            _ => return None,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum BinOp {
    Add,
    Sub,
    Mul,
    Div,
}

impl BinOp {
    pub fn symbol(self) -> char {
        match self {
            BinOp::Add => '+',
            BinOp::Sub => '-',
            BinOp::Mul => '*',
            BinOp::Div => '/',
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Node {
    Number(f64),
    ImaginaryUnit,
    /// `index == None` is the whole tuple; only legal directly under `abs2`.
    Coord { kind: CoordKind, index: Option<u32> },
    Radius(u32),
    Call(Func, Box<SymbolExpr>),
    Neg(Box<SymbolExpr>),
    Binary(BinOp, Box<SymbolExpr>, Box<SymbolExpr>),
    Pow(Box<SymbolExpr>, u32),
}

/// Expression tree. Equality is structural and ignores source positions.
#[derive(Debug, Clone)]
pub struct SymbolExpr {
    pub node: Node,
    pub span: Span,
}

impl PartialEq for SymbolExpr {
    fn eq(&self, other: &Self) -> bool {
        self.node == other.node
    }
}

impl SymbolExpr {
    pub fn new(node: Node, span: Span) -> Self {
        Self { node, span }
    }

    pub fn number(value: f64) -> Self {
        Self::new(Node::Number(value), Span::default())
    }

    /// Visit every node in pre-order.
    pub fn walk<'a>(&'a self, visit: &mut dyn FnMut(&'a SymbolExpr)) {
        visit(self);
        match &self.node {
            Node::Call(_, e) | Node::Neg(e) | Node::Pow(e, _) => e.walk(visit),
            Node::Binary(_, l, r) => {
                l.walk(visit);
                r.walk(visit);
            }
            Node::Number(_) | Node::ImaginaryUnit | Node::Coord { .. } | Node::Radius(_) => {}
        }
    }

    /// True when no coordinate or radius appears.
    pub fn is_constant(&self) -> bool {
        let mut constant = true;
        self.walk(&mut |e| {
            if matches!(e.node, Node::Coord { .. } | Node::Radius(_)) {
                constant = false;
            }
        });
        constant
    }

    fn precedence(&self) -> u8 {
        match &self.node {
            Node::Binary(BinOp::Add | BinOp::Sub, ..) => 1,
            Node::Binary(BinOp::Mul | BinOp::Div, ..) => 2,
            Node::Neg(_) => 3,
            Node::Pow(..) => 4,
            Node::Number(v) if v.is_sign_negative() => 3,
            _ => 5,
        }
    }
}

fn write_operand(f: &mut fmt::Formatter<'_>, e: &SymbolExpr, parens: bool) -> fmt::Result {
    if parens {
        write!(f, "({e})")
    } else {
        write!(f, "{e}")
    }
}

/// Canonical form: minimal parentheses that reproduce the same tree.
impl fmt::Display for SymbolExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.node {
            Node::Number(v) => {
                if v.is_sign_negative() {
                    write!(f, "-{}", -v)
                } else {
                    write!(f, "{v}")
                }
            }
            Node::ImaginaryUnit => write!(f, "i"),
            Node::Coord { kind, index } => {
                let stem = match kind {
                    CoordKind::Z => "z",
                    CoordKind::Zc => "zc",
                };
                match index {
                    Some(i) => write!(f, "{stem}{i}"),
                    None => write!(f, "{stem}"),
                }
            }
            Node::Radius(j) => write!(f, "r{j}"),
            Node::Call(func, arg) => write!(f, "{}({arg})", func.name()),
            Node::Neg(e) => {
                write!(f, "-")?;
                write_operand(f, e, e.precedence() < 3)
            }
            Node::Binary(op, l, r) => {
                let p = self.precedence();
                write_operand(f, l, l.precedence() < p)?;
                write!(f, " {} ", op.symbol())?;
                write_operand(f, r, r.precedence() <= p)
            }
            Node::Pow(base, k) => {
                write_operand(f, base, base.precedence() < 5)?;
                write!(f, "^{k}")
            }
        }
    }
}

/// Result of parsing: a plain expression or a `prod(a = ..., c = ...)` pair.
#[derive(Debug, Clone, PartialEq)]
pub enum ParsedSymbol {
    Plain(SymbolExpr),
    Product { a: SymbolExpr, c: SymbolExpr },
}

impl fmt::Display for ParsedSymbol {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ParsedSymbol::Plain(e) => write!(f, "{e}"),
            ParsedSymbol::Product { a, c } => write!(f, "prod(a = {a}, c = {c})"),
        }
    }
}
