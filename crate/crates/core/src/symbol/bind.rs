use std::fmt;
use std::ops::Range;
use std::sync::Arc;

use num_complex::Complex64;

use super::ast::{BinOp, CoordKind, Func, Node, ParsedSymbol, SymbolExpr};
use super::parse::parse_symbol;
use crate::error::{Error, Result};
use crate::geometry::BallGeometry;

/// The ball a symbol is evaluated on, which fixes what each coordinate means.
#[derive(Debug, Clone, PartialEq)]
pub enum Domain {
    /// `B^n`: `z_i` is coordinate `i`, `zc_j` is `z_{ℓ+j}`, `r_j` is `|z_(j)|`.
    Full(BallGeometry),
    /// `B^ℓ` carrying the partition `k`; `zc` is not available.
    Prime(BallGeometry),
    /// A plain ball `B^d`; `z_i` and `zc_i` both name coordinate `i`, `r1 = |z|`.
    Ball(usize),
    /// The radius base `τ(B^m)`: points are radius tuples `(r_1, ..., r_m)`.
    Reinhardt(Vec<usize>),
}

impl Domain {
    /// Number of entries in a point of this domain.
    pub fn point_len(&self) -> usize {
        match self {
            Domain::Full(g) => g.n(),
            Domain::Prime(g) => g.ell(),
            Domain::Ball(d) => *d,
            Domain::Reinhardt(k) => k.len(),
        }
    }

    pub(crate) fn groups(&self) -> Option<Vec<Range<usize>>> {
        match self {
            Domain::Full(g) | Domain::Prime(g) => Some(g.groups()),
            Domain::Ball(d) => Some(vec![0..*d]),
            Domain::Reinhardt(_) => None,
        }
    }
}

#[derive(Debug, Clone, Copy)]
pub(crate) enum Op {
    Const(Complex64),
    Coord(usize),
    /// Squared norm of a coordinate range.
    Norm2(usize, usize),
    /// Euclidean norm of a coordinate range.
    Norm(usize, usize),
    /// Radius entry of a Reinhardt point.
    RadiusEntry(usize),
    /// `Σ r_j²` of a Reinhardt point.
    RadiusNorm2,
    Call(Func, usize),
    Neg(usize),
    Binary(BinOp, usize, usize),
    Pow(usize, u32),
}

/// An expression validated against a [`Domain`] and compiled for evaluation.
#[derive(Debug, Clone)]
pub struct BoundSymbol {
    expr: Arc<SymbolExpr>,
    domain: Domain,
    ops: Arc<Vec<Op>>,
    freeze: Option<f64>,
}

fn binding(e: &SymbolExpr, message: impl Into<String>) -> Error {
    Error::Binding { line: e.span.line, column: e.span.column, message: message.into() }
}

fn is_real(e: &SymbolExpr) -> bool {
    match &e.node {
        Node::Number(_) | Node::Radius(_) => true,
        Node::ImaginaryUnit | Node::Coord { .. } => false,
        Node::Call(Func::Re | Func::Im | Func::Abs2, _) => true,
        Node::Call(Func::Conj | Func::Sqrt, a) | Node::Neg(a) | Node::Pow(a, _) => is_real(a),
        Node::Binary(_, l, r) => is_real(l) && is_real(r),
    }
}

struct Compiler<'a> {
    domain: &'a Domain,
    ops: Vec<Op>,
}

impl Compiler<'_> {
    fn push(&mut self, op: Op) -> usize {
        self.ops.push(op);
        self.ops.len() - 1
    }

    fn coord(&self, e: &SymbolExpr, kind: CoordKind, index: u32) -> Result<usize> {
        let i = index as usize;
        let (len, offset, what) = match (self.domain, kind) {
            (Domain::Full(g), CoordKind::Z) => (g.n(), 0, "z"),
            (Domain::Full(g), CoordKind::Zc) => (g.complement_dim(), g.ell(), "zc"),
            (Domain::Prime(g), CoordKind::Z) => (g.ell(), 0, "z"),
            (Domain::Prime(_), CoordKind::Zc) => {
                return Err(binding(e, "zc coordinates are not available on the first factor"))
            }
            (Domain::Ball(d), CoordKind::Z) => (*d, 0, "z"),
            (Domain::Ball(d), CoordKind::Zc) => (*d, 0, "zc"),
            (Domain::Reinhardt(_), _) => {
                return Err(binding(e, "coordinates are not available on a radius profile; use r_j"))
            }
        };
        if i > len {
            return Err(binding(e, format!("{what}{i} is out of range: only {len} coordinates")));
        }
        Ok(offset + i - 1)
    }

    fn tuple_norm2(&mut self, e: &SymbolExpr, kind: CoordKind) -> Result<usize> {
        let range = match (self.domain, kind) {
            (Domain::Full(g), CoordKind::Z) => 0..g.n(),
            (Domain::Full(g), CoordKind::Zc) => g.ell()..g.n(),
            (Domain::Prime(g), CoordKind::Z) => 0..g.ell(),
            (Domain::Prime(_), CoordKind::Zc) => {
                return Err(binding(e, "zc is not available on the first factor"))
            }
            (Domain::Ball(d), _) => 0..*d,
            (Domain::Reinhardt(_), CoordKind::Z) => return Ok(self.push(Op::RadiusNorm2)),
            (Domain::Reinhardt(_), CoordKind::Zc) => {
                return Err(binding(e, "zc is not available on a radius profile"))
            }
        };
        Ok(self.push(Op::Norm2(range.start, range.end)))
    }

    fn compile(&mut self, e: &SymbolExpr) -> Result<usize> {
        let op = match &e.node {
            Node::Number(v) => Op::Const(Complex64::new(*v, 0.0)),
            Node::ImaginaryUnit => Op::Const(Complex64::i()),
            Node::Coord { kind, index: Some(i) } => Op::Coord(self.coord(e, *kind, *i)?),
            Node::Coord { index: None, .. } => {
                return Err(binding(e, "a bare tuple is only allowed inside abs2"))
            }
            Node::Radius(j) => {
                let j = *j as usize;
                match self.domain {
                    Domain::Reinhardt(k) => {
                        if j > k.len() {
                            return Err(binding(e, format!("r{j} is out of range: only {} groups", k.len())));
                        }
                        Op::RadiusEntry(j - 1)
                    }
                    domain => {
                        let groups = domain.groups().unwrap_or_default();
                        if let Domain::Ball(_) = domain {
                            if j != 1 {
                                return Err(binding(e, format!("r{j} needs a partition; only r1 = |z| is defined here")));
                            }
                        }
                        match groups.get(j - 1) {
                            Some(r) => Op::Norm(r.start, r.end),
                            None => {
                                return Err(binding(e, format!("r{j} is out of range: only {} groups", groups.len())))
                            }
                        }
                    }
                }
            }
            Node::Call(Func::Abs2, arg) if matches!(arg.node, Node::Coord { index: None, .. }) => {
                let Node::Coord { kind, .. } = arg.node else { unreachable!() };
                return self.tuple_norm2(arg, kind);
            }
            Node::Call(func, arg) => {
                if *func == Func::Sqrt && !is_real(arg) {
                    return Err(binding(e, "sqrt needs a real-valued argument"));
                }
                Op::Call(*func, self.compile(arg)?)
            }
            Node::Neg(a) => Op::Neg(self.compile(a)?),
            Node::Binary(op, l, r) => {
                let l = self.compile(l)?;
                let r = self.compile(r)?;
                Op::Binary(*op, l, r)
            }
            Node::Pow(a, k) => Op::Pow(self.compile(a)?, *k),
        };
        Ok(self.push(op))
    }
}

fn norm2(p: &[Complex64]) -> f64 {
    p.iter().map(|z| z.norm_sqr()).sum()
}

impl BoundSymbol {
    pub fn bind(expr: SymbolExpr, domain: Domain) -> Result<Self> {
        let mut c = Compiler { domain: &domain, ops: Vec::new() };
        c.compile(&expr)?;
        let ops = c.ops;
        Ok(Self { expr: Arc::new(expr), domain, ops: Arc::new(ops), freeze: None })
    }

    /// Parse and bind a plain expression.
    pub fn parse(text: &str, domain: Domain) -> Result<Self> {
        match parse_symbol(text)? {
            ParsedSymbol::Plain(e) => Self::bind(e, domain),
            ParsedSymbol::Product { .. } => Err(Error::Binding {
                line: 1,
                column: 1,
                message: "a product symbol needs the full ball".into(),
            }),
        }
    }

    pub fn constant(value: Complex64, domain: Domain) -> Self {
        let expr = if value.im == 0.0 {
            SymbolExpr::number(value.re)
        } else {
            SymbolExpr::new(
                Node::Binary(
                    BinOp::Add,
                    Box::new(SymbolExpr::number(value.re)),
                    Box::new(SymbolExpr::new(
                        Node::Binary(
                            BinOp::Mul,
                            Box::new(SymbolExpr::number(value.im)),
                            Box::new(SymbolExpr::new(Node::ImaginaryUnit, Default::default())),
                        ),
                        Default::default(),
                    )),
                ),
                Default::default(),
            )
        };
        Self::bind(expr, domain).expect("constants bind on every domain")
    }

    pub fn expr(&self) -> &SymbolExpr {
        &self.expr
    }

    pub(crate) fn ops(&self) -> &[Op] {
        &self.ops
    }

    pub fn domain(&self) -> &Domain {
        &self.domain
    }

    pub fn point_len(&self) -> usize {
        self.domain.point_len()
    }

    pub fn is_constant(&self) -> bool {
        self.expr.is_constant()
    }

    /// Radial freeze radius `s` of `c_s`, if any.
    pub fn freeze(&self) -> Option<f64> {
        self.freeze
    }

    /// `c_s(rζ) = c(min(r, s) ζ)`. Freezing twice keeps the smaller radius.
    pub fn frozen(&self, s: f64) -> Result<Self> {
        if !(s > 0.0 && s < 1.0) {
            return Err(Error::domain(format!("freeze radius must lie in (0, 1), got {s}")));
        }
        let mut out = self.clone();
        out.freeze = Some(self.freeze.map_or(s, |s0| s0.min(s)));
        Ok(out)
    }

    /// Evaluate at a point of the open ball (closed ball for frozen symbols).
    pub fn eval(&self, point: &[Complex64]) -> Result<Complex64> {
        if point.len() != self.point_len() {
            return Err(Error::domain(format!(
                "point has {} coordinates, symbol expects {}",
                point.len(),
                self.point_len()
            )));
        }
        if let Domain::Reinhardt(_) = self.domain {
            if point.iter().any(|r| r.im != 0.0 || r.re < 0.0) {
                return Err(Error::domain("radius profile points must be nonnegative reals"));
            }
        }
        let s2 = norm2(point);
        let inside = if self.freeze.is_some() { s2 <= 1.0 } else { s2 < 1.0 };
        if !inside || !s2.is_finite() {
            return Err(Error::domain(format!("point {point:?} lies outside the ball (|z|^2 = {s2})")));
        }
        Ok(self.eval_unchecked(point))
    }

    /// Evaluate without domain checks; `point` must have `point_len` entries.
    pub fn eval_unchecked(&self, point: &[Complex64]) -> Complex64 {
        if let Some(s) = self.freeze {
            let r = norm2(point).sqrt();
            if r > s {
                let scale = s / r;
                let mut buf = [Complex64::new(0.0, 0.0); 16];
                if point.len() <= buf.len() {
                    for (b, z) in buf.iter_mut().zip(point) {
                        *b = z * scale;
                    }
                    return self.run(&buf[..point.len()]);
                }
                let scaled: Vec<Complex64> = point.iter().map(|z| z * scale).collect();
                return self.run(&scaled);
            }
        }
        self.run(point)
    }

    fn run(&self, p: &[Complex64]) -> Complex64 {
        self.node(self.ops.len() - 1, p)
    }

    fn node(&self, i: usize, p: &[Complex64]) -> Complex64 {
        match self.ops[i] {
            Op::Const(c) => c,
            Op::Coord(j) => p[j],
            Op::Norm2(a, b) => Complex64::new(norm2(&p[a..b]), 0.0),
            Op::Norm(a, b) => Complex64::new(norm2(&p[a..b]).sqrt(), 0.0),
            Op::RadiusEntry(j) => Complex64::new(p[j].re, 0.0),
            Op::RadiusNorm2 => Complex64::new(p.iter().map(|r| r.re * r.re).sum(), 0.0),
            Op::Call(f, a) => {
                let v = self.node(a, p);
                match f {
                    Func::Re => Complex64::new(v.re, 0.0),
                    Func::Im => Complex64::new(v.im, 0.0),
                    Func::Conj => v.conj(),
                    Func::Abs2 => Complex64::new(v.norm_sqr(), 0.0),
                    Func::Sqrt => Complex64::new(v.re, 0.0).sqrt(),
                }
            }
            Op::Neg(a) => -self.node(a, p),
            Op::Binary(op, l, r) => {
                let (l, r) = (self.node(l, p), self.node(r, p));
                match op {
                    BinOp::Add => l + r,
                    BinOp::Sub => l - r,
                    BinOp::Mul => l * r,
                    BinOp::Div => l / r,
                }
            }
            Op::Pow(a, k) => self.node(a, p).powu(k),
        }
    }
}

impl fmt::Display for BoundSymbol {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.expr)
    }
}

/// `f_ac(z) = a(z' / sqrt(1 - |z''|²)) · c(z'')` on `B^n`.
#[derive(Debug, Clone)]
pub struct ProductSymbol {
    a: BoundSymbol,
    c: BoundSymbol,
    geometry: BallGeometry,
}

impl ProductSymbol {
    /// `a` must live on `B^ℓ` (or the radius base), `c` on `B^{n-ℓ}`.
    pub fn new(a: BoundSymbol, c: BoundSymbol, geometry: BallGeometry) -> Result<Self> {
        match a.domain() {
            Domain::Prime(g) if *g == geometry => {}
            other => {
                return Err(Error::domain(format!("factor a must be bound on the first factor of {geometry}, got {other:?}")))
            }
        }
        if *c.domain() != Domain::Ball(geometry.complement_dim()) {
            return Err(Error::domain(format!(
                "factor c must be bound on B^{}, got {:?}",
                geometry.complement_dim(),
                c.domain()
            )));
        }
        Ok(Self { a, c, geometry })
    }

    /// `c(z'')` on `B^n`: the product with `a = 1`.
    pub fn inner_only(c: BoundSymbol, geometry: BallGeometry) -> Result<Self> {
        let one = BoundSymbol::constant(Complex64::new(1.0, 0.0), Domain::Prime(geometry.clone()));
        Self::new(one, c, geometry)
    }

    /// `a(z' / sqrt(1 - |z''|²))` on `B^n`: the product with `c = 1`.
    pub fn outer_only(a: BoundSymbol, geometry: BallGeometry) -> Result<Self> {
        let one = BoundSymbol::constant(Complex64::new(1.0, 0.0), Domain::Ball(geometry.complement_dim()));
        Self::new(a, one, geometry)
    }

    pub fn a(&self) -> &BoundSymbol {
        &self.a
    }

    pub fn c(&self) -> &BoundSymbol {
        &self.c
    }

    pub fn geometry(&self) -> &BallGeometry {
        &self.geometry
    }

    pub fn eval(&self, point: &[Complex64]) -> Result<Complex64> {
        if point.len() != self.geometry.n() {
            return Err(Error::domain(format!(
                "point has {} coordinates, product symbol expects {}",
                point.len(),
                self.geometry.n()
            )));
        }
        let s2 = norm2(point);
        if !(s2 < 1.0) {
            return Err(Error::domain(format!("point {point:?} lies outside the ball (|z|^2 = {s2})")));
        }
        Ok(self.eval_unchecked(point))
    }

    pub fn eval_unchecked(&self, point: &[Complex64]) -> Complex64 {
        let ell = self.geometry.ell();
        let (zp, zpp) = point.split_at(ell);
        let scale = 1.0 / (1.0 - norm2(zpp)).sqrt();
        let mut buf = [Complex64::new(0.0, 0.0); 16];
        let av = if ell <= buf.len() {
            for (b, z) in buf.iter_mut().zip(zp) {
                *b = z * scale;
            }
            self.a.eval_unchecked(&buf[..ell])
        } else {
            let w: Vec<Complex64> = zp.iter().map(|z| z * scale).collect();
            self.a.eval_unchecked(&w)
        };
        av * self.c.eval_unchecked(zpp)
    }
}

impl fmt::Display for ProductSymbol {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "prod(a = {}, c = {})", self.a, self.c)
    }
}

/// A symbol on the full ball `B^n`: plain or of product form.
#[derive(Debug, Clone)]
pub enum Symbol {
    Plain(BoundSymbol),
    Product(ProductSymbol),
}

impl Symbol {
    /// Parse and bind on `B^n`; products bind `a` on `B^ℓ` and `c` on `B^{n-ℓ}`.
    pub fn parse(text: &str, geometry: &BallGeometry) -> Result<Self> {
        Self::from_parsed(parse_symbol(text)?, geometry)
    }

    pub fn from_parsed(parsed: ParsedSymbol, geometry: &BallGeometry) -> Result<Self> {
        Ok(match parsed {
            ParsedSymbol::Plain(e) => Symbol::Plain(BoundSymbol::bind(e, Domain::Full(geometry.clone()))?),
            ParsedSymbol::Product { a, c } => {
                let a = BoundSymbol::bind(a, Domain::Prime(geometry.clone()))?;
                let c = BoundSymbol::bind(c, Domain::Ball(geometry.complement_dim()))?;
                Symbol::Product(ProductSymbol::new(a, c, geometry.clone())?)
            }
        })
    }

    pub fn point_len(&self) -> usize {
        match self {
            Symbol::Plain(s) => s.point_len(),
            Symbol::Product(p) => p.geometry().n(),
        }
    }

    pub fn eval(&self, point: &[Complex64]) -> Result<Complex64> {
        match self {
            Symbol::Plain(s) => s.eval(point),
            Symbol::Product(p) => p.eval(point),
        }
    }

    pub fn eval_unchecked(&self, point: &[Complex64]) -> Complex64 {
        match self {
            Symbol::Plain(s) => s.eval_unchecked(point),
            Symbol::Product(p) => p.eval_unchecked(point),
        }
    }

    pub fn is_constant(&self) -> bool {
        match self {
            Symbol::Plain(s) => s.is_constant(),
            Symbol::Product(p) => p.a().is_constant() && p.c().is_constant(),
        }
    }
}

impl From<BoundSymbol> for Symbol {
    fn from(s: BoundSymbol) -> Self {
        Symbol::Plain(s)
    }
}

impl From<ProductSymbol> for Symbol {
    fn from(p: ProductSymbol) -> Self {
        Symbol::Product(p)
    }
}

impl fmt::Display for Symbol {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Symbol::Plain(s) => write!(f, "{s}"),
            Symbol::Product(p) => write!(f, "{p}"),
        }
    }
}
