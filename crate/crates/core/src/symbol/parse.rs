use super::ast::{BinOp, CoordKind, Func, Node, ParsedSymbol, Span, SymbolExpr};
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Number(f64),
    Ident(String),
    LParen,
    RParen,
    Plus,
    Minus,
    Star,
    Slash,
    Caret,
    Comma,
    Equals,
    End,
}

impl Tok {
    fn describe(&self) -> String {
        match self {
            Tok::Number(v) => format!("number {v}"),
            Tok::Ident(s) => format!("'{s}'"),
            Tok::LParen => "'('".into(),
            Tok::RParen => "')'".into(),
            Tok::Plus => "'+'".into(),
            Tok::Minus => "'-'".into(),
            Tok::Star => "'*'".into(),
            Tok::Slash => "'/'".into(),
            Tok::Caret => "'^'".into(),
            Tok::Comma => "','".into(),
            Tok::Equals => "'='".into(),
            Tok::End => "end of input".into(),
        }
    }
}

fn syntax(span: Span, message: impl Into<String>) -> Error {
    Error::Syntax { line: span.line, column: span.column, message: message.into() }
}

fn lex(text: &str) -> Result<Vec<(Tok, Span)>> {
    let chars: Vec<char> = text.chars().collect();
    let mut out = Vec::new();
    let (mut line, mut column) = (1, 1);
    let mut i = 0;
    while i < chars.len() {
        let c = chars[i];
        let span = Span { line, column };
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
                    i = j;
                    while i < chars.len() && chars[i].is_ascii_digit() {
                        i += 1;
                    }
                }
            }
            let literal: String = chars[start..i].iter().collect();
            let value: f64 = literal
                .parse()
                .map_err(|_| syntax(span, format!("malformed number '{literal}'")))?;
            if !value.is_finite() {
                return Err(syntax(span, format!("number '{literal}' is not finite")));
            }
            Tok::Number(value)
        } else if c.is_ascii_alphabetic() || c == '_' {
            while i < chars.len() && (chars[i].is_ascii_alphanumeric() || chars[i] == '_') {
                i += 1;
            }
            Tok::Ident(chars[start..i].iter().collect())
        } else {
            i += 1;
            match c {
                '(' => Tok::LParen,
                ')' => Tok::RParen,
                '+' => Tok::Plus,
                '-' => Tok::Minus,
                '*' => Tok::Star,
                '/' => Tok::Slash,
                '^' => Tok::Caret,
                ',' => Tok::Comma,
                '=' => Tok::Equals,
                other => return Err(syntax(span, format!("unexpected character '{other}'"))),
            }
        };
        column += i - start;
        out.push((tok, span));
    }
    out.push((Tok::End, Span { line, column }));
    Ok(out)
}

struct Parser {
    toks: Vec<(Tok, Span)>,
    pos: usize,
}

impl Parser {
    fn peek(&self) -> &Tok {
        &self.toks[self.pos].0
    }

    fn span(&self) -> Span {
        self.toks[self.pos].1
    }

    fn bump(&mut self) -> (Tok, Span) {
        let t = self.toks[self.pos].clone();
        if self.pos + 1 < self.toks.len() {
            self.pos += 1;
        }
        t
    }

    fn expect(&mut self, want: Tok) -> Result<Span> {
        let (tok, span) = self.bump();
        if tok == want {
            Ok(span)
        } else {
            Err(syntax(span, format!("expected {}, found {}", want.describe(), tok.describe())))
        }
    }

    fn expr(&mut self) -> Result<SymbolExpr> {
        let mut lhs = self.term()?;
        loop {
            let op = match self.peek() {
                Tok::Plus => BinOp::Add,
                Tok::Minus => BinOp::Sub,
                _ => return Ok(lhs),
            };
            let span = self.bump().1;
            let rhs = self.term()?;
            lhs = SymbolExpr::new(Node::Binary(op, Box::new(lhs), Box::new(rhs)), span);
        }
    }

    fn term(&mut self) -> Result<SymbolExpr> {
        let mut lhs = self.unary()?;
        loop {
            let op = match self.peek() {
                Tok::Star => BinOp::Mul,
                Tok::Slash => BinOp::Div,
                _ => return Ok(lhs),
            };
            let span = self.bump().1;
            let rhs = self.unary()?;
            lhs = SymbolExpr::new(Node::Binary(op, Box::new(lhs), Box::new(rhs)), span);
        }
    }

    fn unary(&mut self) -> Result<SymbolExpr> {
        if *self.peek() == Tok::Minus {
            let span = self.bump().1;
            let inner = self.unary()?;
            return Ok(SymbolExpr::new(Node::Neg(Box::new(inner)), span));
        }
        self.factor()
    }

    fn factor(&mut self) -> Result<SymbolExpr> {
        let base = self.atom()?;
        if *self.peek() != Tok::Caret {
            return Ok(base);
        }
        let span = self.bump().1;
        let (tok, exp_span) = self.bump();
        let k = match tok {
            Tok::Number(v) if v >= 0.0 && v.fract() == 0.0 && v <= u32::MAX as f64 => v as u32,
            other => {
                return Err(syntax(
                    exp_span,
                    format!("exponent must be a nonnegative integer, found {}", other.describe()),
                ))
            }
        };
        Ok(SymbolExpr::new(Node::Pow(Box::new(base), k), span))
    }

    fn atom(&mut self) -> Result<SymbolExpr> {
        let (tok, span) = self.bump();
        match tok {
            Tok::Number(v) => Ok(SymbolExpr::new(Node::Number(v), span)),
            Tok::LParen => {
                let e = self.expr()?;
                self.expect(Tok::RParen)?;
                Ok(e)
            }
            Tok::Ident(name) => self.ident(name, span),
            other => Err(syntax(span, format!("expected an operand, found {}", other.describe()))),
        }
    }

    fn ident(&mut self, name: String, span: Span) -> Result<SymbolExpr> {
        if let Some(func) = Func::from_name(&name) {
            self.expect(Tok::LParen)?;
            let arg = self.expr()?;
            self.expect(Tok::RParen)?;
            return Ok(SymbolExpr::new(Node::Call(func, Box::new(arg)), span));
        }
        if name == "i" {
            return Ok(SymbolExpr::new(Node::ImaginaryUnit, span));
        }
        if name == "prod" {
            return Err(syntax(span, "prod(...) is only allowed as the whole symbol"));
        }
        let index = |digits: &str| -> Result<u32> {
            match digits.parse::<u32>() {
                Ok(0) => Err(syntax(span, format!("indices start at 1 in '{name}'"))),
                Ok(v) => Ok(v),
                Err(_) => Err(syntax(span, format!("unknown identifier '{name}'"))),
            }
        };
        let node = if name == "z" {
            Node::Coord { kind: CoordKind::Z, index: None }
        } else if name == "zc" {
            Node::Coord { kind: CoordKind::Zc, index: None }
        } else if let Some(rest) = name.strip_prefix("zc") {
            Node::Coord { kind: CoordKind::Zc, index: Some(index(rest)?) }
        } else if let Some(rest) = name.strip_prefix('z') {
            Node::Coord { kind: CoordKind::Z, index: Some(index(rest)?) }
        } else if let Some(rest) = name.strip_prefix('r') {
            Node::Radius(index(rest)?)
        } else {
            return Err(syntax(span, format!("unknown identifier '{name}'")));
        };
        Ok(SymbolExpr::new(node, span))
    }

    fn product(&mut self) -> Result<ParsedSymbol> {
        self.expect(Tok::LParen)?;
        let a = self.named_arg("a")?;
        self.expect(Tok::Comma)?;
        let c = self.named_arg("c")?;
        self.expect(Tok::RParen)?;
        Ok(ParsedSymbol::Product { a, c })
    }

    fn named_arg(&mut self, want: &str) -> Result<SymbolExpr> {
        let (tok, span) = self.bump();
        match tok {
            Tok::Ident(name) if name == want => {}
            other => return Err(syntax(span, format!("expected '{want} =', found {}", other.describe()))),
        }
        self.expect(Tok::Equals)?;
        self.expr()
    }
}

/// A bare tuple `z` / `zc` may only appear as the direct argument of `abs2`.
fn check_bare_tuples(e: &SymbolExpr) -> Result<()> {
    match &e.node {
        Node::Coord { index: None, .. } => {
            Err(syntax(e.span, format!("bare '{e}' is only allowed as abs2({e})")))
        }
        Node::Call(Func::Abs2, arg) if matches!(arg.node, Node::Coord { index: None, .. }) => Ok(()),
        Node::Call(_, a) | Node::Neg(a) | Node::Pow(a, _) => check_bare_tuples(a),
        Node::Binary(_, l, r) => {
            check_bare_tuples(l)?;
            check_bare_tuples(r)
        }
        _ => Ok(()),
    }
}

/// Parse symbol text into an unbound tree.
pub fn parse_symbol(text: &str) -> Result<ParsedSymbol> {
    let mut p = Parser { toks: lex(text)?, pos: 0 };
    if *p.peek() == Tok::End {
        return Err(syntax(p.span(), "empty symbol"));
    }
    let is_product = matches!(p.peek(), Tok::Ident(s) if s == "prod")
        && matches!(p.toks.get(1), Some((Tok::LParen, _)));
    let parsed = if is_product {
        p.bump();
        p.product()?
    } else {
        ParsedSymbol::Plain(p.expr()?)
    };
    if *p.peek() != Tok::End {
        return Err(syntax(p.span(), format!("unexpected {}", p.peek().describe())));
    }
    match &parsed {
        ParsedSymbol::Plain(e) => check_bare_tuples(e)?,
        ParsedSymbol::Product { a, c } => {
            check_bare_tuples(a)?;
            check_bare_tuples(c)?;
        }
    }
    Ok(parsed)
}

/// Parse text that must be a plain expression.
pub fn parse_expr(text: &str) -> Result<SymbolExpr> {
    match parse_symbol(text)? {
        ParsedSymbol::Plain(e) => Ok(e),
        ParsedSymbol::Product { .. } => Err(Error::Syntax {
            line: 1,
            column: 1,
            message: "a product symbol is not allowed here".into(),
        }),
    }
}
