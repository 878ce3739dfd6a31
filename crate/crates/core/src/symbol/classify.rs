use std::collections::BTreeSet;

use super::ast::{BinOp, Func};
use super::bind::{BoundSymbol, Domain, Op, Symbol};

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum SymbolClass {
    General,
    /// Invariant under the torus acting by one phase per group of `z'`.
    TorusInvariant,
    /// Depends only on the group moduli `r_j` of the carried partition.
    QuasiRadial(Vec<usize>),
    /// Depends only on `|z|²` of the ball the symbol lives on.
    Radial,
    /// Depends only on `z''`.
    CzOnly,
    Product,
}

const MAX_CHARGES: usize = 4096;

/// Set of phase charges `q` such that the symbol is a sum of pieces
/// `f_q(e^{iθ} z) = e^{i q·θ} f_q(z)` under the coordinate torus.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ChargeSet {
    len: usize,
    set: BTreeSet<Vec<i32>>,
}

impl ChargeSet {
    fn zero(len: usize) -> Self {
        Self { len, set: BTreeSet::from([vec![0; len]]) }
    }

    fn unit(len: usize, j: usize) -> Self {
        let mut q = vec![0; len];
        q[j] = 1;
        Self { len, set: BTreeSet::from([q]) }
    }

    fn capped(self) -> Option<Self> {
        (self.set.len() <= MAX_CHARGES).then_some(self)
    }

    fn negated(&self) -> Self {
        Self { len: self.len, set: self.set.iter().map(|q| q.iter().map(|x| -x).collect()).collect() }
    }

    fn union(&self, other: &Self) -> Option<Self> {
        Self { len: self.len, set: self.set.union(&other.set).cloned().collect() }.capped()
    }

    fn sum(&self, other: &Self) -> Option<Self> {
        if self.set.len().saturating_mul(other.set.len()) > MAX_CHARGES * 16 {
            return None;
        }
        let mut set = BTreeSet::new();
        for a in &self.set {
            for b in &other.set {
                set.insert(a.iter().zip(b).map(|(x, y)| x + y).collect());
            }
        }
        Self { len: self.len, set }.capped()
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn iter(&self) -> impl Iterator<Item = &Vec<i32>> {
        self.set.iter()
    }

    pub fn count(&self) -> usize {
        self.set.len()
    }

    /// True when only the zero charge occurs (full torus invariance).
    pub fn is_trivial(&self) -> bool {
        self.set.len() == 1 && self.set.iter().all(|q| q.iter().all(|&x| x == 0))
    }

    pub fn contains(&self, q: &[i32]) -> bool {
        self.set.contains(q)
    }

    /// Largest `|q_j|` over all charges and coordinates.
    pub fn max_abs(&self) -> u32 {
        self.set.iter().flat_map(|q| q.iter().map(|x| x.unsigned_abs())).max().unwrap_or(0)
    }

    /// Concatenate charges of functions of disjoint coordinate blocks.
    pub fn concat(&self, other: &Self) -> Option<Self> {
        let mut set = BTreeSet::new();
        for a in &self.set {
            for b in &other.set {
                let mut q = a.clone();
                q.extend_from_slice(b);
                set.insert(q);
            }
        }
        Self { len: self.len + other.len, set }.capped()
    }
}

fn charges_of(ops: &[Op], i: usize, len: usize) -> Option<ChargeSet> {
    Some(match ops[i] {
        Op::Const(_) | Op::Norm2(..) | Op::Norm(..) | Op::RadiusEntry(_) | Op::RadiusNorm2 => {
            ChargeSet::zero(len)
        }
        Op::Coord(j) => ChargeSet::unit(len, j),
        Op::Call(f, a) => {
            let s = charges_of(ops, a, len)?;
            match f {
                Func::Re | Func::Im => s.union(&s.negated())?,
                Func::Conj => s.negated(),
                Func::Abs2 => s.sum(&s.negated())?,
                Func::Sqrt => {
                    if !s.is_trivial() {
                        return None;
                    }
                    s
                }
            }
        }
        Op::Neg(a) => charges_of(ops, a, len)?,
        Op::Binary(op, l, r) => {
            let (l, r) = (charges_of(ops, l, len)?, charges_of(ops, r, len)?);
            match op {
                BinOp::Add | BinOp::Sub => l.union(&r)?,
                BinOp::Mul => l.sum(&r)?,
                BinOp::Div => {
                    if !r.is_trivial() {
                        return None;
                    }
                    l
                }
            }
        }
        Op::Pow(a, k) => {
            let base = charges_of(ops, a, len)?;
            let mut acc = ChargeSet::zero(len);
            for _ in 0..k {
                acc = acc.sum(&base)?;
                if acc.is_trivial() {
                    break;
                }
            }
            acc
        }
    })
}

fn leaves_ok(ops: &[Op], ok: &dyn Fn(&Op) -> bool) -> bool {
    ops.iter().all(|op| match op {
        Op::Call(..) | Op::Neg(_) | Op::Binary(..) | Op::Pow(..) => true,
        leaf => ok(leaf),
    })
}

impl BoundSymbol {
    /// Charge support, or `None` when the analysis cannot bound it.
    pub fn charges(&self) -> Option<ChargeSet> {
        let len = match self.domain() {
            Domain::Reinhardt(_) => 0,
            d => d.point_len(),
        };
        charges_of(self.ops(), self.ops().len() - 1, len)
    }

    /// Syntactic classification relative to the symbol's domain. Sound: a
    /// `Radial`, `QuasiRadial`, `CzOnly` or `TorusInvariant` verdict implies the
    /// corresponding invariance; the converse need not hold.
    pub fn classify(&self) -> SymbolClass {
        let ops = self.ops();
        let len = self.point_len();
        let domain = self.domain();
        if let Domain::Reinhardt(k) = domain {
            return if k.len() == 1 { SymbolClass::Radial } else { SymbolClass::QuasiRadial(k.clone()) };
        }
        let radial = leaves_ok(ops, &|op| match *op {
            Op::Const(_) => true,
            Op::Norm2(a, b) | Op::Norm(a, b) => a == 0 && b == len,
            _ => false,
        });
        if radial {
            return SymbolClass::Radial;
        }
        if let Domain::Full(g) | Domain::Prime(g) = domain {
            let ell = g.ell();
            let quasi = leaves_ok(ops, &|op| match *op {
                Op::Const(_) | Op::Norm(..) => true,
                Op::Norm2(a, b) => a == 0 && b == ell,
                _ => false,
            });
            if quasi {
                return SymbolClass::QuasiRadial(g.partition().to_vec());
            }
            if let Domain::Full(_) = domain {
                let cz = leaves_ok(ops, &|op| match *op {
                    Op::Const(_) => true,
                    Op::Coord(j) => j >= ell,
                    Op::Norm2(a, _) => a >= ell,
                    _ => false,
                });
                if cz {
                    return SymbolClass::CzOnly;
                }
            }
        }
        let invariant = match self.charges() {
            None => false,
            Some(s) => match domain {
                Domain::Full(g) | Domain::Prime(g) => {
                    let groups = g.groups();
                    s.iter().all(|q| groups.iter().all(|r| q[r.clone()].iter().sum::<i32>() == 0))
                }
                _ => s.is_trivial(),
            },
        };
        if invariant {
            SymbolClass::TorusInvariant
        } else {
            SymbolClass::General
        }
    }
}

impl Symbol {
    pub fn classify(&self) -> SymbolClass {
        match self {
            Symbol::Plain(s) => s.classify(),
            Symbol::Product(_) => SymbolClass::Product,
        }
    }

    /// Charge support over all `n` coordinates.
    pub fn charges(&self) -> Option<ChargeSet> {
        match self {
            Symbol::Plain(s) => s.charges(),
            Symbol::Product(p) => p.a().charges()?.concat(&p.c().charges()?),
        }
    }

    /// Torus invariance in the sense of the level decomposition: every charge
    /// has zero sum over each group of `z'`.
    pub fn is_torus_invariant(&self) -> bool {
        let geometry = match self {
            Symbol::Plain(s) => match s.domain() {
                Domain::Full(g) | Domain::Prime(g) => g.clone(),
                _ => return false,
            },
            Symbol::Product(p) => p.geometry().clone(),
        };
        match self.charges() {
            None => false,
            Some(s) => {
                let groups = geometry.groups();
                s.iter().all(|q| groups.iter().all(|r| q[r.clone()].iter().sum::<i32>() == 0))
            }
        }
    }
}
