//! Text language for bounded symbols: parser, canonical printer, binding to a
//! ball, evaluation and syntactic classification.

mod ast;
mod bind;
mod classify;
mod parse;

pub use ast::{BinOp, CoordKind, Func, Node, ParsedSymbol, Span, SymbolExpr};
pub use bind::{BoundSymbol, Domain, ProductSymbol, Symbol};
pub use classify::{ChargeSet, SymbolClass};
pub use parse::{parse_expr, parse_symbol};

#[cfg(test)]
mod tests;
