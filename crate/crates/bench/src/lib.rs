//! Shared fixtures for the benchmarks.

use bergman_core::{BallGeometry, BoundSymbol, Domain, ProductSymbol, Result, Symbol};

/// Plain symbol on the `d`-ball.
pub fn ball_symbol(text: &str, d: usize) -> Result<Symbol> {
    Ok(Symbol::Plain(BoundSymbol::parse(text, Domain::Ball(d))?))
}

/// `prod(a, c)` on the geometry `(n, ell, k)`.
pub fn product_symbol(a: &str, c: &str, n: usize, ell: usize, k: Vec<usize>) -> Result<(Symbol, BallGeometry)> {
    let g = BallGeometry::new(n, ell, k)?;
    let a = BoundSymbol::parse(a, Domain::Prime(g.clone()))?;
    let c = BoundSymbol::parse(c, Domain::Ball(g.complement_dim()))?;
    Ok((Symbol::Product(ProductSymbol::new(a, c, g.clone())?), g))
}
