//! Truncated Toeplitz matrices, quasi-radial eigenvalue sequences, radial
//! eigenvalues and semicommutators.

use std::fmt;

use nalgebra::DMatrix;
use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::geometry::{enumerate_basis, level_unchecked, Level, TruncatedBasis};
use crate::linalg::{self, CMatrix};
use crate::quadrature::{gauss_jacobi_rule, moment_matrix, DirichletRule, QuadratureSpec};
use crate::symbol::{BinOp, BoundSymbol, Domain, Node, ProductSymbol, Symbol, SymbolClass, SymbolExpr};

/// Default Gauss–Jacobi order for one-dimensional radial moments.
pub const RADIAL_ORDER: usize = 48;
/// Default order per stick-breaking level for quasi-radial moments.
pub const GAMMA_ORDER: usize = 24;

/// A profile on the radius base `τ(B^m)`.
pub trait Profile: Sync {
    fn groups(&self) -> usize;

    fn at(&self, radii: &[f64]) -> Complex64;

    /// The value when the profile is known to be constant.
    fn constant(&self) -> Option<Complex64> {
        None
    }
}

/// A radial or quasi-radial symbol read as a function of the group radii.
#[derive(Debug, Clone)]
pub struct SymbolProfile {
    symbol: BoundSymbol,
    /// First coordinate of each group; radii are placed there.
    slots: Vec<usize>,
    constant: Option<Complex64>,
}

impl SymbolProfile {
    pub fn new(symbol: &BoundSymbol) -> Result<Self> {
        let class = symbol.classify();
        let slots = match (symbol.domain(), &class) {
            (Domain::Reinhardt(k), _) => (0..k.len()).collect(),
            (Domain::Prime(g) | Domain::Full(g), SymbolClass::QuasiRadial(_)) => {
                g.groups().iter().map(|r| r.start).collect()
            }
            (_, SymbolClass::Radial) => vec![0],
            _ => {
                return Err(Error::domain(format!(
                    "'{symbol}' is classified {class:?}; a radial or quasi-radial profile is required"
                )))
            }
        };
        let constant = symbol.is_constant().then(|| symbol.eval_unchecked(&vec![Complex64::new(0.0, 0.0); symbol.point_len()]));
        Ok(Self { symbol: symbol.clone(), slots, constant })
    }
}

impl Profile for SymbolProfile {
    fn groups(&self) -> usize {
        self.slots.len()
    }

    fn at(&self, radii: &[f64]) -> Complex64 {
        let mut p = [Complex64::new(0.0, 0.0); 16];
        let len = self.symbol.point_len();
        let mut owned;
        let point: &mut [Complex64] = if len <= p.len() {
            &mut p[..len]
        } else {
            owned = vec![Complex64::new(0.0, 0.0); len];
            &mut owned
        };
        for (&slot, &r) in self.slots.iter().zip(radii) {
            point[slot] = Complex64::new(r, 0.0);
        }
        self.symbol.eval_unchecked(point)
    }

    fn constant(&self) -> Option<Complex64> {
        self.constant
    }
}

/// Tabulated single-radius profile `a(r)`, `r ∈ [0, 1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct TabulatedProfile {
    radii: Vec<f64>,
    values: Vec<f64>,
    step: bool,
}

impl TabulatedProfile {
    /// Piecewise-linear (or, with `step`, right-continuous piecewise-constant)
    /// interpolation through `(radii[i], values[i])`; constant beyond the ends.
    pub fn new(radii: Vec<f64>, values: Vec<f64>, step: bool) -> Result<Self> {
        if radii.is_empty() || radii.len() != values.len() {
            return Err(Error::domain("a tabulated profile needs matching, nonempty radius and value lists"));
        }
        if radii.windows(2).any(|w| !(w[0] < w[1])) || radii[0] < 0.0 || radii[radii.len() - 1] > 1.0 {
            return Err(Error::domain("profile radii must increase strictly within [0, 1]"));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::domain("profile values must be finite"));
        }
        Ok(Self { radii, values, step })
    }

    /// Parse lines of `r,value` (a header line and `#` comments are skipped).
    pub fn from_csv(text: &str, step: bool) -> Result<Self> {
        let mut radii = Vec::new();
        let mut values = Vec::new();
        for (lineno, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let mut parts = line.split(',').map(str::trim);
            let (r, v) = (parts.next(), parts.next());
            match (r.and_then(|x| x.parse::<f64>().ok()), v.and_then(|x| x.parse::<f64>().ok())) {
                (Some(r), Some(v)) => {
                    radii.push(r);
                    values.push(v);
                }
                _ if lineno == 0 => continue,
                _ => return Err(Error::config(format!("profile line {}: expected 'r,value'", lineno + 1))),
            }
        }
        Self::new(radii, values, step)
    }

    pub fn value(&self, r: f64) -> f64 {
        let i = self.radii.partition_point(|&x| x <= r);
        if i == 0 {
            return self.values[0];
        }
        if i == self.radii.len() {
            return self.values[i - 1];
        }
        if self.step {
            return self.values[i - 1];
        }
        let (r0, r1) = (self.radii[i - 1], self.radii[i]);
        let w = (r - r0) / (r1 - r0);
        self.values[i - 1] * (1.0 - w) + self.values[i] * w
    }
}

impl Profile for TabulatedProfile {
    fn groups(&self) -> usize {
        1
    }

    fn at(&self, radii: &[f64]) -> Complex64 {
        Complex64::new(self.value(radii[0]), 0.0)
    }
}

/// `λ_m(a) = (1/B(m+d, μ+1)) ∫₀¹ a(t) (1-t)^μ t^{m+d-1} dt` with `t = |z|²`.
pub fn radial_eigenvalue(a: &dyn Profile, d: usize, mu: f64, m: u32, order: usize) -> Result<Complex64> {
    if !(mu > -1.0) {
        return Err(Error::domain(format!("weight must exceed -1, got {mu}")));
    }
    if d == 0 {
        return Err(Error::domain("ball dimension must be positive"));
    }
    if let Some(c) = a.constant() {
        return Ok(c);
    }
    let rule = gauss_jacobi_rule(order, mu, (m as usize + d) as f64 - 1.0)?.normalized();
    Ok(rule.nodes.iter().zip(&rule.weights).map(|(&t, &w)| a.at(&[t.sqrt()]) * w).sum())
}

/// `γ_{a,k,λ}(ρ)`: the eigenvalue of `T_a` on `𝓗_ρ ⊂ A²_λ(B^ℓ)`, computed as the
/// expectation of `a(√s_1, ..., √s_m)` under `Dirichlet(ρ_j + k_j, ..., λ+1)`.
pub fn gamma_quasi_radial(a: &dyn Profile, k: &[usize], lambda: f64, level: &Level, order: usize) -> Result<Complex64> {
    if !(lambda > -1.0) {
        return Err(Error::domain(format!("weight must exceed -1, got {lambda}")));
    }
    if level.rho().len() != k.len() || a.groups() != k.len() {
        return Err(Error::domain(format!(
            "level {level}, partition {k:?} and profile with {} radii do not match",
            a.groups()
        )));
    }
    if let Some(c) = a.constant() {
        return Ok(c);
    }
    let mut params: Vec<f64> = level.rho().iter().zip(k).map(|(&r, &kj)| r as f64 + kj as f64).collect();
    params.push(lambda + 1.0);
    let rule = DirichletRule::new(&params, order)?;
    let mut radii = vec![0.0; k.len()];
    let mut acc = Complex64::new(0.0, 0.0);
    for i in 0..rule.len() {
        let (s, w) = rule.node(i);
        for (r, &sj) in radii.iter_mut().zip(s) {
            *r = sj.sqrt();
        }
        acc += a.at(&radii) * w;
    }
    Ok(acc)
}

/// `ρ ↦ γ(ρ)` over all levels with `|ρ| <= R`.
#[derive(Debug, Clone)]
pub struct GammaSequence {
    pub k: Vec<usize>,
    pub lambda: f64,
    pub values: Vec<(Level, Complex64)>,
}

impl GammaSequence {
    pub fn compute(a: &dyn Profile, k: &[usize], lambda: f64, max_total: u32, order: usize) -> Result<Self> {
        let levels = Level::up_to(k.len(), max_total);
        let values = levels
            .par_iter()
            .map(|l| gamma_quasi_radial(a, k, lambda, l, order).map(|g| (l.clone(), g)))
            .collect::<Result<Vec<_>>>()?;
        Ok(Self { k: k.to_vec(), lambda, values })
    }

    pub fn get(&self, level: &Level) -> Option<Complex64> {
        self.values.iter().find(|(l, _)| l == level).map(|(_, g)| *g)
    }

    /// `sup |γ(ρ) - γ(ρ')|` over neighbouring levels (one step in one entry)
    /// with `|ρ| >= from`: a descriptive slow-oscillation measure.
    pub fn oscillation(&self, from: u32) -> f64 {
        let mut worst: f64 = 0.0;
        for (l, g) in &self.values {
            if l.total() < from {
                continue;
            }
            for j in 0..l.rho().len() {
                let mut up = l.rho().to_vec();
                up[j] += 1;
                if let Some(h) = self.get(&Level::new(up)) {
                    worst = worst.max((g - h).norm());
                }
            }
        }
        worst
    }
}

/// How much the engine may shortcut.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Assembly {
    /// Constant, radial and quasi-radial closed forms, plus structural zeros.
    Auto,
    /// Every entry by quadrature, no shortcuts.
    Quadrature,
}

/// Truncated Toeplitz matrix: entry `(β, α) = ⟨T e_α, e_β⟩` on a monomial basis.
#[derive(Debug, Clone)]
pub struct OperatorMatrix {
    pub basis: TruncatedBasis,
    pub entries: CMatrix,
    /// Per-entry standard errors when assembled by Monte Carlo.
    pub std_errors: Option<DMatrix<f64>>,
}

impl OperatorMatrix {
    pub fn new(basis: TruncatedBasis, entries: CMatrix) -> Result<Self> {
        if entries.shape() != (basis.len(), basis.len()) {
            return Err(Error::domain(format!(
                "matrix of shape {:?} does not match basis of size {}",
                entries.shape(),
                basis.len()
            )));
        }
        Ok(Self { basis, entries, std_errors: None })
    }

    pub fn identity(basis: TruncatedBasis) -> Self {
        let n = basis.len();
        Self { basis, entries: CMatrix::identity(n, n), std_errors: None }
    }

    pub fn len(&self) -> usize {
        self.basis.len()
    }

    pub fn is_empty(&self) -> bool {
        self.basis.is_empty()
    }

    pub fn norm(&self) -> f64 {
        linalg::operator_norm(&self.entries)
    }

    /// Compression to the leading basis block of degree `<= cutoff`.
    pub fn compress(&self, cutoff: u32) -> Result<Self> {
        if cutoff > self.basis.cutoff() {
            return Err(Error::domain(format!("cannot compress degree {} to {cutoff}", self.basis.cutoff())));
        }
        let basis = enumerate_basis(self.basis.dim(), cutoff, self.basis.lambda())?;
        let n = basis.len();
        let entries = self.entries.view((0, 0), (n, n)).into_owned();
        let std_errors = self.std_errors.as_ref().map(|e| e.view((0, 0), (n, n)).into_owned());
        Ok(Self { basis, entries, std_errors })
    }

    pub fn mul(&self, other: &Self) -> Result<Self> {
        self.check_same(other)?;
        Ok(Self { basis: self.basis.clone(), entries: &self.entries * &other.entries, std_errors: None })
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.check_same(other)?;
        Ok(Self { basis: self.basis.clone(), entries: &self.entries - &other.entries, std_errors: None })
    }

    fn check_same(&self, other: &Self) -> Result<()> {
        if !self.basis.same_as(&other.basis) {
            return Err(Error::domain("operator matrices live on different truncated bases"));
        }
        Ok(())
    }
}

impl fmt::Display for OperatorMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{}x{} matrix on B^{} (cutoff {}, weight {})",
            self.len(),
            self.len(),
            self.basis.dim(),
            self.basis.cutoff(),
            self.basis.lambda()
        )
    }
}

fn diagonal_from(basis: TruncatedBasis, values: Vec<Complex64>) -> OperatorMatrix {
    let entries = linalg::diagonal(&values);
    OperatorMatrix { basis, entries, std_errors: None }
}

/// Assemble `P_D T_f P_D` on `A²_λ(B^d)`, `d = basis.dim()`, `λ = basis.lambda()`.
pub fn toeplitz_matrix(f: &Symbol, basis: &TruncatedBasis, spec: &QuadratureSpec, mode: Assembly) -> Result<OperatorMatrix> {
    if f.point_len() != basis.dim() {
        return Err(Error::domain(format!(
            "symbol '{f}' lives in dimension {}, basis in dimension {}",
            f.point_len(),
            basis.dim()
        )));
    }
    if let Symbol::Plain(s) = f {
        if let Domain::Reinhardt(_) = s.domain() {
            return Err(Error::domain("a radius profile has no Toeplitz matrix; bind it on a ball"));
        }
    }
    if mode == Assembly::Auto {
        if let Some(m) = fast_path(f, basis)? {
            return Ok(m);
        }
    }
    let mm = moment_matrix(f, basis, spec, mode == Assembly::Auto)?;
    Ok(OperatorMatrix { basis: basis.clone(), entries: mm.values, std_errors: mm.std_errors })
}

fn fast_path(f: &Symbol, basis: &TruncatedBasis) -> Result<Option<OperatorMatrix>> {
    let s = match f {
        Symbol::Plain(s) => s,
        Symbol::Product(p) => return product_fast_path(p, basis),
    };
    let n = basis.len();
    if s.is_constant() && s.freeze().is_none() {
        let c = s.eval_unchecked(&vec![Complex64::new(0.0, 0.0); s.point_len()]);
        return Ok(Some(diagonal_from(basis.clone(), vec![c; n])));
    }
    match (s.domain(), s.classify()) {
        (_, SymbolClass::Radial) => {
            let profile = SymbolProfile::new(s)?;
            let by_degree = (0..=basis.cutoff())
                .into_par_iter()
                .map(|m| radial_eigenvalue(&profile, basis.dim(), basis.lambda(), m, RADIAL_ORDER))
                .collect::<Result<Vec<_>>>()?;
            let values = basis.indices().iter().map(|a| by_degree[a.degree() as usize]).collect();
            Ok(Some(diagonal_from(basis.clone(), values)))
        }
        (Domain::Prime(_), SymbolClass::QuasiRadial(k)) => {
            let profile = SymbolProfile::new(s)?;
            let seq = GammaSequence::compute(&profile, &k, basis.lambda(), basis.cutoff(), GAMMA_ORDER)?;
            let values = basis
                .indices()
                .iter()
                .map(|a| seq.get(&level_unchecked(a.entries(), &k)).expect("level within cutoff"))
                .collect();
            Ok(Some(diagonal_from(basis.clone(), values)))
        }
        _ => Ok(None),
    }
}

/// `f_ac` with quasi-radial `a` and constant `c` acts as `γ(ρ) c` on each `H_ρ`.
fn product_fast_path(p: &ProductSymbol, basis: &TruncatedBasis) -> Result<Option<OperatorMatrix>> {
    let (a, c) = (p.a(), p.c());
    if !c.is_constant() || c.freeze().is_some() {
        return Ok(None);
    }
    let k = match a.classify() {
        SymbolClass::QuasiRadial(k) => k,
        SymbolClass::Radial if p.geometry().partition().len() == 1 => p.geometry().partition().to_vec(),
        _ => return Ok(None),
    };
    let cv = c.eval_unchecked(&vec![Complex64::new(0.0, 0.0); c.point_len()]);
    let profile = SymbolProfile::new(a)?;
    let seq = GammaSequence::compute(&profile, &k, basis.lambda(), basis.cutoff(), GAMMA_ORDER)?;
    let values = basis
        .indices()
        .iter()
        .map(|al| seq.get(&level_unchecked(al.entries(), &k)).expect("level within cutoff") * cv)
        .collect();
    Ok(Some(diagonal_from(basis.clone(), values)))
}

/// The symbol `c1 · c2` on the common domain.
pub fn product_symbol(c1: &BoundSymbol, c2: &BoundSymbol) -> Result<BoundSymbol> {
    if c1.domain() != c2.domain() {
        return Err(Error::domain("symbols must live on the same ball to be multiplied"));
    }
    if c1.freeze().is_some() || c2.freeze().is_some() {
        return Err(Error::domain("products of radially frozen symbols are not supported"));
    }
    let expr = SymbolExpr::new(
        Node::Binary(BinOp::Mul, Box::new(c1.expr().clone()), Box::new(c2.expr().clone())),
        Default::default(),
    );
    BoundSymbol::bind(expr, c1.domain().clone())
}

/// Largest degree raise `max Σ_j q_j` over the charges of `c`, if bounded.
fn degree_raise(c: &BoundSymbol) -> Option<u32> {
    c.charges().map(|s| s.iter().map(|q| q.iter().sum::<i32>().max(0) as u32).max().unwrap_or(0))
}

/// Padding used when the degree raise of a symbol cannot be bounded.
pub const SEMICOMMUTATOR_PAD: u32 = 8;

/// `P_D (T_{c1} T_{c2} - T_{c1 c2}) P_D`. The product is formed at a cutoff
/// padded by the degree raise of `c2`, so the compression is exact for
/// symbols with bounded charges.
pub fn semicommutator(c1: &BoundSymbol, c2: &BoundSymbol, basis: &TruncatedBasis, spec: &QuadratureSpec) -> Result<OperatorMatrix> {
    let pad = degree_raise(c2).unwrap_or(SEMICOMMUTATOR_PAD);
    let padded = enumerate_basis(basis.dim(), basis.cutoff() + pad, basis.lambda())?;
    let mut padded_spec = spec.clone();
    if padded_spec.radial_order < spec.radial_order + pad as usize {
        padded_spec.radial_order += pad as usize;
        padded_spec.angular_order += pad as usize;
    }
    let t1 = toeplitz_matrix(&Symbol::Plain(c1.clone()), &padded, &padded_spec, Assembly::Auto)?;
    let t2 = toeplitz_matrix(&Symbol::Plain(c2.clone()), &padded, &padded_spec, Assembly::Auto)?;
    let t12 = toeplitz_matrix(&Symbol::Plain(product_symbol(c1, c2)?), &padded, &padded_spec, Assembly::Auto)?;
    t1.mul(&t2)?.sub(&t12)?.compress(basis.cutoff())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::BallGeometry;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    fn ball(d: usize, text: &str) -> BoundSymbol {
        BoundSymbol::parse(text, Domain::Ball(d)).unwrap()
    }

    fn reinhardt(k: &[usize], text: &str) -> SymbolProfile {
        SymbolProfile::new(&BoundSymbol::parse(text, Domain::Reinhardt(k.to_vec())).unwrap()).unwrap()
    }

    #[test]
    fn constant_symbol_gives_identity() {
        let basis = enumerate_basis(2, 3, 0.5).unwrap();
        let m = toeplitz_matrix(&ball(2, "1").into(), &basis, &QuadratureSpec::default(), Assembly::Auto).unwrap();
        assert_eq!(m.entries, CMatrix::identity(basis.len(), basis.len()));
    }

    #[test]
    fn radial_diagonal_closed_form() {
        let basis = enumerate_basis(1, 8, 0.0).unwrap();
        let m = toeplitz_matrix(&ball(1, "1 - abs2(z)").into(), &basis, &QuadratureSpec::default(), Assembly::Auto).unwrap();
        for i in 0..basis.len() {
            assert_relative_eq!(m.entries[(i, i)].re, 1.0 / (i as f64 + 2.0), max_relative = 1e-13);
            for j in 0..basis.len() {
                if i != j {
                    assert_eq!(m.entries[(i, j)], Complex64::new(0.0, 0.0));
                }
            }
        }
    }

    #[test]
    fn radial_eigenvalue_examples() {
        for (d, mu, m) in [(1, 0.0, 0), (2, 3.5, 4), (3, 1.0, 7)] {
            let (df, mf) = (d as f64, m as f64);
            let prof_a = SymbolProfile::new(&ball(d, "1 - abs2(z)")).unwrap();
            let prof_b = SymbolProfile::new(&ball(d, "abs2(z)")).unwrap();
            assert_relative_eq!(radial_eigenvalue(&prof_a, d, mu, m, 8).unwrap().re, (mu + 1.0) / (mf + df + mu + 1.0), max_relative = 1e-13);
            assert_relative_eq!(radial_eigenvalue(&prof_b, d, mu, m, 8).unwrap().re, (mf + df) / (mf + df + mu + 1.0), max_relative = 1e-13);
        }
        let one = SymbolProfile::new(&ball(1, "1")).unwrap();
        assert_eq!(radial_eigenvalue(&one, 1, 0.0, 5, 4).unwrap(), Complex64::new(1.0, 0.0));
    }

    #[test]
    fn gamma_examples() {
        let one = reinhardt(&[1, 1], "1");
        assert_eq!(gamma_quasi_radial(&one, &[1, 1], 0.5, &Level::new(vec![3, 2]), 4).unwrap(), Complex64::new(1.0, 0.0));
        for ell in [1usize, 2] {
            for lambda in [0.0, 0.5, 2.0] {
                let a = reinhardt(&[ell], "r1^2");
                for rho in 0..=10u32 {
                    let g = gamma_quasi_radial(&a, &[ell], lambda, &Level::new(vec![rho]), GAMMA_ORDER).unwrap();
                    let want = (rho as f64 + ell as f64) / (rho as f64 + ell as f64 + lambda + 1.0);
                    assert!((g.re - want).abs() < 1e-12, "ℓ={ell} λ={lambda} ρ={rho}: {g} vs {want}");
                }
            }
        }
        let a = reinhardt(&[1], "1 - abs2(z)");
        for lambda in [0.0, 1.5] {
            for rho in 0..6u32 {
                let g = gamma_quasi_radial(&a, &[1], lambda, &Level::new(vec![rho]), GAMMA_ORDER).unwrap();
                assert_relative_eq!(g.re, (lambda + 1.0) / (rho as f64 + lambda + 2.0), max_relative = 1e-12);
            }
        }
    }

    #[test]
    fn gamma_matches_full_quadrature_on_prime_ball() {
        // Fast path (diag γ) against dense quadrature on B^ℓ.
        let g = BallGeometry::new(4, 3, vec![2, 1]).unwrap();
        // Odd powers of a radius are not polynomial in r², so both rules converge algebraically.
        for (text, tol) in [("r1^2 * r2^2", 1e-8), ("1 - r1^2 + r2^4", 1e-8), ("abs2(z) * r1^2", 1e-8), ("r1^2 * r2", 1e-3)] {
            let s: Symbol = BoundSymbol::parse(text, Domain::Prime(g.clone())).unwrap().into();
            for d_cut in [3u32, 5] {
                let basis = enumerate_basis(3, d_cut, 0.5).unwrap();
                let spec = QuadratureSpec::for_cutoff(d_cut);
                let fast = toeplitz_matrix(&s, &basis, &spec, Assembly::Auto).unwrap();
                let slow = toeplitz_matrix(&s, &basis, &spec, Assembly::Quadrature).unwrap();
                let e = linalg::max_abs_diff(&fast.entries, &slow.entries); assert!(e < tol, "{text}: {e}");
            }
        }
        let s: Symbol = ball(2, "(1 - abs2(z))^2 + abs2(z)").into();
        let basis = enumerate_basis(2, 6, 1.0).unwrap();
        let spec = QuadratureSpec::for_cutoff(6);
        let fast = toeplitz_matrix(&s, &basis, &spec, Assembly::Auto).unwrap();
        let slow = toeplitz_matrix(&s, &basis, &spec, Assembly::Quadrature).unwrap();
        assert!(linalg::max_abs_diff(&fast.entries, &slow.entries) < 1e-8);
    }

    #[test]
    fn product_with_constant_inner_factor_is_diagonal() {
        let g = BallGeometry::new(2, 1, vec![1]).unwrap();
        let f = Symbol::parse("prod(a = r1^2, c = 2)", &g).unwrap();
        let basis = enumerate_basis(2, 4, 0.0).unwrap();
        let fast = toeplitz_matrix(&f, &basis, &QuadratureSpec::default(), Assembly::Auto).unwrap();
        let mut spec = QuadratureSpec::for_cutoff(4);
        spec.radial_order = 48;
        spec.angular_order = 48;
        let slow = toeplitz_matrix(&f, &basis, &spec, Assembly::Quadrature).unwrap();
        let e = linalg::max_abs_diff(&fast.entries, &slow.entries);
        assert!(e < 1e-6, "{e}");
        for (i, a) in basis.indices().iter().enumerate() {
            let rho = a.entries()[0] as f64;
            assert_relative_eq!(fast.entries[(i, i)].re, 2.0 * (rho + 1.0) / (rho + 2.0), epsilon = 1e-12);
        }
    }

    #[test]
    fn tabulated_profiles() {
        let p = TabulatedProfile::from_csv("r,value\n0,1\n0.5,0\n1,0\n", false).unwrap();
        assert_relative_eq!(p.value(0.25), 0.5);
        assert_eq!(p.value(0.9), 0.0);
        let step = TabulatedProfile::new(vec![0.0, 0.5], vec![1.0, 0.0], true).unwrap();
        assert_eq!(step.value(0.49), 1.0);
        assert_eq!(step.value(0.5), 0.0);
        // γ of the indicator of r < 1/2 on the disk: P(s < 1/4) under Beta(ρ+1, 1) = 4^{-(ρ+1)}.
        let g = gamma_quasi_radial(&step, &[1], 0.0, &Level::new(vec![0]), 200).unwrap();
        assert!((g.re - 0.25).abs() < 0.01);
        assert!(TabulatedProfile::new(vec![0.5, 0.2], vec![1.0, 0.0], false).is_err());
    }

    #[test]
    fn operator_norm_examples() {
        for (d, mu) in [(1usize, 0.0), (2, 2.0), (3, 0.5)] {
            let basis = enumerate_basis(d, 6, mu).unwrap();
            let m = toeplitz_matrix(&ball(d, "1 - abs2(z)").into(), &basis, &QuadratureSpec::default(), Assembly::Auto).unwrap();
            assert_relative_eq!(m.norm(), (mu + 1.0) / (d as f64 + mu + 1.0), max_relative = 1e-12);
        }
    }

    #[test]
    fn semicommutator_examples() {
        let basis = enumerate_basis(1, 6, 0.0).unwrap();
        let spec = QuadratureSpec::for_cutoff(6);
        let c = ball(1, "1 - abs2(z)");
        let s = semicommutator(&c, &c, &basis, &spec).unwrap();
        assert!((s.entries[(0, 0)].re + 1.0 / 12.0).abs() < 1e-12);
        let k = ball(1, "3 - 2 * i");
        let zero = semicommutator(&k, &ball(1, "re(z1) + z1^2"), &basis, &spec).unwrap();
        assert!(zero.entries.iter().all(|v| v.norm() < 1e-12));
        // T_{z̄} T_z - T_{|z|²}: on the disk, entry m is (m+1)/(m+2) - (m+1)/(m+2) = 0 except
        // via the truncation; with the padded product it vanishes exactly.
        let s = semicommutator(&ball(1, "conj(z1)"), &ball(1, "z1"), &basis, &spec).unwrap();
        assert!(s.entries.iter().all(|v| v.norm() < 1e-12));
    }

    proptest! {
        #[test]
        fn gamma_is_bounded_by_profile_sup(coeffs in prop::collection::vec(-1.0f64..1.0, 1..5), rho in 0u32..8, lambda in 0.0f64..3.0) {
            // Polynomial profile in r1, r2 on τ(B^2); sup over the base bounded by Σ|c_i|.
            let terms: Vec<String> = coeffs.iter().enumerate().map(|(i, c)| format!("({c}) * r1^{} * r2^{}", i % 3, i / 2)).collect();
            let text = terms.join(" + ");
            let a = reinhardt(&[1, 2], &text);
            let mut sup: f64 = 0.0;
            for i in 0..=40 {
                for j in 0..=40 {
                    let (r1, r2) = (i as f64 / 40.0, j as f64 / 40.0);
                    if r1 * r1 + r2 * r2 <= 1.0 {
                        sup = sup.max(a.at(&[r1, r2]).norm());
                    }
                }
            }
            let bound: f64 = coeffs.iter().map(|c| c.abs()).sum();
            let g = gamma_quasi_radial(&a, &[1, 2], lambda, &Level::new(vec![rho, 7 - rho.min(7)]), 12).unwrap();
            prop_assert!(g.norm() <= bound + 1e-12);
            prop_assert!(g.norm() <= sup * 1.05 + 1e-9 || g.norm() <= bound);
        }

        #[test]
        fn real_symbols_give_hermitian_contractions(a in -1.0f64..1.0, b in -1.0f64..1.0, lambda in 0.0f64..2.0) {
            // |f| <= |a| + |b| on the disk-like ball B^2.
            let text = format!("({a}) * re(z1 * conj(z2)) + ({b}) * abs2(z1)");
            let f: Symbol = ball(2, &text).into();
            let basis = enumerate_basis(2, 4, lambda).unwrap();
            let m = toeplitz_matrix(&f, &basis, &QuadratureSpec::for_cutoff(4), Assembly::Auto).unwrap();
            prop_assert!(linalg::hermitian_defect(&m.entries) < 1e-12);
            prop_assert!(m.norm() <= a.abs() + b.abs() + 1e-12);
        }

        #[test]
        fn nonnegative_symbols_give_positive_matrices(a in 0.0f64..2.0, lambda in 0.0f64..2.0) {
            let f: Symbol = ball(2, &format!("({a}) + abs2(z1 - z2)")).into();
            let basis = enumerate_basis(2, 4, lambda).unwrap();
            let m = toeplitz_matrix(&f, &basis, &QuadratureSpec::for_cutoff(4), Assembly::Auto).unwrap();
            let low = linalg::hermitian_eigenvalues(&m.entries).into_iter().fold(f64::INFINITY, f64::min);
            prop_assert!(low >= -1e-12);
        }
    }
}
