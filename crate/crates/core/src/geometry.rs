//! Ball dimensions, weights, multi-indices and the monomial orthonormal basis.

use std::collections::HashMap;
use std::fmt;
use std::ops::Range;

use crate::error::{Error, Result};
use crate::special::{binomial, ln_gamma_pos};

/// Split of `C^n` into `z' ∈ C^ℓ` and `z'' ∈ C^{n-ℓ}`, with `z'` further cut
/// into `m` consecutive groups of sizes `k_1, ..., k_m`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct BallGeometry {
    n: usize,
    ell: usize,
    k: Vec<usize>,
}

impl BallGeometry {
    pub fn new(n: usize, ell: usize, k: Vec<usize>) -> Result<Self> {
        if n < 2 {
            return Err(Error::domain(format!("dimension n must be at least 2, got {n}")));
        }
        if ell == 0 || ell >= n {
            return Err(Error::domain(format!("split point must satisfy 1 <= ell < n, got ell={ell}, n={n}")));
        }
        if k.is_empty() || k.len() > ell {
            return Err(Error::domain(format!("partition must have between 1 and ell={ell} groups, got {}", k.len())));
        }
        if k.iter().any(|&kj| kj == 0) {
            return Err(Error::domain("partition entries must be positive"));
        }
        let total: usize = k.iter().sum();
        if total != ell {
            return Err(Error::domain(format!("partition {k:?} sums to {total}, expected ell={ell}")));
        }
        Ok(Self { n, ell, k })
    }

    /// Radial split: a single group holding all of `z'`.
    pub fn radial(n: usize, ell: usize) -> Result<Self> {
        Self::new(n, ell, vec![ell])
    }

    /// Separately radial split: every coordinate of `z'` is its own group.
    pub fn separately_radial(n: usize, ell: usize) -> Result<Self> {
        Self::new(n, ell, vec![1; ell])
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn ell(&self) -> usize {
        self.ell
    }

    pub fn m(&self) -> usize {
        self.k.len()
    }

    pub fn partition(&self) -> &[usize] {
        &self.k
    }

    /// Dimension `n - ℓ` of the complementary ball.
    pub fn complement_dim(&self) -> usize {
        self.n - self.ell
    }

    /// Coordinate ranges (0-based, inside `z'`) of the groups `z_(1), ..., z_(m)`.
    pub fn groups(&self) -> Vec<Range<usize>> {
        partition_ranges(&self.k)
    }
}

impl fmt::Display for BallGeometry {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "n={} ell={} k={:?}", self.n, self.ell, self.k)
    }
}

pub(crate) fn partition_ranges(k: &[usize]) -> Vec<Range<usize>> {
    let mut start = 0;
    k.iter()
        .map(|&kj| {
            let r = start..start + kj;
            start += kj;
            r
        })
        .collect()
}

/// `A²_λ(B^d)`: the ball dimension and the weight `λ > -1`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WeightedSpace {
    dim: usize,
    lambda: f64,
}

impl WeightedSpace {
    pub fn new(dim: usize, lambda: f64) -> Result<Self> {
        if dim == 0 {
            return Err(Error::domain("ball dimension must be positive"));
        }
        if !(lambda > -1.0) || !lambda.is_finite() {
            return Err(Error::domain(format!("weight must satisfy lambda > -1, got {lambda}")));
        }
        Ok(Self { dim, lambda })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    /// `c_λ^(d) = Γ(d+λ+1) / (π^d Γ(λ+1))`, making `dv_λ` a probability measure.
    pub fn normalization(&self) -> f64 {
        let d = self.dim as f64;
        (ln_gamma_pos(d + self.lambda + 1.0)
            - d * std::f64::consts::PI.ln()
            - ln_gamma_pos(self.lambda + 1.0))
        .exp()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct MultiIndex(Vec<u32>);

impl MultiIndex {
    pub fn new(entries: Vec<u32>) -> Self {
        Self(entries)
    }

    pub fn zero(len: usize) -> Self {
        Self(vec![0; len])
    }

    pub fn entries(&self) -> &[u32] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn degree(&self) -> u32 {
        self.0.iter().sum()
    }

    /// `ln α!`
    pub fn ln_factorial(&self) -> f64 {
        self.0.iter().map(|&a| ln_gamma_pos(a as f64 + 1.0)).sum()
    }

    /// Concatenation `(self, other)`.
    pub fn join(&self, other: &MultiIndex) -> MultiIndex {
        let mut v = self.0.clone();
        v.extend_from_slice(&other.0);
        MultiIndex(v)
    }

    /// Split at position `at` into `(α', α'')`.
    pub fn split(&self, at: usize) -> (MultiIndex, MultiIndex) {
        (MultiIndex(self.0[..at].to_vec()), MultiIndex(self.0[at..].to_vec()))
    }
}

impl fmt::Display for MultiIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (i, a) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{a}")?;
        }
        write!(f, ")")
    }
}

/// Group degrees `ρ = (|α_(1)|, ..., |α_(m)|)`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Level {
    rho: Vec<u32>,
}

impl Level {
    pub fn new(rho: Vec<u32>) -> Self {
        Self { rho }
    }

    pub fn rho(&self) -> &[u32] {
        &self.rho
    }

    pub fn total(&self) -> u32 {
        self.rho.iter().sum()
    }

    /// Effective weight `μ = λ + |ρ| + ℓ` of the factor on `B^{n-ℓ}`.
    pub fn mu(&self, lambda: f64, ell: usize) -> f64 {
        lambda + self.total() as f64 + ell as f64
    }

    /// All levels of length `m` with `|ρ| <= max_total`, graded order.
    pub fn up_to(m: usize, max_total: u32) -> Vec<Level> {
        let mut out = Vec::new();
        for g in 0..=max_total {
            for c in compositions(g, m) {
                out.push(Level::new(c));
            }
        }
        out
    }
}

impl fmt::Display for Level {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s: Vec<String> = self.rho.iter().map(|r| r.to_string()).collect();
        write!(f, "({})", s.join(","))
    }
}

/// All compositions of `total` into `parts` nonnegative entries, in
/// descending lexicographic order: `(total,0,..), (total-1,1,..), ...`.
pub(crate) fn compositions(total: u32, parts: usize) -> Vec<Vec<u32>> {
    fn rec(remaining: u32, parts: usize, prefix: &mut Vec<u32>, out: &mut Vec<Vec<u32>>) {
        if parts == 1 {
            prefix.push(remaining);
            out.push(prefix.clone());
            prefix.pop();
            return;
        }
        for first in (0..=remaining).rev() {
            prefix.push(first);
            rec(remaining - first, parts - 1, prefix, out);
            prefix.pop();
        }
    }
    let mut out = Vec::new();
    if parts == 0 {
        if total == 0 {
            out.push(Vec::new());
        }
        return out;
    }
    rec(total, parts, &mut Vec::with_capacity(parts), &mut out);
    out
}

/// Monomials `z^α` with `|α| <= D` on `B^d`, graded lexicographic, together with
/// the constants that turn them into the orthonormal basis of `A²_λ(B^d)`.
#[derive(Debug, Clone)]
pub struct TruncatedBasis {
    dim: usize,
    cutoff: u32,
    lambda: f64,
    indices: Vec<MultiIndex>,
    norms: Vec<f64>,
    position: HashMap<MultiIndex, usize>,
}

impl TruncatedBasis {
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn cutoff(&self) -> u32 {
        self.cutoff
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    pub fn len(&self) -> usize {
        self.indices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.indices.is_empty()
    }

    pub fn indices(&self) -> &[MultiIndex] {
        &self.indices
    }

    pub fn index(&self, i: usize) -> &MultiIndex {
        &self.indices[i]
    }

    pub fn norms(&self) -> &[f64] {
        &self.norms
    }

    pub fn position(&self, alpha: &MultiIndex) -> Option<usize> {
        self.position.get(alpha).copied()
    }

    pub fn space(&self) -> WeightedSpace {
        WeightedSpace { dim: self.dim, lambda: self.lambda }
    }

    /// Index range of all monomials of exact degree `g`.
    pub fn degree_range(&self, g: u32) -> Range<usize> {
        if g > self.cutoff {
            return self.len()..self.len();
        }
        let d = self.dim as u64;
        let start = if g == 0 { 0 } else { binomial(g as u64 - 1 + d, d) as usize };
        let end = binomial(g as u64 + d, d) as usize;
        start..end
    }

    pub fn same_as(&self, other: &TruncatedBasis) -> bool {
        self.dim == other.dim && self.cutoff == other.cutoff && self.lambda == other.lambda
    }
}

/// All multi-indices of length `d` and degree `<= cutoff`, with normalizations.
pub fn enumerate_basis(dim: usize, cutoff: u32, lambda: f64) -> Result<TruncatedBasis> {
    WeightedSpace::new(dim, lambda)?;
    let mut indices = Vec::with_capacity(binomial(cutoff as u64 + dim as u64, dim as u64) as usize);
    for g in 0..=cutoff {
        indices.extend(compositions(g, dim).into_iter().map(MultiIndex));
    }
    let norms = indices.iter().map(|a| norm_unchecked(a, dim, lambda)).collect();
    let position = indices.iter().cloned().enumerate().map(|(i, a)| (a, i)).collect();
    Ok(TruncatedBasis { dim, cutoff, lambda, indices, norms, position })
}

/// `sqrt(Γ(d+|α|+λ+1) / (α! Γ(d+λ+1)))`, so that `e_α = const · z^α` has unit norm.
pub fn basis_norm_constant(alpha: &MultiIndex, dim: usize, lambda: f64) -> Result<f64> {
    WeightedSpace::new(dim, lambda)?;
    if alpha.len() != dim {
        return Err(Error::domain(format!(
            "multi-index {alpha} has length {}, ball dimension is {dim}",
            alpha.len()
        )));
    }
    Ok(norm_unchecked(alpha, dim, lambda))
}

pub(crate) fn ln_norm_unchecked(alpha: &MultiIndex, dim: usize, lambda: f64) -> f64 {
    let d = dim as f64;
    let g = alpha.degree() as f64;
    0.5 * (ln_gamma_pos(d + g + lambda + 1.0) - alpha.ln_factorial() - ln_gamma_pos(d + lambda + 1.0))
}

fn norm_unchecked(alpha: &MultiIndex, dim: usize, lambda: f64) -> f64 {
    ln_norm_unchecked(alpha, dim, lambda).exp()
}

/// Level `ρ(α')` of a multi-index on `B^ℓ` under the partition `k`.
pub fn level_of(alpha_prime: &MultiIndex, k: &[usize]) -> Result<Level> {
    let ell: usize = k.iter().sum();
    if alpha_prime.len() != ell {
        return Err(Error::domain(format!(
            "multi-index {alpha_prime} has length {}, partition {k:?} needs {ell}",
            alpha_prime.len()
        )));
    }
    Ok(level_unchecked(alpha_prime.entries(), k))
}

pub(crate) fn level_unchecked(alpha_prime: &[u32], k: &[usize]) -> Level {
    let mut start = 0;
    let rho = k
        .iter()
        .map(|&kj| {
            let s = alpha_prime[start..start + kj].iter().sum();
            start += kj;
            s
        })
        .collect();
    Level::new(rho)
}

/// `dim 𝓗_ρ = Π_j C(ρ_j + k_j - 1, k_j - 1)`.
pub fn dim_level(level: &Level, k: &[usize]) -> Result<u64> {
    if level.rho().len() != k.len() {
        return Err(Error::domain(format!(
            "level {level} has {} entries, partition {k:?} has {}",
            level.rho().len(),
            k.len()
        )));
    }
    Ok(level
        .rho()
        .iter()
        .zip(k)
        .map(|(&r, &kj)| binomial(r as u64 + kj as u64 - 1, kj as u64 - 1))
        .product())
}

/// Multi-indices `α'` on `B^ℓ` spanning `𝓗_ρ`, in the order induced by the
/// graded-lexicographic basis of `B^ℓ`.
pub fn level_indices(level: &Level, k: &[usize]) -> Result<Vec<MultiIndex>> {
    dim_level(level, k)?;
    let ell: usize = k.iter().sum();
    let total = level.total();
    Ok(compositions(total, ell)
        .into_iter()
        .filter(|a| level_unchecked(a, k) == *level)
        .map(MultiIndex)
        .collect())
}
