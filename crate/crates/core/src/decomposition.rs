//! Level decomposition of torus-invariant operators: the index bijection
//! `u_ρ`, level blocks, the tensor factorization check and symbol recovery.

use std::fmt::Write as _;

use num_complex::Complex64;
use rayon::prelude::*;

use crate::berezin::berezin_of_operator;
use crate::error::{Error, Result};
use crate::geometry::{dim_level, enumerate_basis, level_indices, level_unchecked, BallGeometry, Level, MultiIndex, TruncatedBasis};
use crate::linalg::{self, CMatrix};
use crate::quadrature::{QuadratureSpec, Scheme};
use crate::symbol::{BoundSymbol, Domain, ProductSymbol, Symbol};
use crate::toeplitz::{toeplitz_matrix, Assembly, OperatorMatrix};

/// `u_ρ`: full multi-indices `α = (α', α'')` of level `ρ` with `|α| <= D`,
/// listed `α'`-major so that `H_ρ` blocks are Kronecker-structured.
#[derive(Debug, Clone)]
pub struct LevelIndexMap {
    pub level: Level,
    /// Indices of `𝓗_ρ` on `B^ℓ`.
    pub primes: Vec<MultiIndex>,
    /// Inner basis on `B^{n-ℓ}` at weight `μ`, cutoff `D - |ρ|`.
    pub inner: TruncatedBasis,
    /// `full[i * inner.len() + j] = (primes[i], inner[j])`.
    pub full: Vec<MultiIndex>,
}

impl LevelIndexMap {
    pub fn hdim(&self) -> usize {
        self.primes.len()
    }

    /// Positions of the mapped indices in a full basis.
    pub fn positions(&self, basis: &TruncatedBasis) -> Result<Vec<usize>> {
        self.full
            .iter()
            .map(|a| basis.position(a).ok_or_else(|| Error::domain(format!("{a} is missing from the full basis"))))
            .collect()
    }

    /// Pair `(α', α'')` for a full index of this level.
    pub fn pair(&self, alpha: &MultiIndex) -> Option<(usize, usize)> {
        self.full.iter().position(|a| a == alpha).map(|p| (p / self.inner.len(), p % self.inner.len()))
    }
}

pub fn u_rho_index_map(level: &Level, geometry: &BallGeometry, lambda: f64, cutoff: u32) -> Result<LevelIndexMap> {
    let k = geometry.partition();
    if level.total() > cutoff {
        return Err(Error::domain(format!("level {level} exceeds cutoff {cutoff}")));
    }
    let primes = level_indices(level, k)?;
    let mu = level.mu(lambda, geometry.ell());
    let inner = enumerate_basis(geometry.complement_dim(), cutoff - level.total(), mu)?;
    let full = primes
        .iter()
        .flat_map(|p| inner.indices().iter().map(move |q| p.join(q)))
        .collect();
    Ok(LevelIndexMap { level: level.clone(), primes, inner, full })
}

/// The level of each full basis index.
fn levels_of(basis: &TruncatedBasis, geometry: &BallGeometry) -> Vec<Level> {
    basis
        .indices()
        .iter()
        .map(|a| level_unchecked(&a.entries()[..geometry.ell()], geometry.partition()))
        .collect()
}

fn check_full(m: &OperatorMatrix, geometry: &BallGeometry) -> Result<()> {
    if m.basis.dim() != geometry.n() {
        return Err(Error::domain(format!(
            "matrix lives on B^{}, geometry on B^{}",
            m.basis.dim(),
            geometry.n()
        )));
    }
    Ok(())
}

/// Frobenius mass of `M` outside the level-diagonal blocks.
pub fn off_block_mass(m: &OperatorMatrix, geometry: &BallGeometry) -> Result<f64> {
    check_full(m, geometry)?;
    let levels = levels_of(&m.basis, geometry);
    let mut sum = 0.0;
    for col in 0..m.len() {
        for row in 0..m.len() {
            if levels[row] != levels[col] {
                sum += m.entries[(row, col)].norm_sqr();
            }
        }
    }
    Ok(sum.sqrt())
}

/// Compression of a full matrix to one `H_ρ`, read through `u_ρ`.
#[derive(Debug, Clone)]
pub struct LevelBlock {
    pub level: Level,
    pub mu: f64,
    pub hdim: usize,
    pub inner_basis: TruncatedBasis,
    /// The `H_ρ` block in `u_ρ` order, `(hdim · inner) × (hdim · inner)`.
    pub compressed: CMatrix,
    /// Inner factor on `A²_μ(B^{n-ℓ})`: partial trace over `𝓗_ρ` divided by `hdim`.
    pub block: OperatorMatrix,
    /// Frobenius mass of the rows and columns of `H_ρ` outside the block.
    pub off_block_mass: f64,
    /// Frobenius distance from `compressed` to the nearest Kronecker product.
    pub kronecker_defect: f64,
}

impl LevelBlock {
    /// `σ_max` of the `H_ρ` block.
    pub fn norm(&self) -> f64 {
        linalg::operator_norm(&self.compressed)
    }

    /// The `𝓗_ρ` factor `F` with `compressed ≈ F ⊗ block` (exact when the inner trace is nonzero
    /// and the block is a Kronecker product).
    pub fn outer_factor(&self) -> CMatrix {
        let inner = self.inner_basis.len();
        let tr: Complex64 = self.block.entries.trace();
        let mut f = CMatrix::zeros(self.hdim, self.hdim);
        if tr.norm() == 0.0 {
            return f;
        }
        for i in 0..self.hdim {
            for j in 0..self.hdim {
                let mut s = Complex64::new(0.0, 0.0);
                for q in 0..inner {
                    s += self.compressed[(i * inner + q, j * inner + q)];
                }
                f[(i, j)] = s / tr;
            }
        }
        f
    }
}

/// `min ‖B - F ⊗ G‖_F` over all `F` (`h × h`) and `G` (`q × q`).
pub fn kronecker_defect(b: &CMatrix, h: usize, q: usize) -> f64 {
    if h <= 1 || q == 0 {
        return 0.0;
    }
    let r = CMatrix::from_fn(h * h, q * q, |row, col| {
        let (i, j) = (row / h, row % h);
        let (k, l) = (col / q, col % q);
        b[(i * q + k, j * q + l)]
    });
    let s = linalg::singular_values(&r);
    s.iter().skip(1).map(|x| x * x).sum::<f64>().sqrt()
}

/// Extract the `H_ρ` block; off-block mass above `tol · ‖M‖_F` is an error.
pub fn extract_level_block(m: &OperatorMatrix, geometry: &BallGeometry, level: &Level, tol: f64) -> Result<LevelBlock> {
    check_full(m, geometry)?;
    let map = u_rho_index_map(level, geometry, m.basis.lambda(), m.basis.cutoff())?;
    let pos = map.positions(&m.basis)?;
    let mut inside = vec![false; m.len()];
    for &p in &pos {
        inside[p] = true;
    }
    let mut mass = 0.0;
    for &p in &pos {
        for other in 0..m.len() {
            if !inside[other] {
                mass += m.entries[(p, other)].norm_sqr() + m.entries[(other, p)].norm_sqr();
            }
        }
    }
    let mass = mass.sqrt();
    let tolerance = tol * linalg::frobenius(&m.entries);
    if mass > tolerance {
        return Err(Error::InvarianceViolation { rho: level.rho().to_vec(), mass, tolerance });
    }
    let len = pos.len();
    let compressed = CMatrix::from_fn(len, len, |r, c| m.entries[(pos[r], pos[c])]);
    let (h, q) = (map.hdim(), map.inner.len());
    let mut inner = CMatrix::zeros(q, q);
    for i in 0..h {
        inner += compressed.view((i * q, i * q), (q, q));
    }
    inner /= Complex64::new(h as f64, 0.0);
    let block = OperatorMatrix::new(map.inner.clone(), inner)?;
    Ok(LevelBlock {
        level: level.clone(),
        mu: level.mu(m.basis.lambda(), geometry.ell()),
        hdim: h,
        inner_basis: map.inner,
        kronecker_defect: kronecker_defect(&compressed, h, q),
        compressed,
        block,
        off_block_mass: mass,
    })
}

/// Blocks for every level `|ρ| <= D` of the matrix basis.
pub fn extract_all_blocks(m: &OperatorMatrix, geometry: &BallGeometry, tol: f64) -> Result<Vec<LevelBlock>> {
    Level::up_to(geometry.m(), m.basis.cutoff())
        .par_iter()
        .map(|l| extract_level_block(m, geometry, l, tol))
        .collect()
}

/// Place the blocks back into a full matrix on `basis` (zero elsewhere).
pub fn reassemble(blocks: &[LevelBlock], geometry: &BallGeometry, basis: &TruncatedBasis) -> Result<CMatrix> {
    let mut out = CMatrix::zeros(basis.len(), basis.len());
    for b in blocks {
        let map = u_rho_index_map(&b.level, geometry, basis.lambda(), basis.cutoff())?;
        let pos = map.positions(basis)?;
        if pos.len() != b.compressed.nrows() {
            return Err(Error::domain(format!("block {} does not fit the basis", b.level)));
        }
        for (r, &pr) in pos.iter().enumerate() {
            for (c, &pc) in pos.iter().enumerate() {
                out[(pr, pc)] = b.compressed[(r, c)];
            }
        }
    }
    Ok(out)
}

/// Outcome of comparing full-ball quadrature of `T_{f_ac}` with `T_a|_{𝓗_ρ} ⊗ T_c^μ`.
#[derive(Debug, Clone)]
pub struct FactorizationReport {
    pub level: Level,
    pub mu: f64,
    pub entries: usize,
    pub max_deviation: f64,
    /// Largest `|deviation| / standard error` for Monte Carlo runs.
    pub max_z_score: Option<f64>,
    /// Worst entry as `(row, column)` full multi-indices.
    pub worst: (MultiIndex, MultiIndex),
    pub passed: bool,
}

/// Compare one level block of the full-ball matrix of `f_ac` with the Kronecker
/// product of the two lower-dimensional matrices. Deterministic rules pass when
/// the deviation is below `tol`; Monte Carlo runs pass below `tol` standard errors.
#[allow(clippy::too_many_arguments)]
pub fn verify_tensor_factorization(
    a: &BoundSymbol,
    c: &BoundSymbol,
    geometry: &BallGeometry,
    lambda: f64,
    level: &Level,
    cutoff: u32,
    spec: &QuadratureSpec,
    tol: f64,
) -> Result<FactorizationReport> {
    if !Symbol::Plain(a.clone()).is_torus_invariant() {
        return Err(Error::domain(format!("'{a}' is not invariant under the level torus")));
    }
    let full_basis = enumerate_basis(geometry.n(), cutoff, lambda)?;
    let f = ProductSymbol::new(a.clone(), c.clone(), geometry.clone())?;
    let m = toeplitz_matrix(&Symbol::Product(f), &full_basis, spec, Assembly::Quadrature)?;
    let map = u_rho_index_map(level, geometry, lambda, cutoff)?;
    let pos = map.positions(&full_basis)?;

    let low_spec = match spec.scheme {
        Scheme::GaussJacobiPolar => spec.clone(),
        Scheme::MonteCarlo => QuadratureSpec::for_cutoff(cutoff),
    };
    let prime_basis = enumerate_basis(geometry.ell(), level.total(), lambda)?;
    let ta = toeplitz_matrix(&Symbol::Plain(a.clone()), &prime_basis, &low_spec, Assembly::Quadrature)?;
    let ppos: Vec<usize> = map.primes.iter().map(|p| prime_basis.position(p).expect("level index in prime basis")).collect();
    let fa = CMatrix::from_fn(ppos.len(), ppos.len(), |r, col| ta.entries[(ppos[r], ppos[col])]);
    let tc = toeplitz_matrix(&Symbol::Plain(c.clone()), &map.inner, &low_spec, Assembly::Quadrature)?;
    let kron = linalg::kron(&fa, &tc.entries);

    let mut worst = (0usize, 0usize);
    let mut max_dev: f64 = -1.0;
    let mut max_z: Option<f64> = None;
    for (r, &pr) in pos.iter().enumerate() {
        for (col, &pc) in pos.iter().enumerate() {
            let dev = (m.entries[(pr, pc)] - kron[(r, col)]).norm();
            if dev > max_dev {
                max_dev = dev;
                worst = (r, col);
            }
            if let Some(se) = &m.std_errors {
                let z = if se[(pr, pc)] > 0.0 { dev / se[(pr, pc)] } else if dev > 1e-12 { f64::INFINITY } else { 0.0 };
                max_z = Some(max_z.map_or(z, |x: f64| x.max(z)));
            }
        }
    }
    let passed = match max_z {
        Some(z) => z < tol,
        None => max_dev < tol,
    };
    Ok(FactorizationReport {
        level: level.clone(),
        mu: level.mu(lambda, geometry.ell()),
        entries: pos.len() * pos.len(),
        max_deviation: max_dev.max(0.0),
        max_z_score: max_z,
        worst: (map.full[worst.0].clone(), map.full[worst.1].clone()),
        passed,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct RecoveredSample {
    pub point: Vec<Complex64>,
    pub value: Complex64,
    /// Truncated kernel mass at this point for the top-level block.
    pub tail: f64,
    pub reference: Complex64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RemainderRow {
    pub level: Level,
    pub mu: f64,
    pub hdim: usize,
    pub norm: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RecoveryReport {
    pub samples: Vec<RecoveredSample>,
    pub remainders: Vec<RemainderRow>,
    /// `(|ρ|, max ‖N_ρ‖)` per total degree.
    pub decay: Vec<(u32, f64)>,
    pub top_mu: f64,
}

impl RecoveryReport {
    pub fn max_sample_error(&self) -> f64 {
        self.samples.iter().map(|s| (s.value - s.reference).norm()).fold(0.0, f64::max)
    }

    pub fn max_remainder(&self) -> f64 {
        self.remainders.iter().map(|r| r.norm).fold(0.0, f64::max)
    }

    pub fn remainders_csv(&self) -> String {
        let mut s = String::from("rho,mu,hdim,remainder_norm\n");
        for r in &self.remainders {
            let rho: Vec<String> = r.level.rho().iter().map(|x| x.to_string()).collect();
            let _ = writeln!(s, "{},{},{},{:e}", rho.join(";"), r.mu, r.hdim, r.norm);
        }
        s
    }

    pub fn samples_csv(&self) -> String {
        let d = self.samples.first().map_or(0, |s| s.point.len());
        let mut header: Vec<String> = (1..=d).flat_map(|j| [format!("re_z{j}"), format!("im_z{j}")]).collect();
        header.extend(["re_c".to_string(), "im_c".to_string()]);
        let mut s = header.join(",");
        s.push('\n');
        for p in &self.samples {
            let mut row: Vec<String> = p.point.iter().flat_map(|z| [format!("{:e}", z.re), format!("{:e}", z.im)]).collect();
            row.push(format!("{:e}", p.value.re));
            row.push(format!("{:e}", p.value.im));
            s.push_str(&row.join(","));
            s.push('\n');
        }
        s
    }
}

#[derive(Debug, Clone)]
pub struct RecoveryOptions {
    /// Extrapolate the top two total degrees linearly in `1/μ`.
    pub richardson: bool,
    pub spec: QuadratureSpec,
}

impl Default for RecoveryOptions {
    fn default() -> Self {
        Self { richardson: false, spec: QuadratureSpec::default() }
    }
}

fn mean_berezin(blocks: &[&LevelBlock], z: &[Complex64]) -> Result<(Complex64, f64)> {
    let mut v = Complex64::new(0.0, 0.0);
    let mut tail: f64 = 0.0;
    for b in blocks {
        let r = berezin_of_operator(&b.block, z)?;
        v += r.value;
        tail = tail.max(r.tail);
    }
    Ok((v / blocks.len() as f64, tail))
}

/// Estimate `c` on `grid` from the inner factors of the highest levels and
/// measure `N_ρ = block_ρ - T_c^μ` against the `reference` symbol on `B^{n-ℓ}`.
pub fn recover_symbol_and_remainder(
    blocks: &[LevelBlock],
    grid: &[Vec<Complex64>],
    reference: &BoundSymbol,
    options: &RecoveryOptions,
) -> Result<RecoveryReport> {
    let top = blocks.iter().map(|b| b.level.total()).max().ok_or_else(|| Error::domain("no level blocks given"))?;
    let d = blocks[0].inner_basis.dim();
    if reference.point_len() != d || !matches!(reference.domain(), Domain::Ball(_)) {
        return Err(Error::domain(format!("reference symbol must live on B^{d}")));
    }
    let at = |t: u32| -> Vec<&LevelBlock> { blocks.iter().filter(|b| b.level.total() == t).collect() };
    let top_blocks = at(top);
    let top_mu = top_blocks[0].mu;
    let below = if options.richardson && top > 0 { at(top - 1) } else { Vec::new() };
    let samples = grid
        .par_iter()
        .map(|z| {
            let (hi, tail) = mean_berezin(&top_blocks, z)?;
            let value = if below.is_empty() {
                hi
            } else {
                let (lo, _) = mean_berezin(&below, z)?;
                let mu_lo = below[0].mu;
                (hi * top_mu - lo * mu_lo) / (top_mu - mu_lo)
            };
            Ok(RecoveredSample { point: z.clone(), value, tail, reference: reference.eval(z)? })
        })
        .collect::<Result<Vec<_>>>()?;
    let spec = &options.spec;
    let remainders = blocks
        .par_iter()
        .map(|b| {
            let tc = toeplitz_matrix(&Symbol::Plain(reference.clone()), &b.inner_basis, spec, Assembly::Auto)?;
            let n = b.block.sub(&tc)?;
            Ok(RemainderRow { level: b.level.clone(), mu: b.mu, hdim: b.hdim, norm: n.norm() })
        })
        .collect::<Result<Vec<_>>>()?;
    let mut decay: Vec<(u32, f64)> = Vec::new();
    for r in &remainders {
        let t = r.level.total();
        match decay.iter_mut().find(|(g, _)| *g == t) {
            Some(e) => e.1 = e.1.max(r.norm),
            None => decay.push((t, r.norm)),
        }
    }
    decay.sort_by_key(|e| e.0);
    Ok(RecoveryReport { samples, remainders, decay, top_mu })
}

/// Counts `(Σ_ρ dim 𝓗_ρ · |inner basis|, |full basis|)` for one geometry and cutoff.
pub fn basis_counts(geometry: &BallGeometry, cutoff: u32) -> Result<(u64, u64)> {
    let mut sum = 0u64;
    for l in Level::up_to(geometry.m(), cutoff) {
        let inner = enumerate_basis(geometry.complement_dim(), cutoff - l.total(), 0.0)?.len() as u64;
        sum += dim_level(&l, geometry.partition())? * inner;
    }
    let full = enumerate_basis(geometry.n(), cutoff, 0.0)?.len() as u64;
    Ok((sum, full))
}

/// Largest entrywise `|M - reassembled|`.
pub fn reassembly_error(m: &OperatorMatrix, blocks: &[LevelBlock], geometry: &BallGeometry) -> Result<f64> {
    let r = reassemble(blocks, geometry, &m.basis)?;
    Ok(linalg::max_abs_diff(&m.entries, &r))
}
