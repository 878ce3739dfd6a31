//! Matrix symbols, sampled essential spectra, Fredholm verdicts, the index
//! report and singular-value probes.

use std::fmt::Write as _;

use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::decomposition::{extract_all_blocks, LevelBlock};
use crate::error::{Error, Result};
use crate::geometry::{BallGeometry, Level, TruncatedBasis};
use crate::linalg::{self, CMatrix};
use crate::quadrature::QuadratureSpec;
use crate::symbol::{BoundSymbol, Domain, ProductSymbol, Symbol};
use crate::toeplitz::{toeplitz_matrix, Assembly, GammaSequence, OperatorMatrix};

/// `p × p` array of symbols on `B^d`.
#[derive(Debug, Clone)]
pub struct MatrixSymbol {
    p: usize,
    dim: usize,
    entries: Vec<BoundSymbol>,
}

impl MatrixSymbol {
    pub fn new(p: usize, entries: Vec<BoundSymbol>) -> Result<Self> {
        if p == 0 || entries.len() != p * p {
            return Err(Error::domain(format!("a {p}x{p} matrix symbol needs {} entries, got {}", p * p, entries.len())));
        }
        let dim = entries[0].point_len();
        if entries.iter().any(|e| e.point_len() != dim || !matches!(e.domain(), Domain::Ball(_))) {
            return Err(Error::domain("matrix symbol entries must all live on the same ball B^d"));
        }
        Ok(Self { p, dim, entries })
    }

    pub fn scalar(c: BoundSymbol) -> Result<Self> {
        Self::new(1, vec![c])
    }

    /// Rows separated by `;`, entries by `,`: `"2 - abs2(z), 0; 0, 3"`.
    pub fn parse(text: &str, dim: usize) -> Result<Self> {
        let rows: Vec<&str> = text.split(';').collect();
        let p = rows.len();
        let mut entries = Vec::with_capacity(p * p);
        for row in rows {
            let cells: Vec<&str> = row.split(',').collect();
            if cells.len() != p {
                return Err(Error::domain(format!("matrix symbol row '{}' has {} entries, expected {p}", row.trim(), cells.len())));
            }
            for cell in cells {
                entries.push(BoundSymbol::parse(cell.trim(), Domain::Ball(dim))?);
            }
        }
        Self::new(p, entries)
    }

    pub fn size(&self) -> usize {
        self.p
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn entry(&self, i: usize, j: usize) -> &BoundSymbol {
        &self.entries[i * self.p + j]
    }

    /// Values at a point of the closed ball; the boundary is reached by continuity of the expression.
    pub fn eval(&self, z: &[Complex64]) -> Result<CMatrix> {
        if z.len() != self.dim {
            return Err(Error::domain(format!("point has {} coordinates, symbol expects {}", z.len(), self.dim)));
        }
        let r2: f64 = z.iter().map(|v| v.norm_sqr()).sum();
        if r2 > 1.0 + 1e-12 {
            return Err(Error::domain(format!("point {z:?} lies outside the closed ball")));
        }
        let m = CMatrix::from_fn(self.p, self.p, |i, j| self.entry(i, j).eval_unchecked(z));
        if m.iter().any(|v| !v.re.is_finite() || !v.im.is_finite()) {
            return Err(Error::NonFinite { point: z.to_vec() });
        }
        Ok(m)
    }

    pub fn det(&self, z: &[Complex64]) -> Result<Complex64> {
        Ok(self.eval(z)?.determinant())
    }

    /// Operator matrix of `[T_{c_ij}]` on `basis^p` (block `(i, j)` is `T_{c_ij}`).
    pub fn toeplitz(&self, basis: &TruncatedBasis, spec: &QuadratureSpec) -> Result<CMatrix> {
        let n = basis.len();
        let mut out = CMatrix::zeros(self.p * n, self.p * n);
        for i in 0..self.p {
            for j in 0..self.p {
                let t = toeplitz_matrix(&Symbol::Plain(self.entry(i, j).clone()), basis, spec, Assembly::Auto)?;
                out.view_mut((i * n, j * n), (n, n)).copy_from(&t.entries);
            }
        }
        Ok(out)
    }
}

/// Truncated matrices of `c_ij(z'')` on the full-ball `basis`, row-major.
pub fn lifted_matrices(c: &MatrixSymbol, geometry: &BallGeometry, basis: &TruncatedBasis, spec: &QuadratureSpec) -> Result<Vec<OperatorMatrix>> {
    if c.dim != geometry.complement_dim() {
        return Err(Error::domain(format!("matrix symbol lives on B^{}, geometry needs B^{}", c.dim, geometry.complement_dim())));
    }
    c.entries
        .iter()
        .map(|e| {
            let f = Symbol::Product(ProductSymbol::inner_only(e.clone(), geometry.clone())?);
            toeplitz_matrix(&f, basis, spec, Assembly::Auto)
        })
        .collect()
}

/// Place `p²` equally sized square matrices (row-major) into one block matrix.
pub fn arrange_blocks(entries: &[CMatrix], p: usize) -> CMatrix {
    let s = entries[0].nrows();
    let mut out = CMatrix::zeros(p * s, p * s);
    for i in 0..p {
        for j in 0..p {
            out.view_mut((i * s, j * s), (s, s)).copy_from(&entries[i * p + j]);
        }
    }
    out
}

/// Level blocks `|ρ| <= levels` of a lifted matrix symbol; each block is the
/// `p × p` arrangement of the entry blocks.
pub fn matrix_level_blocks(entries: &[OperatorMatrix], p: usize, geometry: &BallGeometry, tol: f64, levels: u32) -> Result<Vec<LevelBlock>> {
    if entries.len() != p * p || p == 0 {
        return Err(Error::domain(format!("expected {} entry matrices, got {}", p * p, entries.len())));
    }
    let per_entry = entries
        .iter()
        .map(|m| Ok(extract_all_blocks(m, geometry, tol)?.into_iter().filter(|b| b.level.total() <= levels).collect::<Vec<_>>()))
        .collect::<Result<Vec<_>>>()?;
    Ok((0..per_entry[0].len())
        .map(|l| {
            let parts: Vec<CMatrix> = per_entry.iter().map(|e| e[l].compressed.clone()).collect();
            LevelBlock {
                compressed: arrange_blocks(&parts, p),
                off_block_mass: per_entry.iter().map(|e| e[l].off_block_mass.powi(2)).sum::<f64>().sqrt(),
                kronecker_defect: per_entry.iter().map(|e| e[l].kronecker_defect).fold(0.0, f64::max),
                ..per_entry[0][l].clone()
            }
        })
        .collect())
}

/// `c_s(rζ) = c(min(r, s) ζ)` entrywise.
pub fn truncate_symbol_cs(c: &MatrixSymbol, s: f64) -> Result<MatrixSymbol> {
    let entries = c.entries.iter().map(|e| e.frozen(s)).collect::<Result<Vec<_>>>()?;
    MatrixSymbol::new(c.p, entries)
}

/// Directions on the sphere `S^{2d-1}` and approach radii `1 - 2^{-j}`.
#[derive(Debug, Clone)]
pub struct BoundarySchedule {
    pub directions: Vec<Vec<Complex64>>,
    pub radii: Vec<f64>,
}

impl BoundarySchedule {
    /// Coordinate axes, normalized pair combinations `(e_i + u e_j)/√2` for
    /// `u ∈ {1, -1, i, -i}`, and `random` seeded Gaussian directions.
    pub fn new(dim: usize, random: usize, steps: u32, seed: u64) -> Self {
        let zero = Complex64::new(0.0, 0.0);
        let mut directions = Vec::new();
        for j in 0..dim {
            let mut e = vec![zero; dim];
            e[j] = Complex64::new(1.0, 0.0);
            directions.push(e);
        }
        let units = [Complex64::new(1.0, 0.0), Complex64::new(-1.0, 0.0), Complex64::new(0.0, 1.0), Complex64::new(0.0, -1.0)];
        let h = std::f64::consts::FRAC_1_SQRT_2;
        for i in 0..dim {
            for j in i + 1..dim {
                for u in units {
                    let mut e = vec![zero; dim];
                    e[i] = Complex64::new(h, 0.0);
                    e[j] = u * h;
                    directions.push(e);
                }
            }
        }
        for j in 0..dim {
            for u in &units[1..] {
                let mut e = vec![zero; dim];
                e[j] = *u;
                directions.push(e);
            }
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        for _ in 0..random {
            let v: Vec<Complex64> = (0..dim)
                .map(|_| Complex64::new(StandardNormal.sample(&mut rng), StandardNormal.sample(&mut rng)))
                .collect();
            let n: f64 = v.iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt();
            directions.push(v.into_iter().map(|x| x / n).collect());
        }
        let radii = (1..=steps).map(|j| 1.0 - 0.5f64.powi(j as i32)).collect();
        Self { directions, radii }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SpectrumPoint {
    /// Total level `|ρ|`; `None` marks the large-level limit (no quasi-radial factor).
    pub rho_total: Option<u32>,
    pub radius: f64,
    pub location: Vec<Complex64>,
    pub det: Complex64,
}

/// Sampled surrogate of the essential spectrum.
#[derive(Debug, Clone)]
pub struct SpectrumSample {
    /// Values on the sphere (`r = 1`), for every sampled level.
    pub boundary: Vec<SpectrumPoint>,
    /// Interior values reached through large levels.
    pub interior: Vec<SpectrumPoint>,
    pub min_abs: f64,
    pub sup_abs: f64,
    pub threshold: f64,
    pub fredholm: bool,
    /// Sample attaining `min_abs`.
    pub worst: SpectrumPoint,
}

impl SpectrumSample {
    /// Largest distance from a boundary value to `target`.
    pub fn boundary_distance_to(&self, target: Complex64) -> f64 {
        self.boundary.iter().map(|p| (p.det - target).norm()).fold(0.0, f64::max)
    }

    pub fn to_csv(&self) -> String {
        let mut s = String::from("rho_total,radius,re_det,im_det,abs_det\n");
        for p in self.boundary.iter().chain(&self.interior) {
            let rho = p.rho_total.map_or("inf".to_string(), |r| r.to_string());
            let _ = writeln!(s, "{rho},{},{:e},{:e},{:e}", p.radius, p.det.re, p.det.im, p.det.norm());
        }
        s
    }
}

/// Sample `det c` (or `det(γ(ρ) c)` when `gamma` is given) over the sphere for
/// every level and over the approach radii for the top levels. The verdict is
/// `min |det| > rel_tol · sup |det|`.
pub fn essential_spectrum_sample(
    c: &MatrixSymbol,
    gamma: Option<&GammaSequence>,
    schedule: &BoundarySchedule,
    rel_tol: f64,
) -> Result<SpectrumSample> {
    let p = c.size() as i32;
    let mut boundary = Vec::new();
    let mut interior = Vec::new();
    let mut interior_points = vec![vec![Complex64::new(0.0, 0.0); c.dim()]];
    for zeta in &schedule.directions {
        for &r in &schedule.radii {
            interior_points.push(zeta.iter().map(|v| v * r).collect());
        }
    }
    let boundary_dets = schedule.directions.iter().map(|z| c.det(z)).collect::<Result<Vec<_>>>()?;
    let interior_dets = interior_points.iter().map(|z| c.det(z)).collect::<Result<Vec<_>>>()?;
    let radius = |z: &[Complex64]| z.iter().map(|v| v.norm_sqr()).sum::<f64>().sqrt();
    match gamma {
        None => {
            for (z, d) in schedule.directions.iter().zip(&boundary_dets) {
                boundary.push(SpectrumPoint { rho_total: None, radius: 1.0, location: z.clone(), det: *d });
            }
            for (z, d) in interior_points.iter().zip(&interior_dets) {
                interior.push(SpectrumPoint { rho_total: None, radius: radius(z), location: z.clone(), det: *d });
            }
        }
        Some(seq) => {
            let top = seq.values.iter().map(|(l, _)| l.total()).max().unwrap_or(0);
            for (level, g) in &seq.values {
                let scale = g.powi(p);
                for (z, d) in schedule.directions.iter().zip(&boundary_dets) {
                    boundary.push(SpectrumPoint { rho_total: Some(level.total()), radius: 1.0, location: z.clone(), det: scale * d });
                }
                if level.total() == top {
                    for (z, d) in interior_points.iter().zip(&interior_dets) {
                        interior.push(SpectrumPoint { rho_total: Some(top), radius: radius(z), location: z.clone(), det: scale * d });
                    }
                }
            }
        }
    }
    let all = boundary.iter().chain(&interior);
    let sup_abs = all.clone().map(|p| p.det.norm()).fold(0.0, f64::max);
    let worst = all
        .min_by(|a, b| a.det.norm().total_cmp(&b.det.norm()))
        .cloned()
        .ok_or_else(|| Error::domain("empty spectrum sample"))?;
    let min_abs = worst.det.norm();
    let threshold = rel_tol * sup_abs;
    Ok(SpectrumSample { boundary, interior, min_abs, sup_abs, threshold, fredholm: min_abs > threshold && sup_abs > 0.0, worst })
}

/// Verdict of the truncated symbols `c_s` for each `s`: `(s, fredholm, min |det|)`.
pub fn s_sweep(c: &MatrixSymbol, gamma: Option<&GammaSequence>, schedule: &BoundarySchedule, s_values: &[f64], rel_tol: f64) -> Result<Vec<(f64, bool, f64)>> {
    s_values
        .iter()
        .map(|&s| {
            let cs = truncate_symbol_cs(c, s)?;
            let sample = essential_spectrum_sample(&cs, gamma, schedule, rel_tol)?;
            Ok((s, sample.fredholm, sample.min_abs))
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct IndexTerm {
    pub level: Level,
    pub hdim: usize,
    pub index: i64,
    pub sigma_min: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct IndexReport {
    pub index: i64,
    pub terms: Vec<IndexTerm>,
}

impl IndexReport {
    pub fn to_text(&self) -> String {
        let mut s = format!("index = {}\n", self.index);
        for t in &self.terms {
            let _ = writeln!(s, "level {} hdim {} index {} sigma_min {:e}", t.level, t.hdim, t.index, t.sigma_min);
        }
        s
    }
}

/// Index of a Fredholm element: `Σ_ρ dim 𝓗_ρ · Ind_ρ` with every `Ind_ρ = 0`
/// (each level factor is homotopic through invertibles to a constant). The
/// per-level `σ_min` of the supplied blocks is reported as numerical evidence.
pub fn fredholm_index_report(sample: &SpectrumSample, blocks: &[LevelBlock]) -> Result<IndexReport> {
    if !sample.fredholm {
        return Err(Error::NotFredholm { location: sample.worst.location.clone(), value: sample.min_abs });
    }
    let terms: Vec<IndexTerm> = blocks
        .iter()
        .map(|b| IndexTerm { level: b.level.clone(), hdim: b.hdim, index: 0, sigma_min: linalg::min_singular(&b.compressed) })
        .collect();
    let index = terms.iter().map(|t| t.hdim as i64 * t.index).sum();
    Ok(IndexReport { index, terms })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SingularTrend {
    /// Bounded away from zero above the threshold.
    Flat,
    /// Nonincreasing and heading to zero.
    Decaying,
    Inconclusive,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SingularTable {
    pub rows: Vec<(u32, f64)>,
    pub trend: SingularTrend,
}

impl SingularTable {
    pub fn to_csv(&self) -> String {
        let mut s = String::from("cutoff,sigma_min\n");
        for (d, v) in &self.rows {
            let _ = writeln!(s, "{d},{v:e}");
        }
        s
    }
}

/// Classify `(D, σ_min)` rows: decaying when nonincreasing with last value below
/// `threshold` or a log-log slope in `D + 1` of at most `-1/2`; flat when every
/// value is at least `threshold`.
pub fn classify_singular(rows: Vec<(u32, f64)>, threshold: f64) -> SingularTable {
    let trend = if rows.len() < 2 {
        if rows.first().is_some_and(|r| r.1 >= threshold) {
            SingularTrend::Flat
        } else {
            SingularTrend::Inconclusive
        }
    } else {
        let nonincreasing = rows.windows(2).all(|w| w[1].1 <= w[0].1 * (1.0 + 1e-12));
        let (first, last) = (rows[0], rows[rows.len() - 1]);
        let slope = if first.1 > 0.0 && last.1 > 0.0 {
            (last.1 / first.1).ln() / ((last.0 as f64 + 1.0) / (first.0 as f64 + 1.0)).ln()
        } else {
            f64::NEG_INFINITY
        };
        if nonincreasing && (last.1 < threshold || slope <= -0.5) {
            SingularTrend::Decaying
        } else if rows.iter().all(|r| r.1 >= threshold) {
            SingularTrend::Flat
        } else {
            SingularTrend::Inconclusive
        }
    };
    SingularTable { rows, trend }
}

/// `σ_min` of each truncation.
pub fn min_singular_probe(matrices: &[OperatorMatrix], threshold: f64) -> SingularTable {
    classify_singular(matrices.iter().map(|m| (m.basis.cutoff(), linalg::min_singular(&m.entries))).collect(), threshold)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::enumerate_basis;
    use crate::toeplitz::SymbolProfile;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn parse_and_evaluate() {
        let m = MatrixSymbol::parse("2 - abs2(z), 0; i, 3", 2).unwrap();
        assert_eq!(m.size(), 2);
        let v = m.eval(&[c(0.5, 0.0), c(0.0, 0.5)]).unwrap();
        assert_eq!(v[(1, 0)], c(0.0, 1.0));
        assert_relative_eq!(m.det(&[c(0.5, 0.0), c(0.0, 0.5)]).unwrap().re, 4.5);
        assert!(MatrixSymbol::parse("1, 2; 3", 1).is_err());
    }

    #[test]
    fn truncation_freezes_radially() {
        let m = MatrixSymbol::parse("1 - abs2(z) + re(z1)", 1).unwrap();
        let s = 0.5;
        let t = truncate_symbol_cs(&m, s).unwrap();
        let inside = [c(0.3, 0.1)];
        assert_eq!(t.eval(&inside).unwrap(), m.eval(&inside).unwrap());
        let zeta = c(0.6, 0.8);
        let at = |r: f64| t.eval(&[zeta * r]).unwrap()[(0, 0)];
        assert!((at((1.0 + s) / 2.0) - at(s)).norm() < 1e-15);
        assert!((at(1.0) - at(s)).norm() < 1e-15);
        assert!(truncate_symbol_cs(&m, 1.0).is_err());
    }

    #[test]
    fn spectra_of_scalar_symbols() {
        let sched = BoundarySchedule::new(2, 64, 6, 1);
        let one = essential_spectrum_sample(&MatrixSymbol::parse("1", 2).unwrap(), None, &sched, 1e-6).unwrap();
        assert!(one.fredholm && one.boundary_distance_to(c(1.0, 0.0)) == 0.0);
        let s = essential_spectrum_sample(&MatrixSymbol::parse("2 - abs2(z)", 2).unwrap(), None, &sched, 1e-6).unwrap();
        assert!(s.fredholm);
        assert!(s.boundary_distance_to(c(1.0, 0.0)) < 1e-12);
        let s = essential_spectrum_sample(&MatrixSymbol::parse("zc1", 2).unwrap(), None, &sched, 1e-6).unwrap();
        assert!(!s.fredholm);
        assert_eq!(s.min_abs, 0.0);
        assert!(s.boundary.iter().any(|p| (p.det.norm() - 1.0).abs() < 1e-15));
        match fredholm_index_report(&s, &[]) {
            Err(Error::NotFredholm { value, .. }) => assert_eq!(value, 0.0),
            other => panic!("expected refusal, got {other:?}"),
        }
    }

    #[test]
    fn matrix_symbol_index_is_zero() {
        let sched = BoundarySchedule::new(1, 16, 6, 2);
        let m = MatrixSymbol::parse("2 - abs2(z), 0; 0, 3 + re(z1)", 1).unwrap();
        let s = essential_spectrum_sample(&m, None, &sched, 1e-6).unwrap();
        assert!(s.fredholm);
        assert_eq!(fredholm_index_report(&s, &[]).unwrap().index, 0);
        let k = MatrixSymbol::parse("2, 1; 1, 2", 1).unwrap();
        let s = essential_spectrum_sample(&k, None, &sched, 1e-6).unwrap();
        assert!(s.boundary_distance_to(c(3.0, 0.0)) < 1e-12);
    }

    #[test]
    fn quasi_radial_factor_scales_samples() {
        let a = BoundSymbol::parse("r1^2", Domain::Reinhardt(vec![1])).unwrap();
        let seq = GammaSequence::compute(&SymbolProfile::new(&a).unwrap(), &[1], 0.0, 6, 24).unwrap();
        let sched = BoundarySchedule::new(1, 4, 3, 0);
        let s = essential_spectrum_sample(&MatrixSymbol::parse("2 - abs2(z)", 1).unwrap(), Some(&seq), &sched, 1e-6).unwrap();
        // γ(ρ) = (ρ+1)/(ρ+2); boundary value c = 1.
        assert!(s.boundary.iter().all(|p| (p.det.re - (p.rho_total.unwrap() as f64 + 1.0) / (p.rho_total.unwrap() as f64 + 2.0)).abs() < 1e-12));
        assert!(s.interior.iter().all(|p| p.rho_total == Some(6)));
        assert!(s.to_csv().starts_with("rho_total,radius,re_det,im_det,abs_det\n0,1,"));
    }

    #[test]
    fn sweep_over_freeze_radius() {
        let sched = BoundarySchedule::new(1, 8, 4, 0);
        let m = MatrixSymbol::parse("abs2(z) - 0.25", 1).unwrap();
        let rows = s_sweep(&m, None, &sched, &[0.4, 0.5, 0.9], 1e-6).unwrap();
        let verdicts: Vec<bool> = rows.iter().map(|r| r.1).collect();
        assert_eq!(verdicts, vec![true, false, false]);
    }

    #[test]
    fn singular_value_trends() {
        let spec = QuadratureSpec::default();
        let mats = |text: &str| -> Vec<OperatorMatrix> {
            [2u32, 4, 6, 8]
                .iter()
                .map(|&d| {
                    let b = enumerate_basis(1, d, 0.0).unwrap();
                    toeplitz_matrix(&BoundSymbol::parse(text, Domain::Ball(1)).unwrap().into(), &b, &spec, Assembly::Auto).unwrap()
                })
                .collect()
        };
        let id = min_singular_probe(&mats("1"), 0.1);
        assert!(id.rows.iter().all(|r| (r.1 - 1.0).abs() < 1e-12));
        assert_eq!(id.trend, SingularTrend::Flat);
        let compact = min_singular_probe(&mats("1 - abs2(z)"), 0.1);
        for (d, v) in &compact.rows {
            assert_relative_eq!(*v, 1.0 / (*d as f64 + 2.0), max_relative = 1e-10);
        }
        assert_eq!(compact.trend, SingularTrend::Decaying);
        let shifted = min_singular_probe(&mats("2 - abs2(z)"), 0.1);
        assert!(shifted.rows.iter().all(|r| r.1 >= 1.0));
        assert_eq!(shifted.trend, SingularTrend::Flat);
    }

    proptest! {
        #[test]
        fn more_directions_never_shrink_the_sample(extra in 1usize..40, seed in 0u64..100) {
            let m = MatrixSymbol::parse("abs2(z1) + i * re(z2)", 2).unwrap();
            let small = BoundarySchedule::new(2, 8, 3, seed);
            let mut large = small.clone();
            large.directions.extend(BoundarySchedule::new(2, extra, 3, seed + 1000).directions);
            let a = essential_spectrum_sample(&m, None, &small, 1e-6).unwrap();
            let b = essential_spectrum_sample(&m, None, &large, 1e-6).unwrap();
            for p in &a.boundary {
                prop_assert!(b.boundary.iter().any(|q| q.det == p.det));
            }
            prop_assert!(b.min_abs <= a.min_abs && b.sup_abs >= a.sup_abs);
        }
    }
}
