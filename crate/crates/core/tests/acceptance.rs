//! Acceptance gate. Prints one PASS/FAIL line per criterion with its runtime
//! and exits nonzero when any criterion fails.

use std::process::ExitCode;
use std::time::{Duration, Instant};

use bergman_core::berezin::{berezin_of_operator, berezin_of_symbol, boundary_vanishing_probe, spec_near_boundary, strictly_decreasing};
use bergman_core::decomposition::{
    basis_counts, extract_all_blocks, off_block_mass, recover_symbol_and_remainder, verify_tensor_factorization, LevelBlock, RecoveryOptions,
};
use bergman_core::linalg;
use bergman_core::spectral::{
    classify_singular, essential_spectrum_sample, fredholm_index_report, lifted_matrices, matrix_level_blocks, BoundarySchedule, SingularTrend,
};
use bergman_core::toeplitz::{gamma_quasi_radial, semicommutator, SymbolProfile, GAMMA_ORDER};
use bergman_core::{
    enumerate_basis, toeplitz_matrix, Assembly, BallGeometry, BoundSymbol, Complex64, Domain, Error, Level, MatrixSymbol, ProductSymbol,
    QuadratureSpec, Result, Symbol,
};

const NORM_CLOSED_TOL: f64 = 1e-10;
const NORM_QUAD_TOL: f64 = 1e-6;
const NORM_LIMIT: Duration = Duration::from_secs(10);
const GAMMA_TOL: f64 = 1e-10;
const GAMMA_LIMIT: Duration = Duration::from_secs(5);
const FACTOR_TOL: f64 = 1e-5;
const FACTOR_SIGMAS: f64 = 5.0;
const FACTOR_ORDER: usize = 48;
const FACTOR_SAMPLES: usize = 200_000;
const FACTOR_LIMIT: Duration = Duration::from_secs(120);
const BLOCK_MASS_TOL: f64 = 1e-8;
const SUP_TOL: f64 = 1e-10;
const COMMUTATOR_TOL: f64 = 1e-8;
const ENTRY_TOL: f64 = 1e-10;
const QUANT_CUTOFF: u32 = 64;
const QUANT_LIMIT: Duration = Duration::from_secs(30);
const BEREZIN_TOL: f64 = 1e-6;
const REMAINDER_TOL: f64 = 1e-6;
const BEREZIN_LIMIT: Duration = Duration::from_secs(60);
const BOUNDARY_LAST: f64 = 0.05;
const BOUNDARY_ORACLE_TOL: f64 = 1e-8;
const SPECTRUM_TOL: f64 = 1e-6;
const SPECTRUM_REL: f64 = 1e-6;
const SINGULAR_THRESHOLD: f64 = 0.1;
const SPECTRUM_LIMIT: Duration = Duration::from_secs(60);

struct Verdict {
    passed: bool,
    detail: String,
}

fn verdict(passed: bool, detail: impl Into<String>) -> Result<Verdict> {
    Ok(Verdict { passed, detail: detail.into() })
}

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

fn ball(text: &str, d: usize) -> Result<BoundSymbol> {
    BoundSymbol::parse(text, Domain::Ball(d))
}

fn lift(text: &str, g: &BallGeometry) -> Result<Symbol> {
    Ok(Symbol::Product(ProductSymbol::inner_only(ball(text, g.complement_dim())?, g.clone())?))
}

fn binomial(n: u64, k: u64) -> u64 {
    (1..=k).fold(1u64, |acc, i| acc * (n - k + i) / i)
}

/// Compositions of `total` into positive parts.
fn compositions(total: usize) -> Vec<Vec<usize>> {
    if total == 0 {
        return vec![Vec::new()];
    }
    let mut out = Vec::new();
    for first in 1..=total {
        for mut rest in compositions(total - first) {
            rest.insert(0, first);
            out.push(rest);
        }
    }
    out
}

/// `B_μ[1 - |w|²](z)` on the disk, `|z|² = r2`: with `t = |w|²` distributed as
/// Beta(1, μ+1), it equals `(1 - r2) Σ_k r2^k E[t^k (1 - t)]`.
fn disk_berezin_of_defining_function(mu: f64, r2: f64) -> f64 {
    let mut sum = 0.0;
    let mut moment = 1.0; // E[t^k]
    let mut pow = 1.0;
    for k in 0..2_000_000u32 {
        let kf = k as f64;
        let next = moment * (kf + 1.0) / (kf + mu + 2.0);
        sum += pow * (moment - next);
        moment = next;
        pow *= r2;
        if pow * moment < 1e-20 {
            break;
        }
    }
    (1.0 - r2) * sum
}

fn norm_formula() -> Result<Verdict> {
    let (n, ell, lambda) = (2.0, 1.0, 0.0);
    let f = Symbol::Plain(ball("1 - abs2(z)", 1)?);
    let spec = QuadratureSpec::for_cutoff(8);
    let (mut dc, mut dq): (f64, f64) = (0.0, 0.0);
    for k in 0..=6u32 {
        let mu = lambda + k as f64 + ell;
        let expect = (mu + 1.0) / (n + lambda + k as f64 + 1.0);
        let basis = enumerate_basis(1, 8, mu)?;
        dc = dc.max((toeplitz_matrix(&f, &basis, &spec, Assembly::Auto)?.norm() - expect).abs());
        dq = dq.max((toeplitz_matrix(&f, &basis, &spec, Assembly::Quadrature)?.norm() - expect).abs());
    }
    verdict(dc < NORM_CLOSED_TOL && dq < NORM_QUAD_TOL, format!("closed-form dev {dc:.2e}, quadrature dev {dq:.2e}, k=0..6, D=8"))
}

fn gamma_closed_forms() -> Result<Verdict> {
    let mut worst: f64 = 0.0;
    let mut unit_exact = true;
    for ell in [1usize, 2] {
        let k = vec![ell];
        let one = SymbolProfile::new(&BoundSymbol::parse("1", Domain::Reinhardt(k.clone()))?)?;
        let r2 = SymbolProfile::new(&BoundSymbol::parse("r1^2", Domain::Reinhardt(k.clone()))?)?;
        for lambda in [0.0, 0.5, 2.0] {
            for rho in 0..=10u32 {
                let level = Level::new(vec![rho]);
                unit_exact &= gamma_quasi_radial(&one, &k, lambda, &level, GAMMA_ORDER)? == c(1.0, 0.0);
                // Mean of Beta(ρ+ℓ, λ+1).
                let expect = (rho as f64 + ell as f64) / (rho as f64 + ell as f64 + lambda + 1.0);
                worst = worst.max((gamma_quasi_radial(&r2, &k, lambda, &level, GAMMA_ORDER)? - expect).norm());
            }
        }
    }
    verdict(unit_exact && worst < GAMMA_TOL, format!("gamma(1) exact: {unit_exact}, r1^2 max dev {worst:.2e}"))
}

fn tensor_factorization() -> Result<Verdict> {
    let g = BallGeometry::new(2, 1, vec![1])?;
    let pairs = [("r1^2", "1"), ("r1^2", "1 - abs2(z)"), ("1 - r1^2", "re(zc1)")];
    let gj = QuadratureSpec { radial_order: FACTOR_ORDER, angular_order: FACTOR_ORDER, ..QuadratureSpec::for_cutoff(6) };
    let mc = QuadratureSpec::monte_carlo(FACTOR_SAMPLES, 7);
    let (mut dev, mut z): (f64, f64) = (0.0, 0.0);
    let mut ok = true;
    for (at, ct) in pairs {
        let a = BoundSymbol::parse(at, Domain::Prime(g.clone()))?;
        let cs = ball(ct, 1)?;
        for level in Level::up_to(1, 6) {
            let r = verify_tensor_factorization(&a, &cs, &g, 0.0, &level, 6, &gj, FACTOR_TOL)?;
            dev = dev.max(r.max_deviation);
            ok &= r.passed;
            let r = verify_tensor_factorization(&a, &cs, &g, 0.0, &level, 6, &mc, FACTOR_SIGMAS)?;
            z = z.max(r.max_z_score.unwrap_or(f64::INFINITY));
            ok &= r.passed;
        }
    }
    verdict(ok && dev < FACTOR_TOL && z < FACTOR_SIGMAS, format!("worst deviation {dev:.2e}, Monte Carlo max z-score {z:.2}"))
}

fn block_structure() -> Result<Verdict> {
    let mut mass_ratio: f64 = 0.0;
    let mut sup_gap: f64 = 0.0;
    let mut comm: f64 = 0.0;
    let g2 = BallGeometry::new(2, 1, vec![1])?;
    let spec = QuadratureSpec { radial_order: FACTOR_ORDER, angular_order: FACTOR_ORDER, ..QuadratureSpec::for_cutoff(6) };
    let basis = enumerate_basis(2, 6, 0.0)?;
    let mut matrices = Vec::new();
    for (at, ct) in [("r1^2", "1"), ("r1^2", "1 - abs2(z)"), ("1 - r1^2", "re(zc1)")] {
        let a = BoundSymbol::parse(at, Domain::Prime(g2.clone()))?;
        let cs = ball(ct, 1)?;
        let f = Symbol::Product(ProductSymbol::new(a.clone(), cs.clone(), g2.clone())?);
        matrices.push((g2.clone(), toeplitz_matrix(&f, &basis, &spec, Assembly::Quadrature)?));
        let ta = toeplitz_matrix(&Symbol::Product(ProductSymbol::outer_only(a, g2.clone())?), &basis, &spec, Assembly::Auto)?;
        let tc = toeplitz_matrix(&Symbol::Product(ProductSymbol::inner_only(cs, g2.clone())?), &basis, &spec, Assembly::Auto)?;
        comm = comm.max(linalg::operator_norm(&(&ta.entries * &tc.entries - &tc.entries * &ta.entries)));
    }
    let g3 = BallGeometry::new(3, 2, vec![1, 1])?;
    for text in ["abs2(z1) * re(zc1) + r2^2", "r1^2 * r2 + im(zc1)^2"] {
        let f = Symbol::Plain(BoundSymbol::parse(text, Domain::Full(g3.clone()))?);
        matrices.push((g3.clone(), toeplitz_matrix(&f, &enumerate_basis(3, 5, 0.5)?, &QuadratureSpec::for_cutoff(5), Assembly::Quadrature)?));
    }
    for (g, m) in &matrices {
        mass_ratio = mass_ratio.max(off_block_mass(m, g)? / linalg::frobenius(&m.entries));
        let blocks = extract_all_blocks(m, g, BLOCK_MASS_TOL)?;
        let sup = blocks.iter().map(LevelBlock::norm).fold(0.0, f64::max);
        sup_gap = sup_gap.max((sup - m.norm()).abs());
    }
    verdict(
        mass_ratio < BLOCK_MASS_TOL && sup_gap < SUP_TOL && comm < COMMUTATOR_TOL,
        format!("off-block/Frobenius {mass_ratio:.2e}, sup-over-blocks gap {sup_gap:.2e}, commutator {comm:.2e}"),
    )
}

fn quantization_decay() -> Result<Verdict> {
    let f = ball("1 - abs2(z)", 1)?;
    let spec = QuadratureSpec::for_cutoff(QUANT_CUTOFF);
    let mus = [1.0, 2.0, 4.0, 8.0, 16.0, 32.0];
    let norms = mus
        .iter()
        .map(|&mu| Ok(semicommutator(&f, &f, &enumerate_basis(1, QUANT_CUTOFF, mu)?, &spec)?.norm()))
        .collect::<Result<Vec<f64>>>()?;
    let entry = semicommutator(&f, &f, &enumerate_basis(1, QUANT_CUTOFF, 0.0)?, &spec)?.entries[(0, 0)];
    // Unweighted disk averages: ∫(1-|z|²) = 1/2, ∫(1-|z|²)² = 1/3.
    let expect = 0.5 * 0.5 - 1.0 / 3.0;
    let dev = (entry - expect).norm();
    let ratio = norms[5] / norms[2];
    verdict(
        strictly_decreasing(&norms) && ratio < 0.25 && dev < ENTRY_TOL,
        format!("norms {:.3e} .. {:.3e}, mu32/mu4 = {ratio:.3}, entry00 dev {dev:.2e}", norms[0], norms[5]),
    )
}

fn berezin_and_recovery() -> Result<Verdict> {
    let corpus = [(1usize, "1 - abs2(z)"), (1, "re(z1)^2 + 2"), (1, "(1 - abs2(z))^2 * im(z1)"), (2, "abs2(z1) - im(z2)")];
    let mut dev: f64 = 0.0;
    for (d, text) in corpus {
        let s = ball(text, d)?;
        let cutoff = if d == 1 { 60 } else { 24 };
        let spec = QuadratureSpec::for_cutoff(cutoff);
        for mu in [0.0, 2.0] {
            let m = toeplitz_matrix(&Symbol::Plain(s.clone()), &enumerate_basis(d, cutoff, mu)?, &spec, Assembly::Auto)?;
            for z in sample_points(d) {
                let op = berezin_of_operator(&m, &z)?;
                let sym = berezin_of_symbol(&s, mu, 0, &z, &spec_near_boundary(&spec, &z))?;
                dev = dev.max((op.value - sym).norm());
            }
        }
    }
    let g = BallGeometry::new(2, 1, vec![1])?;
    let (levels, inner) = (6u32, 12u32);
    let cref = ball("1 - abs2(z)", 1)?;
    let m = toeplitz_matrix(&lift("1 - abs2(z)", &g)?, &enumerate_basis(2, levels + inner, 0.0)?, &QuadratureSpec::for_cutoff(levels + inner), Assembly::Auto)?;
    let blocks: Vec<LevelBlock> = extract_all_blocks(&m, &g, BLOCK_MASS_TOL)?.into_iter().filter(|b| b.level.total() <= levels).collect();
    let grid: Vec<Vec<Complex64>> = [0.0, 0.2, 0.4].iter().flat_map(|&r| [vec![c(r, 0.0)], vec![c(0.0, r)]]).collect();
    let rec = recover_symbol_and_remainder(&blocks, &grid, &cref, &RecoveryOptions::default())?;
    let bound = 2.0 / rec.top_mu;
    verdict(
        dev < BEREZIN_TOL && rec.max_sample_error() < bound && rec.max_remainder() < REMAINDER_TOL,
        format!(
            "operator vs symbol {dev:.2e}, recovery error {:.3e} (bound {bound:.3e}), remainder {:.2e}",
            rec.max_sample_error(),
            rec.max_remainder()
        ),
    )
}

fn sample_points(d: usize) -> Vec<Vec<Complex64>> {
    let base = [c(0.0, 0.0), c(0.3, 0.1), c(-0.2, 0.45), c(0.0, -0.6)];
    match d {
        1 => base.iter().map(|z| vec![*z]).collect(),
        _ => base.windows(2).map(|w| vec![w[0] * 0.7, w[1] * 0.7]).collect(),
    }
}

fn boundary_vanishing() -> Result<Verdict> {
    let f = ball("1 - abs2(z)", 1)?;
    let rows = boundary_vanishing_probe(&f, 2.0, &[c(1.0, 0.0)], 6, &QuadratureSpec::for_cutoff(8))?;
    let errs: Vec<f64> = rows.iter().map(|r| r.error).collect();
    let oracle_dev = rows
        .iter()
        .map(|r| {
            let r2 = r.radius * r.radius;
            (r.error - ((1.0 - r2) - disk_berezin_of_defining_function(2.0, r2)).abs()).abs()
        })
        .fold(0.0, f64::max);
    let last = errs[errs.len() - 1];
    verdict(
        rows.len() == 6 && strictly_decreasing(&errs) && last < BOUNDARY_LAST && oracle_dev < BOUNDARY_ORACLE_TOL,
        format!("errors {:.3e} .. {last:.3e}, max dev from series oracle {oracle_dev:.2e}", errs[0]),
    )
}

fn spectrum_and_index() -> Result<Verdict> {
    let g = BallGeometry::new(3, 1, vec![1])?;
    let d = g.complement_dim();
    let schedule = BoundarySchedule::new(d, 64, 6, 0);
    let spec = QuadratureSpec::for_cutoff(6);
    let cutoffs = [2u32, 4, 6];
    let probe = |sym: &MatrixSymbol| -> Result<(bool, Option<i64>, SingularTrend, f64)> {
        let sample = essential_spectrum_sample(sym, None, &schedule, SPECTRUM_REL)?;
        let entries = lifted_matrices(sym, &g, &enumerate_basis(g.n(), 6, 0.0)?, &spec)?;
        let blocks = matrix_level_blocks(&entries, sym.size(), &g, BLOCK_MASS_TOL, 6)?;
        let index = match fredholm_index_report(&sample, &blocks) {
            Ok(r) => Some(r.index),
            Err(Error::NotFredholm { .. }) => None,
            Err(e) => return Err(e),
        };
        let rows = cutoffs
            .iter()
            .map(|&dc| {
                let parts = entries.iter().map(|m| Ok(m.compress(dc)?.entries)).collect::<Result<Vec<_>>>()?;
                Ok((dc, linalg::min_singular(&bergman_core::spectral::arrange_blocks(&parts, sym.size()))))
            })
            .collect::<Result<Vec<_>>>()?;
        Ok((sample.fredholm, index, classify_singular(rows, SINGULAR_THRESHOLD).trend, sample.boundary_distance_to(c(1.0, 0.0))))
    };
    let scalar = probe(&MatrixSymbol::parse("2 - abs2(z)", d)?)?;
    let shift = probe(&MatrixSymbol::parse("zc1", d)?)?;
    let diag = probe(&MatrixSymbol::parse("2 - abs2(z), 0; 0, 3 - abs2(z)", d)?)?;
    let ok = scalar.0
        && scalar.1 == Some(0)
        && scalar.3 < SPECTRUM_TOL
        && scalar.2 == SingularTrend::Flat
        && !shift.0
        && shift.1.is_none()
        && shift.2 == SingularTrend::Decaying
        && diag.0
        && diag.1 == Some(0)
        && diag.2 == SingularTrend::Flat;
    verdict(
        ok,
        format!(
            "2-abs2: fredholm={} index={:?} dist to {{1}} {:.1e} {:?}; zc1: fredholm={} {:?}; diag: fredholm={} index={:?} {:?}",
            scalar.0, scalar.1, scalar.3, scalar.2, shift.0, shift.2, diag.0, diag.1, diag.2
        ),
    )
}

fn combinatorial_integrity() -> Result<Verdict> {
    let mut cases = 0;
    let mut bad = Vec::new();
    for n in 2..=4usize {
        for ell in 1..n {
            for k in compositions(ell) {
                let g = BallGeometry::new(n, ell, k)?;
                for cutoff in 0..=8u32 {
                    let (sum, full) = basis_counts(&g, cutoff)?;
                    let expect = binomial(cutoff as u64 + n as u64, n as u64);
                    cases += 1;
                    if sum != expect || full != expect {
                        bad.push(format!("{g} D={cutoff}: {sum} vs {expect}"));
                    }
                }
            }
        }
    }
    verdict(bad.is_empty(), if bad.is_empty() { format!("{cases} cases, n<=4, D<=8") } else { bad.join("; ") })
}

fn main() -> ExitCode {
    let criteria: [(&str, fn() -> Result<Verdict>, Option<Duration>); 9] = [
        ("1 norm formula", norm_formula, Some(NORM_LIMIT)),
        ("2 gamma normalization and closed forms", gamma_closed_forms, Some(GAMMA_LIMIT)),
        ("3 tensor factorization", tensor_factorization, Some(FACTOR_LIMIT)),
        ("4 block structure and norms", block_structure, None),
        ("5 quantization decay", quantization_decay, Some(QUANT_LIMIT)),
        ("6 Berezin consistency and recovery", berezin_and_recovery, Some(BEREZIN_LIMIT)),
        ("7 boundary vanishing", boundary_vanishing, None),
        ("8 Fredholm, spectrum and index", spectrum_and_index, Some(SPECTRUM_LIMIT)),
        ("9 combinatorial integrity", combinatorial_integrity, None),
    ];
    let mut failures = 0;
    for (name, run, limit) in criteria {
        let start = Instant::now();
        let outcome = run();
        let elapsed = start.elapsed();
        let (passed, detail) = match outcome {
            Ok(v) => (v.passed, v.detail),
            Err(e) => (false, format!("error: {e}")),
        };
        let in_time = limit.is_none_or(|l| elapsed <= l);
        let passed = passed && in_time;
        let budget = limit.map_or(String::new(), |l| format!(" / {}s", l.as_secs()));
        println!("{} {name}: {detail} [{:.2}s{budget}]", if passed { "PASS" } else { "FAIL" }, elapsed.as_secs_f64());
        if !passed {
            failures += 1;
        }
    }
    if failures == 0 {
        println!("acceptance: all 9 criteria passed");
        ExitCode::SUCCESS
    } else {
        println!("acceptance: {failures} of 9 criteria failed");
        ExitCode::FAILURE
    }
}
