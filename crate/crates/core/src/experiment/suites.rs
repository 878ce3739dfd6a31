use std::fmt::Write as _;

use num_complex::Complex64;
use rayon::prelude::*;

use super::{ExperimentConfig, SuiteReport};
use crate::berezin::{berezin_of_operator, berezin_of_symbol, boundary_vanishing_probe, quantization_probe, spec_near_boundary, strictly_decreasing};
use crate::decomposition::{
    extract_all_blocks, off_block_mass, recover_symbol_and_remainder, verify_tensor_factorization, LevelBlock, RecoveryOptions,
};
use crate::error::{Error, Result};
use crate::geometry::{enumerate_basis, BallGeometry, Level};
use crate::linalg::{self, CMatrix};
use crate::quadrature::{QuadratureSpec, Scheme};
use crate::spectral::{
    arrange_blocks, classify_singular, essential_spectrum_sample, fredholm_index_report, lifted_matrices, matrix_level_blocks, BoundarySchedule,
    MatrixSymbol, SingularTrend,
};
use crate::symbol::{BoundSymbol, Domain, ProductSymbol, Symbol};
use crate::toeplitz::{product_symbol, semicommutator, toeplitz_matrix, Assembly, GammaSequence, SymbolProfile, GAMMA_ORDER};

/// Padding for products of lifted generators before compression.
const PRODUCT_PAD: u32 = 8;

fn on_ball(text: &str, d: usize) -> Result<BoundSymbol> {
    BoundSymbol::parse(text, Domain::Ball(d))
}

fn lift(c: &BoundSymbol, g: &BallGeometry) -> Result<Symbol> {
    Ok(Symbol::Product(ProductSymbol::inner_only(c.clone(), g.clone())?))
}

fn stretch(a: &BoundSymbol, g: &BallGeometry) -> Result<Symbol> {
    Ok(Symbol::Product(ProductSymbol::outer_only(a.clone(), g.clone())?))
}

fn quoted(text: &str) -> String {
    format!("\"{}\"", text.replace('"', "\"\""))
}

fn rho_text(level: &Level) -> String {
    level.rho().iter().map(|x| x.to_string()).collect::<Vec<_>>().join(";")
}

/// `r · ζ` for each radius and each fixed schedule direction, the origin once.
fn grid_points(d: usize, radii: &[f64]) -> Vec<Vec<Complex64>> {
    let dirs = BoundarySchedule::new(d, 0, 0, 0).directions;
    let mut out = Vec::new();
    let mut origin = false;
    for &r in radii {
        if r == 0.0 {
            if !origin {
                out.push(vec![Complex64::new(0.0, 0.0); d]);
                origin = true;
            }
            continue;
        }
        for z in &dirs {
            out.push(z.iter().map(|v| v * r).collect());
        }
    }
    out
}

fn max_of(values: impl IntoIterator<Item = f64>) -> f64 {
    values.into_iter().fold(0.0, f64::max)
}

/// Norm identity on the inner ball, the sup-over-levels identity and the
/// approach of block norms to `sup |c|`.
pub fn run_norm_identity(cfg: &ExperimentConfig) -> Result<SuiteReport> {
    cfg.validate()?;
    let mut rep = SuiteReport::new("norm", cfg);
    let g = cfg.geometry()?;
    let (n, ell, d) = (g.n() as f64, g.ell() as f64, g.complement_dim());
    let lambda: f64 = cfg.parse("lambda")?;
    let cutoff: u32 = cfg.parse("cutoff")?;
    let levels: u32 = cfg.parse("levels")?;
    let spec = cfg.quadrature(cutoff)?;
    let f = Symbol::Plain(on_ball("1 - abs2(z)", d)?);

    let rows = (0..=levels)
        .into_par_iter()
        .map(|k| {
            let mu = lambda + k as f64 + ell;
            let basis = enumerate_basis(d, cutoff, mu)?;
            let closed = toeplitz_matrix(&f, &basis, &spec, Assembly::Auto)?.norm();
            let quad = toeplitz_matrix(&f, &basis, &spec, Assembly::Quadrature)?.norm();
            Ok((k, mu, (mu + 1.0) / (n + lambda + k as f64 + 1.0), closed, quad))
        })
        .collect::<Result<Vec<_>>>()?;
    let mut t = String::from("k,mu,expected,closed_form,quadrature,dev_closed,dev_quadrature\n");
    for (k, mu, e, c, q) in &rows {
        let _ = writeln!(t, "{k},{mu},{e:e},{c:e},{q:e},{:e},{:e}", (c - e).abs(), (q - e).abs());
    }
    rep.table("norm_identity.csv", t);
    let dev_c = max_of(rows.iter().map(|r| (r.3 - r.2).abs()));
    let dev_q = max_of(rows.iter().map(|r| (r.4 - r.2).abs()));
    let tol_c: f64 = cfg.parse("tol.closed")?;
    let tol_q: f64 = cfg.parse("tol.quadrature")?;
    rep.check("norm_closed_form", dev_c <= tol_c, format!("max deviation {dev_c:e} (tol {tol_c:e}) over k=0..{levels}"));
    rep.check("norm_quadrature", dev_q <= tol_q, format!("max deviation {dev_q:e} (tol {tol_q:e}) over k=0..{levels}"));

    let c = on_ball(cfg.get("symbol.c")?, d)?;
    let full = toeplitz_matrix(&lift(&c, &g)?, &enumerate_basis(g.n(), cutoff, lambda)?, &spec, Assembly::Auto)?;
    let tol_block: f64 = cfg.parse("tol.block")?;
    let blocks = extract_all_blocks(&full, &g, tol_block)?;
    let full_norm = full.norm();
    let sup = max_of(blocks.iter().map(LevelBlock::norm));
    let tol_norm: f64 = cfg.parse("tol.norm")?;
    let gap = (sup - full_norm).abs();
    rep.check(
        "sup_over_levels",
        gap <= tol_norm * full_norm.max(1.0),
        format!("sup of block norms {sup:e} vs full norm {full_norm:e}, gap {gap:e}"),
    );

    let dirs = BoundarySchedule::new(d, 16, 0, spec.seed).directions;
    let mut sup_c: f64 = 0.0;
    for z in &dirs {
        for j in 0..=32 {
            let r = j as f64 / 32.0;
            let p: Vec<Complex64> = z.iter().map(|v| v * r).collect();
            sup_c = sup_c.max(c.eval_unchecked(&p).norm());
        }
    }
    let mut t = String::from("rho,mu,block_norm,sup_c\n");
    for b in &blocks {
        let _ = writeln!(t, "{},{},{:e},{sup_c:e}", rho_text(&b.level), b.mu, b.norm());
    }
    rep.table("block_norms.csv", t);
    let by_total: Vec<f64> =
        (0..=cutoff).map(|tot| max_of(blocks.iter().filter(|b| b.level.total() == tot).map(LevelBlock::norm))).collect();
    let below = blocks.iter().all(|b| b.norm() <= sup_c + tol_q);
    rep.check("block_norms_below_sup", below, format!("largest block norm {sup:e}, sampled sup |c| {sup_c:e}"));
    let monotone = by_total.windows(2).all(|w| w[1] >= w[0] * (1.0 - 1e-12));
    rep.check(
        "block_norms_monotone",
        monotone,
        format!("block norm by |rho| from {:e} to {:e}, gap to sup {:e}", by_total[0], by_total[by_total.len() - 1], sup_c - by_total[by_total.len() - 1]),
    );
    Ok(rep)
}

/// Tensor factorization over a corpus of `(a, c)` pairs, block structure and commutation.
pub fn run_factorization_suite(cfg: &ExperimentConfig) -> Result<SuiteReport> {
    cfg.validate()?;
    let mut rep = SuiteReport::new("factorization", cfg);
    let g = cfg.geometry()?;
    let d = g.complement_dim();
    let lambda: f64 = cfg.parse("lambda")?;
    let cutoff: u32 = cfg.parse("factorization.cutoff")?;
    let levels: u32 = cfg.parse("levels")?;
    if levels > cutoff {
        return Err(Error::config(format!("levels {levels} exceeds factorization.cutoff {cutoff}")));
    }
    let mut spec = cfg.quadrature(cutoff)?;
    let order: usize = cfg.parse("factorization.order")?;
    if cfg.parse::<usize>("quad.radial_order")? == 0 {
        spec.radial_order = order;
    }
    if cfg.parse::<usize>("quad.angular_order")? == 0 {
        spec.angular_order = order;
    }
    let mc = spec.scheme == Scheme::MonteCarlo;
    let tol: f64 = if mc { cfg.parse("tol.mc_sigma")? } else { cfg.parse("tol.factorization")? };
    let tol_block: f64 = cfg.parse("tol.block")?;
    let tol_norm: f64 = cfg.parse("tol.norm")?;
    let tol_comm: f64 = cfg.parse("tol.commutator")?;
    let full_basis = enumerate_basis(g.n(), cutoff, lambda)?;
    // Structural checks always use the deterministic rule.
    let det_spec = QuadratureSpec { scheme: Scheme::GaussJacobiPolar, ..spec.clone() };

    let mut fact = String::from("a,c,rho,mu,entries,max_deviation,max_z_score,passed\n");
    let mut blk = String::from("a,c,rho,mu,hdim,block_norm,off_block_mass,kronecker_defect\n");
    for pair in cfg.items("factorization.pairs", ';')? {
        let (at, ct) = pair
            .split_once('|')
            .ok_or_else(|| Error::config(format!("factorization.pairs: expected 'a | c', got '{pair}'")))?;
        let (at, ct) = (at.trim(), ct.trim());
        let a = BoundSymbol::parse(at, Domain::Prime(g.clone()))?;
        let c = on_ball(ct, d)?;
        let tag = format!("{at} | {ct}");

        let reports = Level::up_to(g.m(), levels)
            .iter()
            .map(|l| verify_tensor_factorization(&a, &c, &g, lambda, l, cutoff, &spec, tol))
            .collect::<Result<Vec<_>>>()?;
        for r in &reports {
            let z = r.max_z_score.map_or(String::new(), |z| format!("{z:e}"));
            let _ = writeln!(fact, "{},{},{},{},{},{:e},{z},{}", quoted(at), quoted(ct), rho_text(&r.level), r.mu, r.entries, r.max_deviation, r.passed);
        }
        let worst = max_of(reports.iter().map(|r| r.max_deviation));
        let detail = if mc {
            format!("max z-score {:e} (tol {tol}), max deviation {worst:e}", max_of(reports.iter().filter_map(|r| r.max_z_score)))
        } else {
            format!("worst deviation {worst:e} (tol {tol:e}) over |rho| <= {levels}")
        };
        rep.check(format!("factorization[{tag}]"), reports.iter().all(|r| r.passed), detail);

        let f = Symbol::Product(ProductSymbol::new(a.clone(), c.clone(), g.clone())?);
        let m = toeplitz_matrix(&f, &full_basis, &det_spec, Assembly::Quadrature)?;
        let fro = linalg::frobenius(&m.entries);
        let mass = off_block_mass(&m, &g)?;
        rep.check(format!("off_block[{tag}]"), mass <= tol_block * fro, format!("off-block mass {mass:e}, Frobenius norm {fro:e}"));
        match extract_all_blocks(&m, &g, tol_block) {
            Ok(blocks) => {
                for b in &blocks {
                    let _ = writeln!(
                        blk,
                        "{},{},{},{},{},{:e},{:e},{:e}",
                        quoted(at),
                        quoted(ct),
                        rho_text(&b.level),
                        b.mu,
                        b.hdim,
                        b.norm(),
                        b.off_block_mass,
                        b.kronecker_defect
                    );
                }
                let sup = max_of(blocks.iter().map(LevelBlock::norm));
                let full = m.norm();
                let gap = (sup - full).abs();
                rep.check(
                    format!("sup_over_blocks[{tag}]"),
                    gap <= tol_norm * full.max(1.0),
                    format!("sup of block norms {sup:e} vs full norm {full:e}, gap {gap:e}"),
                );
            }
            Err(e) => rep.check(format!("sup_over_blocks[{tag}]"), false, e.to_string()),
        }

        let ta = toeplitz_matrix(&stretch(&a, &g)?, &full_basis, &det_spec, Assembly::Auto)?;
        let tc = toeplitz_matrix(&lift(&c, &g)?, &full_basis, &det_spec, Assembly::Auto)?;
        let comm = linalg::operator_norm(&(&ta.entries * &tc.entries - &tc.entries * &ta.entries));
        rep.check(format!("commutator[{tag}]"), comm < tol_comm, format!("||[T_fa, T_fc]|| = {comm:e} (tol {tol_comm:e})"));
    }
    rep.table("factorization.csv", fact);
    rep.table("blocks.csv", blk);

    // With a = 1 every level block is I ⊗ T_c.
    let c = on_ball(cfg.get("symbol.c")?, d)?;
    let m = toeplitz_matrix(&lift(&c, &g)?, &full_basis, &det_spec, Assembly::Auto)?;
    let tol_entry: f64 = cfg.parse("tol.entry")?;
    let mut worst: f64 = 0.0;
    for b in extract_all_blocks(&m, &g, tol_block)? {
        let tcm = toeplitz_matrix(&Symbol::Plain(c.clone()), &b.inner_basis, &det_spec, Assembly::Auto)?;
        let expect = linalg::kron(&CMatrix::identity(b.hdim, b.hdim), &tcm.entries);
        worst = worst.max(linalg::max_abs_diff(&b.compressed, &expect));
    }
    rep.check("unit_outer_factor", worst <= tol_entry, format!("max |block - I (x) T_c| = {worst:e} (tol {tol_entry:e})"));
    Ok(rep)
}

/// Semicommutator decay, Berezin consistency and decay, recovery of `c` and
/// boundary vanishing.
pub fn run_quantization_suite(cfg: &ExperimentConfig) -> Result<SuiteReport> {
    cfg.validate()?;
    let mut rep = SuiteReport::new("quantization", cfg);
    let g = cfg.geometry()?;
    let d = g.complement_dim();
    let lambda: f64 = cfg.parse("lambda")?;
    let mus: Vec<f64> = cfg.list("mu.list")?;
    let radii: Vec<f64> = cfg.list("grid.radii")?;
    if radii.iter().any(|r| !(0.0..1.0).contains(r)) {
        return Err(Error::config("grid.radii must lie in [0, 1)"));
    }
    let grid = grid_points(d, &radii);

    let c1 = on_ball(cfg.get("semicommutator.c1")?, d)?;
    let c2 = on_ball(cfg.get("semicommutator.c2")?, d)?;
    let scut: u32 = cfg.parse("semicommutator.cutoff")?;
    let sspec = cfg.quadrature(scut)?;
    let mut all_mus = vec![0.0];
    all_mus.extend(mus.iter().copied());
    let semi = all_mus
        .par_iter()
        .map(|&mu| {
            let s = semicommutator(&c1, &c2, &enumerate_basis(d, scut, mu)?, &sspec)?;
            Ok((mu, s.norm(), s.entries[(0, 0)]))
        })
        .collect::<Result<Vec<_>>>()?;
    let mut t = String::from("mu,norm,re_entry00,im_entry00\n");
    for (mu, nm, e) in &semi {
        let _ = writeln!(t, "{mu},{nm:e},{:e},{:e}", e.re, e.im);
    }
    rep.table("semicommutator.csv", t);
    let norms: Vec<f64> = semi[1..].iter().map(|r| r.1).collect();
    rep.check(
        "semicommutator_decreasing",
        strictly_decreasing(&norms),
        format!("norms {}; degree-0 entry at mu=0 is {:e}", norms.iter().map(|x| format!("{x:e}")).collect::<Vec<_>>().join(" "), semi[0].2.re),
    );
    if let (Some(i4), Some(&last_mu)) = (mus.iter().position(|&m| m == 4.0), mus.last()) {
        if last_mu > 4.0 {
            let (a, b) = (norms[i4], norms[norms.len() - 1]);
            rep.check("semicommutator_ratio", b < 0.25 * a, format!("norm at mu={last_mu} is {b:e}, quarter of mu=4 is {:e}", 0.25 * a));
        }
    }

    let bcut: u32 = cfg.parse("berezin.cutoff")?;
    let bspec = cfg.quadrature(bcut)?;
    let bmus: Vec<f64> = cfg.list("berezin.mu")?;
    let mut t = String::from("symbol,mu,point,re_operator,im_operator,re_symbol,im_symbol,deviation,tail\n");
    let mut worst: f64 = 0.0;
    for text in cfg.items("berezin.corpus", ';')? {
        let s = on_ball(&text, d)?;
        for &mu in &bmus {
            let m = toeplitz_matrix(&Symbol::Plain(s.clone()), &enumerate_basis(d, bcut, mu)?, &bspec, Assembly::Auto)?;
            let vals = grid
                .par_iter()
                .map(|z| Ok((berezin_of_operator(&m, z)?, berezin_of_symbol(&s, mu, 0, z, &spec_near_boundary(&bspec, z))?)))
                .collect::<Result<Vec<_>>>()?;
            for (i, (op, sy)) in vals.iter().enumerate() {
                let dev = (op.value - sy).norm();
                worst = worst.max(dev);
                let _ = writeln!(
                    t,
                    "{},{mu},{i},{:e},{:e},{:e},{:e},{dev:e},{:e}",
                    quoted(&text),
                    op.value.re,
                    op.value.im,
                    sy.re,
                    sy.im,
                    op.tail
                );
            }
        }
    }
    rep.table("berezin.csv", t);
    let tol_b: f64 = cfg.parse("tol.berezin")?;
    rep.check("berezin_consistency", worst <= tol_b, format!("max |operator - symbol side| = {worst:e} (tol {tol_b:e})"));

    let c = on_ball(cfg.get("symbol.c")?, d)?;
    let qrows = quantization_probe(&c, &mus, &grid, &bspec)?;
    let mut t = String::from("mu,sup_error\n");
    for r in &qrows {
        let _ = writeln!(t, "{},{:e}", r.mu, r.sup_error);
    }
    rep.table("quantization.csv", t);
    let errs: Vec<f64> = qrows.iter().map(|r| r.sup_error).collect();
    rep.check(
        "berezin_error_nonincreasing",
        errs.windows(2).all(|w| w[1] <= w[0] * (1.0 + 1e-12)),
        format!("sup |B_mu[c] - c| from {:e} to {:e}", errs[0], errs[errs.len() - 1]),
    );

    let levels: u32 = cfg.parse("levels")?;
    let inner: u32 = cfg.parse("inner_cutoff")?;
    let big = levels + inner;
    let big_spec = cfg.quadrature(big)?;
    let basis = enumerate_basis(g.n(), big, lambda)?;
    let tol_block: f64 = cfg.parse("tol.block")?;
    let m = toeplitz_matrix(&lift(&c, &g)?, &basis, &big_spec, Assembly::Auto)?;
    let blocks: Vec<LevelBlock> = extract_all_blocks(&m, &g, tol_block)?.into_iter().filter(|b| b.level.total() <= levels).collect();
    let options = RecoveryOptions { richardson: cfg.parse("recovery.richardson")?, spec: cfg.quadrature(inner)? };
    let rec = recover_symbol_and_remainder(&blocks, &grid, &c, &options)?;
    rep.table("recovery_samples.csv", rec.samples_csv());
    rep.table("recovery_remainders.csv", rec.remainders_csv());
    let (err, bound) = (rec.max_sample_error(), 2.0 / rec.top_mu);
    rep.check("recovery_grid", err < bound, format!("max |recovered - c| = {err:e}, bound 2/mu_max = {bound:e}"));
    let tol_r: f64 = cfg.parse("tol.remainder")?;
    let rmax = rec.max_remainder();
    rep.check("recovery_remainder", rmax < tol_r, format!("max ||N_rho|| = {rmax:e} (tol {tol_r:e})"));

    let padded = enumerate_basis(g.n(), big + PRODUCT_PAD, lambda)?;
    let pspec = cfg.quadrature(big + PRODUCT_PAD)?;
    let t1 = toeplitz_matrix(&lift(&c1, &g)?, &padded, &pspec, Assembly::Auto)?;
    let t2 = toeplitz_matrix(&lift(&c2, &g)?, &padded, &pspec, Assembly::Auto)?;
    let prod = t1.mul(&t2)?.compress(big)?;
    let pblocks: Vec<LevelBlock> =
        extract_all_blocks(&prod, &g, tol_block)?.into_iter().filter(|b| b.level.total() <= levels).collect();
    let prec = recover_symbol_and_remainder(&pblocks, &grid, &product_symbol(&c1, &c2)?, &options)?;
    let mut t = String::from("rho_total,max_remainder_norm\n");
    for (tot, v) in &prec.decay {
        let _ = writeln!(t, "{tot},{v:e}");
    }
    rep.table("product_remainders.csv", t);
    let decay: Vec<f64> = prec.decay.iter().map(|x| x.1).collect();
    rep.check(
        "product_remainder_decreasing",
        strictly_decreasing(&decay),
        format!("max ||N_rho|| by |rho| from {:e} to {:e}", decay[0], decay[decay.len() - 1]),
    );

    let f = on_ball(cfg.get("boundary.symbol")?, d)?;
    let bmu: f64 = cfg.parse("boundary.mu")?;
    let steps: u32 = cfg.parse("boundary.steps")?;
    let mut dir = vec![Complex64::new(0.0, 0.0); d];
    dir[0] = Complex64::new(1.0, 0.0);
    let brows = boundary_vanishing_probe(&f, bmu, &dir, steps, &QuadratureSpec::for_cutoff(8))?;
    let mut t = String::from("radius,error\n");
    for r in &brows {
        let _ = writeln!(t, "{},{:e}", r.radius, r.error);
    }
    rep.table("boundary.csv", t);
    let errs: Vec<f64> = brows.iter().map(|r| r.error).collect();
    let tol_bd: f64 = cfg.parse("tol.boundary")?;
    let last = errs.last().copied().unwrap_or(f64::INFINITY);
    rep.check("boundary_decreasing", strictly_decreasing(&errs), format!("{} radii", errs.len()));
    rep.check("boundary_last", last < tol_bd, format!("error {last:e} at the last radius (tol {tol_bd:e})"));
    Ok(rep)
}

/// Essential-spectrum samples, Fredholm verdicts, index reports and `σ_min`
/// trends for a corpus of scalar and matrix symbols on the inner ball.
pub fn run_spectrum_suite(cfg: &ExperimentConfig) -> Result<SuiteReport> {
    cfg.validate()?;
    let mut rep = SuiteReport::new("spectrum", cfg);
    let g = cfg.geometry()?;
    let d = g.complement_dim();
    let lambda: f64 = cfg.parse("lambda")?;
    let levels: u32 = cfg.parse("levels")?;
    let cutoff: u32 = cfg.parse("cutoff")?;
    let symbols = cfg.items("spectrum.symbols", '|')?;
    let expect = cfg.items("spectrum.expect", '|')?;
    if !expect.is_empty() && expect.len() != symbols.len() {
        return Err(Error::config(format!("spectrum.expect lists {} verdicts for {} symbols", expect.len(), symbols.len())));
    }
    let expect: Vec<Option<bool>> = expect
        .iter()
        .map(|e| match e.as_str() {
            "fredholm" => Ok(Some(true)),
            "not" | "not-fredholm" => Ok(Some(false)),
            "?" | "any" => Ok(None),
            other => Err(Error::config(format!("spectrum.expect: unknown verdict '{other}'"))),
        })
        .collect::<Result<_>>()?;
    let seed: u64 = cfg.parse("quad.seed")?;
    let schedule = BoundarySchedule::new(d, cfg.parse("spectrum.random")?, cfg.parse("spectrum.steps")?, seed);
    let rel_tol: f64 = cfg.parse("tol.spectrum")?;
    let profile = SymbolProfile::new(&BoundSymbol::parse(cfg.get("spectrum.profile")?, Domain::Prime(g.clone()))?)?;
    let gamma = GammaSequence::compute(&profile, g.partition(), lambda, levels, GAMMA_ORDER)?;
    let mut cutoffs: Vec<u32> = cfg.list("spectrum.cutoffs")?;
    cutoffs.sort_unstable();
    cutoffs.dedup();
    let top = cutoffs.last().copied().unwrap_or(cutoff).max(cutoff);
    let spec = cfg.quadrature(top)?;
    let basis = enumerate_basis(g.n(), top, lambda)?;
    let threshold: f64 = cfg.parse("spectrum.singular_threshold")?;
    let tol_block: f64 = cfg.parse("tol.block")?;

    let mut overview = String::from("symbol,fredholm,min_abs,sup_abs,weighted_fredholm,singular_trend,index\n");
    for (i, text) in symbols.iter().enumerate() {
        let c = MatrixSymbol::parse(text, d)?;
        let p = c.size();
        let sample = essential_spectrum_sample(&c, None, &schedule, rel_tol)?;
        let weighted = essential_spectrum_sample(&c, Some(&gamma), &schedule, rel_tol)?;
        rep.table(format!("spectrum_{i}.csv"), sample.to_csv());
        rep.table(format!("spectrum_{i}_weighted.csv"), weighted.to_csv());

        let entries = lifted_matrices(&c, &g, &basis, &spec)?;
        let rows = cutoffs
            .iter()
            .map(|&dc| {
                let parts = entries.iter().map(|m| Ok(m.compress(dc)?.entries)).collect::<Result<Vec<_>>>()?;
                Ok((dc, linalg::min_singular(&arrange_blocks(&parts, p))))
            })
            .collect::<Result<Vec<_>>>()?;
        let table = classify_singular(rows, threshold);
        rep.table(format!("singular_{i}.csv"), table.to_csv());

        let at_cutoff = entries.iter().map(|m| m.compress(cutoff)).collect::<Result<Vec<_>>>()?;
        let blocks = matrix_level_blocks(&at_cutoff, p, &g, tol_block, levels.min(cutoff))?;
        let index = match fredholm_index_report(&sample, &blocks) {
            Ok(r) => {
                rep.table(format!("index_{i}.txt"), r.to_text());
                rep.check(format!("index[{i}]"), r.index == 0, format!("index {} over {} levels", r.index, r.terms.len()));
                r.index.to_string()
            }
            Err(e @ Error::NotFredholm { .. }) => {
                rep.table(format!("index_{i}.txt"), format!("{e}\n"));
                String::new()
            }
            Err(e) => return Err(e),
        };
        let _ = writeln!(
            overview,
            "{},{},{:e},{:e},{},{:?},{index}",
            quoted(text),
            sample.fredholm,
            sample.min_abs,
            sample.sup_abs,
            weighted.fredholm,
            table.trend
        );

        if let Some(Some(want)) = expect.get(i) {
            let word = |b: bool| if b { "Fredholm" } else { "not Fredholm" };
            rep.check(
                format!("verdict[{i}]"),
                sample.fredholm == *want,
                format!("'{text}': {} (min |det| {:e}, sup {:e}), expected {}", word(sample.fredholm), sample.min_abs, sample.sup_abs, word(*want)),
            );
            rep.check(
                format!("weighted_verdict[{i}]"),
                weighted.fredholm == *want,
                format!("'{text}' with gamma weights: {}", word(weighted.fredholm)),
            );
        }
        let consistent = match (sample.fredholm, table.trend) {
            (true, SingularTrend::Flat) | (false, SingularTrend::Decaying) => true,
            _ => false,
        };
        rep.check(format!("singular_trend[{i}]"), consistent, format!("'{text}': sigma_min trend {:?}", table.trend));
    }
    rep.table("spectrum.csv", overview);
    Ok(rep)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid_has_origin_once() {
        let g = grid_points(1, &[0.0, 0.0, 0.5]);
        assert_eq!(g.len(), 1 + 4);
        assert_eq!(g[0], vec![Complex64::new(0.0, 0.0)]);
        assert!((g[1][0].norm() - 0.5).abs() < 1e-15);
    }

    #[test]
    fn default_suites_pass() {
        for name in ["norm", "spectrum"] {
            let rep = super::super::run_suite(name, &ExperimentConfig::for_suite(name)).unwrap();
            assert!(rep.passed(), "{}", rep.summary());
        }
    }

    #[test]
    fn unknown_verdict_is_a_config_error() {
        let mut cfg = ExperimentConfig::for_suite("spectrum");
        cfg.set("spectrum.expect", "maybe | not | fredholm").unwrap();
        assert!(matches!(run_spectrum_suite(&cfg), Err(Error::Config(_))));
    }
}
