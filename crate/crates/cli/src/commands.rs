use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use bergman_core::berezin::{berezin_of_operator, berezin_of_symbol, quantization_probe, spec_near_boundary};
use bergman_core::decomposition::{extract_all_blocks, verify_tensor_factorization};
use bergman_core::experiment::{self, write_matrix, MatrixMetadata, SUITES};
use bergman_core::spectral::{essential_spectrum_sample, fredholm_index_report, lifted_matrices, matrix_level_blocks, BoundarySchedule};
use bergman_core::symbol::parse_symbol;
use bergman_core::toeplitz::{semicommutator, SymbolProfile, TabulatedProfile, Profile, GAMMA_ORDER};
use bergman_core::{
    enumerate_basis, toeplitz_matrix, Assembly, BallGeometry, BoundSymbol, Complex64, Domain, Error, ExperimentConfig, GammaSequence, Level,
    MatrixSymbol, QuadratureSpec, Result, Scheme, Symbol,
};

use crate::args::{AssemblyArg, Cli, Command, GeometryArgs, QuadArgs};

/// Result of a subcommand: text for standard output and whether its checks passed.
pub struct Outcome {
    pub stdout: String,
    pub passed: bool,
}

impl Outcome {
    fn ok(stdout: String) -> Self {
        Self { stdout, passed: true }
    }
}

/// Tolerance for the decompose block check when --tol is not given.
const BLOCK_TOL: f64 = 1e-8;
/// Relative determinant threshold for spectrum verdicts when --tol is not given.
const SPECTRUM_TOL: f64 = 1e-6;
/// Factorization tolerance for decompose when --tol is not given.
const FACTOR_TOL: f64 = 1e-5;

/// Base configuration: defaults for `suite`, the config file, then global flags.
pub fn load_config(cli: &Cli, suite: &str) -> Result<ExperimentConfig> {
    let mut cfg = ExperimentConfig::for_suite(suite);
    if let Some(path) = &cli.config {
        let text = fs::read_to_string(path).map_err(|e| Error::Config(format!("cannot read '{}': {e}", path.display())))?;
        cfg.apply_text(&text)?;
    }
    if let Some(seed) = cli.seed {
        cfg.set("quad.seed", &seed.to_string())?;
    }
    Ok(cfg)
}

fn spec_for(cli: &Cli, cutoff: u32, quad: &QuadArgs) -> Result<QuadratureSpec> {
    let mut spec = load_config(cli, "matrix")?.quadrature(cutoff)?;
    if let Some(s) = &quad.scheme {
        spec.scheme = s.parse::<Scheme>()?;
    }
    if let Some(q) = quad.order {
        spec.radial_order = q;
        spec.angular_order = q;
    }
    if let Some(s) = quad.samples {
        spec.samples = s;
    }
    spec.validate()?;
    Ok(spec)
}

fn geometry(args: &GeometryArgs) -> Result<Option<BallGeometry>> {
    match (args.n, args.ell) {
        (None, None) if args.k.is_none() => Ok(None),
        (Some(n), Some(ell)) => Ok(Some(BallGeometry::new(n, ell, args.k.clone().unwrap_or_else(|| vec![ell]))?)),
        (Some(n), None) => {
            let k = args.k.clone().ok_or_else(|| Error::Config("--n needs --ell or --k".into()))?;
            Ok(Some(BallGeometry::new(n, k.iter().sum(), k)?))
        }
        _ => Err(Error::Config("--ell and --k need --n".into())),
    }
}

fn require_geometry(args: &GeometryArgs) -> Result<BallGeometry> {
    geometry(args)?.ok_or_else(|| Error::Config("this subcommand needs --n and --ell (or --k)".into()))
}

fn assembly(a: AssemblyArg) -> Assembly {
    match a {
        AssemblyArg::Auto => Assembly::Auto,
        AssemblyArg::Quadrature => Assembly::Quadrature,
    }
}

/// Fixed-point number with at most 12 decimals, trailing zeros removed.
pub fn number(v: f64) -> String {
    let s = format!("{v:.12}");
    let s = s.trim_end_matches('0').trim_end_matches('.');
    if s == "-0" { "0".into() } else { s.to_string() }
}

fn complex(v: Complex64) -> String {
    format!("{},{}", number(v.re), number(v.im))
}

fn parse_point(text: &str) -> Result<Vec<Complex64>> {
    text.split(',')
        .map(|s| {
            let t: String = s.chars().filter(|c| !c.is_whitespace()).collect();
            t.parse::<Complex64>().map_err(|_| Error::Config(format!("cannot read complex number '{}'", s.trim())))
        })
        .collect()
}

fn emit(out: &Option<PathBuf>, name: &str, contents: String) -> Result<String> {
    match out {
        Some(dir) => {
            fs::create_dir_all(dir)?;
            fs::write(dir.join(name), &contents)?;
            Ok(format!("wrote {}\n", dir.join(name).display()))
        }
        None => Ok(contents),
    }
}

/// Human-readable plan for `--dry-run`.
pub fn plan(cli: &Cli) -> Result<String> {
    let mut s = format!("plan: {:?}\n", cli.command);
    let _ = writeln!(s, "threads: {}", cli.threads.map_or("all cores".to_string(), |t| t.to_string()));
    if let Some(out) = &cli.out {
        let _ = writeln!(s, "output: {}", out.display());
    }
    if let Command::Suite { name, set } = &cli.command {
        let names: Vec<&str> = if name == "all" { SUITES.to_vec() } else { vec![name.as_str()] };
        for n in names {
            let cfg = suite_config(cli, n, set)?;
            let _ = writeln!(s, "[{n}]");
            s.push_str(&cfg.to_string());
        }
    }
    Ok(s)
}

fn suite_config(cli: &Cli, name: &str, set: &[String]) -> Result<ExperimentConfig> {
    if !SUITES.contains(&name) {
        return Err(Error::Config(format!("unknown suite '{name}' (expected one of {}, all)", SUITES.join(", "))));
    }
    let mut cfg = load_config(cli, name)?;
    for kv in set {
        let (k, v) = kv.split_once('=').ok_or_else(|| Error::Config(format!("--set expects KEY=VALUE, got '{kv}'")))?;
        cfg.set(k.trim(), v.trim())?;
    }
    cfg.validate()?;
    Ok(cfg)
}

pub fn run(cli: &Cli) -> Result<Outcome> {
    match &cli.command {
        Command::Parse { symbol, geometry: gargs } => {
            let parsed = parse_symbol(symbol)?;
            let mut s = format!("{parsed}\n");
            if let Some(g) = geometry(gargs)? {
                let bound = Symbol::from_parsed(parsed, &g)?;
                let class = match &bound {
                    Symbol::Plain(b) => format!("{:?}", b.classify()),
                    Symbol::Product(_) => "Product".to_string(),
                };
                let _ = writeln!(s, "class: {class}");
                let _ = writeln!(s, "torus-invariant: {}", bound.is_torus_invariant());
            }
            Ok(Outcome::ok(s))
        }
        Command::Matrix { symbol, d, geometry: gargs, lambda, cutoff, assembly: mode, quad } => {
            let (f, dim) = match geometry(gargs)? {
                Some(g) => (Symbol::parse(symbol, &g)?, g.n()),
                None => (Symbol::Plain(BoundSymbol::parse(symbol, Domain::Ball(*d))?), *d),
            };
            let spec = spec_for(cli, *cutoff, quad)?;
            let basis = enumerate_basis(dim, *cutoff, *lambda)?;
            let m = toeplitz_matrix(&f, &basis, &spec, assembly(*mode))?;
            let meta = MatrixMetadata { symbol: f.to_string(), spec };
            match &cli.out {
                Some(dir) => {
                    write_matrix(dir, "matrix", &m, &meta)?;
                    Ok(Outcome::ok(format!("{m}\nwrote {}\n", dir.join("matrix.csv").display())))
                }
                None => Ok(Outcome::ok(experiment::matrix_csv(&m))),
            }
        }
        Command::Gamma { k, lambda, profile, table, step, rmax, order } => {
            let order = order.unwrap_or(GAMMA_ORDER);
            let seq = match (profile, table) {
                (Some(text), None) => {
                    let p = SymbolProfile::new(&BoundSymbol::parse(text, Domain::Reinhardt(k.clone()))?)?;
                    GammaSequence::compute(&p, k, *lambda, *rmax, order)?
                }
                (None, Some(path)) => {
                    let p = TabulatedProfile::from_csv(&fs::read_to_string(path)?, *step)?;
                    if p.groups() != k.len() {
                        return Err(Error::Config("a tabulated profile has one group; use --k with a single entry".into()));
                    }
                    GammaSequence::compute(&p, k, *lambda, *rmax, order)?
                }
                _ => return Err(Error::Config("give exactly one of --profile or --table".into())),
            };
            let mut s = String::from("rho,re_gamma,im_gamma\n");
            for (level, v) in &seq.values {
                let rho: Vec<String> = level.rho().iter().map(|x| x.to_string()).collect();
                let _ = writeln!(s, "{},{}", rho.join(";"), complex(*v));
            }
            Ok(Outcome::ok(emit(&cli.out, "gamma.csv", s)?))
        }
        Command::Norm { symbol, d, mu, cutoff, assembly: mode, quad } => {
            let f = Symbol::Plain(BoundSymbol::parse(symbol, Domain::Ball(*d))?);
            let spec = spec_for(cli, *cutoff, quad)?;
            let m = toeplitz_matrix(&f, &enumerate_basis(*d, *cutoff, *mu)?, &spec, assembly(*mode))?;
            Ok(Outcome::ok(format!("{}\n", number(m.norm()))))
        }
        Command::Decompose { symbol, geometry: gargs, lambda, cutoff, levels, quad } => {
            let g = require_geometry(gargs)?;
            let f = Symbol::parse(symbol, &g)?;
            let spec = spec_for(cli, *cutoff, quad)?;
            let m = toeplitz_matrix(&f, &enumerate_basis(g.n(), *cutoff, *lambda)?, &spec, Assembly::Auto)?;
            let levels = levels.unwrap_or(*cutoff).min(*cutoff);
            let blocks = extract_all_blocks(&m, &g, cli.tol.unwrap_or(BLOCK_TOL))?;
            let mut s = String::from("rho,mu,hdim,block_norm,off_block_mass,kronecker_defect\n");
            for b in blocks.iter().filter(|b| b.level.total() <= levels) {
                let rho: Vec<String> = b.level.rho().iter().map(|x| x.to_string()).collect();
                let _ = writeln!(s, "{},{},{},{:e},{:e},{:e}", rho.join(";"), b.mu, b.hdim, b.norm(), b.off_block_mass, b.kronecker_defect);
            }
            let mut passed = true;
            let mut text = emit(&cli.out, "blocks.csv", s)?;
            if let Symbol::Product(p) = &f {
                let tol = cli.tol.unwrap_or(FACTOR_TOL);
                let mut worst: f64 = 0.0;
                for l in Level::up_to(g.m(), levels) {
                    let r = verify_tensor_factorization(p.a(), p.c(), &g, *lambda, &l, *cutoff, &spec, tol)?;
                    worst = worst.max(r.max_deviation);
                    passed &= r.passed;
                }
                let _ = writeln!(text, "{} factorization: worst deviation {worst:e} (tol {tol:e})", if passed { "PASS" } else { "FAIL" });
            }
            Ok(Outcome { stdout: text, passed })
        }
        Command::Berezin { symbol, d, mu, point, cutoff, quad } => {
            let g = BoundSymbol::parse(symbol, Domain::Ball(*d))?;
            let z = parse_point(point)?;
            let base = spec_for(cli, cutoff.unwrap_or(24), quad)?;
            let sym = berezin_of_symbol(&g, *mu, 0, &z, &spec_near_boundary(&base, &z))?;
            let mut s = String::from("side,re,im,tail\n");
            let _ = writeln!(s, "symbol,{},0", complex(sym));
            if let Some(dc) = cutoff {
                let m = toeplitz_matrix(&Symbol::Plain(g.clone()), &enumerate_basis(*d, *dc, *mu)?, &base, Assembly::Auto)?;
                let op = berezin_of_operator(&m, &z)?;
                let _ = writeln!(s, "operator,{},{:e}", complex(op.value), op.tail);
            }
            Ok(Outcome::ok(emit(&cli.out, "berezin.csv", s)?))
        }
        Command::Quantize { c1, c2, d, mus, cutoff, quad } => {
            let a = BoundSymbol::parse(c1, Domain::Ball(*d))?;
            let b = match c2 {
                Some(t) => BoundSymbol::parse(t, Domain::Ball(*d))?,
                None => a.clone(),
            };
            let spec = spec_for(cli, *cutoff, quad)?;
            let origin = vec![vec![Complex64::new(0.0, 0.0); *d]];
            let errs = quantization_probe(&a, mus, &origin, &spec)?;
            let mut s = String::from("mu,semicommutator_norm,berezin_error_at_origin\n");
            for (mu, e) in mus.iter().zip(&errs) {
                let n = semicommutator(&a, &b, &enumerate_basis(*d, *cutoff, *mu)?, &spec)?.norm();
                let _ = writeln!(s, "{mu},{n:e},{:e}", e.sup_error);
            }
            Ok(Outcome::ok(emit(&cli.out, "quantization.csv", s)?))
        }
        Command::Spectrum { symbol, d, profile, k, lambda, levels, random, steps } => {
            let c = MatrixSymbol::parse(symbol, *d)?;
            let schedule = BoundarySchedule::new(*d, *random, *steps, cli.seed.unwrap_or(0));
            let gamma = match profile {
                Some(text) => {
                    let p = SymbolProfile::new(&BoundSymbol::parse(text, Domain::Reinhardt(k.clone()))?)?;
                    Some(GammaSequence::compute(&p, k, *lambda, *levels, GAMMA_ORDER)?)
                }
                None => None,
            };
            let sample = essential_spectrum_sample(&c, gamma.as_ref(), &schedule, cli.tol.unwrap_or(SPECTRUM_TOL))?;
            let mut text = emit(&cli.out, "spectrum.csv", sample.to_csv())?;
            let _ = writeln!(
                text,
                "verdict: {} (min |det| {:e}, sup |det| {:e})",
                if sample.fredholm { "Fredholm" } else { "not Fredholm" },
                sample.min_abs,
                sample.sup_abs
            );
            Ok(Outcome::ok(text))
        }
        Command::Fredholm { symbol, geometry: gargs, lambda, cutoff, random, steps } => {
            let g = require_geometry(gargs)?;
            let d = g.complement_dim();
            let c = MatrixSymbol::parse(symbol, d)?;
            let schedule = BoundarySchedule::new(d, *random, *steps, cli.seed.unwrap_or(0));
            let sample = essential_spectrum_sample(&c, None, &schedule, cli.tol.unwrap_or(SPECTRUM_TOL))?;
            let spec = load_config(cli, "matrix")?.quadrature(*cutoff)?;
            let entries = lifted_matrices(&c, &g, &enumerate_basis(g.n(), *cutoff, *lambda)?, &spec)?;
            let blocks = matrix_level_blocks(&entries, c.size(), &g, BLOCK_TOL, *cutoff)?;
            let report = fredholm_index_report(&sample, &blocks)?;
            Ok(Outcome::ok(emit(&cli.out, "index.txt", report.to_text())?))
        }
        Command::Suite { name, set } => run_suites(cli, name, set),
    }
}

fn run_suites(cli: &Cli, name: &str, set: &[String]) -> Result<Outcome> {
    let names: Vec<&str> = if name == "all" { SUITES.to_vec() } else { vec![name] };
    let configs = names.iter().map(|n| suite_config(cli, n, set)).collect::<Result<Vec<_>>>()?;
    let base = cli.out.clone().unwrap_or_else(|| PathBuf::from("out"));
    let mut text = String::new();
    let mut passed = true;
    for (n, cfg) in names.iter().zip(&configs) {
        eprintln!("[{n}] effective configuration:\n{cfg}");
        let report = experiment::run_suite(n, cfg)?;
        let dir: PathBuf = if names.len() == 1 { base.clone() } else { Path::new(&base).join(n) };
        report.write_to(&dir)?;
        text.push_str(&report.summary());
        passed &= report.passed();
    }
    Ok(Outcome { stdout: text, passed })
}
