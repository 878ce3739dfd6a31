//! Integration against `dv_λ` on balls: Gauss–Jacobi polar product rules and
//! seeded Monte Carlo.

mod assemble;
mod gauss_jacobi;
mod monte_carlo;
mod rules;

use std::fmt;

use num_complex::Complex64;

pub use assemble::{moment_matrix, MomentMatrix};
pub use gauss_jacobi::{gauss_jacobi_rule, GaussJacobiRule};
pub use monte_carlo::sample_ball;
pub use rules::{DirichletRule, PolarRule};

use crate::error::{Error, Result};
use crate::geometry::{MultiIndex, WeightedSpace};
use crate::symbol::{BoundSymbol, ChargeSet, ProductSymbol, Symbol};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Scheme {
    GaussJacobiPolar,
    MonteCarlo,
}

impl fmt::Display for Scheme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Scheme::GaussJacobiPolar => "gauss-jacobi",
            Scheme::MonteCarlo => "monte-carlo",
        })
    }
}

impl std::str::FromStr for Scheme {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "gauss-jacobi" | "gauss_jacobi" | "gj" => Ok(Scheme::GaussJacobiPolar),
            "monte-carlo" | "monte_carlo" | "mc" => Ok(Scheme::MonteCarlo),
            other => Err(Error::config(format!("unknown quadrature scheme '{other}'"))),
        }
    }
}

/// How to integrate. `phase_points == 0` lets each caller pick a trapezoid
/// size that is exact for the frequencies it needs.
#[derive(Debug, Clone, PartialEq)]
pub struct QuadratureSpec {
    pub scheme: Scheme,
    pub radial_order: usize,
    pub angular_order: usize,
    pub phase_points: usize,
    pub samples: usize,
    pub seed: u64,
}

impl Default for QuadratureSpec {
    fn default() -> Self {
        Self {
            scheme: Scheme::GaussJacobiPolar,
            radial_order: 16,
            angular_order: 16,
            phase_points: 0,
            samples: 200_000,
            seed: 0,
        }
    }
}

impl QuadratureSpec {
    /// Deterministic rule with orders large enough for polynomial symbols of
    /// moderate degree against monomials up to degree `cutoff`.
    pub fn for_cutoff(cutoff: u32) -> Self {
        let q = cutoff as usize + 8;
        Self { radial_order: q, angular_order: q, ..Self::default() }
    }

    pub fn monte_carlo(samples: usize, seed: u64) -> Self {
        Self { scheme: Scheme::MonteCarlo, samples, seed, ..Self::default() }
    }

    pub fn validate(&self) -> Result<()> {
        if self.radial_order == 0 || self.angular_order == 0 {
            return Err(Error::config("quadrature orders must be at least 1"));
        }
        if self.samples == 0 {
            return Err(Error::config("sample count must be at least 1"));
        }
        Ok(())
    }
}

impl fmt::Display for QuadratureSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.scheme {
            Scheme::GaussJacobiPolar => write!(
                f,
                "{} radial_order={} angular_order={} phase_points={}",
                self.scheme, self.radial_order, self.angular_order, self.phase_points
            ),
            Scheme::MonteCarlo => write!(f, "{} samples={} seed={}", self.scheme, self.samples, self.seed),
        }
    }
}

/// Value with a standard error (zero for deterministic rules).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Estimate {
    pub value: Complex64,
    pub std_error: f64,
}

/// Something that can be integrated over a ball.
pub trait Integrand: Sync {
    fn value(&self, z: &[Complex64]) -> Complex64;

    /// Phase charges, when known, for structural zeros and exact phase rules.
    fn charges(&self) -> Option<ChargeSet> {
        None
    }
}

impl<F: Fn(&[Complex64]) -> Complex64 + Sync> Integrand for F {
    fn value(&self, z: &[Complex64]) -> Complex64 {
        self(z)
    }
}

impl Integrand for BoundSymbol {
    fn value(&self, z: &[Complex64]) -> Complex64 {
        self.eval_unchecked(z)
    }

    fn charges(&self) -> Option<ChargeSet> {
        BoundSymbol::charges(self)
    }
}

impl Integrand for ProductSymbol {
    fn value(&self, z: &[Complex64]) -> Complex64 {
        self.eval_unchecked(z)
    }

    fn charges(&self) -> Option<ChargeSet> {
        Symbol::Product(self.clone()).charges()
    }
}

impl Integrand for Symbol {
    fn value(&self, z: &[Complex64]) -> Complex64 {
        self.eval_unchecked(z)
    }

    fn charges(&self) -> Option<ChargeSet> {
        Symbol::charges(self)
    }
}

pub(crate) fn checked(f: &dyn Integrand, z: &[Complex64]) -> Result<Complex64> {
    let v = f.value(z);
    if v.re.is_finite() && v.im.is_finite() {
        Ok(v)
    } else {
        Err(Error::NonFinite { point: z.to_vec() })
    }
}

/// Fixed-size work units; partial results are combined in unit order so the
/// outcome does not depend on the thread count.
pub(crate) const CHUNK: usize = 64;

/// `∫_{B^d} f dv_λ` with `dv_λ` normalized to total mass one.
pub fn integrate_ball(f: &dyn Integrand, space: WeightedSpace, spec: &QuadratureSpec) -> Result<Complex64> {
    Ok(integrate_ball_estimate(f, space, spec)?.value)
}

pub fn integrate_ball_estimate(f: &dyn Integrand, space: WeightedSpace, spec: &QuadratureSpec) -> Result<Estimate> {
    use rayon::prelude::*;

    spec.validate()?;
    match spec.scheme {
        Scheme::MonteCarlo => monte_carlo::integrate(f, space, spec),
        Scheme::GaussJacobiPolar => {
            let d = space.dim();
            let k = if spec.phase_points > 0 {
                spec.phase_points
            } else {
                match f.charges() {
                    Some(s) => s.max_abs() as usize + 1,
                    None => 2 * spec.radial_order + 1,
                }
            };
            let rule = PolarRule::new(d, space.lambda(), spec.radial_order, spec.angular_order, k)?;
            let phases: Vec<Complex64> =
                (0..k).map(|m| Complex64::from_polar(1.0, std::f64::consts::TAU * m as f64 / k as f64)).collect();
            let total_phase = k.pow(d as u32);
            let chunks: Vec<Result<Complex64>> = (0..rule.len().div_ceil(CHUNK))
                .into_par_iter()
                .map(|c| {
                    let mut acc = Complex64::new(0.0, 0.0);
                    let mut z = vec![Complex64::new(0.0, 0.0); d];
                    for i in c * CHUNK..((c + 1) * CHUNK).min(rule.len()) {
                        let (r, w) = rule.node(i);
                        let mut sum = Complex64::new(0.0, 0.0);
                        for flat in 0..total_phase {
                            let mut rem = flat;
                            for j in (0..d).rev() {
                                z[j] = phases[rem % k] * r[j];
                                rem /= k;
                            }
                            sum += checked(f, &z)?;
                        }
                        acc += sum * (w / total_phase as f64);
                    }
                    Ok(acc)
                })
                .collect();
            let mut total = Complex64::new(0.0, 0.0);
            for c in chunks {
                total += c?;
            }
            Ok(Estimate { value: total, std_error: 0.0 })
        }
    }
}

/// `⟨f z^α, z^β⟩_λ = ∫ f z^α conj(z^β) dv_λ`, with exact zeros where the charge
/// support of `f` rules the pairing out.
pub fn inner_product_weighted(
    f: &dyn Integrand,
    alpha: &MultiIndex,
    beta: &MultiIndex,
    space: WeightedSpace,
    spec: &QuadratureSpec,
) -> Result<Complex64> {
    let d = space.dim();
    if alpha.len() != d || beta.len() != d {
        return Err(Error::domain(format!("multi-indices {alpha}, {beta} do not match dimension {d}")));
    }
    let charges = f.charges();
    if let Some(s) = &charges {
        let diff: Vec<i32> = beta.entries().iter().zip(alpha.entries()).map(|(&b, &a)| b as i32 - a as i32).collect();
        if !s.contains(&diff) {
            return Ok(Complex64::new(0.0, 0.0));
        }
    }
    let (a, b) = (alpha.entries(), beta.entries());
    let g = |z: &[Complex64]| -> Complex64 {
        let mut m = f.value(z);
        for j in 0..z.len() {
            m *= z[j].powu(a[j]) * z[j].conj().powu(b[j]);
        }
        m
    };
    let mut spec = spec.clone();
    if spec.phase_points == 0 {
        let spread = a.iter().zip(b).map(|(x, y)| x.abs_diff(*y)).max().unwrap_or(0) as usize;
        spec.phase_points = match &charges {
            Some(s) => s.max_abs() as usize + spread + 1,
            None => 2 * spec.radial_order + spread + 1,
        };
    }
    integrate_ball(&g, space, &spec)
}
