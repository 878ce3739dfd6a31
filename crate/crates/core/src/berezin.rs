//! Möbius maps, operator- and symbol-side Berezin transforms, and the
//! quantization and boundary probes built on them.

use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::geometry::WeightedSpace;
use crate::quadrature::{integrate_ball, QuadratureSpec};
use crate::symbol::BoundSymbol;
use crate::toeplitz::OperatorMatrix;

fn inner(w: &[Complex64], z: &[Complex64]) -> Complex64 {
    w.iter().zip(z).map(|(a, b)| a * b.conj()).sum()
}

fn norm2(z: &[Complex64]) -> f64 {
    z.iter().map(|v| v.norm_sqr()).sum()
}

fn check_inside(z: &[Complex64], what: &str) -> Result<()> {
    let s = norm2(z);
    if !(s < 1.0) {
        return Err(Error::domain(format!("{what} {z:?} is not in the open unit ball")));
    }
    Ok(())
}

/// The involutive automorphism `φ_z` of the ball exchanging `0` and `z`.
pub fn mobius(z: &[Complex64], w: &[Complex64]) -> Result<Vec<Complex64>> {
    if z.len() != w.len() {
        return Err(Error::domain("points of different dimension"));
    }
    check_inside(z, "centre")?;
    check_inside(w, "point")?;
    Ok(mobius_unchecked(z, w))
}

pub(crate) fn mobius_unchecked(z: &[Complex64], w: &[Complex64]) -> Vec<Complex64> {
    let z2 = norm2(z);
    if z2 == 0.0 {
        return w.iter().map(|v| -v).collect();
    }
    let wz = inner(w, z);
    let s = (1.0 - z2).sqrt();
    let denom = Complex64::new(1.0, 0.0) - wz;
    z.iter()
        .zip(w)
        .map(|(&zi, &wi)| {
            let p = zi * (wz / z2);
            (zi - p - (wi - p) * s) / denom
        })
        .collect()
}

/// Truncated Berezin transform with the kernel mass left out of the basis.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BerezinValue {
    pub value: Complex64,
    /// `1 - Σ |c_α|²` over the truncated normalized kernel coefficients.
    pub tail: f64,
}

/// `⟨M k_z, k_z⟩_μ` with `μ` the weight of the matrix basis.
pub fn berezin_of_operator(m: &OperatorMatrix, z: &[Complex64]) -> Result<BerezinValue> {
    let basis = &m.basis;
    if z.len() != basis.dim() {
        return Err(Error::domain(format!("point has {} coordinates, basis dimension is {}", z.len(), basis.dim())));
    }
    check_inside(z, "point")?;
    let n_exp = basis.dim() as f64 + basis.lambda() + 1.0;
    let scale = (1.0 - norm2(z)).powf(n_exp / 2.0);
    let coeffs: Vec<Complex64> = basis
        .indices()
        .iter()
        .zip(basis.norms())
        .map(|(a, &nrm)| {
            let mut c = Complex64::new(scale * nrm, 0.0);
            for (zj, &aj) in z.iter().zip(a.entries()) {
                c *= zj.conj().powu(aj);
            }
            c
        })
        .collect();
    let mass: f64 = coeffs.iter().map(|c| c.norm_sqr()).sum();
    let n = coeffs.len();
    let mut value = Complex64::new(0.0, 0.0);
    for col in 0..n {
        if coeffs[col] == Complex64::new(0.0, 0.0) {
            continue;
        }
        let mut s = Complex64::new(0.0, 0.0);
        for row in 0..n {
            s += coeffs[row].conj() * m.entries[(row, col)];
        }
        value += s * coeffs[col];
    }
    Ok(BerezinValue { value, tail: (1.0 - mass).max(0.0) })
}

/// `B_{m,μ}[g](z) = ∫ g∘φ_z dv_{m+μ}`; `shift = 0` is the Berezin transform of `g`.
pub fn berezin_of_symbol(g: &BoundSymbol, mu: f64, shift: u32, z: &[Complex64], spec: &QuadratureSpec) -> Result<Complex64> {
    if z.len() != g.point_len() {
        return Err(Error::domain(format!("point has {} coordinates, symbol expects {}", z.len(), g.point_len())));
    }
    check_inside(z, "point")?;
    let space = WeightedSpace::new(z.len(), mu + shift as f64)?;
    if g.is_constant() {
        return Ok(g.eval_unchecked(z));
    }
    let f = |w: &[Complex64]| g.eval_unchecked(&mobius_unchecked(z, w));
    integrate_ball(&f, space, spec)
}

/// Kernel form `∫ g |k_z|² dv_μ` of the same transform, for cross-checks.
pub fn berezin_of_symbol_kernel(g: &BoundSymbol, mu: f64, z: &[Complex64], spec: &QuadratureSpec) -> Result<Complex64> {
    check_inside(z, "point")?;
    let space = WeightedSpace::new(z.len(), mu)?;
    let n_exp = z.len() as f64 + mu + 1.0;
    let z2 = norm2(z);
    let f = |w: &[Complex64]| {
        let k = (1.0 - z2).powf(n_exp) / (Complex64::new(1.0, 0.0) - inner(w, z)).norm_sqr().powf(n_exp);
        g.eval_unchecked(w) * k
    };
    integrate_ball(&f, space, spec)
}

/// Orders that keep the Möbius-pulled integrand resolved at radius `|z|`.
pub fn spec_near_boundary(base: &QuadratureSpec, z: &[Complex64]) -> QuadratureSpec {
    let gap = 1.0 - norm2(z).sqrt();
    let mut spec = base.clone();
    let q = ((6.0 / gap.max(1e-6)).ceil() as usize).min(400);
    spec.radial_order = spec.radial_order.max(q);
    spec.angular_order = spec.angular_order.max(q.min(64));
    if spec.phase_points == 0 {
        let k = ((36.0 / gap.max(1e-6)).ceil() as usize).clamp(2 * spec.radial_order + 1, 4096);
        let cap = match z.len() {
            1 => 4096,
            2 => 160,
            _ => 40,
        };
        spec.phase_points = k.min(cap);
    }
    spec
}

/// One row of the quantization decay table.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuantizationRow {
    pub mu: f64,
    pub sup_error: f64,
}

/// `sup_grid |B_μ[c] - c|` for each `μ`.
pub fn quantization_probe(c: &BoundSymbol, mus: &[f64], grid: &[Vec<Complex64>], spec: &QuadratureSpec) -> Result<Vec<QuantizationRow>> {
    mus.iter()
        .map(|&mu| {
            let errs = grid
                .par_iter()
                .map(|z| {
                    let b = berezin_of_symbol(c, mu, 0, z, spec)?;
                    Ok((b - c.eval(z)?).norm())
                })
                .collect::<Result<Vec<f64>>>()?;
            Ok(QuantizationRow { mu, sup_error: errs.into_iter().fold(0.0, f64::max) })
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct BoundaryRow {
    pub radius: f64,
    pub error: f64,
}

/// `|f(z) - B_μ[f](z)|` along `z = r·direction` for the radii `1 - 2^{-j}`, `j = 1..=steps`.
pub fn boundary_vanishing_probe(
    f: &BoundSymbol,
    mu: f64,
    direction: &[Complex64],
    steps: u32,
    spec: &QuadratureSpec,
) -> Result<Vec<BoundaryRow>> {
    let len = norm2(direction).sqrt();
    if direction.len() != f.point_len() || len == 0.0 {
        return Err(Error::domain("direction must be a nonzero vector of the symbol's dimension"));
    }
    (1..=steps)
        .into_par_iter()
        .map(|j| {
            let r = 1.0 - 0.5f64.powi(j as i32);
            let z: Vec<Complex64> = direction.iter().map(|v| v * (r / len)).collect();
            let b = berezin_of_symbol(f, mu, 0, &z, &spec_near_boundary(spec, &z))?;
            Ok(BoundaryRow { radius: r, error: (f.eval(&z)? - b).norm() })
        })
        .collect()
}

/// True when every entry is strictly smaller than the one before.
pub fn strictly_decreasing(values: &[f64]) -> bool {
    values.windows(2).all(|w| w[1] < w[0])
}
