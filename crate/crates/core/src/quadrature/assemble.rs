use nalgebra::DMatrix;
use num_complex::Complex64;
use rayon::prelude::*;

use super::monte_carlo::{chunk_rng, radial_law, sample_ball, std_error, MC_CHUNK};
use super::{checked, Integrand, PolarRule, QuadratureSpec, Scheme, CHUNK};
use crate::error::{Error, Result};
use crate::geometry::TruncatedBasis;
use crate::linalg::CMatrix;

/// Matrix of `⟨f e_α, e_β⟩_λ` (row `β`, column `α`) over a truncated basis.
#[derive(Debug, Clone)]
pub struct MomentMatrix {
    pub values: CMatrix,
    /// Per-entry standard errors for Monte Carlo runs.
    pub std_errors: Option<DMatrix<f64>>,
    /// Trapezoid points per phase used by the deterministic rule.
    pub phase_points: usize,
}

/// Rows kept in each column. With `structural`, pairs whose index difference
/// lies outside the charge support of `f` are left as exact zeros.
fn kept_rows(f: &dyn Integrand, basis: &TruncatedBasis, structural: bool) -> Vec<Vec<usize>> {
    let n = basis.len();
    let charges = if structural { f.charges() } else { None };
    (0..n)
        .map(|col| match &charges {
            None => (0..n).collect(),
            Some(s) => {
                let alpha = basis.index(col).entries();
                (0..n)
                    .filter(|&row| {
                        let beta = basis.index(row).entries();
                        let diff: Vec<i32> = beta.iter().zip(alpha).map(|(&b, &a)| b as i32 - a as i32).collect();
                        s.contains(&diff)
                    })
                    .collect()
            }
        })
        .collect()
}

pub fn moment_matrix(
    f: &dyn Integrand,
    basis: &TruncatedBasis,
    spec: &QuadratureSpec,
    structural: bool,
) -> Result<MomentMatrix> {
    spec.validate()?;
    let kept = kept_rows(f, basis, structural);
    match spec.scheme {
        Scheme::GaussJacobiPolar => polar(f, basis, spec, &kept),
        Scheme::MonteCarlo => monte_carlo(f, basis, spec, &kept),
    }
}

struct NodeTransform {
    weight: f64,
    /// `powers[j * (2D+1) + p] = ρ_j^p`.
    powers: Vec<f64>,
    /// `G(k) = mean_θ f(ρ e^{iθ}) e^{i k·θ}` for `k ∈ [-D, D]^d`.
    spectrum: Vec<Complex64>,
}

fn transform_node(
    f: &dyn Integrand,
    moduli: &[f64],
    weight: f64,
    k: usize,
    cutoff: usize,
    phases: &[Complex64],
    twiddle: &[Complex64],
) -> Result<NodeTransform> {
    let d = moduli.len();
    let l = 2 * cutoff + 1;
    let mut z = vec![Complex64::new(0.0, 0.0); d];
    let total = k.pow(d as u32);
    let mut data = Vec::with_capacity(total);
    for flat in 0..total {
        let mut rem = flat;
        for j in (0..d).rev() {
            z[j] = phases[rem % k] * moduli[j];
            rem /= k;
        }
        data.push(checked(f, &z)?);
    }
    // Axis-by-axis DFT, axis 0 slowest; each pass swaps a K-axis for an L-axis.
    let mut shape = vec![k; d];
    for axis in 0..d {
        let outer: usize = shape[..axis].iter().product();
        let inner: usize = shape[axis + 1..].iter().product();
        let mut next = vec![Complex64::new(0.0, 0.0); outer * l * inner];
        for o in 0..outer {
            for (kk, row) in twiddle.chunks(k).enumerate() {
                let dst = &mut next[(o * l + kk) * inner..(o * l + kk + 1) * inner];
                for (m, &tw) in row.iter().enumerate() {
                    let src = &data[(o * k + m) * inner..(o * k + m + 1) * inner];
                    for (a, &b) in dst.iter_mut().zip(src) {
                        *a += tw * b;
                    }
                }
            }
        }
        data = next;
        shape[axis] = l;
    }
    let mut powers = Vec::with_capacity(d * l);
    for &r in moduli {
        let mut p = 1.0;
        for _ in 0..l {
            powers.push(p);
            p *= r;
        }
    }
    Ok(NodeTransform { weight, powers, spectrum: data })
}

fn polar(f: &dyn Integrand, basis: &TruncatedBasis, spec: &QuadratureSpec, kept: &[Vec<usize>]) -> Result<MomentMatrix> {
    let d = basis.dim();
    let cutoff = basis.cutoff() as usize;
    let l = 2 * cutoff + 1;
    let k = if spec.phase_points > 0 {
        spec.phase_points
    } else {
        match f.charges() {
            Some(s) => cutoff + s.max_abs() as usize + 1,
            None => cutoff + 2 * spec.radial_order + 1,
        }
    };
    let rule = PolarRule::new(d, basis.lambda(), spec.radial_order, spec.angular_order, k)?;
    let phases: Vec<Complex64> =
        (0..k).map(|m| Complex64::from_polar(1.0, std::f64::consts::TAU * m as f64 / k as f64)).collect();
    let twiddle: Vec<Complex64> = (0..l)
        .flat_map(|kk| {
            let freq = kk as i64 - cutoff as i64;
            (0..k).map(move |m| {
                let angle = std::f64::consts::TAU * ((freq * m as i64).rem_euclid(k as i64)) as f64 / k as f64;
                Complex64::from_polar(1.0 / k as f64, angle)
            })
        })
        .collect();

    let n = basis.len();
    let mut values = CMatrix::zeros(n, n);
    let indices: Vec<&[u32]> = basis.indices().iter().map(|a| a.entries()).collect();
    for start in (0..rule.len()).step_by(CHUNK) {
        let end = (start + CHUNK).min(rule.len());
        let nodes: Vec<NodeTransform> = (start..end)
            .into_par_iter()
            .map(|i| {
                let (r, w) = rule.node(i);
                transform_node(f, r, w, k, cutoff, &phases, &twiddle)
            })
            .collect::<Vec<_>>()
            .into_iter()
            .collect::<Result<_>>()?;
        values
            .as_mut_slice()
            .par_chunks_mut(n)
            .enumerate()
            .for_each(|(col, column)| {
                let alpha = indices[col];
                for &row in &kept[col] {
                    let beta = indices[row];
                    let mut g = 0;
                    for j in 0..d {
                        g = g * l + (alpha[j] as i64 - beta[j] as i64 + cutoff as i64) as usize;
                    }
                    let mut acc = Complex64::new(0.0, 0.0);
                    for node in &nodes {
                        let mut rho = node.weight;
                        for j in 0..d {
                            rho *= node.powers[j * l + (alpha[j] + beta[j]) as usize];
                        }
                        acc += node.spectrum[g] * rho;
                    }
                    column[row] += acc;
                }
            });
    }
    let norms = basis.norms();
    for col in 0..n {
        for row in 0..n {
            values[(row, col)] *= norms[row] * norms[col];
        }
    }
    Ok(MomentMatrix { values, std_errors: None, phase_points: k })
}

fn monte_carlo(
    f: &dyn Integrand,
    basis: &TruncatedBasis,
    spec: &QuadratureSpec,
    kept: &[Vec<usize>],
) -> Result<MomentMatrix> {
    let space = basis.space();
    let radial = radial_law(space)?;
    let n = basis.len();
    let d = basis.dim();
    let samples = spec.samples;
    let nchunks = samples.div_ceil(MC_CHUNK);
    let indices: Vec<&[u32]> = basis.indices().iter().map(|a| a.entries()).collect();
    let norms = basis.norms();
    let entries: Vec<(usize, usize)> =
        kept.iter().enumerate().flat_map(|(col, rows)| rows.iter().map(move |&row| (row, col))).collect();

    let mut sum = vec![Complex64::new(0.0, 0.0); entries.len()];
    let mut sq = vec![(0.0f64, 0.0f64); entries.len()];
    let batch = rayon::current_num_threads().max(1) * 2;
    let batch = batch.min(16);
    for first in (0..nchunks).step_by(batch) {
        let partials: Vec<Result<(Vec<Complex64>, Vec<(f64, f64)>)>> = (first..(first + batch).min(nchunks))
            .into_par_iter()
            .map(|c| {
                let mut rng = chunk_rng(spec.seed, c);
                let mut z = vec![Complex64::new(0.0, 0.0); d];
                let mut e = vec![Complex64::new(0.0, 0.0); n];
                let mut s = vec![Complex64::new(0.0, 0.0); entries.len()];
                let mut q = vec![(0.0, 0.0); entries.len()];
                for _ in c * MC_CHUNK..((c + 1) * MC_CHUNK).min(samples) {
                    sample_ball(&mut rng, &radial, &mut z);
                    let fv = checked(f, &z)?;
                    for (i, a) in indices.iter().enumerate() {
                        let mut m = Complex64::new(norms[i], 0.0);
                        for j in 0..d {
                            m *= z[j].powu(a[j]);
                        }
                        e[i] = m;
                    }
                    for (t, &(row, col)) in entries.iter().enumerate() {
                        let v = fv * e[col] * e[row].conj();
                        s[t] += v;
                        q[t].0 += v.re * v.re;
                        q[t].1 += v.im * v.im;
                    }
                }
                Ok((s, q))
            })
            .collect();
        for p in partials {
            let (s, q) = p?;
            for t in 0..entries.len() {
                sum[t] += s[t];
                sq[t].0 += q[t].0;
                sq[t].1 += q[t].1;
            }
        }
    }
    let nf = samples as f64;
    let mut values = CMatrix::zeros(n, n);
    let mut errors = DMatrix::<f64>::zeros(n, n);
    for (t, &(row, col)) in entries.iter().enumerate() {
        let mean = sum[t] / nf;
        values[(row, col)] = mean;
        errors[(row, col)] = std_error(nf, mean, sq[t].0, sq[t].1);
    }
    if values.iter().any(|v| !v.re.is_finite() || !v.im.is_finite()) {
        return Err(Error::domain("Monte Carlo moments are not finite"));
    }
    Ok(MomentMatrix { values, std_errors: Some(errors), phase_points: 0 })
}
