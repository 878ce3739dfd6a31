use num_complex::Complex64;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Beta, Distribution, StandardNormal};
use rayon::prelude::*;

use super::{checked, Estimate, Integrand, QuadratureSpec};
use crate::error::{Error, Result};
use crate::geometry::WeightedSpace;

/// Samples per independent RNG stream.
pub(crate) const MC_CHUNK: usize = 4096;

pub(crate) fn chunk_rng(seed: u64, chunk: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(chunk as u64);
    rng
}

/// Draw a point from the normalized `dv_λ` on `B^d` into `z`.
pub fn sample_ball<R: Rng + ?Sized>(rng: &mut R, radial: &Beta<f64>, z: &mut [Complex64]) {
    loop {
        let mut norm2 = 0.0;
        for w in z.iter_mut() {
            let re: f64 = StandardNormal.sample(rng);
            let im: f64 = StandardNormal.sample(rng);
            *w = Complex64::new(re, im);
            norm2 += re * re + im * im;
        }
        if norm2 > 0.0 {
            let t: f64 = radial.sample(rng);
            let scale = (t / norm2).sqrt();
            for w in z.iter_mut() {
                *w *= scale;
            }
            return;
        }
    }
}

pub(crate) fn radial_law(space: WeightedSpace) -> Result<Beta<f64>> {
    Beta::new(space.dim() as f64, space.lambda() + 1.0)
        .map_err(|e| Error::domain(format!("radial law for {space:?}: {e}")))
}

#[derive(Default, Clone, Copy)]
struct Moments {
    sum: Complex64,
    sq_re: f64,
    sq_im: f64,
}

pub(crate) fn integrate(f: &dyn Integrand, space: WeightedSpace, spec: &QuadratureSpec) -> Result<Estimate> {
    let radial = radial_law(space)?;
    let n = spec.samples;
    let chunks: Vec<Result<Moments>> = (0..n.div_ceil(MC_CHUNK))
        .into_par_iter()
        .map(|c| {
            let mut rng = chunk_rng(spec.seed, c);
            let mut z = vec![Complex64::new(0.0, 0.0); space.dim()];
            let mut m = Moments::default();
            for _ in c * MC_CHUNK..((c + 1) * MC_CHUNK).min(n) {
                sample_ball(&mut rng, &radial, &mut z);
                let v = checked(f, &z)?;
                m.sum += v;
                m.sq_re += v.re * v.re;
                m.sq_im += v.im * v.im;
            }
            Ok(m)
        })
        .collect();
    let mut total = Moments::default();
    for c in chunks {
        let c = c?;
        total.sum += c.sum;
        total.sq_re += c.sq_re;
        total.sq_im += c.sq_im;
    }
    let nf = n as f64;
    let mean = total.sum / nf;
    Ok(Estimate { value: mean, std_error: std_error(nf, mean, total.sq_re, total.sq_im) })
}

/// Standard error of a complex sample mean from raw power sums.
pub(crate) fn std_error(n: f64, mean: Complex64, sq_re: f64, sq_im: f64) -> f64 {
    if n < 2.0 {
        return f64::INFINITY;
    }
    let var_re = ((sq_re / n - mean.re * mean.re) * n / (n - 1.0)).max(0.0);
    let var_im = ((sq_im / n - mean.im * mean.im) * n / (n - 1.0)).max(0.0);
    ((var_re + var_im) / n).sqrt()
}
