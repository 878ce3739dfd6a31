use nalgebra::{DMatrix, SymmetricEigen};

use crate::error::{Error, Result};
use crate::special::ln_beta_pos;

/// Nodes and weights for `∫₀¹ (1-t)^a t^b g(t) dt ≈ Σ w_i g(t_i)`.
#[derive(Debug, Clone, PartialEq)]
pub struct GaussJacobiRule {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl GaussJacobiRule {
    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn integrate(&self, g: impl Fn(f64) -> f64) -> f64 {
        self.nodes.iter().zip(&self.weights).map(|(&t, &w)| w * g(t)).sum()
    }

    /// Same nodes with weights scaled to total one.
    pub fn normalized(mut self) -> Self {
        let total: f64 = self.weights.iter().sum();
        for w in &mut self.weights {
            *w /= total;
        }
        self
    }
}

/// Golub–Welsch: eigen-decomposition of the Jacobi matrix of the weight
/// `(1-x)^a (1+x)^b` on `[-1, 1]`, mapped to `(0, 1)` by `t = (1+x)/2`.
/// Exact for polynomials of degree `<= 2q - 1`.
pub fn gauss_jacobi_rule(q: usize, a_exp: f64, b_exp: f64) -> Result<GaussJacobiRule> {
    if q == 0 {
        return Err(Error::domain("quadrature order must be at least 1"));
    }
    if !(a_exp > -1.0 && b_exp > -1.0) || !a_exp.is_finite() || !b_exp.is_finite() {
        return Err(Error::domain(format!("Jacobi exponents must exceed -1, got ({a_exp}, {b_exp})")));
    }
    let (a, b) = (a_exp, b_exp);
    let mut jacobi = DMatrix::<f64>::zeros(q, q);
    for k in 0..q {
        let kf = k as f64;
        let s = 2.0 * kf + a + b;
        jacobi[(k, k)] = if k == 0 {
            (b - a) / (a + b + 2.0)
        } else {
            (b * b - a * a) / (s * (s + 2.0))
        };
        if k + 1 < q {
            let j = kf + 1.0;
            let s = 2.0 * j + a + b;
            let beta = if k == 0 {
                4.0 * (1.0 + a) * (1.0 + b) / ((2.0 + a + b).powi(2) * (3.0 + a + b))
            } else {
                4.0 * j * (j + a) * (j + b) * (j + a + b) / (s * s * (s + 1.0) * (s - 1.0))
            };
            let off = beta.sqrt();
            jacobi[(k, k + 1)] = off;
            jacobi[(k + 1, k)] = off;
        }
    }
    let eig = SymmetricEigen::new(jacobi);
    let total = ln_beta_pos(a + 1.0, b + 1.0).exp();
    let mut pairs: Vec<(f64, f64)> = (0..q)
        .map(|i| {
            let x = eig.eigenvalues[i];
            let v0 = eig.eigenvectors[(0, i)];
            ((1.0 + x) / 2.0, total * v0 * v0)
        })
        .collect();
    pairs.sort_by(|l, r| l.0.total_cmp(&r.0));
    Ok(GaussJacobiRule {
        nodes: pairs.iter().map(|p| p.0).collect(),
        weights: pairs.iter().map(|p| p.1).collect(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::special::beta_fn;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    #[test]
    fn total_weight() {
        let r = gauss_jacobi_rule(1, 0.5, 2.0).unwrap();
        assert_relative_eq!(r.integrate(|_| 1.0), beta_fn(3.0, 1.5).unwrap(), max_relative = 1e-14);
        for lambda in [0.0, 0.5, 2.0] {
            let r = gauss_jacobi_rule(4, lambda, 0.0).unwrap();
            assert_relative_eq!(r.integrate(|_| 1.0), 1.0 / (lambda + 1.0), max_relative = 1e-14);
        }
    }

    #[test]
    fn cubic_moment() {
        let r = gauss_jacobi_rule(5, 1.5, 0.25).unwrap();
        let want = beta_fn(0.25 + 4.0, 2.5).unwrap();
        assert!((r.integrate(|t| t.powi(3)) - want).abs() < 1e-14);
    }

    #[test]
    fn nodes_inside_and_sorted() {
        let r = gauss_jacobi_rule(40, -0.5, 3.0).unwrap();
        assert!(r.nodes.windows(2).all(|w| w[0] < w[1]));
        assert!(r.nodes.iter().all(|&t| t > 0.0 && t < 1.0));
        assert!(r.weights.iter().all(|&w| w > 0.0));
    }

    #[test]
    fn rejects_bad_parameters() {
        assert!(gauss_jacobi_rule(0, 0.0, 0.0).is_err());
        assert!(gauss_jacobi_rule(3, -1.0, 0.0).is_err());
        assert!(gauss_jacobi_rule(3, 0.0, f64::NAN).is_err());
    }

    proptest! {
        #[test]
        fn exact_to_degree_2q_minus_1(q in 1usize..25, a in -0.9f64..4.0, b in -0.9f64..4.0) {
            let r = gauss_jacobi_rule(q, a, b).unwrap();
            for p in 0..2 * q {
                let want = beta_fn(b + 1.0 + p as f64, a + 1.0).unwrap();
                let got = r.integrate(|t| t.powi(p as i32));
                prop_assert!((got - want).abs() <= 1e-12 * want.max(1e-300).max(want.abs()) + 1e-15,
                    "q={} p={} got {} want {}", q, p, got, want);
            }
        }
    }
}
