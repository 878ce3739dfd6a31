use crate::error::{Error, Result};
use crate::quadrature::gauss_jacobi::gauss_jacobi_rule;
use crate::special::ln_beta_pos;

/// Tensor rule for expectations over a Dirichlet distribution built by
/// stick-breaking. `params` has `m + 1` entries; nodes list the first `m`
/// components, the last one being the remainder `1 - Σ s_j`.
#[derive(Debug, Clone)]
pub struct DirichletRule {
    m: usize,
    points: Vec<f64>,
    weights: Vec<f64>,
}

impl DirichletRule {
    pub fn new(params: &[f64], order: usize) -> Result<Self> {
        if params.is_empty() {
            return Err(Error::domain("a Dirichlet rule needs at least one parameter"));
        }
        if params.iter().any(|&p| !(p > 0.0) || !p.is_finite()) {
            return Err(Error::domain(format!("Dirichlet parameters must be positive, got {params:?}")));
        }
        let m = params.len() - 1;
        let mut points = Vec::new();
        let mut weights = vec![1.0];
        let mut npts = 1;
        let mut prefix: Vec<f64> = vec![1.0];
        for j in 0..m {
            let rest: f64 = params[j + 1..].iter().sum();
            let rule = gauss_jacobi_rule(order, rest - 1.0, params[j] - 1.0)?;
            let scale = (-ln_beta_pos(params[j], rest)).exp();
            let mut next_points = Vec::with_capacity(npts * rule.len() * (j + 1));
            let mut next_weights = Vec::with_capacity(npts * rule.len());
            let mut next_prefix = Vec::with_capacity(npts * rule.len());
            for p in 0..npts {
                for (&v, &w) in rule.nodes.iter().zip(&rule.weights) {
                    next_points.extend_from_slice(&points[p * j..p * j + j]);
                    next_points.push(prefix[p] * v);
                    next_weights.push(weights[p] * w * scale);
                    next_prefix.push(prefix[p] * (1.0 - v));
                }
            }
            points = next_points;
            weights = next_weights;
            prefix = next_prefix;
            npts *= rule.len();
        }
        Ok(Self { m, points, weights })
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    /// Number of listed components per node.
    pub fn components(&self) -> usize {
        self.m
    }

    pub fn node(&self, i: usize) -> (&[f64], f64) {
        (&self.points[i * self.m..(i + 1) * self.m], self.weights[i])
    }

    pub fn expect<T>(&self, mut g: impl FnMut(&[f64]) -> T) -> T
    where
        T: std::ops::Mul<f64, Output = T> + std::ops::Add<Output = T> + Default,
    {
        let mut acc = T::default();
        for i in 0..self.len() {
            let (s, w) = self.node(i);
            acc = acc + g(s) * w;
        }
        acc
    }
}

/// Modulus nodes for `dv_λ` on `B^d`: each node is `(√(t s_1), ..., √(t s_d))`
/// with `t = |z|² ~ Beta(d, λ+1)` and `s` uniform on the simplex. Phases are
/// integrated separately by `phase_points`-point trapezoid rules.
#[derive(Debug, Clone)]
pub struct PolarRule {
    dim: usize,
    moduli: Vec<f64>,
    weights: Vec<f64>,
    phase_points: usize,
}

impl PolarRule {
    pub fn new(dim: usize, lambda: f64, radial_order: usize, angular_order: usize, phase_points: usize) -> Result<Self> {
        if dim == 0 {
            return Err(Error::domain("ball dimension must be positive"));
        }
        if phase_points == 0 {
            return Err(Error::domain("phase rule needs at least one point"));
        }
        let radial = gauss_jacobi_rule(radial_order, lambda, dim as f64 - 1.0)?.normalized();
        let sphere = DirichletRule::new(&vec![1.0; dim], angular_order)?;
        let mut moduli = Vec::with_capacity(radial.len() * sphere.len() * dim);
        let mut weights = Vec::with_capacity(radial.len() * sphere.len());
        for (&t, &wt) in radial.nodes.iter().zip(&radial.weights) {
            for i in 0..sphere.len() {
                let (s, ws) = sphere.node(i);
                let mut rest = 1.0;
                for &sj in s {
                    moduli.push((t * sj).sqrt());
                    rest -= sj;
                }
                moduli.push((t * rest.max(0.0)).sqrt());
                weights.push(wt * ws);
            }
        }
        Ok(Self { dim, moduli, weights, phase_points })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    pub fn phase_points(&self) -> usize {
        self.phase_points
    }

    pub fn node(&self, i: usize) -> (&[f64], f64) {
        (&self.moduli[i * self.dim..(i + 1) * self.dim], self.weights[i])
    }
}
