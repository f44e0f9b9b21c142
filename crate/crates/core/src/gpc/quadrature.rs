//! Gauss rules under the family's probability density.
//!
//! Nodes come from the eigenvalues of the Jacobi matrix of the
//! orthonormal recurrence, are polished with Newton steps, and the weights
//! use the closed forms for each family. Weights sum to one.

use nalgebra::{DMatrix, SymmetricEigen};

use super::family::{FamilyKind, PolynomialFamily};
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct QuadratureRule {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl QuadratureRule {
    /// `Σ wᵢ g(zᵢ)`.
    pub fn integrate(&self, g: impl Fn(f64) -> f64) -> f64 {
        self.nodes
            .iter()
            .zip(&self.weights)
            .map(|(&z, &w)| w * g(z))
            .sum()
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }
}

/// Orthonormal reference recurrence `b_{k+1} p_{k+1} = x p_k − b_k p_{k−1}`.
#[derive(Clone, Copy)]
enum Reference {
    /// `b_k = √k`, weight `e^{−x²/2}/√(2π)`.
    Hermite,
    /// `b_k = k/√(4k²−1)`, weight `1/2` on `[−1, 1]`.
    Legendre,
}

impl Reference {
    fn off_diagonal(self, k: usize) -> f64 {
        if k == 0 {
            return 0.0;
        }
        let kf = k as f64;
        match self {
            Reference::Hermite => kf.sqrt(),
            Reference::Legendre => kf / (4.0 * kf * kf - 1.0).sqrt(),
        }
    }

    /// `(p_m(x), p_{m−1}(x))` for the orthonormal polynomials.
    fn eval_pair(self, m: usize, x: f64) -> (f64, f64) {
        let mut prev = 0.0;
        let mut cur = 1.0;
        for k in 0..m {
            let next = (x * cur - self.off_diagonal(k) * prev) / self.off_diagonal(k + 1);
            prev = cur;
            cur = next;
        }
        (cur, prev)
    }

    fn rule(self, m: usize) -> (Vec<f64>, Vec<f64>) {
        let jacobi = DMatrix::from_fn(m, m, |i, j| {
            if i + 1 == j {
                self.off_diagonal(j)
            } else if j + 1 == i {
                self.off_diagonal(i)
            } else {
                0.0
            }
        });
        let mut nodes: Vec<f64> = SymmetricEigen::new(jacobi)
            .eigenvalues
            .iter()
            .copied()
            .collect();
        nodes.sort_by(|a, b| a.total_cmp(b));

        let mf = m as f64;
        let mut weights = Vec::with_capacity(m);
        for x in &mut nodes {
            for _ in 0..3 {
                let (pm, pm1) = self.eval_pair(m, *x);
                let deriv = match self {
                    Reference::Hermite => mf.sqrt() * pm1,
                    // (1 − x²) P_m' = m (P_{m−1} − x P_m), P_k = p_k / √(2k+1)
                    Reference::Legendre => {
                        let (sm, sm1) = ((2.0 * mf + 1.0).sqrt(), (2.0 * mf - 1.0).sqrt());
                        sm * mf * (pm1 / sm1 - *x * pm / sm) / (1.0 - *x * *x)
                    }
                };
                if deriv == 0.0 {
                    break;
                }
                let delta = pm / deriv;
                *x -= delta;
                if delta.abs() <= 1e-16 * x.abs().max(1.0) {
                    break;
                }
            }
            let (_, pm1) = self.eval_pair(m, *x);
            let w = match self {
                Reference::Hermite => 1.0 / (mf * pm1 * pm1),
                Reference::Legendre => {
                    let p_std = pm1 / (2.0 * mf - 1.0).sqrt();
                    (1.0 - *x * *x) / (mf * mf * p_std * p_std)
                }
            };
            weights.push(w);
        }
        (nodes, weights)
    }
}

/// `m`-point Gauss rule exact for polynomials of degree `2m − 1`.
pub fn quadrature(family: &PolynomialFamily, m: usize) -> Result<QuadratureRule> {
    if m == 0 {
        return Err(Error::param("m", "quadrature needs at least one node"));
    }
    let rule = match family.kind() {
        FamilyKind::HermiteGaussian { sigma } => {
            let (nodes, weights) = Reference::Hermite.rule(m);
            QuadratureRule {
                nodes: nodes.into_iter().map(|x| sigma * x).collect(),
                weights,
            }
        }
        FamilyKind::LegendreUniform { a, b } => {
            let (nodes, weights) = Reference::Legendre.rule(m);
            let (mid, half) = (0.5 * (a + b), 0.5 * (b - a));
            QuadratureRule {
                nodes: nodes.into_iter().map(|x| mid + half * x).collect(),
                weights,
            }
        }
    };
    Ok(rule)
}
