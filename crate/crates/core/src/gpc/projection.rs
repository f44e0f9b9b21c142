//! Orthogonal projection `P_N f = Σ f̂ₖ Φₖ` with `f̂ₖ = E[f Φₖ] / γₖ`.

use super::family::PolynomialFamily;
use super::quadrature::{quadrature, QuadratureRule};
use crate::error::{Error, Result};

/// Default node count for projections: exact when `f` is a polynomial of
/// degree up to `3N + 5`.
pub fn projection_nodes(order: usize) -> usize {
    2 * order + 3
}

pub fn project(
    f: impl Fn(f64) -> f64,
    family: &PolynomialFamily,
    order: usize,
) -> Result<Vec<f64>> {
    project_with_nodes(f, family, order, projection_nodes(order))
}

pub fn project_with_nodes(
    f: impl Fn(f64) -> f64,
    family: &PolynomialFamily,
    order: usize,
    nodes: usize,
) -> Result<Vec<f64>> {
    let family = family.with_max_degree(order);
    let rule = quadrature(&family, nodes)?;
    let mut coeffs = vec![0.0; order + 1];
    for (&z, &w) in rule.nodes.iter().zip(&rule.weights) {
        let fz = f(z);
        if !fz.is_finite() {
            return Err(Error::param(
                "f",
                format!("non-finite value at quadrature node {z}"),
            ));
        }
        for (c, phi) in coeffs.iter_mut().zip(family.eval_all(z)) {
            *c += w * fz * phi;
        }
    }
    for (k, c) in coeffs.iter_mut().enumerate() {
        let gamma = family.norm_factor_unchecked(k);
        *c = if gamma > 0.0 { *c / gamma } else { 0.0 };
    }
    Ok(coeffs)
}

/// `Σ cₖ Φₖ(z)`.
pub fn evaluate_expansion(coeffs: &[f64], family: &PolynomialFamily, z: f64) -> f64 {
    let mut phi = vec![0.0; coeffs.len()];
    family.eval_all_into(z, &mut phi);
    coeffs.iter().zip(&phi).map(|(c, p)| c * p).sum()
}

/// Weighted L² distance between `f` and the expansion, measured with `oracle`.
pub fn weighted_l2_error(
    f: impl Fn(f64) -> f64,
    coeffs: &[f64],
    family: &PolynomialFamily,
    oracle: &QuadratureRule,
) -> f64 {
    oracle
        .integrate(|z| {
            let d = f(z) - evaluate_expansion(coeffs, family, z);
            d * d
        })
        .sqrt()
}

/// One row of a projection-error table.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConvergenceRow {
    pub order: usize,
    pub error: f64,
}

/// Projection errors over several orders against a fixed oracle rule.
pub fn convergence_table(
    f: impl Fn(f64) -> f64 + Copy,
    family: &PolynomialFamily,
    orders: &[usize],
    oracle_nodes: usize,
) -> Result<Vec<ConvergenceRow>> {
    let oracle = quadrature(family, oracle_nodes)?;
    orders
        .iter()
        .map(|&order| {
            let fam = family.with_max_degree(order);
            let coeffs = project(f, &fam, order)?;
            Ok(ConvergenceRow {
                order,
                error: weighted_l2_error(f, &coeffs, &fam, &oracle),
            })
        })
        .collect()
}

/// Total-degree multi-index set `{i ∈ ℕᵈ : |i| ≤ N}` in graded order.
#[derive(Debug, Clone, PartialEq)]
pub struct MultiIndexSet {
    dim: usize,
    order: usize,
    indices: Vec<Vec<usize>>,
}

impl MultiIndexSet {
    pub fn total_degree(dim: usize, order: usize) -> Result<Self> {
        if dim == 0 {
            return Err(Error::param("dim", "must be at least 1"));
        }
        let mut indices = Vec::new();
        for total in 0..=order {
            let mut current = vec![0; dim];
            push_compositions(total, 0, &mut current, &mut indices);
        }
        Ok(Self {
            dim,
            order,
            indices,
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn indices(&self) -> &[Vec<usize>] {
        &self.indices
    }

    pub fn len(&self) -> usize {
        self.indices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.indices.is_empty()
    }
}

/// Compositions of `remaining` into the slots from `slot` on, first slot largest first.
fn push_compositions(
    remaining: usize,
    slot: usize,
    current: &mut Vec<usize>,
    out: &mut Vec<Vec<usize>>,
) {
    if slot + 1 == current.len() {
        current[slot] = remaining;
        out.push(current.clone());
        return;
    }
    for k in (0..=remaining).rev() {
        current[slot] = k;
        push_compositions(remaining - k, slot + 1, current, out);
    }
    current[slot] = 0;
}

/// Tensor-product basis `Φᵢ(z) = Π Φ_{iₖ}(zₖ)` over independent inputs.
#[derive(Debug, Clone)]
pub struct TensorBasis {
    families: Vec<PolynomialFamily>,
    set: MultiIndexSet,
}

impl TensorBasis {
    pub fn new(families: Vec<PolynomialFamily>, order: usize) -> Result<Self> {
        let set = MultiIndexSet::total_degree(families.len(), order)?;
        let families = families
            .into_iter()
            .map(|f| f.with_max_degree(order))
            .collect();
        Ok(Self { families, set })
    }

    pub fn index_set(&self) -> &MultiIndexSet {
        &self.set
    }

    pub fn len(&self) -> usize {
        self.set.len()
    }

    pub fn is_empty(&self) -> bool {
        self.set.is_empty()
    }

    pub fn eval(&self, k: usize, z: &[f64]) -> Result<f64> {
        let idx = self.set.indices.get(k).ok_or(Error::OutOfRange {
            name: "basis index",
            index: k,
            max: self.set.len().saturating_sub(1),
        })?;
        if z.len() != self.families.len() {
            return Err(Error::LengthMismatch {
                expected: self.families.len(),
                actual: z.len(),
            });
        }
        Ok(idx
            .iter()
            .zip(&self.families)
            .zip(z)
            .map(|((&d, fam), &zk)| fam.eval_unchecked(d, zk))
            .product())
    }

    /// `γᵢ = Π γ_{iₖ}`.
    pub fn norm_factor(&self, k: usize) -> f64 {
        self.set.indices[k]
            .iter()
            .zip(&self.families)
            .map(|(&d, fam)| fam.norm_factor_unchecked(d))
            .product()
    }

    /// Projection by tensor-product Gauss quadrature with `nodes` points per dimension.
    pub fn project(&self, f: impl Fn(&[f64]) -> f64, nodes: usize) -> Result<Vec<f64>> {
        let rules = self
            .families
            .iter()
            .map(|fam| quadrature(fam, nodes))
            .collect::<Result<Vec<_>>>()?;
        let d = self.families.len();
        let mut coeffs = vec![0.0; self.len()];
        let mut counter = vec![0usize; d];
        let mut z = vec![0.0; d];
        loop {
            let mut weight = 1.0;
            for k in 0..d {
                z[k] = rules[k].nodes[counter[k]];
                weight *= rules[k].weights[counter[k]];
            }
            let fz = f(&z);
            if !fz.is_finite() {
                return Err(Error::param("f", "non-finite value at a quadrature node"));
            }
            for (c, idx) in coeffs.iter_mut().zip(&self.set.indices) {
                let phi: f64 = idx
                    .iter()
                    .zip(&self.families)
                    .zip(&z)
                    .map(|((&deg, fam), &zk)| fam.eval_unchecked(deg, zk))
                    .product();
                *c += weight * fz * phi;
            }
            // odometer increment
            let mut k = 0;
            loop {
                if k == d {
                    for (i, c) in coeffs.iter_mut().enumerate() {
                        let gamma = self.norm_factor(i);
                        *c = if gamma > 0.0 { *c / gamma } else { 0.0 };
                    }
                    return Ok(coeffs);
                }
                counter[k] += 1;
                if counter[k] < nodes {
                    break;
                }
                counter[k] = 0;
                k += 1;
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn binomial(n: usize, k: usize) -> usize {
        (1..=k).fold(1, |acc, i| acc * (n + 1 - i) / i)
    }

    #[test]
    fn identity_on_hermite() {
        let fam = PolynomialFamily::hermite(1.0, 4).unwrap();
        let c = project(|z| z, &fam, 4).unwrap();
        assert!((c[1] - 1.0).abs() < 1e-14);
        for (k, v) in c.iter().enumerate() {
            if k != 1 {
                assert!(v.abs() < 1e-14);
            }
        }
    }

    #[test]
    fn polynomials_are_reproduced() {
        let fam = PolynomialFamily::legendre(-1.0, 2.0, 3).unwrap();
        let f = |z: f64| 0.5 - 2.0 * z + 0.25 * z * z * z;
        let c = project(f, &fam, 3).unwrap();
        let rule = quadrature(&fam, 7).unwrap();
        for &z in &rule.nodes {
            assert!((evaluate_expansion(&c, &fam, z) - f(z)).abs() < 1e-12);
        }
    }

    #[test]
    fn non_finite_integrand_is_rejected() {
        let fam = PolynomialFamily::hermite(1.0, 2).unwrap();
        assert!(project(|z| if z > 0.5 { f64::NAN } else { z }, &fam, 2).is_err());
    }

    #[test]
    fn exp_converges_on_legendre() {
        let fam = PolynomialFamily::legendre(-1.0, 1.0, 8).unwrap();
        let rows = convergence_table(f64::exp, &fam, &[2, 4, 6, 8], 64).unwrap();
        for pair in rows.windows(2) {
            assert!(pair[1].error < pair[0].error);
        }
        assert!(rows[3].error <= 1e-6);
    }

    #[test]
    fn total_degree_counts() {
        for d in 1..=4 {
            for n in 0..=5 {
                let set = MultiIndexSet::total_degree(d, n).unwrap();
                assert_eq!(set.len(), binomial(n + d, d));
                assert!(set.indices().iter().all(|i| i.iter().sum::<usize>() <= n));
            }
        }
        let set = MultiIndexSet::total_degree(2, 1).unwrap();
        assert_eq!(set.indices(), &[vec![0, 0], vec![1, 0], vec![0, 1]]);
    }

    #[test]
    fn tensor_basis_projection() {
        let basis = TensorBasis::new(
            vec![
                PolynomialFamily::hermite(1.0, 0).unwrap(),
                PolynomialFamily::legendre(0.0, 1.0, 0).unwrap(),
            ],
            3,
        )
        .unwrap();
        let f = |z: &[f64]| 1.0 + z[0] * z[1] - 0.5 * z[0] * z[0];
        let c = basis.project(f, 6).unwrap();
        for (z0, z1) in [(0.3, 0.1), (-1.2, 0.7), (2.0, 0.95)] {
            let approx: f64 = (0..basis.len())
                .map(|k| c[k] * basis.eval(k, &[z0, z1]).unwrap())
                .sum();
            assert!((approx - f(&[z0, z1])).abs() < 1e-12);
        }
        assert!(basis.eval(0, &[0.0]).is_err());
        assert!(basis.eval(basis.len(), &[0.0, 0.0]).is_err());
    }

    #[test]
    fn tensor_basis_is_orthogonal() {
        let basis = TensorBasis::new(
            vec![
                PolynomialFamily::legendre(-1.0, 1.0, 0).unwrap(),
                PolynomialFamily::hermite(0.7, 0).unwrap(),
            ],
            3,
        )
        .unwrap();
        let r0 = quadrature(&basis.families[0], 8).unwrap();
        let r1 = quadrature(&basis.families[1], 8).unwrap();
        for a in 0..basis.len() {
            for b in 0..basis.len() {
                let mut s = 0.0;
                for (x, wx) in r0.nodes.iter().zip(&r0.weights) {
                    for (y, wy) in r1.nodes.iter().zip(&r1.weights) {
                        s += wx
                            * wy
                            * basis.eval(a, &[*x, *y]).unwrap()
                            * basis.eval(b, &[*x, *y]).unwrap();
                    }
                }
                let expect = if a == b { basis.norm_factor(a) } else { 0.0 };
                assert!((s - expect).abs() < 1e-12);
            }
        }
    }
}
