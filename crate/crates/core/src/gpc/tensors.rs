use super::family::PolynomialFamily;
use super::quadrature::quadrature;
use crate::error::{Error, Result};

/// `γᵢ = E[Φᵢ²]`, `e_{ipj} = E[ΦᵢΦₚΦⱼ]` and `e_{ipqj} = E[ΦᵢΦₚΦ_qΦⱼ]`
/// for degrees `0..=N`.
///
/// Entries are evaluated once per sorted index tuple and copied to every
/// permutation, so the tensors are exactly symmetric.
#[derive(Debug, Clone, PartialEq)]
pub struct MomentTensors {
    order: usize,
    gamma: Vec<f64>,
    e3: Vec<f64>,
    e4: Vec<f64>,
}

impl MomentTensors {
    pub fn order(&self) -> usize {
        self.order
    }

    pub fn gamma(&self) -> &[f64] {
        &self.gamma
    }

    fn n(&self) -> usize {
        self.order + 1
    }

    pub fn e3(&self, i: usize, p: usize, j: usize) -> f64 {
        let n = self.n();
        self.e3[(i * n + p) * n + j]
    }

    pub fn e4(&self, i: usize, p: usize, q: usize, j: usize) -> f64 {
        let n = self.n();
        self.e4[((i * n + p) * n + q) * n + j]
    }
}

fn permutations3(i: usize, p: usize, j: usize) -> [[usize; 3]; 6] {
    [
        [i, p, j],
        [i, j, p],
        [p, i, j],
        [p, j, i],
        [j, i, p],
        [j, p, i],
    ]
}

fn permutations4(t: [usize; 4]) -> Vec<[usize; 4]> {
    let mut out = Vec::with_capacity(24);
    for a in 0..4 {
        for b in 0..4 {
            for c in 0..4 {
                for d in 0..4 {
                    if a != b && a != c && a != d && b != c && b != d && c != d {
                        out.push([t[a], t[b], t[c], t[d]]);
                    }
                }
            }
        }
    }
    out
}

/// Default Gauss rule size, exact for quartic products at degree `N`.
pub fn default_nodes(order: usize) -> usize {
    2 * order + 3
}

pub fn moment_tensors(family: &PolynomialFamily, order: usize) -> Result<MomentTensors> {
    if order > family.max_degree() {
        return Err(Error::OutOfRange {
            name: "order",
            index: order,
            max: family.max_degree(),
        });
    }
    let family = family.with_max_degree(order);
    let rule = quadrature(&family, default_nodes(order))?;
    let n = order + 1;
    let table: Vec<Vec<f64>> = rule.nodes.iter().map(|&z| family.eval_all(z)).collect();
    let expect = |idx: &[usize]| -> f64 {
        table
            .iter()
            .zip(&rule.weights)
            .map(|(phi, &w)| w * idx.iter().map(|&k| phi[k]).product::<f64>())
            .sum()
    };

    let gamma = family.norm_factors();
    // Φ₀ = 1 and the parity of Φₙ under a symmetric density pin some
    // entries exactly; the rest come from quadrature.
    let delta = |a: usize, b: usize| if a == b { gamma[a] } else { 0.0 };

    let mut e3 = vec![0.0; n * n * n];
    for i in 0..n {
        for p in i..n {
            for j in p..n {
                let v = if (i + p + j) % 2 == 1 {
                    0.0
                } else if i == 0 {
                    delta(p, j)
                } else {
                    expect(&[i, p, j])
                };
                for [a, b, c] in permutations3(i, p, j) {
                    e3[(a * n + b) * n + c] = v;
                }
            }
        }
    }
    let mut e4 = vec![0.0; n * n * n * n];
    for i in 0..n {
        for p in i..n {
            for q in p..n {
                for j in q..n {
                    let v = if (i + p + q + j) % 2 == 1 {
                        0.0
                    } else if i == 0 && p == 0 {
                        delta(q, j)
                    } else if i == 0 {
                        e3[(p * n + q) * n + j]
                    } else {
                        expect(&[i, p, q, j])
                    };
                    for [a, b, c, d] in permutations4([i, p, q, j]) {
                        e4[((a * n + b) * n + c) * n + d] = v;
                    }
                }
            }
        }
    }
    Ok(MomentTensors {
        order,
        gamma,
        e3,
        e4,
    })
}
