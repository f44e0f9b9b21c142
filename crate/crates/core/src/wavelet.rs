//! Haar wavelets on `[0, 1)` under the uniform density.
//!
//! The basis up to level `J` is the scaling function `φ = χ[0,1)` and
//! `ψ_{j,k}(x) = 2^{j/2} β(2ʲx − k)` for `0 ≤ j ≤ J`, `0 ≤ k < 2ʲ`. It is
//! orthonormal and spans the step functions on the `2^{−(J+1)}` grid.

use crate::error::{Error, Result};

/// Haar mother wavelet, left-closed on each half.
pub fn haar_mother(x: f64) -> f64 {
    if (0.0..0.5).contains(&x) {
        1.0
    } else if (0.5..1.0).contains(&x) {
        -1.0
    } else {
        0.0
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum HaarFunction {
    Scaling,
    Wavelet { j: u32, k: u64 },
}

impl HaarFunction {
    pub fn eval(self, x: f64) -> f64 {
        match self {
            HaarFunction::Scaling => {
                if (0.0..1.0).contains(&x) {
                    1.0
                } else {
                    0.0
                }
            }
            HaarFunction::Wavelet { j, k } => {
                scale(j) * haar_mother((2f64).powi(j as i32) * x - k as f64)
            }
        }
    }

    /// Finest dyadic level on which the function is piecewise constant.
    fn resolution(self) -> u32 {
        match self {
            HaarFunction::Scaling => 0,
            HaarFunction::Wavelet { j, .. } => j + 1,
        }
    }

    /// `∫₀¹ xᵖ g(x) dx` in closed form.
    pub fn moment(self, p: u32) -> f64 {
        let pw = |x: f64| x.powi(p as i32 + 1);
        let q = (p + 1) as f64;
        match self {
            HaarFunction::Scaling => 1.0 / q,
            HaarFunction::Wavelet { j, k } => {
                let w = (2f64).powi(-(j as i32));
                let a = k as f64 * w;
                let m = a + 0.5 * w;
                let b = a + w;
                scale(j) * (2.0 * pw(m) - pw(a) - pw(b)) / q
            }
        }
    }
}

fn scale(j: u32) -> f64 {
    (2f64).powf(0.5 * j as f64)
}

/// `ψ_{j,k}(x)` without range checks.
pub fn basis_eval(j: u32, k: u64, x: f64) -> f64 {
    HaarFunction::Wavelet { j, k }.eval(x)
}

/// `∫₀¹ xᵖ ψ_{j,k}(x) dx`; zero for `p = 0`.
pub fn vanishing_moment(j: u32, k: u64, p: u32) -> f64 {
    HaarFunction::Wavelet { j, k }.moment(p)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct HaarBasis {
    levels: u32,
}

impl HaarBasis {
    pub const MAX_LEVELS: u32 = 24;

    pub fn new(levels: u32) -> Result<Self> {
        if levels > Self::MAX_LEVELS {
            return Err(Error::param(
                "levels",
                format!("at most {} supported, got {levels}", Self::MAX_LEVELS),
            ));
        }
        Ok(Self { levels })
    }

    pub fn levels(&self) -> u32 {
        self.levels
    }

    /// `2^{J+1}`.
    pub fn len(&self) -> usize {
        1 << (self.levels + 1)
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Scaling function first, then wavelets by level and shift.
    pub fn functions(&self) -> Vec<HaarFunction> {
        let mut out = vec![HaarFunction::Scaling];
        for j in 0..=self.levels {
            out.extend((0..1u64 << j).map(|k| HaarFunction::Wavelet { j, k }));
        }
        out
    }

    pub fn eval(&self, func: HaarFunction, x: f64) -> Result<f64> {
        if let HaarFunction::Wavelet { j, k } = func {
            if j > self.levels {
                return Err(Error::OutOfRange {
                    name: "level",
                    index: j as usize,
                    max: self.levels as usize,
                });
            }
            if k >= 1 << j {
                return Err(Error::OutOfRange {
                    name: "shift",
                    index: k as usize,
                    max: (1usize << j) - 1,
                });
            }
        }
        Ok(func.eval(x))
    }

    /// Midpoints of the `2^{J+1}` cells.
    fn grid(&self) -> Vec<f64> {
        let cells = self.len();
        let h = 1.0 / cells as f64;
        (0..cells).map(|i| (i as f64 + 0.5) * h).collect()
    }

    /// `⟨f, g⟩` for every basis function `g`, in [`functions`](Self::functions)
    /// order, by the midpoint rule on the finest grid.
    pub fn project(&self, f: impl Fn(f64) -> f64) -> Vec<f64> {
        let grid = self.grid();
        let h = 1.0 / grid.len() as f64;
        let samples: Vec<f64> = grid.iter().map(|&x| f(x)).collect();
        self.functions()
            .into_iter()
            .map(|g| {
                h * grid
                    .iter()
                    .zip(&samples)
                    .map(|(&x, &fx)| fx * g.eval(x))
                    .sum::<f64>()
            })
            .collect()
    }

    /// `Σ cᵢ gᵢ(x)`.
    pub fn reconstruct(&self, coeffs: &[f64], x: f64) -> Result<f64> {
        if coeffs.len() != self.len() {
            return Err(Error::LengthMismatch {
                expected: self.len(),
                actual: coeffs.len(),
            });
        }
        Ok(self
            .functions()
            .into_iter()
            .zip(coeffs)
            .map(|(g, c)| c * g.eval(x))
            .sum())
    }
}

/// `wavelet_project(f, J)` as a free function.
pub fn wavelet_project(f: impl Fn(f64) -> f64, levels: u32) -> Result<Vec<f64>> {
    Ok(HaarBasis::new(levels)?.project(f))
}

/// `∫₀¹ Π gᵢ(x) dx`, exact: the product is constant on the cells of the
/// finest level involved.
pub fn mixed_moment(funcs: &[HaarFunction]) -> f64 {
    let level = funcs.iter().map(|g| g.resolution()).max().unwrap_or(0);
    let cells = 1u64 << level;
    let h = 1.0 / cells as f64;
    (0..cells)
        .map(|i| {
            let x = (i as f64 + 0.5) * h;
            funcs.iter().map(|g| g.eval(x)).product::<f64>()
        })
        .sum::<f64>()
        * h
}
