use crate::error::{Error, Result};

/// Distribution of the random input and the matching orthogonal family.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum FamilyKind {
    /// Probabilists' Hermite polynomials scaled to `Z ~ N(0, σ²)`:
    /// `Φ₁(z) = z`, `Φₙ₊₁ = zΦₙ − nσ²Φₙ₋₁`. `σ = 0` is the point mass at 0.
    HermiteGaussian { sigma: f64 },
    /// Legendre polynomials of the affinely mapped variable, `Z ~ U(a, b)`.
    LegendreUniform { a: f64, b: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PolynomialFamily {
    kind: FamilyKind,
    max_degree: usize,
}

impl PolynomialFamily {
    pub fn new(kind: FamilyKind, max_degree: usize) -> Result<Self> {
        match kind {
            FamilyKind::HermiteGaussian { sigma } => {
                if !(sigma.is_finite() && sigma >= 0.0) {
                    return Err(Error::param("sigma", format!("must be >= 0, got {sigma}")));
                }
            }
            FamilyKind::LegendreUniform { a, b } => {
                if !(a.is_finite() && b.is_finite() && a < b) {
                    return Err(Error::param(
                        "interval",
                        format!("need a < b, got [{a}, {b}]"),
                    ));
                }
            }
        }
        Ok(Self { kind, max_degree })
    }

    pub fn hermite(sigma: f64, max_degree: usize) -> Result<Self> {
        Self::new(FamilyKind::HermiteGaussian { sigma }, max_degree)
    }

    pub fn legendre(a: f64, b: f64, max_degree: usize) -> Result<Self> {
        Self::new(FamilyKind::LegendreUniform { a, b }, max_degree)
    }

    pub fn kind(&self) -> FamilyKind {
        self.kind
    }

    pub fn max_degree(&self) -> usize {
        self.max_degree
    }

    pub fn with_max_degree(&self, max_degree: usize) -> Self {
        Self {
            max_degree,
            ..*self
        }
    }

    fn check_degree(&self, n: usize) -> Result<()> {
        if n > self.max_degree {
            return Err(Error::OutOfRange {
                name: "degree",
                index: n,
                max: self.max_degree,
            });
        }
        Ok(())
    }

    /// `Φₙ(z)` by the three-term recurrence.
    pub fn eval(&self, n: usize, z: f64) -> Result<f64> {
        self.check_degree(n)?;
        Ok(self.eval_unchecked(n, z))
    }

    pub(crate) fn eval_unchecked(&self, n: usize, z: f64) -> f64 {
        let mut all = vec![0.0; n + 1];
        self.eval_all_into(z, &mut all);
        all[n]
    }

    /// `Φ₀(z) .. Φ_{len-1}(z)` into `out`.
    pub(crate) fn eval_all_into(&self, z: f64, out: &mut [f64]) {
        if out.is_empty() {
            return;
        }
        out[0] = 1.0;
        if out.len() == 1 {
            return;
        }
        match self.kind {
            FamilyKind::HermiteGaussian { sigma } => {
                let s2 = sigma * sigma;
                out[1] = z;
                for k in 1..out.len() - 1 {
                    out[k + 1] = z * out[k] - k as f64 * s2 * out[k - 1];
                }
            }
            FamilyKind::LegendreUniform { a, b } => {
                let x = (2.0 * z - a - b) / (b - a);
                out[1] = x;
                for k in 1..out.len() - 1 {
                    let kf = k as f64;
                    out[k + 1] = ((2.0 * kf + 1.0) * x * out[k] - kf * out[k - 1]) / (kf + 1.0);
                }
            }
        }
    }

    /// Every basis function up to `max_degree` at `z`.
    pub fn eval_all(&self, z: f64) -> Vec<f64> {
        let mut out = vec![0.0; self.max_degree + 1];
        self.eval_all_into(z, &mut out);
        out
    }

    /// `γₙ = E[Φₙ²]` under the family's probability density.
    pub fn norm_factor(&self, n: usize) -> Result<f64> {
        self.check_degree(n)?;
        Ok(self.norm_factor_unchecked(n))
    }

    pub(crate) fn norm_factor_unchecked(&self, n: usize) -> f64 {
        match self.kind {
            FamilyKind::HermiteGaussian { sigma } => {
                let s2 = sigma * sigma;
                (1..=n).fold(1.0, |acc, k| acc * k as f64 * s2)
            }
            FamilyKind::LegendreUniform { .. } => 1.0 / (2 * n + 1) as f64,
        }
    }

    pub fn norm_factors(&self) -> Vec<f64> {
        (0..=self.max_degree)
            .map(|n| self.norm_factor_unchecked(n))
            .collect()
    }
}
