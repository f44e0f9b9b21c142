//! Uniform-grid scalar fields and the cosine-transform operators shared by
//! every solver.
//!
//! Grid points sit at cell centres `x_i = (i + 1/2) h`. On that grid the
//! type-II discrete cosine transform diagonalises the Laplacian with
//! homogeneous Neumann conditions, so `laplacian` and `implicit_solve` are
//! a forward transform, a per-coefficient multiply and an inverse transform.

use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;

use rustdct::{DctPlanner, TransformType2And3};

use crate::error::{Error, Result};

pub const MIN_GRID: usize = 4;

/// A real-valued function on a `width x height` grid, stored row-major.
#[derive(Clone, PartialEq)]
pub struct ScalarField {
    width: usize,
    height: usize,
    spacing: f64,
    values: Vec<f64>,
}

impl fmt::Debug for ScalarField {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ScalarField")
            .field("width", &self.width)
            .field("height", &self.height)
            .field("spacing", &self.spacing)
            .finish_non_exhaustive()
    }
}

fn check_grid(width: usize, height: usize) -> Result<()> {
    if width < MIN_GRID || height < MIN_GRID {
        return Err(Error::GridTooSmall { width, height });
    }
    Ok(())
}

impl ScalarField {
    /// Builds a field with unit grid spacing.
    pub fn new(width: usize, height: usize, values: Vec<f64>) -> Result<Self> {
        Self::with_spacing(width, height, 1.0, values)
    }

    pub fn with_spacing(
        width: usize,
        height: usize,
        spacing: f64,
        values: Vec<f64>,
    ) -> Result<Self> {
        check_grid(width, height)?;
        if !(spacing.is_finite() && spacing > 0.0) {
            return Err(Error::param(
                "spacing",
                format!("must be positive, got {spacing}"),
            ));
        }
        if values.len() != width * height {
            return Err(Error::LengthMismatch {
                expected: width * height,
                actual: values.len(),
            });
        }
        if let Some(index) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite {
                context: "field values",
                index,
            });
        }
        Ok(Self {
            width,
            height,
            spacing,
            values,
        })
    }

    pub fn constant(width: usize, height: usize, value: f64) -> Result<Self> {
        Self::new(width, height, vec![value; width * height])
    }

    pub fn zeros(width: usize, height: usize) -> Result<Self> {
        Self::constant(width, height, 0.0)
    }

    /// Samples `f(x, y)` at cell centres, with `x, y` in grid units times `spacing`.
    pub fn from_fn(
        width: usize,
        height: usize,
        spacing: f64,
        f: impl Fn(f64, f64) -> f64,
    ) -> Result<Self> {
        let mut values = Vec::with_capacity(width * height);
        for j in 0..height {
            let y = (j as f64 + 0.5) * spacing;
            for i in 0..width {
                let x = (i as f64 + 0.5) * spacing;
                values.push(f(x, y));
            }
        }
        Self::with_spacing(width, height, spacing, values)
    }

    /// Same grid as `self`, new values; the caller guarantees the length.
    pub(crate) fn like(&self, values: Vec<f64>) -> Self {
        debug_assert_eq!(values.len(), self.values.len());
        Self {
            width: self.width,
            height: self.height,
            spacing: self.spacing,
            values,
        }
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn spacing(&self) -> f64 {
        self.spacing
    }

    pub fn dims(&self) -> (usize, usize) {
        (self.width, self.height)
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn get(&self, x: usize, y: usize) -> f64 {
        self.values[y * self.width + x]
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Self {
        self.like(self.values.iter().map(|&v| f(v)).collect())
    }

    pub fn zip_map(&self, other: &Self, f: impl Fn(f64, f64) -> f64) -> Result<Self> {
        self.ensure_same_dims(other)?;
        Ok(self.like(
            self.values
                .iter()
                .zip(&other.values)
                .map(|(&a, &b)| f(a, b))
                .collect(),
        ))
    }

    pub fn ensure_same_dims(&self, other: &Self) -> Result<()> {
        if self.dims() != other.dims() {
            return Err(Error::DimensionMismatch {
                left: self.dims(),
                right: other.dims(),
            });
        }
        Ok(())
    }

    /// Errors if any value is NaN or infinite.
    pub fn check_finite(&self, context: &'static str) -> Result<()> {
        match self.values.iter().position(|v| !v.is_finite()) {
            Some(index) => Err(Error::NonFinite { context, index }),
            None => Ok(()),
        }
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    pub fn l2_norm(&self) -> f64 {
        self.values.iter().map(|v| v * v).sum::<f64>().sqrt()
    }

    /// Mirror image about the vertical centre line.
    pub fn mirror_x(&self) -> Self {
        let mut out = vec![0.0; self.values.len()];
        for y in 0..self.height {
            for x in 0..self.width {
                out[y * self.width + x] = self.values[y * self.width + (self.width - 1 - x)];
            }
        }
        self.like(out)
    }
}

/// `h^2 * sum(values)`.
pub fn integrate(u: &ScalarField) -> f64 {
    u.spacing * u.spacing * u.values.iter().sum::<f64>()
}

/// Cosine-transform plan and Laplacian symbol for one grid size.
#[derive(Clone)]
pub struct SpectralPlan {
    width: usize,
    height: usize,
    spacing: f64,
    eigenvalues: Vec<f64>,
    row_dct: Arc<dyn TransformType2And3<f64>>,
    col_dct: Arc<dyn TransformType2And3<f64>>,
}

impl fmt::Debug for SpectralPlan {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("SpectralPlan")
            .field("width", &self.width)
            .field("height", &self.height)
            .field("spacing", &self.spacing)
            .finish_non_exhaustive()
    }
}

impl SpectralPlan {
    pub fn new(width: usize, height: usize, spacing: f64) -> Result<Self> {
        check_grid(width, height)?;
        if !(spacing.is_finite() && spacing > 0.0) {
            return Err(Error::param(
                "spacing",
                format!("must be positive, got {spacing}"),
            ));
        }
        let mut planner = DctPlanner::new();
        let row_dct = planner.plan_dct2(width);
        let col_dct = planner.plan_dct2(height);

        let lx = width as f64 * spacing;
        let ly = height as f64 * spacing;
        let mut eigenvalues = Vec::with_capacity(width * height);
        for ky in 0..height {
            let wy = PI * ky as f64 / ly;
            for kx in 0..width {
                let wx = PI * kx as f64 / lx;
                eigenvalues.push(-(wx * wx + wy * wy));
            }
        }
        Ok(Self {
            width,
            height,
            spacing,
            eigenvalues,
            row_dct,
            col_dct,
        })
    }

    pub fn for_field(u: &ScalarField) -> Result<Self> {
        Self::new(u.width, u.height, u.spacing)
    }

    pub fn dims(&self) -> (usize, usize) {
        (self.width, self.height)
    }

    pub fn spacing(&self) -> f64 {
        self.spacing
    }

    /// Laplacian symbol `-k^2` per coefficient, row-major in `(ky, kx)`.
    pub fn eigenvalues(&self) -> &[f64] {
        &self.eigenvalues
    }

    pub fn check(&self, u: &ScalarField) -> Result<()> {
        if u.dims() != self.dims() {
            return Err(Error::DimensionMismatch {
                left: u.dims(),
                right: self.dims(),
            });
        }
        Ok(())
    }

    /// Unnormalised 2-D DCT-II coefficients of `u`.
    pub fn forward(&self, u: &ScalarField) -> Result<Vec<f64>> {
        self.check(u)?;
        let mut data = u.values.clone();
        self.transform(&mut data, false);
        Ok(data)
    }

    /// Inverse of [`SpectralPlan::forward`]; no finiteness check.
    pub fn inverse(&self, mut coeffs: Vec<f64>) -> ScalarField {
        assert_eq!(coeffs.len(), self.width * self.height);
        self.transform(&mut coeffs, true);
        let scale = 4.0 / (self.width * self.height) as f64;
        for c in &mut coeffs {
            *c *= scale;
        }
        ScalarField {
            width: self.width,
            height: self.height,
            spacing: self.spacing,
            values: coeffs,
        }
    }

    fn transform(&self, data: &mut [f64], inverse: bool) {
        let (w, h) = (self.width, self.height);
        for row in data.chunks_exact_mut(w) {
            if inverse {
                self.row_dct.process_dct3(row);
            } else {
                self.row_dct.process_dct2(row);
            }
        }
        let mut column = vec![0.0; h];
        for x in 0..w {
            for y in 0..h {
                column[y] = data[y * w + x];
            }
            if inverse {
                self.col_dct.process_dct3(&mut column);
            } else {
                self.col_dct.process_dct2(&mut column);
            }
            for y in 0..h {
                data[y * w + x] = column[y];
            }
        }
    }

    /// `∫|∇u|²` from the transform coefficients (Parseval), so it is never negative.
    pub fn gradient_energy(&self, u: &ScalarField) -> Result<f64> {
        let coeffs = self.forward(u)?;
        let (w, h) = (self.width, self.height);
        let mut total = 0.0;
        for ky in 0..h {
            let wy = if ky == 0 { 1.0 } else { 2.0 } / h as f64;
            for kx in 0..w {
                let wx = if kx == 0 { 1.0 } else { 2.0 } / w as f64;
                let idx = ky * w + kx;
                total += wx * wy * (-self.eigenvalues[idx]) * coeffs[idx] * coeffs[idx];
            }
        }
        Ok(self.spacing * self.spacing * total)
    }

    /// Divides each coefficient by `a + eps k^4 + c1 k^2 + c2`.
    pub(crate) fn solve_coefficients(
        &self,
        coeffs: &mut [f64],
        a: f64,
        eps: f64,
        c1: f64,
        c2: f64,
    ) {
        for (c, &lam) in coeffs.iter_mut().zip(&self.eigenvalues) {
            let k2 = -lam;
            *c /= a + eps * k2 * k2 + c1 * k2 + c2;
        }
    }
}

pub fn laplacian(u: &ScalarField, plan: &SpectralPlan) -> Result<ScalarField> {
    let mut coeffs = plan.forward(u)?;
    for (c, &lam) in coeffs.iter_mut().zip(&plan.eigenvalues) {
        *c *= lam;
    }
    Ok(plan.inverse(coeffs))
}

fn validate_implicit(a: f64, eps: f64, c1: f64, c2: f64) -> Result<()> {
    if !(a.is_finite() && a > 0.0) {
        return Err(Error::param("a", format!("must be positive, got {a}")));
    }
    if !(eps.is_finite() && eps > 0.0) {
        return Err(Error::param("eps", format!("must be positive, got {eps}")));
    }
    if !(c1.is_finite() && c1 >= 0.0) {
        return Err(Error::param(
            "c1",
            format!("must be non-negative, got {c1}"),
        ));
    }
    if !(c2.is_finite() && c2 >= 0.0) {
        return Err(Error::param(
            "c2",
            format!("must be non-negative, got {c2}"),
        ));
    }
    Ok(())
}

/// Solves `a u + eps Δ²u − c1 Δu + c2 u = rhs`.
pub fn implicit_solve(
    rhs: &ScalarField,
    a: f64,
    eps: f64,
    c1: f64,
    c2: f64,
    plan: &SpectralPlan,
) -> Result<ScalarField> {
    validate_implicit(a, eps, c1, c2)?;
    let mut coeffs = plan.forward(rhs)?;
    plan.solve_coefficients(&mut coeffs, a, eps, c1, c2);
    Ok(plan.inverse(coeffs))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn smooth(width: usize, height: usize) -> ScalarField {
        ScalarField::from_fn(width, height, 1.0, |x, y| {
            let (lx, ly) = (width as f64, height as f64);
            0.3 * (PI * x / lx).cos()
                + 0.2 * (2.0 * PI * y / ly).cos() * (3.0 * PI * x / lx).cos()
                + 0.1 * (PI * y / ly).cos()
        })
        .unwrap()
    }

    #[test]
    fn rejects_small_grids_and_bad_lengths() {
        assert!(matches!(
            ScalarField::new(3, 8, vec![0.0; 24]),
            Err(Error::GridTooSmall { .. })
        ));
        assert!(matches!(
            ScalarField::new(4, 4, vec![0.0; 15]),
            Err(Error::LengthMismatch { .. })
        ));
        assert!(matches!(
            ScalarField::new(4, 4, {
                let mut v = vec![0.0; 16];
                v[5] = f64::NAN;
                v
            }),
            Err(Error::NonFinite { index: 5, .. })
        ));
    }

    #[test]
    fn constant_mode_eigenvalue_is_zero() {
        let plan = SpectralPlan::new(8, 6, 1.0).unwrap();
        assert_eq!(plan.eigenvalues()[0], 0.0);
        assert!(plan.eigenvalues().iter().all(|&l| l <= 0.0));
    }

    #[test]
    fn transform_roundtrip() {
        let u = smooth(16, 12);
        let plan = SpectralPlan::for_field(&u).unwrap();
        let back = plan.inverse(plan.forward(&u).unwrap());
        for (a, b) in u.values().iter().zip(back.values()) {
            assert!((a - b).abs() < 1e-14);
        }
    }

    #[test]
    fn laplacian_of_constant_is_zero() {
        let u = ScalarField::constant(32, 32, 3.7).unwrap();
        let plan = SpectralPlan::for_field(&u).unwrap();
        let lap = laplacian(&u, &plan).unwrap();
        assert!(lap.max_abs() < 1e-13);
    }

    #[test]
    fn laplacian_cosine_eigenfunction() {
        let n = 32;
        let l = n as f64;
        let u = ScalarField::from_fn(n, n, 1.0, |x, _| (PI * x / l).cos()).unwrap();
        let plan = SpectralPlan::for_field(&u).unwrap();
        let lap = laplacian(&u, &plan).unwrap();
        let k2 = (PI / l).powi(2);
        let scale = u.max_abs() * k2;
        for (a, b) in lap.values().iter().zip(u.values()) {
            assert!((a + k2 * b).abs() <= 1e-10 * scale);
        }
    }

    #[test]
    fn laplacian_has_zero_mean() {
        let u = smooth(24, 20).map(|v| v * v + v.sin());
        let plan = SpectralPlan::for_field(&u).unwrap();
        let lap = laplacian(&u, &plan).unwrap();
        let mean = integrate(&lap) / lap.len() as f64;
        assert!(mean.abs() <= 1e-12 * lap.max_abs().max(1.0));
    }

    #[test]
    fn laplacian_dimension_mismatch() {
        let u = ScalarField::zeros(8, 8).unwrap();
        let plan = SpectralPlan::new(8, 9, 1.0).unwrap();
        assert!(matches!(
            laplacian(&u, &plan),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn implicit_solve_constant_and_zero() {
        let plan = SpectralPlan::new(8, 8, 1.0).unwrap();
        let rhs = ScalarField::constant(8, 8, 2.0).unwrap();
        let u = implicit_solve(&rhs, 0.5, 1.0, 3.0, 1.5, &plan).unwrap();
        for &v in u.values() {
            assert!((v - 2.0 / 2.0).abs() < 1e-14);
        }
        let z = implicit_solve(
            &ScalarField::zeros(8, 8).unwrap(),
            1.0,
            1.0,
            0.0,
            0.0,
            &plan,
        )
        .unwrap();
        assert_eq!(z.max_abs(), 0.0);
    }

    #[test]
    fn implicit_solve_rejects_bad_coefficients() {
        let plan = SpectralPlan::new(8, 8, 1.0).unwrap();
        let rhs = ScalarField::zeros(8, 8).unwrap();
        assert!(implicit_solve(&rhs, 0.0, 1.0, 0.0, 0.0, &plan).is_err());
        assert!(implicit_solve(&rhs, 1.0, -1.0, 0.0, 0.0, &plan).is_err());
        assert!(implicit_solve(&rhs, 1.0, 1.0, -1.0, 0.0, &plan).is_err());
    }

    #[test]
    fn integrate_basics() {
        let one = ScalarField::constant(64, 64, 1.0).unwrap();
        assert_eq!(integrate(&one), 4096.0);
        assert_eq!(integrate(&ScalarField::zeros(64, 64).unwrap()), 0.0);
        let a = smooth(16, 16);
        let b = a.map(|v| v.exp());
        let sum = a.zip_map(&b, |x, y| x + y).unwrap();
        assert!((integrate(&sum) - integrate(&a) - integrate(&b)).abs() < 1e-12);
    }
}
