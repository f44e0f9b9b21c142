//! Intrusive stochastic Galerkin solver for the Cahn-Hilliard flow with a
//! random initial condition `u(·, 0, Z) = u⁰ + Z`.
//!
//! The solution is expanded as `u = Σₖ uₖ(x, t) Φₖ(Z)` and the flow is
//! projected onto each `Φⱼ`. Mode `j` then obeys
//!
//! ```text
//! ∂t uⱼ = Δwⱼ + λ(f δⱼ₀ − uⱼ)
//! wⱼ = −εΔuⱼ + [ (4 Σ uᵢuₚu_q e_{ipqj} − 6 Σ uᵢuₚ e_{ipj}) / γⱼ + 2uⱼ ] / ε
//! ```
//!
//! The coupling is explicit at time level `n`; each mode then takes the
//! same convexity-split implicit solve as the deterministic solver.

use std::sync::Arc;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::field::{implicit_solve, integrate, laplacian, ScalarField, SpectralPlan};
use crate::gpc::{moment_tensors, FamilyKind, MomentTensors, PolynomialFamily};
use crate::inpaint::{
    drive, energies_at, fidelity_forcing, residual, semi_implicit_update, InpaintProblem,
    RunDiagnostics, SolverConfig,
};

/// Coefficient fields `u₀..u_N` of the chaos expansion.
#[derive(Debug, Clone)]
pub struct ModeStack {
    modes: Vec<ScalarField>,
    family: PolynomialFamily,
    tensors: Arc<MomentTensors>,
}

impl ModeStack {
    /// Wraps explicit mode fields; the family's degree becomes `modes.len() − 1`.
    pub fn from_modes(modes: Vec<ScalarField>, family: &PolynomialFamily) -> Result<Self> {
        if modes.is_empty() {
            return Err(Error::param("modes", "need at least one mode"));
        }
        for m in &modes[1..] {
            modes[0].ensure_same_dims(m)?;
        }
        let order = modes.len() - 1;
        let family = family.with_max_degree(order);
        let tensors = Arc::new(moment_tensors(&family, order)?);
        Ok(Self {
            modes,
            family,
            tensors,
        })
    }

    pub fn modes(&self) -> &[ScalarField] {
        &self.modes
    }

    pub fn mode(&self, k: usize) -> Option<&ScalarField> {
        self.modes.get(k)
    }

    pub fn into_modes(self) -> Vec<ScalarField> {
        self.modes
    }

    pub fn order(&self) -> usize {
        self.modes.len() - 1
    }

    pub fn family(&self) -> &PolynomialFamily {
        &self.family
    }

    pub fn tensors(&self) -> &MomentTensors {
        &self.tensors
    }

    /// The realisation `Σₖ uₖ Φₖ(z)`.
    pub fn evaluate_at(&self, z: f64) -> ScalarField {
        let phi = self.family.eval_all(z);
        let mut out = vec![0.0; self.modes[0].len()];
        for (mode, &p) in self.modes.iter().zip(&phi) {
            for (o, &u) in out.iter_mut().zip(mode.values()) {
                *o += u * p;
            }
        }
        self.modes[0].like(out)
    }

    fn with_modes(&self, modes: Vec<ScalarField>) -> Self {
        Self {
            modes,
            family: self.family,
            tensors: Arc::clone(&self.tensors),
        }
    }
}

/// Expansion of `u⁰ + Z` in the family: for the Gaussian family this is
/// `u₀ = u⁰`, `u₁ = 1`, higher modes zero.
pub fn init_modes(u0: &ScalarField, family: &PolynomialFamily, order: usize) -> Result<ModeStack> {
    if order < 1 {
        return Err(Error::param("order", "expansion order must be at least 1"));
    }
    // Z = mean + scale Φ₁(Z)
    let (mean, scale) = match family.kind() {
        FamilyKind::HermiteGaussian { .. } => (0.0, 1.0),
        FamilyKind::LegendreUniform { a, b } => (0.5 * (a + b), 0.5 * (b - a)),
    };
    let mut modes = Vec::with_capacity(order + 1);
    modes.push(if mean == 0.0 {
        u0.clone()
    } else {
        u0.map(|v| v + mean)
    });
    modes.push(u0.map(|_| scale));
    for _ in 2..=order {
        modes.push(u0.map(|_| 0.0));
    }
    ModeStack::from_modes(modes, family)
}

/// Projected double-well derivative for mode `j`, before the `1/ε` factor:
/// `(4 Σ uᵢuₚu_q e_{ipqj} − 6 Σ uᵢuₚ e_{ipj}) / γⱼ + 2uⱼ`.
pub fn nonlinear_term(stack: &ModeStack, j: usize) -> Result<ScalarField> {
    if j > stack.order() {
        return Err(Error::OutOfRange {
            name: "mode",
            index: j,
            max: stack.order(),
        });
    }
    Ok(stack.modes[j].like(nonlinear_values(stack, j)))
}

fn nonlinear_values(stack: &ModeStack, j: usize) -> Vec<f64> {
    let t = &stack.tensors;
    let n = stack.modes.len();
    let gamma = t.gamma()[j];
    let len = stack.modes[0].len();
    let mut u = vec![0.0; n];
    (0..len)
        .map(|k| {
            for (slot, mode) in u.iter_mut().zip(&stack.modes) {
                *slot = mode.values()[k];
            }
            let mut cubic = 0.0;
            let mut quad = 0.0;
            for i in 0..n {
                for p in 0..n {
                    let uip = u[i] * u[p];
                    quad += uip * t.e3(i, p, j);
                    for (q, &uq) in u.iter().enumerate() {
                        cubic += uip * uq * t.e4(i, p, q, j);
                    }
                }
            }
            (4.0 * cubic - 6.0 * quad) / gamma + 2.0 * u[j]
        })
        .collect()
}

fn check_stack(stack: &ModeStack, problem: &InpaintProblem) -> Result<()> {
    stack.modes[0].ensure_same_dims(problem.f())
}

/// One step of the projected system. Modes with `γⱼ = 0` (a degenerate
/// input distribution) carry no variance and are left unchanged.
pub fn galerkin_step(
    stack: &ModeStack,
    problem: &InpaintProblem,
    config: &SolverConfig,
    plan: &SpectralPlan,
) -> Result<ModeStack> {
    config.validate()?;
    check_stack(stack, problem)?;
    step_at(stack, problem, config, problem.eps(), plan)
}

fn step_at(
    stack: &ModeStack,
    problem: &InpaintProblem,
    config: &SolverConfig,
    eps: f64,
    plan: &SpectralPlan,
) -> Result<ModeStack> {
    let k = config.coefficients(eps, problem.lambda0());
    let modes = (0..stack.modes.len())
        .into_par_iter()
        .map(|j| {
            let u = &stack.modes[j];
            if stack.tensors.gamma()[j] == 0.0 {
                return Ok(u.clone());
            }
            let potential = nonlinear_values(stack, j);
            let forcing = if j == 0 {
                fidelity_forcing(problem, u)
            } else {
                problem
                    .fidelity_weight()
                    .zip(u.values())
                    .map(|(l, &v)| -l * v)
                    .collect()
            };
            semi_implicit_update(u, &potential, &forcing, k, plan)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(stack.with_modes(modes))
}

#[derive(Debug, Clone)]
pub struct GalerkinRun {
    pub stack: ModeStack,
    pub diagnostics: RunDiagnostics,
}

/// Runs the projected system from [`init_modes`] of `f`. Diagnostics track
/// the mean field `u₀`; the residual covers every mode that can move
/// (`γⱼ > 0`), so `σ = 0` stops exactly where the deterministic run does.
pub fn run_galerkin(
    problem: &InpaintProblem,
    family: &PolynomialFamily,
    order: usize,
    config: &SolverConfig,
) -> Result<GalerkinRun> {
    let stack = init_modes(problem.f(), family, order)?;
    run_galerkin_from(stack, problem, config)
}

pub fn run_galerkin_from(
    stack: ModeStack,
    problem: &InpaintProblem,
    config: &SolverConfig,
) -> Result<GalerkinRun> {
    check_stack(&stack, problem)?;
    let plan = SpectralPlan::for_field(problem.f())?;
    let (stack, diagnostics) = drive(
        config,
        problem.eps(),
        stack,
        |s, eps| step_at(s, problem, config, eps, &plan),
        |a, b| {
            let live = a.modes.iter().zip(&b.modes).zip(a.tensors.gamma());
            residual(
                live.filter(|(_, &g)| g > 0.0).map(|(pair, _)| pair),
                config.dt,
            )
        },
        |s, eps| {
            Ok((
                energies_at(&s.modes[0], problem, eps, &plan)?,
                integrate(&s.modes[0]),
            ))
        },
    )?;
    Ok(GalerkinRun { stack, diagnostics })
}

/// The two-mode system for `Z ~ N(0, σ²)` written out term by term,
/// with `C₁ = E[Z²] = σ²`, `C₂ = E[Z⁴] = 3σ⁴`:
///
/// ```text
/// P₀ = 4(u₀³ + 3u₀u₁²C₁) − 6(u₀² + u₁²C₁) + 2u₀
/// P₁ = [4(u₁³C₂ + 3u₁u₀²C₁) − 6(2u₀u₁C₁)] / σ² + 2u₁
/// ```
///
/// Assembled from [`laplacian`] and [`implicit_solve`] rather than the
/// shared stepping kernel, so it is an independent cross-check of
/// [`galerkin_step`] at order 1.
pub fn reduced_gaussian_step(
    u0: &ScalarField,
    u1: &ScalarField,
    problem: &InpaintProblem,
    sigma: f64,
    config: &SolverConfig,
    plan: &SpectralPlan,
) -> Result<(ScalarField, ScalarField)> {
    config.validate()?;
    if !(sigma.is_finite() && sigma > 0.0) {
        return Err(Error::param("sigma", format!("must be > 0, got {sigma}")));
    }
    u0.ensure_same_dims(u1)?;
    u0.ensure_same_dims(problem.f())?;
    let c1 = sigma * sigma;
    let c2 = 3.0 * c1 * c1;
    let eps = problem.eps();
    let (dt, sc1, sc2) = (
        config.dt,
        config.c1_for(eps),
        config.c2_for(problem.lambda0()),
    );

    let p0 = u0.zip_map(u1, |a, b| {
        4.0 * (a * a * a + 3.0 * a * b * b * c1) - 6.0 * (a * a + b * b * c1) + 2.0 * a
    })?;
    let p1 = u0.zip_map(u1, |a, b| {
        (4.0 * (b * b * b * c2 + 3.0 * b * a * a * c1) - 6.0 * (2.0 * a * b * c1)) / c1 + 2.0 * b
    })?;
    let lambda: Vec<f64> = problem.fidelity_weight().collect();
    let fid0: Vec<f64> = (0..u0.len())
        .map(|k| lambda[k] * (problem.f().values()[k] - u0.values()[k]))
        .collect();
    let fid1: Vec<f64> = (0..u1.len()).map(|k| -lambda[k] * u1.values()[k]).collect();

    let advance = |u: &ScalarField, p: &ScalarField, fid: &[f64]| -> Result<ScalarField> {
        let lap_p = laplacian(p, plan)?;
        let lap_u = laplacian(u, plan)?;
        let rhs: Vec<f64> = (0..u.len())
            .map(|k| {
                u.values()[k] / dt + lap_p.values()[k] / eps + fid[k] - sc1 * lap_u.values()[k]
                    + sc2 * u.values()[k]
            })
            .collect();
        implicit_solve(&u.like(rhs), 1.0 / dt, eps, sc1, sc2, plan)
    };
    Ok((advance(u0, &p0, &fid0)?, advance(u1, &p1, &fid1)?))
}
