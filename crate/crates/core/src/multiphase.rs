//! Grayscale inpainting with one Cahn-Hilliard concentration per gray level.
//!
//! Phase `i` follows
//! `∂t uᵢ = Δwᵢ + λ(fᵢ − uᵢ)`, `wᵢ = −εΔuᵢ + (W'(uᵢ) − (1/Y)Σⱼ W'(uⱼ))/ε`,
//! stepped with the same convexity splitting as the binary solver. Summing
//! the `Y` equations cancels the potential, so `Σᵢ uᵢ = 1` is preserved
//! whenever `Σᵢ fᵢ = 1`.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::field::{integrate, ScalarField, SpectralPlan};
use crate::inpaint::{
    drive, residual, semi_implicit_update, w, w_prime, Energies, RunDiagnostics, SolverConfig,
};

pub const MAX_PHASES: usize = 256;
pub const SUM_TOLERANCE: f64 = 1e-8;

#[derive(Debug, Clone, PartialEq)]
pub struct PhaseStack {
    phases: Vec<ScalarField>,
    gray_values: Vec<f64>,
}

fn check_gray_values(g: &[f64]) -> Result<()> {
    if g.len() < 2 || g.len() > MAX_PHASES {
        return Err(Error::param(
            "gray_values",
            format!(
                "need between 2 and {MAX_PHASES} gray values, got {}",
                g.len()
            ),
        ));
    }
    if g.iter().any(|v| !v.is_finite()) || g.windows(2).any(|p| p[0] >= p[1]) {
        return Err(Error::param(
            "gray_values",
            "must be finite and strictly increasing",
        ));
    }
    Ok(())
}

impl PhaseStack {
    pub fn new(phases: Vec<ScalarField>, gray_values: Vec<f64>) -> Result<Self> {
        check_gray_values(&gray_values)?;
        if phases.len() != gray_values.len() {
            return Err(Error::LengthMismatch {
                expected: gray_values.len(),
                actual: phases.len(),
            });
        }
        for p in &phases[1..] {
            phases[0].ensure_same_dims(p)?;
        }
        let stack = Self {
            phases,
            gray_values,
        };
        stack.check_sum()?;
        Ok(stack)
    }

    pub fn phases(&self) -> &[ScalarField] {
        &self.phases
    }

    pub fn gray_values(&self) -> &[f64] {
        &self.gray_values
    }

    pub fn len(&self) -> usize {
        self.phases.len()
    }

    pub fn is_empty(&self) -> bool {
        self.phases.is_empty()
    }

    pub fn dims(&self) -> (usize, usize) {
        self.phases[0].dims()
    }

    /// Largest pointwise `|Σᵢ uᵢ − 1|`.
    pub fn sum_deviation(&self) -> f64 {
        let n = self.phases[0].len();
        (0..n)
            .map(|k| (self.phases.iter().map(|p| p.values()[k]).sum::<f64>() - 1.0).abs())
            .fold(0.0, f64::max)
    }

    fn check_sum(&self) -> Result<()> {
        let deviation = self.sum_deviation();
        if deviation > SUM_TOLERANCE {
            return Err(Error::param(
                "phases",
                format!("concentrations do not sum to one (deviation {deviation:e})"),
            ));
        }
        Ok(())
    }
}

/// Splits `f` into concentrations: exact gray values map to a pure phase,
/// values in between interpolate linearly between the two bracketing
/// phases, and values outside `[g₁, g_Y]` clamp to the end phase.
pub fn phase_decompose(f: &ScalarField, gray_values: &[f64]) -> Result<PhaseStack> {
    check_gray_values(gray_values)?;
    let y = gray_values.len();
    let n = f.len();
    let mut phases = vec![vec![0.0; n]; y];
    let (lo, hi) = (gray_values[0], gray_values[y - 1]);
    for (k, &v) in f.values().iter().enumerate() {
        let v = v.clamp(lo, hi);
        // first index with g[i] > v, so g[i-1] <= v < g[i]
        let upper = gray_values.partition_point(|&g| g <= v);
        if upper == 0 {
            phases[0][k] = 1.0;
        } else if upper == y || gray_values[upper - 1] == v {
            phases[upper - 1][k] = 1.0;
        } else {
            let (g0, g1) = (gray_values[upper - 1], gray_values[upper]);
            let t = (v - g0) / (g1 - g0);
            phases[upper - 1][k] = 1.0 - t;
            phases[upper][k] = t;
        }
    }
    let phases = phases.into_iter().map(|values| f.like(values)).collect();
    PhaseStack::new(phases, gray_values.to_vec())
}

/// `f_r = Σᵢ gᵢ uᵢ`.
pub fn reconstruct(stack: &PhaseStack) -> ScalarField {
    let first = &stack.phases[0];
    let mut out = vec![0.0; first.len()];
    for (phase, &g) in stack.phases.iter().zip(&stack.gray_values) {
        for (o, &u) in out.iter_mut().zip(phase.values()) {
            *o += g * u;
        }
    }
    first.like(out)
}

/// Evenly spaced gray values `i / (Y − 1)`.
pub fn uniform_gray_values(levels: usize) -> Result<Vec<f64>> {
    if !(2..=MAX_PHASES).contains(&levels) {
        return Err(Error::param(
            "gray_levels",
            format!("must be between 2 and {MAX_PHASES}, got {levels}"),
        ));
    }
    Ok((0..levels)
        .map(|i| i as f64 / (levels - 1) as f64)
        .collect())
}

#[derive(Debug, Clone)]
pub struct MultiphaseProblem {
    target: PhaseStack,
    mask: ScalarField,
    lambda0: f64,
    eps: f64,
}

impl MultiphaseProblem {
    /// Decomposes the damaged image `f` over `gray_values`.
    pub fn new(
        f: &ScalarField,
        mask: ScalarField,
        gray_values: &[f64],
        lambda0: f64,
        eps: f64,
    ) -> Result<Self> {
        // reuse the binary problem's validation of mask and scalars
        crate::inpaint::InpaintProblem::new(f.clone(), mask.clone(), lambda0, eps)?;
        Ok(Self {
            target: phase_decompose(f, gray_values)?,
            mask,
            lambda0,
            eps,
        })
    }

    /// Fidelity data `fᵢ`, also the initial concentrations.
    pub fn target(&self) -> &PhaseStack {
        &self.target
    }

    pub fn mask(&self) -> &ScalarField {
        &self.mask
    }

    pub fn lambda0(&self) -> f64 {
        self.lambda0
    }

    pub fn eps(&self) -> f64 {
        self.eps
    }
}

pub fn multiphase_step(
    stack: &PhaseStack,
    problem: &MultiphaseProblem,
    config: &SolverConfig,
    plan: &SpectralPlan,
) -> Result<PhaseStack> {
    config.validate()?;
    if stack.len() != problem.target.len() || stack.dims() != problem.target.dims() {
        return Err(Error::DimensionMismatch {
            left: stack.dims(),
            right: problem.target.dims(),
        });
    }
    step_at(stack, problem, config, problem.eps, plan)
}

fn step_at(
    stack: &PhaseStack,
    problem: &MultiphaseProblem,
    config: &SolverConfig,
    eps: f64,
    plan: &SpectralPlan,
) -> Result<PhaseStack> {
    let k = config.coefficients(eps, problem.lambda0);
    let y = stack.len() as f64;
    let n = stack.phases[0].len();
    let mut mean_wp = vec![0.0; n];
    for phase in &stack.phases {
        for (m, &u) in mean_wp.iter_mut().zip(phase.values()) {
            *m += w_prime(u);
        }
    }
    for m in &mut mean_wp {
        *m /= y;
    }

    let phases = stack
        .phases
        .par_iter()
        .zip(problem.target.phases.par_iter())
        .map(|(u, f)| {
            let potential: Vec<f64> = u
                .values()
                .iter()
                .zip(&mean_wp)
                .map(|(&v, &m)| w_prime(v) - m)
                .collect();
            let forcing: Vec<f64> = problem
                .mask
                .values()
                .iter()
                .zip(f.values())
                .zip(u.values())
                .map(|((&mk, &fv), &v)| mk * problem.lambda0 * (fv - v))
                .collect();
            semi_implicit_update(u, &potential, &forcing, k, plan)
        })
        .collect::<Result<Vec<_>>>()?;
    let next = PhaseStack {
        phases,
        gray_values: stack.gray_values.clone(),
    };
    next.check_sum()?;
    Ok(next)
}

fn energies(
    stack: &PhaseStack,
    problem: &MultiphaseProblem,
    eps: f64,
    plan: &SpectralPlan,
) -> Result<Energies> {
    let h2 = stack.phases[0].spacing().powi(2);
    let mut e1 = 0.0;
    let mut fid = 0.0;
    for (u, f) in stack.phases.iter().zip(&problem.target.phases) {
        let well: f64 = u.values().iter().map(|&v| w(v)).sum::<f64>() * h2;
        e1 += 0.5 * eps * plan.gradient_energy(u)? + well / eps;
        fid += problem
            .mask
            .values()
            .iter()
            .zip(f.values())
            .zip(u.values())
            .map(|((&m, &fv), &v)| m * (fv - v) * (fv - v))
            .sum::<f64>()
            * h2;
    }
    Ok(Energies {
        e1,
        e2: problem.lambda0 * fid,
    })
}

#[derive(Debug, Clone)]
pub struct MultiphaseRun {
    pub stack: PhaseStack,
    pub diagnostics: RunDiagnostics,
}

impl MultiphaseRun {
    pub fn image(&self) -> ScalarField {
        reconstruct(&self.stack)
    }
}

/// Evolves from `uᵢ⁰ = fᵢ`; the recorded mass is that of the reconstruction.
pub fn run_multiphase(problem: &MultiphaseProblem, config: &SolverConfig) -> Result<MultiphaseRun> {
    let plan = SpectralPlan::for_field(&problem.target.phases[0])?;
    let (stack, diagnostics) = drive(
        config,
        problem.eps,
        problem.target.clone(),
        |s, eps| step_at(s, problem, config, eps, &plan),
        |a, b| residual(a.phases.iter().zip(&b.phases), config.dt),
        |s, eps| {
            Ok((
                energies(s, problem, eps, &plan)?,
                integrate(&reconstruct(s)),
            ))
        },
    )?;
    Ok(MultiphaseRun { stack, diagnostics })
}
