//! Binary Cahn-Hilliard inpainting.
//!
//! The flow is `u_t = Δ(−εΔu + W'(u)/ε) + λ(f − u)` with the double well
//! `W(u) = u²(u−1)²` and `λ = λ0` on known pixels, `0` inside the damaged
//! region. Time stepping uses convexity splitting: `εΔ²`, `−C1Δ` and `C2`
//! are implicit, everything else is explicit, so each step is one diagonal
//! solve in cosine space.

use crate::error::{Error, Result};
use crate::field::{integrate, ScalarField, SpectralPlan};

/// Double-well potential `u²(u−1)²`.
pub fn w(u: f64) -> f64 {
    let v = u * (u - 1.0);
    v * v
}

/// `W'(u) = 4u³ − 6u² + 2u`.
pub fn w_prime(u: f64) -> f64 {
    4.0 * (u * u * u) - 6.0 * (u * u) + 2.0 * u
}

/// `W''(u) = 12u² − 12u + 2`.
pub fn w_second(u: f64) -> f64 {
    12.0 * (u * u) - 12.0 * u + 2.0
}

#[derive(Debug, Clone)]
pub struct InpaintProblem {
    f: ScalarField,
    mask: ScalarField,
    lambda0: f64,
    eps: f64,
}

impl InpaintProblem {
    /// `mask` is 1 on known pixels and 0 inside the inpainting domain.
    pub fn new(f: ScalarField, mask: ScalarField, lambda0: f64, eps: f64) -> Result<Self> {
        f.ensure_same_dims(&mask)?;
        if let Some(i) = mask.values().iter().position(|&m| m != 0.0 && m != 1.0) {
            return Err(Error::param(
                "mask",
                format!("value at index {i} is not 0 or 1"),
            ));
        }
        if !(lambda0.is_finite() && lambda0 >= 0.0) {
            return Err(Error::param(
                "lambda0",
                format!("must be >= 0, got {lambda0}"),
            ));
        }
        if !(eps.is_finite() && eps > 0.0) {
            return Err(Error::param("eps", format!("must be > 0, got {eps}")));
        }
        Ok(Self {
            f,
            mask,
            lambda0,
            eps,
        })
    }

    pub fn f(&self) -> &ScalarField {
        &self.f
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

    pub fn with_eps(&self, eps: f64) -> Result<Self> {
        Self::new(self.f.clone(), self.mask.clone(), self.lambda0, eps)
    }

    /// Pointwise `λ(x, y)`.
    pub fn fidelity_weight(&self) -> impl Iterator<Item = f64> + '_ {
        self.mask.values().iter().map(move |&m| m * self.lambda0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EpsStage {
    pub eps: f64,
    pub steps: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolverConfig {
    pub dt: f64,
    /// `None` means `3/ε` of the active stage.
    pub c1: Option<f64>,
    /// `None` means `λ0`.
    pub c2: Option<f64>,
    pub max_steps: usize,
    pub tol: f64,
    pub eps_schedule: Option<Vec<EpsStage>>,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            dt: 1.0,
            c1: None,
            c2: None,
            max_steps: 10_000,
            tol: 1e-6,
            eps_schedule: None,
        }
    }
}

impl SolverConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.dt.is_finite() && self.dt > 0.0) {
            return Err(Error::param("dt", format!("must be > 0, got {}", self.dt)));
        }
        if let Some(c1) = self.c1 {
            if !(c1.is_finite() && c1 > 0.0) {
                return Err(Error::param("c1", format!("must be > 0, got {c1}")));
            }
        }
        if let Some(c2) = self.c2 {
            if !(c2.is_finite() && c2 > 0.0) {
                return Err(Error::param("c2", format!("must be > 0, got {c2}")));
            }
        }
        if !(self.tol.is_finite() && self.tol >= 0.0) {
            return Err(Error::param(
                "tol",
                format!("must be >= 0, got {}", self.tol),
            ));
        }
        if let Some(stages) = &self.eps_schedule {
            if stages.is_empty() {
                return Err(Error::param("eps_schedule", "needs at least one stage"));
            }
            for s in stages {
                if !(s.eps.is_finite() && s.eps > 0.0) || s.steps == 0 {
                    return Err(Error::param(
                        "eps_schedule",
                        format!("stage ({}, {}) needs eps > 0 and steps > 0", s.eps, s.steps),
                    ));
                }
            }
        }
        Ok(())
    }

    pub fn c1_for(&self, eps: f64) -> f64 {
        self.c1.unwrap_or(3.0 / eps)
    }

    pub fn c2_for(&self, lambda0: f64) -> f64 {
        self.c2.unwrap_or(lambda0)
    }

    /// The stages to run: the schedule, or `(eps, max_steps)`.
    pub fn stages(&self, eps: f64) -> Vec<EpsStage> {
        match &self.eps_schedule {
            Some(s) => s.clone(),
            None => vec![EpsStage {
                eps,
                steps: self.max_steps,
            }],
        }
    }

    pub(crate) fn coefficients(&self, eps: f64, lambda0: f64) -> StepCoefficients {
        StepCoefficients {
            inv_dt: 1.0 / self.dt,
            eps,
            c1: self.c1_for(eps),
            c2: self.c2_for(lambda0),
        }
    }
}

#[derive(Debug, Clone, Copy)]
pub(crate) struct StepCoefficients {
    pub inv_dt: f64,
    pub eps: f64,
    pub c1: f64,
    pub c2: f64,
}

/// One convexity-split step for a single field.
///
/// `potential` is the pointwise nonlinear chemical potential before the
/// `1/ε` factor and `forcing` the explicit source (the fidelity term).
/// Solves
/// `(1/dt + εΔ² − C1Δ + C2) u⁺ = u/dt + Δ(potential/ε) + forcing − C1Δu + C2u`.
pub(crate) fn semi_implicit_update(
    u: &ScalarField,
    potential: &[f64],
    forcing: &[f64],
    k: StepCoefficients,
    plan: &SpectralPlan,
) -> Result<ScalarField> {
    let inv_eps = 1.0 / k.eps;
    let diag: Vec<f64> = u
        .values()
        .iter()
        .zip(forcing)
        .map(|(&v, &s)| (k.inv_dt + k.c2) * v + s)
        .collect();
    let stiff: Vec<f64> = u
        .values()
        .iter()
        .zip(potential)
        .map(|(&v, &p)| k.c1 * v - p * inv_eps)
        .collect();
    let mut rhs = plan.forward(&u.like(diag))?;
    let stiff = plan.forward(&u.like(stiff))?;
    for ((r, s), &lam) in rhs.iter_mut().zip(&stiff).zip(plan.eigenvalues()) {
        *r += -lam * s;
    }
    plan.solve_coefficients(&mut rhs, k.inv_dt, k.eps, k.c1, k.c2);
    let next = plan.inverse(rhs);
    next.check_finite("time step result")?;
    Ok(next)
}

pub(crate) fn fidelity_forcing(problem: &InpaintProblem, u: &ScalarField) -> Vec<f64> {
    problem
        .fidelity_weight()
        .zip(problem.f.values())
        .zip(u.values())
        .map(|((l, &f), &v)| l * (f - v))
        .collect()
}

/// Advances `u` by one step of size `config.dt` at the problem's `ε`.
pub fn ch_step(
    u: &ScalarField,
    problem: &InpaintProblem,
    config: &SolverConfig,
    plan: &SpectralPlan,
) -> Result<ScalarField> {
    config.validate()?;
    u.ensure_same_dims(&problem.f)?;
    ch_step_unchecked(
        u,
        problem,
        config.coefficients(problem.eps, problem.lambda0),
        plan,
    )
}

pub(crate) fn ch_step_unchecked(
    u: &ScalarField,
    problem: &InpaintProblem,
    k: StepCoefficients,
    plan: &SpectralPlan,
) -> Result<ScalarField> {
    let potential: Vec<f64> = u.values().iter().map(|&v| w_prime(v)).collect();
    let forcing = fidelity_forcing(problem, u);
    semi_implicit_update(u, &potential, &forcing, k, plan)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Energies {
    pub e1: f64,
    pub e2: f64,
}

/// Ginzburg-Landau energy `E1` and fidelity energy `E2`.
///
/// The gradient term is evaluated spectrally from the cosine coefficients.
pub fn energies(
    u: &ScalarField,
    problem: &InpaintProblem,
    plan: &SpectralPlan,
) -> Result<Energies> {
    u.ensure_same_dims(&problem.f)?;
    energies_at(u, problem, problem.eps, plan)
}

pub(crate) fn energies_at(
    u: &ScalarField,
    problem: &InpaintProblem,
    eps: f64,
    plan: &SpectralPlan,
) -> Result<Energies> {
    let h2 = u.spacing() * u.spacing();
    let grad = plan.gradient_energy(u)?;
    let well: f64 = u.values().iter().map(|&v| w(v)).sum::<f64>() * h2;
    let fid: f64 = problem
        .mask
        .values()
        .iter()
        .zip(problem.f.values())
        .zip(u.values())
        .map(|((&m, &f), &v)| m * (f - v) * (f - v))
        .sum::<f64>()
        * h2;
    Ok(Energies {
        e1: 0.5 * eps * grad + well / eps,
        e2: problem.lambda0 * fid,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepRecord {
    pub step: usize,
    pub time: f64,
    pub e1: f64,
    pub e2: f64,
    pub residual: f64,
    pub mass: f64,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct RunDiagnostics {
    pub records: Vec<StepRecord>,
    /// False when the step budget ran out before the residual dropped below `tol`.
    pub converged: bool,
}

impl RunDiagnostics {
    pub fn steps(&self) -> usize {
        self.records.last().map_or(0, |r| r.step)
    }

    pub fn final_residual(&self) -> Option<f64> {
        self.records.last().map(|r| r.residual)
    }
}

/// `‖a − b‖₂ / (dt √n)` summed over every component pair.
pub(crate) fn residual<'a>(
    pairs: impl Iterator<Item = (&'a ScalarField, &'a ScalarField)>,
    dt: f64,
) -> f64 {
    let mut sq = 0.0;
    let mut n = 0usize;
    for (a, b) in pairs {
        sq += a
            .values()
            .iter()
            .zip(b.values())
            .map(|(x, y)| (x - y) * (x - y))
            .sum::<f64>();
        n += a.len();
    }
    sq.sqrt() / (dt * (n as f64).sqrt())
}

/// Shared stepping loop over the ε schedule.
///
/// Each stage runs until the residual reaches `tol` or its step budget is
/// spent; `converged` reflects the final stage.
pub(crate) fn drive<S>(
    config: &SolverConfig,
    base_eps: f64,
    mut state: S,
    mut step: impl FnMut(&S, f64) -> Result<S>,
    residual: impl Fn(&S, &S) -> f64,
    mut observe: impl FnMut(&S, f64) -> Result<(Energies, f64)>,
) -> Result<(S, RunDiagnostics)> {
    config.validate()?;
    let mut diag = RunDiagnostics::default();
    let mut index = 0usize;
    for stage in config.stages(base_eps) {
        let mut stage_converged = false;
        for _ in 0..stage.steps {
            let next = step(&state, stage.eps)?;
            let r = residual(&state, &next);
            state = next;
            index += 1;
            let (en, mass) = observe(&state, stage.eps)?;
            diag.records.push(StepRecord {
                step: index,
                time: index as f64 * config.dt,
                e1: en.e1,
                e2: en.e2,
                residual: r,
                mass,
            });
            if r <= config.tol {
                stage_converged = true;
                break;
            }
        }
        diag.converged = stage_converged;
    }
    Ok((state, diag))
}

#[derive(Debug, Clone)]
pub struct InpaintRun {
    pub u: ScalarField,
    pub diagnostics: RunDiagnostics,
}

/// Runs the flow from `u⁰ = f` through the configured ε stages.
pub fn run_inpaint(problem: &InpaintProblem, config: &SolverConfig) -> Result<InpaintRun> {
    run_inpaint_from(problem.f.clone(), problem, config)
}

pub fn run_inpaint_from(
    initial: ScalarField,
    problem: &InpaintProblem,
    config: &SolverConfig,
) -> Result<InpaintRun> {
    initial.ensure_same_dims(&problem.f)?;
    let plan = SpectralPlan::for_field(&initial)?;
    let (u, diagnostics) = drive(
        config,
        problem.eps,
        initial,
        |u, eps| ch_step_unchecked(u, problem, config.coefficients(eps, problem.lambda0), &plan),
        |a, b| residual(std::iter::once((a, b)), config.dt),
        |u, eps| Ok((energies_at(u, problem, eps, &plan)?, integrate(u))),
    )?;
    Ok(InpaintRun { u, diagnostics })
}

/// Exactly `steps` steps at the problem's ε, ignoring the schedule and `tol`.
pub fn evolve(
    initial: ScalarField,
    problem: &InpaintProblem,
    config: &SolverConfig,
    steps: usize,
    plan: &SpectralPlan,
) -> Result<ScalarField> {
    config.validate()?;
    initial.ensure_same_dims(&problem.f)?;
    let k = config.coefficients(problem.eps, problem.lambda0);
    let mut u = initial;
    for _ in 0..steps {
        u = ch_step_unchecked(&u, problem, k, plan)?;
    }
    Ok(u)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ones(n: usize) -> ScalarField {
        ScalarField::constant(n, n, 1.0).unwrap()
    }

    fn random_field(n: usize, seed: u64) -> ScalarField {
        // xorshift is plenty for test data
        let mut s = seed.wrapping_mul(0x9E37_79B9_7F4A_7C15) | 1;
        let values = (0..n * n)
            .map(|_| {
                s ^= s << 13;
                s ^= s >> 7;
                s ^= s << 17;
                (s >> 11) as f64 / (1u64 << 53) as f64
            })
            .collect();
        ScalarField::new(n, n, values).unwrap()
    }

    #[test]
    fn w_prime_values() {
        assert_eq!(w_prime(0.0), 0.0);
        assert_eq!(w_prime(1.0), 0.0);
        assert_eq!(w_prime(0.5), 0.0);
        // 4*8 - 6*4 + 2*2
        assert_eq!(w_prime(2.0), 12.0);
    }

    #[test]
    fn w_prime_matches_difference_quotient() {
        for &u in &[-0.7, 0.1, 0.33, 0.9, 1.4] {
            let h = 1e-6;
            let fd = (w(u + h) - w(u - h)) / (2.0 * h);
            assert!((fd - w_prime(u)).abs() < 1e-8);
            let fd2 = (w_prime(u + h) - w_prime(u - h)) / (2.0 * h);
            assert!((fd2 - w_second(u)).abs() < 1e-7);
        }
    }

    #[test]
    fn problem_validation() {
        let f = ones(8);
        assert!(InpaintProblem::new(f.clone(), f.map(|_| 0.5), 1.0, 1.0).is_err());
        assert!(InpaintProblem::new(f.clone(), ones(8), -1.0, 1.0).is_err());
        assert!(InpaintProblem::new(f.clone(), ones(8), 1.0, 0.0).is_err());
        assert!(InpaintProblem::new(f, ScalarField::zeros(8, 9).unwrap(), 1.0, 1.0).is_err());
    }

    #[test]
    fn config_validation() {
        let mut c = SolverConfig::default();
        assert!(c.validate().is_ok());
        c.dt = 0.0;
        assert!(c.validate().is_err());
        let c = SolverConfig {
            eps_schedule: Some(vec![EpsStage { eps: 1.0, steps: 0 }]),
            ..SolverConfig::default()
        };
        assert!(c.validate().is_err());
        let c = SolverConfig {
            c1: Some(-1.0),
            ..SolverConfig::default()
        };
        assert!(c.validate().is_err());
    }

    #[test]
    fn wells_are_fixed_points() {
        for value in [0.0, 1.0] {
            let f = ScalarField::constant(16, 16, value).unwrap();
            let mask = random_field(16, 3).map(|v| if v > 0.5 { 1.0 } else { 0.0 });
            let problem = InpaintProblem::new(f.clone(), mask, 100.0, 1.0).unwrap();
            let plan = SpectralPlan::for_field(&f).unwrap();
            let next = ch_step(&f, &problem, &SolverConfig::default(), &plan).unwrap();
            for &v in next.values() {
                assert!((v - value).abs() < 1e-14);
            }
        }
    }

    #[test]
    fn mass_conserved_without_fidelity() {
        let u = random_field(16, 7);
        let problem = InpaintProblem::new(u.clone(), ones(16), 0.0, 1.0).unwrap();
        let plan = SpectralPlan::for_field(&u).unwrap();
        let config = SolverConfig {
            dt: 0.1,
            ..SolverConfig::default()
        };
        let next = ch_step(&u, &problem, &config, &plan).unwrap();
        let (m0, m1) = (integrate(&u), integrate(&next));
        assert!((m1 - m0).abs() <= 1e-10 * m0.abs());
    }

    #[test]
    fn energies_at_wells_and_half() {
        let plan = SpectralPlan::new(8, 8, 1.0).unwrap();
        for value in [0.0, 1.0] {
            let u = ScalarField::constant(8, 8, value).unwrap();
            let p = InpaintProblem::new(u.clone(), ones(8), 5.0, 0.7).unwrap();
            let e = energies(&u, &p, &plan).unwrap();
            assert!(e.e1.abs() < 1e-14);
            assert_eq!(e.e2, 0.0);
        }
        // unit-area domain: 4x4 grid with h = 1/4
        let u = ScalarField::with_spacing(4, 4, 0.25, vec![0.5; 16]).unwrap();
        let mask = ScalarField::with_spacing(4, 4, 0.25, vec![1.0; 16]).unwrap();
        let plan = SpectralPlan::for_field(&u).unwrap();
        let eps = 0.3;
        let p = InpaintProblem::new(u.clone(), mask, 1.0, eps).unwrap();
        let e = energies(&u, &p, &plan).unwrap();
        assert!((e.e1 - 0.0625 / eps).abs() < 1e-14);
    }

    #[test]
    fn fidelity_energy_ignores_damaged_pixels() {
        let f = random_field(8, 11);
        let u = f.zip_map(&random_field(8, 12), |a, b| a + b).unwrap();
        let mask = ScalarField::zeros(8, 8).unwrap();
        let p = InpaintProblem::new(f.clone(), mask, 10.0, 1.0).unwrap();
        let plan = SpectralPlan::for_field(&f).unwrap();
        assert_eq!(energies(&u, &p, &plan).unwrap().e2, 0.0);
        let p = InpaintProblem::new(f.clone(), ones(8), 10.0, 1.0).unwrap();
        assert_eq!(energies(&f, &p, &plan).unwrap().e2, 0.0);
    }

    #[test]
    fn constant_one_converges_at_first_step() {
        let f = ones(16);
        let mask = random_field(16, 5).map(|v| if v > 0.3 { 1.0 } else { 0.0 });
        let p = InpaintProblem::new(f, mask, 10.0, 1.0).unwrap();
        let run = run_inpaint(&p, &SolverConfig::default()).unwrap();
        assert!(run.diagnostics.converged);
        assert_eq!(run.diagnostics.records.len(), 1);
        assert!(run.diagnostics.records[0].residual < 1e-14);
        for &v in run.u.values() {
            assert!((v - 1.0).abs() < 1e-14);
        }
    }

    #[test]
    fn non_convergence_is_flagged() {
        let f = random_field(16, 9);
        let p = InpaintProblem::new(f, ones(16), 0.0, 1.0).unwrap();
        let config = SolverConfig {
            max_steps: 3,
            tol: 0.0,
            ..SolverConfig::default()
        };
        let run = run_inpaint(&p, &config).unwrap();
        assert!(!run.diagnostics.converged);
        assert_eq!(run.diagnostics.steps(), 3);
        let steps: Vec<_> = run.diagnostics.records.iter().map(|r| r.step).collect();
        assert_eq!(steps, vec![1, 2, 3]);
    }

    #[test]
    fn schedule_runs_every_stage() {
        let f = random_field(16, 21);
        let p = InpaintProblem::new(f, ones(16), 1.0, 1.0).unwrap();
        let config = SolverConfig {
            tol: 0.0,
            eps_schedule: Some(vec![
                EpsStage { eps: 2.0, steps: 4 },
                EpsStage { eps: 0.5, steps: 3 },
            ]),
            ..SolverConfig::default()
        };
        let run = run_inpaint(&p, &config).unwrap();
        assert_eq!(run.diagnostics.steps(), 7);
    }

    #[test]
    fn non_finite_step_is_an_error() {
        let f = random_field(8, 2).map(|v| 1e200 * v);
        let p = InpaintProblem::new(f.clone(), ones(8), 0.0, 1.0).unwrap();
        let plan = SpectralPlan::for_field(&f).unwrap();
        assert!(matches!(
            ch_step(&f, &p, &SolverConfig::default(), &plan),
            Err(Error::NonFinite { .. })
        ));
    }
}
