//! First-order perturbation expansion `u = u₀ + Z u₁ + O(Z²)` for
//! `Z ∈ (0, δ)`.
//!
//! `u₀` solves the deterministic flow. `u₁` solves its linearisation:
//!
//! ```text
//! ∂t u₁ = −Δ(εΔu₁ − W″(u₀) u₁ / ε) − λ u₁,   W″(u) = 12u² − 12u + 2
//! ```
//!
//! with `W″(u₀ⁿ)` frozen at the old time level, so `u₁` is the exact
//! derivative of the discrete `u₀` map with respect to a constant shift of
//! the initial data.

use crate::error::{Error, Result};
use crate::field::{integrate, ScalarField, SpectralPlan};
use crate::inpaint::{
    ch_step_unchecked, drive, energies_at, residual, semi_implicit_update, w_second,
    InpaintProblem, RunDiagnostics, SolverConfig, StepCoefficients,
};

/// Above this noise scale the expansion is reported as unreliable.
pub const DELTA_WARN: f64 = 0.3;

#[derive(Debug, Clone, PartialEq)]
pub struct PerturbationState {
    pub u0: ScalarField,
    pub u1: ScalarField,
    pub delta: f64,
}

impl PerturbationState {
    pub fn new(u0: ScalarField, u1: ScalarField, delta: f64) -> Result<Self> {
        u0.ensure_same_dims(&u1)?;
        if !(delta.is_finite() && delta >= 0.0) {
            return Err(Error::param("delta", format!("must be >= 0, got {delta}")));
        }
        Ok(Self { u0, u1, delta })
    }

    /// `u₀ = u⁰`, `u₁ = 1`.
    pub fn initial(u0: &ScalarField, delta: f64) -> Result<Self> {
        Self::new(u0.clone(), u0.map(|_| 1.0), delta)
    }

    /// `δ max|u₁| / max|u₀|`; the expansion assumes this is small.
    pub fn ordering_ratio(&self) -> f64 {
        let top = self.u0.max_abs();
        if top == 0.0 {
            return f64::INFINITY;
        }
        self.delta * self.u1.max_abs() / top
    }

    pub fn delta_warning(&self) -> Option<String> {
        (self.delta > DELTA_WARN).then(|| {
            format!(
                "delta = {} exceeds {DELTA_WARN}; the first-order expansion may be inaccurate",
                self.delta
            )
        })
    }
}

pub fn perturbation_step(
    state: &PerturbationState,
    problem: &InpaintProblem,
    config: &SolverConfig,
    plan: &SpectralPlan,
) -> Result<PerturbationState> {
    config.validate()?;
    state.u0.ensure_same_dims(problem.f())?;
    step_with(
        state,
        problem,
        config.coefficients(problem.eps(), problem.lambda0()),
        plan,
    )
}

fn step_with(
    state: &PerturbationState,
    problem: &InpaintProblem,
    k: StepCoefficients,
    plan: &SpectralPlan,
) -> Result<PerturbationState> {
    let potential: Vec<f64> = state
        .u0
        .values()
        .iter()
        .zip(state.u1.values())
        .map(|(&a, &b)| w_second(a) * b)
        .collect();
    let forcing: Vec<f64> = problem
        .fidelity_weight()
        .zip(state.u1.values())
        .map(|(l, &b)| -l * b)
        .collect();
    let u1 = semi_implicit_update(&state.u1, &potential, &forcing, k, plan)?;
    let u0 = ch_step_unchecked(&state.u0, problem, k, plan)?;
    Ok(PerturbationState {
        u0,
        u1,
        delta: state.delta,
    })
}

/// `E[u₀ + Z u₁] = u₀ + (δ/2) u₁` for `Z ~ U(0, δ)`.
pub fn perturbation_mean(state: &PerturbationState) -> ScalarField {
    let half = 0.5 * state.delta;
    state
        .u0
        .zip_map(&state.u1, |a, b| a + half * b)
        .expect("state fields share dimensions")
}

/// First-order variance `(δ²/12) u₁²`.
pub fn perturbation_variance(state: &PerturbationState) -> ScalarField {
    let c = state.delta * state.delta / 12.0;
    state.u1.map(|b| c * b * b)
}

#[derive(Debug, Clone)]
pub struct PerturbationRun {
    pub state: PerturbationState,
    pub diagnostics: RunDiagnostics,
}

impl PerturbationRun {
    pub fn ordering_ratio(&self) -> f64 {
        self.state.ordering_ratio()
    }
}

/// Runs both orders from `u⁰ = f`. The residual covers `u₀` and `u₁`;
/// energies and mass are those of `u₀`.
pub fn run_perturbation(
    problem: &InpaintProblem,
    delta: f64,
    config: &SolverConfig,
) -> Result<PerturbationRun> {
    let state = PerturbationState::initial(problem.f(), delta)?;
    let plan = SpectralPlan::for_field(problem.f())?;
    let (state, diagnostics) = drive(
        config,
        problem.eps(),
        state,
        |s, eps| {
            step_with(
                s,
                problem,
                config.coefficients(eps, problem.lambda0()),
                &plan,
            )
        },
        |a, b| residual([(&a.u0, &b.u0), (&a.u1, &b.u1)].into_iter(), config.dt),
        |s, eps| Ok((energies_at(&s.u0, problem, eps, &plan)?, integrate(&s.u0))),
    )?;
    Ok(PerturbationRun { state, diagnostics })
}

/// Exactly `steps` steps at the problem's ε.
pub fn evolve_perturbation(
    state: PerturbationState,
    problem: &InpaintProblem,
    config: &SolverConfig,
    steps: usize,
    plan: &SpectralPlan,
) -> Result<PerturbationState> {
    config.validate()?;
    state.u0.ensure_same_dims(problem.f())?;
    let k = config.coefficients(problem.eps(), problem.lambda0());
    let mut s = state;
    for _ in 0..steps {
        s = step_with(&s, problem, k, plan)?;
    }
    Ok(s)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::inpaint::{ch_step, evolve};

    fn stripe(n: usize) -> ScalarField {
        ScalarField::from_fn(
            n,
            n,
            1.0,
            |x, _| if x > 5.0 && x < 10.0 { 1.0 } else { 0.0 },
        )
        .unwrap()
    }

    fn mask(n: usize) -> ScalarField {
        ScalarField::from_fn(n, n, 1.0, |x, y| {
            if (6.0..10.0).contains(&x) && (6.0..10.0).contains(&y) {
                0.0
            } else {
                1.0
            }
        })
        .unwrap()
    }

    #[test]
    fn well_state_matches_closed_form() {
        // u₀ ≡ 1 = f: u₁ obeys a constant-coefficient linear scheme,
        // diagonal in cosine space with W″(1) = 2.
        let n = 16;
        let f = ScalarField::constant(n, n, 1.0).unwrap();
        let problem = InpaintProblem::new(f.clone(), mask(n), 5.0, 0.8).unwrap();
        let plan = SpectralPlan::for_field(&f).unwrap();
        let config = SolverConfig::default();
        let u1 = ScalarField::from_fn(n, n, 1.0, |x, y| (0.2 * x).cos() + 0.3 * (0.5 * y).sin())
            .unwrap();
        let state = PerturbationState::new(f.clone(), u1.clone(), 0.1).unwrap();
        let next = perturbation_step(&state, &problem, &config, &plan).unwrap();
        assert_eq!(next.u0, f);

        // only valid where the fidelity weight is spatially constant, so use λ0 = 0
        let problem = InpaintProblem::new(f.clone(), mask(n), 0.0, 0.8).unwrap();
        let next = perturbation_step(&state, &problem, &config, &plan).unwrap();
        let (eps, dt) = (0.8, config.dt);
        let (c1, c2) = (3.0 / eps, 0.0);
        let coeffs = plan.forward(&u1).unwrap();
        let expect: Vec<f64> = coeffs
            .iter()
            .zip(plan.eigenvalues())
            .map(|(&c, &lam)| {
                let k2 = -lam;
                let rhs = (1.0 / dt + c2) * c + k2 * (c1 * c - 2.0 * c / eps);
                rhs / (1.0 / dt + eps * k2 * k2 + c1 * k2 + c2)
            })
            .collect();
        let expect = plan.inverse(expect);
        for (a, b) in next.u1.values().iter().zip(expect.values()) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn zero_first_order_stays_zero() {
        let n = 16;
        let f = stripe(n);
        let problem = InpaintProblem::new(f.clone(), mask(n), 10.0, 1.0).unwrap();
        let plan = SpectralPlan::for_field(&f).unwrap();
        let mut s = PerturbationState::new(f.clone(), f.map(|_| 0.0), 0.05).unwrap();
        for _ in 0..5 {
            s = perturbation_step(&s, &problem, &SolverConfig::default(), &plan).unwrap();
            assert_eq!(s.u1.max_abs(), 0.0);
        }
    }

    #[test]
    fn leading_order_is_the_deterministic_path() {
        let n = 16;
        let f = stripe(n);
        let problem = InpaintProblem::new(f.clone(), mask(n), 10.0, 1.0).unwrap();
        let plan = SpectralPlan::for_field(&f).unwrap();
        let config = SolverConfig::default();
        let mut s = PerturbationState::initial(&f, 0.05).unwrap();
        let mut u = f.clone();
        for _ in 0..10 {
            s = perturbation_step(&s, &problem, &config, &plan).unwrap();
            u = ch_step(&u, &problem, &config, &plan).unwrap();
            assert_eq!(s.u0, u);
        }
    }

    #[test]
    fn first_order_is_linear_in_initial_data() {
        let n = 16;
        let f = stripe(n);
        let problem = InpaintProblem::new(f.clone(), mask(n), 10.0, 1.0).unwrap();
        let plan = SpectralPlan::for_field(&f).unwrap();
        let config = SolverConfig::default();
        let mut a = PerturbationState::initial(&f, 0.05).unwrap();
        let mut b = PerturbationState::new(f.clone(), f.map(|_| 2.0), 0.05).unwrap();
        for _ in 0..20 {
            a = perturbation_step(&a, &problem, &config, &plan).unwrap();
            b = perturbation_step(&b, &problem, &config, &plan).unwrap();
            for (x, y) in a.u1.values().iter().zip(b.u1.values()) {
                assert!((2.0 * x - y).abs() < 1e-12 * y.abs().max(1.0));
            }
        }
    }

    #[test]
    fn first_order_matches_finite_difference_of_solver() {
        let n = 16;
        let f = stripe(n);
        let problem = InpaintProblem::new(f.clone(), mask(n), 10.0, 1.0).unwrap();
        let plan = SpectralPlan::for_field(&f).unwrap();
        let config = SolverConfig::default();
        let s = evolve_perturbation(
            PerturbationState::initial(&f, 0.0).unwrap(),
            &problem,
            &config,
            10,
            &plan,
        )
        .unwrap();
        let h = 1e-6;
        let up = evolve(f.map(|v| v + h), &problem, &config, 10, &plan).unwrap();
        let um = evolve(f.map(|v| v - h), &problem, &config, 10, &plan).unwrap();
        for k in 0..n * n {
            let fd = (up.values()[k] - um.values()[k]) / (2.0 * h);
            assert!(
                (fd - s.u1.values()[k]).abs() < 1e-6,
                "{k}: {fd} {}",
                s.u1.values()[k]
            );
        }
    }

    #[test]
    fn mean_and_variance() {
        let f = stripe(8);
        let s = PerturbationState::new(f.clone(), f.map(|_| 1.0), 0.2).unwrap();
        let m = perturbation_mean(&s);
        for (a, b) in m.values().iter().zip(f.values()) {
            assert!((a - (b + 0.1)).abs() < 1e-15);
        }
        let v = perturbation_variance(&s);
        assert!(v.values().iter().all(|&x| (x - 0.04 / 12.0).abs() < 1e-17));
        let z = PerturbationState::new(f.clone(), f.map(|_| 3.0), 0.0).unwrap();
        assert_eq!(perturbation_mean(&z), f);
    }

    #[test]
    fn large_delta_warns_but_runs() {
        let n = 8;
        let f = stripe(n);
        let problem = InpaintProblem::new(f.clone(), mask(n), 1.0, 1.0).unwrap();
        let config = SolverConfig {
            max_steps: 3,
            ..SolverConfig::default()
        };
        let run = run_perturbation(&problem, 0.5, &config).unwrap();
        assert!(run.state.delta_warning().is_some());
        assert_eq!(run.diagnostics.steps(), 3);
        assert!(run.ordering_ratio().is_finite());
        assert!(PerturbationState::initial(&f, 0.1)
            .unwrap()
            .delta_warning()
            .is_none());
        assert!(PerturbationState::initial(&f, -0.1).is_err());
    }
}
