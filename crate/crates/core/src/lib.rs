//! Cahn-Hilliard image inpainting with uncertainty quantification.
//!
//! The deterministic solvers ([`inpaint`], [`multiphase`]) evolve the
//! modified Cahn-Hilliard flow with a convexity-split cosine-spectral
//! scheme. Noisy initial data is handled three ways: intrusive stochastic
//! Galerkin over a polynomial chaos basis ([`galerkin`], [`gpc`]), a
//! first-order perturbation expansion ([`perturbation`]), and a Monte Carlo
//! oracle ([`uq`]). [`wavelet`] provides a Haar basis as an alternative
//! representation of functions of the random input.

pub mod cli;
pub mod error;
pub mod field;
pub mod galerkin;
pub mod gpc;
pub mod inpaint;
pub mod io;
pub mod multiphase;
pub mod perturbation;
pub mod uq;
pub mod wavelet;

pub use error::{Error, Result};
pub use field::{implicit_solve, integrate, laplacian, ScalarField, SpectralPlan};
pub use galerkin::{
    galerkin_step, init_modes, nonlinear_term, reduced_gaussian_step, run_galerkin, GalerkinRun,
    ModeStack,
};
pub use inpaint::{
    ch_step, energies, run_inpaint, w_prime, Energies, EpsStage, InpaintProblem, InpaintRun,
    RunDiagnostics, SolverConfig, StepRecord,
};
pub use perturbation::{
    perturbation_mean, perturbation_step, run_perturbation, PerturbationRun, PerturbationState,
};
pub use uq::{mean_field, monte_carlo, variance_field, MonteCarloResult, NoiseModel};
