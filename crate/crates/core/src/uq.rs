//! Statistics of mode stacks and the Monte Carlo reference solver.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::field::{ScalarField, SpectralPlan};
use crate::galerkin::ModeStack;
use crate::inpaint::{evolve, InpaintProblem, SolverConfig};

/// `E[Σ uᵢΦᵢ] = u₀`.
pub fn mean_field(stack: &ModeStack) -> ScalarField {
    stack.modes()[0].clone()
}

/// `Var[Σ uᵢΦᵢ] = Σ_{i≥1} γᵢ uᵢ²`.
pub fn variance_field(stack: &ModeStack) -> ScalarField {
    let gamma = stack.tensors().gamma();
    let first = &stack.modes()[0];
    let mut var = vec![0.0; first.len()];
    for (mode, &g) in stack.modes().iter().zip(gamma).skip(1) {
        for (v, &u) in var.iter_mut().zip(mode.values()) {
            *v += g * u * u;
        }
    }
    first.like(var)
}

/// Distribution of the constant added to the initial image.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum NoiseModel {
    /// `Z ~ N(0, σ²)`.
    Gaussian { sigma: f64 },
    /// `Z ~ U(0, δ)`.
    Uniform { delta: f64 },
}

impl NoiseModel {
    fn validate(&self) -> Result<()> {
        let (name, v) = match *self {
            NoiseModel::Gaussian { sigma } => ("sigma", sigma),
            NoiseModel::Uniform { delta } => ("delta", delta),
        };
        if !(v.is_finite() && v >= 0.0) {
            return Err(Error::param(name, format!("must be >= 0, got {v}")));
        }
        Ok(())
    }

    /// Draw for sample `index`. Each sample has its own ChaCha stream, so
    /// the value does not depend on evaluation order. Uniform draws are
    /// `δU` with the same `U` for every `δ`.
    pub fn draw(&self, seed: u64, index: u64) -> f64 {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(index);
        match *self {
            NoiseModel::Gaussian { sigma } => {
                let z: f64 = StandardNormal.sample(&mut rng);
                sigma * z
            }
            NoiseModel::Uniform { delta } => delta * rng.random::<f64>(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MonteCarloResult {
    pub mean: ScalarField,
    /// Unbiased sample variance.
    pub variance: ScalarField,
    /// `√(variance / samples)`.
    pub stderr: ScalarField,
    pub samples: usize,
}

const BATCH: usize = 32;

/// Solves from `f + Z` for `steps` steps for each of `samples` draws.
pub fn monte_carlo(
    problem: &InpaintProblem,
    noise: NoiseModel,
    samples: usize,
    seed: u64,
    config: &SolverConfig,
    steps: usize,
) -> Result<MonteCarloResult> {
    monte_carlo_range(problem, noise, 0..samples as u64, seed, config, steps)
}

/// As [`monte_carlo`] over the sample indices in `range`.
pub fn monte_carlo_range(
    problem: &InpaintProblem,
    noise: NoiseModel,
    range: std::ops::Range<u64>,
    seed: u64,
    config: &SolverConfig,
    steps: usize,
) -> Result<MonteCarloResult> {
    let samples = (range.end.saturating_sub(range.start)) as usize;
    if samples < 2 {
        return Err(Error::param(
            "samples",
            format!("need at least 2, got {samples}"),
        ));
    }
    noise.validate()?;
    config.validate()?;
    let f = problem.f();
    let plan = SpectralPlan::for_field(f)?;
    let n = f.len();

    // shifted sums around the first sample keep σ = 0 exactly zero
    let mut shift: Option<Vec<f64>> = None;
    let mut s1 = vec![0.0; n];
    let mut s2 = vec![0.0; n];
    let indices: Vec<u64> = range.collect();
    for batch in indices.chunks(BATCH) {
        let results = batch
            .par_iter()
            .map(|&i| {
                let z = noise.draw(seed, i);
                let u = evolve(f.map(|v| v + z), problem, config, steps, &plan)
                    .map_err(|_| Error::NonFiniteSample { sample: i as usize })?;
                if u.values().iter().any(|v| !v.is_finite()) {
                    return Err(Error::NonFiniteSample { sample: i as usize });
                }
                Ok(u)
            })
            .collect::<Result<Vec<_>>>()?;
        for u in results {
            let k = shift.get_or_insert_with(|| u.values().to_vec());
            for p in 0..n {
                let d = u.values()[p] - k[p];
                s1[p] += d;
                s2[p] += d * d;
            }
        }
    }
    let k = shift.expect("at least two samples");
    let m = samples as f64;
    let mean: Vec<f64> = (0..n).map(|p| k[p] + s1[p] / m).collect();
    let variance: Vec<f64> = (0..n)
        .map(|p| ((s2[p] - s1[p] * s1[p] / m) / (m - 1.0)).max(0.0))
        .collect();
    let stderr: Vec<f64> = variance.iter().map(|v| (v / m).sqrt()).collect();
    Ok(MonteCarloResult {
        mean: f.like(mean),
        variance: f.like(variance),
        stderr: f.like(stderr),
        samples,
    })
}
