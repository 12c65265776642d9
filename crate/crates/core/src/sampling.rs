//! Seed-addressable random streams and the handful of distributions the agents
//! and environments draw from.

use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Gamma};

use crate::error::{Error, Result};

/// A reproducible random stream identified by `(seed, stream_id)`.
///
/// One master seed fans out into independent streams, one per replication,
/// so replications can run in any order on any number of workers.
#[derive(Debug, Clone)]
pub struct RngStream {
    seed: u64,
    stream_id: u64,
    rng: ChaCha8Rng,
}

impl RngStream {
    pub fn new(seed: u64, stream_id: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(stream_id);
        Self {
            seed,
            stream_id,
            rng,
        }
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn stream_id(&self) -> u64 {
        self.stream_id
    }

    /// Uniform draw in `[0, 1)`.
    pub fn uniform(&mut self) -> f64 {
        self.rng.random()
    }

    /// Uniform index in `0..n`. `n` must be positive.
    pub fn index(&mut self, n: usize) -> usize {
        self.rng.random_range(0..n)
    }
}

impl RngCore for RngStream {
    fn next_u32(&mut self) -> u32 {
        self.rng.next_u32()
    }

    fn next_u64(&mut self) -> u64 {
        self.rng.next_u64()
    }

    fn fill_bytes(&mut self, dst: &mut [u8]) {
        self.rng.fill_bytes(dst)
    }
}

/// Beta distribution parameters `(success_shape, failure_shape)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BetaParams {
    pub success: f64,
    pub failure: f64,
}

impl BetaParams {
    pub fn new(success: f64, failure: f64) -> Result<Self> {
        check_shape("beta success shape", success)?;
        check_shape("beta failure shape", failure)?;
        Ok(Self { success, failure })
    }

    pub fn mean(&self) -> f64 {
        self.success / (self.success + self.failure)
    }
}

/// Dirichlet concentration vector.
#[derive(Debug, Clone, PartialEq)]
pub struct DirichletParams {
    concentration: Vec<f64>,
}

impl DirichletParams {
    pub fn new(concentration: Vec<f64>) -> Result<Self> {
        if concentration.is_empty() {
            return Err(Error::validation("dirichlet needs at least one component"));
        }
        for &c in &concentration {
            check_shape("dirichlet concentration", c)?;
        }
        Ok(Self { concentration })
    }

    pub fn symmetric(k: usize, value: f64) -> Result<Self> {
        Self::new(vec![value; k])
    }

    pub fn concentration(&self) -> &[f64] {
        &self.concentration
    }

    pub fn total(&self) -> f64 {
        self.concentration.iter().sum()
    }

    pub(crate) fn add(&mut self, component: usize, amount: f64) {
        self.concentration[component] += amount;
    }
}

fn check_shape(what: &str, v: f64) -> Result<()> {
    if v.is_finite() && v > 0.0 {
        Ok(())
    } else {
        Err(Error::validation(format!(
            "{what} must be finite and > 0, got {v}"
        )))
    }
}

fn check_probability(p: f64) -> Result<()> {
    if (0.0..=1.0).contains(&p) {
        Ok(())
    } else {
        Err(Error::validation(format!("probability {p} outside [0, 1]")))
    }
}

pub fn sample_bernoulli(rng: &mut RngStream, p: f64) -> Result<bool> {
    check_probability(p)?;
    Ok(rng.uniform() < p)
}

/// Inverse-CDF categorical draw. Weights are renormalized; any rounding
/// overflow lands in the last bucket with positive weight.
pub fn sample_categorical(rng: &mut RngStream, weights: &[f64]) -> Result<usize> {
    if let Some(bad) = weights.iter().find(|w| !w.is_finite() || **w < 0.0) {
        return Err(Error::validation(format!(
            "categorical weight {bad} is invalid"
        )));
    }
    let total: f64 = weights.iter().sum();
    if total <= 0.0 {
        return Err(Error::validation("categorical weights are all zero"));
    }
    Ok(categorical_unchecked(rng, weights, total))
}

pub(crate) fn categorical_unchecked(rng: &mut RngStream, weights: &[f64], total: f64) -> usize {
    let target = rng.uniform() * total;
    let mut cumulative = 0.0;
    let mut last_positive = 0;
    for (i, &w) in weights.iter().enumerate() {
        if w > 0.0 {
            cumulative += w;
            last_positive = i;
            if target < cumulative {
                return i;
            }
        }
    }
    last_positive
}

/// Unit-scale Gamma draw (Marsaglia-Tsang squeeze, with the `U^(1/shape)`
/// boost below shape 1).
pub fn sample_gamma(rng: &mut RngStream, shape: f64) -> Result<f64> {
    check_shape("gamma shape", shape)?;
    Ok(gamma_unchecked(rng, shape))
}

fn gamma_unchecked(rng: &mut RngStream, shape: f64) -> f64 {
    Gamma::new(shape, 1.0)
        .expect("shape validated by caller")
        .sample(rng)
}

pub fn sample_beta(rng: &mut RngStream, params: &BetaParams) -> f64 {
    let x = gamma_unchecked(rng, params.success);
    let y = gamma_unchecked(rng, params.failure);
    let total = x + y;
    if total > 0.0 {
        x / total
    } else {
        // both draws underflowed (tiny shapes): fall back to the mean
        params.mean()
    }
}

pub fn sample_dirichlet(rng: &mut RngStream, params: &DirichletParams) -> Vec<f64> {
    let mut out = Vec::with_capacity(params.concentration.len());
    sample_dirichlet_into(rng, params.concentration(), &mut out);
    out
}

/// Dirichlet draw written into `out`. `concentration` must be validated.
pub(crate) fn sample_dirichlet_into(
    rng: &mut RngStream,
    concentration: &[f64],
    out: &mut Vec<f64>,
) {
    out.clear();
    out.extend(concentration.iter().map(|&c| gamma_unchecked(rng, c)));
    let total: f64 = out.iter().sum();
    if total > 0.0 {
        out.iter_mut().for_each(|v| *v /= total);
    } else {
        let sum: f64 = concentration.iter().sum();
        out.iter_mut()
            .zip(concentration)
            .for_each(|(v, c)| *v = c / sum);
    }
}
