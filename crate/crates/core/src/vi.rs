//! Coordinate-ascent mean-field variational inference for a Bernoulli bandit
//! whose implemented actions are latent.
//!
//! The factorization is `q(a) q(mu) q(pi)` with
//!
//! ```text
//! q(a_i)  = Cat(phi_i)                      one row per observation
//! q(mu_j) = Beta(alpha1'_j, alpha0'_j)      one per implemented arm
//! q(pi_k) = Dir(beta'_k1, ..., beta'_kK)    one per proposed arm
//! ```
//!
//! Each sweep updates `q(mu)`, then `q(pi)`, then `q(a)`, and evaluates the
//! ELBO. The prior normalizers `-K ln B(alpha1, alpha0)` and `-K ln B(beta)`
//! are constants and are left out of every reported ELBO value.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::sampling::{sample_dirichlet_into, RngStream};
use crate::special::{lbeta, lgamma, psi};

/// Symmetric priors: `Beta(alpha_success, alpha_failure)` on every arm's success
/// probability and `Dir(beta, ..., beta)` on every compliance row.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VIPriors {
    pub alpha_success: f64,
    pub alpha_failure: f64,
    pub beta: f64,
}

impl VIPriors {
    pub fn new(alpha_success: f64, alpha_failure: f64, beta: f64) -> Result<Self> {
        for (name, v) in [
            ("alpha_success", alpha_success),
            ("alpha_failure", alpha_failure),
            ("beta", beta),
        ] {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::validation(format!(
                    "prior {name} must be > 0, got {v}"
                )));
            }
        }
        Ok(Self {
            alpha_success,
            alpha_failure,
            beta,
        })
    }
}

impl Default for VIPriors {
    fn default() -> Self {
        Self {
            alpha_success: 1.0,
            alpha_failure: 1.0,
            beta: 1.0,
        }
    }
}

/// How responsibilities are initialized at the start of a run.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum InitMode {
    /// One `Dir(beta)` draw per row.
    PriorSample,
    /// Every row `1/K`.
    Uniform,
    /// Reuse the previous run's rows; only rows without history get a `Dir(beta)` draw.
    Warm,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VIConfig {
    /// Stop once a sweep improves the ELBO by less than this.
    pub tol: f64,
    pub max_iter: usize,
    pub init: InitMode,
}

impl Default for VIConfig {
    fn default() -> Self {
        Self {
            tol: 1e-6,
            max_iter: 500,
            init: InitMode::Warm,
        }
    }
}

impl VIConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.tol.is_finite() && self.tol > 0.0) {
            return Err(Error::validation(format!(
                "vi tol must be > 0, got {}",
                self.tol
            )));
        }
        if self.max_iter == 0 {
            return Err(Error::validation("vi max_iter must be >= 1"));
        }
        Ok(())
    }
}

/// One latent-compliance observation: the proposal and the reward it produced.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Datum {
    pub proposed: usize,
    pub reward: bool,
}

/// Mean-field parameters for one data set. Every update expects the same
/// observations, in the same order, as the rows of `phi`.
#[derive(Debug, Clone, PartialEq)]
pub struct VariationalState {
    arms: usize,
    priors: VIPriors,
    /// N x K responsibilities, row-major.
    phi: Vec<f64>,
    alpha_success: Vec<f64>,
    alpha_failure: Vec<f64>,
    /// K x K, row k is the compliance posterior of proposal k.
    beta_prime: Vec<f64>,
    elbo_trace: Vec<f64>,
    converged: bool,
    /// After `update_q_a`, rows depend only on `(z, r)`.
    shared: Option<SharedRows>,
}

/// Responsibility row of each `(z, r)` cell (row `2 z + r` of a 2K x K table)
/// and the number of observations in the cell.
#[derive(Debug, Clone, PartialEq)]
struct SharedRows {
    rows: Vec<f64>,
    counts: Vec<f64>,
}

impl VariationalState {
    /// State with no observations: every factor equals its prior.
    pub fn from_priors(arms: usize, priors: VIPriors) -> Self {
        Self {
            arms,
            priors,
            phi: Vec::new(),
            alpha_success: vec![priors.alpha_success; arms],
            alpha_failure: vec![priors.alpha_failure; arms],
            beta_prime: vec![priors.beta; arms * arms],
            elbo_trace: Vec::new(),
            converged: false,
            shared: None,
        }
    }

    /// State with the given responsibilities (N x K, row-major) and prior-valued
    /// `q(mu)`, `q(pi)`.
    pub fn with_phi(arms: usize, priors: VIPriors, phi: Vec<f64>) -> Result<Self> {
        if arms == 0 || !phi.len().is_multiple_of(arms) {
            return Err(Error::validation(format!(
                "phi of length {} is not a multiple of {arms} arms",
                phi.len()
            )));
        }
        for (i, row) in phi.chunks(arms).enumerate() {
            let total: f64 = row.iter().sum();
            if row.iter().any(|v| !(v.is_finite() && *v >= 0.0)) || (total - 1.0).abs() > 1e-12 {
                return Err(Error::validation(format!("phi row {i} is off the simplex")));
            }
        }
        let mut state = Self::from_priors(arms, priors);
        state.phi = phi;
        Ok(state)
    }

    pub fn arms(&self) -> usize {
        self.arms
    }

    pub fn priors(&self) -> VIPriors {
        self.priors
    }

    pub fn num_samples(&self) -> usize {
        self.phi.len() / self.arms
    }

    pub fn phi(&self) -> &[f64] {
        &self.phi
    }

    pub fn phi_row(&self, i: usize) -> &[f64] {
        &self.phi[i * self.arms..(i + 1) * self.arms]
    }

    pub fn alpha_success(&self) -> &[f64] {
        &self.alpha_success
    }

    pub fn alpha_failure(&self) -> &[f64] {
        &self.alpha_failure
    }

    pub fn beta_row(&self, k: usize) -> &[f64] {
        &self.beta_prime[k * self.arms..(k + 1) * self.arms]
    }

    pub fn elbo_trace(&self) -> &[f64] {
        &self.elbo_trace
    }

    pub fn converged(&self) -> bool {
        self.converged
    }

    /// Posterior mean of each arm's success probability under `q(mu)`.
    pub fn reward_means(&self) -> Vec<f64> {
        self.alpha_success
            .iter()
            .zip(&self.alpha_failure)
            .map(|(s, f)| s / (s + f))
            .collect()
    }

    fn check_data(&self, data: &[Datum]) -> Result<()> {
        if data.len() != self.num_samples() {
            return Err(Error::validation(format!(
                "{} observations for {} responsibility rows",
                data.len(),
                self.num_samples()
            )));
        }
        if self.shared.is_some() {
            // indices were checked when the cell table was built
            return Ok(());
        }
        if let Some(d) = data.iter().find(|d| d.proposed >= self.arms) {
            return Err(Error::validation(format!(
                "proposal {} out of range for {} arms",
                d.proposed, self.arms
            )));
        }
        Ok(())
    }

    /// `alpha1'_j = alpha1 + sum_i r_i phi_i(j)`, `alpha0'_j = alpha0 + sum_i (1 - r_i) phi_i(j)`.
    pub fn update_q_mu(&mut self, data: &[Datum]) -> Result<()> {
        self.check_data(data)?;
        self.alpha_success.fill(self.priors.alpha_success);
        self.alpha_failure.fill(self.priors.alpha_failure);
        let k = self.arms;
        if let Some(shared) = &self.shared {
            for (cell, (n, row)) in shared.counts.iter().zip(shared.rows.chunks(k)).enumerate() {
                let target = if cell % 2 == 1 {
                    &mut self.alpha_success
                } else {
                    &mut self.alpha_failure
                };
                target.iter_mut().zip(row).for_each(|(t, p)| *t += n * p);
            }
            return Ok(());
        }
        for (d, row) in data.iter().zip(self.phi.chunks(k)) {
            let target = if d.reward {
                &mut self.alpha_success
            } else {
                &mut self.alpha_failure
            };
            target.iter_mut().zip(row).for_each(|(t, p)| *t += p);
        }
        Ok(())
    }

    /// `beta'_{k,j} = beta + sum_i 1[z_i = k] phi_i(j)`.
    pub fn update_q_pi(&mut self, data: &[Datum]) -> Result<()> {
        self.check_data(data)?;
        let k = self.arms;
        self.beta_prime.fill(self.priors.beta);
        if let Some(shared) = &self.shared {
            for (cell, (n, row)) in shared.counts.iter().zip(shared.rows.chunks(k)).enumerate() {
                let z = cell / 2;
                let dst = &mut self.beta_prime[z * k..(z + 1) * k];
                dst.iter_mut().zip(row).for_each(|(t, p)| *t += n * p);
            }
            return Ok(());
        }
        for (d, row) in data.iter().zip(self.phi.chunks(k)) {
            let dst = &mut self.beta_prime[d.proposed * k..(d.proposed + 1) * k];
            dst.iter_mut().zip(row).for_each(|(t, p)| *t += p);
        }
        Ok(())
    }

    /// `E[ln mu_j]` and `E[ln(1 - mu_j)]` under `q(mu_j)`.
    fn expected_log_reward(&self) -> (Vec<f64>, Vec<f64>) {
        let mut hit = Vec::with_capacity(self.arms);
        let mut miss = Vec::with_capacity(self.arms);
        for (&s, &f) in self.alpha_success.iter().zip(&self.alpha_failure) {
            let total = psi(s + f);
            hit.push(psi(s) - total);
            miss.push(psi(f) - total);
        }
        (hit, miss)
    }

    /// `E[ln pi_{k,j}]` under `q(pi_k)`, K x K.
    fn expected_log_compliance(&self) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.arms * self.arms);
        for row in self.beta_prime.chunks(self.arms) {
            let total = psi(row.iter().sum());
            out.extend(row.iter().map(|&b| psi(b) - total));
        }
        out
    }

    /// Softmax of the expected log joint for every observation.
    pub fn update_q_a(&mut self, data: &[Datum]) -> Result<()> {
        self.check_data(data)?;
        let k = self.arms;
        let (hit, miss) = self.expected_log_reward();
        let log_pi = self.expected_log_compliance();
        let mut shared = vec![0.0; 2 * k * k];
        for (cell, row) in shared.chunks_mut(k).enumerate() {
            let reward_term = if cell % 2 == 1 { &hit } else { &miss };
            let z = cell / 2;
            let compliance_term = &log_pi[z * k..(z + 1) * k];
            let mut peak = f64::NEG_INFINITY;
            for ((dst, r), c) in row.iter_mut().zip(reward_term).zip(compliance_term) {
                *dst = r + c;
                peak = peak.max(*dst);
            }
            let mut total = 0.0;
            for v in row.iter_mut() {
                *v = (*v - peak).exp();
                total += *v;
            }
            if !(total.is_finite() && total > 0.0) {
                return Err(Error::State(format!(
                    "responsibility normalizer is {total} after max-subtraction"
                )));
            }
            row.iter_mut().for_each(|v| *v /= total);
        }
        let mut counts = vec![0.0; 2 * k];
        for (d, row) in data.iter().zip(self.phi.chunks_mut(k)) {
            let cell = 2 * d.proposed + usize::from(d.reward);
            counts[cell] += 1.0;
            row.copy_from_slice(&shared[cell * k..(cell + 1) * k]);
        }
        self.shared = Some(SharedRows {
            rows: shared,
            counts,
        });
        Ok(())
    }

    /// Evidence lower bound at the current variational parameters.
    pub fn elbo(&self, data: &[Datum]) -> Result<f64> {
        self.check_data(data)?;
        let k = self.arms;
        let VIPriors {
            alpha_success: a1,
            alpha_failure: a0,
            beta,
        } = self.priors;
        let (hit, miss) = self.expected_log_reward();
        let log_pi = self.expected_log_compliance();

        // reward and compliance likelihood expectations, categorical entropy
        let mut likelihood = 0.0;
        let mut assignment_entropy = 0.0;
        let mut accumulate = |n: f64, reward: bool, z: usize, row: &[f64]| {
            let reward_term = if reward { &hit } else { &miss };
            let compliance_term = &log_pi[z * k..(z + 1) * k];
            for ((&p, r), c) in row.iter().zip(reward_term).zip(compliance_term) {
                likelihood += n * p * (r + c);
                if p > 0.0 {
                    assignment_entropy -= n * p * p.ln();
                }
            }
        };
        match &self.shared {
            Some(shared) => {
                for (cell, (&n, row)) in shared.counts.iter().zip(shared.rows.chunks(k)).enumerate()
                {
                    if n > 0.0 {
                        accumulate(n, cell % 2 == 1, cell / 2, row);
                    }
                }
            }
            None => {
                for (d, row) in data.iter().zip(self.phi.chunks(k)) {
                    accumulate(1.0, d.reward, d.proposed, row);
                }
            }
        }

        let reward_prior: f64 = hit
            .iter()
            .zip(&miss)
            .map(|(h, m)| (a1 - 1.0) * h + (a0 - 1.0) * m)
            .sum();
        let compliance_prior: f64 = (beta - 1.0) * log_pi.iter().sum::<f64>();

        let beta_entropy: f64 = self
            .alpha_success
            .iter()
            .zip(&self.alpha_failure)
            .map(|(&s, &f)| {
                lbeta(s, f) - (s - 1.0) * psi(s) - (f - 1.0) * psi(f) + (s + f - 2.0) * psi(s + f)
            })
            .sum();

        let dirichlet_entropy: f64 = self
            .beta_prime
            .chunks(k)
            .map(|row| {
                let total: f64 = row.iter().sum();
                let ln_norm = row.iter().map(|&b| lgamma(b)).sum::<f64>() - lgamma(total);
                ln_norm + (total - k as f64) * psi(total)
                    - row.iter().map(|&b| (b - 1.0) * psi(b)).sum::<f64>()
            })
            .sum();

        Ok(likelihood
            + reward_prior
            + compliance_prior
            + assignment_entropy
            + beta_entropy
            + dirichlet_entropy)
    }

    /// One full coordinate-ascent sweep: `q(mu)`, `q(pi)`, `q(a)`.
    pub fn sweep(&mut self, data: &[Datum]) -> Result<()> {
        self.update_q_mu(data)?;
        self.update_q_pi(data)?;
        self.update_q_a(data)
    }
}

/// Runs coordinate ascent until the ELBO gain of a sweep drops below
/// `config.tol` or `config.max_iter` sweeps have run.
///
/// With [`InitMode::Warm`] and a `previous` state, the first
/// `previous.num_samples()` rows of `phi` are copied from it.
pub fn run(
    config: &VIConfig,
    priors: VIPriors,
    arms: usize,
    data: &[Datum],
    rng: &mut RngStream,
    previous: Option<&VariationalState>,
) -> Result<VariationalState> {
    config.validate()?;
    if data.is_empty() {
        return Err(Error::validation(
            "variational inference needs at least one observation",
        ));
    }
    if arms < 2 {
        return Err(Error::validation(format!(
            "need at least 2 arms, got {arms}"
        )));
    }
    if let Some(d) = data.iter().find(|d| d.proposed >= arms) {
        return Err(Error::validation(format!(
            "proposal {} out of range for {arms} arms",
            d.proposed
        )));
    }

    let n = data.len();
    let mut phi = Vec::with_capacity(n * arms);
    let reuse = match (config.init, previous) {
        (InitMode::Warm, Some(prev)) if prev.arms == arms && prev.num_samples() <= n => {
            phi.extend_from_slice(&prev.phi);
            prev.num_samples()
        }
        _ => 0,
    };
    let prior_row = vec![priors.beta; arms];
    let mut draw = Vec::with_capacity(arms);
    for _ in reuse..n {
        match config.init {
            InitMode::Uniform => phi.extend(std::iter::repeat_n(1.0 / arms as f64, arms)),
            InitMode::PriorSample | InitMode::Warm => {
                sample_dirichlet_into(rng, &prior_row, &mut draw);
                phi.extend_from_slice(&draw);
            }
        }
    }

    let mut state = VariationalState::from_priors(arms, priors);
    state.phi = phi;
    let mut previous_elbo = f64::NEG_INFINITY;
    for _ in 0..config.max_iter {
        state.sweep(data)?;
        let value = state.elbo(data)?;
        state.elbo_trace.push(value);
        if value - previous_elbo < config.tol {
            state.converged = true;
            break;
        }
        previous_elbo = value;
    }
    Ok(state)
}
