//! Thompson-sampling agents behind a common propose / observe interface.
//!
//! | agent    | reward posterior indexed by | compliance model              |
//! |----------|-----------------------------|-------------------------------|
//! | TS       | proposal `z`                | none (assumes `a = z`)        |
//! | TS-Check | proposal `z`, only `z == a` | none                          |
//! | TS-Obs   | implemented arm `a`         | Dirichlet per proposal        |
//! | TS-Lat   | latent arm (variational)    | Dirichlet per proposal (VI)   |
//!
//! Beta posteriors are `Beta(success, failure)` where success counts `r = 1`.

use crate::env::Environment;
use crate::error::{Error, Result};
use crate::sampling::{sample_beta, sample_dirichlet_into, BetaParams, DirichletParams, RngStream};
use crate::vi::{self, Datum, VIConfig, VIPriors, VariationalState};

/// What the environment reveals to an agent after a round. `implemented` is
/// withheld from agents that model compliance as latent.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Feedback {
    pub context: usize,
    pub proposed: usize,
    pub implemented: Option<usize>,
    pub reward: bool,
}

pub trait Agent: Send {
    fn name(&self) -> String;

    /// Whether the agent's model consumes the implemented action.
    fn observes_implemented_action(&self) -> bool;

    fn propose(&mut self, rng: &mut RngStream, context: usize) -> Result<usize>;

    fn observe(&mut self, feedback: &Feedback, rng: &mut RngStream) -> Result<()>;

    /// `(runs, converged runs)` of variational inference so far.
    fn vi_counts(&self) -> (usize, usize) {
        (0, 0)
    }
}

/// Index of the largest score; exact ties are broken uniformly at random.
pub(crate) fn argmax_random_ties(scores: &[f64], rng: &mut RngStream) -> usize {
    let mut best = f64::NEG_INFINITY;
    let mut count = 0usize;
    let mut pick = 0usize;
    for (i, &s) in scores.iter().enumerate() {
        if s > best {
            best = s;
            count = 1;
            pick = i;
        } else if s == best {
            count += 1;
        }
    }
    if count > 1 {
        let nth = rng.index(count);
        pick = scores
            .iter()
            .enumerate()
            .filter(|(_, &s)| s == best)
            .nth(nth)
            .map(|(i, _)| i)
            .unwrap_or(pick);
    }
    pick
}

fn check_dims(num_contexts: usize, arms: usize) -> Result<()> {
    if num_contexts == 0 || arms < 2 {
        return Err(Error::validation(format!(
            "agent needs >= 1 context and >= 2 arms, got {num_contexts} and {arms}"
        )));
    }
    Ok(())
}

fn check_index(what: &str, i: usize, n: usize) -> Result<()> {
    if i < n {
        Ok(())
    } else {
        Err(Error::validation(format!(
            "{what} {i} out of range (have {n})"
        )))
    }
}

/// `Beta` posteriors indexed by `(context, arm)`.
#[derive(Debug, Clone, PartialEq)]
pub struct BetaPosteriorBank {
    arms: usize,
    params: Vec<BetaParams>,
}

impl BetaPosteriorBank {
    pub fn new(num_contexts: usize, arms: usize, prior: BetaParams) -> Self {
        Self {
            arms,
            params: vec![prior; num_contexts * arms],
        }
    }

    pub fn get(&self, context: usize, arm: usize) -> &BetaParams {
        &self.params[context * self.arms + arm]
    }

    fn record(&mut self, context: usize, arm: usize, reward: bool) {
        let p = &mut self.params[context * self.arms + arm];
        if reward {
            p.success += 1.0;
        } else {
            p.failure += 1.0;
        }
    }

    fn sample_context(&self, rng: &mut RngStream, context: usize, out: &mut Vec<f64>) {
        out.clear();
        let row = &self.params[context * self.arms..(context + 1) * self.arms];
        out.extend(row.iter().map(|p| sample_beta(rng, p)));
    }
}

/// `Dirichlet` compliance posteriors indexed by `(context, proposal)`.
#[derive(Debug, Clone, PartialEq)]
pub struct DirichletPosteriorBank {
    arms: usize,
    params: Vec<DirichletParams>,
}

impl DirichletPosteriorBank {
    pub fn new(num_contexts: usize, arms: usize, beta: f64) -> Result<Self> {
        let prior = DirichletParams::symmetric(arms, beta)?;
        Ok(Self {
            arms,
            params: vec![prior; num_contexts * arms],
        })
    }

    pub fn get(&self, context: usize, proposal: usize) -> &DirichletParams {
        &self.params[context * self.arms + proposal]
    }

    fn record(&mut self, context: usize, proposal: usize, implemented: usize) {
        self.params[context * self.arms + proposal].add(implemented, 1.0);
    }
}

/// Greedy proposal under sampled `mu` (per implemented arm) and sampled
/// compliance rows: `argmax_z sum_a pi_z[a] mu[a]`.
fn propose_through_compliance<'a>(
    rng: &mut RngStream,
    mu: &[f64],
    rows: impl Iterator<Item = &'a [f64]>,
    scratch: &mut Vec<f64>,
) -> usize {
    let mut scores = Vec::with_capacity(mu.len());
    for row in rows {
        sample_dirichlet_into(rng, row, scratch);
        scores.push(scratch.iter().zip(mu).map(|(p, m)| p * m).sum());
    }
    argmax_random_ties(&scores, rng)
}

/// Standard Thompson sampling (`check = false`) or TS-Check (`check = true`).
#[derive(Debug, Clone)]
pub struct TsAgent {
    num_contexts: usize,
    arms: usize,
    check: bool,
    rewards: BetaPosteriorBank,
    scratch: Vec<f64>,
}

impl TsAgent {
    pub fn new(num_contexts: usize, arms: usize, alpha: f64) -> Result<Self> {
        Self::build(num_contexts, arms, alpha, false)
    }

    pub fn with_compliance_check(num_contexts: usize, arms: usize, alpha: f64) -> Result<Self> {
        Self::build(num_contexts, arms, alpha, true)
    }

    fn build(num_contexts: usize, arms: usize, alpha: f64, check: bool) -> Result<Self> {
        check_dims(num_contexts, arms)?;
        Ok(Self {
            num_contexts,
            arms,
            check,
            rewards: BetaPosteriorBank::new(num_contexts, arms, BetaParams::new(alpha, alpha)?),
            scratch: Vec::with_capacity(arms),
        })
    }

    pub fn rewards(&self) -> &BetaPosteriorBank {
        &self.rewards
    }

    /// Treats the proposal as the implemented arm.
    pub fn observe_ts(&mut self, context: usize, proposed: usize, reward: bool) -> Result<()> {
        check_index("context", context, self.num_contexts)?;
        check_index("proposal", proposed, self.arms)?;
        self.rewards.record(context, proposed, reward);
        Ok(())
    }

    /// Updates only when the proposal was actually implemented.
    pub fn observe_check(
        &mut self,
        context: usize,
        proposed: usize,
        implemented: usize,
        reward: bool,
    ) -> Result<()> {
        check_index("implemented arm", implemented, self.arms)?;
        if proposed == implemented {
            self.observe_ts(context, proposed, reward)
        } else {
            check_index("context", context, self.num_contexts)?;
            check_index("proposal", proposed, self.arms)
        }
    }
}

impl Agent for TsAgent {
    fn name(&self) -> String {
        if self.check { "TS-Check" } else { "TS" }.to_string()
    }

    fn observes_implemented_action(&self) -> bool {
        self.check
    }

    fn propose(&mut self, rng: &mut RngStream, context: usize) -> Result<usize> {
        check_index("context", context, self.num_contexts)?;
        self.rewards.sample_context(rng, context, &mut self.scratch);
        Ok(argmax_random_ties(&self.scratch, rng))
    }

    fn observe(&mut self, fb: &Feedback, _rng: &mut RngStream) -> Result<()> {
        if self.check {
            let a = fb
                .implemented
                .ok_or_else(|| Error::State("TS-Check needs the implemented action".into()))?;
            self.observe_check(fb.context, fb.proposed, a, fb.reward)
        } else {
            self.observe_ts(fb.context, fb.proposed, fb.reward)
        }
    }
}

/// Thompson sampling with observed compliance: separate reward and compliance
/// posteriors.
#[derive(Debug, Clone)]
pub struct TsObsAgent {
    num_contexts: usize,
    arms: usize,
    rewards: BetaPosteriorBank,
    compliance: DirichletPosteriorBank,
    mu: Vec<f64>,
    scratch: Vec<f64>,
}

impl TsObsAgent {
    pub fn new(num_contexts: usize, arms: usize, alpha: f64, beta: f64) -> Result<Self> {
        check_dims(num_contexts, arms)?;
        Ok(Self {
            num_contexts,
            arms,
            rewards: BetaPosteriorBank::new(num_contexts, arms, BetaParams::new(alpha, alpha)?),
            compliance: DirichletPosteriorBank::new(num_contexts, arms, beta)?,
            mu: Vec::with_capacity(arms),
            scratch: Vec::with_capacity(arms),
        })
    }

    pub fn rewards(&self) -> &BetaPosteriorBank {
        &self.rewards
    }

    pub fn compliance(&self) -> &DirichletPosteriorBank {
        &self.compliance
    }

    pub fn observe_obs(
        &mut self,
        context: usize,
        proposed: usize,
        implemented: usize,
        reward: bool,
    ) -> Result<()> {
        check_index("context", context, self.num_contexts)?;
        check_index("proposal", proposed, self.arms)?;
        check_index("implemented arm", implemented, self.arms)?;
        self.rewards.record(context, implemented, reward);
        self.compliance.record(context, proposed, implemented);
        Ok(())
    }
}

impl Agent for TsObsAgent {
    fn name(&self) -> String {
        "TS-Obs".to_string()
    }

    fn observes_implemented_action(&self) -> bool {
        true
    }

    fn propose(&mut self, rng: &mut RngStream, context: usize) -> Result<usize> {
        check_index("context", context, self.num_contexts)?;
        self.rewards.sample_context(rng, context, &mut self.mu);
        let rows = (0..self.arms).map(|z| self.compliance.get(context, z).concentration());
        Ok(propose_through_compliance(
            rng,
            &self.mu,
            rows,
            &mut self.scratch,
        ))
    }

    fn observe(&mut self, fb: &Feedback, _rng: &mut RngStream) -> Result<()> {
        let a = fb
            .implemented
            .ok_or_else(|| Error::State("TS-Obs needs the implemented action".into()))?;
        self.observe_obs(fb.context, fb.proposed, a, fb.reward)
    }
}

/// Per-context buffer and variational posterior of [`TsLatAgent`].
#[derive(Debug, Clone, Default)]
pub struct LatentContext {
    data: Vec<Datum>,
    state: Option<VariationalState>,
}

impl LatentContext {
    pub fn data(&self) -> &[Datum] {
        &self.data
    }

    pub fn state(&self) -> Option<&VariationalState> {
        self.state.as_ref()
    }
}

/// Thompson sampling with latent compliance. The posterior is refit by
/// variational inference after every observation once a context has
/// collected `soft_start` samples; before that the agent proposes uniformly.
#[derive(Debug, Clone)]
pub struct TsLatAgent {
    arms: usize,
    soft_start: usize,
    priors: VIPriors,
    config: VIConfig,
    contexts: Vec<LatentContext>,
    vi_runs: usize,
    vi_converged: usize,
    mu: Vec<f64>,
    scratch: Vec<f64>,
    prior_rows: Vec<f64>,
}

impl TsLatAgent {
    pub fn new(
        num_contexts: usize,
        arms: usize,
        alpha: f64,
        beta: f64,
        soft_start: usize,
        config: VIConfig,
    ) -> Result<Self> {
        check_dims(num_contexts, arms)?;
        config.validate()?;
        Ok(Self {
            arms,
            soft_start,
            priors: VIPriors::new(alpha, alpha, beta)?,
            config,
            contexts: vec![LatentContext::default(); num_contexts],
            vi_runs: 0,
            vi_converged: 0,
            mu: Vec::with_capacity(arms),
            scratch: Vec::with_capacity(arms),
            prior_rows: vec![beta; arms],
        })
    }

    pub fn soft_start(&self) -> usize {
        self.soft_start
    }

    pub fn context(&self, x: usize) -> &LatentContext {
        &self.contexts[x]
    }

    /// Buffers `(z, r)` and refits the context's posterior once the soft start
    /// has been served.
    pub fn observe_lat(
        &mut self,
        context: usize,
        proposed: usize,
        reward: bool,
        rng: &mut RngStream,
    ) -> Result<()> {
        check_index("context", context, self.contexts.len())?;
        check_index("proposal", proposed, self.arms)?;
        let slot = &mut self.contexts[context];
        slot.data.push(Datum { proposed, reward });
        if slot.data.len() >= self.soft_start {
            let state = vi::run(
                &self.config,
                self.priors,
                self.arms,
                &slot.data,
                rng,
                slot.state.as_ref(),
            )?;
            self.vi_runs += 1;
            if state.converged() {
                self.vi_converged += 1;
            }
            slot.state = Some(state);
        }
        Ok(())
    }
}

impl Agent for TsLatAgent {
    fn name(&self) -> String {
        format!("TS-Lat-{}", self.soft_start)
    }

    fn observes_implemented_action(&self) -> bool {
        false
    }

    fn propose(&mut self, rng: &mut RngStream, context: usize) -> Result<usize> {
        check_index("context", context, self.contexts.len())?;
        let slot = &self.contexts[context];
        if slot.data.len() < self.soft_start {
            return Ok(rng.index(self.arms));
        }
        self.mu.clear();
        match &slot.state {
            Some(state) => {
                for (&s, &f) in state.alpha_success().iter().zip(state.alpha_failure()) {
                    self.mu.push(sample_beta(
                        rng,
                        &BetaParams {
                            success: s,
                            failure: f,
                        },
                    ));
                }
                let rows = (0..self.arms).map(|z| state.beta_row(z));
                Ok(propose_through_compliance(
                    rng,
                    &self.mu,
                    rows,
                    &mut self.scratch,
                ))
            }
            None => {
                // soft start of 0 and no data yet: sample the priors
                let prior = BetaParams {
                    success: self.priors.alpha_success,
                    failure: self.priors.alpha_failure,
                };
                for _ in 0..self.arms {
                    self.mu.push(sample_beta(rng, &prior));
                }
                let rows = std::iter::repeat_n(self.prior_rows.as_slice(), self.arms);
                Ok(propose_through_compliance(
                    rng,
                    &self.mu,
                    rows,
                    &mut self.scratch,
                ))
            }
        }
    }

    fn observe(&mut self, fb: &Feedback, rng: &mut RngStream) -> Result<()> {
        self.observe_lat(fb.context, fb.proposed, fb.reward, rng)
    }

    fn vi_counts(&self) -> (usize, usize) {
        (self.vi_runs, self.vi_converged)
    }
}

/// Proposes uniformly at random and learns nothing.
#[derive(Debug, Clone)]
pub struct UniformAgent {
    num_contexts: usize,
    arms: usize,
}

impl UniformAgent {
    pub fn new(num_contexts: usize, arms: usize) -> Result<Self> {
        check_dims(num_contexts, arms)?;
        Ok(Self { num_contexts, arms })
    }
}

impl Agent for UniformAgent {
    fn name(&self) -> String {
        "Uniform".to_string()
    }

    fn observes_implemented_action(&self) -> bool {
        false
    }

    fn propose(&mut self, rng: &mut RngStream, context: usize) -> Result<usize> {
        check_index("context", context, self.num_contexts)?;
        Ok(rng.index(self.arms))
    }

    fn observe(&mut self, _fb: &Feedback, _rng: &mut RngStream) -> Result<()> {
        Ok(())
    }
}

/// Always proposes the best arm of the true environment.
#[derive(Debug, Clone)]
pub struct OracleAgent {
    best: Vec<usize>,
}

impl OracleAgent {
    pub fn new(best: Vec<usize>) -> Self {
        Self { best }
    }
}

impl Agent for OracleAgent {
    fn name(&self) -> String {
        "Oracle".to_string()
    }

    fn observes_implemented_action(&self) -> bool {
        false
    }

    fn propose(&mut self, _rng: &mut RngStream, context: usize) -> Result<usize> {
        check_index("context", context, self.best.len())?;
        Ok(self.best[context])
    }

    fn observe(&mut self, _fb: &Feedback, _rng: &mut RngStream) -> Result<()> {
        Ok(())
    }
}

/// Agent families that can be named in an experiment.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum AgentKind {
    Ts,
    TsCheck,
    TsObs,
    TsLat,
    Uniform,
    Oracle,
}

impl AgentKind {
    pub const ALL: [AgentKind; 6] = [
        AgentKind::Ts,
        AgentKind::TsCheck,
        AgentKind::TsObs,
        AgentKind::TsLat,
        AgentKind::Uniform,
        AgentKind::Oracle,
    ];

    /// Config spelling: `ts`, `ts-check`, `ts-obs`, `ts-lat`, `uniform`, `oracle`.
    pub fn as_str(self) -> &'static str {
        match self {
            AgentKind::Ts => "ts",
            AgentKind::TsCheck => "ts-check",
            AgentKind::TsObs => "ts-obs",
            AgentKind::TsLat => "ts-lat",
            AgentKind::Uniform => "uniform",
            AgentKind::Oracle => "oracle",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|k| k.as_str() == s)
    }
}

/// Agent kind plus hyperparameters; `build` instantiates it for an environment.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AgentSpec {
    pub kind: AgentKind,
    /// Symmetric Beta prior on rewards.
    pub alpha: f64,
    /// Symmetric Dirichlet prior on compliance rows.
    pub beta: f64,
    /// Soft start `M` (TS-Lat only).
    pub soft_start: usize,
    pub vi: VIConfig,
}

impl AgentSpec {
    pub fn new(kind: AgentKind) -> Self {
        Self {
            kind,
            alpha: 1.0,
            beta: 1.0,
            soft_start: 0,
            vi: VIConfig::default(),
        }
    }

    pub fn ts_lat(soft_start: usize) -> Self {
        Self {
            soft_start,
            ..Self::new(AgentKind::TsLat)
        }
    }

    /// Display name, e.g. `TS-Obs` or `TS-Lat-40`.
    pub fn name(&self) -> String {
        match self.kind {
            AgentKind::Ts => "TS".into(),
            AgentKind::TsCheck => "TS-Check".into(),
            AgentKind::TsObs => "TS-Obs".into(),
            AgentKind::TsLat => format!("TS-Lat-{}", self.soft_start),
            AgentKind::Uniform => "Uniform".into(),
            AgentKind::Oracle => "Oracle".into(),
        }
    }

    pub fn build(&self, env: &Environment) -> Result<Box<dyn Agent>> {
        let (n, k) = (env.num_contexts(), env.arms());
        Ok(match self.kind {
            AgentKind::Ts => Box::new(TsAgent::new(n, k, self.alpha)?),
            AgentKind::TsCheck => Box::new(TsAgent::with_compliance_check(n, k, self.alpha)?),
            AgentKind::TsObs => Box::new(TsObsAgent::new(n, k, self.alpha, self.beta)?),
            AgentKind::TsLat => Box::new(TsLatAgent::new(
                n,
                k,
                self.alpha,
                self.beta,
                self.soft_start,
                self.vi,
            )?),
            AgentKind::Uniform => Box::new(UniformAgent::new(n, k)?),
            AgentKind::Oracle => Box::new(OracleAgent::new(
                (0..n)
                    .map(|x| env.optimal_proposal(x).map(|(z, _)| z))
                    .collect::<Result<_>>()?,
            )),
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn fb(context: usize, proposed: usize, implemented: usize, reward: bool) -> Feedback {
        Feedback {
            context,
            proposed,
            implemented: Some(implemented),
            reward,
        }
    }

    #[test]
    fn ts_counts() {
        let mut ts = TsAgent::new(1, 2, 1.0).unwrap();
        assert_eq!(ts.rewards().get(0, 0), &BetaParams::new(1.0, 1.0).unwrap());
        ts.observe_ts(0, 0, true).unwrap();
        ts.observe_ts(0, 0, true).unwrap();
        ts.observe_ts(0, 0, false).unwrap();
        assert_eq!(ts.rewards().get(0, 0), &BetaParams::new(3.0, 2.0).unwrap());
        assert_eq!(ts.rewards().get(0, 1), &BetaParams::new(1.0, 1.0).unwrap());
        assert!(ts.observe_ts(1, 0, true).is_err());
        assert!(ts.observe_ts(0, 2, true).is_err());
    }

    #[test]
    fn ts_check_skips_noncompliant_rounds() {
        let mut check = TsAgent::with_compliance_check(1, 2, 1.0).unwrap();
        let mut rng = RngStream::new(0, 0);
        check.observe(&fb(0, 0, 1, true), &mut rng).unwrap();
        assert_eq!(
            check.rewards().get(0, 0),
            &BetaParams::new(1.0, 1.0).unwrap()
        );
        assert_eq!(
            check.rewards().get(0, 1),
            &BetaParams::new(1.0, 1.0).unwrap()
        );
        check.observe(&fb(0, 0, 0, true), &mut rng).unwrap();
        assert_eq!(
            check.rewards().get(0, 0),
            &BetaParams::new(2.0, 1.0).unwrap()
        );
        let latent = Feedback {
            implemented: None,
            ..fb(0, 0, 0, true)
        };
        assert!(check.observe(&latent, &mut rng).is_err());
    }

    #[test]
    fn ts_check_full_noncompliance_keeps_prior() {
        let mut check = TsAgent::with_compliance_check(1, 2, 1.0).unwrap();
        let mut rng = RngStream::new(1, 0);
        for t in 0..500 {
            let z = t % 2;
            check
                .observe(&fb(0, z, 1 - z, t % 3 == 0), &mut rng)
                .unwrap();
        }
        for z in 0..2 {
            assert_eq!(
                check.rewards().get(0, z),
                &BetaParams::new(1.0, 1.0).unwrap()
            );
        }
    }

    #[test]
    fn ts_obs_counts() {
        let mut obs = TsObsAgent::new(1, 2, 1.0, 1.0).unwrap();
        obs.observe_obs(0, 0, 1, true).unwrap();
        assert_eq!(obs.rewards().get(0, 1), &BetaParams::new(2.0, 1.0).unwrap());
        assert_eq!(obs.rewards().get(0, 0), &BetaParams::new(1.0, 1.0).unwrap());
        assert_eq!(obs.compliance().get(0, 0).concentration(), &[1.0, 2.0]);
        assert_eq!(obs.compliance().get(0, 1).concentration(), &[1.0, 1.0]);
    }

    #[test]
    fn ts_obs_compliant_stream_concentrates_on_diagonal() {
        let mut obs = TsObsAgent::new(1, 3, 1.0, 1.0).unwrap();
        for t in 0..300 {
            let z = t % 3;
            obs.observe_obs(0, z, z, t % 2 == 0).unwrap();
        }
        for z in 0..3 {
            let c = obs.compliance().get(0, z).concentration();
            assert_eq!(c[z], 101.0);
            assert_eq!(c.iter().sum::<f64>(), 103.0);
        }
    }

    #[test]
    fn fresh_ts_proposals_are_uniform() {
        let n = 10_000;
        let mut rng = RngStream::new(2, 0);
        let mut zeros = 0;
        for _ in 0..n {
            let mut ts = TsAgent::new(1, 2, 1.0).unwrap();
            if ts.propose(&mut rng, 0).unwrap() == 0 {
                zeros += 1;
            }
        }
        let se = (0.25 / n as f64).sqrt();
        assert!((zeros as f64 / n as f64 - 0.5).abs() < 3.0 * se);
    }

    #[test]
    fn ts_obs_with_concentrated_posteriors_picks_best() {
        let mut obs = TsObsAgent::new(1, 2, 1.0, 1.0).unwrap();
        for _ in 0..20_000 {
            obs.rewards.record(0, 0, true);
            obs.compliance.record(0, 0, 0);
            obs.compliance.record(0, 1, 1);
        }
        for _ in 0..6_667 {
            obs.rewards.record(0, 0, false);
            obs.rewards.record(0, 1, true);
        }
        for _ in 0..20_000 {
            obs.rewards.record(0, 1, false);
        }
        let mut rng = RngStream::new(3, 0);
        let picks = (0..2_000)
            .filter(|_| obs.propose(&mut rng, 0).unwrap() == 0)
            .count();
        assert_eq!(picks, 2_000);
    }

    #[test]
    fn ts_lat_soft_start_and_first_run() {
        let mut lat = TsLatAgent::new(1, 2, 1.0, 1.0, 40, VIConfig::default()).unwrap();
        let mut rng = RngStream::new(4, 0);
        for t in 0..39 {
            lat.observe_lat(0, t % 2, t % 3 == 0, &mut rng).unwrap();
            assert!(lat.context(0).state().is_none());
        }
        assert_eq!(lat.context(0).data().len(), 39);
        // still uniform while under the soft start
        let n = 10_000;
        let zeros = (0..n)
            .filter(|_| lat.propose(&mut rng, 0).unwrap() == 0)
            .count();
        assert!((zeros as f64 / n as f64 - 0.5).abs() < 3.0 * (0.25 / n as f64).sqrt());

        lat.observe_lat(0, 1, true, &mut rng).unwrap();
        let state = lat.context(0).state().unwrap();
        assert_eq!(state.num_samples(), 40);
        assert_eq!(lat.vi_counts().0, 1);
        assert_eq!(lat.name(), "TS-Lat-40");
    }

    #[test]
    fn ts_lat_without_soft_start_runs_on_first_sample() {
        let mut lat = TsLatAgent::new(2, 2, 1.0, 1.0, 0, VIConfig::default()).unwrap();
        let mut rng = RngStream::new(5, 0);
        let z = lat.propose(&mut rng, 1).unwrap();
        assert!(z < 2);
        lat.observe_lat(1, z, true, &mut rng).unwrap();
        let state = lat.context(1).state().unwrap();
        assert_eq!(state.num_samples(), 1);
        assert!(state.elbo_trace().last().unwrap().is_finite());
        assert!(lat.context(0).state().is_none());
    }

    #[test]
    fn ties_are_broken_at_random() {
        let mut rng = RngStream::new(6, 0);
        let n = 30_000;
        let mut counts = [0usize; 3];
        for _ in 0..n {
            counts[argmax_random_ties(&[0.5, 0.5, 0.5], &mut rng)] += 1;
        }
        for c in counts {
            assert!((c as f64 / n as f64 - 1.0 / 3.0).abs() < 0.02);
        }
        assert_eq!(argmax_random_ties(&[0.1, 0.9, 0.5], &mut rng), 1);
    }

    #[test]
    fn spec_names_and_kinds() {
        for kind in AgentKind::ALL {
            assert_eq!(AgentKind::parse(kind.as_str()), Some(kind));
        }
        assert_eq!(AgentKind::parse("ts_lat"), None);
        assert_eq!(AgentSpec::ts_lat(40).name(), "TS-Lat-40");
        let env =
            Environment::bandit(vec![0.25, 0.75], vec![vec![1.0, 0.0], vec![0.0, 1.0]]).unwrap();
        for kind in AgentKind::ALL {
            let agent = AgentSpec::new(kind).build(&env).unwrap();
            let expected = if kind == AgentKind::TsLat {
                "TS-Lat-0".to_string()
            } else {
                AgentSpec::new(kind).name()
            };
            assert_eq!(agent.name(), expected);
        }
        let mut oracle = AgentSpec::new(AgentKind::Oracle).build(&env).unwrap();
        assert_eq!(oracle.propose(&mut RngStream::new(0, 0), 0).unwrap(), 1);
    }

    #[test]
    fn constructors_validate() {
        assert!(TsAgent::new(0, 2, 1.0).is_err());
        assert!(TsAgent::new(1, 1, 1.0).is_err());
        assert!(TsAgent::new(1, 2, 0.0).is_err());
        assert!(TsObsAgent::new(1, 2, 1.0, -1.0).is_err());
        let bad = VIConfig {
            max_iter: 0,
            ..VIConfig::default()
        };
        assert!(TsLatAgent::new(1, 2, 1.0, 1.0, 0, bad).is_err());
    }
}
