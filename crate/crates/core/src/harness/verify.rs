//! Numerical checks of the regret-bound results: gradient signs of `f`, the
//! two-arm and K-arm behaviour of the bound under noncompliance, and the
//! chi-square upper bound on KL.

use std::fmt::Write as _;
use std::time::Instant;

use crate::error::Result;
use crate::sampling::{sample_dirichlet, DirichletParams, RngStream};
use crate::special::{
    delta_bound, f_bound, grad_f, kl_pmf, kl_upper_bound, BernoulliPair, BoundParams,
};

/// Finite-difference step for the gradient check.
pub const FD_STEP: f64 = 1e-6;
/// Allowed relative gap between closed-form and finite-difference gradients.
pub const FD_REL_TOL: f64 = 1e-4;
/// Slack for sign and inequality checks.
pub const SIGN_TOL: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq)]
pub struct CheckResult {
    pub name: String,
    pub trials: usize,
    pub violations: usize,
    /// Informational checks are reported but never fail the battery.
    pub informational: bool,
    /// First counterexample or a short summary.
    pub detail: String,
    pub elapsed_ms: f64,
}

impl CheckResult {
    pub fn passed(&self) -> bool {
        self.informational || self.violations == 0
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct VerifyReport {
    pub checks: Vec<CheckResult>,
}

impl VerifyReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(CheckResult::passed)
    }

    pub fn render(&self) -> String {
        let mut s = String::new();
        for c in &self.checks {
            let tag = match (c.informational, c.passed()) {
                (true, _) => "INFO",
                (false, true) => "PASS",
                (false, false) => "FAIL",
            };
            let _ = writeln!(
                s,
                "[{tag}] {}: {} trials, {} violations ({:.1} ms) {}",
                c.name, c.trials, c.violations, c.elapsed_ms, c.detail
            );
        }
        s
    }
}

/// Runs the whole battery. `num_trials` drives the random checks; the
/// gradient grid is always 50 x 50.
pub fn verify_theorems(num_trials: usize, seed: u64) -> Result<VerifyReport> {
    let mut checks = vec![check_gradient_grid(50)?];
    checks.push(check_two_arm(num_trials, &mut RngStream::new(seed, 1))?);
    checks.extend(check_collapse(
        num_trials / 10 + 1,
        &mut RngStream::new(seed, 2),
    )?);
    checks.push(check_kl_bound(num_trials, &mut RngStream::new(seed, 3))?);
    Ok(VerifyReport { checks })
}

fn unit_params() -> BoundParams {
    // ln T = 1, so deltas are raw f-sums
    BoundParams::new(std::f64::consts::E, 0.0).expect("valid constants")
}

fn timed(
    name: &str,
    trials: usize,
    violations: usize,
    detail: String,
    started: Instant,
) -> CheckResult {
    CheckResult {
        name: name.to_string(),
        trials,
        violations,
        informational: false,
        detail,
        elapsed_ms: started.elapsed().as_secs_f64() * 1e3,
    }
}

fn uniform_in(rng: &mut RngStream, lo: f64, hi: f64) -> f64 {
    lo + (hi - lo) * rng.uniform()
}

/// Closed-form gradient of `f` against central differences on an `n x n`
/// grid `mu1 = (i + 1) / (n + 1)`, `mui = mu1 (j + 0.5) / n`.
pub fn check_gradient_grid(n: usize) -> Result<CheckResult> {
    let started = Instant::now();
    let mut violations = 0;
    let mut detail = String::new();
    let mut worst = 0.0f64;
    let rel = |fd: f64, cf: f64| (fd - cf).abs() / cf.abs().max(1e-10);
    for i in 0..n {
        let mu1 = (i + 1) as f64 / (n + 1) as f64;
        for j in 0..n {
            let mui = mu1 * (j as f64 + 0.5) / n as f64;
            let g = grad_f(BernoulliPair::new(mu1, mui)?)?;
            let f = |a: f64, b: f64| f_bound(BernoulliPair::new(a, b)?);
            let fd1 = (f(mu1 + FD_STEP, mui)? - f(mu1 - FD_STEP, mui)?) / (2.0 * FD_STEP);
            let fdi = (f(mu1, mui + FD_STEP)? - f(mu1, mui - FD_STEP)?) / (2.0 * FD_STEP);
            let (r1, ri) = (rel(fd1, g.d_mu1), rel(fdi, g.d_mui));
            worst = worst.max(r1).max(ri);
            let bad =
                g.d_mu1 > SIGN_TOL || g.d_mui < -SIGN_TOL || r1 > FD_REL_TOL || ri > FD_REL_TOL;
            if bad {
                violations += 1;
                if detail.is_empty() {
                    detail = format!(
                        "first at mu=({mu1}, {mui}): grad=({}, {}), fd=({fd1}, {fdi})",
                        g.d_mu1, g.d_mui
                    );
                }
            }
        }
    }
    if detail.is_empty() {
        detail = format!("max relative fd error {worst:.2e}");
    }
    Ok(timed(
        "gradient signs and finite differences",
        n * n,
        violations,
        detail,
        started,
    ))
}

/// Two-arm bound never improves under noncompliance.
pub fn check_two_arm(trials: usize, rng: &mut RngStream) -> Result<CheckResult> {
    let started = Instant::now();
    let params = unit_params();
    let mut violations = 0;
    let mut detail = String::new();
    let mut done = 0;
    while done < trials {
        let mu = [uniform_in(rng, 0.01, 0.99), uniform_in(rng, 0.01, 0.99)];
        let (a, b) = (rng.uniform(), rng.uniform());
        let pi = vec![vec![a, 1.0 - a], vec![b, 1.0 - b]];
        // measure-zero set where the two rows coincide (ties erase the gap)
        if (a - b).abs() < 1e-9 {
            continue;
        }
        done += 1;
        let delta = delta_bound(&mu, &pi, &params)?;
        if delta < -SIGN_TOL {
            violations += 1;
            if detail.is_empty() {
                detail = format!("first at mu={mu:?}, pi={pi:?}: delta={delta}");
            }
        }
    }
    Ok(timed(
        "two-arm bound is monotone under noncompliance",
        trials,
        violations,
        detail,
        started,
    ))
}

/// Distinct random arm means in `(0.01, 0.99)`, unsorted.
fn distinct_mu(rng: &mut RngStream, k: usize) -> Vec<f64> {
    loop {
        let mu: Vec<f64> = (0..k).map(|_| uniform_in(rng, 0.01, 0.99)).collect();
        let mut s = mu.clone();
        s.sort_by(f64::total_cmp);
        if s.windows(2).all(|w| w[1] - w[0] > 1e-6) {
            return mu;
        }
    }
}

/// Row-selection matrix whose row `z` is the indicator of `pick(z)`.
fn selection(k: usize, pick: impl Fn(usize) -> usize) -> Vec<Vec<f64>> {
    (0..k)
        .map(|z| {
            let mut row = vec![0.0; k];
            row[pick(z)] = 1.0;
            row
        })
        .collect()
}

/// K-arm collapse constructions for K = 3..=6:
/// routing every proposal except the best one to the runner-up raises the
/// bound, routing all proposals to the best arm lowers it. Routing the rest
/// to the worst arm is reported for reference.
pub fn check_collapse(trials_per_k: usize, rng: &mut RngStream) -> Result<Vec<CheckResult>> {
    let params = unit_params();
    let names = [
        "K-arm runner-up collapse raises the bound",
        "K-arm best-arm collapse lowers the bound",
        "K-arm worst-arm collapse (reference)",
    ];
    let mut counts = [0usize; 3];
    let mut positive_worst = 0usize;
    let mut details = [String::new(), String::new(), String::new()];
    let mut elapsed = [0.0f64; 3];
    let mut trials = 0;
    for k in 3..=6 {
        for _ in 0..trials_per_k {
            let mu = distinct_mu(rng, k);
            let mut order: Vec<usize> = (0..k).collect();
            order.sort_by(|&a, &b| mu[b].total_cmp(&mu[a]));
            let (best, second, worst) = (order[0], order[1], order[k - 1]);
            trials += 1;
            let matrices = [
                selection(k, |z| if z == best { best } else { second }),
                selection(k, |_| best),
                selection(k, |z| if z == best { best } else { worst }),
            ];
            for (c, pi) in matrices.iter().enumerate() {
                let started = Instant::now();
                let delta = delta_bound(&mu, pi, &params)?;
                elapsed[c] += started.elapsed().as_secs_f64() * 1e3;
                let bad = match c {
                    0 => delta <= 0.0,
                    1 => delta >= 0.0,
                    _ => {
                        if delta > 0.0 {
                            positive_worst += 1;
                        }
                        false
                    }
                };
                if bad {
                    counts[c] += 1;
                    if details[c].is_empty() {
                        details[c] = format!("first at mu={mu:?}: delta={delta}");
                    }
                }
            }
        }
    }
    details[2] = format!("delta > 0 in {positive_worst} of {trials} cases");
    Ok((0..3)
        .map(|c| CheckResult {
            name: names[c].to_string(),
            trials,
            violations: counts[c],
            informational: c == 2,
            detail: std::mem::take(&mut details[c]),
            elapsed_ms: elapsed[c],
        })
        .collect())
}

/// `KL(p || q) <= sum p^2 / q - 1` over random simplex pairs with `q >= 1e-3`.
pub fn check_kl_bound(trials: usize, rng: &mut RngStream) -> Result<CheckResult> {
    let started = Instant::now();
    let mut violations = 0;
    let mut detail = String::new();
    for _ in 0..trials {
        let k = 2 + rng.index(7);
        let flat = DirichletParams::symmetric(k, 1.0)?;
        let p = sample_dirichlet(rng, &flat);
        let floor = 1e-3;
        let q: Vec<f64> = sample_dirichlet(rng, &flat)
            .into_iter()
            .map(|v| floor + (1.0 - k as f64 * floor) * v)
            .collect();
        let (kl, bound) = (kl_pmf(&p, &q)?, kl_upper_bound(&p, &q)?);
        if kl > bound + SIGN_TOL {
            violations += 1;
            if detail.is_empty() {
                detail = format!("first at p={p:?}, q={q:?}: kl={kl}, bound={bound}");
            }
        }
    }
    Ok(timed("KL upper bound", trials, violations, detail, started))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn battery_passes() {
        let report = verify_theorems(500, 7).unwrap();
        assert!(report.passed(), "{}", report.render());
        assert_eq!(report.checks.len(), 6);
        assert_eq!(report.checks[0].trials, 2500);
    }

    #[test]
    fn worst_arm_collapse_lowers_the_bound() {
        let r = check_collapse(20, &mut RngStream::new(1, 0)).unwrap();
        assert!(r[2].informational);
        assert!(
            r[2].detail.starts_with("delta > 0 in 0 of"),
            "{}",
            r[2].detail
        );
    }

    #[test]
    fn render_marks_failures() {
        let report = VerifyReport {
            checks: vec![CheckResult {
                name: "x".into(),
                trials: 1,
                violations: 1,
                informational: false,
                detail: String::new(),
                elapsed_ms: 0.0,
            }],
        };
        assert!(!report.passed());
        assert!(report.render().starts_with("[FAIL] x"));
    }
}
