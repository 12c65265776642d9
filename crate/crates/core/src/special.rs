//! Special functions, divergences and the logarithmic regret-bound coefficient.
//!
//! Everything here is a pure function of its arguments. The bound helpers
//! evaluate only the `(1 + eps) * sum_i f(mu_1, mu_i) * ln T` leading term of the
//! problem-dependent Thompson sampling bound; the additive `O(K / eps)` part has
//! no published constant and is never computed.

use crate::error::{Error, Result};

/// Inputs closer than this to 0 or 1 are rejected by [`BernoulliPair::new`].
pub const BOUNDARY_EXCLUSION: f64 = 1e-12;

/// Tolerance on `|sum - 1|` for probability vectors.
pub const SIMPLEX_TOL: f64 = 1e-9;

#[cfg(test)]
const EULER_MASCHERONI: f64 = 0.577_215_664_901_532_9;

/// Digamma function `psi(x) = d/dx ln Gamma(x)` for `x > 0`.
pub fn digamma(x: f64) -> Result<f64> {
    if !x.is_finite() || x <= 0.0 {
        return Err(Error::domain(format!(
            "digamma requires finite x > 0, got {x}"
        )));
    }
    Ok(psi(x))
}

/// Unchecked digamma. Callers guarantee `x > 0`.
pub(crate) fn psi(mut x: f64) -> f64 {
    let mut shift = 0.0;
    while x < 10.0 {
        shift -= 1.0 / x;
        x += 1.0;
    }
    let inv = 1.0 / x;
    let inv2 = inv * inv;
    // Bernoulli-number tail: B_2n / (2n x^2n), n = 1..7
    let tail = inv2
        * (1.0 / 12.0
            - inv2
                * (1.0 / 120.0
                    - inv2
                        * (1.0 / 252.0
                            - inv2
                                * (1.0 / 240.0
                                    - inv2
                                        * (1.0 / 132.0
                                            - inv2 * (691.0 / 32760.0 - inv2 / 12.0))))));
    shift + x.ln() - 0.5 * inv - tail
}

const LANCZOS_G: f64 = 7.0;
#[allow(clippy::excessive_precision)]
const LANCZOS_COEF: [f64; 9] = [
    0.999_999_999_999_809_93,
    676.520_368_121_885_1,
    -1_259.139_216_722_402_8,
    771.323_428_777_653_13,
    -176.615_029_162_140_59,
    12.507_343_278_686_905,
    -0.138_571_095_265_720_12,
    9.984_369_578_019_571_6e-6,
    1.505_632_735_149_311_6e-7,
];

/// Natural log of the Gamma function for `x > 0` (Lanczos, g = 7).
pub fn ln_gamma(x: f64) -> Result<f64> {
    if !x.is_finite() || x <= 0.0 {
        return Err(Error::domain(format!(
            "ln_gamma requires finite x > 0, got {x}"
        )));
    }
    Ok(lgamma(x))
}

pub(crate) fn lgamma(x: f64) -> f64 {
    if x < 0.5 {
        // Gamma(x) = Gamma(x + 1) / x
        return lgamma(x + 1.0) - x.ln();
    }
    let x = x - 1.0;
    let mut series = LANCZOS_COEF[0];
    for (i, c) in LANCZOS_COEF.iter().enumerate().skip(1) {
        series += c / (x + i as f64);
    }
    let t = x + LANCZOS_G + 0.5;
    0.5 * (2.0 * std::f64::consts::PI).ln() + (x + 0.5) * t.ln() - t + series.ln()
}

/// `ln B(a, b) = ln Gamma(a) + ln Gamma(b) - ln Gamma(a + b)`.
pub fn ln_beta(a: f64, b: f64) -> Result<f64> {
    ln_gamma(a)?;
    ln_gamma(b)?;
    Ok(lbeta(a, b))
}

pub(crate) fn lbeta(a: f64, b: f64) -> f64 {
    lgamma(a) + lgamma(b) - lgamma(a + b)
}

/// `KL(Bern(p) || Bern(q))` with `0 ln 0 = 0`.
///
/// Returns `f64::INFINITY` when `q` is 0 or 1 and `p` differs from it, i.e. when
/// `Bern(p)` is not absolutely continuous with respect to `Bern(q)`.
pub fn bernoulli_kl(p: f64, q: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&p) || !(0.0..=1.0).contains(&q) {
        return Err(Error::validation(format!(
            "bernoulli_kl needs probabilities, got p={p}, q={q}"
        )));
    }
    if p == q {
        return Ok(0.0);
    }
    if q == 0.0 || q == 1.0 {
        return Ok(f64::INFINITY);
    }
    Ok(kl_bern(p, q))
}

/// Unchecked Bernoulli KL for `p in [0,1]`, `q in (0,1)`.
fn kl_bern(p: f64, q: f64) -> f64 {
    let hit = if p > 0.0 {
        p * ((p - q) / q).ln_1p()
    } else {
        0.0
    };
    let miss = if p < 1.0 {
        (1.0 - p) * ((q - p) / (1.0 - q)).ln_1p()
    } else {
        0.0
    };
    hit + miss
}

fn check_pmf(name: &str, v: &[f64], strictly_positive: bool) -> Result<()> {
    if let Some(bad) = v
        .iter()
        .find(|&&x| !x.is_finite() || x < 0.0 || (strictly_positive && x <= 0.0))
    {
        return Err(Error::validation(format!("{name} has invalid entry {bad}")));
    }
    let total: f64 = v.iter().sum();
    if (total - 1.0).abs() > SIMPLEX_TOL {
        return Err(Error::validation(format!(
            "{name} is off the simplex (sum = {total})"
        )));
    }
    Ok(())
}

fn check_pmf_pair(p: &[f64], q: &[f64]) -> Result<()> {
    if p.len() != q.len() {
        return Err(Error::validation(format!(
            "pmf lengths differ: {} vs {}",
            p.len(),
            q.len()
        )));
    }
    check_pmf("p", p, false)?;
    check_pmf("q", q, true)
}

/// `KL(p || q)` for probability mass functions with strictly positive `q`.
pub fn kl_pmf(p: &[f64], q: &[f64]) -> Result<f64> {
    check_pmf_pair(p, q)?;
    Ok(p.iter()
        .zip(q)
        .filter(|(&pi, _)| pi > 0.0)
        .map(|(&pi, &qi)| pi * (pi / qi).ln())
        .sum())
}

/// Chi-square style upper bound `sum p^2 / q - 1` on `KL(p || q)`.
pub fn kl_upper_bound(p: &[f64], q: &[f64]) -> Result<f64> {
    check_pmf_pair(p, q)?;
    Ok(p.iter().zip(q).map(|(&pi, &qi)| pi * pi / qi).sum::<f64>() - 1.0)
}

/// Best-arm / other-arm success probabilities, both strictly inside (0, 1).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BernoulliPair {
    mu1: f64,
    mui: f64,
}

impl BernoulliPair {
    pub fn new(mu1: f64, mui: f64) -> Result<Self> {
        for (name, v) in [("mu1", mu1), ("mui", mui)] {
            if !(v > BOUNDARY_EXCLUSION && v < 1.0 - BOUNDARY_EXCLUSION) {
                return Err(Error::domain(format!(
                    "{name} = {v} is not strictly inside (0, 1)"
                )));
            }
        }
        Ok(Self { mu1, mui })
    }

    pub fn mu1(&self) -> f64 {
        self.mu1
    }

    pub fn mui(&self) -> f64 {
        self.mui
    }
}

/// Horizon and slack of the logarithmic bound.
///
/// The horizon is kept real-valued so `ln T` can be set to any value `>= 0`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundParams {
    horizon: f64,
    epsilon: f64,
}

impl BoundParams {
    pub fn new(horizon: f64, epsilon: f64) -> Result<Self> {
        if !horizon.is_finite() || horizon < 1.0 {
            return Err(Error::validation(format!(
                "horizon must be >= 1, got {horizon}"
            )));
        }
        if !epsilon.is_finite() || epsilon < 0.0 {
            return Err(Error::validation(format!(
                "epsilon must be >= 0, got {epsilon}"
            )));
        }
        Ok(Self { horizon, epsilon })
    }

    pub fn horizon(&self) -> f64 {
        self.horizon
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }
}

/// Per-arm bound coefficient `f(mu1, mui) = (mu1 - mui) / KL(mui || mu1)`,
/// defined as 0 when the two parameters coincide.
pub fn f_bound(pair: BernoulliPair) -> Result<f64> {
    let BernoulliPair { mu1, mui } = pair;
    if mu1 < mui {
        return Err(Error::domain(format!(
            "f requires mu1 >= mui, got ({mu1}, {mui})"
        )));
    }
    if mu1 == mui {
        return Ok(0.0);
    }
    Ok((mu1 - mui) / kl_bern(mui, mu1))
}

/// Partial derivatives of [`f_bound`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundGradient {
    pub d_mu1: f64,
    pub d_mui: f64,
}

/// Closed-form gradient of `f` on the interior `mu1 > mui`.
pub fn grad_f(pair: BernoulliPair) -> Result<BoundGradient> {
    let BernoulliPair { mu1, mui } = pair;
    if mu1 <= mui {
        return Err(Error::domain(format!(
            "grad_f requires mu1 > mui, got ({mu1}, {mui})"
        )));
    }
    let d = kl_bern(mui, mu1);
    let d_sq = d * d;
    // quotient rule: d/dmu1 [(mu1 - mui) / D] with dD/dmu1 = -(mui/mu1 - (1-mui)/(1-mu1))
    let slope = mui / mu1 - (1.0 - mui) / (1.0 - mu1);
    let d_mu1 = (mu1 - mui) * slope / d_sq + 1.0 / d;
    let d_mui = kl_bern(mu1, mui) / d_sq;
    Ok(BoundGradient { d_mu1, d_mui })
}

/// `(1 + eps) * sum_{i >= 2} f(mu_(1), mu_(i)) * ln T` over `mu` sorted descending.
pub fn bound_leading_term(mu: &[f64], params: &BoundParams) -> Result<f64> {
    if mu.len() < 2 {
        return Err(Error::validation(format!(
            "bound needs at least 2 arms, got {}",
            mu.len()
        )));
    }
    if let Some(bad) = mu.iter().find(|&&m| !(m > 0.0 && m < 1.0)) {
        return Err(Error::validation(format!(
            "arm parameter {bad} is outside (0, 1)"
        )));
    }
    let mut sorted = mu.to_vec();
    // stable sort keeps tie order
    sorted.sort_by(|a, b| b.total_cmp(a));
    let best = sorted[0];
    let mut total = 0.0;
    for &other in &sorted[1..] {
        total += f_bound(BernoulliPair::new(best, other)?)?;
    }
    Ok((1.0 + params.epsilon) * total * params.horizon.ln())
}

/// Row-stochastic matrix-vector product `Pi * mu`.
pub fn compliance_product(pi: &[Vec<f64>], mu: &[f64]) -> Result<Vec<f64>> {
    if pi.len() != mu.len() {
        return Err(Error::validation(format!(
            "compliance matrix has {} rows for {} arms",
            pi.len(),
            mu.len()
        )));
    }
    pi.iter()
        .enumerate()
        .map(|(z, row)| {
            if row.len() != mu.len() {
                return Err(Error::validation(format!(
                    "compliance row {z} has {} entries, expected {}",
                    row.len(),
                    mu.len()
                )));
            }
            check_pmf(&format!("compliance row {z}"), row, false)?;
            Ok(row.iter().zip(mu).map(|(p, m)| p * m).sum())
        })
        .collect()
}

/// Change in the bound's leading term when the observable reward vector
/// moves from `mu` to `Pi * mu`.
pub fn delta_bound(mu: &[f64], pi: &[Vec<f64>], params: &BoundParams) -> Result<f64> {
    let shifted = compliance_product(pi, mu)?;
    if let Some(bad) = shifted.iter().find(|&&m| m <= 0.0 || m >= 1.0) {
        return Err(Error::domain(format!(
            "Pi * mu has boundary entry {bad}; f is undefined there"
        )));
    }
    Ok(bound_leading_term(&shifted, params)? - bound_leading_term(mu, params)?)
}
