#![allow(dead_code)]

type Event = (usize, usize, usize, bool);

use ncbandit::agents::{TsAgent, TsObsAgent};
use ncbandit::sampling::{sample_dirichlet, BetaParams, DirichletParams, RngStream};
use ncbandit::vi::{Datum, VIPriors, VariationalState};
use statrs::function::gamma::{digamma, ln_gamma};

/// Term-by-term ELBO written directly from the seven expectations, row by row,
/// with statrs special functions. Prior normalizers are dropped.
pub fn elbo_oracle(s: &VariationalState, data: &[Datum]) -> f64 {
    let k = s.arms();
    let pr = s.priors();
    let (a1, a0) = (s.alpha_success(), s.alpha_failure());
    let mut total = 0.0;

    // E[ln p(r | a, mu)]
    for (i, d) in data.iter().enumerate() {
        let phi = s.phi_row(i);
        let r = if d.reward { 1.0 } else { 0.0 };
        for j in 0..k {
            total +=
                phi[j] * (r * digamma(a1[j]) + (1.0 - r) * digamma(a0[j]) - digamma(a1[j] + a0[j]));
        }
    }
    // E[ln p(a | z, pi)]
    for (i, d) in data.iter().enumerate() {
        let phi = s.phi_row(i);
        let b = s.beta_row(d.proposed);
        let b0: f64 = b.iter().sum();
        for j in 0..k {
            total += phi[j] * (digamma(b[j]) - digamma(b0));
        }
    }
    // E[ln p(mu)]
    for j in 0..k {
        let t = digamma(a1[j] + a0[j]);
        total += (pr.alpha_success - 1.0) * (digamma(a1[j]) - t)
            + (pr.alpha_failure - 1.0) * (digamma(a0[j]) - t);
    }
    // E[ln p(pi)]
    for z in 0..k {
        let b = s.beta_row(z);
        let b0: f64 = b.iter().sum();
        for &bl in b {
            total += (pr.beta - 1.0) * (digamma(bl) - digamma(b0));
        }
    }
    // H[q(a)]
    for p in s.phi() {
        if *p > 0.0 {
            total -= p * p.ln();
        }
    }
    // H[q(mu)]
    for j in 0..k {
        let (x, y) = (a1[j], a0[j]);
        total += ln_gamma(x) + ln_gamma(y)
            - ln_gamma(x + y)
            - (x - 1.0) * digamma(x)
            - (y - 1.0) * digamma(y)
            + (x + y - 2.0) * digamma(x + y);
    }
    // H[q(pi)]
    for z in 0..k {
        let b = s.beta_row(z);
        let b0: f64 = b.iter().sum();
        total += b.iter().map(|&v| ln_gamma(v)).sum::<f64>()
            - ln_gamma(b0)
            - (k as f64 - b0) * digamma(b0)
            - b.iter().map(|&v| (v - 1.0) * digamma(v)).sum::<f64>();
    }
    total
}

/// Random observation set from a random noncompliant bandit.
pub fn random_data(rng: &mut RngStream, k: usize, n: usize) -> Vec<Datum> {
    let mu: Vec<f64> = (0..k).map(|_| rng.uniform()).collect();
    let flat = DirichletParams::symmetric(k, 1.0).unwrap();
    let pi: Vec<Vec<f64>> = (0..k).map(|_| sample_dirichlet(rng, &flat)).collect();
    (0..n)
        .map(|_| {
            let z = rng.index(k);
            let u = rng.uniform();
            let mut acc = 0.0;
            let mut a = k - 1;
            for (j, p) in pi[z].iter().enumerate() {
                acc += p;
                if u < acc {
                    a = j;
                    break;
                }
            }
            Datum {
                proposed: z,
                reward: rng.uniform() < mu[a],
            }
        })
        .collect()
}

/// Sweeps a random instance and checks ELBO ascent, simplex rows, mass
/// conservation and agreement with [`elbo_oracle`].
pub fn check_vi_instance(rng: &mut RngStream, sweeps: usize) -> Result<(), String> {
    let k = 2 + rng.index(3);
    let n = 1 + rng.index(300);
    let priors = VIPriors::new(
        0.5 + 2.5 * rng.uniform(),
        0.5 + 2.5 * rng.uniform(),
        0.5 + 2.5 * rng.uniform(),
    )
    .unwrap();
    let data = random_data(rng, k, n);
    let flat = DirichletParams::symmetric(k, 1.0).unwrap();
    let phi: Vec<f64> = (0..n).flat_map(|_| sample_dirichlet(rng, &flat)).collect();
    // with_phi requires rows on the simplex to 1e-12; renormalize the draw
    let phi: Vec<f64> = phi
        .chunks(k)
        .flat_map(|r| {
            let t: f64 = r.iter().sum();
            r.iter().map(move |v| v / t).collect::<Vec<_>>()
        })
        .collect();
    let mut state = VariationalState::with_phi(k, priors, phi).map_err(|e| e.to_string())?;
    let tag = format!("K={k} N={n}");

    let mut prev = state.elbo(&data).map_err(|e| e.to_string())?;
    for sweep in 0..sweeps {
        state.sweep(&data).map_err(|e| e.to_string())?;
        let value = state.elbo(&data).map_err(|e| e.to_string())?;
        if value - prev < -1e-9 {
            return Err(format!(
                "{tag}: ELBO fell by {} at sweep {sweep}",
                prev - value
            ));
        }
        let oracle = elbo_oracle(&state, &data);
        if (value - oracle).abs() > 1e-10 {
            return Err(format!(
                "{tag}: ELBO {value} vs oracle {oracle} at sweep {sweep}"
            ));
        }
        for (i, row) in state.phi().chunks(k).enumerate() {
            let total: f64 = row.iter().sum();
            if (total - 1.0).abs() > 1e-12 || row.iter().any(|v| *v < 0.0) {
                return Err(format!("{tag}: phi row {i} off the simplex (sum {total})"));
            }
        }
        let successes = data.iter().filter(|d| d.reward).count() as f64;
        let s1: f64 = state.alpha_success().iter().sum();
        let s0: f64 = state.alpha_failure().iter().sum();
        let want1 = k as f64 * priors.alpha_success + successes;
        let want0 = k as f64 * priors.alpha_failure + (n as f64 - successes);
        if (s1 - want1).abs() > 1e-9 || (s0 - want0).abs() > 1e-9 {
            return Err(format!(
                "{tag}: reward mass {s1}/{s0}, expected {want1}/{want0}"
            ));
        }
        for z in 0..k {
            let nz = data.iter().filter(|d| d.proposed == z).count() as f64;
            let got: f64 = state.beta_row(z).iter().sum();
            let want = k as f64 * priors.beta + nz;
            if (got - want).abs() > 1e-9 {
                return Err(format!(
                    "{tag}: compliance mass of row {z} is {got}, expected {want}"
                ));
            }
        }
        prev = value;
    }
    Ok(())
}

/// Feeds one random stream to TS, TS-Check and TS-Obs and compares every
/// posterior parameter with brute-force counts.
pub fn check_conjugate_stream(rng: &mut RngStream) -> Result<(), String> {
    let contexts = 1 + rng.index(3);
    let k = 2 + rng.index(4);
    let t = 1 + rng.index(500);
    let alpha = [0.5, 1.0, 2.0][rng.index(3)];
    let beta = [0.5, 1.0, 2.0][rng.index(3)];

    let mut ts = TsAgent::new(contexts, k, alpha).unwrap();
    let mut check = TsAgent::with_compliance_check(contexts, k, alpha).unwrap();
    let mut obs = TsObsAgent::new(contexts, k, alpha, beta).unwrap();

    let mut log = Vec::with_capacity(t);
    for _ in 0..t {
        let x = rng.index(contexts);
        let z = rng.index(k);
        let a = if rng.uniform() < 0.5 { z } else { rng.index(k) };
        let r = rng.uniform() < 0.5;
        ts.observe_ts(x, z, r).map_err(|e| e.to_string())?;
        check.observe_check(x, z, a, r).map_err(|e| e.to_string())?;
        obs.observe_obs(x, z, a, r).map_err(|e| e.to_string())?;
        log.push((x, z, a, r));
    }

    let count = |f: &dyn Fn(&Event) -> bool| log.iter().filter(|e| f(e)).count() as f64;
    for x in 0..contexts {
        for arm in 0..k {
            let want = |s: f64, f: f64| BetaParams {
                success: alpha + s,
                failure: alpha + f,
            };
            let ts_want = want(
                count(&|e| e.0 == x && e.1 == arm && e.3),
                count(&|e| e.0 == x && e.1 == arm && !e.3),
            );
            let check_want = want(
                count(&|e| e.0 == x && e.1 == arm && e.2 == arm && e.3),
                count(&|e| e.0 == x && e.1 == arm && e.2 == arm && !e.3),
            );
            let obs_want = want(
                count(&|e| e.0 == x && e.2 == arm && e.3),
                count(&|e| e.0 == x && e.2 == arm && !e.3),
            );
            if ts.rewards().get(x, arm) != &ts_want {
                return Err(format!(
                    "TS ({x},{arm}): {:?} vs {ts_want:?}",
                    ts.rewards().get(x, arm)
                ));
            }
            if check.rewards().get(x, arm) != &check_want {
                return Err(format!(
                    "TS-Check ({x},{arm}): {:?} vs {check_want:?}",
                    check.rewards().get(x, arm)
                ));
            }
            if obs.rewards().get(x, arm) != &obs_want {
                return Err(format!(
                    "TS-Obs ({x},{arm}): {:?} vs {obs_want:?}",
                    obs.rewards().get(x, arm)
                ));
            }
            let z = arm;
            let conc = obs.compliance().get(x, z).concentration();
            for (a, &got) in conc.iter().enumerate() {
                let want = beta + count(&|e| e.0 == x && e.1 == z && e.2 == a);
                if got != want {
                    return Err(format!("TS-Obs Dirichlet ({x},{z})[{a}]: {got} vs {want}"));
                }
            }
        }
    }
    Ok(())
}

/// Spearman rank correlation with average ranks for ties.
pub fn spearman(x: &[f64], y: &[f64]) -> f64 {
    fn ranks(v: &[f64]) -> Vec<f64> {
        let mut idx: Vec<usize> = (0..v.len()).collect();
        idx.sort_by(|&a, &b| v[a].total_cmp(&v[b]));
        let mut r = vec![0.0; v.len()];
        let mut i = 0;
        while i < idx.len() {
            let mut j = i;
            while j + 1 < idx.len() && v[idx[j + 1]] == v[idx[i]] {
                j += 1;
            }
            let avg = (i + j) as f64 / 2.0 + 1.0;
            for &k in &idx[i..=j] {
                r[k] = avg;
            }
            i = j + 1;
        }
        r
    }
    let (rx, ry) = (ranks(x), ranks(y));
    let n = x.len() as f64;
    let (mx, my) = (rx.iter().sum::<f64>() / n, ry.iter().sum::<f64>() / n);
    let cov: f64 = rx.iter().zip(&ry).map(|(a, b)| (a - mx) * (b - my)).sum();
    let vx: f64 = rx.iter().map(|a| (a - mx).powi(2)).sum();
    let vy: f64 = ry.iter().map(|b| (b - my).powi(2)).sum();
    cov / (vx * vy).sqrt()
}
