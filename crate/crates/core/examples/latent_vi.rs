//! Fits the latent-compliance model to data where only the proposal and the
//! reward are seen, and compares the variational posterior with the truth.

use ncbandit::env::Environment;
use ncbandit::sampling::RngStream;
use ncbandit::vi::{run, Datum, InitMode, VIConfig, VIPriors};

fn main() -> ncbandit::Result<()> {
    let env = Environment::bandit(vec![0.8, 0.3], vec![vec![0.9, 0.1], vec![0.2, 0.8]])?;
    let mut rng = RngStream::new(11, 0);
    let data: Vec<Datum> = (0..400)
        .map(|i| {
            let out = env.step(&mut rng, i % 2)?;
            Ok(Datum {
                proposed: out.proposed,
                reward: out.reward,
            })
        })
        .collect::<ncbandit::Result<_>>()?;

    for init in [InitMode::Uniform, InitMode::PriorSample] {
        let config = VIConfig {
            init,
            ..VIConfig::default()
        };
        let state = run(&config, VIPriors::default(), 2, &data, &mut rng, None)?;
        let trace = state.elbo_trace();
        println!(
            "{init:?}: {} sweeps, converged = {}, ELBO {:.4} -> {:.4}",
            trace.len(),
            state.converged(),
            trace[0],
            trace[trace.len() - 1]
        );
        println!("  q(mu) means     {:?}", round(&state.reward_means()));
        for z in 0..2 {
            let row = state.beta_row(z);
            let total: f64 = row.iter().sum();
            println!(
                "  q(pi_{z}) means  {:?}",
                round(&row.iter().map(|b| b / total).collect::<Vec<_>>())
            );
        }
        println!(
            "  expected reward per proposal {:?}",
            round(&expected(&state))
        );
    }
    println!(
        "true expected reward per proposal {:?}",
        round(env.expected_rewards(0)?)
    );
    println!("(mu and pi are only identified through their product)");
    Ok(())
}

fn expected(state: &ncbandit::vi::VariationalState) -> Vec<f64> {
    let mu = state.reward_means();
    (0..state.arms())
        .map(|z| {
            let row = state.beta_row(z);
            let total: f64 = row.iter().sum();
            row.iter().zip(&mu).map(|(b, m)| b / total * m).sum()
        })
        .collect()
}

fn round(v: &[f64]) -> Vec<f64> {
    v.iter().map(|x| (x * 1e3).round() / 1e3).collect()
}
