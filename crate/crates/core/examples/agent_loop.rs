//! Drives agents by hand through the propose / implement / observe loop.

use ncbandit::agents::{Agent, Feedback, TsAgent, TsLatAgent, TsObsAgent};
use ncbandit::env::Environment;
use ncbandit::sampling::RngStream;
use ncbandit::vi::VIConfig;

fn main() -> ncbandit::Result<()> {
    // proposals are swapped 30% of the time
    let env = Environment::bandit(vec![0.75, 0.25], vec![vec![0.7, 0.3], vec![0.3, 0.7]])?;
    let mut agents: Vec<Box<dyn Agent>> = vec![
        Box::new(TsAgent::new(1, 2, 1.0)?),
        Box::new(TsAgent::with_compliance_check(1, 2, 1.0)?),
        Box::new(TsObsAgent::new(1, 2, 1.0, 1.0)?),
        Box::new(TsLatAgent::new(1, 2, 1.0, 1.0, 20, VIConfig::default())?),
    ];
    for agent in &mut agents {
        let mut rng = RngStream::new(5, 0);
        let mut regret = 0.0;
        let mut picks = [0usize; 2];
        for _ in 0..2000 {
            let z = agent.propose(&mut rng, 0)?;
            let out = env.step_with_context(&mut rng, 0, z)?;
            regret += env.instantaneous_regret(0, z)?;
            picks[z] += 1;
            let fb = Feedback {
                context: 0,
                proposed: z,
                implemented: agent
                    .observes_implemented_action()
                    .then_some(out.implemented),
                reward: out.reward,
            };
            agent.observe(&fb, &mut rng)?;
        }
        let (runs, converged) = agent.vi_counts();
        print!(
            "{:<10} regret {regret:>6.1}  proposals {picks:?}",
            agent.name()
        );
        if runs > 0 {
            print!("  VI runs {runs} ({converged} converged)");
        }
        println!();
    }
    Ok(())
}
