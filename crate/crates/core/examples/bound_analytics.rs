//! Regret-bound coefficient `f`, its gradient, and how noncompliance moves the
//! leading term of the bound.

use ncbandit::special::{
    bernoulli_kl, bound_leading_term, compliance_product, delta_bound, f_bound, grad_f,
    BernoulliPair, BoundParams,
};

fn main() -> ncbandit::Result<()> {
    let pair = BernoulliPair::new(0.75, 0.25)?;
    println!("KL(0.25 || 0.75)   = {:.12}", bernoulli_kl(0.25, 0.75)?);
    println!("f(0.75, 0.25)      = {:.12}", f_bound(pair)?);
    let g = grad_f(pair)?;
    println!("grad f(0.75, 0.25) = ({:.6}, {:.6})", g.d_mu1, g.d_mui);

    let params = BoundParams::new(1e4, 0.1)?;
    let mu = [0.75, 0.5, 0.25];
    println!(
        "\nleading term, mu = {mu:?}, T = 1e4, eps = 0.1: {:.4}",
        bound_leading_term(&mu, &params)?
    );

    let cases: [(&str, Vec<Vec<f64>>); 3] = [
        (
            "runner-up collapse",
            vec![
                vec![1.0, 0.0, 0.0],
                vec![0.0, 1.0, 0.0],
                vec![0.0, 1.0, 0.0],
            ],
        ),
        ("best-arm collapse", vec![vec![1.0, 0.0, 0.0]; 3]),
        (
            "mild noise",
            vec![
                vec![0.9, 0.05, 0.05],
                vec![0.05, 0.9, 0.05],
                vec![0.05, 0.05, 0.9],
            ],
        ),
    ];
    for (name, pi) in cases {
        let observed = compliance_product(&pi, &mu)?;
        println!(
            "{name:<20} Pi mu = {:?}  delta = {:+.4}",
            observed
                .iter()
                .map(|v| (v * 1e3).round() / 1e3)
                .collect::<Vec<_>>(),
            delta_bound(&mu, &pi, &params)?
        );
    }

    // two arms: any noncompliance can only raise the bound
    for p in [0.0, 0.1, 0.3, 0.45] {
        let pi = vec![vec![1.0 - p, p], vec![p, 1.0 - p]];
        println!(
            "two-arm p = {p:<4}  delta = {:.4}",
            delta_bound(&[0.75, 0.25], &pi, &params)?
        );
    }
    Ok(())
}
