use std::f64::consts::PI;

use schwarzian::rng::{stream_id, stream_rng};
use schwarzian::sampler::{ball_probability, bridge_from, bridge_mass, mu_sample, schwarzian_log_weight};

fn main() -> schwarzian::Result<()> {
    let (sigma, n, samples) = (1.0, 64, 100_000u64);
    let (i, j) = (n / 4, n / 2);
    let mut acc = 0.0;
    for k in 0..samples {
        let x = bridge_from(&mut stream_rng(3, stream_id(0, k)), sigma, n);
        acc += x[i] * x[j];
    }
    println!("Cov(xi(1/4), xi(1/2)) = {:.5}, exact {:.5}", acc / samples as f64, sigma * sigma * 0.25 * 0.5);
    println!("bridge mass 1/(sqrt(2 pi) sigma) = {:.6}", bridge_mass(sigma));

    let d = mu_sample(0.5, n, 11)?;
    println!("mu sample: theta {:.6}, weight {:.6} (floor {:.6})", d.theta(), schwarzian_log_weight(&d, 0.25), 2.0 * PI * PI / 0.25);

    let mut center: Vec<f64> = (0..=n).map(|k| 0.5 * (PI * k as f64 / n as f64).sin()).collect();
    center[n] = 0.0;
    let zero = vec![0.0; n + 1];
    let b = ball_probability(&zero, &zero, 0.3, 0.8, 100_000, 5)?;
    println!("P(sup|xi| < 0.3), sigma 0.8: naive {:.5} +- {:.5}", b.naive, b.naive_se);
    let b = ball_probability(&center, &center, 0.3, 0.3, 100_000, 5)?;
    println!("ball around a bump, sigma 0.3: naive {:.3e} +- {:.1e}, tilted {:.3e} +- {:.1e}", b.naive, b.naive_se, b.tilted, b.tilted_se);
    Ok(())
}
