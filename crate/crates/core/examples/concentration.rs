use schwarzian::sampler::concentration_experiment;

fn main() -> schwarzian::Result<()> {
    for r in concentration_experiment(&[1.0, 0.7, 0.5, 0.2], 64, 100_000, 0)? {
        println!(
            "sigma {:<4} distance {:.5}  ess {:>8.1}  max weight share {:.3}{}",
            r.sigma,
            r.mean_distance,
            r.effective_samples,
            r.max_weight_ratio,
            if r.unreliable { "  (degenerate weights)" } else { "" }
        );
    }
    Ok(())
}
