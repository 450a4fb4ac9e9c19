use schwarzian::diffeo::GridDiffeo;
use schwarzian::sampler::ldp_rate_table;

fn main() -> schwarzian::Result<()> {
    let rows = ldp_rate_table(&GridDiffeo::identity(64), 0.5, &[0.5, 0.25, 0.125], 100_000, 0)?;
    for r in rows {
        println!(
            "sigma2 {:<6} estimate {:.6} +- {:.1e}  rate {:.6}  gap {:.4}  ess {:.0}{}",
            r.sigma2,
            r.log_mass_estimate,
            r.std_error,
            r.rate_prediction,
            r.gap(),
            r.effective_samples,
            if r.unreliable { "  (unreliable)" } else { "" }
        );
    }
    Ok(())
}
