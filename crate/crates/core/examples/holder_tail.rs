use schwarzian::sampler::holder_tail_scan;

fn main() -> schwarzian::Result<()> {
    let ms = [0.25, 0.5, 0.75, 1.0, 10.0, 40.0];
    for sigma in [1.2, 0.8, 0.5] {
        for r in holder_tail_scan(sigma, 0.3, &ms, 64, 10_000, 0)? {
            println!("sigma {:<4} M {:<5} fraction {:.4e}  ess {:.0}", r.sigma, r.m, r.fraction, r.effective_samples);
        }
    }
    Ok(())
}
