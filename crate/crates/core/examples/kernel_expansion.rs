use schwarzian::specfun::{kernel_expansion_check, kernel_grid, QuadratureSpec};

fn main() -> schwarzian::Result<()> {
    let spec = QuadratureSpec::default();
    let mut worst = (0.0, (0.0, 0.0, 0.0));
    for (k, beta, z) in kernel_grid() {
        let c = kernel_expansion_check(k, beta, z, &spec)?;
        if c.residual() > worst.0 {
            worst = (c.residual(), (k, beta, z));
        }
    }
    let c = kernel_expansion_check(1.5, 1.0, 0.3, &spec)?;
    println!("k=1.5 beta=1 z=0.3: lhs {:.15} rhs {:.15} ({} terms, cutoff {:.2})", c.lhs, c.rhs, c.terms, c.cutoff);
    println!("worst residual over 125 points: {:.2e} at {:?}", worst.0, worst.1);
    Ok(())
}
