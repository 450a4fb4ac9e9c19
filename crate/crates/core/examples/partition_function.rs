use schwarzian::specfun::{partition_function, QuadratureSpec};

fn main() -> schwarzian::Result<()> {
    let spec = QuadratureSpec::default();
    println!("{:>6} {:>22} {:>22} {:>10}", "sigma2", "log Z closed", "log Z quadrature", "rel diff");
    for s2 in [0.25, 0.5, 1.0, 2.0, 4.0, 8.0] {
        let z = partition_function(s2, &spec)?;
        println!("{s2:>6} {:>22.15} {:>22.15} {:>10.2e}", z.log_closed_form(), z.log_quadrature(), z.rel_diff());
    }
    Ok(())
}
