use std::f64::consts::PI;

use schwarzian::specfun::{exp_moment_binomial, exp_moment_curve, log_partition_closed_form, moment_integral, QuadratureSpec};

fn main() -> schwarzian::Result<()> {
    let spec = QuadratureSpec::default();
    let (delta, sigma2) = (0.25, 1.0);
    let log_z = log_partition_closed_form(sigma2);
    for l in 1..=4 {
        let m = moment_integral(l, delta, sigma2, &spec)?;
        println!("M_{l}/Z = {:.12e}  (error {:.1e}, {} nodes)", (m.log_value - log_z).exp(), m.error_estimate, m.nodes);
    }
    println!("pi/sin(pi delta) = {:.12e}", PI / (PI * delta).sin());

    let zs = [0.0, 0.1, 0.2, 0.3, 0.4];
    for e in exp_moment_curve(&zs, delta, sigma2, &spec)? {
        let check = exp_moment_binomial(e.z, delta, sigma2, 12, &spec)?;
        println!("z = {:.1}: series {:.10e}  binomial {:.10e}  ({} terms)", e.z, e.value, check, e.terms);
    }
    Ok(())
}
