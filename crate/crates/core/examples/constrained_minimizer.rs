use schwarzian::action::{euler_lagrange_residual, minimize_numerical, minimizer_closed_form, BoundaryConstraints};

fn main() -> schwarzian::Result<()> {
    let cases = [
        (0.0, 0.5, 0.0, 0.5, 1.0, 1.0),
        (0.1, 0.4, 0.2, 0.6, 0.5, 0.8),
        (0.0, 0.6, 0.1, 0.4, 2.0, 1.5),
        (0.2, 0.5, 0.0, 0.3, 1.0, 1.0),
    ];
    for (t1, t2, p1, p2, q1, q2) in cases {
        let c = BoundaryConstraints::new(t1, t2, p1, p2, q1, q2)?;
        let (sol, exact) = minimizer_closed_form(&c, 4096)?;
        let num = minimize_numerical(&c, 4096, 100_000, 1e-6)?;
        let (lambda0, el) = euler_lagrange_residual(&exact.reduced_log_derivative(&c), t1, t2)?;
        println!(
            "{:<6} kappa {:.4} lambda {:.6}  action {:.8} vs {:.8}  |dlog psi'| {:.1e}  EL residual {:.1e} (lambda0 {:.3})",
            sol.regime.to_string(),
            sol.kappa,
            sol.lambda,
            exact.action(),
            num.profile.action(),
            exact.log_derivative_distance(&num.profile),
            el,
            lambda0
        );
    }
    Ok(())
}
