use schwarzian::action::action_value;
use schwarzian::diffeo::{cross_ratio, GridDiffeo};
use schwarzian::mobius::{gauge_fix, mobius_post_compose, MobiusMap};

fn main() -> schwarzian::Result<()> {
    let d = GridDiffeo::from_profile(4096, 0.2, |t| 0.6 * (2.0 * std::f64::consts::PI * t).sin() + 0.2 * (6.0 * t).cos())?;
    let m = MobiusMap::from_cartan(0.15, 0.8, 0.4);
    let moved = mobius_post_compose(&m, &d);

    println!("action {:.10} -> {:.10}", action_value(&d), action_value(&moved));
    for (s, t) in [(0.1, 0.3), (0.25, 0.9), (0.6, 0.62)] {
        println!("O({s}, {t}) = {:.12} -> {:.12}", cross_ratio(&d, s, t)?, cross_ratio(&moved, s, t)?);
    }

    let (g, fixed) = gauge_fix(&moved)?;
    println!("gauge map {:?}", g.coefficients());
    for p in [0.0, 1.0 / 3.0, 2.0 / 3.0] {
        println!("phi({p:.4}) = {:.15}", fixed.phi(p));
    }
    Ok(())
}
