use std::f64::consts::PI;

use rand::Rng;
use schwarzian::action::action_value;
use schwarzian::diffeo::{random_smooth, GridDiffeo};
use schwarzian::mobius::{mobius_diffeo, random_mobius};
use schwarzian::rng::stream_rng;

fn main() -> schwarzian::Result<()> {
    let floor = -2.0 * PI * PI;
    println!("identity: {:.15} (floor {floor:.15})", action_value(&GridDiffeo::identity(1024)));

    let mut rng = stream_rng(1, 0);
    for _ in 0..4 {
        let m = random_mobius(&mut rng, 0.5);
        let d = mobius_diffeo(&m, 8192);
        println!("mobius {:?}: action - floor = {:.2e}", m.coefficients(), action_value(&d) - floor);
    }

    let mut lowest = f64::INFINITY;
    for _ in 0..1000 {
        let amp = rng.random_range(0.1..2.0);
        let d = random_smooth(&mut rng, 512, 16, amp)?;
        lowest = lowest.min(action_value(&d));
    }
    println!("lowest action over 1000 random diffeomorphisms: {lowest:.6}");
    Ok(())
}
