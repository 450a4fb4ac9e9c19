use schwarzian::holder::{cocycle_residual, equivalence_scan, holder_constant_classical, holder_constant_cross_ratio, raw_classical_seminorm, rough_profile, sandwich_check, scaled_family};
use schwarzian::mobius::{mobius_post_compose, MobiusMap};

fn main() -> schwarzian::Result<()> {
    let alpha = 0.3;
    let profile = rough_profile(1024, 0.75, 7);
    let scales: Vec<f64> = (1..=8).map(|k| 0.5f64.powi(k)).collect();
    let scan = equivalence_scan(&scaled_family(&profile, &scales)?, alpha)?;
    for (e, r) in scales.iter().zip(&scan.reports) {
        println!("eps {e:<10} k_cross {:.6e}  c_classical {:.6e}", r.k_cross, r.c_classical);
    }
    println!("rank correlation {:?}, monotone {}", scan.rank_correlation, scan.monotone);

    let base = &scaled_family(&profile, &[0.5])?[0];
    for m in [MobiusMap::identity(), MobiusMap::from_cartan(0.1, 0.5, 0.3), MobiusMap::from_cartan(0.7, 1.0, 0.2)] {
        let d = mobius_post_compose(&m, base);
        println!(
            "orbit: k_cross {:.10e}  raw seminorm {:.6e}  c_classical {:.6e}",
            holder_constant_cross_ratio(&d, alpha)?.value,
            raw_classical_seminorm(&d, alpha).value,
            holder_constant_classical(&d, alpha)?.value
        );
    }

    println!("cocycle residual {:.2e}", cocycle_residual(base, [0.05, 0.3, 0.55, 0.8])?);
    println!("sandwich {:?}", sandwich_check(base, [0.0, 0.1, 0.2, 0.3, 0.4])?);
    Ok(())
}
