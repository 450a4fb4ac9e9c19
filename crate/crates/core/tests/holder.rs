use proptest::prelude::*;
use schwarzian::diffeo::random_smooth;
use schwarzian::holder::{
    cocycle_residual, equivalence_scan, holder_constant_classical, holder_constant_cross_ratio, holder_report, rough_profile,
    sandwich_check, scaled_family, spearman,
};
use schwarzian::mobius::{mobius_diffeo, mobius_post_compose, MobiusMap};
use schwarzian::rng::stream_rng;

fn sorted<const N: usize>(mut p: [f64; N]) -> Option<[f64; N]> {
    p.sort_by(f64::total_cmp);
    let ok = p.windows(2).all(|w| w[1] - w[0] > 1e-3) && p[0] + 1.0 - p[N - 1] > 1e-3;
    ok.then_some(p)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn cocycle_and_sandwich(seed in any::<u64>(), modes in 1usize..8, amplitude in 0.0f64..1.0, pts in prop::array::uniform5(0.0f64..1.0)) {
        let p = sorted(pts);
        prop_assume!(p.is_some());
        let p = p.unwrap();
        let d = random_smooth(&mut stream_rng(seed, 3), 4096, modes, amplitude).unwrap();
        let r = cocycle_residual(&d, [p[0], p[1], p[2], p[3]]).unwrap();
        prop_assert!(r <= 1e-7, "{r}");
        let s = sandwich_check(&d, p).unwrap();
        prop_assert!(s.holds && s.margin > 0.0, "{s:?}");
    }
}

#[test]
fn mobius_maps_have_vanishing_constants() {
    for (a, r, b) in [(0.1, 0.4, 0.3), (0.6, 0.9, 0.05)] {
        let d = mobius_diffeo(&MobiusMap::from_cartan(a, r, b), 2048);
        let rep = holder_report(&d, 0.3).unwrap();
        assert!(rep.k_cross < 1e-6, "{}", rep.k_cross);
        assert!(rep.c_classical < 1e-6, "{}", rep.c_classical);
    }
}

#[test]
fn cross_constant_is_orbit_invariant() {
    let profile = rough_profile(4096, 0.75, 11);
    let base = &scaled_family(&profile, &[0.25]).unwrap()[0];
    let k0 = holder_constant_cross_ratio(base, 0.3).unwrap().value;
    for (a, r, b) in [(0.2, 0.3, 0.7), (0.9, 0.5, 0.1), (0.45, 0.5, 0.4)] {
        let moved = mobius_post_compose(&MobiusMap::from_cartan(a, r, b), base);
        let k = holder_constant_cross_ratio(&moved, 0.3).unwrap().value;
        assert!((k - k0).abs() <= 1e-8 * k0, "{k} {k0}");
        let c0 = holder_constant_classical(base, 0.3).unwrap().value;
        let c = holder_constant_classical(&moved, 0.3).unwrap().value;
        assert!((c - c0).abs() <= 1e-6 * c0, "{c} {c0}");
    }
}

#[test]
fn scaling_family_envelopes() {
    let scales: Vec<f64> = (1..=8).map(|k| 0.5f64.powi(k)).collect();
    for seed in [1, 2, 3] {
        let profile = rough_profile(1024, 0.75, seed);
        let scan = equivalence_scan(&scaled_family(&profile, &scales).unwrap(), 0.3).unwrap();
        assert!(scan.monotone);
        assert!(scan.rank_correlation.unwrap() >= 0.99);
        let k: Vec<f64> = scan.reports.iter().map(|r| r.k_cross).collect();
        let c: Vec<f64> = scan.reports.iter().map(|r| r.c_classical).collect();
        let ratios: Vec<f64> = k.iter().zip(&c).map(|(a, b)| a / b).collect();
        let tail = &ratios[4..];
        let (lo, hi) = tail.iter().fold((f64::INFINITY, 0.0f64), |(l, h), &v| (l.min(v), h.max(v)));
        assert!(hi / lo < 1.1, "{ratios:?}");
        assert!(k[7] < 1e-2 * k[0] && c[7] < 1e-2 * c[0]);
    }
}

#[test]
fn alpha_outside_range_is_rejected() {
    let d = random_smooth(&mut stream_rng(0, 0), 256, 3, 0.3).unwrap();
    assert!(holder_report(&d, 0.0).is_err());
    assert!(holder_report(&d, 1.0).is_err());
}

#[test]
fn spearman_handles_ties_and_constants() {
    assert_eq!(spearman(&[1.0, 2.0, 3.0], &[3.0, 5.0, 9.0]), Some(1.0));
    assert_eq!(spearman(&[1.0, 1.0, 1.0], &[3.0, 5.0, 9.0]), None);
    assert!((spearman(&[1.0, 2.0, 3.0, 4.0], &[4.0, 3.0, 2.0, 1.0]).unwrap() + 1.0).abs() < 1e-15);
}
