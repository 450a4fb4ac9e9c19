use std::f64::consts::PI;

use proptest::prelude::*;
use schwarzian::diffeo::{cross_ratio, p_inverse, p_inverse_sampled, p_map, random_smooth, xi_distance, GridDiffeo};
use schwarzian::mobius::{gauge_fix, mobius_diffeo, mobius_post_compose, three_point_map, MobiusMap};
use schwarzian::rng::stream_rng;
use schwarzian::Error;

fn smooth(n: usize, seed: u64, modes: usize, amplitude: f64) -> GridDiffeo {
    random_smooth(&mut stream_rng(seed, 0), n, modes, amplitude).unwrap()
}

fn mobius(a: f64, r: f64, b: f64) -> MobiusMap {
    MobiusMap::from_cartan(a, r, b)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    #[test]
    fn p_map_round_trip(seed in any::<u64>(), modes in 1usize..12, amplitude in 0.0f64..3.0, theta in 0.0f64..1.0) {
        let d = smooth(256, seed, modes, amplitude);
        let back = p_inverse(&p_map(d.xi(), theta).unwrap());
        let err = back.iter().zip(d.xi()).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        prop_assert!(err <= 1e-12, "{err}");
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn phi_is_an_increasing_circle_map(seed in any::<u64>(), amplitude in 0.0f64..3.0, theta in 0.0f64..1.0) {
        let d = smooth(128, seed, 6, amplitude);
        let d = GridDiffeo::new(d.xi().to_vec(), theta).unwrap();
        let lifts: Vec<f64> = (0..=128).map(|i| d.node_phi(i)).collect();
        prop_assert!(lifts.windows(2).all(|w| w[1] > w[0]));
        prop_assert!((lifts[128] - lifts[0] - 1.0).abs() < 1e-12);
        prop_assert!((0..128).all(|i| (0.0..1.0).contains(&d.phi(i as f64 / 128.0))));
    }

    #[test]
    fn sampled_inverse_recovers_profile(seed in any::<u64>(), amplitude in 0.0f64..1.0) {
        let d = smooth(512, seed, 3, amplitude);
        let phi: Vec<f64> = (0..512).map(|i| d.node_phi(i)).collect();
        let back = p_inverse_sampled(&phi).unwrap();
        prop_assert!(xi_distance(&back, &d) < 1e-4, "{}", xi_distance(&back, &d));
    }

    #[test]
    fn group_action(seed in any::<u64>(), a1 in 0.0f64..1.0, r1 in 0.0f64..0.8, b1 in 0.0f64..1.0,
                    a2 in 0.0f64..1.0, r2 in 0.0f64..0.8, b2 in 0.0f64..1.0) {
        let d = smooth(4096, seed, 4, 0.4);
        let (m1, m2) = (mobius(a1, r1, b1), mobius(a2, r2, b2));
        let twice = mobius_post_compose(&m2, &mobius_post_compose(&m1, &d));
        let once = mobius_post_compose(&m2.compose(&m1), &d);
        prop_assert!(xi_distance(&twice, &once) <= 1e-8, "{}", xi_distance(&twice, &once));
    }

    #[test]
    fn cross_ratio_is_mobius_invariant(seed in any::<u64>(), a in 0.0f64..1.0, r in 0.0f64..1.0, b in 0.0f64..1.0,
                                       s in 0.0f64..1.0, t in 0.0f64..1.0) {
        prop_assume!((s - t).abs() > 1e-3 && (s - t).abs() < 1.0 - 1e-3);
        let d = smooth(8192, seed, 4, 0.5);
        let moved = mobius_post_compose(&mobius(a, r, b), &d);
        let x = cross_ratio(&d, s, t).unwrap();
        let y = cross_ratio(&moved, s, t).unwrap();
        prop_assert!((x - y).abs() <= 1e-8 * x.abs(), "{x} {y}");
    }

    #[test]
    fn gauge_fix_is_idempotent(seed in any::<u64>(), a in 0.0f64..1.0, r in 0.0f64..1.0, b in 0.0f64..1.0) {
        let d = mobius_post_compose(&mobius(a, r, b), &smooth(1024, seed, 4, 0.5));
        let (_, fixed) = gauge_fix(&d).unwrap();
        for p in [0.0, 1.0 / 3.0, 2.0 / 3.0] {
            prop_assert!(schwarzian::circle_dist(fixed.phi(p), p) <= 1e-13);
        }
        let (again, refixed) = gauge_fix(&fixed).unwrap();
        let id = MobiusMap::identity().coefficients();
        let c = again.coefficients();
        prop_assert!(c.iter().zip(id).all(|(x, y)| (x - y).abs() <= 1e-10), "{c:?}");
        prop_assert!(xi_distance(&refixed, &fixed) <= 1e-10);
    }
}

#[test]
fn cross_ratio_identity_kernel() {
    let id = GridDiffeo::identity(256);
    for (s, t) in [(0.1f64, 0.3f64), (0.8, 0.2), (0.0, 0.5)] {
        let gap = (t - s).rem_euclid(1.0);
        let v = cross_ratio(&id, s, t).unwrap();
        assert!((v - PI / (PI * gap).sin()).abs() < 1e-12 * v);
    }
    assert!(matches!(cross_ratio(&id, 0.4, 0.4), Err(Error::UndefinedObservable(_))));
}

#[test]
fn mobius_grid_matches_closed_form() {
    let m = mobius(0.2, 0.7, 0.55);
    let d = mobius_diffeo(&m, 2048);
    let base = m.log_derivative(0.0);
    for i in (0..=2048).step_by(37) {
        let t = i as f64 / 2048.0;
        assert!((d.xi()[i] - (m.log_derivative(t) - base)).abs() < 1e-8, "{t}");
        assert!(schwarzian::circle_dist(d.phi(t), m.apply_circle(t)) < 1e-8, "{t}");
    }
}

#[test]
fn three_point_map_sends_targets() {
    let from = [0.05, 0.4, 0.7];
    let to = [0.2, 0.25, 0.9];
    let m = three_point_map(from, to).unwrap();
    for (a, b) in from.iter().zip(to) {
        assert!(schwarzian::circle_dist(m.apply_circle(*a), b) < 1e-12);
    }
    assert!(three_point_map(from, [0.2, 0.9, 0.25]).is_err());
}

#[test]
fn invalid_profiles_are_rejected() {
    assert!(GridDiffeo::new(vec![0.0; 4], 0.0).is_err());
    let mut xi = vec![0.0; 65];
    xi[3] = f64::NAN;
    assert!(GridDiffeo::new(xi, 0.0).is_err());
    let mut xi = vec![0.0; 65];
    xi[0] = 0.5;
    assert!(GridDiffeo::new(xi, 0.0).is_err());
}
