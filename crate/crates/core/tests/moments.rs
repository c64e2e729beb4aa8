mod common;

use spcirc::moment_propagator::*;

#[test]
fn propagation_matches_dense_pauli_pair_oracle() {
    for n in 2..=6 {
        for layers in 1..=4 {
            let z = collision_after(n, layers).unwrap();
            let oracle = common::dense_pauli_pair_collision(n, layers);
            assert!((z - oracle).abs() < 1e-10, "n={n} L={layers}: {z} vs {oracle}");
        }
    }
}

#[test]
fn propagation_matches_monte_carlo() {
    let (n, layers) = (4, 3);
    let z = collision_after(n, layers).unwrap();
    let (mc, se) = common::mc_collision(n, layers, 100_000, 11);
    assert!((z - mc).abs() < 3.0 * se, "{z} vs {mc} +- {se}");
}

#[test]
fn z_decreases_toward_haar_and_stays_above_uniform() {
    for n in 2..=12 {
        let r = depth_to_anticoncentrate(n, 1e-3, 200).unwrap();
        let d = (1u64 << n) as f64;
        for w in r.z_trace.windows(2) {
            assert!(w[1] <= w[0] + 1e-15, "n={n}");
        }
        assert!(r.z_trace.iter().all(|&z| z >= 1.0 / d));
        assert!(r.n_l_star.is_some());
    }
}

#[test]
fn odd_and_even_registers_reach_the_fixed_point() {
    for n in [5, 7, 9, 12] {
        let z = collision_after(n, 80).unwrap();
        assert!((z - haar_collision(n)).abs() < 1e-8, "n={n}");
    }
}
