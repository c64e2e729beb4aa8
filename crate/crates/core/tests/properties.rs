mod common;

use proptest::prelude::*;

use spcirc::brauer_weingarten::*;
use spcirc::gp_stats::{algebra_overlap, algebra_overlap_dense, algebra_overlap_pauli, StateSpec};
use spcirc::group_sampler::{sample_sp, SymplecticFrameSampler};
use spcirc::moment_propagator::{propagate, LabelVector};
use spcirc::{DenseOperator, PauliString, RngStream};

fn pauli_strategy(max_n: usize) -> impl Strategy<Value = PauliString> {
    (1..=max_n).prop_flat_map(|n| {
        let m = (1u64 << n) - 1;
        (Just(n), 0..=m, 0..=m, 0u8..4).prop_map(|(n, x, z, p)| PauliString::new(n, x, z, p).unwrap())
    })
}

fn pauli_pair(max_n: usize) -> impl Strategy<Value = (PauliString, PauliString)> {
    (1..=max_n).prop_flat_map(|n| {
        let m = (1u64 << n) - 1;
        (0..=m, 0..=m, 0..=m, 0..=m, 0u8..4, 0u8..4).prop_map(move |(x1, z1, x2, z2, p1, p2)| {
            (PauliString::new(n, x1, z1, p1).unwrap(), PauliString::new(n, x2, z2, p2).unwrap())
        })
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn product_matches_dense((a, b) in pauli_pair(4)) {
        let ab = a.multiply(&b).unwrap().to_dense().unwrap();
        let dense = &a.to_dense().unwrap() * &b.to_dense().unwrap();
        prop_assert!(ab.distance_max(&dense) < 1e-12);
    }

    #[test]
    fn algebra_is_closed_under_commutators((a, b) in pauli_pair(5)) {
        if a.in_sp_algebra() && b.in_sp_algebra() {
            if let Some(c) = a.commutator(&b).unwrap() {
                prop_assert!(c.in_sp_algebra());
            }
        }
    }

    #[test]
    fn membership_routes_agree(p in pauli_strategy(4)) {
        let h = p.direction();
        prop_assert_eq!(h.in_sp_algebra(), h.in_sp_algebra_symbolic());
        let ih = h.to_dense().unwrap().scale_complex(num_complex::Complex64::i());
        prop_assert_eq!(h.in_sp_algebra(), ih.is_in_sp_algebra_dense().unwrap());
    }

    #[test]
    fn text_round_trip(p in pauli_strategy(8)) {
        let back: PauliString = p.to_string().parse().unwrap();
        prop_assert_eq!(back, p);
    }

    #[test]
    fn sampled_matrices_are_symplectic(seed in any::<u64>(), half in 1usize..6) {
        let u = sample_sp(2 * half, &mut RngStream::new(seed, 0)).unwrap();
        prop_assert!(u.unitarity_defect() < 1e-10);
        prop_assert!(u.symplectic_defect().unwrap() < 1e-10);
    }

    #[test]
    fn frame_sampler_preserves_both_overlaps(seed in any::<u64>()) {
        let mut rng = RngStream::new(seed, 1);
        let a = common::random_state(8, &mut rng);
        let b = common::random_state(8, &mut rng);
        let s = SymplecticFrameSampler::new(&[a.clone(), b.clone()]).unwrap();
        let out = s.sample(&mut rng);
        let (sa, sb) = (StateSpec::pure(a).unwrap(), StateSpec::pure(b).unwrap());
        let (ta, tb) = (StateSpec::pure(out[0].clone()).unwrap(), StateSpec::pure(out[1].clone()).unwrap());
        prop_assert!((algebra_overlap(&sa, &sb).unwrap() - algebra_overlap(&ta, &tb).unwrap()).abs() < 1e-10);
        let plain = |x: &StateSpec, y: &StateSpec| spcirc::gp_stats::overlap(x, y).unwrap();
        prop_assert!((plain(&sa, &sb) - plain(&ta, &tb)).abs() < 1e-10);
    }

    #[test]
    fn algebra_overlap_routes_agree(seed in any::<u64>(), n in 1usize..4) {
        let d = 1 << n;
        let mut rng = RngStream::new(seed, 2);
        let a = StateSpec::pure(common::random_state(d, &mut rng)).unwrap();
        let b = StateSpec::pure(common::random_state(d, &mut rng)).unwrap();
        let direct = algebra_overlap(&a, &b).unwrap();
        prop_assert!((direct - algebra_overlap_pauli(&a, &b).unwrap()).abs() < 1e-10);
        prop_assert!((direct - algebra_overlap_dense(&a, &b).unwrap()).abs() < 1e-10);
    }

    #[test]
    fn composition_is_represented(i in 0usize..15, j in 0usize..15, d in prop::sample::select(vec![2usize, 4])) {
        let diagrams = enumerate_diagrams(3).unwrap();
        let (a, b) = (&diagrams[i % diagrams.len()], &diagrams[j % diagrams.len()]);
        let (loops, c) = compose_diagrams(a, b).unwrap();
        let g = BrauerGroup::O;
        let lhs = &represent(a, d, g).unwrap() * &represent(b, d, g).unwrap();
        let rhs = represent(&c, d, g).unwrap().scale(g.delta(d).powi(loops as i32));
        prop_assert!(lhs.distance_max(&rhs) < 1e-12);
    }

    #[test]
    fn twirl_is_linear(seed in any::<u64>(), s in -2.0f64..2.0) {
        let mut rng = RngStream::new(seed, 3);
        let x = common::random_hermitian(16, &mut rng);
        let y = common::random_hermitian(16, &mut rng);
        let t = |m: &DenseOperator| twirl(m, 2, 4, BrauerGroup::Sp).unwrap().to_dense().unwrap();
        let lhs = t(&x.scale(s).add(&y));
        let rhs = t(&x).scale(s).add(&t(&y));
        prop_assert!(lhs.distance_max(&rhs) < 1e-10);
    }

    #[test]
    fn propagation_conserves_identity_label(coeffs in prop::collection::vec(-1.0f64..1.0, 18), layers in 0usize..4) {
        let v = LabelVector::new(3, coeffs).unwrap();
        let w = propagate(&v, layers).unwrap();
        prop_assert!((v.identity_coefficient() - w.identity_coefficient()).abs() < 1e-14);
    }
}
