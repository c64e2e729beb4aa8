use spcirc::circuit::*;
use spcirc::{Pauli, PauliString, RngStream};

#[test]
fn statevector_matches_dense_unitary() {
    let mut rng = RngStream::new(31, 0);
    for n in 2..=5 {
        let mut c = build_bricklayer(n, 2, &mut rng).unwrap();
        let mut r2 = RngStream::new(32, n as u64);
        c.append(&random_rotation_circuit(RotationFamily::Theorem1, n, 1, &mut r2).unwrap()).unwrap();
        let u = to_unitary(&c).unwrap();
        let psi = StateVector::basis(n, 1).unwrap();
        let out = apply(&c, &psi).unwrap();
        let dense = u.apply(psi.amplitudes()).unwrap();
        for (a, b) in out.amplitudes().iter().zip(&dense) {
            assert!((a - b).norm() < 1e-12);
        }
        assert!((out.norm() - 1.0).abs() < 1e-12);
    }
}

#[test]
fn symplectic_circuits_preserve_omega() {
    let mut rng = RngStream::new(33, 0);
    for n in 2..=5 {
        let a = random_rotation_circuit(RotationFamily::Theorem1, n, 3, &mut rng).unwrap();
        let b = build_bricklayer(n, 3, &mut rng).unwrap();
        for c in [a, b] {
            assert!(to_unitary(&c).unwrap().symplectic_defect().unwrap() < 1e-9);
        }
    }
}

#[test]
fn special_orthogonal_bulk_is_symplectic_too() {
    let c = build_bricklayer_with(4, 2, BlockGroup::So4, &mut RngStream::new(34, 0)).unwrap();
    assert!(to_unitary(&c).unwrap().symplectic_defect().unwrap() < 1e-9);
    assert!(build_bricklayer_with(4, 2, BlockGroup::U4, &mut RngStream::new(34, 0)).is_err());
}

#[test]
fn seeded_json_round_trip_reproduces_the_unitary() {
    let c = build_bricklayer_seeded(4, 2, BlockGroup::O4, 99).unwrap();
    let back = CircuitSpec::from_json(&c.to_json().unwrap()).unwrap();
    assert!(to_unitary(&c).unwrap().distance_max(&to_unitary(&back).unwrap()) < 1e-14);
}

#[test]
fn rotation_about_algebra_element_moves_expectations() {
    let n = 3;
    let g = PauliString::from_factors(n, &[(0, Pauli::X)]).unwrap();
    let mut c = CircuitSpec::new(n).unwrap();
    c.push(Gate::Rotation { generator: g, theta: std::f64::consts::FRAC_PI_4 }).unwrap();
    let out = apply(&c, &StateVector::zero(n).unwrap()).unwrap();
    let z0 = PauliString::from_factors(n, &[(0, Pauli::Z)]).unwrap();
    // exp(i pi/4 X)|0> has <Z> = cos(pi/2).
    assert!(z0.expectation(out.amplitudes()).unwrap().re.abs() < 1e-12);
}

#[test]
fn stacked_universal_blocks_reach_haar_collision() {
    let zh = 2.0 / 5.0;
    let (z1, se1) = rotation_collision(RotationFamily::Theorem1, 2, 1, 5000, &RngStream::new(35, 0)).unwrap();
    assert!(z1 - zh > 10.0 * se1);
    let (z, se) = rotation_collision(RotationFamily::Theorem1, 2, 16, 20000, &RngStream::new(35, 1)).unwrap();
    assert!((z - zh).abs() < 4.0 * se, "{z} +- {se}");
}
