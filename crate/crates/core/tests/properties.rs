mod common;

use proptest::prelude::*;

use qnet::blochmessiah::{factorize_g, factorize_g0, Factorization};
use qnet::elements;
use qnet::fock::{heisenberg_check, FockSpace};
use qnet::group::{
    compose, direct_sum, inverse_scattering, quasi_unitarity_residual, validate_generator,
    FormClass,
};
use qnet::hamiltonian::{effective_hamiltonian, generator_from_hamiltonian, scattering_at_time};
use qnet::io::{parse_matrix, to_json, MatrixDoc};
use qnet::linalg::{frobenius, identity};
use qnet::logm::{expm, hamiltonian_log};
use qnet::{Generator, ScatteringMatrix};

fn random_s(seed: u64, n: usize, norm: f64) -> ScatteringMatrix {
    let k = common::physical_generator(&mut common::rng(seed), n, norm);
    ScatteringMatrix::new(expm(&k).unwrap(), 1e-10).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn physical_generators_validate(seed: u64, n in 1usize..=5, norm in 0.01f64..4.0) {
        let k = common::physical_generator(&mut common::rng(seed), n, norm);
        let report = validate_generator(&k, 1e-10).unwrap();
        prop_assert!(report.passed, "{}", report.summary());
        prop_assert_eq!(report.form_class, Some(FormClass::L));
    }

    #[test]
    fn exponentials_are_quasi_unitary(seed: u64, n in 1usize..=5, norm in 0.01f64..3.0) {
        let k = common::physical_generator(&mut common::rng(seed), n, norm);
        let s = expm(&k).unwrap();
        prop_assert!(quasi_unitarity_residual(&s) <= 1e-10 * frobenius(&s).powi(2).max(1.0));
    }

    #[test]
    fn composition_is_associative(seed: u64, n in 1usize..=4) {
        let (a, b, c) = (random_s(seed, n, 1.0), random_s(seed ^ 1, n, 1.0), random_s(seed ^ 2, n, 1.0));
        let left = compose(&compose(&a, &b).unwrap(), &c).unwrap();
        let right = compose(&a, &compose(&b, &c).unwrap()).unwrap();
        prop_assert!(frobenius(&(left.matrix() - right.matrix())) <= 1e-12 * frobenius(left.matrix()));
    }

    #[test]
    fn inverse_composes_to_identity(seed: u64, n in 1usize..=4, norm in 0.01f64..2.0) {
        let s = random_s(seed, n, norm);
        let p = compose(&s, &inverse_scattering(&s)).unwrap();
        prop_assert!(frobenius(&(p.matrix() - identity(2 * n))) <= 1e-12 * frobenius(s.matrix()).powi(2));
    }

    #[test]
    fn direct_sum_stays_in_group(seed: u64, n1 in 1usize..=3, n2 in 1usize..=3) {
        let s = direct_sum(&random_s(seed, n1, 1.0), &random_s(seed ^ 7, n2, 1.0));
        prop_assert_eq!(s.n(), n1 + n2);
        prop_assert!(ScatteringMatrix::new(s.matrix().clone(), 1e-10).is_ok());
    }

    #[test]
    fn small_generators_are_recovered(seed: u64, n in 1usize..=6, norm in 0.01f64..0.5) {
        let k = common::physical_generator(&mut common::rng(seed), n, norm);
        let s = ScatteringMatrix::new(expm(&k).unwrap(), 1e-10).unwrap();
        let r = hamiltonian_log(&s, 1e-10).unwrap();
        let got = r.generator().expect("generator");
        prop_assert!(frobenius(&(got.matrix() - &k)) <= 1e-7);
        prop_assert!(r.reconstruction_residual <= 1e-8);
    }

    #[test]
    fn factorizations_reconstruct(seed: u64, n in 1usize..=6, norm in 0.01f64..2.0) {
        let s = random_s(seed, n, norm);
        let bound = 1e-8 * frobenius(s.matrix()).max(1.0);
        let f = factorize_g(&s).unwrap();
        prop_assert!(f.reconstruction_residual <= bound);
        prop_assert!(f.factors().iter().all(|k| k.form_class() == FormClass::L));
        prop_assert!(f.d.windows(2).all(|w| w[0].abs() >= w[1].abs() - 1e-12));
        let f0 = factorize_g0(s.matrix(), 1e-10).unwrap();
        prop_assert!(f0.reconstruction_residual <= bound);
        prop_assert!(frobenius(&(f0.reconstruct() - s.matrix())) <= bound);
    }

    #[test]
    fn hamiltonian_round_trip(seed: u64, n in 1usize..=5, norm in 0.01f64..3.0) {
        let k = Generator::new(common::physical_generator(&mut common::rng(seed), n, norm), 1e-10).unwrap();
        let h = effective_hamiltonian(&k).unwrap();
        let back = generator_from_hamiltonian(&h, 1e-10).unwrap();
        prop_assert!(frobenius(&(back.matrix() - k.matrix())) <= 1e-15 * norm.max(1.0));
    }

    #[test]
    fn flow_is_a_one_parameter_group(seed: u64, n in 1usize..=4, s in -1.0f64..1.0, t in -1.0f64..1.0) {
        let k = Generator::new(common::physical_generator(&mut common::rng(seed), n, 0.8), 1e-10).unwrap();
        let lhs = scattering_at_time(&k, s + t).unwrap();
        let rhs = scattering_at_time(&k, s).unwrap().into_matrix() * scattering_at_time(&k, t).unwrap().into_matrix();
        prop_assert!(frobenius(&(lhs.matrix() - rhs)) <= 1e-12);
    }

    #[test]
    fn json_round_trip_is_exact(seed: u64, n in 1usize..=4, norm in 0.01f64..5.0) {
        let s = random_s(seed, n, norm);
        let text = to_json(&MatrixDoc::from_matrix(s.matrix())).unwrap();
        prop_assert_eq!(&parse_matrix(&text).unwrap(), s.matrix());
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn beam_splitters_are_exact_in_fock_space(phi in -3.0f64..3.0) {
        let s = elements::beam_splitter(phi);
        let k = hamiltonian_log(&s, 1e-10).unwrap().generator().unwrap().clone();
        let r = heisenberg_check(&k, &FockSpace::new(2, 5).unwrap(), 3).unwrap();
        prop_assert!(r.residual <= 1e-10, "{}", r.residual);
        prop_assert!(r.unitarity_residual <= 1e-10);
    }
}
