use num_bigint::BigUint;
use proptest::prelude::*;

use popproto::dioph::{decompose_solution, hilbert_basis, DiophSystem};
use popproto::model::format::{parse_protocol, protocol_to_string};
use popproto::model::normalize_protocol;
use popproto::pow2::ScaledPow2;
use popproto::reach::{complement_of_upward, configurations_of_size, covers_some, ideal_member};
use popproto::{Configuration, Limits, Protocol, Transition};

fn system() -> impl Strategy<Value = (usize, Vec<Vec<i64>>)> {
    (1..=3usize).prop_flat_map(|vars| (Just(vars), prop::collection::vec(prop::collection::vec(-2..=2i64, vars), 1..=2)))
}

fn protocol() -> impl Strategy<Value = Protocol> {
    (1..=4usize)
        .prop_flat_map(|n| {
            (
                Just(n),
                prop::collection::vec((0..n, 0..n, 0..n, 0..n), 0..8),
                prop::collection::vec(any::<bool>(), n),
                0..n,
            )
        })
        .prop_map(|(n, ts, outputs, input)| {
            let ts = ts.into_iter().map(|(a, b, c, d)| Transition::new(a, b, c, d)).collect();
            let names = (0..n).map(|q| format!("s{q}")).collect();
            normalize_protocol(&Protocol::leaderless(names, ts, input, outputs).unwrap(), false).unwrap().protocol
        })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn solutions_decompose_over_the_basis((vars, rows) in system(), y in prop::collection::vec(0..6u64, 3)) {
        let sys = DiophSystem::new(vars, rows).unwrap();
        let y = &y[..vars];
        prop_assume!(sys.is_solution(y));
        let basis = hilbert_basis(&sys, &Limits::default()).unwrap();
        let mult = decompose_solution(&sys, y, &basis).unwrap();
        let mut sum = vec![0u64; vars];
        for (h, k) in basis.iter().zip(&mult) {
            for (s, v) in sum.iter_mut().zip(h) {
                *s += k * v;
            }
        }
        prop_assert_eq!(sum, y.to_vec());
    }

    #[test]
    fn basis_elements_are_solutions((vars, rows) in system()) {
        let sys = DiophSystem::new(vars, rows).unwrap();
        for h in hilbert_basis(&sys, &Limits::default()).unwrap() {
            prop_assert!(sys.is_solution(&h) && h.iter().any(|&v| v > 0));
        }
    }

    #[test]
    fn protocol_files_round_trip(p in protocol()) {
        prop_assert_eq!(parse_protocol(&protocol_to_string(&p)).unwrap(), p);
    }

    #[test]
    fn complement_matches_upward_closure(basis in prop::collection::vec(prop::collection::vec(0..3u64, 3), 0..4)) {
        let basis: Vec<Configuration> = basis.iter().map(|m| Configuration::from_small(m)).collect();
        let ideals = complement_of_upward(3, &basis, &Limits::default()).unwrap();
        for size in 2..=5 {
            for c in configurations_of_size(3, size) {
                let inside = ideals.iter().any(|i| ideal_member(&c, i));
                prop_assert_eq!(inside, !covers_some(&c, &basis), "{:?}", c);
            }
        }
    }

    #[test]
    fn scaled_powers_compare_exactly(m in 1..5000u64, e in 0..40u64, k in 0..60u64) {
        let x = ScaledPow2::pow2(BigUint::from(e)).times(&BigUint::from(m));
        let exact = BigUint::from(m) << e;
        prop_assert_eq!(x.at_most_pow2(&BigUint::from(k)), exact <= BigUint::from(1u32) << k);
        prop_assert_eq!(x.to_biguint(128).unwrap(), exact);
    }
}
