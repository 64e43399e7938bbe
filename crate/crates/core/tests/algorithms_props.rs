use std::collections::BTreeMap;

use factrel_core::algorithms::{
    containment, count_tuples, enumerate_tuples, enumeration_less, equivalence, membership_cyk,
    MembershipIndex, Semantics, ValueOrder,
};
use factrel_core::automata::rightlinear_from_acyclic_nfa;
use factrel_core::gen::{random_acyclic_nfa, random_ufr, random_vlfr, GenConfig};
use factrel_core::ufr::{evaluate, evaluate_bag, Ufr};
use factrel_core::{Limits, Tuple, Value};
use num_bigint::BigUint;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn lim() -> Limits {
    Limits::default()
}

fn ufr(seed: u64) -> Ufr {
    random_ufr(&mut ChaCha8Rng::seed_from_u64(seed), &GenConfig::default())
}

fn right_linear(seed: u64) -> Ufr {
    let a = random_acyclic_nfa(&mut ChaCha8Rng::seed_from_u64(seed), 5, 2);
    rightlinear_from_acyclic_nfa(&a).unwrap()
}

/// Bag of tuples by counting derivations directly.
fn bag(f: &Ufr) -> BTreeMap<Tuple, BigUint> {
    evaluate_bag(f, &lim()).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn membership_matches_evaluation(seed in any::<u64>()) {
        let f = ufr(seed);
        let rel = evaluate(&f, None, &lim()).unwrap();
        let index = MembershipIndex::new(&f);
        let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x5eed);
        let tuples: Vec<&Tuple> = rel.iter().collect();
        let letters = ["0", "1", "2", "3"].map(Value::new);
        for i in 0..200 {
            let base = tuples[rng.random_range(0..tuples.len())];
            let probe = if i % 2 == 0 {
                base.clone()
            } else {
                let mut vs = base.values().to_vec();
                match rng.random_range(0..3) {
                    0 if !vs.is_empty() => {
                        let j = rng.random_range(0..vs.len());
                        vs[j] = letters[rng.random_range(0..letters.len())];
                    }
                    1 => vs.push(letters[0]),
                    _ => {
                        vs.pop();
                    }
                }
                Tuple::new(vs)
            };
            prop_assert_eq!(index.contains(&probe), rel.contains(&probe));
        }
        for t in tuples.iter().take(5) {
            prop_assert!(membership_cyk(&f, t));
        }
    }

    #[test]
    fn counting_matches_evaluation(seed in any::<u64>()) {
        for f in [ufr(seed), right_linear(seed)] {
            let n = evaluate(&f, None, &lim()).unwrap().len();
            prop_assert_eq!(count_tuples(&f, false, &lim()).unwrap().count, BigUint::from(n));
        }
    }

    #[test]
    fn enumeration_is_sorted_and_complete(seed in any::<u64>()) {
        let v = random_vlfr(&mut ChaCha8Rng::seed_from_u64(seed), &GenConfig::default());
        for f in [ufr(seed), right_linear(seed), v] {
            for order in [ValueOrder::FirstAppearance, ValueOrder::Text] {
                let out: Vec<Tuple> = enumerate_tuples(&f, order, &lim()).unwrap().collect();
                for w in out.windows(2) {
                    prop_assert!(enumeration_less(&f, order, &w[0], &w[1]));
                }
                let rel = evaluate(&f, None, &lim()).unwrap();
                prop_assert_eq!(out.len(), rel.len());
                prop_assert!(out.iter().all(|t| rel.contains(t)));
            }
        }
    }

    #[test]
    fn equivalence_agrees_with_brute_force(s1 in any::<u64>(), s2 in any::<u64>()) {
        let pairs = [
            (right_linear(s1), right_linear(s2)),
            (ufr(s1), ufr(s2)),
            (right_linear(s1), right_linear(s1)),
        ];
        for (f, g) in &pairs {
            for mode in [Semantics::Set, Semantics::Multiset] {
                let fg = equivalence(f, g, mode, &lim()).unwrap().holds;
                let gf = equivalence(g, f, mode, &lim()).unwrap().holds;
                prop_assert_eq!(fg, gf);
                prop_assert!(equivalence(f, f, mode, &lim()).unwrap().holds);
                let expected = match mode {
                    Semantics::Set => evaluate(f, None, &lim()).unwrap().same_tuples(&evaluate(g, None, &lim()).unwrap()),
                    Semantics::Multiset => bag(f) == bag(g),
                };
                prop_assert_eq!(fg, expected);
            }
            let (rf, rg) = (evaluate(f, None, &lim()).unwrap(), evaluate(g, None, &lim()).unwrap());
            prop_assert_eq!(
                containment(f, g, Semantics::Set, &lim()).unwrap().holds,
                rf.tuples().is_subset(rg.tuples())
            );
        }
    }
}
