use std::collections::BTreeSet;

use factrel_core::gen::{random_ufr, random_vlfr, GenConfig};
use factrel_core::grammar::{
    beta, beta_inv, check_isomorphism, classify, ecfg_to_regex, language_upto, languages_upto,
    regex_language_upto, to_cnf, to_plain_cfg, trim, DEFAULT_LENGTH_CAP,
};
use factrel_core::ufr::{evaluate, evaluate_all, Ufr};
use factrel_core::value::words_of;
use factrel_core::{Discipline, Limits, Value, Word};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn ufr(seed: u64) -> Ufr {
    random_ufr(&mut ChaCha8Rng::seed_from_u64(seed), &GenConfig::default())
}

fn lim() -> Limits {
    Limits::default()
}

fn max_len(f: &Ufr) -> usize {
    f.defs().iter().filter_map(|d| f.arity(&d.name)).max().unwrap_or(0).max(6)
}

/// Words of the language plus single-letter mutations of them.
fn probes(lang: &BTreeSet<Word>, seed: u64) -> Vec<Word> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let letters = ["0", "1", "2", "3"].map(Value::new);
    let mut out: Vec<Word> = lang.iter().cloned().collect();
    for w in lang.iter().take(30) {
        let mut m = w.clone();
        if !m.is_empty() {
            let i = rng.random_range(0..m.len());
            m[i] = letters[rng.random_range(0..letters.len())];
        }
        out.push(m.clone());
        m.push(letters[0]);
        out.push(m);
    }
    out
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn beta_preserves_size_and_language(seed in any::<u64>()) {
        let f = ufr(seed);
        let g = beta(&f);
        prop_assert_eq!(g.size(), f.size());
        let langs = languages_upto(&g, max_len(&f), &lim()).unwrap();
        let rels = evaluate_all(&f, &lim()).unwrap();
        for (d, rel) in f.defs().iter().zip(&rels) {
            prop_assert_eq!(&langs[&d.name], &words_of(rel));
        }
    }

    #[test]
    fn beta_round_trips(seed in any::<u64>()) {
        let f = ufr(seed);
        let g = beta(&f);
        prop_assert_eq!(&beta_inv(&g).unwrap(), &f);
        let h = check_isomorphism(&f, &g).unwrap();
        prop_assert!(h.iter().all(|(a, b)| a == b));
    }

    #[test]
    fn normal_forms_preserve_language(seed in any::<u64>()) {
        let f = ufr(seed);
        let g = beta(&f);
        let len = max_len(&f);
        let lang = language_upto(&g, len, &lim()).unwrap();
        prop_assert_eq!(&language_upto(&trim(&g), len, &lim()).unwrap(), &lang);
        let plain = to_plain_cfg(&g).unwrap();
        prop_assert_eq!(&language_upto(&plain.to_ecfg(), len, &lim()).unwrap(), &lang);
        let cnf = to_cnf(&plain);
        for w in probes(&lang, seed) {
            prop_assert_eq!(cnf.accepts(&w), lang.contains(&w), "{:?}", w);
        }
        prop_assert_eq!(&language_upto(&cnf.to_ecfg(), len, &lim()).unwrap(), &lang);
        let re = ecfg_to_regex(&g).unwrap();
        prop_assert_eq!(&regex_language_upto(&re, len, &lim()).unwrap(), &lang);
    }

    #[test]
    fn classification_follows_discipline(seed in any::<u64>()) {
        let f = ufr(seed);
        let c = classify(&beta(&f), DEFAULT_LENGTH_CAP);
        prop_assert!(!c.recursive && c.star_free && c.uniform_length);

        let v = random_vlfr(&mut ChaCha8Rng::seed_from_u64(seed), &GenConfig::default());
        let c = classify(&beta(&v), DEFAULT_LENGTH_CAP);
        let lengths: BTreeSet<usize> = evaluate(&v, None, &lim())
            .unwrap()
            .iter()
            .map(|t| t.arity())
            .collect();
        prop_assert_eq!(c.uniform_length, lengths.len() <= 1);
        if v.discipline() == Discipline::Uniform {
            prop_assert!(c.uniform_length);
        }
    }
}
