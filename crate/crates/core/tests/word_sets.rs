mod common;

use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use vvcode::word_sets::{
    build_word_set, f_set, lattice_metrics, split_into_f_factors, wedge_words, LatticeOptions,
    ProfileSet, Rule, WordSetOptions,
};
use vvcode::{SourceModel, Word};

fn model_strategy() -> impl Strategy<Value = SourceModel> {
    (2usize..=4, 2u32..=3, any::<u64>()).prop_map(|(m, n, seed)| {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        SourceModel::new(common::random_probs(&mut rng, m), n).unwrap()
    })
}

fn word_strategy(m: usize) -> impl Strategy<Value = Word> {
    proptest::collection::vec(0..m as u8, 0..12).prop_map(Word::new)
}

fn all_words(m: usize, r: usize) -> Vec<Word> {
    let mut out = vec![Word::empty()];
    for _ in 0..r {
        out = out
            .iter()
            .flat_map(|w| (0..m as u8).map(move |s| {
                let mut c = w.clone();
                c.push(s);
                c
            }))
            .collect();
    }
    out
}

proptest! {
    #[test]
    fn linear_form_is_additive(
        model in model_strategy(),
        a in word_strategy(4),
        b in word_strategy(4),
    ) {
        let m = model.alphabet_size();
        let clip = |w: &Word| Word::new(w.symbols().iter().map(|&s| s % m as u8).collect());
        let (a, b) = (clip(&a), clip(&b));
        let fa = model.linear_form(&a.profile(m)).unwrap();
        let fb = model.linear_form(&b.profile(m)).unwrap();
        let fab = model.linear_form(&a.concat(&b).profile(m)).unwrap();
        prop_assert!((fab - fa - fb).abs() <= 1e-9);

        let p = model.word_probability(&a).unwrap();
        let via_f = (model.arity() as f64).powf(-fa);
        prop_assert!((p - via_f).abs() <= 1e-9 * p);
    }

    #[test]
    fn words_of_one_length_sum_to_one(model in model_strategy(), r in 0usize..=6) {
        let m = model.alphabet_size();
        prop_assume!(m.pow(r as u32) <= 5000);
        let total: f64 = all_words(m, r).iter().map(|w| model.word_probability(w).unwrap()).sum();
        prop_assert!((total - 1.0).abs() <= 1e-9);
    }

    #[test]
    fn threshold_sets_are_complete_and_prefix_free(
        model in model_strategy(),
        t in 2u64..6,
        high in any::<bool>(),
    ) {
        let theta = 2.0 / t as f64;
        let rule = if high { Rule::ThresholdHigh(theta) } else { Rule::ThresholdLow(theta) };
        let pset = ProfileSet::new(rule, t * t).unwrap();
        let set = build_word_set(&model, &pset, &WordSetOptions::default()).unwrap();
        let Some(words) = set.words() else { return Ok(()) };
        prop_assume!(words.len() <= 10_000);
        let table = set.table().unwrap();
        // words cut at the cap carry the live mass
        let explicit: f64 = words.iter().map(|w| model.word_probability(w).unwrap()).sum();
        prop_assert!((explicit + table.live_mass - 1.0).abs() <= 1e-9);
        let slices: Vec<&[u8]> = words.iter().map(|w| w.symbols()).collect();
        prop_assert!(common::prefix_free(&slices));
        let lengths: f64 = words
            .iter()
            .map(|w| model.word_probability(w).unwrap() * w.len() as f64)
            .sum();
        prop_assert!((lengths - table.weighted_length).abs() <= 1e-9);
        prop_assert!((explicit - table.total_prob).abs() <= 1e-9);
    }

    #[test]
    fn wedge_laws(seeds in proptest::array::uniform3(any::<u64>())) {
        let sets: Vec<Vec<Word>> = seeds
            .iter()
            .map(|&s| {
                let mut rng = ChaCha8Rng::seed_from_u64(s);
                let splits = rng.gen_range(0..8);
                common::random_tree(&mut rng, 2, 6, splits)
            })
            .collect();
        let (a, b, c) = (&sets[0], &sets[1], &sets[2]);
        prop_assert_eq!(wedge_words(a, b), wedge_words(b, a));
        prop_assert_eq!(wedge_words(a, a), a.clone());
        prop_assert_eq!(
            wedge_words(&wedge_words(a, b), c),
            wedge_words(a, &wedge_words(b, c))
        );
        // the wedge of complete sets is complete
        let model = SourceModel::new(vec![0.3, 0.7], 2).unwrap();
        let total: f64 = wedge_words(a, b).iter().map(|w| model.word_probability(w).unwrap()).sum();
        prop_assert!((total - 1.0).abs() <= 1e-9);
    }
}

/// Continuations of every proper prefix carry at most probability one.
#[test]
fn continuation_mass_is_at_most_one() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for _ in 0..50 {
        let m = rng.gen_range(2..=3);
        let probs = common::random_probs(&mut rng, m);
        let model = SourceModel::new(probs, 2).unwrap();
        let splits = rng.gen_range(1..10);
        let set = common::random_tree(&mut rng, m, 7, splits);
        for w in &set {
            for cut in 0..w.len() {
                let prefix = &w.symbols()[..cut];
                let mass: f64 = set
                    .iter()
                    .filter(|a| a.len() > cut && &a.symbols()[..cut] == prefix)
                    .map(|a| model.word_probability(&Word::new(a.symbols()[cut..].to_vec())).unwrap())
                    .sum();
                assert!(mass <= 1.0 + 1e-9);
            }
        }
    }
}

fn random_f_word(rng: &mut ChaCha8Rng, d: u64) -> Word {
    // D letters `a`, each after a run of `b`s
    let mut s = Vec::new();
    for _ in 0..d {
        let run = rng.gen_range(0..4);
        s.extend(std::iter::repeat_n(1, run));
        s.push(0);
    }
    Word::new(s)
}

#[test]
fn f_words_split_uniquely() {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    for _ in 0..100 {
        let d = rng.gen_range(1..=5u64);
        let word = random_f_word(&mut rng, d);
        let mut parts = Vec::new();
        let mut left = d;
        while left > 0 {
            let p = rng.gen_range(1..=left);
            parts.push(p);
            left -= p;
        }
        let factors = split_into_f_factors(&word, &parts, 2).unwrap();
        let mut joined = Word::empty();
        for (f, &p) in factors.iter().zip(&parts) {
            assert_eq!(f.profile(2).t(), p);
            assert_ne!(f.symbols().last(), Some(&1));
            joined = joined.concat(f);
        }
        assert_eq!(joined, word);
    }
    // a trailing `b` is not in F(D)
    assert!(split_into_f_factors(&Word::from_letters("abb").unwrap(), &[1], 2).is_none());
}

#[test]
fn f_sets_have_unit_mass_and_known_length() {
    let model = SourceModel::new(vec![0.4, 0.6], 2).unwrap();
    for d in 1..=3u64 {
        let f = f_set(&model, d, 60).unwrap();
        assert!((f.total_prob - 1.0).abs() <= 1e-6);
        assert!((f.weighted_length - d as f64 / 0.4).abs() <= 1e-4);
    }
}

#[test]
fn lattice_agrees_with_enumeration_on_vf_window() {
    let model = SourceModel::new(vec![0.2, 0.3, 0.5], 2).unwrap();
    let pset = ProfileSet::new(Rule::VfWindow(6), 40).unwrap();
    let set = build_word_set(&model, &pset, &WordSetOptions::default()).unwrap();
    let table = lattice_metrics(&model, &pset, &LatticeOptions::default()).unwrap();
    assert_eq!(table.word_count().unwrap(), set.len().unwrap().into());
    assert!((set.weighted_length(&model) - table.weighted_length).abs() <= 1e-9);
}
