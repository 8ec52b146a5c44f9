mod common;

use common::{direct_redundancy, random_code};
use proptest::prelude::*;
use vvcode::analysis::{least_squares_slope, metrics};
use vvcode::vf::construct_vf;
use vvcode::vv::{construct_vv, Choice, VvParams};
use vvcode::{SourceModel, Word};

fn worked_example() -> vvcode::CodeBook {
    let model = SourceModel::parse(&["0.4", "0.6"], 2).unwrap();
    let w = |l: &[&str]| l.iter().map(|s| Word::from_letters(s).unwrap()).collect::<Vec<_>>();
    let params = VvParams {
        explicit: Some((
            w(&["a", "baa", "bab", "bba", "bbb"]),
            w(&["bba", "bbb", "ab", "ba", "aaa", "aab"]),
        )),
        ..VvParams::default()
    };
    construct_vv(&model, &params).unwrap().book
}

#[test]
fn identity_on_worked_example() {
    let m = metrics(&worked_example()).unwrap();
    assert!(m.identity_residual <= 1e-9);
}

#[test]
fn identity_on_random_codes() {
    for seed in 0..100 {
        let book = random_code(seed, 4, 8);
        let m = metrics(&book).unwrap();
        let (nbar, r) = direct_redundancy(&book);
        assert!((m.avg_delay - nbar).abs() < 1e-12);
        assert!((m.redundancy - r).abs() < 1e-12);
        assert!(m.identity_residual <= 1e-9, "seed {seed}: {}", m.identity_residual);
        assert!(m.entropy_residual <= 1e-9);
    }
}

fn check_bounds(book: &vvcode::CodeBook) -> Result<(), TestCaseError> {
    let m = metrics(book).unwrap();
    let slack = 1e-12;
    prop_assert!(m.theorem1_lower <= m.redundancy + slack, "{} > {}", m.theorem1_lower, m.redundancy);
    prop_assert!(m.corollary_lower <= m.redundancy + slack);
    let all_small = m.excess.iter().all(|e| e.eps.abs() <= 1.0);
    prop_assert_eq!(all_small, m.theorem1_upper.is_some());
    if let Some(u) = m.theorem1_upper {
        prop_assert!(m.redundancy <= u + slack, "{} > {}", m.redundancy, u);
    }
    Ok(())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn sandwich_on_random_codes(seed in any::<u64>()) {
        check_bounds(&random_code(seed, 4, 8))?;
    }

    #[test]
    fn sandwich_on_window_codes(p in 0.05f64..0.95, l in 2u32..10) {
        let model = SourceModel::new(vec![p, 1.0 - p], 2).unwrap();
        check_bounds(&construct_vf(&model, l).unwrap())?;
    }
}

#[test]
fn sandwich_on_constructed_codes() {
    let models: [&[&str]; 5] = [
        &["0.4", "0.6"],
        &["0.3", "0.7"],
        &["0.2", "0.3", "0.5"],
        &["1/3", "2/3"],
        &["0.25", "0.25", "0.5"],
    ];
    for probs in models {
        let model = SourceModel::parse(probs, 2).unwrap();
        for t in [Choice::Auto, Choice::Fixed(3)] {
            let params = VvParams { t, ..VvParams::default() };
            let Ok(code) = construct_vv(&model, &params) else { continue };
            check_bounds(&code.book).unwrap();
        }
    }
}

#[test]
fn slope_of_exact_power_law() {
    let pts: Vec<(f64, f64)> = (1..6).map(|i| (i as f64, 3.0 - 1.5 * i as f64)).collect();
    assert!((least_squares_slope(&pts).unwrap() + 1.5).abs() < 1e-12);
    assert_eq!(least_squares_slope(&[(1.0, 1.0)]), None);
}
