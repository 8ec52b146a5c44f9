use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use vvcode::diophantine::{best_approx_denominators, dist_to_int, find_shift, frac, Side};
use vvcode::{Profile, SourceModel};

/// Every `q` whose `‖q x‖` beats all smaller denominators.
fn brute_force(x: f64, q_max: u64) -> Vec<u64> {
    let mut best = f64::INFINITY;
    let mut out = Vec::new();
    for q in 1..=q_max {
        let e = dist_to_int(q as f64 * x);
        if e < best {
            best = e;
            out.push(q);
        }
    }
    out
}

#[test]
fn best_approximations_match_brute_force() {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    for _ in 0..20 {
        let x: f64 = rng.gen_range(0.01..5.0);
        let seq = best_approx_denominators(x, 10_000).unwrap();
        assert_eq!(seq.denominators(), brute_force(x, 10_000), "x = {x}");
    }
}

#[test]
fn consecutive_approximations_alternate_sides() {
    let x = -(0.6f64).log2();
    let seq = best_approx_denominators(x, 100_000).unwrap();
    let signed = |q: u64| {
        let v = q as f64 * x;
        v - v.round()
    };
    for w in seq.denominators().windows(2) {
        if w[0] == 1 {
            continue;
        }
        let (a, b) = (signed(w[0]), signed(w[1]));
        assert!(a * b < 0.0, "q = {} and {} on the same side", w[0], w[1]);
    }
}

#[test]
fn shifts_reach_the_band() {
    let model = SourceModel::new(vec![0.4, 0.6], 2).unwrap();
    let x = -(0.6f64).log2();
    let ts = best_approx_denominators(x, 1_000_000).unwrap().usable();
    assert!(ts.len() >= 6);
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    for &t in &ts[..6] {
        for _ in 0..100 {
            let k = Profile::new(vec![rng.gen_range(0..500), rng.gen_range(0..500)]);
            let f = |s: u64| frac(model.linear_form(&k.shift_last(s as u32)).unwrap());
            let low = find_shift(&model, &k, t, Side::Low).unwrap();
            assert!(low < t && f(low) <= 2.0 / t as f64 + 1e-12);
            let high = find_shift(&model, &k, t, Side::High).unwrap();
            assert!(high < t && 1.0 - f(high) <= 2.0 / t as f64 + 1e-12);
        }
    }
}

#[test]
fn integral_input_is_degenerate() {
    assert!(best_approx_denominators(3.0, 100).is_err());
}
