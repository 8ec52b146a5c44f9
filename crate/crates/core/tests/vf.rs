mod common;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use vvcode::analysis::{metrics, vf_redundancy_bound};
use vvcode::codec::{random_message, Encoder};
use vvcode::vf::{block_redundancy, construct_block, construct_vf, find_block_parameters};
use vvcode::SourceModel;

#[test]
fn window_codes_for_all_lengths() {
    for probs in [vec![0.4, 0.6], vec![0.2, 0.3, 0.5]] {
        let model = SourceModel::new(probs.clone(), 2).unwrap();
        let p_min = probs.iter().cloned().fold(1.0, f64::min);
        let d_max = -p_min.log2();
        for l in 2..=16u32 {
            let book = construct_vf(&model, l).unwrap();
            let e = book.entries().unwrap();
            let cap = 2f64.powi(l as i32);
            assert!(e.len() as f64 <= cap);
            assert!(e.iter().all(|e| e.codeword.len() == l as usize));
            assert_eq!(book.codewords_distinct(), Some(true));
            let words: Vec<&[u8]> = e.iter().map(|e| e.word.symbols()).collect();
            assert!(common::prefix_free(&words));
            let total: f64 = e.iter().map(|e| e.probability).sum();
            assert!((total - 1.0).abs() <= 1e-9);

            let m = metrics(&book).unwrap();
            assert!(m.redundancy <= d_max / m.avg_delay + 1e-12);
            assert!((vf_redundancy_bound(&book).unwrap() - d_max / m.avg_delay).abs() < 1e-12);
            if l as f64 >= d_max {
                for e in e {
                    assert!(e.probability >= 1.0 / cap - 1e-12);
                    assert!(e.probability < 1.0 / (cap * p_min));
                }
            }
        }
    }
}

#[test]
fn greedy_parse_oracle_at_three() {
    // grow a word until its ideal length enters (L - d_max, L]
    let (p, l) = ([0.4f64, 0.6], 3.0);
    let d_max = -p[0].log2();
    let mut open = vec![(String::new(), 1.0f64)];
    let mut done = Vec::new();
    while let Some((w, q)) = open.pop() {
        if !w.is_empty() && -q.log2() > l - d_max {
            done.push(w);
            continue;
        }
        for (c, pc) in ['a', 'b'].iter().zip(p) {
            open.push((format!("{w}{c}"), q * pc));
        }
    }
    done.sort();
    let model = SourceModel::new(p.to_vec(), 2).unwrap();
    let book = construct_vf(&model, 3).unwrap();
    let got: Vec<String> = book.entries().unwrap().iter().map(|e| e.word.to_letters()).collect();
    assert_eq!(got, done);
    assert!((metrics(&book).unwrap().avg_delay - 2.36).abs() <= 1e-9);
}

#[test]
fn parse_never_skips_the_window() {
    let model = SourceModel::new(vec![0.2, 0.3, 0.5], 2).unwrap();
    let d_max = -(0.2f64).log2();
    for l in [3u32, 5, 8] {
        let book = construct_vf(&model, l).unwrap();
        let entries = book.entries().unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(l as u64);
        let msg = random_message(&book, 10_000, &mut rng);
        let mut enc = Encoder::new(&book).unwrap();
        let mut out = Vec::new();
        let mut h = 0.0f64;
        for &s in &msg {
            let before = h;
            h += -model.probs()[s as usize].log2();
            assert!(h - before <= d_max + 1e-12);
            if let Some(i) = enc.push(s, &mut out).unwrap() {
                let f = -entries[i].probability.log2();
                assert!((f - h).abs() < 1e-9);
                assert!(f > l as f64 - d_max - 1e-9 && f <= l as f64 + 1e-9);
                h = 0.0;
            }
        }
    }
}

#[test]
fn block_pairs_meet_the_quadratic_bound() {
    let pairs = find_block_parameters(3, 2, 3).unwrap();
    // oracle: scan X and keep pairs with L - 1/X ≤ X log2 3 ≤ L
    let x = 3f64.log2();
    let oracle: Vec<(u64, u64)> = (1..100u64)
        .filter_map(|bx| {
            let l = (bx as f64 * x).ceil() as u64;
            (l as f64 - bx as f64 * x <= 1.0 / bx as f64).then_some((bx, l))
        })
        .take(3)
        .collect();
    assert_eq!(pairs.iter().map(|p| (p.x, p.l)).collect::<Vec<_>>(), oracle);
    for p in pairs {
        let r = block_redundancy(3, 2, p.x, p.l);
        assert!(r >= 0.0 && r * (p.x * p.x) as f64 <= 1.0 + 1e-9);
        let book = construct_block(3, 2, p.x as u32, p.l as u32).unwrap();
        let m = metrics(&book).unwrap();
        assert!((m.redundancy - r).abs() < 1e-9);
    }
}

#[test]
fn binary_blocks_have_no_redundancy() {
    let book = construct_block(2, 2, 4, 4).unwrap();
    assert_eq!(book.entries().unwrap().len(), 16);
    assert!(metrics(&book).unwrap().redundancy.abs() < 1e-12);
}
