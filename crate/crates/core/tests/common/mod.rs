#![allow(dead_code)]

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use vvcode::codebook::Provenance;
use vvcode::vv::prefix_code::{canonical_codewords, huffman_codewords};
use vvcode::{Alphabet, CodeBook, CodeKind, SourceModel, Word};

/// Random probabilities bounded away from zero.
pub fn random_probs(rng: &mut impl Rng, m: usize) -> Vec<f64> {
    let w: Vec<f64> = (0..m).map(|_| rng.gen_range(0.05..1.0)).collect();
    let s: f64 = w.iter().sum();
    let mut p: Vec<f64> = w.iter().map(|x| x / s).collect();
    let head: f64 = p[..m - 1].iter().sum();
    p[m - 1] = 1.0 - head;
    p
}

/// A complete prefix-free word set: a random m-ary parse tree.
pub fn random_tree(rng: &mut impl Rng, m: usize, depth: usize, splits: usize) -> Vec<Word> {
    let mut leaves = vec![Word::empty()];
    for _ in 0..splits {
        let open: Vec<usize> = (0..leaves.len()).filter(|&i| leaves[i].len() < depth).collect();
        if open.is_empty() {
            break;
        }
        let w = leaves.swap_remove(open[rng.gen_range(0..open.len())]);
        for s in 0..m as u8 {
            let mut c = w.clone();
            c.push(s);
            leaves.push(c);
        }
    }
    leaves.sort();
    leaves
}

fn word_prob(p: &[f64], w: &Word) -> f64 {
    w.symbols().iter().map(|&s| p[s as usize]).product()
}

/// A random complete code with Kraft-feasible lengths: Huffman, or Shannon
/// lengths padded by 0 or 1 digit.
pub fn random_code(seed: u64, max_m: usize, depth: usize) -> CodeBook {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let m = rng.gen_range(2..=max_m);
    let n = rng.gen_range(2..=3u32);
    let probs = random_probs(&mut rng, m);
    let splits = rng.gen_range(1..=12);
    let words = random_tree(&mut rng, m, depth, splits);
    let wp: Vec<f64> = words.iter().map(|w| word_prob(&probs, w)).collect();
    let codes = if rng.gen_bool(0.5) {
        huffman_codewords(&wp, n).unwrap().1
    } else {
        let lens: Vec<u32> = wp
            .iter()
            .map(|p| {
                let ideal = (-p.ln() / (n as f64).ln() - 1e-12).ceil().max(1.0) as u32;
                ideal + rng.gen_range(0..=1)
            })
            .collect();
        canonical_codewords(&lens, n).unwrap()
    };
    let model = SourceModel::new(probs, n).unwrap();
    CodeBook::from_words(
        model,
        Alphabet::letters(m),
        CodeKind::Vv,
        words.into_iter().zip(codes).collect(),
        Provenance::default(),
    )
    .unwrap()
}

/// `(N̄, R)` straight from the entries.
pub fn direct_redundancy(book: &CodeBook) -> (f64, f64) {
    let n = book.arity() as f64;
    let e = book.entries().unwrap();
    let nbar: f64 = e.iter().map(|e| e.probability * e.word.len() as f64).sum();
    let excess: f64 = e
        .iter()
        .map(|e| e.probability * (e.codeword.len() as f64 + e.probability.ln() / n.ln()))
        .sum();
    (nbar, excess / nbar)
}

/// True if no word of the list is a proper prefix of another.
pub fn prefix_free<T: PartialEq>(items: &[&[T]]) -> bool {
    for (i, a) in items.iter().enumerate() {
        for (j, b) in items.iter().enumerate() {
            if i != j && b.len() >= a.len() && b[..a.len()] == a[..] {
                return false;
            }
        }
    }
    true
}
