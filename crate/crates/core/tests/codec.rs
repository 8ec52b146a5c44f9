mod common;

use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use vvcode::codec::{
    decode, encode, parse_stream, random_message, render_stream, sync_error_experiment, Decoded,
    Decoder, Encoder,
};
use vvcode::vf::{construct_block, construct_vf};
use vvcode::vv::{construct_vv, VvParams};
use vvcode::{CodeBook, Error, SourceModel, Word};

fn worked_example() -> CodeBook {
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

fn books() -> Vec<CodeBook> {
    let model = SourceModel::parse(&["0.2", "0.3", "0.5"], 2).unwrap();
    vec![
        construct_vv(&model, &VvParams::default()).unwrap().book,
        construct_vf(&model, 6).unwrap(),
        construct_block(3, 2, 3, 5).unwrap(),
    ]
}

#[test]
fn long_messages_round_trip() {
    for (i, book) in books().iter().enumerate() {
        let mut rng = ChaCha8Rng::seed_from_u64(i as u64);
        let msg = random_message(book, 100_000, &mut rng);
        let mut enc = Encoder::new(book).unwrap();
        let mut digits = Vec::new();
        for &s in &msg {
            enc.push(s, &mut digits).unwrap();
            assert!(enc.pending().len() as u64 <= book.max_word_length());
        }
        let pad = enc.finish(false, &mut digits).unwrap();
        assert!(enc.max_buffered() as u64 <= book.max_word_length());
        let back = decode(book, &digits, pad).unwrap();
        assert_eq!(back, msg, "{:?}", book.kind());

        let text = render_stream(&vvcode::codec::Encoded { digits, pad });
        let parsed = parse_stream(&text, book.arity()).unwrap();
        assert_eq!(decode(book, &parsed.digits, parsed.pad).unwrap(), msg);
    }
}

proptest! {
    #[test]
    fn random_codes_round_trip(seed in any::<u64>(), len in 0usize..400) {
        let book = common::random_code(seed, 4, 6);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let msg = random_message(&book, len, &mut rng);
        let enc = encode(&book, &msg, false).unwrap();
        prop_assert_eq!(decode(&book, &enc.digits, enc.pad).unwrap(), msg);
    }
}

#[test]
fn strict_mode_rejects_partial_words() {
    let book = worked_example();
    assert!(matches!(encode(&book, &[1, 1], true), Err(Error::Input(_))));
    let enc = encode(&book, &[1, 1], false).unwrap();
    assert_eq!(enc.pad, 1);
    assert!(encode(&book, &[], true).unwrap().digits.is_empty());
}

#[test]
fn strict_block_decoder_fails_only_on_unmapped_blocks() {
    let book = construct_vf(&SourceModel::new(vec![0.4, 0.6], 2).unwrap(), 3).unwrap();
    // five words use 000..100; 101, 110 and 111 are unmapped
    let mut dec = Decoder::new(&book, true).unwrap();
    for d in [0, 0, 1, 1, 0] {
        assert!(dec.push(d).is_ok());
    }
    assert!(matches!(dec.push(1), Err(Error::Decode(_))));

    let mut lenient = Decoder::new(&book, false).unwrap();
    let got: Vec<_> = [1, 1, 1, 0, 0, 0]
        .iter()
        .filter_map(|&d| lenient.push(d).unwrap())
        .collect();
    assert_eq!(got[0], Decoded::Erasure);
    assert!(matches!(got[1], Decoded::Word(_)));
}

#[test]
fn one_flipped_digit_damages_one_fixed_length_word() {
    let book = construct_vf(&SourceModel::new(vec![0.4, 0.6], 2).unwrap(), 3).unwrap();
    let report = sync_error_experiment(&book, 10_000, 1000, 7).unwrap();
    assert_eq!(report.trials.len(), 1000);
    assert!(report.trials.iter().all(|t| t.affected_words == 1));
    assert_eq!(report.max_affected_words, 1);
}

#[test]
fn sync_experiment_is_reproducible() {
    let book = worked_example();
    let a = sync_error_experiment(&book, 1000, 200, 3).unwrap();
    let b = sync_error_experiment(&book, 1000, 200, 3).unwrap();
    assert_eq!(a, b);
    assert!(a.trials.iter().all(|t| t.affected_words >= 1));
    assert!(a.multi_word_fraction > 0.0 && a.multi_word_fraction <= 1.0);
    assert!(sync_error_experiment(&book, 10, 5, 0).is_err());
}
