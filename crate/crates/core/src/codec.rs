//! Streaming encoder and decoder for explicit codes, and the single-digit
//! corruption experiment.
//!
//! Digit text uses `0-9A-Z`. When the last input word is incomplete, the
//! encoder pads it with the most probable symbol and appends a trailer line
//! `#pad=<k>` so the decoder can drop the padding again.

use std::collections::{HashMap, HashSet};

use rand::distributions::{Distribution, WeightedIndex};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::codebook::{CodeBook, CodeKind};
use crate::error::{Error, Result};
use crate::vv::prefix_code::{digit_char, parse_digit};

const NONE: u32 = u32::MAX;

/// A trie over sequences of small integers with values at the leaves.
#[derive(Debug, Clone)]
struct Trie {
    arity: usize,
    children: Vec<u32>,
    leaf: Vec<u32>,
}

impl Trie {
    fn new(arity: usize) -> Self {
        Trie {
            arity,
            children: vec![NONE; arity],
            leaf: vec![NONE],
        }
    }

    fn insert(&mut self, key: &[u8], value: u32) {
        let mut node = 0usize;
        for &c in key {
            let slot = node * self.arity + c as usize;
            if self.children[slot] == NONE {
                let id = self.leaf.len() as u32;
                self.children[slot] = id;
                self.children.extend(std::iter::repeat_n(NONE, self.arity));
                self.leaf.push(NONE);
            }
            node = self.children[slot] as usize;
        }
        self.leaf[node] = value;
    }

    fn step(&self, node: u32, c: u8) -> Option<u32> {
        let next = self.children[node as usize * self.arity + c as usize];
        (next != NONE).then_some(next)
    }

    fn value(&self, node: u32) -> Option<u32> {
        let v = self.leaf[node as usize];
        (v != NONE).then_some(v)
    }
}

fn require_codec(book: &CodeBook) -> Result<()> {
    if book.entries().is_none() {
        return Err(Error::Input(
            "code lists profile classes only; encoding needs explicit words".into(),
        ));
    }
    Ok(())
}

/// Incremental parser of an input symbol stream into code words.
#[derive(Debug, Clone)]
pub struct Encoder<'a> {
    book: &'a CodeBook,
    trie: Trie,
    node: u32,
    buffer: Vec<u8>,
    max_buffered: usize,
}

impl<'a> Encoder<'a> {
    pub fn new(book: &'a CodeBook) -> Result<Self> {
        require_codec(book)?;
        let entries = book.entries().unwrap();
        let mut trie = Trie::new(book.model().alphabet_size());
        for (i, e) in entries.iter().enumerate() {
            trie.insert(e.word.symbols(), i as u32);
        }
        Ok(Encoder {
            book,
            trie,
            node: 0,
            buffer: Vec::new(),
            max_buffered: 0,
        })
    }

    /// Feeds one symbol; appends a codeword to `out` when a word completes.
    /// Returns the index of the completed word, if any.
    pub fn push(&mut self, symbol: u8, out: &mut Vec<u8>) -> Result<Option<usize>> {
        let m = self.book.model().alphabet_size();
        if symbol as usize >= m {
            return Err(Error::Input(format!("symbol {symbol} outside alphabet of size {m}")));
        }
        let next = self
            .trie
            .step(self.node, symbol)
            .ok_or_else(|| Error::Input("input does not parse into code words".into()))?;
        self.buffer.push(symbol);
        self.max_buffered = self.max_buffered.max(self.buffer.len());
        match self.trie.value(next) {
            Some(i) => {
                out.extend_from_slice(&self.book.entries().unwrap()[i as usize].codeword);
                self.node = 0;
                self.buffer.clear();
                Ok(Some(i as usize))
            }
            None => {
                self.node = next;
                Ok(None)
            }
        }
    }

    /// Symbols of the unfinished word.
    pub fn pending(&self) -> &[u8] {
        &self.buffer
    }

    /// Largest number of symbols held at once so far.
    pub fn max_buffered(&self) -> usize {
        self.max_buffered
    }

    /// Completes the last word. With `strict`, a partial word is an error;
    /// otherwise it is padded with the most probable symbol. Returns the pad length.
    pub fn finish(&mut self, strict: bool, out: &mut Vec<u8>) -> Result<usize> {
        if self.buffer.is_empty() {
            return Ok(0);
        }
        if strict {
            return Err(Error::Input(format!(
                "input ends inside a word ({} pending symbols)",
                self.buffer.len()
            )));
        }
        let fill = self.book.model().max_prob_symbol() as u8;
        let mut pad = 0;
        loop {
            pad += 1;
            if self.push(fill, out)?.is_some() {
                return Ok(pad);
            }
        }
    }
}

/// One decoded unit: a code word index or an undecodable stretch.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Decoded {
    Word(usize),
    Erasure,
}

/// Incremental decoder of a digit stream.
#[derive(Debug, Clone)]
pub struct Decoder<'a> {
    book: &'a CodeBook,
    strict: bool,
    /// Fixed output length, for codes whose codewords all share it.
    block: Option<usize>,
    blocks: HashMap<Vec<u8>, u32>,
    trie: Trie,
    node: u32,
    pending: Vec<u8>,
}

impl<'a> Decoder<'a> {
    /// A strict decoder errors on undecodable input; a lenient one reports erasures.
    pub fn new(book: &'a CodeBook, strict: bool) -> Result<Self> {
        require_codec(book)?;
        let entries = book.entries().unwrap();
        let lengths: HashSet<u32> = entries.iter().map(|e| e.length()).collect();
        let fixed = book.kind() != CodeKind::Vv && lengths.len() == 1;
        let mut trie = Trie::new(book.arity() as usize);
        let mut blocks = HashMap::new();
        for (i, e) in entries.iter().enumerate() {
            if fixed {
                blocks.insert(e.codeword.clone(), i as u32);
            } else {
                trie.insert(&e.codeword, i as u32);
            }
        }
        Ok(Decoder {
            book,
            strict,
            block: fixed.then(|| entries[0].length() as usize),
            blocks,
            trie,
            node: 0,
            pending: Vec::new(),
        })
    }

    /// Feeds one digit; returns a decoded unit when one completes.
    pub fn push(&mut self, digit: u8) -> Result<Option<Decoded>> {
        let n = self.book.arity();
        if digit as u32 >= n {
            return Err(Error::Decode(format!("digit {digit} outside arity {n}")));
        }
        self.pending.push(digit);
        if let Some(l) = self.block {
            if self.pending.len() < l {
                return Ok(None);
            }
            let hit = self.blocks.get(&self.pending).copied();
            let block = std::mem::take(&mut self.pending);
            return match hit {
                Some(i) => Ok(Some(Decoded::Word(i as usize))),
                None if self.strict => Err(Error::Decode(format!(
                    "block {} is not a codeword",
                    block.iter().map(|&d| digit_char(d)).collect::<String>()
                ))),
                None => Ok(Some(Decoded::Erasure)),
            };
        }
        match self.trie.step(self.node, digit) {
            Some(next) => match self.trie.value(next) {
                Some(i) => {
                    self.node = 0;
                    self.pending.clear();
                    Ok(Some(Decoded::Word(i as usize)))
                }
                None => {
                    self.node = next;
                    Ok(None)
                }
            },
            None if self.strict => Err(Error::Decode("digits do not form a codeword".into())),
            None => {
                self.node = 0;
                self.pending.clear();
                Ok(Some(Decoded::Erasure))
            }
        }
    }

    /// Digits of an unfinished codeword.
    pub fn pending(&self) -> &[u8] {
        &self.pending
    }

    /// Fails if the stream ended inside a codeword.
    pub fn finish(&self) -> Result<()> {
        if self.pending.is_empty() {
            Ok(())
        } else {
            Err(Error::Decode(format!(
                "stream ends inside a codeword ({} dangling digits)",
                self.pending.len()
            )))
        }
    }
}

/// Result of encoding a whole message.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Encoded {
    pub digits: Vec<u8>,
    /// Symbols appended to complete the final word.
    pub pad: usize,
}

pub fn encode(book: &CodeBook, symbols: &[u8], strict: bool) -> Result<Encoded> {
    let mut enc = Encoder::new(book)?;
    let mut digits = Vec::new();
    for &s in symbols {
        enc.push(s, &mut digits)?;
    }
    let pad = enc.finish(strict, &mut digits)?;
    Ok(Encoded { digits, pad })
}

/// Decodes a complete digit stream and removes `pad` trailing symbols.
pub fn decode(book: &CodeBook, digits: &[u8], pad: usize) -> Result<Vec<u8>> {
    let mut dec = Decoder::new(book, true)?;
    let entries = book.entries().unwrap();
    let mut out = Vec::new();
    for &d in digits {
        if let Some(Decoded::Word(i)) = dec.push(d)? {
            out.extend_from_slice(entries[i].word.symbols());
        }
    }
    dec.finish()?;
    if pad > out.len() {
        return Err(Error::Decode(format!("pad {pad} exceeds decoded length {}", out.len())));
    }
    out.truncate(out.len() - pad);
    Ok(out)
}

/// Digit text with an optional `#pad=k` trailer.
pub fn render_stream(enc: &Encoded) -> String {
    let mut s: String = enc.digits.iter().map(|&d| digit_char(d)).collect();
    if enc.pad > 0 {
        s.push_str(&format!("\n#pad={}\n", enc.pad));
    }
    s
}

/// Parses digit text; whitespace is ignored and a `#pad=k` line sets the pad.
pub fn parse_stream(text: &str, arity: u32) -> Result<Encoded> {
    let mut digits = Vec::new();
    let mut pad = 0;
    for line in text.lines() {
        let line = line.trim();
        if let Some(v) = line.strip_prefix("#pad=") {
            pad = v
                .parse()
                .map_err(|_| Error::Format(format!("bad trailer {line:?}")))?;
            continue;
        }
        for c in line.chars().filter(|c| !c.is_whitespace()) {
            let d = parse_digit(c, arity)
                .ok_or_else(|| Error::Decode(format!("{c:?} is not a digit of arity {arity}")))?;
            digits.push(d);
        }
    }
    Ok(Encoded { digits, pad })
}

/// Draws `len` symbols from the source.
pub fn random_message<R: Rng>(book: &CodeBook, len: usize, rng: &mut R) -> Vec<u8> {
    let dist = WeightedIndex::new(book.model().probs()).expect("valid probabilities");
    (0..len).map(|_| dist.sample(rng) as u8).collect()
}

/// Outcome of one corrupted transmission.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SyncTrial {
    /// Index of the corrupted digit.
    pub position: usize,
    /// Decoded units that do not match the original parse.
    pub affected_words: usize,
    /// Digits after the corrupted one until decoding is back on the original
    /// word boundaries; `None` if it never is.
    pub resync_offset: Option<usize>,
    pub decode_failed: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SyncReport {
    pub kind: CodeKind,
    pub message_len: usize,
    pub trials: Vec<SyncTrial>,
    pub max_affected_words: usize,
    pub mean_affected_words: f64,
    /// Fraction of trials in which two or more words were damaged.
    pub multi_word_fraction: f64,
}

/// Encodes seeded random messages, flips one digit in each and counts the
/// decoded words that differ from the original parse.
pub fn sync_error_experiment(
    book: &CodeBook,
    message_len: usize,
    trials: usize,
    seed: u64,
) -> Result<SyncReport> {
    require_codec(book)?;
    let n = book.arity() as u8;
    let longest = book.max_word_length() as usize;
    if message_len < 10 * longest.max(1) {
        return Err(Error::Input(format!(
            "message length {message_len} is below ten times the maximum delay {longest}"
        )));
    }
    let entries = book.entries().unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::with_capacity(trials);
    for _ in 0..trials {
        let msg = random_message(book, message_len, &mut rng);
        let mut enc = Encoder::new(book)?;
        let mut digits = Vec::new();
        // original parse as (start, end, word) digit spans
        let mut original = HashSet::new();
        for &s in &msg {
            let start = digits.len();
            if let Some(i) = enc.push(s, &mut digits)? {
                original.insert((start, digits.len(), Decoded::Word(i)));
            }
        }
        let start = digits.len();
        enc.finish(false, &mut digits)?;
        if digits.len() > start {
            let last = entries.iter().position(|e| digits[start..] == e.codeword[..]);
            if let Some(i) = last {
                original.insert((start, digits.len(), Decoded::Word(i)));
            }
        }

        let position = rng.gen_range(0..digits.len());
        let old = digits[position];
        digits[position] = if n == 2 {
            1 - old
        } else {
            let r = rng.gen_range(0..n - 1);
            if r >= old {
                r + 1
            } else {
                r
            }
        };

        let mut dec = Decoder::new(book, false)?;
        let mut affected = 0;
        let mut last_bad_end = None;
        let mut unit_start = 0;
        for (at, &d) in digits.iter().enumerate() {
            if let Some(unit) = dec.push(d)? {
                let span = (unit_start, at + 1, unit);
                if !original.contains(&span) {
                    affected += 1;
                    last_bad_end = Some(at + 1);
                }
                unit_start = at + 1;
            }
        }
        let dangling = !dec.pending().is_empty();
        if dangling {
            affected += 1;
        }
        let resync_offset = if dangling {
            None
        } else {
            Some(last_bad_end.map_or(0, |e| e.saturating_sub(position + 1)))
        };
        out.push(SyncTrial {
            position,
            affected_words: affected,
            resync_offset,
            decode_failed: dangling,
        });
    }
    let max_affected_words = out.iter().map(|t| t.affected_words).max().unwrap_or(0);
    let total: usize = out.iter().map(|t| t.affected_words).sum();
    let multi = out.iter().filter(|t| t.affected_words >= 2).count();
    let k = out.len().max(1) as f64;
    Ok(SyncReport {
        kind: book.kind(),
        message_len,
        max_affected_words,
        mean_affected_words: total as f64 / k,
        multi_word_fraction: multi as f64 / k,
        trials: out,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::codebook::Provenance;
    use crate::source::{Alphabet, SourceModel, Word};

    fn section_five() -> CodeBook {
        let model = SourceModel::new(vec![0.4, 0.6], 2).unwrap();
        let pairs = [("a", "0"), ("ba", "10"), ("bba", "110"), ("bbb", "111")]
            .iter()
            .map(|(w, c)| (Word::from_letters(w).unwrap(), c.bytes().map(|b| b - b'0').collect()))
            .collect();
        CodeBook::from_words(model, Alphabet::letters(2), CodeKind::Vv, pairs, Provenance::default())
            .unwrap()
    }

    #[test]
    fn encode_worked_example() {
        let book = section_five();
        let e = encode(&book, &[0, 1, 0, 1, 1, 1], true).unwrap();
        assert_eq!(render_stream(&e), "010111");
        assert_eq!(decode(&book, &e.digits, 0).unwrap(), vec![0, 1, 0, 1, 1, 1]);
    }

    #[test]
    fn empty_stream() {
        let book = section_five();
        let e = encode(&book, &[], true).unwrap();
        assert_eq!(render_stream(&e), "");
        assert!(decode(&book, &[], 0).unwrap().is_empty());
    }

    #[test]
    fn padding_round_trip() {
        let book = section_five();
        let e = encode(&book, &[1, 1], false).unwrap();
        assert_eq!(e.pad, 1);
        let text = render_stream(&e);
        assert_eq!(text, "111\n#pad=1\n");
        let back = parse_stream(&text, 2).unwrap();
        assert_eq!(decode(&book, &back.digits, back.pad).unwrap(), vec![1, 1]);
        assert!(encode(&book, &[1, 1], true).is_err());
    }

    #[test]
    fn dangling_codeword_is_an_error() {
        let book = section_five();
        assert!(matches!(decode(&book, &[1, 1], 0), Err(Error::Decode(_))));
        assert!(parse_stream("012", 2).is_err());
    }
}
