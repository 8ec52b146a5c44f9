//! JSON representation of explicit codes.
//!
//! Fields are written in sorted order and probabilities keep the text they
//! were given in, so saving a loaded file reproduces it byte for byte.

use num_rational::BigRational;
use serde::{Deserialize, Serialize};

use crate::codebook::{Assignment, CodeBook, CodeKind, MergeStep, MergeTrace, Provenance};
use crate::error::{Error, Result};
use crate::source::{Alphabet, SourceModel};
use crate::vv::prefix_code::{digits_to_string, string_to_digits};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CodeBookFile {
    pub alphabet: Vec<String>,
    pub arity: u32,
    pub kind: String,
    pub probs: Vec<String>,
    pub provenance: ProvenanceFile,
    pub words: Vec<WordFile>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WordFile {
    pub codeword: String,
    pub symbols: String,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProvenanceFile {
    #[serde(rename = "T", default, skip_serializing_if = "Option::is_none")]
    pub t: Option<u64>,
    #[serde(rename = "T2", default, skip_serializing_if = "Option::is_none")]
    pub t2: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub assignment: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub input_length: Option<u32>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub merge_trace: Option<MergeTraceFile>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub min_symbol: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output_length: Option<u32>,
    #[serde(default)]
    pub rational_case: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub thresholds: Option<[f64; 2]>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MergeTraceFile {
    pub g0: f64,
    pub k0: usize,
    pub steps: Vec<MergeStepFile>,
    pub swapped: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MergeStepFile {
    pub changed: bool,
    pub g: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub g_exact: Option<String>,
    pub label: String,
    pub probability: f64,
}

impl CodeBookFile {
    pub fn from_book(book: &CodeBook) -> Result<Self> {
        let entries = book.entries().ok_or_else(|| {
            Error::Input("only codes with explicit words can be saved".into())
        })?;
        let alphabet = book.alphabet();
        Ok(CodeBookFile {
            alphabet: alphabet.glyphs().iter().map(|c| c.to_string()).collect(),
            arity: book.arity(),
            kind: book.kind().as_str().to_string(),
            probs: book.model().prob_text().to_vec(),
            provenance: provenance_to_file(book.provenance()),
            words: entries
                .iter()
                .map(|e| WordFile {
                    codeword: digits_to_string(&e.codeword),
                    symbols: alphabet.render(&e.word),
                })
                .collect(),
        })
    }

    pub fn to_book(&self) -> Result<CodeBook> {
        let glyphs = self
            .alphabet
            .iter()
            .map(|g| {
                let mut it = g.chars();
                match (it.next(), it.next()) {
                    (Some(c), None) => Ok(c),
                    _ => Err(Error::Format(format!("glyph {g:?} is not a single character"))),
                }
            })
            .collect::<Result<Vec<char>>>()?;
        let alphabet = Alphabet::from_glyphs(glyphs)?;
        let model = SourceModel::parse(&self.probs, self.arity)?;
        let kind = CodeKind::parse(&self.kind)?;
        let pairs = self
            .words
            .iter()
            .map(|w| {
                Ok((
                    alphabet.parse_word(&w.symbols)?,
                    string_to_digits(&w.codeword, self.arity)?,
                ))
            })
            .collect::<Result<Vec<_>>>()?;
        let provenance = provenance_from_file(&self.provenance)?;
        CodeBook::from_words(model, alphabet, kind, pairs, provenance)
    }

    /// Pretty-printed JSON with a trailing newline.
    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("serialisable");
        s.push('\n');
        s
    }

    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Format(e.to_string()))
    }
}

fn provenance_to_file(p: &Provenance) -> ProvenanceFile {
    ProvenanceFile {
        t: p.t,
        t2: p.t2,
        assignment: p.assignment.map(|a| a.as_str().to_string()),
        input_length: p.input_length,
        merge_trace: p.merge_trace.as_ref().map(|tr| MergeTraceFile {
            g0: tr.g0,
            k0: tr.k0,
            steps: tr
                .steps
                .iter()
                .map(|s| MergeStepFile {
                    changed: s.changed,
                    g: s.g,
                    g_exact: s.g_exact.as_ref().map(|r| r.to_string()),
                    label: s.label.clone(),
                    probability: s.probability,
                })
                .collect(),
            swapped: tr.swapped,
        }),
        min_symbol: p.min_symbol,
        output_length: p.output_length,
        rational_case: p.rational_case,
        thresholds: p.thresholds.map(|(a, b)| [a, b]),
    }
}

fn provenance_from_file(p: &ProvenanceFile) -> Result<Provenance> {
    let merge_trace = match &p.merge_trace {
        None => None,
        Some(tr) => Some(MergeTrace {
            g0: tr.g0,
            k0: tr.k0,
            swapped: tr.swapped,
            steps: tr
                .steps
                .iter()
                .map(|s| {
                    let g_exact = s
                        .g_exact
                        .as_ref()
                        .map(|t| {
                            t.parse::<BigRational>()
                                .map_err(|_| Error::Format(format!("bad ratio {t:?}")))
                        })
                        .transpose()?;
                    Ok(MergeStep {
                        label: s.label.clone(),
                        probability: s.probability,
                        g: s.g,
                        g_exact,
                        changed: s.changed,
                    })
                })
                .collect::<Result<Vec<_>>>()?,
        }),
    };
    Ok(Provenance {
        t: p.t,
        t2: p.t2,
        thresholds: p.thresholds.map(|[a, b]| (a, b)),
        assignment: p.assignment.as_deref().map(Assignment::parse).transpose()?,
        merge_trace,
        output_length: p.output_length,
        input_length: p.input_length,
        min_symbol: p.min_symbol,
        rational_case: p.rational_case,
    })
}

/// Serialises an explicit code.
pub fn save_json(book: &CodeBook) -> Result<String> {
    Ok(CodeBookFile::from_book(book)?.to_json())
}

/// Parses and validates a code.
pub fn load_json(text: &str) -> Result<CodeBook> {
    CodeBookFile::from_json(text)?.to_book()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::source::Word;
    use crate::vv::{construct_vv, VvParams};

    #[test]
    fn round_trip_is_byte_identical() {
        let model = SourceModel::parse(&["0.4", "0.6"], 2).unwrap();
        let w = |l: &[&str]| l.iter().map(|s| Word::from_letters(s).unwrap()).collect::<Vec<_>>();
        let params = VvParams {
            explicit: Some((
                w(&["a", "baa", "bab", "bba", "bbb"]),
                w(&["bba", "bbb", "ab", "ba", "aaa", "aab"]),
            )),
            ..VvParams::default()
        };
        let book = construct_vv(&model, &params).unwrap().book;
        let first = save_json(&book).unwrap();
        let again = save_json(&load_json(&first).unwrap()).unwrap();
        assert_eq!(first, again);
        assert!(first.contains("\"g_exact\": \"7/8\""));
        assert!(first.contains("\"probs\": [\n    \"0.4\""));
    }

    #[test]
    fn rejects_bad_files() {
        assert!(matches!(load_json("{"), Err(Error::Format(_))));
        let text = r#"{"alphabet":["a","b"],"arity":2,"kind":"vv","probs":["0.4","0.6"],
            "provenance":{},"words":[{"codeword":"0","symbols":"a"}]}"#;
        assert!(matches!(load_json(text), Err(Error::Incomplete(_))));
    }
}
