//! Kraft repair for word sets too large to enumerate.
//!
//! All words that stop at the same profile share their probability and
//! threshold length, so the repair adds whole `M2` profile classes instead
//! of single words. Which words of `M1 ∧ (A^1 ∪ … ∪ A^k)` stop where is path
//! dependent; a two-state lattice sweep tracks whether a path has already
//! passed a (non-selected) `M2` profile.

use std::collections::HashSet;

use crate::codebook::{CodeClass, MergeStep, MergeTrace};
use crate::error::{Error, Result};
use crate::source::{Profile, SourceModel};
use crate::word_sets::lattice::{self, Decision, LatticeOptions, LatticeTable};
use crate::word_sets::ProfileSet;

use super::threshold_length;

const TAG_M1_ONLY: u8 = 0;
const TAG_M1_AND_M2: u8 = 1;
const TAG_M2: u8 = 2;

/// Sweeps `M1 ∧ S` where `S` holds the `M2` words whose profiles are selected.
fn sweep_merged(
    model: &SourceModel,
    m1: &ProfileSet,
    m2: &ProfileSet,
    selected: &HashSet<Vec<u32>>,
    select_all: bool,
    opts: &LatticeOptions,
) -> Result<LatticeTable> {
    let cap = m1.cap.max(m2.cap);
    lattice::sweep(model, 2, cap, opts, |k, _, state| {
        let in1 = m1.contains(model, k);
        let in2 = m2.contains(model, k);
        let fresh = state == 0;
        if fresh && in2 && (select_all || selected.contains(k)) {
            Decision::Stop(TAG_M2)
        } else if in1 {
            Decision::Stop(if fresh && in2 { TAG_M1_AND_M2 } else { TAG_M1_ONLY })
        } else if fresh && in2 {
            Decision::Continue(1)
        } else {
            Decision::Continue(state)
        }
    })
}

fn classes_of(model: &SourceModel, table: &LatticeTable) -> Vec<CodeClass> {
    let tol = model.tolerance();
    table
        .entries
        .iter()
        .filter(|e| e.mass > 0.0 || e.count.as_ref().is_some_and(|c| c.bits() > 0))
        .map(|e| {
            let f = model.linear_form_unchecked(e.profile.counts());
            CodeClass {
                profile: e.profile.clone(),
                mass: e.mass,
                word_probability: model.profile_probability(e.profile.counts()),
                length: threshold_length(f, e.tag != TAG_M1_ONLY, tol),
                count: e.count.clone(),
            }
        })
        .collect()
}

/// `Σ n^(-l)` of a class set, from masses: `count · n^(-l) = mass · n^(-ε)`.
/// Unresolved mass is bounded by `n · live_mass` since `|ε| ≤ 1`.
fn kraft_of(model: &SourceModel, table: &LatticeTable) -> f64 {
    let n = model.arity() as f64;
    let mut s = 0.0;
    for c in classes_of(model, table) {
        let eps = c.length as f64 - model.linear_form_unchecked(c.profile.counts());
        s += c.mass * n.powf(-eps);
    }
    s + n * table.live_mass
}

/// Result of a class-level repair.
pub struct ClassMerge {
    pub classes: Vec<CodeClass>,
    pub tail_mass: f64,
    pub trace: MergeTrace,
    pub kraft_m1: f64,
    pub kraft_m2: f64,
    pub kraft_wedge: f64,
    pub table: LatticeTable,
}

pub fn merge_classes(
    model: &SourceModel,
    m1: &ProfileSet,
    m2: &ProfileSet,
    opts: &LatticeOptions,
) -> Result<ClassMerge> {
    let none = HashSet::new();
    let base = sweep_merged(model, m1, m2, &none, false, opts)?;
    let g0 = kraft_of(model, &base);

    // M2 on its own
    let m2_table = crate::word_sets::lattice_metrics(model, m2, opts)?;
    let kraft_m2 = {
        let n = model.arity() as f64;
        let tol = model.tolerance();
        m2_table
            .entries
            .iter()
            .map(|e| {
                let f = model.linear_form_unchecked(e.profile.counts());
                let l = threshold_length(f, true, tol) as f64;
                e.mass * n.powf(f - l)
            })
            .sum::<f64>()
            + n * m2_table.live_mass
    };

    let all = sweep_merged(model, m1, m2, &none, true, opts)?;
    let kraft_wedge = kraft_of(model, &all);

    let finish = |table: LatticeTable, trace: MergeTrace, kw: f64| ClassMerge {
        classes: classes_of(model, &table),
        tail_mass: table.live_mass,
        trace,
        kraft_m1: g0,
        kraft_m2,
        kraft_wedge: kw,
        table,
    };

    if g0 <= 1.0 {
        let trace = MergeTrace {
            g0,
            ..MergeTrace::default()
        };
        return Ok(finish(base, trace, kraft_wedge));
    }
    if kraft_wedge > 1.0 {
        if kraft_m2 > 1.0 {
            return Err(Error::Infeasible(
                "both M1 and M2 orderings violate the Kraft inequality".into(),
            ));
        }
        // exchanged roles: M2 alone is the word set
        let m2_only = lattice::sweep(model, 1, m2.cap, opts, |k, _, _| {
            if m2.contains(model, k) {
                Decision::Stop(TAG_M2)
            } else {
                Decision::Continue(0)
            }
        })?;
        let trace = MergeTrace {
            g0: kraft_m2,
            swapped: true,
            ..MergeTrace::default()
        };
        return Ok(finish(m2_only, trace, kraft_wedge));
    }

    // M2 classes, most probable first, then by profile
    let mut order: Vec<(Profile, f64)> = m2_table
        .entries
        .iter()
        .filter(|e| e.mass > 0.0)
        .map(|e| (e.profile.clone(), model.linear_form_unchecked(e.profile.counts())))
        .collect();
    order.sort_by(|a, b| a.1.total_cmp(&b.1).then(a.0.cmp(&b.0)));
    if order.is_empty() {
        return Err(Error::Infeasible("M2 has no classes to extend with".into()));
    }

    let eval = |k: usize| -> Result<(LatticeTable, f64)> {
        let sel: HashSet<Vec<u32>> = order[..k].iter().map(|(p, _)| p.counts().to_vec()).collect();
        let t = sweep_merged(model, m1, m2, &sel, false, opts)?;
        let g = kraft_of(model, &t);
        Ok((t, g))
    };

    // g is non-increasing in k; find the first k with g(k) ≤ 1
    let mut steps = Vec::new();
    let (mut lo, mut hi) = (0usize, order.len());
    let mut best: Option<(usize, LatticeTable, f64)> = None;
    while lo + 1 < hi {
        let mid = (lo + hi) / 2;
        let (t, g) = eval(mid)?;
        steps.push((mid, g));
        if g <= 1.0 {
            hi = mid;
            best = Some((mid, t, g));
        } else {
            lo = mid;
        }
    }
    let (k0, table, _) = match best {
        Some(b) if b.0 == hi => b,
        _ => {
            let (t, g) = eval(hi)?;
            steps.push((hi, g));
            (hi, t, g)
        }
    };
    steps.sort_by_key(|s| s.0);
    steps.dedup_by_key(|s| s.0);
    let trace = MergeTrace {
        g0,
        steps: steps
            .into_iter()
            .map(|(k, g)| {
                let (p, f) = &order[k - 1];
                MergeStep {
                    label: format!("{p}"),
                    probability: (-f * model.ln_arity()).exp(),
                    g,
                    g_exact: None,
                    changed: true,
                }
            })
            .collect(),
        k0,
        swapped: false,
    };
    Ok(finish(table, trace, kraft_wedge))
}

/// Largest `|ε|` over classes shorter than `cap`.
pub fn max_short_word_eps(model: &SourceModel, classes: &[CodeClass], cap: u64) -> f64 {
    classes
        .iter()
        .filter(|c| c.profile.len() < cap)
        .map(|c| {
            let f = model.linear_form_unchecked(c.profile.counts());
            (c.length as f64 - f).abs()
        })
        .fold(0.0, f64::max)
}
