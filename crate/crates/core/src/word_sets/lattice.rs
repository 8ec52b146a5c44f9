//! Level-by-level dynamic programme over the profile lattice.
//!
//! A word stops at the first prefix whose profile is a member of the
//! profile set, so which profiles *stop* is path dependent. The programme
//! propagates, for every profile `k` of length `r`, the probability mass
//! (and optionally the exact number) of words with profile `k` none of
//! whose proper prefixes stopped. Stopping profiles are recorded with the
//! mass and count that arrive there.
//!
//! The engine is generic over a small per-path state so the same sweep can
//! evaluate merged word sets (see the construction module).

use std::collections::HashMap;

use num_bigint::BigUint;

use crate::error::{Error, Result};
use crate::source::{Profile, SourceModel};

/// What happens to a path that arrives at a profile in a given state.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Decision {
    /// The path becomes a word; the tag labels its class.
    Stop(u8),
    /// The path continues in the given state.
    Continue(usize),
}

/// When to carry exact big-integer path counts.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CountMode {
    Never,
    Always,
    /// Only when the full lattice up to the length limit has at most this many nodes.
    UpTo(u64),
}

#[derive(Debug, Clone)]
pub struct LatticeOptions {
    pub counts: CountMode,
    /// Stop sweeping once the live mass falls below this value (only without exact counts).
    pub mass_floor: f64,
    /// Abandon paths whose profile mass falls below this value (only without exact counts).
    pub node_floor: f64,
    /// Largest number of profiles allowed on a single level.
    pub max_level_nodes: u64,
}

impl Default for LatticeOptions {
    fn default() -> Self {
        LatticeOptions {
            counts: CountMode::UpTo(400_000),
            mass_floor: 1e-20,
            node_floor: 1e-32,
            max_level_nodes: 50_000_000,
        }
    }
}

/// One stopping class: all words that stop at `profile` with the same tag.
#[derive(Debug, Clone, PartialEq)]
pub struct StopEntry {
    pub profile: Profile,
    pub tag: u8,
    /// Total probability of the words in the class.
    pub mass: f64,
    /// Exact number of words in the class, when counts are tracked.
    pub count: Option<BigUint>,
}

#[allow(clippy::len_without_is_empty)]
impl StopEntry {
    pub fn len(&self) -> u64 {
        self.profile.len()
    }

    pub fn is_empty_word(&self) -> bool {
        self.profile.is_zero()
    }
}

/// Result of a lattice sweep.
#[derive(Debug, Clone, PartialEq)]
pub struct LatticeTable {
    /// Stopping classes in order of increasing length, lexicographic within a level.
    pub entries: Vec<StopEntry>,
    /// Σ mass over stopping classes.
    pub total_prob: f64,
    /// Σ mass · |k|.
    pub weighted_length: f64,
    /// Longest stopping word (an upper bound when `truncated`).
    pub max_length: u64,
    /// Mass still live when the sweep ended (truncation or length limit).
    pub live_mass: f64,
    /// The sweep stopped early on the mass floor.
    pub truncated: bool,
    /// Mass stopping exactly at the length limit.
    pub limit_mass: f64,
    pub exact_counts: bool,
}

impl LatticeTable {
    /// `Σ p|A| / Σ p`.
    pub fn avg_length(&self) -> f64 {
        if self.total_prob > 0.0 {
            self.weighted_length / self.total_prob
        } else {
            0.0
        }
    }

    /// Exact number of words, when counts were tracked.
    pub fn word_count(&self) -> Option<BigUint> {
        self.entries
            .iter()
            .map(|e| e.count.clone())
            .sum::<Option<BigUint>>()
    }

    /// Map from profile to summed count over tags, when counts were tracked.
    pub fn counts_by_profile(&self) -> Option<HashMap<Profile, BigUint>> {
        let mut out: HashMap<Profile, BigUint> = HashMap::new();
        for e in &self.entries {
            *out.entry(e.profile.clone()).or_default() += e.count.clone()?;
        }
        Some(out)
    }
}

pub(crate) fn binom(n: u64, k: u64) -> u64 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = acc * (n - i) as u128 / (i + 1) as u128;
        if acc > u64::MAX as u128 {
            return u64::MAX;
        }
    }
    acc as u64
}

/// Number of profiles of length `r` in dimension `m`.
pub fn level_size(r: u64, m: usize) -> u64 {
    binom(r + m as u64 - 1, m as u64 - 1)
}

/// Position of a composition among all compositions of the same total,
/// ordered lexicographically.
fn rank(k: &[u32], mut r: u64) -> usize {
    let mut idx = 0u64;
    let mut parts = k.len();
    for &ki in &k[..k.len() - 1] {
        // compositions with a smaller leading part come first
        idx += level_size(r, parts) - level_size(r - ki as u64, parts);
        r -= ki as u64;
        parts -= 1;
    }
    idx as usize
}

#[cfg(test)]
/// Advances to the lexicographically next composition with the same total.
fn next_composition(k: &mut [u32]) -> bool {
    let m = k.len();
    let mut tail = 0u32;
    for j in (0..m - 1).rev() {
        tail += k[j + 1];
        if tail > 0 {
            k[j] += 1;
            for x in &mut k[j + 1..] {
                *x = 0;
            }
            k[m - 1] = tail - 1;
            return true;
        }
    }
    false
}

/// A live lattice node: a profile reached in some state by paths that have not stopped.
struct Node {
    k: Vec<u32>,
    idx: usize,
    state: usize,
    mass: f64,
    count: BigUint,
}

/// Accumulates nodes of one level keyed by `(rank, state)`.
struct LevelMap {
    states: usize,
    pos: Vec<u32>,
    nodes: Vec<Node>,
}

impl LevelMap {
    fn new(states: usize) -> Self {
        LevelMap {
            states,
            pos: Vec::new(),
            nodes: Vec::new(),
        }
    }

    fn reset(&mut self, size: usize) {
        for n in &self.nodes {
            self.pos[n.idx * self.states + n.state] = u32::MAX;
        }
        self.nodes.clear();
        let want = size * self.states;
        if self.pos.len() < want {
            self.pos.resize(want, u32::MAX);
        }
    }

    fn add(&mut self, k: &[u32], idx: usize, state: usize, mass: f64, count: Option<&BigUint>) {
        let slot = idx * self.states + state;
        let at = self.pos[slot];
        if at == u32::MAX {
            self.pos[slot] = self.nodes.len() as u32;
            self.nodes.push(Node {
                k: k.to_vec(),
                idx,
                state,
                mass,
                count: count.cloned().unwrap_or_default(),
            });
        } else {
            let n = &mut self.nodes[at as usize];
            n.mass += mass;
            if let Some(c) = count {
                n.count += c;
            }
        }
    }
}

type LevelStop = (usize, u8, Vec<u32>, f64, Option<BigUint>);

/// Sweeps the lattice up to `max_len` and collects stopping classes.
///
/// `decide` is consulted for every reachable `(profile, state)`; the empty
/// profile is visited in state 0. Without exact counts, nodes whose mass
/// drops below `node_floor` are abandoned and their mass is reported as live.
pub fn sweep<F>(
    model: &SourceModel,
    states: usize,
    max_len: u64,
    opts: &LatticeOptions,
    mut decide: F,
) -> Result<LatticeTable>
where
    F: FnMut(&[u32], u64, usize) -> Decision,
{
    let m = model.alphabet_size();
    let probs = model.probs();
    let exact = match opts.counts {
        CountMode::Never => false,
        CountMode::Always => true,
        CountMode::UpTo(limit) => {
            // total nodes up to max_len is C(max_len + m, m)
            let total = binom(max_len + m as u64, m as u64);
            total <= limit
        }
    };

    let mut table = LatticeTable {
        entries: Vec::new(),
        total_prob: 0.0,
        weighted_length: 0.0,
        max_length: 0,
        live_mass: 0.0,
        truncated: false,
        limit_mass: 0.0,
        exact_counts: exact,
    };

    let zero = vec![0u32; m];
    let one = BigUint::from(1u8);
    let mut live_nodes: Vec<Node> = match decide(&zero, 0, 0) {
        Decision::Stop(tag) => {
            table.entries.push(StopEntry {
                profile: Profile::zero(m),
                tag,
                mass: 1.0,
                count: exact.then(|| one.clone()),
            });
            table.total_prob = 1.0;
            if max_len == 0 {
                table.limit_mass = 1.0;
            }
            return Ok(table);
        }
        Decision::Continue(s) => vec![Node {
            k: zero.clone(),
            idx: 0,
            state: s,
            mass: 1.0,
            count: one.clone(),
        }],
    };
    let mut live = 1.0f64;
    let mut dropped = 0.0f64;

    let mut incoming = LevelMap::new(states);
    let mut next = LevelMap::new(states);
    let mut k = vec![0u32; m];
    // stopping classes on the current level: (rank, tag, profile, mass, count)
    let mut level_stops: Vec<LevelStop> = Vec::new();

    for r in 1..=max_len {
        if live_nodes.is_empty() {
            live = 0.0;
            break;
        }
        let size = level_size(r, m);
        if size > opts.max_level_nodes {
            return Err(Error::Resource(format!(
                "profile lattice level {r} has {size} nodes (limit {})",
                opts.max_level_nodes
            )));
        }
        let size = size as usize;
        incoming.reset(size);
        next.reset(size);
        level_stops.clear();

        for node in &live_nodes {
            for i in 0..m {
                k.copy_from_slice(&node.k);
                k[i] += 1;
                let idx = rank(&k, r);
                let count = exact.then_some(&node.count);
                incoming.add(&k, idx, node.state, node.mass * probs[i], count);
            }
        }
        // visit in lattice order so results do not depend on arrival order
        incoming.nodes.sort_by_key(|n| (n.idx, n.state));
        for n in &incoming.nodes {
            match decide(&n.k, r, n.state) {
                Decision::Stop(tag) => {
                    let c = exact.then(|| n.count.clone());
                    if let Some(e) = level_stops
                        .iter_mut()
                        .rev()
                        .take_while(|e| e.0 == n.idx)
                        .find(|e| e.1 == tag)
                    {
                        e.3 += n.mass;
                        if let (Some(a), Some(b)) = (e.4.as_mut(), c) {
                            *a += b;
                        }
                    } else {
                        level_stops.push((n.idx, tag, n.k.clone(), n.mass, c));
                    }
                }
                Decision::Continue(s2) => {
                    if !exact && n.mass < opts.node_floor {
                        dropped += n.mass;
                    } else {
                        next.add(&n.k, n.idx, s2, n.mass, exact.then_some(&n.count));
                    }
                }
            }
        }

        level_stops.sort_by(|a, b| a.0.cmp(&b.0).then(a.1.cmp(&b.1)));
        for (_, tag, kk, mass, count) in level_stops.drain(..) {
            table.total_prob += mass;
            table.weighted_length += mass * r as f64;
            if r == max_len {
                table.limit_mass += mass;
            }
            table.max_length = r;
            table.entries.push(StopEntry {
                profile: Profile::new(kk),
                tag,
                mass,
                count,
            });
        }

        for n in &next.nodes {
            next.pos[n.idx * states + n.state] = u32::MAX;
        }
        std::mem::swap(&mut live_nodes, &mut next.nodes);
        next.nodes.clear();
        live_nodes.sort_by_key(|n| (n.idx, n.state));
        live = live_nodes.iter().map(|n| n.mass).sum();
        if live_nodes.is_empty() {
            live = 0.0;
            break;
        }
        if !exact && live < opts.mass_floor && r < max_len {
            table.truncated = true;
            // surviving paths may run on to the length limit
            table.max_length = max_len;
            break;
        }
    }
    table.live_mass = live + dropped;
    if dropped > 0.0 {
        table.truncated = true;
    }
    Ok(table)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rank_matches_enumeration_order() {
        for m in 2..5 {
            for r in 0..7u64 {
                let mut k = vec![0u32; m];
                k[m - 1] = r as u32;
                let mut i = 0;
                loop {
                    assert_eq!(rank(&k, r), i);
                    i += 1;
                    if !next_composition(&mut k) {
                        break;
                    }
                }
                assert_eq!(i as u64, level_size(r, m));
            }
        }
    }

    #[test]
    fn alphabet_stops_at_length_one() {
        let model = SourceModel::new(vec![0.3, 0.7], 2).unwrap();
        let t = sweep(&model, 1, 1, &LatticeOptions::default(), |_, len, _| {
            if len == 1 {
                Decision::Stop(0)
            } else {
                Decision::Continue(0)
            }
        })
        .unwrap();
        assert_eq!(t.entries.len(), 2);
        assert!((t.total_prob - 1.0).abs() < 1e-15);
        assert_eq!(t.avg_length(), 1.0);
        assert_eq!(t.word_count(), Some(BigUint::from(2u8)));
    }

    #[test]
    fn level_limit_is_a_resource_error() {
        let model = SourceModel::new(vec![0.25, 0.25, 0.25, 0.25], 2).unwrap();
        let opts = LatticeOptions {
            max_level_nodes: 100,
            ..LatticeOptions::default()
        };
        let err = sweep(&model, 1, 50, &opts, |_, _, _| Decision::Continue(0)).unwrap_err();
        assert!(matches!(err, Error::Resource(_)));
    }
}
