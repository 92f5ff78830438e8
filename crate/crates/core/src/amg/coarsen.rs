//! C/F splitting: classical Ruge-Stuben first pass and PMIS.

use std::collections::BinaryHeap;

use super::strength::StrengthGraph;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Point {
    Coarse,
    Fine,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CfSplit {
    pub label: Vec<Point>,
}

impl CfSplit {
    pub fn len(&self) -> usize {
        self.label.len()
    }

    pub fn is_empty(&self) -> bool {
        self.label.is_empty()
    }

    pub fn is_coarse(&self, i: usize) -> bool {
        self.label[i] == Point::Coarse
    }

    pub fn coarse_count(&self) -> usize {
        self.label.iter().filter(|&&p| p == Point::Coarse).count()
    }

    /// Fine index -> coarse index, `None` for F points.
    pub fn coarse_numbering(&self) -> Vec<Option<usize>> {
        let mut next = 0;
        self.label
            .iter()
            .map(|&p| match p {
                Point::Coarse => {
                    next += 1;
                    Some(next - 1)
                }
                Point::Fine => None,
            })
            .collect()
    }
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum State {
    Undecided,
    C,
    F,
}

fn finish(state: Vec<State>) -> CfSplit {
    CfSplit {
        label: state
            .into_iter()
            .map(|s| match s {
                State::C => Point::Coarse,
                _ => Point::Fine,
            })
            .collect(),
    }
}

/// Greedy first pass of Ruge-Stuben coarsening.
///
/// The undecided point with the largest measure `|S_i^T|` (lowest index on
/// ties) becomes C, the points depending on it become F, and the measures of
/// their other dependencies grow by one. Points with no strong connection in
/// either direction are labelled F.
pub fn cf_split_rs(s: &StrengthGraph) -> CfSplit {
    let n = s.len();
    let mut state = vec![State::Undecided; n];
    let mut measure: Vec<usize> = (0..n).map(|i| s.influences(i).len()).collect();
    for i in 0..n {
        if s.influences(i).is_empty() && s.depends_on(i).is_empty() {
            state[i] = State::F;
        }
    }

    // max-heap on (measure, lowest index) packed into one key; stale entries
    // are skipped
    let key = |m: usize, i: usize| ((m as u64) << 32) | (u32::MAX - i as u32) as u64;
    let mut heap: BinaryHeap<u64> = (0..n)
        .filter(|&i| state[i] == State::Undecided)
        .map(|i| key(measure[i], i))
        .collect();

    while let Some(top) = heap.pop() {
        let (m, i) = ((top >> 32) as usize, (u32::MAX - top as u32) as usize);
        if state[i] != State::Undecided || m != measure[i] {
            continue;
        }
        state[i] = State::C;
        for &j in s.influences(i) {
            if state[j] != State::Undecided {
                continue;
            }
            state[j] = State::F;
            for &k in s.depends_on(j) {
                if state[k] == State::Undecided {
                    measure[k] += 1;
                    heap.push(key(measure[k], k));
                }
            }
        }
        for &k in s.depends_on(i) {
            if state[k] == State::Undecided && measure[k] > 0 {
                measure[k] -= 1;
                heap.push(key(measure[k], k));
            }
        }
    }
    finish(state)
}

/// Deterministic value in `(0, 1)` derived from `(seed, i)` (splitmix64 finalizer).
pub fn pmis_jitter(seed: u64, i: usize) -> f64 {
    let mut z = seed
        .wrapping_mul(0x9E37_79B9_7F4A_7C15)
        .wrapping_add((i as u64).wrapping_add(1).wrapping_mul(0xBF58_476D_1CE4_E5B9));
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^= z >> 31;
    ((z >> 11) as f64 + 0.5) / (1u64 << 53) as f64
}

/// Parallel modified independent set coarsening.
///
/// Weights are `|S_i^T| + jitter(seed, i)`. Each round promotes undecided
/// points whose weight beats every undecided neighbour in the symmetrised
/// strength graph; points that strongly depend on a new C point become F.
pub fn cf_split_pmis(s: &StrengthGraph, seed: u64) -> CfSplit {
    let n = s.len();
    let weight: Vec<f64> = (0..n)
        .map(|i| s.influences(i).len() as f64 + pmis_jitter(seed, i))
        .collect();
    let mut state = vec![State::Undecided; n];
    // points nobody depends on are never useful as C
    for i in 0..n {
        if s.influences(i).is_empty() {
            state[i] = State::F;
        }
    }
    let mut undecided: Vec<usize> = (0..n).filter(|&i| state[i] == State::Undecided).collect();
    let mut new_c = Vec::new();
    while !undecided.is_empty() {
        new_c.clear();
        for &i in &undecided {
            let wi = weight[i];
            let beats = |nbrs: &[usize]| {
                nbrs.iter()
                    .all(|&j| state[j] != State::Undecided || weight[j] < wi)
            };
            if beats(s.depends_on(i)) && beats(s.influences(i)) {
                new_c.push(i);
            }
        }
        for &i in &new_c {
            state[i] = State::C;
        }
        for &i in &new_c {
            for &j in s.influences(i) {
                if state[j] == State::Undecided {
                    state[j] = State::F;
                }
            }
        }
        undecided.retain(|&i| state[i] == State::Undecided);
    }
    finish(state)
}
