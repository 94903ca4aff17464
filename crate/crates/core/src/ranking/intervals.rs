//! Minimal all-words intervals by a two-pointer sweep.

use std::collections::HashMap;

use crate::corpus::DocId;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Interval {
    pub doc: DocId,
    pub p: u32,
    pub q: u32,
    /// Number of query words covered.
    pub n_i: u32,
}

impl Interval {
    pub fn len(&self) -> u32 {
        self.q - self.p + 1
    }

    pub fn span(&self) -> u32 {
        self.q - self.p
    }
}

/// Coverage bookkeeping for the sweep.
///
/// Words with identical position lists form one class that must be hit as
/// many times as it has members. When classes share positions (a token with
/// several lemmas), coverage is decided by Hall's condition over classes.
struct Cover {
    need: Vec<u32>,
    overlap: bool,
    by_class: Vec<u32>,
    satisfied: usize,
    by_mask: HashMap<u32, u32>,
}

impl Cover {
    fn add(&mut self, mask: u32) {
        if self.overlap {
            *self.by_mask.entry(mask).or_insert(0) += 1;
        } else {
            let c = mask.trailing_zeros() as usize;
            self.by_class[c] += 1;
            if self.by_class[c] == self.need[c] {
                self.satisfied += 1;
            }
        }
    }

    fn remove(&mut self, mask: u32) {
        if self.overlap {
            let e = self.by_mask.get_mut(&mask).expect("mask present");
            *e -= 1;
            if *e == 0 {
                self.by_mask.remove(&mask);
            }
        } else {
            let c = mask.trailing_zeros() as usize;
            if self.by_class[c] == self.need[c] {
                self.satisfied -= 1;
            }
            self.by_class[c] -= 1;
        }
    }

    fn covers(&self) -> bool {
        if !self.overlap {
            return self.satisfied == self.need.len();
        }
        let k = self.need.len();
        (1u32..1 << k).all(|set| {
            let demand: u32 = (0..k).filter(|c| set >> c & 1 == 1).map(|c| self.need[c]).sum();
            let supply: u32 = self.by_mask.iter().filter(|(m, _)| *m & set != 0).map(|(_, n)| n).sum();
            supply >= demand
        })
    }
}

/// All minimal intervals of `doc` that contain every query word, where
/// `word_positions[i]` lists the positions at which word `i` occurs. A single
/// position fills at most one word. Returns nothing when a word is absent.
pub fn minimal_intervals(doc: DocId, word_positions: &[Vec<u32>]) -> Vec<Interval> {
    let n = word_positions.len();
    if n == 0 || word_positions.iter().any(Vec::is_empty) {
        return Vec::new();
    }
    let mut classes: Vec<(Vec<u32>, u32)> = Vec::new();
    for positions in word_positions {
        let mut ps = positions.clone();
        ps.sort_unstable();
        ps.dedup();
        match classes.iter_mut().find(|c| c.0 == ps) {
            Some(c) => c.1 += 1,
            None => classes.push((ps, 1)),
        }
    }
    assert!(classes.len() <= 31, "too many distinct query words");
    let mut events: Vec<(u32, u32)> = classes
        .iter()
        .enumerate()
        .flat_map(|(c, (ps, _))| ps.iter().map(move |&p| (p, 1u32 << c)))
        .collect();
    events.sort_unstable();
    let mut merged: Vec<(u32, u32)> = Vec::with_capacity(events.len());
    for (p, m) in events {
        match merged.last_mut() {
            Some(last) if last.0 == p => last.1 |= m,
            _ => merged.push((p, m)),
        }
    }
    let total: u32 = classes.iter().map(|c| c.1).sum();
    if (merged.len() as u32) < total {
        return Vec::new();
    }
    let mut cover = Cover {
        need: classes.iter().map(|c| c.1).collect(),
        overlap: merged.iter().any(|e| e.1.count_ones() > 1),
        by_class: vec![0; classes.len()],
        satisfied: 0,
        by_mask: HashMap::new(),
    };
    let mut out = Vec::new();
    let mut left = 0usize;
    let mut prev_left: Option<usize> = None;
    for right in 0..merged.len() {
        cover.add(merged[right].1);
        if !cover.covers() {
            continue;
        }
        loop {
            cover.remove(merged[left].1);
            if cover.covers() {
                left += 1;
            } else {
                cover.add(merged[left].1);
                break;
            }
        }
        if prev_left != Some(left) {
            out.push(Interval { doc, p: merged[left].0, q: merged[right].0, n_i: n as u32 });
        }
        prev_left = Some(left);
    }
    out
}
