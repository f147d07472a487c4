//! Relators of a labelled graph, greedy Dehn reduction, injectivity checks
//! and the abelianization rank.

use std::collections::HashMap;

use rayon::prelude::*;

use crate::cancel::enumerate_cycles;
use crate::error::{Error, Result};
use crate::graph::LabelledGraph;
use crate::ripssegev::ProductSets;
use crate::word::{Letter, Word};

/// Canonical labels of simple closed paths.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RelatorSet {
    pub relators: Vec<Word>,
    /// The cycle enumeration completed within its cap.
    pub exhaustive: bool,
    /// The graph was verified to satisfy the small cancellation condition
    /// under which reduction to a nonempty word proves nontriviality.
    pub small_cancellation: bool,
    num_gens: usize,
    /// Windows of length `⌊|r|/2⌋ + 1` of every cyclic conjugate of every
    /// relator and its inverse, grouped by window length: window ↦
    /// (relator word rotated to start at the window).
    windows: Vec<(usize, HashMap<Vec<Letter>, Vec<Letter>>)>,
}

/// Minimal rotation of the smaller of `w` and `w⁻¹` (both rotated minimally).
pub fn canonical_relator(w: &Word) -> Word {
    let min_rot = |w: &Word| (0..w.len().max(1)).map(|k| w.rotate(k)).min().unwrap();
    min_rot(w).min(min_rot(&w.inverse()))
}

impl RelatorSet {
    pub fn new(relators: Vec<Word>, num_gens: usize, exhaustive: bool) -> Self {
        let mut rs: Vec<Word> = relators
            .iter()
            .map(|r| r.cyclic_reduce())
            .filter(|r| !r.is_empty())
            .map(|r| canonical_relator(&r))
            .collect();
        rs.sort();
        rs.dedup();
        let mut by_len: HashMap<usize, HashMap<Vec<Letter>, Vec<Letter>>> = HashMap::new();
        for r in &rs {
            let m = r.len() / 2 + 1;
            for w in [r.clone(), r.inverse()] {
                for k in 0..w.len() {
                    let rot = w.rotate(k);
                    if m <= rot.len() {
                        by_len
                            .entry(m)
                            .or_default()
                            .entry(rot.letters()[..m].to_vec())
                            .or_insert_with(|| rot.letters().to_vec());
                    }
                }
            }
        }
        let mut windows: Vec<_> = by_len.into_iter().collect();
        windows.sort_by_key(|w| w.0);
        RelatorSet {
            relators: rs,
            exhaustive,
            small_cancellation: false,
            num_gens,
            windows,
        }
    }

    pub fn with_small_cancellation(mut self, verified: bool) -> Self {
        self.small_cancellation = verified;
        self
    }

    pub fn len(&self) -> usize {
        self.relators.len()
    }

    pub fn is_empty(&self) -> bool {
        self.relators.is_empty()
    }

    pub fn to_text(&self, alphabet: &crate::word::Alphabet) -> String {
        let mut s = format!(
            "relators {} {}\n",
            self.relators.len(),
            if self.exhaustive {
                "exhaustive"
            } else {
                "truncated"
            }
        );
        for r in &self.relators {
            s.push_str(&format!("relator {}\n", r.display(alphabet)));
        }
        s
    }
}

/// Labels of simple closed paths, both orientations and all rotations
/// identified. If there are more than `cycle_cap` cycles the set is
/// truncated and flagged.
pub fn enumerate_relators(g: &LabelledGraph, cycle_cap: usize) -> RelatorSet {
    let list = enumerate_cycles(g, cycle_cap);
    let words = list
        .cycles
        .iter()
        .map(|c| g.label_unchecked(&c.steps))
        .collect();
    RelatorSet::new(words, g.alphabet().len(), list.exhaustive)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DehnStatus {
    Trivial,
    Nontrivial,
    /// Nonempty fixpoint, but the relator set is truncated or the small
    /// cancellation hypothesis is unverified.
    Undecided,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DehnResult {
    pub word: Word,
    pub status: DehnStatus,
}

/// Greedy Dehn reduction on the cyclic word: whenever more than half of a
/// relator occurs as a cyclic subword it is replaced by the inverse of the
/// shorter complement. The fixpoint is cyclically reduced and represents a
/// conjugate of the input.
pub fn dehn_reduce(word: &Word, relators: &RelatorSet) -> DehnResult {
    let mut w = word.cyclic_reduce();
    'outer: while !w.is_empty() {
        let n = w.len();
        let letters = w.letters();
        for (m, table) in &relators.windows {
            if *m > n {
                break;
            }
            let mut window: Vec<Letter> = Vec::with_capacity(*m);
            for i in 0..n {
                window.clear();
                window.extend((0..*m).map(|k| letters[(i + k) % n]));
                if let Some(r) = table.get(&window) {
                    // w ~ u z and r ~ u v with |v| < |u|, so w ~ v⁻¹ z
                    let mut out: Vec<Letter> = r[*m..].iter().rev().map(|l| l.inv()).collect();
                    out.extend((*m..n).map(|k| letters[(i + k) % n]));
                    w = Word::from_letters(out).cyclic_reduce();
                    continue 'outer;
                }
            }
        }
        break;
    }
    let status = if w.is_empty() {
        DehnStatus::Trivial
    } else if relators.exhaustive && relators.small_cancellation {
        DehnStatus::Nontrivial
    } else {
        DehnStatus::Undecided
    };
    DehnResult { word: w, status }
}

/// Pairwise distinctness in the group of the listed elements of `A` and of
/// `B`, decided by Dehn reduction of `x y⁻¹`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct InjectivityVerdict {
    /// Index pairs into the flattened `A` list whose quotient reduced to 1.
    pub a_collisions: Vec<(usize, usize)>,
    pub b_collisions: Vec<(usize, usize)>,
    pub a_undecided: Vec<(usize, usize)>,
    pub b_undecided: Vec<(usize, usize)>,
    /// Number of classes after merging collisions.
    pub a_image: usize,
    pub b_image: usize,
}

impl InjectivityVerdict {
    pub fn injective(&self) -> bool {
        self.a_collisions.is_empty() && self.b_collisions.is_empty()
    }

    pub fn decided(&self) -> bool {
        self.a_undecided.is_empty() && self.b_undecided.is_empty()
    }
}

fn pairwise(
    list: &[Word],
    relators: &RelatorSet,
) -> (Vec<(usize, usize)>, Vec<(usize, usize)>, usize) {
    let pairs: Vec<(usize, usize)> = (0..list.len())
        .flat_map(|i| (i + 1..list.len()).map(move |j| (i, j)))
        .collect();
    let status: Vec<DehnStatus> = pairs
        .par_iter()
        .map(|&(i, j)| dehn_reduce(&list[i].concat(&list[j].inverse()), relators).status)
        .collect();
    let mut coll = Vec::new();
    let mut und = Vec::new();
    let mut class: Vec<usize> = (0..list.len()).collect();
    for (&(i, j), s) in pairs.iter().zip(status) {
        match s {
            DehnStatus::Trivial => {
                coll.push((i, j));
                let (a, b) = (class[i], class[j]);
                for c in class.iter_mut() {
                    if *c == b {
                        *c = a;
                    }
                }
            }
            DehnStatus::Undecided => und.push((i, j)),
            DehnStatus::Nontrivial => {}
        }
    }
    class.sort_unstable();
    class.dedup();
    (coll, und, class.len())
}

/// Checks every pair of positions within the flattened `A` and within `B`.
pub fn check_injectivity(sets: &ProductSets, relators: &RelatorSet) -> InjectivityVerdict {
    let a: Vec<Word> = sets.a_sets.iter().flatten().cloned().collect();
    let (a_collisions, a_undecided, a_image) = pairwise(&a, relators);
    let (b_collisions, b_undecided, b_image) = pairwise(&sets.b_set, relators);
    InjectivityVerdict {
        a_collisions,
        b_collisions,
        a_undecided,
        b_undecided,
        a_image,
        b_image,
    }
}

/// Rank of the free part of the abelianization: number of generators minus
/// the rank of the exponent-sum matrix of the relators.
pub fn abelianization_rank(relators: &RelatorSet) -> Result<usize> {
    let cols = relators.num_gens;
    let mut rows: Vec<Vec<i128>> = relators
        .relators
        .iter()
        .map(|r| r.exponent_sums(cols).into_iter().map(i128::from).collect())
        .filter(|r: &Vec<i128>| r.iter().any(|&x| x != 0))
        .collect();
    let mut rank = 0;
    for col in 0..cols {
        let Some(piv) = (rank..rows.len()).find(|&i| rows[i][col] != 0) else {
            continue;
        };
        rows.swap(rank, piv);
        let p = rows[rank].clone();
        for row in rows.iter_mut().skip(rank + 1) {
            let f = row[col];
            if f == 0 {
                continue;
            }
            for k in 0..cols {
                row[k] = row[k]
                    .checked_mul(p[col])
                    .and_then(|x| f.checked_mul(p[k]).and_then(|y| x.checked_sub(y)))
                    .ok_or_else(|| Error::Resource("abelianization entries overflow".into()))?;
            }
            let g = row.iter().fold(0i128, |g, &x| gcd(g, x.abs()));
            if g > 1 {
                row.iter_mut().for_each(|x| *x /= g);
            }
        }
        rank += 1;
    }
    Ok(cols - rank)
}

fn gcd(a: i128, b: i128) -> i128 {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}
