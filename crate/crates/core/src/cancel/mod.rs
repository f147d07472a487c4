//! Piece enumeration and exact small cancellation checks.

pub mod aut;
pub mod cycles;
pub mod fiber;
pub mod pieces;

use std::fmt::Write as _;

use num_rational::Ratio;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::graph::{LabelledGraph, Path};
use crate::word::LengthFunction;

pub use aut::{automorphism_group, label_automorphisms, Automorphism, AutomorphismGroup};
pub use cycles::{enumerate_cycles, simple_cycles, CycleList};
pub use fiber::FiberSquare;
pub use pieces::{
    cycle_through, enumerate_piece_paths, shortest_cycle_through, PieceIndex, PieceOccurrence,
};

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Violation {
    /// `ℓ(piece) ≥ λ · ℓ(cycle)` for a simple closed path through the piece.
    Metric {
        piece: Path,
        cycle: Path,
        piece_len: usize,
        cycle_len: usize,
        /// Set when the cycle length read linearly from its least favourable
        /// starting vertex (one more syllable) would not give a violation.
        linear_sensitive: bool,
    },
    /// A simple closed path that is a concatenation of fewer than `p` pieces.
    PieceCount { cycle: Path, pieces: Vec<Path> },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConditionVerdict {
    pub condition: String,
    pub violations: Vec<Violation>,
}

impl ConditionVerdict {
    pub fn satisfied(&self) -> bool {
        self.violations.is_empty()
    }

    /// One header line, then one line per violation.
    pub fn report(&self, g: &LabelledGraph) -> String {
        let a = g.alphabet();
        let mut out = format!(
            "condition {} {} violations {}\n",
            self.condition,
            if self.satisfied() {
                "satisfied"
            } else {
                "violated"
            },
            self.violations.len()
        );
        for v in &self.violations {
            match v {
                Violation::Metric {
                    piece,
                    cycle,
                    piece_len,
                    cycle_len,
                    linear_sensitive,
                } => {
                    let _ = writeln!(
                        out,
                        "metric piece {} label {} len {} cycle {} label {} len {}{}",
                        piece.to_text(),
                        g.label_unchecked(&piece.steps).display(a),
                        piece_len,
                        cycle.to_text(),
                        g.label_unchecked(&cycle.steps).display(a),
                        cycle_len,
                        if *linear_sensitive {
                            " linear-sensitive"
                        } else {
                            ""
                        }
                    );
                }
                Violation::PieceCount { cycle, pieces } => {
                    let ps: Vec<String> = pieces.iter().map(|p| p.to_text()).collect();
                    let _ = writeln!(
                        out,
                        "count cycle {} label {} pieces {} {}",
                        cycle.to_text(),
                        g.label_unchecked(&cycle.steps).display(a),
                        pieces.len(),
                        ps.join(" ")
                    );
                }
            }
        }
        out
    }
}

#[derive(Debug, Clone, Default)]
pub struct MetricOptions {
    /// Return after the first violation found.
    pub stop_at_first: bool,
    /// Enumerate pieces only up to this `ℓ` instead of `⌈λ·|V|⌉`.
    pub piece_cap: Option<usize>,
}

/// `Gr′_ℓ(λ)`: every piece lying on a simple closed path `γ` has
/// `ℓ(piece) < λ·ℓ(γ)`. With the free product length this is the
/// `Gr′*(λ)` condition.
pub fn check_gr_metric(
    g: &LabelledGraph,
    lambda: Ratio<u64>,
    lf: &LengthFunction,
) -> Result<ConditionVerdict> {
    check_gr_metric_with(g, lambda, lf, &MetricOptions::default())
}

pub fn check_gr_metric_with(
    g: &LabelledGraph,
    lambda: Ratio<u64>,
    lf: &LengthFunction,
    opts: &MetricOptions,
) -> Result<ConditionVerdict> {
    if *lambda.numer() == 0 {
        return Err(Error::InvalidCoefficients("λ must be positive".into()));
    }
    let index = PieceIndex::new(g)?;
    let (num, den) = (*lambda.numer() as u128, *lambda.denom() as u128);
    // simple cycles have ℓ ≤ |V|; a piece reaching ⌈λ|V|⌉ on a cycle already
    // violates, and a longer one has such a prefix
    let cap = opts
        .piece_cap
        .unwrap_or_else(|| (num * g.num_vertices() as u128).div_ceil(den).max(1) as usize);
    let check = |occ: &PieceOccurrence| -> Option<Violation> {
        // each undirected path is checked in one orientation
        let rev = occ.path.reversed(g);
        if (rev.start, &rev.steps) < (occ.path.start, &occ.path.steps) {
            return None;
        }
        let (c, cycle) = cycle_through(g, &occ.path, lf)?;
        let p = occ.length as u128;
        if p * den < num * c as u128 {
            return None;
        }
        let linear_sensitive =
            !matches!(lf, LengthFunction::WordLength) && p * den < num * (c as u128 + 1);
        Some(Violation::Metric {
            piece: occ.path.clone(),
            cycle,
            piece_len: occ.length,
            cycle_len: c,
            linear_sensitive,
        })
    };
    let violations = pieces::scan_pieces(g, &index, cap, lf, opts.stop_at_first, check);
    Ok(ConditionVerdict {
        condition: format!("Gr'({}) {}", lambda, lf.name()),
        violations,
    })
}

/// `Gr(p)`: no simple closed path is a concatenation of fewer than `p`
/// pieces. Fails with a resource error if there are more than `cycle_cap`
/// simple closed paths.
pub fn check_gr_p(g: &LabelledGraph, p: usize, cycle_cap: usize) -> Result<ConditionVerdict> {
    if p < 2 {
        return Err(Error::InvalidCoefficients("p must be at least 2".into()));
    }
    let index = PieceIndex::new(g)?;
    let cycles = simple_cycles(g, cycle_cap)?;
    let violations = cycles
        .par_iter()
        .filter_map(|c| {
            let (k, pieces) = min_piece_cover(g, &index, c)?;
            (k < p).then(|| Violation::PieceCount {
                cycle: c.clone(),
                pieces,
            })
        })
        .collect();
    Ok(ConditionVerdict {
        condition: format!("Gr({p})"),
        violations,
    })
}

/// Minimal number of pieces whose concatenation is the closed path, with
/// one optimal decomposition; `None` if some edge is not a piece.
pub fn min_piece_cover(
    g: &LabelledGraph,
    index: &PieceIndex,
    cycle: &Path,
) -> Option<(usize, Vec<Path>)> {
    let n = cycle.len();
    let reach = index.cyclic_reach(g, cycle);
    if reach.iter().any(|&r| r == 0) {
        return None;
    }
    if let Some(i) = reach.iter().position(|&r| r == n) {
        return Some((1, vec![cycle.rotate(g, i)]));
    }
    // a piece starting at j+1 reaches at least as far as one starting at j,
    // so greedy jumping from a fixed start is optimal for that start
    let mut best: Option<(usize, usize)> = None;
    for i in 0..n {
        let (mut covered, mut k) = (0, 0);
        while covered < n {
            covered += reach[(i + covered) % n];
            k += 1;
            if best.is_some_and(|(b, _)| k >= b) {
                break;
            }
        }
        if covered >= n && best.is_none_or(|(b, _)| k < b) {
            best = Some((k, i));
        }
    }
    let (k, i) = best?;
    let rotated = cycle.rotate(g, i);
    let mut pieces = Vec::with_capacity(k);
    let mut covered = 0;
    while covered < n {
        let len = reach[(i + covered) % n].min(n - covered);
        pieces.push(rotated.subpath(g, covered, len));
        covered += len;
    }
    Some((k, pieces))
}
