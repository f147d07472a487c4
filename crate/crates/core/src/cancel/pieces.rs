//! Piece occurrences and shortest simple cycles through a path.
//!
//! In a reduced labelling an immersion of a labelled path is fixed by the
//! image of its initial vertex, and a component isomorphism is fixed by
//! the image of one vertex. So two immersions starting at `x` and `y` are
//! related by an automorphism iff `x` and `y` share an orbit, and a path
//! from `x` with label `w` is a piece iff `w` can be read from some vertex
//! outside the orbit of `x`. Subpaths of pieces are then pieces, which lets
//! the enumeration prune on the first non-piece prefix.

use std::collections::VecDeque;

use rayon::prelude::*;

use super::aut::{automorphism_group, AutomorphismGroup};
use crate::error::Result;
use crate::graph::{LabelledGraph, Path, Step, VertexId};
use crate::word::{LengthFunction, Letter, Word};

/// An immersed path together with the initial vertices of essentially
/// distinct immersions of its label.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PieceOccurrence {
    pub path: Path,
    pub label: Word,
    /// `ℓ(label)`.
    pub length: usize,
    pub partners: Vec<VertexId>,
}

impl PieceOccurrence {
    /// The `i`-th partner immersion as a path in the graph.
    pub fn partner_path(&self, g: &LabelledGraph, i: usize) -> Path {
        g.read_path(self.partners[i], self.label.letters())
            .expect("partner reads the label")
    }
}

/// Shared lookup data for piece tests on one graph.
#[derive(Debug, Clone)]
pub struct PieceIndex {
    aut: AutomorphismGroup,
    /// Steps grouped by letter: index `2 * gen + inverse`.
    by_letter: Vec<Vec<Step>>,
}

fn letter_slot(l: Letter) -> usize {
    2 * l.gen.0 + l.inverse as usize
}

impl PieceIndex {
    /// Requires a reduced labelling.
    pub fn new(g: &LabelledGraph) -> Result<Self> {
        g.is_reduced_labelling()?;
        Ok(Self::with_group(g, automorphism_group(g)))
    }

    pub fn with_group(g: &LabelledGraph, aut: AutomorphismGroup) -> Self {
        let mut by_letter = vec![Vec::new(); 2 * g.alphabet().len()];
        for v in 0..g.num_vertices() {
            for &s in g.incident(v) {
                by_letter[letter_slot(g.step_letter(s))].push(s);
            }
        }
        PieceIndex { aut, by_letter }
    }

    pub fn group(&self) -> &AutomorphismGroup {
        &self.aut
    }

    /// `(partner start, partner end)` pairs after the first step `s` of a
    /// path from `x`.
    fn first_partners(&self, g: &LabelledGraph, x: VertexId, s: Step) -> Vec<(VertexId, VertexId)> {
        let o = self.aut.orbit(x);
        self.by_letter[letter_slot(g.step_letter(s))]
            .iter()
            .filter(|&&t| self.aut.orbit(g.step_source(t)) != o)
            .map(|&t| (g.step_source(t), g.step_target(t)))
            .collect()
    }

    fn advance(
        g: &LabelledGraph,
        partners: &[(VertexId, VertexId)],
        l: Letter,
    ) -> Vec<(VertexId, VertexId)> {
        partners
            .iter()
            .filter_map(|&(y, e)| g.follow(e, l).map(|t| (y, g.step_target(t))))
            .collect()
    }

    /// Initial vertices of essentially distinct immersions of the label of
    /// a nonempty path.
    pub fn partners(&self, g: &LabelledGraph, path: &Path) -> Vec<VertexId> {
        let Some(&first) = path.steps.first() else {
            return Vec::new();
        };
        let mut cur = self.first_partners(g, path.start, first);
        for &s in &path.steps[1..] {
            if cur.is_empty() {
                break;
            }
            cur = Self::advance(g, &cur, g.step_letter(s));
        }
        cur.into_iter().map(|p| p.0).collect()
    }

    pub fn is_piece(&self, g: &LabelledGraph, path: &Path) -> bool {
        !self.partners(g, path).is_empty()
    }

    /// For each position `i` of a closed path of length `L`, the length of
    /// the longest piece starting at step `i` and running forward around
    /// the path (at most `L`).
    pub fn cyclic_reach(&self, g: &LabelledGraph, cycle: &Path) -> Vec<usize> {
        let n = cycle.len();
        let verts = cycle.vertices(g);
        (0..n)
            .map(|i| {
                let mut cur = self.first_partners(g, verts[i], cycle.steps[i]);
                let mut k = 0;
                while !cur.is_empty() {
                    k += 1;
                    if k == n {
                        break;
                    }
                    cur = Self::advance(g, &cur, g.step_letter(cycle.steps[(i + k) % n]));
                }
                k
            })
            .collect()
    }
}

/// Every piece occurrence `p` with `ℓ(ω(p)) ≤ max_len` that is a simple
/// path or a simple closed path. Other immersed paths never lie on a simple
/// closed path and may be infinite in number, so they are not listed.
/// The order is deterministic: by initial vertex, then by step sequence in
/// depth-first order.
pub fn enumerate_piece_paths(
    g: &LabelledGraph,
    max_len: usize,
    lf: &LengthFunction,
) -> Result<Vec<PieceOccurrence>> {
    let index = PieceIndex::new(g)?;
    Ok(enumerate_with_index(g, &index, max_len, lf))
}

pub(crate) fn enumerate_with_index(
    g: &LabelledGraph,
    index: &PieceIndex,
    max_len: usize,
    lf: &LengthFunction,
) -> Vec<PieceOccurrence> {
    scan_pieces(g, index, max_len, lf, false, |o| Some(o.clone()))
}

/// Applies `f` to every occurrence in enumeration order and keeps the
/// `Some` results; with `stop_at_first` only the first one. Occurrences are
/// not stored.
pub(crate) fn scan_pieces<T: Send>(
    g: &LabelledGraph,
    index: &PieceIndex,
    max_len: usize,
    lf: &LengthFunction,
    stop_at_first: bool,
    f: impl Fn(&PieceOccurrence) -> Option<T> + Sync,
) -> Vec<T> {
    let from = |x: VertexId| -> Vec<T> {
        let mut out = Vec::new();
        let mut visit = |o: &PieceOccurrence| {
            if let Some(t) = f(o) {
                out.push(t);
                stop_at_first
            } else {
                false
            }
        };
        let mut walk = Walk {
            g,
            lf,
            max_len,
            root: x,
            on_path: vec![false; g.num_vertices()],
            steps: Vec::new(),
            visit: &mut visit,
            stopped: false,
        };
        walk.on_path[x] = true;
        for &s in g.incident(x) {
            let partners = index.first_partners(g, x, s);
            walk.extend(s, partners, 0, None);
            if walk.stopped {
                break;
            }
        }
        out
    };
    if stop_at_first {
        (0..g.num_vertices())
            .into_par_iter()
            .find_map_first(|x| from(x).into_iter().next())
            .into_iter()
            .collect()
    } else {
        let per_vertex: Vec<Vec<T>> = (0..g.num_vertices()).into_par_iter().map(from).collect();
        per_vertex.into_iter().flatten().collect()
    }
}

struct Walk<'a> {
    g: &'a LabelledGraph,
    lf: &'a LengthFunction,
    max_len: usize,
    root: VertexId,
    on_path: Vec<bool>,
    steps: Vec<Step>,
    visit: &'a mut dyn FnMut(&PieceOccurrence) -> bool,
    stopped: bool,
}

impl Walk<'_> {
    fn extend(
        &mut self,
        s: Step,
        partners: Vec<(VertexId, VertexId)>,
        len: usize,
        last_block: Option<usize>,
    ) {
        if partners.is_empty() || self.stopped {
            return;
        }
        if self.steps.last().is_some_and(|&l| l.reversed() == s) {
            return;
        }
        let g = self.g;
        let l = g.step_letter(s);
        let block = self.lf.block(l.gen);
        let len = match self.lf {
            LengthFunction::WordLength => len + 1,
            LengthFunction::FreeProduct(_) => len + (last_block != Some(block)) as usize,
        };
        if len > self.max_len {
            return;
        }
        let w = g.step_target(s);
        if w != self.root && self.on_path[w] {
            return;
        }
        self.steps.push(s);
        let path = Path {
            start: self.root,
            steps: self.steps.clone(),
        };
        let mut starts: Vec<VertexId> = partners.iter().map(|p| p.0).collect();
        starts.sort_unstable();
        starts.dedup();
        let occ = PieceOccurrence {
            label: g.label_unchecked(&path.steps),
            path,
            length: len,
            partners: starts,
        };
        self.stopped = (self.visit)(&occ);
        if w != self.root && !self.stopped {
            self.on_path[w] = true;
            for &t in g.incident(w) {
                let next = PieceIndex::advance(g, &partners, g.step_letter(t));
                self.extend(t, next, len, Some(block));
            }
            self.on_path[w] = false;
        }
        self.steps.pop();
    }
}

/// Minimal `ℓ` of a simple closed path containing `occurrence` as a
/// subpath, or `None` if there is none.
pub fn shortest_cycle_through(
    g: &LabelledGraph,
    occurrence: &Path,
    lf: &LengthFunction,
) -> Option<usize> {
    cycle_through(g, occurrence, lf).map(|c| c.0)
}

/// Like [`shortest_cycle_through`], also returning a witnessing cycle that
/// starts with the occurrence.
///
/// The return path from the terminal to the initial vertex avoids the
/// occurrence's interior vertices and edges and is found by 0-1 BFS over
/// states `(vertex, block of last letter)`. A shortest walk in the state
/// graph can be shortcut to a simple path of no larger cost, so the
/// minimum is attained by a simple cycle.
pub fn cycle_through(
    g: &LabelledGraph,
    occurrence: &Path,
    lf: &LengthFunction,
) -> Option<(usize, Path)> {
    if occurrence.is_empty() || !occurrence.is_immersed() {
        return None;
    }
    let verts = occurrence.vertices(g);
    let (s, t) = (verts[0], *verts.last().unwrap());
    if s == t {
        if !occurrence.is_simple(g) {
            return None;
        }
        let c = lf.cyclic_length(&g.label_unchecked(&occurrence.steps));
        return Some((c, occurrence.clone()));
    }
    let n = g.num_vertices();
    let mut blocked = vec![false; n];
    for &v in &verts {
        if std::mem::replace(&mut blocked[v], true) {
            return None;
        }
    }
    blocked[s] = false;
    let mut used_edge = vec![false; g.num_edges()];
    for st in &occurrence.steps {
        used_edge[st.edge] = true;
    }
    let word_len = matches!(lf, LengthFunction::WordLength);
    let nb = match lf {
        LengthFunction::WordLength => 1,
        LengthFunction::FreeProduct(p) => p.num_blocks(),
    };
    let block_of = |st: Step| lf.block(g.step_letter(st).gen);
    let first_block = block_of(occurrence.steps[0]);
    let last_block = block_of(*occurrence.steps.last().unwrap());
    let state = |v: VertexId, b: usize| v * nb + b;
    let mut dist = vec![usize::MAX; n * nb];
    let mut parent: Vec<Option<(usize, Step)>> = vec![None; n * nb];
    let mut dq = VecDeque::new();
    let st0 = state(t, last_block);
    dist[st0] = 0;
    dq.push_back(st0);
    let mut best: Option<(usize, usize)> = None;
    while let Some(cur) = dq.pop_front() {
        let (v, b) = (cur / nb, cur % nb);
        let d = dist[cur];
        if v == s {
            let total = d + (!word_len && b != first_block) as usize;
            if best.is_none_or(|(bd, _)| total < bd) {
                best = Some((total, cur));
            }
            continue;
        }
        for &st in g.incident(v) {
            if used_edge[st.edge] {
                continue;
            }
            let w = g.step_target(st);
            if blocked[w] {
                continue;
            }
            let nbk = block_of(st);
            let cost = if word_len { 1 } else { (nbk != b) as usize };
            let nxt = state(w, nbk);
            if d + cost < dist[nxt] {
                dist[nxt] = d + cost;
                parent[nxt] = Some((cur, st));
                if cost == 0 {
                    dq.push_front(nxt);
                } else {
                    dq.push_back(nxt);
                }
            }
        }
    }
    let (_, end) = best?;
    let mut back = Vec::new();
    let mut cur = end;
    while let Some((p, st)) = parent[cur] {
        back.push(st);
        cur = p;
    }
    back.reverse();
    let mut steps = occurrence.steps.clone();
    steps.extend(back);
    let cycle = Path { start: s, steps };
    debug_assert!(cycle.is_simple(g) && cycle.is_closed(g));
    let c = lf.cyclic_length(&g.label_unchecked(&cycle.steps));
    Some((c, cycle))
}
