//! Label-preserving automorphisms.
//!
//! An automorphism restricts to label isomorphisms between components, so
//! the group is stored as the list of all isomorphisms from each component
//! onto each other component. Isomorphisms are found by backtracking over
//! the image of the component basepoint, extending along a BFS order and
//! pruning with colour refinement. In a reduced labelling every extension
//! step is forced.

use std::collections::HashMap;

use crate::error::{Error, Result};
use crate::graph::{EdgeId, LabelledGraph, Step, VertexId};
use crate::word::Letter;

/// A label-preserving automorphism as a vertex bijection plus edge bijection.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Automorphism {
    pub vertex_map: Vec<VertexId>,
    pub edge_map: Vec<EdgeId>,
}

impl Automorphism {
    pub fn identity(g: &LabelledGraph) -> Self {
        Automorphism {
            vertex_map: (0..g.num_vertices()).collect(),
            edge_map: (0..g.num_edges()).collect(),
        }
    }

    pub fn is_identity(&self) -> bool {
        self.vertex_map.iter().enumerate().all(|(i, &v)| i == v)
            && self.edge_map.iter().enumerate().all(|(i, &e)| i == e)
    }

    /// `self ∘ other`
    pub fn compose(&self, other: &Automorphism) -> Automorphism {
        Automorphism {
            vertex_map: other
                .vertex_map
                .iter()
                .map(|&v| self.vertex_map[v])
                .collect(),
            edge_map: other.edge_map.iter().map(|&e| self.edge_map[e]).collect(),
        }
    }

    pub fn inverse(&self) -> Automorphism {
        let mut vm = vec![0; self.vertex_map.len()];
        for (i, &v) in self.vertex_map.iter().enumerate() {
            vm[v] = i;
        }
        let mut em = vec![0; self.edge_map.len()];
        for (i, &e) in self.edge_map.iter().enumerate() {
            em[e] = i;
        }
        Automorphism {
            vertex_map: vm,
            edge_map: em,
        }
    }

    /// Checks bijectivity and preservation of incidence, orientation and labels.
    pub fn is_valid(&self, g: &LabelledGraph) -> bool {
        if self.vertex_map.len() != g.num_vertices() || self.edge_map.len() != g.num_edges() {
            return false;
        }
        let bij = |m: &[usize]| {
            let mut seen = vec![false; m.len()];
            m.iter()
                .all(|&x| x < m.len() && !std::mem::replace(&mut seen[x], true))
        };
        bij(&self.vertex_map)
            && bij(&self.edge_map)
            && g.edges().iter().enumerate().all(|(i, e)| {
                let f = g.edge(self.edge_map[i]);
                f.label == e.label
                    && f.src == self.vertex_map[e.src]
                    && f.dst == self.vertex_map[e.dst]
            })
    }

    pub fn apply_step(&self, s: Step) -> Step {
        Step {
            edge: self.edge_map[s.edge],
            forward: s.forward,
        }
    }
}

/// A label isomorphism from one component onto another.
#[derive(Debug, Clone)]
pub struct ComponentIso {
    pub target: usize,
    /// Image of each vertex of the source component (indexed by vertex id,
    /// `usize::MAX` outside the component).
    pub vertex_map: Vec<VertexId>,
}

/// The automorphism group, stored through component isomorphisms.
#[derive(Debug, Clone)]
pub struct AutomorphismGroup {
    isos: Vec<Vec<ComponentIso>>,
    orbit: Vec<usize>,
}

impl AutomorphismGroup {
    /// Orbit identifier of `v`; two vertices share it iff some automorphism
    /// maps one to the other.
    pub fn orbit(&self, v: VertexId) -> usize {
        self.orbit[v]
    }

    pub fn orbits(&self) -> &[usize] {
        &self.orbit
    }

    /// Isomorphisms out of component `c` (including the identity onto itself).
    pub fn isos_from(&self, c: usize) -> &[ComponentIso] {
        &self.isos[c]
    }

    /// Group order, saturating at `u128::MAX`.
    pub fn order(&self) -> u128 {
        // components are grouped into isomorphism classes; within a class of
        // size m with k self-isomorphisms each, the order is m! * k^m
        let mut seen = vec![false; self.isos.len()];
        let mut total: u128 = 1;
        for c in 0..self.isos.len() {
            if seen[c] {
                continue;
            }
            let class: Vec<usize> = {
                let mut t: Vec<usize> = self.isos[c].iter().map(|i| i.target).collect();
                t.sort_unstable();
                t.dedup();
                t
            };
            for &d in &class {
                seen[d] = true;
            }
            let selfs = self.isos[c].iter().filter(|i| i.target == c).count() as u128;
            let m = class.len() as u128;
            for i in 1..=m {
                total = total.saturating_mul(i);
            }
            for _ in 0..m {
                total = total.saturating_mul(selfs);
            }
        }
        total
    }

    /// Enumerates every automorphism; fails if there are more than `limit`.
    pub fn elements(&self, g: &LabelledGraph, limit: usize) -> Result<Vec<Automorphism>> {
        if self.order() > limit as u128 {
            return Err(Error::Resource(format!(
                "automorphism group has order {} > {limit}",
                self.order()
            )));
        }
        let nc = self.isos.len();
        let mut out = Vec::new();
        let mut choice: Vec<Option<&ComponentIso>> = vec![None; nc];
        let mut used = vec![false; nc];
        self.extend(g, 0, &mut choice, &mut used, &mut out);
        Ok(out)
    }

    fn extend<'a>(
        &'a self,
        g: &LabelledGraph,
        c: usize,
        choice: &mut Vec<Option<&'a ComponentIso>>,
        used: &mut Vec<bool>,
        out: &mut Vec<Automorphism>,
    ) {
        if c == self.isos.len() {
            let mut vm = vec![0; g.num_vertices()];
            for iso in choice.iter().flatten() {
                for (v, &w) in iso.vertex_map.iter().enumerate() {
                    if w != usize::MAX {
                        vm[v] = w;
                    }
                }
            }
            out.push(Automorphism {
                edge_map: edge_map_for(g, &vm),
                vertex_map: vm,
            });
            return;
        }
        for iso in &self.isos[c] {
            if used[iso.target] {
                continue;
            }
            used[iso.target] = true;
            choice[c] = Some(iso);
            self.extend(g, c + 1, choice, used, out);
            used[iso.target] = false;
        }
        choice[c] = None;
    }
}

/// Matches edges under a vertex map; parallel edges with equal labels are
/// matched in id order.
fn edge_map_for(g: &LabelledGraph, vm: &[VertexId]) -> Vec<EdgeId> {
    let mut buckets: HashMap<(usize, usize, usize), Vec<EdgeId>> = HashMap::new();
    for (i, e) in g.edges().iter().enumerate() {
        buckets
            .entry((e.src, e.dst, e.label.0))
            .or_default()
            .push(i);
    }
    let mut taken: HashMap<(usize, usize, usize), usize> = HashMap::new();
    g.edges()
        .iter()
        .map(|e| {
            let key = (vm[e.src], vm[e.dst], e.label.0);
            let k = taken.entry(key).or_insert(0);
            let img = buckets[&key][*k];
            *k += 1;
            img
        })
        .collect()
}

/// Colour refinement on the labelled graph: vertices with different final
/// colours are in different orbits.
fn refine_colours(g: &LabelledGraph) -> Vec<usize> {
    let n = g.num_vertices();
    let mut colour = vec![0usize; n];
    let mut classes = 1;
    loop {
        let mut sigs: Vec<(usize, Vec<(Letter, usize)>)> = Vec::with_capacity(n);
        for v in 0..n {
            let mut nb: Vec<(Letter, usize)> = g
                .incident(v)
                .iter()
                .map(|&s| (g.step_letter(s), colour[g.step_target(s)]))
                .collect();
            nb.sort_unstable();
            sigs.push((colour[v], nb));
        }
        let mut ids: HashMap<&(usize, Vec<(Letter, usize)>), usize> = HashMap::new();
        let mut sorted: Vec<&(usize, Vec<(Letter, usize)>)> = sigs.iter().collect();
        sorted.sort();
        for s in sorted {
            let k = ids.len();
            ids.entry(s).or_insert(k);
        }
        let next: Vec<usize> = sigs.iter().map(|s| ids[s]).collect();
        let new_classes = ids.len();
        colour = next;
        if new_classes == classes {
            return colour;
        }
        classes = new_classes;
    }
}

struct Matcher<'a> {
    g: &'a LabelledGraph,
    colour: &'a [usize],
    order: Vec<VertexId>,
    parent: Vec<Option<Step>>,
    map: Vec<VertexId>,
    inv: Vec<VertexId>,
    used: Vec<bool>,
}

impl Matcher<'_> {
    fn counts(&self, u: VertexId, v: VertexId) -> Vec<(Letter, usize)> {
        // multiset of letters on steps from u to v
        let mut c: Vec<(Letter, usize)> = Vec::new();
        for &s in self.g.incident(u) {
            if self.g.step_target(s) == v {
                let l = self.g.step_letter(s);
                match c.iter_mut().find(|x| x.0 == l) {
                    Some(x) => x.1 += 1,
                    None => c.push((l, 1)),
                }
            }
        }
        c.sort_unstable();
        c
    }

    fn consistent(&self, k: usize, w: VertexId) -> bool {
        let v = self.order[k];
        if self.colour[v] != self.colour[w] || self.used[w] {
            return false;
        }
        if self.counts(v, v) != self.counts(w, w) {
            return false;
        }
        for &s in self.g.incident(v) {
            let x = self.g.step_target(s);
            if x != v
                && self.map[x] != usize::MAX
                && self.counts(x, v) != self.counts(self.map[x], w)
            {
                return false;
            }
        }
        for &s in self.g.incident(w) {
            let y = self.g.step_target(s);
            if y != w && self.used[y] && self.counts(self.inv[y], v) != self.counts(y, w) {
                return false;
            }
        }
        true
    }

    fn search(&mut self, k: usize, found: &mut Vec<Vec<VertexId>>) {
        if k == self.order.len() {
            found.push(self.map.clone());
            return;
        }
        let v = self.order[k];
        let s = self.parent[v].expect("non-root vertex has a parent step");
        let p = self.g.step_source(s);
        let letter = self.g.step_letter(s);
        let img = self.map[p];
        let candidates: Vec<VertexId> = self
            .g
            .incident(img)
            .iter()
            .filter(|&&t| self.g.step_letter(t) == letter)
            .map(|&t| self.g.step_target(t))
            .collect();
        let mut tried: Vec<VertexId> = Vec::new();
        for w in candidates {
            if tried.contains(&w) || !self.consistent(k, w) {
                continue;
            }
            tried.push(w);
            self.map[v] = w;
            self.inv[w] = v;
            self.used[w] = true;
            self.search(k + 1, found);
            self.used[w] = false;
            self.map[v] = usize::MAX;
        }
    }
}

fn bfs_order(g: &LabelledGraph, root: VertexId) -> (Vec<VertexId>, Vec<Option<Step>>) {
    let mut order = vec![root];
    let mut parent = vec![None; g.num_vertices()];
    let mut seen = vec![false; g.num_vertices()];
    seen[root] = true;
    let mut i = 0;
    while i < order.len() {
        let v = order[i];
        i += 1;
        for &s in g.incident(v) {
            let w = g.step_target(s);
            if !seen[w] {
                seen[w] = true;
                parent[w] = Some(s);
                order.push(w);
            }
        }
    }
    (order, parent)
}

/// Computes the automorphism group through component isomorphisms.
pub fn automorphism_group(g: &LabelledGraph) -> AutomorphismGroup {
    let colour = refine_colours(g);
    let comps = g.components();
    let sizes: Vec<(usize, usize)> = comps
        .iter()
        .map(|c| {
            let edges = c
                .vertices
                .iter()
                .map(|&v| g.incident(v).len())
                .sum::<usize>();
            (c.vertices.len(), edges)
        })
        .collect();
    let mut isos = Vec::with_capacity(comps.len());
    for (ci, c) in comps.iter().enumerate() {
        let (order, parent) = bfs_order(g, c.basepoint);
        let mut list = Vec::new();
        for (di, d) in comps.iter().enumerate() {
            if sizes[ci] != sizes[di] {
                continue;
            }
            for &w in &d.vertices {
                if colour[w] != colour[c.basepoint] {
                    continue;
                }
                let mut m = Matcher {
                    g,
                    colour: &colour,
                    order: order.clone(),
                    parent: parent.clone(),
                    map: vec![usize::MAX; g.num_vertices()],
                    inv: vec![usize::MAX; g.num_vertices()],
                    used: vec![false; g.num_vertices()],
                };
                if !m.consistent(0, w) {
                    continue;
                }
                m.map[c.basepoint] = w;
                m.inv[w] = c.basepoint;
                m.used[w] = true;
                let mut found = Vec::new();
                m.search(1, &mut found);
                list.extend(found.into_iter().map(|vertex_map| ComponentIso {
                    target: di,
                    vertex_map,
                }));
            }
        }
        isos.push(list);
    }
    let mut uf: Vec<usize> = (0..g.num_vertices()).collect();
    fn find(uf: &mut [usize], x: usize) -> usize {
        let mut r = x;
        while uf[r] != r {
            r = uf[r];
        }
        let mut y = x;
        while uf[y] != r {
            let next = uf[y];
            uf[y] = r;
            y = next;
        }
        r
    }
    for list in &isos {
        for iso in list {
            for (v, &w) in iso.vertex_map.iter().enumerate() {
                if w != usize::MAX {
                    let (a, b) = (find(&mut uf, v), find(&mut uf, w));
                    if a != b {
                        uf[a.max(b)] = a.min(b);
                    }
                }
            }
        }
    }
    let orbit = (0..g.num_vertices()).map(|v| find(&mut uf, v)).collect();
    AutomorphismGroup { isos, orbit }
}

/// The full group of label-preserving automorphisms. Parallel equally
/// labelled edges (only possible in non-reduced labellings) are matched in
/// id order, so automorphisms differing only by permuting them are not
/// listed separately.
pub fn label_automorphisms(g: &LabelledGraph) -> Result<Vec<Automorphism>> {
    automorphism_group(g).elements(g, 1 << 20)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::testutil::*;
    use crate::word::Alphabet;

    fn st() -> Alphabet {
        Alphabet::new(&["s", "t"]).unwrap()
    }

    /// All vertex permutations that preserve the labelled edge multiset.
    fn brute_force(g: &LabelledGraph) -> Vec<Vec<usize>> {
        fn perms(n: usize) -> Vec<Vec<usize>> {
            if n == 0 {
                return vec![vec![]];
            }
            let mut out = Vec::new();
            for p in perms(n - 1) {
                for i in 0..n {
                    let mut q = p.clone();
                    q.insert(i, n - 1);
                    out.push(q);
                }
            }
            out
        }
        let mut key: Vec<(usize, usize, usize)> = g
            .edges()
            .iter()
            .map(|e| (e.src, e.dst, e.label.0))
            .collect();
        key.sort_unstable();
        perms(g.num_vertices())
            .into_iter()
            .filter(|p| {
                let mut k: Vec<(usize, usize, usize)> = g
                    .edges()
                    .iter()
                    .map(|e| (p[e.src], p[e.dst], e.label.0))
                    .collect();
                k.sort_unstable();
                k == key
            })
            .collect()
    }

    #[test]
    fn contains_identity() {
        let a = st();
        let g = graph(&a, 3, &[(0, 1, "s"), (1, 2, "t")]);
        let auts = label_automorphisms(&g).unwrap();
        assert!(auts.iter().any(|x| x.is_identity()));
    }

    #[test]
    fn two_copies_swap() {
        let a = st();
        let g = graph(&a, 4, &[(0, 1, "s"), (1, 0, "t"), (2, 3, "s"), (3, 2, "t")]);
        let auts = label_automorphisms(&g).unwrap();
        let mut ours: Vec<Vec<usize>> = auts.iter().map(|x| x.vertex_map.clone()).collect();
        ours.sort();
        let mut bf = brute_force(&g);
        bf.sort();
        assert_eq!(ours, bf);
        assert_eq!(ours.len(), 2);
        let grp = automorphism_group(&g);
        assert_eq!(grp.orbit(0), grp.orbit(2));
        assert_ne!(grp.orbit(0), grp.orbit(1));
    }

    #[test]
    fn distinct_labels_trivial() {
        let a = st();
        let g = cycle(&a, &["s", "t"]);
        assert_eq!(brute_force(&g).len(), 1);
        assert_eq!(label_automorphisms(&g).unwrap().len(), 1);
    }

    #[test]
    fn periodic_cycle_rotation() {
        let a = st();
        let g = cycle(&a, &["s", "t", "s", "t"]);
        let auts = label_automorphisms(&g).unwrap();
        assert_eq!(auts.len(), 2);
        assert!(auts.iter().all(|x| x.is_valid(&g)));
    }

    #[test]
    fn group_closed_under_composition() {
        let a = st();
        let g = graph(
            &a,
            6,
            &[
                (0, 1, "s"),
                (1, 0, "t"),
                (2, 3, "s"),
                (3, 2, "t"),
                (4, 5, "s"),
                (5, 4, "t"),
            ],
        );
        let auts = label_automorphisms(&g).unwrap();
        assert_eq!(auts.len(), 6);
        for x in &auts {
            assert!(auts.contains(&x.inverse()));
            for y in &auts {
                assert!(auts.contains(&x.compose(y)));
            }
        }
    }

    #[test]
    fn non_reduced_backtracking_matches_brute_force() {
        let a = st();
        // a vertex with two outgoing s edges forces branching
        let g = graph(&a, 4, &[(0, 1, "s"), (0, 2, "s"), (1, 3, "t"), (2, 3, "t")]);
        let mut ours: Vec<Vec<usize>> = label_automorphisms(&g)
            .unwrap()
            .iter()
            .map(|x| x.vertex_map.clone())
            .collect();
        ours.sort();
        let mut bf = brute_force(&g);
        bf.sort();
        assert_eq!(ours, bf);
        assert_eq!(ours.len(), 2);
    }
}
