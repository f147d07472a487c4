//! The graphical Comerford transform. A finite-index subgroup `H` is given
//! by a transitive action of the generators on the cosets `0..h`. Its
//! Schreier graph `K_H` is relabelled so the `g`-edge leaving coset `v`
//! carries `g@v`; each copy `Γ_v` of `Γ` is relabelled by lifting `Γ → K`
//! to `K_H` with every basepoint sent to `v`, and `Γ_H` is their disjoint
//! union.

use std::fmt::Write as _;

use rayon::prelude::*;

use crate::cancel::{enumerate_piece_paths, PieceIndex};
use crate::error::{Error, Result};
use crate::graph::{Edge, LabelledGraph, Path, VertexId};
use crate::word::{Alphabet, Gen, LengthFunction, Letter, Word};

/// Permutations `σ_g` of `0..h`, one per generator, generating a
/// transitive group. Coset `0` is the subgroup itself.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct CosetAction {
    perms: Vec<Vec<usize>>,
    degree: usize,
}

impl CosetAction {
    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn num_gens(&self) -> usize {
        self.perms.len()
    }

    pub fn perm(&self, g: Gen) -> &[usize] {
        &self.perms[g.0]
    }

    /// The coset reached from `v` by reading `l`.
    pub fn act(&self, v: usize, l: Letter) -> usize {
        let p = &self.perms[l.gen.0];
        if l.inverse {
            p.iter().position(|&x| x == v).expect("permutation")
        } else {
            p[v]
        }
    }

    pub fn act_word(&self, v: usize, w: &Word) -> usize {
        w.letters().iter().fold(v, |c, &l| self.act(c, l))
    }

    /// Conjugate by a relabelling `π` of the cosets: `σ ↦ π σ π⁻¹`.
    pub fn relabel(&self, pi: &[usize]) -> CosetAction {
        let perms = self
            .perms
            .iter()
            .map(|p| {
                let mut q = vec![0; self.degree];
                for v in 0..self.degree {
                    q[pi[v]] = pi[p[v]];
                }
                q
            })
            .collect();
        CosetAction {
            perms,
            degree: self.degree,
        }
    }

    /// The lexicographically least image table over all relabellings.
    pub fn canonical(&self) -> CosetAction {
        let mut best = self.clone();
        for pi in permutations(self.degree) {
            let c = self.relabel(&pi);
            if c.perms < best.perms {
                best = c;
            }
        }
        best
    }

    /// `degree h` followed by one `perm <gen> <images>` line per generator,
    /// images 1-based.
    pub fn to_text(&self, alphabet: &Alphabet) -> String {
        let mut s = format!("degree {}\n", self.degree);
        for (g, p) in self.perms.iter().enumerate() {
            let imgs: Vec<String> = p.iter().map(|x| (x + 1).to_string()).collect();
            let _ = writeln!(s, "perm {} {}", alphabet.name(Gen(g)), imgs.join(" "));
        }
        s
    }

    /// One-line form `s:2,1 t:1,2`.
    pub fn key(&self, alphabet: &Alphabet) -> String {
        let parts: Vec<String> = self
            .perms
            .iter()
            .enumerate()
            .map(|(g, p)| {
                let imgs: Vec<String> = p.iter().map(|x| (x + 1).to_string()).collect();
                format!("{}:{}", alphabet.name(Gen(g)), imgs.join(","))
            })
            .collect();
        parts.join(" ")
    }

    pub fn parse(text: &str, alphabet: &Alphabet) -> Result<CosetAction> {
        let mut degree = None;
        let mut perms: Vec<Option<Vec<usize>>> = vec![None; alphabet.len()];
        for (ln, line) in text.lines().enumerate() {
            let ln = ln + 1;
            let line = line.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let toks: Vec<&str> = line.split_whitespace().collect();
            let num = |t: &str| -> Result<usize> {
                t.parse()
                    .map_err(|_| Error::parse(ln, format!("expected integer, got `{t}`")))
            };
            match toks[0] {
                "degree" if toks.len() == 2 => degree = Some(num(toks[1])?),
                "perm" if toks.len() >= 2 => {
                    let g = alphabet.gen(toks[1])?;
                    let imgs = toks[2..]
                        .iter()
                        .map(|t| {
                            num(t)?
                                .checked_sub(1)
                                .ok_or_else(|| Error::parse(ln, "images are 1-based"))
                        })
                        .collect::<Result<Vec<_>>>()?;
                    if perms[g.0].replace(imgs).is_some() {
                        return Err(Error::parse(ln, format!("repeated perm for `{}`", toks[1])));
                    }
                }
                other => return Err(Error::parse(ln, format!("cannot parse `{other}` line"))),
            }
        }
        let h = degree.ok_or_else(|| Error::parse(0, "missing `degree` line"))?;
        let perms = perms
            .into_iter()
            .enumerate()
            .map(|(g, p)| {
                p.ok_or_else(|| {
                    Error::InvalidAction(format!("no permutation for `{}`", alphabet.name(Gen(g))))
                })
            })
            .collect::<Result<Vec<_>>>()?;
        action_from_permutations(perms, h)
    }
}

/// Validates permutations of `0..h` and transitivity.
pub fn action_from_permutations(perms: Vec<Vec<usize>>, h: usize) -> Result<CosetAction> {
    if h == 0 {
        return Err(Error::InvalidAction("degree must be positive".into()));
    }
    for (g, p) in perms.iter().enumerate() {
        let mut seen = vec![false; h];
        if p.len() != h
            || p.iter()
                .any(|&x| x >= h || std::mem::replace(&mut seen[x], true))
        {
            return Err(Error::InvalidAction(format!(
                "image list {g} is not a permutation of {h} points"
            )));
        }
    }
    let mut reached = vec![false; h];
    reached[0] = true;
    let mut stack = vec![0];
    while let Some(v) = stack.pop() {
        for p in &perms {
            for w in [p[v], p.iter().position(|&x| x == v).unwrap()] {
                if !std::mem::replace(&mut reached[w], true) {
                    stack.push(w);
                }
            }
        }
    }
    if let Some(v) = reached.iter().position(|r| !r) {
        return Err(Error::InvalidAction(format!(
            "not transitive: coset {} is not reached from coset 1",
            v + 1
        )));
    }
    Ok(CosetAction { perms, degree: h })
}

/// All permutations of `0..n` in lexicographic order.
pub fn permutations(n: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut cur: Vec<usize> = (0..n).collect();
    loop {
        out.push(cur.clone());
        let Some(i) = (1..n).rev().find(|&i| cur[i - 1] < cur[i]) else {
            return out;
        };
        let j = (i..n).rev().find(|&j| cur[j] > cur[i - 1]).unwrap();
        cur.swap(i - 1, j);
        cur[i..].reverse();
    }
}

/// Transitive actions of `num_gens` generators on `h` points up to
/// simultaneous conjugation, as canonical forms in increasing order. With
/// `h ≤ k`, every permutation of `h` points has order dividing `k!`, so
/// relators that are products of `k!`-th powers act trivially.
pub fn enumerate_index_h_actions(h: usize, k: usize, num_gens: usize) -> Result<Vec<CosetAction>> {
    if h > k {
        return Err(Error::InvalidAction(format!("index {h} exceeds k = {k}")));
    }
    if h == 0 {
        return Err(Error::InvalidAction("index must be positive".into()));
    }
    let perms = permutations(h);
    let total = (perms.len() as u128).checked_pow(num_gens as u32);
    if total.is_none_or(|t| t > 1 << 24) {
        return Err(Error::Resource(format!(
            "{}^{num_gens} permutation tuples is too many to enumerate",
            perms.len()
        )));
    }
    let mut tuples: Vec<Vec<usize>> = vec![vec![]];
    for _ in 0..num_gens {
        tuples = tuples
            .into_iter()
            .flat_map(|t| {
                (0..perms.len()).map(move |i| {
                    let mut t = t.clone();
                    t.push(i);
                    t
                })
            })
            .collect();
    }
    let mut out: Vec<CosetAction> = tuples
        .par_iter()
        .filter_map(|t| {
            let ps = t.iter().map(|&i| perms[i].clone()).collect();
            action_from_permutations(ps, h).ok()
        })
        .filter(|a| a.canonical() == *a)
        .collect();
    out.sort();
    Ok(out)
}

/// `S × {1..h}` with symbols `g@v`, ordered generator-major, and the
/// partition `P × {1..h}`.
pub fn product_alphabet(alphabet: &Alphabet, h: usize) -> Result<Alphabet> {
    let names: Vec<String> = alphabet
        .names()
        .iter()
        .flat_map(|n| (1..=h).map(move |v| format!("{n}@{v}")))
        .collect();
    let blocks: Vec<Vec<usize>> = alphabet
        .blocks()
        .iter()
        .map(|b| {
            b.iter()
                .flat_map(|g| (0..h).map(move |v| g.0 * h + v))
                .collect()
        })
        .collect();
    Alphabet::with_blocks(&names, &blocks)
}

/// The generator `g@v` of the product alphabet.
pub fn product_gen(g: Gen, v: usize, h: usize) -> Gen {
    Gen(g.0 * h + v)
}

/// Splits a product generator into `(g, v)`.
pub fn split_gen(x: Gen, h: usize) -> (Gen, usize) {
    (Gen(x.0 / h), x.0 % h)
}

/// The relabelled Schreier graph, with the cycle decomposition of each
/// generator's permutation.
#[derive(Debug, Clone)]
pub struct SchreierGraphKH {
    pub graph: LabelledGraph,
    pub action: CosetAction,
    /// `cycles[g]` lists the cycles of `σ_g`, each starting at its smallest
    /// coset and following `σ_g`.
    pub cycles: Vec<Vec<Vec<usize>>>,
}

impl SchreierGraphKH {
    /// The cycle of `σ_g` through `v`, rotated to start at `v`.
    pub fn cycle_through(&self, g: Gen, v: usize) -> Vec<usize> {
        let c = self.cycles[g.0]
            .iter()
            .find(|c| c.contains(&v))
            .expect("every coset lies on a cycle");
        let k = c.iter().position(|&x| x == v).unwrap();
        c[k..].iter().chain(&c[..k]).copied().collect()
    }

    /// Label of that cycle read from `v`: `g@v g@σ(v) …`.
    pub fn cycle_label(&self, g: Gen, v: usize) -> Word {
        let h = self.action.degree();
        Word::from_letters(
            self.cycle_through(g, v)
                .into_iter()
                .map(|w| Letter::pos(product_gen(g, w, h)))
                .collect(),
        )
    }
}

/// `K_H`: vertices are cosets, and edge `g·h + v` runs `v → σ_g(v)` with
/// label `g@v`.
pub fn schreier_graph(action: &CosetAction, alphabet: &Alphabet) -> Result<SchreierGraphKH> {
    if action.num_gens() != alphabet.len() {
        return Err(Error::InvalidAction(format!(
            "action has {} permutations for {} generators",
            action.num_gens(),
            alphabet.len()
        )));
    }
    let h = action.degree();
    let palph = product_alphabet(alphabet, h)?;
    let mut edges = Vec::with_capacity(h * alphabet.len());
    let mut cycles = Vec::with_capacity(alphabet.len());
    for g in alphabet.gens() {
        let p = action.perm(g);
        for v in 0..h {
            edges.push(Edge {
                src: v,
                dst: p[v],
                label: product_gen(g, v, h),
            });
        }
        let mut seen = vec![false; h];
        let mut cs = Vec::new();
        for v in 0..h {
            if seen[v] {
                continue;
            }
            let mut c = Vec::new();
            let mut w = v;
            while !seen[w] {
                seen[w] = true;
                c.push(w);
                w = p[w];
            }
            cs.push(c);
        }
        cycles.push(cs);
    }
    Ok(SchreierGraphKH {
        graph: LabelledGraph::new(palph, h, edges)?,
        action: action.clone(),
        cycles,
    })
}

/// A copy of `Γ` with the lifted labelling `ω_v`.
#[derive(Debug, Clone)]
pub struct LiftedComponent {
    pub graph: LabelledGraph,
    /// Coset of each vertex under the lift.
    pub cosets: Vec<usize>,
    pub coset: usize,
}

/// Lifts `Γ → K` to `K_H` with every basepoint at coset `v`. Fails if some
/// cycle label acts nontrivially, i.e. the action does not factor through
/// the group of `Γ`; every edge is checked, so this is exhaustive.
pub fn lift_labelling(
    g: &LabelledGraph,
    kh: &SchreierGraphKH,
    v: usize,
) -> Result<LiftedComponent> {
    let action = &kh.action;
    let h = action.degree();
    if v >= h {
        return Err(Error::InvalidAction(format!(
            "coset {} out of range",
            v + 1
        )));
    }
    if action.num_gens() != g.alphabet().len() {
        return Err(Error::InvalidAction(
            "action and graph alphabets differ".into(),
        ));
    }
    let n = g.num_vertices();
    let mut cosets = vec![usize::MAX; n];
    for c in g.components() {
        cosets[c.basepoint] = v;
        let mut queue = std::collections::VecDeque::from([c.basepoint]);
        while let Some(x) = queue.pop_front() {
            for &s in g.incident(x) {
                let y = g.step_target(s);
                if cosets[y] == usize::MAX {
                    cosets[y] = action.act(cosets[x], g.step_letter(s));
                    queue.push_back(y);
                }
            }
        }
    }
    let mut labels = Vec::with_capacity(g.num_edges());
    for (i, e) in g.edges().iter().enumerate() {
        let expected = action.perm(e.label)[cosets[e.src]];
        if cosets[e.dst] != expected {
            return Err(Error::ActionNotFactoring {
                edge: i,
                expected: expected + 1,
                found: cosets[e.dst] + 1,
            });
        }
        labels.push(product_gen(e.label, cosets[e.src], h));
    }
    Ok(LiftedComponent {
        graph: g.relabelled(kh.graph.alphabet().clone(), &labels)?,
        cosets,
        coset: v,
    })
}

/// `Γ_H = ⊔_v Γ_v` with the bookkeeping needed to project back to `Γ`.
#[derive(Debug, Clone)]
pub struct GammaH {
    pub graph: LabelledGraph,
    pub kh: SchreierGraphKH,
    pub lifts: Vec<LiftedComponent>,
    /// First vertex and first edge id of each `Γ_v`.
    pub vertex_offset: Vec<usize>,
    pub edge_offset: Vec<usize>,
    /// Rank of the free factor: `G(Γ_H) = H ∗ F_{h−1}`.
    pub free_rank: usize,
}

impl GammaH {
    /// The copy containing vertex `x` of `Γ_H`.
    pub fn copy_of(&self, x: VertexId) -> usize {
        self.vertex_offset.partition_point(|&o| o <= x) - 1
    }

    /// Coset of each component of `Γ_H`, in component order.
    pub fn component_cosets(&self) -> Vec<usize> {
        self.graph
            .components()
            .iter()
            .map(|c| self.copy_of(c.basepoint))
            .collect()
    }

    /// `π_v`: the same path in `Γ`.
    pub fn project(&self, p: &Path) -> Path {
        let c = self.copy_of(p.start);
        let (vo, eo) = (self.vertex_offset[c], self.edge_offset[c]);
        Path {
            start: p.start - vo,
            steps: p
                .steps
                .iter()
                .map(|s| crate::graph::Step {
                    edge: s.edge - eo,
                    forward: s.forward,
                })
                .collect(),
        }
    }

    pub fn metadata_text(&self) -> String {
        let mut s = format!(
            "degree {}\nfree_rank {}\ncomponents {}\n",
            self.kh.action.degree(),
            self.free_rank,
            self.graph.components().len()
        );
        for (i, c) in self.component_cosets().iter().enumerate() {
            let _ = writeln!(s, "component {} coset {}", i, c + 1);
        }
        s
    }
}

/// Builds `Γ_H`; copies are lifted in parallel and merged in coset order.
pub fn comerford_transform(g: &LabelledGraph, action: &CosetAction) -> Result<GammaH> {
    g.is_reduced_labelling()?;
    let kh = schreier_graph(action, g.alphabet())?;
    let h = action.degree();
    let lifts: Vec<LiftedComponent> = (0..h)
        .into_par_iter()
        .map(|v| lift_labelling(g, &kh, v))
        .collect::<Result<_>>()?;
    let parts: Vec<LabelledGraph> = lifts.iter().map(|l| l.graph.clone()).collect();
    let graph = LabelledGraph::disjoint_union(kh.graph.alphabet().clone(), &parts)?;
    let vertex_offset = (0..h).map(|v| v * g.num_vertices()).collect();
    let edge_offset = (0..h).map(|v| v * g.num_edges()).collect();
    Ok(GammaH {
        graph,
        kh,
        lifts,
        vertex_offset,
        edge_offset,
        free_rank: h - 1,
    })
}

/// Transports a length function on `S` to the product alphabet.
pub fn lifted_length(lf: &LengthFunction, gh: &GammaH) -> LengthFunction {
    match lf {
        LengthFunction::WordLength => LengthFunction::WordLength,
        LengthFunction::FreeProduct(_) => LengthFunction::free_product(gh.graph.alphabet()),
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ProjectionCounterexample {
    pub piece: Path,
    pub image: Path,
    pub reason: String,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ProjectionCheck {
    pub checked: usize,
    pub counterexamples: Vec<ProjectionCounterexample>,
}

impl ProjectionCheck {
    pub fn ok(&self) -> bool {
        self.counterexamples.is_empty()
    }
}

/// Every piece of `Γ_H` with `ℓ ≤ max_len` must project to a piece of `Γ`
/// of the same length.
pub fn piece_projection_check(
    g: &LabelledGraph,
    gh: &GammaH,
    lf: &LengthFunction,
    max_len: usize,
) -> Result<ProjectionCheck> {
    let lh = lifted_length(lf, gh);
    let pieces = enumerate_piece_paths(&gh.graph, max_len, &lh)?;
    let index = PieceIndex::new(g)?;
    let counterexamples = pieces
        .par_iter()
        .filter_map(|p| {
            let image = gh.project(&p.path);
            let reason = if !index.is_piece(g, &image) {
                "image is not a piece"
            } else if lf.length(&g.path_label(&image).ok()?) != p.length {
                "lengths differ"
            } else {
                return None;
            };
            Some(ProjectionCounterexample {
                piece: p.path.clone(),
                image,
                reason: reason.into(),
            })
        })
        .collect();
    Ok(ProjectionCheck {
        checked: pieces.len(),
        counterexamples,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::testutil::*;

    fn st() -> Alphabet {
        Alphabet::with_blocks(&["s", "t"], &[vec![0], vec![1]]).unwrap()
    }

    fn act(perms: &[&[usize]]) -> Result<CosetAction> {
        let h = perms[0].len();
        action_from_permutations(perms.iter().map(|p| p.to_vec()).collect(), h)
    }

    #[test]
    fn action_validation() {
        assert!(act(&[&[0], &[0]]).is_ok());
        assert!(act(&[&[1, 0], &[0, 1]]).is_ok());
        assert!(act(&[&[0, 1], &[0, 1]]).is_err());
        assert!(act(&[&[0, 0], &[0, 1]]).is_err());
    }

    // transitive pairs counted by orbits of the relabelling action
    fn orbit_count(h: usize) -> usize {
        let ps = permutations(h);
        let mut seen = std::collections::HashSet::new();
        let mut orbits = 0;
        for a in &ps {
            for b in &ps {
                let Ok(x) = action_from_permutations(vec![a.clone(), b.clone()], h) else {
                    continue;
                };
                if seen.contains(&x.perms) {
                    continue;
                }
                orbits += 1;
                for pi in &ps {
                    seen.insert(x.relabel(pi).perms);
                }
            }
        }
        orbits
    }

    #[test]
    fn index_counts() {
        assert_eq!(enumerate_index_h_actions(1, 1, 2).unwrap().len(), 1);
        let two = enumerate_index_h_actions(2, 2, 2).unwrap();
        assert_eq!(two.len(), 3);
        for h in 3..=4 {
            assert_eq!(
                enumerate_index_h_actions(h, h, 2).unwrap().len(),
                orbit_count(h)
            );
        }
        assert!(enumerate_index_h_actions(3, 2, 2).is_err());
    }

    #[test]
    fn action_text_round_trip() {
        let a = st();
        let x = act(&[&[1, 2, 0], &[0, 2, 1]]).unwrap();
        let t = x.to_text(&a);
        assert_eq!(t, "degree 3\nperm s 2 3 1\nperm t 1 3 2\n");
        assert_eq!(CosetAction::parse(&t, &a).unwrap(), x);
        assert!(CosetAction::parse("degree 2\nperm s 2 1\n", &a).is_err());
        assert!(CosetAction::parse("degree 2\nperm s 1 2\nperm t 1 2\n", &a).is_err());
    }

    #[test]
    fn schreier_graph_shapes() {
        let a = st();
        let one = schreier_graph(&act(&[&[0], &[0]]).unwrap(), &a).unwrap();
        assert_eq!(one.graph.num_vertices(), 1);
        assert_eq!(one.graph.num_edges(), 2);
        assert_eq!(one.graph.alphabet().names(), &["s@1", "t@1"]);
        let x = act(&[&[1, 0], &[0, 1]]).unwrap();
        let kh = schreier_graph(&x, &a).unwrap();
        assert_eq!(kh.graph.num_edges(), 4);
        assert_eq!(kh.cycles[0], vec![vec![0, 1]]);
        assert_eq!(kh.cycles[1], vec![vec![0], vec![1]]);
        assert_eq!(
            kh.cycle_label(Gen(0), 1)
                .display(kh.graph.alphabet())
                .to_string(),
            "s@2 s@1"
        );
        kh.graph.is_reduced_labelling().unwrap();
    }

    #[test]
    fn lift_of_s_s_path() {
        let a = st();
        let g = graph(&a, 3, &[(0, 1, "s"), (1, 2, "s")]);
        let x = act(&[&[1, 0], &[0, 1]]).unwrap();
        let kh = schreier_graph(&x, &a).unwrap();
        for v in 0..2 {
            let l = lift_labelling(&g, &kh, v).unwrap();
            let lab = l.graph.path_label(&Path {
                start: 0,
                steps: vec![crate::graph::Step::fwd(0), crate::graph::Step::fwd(1)],
            });
            let sv = product_gen(Gen(0), v, 2);
            let sw = product_gen(Gen(0), 1 - v, 2);
            assert_eq!(
                lab.unwrap(),
                Word::from_letters(vec![Letter::pos(sv), Letter::pos(sw)])
            );
        }
    }

    #[test]
    fn relator_violating_action_fails() {
        // triangle s s s^-1... a cycle with label s^2 and σ_s of order 3
        let a = st();
        let g = cycle(&a, &["s", "s"]);
        let x = act(&[&[1, 2, 0], &[0, 1, 2]]).unwrap();
        let kh = schreier_graph(&x, &a).unwrap();
        assert!(matches!(
            lift_labelling(&g, &kh, 0),
            Err(Error::ActionNotFactoring { .. })
        ));
    }

    #[test]
    fn identity_cover() {
        let a = st();
        let g = cycle(&a, &["s", "t", "t"]);
        let x = act(&[&[0], &[0]]).unwrap();
        let gh = comerford_transform(&g, &x).unwrap();
        assert_eq!(gh.graph.num_vertices(), 3);
        assert_eq!(gh.free_rank, 0);
        for (e, f) in g.edges().iter().zip(gh.graph.edges()) {
            assert_eq!((e.src, e.dst, e.label.0), (f.src, f.dst, f.label.0));
        }
    }

    #[test]
    fn component_count_and_projection() {
        let a = st();
        let g = cycle(&a, &["s", "s", "t", "t"]);
        let x = act(&[&[1, 0], &[1, 0]]).unwrap();
        let gh = comerford_transform(&g, &x).unwrap();
        assert_eq!(gh.graph.components().len(), 2);
        assert_eq!(gh.component_cosets(), vec![0, 1]);
        let chk = piece_projection_check(&g, &gh, &LengthFunction::WordLength, 4).unwrap();
        assert!(chk.ok());
        let empty = cycle(&a, &["s", "t"]);
        let x1 = act(&[&[0], &[0]]).unwrap();
        let gh1 = comerford_transform(&empty, &x1).unwrap();
        let chk = piece_projection_check(&empty, &gh1, &LengthFunction::WordLength, 4).unwrap();
        assert_eq!(chk.checked, 0);
    }
}
