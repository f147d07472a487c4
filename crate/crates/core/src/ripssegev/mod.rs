//! Rips–Segev graphs: lines labelled `a^{C_i}` with a `b`-arc hanging off
//! every `a`-vertex, glued together by four identifications per line.

mod search;

pub use search::{
    evaluate_candidate, generate_candidate, search_coefficients, CandidateResult, Found,
    SearchConfig, SearchOutcome, SearchStats,
};

use std::fmt::Write as _;

use crate::error::{Error, Result};
use crate::graph::{Edge, LabelledGraph, VertexId};
use crate::word::{Alphabet, LengthFunction, Word};

/// `(a, b, N, (C_i), (N_{i,j}), (P_{i,j}))`. Line indices in `nij` are
/// 1-based as in the text format; `pij[i][j]` ranges over `0..=C_{nij[i][j]}`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CoefficientSystem {
    pub alphabet: Alphabet,
    pub a: Word,
    pub b: Word,
    pub c: Vec<usize>,
    pub nij: Vec<[usize; 4]>,
    pub pij: Vec<[usize; 4]>,
}

impl CoefficientSystem {
    pub fn n(&self) -> usize {
        self.c.len()
    }

    /// Block of `a` and block of `b` in the alphabet partition.
    pub fn blocks(&self) -> Result<(usize, usize)> {
        let lf = LengthFunction::free_product(&self.alphabet);
        let block_of = |w: &Word, name: &str| -> Result<usize> {
            let first = w
                .letters()
                .first()
                .ok_or_else(|| Error::InvalidCoefficients(format!("{name} is trivial")))?;
            let blk = lf.block(first.gen);
            if w.letters().iter().any(|l| lf.block(l.gen) != blk) {
                return Err(Error::InvalidCoefficients(format!(
                    "{name} mixes partition blocks"
                )));
            }
            Ok(blk)
        };
        let (ba, bb) = (block_of(&self.a, "a")?, block_of(&self.b, "b")?);
        if ba == bb {
            return Err(Error::InvalidCoefficients(
                "a and b must lie in different blocks".into(),
            ));
        }
        Ok((ba, bb))
    }

    pub fn validate(&self) -> Result<()> {
        self.blocks()?;
        for (w, name) in [(&self.a, "a"), (&self.b, "b")] {
            if !w.is_freely_reduced() || !w.is_cyclically_reduced() {
                return Err(Error::InvalidCoefficients(format!(
                    "{name} is not cyclically reduced"
                )));
            }
        }
        let n = self.n();
        if n == 0 {
            return Err(Error::InvalidCoefficients("N must be positive".into()));
        }
        if self.nij.len() != n || self.pij.len() != n {
            return Err(Error::InvalidCoefficients(
                "NIJ and PIJ need one row per line".into(),
            ));
        }
        if let Some(i) = self.c.iter().position(|&c| c == 0) {
            return Err(Error::InvalidCoefficients(format!(
                "C_{} must be positive",
                i + 1
            )));
        }
        for i in 0..n {
            for j in 0..4 {
                let t = self.nij[i][j];
                if t == 0 || t > n {
                    return Err(Error::InvalidCoefficients(format!(
                        "N_{{{},{}}} = {t} outside 1..={n}",
                        i + 1,
                        j + 1
                    )));
                }
                if self.pij[i][j] > self.c[t - 1] {
                    return Err(Error::InvalidCoefficients(format!(
                        "P_{{{},{}}} = {} exceeds C_{t} = {}",
                        i + 1,
                        j + 1,
                        self.pij[i][j],
                        self.c[t - 1]
                    )));
                }
            }
        }
        Ok(())
    }

    /// Number of edges of the Rips–Segev graph: `Σ C_i|a| + (C_i+1)|b|`.
    pub fn edge_count(&self) -> usize {
        let (la, lb) = (self.a.len(), self.b.len());
        self.c.iter().map(|&c| c * la + (c + 1) * lb).sum()
    }

    pub fn to_text(&self) -> String {
        let al = &self.alphabet;
        let mut s = crate::graph::alphabet_header(al);
        let _ = writeln!(s, "a {}", self.a.display(al));
        let _ = writeln!(s, "b {}", self.b.display(al));
        let _ = writeln!(s, "N {}", self.n());
        let cs: Vec<String> = self.c.iter().map(|c| c.to_string()).collect();
        let _ = writeln!(s, "C {}", cs.join(" "));
        for (i, r) in self.nij.iter().enumerate() {
            let _ = writeln!(s, "NIJ {} {} {} {} {}", i + 1, r[0], r[1], r[2], r[3]);
        }
        for (i, r) in self.pij.iter().enumerate() {
            let _ = writeln!(s, "PIJ {} {} {} {} {}", i + 1, r[0], r[1], r[2], r[3]);
        }
        s
    }

    /// Parses the coefficient-system format. Without `alphabet`/`partition`
    /// lines, the generators of `a` form one block and those of `b` another.
    pub fn parse(text: &str) -> Result<Self> {
        let mut names: Option<Vec<String>> = None;
        let mut blocks: Option<Vec<Vec<String>>> = None;
        let (mut a_txt, mut b_txt) = (None, None);
        let mut n: Option<usize> = None;
        let mut c: Option<Vec<usize>> = None;
        let mut nij: Vec<(usize, [usize; 4], usize)> = Vec::new();
        let mut pij: Vec<(usize, [usize; 4], usize)> = Vec::new();
        for (ln, line) in text.lines().enumerate() {
            let ln = ln + 1;
            let line = line.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (kw, rest) = line.split_once(char::is_whitespace).unwrap_or((line, ""));
            let rest = rest.trim();
            let nums = |t: &str| -> Result<Vec<usize>> {
                t.split_whitespace()
                    .map(|x| {
                        x.parse()
                            .map_err(|_| Error::parse(ln, format!("expected integer, got `{x}`")))
                    })
                    .collect()
            };
            match kw {
                "alphabet" => names = Some(rest.split_whitespace().map(String::from).collect()),
                "partition" => blocks = Some(crate::graph::parse_blocks(rest, ln)?),
                "a" => a_txt = Some((rest.to_string(), ln)),
                "b" => b_txt = Some((rest.to_string(), ln)),
                "N" => {
                    n = Some(
                        nums(rest)?
                            .first()
                            .copied()
                            .ok_or_else(|| Error::parse(ln, "N needs a value"))?,
                    )
                }
                "C" => c = Some(nums(rest)?),
                "NIJ" | "PIJ" => {
                    let v = nums(rest)?;
                    if v.len() != 5 {
                        return Err(Error::parse(ln, format!("{kw} needs: i and four integers")));
                    }
                    let row = (v[0], [v[1], v[2], v[3], v[4]], ln);
                    if kw == "NIJ" {
                        nij.push(row);
                    } else {
                        pij.push(row);
                    }
                }
                other => return Err(Error::parse(ln, format!("unknown keyword `{other}`"))),
            }
        }
        let (a_txt, a_ln) = a_txt.ok_or_else(|| Error::parse(0, "missing `a` line"))?;
        let (b_txt, b_ln) = b_txt.ok_or_else(|| Error::parse(0, "missing `b` line"))?;
        let alphabet = match names {
            Some(names) => match blocks {
                Some(b) => Alphabet::with_named_blocks(&names, &b)?,
                None => Alphabet::new(&names)?,
            },
            None => {
                let syms = |t: &str| -> Vec<String> {
                    let mut out: Vec<String> = Vec::new();
                    for tok in t.split_whitespace() {
                        let name = tok.split('^').next().unwrap_or("").to_string();
                        if name != "1" && !out.contains(&name) {
                            out.push(name);
                        }
                    }
                    out
                };
                let (sa, sb) = (syms(&a_txt), syms(&b_txt));
                let all: Vec<String> = sa.iter().chain(&sb).cloned().collect();
                Alphabet::with_named_blocks(&all, &[sa, sb])?
            }
        };
        let a = Word::parse(&a_txt, &alphabet).map_err(|e| Error::parse(a_ln, e.to_string()))?;
        let b = Word::parse(&b_txt, &alphabet).map_err(|e| Error::parse(b_ln, e.to_string()))?;
        let c = c.ok_or_else(|| Error::parse(0, "missing `C` line"))?;
        let n = n.unwrap_or(c.len());
        if c.len() != n {
            return Err(Error::InvalidCoefficients(format!(
                "N = {n} but C lists {} values",
                c.len()
            )));
        }
        let rows = |list: Vec<(usize, [usize; 4], usize)>, kw: &str| -> Result<Vec<[usize; 4]>> {
            let mut out = vec![None; n];
            for (i, r, ln) in list {
                if i == 0 || i > n || out[i - 1].is_some() {
                    return Err(Error::parse(
                        ln,
                        format!("{kw} row index {i} invalid or repeated"),
                    ));
                }
                out[i - 1] = Some(r);
            }
            out.into_iter()
                .enumerate()
                .map(|(i, r)| {
                    r.ok_or_else(|| Error::parse(0, format!("missing {kw} row {}", i + 1)))
                })
                .collect()
        };
        let cs = CoefficientSystem {
            alphabet,
            a,
            b,
            c,
            nij: rows(nij, "NIJ")?,
            pij: rows(pij, "PIJ")?,
        };
        cs.validate()?;
        Ok(cs)
    }
}

/// A Rips–Segev graph with its marker vertices. `u[i][j]` is `u_{i,j}`
/// (which is also `(v₀)_{i,j}`) and `v1[i][j]` is `(v₁)_{i,j}`, with `i`
/// 0-based.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RSGraph {
    pub graph: LabelledGraph,
    pub cs: CoefficientSystem,
    pub u: Vec<Vec<VertexId>>,
    pub v1: Vec<Vec<VertexId>>,
}

impl RSGraph {
    pub fn v0(&self, i: usize, j: usize) -> VertexId {
        self.u[i][j]
    }

    pub fn basevertex(&self) -> VertexId {
        self.u[0][0]
    }

    pub fn is_connected(&self) -> bool {
        self.graph.is_connected()
    }

    pub fn markers_text(&self) -> String {
        let mut s = String::new();
        for (i, (us, vs)) in self.u.iter().zip(&self.v1).enumerate() {
            for (j, (u, v)) in us.iter().zip(vs).enumerate() {
                let _ = writeln!(s, "marker {} {} u {} v1 {}", i + 1, j, u, v);
            }
        }
        s
    }
}

/// The disjoint union of the `p_i′` before identification, in base ids.
#[derive(Debug, Clone)]
pub(crate) struct Skeleton {
    pub num_vertices: usize,
    pub edges: Vec<Edge>,
    pub u: Vec<Vec<VertexId>>,
    pub v1: Vec<Vec<VertexId>>,
}

impl Skeleton {
    pub fn new(cs: &CoefficientSystem) -> Self {
        let mut nv = 0;
        let mut edges = Vec::new();
        let mut fresh = || {
            nv += 1;
            nv - 1
        };
        let lay = |edges: &mut Vec<Edge>,
                   from: VertexId,
                   w: &Word,
                   fresh: &mut dyn FnMut() -> VertexId| {
            let mut cur = from;
            for l in w.letters() {
                let next = fresh();
                let (src, dst) = if l.inverse { (next, cur) } else { (cur, next) };
                edges.push(Edge {
                    src,
                    dst,
                    label: l.gen,
                });
                cur = next;
            }
            cur
        };
        let mut u = Vec::with_capacity(cs.n());
        let mut v1 = Vec::with_capacity(cs.n());
        for &ci in &cs.c {
            let mut ui = vec![fresh()];
            for _ in 0..ci {
                let end = lay(&mut edges, *ui.last().unwrap(), &cs.a, &mut fresh);
                ui.push(end);
            }
            let vi: Vec<VertexId> = ui
                .iter()
                .map(|&x| lay(&mut edges, x, &cs.b, &mut fresh))
                .collect();
            u.push(ui);
            v1.push(vi);
        }
        Skeleton {
            num_vertices: nv,
            edges,
            u,
            v1,
        }
    }

    /// The pair of base vertices merged by identification `j` of line `i`
    /// (0-based), given its target line `n` (0-based) and position `p`.
    pub fn identification(&self, i: usize, j: usize, n: usize, p: usize) -> (VertexId, VertexId) {
        let last = self.u[i].len() - 1;
        match j {
            0 => (self.u[i][0], self.v1[n][p]),
            1 => (self.v1[i][0], self.u[n][p]),
            2 => (self.u[i][last], self.v1[n][p]),
            _ => (self.v1[i][last], self.u[n][p]),
        }
    }
}

/// Union-find whose representative is always the smallest member.
#[derive(Debug, Clone)]
pub(crate) struct MinUnionFind(Vec<usize>);

impl MinUnionFind {
    pub fn new(n: usize) -> Self {
        MinUnionFind((0..n).collect())
    }

    pub fn find(&mut self, x: usize) -> usize {
        let mut r = x;
        while self.0[r] != r {
            r = self.0[r];
        }
        let mut y = x;
        while self.0[y] != r {
            let next = self.0[y];
            self.0[y] = r;
            y = next;
        }
        r
    }

    /// Returns the surviving representative.
    pub fn union(&mut self, x: usize, y: usize) -> usize {
        let (a, b) = (self.find(x), self.find(y));
        let (lo, hi) = (a.min(b), a.max(b));
        self.0[hi] = lo;
        lo
    }
}

/// Builds the Rips–Segev graph of a coefficient system. Vertex ids follow
/// construction order (line `p_i`, then its `b`-arcs, line by line), merged
/// vertices keep the smallest id and ids are then compacted.
pub fn build_rips_segev(cs: &CoefficientSystem) -> Result<RSGraph> {
    cs.validate()?;
    let sk = Skeleton::new(cs);
    let mut uf = MinUnionFind::new(sk.num_vertices);
    for i in 0..cs.n() {
        for j in 0..4 {
            let (x, y) = sk.identification(i, j, cs.nij[i][j] - 1, cs.pij[i][j]);
            uf.union(x, y);
        }
    }
    let mut new_id = vec![usize::MAX; sk.num_vertices];
    let mut count = 0;
    for v in 0..sk.num_vertices {
        if uf.find(v) == v {
            new_id[v] = count;
            count += 1;
        }
    }
    let mut id = |v: VertexId| new_id[uf.find(v)];
    let edges = sk
        .edges
        .iter()
        .map(|e| Edge {
            src: id(e.src),
            dst: id(e.dst),
            label: e.label,
        })
        .collect();
    let u =
        sk.u.iter()
            .map(|r| r.iter().map(|&v| id(v)).collect())
            .collect();
    let v1 = sk
        .v1
        .iter()
        .map(|r| r.iter().map(|&v| id(v)).collect())
        .collect();
    let graph = LabelledGraph::new(cs.alphabet.clone(), count, edges)?;
    graph.is_reduced_labelling()?;
    Ok(RSGraph {
        graph,
        cs: cs.clone(),
        u,
        v1,
    })
}

/// The product sets `A = ⋃ A_i` and `B = {1, a, b, ab}`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ProductSets {
    /// `a_sets[i] = [w_i, w_i a, …, w_i a^{C_i − 1}]`, freely reduced.
    pub a_sets: Vec<Vec<Word>>,
    pub b_set: Vec<Word>,
    /// `w_i`, the label of the chosen path from `u_{1,0}` to `u_{i,0}`.
    pub connectors: Vec<Word>,
    pub basevertex: VertexId,
}

impl ProductSets {
    /// The distinct elements of `A` in first-occurrence order.
    pub fn a_elements(&self) -> Vec<Word> {
        let mut seen = std::collections::HashSet::new();
        self.a_sets
            .iter()
            .flatten()
            .filter(|w| seen.insert((*w).clone()))
            .cloned()
            .collect()
    }

    pub fn b_elements(&self) -> Vec<Word> {
        let mut seen = std::collections::HashSet::new();
        self.b_set
            .iter()
            .filter(|w| seen.insert((*w).clone()))
            .cloned()
            .collect()
    }
}

/// `w_i` is the label of the lexicographically first shortest path from
/// `u_{1,0}` to `u_{i,0}`.
pub fn build_sets(rsg: &RSGraph) -> Result<ProductSets> {
    if !rsg.is_connected() {
        return Err(Error::Disconnected);
    }
    let g = &rsg.graph;
    let base = rsg.basevertex();
    let a = &rsg.cs.a;
    let b = &rsg.cs.b;
    let mut connectors = Vec::with_capacity(rsg.cs.n());
    let mut a_sets = Vec::with_capacity(rsg.cs.n());
    for (i, &ci) in rsg.cs.c.iter().enumerate() {
        let p = g
            .shortest_path(base, rsg.u[i][0])
            .ok_or(Error::Disconnected)?;
        let w = g.label_unchecked(&p.steps).free_reduce();
        let set = (0..ci).map(|j| w.concat(&a.pow(j)).free_reduce()).collect();
        connectors.push(w);
        a_sets.push(set);
    }
    let b_set = vec![
        Word::empty(),
        a.clone(),
        b.clone(),
        a.concat(b).free_reduce(),
    ];
    Ok(ProductSets {
        a_sets,
        b_set,
        connectors,
        basevertex: base,
    })
}
