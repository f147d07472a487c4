//! Finite oriented graphs labelled by an alphabet, edge paths and their labels.

use std::collections::VecDeque;
use std::fmt::Write as _;

use crate::error::{Error, Result};
use crate::word::{Alphabet, Gen, Letter, Word};

pub type VertexId = usize;
pub type EdgeId = usize;

const NONE: u32 = u32::MAX;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Edge {
    pub src: VertexId,
    pub dst: VertexId,
    pub label: Gen,
}

/// One traversal of an edge, along (`forward`) or against its orientation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Step {
    pub edge: EdgeId,
    pub forward: bool,
}

impl Step {
    pub fn fwd(edge: EdgeId) -> Self {
        Step {
            edge,
            forward: true,
        }
    }

    pub fn bwd(edge: EdgeId) -> Self {
        Step {
            edge,
            forward: false,
        }
    }

    pub fn reversed(self) -> Self {
        Step {
            edge: self.edge,
            forward: !self.forward,
        }
    }
}

/// An edge path. The start vertex is stored so that empty paths have a place.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Path {
    pub start: VertexId,
    pub steps: Vec<Step>,
}

impl Path {
    pub fn empty(start: VertexId) -> Self {
        Path {
            start,
            steps: Vec::new(),
        }
    }

    pub fn len(&self) -> usize {
        self.steps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.steps.is_empty()
    }

    /// Vertex sequence, `len() + 1` entries. Panics on an invalid path.
    pub fn vertices(&self, g: &LabelledGraph) -> Vec<VertexId> {
        let mut v = Vec::with_capacity(self.steps.len() + 1);
        let mut cur = self.start;
        v.push(cur);
        for &s in &self.steps {
            cur = g.step_target(s);
            v.push(cur);
        }
        v
    }

    pub fn terminal(&self, g: &LabelledGraph) -> VertexId {
        self.steps.last().map_or(self.start, |&s| g.step_target(s))
    }

    pub fn is_closed(&self, g: &LabelledGraph) -> bool {
        self.terminal(g) == self.start
    }

    /// Checks incidence of consecutive steps.
    pub fn validate(&self, g: &LabelledGraph) -> Result<()> {
        if self.start >= g.num_vertices() {
            return Err(Error::InvalidPath(format!(
                "start vertex {} missing",
                self.start
            )));
        }
        let mut cur = self.start;
        for (i, &s) in self.steps.iter().enumerate() {
            if s.edge >= g.num_edges() {
                return Err(Error::InvalidPath(format!("edge {} missing", s.edge)));
            }
            if g.step_source(s) != cur {
                return Err(Error::InvalidPath(format!(
                    "step {i} (edge {}) does not start at vertex {cur}",
                    s.edge
                )));
            }
            cur = g.step_target(s);
        }
        Ok(())
    }

    /// No step is immediately followed by its own reversal.
    pub fn is_immersed(&self) -> bool {
        self.steps.windows(2).all(|w| w[1] != w[0].reversed())
    }

    /// Distinct vertices, except that a closed path may return to its start;
    /// distinct edges throughout.
    pub fn is_simple(&self, g: &LabelledGraph) -> bool {
        let vs = self.vertices(g);
        let closed = vs.len() > 1 && vs[0] == vs[vs.len() - 1];
        let inner = if closed { &vs[..vs.len() - 1] } else { &vs[..] };
        let mut seen = vec![false; g.num_vertices()];
        for &v in inner {
            if seen[v] {
                return false;
            }
            seen[v] = true;
        }
        let mut es: Vec<EdgeId> = self.steps.iter().map(|s| s.edge).collect();
        es.sort_unstable();
        es.windows(2).all(|w| w[0] != w[1])
    }

    pub fn reversed(&self, g: &LabelledGraph) -> Path {
        Path {
            start: self.terminal(g),
            steps: self.steps.iter().rev().map(|s| s.reversed()).collect(),
        }
    }

    pub fn concat(&self, other: &Path) -> Path {
        let mut steps = self.steps.clone();
        steps.extend_from_slice(&other.steps);
        Path {
            start: self.start,
            steps,
        }
    }

    /// Subpath of `len` steps starting after `from` steps.
    pub fn subpath(&self, g: &LabelledGraph, from: usize, len: usize) -> Path {
        let start = if from == 0 {
            self.start
        } else {
            g.step_target(self.steps[from - 1])
        };
        Path {
            start,
            steps: self.steps[from..from + len].to_vec(),
        }
    }

    /// Rotation of a closed path so that it starts after `k` steps.
    pub fn rotate(&self, g: &LabelledGraph, k: usize) -> Path {
        let n = self.steps.len();
        if n == 0 {
            return self.clone();
        }
        let k = k % n;
        let start = if k == 0 {
            self.start
        } else {
            g.step_target(self.steps[k - 1])
        };
        let mut steps = self.steps[k..].to_vec();
        steps.extend_from_slice(&self.steps[..k]);
        Path { start, steps }
    }

    /// `start:e+,e-,...`
    pub fn to_text(&self) -> String {
        let mut s = format!("{}:", self.start);
        for (i, st) in self.steps.iter().enumerate() {
            if i > 0 {
                s.push(',');
            }
            let _ = write!(s, "{}{}", st.edge, if st.forward { '+' } else { '-' });
        }
        s
    }

    pub fn parse(text: &str) -> Result<Path> {
        let bad = || Error::InvalidPath(format!("cannot parse path `{text}`"));
        let (start, rest) = text.split_once(':').ok_or_else(bad)?;
        let start = start.trim().parse().map_err(|_| bad())?;
        let mut steps = Vec::new();
        for tok in rest.split(',').map(str::trim).filter(|t| !t.is_empty()) {
            let (num, dir) = tok.split_at(tok.len() - 1);
            let edge = num.parse().map_err(|_| bad())?;
            let forward = match dir {
                "+" => true,
                "-" => false,
                _ => return Err(bad()),
            };
            steps.push(Step { edge, forward });
        }
        Ok(Path { start, steps })
    }
}

/// A connected component with its basepoint.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Component {
    pub vertices: Vec<VertexId>,
    pub basepoint: VertexId,
}

/// First violation of the local folding criterion.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct FoldingWitness {
    pub vertex: VertexId,
    pub first: EdgeId,
    pub second: EdgeId,
    /// `true` if both edges leave `vertex`, `false` if both enter it.
    pub outgoing: bool,
}

impl From<FoldingWitness> for Error {
    fn from(w: FoldingWitness) -> Self {
        Error::NotReduced {
            vertex: w.vertex,
            first: w.first,
            second: w.second,
        }
    }
}

/// A finite oriented graph with edges labelled by generators and one
/// basepoint per connected component. Immutable once built.
#[derive(Debug, Clone)]
pub struct LabelledGraph {
    alphabet: Alphabet,
    num_vertices: usize,
    edges: Vec<Edge>,
    incident: Vec<Vec<Step>>,
    // vertex * 2|S| + 2 g + inverse  ->  first edge, or NONE
    step_table: Vec<u32>,
    comp_of: Vec<usize>,
    components: Vec<Component>,
}

impl PartialEq for LabelledGraph {
    fn eq(&self, other: &Self) -> bool {
        self.alphabet == other.alphabet
            && self.num_vertices == other.num_vertices
            && self.edges == other.edges
            && self.basepoints() == other.basepoints()
    }
}

impl Eq for LabelledGraph {}

impl LabelledGraph {
    /// Builds a graph; basepoints are the smallest vertex id of each component.
    pub fn new(alphabet: Alphabet, num_vertices: usize, edges: Vec<Edge>) -> Result<Self> {
        Self::build(alphabet, num_vertices, edges, None)
    }

    /// Builds a graph with explicit basepoints, exactly one per component.
    pub fn with_basepoints(
        alphabet: Alphabet,
        num_vertices: usize,
        edges: Vec<Edge>,
        basepoints: &[VertexId],
    ) -> Result<Self> {
        Self::build(alphabet, num_vertices, edges, Some(basepoints))
    }

    fn build(
        alphabet: Alphabet,
        num_vertices: usize,
        edges: Vec<Edge>,
        basepoints: Option<&[VertexId]>,
    ) -> Result<Self> {
        let width = 2 * alphabet.len();
        let mut incident = vec![Vec::new(); num_vertices];
        let mut step_table = vec![NONE; num_vertices * width];
        for (i, e) in edges.iter().enumerate() {
            if e.src >= num_vertices || e.dst >= num_vertices {
                return Err(Error::InvalidGraph(format!(
                    "edge {i} has a missing endpoint"
                )));
            }
            if e.label.0 >= alphabet.len() {
                return Err(Error::InvalidGraph(format!(
                    "edge {i} has an unknown label"
                )));
            }
            incident[e.src].push(Step::fwd(i));
            incident[e.dst].push(Step::bwd(i));
            let fs = e.src * width + 2 * e.label.0;
            if step_table[fs] == NONE {
                step_table[fs] = i as u32;
            }
            let bs = e.dst * width + 2 * e.label.0 + 1;
            if step_table[bs] == NONE {
                step_table[bs] = i as u32;
            }
        }
        for inc in &mut incident {
            inc.sort_unstable();
        }
        let mut comp_of = vec![usize::MAX; num_vertices];
        let mut components = Vec::new();
        for root in 0..num_vertices {
            if comp_of[root] != usize::MAX {
                continue;
            }
            let c = components.len();
            let mut verts = vec![root];
            comp_of[root] = c;
            let mut i = 0;
            while i < verts.len() {
                let v = verts[i];
                i += 1;
                for s in &incident[v] {
                    let e = &edges[s.edge];
                    let w = if s.forward { e.dst } else { e.src };
                    if comp_of[w] == usize::MAX {
                        comp_of[w] = c;
                        verts.push(w);
                    }
                }
            }
            verts.sort_unstable();
            components.push(Component {
                basepoint: verts[0],
                vertices: verts,
            });
        }
        if let Some(bases) = basepoints {
            let mut seen = vec![false; components.len()];
            for &b in bases {
                if b >= num_vertices {
                    return Err(Error::InvalidGraph(format!("basepoint {b} missing")));
                }
                let c = comp_of[b];
                if seen[c] {
                    return Err(Error::InvalidGraph(format!(
                        "component of vertex {b} has two basepoints"
                    )));
                }
                seen[c] = true;
                components[c].basepoint = b;
            }
            if let Some(c) = seen.iter().position(|s| !s) {
                return Err(Error::InvalidGraph(format!(
                    "component containing vertex {} has no basepoint",
                    components[c].vertices[0]
                )));
            }
        }
        Ok(LabelledGraph {
            alphabet,
            num_vertices,
            edges,
            incident,
            step_table,
            comp_of,
            components,
        })
    }

    pub fn alphabet(&self) -> &Alphabet {
        &self.alphabet
    }

    pub fn num_vertices(&self) -> usize {
        self.num_vertices
    }

    pub fn num_edges(&self) -> usize {
        self.edges.len()
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn edge(&self, e: EdgeId) -> Edge {
        self.edges[e]
    }

    /// Steps leaving `v`, sorted.
    pub fn incident(&self, v: VertexId) -> &[Step] {
        &self.incident[v]
    }

    pub fn step_source(&self, s: Step) -> VertexId {
        let e = &self.edges[s.edge];
        if s.forward {
            e.src
        } else {
            e.dst
        }
    }

    pub fn step_target(&self, s: Step) -> VertexId {
        let e = &self.edges[s.edge];
        if s.forward {
            e.dst
        } else {
            e.src
        }
    }

    pub fn step_letter(&self, s: Step) -> Letter {
        Letter {
            gen: self.edges[s.edge].label,
            inverse: !s.forward,
        }
    }

    /// The (first) step from `v` reading `letter`. Unique in a reduced labelling.
    pub fn follow(&self, v: VertexId, letter: Letter) -> Option<Step> {
        let idx = v * 2 * self.alphabet.len() + 2 * letter.gen.0 + letter.inverse as usize;
        match self.step_table[idx] {
            NONE => None,
            e => Some(Step {
                edge: e as usize,
                forward: !letter.inverse,
            }),
        }
    }

    /// Reads `word` from `v` deterministically, returning the endpoint.
    pub fn read_from(&self, v: VertexId, word: &[Letter]) -> Option<VertexId> {
        let mut cur = v;
        for &l in word {
            cur = self.step_target(self.follow(cur, l)?);
        }
        Some(cur)
    }

    /// Like [`read_from`](Self::read_from) but returns the path.
    pub fn read_path(&self, v: VertexId, word: &[Letter]) -> Result<Path> {
        let mut cur = v;
        let mut steps = Vec::with_capacity(word.len());
        for (i, &l) in word.iter().enumerate() {
            let s = self.follow(cur, l).ok_or(Error::DeadEnd {
                position: i,
                vertex: cur,
            })?;
            steps.push(s);
            cur = self.step_target(s);
        }
        Ok(Path { start: v, steps })
    }

    pub fn components(&self) -> &[Component] {
        &self.components
    }

    pub fn component_of(&self, v: VertexId) -> usize {
        self.comp_of[v]
    }

    pub fn basepoints(&self) -> Vec<VertexId> {
        self.components.iter().map(|c| c.basepoint).collect()
    }

    pub fn is_connected(&self) -> bool {
        self.components.len() <= 1
    }

    /// Label of `path`: `+1` for forward steps, `-1` for backward; no reduction.
    pub fn path_label(&self, path: &Path) -> Result<Word> {
        path.validate(self)?;
        Ok(self.label_unchecked(&path.steps))
    }

    pub(crate) fn label_unchecked(&self, steps: &[Step]) -> Word {
        Word::from_letters(steps.iter().map(|&s| self.step_letter(s)).collect())
    }

    /// Local folding criterion; `Ok(())` iff the labelling is reduced.
    pub fn is_reduced_labelling(&self) -> std::result::Result<(), FoldingWitness> {
        let width = self.alphabet.len();
        let mut out = vec![NONE; width];
        let mut inn = vec![NONE; width];
        for v in 0..self.num_vertices {
            out.iter_mut().for_each(|x| *x = NONE);
            inn.iter_mut().for_each(|x| *x = NONE);
            for s in &self.incident[v] {
                let g = self.edges[s.edge].label.0;
                let slot = if s.forward { &mut out[g] } else { &mut inn[g] };
                if *slot != NONE && *slot as usize != s.edge {
                    return Err(FoldingWitness {
                        vertex: v,
                        first: *slot as usize,
                        second: s.edge,
                        outgoing: s.forward,
                    });
                }
                *slot = s.edge as u32;
            }
        }
        Ok(())
    }

    /// Shortest edge path from `from` to `to`, ties broken by the
    /// lexicographically smallest step sequence.
    pub fn shortest_path(&self, from: VertexId, to: VertexId) -> Option<Path> {
        let mut parent: Vec<Option<Step>> = vec![None; self.num_vertices];
        let mut seen = vec![false; self.num_vertices];
        seen[from] = true;
        let mut q = VecDeque::from([from]);
        while let Some(v) = q.pop_front() {
            if v == to {
                break;
            }
            for &s in &self.incident[v] {
                let w = self.step_target(s);
                if !seen[w] {
                    seen[w] = true;
                    parent[w] = Some(s);
                    q.push_back(w);
                }
            }
        }
        if !seen[to] {
            return None;
        }
        let mut steps = Vec::new();
        let mut cur = to;
        while cur != from {
            let s = parent[cur].expect("bfs parent");
            steps.push(s);
            cur = self.step_source(s);
        }
        steps.reverse();
        Some(Path { start: from, steps })
    }

    /// Same graph over another alphabet with relabelled edges.
    pub fn relabelled(&self, alphabet: Alphabet, labels: &[Gen]) -> Result<Self> {
        let edges = self
            .edges
            .iter()
            .zip(labels)
            .map(|(e, &label)| Edge { label, ..*e })
            .collect();
        Self::with_basepoints(alphabet, self.num_vertices, edges, &self.basepoints())
    }

    /// Disjoint union over a common alphabet; vertex and edge ids of later
    /// graphs are shifted past earlier ones.
    pub fn disjoint_union(alphabet: Alphabet, parts: &[LabelledGraph]) -> Result<Self> {
        let mut edges = Vec::new();
        let mut bases = Vec::new();
        let mut offset = 0;
        for p in parts {
            edges.extend(p.edges.iter().map(|e| Edge {
                src: e.src + offset,
                dst: e.dst + offset,
                label: e.label,
            }));
            bases.extend(p.basepoints().into_iter().map(|b| b + offset));
            offset += p.num_vertices;
        }
        Self::with_basepoints(alphabet, offset, edges, &bases)
    }

    pub fn to_text(&self) -> String {
        let a = &self.alphabet;
        let mut s = alphabet_header(a);
        for v in 0..self.num_vertices {
            let _ = writeln!(s, "vertex {v}");
        }
        for b in self.basepoints() {
            let _ = writeln!(s, "base {b}");
        }
        for (i, e) in self.edges.iter().enumerate() {
            let _ = writeln!(s, "edge {i} {} {} {}", e.src, e.dst, a.name(e.label));
        }
        s
    }

    /// Parses the line-oriented graph format. Vertex and edge ids must be
    /// exactly `0..n` (in any order); `base` lines are optional.
    pub fn parse(text: &str) -> Result<Self> {
        let mut names: Option<Vec<String>> = None;
        let mut blocks: Option<Vec<Vec<String>>> = None;
        let mut vertices: Vec<usize> = Vec::new();
        let mut bases: Vec<usize> = Vec::new();
        let mut raw_edges: Vec<(usize, usize, usize, String, usize)> = Vec::new();
        for (ln, line) in text.lines().enumerate() {
            let ln = ln + 1;
            let line = line.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (kw, rest) = line.split_once(char::is_whitespace).unwrap_or((line, ""));
            let num = |t: &str| -> Result<usize> {
                t.parse()
                    .map_err(|_| Error::parse(ln, format!("expected integer, got `{t}`")))
            };
            match kw {
                "alphabet" => {
                    names = Some(rest.split_whitespace().map(String::from).collect());
                }
                "partition" => blocks = Some(parse_blocks(rest, ln)?),
                "vertex" => vertices.push(num(rest.trim())?),
                "base" => bases.push(num(rest.trim())?),
                "edge" => {
                    let t: Vec<&str> = rest.split_whitespace().collect();
                    if t.len() != 4 {
                        return Err(Error::parse(ln, "edge needs: id src dst generator"));
                    }
                    raw_edges.push((num(t[0])?, num(t[1])?, num(t[2])?, t[3].to_string(), ln));
                }
                other => return Err(Error::parse(ln, format!("unknown keyword `{other}`"))),
            }
        }
        let names = names.ok_or_else(|| Error::parse(0, "missing `alphabet` line"))?;
        let alphabet = match blocks {
            Some(b) => Alphabet::with_named_blocks(&names, &b)?,
            None => Alphabet::new(&names)?,
        };
        let n = vertices.len();
        let mut seen = vec![false; n];
        for &v in &vertices {
            if v >= n || seen[v] {
                return Err(Error::InvalidGraph(
                    "vertex ids must be exactly 0..n".into(),
                ));
            }
            seen[v] = true;
        }
        let mut edges = vec![None; raw_edges.len()];
        for (id, src, dst, label, ln) in raw_edges {
            if id >= edges.len() || edges[id].is_some() {
                return Err(Error::parse(ln, "edge ids must be exactly 0..m"));
            }
            let label = alphabet.gen(&label)?;
            edges[id] = Some(Edge { src, dst, label });
        }
        let edges = edges.into_iter().map(|e| e.expect("dense")).collect();
        if bases.is_empty() {
            Self::new(alphabet, n, edges)
        } else {
            Self::with_basepoints(alphabet, n, edges, &bases)
        }
    }
}

/// The `alphabet` and `partition` lines shared by the text formats.
pub(crate) fn alphabet_header(a: &Alphabet) -> String {
    let blocks: Vec<String> = a
        .blocks()
        .iter()
        .map(|b| {
            let names: Vec<&str> = b.iter().map(|&g| a.name(g)).collect();
            format!("{{{}}}", names.join(" "))
        })
        .collect();
    format!(
        "alphabet {}\npartition {}\n",
        a.names().join(" "),
        blocks.join(" ")
    )
}

pub(crate) fn parse_blocks(text: &str, ln: usize) -> Result<Vec<Vec<String>>> {
    let mut out = Vec::new();
    let mut rest = text.trim();
    while !rest.is_empty() {
        let open = rest
            .strip_prefix('{')
            .ok_or_else(|| Error::parse(ln, "partition blocks look like {s t}"))?;
        let close = open
            .find('}')
            .ok_or_else(|| Error::parse(ln, "unterminated partition block"))?;
        out.push(
            open[..close]
                .split(|c: char| c.is_whitespace() || c == ',')
                .filter(|s| !s.is_empty())
                .map(String::from)
                .collect(),
        );
        rest = open[close + 1..].trim_start();
    }
    Ok(out)
}




#[cfg(test)]
pub(crate) use props::reduced_graph;
