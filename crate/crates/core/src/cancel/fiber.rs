//! The fiber square `Γ ×_K Γ`: pairs of vertices, joined by pairs of
//! edges carrying the same label in the same orientation. Immersed paths in
//! it are pairs of equally labelled immersions into `Γ`.

use crate::graph::{EdgeId, LabelledGraph, Path, Step, VertexId};

#[derive(Debug, Clone)]
pub struct FiberSquare {
    base_vertices: usize,
    /// `(first, second)` edge pairs with equal labels.
    edges: Vec<(EdgeId, EdgeId)>,
    incident: Vec<Vec<Step>>,
    src: Vec<usize>,
    dst: Vec<usize>,
}

impl FiberSquare {
    pub fn new(g: &LabelledGraph) -> Self {
        let n = g.num_vertices();
        let mut by_label: Vec<Vec<EdgeId>> = vec![Vec::new(); g.alphabet().len()];
        for (i, e) in g.edges().iter().enumerate() {
            by_label[e.label.0].push(i);
        }
        let mut edges = Vec::new();
        let mut src = Vec::new();
        let mut dst = Vec::new();
        let mut incident = vec![Vec::new(); n * n];
        for list in &by_label {
            for &e in list {
                for &f in list {
                    let (a, b) = (g.edge(e), g.edge(f));
                    let id = edges.len();
                    edges.push((e, f));
                    src.push(a.src * n + b.src);
                    dst.push(a.dst * n + b.dst);
                    incident[a.src * n + b.src].push(Step::fwd(id));
                    incident[a.dst * n + b.dst].push(Step::bwd(id));
                }
            }
        }
        FiberSquare {
            base_vertices: n,
            edges,
            incident,
            src,
            dst,
        }
    }

    pub fn vertex(&self, u: VertexId, v: VertexId) -> usize {
        u * self.base_vertices + v
    }

    pub fn coordinates(&self, x: usize) -> (VertexId, VertexId) {
        (x / self.base_vertices, x % self.base_vertices)
    }

    pub fn num_edges(&self) -> usize {
        self.edges.len()
    }

    pub fn incident(&self, x: usize) -> &[Step] {
        &self.incident[x]
    }

    pub fn step_target(&self, s: Step) -> usize {
        if s.forward {
            self.dst[s.edge]
        } else {
            self.src[s.edge]
        }
    }

    /// The two coordinate projections of a path in the square.
    pub fn project(&self, start: usize, steps: &[Step]) -> (Path, Path) {
        let (u, v) = self.coordinates(start);
        let mut p = Path::empty(u);
        let mut q = Path::empty(v);
        for s in steps {
            let (e, f) = self.edges[s.edge];
            p.steps.push(Step {
                edge: e,
                forward: s.forward,
            });
            q.steps.push(Step {
                edge: f,
                forward: s.forward,
            });
        }
        (p, q)
    }

    /// Lifts a pair of equally labelled paths of the same length.
    pub fn lift(&self, g: &LabelledGraph, p: &Path, q: &Path) -> Option<(usize, Vec<Step>)> {
        if p.len() != q.len() {
            return None;
        }
        let mut steps = Vec::with_capacity(p.len());
        let start = self.vertex(p.start, q.start);
        let mut cur = start;
        for (a, b) in p.steps.iter().zip(&q.steps) {
            if a.forward != b.forward || g.edge(a.edge).label != g.edge(b.edge).label {
                return None;
            }
            let s = *self.incident[cur]
                .iter()
                .find(|s| s.forward == a.forward && self.edges[s.edge] == (a.edge, b.edge))?;
            steps.push(s);
            cur = self.step_target(s);
        }
        Some((start, steps))
    }
}
