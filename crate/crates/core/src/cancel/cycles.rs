//! Enumeration of simple closed paths.

use crate::error::{Error, Result};
use crate::graph::{LabelledGraph, Path, Step, VertexId};

/// Outcome of a capped enumeration.
#[derive(Debug, Clone)]
pub struct CycleList {
    /// One representative per undirected simple cycle: it starts at the
    /// cycle's smallest vertex and runs in the direction whose first edge id
    /// is smaller than its last (loops: forward).
    pub cycles: Vec<Path>,
    /// `false` if the cap stopped the enumeration early.
    pub exhaustive: bool,
}

/// Every simple closed path, up to rotation and reversal, stopping after
/// `cap` cycles.
pub fn enumerate_cycles(g: &LabelledGraph, cap: usize) -> CycleList {
    let n = g.num_vertices();
    let mut cycles = Vec::new();
    let mut on_path = vec![false; n];
    let mut steps: Vec<Step> = Vec::new();
    for root in 0..n {
        on_path[root] = true;
        if !dfs(g, root, root, &mut on_path, &mut steps, &mut cycles, cap) {
            return CycleList {
                cycles,
                exhaustive: false,
            };
        }
        on_path[root] = false;
    }
    CycleList {
        cycles,
        exhaustive: true,
    }
}

/// Like [`enumerate_cycles`] but a cap overflow is an error.
pub fn simple_cycles(g: &LabelledGraph, cap: usize) -> Result<Vec<Path>> {
    let list = enumerate_cycles(g, cap);
    if list.exhaustive {
        Ok(list.cycles)
    } else {
        Err(Error::Resource(format!("more than {cap} simple cycles")))
    }
}

fn dfs(
    g: &LabelledGraph,
    root: VertexId,
    cur: VertexId,
    on_path: &mut [bool],
    steps: &mut Vec<Step>,
    out: &mut Vec<Path>,
    cap: usize,
) -> bool {
    for &s in g.incident(cur) {
        let w = g.step_target(s);
        if w == root {
            let closes = match steps.first() {
                None => s.forward && g.edge(s.edge).src == g.edge(s.edge).dst,
                Some(first) => first.edge < s.edge,
            };
            if closes {
                if out.len() == cap {
                    return false;
                }
                let mut p = steps.clone();
                p.push(s);
                out.push(Path {
                    start: root,
                    steps: p,
                });
            }
            continue;
        }
        if w < root || on_path[w] {
            continue;
        }
        on_path[w] = true;
        steps.push(s);
        let ok = dfs(g, root, w, on_path, steps, out, cap);
        steps.pop();
        on_path[w] = false;
        if !ok {
            return false;
        }
    }
    true
}
