//! Graphviz output.

use std::fmt::Write as _;

use crate::graph::LabelledGraph;

fn quote(s: &str) -> String {
    format!("\"{}\"", s.replace('\\', "\\\\").replace('"', "\\\""))
}

/// A `digraph` with one node per vertex and one labelled arrow per edge.
/// Basepoints are drawn as double circles.
pub fn export_dot(g: &LabelledGraph, name: &str) -> String {
    let bases = g.basepoints();
    let mut s = format!("digraph {} {{\n  node [shape=circle];\n", quote(name));
    for v in 0..g.num_vertices() {
        let shape = if bases.contains(&v) {
            " shape=doublecircle"
        } else {
            ""
        };
        let _ = writeln!(s, "  {v} [label=\"{v}\"{shape}];");
    }
    for (i, e) in g.edges().iter().enumerate() {
        let _ = writeln!(
            s,
            "  {} -> {} [label={} id=\"e{i}\"];",
            e.src,
            e.dst,
            quote(g.alphabet().name(e.label))
        );
    }
    s.push_str("}\n");
    s
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::testutil::*;
    use crate::word::Alphabet;

    #[test]
    fn single_vertex() {
        let a = Alphabet::new(&["s"]).unwrap();
        let d = export_dot(&graph(&a, 1, &[]), "g");
        assert_eq!(d.matches("label=\"0\"").count(), 1);
        assert!(!d.contains("->"));
    }

    #[test]
    fn edges_and_quoting() {
        let a = Alphabet::new(&["s@1", "t@1"]).unwrap();
        let g = graph(&a, 2, &[(0, 1, "s@1"), (1, 1, "t@1")]);
        let d = export_dot(&g, "K\"H");
        assert!(d.starts_with("digraph \"K\\\"H\""));
        assert!(d.contains("0 -> 1 [label=\"s@1\" id=\"e0\"];"));
        assert!(d.contains("1 -> 1 [label=\"t@1\" id=\"e1\"];"));
        assert_eq!(d, export_dot(&g, "K\"H"));
    }
}
