//! Non-unique-product certificates: every product `ab` with `a ∈ A`,
//! `b ∈ B` is traced from the base vertex, and products are bucketed by
//! their end vertex. Two paths from the base vertex to the same vertex
//! differ by a closed path, so witnesses in one bucket are equal in the
//! group.

mod dehn;

pub use dehn::{
    abelianization_rank, check_injectivity, dehn_reduce, enumerate_relators, DehnResult,
    DehnStatus, InjectivityVerdict, RelatorSet,
};

use std::collections::{BTreeMap, HashSet};
use std::fmt::Write as _;

use crate::error::{Error, Result};
use crate::graph::{LabelledGraph, Path, VertexId};
use crate::ripssegev::{ProductSets, RSGraph};
use crate::word::{Alphabet, Word};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ProductWitness {
    pub a_elem: Word,
    pub b_elem: Word,
    pub path: Path,
    pub endvertex: VertexId,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Certificate {
    pub base: VertexId,
    pub a_elems: Vec<Word>,
    pub b_elems: Vec<Word>,
    pub buckets: BTreeMap<VertexId, Vec<ProductWitness>>,
}

impl Certificate {
    /// End vertices reached by a single product.
    pub fn singletons(&self) -> Vec<VertexId> {
        self.buckets
            .iter()
            .filter(|(_, w)| w.len() < 2)
            .map(|(&v, _)| v)
            .collect()
    }

    pub fn succeeded(&self) -> bool {
        self.singletons().is_empty()
    }

    pub fn num_witnesses(&self) -> usize {
        self.buckets.values().map(Vec::len).sum()
    }

    pub fn to_text(&self, alphabet: &Alphabet) -> String {
        let mut s = crate::graph::alphabet_header(alphabet);
        let _ = writeln!(s, "base {}", self.base);
        for a in &self.a_elems {
            let _ = writeln!(s, "element A {}", a.display(alphabet));
        }
        for b in &self.b_elems {
            let _ = writeln!(s, "element B {}", b.display(alphabet));
        }
        for (v, ws) in &self.buckets {
            let _ = writeln!(s, "vertex {v}");
            for w in ws {
                let _ = writeln!(
                    s,
                    "A {} B {} PATH {}",
                    w.a_elem.display(alphabet),
                    w.b_elem.display(alphabet),
                    w.path.to_text()
                );
            }
        }
        s
    }

    /// Parses the certificate format. The end vertex of each witness is
    /// taken from its bucket header; nothing is re-traced here.
    pub fn parse(text: &str, alphabet: &Alphabet) -> Result<Certificate> {
        let mut base = None;
        let mut a_elems = Vec::new();
        let mut b_elems = Vec::new();
        let mut buckets: BTreeMap<VertexId, Vec<ProductWitness>> = BTreeMap::new();
        let mut current: Option<VertexId> = None;
        for (ln, line) in text.lines().enumerate() {
            let ln = ln + 1;
            let line = line.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (kw, rest) = line.split_once(char::is_whitespace).unwrap_or((line, ""));
            let rest = rest.trim();
            let word =
                |t: &str| Word::parse(t, alphabet).map_err(|e| Error::parse(ln, e.to_string()));
            let num = |t: &str| -> Result<usize> {
                t.parse()
                    .map_err(|_| Error::parse(ln, format!("expected integer, got `{t}`")))
            };
            match kw {
                "alphabet" | "partition" => {}
                "base" => base = Some(num(rest)?),
                "element" => match rest.split_once(char::is_whitespace) {
                    Some(("A", w)) => a_elems.push(word(w)?),
                    Some(("B", w)) => b_elems.push(word(w)?),
                    _ => {
                        return Err(Error::parse(
                            ln,
                            "element lines look like `element A <word>`",
                        ))
                    }
                },
                "vertex" => {
                    let v = num(rest)?;
                    if buckets.contains_key(&v) {
                        return Err(Error::parse(ln, format!("bucket {v} repeated")));
                    }
                    buckets.insert(v, Vec::new());
                    current = Some(v);
                }
                "A" => {
                    let v = current.ok_or_else(|| Error::parse(ln, "witness before `vertex`"))?;
                    let (a, rest) = rest
                        .split_once(" B ")
                        .ok_or_else(|| Error::parse(ln, "witness needs `B`"))?;
                    let (b, path) = rest
                        .split_once("PATH")
                        .ok_or_else(|| Error::parse(ln, "witness needs `PATH`"))?;
                    let path =
                        Path::parse(path.trim()).map_err(|e| Error::parse(ln, e.to_string()))?;
                    buckets.get_mut(&v).unwrap().push(ProductWitness {
                        a_elem: word(a.trim())?,
                        b_elem: word(b.trim())?,
                        path,
                        endvertex: v,
                    });
                }
                other => return Err(Error::parse(ln, format!("unknown keyword `{other}`"))),
            }
        }
        Ok(Certificate {
            base: base.ok_or_else(|| Error::parse(0, "missing `base` line"))?,
            a_elems,
            b_elems,
            buckets,
        })
    }
}

/// The immersed path from the base vertex reading `free_reduce(a·b)`.
pub fn trace_product(rsg: &RSGraph, a_elem: &Word, b_elem: &Word) -> Result<ProductWitness> {
    trace_from(&rsg.graph, rsg.basevertex(), a_elem, b_elem)
}

fn trace_from(g: &LabelledGraph, base: VertexId, a: &Word, b: &Word) -> Result<ProductWitness> {
    let w = a.concat(b).free_reduce();
    let path = g.read_path(base, w.letters())?;
    Ok(ProductWitness {
        a_elem: a.clone(),
        b_elem: b.clone(),
        endvertex: path.terminal(g),
        path,
    })
}

/// Traces every product of distinct elements of `A` and `B` and buckets
/// them by end vertex. A bucket with one witness is reported by
/// [`Certificate::singletons`].
pub fn build_certificate(rsg: &RSGraph, sets: &ProductSets) -> Result<Certificate> {
    use rayon::prelude::*;
    let a_elems = sets.a_elements();
    let b_elems = sets.b_elements();
    let pairs: Vec<(&Word, &Word)> = a_elems
        .iter()
        .flat_map(|a| b_elems.iter().map(move |b| (a, b)))
        .collect();
    let witnesses: Vec<ProductWitness> = pairs
        .par_iter()
        .map(|(a, b)| trace_product(rsg, a, b))
        .collect::<Result<_>>()?;
    let mut buckets: BTreeMap<VertexId, Vec<ProductWitness>> = BTreeMap::new();
    for w in witnesses {
        buckets.entry(w.endvertex).or_default().push(w);
    }
    Ok(Certificate {
        base: rsg.basevertex(),
        a_elems,
        b_elems,
        buckets,
    })
}

/// Outcome of an independent certificate check.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct CertificateCheck {
    /// Human-readable problems; empty iff the certificate is valid.
    pub problems: Vec<String>,
}

impl CertificateCheck {
    pub fn ok(&self) -> bool {
        self.problems.is_empty()
    }
}

/// Re-traces every witness path in `g` and re-counts buckets: each path
/// must start at the base vertex, end at its bucket vertex and have label
/// freely equal to `a·b`; every pair of listed elements must appear exactly
/// once; every bucket needs two distinct pairs.
pub fn verify_certificate(g: &LabelledGraph, cert: &Certificate) -> CertificateCheck {
    let a_names = g.alphabet();
    let mut problems = Vec::new();
    if cert.base >= g.num_vertices() {
        problems.push(format!("base vertex {} does not exist", cert.base));
        return CertificateCheck { problems };
    }
    let mut seen: HashSet<(Word, Word)> = HashSet::new();
    for (&v, ws) in &cert.buckets {
        let mut pairs = HashSet::new();
        for w in ws {
            let tag = format!(
                "witness ({}, {}) in bucket {v}",
                w.a_elem.display(a_names),
                w.b_elem.display(a_names)
            );
            if w.path.start != cert.base {
                problems.push(format!("{tag}: path does not start at the base vertex"));
            }
            match g.path_label(&w.path) {
                Err(e) => problems.push(format!("{tag}: {e}")),
                Ok(label) => {
                    if label.free_reduce() != w.a_elem.concat(&w.b_elem).free_reduce() {
                        problems.push(format!("{tag}: label is not a·b"));
                    }
                    if w.path.terminal(g) != v {
                        problems.push(format!("{tag}: path ends at {}", w.path.terminal(g)));
                    }
                }
            }
            pairs.insert((w.a_elem.clone(), w.b_elem.clone()));
            if !seen.insert((w.a_elem.clone(), w.b_elem.clone())) {
                problems.push(format!("{tag}: pair listed twice"));
            }
        }
        if pairs.len() < 2 {
            problems.push(format!("bucket {v} has fewer than two distinct pairs"));
        }
    }
    for a in &cert.a_elems {
        for b in &cert.b_elems {
            if !seen.contains(&(a.clone(), b.clone())) {
                problems.push(format!(
                    "pair ({}, {}) missing",
                    a.display(a_names),
                    b.display(a_names)
                ));
            }
        }
    }
    for (a, b) in &seen {
        if !cert.a_elems.contains(a) || !cert.b_elems.contains(b) {
            problems.push(format!(
                "pair ({}, {}) is not in A × B",
                a.display(a_names),
                b.display(a_names)
            ));
        }
    }
    problems.sort();
    CertificateCheck { problems }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ripssegev::{build_sets, CoefficientSystem};

    pub(crate) fn small_cs() -> CoefficientSystem {
        CoefficientSystem::parse("a s^2\nb t^2\nN 1\nC 2\nNIJ 1 1 1 1 1\nPIJ 1 1 2 0 1\n").unwrap()
    }

    fn buildable() -> RSGraph {
        crate::ripssegev::tests::first_buildable()
    }

    #[test]
    fn trace_examples() {
        let r = buildable();
        let sets = build_sets(&r).unwrap();
        let one = Word::empty();
        let w = trace_product(&r, &one, &one).unwrap();
        assert!(w.path.is_empty());
        assert_eq!(w.endvertex, r.u[0][0]);
        let a = &r.cs.a;
        for (j, x) in sets.a_sets[0].iter().enumerate() {
            assert_eq!(trace_product(&r, x, &one).unwrap().endvertex, r.u[0][j]);
            assert_eq!(trace_product(&r, x, &r.cs.b).unwrap().endvertex, r.v1[0][j]);
        }
        let ab = a.concat(&r.cs.b);
        assert_eq!(trace_product(&r, &one, &ab).unwrap().endvertex, r.v1[0][1]);
    }

    #[test]
    fn identification_gives_double_representation() {
        let r = buildable();
        let sets = build_sets(&r).unwrap();
        let cert = build_certificate(&r, &sets).unwrap();
        // u_{1,0} ~ (v1)_{N11, P11}
        let (n, p) = (r.cs.nij[0][0] - 1, r.cs.pij[0][0]);
        assert_eq!(r.u[0][0], r.v1[n][p]);
        if p < r.cs.c[n] {
            let bucket = &cert.buckets[&r.u[0][0]];
            let x = sets.connectors[n].concat(&r.cs.a.pow(p)).free_reduce();
            assert!(bucket
                .iter()
                .any(|w| w.a_elem.is_empty() && w.b_elem.is_empty()));
            assert!(bucket.iter().any(|w| w.a_elem == x && w.b_elem == r.cs.b));
        }
        assert_eq!(cert.num_witnesses(), sets.a_elements().len() * 4);
    }

    #[test]
    fn text_round_trip_and_verification() {
        let r = buildable();
        let sets = build_sets(&r).unwrap();
        let cert = build_certificate(&r, &sets).unwrap();
        let text = cert.to_text(r.graph.alphabet());
        let back = Certificate::parse(&text, r.graph.alphabet()).unwrap();
        assert_eq!(back, cert);
        let check = verify_certificate(&r.graph, &back);
        assert_eq!(check.ok(), cert.succeeded(), "{:?}", check.problems);

        let mut bad = cert.clone();
        let (&v, _) = bad.buckets.iter().next().unwrap();
        bad.buckets.get_mut(&v).unwrap()[0].b_elem = r.cs.a.pow(3);
        assert!(!verify_certificate(&r.graph, &bad).ok());
    }

    #[test]
    fn unglued_lines_leave_singletons() {
        // the disjoint union of the p_i' alone: every product ends at its own
        // vertex
        let cs = small_cs();
        let sk = crate::ripssegev::Skeleton::new(&cs);
        let g = LabelledGraph::new(cs.alphabet.clone(), sk.num_vertices, sk.edges.clone()).unwrap();
        let rsg = RSGraph {
            graph: g,
            cs: cs.clone(),
            u: sk.u.clone(),
            v1: sk.v1.clone(),
        };
        let sets = ProductSets {
            a_sets: vec![(0..2).map(|j| cs.a.pow(j)).collect()],
            b_set: vec![
                Word::empty(),
                cs.a.clone(),
                cs.b.clone(),
                cs.a.concat(&cs.b),
            ],
            connectors: vec![Word::empty()],
            basevertex: sk.u[0][0],
        };
        let cert = build_certificate(&rsg, &sets).unwrap();
        assert!(!cert.succeeded());
        assert!(!cert.singletons().is_empty());
    }
}
