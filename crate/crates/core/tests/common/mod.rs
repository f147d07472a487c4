//! Brute-force oracles and random instances shared by the integration tests.
#![allow(dead_code)]

use num_rational::Ratio;
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

use grsc::comerford::{action_from_permutations, permutations, CosetAction};
use grsc::{Alphabet, Edge, Gen, LabelledGraph, Letter, Path, Step, Word};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn st() -> Alphabet {
    Alphabet::with_blocks(&["s", "t"], &[vec![0], vec![1]]).unwrap()
}

/// Three letters, `s` and `t` in one free factor.
pub fn stu() -> Alphabet {
    Alphabet::with_blocks(&["s", "t", "u"], &[vec![0, 1], vec![2]]).unwrap()
}

/// Adds random edges while the labelling stays reduced and `allow(x, y, g)`
/// holds.
pub fn random_reduced_graph_with(
    r: &mut impl Rng,
    alphabet: &Alphabet,
    n: usize,
    m: usize,
    allow: impl Fn(usize, usize, usize) -> bool,
) -> LabelledGraph {
    let k = alphabet.len();
    let mut out = vec![vec![false; k]; n];
    let mut inc = vec![vec![false; k]; n];
    let mut edges = Vec::new();
    for _ in 0..m * 6 {
        if edges.len() == m {
            break;
        }
        let (x, y, g) = (r.gen_range(0..n), r.gen_range(0..n), r.gen_range(0..k));
        if out[x][g] || inc[y][g] {
            continue;
        }
        if !allow(x, y, g) {
            continue;
        }
        out[x][g] = true;
        inc[y][g] = true;
        edges.push(Edge {
            src: x,
            dst: y,
            label: Gen(g),
        });
    }
    LabelledGraph::new(alphabet.clone(), n, edges).unwrap()
}

pub fn random_reduced_graph(
    r: &mut impl Rng,
    alphabet: &Alphabet,
    max_v: usize,
    max_e: usize,
) -> LabelledGraph {
    let n = r.gen_range(1..=max_v);
    let m = r.gen_range(0..=max_e);
    random_reduced_graph_with(r, alphabet, n, m, |_, _, _| true)
}

pub fn random_word(r: &mut impl Rng, num_gens: usize, len: usize) -> Word {
    Word::from_letters(
        (0..len)
            .map(|_| Letter {
                gen: Gen(r.gen_range(0..num_gens)),
                inverse: r.gen_bool(0.5),
            })
            .collect(),
    )
}

/// A random walk from `v` followed by a shortest path back.
pub fn random_closed_path(r: &mut impl Rng, g: &LabelledGraph, v: usize, walk: usize) -> Path {
    let mut p = Path::empty(v);
    let mut at = v;
    for _ in 0..walk {
        let inc = g.incident(at);
        if inc.is_empty() {
            break;
        }
        let s = inc[r.gen_range(0..inc.len())];
        p.steps.push(s);
        at = g.step_target(s);
    }
    let back = g.shortest_path(at, v).expect("same component");
    p.concat(&back)
}

/// Simple closed paths as edge sets in which every touched vertex has
/// degree two and which are connected; one oriented traversal each.
pub fn oracle_cycles(g: &LabelledGraph) -> Vec<Path> {
    let m = g.num_edges();
    assert!(m <= 16, "subset oracle is exponential");
    let edges = g.edges();
    let mut out = Vec::new();
    for mask in 1u32..(1 << m) {
        let chosen: Vec<usize> = (0..m).filter(|&e| mask >> e & 1 == 1).collect();
        let mut deg = vec![0; g.num_vertices()];
        for &e in &chosen {
            deg[edges[e].src] += 1;
            deg[edges[e].dst] += 1;
        }
        if deg.iter().any(|&d| d != 0 && d != 2) {
            continue;
        }
        // walk from the first edge; connected iff the walk uses them all
        let e0 = chosen[0];
        let start = edges[e0].src;
        let mut steps = vec![Step {
            edge: e0,
            forward: true,
        }];
        let mut at = edges[e0].dst;
        let mut used = vec![e0];
        while at != start {
            let next = chosen.iter().find_map(|&e| {
                if used.contains(&e) {
                    return None;
                }
                if edges[e].src == at {
                    Some(Step {
                        edge: e,
                        forward: true,
                    })
                } else if edges[e].dst == at {
                    Some(Step {
                        edge: e,
                        forward: false,
                    })
                } else {
                    None
                }
            });
            let Some(s) = next else { break };
            used.push(s.edge);
            at = if s.forward {
                edges[s.edge].dst
            } else {
                edges[s.edge].src
            };
            steps.push(s);
        }
        if at == start && used.len() == chosen.len() {
            out.push(Path { start, steps });
        }
    }
    out
}

/// Syllables of a word read cyclically, at least one.
pub fn oracle_cyclic_length(
    w: &[Letter],
    block: impl Fn(Gen) -> usize,
    free_product: bool,
) -> usize {
    if !free_product {
        return w.len();
    }
    let n = w.len();
    let changes = (0..n)
        .filter(|&i| block(w[i].gen) != block(w[(i + n - 1) % n].gen))
        .count();
    changes.max(1)
}

pub fn oracle_linear_length(
    w: &[Letter],
    block: impl Fn(Gen) -> usize,
    free_product: bool,
) -> usize {
    if !free_product {
        return w.len();
    }
    (0..w.len())
        .filter(|&i| i == 0 || block(w[i].gen) != block(w[i - 1].gen))
        .count()
}

fn follow(g: &LabelledGraph, v: usize, l: Letter) -> Option<(usize, Step)> {
    g.incident(v)
        .iter()
        .find(|&&s| g.step_letter(s) == l)
        .map(|&s| (g.step_target(s), s))
}

/// Whether a label-preserving isomorphism of components sends `x` to `y`,
/// found by propagating from `x`.
pub fn oracle_related(g: &LabelledGraph, x: usize, y: usize) -> bool {
    let n = g.num_vertices();
    let mut map = vec![usize::MAX; n];
    let mut stack = vec![x];
    map[x] = y;
    let mut count_x = 0;
    let mut edges_x = 0;
    while let Some(a) = stack.pop() {
        count_x += 1;
        for &s in g.incident(a) {
            edges_x += 1;
            let Some((b2, _)) = follow(g, map[a], g.step_letter(s)) else {
                return false;
            };
            let b = g.step_target(s);
            if map[b] == usize::MAX {
                map[b] = b2;
                stack.push(b);
            } else if map[b] != b2 {
                return false;
            }
        }
    }
    let mut image: Vec<usize> = map.iter().copied().filter(|&v| v != usize::MAX).collect();
    image.sort_unstable();
    image.dedup();
    if image.len() != count_x {
        return false;
    }
    // the image must be the whole component of y with the same edge count
    let mut seen = vec![false; n];
    let mut stack = vec![y];
    seen[y] = true;
    let (mut count_y, mut edges_y) = (0, 0);
    while let Some(a) = stack.pop() {
        count_y += 1;
        for &s in g.incident(a) {
            edges_y += 1;
            let b = g.step_target(s);
            if !std::mem::replace(&mut seen[b], true) {
                stack.push(b);
            }
        }
    }
    count_x == count_y && edges_x == edges_y
}

/// A path is a piece if its label can be read from some vertex whose
/// reading is not the image of this one under an isomorphism.
pub fn oracle_is_piece(g: &LabelledGraph, p: &Path) -> bool {
    let w = g.path_label(p).unwrap();
    (0..g.num_vertices()).any(|y| {
        let mut at = y;
        for &l in w.letters() {
            match follow(g, at, l) {
                Some((b, _)) => at = b,
                None => return false,
            }
        }
        !oracle_related(g, p.start, y)
    })
}

/// Every subpath of `c` given by (rotation, length), one orientation.
pub fn cycle_subpaths(g: &LabelledGraph, c: &Path) -> Vec<(usize, usize, Path)> {
    let n = c.len();
    let mut out = Vec::new();
    for r in 0..n {
        let rot = c.rotate(g, r);
        for len in 1..=n {
            out.push((r, len, rot.subpath(g, 0, len)));
        }
    }
    out
}

/// `Gr'(λ)` by brute force over cycles, subpaths and orientations.
pub fn oracle_gr_metric(g: &LabelledGraph, lambda: Ratio<u64>, free_product: bool) -> bool {
    let part = g.alphabet().partition().clone();
    let block = |x: Gen| part.block_of(x);
    let (num, den) = (*lambda.numer() as usize, *lambda.denom() as usize);
    for c in oracle_cycles(g) {
        let lc = oracle_cyclic_length(g.path_label(&c).unwrap().letters(), block, free_product);
        for orient in [c.clone(), c.reversed(g)] {
            for (_, _, p) in cycle_subpaths(g, &orient) {
                let lp =
                    oracle_linear_length(g.path_label(&p).unwrap().letters(), block, free_product);
                if lp * den >= num * lc && oracle_is_piece(g, &p) {
                    return false;
                }
            }
        }
    }
    true
}

/// Least number of consecutive pieces covering cycle `c`, if any.
pub fn oracle_min_cover(g: &LabelledGraph, c: &Path) -> Option<usize> {
    let n = c.len();
    let mut piece = vec![vec![false; n + 1]; n];
    for (r, len, p) in cycle_subpaths(g, c) {
        piece[r][len] = oracle_is_piece(g, &p);
    }
    let mut best: Option<usize> = None;
    for r in 0..n {
        let mut dp = vec![usize::MAX; n + 1];
        dp[0] = 0;
        for j in 1..=n {
            for i in 0..j {
                if dp[i] != usize::MAX && piece[(r + i) % n][j - i] {
                    dp[j] = dp[j].min(dp[i] + 1);
                }
            }
        }
        if dp[n] != usize::MAX {
            best = Some(best.map_or(dp[n], |b| b.min(dp[n])));
        }
    }
    best
}

/// `Gr(p)` by brute force.
pub fn oracle_gr_p(g: &LabelledGraph, p: usize) -> bool {
    oracle_cycles(g)
        .iter()
        .all(|c| oracle_min_cover(g, c).is_none_or(|k| k >= p))
}

pub fn random_action(r: &mut impl Rng, h: usize, num_gens: usize) -> CosetAction {
    let ps = permutations(h);
    loop {
        let perms = (0..num_gens)
            .map(|_| ps[r.gen_range(0..ps.len())].clone())
            .collect();
        if let Ok(a) = action_from_permutations(perms, h) {
            return a;
        }
    }
}

/// A random reduced graph whose closed paths all act trivially: every
/// vertex carries a permutation `π` and a `g`-edge runs `π → π σ_g`.
pub fn random_trivializing_graph(
    r: &mut impl Rng,
    alphabet: &Alphabet,
    action: &CosetAction,
    n: usize,
    m: usize,
) -> LabelledGraph {
    let h = action.degree();
    let ps = permutations(h);
    let state: Vec<Vec<usize>> = (0..n)
        .map(|_| ps[r.gen_range(0..ps.len())].clone())
        .collect();
    random_reduced_graph_with(r, alphabet, n, m, |x, y, g| {
        let sg = action.perm(Gen(g));
        (0..h).all(|c| sg[state[x][c]] == state[y][c])
    })
}

/// A random transitive action of degree 1 to 3 and a graph, over `stu`,
/// whose closed paths act trivially.
pub fn comerford_instance(seed: u64) -> (LabelledGraph, CosetAction) {
    let mut r = rng(seed);
    let a = stu();
    let h = r.gen_range(1..=3);
    let act = random_action(&mut r, h, a.len());
    let n = r.gen_range(2..=8);
    let m = r.gen_range(1..=10);
    (random_trivializing_graph(&mut r, &a, &act, n, m), act)
}
