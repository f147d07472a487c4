//! Verifier-in-the-loop search for coefficient systems.
//!
//! Candidate `t` draws its randomness from a ChaCha stream keyed by
//! `(seed, t)`, so candidates are independent of evaluation order. The
//! number of lines cycles through `1, 2, 4, …, n_max`; the `C_i` are drawn
//! from the upper half of `c_min..=c_max`. Identifications are placed
//! greedily in shuffled order, each joining the pair of vertices that is
//! farthest apart in the partially glued graph (unreachable first) among
//! the placements that keep the labelling reduced; ties are broken at
//! random. Distances count syllables, so short cycles in the free product
//! length are avoided first.

use std::collections::VecDeque;

use num_rational::Ratio;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use super::{build_rips_segev, build_sets, CoefficientSystem, MinUnionFind, Skeleton};
use crate::cancel::{check_gr_metric_with, ConditionVerdict, MetricOptions};
use crate::error::{Error, Result};
use crate::word::{Alphabet, LengthFunction, Word};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SearchConfig {
    /// Number of candidates to evaluate.
    pub budget: u64,
    pub seed: u64,
    pub n_max: usize,
    pub c_min: usize,
    pub c_max: usize,
    /// Candidates evaluated in parallel per round.
    pub batch: usize,
    /// Also reject candidates whose product certificate has a singleton bucket.
    pub require_certificate: bool,
}

impl Default for SearchConfig {
    fn default() -> Self {
        SearchConfig {
            budget: 256,
            seed: 0,
            n_max: 32,
            c_min: 2,
            c_max: 12,
            batch: 16,
            require_certificate: true,
        }
    }
}

impl SearchConfig {
    pub fn n_schedule(&self) -> Vec<usize> {
        let mut out = vec![1];
        while out.last().unwrap() * 2 <= self.n_max.max(1) {
            out.push(out.last().unwrap() * 2);
        }
        out
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Found {
    pub cs: CoefficientSystem,
    pub index: u64,
    pub verdict: ConditionVerdict,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum CandidateResult {
    /// Some identification had no placement keeping the labelling reduced.
    NoPlacement,
    Folding,
    Disconnected,
    Violated,
    CertificateFailed,
    Verified(Box<Found>),
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct SearchStats {
    pub tried: u64,
    pub no_placement: u64,
    pub folding: u64,
    pub disconnected: u64,
    pub violated: u64,
    pub certificate_failed: u64,
}

impl SearchStats {
    fn record(&mut self, r: &CandidateResult) {
        self.tried += 1;
        match r {
            CandidateResult::NoPlacement => self.no_placement += 1,
            CandidateResult::Folding => self.folding += 1,
            CandidateResult::Disconnected => self.disconnected += 1,
            CandidateResult::Violated => self.violated += 1,
            CandidateResult::CertificateFailed => self.certificate_failed += 1,
            CandidateResult::Verified(_) => {}
        }
    }

    pub fn to_text(&self) -> String {
        format!(
            "tried {}\nno_placement {}\nfolding {}\ndisconnected {}\nviolated {}\ncertificate_failed {}\n",
            self.tried,
            self.no_placement,
            self.folding,
            self.disconnected,
            self.violated,
            self.certificate_failed
        )
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SearchOutcome {
    /// `None` when the budget ran out.
    pub found: Option<Found>,
    pub stats: SearchStats,
}

/// Searches for a connected coefficient system whose Rips–Segev graph
/// satisfies `Gr′*(1/6)`. Only verified systems are returned.
pub fn search_coefficients(
    alphabet: &Alphabet,
    a: &Word,
    b: &Word,
    cfg: &SearchConfig,
) -> Result<SearchOutcome> {
    let probe = CoefficientSystem {
        alphabet: alphabet.clone(),
        a: a.clone(),
        b: b.clone(),
        c: vec![1],
        nij: vec![[1; 4]],
        pij: vec![[0; 4]],
    };
    probe.validate()?;
    if cfg.c_min == 0 || cfg.c_min > cfg.c_max || cfg.batch == 0 {
        return Err(Error::InvalidCoefficients(
            "search needs 1 ≤ c_min ≤ c_max and a positive batch".into(),
        ));
    }
    let mut stats = SearchStats::default();
    let mut t = 0;
    while t < cfg.budget {
        let end = (t + cfg.batch as u64).min(cfg.budget);
        let results: Vec<CandidateResult> = (t..end)
            .into_par_iter()
            .map(|i| evaluate_candidate(&probe, cfg, i))
            .collect();
        for r in results {
            stats.record(&r);
            if let CandidateResult::Verified(f) = r {
                return Ok(SearchOutcome {
                    found: Some(*f),
                    stats,
                });
            }
        }
        t = end;
    }
    Ok(SearchOutcome { found: None, stats })
}

/// Builds and verifies candidate `index`.
pub fn evaluate_candidate(
    probe: &CoefficientSystem,
    cfg: &SearchConfig,
    index: u64,
) -> CandidateResult {
    let Some(cs) = generate_candidate(probe, cfg, index) else {
        return CandidateResult::NoPlacement;
    };
    let rsg = match build_rips_segev(&cs) {
        Ok(r) => r,
        Err(_) => return CandidateResult::Folding,
    };
    if !rsg.is_connected() {
        return CandidateResult::Disconnected;
    }
    let lf = LengthFunction::free_product(&cs.alphabet);
    let opts = MetricOptions {
        stop_at_first: true,
        piece_cap: None,
    };
    let verdict = match check_gr_metric_with(&rsg.graph, Ratio::new(1, 6), &lf, &opts) {
        Ok(v) if v.satisfied() => v,
        _ => return CandidateResult::Violated,
    };
    if cfg.require_certificate {
        let ok = build_sets(&rsg)
            .and_then(|sets| crate::updcert::build_certificate(&rsg, &sets))
            .is_ok_and(|c| c.succeeded());
        if !ok {
            return CandidateResult::CertificateFailed;
        }
    }
    CandidateResult::Verified(Box::new(Found { cs, index, verdict }))
}

/// The coefficient system proposed for candidate `index`, or `None` if the
/// greedy placement got stuck.
pub fn generate_candidate(
    probe: &CoefficientSystem,
    cfg: &SearchConfig,
    index: u64,
) -> Option<CoefficientSystem> {
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    rng.set_stream(index);
    let sched = cfg.n_schedule();
    let n = sched[(index % sched.len() as u64) as usize];
    let lo = (cfg.c_min + cfg.c_max).div_ceil(2).max(cfg.c_min);
    let c: Vec<usize> = (0..n).map(|_| rng.gen_range(lo..=cfg.c_max)).collect();
    let mut cs = CoefficientSystem {
        c,
        nij: vec![[1; 4]; n],
        pij: vec![[0; 4]; n],
        ..probe.clone()
    };
    let sk = Skeleton::new(&cs);
    let lf = LengthFunction::free_product(&cs.alphabet);
    let mut glue = Gluing::new(&sk, &lf);
    let mut order: Vec<(usize, usize)> = (0..n).flat_map(|i| (0..4).map(move |j| (i, j))).collect();
    order.shuffle(&mut rng);
    for (i, j) in order {
        let source = sk.identification(i, j, 0, 0).0;
        let dist = glue.distances(source);
        let mut best: Vec<(usize, usize)> = Vec::new();
        let mut best_d = 0;
        for tn in 0..n {
            for p in 0..=cs.c[tn] {
                let (x, y) = sk.identification(i, j, tn, p);
                if !glue.admissible(x, y) {
                    continue;
                }
                let d = dist[glue.uf.find(y)];
                if best.is_empty() || d > best_d {
                    best.clear();
                    best_d = d;
                }
                if d == best_d {
                    best.push((tn, p));
                }
            }
        }
        let &(tn, p) = best.choose(&mut rng)?;
        let (x, y) = sk.identification(i, j, tn, p);
        glue.merge(x, y);
        cs.nij[i][j] = tn + 1;
        cs.pij[i][j] = p;
    }
    Some(cs)
}

/// The partially identified skeleton.
struct Gluing {
    uf: MinUnionFind,
    members: Vec<Vec<usize>>,
    /// Occupied letter slots `2·gen + incoming` per representative.
    slots: Vec<Vec<usize>>,
    /// `(neighbour, block)` per base vertex.
    adj: Vec<Vec<(usize, usize)>>,
    blocks: usize,
}

impl Gluing {
    fn new(sk: &Skeleton, lf: &LengthFunction) -> Self {
        let n = sk.num_vertices;
        let mut slots = vec![Vec::new(); n];
        let mut adj = vec![Vec::new(); n];
        let mut blocks = 1;
        for e in &sk.edges {
            slots[e.src].push(2 * e.label.0);
            slots[e.dst].push(2 * e.label.0 + 1);
            let b = lf.block(e.label);
            blocks = blocks.max(b + 1);
            adj[e.src].push((e.dst, b));
            adj[e.dst].push((e.src, b));
        }
        Gluing {
            uf: MinUnionFind::new(n),
            members: (0..n).map(|v| vec![v]).collect(),
            slots,
            adj,
            blocks,
        }
    }

    fn admissible(&mut self, x: usize, y: usize) -> bool {
        let (rx, ry) = (self.uf.find(x), self.uf.find(y));
        rx == ry || !self.slots[rx].iter().any(|s| self.slots[ry].contains(s))
    }

    fn merge(&mut self, x: usize, y: usize) {
        let (rx, ry) = (self.uf.find(x), self.uf.find(y));
        if rx == ry {
            return;
        }
        let r = self.uf.union(rx, ry);
        let other = if r == rx { ry } else { rx };
        let m = std::mem::take(&mut self.members[other]);
        self.members[r].extend(m);
        let s = std::mem::take(&mut self.slots[other]);
        self.slots[r].extend(s);
    }

    /// Syllable distance from `x` to every representative (`usize::MAX`
    /// when unreachable), by 0-1 BFS over `(vertex, block)`.
    fn distances(&mut self, x: usize) -> Vec<usize> {
        let n = self.members.len();
        let nb = self.blocks;
        let mut dist = vec![usize::MAX; n * nb];
        let mut dq = VecDeque::new();
        let r = self.uf.find(x);
        let mut out = vec![usize::MAX; n];
        out[r] = 0;
        let mut start = Vec::new();
        for &m in &self.members[r] {
            for &(w, b) in &self.adj[m] {
                start.push((self.uf.find(w), b));
            }
        }
        for (w, b) in start {
            if dist[w * nb + b] > 1 {
                dist[w * nb + b] = 1;
                dq.push_back((w, b, 1));
            }
        }
        while let Some((v, b, d)) = dq.pop_front() {
            if d > dist[v * nb + b] {
                continue;
            }
            out[v] = out[v].min(d);
            for mi in 0..self.members[v].len() {
                let m = self.members[v][mi];
                for ai in 0..self.adj[m].len() {
                    let (w, nbk) = self.adj[m][ai];
                    let w = self.uf.find(w);
                    let cost = (nbk != b) as usize;
                    if d + cost < dist[w * nb + nbk] {
                        dist[w * nb + nbk] = d + cost;
                        if cost == 0 {
                            dq.push_front((w, nbk, d));
                        } else {
                            dq.push_back((w, nbk, d + 1));
                        }
                    }
                }
            }
        }
        out
    }
}
