//! End-to-end run for a given `k`: a Rips–Segev graph for `a = s^{k!}`,
//! `b = t^{k!}`, and for every subgroup of index `h ≤ k` the transformed
//! graph, its component-wise Rips–Segev structure and certificates.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::Path as FsPath;
use std::time::{Duration, Instant};

use num_rational::Ratio;
use rayon::prelude::*;

use crate::cancel::{check_gr_metric_with, ConditionVerdict, MetricOptions};
use crate::comerford::{
    comerford_transform, enumerate_index_h_actions, CosetAction, GammaH, SchreierGraphKH,
};
use crate::dot::export_dot;
use crate::error::{Error, Result};
use crate::graph::{LabelledGraph, VertexId};
use crate::ripssegev::{
    build_rips_segev, build_sets, search_coefficients, CoefficientSystem, RSGraph, SearchConfig,
    SearchStats,
};
use crate::updcert::{
    abelianization_rank, build_certificate, check_injectivity, enumerate_relators,
    verify_certificate, Certificate, InjectivityVerdict,
};
use crate::word::{Alphabet, Gen, LengthFunction, Word};

pub const DEFAULT_K_CAP: usize = 3;

/// `(a_v, b_v)`: the `s`- and `t`-cycles of `K_H` through `v`, read from
/// `v` and repeated up to word length `k!`.
pub fn lifted_period_words(kh: &SchreierGraphKH, v: usize, k: usize) -> Result<(Word, Word)> {
    let kf = factorial(k)?;
    let one = |g: Gen| -> Result<Word> {
        let c = kh.cycle_label(g, v);
        if kf % c.len() != 0 {
            return Err(Error::Internal(format!(
                "cycle of length {} does not divide {k}!",
                c.len()
            )));
        }
        Ok(c.pow(kf / c.len()))
    };
    Ok((one(Gen(0))?, one(Gen(1))?))
}

pub fn factorial(k: usize) -> Result<usize> {
    (1..=k)
        .try_fold(1usize, |acc, i| acc.checked_mul(i))
        .ok_or_else(|| Error::Resource(format!("{k}! overflows")))
}

/// Checks that `other` is `rsg.graph` up to a label-preserving isomorphism
/// carrying every marker `u_{i,j}`, `v_{i,j}` of `rsg` to the same marker of
/// `base`, whose vertex ids `other` shares. Returns the vertex map.
pub fn marker_isomorphism(
    rsg: &RSGraph,
    base: &RSGraph,
    other: &LabelledGraph,
) -> std::result::Result<Vec<VertexId>, String> {
    let g = &rsg.graph;
    if g.num_vertices() != other.num_vertices() || g.num_edges() != other.num_edges() {
        return Err(format!(
            "sizes differ: {}/{} vs {}/{} vertices/edges",
            g.num_vertices(),
            g.num_edges(),
            other.num_vertices(),
            other.num_edges()
        ));
    }
    let mut map = vec![usize::MAX; g.num_vertices()];
    let mut stack = Vec::new();
    let marks = rsg
        .u
        .iter()
        .flatten()
        .zip(base.u.iter().flatten())
        .chain(rsg.v1.iter().flatten().zip(base.v1.iter().flatten()));
    for (&x, &y) in marks {
        match map[x] {
            usize::MAX => {
                map[x] = y;
                stack.push(x);
            }
            z if z != y => return Err(format!("marker vertex {x} sent to both {z} and {y}")),
            _ => {}
        }
    }
    while let Some(x) = stack.pop() {
        for &s in g.incident(x) {
            let l = g.step_letter(s);
            let Some(t) = other.follow(map[x], l) else {
                return Err(format!(
                    "no edge from {} labelled like edge {}",
                    map[x], s.edge
                ));
            };
            let (x2, y2) = (g.step_target(s), other.step_target(t));
            match map[x2] {
                usize::MAX => {
                    map[x2] = y2;
                    stack.push(x2);
                }
                z if z != y2 => return Err(format!("vertex {x2} sent to both {z} and {y2}")),
                _ => {}
            }
        }
    }
    let mut hit = vec![false; map.len()];
    for (x, &y) in map.iter().enumerate() {
        if y == usize::MAX {
            return Err(format!("vertex {x} not reached from a marker"));
        }
        if std::mem::replace(&mut hit[y], true) {
            return Err(format!("vertex {y} hit twice"));
        }
    }
    Ok(map)
}

#[derive(Debug, Clone)]
pub struct PipelineConfig {
    pub k: usize,
    pub search: SearchConfig,
    /// Use this system instead of searching.
    pub coefficients: Option<CoefficientSystem>,
    /// Stop at the first failed stage. When off, later stages still run on
    /// the unverified instance and the run is reported as failed.
    pub halt_on_failure: bool,
    pub k_cap: usize,
    pub cycle_cap: usize,
}

impl PipelineConfig {
    pub fn new(k: usize, seed: u64, budget: u64) -> Self {
        PipelineConfig {
            k,
            search: SearchConfig {
                seed,
                budget,
                ..SearchConfig::default()
            },
            coefficients: None,
            halt_on_failure: true,
            k_cap: DEFAULT_K_CAP,
            cycle_cap: 20_000,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum RunStatus {
    Verified,
    Failed,
    Exhausted,
}

impl RunStatus {
    pub fn exit_code(self) -> i32 {
        match self {
            RunStatus::Verified => 0,
            RunStatus::Failed => 1,
            RunStatus::Exhausted => 2,
        }
    }

    fn name(self) -> &'static str {
        match self {
            RunStatus::Verified => "verified",
            RunStatus::Failed => "failed",
            RunStatus::Exhausted => "exhausted",
        }
    }
}

#[derive(Debug, Clone)]
pub struct ComponentRecord {
    pub coset: usize,
    pub a: Word,
    pub b: Word,
    pub isomorphism: std::result::Result<(), String>,
    pub certificate: Option<Certificate>,
    pub certificate_problems: Vec<String>,
    pub injectivity: Option<InjectivityVerdict>,
    pub relators_exhaustive: bool,
    pub error: Option<String>,
}

impl ComponentRecord {
    pub fn certificate_ok(&self) -> bool {
        self.certificate.as_ref().is_some_and(|c| c.succeeded())
            && self.certificate_problems.is_empty()
    }

    pub fn b_injects(&self) -> bool {
        self.injectivity.as_ref().is_some_and(|i| {
            i.b_collisions.is_empty() && i.b_undecided.is_empty() && i.b_image == 4
        })
    }

    pub fn ok(&self) -> bool {
        self.error.is_none()
            && self.isomorphism.is_ok()
            && self.certificate_ok()
            && self.b_injects()
    }
}

#[derive(Debug, Clone)]
pub struct SubgroupRecord {
    pub index: usize,
    pub action: CosetAction,
    pub key: String,
    pub verdict: std::result::Result<ConditionVerdict, String>,
    pub abelian_rank: Option<usize>,
    pub components: Vec<ComponentRecord>,
    pub gamma_h: Option<GammaH>,
}

impl SubgroupRecord {
    pub fn small_cancellation(&self) -> bool {
        self.verdict.as_ref().is_ok_and(|v| v.satisfied())
    }

    pub fn ok(&self) -> bool {
        self.small_cancellation()
            && !self.components.is_empty()
            && self.components.iter().all(|c| c.ok())
    }
}

#[derive(Debug, Clone)]
pub struct BaseRecord {
    pub rsg: RSGraph,
    pub verdict: std::result::Result<ConditionVerdict, String>,
    pub certificate: std::result::Result<Certificate, String>,
    pub certificate_problems: Vec<String>,
    pub injectivity: Option<InjectivityVerdict>,
    pub relators_exhaustive: bool,
    pub relator_count: usize,
    pub abelian_rank: Option<usize>,
}

impl BaseRecord {
    pub fn ok(&self) -> bool {
        self.verdict.as_ref().is_ok_and(|v| v.satisfied())
            && self.certificate.as_ref().is_ok_and(|c| c.succeeded())
            && self.certificate_problems.is_empty()
    }
}

#[derive(Debug, Clone)]
pub struct RunReport {
    pub k: usize,
    pub seed: u64,
    pub budget: u64,
    pub status: RunStatus,
    pub halted: Option<String>,
    pub search: Option<SearchStats>,
    pub found_index: Option<u64>,
    pub base: Option<BaseRecord>,
    pub subgroups: Vec<SubgroupRecord>,
}

impl RunReport {
    pub fn subgroups_of_index(&self, h: usize) -> impl Iterator<Item = &SubgroupRecord> {
        self.subgroups.iter().filter(move |s| s.index == h)
    }

    /// Deterministic text body; timings live in a separate file.
    pub fn to_text(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(
            s,
            "k {}\nseed {}\nbudget {}",
            self.k, self.seed, self.budget
        );
        let _ = writeln!(s, "status {}", self.status.name());
        if let Some(h) = &self.halted {
            let _ = writeln!(s, "halted {h}");
        }
        if let Some(st) = &self.search {
            s.push_str("search\n");
            for l in st.to_text().lines() {
                let _ = writeln!(s, "  {l}");
            }
        }
        if let Some(i) = self.found_index {
            let _ = writeln!(s, "candidate {i}");
        }
        if let Some(b) = &self.base {
            let g = &b.rsg.graph;
            let _ = writeln!(
                s,
                "base vertices {} edges {} lines {}",
                g.num_vertices(),
                g.num_edges(),
                b.rsg.cs.n()
            );
            let _ = writeln!(s, "base condition {}", verdict_line(&b.verdict));
            match &b.certificate {
                Ok(c) => {
                    let _ = writeln!(
                        s,
                        "base certificate buckets {} witnesses {} singletons {} problems {}",
                        c.buckets.len(),
                        c.num_witnesses(),
                        c.singletons().len(),
                        b.certificate_problems.len()
                    );
                }
                Err(e) => {
                    let _ = writeln!(s, "base certificate error {e}");
                }
            }
            if let Some(inj) = &b.injectivity {
                let _ = writeln!(s, "base injectivity {}", injectivity_line(inj));
            }
            let _ = writeln!(
                s,
                "base relators {} exhaustive {}",
                b.relator_count, b.relators_exhaustive
            );
            if let Some(r) = b.abelian_rank {
                let _ = writeln!(s, "base abelianization_rank {r}");
            }
        }
        for h in 1..=self.k {
            let n = self.subgroups_of_index(h).count();
            let _ = writeln!(s, "index {h} subgroups {n}");
        }
        for sg in &self.subgroups {
            let _ = writeln!(
                s,
                "subgroup index {} action {} status {}",
                sg.index,
                sg.key,
                if sg.ok() { "verified" } else { "failed" }
            );
            let _ = writeln!(s, "  condition {}", verdict_line(&sg.verdict));
            if let Some(gh) = &sg.gamma_h {
                let _ = writeln!(
                    s,
                    "  free_rank {} components {}",
                    gh.free_rank,
                    gh.graph.components().len()
                );
            }
            if let Some(r) = sg.abelian_rank {
                let _ = writeln!(s, "  abelianization_rank {r}");
            }
            for c in &sg.components {
                let _ = writeln!(s, "  coset {}", c.coset + 1);
                if let Some(e) = &c.error {
                    let _ = writeln!(s, "    error {e}");
                    continue;
                }
                let _ = writeln!(
                    s,
                    "    isomorphic {}",
                    match &c.isomorphism {
                        Ok(()) => "yes".to_string(),
                        Err(e) => format!("no {e}"),
                    }
                );
                if let Some(cert) = &c.certificate {
                    let min = cert.buckets.values().map(Vec::len).min().unwrap_or(0);
                    let _ = writeln!(
                        s,
                        "    certificate buckets {} min_witnesses {} problems {}",
                        cert.buckets.len(),
                        min,
                        c.certificate_problems.len()
                    );
                }
                if let Some(inj) = &c.injectivity {
                    let _ = writeln!(
                        s,
                        "    injectivity {} exhaustive {}",
                        injectivity_line(inj),
                        c.relators_exhaustive
                    );
                }
                if c.ok() && sg.small_cancellation() {
                    s.push_str(
                        "    non_unique_product yes (certificate; free products preserve it)\n",
                    );
                }
            }
        }
        s
    }
}

fn verdict_line(v: &std::result::Result<ConditionVerdict, String>) -> String {
    match v {
        Ok(v) => format!(
            "{} {} violations {}",
            v.condition,
            if v.satisfied() {
                "satisfied"
            } else {
                "violated"
            },
            v.violations.len()
        ),
        Err(e) => format!("error {e}"),
    }
}

fn injectivity_line(i: &InjectivityVerdict) -> String {
    format!(
        "a_image {} b_image {} a_collisions {} b_collisions {} undecided {}",
        i.a_image,
        i.b_image,
        i.a_collisions.len(),
        i.b_collisions.len(),
        i.a_undecided.len() + i.b_undecided.len()
    )
}

/// A finished run: the report, every artifact keyed by relative path, and
/// stage timings.
#[derive(Debug, Clone)]
pub struct PipelineRun {
    pub report: RunReport,
    pub artifacts: BTreeMap<String, String>,
    pub timings: Vec<(String, Duration)>,
}

impl PipelineRun {
    pub fn timings_text(&self) -> String {
        let mut s = String::new();
        for (k, d) in &self.timings {
            let _ = writeln!(s, "{k} {:.3}", d.as_secs_f64());
        }
        s
    }

    /// Writes the artifacts, `report.txt` and `timings.txt` under `dir`.
    pub fn write(&self, dir: &FsPath) -> Result<()> {
        for (name, body) in &self.artifacts {
            let p = dir.join(name);
            if let Some(parent) = p.parent() {
                std::fs::create_dir_all(parent)?;
            }
            std::fs::write(p, body)?;
        }
        std::fs::create_dir_all(dir)?;
        std::fs::write(dir.join("timings.txt"), self.timings_text())?;
        Ok(())
    }
}

fn metric_verdict(g: &LabelledGraph) -> std::result::Result<ConditionVerdict, String> {
    let opts = MetricOptions {
        stop_at_first: true,
        piece_cap: None,
    };
    check_gr_metric_with(
        g,
        Ratio::new(1, 6),
        &LengthFunction::free_product(g.alphabet()),
        &opts,
    )
    .map_err(|e| e.to_string())
}

fn st_alphabet() -> Alphabet {
    Alphabet::with_blocks(&["s", "t"], &[vec![0], vec![1]]).expect("valid alphabet")
}

/// Runs every stage for `cfg.k`.
pub fn run_theorem_pipeline(cfg: &PipelineConfig) -> Result<PipelineRun> {
    if cfg.k == 0 {
        return Err(Error::InvalidCoefficients("k must be positive".into()));
    }
    if cfg.k > cfg.k_cap {
        return Err(Error::Resource(format!(
            "k = {} exceeds the cap {}; raise it explicitly",
            cfg.k, cfg.k_cap
        )));
    }
    let mut timings = Vec::new();
    let mut artifacts = BTreeMap::new();
    let kf = factorial(cfg.k)?;
    let mut report = RunReport {
        k: cfg.k,
        seed: cfg.search.seed,
        budget: cfg.search.budget,
        status: RunStatus::Verified,
        halted: None,
        search: None,
        found_index: None,
        base: None,
        subgroups: Vec::new(),
    };
    let finish = |report: RunReport,
                  mut artifacts: BTreeMap<String, String>,
                  timings: Vec<(String, Duration)>| {
        artifacts.insert("report.txt".into(), report.to_text());
        PipelineRun {
            report,
            artifacts,
            timings,
        }
    };

    // stage 1: the base graph
    let clock = Instant::now();
    let cs = match &cfg.coefficients {
        Some(cs) => cs.clone(),
        None => {
            let alph = st_alphabet();
            let a = Word::power_of(Gen(0), kf as i64);
            let b = Word::power_of(Gen(1), kf as i64);
            let out = search_coefficients(&alph, &a, &b, &cfg.search)?;
            artifacts.insert("search.txt".into(), out.stats.to_text());
            report.search = Some(out.stats);
            timings.push(("search".into(), clock.elapsed()));
            match out.found {
                Some(f) => {
                    report.found_index = Some(f.index);
                    f.cs
                }
                None => {
                    report.status = RunStatus::Exhausted;
                    report.halted = Some("search budget exhausted".into());
                    return Ok(finish(report, artifacts, timings));
                }
            }
        }
    };
    artifacts.insert("base/coefficients.cs".into(), cs.to_text());
    let rsg = build_rips_segev(&cs)?;
    let base = base_record(&rsg, cfg.cycle_cap);
    artifacts.insert("base/graph.grsc".into(), rsg.graph.to_text());
    artifacts.insert("base/markers.txt".into(), rsg.markers_text());
    artifacts.insert("base/graph.dot".into(), export_dot(&rsg.graph, "gamma"));
    if let Ok(v) = &base.verdict {
        artifacts.insert("base/verdict.txt".into(), v.report(&rsg.graph));
    }
    if let Ok(c) = &base.certificate {
        artifacts.insert(
            "base/certificate.txt".into(),
            c.to_text(rsg.graph.alphabet()),
        );
    }
    timings.push(("base".into(), clock.elapsed()));
    let base_ok = base.ok();
    report.base = Some(base);
    if !base_ok {
        report.status = RunStatus::Failed;
        if cfg.halt_on_failure {
            report.halted = Some("base graph failed verification".into());
            return Ok(finish(report, artifacts, timings));
        }
    }

    // stage 2: subgroups of index ≤ k
    let clock = Instant::now();
    let mut work = Vec::new();
    for h in 1..=cfg.k {
        for a in enumerate_index_h_actions(h, cfg.k, 2)? {
            work.push((h, a));
        }
    }
    let alph = rsg.graph.alphabet().clone();
    let records: Vec<SubgroupRecord> = work
        .into_par_iter()
        .map(|(h, action)| subgroup_record(&rsg, h, action, cfg))
        .collect();
    for (n, sg) in records.iter().enumerate() {
        let dir = format!("subgroups/{:02}_index{}", n, sg.index);
        artifacts.insert(format!("{dir}/action.act"), sg.action.to_text(&alph));
        if let Some(gh) = &sg.gamma_h {
            artifacts.insert(format!("{dir}/gamma_h.grsc"), gh.graph.to_text());
            artifacts.insert(format!("{dir}/gamma_h.meta"), gh.metadata_text());
            artifacts.insert(format!("{dir}/kh.dot"), export_dot(&gh.kh.graph, "K_H"));
            if let Ok(v) = &sg.verdict {
                artifacts.insert(format!("{dir}/verdict.txt"), v.report(&gh.graph));
            }
        }
        for c in &sg.components {
            if let (Some(cert), Some(gh)) = (&c.certificate, &sg.gamma_h) {
                artifacts.insert(
                    format!("{dir}/coset{}_certificate.txt", c.coset + 1),
                    cert.to_text(gh.graph.alphabet()),
                );
            }
        }
    }
    timings.push(("subgroups".into(), clock.elapsed()));
    if records.iter().any(|r| !r.ok()) {
        report.status = RunStatus::Failed;
    }
    report.subgroups = records;
    Ok(finish(report, artifacts, timings))
}

fn base_record(rsg: &RSGraph, cycle_cap: usize) -> BaseRecord {
    let verdict = metric_verdict(&rsg.graph);
    let sets = build_sets(rsg);
    let certificate = sets
        .as_ref()
        .map_err(|e| e.to_string())
        .and_then(|s| build_certificate(rsg, s).map_err(|e| e.to_string()));
    let certificate_problems = match &certificate {
        Ok(c) => verify_certificate(&rsg.graph, c).problems,
        Err(_) => Vec::new(),
    };
    let sc = verdict.as_ref().is_ok_and(|v| v.satisfied());
    let relators = enumerate_relators(&rsg.graph, cycle_cap).with_small_cancellation(sc);
    let injectivity = sets.as_ref().ok().map(|s| check_injectivity(s, &relators));
    let abelian_rank = relators
        .exhaustive
        .then(|| abelianization_rank(&relators).ok())
        .flatten();
    BaseRecord {
        rsg: rsg.clone(),
        verdict,
        certificate,
        certificate_problems,
        injectivity,
        relators_exhaustive: relators.exhaustive,
        relator_count: relators.len(),
        abelian_rank,
    }
}

/// The coefficient system of `Γ_v`: same shape as `cs`, over the product
/// alphabet with `(a_v, b_v)`.
pub fn lifted_system(
    cs: &CoefficientSystem,
    gh: &GammaH,
    v: usize,
    k: usize,
) -> Result<CoefficientSystem> {
    let (a, b) = lifted_period_words(&gh.kh, v, k)?;
    Ok(CoefficientSystem {
        alphabet: gh.graph.alphabet().clone(),
        a,
        b,
        c: cs.c.clone(),
        nij: cs.nij.clone(),
        pij: cs.pij.clone(),
    })
}

fn subgroup_record(
    rsg: &RSGraph,
    h: usize,
    action: CosetAction,
    cfg: &PipelineConfig,
) -> SubgroupRecord {
    let key = action.key(rsg.graph.alphabet());
    let gh = match comerford_transform(&rsg.graph, &action) {
        Ok(gh) => gh,
        Err(e) => {
            return SubgroupRecord {
                index: h,
                action,
                key,
                verdict: Err(e.to_string()),
                abelian_rank: None,
                components: Vec::new(),
                gamma_h: None,
            }
        }
    };
    let verdict = metric_verdict(&gh.graph);
    let sc = verdict.as_ref().is_ok_and(|v| v.satisfied());
    let components: Vec<ComponentRecord> = (0..h)
        .into_par_iter()
        .map(|v| component_record(rsg, &gh, v, cfg, sc))
        .collect();
    let relators = enumerate_relators(&gh.graph, cfg.cycle_cap);
    let abelian_rank = relators
        .exhaustive
        .then(|| abelianization_rank(&relators).ok())
        .flatten();
    SubgroupRecord {
        index: h,
        action,
        key,
        verdict,
        abelian_rank,
        components,
        gamma_h: Some(gh),
    }
}

fn component_record(
    rsg: &RSGraph,
    gh: &GammaH,
    v: usize,
    cfg: &PipelineConfig,
    sc: bool,
) -> ComponentRecord {
    let mut rec = ComponentRecord {
        coset: v,
        a: Word::empty(),
        b: Word::empty(),
        isomorphism: Err("not checked".into()),
        certificate: None,
        certificate_problems: Vec::new(),
        injectivity: None,
        relators_exhaustive: false,
        error: None,
    };
    let fresh = match lifted_system(&rsg.cs, gh, v, cfg.k).and_then(|cs| build_rips_segev(&cs)) {
        Ok(f) => f,
        Err(e) => {
            rec.error = Some(e.to_string());
            return rec;
        }
    };
    rec.a = fresh.cs.a.clone();
    rec.b = fresh.cs.b.clone();
    rec.isomorphism = marker_isomorphism(&fresh, rsg, &gh.lifts[v].graph).map(|_| ());
    let sets = match build_sets(&fresh) {
        Ok(s) => s,
        Err(e) => {
            rec.error = Some(e.to_string());
            return rec;
        }
    };
    match build_certificate(&fresh, &sets) {
        Ok(c) => {
            rec.certificate_problems = verify_certificate(&fresh.graph, &c).problems;
            rec.certificate = Some(c);
        }
        Err(e) => {
            rec.error = Some(e.to_string());
            return rec;
        }
    }
    let relators = enumerate_relators(&fresh.graph, cfg.cycle_cap).with_small_cancellation(sc);
    rec.relators_exhaustive = relators.exhaustive;
    rec.injectivity = Some(check_injectivity(&sets, &relators));
    rec
}
