mod common;

use common::*;
use grsc::cancel::{check_gr_metric, check_gr_p};
use grsc::comerford::{
    comerford_transform, enumerate_index_h_actions, lift_labelling, lifted_length,
    piece_projection_check, schreier_graph, split_gen, CosetAction,
};
use grsc::{Alphabet, Error, Gen, LabelledGraph, LengthFunction};
use num_rational::Ratio;
use proptest::prelude::*;
use rand::seq::SliceRandom;
use rand::Rng;

/// Cosets by repeatedly fixing a random edge with one end known.
fn random_order_cosets(
    r: &mut impl Rng,
    g: &LabelledGraph,
    a: &CosetAction,
    v: usize,
) -> Vec<usize> {
    let mut c = vec![usize::MAX; g.num_vertices()];
    for b in g.basepoints() {
        c[b] = v;
    }
    let mut order: Vec<usize> = (0..g.num_edges()).collect();
    loop {
        order.shuffle(r);
        let mut progress = false;
        for &e in &order {
            let ed = g.edge(e);
            let p = a.perm(ed.label);
            if c[ed.src] != usize::MAX && c[ed.dst] == usize::MAX {
                c[ed.dst] = p[c[ed.src]];
                progress = true;
            } else if c[ed.dst] != usize::MAX && c[ed.src] == usize::MAX {
                c[ed.src] = p.iter().position(|&x| x == c[ed.dst]).unwrap();
                progress = true;
            }
        }
        if !progress {
            return c;
        }
    }
}

fn instance(seed: u64) -> (LabelledGraph, CosetAction) {
    comerford_instance(seed)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn lift_is_independent_of_traversal(seed in any::<u64>()) {
        let (g, act) = instance(seed);
        let kh = schreier_graph(&act, g.alphabet()).unwrap();
        let mut r = rng(seed ^ 1);
        for v in 0..act.degree() {
            let l = lift_labelling(&g, &kh, v).unwrap();
            prop_assert_eq!(&l.cosets, &random_order_cosets(&mut r, &g, &act, v));
            for (e, f) in g.edges().iter().zip(l.graph.edges()) {
                let (gen, w) = split_gen(f.label, act.degree());
                prop_assert_eq!(gen, e.label);
                prop_assert_eq!(w, l.cosets[e.src]);
            }
        }
    }

    #[test]
    fn projection_is_an_isometry(seed in any::<u64>(), walk in 1usize..12) {
        let (g, act) = instance(seed);
        let gh = comerford_transform(&g, &act).unwrap();
        let mut r = rng(seed ^ 2);
        for lf in [LengthFunction::WordLength, LengthFunction::free_product(g.alphabet())] {
            let lh = lifted_length(&lf, &gh);
            for x in 0..gh.graph.num_vertices() {
                let p = random_closed_path(&mut r, &gh.graph, x, walk);
                let lab = gh.graph.path_label(&p).unwrap();
                let img = g.path_label(&gh.project(&p)).unwrap();
                prop_assert_eq!(lh.length(&lab), lf.length(&img));
            }
        }
    }

    #[test]
    fn kh_is_reduced(seed in any::<u64>()) {
        let mut r = rng(seed);
        let h = r.gen_range(1..=4);
        let act = random_action(&mut r, h, 3);
        let kh = schreier_graph(&act, &stu()).unwrap();
        prop_assert!(kh.graph.is_reduced_labelling().is_ok());
        prop_assert_eq!(kh.graph.num_edges(), 3 * h);
    }

    #[test]
    fn components_multiply(seed in any::<u64>()) {
        let (g, act) = instance(seed);
        let gh = comerford_transform(&g, &act).unwrap();
        prop_assert_eq!(gh.graph.components().len(), act.degree() * g.components().len());
        prop_assert_eq!(gh.free_rank, act.degree() - 1);
    }
}

#[test]
fn conditions_survive_the_transform() {
    let mut checked = [0usize; 3];
    for seed in 0..400u64 {
        let (g, act) = instance(seed);
        let gh = comerford_transform(&g, &act).unwrap();
        let fp = LengthFunction::free_product(g.alphabet());
        let fph = lifted_length(&fp, &gh);
        let l = Ratio::new(1, 4);
        if check_gr_p(&g, 4, 100_000).unwrap().satisfied() {
            assert!(
                check_gr_p(&gh.graph, 4, 100_000).unwrap().satisfied(),
                "seed {seed}"
            );
            checked[0] += 1;
        }
        if check_gr_metric(&g, l, &LengthFunction::WordLength)
            .unwrap()
            .satisfied()
        {
            assert!(check_gr_metric(&gh.graph, l, &LengthFunction::WordLength)
                .unwrap()
                .satisfied());
            checked[1] += 1;
        }
        if check_gr_metric(&g, l, &fp).unwrap().satisfied() {
            assert!(check_gr_metric(&gh.graph, l, &fph).unwrap().satisfied());
            checked[2] += 1;
        }
        assert!(piece_projection_check(&g, &gh, &fp, 6).unwrap().ok());
    }
    assert!(checked.iter().all(|&c| c >= 20), "{checked:?}");
}

#[test]
fn enumerated_actions_are_canonical_and_distinct() {
    for h in 1..=3 {
        let acts = enumerate_index_h_actions(h, 3, 2).unwrap();
        for (i, a) in acts.iter().enumerate() {
            assert_eq!(&a.canonical(), a);
            assert!(acts[i + 1..].iter().all(|b| b != a));
        }
    }
}

#[test]
fn figure_one_action_text() {
    let a = Alphabet::with_blocks(&["s", "t"], &[vec![0], vec![1]]).unwrap();
    let act = CosetAction::parse("degree 2\nperm s 2 1\nperm t 1 2\n", &a).unwrap();
    let kh = schreier_graph(&act, &a).unwrap();
    assert_eq!(kh.cycles[0], vec![vec![0, 1]]);
    assert_eq!(kh.cycles[1], vec![vec![0], vec![1]]);
    let loops = kh.graph.edges().iter().filter(|e| e.src == e.dst).count();
    assert_eq!(loops, 2);
    assert!(kh
        .graph
        .edges()
        .iter()
        .all(|e| split_gen(e.label, 2).0 != Gen(1) || e.src == e.dst));
}

#[test]
fn bad_action_is_reported() {
    let a = Alphabet::with_blocks(&["s", "t"], &[vec![0], vec![1]]).unwrap();
    let g = LabelledGraph::parse(
        "alphabet s t\npartition {s} {t}\nvertex 0\nvertex 1\nedge 0 0 1 s\nedge 1 1 0 s\n",
    )
    .unwrap();
    let act = CosetAction::parse("degree 3\nperm s 2 3 1\nperm t 1 2 3\n", &a).unwrap();
    assert!(matches!(
        comerford_transform(&g, &act),
        Err(Error::ActionNotFactoring { .. })
    ));
}
