mod common;

use std::collections::{BTreeMap, BTreeSet};

use common::*;
use proptest::prelude::*;
use rand::seq::SliceRandom;
use rand::Rng;
use templar_core::algebra::{ObjectId, Payload, DEFAULT_GROUNDING_CAP};
use templar_core::collage::{
    chair_grammar, mask_sym_diff, rasterize, sym_diff_area, AffineTransform, CollageOp, Grid, Picture, Polygon,
    Viewport,
};
use templar_core::dfa::{
    admissible_instance, check_sufficient, equiv_closure, generate_sufficient, infer, prefix_closure, right_completion,
    right_completion_shuffled, RegularExample,
};
use templar_core::grammar::{rtg_generate, GenerationMode};
use templar_core::io::{
    parse_corpus, parse_dfa, parse_models, parse_params, parse_picture, write_corpus_text, write_dfa, write_models,
    write_params, write_picture, Corpus,
};
use templar_core::scene::{
    formula_value, fuzzy_apply, ground_best, Compiled, Connective, PredicateModel, PredicateSet, Scene,
    SceneExample,
};
use templar_core::Term;

fn unit() -> impl Strategy<Value = f64> {
    0.0..=1.0f64
}

fn random_formula(r: &mut impl Rng, vars: &[&str], depth: usize) -> Term {
    if depth == 0 || r.random_bool(0.3) {
        let p = format!("p{}", r.random_range(1..=3));
        return Term::apply(&p, vec![Term::var(vars[r.random_range(0..vars.len())])]);
    }
    match r.random_range(0..4) {
        0 => Term::apply("not", vec![random_formula(r, vars, depth - 1)]),
        k => Term::apply(
            ["and", "or", "implies"][k - 1],
            vec![random_formula(r, vars, depth - 1), random_formula(r, vars, depth - 1)],
        ),
    }
}

fn random_example(seed: u64, max_objects: usize) -> (PredicateSet, SceneExample) {
    let mut r = rng(seed);
    let n = r.random_range(1..=max_objects);
    let vectors: Vec<Vec<f64>> = (0..n).map(|_| (0..3).map(|_| r.random_range(-1.0..1.0)).collect()).collect();
    let mut ids: Vec<usize> = (0..n).map(|i| 2 * i + 5).collect();
    ids.shuffle(&mut r);
    let scene = Scene::new(ids.into_iter().map(ObjectId).zip(vectors).collect(), None).unwrap();
    let vars = ["x1", "x2", "x3"];
    let k = r.random_range(1..=n.min(3));
    let mut formula = random_formula(&mut r, &vars[..k], 3);
    for v in &vars[..k] {
        if !formula.variables().contains(v) {
            formula = Term::apply("or", vec![formula, Term::apply("p2", vec![Term::var(v)])]);
        }
    }
    (PredicateSet::random(3, 3, 2.0, seed), SceneExample::new(formula, scene))
}

fn polygon() -> impl Strategy<Value = Polygon> {
    (0.0..0.6f64, 0.0..0.6f64, 0.1..0.4f64, 0.1..0.4f64, any::<bool>()).prop_map(|(x, y, w, h, tri)| {
        if tri {
            Polygon::from_coords(&[(x, y), (x + w, y), (x, y + h)]).unwrap()
        } else {
            Polygon::from_coords(&[(x, y), (x + w, y), (x + w, y + h), (x, y + h)]).unwrap()
        }
    })
}

fn picture() -> impl Strategy<Value = Picture> {
    prop::collection::vec(polygon(), 0..4).prop_map(Picture::new)
}

fn transform() -> impl Strategy<Value = AffineTransform> {
    prop::array::uniform6(-1.0..1.0f64).prop_map(|p| AffineTransform::from_params(&p))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn de_morgan_and_implication_exact(a in unit(), b in unit()) {
        let f = |c, args: &[f64]| fuzzy_apply(c, args).unwrap();
        let not = |x| f(Connective::Not, &[x]);
        prop_assert_eq!(not(f(Connective::And, &[a, b])), f(Connective::Or, &[not(a), not(b)]));
        prop_assert_eq!(not(f(Connective::Or, &[a, b])), f(Connective::And, &[not(a), not(b)]));
        prop_assert_eq!(f(Connective::Implies, &[a, b]), f(Connective::Or, &[not(a), b]));
    }

    #[test]
    fn involution_on_dyadic_values(k in 0u64..=1 << 20) {
        let a = k as f64 / (1u64 << 20) as f64;
        let not = |x| fuzzy_apply(Connective::Not, &[x]).unwrap();
        prop_assert_eq!(not(not(a)), a);
    }

    #[test]
    fn connectives_stay_in_range(a in unit(), b in unit()) {
        for c in [Connective::And, Connective::Or, Connective::Implies] {
            let v = fuzzy_apply(c, &[a, b]).unwrap();
            prop_assert!((0.0..=1.0).contains(&v));
        }
    }

    #[test]
    fn formula_values_stay_in_range(seed in 0u64..10_000) {
        let (models, ex) = random_example(seed, 5);
        let (best, g) = ground_best(&models, &ex, DEFAULT_GROUNDING_CAP).unwrap();
        prop_assert!((0.0..=1.0).contains(&best));
        let v = formula_value(&models, &ex, &g).unwrap();
        prop_assert_eq!(v, best);
    }

    #[test]
    fn best_grounding_matches_exhaustive_search(seed in 0u64..10_000) {
        let (models, ex) = random_example(seed, 6);
        let (v, g) = ground_best(&models, &ex, DEFAULT_GROUNDING_CAP).unwrap();
        let (w, h) = brute_ground(&models, &ex).unwrap();
        prop_assert_eq!(v, w);
        let g: Vec<(String, ObjectId)> = g.iter().map(|(n, o)| (n.to_string(), o)).collect();
        prop_assert_eq!(g, h);
    }

    #[test]
    fn extra_objects_never_lower_the_best_value(seed in 0u64..10_000, extra in prop::collection::vec(-1.0..1.0f64, 3)) {
        let (models, ex) = random_example(seed, 4);
        let (before, _) = ground_best(&models, &ex, DEFAULT_GROUNDING_CAP).unwrap();
        let mut objects = ex.scene.objects().to_vec();
        objects.push((ObjectId(1000), extra));
        let bigger = SceneExample::new(ex.formula.clone(), Scene::new(objects, None).unwrap());
        let (after, _) = ground_best(&models, &bigger, DEFAULT_GROUNDING_CAP).unwrap();
        prop_assert!(after >= before);
    }

    #[test]
    fn params_round_trip(p in prop::collection::vec(-1e6..1e6f64, 0..30)) {
        prop_assert_eq!(parse_params(&write_params(&p)).unwrap(), p);
    }

    #[test]
    fn picture_round_trip(pic in picture()) {
        prop_assert_eq!(parse_picture(&write_picture(&pic)).unwrap(), pic);
    }

    #[test]
    fn models_round_trip(w in prop::collection::vec(prop::collection::vec(-10.0..10.0f64, 5), 1..5)) {
        let models = PredicateSet::numbered(w.iter().map(|p| PredicateModel::from_params(p)).collect()).unwrap();
        prop_assert_eq!(parse_models(&write_models(&models)).unwrap(), models);
    }

    #[test]
    fn composition_rasterizes_identically(
        pic in picture(),
        t in transform(),
        s in transform(),
    ) {
        let view = Viewport::new(-3.0, -3.0, 3.0, 3.0);
        let grid = Grid::square(48);
        let a = rasterize(&pic.transformed(&s).transformed(&t), view, grid);
        let b = rasterize(&pic.transformed(&t.compose(&s)), view, grid);
        prop_assert_eq!(a, b);
    }

    #[test]
    fn sym_diff_is_a_metric_on_masks(a in picture(), b in picture(), c in picture()) {
        let (view, grid) = (Viewport::UNIT, Grid::square(40));
        let (ma, mb, mc) = (rasterize(&a, view, grid), rasterize(&b, view, grid), rasterize(&c, view, grid));
        let d = |x, y| mask_sym_diff(x, y).unwrap();
        prop_assert_eq!(d(&ma, &ma), 0.0);
        prop_assert_eq!(d(&ma, &mb), d(&mb, &ma));
        prop_assert!(d(&ma, &mc) <= d(&ma, &mb) + d(&mb, &mc) + 1e-12);
        prop_assert_eq!(sym_diff_area(&a, &b, view, grid), d(&ma, &mb));
    }

    #[test]
    fn collage_apply_sums_polygon_counts(pics in prop::collection::vec(picture(), 4)) {
        let refs: Vec<&Picture> = pics.iter().collect();
        let out = CollageOp::grid().apply(&refs).unwrap();
        prop_assert_eq!(out.polygons.len(), pics.iter().map(|p| p.polygons.len()).sum::<usize>());
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn dfa_text_round_trip(seed in any::<u64>()) {
        let m = random_dfa(&mut rng(seed));
        prop_assert_eq!(parse_dfa(&write_dfa(&m)).unwrap(), m);
    }

    #[test]
    fn regular_corpus_round_trip(seed in any::<u64>()) {
        let target = random_dfa(&mut rng(seed)).canonical();
        let corpus = Corpus::Regular(generate_sufficient(&target, seed));
        let text = write_corpus_text(&corpus);
        let back = parse_corpus(&text, None).unwrap();
        prop_assert_eq!(write_corpus_text(&back), text);
        prop_assert_eq!(back, corpus);
    }

    #[test]
    fn inference_recovers_the_canonical_automaton(seed in any::<u64>()) {
        let target = random_dfa(&mut rng(seed)).canonical();
        let s = generate_sufficient(&target, seed ^ 0x5eed);
        prop_assert!(check_sufficient(&s, &target).passed());
        let m = infer(&s).unwrap();
        prop_assert!(isomorphic(&m, &target));
    }

    #[test]
    fn right_completion_is_order_independent(seed in any::<u64>(), order in any::<u64>()) {
        let target = random_dfa(&mut rng(seed)).canonical();
        let s = generate_sufficient(&target, seed);
        let base = equiv_closure(&s);
        let classes = |p: templar_core::dfa::StringPartition| {
            p.classes().into_iter().map(|c| c.into_iter().collect::<BTreeSet<_>>()).collect::<BTreeSet<_>>()
        };
        prop_assert_eq!(
            classes(right_completion(&base, s.alphabet())),
            classes(right_completion_shuffled(&base, s.alphabet(), order))
        );
    }

    #[test]
    fn admissible_equiv_agrees_with_nerode(seed in any::<u64>()) {
        let m = random_dfa(&mut rng(seed));
        let alg = admissible_instance(&m);
        let strings = enumerate_strings(m.alphabet(), 3);
        for u in &strings {
            for v in &strings {
                if u == v {
                    continue;
                }
                let ex = RegularExample::equiv(u, v).unwrap().to_example();
                let got = alg.example_value(&ex).unwrap().payload == Payload::Bool(true);
                prop_assert_eq!(got, nerode_equivalent(&m, u, v), "{:?} {:?}", u, v);
            }
        }
    }

    #[test]
    fn frozen_gradient_matches_central_differences(seed in 0u64..1000) {
        let mut r = rng(seed);
        let examples: Vec<SceneExample> = (0..6).map(|i| random_example(seed * 8 + i, 4).1).collect();
        let models = PredicateSet::random(3, 3, 1.0, seed + 1);
        let compiled = Compiled::new(&models, &examples).unwrap();
        let g = compiled.groundings(&models, DEFAULT_GROUNDING_CAP).unwrap();
        let analytic = compiled.frozen_gradient(&models, &g);
        let p = models.flat_params();
        let h = 1e-6;
        let i = r.random_range(0..p.len());
        let at = |d: f64| {
            let mut q = p.clone();
            q[i] += d;
            compiled.frozen_loss(&models.with_flat_params(&q).unwrap(), &g)
        };
        let numeric = (at(h) - at(-h)) / (2.0 * h);
        let scale = analytic[i].abs().max(numeric.abs()).max(1e-3);
        prop_assert!((analytic[i] - numeric).abs() / scale <= 1e-5, "{} vs {}", analytic[i], numeric);
    }
}

#[test]
fn prefix_closure_contains_every_prefix() {
    let closed = prefix_closure(&["abc", "b"]);
    let expected: BTreeSet<String> = ["", "a", "ab", "abc", "b"].into_iter().map(String::from).collect();
    assert_eq!(closed, expected);
}

#[test]
fn exhaustive_generation_is_monotone_and_matches_brute_force() {
    let (g, _) = chair_grammar();
    let mut previous: BTreeSet<String> = BTreeSet::new();
    let mut counts = BTreeMap::new();
    for depth in 1..=4 {
        let terms: BTreeSet<String> = rtg_generate(&g, GenerationMode::Exhaustive { depth })
            .map(|ts| ts.iter().map(Term::to_string).collect())
            .unwrap_or_default();
        assert!(previous.is_subset(&terms));
        assert_eq!(terms, brute_derivations(&g, depth));
        counts.insert(depth, terms.len());
        previous = terms;
    }
    assert_eq!(counts, BTreeMap::from([(1, 0), (2, 0), (3, 1), (4, 16)]));
}
