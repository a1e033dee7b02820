use std::hint::black_box;

use criterion::{criterion_group, criterion_main, Criterion};
use templar_core::algebra::DEFAULT_GROUNDING_CAP;
use templar_core::collage::{
    chair_grammar, corpus_loss, eval_picture_term, fit_transforms, make_collage_example, perturb, reference_algebra,
    sym_diff_area, CollageOp, CollageTemplate, DistanceConfig, FitConfig, Grid, Picture, DEFAULT_VIEWPORT,
};
use templar_core::dfa::{generate_sufficient, infer, Dfa};
use templar_core::grammar::{rtg_generate, GenerationMode};
use templar_core::scene::{generate_scene_corpus, ground_best, PredicateSet, SceneGenConfig};
use templar_core::Term;

fn modulo(n: usize) -> Dfa {
    let mut m = Dfa::new(&['a', 'b'], n, 0).unwrap();
    for q in 0..n {
        m.set_transition(q, 'a', (q + 1) % n).unwrap();
        m.set_transition(q, 'b', (q * 2) % n).unwrap();
    }
    m.set_final(0, true).unwrap();
    m
}

fn dfa(c: &mut Criterion) {
    for n in [4, 8, 16] {
        let s = generate_sufficient(&modulo(n).canonical(), 1);
        c.bench_function(&format!("infer/mod{n}"), |b| b.iter(|| infer(black_box(&s)).unwrap()));
    }
}

fn scene(c: &mut Criterion) {
    let cfg = SceneGenConfig { num_scenes: 50, min_objects: 3, max_objects: 5, ..SceneGenConfig::default() };
    let corpus = generate_scene_corpus(&cfg).unwrap();
    let models = PredicateSet::random(cfg.denotations.len(), cfg.dimension, 1.0, 2);
    c.bench_function("ground_best/50", |b| {
        b.iter(|| {
            for ex in &corpus {
                black_box(ground_best(&models, ex, DEFAULT_GROUNDING_CAP).unwrap());
            }
        })
    });
}

fn collage(c: &mut Criterion) {
    let alg = reference_algebra(DistanceConfig::default());
    let chair = rtg_generate(&chair_grammar().0, GenerationMode::Exhaustive { depth: 4 }).unwrap();
    let pic = eval_picture_term(&alg, &chair[0]).unwrap();
    let square = Picture::unit_square();
    for n in [64, 128, 256] {
        c.bench_function(&format!("sym_diff/{n}"), |b| {
            b.iter(|| sym_diff_area(black_box(&pic), black_box(&square), DEFAULT_VIEWPORT, Grid::square(n)))
        });
    }
    c.bench_function("rtg_generate/chair4", |b| {
        b.iter(|| rtg_generate(black_box(&chair_grammar().0), GenerationMode::Exhaustive { depth: 4 }).unwrap())
    });

    let f = |names: [&str; 4]| Term::apply("F", names.iter().map(|n| Term::constant(n)).collect());
    let corpus: Vec<_> = [f(["tri", "sq", "tri", "sq"]), f(["sq", "sq", "tri", "tri"])]
        .iter()
        .map(|t| make_collage_example(&alg, t).unwrap())
        .collect();
    let template = CollageTemplate::new("F", DistanceConfig::default().with_resolution(64)).unwrap();
    let init = perturb(&CollageOp::grid().params(), 0.05, 3);
    c.bench_function("corpus_loss/64", |b| b.iter(|| corpus_loss(&template, black_box(&init), &corpus).unwrap()));
    let one_step = FitConfig { max_iters: 1, ..FitConfig::default() };
    c.bench_function("fit_step/64", |b| {
        b.iter(|| fit_transforms(&template, &corpus, black_box(&init), &one_step).unwrap())
    });
}

criterion_group!(benches, dfa, scene, collage);
criterion_main!(benches);
