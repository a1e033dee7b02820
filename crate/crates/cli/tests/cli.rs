use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use templar_core::collage::{eval_picture_term, reference_algebra, DistanceConfig};
use templar_core::io::{
    parse_dfa, parse_models, parse_params, read_corpus, write_corpus, CollageCorpus, CollageRecord, Corpus,
};
use templar_core::Term;

fn data(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../core/tests/data").join(name)
}

fn templar(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_templar")).args(args).output().expect("binary runs")
}

fn path(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

#[test]
fn infer_dfa_text_and_dot() {
    let corpus = data("s_star.corpus");
    let o = templar(&["infer-dfa", path(&corpus)]);
    assert_eq!(o.status.code(), Some(0));
    let m = parse_dfa(&stdout(&o)).unwrap();
    assert_eq!(m.num_states(), 2);
    assert!(m.accepts("abab").unwrap() && !m.accepts("aba").unwrap());

    let dot = templar(&["infer-dfa", path(&corpus), "--format", "dot"]);
    assert_eq!(stdout(&dot), fs::read_to_string(data("s_star.dot")).unwrap());

    let dir = tempfile::tempdir().unwrap();
    let file = dir.path().join("m.dot");
    let o = templar(&["infer-dfa", path(&corpus), "--dot", path(&file)]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(fs::read_to_string(&file).unwrap(), fs::read_to_string(data("s_star.dot")).unwrap());
}

#[test]
fn check_sufficient_gates_with_exit_3() {
    let o = templar(&["check-sufficient", path(&data("figure2.corpus")), "--reference", path(&data("abstar.dfa"))]);
    assert_eq!(o.status.code(), Some(3));
    assert_eq!(stdout(&o), fs::read_to_string(data("figure2.report")).unwrap());

    let o = templar(&["check-sufficient", path(&data("s_star.corpus")), "--reference", path(&data("abstar.dfa"))]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).ends_with("sufficient: yes\n"));
}

#[test]
fn exit_codes() {
    assert_eq!(templar(&["infer-dfa", path(&data("conflicting.corpus"))]).status.code(), Some(3));
    assert_eq!(templar(&["no-such-command"]).status.code(), Some(1));
    assert_eq!(templar(&["infer-dfa"]).status.code(), Some(1));
    assert_eq!(templar(&["--help"]).status.code(), Some(0));
    assert_eq!(templar(&["infer-dfa", "/nonexistent/x.corpus"]).status.code(), Some(5));

    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.corpus");
    fs::write(&bad, "#kind regular\n#alphabet a\n#vars x\naccept[x ; \"a\"\n").unwrap();
    let o = templar(&["infer-dfa", path(&bad)]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("line 4"));
}

#[test]
fn generated_corpus_is_reproducible_and_sufficient() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("gen.corpus");
    let a = templar(&["gen-dfa-corpus", "--target", path(&data("abstar.dfa")), "--seed", "5", "--out", path(&out)]);
    assert_eq!(a.status.code(), Some(0));
    let b = templar(&["gen-dfa-corpus", "--target", path(&data("abstar.dfa")), "--seed", "5"]);
    assert_eq!(fs::read(&out).unwrap(), b.stdout);
    let o = templar(&["check-sufficient", path(&out), "--reference", path(&data("abstar.dfa"))]);
    assert_eq!(o.status.code(), Some(0));
}

#[test]
fn eval_regular_corpus() {
    let o = templar(&["eval", path(&data("s_star.corpus")), "--instance", path(&data("abstar.dfa"))]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    assert!(text.lines().take(5).all(|l| l.ends_with(" true")));
    assert_eq!(text.lines().last(), Some("total true"));

    let o = templar(&["eval", path(&data("figure2.corpus")), "--instance", path(&data("abstar.dfa"))]);
    assert_eq!(stdout(&o).lines().last(), Some("total false"));
}

#[test]
fn scene_pipeline() {
    let dir = tempfile::tempdir().unwrap();
    let corpus = dir.path().join("scenes.corpus");
    let models = dir.path().join("models.txt");
    let gen = ["scene-gen", "--scenes", "40", "--dim", "16", "--seed", "3"];
    let o = templar(&[&gen[..], &["--out", path(&corpus)]].concat());
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(fs::read(&corpus).unwrap(), templar(&gen).stdout);
    let Corpus::Scene(s) = read_corpus(&corpus).unwrap() else { panic!("not a scene corpus") };
    assert_eq!(s.examples.len(), 40);

    let train = ["scene-train", path(&corpus), "--epochs", "60", "--restarts", "2", "--seed", "1"];
    let o = templar(&[&train[..], &["--out", path(&models)]].concat());
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    assert!(String::from_utf8_lossy(&o.stderr).contains("matched accuracy"));
    assert_eq!(fs::read(&models).unwrap(), templar(&train).stdout);
    let m = parse_models(&fs::read_to_string(&models).unwrap()).unwrap();
    assert_eq!(m.names(), s.predicates.as_slice());

    let o = templar(&["scene-ground", path(&corpus), "--models", path(&models)]);
    assert_eq!(o.status.code(), Some(0));
    let lines: Vec<String> = stdout(&o).lines().map(String::from).collect();
    assert_eq!(lines.len(), 40);
    for (i, l) in lines.iter().enumerate() {
        let mut words = l.splitn(3, ' ');
        assert_eq!(words.next(), Some((i + 1).to_string().as_str()));
        let v: f64 = words.next().unwrap().parse().unwrap();
        assert!((0.0..=1.0).contains(&v));
        assert!(words.next().unwrap().starts_with('{'));
    }

    let o = templar(&["scene-ground", path(&corpus), "--models", path(&models), "--cap", "1"]);
    assert_eq!(o.status.code(), Some(4));

    let o = templar(&["eval", path(&corpus), "--instance", path(&models)]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).lines().last().unwrap().starts_with("total "));
}

#[test]
fn collage_render_formats() {
    let dir = tempfile::tempdir().unwrap();
    let term = dir.path().join("chair.term");
    fs::write(&term, "# a small collage\nF[sq,tri,sq,\n  G[sq,tri]]\n").unwrap();

    let o = templar(&["collage-render", path(&term)]);
    assert_eq!(o.status.code(), Some(0));
    let svg = stdout(&o);
    assert!(svg.starts_with("<svg") || svg.starts_with("<?xml"));
    assert_eq!(svg.matches("<path").count(), 5);
    assert!(svg.trim_end().ends_with("</svg>"));

    let o = templar(&["collage-render", path(&term), "--format", "text"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(!o.stdout.is_empty());

    let png = dir.path().join("chair.png");
    let o = templar(&["collage-render", path(&term), "--resolution", "32", "--out", path(&png)]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(&fs::read(&png).unwrap()[..8], b"\x89PNG\r\n\x1a\n");

    fs::write(&term, "F[sq,nope,sq,sq]\n").unwrap();
    assert_eq!(templar(&["collage-render", path(&term)]).status.code(), Some(2));
}

#[test]
fn collage_fit_recovers_the_grid() {
    let dir = tempfile::tempdir().unwrap();
    let alg = reference_algebra(DistanceConfig::default());
    let f = |names: [&str; 4]| Term::apply("F", names.iter().map(|n| Term::constant(n)).collect());
    let records = [f(["tri", "sq", "tri", "sq"]), f(["sq", "sq", "tri", "tri"]), f(["tri", "tri", "sq", "tri"])]
        .into_iter()
        .enumerate()
        .map(|(i, term)| CollageRecord {
            target: eval_picture_term(&alg, &term).unwrap(),
            target_ref: format!("target{i}.pic"),
            term,
        })
        .collect();
    let corpus = dir.path().join("fit.corpus");
    write_corpus(&corpus, &Corpus::Collage(CollageCorpus { unknown: "F".into(), records })).unwrap();

    let args = ["collage-fit", path(&corpus), "--seed", "11", "--resolution", "64"];
    let o = templar(&args);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    assert_eq!(o.stdout, templar(&args).stdout);
    let params = parse_params(&stdout(&o)).unwrap();
    assert_eq!(params.len(), 24);
    let truth = [0.5, 0.0, 0.0, 0.5];
    for block in params.chunks(6) {
        for (p, t) in block[..4].iter().zip(truth) {
            assert!((p - t).abs() < 0.03, "{block:?}");
        }
    }

    let fitted = dir.path().join("fitted.params");
    fs::write(&fitted, &o.stdout).unwrap();
    let o = templar(&["eval", path(&corpus), "--instance", path(&fitted)]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).lines().last().unwrap().starts_with("total "));
}
