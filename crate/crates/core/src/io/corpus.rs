use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use super::files::{parse_picture, write_picture};
use super::text::{parse_term_at, Cursor};
use super::{read_text, write_atomic, FormatError};
use crate::algebra::{CandidateFamily, Example, Payload, TemplateAlgebra};
use crate::collage::{collage_example, collage_signature, collage_template, DistanceConfig, Picture, PIC};
use crate::dfa::{regular_signature, regular_template, RegularExample, RegularExampleSet};
use crate::scene::{scene_signature, Attribute, Attributes, PredicateModel, Scene, SceneExample, OBJ};
use crate::term::{typecheck_term, Alphabet, Term, TypeName, VariableContext};

/// The three corpus kinds.
#[derive(Clone, Debug, PartialEq)]
pub enum Corpus {
    Regular(RegularExampleSet),
    Scene(SceneCorpus),
    Collage(CollageCorpus),
}

#[derive(Clone, Debug, PartialEq)]
pub struct SceneCorpus {
    pub dimension: usize,
    pub predicates: Vec<String>,
    /// The attribute each predicate was generated to denote, when known.
    pub denotations: Option<Vec<Attribute>>,
    pub examples: Vec<SceneExample>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct CollageRecord {
    /// A `pic`-typed term; the example is `delta[x, term]` against the target.
    pub term: Term,
    /// Picture file path, relative to the corpus file.
    pub target_ref: String,
    pub target: Picture,
}

#[derive(Clone, Debug, PartialEq)]
pub struct CollageCorpus {
    pub unknown: String,
    pub records: Vec<CollageRecord>,
}

impl Corpus {
    pub fn kind(&self) -> &'static str {
        match self {
            Corpus::Regular(_) => "regular",
            Corpus::Scene(_) => "scene",
            Corpus::Collage(_) => "collage",
        }
    }

    pub fn len(&self) -> usize {
        match self {
            Corpus::Regular(s) => s.len(),
            Corpus::Scene(s) => s.examples.len(),
            Corpus::Collage(c) => c.records.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// The template algebra the corpus is read against, with the learnable
    /// symbols left open.
    pub fn template(&self) -> TemplateAlgebra {
        match self {
            Corpus::Regular(s) => regular_template(s.alphabet()),
            Corpus::Scene(s) => scene_template(&s.predicates, s.dimension),
            Corpus::Collage(c) => collage_template(&c.unknown, DistanceConfig::default()).expect("validated operator"),
        }
    }

    pub fn examples(&self) -> Vec<Example> {
        match self {
            Corpus::Regular(s) => s.to_examples(),
            Corpus::Scene(s) => s.examples.iter().map(SceneExample::to_example).collect(),
            Corpus::Collage(c) => c.records.iter().map(|r| collage_example(r.term.clone(), r.target.clone())).collect(),
        }
    }
}

/// Scene algebra with interpreted connectives and every predicate open,
/// drawn from the logistic family over `dimension` features.
pub fn scene_template(predicates: &[String], dimension: usize) -> TemplateAlgebra {
    let full = crate::scene::scene_algebra(
        &crate::scene::PredicateSet::new(
            predicates.to_vec(),
            predicates.iter().map(|_| PredicateModel::zeros(dimension)).collect(),
        )
        .expect("validated predicate names"),
    );
    let mut b = TemplateAlgebra::builder(full.alphabet().clone(), crate::scene::TRUTH)
        .domain(OBJ, full.domain(&TypeName::new(OBJ)).expect("object domain").clone())
        .domain(crate::scene::TRUTH, full.domain(&TypeName::new(crate::scene::TRUTH)).expect("truth domain").clone())
        .opt(full.opt())
        .combine(full.combine_mode());
    for c in crate::scene::Connective::ALL {
        b = b.interpret(c.name(), move |args: &[Payload]| {
            let xs: Vec<f64> = args.iter().map(|a| a.as_real().ok_or("expected a real")).collect::<Result<_, _>>()?;
            crate::scene::fuzzy_apply(c, &xs).map(Payload::Real).map_err(|e| e.to_string())
        });
    }
    for p in predicates {
        b = b.family(
            p,
            CandidateFamily::parametric(dimension + 1, |params| {
                let m = Arc::new(PredicateModel::from_params(params));
                Arc::new(move |args: &[Payload]| {
                    let o = args[0].as_vector().ok_or("expected a vector")?;
                    Ok(Payload::Real(m.score(o)))
                })
            }),
        );
    }
    b.build().expect("well-formed template")
}

fn invalid(line: usize, message: impl Into<String>) -> FormatError {
    FormatError::Invalid { line, message: message.into() }
}

struct Header {
    line: usize,
    key: String,
    values: Vec<String>,
}

struct Record<'a> {
    line: usize,
    index: usize,
    term_text: &'a str,
    objects_text: &'a str,
    objects_col: usize,
}

fn split(text: &str) -> Result<(Vec<Header>, Vec<Record<'_>>), FormatError> {
    let mut headers = Vec::new();
    let mut records = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let t = raw.trim();
        if t.is_empty() || t == "#" || t.starts_with("# ") || t.starts_with("#\t") {
            continue;
        }
        if let Some(h) = t.strip_prefix('#') {
            if !records.is_empty() {
                return Err(invalid(line, "header after the first record"));
            }
            let mut words = h.split_whitespace();
            let key = words.next().expect("nonempty header").to_string();
            headers.push(Header { line, key, values: words.map(str::to_string).collect() });
            continue;
        }
        let Some(semi) = raw.find(';') else {
            return Err(FormatError::Syntax { line, column: raw.chars().count() + 1, message: "expected `;`".into() });
        };
        let objects_col = raw[..semi + 1].chars().count();
        records.push(Record { line, index: records.len(), term_text: &raw[..semi], objects_text: &raw[semi + 1..], objects_col });
    }
    Ok((headers, records))
}

fn header<'h>(headers: &'h [Header], key: &str) -> Option<&'h Header> {
    headers.iter().find(|h| h.key == key)
}

fn require<'h>(headers: &'h [Header], key: &str) -> Result<&'h Header, FormatError> {
    header(headers, key).ok_or_else(|| invalid(0, format!("missing `#{key}` header")))
}

fn check_keys(headers: &[Header], allowed: &[&str]) -> Result<(), FormatError> {
    for (i, h) in headers.iter().enumerate() {
        if !allowed.contains(&h.key.as_str()) {
            return Err(invalid(h.line, format!("unknown header `#{}`", h.key)));
        }
        if headers[..i].iter().any(|g| g.key == h.key) {
            return Err(invalid(h.line, format!("repeated header `#{}`", h.key)));
        }
    }
    Ok(())
}

fn var_context(headers: &[Header], ty: &str) -> Result<VariableContext, FormatError> {
    let h = require(headers, "vars")?;
    let mut ctx = VariableContext::new();
    for v in &h.values {
        let ok = v.chars().next().is_some_and(|c| c.is_ascii_alphabetic() || c == '_')
            && v.chars().all(|c| c.is_ascii_alphanumeric() || c == '_');
        if !ok {
            return Err(invalid(h.line, format!("`{v}` is not a variable name")));
        }
        ctx.push(v, TypeName::new(ty)).map_err(|e| invalid(h.line, e.to_string()))?;
    }
    Ok(ctx)
}

fn record_term(r: &Record<'_>, alphabet: &Alphabet, ctx: &VariableContext) -> Result<Term, FormatError> {
    let mut c = Cursor::new(r.term_text, r.line, 0);
    let t = parse_term_at(&mut c, ctx)?;
    c.skip_ws();
    if !c.at_end() {
        return Err(c.error(format!("unexpected `{}` after the term", c.rest())));
    }
    typecheck_term(&t, alphabet, ctx).map_err(|source| FormatError::Type { line: r.line, source })?;
    Ok(t)
}

/// Parses corpus text. Collage picture references are resolved against
/// `base`.
pub fn parse_corpus(text: &str, base: Option<&Path>) -> Result<Corpus, FormatError> {
    let (headers, records) = split(text)?;
    let kind = require(&headers, "kind")?;
    match kind.values.as_slice() {
        [k] if k == "regular" => parse_regular(&headers, &records).map(Corpus::Regular),
        [k] if k == "scene" => parse_scene(&headers, &records).map(Corpus::Scene),
        [k] if k == "collage" => parse_collage(&headers, &records, base).map(Corpus::Collage),
        _ => Err(invalid(kind.line, "`#kind` must be regular, scene or collage")),
    }
}

fn parse_regular(headers: &[Header], records: &[Record<'_>]) -> Result<RegularExampleSet, FormatError> {
    check_keys(headers, &["kind", "alphabet", "vars"])?;
    let ah = require(headers, "alphabet")?;
    let mut alphabet = Vec::new();
    for s in &ah.values {
        let mut it = s.chars();
        match (it.next(), it.next()) {
            (Some(c), None) if c != '"' => alphabet.push(c),
            _ => return Err(invalid(ah.line, format!("symbol `{s}` is not a single character"))),
        }
    }
    let ctx = var_context(headers, "alpha")?;
    let sig = regular_signature();
    let mut examples = Vec::with_capacity(records.len());
    for r in records {
        let term = record_term(r, &sig, &ctx)?;
        let strings = quoted_strings(r)?;
        let bad = |why: &str| invalid(r.line, format!("record {}: {why}", r.index + 1));
        let shape = match &term {
            Term::Apply { op, args } if op == "not" => match &args[0] {
                Term::Apply { op, .. } => (true, op.as_str()),
                Term::Var(_) => return Err(bad("unsupported term shape")),
            },
            Term::Apply { op, .. } => (false, op.as_str()),
            Term::Var(_) => return Err(bad("unsupported term shape")),
        };
        let distinct_vars = {
            let mut v = term.variables();
            v.sort();
            v.dedup();
            v.len()
        };
        let ex = match (shape, strings.len()) {
            ((false, "accept"), 1) => RegularExample::accept(&strings[0]),
            ((true, "accept"), 1) => RegularExample::not_accept(&strings[0]),
            ((false, "equiv"), 2) if distinct_vars == 2 => {
                RegularExample::equiv(&strings[0], &strings[1]).map_err(|e| bad(&e.to_string()))?
            }
            ((true, "equiv"), n) if n >= 2 && distinct_vars == 2 => {
                RegularExample::not_equiv(&strings).map_err(|e| bad(&e.to_string()))?
            }
            _ => return Err(bad(&format!("{} object(s) do not fit `{term}`", strings.len()))),
        };
        examples.push(ex);
    }
    RegularExampleSet::new(&alphabet, examples).map_err(|e| invalid(ah.line, e.to_string()))
}

fn quoted_strings(r: &Record<'_>) -> Result<Vec<String>, FormatError> {
    let mut c = Cursor::new(r.objects_text, r.line, r.objects_col);
    let mut out = Vec::new();
    loop {
        c.skip_ws();
        if c.at_end() {
            return Ok(out);
        }
        c.expect('"')?;
        let mut s = String::new();
        loop {
            match c.bump() {
                Some('"') => break,
                Some(ch) => s.push(ch),
                None => return Err(c.error("unterminated string")),
            }
        }
        out.push(s);
    }
}

fn parse_scene(headers: &[Header], records: &[Record<'_>]) -> Result<SceneCorpus, FormatError> {
    check_keys(headers, &["kind", "dimension", "predicates", "denotes", "vars"])?;
    let dh = require(headers, "dimension")?;
    let dimension: usize = match dh.values.as_slice() {
        [d] => d.parse().map_err(|_| invalid(dh.line, format!("`{d}` is not a dimension")))?,
        _ => return Err(invalid(dh.line, "`#dimension` takes one count")),
    };
    if dimension == 0 {
        return Err(invalid(dh.line, "dimension must be positive"));
    }
    let ph = require(headers, "predicates")?;
    let predicates = ph.values.clone();
    crate::scene::PredicateSet::new(predicates.clone(), predicates.iter().map(|_| PredicateModel::zeros(1)).collect())
        .map_err(|e| invalid(ph.line, e.to_string()))?;
    let denotations = match header(headers, "denotes") {
        None => None,
        Some(h) => {
            if h.values.len() != predicates.len() {
                return Err(invalid(h.line, "`#denotes` needs one attribute per predicate"));
            }
            let attrs = h
                .values
                .iter()
                .map(|v| Attribute::from_name(v).ok_or_else(|| invalid(h.line, format!("unknown attribute `{v}`"))))
                .collect::<Result<Vec<_>, _>>()?;
            Some(attrs)
        }
    };
    let ctx = var_context(headers, OBJ)?;
    let sig = scene_signature(&predicates);
    let mut examples = Vec::with_capacity(records.len());
    for r in records {
        let term = record_term(r, &sig, &ctx)?;
        let scene = scene_objects(r, dimension)?;
        examples.push(SceneExample::new(term, scene));
    }
    Ok(SceneCorpus { dimension, predicates, denotations, examples })
}

fn scene_objects(r: &Record<'_>, dimension: usize) -> Result<Scene, FormatError> {
    let mut c = Cursor::new(r.objects_text, r.line, r.objects_col);
    let mut vectors = Vec::new();
    let mut truth = Vec::new();
    loop {
        c.skip_ws();
        if c.at_end() {
            break;
        }
        c.expect('[')?;
        let mut v = Vec::new();
        loop {
            c.skip_ws();
            if c.peek() == Some(']') {
                c.bump();
                break;
            }
            if c.at_end() {
                return Err(c.error("expected `]`, found end of input"));
            }
            v.push(c.real()?);
        }
        if v.len() != dimension {
            return Err(invalid(
                r.line,
                format!("record {}: object {} has dimension {}, expected {dimension}", r.index + 1, vectors.len(), v.len()),
            ));
        }
        vectors.push(v);
        c.skip_ws();
        if c.peek() == Some('{') {
            c.bump();
            let mut names = Vec::new();
            loop {
                c.skip_ws();
                if c.peek() == Some('}') {
                    c.bump();
                    break;
                }
                names.push(c.name()?);
            }
            let values: Vec<Attribute> = names
                .iter()
                .map(|n| Attribute::from_name(n).ok_or_else(|| invalid(r.line, format!("unknown attribute `{n}`"))))
                .collect::<Result<_, _>>()?;
            let attrs = <[Attribute; 4]>::try_from(values)
                .ok()
                .and_then(Attributes::from_values)
                .ok_or_else(|| invalid(r.line, "labels must name a shape, color, size and material in that order"))?;
            truth.push(attrs);
        }
    }
    if !truth.is_empty() && truth.len() != vectors.len() {
        return Err(invalid(r.line, format!("record {}: labels must cover all objects or none", r.index + 1)));
    }
    let objects = vectors.into_iter().enumerate().map(|(i, v)| (crate::algebra::ObjectId(i), v)).collect();
    Scene::new(objects, (!truth.is_empty()).then_some(truth))
        .map_err(|e| invalid(r.line, format!("record {}: {e}", r.index + 1)))
}

fn parse_collage(headers: &[Header], records: &[Record<'_>], base: Option<&Path>) -> Result<CollageCorpus, FormatError> {
    check_keys(headers, &["kind", "unknown", "vars"])?;
    let uh = require(headers, "unknown")?;
    let unknown = match uh.values.as_slice() {
        [u] if u == "F" || u == "G" => u.clone(),
        _ => return Err(invalid(uh.line, "`#unknown` must be F or G")),
    };
    let ctx = var_context(headers, PIC)?;
    if ctx.len() != 1 {
        return Err(invalid(require(headers, "vars")?.line, "collage corpora declare exactly one variable"));
    }
    let x = ctx.iter().next().expect("one variable").0.to_string();
    let sig = collage_signature();
    let mut out = Vec::with_capacity(records.len());
    for r in records {
        let full = record_term(r, &sig, &ctx)?;
        let term = match &full {
            Term::Apply { op, args } if op == "delta" && args[0] == Term::var(&x) && args[1].is_ground() => args[1].clone(),
            _ => return Err(invalid(r.line, format!("record {}: expected `delta[{x},<picture term>]`", r.index + 1))),
        };
        let mut c = Cursor::new(r.objects_text, r.line, r.objects_col);
        c.expect('@')?;
        let target_ref = c.token().ok_or_else(|| c.error("expected a picture path"))?;
        c.skip_ws();
        if !c.at_end() {
            return Err(c.error("a collage record has one target"));
        }
        let path = match base {
            Some(b) => b.join(&target_ref),
            None => PathBuf::from(&target_ref),
        };
        let target = parse_picture(&read_text(&path)?).map_err(|e| invalid(r.line, format!("{}: {e}", path.display())))?;
        out.push(CollageRecord { term, target_ref, target });
    }
    Ok(CollageCorpus { unknown, records: out })
}

/// Normalized corpus text.
pub fn write_corpus_text(corpus: &Corpus) -> String {
    let mut s = String::new();
    match corpus {
        Corpus::Regular(set) => {
            let alpha: Vec<String> = set.alphabet().iter().map(char::to_string).collect();
            let _ = writeln!(s, "#kind regular\n#alphabet {}\n#vars x y", alpha.join(" "));
            for ex in set.examples() {
                let strings: Vec<String> = ex.strings().iter().map(|w| format!("\"{w}\"")).collect();
                let _ = writeln!(s, "{} ; {}", ex.term(), strings.join(" "));
            }
        }
        Corpus::Scene(sc) => {
            let _ = writeln!(s, "#kind scene\n#dimension {}\n#predicates {}", sc.dimension, sc.predicates.join(" "));
            if let Some(d) = &sc.denotations {
                let names: Vec<&str> = d.iter().map(|a| a.name()).collect();
                let _ = writeln!(s, "#denotes {}", names.join(" "));
            }
            let mut vars: Vec<String> = sc.examples.iter().flat_map(SceneExample::variables).collect();
            vars.sort();
            vars.dedup();
            let _ = writeln!(s, "#vars {}", vars.join(" "));
            for ex in &sc.examples {
                let _ = write!(s, "{} ;", ex.formula);
                let mut order: Vec<usize> = (0..ex.scene.len()).collect();
                order.sort_by_key(|&i| ex.scene.objects()[i].0);
                for i in order {
                    let words: Vec<String> = ex.scene.objects()[i].1.iter().map(f64::to_string).collect();
                    let _ = write!(s, " [{}]", words.join(" "));
                    if let Some(t) = ex.scene.truth() {
                        let names: Vec<&str> = t[i].values().iter().map(|a| a.name()).collect();
                        let _ = write!(s, " {{{}}}", names.join(" "));
                    }
                }
                s.push('\n');
            }
        }
        Corpus::Collage(cc) => {
            let _ = writeln!(s, "#kind collage\n#unknown {}\n#vars x", cc.unknown);
            for r in &cc.records {
                let _ = writeln!(s, "delta[x,{}] ; @{}", r.term, r.target_ref);
            }
        }
    }
    s
}

pub fn read_corpus(path: &Path) -> Result<Corpus, FormatError> {
    parse_corpus(&read_text(path)?, path.parent())
}

/// Writes the corpus and, for collage corpora, every target picture next
/// to it.
pub fn write_corpus(path: &Path, corpus: &Corpus) -> Result<(), FormatError> {
    if let Corpus::Collage(cc) = corpus {
        let base = path.parent().unwrap_or(Path::new("."));
        for r in &cc.records {
            let p = base.join(&r.target_ref);
            write_atomic(&p, write_picture(&r.target).as_bytes()).map_err(|source| FormatError::Io { path: p, source })?;
        }
    }
    write_atomic(path, write_corpus_text(corpus).as_bytes())
        .map_err(|source| FormatError::Io { path: path.to_path_buf(), source })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::ObjectId;

    const S_STAR: &str = "#kind regular\n#alphabet a b\n#vars x y\naccept[x] ; \"ab\"\nequiv[x,y] ; \"\" \"ab\"\nequiv[x,y] ; \"ab\" \"abab\"\nequiv[x,y] ; \"aba\" \"ababa\"\nnot[equiv[x,y]] ; \"aba\" \"abab\"\n";

    #[test]
    fn regular_round_trip() {
        let c = parse_corpus(S_STAR, None).unwrap();
        assert_eq!(write_corpus_text(&c), S_STAR);
        let messy = "# a comment\n#kind  regular\n#alphabet a   b\n#vars x y\n\naccept[ x ] ;\"ab\"\nequiv[x, y] ; \"ab\" \"\"\nequiv[x,y];\"abab\" \"ab\"\nequiv[x,y] ; \"ababa\" \"aba\"\nnot[equiv[x,y]] ; \"abab\" \"aba\"\n";
        assert_eq!(write_corpus_text(&parse_corpus(messy, None).unwrap()), S_STAR);
        assert_eq!(c.examples().len(), 5);
        assert!(!c.template().instance_complete());
    }

    #[test]
    fn empty_corpus_parses() {
        let c = parse_corpus("#kind regular\n#alphabet a\n#vars x y\n", None).unwrap();
        assert!(c.is_empty());
    }

    #[test]
    fn regular_errors() {
        let bad = "#kind regular\n#alphabet a b\n#vars x y\naccept[x] ; \"ab\" \"a\"\n";
        assert!(matches!(parse_corpus(bad, None), Err(FormatError::Invalid { line: 4, .. })));
        let bad = "#kind regular\n#alphabet a b\n#vars x y\naccept[x] ; \"ab\n";
        assert!(matches!(parse_corpus(bad, None), Err(FormatError::Syntax { line: 4, .. })));
        let bad = "#kind regular\n#alphabet a b\n#vars x y\nequiv[x] ; \"ab\"\n";
        assert!(matches!(parse_corpus(bad, None), Err(FormatError::Type { line: 4, .. })));
        let bad = "#kind regular\n#alphabet a b\n#vars x y\naccept[x] \"ab\"\n";
        assert!(matches!(parse_corpus(bad, None), Err(FormatError::Syntax { line: 4, .. })));
    }

    fn scene_corpus() -> Corpus {
        let t = Attributes { shape: 0, color: 1, size: 1, material: 0 };
        let scene = Scene::new(
            vec![(ObjectId(0), vec![1.0, -0.25, 1e-3]), (ObjectId(1), vec![0.0, 0.5, 2.0 / 3.0])],
            Some(vec![t, t]),
        )
        .unwrap();
        let f = Term::apply("and", vec![Term::apply("p1", vec![Term::var("x1")]), Term::apply("not", vec![Term::apply("p2", vec![Term::var("x2")])])]);
        Corpus::Scene(SceneCorpus {
            dimension: 3,
            predicates: vec!["p1".into(), "p2".into()],
            denotations: Some(vec![Attribute::from_name("cube").unwrap(), Attribute::from_name("red").unwrap()]),
            examples: vec![SceneExample::new(f, scene)],
        })
    }

    #[test]
    fn scene_round_trip() {
        let c = scene_corpus();
        let text = write_corpus_text(&c);
        assert!(text.contains("and[p1[x1],not[p2[x2]]] ; [1 -0.25 0.001] {cube red large rubber} [0 0.5 0.6666666666666666]"));
        assert_eq!(parse_corpus(&text, None).unwrap(), c);
        assert!(c.template().family("p1").is_some());
    }

    #[test]
    fn scene_dimension_mismatch_names_record() {
        let text = "#kind scene\n#dimension 2\n#predicates p1\n#vars x\np1[x] ; [1 2]\np1[x] ; [1 2 3]\n";
        match parse_corpus(text, None) {
            Err(FormatError::Invalid { line: 6, message }) => assert!(message.starts_with("record 2:")),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn collage_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("c.corpus");
        let c = Corpus::Collage(CollageCorpus {
            unknown: "F".into(),
            records: vec![CollageRecord {
                term: Term::apply("F", ["sq", "tri", "C", "sq"].iter().map(|s| Term::constant(s)).collect()),
                target_ref: "t1.pic".into(),
                target: Picture::unit_square(),
            }],
        });
        write_corpus(&path, &c).unwrap();
        assert_eq!(read_corpus(&path).unwrap(), c);
        assert_eq!(std::fs::read_to_string(&path).unwrap(), "#kind collage\n#unknown F\n#vars x\ndelta[x,F[sq,tri,C,sq]] ; @t1.pic\n");
    }
}
