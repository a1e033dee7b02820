use std::sync::Arc;

use thiserror::Error;

use super::geometry::{AffineTransform, CollageOp, Picture};
use super::raster::{hausdorff_distance, sym_diff_area, Grid, Viewport};
use crate::algebra::{
    CandidateFamily, Combine, Domain, EvalError, Example, ObjectId, Operation, Opt, Payload, PayloadKind,
    TemplateAlgebra, Value,
};
use crate::grammar::RegularTreeGrammar;
use crate::term::{Alphabet, Term, TypeName, TypedSymbol, VariableContext};

pub const PIC: &str = "pic";
pub const REAL: &str = "real";

/// Viewport used by the collage distance unless configured otherwise; a
/// margin around the unit square keeps slightly displaced tiles visible.
pub const DEFAULT_VIEWPORT: Viewport = Viewport::new(-0.1, -0.1, 1.1, 1.1);
pub const DEFAULT_RESOLUTION: usize = 128;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum CollageError {
    #[error("`{0}` is not a collage operator")]
    NotAnOperator(String),
    #[error("evaluation produced a non-picture value")]
    NotAPicture,
    #[error("loss is not finite")]
    NonFiniteLoss,
    #[error("empty corpus")]
    EmptyCorpus,
    #[error("initial parameter vector has length {found}, expected {expected}")]
    ParameterLength { expected: usize, found: usize },
    #[error(transparent)]
    Eval(#[from] EvalError),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum DistanceKind {
    SymDiff,
    Hausdorff,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DistanceConfig {
    pub kind: DistanceKind,
    pub viewport: Viewport,
    pub grid: Grid,
}

impl Default for DistanceConfig {
    fn default() -> Self {
        DistanceConfig { kind: DistanceKind::SymDiff, viewport: DEFAULT_VIEWPORT, grid: Grid::square(DEFAULT_RESOLUTION) }
    }
}

impl DistanceConfig {
    pub fn with_resolution(mut self, n: usize) -> Self {
        self.grid = Grid::square(n);
        self
    }

    pub fn distance(&self, a: &Picture, b: &Picture) -> Result<f64, String> {
        match self.kind {
            DistanceKind::SymDiff => Ok(sym_diff_area(a, b, self.viewport, self.grid)),
            DistanceKind::Hausdorff => hausdorff_distance(a, b, self.viewport, self.grid).map_err(|e| e.to_string()),
        }
    }
}

/// `sq, tri, C: pic`, `F: pic⁴ → pic`, `G: pic² → pic`,
/// `delta: pic pic → real`.
pub fn collage_signature() -> Alphabet {
    Alphabet::from_symbols([
        TypedSymbol::constant("sq", PIC),
        TypedSymbol::constant("tri", PIC),
        TypedSymbol::constant("C", PIC),
        TypedSymbol::new("F", &[PIC, PIC, PIC, PIC], PIC),
        TypedSymbol::new("G", &[PIC, PIC], PIC),
        TypedSymbol::new("delta", &[PIC, PIC], REAL),
    ])
    .expect("distinct names")
}

/// Ground-truth interpretation of the operator `name`.
pub fn reference_operator(name: &str) -> Option<CollageOp> {
    match name {
        "F" => Some(CollageOp::grid()),
        "G" => Some(CollageOp::new(vec![
            AffineTransform::scale_translate(0.5, 0.0, 0.0),
            AffineTransform::scale_translate(0.5, 0.5, 0.5),
        ])),
        _ => None,
    }
}

fn constant_picture(p: Picture) -> Operation {
    let p = Arc::new(p);
    Arc::new(move |_: &[Payload]| Ok(Payload::Picture(Arc::clone(&p))))
}

/// The operation computing `⋃ fᵢ(Cᵢ)`.
pub fn collage_operation(op: CollageOp) -> Operation {
    Arc::new(move |args: &[Payload]| {
        let pics: Vec<&Picture> =
            args.iter().map(|a| a.as_picture().map(|p| p.as_ref()).ok_or("expected a picture")).collect::<Result<_, _>>()?;
        op.apply(&pics).map(|p| Payload::Picture(Arc::new(p))).map_err(|e| e.to_string())
    })
}

fn delta_operation(dist: DistanceConfig) -> Operation {
    Arc::new(move |args: &[Payload]| {
        let a = args[0].as_picture().ok_or("expected a picture")?;
        let b = args[1].as_picture().ok_or("expected a picture")?;
        dist.distance(a, b).map(Payload::Real)
    })
}

/// The collage template with `unknown` (an operator symbol) left open and
/// described by its `6k` affine parameters.
pub fn collage_template(unknown: &str, dist: DistanceConfig) -> Result<TemplateAlgebra, CollageError> {
    let sig = collage_signature();
    let arity = match sig.get(unknown) {
        Some(s) if reference_operator(unknown).is_some() => s.arity(),
        _ => return Err(CollageError::NotAnOperator(unknown.to_string())),
    };
    let mut b = TemplateAlgebra::builder(sig, REAL)
        .domain(PIC, Domain::of(PayloadKind::Picture))
        .domain(REAL, Domain::of(PayloadKind::Real))
        .interpret_op("sq", constant_picture(Picture::unit_square()))
        .interpret_op("tri", constant_picture(Picture::isosceles_triangle()))
        .interpret_op("C", constant_picture(Picture::unit_right_triangle()))
        .interpret_op("delta", delta_operation(dist))
        .family(
            unknown,
            CandidateFamily::parametric(6 * arity, |p| {
                collage_operation(CollageOp::from_params(p).expect("length checked by instantiate"))
            }),
        )
        .opt(Opt::Min)
        .combine(Combine::Average);
    for name in ["F", "G"] {
        if name != unknown {
            b = b.interpret_op(name, collage_operation(reference_operator(name).expect("known operator")));
        }
    }
    Ok(b.build().expect("well-formed collage template"))
}

/// All operators at their reference values.
pub fn reference_algebra(dist: DistanceConfig) -> TemplateAlgebra {
    let t = collage_template("F", dist).expect("F is an operator");
    t.instantiate("F", &CollageOp::grid().params()).expect("24 parameters")
}

/// `S → F[A,A,A,A]`, `A → F[A,A,A,A] | F[B,B,B,B]`, `B → G[C,S] | C`,
/// with the reference collage algebra.
pub fn chair_grammar() -> (RegularTreeGrammar, TemplateAlgebra) {
    let terminals = Alphabet::from_symbols([
        TypedSymbol::new("F", &[PIC, PIC, PIC, PIC], PIC),
        TypedSymbol::new("G", &[PIC, PIC], PIC),
        TypedSymbol::constant("C", PIC),
    ])
    .expect("distinct names");
    let f4 = |a: &str| Term::apply("F", vec![Term::constant(a); 4]);
    let g = RegularTreeGrammar::from_parts(
        terminals,
        &[("S", PIC), ("A", PIC), ("B", PIC)],
        vec![
            ("S", f4("A")),
            ("A", f4("A")),
            ("A", f4("B")),
            ("B", Term::apply("G", vec![Term::constant("C"), Term::constant("S")])),
            ("B", Term::constant("C")),
        ],
        "S",
    )
    .expect("chair grammar is well-formed");
    (g, reference_algebra(DistanceConfig::default()))
}

/// Evaluates a closed picture term.
pub fn eval_picture_term(alg: &TemplateAlgebra, term: &Term) -> Result<Picture, CollageError> {
    match alg.eval_closed(term)?.payload {
        Payload::Picture(p) => Ok(Arc::unwrap_or_clone(p)),
        _ => Err(CollageError::NotAPicture),
    }
}

/// `(delta[x1, t], {val(t)})`.
pub fn make_collage_example(alg: &TemplateAlgebra, term: &Term) -> Result<Example, CollageError> {
    let pic = eval_picture_term(alg, term)?;
    Ok(collage_example(term.clone(), pic))
}

/// `(delta[x1, t], {target})` for a given target picture.
pub fn collage_example(term: Term, target: Picture) -> Example {
    let pic = TypeName::new(PIC);
    let mut vars = VariableContext::new();
    vars.push("x1", pic.clone()).expect("single variable");
    Example {
        term: Term::apply("delta", vec![Term::var("x1"), term]),
        vars,
        objects: vec![(ObjectId(0), Value::new(&pic, Payload::Picture(Arc::new(target))))],
    }
}

/// A collage template together with its open operator and the distance
/// its `delta` computes.
#[derive(Clone, Debug)]
pub struct CollageTemplate {
    algebra: TemplateAlgebra,
    unknown: String,
    distance: DistanceConfig,
}

impl CollageTemplate {
    pub fn new(unknown: &str, distance: DistanceConfig) -> Result<Self, CollageError> {
        Ok(CollageTemplate { algebra: collage_template(unknown, distance)?, unknown: unknown.to_string(), distance })
    }

    pub fn algebra(&self) -> &TemplateAlgebra {
        &self.algebra
    }

    pub fn unknown(&self) -> &str {
        &self.unknown
    }

    pub fn distance(&self) -> &DistanceConfig {
        &self.distance
    }

    pub fn param_count(&self) -> usize {
        self.algebra.family(&self.unknown).and_then(CandidateFamily::param_count).unwrap_or(0)
    }

    /// The complete instance with the open operator set to `params`.
    pub fn instantiate(&self, params: &[f64]) -> Result<TemplateAlgebra, CollageError> {
        if params.len() != self.param_count() {
            return Err(CollageError::ParameterLength { expected: self.param_count(), found: params.len() });
        }
        self.algebra.instantiate(&self.unknown, params).map_err(|_| CollageError::NotAnOperator(self.unknown.clone()))
    }
}

/// Mean distance between targets and the evaluations under `params`.
pub fn corpus_loss(template: &CollageTemplate, params: &[f64], corpus: &[Example]) -> Result<f64, CollageError> {
    if corpus.is_empty() {
        return Err(CollageError::EmptyCorpus);
    }
    let inst = template.instantiate(params)?;
    match inst.total_value(corpus)?.payload {
        Payload::Real(r) => Ok(r),
        _ => Err(CollageError::NotAPicture),
    }
}
