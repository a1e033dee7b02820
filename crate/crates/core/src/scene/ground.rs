use std::fmt;
use std::sync::Arc;

use super::fuzzy::{fuzzy_apply, Connective};
use super::model::PredicateSet;
use super::SceneError;
use crate::algebra::{
    Combine, Domain, Example, GroundingAssignment, ObjectId, Opt, Payload, PayloadKind, TemplateAlgebra, Value,
    DEFAULT_GROUNDING_CAP,
};
use crate::term::{Alphabet, Term, TypeName, TypedSymbol, VariableContext};

/// Type of objects.
pub const OBJ: &str = "alpha";
/// Type of truth values.
pub const TRUTH: &str = "beta";

/// Attribute values in feature-block order: 3 shapes, 8 colors, 2 sizes,
/// 2 materials.
pub const ATTRIBUTE_NAMES: [&str; 15] = [
    "cube", "sphere", "cylinder", "gray", "red", "blue", "green", "brown", "purple", "cyan", "yellow", "small",
    "large", "rubber", "metal",
];

/// Offsets of the four attribute blocks inside [`ATTRIBUTE_NAMES`].
const BLOCKS: [(usize, usize); 4] = [(0, 3), (3, 8), (11, 2), (13, 2)];

/// One attribute value, indexing [`ATTRIBUTE_NAMES`].
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Attribute(pub usize);

impl Attribute {
    pub fn from_name(name: &str) -> Option<Self> {
        ATTRIBUTE_NAMES.iter().position(|n| *n == name).map(Attribute)
    }

    pub fn name(self) -> &'static str {
        ATTRIBUTE_NAMES[self.0]
    }
}

impl fmt::Display for Attribute {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Ground-truth labels of one object: its shape, color, size and material,
/// each an index inside its block.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Attributes {
    pub shape: usize,
    pub color: usize,
    pub size: usize,
    pub material: usize,
}

impl Attributes {
    pub fn from_values(values: [Attribute; 4]) -> Option<Self> {
        let mut idx = [0; 4];
        for (k, (start, len)) in BLOCKS.iter().enumerate() {
            let a = values[k].0;
            if a < *start || a >= start + len {
                return None;
            }
            idx[k] = a - start;
        }
        Some(Attributes { shape: idx[0], color: idx[1], size: idx[2], material: idx[3] })
    }

    pub fn values(&self) -> [Attribute; 4] {
        let idx = [self.shape, self.color, self.size, self.material];
        let mut out = [Attribute(0); 4];
        for k in 0..4 {
            out[k] = Attribute(BLOCKS[k].0 + idx[k]);
        }
        out
    }

    pub fn has(&self, a: Attribute) -> bool {
        self.values().contains(&a)
    }

    /// 15-dimensional one-hot encoding.
    pub fn one_hot(&self) -> [f64; 15] {
        let mut v = [0.0; 15];
        for a in self.values() {
            v[a.0] = 1.0;
        }
        v
    }

    pub(crate) fn block_sizes() -> [usize; 4] {
        BLOCKS.map(|(_, len)| len)
    }
}

/// Objects as feature vectors, with optional ground truth.
#[derive(Clone, Debug, PartialEq)]
pub struct Scene {
    objects: Vec<(ObjectId, Vec<f64>)>,
    truth: Option<Vec<Attributes>>,
}

impl Scene {
    pub fn new(objects: Vec<(ObjectId, Vec<f64>)>, truth: Option<Vec<Attributes>>) -> Result<Self, SceneError> {
        for (i, (id, v)) in objects.iter().enumerate() {
            if objects[..i].iter().any(|(j, _)| j == id) {
                return Err(SceneError::Invalid(format!("duplicate object id {id}")));
            }
            if !v.iter().all(|x| x.is_finite()) {
                return Err(SceneError::Invalid(format!("object {id} has a non-finite feature")));
            }
            if v.len() != objects[0].1.len() {
                return Err(SceneError::DimensionMismatch { expected: objects[0].1.len(), found: v.len() });
            }
        }
        if let Some(t) = &truth {
            if t.len() != objects.len() {
                return Err(SceneError::Invalid(format!("{} labels for {} objects", t.len(), objects.len())));
            }
        }
        Ok(Scene { objects, truth })
    }

    /// Objects numbered from 0 in the given order.
    pub fn from_vectors(vectors: Vec<Vec<f64>>) -> Result<Self, SceneError> {
        Self::new(vectors.into_iter().enumerate().map(|(i, v)| (ObjectId(i), v)).collect(), None)
    }

    pub fn objects(&self) -> &[(ObjectId, Vec<f64>)] {
        &self.objects
    }

    pub fn truth(&self) -> Option<&[Attributes]> {
        self.truth.as_deref()
    }

    pub fn len(&self) -> usize {
        self.objects.len()
    }

    pub fn is_empty(&self) -> bool {
        self.objects.is_empty()
    }

    pub fn dim(&self) -> Option<usize> {
        self.objects.first().map(|(_, v)| v.len())
    }

    /// Object indices in ascending id order.
    fn sorted_indices(&self) -> Vec<usize> {
        let mut idx: Vec<usize> = (0..self.objects.len()).collect();
        idx.sort_by_key(|&i| self.objects[i].0);
        idx
    }
}

/// A formula together with the scene it is to be grounded in. Variables
/// are the formula's variables in ascending name order.
#[derive(Clone, Debug, PartialEq)]
pub struct SceneExample {
    pub formula: Term,
    pub scene: Scene,
}

impl SceneExample {
    pub fn new(formula: Term, scene: Scene) -> Self {
        SceneExample { formula, scene }
    }

    pub fn variables(&self) -> Vec<String> {
        let mut v: Vec<String> = self.formula.variables().into_iter().map(str::to_string).collect();
        v.sort();
        v.dedup();
        v
    }

    pub fn context(&self) -> VariableContext {
        let mut ctx = VariableContext::new();
        for v in self.variables() {
            ctx.push(&v, TypeName::new(OBJ)).expect("distinct names");
        }
        ctx
    }

    /// The example as a generic template-algebra example.
    pub fn to_example(&self) -> Example {
        let ty = TypeName::new(OBJ);
        Example {
            term: self.formula.clone(),
            vars: self.context(),
            objects: self
                .scene
                .objects
                .iter()
                .map(|(id, v)| (*id, Value::new(&ty, Payload::Vector(v.clone()))))
                .collect(),
        }
    }
}

/// A formula compiled against a predicate set: predicate and variable
/// names replaced by indices.
#[derive(Clone, Debug, PartialEq)]
pub enum Formula {
    Pred { pred: usize, var: usize },
    Conn(Connective, Vec<Formula>),
}

impl Formula {
    pub fn compile(term: &Term, preds: &PredicateSet, vars: &[String]) -> Result<Formula, SceneError> {
        let Term::Apply { op, args } = term else {
            return Err(SceneError::Invalid(format!("variable `{term}` in truth position")));
        };
        if let Some(c) = Connective::from_name(op) {
            if args.len() != c.arity() {
                return Err(SceneError::ArityMismatch { connective: c.name(), expected: c.arity(), found: args.len() });
            }
            let children = args.iter().map(|a| Formula::compile(a, preds, vars)).collect::<Result<_, _>>()?;
            return Ok(Formula::Conn(c, children));
        }
        let pred = preds.index_of(op).ok_or_else(|| SceneError::UnknownPredicate(op.clone()))?;
        match args.as_slice() {
            [Term::Var(v)] => {
                let var = vars.iter().position(|x| x == v).ok_or_else(|| SceneError::UnboundVariable(v.clone()))?;
                Ok(Formula::Pred { pred, var })
            }
            _ => Err(SceneError::Invalid(format!("predicate `{op}` takes one variable"))),
        }
    }

    /// Value with `scores[p][o]` the score of predicate `p` on object `o`
    /// and `assign[v]` the object of variable `v`.
    pub fn eval(&self, scores: &[Vec<f64>], assign: &[usize]) -> f64 {
        match self {
            Formula::Pred { pred, var } => scores[*pred][assign[*var]].clamp(0.0, 1.0),
            Formula::Conn(c, children) => {
                let a = children[0].eval(scores, assign);
                match c {
                    Connective::Not => 1.0 - a,
                    Connective::And => a.min(children[1].eval(scores, assign)),
                    Connective::Or => a.max(children[1].eval(scores, assign)),
                    Connective::Implies => (1.0 - a).max(children[1].eval(scores, assign)),
                }
            }
        }
    }

    /// Adds `upstream · ∂value/∂score` to `dscores`, following the selected
    /// branch through `min`/`max` with ties going to the first argument.
    pub fn backprop(&self, scores: &[Vec<f64>], assign: &[usize], upstream: f64, dscores: &mut [Vec<f64>]) {
        match self {
            Formula::Pred { pred, var } => dscores[*pred][assign[*var]] += upstream,
            Formula::Conn(c, children) => match c {
                Connective::Not => children[0].backprop(scores, assign, -upstream, dscores),
                Connective::And | Connective::Or | Connective::Implies => {
                    let a = children[0].eval(scores, assign);
                    let b = children[1].eval(scores, assign);
                    let (left, sign) = match c {
                        Connective::And => (a <= b, 1.0),
                        Connective::Or => (a >= b, 1.0),
                        _ => (1.0 - a >= b, -1.0),
                    };
                    if left {
                        children[0].backprop(scores, assign, sign * upstream, dscores);
                    } else {
                        children[1].backprop(scores, assign, upstream, dscores);
                    }
                }
            },
        }
    }
}

/// `scores[p][o]` for every predicate and object of the scene.
pub fn score_table(models: &PredicateSet, scene: &Scene) -> Vec<Vec<f64>> {
    models.models().iter().map(|m| scene.objects.iter().map(|(_, o)| m.score(o)).collect()).collect()
}

fn check_dims(models: &PredicateSet, scene: &Scene) -> Result<(), SceneError> {
    if let (Some(a), Some(b)) = (models.dim(), scene.dim()) {
        if a != b {
            return Err(SceneError::DimensionMismatch { expected: a, found: b });
        }
    }
    Ok(())
}

/// Value of the formula under the grounding `g`.
pub fn formula_value(models: &PredicateSet, ex: &SceneExample, g: &GroundingAssignment) -> Result<f64, SceneError> {
    check_dims(models, &ex.scene)?;
    let vars = ex.variables();
    let f = Formula::compile(&ex.formula, models, &vars)?;
    let mut assign = Vec::with_capacity(vars.len());
    for v in &vars {
        let id = g.get(v).ok_or_else(|| SceneError::UnboundVariable(v.clone()))?;
        let i = ex.scene.objects.iter().position(|(o, _)| *o == id).ok_or(SceneError::UnknownObject(id))?;
        if assign.contains(&i) {
            return Err(SceneError::Invalid(format!("grounding {g} is not injective")));
        }
        assign.push(i);
    }
    Ok(f.eval(&score_table(models, &ex.scene), &assign))
}

/// Number of injective maps from `k` variables into `n` objects.
fn injection_count(k: usize, n: usize) -> Option<usize> {
    if k > n {
        return Some(0);
    }
    (0..k).try_fold(1usize, |acc, i| acc.checked_mul(n - i))
}

/// Visits injective assignments of `order.len()` objects to `k` variables
/// in lexicographic order of `order`.
fn for_each_injection(k: usize, order: &[usize], visit: &mut impl FnMut(&[usize])) {
    fn go(k: usize, order: &[usize], used: &mut [bool], cur: &mut Vec<usize>, visit: &mut impl FnMut(&[usize])) {
        if cur.len() == k {
            visit(cur);
            return;
        }
        for (j, &o) in order.iter().enumerate() {
            if !used[j] {
                used[j] = true;
                cur.push(o);
                go(k, order, used, cur, visit);
                cur.pop();
                used[j] = false;
            }
        }
    }
    let mut used = vec![false; order.len()];
    go(k, order, &mut used, &mut Vec::with_capacity(k), visit);
}

/// Best value and assignment (as object indices) of a compiled formula.
pub(crate) fn best_assignment(
    f: &Formula,
    k: usize,
    scene: &Scene,
    scores: &[Vec<f64>],
    cap: usize,
) -> Result<(f64, Vec<usize>), SceneError> {
    match injection_count(k, scene.len()) {
        Some(0) => return Err(SceneError::NoGrounding),
        Some(c) if c <= cap => {}
        _ => return Err(SceneError::CapExceeded { cap }),
    }
    let order = scene.sorted_indices();
    let mut best: Option<(f64, Vec<usize>)> = None;
    for_each_injection(k, &order, &mut |a| {
        let v = f.eval(scores, a);
        if best.as_ref().is_none_or(|(b, _)| v > *b) {
            best = Some((v, a.to_vec()));
        }
    });
    Ok(best.expect("at least one injection"))
}

/// The maximising grounding over all injective assignments, the first in
/// enumeration order on ties.
pub fn ground_best(
    models: &PredicateSet,
    ex: &SceneExample,
    cap: usize,
) -> Result<(f64, GroundingAssignment), SceneError> {
    check_dims(models, &ex.scene)?;
    let vars = ex.variables();
    let f = Formula::compile(&ex.formula, models, &vars)?;
    let (v, a) = best_assignment(&f, vars.len(), &ex.scene, &score_table(models, &ex.scene), cap)?;
    let g = GroundingAssignment::from_pairs(vars.iter().map(String::as_str).zip(a.iter().map(|&i| ex.scene.objects[i].0)));
    Ok((v, g))
}

pub fn example_loss(models: &PredicateSet, ex: &SceneExample) -> Result<f64, SceneError> {
    Ok(1.0 - ground_best(models, ex, DEFAULT_GROUNDING_CAP)?.0)
}

/// Mean of the best-grounding values.
pub fn corpus_objective(models: &PredicateSet, corpus: &[SceneExample]) -> Result<f64, SceneError> {
    corpus_objective_capped(models, corpus, DEFAULT_GROUNDING_CAP)
}

pub fn corpus_objective_capped(models: &PredicateSet, corpus: &[SceneExample], cap: usize) -> Result<f64, SceneError> {
    if corpus.is_empty() {
        return Err(SceneError::EmptyCorpus);
    }
    let mut sum = 0.0;
    for (index, ex) in corpus.iter().enumerate() {
        sum += ground_best(models, ex, cap).map_err(|e| SceneError::InExample { index, source: Box::new(e) })?.0;
    }
    Ok(sum / corpus.len() as f64)
}

/// The signature of scene formulas over the given predicate names.
pub fn scene_signature(predicates: &[String]) -> Alphabet {
    let mut symbols = vec![
        TypedSymbol::new("and", &[TRUTH, TRUTH], TRUTH),
        TypedSymbol::new("or", &[TRUTH, TRUTH], TRUTH),
        TypedSymbol::new("implies", &[TRUTH, TRUTH], TRUTH),
        TypedSymbol::new("not", &[TRUTH], TRUTH),
    ];
    symbols.extend(predicates.iter().map(|p| TypedSymbol::new(p, &[OBJ], TRUTH)));
    Alphabet::from_symbols(symbols).expect("predicate names checked by PredicateSet")
}

/// The scene instance as a generic template algebra: connectives per
/// [`fuzzy_apply`], predicates by their models, `opt = max`, `⊕ = average`.
pub fn scene_algebra(models: &PredicateSet) -> TemplateAlgebra {
    let dim = models.dim();
    let mut b = TemplateAlgebra::builder(scene_signature(models.names()), TRUTH)
        .domain(OBJ, Domain::with_membership(PayloadKind::Vector, move |p| dim.is_none_or(|d| p.as_vector().is_some_and(|v| v.len() == d))))
        .domain(TRUTH, Domain::with_membership(PayloadKind::Real, |p| p.as_real().is_some_and(|x| (0.0..=1.0).contains(&x))))
        .opt(Opt::Max)
        .combine(Combine::Average)
        .grounding_cap(DEFAULT_GROUNDING_CAP);
    for c in Connective::ALL {
        b = b.interpret(c.name(), move |args: &[Payload]| {
            let xs: Vec<f64> = args.iter().map(|a| a.as_real().ok_or("expected a real")).collect::<Result<_, _>>()?;
            fuzzy_apply(c, &xs).map(Payload::Real).map_err(|e| e.to_string())
        });
    }
    for (name, m) in models.names().iter().zip(models.models()) {
        let m = Arc::new(m.clone());
        b = b.interpret(name, move |args: &[Payload]| {
            let o = args[0].as_vector().ok_or("expected a vector")?;
            Ok(Payload::Real(m.score(o)))
        });
    }
    b.build().expect("every symbol interpreted")
}

#[cfg(test)]
mod tests {
    use super::super::model::PredicateModel;
    use super::*;

    fn v(name: &str) -> Term {
        Term::var(name)
    }

    fn p(name: &str, var: &str) -> Term {
        Term::apply(name, vec![v(var)])
    }

    /// Predicate `p1` reads feature 0 through a near-identity logit.
    fn reader() -> PredicateSet {
        PredicateSet::numbered(vec![PredicateModel::new(vec![1.0, 0.0], 0.0), PredicateModel::new(vec![0.0, 1.0], 0.0)])
            .unwrap()
    }

    fn logit(s: f64) -> f64 {
        (s / (1.0 - s)).ln()
    }

    #[test]
    fn single_variable_argmax() {
        let scene = Scene::from_vectors([0.2, 0.8, 0.5].iter().map(|&s| vec![logit(s), 0.0]).collect()).unwrap();
        let ex = SceneExample::new(p("p1", "x"), scene);
        let (val, g) = ground_best(&reader(), &ex, 100).unwrap();
        assert!((val - 0.8).abs() < 1e-12);
        assert_eq!(g.get("x"), Some(ObjectId(1)));
    }

    #[test]
    fn no_grounding_and_cap() {
        let scene = Scene::from_vectors(vec![vec![0.0, 0.0]; 3]).unwrap();
        let f = Term::apply(
            "and",
            vec![Term::apply("and", vec![p("p1", "w"), p("p1", "x")]), Term::apply("and", vec![p("p1", "y"), p("p1", "z")])],
        );
        let ex = SceneExample::new(f, scene.clone());
        assert!(matches!(ground_best(&reader(), &ex, 100), Err(SceneError::NoGrounding)));
        let ex = SceneExample::new(Term::apply("and", vec![p("p1", "x"), p("p2", "y")]), scene);
        assert!(matches!(ground_best(&reader(), &ex, 5), Err(SceneError::CapExceeded { cap: 5 })));
        assert!(ground_best(&reader(), &ex, 6).is_ok());
    }

    #[test]
    fn contradiction_is_at_most_half() {
        let scene = Scene::from_vectors(vec![vec![0.3, 0.0], vec![-2.0, 0.0]]).unwrap();
        let ex = SceneExample::new(Term::apply("and", vec![p("p1", "x"), Term::apply("not", vec![p("p1", "x")])]), scene);
        for g in crate::algebra::enumerate_groundings(&ex.context(), &ex.to_example().objects, 10).unwrap() {
            assert!(formula_value(&reader(), &ex, &g).unwrap() <= 0.5);
        }
    }

    #[test]
    fn matches_generic_algebra() {
        let models = PredicateSet::random(2, 2, 1.5, 3);
        let scene = Scene::from_vectors(vec![vec![0.3, -1.0], vec![1.2, 0.4], vec![-0.7, 2.0]]).unwrap();
        let f = Term::apply("implies", vec![p("p1", "x"), Term::apply("or", vec![p("p2", "y"), Term::apply("not", vec![p("p1", "y")])])]);
        let ex = SceneExample::new(f, scene);
        let generic = scene_algebra(&models).example_value(&ex.to_example()).unwrap();
        assert_eq!(generic.payload.as_real().unwrap(), ground_best(&models, &ex, 100).unwrap().0);
        let total = scene_algebra(&models).total_value(&[ex.to_example(), ex.to_example()]).unwrap();
        assert_eq!(total.payload.as_real().unwrap(), corpus_objective(&models, &[ex.clone(), ex]).unwrap());
    }

    #[test]
    fn unbound_and_unknown() {
        let scene = Scene::from_vectors(vec![vec![0.0, 0.0]]).unwrap();
        let ex = SceneExample::new(p("p1", "x"), scene.clone());
        assert!(matches!(
            formula_value(&reader(), &ex, &GroundingAssignment::new()),
            Err(SceneError::UnboundVariable(_))
        ));
        let ex = SceneExample::new(p("q", "x"), scene);
        assert!(matches!(ground_best(&reader(), &ex, 10), Err(SceneError::UnknownPredicate(_))));
        assert!(matches!(corpus_objective(&reader(), &[]), Err(SceneError::EmptyCorpus)));
    }

    #[test]
    fn attributes_round_trip() {
        let a = Attributes { shape: 2, color: 7, size: 0, material: 1 };
        assert_eq!(Attributes::from_values(a.values()), Some(a));
        assert_eq!(a.values().map(Attribute::name), ["cylinder", "yellow", "small", "metal"]);
        assert_eq!(a.one_hot().iter().sum::<f64>(), 4.0);
        assert!(a.has(Attribute::from_name("metal").unwrap()));
    }
}
