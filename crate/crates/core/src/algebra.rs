//! Template algebras, groundings and the example/corpus objective.
//!
//! A [`TemplateAlgebra`] assigns a domain to each type and an operation to
//! some of the symbols of its alphabet. Symbols without an operation are the
//! holes that learning fills in, each described by a [`CandidateFamily`].
//! One type is the evaluation type: it carries a total order, an aggregator
//! ([`Combine`]) and an optimisation mode ([`Opt`]) used to score examples.

use std::cmp::Ordering;
use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::sync::Arc;

use thiserror::Error;

use crate::collage::Picture;
use crate::term::{typecheck_term, Alphabet, Term, TypeError, TypeName, VariableContext};

/// Default bound on the number of groundings enumerated for one example.
pub const DEFAULT_GROUNDING_CAP: usize = 1_000_000;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum PayloadKind {
    Str,
    Bool,
    Real,
    Vector,
    Picture,
}

impl fmt::Display for PayloadKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            PayloadKind::Str => "string",
            PayloadKind::Bool => "boolean",
            PayloadKind::Real => "real",
            PayloadKind::Vector => "real-vector",
            PayloadKind::Picture => "picture",
        };
        f.write_str(s)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum Payload {
    Str(String),
    Bool(bool),
    Real(f64),
    Vector(Vec<f64>),
    Picture(Arc<Picture>),
}

impl Payload {
    pub fn kind(&self) -> PayloadKind {
        match self {
            Payload::Str(_) => PayloadKind::Str,
            Payload::Bool(_) => PayloadKind::Bool,
            Payload::Real(_) => PayloadKind::Real,
            Payload::Vector(_) => PayloadKind::Vector,
            Payload::Picture(_) => PayloadKind::Picture,
        }
    }

    pub fn as_bool(&self) -> Option<bool> {
        match self {
            Payload::Bool(b) => Some(*b),
            _ => None,
        }
    }

    pub fn as_real(&self) -> Option<f64> {
        match self {
            Payload::Real(r) => Some(*r),
            _ => None,
        }
    }

    pub fn as_str(&self) -> Option<&str> {
        match self {
            Payload::Str(s) => Some(s),
            _ => None,
        }
    }

    pub fn as_vector(&self) -> Option<&[f64]> {
        match self {
            Payload::Vector(v) => Some(v),
            _ => None,
        }
    }

    pub fn as_picture(&self) -> Option<&Arc<Picture>> {
        match self {
            Payload::Picture(p) => Some(p),
            _ => None,
        }
    }
}

/// An element of the carrier of type `ty`.
#[derive(Clone, Debug, PartialEq)]
pub struct Value {
    pub ty: TypeName,
    pub payload: Payload,
}

impl Value {
    pub fn new(ty: &TypeName, payload: Payload) -> Self {
        Value { ty: ty.clone(), payload }
    }
}

/// Host function implementing a symbol. Receives argument payloads in order.
pub type Operation = Arc<dyn Fn(&[Payload]) -> Result<Payload, String> + Send + Sync>;

type Membership = Arc<dyn Fn(&Payload) -> bool + Send + Sync>;

/// Carrier description: payload kind plus an optional membership test.
#[derive(Clone)]
pub struct Domain {
    pub kind: PayloadKind,
    member: Option<Membership>,
}

impl Domain {
    pub fn of(kind: PayloadKind) -> Self {
        Domain { kind, member: None }
    }

    pub fn with_membership(kind: PayloadKind, test: impl Fn(&Payload) -> bool + Send + Sync + 'static) -> Self {
        Domain { kind, member: Some(Arc::new(test)) }
    }

    pub fn contains(&self, p: &Payload) -> bool {
        p.kind() == self.kind && self.member.as_ref().is_none_or(|m| m(p))
    }
}

impl fmt::Debug for Domain {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Domain")
            .field("kind", &self.kind)
            .field("restricted", &self.member.is_some())
            .finish()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Opt {
    Min,
    Max,
}

/// Aggregator applied to the multiset of example values.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Combine {
    /// Logical conjunction over booleans.
    Conjunction,
    /// Arithmetic mean over reals.
    Average,
}

/// Candidate functions for an uninterpreted symbol.
#[derive(Clone)]
pub enum CandidateFamily {
    /// A real parameter vector of fixed length and the rule turning it into
    /// an operation.
    Parametric {
        param_count: usize,
        instantiate: Arc<dyn Fn(&[f64]) -> Operation + Send + Sync>,
    },
    /// A family that is not parameterised by reals (for example, the
    /// characteristic functions of regular languages); described in prose.
    Described(String),
}

impl CandidateFamily {
    pub fn parametric(param_count: usize, instantiate: impl Fn(&[f64]) -> Operation + Send + Sync + 'static) -> Self {
        CandidateFamily::Parametric { param_count, instantiate: Arc::new(instantiate) }
    }

    pub fn param_count(&self) -> Option<usize> {
        match self {
            CandidateFamily::Parametric { param_count, .. } => Some(*param_count),
            CandidateFamily::Described(_) => None,
        }
    }
}

impl fmt::Debug for CandidateFamily {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CandidateFamily::Parametric { param_count, .. } => write!(f, "Parametric({param_count})"),
            CandidateFamily::Described(d) => write!(f, "Described({d:?})"),
        }
    }
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum AlgebraError {
    #[error("type `{0}` has no registered domain")]
    MissingDomain(TypeName),
    #[error("interpretation given for `{0}`, which is not in the alphabet")]
    ForeignInterpretation(String),
    #[error("uninterpreted symbol `{0}` has no candidate family")]
    MissingFamily(String),
    #[error("evaluation type `{ty}` has payload kind {kind}, which has no total order")]
    UnorderedEvaluationType { ty: TypeName, kind: PayloadKind },
    #[error("combine {combine:?} is not defined on {kind} values")]
    CombineKind { combine: Combine, kind: PayloadKind },
    #[error("symbol `{0}` has no candidate family to instantiate")]
    NoSuchFamily(String),
    #[error("family of `{symbol}` takes {expected} parameters, got {found}")]
    ParameterCount { symbol: String, expected: usize, found: usize },
    #[error("family of `{0}` is not parametric")]
    NotParametric(String),
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum EvalError {
    #[error("unknown symbol `{0}`")]
    UnknownSymbol(String),
    #[error("`{symbol}` expects {expected} arguments, found {found}")]
    ArityMismatch { symbol: String, expected: usize, found: usize },
    #[error("argument {position} of `{symbol}` has type {found}, expected {expected}")]
    TypeMismatch { symbol: String, position: usize, expected: TypeName, found: TypeName },
    #[error("symbol `{0}` is uninterpreted")]
    UninterpretedSymbol(String),
    #[error("`{symbol}`: {message}")]
    DomainError { symbol: String, message: String },
    #[error("variable `{0}` is unbound")]
    UnboundVariable(String),
    #[error("object {0} is not part of the example")]
    UnknownObject(ObjectId),
    #[error(transparent)]
    Type(#[from] TypeError),
    #[error("no grounding exists for the example")]
    NoGrounding,
    #[error("more than {cap} groundings")]
    CapExceeded { cap: usize },
    #[error("empty corpus")]
    EmptyCorpus,
    #[error("example {index}: {source}")]
    InExample {
        index: usize,
        #[source]
        source: Box<EvalError>,
    },
}

/// Identity of an object inside an example. Two objects with equal values
/// but different ids are distinct for the purpose of injectivity.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ObjectId(pub usize);

impl fmt::Display for ObjectId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "o{}", self.0)
    }
}

/// A term of the evaluation type together with the objects its variables
/// may be grounded in.
#[derive(Clone, Debug, PartialEq)]
pub struct Example {
    pub term: Term,
    pub vars: VariableContext,
    pub objects: Vec<(ObjectId, Value)>,
}

impl Example {
    pub fn object(&self, id: ObjectId) -> Option<&Value> {
        self.objects.iter().find(|(i, _)| *i == id).map(|(_, v)| v)
    }
}

/// An injective, type-respecting map from variables to object ids.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash)]
pub struct GroundingAssignment {
    pairs: Vec<(String, ObjectId)>,
}

impl GroundingAssignment {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn from_pairs<'a>(pairs: impl IntoIterator<Item = (&'a str, ObjectId)>) -> Self {
        GroundingAssignment { pairs: pairs.into_iter().map(|(n, o)| (n.to_string(), o)).collect() }
    }

    pub fn get(&self, var: &str) -> Option<ObjectId> {
        self.pairs.iter().find(|(n, _)| n == var).map(|(_, o)| *o)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, ObjectId)> {
        self.pairs.iter().map(|(n, o)| (n.as_str(), *o))
    }

    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }
}

impl fmt::Display for GroundingAssignment {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("{")?;
        for (i, (n, o)) in self.pairs.iter().enumerate() {
            if i > 0 {
                f.write_str(", ")?;
            }
            write!(f, "{n}->{o}")?;
        }
        f.write_str("}")
    }
}

/// All injective, type-respecting assignments of `objects` to the variables
/// of `ctx`. Objects are taken in ascending id order and assignments are
/// produced in lexicographic order (the first variable varies slowest).
pub fn enumerate_groundings(
    ctx: &VariableContext,
    objects: &[(ObjectId, Value)],
    cap: usize,
) -> Result<Vec<GroundingAssignment>, EvalError> {
    let mut out = Vec::new();
    for_each_grounding(ctx, objects, cap, |g| {
        out.push(GroundingAssignment { pairs: g.to_vec() });
    })?;
    Ok(out)
}

/// Visits groundings in the order of [`enumerate_groundings`] without
/// collecting them.
pub fn for_each_grounding(
    ctx: &VariableContext,
    objects: &[(ObjectId, Value)],
    cap: usize,
    mut visit: impl FnMut(&[(String, ObjectId)]),
) -> Result<usize, EvalError> {
    let mut sorted: Vec<&(ObjectId, Value)> = objects.iter().collect();
    sorted.sort_by_key(|(id, _)| *id);
    let vars: Vec<(&str, &TypeName)> = ctx.iter().collect();
    let mut used = vec![false; sorted.len()];
    let mut current: Vec<(String, ObjectId)> = Vec::with_capacity(vars.len());
    let mut count = 0usize;
    descend(&vars, &sorted, &mut used, &mut current, &mut count, cap, &mut visit)?;
    Ok(count)
}

fn descend(
    vars: &[(&str, &TypeName)],
    objects: &[&(ObjectId, Value)],
    used: &mut [bool],
    current: &mut Vec<(String, ObjectId)>,
    count: &mut usize,
    cap: usize,
    visit: &mut impl FnMut(&[(String, ObjectId)]),
) -> Result<(), EvalError> {
    let depth = current.len();
    if depth == vars.len() {
        *count += 1;
        if *count > cap {
            return Err(EvalError::CapExceeded { cap });
        }
        visit(current);
        return Ok(());
    }
    let (name, ty) = vars[depth];
    for (i, (id, value)) in objects.iter().map(|p| (&p.0, &p.1)).enumerate() {
        if used[i] || &value.ty != ty {
            continue;
        }
        used[i] = true;
        current.push((name.to_string(), *id));
        let r = descend(vars, objects, used, current, count, cap, visit);
        current.pop();
        used[i] = false;
        r?;
    }
    Ok(())
}

/// An algebra over a typed alphabet in which some symbols may be left
/// uninterpreted. Immutable once built; installing an interpretation
/// produces a new algebra.
#[derive(Clone)]
pub struct TemplateAlgebra {
    alphabet: Alphabet,
    domains: BTreeMap<TypeName, Domain>,
    interpretations: HashMap<String, Operation>,
    families: HashMap<String, CandidateFamily>,
    eval_type: TypeName,
    opt: Opt,
    combine: Combine,
    grounding_cap: usize,
}

impl fmt::Debug for TemplateAlgebra {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut interpreted: Vec<&String> = self.interpretations.keys().collect();
        interpreted.sort();
        f.debug_struct("TemplateAlgebra")
            .field("alphabet", &self.alphabet)
            .field("domains", &self.domains)
            .field("interpreted", &interpreted)
            .field("families", &self.families)
            .field("eval_type", &self.eval_type)
            .field("opt", &self.opt)
            .field("combine", &self.combine)
            .finish()
    }
}

pub struct TemplateAlgebraBuilder {
    inner: TemplateAlgebra,
}

impl TemplateAlgebraBuilder {
    pub fn domain(mut self, ty: &str, domain: Domain) -> Self {
        self.inner.domains.insert(TypeName::new(ty), domain);
        self
    }

    pub fn interpret(
        mut self,
        symbol: &str,
        op: impl Fn(&[Payload]) -> Result<Payload, String> + Send + Sync + 'static,
    ) -> Self {
        self.inner.interpretations.insert(symbol.to_string(), Arc::new(op));
        self
    }

    pub fn interpret_op(mut self, symbol: &str, op: Operation) -> Self {
        self.inner.interpretations.insert(symbol.to_string(), op);
        self
    }

    pub fn family(mut self, symbol: &str, family: CandidateFamily) -> Self {
        self.inner.families.insert(symbol.to_string(), family);
        self
    }

    pub fn opt(mut self, opt: Opt) -> Self {
        self.inner.opt = opt;
        self
    }

    pub fn combine(mut self, combine: Combine) -> Self {
        self.inner.combine = combine;
        self
    }

    pub fn grounding_cap(mut self, cap: usize) -> Self {
        self.inner.grounding_cap = cap;
        self
    }

    pub fn build(self) -> Result<TemplateAlgebra, AlgebraError> {
        let alg = self.inner;
        let mut types = alg.alphabet.types();
        types.insert(alg.eval_type.clone());
        for ty in &types {
            if !alg.domains.contains_key(ty) {
                return Err(AlgebraError::MissingDomain(ty.clone()));
            }
        }
        for name in alg.interpretations.keys() {
            if !alg.alphabet.contains(name) {
                return Err(AlgebraError::ForeignInterpretation(name.clone()));
            }
        }
        for sym in alg.alphabet.iter() {
            if !alg.interpretations.contains_key(&sym.name) && !alg.families.contains_key(&sym.name) {
                return Err(AlgebraError::MissingFamily(sym.name.clone()));
            }
        }
        let kind = alg.domains[&alg.eval_type].kind;
        if !matches!(kind, PayloadKind::Bool | PayloadKind::Real) {
            return Err(AlgebraError::UnorderedEvaluationType { ty: alg.eval_type.clone(), kind });
        }
        let combine_ok = matches!(
            (alg.combine, kind),
            (Combine::Conjunction, PayloadKind::Bool) | (Combine::Average, PayloadKind::Real)
        );
        if !combine_ok {
            return Err(AlgebraError::CombineKind { combine: alg.combine, kind });
        }
        Ok(alg)
    }
}

impl TemplateAlgebra {
    pub fn builder(alphabet: Alphabet, eval_type: &str) -> TemplateAlgebraBuilder {
        TemplateAlgebraBuilder {
            inner: TemplateAlgebra {
                alphabet,
                domains: BTreeMap::new(),
                interpretations: HashMap::new(),
                families: HashMap::new(),
                eval_type: TypeName::new(eval_type),
                opt: Opt::Max,
                combine: Combine::Average,
                grounding_cap: DEFAULT_GROUNDING_CAP,
            },
        }
    }

    pub fn alphabet(&self) -> &Alphabet {
        &self.alphabet
    }

    pub fn eval_type(&self) -> &TypeName {
        &self.eval_type
    }

    pub fn opt(&self) -> Opt {
        self.opt
    }

    pub fn combine_mode(&self) -> Combine {
        self.combine
    }

    pub fn grounding_cap(&self) -> usize {
        self.grounding_cap
    }

    pub fn domain(&self, ty: &TypeName) -> Option<&Domain> {
        self.domains.get(ty)
    }

    pub fn family(&self, symbol: &str) -> Option<&CandidateFamily> {
        self.families.get(symbol)
    }

    pub fn is_interpreted(&self, symbol: &str) -> bool {
        self.interpretations.contains_key(symbol)
    }

    /// Symbols still lacking an interpretation, in name order.
    pub fn uninterpreted(&self) -> Vec<&str> {
        self.alphabet
            .iter()
            .filter(|s| !self.interpretations.contains_key(&s.name))
            .map(|s| s.name.as_str())
            .collect()
    }

    /// True iff every symbol of the alphabet is interpreted.
    pub fn instance_complete(&self) -> bool {
        self.alphabet.iter().all(|s| self.interpretations.contains_key(&s.name))
    }

    /// A copy with `symbol` interpreted by `op`.
    pub fn with_interpretation(&self, symbol: &str, op: Operation) -> Result<TemplateAlgebra, AlgebraError> {
        if !self.alphabet.contains(symbol) {
            return Err(AlgebraError::ForeignInterpretation(symbol.to_string()));
        }
        let mut out = self.clone();
        out.interpretations.insert(symbol.to_string(), op);
        Ok(out)
    }

    /// A copy with `symbol` interpreted by its candidate family at `params`.
    pub fn instantiate(&self, symbol: &str, params: &[f64]) -> Result<TemplateAlgebra, AlgebraError> {
        match self.families.get(symbol) {
            None => Err(AlgebraError::NoSuchFamily(symbol.to_string())),
            Some(CandidateFamily::Described(_)) => Err(AlgebraError::NotParametric(symbol.to_string())),
            Some(CandidateFamily::Parametric { param_count, instantiate }) => {
                if params.len() != *param_count {
                    return Err(AlgebraError::ParameterCount {
                        symbol: symbol.to_string(),
                        expected: *param_count,
                        found: params.len(),
                    });
                }
                self.with_interpretation(symbol, instantiate(params))
            }
        }
    }

    pub fn typecheck(&self, term: &Term, ctx: &VariableContext) -> Result<TypeName, TypeError> {
        typecheck_term(term, &self.alphabet, ctx)
    }

    /// Total order on values of the evaluation type (`false < true`, reals
    /// by value).
    pub fn compare(&self, a: &Payload, b: &Payload) -> Ordering {
        match (a, b) {
            (Payload::Bool(x), Payload::Bool(y)) => x.cmp(y),
            (Payload::Real(x), Payload::Real(y)) => x.total_cmp(y),
            _ => Ordering::Equal,
        }
    }

    /// Evaluates a variable-free term bottom-up.
    pub fn eval_closed(&self, term: &Term) -> Result<Value, EvalError> {
        self.eval_with(term, &mut |v| Err(EvalError::UnboundVariable(v.to_string())))
    }

    /// Evaluates `term` with each variable replaced by the object `g` maps
    /// it to.
    pub fn eval_open(
        &self,
        term: &Term,
        ctx: &VariableContext,
        g: &GroundingAssignment,
        objects: &[(ObjectId, Value)],
    ) -> Result<Value, EvalError> {
        self.eval_with(term, &mut |v| {
            let declared = ctx.type_of(v).ok_or_else(|| EvalError::UnboundVariable(v.to_string()))?;
            let id = g.get(v).ok_or_else(|| EvalError::UnboundVariable(v.to_string()))?;
            let value = objects
                .iter()
                .find(|(i, _)| *i == id)
                .map(|(_, val)| val)
                .ok_or(EvalError::UnknownObject(id))?;
            if &value.ty != declared {
                return Err(EvalError::TypeMismatch {
                    symbol: v.to_string(),
                    position: 0,
                    expected: declared.clone(),
                    found: value.ty.clone(),
                });
            }
            Ok(value.clone())
        })
    }

    fn eval_with(
        &self,
        term: &Term,
        lookup: &mut dyn FnMut(&str) -> Result<Value, EvalError>,
    ) -> Result<Value, EvalError> {
        match term {
            Term::Var(v) => lookup(v),
            Term::Apply { op, args } => {
                let sym = self.alphabet.get(op).ok_or_else(|| EvalError::UnknownSymbol(op.clone()))?;
                if sym.arity() != args.len() {
                    return Err(EvalError::ArityMismatch {
                        symbol: op.clone(),
                        expected: sym.arity(),
                        found: args.len(),
                    });
                }
                let mut payloads = Vec::with_capacity(args.len());
                for (i, (arg, expected)) in args.iter().zip(&sym.arg_types).enumerate() {
                    let v = self.eval_with(arg, lookup)?;
                    if &v.ty != expected {
                        return Err(EvalError::TypeMismatch {
                            symbol: op.clone(),
                            position: i,
                            expected: expected.clone(),
                            found: v.ty,
                        });
                    }
                    payloads.push(v.payload);
                }
                let f = self
                    .interpretations
                    .get(op)
                    .ok_or_else(|| EvalError::UninterpretedSymbol(op.clone()))?;
                let payload =
                    f(&payloads).map_err(|message| EvalError::DomainError { symbol: op.clone(), message })?;
                let domain = &self.domains[&sym.result_type];
                if !domain.contains(&payload) {
                    return Err(EvalError::DomainError {
                        symbol: op.clone(),
                        message: format!("result outside the domain of {}", sym.result_type),
                    });
                }
                Ok(Value { ty: sym.result_type.clone(), payload })
            }
        }
    }

    /// Value of one example: the optimum (per [`Opt`]) of the term's value
    /// over all groundings of its objects.
    pub fn example_value(&self, ex: &Example) -> Result<Value, EvalError> {
        let mut best: Option<Value> = None;
        let mut failure: Option<EvalError> = None;
        for_each_grounding(&ex.vars, &ex.objects, self.grounding_cap, |pairs| {
            if failure.is_some() {
                return;
            }
            let g = GroundingAssignment { pairs: pairs.to_vec() };
            match self.eval_open(&ex.term, &ex.vars, &g, &ex.objects) {
                Ok(v) => {
                    let better = match &best {
                        None => true,
                        Some(b) => {
                            let ord = self.compare(&v.payload, &b.payload);
                            match self.opt {
                                Opt::Max => ord == Ordering::Greater,
                                Opt::Min => ord == Ordering::Less,
                            }
                        }
                    };
                    if better {
                        best = Some(v);
                    }
                }
                Err(e) => failure = Some(e),
            }
        })?;
        if let Some(e) = failure {
            return Err(e);
        }
        best.ok_or(EvalError::NoGrounding)
    }

    /// Aggregates the example values with [`Combine`].
    pub fn total_value(&self, examples: &[Example]) -> Result<Value, EvalError> {
        if examples.is_empty() {
            return Err(EvalError::EmptyCorpus);
        }
        let mut values = Vec::with_capacity(examples.len());
        for (index, ex) in examples.iter().enumerate() {
            let v = self
                .example_value(ex)
                .map_err(|e| EvalError::InExample { index, source: Box::new(e) })?;
            values.push(v.payload);
        }
        Ok(Value { ty: self.eval_type.clone(), payload: self.combine(&values) })
    }

    /// Applies the aggregator to a nonempty list of evaluation-type payloads.
    pub fn combine(&self, values: &[Payload]) -> Payload {
        match self.combine {
            Combine::Conjunction => Payload::Bool(values.iter().all(|v| v.as_bool() == Some(true))),
            Combine::Average => {
                let sum: f64 = values.iter().filter_map(Payload::as_real).sum();
                Payload::Real(sum / values.len() as f64)
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::term::TypedSymbol;

    fn fuzzy_algebra() -> TemplateAlgebra {
        let alphabet = Alphabet::from_symbols([
            TypedSymbol::new("and", &["beta", "beta"], "beta"),
            TypedSymbol::new("not", &["beta"], "beta"),
            TypedSymbol::new("c03", &[], "beta"),
            TypedSymbol::new("c07", &[], "beta"),
            TypedSymbol::new("p1", &["alpha"], "beta"),
        ])
        .unwrap();
        TemplateAlgebra::builder(alphabet, "beta")
            .domain("alpha", Domain::of(PayloadKind::Real))
            .domain(
                "beta",
                Domain::with_membership(PayloadKind::Real, |p| p.as_real().is_some_and(|r| (0.0..=1.0).contains(&r))),
            )
            .interpret("and", |a| Ok(Payload::Real(a[0].as_real().unwrap().min(a[1].as_real().unwrap()))))
            .interpret("not", |a| Ok(Payload::Real(1.0 - a[0].as_real().unwrap())))
            .interpret("c03", |_| Ok(Payload::Real(0.3)))
            .interpret("c07", |_| Ok(Payload::Real(0.7)))
            .interpret("p1", |a| Ok(a[0].clone()))
            .opt(Opt::Max)
            .combine(Combine::Average)
            .build()
            .unwrap()
    }

    fn objects(scores: &[f64]) -> Vec<(ObjectId, Value)> {
        let alpha = TypeName::new("alpha");
        scores.iter().enumerate().map(|(i, s)| (ObjectId(i), Value::new(&alpha, Payload::Real(*s)))).collect()
    }

    #[test]
    fn conjunction_of_constants_is_the_minimum() {
        let alg = fuzzy_algebra();
        let t = Term::apply("and", vec![Term::constant("c03"), Term::constant("c07")]);
        assert_eq!(alg.eval_closed(&t).unwrap().payload, Payload::Real(0.3));
    }

    #[test]
    fn open_evaluation_reads_the_grounded_object() {
        let alg = fuzzy_algebra();
        let ctx = VariableContext::from_pairs([("x", "alpha")]).unwrap();
        let objs = objects(&[0.9]);
        let g = GroundingAssignment::from_pairs([("x", ObjectId(0))]);
        let t = Term::apply("p1", vec![Term::var("x")]);
        assert_eq!(alg.eval_open(&t, &ctx, &g, &objs).unwrap().payload, Payload::Real(0.9));
        let closed = Term::apply("not", vec![Term::constant("c03")]);
        assert_eq!(
            alg.eval_open(&closed, &VariableContext::new(), &GroundingAssignment::new(), &[]).unwrap(),
            alg.eval_closed(&closed).unwrap()
        );
    }

    #[test]
    fn unbound_and_uninterpreted_are_errors() {
        let alg = fuzzy_algebra();
        let t = Term::apply("p1", vec![Term::var("x")]);
        assert!(matches!(alg.eval_closed(&t), Err(EvalError::UnboundVariable(_))));
    }

    #[test]
    fn grounding_counts_are_falling_factorials() {
        let ctx = VariableContext::from_pairs([("x", "alpha"), ("y", "alpha")]).unwrap();
        assert_eq!(enumerate_groundings(&ctx, &objects(&[0.1, 0.2, 0.3]), 100).unwrap().len(), 6);
        assert_eq!(enumerate_groundings(&ctx, &objects(&[0.1, 0.2]), 100).unwrap().len(), 2);
        let beta_only = vec![(ObjectId(0), Value::new(&TypeName::new("beta"), Payload::Real(0.5)))];
        let ctx1 = VariableContext::from_pairs([("x", "alpha")]).unwrap();
        assert!(enumerate_groundings(&ctx1, &beta_only, 100).unwrap().is_empty());
    }

    #[test]
    fn groundings_are_lexicographic_in_sorted_ids() {
        let ctx = VariableContext::from_pairs([("x", "alpha"), ("y", "alpha")]).unwrap();
        let mut objs = objects(&[0.1, 0.2, 0.3]);
        objs.reverse();
        let gs = enumerate_groundings(&ctx, &objs, 100).unwrap();
        let ids: Vec<(usize, usize)> =
            gs.iter().map(|g| (g.get("x").unwrap().0, g.get("y").unwrap().0)).collect();
        assert_eq!(ids, vec![(0, 1), (0, 2), (1, 0), (1, 2), (2, 0), (2, 1)]);
    }

    #[test]
    fn cap_is_enforced() {
        let ctx = VariableContext::from_pairs([("x", "alpha"), ("y", "alpha")]).unwrap();
        assert!(matches!(
            enumerate_groundings(&ctx, &objects(&[0.1, 0.2, 0.3]), 5),
            Err(EvalError::CapExceeded { cap: 5 })
        ));
    }

    #[test]
    fn example_value_takes_the_max_score() {
        let alg = fuzzy_algebra();
        let ex = Example {
            term: Term::apply("p1", vec![Term::var("x")]),
            vars: VariableContext::from_pairs([("x", "alpha")]).unwrap(),
            objects: objects(&[0.2, 0.8, 0.5]),
        };
        assert_eq!(alg.example_value(&ex).unwrap().payload, Payload::Real(0.8));
    }

    #[test]
    fn total_value_averages_and_rejects_empty() {
        let alg = fuzzy_algebra();
        let mk = |s: f64| Example {
            term: Term::apply("p1", vec![Term::var("x")]),
            vars: VariableContext::from_pairs([("x", "alpha")]).unwrap(),
            objects: objects(&[s]),
        };
        assert_eq!(alg.total_value(&[mk(1.0), mk(0.5)]).unwrap().payload, Payload::Real(0.75));
        assert_eq!(alg.total_value(&[]), Err(EvalError::EmptyCorpus));
    }

    #[test]
    fn too_many_variables_means_no_grounding() {
        let alg = fuzzy_algebra();
        let ex = Example {
            term: Term::apply("and", vec![Term::apply("p1", vec![Term::var("x")]), Term::apply("p1", vec![Term::var("y")])]),
            vars: VariableContext::from_pairs([("x", "alpha"), ("y", "alpha")]).unwrap(),
            objects: objects(&[0.4]),
        };
        assert_eq!(alg.example_value(&ex), Err(EvalError::NoGrounding));
    }

    #[test]
    fn completeness_tracks_interpretations() {
        let alphabet = Alphabet::from_symbols([TypedSymbol::new("f", &["beta"], "beta")]).unwrap();
        let template = TemplateAlgebra::builder(alphabet, "beta")
            .domain("beta", Domain::of(PayloadKind::Bool))
            .family("f", CandidateFamily::Described("any boolean function".into()))
            .opt(Opt::Min)
            .combine(Combine::Conjunction)
            .build()
            .unwrap();
        assert!(!template.instance_complete());
        assert_eq!(template.uninterpreted(), vec!["f"]);
        let inst = template
            .with_interpretation("f", Arc::new(|a: &[Payload]| Ok(Payload::Bool(!a[0].as_bool().unwrap()))))
            .unwrap();
        assert!(inst.instance_complete());

        let empty = TemplateAlgebra::builder(Alphabet::new(), "beta")
            .domain("beta", Domain::of(PayloadKind::Bool))
            .combine(Combine::Conjunction)
            .build()
            .unwrap();
        assert!(empty.instance_complete());
    }

    #[test]
    fn build_rejects_symbols_without_family() {
        let alphabet = Alphabet::from_symbols([TypedSymbol::new("f", &["beta"], "beta")]).unwrap();
        let r = TemplateAlgebra::builder(alphabet, "beta")
            .domain("beta", Domain::of(PayloadKind::Bool))
            .combine(Combine::Conjunction)
            .build();
        assert!(matches!(r, Err(AlgebraError::MissingFamily(ref s)) if s == "f"));
    }
}
