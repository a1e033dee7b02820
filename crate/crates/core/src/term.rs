//! Typed alphabets, variable contexts and terms.
//!
//! Terms are written in bracket form, `f[t1,...,tk]`, with constants and
//! variables as bare names. A variable is distinguished from a constant by
//! the [`VariableContext`] in force, never by spelling.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;
use std::sync::Arc;

use thiserror::Error;

/// Name of a type (a carrier set of an algebra).
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct TypeName(Arc<str>);

impl TypeName {
    pub fn new(name: &str) -> Self {
        debug_assert!(!name.is_empty(), "type names are nonempty");
        TypeName(Arc::from(name))
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for TypeName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl From<&str> for TypeName {
    fn from(s: &str) -> Self {
        TypeName::new(s)
    }
}

/// An operator symbol with its signature `arg_types -> result_type`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct TypedSymbol {
    pub name: String,
    pub arg_types: Vec<TypeName>,
    pub result_type: TypeName,
}

impl TypedSymbol {
    pub fn new(name: &str, arg_types: &[&str], result_type: &str) -> Self {
        TypedSymbol {
            name: name.to_string(),
            arg_types: arg_types.iter().map(|t| TypeName::new(t)).collect(),
            result_type: TypeName::new(result_type),
        }
    }

    pub fn constant(name: &str, ty: &str) -> Self {
        Self::new(name, &[], ty)
    }

    pub fn arity(&self) -> usize {
        self.arg_types.len()
    }
}

impl fmt::Display for TypedSymbol {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: ", self.name)?;
        for (i, t) in self.arg_types.iter().enumerate() {
            if i > 0 {
                f.write_str(" ")?;
            }
            write!(f, "{t}")?;
        }
        if !self.arg_types.is_empty() {
            f.write_str(" -> ")?;
        }
        write!(f, "{}", self.result_type)
    }
}

/// A finite typed alphabet. Symbol names are unique within one alphabet.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Alphabet {
    symbols: BTreeMap<String, TypedSymbol>,
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum AlphabetError {
    #[error("symbol `{0}` declared twice")]
    DuplicateSymbol(String),
    #[error("variable `{0}` declared twice")]
    DuplicateVariable(String),
}

impl Alphabet {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn from_symbols(symbols: impl IntoIterator<Item = TypedSymbol>) -> Result<Self, AlphabetError> {
        let mut alphabet = Alphabet::new();
        for s in symbols {
            alphabet.insert(s)?;
        }
        Ok(alphabet)
    }

    pub fn insert(&mut self, symbol: TypedSymbol) -> Result<(), AlphabetError> {
        if self.symbols.contains_key(&symbol.name) {
            return Err(AlphabetError::DuplicateSymbol(symbol.name));
        }
        self.symbols.insert(symbol.name.clone(), symbol);
        Ok(())
    }

    pub fn get(&self, name: &str) -> Option<&TypedSymbol> {
        self.symbols.get(name)
    }

    pub fn contains(&self, name: &str) -> bool {
        self.symbols.contains_key(name)
    }

    /// Symbols in name order.
    pub fn iter(&self) -> impl Iterator<Item = &TypedSymbol> {
        self.symbols.values()
    }

    pub fn len(&self) -> usize {
        self.symbols.len()
    }

    pub fn is_empty(&self) -> bool {
        self.symbols.is_empty()
    }

    /// All types mentioned by some signature.
    pub fn types(&self) -> BTreeSet<TypeName> {
        let mut out = BTreeSet::new();
        for s in self.symbols.values() {
            out.extend(s.arg_types.iter().cloned());
            out.insert(s.result_type.clone());
        }
        out
    }

    /// Union of two alphabets; fails on a shared name.
    pub fn union(&self, other: &Alphabet) -> Result<Alphabet, AlphabetError> {
        let mut out = self.clone();
        for s in other.iter() {
            out.insert(s.clone())?;
        }
        Ok(out)
    }
}

/// Ordered, typed variables `x1..xl`.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct VariableContext {
    vars: Vec<(String, TypeName)>,
}

impl VariableContext {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn from_pairs<'a>(pairs: impl IntoIterator<Item = (&'a str, &'a str)>) -> Result<Self, AlphabetError> {
        let mut ctx = VariableContext::new();
        for (n, t) in pairs {
            ctx.push(n, TypeName::new(t))?;
        }
        Ok(ctx)
    }

    pub fn push(&mut self, name: &str, ty: TypeName) -> Result<(), AlphabetError> {
        if self.type_of(name).is_some() {
            return Err(AlphabetError::DuplicateVariable(name.to_string()));
        }
        self.vars.push((name.to_string(), ty));
        Ok(())
    }

    pub fn type_of(&self, name: &str) -> Option<&TypeName> {
        self.vars.iter().find(|(n, _)| n == name).map(|(_, t)| t)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, &TypeName)> {
        self.vars.iter().map(|(n, t)| (n.as_str(), t))
    }

    pub fn len(&self) -> usize {
        self.vars.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vars.is_empty()
    }

    /// The sub-context of variables that occur in `term`, in declaration order.
    pub fn restrict_to(&self, term: &Term) -> VariableContext {
        let used: BTreeSet<&str> = term.variables().into_iter().collect();
        VariableContext {
            vars: self.vars.iter().filter(|(n, _)| used.contains(n.as_str())).cloned().collect(),
        }
    }
}

/// A term over an alphabet, possibly containing variables.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Term {
    Apply { op: String, args: Vec<Term> },
    Var(String),
}

impl Term {
    pub fn apply(op: &str, args: Vec<Term>) -> Term {
        Term::Apply { op: op.to_string(), args }
    }

    pub fn constant(op: &str) -> Term {
        Term::apply(op, Vec::new())
    }

    pub fn var(name: &str) -> Term {
        Term::Var(name.to_string())
    }

    /// Distinct variable names in first-occurrence order.
    pub fn variables(&self) -> Vec<&str> {
        let mut out: Vec<&str> = Vec::new();
        self.visit(&mut |t| {
            if let Term::Var(v) = t {
                if !out.contains(&v.as_str()) {
                    out.push(v);
                }
            }
        });
        out
    }

    pub fn is_ground(&self) -> bool {
        match self {
            Term::Var(_) => false,
            Term::Apply { args, .. } => args.iter().all(Term::is_ground),
        }
    }

    /// Number of nodes.
    pub fn size(&self) -> usize {
        match self {
            Term::Var(_) => 1,
            Term::Apply { args, .. } => 1 + args.iter().map(Term::size).sum::<usize>(),
        }
    }

    pub fn height(&self) -> usize {
        match self {
            Term::Var(_) => 1,
            Term::Apply { args, .. } => 1 + args.iter().map(Term::height).max().unwrap_or(0),
        }
    }

    fn visit<'a>(&'a self, f: &mut impl FnMut(&'a Term)) {
        f(self);
        if let Term::Apply { args, .. } = self {
            for a in args {
                a.visit(f);
            }
        }
    }

    /// Replaces variables by terms; unmapped variables are kept.
    pub fn substitute(&self, map: &HashMap<String, Term>) -> Term {
        match self {
            Term::Var(v) => map.get(v).cloned().unwrap_or_else(|| self.clone()),
            Term::Apply { op, args } => Term::Apply {
                op: op.clone(),
                args: args.iter().map(|a| a.substitute(map)).collect(),
            },
        }
    }
}

impl fmt::Display for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Term::Var(v) => f.write_str(v),
            Term::Apply { op, args } => {
                f.write_str(op)?;
                if !args.is_empty() {
                    f.write_str("[")?;
                    for (i, a) in args.iter().enumerate() {
                        if i > 0 {
                            f.write_str(",")?;
                        }
                        write!(f, "{a}")?;
                    }
                    f.write_str("]")?;
                }
                Ok(())
            }
        }
    }
}

/// Position of a subterm: child indices from the root.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct TermPath(pub Vec<usize>);

impl fmt::Display for TermPath {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_empty() {
            return f.write_str("root");
        }
        for (i, p) in self.0.iter().enumerate() {
            if i > 0 {
                f.write_str(".")?;
            }
            write!(f, "{p}")?;
        }
        Ok(())
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum TypeError {
    #[error("unknown symbol `{name}` at {path}")]
    UnknownSymbol { name: String, path: TermPath },
    #[error("`{symbol}` expects {expected} arguments, found {found} at {path}")]
    ArityMismatch { symbol: String, expected: usize, found: usize, path: TermPath },
    #[error("argument {position} of `{symbol}` must be {expected}, found {found} at {path}")]
    TypeMismatch {
        symbol: String,
        position: usize,
        expected: TypeName,
        found: TypeName,
        path: TermPath,
    },
}

/// Computes the type of `term`, checking every application against the
/// alphabet and every variable against `ctx`.
pub fn typecheck_term(term: &Term, alphabet: &Alphabet, ctx: &VariableContext) -> Result<TypeName, TypeError> {
    let mut path = Vec::new();
    typecheck_at(term, alphabet, ctx, &mut path)
}

fn typecheck_at(
    term: &Term,
    alphabet: &Alphabet,
    ctx: &VariableContext,
    path: &mut Vec<usize>,
) -> Result<TypeName, TypeError> {
    match term {
        Term::Var(v) => ctx.type_of(v).cloned().ok_or_else(|| TypeError::UnknownSymbol {
            name: v.clone(),
            path: TermPath(path.clone()),
        }),
        Term::Apply { op, args } => {
            let sym = alphabet.get(op).ok_or_else(|| TypeError::UnknownSymbol {
                name: op.clone(),
                path: TermPath(path.clone()),
            })?;
            if sym.arity() != args.len() {
                return Err(TypeError::ArityMismatch {
                    symbol: op.clone(),
                    expected: sym.arity(),
                    found: args.len(),
                    path: TermPath(path.clone()),
                });
            }
            for (i, (arg, expected)) in args.iter().zip(&sym.arg_types).enumerate() {
                path.push(i);
                let found = typecheck_at(arg, alphabet, ctx, path)?;
                if &found != expected {
                    return Err(TypeError::TypeMismatch {
                        symbol: op.clone(),
                        position: i,
                        expected: expected.clone(),
                        found,
                        path: TermPath(path.clone()),
                    });
                }
                path.pop();
            }
            Ok(sym.result_type.clone())
        }
    }
}
