use std::collections::BTreeSet;
use std::fmt;

use thiserror::Error;

use super::automaton::{show, shortlex_cmp, DfaError};
use crate::algebra::{Example, ObjectId, Payload, Value};
use crate::term::{Alphabet, Term, TypeName, TypedSymbol, VariableContext};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum SampleError {
    #[error("equiv needs two distinct strings, got `{0}` twice")]
    EquivSameString(String),
    #[error("negated equiv needs at least two distinct strings")]
    NotEquivTooSmall,
    #[error(transparent)]
    Dfa(#[from] DfaError),
}

/// One of the four example shapes over strings.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum RegularExample {
    /// `(accept[x], {w})`
    Accept(String),
    /// `(not[accept[x]], {w})`
    NotAccept(String),
    /// `(equiv[x,y], {u, w})`, stored with `u` before `w`.
    Equiv(String, String),
    /// `(not[equiv[x,y]], O)`, `O` sorted and duplicate-free.
    NotEquiv(Vec<String>),
}

impl RegularExample {
    pub fn accept(w: &str) -> Self {
        RegularExample::Accept(w.to_string())
    }

    pub fn not_accept(w: &str) -> Self {
        RegularExample::NotAccept(w.to_string())
    }

    pub fn equiv(u: &str, w: &str) -> Result<Self, SampleError> {
        if u == w {
            return Err(SampleError::EquivSameString(u.to_string()));
        }
        let (a, b) = if shortlex_key(u) <= shortlex_key(w) { (u, w) } else { (w, u) };
        Ok(RegularExample::Equiv(a.to_string(), b.to_string()))
    }

    pub fn not_equiv<S: AsRef<str>>(strings: &[S]) -> Result<Self, SampleError> {
        let mut v: Vec<String> = strings.iter().map(|s| s.as_ref().to_string()).collect();
        v.sort_by(|a, b| shortlex_key(a).cmp(&shortlex_key(b)));
        v.dedup();
        if v.len() < 2 {
            return Err(SampleError::NotEquivTooSmall);
        }
        Ok(RegularExample::NotEquiv(v))
    }

    /// The object strings of the example.
    pub fn strings(&self) -> Vec<&str> {
        match self {
            RegularExample::Accept(w) | RegularExample::NotAccept(w) => vec![w],
            RegularExample::Equiv(u, w) => vec![u, w],
            RegularExample::NotEquiv(o) => o.iter().map(String::as_str).collect(),
        }
    }

    pub fn term(&self) -> Term {
        let x = Term::var("x");
        let y = Term::var("y");
        match self {
            RegularExample::Accept(_) => Term::apply("accept", vec![x]),
            RegularExample::NotAccept(_) => Term::apply("not", vec![Term::apply("accept", vec![x])]),
            RegularExample::Equiv(..) => Term::apply("equiv", vec![x, y]),
            RegularExample::NotEquiv(_) => Term::apply("not", vec![Term::apply("equiv", vec![x, y])]),
        }
    }

    /// The generic form: term, variable context and string objects.
    pub fn to_example(&self) -> Example {
        let alpha = TypeName::new("alpha");
        let term = self.term();
        let mut vars = VariableContext::new();
        for v in term.variables() {
            vars.push(v, alpha.clone()).expect("distinct variables");
        }
        let objects = self
            .strings()
            .into_iter()
            .enumerate()
            .map(|(i, s)| (ObjectId(i), Value::new(&alpha, Payload::Str(s.to_string()))))
            .collect();
        Example { term, vars, objects }
    }
}

fn shortlex_key(s: &str) -> (usize, &str) {
    (s.chars().count(), s)
}

impl fmt::Display for RegularExample {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let objs: Vec<String> = self.strings().into_iter().map(show).collect();
        write!(f, "({}, {{{}}})", self.term(), objs.join(", "))
    }
}

/// The alphabet `{accept: α → β, equiv: α α → β, not: β → β}`.
pub fn regular_signature() -> Alphabet {
    Alphabet::from_symbols([
        TypedSymbol::new("accept", &["alpha"], "beta"),
        TypedSymbol::new("equiv", &["alpha", "alpha"], "beta"),
        TypedSymbol::new("not", &["beta"], "beta"),
    ])
    .expect("distinct names")
}

/// A finite set of examples over a declared symbol alphabet.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RegularExampleSet {
    alphabet: Vec<char>,
    examples: Vec<RegularExample>,
}

impl RegularExampleSet {
    pub fn new(alphabet: &[char], examples: Vec<RegularExample>) -> Result<Self, SampleError> {
        if alphabet.is_empty() {
            return Err(DfaError::EmptyAlphabet.into());
        }
        for (i, c) in alphabet.iter().enumerate() {
            if alphabet[..i].contains(c) {
                return Err(DfaError::DuplicateSymbol(*c).into());
            }
        }
        for ex in &examples {
            for s in ex.strings() {
                if let Some(c) = s.chars().find(|c| !alphabet.contains(c)) {
                    return Err(DfaError::SymbolNotInAlphabet(c).into());
                }
            }
        }
        Ok(RegularExampleSet { alphabet: alphabet.to_vec(), examples })
    }

    pub fn alphabet(&self) -> &[char] {
        &self.alphabet
    }

    pub fn examples(&self) -> &[RegularExample] {
        &self.examples
    }

    pub fn len(&self) -> usize {
        self.examples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.examples.is_empty()
    }

    /// A copy without the example at `index`.
    pub fn without(&self, index: usize) -> RegularExampleSet {
        let mut examples = self.examples.clone();
        examples.remove(index);
        RegularExampleSet { alphabet: self.alphabet.clone(), examples }
    }

    /// Strings of the accept and equiv examples, in shortlex order.
    pub fn strings_of(&self) -> Vec<String> {
        let mut set = BTreeSet::new();
        for ex in &self.examples {
            match ex {
                RegularExample::Accept(w) => {
                    set.insert(w.clone());
                }
                RegularExample::Equiv(u, w) => {
                    set.insert(u.clone());
                    set.insert(w.clone());
                }
                _ => {}
            }
        }
        self.sorted(set)
    }

    /// Strings of the accept examples.
    pub fn accepted_strings(&self) -> Vec<String> {
        let set: BTreeSet<String> = self
            .examples
            .iter()
            .filter_map(|e| match e {
                RegularExample::Accept(w) => Some(w.clone()),
                _ => None,
            })
            .collect();
        self.sorted(set)
    }

    /// Every string occurring in any example.
    pub fn all_strings(&self) -> Vec<String> {
        let set: BTreeSet<String> =
            self.examples.iter().flat_map(|e| e.strings().into_iter().map(str::to_string)).collect();
        self.sorted(set)
    }

    fn sorted(&self, set: BTreeSet<String>) -> Vec<String> {
        let mut v: Vec<String> = set.into_iter().collect();
        v.sort_by(|a, b| shortlex_cmp(a, b, &self.alphabet).expect("validated strings"));
        v
    }

    pub fn to_examples(&self) -> Vec<Example> {
        self.examples.iter().map(RegularExample::to_example).collect()
    }
}

/// Prefix closure of `strings`, including ε.
pub fn prefix_closure<S: AsRef<str>>(strings: &[S]) -> BTreeSet<String> {
    let mut out = BTreeSet::from([String::new()]);
    for s in strings {
        let s = s.as_ref();
        for (i, _) in s.char_indices() {
            out.insert(s[..i].to_string());
        }
        out.insert(s.to_string());
    }
    out
}
