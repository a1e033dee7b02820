//! Regular tree grammars and term generation.

use std::collections::{BTreeMap, BTreeSet};

use rand::seq::IndexedRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::term::{typecheck_term, Alphabet, AlphabetError, Term, TypeError, TypedSymbol, VariableContext};

/// Upper bound on the number of distinct terms kept per nonterminal during
/// exhaustive generation.
pub const DEFAULT_TERM_CAP: usize = 2_000_000;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GrammarError {
    #[error("nonterminal `{0}` must be a constant")]
    NonterminalWithArgs(String),
    #[error("`{0}` is both a terminal and a nonterminal")]
    NameClash(String),
    #[error("start symbol `{0}` is not a nonterminal")]
    StartNotNonterminal(String),
    #[error("rule {index}: left-hand side `{lhs}` is not a nonterminal")]
    UnknownLhs { index: usize, lhs: String },
    #[error("rule {index}: {source}")]
    RuleType {
        index: usize,
        #[source]
        source: TypeError,
    },
    #[error("rule {index}: right-hand side has type {found}, left-hand side has type {expected}")]
    RuleResultType { index: usize, expected: String, found: String },
    #[error("rule {index}: right-hand side contains variables")]
    RuleHasVariables { index: usize },
    #[error(transparent)]
    Alphabet(#[from] AlphabetError),
    #[error("no terminal term is derivable within the bound")]
    NoTerminalDerivation,
    #[error("more than {cap} terms")]
    TooManyTerms { cap: usize },
    #[error("bound must be at least 1")]
    InvalidBound,
}

/// A grammar `(Σ, N, R, S)` with nonterminals as constants and right-hand
/// sides over `Σ ∪ N`.
#[derive(Clone, Debug, PartialEq)]
pub struct RegularTreeGrammar {
    terminals: Alphabet,
    nonterminals: Alphabet,
    rules: Vec<(String, Term)>,
    start: String,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum GenerationMode {
    /// Every terminal term with a derivation tree of height at most `depth`.
    Exhaustive { depth: usize },
    /// `count` sampled derivations; past `cutoff` layers only rules of least
    /// termination height are chosen.
    Random { count: usize, seed: u64, cutoff: usize },
}

impl RegularTreeGrammar {
    pub fn new(
        terminals: Alphabet,
        nonterminals: Alphabet,
        rules: Vec<(String, Term)>,
        start: &str,
    ) -> Result<Self, GrammarError> {
        for nt in nonterminals.iter() {
            if nt.arity() != 0 {
                return Err(GrammarError::NonterminalWithArgs(nt.name.clone()));
            }
            if terminals.contains(&nt.name) {
                return Err(GrammarError::NameClash(nt.name.clone()));
            }
        }
        if !nonterminals.contains(start) {
            return Err(GrammarError::StartNotNonterminal(start.to_string()));
        }
        let all = terminals.union(&nonterminals)?;
        let empty = VariableContext::new();
        for (index, (lhs, rhs)) in rules.iter().enumerate() {
            let lhs_sym = nonterminals
                .get(lhs)
                .ok_or_else(|| GrammarError::UnknownLhs { index, lhs: lhs.clone() })?;
            if !rhs.is_ground() {
                return Err(GrammarError::RuleHasVariables { index });
            }
            let ty = typecheck_term(rhs, &all, &empty).map_err(|source| GrammarError::RuleType { index, source })?;
            if ty != lhs_sym.result_type {
                return Err(GrammarError::RuleResultType {
                    index,
                    expected: lhs_sym.result_type.to_string(),
                    found: ty.to_string(),
                });
            }
        }
        Ok(RegularTreeGrammar { terminals, nonterminals, rules, start: start.to_string() })
    }

    /// Convenience constructor: nonterminals given as `(name, type)`.
    pub fn from_parts(
        terminals: Alphabet,
        nonterminals: &[(&str, &str)],
        rules: Vec<(&str, Term)>,
        start: &str,
    ) -> Result<Self, GrammarError> {
        let nts = Alphabet::from_symbols(nonterminals.iter().map(|(n, t)| TypedSymbol::constant(n, t)))?;
        let rules = rules.into_iter().map(|(l, r)| (l.to_string(), r)).collect();
        Self::new(terminals, nts, rules, start)
    }

    pub fn terminals(&self) -> &Alphabet {
        &self.terminals
    }

    pub fn nonterminals(&self) -> &Alphabet {
        &self.nonterminals
    }

    pub fn rules(&self) -> &[(String, Term)] {
        &self.rules
    }

    pub fn start(&self) -> &str {
        &self.start
    }

    pub fn rules_for<'a>(&'a self, nt: &'a str) -> impl Iterator<Item = &'a Term> + 'a {
        self.rules.iter().filter(move |(l, _)| l == nt).map(|(_, r)| r)
    }

    pub fn is_nonterminal(&self, name: &str) -> bool {
        self.nonterminals.contains(name)
    }

    /// Least derivation height of a terminal term for each nonterminal;
    /// absent when none exists.
    pub fn min_heights(&self) -> BTreeMap<String, usize> {
        let mut h: BTreeMap<String, usize> = BTreeMap::new();
        loop {
            let mut changed = false;
            for (lhs, rhs) in &self.rules {
                if let Some(rh) = self.rule_height(rhs, &h) {
                    if h.get(lhs).is_none_or(|old| rh < *old) {
                        h.insert(lhs.clone(), rh);
                        changed = true;
                    }
                }
            }
            if !changed {
                return h;
            }
        }
    }

    fn rule_height(&self, rhs: &Term, h: &BTreeMap<String, usize>) -> Option<usize> {
        let mut worst = 0usize;
        let mut ok = true;
        self.visit_nonterminals(rhs, &mut |nt| match h.get(nt) {
            Some(v) => worst = worst.max(*v),
            None => ok = false,
        });
        ok.then_some(worst + 1)
    }

    fn visit_nonterminals(&self, t: &Term, f: &mut impl FnMut(&str)) {
        if let Term::Apply { op, args } = t {
            if args.is_empty() && self.is_nonterminal(op) {
                f(op);
            }
            for a in args {
                self.visit_nonterminals(a, f);
            }
        }
    }
}

/// Generates terminal terms from the start symbol.
pub fn rtg_generate(g: &RegularTreeGrammar, mode: GenerationMode) -> Result<Vec<Term>, GrammarError> {
    match mode {
        GenerationMode::Exhaustive { depth } => exhaustive(g, depth, DEFAULT_TERM_CAP),
        GenerationMode::Random { count, seed, cutoff } => random(g, count, seed, cutoff),
    }
}

/// Exhaustive generation with an explicit cap on intermediate set sizes.
pub fn rtg_generate_capped(g: &RegularTreeGrammar, depth: usize, cap: usize) -> Result<Vec<Term>, GrammarError> {
    exhaustive(g, depth, cap)
}

fn exhaustive(g: &RegularTreeGrammar, depth: usize, cap: usize) -> Result<Vec<Term>, GrammarError> {
    if depth == 0 {
        return Err(GrammarError::InvalidBound);
    }
    let names: Vec<String> = g.nonterminals.iter().map(|s| s.name.clone()).collect();
    let mut level: BTreeMap<String, BTreeSet<Term>> = names.iter().map(|n| (n.clone(), BTreeSet::new())).collect();
    for _ in 0..depth {
        let mut next: BTreeMap<String, BTreeSet<Term>> = BTreeMap::new();
        for n in &names {
            let mut out = BTreeSet::new();
            for rhs in g.rules_for(n) {
                for t in expand(g, rhs, &level, cap)? {
                    out.insert(t);
                    if out.len() > cap {
                        return Err(GrammarError::TooManyTerms { cap });
                    }
                }
            }
            next.insert(n.clone(), out);
        }
        level = next;
    }
    let result: Vec<Term> = level.remove(&g.start).unwrap_or_default().into_iter().collect();
    if result.is_empty() {
        return Err(GrammarError::NoTerminalDerivation);
    }
    Ok(result)
}

fn expand(
    g: &RegularTreeGrammar,
    rhs: &Term,
    level: &BTreeMap<String, BTreeSet<Term>>,
    cap: usize,
) -> Result<Vec<Term>, GrammarError> {
    match rhs {
        Term::Var(_) => Ok(vec![rhs.clone()]),
        Term::Apply { op, args } if args.is_empty() && g.is_nonterminal(op) => {
            Ok(level.get(op).map(|s| s.iter().cloned().collect()).unwrap_or_default())
        }
        Term::Apply { op, args } => {
            let mut acc: Vec<Vec<Term>> = vec![Vec::new()];
            for a in args {
                let options = expand(g, a, level, cap)?;
                if options.is_empty() {
                    return Ok(Vec::new());
                }
                if acc.len().saturating_mul(options.len()) > cap {
                    return Err(GrammarError::TooManyTerms { cap });
                }
                let mut next = Vec::with_capacity(acc.len() * options.len());
                for prefix in &acc {
                    for o in &options {
                        let mut p = prefix.clone();
                        p.push(o.clone());
                        next.push(p);
                    }
                }
                acc = next;
            }
            Ok(acc.into_iter().map(|children| Term::apply(op, children)).collect())
        }
    }
}

fn random(g: &RegularTreeGrammar, count: usize, seed: u64, cutoff: usize) -> Result<Vec<Term>, GrammarError> {
    if count == 0 {
        return Err(GrammarError::InvalidBound);
    }
    let heights = g.min_heights();
    if !heights.contains_key(&g.start) {
        return Err(GrammarError::NoTerminalDerivation);
    }
    let mut terminating: BTreeMap<&str, Vec<&Term>> = BTreeMap::new();
    for (lhs, rhs) in &g.rules {
        if g.rule_height(rhs, &heights) == heights.get(lhs).copied() {
            terminating.entry(lhs.as_str()).or_default().push(rhs);
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let start = Term::constant(&g.start);
    Ok((0..count).map(|_| derive(g, &start, 0, cutoff, &heights, &terminating, &mut rng)).collect())
}

fn derive(
    g: &RegularTreeGrammar,
    t: &Term,
    layer: usize,
    cutoff: usize,
    heights: &BTreeMap<String, usize>,
    terminating: &BTreeMap<&str, Vec<&Term>>,
    rng: &mut ChaCha8Rng,
) -> Term {
    match t {
        Term::Apply { op, args } if args.is_empty() && g.is_nonterminal(op) => {
            let rhs: &Term = if layer < cutoff {
                let viable: Vec<&Term> =
                    g.rules_for(op).filter(|r| g.rule_height(r, heights).is_some()).collect();
                viable.choose(rng).copied().expect("nonterminal with a terminating rule")
            } else {
                terminating[op.as_str()].choose(rng).copied().expect("nonterminal with a terminating rule")
            };
            derive(g, rhs, layer + 1, cutoff, heights, terminating, rng)
        }
        Term::Apply { op, args } => Term::apply(
            op,
            args.iter().map(|a| derive(g, a, layer, cutoff, heights, terminating, rng)).collect(),
        ),
        Term::Var(_) => t.clone(),
    }
}
