use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::sync::Arc;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::automaton::{lex_cmp, show, Dfa};
use super::sample::{prefix_closure, regular_signature, RegularExample, RegularExampleSet};
use crate::algebra::{
    for_each_grounding, CandidateFamily, Combine, Domain, GroundingAssignment, Opt, Payload, PayloadKind,
    TemplateAlgebra,
};

fn string_domain(alphabet: Vec<char>) -> Domain {
    Domain::with_membership(PayloadKind::Str, move |p| p.as_str().is_some_and(|s| s.chars().all(|c| alphabet.contains(&c))))
}

/// The template with `accept` and `equiv` left open.
pub fn regular_template(alphabet: &[char]) -> TemplateAlgebra {
    TemplateAlgebra::builder(regular_signature(), "beta")
        .domain("alpha", string_domain(alphabet.to_vec()))
        .domain("beta", Domain::of(PayloadKind::Bool))
        .interpret("not", not_op)
        .family("accept", CandidateFamily::Described("characteristic function of a regular language".into()))
        .family("equiv", CandidateFamily::Described("Nerode congruence of the same language".into()))
        .opt(Opt::Min)
        .combine(Combine::Conjunction)
        .build()
        .expect("well-formed template")
}

fn not_op(a: &[Payload]) -> Result<Payload, String> {
    a[0].as_bool().map(|b| Payload::Bool(!b)).ok_or_else(|| "expected a boolean".to_string())
}

/// The instance for `L(m)`: `accept` is membership, `equiv` is the Nerode
/// congruence (all dead strings form one class).
pub fn admissible_instance(m: &Dfa) -> TemplateAlgebra {
    let canon = Arc::new(m.canonical());
    let c1 = Arc::clone(&canon);
    let c2 = Arc::clone(&canon);
    let accept = Arc::new(move |a: &[Payload]| {
        let w = a[0].as_str().ok_or("expected a string")?;
        c1.accepts(w).map(Payload::Bool).map_err(|e| e.to_string())
    });
    let equiv = Arc::new(move |a: &[Payload]| {
        let u = a[0].as_str().ok_or("expected a string")?;
        let w = a[1].as_str().ok_or("expected a string")?;
        let qu = c2.run(u).map_err(|e| e.to_string())?;
        let qw = c2.run(w).map_err(|e| e.to_string())?;
        Ok(Payload::Bool(qu == qw))
    });
    regular_template(m.alphabet())
        .with_interpretation("accept", accept)
        .and_then(|t| t.with_interpretation("equiv", equiv))
        .expect("symbols belong to the signature")
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Condition {
    Faithful,
    AcceptingCovered,
    ConvergenceCovered,
    SmallerWitnessed,
    Distinguished,
}

impl Condition {
    pub const ALL: [Condition; 5] = [
        Condition::Faithful,
        Condition::AcceptingCovered,
        Condition::ConvergenceCovered,
        Condition::SmallerWitnessed,
        Condition::Distinguished,
    ];
}

impl fmt::Display for Condition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Condition::Faithful => "1",
            Condition::AcceptingCovered => "2a",
            Condition::ConvergenceCovered => "2b",
            Condition::SmallerWitnessed => "3",
            Condition::Distinguished => "4",
        })
    }
}

/// A violated clause with its witnesses. Classes are named by their access
/// strings, e.g. `[ε]`; example indices are 1-based.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Failure {
    DeadString { example: usize, string: String },
    NoTrueGrounding { example: usize },
    MissingAccept { class: String },
    UncoveredPredecessor { class: String, pred: String, symbol: char },
    PrefixOutsideStrings { class: String, pred: String, symbol: char, string: String },
    MissingEquiv { string: String, class: String },
    Indistinguished { left: String, right: String },
}

impl fmt::Display for Failure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Failure::DeadString { example, string } => {
                write!(f, "example {example}: string \"{}\" is dead", show(string))
            }
            Failure::NoTrueGrounding { example } => write!(f, "example {example}: no grounding evaluates to true"),
            Failure::MissingAccept { class } => write!(f, "class {class} is accepting but has no accept example"),
            Failure::UncoveredPredecessor { class, pred, symbol } => {
                write!(f, "convergence {class}: no string of {pred}{symbol} occurs in the examples")
            }
            Failure::PrefixOutsideStrings { class, pred, symbol, string } => write!(
                f,
                "convergence {class}: prefix \"{}\" of {pred}{symbol} occurs only as a prefix",
                show(string)
            ),
            Failure::MissingEquiv { string, class } => write!(
                f,
                "string \"{}\" in {class} has no equiv example with a lexicographically smaller string",
                show(string)
            ),
            Failure::Indistinguished { left, right } => {
                write!(f, "no negated equiv example separates {left} and {right}")
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SufficiencyReport {
    pub verdicts: BTreeMap<Condition, Vec<Failure>>,
}

impl SufficiencyReport {
    pub fn passed(&self) -> bool {
        self.verdicts.values().all(Vec::is_empty)
    }

    pub fn condition_passed(&self, c: Condition) -> bool {
        self.verdicts.get(&c).is_none_or(Vec::is_empty)
    }

    pub fn failures(&self, c: Condition) -> &[Failure] {
        self.verdicts.get(&c).map(Vec::as_slice).unwrap_or(&[])
    }
}

impl fmt::Display for SufficiencyReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for c in Condition::ALL {
            let fails = self.failures(c);
            writeln!(f, "condition {c}: {}", if fails.is_empty() { "pass" } else { "fail" })?;
            for x in fails {
                writeln!(f, "  {x}")?;
            }
        }
        writeln!(f, "sufficient: {}", if self.passed() { "yes" } else { "no" })
    }
}

/// Evaluates the four sufficiency conditions of `s` against the canonical
/// automaton of `reference`.
pub fn check_sufficient(s: &RegularExampleSet, reference: &Dfa) -> SufficiencyReport {
    let c = reference.canonical();
    let alphabet = c.alphabet().to_vec();
    let acc = c.access_strings();
    let name = |q: usize| format!("[{}]", show(acc[q].as_deref().unwrap_or("")));
    let co = c.coreachable();
    // Live class of a string, `None` when dead.
    let class_of = |w: &str| -> Option<usize> { c.run(w).ok().flatten().filter(|&q| co[q] || w.is_empty()) };
    let mut verdicts: BTreeMap<Condition, Vec<Failure>> = Condition::ALL.iter().map(|c| (*c, Vec::new())).collect();

    // 1: live strings and a true grounding per example.
    let instance = admissible_instance(reference);
    for (i, ex) in s.examples().iter().enumerate() {
        let example = i + 1;
        for w in ex.strings() {
            if !reference.is_live(w).unwrap_or(false) {
                verdicts.get_mut(&Condition::Faithful).unwrap().push(Failure::DeadString {
                    example,
                    string: w.to_string(),
                });
            }
        }
        let generic = ex.to_example();
        let mut any_true = false;
        let _ = for_each_grounding(&generic.vars, &generic.objects, instance.grounding_cap(), |pairs| {
            if any_true {
                return;
            }
            let g = GroundingAssignment::from_pairs(pairs.iter().map(|(n, o)| (n.as_str(), *o)));
            if let Ok(v) = instance.eval_open(&generic.term, &generic.vars, &g, &generic.objects) {
                any_true |= v.payload == Payload::Bool(true);
            }
        });
        if !any_true {
            verdicts.get_mut(&Condition::Faithful).unwrap().push(Failure::NoTrueGrounding { example });
        }
    }

    let strings = s.strings_of();
    let string_set: BTreeSet<&str> = strings.iter().map(String::as_str).collect();
    let prefixes = prefix_closure(&strings);

    // 2a: each accepting class has an accept example.
    for q in c.finals() {
        let covered = s.examples().iter().any(|e| matches!(e, RegularExample::Accept(w) if class_of(w) == Some(q)));
        if !covered {
            verdicts.get_mut(&Condition::AcceptingCovered).unwrap().push(Failure::MissingAccept { class: name(q) });
        }
    }

    // 2b: convergence entries are witnessed, and only by full strings.
    let pred = c.pred_map();
    for b in 0..c.num_states() {
        if !c.is_convergence(b) {
            continue;
        }
        for &(d, xi) in &pred[b] {
            let in_dxi = |w: &str| -> bool {
                match w.char_indices().last() {
                    Some((i, last)) if last == xi => class_of(&w[..i]) == Some(d),
                    _ => false,
                }
            };
            let mut hit = false;
            for w in &prefixes {
                if !in_dxi(w) {
                    continue;
                }
                if string_set.contains(w.as_str()) {
                    hit = true;
                } else {
                    verdicts.get_mut(&Condition::ConvergenceCovered).unwrap().push(Failure::PrefixOutsideStrings {
                        class: name(b),
                        pred: name(d),
                        symbol: xi,
                        string: w.clone(),
                    });
                }
            }
            if !hit {
                verdicts.get_mut(&Condition::ConvergenceCovered).unwrap().push(Failure::UncoveredPredecessor {
                    class: name(b),
                    pred: name(d),
                    symbol: xi,
                });
            }
        }
    }

    // 3: non-minimal strings have an equiv example with a smaller one.
    let mut by_class: BTreeMap<Option<usize>, Vec<&str>> = BTreeMap::new();
    for w in &strings {
        by_class.entry(class_of(w)).or_default().push(w);
    }
    let equivs: BTreeSet<(&str, &str)> = s
        .examples()
        .iter()
        .filter_map(|e| match e {
            RegularExample::Equiv(u, w) => Some((u.as_str(), w.as_str())),
            _ => None,
        })
        .collect();
    for (cls, members) in &by_class {
        let min = members
            .iter()
            .min_by(|a, b| lex_cmp(a, b, &alphabet).expect("validated"))
            .copied()
            .expect("nonempty class");
        for &w in members {
            if w == min {
                continue;
            }
            let witnessed = members.iter().any(|&u| {
                lex_cmp(u, w, &alphabet).is_ok_and(|o| o.is_lt()) && (equivs.contains(&(u, w)) || equivs.contains(&(w, u)))
            });
            if !witnessed {
                let class = cls.map(name).unwrap_or_else(|| "[dead]".to_string());
                verdicts
                    .get_mut(&Condition::SmallerWitnessed)
                    .unwrap()
                    .push(Failure::MissingEquiv { string: w.to_string(), class });
            }
        }
    }

    // 4: each pair of distinct live classes is separated.
    let neg: Vec<Vec<Option<usize>>> = s
        .examples()
        .iter()
        .filter_map(|e| match e {
            RegularExample::NotEquiv(o) => Some(o.iter().map(|w| class_of(w)).collect()),
            _ => None,
        })
        .collect();
    for b in 0..c.num_states() {
        for b2 in b + 1..c.num_states() {
            let separated = neg.iter().any(|cls| {
                cls.iter().filter(|x| **x == Some(b)).count() == 1 && cls.iter().filter(|x| **x == Some(b2)).count() == 1
            });
            if !separated {
                verdicts
                    .get_mut(&Condition::Distinguished)
                    .unwrap()
                    .push(Failure::Indistinguished { left: name(b), right: name(b2) });
            }
        }
    }
    SufficiencyReport { verdicts }
}

/// A sufficient example set for `L(target)`. Record order is shuffled by
/// `seed`.
pub fn generate_sufficient(target: &Dfa, seed: u64) -> RegularExampleSet {
    let c = target.canonical();
    let alphabet = c.alphabet().to_vec();
    let acc: Vec<String> = c.access_strings().into_iter().map(Option::unwrap_or_default).collect();
    let pred = c.pred_map();
    let mut examples = Vec::new();
    let mut members: Vec<BTreeSet<String>> = vec![BTreeSet::new(); c.num_states()];
    let live_language = c.finals().next().is_some();
    for q in c.finals() {
        examples.push(RegularExample::Accept(acc[q].clone()));
        members[q].insert(acc[q].clone());
    }
    if live_language {
        for b in 0..c.num_states() {
            if !c.is_convergence(b) {
                continue;
            }
            if b == c.initial() {
                members[b].insert(String::new());
            }
            for &(d, xi) in &pred[b] {
                let mut w = acc[d].clone();
                w.push(xi);
                members[b].insert(w);
            }
        }
    }
    for set in &members {
        let mut v: Vec<&String> = set.iter().collect();
        v.sort_by(|a, b| lex_cmp(a, b, &alphabet).expect("access strings use the alphabet"));
        if let Some((min, rest)) = v.split_first() {
            for w in rest {
                examples.push(RegularExample::equiv(min, w).expect("distinct strings"));
            }
        }
    }
    for b in 0..c.num_states() {
        for b2 in b + 1..c.num_states() {
            examples.push(RegularExample::not_equiv(&[&acc[b], &acc[b2]]).expect("distinct access strings"));
        }
    }
    examples.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
    RegularExampleSet::new(&alphabet, examples).expect("strings over the target alphabet")
}
