use std::collections::hash_map::Entry;
use std::collections::{BTreeMap, HashMap, VecDeque};

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use super::automaton::{show, Dfa, DfaError};
use super::partition::StringPartition;
use super::sample::{prefix_closure, RegularExample, RegularExampleSet};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum InferError {
    #[error("not a right congruence: `{}` ~ `{}` but `{}{symbol}` and `{}{symbol}` are in different classes", show(.left), show(.right), .left, .right)]
    NotRightCongruence { left: String, right: String, symbol: char },
    #[error("carrier does not contain ε")]
    MissingEmptyString,
    #[error("carrier is not prefix-closed: `{0}` lacks a prefix")]
    NotPrefixClosed(String),
    #[error("inferred automaton contradicts example {}: {example}", index + 1)]
    Conflict { index: usize, example: String },
    #[error(transparent)]
    Dfa(#[from] DfaError),
}

/// Union-find over the accept/equiv strings with one union per equiv
/// example.
pub fn equiv_closure(s: &RegularExampleSet) -> StringPartition {
    let mut p = StringPartition::discrete(s.strings_of());
    for ex in s.examples() {
        if let RegularExample::Equiv(u, w) = ex {
            p.union(u, w).expect("equiv strings belong to the carrier");
        }
    }
    p
}

/// Extends `p` to the prefix closure of its carrier and closes it under
/// appending a shared symbol.
pub fn right_completion(p: &StringPartition, alphabet: &[char]) -> StringPartition {
    complete(p, alphabet, None)
}

/// As [`right_completion`], processing symbols and groups in an order
/// shuffled by `seed`. The result does not depend on the order.
pub fn right_completion_shuffled(p: &StringPartition, alphabet: &[char], seed: u64) -> StringPartition {
    complete(p, alphabet, Some(seed))
}

fn complete(p: &StringPartition, alphabet: &[char], seed: Option<u64>) -> StringPartition {
    let pref = prefix_closure(p.carrier());
    let mut out = StringPartition::discrete(pref.iter().cloned());
    for class in p.classes() {
        for w in &class[1..] {
            out.union(&class[0], w).expect("carrier is contained in its prefix closure");
        }
    }
    // succ[s][i] = index of carrier[i]·alphabet[s], when present.
    let succ: Vec<Vec<Option<usize>>> = alphabet
        .iter()
        .map(|c| {
            out.carrier()
                .iter()
                .map(|w| {
                    let mut x = w.clone();
                    x.push(*c);
                    out.index_of(&x)
                })
                .collect()
        })
        .collect();
    let mut rng = seed.map(ChaCha8Rng::seed_from_u64);
    let mut symbols: Vec<usize> = (0..alphabet.len()).collect();
    loop {
        let mut changed = false;
        if let Some(r) = rng.as_mut() {
            symbols.shuffle(r);
        }
        for &s in &symbols {
            let mut groups: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
            for (i, t) in succ[s].iter().enumerate() {
                if let Some(t) = t {
                    groups.entry(out.find_index(i)).or_default().push(*t);
                }
            }
            let mut groups: Vec<Vec<usize>> = groups.into_values().collect();
            if let Some(r) = rng.as_mut() {
                groups.shuffle(r);
                for g in &mut groups {
                    g.shuffle(r);
                }
            }
            for g in groups {
                for w in &g[1..] {
                    changed |= out.union_index(g[0], *w);
                }
            }
        }
        if !changed {
            return out;
        }
    }
}

/// States are the classes of `p`, numbered breadth-first from `[ε]`;
/// `δ(B, ξ) = B'` iff `wξ ∈ B'` for some `w ∈ B`.
pub fn build_dfa(p: &StringPartition, alphabet: &[char], final_strings: &[String]) -> Result<Dfa, InferError> {
    if !p.contains("") {
        return Err(InferError::MissingEmptyString);
    }
    for w in p.carrier() {
        if let Some((i, _)) = w.char_indices().last() {
            if !p.contains(&w[..i]) {
                return Err(InferError::NotPrefixClosed(w.clone()));
            }
        }
        if let Some(c) = w.chars().find(|c| !alphabet.contains(c)) {
            return Err(DfaError::SymbolNotInAlphabet(c).into());
        }
    }
    // Transition table on class representatives, checking well-definedness.
    let mut table: HashMap<(usize, usize), (usize, usize)> = HashMap::new();
    for (i, w) in p.carrier().iter().enumerate() {
        for (s, c) in alphabet.iter().enumerate() {
            let mut x = w.clone();
            x.push(*c);
            if let Some(j) = p.index_of(&x) {
                let (from, to) = (p.find_index(i), p.find_index(j));
                match table.get(&(from, s)) {
                    Some(&(prev_to, witness)) if prev_to != to => {
                        return Err(InferError::NotRightCongruence {
                            left: p.carrier()[witness].clone(),
                            right: w.clone(),
                            symbol: *c,
                        });
                    }
                    Some(_) => {}
                    None => {
                        table.insert((from, s), (to, i));
                    }
                }
            }
        }
    }
    let root_eps = p.find("").expect("checked above");
    let mut number: HashMap<usize, usize> = HashMap::from([(root_eps, 0)]);
    let mut order = vec![root_eps];
    let mut queue = VecDeque::from([root_eps]);
    while let Some(r) = queue.pop_front() {
        for s in 0..alphabet.len() {
            if let Some(&(to, _)) = table.get(&(r, s)) {
                if let Entry::Vacant(e) = number.entry(to) {
                    e.insert(order.len());
                    order.push(to);
                    queue.push_back(to);
                }
            }
        }
    }
    let mut m = Dfa::new(alphabet, order.len(), 0)?;
    for (&(from, s), &(to, _)) in &table {
        if let (Some(&a), Some(&b)) = (number.get(&from), number.get(&to)) {
            m.set_transition(a, alphabet[s], b)?;
        }
    }
    for w in final_strings {
        if let Some(&q) = p.find(w).and_then(|r| number.get(&r)) {
            m.set_final(q, true)?;
        }
    }
    Ok(m)
}

/// Infers an automaton from the examples alone: right completion of the
/// equiv closure over the prefix closure of the accept/equiv strings, with
/// the accept strings as finals. Fails when the result contradicts a
/// negative example.
pub fn infer(s: &RegularExampleSet) -> Result<Dfa, InferError> {
    let closure = equiv_closure(s);
    let rc = right_completion(&closure, s.alphabet());
    let m = build_dfa(&rc, s.alphabet(), &s.accepted_strings())?;
    for (index, ex) in s.examples().iter().enumerate() {
        let contradicted = match ex {
            RegularExample::NotAccept(w) => m.accepts(w)?,
            RegularExample::NotEquiv(o) => {
                let mut states = Vec::new();
                for w in o {
                    if let Some(q) = m.run(w)? {
                        states.push(q);
                    }
                }
                let n = states.len();
                states.sort_unstable();
                states.dedup();
                states.len() < n
            }
            _ => false,
        };
        if contradicted {
            return Err(InferError::Conflict { index, example: ex.to_string() });
        }
    }
    Ok(m)
}
