#![allow(dead_code)]

use std::collections::{BTreeMap, BTreeSet, VecDeque};
use std::path::PathBuf;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use templar_core::algebra::ObjectId;
use templar_core::dfa::Dfa;
use templar_core::grammar::RegularTreeGrammar;
use templar_core::scene::{PredicateSet, SceneExample};
use templar_core::Term;

pub fn data(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/data").join(name)
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn abstar() -> Dfa {
    let mut m = Dfa::new(&['a', 'b'], 2, 0).unwrap();
    m.set_transition(0, 'a', 1).unwrap();
    m.set_transition(1, 'b', 0).unwrap();
    m.set_final(0, true).unwrap();
    m
}

/// `(a⁺b)*`: `(ab)*` plus a loop on `a` at the middle state.
pub fn aplusb_star() -> Dfa {
    let mut m = abstar();
    m.set_transition(1, 'a', 1).unwrap();
    m
}

/// Partial automaton with 2–6 states over 2–3 symbols whose language is
/// nonempty.
pub fn random_dfa(r: &mut ChaCha8Rng) -> Dfa {
    loop {
        let n = r.random_range(2..=6);
        let k = r.random_range(2..=3);
        let alphabet: Vec<char> = "abc".chars().take(k).collect();
        let mut m = Dfa::new(&alphabet, n, 0).unwrap();
        for q in 0..n {
            for &c in &alphabet {
                if r.random_bool(0.8) {
                    m.set_transition(q, c, r.random_range(0..n)).unwrap();
                }
            }
            if r.random_bool(0.4) {
                m.set_final(q, true).unwrap();
            }
        }
        if !enumerate_strings(&alphabet, n).iter().any(|w| m.accepts(w).unwrap()) {
            continue;
        }
        return m;
    }
}

/// All strings of length at most `max_len`, shortest first.
pub fn enumerate_strings(alphabet: &[char], max_len: usize) -> Vec<String> {
    let mut out = vec![String::new()];
    let mut layer = vec![String::new()];
    for _ in 0..max_len {
        let mut next = Vec::new();
        for w in &layer {
            for c in alphabet {
                next.push(format!("{w}{c}"));
            }
        }
        out.extend(next.iter().cloned());
        layer = next;
    }
    out
}

fn run(m: &Dfa, w: &str) -> Option<usize> {
    let mut q = m.initial();
    for c in w.chars() {
        q = m.step(q, c).ok()??;
    }
    Some(q)
}

fn accepting(m: &Dfa, q: Option<usize>) -> bool {
    q.is_some_and(|q| m.is_final(q))
}

/// Nerode equivalence of `u` and `v` under `L(m)`, decided by a search of
/// the pair graph for a suffix on which the two disagree. The sink stands
/// for undefined transitions.
pub fn nerode_equivalent(m: &Dfa, u: &str, v: &str) -> bool {
    let start = (run(m, u), run(m, v));
    let mut seen = BTreeSet::from([start]);
    let mut queue = VecDeque::from([start]);
    while let Some((p, q)) = queue.pop_front() {
        if accepting(m, p) != accepting(m, q) {
            return false;
        }
        for &c in m.alphabet() {
            let step = |s: Option<usize>| s.and_then(|s| m.step(s, c).unwrap());
            let next = (step(p), step(q));
            if seen.insert(next) {
                queue.push_back(next);
            }
        }
    }
    true
}

/// Bijection between the reachable parts found by walking both automata
/// from their initial states; `None` when it breaks.
fn walk(a: &Dfa, b: &Dfa, bijective: bool) -> Option<BTreeMap<usize, usize>> {
    let mut map = BTreeMap::from([(a.initial(), b.initial())]);
    let mut image = BTreeSet::from([b.initial()]);
    let mut queue = VecDeque::from([(a.initial(), b.initial())]);
    while let Some((p, q)) = queue.pop_front() {
        if bijective && a.is_final(p) != b.is_final(q) || !bijective && a.is_final(p) && !b.is_final(q) {
            return None;
        }
        for &c in a.alphabet() {
            let pa = a.step(p, c).unwrap();
            let qb = b.step(q, c).unwrap_or(None);
            match (pa, qb) {
                (None, None) => {}
                (None, Some(_)) if !bijective => {}
                (Some(x), Some(y)) => match map.get(&x) {
                    Some(&z) if z == y => {}
                    Some(_) => return None,
                    None => {
                        if !image.insert(y) {
                            return None;
                        }
                        map.insert(x, y);
                        queue.push_back((x, y));
                    }
                },
                _ => return None,
            }
        }
    }
    Some(map)
}

/// Isomorphism of automata whose states are all reachable.
pub fn isomorphic(a: &Dfa, b: &Dfa) -> bool {
    let mut sa = a.alphabet().to_vec();
    let mut sb = b.alphabet().to_vec();
    sa.sort_unstable();
    sb.sort_unstable();
    sa == sb
        && a.num_states() == b.num_states()
        && walk(a, b, true).is_some_and(|m| m.len() == a.num_states())
}

/// Embedding of an automaton whose states are all reachable into another.
pub fn embeds(a: &Dfa, b: &Dfa) -> bool {
    walk(a, b, false).is_some_and(|m| m.len() == a.num_states())
}

/// Exhaustive best grounding: variables in name order, objects in id
/// order, first maximum kept.
pub fn brute_ground(models: &PredicateSet, ex: &SceneExample) -> Option<(f64, Vec<(String, ObjectId)>)> {
    let vars: Vec<String> = {
        let mut v: Vec<String> = ex.formula.variables().into_iter().map(str::to_string).collect();
        v.sort();
        v.dedup();
        v
    };
    let mut objects: Vec<(ObjectId, Vec<f64>)> = ex.scene.objects().to_vec();
    objects.sort_by_key(|o| o.0);
    let mut best: Option<(f64, Vec<usize>)> = None;
    let mut current = Vec::new();
    fn rec(
        k: usize,
        n: usize,
        current: &mut Vec<usize>,
        visit: &mut dyn FnMut(&[usize]),
    ) {
        if current.len() == k {
            visit(current);
            return;
        }
        for o in 0..n {
            if !current.contains(&o) {
                current.push(o);
                rec(k, n, current, visit);
                current.pop();
            }
        }
    }
    rec(vars.len(), objects.len(), &mut current, &mut |a| {
        let env: BTreeMap<&str, &[f64]> =
            vars.iter().map(String::as_str).zip(a.iter().map(|&i| objects[i].1.as_slice())).collect();
        let v = fuzzy_eval(&ex.formula, models, &env);
        if best.as_ref().is_none_or(|(b, _)| v > *b) {
            best = Some((v, a.to_vec()));
        }
    });
    best.map(|(v, a)| (v, vars.iter().cloned().zip(a.iter().map(|&i| objects[i].0)).collect()))
}

pub fn fuzzy_eval(t: &Term, models: &PredicateSet, env: &BTreeMap<&str, &[f64]>) -> f64 {
    let Term::Apply { op, args } = t else { panic!("bare variable") };
    let arg = |i: usize| fuzzy_eval(&args[i], models, env);
    match op.as_str() {
        "and" => arg(0).min(arg(1)),
        "or" => arg(0).max(arg(1)),
        "implies" => (1.0 - arg(0)).max(arg(1)),
        "not" => 1.0 - arg(0),
        p => {
            let Term::Var(x) = &args[0] else { panic!("predicate on a non-variable") };
            models.get(p).unwrap().score(env[x.as_str()])
        }
    }
}

/// Distinct terms derivable from each nonterminal with derivation height
/// at most `depth`, built bottom-up as strings.
pub fn brute_derivations(g: &RegularTreeGrammar, depth: usize) -> BTreeSet<String> {
    let rules: Vec<(String, Term)> = g.rules().to_vec();
    let nts: BTreeSet<String> = rules.iter().map(|(n, _)| n.clone()).collect();
    let mut sets: BTreeMap<String, BTreeSet<String>> = nts.iter().map(|n| (n.clone(), BTreeSet::new())).collect();
    fn expand(t: &Term, nts: &BTreeSet<String>, prev: &BTreeMap<String, BTreeSet<String>>) -> Vec<String> {
        match t {
            Term::Var(_) => unreachable!(),
            Term::Apply { op, args } if args.is_empty() && nts.contains(op) => prev[op].iter().cloned().collect(),
            Term::Apply { op, args } if args.is_empty() => vec![op.clone()],
            Term::Apply { op, args } => {
                let mut acc = vec![String::new()];
                for (i, a) in args.iter().enumerate() {
                    let opts = expand(a, nts, prev);
                    let mut next = Vec::new();
                    for p in &acc {
                        for o in &opts {
                            next.push(if i == 0 { o.clone() } else { format!("{p},{o}") });
                        }
                    }
                    acc = next;
                }
                acc.into_iter().map(|s| format!("{op}[{s}]")).collect()
            }
        }
    }
    for _ in 0..depth {
        let prev = sets.clone();
        for (n, rhs) in &rules {
            let terms = expand(rhs, &nts, &prev);
            sets.get_mut(n).unwrap().extend(terms);
        }
    }
    sets.remove(g.start()).unwrap_or_default()
}
