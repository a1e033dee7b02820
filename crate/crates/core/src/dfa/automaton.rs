use std::cmp::Ordering;
use std::collections::{BTreeSet, VecDeque};
use std::fmt::Write as _;

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum DfaError {
    #[error("alphabet is empty")]
    EmptyAlphabet,
    #[error("symbol `{0}` appears twice in the alphabet")]
    DuplicateSymbol(char),
    #[error("symbol `{0}` is not in the alphabet")]
    SymbolNotInAlphabet(char),
    #[error("state {0} does not exist")]
    NoSuchState(usize),
    #[error("automaton has no states")]
    NoStates,
}

/// A partial deterministic automaton over single-character symbols.
/// States are `0..n`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Dfa {
    alphabet: Vec<char>,
    delta: Vec<Vec<Option<usize>>>,
    initial: usize,
    finals: Vec<bool>,
}

/// Strict lexicographic comparison under the order of `alphabet`; a proper
/// prefix precedes its extensions.
pub fn lex_cmp(u: &str, w: &str, alphabet: &[char]) -> Result<Ordering, DfaError> {
    let rank = |c: char| alphabet.iter().position(|&a| a == c).ok_or(DfaError::SymbolNotInAlphabet(c));
    let mut a = u.chars();
    let mut b = w.chars();
    loop {
        match (a.next(), b.next()) {
            (None, None) => return Ok(Ordering::Equal),
            (None, Some(c)) => {
                rank(c)?;
                for c in b {
                    rank(c)?;
                }
                return Ok(Ordering::Less);
            }
            (Some(c), None) => {
                rank(c)?;
                for c in a {
                    rank(c)?;
                }
                return Ok(Ordering::Greater);
            }
            (Some(x), Some(y)) => {
                let o = rank(x)?.cmp(&rank(y)?);
                if o != Ordering::Equal {
                    for c in a.chain(b) {
                        rank(c)?;
                    }
                    return Ok(o);
                }
            }
        }
    }
}

pub fn lex_less(u: &str, w: &str, alphabet: &[char]) -> Result<bool, DfaError> {
    Ok(lex_cmp(u, w, alphabet)? == Ordering::Less)
}

/// Shorter strings first, then lexicographic.
pub fn shortlex_cmp(u: &str, w: &str, alphabet: &[char]) -> Result<Ordering, DfaError> {
    let (lu, lw) = (u.chars().count(), w.chars().count());
    if lu != lw {
        lex_cmp(u, w, alphabet)?;
        return Ok(lu.cmp(&lw));
    }
    lex_cmp(u, w, alphabet)
}

/// Renders the empty string as `ε`.
pub fn show(w: &str) -> String {
    if w.is_empty() {
        "ε".to_string()
    } else {
        w.to_string()
    }
}

impl Dfa {
    /// `states` states, no transitions, no finals.
    pub fn new(alphabet: &[char], states: usize, initial: usize) -> Result<Self, DfaError> {
        if alphabet.is_empty() {
            return Err(DfaError::EmptyAlphabet);
        }
        for (i, c) in alphabet.iter().enumerate() {
            if alphabet[..i].contains(c) {
                return Err(DfaError::DuplicateSymbol(*c));
            }
        }
        if states == 0 {
            return Err(DfaError::NoStates);
        }
        if initial >= states {
            return Err(DfaError::NoSuchState(initial));
        }
        Ok(Dfa {
            alphabet: alphabet.to_vec(),
            delta: vec![vec![None; alphabet.len()]; states],
            initial,
            finals: vec![false; states],
        })
    }

    pub fn set_transition(&mut self, from: usize, symbol: char, to: usize) -> Result<(), DfaError> {
        let s = self.symbol_index(symbol)?;
        self.check_state(from)?;
        self.check_state(to)?;
        self.delta[from][s] = Some(to);
        Ok(())
    }

    pub fn clear_transition(&mut self, from: usize, symbol: char) -> Result<(), DfaError> {
        let s = self.symbol_index(symbol)?;
        self.check_state(from)?;
        self.delta[from][s] = None;
        Ok(())
    }

    pub fn set_final(&mut self, state: usize, is_final: bool) -> Result<(), DfaError> {
        self.check_state(state)?;
        self.finals[state] = is_final;
        Ok(())
    }

    fn check_state(&self, q: usize) -> Result<(), DfaError> {
        if q < self.delta.len() {
            Ok(())
        } else {
            Err(DfaError::NoSuchState(q))
        }
    }

    pub fn alphabet(&self) -> &[char] {
        &self.alphabet
    }

    pub fn num_states(&self) -> usize {
        self.delta.len()
    }

    pub fn initial(&self) -> usize {
        self.initial
    }

    pub fn is_final(&self, q: usize) -> bool {
        self.finals[q]
    }

    pub fn finals(&self) -> impl Iterator<Item = usize> + '_ {
        (0..self.num_states()).filter(|&q| self.finals[q])
    }

    pub fn symbol_index(&self, c: char) -> Result<usize, DfaError> {
        self.alphabet.iter().position(|&a| a == c).ok_or(DfaError::SymbolNotInAlphabet(c))
    }

    pub fn step(&self, q: usize, symbol: char) -> Result<Option<usize>, DfaError> {
        Ok(self.delta[q][self.symbol_index(symbol)?])
    }

    /// Transition by symbol index.
    pub fn next(&self, q: usize, s: usize) -> Option<usize> {
        self.delta[q][s]
    }

    /// All defined transitions as `(from, symbol, to)` in state/symbol order.
    pub fn transitions(&self) -> impl Iterator<Item = (usize, char, usize)> + '_ {
        self.delta.iter().enumerate().flat_map(move |(q, row)| {
            row.iter().enumerate().filter_map(move |(s, t)| t.map(|r| (q, self.alphabet[s], r)))
        })
    }

    /// State reached on `w`, or `None` where the run leaves the domain of δ.
    pub fn run(&self, w: &str) -> Result<Option<usize>, DfaError> {
        let mut q = Some(self.initial);
        for c in w.chars() {
            let s = self.symbol_index(c)?;
            q = q.and_then(|q| self.delta[q][s]);
        }
        Ok(q)
    }

    pub fn accepts(&self, w: &str) -> Result<bool, DfaError> {
        Ok(self.run(w)?.is_some_and(|q| self.finals[q]))
    }

    fn reachable(&self) -> Vec<bool> {
        let mut seen = vec![false; self.num_states()];
        let mut queue = VecDeque::from([self.initial]);
        seen[self.initial] = true;
        while let Some(q) = queue.pop_front() {
            for r in self.delta[q].iter().flatten() {
                if !seen[*r] {
                    seen[*r] = true;
                    queue.push_back(*r);
                }
            }
        }
        seen
    }

    /// States from which some final state is reachable.
    pub fn coreachable(&self) -> Vec<bool> {
        let n = self.num_states();
        let mut rev: Vec<Vec<usize>> = vec![Vec::new(); n];
        for (q, _, r) in self.transitions() {
            rev[r].push(q);
        }
        let mut seen = self.finals.clone();
        let mut stack: Vec<usize> = self.finals().collect();
        while let Some(q) = stack.pop() {
            for &p in &rev[q] {
                if !seen[p] {
                    seen[p] = true;
                    stack.push(p);
                }
            }
        }
        seen
    }

    /// `w = ε`, or some extension of `w` is accepted.
    pub fn is_live(&self, w: &str) -> Result<bool, DfaError> {
        let q = self.run(w)?;
        if w.is_empty() {
            return Ok(true);
        }
        Ok(q.is_some_and(|q| self.coreachable()[q]))
    }

    /// The partial canonical automaton: one state per live Nerode class,
    /// numbered in breadth-first order from the initial state.
    pub fn canonical(&self) -> Dfa {
        let reach = self.reachable();
        let co = self.coreachable();
        let live: Vec<bool> = (0..self.num_states()).map(|q| reach[q] && co[q]).collect();
        let k = self.alphabet.len();
        if !live[self.initial] {
            return Dfa {
                alphabet: self.alphabet.clone(),
                delta: vec![vec![None; k]],
                initial: 0,
                finals: vec![false],
            };
        }
        // Moore refinement; a missing or dead successor is the implicit sink.
        let states: Vec<usize> = (0..self.num_states()).filter(|&q| live[q]).collect();
        let mut class = vec![usize::MAX; self.num_states()];
        for &q in &states {
            class[q] = usize::from(self.finals[q]);
        }
        let mut count = 0;
        loop {
            let mut sigs: Vec<(Vec<Option<usize>>, usize)> = Vec::new();
            let mut next = vec![usize::MAX; self.num_states()];
            for &q in &states {
                let mut sig = vec![Some(class[q])];
                sig.extend(self.delta[q].iter().map(|t| t.filter(|r| live[*r]).map(|r| class[r])));
                let id = match sigs.iter().position(|(s, _)| *s == sig) {
                    Some(i) => sigs[i].1,
                    None => {
                        sigs.push((sig, sigs.len()));
                        sigs.len() - 1
                    }
                };
                next[q] = id;
            }
            let new_count = sigs.len();
            class = next;
            if new_count == count {
                break;
            }
            count = new_count;
        }
        // Breadth-first renumbering.
        let mut order = vec![usize::MAX; count];
        let mut rep = vec![usize::MAX; count];
        for &q in &states {
            if rep[class[q]] == usize::MAX {
                rep[class[q]] = q;
            }
        }
        let mut queue = VecDeque::from([class[self.initial]]);
        order[class[self.initial]] = 0;
        let mut n = 1;
        let mut bfs = Vec::new();
        while let Some(c) = queue.pop_front() {
            bfs.push(c);
            for t in self.delta[rep[c]].iter() {
                if let Some(r) = t.filter(|r| live[*r]) {
                    let rc = class[r];
                    if order[rc] == usize::MAX {
                        order[rc] = n;
                        n += 1;
                        queue.push_back(rc);
                    }
                }
            }
        }
        let mut delta = vec![vec![None; k]; n];
        let mut finals = vec![false; n];
        for &c in &bfs {
            let q = rep[c];
            finals[order[c]] = self.finals[q];
            for s in 0..k {
                delta[order[c]][s] = self.delta[q][s].filter(|r| live[*r]).map(|r| order[class[r]]);
            }
        }
        Dfa { alphabet: self.alphabet.clone(), delta, initial: 0, finals }
    }

    /// `pred[B] = {(D, ξ) | δ(D, ξ) = B}` for every state.
    pub fn pred_map(&self) -> Vec<BTreeSet<(usize, char)>> {
        let mut pred = vec![BTreeSet::new(); self.num_states()];
        for (q, c, r) in self.transitions() {
            pred[r].insert((q, c));
        }
        pred
    }

    pub fn is_convergence(&self, q: usize) -> bool {
        usize::from(q == self.initial) + self.pred_map()[q].len() > 1
    }

    /// Shortest, then lexicographically least, string reaching each state.
    pub fn access_strings(&self) -> Vec<Option<String>> {
        let mut acc: Vec<Option<String>> = vec![None; self.num_states()];
        acc[self.initial] = Some(String::new());
        let mut queue = VecDeque::from([self.initial]);
        while let Some(q) = queue.pop_front() {
            let base = acc[q].clone().unwrap_or_default();
            for (s, t) in self.delta[q].iter().enumerate() {
                if let Some(r) = *t {
                    if acc[r].is_none() {
                        let mut w = base.clone();
                        w.push(self.alphabet[s]);
                        acc[r] = Some(w);
                        queue.push_back(r);
                    }
                }
            }
        }
        acc
    }

    /// A bijection `π` from the states of `self` to those of `other`
    /// preserving the initial state, finals and δ including undefinedness.
    pub fn isomorphism(&self, other: &Dfa) -> Option<Vec<usize>> {
        if self.num_states() != other.num_states() || !same_symbols(&self.alphabet, &other.alphabet) {
            return None;
        }
        let symmap: Vec<usize> = self.alphabet.iter().map(|c| other.symbol_index(*c).unwrap()).collect();
        let mut pi = vec![None; self.num_states()];
        let mut used = vec![false; other.num_states()];
        search(self, other, &symmap, Mode::Iso, &mut pi, &mut used, (self.initial, other.initial))
            .then(|| pi.into_iter().map(Option::unwrap).collect())
    }

    /// An injective `π` with `π(q₀) = q₀'`, `δ'(π(q), ξ) = π(δ(q, ξ))` on
    /// the domain of δ, and `π(F) ⊆ F'`.
    pub fn embedding(&self, other: &Dfa) -> Option<Vec<usize>> {
        if self.num_states() > other.num_states() {
            return None;
        }
        let mut symmap = Vec::with_capacity(self.alphabet.len());
        for (s, c) in self.alphabet.iter().enumerate() {
            match other.symbol_index(*c) {
                Ok(i) => symmap.push(i),
                Err(_) if self.delta.iter().all(|row| row[s].is_none()) => symmap.push(usize::MAX),
                Err(_) => return None,
            }
        }
        let mut pi = vec![None; self.num_states()];
        let mut used = vec![false; other.num_states()];
        search(self, other, &symmap, Mode::Embed, &mut pi, &mut used, (self.initial, other.initial))
            .then(|| pi.into_iter().map(Option::unwrap).collect())
    }

    /// Graphviz rendering; states are labelled by their access strings when
    /// `labels` is set.
    pub fn to_dot(&self, labels: bool) -> String {
        let acc = self.access_strings();
        let mut out = String::from("digraph dfa {\n  rankdir=LR;\n  __start [shape=point];\n");
        for q in 0..self.num_states() {
            let shape = if self.finals[q] { "doublecircle" } else { "circle" };
            let label = match (&acc[q], labels) {
                (Some(w), true) => format!("[{}]", show(w)),
                _ => format!("q{q}"),
            };
            let _ = writeln!(out, "  q{q} [shape={shape}, label=\"{label}\"];");
        }
        let _ = writeln!(out, "  __start -> q{};", self.initial);
        for (q, c, r) in self.transitions() {
            let _ = writeln!(out, "  q{q} -> q{r} [label=\"{c}\"];");
        }
        out.push_str("}\n");
        out
    }
}

fn same_symbols(a: &[char], b: &[char]) -> bool {
    a.len() == b.len() && a.iter().all(|c| b.contains(c))
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum Mode {
    Iso,
    Embed,
}

fn search(
    a: &Dfa,
    b: &Dfa,
    symmap: &[usize],
    mode: Mode,
    pi: &mut Vec<Option<usize>>,
    used: &mut Vec<bool>,
    seed: (usize, usize),
) -> bool {
    let saved = (pi.clone(), used.clone());
    if !propagate(a, b, symmap, mode, pi, used, seed) {
        *pi = saved.0;
        *used = saved.1;
        return false;
    }
    let Some(q) = pi.iter().position(Option::is_none) else {
        return true;
    };
    for r in 0..b.num_states() {
        if used[r] {
            continue;
        }
        if search(a, b, symmap, mode, pi, used, (q, r)) {
            return true;
        }
    }
    *pi = saved.0;
    *used = saved.1;
    false
}

fn propagate(
    a: &Dfa,
    b: &Dfa,
    symmap: &[usize],
    mode: Mode,
    pi: &mut [Option<usize>],
    used: &mut [bool],
    seed: (usize, usize),
) -> bool {
    let mut stack = vec![seed];
    while let Some((q, r)) = stack.pop() {
        match pi[q] {
            Some(existing) if existing == r => continue,
            Some(_) => return false,
            None if used[r] => return false,
            None => {}
        }
        let finals_ok = match mode {
            Mode::Iso => a.finals[q] == b.finals[r],
            Mode::Embed => !a.finals[q] || b.finals[r],
        };
        if !finals_ok {
            return false;
        }
        pi[q] = Some(r);
        used[r] = true;
        for (s, &t) in symmap.iter().enumerate() {
            let from_a = a.delta[q][s];
            let from_b = if t == usize::MAX { None } else { b.delta[r][t] };
            match (from_a, from_b) {
                (Some(x), Some(y)) => stack.push((x, y)),
                (None, None) => {}
                (None, Some(_)) if mode == Mode::Embed => {}
                _ => return false,
            }
        }
    }
    true
}
